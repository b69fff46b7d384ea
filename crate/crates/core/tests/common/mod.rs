//! Independent oracles and invariant checks shared by the integration
//! suites and the acceptance run.
#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use std::collections::HashMap;

use cimba::device::TILE_DIM;
use cimba::dnn::{Activations, LayerKind, LayerSpec};
use cimba::frames::TransitionFrames;
use cimba::mapper::Mapping;
use cimba::sim::{op_cost, CostTable, JobGraph, Resource, Timeline};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `t` random frames for a 4-state CRF with scores in `[-scale, scale]`.
pub fn random_frames(t: usize, scale: f32, rng: &mut impl Rng) -> TransitionFrames {
    let data = (0..t * 20).map(|_| rng.gen_range(-scale..scale)).collect();
    TransitionFrames::new(4, data).unwrap()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Every path through a 4-state, single-base CRF of length `t`, as the
/// transition index taken at each frame. A move to base `b` lands in
/// state `b`; a stay keeps the state.
pub fn all_paths(t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s0 in 0..4 {
        let mut stack = vec![(s0, Vec::new())];
        while let Some((s, path)) = stack.pop() {
            if path.len() == t {
                out.push(path);
                continue;
            }
            for d in 0..5 {
                let next = if d == 0 { s } else { d - 1 };
                let mut p = path.clone();
                p.push(s * 5 + d);
                stack.push((next, p));
            }
        }
    }
    out
}

/// Exhaustive two-stage decode: posterior scores by summing over every
/// path, then the per-frame transition of the best path under those
/// scores (max-marginal, lowest index on ties).
pub fn brute_force_decode(frames: &TransitionFrames) -> Vec<usize> {
    let t = frames.len();
    let w: Vec<Vec<f64>> = frames
        .frames()
        .map(|f| f.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let paths = all_paths(t);
    let mut u = vec![vec![f64::NEG_INFINITY; 20]; t];
    for p in &paths {
        let score: f64 = p.iter().enumerate().map(|(i, &tr)| w[i][tr]).sum();
        for (i, &tr) in p.iter().enumerate() {
            u[i][tr] = log_add(u[i][tr], score);
        }
    }
    let mut best = vec![vec![f64::NEG_INFINITY; 20]; t];
    for p in &paths {
        let score: f64 = p.iter().enumerate().map(|(i, &tr)| u[i][tr]).sum();
        for (i, &tr) in p.iter().enumerate() {
            best[i][tr] = best[i][tr].max(score);
        }
    }
    best.iter()
        .map(|row| {
            let mut k = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[k] {
                    k = j;
                }
            }
            k
        })
        .collect()
}

/// Best global alignment by recursion over all alignments; ranks by score,
/// then matches, then shorter length. Returns `(matches, length)`.
pub fn brute_force_alignment(a: &[u8], b: &[u8]) -> (usize, usize) {
    fn go(
        a: &[u8],
        b: &[u8],
        memo: &mut HashMap<(usize, usize), (i64, i64, i64)>,
    ) -> (i64, i64, i64) {
        if a.is_empty() && b.is_empty() {
            return (0, 0, 0);
        }
        if let Some(&v) = memo.get(&(a.len(), b.len())) {
            return v;
        }
        let mut options = Vec::new();
        if !a.is_empty() && !b.is_empty() {
            let (s, m, l) = go(&a[1..], &b[1..], memo);
            let hit = a[0] == b[0];
            options.push((s + if hit { 1 } else { -1 }, m + hit as i64, l - 1));
        }
        if !a.is_empty() {
            let (s, m, l) = go(&a[1..], b, memo);
            options.push((s - 1, m, l - 1));
        }
        if !b.is_empty() {
            let (s, m, l) = go(a, &b[1..], memo);
            options.push((s - 1, m, l - 1));
        }
        let best = options.into_iter().max().unwrap();
        memo.insert((a.len(), b.len()), best);
        best
    }
    let (_, m, l) = go(a, b, &mut HashMap::new());
    (m as usize, (-l) as usize)
}

/// No two ops overlap in time on a shared resource, by sorting each
/// resource's intervals.
pub fn check_exclusive(job: &JobGraph, tl: &Timeline) -> Result<(), String> {
    let mut by_res: HashMap<Resource, Vec<(u64, u64, usize)>> = HashMap::new();
    for op in &job.ops {
        let t = tl.ops[op.id];
        for &r in &op.resources {
            by_res.entry(r).or_default().push((t.start, t.end, op.id));
        }
    }
    for (r, mut iv) in by_res {
        iv.sort_unstable();
        for w in iv.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(format!("ops {} and {} overlap on {r:?}", w[0].2, w[1].2));
            }
        }
    }
    Ok(())
}

/// Timeline energy equals the sum of independently costed ops, and every
/// op starts after its predecessors end.
pub fn check_energy_and_order(
    job: &JobGraph,
    tl: &Timeline,
    costs: &CostTable,
) -> Result<(), String> {
    let mut total = 0.0;
    for op in &job.ops {
        let (lat, e) = op_cost(op, costs);
        let t = tl.ops[op.id];
        if t.end - t.start != lat {
            return Err(format!("op {} latency {} != {lat}", op.id, t.end - t.start));
        }
        if t.energy_j != e {
            return Err(format!("op {} energy differs", op.id));
        }
        if let Some(p) = op.preds.iter().find(|&&p| tl.ops[p].end > t.start) {
            return Err(format!("op {} starts before pred {p} ends", op.id));
        }
        total += e;
    }
    let rel = (tl.energy_j - total).abs() / total.max(f64::MIN_POSITIVE);
    if rel > 1e-12 {
        return Err(format!("energy {} != sum {total}", tl.energy_j));
    }
    Ok(())
}

/// Mean of the paired differences `a - b` and the half-width of its
/// one-sided 95% confidence bound.
pub fn paired_difference(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let m = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, 1.645 * (var / n).sqrt())
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Convolution over an explicitly zero-padded copy of the input.
pub fn conv_oracle(layer: &LayerSpec, x: &Activations) -> Vec<f64> {
    let LayerKind::Conv1d {
        in_channels: ci,
        out_channels: co,
        kernel: k,
        stride: s,
        padding: p,
        ..
    } = layer.kind
    else {
        unreachable!()
    };
    let len = x.len();
    let mut padded = vec![vec![0.0f64; len + 2 * p]; ci];
    for t in 0..len {
        for c in 0..ci {
            padded[c][t + p] = f64::from(x.row(t)[c]);
        }
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start + k <= len + 2 * p {
        for o in 0..co {
            let mut acc = f64::from(layer.bias[o]);
            for c in 0..ci {
                for j in 0..k {
                    acc += f64::from(layer.weights[(o * ci + c) * k + j]) * padded[c][start + j];
                }
            }
            out.push(acc);
        }
        start += s;
    }
    out
}

/// Unrolled LSTM in double precision with gate blocks `i, f, g, o`.
pub fn lstm_oracle(
    w: &[f32],
    b: &[f32],
    hidden: usize,
    xs: &[f32],
    reverse: bool,
) -> Vec<Vec<f64>> {
    let width = 1 + hidden;
    let mut h = vec![0.0f64; hidden];
    let mut c = vec![0.0f64; hidden];
    let mut out = vec![Vec::new(); xs.len()];
    let order: Vec<usize> = if reverse {
        (0..xs.len()).rev().collect()
    } else {
        (0..xs.len()).collect()
    };
    for t in order {
        let z: Vec<f64> = (0..4 * hidden)
            .map(|r| {
                let row = &w[r * width..(r + 1) * width];
                let mut acc = f64::from(b[r]) + f64::from(row[0]) * f64::from(xs[t]);
                for k in 0..hidden {
                    acc += f64::from(row[1 + k]) * h[k];
                }
                acc
            })
            .collect();
        for k in 0..hidden {
            let (i, f, g, o) = (
                sigmoid(z[k]),
                sigmoid(z[hidden + k]),
                z[2 * hidden + k].tanh(),
                sigmoid(z[3 * hidden + k]),
            );
            c[k] = f * c[k] + i * g;
            h[k] = o * c[k].tanh();
        }
        out[t] = h.clone();
    }
    out
}

/// Every tile cell claimed at most once, on a full bitmap per tile.
pub fn cells_disjoint(m: &Mapping, n_tiles: usize) -> bool {
    let mut grid = vec![vec![false; TILE_DIM * TILE_DIM]; n_tiles];
    for l in &m.layers {
        for b in l.blocks() {
            for r in b.row0..b.row0 + b.rows {
                for c in b.col0..b.col0 + b.cols {
                    let cell = &mut grid[b.tile][r * TILE_DIM + c];
                    if *cell {
                        return false;
                    }
                    *cell = true;
                }
            }
        }
    }
    true
}
