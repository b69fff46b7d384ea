use std::io::Write;

use serde::Serialize;

use super::cost::CostTable;
use super::job::{Category, JobGraph};
use super::schedule::Timeline;
use crate::error::Result;

pub const STATS_VERSION: u32 = 1;
pub const TRACE_VERSION: u32 = 1;

/// Bases per second a full flow cell produces.
pub fn real_time_floor(channels: usize, sample_rate_hz: f64, samples_per_base: f64) -> f64 {
    channels as f64 * sample_rate_hz / samples_per_base
}

/// Default floor: 512 channels at 4 kHz, 10 samples per base.
pub const REAL_TIME_FLOOR: f64 = 204_800.0;

/// Share of a token's runtime per category. Walking back from the token's
/// final op, each op contributes its own latency to its category, and the
/// gap between its same-token inputs finishing and its start counts as
/// contention (busy resources, recurrence, or full downstream buffers).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Breakdown {
    pub vmm: f64,
    pub lstm_ops: f64,
    pub data_movement: f64,
    pub contention: f64,
    pub other: f64,
    pub token_latency_cycles: f64,
}

impl Breakdown {
    pub fn data_movement_and_contention(&self) -> f64 {
        self.data_movement + self.contention
    }
}

/// Cycles per category along token `token`'s path.
pub fn token_profile(job: &JobGraph, timeline: &Timeline, token: usize) -> [u64; 5] {
    let mut acc = [0u64; 5];
    let idx = |c: Category| match c {
        Category::Vmm => 0,
        Category::LstmOps => 1,
        Category::DataMovement => 2,
        Category::Contention => 3,
        Category::Other => 4,
    };
    let Some(&last) = job.token_final.get(token) else {
        return acc;
    };
    let mut cur = last;
    loop {
        let op = &job.ops[cur];
        let t = timeline.ops[cur];
        acc[idx(op.category())] += t.end - t.start;
        let prev = op
            .preds
            .iter()
            .copied()
            .filter(|&p| job.ops[p].token == token)
            .max_by_key(|&p| (timeline.ops[p].end, p));
        let Some(p) = prev else {
            break;
        };
        acc[idx(Category::Contention)] += t.start - timeline.ops[p].end;
        cur = p;
    }
    acc
}

/// Average profile over `tokens`.
pub fn breakdown(job: &JobGraph, timeline: &Timeline, tokens: std::ops::Range<usize>) -> Breakdown {
    let mut sum = [0u64; 5];
    let count = tokens.len();
    for k in tokens {
        for (s, v) in sum.iter_mut().zip(token_profile(job, timeline, k)) {
            *s += v;
        }
    }
    let total: u64 = sum.iter().sum();
    if total == 0 {
        return Breakdown::default();
    }
    let f = |v: u64| v as f64 / total as f64;
    Breakdown {
        vmm: f(sum[0]),
        lstm_ops: f(sum[1]),
        data_movement: f(sum[2]),
        contention: f(sum[3]),
        other: f(sum[4]),
        token_latency_cycles: total as f64 / count as f64,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Stats {
    pub version: u32,
    pub n_tokens: usize,
    pub n_ops: usize,
    pub makespan_cycles: u64,
    pub seconds: f64,
    pub energy_j: f64,
    pub average_power_w: f64,
    /// Steady-state cycles between consecutive token completions.
    pub cycles_per_token: f64,
    pub frames_per_s: f64,
    pub bases_per_s: f64,
    pub tops: f64,
    pub bases_per_s_per_w: f64,
    pub bases_per_s_per_mm2: f64,
    pub area_mm2: f64,
    pub real_time_factor: f64,
    pub breakdown: Breakdown,
}

/// Throughput, power and runtime breakdown of a scheduled job. Steady-state
/// figures use the second half of the tokens.
pub fn report(
    job: &JobGraph,
    timeline: &Timeline,
    costs: &CostTable,
    samples_per_base: f64,
    area_mm2: f64,
) -> Stats {
    let n = job.n_tokens;
    if n == 0 || timeline.makespan == 0 {
        return Stats {
            version: STATS_VERSION,
            area_mm2,
            ..Stats::default()
        };
    }
    let done: Vec<u64> = job
        .token_final
        .iter()
        .map(|&o| timeline.ops[o].end)
        .collect();
    let half = n / 2;
    let cycles_per_token = if n >= 4 {
        (done[n - 1] - done[half]) as f64 / (n - 1 - half) as f64
    } else {
        timeline.makespan as f64 / n as f64
    };
    let seconds = timeline.makespan as f64 / costs.clock_hz;
    let frames_per_s = costs.clock_hz / cycles_per_token;
    let bases_per_s = frames_per_s * job.samples_per_frame as f64 / samples_per_base;
    let power = timeline.energy_j / seconds;
    let macs: u64 = job.ops.iter().map(|o| o.macs).sum();
    let steady = if n >= 4 { half..n } else { 0..n };
    Stats {
        version: STATS_VERSION,
        n_tokens: n,
        n_ops: job.ops.len(),
        makespan_cycles: timeline.makespan,
        seconds,
        energy_j: timeline.energy_j,
        average_power_w: power,
        cycles_per_token,
        frames_per_s,
        bases_per_s,
        tops: macs as f64 / seconds / 1e12,
        bases_per_s_per_w: bases_per_s / power,
        bases_per_s_per_mm2: bases_per_s / area_mm2,
        area_mm2,
        real_time_factor: bases_per_s / REAL_TIME_FLOOR,
        breakdown: breakdown(job, timeline, steady),
    }
}

#[derive(Serialize)]
struct TraceHeader {
    format: &'static str,
    version: u32,
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    id: usize,
    token: usize,
    kind: super::job::OpKind,
    layer: Option<usize>,
    resources: &'a [super::job::Resource],
    start_cycle: u64,
    end_cycle: u64,
    energy_fj: f64,
}

/// One JSON object per line: a header, then every op in id order.
pub fn write_trace(job: &JobGraph, timeline: &Timeline, mut out: impl Write) -> Result<()> {
    serde_json::to_writer(
        &mut out,
        &TraceHeader {
            format: "cimba-trace",
            version: TRACE_VERSION,
        },
    )?;
    out.write_all(b"\n")?;
    for (op, t) in job.ops.iter().zip(&timeline.ops) {
        serde_json::to_writer(
            &mut out,
            &TraceRecord {
                id: op.id,
                token: op.token,
                kind: op.kind,
                layer: op.layer,
                resources: &op.resources,
                start_cycle: t.start,
                end_cycle: t.end,
                energy_fj: t.energy_j * 1e15,
            },
        )?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
