use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use super::cost::CostTable;
use super::job::{JobGraph, MicroOp, OpKind, Resource, Width};

/// Timing of one scheduled op.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OpTiming {
    /// All predecessors finished.
    pub ready: u64,
    pub start: u64,
    pub end: u64,
    pub energy_j: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timeline {
    pub ops: Vec<OpTiming>,
    pub makespan: u64,
    pub energy_j: f64,
}

fn bits(op: &MicroOp, costs: &CostTable) -> u64 {
    let w = match op.width {
        Width::None => 0,
        Width::Activation => costs.activation_bits,
        Width::DpuValue => costs.dpu_value_bits,
        Width::Sample => costs.sample_bits,
    };
    op.elements * w
}

/// Latency in cycles and energy in joules of `op`.
pub fn op_cost(op: &MicroOp, costs: &CostTable) -> (u64, f64) {
    let e = op.elements as f64;
    match op.kind {
        OpKind::Vmm => (costs.vmm.cycles, costs.vmm.energy_j),
        OpKind::BatchNormAux => (
            costs.batchnorm.cycles * op.repeats.max(1),
            costs.batchnorm.energy_j * e,
        ),
        OpKind::SwishLut => (costs.lut_swish.cycles, costs.lut_swish.energy_j * e),
        OpKind::LstmAux => (costs.lstm_aux.cycles, costs.lstm_aux.energy_j * e),
        OpKind::Decode => (costs.decode.cycles, costs.decode.energy_j * e),
        OpKind::SramAccess => (
            costs.sram_bit.cycles,
            costs.sram_bit.energy_j * bits(op, costs) as f64,
        ),
        OpKind::MeshTransfer => {
            let path = op.path.as_ref().expect("transfers carry a path");
            (
                path.latency(costs).max(1),
                path.energy(bits(op, costs), costs),
            )
        }
    }
}

/// Non-preemptive list scheduling. Whenever resources free up, ready ops
/// are started in `(token, id)` order if everything they claim is idle.
pub fn schedule(job: &JobGraph, costs: &CostTable) -> Timeline {
    let n = job.ops.len();
    let mut succ = vec![Vec::new(); n];
    let mut missing = vec![0usize; n];
    for op in &job.ops {
        missing[op.id] = op.preds.len();
        for &p in &op.preds {
            succ[p].push(op.id);
        }
    }
    let cost: Vec<(u64, f64)> = job.ops.iter().map(|o| op_cost(o, costs)).collect();
    let mut timing = vec![OpTiming::default(); n];
    let mut ready: BTreeSet<(usize, usize)> = job
        .ops
        .iter()
        .filter(|o| o.preds.is_empty())
        .map(|o| (o.token, o.id))
        .collect();
    let mut busy: HashSet<Resource> = HashSet::new();
    let mut running: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut now = 0u64;
    let mut done = 0usize;

    loop {
        let mut started = Vec::new();
        for &(tok, id) in &ready {
            let op = &job.ops[id];
            if op.resources.iter().all(|r| !busy.contains(r)) {
                busy.extend(op.resources.iter().copied());
                let (lat, energy) = cost[id];
                timing[id].start = now;
                timing[id].end = now + lat;
                timing[id].energy_j = energy;
                running.push(Reverse((now + lat, id)));
                started.push((tok, id));
            }
        }
        for k in started {
            ready.remove(&k);
        }
        let Some(Reverse((t, _))) = running.peek().copied() else {
            break;
        };
        now = t;
        while let Some(Reverse((t, id))) = running.peek().copied() {
            if t != now {
                break;
            }
            running.pop();
            done += 1;
            for r in &job.ops[id].resources {
                busy.remove(r);
            }
            for &s in &succ[id] {
                missing[s] -= 1;
                if missing[s] == 0 {
                    timing[s].ready = now;
                    ready.insert((job.ops[s].token, s));
                }
            }
        }
    }
    assert_eq!(
        done,
        n,
        "dependency cycle: {} ops never became ready",
        n - done
    );
    let makespan = timing.iter().map(|t| t.end).max().unwrap_or(0);
    // summed in id order so the total is reproducible
    let energy_j = timing.iter().map(|t| t.energy_j).sum();
    Timeline {
        ops: timing,
        makespan,
        energy_j,
    }
}

/// Longest dependency chain, ignoring resources.
pub fn critical_path(job: &JobGraph, costs: &CostTable) -> u64 {
    let mut finish = vec![0u64; job.ops.len()];
    for op in &job.ops {
        let start = op.preds.iter().map(|&p| finish[p]).max().unwrap_or(0);
        finish[op.id] = start + op_cost(op, costs).0;
    }
    finish.into_iter().max().unwrap_or(0)
}
