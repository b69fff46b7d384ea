//! Cycle-level simulation of a mapped network on the tile mesh.

mod cost;
mod job;
mod mesh;
mod report;
mod schedule;

pub use cost::{peak_compute, CostTable, MeshLatencyMode, OpCost, PeakCompute};
pub use job::{
    build_job_graph, build_job_graph_with, Category, JobGraph, JobOptions, MicroOp, OpKind,
    Resource, Width,
};
pub use mesh::{route, Channel, Direction, MeshPath};
pub use report::{
    breakdown, real_time_floor, report, token_profile, write_trace, Breakdown, Stats,
    REAL_TIME_FLOOR, STATS_VERSION, TRACE_VERSION,
};
pub use schedule::{critical_path, op_cost, schedule, OpTiming, Timeline};

use crate::dnn::NetworkGraph;
use crate::error::Result;
use crate::mapper::{ArchDescription, Mapping};

/// Build, schedule and report in one call.
pub fn simulate(
    graph: &NetworkGraph,
    mapping: &Mapping,
    arch: &ArchDescription,
    costs: &CostTable,
    n_tokens: usize,
    samples_per_base: f64,
    area_mm2: f64,
) -> Result<(JobGraph, Timeline, Stats)> {
    costs.validate()?;
    let job = build_job_graph(graph, mapping, arch, n_tokens)?;
    let timeline = schedule(&job, costs);
    let stats = report(&job, &timeline, costs, samples_per_base, area_mm2);
    Ok((job, timeline, stats))
}
