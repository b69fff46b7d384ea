use std::collections::BTreeSet;

use serde::Serialize;

use super::cost::{CostTable, MeshLatencyMode};
use crate::mapper::ArchDescription;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    East,
    West,
    North,
    South,
}

/// One shared wire bundle: a grid row or column in one direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Channel {
    Row { y: usize, dir: Direction },
    Col { x: usize, dir: Direction },
}

/// Geometry of a (possibly multicast) transfer under X-then-Y routing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeshPath {
    /// Distinct unit hops along X and Y, and distinct turn points.
    pub x_hops: usize,
    pub y_hops: usize,
    pub turns: usize,
    /// Longest single-destination latency terms: (x legs, y legs, turns)
    /// and (x hops, y hops, turns).
    pub worst_legs: usize,
    pub worst_hops: usize,
    pub channels: Vec<Channel>,
}

impl MeshPath {
    pub fn is_empty(&self) -> bool {
        self.x_hops == 0 && self.y_hops == 0
    }

    pub fn latency(&self, costs: &CostTable) -> u64 {
        let units = match costs.mesh_latency_mode {
            MeshLatencyMode::PerLeg => self.worst_legs,
            MeshLatencyMode::PerHop => self.worst_hops,
        };
        costs.mesh_latency_cycles * units as u64
    }

    pub fn energy(&self, bits: u64, costs: &CostTable) -> f64 {
        bits as f64
            * (costs.mesh_ew_bit_j * self.x_hops as f64
                + costs.mesh_ns_bit_j * self.y_hops as f64
                + costs.mesh_turn_bit_j * self.turns as f64)
    }
}

/// Route from node `from` to every node in `to`, sharing wires between
/// destinations.
pub fn route(arch: &ArchDescription, from: usize, to: &[usize]) -> MeshPath {
    let src = arch.nodes[from];
    let mut xh = BTreeSet::new();
    let mut yh = BTreeSet::new();
    let mut turns = BTreeSet::new();
    let mut channels = BTreeSet::new();
    let mut worst_legs = 0;
    let mut worst_hops = 0;
    for &d in to {
        let dst = arch.nodes[d];
        let (dx, dy) = (src.x.abs_diff(dst.x), src.y.abs_diff(dst.y));
        if dx > 0 {
            let dir = if dst.x > src.x {
                Direction::East
            } else {
                Direction::West
            };
            channels.insert(Channel::Row { y: src.y, dir });
            let (lo, hi) = (src.x.min(dst.x), src.x.max(dst.x));
            for x in lo..hi {
                xh.insert((x, src.y, dir));
            }
        }
        if dy > 0 {
            let dir = if dst.y > src.y {
                Direction::South
            } else {
                Direction::North
            };
            channels.insert(Channel::Col { x: dst.x, dir });
            let (lo, hi) = (src.y.min(dst.y), src.y.max(dst.y));
            for y in lo..hi {
                yh.insert((dst.x, y, dir));
            }
        }
        let turn = dx > 0 && dy > 0;
        if turn {
            turns.insert((dst.x, src.y));
        }
        let legs = (dx > 0) as usize + (dy > 0) as usize + turn as usize;
        worst_legs = worst_legs.max(legs);
        worst_hops = worst_hops.max(dx + dy + turn as usize);
    }
    MeshPath {
        x_hops: xh.len(),
        y_hops: yh.len(),
        turns: turns.len(),
        worst_legs,
        worst_hops,
        channels: channels.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node_at(arch: &ArchDescription, x: usize, y: usize) -> usize {
        arch.nodes
            .iter()
            .position(|n| n.x == x && n.y == y)
            .unwrap()
    }

    #[test]
    fn two_east_hops() {
        let arch = ArchDescription::default();
        let p = route(&arch, node_at(&arch, 0, 1), &[node_at(&arch, 2, 1)]);
        let c = CostTable::default();
        assert_eq!((p.x_hops, p.y_hops, p.turns), (2, 0, 0));
        assert_eq!(p.latency(&c), 3);
        let e = p.energy(512 * 10, &c);
        assert!((e - 459.776e-12).abs() < 1e-18, "{e}");
    }

    #[test]
    fn turn_and_hop_mode() {
        let arch = ArchDescription::default();
        let p = route(&arch, node_at(&arch, 0, 0), &[node_at(&arch, 2, 3)]);
        let mut c = CostTable::default();
        assert_eq!((p.x_hops, p.y_hops, p.turns), (2, 3, 1));
        assert_eq!(p.latency(&c), 9);
        c.mesh_latency_mode = MeshLatencyMode::PerHop;
        assert_eq!(p.latency(&c), 18);
        assert_eq!(p.channels.len(), 2);
    }

    #[test]
    fn multicast_shares_wires() {
        let arch = ArchDescription::default();
        let a = node_at(&arch, 0, 0);
        let p = route(&arch, a, &[node_at(&arch, 2, 0), node_at(&arch, 3, 0)]);
        assert_eq!(p.x_hops, 3);
        assert_eq!(p.channels.len(), 1);
        assert!(route(&arch, a, &[a]).is_empty());
    }
}
