use serde::{Deserialize, Serialize};

use crate::device::TILE_DIM;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    CimTile,
    Dpu,
    Decoder,
    SignalBuffer,
    Io,
}

/// A node on the mesh grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub kind: NodeKind,
    pub x: usize,
    pub y: usize,
}

/// Floorplan of the accelerator. Node ids are indices into `nodes`; tile
/// ids are indices into the subsequence of tile nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchDescription {
    pub width: usize,
    pub height: usize,
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub nodes: Vec<Node>,
}

impl Default for ArchDescription {
    /// 4x4 grid with 11 tiles, 2 DPUs, the decoder, the signal buffer and IO.
    fn default() -> Self {
        use NodeKind::*;
        let rows = [
            [Io, SignalBuffer, CimTile, CimTile],
            [CimTile, Dpu, CimTile, CimTile],
            [CimTile, CimTile, Dpu, CimTile],
            [Decoder, CimTile, CimTile, CimTile],
        ];
        let mut nodes = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            for (x, &kind) in row.iter().enumerate() {
                nodes.push(Node { kind, x, y });
            }
        }
        ArchDescription {
            width: 4,
            height: 4,
            tile_rows: TILE_DIM,
            tile_cols: TILE_DIM,
            nodes,
        }
    }
}

impl ArchDescription {
    pub fn validate(&self) -> Result<()> {
        if self.tile_rows == 0 || self.tile_cols == 0 {
            return Err(Error::param("arch.tile", "dimensions must be positive"));
        }
        let mut seen = vec![false; self.width * self.height];
        for (i, n) in self.nodes.iter().enumerate() {
            if n.x >= self.width || n.y >= self.height {
                return Err(Error::param(
                    "arch.nodes",
                    format!("node {i} lies outside the grid"),
                ));
            }
            let slot = &mut seen[n.y * self.width + n.x];
            if *slot {
                return Err(Error::param(
                    "arch.nodes",
                    format!("node {i} shares a grid position"),
                ));
            }
            *slot = true;
        }
        for (kind, name) in [
            (NodeKind::Decoder, "decoder"),
            (NodeKind::SignalBuffer, "signal buffer"),
        ] {
            if self.count(kind) != 1 {
                return Err(Error::param(
                    "arch.nodes",
                    format!("need exactly one {name}"),
                ));
            }
        }
        if self.count(NodeKind::Dpu) == 0 {
            return Err(Error::param("arch.nodes", "need at least one DPU"));
        }
        Ok(())
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn nodes_of(&self, kind: NodeKind) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].kind == kind)
            .collect()
    }

    pub fn tiles(&self) -> Vec<usize> {
        self.nodes_of(NodeKind::CimTile)
    }

    pub fn n_tiles(&self) -> usize {
        self.count(NodeKind::CimTile)
    }

    /// Node id of tile `tile`.
    pub fn tile_node(&self, tile: usize) -> Option<usize> {
        self.tiles().get(tile).copied()
    }

    pub fn first_of(&self, kind: NodeKind) -> Option<usize> {
        self.nodes.iter().position(|n| n.kind == kind)
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (p, q) = (self.nodes[a], self.nodes[b]);
        p.x.abs_diff(q.x) + p.y.abs_diff(q.y)
    }

    /// Multiply-accumulates per analog VMM on a full tile.
    pub fn macs_per_vmm(&self) -> usize {
        self.tile_rows * self.tile_cols
    }
}
