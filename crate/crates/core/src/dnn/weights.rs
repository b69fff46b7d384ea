use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{LayerKind, LayerSpec, NetworkGraph};
use crate::error::{Error, Result};

const FORMAT: &str = "cimba-weights";
const VERSION: u32 = 1;

/// Sidecar manifest describing the flat weight file. Each layer's weights
/// are stored first, then its bias, as little-endian `f32`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightManifest {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub state_len: u32,
    /// Weight file, relative to the manifest's directory.
    pub data: String,
    pub layers: Vec<ManifestLayer>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestLayer {
    pub layer: LayerKind,
    pub n_weights: usize,
    pub n_bias: usize,
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        kind: "weights",
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn data_path(manifest: &Path, data: &str) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).join(data)
}

/// Write `graph` as `manifest_path` plus a sibling `.bin` file.
pub fn save_network(graph: &NetworkGraph, manifest_path: &Path) -> Result<()> {
    let stem = manifest_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("weights");
    let data = format!("{stem}.bin");
    let manifest = WeightManifest {
        format: FORMAT.into(),
        version: VERSION,
        name: graph.name.clone(),
        state_len: graph.state_len,
        data: data.clone(),
        layers: graph
            .layers
            .iter()
            .map(|l| ManifestLayer {
                layer: l.kind.clone(),
                n_weights: l.weights.len(),
                n_bias: l.bias.len(),
            })
            .collect(),
    };
    let mut bytes = Vec::with_capacity(graph.parameter_count() * 4);
    for l in &graph.layers {
        for v in l.weights.iter().chain(&l.bias) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(data_path(manifest_path, &data), bytes)?;
    fs::write(
        manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

/// Load a network saved by [`save_network`].
pub fn load_network(manifest_path: &Path) -> Result<NetworkGraph> {
    let text = fs::read_to_string(manifest_path)?;
    let manifest: WeightManifest =
        serde_json::from_str(&text).map_err(|e| format_err(manifest_path, e.to_string()))?;
    let bin = data_path(manifest_path, &manifest.data);
    let bytes = fs::read(&bin)?;
    parse_network(&text, &bytes, &bin)
}

/// Build a network from manifest text and weight bytes; `origin` is used
/// in error messages.
pub(crate) fn parse_network(manifest: &str, bytes: &[u8], origin: &Path) -> Result<NetworkGraph> {
    let manifest: WeightManifest =
        serde_json::from_str(manifest).map_err(|e| format_err(origin, e.to_string()))?;
    if manifest.format != FORMAT || manifest.version != VERSION {
        return Err(format_err(origin, "unsupported format or version"));
    }
    if !bytes.len().is_multiple_of(4) {
        return Err(format_err(origin, "length is not a multiple of 4"));
    }
    let mut values = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]));
    let mut layers = Vec::with_capacity(manifest.layers.len());
    for entry in manifest.layers {
        let weights: Vec<f32> = values.by_ref().take(entry.n_weights).collect();
        let bias: Vec<f32> = values.by_ref().take(entry.n_bias).collect();
        if weights.len() != entry.n_weights || bias.len() != entry.n_bias {
            return Err(format_err(origin, "file shorter than manifest"));
        }
        layers.push(LayerSpec::new(entry.layer, weights, bias)?);
    }
    if values.next().is_some() {
        return Err(format_err(origin, "file longer than manifest"));
    }
    NetworkGraph::new(manifest.name, layers, manifest.state_len)
}

#[cfg(test)]
mod tests {
    use super::super::build_al_dorado;
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let g = build_al_dorado(9);
        save_network(&g, &path).unwrap();
        assert!(dir.path().join("net.bin").exists());
        assert_eq!(load_network(&path).unwrap(), g);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_network(&build_al_dorado(1), &path).unwrap();
        let bin = dir.path().join("net.bin");
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
        assert!(load_network(&path).is_err());
    }
}
