//! Raw-signal and FASTA files.
//!
//! Raw files start with the magic `CRAW` and a little-endian `u32` version,
//! followed by records of `[u32 channel][u32 count][count x f32]`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CRAW";
const VERSION: u32 = 1;

/// Raw samples from one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRecord {
    pub channel: u32,
    pub samples: Vec<f32>,
}

/// A named sequence.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FastaRecord {
    pub id: String,
    pub sequence: String,
}

fn bad(kind: &'static str, path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        kind,
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn encode_raw(records: &[RawRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for r in records {
        out.extend_from_slice(&r.channel.to_le_bytes());
        out.extend_from_slice(&(r.samples.len() as u32).to_le_bytes());
        for s in &r.samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    out
}

pub fn decode_raw(bytes: &[u8], path: &Path) -> Result<Vec<RawRecord>> {
    let word = |at: usize| -> Result<u32> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| bad("raw", path, "truncated"))
    };
    if bytes.get(..4) != Some(MAGIC.as_slice()) {
        return Err(bad("raw", path, "missing CRAW magic"));
    }
    if word(4)? != VERSION {
        return Err(bad("raw", path, "unsupported version"));
    }
    let mut at = 8;
    let mut out = Vec::new();
    while at < bytes.len() {
        let channel = word(at)?;
        let count = word(at + 4)? as usize;
        at += 8;
        let body = bytes
            .get(at..at + count * 4)
            .ok_or_else(|| bad("raw", path, "truncated record"))?;
        let samples = body
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        at += count * 4;
        out.push(RawRecord { channel, samples });
    }
    Ok(out)
}

pub fn write_raw(path: &Path, records: &[RawRecord]) -> Result<()> {
    fs::write(path, encode_raw(records))?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<Vec<RawRecord>> {
    decode_raw(&fs::read(path)?, path)
}

pub fn parse_fasta(text: &str, path: &Path) -> Result<Vec<FastaRecord>> {
    let mut out: Vec<FastaRecord> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            out.push(FastaRecord {
                id,
                sequence: String::new(),
            });
        } else {
            let rec = out
                .last_mut()
                .ok_or_else(|| bad("fasta", path, "sequence before first header"))?;
            rec.sequence.push_str(line);
        }
    }
    Ok(out)
}

pub fn read_fasta(path: &Path) -> Result<Vec<FastaRecord>> {
    parse_fasta(&fs::read_to_string(path)?, path)
}

pub fn format_fasta(records: &[FastaRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push('>');
        out.push_str(&r.id);
        out.push('\n');
        for line in r.sequence.as_bytes().chunks(80) {
            out.push_str(std::str::from_utf8(line).expect("ascii bases"));
            out.push('\n');
        }
    }
    out
}

pub fn write_fasta(path: &Path, records: &[FastaRecord]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_fasta(records).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_round_trip() {
        let recs = vec![
            RawRecord {
                channel: 7,
                samples: vec![1.5, -2.0, 0.25],
            },
            RawRecord {
                channel: 511,
                samples: vec![],
            },
        ];
        let p = Path::new("mem");
        assert_eq!(decode_raw(&encode_raw(&recs), p).unwrap(), recs);
        let mut bytes = encode_raw(&recs);
        bytes.truncate(bytes.len() - 9);
        assert!(decode_raw(&bytes, p).is_err());
        assert!(decode_raw(b"NOPE\x01\0\0\0", p).is_err());
    }

    #[test]
    fn fasta_round_trip() {
        let recs = vec![
            FastaRecord {
                id: "r1".into(),
                sequence: "ACGT".repeat(50),
            },
            FastaRecord {
                id: "r2".into(),
                sequence: "GATTACA".into(),
            },
        ];
        let text = format_fasta(&recs);
        assert_eq!(parse_fasta(&text, Path::new("x")).unwrap(), recs);
        assert!(parse_fasta("ACGT\n", Path::new("x")).is_err());
    }
}
