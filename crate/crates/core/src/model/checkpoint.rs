//! Binary checkpoint container.
//!
//! ```text
//! magic    8 bytes  "SKGCKPT\0"
//! version  u32 LE
//! hlen     u64 LE   length of the JSON header
//! header   hlen bytes of UTF-8 JSON (dimensions, relation tags, tensor manifest)
//! data     every manifest tensor as row-major little-endian f64, in manifest order
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::optim::{AdamConfig, OptimizerState};
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::ontology::RelationType;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"SKGCKPT\0";

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    dim: usize,
    depth: usize,
    entity_count: usize,
    relations: Vec<String>,
    fingerprint: Option<String>,
    optimizer: AdamConfig,
    optimizer_step: u64,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub state: OptimizerState,
    pub fingerprint: Option<String>,
}

impl Checkpoint {
    /// Rejects a checkpoint that cannot be used with the current run.
    pub fn validate(&self, entity_count: usize, dim: Option<usize>, depth: Option<usize>) -> Result<()> {
        let p = &self.params;
        if p.entity_count() != entity_count {
            return Err(Error::Incompatible(format!(
                "checkpoint has {} entities, graph has {entity_count}",
                p.entity_count()
            )));
        }
        if let Some(d) = dim.filter(|&d| d != p.dim) {
            return Err(Error::Incompatible(format!("checkpoint d={}, run configured d={d}", p.dim)));
        }
        if let Some(k) = depth.filter(|&k| k != p.depth) {
            return Err(Error::Incompatible(format!("checkpoint K={}, run configured K={k}", p.depth)));
        }
        Ok(())
    }
}

pub fn save_checkpoint(
    params: &ModelParams,
    state: &OptimizerState,
    fingerprint: Option<&str>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let names = params.tensor_names();
    let groups = [
        ("", params.tensors()),
        ("adam.m/", state.first_moment.tensors()),
        ("adam.v/", state.second_moment.tensors()),
    ];
    let mut manifest = Vec::new();
    for (prefix, tensors) in &groups {
        for (name, t) in names.iter().zip(tensors) {
            manifest.push(TensorEntry {
                name: format!("{prefix}{name}"),
                rows: t.nrows(),
                cols: t.ncols(),
            });
        }
    }
    let header = Header {
        format_version: CHECKPOINT_VERSION,
        dim: params.dim,
        depth: params.depth,
        entity_count: params.entity_count(),
        relations: RelationType::ALL.iter().map(|r| r.as_str().to_string()).collect(),
        fingerprint: fingerprint.map(str::to_string),
        optimizer: state.config,
        optimizer_step: state.step,
        tensors: manifest,
    };
    let header = serde_json::to_vec(&header)?;

    let mut buf = Vec::with_capacity(header.len() + 8 * 3 * params.parameter_count() + 20);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header);
    for (_, tensors) in &groups {
        for t in tensors {
            for x in t.iter() {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::Incompatible(format!("{}: {msg}", path.display()));

    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported format version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    if body.len() < hlen {
        return Err(bad("truncated header"));
    }
    let header: Header = serde_json::from_slice(&body[..hlen])?;
    let expected: Vec<&str> = RelationType::ALL.iter().map(|r| r.as_str()).collect();
    if header.relations != expected {
        return Err(bad("relation list does not match this ontology"));
    }

    let mut params = ModelParams::zeros(header.entity_count, header.dim, header.depth);
    let mut first = params.zeros_like();
    let mut second = params.zeros_like();
    let names = params.tensor_names();
    let n = names.len();
    if header.tensors.len() != 3 * n {
        return Err(bad("tensor manifest does not match dimensions"));
    }

    let mut data = &body[hlen..];
    let mut targets: Vec<&mut Array2<f64>> = params.tensors_mut();
    targets.extend(first.tensors_mut());
    targets.extend(second.tensors_mut());
    for (i, (entry, target)) in header.tensors.iter().zip(targets).enumerate() {
        let prefix = ["", "adam.m/", "adam.v/"][i / n];
        if entry.name != format!("{prefix}{}", names[i % n]) || (entry.rows, entry.cols) != target.dim() {
            return Err(bad(&format!("unexpected tensor {} {}x{}", entry.name, entry.rows, entry.cols)));
        }
        let len = entry.rows * entry.cols * 8;
        if data.len() < len {
            return Err(bad("truncated tensor data"));
        }
        for (x, chunk) in target.iter_mut().zip(data[..len].chunks_exact(8)) {
            *x = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        data = &data[len..];
    }
    if !data.is_empty() {
        return Err(bad("trailing bytes after tensor data"));
    }

    Ok(Checkpoint {
        params,
        state: OptimizerState {
            config: header.optimizer,
            step: header.optimizer_step,
            first_moment: first,
            second_moment: second,
        },
        fingerprint: header.fingerprint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let p = ModelParams::init(6, 16, 2, 4).unwrap();
        let mut st = OptimizerState::new(&p, AdamConfig::default());
        st.step = 3;
        st.first_moment.relations.fill(0.25);
        save_checkpoint(&p, &st, Some("abc"), &path).unwrap();
        let ck = load_checkpoint(&path).unwrap();
        assert_eq!(ck.params, p);
        assert_eq!(ck.state, st);
        assert_eq!(ck.fingerprint.as_deref(), Some("abc"));

        assert!(ck.validate(6, Some(16), Some(2)).is_ok());
        assert!(matches!(ck.validate(6, Some(32), None), Err(Error::Incompatible(_))));
        assert!(matches!(ck.validate(7, None, None), Err(Error::Incompatible(_))));
        assert!(matches!(ck.validate(6, None, Some(1)), Err(Error::Incompatible(_))));
    }

    #[test]
    fn rejects_garbage_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        std::fs::write(&path, b"hello world, not a checkpoint").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Incompatible(_))));

        let p = ModelParams::init(2, 2, 1, 0).unwrap();
        save_checkpoint(&p, &OptimizerState::new(&p, AdamConfig::default()), None, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 4);
        std::fs::write(&path, &bytes).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
