//! Textual checkpoint of a solver state. Floats are stored as hex-encoded
//! IEEE-754 bit patterns so the round-trip is exact.

use crate::fields::Field3;
use crate::mesh::build_mesh;
use crate::optimizer::{Branch, ObstacleSpec};
use std::sync::Arc;
use thiserror::Error;

const MAGIC: &str = "ldg-checkpoint v1";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad header)")]
    BadHeader,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("value count mismatch (expected {0}, got {1})")]
    CountMismatch(usize, usize),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Obstacle(#[from] crate::optimizer::OptimError),
}

fn hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn unhex(s: &str) -> Result<f64, CheckpointError> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| CheckpointError::Malformed(s.to_string()))
}

pub fn save_checkpoint(u: &Field3, mu: f64, obs: &ObstacleSpec) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("n {}\n", u.mesh.n));
    out.push_str(&format!("mu {}\n", hex(mu)));
    let branch = match obs.branch {
        Branch::Plus => "plus",
        Branch::Minus => "minus",
        Branch::None => "none",
    };
    out.push_str(&format!("branch {branch}\n"));
    out.push_str(&format!("bound {}\n", hex(obs.bound)));
    out.push_str(&format!("values {}\n", u.values.len()));
    for v in &u.values {
        out.push_str(&format!("{} {} {}\n", hex(v[0]), hex(v[1]), hex(v[2])));
    }
    out
}

pub fn load_checkpoint(text: &str) -> Result<(Field3, f64, ObstacleSpec), CheckpointError> {
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(CheckpointError::BadHeader);
    }
    let mut kv = |key: &str| -> Result<String, CheckpointError> {
        let line = lines
            .next()
            .ok_or_else(|| CheckpointError::Malformed(format!("missing {key}")))?;
        line.strip_prefix(key)
            .and_then(|s| s.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| CheckpointError::Malformed(line.to_string()))
    };
    let n: usize = kv("n")?
        .parse()
        .map_err(|_| CheckpointError::Malformed("n".into()))?;
    let mu = unhex(&kv("mu")?)?;
    let branch = match kv("branch")?.as_str() {
        "plus" => Branch::Plus,
        "minus" => Branch::Minus,
        "none" => Branch::None,
        other => return Err(CheckpointError::Malformed(other.to_string())),
    };
    let bound = unhex(&kv("bound")?)?;
    let count: usize = kv("values")?
        .parse()
        .map_err(|_| CheckpointError::Malformed("values".into()))?;

    let mesh = Arc::new(build_mesh(n)?);
    if count != mesh.node_count() {
        return Err(CheckpointError::CountMismatch(mesh.node_count(), count));
    }
    let mut values = Vec::with_capacity(count);
    for line in lines.take(count) {
        let mut parts = line.split(' ');
        let mut v = [0.0f64; 3];
        for slot in v.iter_mut() {
            *slot = unhex(
                parts
                    .next()
                    .ok_or_else(|| CheckpointError::Malformed(line.to_string()))?,
            )?;
        }
        values.push(v);
    }
    if values.len() != count {
        return Err(CheckpointError::CountMismatch(count, values.len()));
    }
    let obs = ObstacleSpec::new(branch, bound)?;
    Ok((Field3 { mesh, values }, mu, obs))
}
