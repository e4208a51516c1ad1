//! Canonical JSON encoding of instances.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Arc, ArcId, ArcKind, Instance, VertexId};
use crate::rational::Rational;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcRecord {
    id: ArcId,
    tail: VertexId,
    head: VertexId,
    w: Rational,
    #[serde(default = "default_kind")]
    kind: ArcKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
}

fn default_kind() -> ArcKind {
    ArcKind::Base
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    version: u32,
    n: usize,
    arcs: Vec<ArcRecord>,
    s: VertexId,
    t: VertexId,
    #[serde(with = "crate::rational::fraction")]
    beta: Rational,
    r: Rational,
    #[serde(default)]
    critical: Vec<ArcId>,
}

/// Parses an instance; missing ranks default to input order and missing
/// kinds to `base`. Invariants are checked separately by `validate`.
pub fn from_json(text: &str) -> Result<Instance> {
    let rec: InstanceRecord =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if rec.version != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format version {}", rec.version)));
    }
    let arcs = rec
        .arcs
        .into_iter()
        .enumerate()
        .map(|(i, a)| Arc {
            id: a.id,
            tail: a.tail,
            head: a.head,
            weight: a.w,
            kind: a.kind,
            rank: a.rank.unwrap_or(i),
        })
        .collect();
    Ok(Instance {
        n: rec.n,
        arcs,
        s: rec.s,
        t: rec.t,
        beta: rec.beta,
        r: rec.r,
        critical: rec.critical.into_iter().collect::<BTreeSet<_>>(),
    })
}

/// Canonical single-line rendering with a trailing newline.
pub fn to_json(inst: &Instance) -> String {
    let rec = InstanceRecord {
        version: FORMAT_VERSION,
        n: inst.n,
        arcs: inst
            .arcs
            .iter()
            .map(|a| ArcRecord {
                id: a.id,
                tail: a.tail,
                head: a.head,
                w: a.weight,
                kind: a.kind,
                rank: Some(a.rank),
            })
            .collect(),
        s: inst.s,
        t: inst.t,
        beta: inst.beta,
        r: inst.r,
        critical: inst.critical.iter().copied().collect(),
    };
    let mut out = serde_json::to_string(&rec).expect("instance serializes");
    out.push('\n');
    out
}
