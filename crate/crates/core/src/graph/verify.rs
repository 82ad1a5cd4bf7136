//! Verdict-producing checks. Every checker reports the first violation in
//! the order: vertex coverage, edge existence, rainbow, then set equalities.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{Colour, ColouredDigraph, DirectedPath, GraphError, Vertex, UNCOLOURED};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    WrongLength { expected: usize, found: usize },
    VertexOutOfRange { vertex: Vertex },
    RepeatedVertex { vertex: Vertex },
    MissingEdge { tail: Vertex, head: Vertex },
    Uncoloured { tail: Vertex, head: Vertex },
    ColourRepeat { colour: Colour },
    WrongEndpoints { first: Option<Vertex>, last: Option<Vertex> },
    VertexSetMismatch { vertex: Vertex },
    ColourSetMismatch { colour: Colour },
    Distinctness { vertex: Vertex },
    ColourPattern { tail: Vertex, head: Vertex },
    SharedEndpoints,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub violation: Option<Violation>,
}

impl Verdict {
    pub fn accept() -> Self {
        Verdict { accepted: true, violation: None }
    }

    pub fn reject(v: Violation) -> Self {
        Verdict { accepted: false, violation: Some(v) }
    }

    pub fn from_result(r: Result<(), Violation>) -> Self {
        match r {
            Ok(()) => Self::accept(),
            Err(v) => Self::reject(v),
        }
    }
}

/// True iff the given edges have pairwise distinct colours.
pub fn is_rainbow(
    d: &ColouredDigraph,
    edges: impl IntoIterator<Item = (Vertex, Vertex)>,
) -> Result<bool, GraphError> {
    let mut seen = HashSet::new();
    let mut rainbow = true;
    for (u, v) in edges {
        let c = d.colour(u, v).ok_or(GraphError::EdgeNotInGraph(u, v))?;
        rainbow &= seen.insert(c);
    }
    Ok(rainbow)
}

/// Checks existence of each pair, then colour distinctness. Returns the
/// colours seen.
fn walk(
    d: &ColouredDigraph,
    pairs: impl Iterator<Item = (Vertex, Vertex)>,
) -> Result<Vec<Colour>, Violation> {
    let mut colours = Vec::new();
    for (u, v) in pairs {
        match d.colour(u, v) {
            None => return Err(Violation::MissingEdge { tail: u, head: v }),
            Some(UNCOLOURED) => return Err(Violation::Uncoloured { tail: u, head: v }),
            Some(c) => colours.push(c),
        }
    }
    let mut seen = HashSet::with_capacity(colours.len());
    for &c in &colours {
        if !seen.insert(c) {
            return Err(Violation::ColourRepeat { colour: c });
        }
    }
    Ok(colours)
}

fn check_distinct_in_range(n: usize, seq: &[Vertex]) -> Result<(), Violation> {
    let mut seen = FixedBitSet::with_capacity(n);
    for &v in seq {
        if v as usize >= n {
            return Err(Violation::VertexOutOfRange { vertex: v });
        }
        if seen.put(v as usize) {
            return Err(Violation::RepeatedVertex { vertex: v });
        }
    }
    Ok(())
}

fn hamilton_cycle(d: &ColouredDigraph, seq: &[Vertex]) -> Result<(), Violation> {
    if seq.len() != d.n() {
        return Err(Violation::WrongLength { expected: d.n(), found: seq.len() });
    }
    check_distinct_in_range(d.n(), seq)?;
    let k = seq.len();
    walk(d, (0..k).map(|i| (seq[i], seq[(i + 1) % k])))?;
    Ok(())
}

/// Accepts iff `seq` lists every vertex once and, read cyclically, is a
/// rainbow directed cycle of `d`.
pub fn verify_rainbow_hamilton_cycle(d: &ColouredDigraph, seq: &[Vertex]) -> Verdict {
    if d.n() == 0 {
        return Verdict::reject(Violation::WrongLength { expected: 1, found: seq.len() });
    }
    Verdict::from_result(hamilton_cycle(d, seq))
}

fn path_contract(
    d: &ColouredDigraph,
    p: &DirectedPath,
    x: Vertex,
    y: Vertex,
    v_req: &FixedBitSet,
    c_req: &FixedBitSet,
) -> Result<(), Violation> {
    let seq = p.vertices();
    check_distinct_in_range(d.n(), seq)?;
    if p.first() != Some(x) || p.last() != Some(y) {
        return Err(Violation::WrongEndpoints { first: p.first(), last: p.last() });
    }
    let colours = walk(d, p.edges())?;

    let mut on_path = FixedBitSet::with_capacity(d.n().max(v_req.len()));
    for &v in seq {
        on_path.insert(v as usize);
    }
    if let Some(v) = on_path.symmetric_difference(v_req).next() {
        return Err(Violation::VertexSetMismatch { vertex: v as Vertex });
    }
    let mut used = FixedBitSet::with_capacity(d.kappa().max(c_req.len()));
    for &c in &colours {
        used.insert(c as usize);
    }
    if let Some(c) = used.symmetric_difference(c_req).next() {
        return Err(Violation::ColourSetMismatch { colour: c as Colour });
    }
    Ok(())
}

/// Accepts iff `p` is a rainbow directed path of `d` from `x` to `y` whose
/// vertex set is exactly `v_req` and colour set exactly `c_req`.
pub fn verify_rainbow_path_contract(
    d: &ColouredDigraph,
    p: &DirectedPath,
    x: Vertex,
    y: Vertex,
    v_req: &FixedBitSet,
    c_req: &FixedBitSet,
) -> Verdict {
    Verdict::from_result(path_contract(d, p, x, y, v_req, c_req))
}
