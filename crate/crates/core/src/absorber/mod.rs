//! The 13-vertex (v, c)-absorber.
//!
//! Roles and edges:
//!
//! ```text
//! triangle   v1->v (a)   v->v2 (b)   v1->v2 (d)
//! K(2,4)     x->y (a)    x->z (d)    z->u (b)    y->u (c)
//!            w2->y (e)   w2->z (e)   y->w1 (f)   z->w1 (f)
//! P1         v2->p1a->p1b->x         (three fresh colours)
//! P2         w1->p2a->p2b->w2        (three fresh colours)
//! ```
//!
//! The absorbing path `v1 v v2 P1 x z w1 P2 w2 y u` spends colours
//! {a, b, d, e, f, c} plus the six connector colours; the avoiding path
//! `v1 v2 P1 x y w1 P2 w2 z u` skips both `v` and `c`.

mod search;

pub use search::{find_absorber, find_k24, AbsorberFailure, AbsorberSearchBudget, AbsorberStage, K24};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::graph::{Colour, ColouredDigraph, DirectedPath, GraphError, Vertex, Verdict, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbsorberRoles {
    pub v: Vertex,
    pub v1: Vertex,
    pub v2: Vertex,
    pub x: Vertex,
    pub y: Vertex,
    pub z: Vertex,
    pub u: Vertex,
    pub w1: Vertex,
    pub w2: Vertex,
    pub p1a: Vertex,
    pub p1b: Vertex,
    pub p2a: Vertex,
    pub p2b: Vertex,
}

impl AbsorberRoles {
    pub fn all(&self) -> [Vertex; 13] {
        [
            self.v, self.v1, self.v2, self.x, self.y, self.z, self.u, self.w1, self.w2, self.p1a,
            self.p1b, self.p2a, self.p2b,
        ]
    }

    /// Role vertices other than `v`.
    pub fn internal(&self) -> [Vertex; 12] {
        let a = self.all();
        std::array::from_fn(|i| a[i + 1])
    }

    /// The 17 gadget edges in a fixed order.
    pub fn gadget_edges(&self) -> [(Vertex, Vertex); 17] {
        let r = self;
        [
            (r.v1, r.v),
            (r.v, r.v2),
            (r.v1, r.v2),
            (r.x, r.y),
            (r.x, r.z),
            (r.y, r.u),
            (r.z, r.u),
            (r.w2, r.y),
            (r.w2, r.z),
            (r.y, r.w1),
            (r.z, r.w1),
            (r.v2, r.p1a),
            (r.p1a, r.p1b),
            (r.p1b, r.x),
            (r.w1, r.p2a),
            (r.p2a, r.p2b),
            (r.p2b, r.w2),
        ]
    }

    pub fn absorbing_sequence(&self) -> [Vertex; 13] {
        let r = self;
        [r.v1, r.v, r.v2, r.p1a, r.p1b, r.x, r.z, r.w1, r.p2a, r.p2b, r.w2, r.y, r.u]
    }

    pub fn avoiding_sequence(&self) -> [Vertex; 12] {
        let r = self;
        [r.v1, r.v2, r.p1a, r.p1b, r.x, r.y, r.w1, r.p2a, r.p2b, r.w2, r.z, r.u]
    }
}

/// Colours for a planted gadget: `c` on y->u, pairs `a, b, d, e, f` as in the
/// module table, and three fresh colours on each connector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetColours {
    pub c: Colour,
    pub a: Colour,
    pub b: Colour,
    pub d: Colour,
    pub e: Colour,
    pub f: Colour,
    pub p1: [Colour; 3],
    pub p2: [Colour; 3],
}

impl GadgetColours {
    /// Colours for [`AbsorberRoles::gadget_edges`], in the same order.
    pub fn edge_colours(&self) -> [Colour; 17] {
        let g = self;
        [
            g.a, g.b, g.d, g.a, g.d, g.c, g.b, g.e, g.e, g.f, g.f, g.p1[0], g.p1[1], g.p1[2], g.p2[0],
            g.p2[1], g.p2[2],
        ]
    }

    /// The whole palette, 12 colours.
    pub fn all(&self) -> [Colour; 12] {
        let g = self;
        [g.c, g.a, g.b, g.d, g.e, g.f, g.p1[0], g.p1[1], g.p1[2], g.p2[0], g.p2[1], g.p2[2]]
    }
}

/// `(tail, head, colour)` triples realising the gadget.
pub fn gadget_edges(roles: &AbsorberRoles, colours: &GadgetColours) -> Vec<(Vertex, Vertex, Colour)> {
    roles
        .gadget_edges()
        .iter()
        .zip(colours.edge_colours())
        .map(|(&(u, v), c)| (u, v, c))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    pub v: Vertex,
    pub c: Colour,
    pub roles: AbsorberRoles,
    /// Colours of the gadget edges, in [`AbsorberRoles::gadget_edges`] order.
    pub edge_colours: Vec<Colour>,
}

impl Absorber {
    /// Reads the gadget colours off `d`.
    pub fn from_roles(d: &ColouredDigraph, c: Colour, roles: AbsorberRoles) -> Result<Self, GraphError> {
        let edge_colours = roles
            .gadget_edges()
            .iter()
            .map(|&(a, b)| d.colour(a, b).ok_or(GraphError::EdgeNotInGraph(a, b)))
            .collect::<Result<_, _>>()?;
        Ok(Absorber { v: roles.v, c, roles, edge_colours })
    }

    pub fn first(&self) -> Vertex {
        self.roles.v1
    }

    pub fn last(&self) -> Vertex {
        self.roles.u
    }

    pub fn internal_vertices(&self) -> [Vertex; 12] {
        self.roles.internal()
    }

    /// Colours of the absorbing path other than `c`.
    pub fn internal_colours(&self) -> Vec<Colour> {
        let mut cs: Vec<Colour> = self.edge_colours.iter().copied().filter(|&x| x != self.c).collect();
        cs.sort_unstable();
        cs.dedup();
        cs
    }
}

fn well_formed(a: &Absorber) -> bool {
    let all = a.roles.all();
    let distinct: HashSet<_> = all.iter().collect();
    distinct.len() == 13 && a.roles.v == a.v && a.edge_colours.len() == 17
}

/// Path `v1 v v2 P1 x z w1 P2 w2 y u` (12 edges). `None` when the roles are
/// not 13 distinct vertices.
pub fn absorbing_path(a: &Absorber) -> Option<DirectedPath> {
    if !well_formed(a) {
        return None;
    }
    DirectedPath::new(a.roles.absorbing_sequence().to_vec()).ok()
}

/// Path `v1 v2 P1 x y w1 P2 w2 z u` (11 edges), which skips `v`.
pub fn avoiding_path(a: &Absorber) -> Option<DirectedPath> {
    if !well_formed(a) {
        return None;
    }
    DirectedPath::new(a.roles.avoiding_sequence().to_vec()).ok()
}

fn colour_set(d: &ColouredDigraph, p: &DirectedPath) -> Result<Vec<Colour>, Violation> {
    let mut out = Vec::with_capacity(p.len());
    let mut seen = HashSet::new();
    for (u, v) in p.edges() {
        let c = d.colour(u, v).ok_or(Violation::MissingEdge { tail: u, head: v })?;
        if !seen.insert(c) {
            return Err(Violation::ColourRepeat { colour: c });
        }
        out.push(c);
    }
    Ok(out)
}

fn check_absorber(d: &ColouredDigraph, a: &Absorber) -> Result<(), Violation> {
    // Distinctness of the 13 roles.
    let mut seen = HashSet::new();
    for w in a.roles.all() {
        if w as usize >= d.n() {
            return Err(Violation::VertexOutOfRange { vertex: w });
        }
        if !seen.insert(w) {
            return Err(Violation::Distinctness { vertex: w });
        }
    }
    if a.roles.v != a.v {
        return Err(Violation::Distinctness { vertex: a.v });
    }
    if a.edge_colours.len() != 17 {
        return Err(Violation::WrongLength { expected: 17, found: a.edge_colours.len() });
    }
    // Edges exist with the recorded colours.
    let edges = a.roles.gadget_edges();
    for (&(t, h), &c) in edges.iter().zip(&a.edge_colours) {
        match d.colour(t, h) {
            None => return Err(Violation::MissingEdge { tail: t, head: h }),
            Some(found) if found != c => return Err(Violation::ColourPattern { tail: t, head: h }),
            _ => {}
        }
    }
    // Colour pattern: y->u carries c, then the five equal pairs.
    let col = &a.edge_colours;
    if col[5] != a.c {
        return Err(Violation::ColourPattern { tail: edges[5].0, head: edges[5].1 });
    }
    for (i, j) in [(0, 3), (1, 6), (2, 4), (7, 8), (9, 10)] {
        if col[i] != col[j] {
            return Err(Violation::ColourPattern { tail: edges[j].0, head: edges[j].1 });
        }
    }
    // Remaining distinctness is covered by the rainbow checks below, which
    // together see every gadget colour.
    let p = absorbing_path(a).expect("roles checked distinct");
    let q = avoiding_path(a).expect("roles checked distinct");
    let cp = colour_set(d, &p)?;
    let cq = colour_set(d, &q)?;
    if p.first() != q.first() || p.last() != q.last() {
        return Err(Violation::SharedEndpoints);
    }
    // V(P) = V(A) holds by construction of the sequence; V(P') = V(P) - v.
    let vp: HashSet<Vertex> = p.vertices().iter().copied().collect();
    let vq: HashSet<Vertex> = q.vertices().iter().copied().collect();
    let all: HashSet<Vertex> = a.roles.all().into_iter().collect();
    if let Some(&w) = vp.symmetric_difference(&all).next() {
        return Err(Violation::VertexSetMismatch { vertex: w });
    }
    let mut expect_q = vp.clone();
    expect_q.remove(&a.v);
    if let Some(&w) = vq.symmetric_difference(&expect_q).next() {
        return Err(Violation::VertexSetMismatch { vertex: w });
    }
    // C(P) = C(A) and C(P') = C(P) - c.
    let sp: HashSet<Colour> = cp.into_iter().collect();
    let sq: HashSet<Colour> = cq.into_iter().collect();
    let sa: HashSet<Colour> = a.edge_colours.iter().copied().collect();
    if let Some(&c) = sp.symmetric_difference(&sa).next() {
        return Err(Violation::ColourSetMismatch { colour: c });
    }
    let mut expect_cq = sp.clone();
    expect_cq.remove(&a.c);
    if let Some(&c) = sq.symmetric_difference(&expect_cq).next() {
        return Err(Violation::ColourSetMismatch { colour: c });
    }
    Ok(())
}

/// Checks an absorber against `d`: roles distinct, every gadget edge
/// present with its recorded colour, the colour pattern, both paths
/// rainbow with the same ends, and the vertex and colour differences
/// being exactly `{v}` and `{c}`.
pub fn verify_absorber(d: &ColouredDigraph, a: &Absorber) -> Verdict {
    Verdict::from_result(check_absorber(d, a))
}

/// Vertex and colour sets dropped when switching from the absorbing to the
/// avoiding path, computed from the paths themselves.
pub fn exchange_deltas(d: &ColouredDigraph, a: &Absorber) -> Option<(Vec<Vertex>, Vec<Colour>)> {
    let p = absorbing_path(a)?;
    let q = avoiding_path(a)?;
    let vq: HashSet<Vertex> = q.vertices().iter().copied().collect();
    let mut dv: Vec<Vertex> = p.vertices().iter().copied().filter(|w| !vq.contains(w)).collect();
    let cq: HashSet<Colour> = q.colours(d).ok()?.into_iter().collect();
    let mut dc: Vec<Colour> = p.colours(d).ok()?.into_iter().filter(|c| !cq.contains(c)).collect();
    dv.sort_unstable();
    dc.sort_unstable();
    Some((dv, dc))
}
