//! Vertex-disjoint rainbow families through a fixed vertex: length-3 paths
//! u -> x -> y -> v, and triangles at an apex.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MatchingError;
use crate::graph::{Colour, ColouredDigraph, DirectedPath, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathFamily {
    pub u: Vertex,
    pub v: Vertex,
    pub paths: Vec<DirectedPath>,
}

impl PathFamily {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Checks shared endpoints, equal lengths, disjoint interiors and a
    /// rainbow union.
    pub fn check(&self, d: &ColouredDigraph) -> bool {
        let mut interior = FixedBitSet::with_capacity(d.n());
        let mut colours = FixedBitSet::with_capacity(d.kappa());
        let len = self.paths.first().map(DirectedPath::len);
        for p in &self.paths {
            if p.first() != Some(self.u) || p.last() != Some(self.v) || Some(p.len()) != len {
                return false;
            }
            for &x in p.interior() {
                if x == self.u || x == self.v || interior.put(x as usize) {
                    return false;
                }
            }
            let Ok(cs) = p.colours(d) else { return false };
            if cs.iter().any(|&c| colours.put(c as usize)) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangleOrientation {
    /// apex -> a -> b -> apex
    Cyclic,
    /// a -> apex, apex -> b, a -> b
    Transitive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleFamily {
    pub apex: Vertex,
    pub orientation: TriangleOrientation,
    /// Pairs `(a, b)`; see [`TriangleOrientation`] for the edges they span.
    pub triangles: Vec<(Vertex, Vertex)>,
}

impl TriangleFamily {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_edges(&self, (a, b): (Vertex, Vertex)) -> [(Vertex, Vertex); 3] {
        let v = self.apex;
        match self.orientation {
            TriangleOrientation::Cyclic => [(v, a), (a, b), (b, v)],
            TriangleOrientation::Transitive => [(a, v), (v, b), (a, b)],
        }
    }

    pub fn check(&self, d: &ColouredDigraph) -> bool {
        let mut seen = FixedBitSet::with_capacity(d.n());
        let mut colours = FixedBitSet::with_capacity(d.kappa());
        for &t in &self.triangles {
            for x in [t.0, t.1] {
                if x == self.apex || seen.put(x as usize) {
                    return false;
                }
            }
            for (x, y) in self.triangle_edges(t) {
                match d.colour(x, y) {
                    Some(c) if !colours.put(c as usize) => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

pub(crate) fn in_set(s: &FixedBitSet, x: u32) -> bool {
    (x as usize) < s.len() && s.contains(x as usize)
}

/// Vertices and colours consumed by one greedy attempt.
struct Greedy {
    used_v: FixedBitSet,
    used_c: FixedBitSet,
}

impl Greedy {
    fn new(d: &ColouredDigraph) -> Self {
        Greedy { used_v: FixedBitSet::with_capacity(d.n()), used_c: FixedBitSet::with_capacity(d.kappa()) }
    }

    fn free_v(&self, pool: &FixedBitSet, x: Vertex) -> bool {
        in_set(pool, x) && !self.used_v.contains(x as usize)
    }

    fn free_c(&self, pool: &FixedBitSet, c: Colour) -> bool {
        in_set(pool, c) && !self.used_c.contains(c as usize)
    }
}

fn path_attempt(
    d: &ColouredDigraph,
    u: Vertex,
    v: Vertex,
    pool: &FixedBitSet,
    colour_pool: &FixedBitSet,
    target: usize,
    order: &[(Vertex, Colour)],
) -> Vec<DirectedPath> {
    let mut g = Greedy::new(d);
    let mut paths = Vec::new();
    for &(x, cux) in order {
        if paths.len() >= target {
            break;
        }
        if !g.free_v(pool, x) || !g.free_c(colour_pool, cux) {
            continue;
        }
        let found = d.out_arcs(x).iter().find_map(|a| {
            let y = a.vertex;
            if y == x || y == u || y == v || !g.free_v(pool, y) || !g.free_c(colour_pool, a.colour) || a.colour == cux {
                return None;
            }
            let cyv = d.colour(y, v)?;
            (g.free_c(colour_pool, cyv) && cyv != cux && cyv != a.colour).then_some((y, a.colour, cyv))
        });
        if let Some((y, cxy, cyv)) = found {
            for w in [x, y] {
                g.used_v.insert(w as usize);
            }
            for c in [cux, cxy, cyv] {
                g.used_c.insert(c as usize);
            }
            paths.push(DirectedPath::new(vec![u, x, y, v]).expect("distinct by construction"));
        }
    }
    paths
}

/// Greedy family of rainbow paths u -> x -> y -> v with x, y from `pool`
/// and colours from `colour_pool`. The first attempt scans x in ascending
/// order; each of the `restarts` further attempts shuffles it, and the
/// largest family wins.
#[allow(clippy::too_many_arguments)]
pub fn rainbow_path_family<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    u: Vertex,
    v: Vertex,
    pool: &FixedBitSet,
    colour_pool: &FixedBitSet,
    target: usize,
    restarts: usize,
    rng: &mut R,
) -> Result<PathFamily, MatchingError> {
    if u == v {
        return Err(MatchingError::SameEndpoints(u));
    }
    let mut order: Vec<(Vertex, Colour)> = d
        .out_arcs(u)
        .iter()
        .filter(|a| a.vertex != v)
        .map(|a| (a.vertex, a.colour))
        .collect();
    let mut best = Vec::new();
    for attempt in 0..=restarts {
        if attempt > 0 {
            order.shuffle(rng);
        }
        let paths = path_attempt(d, u, v, pool, colour_pool, target, &order);
        if paths.len() > best.len() {
            best = paths;
        }
        if best.len() >= target {
            break;
        }
    }
    Ok(PathFamily { u, v, paths: best })
}

/// One greedy pass over first arcs in `order`. For each first vertex the
/// second-arc list is scanned from `offset(len)` cyclically, which lets
/// restarts vary the second vertex without enumerating every triangle.
#[allow(clippy::too_many_arguments)]
pub(crate) fn triangle_attempt(
    d: &ColouredDigraph,
    apex: Vertex,
    pool: &FixedBitSet,
    colour_pool: &FixedBitSet,
    target: usize,
    orientation: TriangleOrientation,
    order: &[(Vertex, Colour)],
    mut offset: impl FnMut(usize) -> usize,
) -> Vec<(Vertex, Vertex)> {
    let mut g = Greedy::new(d);
    let mut out = Vec::new();
    for &(a, c1) in order {
        if out.len() >= target {
            break;
        }
        if a == apex || !g.free_v(pool, a) || !g.free_c(colour_pool, c1) {
            continue;
        }
        let seconds = match orientation {
            // apex -> a (c1), a -> b, b -> apex
            TriangleOrientation::Cyclic => d.out_arcs(a),
            // a -> apex (c1), apex -> b, a -> b
            TriangleOrientation::Transitive => d.out_arcs(apex),
        };
        if seconds.is_empty() {
            continue;
        }
        let start = offset(seconds.len()) % seconds.len();
        let found = seconds[start..].iter().chain(&seconds[..start]).find_map(|e| {
            let b = e.vertex;
            if b == a || b == apex || !g.free_v(pool, b) || !g.free_c(colour_pool, e.colour) || e.colour == c1 {
                return None;
            }
            let c3 = match orientation {
                TriangleOrientation::Cyclic => d.colour(b, apex)?,
                TriangleOrientation::Transitive => d.colour(a, b)?,
            };
            (g.free_c(colour_pool, c3) && c3 != c1 && c3 != e.colour).then_some((b, e.colour, c3))
        });
        if let Some((b, c2, c3)) = found {
            g.used_v.insert(a as usize);
            g.used_v.insert(b as usize);
            for c in [c1, c2, c3] {
                g.used_c.insert(c as usize);
            }
            out.push((a, b));
        }
    }
    out
}

/// First arcs of a triangle at `apex` in the given orientation.
pub(crate) fn triangle_first_arcs(
    d: &ColouredDigraph,
    apex: Vertex,
    orientation: TriangleOrientation,
) -> Vec<(Vertex, Colour)> {
    let arcs = match orientation {
        TriangleOrientation::Cyclic => d.out_arcs(apex),
        TriangleOrientation::Transitive => d.in_arcs(apex),
    };
    arcs.iter().map(|a| (a.vertex, a.colour)).collect()
}

/// Greedy family of rainbow triangles at `apex`, pairwise meeting only at
/// the apex, with the other vertices from `pool` and colours from
/// `colour_pool`. The first attempt scans arcs in ascending order; each
/// restart shuffles the first arcs and rotates the second-arc scans.
#[allow(clippy::too_many_arguments)]
pub fn rainbow_triangle_family<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    apex: Vertex,
    pool: &FixedBitSet,
    colour_pool: &FixedBitSet,
    target: usize,
    orientation: TriangleOrientation,
    restarts: usize,
    rng: &mut R,
) -> TriangleFamily {
    let mut order = triangle_first_arcs(d, apex, orientation);
    let mut best = Vec::new();
    for attempt in 0..=restarts {
        let t = if attempt == 0 {
            triangle_attempt(d, apex, pool, colour_pool, target, orientation, &order, |_| 0)
        } else {
            order.shuffle(rng);
            triangle_attempt(d, apex, pool, colour_pool, target, orientation, &order, |len| rng.gen_range(0..len))
        };
        if t.len() > best.len() {
            best = t;
        }
        if best.len() >= target {
            break;
        }
    }
    TriangleFamily { apex, orientation, triangles: best }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bitset_of, complete_bidirected, DigraphBuilder};
    use crate::rng::RngStream;

    fn distinct(n: usize) -> ColouredDigraph {
        let mut next = 0;
        complete_bidirected(n, n * n)
            .unwrap()
            .recoloured(n * n, |_| {
                next += 1;
                next - 1
            })
            .unwrap()
    }

    #[test]
    fn path_family_on_distinct_colours() {
        let d = distinct(30);
        let pool = bitset_of(30, 2..22);
        let cols = d.colour_set();
        let mut rng = RngStream::root(1, "pf").rng();
        let f = rainbow_path_family(&d, 0, 1, &pool, &cols, 10, 0, &mut rng).unwrap();
        assert_eq!(f.len(), 10);
        assert!(f.check(&d));
        let empty = FixedBitSet::with_capacity(30);
        assert!(rainbow_path_family(&d, 0, 1, &empty, &cols, 10, 0, &mut rng).unwrap().is_empty());
        assert!(matches!(
            rainbow_path_family(&d, 3, 3, &pool, &cols, 1, 0, &mut rng),
            Err(MatchingError::SameEndpoints(3))
        ));
    }

    #[test]
    fn triangle_families() {
        let d = distinct(30);
        let pool = bitset_of(30, 1..21);
        let cols = d.colour_set();
        let mut rng = RngStream::root(2, "tf").rng();
        for o in [TriangleOrientation::Transitive, TriangleOrientation::Cyclic] {
            let f = rainbow_triangle_family(&d, 0, &pool, &cols, 8, o, 0, &mut rng);
            assert_eq!(f.len(), 8);
            assert!(f.check(&d));
        }
        let one = bitset_of(30, [5]);
        assert!(rainbow_triangle_family(&d, 0, &one, &cols, 8, TriangleOrientation::Transitive, 0, &mut rng)
            .is_empty());
    }

    #[test]
    fn transitive_needs_in_edges() {
        let mut b = DigraphBuilder::new(4, 6).unwrap();
        b.add_edge(0, 1, 0).unwrap();
        b.add_edge(0, 2, 1).unwrap();
        b.add_edge(1, 2, 2).unwrap();
        let d = b.build().unwrap();
        let pool = bitset_of(4, 1..4);
        let mut rng = RngStream::root(3, "tn").rng();
        let f = rainbow_triangle_family(&d, 0, &pool, &d.colour_set(), 1, TriangleOrientation::Transitive, 2, &mut rng);
        assert!(f.is_empty());
        let f = rainbow_triangle_family(&d, 1, &bitset_of(4, [0, 2]), &d.colour_set(), 1, TriangleOrientation::Transitive, 0, &mut rng);
        assert_eq!(f.triangles, vec![(0, 2)]);
    }
}
