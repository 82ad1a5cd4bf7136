//! Direct randomized search for absorbers.
//!
//! `find_absorber` builds a family of rainbow transitive triangles at `v`,
//! turns them into colour triples, and looks for a K(2,4) whose colours
//! repeat one triple. The K(2,4) search starts from the edges of colour
//! `c` (the rarest constraint), then closes z, x and the two forks using
//! the colour-indexed in-adjacency.

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{verify_absorber, Absorber, AbsorberRoles};
use crate::graph::{Colour, ColouredDigraph, Vertex};
use crate::matching::{in_set, triangle_attempt, triangle_first_arcs, TriangleOrientation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsorberSearchBudget {
    /// Cap on candidate tuples examined per K(2,4) search.
    pub max_candidates: u64,
    /// Extra attempts with shuffled orders after the first.
    pub max_restarts: usize,
    /// Size of the triangle family requested at `v`.
    pub triangle_target: usize,
}

impl Default for AbsorberSearchBudget {
    fn default() -> Self {
        AbsorberSearchBudget { max_candidates: 20_000_000, max_restarts: 24, triangle_target: 32 }
    }
}

/// A K(2,4) with the colour pattern of the gadget. `triple` indexes the
/// matched entry of the colour-triple list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct K24 {
    pub x: Vertex,
    pub y: Vertex,
    pub z: Vertex,
    pub u: Vertex,
    pub w1: Vertex,
    pub w2: Vertex,
    pub triple: usize,
    /// Colour of y->w1 and z->w1.
    pub f: Colour,
    /// Colour of w2->y and w2->z.
    pub e: Colour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorberStage {
    Capacity,
    Triangles,
    K24,
    Connectors,
    InvalidInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("absorber search failed at {stage:?}: {detail}")]
pub struct AbsorberFailure {
    pub stage: AbsorberStage,
    pub detail: String,
}

fn fail(stage: AbsorberStage, detail: impl Into<String>) -> AbsorberFailure {
    AbsorberFailure { stage, detail: detail.into() }
}

struct TripleIndex {
    /// For each colour, the triple whose first entry it is.
    by_first: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl TripleIndex {
    fn new(kappa: usize, triples: &[(Colour, Colour, Colour)], c: Colour) -> Result<Self, AbsorberFailure> {
        let mut by_first = vec![NONE; kappa];
        let mut seen = FixedBitSet::with_capacity(kappa);
        for (i, &(t1, t2, t3)) in triples.iter().enumerate() {
            for t in [t1, t2, t3] {
                if t as usize >= kappa || t == c || seen.put(t as usize) {
                    return Err(fail(
                        AbsorberStage::InvalidInput,
                        "colour triples must be pairwise disjoint and avoid c",
                    ));
                }
            }
            by_first[t1 as usize] = i as u32;
        }
        Ok(TripleIndex { by_first })
    }
}

/// Enumerates K(2,4) copies in the given order of colour-`c` edges and
/// hands each to `accept`; the first accepted copy is returned.
#[allow(clippy::too_many_arguments)]
fn k24_scan<F>(
    d: &ColouredDigraph,
    c: Colour,
    triples: &[(Colour, Colour, Colour)],
    index: &TripleIndex,
    vertex_pool: &FixedBitSet,
    colour_pool: &FixedBitSet,
    c_edges: &[(Vertex, Vertex)],
    budget: &mut u64,
    mut accept: F,
) -> Option<K24>
where
    F: FnMut(&K24) -> bool,
{
    let pool = |w: Vertex| in_set(vertex_pool, w);
    let fresh = |col: Colour, t: &(Colour, Colour, Colour)| {
        in_set(colour_pool, col) && col != c && col != t.0 && col != t.1 && col != t.2
    };
    for &(y, u) in c_edges {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        if !pool(y) || !pool(u) {
            continue;
        }
        for za in d.in_arcs(u) {
            let ti = *index.by_first.get(za.colour as usize).unwrap_or(&NONE);
            if ti == NONE {
                continue;
            }
            let z = za.vertex;
            if z == y || !pool(z) {
                continue;
            }
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let t = triples[ti as usize];
            for xa in d.in_arcs_with_colour(y, t.2) {
                let x = xa.vertex;
                if x == z || x == u || !pool(x) || d.colour(x, z) != Some(t.1) {
                    continue;
                }
                // Out-fork y->w1, z->w1 with a shared colour f.
                let w1s: Vec<(Vertex, Colour)> = d
                    .out_arcs(y)
                    .iter()
                    .filter(|a| {
                        let w = a.vertex;
                        ![x, y, z, u].contains(&w) && pool(w) && fresh(a.colour, &t)
                            && d.colour(z, w) == Some(a.colour)
                    })
                    .map(|a| (a.vertex, a.colour))
                    .collect();
                if w1s.is_empty() {
                    continue;
                }
                // In-fork w2->y, w2->z with a shared colour e.
                let w2s: Vec<(Vertex, Colour)> = d
                    .in_arcs(y)
                    .iter()
                    .filter(|a| {
                        let w = a.vertex;
                        ![x, y, z, u].contains(&w) && pool(w) && fresh(a.colour, &t)
                            && d.colour(w, z) == Some(a.colour)
                    })
                    .map(|a| (a.vertex, a.colour))
                    .collect();
                for &(w1, f) in &w1s {
                    for &(w2, e) in &w2s {
                        if w1 == w2 || e == f {
                            continue;
                        }
                        let k = K24 { x, y, z, u, w1, w2, triple: ti as usize, f, e };
                        if accept(&k) {
                            return Some(k);
                        }
                    }
                }
            }
        }
    }
    None
}

const P1_CHOICES: usize = 8;

/// Up to `limit` rainbow paths s -> a -> b -> t with a, b in `pool` and
/// colours in `colours`, in adjacency order.
fn length3_paths(
    d: &ColouredDigraph,
    s: Vertex,
    t: Vertex,
    pool: &FixedBitSet,
    colours: &FixedBitSet,
    limit: usize,
) -> Vec<([Vertex; 2], [Colour; 3])> {
    let mut out = Vec::new();
    for e1 in d.out_arcs(s) {
        let a = e1.vertex;
        if a == t || !in_set(pool, a) || !in_set(colours, e1.colour) {
            continue;
        }
        for e2 in d.out_arcs(a) {
            let b = e2.vertex;
            if b == s || b == t || !in_set(pool, b) || !in_set(colours, e2.colour) || e2.colour == e1.colour {
                continue;
            }
            let Some(c3) = d.colour(b, t) else { continue };
            if in_set(colours, c3) && c3 != e1.colour && c3 != e2.colour {
                out.push(([a, b], [e1.colour, e2.colour, c3]));
                if out.len() >= limit {
                    return out;
                }
            }
        }
    }
    out
}

/// Looks for six distinct pool vertices x, y, z, u, w1, w2 with
/// C(y->u) = c, (C(z->u), C(x->z), C(x->y)) one of `triples`, and forks
/// C(y->w1) = C(z->w1) != C(w2->y) = C(w2->z) drawn from `colour_pool`
/// outside c and the matched triple. `budget` caps candidate tuples.
pub fn find_k24(
    d: &ColouredDigraph,
    c: Colour,
    triples: &[(Colour, Colour, Colour)],
    vertex_pool: &FixedBitSet,
    colour_pool: &FixedBitSet,
    budget: u64,
) -> Result<Option<K24>, AbsorberFailure> {
    let index = TripleIndex::new(d.kappa(), triples, c)?;
    let mut left = budget;
    Ok(k24_scan(d, c, triples, &index, vertex_pool, colour_pool, d.colour_class(c), &mut left, |_| true))
}

/// Searches for a (v, c)-absorber whose 12 internal vertices lie in
/// `allowed_v` and whose colours other than `c` lie in `allowed_c`.
/// Every returned absorber has passed [`verify_absorber`].
pub fn find_absorber<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    v: Vertex,
    c: Colour,
    allowed_v: &FixedBitSet,
    allowed_c: &FixedBitSet,
    budget: &AbsorberSearchBudget,
    rng: &mut R,
) -> Result<Absorber, AbsorberFailure> {
    if !d.is_fully_coloured() {
        return Err(fail(AbsorberStage::InvalidInput, "digraph has uncoloured edges"));
    }
    if v as usize >= d.n() || c as usize >= d.kappa() {
        return Err(fail(AbsorberStage::InvalidInput, "v or c out of range"));
    }
    let mut pool = allowed_v.clone();
    pool.grow(d.n());
    pool.set(v as usize, false);
    let mut colours = allowed_c.clone();
    colours.grow(d.kappa());
    colours.set(c as usize, false);
    if pool.count_ones(..) < 12 || colours.count_ones(..) < 11 {
        return Err(fail(AbsorberStage::Capacity, "need 12 internal vertices and 11 internal colours"));
    }

    let mut c_edges: Vec<(Vertex, Vertex)> = d.colour_class(c).to_vec();
    let mut first_arcs = triangle_first_arcs(d, v, TriangleOrientation::Transitive);
    let mut last = fail(AbsorberStage::Triangles, "no rainbow transitive triangle at v");
    let mut left = budget.max_candidates;
    for attempt in 0..=budget.max_restarts {
        if attempt > 0 {
            c_edges.shuffle(rng);
            first_arcs.shuffle(rng);
        }
        let fam = if attempt == 0 {
            triangle_attempt(d, v, &pool, &colours, budget.triangle_target, TriangleOrientation::Transitive, &first_arcs, |_| 0)
        } else {
            triangle_attempt(d, v, &pool, &colours, budget.triangle_target, TriangleOrientation::Transitive, &first_arcs, |len| {
                rng.gen_range(0..len)
            })
        };
        if fam.is_empty() {
            continue;
        }
        // (C(v->v2), C(v1->v2), C(v1->v)) per triangle (v1, v2).
        let triples: Vec<(Colour, Colour, Colour)> = fam
            .iter()
            .map(|&(v1, v2)| {
                let col = |a, b| d.colour(a, b).expect("family edges exist");
                (col(v, v2), col(v1, v2), col(v1, v))
            })
            .collect();
        let index = TripleIndex::new(d.kappa(), &triples, c)?;
        last = fail(AbsorberStage::K24, "no K(2,4) matching any triangle");
        let mut connectors_failed = false;
        let mut found: Option<Absorber> = None;
        k24_scan(d, c, &triples, &index, &pool, &colours, &c_edges, &mut left, |k| {
            let (v1, v2) = fam[k.triple];
            let core = [v1, v2, k.x, k.y, k.z, k.u, k.w1, k.w2];
            if core.contains(&v) || core[..2].iter().any(|w| core[2..].contains(w)) {
                return false;
            }
            let t = triples[k.triple];
            let mut vp = pool.clone();
            core.iter().for_each(|&w| vp.set(w as usize, false));
            let mut cp = colours.clone();
            for col in [t.0, t.1, t.2, k.e, k.f] {
                cp.set(col as usize, false);
            }
            // P1 choices can starve P2, so try a few before giving up.
            for (p1, c1) in length3_paths(d, v2, k.x, &vp, &cp, P1_CHOICES) {
                let mut vq = vp.clone();
                p1.iter().for_each(|&w| vq.set(w as usize, false));
                let mut cq = cp.clone();
                c1.iter().for_each(|&col| cq.set(col as usize, false));
                let Some((p2, _)) = length3_paths(d, k.w1, k.w2, &vq, &cq, 1).pop() else { continue };
                let roles = AbsorberRoles {
                    v,
                    v1,
                    v2,
                    x: k.x,
                    y: k.y,
                    z: k.z,
                    u: k.u,
                    w1: k.w1,
                    w2: k.w2,
                    p1a: p1[0],
                    p1b: p1[1],
                    p2a: p2[0],
                    p2b: p2[1],
                };
                let Ok(a) = Absorber::from_roles(d, c, roles) else { continue };
                if verify_absorber(d, &a).accepted {
                    found = Some(a);
                    return true;
                }
            }
            connectors_failed = true;
            false
        });
        if let Some(a) = found {
            return Ok(a);
        }
        if connectors_failed {
            last = fail(AbsorberStage::Connectors, "no rainbow length-3 connector for any K(2,4)");
        }
        if left == 0 {
            break;
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorber::{gadget_edges, GadgetColours};
    use crate::graph::{bitset_of, complete_bidirected, DigraphBuilder};
    use crate::models::colour_uniform;
    use crate::rng::RngStream;

    fn planted_host(seed: u64, n: usize) -> (ColouredDigraph, AbsorberRoles, GadgetColours) {
        let mut rng = RngStream::root(seed, "host").rng();
        let mut b = DigraphBuilder::new(n, n).unwrap();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                if u != v && rng.gen_bool(0.03) {
                    b.add_edge(u, v, rng.gen_range(0..n as u32)).unwrap();
                }
            }
        }
        let pick = rand::seq::index::sample(&mut rng, n, 13).into_vec();
        let r: Vec<u32> = pick.iter().map(|&x| x as u32).collect();
        let roles = AbsorberRoles {
            v: r[0], v1: r[1], v2: r[2], x: r[3], y: r[4], z: r[5], u: r[6],
            w1: r[7], w2: r[8], p1a: r[9], p1b: r[10], p2a: r[11], p2b: r[12],
        };
        let cs: Vec<u32> = rand::seq::index::sample(&mut rng, n, 12).into_iter().map(|x| x as u32).collect();
        let g = GadgetColours {
            c: cs[0], a: cs[1], b: cs[2], d: cs[3], e: cs[4], f: cs[5],
            p1: [cs[6], cs[7], cs[8]], p2: [cs[9], cs[10], cs[11]],
        };
        for (u, v, c) in gadget_edges(&roles, &g) {
            b.upsert_edge(u, v, c).unwrap();
        }
        (b.build().unwrap(), roles, g)
    }

    #[test]
    fn finds_planted_k24() {
        let (d, _, g) = planted_host(4, 200);
        let triples = [(g.b, g.d, g.a)];
        let pool = d.vertex_set();
        let k = find_k24(&d, g.c, &triples, &pool, &d.colour_set(), u64::MAX).unwrap().unwrap();
        assert_eq!(d.colour(k.y, k.u), Some(g.c));
        assert_eq!(d.colour(k.z, k.u), Some(g.b));
        assert_eq!(d.colour(k.x, k.z), Some(g.d));
        assert_eq!(d.colour(k.x, k.y), Some(g.a));
        assert_eq!(d.colour(k.y, k.w1), d.colour(k.z, k.w1));
        assert_eq!(d.colour(k.w2, k.y), d.colour(k.w2, k.z));
        assert_ne!(k.e, k.f);
    }

    #[test]
    fn k24_trivial_failures() {
        let (d, _, g) = planted_host(5, 120);
        let pool = d.vertex_set();
        let triples = [(g.b, g.d, g.a)];
        assert_eq!(find_k24(&d, g.c, &triples, &pool, &d.colour_set(), 0).unwrap(), None);
        let bad = [(g.c, g.d, g.a)];
        assert!(find_k24(&d, g.c, &bad, &pool, &d.colour_set(), 10).is_err());
        let mut no_c = DigraphBuilder::new(20, 5).unwrap();
        no_c.add_edge(0, 1, 1).unwrap();
        let d = no_c.build().unwrap();
        assert_eq!(find_k24(&d, 0, &[(1, 2, 3)], &d.vertex_set(), &d.colour_set(), 100).unwrap(), None);
    }

    #[test]
    fn finds_absorbers_in_planted_hosts() {
        for seed in 0..10 {
            let (d, roles, _) = planted_host(seed, 150);
            let mut rng = RngStream::root(seed, "find").rng();
            let a = find_absorber(&d, roles.v, roles_c(&d, &roles), &d.vertex_set(), &d.colour_set(),
                &AbsorberSearchBudget::default(), &mut rng)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert!(verify_absorber(&d, &a).accepted);
        }
    }

    fn roles_c(d: &ColouredDigraph, r: &AbsorberRoles) -> Colour {
        d.colour(r.y, r.u).unwrap()
    }

    #[test]
    fn dense_uniform_host() {
        let n = 300;
        let d = colour_uniform(&complete_bidirected(n, n).unwrap(), n, &mut RngStream::root(1, "dense").rng()).unwrap();
        let allowed_v = bitset_of(n, 10..n as u32);
        let allowed_c = bitset_of(n, 10..n as u32);
        let mut rng = RngStream::root(2, "dense-search").rng();
        let a = find_absorber(&d, 3, 5, &allowed_v, &allowed_c, &AbsorberSearchBudget::default(), &mut rng).unwrap();
        assert!(verify_absorber(&d, &a).accepted);
        assert!(a.internal_vertices().iter().all(|&w| w >= 10));
        assert!(a.internal_colours().iter().all(|&c| c >= 10));
    }

    #[test]
    fn tiny_pool_fails_on_capacity() {
        let d = ColouredDigraph::empty(30, 30).unwrap();
        let mut rng = RngStream::root(0, "cap").rng();
        let small = bitset_of(30, 0..11);
        let err = find_absorber(&d, 20, 0, &small, &d.colour_set(), &AbsorberSearchBudget::default(), &mut rng)
            .unwrap_err();
        assert_eq!(err.stage, AbsorberStage::Capacity);
    }
}
