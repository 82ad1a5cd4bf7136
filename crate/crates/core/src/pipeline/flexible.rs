//! Flexible vertex and colour sets, and the length-7 connectors routed
//! through them.

use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{input, PipelineError, PipelineFailure, Stage};
use crate::graph::{bitset_of, Colour, ColouredDigraph, DirectedPath, Vertex};
use crate::matching::in_set;

/// Reserved sets of equal size 2m, both sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexibleSets {
    pub mu: f64,
    pub m: usize,
    pub vertices: Vec<Vertex>,
    pub colours: Vec<Colour>,
}

impl FlexibleSets {
    pub fn vertex_set(&self, n: usize) -> FixedBitSet {
        bitset_of(n, self.vertices.iter().copied())
    }

    pub fn colour_set(&self, kappa: usize) -> FixedBitSet {
        bitset_of(kappa, self.colours.iter().copied())
    }
}

/// Includes each element with probability mu, resampling when the sample
/// overshoots `size`, then tops the sample up to exactly `size`.
fn inclusion_sample<R: Rng + ?Sized>(
    universe: usize,
    size: usize,
    mu: f64,
    retries: usize,
    rng: &mut R,
) -> Option<Vec<u32>> {
    for _ in 0..=retries {
        let picked: Vec<u32> = (0..universe as u32).filter(|_| rng.gen_bool(mu)).collect();
        if picked.len() > size {
            continue;
        }
        let mut inside = vec![false; universe];
        picked.iter().for_each(|&x| inside[x as usize] = true);
        let rest: Vec<u32> = (0..universe as u32).filter(|&x| !inside[x as usize]).collect();
        let mut out = picked;
        out.extend(index::sample(rng, rest.len(), size - out.len()).into_iter().map(|i| rest[i]));
        out.sort_unstable();
        return Some(out);
    }
    None
}

/// Flexible sets of size 2 round(mu n), each a superset of an
/// independent-inclusion sample at rate mu.
pub fn build_flexible_sets<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    mu: f64,
    retries: usize,
    rng: &mut R,
) -> Result<FlexibleSets, PipelineError> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(input(format!("mu = {mu} must lie in (0, 1]")));
    }
    let (n, kappa) = (d.n(), d.kappa());
    let m = (mu * n as f64).round() as usize;
    let size = 2 * m;
    if m == 0 || size > n || size > kappa {
        return Err(PipelineFailure::new(
            Stage::FlexibleSets,
            format!("need 1 <= 2 round(mu n) = {size} <= min(n, kappa) = {}", n.min(kappa)),
        )
        .into());
    }
    let overshoot = || PipelineFailure::new(Stage::FlexibleSets, format!("inclusion sample exceeded {size} {retries} times"));
    let vertices = inclusion_sample(n, size, mu, retries, rng).ok_or_else(overshoot)?;
    let colours = inclusion_sample(kappa, size, mu, retries, rng).ok_or_else(overshoot)?;
    Ok(FlexibleSets { mu, m, vertices, colours })
}

/// Calls `f` on every rainbow path s -> a -> b -> t with a, b accepted by
/// `ok_v` and colours accepted by `ok_c`, until `f` returns true.
fn each_length3(
    d: &ColouredDigraph,
    s: Vertex,
    t: Vertex,
    ok_v: impl Fn(Vertex) -> bool,
    ok_c: impl Fn(Colour) -> bool,
    mut f: impl FnMut([Vertex; 2], [Colour; 3]) -> bool,
) -> bool {
    for e1 in d.out_arcs(s) {
        let a = e1.vertex;
        if a == t || !ok_v(a) || !ok_c(e1.colour) {
            continue;
        }
        for e2 in d.out_arcs(a) {
            let b = e2.vertex;
            if b == s || b == t || !ok_v(b) || !ok_c(e2.colour) || e2.colour == e1.colour {
                continue;
            }
            let Some(c3) = d.colour(b, t) else { continue };
            if ok_c(c3) && c3 != e1.colour && c3 != e2.colour && f([a, b], [e1.colour, e2.colour, c3]) {
                return true;
            }
        }
    }
    false
}

/// Rainbow path `u P1 x y P2 v` of exactly 7 edges where `xy` has colour
/// `c`, the six internal vertices are flexible and outside `used_v`, and
/// the other six colours are flexible and outside `used_c`. The search is
/// exhaustive and returns the first path in (xy, P1, P2) scan order.
pub fn flexible_connect(
    d: &ColouredDigraph,
    flex: &FlexibleSets,
    u: Vertex,
    v: Vertex,
    c: Colour,
    used_v: &FixedBitSet,
    used_c: &FixedBitSet,
) -> Result<Option<DirectedPath>, PipelineError> {
    if u == v {
        return Err(input(format!("connector endpoints coincide at {u}")));
    }
    if c as usize >= d.kappa() {
        return Err(input(format!("colour {c} out of range")));
    }
    let mut pool_v = flex.vertex_set(d.n());
    pool_v.difference_with(used_v);
    for w in [u, v] {
        if (w as usize) < pool_v.len() {
            pool_v.set(w as usize, false);
        }
    }
    let mut pool_c = flex.colour_set(d.kappa());
    pool_c.difference_with(used_c);
    pool_c.set(c as usize, false);

    for &(x, y) in d.colour_class(c) {
        if !in_set(&pool_v, x) || !in_set(&pool_v, y) {
            continue;
        }
        let mut found = None;
        each_length3(
            d,
            u,
            x,
            |w| w != y && in_set(&pool_v, w),
            |k| in_set(&pool_c, k),
            |p1, c1| {
                each_length3(
                    d,
                    y,
                    v,
                    |w| w != x && !p1.contains(&w) && in_set(&pool_v, w),
                    |k| !c1.contains(&k) && in_set(&pool_c, k),
                    |p2, _| {
                        found = Some(vec![u, p1[0], p1[1], x, y, p2[0], p2[1], v]);
                        true
                    },
                )
            },
        );
        if let Some(seq) = found {
            return Ok(Some(DirectedPath::new(seq).expect("vertices distinct by construction")));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{is_rainbow, DigraphBuilder};
    use crate::models::colour_uniform;
    use crate::rng::RngStream;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        RngStream::root(seed, "flex-test").rng()
    }

    #[test]
    fn sizes_are_exact() {
        let d = ColouredDigraph::empty(1000, 1000).unwrap();
        for seed in 0..5 {
            let f = build_flexible_sets(&d, 0.05, 100, &mut rng(seed)).unwrap();
            assert_eq!(f.vertices.len(), 100);
            assert_eq!(f.colours.len(), 100);
            assert!(f.vertices.windows(2).all(|w| w[0] < w[1]));
        }
        let d = ColouredDigraph::empty(10, 10).unwrap();
        let f = build_flexible_sets(&d, 0.5, 100, &mut rng(0)).unwrap();
        assert_eq!(f.vertices, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn size_errors() {
        let d = ColouredDigraph::empty(10, 4).unwrap();
        let e = build_flexible_sets(&d, 0.3, 10, &mut rng(0)).unwrap_err();
        assert_eq!(e.stage(), Some(Stage::FlexibleSets));
        assert!(matches!(build_flexible_sets(&d, 0.0, 10, &mut rng(0)), Err(PipelineError::Input(_))));
        // Target size 2 with inclusion rate 0.03 over 40 elements: without
        // retries an overshoot happens for some seeds.
        let d = ColouredDigraph::empty(40, 40).unwrap();
        let fails = (0..40).filter(|&s| build_flexible_sets(&d, 0.03, 0, &mut rng(s)).is_err()).count();
        assert!(fails > 0);
    }

    /// Sparse host with one planted connector 0 -> 10..15 -> 1 whose middle
    /// edge 12 -> 13 has colour 50.
    fn planted() -> (ColouredDigraph, FlexibleSets, Vec<Vertex>) {
        let n = 60;
        let mut r = rng(7);
        let base = DigraphBuilder::new(n, n).unwrap().build().unwrap();
        let mut b = DigraphBuilder::from_digraph(&base);
        for _ in 0..120 {
            let (s, t) = (r.gen_range(0..n as u32), r.gen_range(0..n as u32));
            if s != t {
                // Colours 40.. keep random edges out of the flexible palette.
                b.upsert_edge(s, t, r.gen_range(40..50)).unwrap();
            }
        }
        let seq = vec![0, 10, 11, 12, 13, 14, 15, 1];
        let colours = [20, 21, 22, 50, 23, 24, 25];
        for (w, &k) in seq.windows(2).zip(&colours) {
            b.upsert_edge(w[0], w[1], k).unwrap();
        }
        let flex = FlexibleSets {
            mu: 0.1,
            m: 6,
            vertices: (10..22).collect(),
            colours: (20..32).collect(),
        };
        (b.build().unwrap(), flex, seq)
    }

    #[test]
    fn finds_the_planted_connector() {
        let (d, flex, seq) = planted();
        let none_v = FixedBitSet::with_capacity(d.n());
        let none_c = FixedBitSet::with_capacity(d.kappa());
        let p = flexible_connect(&d, &flex, 0, 1, 50, &none_v, &none_c).unwrap().unwrap();
        assert_eq!(p.vertices(), seq.as_slice());
        assert_eq!(p.len(), 7);
        assert!(is_rainbow(&d, p.edges()).unwrap());
        // Using up one interior vertex or colour kills it.
        let used = bitset_of(d.n(), [14]);
        assert_eq!(flexible_connect(&d, &flex, 0, 1, 50, &used, &none_c).unwrap(), None);
        let used = bitset_of(d.kappa(), [21]);
        assert_eq!(flexible_connect(&d, &flex, 0, 1, 50, &none_v, &used).unwrap(), None);
        // No edge of the requested colour inside the flexible set.
        assert_eq!(flexible_connect(&d, &flex, 0, 1, 51, &none_v, &none_c).unwrap(), None);
        assert!(flexible_connect(&d, &flex, 3, 3, 50, &none_v, &none_c).is_err());
    }

    #[test]
    fn dense_hosts_connect() {
        let n = 400;
        let d = colour_uniform(&crate::graph::complete_bidirected(n, n).unwrap(), n, &mut rng(3)).unwrap();
        let flex = FlexibleSets { mu: 0.25, m: 100, vertices: (0..200).collect(), colours: (0..200).collect() };
        let none_v = FixedBitSet::with_capacity(n);
        let none_c = FixedBitSet::with_capacity(n);
        let mut hits = 0;
        for c in 200..210u32 {
            if let Some(p) = flexible_connect(&d, &flex, 300, 301, c, &none_v, &none_c).unwrap() {
                hits += 1;
                let cs = p.colours(&d).unwrap();
                assert_eq!(cs.iter().filter(|&&k| k == c).count(), 1);
                assert!(cs.iter().all(|&k| k == c || k < 200));
                assert!(p.interior().iter().all(|&w| w < 200));
                assert!(is_rainbow(&d, p.edges()).unwrap());
            }
        }
        assert!(hits >= 8, "{hits}");
    }
}
