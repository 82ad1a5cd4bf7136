//! Random instance models: seed digraphs, the binomial perturbation, uniform
//! colourings, and the chain of digraphs interpolating between the bidirected
//! undirected model and the directed one.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    read_graph_file, ColouredDigraph, DigraphBuilder, Edge, GraphError, GraphIoError, Vertex,
    UNCOLOURED,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("chain index {i} outside 0..={max}")]
    ChainIndex { i: usize, max: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] GraphIoError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    CompleteBipartiteBidirected,
    RandomSemidegree,
    CompleteBidirected,
    FromFile(PathBuf),
}

impl SeedKind {
    /// Whether the construction depends on `delta` at all.
    pub fn uses_delta(&self) -> bool {
        matches!(self, SeedKind::CompleteBipartiteBidirected | SeedKind::RandomSemidegree)
    }

    /// Stable identifier used in output tables and cell hashes.
    pub fn tag(&self) -> String {
        match self {
            SeedKind::CompleteBipartiteBidirected => "complete-bipartite-bidirected".into(),
            SeedKind::RandomSemidegree => "random-semidegree".into(),
            SeedKind::CompleteBidirected => "complete-bidirected".into(),
            SeedKind::FromFile(p) => format!("from-file:{}", p.display()),
        }
    }
}

impl fmt::Display for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for SeedKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete-bipartite-bidirected" => Ok(SeedKind::CompleteBipartiteBidirected),
            "random-semidegree" => Ok(SeedKind::RandomSemidegree),
            "complete-bidirected" => Ok(SeedKind::CompleteBidirected),
            _ => match s.strip_prefix("from-file:") {
                Some(p) if !p.is_empty() => Ok(SeedKind::FromFile(p.into())),
                _ => Err(ModelError::Param(format!("unknown seed kind `{s}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub delta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub q: f64,
    pub seed_kind: SeedKind,
}

impl ModelParams {
    pub fn kappa(&self) -> usize {
        (self.q * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 {
            return Err(ModelError::Param("n must be positive".into()));
        }
        // delta = 1 is accepted as a surrogate for seeds that ignore it.
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(ModelError::Param(format!("delta = {} outside (0, 1]", self.delta)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(ModelError::Param(format!("C = {} must be non-negative", self.c)));
        }
        if !(self.q > 0.0 && self.q.is_finite()) || self.kappa() == 0 {
            return Err(ModelError::Param(format!("q = {} gives no colours", self.q)));
        }
        if self.c / self.n as f64 > 1.0 {
            return Err(ModelError::Param(format!("C/n = {} exceeds 1", self.c / self.n as f64)));
        }
        if self.seed_kind.uses_delta() && self.delta >= 1.0 {
            return Err(ModelError::Param("this seed kind needs delta < 1".into()));
        }
        Ok(())
    }
}

fn semidegree_target(n: usize, delta: f64) -> Result<usize, ModelError> {
    let k = (delta * n as f64).floor() as usize;
    if k == 0 {
        return Err(ModelError::Param(format!("floor(delta * n) = 0 for delta = {delta}, n = {n}")));
    }
    Ok(k)
}

/// Builds an uncoloured seed digraph on `n` vertices with colour universe
/// `kappa`. File seeds keep their own order and drop their colours.
pub fn make_seed_digraph<R: Rng + ?Sized>(
    kind: &SeedKind,
    n: usize,
    delta: f64,
    kappa: usize,
    rng: &mut R,
) -> Result<ColouredDigraph, ModelError> {
    match kind {
        SeedKind::CompleteBidirected => Ok(crate::graph::complete_bidirected(n, kappa)?),
        SeedKind::CompleteBipartiteBidirected => {
            let a = semidegree_target(n, delta)?;
            let mut b = DigraphBuilder::new(n, kappa)?;
            for u in 0..a as Vertex {
                for v in a as Vertex..n as Vertex {
                    b.add_edge(u, v, UNCOLOURED)?;
                    b.add_edge(v, u, UNCOLOURED)?;
                }
            }
            Ok(b.build()?)
        }
        SeedKind::RandomSemidegree => {
            let k = semidegree_target(n, delta)?;
            if k >= n {
                return Err(ModelError::Param("floor(delta * n) must be below n".into()));
            }
            let mut present = vec![false; n * n];
            for v in 0..n {
                for side in 0..2 {
                    for i in index::sample(rng, n - 1, k) {
                        let w = if i >= v { i + 1 } else { i };
                        let (tail, head) = if side == 0 { (v, w) } else { (w, v) };
                        present[tail * n + head] = true;
                    }
                }
            }
            let mut b = DigraphBuilder::new(n, kappa)?;
            for (i, _) in present.iter().enumerate().filter(|(_, &p)| p) {
                b.add_edge((i / n) as Vertex, (i % n) as Vertex, UNCOLOURED)?;
            }
            Ok(b.build()?)
        }
        SeedKind::FromFile(path) => {
            let d = read_graph_file(path)?;
            Ok(d.recoloured(kappa, |_| UNCOLOURED)?)
        }
    }
}

/// Number of trials until the first success of a Bernoulli(p) sequence,
/// minus one (so 0 means the very next trial succeeds).
fn geometric_skip<R: Rng + ?Sized>(rng: &mut R, log_q: f64) -> u64 {
    let u: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    let skip = (u.ln() / log_q).floor();
    if skip.is_finite() && skip < u64::MAX as f64 {
        skip as u64
    } else {
        u64::MAX
    }
}

/// Adds each ordered pair of distinct vertices independently with
/// probability `c / n`. New edges are uncoloured; existing edges keep their
/// colour.
pub fn perturb<R: Rng + ?Sized>(
    d0: &ColouredDigraph,
    c: f64,
    rng: &mut R,
) -> Result<ColouredDigraph, ModelError> {
    let n = d0.n();
    if n == 0 {
        return Ok(d0.clone());
    }
    let p = c / n as f64;
    if !(0.0..=1.0).contains(&p) {
        return Err(ModelError::Param(format!("edge probability C/n = {p} outside [0, 1]")));
    }
    if p == 0.0 || n < 2 {
        return Ok(d0.clone());
    }
    let pairs = (n * (n - 1)) as u64;
    let mut b = DigraphBuilder::from_digraph(d0);
    let add = |t: u64, b: &mut DigraphBuilder| -> Result<(), ModelError> {
        let tail = (t / (n as u64 - 1)) as Vertex;
        let r = (t % (n as u64 - 1)) as Vertex;
        let head = if r >= tail { r + 1 } else { r };
        if !d0.has_edge(tail, head) {
            b.add_edge(tail, head, UNCOLOURED)?;
        }
        Ok(())
    };
    if p >= 1.0 {
        for t in 0..pairs {
            add(t, &mut b)?;
        }
    } else {
        let log_q = (1.0 - p).ln();
        let mut t = geometric_skip(rng, log_q);
        while t < pairs {
            add(t, &mut b)?;
            t = t.saturating_add(1).saturating_add(geometric_skip(rng, log_q));
        }
    }
    Ok(b.build()?)
}

/// Gives every edge an independent uniform colour in `0..kappa`, drawing in
/// `(tail, head)` order.
pub fn colour_uniform<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    kappa: usize,
    rng: &mut R,
) -> Result<ColouredDigraph, ModelError> {
    if kappa == 0 {
        return Err(ModelError::Param("kappa must be positive".into()));
    }
    Ok(d.recoloured(kappa, |_| rng.gen_range(0..kappa as u32))?)
}

/// Seed, perturbation and colouring in one call.
pub fn sample_model<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<ColouredDigraph, ModelError> {
    params.validate()?;
    let kappa = params.kappa();
    let d0 = make_seed_digraph(&params.seed_kind, params.n, params.delta, kappa, rng)?;
    let d = perturb(&d0, params.c, rng)?;
    colour_uniform(&d, kappa, rng)
}

/// Length of the chain for `n` vertices: one step per unordered pair.
pub fn chain_length(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Samples the `i`-th digraph of the interpolating chain over the undirected
/// graph `g0` (given as a symmetric digraph).
///
/// Pairs `{x, y}` with `x < y` are visited lexicographically; the `j`-th pair
/// (1-based) follows the bidirected rule when `j > i` and the directed rule
/// otherwise. Presence draws come before colour draws, and a shared colour
/// costs one draw.
pub fn sample_gamma<R: Rng + ?Sized>(
    g0: &ColouredDigraph,
    i: usize,
    c: f64,
    kappa: usize,
    rng: &mut R,
) -> Result<ColouredDigraph, ModelError> {
    let n = g0.n();
    let max = chain_length(n);
    if i > max {
        return Err(ModelError::ChainIndex { i, max });
    }
    if kappa == 0 {
        return Err(ModelError::Param("kappa must be positive".into()));
    }
    let p_pair = c / n as f64;
    let p_half = c / (2.0 * n as f64);
    if !(0.0..=1.0).contains(&p_pair) {
        return Err(ModelError::Param(format!("C/n = {p_pair} outside [0, 1]")));
    }
    let k = kappa as u32;
    let mut b = DigraphBuilder::new(n, kappa)?;
    let mut j = 0usize;
    for x in 0..n as Vertex {
        for y in x + 1..n as Vertex {
            j += 1;
            let in_g0 = g0.has_edge(x, y);
            if in_g0 != g0.has_edge(y, x) {
                return Err(ModelError::Param(format!("g0 is not symmetric at {{{x}, {y}}}")));
            }
            if j > i {
                if in_g0 || rng.gen_bool(p_pair) {
                    let col = rng.gen_range(0..k);
                    b.add_edge(x, y, col)?;
                    b.add_edge(y, x, col)?;
                }
            } else if in_g0 && rng.gen_bool(1.0 / 3.0) {
                let cxy = rng.gen_range(0..k);
                let cyx = rng.gen_range(0..k);
                b.add_edge(x, y, cxy)?;
                b.add_edge(y, x, cyx)?;
            } else {
                for (u, v) in [(x, y), (y, x)] {
                    if rng.gen_bool(p_half) {
                        b.add_edge(u, v, rng.gen_range(0..k))?;
                    }
                }
            }
        }
    }
    Ok(b.build()?)
}

/// Undirected complete graph on `n` vertices as a symmetric digraph.
pub fn complete_graph(n: usize) -> Result<ColouredDigraph, ModelError> {
    Ok(crate::graph::complete_bidirected(n, 1)?)
}

/// Undirected complete bipartite graph with parts `0..a` and `a..n`.
pub fn complete_bipartite_graph(a: usize, n: usize) -> Result<ColouredDigraph, ModelError> {
    let mut b = DigraphBuilder::new(n, 1)?;
    for u in 0..a as Vertex {
        for v in a as Vertex..n as Vertex {
            b.add_edge(u, v, UNCOLOURED)?;
            b.add_edge(v, u, UNCOLOURED)?;
        }
    }
    Ok(b.build()?)
}

/// Edges of `d`, convenience for tests and callers that need owned data.
pub fn edge_list(d: &ColouredDigraph) -> Vec<Edge> {
    d.edges().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn rng(tag: &str) -> rand_chacha::ChaCha8Rng {
        RngStream::root(11, tag).rng()
    }

    #[test]
    fn bipartite_seed_shape() {
        let d = make_seed_digraph(&SeedKind::CompleteBipartiteBidirected, 8, 0.25, 8, &mut rng("a")).unwrap();
        assert_eq!(d.edge_count(), 24);
        assert_eq!(d.min_semidegree(), 2);
        assert!(d.has_edge(0, 2) && d.has_edge(7, 1));
        assert!(!d.has_edge(0, 1) && !d.has_edge(2, 3));
    }

    #[test]
    fn complete_seed_ignores_delta() {
        let d = make_seed_digraph(&SeedKind::CompleteBidirected, 4, 0.01, 4, &mut rng("b")).unwrap();
        assert_eq!(d.edge_count(), 12);
        assert_eq!(d.min_semidegree(), 3);
    }

    #[test]
    fn zero_semidegree_target_rejected() {
        let r = make_seed_digraph(&SeedKind::CompleteBipartiteBidirected, 8, 0.1, 8, &mut rng("c"));
        assert!(matches!(r, Err(ModelError::Param(_))));
    }

    #[test]
    fn random_semidegree_meets_bound() {
        for seed in 0..5 {
            let mut r = RngStream::root(seed, "semi").rng();
            let d = make_seed_digraph(&SeedKind::RandomSemidegree, 100, 0.3, 100, &mut r).unwrap();
            assert!(d.min_semidegree() >= 30);
        }
    }

    #[test]
    fn perturb_extremes() {
        let d0 = make_seed_digraph(&SeedKind::CompleteBipartiteBidirected, 10, 0.3, 10, &mut rng("d")).unwrap();
        assert_eq!(perturb(&d0, 0.0, &mut rng("e")).unwrap(), d0);
        let full = perturb(&d0, 10.0, &mut rng("e")).unwrap();
        assert_eq!(full.edge_count(), 90);
        assert!(perturb(&d0, 10.5, &mut rng("e")).is_err());
    }

    #[test]
    fn perturb_mean_matches_binomial() {
        let n = 1000;
        let d0 = ColouredDigraph::empty(n, 1).unwrap();
        let trials = 100;
        let total: usize = (0..trials)
            .map(|t| perturb(&d0, 10.0, &mut RngStream::root(t, "pm").rng()).unwrap().edge_count())
            .sum();
        let pairs = (n * (n - 1)) as f64;
        let p = 10.0 / n as f64;
        let mean = total as f64 / trials as f64;
        let sd_of_mean = (pairs * p * (1.0 - p) / trials as f64).sqrt();
        assert!((mean - pairs * p).abs() <= 3.0 * sd_of_mean, "mean {mean}");
    }

    #[test]
    fn colour_frequencies_single_edge() {
        let d = ColouredDigraph::from_edges(2, 1, [Edge { tail: 0, head: 1, colour: UNCOLOURED }]).unwrap();
        let mut counts = [0usize; 4];
        let mut r = rng("f");
        for _ in 0..4000 {
            let c = colour_uniform(&d, 4, &mut r).unwrap().colour(0, 1).unwrap();
            counts[c as usize] += 1;
        }
        assert!(counts.iter().all(|&k| (850..=1150).contains(&k)), "{counts:?}");
        let mono = colour_uniform(&d, 1, &mut r).unwrap();
        assert_eq!(mono.colour(0, 1), Some(0));
    }

    #[test]
    fn gamma_endpoints() {
        let g0 = complete_bipartite_graph(2, 6).unwrap();
        let n_max = chain_length(6);
        let g = sample_gamma(&g0, 0, 2.0, 6, &mut rng("g")).unwrap();
        for (x, y) in [(0, 2), (1, 5)] {
            assert!(g.has_edge(x, y) && g.has_edge(y, x));
            assert_eq!(g.colour(x, y), g.colour(y, x));
        }
        assert!(matches!(
            sample_gamma(&g0, n_max + 1, 2.0, 6, &mut rng("g")),
            Err(ModelError::ChainIndex { .. })
        ));
        let last = sample_gamma(&g0, n_max, 0.0, 6, &mut rng("g")).unwrap();
        assert!(!last.has_edge(0, 1));
    }

    #[test]
    fn sampling_is_reproducible() {
        let params = ModelParams {
            n: 30,
            delta: 0.2,
            c: 3.0,
            q: 1.0,
            seed_kind: SeedKind::RandomSemidegree,
        };
        let a = sample_model(&params, &mut rng("h")).unwrap();
        let b = sample_model(&params, &mut rng("h")).unwrap();
        assert_eq!(a, b);
        assert!(a.is_fully_coloured());
    }

    #[test]
    fn seed_kind_strings() {
        for s in ["complete-bipartite-bidirected", "random-semidegree", "complete-bidirected", "from-file:x.txt"] {
            assert_eq!(s.parse::<SeedKind>().unwrap().tag(), s);
        }
        assert!("nope".parse::<SeedKind>().is_err());
        let json = serde_json::to_string(&SeedKind::RandomSemidegree).unwrap();
        assert_eq!(json, "\"random-semidegree\"");
    }
}
