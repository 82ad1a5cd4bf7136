use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MatchingError;

/// An r-uniform hypergraph. Edges are kept as a multiset so that sampling
/// with replacement can repeat them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    r: usize,
    n: usize,
    edges: Vec<Vec<u32>>,
}

impl Hypergraph {
    pub fn new(r: usize, n: usize, edges: Vec<Vec<u32>>) -> Result<Self, MatchingError> {
        if r < 2 {
            return Err(MatchingError::Uniformity(r));
        }
        let mut edges = edges;
        for (i, e) in edges.iter_mut().enumerate() {
            e.sort_unstable();
            let distinct = e.windows(2).all(|w| w[0] != w[1]);
            if e.len() != r || !distinct || e.iter().any(|&v| v as usize >= n) {
                return Err(MatchingError::BadEdge(i));
            }
        }
        Ok(Hypergraph { r, n, edges })
    }

    /// Complete r-uniform hypergraph for r = 2 (the complete graph).
    pub fn complete_graph(n: usize) -> Self {
        let edges = (0..n as u32)
            .flat_map(|a| (a + 1..n as u32).map(move |b| vec![a, b]))
            .collect();
        Hypergraph { r: 2, n, edges }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.edges[i]
    }

    /// True iff the listed edges are pairwise vertex-disjoint.
    pub fn is_matching(&self, chosen: &[usize]) -> bool {
        let mut seen = vec![false; self.n];
        for &i in chosen {
            for &v in &self.edges[i] {
                if std::mem::replace(&mut seen[v as usize], true) {
                    return false;
                }
            }
        }
        true
    }

    /// True iff `chosen` is a matching that no further edge can extend.
    pub fn is_maximal_matching(&self, chosen: &[usize]) -> bool {
        if !self.is_matching(chosen) {
            return false;
        }
        let mut covered = vec![false; self.n];
        for &i in chosen {
            for &v in &self.edges[i] {
                covered[v as usize] = true;
            }
        }
        self.edges.iter().all(|e| e.iter().any(|&v| covered[v as usize]))
    }
}

/// Scans edges in `order` and keeps each one disjoint from those kept so
/// far. Returns edge indices in the order they were kept.
pub fn greedy_maximal_matching(h: &Hypergraph, order: &[usize]) -> Vec<usize> {
    let mut covered = vec![false; h.n];
    let mut out = Vec::new();
    for &i in order {
        let e = &h.edges[i];
        if e.iter().all(|&v| !covered[v as usize]) {
            e.iter().for_each(|&v| covered[v as usize] = true);
            out.push(i);
        }
    }
    out
}

pub const BRUTE_FORCE_MAX_EDGES: usize = 24;

/// Maximum matching by branch and bound over edge subsets.
pub fn brute_force_max_matching(h: &Hypergraph) -> Result<Vec<usize>, MatchingError> {
    let m = h.edges.len();
    if m > BRUTE_FORCE_MAX_EDGES {
        return Err(MatchingError::TooManyEdges { edges: m, max: BRUTE_FORCE_MAX_EDGES });
    }
    fn go(h: &Hypergraph, i: usize, covered: &mut Vec<bool>, cur: &mut Vec<usize>, best: &mut Vec<usize>) {
        if cur.len() + (h.edges.len() - i) <= best.len() {
            return;
        }
        if i == h.edges.len() {
            *best = cur.clone();
            return;
        }
        let e = &h.edges[i];
        if e.iter().all(|&v| !covered[v as usize]) {
            e.iter().for_each(|&v| covered[v as usize] = true);
            cur.push(i);
            go(h, i + 1, covered, cur, best);
            cur.pop();
            e.iter().for_each(|&v| covered[v as usize] = false);
        }
        go(h, i + 1, covered, cur, best);
    }
    let mut best = Vec::new();
    go(h, 0, &mut vec![false; h.n], &mut Vec::new(), &mut best);
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// `m` uniform draws with replacement.
    WithReplacement(usize),
    /// Keep each edge independently with probability `p`.
    Bernoulli(f64),
}

/// Samples a sub-hypergraph and returns a greedy maximal matching of it,
/// scanning the sample in random order. The result lists edges (not
/// indices), since with-replacement samples may repeat edges.
pub fn sample_and_match<R: Rng + ?Sized>(
    h: &Hypergraph,
    mode: SampleMode,
    rng: &mut R,
) -> Result<Vec<Vec<u32>>, MatchingError> {
    let mut sample: Vec<usize> = match mode {
        SampleMode::WithReplacement(m) => {
            if h.edges.is_empty() {
                Vec::new()
            } else {
                (0..m).map(|_| rng.gen_range(0..h.edges.len())).collect()
            }
        }
        SampleMode::Bernoulli(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(MatchingError::Probability(p));
            }
            (0..h.edges.len()).filter(|_| rng.gen_bool(p)).collect()
        }
    };
    sample.shuffle(rng);
    Ok(greedy_maximal_matching(h, &sample).into_iter().map(|i| h.edges[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn greedy_examples() {
        let path = Hypergraph::new(2, 3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(greedy_maximal_matching(&path, &[0, 1]), vec![0]);
        let two = Hypergraph::new(3, 6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(greedy_maximal_matching(&two, &[0, 1]).len(), 2);
    }

    #[test]
    fn brute_force_examples() {
        let tri = Hypergraph::new(2, 3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(brute_force_max_matching(&tri).unwrap().len(), 1);
        let pm = Hypergraph::new(2, 6, vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![1, 2]]).unwrap();
        assert_eq!(brute_force_max_matching(&pm).unwrap().len(), 3);
        let big = Hypergraph::complete_graph(8);
        assert!(matches!(brute_force_max_matching(&big), Err(MatchingError::TooManyEdges { .. })));
    }

    #[test]
    fn validation() {
        assert!(Hypergraph::new(1, 3, vec![]).is_err());
        assert!(Hypergraph::new(2, 3, vec![vec![1, 1]]).is_err());
        assert!(Hypergraph::new(2, 3, vec![vec![0, 3]]).is_err());
        assert!(Hypergraph::new(3, 3, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn greedy_versus_maximum_on_random_3_graphs() {
        for seed in 0..100u64 {
            let mut rng = RngStream::root(seed, "hyper").rng();
            let n = rng.gen_range(3..=12);
            let m = rng.gen_range(0..=BRUTE_FORCE_MAX_EDGES);
            let edges = (0..m)
                .map(|_| rand::seq::index::sample(&mut rng, n, 3).into_iter().map(|v| v as u32).collect())
                .collect();
            let h = Hypergraph::new(3, n, edges).unwrap();
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            let g = greedy_maximal_matching(&h, &order);
            let best = brute_force_max_matching(&h).unwrap();
            assert!(h.is_maximal_matching(&g));
            assert!(h.is_matching(&best));
            assert!(g.len() <= best.len() && best.len() <= 3 * g.len(), "seed {seed}");
        }
    }

    #[test]
    fn sampling_modes() {
        let mut rng = RngStream::root(5, "sample").rng();
        let k60 = Hypergraph::complete_graph(60);
        assert!(sample_and_match(&k60, SampleMode::WithReplacement(0), &mut rng).unwrap().is_empty());
        let all = sample_and_match(&k60, SampleMode::Bernoulli(1.0), &mut rng).unwrap();
        assert_eq!(all.len(), 30);
        let good = (0..100u64)
            .filter(|&s| {
                let mut r = RngStream::root(s, "k60").rng();
                sample_and_match(&k60, SampleMode::WithReplacement(60), &mut r).unwrap().len() >= 6
            })
            .count();
        assert!(good >= 95, "{good}");
    }
}
