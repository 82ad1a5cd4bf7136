//! Robustly matchable bipartite templates.
//!
//! A template is a d-regular bipartite graph on sides A and B of size 7m.
//! The first 2m labels of each side are flexible: deleting any X from the
//! flexible part of A and any Y from the flexible part of B with
//! |X| = |Y| <= m should leave a perfect matching. Construction is random,
//! so the property is certified per template rather than assumed.

use itertools::Itertools;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::max_bipartite_matching;
use crate::rng::RngStream;
use crate::search::binomial;

/// Largest number of (X, Y) pairs exhaustive certification will visit.
pub const CERTIFY_EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Whole-matching resamples tried before falling back to an augmenting
/// construction in the complement.
const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RmbgError {
    #[error("infeasible template parameters m = {m}, d = {d} (need m >= 1 and 1 <= d <= 7m)")]
    Params { m: usize, d: usize },
    #[error("deleted sets must have equal size at most {max}, got |X| = {x}, |Y| = {y}")]
    DeletionSizes { x: usize, y: usize, max: usize },
    #[error("label {0} is not in the flexible prefix or is repeated")]
    NotFlexible(u32),
    #[error("exhaustive certification needs {pairs} pairs, over the limit {limit}")]
    OverBudget { pairs: u128, limit: u128 },
    #[error("malformed template: {0}")]
    Malformed(String),
}

/// A d-regular bipartite template. `adj[a]` lists the B-labels adjacent to
/// A-label `a`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TemplateRepr", into = "TemplateRepr")]
pub struct RmbgTemplate {
    m: usize,
    d: usize,
    adj: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateRepr {
    m: usize,
    d: usize,
    a_flex: Vec<u32>,
    b_flex: Vec<u32>,
    adjacency: Vec<Vec<u32>>,
}

impl From<RmbgTemplate> for TemplateRepr {
    fn from(t: RmbgTemplate) -> Self {
        let flex: Vec<u32> = (0..t.flex_len() as u32).collect();
        TemplateRepr { m: t.m, d: t.d, a_flex: flex.clone(), b_flex: flex, adjacency: t.adj }
    }
}

impl TryFrom<TemplateRepr> for RmbgTemplate {
    type Error = RmbgError;

    fn try_from(r: TemplateRepr) -> Result<Self, RmbgError> {
        let flex: Vec<u32> = (0..2 * r.m as u32).collect();
        if r.a_flex != flex || r.b_flex != flex {
            return Err(RmbgError::Malformed("flexible sets must be the first 2m labels".into()));
        }
        RmbgTemplate::from_adjacency(r.m, r.d, r.adjacency)
    }
}

impl RmbgTemplate {
    /// Validates side sizes and regularity. Adjacency lists are sorted.
    pub fn from_adjacency(m: usize, d: usize, mut adj: Vec<Vec<u32>>) -> Result<Self, RmbgError> {
        if m == 0 || d == 0 || d > 7 * m {
            return Err(RmbgError::Params { m, d });
        }
        let side = 7 * m;
        if adj.len() != side {
            return Err(RmbgError::Malformed(format!("expected {side} adjacency lists, got {}", adj.len())));
        }
        let mut right_deg = vec![0usize; side];
        for (a, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.len() != d || list.windows(2).any(|w| w[0] == w[1]) {
                return Err(RmbgError::Malformed(format!("A-label {a} does not have {d} distinct neighbours")));
            }
            for &b in list.iter() {
                if b as usize >= side {
                    return Err(RmbgError::Malformed(format!("B-label {b} out of range")));
                }
                right_deg[b as usize] += 1;
            }
        }
        if let Some(b) = right_deg.iter().position(|&k| k != d) {
            return Err(RmbgError::Malformed(format!("B-label {b} has degree {}", right_deg[b])));
        }
        Ok(RmbgTemplate { m, d, adj })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Size of each side, 7m.
    pub fn side(&self) -> usize {
        7 * self.m
    }

    /// Size of each flexible prefix, 2m.
    pub fn flex_len(&self) -> usize {
        2 * self.m
    }

    pub fn neighbours(&self, a: u32) -> &[u32] {
        &self.adj[a as usize]
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adj.get(a as usize).is_some_and(|l| l.binary_search(&b).is_ok())
    }

    /// All edges `(a, b)` in lexicographic order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, l)| l.iter().map(move |&b| (a as u32, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.side() * self.d
    }

    fn check_deletion(&self, x: &[u32], y: &[u32]) -> Result<(), RmbgError> {
        if x.len() != y.len() || x.len() > self.m {
            return Err(RmbgError::DeletionSizes { x: x.len(), y: y.len(), max: self.m });
        }
        for set in [x, y] {
            let mut seen = vec![false; self.flex_len()];
            for &l in set {
                if l as usize >= self.flex_len() || std::mem::replace(&mut seen[l as usize], true) {
                    return Err(RmbgError::NotFlexible(l));
                }
            }
        }
        Ok(())
    }
}

/// Union of `d` random perfect matchings between two sides of size 7m. A
/// matching that collides with an earlier one is resampled whole; after
/// too many collisions the next matching is built by augmenting paths in
/// the complement, which is regular and so always has a perfect matching.
pub fn build_rmbg<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<RmbgTemplate, RmbgError> {
    if m == 0 || d == 0 || d > 7 * m {
        return Err(RmbgError::Params { m, d });
    }
    let side = 7 * m;
    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(d); side];
    let mut perm: Vec<u32> = (0..side as u32).collect();
    for _ in 0..d {
        let mut placed = false;
        for _ in 0..MAX_RESAMPLES {
            perm.shuffle(rng);
            if perm.iter().enumerate().all(|(a, b)| !adj[a].contains(b)) {
                placed = true;
                break;
            }
        }
        if !placed {
            let comp: Vec<Vec<usize>> = (0..side)
                .map(|a| {
                    let mut free: Vec<usize> = (0..side).filter(|&b| !adj[a].contains(&(b as u32))).collect();
                    free.shuffle(rng);
                    free
                })
                .collect();
            let mate = max_bipartite_matching(side, &comp);
            for (a, b) in mate.into_iter().enumerate() {
                perm[a] = b.expect("complement of a regular bipartite graph is regular") as u32;
            }
        }
        for (a, &b) in perm.iter().enumerate() {
            adj[a].push(b);
        }
    }
    RmbgTemplate::from_adjacency(m, d, adj)
}

/// Perfect matching of A minus `x` with B minus `y`, as `(a, b)` pairs
/// sorted by `a`, or `None` when no perfect matching exists.
pub fn robust_match(t: &RmbgTemplate, x: &[u32], y: &[u32]) -> Result<Option<Vec<(u32, u32)>>, RmbgError> {
    t.check_deletion(x, y)?;
    Ok(match_without(t, x, y))
}

fn match_without(t: &RmbgTemplate, x: &[u32], y: &[u32]) -> Option<Vec<(u32, u32)>> {
    let side = t.side();
    let mut gone_a = vec![false; side];
    let mut gone_b = vec![false; side];
    x.iter().for_each(|&a| gone_a[a as usize] = true);
    y.iter().for_each(|&b| gone_b[b as usize] = true);
    let lefts: Vec<u32> = (0..side as u32).filter(|&a| !gone_a[a as usize]).collect();
    let adj: Vec<Vec<usize>> = lefts
        .iter()
        .map(|&a| t.adj[a as usize].iter().filter(|&&b| !gone_b[b as usize]).map(|&b| b as usize).collect())
        .collect();
    let mate = max_bipartite_matching(side, &adj);
    lefts.iter().zip(mate).map(|(&a, b)| b.map(|b| (a, b as u32))).collect()
}

/// True when `pairs` is a perfect matching of A minus `x` with B minus `y`
/// using template edges only.
pub fn is_perfect_matching(t: &RmbgTemplate, x: &[u32], y: &[u32], pairs: &[(u32, u32)]) -> bool {
    let side = t.side();
    let mut cover_a = vec![0u8; side];
    let mut cover_b = vec![0u8; side];
    x.iter().for_each(|&a| cover_a[a as usize] = 2);
    y.iter().for_each(|&b| cover_b[b as usize] = 2);
    for &(a, b) in pairs {
        if !t.has_edge(a, b) || cover_a[a as usize] != 0 || cover_b[b as usize] != 0 {
            return false;
        }
        cover_a[a as usize] = 1;
        cover_b[b as usize] = 1;
    }
    cover_a.iter().chain(&cover_b).all(|&c| c != 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum CertifyMode {
    Exhaustive,
    /// Random deletion pairs drawn from a stream seeded by `seed`.
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub m: usize,
    pub d: usize,
    pub mode: CertifyMode,
    pub pass: bool,
    /// Number of (X, Y) pairs checked before stopping.
    pub checked: u64,
    pub counterexample: Option<(Vec<u32>, Vec<u32>)>,
}

/// Number of admissible (X, Y) pairs for a template of scale `m`.
pub fn admissible_pairs(m: usize) -> u128 {
    (0..=m).map(|s| binomial(2 * m, s).pow(2)).sum()
}

/// Checks robust matchability, either over every admissible (X, Y) or over
/// random samples. Failing reports carry the first counterexample found;
/// in exhaustive mode that is the first in (size, X, Y) lexicographic order.
pub fn certify_robust_matchability(t: &RmbgTemplate, mode: CertifyMode) -> Result<RobustnessReport, RmbgError> {
    let report = |pass, checked, counterexample| RobustnessReport { m: t.m, d: t.d, mode, pass, checked, counterexample };
    match mode {
        CertifyMode::Exhaustive => {
            let pairs = admissible_pairs(t.m);
            if pairs > CERTIFY_EXHAUSTIVE_LIMIT {
                return Err(RmbgError::OverBudget { pairs, limit: CERTIFY_EXHAUSTIVE_LIMIT });
            }
            let flex = t.flex_len() as u32;
            for s in 0..=t.m {
                let subsets: Vec<Vec<u32>> = (0..flex).combinations(s).collect();
                let bad = subsets.par_iter().find_map_first(|x| {
                    subsets.iter().find(|y| match_without(t, x, y).is_none()).map(|y| (x.clone(), y.clone()))
                });
                if let Some(ce) = bad {
                    let done: u128 = (0..s).map(|r| binomial(2 * t.m, r).pow(2)).sum();
                    return Ok(report(false, done as u64, Some(ce)));
                }
            }
            Ok(report(true, pairs as u64, None))
        }
        CertifyMode::Sampled { trials, seed } => {
            let mut rng = RngStream::root(seed, "rmbg-certify").rng();
            for i in 0..trials {
                let s = rng.gen_range(0..=t.m);
                let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let mut v: Vec<u32> =
                        index::sample(rng, t.flex_len(), s).into_iter().map(|l| l as u32).collect();
                    v.sort_unstable();
                    v
                };
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                if match_without(t, &x, &y).is_none() {
                    return Ok(report(false, i + 1, Some((x, y))));
                }
            }
            Ok(report(true, trials, None))
        }
    }
}

/// The degree-1 template pairing A-label i with B-label i. It is not
/// robustly matchable for any m: deleting a0 and b1 strands a1.
pub fn parallel_matching_template(m: usize) -> RmbgTemplate {
    let adj = (0..7 * m as u32).map(|a| vec![a]).collect();
    RmbgTemplate::from_adjacency(m, 1, adj).expect("identity matching is 1-regular")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        RngStream::root(seed, "rmbg-test").rng()
    }

    #[test]
    fn construction_is_regular() {
        let t = build_rmbg(2, 3, &mut rng(0)).unwrap();
        assert_eq!(t.side(), 14);
        assert!(t.adj.iter().all(|l| l.len() == 3));
        let mut deg = [0; 14];
        t.edges().iter().for_each(|&(_, b)| deg[b as usize] += 1);
        assert!(deg.iter().all(|&k| k == 3));
        assert_eq!(t.edge_count(), 42);
    }

    #[test]
    fn full_degree_is_complete() {
        let t = build_rmbg(1, 7, &mut rng(1)).unwrap();
        assert!(t.adj.iter().all(|l| l == &(0..7).collect::<Vec<u32>>()));
        let r = certify_robust_matchability(&t, CertifyMode::Exhaustive).unwrap();
        assert!(r.pass);
        assert_eq!(r.checked, admissible_pairs(1) as u64);
        let pairs = robust_match(&t, &[1], &[0]).unwrap().unwrap();
        assert_eq!(pairs.len(), 6);
        assert!(is_perfect_matching(&t, &[1], &[0], &pairs));
    }

    #[test]
    fn heavy_collisions_use_the_fallback() {
        // d = 7m - 1 makes wholesale resampling hopeless near the end.
        for seed in 0..5 {
            let t = build_rmbg(2, 13, &mut rng(seed)).unwrap();
            assert_eq!(t.d(), 13);
        }
    }

    #[test]
    fn empty_deletion_matches_everything() {
        let t = build_rmbg(3, 8, &mut rng(2)).unwrap();
        let pairs = robust_match(&t, &[], &[]).unwrap().unwrap();
        assert_eq!(pairs.len(), 21);
        assert!(is_perfect_matching(&t, &[], &[], &pairs));
    }

    #[test]
    fn deletion_input_errors() {
        let t = build_rmbg(2, 3, &mut rng(3)).unwrap();
        assert!(matches!(robust_match(&t, &[1], &[0, 2]), Err(RmbgError::DeletionSizes { .. })));
        assert!(matches!(robust_match(&t, &[0, 1, 2], &[0, 1, 2]), Err(RmbgError::DeletionSizes { .. })));
        assert_eq!(robust_match(&t, &[4], &[0]), Err(RmbgError::NotFlexible(4)));
        assert_eq!(robust_match(&t, &[1, 1], &[0, 2]), Err(RmbgError::NotFlexible(1)));
        assert!(build_rmbg(0, 1, &mut rng(0)).is_err());
        assert!(build_rmbg(1, 8, &mut rng(0)).is_err());
    }

    #[test]
    fn parallel_template_fails_with_witness() {
        let t = parallel_matching_template(2);
        assert_eq!(robust_match(&t, &[0], &[1]).unwrap(), None);
        let r = certify_robust_matchability(&t, CertifyMode::Exhaustive).unwrap();
        assert!(!r.pass);
        let (x, y) = r.counterexample.clone().unwrap();
        assert_eq!((x.as_slice(), y.as_slice()), (&[0u32][..], &[1u32][..]));
        assert_eq!(robust_match(&t, &x, &y).unwrap(), None);
        // Partner-closed deletions still match.
        assert!(robust_match(&t, &[0, 3], &[3, 0]).unwrap().is_some());
    }

    #[test]
    fn sampled_mode_is_deterministic() {
        let t = build_rmbg(2, 8, &mut rng(4)).unwrap();
        let mode = CertifyMode::Sampled { trials: 200, seed: 9 };
        let a = certify_robust_matchability(&t, mode).unwrap();
        assert_eq!(a, certify_robust_matchability(&t, mode).unwrap());
        let bad = certify_robust_matchability(&parallel_matching_template(2), mode).unwrap();
        assert!(!bad.pass);
        let (x, y) = bad.counterexample.unwrap();
        assert_eq!(robust_match(&parallel_matching_template(2), &x, &y).unwrap(), None);
    }

    #[test]
    fn exhaustive_budget() {
        assert_eq!(admissible_pairs(2), 1 + 16 + 36);
        let t = build_rmbg(9, 2, &mut rng(5)).unwrap();
        assert!(matches!(certify_robust_matchability(&t, CertifyMode::Exhaustive), Err(RmbgError::OverBudget { .. })));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = build_rmbg(2, 4, &mut rng(6)).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"a_flex\":[0,1,2,3]"));
        let back: RmbgTemplate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let broken = s.replacen("\"d\":4", "\"d\":3", 1);
        assert!(serde_json::from_str::<RmbgTemplate>(&broken).is_err());
    }
}
