//! Colour spread between disjoint vertex sets: does every pair of disjoint
//! k-sets X, Y see at least `t` distinct colours on the edges from X to Y?

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{require_coloured, SearchError};
use crate::graph::{ColouredDigraph, Vertex};

/// Default cap on C(n,k) * C(n-k,k) for exhaustive checks.
pub const SPREAD_EXHAUSTIVE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadMode {
    Exhaustive,
    Sampled { trials: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadReport {
    pub ok: bool,
    pub mode: SpreadMode,
    /// A pair `(X, Y)` with fewer than `t` colours, when one was found.
    pub witness: Option<(Vec<Vertex>, Vec<Vertex>)>,
    /// Sampled mode only: one-sided 95% upper bound on the fraction of
    /// failing pairs, given that none of the samples failed.
    pub failure_rate_upper_95: Option<f64>,
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn check_k(d: &ColouredDigraph, k: usize) -> Result<(), SearchError> {
    if k == 0 || 2 * k > d.n() {
        return Err(SearchError::KTooLarge { k, n: d.n() });
    }
    Ok(())
}

/// Advances `comb` to the next k-combination of `0..n` in lexicographic
/// order.
fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Looks for k of the candidate sets whose union has fewer than `t`
/// elements. `sets` are sorted, deduplicated colour lists.
struct UnionSearch<'a> {
    sets: &'a [(Vertex, Vec<u32>)],
    counts: Vec<u32>,
    distinct: usize,
    chosen: Vec<usize>,
    k: usize,
    t: usize,
}

impl UnionSearch<'_> {
    fn add(&mut self, i: usize) {
        for &c in &self.sets[i].1 {
            let slot = &mut self.counts[c as usize];
            if *slot == 0 {
                self.distinct += 1;
            }
            *slot += 1;
        }
    }

    fn remove(&mut self, i: usize) {
        for &c in &self.sets[i].1 {
            let slot = &mut self.counts[c as usize];
            *slot -= 1;
            if *slot == 0 {
                self.distinct -= 1;
            }
        }
    }

    fn search(&mut self, from: usize) -> bool {
        if self.distinct >= self.t {
            return false;
        }
        if self.chosen.len() == self.k {
            return true;
        }
        let need = self.k - self.chosen.len();
        for i in from..=self.sets.len() - need {
            self.add(i);
            self.chosen.push(i);
            if self.search(i + 1) {
                return true;
            }
            self.chosen.pop();
            self.remove(i);
        }
        false
    }
}

/// Exhaustive check with an explicit cap on the number of `(X, Y)` pairs.
pub fn colour_spread_exhaustive(
    d: &ColouredDigraph,
    k: usize,
    t: usize,
    limit: u128,
) -> Result<SpreadReport, SearchError> {
    require_coloured(d)?;
    check_k(d, k)?;
    let n = d.n();
    let pairs = binomial(n, k) * binomial(n - k, k);
    if pairs > limit {
        return Err(SearchError::OverBudget { pairs, limit });
    }
    let report = |witness: Option<(Vec<Vertex>, Vec<Vertex>)>| SpreadReport {
        ok: witness.is_none(),
        mode: SpreadMode::Exhaustive,
        witness,
        failure_rate_upper_95: None,
    };

    let mut in_x = vec![false; n];
    let mut x: Vec<usize> = (0..k).collect();
    let mut occurrences = vec![0u32; d.kappa()];
    loop {
        x.iter().for_each(|&v| in_x[v] = true);
        // Colour set contributed by each candidate y.
        let mut sets: Vec<(Vertex, Vec<u32>)> = (0..n as Vertex)
            .filter(|&y| !in_x[y as usize])
            .map(|y| {
                let mut cs: Vec<u32> = d
                    .in_arcs(y)
                    .iter()
                    .filter(|a| in_x[a.vertex as usize])
                    .map(|a| a.colour)
                    .collect();
                cs.sort_unstable();
                cs.dedup();
                (y, cs)
            })
            .collect();
        sets.sort_by_key(|(y, cs)| (cs.len(), *y));

        let smallest: usize = sets[..k].iter().map(|(_, cs)| cs.len()).sum();
        let witness_for = |ys: Vec<Vertex>, x: &[usize]| {
            let mut ys = ys;
            ys.sort_unstable();
            Some((x.iter().map(|&v| v as Vertex).collect(), ys))
        };
        if smallest < t {
            return Ok(report(witness_for(sets[..k].iter().map(|s| s.0).collect(), &x)));
        }
        let total: usize = sets.iter().map(|(_, cs)| cs.len()).sum();
        let mut distinct = 0;
        for (_, cs) in &sets {
            for &c in cs {
                if occurrences[c as usize] == 0 {
                    distinct += 1;
                }
                occurrences[c as usize] += 1;
            }
        }
        for (_, cs) in &sets {
            for &c in cs {
                occurrences[c as usize] = 0;
            }
        }
        // Pairwise disjoint sets: every union is a plain sum, and the
        // smallest sum already reaches t.
        if distinct != total {
            let mut s = UnionSearch {
                sets: &sets,
                counts: vec![0; d.kappa()],
                distinct: 0,
                chosen: Vec::with_capacity(k),
                k,
                t,
            };
            if s.search(0) {
                let ys = s.chosen.iter().map(|&i| sets[i].0).collect();
                return Ok(report(witness_for(ys, &x)));
            }
        }

        x.iter().for_each(|&v| in_x[v] = false);
        if !next_combination(&mut x, n) {
            return Ok(report(None));
        }
    }
}

/// Random disjoint pairs; passing is one-sided evidence only.
pub fn colour_spread_sampled<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    k: usize,
    t: usize,
    trials: usize,
    rng: &mut R,
) -> Result<SpreadReport, SearchError> {
    require_coloured(d)?;
    check_k(d, k)?;
    let n = d.n();
    let mut side = vec![0u8; n];
    let mut seen = vec![false; d.kappa()];
    for _ in 0..trials {
        let picked = index::sample(rng, n, 2 * k).into_vec();
        let (xs, ys) = picked.split_at(k);
        xs.iter().for_each(|&v| side[v] = 1);
        ys.iter().for_each(|&v| side[v] = 2);
        let mut colours = Vec::new();
        for &y in ys {
            for a in d.in_arcs(y as Vertex) {
                if side[a.vertex as usize] == 1 && !seen[a.colour as usize] {
                    seen[a.colour as usize] = true;
                    colours.push(a.colour);
                }
            }
        }
        colours.iter().for_each(|&c| seen[c as usize] = false);
        picked.iter().for_each(|&v| side[v] = 0);
        if colours.len() < t {
            let mut xw: Vec<Vertex> = xs.iter().map(|&v| v as Vertex).collect();
            let mut yw: Vec<Vertex> = ys.iter().map(|&v| v as Vertex).collect();
            xw.sort_unstable();
            yw.sort_unstable();
            return Ok(SpreadReport {
                ok: false,
                mode: SpreadMode::Sampled { trials },
                witness: Some((xw, yw)),
                failure_rate_upper_95: None,
            });
        }
    }
    let bound = if trials == 0 { 1.0 } else { 1.0 - 0.05f64.powf(1.0 / trials as f64) };
    Ok(SpreadReport {
        ok: true,
        mode: SpreadMode::Sampled { trials },
        witness: None,
        failure_rate_upper_95: Some(bound),
    })
}

/// Dispatches on `mode`; exhaustive mode uses [`SPREAD_EXHAUSTIVE_LIMIT`].
pub fn colour_spread_ok<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    k: usize,
    t: usize,
    mode: SpreadMode,
    rng: &mut R,
) -> Result<SpreadReport, SearchError> {
    match mode {
        SpreadMode::Exhaustive => colour_spread_exhaustive(d, k, t, SPREAD_EXHAUSTIVE_LIMIT),
        SpreadMode::Sampled { trials } => colour_spread_sampled(d, k, t, trials, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete_bidirected;
    use crate::rng::RngStream;
    use rand::Rng;

    fn distinct_colours(n: usize) -> ColouredDigraph {
        let d = complete_bidirected(n, n * (n - 1)).unwrap();
        let mut next = 0;
        d.recoloured(n * (n - 1), |_| {
            next += 1;
            next - 1
        })
        .unwrap()
    }

    /// Direct definition: every disjoint (X, Y), count colours of X->Y edges.
    fn naive(d: &ColouredDigraph, k: usize, t: usize) -> bool {
        let n = d.n();
        let mut x: Vec<usize> = (0..k).collect();
        loop {
            let rest: Vec<usize> = (0..n).filter(|v| !x.contains(v)).collect();
            let mut yi: Vec<usize> = (0..k).collect();
            loop {
                let mut cs: Vec<u32> = Vec::new();
                for &a in &x {
                    for &bi in &yi {
                        if let Some(c) = d.colour(a as u32, rest[bi] as u32) {
                            cs.push(c);
                        }
                    }
                }
                cs.sort_unstable();
                cs.dedup();
                if cs.len() < t {
                    return false;
                }
                if !next_combination(&mut yi, rest.len()) {
                    break;
                }
            }
            if !next_combination(&mut x, n) {
                return true;
            }
        }
    }

    #[test]
    fn monochromatic_fails() {
        let d = complete_bidirected(8, 1).unwrap().recoloured(1, |_| 0).unwrap();
        let r = colour_spread_exhaustive(&d, 2, 8, SPREAD_EXHAUSTIVE_LIMIT).unwrap();
        assert!(!r.ok);
        assert!(r.witness.is_some());
    }

    #[test]
    fn too_few_edges_fails() {
        let r = colour_spread_exhaustive(&distinct_colours(10), 3, 10, SPREAD_EXHAUSTIVE_LIMIT).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn distinct_colours_n25_k5_passes() {
        let d = distinct_colours(25);
        assert!(matches!(
            colour_spread_exhaustive(&d, 5, 25, SPREAD_EXHAUSTIVE_LIMIT),
            Err(SearchError::OverBudget { .. })
        ));
        let r = colour_spread_exhaustive(&d, 5, 25, u128::MAX).unwrap();
        assert!(r.ok);
    }

    #[test]
    fn agrees_with_naive_definition() {
        for seed in 0..40u64 {
            let mut rng = RngStream::root(seed, "spread").rng();
            let n = rng.gen_range(4..=8);
            let kappa = rng.gen_range(2..=12);
            let base = complete_bidirected(n, kappa).unwrap();
            let mut keep = crate::graph::DigraphBuilder::new(n, kappa).unwrap();
            for e in base.edges() {
                if rng.gen_bool(0.6) {
                    keep.add_edge(e.tail, e.head, rng.gen_range(0..kappa as u32)).unwrap();
                }
            }
            let d = keep.build().unwrap();
            let k = rng.gen_range(1..=n / 2);
            let t = rng.gen_range(1..=k * k);
            let fast = colour_spread_exhaustive(&d, k, t, u128::MAX).unwrap();
            assert_eq!(fast.ok, naive(&d, k, t), "seed {seed}");
            if let Some((xs, ys)) = fast.witness {
                let mut cs: Vec<u32> = Vec::new();
                for &a in &xs {
                    cs.extend(ys.iter().filter_map(|&b| d.colour(a, b)));
                }
                cs.sort_unstable();
                cs.dedup();
                assert!(cs.len() < t);
            }
        }
    }

    #[test]
    fn sampled_mode() {
        let mut rng = RngStream::root(1, "sampled").rng();
        let d = distinct_colours(12);
        let r = colour_spread_sampled(&d, 3, 9, 200, &mut rng).unwrap();
        assert!(r.ok);
        assert!(r.failure_rate_upper_95.unwrap() < 0.02);
        let r = colour_spread_sampled(&d, 3, 10, 5, &mut rng).unwrap();
        assert!(!r.ok);
        assert!(matches!(colour_spread_sampled(&d, 7, 1, 1, &mut rng), Err(SearchError::KTooLarge { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(25, 5), 53_130);
        assert_eq!(binomial(20, 5), 15_504);
        assert_eq!(binomial(3, 5), 0);
    }
}
