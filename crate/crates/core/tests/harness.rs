//! Experiment-level checks against independent estimates.

use rainbow_hc::harness::{run_experiment, ExperimentConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

#[test]
fn success_grows_with_perturbation() {
    // C = 16 > n is skipped, leaving four cells.
    let cfg = config(
        r#"{"kind": "threshold",
            "grid": {"n": [8], "delta": [0.25], "C": [0, 2, 4, 8, 16], "q": [1],
                     "seed_kind": ["complete-bipartite-bidirected"]},
            "solver": {"kind": "exact"}, "trials": 500, "master_seed": 31}"#,
    );
    let rows = run_experiment(&cfg).unwrap().rows;
    assert_eq!(rows.iter().map(|r| r.c).collect::<Vec<_>>(), vec![0.0, 2.0, 4.0, 8.0]);
    assert_eq!(rows[0].successes, 0);
    for w in rows.windows(2) {
        assert!(
            w[0].proportion <= w[1].proportion + 2.0 * (w[0].half_width() + w[1].half_width()),
            "{} at C={} vs {} at C={}",
            w[0].proportion,
            w[0].c,
            w[1].proportion,
            w[1].c
        );
    }
    assert!(rows[3].proportion > rows[0].proportion);
}

/// Straight simulation of a uniformly coloured bidirected K_n (one colour
/// per unordered pair) with its own permutation search.
fn independent_estimate(n: usize, kappa: u32, trials: u64, seed: u64) -> f64 {
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    let mut colour = vec![vec![0u32; n]; n];
    for _ in 0..trials {
        for (i, j) in (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))) {
            let c = rng.gen_range(0..kappa);
            colour[i][j] = c;
            colour[j][i] = c;
        }
        let mut rest: Vec<usize> = (1..n).collect();
        let mut found = false;
        permute(&mut rest, 0, &mut |p| {
            let mut seen = 0u64;
            let mut prev = 0;
            for &v in p.iter().chain(std::iter::once(&0)) {
                let bit = 1u64 << colour[prev][v];
                if seen & bit != 0 {
                    return false;
                }
                seen |= bit;
                prev = v;
            }
            found = true;
            true
        });
        hits += found as u64;
    }
    hits as f64 / trials as f64
}

/// Recursive permutation walk; stops when `f` returns true.
fn permute(xs: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if k == xs.len() {
        return f(xs);
    }
    for i in k..xs.len() {
        xs.swap(k, i);
        if permute(xs, k + 1, f) {
            xs.swap(k, i);
            return true;
        }
        xs.swap(k, i);
    }
    false
}

#[test]
fn chain_start_matches_independent_simulation() {
    let trials = 10_000;
    let cfg = config(
        r#"{"kind": "coupling",
            "grid": {"n": [5], "delta": [1], "C": [3], "q": [1], "seed_kind": ["complete-bidirected"]},
            "solver": {"kind": "brute"}, "trials": 10000, "master_seed": 8, "chain_indices": [0]}"#,
    );
    let p_harness = run_experiment(&cfg).unwrap().rows[0].proportion;
    let p_indep = independent_estimate(5, 5, trials, 99);
    let var = |p: f64| p * (1.0 - p) / trials as f64;
    let sigma = (var(p_harness) + var(p_indep)).sqrt();
    assert!((p_harness - p_indep).abs() <= 3.0 * sigma, "{p_harness} vs {p_indep} (sigma {sigma})");
    // Sanity: a rainbow 5-cycle needs all five colours, so rare but present.
    assert!(p_indep > 0.0 && p_indep < 0.5);
}

#[test]
fn shuffled_grids_reorder_rows_not_numbers() {
    let mut ns = vec![5usize, 6, 7];
    let base = r#"{"kind": "threshold",
        "grid": {"n": NS, "delta": [1], "C": [0], "q": [1], "seed_kind": ["complete-bidirected"]},
        "solver": {"kind": "brute"}, "trials": 50, "master_seed": 2}"#;
    let run = |ns: &[usize]| {
        let list = format!("{ns:?}");
        run_experiment(&config(&base.replace("NS", &list))).unwrap().rows
    };
    let a = run(&ns);
    ns.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
    let b = run(&ns);
    for r in &a {
        let s = b.iter().find(|x| x.n == r.n).unwrap();
        assert_eq!(r.successes, s.successes, "cell seeds depend only on the cell");
    }
}
