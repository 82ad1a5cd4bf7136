//! Property tests for invariants that should hold on every input.

use proptest::prelude::*;
use rainbow_hc::absorber::{
    exchange_deltas, gadget_edges, verify_absorber, Absorber, AbsorberRoles, GadgetColours,
};
use rainbow_hc::graph::{
    is_rainbow, read_graph, verify_rainbow_hamilton_cycle, write_graph, ColouredDigraph, DigraphBuilder,
};
use rainbow_hc::harness::{wilson_interval, Z95};
use rainbow_hc::rmbg::{build_rmbg, is_perfect_matching, robust_match};
use rainbow_hc::search::{brute_force_rainbow_hc, exact_rainbow_hc, rainbow_dfs_path};
use rainbow_hc::RngStream;

/// Random coloured digraph: n vertices, kappa colours, edge density in
/// percent, everything derived from one seed.
fn digraph(n: usize, kappa: usize, density: u32, seed: u64) -> ColouredDigraph {
    use rand::Rng;
    let mut rng = RngStream::root(seed, "prop-digraph").rng();
    let mut b = DigraphBuilder::new(n, kappa).unwrap();
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if u != v && rng.gen_range(0..100) < density {
                b.add_edge(u, v, rng.gen_range(0..kappa as u32)).unwrap();
            }
        }
    }
    b.build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_files_round_trip(n in 1usize..12, kappa in 1usize..10, density in 0u32..100, seed: u64) {
        let d = digraph(n, kappa, density, seed);
        let back = read_graph(&write_graph(&d)).unwrap();
        prop_assert_eq!(back.n(), d.n());
        prop_assert_eq!(back.kappa(), d.kappa());
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), d.edges().collect::<Vec<_>>());
    }

    #[test]
    fn dfs_paths_are_rainbow_paths(n in 1usize..25, kappa in 1usize..30, density in 0u32..100, seed: u64) {
        let d = digraph(n, kappa, density, seed);
        let p = rainbow_dfs_path(&d).unwrap();
        prop_assert!(!p.vertices().is_empty());
        prop_assert!(is_rainbow(&d, p.edges()).unwrap());
    }

    #[test]
    fn exact_agrees_with_brute_force(n in 2usize..8, extra in 0usize..3, density in 20u32..100, seed: u64) {
        let d = digraph(n, n + extra, density, seed);
        let exact = exact_rainbow_hc(&d, None).unwrap();
        let brute = brute_force_rainbow_hc(&d).unwrap();
        prop_assert_eq!(exact.found(), brute.found());
        if let Some(c) = &exact.cycle {
            prop_assert!(verify_rainbow_hamilton_cycle(&d, c).accepted);
        }
    }

    #[test]
    fn planting_a_fresh_rainbow_cycle_makes_it_found(n in 3usize..9, density in 0u32..60, seed: u64) {
        use rand::seq::SliceRandom;
        let d = digraph(n, n, density, seed);
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut RngStream::root(seed, "prop-cycle").rng());
        let mut b = DigraphBuilder::from_digraph(&d.recoloured(2 * n, |e| e.colour).unwrap());
        for i in 0..n {
            b.upsert_edge(order[i], order[(i + 1) % n], (n + i) as u32).unwrap();
        }
        let d = b.build().unwrap();
        prop_assert!(exact_rainbow_hc(&d, None).unwrap().found());
    }

    #[test]
    fn planted_gadgets_verify_and_exchange(seed: u64, n in 13usize..40) {
        let mut rng = RngStream::root(seed, "prop-gadget").rng();
        let r: Vec<u32> = rand::seq::index::sample(&mut rng, n, 13).into_iter().map(|x| x as u32).collect();
        let roles = AbsorberRoles {
            v: r[0], v1: r[1], v2: r[2], x: r[3], y: r[4], z: r[5], u: r[6],
            w1: r[7], w2: r[8], p1a: r[9], p1b: r[10], p2a: r[11], p2b: r[12],
        };
        let cs: Vec<u32> = rand::seq::index::sample(&mut rng, n, 12).into_iter().map(|x| x as u32).collect();
        let g = GadgetColours {
            c: cs[0], a: cs[1], b: cs[2], d: cs[3], e: cs[4], f: cs[5],
            p1: [cs[6], cs[7], cs[8]], p2: [cs[9], cs[10], cs[11]],
        };
        let mut b = DigraphBuilder::new(n, n).unwrap();
        for (u, v, c) in gadget_edges(&roles, &g) {
            b.add_edge(u, v, c).unwrap();
        }
        let d = b.build().unwrap();
        let a = Absorber::from_roles(&d, g.c, roles).unwrap();
        prop_assert!(verify_absorber(&d, &a).accepted);
        prop_assert_eq!(exchange_deltas(&d, &a), Some((vec![roles.v], vec![g.c])));

        // Recolouring x->y breaks the required pattern.
        let broken = d.recoloured(n, |e| if (e.tail, e.head) == (roles.x, roles.y) { g.f } else { e.colour }).unwrap();
        let mut a2 = a.clone();
        a2.edge_colours[3] = g.f;
        prop_assert!(!verify_absorber(&broken, &a2).accepted);
    }

    #[test]
    fn templates_are_regular_and_matchings_perfect(m in 1usize..4, d in 1usize..6, seed: u64, xs in 0u32..64, ys in 0u32..64) {
        let d = d.min(7 * m);
        let t = build_rmbg(m, d, &mut RngStream::root(seed, "prop-rmbg").rng()).unwrap();
        let side = t.side();
        let mut right = vec![0usize; side];
        for a in 0..side as u32 {
            prop_assert_eq!(t.neighbours(a).len(), d);
            t.neighbours(a).iter().for_each(|&b| right[b as usize] += 1);
        }
        prop_assert!(right.iter().all(|&k| k == d));

        // Equal-size deletions from the flexible prefixes.
        let flex = t.flex_len() as u32;
        let mut x: Vec<u32> = (0..flex).filter(|i| xs >> i & 1 == 1).collect();
        let mut y: Vec<u32> = (0..flex).filter(|i| ys >> i & 1 == 1).collect();
        let s = x.len().min(y.len()).min(m);
        x.truncate(s);
        y.truncate(s);
        if let Some(pm) = robust_match(&t, &x, &y).unwrap() {
            prop_assert!(is_perfect_matching(&t, &x, &y, &pm));
            prop_assert_eq!(pm.len(), side - s);
        }
    }

    #[test]
    fn wilson_brackets_the_estimate(trials in 1u64..5000, frac in 0.0f64..=1.0) {
        let successes = ((trials as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(successes, trials, Z95);
        let p = successes as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12);
        prop_assert!(p <= hi + 1e-12 && hi <= 1.0);
        prop_assert!(hi - lo <= 2.0 * Z95 / (trials as f64).sqrt() + 1e-12);
    }
}
