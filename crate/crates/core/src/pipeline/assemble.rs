//! Leftover absorption and full Hamilton cycle assembly.

use std::collections::HashSet;
use std::time::Instant;

use fixedbitset::FixedBitSet;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{
    build_absorbing_structure, build_flexible_sets, flexible_connect, input, AbsorbingStructure, DeletionWitness,
    FlexibleSets, PipelineError, PipelineFailure, PipelineParams, Stage,
};
use crate::graph::{
    concat_paths, verify_rainbow_hamilton_cycle, verify_rainbow_path_contract, Colour, ColouredDigraph,
    DirectedPath, Vertex,
};
use crate::rmbg::{robust_match, RobustnessReport};
use crate::rng::RngStream;
use crate::search::rainbow_dfs_path_within;

/// Flexible vertices (and colours) one length-7 connector consumes.
const HOP_FLEX: usize = 6;

fn fail(stage: Stage, detail: impl Into<String>) -> PipelineError {
    PipelineFailure::new(stage, detail).into()
}

fn flex_label(sorted: &[u32], x: u32) -> u32 {
    sorted.binary_search(&x).expect("consumed element is flexible") as u32
}

/// Rainbow path from `x` to `y` spanning exactly the structure plus
/// `v_left`, and using exactly the structure colours plus `c_left`.
///
/// `x` is joined to w through the flexible set, every other leftover
/// vertex is chained after w' by one length-7 hop carrying one leftover
/// colour, and a robust matching of the untouched flexible labels decides
/// which absorbers take their absorbing path.
pub fn absorb_leftover(
    d: &ColouredDigraph,
    s: &AbsorbingStructure,
    flex: &FlexibleSets,
    v_left: &[Vertex],
    c_left: &[Colour],
    x: Vertex,
    y: Vertex,
) -> Result<DirectedPath, PipelineError> {
    let (n, kappa) = (d.n(), d.kappa());
    if v_left.len() != c_left.len() || v_left.len() < 2 {
        return Err(input(format!(
            "leftover needs 2 <= |V| = |C|, got {} vertices and {} colours",
            v_left.len(),
            c_left.len()
        )));
    }
    if x == y || !v_left.contains(&x) || !v_left.contains(&y) {
        return Err(input("x and y must be distinct leftover vertices"));
    }
    let sv = s.vertex_set(n);
    let sc = s.colour_set(d);
    let mut lv: Vec<Vertex> = v_left.to_vec();
    let mut lc: Vec<Colour> = c_left.to_vec();
    lv.sort_unstable();
    lc.sort_unstable();
    if lv.windows(2).any(|w| w[0] == w[1]) || lc.windows(2).any(|w| w[0] == w[1]) {
        return Err(input("leftover sets repeat elements"));
    }
    if lv.iter().any(|&v| v as usize >= n || sv.contains(v as usize)) {
        return Err(input("leftover vertices must lie outside the structure"));
    }
    if lc.iter().any(|&c| c as usize >= kappa || sc.contains(c as usize)) {
        return Err(input("leftover colours must lie outside the structure"));
    }
    let hops = lv.len();
    if HOP_FLEX * hops > flex.m {
        return Err(fail(
            Stage::LeftoverConnect,
            format!("{hops} connectors would consume {} flexible labels, the template tolerates {}", HOP_FLEX * hops, flex.m),
        ));
    }

    let mut used_v = FixedBitSet::with_capacity(n);
    let mut used_c = FixedBitSet::with_capacity(kappa);
    let consume = |p: &DirectedPath, used_v: &mut FixedBitSet, used_c: &mut FixedBitSet| {
        p.interior().iter().for_each(|&w| used_v.insert(w as usize));
        for c in p.colours(d).expect("connector edges exist") {
            used_c.insert(c as usize);
        }
    };

    let c0 = lc[0];
    let q1 = flexible_connect(d, flex, x, s.w(), c0, &used_v, &used_c)?
        .ok_or_else(|| fail(Stage::LeftoverConnect, format!("no flexible connector {x} -> w = {} with colour {c0}", s.w())))?;
    consume(&q1, &mut used_v, &mut used_c);

    let mut stops = vec![s.w_prime()];
    stops.extend(lv.iter().copied().filter(|&v| v != x && v != y));
    stops.push(y);
    let mut q2 = Vec::with_capacity(hops - 1);
    for (i, (w, &ci)) in stops.windows(2).zip(&lc[1..]).enumerate() {
        let p = flexible_connect(d, flex, w[0], w[1], ci, &used_v, &used_c)?.ok_or_else(|| {
            fail(Stage::LeftoverConnect, format!("no flexible connector {} -> {} with colour {ci} (hop {})", w[0], w[1], i + 1))
        })?;
        consume(&p, &mut used_v, &mut used_c);
        q2.push(p);
    }

    let fx: Vec<u32> = used_v.ones().map(|v| flex_label(&flex.vertices, v as u32)).collect();
    let fy: Vec<u32> =
        used_c.ones().filter(|&c| !lc.contains(&(c as u32))).map(|c| flex_label(&flex.colours, c as u32)).collect();
    let matching = robust_match(&s.template, &fx, &fy)
        .map_err(|e| fail(Stage::RobustMatch, e.to_string()))?
        .ok_or_else(|| {
            PipelineError::Failure(PipelineFailure {
                stage: Stage::RobustMatch,
                detail: "no perfect matching after deleting the consumed flexible labels".into(),
                witness: Some(DeletionWitness { x: fx.clone(), y: fy.clone() }),
            })
        })?;
    let chosen: HashSet<(u32, u32)> = matching.into_iter().collect();
    let absorb: Vec<bool> = s.edges.iter().map(|e| chosen.contains(e)).collect();
    let q_abs = s.switched_path(&absorb).map_err(|e| fail(Stage::FinalVerify, e.to_string()))?;

    let q = concat_paths(std::iter::once(&q1).chain(std::iter::once(&q_abs)).chain(&q2))
        .map_err(|e| fail(Stage::FinalVerify, format!("pieces do not join: {e}")))?;
    let mut v_req = sv;
    lv.iter().for_each(|&v| v_req.insert(v as usize));
    let mut c_req = sc;
    lc.iter().for_each(|&c| c_req.insert(c as usize));
    let verdict = verify_rainbow_path_contract(d, &q, x, y, &v_req, &c_req);
    if !verdict.accepted {
        return Err(fail(Stage::FinalVerify, format!("leftover path rejected: {:?}", verdict.violation)));
    }
    Ok(q)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub flexible_ms: f64,
    pub structure_ms: f64,
    pub dfs_ms: f64,
    pub leftover_ms: f64,
}

/// A verified rainbow Hamilton cycle with what it took to build it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assembly {
    pub cycle: Vec<Vertex>,
    pub m: usize,
    pub d: usize,
    pub k: usize,
    /// Leftover vertices absorbed, path endpoints included.
    pub leftover: usize,
    pub certification: RobustnessReport,
    pub timings: StageTimings,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Full pipeline on a fully coloured digraph with kappa = n. Each stage
/// draws from its own child of `stream`, so a rerun reproduces the same
/// cycle or the same failure.
pub fn assemble_hamilton_cycle(
    d: &ColouredDigraph,
    params: &PipelineParams,
    stream: &RngStream,
) -> Result<Assembly, PipelineError> {
    let n = d.n();
    if d.kappa() != n {
        return Err(input(format!("a rainbow Hamilton cycle needs kappa = n, got kappa = {} and n = {n}", d.kappa())));
    }
    if !d.is_fully_coloured() {
        return Err(input("digraph has uncoloured edges"));
    }
    params.validate(n)?;
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let flex = build_flexible_sets(d, params.mu, params.flex_retries, &mut stream.named("flexible").rng())?;
    timings.flexible_ms = ms(t);

    let t = Instant::now();
    let s = build_absorbing_structure(d, &flex, params, &mut stream.named("structure").rng())?;
    timings.structure_ms = ms(t);
    let sv = s.vertex_set(n);
    let sc = s.colour_set(d);
    if sc.count_ones(..) + 1 != sv.count_ones(..) {
        return Err(fail(Stage::AbsorbingStructure, "structure colour count is not its vertex count minus one"));
    }

    let t = Instant::now();
    let k = params.k_for(n);
    let outside: Vec<Vertex> = (0..n as Vertex).filter(|&v| !sv.contains(v as usize)).collect();
    if outside.len() < k + 2 {
        return Err(fail(Stage::DfsPath, format!("only {} vertices outside the structure for k = {k}", outside.len())));
    }
    let mut v2 = FixedBitSet::with_capacity(n);
    outside.iter().for_each(|&v| v2.insert(v as usize));
    for i in index::sample(&mut stream.named("reserve").rng(), outside.len(), k) {
        v2.set(outside[i] as usize, false);
    }
    let mut c2 = FixedBitSet::with_capacity(n);
    c2.insert_range(..);
    c2.difference_with(&sc);
    let p2 = rainbow_dfs_path_within(d, &v2, &c2).map_err(|e| fail(Stage::DfsPath, e.to_string()))?;
    if p2.vertices().len() < 2 {
        return Err(fail(Stage::DfsPath, "rainbow path has no edges"));
    }
    timings.dfs_ms = ms(t);

    let t = Instant::now();
    let (x, y) = (p2.last().unwrap(), p2.first().unwrap());
    let on_p2: HashSet<Vertex> = p2.vertices().iter().copied().collect();
    let v_left: Vec<Vertex> = outside.iter().copied().filter(|v| !on_p2.contains(v) || *v == x || *v == y).collect();
    let mut p2_colours = FixedBitSet::with_capacity(n);
    p2.colours(d).expect("path edges exist").iter().for_each(|&c| p2_colours.insert(c as usize));
    let c_left: Vec<Colour> = c2.ones().filter(|&c| !p2_colours.contains(c)).map(|c| c as Colour).collect();
    if c_left.len() != v_left.len() {
        return Err(fail(
            Stage::FinalVerify,
            format!("accounting: {} leftover colours for {} leftover vertices", c_left.len(), v_left.len()),
        ));
    }
    let q = absorb_leftover(d, &s, &flex, &v_left, &c_left, x, y)?;
    timings.leftover_ms = ms(t);

    let mut cycle = p2.into_vertices();
    cycle.extend_from_slice(q.interior());
    let verdict = verify_rainbow_hamilton_cycle(d, &cycle);
    if !verdict.accepted {
        return Err(fail(Stage::FinalVerify, format!("cycle rejected: {:?}", verdict.violation)));
    }
    Ok(Assembly {
        cycle,
        m: flex.m,
        d: params.d,
        k,
        leftover: v_left.len(),
        certification: s.certification.clone(),
        timings,
    })
}
