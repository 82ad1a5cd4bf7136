//! Absorbers wired along the edges of a robustly matchable template.

use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{input, FlexibleSets, PipelineError, PipelineFailure, PipelineParams, Stage};
use crate::absorber::{absorbing_path, avoiding_path, find_absorber, verify_absorber, Absorber};
use crate::graph::{
    bitset_of, concat_paths, is_rainbow, verify_rainbow_path_contract, Colour, ColouredDigraph, DirectedPath,
    PathError, Vertex, Verdict, Violation,
};
use crate::matching::{in_set, rainbow_path_family};
use crate::rmbg::{
    admissible_pairs, build_rmbg, certify_robust_matchability, CertifyMode, RmbgTemplate, RobustnessReport,
    CERTIFY_EXHAUSTIVE_LIMIT,
};

/// Fresh vertices and colours a structure of scale `m` and degree `d`
/// consumes beyond the 7m template labels on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureCapacity {
    pub absorbers: usize,
    pub vertices: usize,
    pub colours: usize,
}

/// Each absorber has 12 internal vertices and 11 internal colours; each
/// connector after the first adds 2 vertices and 3 colours.
pub fn structure_capacity(m: usize, d: usize) -> StructureCapacity {
    let e = 7 * m * d;
    let links = e.saturating_sub(1);
    StructureCapacity { absorbers: e, vertices: 7 * m + 12 * e + 2 * links, colours: 7 * m + 11 * e + 3 * links }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingStructure {
    pub template: RmbgTemplate,
    /// Vertex of each A-label: flexible vertices first, then buffers.
    pub a_labels: Vec<Vertex>,
    /// Colour of each B-label, laid out the same way.
    pub b_labels: Vec<Colour>,
    /// Template edges in chaining order.
    pub edges: Vec<(u32, u32)>,
    pub absorbers: Vec<Absorber>,
    /// `connectors[i]` runs from the last vertex of absorber i-1 to the
    /// first vertex of absorber i; `connectors[0]` is trivial.
    pub connectors: Vec<DirectedPath>,
    pub certification: RobustnessReport,
}

impl AbsorbingStructure {
    pub fn w(&self) -> Vertex {
        self.absorbers[0].first()
    }

    pub fn w_prime(&self) -> Vertex {
        self.absorbers.last().expect("structures are non-empty").last()
    }

    /// All vertices the structure spans, template labels included.
    pub fn vertex_set(&self, n: usize) -> FixedBitSet {
        let mut s = bitset_of(n, self.a_labels.iter().copied());
        for a in &self.absorbers {
            a.internal_vertices().iter().for_each(|&x| s.insert(x as usize));
        }
        for p in &self.connectors {
            p.interior().iter().for_each(|&x| s.insert(x as usize));
        }
        s
    }

    pub fn colour_set(&self, d: &ColouredDigraph) -> FixedBitSet {
        let mut s = bitset_of(d.kappa(), self.b_labels.iter().copied());
        for a in &self.absorbers {
            a.internal_colours().iter().for_each(|&c| s.insert(c as usize));
        }
        for p in &self.connectors {
            for c in p.colours(d).expect("connector edges exist") {
                s.insert(c as usize);
            }
        }
        s
    }

    /// Path w -> w' taking the absorbing path of absorber i when
    /// `absorb[i]` holds and the avoiding path otherwise.
    pub fn switched_path(&self, absorb: &[bool]) -> Result<DirectedPath, PathError> {
        let mut parts = Vec::with_capacity(2 * self.absorbers.len());
        for (i, a) in self.absorbers.iter().enumerate() {
            parts.push(self.connectors[i].clone());
            let p = if absorb.get(i).copied().unwrap_or(false) { absorbing_path(a) } else { avoiding_path(a) };
            parts.push(p.ok_or(PathError::RepeatedVertex(a.v))?);
        }
        concat_paths(&parts)
    }

    /// Switches on the template edges in `matching` and checks that the
    /// result is a rainbow path w -> w' spanning exactly the structure minus
    /// the unmatched template labels.
    pub fn check_switch(&self, d: &ColouredDigraph, matching: &[(u32, u32)]) -> Verdict {
        let side = self.template.side();
        let (mut hit_a, mut hit_b) = (vec![false; side], vec![false; side]);
        for &(a, b) in matching {
            if std::mem::replace(&mut hit_a[a as usize], true) {
                return Verdict::reject(Violation::RepeatedVertex { vertex: self.a_labels[a as usize] });
            }
            if std::mem::replace(&mut hit_b[b as usize], true) {
                return Verdict::reject(Violation::ColourRepeat { colour: self.b_labels[b as usize] });
            }
        }
        let absorb: Vec<bool> = self.edges.iter().map(|e| matching.contains(e)).collect();
        let Ok(path) = self.switched_path(&absorb) else {
            return Verdict::reject(Violation::WrongEndpoints { first: None, last: None });
        };
        let mut v_req = self.vertex_set(d.n());
        let mut c_req = self.colour_set(d);
        for (l, &hit) in hit_a.iter().enumerate() {
            if !hit {
                v_req.set(self.a_labels[l] as usize, false);
            }
        }
        for (l, &hit) in hit_b.iter().enumerate() {
            if !hit {
                c_req.set(self.b_labels[l] as usize, false);
            }
        }
        verify_rainbow_path_contract(d, &path, self.w(), self.w_prime(), &v_req, &c_req)
    }

    /// Structural invariants: every absorber verifies and sits on its
    /// template edge, internals are pairwise disjoint and avoid the labels,
    /// connectors chain the absorbers, and the colour count is one less
    /// than the vertex count.
    pub fn validate(&self, d: &ColouredDigraph) -> Result<(), String> {
        let side = self.template.side();
        if self.a_labels.len() != side || self.b_labels.len() != side {
            return Err("label maps have the wrong size".into());
        }
        if self.edges.len() != self.template.edge_count()
            || self.absorbers.len() != self.edges.len()
            || self.connectors.len() != self.edges.len()
        {
            return Err("edge, absorber and connector counts differ".into());
        }
        let mut seen_v = bitset_of(d.n(), self.a_labels.iter().copied());
        let mut seen_c = bitset_of(d.kappa(), self.b_labels.iter().copied());
        if seen_v.count_ones(..) != side || seen_c.count_ones(..) != side {
            return Err("template labels repeat".into());
        }
        let mut claim_v = |x: Vertex, what: &str| {
            if seen_v.put(x as usize) {
                Err(format!("vertex {x} reused by {what}"))
            } else {
                Ok(())
            }
        };
        for (i, (&(la, lb), a)) in self.edges.iter().zip(&self.absorbers).enumerate() {
            if !self.template.has_edge(la, lb) {
                return Err(format!("edge {i} is not a template edge"));
            }
            if a.v != self.a_labels[la as usize] || a.c != self.b_labels[lb as usize] {
                return Err(format!("absorber {i} does not sit on its template edge"));
            }
            let verdict = verify_absorber(d, a);
            if !verdict.accepted {
                return Err(format!("absorber {i} rejected: {:?}", verdict.violation));
            }
            for &x in &a.internal_vertices() {
                claim_v(x, "an absorber")?;
            }
            let p = &self.connectors[i];
            if i == 0 {
                if p.vertices().len() != 1 || p.first() != Some(a.first()) {
                    return Err("first connector must be trivial".into());
                }
            } else {
                if p.len() != 3 || p.first() != Some(self.absorbers[i - 1].last()) || p.last() != Some(a.first()) {
                    return Err(format!("connector {i} does not chain absorbers {} and {i}", i - 1));
                }
                if !is_rainbow(d, p.edges()).map_err(|e| e.to_string())? {
                    return Err(format!("connector {i} is not rainbow"));
                }
                for &x in p.interior() {
                    claim_v(x, "a connector")?;
                }
            }
        }
        let mut taken = |c: Colour, what: &str| {
            if seen_c.put(c as usize) {
                Err(format!("colour {c} reused by {what}"))
            } else {
                Ok(())
            }
        };
        for (a, p) in self.absorbers.iter().zip(&self.connectors) {
            for c in a.internal_colours() {
                taken(c, "an absorber")?;
            }
            for c in p.colours(d).map_err(|e| e.to_string())? {
                taken(c, "a connector")?;
            }
        }
        let (nv, nc) = (self.vertex_set(d.n()).count_ones(..), self.colour_set(d).count_ones(..));
        if nc + 1 != nv {
            return Err(format!("structure spans {nv} vertices but {nc} colours"));
        }
        Ok(())
    }
}

fn random_subset<R: Rng + ?Sized>(pool: &[u32], size: usize, rng: &mut R) -> Vec<u32> {
    let mut s: Vec<u32> = index::sample(rng, pool.len(), size).into_iter().map(|i| pool[i]).collect();
    s.sort_unstable();
    s
}

/// Builds a random template of degree `params.d` and scale `flex.m`, then
/// wires absorbers along it with [`build_absorbing_structure_on`].
pub fn build_absorbing_structure<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    flex: &FlexibleSets,
    params: &PipelineParams,
    rng: &mut R,
) -> Result<AbsorbingStructure, PipelineError> {
    let m = flex.m;
    if params.d == 0 || params.d > 7 * m {
        return Err(input(format!("template degree {} outside 1..=7m = {}", params.d, 7 * m)));
    }
    precheck(d, m, params.d)?;
    let template = build_rmbg(m, params.d, rng).map_err(|e| input(e.to_string()))?;
    build_absorbing_structure_on(d, flex, template, params, rng)
}

fn precheck(d: &ColouredDigraph, m: usize, degree: usize) -> Result<(), PipelineError> {
    if !d.is_fully_coloured() {
        return Err(input("digraph has uncoloured edges"));
    }
    let cap = structure_capacity(m, degree);
    if cap.vertices > d.n() || cap.colours > d.kappa() {
        return Err(PipelineFailure::new(
            Stage::AbsorbingStructure,
            format!(
                "{} absorbers need {} vertices and {} colours, have {} and {}",
                cap.absorbers,
                cap.vertices,
                cap.colours,
                d.n(),
                d.kappa()
            ),
        )
        .into());
    }
    Ok(())
}

/// Greedy construction over a given template, in template-edge order: for
/// each edge an absorber with fresh internals, then a length-3 connector
/// from the previous absorber. Buffers are random subsets of the
/// non-flexible vertices and colours.
pub fn build_absorbing_structure_on<R: Rng + ?Sized>(
    d: &ColouredDigraph,
    flex: &FlexibleSets,
    template: RmbgTemplate,
    params: &PipelineParams,
    rng: &mut R,
) -> Result<AbsorbingStructure, PipelineError> {
    let (n, kappa, m) = (d.n(), d.kappa(), flex.m);
    if template.m() != m {
        return Err(input(format!("template scale {} does not match flexible scale {m}", template.m())));
    }
    precheck(d, m, template.d())?;

    let flex_v = flex.vertex_set(n);
    let flex_c = flex.colour_set(kappa);
    let outside_v: Vec<u32> = (0..n as u32).filter(|&x| !flex_v.contains(x as usize)).collect();
    let outside_c: Vec<u32> = (0..kappa as u32).filter(|&x| !flex_c.contains(x as usize)).collect();
    let mut a_labels = flex.vertices.clone();
    a_labels.extend(random_subset(&outside_v, 5 * m, rng));
    let mut b_labels = flex.colours.clone();
    b_labels.extend(random_subset(&outside_c, 5 * m, rng));

    let mode = if admissible_pairs(m) <= CERTIFY_EXHAUSTIVE_LIMIT {
        CertifyMode::Exhaustive
    } else {
        CertifyMode::Sampled { trials: params.certify_trials, seed: rng.gen() }
    };
    let certification = certify_robust_matchability(&template, mode).map_err(|e| input(e.to_string()))?;

    let mut free_v = FixedBitSet::with_capacity(n);
    free_v.insert_range(..);
    a_labels.iter().for_each(|&x| free_v.set(x as usize, false));
    let mut free_c = FixedBitSet::with_capacity(kappa);
    free_c.insert_range(..);
    b_labels.iter().for_each(|&c| free_c.set(c as usize, false));

    let edges = template.edges();
    let mut absorbers: Vec<Absorber> = Vec::with_capacity(edges.len());
    let mut connectors: Vec<DirectedPath> = Vec::with_capacity(edges.len());
    for (i, &(la, lb)) in edges.iter().enumerate() {
        let (v, c) = (a_labels[la as usize], b_labels[lb as usize]);
        let mut placed = None;
        let mut why = String::new();
        for _ in 0..=params.edge_retries {
            let a = match find_absorber(d, v, c, &free_v, &free_c, &params.absorber, rng) {
                Ok(a) => a,
                Err(e) => {
                    why = e.to_string();
                    break;
                }
            };
            let Some(prev) = absorbers.last() else {
                let start = DirectedPath::trivial(a.first());
                placed = Some((a, start));
                break;
            };
            let mut pool_v = free_v.clone();
            a.internal_vertices().iter().for_each(|&x| pool_v.set(x as usize, false));
            let mut pool_c = free_c.clone();
            a.internal_colours().iter().for_each(|&x| pool_c.set(x as usize, false));
            let fam = rainbow_path_family(d, prev.last(), a.first(), &pool_v, &pool_c, 1, params.connector_restarts, rng)
                .map_err(|e| input(e.to_string()))?;
            match fam.paths.into_iter().next() {
                Some(p) => {
                    placed = Some((a, p));
                    break;
                }
                None => why = format!("no length-3 connector from {} to {}", prev.last(), a.first()),
            }
        }
        let Some((a, p)) = placed else {
            return Err(PipelineFailure::new(
                Stage::AbsorbingStructure,
                format!("template edge {i} ({la}, {lb}) = (vertex {v}, colour {c}): {why}"),
            )
            .into());
        };
        a.internal_vertices().iter().for_each(|&x| free_v.set(x as usize, false));
        a.internal_colours().iter().for_each(|&x| free_c.set(x as usize, false));
        p.interior().iter().for_each(|&x| free_v.set(x as usize, false));
        for col in p.colours(d).expect("connector edges exist") {
            debug_assert!(in_set(&free_c, col));
            free_c.set(col as usize, false);
        }
        absorbers.push(a);
        connectors.push(p);
    }
    let s = AbsorbingStructure { template, a_labels, b_labels, edges, absorbers, connectors, certification };
    if let Err(e) = s.validate(d) {
        return Err(PipelineFailure::new(Stage::AbsorbingStructure, format!("validator rejected structure: {e}")).into());
    }
    Ok(s)
}
