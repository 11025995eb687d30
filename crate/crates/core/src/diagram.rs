//! Homotopy coherent diagrams of GF(2) chain complexes over the stage
//! poset.
//!
//! A diagram assigns a complex `C_a` to each stage and a map `φ_σ` of
//! degree `|σ| - 1` from `C_{sσ}` to `C_{tσ}` to each nondegenerate simplex
//! `σ`, subject to
//!
//! ```text
//! d φ_σ + φ_σ d + Σ_{0<i<k} φ_{∂_i σ} + Σ_{0<i<k} φ_{σ[i..k]} ∘ φ_{σ[0..i]} = 0
//! ```
//!
//! Only interior faces enter: `∂_0` and `∂_k` change the source or the
//! target, so their maps could not be added to the others.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::colimit::DirectSystem;
use crate::complex::{nonzero_betti, ChainMap, Degree, GradedComplex, HomSpace};
use crate::error::{Error, Result};
use crate::io::{blocks_doc, chain_map_from_doc, DiagramDoc, SimplexMapDoc, StageDoc};
use crate::nerve::{enumerate_product_chains, enumerate_simplices, PosetSimplex, ProductSimplex, ProductVertex};

/// Read access to the maps of a diagram indexed by chains of `Vertex`.
///
/// `map` is only called for nondegenerate chains with at least one
/// morphism; [`lookup`] handles degenerate chains.
pub trait MapLookup {
    type Vertex: Clone + PartialEq + fmt::Debug;

    fn complex(&self, v: &Self::Vertex) -> Result<Arc<GradedComplex>>;

    fn map(&self, chain: &[Self::Vertex]) -> Result<ChainMap>;
}

/// The map of any chain with at least one morphism. A degenerate chain with
/// one morphism is an identity and gets the identity map; longer degenerate
/// chains get zero.
pub fn lookup<L: MapLookup>(l: &L, chain: &[L::Vertex]) -> Result<ChainMap> {
    assert!(
        chain.len() >= 2,
        "maps are attached to chains with at least one morphism"
    );
    if chain.windows(2).any(|w| w[0] == w[1]) {
        let s = l.complex(&chain[0])?;
        if chain.len() == 2 {
            return Ok(ChainMap::identity(s));
        }
        let t = l.complex(chain.last().unwrap())?;
        return Ok(ChainMap::zero(s, t, chain.len() as Degree - 2));
    }
    l.map(chain)
}

/// The terms of the coherence relation not involving `φ_σ` itself:
/// interior faces plus compositions over interior split points.
pub fn known_part<L: MapLookup>(l: &L, chain: &[L::Vertex]) -> Result<ChainMap> {
    let k = chain.len() - 1;
    let s = l.complex(&chain[0])?;
    let t = l.complex(&chain[k])?;
    let mut acc = ChainMap::zero(s, t, k as Degree - 2);
    for i in 1..k {
        let mut face = chain.to_vec();
        face.remove(i);
        acc = acc.add(&lookup(l, &face)?)?;
        let prefix = lookup(l, &chain[..=i])?;
        let suffix = lookup(l, &chain[i..])?;
        acc = acc.add(&suffix.compose(&prefix)?)?;
    }
    Ok(acc)
}

/// Left-hand side of the coherence relation for `chain`; zero iff the
/// relation holds there.
pub fn coherence_residual<L: MapLookup>(l: &L, chain: &[L::Vertex]) -> Result<ChainMap> {
    let phi = lookup(l, chain)?;
    let d = phi.hom_differential();
    if chain.len() == 2 {
        return Ok(d);
    }
    d.add(&known_part(l, chain)?)
}

/// A simplex where the coherence relation fails.
#[derive(Clone, Debug)]
pub struct Violation<S> {
    pub simplex: S,
    pub residual: ChainMap,
}

#[derive(Clone, Debug)]
pub struct CoherenceReport<S> {
    pub checked: usize,
    pub violations: Vec<Violation<S>>,
    /// Simplices that could not be checked because a face is missing.
    pub unchecked: Vec<S>,
}

impl<S> CoherenceReport<S> {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty() && self.unchecked.is_empty()
    }
}

fn check_stages(stages: &[Arc<GradedComplex>]) -> Result<()> {
    if stages.is_empty() {
        return Err(Error::InvalidDiagram("a diagram needs at least one stage".into()));
    }
    for (a, c) in stages.iter().enumerate() {
        let bad = c.check_d_squared();
        if !bad.is_empty() {
            return Err(Error::Validation(format!(
                "stage {a}: d^2 != 0 in degree(s) {:?}",
                bad.iter().map(|v| v.degree).collect::<Vec<_>>()
            )));
        }
    }
    Ok(())
}

fn check_map_shape(stages: &[Arc<GradedComplex>], sigma: &PosetSimplex, f: &ChainMap) -> Result<()> {
    let Some(s) = stages.get(sigma.source()) else {
        return Err(Error::InvalidDiagram(format!("simplex {sigma} leaves the stage range")));
    };
    let Some(t) = stages.get(sigma.target()) else {
        return Err(Error::InvalidDiagram(format!("simplex {sigma} leaves the stage range")));
    };
    if sigma.is_vertex() {
        return Err(Error::InvalidDiagram(format!("vertex {sigma} carries no map")));
    }
    if f.degree() != sigma.len() as Degree - 1 {
        return Err(Error::ShapeMismatch(format!(
            "map on {sigma} has degree {}, expected {}",
            f.degree(),
            sigma.len() - 1
        )));
    }
    if f.source().dims() != s.dims() || f.target().dims() != t.dims() {
        return Err(Error::ShapeMismatch(format!(
            "map on {sigma} has the wrong source or target"
        )));
    }
    Ok(())
}

/// A diagram on stages `0..=max_stage` with maps for every simplex of
/// length `1..=max_length`.
#[derive(Clone, Debug)]
pub struct CoherentDiagram {
    stages: Vec<Arc<GradedComplex>>,
    maps: BTreeMap<PosetSimplex, ChainMap>,
    max_length: usize,
}

impl CoherentDiagram {
    pub fn new(
        stages: Vec<Arc<GradedComplex>>,
        maps: BTreeMap<PosetSimplex, ChainMap>,
        max_length: usize,
    ) -> Result<Self> {
        check_stages(&stages)?;
        for (sigma, f) in &maps {
            check_map_shape(&stages, sigma, f)?;
            if sigma.len() > max_length {
                return Err(Error::InvalidDiagram(format!(
                    "{sigma} is longer than the diagram length {max_length}"
                )));
            }
        }
        let max_stage = stages.len() - 1;
        if max_stage > 0 && max_length == 0 {
            return Err(Error::InvalidDiagram(
                "a diagram with several stages needs its edges (length >= 1)".into(),
            ));
        }
        if let Some(missing) = enumerate_simplices(max_stage, max_length)
            .into_iter()
            .find(|s| !s.is_vertex() && !maps.contains_key(s))
        {
            return Err(Error::UnknownSimplex(missing));
        }
        Ok(CoherentDiagram {
            stages,
            maps,
            max_length,
        })
    }

    pub fn stages(&self) -> &[Arc<GradedComplex>] {
        &self.stages
    }

    pub fn stage(&self, a: usize) -> &Arc<GradedComplex> {
        &self.stages[a]
    }

    pub fn max_stage(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn maps(&self) -> &BTreeMap<PosetSimplex, ChainMap> {
        &self.maps
    }

    pub fn get(&self, sigma: &PosetSimplex) -> Result<&ChainMap> {
        self.maps.get(sigma).ok_or_else(|| Error::UnknownSimplex(sigma.clone()))
    }

    /// The maps `C_a -> C_{a+1}`.
    pub fn consecutive_edges(&self) -> Vec<ChainMap> {
        (0..self.max_stage())
            .map(|a| self.maps[&PosetSimplex::edge(a, a + 1).unwrap()].clone())
            .collect()
    }

    pub fn validate(&self) -> CoherenceReport<PosetSimplex> {
        let mut report = CoherenceReport {
            checked: 0,
            violations: Vec::new(),
            unchecked: Vec::new(),
        };
        for sigma in self.maps.keys() {
            report.checked += 1;
            match coherence_residual(self, sigma.vertices()) {
                Ok(r) if r.is_zero() => {}
                Ok(r) => report.violations.push(Violation {
                    simplex: sigma.clone(),
                    residual: r,
                }),
                Err(_) => report.unchecked.push(sigma.clone()),
            }
        }
        report
    }

    /// Truncates to the stages `0..=max_stage`.
    pub fn restrict_stages(&self, max_stage: usize) -> CoherentDiagram {
        let max_stage = max_stage.min(self.max_stage());
        CoherentDiagram {
            stages: self.stages[..=max_stage].to_vec(),
            maps: self
                .maps
                .iter()
                .filter(|(s, _)| s.target() <= max_stage)
                .map(|(s, f)| (s.clone(), f.clone()))
                .collect(),
            max_length: self.max_length.min(max_stage),
        }
    }

    /// All maps of length at least two vanish.
    pub fn is_strict(&self) -> bool {
        self.maps.iter().all(|(s, f)| s.len() < 2 || f.is_zero())
    }

    /// The stagewise homology system along consecutive edges, stabilized at
    /// the last stage.
    pub fn homology_system(&self) -> Result<DirectSystem> {
        DirectSystem::from_chain_level(&self.stages, &self.consecutive_edges(), self.max_stage())
    }

    pub fn to_doc(&self) -> DiagramDoc {
        PartialDiagram {
            stages: self.stages.clone(),
            maps: self.maps.clone(),
        }
        .to_doc()
    }
}

impl MapLookup for CoherentDiagram {
    type Vertex = usize;

    fn complex(&self, v: &usize) -> Result<Arc<GradedComplex>> {
        self.stages
            .get(*v)
            .cloned()
            .ok_or_else(|| Error::InvalidDiagram(format!("no stage {v}")))
    }

    fn map(&self, chain: &[usize]) -> Result<ChainMap> {
        let sigma = PosetSimplex::new(chain.to_vec())?;
        self.get(&sigma).cloned()
    }
}

/// Stage complexes with maps for some simplices, typically just the edges.
#[derive(Clone, Debug)]
pub struct PartialDiagram {
    stages: Vec<Arc<GradedComplex>>,
    maps: BTreeMap<PosetSimplex, ChainMap>,
}

impl PartialDiagram {
    pub fn new(stages: Vec<Arc<GradedComplex>>, maps: BTreeMap<PosetSimplex, ChainMap>) -> Result<Self> {
        check_stages(&stages)?;
        for (sigma, f) in &maps {
            check_map_shape(&stages, sigma, f)?;
        }
        Ok(PartialDiagram { stages, maps })
    }

    pub fn stages(&self) -> &[Arc<GradedComplex>] {
        &self.stages
    }

    pub fn maps(&self) -> &BTreeMap<PosetSimplex, ChainMap> {
        &self.maps
    }

    pub fn max_stage(&self) -> usize {
        self.stages.len() - 1
    }

    /// Length of the longest simplex carrying a map.
    pub fn max_stored_length(&self) -> usize {
        self.maps.keys().map(PosetSimplex::len).max().unwrap_or(0)
    }

    /// Simplices of length `1..=up_to_length` still needing a map.
    pub fn missing(&self, up_to_length: usize) -> Vec<PosetSimplex> {
        enumerate_simplices(self.max_stage(), up_to_length)
            .into_iter()
            .filter(|s| !s.is_vertex() && !self.maps.contains_key(s))
            .collect()
    }

    /// The maps `C_a -> C_{a+1}`, all of which must be present.
    pub fn consecutive_edges(&self) -> Result<Vec<ChainMap>> {
        (0..self.max_stage())
            .map(|a| {
                let e = PosetSimplex::edge(a, a + 1)?;
                self.maps
                    .get(&e)
                    .cloned()
                    .ok_or_else(|| Error::InvalidDiagram(format!("missing consecutive edge {e}")))
            })
            .collect()
    }

    /// Keeps the stages `0..=max_stage` and the maps between them.
    pub fn truncate(&self, max_stage: usize) -> PartialDiagram {
        let max_stage = max_stage.min(self.max_stage());
        PartialDiagram {
            stages: self.stages[..=max_stage].to_vec(),
            maps: self
                .maps
                .iter()
                .filter(|(s, _)| s.target() <= max_stage)
                .map(|(s, f)| (s.clone(), f.clone()))
                .collect(),
        }
    }

    pub fn insert(&mut self, sigma: PosetSimplex, f: ChainMap) -> Result<()> {
        check_map_shape(&self.stages, &sigma, &f)?;
        self.maps.insert(sigma, f);
        Ok(())
    }

    /// Checks the stored maps whose faces are all present.
    pub fn validate_stored(&self) -> CoherenceReport<PosetSimplex> {
        let mut report = CoherenceReport {
            checked: 0,
            violations: Vec::new(),
            unchecked: Vec::new(),
        };
        for sigma in self.maps.keys() {
            match coherence_residual(self, sigma.vertices()) {
                Ok(r) => {
                    report.checked += 1;
                    if !r.is_zero() {
                        report.violations.push(Violation {
                            simplex: sigma.clone(),
                            residual: r,
                        });
                    }
                }
                Err(_) => report.unchecked.push(sigma.clone()),
            }
        }
        report
    }

    pub fn from_doc(doc: &DiagramDoc) -> Result<Self> {
        let stages = stages_from_docs(&doc.stages)?;
        let mut maps = BTreeMap::new();
        for m in &doc.maps {
            let sigma = PosetSimplex::new(m.simplex.clone())?;
            if sigma.is_vertex() || sigma.target() >= stages.len() {
                return Err(Error::InvalidDiagram(format!(
                    "map given on {sigma}, which is not an edge or higher simplex of the stages"
                )));
            }
            let f = chain_map_from_doc(
                stages[sigma.source()].clone(),
                stages[sigma.target()].clone(),
                sigma.len() as Degree - 1,
                &m.blocks,
            )
            .map_err(|e| Error::InvalidDiagram(format!("simplex {sigma}: {e}")))?;
            if maps.insert(sigma.clone(), f).is_some() {
                return Err(Error::InvalidDiagram(format!("simplex {sigma} given twice")));
            }
        }
        PartialDiagram::new(stages, maps)
    }

    pub fn to_doc(&self) -> DiagramDoc {
        DiagramDoc {
            stages: self
                .stages
                .iter()
                .enumerate()
                .map(|(index, c)| StageDoc {
                    index,
                    complex: (**c).clone(),
                })
                .collect(),
            maps: self
                .maps
                .iter()
                .map(|(s, f)| SimplexMapDoc {
                    simplex: s.vertices().to_vec(),
                    blocks: blocks_doc(f),
                })
                .collect(),
        }
    }
}

impl MapLookup for PartialDiagram {
    type Vertex = usize;

    fn complex(&self, v: &usize) -> Result<Arc<GradedComplex>> {
        self.stages
            .get(*v)
            .cloned()
            .ok_or_else(|| Error::InvalidDiagram(format!("no stage {v}")))
    }

    fn map(&self, chain: &[usize]) -> Result<ChainMap> {
        let sigma = PosetSimplex::new(chain.to_vec())?;
        self.maps.get(&sigma).cloned().ok_or(Error::UnknownSimplex(sigma))
    }
}

/// Stage documents must be numbered `0, 1, ..., n` in order.
pub fn stages_from_docs(docs: &[StageDoc]) -> Result<Vec<Arc<GradedComplex>>> {
    docs.iter()
        .enumerate()
        .map(|(i, s)| {
            if s.index != i {
                Err(Error::Validation(format!(
                    "stage indices must be 0, 1, 2, ...; found {} at position {i}",
                    s.index
                )))
            } else {
                Ok(Arc::new(s.complex.clone()))
            }
        })
        .collect()
}

/// The strict diagram generated by maps `C_a -> C_{a+1}`: longer edges get
/// composites and all higher maps vanish.
pub fn make_strict(stages: Vec<Arc<GradedComplex>>, edges: Vec<ChainMap>) -> Result<CoherentDiagram> {
    check_stages(&stages)?;
    if edges.len() + 1 != stages.len() {
        return Err(Error::InvalidDiagram(format!(
            "{} stages need {} consecutive edges, got {}",
            stages.len(),
            stages.len() - 1,
            edges.len()
        )));
    }
    for (a, e) in edges.iter().enumerate() {
        check_map_shape(&stages, &PosetSimplex::edge(a, a + 1)?, e)?;
        if !e.is_chain_map().ok {
            return Err(Error::NotAChainMap(format!("edge ({a},{})", a + 1)));
        }
    }
    let max_stage = stages.len() - 1;
    let mut maps = BTreeMap::new();
    for sigma in enumerate_simplices(max_stage, max_stage) {
        if sigma.is_vertex() {
            continue;
        }
        let (s, t) = (sigma.source(), sigma.target());
        let f = if sigma.len() == 1 {
            composite(&edges, s, t)?
        } else {
            ChainMap::zero(stages[s].clone(), stages[t].clone(), sigma.len() as Degree - 1)
        };
        maps.insert(sigma, f);
    }
    CoherentDiagram::new(stages, maps, max_stage)
}

/// `edges[t-1] ∘ ... ∘ edges[s]`.
fn composite(edges: &[ChainMap], s: usize, t: usize) -> Result<ChainMap> {
    let mut f = edges[s].clone();
    for e in &edges[s + 1..t] {
        f = e.compose(&f)?;
    }
    Ok(f)
}

/// Fills in the maps of every simplex of length `1..=up_to_length` not
/// already given, by increasing length and then lexicographically.
///
/// Missing edges `(a, b)` with `b > a + 1` become composites of the
/// consecutive edges. For a missing higher simplex `σ` the known part `K` of
/// its coherence relation is a cycle of the hom complex, and `φ_σ` is the
/// solver's solution of `d φ_σ + φ_σ d = K` (zero when `K` is zero). When
/// `K` is not a boundary the previously chosen maps of length `|σ| - 1` are
/// shifted by hom-complex cycles, jointly for the whole length, before an
/// obstruction is reported.
pub fn complete(p: &PartialDiagram, up_to_length: usize) -> Result<CoherentDiagram> {
    let max_stage = p.max_stage();
    let up_to_length = up_to_length.clamp(1, max_stage.max(1)).min(max_stage);
    let mut work = p.clone();

    let provided: std::collections::BTreeSet<PosetSimplex> = p.maps.keys().cloned().collect();
    for (sigma, f) in &p.maps {
        if sigma.len() == 1 && !f.is_chain_map().ok {
            return Err(Error::NotAChainMap(format!("edge {sigma}")));
        }
    }

    if up_to_length >= 1 {
        for a in 0..max_stage {
            let e = PosetSimplex::edge(a, a + 1)?;
            if !work.maps.contains_key(&e) {
                return Err(Error::InvalidDiagram(format!("missing consecutive edge {e}")));
            }
        }
        let edges: Vec<ChainMap> = (0..max_stage)
            .map(|a| work.maps[&PosetSimplex::edge(a, a + 1).unwrap()].clone())
            .collect();
        for sigma in work.missing(1) {
            let f = composite(&edges, sigma.source(), sigma.target())?;
            work.maps.insert(sigma, f);
        }
    }

    for length in 2..=up_to_length {
        let level: Vec<PosetSimplex> = enumerate_simplices(max_stage, length)
            .into_iter()
            .filter(|s| s.len() == length)
            .collect();
        let mut pending = Vec::new();
        for sigma in &level {
            if provided.contains(sigma) {
                let r = coherence_residual(&work, sigma.vertices())?;
                if !r.is_zero() {
                    return Err(Error::InvalidDiagram(format!(
                        "the given map on {sigma} violates the coherence relation"
                    )));
                }
            } else {
                pending.push(sigma.clone());
            }
        }
        match solve_level(&work, &pending) {
            Ok(solutions) => {
                for (sigma, f) in solutions {
                    work.maps.insert(sigma, f);
                }
            }
            Err(obstruction) => {
                let corrected = if length >= 3 {
                    correct_previous_level(&work, &provided, &level, length)?
                } else {
                    None
                };
                match corrected {
                    Some((updates, solutions)) => {
                        for (sigma, f) in updates.into_iter().chain(solutions) {
                            work.maps.insert(sigma, f);
                        }
                    }
                    None => return Err(obstruction),
                }
            }
        }
    }

    let maps = work.maps.into_iter().filter(|(s, _)| s.len() <= up_to_length).collect();
    CoherentDiagram::new(work.stages, maps, up_to_length)
}

/// Solves each pending simplex independently against the current lower
/// maps.
fn solve_level(work: &PartialDiagram, pending: &[PosetSimplex]) -> Result<Vec<(PosetSimplex, ChainMap)>> {
    let mut out = Vec::new();
    for sigma in pending {
        let known = known_part(work, sigma.vertices())?;
        let f = if known.is_zero() {
            ChainMap::zero(known.source().clone(), known.target().clone(), known.degree() + 1)
        } else {
            let space = HomSpace::new(known.source().clone(), known.target().clone(), known.degree() + 1);
            space.solve_boundary(&known).map_err(|_| Error::Obstruction {
                simplex: sigma.clone(),
                witness: Box::new(known.clone()),
            })?
        };
        out.push((sigma.clone(), f));
    }
    Ok(out)
}

/// One linear system for a whole length: unknowns are the maps of the
/// pending simplices of this length and cycle corrections `z_τ` to the
/// solver-chosen maps of length `length - 1`. Corrections by cycles keep
/// every relation of length `length - 1` intact, and enter the relations of
/// this length linearly (as faces, or composed with an edge).
#[allow(clippy::type_complexity)]
fn correct_previous_level(
    work: &PartialDiagram,
    provided: &std::collections::BTreeSet<PosetSimplex>,
    level: &[PosetSimplex],
    length: usize,
) -> Result<Option<(Vec<(PosetSimplex, ChainMap)>, Vec<(PosetSimplex, ChainMap)>)>> {
    use crate::f2::{F2Matrix, F2Vector};

    let stage = |a: usize| work.stages[a].clone();
    // Correctable lower simplices: solver-chosen ones of length - 1.
    let lower: Vec<PosetSimplex> = work
        .maps
        .keys()
        .filter(|s| s.len() == length - 1 && !provided.contains(s))
        .cloned()
        .collect();
    let cycle_bases: Vec<Vec<ChainMap>> = lower
        .iter()
        .map(|t| HomSpace::new(stage(t.source()), stage(t.target()), length as Degree - 2).cycle_basis())
        .collect();
    let unknown_level: Vec<&PosetSimplex> = level.iter().filter(|s| !provided.contains(*s)).collect();
    let level_spaces: Vec<HomSpace> = level
        .iter()
        .map(|s| HomSpace::new(stage(s.source()), stage(s.target()), length as Degree - 1))
        .collect();
    let eq_spaces: Vec<HomSpace> = level
        .iter()
        .map(|s| HomSpace::new(stage(s.source()), stage(s.target()), length as Degree - 2))
        .collect();
    let eq_offsets: Vec<usize> = eq_spaces
        .iter()
        .scan(0, |acc, h| {
            let o = *acc;
            *acc += h.dim();
            Some(o)
        })
        .collect();
    let n_rows: usize = eq_spaces.iter().map(HomSpace::dim).sum();

    let mut columns: Vec<F2Vector> = Vec::new();
    // φ_σ unknowns: only enter their own equation through D.
    let mut phi_columns: Vec<(usize, usize, usize)> = Vec::new(); // (level index, first column, count)
    for (li, sigma) in level.iter().enumerate() {
        if !unknown_level.contains(&sigma) {
            continue;
        }
        let dm = level_spaces[li].differential_matrix();
        phi_columns.push((li, columns.len(), dm.cols()));
        for c in 0..dm.cols() {
            let mut col = F2Vector::zeros(n_rows);
            for r in dm.column(c).ones() {
                col.set(eq_offsets[li] + r, true);
            }
            columns.push(col);
        }
    }
    // Cycle corrections: effect on the known part of every level simplex.
    let mut z_columns: Vec<(usize, usize)> = Vec::new(); // (lower index, basis index)
    for (ti, tau) in lower.iter().enumerate() {
        for (bi, z) in cycle_bases[ti].iter().enumerate() {
            let mut col = F2Vector::zeros(n_rows);
            for (li, sigma) in level.iter().enumerate() {
                let effect = correction_effect(work, sigma, tau, z)?;
                if let Some(e) = effect {
                    for r in eq_spaces[li].to_vector(&e).ones() {
                        col.flip(eq_offsets[li] + r);
                    }
                }
            }
            z_columns.push((ti, bi));
            columns.push(col);
        }
    }
    let mut rhs = F2Vector::zeros(n_rows);
    for (li, sigma) in level.iter().enumerate() {
        let known = if provided.contains(sigma) {
            coherence_residual(work, sigma.vertices())?
        } else {
            known_part(work, sigma.vertices())?
        };
        for r in eq_spaces[li].to_vector(&known).ones() {
            rhs.set(eq_offsets[li] + r, true);
        }
    }
    let system = F2Matrix::from_columns(n_rows, &columns);
    let Ok(x) = system.solve(&rhs) else {
        return Ok(None);
    };

    let z_start: usize = phi_columns.iter().map(|p| p.2).sum();
    let mut updates = Vec::new();
    for (ti, tau) in lower.iter().enumerate() {
        let mut f = work.maps[tau].clone();
        for (ci, &(t, bi)) in z_columns.iter().enumerate() {
            if t == ti && x.get(z_start + ci) {
                f = f.add(&cycle_bases[ti][bi])?;
            }
        }
        if f != work.maps[tau] {
            updates.push((tau.clone(), f));
        }
    }
    let mut solutions = Vec::new();
    for &(li, first, count) in &phi_columns {
        let mut v = F2Vector::zeros(count);
        for c in 0..count {
            if x.get(first + c) {
                v.set(c, true);
            }
        }
        solutions.push((level[li].clone(), level_spaces[li].from_vector(&v)));
    }
    Ok(Some((updates, solutions)))
}

/// How adding the cycle `z` to `φ_τ` changes the known part of `σ`'s
/// relation, if `τ` occurs in it.
fn correction_effect(
    work: &PartialDiagram,
    sigma: &PosetSimplex,
    tau: &PosetSimplex,
    z: &ChainMap,
) -> Result<Option<ChainMap>> {
    let k = sigma.len();
    let mut acc: Option<ChainMap> = None;
    let mut push = |m: ChainMap| -> Result<()> {
        acc = Some(match acc.take() {
            Some(a) => a.add(&m)?,
            None => m,
        });
        Ok(())
    };
    for i in 1..k {
        if sigma.face(i)? == *tau {
            push(z.clone())?;
        }
        let (prefix, suffix) = sigma.split(i)?;
        if prefix == *tau {
            // suffix is a single edge
            push(lookup(work, suffix.vertices())?.compose(z)?)?;
        }
        if suffix == *tau {
            push(z.compose(&lookup(work, prefix.vertices())?)?)?;
        }
    }
    Ok(acc)
}

/// Case analysis for a chain of the product category built from two strict
/// diagrams with equal stages: identities across the copies, edges of the
/// respective copy otherwise, and zero on every chain with two or more
/// morphisms.
#[derive(Clone, Debug)]
pub struct ProductDiagram {
    copies: [CoherentDiagram; 2],
}

impl ProductDiagram {
    pub fn copy(&self, marker: u8) -> &CoherentDiagram {
        &self.copies[marker as usize]
    }

    pub fn max_stage(&self) -> usize {
        self.copies[0].max_stage()
    }

    /// Checks every nondegenerate chain with stages `<= max_stage` and at
    /// most `max_length` morphisms.
    pub fn validate(&self, max_length: usize) -> CoherenceReport<ProductSimplex> {
        let mut report = CoherenceReport {
            checked: 0,
            violations: Vec::new(),
            unchecked: Vec::new(),
        };
        for chain in enumerate_product_chains(self.max_stage(), max_length) {
            report.checked += 1;
            match coherence_residual(self, chain.vertices()) {
                Ok(r) if r.is_zero() => {}
                Ok(r) => report.violations.push(Violation {
                    simplex: chain,
                    residual: r,
                }),
                Err(_) => report.unchecked.push(chain),
            }
        }
        report
    }

    /// The diagram on one copy of the stage poset.
    pub fn restrict(&self, marker: u8) -> Result<CoherentDiagram> {
        let base = &self.copies[marker as usize];
        let mut maps = BTreeMap::new();
        for sigma in base.maps().keys() {
            let chain: Vec<ProductVertex> = sigma.vertices().iter().map(|&a| (a, marker)).collect();
            maps.insert(sigma.clone(), lookup(self, &chain)?);
        }
        CoherentDiagram::new(base.stages().to_vec(), maps, base.max_length())
    }
}

impl MapLookup for ProductDiagram {
    type Vertex = ProductVertex;

    fn complex(&self, v: &ProductVertex) -> Result<Arc<GradedComplex>> {
        self.copies[0].complex(&v.0)
    }

    fn map(&self, chain: &[ProductVertex]) -> Result<ChainMap> {
        let (first, last) = (chain[0], *chain.last().unwrap());
        if chain.len() > 2 {
            let s = self.complex(&first)?;
            let t = self.complex(&last)?;
            return Ok(ChainMap::zero(s, t, chain.len() as Degree - 2));
        }
        if first.0 == last.0 {
            // only the marker moves
            return Ok(ChainMap::identity(self.complex(&first)?));
        }
        self.copies[first.1 as usize]
            .get(&PosetSimplex::edge(first.0, last.0)?)
            .cloned()
    }
}

/// Extends two strict diagrams with the same stage complexes over
/// `stages × {0 ⇄ 1}`.
///
/// The extension is coherent exactly when the two diagrams also agree on
/// edges; [`ProductDiagram::validate`] reports the failing chains otherwise.
pub fn product_extension(d1: &CoherentDiagram, d2: &CoherentDiagram) -> Result<ProductDiagram> {
    if d1.stages().len() != d2.stages().len() {
        return Err(Error::StageMismatch(format!(
            "{} stages against {}",
            d1.stages().len(),
            d2.stages().len()
        )));
    }
    for (a, (c1, c2)) in d1.stages().iter().zip(d2.stages()).enumerate() {
        if c1.dims() != c2.dims() || (0..=c1.max_degree().unwrap_or(0) + 1).any(|n| c1.diff(n) != c2.diff(n)) {
            return Err(Error::StageMismatch(format!(
                "stage {a} differs between the two diagrams"
            )));
        }
    }
    for d in [d1, d2] {
        if !d.is_strict() {
            return Err(Error::InvalidDiagram("product extension needs strict diagrams".into()));
        }
    }
    Ok(ProductDiagram {
        copies: [d1.clone(), d2.clone()],
    })
}

/// Chain maps between corresponding stages of two diagrams, one family in
/// each direction.
#[derive(Clone, Debug)]
pub struct Interleaving {
    /// `C_c -> C'_c`.
    pub forward: Vec<ChainMap>,
    /// `C'_c -> C_c`.
    pub backward: Vec<ChainMap>,
}

impl Interleaving {
    pub fn identities(d: &CoherentDiagram) -> Self {
        let ids: Vec<ChainMap> = d.stages().iter().map(|c| ChainMap::identity(c.clone())).collect();
        Interleaving {
            forward: ids.clone(),
            backward: ids,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InterleaveReport {
    pub first_limit: BTreeMap<Degree, usize>,
    pub second_limit: BTreeMap<Degree, usize>,
    pub doubled_limit: BTreeMap<Degree, usize>,
    pub agree: bool,
}

/// Compares the direct limits of two diagrams through interleaving maps.
///
/// The interleaving is checked up to homotopy (each homotopy is solved for
/// in the hom complex): `backward ∘ forward ~ id`, `forward ∘ backward ~ id`
/// and `forward_{c+1} ∘ φ_{c,c+1} ~ φ'_{c,c+1} ∘ forward_c`. The doubled
/// system `H(C_0) -> H(C'_0) -> H(C_1) -> H(C'_1) -> ...` uses `forward_c`
/// and `φ_{c,c+1} ∘ backward_c`; its limit is compared with both limits.
pub fn interleave_compare(
    d1: &CoherentDiagram,
    d2: &CoherentDiagram,
    cross: &Interleaving,
) -> Result<InterleaveReport> {
    let n = d1.stages().len();
    if d2.stages().len() != n || cross.forward.len() != n || cross.backward.len() != n {
        return Err(Error::StageMismatch(
            "diagrams and interleaving maps must cover the same stages".into(),
        ));
    }
    let homotopic = |a: &ChainMap, b: &ChainMap, relation: String| -> Result<()> {
        let diff = a.add(b)?;
        if diff.is_zero() {
            return Ok(());
        }
        HomSpace::new(diff.source().clone(), diff.target().clone(), 1)
            .solve_boundary(&diff)
            .map(|_| ())
            .map_err(|_| Error::InterleaveObstruction {
                relation,
                witness: Box::new(diff),
            })
    };
    for c in 0..n {
        for (f, s, t, name) in [
            (&cross.forward[c], d1.stage(c), d2.stage(c), "forward"),
            (&cross.backward[c], d2.stage(c), d1.stage(c), "backward"),
        ] {
            if f.degree() != 0 || f.source().dims() != s.dims() || f.target().dims() != t.dims() {
                return Err(Error::ShapeMismatch(format!("{name} map at stage {c}")));
            }
            if !f.is_chain_map().ok {
                return Err(Error::NotAChainMap(format!("{name} map at stage {c}")));
            }
        }
        let (f, g) = (&cross.forward[c], &cross.backward[c]);
        homotopic(
            &g.compose(f)?,
            &ChainMap::identity(d1.stage(c).clone()),
            format!("backward∘forward ~ id at stage {c}"),
        )?;
        homotopic(
            &f.compose(g)?,
            &ChainMap::identity(d2.stage(c).clone()),
            format!("forward∘backward ~ id at stage {c}"),
        )?;
    }
    let e1 = d1.consecutive_edges();
    let e2 = d2.consecutive_edges();
    for c in 0..n - 1 {
        homotopic(
            &cross.forward[c + 1].compose(&e1[c])?,
            &e2[c].compose(&cross.forward[c])?,
            format!("naturality of forward on ({c},{})", c + 1),
        )?;
    }

    let mut stages = Vec::with_capacity(2 * n);
    let mut edges = Vec::with_capacity(2 * n - 1);
    #[allow(clippy::needless_range_loop)]
    for c in 0..n {
        stages.push(d1.stage(c).clone());
        stages.push(d2.stage(c).clone());
        edges.push(cross.forward[c].clone());
        if c + 1 < n {
            edges.push(e1[c].compose(&cross.backward[c])?);
        }
    }
    let doubled = DirectSystem::from_chain_level(&stages, &edges, 2 * n - 1)?.direct_limit();
    let first = d1.homology_system()?.direct_limit();
    let second = d2.homology_system()?.direct_limit();
    let agree = nonzero_betti(&first) == nonzero_betti(&second) && nonzero_betti(&first) == nonzero_betti(&doubled);
    Ok(InterleaveReport {
        first_limit: first,
        second_limit: second,
        doubled_limit: doubled,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::F2Matrix;
    use crate::random::{random_chain_map, random_complex, random_hom};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(v: &[usize]) -> PosetSimplex {
        PosetSimplex::new(v.to_vec()).unwrap()
    }

    fn point() -> Arc<GradedComplex> {
        Arc::new(GradedComplex::with_zero_differential([(0, 1)]))
    }

    #[test]
    fn strict_diagrams_validate() {
        let c = Arc::new(GradedComplex::new([(0, 2), (1, 1)], [(1, F2Matrix::from_rows_str(&["1", "1"]))]).unwrap());
        let stages = vec![c.clone(), c.clone(), c.clone()];
        let ids = vec![ChainMap::identity(c.clone()), ChainMap::identity(c.clone())];
        let d = make_strict(stages.clone(), ids).unwrap();
        assert!(d.validate().is_valid());
        assert!(d.is_strict());
        assert_eq!(d.maps().len(), 4);

        let zeros = vec![
            ChainMap::zero(c.clone(), c.clone(), 0),
            ChainMap::zero(c.clone(), c.clone(), 0),
        ];
        assert!(make_strict(stages, zeros).unwrap().validate().is_valid());
    }

    #[test]
    fn projection_edges_validate() {
        let a = Arc::new(GradedComplex::with_zero_differential([(0, 2)]));
        let p = ChainMap::new(a.clone(), a.clone(), 0, [(0, F2Matrix::from_rows_str(&["10", "00"]))]).unwrap();
        let d = make_strict(vec![a.clone(), a], vec![p]).unwrap();
        assert!(d.validate().is_valid());
    }

    #[test]
    fn make_strict_rejects_non_chain_maps() {
        let seg = Arc::new(GradedComplex::new([(0, 2), (1, 1)], [(1, F2Matrix::from_rows_str(&["1", "1"]))]).unwrap());
        let bad = ChainMap::new(
            seg.clone(),
            seg.clone(),
            0,
            [(0, F2Matrix::from_rows_str(&["10", "00"]))],
        )
        .unwrap();
        assert!(matches!(
            make_strict(vec![seg.clone(), seg], vec![bad]),
            Err(Error::NotAChainMap(_))
        ));
    }

    fn triangle_with(phi02: F2Matrix, phi012: Option<ChainMap>) -> PartialDiagram {
        let p = point();
        let mut maps = BTreeMap::new();
        let one = F2Matrix::identity(1);
        maps.insert(
            s(&[0, 1]),
            ChainMap::new(p.clone(), p.clone(), 0, [(0, one.clone())]).unwrap(),
        );
        maps.insert(s(&[1, 2]), ChainMap::new(p.clone(), p.clone(), 0, [(0, one)]).unwrap());
        maps.insert(
            s(&[0, 2]),
            ChainMap::new(p.clone(), p.clone(), 0, [(0, phi02)]).unwrap(),
        );
        if let Some(h) = phi012 {
            maps.insert(s(&[0, 1, 2]), h);
        }
        PartialDiagram::new(vec![p.clone(), p.clone(), p], maps).unwrap()
    }

    #[test]
    fn broken_triangle_is_reported() {
        let p = point();
        let d = triangle_with(F2Matrix::zeros(1, 1), Some(ChainMap::zero(p.clone(), p, 1)));
        let report = d.validate_stored();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].simplex, s(&[0, 1, 2]));
        // and the completion of its 1-truncation is obstructed
        let mut truncated = d.clone();
        truncated.maps.remove(&s(&[0, 1, 2]));
        match complete(&truncated, 2) {
            Err(Error::Obstruction { simplex, witness }) => {
                assert_eq!(simplex, s(&[0, 1, 2]));
                assert!(!witness.is_zero());
            }
            other => panic!("expected an obstruction, got {other:?}"),
        }
    }

    #[test]
    fn triangle_with_solved_homotopy_validates() {
        // C = segment, φ_01 = φ_12 = id, φ_02 = id + D(h)
        let c = Arc::new(GradedComplex::new([(0, 2), (1, 1)], [(1, F2Matrix::from_rows_str(&["1", "1"]))]).unwrap());
        let h = ChainMap::new(c.clone(), c.clone(), 1, [(0, F2Matrix::from_rows_str(&["10"]))]).unwrap();
        let id = ChainMap::identity(c.clone());
        let phi02 = id.add(&h.hom_differential()).unwrap();
        let mut maps = BTreeMap::new();
        maps.insert(s(&[0, 1]), id.clone());
        maps.insert(s(&[1, 2]), id.clone());
        maps.insert(s(&[0, 2]), phi02.clone());
        let partial = PartialDiagram::new(vec![c.clone(), c.clone(), c.clone()], maps).unwrap();
        let known = known_part(&partial, &[0, 1, 2]).unwrap();
        let solved = HomSpace::new(c.clone(), c.clone(), 1).solve_boundary(&known).unwrap();
        let mut full = partial.clone();
        full.insert(s(&[0, 1, 2]), solved).unwrap();
        assert!(full.validate_stored().is_valid());

        let completed = complete(&partial, 2).unwrap();
        assert!(completed.validate().is_valid());
        assert!(!completed.get(&s(&[0, 1, 2])).unwrap().is_zero());
    }

    #[test]
    fn strict_compatible_truncation_completes_with_zero_higher_maps() {
        let d = triangle_with(F2Matrix::identity(1), None);
        let c = complete(&d, 2).unwrap();
        assert!(c.validate().is_valid());
        assert!(c.get(&s(&[0, 1, 2])).unwrap().is_zero());
    }

    #[test]
    fn known_part_is_a_hom_cycle() {
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let partial = crate::random::random_partial_diagram(&mut rng, 4, 5);
            let d = complete(&partial, 2).unwrap();
            let mut p = PartialDiagram::new(d.stages().to_vec(), d.maps().clone()).unwrap();
            // with every map up to length 2 in place, the known part of each
            // 3-simplex must be annihilated by D
            for sigma in enumerate_simplices(3, 3).into_iter().filter(|s| s.len() == 3) {
                let k = known_part(&p, sigma.vertices()).unwrap();
                assert!(k.hom_differential().is_zero(), "seed {seed}, {sigma}");
            }
            p.maps.clear();
        }
    }

    #[test]
    fn completion_validates_on_random_data() {
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let partial = crate::random::random_partial_diagram(&mut rng, 4, 6);
            let d = complete(&partial, 3).unwrap();
            assert!(d.validate().is_valid(), "seed {seed}");
        }
    }

    #[test]
    fn completion_revises_lower_maps_when_needed() {
        // for this seed the solver's choice on the 2-simplices leaves a
        // non-boundary known part on (0,1,2,3)
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        let partial = crate::random::random_partial_diagram(&mut rng, 4, 6);
        let two = complete(&partial, 2).unwrap();
        let p2 = PartialDiagram::new(two.stages().to_vec(), two.maps().clone()).unwrap();
        let top = s(&[0, 1, 2, 3]);
        assert!(matches!(
            solve_level(&p2, std::slice::from_ref(&top)),
            Err(Error::Obstruction { .. })
        ));
        let three = complete(&partial, 3).unwrap();
        assert!(three.validate().is_valid());
        // edges are kept as given
        for (sigma, f) in partial.maps() {
            assert_eq!(three.get(sigma).unwrap(), f);
        }
    }

    #[test]
    fn product_extension_of_equal_diagrams() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let stages: Vec<_> = (0..3).map(|_| Arc::new(random_complex(&mut rng, 0..=2, 4))).collect();
        let edges: Vec<_> = (0..2)
            .map(|a| random_chain_map(&mut rng, &stages[a], &stages[a + 1]))
            .collect();
        let d = make_strict(stages, edges).unwrap();
        let ext = product_extension(&d, &d).unwrap();
        assert!(ext.validate(3).is_valid());
        for marker in 0..=1 {
            let r = ext.restrict(marker).unwrap();
            assert_eq!(r.maps(), d.maps());
        }
    }

    #[test]
    fn product_extension_detects_differing_edges() {
        let a = Arc::new(GradedComplex::with_zero_differential([(0, 1)]));
        let id = make_strict(vec![a.clone(), a.clone()], vec![ChainMap::identity(a.clone())]).unwrap();
        let zero = make_strict(
            vec![a.clone(), a.clone()],
            vec![ChainMap::zero(a.clone(), a.clone(), 0)],
        )
        .unwrap();
        let ext = product_extension(&id, &zero).unwrap();
        assert!(!ext.validate(2).is_valid());
        let b = Arc::new(GradedComplex::with_zero_differential([(0, 2)]));
        let other = make_strict(vec![b.clone(), b.clone()], vec![ChainMap::identity(b)]).unwrap();
        assert!(matches!(product_extension(&id, &other), Err(Error::StageMismatch(_))));
    }

    #[test]
    fn interleave_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stages: Vec<_> = (0..3).map(|_| Arc::new(random_complex(&mut rng, 0..=2, 4))).collect();
        let edges: Vec<_> = (0..2)
            .map(|a| random_chain_map(&mut rng, &stages[a], &stages[a + 1]))
            .collect();
        let d = make_strict(stages, edges).unwrap();
        let r = interleave_compare(&d, &d, &Interleaving::identities(&d)).unwrap();
        assert!(r.agree);
    }

    #[test]
    fn interleave_different_chain_models() {
        // C_c = F2 in degree 0; C'_c = F2 ⊕ (acyclic pair u -> v in degrees 1, 0)
        let small = Arc::new(GradedComplex::with_zero_differential([(0, 1)]));
        let big = Arc::new(GradedComplex::new([(0, 2), (1, 1)], [(1, F2Matrix::from_rows_str(&["0", "1"]))]).unwrap());
        let d1 = make_strict(vec![small.clone(); 3], vec![ChainMap::identity(small.clone()); 2]).unwrap();
        let d2 = make_strict(vec![big.clone(); 3], vec![ChainMap::identity(big.clone()); 2]).unwrap();
        let inc = ChainMap::new(
            small.clone(),
            big.clone(),
            0,
            [(0, F2Matrix::from_rows_str(&["1", "0"]))],
        )
        .unwrap();
        let proj = ChainMap::new(big.clone(), small.clone(), 0, [(0, F2Matrix::from_rows_str(&["10"]))]).unwrap();
        let cross = Interleaving {
            forward: vec![inc; 3],
            backward: vec![proj; 3],
        };
        let r = interleave_compare(&d1, &d2, &cross).unwrap();
        assert!(r.agree);
        assert_eq!(nonzero_betti(&r.first_limit), BTreeMap::from([(0, 1)]));
        // independently: each side's limit is the last stage's homology
        assert_eq!(
            nonzero_betti(&big.homology().unwrap().betti_numbers()),
            BTreeMap::from([(0, 1)])
        );
    }

    #[test]
    fn interleave_rejects_incompatible_systems() {
        let a = Arc::new(GradedComplex::with_zero_differential([(0, 1)]));
        let id = make_strict(vec![a.clone(), a.clone()], vec![ChainMap::identity(a.clone())]).unwrap();
        let zero = make_strict(
            vec![a.clone(), a.clone()],
            vec![ChainMap::zero(a.clone(), a.clone(), 0)],
        )
        .unwrap();
        // limits F2 and 0: no maps can interleave them
        let cross = Interleaving::identities(&id);
        assert!(matches!(
            interleave_compare(&id, &zero, &cross),
            Err(Error::InterleaveObstruction { .. })
        ));
        let zero_cross = Interleaving {
            forward: vec![ChainMap::zero(a.clone(), a.clone(), 0); 2],
            backward: vec![ChainMap::zero(a.clone(), a.clone(), 0); 2],
        };
        assert!(interleave_compare(&id, &zero, &zero_cross).is_err());
    }

    #[test]
    fn random_hom_has_requested_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = Arc::new(random_complex(&mut rng, 0..=2, 5));
        assert_eq!(random_hom(&mut rng, &c, &c, 1).degree(), 1);
    }
}
