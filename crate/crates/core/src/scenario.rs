//! Morse exhaustion scenarios: stage Morse complexes graded by index, with
//! continuation maps between stages and optional higher homotopies.
//!
//! Boundary and continuation matrices are taken as given (they stand for
//! mod 2 trajectory counts); everything algebraic about them is checked.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::colimit::{build_colimit, ColimitComplex, DirectSystem};
use crate::complex::{ChainMap, Degree, GradedComplex};
use crate::diagram::{complete, stages_from_docs, CoherentDiagram, PartialDiagram};
use crate::error::{Error, Result};
use crate::io::{blocks_doc, chain_map_from_doc, EdgeDoc, ScenarioDoc, SimplexMapDoc, StageDoc};
use crate::nerve::PosetSimplex;

#[derive(Clone, Debug)]
pub struct ExhaustionScenario {
    dim_w: usize,
    stages: Vec<Arc<GradedComplex>>,
    edges: BTreeMap<PosetSimplex, ChainMap>,
    higher: BTreeMap<PosetSimplex, ChainMap>,
    inclusions: BTreeMap<PosetSimplex, ChainMap>,
    check_inclusions: bool,
}

impl ExhaustionScenario {
    /// Checks every stage, edge and inclusion eagerly.
    pub fn new(
        dim_w: usize,
        stages: Vec<Arc<GradedComplex>>,
        edges: BTreeMap<PosetSimplex, ChainMap>,
        higher: BTreeMap<PosetSimplex, ChainMap>,
    ) -> Result<Self> {
        let s = ExhaustionScenario {
            dim_w,
            stages,
            edges,
            higher,
            inclusions: BTreeMap::new(),
            check_inclusions: false,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Validation("a scenario needs at least one stage".into()));
        }
        for (a, c) in self.stages.iter().enumerate() {
            let bad = c.check_d_squared();
            if !bad.is_empty() {
                return Err(Error::Validation(format!(
                    "stage {a}: d^2 != 0 in degree(s) {:?}",
                    bad.iter().map(|v| v.degree).collect::<Vec<_>>()
                )));
            }
            if let (Some(lo), Some(hi)) = (c.min_degree(), c.max_degree()) {
                if lo < 0 || hi > self.dim_w as Degree {
                    return Err(Error::Validation(format!(
                        "stage {a}: Morse indices must lie in [0, {}], found {lo}..{hi}",
                        self.dim_w
                    )));
                }
            }
        }
        for (sigma, f) in &self.edges {
            if sigma.len() != 1 {
                return Err(Error::Validation(format!("{sigma} is not an edge")));
            }
            if !f.is_chain_map().ok {
                return Err(Error::Validation(format!(
                    "continuation map on edge {sigma} is not a chain map"
                )));
            }
        }
        for a in 0..self.stages.len() - 1 {
            let e = PosetSimplex::edge(a, a + 1)?;
            if !self.edges.contains_key(&e) {
                return Err(Error::Validation(format!("missing continuation map on edge {e}")));
            }
        }
        for sigma in self.higher.keys() {
            if sigma.len() < 2 {
                return Err(Error::Validation(format!(
                    "higher map given on {sigma}, which has length < 2"
                )));
            }
        }
        if self.check_inclusions {
            for (sigma, f) in &self.inclusions {
                for n in f.source().support() {
                    if f.block(n).rank() != f.source().dim(n) {
                        return Err(Error::Validation(format!(
                            "inclusion on {sigma} is not injective in degree {n}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim_w(&self) -> usize {
        self.dim_w
    }

    pub fn stages(&self) -> &[Arc<GradedComplex>] {
        &self.stages
    }

    pub fn max_stage(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn edges(&self) -> &BTreeMap<PosetSimplex, ChainMap> {
        &self.edges
    }

    pub fn higher(&self) -> &BTreeMap<PosetSimplex, ChainMap> {
        &self.higher
    }

    pub fn inclusions(&self) -> &BTreeMap<PosetSimplex, ChainMap> {
        &self.inclusions
    }

    /// The continuation maps `C_a -> C_{a+1}`.
    pub fn consecutive_edges(&self) -> Vec<ChainMap> {
        (0..self.max_stage())
            .map(|a| self.edges[&PosetSimplex::edge(a, a + 1).unwrap()].clone())
            .collect()
    }

    /// Keeps the stages `0..=max_stage` and the data supported on them.
    pub fn truncate(&self, max_stage: usize) -> ExhaustionScenario {
        let keep = |m: &BTreeMap<PosetSimplex, ChainMap>| -> BTreeMap<PosetSimplex, ChainMap> {
            m.iter()
                .filter(|(s, _)| s.target() <= max_stage)
                .map(|(s, f)| (s.clone(), f.clone()))
                .collect()
        };
        ExhaustionScenario {
            dim_w: self.dim_w,
            stages: self.stages[..=max_stage.min(self.max_stage())].to_vec(),
            edges: keep(&self.edges),
            higher: keep(&self.higher),
            inclusions: keep(&self.inclusions),
            check_inclusions: self.check_inclusions,
        }
    }

    /// Edges and pinned higher maps.
    pub fn partial_diagram(&self) -> Result<PartialDiagram> {
        let maps = self
            .edges
            .iter()
            .chain(&self.higher)
            .map(|(s, f)| (s.clone(), f.clone()))
            .collect();
        PartialDiagram::new(self.stages.clone(), maps)
    }

    /// The coherent diagram with every missing map of length
    /// `<= max_length` solved for (all lengths by default).
    pub fn diagram(&self, max_length: Option<usize>) -> Result<CoherentDiagram> {
        complete(&self.partial_diagram()?, max_length.unwrap_or(self.max_stage()))
    }

    pub fn homology_system(&self, stabilize_at: Option<usize>) -> Result<DirectSystem> {
        DirectSystem::from_chain_level(
            &self.stages,
            &self.consecutive_edges(),
            stabilize_at.unwrap_or(self.max_stage()),
        )
    }

    pub fn from_doc(doc: &ScenarioDoc) -> Result<Self> {
        let stages = stages_from_docs(&doc.stages)?;
        let edge_map = |e: &EdgeDoc, what: &str| -> Result<(PosetSimplex, ChainMap)> {
            let sigma = PosetSimplex::new(vec![e.from, e.to])
                .map_err(|_| Error::Validation(format!("{what} from {} to {} does not go forward", e.from, e.to)))?;
            let (Some(s), Some(t)) = (stages.get(e.from), stages.get(e.to)) else {
                return Err(Error::Validation(format!("{what} {sigma} leaves the stage range")));
            };
            let f = chain_map_from_doc(s.clone(), t.clone(), 0, &e.blocks)
                .map_err(|err| Error::Validation(format!("{what} {sigma}: {err}")))?;
            Ok((sigma, f))
        };
        let mut edges = BTreeMap::new();
        for e in &doc.edges {
            let (sigma, f) = edge_map(e, "edge")?;
            if edges.insert(sigma.clone(), f).is_some() {
                return Err(Error::Validation(format!("edge {sigma} given twice")));
            }
        }
        let mut inclusions = BTreeMap::new();
        for e in &doc.inclusions {
            let (sigma, f) = edge_map(e, "inclusion")?;
            inclusions.insert(sigma, f);
        }
        let mut higher = BTreeMap::new();
        for m in &doc.higher {
            let sigma = PosetSimplex::new(m.simplex.clone())?;
            let (Some(s), Some(t)) = (stages.get(sigma.source()), stages.get(sigma.target())) else {
                return Err(Error::Validation(format!(
                    "higher map on {sigma} leaves the stage range"
                )));
            };
            let f = chain_map_from_doc(s.clone(), t.clone(), sigma.len() as Degree - 1, &m.blocks)
                .map_err(|err| Error::Validation(format!("higher map on {sigma}: {err}")))?;
            higher.insert(sigma, f);
        }
        let s = ExhaustionScenario {
            dim_w: doc.dim_w,
            stages,
            edges,
            higher,
            inclusions,
            check_inclusions: doc.check_inclusions,
        };
        s.check()?;
        Ok(s)
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        let edge_docs = |m: &BTreeMap<PosetSimplex, ChainMap>| -> Vec<EdgeDoc> {
            m.iter()
                .map(|(s, f)| EdgeDoc {
                    from: s.source(),
                    to: s.target(),
                    blocks: blocks_doc(f),
                })
                .collect()
        };
        ScenarioDoc {
            dim_w: self.dim_w,
            stages: self
                .stages
                .iter()
                .enumerate()
                .map(|(index, c)| StageDoc {
                    index,
                    complex: (**c).clone(),
                })
                .collect(),
            edges: edge_docs(&self.edges),
            higher: self
                .higher
                .iter()
                .map(|(s, f)| SimplexMapDoc {
                    simplex: s.vertices().to_vec(),
                    blocks: blocks_doc(f),
                })
                .collect(),
            inclusions: edge_docs(&self.inclusions),
            check_inclusions: self.check_inclusions,
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<ExhaustionScenario> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    ExhaustionScenario::from_doc(&doc)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ExhaustionScenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Direct limit of the stage Morse homologies along the continuation maps.
pub fn morse_homology_limit(s: &ExhaustionScenario) -> Result<BTreeMap<Degree, usize>> {
    Ok(s.homology_system(None)?.direct_limit())
}

/// The colimit complex of the completed scenario diagram, graded by
/// simplex length plus Morse index.
pub fn morse_chain_model(s: &ExhaustionScenario) -> Result<ColimitComplex> {
    build_colimit(&s.diagram(None)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub dim_w: usize,
    /// Maps on simplices longer than this must vanish.
    pub bound: usize,
    pub checked: usize,
    pub violations: Vec<PosetSimplex>,
}

impl VanishingReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every map on a simplex of length `k > 1 + dim W` is zero:
/// it has degree `k - 1 > dim W`, while the complexes live in degrees
/// `0..=dim W`.
pub fn vanishing_check_maps<'a>(
    dim_w: usize,
    maps: impl IntoIterator<Item = (&'a PosetSimplex, &'a ChainMap)>,
) -> VanishingReport {
    let bound = dim_w + 1;
    let mut checked = 0;
    let mut violations = Vec::new();
    for (sigma, f) in maps {
        if sigma.len() > bound {
            checked += 1;
            if !f.is_zero() {
                violations.push(sigma.clone());
            }
        }
    }
    VanishingReport {
        dim_w,
        bound,
        checked,
        violations,
    }
}

/// [`vanishing_check_maps`] on the pinned and the completed maps.
pub fn vanishing_check(s: &ExhaustionScenario) -> Result<VanishingReport> {
    let d = s.diagram(None)?;
    let mut report = vanishing_check_maps(s.dim_w, d.maps());
    let pinned = vanishing_check_maps(s.dim_w, s.higher());
    report.checked += pinned.checked;
    for v in pinned.violations {
        if !report.violations.contains(&v) {
            report.violations.push(v);
        }
    }
    Ok(report)
}
