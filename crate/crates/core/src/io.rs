//! JSON document shapes for complexes, graded maps, diagrams and scenarios.
//!
//! Matrices are written as lists of `[row, col]` positions holding a one,
//! keyed by degree. All maps are ordered, so output is byte-stable.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex::{ChainMap, Degree, GradedComplex};
use crate::error::{Error, Result};
use crate::f2::F2Matrix;

/// Sparse blocks keyed by (source) degree.
pub type BlocksDoc = BTreeMap<Degree, Vec<[usize; 2]>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub dims: BTreeMap<Degree, usize>,
    #[serde(default)]
    pub diff: BlocksDoc,
    #[serde(default)]
    pub labels: BTreeMap<Degree, Vec<String>>,
}

fn matrix_entries(m: &F2Matrix) -> Vec<[usize; 2]> {
    m.entries().into_iter().map(|(r, c)| [r, c]).collect()
}

fn matrix_from_entries(rows: usize, cols: usize, entries: &[[usize; 2]], what: &str) -> Result<F2Matrix> {
    F2Matrix::from_entries(rows, cols, entries.iter().map(|&[r, c]| (r, c)))
        .map_err(|(r, c)| Error::ShapeMismatch(format!("{what}: entry [{r},{c}] outside a {rows}x{cols} block")))
}

impl From<GradedComplex> for ComplexDoc {
    fn from(c: GradedComplex) -> Self {
        ComplexDoc {
            dims: c.dims().clone(),
            diff: c.nonzero_diffs().map(|(n, m)| (n, matrix_entries(m))).collect(),
            labels: c.labels().clone(),
        }
    }
}

impl TryFrom<ComplexDoc> for GradedComplex {
    type Error = Error;

    fn try_from(doc: ComplexDoc) -> Result<Self> {
        let dim = |n: Degree| doc.dims.get(&n).copied().unwrap_or(0);
        let mut diff = Vec::new();
        for (&n, entries) in &doc.diff {
            let what = format!("differential in degree {n}");
            diff.push((n, matrix_from_entries(dim(n - 1), dim(n), entries, &what)?));
        }
        GradedComplex::new(doc.dims.clone(), diff)?.with_labels(doc.labels)
    }
}

pub fn blocks_doc(f: &ChainMap) -> BlocksDoc {
    f.nonzero_blocks().map(|(n, m)| (n, matrix_entries(m))).collect()
}

pub fn chain_map_from_doc(
    source: Arc<GradedComplex>,
    target: Arc<GradedComplex>,
    degree: Degree,
    doc: &BlocksDoc,
) -> Result<ChainMap> {
    let mut blocks = Vec::new();
    for (&n, entries) in doc {
        let what = format!("block for source degree {n}");
        blocks.push((
            n,
            matrix_from_entries(target.dim(n + degree), source.dim(n), entries, &what)?,
        ));
    }
    ChainMap::new(source, target, degree, blocks)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDoc {
    pub index: usize,
    pub complex: GradedComplex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexMapDoc {
    pub simplex: Vec<usize>,
    pub blocks: BlocksDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: usize,
    pub to: usize,
    pub blocks: BlocksDoc,
}

/// A diagram file: stage complexes and maps for (some) simplices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramDoc {
    pub stages: Vec<StageDoc>,
    #[serde(default)]
    pub maps: Vec<SimplexMapDoc>,
}

/// A Morse exhaustion scenario file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub dim_w: usize,
    pub stages: Vec<StageDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub higher: Vec<SimplexMapDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inclusions: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub check_inclusions: bool,
}

/// Either kind of input file; scenarios are recognised by `dim_w`.
#[derive(Clone, Debug)]
pub enum InputDoc {
    Scenario(ScenarioDoc),
    Diagram(DiagramDoc),
}

pub fn parse_input(text: &str) -> Result<InputDoc> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("dim_w").is_some() {
        Ok(InputDoc::Scenario(serde_json::from_value(value)?))
    } else {
        Ok(InputDoc::Diagram(serde_json::from_value(value)?))
    }
}
