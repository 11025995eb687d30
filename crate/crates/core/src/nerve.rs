//! Simplices of the nerve of the stage poset `0 < 1 < 2 < ...` and of the
//! product category `stages × {0 ⇄ 1}`.
//!
//! Only nondegenerate simplices of the stage nerve are ever stored: a
//! simplex is a strictly increasing vertex chain `a_0 < ... < a_k`, and its
//! `i`-th morphism is `a_{i-1} -> a_i`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nondegenerate simplex of the stage nerve.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PosetSimplex(Vec<usize>);

impl PosetSimplex {
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing(vertices));
        }
        Ok(PosetSimplex(vertices))
    }

    pub fn vertex(a: usize) -> Self {
        PosetSimplex(vec![a])
    }

    pub fn edge(a: usize, b: usize) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Number of morphisms.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_vertex(&self) -> bool {
        self.0.len() == 1
    }

    pub fn source(&self) -> usize {
        self.0[0]
    }

    pub fn target(&self) -> usize {
        *self.0.last().expect("simplices are nonempty")
    }

    /// The `i`-th face: drops vertex `a_i`. Interior faces compose the
    /// `i`-th and `(i+1)`-th morphisms.
    pub fn face(&self, i: usize) -> Result<PosetSimplex> {
        let k = self.len();
        if k == 0 || i > k {
            return Err(Error::IndexOutOfRange { index: i, length: k });
        }
        let mut v = self.0.clone();
        v.remove(i);
        Ok(PosetSimplex(v))
    }

    /// `((a_0..a_i), (a_i..a_k))`: the first `i` morphisms and the last `k - i`.
    pub fn split(&self, i: usize) -> Result<(PosetSimplex, PosetSimplex)> {
        let k = self.len();
        if i > k {
            return Err(Error::IndexOutOfRange { index: i, length: k });
        }
        Ok((PosetSimplex(self.0[..=i].to_vec()), PosetSimplex(self.0[i..].to_vec())))
    }

    /// Concatenates over a shared vertex; `None` if the endpoints differ.
    pub fn join(&self, suffix: &PosetSimplex) -> Option<PosetSimplex> {
        if self.target() != suffix.source() {
            return None;
        }
        let mut v = self.0.clone();
        v.extend_from_slice(&suffix.0[1..]);
        Some(PosetSimplex(v))
    }

    /// Membership in the telescope subcomplex: a vertex, or a single step
    /// `a -> a + 1`.
    pub fn in_telescope_subcomplex(&self) -> bool {
        match self.0.as_slice() {
            [_] => true,
            [a, b] => *b == a + 1,
            _ => false,
        }
    }

    /// Image under the doubling functor `a ↦ 2a + parity`.
    pub fn doubled(&self, parity: usize) -> PosetSimplex {
        PosetSimplex(self.0.iter().map(|a| 2 * a + parity).collect())
    }
}

impl TryFrom<Vec<usize>> for PosetSimplex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        PosetSimplex::new(v)
    }
}

impl From<PosetSimplex> for Vec<usize> {
    fn from(s: PosetSimplex) -> Self {
        s.0
    }
}

impl fmt::Display for PosetSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for PosetSimplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Ordering used for bases: by length, then lexicographically.
pub fn simplex_order(a: &PosetSimplex, b: &PosetSimplex) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0))
}

/// All nondegenerate simplices with vertices in `0..=max_stage` and at most
/// `max_length` morphisms, in lexicographic order of vertex lists.
pub fn enumerate_simplices(max_stage: usize, max_length: usize) -> Vec<PosetSimplex> {
    fn extend(prefix: &mut Vec<usize>, max_stage: usize, max_length: usize, out: &mut Vec<PosetSimplex>) {
        out.push(PosetSimplex(prefix.clone()));
        if prefix.len() > max_length {
            return;
        }
        let last = *prefix.last().unwrap();
        for next in last + 1..=max_stage {
            prefix.push(next);
            extend(prefix, max_stage, max_length, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for a in 0..=max_stage {
        extend(&mut vec![a], max_stage, max_length, &mut out);
    }
    out
}

/// Simplices sorted by length first, as used for colimit bases.
pub fn simplices_by_length(max_stage: usize, max_length: usize) -> Vec<PosetSimplex> {
    let mut s = enumerate_simplices(max_stage, max_length);
    s.sort_by(simplex_order);
    s
}

/// A vertex of the product category: a stage and a copy marker in {0, 1}.
pub type ProductVertex = (usize, u8);

/// A chain of composable morphisms in `stages × {0 ⇄ 1}`, given by its
/// objects. Each step must not decrease the stage; the marker may move
/// either way, since the two-object factor has a morphism in each direction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProductSimplex(Vec<ProductVertex>);

impl ProductSimplex {
    pub fn new(vertices: Vec<ProductVertex>) -> Result<Self> {
        if vertices.is_empty() || vertices.iter().any(|&(_, m)| m > 1) || vertices.windows(2).any(|w| w[0].0 > w[1].0) {
            return Err(Error::InvalidDiagram(format!(
                "{vertices:?} is not a chain in the product category"
            )));
        }
        Ok(ProductSimplex(vertices))
    }

    pub fn vertices(&self) -> &[ProductVertex] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    /// Some morphism is an identity.
    pub fn is_degenerate(&self) -> bool {
        self.0.windows(2).any(|w| w[0] == w[1])
    }

    /// Number of nonidentity morphisms in the two-object factor.
    pub fn marker_changes(&self) -> usize {
        self.0.windows(2).filter(|w| w[0].1 != w[1].1).count()
    }

    pub fn face(&self, i: usize) -> Result<ProductSimplex> {
        let k = self.len();
        if k == 0 || i > k {
            return Err(Error::IndexOutOfRange { index: i, length: k });
        }
        let mut v = self.0.clone();
        v.remove(i);
        Ok(ProductSimplex(v))
    }

    /// Stage components with repeats removed.
    pub fn stage_simplex(&self) -> PosetSimplex {
        let mut v: Vec<usize> = self.0.iter().map(|p| p.0).collect();
        v.dedup();
        PosetSimplex(v)
    }
}

/// Nondegenerate product chains with stages in `0..=max_stage` and
/// `1..=max_length` morphisms.
pub fn enumerate_product_chains(max_stage: usize, max_length: usize) -> Vec<ProductSimplex> {
    fn extend(prefix: &mut Vec<ProductVertex>, max_stage: usize, max_length: usize, out: &mut Vec<ProductSimplex>) {
        if prefix.len() > 1 {
            out.push(ProductSimplex(prefix.clone()));
        }
        if prefix.len() > max_length {
            return;
        }
        let last = *prefix.last().unwrap();
        for stage in last.0..=max_stage {
            for marker in 0..=1u8 {
                if (stage, marker) == last {
                    continue;
                }
                prefix.push((stage, marker));
                extend(prefix, max_stage, max_length, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    for stage in 0..=max_stage {
        for marker in 0..=1u8 {
            extend(&mut vec![(stage, marker)], max_stage, max_length, &mut out);
        }
    }
    out
}
