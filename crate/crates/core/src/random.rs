//! Seeded generators for complexes, maps and diagrams, used by tests and
//! benchmarks.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::Rng;

use crate::complex::{ChainMap, Degree, GradedComplex, HomSpace};
use crate::diagram::{make_strict, CoherentDiagram, PartialDiagram};
use crate::f2::{F2Matrix, F2Vector};
use crate::nerve::PosetSimplex;
use crate::scenario::ExhaustionScenario;

/// The seed from `MT_SEED`, or `default` when unset or unparsable.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var("MT_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

fn random_vector<R: Rng>(rng: &mut R, len: usize) -> F2Vector {
    let mut v = F2Vector::zeros(len);
    for i in 0..len {
        if rng.gen_bool(0.5) {
            v.set(i, true);
        }
    }
    v
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> F2Matrix {
    let columns: Vec<F2Vector> = (0..cols).map(|_| random_vector(rng, rows)).collect();
    F2Matrix::from_columns(rows, &columns)
}

/// A random sum of the given vectors.
fn random_combination<R: Rng>(rng: &mut R, len: usize, basis: &[F2Vector]) -> F2Vector {
    let mut v = F2Vector::zeros(len);
    for b in basis {
        if rng.gen_bool(0.5) {
            v += b;
        }
    }
    v
}

/// A complex with at most `max_total_dim` generators spread over `degrees`.
/// Each column of `d_n` is a random cycle of degree `n - 1`, so `d^2 = 0`.
pub fn random_complex<R: Rng>(rng: &mut R, degrees: RangeInclusive<Degree>, max_total_dim: usize) -> GradedComplex {
    let (lo, hi) = (*degrees.start(), *degrees.end());
    let total = rng.gen_range(0..=max_total_dim);
    let mut dims: BTreeMap<Degree, usize> = BTreeMap::new();
    for _ in 0..total {
        *dims.entry(rng.gen_range(lo..=hi)).or_default() += 1;
    }
    let dim = |n: Degree| dims.get(&n).copied().unwrap_or(0);
    let mut diff: Vec<(Degree, F2Matrix)> = Vec::new();
    let mut below: Option<F2Matrix> = None; // d_{n-1}
    for n in lo..=hi {
        if n > lo {
            let cycles = match &below {
                Some(d) => d.kernel_basis(),
                None => (0..dim(n - 1)).map(|i| F2Vector::unit(dim(n - 1), i)).collect(),
            };
            let columns: Vec<F2Vector> = (0..dim(n))
                .map(|_| random_combination(rng, dim(n - 1), &cycles))
                .collect();
            let d = F2Matrix::from_columns(dim(n - 1), &columns);
            diff.push((n, d.clone()));
            below = Some(d);
        }
    }
    GradedComplex::new(dims.clone(), diff).expect("generated shapes are consistent")
}

/// A graded map with uniformly random blocks; usually not a chain map.
pub fn random_hom<R: Rng>(
    rng: &mut R,
    source: &Arc<GradedComplex>,
    target: &Arc<GradedComplex>,
    degree: Degree,
) -> ChainMap {
    let blocks: Vec<(Degree, F2Matrix)> = source
        .support()
        .map(|n| (n, random_matrix(rng, target.dim(n + degree), source.dim(n))))
        .collect();
    ChainMap::new(source.clone(), target.clone(), degree, blocks).expect("generated shapes are consistent")
}

/// A uniformly random degree 0 chain map.
pub fn random_chain_map<R: Rng>(rng: &mut R, source: &Arc<GradedComplex>, target: &Arc<GradedComplex>) -> ChainMap {
    let space = HomSpace::new(source.clone(), target.clone(), 0);
    let cycles: Vec<F2Vector> = space.cycle_basis().iter().map(|f| space.to_vector(f)).collect();
    space.from_vector(&random_combination(rng, space.dim(), &cycles))
}

pub fn random_stages<R: Rng>(rng: &mut R, count: usize, max_total_dim: usize) -> Vec<Arc<GradedComplex>> {
    (0..count)
        .map(|_| Arc::new(random_complex(rng, 0..=2, max_total_dim)))
        .collect()
}

/// Random consecutive chain maps between the given stages.
pub fn random_edges<R: Rng>(rng: &mut R, stages: &[Arc<GradedComplex>]) -> Vec<ChainMap> {
    stages.windows(2).map(|w| random_chain_map(rng, &w[0], &w[1])).collect()
}

pub fn random_strict_diagram<R: Rng>(rng: &mut R, stages: usize, max_total_dim: usize) -> CoherentDiagram {
    let stages = random_stages(rng, stages, max_total_dim);
    let edges = random_edges(rng, &stages);
    make_strict(stages, edges).expect("random chain maps form a strict diagram")
}

/// Random stages and edge maps for every pair `a < b`: consecutive edges are
/// random chain maps, longer edges are the composite plus a random
/// null-homotopic map, so a coherent completion exists.
pub fn random_partial_diagram<R: Rng>(rng: &mut R, stages: usize, max_total_dim: usize) -> PartialDiagram {
    let complexes = random_stages(rng, stages, max_total_dim);
    let edges = random_edges(rng, &complexes);
    let mut maps = BTreeMap::new();
    for a in 0..stages {
        for b in a + 1..stages {
            let mut f = edges[a].clone();
            for e in &edges[a + 1..b] {
                f = e.compose(&f).unwrap();
            }
            if b > a + 1 {
                let h = random_hom(rng, &complexes[a], &complexes[b], 1);
                f = f.add(&h.hom_differential()).unwrap();
            }
            maps.insert(PosetSimplex::edge(a, b).unwrap(), f);
        }
    }
    PartialDiagram::new(complexes, maps).expect("generated maps have consistent shapes")
}

/// A scenario with stages graded in `0..=dim_w` and random continuation
/// maps between consecutive stages.
pub fn random_scenario<R: Rng>(rng: &mut R, dim_w: usize, stages: usize, max_total_dim: usize) -> ExhaustionScenario {
    let complexes: Vec<_> = (0..stages)
        .map(|_| Arc::new(random_complex(rng, 0..=dim_w as Degree, max_total_dim)))
        .collect();
    let edges = random_edges(rng, &complexes)
        .into_iter()
        .enumerate()
        .map(|(a, f)| (PosetSimplex::edge(a, a + 1).unwrap(), f))
        .collect();
    ExhaustionScenario::new(dim_w, complexes, edges, BTreeMap::new()).expect("random scenarios are valid")
}
