//! Explicit homotopy-colimit models: the colimit complex over the nerve,
//! the mapping telescope, and direct limits of homology.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::complex::{nonzero_betti, ChainMap, Degree, GradedComplex};
use crate::diagram::{coherence_residual, CoherentDiagram, MapLookup};
use crate::error::{Error, Result};
use crate::f2::{span_dim, F2Matrix, F2Vector};
use crate::nerve::{simplex_order, simplices_by_length, PosetSimplex};

/// A generator `(σ; x)` of the colimit: `x` is generator `index` of
/// `C_{sσ}` in degree `stage_degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub simplex: PosetSimplex,
    pub stage_degree: Degree,
    pub index: usize,
}

impl Cell {
    pub fn total_degree(&self) -> Degree {
        self.simplex.len() as Degree + self.stage_degree
    }
}

/// The colimit complex: one shifted copy of `C_{sσ}` for each simplex `σ`,
/// in degree `|σ| + |x|`, with differential
///
/// ```text
/// ∂(σ; x) = Σ_{i=1..k} (∂_i σ; x) + Σ_{i=1..k} (σ[i..k]; φ_{σ[0..i]}(x)) + (σ; ∂x)
/// ```
///
/// Cells are ordered by simplex (length, then lexicographic), then by stage
/// generator.
#[derive(Clone, Debug)]
pub struct ColimitComplex {
    underlying: Arc<GradedComplex>,
    cells: BTreeMap<Degree, Vec<Cell>>,
    offsets: HashMap<(PosetSimplex, Degree), usize>,
    simplices: Vec<PosetSimplex>,
    diagram: CoherentDiagram,
}

impl ColimitComplex {
    pub fn underlying(&self) -> &Arc<GradedComplex> {
        &self.underlying
    }

    pub fn diagram(&self) -> &CoherentDiagram {
        &self.diagram
    }

    /// The cells of total degree `n`, in basis order.
    pub fn cells(&self, n: Degree) -> &[Cell] {
        self.cells.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn position(&self, simplex: &PosetSimplex, stage_degree: Degree, index: usize) -> Option<usize> {
        self.offsets.get(&(simplex.clone(), stage_degree)).map(|o| o + index)
    }

    pub fn simplices(&self) -> &[PosetSimplex] {
        &self.simplices
    }

    pub fn contains(&self, simplex: &PosetSimplex) -> bool {
        self.simplices.binary_search_by(|s| simplex_order(s, simplex)).is_ok()
    }

    pub fn homology_betti(&self) -> Result<BTreeMap<Degree, usize>> {
        Ok(nonzero_betti(&self.underlying.homology()?.betti_numbers()))
    }
}

/// The colimit over every simplex of the diagram.
pub fn build_colimit(d: &CoherentDiagram) -> Result<ColimitComplex> {
    let simplices = simplices_by_length(d.max_stage(), d.max_length());
    build_colimit_over(d, simplices)
}

/// The colimit over vertices and consecutive edges only: the nerve of the
/// stage poset replaced by its telescope-shaped subcomplex.
pub fn build_telescope_shaped_colimit(d: &CoherentDiagram) -> Result<ColimitComplex> {
    let simplices = simplices_by_length(d.max_stage(), d.max_length().min(1))
        .into_iter()
        .filter(PosetSimplex::in_telescope_subcomplex)
        .collect();
    build_colimit_over(d, simplices)
}

/// The colimit over a set of simplices closed under inner faces, the last
/// face and suffixes.
fn build_colimit_over(d: &CoherentDiagram, simplices: Vec<PosetSimplex>) -> Result<ColimitComplex> {
    let report = d.validate();
    if !report.is_valid() {
        let at: Vec<String> = report
            .violations
            .iter()
            .map(|v| v.simplex.to_string())
            .chain(report.unchecked.iter().map(ToString::to_string))
            .collect();
        return Err(Error::InvalidDiagram(format!("coherence fails at {}", at.join(", "))));
    }

    let mut cells: BTreeMap<Degree, Vec<Cell>> = BTreeMap::new();
    let mut offsets = HashMap::new();
    for sigma in &simplices {
        let c = d.stage(sigma.source());
        for (&m, &dim) in c.dims() {
            let n = sigma.len() as Degree + m;
            let list = cells.entry(n).or_default();
            offsets.insert((sigma.clone(), m), list.len());
            list.extend((0..dim).map(|index| Cell {
                simplex: sigma.clone(),
                stage_degree: m,
                index,
            }));
        }
    }
    let position = |s: &PosetSimplex, m: Degree, j: usize| -> Result<usize> {
        offsets
            .get(&(s.clone(), m))
            .map(|o| o + j)
            .ok_or_else(|| Error::InvalidDiagram(format!("simplex set is not closed: {s} missing")))
    };

    let mut entries: BTreeMap<Degree, Vec<(usize, usize)>> = BTreeMap::new();
    for sigma in &simplices {
        let k = sigma.len();
        let src = d.stage(sigma.source());
        let faces: Vec<PosetSimplex> = (1..=k).map(|i| sigma.face(i)).collect::<Result<_>>()?;
        let transports: Vec<(PosetSimplex, ChainMap)> = (1..=k)
            .map(|i| {
                let (prefix, suffix) = sigma.split(i)?;
                Ok((suffix, d.get(&prefix)?.clone()))
            })
            .collect::<Result<_>>()?;
        for (&m, &dim) in src.dims() {
            let n = sigma.len() as Degree + m;
            let dx = src.diff(m);
            let col_base = offsets[&(sigma.clone(), m)];
            let out = entries.entry(n).or_default();
            for j in 0..dim {
                let col = col_base + j;
                for f in &faces {
                    out.push((position(f, m, j)?, col));
                }
                for (suffix, phi) in &transports {
                    let block = phi.block(m);
                    let tm = m + phi.degree();
                    for r in 0..block.rows() {
                        if block.get(r, j) {
                            out.push((position(suffix, tm, r)?, col));
                        }
                    }
                }
                for r in 0..dx.rows() {
                    if dx.get(r, j) {
                        out.push((position(sigma, m - 1, r)?, col));
                    }
                }
            }
        }
    }

    let dims: BTreeMap<Degree, usize> = cells.iter().map(|(&n, c)| (n, c.len())).collect();
    let dim = |n: Degree| dims.get(&n).copied().unwrap_or(0);
    let mut diff = Vec::new();
    for (n, e) in entries {
        let m = F2Matrix::from_entries(dim(n - 1), dim(n), e).expect("cell positions are in range");
        diff.push((n, m));
    }
    let underlying = GradedComplex::new(dims, diff)?;
    let bad = underlying.check_d_squared();
    if !bad.is_empty() {
        return Err(Error::InvalidDiagram(format!(
            "colimit differential squares to a nonzero map in degree(s) {:?}",
            bad.iter().map(|v| v.degree).collect::<Vec<_>>()
        )));
    }
    Ok(ColimitComplex {
        underlying: Arc::new(underlying),
        cells,
        offsets,
        simplices,
        diagram: d.clone(),
    })
}

/// The subcomplex spanned by cells `(σ; x)` with `|σ| <= n`.
pub fn filtration_complex(c: &ColimitComplex, n: usize) -> GradedComplex {
    let keep = |degree: Degree| -> Vec<usize> {
        c.cells(degree)
            .iter()
            .enumerate()
            .filter(|(_, cell)| cell.simplex.len() <= n)
            .map(|(i, _)| i)
            .collect()
    };
    let kept: BTreeMap<Degree, Vec<usize>> = c
        .cells
        .keys()
        .map(|&d| (d, keep(d)))
        .filter(|(_, v)| !v.is_empty())
        .collect();
    let dims: BTreeMap<Degree, usize> = kept.iter().map(|(&d, v)| (d, v.len())).collect();
    let none = Vec::new();
    let diff: Vec<(Degree, F2Matrix)> = kept
        .iter()
        .map(|(&d, cols)| {
            let rows = kept.get(&(d - 1)).unwrap_or(&none);
            (d, c.underlying.diff(d).select(rows, cols))
        })
        .collect();
    GradedComplex::new(dims, diff).expect("selected blocks have consistent shapes")
}

/// The degree `|σ|` map `C_{sσ} -> C̃`, `x ↦ (σ; x)`.
pub fn cone_structure_map(c: &ColimitComplex, sigma: &PosetSimplex) -> Result<ChainMap> {
    if !c.contains(sigma) {
        return Err(Error::UnknownSimplex(sigma.clone()));
    }
    let src = c.diagram.stage(sigma.source()).clone();
    let k = sigma.len() as Degree;
    let blocks: Vec<(Degree, F2Matrix)> = src
        .dims()
        .iter()
        .map(|(&m, &dim)| {
            let base = c.offsets[&(sigma.clone(), m)];
            let entries = (0..dim).map(|j| (base + j, j));
            (
                m,
                F2Matrix::from_entries(c.underlying.dim(m + k), dim, entries).expect("positions in range"),
            )
        })
        .collect();
    ChainMap::new(src, c.underlying.clone(), k, blocks)
}

/// A vertex of the nerve with a cone point appended after every stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeVertex {
    Stage(usize),
    Cone,
}

struct ConeLookup<'a>(&'a ColimitComplex);

impl MapLookup for ConeLookup<'_> {
    type Vertex = ConeVertex;

    fn complex(&self, v: &ConeVertex) -> Result<Arc<GradedComplex>> {
        match v {
            ConeVertex::Stage(a) => self.0.diagram.complex(a),
            ConeVertex::Cone => Ok(self.0.underlying.clone()),
        }
    }

    fn map(&self, chain: &[ConeVertex]) -> Result<ChainMap> {
        let stages: Vec<usize> = chain
            .iter()
            .filter_map(|v| match v {
                ConeVertex::Stage(a) => Some(*a),
                ConeVertex::Cone => None,
            })
            .collect();
        let sigma = PosetSimplex::new(stages)?;
        if chain.last() == Some(&ConeVertex::Cone) {
            cone_structure_map(self.0, &sigma)
        } else {
            self.0.diagram.get(&sigma).cloned()
        }
    }
}

/// Residual of the coherence relation on `σ` followed by the cone point,
/// with the structure maps as the maps into the cone. Zero for every `σ`
/// of the diagram.
pub fn cone_relation_residual(c: &ColimitComplex, sigma: &PosetSimplex) -> Result<ChainMap> {
    let mut chain: Vec<ConeVertex> = sigma.vertices().iter().map(|&a| ConeVertex::Stage(a)).collect();
    chain.push(ConeVertex::Cone);
    coherence_residual(&ConeLookup(c), &chain)
}

/// The mapping telescope of `C_0 -> C_1 -> ... -> C_N`: plain copies of
/// every `C_i` followed by barred copies `C̄_i`, `i < N`, shifted up one
/// degree, with `∂(x̄) = x + ψ_i(x) + (∂x)‾`.
#[derive(Clone, Debug)]
pub struct TelescopeComplex {
    underlying: Arc<GradedComplex>,
    stages: Vec<Arc<GradedComplex>>,
    edges: Vec<ChainMap>,
    plain: HashMap<(usize, Degree), usize>,
    bar: HashMap<(usize, Degree), usize>,
}

impl TelescopeComplex {
    pub fn underlying(&self) -> &Arc<GradedComplex> {
        &self.underlying
    }

    pub fn stages(&self) -> &[Arc<GradedComplex>] {
        &self.stages
    }

    pub fn edges(&self) -> &[ChainMap] {
        &self.edges
    }

    /// Position of generator `j` of `C_i` in degree `n`.
    pub fn plain_position(&self, i: usize, n: Degree, j: usize) -> Option<usize> {
        self.plain.get(&(i, n)).map(|o| o + j)
    }

    /// Position of the bar of generator `j` of `C_i` in degree `n`; it lies
    /// in total degree `n + 1`.
    pub fn bar_position(&self, i: usize, n: Degree, j: usize) -> Option<usize> {
        self.bar.get(&(i, n)).map(|o| o + j)
    }

    pub fn homology_betti(&self) -> Result<BTreeMap<Degree, usize>> {
        Ok(nonzero_betti(&self.underlying.homology()?.betti_numbers()))
    }

    /// Mask of the plain coordinates in total degree `n`.
    fn is_plain(&self, n: Degree) -> Vec<bool> {
        let mut mask = vec![false; self.underlying.dim(n)];
        for (i, c) in self.stages.iter().enumerate() {
            if let Some(&o) = self.plain.get(&(i, n)) {
                mask[o..o + c.dim(n)].iter_mut().for_each(|b| *b = true);
            }
        }
        mask
    }
}

pub fn build_telescope(stages: Vec<Arc<GradedComplex>>, edges: Vec<ChainMap>) -> Result<TelescopeComplex> {
    if stages.is_empty() || edges.len() + 1 != stages.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} stages need {} edges, got {}",
            stages.len(),
            stages.len().saturating_sub(1),
            edges.len()
        )));
    }
    for (i, e) in edges.iter().enumerate() {
        if e.degree() != 0 || e.source().dims() != stages[i].dims() || e.target().dims() != stages[i + 1].dims() {
            return Err(Error::ShapeMismatch(format!(
                "edge ({i},{}) has the wrong shape",
                i + 1
            )));
        }
        if !e.is_chain_map().ok {
            return Err(Error::NotAChainMap(format!("edge ({i},{})", i + 1)));
        }
    }

    let mut dims: BTreeMap<Degree, usize> = BTreeMap::new();
    let mut plain = HashMap::new();
    let mut bar = HashMap::new();
    for (i, c) in stages.iter().enumerate() {
        for (&n, &d) in c.dims() {
            let slot = dims.entry(n).or_default();
            plain.insert((i, n), *slot);
            *slot += d;
        }
    }
    for (i, c) in stages[..stages.len() - 1].iter().enumerate() {
        for (&n, &d) in c.dims() {
            let slot = dims.entry(n + 1).or_default();
            bar.insert((i, n), *slot);
            *slot += d;
        }
    }

    let mut entries: BTreeMap<Degree, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, c) in stages.iter().enumerate() {
        for (&n, &d) in c.dims() {
            let dx = c.diff(n);
            for j in 0..d {
                let col = plain[&(i, n)] + j;
                let out = entries.entry(n).or_default();
                for r in (0..dx.rows()).filter(|&r| dx.get(r, j)) {
                    out.push((plain[&(i, n - 1)] + r, col));
                }
                if i + 1 == stages.len() {
                    continue;
                }
                let col = bar[&(i, n)] + j;
                let out = entries.entry(n + 1).or_default();
                out.push((plain[&(i, n)] + j, col));
                let psi = edges[i].block(n);
                for r in (0..psi.rows()).filter(|&r| psi.get(r, j)) {
                    out.push((plain[&(i + 1, n)] + r, col));
                }
                for r in (0..dx.rows()).filter(|&r| dx.get(r, j)) {
                    out.push((bar[&(i, n - 1)] + r, col));
                }
            }
        }
    }
    let dim = |n: Degree| dims.get(&n).copied().unwrap_or(0);
    let diff: Vec<(Degree, F2Matrix)> = entries
        .into_iter()
        .map(|(n, e)| {
            (
                n,
                F2Matrix::from_entries(dim(n - 1), dim(n), e).expect("positions in range"),
            )
        })
        .collect();
    let underlying = GradedComplex::new(dims.clone(), diff)?;
    assert!(
        underlying.check_d_squared().is_empty(),
        "telescope differential must square to zero for chain-map edges"
    );
    Ok(TelescopeComplex {
        underlying: Arc::new(underlying),
        stages,
        edges,
        plain,
        bar,
    })
}

/// A sequence of finite-dimensional graded spaces with maps
/// `H_i -> H_{i+1}`, declared stable from index `stabilize_at` on.
#[derive(Clone, Debug)]
pub struct DirectSystem {
    spaces: Vec<BTreeMap<Degree, usize>>,
    maps: Vec<BTreeMap<Degree, F2Matrix>>,
    stabilize_at: usize,
}

impl DirectSystem {
    pub fn new(
        spaces: Vec<BTreeMap<Degree, usize>>,
        maps: Vec<BTreeMap<Degree, F2Matrix>>,
        stabilize_at: usize,
    ) -> Result<Self> {
        if spaces.is_empty() || maps.len() + 1 != spaces.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} spaces with {} maps",
                spaces.len(),
                maps.len()
            )));
        }
        if stabilize_at >= spaces.len() {
            return Err(Error::Validation(format!(
                "stabilization index {stabilize_at} is beyond the last stage {}",
                spaces.len() - 1
            )));
        }
        let dim = |i: usize, n: Degree| spaces[i].get(&n).copied().unwrap_or(0);
        for (i, m) in maps.iter().enumerate() {
            for (&n, block) in m {
                if block.shape() != (dim(i + 1, n), dim(i, n)) {
                    return Err(Error::ShapeMismatch(format!("map {i} -> {} in degree {n}", i + 1)));
                }
            }
        }
        // the stabilization assertion is checked on every map that is given
        for i in stabilize_at..maps.len() {
            let degrees: std::collections::BTreeSet<Degree> =
                spaces[i].keys().chain(spaces[i + 1].keys()).copied().collect();
            for n in degrees {
                let (a, b) = (dim(i, n), dim(i + 1, n));
                let rank = maps[i].get(&n).map_or(0, F2Matrix::rank);
                if a != b || rank != a {
                    return Err(Error::Validation(format!(
                        "map {i} -> {} is not an isomorphism in degree {n}, so the system is not stable from {stabilize_at}",
                        i + 1
                    )));
                }
            }
        }
        let spaces = spaces.iter().map(nonzero_betti).collect();
        Ok(DirectSystem {
            spaces,
            maps,
            stabilize_at,
        })
    }

    /// Stage homologies and the maps induced by `edges`.
    pub fn from_chain_level(stages: &[Arc<GradedComplex>], edges: &[ChainMap], stabilize_at: usize) -> Result<Self> {
        let homologies = stages.iter().map(|c| c.homology()).collect::<Result<Vec<_>>>()?;
        let mut maps = Vec::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            maps.push(e.induced_on_homology_with(&homologies[i], &homologies[i + 1])?);
        }
        DirectSystem::new(
            homologies.iter().map(|h| h.betti_numbers()).collect(),
            maps,
            stabilize_at,
        )
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn stabilize_at(&self) -> usize {
        self.stabilize_at
    }

    pub fn dim(&self, i: usize, n: Degree) -> usize {
        self.spaces[i].get(&n).copied().unwrap_or(0)
    }

    pub fn map(&self, i: usize, n: Degree) -> F2Matrix {
        self.maps[i]
            .get(&n)
            .cloned()
            .unwrap_or_else(|| F2Matrix::zeros(self.dim(i + 1, n), self.dim(i, n)))
    }

    fn degrees(&self) -> std::collections::BTreeSet<Degree> {
        self.spaces[..=self.stabilize_at]
            .iter()
            .flat_map(|s| s.keys().copied())
            .collect()
    }

    /// Rank of the relations `x + ψ_{i*} x`, `i < stabilize_at`, inside
    /// `⊕_{i <= stabilize_at} H_i` in degree `n`.
    pub fn relation_rank(&self, n: Degree) -> usize {
        let last = self.stabilize_at;
        let offsets: Vec<usize> = (0..=last)
            .scan(0, |acc, i| {
                let o = *acc;
                *acc += self.dim(i, n);
                Some(o)
            })
            .collect();
        let total = offsets[last] + self.dim(last, n);
        let mut relations = Vec::new();
        for i in 0..last {
            let psi = self.map(i, n);
            for j in 0..self.dim(i, n) {
                let mut v = F2Vector::zeros(total);
                v.set(offsets[i] + j, true);
                for r in psi.column(j).ones() {
                    v.flip(offsets[i + 1] + r);
                }
                relations.push(v);
            }
        }
        span_dim(total, &relations)
    }

    /// `(⊕_{i <= N} H_i) / ⟨x + ψ_{i*} x⟩` per degree, zero degrees omitted.
    pub fn direct_limit(&self) -> BTreeMap<Degree, usize> {
        self.degrees()
            .into_iter()
            .map(|n| {
                let total: usize = (0..=self.stabilize_at).map(|i| self.dim(i, n)).sum();
                (n, total - self.relation_rank(n))
            })
            .filter(|&(_, d)| d > 0)
            .collect()
    }
}

/// Per-degree outcome of [`verify_telescope_lemma`].
#[derive(Clone, Debug, Serialize)]
pub struct LemmaDegree {
    pub degree: Degree,
    pub cycles: usize,
    /// `dim(ker ∂^o + im ∂^T)`.
    pub plain_cycles_plus_boundaries: usize,
    /// `dim((ker ∂^o ∩ im ∂^T) / im ∂^o)`.
    pub plain_boundary_quotient: usize,
    pub relation_rank: usize,
    pub first: bool,
    pub second: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub degrees: Vec<LemmaDegree>,
    pub holds: bool,
}

/// Checks, degree by degree, that every telescope cycle is a plain cycle
/// up to a boundary, and that plain cycles bounding in the telescope form,
/// modulo plain boundaries, a space of the dimension of the relation span
/// `⟨x + ψ_{i*} x⟩`.
pub fn verify_telescope_lemma(t: &TelescopeComplex) -> Result<LemmaReport> {
    let total = &t.underlying;
    let system = DirectSystem::from_chain_level(&t.stages, &t.edges, t.stages.len() - 1)?;
    let degrees: std::collections::BTreeSet<Degree> = total.support().collect();
    let mut out = Vec::new();
    for n in degrees {
        let dim = total.dim(n);
        let mask = t.is_plain(n);
        let cycles = total.diff(n).kernel_basis();
        let boundaries = total.diff(n + 1).image_basis();
        // ∂^o: the telescope differential restricted to plain generators,
        // which stays inside the plain part.
        let plain_cols: Vec<usize> = (0..dim).filter(|&i| mask[i]).collect();
        let d = total.diff(n);
        let below = t.is_plain(n - 1);
        let plain_rows: Vec<usize> = (0..d.rows()).filter(|&i| below[i]).collect();
        let d_plain = d.select(&plain_rows, &plain_cols);
        let embed = |v: &F2Vector| {
            let mut e = F2Vector::zeros(dim);
            for i in v.ones() {
                e.set(plain_cols[i], true);
            }
            e
        };
        let plain_cycles: Vec<F2Vector> = d_plain.kernel_basis().iter().map(embed).collect();
        let above_plain: Vec<usize> = (0..total.dim(n + 1)).filter(|&i| t.is_plain(n + 1)[i]).collect();
        let plain_boundaries_dim = total
            .diff(n + 1)
            .select(&(0..dim).collect::<Vec<_>>(), &above_plain)
            .rank();

        let sum: Vec<F2Vector> = plain_cycles.iter().chain(&boundaries).cloned().collect();
        let sum_dim = span_dim(dim, &sum);
        let intersection = plain_cycles.len() + boundaries.len() - sum_dim;
        let quotient = intersection - plain_boundaries_dim;
        let relation_rank = system.relation_rank(n);
        let first = cycles.len() == sum_dim && span_dim(dim, &[cycles.clone(), sum].concat()) == cycles.len();
        let second = quotient == relation_rank;
        out.push(LemmaDegree {
            degree: n,
            cycles: cycles.len(),
            plain_cycles_plus_boundaries: sum_dim,
            plain_boundary_quotient: quotient,
            relation_rank,
            first,
            second,
        });
    }
    let holds = out.iter().all(|d| d.first && d.second);
    Ok(LemmaReport { degrees: out, holds })
}

/// The three homology computations for a coherent diagram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonReport {
    pub colimit_betti: BTreeMap<Degree, usize>,
    pub telescope_betti: BTreeMap<Degree, usize>,
    pub direct_limit: BTreeMap<Degree, usize>,
    pub agree: bool,
}

pub fn compare_homologies(d: &CoherentDiagram) -> Result<ComparisonReport> {
    compare_homologies_at(d, d.max_stage())
}

/// As [`compare_homologies`], with the direct limit taken up to
/// `stabilize_at`.
pub fn compare_homologies_at(d: &CoherentDiagram, stabilize_at: usize) -> Result<ComparisonReport> {
    let colimit = build_colimit(d)?.homology_betti()?;
    let telescope = build_telescope(d.stages().to_vec(), d.consecutive_edges())?.homology_betti()?;
    let limit = DirectSystem::from_chain_level(d.stages(), &d.consecutive_edges(), stabilize_at)?.direct_limit();
    let agree = colimit == telescope && telescope == limit;
    Ok(ComparisonReport {
        colimit_betti: colimit,
        telescope_betti: telescope,
        direct_limit: limit,
        agree,
    })
}
