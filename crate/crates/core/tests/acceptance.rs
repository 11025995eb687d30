//! Acceptance checks, one line per criterion. Run with
//! `cargo test --test acceptance`; `MT_SEED` changes the random corpus.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use morse_telescope::colimit::{build_colimit, build_telescope, verify_telescope_lemma, ColimitComplex};
use morse_telescope::diagram::{complete, make_strict, product_extension, CoherentDiagram, PartialDiagram};
use morse_telescope::nerve::{enumerate_simplices, PosetSimplex};
use morse_telescope::random::{
    random_edges, random_partial_diagram, random_stages, random_strict_diagram, seed_from_env,
};
use morse_telescope::scenario::{
    load_scenario, morse_chain_model, morse_homology_limit, vanishing_check, ExhaustionScenario,
};
use morse_telescope::{ChainMap, Degree, Error, GradedComplex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Check>);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 100 diagrams on 1 to 4 stages with stage dimension at most 6, completed
/// by the solver.
fn corpus(base: u64) -> Vec<CoherentDiagram> {
    (0..100)
        .map(|i| {
            let stages = 1 + (i % 4) as usize;
            let p = random_partial_diagram(&mut rng(base + i), stages, 6);
            complete(&p, stages - 1).unwrap_or_else(|e| panic!("corpus diagram {i}: {e}"))
        })
        .collect()
}

fn grading_ok(c: &ColimitComplex) -> bool {
    c.underlying().nonzero_diffs().all(|(n, m)| {
        m.entries()
            .into_iter()
            .all(|(r, col)| c.cells(n)[col].total_degree() == n && c.cells(n - 1)[r].total_degree() == n - 1)
    })
}

fn within(limit: Duration, start: Instant, detail: String) -> Check {
    let t = start.elapsed();
    if t <= limit {
        Ok(format!("{detail}, {:.2}s", t.as_secs_f64()))
    } else {
        Err(format!(
            "{detail}, but took {:.2}s (limit {}s)",
            t.as_secs_f64(),
            limit.as_secs()
        ))
    }
}

fn colimit_well_defined(base: u64) -> Check {
    let start = Instant::now();
    let mut ok = 0;
    for (i, d) in corpus(base).iter().enumerate() {
        let c = build_colimit(d).map_err(|e| format!("diagram {i}: {e}"))?;
        if !c.underlying().check_d_squared().is_empty() || !grading_ok(&c) {
            return Err(format!("diagram {i}: d^2 != 0 or a differential entry skips a degree"));
        }
        ok += 1;
    }
    within(
        Duration::from_secs(10),
        start,
        format!("{ok}/100 colimits with d^2 = 0 and degree -1"),
    )
}

fn colimit_equals_limit(base: u64) -> Check {
    let start = Instant::now();
    let mut ok = 0;
    for (i, d) in corpus(base).iter().enumerate() {
        let colimit = build_colimit(d)
            .and_then(|c| c.homology_betti())
            .map_err(|e| e.to_string())?;
        let limit = d.homology_system().map_err(|e| e.to_string())?.direct_limit();
        if colimit == limit {
            ok += 1;
        } else {
            return Err(format!("diagram {i}: colimit {colimit:?} vs direct limit {limit:?}"));
        }
    }
    within(Duration::from_secs(30), start, format!("{ok}/100 agree per degree"))
}

fn telescope_lemma(base: u64) -> Check {
    let start = Instant::now();
    for i in 0..50 {
        let stages = 1 + (i % 4) as usize;
        let d = random_strict_diagram(&mut rng(base + 1000 + i), stages, 5);
        let t = build_telescope(d.stages().to_vec(), d.consecutive_edges()).map_err(|e| e.to_string())?;
        let r = verify_telescope_lemma(&t).map_err(|e| e.to_string())?;
        if !r.holds {
            return Err(format!("telescope {i}: {:?}", r.degrees));
        }
    }
    within(
        Duration::from_secs(10),
        start,
        "50/50 telescopes satisfy both identities".into(),
    )
}

fn strict_colimit_equals_telescope(base: u64) -> Check {
    for i in 0..50 {
        let stages = 1 + (i % 4) as usize;
        let d = random_strict_diagram(&mut rng(base + 2000 + i), stages, 6);
        let c = build_colimit(&d)
            .and_then(|c| c.homology_betti())
            .map_err(|e| e.to_string())?;
        let t = build_telescope(d.stages().to_vec(), d.consecutive_edges())
            .and_then(|t| t.homology_betti())
            .map_err(|e| e.to_string())?;
        if c != t {
            return Err(format!("strict diagram {i}: colimit {c:?} vs telescope {t:?}"));
        }
    }
    Ok("50/50 strict diagrams".into())
}

fn solver_sound(base: u64) -> Check {
    let diagrams = corpus(base);
    for (i, d) in diagrams.iter().enumerate() {
        if !d.validate().is_valid() {
            return Err(format!("completed diagram {i} fails validation"));
        }
    }
    // points with zero differentials; φ_01 = φ_12 = id but φ_02 = 0
    let p = Arc::new(GradedComplex::with_zero_differential([(0, 1)]));
    let mut maps = BTreeMap::new();
    maps.insert(PosetSimplex::edge(0, 1).unwrap(), ChainMap::identity(p.clone()));
    maps.insert(PosetSimplex::edge(1, 2).unwrap(), ChainMap::identity(p.clone()));
    maps.insert(
        PosetSimplex::edge(0, 2).unwrap(),
        ChainMap::zero(p.clone(), p.clone(), 0),
    );
    let partial = PartialDiagram::new(vec![p.clone(), p.clone(), p], maps).map_err(|e| e.to_string())?;
    match complete(&partial, 2) {
        Err(Error::Obstruction { simplex, witness }) if !witness.is_zero() => Ok(format!(
            "100/100 completions validate; obstruction at {simplex} with nonzero witness"
        )),
        Err(e) => Err(format!("unexpected error on the obstructed instance: {e}")),
        Ok(_) => Err("the obstructed instance was completed".into()),
    }
}

fn product_extension_check(base: u64) -> Check {
    // two strict diagrams on the same four stages, edges drawn independently
    let mut independent_valid = 0;
    let mut equal_edges = 0;
    let mut first_failure = None;
    for i in 0..50 {
        let mut r = rng(base + 3000 + i);
        let stages = random_stages(&mut r, 4, 5);
        let d1 = make_strict(stages.clone(), random_edges(&mut r, &stages)).unwrap();
        let d2 = make_strict(stages.clone(), random_edges(&mut r, &stages)).unwrap();
        if d1.consecutive_edges() == d2.consecutive_edges() {
            equal_edges += 1;
        }
        let ext = product_extension(&d1, &d2).map_err(|e| e.to_string())?;
        let report = ext.validate(3);
        if report.is_valid() {
            independent_valid += 1;
        } else if first_failure.is_none() {
            first_failure = Some(format!("{:?}", report.violations[0].simplex));
        }
        // the case the construction covers: the same diagram on both copies
        let same = product_extension(&d1, &d1).map_err(|e| e.to_string())?;
        if !same.validate(3).is_valid() || same.restrict(0).map_err(|e| e.to_string())?.maps() != d1.maps() {
            return Err(format!("pair {i}: extension of a diagram with itself fails"));
        }
    }
    let detail = format!(
        "{independent_valid}/50 independent pairs validate (pairs that drew equal edges: {equal_edges}); 50/50 pairs with d2 = d1 validate"
    );
    if independent_valid == 50 {
        Ok(detail)
    } else {
        Err(format!(
            "{detail}; first failing chain {}: the 2-chains (a,0)->(a,1)->(b,1) and (a,0)->(b,0)->(b,1) force the map on (a,0)->(b,1) to equal both edge maps",
            first_failure.unwrap_or_default()
        ))
    }
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn morse_end_to_end() -> Check {
    let expected: [(&str, &[(Degree, usize)]); 3] = [
        ("plane_min.json", &[(0, 1)]),
        ("cancel_pair.json", &[(0, 1)]),
        ("circle_cylinder.json", &[(0, 1), (1, 1)]),
    ];
    let mut out = Vec::new();
    for (file, want) in expected {
        let start = Instant::now();
        let want: BTreeMap<Degree, usize> = want.iter().copied().collect();
        let s = load_scenario(scenarios_dir().join(file)).map_err(|e| format!("{file}: {e}"))?;
        let mh = morse_homology_limit(&s).map_err(|e| e.to_string())?;
        let mc = morse_chain_model(&s)
            .and_then(|c| c.homology_betti())
            .map_err(|e| e.to_string())?;
        if mh != want || mc != want {
            return Err(format!("{file}: limit {mh:?}, chain model {mc:?}, expected {want:?}"));
        }
        if start.elapsed() > Duration::from_secs(1) {
            return Err(format!("{file} took {:.2}s", start.elapsed().as_secs_f64()));
        }
        out.push(format!("{} {:?}", file.trim_end_matches(".json"), want));
    }
    Ok(out.join(", "))
}

fn vanishing(base: u64) -> Check {
    let mut checked = 0;
    let mut scenarios = Vec::new();
    for file in ["plane_min.json", "cancel_pair.json", "circle_cylinder.json"] {
        scenarios.push(load_scenario(scenarios_dir().join(file)).map_err(|e| e.to_string())?);
    }
    for i in 0..30 {
        // every pair of stages carries an edge, so higher maps are nonzero
        let stages = 5 + (i % 2) as usize;
        let p = random_partial_diagram(&mut rng(base + 4000 + i), stages, 6);
        let edges: BTreeMap<PosetSimplex, ChainMap> = p.maps().clone();
        scenarios
            .push(ExhaustionScenario::new(2, p.stages().to_vec(), edges, BTreeMap::new()).map_err(|e| e.to_string())?);
    }
    let mut nonzero_three = 0;
    for (i, s) in scenarios.iter().enumerate() {
        let r = vanishing_check(s).map_err(|e| format!("scenario {i}: {e}"))?;
        if !r.holds() {
            return Err(format!("scenario {i}: nonzero maps on {:?}", r.violations));
        }
        checked += r.checked;
        let d = s.diagram(None).map_err(|e| e.to_string())?;
        if d.maps().iter().any(|(s, f)| s.len() == 3 && !f.is_zero()) {
            nonzero_three += 1;
        }
    }
    Ok(format!(
        "{checked} maps on simplices of length > 3 are zero across {} scenarios ({nonzero_three} with nonzero length-3 maps)",
        scenarios.len()
    ))
}

fn simplicial_identities() -> Check {
    let all = enumerate_simplices(6, 4);
    let mut checks = 0usize;
    for s in &all {
        let k = s.len();
        for j in 0..=k {
            if k < 2 {
                break;
            }
            for i in 0..j {
                // ∂_i ∂_j = ∂_{j-1} ∂_i for i < j
                let lhs = s.face(j).and_then(|f| f.face(i)).map_err(|e| e.to_string())?;
                let rhs = s.face(i).and_then(|f| f.face(j - 1)).map_err(|e| e.to_string())?;
                if lhs != rhs {
                    return Err(format!("face identity fails on {s} for i={i}, j={j}"));
                }
                checks += 1;
            }
        }
        for i in 0..=k {
            let (a, b) = s.split(i).map_err(|e| e.to_string())?;
            if a.len() != i || b.len() != k - i || a.join(&b).as_ref() != Some(s) {
                return Err(format!("split/join round trip fails on {s} at {i}"));
            }
            checks += 1;
        }
    }
    Ok(format!("{checks} identities over {} simplices", all.len()))
}

fn main() -> ExitCode {
    let base = seed_from_env(1);
    let criteria: Vec<Criterion> = vec![
        ("colimit well-defined", Box::new(move || colimit_well_defined(base))),
        (
            "colimit homology = direct limit",
            Box::new(move || colimit_equals_limit(base)),
        ),
        ("telescope lemma", Box::new(move || telescope_lemma(base))),
        (
            "strict colimit = telescope",
            Box::new(move || strict_colimit_equals_telescope(base)),
        ),
        ("completion soundness", Box::new(move || solver_sound(base))),
        (
            "product extension of strict diagrams",
            Box::new(move || product_extension_check(base)),
        ),
        ("Morse scenarios end to end", Box::new(morse_end_to_end)),
        ("vanishing of long maps", Box::new(move || vanishing(base))),
        ("simplicial identities", Box::new(simplicial_identities)),
    ];
    println!("acceptance (seed base {base})");
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
