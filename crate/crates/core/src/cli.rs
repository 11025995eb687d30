//! The `mt` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::colimit::{
    build_colimit, build_telescope, compare_homologies_at, verify_telescope_lemma, DirectSystem, LemmaReport,
};
use crate::complex::{nonzero_betti, ChainMap, Degree, GradedComplex};
use crate::diagram::{complete, product_extension, CoherenceReport, CoherentDiagram, PartialDiagram};
use crate::error::{Error, Result};
use crate::io::{blocks_doc, parse_input, InputDoc};
use crate::nerve::PosetSimplex;
use crate::scenario::{vanishing_check_maps, ExhaustionScenario};

#[derive(Parser, Debug)]
#[command(
    name = "mt",
    version,
    about = "Colimits, telescopes and direct limits of GF(2) chain complex diagrams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Use only the stages 0..=N.
    #[arg(long, global = true, value_name = "N")]
    pub max_stage: Option<usize>,

    /// Longest simplex to solve for or check.
    #[arg(long, global = true, value_name = "K")]
    pub max_length: Option<usize>,

    /// Stage from which the homology system is declared stable.
    #[arg(long, global = true, value_name = "N")]
    pub stabilize: Option<usize>,

    /// Print JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the completed diagram here (`complete` only).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check stages, edges and stored higher maps.
    Validate { input: PathBuf },
    /// Betti numbers of every stage.
    Homology { input: PathBuf },
    /// Build the colimit complex of the completed diagram.
    Colimit { input: PathBuf },
    /// Build the mapping telescope and check the telescope lemma.
    Telescope { input: PathBuf },
    /// Direct limit of the stage homologies.
    Limit { input: PathBuf },
    /// Solve for the missing higher maps.
    Complete { input: PathBuf },
    /// Colimit, telescope and direct limit side by side.
    Compare { input: PathBuf },
    /// Extend two strict diagrams over two interlinked copies of the stages.
    Extend { first: PathBuf, second: PathBuf },
}

/// What a run printed and how it ended.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    ..Outcome::default()
                }
            } else {
                Outcome {
                    code,
                    stderr: text,
                    ..Outcome::default()
                }
            };
        }
    };
    match execute(&cli) {
        Ok((ok, stdout)) => Outcome {
            code: if ok { 0 } else { 1 },
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: error_message(&e),
        },
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse(_) => 2,
        _ => 1,
    }
}

fn error_message(e: &Error) -> String {
    let mut s = format!("error: {e}\n");
    match e {
        Error::Obstruction { witness, .. } | Error::InterleaveObstruction { witness, .. } => {
            let blocks = serde_json::to_string(&blocks_doc(witness)).unwrap();
            let _ = writeln!(
                s,
                "witness (degree {} map, blocks by source degree): {blocks}",
                witness.degree()
            );
        }
        _ => {}
    }
    s
}

enum Input {
    Scenario(ExhaustionScenario),
    Diagram(PartialDiagram),
}

impl Input {
    fn load(path: &Path, max_stage: Option<usize>) -> Result<Input> {
        let text = std::fs::read_to_string(path)?;
        let input = match parse_input(&text)? {
            InputDoc::Scenario(doc) => Input::Scenario(ExhaustionScenario::from_doc(&doc)?),
            InputDoc::Diagram(doc) => Input::Diagram(PartialDiagram::from_doc(&doc)?),
        };
        Ok(match (input, max_stage) {
            (Input::Scenario(s), Some(n)) => Input::Scenario(s.truncate(n)),
            (Input::Diagram(d), Some(n)) => Input::Diagram(d.truncate(n)),
            (input, None) => input,
        })
    }

    fn kind(&self) -> &'static str {
        match self {
            Input::Scenario(_) => "scenario",
            Input::Diagram(_) => "diagram",
        }
    }

    fn partial(&self) -> Result<PartialDiagram> {
        match self {
            Input::Scenario(s) => s.partial_diagram(),
            Input::Diagram(d) => Ok(d.clone()),
        }
    }

    fn stages(&self) -> Vec<Arc<GradedComplex>> {
        match self {
            Input::Scenario(s) => s.stages().to_vec(),
            Input::Diagram(d) => d.stages().to_vec(),
        }
    }

    fn consecutive_edges(&self) -> Result<Vec<ChainMap>> {
        match self {
            Input::Scenario(s) => Ok(s.consecutive_edges()),
            Input::Diagram(d) => d.consecutive_edges(),
        }
    }

    fn max_stage(&self) -> usize {
        self.stages().len() - 1
    }
}

fn execute(cli: &Cli) -> Result<(bool, String)> {
    match &cli.command {
        Command::Validate { input } => validate(cli, &Input::load(input, cli.max_stage)?),
        Command::Homology { input } => homology(cli, &Input::load(input, cli.max_stage)?),
        Command::Colimit { input } => colimit(cli, &Input::load(input, cli.max_stage)?),
        Command::Telescope { input } => telescope(cli, &Input::load(input, cli.max_stage)?),
        Command::Limit { input } => limit(cli, &Input::load(input, cli.max_stage)?),
        Command::Complete { input } => complete_cmd(cli, &Input::load(input, cli.max_stage)?),
        Command::Compare { input } => compare(cli, &Input::load(input, cli.max_stage)?),
        Command::Extend { first, second } => extend(
            cli,
            &Input::load(first, cli.max_stage)?,
            &Input::load(second, cli.max_stage)?,
        ),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn betti_text(b: &BTreeMap<Degree, usize>) -> String {
    if b.is_empty() {
        return "0".into();
    }
    b.iter().map(|(n, d)| format!("b{n}={d}")).collect::<Vec<_>>().join(" ")
}

fn completed(cli: &Cli, input: &Input) -> Result<CoherentDiagram> {
    let p = input.partial()?;
    complete(&p, cli.max_length.unwrap_or(p.max_stage()))
}

fn stabilize_at(cli: &Cli, input: &Input) -> Result<usize> {
    let last = input.max_stage();
    match cli.stabilize {
        Some(n) if n > last => Err(Error::Validation(format!(
            "stabilization index {n} is beyond the last stage {last}"
        ))),
        Some(n) => Ok(n),
        None => Ok(last),
    }
}

#[derive(Serialize)]
struct ViolationDoc {
    simplex: Vec<usize>,
    residual: BTreeMap<Degree, Vec<[usize; 2]>>,
}

fn validate(cli: &Cli, input: &Input) -> Result<(bool, String)> {
    let partial = input.partial()?;
    let report: CoherenceReport<PosetSimplex> = partial.validate_stored();
    let vanishing = match input {
        Input::Scenario(s) => vanishing_check_maps(s.dim_w(), s.higher()).violations,
        Input::Diagram(_) => Vec::new(),
    };
    let ok = report.violations.is_empty() && vanishing.is_empty();
    if cli.json {
        let doc = json!({
            "kind": input.kind(),
            "stages": partial.stages().len(),
            "checked": report.checked,
            "violations": report.violations.iter().map(|v| ViolationDoc {
                simplex: v.simplex.vertices().to_vec(),
                residual: blocks_doc(&v.residual),
            }).collect::<Vec<_>>(),
            "unchecked": report.unchecked.iter().map(|s| s.vertices().to_vec()).collect::<Vec<_>>(),
            "vanishing_violations": vanishing.iter().map(|s| s.vertices().to_vec()).collect::<Vec<_>>(),
            "valid": ok,
        });
        return Ok((ok, to_json(&doc)));
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} with {} stages: {} maps checked",
        input.kind(),
        partial.stages().len(),
        report.checked
    );
    for v in &report.violations {
        let degrees: Vec<Degree> = v.residual.nonzero_blocks().map(|(n, _)| n).collect();
        let _ = writeln!(
            s,
            "violation at {}: residual nonzero in source degree(s) {degrees:?}",
            v.simplex
        );
    }
    for u in &report.unchecked {
        let _ = writeln!(s, "not checked (a face is missing): {u}");
    }
    for v in &vanishing {
        let _ = writeln!(s, "nonzero map on {v}, which is too long to carry one");
    }
    let _ = writeln!(s, "{}", if ok { "valid" } else { "INVALID" });
    Ok((ok, s))
}

fn homology(cli: &Cli, input: &Input) -> Result<(bool, String)> {
    let betti = input
        .stages()
        .iter()
        .map(|c| Ok(nonzero_betti(&c.homology()?.betti_numbers())))
        .collect::<Result<Vec<_>>>()?;
    if cli.json {
        let doc: Vec<_> = betti
            .iter()
            .enumerate()
            .map(|(a, b)| json!({"stage": a, "betti": b}))
            .collect();
        return Ok((true, to_json(&json!({ "stages": doc }))));
    }
    let degrees: std::collections::BTreeSet<Degree> = betti.iter().flat_map(|b| b.keys().copied()).collect();
    let mut s = String::from("stage");
    for n in &degrees {
        let _ = write!(s, "\tH{n}");
    }
    s.push('\n');
    for (a, b) in betti.iter().enumerate() {
        let _ = write!(s, "{a}");
        for n in &degrees {
            let _ = write!(s, "\t{}", b.get(n).copied().unwrap_or(0));
        }
        s.push('\n');
    }
    Ok((true, s))
}

fn colimit(cli: &Cli, input: &Input) -> Result<(bool, String)> {
    let d = completed(cli, input)?;
    let c = build_colimit(&d)?;
    let betti = c.homology_betti()?;
    if cli.json {
        let doc = json!({
            "max_length": d.max_length(),
            "dims": c.underlying().dims(),
            "betti": betti,
        });
        return Ok((true, to_json(&doc)));
    }
    Ok((
        true,
        format!(
            "colimit over {} stages, simplices up to length {}\ncells: {}\nbetti: {}\n",
            d.stages().len(),
            d.max_length(),
            betti_text(c.underlying().dims()),
            betti_text(&betti)
        ),
    ))
}

fn telescope(cli: &Cli, input: &Input) -> Result<(bool, String)> {
    let t = build_telescope(input.stages(), input.consecutive_edges()?)?;
    let betti = t.homology_betti()?;
    let lemma: LemmaReport = verify_telescope_lemma(&t)?;
    if cli.json {
        return Ok((lemma.holds, to_json(&json!({ "betti": betti, "lemma": lemma }))));
    }
    let mut s = format!("telescope betti: {}\n", betti_text(&betti));
    s.push_str("degree\tcycles\tplain+bd\tquotient\trelations\tfirst\tsecond\n");
    for d in &lemma.degrees {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            d.degree,
            d.cycles,
            d.plain_cycles_plus_boundaries,
            d.plain_boundary_quotient,
            d.relation_rank,
            d.first,
            d.second
        );
    }
    let _ = writeln!(s, "lemma {}", if lemma.holds { "holds" } else { "FAILS" });
    Ok((lemma.holds, s))
}

fn limit(cli: &Cli, input: &Input) -> Result<(bool, String)> {
    let n = stabilize_at(cli, input)?;
    let lim = DirectSystem::from_chain_level(&input.stages(), &input.consecutive_edges()?, n)?.direct_limit();
    if cli.json {
        return Ok((true, to_json(&json!({ "stabilize_at": n, "direct_limit": lim }))));
    }
    Ok((
        true,
        format!("direct limit (stable from stage {n}): {}\n", betti_text(&lim)),
    ))
}

fn complete_cmd(cli: &Cli, input: &Input) -> Result<(bool, String)> {
    let d = completed(cli, input)?;
    let doc = to_json(&d.to_doc());
    let nonzero: Vec<Vec<usize>> = d
        .maps()
        .iter()
        .filter(|(s, f)| s.len() >= 2 && !f.is_zero())
        .map(|(s, _)| s.vertices().to_vec())
        .collect();
    let Some(path) = &cli.out else {
        return Ok((true, doc));
    };
    std::fs::write(path, &doc)?;
    if cli.json {
        let summary = json!({
            "written": path.display().to_string(),
            "maps": d.maps().len(),
            "nonzero_higher": nonzero,
        });
        return Ok((true, to_json(&summary)));
    }
    Ok((
        true,
        format!(
            "wrote {} maps to {}; nonzero higher maps on {}\n",
            d.maps().len(),
            path.display(),
            if nonzero.is_empty() {
                "no simplex".to_string()
            } else {
                nonzero.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
            }
        ),
    ))
}

fn compare(cli: &Cli, input: &Input) -> Result<(bool, String)> {
    let d = completed(cli, input)?;
    let r = compare_homologies_at(&d, stabilize_at(cli, input)?)?;
    if cli.json {
        return Ok((r.agree, to_json(&r)));
    }
    Ok((
        r.agree,
        format!(
            "colimit:      {}\ntelescope:    {}\ndirect limit: {}\n{}\n",
            betti_text(&r.colimit_betti),
            betti_text(&r.telescope_betti),
            betti_text(&r.direct_limit),
            if r.agree { "agree" } else { "DISAGREE" }
        ),
    ))
}

fn strict(input: &Input, which: &str) -> Result<CoherentDiagram> {
    let p = input.partial()?;
    let d = complete(&p, p.max_stage())?;
    if let Some((sigma, _)) = d.maps().iter().find(|(s, f)| s.len() >= 2 && !f.is_zero()) {
        return Err(Error::InvalidDiagram(format!(
            "{which} diagram is not strict: it needs a nonzero map on {sigma}"
        )));
    }
    Ok(d)
}

fn extend(cli: &Cli, first: &Input, second: &Input) -> Result<(bool, String)> {
    let d1 = strict(first, "first")?;
    let d2 = strict(second, "second")?;
    let ext = product_extension(&d1, &d2)?;
    let max_length = cli.max_length.unwrap_or(3);
    let report = ext.validate(max_length);
    let restrictions = ext.restrict(0)?.maps() == d1.maps() && ext.restrict(1)?.maps() == d2.maps();
    let ok = report.is_valid() && restrictions;
    let chain_text = |c: &crate::nerve::ProductSimplex| {
        c.vertices()
            .iter()
            .map(|(a, m)| format!("{a}{}", if *m == 0 { "" } else { "'" }))
            .collect::<Vec<_>>()
            .join("->")
    };
    if cli.json {
        let doc = json!({
            "chains_checked": report.checked,
            "max_length": max_length,
            "violations": report.violations.iter().map(|v| v.simplex.vertices().to_vec()).collect::<Vec<_>>(),
            "restrictions_match": restrictions,
            "valid": ok,
        });
        return Ok((ok, to_json(&doc)));
    }
    let mut s = format!("{} chains of length <= {max_length} checked\n", report.checked);
    for v in &report.violations {
        let _ = writeln!(s, "violation on {}", chain_text(&v.simplex));
    }
    let _ = writeln!(s, "restrictions match the inputs: {restrictions}");
    let _ = writeln!(s, "{}", if ok { "valid" } else { "INVALID" });
    Ok((ok, s))
}
