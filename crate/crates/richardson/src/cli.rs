//! Command-line interface: spec documents, presets, and the implementations
//! behind the `richardson` binary.
//!
//! A spec document is a JSON object with a `family` key (`ladder`,
//! `multispine`, or `countable`), the family's geometry keys, and optional
//! experiment keys (`lambdas`, `reps`, `levels`, `seed`, `threads`). Unknown
//! keys are rejected. The presets `prop21`, `prop22`, `interval:a,b` and
//! `points:a1,...,ak` expand to full documents so each construction can be
//! reproduced with a single command.
//!
//! Exit codes: 0 success, 2 spec/usage error, 3 runtime failure. When no
//! `--out` is given, standard output carries only data rows; progress and
//! verdict lines go to standard error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{check_growth_conditions, coexistence_lower_bound, GrowthConditionReport};
use crate::engine::{run, sample_weights, StopRule};
use crate::events::{coexistence_verdict, write_verdict_csv};
use crate::families::{
    BridgeRule, Correction, CountableSpec, EndShift, FamilySpec, LadderSpec, MultiSpineSpec,
    SequenceSpec,
};
use crate::harness::{canonical_inits, sweep, sweep_ladder_verdicts, SweepPlan};

/// Environment variable that overrides the spec document's seed.
pub const SEED_ENV_VAR: &str = "RICHARDSON_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid spec document or usage; exit code 2.
    #[error("{0}")]
    Spec(String),
    /// Failure while executing a valid request; exit code 3.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn spec_err(e: impl std::fmt::Display) -> CliError {
    CliError::Spec(e.to_string())
}

fn io_err(context: &str, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{context}: {e}"))
}

#[derive(Parser, Debug)]
#[command(
    name = "richardson",
    version,
    about = "Two-type competing growth on engineered graph families: generate, simulate, sweep, bound, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a family graph; write its edge-list dump and landmark map
    Generate {
        /// Spec document path or preset (prop21, prop22, interval:a,b, points:a1,...)
        spec: String,
        /// Output path for the graph dump; the landmark map goes next to it
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one competition and emit the per-vertex outcome CSV plus a verdict line
    Simulate {
        spec: String,
        /// Type-2 rate (type 1 is fixed at rate 1)
        #[arg(long)]
        lambda: f64,
        /// Overrides the spec seed (flag beats RICHARDSON_SEED beats spec)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replicated coexistence-probability sweep over the spec's lambda grid
    Sweep {
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u64>,
        /// Levels to report, e.g. --levels 1,2,3
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// Parallelism width; 0 means all cores. Results are identical for
        /// every width under a fixed seed.
        #[arg(long)]
        threads: Option<usize>,
        /// Resample weights per lambda instead of sharing them (uncoupled)
        #[arg(long)]
        uncoupled: bool,
        /// Also write per-replication verdict rows (ladder families only)
        #[arg(long)]
        verdicts: Option<PathBuf>,
    },
    /// Chebyshev bound report for a ladder at one lambda
    Bounds {
        spec: String,
        #[arg(long)]
        lambda: f64,
        /// Fail (exit 2) when lambda lies outside the predicted region
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the multi-spine growth conditions and the eps budget
    Verify {
        spec: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Geometric-or-explicit sequence in a spec document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<u64>>,
}

impl SeqDoc {
    fn to_spec(&self, key: &str) -> Result<SequenceSpec, CliError> {
        match (&self.list, self.base, self.ratio) {
            (Some(list), None, None) => {
                let count = self.count.unwrap_or(list.len());
                Ok(SequenceSpec {
                    kind: crate::families::SequenceKind::Explicit(list.clone()),
                    count,
                })
            }
            (None, Some(base), Some(ratio)) => {
                let count = self
                    .count
                    .ok_or_else(|| CliError::Spec(format!("'{key}' needs a count")))?;
                Ok(SequenceSpec::geometric(base, ratio, count))
            }
            _ => Err(CliError::Spec(format!(
                "'{key}' must give either {{base, ratio, count}} or {{list}}"
            ))),
        }
    }

    fn geometric(base: u64, ratio: u64, count: usize) -> Self {
        Self {
            base: Some(base),
            ratio: Some(ratio),
            count: Some(count),
            list: None,
        }
    }

    fn level_count(&self) -> Option<usize> {
        self.count.or_else(|| self.list.as_ref().map(Vec::len))
    }
}

/// Schema-checked spec document. Family-specific keys must match the chosen
/// family; experiment keys are optional everywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub family: String,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<SeqDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<SeqDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction: Option<Correction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_shift: Option<EndShift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<u64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl SpecDocument {
    fn empty(family: &str) -> Self {
        Self {
            family: family.to_string(),
            a: None,
            b: None,
            gamma: None,
            beta: None,
            correction: None,
            end_shift: None,
            k: None,
            alphas: None,
            tail: None,
            lambdas: None,
            reps: None,
            levels: None,
            seed: None,
            threads: None,
        }
    }

    fn reject_keys(&self, keys: &[(&str, bool)]) -> Result<(), CliError> {
        for (name, present) in keys {
            if *present {
                return Err(CliError::Spec(format!(
                    "key '{name}' does not apply to family '{}'",
                    self.family
                )));
            }
        }
        Ok(())
    }

    /// Validates the document and produces the family spec.
    pub fn to_family(&self) -> Result<FamilySpec, CliError> {
        match self.family.as_str() {
            "ladder" => {
                self.reject_keys(&[
                    ("k", self.k.is_some()),
                    ("alphas", self.alphas.is_some()),
                    ("b", self.b.is_some()),
                ])?;
                let a = self
                    .a
                    .as_ref()
                    .ok_or_else(|| CliError::Spec("ladder needs 'a'".into()))?
                    .to_spec("a")?;
                let gamma = self
                    .gamma
                    .ok_or_else(|| CliError::Spec("ladder needs 'gamma'".into()))?;
                let rule = BridgeRule::new(
                    gamma,
                    self.beta.unwrap_or(0.0),
                    self.correction.unwrap_or(Correction::Plus78),
                    self.end_shift.unwrap_or(EndShift::None),
                );
                let spec = LadderSpec {
                    a,
                    rule,
                    tail: self.tail.unwrap_or(64),
                };
                spec.level_geometry().map_err(spec_err)?;
                Ok(FamilySpec::Ladder(spec))
            }
            "multispine" => {
                self.reject_keys(&[
                    ("a", self.a.is_some()),
                    ("gamma", self.gamma.is_some()),
                    ("beta", self.beta.is_some()),
                    ("correction", self.correction.is_some()),
                    ("end_shift", self.end_shift.is_some()),
                    ("tail", self.tail.is_some()),
                ])?;
                let k = self.k.ok_or_else(|| {
                    CliError::Spec("multispine needs 'k' (k >= 1 required)".into())
                })?;
                let alphas = self
                    .alphas
                    .clone()
                    .ok_or_else(|| CliError::Spec("multispine needs 'alphas'".into()))?;
                let b = self
                    .b
                    .as_ref()
                    .ok_or_else(|| CliError::Spec("multispine needs 'b'".into()))?
                    .to_spec("b")?;
                let spec = MultiSpineSpec::with_default_margins(k, alphas, b).map_err(spec_err)?;
                Ok(FamilySpec::MultiSpine(spec))
            }
            "countable" => {
                self.reject_keys(&[
                    ("a", self.a.is_some()),
                    ("gamma", self.gamma.is_some()),
                    ("beta", self.beta.is_some()),
                    ("correction", self.correction.is_some()),
                    ("end_shift", self.end_shift.is_some()),
                    ("tail", self.tail.is_some()),
                    ("k", self.k.is_some()),
                ])?;
                let alphas = self
                    .alphas
                    .clone()
                    .ok_or_else(|| CliError::Spec("countable needs 'alphas'".into()))?;
                let b = self
                    .b
                    .as_ref()
                    .ok_or_else(|| CliError::Spec("countable needs 'b'".into()))?
                    .to_spec("b")?;
                let spec = CountableSpec { alphas, b };
                spec.validate().map_err(spec_err)?;
                Ok(FamilySpec::Countable(spec))
            }
            other => Err(CliError::Spec(format!(
                "unknown family '{other}' (expected ladder, multispine, or countable)"
            ))),
        }
    }

    /// Built levels implied by the geometry (used when 'levels' is absent).
    fn default_levels(&self) -> Option<usize> {
        match self.family.as_str() {
            "ladder" => self.a.as_ref().and_then(SeqDoc::level_count),
            _ => self.b.as_ref().and_then(SeqDoc::level_count),
        }
    }
}

const PRESET_SEED: u64 = 1729;

/// Expands a preset name, or returns `None` for anything else.
pub fn preset(name: &str) -> Result<Option<SpecDocument>, CliError> {
    let mut doc = match name {
        "prop21" => {
            let mut d = SpecDocument::empty("ladder");
            d.a = Some(SeqDoc::geometric(256, 4, 3));
            d.gamma = Some(2.0);
            d.beta = Some(0.0);
            d.correction = Some(Correction::Plus78);
            d.lambdas = Some(vec![1.0, 1.5, 2.0, 2.5, 3.0]);
            d
        }
        "prop22" => {
            let mut d = SpecDocument::empty("ladder");
            d.a = Some(SeqDoc::geometric(256, 4, 3));
            d.gamma = Some(4.0);
            d.beta = Some(1.0);
            d.correction = Some(Correction::Plus78);
            d.lambdas = Some(vec![1.2, 2.0, 3.5, 5.0, 6.0]);
            d
        }
        _ => {
            if let Some(args) = name.strip_prefix("interval:") {
                let ends = parse_floats(args)?;
                if ends.len() != 2 || !(1.0 <= ends[0] && ends[0] < ends[1]) {
                    return Err(CliError::Spec(
                        "interval preset needs 1 <= a < b, e.g. interval:2,5".into(),
                    ));
                }
                let (alpha, alpha_p) = (ends[0], ends[1]);
                let mut d = SpecDocument::empty("ladder");
                d.a = Some(SeqDoc::geometric(256, 4, 3));
                // gamma/(1+beta) = alpha and gamma+beta = alpha' invert to:
                d.gamma = Some(alpha * (1.0 + alpha_p) / (1.0 + alpha));
                d.beta = Some((alpha_p - alpha) / (1.0 + alpha));
                d.correction = Some(Correction::Plus78);
                let mut grid = vec![
                    alpha / 1.5,
                    alpha,
                    (alpha + alpha_p) / 2.0,
                    alpha_p,
                    alpha_p * 1.2,
                ];
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                d.lambdas = Some(grid);
                d
            } else if let Some(args) = name.strip_prefix("points:") {
                let alphas = parse_floats(args)?;
                if alphas.is_empty()
                    || alphas.iter().any(|a| *a < 1.0)
                    || alphas.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(CliError::Spec(
                        "points preset needs a strictly increasing list of alphas >= 1".into(),
                    ));
                }
                let mut d = SpecDocument::empty("multispine");
                d.k = Some(alphas.len());
                d.b = Some(SeqDoc::geometric(512, 4, 3));
                // grid: a low anchor, the alphas, and the gaps between them
                let mut grid = vec![(0.65 * alphas[0]).max(1.0)];
                for w in alphas.windows(2) {
                    grid.push((w[0] + w[1]) / 2.0);
                }
                grid.extend_from_slice(&alphas);
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                d.lambdas = Some(grid);
                d.alphas = Some(alphas);
                d
            } else {
                return Ok(None);
            }
        }
    };
    doc.tail = if doc.family == "ladder" {
        Some(64)
    } else {
        None
    };
    doc.reps = Some(2000);
    doc.levels = Some((1..=3).collect());
    doc.seed = Some(PRESET_SEED);
    doc.threads = Some(0);
    Ok(Some(doc))
}

fn parse_floats(csv: &str) -> Result<Vec<f64>, CliError> {
    csv.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Spec(format!("cannot parse number '{s}'")))
        })
        .collect()
}

/// Loads a preset by name or a JSON spec document from disk.
pub fn load_spec(arg: &str) -> Result<SpecDocument, CliError> {
    if let Some(doc) = preset(arg)? {
        return Ok(doc);
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| CliError::Spec(format!("cannot read spec '{arg}': {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Spec(format!("invalid spec document: {e}")))
}

/// Seed precedence: `--seed` flag, then `RICHARDSON_SEED`, then the document.
fn resolve_seed(doc: &SpecDocument, flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        return raw
            .parse::<u64>()
            .map_err(|_| CliError::Spec(format!("{SEED_ENV_VAR} must be an unsigned integer")));
    }
    Ok(doc.seed.unwrap_or(0))
}

fn write_or_stdout(path: Option<&Path>, contents: &str, what: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| io_err(&format!("writing {what}"), e)),
        None => {
            print!("{contents}");
            std::io::stdout()
                .flush()
                .map_err(|e| io_err("flushing stdout", e))
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { spec, out } => cmd_generate(&spec, &out),
        Command::Simulate {
            spec,
            lambda,
            seed,
            out,
        } => cmd_simulate(&spec, lambda, seed, out.as_deref()),
        Command::Sweep {
            spec,
            out,
            seed,
            reps,
            levels,
            threads,
            uncoupled,
            verdicts,
        } => cmd_sweep(
            &spec,
            out.as_deref(),
            seed,
            reps,
            levels,
            threads,
            uncoupled,
            verdicts.as_deref(),
        ),
        Command::Bounds {
            spec,
            lambda,
            strict,
            out,
        } => cmd_bounds(&spec, lambda, strict, out.as_deref()),
        Command::Verify { spec, seed } => cmd_verify(&spec, seed),
    }
}

pub fn cmd_generate(spec_arg: &str, out: &Path) -> Result<(), CliError> {
    let doc = load_spec(spec_arg)?;
    let family = doc.to_family()?;
    let (graph, landmarks) = family.build().map_err(spec_err)?;

    let mut dump = Vec::new();
    graph
        .write_dump(&mut dump)
        .map_err(|e| io_err("serializing graph dump", e))?;
    fs::write(out, &dump).map_err(|e| io_err("writing graph dump", e))?;

    let lm_path = out.with_extension("landmarks.json");
    let lm_json = serde_json::to_string_pretty(&landmarks)
        .map_err(|e| CliError::Runtime(format!("serializing landmark map: {e}")))?;
    fs::write(&lm_path, lm_json).map_err(|e| io_err("writing landmark map", e))?;

    println!(
        "vertices={} edges={}",
        graph.vertex_count(),
        graph.edge_count()
    );
    println!("predicted region: {}", family.predicted_region());
    Ok(())
}

pub fn cmd_simulate(
    spec_arg: &str,
    lambda: f64,
    seed_flag: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(CliError::Spec("lambda must be positive".into()));
    }
    let doc = load_spec(spec_arg)?;
    let family = doc.to_family()?;
    let seed = resolve_seed(&doc, seed_flag)?;
    let (graph, landmarks) = family.build().map_err(spec_err)?;
    let init = canonical_inits(&landmarks)
        .map_err(spec_err)?
        .into_iter()
        .next()
        .expect("every family has a canonical init");
    let weights = sample_weights(&graph, seed);
    let outcome = run(&graph, &weights, lambda, &init, &StopRule::FullClaim).map_err(spec_err)?;
    let verdict = coexistence_verdict(&outcome, &landmarks).map_err(spec_err)?;

    let mut csv = Vec::new();
    outcome
        .write_csv(&graph, &mut csv)
        .map_err(|e| io_err("serializing outcome", e))?;
    let csv = String::from_utf8(csv).expect("csv is utf8");

    let strangled = verdict
        .strangled
        .map(|t| t.to_string())
        .unwrap_or_else(|| "none".into());
    let verdict_line = format!(
        "verdict: lambda={lambda} seed={seed} survived_to_level={} strangled={strangled} scenario={} termination={}",
        verdict.survived_to_level, verdict.scenario, outcome.termination
    );

    match out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| io_err("writing outcome CSV", e))?;
            println!("{verdict_line}");
        }
        None => {
            print!("{csv}");
            eprintln!("{verdict_line}");
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    spec_arg: &str,
    out: Option<&Path>,
    seed_flag: Option<u64>,
    reps_flag: Option<u64>,
    levels_flag: Option<Vec<usize>>,
    threads_flag: Option<usize>,
    uncoupled: bool,
    verdicts_out: Option<&Path>,
) -> Result<(), CliError> {
    let doc = load_spec(spec_arg)?;
    let family = doc.to_family()?;
    let lambdas = doc
        .lambdas
        .clone()
        .ok_or_else(|| CliError::Spec("sweep needs 'lambdas' in the spec".into()))?;
    let levels = levels_flag
        .or_else(|| doc.levels.clone())
        .or_else(|| doc.default_levels().map(|n| (1..=n).collect()))
        .ok_or_else(|| CliError::Spec("sweep needs 'levels'".into()))?;
    let plan = SweepPlan {
        family,
        lambdas,
        levels,
        reps: reps_flag.or(doc.reps).unwrap_or(1000),
        master_seed: resolve_seed(&doc, seed_flag)?,
        threads: threads_flag.or(doc.threads).unwrap_or(0),
        coupled: !uncoupled,
    };

    eprintln!(
        "sweep: family={} reps={} grid={} levels={} seed={} threads={}",
        plan.family.kind_name(),
        plan.reps,
        plan.lambdas.len(),
        plan.levels.len(),
        plan.master_seed,
        plan.threads
    );
    let started = Instant::now();
    let curve = if let Some(vpath) = verdicts_out {
        let (curve, rows) = sweep_ladder_verdicts(&plan).map_err(spec_err)?;
        let mut buf = Vec::new();
        write_verdict_csv(&rows, &mut buf).map_err(|e| io_err("serializing verdicts", e))?;
        fs::write(vpath, buf).map_err(|e| io_err("writing verdict CSV", e))?;
        curve
    } else {
        sweep(&plan).map_err(spec_err)?
    };
    eprintln!("sweep: done in {:.1}s", started.elapsed().as_secs_f64());

    write_or_stdout(out, &curve.to_csv_string(), "curve CSV")
}

pub fn cmd_bounds(
    spec_arg: &str,
    lambda: f64,
    strict: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(CliError::Spec("lambda must be positive".into()));
    }
    let doc = load_spec(spec_arg)?;
    let family = doc.to_family()?;
    let FamilySpec::Ladder(ladder) = family else {
        return Err(CliError::Spec("bounds requires a ladder family".into()));
    };
    let report = coexistence_lower_bound(&ladder, lambda).map_err(spec_err)?;
    if strict && !report.is_valid() {
        return Err(CliError::Spec(format!(
            "lambda {lambda} lies outside the predicted region {}",
            ladder.predicted_region()
        )));
    }
    let mut buf = Vec::new();
    report
        .write_csv(&mut buf)
        .map_err(|e| io_err("serializing bound report", e))?;
    write_or_stdout(
        out,
        &String::from_utf8(buf).expect("csv is utf8"),
        "bound CSV",
    )
}

fn format_growth_report(report: &GrowthConditionReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "eps_sum={:.6} budget={:.6} check={}\n",
        report.eps_sum,
        report.eps_budget,
        if report.eps_sum_ok { "PASS" } else { "FAIL" }
    ));
    s.push_str("level,b,cond_i,cond_ii,cond_iii\n");
    for l in &report.levels {
        let fmt_mc = |c: &crate::bounds::CondResult| {
            format!(
                "{}(freq={:.4} req={:.4})",
                if c.pass { "PASS" } else { "FAIL" },
                c.observed,
                c.required
            )
        };
        s.push_str(&format!(
            "{},{},{},{}(lhs={:.2} rhs={:.2}),{}\n",
            l.level,
            l.b,
            fmt_mc(&l.cond_i),
            if l.cond_ii.pass { "PASS" } else { "FAIL" },
            l.cond_ii.observed,
            l.cond_ii.required,
            fmt_mc(&l.cond_iii)
        ));
    }
    s.push_str(&format!("note: {}\n", report.note));
    s
}

pub fn cmd_verify(spec_arg: &str, seed_flag: Option<u64>) -> Result<(), CliError> {
    let doc = load_spec(spec_arg)?;
    let family = doc.to_family()?;
    let FamilySpec::MultiSpine(spec) = family else {
        return Err(CliError::Spec("verify requires a multispine family".into()));
    };
    let seed = resolve_seed(&doc, seed_flag)?;
    let report = check_growth_conditions(&spec, seed).map_err(spec_err)?;
    print!("{}", format_growth_report(&report));
    Ok(())
}
