//! Replicated Monte Carlo experiments with reproducible parallel execution.
//!
//! Replications are embarrassingly parallel: each one derives its own RNG
//! stream from `stream_seed(master, replication, lambda_index)` and runs
//! independently; results are collected in replication order and reduced
//! sequentially, so the aggregate is byte-identical for every parallelism
//! width. In coupled mode (the default) all lambdas of one replication share
//! a single weight assignment, which is the monotone coupling and also acts
//! as common-random-numbers variance reduction.

use std::collections::VecDeque;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    run, run_coupled, sample_weights, stream_seed, CompetitionOutcome, EngineError, InfectionType,
    InitialConfig, StopRule,
};
use crate::events::{
    coexistence_indicator, scenario_classify, strangulation_check, EventError, LevelVerdict,
    VerdictRow,
};
use crate::families::{FamilyKind, FamilySpec, LandmarkMap};
use crate::graph::{Graph, VertexId};

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    BadPlan(String),
    #[error("per-realization verdict rows require a ladder family")]
    VerdictsRequireLadder,
    #[error("wilson interval needs at least one trial")]
    NoTrials,
    #[error("successes exceed trials")]
    TooManySuccesses,
    #[error(transparent)]
    Family(#[from] crate::families::FamilyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Event(#[from] EventError),
}

/// One coexistence sweep: a family, a lambda grid, the levels to report,
/// and the replication budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub family: FamilySpec,
    pub lambdas: Vec<f64>,
    pub levels: Vec<usize>,
    pub reps: u64,
    pub master_seed: u64,
    /// Rayon pool width; 0 uses the global pool.
    pub threads: usize,
    /// Share one weight assignment across the lambda grid per replication.
    pub coupled: bool,
}

impl SweepPlan {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.reps == 0 {
            return Err(HarnessError::BadPlan("reps must be at least 1".into()));
        }
        if self.lambdas.is_empty()
            || self.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0))
            || self.lambdas.windows(2).any(|p| p[1] <= p[0])
        {
            return Err(HarnessError::BadPlan(
                "lambda grid must be nonempty, positive, strictly ascending".into(),
            ));
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(HarnessError::BadPlan(
                "levels must be nonempty and start at 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub lambda: f64,
    pub level: usize,
    pub successes: u64,
    pub reps: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Monte Carlo estimates of the truncated coexistence probability over a
/// lambda grid, with full seed provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceCurve {
    pub family: String,
    pub spec_hash: String,
    pub master_seed: u64,
    pub rows: Vec<CurveRow>,
}

impl CoexistenceCurve {
    /// `family,spec_hash,seed,lambda,level,reps,successes,p_hat,ci_lo,ci_hi`
    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(
            out,
            "family,spec_hash,seed,lambda,level,reps,successes,p_hat,ci_lo,ci_hi"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                self.family,
                self.spec_hash,
                self.master_seed,
                r.lambda,
                r.level,
                r.reps,
                r.successes,
                r.p_hat,
                r.ci_lo,
                r.ci_hi
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("csv is utf8")
    }

    pub fn row(&self, lambda: f64, level: usize) -> Option<&CurveRow> {
        self.rows
            .iter()
            .find(|r| r.lambda == lambda && r.level == level)
    }
}

/// Standard Wilson score interval.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Result<(f64, f64), HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    if successes > trials {
        return Err(HarnessError::TooManySuccesses);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// 64-bit FNV-1a, used for spec provenance hashes.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Provenance hash of a family spec (over its canonical JSON encoding).
pub fn spec_hash(family: &FamilySpec) -> String {
    let json = serde_json::to_string(family).expect("family specs serialize");
    format!("{:016x}", fnv1a64(json.as_bytes()))
}

/// The canonical initial configurations of a family. The ladder has one
/// (type 1 and type 2 at the two spine roots). The multi-spine family has k,
/// one per auxiliary spine: type 2 at that spine's root, type 1 at all other
/// roots. The countable family has one per built level i: type 2 at x_{i,i},
/// type 1 at the other level-i marks. Truncated coexistence asks whether any
/// canonical start succeeds, mirroring the exists-an-initial-configuration
/// form of the coexistence region.
pub fn canonical_inits(lm: &LandmarkMap) -> Result<Vec<InitialConfig>, HarnessError> {
    let inits = match lm.kind {
        FamilyKind::Ladder => vec![InitialConfig::two_sources(
            lm.spines[0].vertices[0],
            lm.spines[1].vertices[0],
        )?],
        FamilyKind::MultiSpine => {
            let roots: Vec<VertexId> = lm.spines.iter().map(|s| s.vertices[0]).collect();
            (1..roots.len())
                .map(|i| {
                    let entries = roots
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| {
                            let t = if j == i {
                                InfectionType::Two
                            } else {
                                InfectionType::One
                            };
                            (v, t)
                        })
                        .collect();
                    InitialConfig::new(entries).map_err(HarnessError::from)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        FamilyKind::Countable => (1..=lm.max_level())
            .map(|i| {
                let level = lm.level(i).expect("levels are contiguous");
                let entries = level
                    .marks
                    .iter()
                    .map(|&m| {
                        let t = if m.spine == i {
                            InfectionType::Two
                        } else {
                            InfectionType::One
                        };
                        (lm.mark_vertex(m), t)
                    })
                    .collect();
                InitialConfig::new(entries).map_err(HarnessError::from)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(inits)
}

fn landmark_stop(lm: &LandmarkMap) -> StopRule {
    let mut type1 = Vec::new();
    let mut type2 = Vec::new();
    for level in &lm.levels {
        for &m in &level.marks {
            let v = lm.mark_vertex(m);
            if m.spine == 0 {
                type1.push(v);
            } else {
                type2.push(v);
            }
        }
    }
    StopRule::Landmarks {
        type1_targets: type1,
        type2_targets: type2,
    }
}

fn install<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

struct RepOutcome {
    /// Deepest level survived, per lambda (best over canonical inits).
    survived: Vec<usize>,
    rows: Vec<VerdictRow>,
}

/// Deepest level n such that the coexistence indicator held at every level
/// `1..=n`.
fn survived_level(out: &CompetitionOutcome, lm: &LandmarkMap) -> Result<usize, EventError> {
    let mut survived = 0;
    for n in 1..=lm.max_level() {
        if coexistence_indicator(out, lm, n)? {
            survived = n;
        } else {
            break;
        }
    }
    Ok(survived)
}

fn run_replication(
    g: &Graph,
    lm: &LandmarkMap,
    plan: &SweepPlan,
    inits: &[InitialConfig],
    stop: &StopRule,
    rep: u64,
    collect_rows: bool,
) -> Result<RepOutcome, HarnessError> {
    let mut survived = Vec::with_capacity(plan.lambdas.len());
    let mut rows = Vec::new();
    let coupled_weights = if plan.coupled {
        Some(sample_weights(g, stream_seed(plan.master_seed, rep, 0)))
    } else {
        None
    };
    for (li, &lambda) in plan.lambdas.iter().enumerate() {
        let local;
        let weights = match &coupled_weights {
            Some(w) => w,
            None => {
                local = sample_weights(g, stream_seed(plan.master_seed, rep, li as u64 + 1));
                &local
            }
        };
        let mut best = 0usize;
        for init in inits {
            let out = run(g, weights, lambda, init, stop)?;
            best = best.max(survived_level(&out, lm)?);
            if collect_rows {
                let verdicts: Vec<LevelVerdict> =
                    crate::events::level_verdicts(weights, lm, lambda, &out)?;
                let strangled = strangulation_check(&out);
                let scenario = scenario_classify(&out, lm);
                for v in verdicts {
                    rows.push(VerdictRow {
                        rep,
                        lambda,
                        level: v.level,
                        d1: v.d1,
                        d2: v.d2,
                        coex: coexistence_indicator(&out, lm, v.level)?,
                        strangled,
                        scenario,
                    });
                }
            }
        }
        survived.push(best);
    }
    Ok(RepOutcome { survived, rows })
}

fn sweep_inner(
    plan: &SweepPlan,
    collect_rows: bool,
) -> Result<(CoexistenceCurve, Vec<VerdictRow>), HarnessError> {
    plan.validate()?;
    let (g, lm) = plan.family.build()?;
    let max_level = lm.max_level();
    if plan.levels.iter().any(|l| *l > max_level) {
        return Err(HarnessError::BadPlan(format!(
            "levels exceed the family's {max_level} built levels"
        )));
    }
    let inits = canonical_inits(&lm)?;
    let stop = landmark_stop(&lm);

    let outcomes: Vec<RepOutcome> = install(plan.threads, || {
        (0..plan.reps)
            .into_par_iter()
            .map(|rep| run_replication(&g, &lm, plan, &inits, &stop, rep, collect_rows))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut rows = Vec::with_capacity(plan.lambdas.len() * plan.levels.len());
    for (li, &lambda) in plan.lambdas.iter().enumerate() {
        for &level in &plan.levels {
            let successes = outcomes.iter().filter(|o| o.survived[li] >= level).count() as u64;
            let (ci_lo, ci_hi) = wilson_interval(successes, plan.reps, 1.96)?;
            rows.push(CurveRow {
                lambda,
                level,
                successes,
                reps: plan.reps,
                p_hat: successes as f64 / plan.reps as f64,
                ci_lo,
                ci_hi,
            });
        }
    }

    let verdicts = outcomes.into_iter().flat_map(|o| o.rows).collect();
    Ok((
        CoexistenceCurve {
            family: plan.family.kind_name().to_string(),
            spec_hash: spec_hash(&plan.family),
            master_seed: plan.master_seed,
            rows,
        },
        verdicts,
    ))
}

/// Runs the sweep and aggregates the coexistence curve.
pub fn sweep(plan: &SweepPlan) -> Result<CoexistenceCurve, HarnessError> {
    sweep_inner(plan, false).map(|(curve, _)| curve)
}

/// Ladder-only variant that also returns one verdict row per
/// (replication, lambda, level), carrying the D-events next to the captures.
pub fn sweep_ladder_verdicts(
    plan: &SweepPlan,
) -> Result<(CoexistenceCurve, Vec<VerdictRow>), HarnessError> {
    if !matches!(plan.family, FamilySpec::Ladder(_)) {
        return Err(HarnessError::VerdictsRequireLadder);
    }
    sweep_inner(plan, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub lambda: f64,
    pub reps: u64,
    /// Frequency of {type 1 strangled or missing its landmark chain}.
    pub theta1: f64,
    pub theta1_ci: (f64, f64),
    /// Frequency of {type 2 reached the truncation boundary}.
    pub theta2: f64,
    pub theta2_ci: (f64, f64),
}

/// Estimates the extinction/survival proxies on a truncated family graph.
pub fn estimate_theta(
    g: &Graph,
    lm: &LandmarkMap,
    init: &InitialConfig,
    lambda: f64,
    reps: u64,
    seed: u64,
) -> Result<ThetaEstimate, HarnessError> {
    if reps == 0 {
        return Err(HarnessError::NoTrials);
    }
    let chain: Vec<VertexId> = lm
        .levels
        .iter()
        .filter(|l| l.level >= 1)
        .flat_map(|l| l.marks.iter())
        .filter(|m| m.spine == 0)
        .map(|&m| lm.mark_vertex(m))
        .collect();
    let boundary = lm.truncation_boundary();
    let stop = StopRule::Landmarks {
        type1_targets: chain.clone(),
        type2_targets: boundary.clone(),
    };

    let hits: Vec<(bool, bool)> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<(bool, bool), HarnessError> {
            let w = sample_weights(g, stream_seed(seed, rep, 0));
            let out = run(g, &w, lambda, init, &stop)?;
            let chain_ok = chain.iter().all(|&v| out.claimed_by(InfectionType::One, v));
            let strangled_one = strangulation_check(&out) == Some(InfectionType::One);
            let t1 = strangled_one || !chain_ok;
            let t2 = boundary
                .iter()
                .any(|&v| out.claimed_by(InfectionType::Two, v));
            Ok((t1, t2))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let s1 = hits.iter().filter(|h| h.0).count() as u64;
    let s2 = hits.iter().filter(|h| h.1).count() as u64;
    Ok(ThetaEstimate {
        lambda,
        reps,
        theta1: s1 as f64 / reps as f64,
        theta1_ci: wilson_interval(s1, reps, 1.96)?,
        theta2: s2 as f64 / reps as f64,
        theta2_ci: wilson_interval(s2, reps, 1.96)?,
    })
}

/// Coupled-monotonicity report over a lambda grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub lambdas: Vec<f64>,
    pub reps: u64,
    /// Count of (replication, adjacent lambda pair) events where the type-2
    /// claimed set failed to be a superset at the larger lambda. The coupling
    /// argument says this must be zero.
    pub superset_violations: u64,
    pub theta1: Vec<f64>,
    pub theta1_ci: Vec<(f64, f64)>,
    pub theta2: Vec<f64>,
    pub theta2_ci: Vec<(f64, f64)>,
    /// False iff the estimate dropped beyond combined CI noise somewhere.
    pub theta1_nondecreasing: bool,
    pub theta2_nondecreasing: bool,
}

/// Runs coupled sweeps per replication and checks the realization-level
/// monotone-coupling property: the final type-2 claimed set is nondecreasing
/// in lambda. The survival proxies are evaluated against the set of vertices
/// at maximal hop distance from the initial sources: theta2 counts type 2
/// reaching that boundary, theta1 counts type 1 missing all of it.
pub fn monotonicity_test(
    g: &Graph,
    init: &InitialConfig,
    lambdas: &[f64],
    reps: u64,
    seed: u64,
) -> Result<MonotonicityReport, HarnessError> {
    if reps == 0 {
        return Err(HarnessError::NoTrials);
    }
    if lambdas.is_empty()
        || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0))
        || lambdas.windows(2).any(|p| p[1] <= p[0])
    {
        return Err(HarnessError::BadPlan(
            "lambda grid must be nonempty, positive, strictly ascending".into(),
        ));
    }
    let boundary = farthest_vertices(g, init);

    struct RepStats {
        violations: u64,
        t1: Vec<bool>,
        t2: Vec<bool>,
    }

    let stats: Vec<RepStats> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<RepStats, HarnessError> {
            let w = sample_weights(g, stream_seed(seed, rep, 0));
            let outs = run_coupled(g, &w, lambdas, init, &StopRule::FullClaim)?;
            let mut violations = 0;
            for pair in outs.windows(2) {
                let shrank = g.vertices().any(|v| {
                    pair[0].claimed_by(InfectionType::Two, v)
                        && !pair[1].claimed_by(InfectionType::Two, v)
                });
                if shrank {
                    violations += 1;
                }
            }
            let t2 = outs
                .iter()
                .map(|o| {
                    boundary
                        .iter()
                        .any(|&v| o.claimed_by(InfectionType::Two, v))
                })
                .collect();
            let t1 = outs
                .iter()
                .map(|o| {
                    boundary
                        .iter()
                        .all(|&v| !o.claimed_by(InfectionType::One, v))
                })
                .collect();
            Ok(RepStats { violations, t1, t2 })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let count = |pick: fn(&RepStats) -> &Vec<bool>, li: usize| -> u64 {
        stats.iter().filter(|s| pick(s)[li]).count() as u64
    };
    let mut theta1 = Vec::new();
    let mut theta2 = Vec::new();
    let mut theta1_ci = Vec::new();
    let mut theta2_ci = Vec::new();
    for li in 0..lambdas.len() {
        let s1 = count(|s| &s.t1, li);
        let s2 = count(|s| &s.t2, li);
        theta1.push(s1 as f64 / reps as f64);
        theta2.push(s2 as f64 / reps as f64);
        theta1_ci.push(wilson_interval(s1, reps, 1.96)?);
        theta2_ci.push(wilson_interval(s2, reps, 1.96)?);
    }

    let nondecreasing = |vals: &[f64], cis: &[(f64, f64)]| {
        vals.windows(2).zip(cis.windows(2)).all(|(v, c)| {
            let half = |ci: (f64, f64)| (ci.1 - ci.0) / 2.0;
            v[1] >= v[0] - 2.0 * half(c[0]).max(half(c[1]))
        })
    };

    Ok(MonotonicityReport {
        lambdas: lambdas.to_vec(),
        reps,
        superset_violations: stats.iter().map(|s| s.violations).sum(),
        theta1_nondecreasing: nondecreasing(&theta1, &theta1_ci),
        theta2_nondecreasing: nondecreasing(&theta2, &theta2_ci),
        theta1,
        theta1_ci,
        theta2,
        theta2_ci,
    })
}

/// Vertices at maximal hop distance from the init set (a BFS boundary).
fn farthest_vertices(g: &Graph, init: &InitialConfig) -> Vec<VertexId> {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut queue = VecDeque::new();
    for &(v, _) in init.entries() {
        dist[v.index()] = 0;
        queue.push_back(v);
    }
    let mut far = 0;
    while let Some(v) = queue.pop_front() {
        for &(nbr, _) in g.neighbors(v) {
            if dist[nbr.index()] == usize::MAX {
                dist[nbr.index()] = dist[v.index()] + 1;
                far = far.max(dist[nbr.index()]);
                queue.push_back(nbr);
            }
        }
    }
    g.vertices().filter(|v| dist[v.index()] == far).collect()
}
