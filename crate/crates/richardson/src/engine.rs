//! The two-type competing growth dynamics.
//!
//! Each edge carries one mean-1 exponential weight `X(e)`. Type 1 crosses an
//! edge in `X(e)` time units, type 2 in `X(e) / lambda`, so larger `lambda`
//! means faster type-2 growth. A vertex is claimed by whichever type's
//! frontier reaches it first and never changes type afterwards; an edge
//! between two claimed vertices transmits nothing.
//!
//! Note on rate convention: some write-ups scale passage times as
//! `lambda * X(e)`. This engine divides (`X(e) / lambda`), which is what the
//! spine/bridge passage sums in the race analysis add up, and is the
//! convention under which type 2 speeds up as `lambda` grows.
//!
//! [`run`] is the production event engine (a competitive Dijkstra over a
//! priority queue). [`naive_run`] is a literal transcription of the dynamics
//! that rescans every boundary edge each step; it exists as a correctness
//! oracle and must produce identical outcomes.
//!
//! Determinism: `(graph, seed, lambda, init, stop)` fully determines the
//! outcome. Floating-point ties on arrival times are broken by
//! `(time, edge id, type id)`, and per-replication RNG streams come from
//! [`stream_seed`], a SplitMix64-style mix of master seed, replication index
//! and lambda index.

use std::collections::{BinaryHeap, HashSet};
use std::io::{self, Write};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, VertexId};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("lambda must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("initial configuration is empty")]
    EmptyInit,
    #[error("vertex {0} assigned both types in the initial configuration")]
    ConflictingInit(u32),
    #[error("init vertex {0} out of range")]
    InitOutOfRange(u32),
    #[error("stop-rule target vertex {0} out of range")]
    TargetOutOfRange(u32),
    #[error("weight assignment covers {got} edges, graph has {want}")]
    WeightCountMismatch { got: usize, want: usize },
    #[error("edge weights must be strictly positive and finite")]
    BadWeight,
    #[error("lambda grid must be strictly ascending and positive")]
    BadLambdaGrid,
    #[error("sources must be nonempty and in range")]
    BadSources,
    #[error("rate must be positive and finite")]
    BadRate,
}

/// Infection type. Type 1 spreads at rate 1, type 2 at rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InfectionType {
    One,
    Two,
}

impl InfectionType {
    pub fn rate(self, lambda: f64) -> f64 {
        match self {
            InfectionType::One => 1.0,
            InfectionType::Two => lambda,
        }
    }

    pub fn other(self) -> Self {
        match self {
            InfectionType::One => InfectionType::Two,
            InfectionType::Two => InfectionType::One,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            InfectionType::One => 1,
            InfectionType::Two => 2,
        }
    }

    fn slot(self) -> usize {
        self.as_u8() as usize - 1
    }
}

impl std::fmt::Display for InfectionType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// One positive weight per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    weights: Vec<f64>,
}

impl WeightAssignment {
    pub fn from_vec(weights: Vec<f64>) -> Result<Self, EngineError> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(EngineError::BadWeight);
        }
        Ok(Self { weights })
    }

    pub fn weight(&self, e: EdgeId) -> f64 {
        self.weights[e.index()]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().copied()
    }
}

/// Samples i.i.d. mean-1 exponential weights, one per edge, from a ChaCha8
/// stream seeded by `seed`. `X(e) = -ln(U)` with `U` uniform; `U == 0` is
/// rejected so every weight is strictly positive and finite.
pub fn sample_weights(g: &Graph, seed: u64) -> WeightAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..g.edge_count()).map(|_| exp1(&mut rng)).collect();
    WeightAssignment { weights }
}

/// One mean-1 exponential draw from the stream; `U == 0` is rejected so the
/// result is strictly positive and finite.
pub(crate) fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u = uniform_f64(rng);
        if u > 0.0 {
            return -u.ln();
        }
    }
}

/// Uniform f64 in [0, 1) from the top 53 bits of a u64 draw.
fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Derives the RNG stream seed for one replication. Coupled sweeps pass
/// `lambda_index = 0` so every lambda shares the replication's weights.
pub fn stream_seed(master: u64, replication: u64, lambda_index: u64) -> u64 {
    mix64(
        master.wrapping_add(GOLDEN.wrapping_mul(replication.wrapping_add(1)))
            ^ mix64(lambda_index.wrapping_add(0xD1B5_4A32_D192_ED03)),
    )
}

/// Finite nonempty assignment of source vertices to types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialConfig {
    entries: Vec<(VertexId, InfectionType)>,
}

impl InitialConfig {
    /// Duplicates of the same (vertex, type) pair collapse; the same vertex
    /// with both types is rejected.
    pub fn new(entries: Vec<(VertexId, InfectionType)>) -> Result<Self, EngineError> {
        if entries.is_empty() {
            return Err(EngineError::EmptyInit);
        }
        let mut seen: Vec<(VertexId, InfectionType)> = Vec::with_capacity(entries.len());
        for (v, t) in entries {
            match seen.iter().find(|(sv, _)| *sv == v) {
                Some((_, st)) if *st != t => return Err(EngineError::ConflictingInit(v.0)),
                Some(_) => {}
                None => seen.push((v, t)),
            }
        }
        Ok(Self { entries: seen })
    }

    /// The canonical competition start: one type-1 source, one type-2 source.
    pub fn two_sources(s1: VertexId, s2: VertexId) -> Result<Self, EngineError> {
        Self::new(vec![(s1, InfectionType::One), (s2, InfectionType::Two)])
    }

    pub fn entries(&self) -> &[(VertexId, InfectionType)] {
        &self.entries
    }

    pub fn has_both_types(&self) -> bool {
        self.entries.iter().any(|(_, t)| *t == InfectionType::One)
            && self.entries.iter().any(|(_, t)| *t == InfectionType::Two)
    }
}

/// When to stop the race.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopRule {
    /// Run until no eligible boundary edge remains.
    FullClaim,
    /// Stop once every listed target vertex has been claimed by either type.
    /// The per-type lists record which targets matter to which type; the
    /// stop condition itself is on the union, since a claim is final.
    Landmarks {
        type1_targets: Vec<VertexId>,
        type2_targets: Vec<VertexId>,
    },
    /// Stop after this many claims beyond the sources.
    MaxEvents(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// The candidate queue drained: no eligible boundary edge remained.
    Exhausted,
    LandmarksClaimed,
    EventLimit,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::Exhausted => "exhausted",
            Termination::LandmarksClaimed => "landmarks",
            Termination::EventLimit => "event_limit",
        };
        write!(f, "{s}")
    }
}

/// Per-vertex claim record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Claim {
    pub time: f64,
    pub which: InfectionType,
    /// Edge the infection arrived through; `None` for sources.
    pub parent: Option<EdgeId>,
}

/// Result of one race.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetitionOutcome {
    claims: Vec<Option<Claim>>,
    pub termination: Termination,
    /// Indexed by type slot: true iff, at termination, the type had no
    /// eligible boundary edge left (nowhere to grow).
    pub frontier_exhausted: [bool; 2],
    /// Claims beyond the sources.
    pub event_count: usize,
}

impl CompetitionOutcome {
    pub fn claim(&self, v: VertexId) -> Option<&Claim> {
        self.claims[v.index()].as_ref()
    }

    pub fn claimed_by(&self, which: InfectionType, v: VertexId) -> bool {
        matches!(self.claims[v.index()], Some(c) if c.which == which)
    }

    pub fn vertex_count(&self) -> usize {
        self.claims.len()
    }

    pub fn is_exhausted(&self, which: InfectionType) -> bool {
        self.frontier_exhausted[which.slot()]
    }

    pub fn claimed_count(&self, which: InfectionType) -> usize {
        self.claims
            .iter()
            .flatten()
            .filter(|c| c.which == which)
            .count()
    }

    /// Debug/CSV dump: `vertex_id,label,type,claim_time,parent_edge`.
    /// Unclaimed vertices emit type 0 with empty time and parent.
    pub fn write_csv(&self, g: &Graph, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "vertex_id,label,type,claim_time,parent_edge")?;
        for v in g.vertices() {
            let label = g.label(v).unwrap_or("");
            match self.claims[v.index()] {
                Some(c) => {
                    let parent = c.parent.map(|e| e.0.to_string()).unwrap_or_default();
                    writeln!(out, "{},{},{},{},{}", v.0, label, c.which, c.time, parent)?;
                }
                None => writeln!(out, "{},{},0,,", v.0, label)?,
            }
        }
        Ok(())
    }
}

/// Candidate claim: `target` would be infected through `edge` at `time`.
/// Min-order by (time, edge id, type id); `BinaryHeap` is a max-heap so the
/// comparison is reversed.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    time: f64,
    edge: EdgeId,
    which: InfectionType,
    target: VertexId,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.edge.cmp(&self.edge))
            .then_with(|| other.which.cmp(&self.which))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn arrival(claim_time: f64, weight: f64, rate: f64) -> f64 {
    claim_time + weight / rate
}

fn validate_common(
    g: &Graph,
    w: &WeightAssignment,
    lambda: f64,
    init: &InitialConfig,
    stop: &StopRule,
) -> Result<(), EngineError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(EngineError::BadLambda(lambda));
    }
    if w.len() != g.edge_count() {
        return Err(EngineError::WeightCountMismatch {
            got: w.len(),
            want: g.edge_count(),
        });
    }
    for (v, _) in init.entries() {
        if !g.contains(*v) {
            return Err(EngineError::InitOutOfRange(v.0));
        }
    }
    if let StopRule::Landmarks {
        type1_targets,
        type2_targets,
    } = stop
    {
        for v in type1_targets.iter().chain(type2_targets) {
            if !g.contains(*v) {
                return Err(EngineError::TargetOutOfRange(v.0));
            }
        }
    }
    Ok(())
}

struct LandmarkTracker {
    is_target: Vec<bool>,
    remaining: usize,
}

impl LandmarkTracker {
    fn new(g: &Graph, stop: &StopRule) -> Option<Self> {
        if let StopRule::Landmarks {
            type1_targets,
            type2_targets,
        } = stop
        {
            let mut is_target = vec![false; g.vertex_count()];
            let mut remaining = 0;
            for v in type1_targets.iter().chain(type2_targets) {
                if !is_target[v.index()] {
                    is_target[v.index()] = true;
                    remaining += 1;
                }
            }
            Some(Self {
                is_target,
                remaining,
            })
        } else {
            None
        }
    }

    /// Returns true once every target vertex has been claimed.
    fn record(&mut self, v: VertexId) -> bool {
        if self.is_target[v.index()] {
            self.is_target[v.index()] = false;
            self.remaining -= 1;
        }
        self.remaining == 0
    }
}

/// Scans for remaining eligible boundary edges per type. Runs at termination
/// only; bails out as soon as both types are known alive.
fn frontier_flags(g: &Graph, claims: &[Option<Claim>]) -> [bool; 2] {
    let mut alive = [false; 2];
    for e in 0..g.edge_count() {
        let (u, v) = g.endpoints(EdgeId(e as u32));
        let cu = &claims[u.index()];
        let cv = &claims[v.index()];
        let owner = match (cu, cv) {
            (Some(c), None) | (None, Some(c)) => Some(c.which),
            _ => None,
        };
        if let Some(t) = owner {
            alive[t.slot()] = true;
            if alive[0] && alive[1] {
                break;
            }
        }
    }
    [!alive[0], !alive[1]]
}

/// Event-driven race: pops the globally minimal candidate claim, claims the
/// target if still unclaimed, and pushes fresh candidates from it.
pub fn run(
    g: &Graph,
    w: &WeightAssignment,
    lambda: f64,
    init: &InitialConfig,
    stop: &StopRule,
) -> Result<CompetitionOutcome, EngineError> {
    validate_common(g, w, lambda, init, stop)?;

    let mut claims: Vec<Option<Claim>> = vec![None; g.vertex_count()];
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(64);
    let mut tracker = LandmarkTracker::new(g, stop);
    let mut event_count = 0usize;
    let mut termination = Termination::Exhausted;

    let event_limit = match stop {
        StopRule::MaxEvents(n) => Some(*n),
        _ => None,
    };

    let push_from = |claims: &[Option<Claim>], heap: &mut BinaryHeap<Candidate>, v: VertexId| {
        let c = claims[v.index()].expect("claimed vertex");
        let rate = c.which.rate(lambda);
        for &(nbr, e) in g.neighbors(v) {
            if claims[nbr.index()].is_none() {
                heap.push(Candidate {
                    time: arrival(c.time, w.weight(e), rate),
                    edge: e,
                    which: c.which,
                    target: nbr,
                });
            }
        }
    };

    let mut done = false;
    for &(v, t) in init.entries() {
        claims[v.index()] = Some(Claim {
            time: 0.0,
            which: t,
            parent: None,
        });
        if let Some(tr) = tracker.as_mut() {
            if tr.record(v) {
                termination = Termination::LandmarksClaimed;
                done = true;
            }
        }
    }
    if event_limit == Some(0) {
        termination = Termination::EventLimit;
        done = true;
    }
    if !done {
        for &(v, _) in init.entries() {
            push_from(&claims, &mut heap, v);
        }
        while let Some(cand) = heap.pop() {
            if claims[cand.target.index()].is_some() {
                continue;
            }
            claims[cand.target.index()] = Some(Claim {
                time: cand.time,
                which: cand.which,
                parent: Some(cand.edge),
            });
            event_count += 1;
            if let Some(tr) = tracker.as_mut() {
                if tr.record(cand.target) {
                    termination = Termination::LandmarksClaimed;
                    break;
                }
            }
            if event_limit == Some(event_count) {
                termination = Termination::EventLimit;
                break;
            }
            push_from(&claims, &mut heap, cand.target);
        }
    }

    let frontier_exhausted = frontier_flags(g, &claims);
    Ok(CompetitionOutcome {
        claims,
        termination,
        frontier_exhausted,
        event_count,
    })
}

/// Literal transcription of the dynamics used as a correctness oracle: each
/// step recomputes both types' eligible boundary edge sets from scratch via
/// [`Graph::boundary_edges`] and fires the minimal candidate. Outcomes must
/// match [`run`] exactly. Small graphs only: O(V * E) per run.
pub fn naive_run(
    g: &Graph,
    w: &WeightAssignment,
    lambda: f64,
    init: &InitialConfig,
    stop: &StopRule,
) -> Result<CompetitionOutcome, EngineError> {
    validate_common(g, w, lambda, init, stop)?;

    let mut claims: Vec<Option<Claim>> = vec![None; g.vertex_count()];
    for &(v, t) in init.entries() {
        claims[v.index()] = Some(Claim {
            time: 0.0,
            which: t,
            parent: None,
        });
    }

    let targets_done = |claims: &[Option<Claim>]| -> bool {
        match stop {
            StopRule::Landmarks {
                type1_targets,
                type2_targets,
            } => type1_targets
                .iter()
                .chain(type2_targets)
                .all(|v| claims[v.index()].is_some()),
            _ => false,
        }
    };

    let mut event_count = 0usize;
    let mut termination = Termination::Exhausted;
    loop {
        if matches!(stop, StopRule::Landmarks { .. }) && targets_done(&claims) {
            termination = Termination::LandmarksClaimed;
            break;
        }
        if let StopRule::MaxEvents(limit) = stop {
            if event_count == *limit {
                termination = Termination::EventLimit;
                break;
            }
        }

        // eligible edges for type i: boundary of S_i minus boundary of S_j
        let mut best: Option<Candidate> = None;
        for which in [InfectionType::One, InfectionType::Two] {
            let mine: HashSet<VertexId> = g
                .vertices()
                .filter(|v| matches!(claims[v.index()], Some(c) if c.which == which))
                .collect();
            let theirs: HashSet<VertexId> = g
                .vertices()
                .filter(|v| matches!(claims[v.index()], Some(c) if c.which == which.other()))
                .collect();
            let boundary_mine = g.boundary_edges(&mine);
            let boundary_theirs: HashSet<EdgeId> = g.boundary_edges(&theirs).into_iter().collect();
            for e in boundary_mine {
                if boundary_theirs.contains(&e) {
                    continue;
                }
                let (u, v) = g.endpoints(e);
                let (claimed, target) = if mine.contains(&u) { (u, v) } else { (v, u) };
                let cand = Candidate {
                    time: arrival(
                        claims[claimed.index()].expect("claimed").time,
                        w.weight(e),
                        which.rate(lambda),
                    ),
                    edge: e,
                    which,
                    target,
                };
                let better = match &best {
                    None => true,
                    Some(b) => (cand.time, cand.edge, cand.which) < (b.time, b.edge, b.which),
                };
                if better {
                    best = Some(cand);
                }
            }
        }

        match best {
            None => break,
            Some(cand) => {
                claims[cand.target.index()] = Some(Claim {
                    time: cand.time,
                    which: cand.which,
                    parent: Some(cand.edge),
                });
                event_count += 1;
            }
        }
    }

    let frontier_exhausted = frontier_flags(g, &claims);
    Ok(CompetitionOutcome {
        claims,
        termination,
        frontier_exhausted,
        event_count,
    })
}

/// One run per lambda, all sharing the same weight assignment (the monotone
/// coupling). The grid must be strictly ascending.
pub fn run_coupled(
    g: &Graph,
    w: &WeightAssignment,
    lambdas: &[f64],
    init: &InitialConfig,
    stop: &StopRule,
) -> Result<Vec<CompetitionOutcome>, EngineError> {
    if lambdas.is_empty()
        || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0))
        || lambdas.windows(2).any(|p| p[1] <= p[0])
    {
        return Err(EngineError::BadLambdaGrid);
    }
    lambdas
        .iter()
        .map(|&lambda| run(g, w, lambda, init, stop))
        .collect()
}

/// Single-type first-passage distances: `d(v)` is the minimal path weight sum
/// `X(e) / rate` from any source. Unreachable vertices get `f64::INFINITY`.
pub fn single_type_fpp(
    g: &Graph,
    w: &WeightAssignment,
    sources: &[VertexId],
    rate: f64,
) -> Result<Vec<f64>, EngineError> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(EngineError::BadRate);
    }
    if sources.is_empty() || sources.iter().any(|v| !g.contains(*v)) {
        return Err(EngineError::BadSources);
    }
    if w.len() != g.edge_count() {
        return Err(EngineError::WeightCountMismatch {
            got: w.len(),
            want: g.edge_count(),
        });
    }
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
    let mut settled = vec![false; g.vertex_count()];
    for &s in sources {
        dist[s.index()] = 0.0;
        heap.push(Candidate {
            time: 0.0,
            edge: EdgeId(0),
            which: InfectionType::One,
            target: s,
        });
    }
    while let Some(c) = heap.pop() {
        let v = c.target;
        if settled[v.index()] {
            continue;
        }
        settled[v.index()] = true;
        for &(nbr, e) in g.neighbors(v) {
            let d = arrival(dist[v.index()], w.weight(e), rate);
            if d < dist[nbr.index()] {
                dist[nbr.index()] = d;
                heap.push(Candidate {
                    time: d,
                    edge: e,
                    which: InfectionType::One,
                    target: nbr,
                });
            }
        }
    }
    Ok(dist)
}
