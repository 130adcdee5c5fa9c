//! Deterministic generators for the engineered graph families: two-spine
//! ladders with bridges, multi-spine constructions with a main spine and k
//! auxiliary spines, and the iterative countable-region construction.
//!
//! Every generator returns the graph together with a [`LandmarkMap`] naming
//! the construction vertices (spine positions, per-level attach points,
//! bridge edges), which the race classifiers and the Monte Carlo harness
//! consume. Builders are pure: the same spec always produces the same edge
//! list.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, GraphBuilder, VertexId};

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("sequence base must be positive")]
    ZeroBase,
    #[error("geometric ratio must be at least 2")]
    RatioTooSmall,
    #[error("sequence count must be at least 1")]
    EmptySequence,
    #[error("explicit sequence has {have} entries, need {need}")]
    SequenceTooShort { have: usize, need: usize },
    #[error("sequence must be strictly increasing and positive")]
    NotIncreasing,
    #[error("sequence overflow at term {0}")]
    SequenceOverflow(usize),
    #[error("gamma must be at least 1 and finite")]
    BadGamma,
    #[error("beta must be nonnegative and finite")]
    BadBeta,
    #[error("bridge length underflow at level {level}: {length} < 1")]
    LengthUnderflow { level: usize, length: i64 },
    #[error("attach index at level {0} does not exceed the previous level's")]
    AttachOverlap(usize),
    #[error("k must be at least 1")]
    KTooSmall,
    #[error("expected {expected} alphas, got {got}")]
    AlphaCountMismatch { expected: usize, got: usize },
    #[error("alphas must be finite and at least 1")]
    BadAlpha,
    #[error("alphas must be strictly increasing")]
    AlphasNotIncreasing,
    #[error("delta/eps sequences must be positive and nonincreasing, one per level")]
    BadMargins,
    #[error("eps sum {sum} is not below 1/(k+2) = {budget}")]
    EpsBudgetExceeded { sum: f64, budget: f64 },
}

/// `ceil(x)` with a snap-to-integer guard: values within a few ulps of an
/// integer are taken as that integer, so platform-level rounding differences
/// in `powf` cannot move a ceiling across an exact-integer boundary.
pub fn ceil_guarded(x: f64) -> u64 {
    debug_assert!(x.is_finite() && x >= 0.0);
    let nearest = x.round();
    if (x - nearest).abs() <= nearest.abs().max(1.0) * f64::EPSILON * 4.0 {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

/// `ceil(a^{7/8})`, the standard bridge-length exponent.
pub fn ceil_pow_7_8(a: u64) -> u64 {
    ceil_guarded((a as f64).powf(7.0 / 8.0))
}

/// Strictly increasing positive integer sequence, either geometric
/// `a_n = base * ratio^(n-1)` or an explicit list prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceKind {
    Geometric { base: u64, ratio: u64 },
    Explicit(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub count: usize,
}

impl SequenceSpec {
    pub fn geometric(base: u64, ratio: u64, count: usize) -> Self {
        Self {
            kind: SequenceKind::Geometric { base, ratio },
            count,
        }
    }

    pub fn explicit(values: Vec<u64>) -> Self {
        let count = values.len();
        Self {
            kind: SequenceKind::Explicit(values),
            count,
        }
    }

    pub fn generate(&self) -> Result<Vec<u64>, FamilyError> {
        if self.count == 0 {
            return Err(FamilyError::EmptySequence);
        }
        let seq = match &self.kind {
            SequenceKind::Geometric { base, ratio } => {
                if *base == 0 {
                    return Err(FamilyError::ZeroBase);
                }
                if *ratio < 2 {
                    return Err(FamilyError::RatioTooSmall);
                }
                let mut seq = Vec::with_capacity(self.count);
                let mut term = *base;
                for n in 0..self.count {
                    seq.push(term);
                    if n + 1 < self.count {
                        term = term
                            .checked_mul(*ratio)
                            .ok_or(FamilyError::SequenceOverflow(n + 1))?;
                    }
                }
                seq
            }
            SequenceKind::Explicit(values) => {
                if values.len() < self.count {
                    return Err(FamilyError::SequenceTooShort {
                        have: values.len(),
                        need: self.count,
                    });
                }
                values[..self.count].to_vec()
            }
        };
        if seq[0] == 0 || seq.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FamilyError::NotIncreasing);
        }
        Ok(seq)
    }
}

/// Lower-order correction applied to a bridge length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    None,
    Plus78,
    Minus78,
}

/// Optional shift of the second spine's attach index by `ceil(a_n^{7/8})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndShift {
    None,
    Plus78,
}

/// Bridge geometry of a ladder: bridge n runs from spine-1 index `a_n` to
/// spine-2 index `ceil(gamma * a_n)` (plus the end shift) and has length
/// `ceil(beta * a_n)` plus/minus `ceil(a_n^{7/8})` per the correction.
///
/// The coexistence window this geometry targets is
/// `[gamma/(1+beta), gamma+beta]`; which endpoints are attained depends on
/// the correction and the end shift (see [`LadderSpec::predicted_region`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeRule {
    pub gamma: f64,
    pub beta: f64,
    pub correction: Correction,
    pub end_shift: EndShift,
}

impl BridgeRule {
    pub fn new(gamma: f64, beta: f64, correction: Correction, end_shift: EndShift) -> Self {
        Self {
            gamma,
            beta,
            correction,
            end_shift,
        }
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        if !self.gamma.is_finite() || self.gamma < 1.0 {
            return Err(FamilyError::BadGamma);
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(FamilyError::BadBeta);
        }
        Ok(())
    }

    /// Spine-2 attach index of the level-n bridge.
    pub fn attach_index(&self, a_n: u64) -> u64 {
        let base = ceil_guarded(self.gamma * a_n as f64);
        match self.end_shift {
            EndShift::None => base,
            EndShift::Plus78 => base + ceil_pow_7_8(a_n),
        }
    }

    /// Bridge length at level n, as a signed value so underflow is reportable.
    pub fn bridge_length(&self, a_n: u64) -> i64 {
        let base = ceil_guarded(self.beta * a_n as f64) as i64;
        let corr = ceil_pow_7_8(a_n) as i64;
        match self.correction {
            Correction::None => base,
            Correction::Plus78 => base + corr,
            Correction::Minus78 => base - corr,
        }
    }
}

/// Two spines joined by one bridge per level. `tail` extends both spines
/// beyond their last attach points so the deepest landmarks stay interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub a: SequenceSpec,
    pub rule: BridgeRule,
    pub tail: u64,
}

impl LadderSpec {
    /// The Coex(G) = {2} geometry: gamma=2, beta=0, plus78.
    pub fn single_point_default() -> Self {
        Self {
            a: SequenceSpec::geometric(256, 4, 3),
            rule: BridgeRule::new(2.0, 0.0, Correction::Plus78, EndShift::None),
            tail: 64,
        }
    }

    /// The Coex(G) = \[2,5\] geometry: gamma=4, beta=1, plus78.
    pub fn interval_default() -> Self {
        Self {
            a: SequenceSpec::geometric(256, 4, 3),
            rule: BridgeRule::new(4.0, 1.0, Correction::Plus78, EndShift::None),
            tail: 64,
        }
    }

    /// Per-level geometry: `(a_n, attach2_n, bridge_len_n)`.
    pub fn level_geometry(&self) -> Result<Vec<(u64, u64, u64)>, FamilyError> {
        self.rule.validate()?;
        let seq = self.a.generate()?;
        let mut out = Vec::with_capacity(seq.len());
        let mut prev_attach = 0u64;
        for (idx, &a_n) in seq.iter().enumerate() {
            let level = idx + 1;
            let attach = self.rule.attach_index(a_n);
            if level > 1 && attach <= prev_attach {
                return Err(FamilyError::AttachOverlap(level));
            }
            prev_attach = attach;
            let len = self.rule.bridge_length(a_n);
            if len < 1 {
                return Err(FamilyError::LengthUnderflow { level, length: len });
            }
            out.push((a_n, attach, len as u64));
        }
        Ok(out)
    }

    pub fn predicted_region(&self) -> CoexRegion {
        ladder_region(&self.rule)
    }
}

/// Main spine plus `k` auxiliary spines grown level by level from a complete
/// graph on `k+1` roots. `delta`/`eps` are the per-level separation and
/// failure-probability margins used by the condition checker, one entry per
/// level; they do not affect the generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSpineSpec {
    pub k: usize,
    pub alphas: Vec<f64>,
    pub b: SequenceSpec,
    pub delta: Vec<f64>,
    pub eps: Vec<f64>,
}

impl MultiSpineSpec {
    /// Fills `delta`/`eps` with the default margins: `delta_n` starts at a
    /// fifth of the smallest gap among `{1, alpha_1, ..., alpha_k}` and
    /// halves per level; `eps_n = 2^{-n} / (2(k+2))`, which sums to
    /// `1/(2(k+2))`, half the allowed budget.
    pub fn with_default_margins(
        k: usize,
        alphas: Vec<f64>,
        b: SequenceSpec,
    ) -> Result<Self, FamilyError> {
        if k == 0 {
            return Err(FamilyError::KTooSmall);
        }
        if alphas.len() != k {
            return Err(FamilyError::AlphaCountMismatch {
                expected: k,
                got: alphas.len(),
            });
        }
        let levels = b.count;
        let mut rates: Vec<f64> = alphas.clone();
        rates.push(1.0);
        rates.sort_by(f64::total_cmp);
        let mut min_gap = f64::INFINITY;
        for w in rates.windows(2) {
            min_gap = min_gap.min(w[1] - w[0]);
        }
        if !min_gap.is_finite() || min_gap <= 0.0 {
            return Err(FamilyError::BadMargins);
        }
        let delta = (0..levels)
            .map(|n| 0.2 * min_gap / f64::powi(2.0, n as i32))
            .collect();
        let eps = (0..levels)
            .map(|n| 1.0 / (2.0 * (k + 2) as f64) / f64::powi(2.0, (n + 1) as i32 - 1))
            .collect();
        let spec = Self {
            k,
            alphas,
            b,
            delta,
            eps,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        if self.k == 0 {
            return Err(FamilyError::KTooSmall);
        }
        if self.alphas.len() != self.k {
            return Err(FamilyError::AlphaCountMismatch {
                expected: self.k,
                got: self.alphas.len(),
            });
        }
        if self.alphas.iter().any(|a| !a.is_finite() || *a < 1.0) {
            return Err(FamilyError::BadAlpha);
        }
        let levels = self.b.count;
        for seq in [&self.delta, &self.eps] {
            if seq.len() != levels
                || seq.iter().any(|x| !x.is_finite() || *x <= 0.0)
                || seq.windows(2).any(|w| w[1] > w[0])
            {
                return Err(FamilyError::BadMargins);
            }
        }
        let budget = 1.0 / (self.k + 2) as f64;
        let sum: f64 = self.eps.iter().sum();
        if sum >= budget {
            return Err(FamilyError::EpsBudgetExceeded { sum, budget });
        }
        self.b.generate().map(|_| ())
    }

    pub fn predicted_region(&self) -> CoexRegion {
        let mut pts = self.alphas.clone();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        CoexRegion::Points(pts)
    }
}

/// Iterative construction whose level n spawns spine n, targeting the
/// coexistence set `{alpha_1, alpha_2, ...}` (strictly increasing, unbounded
/// in the limit; only a finite prefix is built).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountableSpec {
    /// `alpha_1, alpha_2, ...` prefix; `alpha_0 = 1` is implied.
    pub alphas: Vec<f64>,
    pub b: SequenceSpec,
}

impl CountableSpec {
    pub fn validate(&self) -> Result<(), FamilyError> {
        let levels = self.b.count;
        if self.alphas.len() < levels {
            return Err(FamilyError::AlphaCountMismatch {
                expected: levels,
                got: self.alphas.len(),
            });
        }
        if self.alphas.iter().any(|a| !a.is_finite() || *a < 1.0) {
            return Err(FamilyError::BadAlpha);
        }
        if self.alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FamilyError::AlphasNotIncreasing);
        }
        self.b.generate().map(|_| ())
    }

    pub fn predicted_region(&self) -> CoexRegion {
        CoexRegion::CountablePrefix(self.alphas.clone())
    }
}

/// Any of the three constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FamilySpec {
    Ladder(LadderSpec),
    MultiSpine(MultiSpineSpec),
    Countable(CountableSpec),
}

impl FamilySpec {
    pub fn build(&self) -> Result<(Graph, LandmarkMap), FamilyError> {
        match self {
            FamilySpec::Ladder(s) => build_ladder(s),
            FamilySpec::MultiSpine(s) => build_multispine(s),
            FamilySpec::Countable(s) => build_countable(s),
        }
    }

    pub fn predicted_region(&self) -> CoexRegion {
        match self {
            FamilySpec::Ladder(s) => s.predicted_region(),
            FamilySpec::MultiSpine(s) => s.predicted_region(),
            FamilySpec::Countable(s) => s.predicted_region(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::Ladder(_) => "ladder",
            FamilySpec::MultiSpine(_) => "multispine",
            FamilySpec::Countable(_) => "countable",
        }
    }
}

/// Predicted coexistence region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoexRegion {
    Empty,
    Points(Vec<f64>),
    Interval {
        lo: f64,
        hi: f64,
        lo_closed: bool,
        hi_closed: bool,
    },
    /// Finite prefix of a countable set; rendered with a trailing ellipsis.
    CountablePrefix(Vec<f64>),
}

impl CoexRegion {
    pub fn contains(&self, lambda: f64) -> bool {
        match self {
            CoexRegion::Empty => false,
            CoexRegion::Points(pts) => pts.contains(&lambda),
            CoexRegion::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => {
                let above = if *lo_closed {
                    lambda >= *lo
                } else {
                    lambda > *lo
                };
                let below = if *hi_closed {
                    lambda <= *hi
                } else {
                    lambda < *hi
                };
                above && below
            }
            CoexRegion::CountablePrefix(pts) => pts.contains(&lambda),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl std::fmt::Display for CoexRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoexRegion::Empty => write!(f, "{{}}"),
            CoexRegion::Points(pts) => {
                let inner: Vec<String> = pts.iter().map(|p| fmt_num(*p)).collect();
                write!(f, "{{{}}}", inner.join(","))
            }
            CoexRegion::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => write!(
                f,
                "{}{},{}{}",
                if *lo_closed { "[" } else { "(" },
                fmt_num(*lo),
                fmt_num(*hi),
                if *hi_closed { "]" } else { ")" }
            ),
            CoexRegion::CountablePrefix(pts) => {
                let inner: Vec<String> = pts.iter().map(|p| fmt_num(*p)).collect();
                write!(f, "{{{},...}}", inner.join(","))
            }
        }
    }
}

fn ladder_region(rule: &BridgeRule) -> CoexRegion {
    let lo = rule.gamma / (1.0 + rule.beta);
    let hi = rule.gamma + rule.beta;
    let c = match rule.correction {
        Correction::None => 0i32,
        Correction::Plus78 => 1,
        Correction::Minus78 => -1,
    };
    let s = match rule.end_shift {
        EndShift::None => 0i32,
        EndShift::Plus78 => 1,
    };
    // An endpoint is attained iff the a_n^{7/8}-order coefficient of the
    // relevant passage-time mean is strictly positive there.
    let hi_closed = (s + c) > 0;
    let lo_closed = c as f64 - s as f64 * (1.0 + rule.beta) / rule.gamma > 0.0;
    if lo == hi {
        if lo_closed && hi_closed {
            CoexRegion::Points(vec![lo])
        } else {
            CoexRegion::Empty
        }
    } else {
        CoexRegion::Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    Ladder,
    MultiSpine,
    Countable,
}

/// Ordered vertex list `v_{i,0}, v_{i,1}, ...` of one spine together with the
/// edges `e_{i,j}` joining consecutive positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpineLandmarks {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

/// A distinguished vertex, addressed as a position on a spine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelMark {
    pub spine: usize,
    pub index: usize,
}

/// One bridge: the auxiliary spine it lands on, its edges in path order, and
/// its interior vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BridgeLandmarks {
    pub spine: usize,
    pub edges: Vec<EdgeId>,
    pub interior: Vec<VertexId>,
}

/// Marks and bridges introduced at one construction level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelLandmarks {
    pub level: usize,
    pub marks: Vec<LevelMark>,
    pub bridges: Vec<BridgeLandmarks>,
}

/// Positions of every named construction vertex. Spine 0 is the first or
/// main spine; ladder spine 1 is the second spine.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandmarkMap {
    pub kind: FamilyKind,
    pub spines: Vec<SpineLandmarks>,
    pub levels: Vec<LevelLandmarks>,
}

impl LandmarkMap {
    pub fn level(&self, n: usize) -> Option<&LevelLandmarks> {
        self.levels.iter().find(|l| l.level == n)
    }

    pub fn max_level(&self) -> usize {
        self.levels.iter().map(|l| l.level).max().unwrap_or(0)
    }

    pub fn mark_vertex(&self, mark: LevelMark) -> VertexId {
        self.spines[mark.spine].vertices[mark.index]
    }

    /// Every marked vertex across all levels, deduplicated, in level order.
    pub fn all_mark_vertices(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        for level in &self.levels {
            for &m in &level.marks {
                let v = self.mark_vertex(m);
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Index of the deepest mark on each spine, if any.
    fn last_mark_index(&self, spine: usize) -> Option<usize> {
        self.levels
            .iter()
            .flat_map(|l| l.marks.iter())
            .filter(|m| m.spine == spine)
            .map(|m| m.index)
            .max()
    }

    /// The tail segment of a spine: vertices strictly beyond its deepest mark.
    pub fn tail_vertices(&self, spine: usize) -> &[VertexId] {
        let last = self.last_mark_index(spine).unwrap_or(0);
        let verts = &self.spines[spine].vertices;
        &verts[(last + 1).min(verts.len())..]
    }

    /// Truncation boundary: each spine's tail segment, or its final vertex
    /// when the spine has no tail beyond the deepest mark.
    pub fn truncation_boundary(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        for spine in 0..self.spines.len() {
            let tail = self.tail_vertices(spine);
            if tail.is_empty() {
                if let Some(&last) = self.spines[spine].vertices.last() {
                    if !out.contains(&last) {
                        out.push(last);
                    }
                }
            } else {
                out.extend_from_slice(tail);
            }
        }
        out
    }
}

/// Grows a labeled spine of `length` edges from `root`, recording vertices
/// and edges in order.
fn grow_spine(builder: &mut GraphBuilder, root: VertexId, length: u64) -> SpineLandmarks {
    let mut vertices = Vec::with_capacity(length as usize + 1);
    let mut edges = Vec::with_capacity(length as usize);
    vertices.push(root);
    let mut cursor = root;
    for _ in 0..length {
        let next = builder.add_vertex(None);
        let e = builder
            .add_edge(cursor, next)
            .expect("spine edges are fresh");
        vertices.push(next);
        edges.push(e);
        cursor = next;
    }
    SpineLandmarks { vertices, edges }
}

fn extend_spine(builder: &mut GraphBuilder, spine: &mut SpineLandmarks, length: u64) {
    let mut cursor = *spine.vertices.last().expect("spine is nonempty");
    for _ in 0..length {
        let next = builder.add_vertex(None);
        let e = builder
            .add_edge(cursor, next)
            .expect("spine edges are fresh");
        spine.vertices.push(next);
        spine.edges.push(e);
        cursor = next;
    }
}

/// Adds a bridge path and records its edges in order from `u` to `w`.
fn lay_bridge(
    builder: &mut GraphBuilder,
    u: VertexId,
    w: VertexId,
    length: u64,
    spine: usize,
) -> BridgeLandmarks {
    let before = builder.edge_count();
    let interior = builder
        .add_bridge(u, w, length as usize)
        .expect("validated specs never produce duplicate or degenerate bridges");
    let edges = (before..builder.edge_count())
        .map(|i| EdgeId(i as u32))
        .collect();
    BridgeLandmarks {
        spine,
        edges,
        interior,
    }
}

/// Builds the ladder: two spines from roots `v_{1,0}`, `v_{2,0}`, one bridge
/// per level joining `v_{1,a_n}` to the rule's spine-2 attach index.
pub fn build_ladder(spec: &LadderSpec) -> Result<(Graph, LandmarkMap), FamilyError> {
    let geometry = spec.level_geometry()?;
    let last = geometry.last().expect("at least one level");
    let spine1_len = last.0 + spec.tail;
    let spine2_len = last.1 + spec.tail;

    let mut builder = GraphBuilder::new();
    let root1 = builder.add_vertex(Some("spine1:0"));
    let spine1 = grow_spine(&mut builder, root1, spine1_len);
    let root2 = builder.add_vertex(Some("spine2:0"));
    let spine2 = grow_spine(&mut builder, root2, spine2_len);

    let mut levels = Vec::with_capacity(geometry.len());
    for (idx, &(a_n, attach, len)) in geometry.iter().enumerate() {
        let level = idx + 1;
        let u = spine1.vertices[a_n as usize];
        let w = spine2.vertices[attach as usize];
        builder
            .set_label(u, format!("spine1:{a_n}"))
            .expect("vertex exists");
        builder
            .set_label(w, format!("spine2:{attach}"))
            .expect("vertex exists");
        let bridge = lay_bridge(&mut builder, u, w, len, 1);
        levels.push(LevelLandmarks {
            level,
            marks: vec![
                LevelMark {
                    spine: 0,
                    index: a_n as usize,
                },
                LevelMark {
                    spine: 1,
                    index: attach as usize,
                },
            ],
            bridges: vec![bridge],
        });
    }

    let map = LandmarkMap {
        kind: FamilyKind::Ladder,
        spines: vec![spine1, spine2],
        levels,
    };
    Ok((builder.freeze(), map))
}

/// Builds the multi-spine family: level 0 is a complete graph on `k+1` roots
/// `x_{0,0..k}`; level n+1 extends spine i by `ceil(alpha_i * b_{n+1})`
/// (with `alpha_0 = 1`) and bridges `x_{n+1,0}` to each `x_{n+1,i}` with
/// length `ceil(b_{n+1}^{7/8})`.
pub fn build_multispine(spec: &MultiSpineSpec) -> Result<(Graph, LandmarkMap), FamilyError> {
    spec.validate()?;
    let b_seq = spec.b.generate()?;
    let k = spec.k;

    let mut builder = GraphBuilder::new();
    let roots: Vec<VertexId> = (0..=k)
        .map(|i| builder.add_vertex(Some(&format!("x0,{i}"))))
        .collect();
    for i in 0..=k {
        for j in (i + 1)..=k {
            builder
                .add_edge(roots[i], roots[j])
                .expect("complete graph edges are fresh");
        }
    }

    let mut spines: Vec<SpineLandmarks> = roots
        .iter()
        .map(|&r| SpineLandmarks {
            vertices: vec![r],
            edges: Vec::new(),
        })
        .collect();
    let mut levels = vec![LevelLandmarks {
        level: 0,
        marks: (0..=k).map(|i| LevelMark { spine: i, index: 0 }).collect(),
        bridges: Vec::new(),
    }];

    for (idx, &b_n) in b_seq.iter().enumerate() {
        let level = idx + 1;
        let mut marks = Vec::with_capacity(k + 1);
        for (i, spine) in spines.iter_mut().enumerate() {
            let alpha_i = if i == 0 { 1.0 } else { spec.alphas[i - 1] };
            let len = ceil_guarded(alpha_i * b_n as f64);
            extend_spine(&mut builder, spine, len);
            let index = spine.vertices.len() - 1;
            builder
                .set_label(spine.vertices[index], format!("x{level},{i}"))
                .expect("vertex exists");
            marks.push(LevelMark { spine: i, index });
        }
        let bridge_len = ceil_pow_7_8(b_n);
        let hub = spines[0].vertices[marks[0].index];
        let mut bridges = Vec::with_capacity(k);
        for i in 1..=k {
            let target = spines[i].vertices[marks[i].index];
            bridges.push(lay_bridge(&mut builder, hub, target, bridge_len, i));
        }
        levels.push(LevelLandmarks {
            level,
            marks,
            bridges,
        });
    }

    let map = LandmarkMap {
        kind: FamilyKind::MultiSpine,
        spines,
        levels,
    };
    Ok((builder.freeze(), map))
}

/// Builds the countable-region family. Level n+1 extends each existing spine
/// i by `ceil(alpha_i * b_{n+1})`, spawns spine n+1 from `x_{n,n}` with
/// length `ceil(alpha_{n+1} * b_{n+1})`, and bridges `x_{n+1,0}` to each
/// `x_{n+1,i}` for `i = 1..n` with length `ceil(b_{n+1}^{7/8})`.
pub fn build_countable(spec: &CountableSpec) -> Result<(Graph, LandmarkMap), FamilyError> {
    spec.validate()?;
    let b_seq = spec.b.generate()?;

    let mut builder = GraphBuilder::new();
    let root = builder.add_vertex(Some("x0,0"));
    let mut spines = vec![SpineLandmarks {
        vertices: vec![root],
        edges: Vec::new(),
    }];
    let mut levels = vec![LevelLandmarks {
        level: 0,
        marks: vec![LevelMark { spine: 0, index: 0 }],
        bridges: Vec::new(),
    }];

    for (idx, &b_next) in b_seq.iter().enumerate() {
        let n = idx; // extending G_n into G_{n+1}
        let level = n + 1;
        let mut marks = Vec::with_capacity(level + 1);
        // the new spine starts at x_{n,n}, recorded before extension
        let spawn_from = {
            let prev_marks = &levels[n].marks;
            let m = prev_marks[n];
            spines[m.spine].vertices[m.index]
        };
        for (i, spine) in spines.iter_mut().enumerate() {
            let alpha_i = if i == 0 { 1.0 } else { spec.alphas[i - 1] };
            let len = ceil_guarded(alpha_i * b_next as f64);
            extend_spine(&mut builder, spine, len);
            let index = spine.vertices.len() - 1;
            builder
                .set_label(spine.vertices[index], format!("x{level},{i}"))
                .expect("vertex exists");
            marks.push(LevelMark { spine: i, index });
        }
        // spawn spine n+1
        {
            let alpha_new = spec.alphas[n];
            let len = ceil_guarded(alpha_new * b_next as f64);
            let mut spine = SpineLandmarks {
                vertices: vec![spawn_from],
                edges: Vec::new(),
            };
            extend_spine(&mut builder, &mut spine, len);
            let index = spine.vertices.len() - 1;
            builder
                .set_label(spine.vertices[index], format!("x{level},{level}"))
                .expect("vertex exists");
            spines.push(spine);
            marks.push(LevelMark {
                spine: level,
                index,
            });
        }
        let bridge_len = ceil_pow_7_8(b_next);
        let hub = spines[0].vertices[marks[0].index];
        let mut bridges = Vec::with_capacity(n);
        for (i, mark) in marks.iter().enumerate().take(n + 1).skip(1) {
            let target = spines[i].vertices[mark.index];
            bridges.push(lay_bridge(&mut builder, hub, target, bridge_len, i));
        }
        levels.push(LevelLandmarks {
            level,
            marks,
            bridges,
        });
    }

    let map = LandmarkMap {
        kind: FamilyKind::Countable,
        spines,
        levels,
    };
    Ok((builder.freeze(), map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_pow_7_8_table() {
        // hand-checked: 4^{7/8}=3.364, 16^{7/8}=11.314, 256^{7/8}=128 exact,
        // 512^{7/8}=234.75, 1024^{7/8}=430.54, 2048^{7/8}=789.61,
        // 4096^{7/8}=1448.15, 8192^{7/8}=2655.93
        assert_eq!(ceil_pow_7_8(4), 4);
        assert_eq!(ceil_pow_7_8(16), 12);
        assert_eq!(ceil_pow_7_8(256), 128);
        assert_eq!(ceil_pow_7_8(512), 235);
        assert_eq!(ceil_pow_7_8(1024), 431);
        assert_eq!(ceil_pow_7_8(2048), 790);
        assert_eq!(ceil_pow_7_8(4096), 1449);
        assert_eq!(ceil_pow_7_8(8192), 2656);
        assert_eq!(ceil_pow_7_8(1), 1);
    }

    #[test]
    fn ceil_guarded_snaps_near_integers() {
        // (10/3)*3 lands a few ulps above 10 in binary
        assert_eq!(ceil_guarded((10.0f64 / 3.0) * 3.0), 10);
        assert_eq!(ceil_guarded(3.2), 4);
        assert_eq!(ceil_guarded(0.0), 0);
    }

    #[test]
    fn geometric_sequences() {
        let s = SequenceSpec::geometric(256, 4, 3);
        assert_eq!(s.generate().unwrap(), vec![256, 1024, 4096]);
        assert_eq!(
            SequenceSpec::geometric(256, 1, 3).generate(),
            Err(FamilyError::RatioTooSmall)
        );
        assert_eq!(
            SequenceSpec::explicit(vec![4, 4]).generate(),
            Err(FamilyError::NotIncreasing)
        );
    }

    #[test]
    fn ladder_single_level_geometry() {
        // gamma=2, beta=0, plus78, a=(4): bridge from v_{1,4} to v_{2,8},
        // length ceil(4^{7/8}) = 4
        let spec = LadderSpec {
            a: SequenceSpec::explicit(vec![4]),
            rule: BridgeRule::new(2.0, 0.0, Correction::Plus78, EndShift::None),
            tail: 2,
        };
        let geom = spec.level_geometry().unwrap();
        assert_eq!(geom, vec![(4, 8, 4)]);

        let (g, lm) = build_ladder(&spec).unwrap();
        assert!(g.is_connected());
        assert!(g.max_degree() <= 3);
        assert_eq!(lm.spines.len(), 2);
        assert_eq!(lm.spines[0].vertices.len(), 4 + 2 + 1);
        assert_eq!(lm.spines[1].vertices.len(), 8 + 2 + 1);
        let level = lm.level(1).unwrap();
        assert_eq!(level.bridges[0].edges.len(), 4);
        assert_eq!(level.bridges[0].interior.len(), 3);
        assert_eq!(g.label(lm.mark_vertex(level.marks[0])), Some("spine1:4"));
        assert_eq!(g.label(lm.mark_vertex(level.marks[1])), Some("spine2:8"));
    }

    #[test]
    fn ladder_default_bridge_lengths() {
        let spec = LadderSpec::single_point_default();
        let geom = spec.level_geometry().unwrap();
        let lens: Vec<u64> = geom.iter().map(|g| g.2).collect();
        assert_eq!(lens, vec![128, 431, 1449]);
    }

    #[test]
    fn ladder_interval_preset_geometry() {
        // gamma=4, beta=1, plus78, a=(256): bridge v_{1,256} -> v_{2,1024},
        // length 256 + 128 = 384
        let spec = LadderSpec {
            a: SequenceSpec::explicit(vec![256]),
            rule: BridgeRule::new(4.0, 1.0, Correction::Plus78, EndShift::None),
            tail: 0,
        };
        assert_eq!(spec.level_geometry().unwrap(), vec![(256, 1024, 384)]);
    }

    #[test]
    fn ladder_length_underflow() {
        let spec = LadderSpec {
            a: SequenceSpec::explicit(vec![16]),
            rule: BridgeRule::new(2.0, 0.0, Correction::Minus78, EndShift::None),
            tail: 0,
        };
        assert!(matches!(
            spec.level_geometry(),
            Err(FamilyError::LengthUnderflow { .. })
        ));
    }

    #[test]
    fn predicted_regions() {
        let mk = |gamma, beta, corr, shift| {
            ladder_region(&BridgeRule::new(gamma, beta, corr, shift)).to_string()
        };
        assert_eq!(mk(2.0, 0.0, Correction::Plus78, EndShift::None), "{2}");
        assert_eq!(mk(4.0, 1.0, Correction::Plus78, EndShift::None), "[2,5]");
        assert_eq!(mk(4.0, 1.0, Correction::Minus78, EndShift::None), "(2,5)");
        assert_eq!(mk(4.0, 1.0, Correction::None, EndShift::Plus78), "(2,5]");
    }

    #[test]
    fn region_endpoints_ordered() {
        for (gamma, beta) in [(1.0, 0.0), (2.0, 0.0), (4.0, 1.0), (3.0, 2.5), (1.5, 0.1)] {
            let lo = gamma / (1.0 + beta);
            let hi = gamma + beta;
            assert!(lo <= hi);
            assert_eq!(lo == hi, beta == 0.0);
        }
    }

    #[test]
    fn region_contains_respects_endpoints() {
        let open = CoexRegion::Interval {
            lo: 2.0,
            hi: 5.0,
            lo_closed: false,
            hi_closed: true,
        };
        assert!(!open.contains(2.0));
        assert!(open.contains(2.5));
        assert!(open.contains(5.0));
        assert!(!open.contains(5.1));
        assert!(CoexRegion::Points(vec![2.0]).contains(2.0));
        assert!(!CoexRegion::Points(vec![2.0]).contains(3.0));
    }

    #[test]
    fn multispine_small_geometry() {
        // k=1, alpha=(2), b=(16): paths of length 16 and 32, bridge 12
        let spec =
            MultiSpineSpec::with_default_margins(1, vec![2.0], SequenceSpec::explicit(vec![16]))
                .unwrap();
        let (g, lm) = build_multispine(&spec).unwrap();
        assert!(g.is_connected());
        assert_eq!(lm.spines[0].edges.len(), 16);
        assert_eq!(lm.spines[1].edges.len(), 32);
        let level = lm.level(1).unwrap();
        assert_eq!(level.bridges.len(), 1);
        assert_eq!(level.bridges[0].edges.len(), 12);
        // one mark per spine at every level
        for level in &lm.levels {
            assert_eq!(level.marks.len(), 2);
        }
    }

    #[test]
    fn multispine_root_is_complete_graph() {
        let spec = MultiSpineSpec::with_default_margins(
            2,
            vec![2.0, 4.0],
            SequenceSpec::explicit(vec![8]),
        )
        .unwrap();
        let (g, lm) = build_multispine(&spec).unwrap();
        // triangle on the three roots
        assert_eq!(lm.level(0).unwrap().marks.len(), 3);
        for i in 0..3u32 {
            assert!(g.neighbors(VertexId(i)).len() >= 2);
        }
        assert!(g.max_degree() <= 2 + 2);
    }

    #[test]
    fn multispine_eps_budget_enforced() {
        let bad = MultiSpineSpec {
            k: 1,
            alphas: vec![2.0],
            b: SequenceSpec::explicit(vec![8]),
            delta: vec![0.1],
            eps: vec![0.4], // budget is 1/3
        };
        assert!(matches!(
            bad.validate(),
            Err(FamilyError::EpsBudgetExceeded { .. })
        ));
        assert_eq!(
            MultiSpineSpec::with_default_margins(0, vec![], SequenceSpec::explicit(vec![8])),
            Err(FamilyError::KTooSmall)
        );
    }

    #[test]
    fn countable_level_counts() {
        let spec = CountableSpec {
            alphas: vec![2.0, 3.0, 4.0],
            b: SequenceSpec::explicit(vec![8, 16, 32]),
        };
        let (g, lm) = build_countable(&spec).unwrap();
        assert!(g.is_connected());
        // one new spine per level
        assert_eq!(lm.spines.len(), 4);
        // first level has no bridges, level n has n-1
        assert!(lm.level(1).unwrap().bridges.is_empty());
        assert_eq!(lm.level(2).unwrap().bridges.len(), 1);
        assert_eq!(lm.level(3).unwrap().bridges.len(), 2);
        // all bridges at level n+1 share length ceil(b_{n+1}^{7/8})
        for level in &lm.levels {
            if level.level >= 2 {
                let expect = ceil_pow_7_8([8u64, 16, 32][level.level - 1]);
                for b in &level.bridges {
                    assert_eq!(b.edges.len() as u64, expect);
                }
            }
        }
        // level n carries n+1 marks
        for level in &lm.levels {
            assert_eq!(level.marks.len(), level.level + 1);
        }
    }

    #[test]
    fn landmark_roundtrip_distance() {
        let spec = LadderSpec {
            a: SequenceSpec::explicit(vec![4, 16]),
            rule: BridgeRule::new(2.0, 0.0, Correction::Plus78, EndShift::None),
            tail: 3,
        };
        let (g, lm) = build_ladder(&spec).unwrap();
        for level in &lm.levels {
            for &m in &level.marks {
                let spine = &lm.spines[m.spine];
                // walking the recorded spine edges from the root reaches the
                // mark in exactly `index` steps
                let mut at = spine.vertices[0];
                for (steps, &e) in spine.edges.iter().enumerate().take(m.index) {
                    let (u, w) = g.endpoints(e);
                    at = if u == at { w } else { u };
                    assert_eq!(at, spine.vertices[steps + 1]);
                }
                assert_eq!(at, lm.mark_vertex(m));
            }
        }
    }

    #[test]
    fn build_is_deterministic() {
        let spec = LadderSpec::single_point_default();
        let (g1, _) = build_ladder(&spec).unwrap();
        let (g2, _) = build_ladder(&spec).unwrap();
        let mut d1 = Vec::new();
        let mut d2 = Vec::new();
        g1.write_dump(&mut d1).unwrap();
        g2.write_dump(&mut d2).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn boundary_and_tails() {
        let spec = LadderSpec {
            a: SequenceSpec::explicit(vec![4]),
            rule: BridgeRule::new(2.0, 0.0, Correction::Plus78, EndShift::None),
            tail: 3,
        };
        let (_, lm) = build_ladder(&spec).unwrap();
        assert_eq!(lm.tail_vertices(0).len(), 3);
        assert_eq!(lm.tail_vertices(1).len(), 3);
        assert_eq!(lm.truncation_boundary().len(), 6);
    }
}
