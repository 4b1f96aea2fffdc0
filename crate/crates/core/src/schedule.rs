//! Schedule synthesis.
//!
//! Each level `k` of the depth chain contributes one stage that rotates
//! `|w_k⟩` onto `|w_{k+1}⟩` inside `span{w_k, w_{k+1}}` by `p` rounds of
//! phase matching:
//!
//! ```text
//! round = U2(α) · U1(α)
//! U1(α) = I − (1 − e^{−iα}) |w_{k+1}⟩⟨w_{k+1}|   (ancilla gadget around exp(−iL·π/g_k))
//! U2(α) = I − (1 − e^{−iα}) |w_k⟩⟨w_k|           (A_k · exp(−iα|m⟩⟨m|) · A_k†)
//! ```
//!
//! where `A_k` is everything emitted for the earlier stages. The conjugation
//! is expanded eagerly, so a schedule is a flat list of primitive ops.
//!
//! `exp(−iL·π/g_k)` is `+1` on `Λ_{k+1}` and `−1` on `Λ̄_{k+1}`, so the
//! gadget phases the `|w̄_{k+1}⟩` axis by `e^{iα}`; on the stage subspace
//! that equals `U1(α)` up to the global phase `e^{iα}`, which is folded into
//! [`Schedule::global_phase`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::depth::{transitive_overlaps, DepthChain, OVERLAP_FLOOR};
use crate::error::{Error, Result};

/// Synthesis refuses a stage whose reduced model misses the target by more than this.
const STAGE_FIDELITY_FLOOR: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    /// `exp(−i·x)` for walks and oracles, `diag(1, e^{iθ})` for `Z_θ`.
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn is_plus(&self) -> bool {
        *self == Sign::Plus
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Sign, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be 1 or -1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum PrimitiveOp {
    /// `exp(∓iHt)` on the vertex register.
    #[serde(rename = "walk")]
    Walk {
        t: f64,
        #[serde(default, skip_serializing_if = "Sign::is_plus")]
        sign: Sign,
    },
    /// `exp(∓iθ|m⟩⟨m|)`.
    #[serde(rename = "oracle")]
    Oracle { theta: f64, sign: Sign },
    #[serde(rename = "anc_h")]
    AncillaHadamard,
    /// `diag(1, e^{±iθ})` on the ancilla.
    #[serde(rename = "anc_z")]
    AncillaPhase {
        theta: f64,
        #[serde(default, skip_serializing_if = "Sign::is_plus")]
        sign: Sign,
    },
    /// Walk controlled on ancilla `|1⟩`.
    #[serde(rename = "cwalk")]
    ControlledWalk {
        t: f64,
        #[serde(default, skip_serializing_if = "Sign::is_plus")]
        sign: Sign,
    },
}

impl PrimitiveOp {
    pub fn adjoint(self) -> PrimitiveOp {
        match self {
            PrimitiveOp::Walk { t, sign } => PrimitiveOp::Walk { t, sign: sign.flip() },
            PrimitiveOp::Oracle { theta, sign } => PrimitiveOp::Oracle { theta, sign: sign.flip() },
            PrimitiveOp::AncillaHadamard => PrimitiveOp::AncillaHadamard,
            PrimitiveOp::AncillaPhase { theta, sign } => {
                PrimitiveOp::AncillaPhase { theta, sign: sign.flip() }
            }
            PrimitiveOp::ControlledWalk { t, sign } => {
                PrimitiveOp::ControlledWalk { t, sign: sign.flip() }
            }
        }
    }

    pub fn is_ancilla_op(&self) -> bool {
        matches!(
            self,
            PrimitiveOp::AncillaHadamard
                | PrimitiveOp::AncillaPhase { .. }
                | PrimitiveOp::ControlledWalk { .. }
        )
    }

    /// Contribution to the total evolution time.
    pub fn cost(&self) -> f64 {
        match *self {
            PrimitiveOp::Walk { t, .. } | PrimitiveOp::ControlledWalk { t, .. } => t,
            PrimitiveOp::Oracle { theta, .. } | PrimitiveOp::AncillaPhase { theta, .. } => theta,
            PrimitiveOp::AncillaHadamard => 0.0,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |what: &str, x: f64| {
            Err(Error::ParameterOutOfRange(format!("{what} = {x} in schedule op")))
        };
        match *self {
            PrimitiveOp::Walk { t, .. } | PrimitiveOp::ControlledWalk { t, .. }
                if !(t >= 0.0 && t.is_finite()) =>
            {
                bad("t", t)
            }
            PrimitiveOp::Oracle { theta, .. } | PrimitiveOp::AncillaPhase { theta, .. }
                if !(0.0..2.0 * PI).contains(&theta) =>
            {
                bad("theta", theta)
            }
            _ => Ok(()),
        }
    }
}

pub fn adjoint_ops(ops: &[PrimitiveOp]) -> Vec<PrimitiveOp> {
    ops.iter().rev().map(|op| op.adjoint()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Vertex state to reference state.
    Forward,
    /// Reference state to vertex state.
    Reversed,
}

/// Which matrix drives the walk phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hamiltonian {
    Laplacian,
    Adjacency,
}

/// The non-vertex end of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// Uniform superposition over all vertices.
    Uniform,
    /// Uniform over the first part of a complete bipartite graph.
    Part1,
    /// Uniform over the second part.
    Part2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub direction: Direction,
    pub hamiltonian: Hamiltonian,
    pub reference: Reference,
    pub ops: Vec<PrimitiveOp>,
    /// `γ` with `run(|start⟩) = e^{iγ}|end⟩`.
    pub global_phase: f64,
    pub total_time: f64,
    pub oracle_count: usize,
    /// `0 = b_0 ≤ b_1 ≤ … ≤ b_K = ops.len()`; stage `j` is `ops[b_j..b_{j+1}]`.
    /// Skipped levels appear as empty ranges.
    pub stage_boundaries: Vec<usize>,
}

impl Schedule {
    fn from_stages(
        hamiltonian: Hamiltonian,
        reference: Reference,
        stages: Vec<Vec<PrimitiveOp>>,
        global_phase: f64,
    ) -> Schedule {
        let mut boundaries = vec![0];
        let mut ops = Vec::new();
        for stage in stages {
            ops.extend(stage);
            boundaries.push(ops.len());
        }
        Schedule {
            direction: Direction::Forward,
            hamiltonian,
            reference,
            total_time: ops.iter().map(PrimitiveOp::cost).sum(),
            oracle_count: ops.iter().filter(|op| matches!(op, PrimitiveOp::Oracle { .. })).count(),
            ops,
            global_phase: wrap_phase(global_phase),
            stage_boundaries: boundaries,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn stage_count(&self) -> usize {
        self.stage_boundaries.len() - 1
    }

    pub fn stage_ops(&self, j: usize) -> &[PrimitiveOp] {
        &self.ops[self.stage_boundaries[j]..self.stage_boundaries[j + 1]]
    }

    /// Parses schedule JSON and checks its internal consistency.
    pub fn from_json(text: &str) -> Result<Schedule> {
        let s: Schedule = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for op in &self.ops {
            op.check()?;
        }
        let b = &self.stage_boundaries;
        if b.first() != Some(&0)
            || b.last() != Some(&self.ops.len())
            || b.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::ParameterOutOfRange("malformed stage boundaries".into()));
        }
        let oracles = self.ops.iter().filter(|op| matches!(op, PrimitiveOp::Oracle { .. })).count();
        if oracles != self.oracle_count {
            return Err(Error::ParameterOutOfRange(format!(
                "oracle_count {} does not match {oracles} oracle ops",
                self.oracle_count
            )));
        }
        Ok(())
    }
}

/// Adjoint schedule: ops reversed and inverted, direction flipped.
pub fn dagger(s: &Schedule) -> Schedule {
    let len = s.ops.len();
    Schedule {
        direction: match s.direction {
            Direction::Forward => Direction::Reversed,
            Direction::Reversed => Direction::Forward,
        },
        hamiltonian: s.hamiltonian,
        reference: s.reference,
        ops: adjoint_ops(&s.ops),
        global_phase: wrap_phase(-s.global_phase),
        total_time: s.total_time,
        oracle_count: s.oracle_count,
        stage_boundaries: s.stage_boundaries.iter().rev().map(|b| len - b).collect(),
    }
}

/// Parameters of one phase-matching stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageParams {
    /// Overlap `⟨ψ1|ψ2⟩ ∈ (0, 1)`.
    pub s: f64,
    /// Number of rounds.
    pub p: usize,
    /// Common phase of both rotations.
    pub alpha: f64,
}

/// Smallest round count `p ≥ (π − 2·asin s) / (4·asin s)` and its matching phase.
pub fn stage_params(s: f64) -> Result<StageParams> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::OverlapOutOfRange(s));
    }
    let angle = s.asin();
    let bound = (PI - 2.0 * angle) / (4.0 * angle);
    let p = ((bound - 1e-9).ceil() as usize).max(1);
    Ok(StageParams { s, p, alpha: phase_matching_angle(s, p) })
}

/// Phase for which `rounds` applications of `U2(α)U1(α)` carry `ψ1` exactly
/// onto `ψ2`: `2·asin(sin(π/(4·rounds + 2)) / s)`. Requires
/// `sin(π/(4·rounds + 2)) ≤ s`; the ratio is clamped at 1 against rounding.
///
/// In the `J = rounds − 1` indexing common in the literature this reads
/// `2·asin(sin(π/(4J + 6)) / s)`.
pub fn phase_matching_angle(s: f64, rounds: usize) -> f64 {
    let ratio = ((PI / (4 * rounds + 2) as f64).sin() / s).min(1.0);
    2.0 * ratio.asin()
}

/// Walk time turning `exp(−iLt)` into a `±1` reflection on `span(Λ_k)`.
pub fn reflection_time(gcd: u64) -> f64 {
    PI / gcd as f64
}

/// Ancilla gadget: `H · cU · H · Z_θ · H · cU · H` with `U = exp(−iHt)`.
/// For `U = ±1` it applies `e^{iθ}` on the `−1` eigenspace and leaves the
/// ancilla in `|0⟩`.
pub fn synth_target_phase_stage(t: f64, theta: f64) -> [PrimitiveOp; 7] {
    let h = PrimitiveOp::AncillaHadamard;
    let cu = PrimitiveOp::ControlledWalk { t, sign: Sign::Plus };
    let z = PrimitiveOp::AncillaPhase { theta, sign: Sign::Plus };
    [h, cu, h, z, h, cu, h]
}

/// Runs the stage in its two-dimensional invariant subspace, in the basis
/// `(ψ2, ψ2⊥)` with `ψ1 = (s, √(1−s²))` and `U1 = diag(u1)`. Returns the
/// final amplitude on `ψ2`.
pub(crate) fn reduced_stage(params: &StageParams, u1: [Complex64; 2]) -> Complex64 {
    let s = params.s;
    let c = (1.0 - s * s).max(0.0).sqrt();
    let kick = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -params.alpha);
    let mut v = [Complex64::new(s, 0.0), Complex64::new(c, 0.0)];
    for _ in 0..params.p {
        v = [v[0] * u1[0], v[1] * u1[1]];
        let proj = v[0] * s + v[1] * c;
        v = [v[0] - kick * proj * s, v[1] - kick * proj * c];
    }
    v[0]
}

fn stage_phase(params: &StageParams, u1: [Complex64; 2]) -> Result<f64> {
    let amp = reduced_stage(params, u1);
    if amp.norm_sqr() < STAGE_FIDELITY_FLOOR {
        return Err(Error::Internal(format!(
            "stage with overlap {} reaches fidelity {}",
            params.s,
            amp.norm_sqr()
        )));
    }
    Ok(amp.arg())
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Forward schedule `|m⟩ → |s⟩` over the Laplacian. `overlaps[k]` is
/// `⟨w_k|w_{k+1}⟩`; a value of exactly 1 skips the level.
pub fn synth_sampling_schedule(chain: &DepthChain, overlaps: &[f64]) -> Result<Schedule> {
    if overlaps.len() != chain.depth() {
        return Err(Error::DimensionMismatch { expected: chain.depth(), found: overlaps.len() });
    }
    let mut stages: Vec<Vec<PrimitiveOp>> = Vec::with_capacity(overlaps.len());
    let mut gamma = 0.0;
    for (k, &s) in overlaps.iter().enumerate() {
        if s >= 1.0 {
            stages.push(Vec::new());
            continue;
        }
        if !(s >= OVERLAP_FLOOR) {
            return Err(Error::OverlapFloor(s));
        }
        let params = stage_params(s)?;
        let t = reflection_time(chain.levels()[k].gcd);
        let prefix: Vec<PrimitiveOp> = stages.concat();
        let prefix_adj = adjoint_ops(&prefix);

        let mut stage = Vec::with_capacity(params.p * (8 + 2 * prefix.len()));
        for _ in 0..params.p {
            stage.extend(synth_target_phase_stage(t, params.alpha));
            stage.extend_from_slice(&prefix_adj);
            stage.push(PrimitiveOp::Oracle { theta: params.alpha, sign: Sign::Plus });
            stage.extend_from_slice(&prefix);
        }
        gamma += stage_phase(
            &params,
            [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, params.alpha)],
        )?;
        stages.push(stage);
    }
    Ok(Schedule::from_stages(Hamiltonian::Laplacian, Reference::Uniform, stages, gamma))
}

/// m-independent search schedule `|s⟩ → |m⟩` for vertex-transitive graphs.
pub fn synth_search_schedule(chain: &DepthChain) -> Result<Schedule> {
    Ok(dagger(&synth_sampling_schedule(chain, &transitive_overlaps(chain))?))
}

/// Forward branch `|m⟩ → |s_{V_b}⟩` of `K(n1, n2)` over the adjacency matrix,
/// valid when `m` lies in part `b`.
pub fn synth_bipartite_branch(n1: usize, n2: usize, part: Reference) -> Result<Schedule> {
    if n1 < 1 || n2 < 1 {
        return Err(Error::ParameterOutOfRange(format!("K({n1},{n2})")));
    }
    let size = match part {
        Reference::Part1 => n1,
        Reference::Part2 => n2,
        Reference::Uniform => {
            return Err(Error::ParameterOutOfRange("bipartite branch needs a part".into()))
        }
    };
    if size == 1 {
        return Ok(Schedule::from_stages(Hamiltonian::Adjacency, part, vec![Vec::new()], 0.0));
    }
    let params = stage_params(1.0 / (size as f64).sqrt())?;
    let t = bipartite_reflection_time(n1, n2);
    // |s_V⟩ sits in the −1 eigenspace of exp(−iAt): phase it by e^{−iα} directly.
    let theta = (2.0 * PI - params.alpha).rem_euclid(2.0 * PI);
    let mut stage = Vec::with_capacity(params.p * 8);
    for _ in 0..params.p {
        stage.extend(synth_target_phase_stage(t, theta));
        stage.push(PrimitiveOp::Oracle { theta: params.alpha, sign: Sign::Plus });
    }
    let gamma = stage_phase(
        &params,
        [Complex64::from_polar(1.0, theta), Complex64::new(1.0, 0.0)],
    )?;
    Ok(Schedule::from_stages(Hamiltonian::Adjacency, part, vec![stage], gamma))
}

/// `π / √(n1·n2)`.
pub fn bipartite_reflection_time(n1: usize, n2: usize) -> f64 {
    PI / ((n1 * n2) as f64).sqrt()
}

/// Reversed search branches for `K(n1, n2)`: part 1 first, then part 2.
pub fn synth_bipartite_search(n1: usize, n2: usize) -> Result<(Schedule, Schedule)> {
    Ok((
        dagger(&synth_bipartite_branch(n1, n2, Reference::Part1)?),
        dagger(&synth_bipartite_branch(n1, n2, Reference::Part2)?),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    /// Independent 2×2 check: explicit matrices for U1(α), U2(α).
    fn two_level_fidelity(s: f64, rounds: usize, alpha: f64) -> f64 {
        let c = (1.0 - s * s).sqrt();
        let psi1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let psi2 = [Complex64::new(s, 0.0), Complex64::new(c, 0.0)];
        let e = Complex64::from_polar(1.0, -alpha);
        let one = Complex64::new(1.0, 0.0);
        let proj = |v: [Complex64; 2]| [[v[0] * v[0].conj(), v[0] * v[1].conj()], [v[1] * v[0].conj(), v[1] * v[1].conj()]];
        let op = |p: [[Complex64; 2]; 2]| {
            let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = if i == j { one } else { Complex64::new(0.0, 0.0) } - (one - e) * p[i][j];
                }
            }
            m
        };
        let u1 = op(proj(psi2));
        let u2 = op(proj(psi1));
        let apply = |m: [[Complex64; 2]; 2], v: [Complex64; 2]| {
            [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
        };
        let mut v = psi1;
        for _ in 0..rounds {
            v = apply(u2, apply(u1, v));
        }
        (psi2[0].conj() * v[0] + psi2[1].conj() * v[1]).norm_sqr()
    }

    #[test]
    fn stage_params_examples() {
        let p = stage_params(FRAC_1_SQRT_2).unwrap();
        assert_eq!(p.p, 1);
        assert!((p.alpha - PI / 2.0).abs() < 1e-12);
        assert!((two_level_fidelity(p.s, p.p, p.alpha) - 1.0).abs() < 1e-12);

        let p = stage_params(0.5).unwrap();
        assert_eq!(p.p, 1);
        assert!((p.alpha - PI).abs() < 1e-6);
        assert!((two_level_fidelity(p.s, p.p, p.alpha) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_round_angles() {
        // 2·asin(sin(π/10)/s): the two-round phases for s = 1/√2 and 1/2
        let a = phase_matching_angle(FRAC_1_SQRT_2, 2);
        assert!((a - 2.0 * (2f64.sqrt() * (PI / 10.0).sin()).asin()).abs() < 1e-15);
        assert!((a - 0.904_556_894_3).abs() < 1e-9);
        assert!((two_level_fidelity(FRAC_1_SQRT_2, 2, a) - 1.0).abs() < 1e-12);

        let b = phase_matching_angle(0.5, 2);
        assert!((b - 1.332_478_865).abs() < 1e-8);
        assert!((two_level_fidelity(0.5, 2, b) - 1.0).abs() < 1e-12);
        // The same angle with a single round falls short.
        assert!((two_level_fidelity(FRAC_1_SQRT_2, 1, a) - 0.809_016_994_375).abs() < 1e-9);
    }

    #[test]
    fn stage_params_rejects_out_of_range() {
        for s in [0.0, 1.0, -0.3, 1.2, f64::NAN] {
            assert!(matches!(stage_params(s), Err(Error::OverlapOutOfRange(_))));
        }
    }

    #[test]
    fn reflection_times() {
        assert_eq!(reflection_time(1), PI);
        assert_eq!(reflection_time(2), PI / 2.0);
        assert_eq!(reflection_time(4), PI / 4.0);
    }

    #[test]
    fn gadget_layout() {
        let ops = synth_target_phase_stage(0.5, 1.25);
        assert_eq!(ops[0], PrimitiveOp::AncillaHadamard);
        assert_eq!(ops[1], PrimitiveOp::ControlledWalk { t: 0.5, sign: Sign::Plus });
        assert_eq!(ops[3], PrimitiveOp::AncillaPhase { theta: 1.25, sign: Sign::Plus });
        assert_eq!(ops[5], ops[1]);
        assert!(ops.iter().all(PrimitiveOp::is_ancilla_op));
    }

    #[test]
    fn four_cycle_schedule() {
        let chain = DepthChain::from_eigenvalues(&[0, 2, 2, 4]).unwrap();
        let s = synth_sampling_schedule(&chain, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_eq!(s.stage_count(), 2);
        let walk_times: Vec<f64> = s
            .ops
            .iter()
            .filter_map(|op| match op {
                PrimitiveOp::ControlledWalk { t, sign: Sign::Plus } => Some(*t),
                _ => None,
            })
            .collect();
        assert_eq!(walk_times[0], PI / 2.0);
        assert!(walk_times.contains(&(PI / 4.0)));
        // stage 0: one oracle; stage 1: one round wrapping A_1 and A_1†
        assert_eq!(s.oracle_count, 4);
        assert!(s.oracle_count <= 8);
        assert_eq!(s.stage_ops(0).len(), 8);
        assert_eq!(s.stage_ops(1).len(), 8 + 2 * 8);
    }

    #[test]
    fn empty_and_skipped() {
        let chain = DepthChain::from_eigenvalues(&[0]).unwrap();
        let s = synth_sampling_schedule(&chain, &[]).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.stage_boundaries, [0]);
        assert_eq!(dagger(&s).ops, s.ops);

        let chain = DepthChain::from_eigenvalues(&[0, 1, 1, 4]).unwrap();
        let s = synth_sampling_schedule(&chain, &[1.0, 0.5]).unwrap();
        assert_eq!(s.stage_boundaries[0..2], [0, 0]);
        assert!(matches!(
            synth_sampling_schedule(&chain, &[1e-13, 0.5]),
            Err(Error::OverlapFloor(_))
        ));
        assert!(matches!(
            synth_sampling_schedule(&chain, &[0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dagger_properties() {
        let chain = DepthChain::from_eigenvalues(&[0, 1, 3, 6, 64, 64]).unwrap();
        let s = synth_sampling_schedule(&chain, &[0.6, 0.7, 0.3]).unwrap();
        let d = dagger(&s);
        assert_eq!(d.direction, Direction::Reversed);
        assert_eq!(d.total_time, s.total_time);
        assert_eq!(d.oracle_count, s.oracle_count);
        assert_eq!(dagger(&d), s);
        for j in 0..s.stage_count() {
            let k = s.stage_count() - 1 - j;
            assert_eq!(d.stage_ops(j), adjoint_ops(s.stage_ops(k)).as_slice());
        }
    }

    #[test]
    fn bipartite_branches() {
        let (b1, b2) = synth_bipartite_search(2, 3).unwrap();
        let t = PI / 6f64.sqrt();
        assert!(b1.ops.iter().any(|op| matches!(op, PrimitiveOp::ControlledWalk { t: x, .. } if *x == t)));
        assert_eq!(b1.oracle_count, 1);
        assert_eq!(b1.reference, Reference::Part1);
        assert_eq!(b2.reference, Reference::Part2);
        assert_eq!(b1.hamiltonian, Hamiltonian::Adjacency);

        let (star, _) = synth_bipartite_search(1, 4).unwrap();
        assert!(star.is_empty());
    }

    #[test]
    fn json_schema() {
        let chain = DepthChain::from_eigenvalues(&[0, 2, 2, 4]).unwrap();
        let s = synth_sampling_schedule(&chain, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["direction"], "forward");
        assert_eq!(v["ops"][0], serde_json::json!({"op": "anc_h"}));
        assert_eq!(v["ops"][1], serde_json::json!({"op": "cwalk", "t": PI / 2.0}));
        let alpha = stage_params(FRAC_1_SQRT_2).unwrap().alpha;
        assert_eq!(v["ops"][7], serde_json::json!({"op": "oracle", "theta": alpha, "sign": 1}));
        let d = serde_json::to_value(dagger(&s)).unwrap();
        let first_cwalk = d["ops"].as_array().unwrap().iter().find(|op| op["op"] == "cwalk").unwrap();
        assert_eq!(first_cwalk["sign"], -1);
        assert_eq!(d["ops"][0]["sign"], -1);

        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(Schedule::from_json(&text).unwrap(), s);
        let broken = text.replace("\"oracle_count\":4", "\"oracle_count\":5");
        assert!(Schedule::from_json(&broken).is_err());
    }
}
