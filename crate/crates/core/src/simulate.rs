//! Dense state-vector execution of schedules.
//!
//! With the ancilla attached the state has `2N` amplitudes, ancilla leading:
//! `amps[..N]` is the ancilla-`|0⟩` block and `amps[N..]` the `|1⟩` block.

use std::io::Write;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::sig12;
use crate::schedule::{PrimitiveOp, Schedule, Sign};
use crate::spectral::Spectrum;

/// Largest ancilla `|1⟩` mass tolerated on detach.
pub const DETACH_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    ancilla: bool,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|v⟩` in an `n`-vertex space.
    pub fn basis(n: usize, v: usize) -> Result<StateVector> {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        let mut amps = vec![ZERO; n];
        amps[v] = ONE;
        Ok(StateVector { n, ancilla: false, amps })
    }

    /// Uniform superposition `|s⟩`.
    pub fn uniform(n: usize) -> StateVector {
        let a = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        StateVector { n, ancilla: false, amps: vec![a; n] }
    }

    /// Uniform superposition over `support`.
    pub fn uniform_over(n: usize, support: &[usize]) -> Result<StateVector> {
        if support.is_empty() {
            return Err(Error::ParameterOutOfRange("empty support".into()));
        }
        let a = Complex64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        let mut amps = vec![ZERO; n];
        for &v in support {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            amps[v] = a;
        }
        Ok(StateVector { n, ancilla: false, amps })
    }

    /// Vertex-space state from raw amplitudes; they must be unit-norm within 1e−10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector> {
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::ParameterOutOfRange(format!("state norm {norm}")));
        }
        Ok(StateVector { n: amps.len(), ancilla: false, amps })
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn has_ancilla(&self) -> bool {
        self.ancilla
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Mass on ancilla `|1⟩`; zero without an ancilla.
    pub fn ancilla_excitation(&self) -> f64 {
        if self.ancilla {
            self.amps[self.n..].iter().map(Complex64::norm_sqr).sum()
        } else {
            0.0
        }
    }

    /// `⟨self|other⟩`; dimensions must agree.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Largest `|ψ_i − φ_i|` over all components.
    pub fn max_distance(&self, other: &StateVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    fn blocks_mut(&mut self) -> impl Iterator<Item = &mut [Complex64]> {
        self.amps.chunks_mut(self.n)
    }
}

/// Marked-vertex oracle. Pipelines hand one to the simulator so the marked
/// vertex is reachable only through phase kicks and membership tests.
#[derive(Debug, Clone)]
pub struct Oracle {
    n: usize,
    marked: usize,
}

impl Oracle {
    pub fn new(n: usize, marked: usize) -> Result<Oracle> {
        if marked >= n {
            return Err(Error::VertexOutOfRange { vertex: marked, n });
        }
        Ok(Oracle { n, marked })
    }

    /// Classical membership query.
    pub fn is_marked(&self, v: usize) -> bool {
        v == self.marked
    }

    /// `e^{∓iθ|m⟩⟨m|}`.
    pub fn apply(&self, st: &mut StateVector, theta: f64, sign: Sign) -> Result<()> {
        if st.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: st.n });
        }
        apply_oracle_phase(st, self.marked, theta, sign)
    }
}

/// `e^{∓iθ}` on the amplitude(s) of vertex `m`.
pub fn apply_oracle_phase(st: &mut StateVector, m: usize, theta: f64, sign: Sign) -> Result<()> {
    if m >= st.n {
        return Err(Error::VertexOutOfRange { vertex: m, n: st.n });
    }
    let phase = Complex64::from_polar(1.0, -sign.value() * theta);
    for block in st.blocks_mut() {
        block[m] *= phase;
    }
    Ok(())
}

fn walk_block(block: &mut [Complex64], spectrum: &Spectrum, t: f64, sign: Sign) {
    let n = block.len();
    let columns = spectrum.eigenvectors().as_slice().chunks_exact(n);
    let coeffs: Vec<Complex64> = columns
        .clone()
        .zip(spectrum.eigenvalues())
        .map(|(col, &lambda)| {
            let (mut re, mut im) = (0.0, 0.0);
            for (v, a) in col.iter().zip(block.iter()) {
                re += v * a.re;
                im += v * a.im;
            }
            Complex64::new(re, im) * Complex64::from_polar(1.0, -sign.value() * lambda * t)
        })
        .collect();
    block.fill(ZERO);
    for (col, c) in columns.zip(&coeffs) {
        for (a, v) in block.iter_mut().zip(col) {
            *a += c * v;
        }
    }
}

fn check_spectrum(st: &StateVector, spectrum: &Spectrum) -> Result<()> {
    if spectrum.n() != st.n {
        return Err(Error::DimensionMismatch { expected: spectrum.n(), found: st.n });
    }
    Ok(())
}

/// `e^{∓iHt}` on the vertex factor, applied in the eigenbasis of `H`.
pub fn apply_walk_phase(st: &mut StateVector, spectrum: &Spectrum, t: f64, sign: Sign) -> Result<()> {
    check_spectrum(st, spectrum)?;
    for block in st.blocks_mut() {
        walk_block(block, spectrum, t, sign);
    }
    Ok(())
}

/// `e^{∓iHt}` on the ancilla-`|1⟩` block only.
pub fn apply_controlled_walk_phase(
    st: &mut StateVector,
    spectrum: &Spectrum,
    t: f64,
    sign: Sign,
) -> Result<()> {
    check_spectrum(st, spectrum)?;
    if !st.ancilla {
        return Err(Error::NoAncilla);
    }
    let n = st.n;
    walk_block(&mut st.amps[n..], spectrum, t, sign);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AncillaGate {
    H,
    /// `diag(1, e^{±iθ})`.
    Z { theta: f64, sign: Sign },
}

pub fn apply_ancilla_gate(st: &mut StateVector, gate: AncillaGate) -> Result<()> {
    if !st.ancilla {
        return Err(Error::NoAncilla);
    }
    let (lo, hi) = st.amps.split_at_mut(st.n);
    match gate {
        AncillaGate::H => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = (x + y) * r;
                *b = (x - y) * r;
            }
        }
        AncillaGate::Z { theta, sign } => {
            let phase = Complex64::from_polar(1.0, sign.value() * theta);
            hi.iter_mut().for_each(|b| *b *= phase);
        }
    }
    Ok(())
}

/// `|ψ⟩ → |0⟩ ⊗ |ψ⟩`. No-op if already attached.
pub fn attach_ancilla(st: &mut StateVector) {
    if !st.ancilla {
        st.amps.resize(2 * st.n, ZERO);
        st.ancilla = true;
    }
}

/// Projects onto ancilla `|0⟩` and renormalizes, failing if the discarded
/// mass reaches [`DETACH_TOLERANCE`]. No-op without an ancilla.
pub fn detach_ancilla(st: &mut StateVector) -> Result<()> {
    if !st.ancilla {
        return Ok(());
    }
    let mass = st.ancilla_excitation();
    if mass >= DETACH_TOLERANCE {
        return Err(Error::EntangledAncilla { mass });
    }
    st.amps.truncate(st.n);
    st.ancilla = false;
    let norm = st.norm();
    st.amps.iter_mut().for_each(|a| *a /= norm);
    Ok(())
}

pub fn apply_op(
    st: &mut StateVector,
    op: &PrimitiveOp,
    spectrum: &Spectrum,
    oracle: Option<&Oracle>,
) -> Result<()> {
    if op.is_ancilla_op() {
        attach_ancilla(st);
    }
    match *op {
        PrimitiveOp::Walk { t, sign } => apply_walk_phase(st, spectrum, t, sign),
        PrimitiveOp::ControlledWalk { t, sign } => apply_controlled_walk_phase(st, spectrum, t, sign),
        PrimitiveOp::Oracle { theta, sign } => oracle.ok_or(Error::MissingOracle)?.apply(st, theta, sign),
        PrimitiveOp::AncillaHadamard => apply_ancilla_gate(st, AncillaGate::H),
        PrimitiveOp::AncillaPhase { theta, sign } => apply_ancilla_gate(st, AncillaGate::Z { theta, sign }),
    }
}

/// Runs `sched` on `st`; the ancilla is attached on demand and detached at
/// each stage boundary.
pub fn run_schedule(
    st: &mut StateVector,
    sched: &Schedule,
    spectrum: &Spectrum,
    oracle: Option<&Oracle>,
) -> Result<()> {
    run_schedule_staged(st, sched, spectrum, oracle, |_, _| {})
}

/// [`run_schedule`] with a callback after every stage (skipped stages included).
pub fn run_schedule_staged(
    st: &mut StateVector,
    sched: &Schedule,
    spectrum: &Spectrum,
    oracle: Option<&Oracle>,
    mut after_stage: impl FnMut(usize, &StateVector),
) -> Result<()> {
    if st.ancilla {
        return Err(Error::ParameterOutOfRange("schedule input must not carry an ancilla".into()));
    }
    check_spectrum(st, spectrum)?;
    for j in 0..sched.stage_count() {
        for op in sched.stage_ops(j) {
            apply_op(st, op, spectrum, oracle)?;
        }
        detach_ancilla(st)?;
        after_stage(j, st);
    }
    Ok(())
}

fn vertex_block(st: &StateVector) -> &[Complex64] {
    &st.amps[..st.n]
}

/// `|⟨target|ψ⟩|²`, with the ancilla projected onto `|0⟩`.
pub fn fidelity(st: &StateVector, target: &StateVector) -> Result<f64> {
    if target.ancilla || target.n != st.n {
        return Err(Error::DimensionMismatch { expected: st.n, found: target.dim() });
    }
    let overlap: Complex64 =
        target.amps.iter().zip(vertex_block(st)).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr().min(1.0))
}

/// `|⟨v|ψ⟩|²`, with the ancilla projected onto `|0⟩`.
pub fn fidelity_vertex(st: &StateVector, v: usize) -> Result<f64> {
    if v >= st.n {
        return Err(Error::VertexOutOfRange { vertex: v, n: st.n });
    }
    Ok(st.amps[v].norm_sqr().min(1.0))
}

/// Vertex measurement probabilities, marginalized over the ancilla.
pub fn measure_distribution(st: &StateVector) -> Vec<f64> {
    let mut p: Vec<f64> = vertex_block(st).iter().map(Complex64::norm_sqr).collect();
    if st.ancilla {
        for (q, a) in p.iter_mut().zip(&st.amps[st.n..]) {
            *q += a.norm_sqr();
        }
    }
    p
}

/// Most probable vertex; ties go to the lowest index.
pub fn argmax_vertex(st: &StateVector) -> usize {
    measure_distribution(st)
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
        .0
}

/// One seeded projective measurement in the vertex basis.
pub fn sample_vertex(st: &StateVector, seed: u64) -> usize {
    let dist = WeightedIndex::new(measure_distribution(st)).expect("state has positive norm");
    dist.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// CSV with columns `index,re,im,probability`, one row per amplitude.
pub fn write_state_csv(st: &StateVector, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "re", "im", "probability"])?;
    for (i, a) in st.amps.iter().enumerate() {
        w.write_record([i.to_string(), sig12(a.re), sig12(a.im), sig12(a.norm_sqr())])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, Graph};
    use crate::spectral::eigendecompose;
    use std::f64::consts::PI;

    fn c4() -> Spectrum {
        eigendecompose(&Graph::cycle(4).unwrap().laplacian()).unwrap()
    }

    fn close(a: &StateVector, b: &StateVector, tol: f64) -> bool {
        a.max_distance(b).unwrap() < tol
    }

    #[test]
    fn walk_identities() {
        let spec = c4();
        let v: Vec<Complex64> =
            [0.1, 0.7, -0.5, 0.3].iter().map(|&x| Complex64::new(x, 0.2 * x)).collect();
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        let mut start = StateVector::from_amplitudes(v.into_iter().map(|a| a / norm).collect()).unwrap();
        let orig = start.clone();
        apply_walk_phase(&mut start, &spec, 0.0, Sign::Plus).unwrap();
        assert!(close(&start, &orig, 1e-14));

        let mut s = StateVector::uniform(4);
        apply_walk_phase(&mut s, &spec, 1.234, Sign::Plus).unwrap();
        assert!(close(&s, &StateVector::uniform(4), 1e-12));

        apply_walk_phase(&mut start, &spec, 0.7, Sign::Plus).unwrap();
        apply_walk_phase(&mut start, &spec, 0.7, Sign::Minus).unwrap();
        assert!(close(&start, &orig, 1e-12));
    }

    #[test]
    fn c4_complement_flips() {
        // w̄_1 for m = 0 lives on eigenvalue 2: (|0⟩ − |2⟩)/√2.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![Complex64::new(r, 0.0), ZERO, Complex64::new(-r, 0.0), ZERO];
        let mut st = StateVector::from_amplitudes(amps).unwrap();
        let want = StateVector::from_amplitudes(st.amps.iter().map(|a| -a).collect()).unwrap();
        apply_walk_phase(&mut st, &c4(), PI / 2.0, Sign::Plus).unwrap();
        assert!(close(&st, &want, 1e-12));
    }

    #[test]
    fn oracle_phases() {
        let mut st = StateVector::basis(4, 2).unwrap();
        apply_oracle_phase(&mut st, 2, PI, Sign::Plus).unwrap();
        assert!((st.amps[2] + ONE).norm() < 1e-15);
        let mut u = StateVector::uniform(4);
        apply_oracle_phase(&mut u, 1, 2.0 * PI, Sign::Minus).unwrap();
        assert!(close(&u, &StateVector::uniform(4), 1e-12));
        assert!(matches!(
            apply_oracle_phase(&mut u, 4, 1.0, Sign::Plus),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn ancilla_gates() {
        let mut st = StateVector::uniform(3);
        assert!(matches!(apply_ancilla_gate(&mut st, AncillaGate::H), Err(Error::NoAncilla)));
        attach_ancilla(&mut st);
        assert_eq!(st.dim(), 6);
        let before = st.clone();
        apply_ancilla_gate(&mut st, AncillaGate::H).unwrap();
        assert!(st.ancilla_excitation() > 0.4);
        assert!(matches!(detach_ancilla(&mut st.clone()), Err(Error::EntangledAncilla { .. })));
        apply_ancilla_gate(&mut st, AncillaGate::H).unwrap();
        assert!(close(&st, &before, 1e-15));
        apply_ancilla_gate(&mut st, AncillaGate::Z { theta: 0.0, sign: Sign::Plus }).unwrap();
        assert!(close(&st, &before, 1e-15));
        detach_ancilla(&mut st).unwrap();
        assert!(close(&st, &StateVector::uniform(3), 1e-15));
    }

    #[test]
    fn oracle_requires_binding() {
        let chain = crate::depth::DepthChain::from_eigenvalues(&[0, 2, 2, 4]).unwrap();
        let s = crate::schedule::synth_sampling_schedule(
            &chain,
            &[std::f64::consts::FRAC_1_SQRT_2; 2],
        )
        .unwrap();
        let mut st = StateVector::basis(4, 0).unwrap();
        assert!(matches!(run_schedule(&mut st, &s, &c4(), None), Err(Error::MissingOracle)));
    }

    #[test]
    fn fidelity_and_distribution() {
        let st = StateVector::basis(5, 3).unwrap();
        assert_eq!(fidelity_vertex(&st, 3).unwrap(), 1.0);
        let s = StateVector::uniform(9);
        assert!((fidelity_vertex(&s, 4).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let d = measure_distribution(&s);
        assert!(d.iter().all(|p| (p - 1.0 / 9.0).abs() < 1e-15));
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(fidelity(&st, &StateVector::uniform(4)).is_err());
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let s = StateVector::uniform(9);
        assert_eq!(sample_vertex(&s, 7), sample_vertex(&s, 7));
        assert_eq!(sample_vertex(&StateVector::basis(9, 5).unwrap(), 1), 5);
    }

    #[test]
    fn state_csv() {
        let g = Graph::build_family(Family::Johnson { n: 4, k: 1 }).unwrap();
        let mut buf = Vec::new();
        write_state_csv(&StateVector::uniform(g.n()), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,re,im,probability");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,0.5,0,0.25");
    }
}
