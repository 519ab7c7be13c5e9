//! The quantum layer.
//!
//! Honest parties only ever prepare and measure single qubits in the
//! computational or Hadamard basis, so their qubits are tracked symbolically
//! as [`PreparedQubit`]s. A small dense [`StateVector`] engine (at most
//! [`MAX_QUBITS`] qubits) backs the exact oracles: EPR purification, the
//! entanglement-based game and measurement overlaps.

use num_complex::Complex64;
use rand::Rng;

use crate::bitvec::BitString;
use crate::error::{Error, Result};

/// Largest state vector the oracle will build.
pub const MAX_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-12;

/// Single-qubit measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Computational,
    Hadamard,
}

impl Basis {
    /// `false` is computational, `true` is Hadamard.
    pub fn from_bit(bit: bool) -> Basis {
        if bit {
            Basis::Hadamard
        } else {
            Basis::Computational
        }
    }

    pub fn bit(self) -> bool {
        self == Basis::Hadamard
    }
}

/// A Wiesner qubit `H^basis |value>`, or a maximally mixed qubit when
/// `disturbed` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreparedQubit {
    value: bool,
    basis: Basis,
    disturbed: bool,
}

impl PreparedQubit {
    pub fn prepare(value: bool, basis: Basis) -> PreparedQubit {
        PreparedQubit {
            value,
            basis,
            disturbed: false,
        }
    }

    /// The maximally mixed qubit: every measurement returns a fair coin.
    pub fn mixed() -> PreparedQubit {
        PreparedQubit {
            value: false,
            basis: Basis::Computational,
            disturbed: true,
        }
    }

    pub fn value(&self) -> bool {
        self.value
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn is_disturbed(&self) -> bool {
        self.disturbed
    }

    /// Born-rule probability of `outcome` when measuring in `basis`.
    pub fn outcome_probability(&self, basis: Basis, outcome: bool) -> f64 {
        if self.disturbed || basis != self.basis {
            0.5
        } else if outcome == self.value {
            1.0
        } else {
            0.0
        }
    }

    /// Projective measurement. The qubit collapses onto the observed basis
    /// state, so measuring again in the same basis repeats the outcome.
    pub fn measure<R: Rng + ?Sized>(&mut self, basis: Basis, rng: &mut R) -> bool {
        let outcome = if !self.disturbed && basis == self.basis {
            self.value
        } else {
            rng.random::<bool>()
        };
        *self = PreparedQubit::prepare(outcome, basis);
        outcome
    }

    /// Bit flip within the preparation basis (X for computational, Z for
    /// Hadamard qubits). A mixed qubit is unaffected.
    pub fn flip_value(&mut self) {
        self.value = !self.value;
    }
}

/// Prepares `|r^θ>` qubit by qubit.
pub fn prepare_wiesner(r: &BitString, theta: &BitString) -> Result<Vec<PreparedQubit>> {
    if r.len() != theta.len() {
        return Err(Error::LengthMismatch {
            expected: r.len(),
            actual: theta.len(),
        });
    }
    Ok(r
        .bits()
        .zip(theta.bits())
        .map(|(v, b)| PreparedQubit::prepare(v, Basis::from_bit(b)))
        .collect())
}

/// Independent bit-flip channel acting in each qubit's preparation basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    flip_probability: f64,
}

impl NoiseModel {
    pub fn new(flip_probability: f64) -> Result<NoiseModel> {
        if !(0.0..=1.0).contains(&flip_probability) {
            return Err(Error::Domain(format!(
                "flip probability {flip_probability} not in [0, 1]"
            )));
        }
        Ok(NoiseModel { flip_probability })
    }

    pub fn noiseless() -> NoiseModel {
        NoiseModel {
            flip_probability: 0.0,
        }
    }

    pub fn flip_probability(&self) -> f64 {
        self.flip_probability
    }
}

/// Applies the channel in place and returns the mask of flipped positions.
pub fn apply_noise<R: Rng + ?Sized>(
    qubits: &mut [PreparedQubit],
    model: &NoiseModel,
    rng: &mut R,
) -> BitString {
    let mut flipped = BitString::zeros(qubits.len());
    if model.flip_probability == 0.0 {
        return flipped;
    }
    for (i, q) in qubits.iter_mut().enumerate() {
        if model.flip_probability >= 1.0 || rng.random_bool(model.flip_probability) {
            q.flip_value();
            flipped.set(i, true);
        }
    }
    flipped
}

/// A register of qubits handed to another party. Only measurements and
/// channel actions are exposed; the preparation data stays hidden.
#[derive(Debug, PartialEq)]
pub struct QuantumRegister {
    qubits: Vec<PreparedQubit>,
}

impl QuantumRegister {
    pub fn new(qubits: Vec<PreparedQubit>) -> QuantumRegister {
        QuantumRegister { qubits }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    /// Measures qubit `index`. Panics if the index is out of range.
    pub fn measure<R: Rng + ?Sized>(&mut self, index: usize, basis: Basis, rng: &mut R) -> bool {
        self.qubits[index].measure(basis, rng)
    }

    /// Measures every qubit, qubit `i` in basis `bases[i]`.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, bases: &BitString, rng: &mut R) -> Result<BitString> {
        if bases.len() != self.qubits.len() {
            return Err(Error::LengthMismatch {
                expected: self.qubits.len(),
                actual: bases.len(),
            });
        }
        let mut out = BitString::zeros(self.qubits.len());
        for (i, q) in self.qubits.iter_mut().enumerate() {
            if q.measure(Basis::from_bit(bases.get(i)), rng) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    pub fn apply_noise<R: Rng + ?Sized>(&mut self, model: &NoiseModel, rng: &mut R) -> BitString {
        apply_noise(&mut self.qubits, model, rng)
    }

    /// Replaces qubit `index` with a maximally mixed qubit.
    pub fn depolarize(&mut self, index: usize) {
        self.qubits[index] = PreparedQubit::mixed();
    }

    pub(crate) fn qubits(&self) -> &[PreparedQubit] {
        &self.qubits
    }
}

/// Dense pure state of up to [`MAX_QUBITS`] qubits. Qubit `i` is bit `i` of
/// the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_cap(qubits: usize) -> Result<()> {
    if qubits > MAX_QUBITS {
        return Err(Error::SizeCap {
            requested: qubits,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl StateVector {
    /// `|0...0>` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Result<StateVector> {
        StateVector::basis_state(qubits, 0)
    }

    pub fn basis_state(qubits: usize, index: usize) -> Result<StateVector> {
        check_cap(qubits)?;
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { qubits, amplitudes })
    }

    /// Accepts amplitudes whose squared norm is within `1e-9` of one and
    /// renormalizes them exactly.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<StateVector> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Format(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let qubits = dim.trailing_zeros() as usize;
        check_cap(qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("state has squared norm {norm}")));
        }
        let scale = 1.0 / norm.sqrt();
        Ok(StateVector {
            qubits,
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other`, with `other`'s qubits placed above `self`'s.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_cap(self.qubits + other.qubits)?;
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for b in &other.amplitudes {
            for a in &self.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(StateVector {
            qubits: self.qubits + other.qubits,
            amplitudes,
        })
    }

    /// Applies a 2x2 unitary (row-major) to qubit `target`.
    pub fn apply_single(&mut self, target: usize, gate: &Mat2) {
        assert!(target < self.qubits, "qubit {target} out of range");
        let bit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = gate[0][0] * a0 + gate[0][1] * a1;
                self.amplitudes[i | bit] = gate[1][0] * a0 + gate[1][1] * a1;
            }
        }
    }

    pub fn apply_h(&mut self, target: usize) {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.apply_single(target, &[[h, h], [h, -h]]);
    }

    pub fn apply_x(&mut self, target: usize) {
        assert!(target < self.qubits, "qubit {target} out of range");
        let bit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                self.amplitudes.swap(i, i | bit);
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        assert!(control < self.qubits && target < self.qubits && control != target);
        let c = 1usize << control;
        let t = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & c != 0 && i & t == 0 {
                self.amplitudes.swap(i, i | t);
            }
        }
    }

    /// Rotates qubit `target` so that a computational measurement afterwards
    /// realizes a measurement in `basis`.
    fn rotate_into(&mut self, target: usize, basis: Basis) {
        if basis == Basis::Hadamard {
            self.apply_h(target);
        }
    }

    /// Probability of observing `outcome` on qubit `target` in `basis`.
    pub fn probability(&self, target: usize, basis: Basis, outcome: bool) -> f64 {
        let mut rotated = self.clone();
        rotated.rotate_into(target, basis);
        let bit = 1usize << target;
        rotated
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & bit != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `target` onto `outcome` in `basis`. Returns the outcome
    /// probability and, when it is nonzero, the renormalized post-measurement
    /// state.
    pub fn project(&self, target: usize, basis: Basis, outcome: bool) -> (f64, Option<StateVector>) {
        assert!(target < self.qubits, "qubit {target} out of range");
        let mut post = self.clone();
        post.rotate_into(target, basis);
        let bit = 1usize << target;
        let mut prob = 0.0;
        for (i, a) in post.amplitudes.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                prob += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if prob <= NORM_TOL {
            return (prob, None);
        }
        let scale = 1.0 / prob.sqrt();
        for a in post.amplitudes.iter_mut() {
            *a *= scale;
        }
        // back to the original frame; H is its own inverse
        post.rotate_into(target, basis);
        (prob, Some(post))
    }

    /// Samples a measurement of qubit `target` from the Born rule.
    pub fn measure<R: Rng + ?Sized>(&self, target: usize, basis: Basis, rng: &mut R) -> (bool, StateVector) {
        let p1 = self.probability(target, basis, true).clamp(0.0, 1.0);
        let outcome = rng.random::<f64>() < p1;
        match self.project(target, basis, outcome) {
            (_, Some(post)) => (outcome, post),
            // sampled a zero-probability branch through rounding
            (_, None) => {
                let (_, post) = self.project(target, basis, !outcome);
                (!outcome, post.expect("one branch has positive probability"))
            }
        }
    }

    /// Joint outcome distribution when each listed qubit is measured in the
    /// given basis and all other qubits are discarded. Entry `j` of the
    /// result is indexed by the outcome of `measured[b]` in bit `b` of `j`.
    pub fn outcome_distribution(&self, measured: &[(usize, Basis)]) -> Vec<f64> {
        let mut rotated = self.clone();
        for &(q, basis) in measured {
            assert!(q < self.qubits, "qubit {q} out of range");
            rotated.rotate_into(q, basis);
        }
        let mut dist = vec![0.0; 1 << measured.len()];
        for (i, a) in rotated.amplitudes.iter().enumerate() {
            let mut key = 0usize;
            for (b, &(q, _)) in measured.iter().enumerate() {
                if i >> q & 1 == 1 {
                    key |= 1 << b;
                }
            }
            dist[key] += a.norm_sqr();
        }
        dist
    }
}

/// `count` EPR pairs `(|00> + |11>)/√2`. Qubits `0..count` hold the first
/// halves and qubits `count..2*count` the second halves; pair `j` is
/// `(j, count + j)`.
pub fn make_epr_pairs(count: usize) -> Result<StateVector> {
    check_cap(2 * count)?;
    let mut state = StateVector::zero(2 * count)?;
    for j in 0..count {
        state.apply_h(j);
        state.apply_cnot(j, count + j);
    }
    Ok(state)
}

/// Row-major complex 2x2 matrix.
pub type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `{|0><0|, |1><1|}`.
pub fn computational_povm() -> [Mat2; 2] {
    [[[c(1.0), c(0.0)], [c(0.0), c(0.0)]], [[c(0.0), c(0.0)], [c(0.0), c(1.0)]]]
}

/// `{|+><+|, |-><-|}`.
pub fn hadamard_povm() -> [Mat2; 2] {
    [[[c(0.5), c(0.5)], [c(0.5), c(0.5)]], [[c(0.5), c(-0.5)], [c(-0.5), c(0.5)]]]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn det(a: &Mat2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

const POVM_TOL: f64 = 1e-9;

fn check_psd(a: &Mat2) -> Result<()> {
    let hermitian = (a[0][1] - a[1][0].conj()).norm() <= POVM_TOL
        && a[0][0].im.abs() <= POVM_TOL
        && a[1][1].im.abs() <= POVM_TOL;
    if !hermitian {
        return Err(Error::Domain("POVM element is not Hermitian".into()));
    }
    // a Hermitian 2x2 matrix is PSD iff its diagonal and determinant are
    // nonnegative
    if a[0][0].re < -POVM_TOL || a[1][1].re < -POVM_TOL || det(a).re < -POVM_TOL {
        return Err(Error::Domain("POVM element is not positive semidefinite".into()));
    }
    Ok(())
}

fn check_povm(elements: &[Mat2]) -> Result<()> {
    let mut sum = [[c(0.0); 2]; 2];
    for e in elements {
        check_psd(e)?;
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += e[i][j];
            }
        }
    }
    let id = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
    for i in 0..2 {
        for j in 0..2 {
            if (sum[i][j] - id[i][j]).norm() > POVM_TOL {
                return Err(Error::Domain("POVM elements do not sum to the identity".into()));
            }
        }
    }
    Ok(())
}

/// Principal square root of a 2x2 positive semidefinite matrix:
/// `(A + √det·I) / √(tr + 2√det)`.
fn psd_sqrt(a: &Mat2) -> Mat2 {
    let s = det(a).re.max(0.0).sqrt();
    let t = (a[0][0].re + a[1][1].re + 2.0 * s).max(0.0).sqrt();
    if t <= 1e-15 {
        return [[c(0.0); 2]; 2];
    }
    [
        [(a[0][0] + s) / t, a[0][1] / t],
        [a[1][0] / t, (a[1][1] + s) / t],
    ]
}

/// Largest singular value squared, i.e. the top eigenvalue of `B†B`.
fn op_norm_sqr(b: &Mat2) -> f64 {
    let g = mat_mul(&adjoint(b), b);
    let tr = g[0][0].re + g[1][1].re;
    let d = det(&g).re;
    (tr + (tr * tr - 4.0 * d).max(0.0).sqrt()) / 2.0
}

/// Overlap `max_{x,y} ‖√M_x √N_y‖²` between two single-qubit POVMs.
pub fn povm_overlap(m: &[Mat2], n: &[Mat2]) -> Result<f64> {
    check_povm(m)?;
    check_povm(n)?;
    let roots_m: Vec<Mat2> = m.iter().map(psd_sqrt).collect();
    let roots_n: Vec<Mat2> = n.iter().map(psd_sqrt).collect();
    let mut best: f64 = 0.0;
    for a in &roots_m {
        for b in &roots_n {
            best = best.max(op_norm_sqr(&mat_mul(a, b)));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> crate::SimRng {
        crate::SimRng::seed_from_u64(seed)
    }

    #[test]
    fn prepare_examples() {
        let q = prepare_wiesner(&"0".parse().unwrap(), &"0".parse().unwrap()).unwrap();
        assert_eq!(q, vec![PreparedQubit::prepare(false, Basis::Computational)]);
        let q = prepare_wiesner(&"10".parse().unwrap(), &"01".parse().unwrap()).unwrap();
        assert_eq!(
            q,
            vec![
                PreparedQubit::prepare(true, Basis::Computational),
                PreparedQubit::prepare(false, Basis::Hadamard)
            ]
        );
        assert!(prepare_wiesner(&BitString::zeros(3), &BitString::zeros(2)).is_err());
    }

    #[test]
    fn honest_path_is_deterministic() {
        let mut g = rng(1);
        for _ in 0..2_000 {
            let len = g.random_range(1..600);
            let r = BitString::random(len, &mut g);
            let theta = BitString::random(len, &mut g);
            let mut reg = QuantumRegister::new(prepare_wiesner(&r, &theta).unwrap());
            assert_eq!(reg.measure_all(&theta, &mut g).unwrap(), r);
        }
    }

    #[test]
    fn conjugate_measurement_is_fair_and_collapses() {
        let mut g = rng(2);
        let trials = 100_000;
        let mut zeros = 0;
        for _ in 0..trials {
            let mut q = PreparedQubit::prepare(false, Basis::Computational);
            let out = q.measure(Basis::Hadamard, &mut g);
            if !out {
                zeros += 1;
            }
            assert_eq!(q.basis(), Basis::Hadamard);
            assert_eq!(q.measure(Basis::Hadamard, &mut g), out);
        }
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((zeros as f64 - trials as f64 / 2.0).abs() < 4.0 * sigma);
        let mut q = PreparedQubit::prepare(true, Basis::Hadamard);
        assert!(q.measure(Basis::Hadamard, &mut g));
    }

    #[test]
    fn mixed_qubit_is_a_coin() {
        let q = PreparedQubit::mixed();
        for b in [Basis::Computational, Basis::Hadamard] {
            assert_eq!(q.outcome_probability(b, true), 0.5);
        }
    }

    #[test]
    fn noise_extremes_and_rate() {
        let mut g = rng(3);
        let r = BitString::random(64, &mut g);
        let theta = BitString::random(64, &mut g);
        let clean = prepare_wiesner(&r, &theta).unwrap();

        let mut q = clean.clone();
        let flipped = apply_noise(&mut q, &NoiseModel::new(0.0).unwrap(), &mut g);
        assert_eq!(q, clean);
        assert!(flipped.is_zero());

        let mut q = clean.clone();
        let flipped = apply_noise(&mut q, &NoiseModel::new(1.0).unwrap(), &mut g);
        assert_eq!(flipped.weight(), 64);
        assert!(q.iter().zip(&clean).all(|(a, b)| a.value() != b.value() && a.basis() == b.basis()));

        let n = 100_000;
        let p = 0.1;
        let mut q = vec![PreparedQubit::prepare(false, Basis::Computational); n];
        let count = apply_noise(&mut q, &NoiseModel::new(p).unwrap(), &mut g).weight() as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((count - n as f64 * p).abs() < 4.0 * sigma, "{count}");

        assert!(NoiseModel::new(1.5).is_err());
        assert!(NoiseModel::new(-0.1).is_err());
    }

    #[test]
    fn born_rule_examples() {
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(zero.probability(0, Basis::Computational, false), 1.0);
        let mut plus = StateVector::zero(1).unwrap();
        plus.apply_h(0);
        let p0 = plus.probability(0, Basis::Computational, false);
        assert!((p0 - 0.5).abs() < 1e-12);
        // |<+|0>|^2
        assert!((zero.probability(0, Basis::Hadamard, false) - 0.5).abs() < 1e-12);
        for b in [Basis::Computational, Basis::Hadamard] {
            let total = plus.probability(0, b, false) + plus.probability(0, b, true);
            assert!((total - 1.0).abs() < 1e-12);
        }
        let mut g = rng(9);
        let (out, post) = zero.measure(0, Basis::Computational, &mut g);
        assert!(!out);
        assert_eq!(post, zero);
    }

    #[test]
    fn epr_pairs_correlate_in_both_bases() {
        let epr = make_epr_pairs(1).unwrap();
        assert!((epr.norm_sqr() - 1.0).abs() < 1e-12);
        for basis in [Basis::Computational, Basis::Hadamard] {
            let d = epr.outcome_distribution(&[(0, basis), (1, basis)]);
            assert!((d[0b00] - 0.5).abs() < 1e-12);
            assert!((d[0b11] - 0.5).abs() < 1e-12);
            assert!(d[0b01].abs() < 1e-12 && d[0b10].abs() < 1e-12);
        }
        assert!(make_epr_pairs(7).is_err());
        assert!(make_epr_pairs(6).is_ok());
    }

    #[test]
    fn random_states_have_complete_born_rule() {
        let mut g = rng(4);
        for q in 1..=6 {
            let amps: Vec<Complex64> = (0..1 << q)
                .map(|_| Complex64::new(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            let state =
                StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm.sqrt()).collect()).unwrap();
            for t in 0..q {
                for b in [Basis::Computational, Basis::Hadamard] {
                    let total = state.probability(t, b, false) + state.probability(t, b, true);
                    assert!((total - 1.0).abs() < 1e-12);
                    let (p, post) = state.project(t, b, true);
                    if let Some(post) = post {
                        assert!((post.norm_sqr() - 1.0).abs() < 1e-12);
                        assert!((post.probability(t, b, true) - 1.0).abs() < 1e-12);
                        assert!(p > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_examples() {
        let comp = computational_povm();
        let had = hadamard_povm();
        assert!((povm_overlap(&comp, &had).unwrap() - 0.5).abs() < 1e-12);
        assert!((povm_overlap(&had, &comp).unwrap() - 0.5).abs() < 1e-12);
        assert!((povm_overlap(&comp, &comp).unwrap() - 1.0).abs() < 1e-12);
        let bad = [[[c(1.5), c(0.0)], [c(0.0), c(-0.5)]], [[c(-0.5), c(0.0)], [c(0.0), c(1.5)]]];
        assert!(povm_overlap(&bad, &comp).is_err());
        let short = [comp[0]];
        assert!(povm_overlap(&short, &comp).is_err());
    }

    #[test]
    fn tensor_and_cap() {
        let a = StateVector::basis_state(2, 0b01).unwrap();
        let b = StateVector::basis_state(1, 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.amplitudes()[0b101], Complex64::new(1.0, 0.0));
        assert!(StateVector::zero(13).is_err());
        assert!(StateVector::from_amplitudes(vec![c(1.0), c(1.0)]).is_err());
    }
}
