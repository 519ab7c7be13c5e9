//! Security games and small exact checks.
//!
//! * Game 1: prepare-and-measure certified-deletion attack against the real
//!   scheme, with pluggable adversaries and Monte-Carlo estimation of the
//!   acceptance-and-guess probabilities `p₀, p₁`.
//! * Game 2: the entanglement-based variant, evaluated exactly on tiny
//!   instances with the state-vector simulator.
//! * Classical min/max-entropy calculators, the uncertainty relation, the
//!   leftover hash bound and the sampling bound, checked at micro scale.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::bitvec::{index_sets_from_basis, BitString};
use crate::bounds::{optimize_nu, serfling_bound};
use crate::error::{Error, Result};
use crate::hashcode::{LinearCode, ToeplitzHash};
use crate::qsim::{computational_povm, hadamard_povm, povm_overlap, Basis, QuantumRegister, StateVector};
use crate::scheme::{
    sample_theta, Ciphertext, ClassicalPart, DecKey, DeletionCertificate, Scheme, SchemeParams,
};
use crate::SimRng;

/// Confidence level of the reported intervals.
pub const CONFIDENCE: f64 = 0.99;

/// A certified-deletion adversary `(A₀, A₁, A₂)`.
///
/// `phase1` only ever holds the qubits through [`QuantumRegister`], which
/// exposes measurements but not the preparation data. The classical part of
/// the ciphertext arrives in `phase2`, together with the decryption key, and
/// only if the certificate was accepted.
pub trait Adversary {
    type State;

    fn name(&self) -> String;

    /// Chooses the message `msg₀` that is encrypted when `b = 1`.
    fn phase0<R: Rng + ?Sized>(&self, params: &SchemeParams, rng: &mut R) -> (BitString, Self::State);

    fn phase1<R: Rng + ?Sized>(
        &self,
        register: QuantumRegister,
        state: Self::State,
        rng: &mut R,
    ) -> (DeletionCertificate, Self::State);

    fn phase2<R: Rng + ?Sized>(
        &self,
        scheme: &Scheme,
        key: &DecKey,
        classical: ClassicalPart,
        state: Self::State,
        rng: &mut R,
    ) -> Result<bool>;
}

/// Decodes with a guess `r_est` of the qubit values and reports whether the
/// result passes the error check and equals `msg0`.
pub fn decode_guess(
    scheme: &Scheme,
    key: &DecKey,
    classical: &ClassicalPart,
    r_est: &BitString,
    msg0: &BitString,
) -> Result<bool> {
    let r_i = r_est.restrict(key.computational_positions())?;
    let corrected = scheme.code().corr(&r_i, &classical.q.xor(key.e())?)?;
    let flag = key.h_ec().eval(&corrected)?.xor(key.d())? == classical.p;
    let plaintext = classical.c.xor(&key.h_pa().eval(&corrected)?)?.xor(key.u())?;
    Ok(flag && &plaintext == msg0)
}

/// Built-in adversaries.
#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// Measures everything in the Hadamard basis, submits the outcomes and
    /// answers `output` regardless of what it learns.
    Honest { output: bool },
    /// Measures everything in the computational basis and submits a uniformly
    /// random certificate.
    FullComputational,
    /// Measures each qubit in the computational basis with probability
    /// `fraction`, otherwise in the Hadamard basis; submits all outcomes.
    Partial { fraction: f64 },
    /// Measures qubit `i` in `bases[i]`; submits all outcomes.
    Pattern { bases: Vec<Basis> },
    /// Keeps the qubits, submits a uniformly random certificate and decrypts
    /// honestly if it is accepted.
    ForgingNonMeasurer,
}

/// Per-trial memory of the built-in strategies.
#[derive(Debug)]
pub struct StrategyState {
    msg0: BitString,
    register: Option<QuantumRegister>,
    estimate: Option<BitString>,
}

impl Strategy {
    /// Parses `honest`, `honest:out=0`, `full-computational`, `partial:f=0.3`,
    /// `pattern:bases=0110` or `forging`.
    pub fn parse(text: &str) -> Result<Strategy> {
        let (name, arg) = match text.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (text, None),
        };
        let value = |key: &str| -> Result<&str> {
            let arg = arg.ok_or_else(|| Error::InvalidParams(format!("strategy {name} needs {key}=...")))?;
            arg.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| Error::InvalidParams(format!("expected {key}=... in {text:?}")))
        };
        match name {
            "honest" => {
                let output = match arg {
                    None => true,
                    Some(_) => match value("out")? {
                        "1" => true,
                        "0" => false,
                        other => return Err(Error::InvalidParams(format!("out must be 0 or 1, got {other}"))),
                    },
                };
                Ok(Strategy::Honest { output })
            }
            "full-computational" | "computational" => Ok(Strategy::FullComputational),
            "partial" => {
                let fraction: f64 = value("f")?
                    .parse()
                    .map_err(|_| Error::InvalidParams(format!("bad fraction in {text:?}")))?;
                if !(0.0..=1.0).contains(&fraction) {
                    return Err(Error::InvalidParams(format!("fraction {fraction} not in [0, 1]")));
                }
                Ok(Strategy::Partial { fraction })
            }
            "pattern" => {
                let bits: BitString = value("bases")?.parse()?;
                Ok(Strategy::Pattern {
                    bases: bits.bits().map(Basis::from_bit).collect(),
                })
            }
            "forging" => Ok(Strategy::ForgingNonMeasurer),
            _ => Err(Error::InvalidParams(format!("unknown strategy {name:?}"))),
        }
    }
}

impl Adversary for Strategy {
    type State = StrategyState;

    fn name(&self) -> String {
        match self {
            Strategy::Honest { output } => format!("honest:out={}", u8::from(*output)),
            Strategy::FullComputational => "full-computational".into(),
            Strategy::Partial { fraction } => format!("partial:f={fraction}"),
            Strategy::Pattern { bases } => {
                let bits = BitString::from_bits(bases.iter().map(|b| b.bit()));
                format!("pattern:bases={bits}")
            }
            Strategy::ForgingNonMeasurer => "forging".into(),
        }
    }

    fn phase0<R: Rng + ?Sized>(&self, params: &SchemeParams, _rng: &mut R) -> (BitString, StrategyState) {
        let state = StrategyState {
            msg0: BitString::ones(params.n),
            register: None,
            estimate: None,
        };
        (state.msg0.clone(), state)
    }

    fn phase1<R: Rng + ?Sized>(
        &self,
        mut register: QuantumRegister,
        mut state: StrategyState,
        rng: &mut R,
    ) -> (DeletionCertificate, StrategyState) {
        let m = register.len();
        let measure_with = |register: &mut QuantumRegister, rng: &mut R, pick: &mut dyn FnMut(usize, &mut R) -> Basis| {
            let mut out = BitString::zeros(m);
            for i in 0..m {
                let basis = pick(i, rng);
                out.set(i, register.measure(i, basis, rng));
            }
            out
        };
        let y = match self {
            Strategy::Honest { .. } => measure_with(&mut register, rng, &mut |_, _| Basis::Hadamard),
            Strategy::FullComputational => {
                let outcomes = measure_with(&mut register, rng, &mut |_, _| Basis::Computational);
                state.estimate = Some(outcomes);
                BitString::random(m, rng)
            }
            Strategy::Partial { fraction } => {
                let f = *fraction;
                let outcomes = measure_with(&mut register, rng, &mut |_, rng| {
                    Basis::from_bit(!rng.random_bool(f))
                });
                state.estimate = Some(outcomes.clone());
                outcomes
            }
            Strategy::Pattern { bases } => {
                let outcomes = measure_with(&mut register, rng, &mut |i, _| {
                    bases.get(i).copied().unwrap_or(Basis::Hadamard)
                });
                state.estimate = Some(outcomes.clone());
                outcomes
            }
            Strategy::ForgingNonMeasurer => {
                state.register = Some(register);
                return (DeletionCertificate::new(BitString::random(m, rng)), state);
            }
        };
        (DeletionCertificate::new(y), state)
    }

    fn phase2<R: Rng + ?Sized>(
        &self,
        scheme: &Scheme,
        key: &DecKey,
        classical: ClassicalPart,
        state: StrategyState,
        rng: &mut R,
    ) -> Result<bool> {
        match self {
            Strategy::Honest { output } => Ok(*output),
            Strategy::FullComputational | Strategy::Partial { .. } | Strategy::Pattern { .. } => {
                let estimate = state.estimate.expect("set in phase1");
                decode_guess(scheme, key, &classical, &estimate, &state.msg0)
            }
            Strategy::ForgingNonMeasurer => {
                let register = state.register.expect("kept in phase1");
                let out = scheme.decrypt(key, Ciphertext::from_parts(register, classical), rng)?;
                Ok(out.flag && out.plaintext == state.msg0)
            }
        }
    }
}

/// Outcome of one run of Game 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub ok: bool,
    pub guess: bool,
}

/// One run of Game 1 with bit `b`.
pub fn run_game1<A: Adversary, R: Rng + ?Sized>(
    scheme: &Scheme,
    adversary: &A,
    b: bool,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let (msg0, state) = adversary.phase0(scheme.params(), rng);
    let (aux, key) = scheme.keygen(rng);
    let msg = if b { msg0 } else { BitString::zeros(scheme.params().n) };
    let (register, classical) = scheme.encrypt(&msg, &aux, &key)?.into_parts();
    let (cert, state) = adversary.phase1(register, state, rng);
    let ok = cert.y().len() == scheme.params().m && scheme.verify(&aux, &key, &cert)?;
    let guess = ok && adversary.phase2(scheme, &key, classical, state, rng)?;
    Ok(TrialOutcome { ok, guess })
}

/// Independent generator for trial `trial` of arm `b`.
pub fn trial_rng(seed: u64, trial: u64, b: bool) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(trial << 1 | u64::from(b));
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ArmCounts {
    pub trials: u64,
    /// Runs whose certificate was accepted.
    pub accepted: u64,
    /// Runs with an accepted certificate and guess 1.
    pub successes: u64,
}

/// Runs `trials` independent games with bit `b`.
pub fn run_arm<A: Adversary>(scheme: &Scheme, adversary: &A, b: bool, trials: u64, seed: u64) -> Result<ArmCounts> {
    let mut counts = ArmCounts {
        trials,
        ..ArmCounts::default()
    };
    for t in 0..trials {
        let out = run_game1(scheme, adversary, b, &mut trial_rng(seed, t, b))?;
        counts.accepted += u64::from(out.ok);
        counts.successes += u64::from(out.ok && out.guess);
    }
    Ok(counts)
}

/// Two-sided Hoeffding half-width for a mean of `trials` bounded samples.
pub fn hoeffding_half_width(trials: u64, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * trials as f64)).sqrt()
}

/// Estimated `p₀, p₁` with their intervals and the analytic bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameReport {
    pub strategy: String,
    pub params: SchemeParams,
    pub trials: u64,
    pub arms: [ArmCounts; 2],
    pub p0: f64,
    pub p1: f64,
    pub interval0: [f64; 2],
    pub interval1: [f64; 2],
    pub half_width: f64,
    pub gap: f64,
    /// Width allowed for `|p̂₀ − p̂₁|` from sampling alone: twice the
    /// per-arm half-width.
    pub gap_width: f64,
    pub eta: f64,
    pub nu_star: f64,
    pub violation: bool,
}

impl GameReport {
    pub fn from_counts(strategy: String, params: SchemeParams, arms: [ArmCounts; 2]) -> Result<GameReport> {
        let trials = arms[0].trials.min(arms[1].trials);
        if trials == 0 {
            return Err(Error::InvalidParams("at least one trial per arm is required".into()));
        }
        let half_width = hoeffding_half_width(trials, CONFIDENCE);
        let p = |a: &ArmCounts| a.successes as f64 / a.trials as f64;
        let interval = |p: f64| [(p - half_width).max(0.0), (p + half_width).min(1.0)];
        let (p0, p1) = (p(&arms[0]), p(&arms[1]));
        let best = optimize_nu(params.s, params.k, params.m, params.n, params.delta)?;
        let gap = (p0 - p1).abs();
        let gap_width = 2.0 * half_width;
        Ok(GameReport {
            strategy,
            params,
            trials,
            arms,
            p0,
            p1,
            interval0: interval(p0),
            interval1: interval(p1),
            half_width,
            gap,
            gap_width,
            eta: best.report.eta,
            nu_star: best.nu_star,
            violation: gap - gap_width > best.report.eta,
        })
    }
}

/// Runs both arms with `trials` games each.
pub fn estimate_gap<A: Adversary>(scheme: &Scheme, adversary: &A, trials: u64, seed: u64) -> Result<GameReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be positive".into()));
    }
    let arms = [
        run_arm(scheme, adversary, false, trials, seed)?,
        run_arm(scheme, adversary, true, trials, seed)?,
    ];
    GameReport::from_counts(adversary.name(), *scheme.params(), arms)
}

// ---------------------------------------------------------------------------
// Exact enumeration over keys

/// All length-`m` strings of weight `k`, in increasing numeric order.
pub fn weight_k_strings(m: usize, k: usize) -> Result<Vec<BitString>> {
    if m > 20 {
        return Err(Error::SizeCap { requested: m, cap: 20 });
    }
    Ok((0u64..1 << m)
        .filter(|v| v.count_ones() as usize == k)
        .map(|v| BitString::from_u64(v, m))
        .collect())
}

/// Every `(u, d, e, H_pa, H_ec)` combination.
#[derive(Clone, Debug)]
pub struct KeyMaterial {
    pub u: BitString,
    pub d: BitString,
    pub e: BitString,
    pub h_pa: ToeplitzHash,
    pub h_ec: ToeplitzHash,
}

/// Cap on `log₂` of the number of enumerated key-material tuples.
pub const MAX_KEY_BITS: usize = 16;

pub fn enumerate_key_material(params: &SchemeParams) -> Result<Vec<KeyMaterial>> {
    let pa_len = ToeplitzHash::seed_len(params.s, params.n);
    let ec_len = ToeplitzHash::seed_len(params.s, params.tau);
    let bits = params.n + params.tau + params.mu + pa_len + ec_len;
    if bits > MAX_KEY_BITS {
        return Err(Error::SizeCap {
            requested: bits,
            cap: MAX_KEY_BITS,
        });
    }
    let mut out = Vec::with_capacity(1 << bits);
    for v in 0u64..1 << bits {
        let mut off = 0;
        let mut take = |len: usize| {
            let part = BitString::from_u64((v >> off) & ((1u64 << len) - 1), len);
            off += len;
            part
        };
        let u = take(params.n);
        let d = take(params.tau);
        let e = take(params.mu);
        let pa = take(pa_len);
        let ec = take(ec_len);
        out.push(KeyMaterial {
            u,
            d,
            e,
            h_pa: ToeplitzHash::new(params.s, params.n, pa)?,
            h_ec: ToeplitzHash::new(params.s, params.tau, ec)?,
        });
    }
    Ok(out)
}

fn assemble_key(scheme: &Scheme, theta: &BitString, km: &KeyMaterial) -> Result<DecKey> {
    scheme.dec_key_from_parts(
        theta.clone(),
        km.u.clone(),
        km.d.clone(),
        km.e.clone(),
        km.h_pa.clone(),
        km.h_ec.clone(),
    )
}

/// Largest `m` accepted by the exact ciphertext enumerations.
pub const MAX_ENSEMBLE_QUBITS: usize = 6;

/// Key-averaged ciphertext state for one message: for every classical part
/// `(c, p, q)`, the sum over all keys of `2^m·|r^θ⟩⟨r^θ|`, as an integer
/// `2^m × 2^m` matrix (row-major, qubit `i` = bit `i` of the index).
/// Dividing by `2^m · count` gives the averaged density matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiphertextEnsemble {
    pub count: u64,
    pub blocks: BTreeMap<(BitString, BitString, BitString), Vec<i64>>,
}

impl CiphertextEnsemble {
    /// Largest entry-wise difference between the normalized states.
    pub fn max_difference(&self, other: &CiphertextEnsemble) -> f64 {
        let scale = |e: &CiphertextEnsemble| {
            let dim = e.blocks.values().next().map_or(1, |b| b.len());
            ((dim as f64).sqrt() * e.count as f64).max(1.0)
        };
        let (sa, sb) = (scale(self), scale(other));
        let keys: std::collections::BTreeSet<_> = self.blocks.keys().chain(other.blocks.keys()).collect();
        let mut worst: f64 = 0.0;
        for key in keys {
            let a = self.blocks.get(key);
            let b = other.blocks.get(key);
            let len = a.or(b).map_or(0, |v| v.len());
            for i in 0..len {
                let x = a.map_or(0, |v| v[i]) as f64 / sa;
                let y = b.map_or(0, |v| v[i]) as f64 / sb;
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

fn for_each_key_and_r(
    scheme: &Scheme,
    mut f: impl FnMut(&BitString, &DecKey) -> Result<()>,
) -> Result<u64> {
    let p = scheme.params();
    if p.m > MAX_ENSEMBLE_QUBITS {
        return Err(Error::SizeCap {
            requested: p.m,
            cap: MAX_ENSEMBLE_QUBITS,
        });
    }
    let material = enumerate_key_material(p)?;
    let mut count = 0u64;
    for theta in weight_k_strings(p.m, p.k)? {
        for km in &material {
            let key = assemble_key(scheme, &theta, km)?;
            for rv in 0u64..1 << p.m {
                f(&BitString::from_u64(rv, p.m), &key)?;
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Exact key-averaged ciphertext ensemble for `msg`.
pub fn exact_ciphertext_ensemble(scheme: &Scheme, msg: &BitString) -> Result<CiphertextEnsemble> {
    let m = scheme.params().m;
    let dim = 1usize << m;
    let mut blocks: BTreeMap<(BitString, BitString, BitString), Vec<i64>> = BTreeMap::new();
    let count = for_each_key_and_r(scheme, |r, key| {
        let cl = scheme.classical_part(msg, r, key)?;
        let block = blocks.entry((cl.c, cl.p, cl.q)).or_insert_with(|| vec![0; dim * dim]);
        // 2·|ψ⟩⟨ψ| for each qubit, tensored
        let single: Vec<[[i64; 2]; 2]> = (0..m)
            .map(|i| match (key.theta().get(i), r.get(i)) {
                (false, false) => [[2, 0], [0, 0]],
                (false, true) => [[0, 0], [0, 2]],
                (true, false) => [[1, 1], [1, 1]],
                (true, true) => [[1, -1], [-1, 1]],
            })
            .collect();
        for row in 0..dim {
            for col in 0..dim {
                let mut v = 1i64;
                for (i, mat) in single.iter().enumerate() {
                    v *= mat[row >> i & 1][col >> i & 1];
                    if v == 0 {
                        break;
                    }
                }
                block[row * dim + col] += v;
            }
        }
        Ok(())
    })?;
    Ok(CiphertextEnsemble { count, blocks })
}

/// Measurement outcomes together with `(c, p, q)`.
pub type ObservedCiphertext = (BitString, BitString, BitString, BitString);

/// Exact distribution of `(outcomes, c, p, q)` when qubit `i` of a fresh
/// ciphertext for `msg` is measured in `bases[i]`, averaged over all keys.
/// Values are numerators over `2^m · count`.
pub fn exact_observable_distribution(
    scheme: &Scheme,
    msg: &BitString,
    bases: &[Basis],
) -> Result<(u64, BTreeMap<ObservedCiphertext, u64>)> {
    let m = scheme.params().m;
    if bases.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: bases.len(),
        });
    }
    let mut dist = BTreeMap::new();
    let count = for_each_key_and_r(scheme, |r, key| {
        let cl = scheme.classical_part(msg, r, key)?;
        for ov in 0u64..1 << m {
            let mut weight = 1u64;
            for (i, basis) in bases.iter().enumerate() {
                let o = ov >> i & 1 == 1;
                weight *= if Basis::from_bit(key.theta().get(i)) == *basis {
                    if o == r.get(i) { 2 } else { 0 }
                } else {
                    1
                };
            }
            if weight > 0 {
                *dist
                    .entry((BitString::from_u64(ov, m), cl.c.clone(), cl.p.clone(), cl.q.clone()))
                    .or_insert(0) += weight;
            }
        }
        Ok(())
    })?;
    Ok((count, dist))
}

// ---------------------------------------------------------------------------
// Game 2: exact evaluation on tiny instances

/// Largest `m` accepted by the Game 2 oracle.
pub const MAX_ORACLE_M: usize = 4;

/// Bob's side of Game 2. Qubits `0..m` of `state` form register `A`, sent to
/// Alice. Bob measures `cert[i]` in the Hadamard basis to obtain `y_i`, and
/// `side` in the listed bases for his own use in the last phase.
#[derive(Clone, Debug, PartialEq)]
pub struct EprInstance {
    pub m: usize,
    pub state: StateVector,
    pub cert: Vec<usize>,
    pub side: Vec<(usize, Basis)>,
}

impl EprInstance {
    pub fn new(m: usize, state: StateVector, cert: Vec<usize>, side: Vec<(usize, Basis)>) -> Result<EprInstance> {
        if cert.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: cert.len(),
            });
        }
        let mut used = vec![false; state.qubits()];
        for q in (0..m).chain(cert.iter().copied()).chain(side.iter().map(|s| s.0)) {
            if q >= used.len() {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    len: used.len(),
                });
            }
            if std::mem::replace(&mut used[q], true) {
                return Err(Error::InvalidParams(format!("qubit {q} is used twice")));
            }
        }
        Ok(EprInstance { m, state, cert, side })
    }

    /// EPR pairs between `A` and Bob's register, which he measures honestly.
    pub fn honest(m: usize) -> Result<EprInstance> {
        let state = crate::qsim::make_epr_pairs(m)?;
        EprInstance::new(m, state, (m..2 * m).collect(), Vec::new())
    }

    /// Purification of a prepare-and-measure adversary that measures qubit
    /// `i` in `bases[i]` and submits the outcomes as its certificate.
    ///
    /// Bob's half `B_i` of each pair plays the received qubit. For a
    /// computational measurement he copies `B_i` onto a fresh qubit with a
    /// CNOT and rotates the copy by `H`, so a Hadamard measurement of the copy
    /// reports the computational value; `B_i` itself is then read in the
    /// computational basis as side information.
    pub fn measure_pattern(bases: &[Basis]) -> Result<EprInstance> {
        let m = bases.len();
        let extra = bases.iter().filter(|b| **b == Basis::Computational).count();
        let mut state = crate::qsim::make_epr_pairs(m)?.tensor(&StateVector::zero(extra)?)?;
        let mut cert = Vec::with_capacity(m);
        let mut side = Vec::new();
        let mut next = 2 * m;
        for (i, basis) in bases.iter().enumerate() {
            let b_i = m + i;
            match basis {
                Basis::Hadamard => cert.push(b_i),
                Basis::Computational => {
                    state.apply_cnot(b_i, next);
                    state.apply_h(next);
                    cert.push(next);
                    side.push((b_i, Basis::Computational));
                    next += 1;
                }
            }
        }
        EprInstance::new(m, state, cert, side)
    }

    /// Sends `|0…0⟩` to Alice and a certificate register that deterministically
    /// reads `y`.
    pub fn product_fabricated(y: &BitString) -> Result<EprInstance> {
        let m = y.len();
        let mut state = StateVector::zero(2 * m)?;
        for i in 0..m {
            if y.get(i) {
                state.apply_x(m + i);
            }
            state.apply_h(m + i);
        }
        EprInstance::new(m, state, (m..2 * m).collect(), Vec::new())
    }
}

/// What Bob sees in the last phase of Game 2.
pub struct DecisionInput<'a> {
    pub scheme: &'a Scheme,
    pub key: &'a DecKey,
    pub classical: &'a ClassicalPart,
    pub y: &'a BitString,
    pub side: &'a BitString,
    pub msg0: &'a BitString,
}

pub type Decision<'a> = dyn Fn(&DecisionInput) -> Result<bool> + 'a;

/// Guess by decoding with the certificate outcomes as the estimate of `r`,
/// the Game 2 counterpart of the measuring strategies.
pub fn estimate_decision(input: &DecisionInput) -> Result<bool> {
    decode_guess(input.scheme, input.key, input.classical, input.y, input.msg0)
}

/// Exact Game 2 probabilities; `joint[b][ok][guess]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub joint: [[[f64; 2]; 2]; 2],
    pub total: [f64; 2],
}

impl OracleReport {
    pub fn accept_probability(&self, b: bool) -> f64 {
        let j = &self.joint[usize::from(b)];
        j[1][0] + j[1][1]
    }

    pub fn success_probability(&self, b: bool) -> f64 {
        self.joint[usize::from(b)][1][1]
    }

    /// Total-variation distance between arm `b` and empirical counts.
    pub fn tv_distance(&self, b: bool, counts: &ArmCounts) -> f64 {
        let j = &self.joint[usize::from(b)];
        let n = counts.trials as f64;
        let emp = [
            (counts.trials - counts.accepted) as f64 / n,
            (counts.accepted - counts.successes) as f64 / n,
            counts.successes as f64 / n,
        ];
        let exact = [j[0][0] + j[0][1], j[1][0], j[1][1]];
        0.5 * emp.iter().zip(exact).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// Exact joint distribution of `(ok, b′)` for both values of `b`, summing
/// Born-rule probabilities over Alice's basis choice, all measurement
/// outcomes and all remaining key material. The message for `b = 1` is
/// `1ⁿ`; guesses are forced to 0 when the certificate is rejected.
pub fn run_epr_oracle(scheme: &Scheme, instance: &EprInstance, decision: &Decision) -> Result<OracleReport> {
    let p = *scheme.params();
    if p.m != instance.m {
        return Err(Error::LengthMismatch {
            expected: p.m,
            actual: instance.m,
        });
    }
    if p.m > MAX_ORACLE_M {
        return Err(Error::SizeCap {
            requested: p.m,
            cap: MAX_ORACLE_M,
        });
    }
    let material = enumerate_key_material(&p)?;
    let thetas = weight_k_strings(p.m, p.k)?;
    let msg0 = BitString::ones(p.n);
    let zero = BitString::zeros(p.n);
    let w_theta = 1.0 / thetas.len() as f64;
    let w_key = 1.0 / material.len() as f64;
    let mut report = OracleReport {
        joint: [[[0.0; 2]; 2]; 2],
        total: [0.0; 2],
    };
    let n_side = instance.side.len();
    for theta in &thetas {
        let mut measured: Vec<(usize, Basis)> = (0..p.m).map(|i| (i, Basis::from_bit(theta.get(i)))).collect();
        measured.extend(instance.cert.iter().map(|&q| (q, Basis::Hadamard)));
        measured.extend(instance.side.iter().copied());
        let dist = instance.state.outcome_distribution(&measured);
        let keys = material
            .iter()
            .map(|km| assemble_key(scheme, theta, km))
            .collect::<Result<Vec<_>>>()?;
        for (outcome, &prob) in dist.iter().enumerate() {
            if prob == 0.0 {
                continue;
            }
            let o = outcome as u64;
            let r = BitString::from_u64(o & ((1 << p.m) - 1), p.m);
            let y = BitString::from_u64(o >> p.m & ((1 << p.m) - 1), p.m);
            let side = BitString::from_u64(o >> (2 * p.m), n_side);
            for key in &keys {
                let ok = scheme.accepts(&r, key, &y)?;
                for (b, msg) in [(0usize, &zero), (1, &msg0)] {
                    let classical = scheme.classical_part(msg, &r, key)?;
                    let guess = ok
                        && decision(&DecisionInput {
                            scheme,
                            key,
                            classical: &classical,
                            y: &y,
                            side: &side,
                            msg0: &msg0,
                        })?;
                    let w = w_theta * prob * w_key;
                    report.joint[b][usize::from(ok)][usize::from(guess)] += w;
                    report.total[b] += w;
                }
            }
        }
    }
    Ok(report)
}

/// Serializable description of a Game 2 instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub params: SchemeParams,
    /// Code name understood by [`LinearCode::by_name`].
    pub code: String,
    pub instance: OracleInstanceSpec,
    pub decision: DecisionSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleInstanceSpec {
    Honest,
    /// `bases[i] = '1'` for a Hadamard measurement of qubit `i`.
    Pattern { bases: String },
    ProductFabricated { y: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionSpec {
    Always0,
    Always1,
    Estimate,
}

impl OracleSpec {
    pub fn run(&self) -> Result<OracleReport> {
        let code = LinearCode::by_name(&self.code)?;
        let scheme = Scheme::new(self.params, code)?;
        let instance = match &self.instance {
            OracleInstanceSpec::Honest => EprInstance::honest(self.params.m)?,
            OracleInstanceSpec::Pattern { bases } => {
                let bits: BitString = bases.parse()?;
                EprInstance::measure_pattern(&bits.bits().map(Basis::from_bit).collect::<Vec<_>>())?
            }
            OracleInstanceSpec::ProductFabricated { y } => EprInstance::product_fabricated(&y.parse()?)?,
        };
        let decision: Box<Decision> = match self.decision {
            DecisionSpec::Always0 => Box::new(|_: &DecisionInput| Ok(false)),
            DecisionSpec::Always1 => Box::new(|_: &DecisionInput| Ok(true)),
            DecisionSpec::Estimate => Box::new(estimate_decision),
        };
        run_epr_oracle(&scheme, &instance, decision.as_ref())
    }
}

// ---------------------------------------------------------------------------
// Classical entropies

/// Joint distribution of named discrete variables. The first variable is the
/// least significant digit of the flat index.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalJoint {
    names: Vec<String>,
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(names: &[&str], dims: &[usize], probs: Vec<f64>) -> Result<ClassicalJoint> {
        if names.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: names.len(),
                actual: dims.len(),
            });
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::InvalidParams(format!("variable {n} repeated")));
            }
        }
        let size: usize = dims.iter().product();
        if probs.len() != size {
            return Err(Error::LengthMismatch {
                expected: size,
                actual: probs.len(),
            });
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(ClassicalJoint {
            names: names.iter().map(|s| s.to_string()).collect(),
            dims: dims.to_vec(),
            probs,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn var(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidParams(format!("no variable named {name:?}")))
    }

    /// Cardinality of a group of variables.
    pub fn card(&self, vars: &[&str]) -> Result<usize> {
        vars.iter().map(|v| self.var(v).map(|i| self.dims[i])).product()
    }

    /// Marginal over `vars`, indexed with the first listed variable least
    /// significant.
    pub fn marginal(&self, vars: &[&str]) -> Result<Vec<f64>> {
        let idx = vars.iter().map(|v| self.var(v)).collect::<Result<Vec<_>>>()?;
        for (i, a) in idx.iter().enumerate() {
            if idx[..i].contains(a) {
                return Err(Error::InvalidParams("variable listed twice".into()));
            }
        }
        let out_size: usize = idx.iter().map(|&i| self.dims[i]).product();
        let mut out = vec![0.0; out_size];
        let mut digits = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            let mut j = 0;
            for &i in idx.iter().rev() {
                j = j * self.dims[i] + digits[i];
            }
            out[j] += p;
            for (d, &dim) in digits.iter_mut().zip(&self.dims) {
                *d += 1;
                if *d < dim {
                    break;
                }
                *d = 0;
            }
        }
        Ok(out)
    }
}

/// `H_min(X|E) = −log₂ Σ_e max_x P(x, e)`.
pub fn hmin_classical(joint: &ClassicalJoint, x: &[&str], e: &[&str]) -> Result<f64> {
    let xs = joint.card(x)?;
    let vars: Vec<&str> = x.iter().chain(e).copied().collect();
    let p = joint.marginal(&vars)?;
    let guess: f64 = p
        .chunks(xs)
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .sum();
    Ok(-guess.log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HmaxReport {
    /// `log₂ Σ_y P(y)·(Σ_z √P(z|y))²`.
    pub renyi_half: f64,
    /// `max_y log₂ |{z : P(z, y) > 0}|`.
    pub support_bound: f64,
}

pub fn hmax_classical(joint: &ClassicalJoint, z: &[&str], y: &[&str]) -> Result<HmaxReport> {
    let zs = joint.card(z)?;
    let vars: Vec<&str> = z.iter().chain(y).copied().collect();
    let p = joint.marginal(&vars)?;
    let mut acc = 0.0;
    let mut support = 0usize;
    for row in p.chunks(zs) {
        let py: f64 = row.iter().sum();
        if py <= 0.0 {
            continue;
        }
        let root: f64 = row.iter().map(|v| (v / py).sqrt()).sum();
        acc += py * root * root;
        support = support.max(row.iter().filter(|v| **v > 0.0).count());
    }
    Ok(HmaxReport {
        renyi_half: acc.log2().max(0.0),
        support_bound: (support.max(1) as f64).log2(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UncertaintyReport {
    pub h_min: f64,
    pub h_max: f64,
    pub h_max_support: f64,
    pub rhs: f64,
}

impl UncertaintyReport {
    pub fn holds(&self) -> bool {
        self.h_min + self.h_max >= self.rhs - 1e-9
    }
}

fn joint_from_measurement(state: &StateVector, groups: &[(&str, &[(usize, Basis)])]) -> Result<ClassicalJoint> {
    let measured: Vec<(usize, Basis)> = groups.iter().flat_map(|g| g.1.iter().copied()).collect();
    let names: Vec<&str> = groups.iter().map(|g| g.0).collect();
    let dims: Vec<usize> = groups.iter().map(|g| 1usize << g.1.len()).collect();
    ClassicalJoint::new(&names, &dims, state.outcome_distribution(&measured))
}

/// Evaluates both sides of `H_min(X|E) + H_max(Z|Z′) ≥ |A|·log₂(1/c)` where
/// `X` (`Z`) is the computational (Hadamard) measurement of the qubits `a`,
/// `E` and `Z′` are the listed measurements of disjoint other qubits, and `c`
/// is the overlap of the two bases.
pub fn check_uncertainty_relation(
    state: &StateVector,
    a: &[usize],
    z_prime: &[(usize, Basis)],
    e: &[(usize, Basis)],
) -> Result<UncertaintyReport> {
    let mut used = vec![false; state.qubits()];
    for q in a.iter().copied().chain(z_prime.iter().map(|p| p.0)).chain(e.iter().map(|p| p.0)) {
        if q >= used.len() || std::mem::replace(&mut used[q], true) {
            return Err(Error::InvalidParams(format!("qubit {q} missing or used twice")));
        }
    }
    let x_meas: Vec<(usize, Basis)> = a.iter().map(|&q| (q, Basis::Computational)).collect();
    let z_meas: Vec<(usize, Basis)> = a.iter().map(|&q| (q, Basis::Hadamard)).collect();
    let xe = joint_from_measurement(state, &[("X", &x_meas), ("E", e)])?;
    let zz = joint_from_measurement(state, &[("Z", &z_meas), ("Zp", z_prime)])?;
    let h_min = hmin_classical(&xe, &["X"], &["E"])?;
    let hmax = hmax_classical(&zz, &["Z"], &["Zp"])?;
    let c = povm_overlap(&computational_povm(), &hadamard_povm())?;
    Ok(UncertaintyReport {
        h_min,
        h_max: hmax.renyi_half,
        h_max_support: hmax.support_bound,
        rhs: a.len() as f64 * (1.0 / c).log2(),
    })
}

/// The uncertainty relation for one basis choice `θ` of a Game 2 instance:
/// `A` is Alice's computational positions, `Z′` Bob's certificate outcomes on
/// those positions and `E` his side measurements.
pub fn epr_uncertainty(instance: &EprInstance, theta: &BitString) -> Result<UncertaintyReport> {
    let (comp, _) = index_sets_from_basis(theta);
    let a = comp.positions().to_vec();
    let z_prime: Vec<(usize, Basis)> = a.iter().map(|&i| (instance.cert[i], Basis::Hadamard)).collect();
    check_uncertainty_relation(&instance.state, &a, &z_prime, &instance.side)
}

// ---------------------------------------------------------------------------
// Leftover hashing

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeftoverReport {
    pub distance: f64,
    pub bound: f64,
    pub h_min: f64,
}

pub const MAX_LEFTOVER_S: usize = 8;
pub const MAX_LEFTOVER_N: usize = 3;

/// Exact distance between `(H(X), H, E)` and `(U, H, E)` averaged over every
/// Toeplitz matrix, against `½·2^{−(H_min(X|E) − n)/2}`. The variable `x`
/// must have `2^s` values, read as `s`-bit strings.
pub fn check_leftover_hash(joint: &ClassicalJoint, x: &str, e: &[&str], n: usize) -> Result<LeftoverReport> {
    let xs = joint.card(&[x])?;
    if !xs.is_power_of_two() {
        return Err(Error::InvalidParams(format!("X has {xs} values, not a power of two")));
    }
    let s = xs.trailing_zeros() as usize;
    if s == 0 || s > MAX_LEFTOVER_S || n == 0 || n > MAX_LEFTOVER_N {
        return Err(Error::SizeCap {
            requested: s.max(n),
            cap: MAX_LEFTOVER_S,
        });
    }
    let mut vars = vec![x];
    vars.extend_from_slice(e);
    let p = joint.marginal(&vars)?;
    let h_min = hmin_classical(joint, &[x], e)?;
    let seed_len = ToeplitzHash::seed_len(s, n);
    let inputs: Vec<BitString> = (0..xs as u64).map(|v| BitString::from_u64(v, s)).collect();
    let outs = 1usize << n;
    let mut total = 0.0;
    for sv in 0u64..1 << seed_len {
        let h = ToeplitzHash::new(s, n, BitString::from_u64(sv, seed_len))?;
        let images: Vec<usize> = inputs
            .iter()
            .map(|x| h.eval(x).map(|z| z.extract_u64(0, n) as usize))
            .collect::<Result<_>>()?;
        let mut d = 0.0;
        for row in p.chunks(xs) {
            let pe: f64 = row.iter().sum();
            let mut pz = vec![0.0; outs];
            for (xv, &pr) in row.iter().enumerate() {
                pz[images[xv]] += pr;
            }
            d += pz.iter().map(|v| (v - pe / outs as f64).abs()).sum::<f64>();
        }
        total += 0.5 * d;
    }
    Ok(LeftoverReport {
        distance: total / (1u64 << seed_len) as f64,
        bound: 0.5 * (-(h_min - n as f64) / 2.0).exp2(),
        h_min,
    })
}

// ---------------------------------------------------------------------------
// Sampling bound

/// Monte-Carlo check of the sampling bound at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SerflingPoint {
    pub m: usize,
    pub s: usize,
    pub k: usize,
    pub nu: f64,
    pub delta: f64,
    /// Number of errors in the population.
    pub weight: usize,
    pub samples: u64,
    pub hits: u64,
    pub empirical: f64,
    pub exact: f64,
    pub bound: f64,
}

fn sampling_event(j: usize, w: usize, s: usize, k: usize, delta: f64, nu: f64) -> bool {
    j as f64 <= k as f64 * delta + 1e-9 && (w - j) as f64 >= s as f64 * (delta + nu) - 1e-9
}

/// Exact probability that a uniformly random test set of size `k` sees at
/// most `kδ` of the `w` errors while the other `s = m − k` positions hold at
/// least `s(δ+ν)` of them.
pub fn sampling_event_probability(m: usize, k: usize, w: usize, delta: f64, nu: f64) -> f64 {
    let s = m - k;
    let lf: Vec<f64> = std::iter::once(0.0)
        .chain((1..=m).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let lc = |a: usize, b: usize| lf[a] - lf[b] - lf[a - b];
    (0..=k.min(w))
        .filter(|&j| k - j <= m - w && sampling_event(j, w, s, k, delta, nu))
        .map(|j| (lc(w, j) + lc(m - w, k - j) - lc(m, k)).exp())
        .sum()
}

/// Samples random test sets of size `k = m/2` against the error weight that
/// maximizes the exact event probability.
pub fn serfling_monte_carlo<R: Rng + ?Sized>(
    m: usize,
    nu: f64,
    delta: f64,
    samples: u64,
    rng: &mut R,
) -> Result<SerflingPoint> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("m = {m} must be even and at least 2")));
    }
    let (s, k) = (m / 2, m / 2);
    let (weight, exact) = (0..=m)
        .map(|w| (w, sampling_event_probability(m, k, w, delta, nu)))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let mut hits = 0u64;
    for _ in 0..samples {
        // errors sit at positions 0..weight
        let test = sample_theta(m, k, rng);
        let j = (0..weight).filter(|&i| test.get(i)).count();
        hits += u64::from(sampling_event(j, weight, s, k, delta, nu));
    }
    Ok(SerflingPoint {
        m,
        s,
        k,
        nu,
        delta,
        weight,
        samples,
        hits,
        empirical: hits as f64 / samples.max(1) as f64,
        exact,
        bound: serfling_bound(s, k, m, nu)?,
    })
}
