//! The certified-deletion encryption scheme: key generation, encryption,
//! decryption, deletion and verification, plus the key, ciphertext and
//! certificate file formats.
//!
//! Keys split into an auxiliary key (the random string `r`) and a decryption
//! key (basis string `θ`, one-time pads `u, d, e` and the two hash
//! functions). Decryption never sees the auxiliary key; verification needs
//! both.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitvec::{index_sets_from_basis, BitString, IndexSet};
use crate::error::{Error, Result};
use crate::hashcode::{sample_hash, LinearCode, ToeplitzHash};
use crate::qsim::{prepare_wiesner, NoiseModel, QuantumRegister};

/// Scheme dimensions.
///
/// `n` message bits, `m = s + k` qubits of which `k` are Hadamard-encoded
/// check qubits, `tau` error-check hash bits, `mu` syndrome bits and the
/// verification threshold rate `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub k: usize,
    pub tau: usize,
    pub mu: usize,
    pub delta: f64,
}

impl SchemeParams {
    /// Derives `m` and `mu` and validates against the code.
    pub fn new(n: usize, s: usize, k: usize, tau: usize, delta: f64, code: &LinearCode) -> Result<SchemeParams> {
        let mu = code.syndrome_len(s)?;
        let params = SchemeParams {
            n,
            m: s + k,
            s,
            k,
            tau,
            mu,
            delta,
        };
        params.validate_for_code(code)?;
        Ok(params)
    }

    /// Code-independent consistency checks.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n == 0 || self.s == 0 || self.k == 0 || self.tau == 0 {
            return bad(format!("n, s, k and tau must be positive: {self:?}"));
        }
        if self.m != self.s + self.k {
            return bad(format!("m = {} but s + k = {}", self.m, self.s + self.k));
        }
        if !(self.delta.is_finite() && (0.0..0.5).contains(&self.delta)) {
            return bad(format!("delta = {} not in [0, 1/2)", self.delta));
        }
        if self.m > u32::MAX as usize || self.n > u32::MAX as usize {
            return bad("dimensions exceed 32 bits".into());
        }
        Ok(())
    }

    pub fn validate_for_code(&self, code: &LinearCode) -> Result<()> {
        self.validate()?;
        let mu = code.syndrome_len(self.s)?;
        if mu != self.mu {
            return Err(Error::InvalidParams(format!(
                "mu = {} but the code produces {mu} syndrome bits for s = {}",
                self.mu, self.s
            )));
        }
        Ok(())
    }

    /// `k·δ`; a certificate passes when its mismatch count is strictly below.
    pub fn threshold(&self) -> f64 {
        self.k as f64 * self.delta
    }
}

/// Auxiliary key: the string `r` encoded into the qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxKey {
    r: BitString,
}

impl AuxKey {
    pub fn r(&self) -> &BitString {
        &self.r
    }
}

/// Decryption key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecKey {
    theta: BitString,
    u: BitString,
    d: BitString,
    e: BitString,
    h_pa: ToeplitzHash,
    h_ec: ToeplitzHash,
    // zero positions of theta, and the rest
    computational: IndexSet,
    hadamard: IndexSet,
}

impl DecKey {
    pub fn theta(&self) -> &BitString {
        &self.theta
    }
    pub fn u(&self) -> &BitString {
        &self.u
    }
    pub fn d(&self) -> &BitString {
        &self.d
    }
    pub fn e(&self) -> &BitString {
        &self.e
    }
    pub fn h_pa(&self) -> &ToeplitzHash {
        &self.h_pa
    }
    pub fn h_ec(&self) -> &ToeplitzHash {
        &self.h_ec
    }
    /// Positions `I` encoded in the computational basis.
    pub fn computational_positions(&self) -> &IndexSet {
        &self.computational
    }
    /// Positions `Ī` encoded in the Hadamard basis.
    pub fn hadamard_positions(&self) -> &IndexSet {
        &self.hadamard
    }
}

/// Classical half of a ciphertext: `c = msg ⊕ x ⊕ u`, the padded error-check
/// hash `p` and the padded syndrome `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalPart {
    pub c: BitString,
    pub p: BitString,
    pub q: BitString,
}

/// A ciphertext. The qubits can be measured or sent through a channel, never
/// copied.
#[derive(Debug, PartialEq)]
pub struct Ciphertext {
    quantum: QuantumRegister,
    classical: ClassicalPart,
}

impl Ciphertext {
    pub fn from_parts(quantum: QuantumRegister, classical: ClassicalPart) -> Ciphertext {
        Ciphertext { quantum, classical }
    }

    pub fn into_parts(self) -> (QuantumRegister, ClassicalPart) {
        (self.quantum, self.classical)
    }

    pub fn classical(&self) -> &ClassicalPart {
        &self.classical
    }

    pub fn classical_mut(&mut self) -> &mut ClassicalPart {
        &mut self.classical
    }

    pub fn quantum_mut(&mut self) -> &mut QuantumRegister {
        &mut self.quantum
    }

    /// Sends the qubits through a bit-flip channel; returns the flip mask.
    pub fn apply_channel<R: Rng + ?Sized>(&mut self, noise: &NoiseModel, rng: &mut R) -> BitString {
        self.quantum.apply_noise(noise, rng)
    }
}

/// Deletion certificate: Hadamard-basis outcomes for every qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeletionCertificate {
    y: BitString,
}

impl DeletionCertificate {
    pub fn new(y: BitString) -> DeletionCertificate {
        DeletionCertificate { y }
    }

    pub fn y(&self) -> &BitString {
        &self.y
    }
}

/// Decrypted message plus the error-check flag (`true` = accepted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecryptOutput {
    pub plaintext: BitString,
    pub flag: bool,
}

/// Uniform weight-`k` string of length `m`: the first `k` steps of a
/// Fisher–Yates shuffle pick the one positions.
pub fn sample_theta<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> BitString {
    assert!(k <= m);
    let mut idx: Vec<usize> = (0..m).collect();
    let mut theta = BitString::zeros(m);
    for i in 0..k {
        let j = rng.random_range(i..m);
        idx.swap(i, j);
        theta.set(idx[i], true);
    }
    theta
}

/// Parameters plus the error-correcting code; runs the five circuits.
#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    params: SchemeParams,
    code: LinearCode,
}

fn check_len(what: &str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::InvalidParams(format!(
            "{what} has length {actual}, expected {expected}"
        )));
    }
    Ok(())
}

impl Scheme {
    pub fn new(params: SchemeParams, code: LinearCode) -> Result<Scheme> {
        params.validate_for_code(&code)?;
        Ok(Scheme { params, code })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn aux_key_from_parts(&self, r: BitString) -> Result<AuxKey> {
        check_len("r", self.params.m, r.len())?;
        Ok(AuxKey { r })
    }

    /// Assembles a decryption key, checking every length and that `θ` has
    /// weight exactly `k`.
    pub fn dec_key_from_parts(
        &self,
        theta: BitString,
        u: BitString,
        d: BitString,
        e: BitString,
        h_pa: ToeplitzHash,
        h_ec: ToeplitzHash,
    ) -> Result<DecKey> {
        let p = &self.params;
        check_len("theta", p.m, theta.len())?;
        if theta.weight() != p.k {
            return Err(Error::InvalidParams(format!(
                "theta has weight {}, expected {}",
                theta.weight(),
                p.k
            )));
        }
        check_len("u", p.n, u.len())?;
        check_len("d", p.tau, d.len())?;
        check_len("e", p.mu, e.len())?;
        if (h_pa.in_len(), h_pa.out_len()) != (p.s, p.n) {
            return Err(Error::InvalidParams("privacy amplification hash has wrong shape".into()));
        }
        if (h_ec.in_len(), h_ec.out_len()) != (p.s, p.tau) {
            return Err(Error::InvalidParams("error-check hash has wrong shape".into()));
        }
        let (computational, hadamard) = index_sets_from_basis(&theta);
        Ok(DecKey {
            theta,
            u,
            d,
            e,
            h_pa,
            h_ec,
            computational,
            hadamard,
        })
    }

    pub fn keygen<R: Rng + ?Sized>(&self, rng: &mut R) -> (AuxKey, DecKey) {
        let p = &self.params;
        let r = BitString::random(p.m, rng);
        let theta = sample_theta(p.m, p.k, rng);
        let u = BitString::random(p.n, rng);
        let d = BitString::random(p.tau, rng);
        let e = BitString::random(p.mu, rng);
        let h_pa = sample_hash(p.s, p.n, rng).expect("validated dimensions");
        let h_ec = sample_hash(p.s, p.tau, rng).expect("validated dimensions");
        let aux = AuxKey { r };
        let dec = self
            .dec_key_from_parts(theta, u, d, e, h_pa, h_ec)
            .expect("sampled key is well formed");
        (aux, dec)
    }

    pub fn encrypt(&self, msg: &BitString, aux: &AuxKey, key: &DecKey) -> Result<Ciphertext> {
        let classical = self.classical_part(msg, &aux.r, key)?;
        let quantum = QuantumRegister::new(prepare_wiesner(&aux.r, &key.theta)?);
        Ok(Ciphertext { quantum, classical })
    }

    /// The classical half of an encryption of `msg` when the qubit values
    /// are `r`.
    pub fn classical_part(&self, msg: &BitString, r: &BitString, key: &DecKey) -> Result<ClassicalPart> {
        check_len("message", self.params.n, msg.len())?;
        check_len("r", self.params.m, r.len())?;
        check_len("theta", self.params.m, key.theta.len())?;
        let r_i = r.restrict(&key.computational)?;
        let x = key.h_pa.eval(&r_i)?;
        let p = key.h_ec.eval(&r_i)?.xor(&key.d)?;
        let q = self.code.synd(&r_i)?.xor(&key.e)?;
        let c = msg.xor(&x)?.xor(&key.u)?;
        Ok(ClassicalPart { c, p, q })
    }

    /// Measures every qubit in its key basis, corrects the computational
    /// positions towards the transmitted syndrome and checks the error hash.
    /// A failed check is reported through `flag`, not as an error.
    pub fn decrypt<R: Rng + ?Sized>(&self, key: &DecKey, ct: Ciphertext, rng: &mut R) -> Result<DecryptOutput> {
        let Ciphertext {
            mut quantum,
            classical,
        } = ct;
        let p = &self.params;
        check_len("ciphertext qubits", p.m, quantum.len())?;
        check_len("c", p.n, classical.c.len())?;
        check_len("p", p.tau, classical.p.len())?;
        check_len("q", p.mu, classical.q.len())?;
        let r = quantum.measure_all(&key.theta, rng)?;
        let r_i = r.restrict(&key.computational)?;
        let corrected = self.code.corr(&r_i, &classical.q.xor(&key.e)?)?;
        let check = key.h_ec.eval(&corrected)?.xor(&key.d)?;
        let flag = check == classical.p;
        let plaintext = classical.c.xor(&key.h_pa.eval(&corrected)?)?.xor(&key.u)?;
        Ok(DecryptOutput { plaintext, flag })
    }

    /// Accepts iff `y` disagrees with `r` on fewer than `k·δ` Hadamard
    /// positions.
    pub fn verify(&self, aux: &AuxKey, key: &DecKey, cert: &DeletionCertificate) -> Result<bool> {
        self.accepts(&aux.r, key, &cert.y)
    }

    /// Verification on raw strings: `r` the qubit values, `y` the claimed
    /// Hadamard outcomes.
    pub fn accepts(&self, r: &BitString, key: &DecKey, y: &BitString) -> Result<bool> {
        check_len("r", self.params.m, r.len())?;
        check_len("theta", self.params.m, key.theta.len())?;
        check_len("certificate", self.params.m, y.len())?;
        let mismatches = r.restrict(&key.hadamard)?.distance(&y.restrict(&key.hadamard)?)?;
        Ok((mismatches as f64) < self.params.threshold())
    }
}

/// Measures every qubit in the Hadamard basis.
pub fn delete<R: Rng + ?Sized>(ct: Ciphertext, rng: &mut R) -> DeletionCertificate {
    let mut quantum = ct.quantum;
    let all_hadamard = BitString::ones(quantum.len());
    let y = quantum
        .measure_all(&all_hadamard, rng)
        .expect("basis string matches register length");
    DeletionCertificate { y }
}

// ---------------------------------------------------------------------------
// Binary formats

const CT_MAGIC: &[u8; 4] = b"QCD1";
const CERT_MAGIC: &[u8; 4] = b"QCDY";
const FORMAT_VERSION: u8 = 1;
const CT_HEADER_LEN: usize = 4 + 1 + 6 * 4 + 8;

/// Ciphertext file: magic `QCD1`, version byte, `n m s k tau mu` as
/// little-endian `u32`, `delta` as little-endian `f64`, then the packed
/// qubit values, qubit bases, `c`, `p` and `q`, each padded to a byte.
///
/// Fails if any qubit has been depolarized, since a mixed qubit has no
/// `(value, basis)` description.
pub fn serialize_ciphertext(params: &SchemeParams, ct: &Ciphertext) -> Result<Vec<u8>> {
    params.validate()?;
    let qubits = ct.quantum.qubits();
    check_len("ciphertext qubits", params.m, qubits.len())?;
    check_len("c", params.n, ct.classical.c.len())?;
    check_len("p", params.tau, ct.classical.p.len())?;
    check_len("q", params.mu, ct.classical.q.len())?;
    if qubits.iter().any(|q| q.is_disturbed()) {
        return Err(Error::Format("cannot serialize a depolarized qubit".into()));
    }
    let values = BitString::from_bits(qubits.iter().map(|q| q.value()));
    let bases = BitString::from_bits(qubits.iter().map(|q| q.basis().bit()));

    let mut out = Vec::with_capacity(CT_HEADER_LEN + 2 * params.m.div_ceil(8));
    out.extend_from_slice(CT_MAGIC);
    out.push(FORMAT_VERSION);
    for v in [params.n, params.m, params.s, params.k, params.tau, params.mu] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&params.delta.to_le_bytes());
    for part in [&values, &bases, &ct.classical.c, &ct.classical.p, &ct.classical.q] {
        out.extend_from_slice(&part.to_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Format(format!("truncated input while reading {what}"))
        })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn bits(&mut self, len: usize, what: &str) -> Result<BitString> {
        let b = self.take(len.div_ceil(8), what)?;
        BitString::from_bytes(len, b)
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.take(4, "magic")? != magic {
            return Err(Error::Format("bad magic".into()));
        }
        let version = self.take(1, "version")?[0];
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

/// Parses a ciphertext file into fresh, unmeasured qubits.
pub fn deserialize_ciphertext(bytes: &[u8]) -> Result<(SchemeParams, Ciphertext)> {
    let mut rd = Reader { bytes, pos: 0 };
    rd.header(CT_MAGIC)?;
    let n = rd.u32("n")?;
    let m = rd.u32("m")?;
    let s = rd.u32("s")?;
    let k = rd.u32("k")?;
    let tau = rd.u32("tau")?;
    let mu = rd.u32("mu")?;
    let delta = f64::from_le_bytes(rd.take(8, "delta")?.try_into().expect("8 bytes"));
    let params = SchemeParams {
        n,
        m,
        s,
        k,
        tau,
        mu,
        delta,
    };
    params.validate()?;
    let expected = CT_HEADER_LEN + 2 * m.div_ceil(8) + n.div_ceil(8) + tau.div_ceil(8) + mu.div_ceil(8);
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "ciphertext is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let values = rd.bits(m, "qubit values")?;
    let bases = rd.bits(m, "qubit bases")?;
    let c = rd.bits(n, "c")?;
    let p = rd.bits(tau, "p")?;
    let q = rd.bits(mu, "q")?;
    rd.finish()?;
    let quantum = QuantumRegister::new(prepare_wiesner(&values, &bases)?);
    Ok((
        params,
        Ciphertext {
            quantum,
            classical: ClassicalPart { c, p, q },
        },
    ))
}

/// Certificate file: magic `QCDY`, version byte, `m` as little-endian `u32`,
/// packed `y`.
pub fn serialize_certificate(cert: &DeletionCertificate) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + cert.y.len().div_ceil(8));
    out.extend_from_slice(CERT_MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(cert.y.len() as u32).to_le_bytes());
    out.extend_from_slice(&cert.y.to_bytes());
    out
}

pub fn deserialize_certificate(bytes: &[u8]) -> Result<DeletionCertificate> {
    let mut rd = Reader { bytes, pos: 0 };
    rd.header(CERT_MAGIC)?;
    let m = rd.u32("m")?;
    let y = rd.bits(m, "y")?;
    rd.finish()?;
    Ok(DeletionCertificate { y })
}

// ---------------------------------------------------------------------------
// Key files (JSON)

#[derive(Serialize, Deserialize)]
struct CodeJson {
    block_in: usize,
    parity_check: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct AuxJson {
    r: String,
}

#[derive(Serialize, Deserialize)]
struct DecJson {
    theta: String,
    u: String,
    d: String,
    e: String,
    hpa_seed: String,
    hec_seed: String,
}

#[derive(Serialize, Deserialize)]
struct KeyFileJson {
    version: u32,
    params: SchemeParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    code: Option<CodeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aux: Option<AuxJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dec: Option<DecJson>,
}

/// Contents of a key file. Either key may be absent so the auxiliary key can
/// be stored separately from the decryption key.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyFile {
    pub scheme: Scheme,
    pub aux: Option<AuxKey>,
    pub dec: Option<DecKey>,
}

impl KeyFile {
    pub fn to_json(&self) -> String {
        let code = &self.scheme.code;
        let doc = KeyFileJson {
            version: 1,
            params: self.scheme.params,
            code: Some(CodeJson {
                block_in: code.block_in(),
                parity_check: code.parity_check().iter().map(BitString::to_hex).collect(),
            }),
            aux: self.aux.as_ref().map(|a| AuxJson { r: a.r.to_hex() }),
            dec: self.dec.as_ref().map(|k| DecJson {
                theta: k.theta.to_hex(),
                u: k.u.to_hex(),
                d: k.d.to_hex(),
                e: k.e.to_hex(),
                hpa_seed: k.h_pa.seed().to_hex(),
                hec_seed: k.h_ec.seed().to_hex(),
            }),
        };
        serde_json::to_string_pretty(&doc).expect("key file serializes")
    }

    /// Parses a key file. A missing `code` section means the [8,4] extended
    /// Hamming code.
    pub fn from_json(text: &str) -> Result<KeyFile> {
        let doc: KeyFileJson =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("key file: {e}")))?;
        if doc.version != 1 {
            return Err(Error::Format(format!("unsupported key file version {}", doc.version)));
        }
        let code = match &doc.code {
            None => LinearCode::extended_hamming_8_4(),
            Some(c) => {
                let rows = c
                    .parity_check
                    .iter()
                    .map(|h| BitString::from_hex(c.block_in, h))
                    .collect::<Result<Vec<_>>>()?;
                LinearCode::from_parity_check(c.block_in, &rows)?
            }
        };
        let scheme = Scheme::new(doc.params, code)?;
        let p = doc.params;
        let aux = doc
            .aux
            .map(|a| scheme.aux_key_from_parts(BitString::from_hex(p.m, &a.r)?))
            .transpose()?;
        let dec = doc
            .dec
            .map(|k| -> Result<DecKey> {
                let h_pa = ToeplitzHash::new(
                    p.s,
                    p.n,
                    BitString::from_hex(ToeplitzHash::seed_len(p.s, p.n), &k.hpa_seed)?,
                )?;
                let h_ec = ToeplitzHash::new(
                    p.s,
                    p.tau,
                    BitString::from_hex(ToeplitzHash::seed_len(p.s, p.tau), &k.hec_seed)?,
                )?;
                scheme.dec_key_from_parts(
                    BitString::from_hex(p.m, &k.theta)?,
                    BitString::from_hex(p.n, &k.u)?,
                    BitString::from_hex(p.tau, &k.d)?,
                    BitString::from_hex(p.mu, &k.e)?,
                    h_pa,
                    h_ec,
                )
            })
            .transpose()?;
        Ok(KeyFile { scheme, aux, dec })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> crate::SimRng {
        crate::SimRng::seed_from_u64(seed)
    }

    fn small_scheme() -> Scheme {
        let code = LinearCode::extended_hamming_8_4();
        Scheme::new(SchemeParams::new(16, 32, 16, 8, 0.05, &code).unwrap(), code).unwrap()
    }

    #[test]
    fn params_validation() {
        let code = LinearCode::extended_hamming_8_4();
        let p = SchemeParams::new(128, 384, 128, 32, 0.05, &code).unwrap();
        assert_eq!((p.m, p.mu), (512, 192));
        assert!(SchemeParams::new(128, 380, 128, 32, 0.05, &code).is_err());
        assert!(SchemeParams::new(128, 384, 0, 32, 0.05, &code).is_err());
        assert!(SchemeParams::new(128, 384, 128, 32, 0.5, &code).is_err());
        let mut bad = p;
        bad.m += 1;
        assert!(bad.validate().is_err());
        let mut bad = p;
        bad.mu = 3;
        assert!(bad.validate_for_code(&code).is_err());
    }

    #[test]
    fn theta_has_weight_k_and_uniform_marginals() {
        let mut g = rng(1);
        let (m, k, draws) = (20usize, 7usize, 100_000usize);
        let mut counts = vec![0usize; m];
        for _ in 0..draws {
            let t = sample_theta(m, k, &mut g);
            assert_eq!(t.weight(), k);
            for i in t.ones_positions() {
                counts[i] += 1;
            }
        }
        let p = k as f64 / m as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() < 4.0 * sigma, "{c}");
        }
    }

    #[test]
    fn keygen_is_deterministic() {
        let s = small_scheme();
        let a = s.keygen(&mut rng(7));
        let b = s.keygen(&mut rng(7));
        assert_eq!(a, b);
        assert_eq!(a.1.theta().weight(), 16);
    }

    #[test]
    fn zero_message_and_pad_structure() {
        let s = small_scheme();
        let mut g = rng(2);
        let (aux, key) = s.keygen(&mut g);
        let zero = BitString::zeros(16);
        let ct0 = s.encrypt(&zero, &aux, &key).unwrap();
        let r_i = aux.r().restrict(key.computational_positions()).unwrap();
        let x = key.h_pa().eval(&r_i).unwrap();
        assert_eq!(ct0.classical().c, x.xor(key.u()).unwrap());

        let msg = BitString::random(16, &mut g);
        let ct1 = s.encrypt(&msg, &aux, &key).unwrap();
        assert_eq!(ct0.classical().c.xor(&ct1.classical().c).unwrap(), msg);
        assert_eq!(ct0.classical().p, ct1.classical().p);
        assert_eq!(ct0.classical().q, ct1.classical().q);
    }

    #[test]
    fn degenerate_key_leaves_message_in_clear() {
        let s = small_scheme();
        let p = *s.params();
        let mut g = rng(3);
        let r = BitString::random(p.m, &mut g);
        let theta = sample_theta(p.m, p.k, &mut g);
        let key = s
            .dec_key_from_parts(
                theta,
                BitString::zeros(p.n),
                BitString::zeros(p.tau),
                BitString::zeros(p.mu),
                ToeplitzHash::new(p.s, p.n, BitString::zeros(p.s + p.n - 1)).unwrap(),
                ToeplitzHash::new(p.s, p.tau, BitString::zeros(p.s + p.tau - 1)).unwrap(),
            )
            .unwrap();
        let aux = s.aux_key_from_parts(r).unwrap();
        let msg = BitString::random(p.n, &mut g);
        let ct = s.encrypt(&msg, &aux, &key).unwrap();
        assert_eq!(ct.classical().c, msg);
        assert!(ct.classical().p.is_zero());
        let r_i = aux.r().restrict(key.computational_positions()).unwrap();
        assert_eq!(ct.classical().q, s.code().synd(&r_i).unwrap());
    }

    #[test]
    fn malformed_keys_are_rejected() {
        let s = small_scheme();
        let p = *s.params();
        let mut g = rng(4);
        let (_, key) = s.keygen(&mut g);
        let mut theta = key.theta().clone();
        let first_one = theta.ones_positions().next().unwrap();
        theta.flip(first_one);
        assert!(s
            .dec_key_from_parts(
                theta,
                key.u().clone(),
                key.d().clone(),
                key.e().clone(),
                key.h_pa().clone(),
                key.h_ec().clone()
            )
            .is_err());
        assert!(s.aux_key_from_parts(BitString::zeros(p.m + 1)).is_err());
        let (aux, key) = s.keygen(&mut g);
        assert!(s.encrypt(&BitString::zeros(p.n + 1), &aux, &key).is_err());
    }

    #[test]
    fn round_trip_decrypt_and_verify() {
        let s = small_scheme();
        let mut g = rng(5);
        for _ in 0..200 {
            let (aux, key) = s.keygen(&mut g);
            let msg = BitString::random(16, &mut g);
            let out = s.decrypt(&key, s.encrypt(&msg, &aux, &key).unwrap(), &mut g).unwrap();
            assert_eq!(out, DecryptOutput { plaintext: msg.clone(), flag: true });
            let cert = delete(s.encrypt(&msg, &aux, &key).unwrap(), &mut g);
            assert_eq!(
                cert.y().restrict(key.hadamard_positions()).unwrap(),
                aux.r().restrict(key.hadamard_positions()).unwrap()
            );
            assert!(s.verify(&aux, &key, &cert).unwrap());
        }
    }

    #[test]
    fn one_flip_per_block_is_corrected() {
        let s = small_scheme();
        let mut g = rng(6);
        for _ in 0..200 {
            let (aux, key) = s.keygen(&mut g);
            let msg = BitString::random(16, &mut g);
            let mut ct = s.encrypt(&msg, &aux, &key).unwrap();
            let comp = key.computational_positions().positions().to_vec();
            // one flip inside every 8-position block of r|_I
            let mut flipped = Vec::new();
            for block in comp.chunks(8) {
                flipped.push(block[g.random_range(0..block.len())]);
            }
            let (mut quantum, classical) = ct.into_parts();
            let mut qubits: Vec<_> = quantum.qubits().to_vec();
            for &i in &flipped {
                qubits[i].flip_value();
            }
            quantum = QuantumRegister::new(qubits);
            ct = Ciphertext::from_parts(quantum, classical);
            let out = s.decrypt(&key, ct, &mut g).unwrap();
            assert!(out.flag);
            assert_eq!(out.plaintext, msg);
        }
    }

    #[test]
    fn classical_part_is_malleable() {
        let s = small_scheme();
        let mut g = rng(8);
        let (aux, key) = s.keygen(&mut g);
        let msg = BitString::random(16, &mut g);
        let delta_c = BitString::ones(16);
        let mut ct = s.encrypt(&msg, &aux, &key).unwrap();
        ct.classical_mut().c.xor_assign(&delta_c).unwrap();
        let out = s.decrypt(&key, ct, &mut g).unwrap();
        assert!(out.flag);
        assert_eq!(out.plaintext, msg.xor(&delta_c).unwrap());
    }

    #[test]
    fn complemented_certificate_fails() {
        let s = small_scheme();
        let mut g = rng(9);
        let (aux, key) = s.keygen(&mut g);
        let mut y = aux.r().clone();
        for i in key.hadamard_positions().positions() {
            y.flip(*i);
        }
        assert!(!s.verify(&aux, &key, &DeletionCertificate::new(y)).unwrap());
    }

    #[test]
    fn delete_is_deterministic_given_seed() {
        let s = small_scheme();
        let mut g = rng(10);
        let (aux, key) = s.keygen(&mut g);
        let ct = s.encrypt(&BitString::zeros(16), &aux, &key).unwrap();
        let bytes = serialize_ciphertext(s.params(), &ct).unwrap();
        let a = delete(deserialize_ciphertext(&bytes).unwrap().1, &mut rng(11));
        let b = delete(deserialize_ciphertext(&bytes).unwrap().1, &mut rng(11));
        assert_eq!(a, b);
    }

    #[test]
    fn ciphertext_format() {
        let s = small_scheme();
        let mut g = rng(12);
        let (aux, key) = s.keygen(&mut g);
        let msg = BitString::random(16, &mut g);
        let ct = s.encrypt(&msg, &aux, &key).unwrap();
        let bytes = serialize_ciphertext(s.params(), &ct).unwrap();
        assert_eq!(&bytes[..4], b"QCD1");
        assert_eq!(bytes[4], 1);
        let field = |i: usize| u32::from_le_bytes(bytes[5 + 4 * i..9 + 4 * i].try_into().unwrap()) as usize;
        let p = s.params();
        assert_eq!([field(0), field(1), field(2), field(3), field(4), field(5)], [p.n, p.m, p.s, p.k, p.tau, p.mu]);
        assert_eq!(f64::from_le_bytes(bytes[29..37].try_into().unwrap()), p.delta);

        let (params, back) = deserialize_ciphertext(&bytes).unwrap();
        assert_eq!(params, *p);
        assert_eq!(back, ct);

        for cut in [0, 3, 4, 20, bytes.len() - 1] {
            assert!(deserialize_ciphertext(&bytes[..cut]).is_err());
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(deserialize_ciphertext(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(deserialize_ciphertext(&bad).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(deserialize_ciphertext(&long).is_err());

        let mut ct = ct;
        ct.quantum_mut().depolarize(0);
        assert!(serialize_ciphertext(s.params(), &ct).is_err());
    }

    #[test]
    fn certificate_format() {
        let cert = DeletionCertificate::new("1011001".parse().unwrap());
        let bytes = serialize_certificate(&cert);
        assert_eq!(&bytes[..5], b"QCDY\x01");
        assert_eq!(deserialize_certificate(&bytes).unwrap(), cert);
        assert!(deserialize_certificate(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn key_file_round_trip() {
        let s = small_scheme();
        let (aux, key) = s.keygen(&mut rng(13));
        let kf = KeyFile {
            scheme: s.clone(),
            aux: Some(aux.clone()),
            dec: Some(key.clone()),
        };
        let text = kf.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["params"]["tau"], 8);
        assert!(v["dec"]["hpa_seed"].is_string());
        assert_eq!(KeyFile::from_json(&text).unwrap(), kf);

        let split = KeyFile {
            scheme: s.clone(),
            aux: None,
            dec: Some(key),
        };
        assert_eq!(KeyFile::from_json(&split.to_json()).unwrap().aux, None);
        assert!(KeyFile::from_json("{\"version\":2}").is_err());
        assert!(KeyFile::from_json("not json").is_err());
    }
}
