//! Command-line front end.
//!
//! Exit codes: 0 success, 1 error, 2 decryption flag 0 or certificate
//! rejected, 3 infeasible parameter plan.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bitvec::BitString;
use crate::bounds::{optimize_nu, plan_params};
use crate::error::{Error, Result};
use crate::games::{estimate_gap, OracleSpec, Strategy};
use crate::hashcode::LinearCode;
use crate::scheme::{
    delete, deserialize_certificate, deserialize_ciphertext, serialize_certificate, serialize_ciphertext,
    AuxKey, DecKey, KeyFile, Scheme, SchemeParams,
};
use crate::SimRng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "certdel", version, about = "Quantum encryption with certified deletion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a key pair and write it as JSON.
    Keygen {
        #[arg(long)]
        params: String,
        #[arg(long)]
        seed: u64,
        /// Key file to write.
        #[arg(long)]
        out: PathBuf,
        /// Write the auxiliary key here instead of into the key file.
        #[arg(long)]
        aux: Option<PathBuf>,
    },
    /// Encrypt a message file (exactly ceil(n/8) bytes).
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        aux: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext; prints {plaintext_hex, flag}.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Also write the plaintext bytes here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a ciphertext in the Hadamard basis and write the certificate.
    Delete {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a deletion certificate; prints {ok}.
    Verify {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        aux: Option<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Plan or evaluate parameters against the deletion bound.
    Params {
        #[command(subcommand)]
        action: ParamsAction,
    },
    /// Estimate the deletion gap of an attack strategy.
    Simulate {
        #[arg(long)]
        params: String,
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact evaluation of a tiny entanglement-based game.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ParamsAction {
    /// Smallest parameters meeting a target: --params n=128,delta=0.02,target=2^-64
    Plan(ReportArgs),
    /// Evaluate the bound for given parameters.
    Eval(ReportArgs),
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    params: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_err(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Parses `2^-64`, `1e-19` or `0.01`.
fn parse_number(text: &str) -> Result<f64> {
    let bad = || Error::InvalidParams(format!("not a number: {text:?}"));
    if let Some((base, exp)) = text.split_once('^') {
        let base: f64 = base.trim().parse().map_err(|_| bad())?;
        let exp: f64 = exp.trim().parse().map_err(|_| bad())?;
        return Ok(base.powf(exp));
    }
    text.trim().parse().map_err(|_| bad())
}

/// `--params` accepts a JSON file, inline JSON, or `key=value` pairs
/// separated by commas.
fn params_map(arg: &str) -> Result<Map<String, Value>> {
    let trimmed = arg.trim();
    let text = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else if Path::new(trimmed).is_file() {
        read_text(Path::new(trimmed))?
    } else {
        let mut map = Map::new();
        for pair in trimmed.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected key=value, got {pair:?}")))?;
            let value = if k.trim() == "code" {
                Value::String(v.trim().to_string())
            } else {
                json!(parse_number(v)?)
            };
            map.insert(k.trim().to_string(), value);
        }
        return Ok(map);
    };
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::Format("params must be a JSON object".into())),
        Err(e) => Err(Error::Format(format!("params: {e}"))),
    }
}

fn get_number(map: &Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(Value::String(s)) => parse_number(s).map(Some),
        Some(other) => Err(Error::InvalidParams(format!("{key} = {other} is not a number"))),
    }
}

fn require_number(map: &Map<String, Value>, key: &str) -> Result<f64> {
    get_number(map, key)?.ok_or_else(|| Error::InvalidParams(format!("missing parameter {key}")))
}

fn require_count(map: &Map<String, Value>, key: &str) -> Result<usize> {
    let v = require_number(map, key)?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::InvalidParams(format!("{key} = {v} is not a count")));
    }
    Ok(v as usize)
}

fn code_from(map: &Map<String, Value>) -> Result<LinearCode> {
    match map.get("code") {
        None => Ok(LinearCode::extended_hamming_8_4()),
        Some(Value::String(name)) => LinearCode::by_name(name),
        Some(other) => Err(Error::InvalidParams(format!("code = {other} is not a name"))),
    }
}

/// Scheme from `n, s, k, tau, delta` (and optionally `m`, `mu`, `code`).
fn scheme_from(arg: &str) -> Result<Scheme> {
    let map = params_map(arg)?;
    let code = code_from(&map)?;
    let params = SchemeParams::new(
        require_count(&map, "n")?,
        require_count(&map, "s")?,
        require_count(&map, "k")?,
        require_count(&map, "tau")?,
        require_number(&map, "delta")?,
        &code,
    )?;
    for (key, derived) in [("m", params.m), ("mu", params.mu)] {
        if let Some(given) = get_number(&map, key)? {
            if given != derived as f64 {
                return Err(Error::InvalidParams(format!("{key} = {given} but the other parameters give {derived}")));
            }
        }
    }
    Scheme::new(params, code)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    if let Some(path) = out {
        write_bytes(path, text.as_bytes())?;
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::Format(format!("stdout: {e}")))
}

fn load_keys(key: &Path, aux: Option<&Path>) -> Result<(Scheme, Option<AuxKey>, Option<DecKey>)> {
    let kf = KeyFile::from_json(&read_text(key)?)?;
    let mut aux_key = kf.aux;
    if let Some(path) = aux {
        let af = KeyFile::from_json(&read_text(path)?)?;
        if af.scheme != kf.scheme {
            return Err(Error::InvalidParams("auxiliary key file is for different parameters".into()));
        }
        aux_key = af.aux;
    }
    Ok((kf.scheme, aux_key, kf.dec))
}

fn need<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Format(format!("key file has no {what} section")))
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Keygen { params, seed, out, aux } => {
            let scheme = scheme_from(&params)?;
            let (aux_key, dec) = scheme.keygen(&mut SimRng::seed_from_u64(seed));
            let (in_key, separate) = match aux {
                None => (Some(aux_key), None),
                Some(path) => (None, Some((path, aux_key))),
            };
            let kf = KeyFile {
                scheme: scheme.clone(),
                aux: in_key,
                dec: Some(dec),
            };
            write_bytes(&out, kf.to_json().as_bytes())?;
            if let Some((path, aux_key)) = separate {
                let af = KeyFile {
                    scheme: scheme.clone(),
                    aux: Some(aux_key),
                    dec: None,
                };
                write_bytes(&path, af.to_json().as_bytes())?;
            }
            emit(&json!({ "params": scheme.params() }), None, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Encrypt { key, aux, input, out } => {
            let (scheme, aux_key, dec) = load_keys(&key, aux.as_deref())?;
            let (aux_key, dec) = (need(aux_key, "aux")?, need(dec, "dec")?);
            let msg = BitString::from_bytes(scheme.params().n, &read_bytes(&input)?)?;
            let ct = scheme.encrypt(&msg, &aux_key, &dec)?;
            write_bytes(&out, &serialize_ciphertext(scheme.params(), &ct)?)?;
            Ok(EXIT_OK)
        }
        Command::Decrypt { key, input, seed, out } => {
            let kf = KeyFile::from_json(&read_text(&key)?)?;
            let dec = need(kf.dec, "dec")?;
            let (params, ct) = deserialize_ciphertext(&read_bytes(&input)?)?;
            if &params != kf.scheme.params() {
                return Err(Error::InvalidParams("ciphertext and key have different parameters".into()));
            }
            let res = kf.scheme.decrypt(&dec, ct, &mut SimRng::seed_from_u64(seed))?;
            if let Some(path) = out {
                write_bytes(&path, &res.plaintext.to_bytes())?;
            }
            emit(
                &json!({ "plaintext_hex": res.plaintext.to_hex(), "flag": u8::from(res.flag) }),
                None,
                stdout,
            )?;
            Ok(if res.flag { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Delete { input, seed, out } => {
            let (_, ct) = deserialize_ciphertext(&read_bytes(&input)?)?;
            let cert = delete(ct, &mut SimRng::seed_from_u64(seed));
            write_bytes(&out, &serialize_certificate(&cert))?;
            Ok(EXIT_OK)
        }
        Command::Verify { key, aux, input } => {
            let (scheme, aux_key, dec) = load_keys(&key, aux.as_deref())?;
            let (aux_key, dec) = (need(aux_key, "aux")?, need(dec, "dec")?);
            let cert = deserialize_certificate(&read_bytes(&input)?)?;
            let ok = scheme.verify(&aux_key, &dec, &cert)?;
            emit(&json!({ "ok": u8::from(ok) }), None, stdout)?;
            Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Params { action } => match action {
            ParamsAction::Plan(args) => {
                let map = params_map(&args.params)?;
                let code = code_from(&map)?;
                let plan = plan_params(
                    require_count(&map, "n")?,
                    require_number(&map, "delta")?,
                    require_number(&map, "target")?,
                    &code,
                )?;
                emit(&plan, args.out.as_deref(), stdout)?;
                Ok(EXIT_OK)
            }
            ParamsAction::Eval(args) => {
                let scheme = scheme_from(&args.params)?;
                let p = scheme.params();
                let best = optimize_nu(p.s, p.k, p.m, p.n, p.delta)?;
                let report = json!({
                    "eta": best.report.eta,
                    "g": best.report.g,
                    "epsilon": best.report.epsilon,
                    "nu_star": best.nu_star,
                    "params": p,
                });
                emit(&report, args.out.as_deref(), stdout)?;
                Ok(EXIT_OK)
            }
        },
        Command::Simulate {
            params,
            strategy,
            trials,
            seed,
            out,
        } => {
            let scheme = scheme_from(&params)?;
            let strategy = Strategy::parse(&strategy)?;
            let report = estimate_gap(&scheme, &strategy, trials, seed)?;
            emit(&report, out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Oracle { input, out } => {
            let spec: OracleSpec = serde_json::from_str(&read_text(&input)?)
                .map_err(|e| Error::Format(format!("oracle spec: {e}")))?;
            emit(&spec.run()?, out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit
/// code. Reports go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(Error::Infeasible(msg)) => {
            let _ = writeln!(stderr, "error: infeasible: {msg}");
            EXIT_INFEASIBLE
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
