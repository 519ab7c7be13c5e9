//! Closed-form security quantities and the parameter planner.
//!
//! Entropies are in bits; the sampling bound uses the natural exponential.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hashcode::LinearCode;
use crate::scheme::SchemeParams;

/// Step of the grid over which `ν` is optimized.
pub const NU_STEP: f64 = 1e-3;

/// Largest `s` the planner will consider before declaring a target infeasible.
pub const PLAN_MAX_S: usize = 1 << 24;

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy of {x}")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

fn check_sizes(s: usize, k: usize, m: usize) -> Result<()> {
    if m != s + k || k == 0 || s == 0 {
        return Err(Error::InvalidParams(format!(
            "need m = s + k with s, k >= 1, got s={s} k={k} m={m}"
        )));
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(Error::Domain(format!("nu = {nu}")));
    }
    Ok(())
}

/// `ε(ν) = exp(−s k² ν² / (m (k+1)))`.
pub fn epsilon_nu(s: usize, k: usize, m: usize, nu: f64) -> Result<f64> {
    check_sizes(s, k, m)?;
    check_nu(nu)?;
    let (s, k, m) = (s as f64, k as f64, m as f64);
    Ok((-s * k * k * nu * nu / (m * (k + 1.0))).exp())
}

/// Probability bound for the sampling event: `exp(−2 s k² ν² / (m (k+1)))`.
pub fn serfling_bound(s: usize, k: usize, m: usize, nu: f64) -> Result<f64> {
    check_sizes(s, k, m)?;
    check_nu(nu)?;
    let (s, k, m) = (s as f64, k as f64, m as f64);
    Ok((-2.0 * s * k * k * nu * nu / (m * (k + 1.0))).exp())
}

/// Arguments of [`eta`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub s: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub delta: f64,
    pub nu: f64,
}

impl BoundInputs {
    pub fn from_params(params: &SchemeParams, nu: f64) -> BoundInputs {
        BoundInputs {
            s: params.s,
            k: params.k,
            m: params.m,
            n: params.n,
            delta: params.delta,
            nu,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaReport {
    pub eta: f64,
    /// `g(ν) = s(1 − h(δ+ν)) − n`.
    pub g: f64,
    pub epsilon: f64,
}

/// `η = 2(½·√(2^{−g(ν)}) + 2ε(ν))`.
pub fn eta(inp: &BoundInputs) -> Result<EtaReport> {
    check_sizes(inp.s, inp.k, inp.m)?;
    let tol = 1e-12;
    if !(inp.delta >= 0.0 && inp.nu > 0.0 && inp.delta + inp.nu <= 0.5 + tol) {
        return Err(Error::Domain(format!(
            "need nu in (0, 1/2 - delta], got delta={} nu={}",
            inp.delta, inp.nu
        )));
    }
    let h = binary_entropy((inp.delta + inp.nu).min(0.5))?;
    let g = inp.s as f64 * (1.0 - h) - inp.n as f64;
    let epsilon = epsilon_nu(inp.s, inp.k, inp.m, inp.nu)?;
    let eta = 2.0 * (0.5 * (-g / 2.0).exp2() + 2.0 * epsilon);
    Ok(EtaReport { eta, g, epsilon })
}

/// `2^{−τ}`.
pub fn robustness_bound(tau: u32) -> f64 {
    (-(tau as f64)).exp2()
}

/// Grid points `i·10⁻³` in `(0, 1/2 − δ]`.
pub fn nu_grid(delta: f64) -> Result<Vec<f64>> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} not in [0, 1/2)")));
    }
    let steps = ((0.5 - delta) / NU_STEP + 1e-9).floor() as usize;
    Ok((1..=steps).map(|i| i as f64 * NU_STEP).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizedEta {
    pub nu_star: f64,
    #[serde(flatten)]
    pub report: EtaReport,
}

/// Minimizes `η` over the `ν` grid (first minimizer wins ties).
pub fn optimize_nu(s: usize, k: usize, m: usize, n: usize, delta: f64) -> Result<OptimizedEta> {
    let mut best: Option<OptimizedEta> = None;
    for nu in nu_grid(delta)? {
        let report = eta(&BoundInputs {
            s,
            k,
            m,
            n,
            delta,
            nu,
        })?;
        if best.is_none_or(|b| report.eta < b.report.eta) {
            best = Some(OptimizedEta { nu_star: nu, report });
        }
    }
    best.ok_or_else(|| Error::Domain(format!("empty nu grid for delta = {delta}")))
}

/// Planner output.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub params: SchemeParams,
    pub nu_star: f64,
    pub eta: f64,
    pub g: f64,
    pub epsilon: f64,
}

/// Smallest `s` (a multiple of the code block), then smallest `k ≤ s`, such
/// that the grid-optimized `η` is at most `target_eta`; `τ` is the smallest
/// value with `2^{−τ} ≤ target_eta`.
///
/// The optimized `η` decreases in both `s` and `k`, so feasibility at
/// `k = s` is monotone in `s` and both searches can bisect.
pub fn plan_params(n: usize, delta: f64, target_eta: f64, code: &LinearCode) -> Result<Plan> {
    if !(target_eta > 0.0 && target_eta < 1.0) {
        return Err(Error::Domain(format!("target eta {target_eta} not in (0, 1)")));
    }
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    nu_grid(delta)?;
    let block = code.block_in();
    let eta_at = |s: usize, k: usize| optimize_nu(s, k, s + k, n, delta).map(|o| o.report.eta);
    let feasible_s = |blocks: usize| -> Result<bool> {
        let s = blocks * block;
        Ok(eta_at(s, s)? <= target_eta)
    };

    // gallop then bisect on the number of blocks
    let max_blocks = PLAN_MAX_S / block;
    let mut hi = 1usize;
    while !feasible_s(hi)? {
        if hi >= max_blocks {
            return Err(Error::Infeasible(format!(
                "no s <= {PLAN_MAX_S} reaches eta <= {target_eta:e}"
            )));
        }
        hi = (hi * 2).min(max_blocks);
    }
    let mut lo = hi / 2; // infeasible, or 0
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible_s(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = hi * block;

    let (mut klo, mut khi) = (0usize, s);
    while khi - klo > 1 {
        let mid = klo + (khi - klo) / 2;
        if eta_at(s, mid)? <= target_eta {
            khi = mid;
        } else {
            klo = mid;
        }
    }
    let k = khi;
    let best = optimize_nu(s, k, s + k, n, delta)?;
    let tau = (-target_eta.log2()).ceil().max(1.0) as usize;
    let params = SchemeParams::new(n, s, k, tau, delta, code)?;
    Ok(Plan {
        params,
        nu_star: best.nu_star,
        eta: best.report.eta,
        g: best.report.g,
        epsilon: best.report.epsilon,
    })
}
