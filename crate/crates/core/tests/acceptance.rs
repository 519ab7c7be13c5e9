//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Each criterion also has a wall-clock budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use certdel::bitvec::BitString;
use certdel::bounds::{binary_entropy, epsilon_nu, serfling_bound};
use certdel::games::{
    epr_uncertainty, estimate_decision, estimate_gap, exact_ciphertext_ensemble, exact_observable_distribution,
    run_arm, run_epr_oracle, serfling_monte_carlo, weight_k_strings, EprInstance, Strategy,
};
use certdel::hashcode::LinearCode;
use certdel::qsim::{computational_povm, hadamard_povm, povm_overlap, Basis, NoiseModel};
use certdel::scheme::{delete, Scheme, SchemeParams};
use certdel::SimRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn scheme(n: usize, s: usize, k: usize, tau: usize, delta: f64, code: LinearCode) -> Scheme {
    Scheme::new(SchemeParams::new(n, s, k, tau, delta, &code).expect("valid params"), code).expect("valid scheme")
}

fn base_scheme(tau: usize) -> Scheme {
    scheme(128, 384, 128, tau, 0.05, LinearCode::extended_hamming_8_4())
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn correctness() -> Outcome {
    let sc = base_scheme(32);
    let mut rng = SimRng::seed_from_u64(1001);
    let trials = 1000;
    let mut failures = 0;
    for _ in 0..trials {
        let (aux, key) = sc.keygen(&mut rng);
        let msg = BitString::random(128, &mut rng);
        let ct = sc.encrypt(&msg, &aux, &key).map_err(|e| e.to_string())?;
        let out = sc.decrypt(&key, ct, &mut rng).map_err(|e| e.to_string())?;
        failures += usize::from(!(out.flag && out.plaintext == msg));
    }
    check(failures == 0, format!("{} of {trials} decrypted to (msg, 1)", trials - failures))
}

fn verification() -> Outcome {
    let sc = base_scheme(32);
    let mut rng = SimRng::seed_from_u64(1002);
    let trials = 1000;
    let mut accepted = 0;
    for _ in 0..trials {
        let (aux, key) = sc.keygen(&mut rng);
        let msg = BitString::random(128, &mut rng);
        let cert = delete(sc.encrypt(&msg, &aux, &key).map_err(|e| e.to_string())?, &mut rng);
        accepted += usize::from(sc.verify(&aux, &key, &cert).map_err(|e| e.to_string())?);
    }
    check(accepted == trials, format!("{accepted}/{trials} honest certificates accepted"))
}

fn robustness() -> Outcome {
    let sc = base_scheme(16);
    let noise = NoiseModel::new(0.25).map_err(|e| e.to_string())?;
    let mut rng = SimRng::seed_from_u64(1003);
    let trials = 100_000u32;
    let mut bad = 0u32;
    let mut flagged_ok = 0u32;
    for _ in 0..trials {
        let (aux, key) = sc.keygen(&mut rng);
        let msg = BitString::random(128, &mut rng);
        let mut ct = sc.encrypt(&msg, &aux, &key).map_err(|e| e.to_string())?;
        ct.apply_channel(&noise, &mut rng);
        let out = sc.decrypt(&key, ct, &mut rng).map_err(|e| e.to_string())?;
        flagged_ok += u32::from(out.flag);
        bad += u32::from(out.flag && out.plaintext != msg);
    }
    let rate = f64::from(bad) / f64::from(trials);
    let eps = (-16f64).exp2();
    let limit = eps + 3.0 * (eps / f64::from(trials)).sqrt();
    check(
        rate <= limit,
        format!("{bad} undetected errors in {trials} (rate {rate:.2e} <= {limit:.2e}; {flagged_ok} accepted)"),
    )
}

fn indistinguishability() -> Outcome {
    let sc = scheme(1, 2, 2, 1, 0.25, LinearCode::repetition(2).map_err(|e| e.to_string())?);
    let zero = BitString::zeros(1);
    let one = BitString::ones(1);
    let e0 = exact_ciphertext_ensemble(&sc, &zero).map_err(|e| e.to_string())?;
    let e1 = exact_ciphertext_ensemble(&sc, &one).map_err(|e| e.to_string())?;
    let diff = e0.max_difference(&e1);
    let mut patterns_equal = 0;
    for pv in 0u64..16 {
        let bases: Vec<Basis> = (0..4).map(|i| Basis::from_bit(pv >> i & 1 == 1)).collect();
        let a = exact_observable_distribution(&sc, &zero, &bases).map_err(|e| e.to_string())?;
        let b = exact_observable_distribution(&sc, &one, &bases).map_err(|e| e.to_string())?;
        patterns_equal += usize::from(a == b);
    }
    check(
        e0 == e1 && diff <= 1e-12 && patterns_equal == 16,
        format!(
            "{} key tuples; integer ensembles equal: {}; max entry difference {diff:e}; {patterns_equal}/16 measurement patterns identical",
            e0.count,
            e0 == e1
        ),
    )
}

fn deletion_gap() -> Outcome {
    let sc = base_scheme(32);
    let mut strategies = vec![Strategy::Honest { output: true }, Strategy::FullComputational];
    strategies.extend((1..=9).map(|i| Strategy::Partial { fraction: f64::from(i) / 10.0 }));
    strategies.push(Strategy::ForgingNonMeasurer);
    let trials = 100_000;
    let mut lines = Vec::new();
    let mut all_ok = true;
    let mut eta = f64::NAN;
    let mut width = f64::NAN;
    for (i, strategy) in strategies.iter().enumerate() {
        let r = estimate_gap(&sc, strategy, trials, 5000 + i as u64).map_err(|e| e.to_string())?;
        all_ok &= r.gap <= r.eta + r.gap_width;
        (eta, width) = (r.eta, r.gap_width);
        lines.push(format!(
            "{}: gap {:.4} (accepted {}/{}, p0 {:.4}, p1 {:.4})",
            r.strategy, r.gap, r.arms[0].accepted, r.arms[0].trials, r.p0, r.p1
        ));
    }
    check(all_ok, format!("eta {eta:.3}, width {width:.4}; {}", lines.join("; ")))
}

fn trade_off_wall() -> Outcome {
    let sc = base_scheme(32);
    let trials = 1_000_000;
    let counts = run_arm(&sc, &Strategy::FullComputational, false, trials, 6000).map_err(|e| e.to_string())?;
    check(
        counts.accepted == 0,
        format!("{} of {trials} fabricated certificates accepted", counts.accepted),
    )
}

fn noise_tolerance() -> Outcome {
    let sc = scheme(128, 384, 256, 32, 0.05, LinearCode::extended_hamming_8_4());
    let noise = NoiseModel::new(0.02).map_err(|e| e.to_string())?;
    let mut rng = SimRng::seed_from_u64(1007);
    let trials = 10_000;
    let mut accepted = 0;
    let mut correctable = 0;
    let mut correctable_failures = 0;
    for _ in 0..trials {
        let (aux, key) = sc.keygen(&mut rng);
        let msg = BitString::random(128, &mut rng);

        let mut ct = sc.encrypt(&msg, &aux, &key).map_err(|e| e.to_string())?;
        ct.apply_channel(&noise, &mut rng);
        let cert = delete(ct, &mut rng);
        accepted += usize::from(sc.verify(&aux, &key, &cert).map_err(|e| e.to_string())?);

        let mut ct = sc.encrypt(&msg, &aux, &key).map_err(|e| e.to_string())?;
        let flips = ct.apply_channel(&noise, &mut rng);
        let on_i = flips.restrict(key.computational_positions()).map_err(|e| e.to_string())?;
        let within = (0..384 / 8).all(|b| on_i.extract_u64(8 * b, 8).count_ones() <= 1);
        let out = sc.decrypt(&key, ct, &mut rng).map_err(|e| e.to_string())?;
        if within {
            correctable += 1;
            correctable_failures += usize::from(!(out.flag && out.plaintext == msg));
        }
    }
    let rate = accepted as f64 / trials as f64;
    check(
        rate >= 0.99 && correctable_failures == 0,
        format!(
            "verify pass rate {rate:.4} (exact 0.9978); {correctable} trials with <= 1 flip per block, {correctable_failures} decryption failures among them"
        ),
    )
}

fn formula_layer() -> Outcome {
    let mut rng = SimRng::seed_from_u64(1008);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = rng.random_range(1..5000);
        let k = rng.random_range(1..5000);
        let nu = rng.random_range(0.0..0.5);
        let e = epsilon_nu(s, k, s + k, nu).map_err(|e| e.to_string())?;
        let b = serfling_bound(s, k, s + k, nu).map_err(|e| e.to_string())?;
        worst = worst.max((e * e - b).abs());
    }
    let h = binary_entropy(0.25).map_err(|e| e.to_string())?;
    let c = povm_overlap(&computational_povm(), &hadamard_povm()).map_err(|e| e.to_string())?;
    check(
        worst <= 1e-12 && (h - 0.811_278).abs() <= 1e-6 && (h - 0.811_278_124_459_132_9).abs() <= 1e-9 && (c - 0.5).abs() <= 1e-12,
        format!("max |eps^2 - serfling| {worst:e}; h(0.25) = {h:.12}; overlap = {c:.15}"),
    )
}

fn serfling_mc() -> Outcome {
    let mut rng = SimRng::seed_from_u64(1009);
    let mut lines = Vec::new();
    let mut all_ok = true;
    for m in [64, 128] {
        for nu in [0.05, 0.1, 0.15] {
            let pt = serfling_monte_carlo(m, nu, 0.05, 100_000, &mut rng).map_err(|e| e.to_string())?;
            all_ok &= pt.empirical <= pt.bound;
            lines.push(format!(
                "m={m} nu={nu}: w={} empirical {:.4} <= bound {:.4}",
                pt.weight, pt.empirical, pt.bound
            ));
        }
    }
    check(all_ok, lines.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let tiny = |s: usize, k: usize, delta: f64, code: LinearCode| scheme(1, s, k, 1, delta, code);
    let instances = [
        tiny(2, 1, 0.45, LinearCode::repetition(2).map_err(|e| e.to_string())?),
        tiny(1, 1, 0.45, LinearCode::trivial()),
        tiny(1, 2, 0.3, LinearCode::trivial()),
    ];
    // uncertainty relation over every pattern and basis choice with m <= 3
    let mut relations = 0;
    let mut violations = 0;
    for m in 1..=3usize {
        for pv in 0u64..1 << m {
            let bases: Vec<Basis> = (0..m).map(|i| Basis::from_bit(pv >> i & 1 == 1)).collect();
            let inst = EprInstance::measure_pattern(&bases).map_err(|e| e.to_string())?;
            for k in 0..=m {
                for theta in weight_k_strings(m, k).map_err(|e| e.to_string())? {
                    let r = epr_uncertainty(&inst, &theta).map_err(|e| e.to_string())?;
                    relations += 1;
                    violations += usize::from(!r.holds());
                }
            }
        }
    }
    // sampled Game 1 against exact Game 2
    let trials = 100_000;
    let mut worst_tv: f64 = 0.0;
    let mut comparisons = 0;
    for (idx, sc) in instances.iter().enumerate() {
        let m = sc.params().m;
        for pv in 0u64..1 << m {
            let bases: Vec<Basis> = (0..m).map(|i| Basis::from_bit(pv >> i & 1 == 1)).collect();
            let inst = EprInstance::measure_pattern(&bases).map_err(|e| e.to_string())?;
            let oracle = run_epr_oracle(sc, &inst, &estimate_decision).map_err(|e| e.to_string())?;
            let strategy = Strategy::Pattern { bases };
            for b in [false, true] {
                let seed = 7000 + 100 * idx as u64 + pv;
                let counts = run_arm(sc, &strategy, b, trials, seed).map_err(|e| e.to_string())?;
                worst_tv = worst_tv.max(oracle.tv_distance(b, &counts));
                comparisons += 1;
            }
        }
    }
    check(
        violations == 0 && worst_tv <= 0.02,
        format!(
            "{relations} uncertainty relations checked, {violations} violated; {comparisons} game arms, worst TV {worst_tv:.4}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "correctness", Duration::from_secs(5), correctness),
        (2, "verification correctness", Duration::from_secs(5), verification),
        (3, "robustness", Duration::from_secs(60), robustness),
        (4, "exact ciphertext indistinguishability", Duration::from_secs(60), indistinguishability),
        (5, "certified-deletion gap", Duration::from_secs(600), deletion_gap),
        (6, "trade-off wall", Duration::from_secs(60), trade_off_wall),
        (7, "noise tolerance", Duration::from_secs(60), noise_tolerance),
        (8, "formula layer", Duration::from_secs(1), formula_layer),
        (9, "sampling bound Monte Carlo", Duration::from_secs(60), serfling_mc),
        (10, "oracle equivalence and uncertainty relation", Duration::from_secs(120), oracle_equivalence),
    ];
    let filter: Option<u32> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if filter.is_some_and(|only| only != id) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let (status, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over budget")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} criterion {id:>2} {name}: {detail} [{:.2} s / {} s]",
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
