//! Acceptance run: evaluates every criterion, prints one pass/fail line each and
//! exits non-zero if any criterion fails.

mod common;

use std::process::Command as Process;
use std::time::{Duration, Instant};

use aiet::dimension::{self, big_g_invariant, big_h_invariant, pressure, Grid};
use aiet::exec::Execution;
use aiet::holder::{self, enumerate_cycles, Weight};
use aiet::markov::{birkhoff_information, empirical_local_dimension, transition_matrix, Plan, Side};
use aiet::pf;
use aiet::spectral::SlopeClass;
use common::*;

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(started: Instant, budget: Duration, detail: String, ok: bool) -> Outcome {
    let elapsed = started.elapsed();
    check(ok && elapsed < budget, format!("{detail}; {:.2} s (budget {} s)", elapsed.as_secs_f64(), budget.as_secs()))
}

fn substitution_vs_simulation() -> Outcome {
    let started = Instant::now();
    let loops = oracle_loops();
    let failing: Vec<String> = loops
        .iter()
        .filter(|lp| !substitution_oracle(lp).ok())
        .map(|lp| format!("{} {}", lp.perm().display_rows(), lp.word()))
        .collect();
    let n = loops.len();
    within_time(started, Duration::from_secs(10), format!("{n} loops, mismatches {failing:?}"), failing.is_empty() && n > 0)
}

fn perron_frobenius_residuals() -> Outcome {
    let mut systems: Vec<_> = FIXTURES.iter().map(|n| load(n).sys).collect();
    for lp in primitive_loops(2, 6).into_iter().chain(primitive_loops(3, 6)) {
        systems.push(aiet::rauzy::build_self_similar(&lp).expect("primitive loop"));
    }
    let (mut worst_res, mut worst_norm) = (0.0f64, 0.0f64);
    for sys in &systems {
        let lambda = sys.lambda();
        let lm = pf::vec_mat(lambda, sys.matrix());
        let r = sys.rho_t().exp();
        let num = lm.iter().zip(lambda).map(|(a, b)| (a - r * b).abs()).fold(0.0, f64::max);
        let den = lambda.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        worst_res = worst_res.max(num / den);
        worst_norm = worst_norm.max((pf::dot(lambda, sys.theta()) - 1.0).abs());
    }
    check(
        worst_res < 1e-10 && worst_norm <= 1e-12,
        format!("{} systems, max residual {worst_res:.2e}, max |<λ,θ> - 1| {worst_norm:.2e}", systems.len()),
    )
}

fn zero_slope_degeneracy() -> Outcome {
    let mut worst = 0.0f64;
    for name in ["golden", "d3_central", "d4_central", "d4_unstable"] {
        let mut p = load(name);
        p.omega = vec![0.0; p.sys.dim()];
        let decomp = p.decompose().map_err(|e| e.to_string())?;
        if decomp.class != SlopeClass::Zero {
            return Err(format!("{name}: zero slope classified as {}", decomp.class.name()));
        }
        let r = dimension::dimension_report(&p.sys, &decomp).map_err(|e| e.to_string())?;
        let (_, zx) = holder::zeta_xi_for(&p.sys, &decomp).map_err(|e| e.to_string())?;
        let rho = p.sys.rho_t();
        for x in [r.g.unwrap(), r.h.unwrap(), zx.zeta.value, zx.xi.value] {
            worst = worst.max((x - rho).abs());
        }
        for x in [r.dim_invariant.finite().unwrap(), r.dim_conformal.finite().unwrap()] {
            worst = worst.max((x - 1.0).abs());
        }
    }
    check(worst < 1e-10, format!("max deviation {worst:.2e}"))
}

fn cross_formula_identity() -> Outcome {
    let p = load("d4_central");
    let omega = &p.omega;
    let (rho0, slope0) = pressure(&p.sys, omega, 0.0).map_err(|e| e.to_string())?;
    let (mut dg, mut dh) = (0.0f64, 0.0f64);
    for t in [-2.0, -1.0, 0.5, 1.0, 2.0] {
        let scaled: Vec<f64> = omega.iter().map(|x| t * x).collect();
        let g = big_g_invariant(&p.sys, &scaled).map_err(|e| e.to_string())?;
        let h = big_h_invariant(&p.sys, &scaled).map_err(|e| e.to_string())?;
        let (rho_t, slope_t) = pressure(&p.sys, omega, t).map_err(|e| e.to_string())?;
        dg = dg.max((p.sys.rho_t() / g - rho0 / (rho_t - t * slope0)).abs());
        dh = dh.max((h - (rho_t - t * slope_t)).abs());
    }
    check(dg < 1e-8 && dh < 1e-8, format!("max |Δ dim_μ| {dg:.2e}, max |Δ H| {dh:.2e}"))
}

fn differential_relation() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for name in CENTRAL {
        let p = load(name);
        let rho_t = p.sys.rho_t();
        let scaled = |t: f64| -> Vec<f64> { p.omega.iter().map(|x| t * x).collect() };
        let inv_t_dim_mu = |t: f64| -> f64 { big_g_invariant(&p.sys, &scaled(t)).unwrap() / (t * rho_t) };
        let h = 1e-4;
        for t in [0.5, 1.0, 2.0] {
            let derivative = (inv_t_dim_mu(t + h) - inv_t_dim_mu(t - h)) / (2.0 * h);
            let dim_nu = big_h_invariant(&p.sys, &scaled(t)).unwrap() / rho_t;
            worst = worst.max((derivative + dim_nu / (t * t)).abs());
        }
    }
    within_time(started, Duration::from_secs(5), format!("max residual {worst:.2e}"), worst < 1e-5)
}

fn ordering_chain() -> Outcome {
    let mut min_gap = f64::INFINITY;
    for name in CENTRAL {
        let (p, decomp) = load_decomposed(name);
        let r = dimension::dimension_report(&p.sys, &decomp).map_err(|e| e.to_string())?;
        let (_, zx) = holder::zeta_xi_for(&p.sys, &decomp).map_err(|e| e.to_string())?;
        let chain = [zx.xi.value, r.h.unwrap(), p.sys.rho_t(), r.g.unwrap(), zx.zeta.value];
        for w in chain.windows(2) {
            min_gap = min_gap.min(w[1] - w[0]);
        }
    }
    let mut worst_eq = 0.0f64;
    for name in NO_CENTRAL {
        let (p, decomp) = load_decomposed(name);
        let r = dimension::dimension_report(&p.sys, &decomp).map_err(|e| e.to_string())?;
        let (_, zx) = holder::zeta_xi_for(&p.sys, &decomp).map_err(|e| e.to_string())?;
        for x in [zx.xi.value, r.h.unwrap(), r.g.unwrap(), zx.zeta.value] {
            worst_eq = worst_eq.max((x - p.sys.rho_t()).abs());
        }
    }
    check(min_gap > 1e-9 && worst_eq < 1e-10, format!("smallest central gap {min_gap:.3e}, largest deviation without central part {worst_eq:.2e}"))
}

fn karp_equals_enumeration() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut graphs = 0;
    for name in NOT_UNSTABLE {
        let (p, decomp) = load_decomposed(name);
        let (g, zx) = holder::zeta_xi_for(&p.sys, &decomp).map_err(|e| e.to_string())?;
        if g.len() > 60 {
            return Err(format!("{name}: {} vertices", g.len()));
        }
        let e = enumerate_cycles(&g, 100_000_000).map_err(|e| e.to_string())?;
        if !e.complete {
            return Err(format!("{name}: enumeration truncated"));
        }
        let karp_min = holder::max_mean_cycle(&g, Weight::Plus).map_err(|e| e.to_string())?;
        worst = worst.max((e.max.value - zx.zeta.value).abs()).max((e.min.value - zx.xi.value).abs());
        worst = worst.max((e.min.value + karp_min.value).abs());
        graphs += 1;
    }
    within_time(started, Duration::from_secs(5), format!("{graphs} graphs, max disagreement {worst:.2e}"), worst < 1e-12)
}

fn markov_structure() -> Outcome {
    let (mut row_err, mut stat_err) = (0.0f64, 0.0f64);
    let mut squares_positive = true;
    let mut count = 0;
    for name in NOT_UNSTABLE {
        let (p, decomp) = load_decomposed(name);
        let omega_c = dimension::effective_central(&decomp);
        for side in [Side::Invariant, Side::Conformal] {
            let t = transition_matrix(&p.sys, &omega_c, side).map_err(|e| e.to_string())?;
            let m = t.dense();
            let n = m.len();
            for row in &m {
                row_err = row_err.max((row.iter().sum::<f64>() - 1.0).abs());
            }
            let square: Vec<Vec<f64>> =
                (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| m[i][k] * m[k][j]).sum()).collect()).collect();
            squares_positive &= square.iter().flatten().all(|&x| x > 0.0);
            let pi = t.stationary();
            let pim = pf::vec_mat(pi, &m);
            stat_err = stat_err.max(pim.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            count += 1;
        }
    }
    check(
        row_err < 1e-12 && squares_positive && stat_err < 1e-10,
        format!("{count} chains, max row-sum error {row_err:.2e}, squares positive {squares_positive}, max |πM - π| {stat_err:.2e}"),
    )
}

fn monte_carlo_oracle() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in CENTRAL {
        let (p, decomp) = load_decomposed(name);
        for side in [Side::Invariant, Side::Conformal] {
            let started = Instant::now();
            let e = birkhoff_information(&p.sys, &decomp, side, 42, Plan::new(1_000_000), Execution::default())
                .map_err(|e| e.to_string())?;
            let exact = match side {
                Side::Invariant => dimension::big_g(&p.sys, &decomp),
                Side::Conformal => dimension::big_h(&p.sys, &decomp),
            }
            .map_err(|e| e.to_string())?;
            let z = (e.estimate - exact) / e.stderr;
            let elapsed = started.elapsed();
            ok &= z.abs() < 3.0 && elapsed < Duration::from_secs(30);
            lines.push(format!("{name}/{} z={z:+.2} {:.2}s", side.name(), elapsed.as_secs_f64()));
        }
    }
    check(ok, lines.join(", "))
}

fn monotonicity_and_asymptotics() -> Outcome {
    let grid = Grid { min: 0.0, max: 10.0, steps: 100 };
    let mut ok = true;
    let mut notes = Vec::new();
    for name in CENTRAL {
        let p = load(name);
        let rho_t = p.sys.rho_t();
        let omega_c = dimension::effective_central(&p.decompose().map_err(|e| e.to_string())?);
        let dims = |t: f64| -> (f64, f64) {
            let scaled: Vec<f64> = omega_c.iter().map(|x| t * x).collect();
            (rho_t / big_g_invariant(&p.sys, &scaled).unwrap(), big_h_invariant(&p.sys, &scaled).unwrap() / rho_t)
        };
        let values: Vec<(f64, f64)> = grid.points().into_iter().map(dims).collect();
        let mu_ok = values.windows(2).all(|w| w[1].0 <= w[0].0 + 1e-10);
        let nu_ok = values.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-10);
        let d1 = dims(1.0).0;
        let bounds_ok = [1.0, 2.0, 5.0, 10.0].iter().all(|&t| {
            let d = dims(t).0;
            let (lower, upper) = (d1 / t, 1.0 / ((1.0 / d1 - 1.0) * t + 1.0));
            lower <= d + 1e-12 && d <= upper + 1e-12
        });
        let sweep = dimension::t_sweep(&p.sys, &omega_c, &grid, dimension::INVARIANCE_TOL, Execution::default())
            .map_err(|e| e.to_string())?;
        let sweep_ok = sweep.mu_decreasing_on_positive && sweep.nu_decreasing_on_positive && sweep.bounds_hold;
        ok &= mu_ok && nu_ok && bounds_ok && sweep_ok;
        notes.push(format!("{name}: μ {mu_ok} ν {nu_ok} bounds {bounds_ok} sweep {sweep_ok}"));
    }
    check(ok, notes.join(", "))
}

fn unstable_divergence() -> Outcome {
    let (p, decomp) = load_decomposed("d4_unstable");
    if decomp.class != SlopeClass::Unstable || p.cert.g != 2 {
        return Err(format!("fixture is {} with genus {}", decomp.class.name(), p.cert.g));
    }
    let trace = empirical_local_dimension(&p.sys, &p.spectrum, &decomp, 42, 200).map_err(|e| e.to_string())?;
    let (r50, r200) = (trace.ratio[49], trace.ratio[199]);
    let (early, late) = (trace.mean_increment(50, 100), trace.mean_increment(150, 200));
    check(
        r200 < 0.5 * r50 && late > 2.0 * early,
        format!("ratio_50 {r50:.3e}, ratio_200 {r200:.3e}, increments {early:.3e} -> {late:.3e}"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_aiet");
    let dir = std::env::temp_dir().join(format!("aiet-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut runs = 0;
    let mut differing = Vec::new();
    for name in FIXTURES {
        for command in ["classify", "dims", "holder", "sweep", "simulate"] {
            let mut outputs = Vec::new();
            for rep in 0..2 {
                let out = dir.join(format!("{name}-{command}-{rep}"));
                let status = Process::new(bin)
                    .args([command, fixture_path(name).to_str().unwrap(), "--seed", "7", "--length", "100000", "--out"])
                    .arg(&out)
                    .stderr(std::process::Stdio::null())
                    .status()
                    .map_err(|e| e.to_string())?;
                let primary = std::fs::read(&out).unwrap_or_default();
                let mut sidecar = out.clone().into_os_string();
                sidecar.push(".meta.json");
                let meta = std::fs::read(&sidecar).unwrap_or_default();
                outputs.push((status.code(), primary, meta));
            }
            if outputs[0] != outputs[1] {
                differing.push(format!("{name}/{command}"));
            }
            runs += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(differing.is_empty(), format!("{runs} command pairs, differing {differing:?}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("substitution towers match exact induction", substitution_vs_simulation),
        ("Perron-Frobenius residuals", perron_frobenius_residuals),
        ("zero-slope degeneracy", zero_slope_degeneracy),
        ("cross-formula identity", cross_formula_identity),
        ("differential relation", differential_relation),
        ("ordering chain", ordering_chain),
        ("Karp equals enumeration", karp_equals_enumeration),
        ("Markov structure", markov_structure),
        ("Monte-Carlo oracle", monte_carlo_oracle),
        ("monotonicity and asymptotics", monotonicity_and_asymptotics),
        ("unstable divergence", unstable_divergence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {title}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {title}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
