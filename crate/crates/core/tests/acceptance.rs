//! End-to-end acceptance checks, one line per criterion. Exits nonzero if any check fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use shortpulse::cli::{parse_args, run, EXIT_OK};
use shortpulse::jlm::{
    conjugate_momentum, euler_lagrange_residual, hamiltonian, isochronicity_check,
    jacobi_multiplier, potential, JlmBundle,
};
use shortpulse::phase_plane::{
    classify, eigenvalues_at_origin, integrate_orbit, singular_lines, slow_time_reparametrize,
    unstable_manifold_seed, EquilibriumType, WaveClass,
};
use shortpulse::poly::Polynomial;
use shortpulse::series::{
    continuity_roots, convergence_diagnostic, phi_coefficients,
    residual_profile as series_residual_profile, select_convergent_root, series_coefficients,
    Convention, SeriesSolution,
};
use shortpulse::spe::{eval_g, first_integral, ode_residual, PhasePoint, SpeParams};
use shortpulse::variational::{
    default_guess, paper_amplitude_width, paper_stationarity, residual_profile, solve_embedded,
    solve_regular_soliton, PaperCoefficients,
};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Smallest-modulus continuity root (negative first), whether or not it converges.
fn smallest_root(roots: &[f64]) -> Option<f64> {
    roots
        .iter()
        .copied()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)))
}

fn series_target(c: f64, beta: f64, gamma: f64, target: f64) -> Check {
    let p = SpeParams::new(c, beta, gamma).unwrap();
    let roots =
        continuity_roots(39, &p, (-1.0, 1.0), Convention::Printed).map_err(|e| e.to_string())?;
    let picked = select_convergent_root(&roots, 39, &p, Convention::Printed);
    let listing = roots
        .iter()
        .map(|r| {
            let d = convergence_diagnostic(
                &series_coefficients(*r, 39, &p, Convention::Printed).unwrap(),
            )
            .unwrap();
            format!("{r:.5} (tail {:.3})", d.tail_ratio)
        })
        .collect::<Vec<_>>()
        .join(", ");
    match picked {
        Ok(a1) if (a1 - target).abs() <= 5e-4 => Ok(format!("a1 = {a1:.5}")),
        Ok(a1) => Err(format!(
            "selected a1 = {a1:.5}, want {target} ± 5e-4; roots: {listing}"
        )),
        Err(e) => Err(format!("{e}; want a1 = {target} ± 5e-4; roots: {listing}")),
    }
}

fn criterion_series_small_speed() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let cfg = parse_args([
        "shortpulse",
        "series",
        "--c",
        "0.001",
        "--order",
        "39",
        "--out",
        dir.path().to_str().unwrap(),
    ])
    .map_err(|e| e.message)?;
    let report = run(&cfg);
    let elapsed = started.elapsed().as_secs_f64();

    let p = SpeParams::base(0.001).unwrap();
    let mut failures = Vec::new();
    let a1 = match (&report.summary, report.exit_code) {
        (Some(s), EXIT_OK) => {
            let a1 = s["a1"].as_f64().unwrap();
            let tail = s["tail_ratio"].as_f64().unwrap();
            if (a1 + 0.0193).abs() > 5e-4 {
                failures.push(format!("a1 = {a1:.5}, want -0.0193 ± 5e-4"));
            }
            if tail >= 1.0 {
                failures.push(format!("tail ratio {tail:.3} >= 1"));
            }
            a1
        }
        _ => {
            failures.push(format!(
                "no convergent root selected ({})",
                report.diagnostics.join("; ")
            ));
            let roots = continuity_roots(39, &p, (-1.0, 1.0), Convention::Printed).unwrap();
            smallest_root(&roots).unwrap_or(-0.0193)
        }
    };
    if elapsed >= 1.0 {
        failures.push(format!("runtime {elapsed:.3} s"));
    }

    let grid: Vec<f64> = (0..=450).map(|i| 0.05 + i as f64 * 1e-3).collect();
    let hi = SeriesSolution::new(a1, 39, &p, Convention::Printed).unwrap();
    let lo = SeriesSolution::new(a1, 19, &p, Convention::Printed).unwrap();
    let r_hi = series_residual_profile(&hi, &grid);
    let r_lo = series_residual_profile(&lo, &grid);
    let worse = r_hi
        .iter()
        .zip(&r_lo)
        .filter(|(h, l)| h.abs() >= l.abs())
        .count();
    if worse > 0 {
        failures.push(format!(
            "M=39 residual not below M=19 at {worse}/{} grid points (a1 = {a1:.5})",
            grid.len()
        ));
    }
    if failures.is_empty() {
        Ok(format!("a1 = {a1:.5}, {elapsed:.3} s"))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_series_structure() -> Check {
    let mut r = runner(64);
    r.run(
        &(-0.05f64..0.05, 0.01f64..1.0, 0.1f64..2.0, 0.1f64..3.0),
        |(a1, c, beta, gamma)| {
            prop_assume!(a1.abs() > 1e-4);
            let p = SpeParams::new(c, beta, gamma).unwrap();
            let base = series_coefficients(a1, 39, &p, Convention::Printed).unwrap();
            for k in (2..=39).step_by(2) {
                prop_assert_eq!(base[k - 1], 0.0);
            }
            for lambda in [-1.0f64, 0.5, 3.0] {
                let scaled = series_coefficients(lambda * a1, 39, &p, Convention::Printed).unwrap();
                for (k, (s, b)) in scaled.iter().zip(&base).enumerate() {
                    let want = lambda.powi(k as i32 + 1) * b;
                    prop_assert!(
                        (s - want).abs() <= 1e-12 * want.abs(),
                        "k={} {} vs {}",
                        k + 1,
                        s,
                        want
                    );
                }
            }
            Ok(())
        },
    )
    .map_err(|e| format!("structure: {e}"))?;

    let reference =
        phi_coefficients(39, &SpeParams::base(1.0).unwrap(), Convention::Printed).unwrap();
    let mut r = runner(10);
    r.run(
        &(1e-3f64..1.0, 1e-3f64..3.0, 0.1f64..300.0, any::<bool>()),
        |(c, beta, gamma, neg)| {
            let (c, beta) = if neg { (-c, -beta) } else { (c, beta) };
            let phi = phi_coefficients(
                39,
                &SpeParams::new(c, beta, gamma).unwrap(),
                Convention::Printed,
            )
            .unwrap();
            for k in 0..20 {
                let scaled = phi[2 * k] * (c / gamma).powi(k as i32);
                prop_assert!((scaled - reference[2 * k]).abs() <= 1e-10 * reference[2 * k].abs());
            }
            Ok(())
        },
    )
    .map_err(|e| format!("ratio law: {e}"))?;
    Ok("even terms, homogeneity, ratio law".into())
}

fn criterion_classification() -> Check {
    use EquilibriumType::{Center, Saddle};
    use WaveClass::*;
    // (c, β, γ, type, line count, singular equilibria, class)
    let cases = [
        (0.1, 1.0, 1.0, Saddle, 2, 0, BreakingKinkPair),
        (-0.1, -1.0, -1.0, Saddle, 2, 0, BreakingKinkPair),
        (0.1, 1.0, -1.0, Saddle, 0, 0, SmoothHomoclinicCandidate),
        (-0.1, -1.0, 1.0, Saddle, 0, 0, SmoothHomoclinicCandidate),
        (0.1, 1.0, 0.0, Saddle, 0, 0, SmoothHomoclinicCandidate),
        (-0.1, -1.0, 0.0, Saddle, 0, 0, SmoothHomoclinicCandidate),
        (-0.1, 1.0, 1.0, Center, 0, 0, ClosedOrbits),
        (0.1, -1.0, -1.0, Center, 0, 0, ClosedOrbits),
        (-1.0, 1.0, -1.0, Center, 2, 4, PeriodicCuspWaves),
        (1.0, -1.0, 1.0, Center, 2, 4, PeriodicCuspWaves),
        (-0.1, 1.0, 0.0, Center, 0, 0, ClosedOrbits),
        (0.0, 1.0, 1.0, Center, 1, 0, BreakingKinkPair),
    ];
    for (c, beta, gamma, ty, lines, eq, class) in cases {
        let got = classify(&SpeParams::new(c, beta, gamma).unwrap()).map_err(|e| e.to_string())?;
        ensure(
            got.regular_equilibrium_type == ty
                && got.singular_lines.len() == lines
                && got.singular_equilibria.len() == eq
                && got.wave_class == class,
            format!("(c={c}, beta={beta}, gamma={gamma}) gave {got:?}"),
        )?;
    }
    let mut r = runner(1000);
    r.run(
        &(-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        |(c, beta, gamma)| {
            prop_assume!(beta != 0.0 && c != 0.0);
            let p = SpeParams::new(c, beta, gamma).unwrap();
            let saddle = classify(&p).unwrap().regular_equilibrium_type == Saddle;
            prop_assert_eq!(saddle, beta * c > 0.0);
            let [l1, l2] = eigenvalues_at_origin(&p);
            prop_assert_eq!(saddle, l1.re > 0.0 && l2.re < 0.0);
            Ok(())
        },
    )
    .map_err(|e| e.to_string())?;
    Ok(format!("{} sign cases, 1000 draws", cases.len()))
}

fn criterion_conservation() -> Check {
    let p = SpeParams::base(-0.1).unwrap();
    let trace = integrate_orbit(&p, PhasePoint { u: 0.1, y: 0.0 }, 10.0, 1e-3)
        .map_err(|e| e.to_string())?;
    let h0 = first_integral(trace.points[0], &p);
    let drift = trace
        .points
        .iter()
        .map(|q| ((first_integral(*q, &p) - h0) / h0).abs())
        .fold(0.0, f64::max);
    ensure(drift < 1e-8, format!("relative drift {drift:e}"))?;
    let q = SpeParams::base(0.1).unwrap();
    let us = singular_lines(&q)[0];
    let on_line =
        integrate_orbit(&q, PhasePoint { u: us, y: 1.0 }, 10.0, 1e-3).map_err(|e| e.to_string())?;
    let off = on_line
        .points
        .iter()
        .map(|pt| (pt.u - us).abs())
        .fold(0.0, f64::max);
    ensure(off < 1e-10, format!("line drift {off:e}"))?;
    Ok(format!("drift {drift:.1e}, line drift {off:.1e}"))
}

fn criterion_breaking() -> Check {
    let p = SpeParams::base(0.1).unwrap();
    let seed = unstable_manifold_seed(&p, 1e-6, 1.0).map_err(|e| e.to_string())?;
    let trace = integrate_orbit(&p, seed, 40.0, 1e-4).map_err(|e| e.to_string())?;
    let slow = slow_time_reparametrize(&trace, &p).map_err(|e| e.to_string())?;
    let z_tilde = slow
        .breaking_point
        .ok_or("no breaking point on the unstable manifold")?;
    let q = SpeParams::base(-0.1).unwrap();
    let center = integrate_orbit(&q, PhasePoint { u: 0.1, y: 0.0 }, 20.0, 1e-3)
        .map_err(|e| e.to_string())?;
    let center = slow_time_reparametrize(&center, &q).map_err(|e| e.to_string())?;
    ensure(
        center.breaking_point.is_none(),
        "center orbit reported a breaking point",
    )?;
    Ok(format!("z~ = {z_tilde:.6}"))
}

fn criterion_jlm() -> Check {
    let mut r = runner(1000);
    r.run(
        &(
            -2.0f64..2.0,
            -2.0f64..2.0,
            -5.0f64..5.0,
            -1.0f64..1.0,
            -2.0f64..2.0,
            -2.0f64..2.0,
        ),
        |(u, y, ddu, c, beta, gamma)| {
            let p = SpeParams::new(c, beta, gamma).unwrap();
            let g = Polynomial::new(vec![2.0 * c, 0.0, -gamma]);
            prop_assert_eq!(jacobi_multiplier(&p), &g * &g);
            let dv = Polynomial::new(vec![0.0, -4.0 * beta * c, 0.0, 2.0 * beta * gamma]);
            prop_assert_eq!(potential(&p).derivative(), dv);

            let b = JlmBundle::new(&p);
            let lhs = euler_lagrange_residual(u, y, ddu, &b);
            let rhs = (gamma * u * u - 2.0 * c) * ode_residual(u, y, ddu, &p);
            let gg = (gamma * u * u).abs() + 2.0 * c.abs();
            let scale = gg * (gg * ddu.abs() + 2.0 * u.abs() * (beta.abs() + gamma.abs() * y * y));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));

            if eval_g(u, &p).abs() > 1e-3 {
                let h = hamiltonian(u, conjugate_momentum(u, y, &b), &b).unwrap();
                let reference = first_integral(PhasePoint { u, y }, &p);
                let gu = eval_g(u, &p);
                let hs = 0.5 * gu * gu * y * y
                    + (beta * gamma).abs() * u.powi(4)
                    + 2.0 * (beta * c).abs() * u * u;
                prop_assert!((h - reference).abs() <= 1e-12 * hs.max(1e-300));
            }
            Ok(())
        },
    )
    .map_err(|e| e.to_string())?;
    for c in [-1.0, -0.1, 0.1, 1.0] {
        ensure(
            !isochronicity_check(&SpeParams::base(c).unwrap()).sho_mappable,
            format!("c = {c} reported as oscillator-mappable"),
        )?;
    }
    Ok("1000 draws; oscillator mapping rejected".into())
}

fn criterion_action() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = parse_args([
        "shortpulse",
        "variational",
        "--c",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ])
    .map_err(|e| e.message)?;
    let report = run(&cfg);
    ensure(report.exit_code == EXIT_OK, report.diagnostics.join("; "))?;
    let text = std::fs::read_to_string(dir.path().join("compatibility.json"))
        .map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let verdict = v["verdict"].as_str().unwrap_or("");
    let entries = v["entries"].as_array().map(|a| a.len()).unwrap_or(0);
    ensure(entries == 18, format!("{entries} grid points"))?;
    ensure(
        verdict == "agree" || verdict == "constant_factor",
        format!(
            "verdict {verdict}, max rel diff {}",
            v["max_relative_difference"]
        ),
    )?;
    Ok(format!(
        "verdict {verdict}, max rel diff {:.1e}",
        v["max_relative_difference"].as_f64().unwrap()
    ))
}

fn criterion_regular_soliton() -> Check {
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.005).collect();
    let mut maxima = Vec::new();
    for c in [0.05, 0.1, 0.2] {
        let sol =
            solve_regular_soliton(c, default_guess(c)).map_err(|e| format!("c = {c}: {e}"))?;
        ensure(
            sol.gradient_norm < 1e-8,
            format!("c = {c}: gradient {:e}", sol.gradient_norm),
        )?;
        maxima.push(
            residual_profile(&sol, &grid)
                .into_iter()
                .map(f64::abs)
                .fold(0.0, f64::max),
        );
    }
    ensure(
        maxima[0] < maxima[1] && maxima[1] < maxima[2],
        format!("residual maxima {maxima:?}"),
    )?;
    Ok(format!(
        "residual maxima {:.3} < {:.3} < {:.3}",
        maxima[0], maxima[1], maxima[2]
    ))
}

fn criterion_paper_formulas() -> Check {
    let mut worst: f64 = 0.0;
    for a2 in [0.1, 0.5, 1.0] {
        let (a, rho_sq) = paper_amplitude_width(a2).map_err(|e| e.to_string())?;
        let (r1, r2) = paper_stationarity(a, rho_sq.sqrt(), &PaperCoefficients::with_a2(a2));
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    ensure(worst < 1e-10, format!("residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn criterion_embedded() -> Check {
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    for c in [0.05, 0.1, 0.5] {
        let coarse = solve_embedded(c, 50).map_err(|e| e.to_string())?;
        let fine = solve_embedded(c, 200).map_err(|e| e.to_string())?;
        if coarse.nontrivial_found || fine.nontrivial_found {
            failures.push(format!("c = {c}: nontrivial root {:?}", fine.roots));
        }
        if coarse.nontrivial_found != fine.nontrivial_found
            || coarse.degenerate_rho_sq_over_c != fine.degenerate_rho_sq_over_c
        {
            failures.push(format!("c = {c}: result changed under 4x refinement"));
        }
        match fine.degenerate_rho_sq_over_c {
            Some(t) if (t - 0.2556).abs() <= 1e-3 => {}
            Some(t) => failures.push(format!(
                "c = {c}: degenerate rho^2/c = {t:.5}, want 0.2556 ± 1e-3"
            )),
            None => failures.push(format!("c = {c}: no degenerate branch")),
        }
        ratios.push(fine.degenerate_rho_sq_over_c);
    }
    if failures.is_empty() {
        Ok(format!("no nontrivial roots; ratios {ratios:?}"))
    } else {
        Err(failures.join("; "))
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    if let Ok(entries) = std::fs::read_dir(dir) {
        for e in entries.flatten() {
            files.insert(
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            );
        }
    }
    files
}

fn criterion_determinism() -> Check {
    let exe = env!("CARGO_BIN_EXE_shortpulse");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["classify", "--c", "-1", "--gamma", "-1"],
        vec!["portrait", "--c", "0.1", "--xi-end", "5"],
        vec![
            "portrait", "--c", "0.1", "--xi-end", "5", "--format", "json",
        ],
        vec!["series", "--c", "0.001", "--order", "39"],
        vec![
            "series", "--c", "0.001", "--a1", "-0.0193", "--times", "0,1,2",
        ],
        vec![
            "series", "--c", "0.001", "--a1", "-0.0193", "--format", "json",
        ],
        vec!["jlm", "--c", "0.1"],
        vec!["jlm", "--c", "0.1", "--format", "csv"],
        vec!["variational", "--sweep", "0.05,0.1,0.2"],
        vec!["embedded", "--c", "0.1"],
        vec!["residual", "--c", "0.1", "--grid", "0:2:401"],
    ];
    for args in &commands {
        let mut runs = Vec::new();
        for _ in 0..2 {
            let _ = std::fs::remove_dir_all(&out);
            let output = Command::new(exe)
                .args(args)
                .args(["--out", out_s])
                .output()
                .map_err(|e| e.to_string())?;
            runs.push((
                output.status.code(),
                output.stdout,
                output.stderr,
                snapshot(&out),
            ));
        }
        ensure(
            runs[0] == runs[1],
            format!("`{}` differs between runs", args.join(" ")),
        )?;
        if !matches!(runs[0].0, Some(0) | Some(1)) {
            return Err(format!("`{}` exited with {:?}", args.join(" "), runs[0].0));
        }
    }
    Ok(format!("{} invocations", commands.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("series root at c=0.001, M=39", criterion_series_small_speed),
        ("series root at c=0.1, gamma=200", || {
            series_target(0.1, 1.0, 200.0, 0.0104)
        }),
        ("series root at c=0.01, beta=0.003, gamma=4", || {
            series_target(0.01, 0.003, 4.0, -0.0312)
        }),
        ("series coefficient structure", criterion_series_structure),
        ("phase-plane classification", criterion_classification),
        ("first integral and invariant lines", criterion_conservation),
        ("breaking-point detection", criterion_breaking),
        ("multiplier, Lagrangian and Hamiltonian", criterion_jlm),
        ("closed-form action vs quadrature", criterion_action),
        ("regular soliton family", criterion_regular_soliton),
        (
            "closed-form stationarity consistency",
            criterion_paper_formulas,
        ),
        ("embedded-soliton search", criterion_embedded),
        ("CLI determinism", criterion_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
