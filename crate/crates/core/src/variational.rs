//! Rayleigh–Ritz approximation of solitary waves with a Gaussian trial function
//! `φ(z) = A exp(−z²/ρ²)`.
//!
//! The action is `S(A, ρ) = ∫ L(φ, φ') dz` with the last-multiplier Lagrangian; regular solitons
//! are its nontrivial stationary points. The module also carries the published closed forms of
//! the action and of its stationarity conditions, and the zero-tail embedded-soliton system.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::jlm::{lagrangian, JlmBundle};
use crate::newton::{det2, hessian, levenberg_marquardt, stationary_point};
use crate::output::csv_row;
use crate::roots::scan_roots;
use crate::spe::{ode_residual, SpeParams};

pub const QUADRATURE_REL_TOL: f64 = 1e-12;
/// The action is integrated over `|z − center| ≤ QUADRATURE_HALF_WIDTH · ρ`.
pub const QUADRATURE_HALF_WIDTH: f64 = 8.0;
pub const SOLVER_TOLERANCE: f64 = 1e-8;
pub const SOLVER_MAX_ITER: usize = 100;
pub const DEFAULT_EMBEDDED_STARTS: usize = 50;
/// Multi-start box for the embedded system is `(0, EMBEDDED_BOX_SCALE·√|c|]²`.
pub const EMBEDDED_BOX_SCALE: f64 = 5.0;
const ROOT_DEDUP_DISTANCE: f64 = 1e-6;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;
const SQRT_6: f64 = 2.449_489_742_783_178;

fn check_width(rho: f64) -> Result<()> {
    ensure_finite("rho", rho)?;
    if rho <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "width must be positive, got {rho}"
        )));
    }
    Ok(())
}

/// `A exp(−z²/ρ²)`.
pub fn gaussian_ansatz(amplitude: f64, rho: f64, z: f64) -> Result<f64> {
    check_width(rho)?;
    Ok(amplitude * (-(z * z) / (rho * rho)).exp())
}

fn ansatz_derivatives(amplitude: f64, rho: f64, z: f64) -> (f64, f64, f64) {
    let r2 = rho * rho;
    let u = amplitude * (-(z * z) / r2).exp();
    let du = -2.0 * z / r2 * u;
    let ddu = (4.0 * z * z / (r2 * r2) - 2.0 / r2) * u;
    (u, du, ddu)
}

/// Published closed form of the averaged Lagrangian for the base equation:
/// `(A²√π/36ρ)(−9A²ρ² + 36√2(c² + cρ²) + √6A⁴ − 18cA²)`.
pub fn action_closed(amplitude: f64, rho: f64, c: f64) -> Result<f64> {
    check_width(rho)?;
    let a2 = amplitude * amplitude;
    Ok(a2 * PI.sqrt() / (36.0 * rho)
        * (-9.0 * a2 * rho * rho + 36.0 * SQRT_2 * (c * c + c * rho * rho) + SQRT_6 * a2 * a2
            - 18.0 * c * a2))
}

/// `∫ L(φ, φ') dz` by adaptive quadrature, with the trial function centered at `center`.
pub fn action_quadrature_centered(
    amplitude: f64,
    rho: f64,
    p: &SpeParams,
    center: f64,
) -> Result<f64> {
    check_width(rho)?;
    let bundle = JlmBundle::new(p);
    let half = QUADRATURE_HALF_WIDTH * rho;
    crate::quadrature::integrate(
        |z| {
            let (u, du, _) = ansatz_derivatives(amplitude, rho, z - center);
            lagrangian(u, du, &bundle)
        },
        center - half,
        center + half,
        QUADRATURE_REL_TOL,
    )
}

/// `∫ L(φ, φ') dz` over `[−8ρ, 8ρ]`; the reference value of the action.
pub fn action_quadrature(amplitude: f64, rho: f64, p: &SpeParams) -> Result<f64> {
    action_quadrature_centered(amplitude, rho, p, 0.0)
}

/// A stationary point of the action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalSoliton {
    pub amplitude: f64,
    pub width: f64,
    pub params: SpeParams,
    pub action: f64,
    /// `|∂S/∂A| + |∂S/∂ρ|` at the solution.
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// `(2√c, √c)`, close to the basin of the regular soliton for every `c > 0`.
pub fn default_guess(c: f64) -> (f64, f64) {
    (2.0 * c.abs().sqrt(), c.abs().sqrt())
}

/// Newton iteration on the finite-difference gradient of [`action_quadrature`] for the base
/// equation at speed `c > 0`.
///
/// Converging onto the line `A = 0`, where every width is stationary, is reported as
/// [`Error::TrivialSolution`].
pub fn solve_regular_soliton(c: f64, guess: (f64, f64)) -> Result<VariationalSoliton> {
    let p = SpeParams::base(c)?;
    if !p.is_saddle() {
        return Err(Error::NotSaddle(c));
    }
    ensure_finite("guess amplitude", guess.0)?;
    check_width(guess.1)?;
    let action = |x: [f64; 2]| action_quadrature(x[0], x[1], &p);
    let sp = stationary_point(
        &action,
        [guess.0, guess.1],
        |x| x[1] > 1e-5,
        SOLVER_TOLERANCE,
        SOLVER_MAX_ITER,
    )?;
    if sp.x[0].abs() <= 1e-6 * c.sqrt() {
        return Err(Error::TrivialSolution);
    }
    Ok(VariationalSoliton {
        amplitude: sp.x[0],
        width: sp.x[1],
        params: p,
        action: sp.value,
        gradient_norm: sp.gradient_norm,
        iterations: sp.iterations,
    })
}

/// Determinant of the finite-difference Hessian of the action at the solution.
pub fn hessian_determinant(sol: &VariationalSoliton) -> Result<f64> {
    let p = sol.params;
    let action = |x: [f64; 2]| action_quadrature(x[0], x[1], &p);
    Ok(det2(&hessian(&action, [sol.amplitude, sol.width])?))
}

/// CSV `c,A,rho,action`.
pub fn family_csv(solitons: &[VariationalSoliton]) -> String {
    let mut out = String::from("c,A,rho,action\n");
    for s in solitons {
        out.push_str(&csv_row(&[s.params.c(), s.amplitude, s.width, s.action]));
    }
    out
}

/// ODE residual of the trial function with its exact derivatives.
pub fn residual_profile(sol: &VariationalSoliton, z_grid: &[f64]) -> Vec<f64> {
    z_grid
        .iter()
        .map(|&z| {
            let (u, du, ddu) = ansatz_derivatives(sol.amplitude, sol.width, z);
            ode_residual(u, du, ddu, &sol.params)
        })
        .collect()
}

/// CSV `z,residual`.
pub fn residual_csv(z_grid: &[f64], residual: &[f64]) -> String {
    crate::output::two_column_csv(("z", "residual"), z_grid, residual)
}

/// Coefficients `a₁, a₂, a₃` of the published stationarity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaperCoefficients {
    pub a1_coef: f64,
    pub a2_coef: f64,
    pub a3_coef: f64,
}

impl PaperCoefficients {
    /// `a₁ = 1/2`, `a₃ = 1`, free `a₂`.
    pub fn with_a2(a2: f64) -> Self {
        Self {
            a1_coef: 0.5,
            a2_coef: a2,
            a3_coef: 1.0,
        }
    }
}

/// Left minus right sides of the two published stationarity conditions
/// `ρ²(3√2a₁ + A(2√3a₂ + 3Aa₃)) = 3√2(1 + ρ²)` and
/// `ρ²(18√2a₁ + A(8√3a₂ + 9Aa₃)) = 18√2(−1 + ρ²)`.
pub fn paper_stationarity(amplitude: f64, rho: f64, pc: &PaperCoefficients) -> (f64, f64) {
    let (a, r2) = (amplitude, rho * rho);
    let (a1, a2, a3) = (pc.a1_coef, pc.a2_coef, pc.a3_coef);
    let first = r2 * (3.0 * SQRT_2 * a1 + a * (2.0 * SQRT_3 * a2 + 3.0 * a * a3))
        - 3.0 * SQRT_2 * (1.0 + r2);
    let second = r2 * (18.0 * SQRT_2 * a1 + a * (8.0 * SQRT_3 * a2 + 9.0 * a * a3))
        - 18.0 * SQRT_2 * (r2 - 1.0);
    (first, second)
}

/// Published closed-form solution `(A, ρ²)` of the stationarity conditions at `a₁ = 1/2`,
/// `a₃ = 1`.
///
/// At `a₂ = 0` the amplitude formula is `0/0` at `ρ² = 6`; its numerator factor makes it `0`.
pub fn paper_amplitude_width(a2: f64) -> Result<(f64, f64)> {
    ensure_finite("a2", a2)?;
    let sq = a2 * a2;
    let radicand = 81.0 * SQRT_2 * sq + 50.0 * sq * sq;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand(radicand));
    }
    let rho_sq =
        (80.0 * sq + 2.0 * SQRT_2 * (81.0 - 4.0 * radicand.sqrt())) / (27.0 * SQRT_2 + 16.0 * sq);
    if a2 == 0.0 {
        return Ok((0.0, rho_sq));
    }
    if rho_sq == 6.0 {
        return Err(Error::ZeroDenominator);
    }
    let amplitude = 4.0 * (10.0 - rho_sq) * a2 / (3.0 * SQRT_3 * (rho_sq - 6.0));
    Ok((amplitude, rho_sq))
}

/// Positive branch of the tail wavenumber `√(−32c + 6α²a₃)/(α⁴ + 32c² − 8α²c)`.
pub fn kappa_embedded(c: f64, alpha: f64, a3: f64) -> Result<f64> {
    let radicand = -32.0 * c + 6.0 * alpha * alpha * a3;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand(radicand));
    }
    let den = alpha.powi(4) + 32.0 * c * c - 8.0 * alpha * alpha * c;
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(radicand.sqrt() / den)
}

/// Gaussian core plus oscillatory tail `α cos(κz)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddedAnsatz {
    pub amplitude: f64,
    pub width: f64,
    pub tail_amplitude: f64,
    pub tail_wavenumber: f64,
    pub params: SpeParams,
}

impl EmbeddedAnsatz {
    pub fn new(
        amplitude: f64,
        width: f64,
        tail_amplitude: f64,
        a3: f64,
        params: SpeParams,
    ) -> Result<Self> {
        check_width(width)?;
        if tail_amplitude < 0.0 {
            return Err(Error::InvalidArgument(
                "tail amplitude must be nonnegative".into(),
            ));
        }
        let tail_wavenumber = kappa_embedded(params.c(), tail_amplitude, a3)?;
        Ok(Self {
            amplitude,
            width,
            tail_amplitude,
            tail_wavenumber,
            params,
        })
    }

    pub fn eval(&self, z: f64) -> f64 {
        let r2 = self.width * self.width;
        self.amplitude * (-(z * z) / r2).exp()
            + self.tail_amplitude * (self.tail_wavenumber * z).cos()
    }
}

/// The three zero-tail variational equations, left-hand sides verbatim:
///
/// ```text
/// ρ²(12√2c − 6A²) + 12√2c² − 12cA² + √6A⁴
/// ρ²(−36√2c + 9A²) + 36√2c² − 18cA² + √6A⁴
/// −(1000√3/81)A²(5ρ²/4 + 3c)e^{ρ²/30c} + √5(−ρ²/c + 20/3)A⁴
/// ```
pub fn embedded_system(amplitude: f64, rho: f64, c: f64) -> Result<[f64; 3]> {
    if c == 0.0 {
        return Err(Error::InvalidArgument(
            "embedded system is undefined at c = 0".into(),
        ));
    }
    check_width(rho)?;
    let (a2, r2) = (amplitude * amplitude, rho * rho);
    let first = r2 * (12.0 * SQRT_2 * c - 6.0 * a2) + 12.0 * SQRT_2 * c * c - 12.0 * c * a2
        + SQRT_6 * a2 * a2;
    let second = r2 * (-36.0 * SQRT_2 * c + 9.0 * a2) + 36.0 * SQRT_2 * c * c - 18.0 * c * a2
        + SQRT_6 * a2 * a2;
    let third = -1000.0 * SQRT_3 / 81.0 * a2 * (1.25 * r2 + 3.0 * c) * (r2 / (30.0 * c)).exp()
        + SQRT_5 * (-r2 / c + 20.0 / 3.0) * a2 * a2;
    Ok([first, second, third])
}

/// Point on the branch where the first two equations hold, in units of `c`:
/// `t = ρ²/c`, `s = A²/c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegenerateBranch {
    pub rho_sq_over_c: f64,
    pub amplitude_sq_over_c: f64,
    /// Third equation divided by `c²` at that point.
    pub third_residual: f64,
}

// The first two equations, divided by c², depend on (t, s) only; their difference is linear in s.
fn reduced_first(t: f64, s: f64) -> f64 {
    t * (12.0 * SQRT_2 - 6.0 * s) + 12.0 * SQRT_2 - 12.0 * s + SQRT_6 * s * s
}

fn eliminated_amplitude(t: f64) -> f64 {
    24.0 * SQRT_2 * (2.0 * t - 1.0) / (15.0 * t - 6.0)
}

fn reduced_third(t: f64, s: f64) -> f64 {
    -1000.0 * SQRT_3 / 81.0 * s * (1.25 * t + 3.0) * (t / 30.0).exp()
        + SQRT_5 * (-t + 20.0 / 3.0) * s * s
}

/// Eliminates `A` between the first two equations (their difference fixes `A²` in terms of
/// `ρ²`) and returns the remaining roots with real amplitude, `0 < ρ²/c ≤ 5`.
pub fn degenerate_branch() -> Result<Vec<DegenerateBranch>> {
    let g = |t: f64| reduced_first(t, eliminated_amplitude(t));
    let candidates = scan_roots(g, 1e-9, 5.0, 100_000, 1e-14)?;
    Ok(candidates
        .into_iter()
        .filter_map(|t| {
            let s = eliminated_amplitude(t);
            // Sign changes across the pole of the elimination are not roots.
            let scale = 12.0 * SQRT_2 * (1.0 + t) + 12.0 * s.abs() + SQRT_6 * s * s;
            (s > 0.0 && g(t).abs() < 1e-9 * scale).then(|| DegenerateBranch {
                rho_sq_over_c: t,
                amplitude_sq_over_c: s,
                third_residual: reduced_third(t, s),
            })
        })
        .collect())
}

/// Outcome of the multi-start root search of [`embedded_system`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddedReport {
    pub c: f64,
    pub nontrivial_found: bool,
    /// Simultaneous roots `[A, ρ]` with `A ≠ 0`.
    pub roots: Vec<[f64; 2]>,
    pub degenerate_rho_sq_over_c: Option<f64>,
    pub degenerate_amplitude_sq_over_c: Option<f64>,
    pub degenerate_third_residual: Option<f64>,
    pub starts: usize,
    /// Upper edge of the search box in both `A` and `ρ`.
    pub box_max: f64,
    /// Smallest `max_i |r_i| / c²` reached over all starts.
    pub min_scaled_residual: f64,
}

fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Levenberg–Marquardt from `starts` Halton points in `(0, 5√|c|]²`.
///
/// A start counts as a root when every residual is below `1e−9·c²` (the equations are
/// homogeneous of degree two in `c` under `A² ∝ c`, `ρ² ∝ c`); roots are deduplicated at
/// distance `1e−6`.
pub fn solve_embedded(c: f64, starts: usize) -> Result<EmbeddedReport> {
    ensure_finite("c", c)?;
    if c == 0.0 {
        return Err(Error::InvalidArgument(
            "embedded system is undefined at c = 0".into(),
        ));
    }
    if starts == 0 {
        return Err(Error::InvalidArgument(
            "at least one start is required".into(),
        ));
    }
    let box_max = EMBEDDED_BOX_SCALE * c.abs().sqrt();
    let tol = 1e-9 * c * c;
    let system = |x: [f64; 2]| embedded_system(x[0], x[1], c);
    let mut roots: Vec<[f64; 2]> = Vec::new();
    let mut min_scaled_residual = f64::INFINITY;
    for i in 1..=starts {
        let start = [box_max * halton(i, 2), box_max * halton(i, 3)];
        let ls = levenberg_marquardt(&system, start, |x| x[1] > 1e-5, tol, 500)?;
        min_scaled_residual = min_scaled_residual.min(ls.max_residual() / (c * c));
        let nontrivial = ls.x[0].abs() > 1e-6 * c.abs().sqrt();
        if ls.max_residual() < tol && nontrivial {
            let root = [ls.x[0], ls.x[1]];
            let dup = roots
                .iter()
                .any(|r| (r[0] - root[0]).hypot(r[1] - root[1]) < ROOT_DEDUP_DISTANCE);
            if !dup {
                roots.push(root);
            }
        }
    }
    let branch: Vec<DegenerateBranch> = if c > 0.0 {
        degenerate_branch()?
    } else {
        Vec::new()
    };
    let first = branch.first();
    Ok(EmbeddedReport {
        c,
        nontrivial_found: !roots.is_empty(),
        roots,
        degenerate_rho_sq_over_c: first.map(|b| b.rho_sq_over_c),
        degenerate_amplitude_sq_over_c: first.map(|b| b.amplitude_sq_over_c),
        degenerate_third_residual: first.map(|b| b.third_residual),
        starts,
        box_max,
        min_scaled_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompatibilityVerdict {
    Agree,
    ConstantFactor,
    Discrepancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompatibilityEntry {
    pub amplitude: f64,
    pub width: f64,
    pub c: f64,
    pub closed: f64,
    pub quadrature: f64,
    pub relative_difference: f64,
    pub ratio: f64,
}

/// Closed-form action against quadrature over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub entries: Vec<CompatibilityEntry>,
    pub max_relative_difference: f64,
    /// `max |ratio − mean| / |mean|` of closed/quadrature over the grid.
    pub ratio_spread: f64,
    pub verdict: CompatibilityVerdict,
}

pub const COMPATIBILITY_AMPLITUDES: [f64; 3] = [0.1, 0.5, 1.0];
pub const COMPATIBILITY_WIDTHS: [f64; 3] = [0.5, 1.0, 2.0];
pub const COMPATIBILITY_SPEEDS: [f64; 2] = [0.05, 0.1];

pub fn compatibility_report_on(
    amplitudes: &[f64],
    widths: &[f64],
    speeds: &[f64],
) -> Result<CompatibilityReport> {
    let mut entries = Vec::new();
    for &c in speeds {
        let p = SpeParams::base(c)?;
        for &amplitude in amplitudes {
            for &width in widths {
                let closed = action_closed(amplitude, width, c)?;
                let quadrature = action_quadrature(amplitude, width, &p)?;
                entries.push(CompatibilityEntry {
                    amplitude,
                    width,
                    c,
                    closed,
                    quadrature,
                    relative_difference: (closed - quadrature).abs() / quadrature.abs(),
                    ratio: closed / quadrature,
                });
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::InvalidArgument("empty compatibility grid".into()));
    }
    let max_relative_difference = entries
        .iter()
        .map(|e| e.relative_difference)
        .fold(0.0, f64::max);
    let mean = entries.iter().map(|e| e.ratio).sum::<f64>() / entries.len() as f64;
    let ratio_spread = entries
        .iter()
        .map(|e| (e.ratio - mean).abs())
        .fold(0.0, f64::max)
        / mean.abs();
    let verdict = if max_relative_difference <= 1e-8 {
        CompatibilityVerdict::Agree
    } else if ratio_spread <= 1e-6 {
        CompatibilityVerdict::ConstantFactor
    } else {
        CompatibilityVerdict::Discrepancy
    };
    Ok(CompatibilityReport {
        entries,
        max_relative_difference,
        ratio_spread,
        verdict,
    })
}

/// The report over `A ∈ {0.1, 0.5, 1}`, `ρ ∈ {0.5, 1, 2}`, `c ∈ {0.05, 0.1}`.
pub fn compatibility_report() -> Result<CompatibilityReport> {
    compatibility_report_on(
        &COMPATIBILITY_AMPLITUDES,
        &COMPATIBILITY_WIDTHS,
        &COMPATIBILITY_SPEEDS,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ansatz_values() {
        assert_eq!(gaussian_ansatz(0.7, 0.3, 0.0).unwrap(), 0.7);
        assert!(
            (gaussian_ansatz(0.7, 0.3, 0.3).unwrap() - 0.7 / std::f64::consts::E).abs() < 1e-15
        );
        assert_eq!(
            gaussian_ansatz(0.7, 0.3, 0.41).unwrap(),
            gaussian_ansatz(0.7, 0.3, -0.41).unwrap()
        );
        assert!(gaussian_ansatz(1.0, 0.0, 0.0).is_err());
        assert!(action_closed(1.0, -1.0, 0.1).is_err());
    }

    #[test]
    fn closed_action_values() {
        assert_eq!(action_closed(0.0, 0.8, 0.3).unwrap(), 0.0);
        let want = PI.sqrt() / 36.0 * (-9.0 + SQRT_6);
        assert!((action_closed(1.0, 1.0, 0.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn quadrature_action() {
        let p = SpeParams::base(0.1).unwrap();
        assert_eq!(action_quadrature(0.0, 0.5, &p).unwrap(), 0.0);
        let a = action_quadrature(0.6, 0.4, &p).unwrap();
        let shifted = action_quadrature_centered(0.6, 0.4, &p, 3.7).unwrap();
        assert!((a - shifted).abs() < 1e-10 * a.abs());
    }

    #[test]
    fn closed_form_is_the_exact_action() {
        let report = compatibility_report().unwrap();
        assert_eq!(report.entries.len(), 18);
        assert_eq!(report.verdict, CompatibilityVerdict::Agree, "{report:?}");
    }

    #[test]
    fn regular_soliton_family() {
        // Frozen from the closed-form stationarity conditions: A² = 3.92703c, ρ² = 1.15619c.
        let mut last = 0.0;
        for c in [0.05, 0.1, 0.2] {
            let sol = solve_regular_soliton(c, default_guess(c)).unwrap();
            assert!(sol.gradient_norm < SOLVER_TOLERANCE);
            assert!((sol.amplitude.abs() - (3.927_03 * c).sqrt()).abs() < 1e-4);
            assert!((sol.width - (1.156_19 * c).sqrt()).abs() < 1e-4);
            assert!(hessian_determinant(&sol).unwrap().abs() > 1e-12);
            assert!(sol.amplitude.abs() > last);
            last = sol.amplitude.abs();
        }
    }

    #[test]
    fn doubled_guess_reaches_same_point() {
        let a = solve_regular_soliton(0.1, default_guess(0.1)).unwrap();
        let (g0, g1) = default_guess(0.1);
        let b = solve_regular_soliton(0.1, (2.0 * g0, 2.0 * g1)).unwrap();
        assert!((a.amplitude.abs() - b.amplitude.abs()).abs() < 1e-7);
        assert!((a.width - b.width).abs() < 1e-7);
    }

    #[test]
    fn regular_soliton_domain() {
        assert!(matches!(
            solve_regular_soliton(-0.1, (0.5, 0.5)),
            Err(Error::NotSaddle(_))
        ));
        assert!(solve_regular_soliton(0.1, (0.5, -0.5)).is_err());
    }

    #[test]
    fn residual_at_peak() {
        let sol = solve_regular_soliton(0.1, default_guess(0.1)).unwrap();
        let (a, r) = (sol.amplitude, sol.width);
        let want = (a * a - 0.2) * (-2.0 * a / (r * r)) + 2.0 * a;
        let got = residual_profile(&sol, &[0.0])[0];
        assert!((got - want).abs() < 1e-14 * want.abs().max(1.0));
        let prof = residual_profile(&sol, &[-0.3, 0.3, -1.1, 1.1]);
        assert_eq!(prof[0], prof[1]);
        assert_eq!(prof[2], prof[3]);
    }

    #[test]
    fn paper_formulas_are_self_consistent() {
        for a2 in [0.1, 0.5, 1.0] {
            let (a, rho_sq) = paper_amplitude_width(a2).unwrap();
            let (r1, r2) = paper_stationarity(a, rho_sq.sqrt(), &PaperCoefficients::with_a2(a2));
            assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10, "{a2}: {r1:e} {r2:e}");
        }
        let (a, rho_sq) = paper_amplitude_width(0.0).unwrap();
        assert_eq!(a, 0.0);
        assert!((rho_sq - 6.0).abs() < 1e-14);
    }

    #[test]
    fn width_slope_near_zero() {
        let a = 0.01;
        let h = 1e-6;
        let fd = (paper_amplitude_width(a + h).unwrap().1
            - paper_amplitude_width(a - h).unwrap().1)
            / (2.0 * h);
        let rad = 81.0 * SQRT_2 * a * a + 50.0 * a.powi(4);
        let num = 80.0 * a * a + 2.0 * SQRT_2 * (81.0 - 4.0 * rad.sqrt());
        let den = 27.0 * SQRT_2 + 16.0 * a * a;
        let dnum = 160.0 * a
            - 8.0 * SQRT_2 * (162.0 * SQRT_2 * a + 200.0 * a.powi(3)) / (2.0 * rad.sqrt());
        let analytic = (dnum * den - num * 32.0 * a) / (den * den);
        assert!((fd - analytic).abs() < 1e-4);
    }

    #[test]
    fn kappa_values() {
        assert!((kappa_embedded(-1.0, 0.0, 1.0).unwrap() - 32f64.sqrt() / 32.0).abs() < 1e-15);
        assert!(matches!(
            kappa_embedded(1.0, 0.0, 1.0),
            Err(Error::NegativeRadicand(_))
        ));
        assert!(matches!(
            kappa_embedded(0.0, 0.0, 1.0),
            Err(Error::ZeroDenominator)
        ));
        let h = 1e-6;
        let slope = (kappa_embedded(-0.5, h, 1.0).unwrap()
            - kappa_embedded(-0.5, -h, 1.0).unwrap())
            / (2.0 * h);
        assert!(slope.is_finite() && slope.abs() < 1e-3);
        let tail = EmbeddedAnsatz::new(0.3, 0.5, 0.0, 1.0, SpeParams::base(-0.5).unwrap()).unwrap();
        assert_eq!(tail.eval(0.0), 0.3);
    }

    #[test]
    fn embedded_system_structure() {
        let c = 0.1;
        let r = embedded_system(0.0, 0.4, c).unwrap();
        assert!((r[0] - 12.0 * SQRT_2 * c * (0.16 + c)).abs() < 1e-15);
        assert!((r[1] - (-36.0 * SQRT_2 * c * 0.16 + 36.0 * SQRT_2 * c * c)).abs() < 1e-15);
        assert_eq!(r[2], 0.0);
        assert!(embedded_system(0.3, 0.4, 0.0).is_err());
        assert!(embedded_system(0.3, 0.0, 0.1).is_err());
    }

    #[test]
    fn degenerate_branch_ratio() {
        // Same elimination carried out symbolically outside the crate.
        let branch = degenerate_branch().unwrap();
        assert_eq!(branch.len(), 1);
        assert!(
            (branch[0].rho_sq_over_c - 1.156_19).abs() < 1e-5,
            "{branch:?}"
        );
        assert!((branch[0].amplitude_sq_over_c - 3.927_03).abs() < 1e-5);
        assert!(branch[0].third_residual.abs() > 1.0);
    }

    #[test]
    fn embedded_search_finds_nothing() {
        for c in [0.05, 0.1, 0.5] {
            let coarse = solve_embedded(c, 50).unwrap();
            let fine = solve_embedded(c, 200).unwrap();
            assert!(!coarse.nontrivial_found && !fine.nontrivial_found);
            assert_eq!(
                coarse.degenerate_rho_sq_over_c,
                fine.degenerate_rho_sq_over_c
            );
            assert!(coarse.min_scaled_residual > 1e-6);
        }
        assert!(solve_embedded(0.0, 50).is_err());
    }

    #[test]
    fn family_csv_header() {
        let sol = solve_regular_soliton(0.1, default_guess(0.1)).unwrap();
        assert!(family_csv(&[sol]).starts_with("c,A,rho,action\n1.0000000000000001e-1,"));
        assert!(residual_csv(&[0.0], &[1.0]).starts_with("z,residual\n"));
    }

    proptest! {
        #[test]
        fn difference_drops_quartic_term(a in -2.0f64..2.0, rho in 0.01f64..3.0, c in 0.01f64..1.0) {
            let r = embedded_system(a, rho, c).unwrap();
            let a2 = a * a;
            let r2 = rho * rho;
            let linear = r2 * (-48.0 * SQRT_2 * c + 15.0 * a2) + 24.0 * SQRT_2 * c * c - 6.0 * c * a2;
            let scale = 50.0 * (r2 * (c + a2) + c * c + c * a2 + a2 * a2);
            prop_assert!(((r[1] - r[0]) - linear).abs() <= 1e-14 * scale);
        }

        #[test]
        fn kappa_identity(c in -2.0f64..-0.01, alpha in 0.0f64..2.0, a3 in 0.0f64..2.0) {
            let k = kappa_embedded(c, alpha, a3).unwrap();
            let den = alpha.powi(4) + 32.0 * c * c - 8.0 * alpha * alpha * c;
            let rad = -32.0 * c + 6.0 * alpha * alpha * a3;
            prop_assert!(((k * den).powi(2) - rad).abs() <= 1e-14 * rad);
        }
    }
}
