//! Exponential series for homoclinic orbits of the traveling-wave equation.
//!
//! For a saddle origin (βc > 0) the branch `z > 0` is sought as
//!
//! ```text
//! u(z) = Σ_{k≥1} a_k e^{kαz},   α = −√(β/c),
//! ```
//!
//! with the `a_k` fixed by a cubic convolution recurrence once `a_1` is chosen. The branch
//! `z < 0` is the odd reflection `u(z) = −u(−z)`, and `a_1` is pinned by requiring
//! continuity at the origin, `Σ a_k = 0`, a degree-`M` odd polynomial in `a_1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::csv_row;
use crate::roots::scan_roots;
use crate::spe::{ode_residual, SpeParams};

pub const DEFAULT_ORDER: usize = 39;
pub const DEFAULT_SEARCH_INTERVAL: (f64, f64) = (-1.0, 1.0);
pub const ROOT_SCAN_INTERVALS: usize = 10_000;
pub const ROOT_TOLERANCE: f64 = 1e-12;
/// Roots closer than this to zero are the trivial solution and are dropped.
const TRIVIAL_ROOT: f64 = 1e-10;

/// Sign convention of the coefficient recurrence.
///
/// Balancing the `e^{kαz}` terms gives `F(kα) a_k + γα² S_k = 0`, where `S_k` is the cubic
/// convolution sum. `Printed` uses `a_k = +γα² S_k / F(kα)`, the published form of the
/// recurrence (so `a_3 = 3α²a_1³ / F(3α)`); `Consistent` uses the sign that makes the truncated
/// series satisfy the traveling-wave ODE order by order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[default]
    Printed,
    Consistent,
}

impl Convention {
    fn sign(self) -> f64 {
        match self {
            Convention::Printed => 1.0,
            Convention::Consistent => -1.0,
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(Convention::Printed),
            "consistent" => Ok(Convention::Consistent),
            other => Err(Error::InvalidArgument(format!(
                "unknown convention `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Printed => "printed",
            Convention::Consistent => "consistent",
        })
    }
}

/// The decaying exponent `α = −√(β/c)`; requires a saddle origin.
pub fn decay_exponent(p: &SpeParams) -> Result<f64> {
    if !p.is_saddle() {
        return Err(Error::NotSaddle(p.beta() * p.c()));
    }
    Ok(-(p.beta() / p.c()).sqrt())
}

fn check_order(order: usize) -> Result<()> {
    if order < 3 {
        return Err(Error::InvalidArgument(format!(
            "truncation order must be at least 3, got {order}"
        )));
    }
    Ok(())
}

/// Coefficients `a_1..a_M` (index `k − 1` holds `a_k`) for the given leading coefficient.
///
/// Even coefficients vanish identically; odd ones follow the double-sum recurrence
/// `a_k = ±γ Σ_{j=2}^{k−1} Σ_{l=1}^{j−1} ((k−j)² + 2(j−l)l) a_l a_{j−l} a_{k−j} α² / F(kα)`
/// with `F(kα) = 2(β − c k²α²)`.
pub fn series_coefficients(
    a1: f64,
    order: usize,
    p: &SpeParams,
    convention: Convention,
) -> Result<Vec<f64>> {
    check_order(order)?;
    if !a1.is_finite() {
        return Err(Error::NonFinite {
            name: "a1",
            value: a1,
        });
    }
    let alpha = decay_exponent(p)?;
    let alpha_sq = alpha * alpha;
    // 1-based scratch so the indices read like the recurrence.
    let mut a = vec![0.0; order + 1];
    a[1] = a1;
    for k in 2..=order {
        let kk = k as f64;
        let denom = 2.0 * (p.beta() - p.c() * kk * kk * alpha_sq);
        if denom == 0.0 {
            return Err(Error::SingularRecurrence(k));
        }
        if k % 2 == 0 {
            continue;
        }
        let mut sum = 0.0;
        for j in 2..k {
            for l in 1..j {
                let weight = ((k - j) * (k - j) + 2 * (j - l) * l) as f64;
                sum += weight * a[l] * a[j - l] * a[k - j];
            }
        }
        a[k] = convention.sign() * p.gamma() * sum * alpha_sq / denom;
    }
    a.remove(0);
    Ok(a)
}

/// The root-independent factors `φ_k` with `a_k = φ_k a_1^k` (the coefficients at `a_1 = 1`).
pub fn phi_coefficients(order: usize, p: &SpeParams, convention: Convention) -> Result<Vec<f64>> {
    series_coefficients(1.0, order, p, convention)
}

/// `Σ_k φ_k x^k`, the value at `z = 0` of the series with leading coefficient `x`.
pub fn continuity_polynomial(phi: &[f64], x: f64) -> f64 {
    phi.iter().rev().fold(0.0, |acc, coef| (acc + coef) * x)
}

/// Nonzero real roots of the continuity polynomial in `interval`, ascending.
///
/// Sign changes are located on a uniform grid of [`ROOT_SCAN_INTERVALS`] cells and refined by
/// bisection to [`ROOT_TOLERANCE`].
pub fn continuity_roots(
    order: usize,
    p: &SpeParams,
    interval: (f64, f64),
    convention: Convention,
) -> Result<Vec<f64>> {
    check_order(order)?;
    if interval.0 >= interval.1 || !interval.0.is_finite() || !interval.1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty search interval [{}, {}]",
            interval.0, interval.1
        )));
    }
    let phi = phi_coefficients(order, p, convention)?;
    let roots = scan_roots(
        |x| continuity_polynomial(&phi, x),
        interval.0,
        interval.1,
        ROOT_SCAN_INTERVALS,
        ROOT_TOLERANCE,
    )?;
    Ok(roots
        .into_iter()
        .filter(|r| r.abs() > TRIVIAL_ROOT)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    pub converging: bool,
    /// Geometric mean of `|a_{2k+3} / a_{2k+1}|` over the last third of the odd ratios.
    pub tail_ratio: f64,
}

/// Convergence verdict for a coefficient vector `a_1..a_M`.
pub fn convergence_diagnostic(coeffs: &[f64]) -> Result<Convergence> {
    let nonzero = coeffs.iter().filter(|a| **a != 0.0).count();
    if nonzero < 9 {
        return Err(Error::InvalidArgument(format!(
            "convergence diagnostic needs at least 9 nonzero coefficients, got {nonzero}"
        )));
    }
    let odd: Vec<f64> = coeffs.iter().step_by(2).copied().collect();
    let ratios: Vec<f64> = odd.windows(2).map(|w| (w[1] / w[0]).abs()).collect();
    let take = ratios.len().div_ceil(3).max(1);
    let tail = &ratios[ratios.len() - take..];
    let tail_ratio = (tail.iter().map(|r| r.ln()).sum::<f64>() / take as f64).exp();
    Ok(Convergence {
        converging: tail_ratio < 1.0,
        tail_ratio,
    })
}

/// A continuity root with its convergence verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootCandidate {
    pub a1: f64,
    pub tail_ratio: f64,
    pub converging: bool,
}

pub fn assess_roots(
    roots: &[f64],
    order: usize,
    p: &SpeParams,
    convention: Convention,
) -> Result<Vec<RootCandidate>> {
    roots
        .iter()
        .map(|&a1| {
            let coeffs = series_coefficients(a1, order, p, convention)?;
            let diag = convergence_diagnostic(&coeffs)?;
            Ok(RootCandidate {
                a1,
                tail_ratio: diag.tail_ratio,
                converging: diag.converging,
            })
        })
        .collect()
}

/// The convergent root of smallest modulus (negative first on ties).
pub fn select_convergent_root(
    roots: &[f64],
    order: usize,
    p: &SpeParams,
    convention: Convention,
) -> Result<f64> {
    if roots.is_empty() {
        return Err(Error::NoConvergentRoot(
            "no continuity roots to choose from".into(),
        ));
    }
    let candidates = assess_roots(roots, order, p, convention)?;
    candidates
        .iter()
        .filter(|c| c.converging)
        .min_by(|x, y| {
            x.a1.abs()
                .total_cmp(&y.a1.abs())
                .then_with(|| x.a1.total_cmp(&y.a1))
        })
        .map(|c| c.a1)
        .ok_or_else(|| {
            let listing = candidates
                .iter()
                .map(|c| format!("a1={:.6} tail_ratio={:.4}", c.a1, c.tail_ratio))
                .collect::<Vec<_>>()
                .join(", ");
            Error::NoConvergentRoot(format!("all candidates diverge ({listing})"))
        })
}

/// A truncated homoclinic series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSolution {
    pub params: SpeParams,
    pub alpha: f64,
    pub a1: f64,
    /// `a_1..a_M`; index `k − 1` holds `a_k`.
    pub coeffs: Vec<f64>,
    pub order: usize,
    pub convention: Convention,
}

impl SeriesSolution {
    pub fn new(a1: f64, order: usize, p: &SpeParams, convention: Convention) -> Result<Self> {
        let coeffs = series_coefficients(a1, order, p, convention)?;
        Ok(Self {
            params: *p,
            alpha: decay_exponent(p)?,
            a1,
            coeffs,
            order,
            convention,
        })
    }

    /// Wraps an explicit coefficient vector; even entries must be zero.
    pub fn from_coefficients(
        p: &SpeParams,
        coeffs: Vec<f64>,
        convention: Convention,
    ) -> Result<Self> {
        check_order(coeffs.len())?;
        if coeffs.iter().skip(1).step_by(2).any(|a| *a != 0.0) {
            return Err(Error::InvalidArgument(
                "even-index coefficients must vanish".into(),
            ));
        }
        Ok(Self {
            params: *p,
            alpha: decay_exponent(p)?,
            a1: coeffs[0],
            order: coeffs.len(),
            coeffs,
            convention,
        })
    }

    /// `a_k` for `1 ≤ k ≤ M`.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.coeffs[k - 1]
    }

    fn positive_branch(&self, z: f64) -> (f64, f64, f64) {
        let e = (self.alpha * z).exp();
        let mut power = 1.0;
        let (mut u, mut du, mut ddu) = (0.0, 0.0, 0.0);
        for (i, a) in self.coeffs.iter().enumerate() {
            power *= e;
            let rate = (i + 1) as f64 * self.alpha;
            let term = a * power;
            u += term;
            du += term * rate;
            ddu += term * rate * rate;
        }
        (u, du, ddu)
    }

    /// `(u, u', u'')` with exact termwise derivatives; odd extension for `z < 0`.
    pub fn derivatives(&self, z: f64) -> (f64, f64, f64) {
        if z >= 0.0 {
            self.positive_branch(z)
        } else {
            let (u, du, ddu) = self.positive_branch(-z);
            (-u, du, -ddu)
        }
    }

    pub fn evaluate(&self, z: f64) -> f64 {
        self.derivatives(z).0
    }

    /// CSV `k,a_k`.
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("k,a_k\n");
        for (i, a) in self.coeffs.iter().enumerate() {
            let row = csv_row(&[*a]);
            out.push_str(&format!("{},{}", i + 1, row));
        }
        out
    }

    /// CSV `z,u` over the grid.
    pub fn solution_csv(&self, grid: &[f64]) -> String {
        let values: Vec<f64> = grid.iter().map(|z| self.evaluate(*z)).collect();
        crate::output::two_column_csv(("z", "u"), grid, &values)
    }
}

/// The solution at `z` (odd extension for negative `z`).
pub fn evaluate_solution(s: &SeriesSolution, z: f64) -> f64 {
    s.evaluate(z)
}

/// Pointwise ODE residual of the truncated series on a grid.
pub fn residual_profile(s: &SeriesSolution, z_grid: &[f64]) -> Vec<f64> {
    z_grid
        .iter()
        .map(|&z| {
            let (u, du, ddu) = s.derivatives(z);
            ode_residual(u, du, ddu, &s.params)
        })
        .collect()
}

/// Maximum modulus of the ODE residual over the grid.
pub fn series_residual(s: &SeriesSolution, z_grid: &[f64]) -> f64 {
    residual_profile(s, z_grid)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}
