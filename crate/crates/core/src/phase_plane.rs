//! Singular phase-plane analysis of the traveling-wave system.
//!
//! Orbits are integrated on the regularized system
//!
//! ```text
//! du/dξ = y G(u),   dy/dξ = −(G'(u) y² + F(u)) = 2u (β + γ y²)
//! ```
//!
//! obtained from the time change `dz = G(u) dξ`. The singular lines `G(u) = 0` are invariant
//! under the regularized flow; recovering `z` along a trace exposes finite-time breaking.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spe::{eval_f, eval_g, eval_g_prime, PhasePoint, SpeParams};

/// States with `|u|` or `|y|` above this bound terminate an integration.
pub const OVERFLOW_BOUND: f64 = 1e6;
/// A trace ending within this distance of a singular line is a breaking candidate.
pub const BREAKING_LINE_TOLERANCE: f64 = 1e-4;
/// The last `BREAKING_WINDOW` slow-time increments must sum below this for a breaking point.
pub const BREAKING_INCREMENT_TOLERANCE: f64 = 1e-6;
pub const BREAKING_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumType {
    Saddle,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveClass {
    /// Saddle whose manifolds run into singular lines: one-sided breaking kink/anti-kink.
    BreakingKinkPair,
    /// Saddle with no singular lines.
    SmoothHomoclinicCandidate,
    /// Center with no singular equilibria: closed loops around the origin.
    ClosedOrbits,
    /// Center with four singular equilibria on the singular lines.
    PeriodicCuspWaves,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseClassification {
    pub singular_lines: Vec<f64>,
    pub regular_equilibrium_type: EquilibriumType,
    pub singular_equilibria: Vec<PhasePoint>,
    pub wave_class: WaveClass,
    pub eigenvalues_at_origin: [Complex64; 2],
}

#[derive(Serialize)]
struct ClassificationJson<'a> {
    singular_lines: &'a [f64],
    equilibrium_type: EquilibriumType,
    singular_equilibria: Vec<[f64; 2]>,
    wave_class: WaveClass,
    eigenvalues: Vec<[f64; 2]>,
}

impl PhaseClassification {
    /// JSON object with keys `singular_lines`, `equilibrium_type`, `singular_equilibria`,
    /// `wave_class` and `eigenvalues` (each eigenvalue as `[re, im]`).
    pub fn to_json(&self) -> serde_json::Value {
        let view = ClassificationJson {
            singular_lines: &self.singular_lines,
            equilibrium_type: self.regular_equilibrium_type,
            singular_equilibria: self
                .singular_equilibria
                .iter()
                .map(|q| [q.u, q.y])
                .collect(),
            wave_class: self.wave_class,
            eigenvalues: self
                .eigenvalues_at_origin
                .iter()
                .map(|l| [l.re, l.im])
                .collect(),
        };
        serde_json::to_value(view).expect("classification is always serializable")
    }
}

/// A sampled orbit of the regularized system.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTrace {
    /// Fast-time samples, strictly monotone.
    pub xi: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// Slow-time samples, present after [`slow_time_reparametrize`].
    pub z: Option<Vec<f64>>,
    /// The integration stopped early on the overflow guard.
    pub escaped: bool,
    /// Finite slow time `z̃` at which the orbit reaches a singular line, if detected.
    pub breaking_point: Option<f64>,
}

impl OrbitTrace {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn last(&self) -> Option<PhasePoint> {
        self.points.last().copied()
    }

    /// CSV with header `xi,u,y` (or `xi,u,y,z` once reparametrized).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.z.is_some() {
            "xi,u,y,z\n"
        } else {
            "xi,u,y\n"
        });
        for (i, (xi, pt)) in self.xi.iter().zip(&self.points).enumerate() {
            match &self.z {
                Some(z) => out.push_str(&crate::output::csv_row(&[*xi, pt.u, pt.y, z[i]])),
                None => out.push_str(&crate::output::csv_row(&[*xi, pt.u, pt.y])),
            }
        }
        out
    }
}

/// Zeros of `G`: `±√(2c/γ)` when `cγ > 0`, the single line `0` when `c = 0`, else none.
pub fn singular_lines(p: &SpeParams) -> Vec<f64> {
    let (c, gamma) = (p.c(), p.gamma());
    if c * gamma > 0.0 {
        let us = (2.0 * c / gamma).sqrt();
        vec![us, -us]
    } else if c == 0.0 && gamma != 0.0 {
        vec![0.0]
    } else {
        Vec::new()
    }
}

/// Eigenvalues of the Jacobian `[[0, 2c], [2β, 0]]` of the regularized system at the origin,
/// `±√(4βc)`, positive (or positive-imaginary) root first.
pub fn eigenvalues_at_origin(p: &SpeParams) -> [Complex64; 2] {
    let disc = 4.0 * p.beta() * p.c();
    let root = if disc >= 0.0 {
        Complex64::new(disc.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-disc).sqrt())
    };
    [root, -root]
}

pub fn classify(p: &SpeParams) -> Result<PhaseClassification> {
    if p.beta() == 0.0 {
        return Err(Error::Degenerate("beta = 0: F vanishes identically".into()));
    }
    if p.c() == 0.0 && p.gamma() == 0.0 {
        return Err(Error::Degenerate(
            "c = gamma = 0: G vanishes identically".into(),
        ));
    }
    let lines = singular_lines(p);
    let equilibrium = if p.is_saddle() {
        EquilibriumType::Saddle
    } else {
        EquilibriumType::Center
    };

    // Y = −F(u_s)/G'(u_s) = −β/γ; real singular equilibria need Y > 0 on genuine lines.
    let mut singular_equilibria = Vec::new();
    if p.c() * p.gamma() > 0.0 {
        let y_sq = -p.beta() / p.gamma();
        if y_sq > 0.0 {
            let y = y_sq.sqrt();
            for &us in &lines {
                singular_equilibria.push(PhasePoint { u: us, y });
                singular_equilibria.push(PhasePoint { u: us, y: -y });
            }
        }
    }

    let wave_class = if p.c() == 0.0 {
        WaveClass::BreakingKinkPair
    } else {
        match (
            equilibrium,
            lines.is_empty(),
            singular_equilibria.is_empty(),
        ) {
            (EquilibriumType::Saddle, false, _) => WaveClass::BreakingKinkPair,
            (EquilibriumType::Saddle, true, _) => WaveClass::SmoothHomoclinicCandidate,
            (EquilibriumType::Center, _, true) => WaveClass::ClosedOrbits,
            (EquilibriumType::Center, _, false) => WaveClass::PeriodicCuspWaves,
        }
    };

    Ok(PhaseClassification {
        singular_lines: lines,
        regular_equilibrium_type: equilibrium,
        singular_equilibria,
        wave_class,
        eigenvalues_at_origin: eigenvalues_at_origin(p),
    })
}

/// Vector field of the regularized system.
pub fn regularized_field(pt: PhasePoint, p: &SpeParams) -> PhasePoint {
    PhasePoint {
        u: pt.y * eval_g(pt.u, p),
        y: -(eval_g_prime(pt.u, p) * pt.y * pt.y + eval_f(pt.u, p)),
    }
}

fn rk4_step(pt: PhasePoint, h: f64, p: &SpeParams) -> PhasePoint {
    let shift = |base: PhasePoint, k: PhasePoint, s: f64| PhasePoint {
        u: base.u + s * k.u,
        y: base.y + s * k.y,
    };
    let k1 = regularized_field(pt, p);
    let k2 = regularized_field(shift(pt, k1, 0.5 * h), p);
    let k3 = regularized_field(shift(pt, k2, 0.5 * h), p);
    let k4 = regularized_field(shift(pt, k3, h), p);
    PhasePoint {
        u: pt.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
        y: pt.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
    }
}

/// Fixed-step RK4 trace of the regularized system from `start` to fast time `xi_end`.
///
/// A negative `xi_end` integrates backwards. The number of steps is `round(|xi_end| / step)`.
/// If a step leaves the box `|u|, |y| ≤ OVERFLOW_BOUND` (or produces a non-finite state) the
/// trace ends at the last admissible sample and `escaped` is set.
pub fn integrate_orbit(
    p: &SpeParams,
    start: PhasePoint,
    xi_end: f64,
    step: f64,
) -> Result<OrbitTrace> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    if !xi_end.is_finite() {
        return Err(Error::NonFinite {
            name: "xi_end",
            value: xi_end,
        });
    }
    if !start.is_finite() {
        return Err(Error::InvalidArgument("start point must be finite".into()));
    }
    let steps = (xi_end.abs() / step).round() as usize;
    let h = step * xi_end.signum();

    let mut xi = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    xi.push(0.0);
    points.push(start);
    let mut escaped = false;
    let mut state = start;
    for i in 1..=steps {
        let next = rk4_step(state, h, p);
        if !next.is_finite() || next.u.abs() > OVERFLOW_BOUND || next.y.abs() > OVERFLOW_BOUND {
            escaped = true;
            break;
        }
        state = next;
        xi.push(i as f64 * h);
        points.push(state);
    }
    Ok(OrbitTrace {
        xi,
        points,
        z: None,
        escaped,
        breaking_point: None,
    })
}

/// Recovers slow time along a trace by trapezoidal quadrature of `dz = G(u) dξ`.
///
/// A breaking point is reported when the trace ends within [`BREAKING_LINE_TOLERANCE`] of a
/// singular line and the last [`BREAKING_WINDOW`] increments of `z` sum (in modulus) below
/// [`BREAKING_INCREMENT_TOLERANCE`]; `z̃` is then the final slow-time sample.
pub fn slow_time_reparametrize(trace: &OrbitTrace, p: &SpeParams) -> Result<OrbitTrace> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if trace.z.is_some() {
        return Err(Error::AlreadyReparametrized);
    }
    let mut z = Vec::with_capacity(trace.len());
    z.push(0.0);
    for i in 1..trace.len() {
        let g0 = eval_g(trace.points[i - 1].u, p);
        let g1 = eval_g(trace.points[i].u, p);
        let dxi = trace.xi[i] - trace.xi[i - 1];
        z.push(z[i - 1] + 0.5 * (g0 + g1) * dxi);
    }

    let mut breaking_point = None;
    let n = z.len();
    if n > BREAKING_WINDOW {
        let last_u = trace.points[n - 1].u;
        let near_line = singular_lines(p)
            .iter()
            .any(|us| (last_u - us).abs() < BREAKING_LINE_TOLERANCE);
        let tail = (z[n - 1] - z[n - 1 - BREAKING_WINDOW]).abs();
        if near_line && tail < BREAKING_INCREMENT_TOLERANCE {
            breaking_point = Some(z[n - 1]);
        }
    }

    Ok(OrbitTrace {
        z: Some(z),
        breaking_point,
        ..trace.clone()
    })
}

/// Start point on the unstable manifold of a saddle origin, a distance `offset` from it.
///
/// `branch` selects the direction along the eigenvector (+1 or −1).
pub fn unstable_manifold_seed(p: &SpeParams, offset: f64, branch: f64) -> Result<PhasePoint> {
    if !p.is_saddle() {
        return Err(Error::NotSaddle(p.beta() * p.c()));
    }
    // Eigenvector of [[0, 2c], [2β, 0]] for λ = +2√(βc) is (2c, λ).
    let lambda = 2.0 * (p.beta() * p.c()).sqrt();
    let (du, dy) = (2.0 * p.c(), lambda);
    let norm = du.hypot(dy);
    PhasePoint::new(branch * offset * du / norm, branch * offset * dy / norm)
}
