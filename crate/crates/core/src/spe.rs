//! Parameters and defining functions of the generalized short-pulse equation
//!
//! ```text
//! u_xt = β u + (γ/6) (u³)_xx
//! ```
//!
//! in the traveling-wave frame `z = x + c t`, where it reduces to
//!
//! ```text
//! (γ u² − 2c) u'' + 2u (β + γ u'²) = 0.
//! ```
//!
//! Written as the singular planar system `u' = y`, `y' = −(G'(u) y² + F(u)) / G(u)` with
//! `F(u) = −2βu` and `G(u) = 2c − γu²`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result};

/// Wave speed and coefficients of the generalized short-pulse equation.
///
/// Immutable once built; every field is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SpeParams {
    c: f64,
    beta: f64,
    gamma: f64,
}

#[derive(Deserialize)]
struct RawParams {
    c: f64,
    #[serde(default = "one")]
    beta: f64,
    #[serde(default = "one")]
    gamma: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawParams> for SpeParams {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SpeParams::new(raw.c, raw.beta, raw.gamma)
    }
}

impl SpeParams {
    pub fn new(c: f64, beta: f64, gamma: f64) -> Result<Self> {
        ensure_finite("c", c)?;
        ensure_finite("beta", beta)?;
        ensure_finite("gamma", gamma)?;
        Ok(Self { c, beta, gamma })
    }

    /// The base equation, β = γ = 1.
    pub fn base(c: f64) -> Result<Self> {
        Self::new(c, 1.0, 1.0)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// True when the regular equilibrium at the origin is a saddle (βc > 0).
    pub fn is_saddle(&self) -> bool {
        self.beta * self.c > 0.0
    }
}

/// A point `(u, y = du/dz)` of the traveling-wave phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(u: f64, y: f64) -> Result<Self> {
        ensure_finite("u", u)?;
        ensure_finite("y", y)?;
        Ok(Self { u, y })
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Neg for PhasePoint {
    type Output = PhasePoint;

    fn neg(self) -> PhasePoint {
        PhasePoint {
            u: -self.u,
            y: -self.y,
        }
    }
}

/// `F(u) = −2βu`.
pub fn eval_f(u: f64, p: &SpeParams) -> f64 {
    -2.0 * p.beta * u
}

/// `G(u) = 2c − γu²`; its zeros are the singular lines.
pub fn eval_g(u: f64, p: &SpeParams) -> f64 {
    2.0 * p.c - p.gamma * u * u
}

/// `G'(u) = −2γu`.
pub fn eval_g_prime(u: f64, p: &SpeParams) -> f64 {
    -2.0 * p.gamma * u
}

/// Left-hand side of the traveling-wave ODE, zero exactly on solutions.
pub fn ode_residual(u: f64, du: f64, ddu: f64, p: &SpeParams) -> f64 {
    (p.gamma * u * u - 2.0 * p.c) * ddu + 2.0 * u * (p.beta + p.gamma * du * du)
}

/// Conserved energy `½(γu² − 2c)² y² + βγu⁴/2 − 2βc u²` of the traveling-wave system.
///
/// This is the Hamiltonian generated by the Jacobi last multiplier `M = G²`; it is shared by the
/// singular system and its regularization since both trace the same orbits.
pub fn first_integral(pt: PhasePoint, p: &SpeParams) -> f64 {
    let g = p.gamma * pt.u * pt.u - 2.0 * p.c;
    let u2 = pt.u * pt.u;
    0.5 * g * g * pt.y * pt.y + 0.5 * p.beta * p.gamma * u2 * u2 - 2.0 * p.beta * p.c * u2
}
