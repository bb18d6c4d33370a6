//! Jacobi last multiplier, Lagrangian and Hamiltonian of the traveling-wave equation.
//!
//! Writing the ODE as `u'' = f(u, u')`, a last multiplier satisfies
//! `d(log M)/dz + ∂f/∂u' = 0`, which here integrates to `M(u) = (γu² − 2c)²`. Then
//! `L = ½M(u)u'² − V(u)` with `V' = 2βu(γu² − 2c)` generates the equation, and the Legendre
//! transform gives `H = p²/(2M) + V`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::spe::SpeParams;

/// `√M := γu² − 2c`, the signed branch.
pub fn sqrt_multiplier(p: &SpeParams) -> Polynomial {
    Polynomial::new(vec![-2.0 * p.c(), 0.0, p.gamma()])
}

/// `M(u) = (γu² − 2c)²`.
pub fn jacobi_multiplier(p: &SpeParams) -> Polynomial {
    let root = sqrt_multiplier(p);
    &root * &root
}

/// `V(u) = βγu⁴/2 − 2βcu²`, normalized so that `V(0) = 0`.
pub fn potential(p: &SpeParams) -> Polynomial {
    let (b, c, g) = (p.beta(), p.c(), p.gamma());
    Polynomial::new(vec![0.0, 0.0, -2.0 * b * c, 0.0, 0.5 * b * g])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JlmBundle {
    pub multiplier: Polynomial,
    pub potential: Polynomial,
    pub params: SpeParams,
}

impl JlmBundle {
    pub fn new(p: &SpeParams) -> Self {
        Self {
            multiplier: jacobi_multiplier(p),
            potential: potential(p),
            params: *p,
        }
    }
}

/// `L(u, u') = ½M(u)u'² − V(u)`.
pub fn lagrangian(u: f64, du: f64, b: &JlmBundle) -> f64 {
    0.5 * b.multiplier.eval(u) * du * du - b.potential.eval(u)
}

/// `p = ∂L/∂u' = M(u)u'`.
pub fn conjugate_momentum(u: f64, du: f64, b: &JlmBundle) -> f64 {
    b.multiplier.eval(u) * du
}

/// `H = p²/(2M(u)) + V(u)`; undefined on a singular line.
pub fn hamiltonian(u: f64, momentum: f64, b: &JlmBundle) -> Result<f64> {
    let root = sqrt_multiplier(&b.params);
    let g = root.eval(u);
    let scale = b.params.gamma().abs() * u * u + 2.0 * b.params.c().abs();
    if g.abs() <= 4.0 * f64::EPSILON * scale {
        return Err(Error::OnSingularLine(u));
    }
    Ok(momentum * momentum / (2.0 * g * g) + b.potential.eval(u))
}

/// Euler–Lagrange expression `M u'' + ½M'u'² + V'`.
///
/// For this Lagrangian it equals `(γu² − 2c)` times the ODE residual.
pub fn euler_lagrange_residual(u: f64, du: f64, ddu: f64, b: &JlmBundle) -> f64 {
    let m = b.multiplier.eval(u);
    let dm = b.multiplier.derivative().eval(u);
    let dv = b.potential.derivative().eval(u);
    m * ddu + 0.5 * dm * du * du + dv
}

/// Outcome of the harmonic-oscillator linearization test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Isochronicity {
    /// `V'/√M`.
    pub q_from_potential: Polynomial,
    /// `∫√M du`.
    pub q_from_multiplier: Polynomial,
    /// The two candidate canonical coordinates coincide.
    pub sho_mappable: bool,
}

/// Checks whether `Q = ∫√M du` turns the potential into `Q²/2` form, i.e. whether
/// `V'(u)/√M(u) = Q(u)`.
pub fn isochronicity_check(p: &SpeParams) -> Isochronicity {
    // V' = 2βu·√M identically, so the quotient is exact and taken in closed form.
    let q_from_potential = Polynomial::new(vec![0.0, 2.0 * p.beta()]);
    let q_from_multiplier = sqrt_multiplier(p).antiderivative();
    let sho_mappable = q_from_potential == q_from_multiplier;
    Isochronicity {
        q_from_potential,
        q_from_multiplier,
        sho_mappable,
    }
}
