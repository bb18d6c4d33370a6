//! Finite-difference Newton and Levenberg–Marquardt solvers in two unknowns.

use crate::error::{Error, Result};

/// Relative step of the central differences: `h = FD_STEP · max(1, |x|)`.
pub const FD_STEP: f64 = 1e-6;
/// Step for differentiating a finite-difference gradient a second time.
const HESSIAN_STEP: f64 = 1e-5;

fn step_for(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

/// Central-difference gradient of a scalar function.
pub fn gradient<F>(f: &F, x: [f64; 2]) -> Result<[f64; 2]>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let mut g = [0.0; 2];
    for i in 0..2 {
        let h = step_for(x[i], FD_STEP);
        let (mut xp, mut xm) = (x, x);
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp)? - f(xm)?) / (2.0 * h);
    }
    Ok(g)
}

/// Central-difference Jacobian of the finite-difference gradient.
pub fn hessian<F>(f: &F, x: [f64; 2]) -> Result<[[f64; 2]; 2]>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let mut h = [[0.0; 2]; 2];
    for j in 0..2 {
        let d = step_for(x[j], HESSIAN_STEP);
        let (mut xp, mut xm) = (x, x);
        xp[j] += d;
        xm[j] -= d;
        let (gp, gm) = (gradient(f, xp)?, gradient(f, xm)?);
        for i in 0..2 {
            h[i][j] = (gp[i] - gm[i]) / (2.0 * d);
        }
    }
    Ok(h)
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn solve2(m: &[[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = det2(m);
    let scale = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    if det == 0.0 || !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
        return None;
    }
    Some([
        (b[0] * m[1][1] - b[1] * m[0][1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

fn l1(v: [f64; 2]) -> f64 {
    v[0].abs() + v[1].abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub x: [f64; 2],
    pub value: f64,
    /// `|∂f/∂x₀| + |∂f/∂x₁|` at `x`.
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Damped Newton iteration for `∇f = 0`.
///
/// Each step is halved until it lowers the gradient norm and stays inside `admissible`.
/// Converged when the L1 gradient norm drops below `tol`.
pub fn stationary_point<F, A>(
    f: &F,
    start: [f64; 2],
    admissible: A,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryPoint>
where
    F: Fn([f64; 2]) -> Result<f64>,
    A: Fn([f64; 2]) -> bool,
{
    let mut x = start;
    let mut g = gradient(f, x)?;
    for iter in 0..max_iter {
        let norm = l1(g);
        if norm < tol {
            return Ok(StationaryPoint {
                x,
                value: f(x)?,
                gradient_norm: norm,
                iterations: iter,
            });
        }
        let h = hessian(f, x)?;
        let d = solve2(&h, [-g[0], -g[1]]).ok_or(Error::SingularStep)?;
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-4 {
            let xn = [x[0] + t * d[0], x[1] + t * d[1]];
            if admissible(xn) {
                let gn = gradient(f, xn)?;
                if l1(gn) < norm {
                    accepted = Some((xn, gn));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, gn)) => {
                x = xn;
                g = gn;
            }
            None => {
                // No descent in the gradient norm; take the shortest admissible trial step.
                let xn = [x[0] + t * d[0], x[1] + t * d[1]];
                if !admissible(xn) {
                    return Err(Error::SingularStep);
                }
                x = xn;
                g = gradient(f, x)?;
            }
        }
    }
    let norm = l1(g);
    if norm < tol {
        return Ok(StationaryPoint {
            x,
            value: f(x)?,
            gradient_norm: norm,
            iterations: max_iter,
        });
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: norm,
    })
}

/// Result of a least-squares solve of three equations in two unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeastSquares {
    pub x: [f64; 2],
    pub residual: [f64; 3],
    pub iterations: usize,
}

impl LeastSquares {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

fn jacobian3<F>(f: &F, x: [f64; 2]) -> Result<[[f64; 2]; 3]>
where
    F: Fn([f64; 2]) -> Result<[f64; 3]>,
{
    let mut j = [[0.0; 2]; 3];
    for k in 0..2 {
        let h = step_for(x[k], FD_STEP);
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        let (rp, rm) = (f(xp)?, f(xm)?);
        for i in 0..3 {
            j[i][k] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn sum_sq(r: &[f64; 3]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg–Marquardt minimization of `|r(x)|²`, stopping early once `max |r_i| < tol`.
///
/// Returns the final iterate whether or not it is a root; the caller judges the residual.
pub fn levenberg_marquardt<F, A>(
    f: &F,
    start: [f64; 2],
    admissible: A,
    tol: f64,
    max_iter: usize,
) -> Result<LeastSquares>
where
    F: Fn([f64; 2]) -> Result<[f64; 3]>,
    A: Fn([f64; 2]) -> bool,
{
    let mut x = start;
    let mut r = f(x)?;
    let mut lambda = 1e-3;
    for iter in 0..max_iter {
        if r.iter().all(|v| v.abs() < tol) {
            return Ok(LeastSquares {
                x,
                residual: r,
                iterations: iter,
            });
        }
        let j = jacobian3(f, x)?;
        let mut jtj = [[0.0; 2]; 2];
        let mut jtr = [0.0; 2];
        for row in 0..3 {
            for a in 0..2 {
                jtr[a] += j[row][a] * r[row];
                for b in 0..2 {
                    jtj[a][b] += j[row][a] * j[row][b];
                }
            }
        }
        let current = sum_sq(&r);
        let mut improved = false;
        while lambda < 1e12 {
            let damped = [
                [jtj[0][0] * (1.0 + lambda), jtj[0][1]],
                [jtj[1][0], jtj[1][1] * (1.0 + lambda)],
            ];
            if let Some(d) = solve2(&damped, [-jtr[0], -jtr[1]]) {
                let xn = [x[0] + d[0], x[1] + d[1]];
                if admissible(xn) {
                    let rn = f(xn)?;
                    if sum_sq(&rn) < current {
                        let tiny = (d[0].abs() + d[1].abs()) <= 1e-15 * (x[0].abs() + x[1].abs());
                        x = xn;
                        r = rn;
                        lambda = (lambda * 0.3).max(1e-12);
                        improved = !tiny;
                        break;
                    }
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            return Ok(LeastSquares {
                x,
                residual: r,
                iterations: iter + 1,
            });
        }
    }
    Ok(LeastSquares {
        x,
        residual: r,
        iterations: max_iter,
    })
}
