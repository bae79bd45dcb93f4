//! Damped Newton iteration on the discrete system.

use super::{BvpOptions, BvpProblem, DAMPING_FLOOR, MAX_CONSECUTIVE_CLAMPS, RESIDUAL_TOLERANCE};
use crate::error::{Error, Result};
use crate::grid::spacing;

const ARMIJO: f64 = 1e-4;
const ROUNDOFF_FACTOR: f64 = 64.0;

pub(super) struct NewtonOutcome {
    pub values: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
}

struct Evaluation {
    residual: Vec<f64>,
    slopes: Vec<f64>,
    norm: f64,
    tolerance: f64,
}

struct System<'a> {
    problem: &'a BvpProblem,
    options: &'a BvpOptions,
    h: f64,
}

impl System<'_> {
    fn evaluate(&self, phi: &[f64]) -> Result<Evaluation> {
        let n = phi.len();
        let rhs = &self.problem.rhs;
        let pairs = self.options.execution.map(phi, |&v| rhs.eval(v));
        let mut f = Vec::with_capacity(n);
        let mut slopes = Vec::with_capacity(n);
        for p in pairs {
            let (a, b) = p?;
            f.push(a);
            slopes.push(b);
        }
        let eps = self.problem.epsilon;
        let r = eps / (self.h * self.h);
        let bc = &self.problem.bc;
        let k = bc.eta / (2.0 * self.h);
        let mut residual = vec![0.0; n];
        let mut fscale: f64 = 0.0;
        let mut opscale: f64 = 0.0;
        residual[0] = phi[0] - k * (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) - bc.phi0_left;
        residual[n - 1] = phi[n - 1] + k * (3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3]) - bc.phi0_right;
        opscale = opscale
            .max(phi[0].abs() + k * (3.0 * phi[0].abs() + 4.0 * phi[1].abs() + phi[2].abs()) + bc.phi0_left.abs())
            .max(
                phi[n - 1].abs()
                    + k * (3.0 * phi[n - 1].abs() + 4.0 * phi[n - 2].abs() + phi[n - 3].abs())
                    + bc.phi0_right.abs(),
            );
        for i in 1..n - 1 {
            residual[i] = r * (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]) - f[i];
            fscale = fscale.max(f[i].abs());
            opscale = opscale.max(r * (phi[i - 1].abs() + 2.0 * phi[i].abs() + phi[i + 1].abs()) + f[i].abs());
        }
        let norm = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tolerance = (RESIDUAL_TOLERANCE * fscale.max(1.0)).max(ROUNDOFF_FACTOR * f64::EPSILON * opscale);
        Ok(Evaluation {
            residual,
            slopes,
            norm: if norm.is_finite() { norm } else { f64::INFINITY },
            tolerance,
        })
    }

    /// Solves `J δ = -F` for the Newton correction.
    fn correction(&self, ev: &Evaluation) -> Vec<f64> {
        let n = ev.residual.len();
        let r = self.problem.epsilon / (self.h * self.h);
        let k = self.problem.bc.eta / (2.0 * self.h);
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        diag[0] = 1.0 + 3.0 * k;
        sup[0] = -4.0 * k;
        let corner_left = k;
        diag[n - 1] = 1.0 + 3.0 * k;
        sub[n - 1] = -4.0 * k;
        let corner_right = k;
        for i in 1..n - 1 {
            sub[i] = r;
            diag[i] = -2.0 * r - ev.slopes[i];
            sup[i] = r;
        }
        let rhs: Vec<f64> = ev.residual.iter().map(|v| -v).collect();
        solve_bordered_tridiagonal(sub, diag, sup, corner_left, corner_right, rhs)
    }
}

/// Solves a tridiagonal system whose first row also has an entry in column 2
/// and whose last row has one in column `n - 3`.
///
/// `sub[i]` multiplies `x[i-1]`, `sup[i]` multiplies `x[i+1]`.
pub(super) fn solve_bordered_tridiagonal(
    mut sub: Vec<f64>,
    mut diag: Vec<f64>,
    mut sup: Vec<f64>,
    corner_left: f64,
    corner_right: f64,
    mut rhs: Vec<f64>,
) -> Vec<f64> {
    let n = diag.len();
    if corner_left != 0.0 {
        let m = corner_left / sup[1];
        diag[0] -= m * sub[1];
        sup[0] -= m * diag[1];
        rhs[0] -= m * rhs[1];
    }
    if corner_right != 0.0 {
        let m = corner_right / sub[n - 2];
        sub[n - 1] -= m * diag[n - 2];
        diag[n - 1] -= m * sup[n - 2];
        rhs[n - 1] -= m * rhs[n - 2];
    }
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    }
    x
}

/// Sup norm of the discrete residual of `values` on a uniform grid.
pub(super) fn residual_norm(problem: &BvpProblem, values: &[f64]) -> Result<f64> {
    let options = BvpOptions::default();
    let system = System {
        problem,
        options: &options,
        h: 2.0 / (values.len() - 1) as f64,
    };
    Ok(system.evaluate(values)?.norm)
}

pub(super) fn run(problem: &BvpProblem, nodes: &[f64], guess: Vec<f64>, options: &BvpOptions) -> Result<NewtonOutcome> {
    let system = System {
        problem,
        options,
        h: spacing(nodes),
    };
    let domain = problem.rhs.domain();
    let mut phi: Vec<f64> = guess.into_iter().map(|v| domain.clamp(v)).collect();
    let mut ev = system.evaluate(&phi)?;
    let mut clamps = 0usize;
    let mut iterations = 0usize;
    while ev.norm > ev.tolerance {
        if iterations >= options.max_iterations {
            return Err(Error::Nonconvergence {
                iterations,
                residual: ev.norm,
                tolerance: ev.tolerance,
            });
        }
        iterations += 1;
        let delta = system.correction(&ev);
        let mut t = 1.0;
        loop {
            let mut clamped = false;
            let trial: Vec<f64> = phi
                .iter()
                .zip(&delta)
                .map(|(p, d)| {
                    let v = p + t * d;
                    let c = domain.clamp(v);
                    if c != v {
                        clamped = true;
                    }
                    c
                })
                .collect();
            let trial_ev = match system.evaluate(&trial) {
                Ok(e) => Some(e),
                Err(Error::Domain { .. }) => None,
                Err(e) => return Err(e),
            };
            if let Some(te) = trial_ev {
                if te.norm <= (1.0 - ARMIJO * t) * ev.norm {
                    clamps = if clamped { clamps + 1 } else { 0 };
                    if clamps > MAX_CONSECUTIVE_CLAMPS {
                        return Err(Error::DomainEscape {
                            clamps,
                            lo: domain.lo,
                            hi: domain.hi,
                        });
                    }
                    phi = trial;
                    ev = te;
                    break;
                }
            }
            t *= 0.5;
            if t < DAMPING_FLOOR {
                return Err(Error::Nonconvergence {
                    iterations,
                    residual: ev.norm,
                    tolerance: ev.tolerance,
                });
            }
        }
    }
    Ok(NewtonOutcome {
        values: phi,
        residual: ev.norm,
        tolerance: ev.tolerance,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut r = b.to_vec();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, p);
            r.swap(c, p);
            for i in c + 1..n {
                let w = m[i][c] / m[c][c];
                for j in c..n {
                    m[i][j] -= w * m[c][j];
                }
                r[i] -= w * r[c];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
            x[i] = (r[i] - s) / m[i][i];
        }
        x
    }

    #[test]
    fn bordered_solver_matches_dense_elimination() {
        for n in [3usize, 4, 9] {
            let sub: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
            let diag: Vec<f64> = (0..n).map(|i| -4.0 - 0.3 * i as f64).collect();
            let sup: Vec<f64> = (0..n).map(|i| 1.2 - 0.05 * i as f64).collect();
            let (cl, cr) = (0.7, -0.4);
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
            let mut a = vec![vec![0.0; n]; n];
            for i in 0..n {
                a[i][i] = diag[i];
                if i > 0 {
                    a[i][i - 1] = sub[i];
                }
                if i + 1 < n {
                    a[i][i + 1] = sup[i];
                }
            }
            a[0][2] += cl;
            a[n - 1][n - 3] += cr;
            let want = dense_solve(&a, &b);
            let got = solve_bordered_tridiagonal(sub, diag, sup, cl, cr, b);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "n={n}: {g} vs {w}");
            }
        }
    }
}
