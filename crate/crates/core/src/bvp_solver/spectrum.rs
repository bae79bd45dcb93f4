//! Smallest eigenvalue of the linearisation `Lv = -εv'' + f'(φ)v` with
//! homogeneous Robin rows.

use super::newton::solve_bordered_tridiagonal;
use super::BvpSolution;
use crate::branch_algebra::Interval;
use crate::error::{Error, Result};
use crate::rhs_assembly::RhsFunction;

const INVERSE_STEPS: usize = 4;

/// Symmetric tridiagonal form of `L` on the interior nodes. The boundary
/// values are eliminated through the Robin rows.
fn interior_operator(solution: &BvpSolution, rhs: &RhsFunction) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = solution.values.len();
    if n < 5 {
        return Err(Error::Length {
            what: "nodes for the eigenvalue problem",
            got: n,
            expected: 5,
        });
    }
    let h = solution.spacing();
    let r = solution.epsilon / (h * h);
    let eta = solution.bc.eta;
    let a = 4.0 * eta / (2.0 * h + 3.0 * eta);
    let b = -eta / (2.0 * h + 3.0 * eta);
    let m = n - 2;
    let mut diag = Vec::with_capacity(m);
    for i in 1..n - 1 {
        diag.push(2.0 * r + rhs.derivative(solution.values[i])?);
    }
    diag[0] -= r * a;
    diag[m - 1] -= r * a;
    let mut off = vec![-r; m - 1];
    let edge = -r * (1.0 + b).sqrt();
    off[0] = edge;
    off[m - 2] = edge;
    Ok((diag, off))
}

/// Eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if i == 0 { 0.0 } else { e2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (diag[i].abs() + x.abs() + f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

pub fn linearized_smallest_eigenvalue(solution: &BvpSolution, rhs: &RhsFunction) -> Result<f64> {
    let (diag, off) = interior_operator(solution, rhs)?;
    let m = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < m { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    while hi - lo > 4.0 * f64::EPSILON * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&diag, &off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let shift = lo - 1e-9 * scale;
    let mut v = vec![1.0; m];
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..INVERSE_STEPS {
        let d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut sub = vec![0.0; m];
        let mut sup = vec![0.0; m];
        sub[1..].copy_from_slice(&off);
        sup[..m - 1].copy_from_slice(&off);
        let w = solve_bordered_tridiagonal(sub, d, sup, 0.0, 0.0, v.clone());
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        v = w.into_iter().map(|x| x / norm).collect();
        let mut av = 0.0;
        for i in 0..m {
            let mut t = diag[i] * v[i];
            if i > 0 {
                t += off[i - 1] * v[i - 1];
            }
            if i + 1 < m {
                t += off[i] * v[i + 1];
            }
            av += v[i] * t;
        }
        lambda = av;
    }
    Ok(lambda)
}

/// `μ0 = min f'` over the range of the profile, including the node values.
pub fn stability_floor(solution: &BvpSolution, rhs: &RhsFunction) -> Result<f64> {
    let sampled = rhs.min_derivative(Interval::new(solution.min_value(), solution.max_value()), 401)?;
    let mut m = sampled;
    for &v in &solution.values {
        m = m.min(rhs.derivative(v)?);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::super::{solve, BvpProblem, RobinBC};
    use super::*;

    fn linear() -> RhsFunction {
        RhsFunction::with_root(Interval::new(f64::NEG_INFINITY, f64::INFINITY), 0.0, |x| (x, 1.0))
    }

    #[test]
    fn dirichlet_linear_spectrum() {
        let p = BvpProblem::new(1.0, linear(), RobinBC::dirichlet(1.0, 1.0).unwrap(), Some(2001)).unwrap();
        let s = solve(&p).unwrap();
        let lam = linearized_smallest_eigenvalue(&s, &linear()).unwrap();
        let want = 1.0 + (std::f64::consts::PI / 2.0).powi(2);
        assert!((lam - want).abs() < 1e-3, "{lam}");
    }

    #[test]
    fn refinement_is_second_order() {
        let lam = |n| {
            let p = BvpProblem::new(1.0, linear(), RobinBC::dirichlet(1.0, 1.0).unwrap(), Some(n)).unwrap();
            linearized_smallest_eigenvalue(&solve(&p).unwrap(), &linear()).unwrap()
        };
        let want = 1.0 + (std::f64::consts::PI / 2.0).powi(2);
        let e1 = (lam(101) - want).abs();
        let e2 = (lam(201) - want).abs();
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn robin_spectrum_matches_transcendental_root() {
        // eigenfunction cos(kx) with cos k - ηk sin k = 0, i.e. k tan k = 1/η
        let eta = 0.5;
        let p = BvpProblem::new(1.0, linear(), RobinBC::new(1.0, 1.0, eta).unwrap(), Some(4001)).unwrap();
        let s = solve(&p).unwrap();
        let lam = linearized_smallest_eigenvalue(&s, &linear()).unwrap();
        let (mut a, mut b) = (1e-9, std::f64::consts::FRAC_PI_2 - 1e-9);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m * m.tan() < 1.0 / eta {
                a = m;
            } else {
                b = m;
            }
        }
        let k = 0.5 * (a + b);
        assert!((lam - (1.0 + k * k)).abs() < 1e-4, "{lam} vs {}", 1.0 + k * k);
    }

    #[test]
    fn needs_five_nodes() {
        let p = BvpProblem::new(1.0, linear(), RobinBC::dirichlet(1.0, 1.0).unwrap(), Some(4)).unwrap();
        let s = solve(&p).unwrap();
        assert!(linearized_smallest_eigenvalue(&s, &linear()).is_err());
    }
}
