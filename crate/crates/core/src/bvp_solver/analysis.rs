//! Qualitative checks on computed profiles: case classification, bounds,
//! Robin residuals, the comparison envelope and boundary-layer limits.

use super::{BvpSolution, RobinBC};
use crate::branch_algebra::Interval;
use crate::error::{check_finite, Error, Result};
use crate::grid::derivative;
use crate::quadrature::adaptive_simpson;
use crate::rhs_assembly::RhsFunction;

/// Tolerance for monotonicity and bound checks on discrete profiles.
pub const CLASSIFICATION_SLACK: f64 = 1e-8;
const ENVELOPE_SAMPLES: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    InteriorMin,
    InteriorMax,
    Increasing,
    Decreasing,
    Constant,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::InteriorMin => "interior-min",
            Classification::InteriorMax => "interior-max",
            Classification::Increasing => "increasing",
            Classification::Decreasing => "decreasing",
            Classification::Constant => "constant",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Profile shape forced by the boundary data relative to the root.
pub fn expected_classification(bc: &RobinBC, c: f64) -> Classification {
    let (l, r) = (bc.phi0_left, bc.phi0_right);
    if l == c && r == c {
        Classification::Constant
    } else if l > c && r > c {
        Classification::InteriorMin
    } else if l < c && r < c {
        Classification::InteriorMax
    } else if l <= c && r >= c {
        Classification::Increasing
    } else {
        Classification::Decreasing
    }
}

fn first_violation<F: Fn(usize) -> f64>(n: usize, excess: F) -> Option<(usize, f64)> {
    (0..n).map(|i| (i, excess(i))).find(|&(_, v)| v > CLASSIFICATION_SLACK)
}

/// Confirms the discrete profile follows the shape dictated by the data.
pub fn classify_solution(solution: &BvpSolution, c: f64) -> Result<Classification> {
    let want = expected_classification(&solution.bc, c);
    let v = &solution.values;
    let n = v.len();
    let rising = |i: usize| if i + 1 < n { v[i] - v[i + 1] } else { 0.0 };
    let falling = |i: usize| if i + 1 < n { v[i + 1] - v[i] } else { 0.0 };
    let violation = match want {
        Classification::Constant => first_violation(n, |i| (v[i] - c).abs()),
        Classification::Increasing => first_violation(n, rising),
        Classification::Decreasing => first_violation(n, falling),
        Classification::InteriorMin => {
            let m = argmin(v);
            first_violation(m, falling)
                .or_else(|| first_violation(n - m, |j| rising(m + j)).map(|(j, e)| (m + j, e)))
                .or_else(|| Some((m, c - v[m])).filter(|&(_, e)| e > CLASSIFICATION_SLACK))
        }
        Classification::InteriorMax => {
            let m = argmax(v);
            first_violation(m, rising)
                .or_else(|| first_violation(n - m, |j| falling(m + j)).map(|(j, e)| (m + j, e)))
                .or_else(|| Some((m, v[m] - c)).filter(|&(_, e)| e > CLASSIFICATION_SLACK))
        }
    };
    match violation {
        None => Ok(want),
        Some((node, excess)) => Err(Error::InconsistentProfile {
            expected: want.as_str(),
            node,
            violation: excess,
        }),
    }
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

/// Largest amount by which a node leaves `[min(data, c), max(data, c)]`;
/// non-positive when the bound holds.
pub fn bounds_violation(solution: &BvpSolution, c: f64) -> f64 {
    let (l, r) = (solution.bc.phi0_left, solution.bc.phi0_right);
    let lo = l.min(r).min(c);
    let hi = l.max(r).max(c);
    solution
        .values
        .iter()
        .map(|&v| (lo - v).max(v - hi))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `φ(-1) - ηφ'(-1) - φ0(-1)` and `φ(1) + ηφ'(1) - φ0(1)` with the
/// three-point one-sided derivative.
pub fn robin_residuals(solution: &BvpSolution) -> (f64, f64) {
    let v = &solution.values;
    let n = v.len();
    let d = derivative(v, solution.spacing());
    let bc = &solution.bc;
    (
        v[0] - bc.eta * d[0] - bc.phi0_left,
        v[n - 1] + bc.eta * d[n - 1] - bc.phi0_right,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeReport {
    /// Smallest value of bound minus `(φ - c)²` over the nodes.
    pub worst_margin: f64,
    pub worst_node: usize,
    pub alpha0: f64,
    pub a2: f64,
    pub satisfied: bool,
}

/// Compares `(φ - c)²` against
/// `A2²(exp(-(1+x)√(2α0/ε)) + exp(-(1-x)√(2α0/ε)))` at every node.
pub fn envelope_check(solution: &BvpSolution, rhs: &RhsFunction, c: f64) -> Result<EnvelopeReport> {
    let window = Interval::new(solution.min_value().min(c), solution.max_value().max(c));
    let alpha0 = rhs.min_derivative(window, ENVELOPE_SAMPLES)?;
    let bc = &solution.bc;
    let a2 = (bc.phi0_left - c).abs().max((bc.phi0_right - c).abs());
    let rate = (2.0 * alpha0.max(0.0) / solution.epsilon).sqrt();
    let mut worst_margin = f64::INFINITY;
    let mut worst_node = 0;
    for (i, (&x, &v)) in solution.nodes.iter().zip(&solution.values).enumerate() {
        let bound = a2 * a2 * ((-(1.0 + x) * rate).exp() + (-(1.0 - x) * rate).exp());
        let margin = bound - (v - c) * (v - c);
        if margin < worst_margin {
            worst_margin = margin;
            worst_node = i;
        }
    }
    Ok(EnvelopeReport {
        worst_margin,
        worst_node,
        alpha0,
        a2,
        satisfied: alpha0 > 0.0 && worst_margin >= -CLASSIFICATION_SLACK,
    })
}

/// Limit `φ*` of the boundary value for one datum: the root `s` between
/// `c` and `φ0` of `√γ|φ0 - s| = √F(s)`, `F(s) = ∫_c^s f`.
pub fn boundary_layer_limit(rhs: &RhsFunction, c: f64, phi0: f64, gamma: f64) -> Result<f64> {
    check_finite("gamma", gamma)?;
    check_finite("phi0", phi0)?;
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "must be positive",
        });
    }
    if phi0 == c {
        return Err(Error::Sign { phi0, c });
    }
    let d = rhs.domain();
    if !d.contains(phi0) {
        return Err(Error::Domain {
            context: "boundary datum outside the rhs domain",
            value: phi0,
            lo: d.lo,
            hi: d.hi,
        });
    }
    let sg = gamma.sqrt();
    let g = |s: f64| -> f64 {
        let area = adaptive_simpson(|t| rhs.value(t).unwrap_or(f64::NAN), c, s).value;
        sg * (phi0 - s).abs() - area.max(0.0).sqrt()
    };
    // g(c) > 0 and g(phi0) < 0; g is monotone between them
    let (mut a, mut b) = (c, phi0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Boundary-layer limits at `x = -1` and `x = 1`.
pub fn boundary_layer_limits(rhs: &RhsFunction, c: f64, bc: &RobinBC, gamma: f64) -> Result<(f64, f64)> {
    Ok((
        boundary_layer_limit(rhs, c, bc.phi0_left, gamma)?,
        boundary_layer_limit(rhs, c, bc.phi0_right, gamma)?,
    ))
}
