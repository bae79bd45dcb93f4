//! Sup-norm growth of solutions when the rhs has no root.

use super::{solve, BvpProblem, RobinBC};
use crate::error::{Error, Result};
use crate::rhs_assembly::RhsFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub epsilons: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// `sup_norms[i + 1] / sup_norms[i]`.
    pub growth_factors: Vec<f64>,
}

impl GrowthReport {
    pub fn min_growth(&self) -> f64 {
        self.growth_factors.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solves the Robin problem for each `ε` and records `‖φ‖∞`.
pub fn unbounded_growth_probe(
    rhs: &RhsFunction,
    bc: RobinBC,
    epsilons: &[f64],
    n_nodes: Option<usize>,
) -> Result<GrowthReport> {
    let ((lo, f_lo), (hi, f_hi)) = rhs.end_values()?;
    let same_sign = (f_lo > 0.0 && f_hi > 0.0) || (f_lo < 0.0 && f_hi < 0.0);
    if !same_sign {
        return Err(Error::RootPresent { lo, hi, f_lo, f_hi });
    }
    let mut sup_norms = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let p = BvpProblem::new(eps, rhs.clone(), bc, n_nodes)?;
        sup_norms.push(solve(&p)?.sup_norm());
    }
    let growth_factors = sup_norms.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(GrowthReport {
        epsilons: epsilons.to_vec(),
        sup_norms,
        growth_factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch_algebra::Interval;

    fn everywhere() -> Interval {
        Interval::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    #[test]
    fn constant_rhs_scales_inversely() {
        let rhs = RhsFunction::from_fn(everywhere(), |_| (1.0, 0.0));
        let eps = [1e-1, 5e-2, 2.5e-2];
        let rep = unbounded_growth_probe(&rhs, RobinBC::dirichlet(0.0, 0.0).unwrap(), &eps, None).unwrap();
        for (e, s) in eps.iter().zip(&rep.sup_norms) {
            assert!((s - 0.5 / e).abs() <= 1e-8 * (0.5 / e), "{s}");
        }
        for g in &rep.growth_factors {
            assert!((g - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn exponential_rhs_grows() {
        let rhs = RhsFunction::from_fn(everywhere(), |x: f64| (x.exp() + 1.0, x.exp()));
        let rep =
            unbounded_growth_probe(&rhs, RobinBC::dirichlet(0.0, 0.0).unwrap(), &[1e-1, 5e-2], None).unwrap();
        assert!(rep.min_growth() >= 1.5, "{rep:?}");
    }

    #[test]
    fn root_is_rejected() {
        let rhs = RhsFunction::from_fn(everywhere(), |x| (x, 1.0));
        let e = unbounded_growth_probe(&rhs, RobinBC::dirichlet(0.0, 0.0).unwrap(), &[1e-1], None).unwrap_err();
        assert!(matches!(e, Error::RootPresent { .. }));
    }
}
