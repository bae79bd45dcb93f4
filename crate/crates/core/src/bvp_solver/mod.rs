//! Finite-difference Newton solver for `εφ'' = f(φ)` on `(-1, 1)` with
//! Robin data `φ(-1) - ηφ'(-1) = φ0(-1)`, `φ(1) + ηφ'(1) = φ0(1)`.
//!
//! The grid is uniform. Interior rows use second-order central differences
//! and the two Robin rows use three-point one-sided derivatives, so the
//! Jacobian is tridiagonal apart from one corner entry per boundary row.

mod analysis;
mod growth;
mod newton;
mod spectrum;

pub use analysis::{
    boundary_layer_limit, boundary_layer_limits, bounds_violation, classify_solution, envelope_check,
    expected_classification, robin_residuals, Classification, EnvelopeReport, CLASSIFICATION_SLACK,
};
pub use growth::{unbounded_growth_probe, GrowthReport};
pub use spectrum::{linearized_smallest_eigenvalue, stability_floor};

use crate::branch_algebra::Interval;
use crate::error::{check_finite, Error, Result};
use crate::exec::Execution;
use crate::grid::{resample, uniform_nodes};
use crate::rhs_assembly::RhsFunction;

/// Below this `ε` the solver walks down from it by halving.
pub const CONTINUATION_THRESHOLD: f64 = 1e-4;
pub const MIN_NODES: usize = 201;
pub const NODES_PER_LAYER: f64 = 20.0;
pub const MAX_ITERATIONS: usize = 200;
/// Smallest Armijo step fraction, `2^-20`.
pub const DAMPING_FLOOR: f64 = 1.0 / 1_048_576.0;
pub const MAX_CONSECUTIVE_CLAMPS: usize = 5;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinBC {
    pub phi0_left: f64,
    pub phi0_right: f64,
    pub eta: f64,
}

impl RobinBC {
    pub fn new(phi0_left: f64, phi0_right: f64, eta: f64) -> Result<Self> {
        check_finite("phi0_left", phi0_left)?;
        check_finite("phi0_right", phi0_right)?;
        check_finite("eta", eta)?;
        if eta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "Robin coefficient must be non-negative",
            });
        }
        Ok(RobinBC {
            phi0_left,
            phi0_right,
            eta,
        })
    }

    pub fn dirichlet(phi0_left: f64, phi0_right: f64) -> Result<Self> {
        Self::new(phi0_left, phi0_right, 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct BvpProblem {
    pub epsilon: f64,
    pub rhs: RhsFunction,
    pub bc: RobinBC,
    /// Grid size; `None` applies the layer-resolving rule.
    pub n_nodes: Option<usize>,
}

impl BvpProblem {
    pub fn new(epsilon: f64, rhs: RhsFunction, bc: RobinBC, n_nodes: Option<usize>) -> Result<Self> {
        let p = BvpProblem {
            epsilon,
            rhs,
            bc,
            n_nodes,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("epsilon", self.epsilon)?;
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
                reason: "must be positive",
            });
        }
        if let Some(n) = self.n_nodes {
            if n < 3 {
                return Err(Error::InvalidParameter {
                    name: "n_nodes",
                    value: n as f64,
                    reason: "need at least three nodes",
                });
            }
        }
        let d = self.rhs.domain();
        for (name, v) in [("phi0_left", self.bc.phi0_left), ("phi0_right", self.bc.phi0_right)] {
            if !d.contains(v) {
                return Err(Error::Domain {
                    context: name_context(name),
                    value: v,
                    lo: d.lo,
                    hi: d.hi,
                });
            }
        }
        Ok(())
    }

    /// Range that bounds every solution: data plus the root.
    pub fn bound_window(&self) -> Interval {
        let (l, r) = (self.bc.phi0_left, self.bc.phi0_right);
        let c = self.rhs.root().unwrap_or(0.5 * (l + r));
        Interval::new(l.min(r).min(c), l.max(r).max(c))
    }

    /// Grid size from the layer rule `max(201, 20·⌈1/√(ε/α0)⌉)`, rounded up
    /// to odd so that `x = 0` is a node.
    pub fn rule_nodes(&self) -> Result<usize> {
        let alpha0 = self.rhs.min_derivative(self.bound_window(), 401)?;
        Ok(layer_grid_size(self.epsilon, alpha0))
    }
}

fn name_context(name: &str) -> &'static str {
    if name == "phi0_left" {
        "left boundary datum outside the rhs domain"
    } else {
        "right boundary datum outside the rhs domain"
    }
}

pub fn layer_grid_size(epsilon: f64, alpha0: f64) -> usize {
    let n = if alpha0.is_finite() && alpha0 > 0.0 {
        let per = (1.0 / (epsilon / alpha0).sqrt()).ceil();
        (NODES_PER_LAYER * per).min(5.0e7) as usize
    } else {
        MIN_NODES
    };
    let n = n.max(MIN_NODES);
    n | 1
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `φ ≡ c`, falling back to the mean boundary datum without a root.
    Root,
    Constant(f64),
    Profile { nodes: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpOptions {
    pub initial_guess: InitialGuess,
    pub execution: Execution,
    pub max_iterations: usize,
    /// Halve `ε` from the threshold down to the target for small `ε`.
    pub continuation: bool,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions {
            initial_guess: InitialGuess::Root,
            execution: Execution::default(),
            max_iterations: MAX_ITERATIONS,
            continuation: true,
        }
    }
}

impl BvpOptions {
    pub fn with_guess(guess: InitialGuess) -> Self {
        BvpOptions {
            initial_guess: guess,
            ..Default::default()
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvpSolution {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Sup norm of the discrete residual at the returned iterate.
    pub residual_norm: f64,
    /// Tolerance the residual was driven below.
    pub tolerance: f64,
    /// Newton steps taken in the final continuation stage.
    pub iterations: usize,
    pub classification: Option<Classification>,
    pub epsilon: f64,
    pub bc: RobinBC,
    /// Root `c` of the rhs, if any.
    pub root: Option<f64>,
}

impl BvpSolution {
    pub fn spacing(&self) -> f64 {
        crate::grid::spacing(&self.nodes)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cubic interpolation of the profile.
    pub fn value_at(&self, x: f64) -> f64 {
        crate::grid::interpolate_cubic(&self.nodes, &self.values, x)
    }

    pub fn center_value(&self) -> f64 {
        self.value_at(0.0)
    }
}

pub fn solve(problem: &BvpProblem) -> Result<BvpSolution> {
    solve_with(problem, &BvpOptions::default())
}

pub fn solve_with(problem: &BvpProblem, options: &BvpOptions) -> Result<BvpSolution> {
    problem.validate()?;
    let eps = problem.epsilon;
    let mut stages = Vec::new();
    if options.continuation && eps < CONTINUATION_THRESHOLD && options.initial_guess == InitialGuess::Root {
        let mut e = CONTINUATION_THRESHOLD;
        while e > eps {
            stages.push(e);
            e = (0.5 * e).max(eps);
        }
    }
    stages.push(eps);

    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut last = None;
    for &e in &stages {
        let stage = BvpProblem {
            epsilon: e,
            ..problem.clone()
        };
        let n = match problem.n_nodes {
            Some(n) => n,
            None => stage.rule_nodes()?,
        };
        let nodes = uniform_nodes(n);
        let guess = match (&previous, &options.initial_guess) {
            (Some((xs, ys)), _) => resample(xs, ys, &nodes),
            (None, InitialGuess::Root) => {
                let c = problem
                    .rhs
                    .root()
                    .unwrap_or(0.5 * (problem.bc.phi0_left + problem.bc.phi0_right));
                vec![c; n]
            }
            (None, InitialGuess::Constant(v)) => vec![*v; n],
            (None, InitialGuess::Profile { nodes: xs, values: ys }) => resample(xs, ys, &nodes),
        };
        let out = newton::run(&stage, &nodes, guess, options)?;
        previous = Some((nodes.clone(), out.values.clone()));
        last = Some((nodes, out));
    }
    let (nodes, out) = last.expect("at least one stage");
    let mut sol = BvpSolution {
        nodes,
        values: out.values,
        residual_norm: out.residual,
        tolerance: out.tolerance,
        iterations: out.iterations,
        classification: None,
        epsilon: eps,
        bc: problem.bc,
        root: problem.rhs.root(),
    };
    if let Some(c) = sol.root {
        sol.classification = Some(classify_solution(&sol, c)?);
    }
    Ok(sol)
}

/// Sup norm of the discrete residual of a grid function on the uniform grid
/// with `values.len()` nodes.
pub fn discrete_residual(problem: &BvpProblem, values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::Length {
            what: "grid values",
            got: values.len(),
            expected: 3,
        });
    }
    newton::residual_norm(problem, values)
}
