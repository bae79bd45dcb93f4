use thiserror::Error;

use crate::branch_algebra::BranchId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{context}: value {value} lies outside [{lo}, {hi}]")]
    Domain {
        context: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("z = {z} does not exceed the critical coupling g_c = {g_c} (g = {g}); no turning point exists")]
    Subcritical { g: f64, z: f64, g_c: f64 },

    #[error("z = {z} is not below the critical coupling g_c = {g_c} (g = {g}); the potential is not monotone in sigma")]
    Supercritical { g: f64, z: f64, g_c: f64 },

    #[error("no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("bracket growth failed to find a sign change starting from {start}")]
    BracketGrowth { start: f64 },

    #[error("rhs {label:?} has no root on [{lo}, {hi}] (f = {f_lo}, {f_hi})")]
    NoIntersection {
        label: BranchId,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("empty domain intersection [{lo}, {hi}]")]
    EmptyDomain { lo: f64, hi: f64 },

    #[error("Newton iteration failed after {iterations} iterations (residual {residual:e}, tolerance {tolerance:e})")]
    Nonconvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("Newton iterates left the rhs domain [{lo}, {hi}] for {clamps} consecutive steps")]
    DomainEscape { clamps: usize, lo: f64, hi: f64 },

    #[error("discrete profile does not match the {expected} pattern (violation {violation:e} at node {node})")]
    InconsistentProfile {
        expected: &'static str,
        node: usize,
        violation: f64,
    },

    #[error("boundary datum {phi0} equals the root {c}; no boundary layer forms")]
    Sign { phi0: f64, c: f64 },

    #[error("rhs changes sign on its domain (f = {f_lo} at {lo}, {f_hi} at {hi})")]
    RootPresent {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("potential {phi} at node {node} leaves the segment domain [{lo}, {hi}]")]
    BranchMismatch {
        node: usize,
        phi: f64,
        lo: f64,
        hi: f64,
    },

    #[error("integration window [{x1}, {x2}] is invalid")]
    Bounds { x1: f64, x2: f64 },

    #[error("species {species} violates the algebraic system at node {node} (residual {residual:e})")]
    Consistency {
        species: usize,
        node: usize,
        residual: f64,
    },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    Length {
        what: &'static str,
        got: usize,
        expected: usize,
    },
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
