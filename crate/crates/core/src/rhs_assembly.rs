//! Monotone right-hand sides `f(φ)` of the reduced Poisson equation
//! `εφ'' = f(φ)` for the three- and four-species configurations.

use std::fmt;
use std::sync::Arc;

use crate::branch_algebra::{BranchId, Interval, PairBranches, SegmentTag, TwoSpeciesParams};
use crate::error::{check_finite, Error, Result};
use crate::roots::bisect_polish;

/// A scalar map returning `(f(φ), f'(φ))`.
pub trait ScalarRhs: Send + Sync {
    fn eval(&self, phi: f64) -> Result<(f64, f64)>;
}

impl<F> ScalarRhs for F
where
    F: Fn(f64) -> (f64, f64) + Send + Sync,
{
    fn eval(&self, phi: f64) -> Result<(f64, f64)> {
        Ok(self(phi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsLabel {
    Branch(BranchId),
    Custom,
}

/// An assembled right-hand side with its domain and (optional) root.
#[derive(Clone)]
pub struct RhsFunction {
    label: RhsLabel,
    domain: Interval,
    root: Option<f64>,
    inner: Arc<dyn ScalarRhs>,
}

impl fmt::Debug for RhsFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RhsFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("root", &self.root)
            .finish_non_exhaustive()
    }
}

impl RhsFunction {
    /// Wraps an arbitrary increasing map. The root is located by bisection
    /// when the map changes sign on a finite domain.
    pub fn from_fn<F>(domain: Interval, f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        let mut rhs = RhsFunction {
            label: RhsLabel::Custom,
            domain,
            root: None,
            inner: Arc::new(f),
        };
        if domain.lo.is_finite() && domain.hi.is_finite() {
            rhs.root = rhs.locate_root().ok();
        }
        rhs
    }

    /// Wraps a map whose root is known in closed form.
    pub fn with_root<F>(domain: Interval, root: f64, f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        RhsFunction {
            label: RhsLabel::Custom,
            domain,
            root: Some(root),
            inner: Arc::new(f),
        }
    }

    pub fn label(&self) -> RhsLabel {
        self.label
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn root(&self) -> Option<f64> {
        self.root
    }

    pub fn eval(&self, phi: f64) -> Result<(f64, f64)> {
        if !self.domain.contains(phi) {
            return Err(Error::Domain {
                context: "rhs evaluated outside its domain",
                value: phi,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        self.inner.eval(phi)
    }

    pub fn value(&self, phi: f64) -> Result<f64> {
        Ok(self.eval(phi)?.0)
    }

    pub fn derivative(&self, phi: f64) -> Result<f64> {
        Ok(self.eval(phi)?.1)
    }

    fn locate_root(&self) -> Result<f64> {
        let (lo, hi) = (self.domain.lo, self.domain.hi);
        let f_lo = self.value(lo)?;
        let f_hi = self.value(hi)?;
        if !(f_lo < 0.0 && f_hi > 0.0) {
            let label = match self.label {
                RhsLabel::Branch(b) => b,
                RhsLabel::Custom => BranchId::A,
            };
            return Err(Error::NoIntersection {
                label,
                lo,
                hi,
                f_lo,
                f_hi,
            });
        }
        bisect_polish(
            |x| self.value(x).unwrap_or(f64::NAN),
            |x| self.derivative(x).unwrap_or(f64::NAN),
            lo,
            hi,
        )
    }

    /// Values at the domain ends, with infinite ends replaced by `±f64::MAX`.
    pub fn end_values(&self) -> Result<((f64, f64), (f64, f64))> {
        let lo = if self.domain.lo.is_finite() { self.domain.lo } else { -f64::MAX };
        let hi = if self.domain.hi.is_finite() { self.domain.hi } else { f64::MAX };
        Ok(((lo, self.inner.eval(lo)?.0), (hi, self.inner.eval(hi)?.0)))
    }

    /// Checks strict increase on `n` equispaced samples of a finite window.
    pub fn increasing_on_samples(&self, window: Interval, n: usize) -> Result<bool> {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            let x = window.lo + window.width() * i as f64 / (n - 1) as f64;
            let v = self.value(window.clamp(x))?;
            if !(v > prev) {
                return Ok(false);
            }
            prev = v;
        }
        Ok(true)
    }

    /// Minimum of `f'` over `n` samples of `window` (clipped to the domain).
    pub fn min_derivative(&self, window: Interval, n: usize) -> Result<f64> {
        let w = window.intersect(&self.domain);
        let mut m = f64::INFINITY;
        for i in 0..n.max(2) {
            let x = w.lo + w.width() * i as f64 / (n.max(2) - 1) as f64;
            m = m.min(self.derivative(w.clamp(x))?);
        }
        Ok(m)
    }
}

/// `c3 = e^{-z3 φ}` for a species that does not couple sterically.
pub fn third_species_concentration(phi: f64, z3: f64) -> f64 {
    (-z3 * phi).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeSpeciesConfig {
    pub pair: TwoSpeciesParams,
    pub z3: f64,
    pub rho0: f64,
}

impl ThreeSpeciesConfig {
    /// Requires `z3 > 0` and `rho0 > 0`; a non-positive permanent charge
    /// leaves the B branch without a bulk root.
    pub fn new(pair: TwoSpeciesParams, z3: f64, rho0: f64) -> Result<Self> {
        let c = Self::with_any_charge(pair, z3, rho0)?;
        if rho0 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "rho0",
                value: rho0,
                reason: "permanent charge must be positive for two bulk states",
            });
        }
        Ok(c)
    }

    /// Like [`ThreeSpeciesConfig::new`] but accepts any finite `rho0`.
    pub fn with_any_charge(pair: TwoSpeciesParams, z3: f64, rho0: f64) -> Result<Self> {
        check_finite("z3", z3)?;
        check_finite("rho0", rho0)?;
        if z3 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "z3",
                value: z3,
                reason: "third-species valence must be positive",
            });
        }
        Ok(ThreeSpeciesConfig { pair, z3, rho0 })
    }

    pub fn branches(&self) -> Result<PairBranches> {
        PairBranches::new(self.pair)
    }

    /// `(Σ, [c1, c2, c3])` at potential `phi` on the branch's upper segment.
    pub fn concentrations(&self, branches: &PairBranches, phi: f64, label: BranchId) -> Result<(f64, [f64; 3])> {
        let (sigma, pair) = branches.concentrations_at(phi, label.upper_segment())?;
        Ok((sigma, [pair.c1, pair.c2, third_species_concentration(phi, self.z3)]))
    }
}

struct ThreeSpeciesRhs {
    branches: PairBranches,
    z3: f64,
    rho0: f64,
    tag: SegmentTag,
}

impl ScalarRhs for ThreeSpeciesRhs {
    fn eval(&self, phi: f64) -> Result<(f64, f64)> {
        let (cd, slope) = self.branches.c_diff_with_slope(phi, self.tag)?;
        let q = self.branches.params().q();
        let c3 = third_species_concentration(phi, self.z3);
        Ok((
            q * cd - self.z3 * c3 + self.rho0,
            q * slope + self.z3 * self.z3 * c3,
        ))
    }
}

/// Domain of the upper segment of `label`, truncated at the far end.
fn upper_domain(b: &PairBranches, label: BranchId) -> Interval {
    let far = b.truncated_far_phi(label);
    match label {
        BranchId::A => Interval::new(-b.phi_ac(), far),
        BranchId::B => Interval::new(far, b.phi_ac()),
    }
}

fn finish(label: BranchId, domain: Interval, inner: Arc<dyn ScalarRhs>) -> Result<RhsFunction> {
    if domain.is_empty() || domain.width() == 0.0 {
        return Err(Error::EmptyDomain {
            lo: domain.lo,
            hi: domain.hi,
        });
    }
    let mut rhs = RhsFunction {
        label: RhsLabel::Branch(label),
        domain,
        root: None,
        inner,
    };
    rhs.root = Some(rhs.locate_root()?);
    Ok(rhs)
}

/// `f_A(φ) = q(c1 - c2)(Σ_{A1}(φ)) - z3 e^{-z3 φ} + ρ0`, and the same with
/// `Σ_{B1}` for `B`.
pub fn assemble_three_species(config: &ThreeSpeciesConfig, label: BranchId) -> Result<RhsFunction> {
    let branches = config.branches()?;
    let domain = upper_domain(&branches, label);
    let inner = Arc::new(ThreeSpeciesRhs {
        branches,
        z3: config.z3,
        rho0: config.rho0,
        tag: label.upper_segment(),
    });
    finish(label, domain, inner)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourSpeciesConfig {
    /// Species 1 and 2 with valences `-q1`, `+q1`.
    pub pair12: TwoSpeciesParams,
    /// Species 3 and 4 with valences `-q2`, `+q2`.
    pub pair34: TwoSpeciesParams,
    pub rho0: f64,
}

impl FourSpeciesConfig {
    pub fn new(pair12: TwoSpeciesParams, pair34: TwoSpeciesParams, rho0: f64) -> Result<Self> {
        check_finite("rho0", rho0)?;
        if rho0 == 0.0 {
            return Err(Error::InvalidParameter {
                name: "rho0",
                value: rho0,
                reason: "permanent charge must be non-zero",
            });
        }
        Ok(FourSpeciesConfig { pair12, pair34, rho0 })
    }

    pub fn branches(&self) -> Result<(PairBranches, PairBranches)> {
        Ok((PairBranches::new(self.pair12)?, PairBranches::new(self.pair34)?))
    }

    /// Segments `(pair12, pair34)` used by the rhs of `label`: `A` pairs
    /// `A1` with the decreasing segment `M1` (B-type), `B` pairs `B1` with
    /// `N1` (A-type).
    pub fn segments(label: BranchId) -> (SegmentTag, SegmentTag) {
        match label {
            BranchId::A => (SegmentTag::A1, SegmentTag::B1),
            BranchId::B => (SegmentTag::B1, SegmentTag::A1),
        }
    }

    pub fn concentrations(
        &self,
        branches: &(PairBranches, PairBranches),
        phi: f64,
        label: BranchId,
    ) -> Result<(f64, f64, [f64; 4])> {
        let (t12, t34) = Self::segments(label);
        let (s12, p12) = branches.0.concentrations_at(phi, t12)?;
        let (s34, p34) = branches.1.concentrations_at(phi, t34)?;
        Ok((s12, s34, [p12.c1, p12.c2, p34.c1, p34.c2]))
    }
}

struct FourSpeciesRhs {
    b12: PairBranches,
    b34: PairBranches,
    rho0: f64,
    t12: SegmentTag,
    t34: SegmentTag,
}

impl ScalarRhs for FourSpeciesRhs {
    fn eval(&self, phi: f64) -> Result<(f64, f64)> {
        let (d12, s12) = self.b12.c_diff_with_slope(phi, self.t12)?;
        let (d34, s34) = self.b34.c_diff_with_slope(phi, self.t34)?;
        let (q1, q2) = (self.b12.params().q(), self.b34.params().q());
        Ok((q1 * d12 + q2 * d34 - self.rho0, q1 * s12 + q2 * s34))
    }
}

/// `f_A(φ) = q1(c1 - c2)(Σ_{A1}(φ)) + q2(c3 - c4)(Σ_{M1}(φ)) - ρ0` on
/// `[-φ_{A,c}, φ_{M,c}]`, and the mirrored `B` form on `[-φ_{M,c}, φ_{A,c}]`.
pub fn assemble_four_species(config: &FourSpeciesConfig, label: BranchId) -> Result<RhsFunction> {
    let (b12, b34) = config.branches()?;
    let (t12, t34) = FourSpeciesConfig::segments(label);
    let domain = b12.segment(t12).domain.intersect(&b34.segment(t34).domain);
    let inner = Arc::new(FourSpeciesRhs {
        b12,
        b34,
        rho0: config.rho0,
        t12,
        t34,
    });
    finish(label, domain, inner)
}
