//! Two-species algebraic system with self coupling `g`, cross coupling `z`
//! and valences `∓q`.
//!
//! With total concentration `Σ = c1 + c2` and `ξ = c1·c2 = e^{-(g+z)Σ}` the
//! system has two solution branches, `A` (c1 ≥ c2) and `B` (c1 ≤ c2), both
//! parameterised by `Σ ≥ Σ_z`. Along each branch the potential is
//! `q φ = ln c1 + g c1 + z c2`. For `z > g_c` the branch potentials have a
//! turning point at `Σ_c` and the inverse maps split into the segments
//! `A1, A2, B1, B2`.

use crate::error::{check_finite, Error, Result};
use crate::roots::{bisect_polish, grow_until, newton_bracketed};

/// Queries at most this far outside a segment domain are clamped onto its
/// endpoint.
pub const ENDPOINT_CLAMP: f64 = 1e-12;

/// Cap on `d(c1 - c2)/dφ`, which is infinite exactly at the turning point.
pub const SLOPE_CAP: f64 = 1e15;

/// Width of the truncated `Σ` range beyond the turning point, times `1/(g+z)`.
pub const SIGMA_SPAN_FACTOR: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpeciesParams {
    g: f64,
    z: f64,
    q: f64,
}

impl TwoSpeciesParams {
    pub fn new(g: f64, z: f64, q: f64) -> Result<Self> {
        check_finite("g", g)?;
        check_finite("z", z)?;
        check_finite("q", q)?;
        if g < 0.0 {
            return Err(Error::InvalidParameter {
                name: "g",
                value: g,
                reason: "self coupling must be non-negative",
            });
        }
        if z < 0.0 {
            return Err(Error::InvalidParameter {
                name: "z",
                value: z,
                reason: "cross coupling must be non-negative",
            });
        }
        if q < 1.0 {
            return Err(Error::InvalidParameter {
                name: "q",
                value: q,
                reason: "valence magnitude must be at least 1",
            });
        }
        Ok(TwoSpeciesParams { g, z, q })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `g + z`, the decay rate of `ξ` in `Σ`.
    pub fn k(&self) -> f64 {
        self.g + self.z
    }

    pub fn with_z(&self, z: f64) -> Result<Self> {
        Self::new(self.g, z, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchId {
    A,
    B,
}

impl BranchId {
    /// `+1` on `A`, `-1` on `B`.
    pub fn sign(self) -> f64 {
        match self {
            BranchId::A => 1.0,
            BranchId::B => -1.0,
        }
    }

    pub fn upper_segment(self) -> SegmentTag {
        match self {
            BranchId::A => SegmentTag::A1,
            BranchId::B => SegmentTag::B1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentTag {
    A1,
    A2,
    B1,
    B2,
}

impl SegmentTag {
    pub fn branch(self) -> BranchId {
        match self {
            SegmentTag::A1 | SegmentTag::A2 => BranchId::A,
            SegmentTag::B1 | SegmentTag::B2 => BranchId::B,
        }
    }

    /// Segments `A1`/`B1` live on `Σ ≥ Σ_c`.
    pub fn is_upper(self) -> bool {
        matches!(self, SegmentTag::A1 | SegmentTag::B1)
    }
}

/// Closed interval; infinite endpoints are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_with(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSegment {
    pub tag: SegmentTag,
    pub domain: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSet {
    pub sigma_z: f64,
    pub g_c: f64,
    pub sigma_c: Option<f64>,
    pub phi_ac: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationPair {
    pub c1: f64,
    pub c2: f64,
}

/// Everything derived from one `Σ` on both branches.
#[derive(Debug, Clone, Copy)]
struct State {
    sigma: f64,
    s: f64,
    xi: f64,
    big: f64,
    small: f64,
    ln_big: f64,
    ln_small: f64,
}

fn state(sigma: f64, p: &TwoSpeciesParams) -> Result<State> {
    check_finite("sigma", sigma)?;
    let k = p.k();
    let root_xi = (-0.5 * k * sigma).exp();
    let below = sigma - 2.0 * root_xi;
    if sigma <= 0.0 || below < -4.0 * f64::EPSILON * sigma {
        return Err(Error::Domain {
            context: "total concentration below sigma_z",
            value: sigma,
            lo: sigma_z(p),
            hi: f64::INFINITY,
        });
    }
    let s = (below.max(0.0) * (sigma + 2.0 * root_xi)).sqrt();
    let big = 0.5 * (sigma + s);
    let ln_big = big.ln();
    let ln_small = -k * sigma - ln_big;
    Ok(State {
        sigma,
        s,
        xi: (-k * sigma).exp(),
        big,
        small: ln_small.exp(),
        ln_big,
        ln_small,
    })
}

impl State {
    fn pair(&self, branch: BranchId) -> ConcentrationPair {
        match branch {
            BranchId::A => ConcentrationPair {
                c1: self.big,
                c2: self.small,
            },
            BranchId::B => ConcentrationPair {
                c1: self.small,
                c2: self.big,
            },
        }
    }

    fn phi(&self, p: &TwoSpeciesParams, branch: BranchId) -> f64 {
        let (ln_c1, c1, c2) = match branch {
            BranchId::A => (self.ln_big, self.big, self.small),
            BranchId::B => (self.ln_small, self.small, self.big),
        };
        (ln_c1 + p.g * c1 + p.z * c2) / p.q
    }

    /// `1 + gΣ + (g² - z²)ξ`, which is `f_z(Σ)·e^{-(g+z)Σ}`.
    fn turning_factor(&self, p: &TwoSpeciesParams) -> f64 {
        1.0 + p.g * self.sigma + (p.g * p.g - p.z * p.z) * self.xi
    }

    /// `dφ_A/dΣ`; the B branch is its negative.
    fn dphi_a(&self, p: &TwoSpeciesParams) -> f64 {
        self.turning_factor(p) / (p.q * self.s)
    }

    /// `d(c1 - c2)/dφ` along either branch.
    fn cdiff_slope(&self, p: &TwoSpeciesParams) -> f64 {
        let num = p.q * (self.sigma + 2.0 * p.k() * self.xi);
        let d = self.turning_factor(p);
        if d == 0.0 {
            return SLOPE_CAP;
        }
        let v = num / d;
        if v.abs() > SLOPE_CAP {
            SLOPE_CAP.copysign(v)
        } else {
            v
        }
    }
}

fn sigma_z_of_k(k: f64) -> f64 {
    if k == 0.0 {
        return 2.0;
    }
    // ln Σ - ln 2 + kΣ/2 is increasing and changes sign on [2e^{-k}, 2]
    let h = |s: f64| s.ln() - std::f64::consts::LN_2 + 0.5 * k * s;
    let dh = |s: f64| 1.0 / s + 0.5 * k;
    let lo = 2.0 * (-k).exp();
    bisect_polish(h, dh, lo, 2.0).unwrap_or(lo)
}

/// Critical total concentration: the unique solution of `Σ = 2e^{-(g+z)Σ/2}`.
pub fn sigma_z(p: &TwoSpeciesParams) -> f64 {
    sigma_z_of_k(p.k())
}

pub fn concentrations(sigma: f64, p: &TwoSpeciesParams, branch: BranchId) -> Result<ConcentrationPair> {
    Ok(state(sigma, p)?.pair(branch))
}

/// `c1 - c2` on a branch: `+√(Σ² - 4ξ)` on A, `-√(Σ² - 4ξ)` on B.
pub fn c_diff(sigma: f64, p: &TwoSpeciesParams, branch: BranchId) -> Result<f64> {
    Ok(branch.sign() * state(sigma, p)?.s)
}

pub fn phi_on_branch(sigma: f64, p: &TwoSpeciesParams, branch: BranchId) -> Result<f64> {
    Ok(state(sigma, p)?.phi(p, branch))
}

pub fn dphi_dsigma(sigma: f64, p: &TwoSpeciesParams, branch: BranchId) -> Result<f64> {
    let st = state(sigma, p)?;
    if st.s <= 0.0 {
        return Err(Error::Domain {
            context: "dphi/dsigma is singular at sigma_z",
            value: sigma,
            lo: sigma_z(p),
            hi: f64::INFINITY,
        });
    }
    Ok(branch.sign() * st.dphi_a(p))
}

/// `(1+gΣ)e^{(g+z)Σ} + g² - z²` scaled by `e^{-(g+z)Σ}`; same sign, no overflow.
pub fn turning_factor(sigma: f64, p: &TwoSpeciesParams) -> f64 {
    1.0 + p.g * sigma + (p.g * p.g - p.z * p.z) * (-p.k() * sigma).exp()
}

/// `4(1 + gΣ_z)/Σ_z² + g² - z²`, whose zero in `z` defines `g_c`.
pub fn crossing_function(g: f64, z: f64) -> f64 {
    let sz = sigma_z_of_k(g + z);
    4.0 * (1.0 + g * sz) / (sz * sz) + g * g - z * z
}

fn crossing_derivative(g: f64, z: f64) -> f64 {
    let sz = sigma_z_of_k(g + z);
    let dsz = -sz * sz / (2.0 + (g + z) * sz);
    4.0 * g * dsz / (sz * sz) - 8.0 * (1.0 + g * sz) * dsz / (sz * sz * sz) - 2.0 * z
}

/// Critical cross coupling `g_c(g)`.
pub fn g_crit(g: f64) -> Result<f64> {
    check_finite("g", g)?;
    if g < 0.0 {
        return Err(Error::InvalidParameter {
            name: "g",
            value: g,
            reason: "self coupling must be non-negative",
        });
    }
    let lo = (1.0 + g * g).sqrt();
    let hi = grow_until(lo, lo, |z| crossing_function(g, z) < 0.0)?;
    bisect_polish(
        |z| crossing_function(g, z),
        |z| crossing_derivative(g, z),
        lo,
        hi,
    )
}

fn require_supercritical(p: &TwoSpeciesParams) -> Result<f64> {
    let g_c = g_crit(p.g)?;
    if p.z <= g_c {
        return Err(Error::Subcritical { g: p.g, z: p.z, g_c });
    }
    Ok(g_c)
}

fn sigma_c_unchecked(p: &TwoSpeciesParams, sz: f64) -> Result<f64> {
    let (g, k) = (p.g, p.k());
    let target = (p.z * p.z - g * g).ln();
    let h = |s: f64| (g * s).ln_1p() + k * s - target;
    let dh = |s: f64| g / (1.0 + g * s) + k;
    let hi = grow_until(sz, sz, |s| h(s) > 0.0)?;
    bisect_polish(h, dh, sz, hi)
}

/// Turning point of the branch potentials, present only for `z > g_c`.
pub fn sigma_c(p: &TwoSpeciesParams) -> Result<f64> {
    require_supercritical(p)?;
    sigma_c_unchecked(p, sigma_z(p))
}

/// `φ_{A,c} = -φ_A(Σ_c)`.
pub fn phi_ac(p: &TwoSpeciesParams) -> Result<f64> {
    Ok(-phi_on_branch(sigma_c(p)?, p, BranchId::A)?)
}

pub fn critical_set(p: &TwoSpeciesParams) -> Result<CriticalSet> {
    let sz = sigma_z(p);
    let g_c = g_crit(p.g)?;
    if p.z > g_c {
        let sc = sigma_c_unchecked(p, sz)?;
        let pac = -phi_on_branch(sc, p, BranchId::A)?;
        Ok(CriticalSet {
            sigma_z: sz,
            g_c,
            sigma_c: Some(sc),
            phi_ac: Some(pac),
        })
    } else {
        Ok(CriticalSet {
            sigma_z: sz,
            g_c,
            sigma_c: None,
            phi_ac: None,
        })
    }
}

pub fn inverse_sigma(phi: f64, p: &TwoSpeciesParams, segment: SegmentTag) -> Result<f64> {
    PairBranches::new(*p)?.inverse_sigma(phi, segment)
}

pub fn c_diff_on_segment(phi: f64, p: &TwoSpeciesParams, segment: SegmentTag) -> Result<f64> {
    PairBranches::new(*p)?.c_diff_on_segment(phi, segment)
}

/// `d(c1 - c2)/dφ` at a given `Σ`; the same expression holds on both
/// branches. Capped at `±1e15` at the turning point.
pub fn c_diff_slope(sigma: f64, p: &TwoSpeciesParams) -> Result<f64> {
    Ok(state(sigma, p)?.cdiff_slope(p))
}

/// `d(c1 - c2)/dφ = q(Σ + 2(g+z)ξ) / (1 + gΣ + (g² - z²)ξ)` along a segment.
pub fn c_diff_slope_on_segment(phi: f64, p: &TwoSpeciesParams, segment: SegmentTag) -> Result<f64> {
    Ok(PairBranches::new(*p)?.c_diff_with_slope(phi, segment)?.1)
}

/// Single-valued `Σ(φ)` for subcritical coupling: A side for `φ ≥ 0`, B side
/// for `φ ≤ 0`.
pub fn unified_sigma(phi: f64, p: &TwoSpeciesParams) -> Result<f64> {
    check_finite("phi", phi)?;
    let g_c = g_crit(p.g)?;
    if p.z >= g_c {
        return Err(Error::Supercritical { g: p.g, z: p.z, g_c });
    }
    let sz = sigma_z(p);
    if phi == 0.0 {
        return Ok(sz);
    }
    let branch = if phi > 0.0 { BranchId::A } else { BranchId::B };
    let target = phi.abs();
    let lift = |s: f64| -> (f64, f64) {
        match state(s, p) {
            Ok(st) => {
                let d = if st.s > 0.0 { st.dphi_a(p) } else { f64::INFINITY };
                (branch.sign() * st.phi(p, branch) - target, d)
            }
            Err(_) => (-target, f64::INFINITY),
        }
    };
    let step = sz.max(1.0 / p.k().max(1e-300));
    let hi = grow_until(sz, step, |s| lift(s).0 > 0.0)?;
    newton_bracketed(lift, sz, hi, None)
}

/// Cached critical constants of a supercritical pair, for repeated inverse
/// evaluations.
#[derive(Debug, Clone, Copy)]
pub struct PairBranches {
    params: TwoSpeciesParams,
    sigma_z: f64,
    g_c: f64,
    sigma_c: f64,
    phi_ac: f64,
    /// `φ_B(Σ_c)`, equal to `φ_{A,c}` up to roundoff.
    phi_bc: f64,
    /// `√(φ_A''(Σ_c)/2)`, the local scale of `√(φ_A + φ_{A,c})`.
    curvature: f64,
}

impl PairBranches {
    pub fn new(params: TwoSpeciesParams) -> Result<Self> {
        let g_c = require_supercritical(&params)?;
        let sz = sigma_z(&params);
        let sc = sigma_c_unchecked(&params, sz)?;
        let st = state(sc, &params)?;
        let phi_ac = -st.phi(&params, BranchId::A);
        let (g, z, k) = (params.g, params.z, params.k());
        let d2 = (g + k * (z * z - g * g) * st.xi) / (params.q * st.s);
        Ok(PairBranches {
            params,
            sigma_z: sz,
            g_c,
            sigma_c: sc,
            phi_ac,
            phi_bc: st.phi(&params, BranchId::B),
            curvature: (0.5 * d2).sqrt(),
        })
    }

    pub fn params(&self) -> &TwoSpeciesParams {
        &self.params
    }

    pub fn sigma_z(&self) -> f64 {
        self.sigma_z
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    pub fn phi_ac(&self) -> f64 {
        self.phi_ac
    }

    pub fn critical(&self) -> CriticalSet {
        CriticalSet {
            sigma_z: self.sigma_z,
            g_c: self.g_c,
            sigma_c: Some(self.sigma_c),
            phi_ac: Some(self.phi_ac),
        }
    }

    pub fn segment(&self, tag: SegmentTag) -> BranchSegment {
        let pac = self.phi_ac;
        let domain = match tag {
            SegmentTag::A1 => Interval::new(-pac, f64::INFINITY),
            SegmentTag::A2 => Interval::new(-pac, 0.0),
            SegmentTag::B1 => Interval::new(f64::NEG_INFINITY, pac),
            SegmentTag::B2 => Interval::new(0.0, pac),
        };
        BranchSegment { tag, domain }
    }

    /// `Σ_c + 50/(g+z)`, beyond which `c1 - c2 = ±Σ` to double precision.
    pub fn truncation_sigma(&self) -> f64 {
        self.sigma_c + SIGMA_SPAN_FACTOR / self.params.k()
    }

    /// Finite far end of an upper segment's potential range.
    pub fn truncated_far_phi(&self, branch: BranchId) -> f64 {
        state(self.truncation_sigma(), &self.params)
            .map(|st| st.phi(&self.params, branch))
            .unwrap_or(f64::NAN)
    }

    pub fn inverse_sigma(&self, phi: f64, tag: SegmentTag) -> Result<f64> {
        self.inverse_sigma_guess(phi, tag, None)
    }

    /// Inverse map with an optional starting guess for the Newton phase.
    pub fn inverse_sigma_guess(&self, phi: f64, tag: SegmentTag, guess: Option<f64>) -> Result<f64> {
        check_finite("phi", phi)?;
        let seg = self.segment(tag);
        if !seg.domain.contains_with(phi, ENDPOINT_CLAMP) {
            return Err(Error::Domain {
                context: "potential outside the segment domain",
                value: phi,
                lo: seg.domain.lo,
                hi: seg.domain.hi,
            });
        }
        let branch = tag.branch();
        let sgn = branch.sign();
        let turn = match branch {
            BranchId::A => -self.phi_ac,
            BranchId::B => self.phi_bc,
        };
        // w = sgn·(φ - φ(Σ_c)) is non-negative and vanishes at the turning point
        let w_target = sgn * (phi - turn);
        if w_target <= 0.0 {
            return Ok(self.sigma_c);
        }
        if !tag.is_upper() && sgn * phi >= 0.0 {
            return Ok(self.sigma_z);
        }
        let u_target = w_target.sqrt();
        let p = self.params;
        let fdf = |s: f64| -> (f64, f64) {
            match state(s, &p) {
                Ok(st) => {
                    let w = (sgn * (st.phi(&p, branch) - turn)).max(0.0);
                    let u = w.sqrt();
                    let du = if u > 0.0 && st.s > 0.0 {
                        st.dphi_a(&p) / (2.0 * u)
                    } else {
                        f64::NAN
                    };
                    (u - u_target, du)
                }
                Err(_) => (f64::NAN, f64::NAN),
            }
        };
        let sc = self.sigma_c;
        if fdf(sc).0 >= 0.0 {
            return Ok(sc);
        }
        if tag.is_upper() {
            let first = (u_target / self.curvature).max(f64::EPSILON * sc);
            let hi = grow_until(sc, first, |s| fdf(s).0 >= 0.0)?;
            let g0 = guess.or(Some(sc + u_target / self.curvature));
            newton_bracketed(fdf, sc, hi, g0)
        } else {
            newton_bracketed(fdf, self.sigma_z, sc, guess)
        }
    }

    pub fn c_diff_on_segment(&self, phi: f64, tag: SegmentTag) -> Result<f64> {
        let s = self.inverse_sigma(phi, tag)?;
        Ok(tag.branch().sign() * state(s, &self.params)?.s)
    }

    /// `(c1 - c2, d(c1 - c2)/dφ)` along a segment.
    pub fn c_diff_with_slope(&self, phi: f64, tag: SegmentTag) -> Result<(f64, f64)> {
        let s = self.inverse_sigma(phi, tag)?;
        let st = state(s, &self.params)?;
        Ok((tag.branch().sign() * st.s, st.cdiff_slope(&self.params)))
    }

    /// Concentrations at potential `phi` on a segment.
    pub fn concentrations_at(&self, phi: f64, tag: SegmentTag) -> Result<(f64, ConcentrationPair)> {
        let s = self.inverse_sigma(phi, tag)?;
        Ok((s, state(s, &self.params)?.pair(tag.branch())))
    }
}

/// Quantities used by the excess-current formulas at a given `Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTerms {
    pub sigma: f64,
    /// `√(Σ² - 4ξ)`
    pub s: f64,
    /// `ξ = e^{-(g+z)Σ}`
    pub xi: f64,
    /// `1 + gΣ + (g² - z²)ξ`
    pub turning: f64,
}

pub fn sigma_terms(sigma: f64, p: &TwoSpeciesParams) -> Result<SigmaTerms> {
    let st = state(sigma, p)?;
    Ok(SigmaTerms {
        sigma,
        s: st.s,
        xi: st.xi,
        turning: st.turning_factor(p),
    })
}
