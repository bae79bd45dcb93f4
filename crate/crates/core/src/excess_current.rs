//! Excess current due to steric coupling, pointwise on a solution grid and
//! integrated over sub-windows `[x1, x2]`.
//!
//! Two independent integration routes are provided: quadrature of the
//! pointwise profile in `x`, and the closed-form integrand in `Σ` obtained by
//! the change of variables `x → Σ(φ(x))`.

use crate::branch_algebra::{sigma_terms, BranchId, PairBranches, SegmentTag, TwoSpeciesParams};
use crate::bvp_solver::BvpSolution;
use crate::error::{check_finite, Error, Result};
use crate::exec::Execution;
use crate::grid::{derivative, interpolate_cubic, SimpsonProfile};
use crate::quadrature::adaptive_simpson;
use crate::rhs_assembly::{FourSpeciesConfig, ThreeSpeciesConfig};

/// Distance from `Σ_c` below which an integration endpoint is flagged.
pub const SINGULAR_ENDPOINT_DISTANCE: f64 = 1e-10;
/// Largest algebraic-system residual accepted by [`generic_current`].
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSet {
    d: Vec<f64>,
    charge_scale: f64,
}

impl DiffusionSet {
    pub fn new(d: Vec<f64>, charge_scale: f64) -> Result<Self> {
        for &v in &d {
            check_finite("diffusion constant", v)?;
            if v <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "diffusion constant",
                    value: v,
                    reason: "must be positive",
                });
            }
        }
        check_finite("charge_scale", charge_scale)?;
        if charge_scale <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "charge_scale",
                value: charge_scale,
                reason: "must be positive",
            });
        }
        Ok(DiffusionSet { d, charge_scale })
    }

    /// Unit charge scale.
    pub fn unit(d: Vec<f64>) -> Result<Self> {
        Self::new(d, 1.0)
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn charge_scale(&self) -> f64 {
        self.charge_scale
    }

    fn require(&self, n: usize) -> Result<()> {
        if self.d.len() != n {
            return Err(Error::Length {
                what: "diffusion constants",
                got: self.d.len(),
                expected: n,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurrentWarning {
    /// An integration endpoint sits on the turning point, where the
    /// `Σ`-integrand has an integrable singularity.
    EndpointSingularity { endpoint: usize, sigma: f64, sigma_c: f64 },
}

impl std::fmt::Display for CurrentWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurrentWarning::EndpointSingularity {
                endpoint,
                sigma,
                sigma_c,
            } => write!(
                f,
                "integration endpoint {endpoint} at Sigma = {sigma} is within {SINGULAR_ENDPOINT_DISTANCE:e} of Sigma_c = {sigma_c}"
            ),
        }
    }
}

/// A current profile on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentProfile {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

/// One pair's contribution: parameters, the two diffusion constants and the
/// segment the pair lives on.
#[derive(Debug, Clone, Copy)]
struct PairTerm<'a> {
    branches: &'a PairBranches,
    d_neg: f64,
    d_pos: f64,
    tag: SegmentTag,
}

/// `ĩ(Σ)` with `I = q² e ĩ(Σ) φ'` on the given branch.
fn reduced_current(sigma: f64, p: &TwoSpeciesParams, d_neg: f64, d_pos: f64, branch: BranchId) -> Result<f64> {
    let t = sigma_terms(sigma, p)?;
    let k = p.k();
    let half_diff = 0.5 * (d_pos - d_neg);
    let half_sum = 0.5 * (d_neg + d_pos);
    let stretch = t.sigma + 2.0 * k * t.xi;
    Ok(match branch {
        BranchId::A => (half_diff * t.s - half_sum * stretch) / t.turning + half_sum * t.sigma - half_diff * t.s,
        BranchId::B => (-half_diff * t.s - half_sum * stretch) / t.turning + half_sum * t.sigma + half_diff * t.s,
    })
}

/// Integrand in `Σ` of `∫ I dx`, without the `q e` prefactor.
fn sigma_integrand(sigma: f64, p: &TwoSpeciesParams, d_neg: f64, d_pos: f64, branch: BranchId) -> f64 {
    let Ok(t) = sigma_terms(sigma, p) else {
        return f64::NAN;
    };
    let (g, z, k) = (p.g(), p.z(), p.k());
    let first = 0.5 * (d_pos - d_neg) * (1.0 - t.turning);
    let second = 0.5 * (d_neg + d_pos) / t.s * (g * sigma * sigma + (g * g - z * z) * sigma * t.xi - 2.0 * k * t.xi);
    first + branch.sign() * second
}

fn branch_mismatch(node: usize, phi: f64, b: &PairBranches, tag: SegmentTag) -> Error {
    let d = b.segment(tag).domain;
    Error::BranchMismatch {
        node,
        phi,
        lo: d.lo,
        hi: d.hi,
    }
}

fn segment_sigma(b: &PairBranches, tag: SegmentTag, phi: f64, node: usize) -> Result<f64> {
    if !b.segment(tag).domain.contains(phi) {
        return Err(branch_mismatch(node, phi, b, tag));
    }
    b.inverse_sigma(phi, tag)
}

fn pointwise_pairs(solution: &BvpSolution, terms: &[PairTerm<'_>], charge_scale: f64) -> Result<Vec<f64>> {
    let dphi = derivative(&solution.values, solution.spacing());
    let idx: Vec<usize> = (0..solution.values.len()).collect();
    let out = Execution::default().map(&idx, |&i| -> Result<f64> {
        let phi = solution.values[i];
        let mut total = 0.0;
        for t in terms {
            let p = t.branches.params();
            let sigma = segment_sigma(t.branches, t.tag, phi, i)?;
            let q = p.q();
            total += q * q * reduced_current(sigma, p, t.d_neg, t.d_pos, t.tag.branch())? * dphi[i];
        }
        Ok(charge_scale * total)
    });
    out.into_iter().collect()
}

fn check_window(solution: &BvpSolution, x1: f64, x2: f64) -> Result<()> {
    check_finite("x1", x1)?;
    check_finite("x2", x2)?;
    let (lo, hi) = (solution.nodes[0], solution.nodes[solution.nodes.len() - 1]);
    if x1 == x2 && x1 >= lo && x1 <= hi {
        return Ok(());
    }
    if !(x1 < x2 && x1 > lo && x2 < hi) {
        return Err(Error::Bounds { x1, x2 });
    }
    Ok(())
}

fn sigma_route(
    solution: &BvpSolution,
    terms: &[PairTerm<'_>],
    charge_scale: f64,
    x1: f64,
    x2: f64,
) -> Result<(f64, Vec<CurrentWarning>)> {
    check_window(solution, x1, x2)?;
    if x1 == x2 {
        return Ok((0.0, Vec::new()));
    }
    let ends = [x1, x2].map(|x| interpolate_cubic(&solution.nodes, &solution.values, x));
    let mut warnings = Vec::new();
    let mut total = 0.0;
    for t in terms {
        let p = *t.branches.params();
        let branch = t.tag.branch();
        let mut sig = [0.0; 2];
        for (j, &phi) in ends.iter().enumerate() {
            let node = if j == 0 { 0 } else { solution.nodes.len() - 1 };
            sig[j] = segment_sigma(t.branches, t.tag, phi, node)?;
            let sc = t.branches.sigma_c();
            if (sig[j] - sc).abs() <= SINGULAR_ENDPOINT_DISTANCE {
                warnings.push(CurrentWarning::EndpointSingularity {
                    endpoint: j,
                    sigma: sig[j],
                    sigma_c: sc,
                });
            }
        }
        let q = adaptive_simpson(|s| sigma_integrand(s, &p, t.d_neg, t.d_pos, branch), sig[0], sig[1]);
        total += p.q() * q.value;
    }
    Ok((charge_scale * total, warnings))
}

/// Pointwise excess current for a three-species solution on branch `label`.
pub fn pointwise_current_three(
    solution: &BvpSolution,
    config: &ThreeSpeciesConfig,
    diff: &DiffusionSet,
    label: BranchId,
) -> Result<CurrentProfile> {
    diff.require(3)?;
    let b = config.branches()?;
    let terms = [PairTerm {
        branches: &b,
        d_neg: diff.d[0],
        d_pos: diff.d[1],
        tag: label.upper_segment(),
    }];
    Ok(CurrentProfile {
        nodes: solution.nodes.clone(),
        values: pointwise_pairs(solution, &terms, diff.charge_scale)?,
    })
}

/// Pointwise excess current for a four-species solution: the pair-12 term
/// plus the pair-34 term on its own segment.
pub fn pointwise_current_four(
    solution: &BvpSolution,
    config: &FourSpeciesConfig,
    diff: &DiffusionSet,
    label: BranchId,
) -> Result<CurrentProfile> {
    diff.require(4)?;
    let (b12, b34) = config.branches()?;
    let terms = four_terms(&b12, &b34, diff, label);
    Ok(CurrentProfile {
        nodes: solution.nodes.clone(),
        values: pointwise_pairs(solution, &terms, diff.charge_scale)?,
    })
}

fn four_terms<'a>(
    b12: &'a PairBranches,
    b34: &'a PairBranches,
    diff: &DiffusionSet,
    label: BranchId,
) -> [PairTerm<'a>; 2] {
    let (t12, t34) = FourSpeciesConfig::segments(label);
    [
        PairTerm {
            branches: b12,
            d_neg: diff.d[0],
            d_pos: diff.d[1],
            tag: t12,
        },
        PairTerm {
            branches: b34,
            d_neg: diff.d[2],
            d_pos: diff.d[3],
            tag: t34,
        },
    ]
}

/// `∫_{x1}^{x2} I dx` by exact integration of the piecewise-quadratic
/// interpolant of the profile. Requires `-1 < x1 < x2 < 1`; `x1 == x2`
/// gives zero.
pub fn integral_current_x(profile: &CurrentProfile, x1: f64, x2: f64) -> Result<f64> {
    check_finite("x1", x1)?;
    check_finite("x2", x2)?;
    let sp = SimpsonProfile::new(&profile.nodes, &profile.values)?;
    let (lo, hi) = sp.span();
    if x1 == x2 && x1 >= lo && x1 <= hi {
        return Ok(0.0);
    }
    if !(x1 < x2 && x1 > lo && x2 < hi) {
        return Err(Error::Bounds { x1, x2 });
    }
    Ok(sp.integral(x1, x2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaIntegral {
    pub value: f64,
    pub warnings: Vec<CurrentWarning>,
}

/// `∫_{x1}^{x2} I dx` through the `Σ` substitution for a three-species
/// solution.
pub fn integral_current_sigma_three(
    solution: &BvpSolution,
    config: &ThreeSpeciesConfig,
    diff: &DiffusionSet,
    label: BranchId,
    x1: f64,
    x2: f64,
) -> Result<SigmaIntegral> {
    diff.require(3)?;
    let b = config.branches()?;
    let terms = [PairTerm {
        branches: &b,
        d_neg: diff.d[0],
        d_pos: diff.d[1],
        tag: label.upper_segment(),
    }];
    let (value, warnings) = sigma_route(solution, &terms, diff.charge_scale, x1, x2)?;
    Ok(SigmaIntegral { value, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourSpeciesIntegral {
    /// Sum of both pair integrals by the `Σ` route.
    pub sigma_route: f64,
    /// The same integral from the pointwise profile.
    pub x_route: f64,
    pub pair12: f64,
    pub pair34: f64,
    pub warnings: Vec<CurrentWarning>,
}

pub fn integral_current_four(
    solution: &BvpSolution,
    config: &FourSpeciesConfig,
    diff: &DiffusionSet,
    label: BranchId,
    x1: f64,
    x2: f64,
) -> Result<FourSpeciesIntegral> {
    diff.require(4)?;
    let (b12, b34) = config.branches()?;
    let terms = four_terms(&b12, &b34, diff, label);
    let (pair12, mut warnings) = sigma_route(solution, &terms[..1], diff.charge_scale, x1, x2)?;
    let (pair34, w34) = sigma_route(solution, &terms[1..], diff.charge_scale, x1, x2)?;
    warnings.extend(w34);
    let profile = CurrentProfile {
        nodes: solution.nodes.clone(),
        values: pointwise_pairs(solution, &terms, diff.charge_scale)?,
    };
    Ok(FourSpeciesIntegral {
        sigma_route: pair12 + pair34,
        x_route: integral_current_x(&profile, x1, x2)?,
        pair12,
        pair34,
        warnings,
    })
}

/// Concentration profiles of every species with their valences and the
/// steric coupling matrix `g_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesProfiles {
    pub nodes: Vec<f64>,
    pub phi: Vec<f64>,
    pub concentrations: Vec<Vec<f64>>,
    pub valences: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
}

impl SpeciesProfiles {
    /// Largest `|ln c_i + z_i φ + Σ_j g_ij c_j|` as `(species, node, residual)`.
    pub fn worst_residual(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0f64);
        for (i, ci) in self.concentrations.iter().enumerate() {
            for (n, &c) in ci.iter().enumerate() {
                let steric: f64 = self.coupling[i]
                    .iter()
                    .zip(&self.concentrations)
                    .map(|(g, cj)| g * cj[n])
                    .sum();
                let r = (c.ln() + self.valences[i] * self.phi[n] + steric).abs();
                if !(r <= worst.2) {
                    worst = (i, n, r);
                }
            }
        }
        worst
    }
}

/// Species profiles of a three-species solution, ordered `[c1, c2, c3]`.
pub fn three_species_profiles(
    solution: &BvpSolution,
    config: &ThreeSpeciesConfig,
    label: BranchId,
) -> Result<SpeciesProfiles> {
    let b = config.branches()?;
    let tag = label.upper_segment();
    let rows = Execution::default().map(&solution.values, |&phi| config.concentrations(&b, phi, label));
    let mut conc: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(rows.len())).collect();
    for (node, r) in rows.into_iter().enumerate() {
        let (_, c) = r.map_err(|_| branch_mismatch(node, solution.values[node], &b, tag))?;
        for (k, v) in c.into_iter().enumerate() {
            conc[k].push(v);
        }
    }
    let p = config.pair;
    Ok(SpeciesProfiles {
        nodes: solution.nodes.clone(),
        phi: solution.values.clone(),
        concentrations: conc,
        valences: vec![-p.q(), p.q(), config.z3],
        coupling: vec![vec![p.g(), p.z(), 0.0], vec![p.z(), p.g(), 0.0], vec![0.0; 3]],
    })
}

/// Species profiles of a four-species solution, ordered `[c1, c2, c3, c4]`.
pub fn four_species_profiles(
    solution: &BvpSolution,
    config: &FourSpeciesConfig,
    label: BranchId,
) -> Result<SpeciesProfiles> {
    let b = config.branches()?;
    let rows = Execution::default().map(&solution.values, |&phi| config.concentrations(&b, phi, label));
    let mut conc: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(rows.len())).collect();
    for (node, r) in rows.into_iter().enumerate() {
        let (_, _, c) = r.map_err(|_| {
            let (t12, _) = FourSpeciesConfig::segments(label);
            branch_mismatch(node, solution.values[node], &b.0, t12)
        })?;
        for (k, v) in c.into_iter().enumerate() {
            conc[k].push(v);
        }
    }
    let (p, t) = (config.pair12, config.pair34);
    Ok(SpeciesProfiles {
        nodes: solution.nodes.clone(),
        phi: solution.values.clone(),
        concentrations: conc,
        valences: vec![-p.q(), p.q(), -t.q(), t.q()],
        coupling: vec![
            vec![p.g(), p.z(), 0.0, 0.0],
            vec![p.z(), p.g(), 0.0, 0.0],
            vec![0.0, 0.0, t.g(), t.z()],
            vec![0.0, 0.0, t.z(), t.g()],
        ],
    })
}

/// `I = Σ_i z_i e D_i (c_i' + z_i c_i φ')` on the grid, written as
/// `z_i e D_i c_i ((ln c_i)' + z_i φ')` with second-order differences.
pub fn generic_current(profiles: &SpeciesProfiles, diff: &DiffusionSet) -> Result<CurrentProfile> {
    let n_species = profiles.concentrations.len();
    diff.require(n_species)?;
    if profiles.valences.len() != n_species {
        return Err(Error::Length {
            what: "valences",
            got: profiles.valences.len(),
            expected: n_species,
        });
    }
    let n = profiles.phi.len();
    for c in &profiles.concentrations {
        if c.len() != n {
            return Err(Error::Length {
                what: "concentration profile",
                got: c.len(),
                expected: n,
            });
        }
    }
    let (species, node, residual) = profiles.worst_residual();
    if !(residual <= CONSISTENCY_TOLERANCE) {
        return Err(Error::Consistency {
            species,
            node,
            residual,
        });
    }
    let h = crate::grid::spacing(&profiles.nodes);
    let dphi = derivative(&profiles.phi, h);
    let mut values = vec![0.0; n];
    for (i, c) in profiles.concentrations.iter().enumerate() {
        let logs: Vec<f64> = c.iter().map(|v| v.ln()).collect();
        let dlog = derivative(&logs, h);
        let z = profiles.valences[i];
        for k in 0..n {
            values[k] += z * diff.charge_scale * diff.d[i] * c[k] * (dlog[k] + z * dphi[k]);
        }
    }
    Ok(CurrentProfile {
        nodes: profiles.nodes.clone(),
        values,
    })
}

/// Pointwise profile with both integration routes over `[x1, x2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentReport {
    pub pointwise: CurrentProfile,
    pub integral_x: f64,
    pub integral_sigma: f64,
    pub label: BranchId,
    pub bounds: (f64, f64),
    pub warnings: Vec<CurrentWarning>,
}

impl CurrentReport {
    /// `max(1e-6, 1e-4 |integral_sigma|)`.
    pub fn route_tolerance(&self) -> f64 {
        1e-6f64.max(1e-4 * self.integral_sigma.abs())
    }

    pub fn routes_agree(&self) -> bool {
        (self.integral_x - self.integral_sigma).abs() <= self.route_tolerance()
    }
}

pub fn current_report_three(
    solution: &BvpSolution,
    config: &ThreeSpeciesConfig,
    diff: &DiffusionSet,
    label: BranchId,
    x1: f64,
    x2: f64,
) -> Result<CurrentReport> {
    let pointwise = pointwise_current_three(solution, config, diff, label)?;
    let integral_x = integral_current_x(&pointwise, x1, x2)?;
    let sig = integral_current_sigma_three(solution, config, diff, label, x1, x2)?;
    Ok(CurrentReport {
        pointwise,
        integral_x,
        integral_sigma: sig.value,
        label,
        bounds: (x1, x2),
        warnings: sig.warnings,
    })
}

pub fn current_report_four(
    solution: &BvpSolution,
    config: &FourSpeciesConfig,
    diff: &DiffusionSet,
    label: BranchId,
    x1: f64,
    x2: f64,
) -> Result<CurrentReport> {
    let pointwise = pointwise_current_four(solution, config, diff, label)?;
    let four = integral_current_four(solution, config, diff, label, x1, x2)?;
    Ok(CurrentReport {
        pointwise,
        integral_x: four.x_route,
        integral_sigma: four.sigma_route,
        label,
        bounds: (x1, x2),
        warnings: four.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp_solver::{solve, BvpProblem, RobinBC};
    use crate::rhs_assembly::{assemble_four_species, assemble_three_species};

    const REFERENCE_NODES: usize = 1601;

    fn three() -> ThreeSpeciesConfig {
        ThreeSpeciesConfig::new(TwoSpeciesParams::new(1.0, 20.0, 1.0).unwrap(), 1.0, 0.5).unwrap()
    }

    fn solve_three(cfg: &ThreeSpeciesConfig, label: BranchId, dl: f64, dr: f64, n: Option<usize>) -> BvpSolution {
        let rhs = assemble_three_species(cfg, label).unwrap();
        let c = rhs.root().unwrap();
        let p = BvpProblem::new(1e-2, rhs, RobinBC::new(c + dl, c + dr, 0.05).unwrap(), n).unwrap();
        solve(&p).unwrap()
    }

    /// The integrands as printed for unit valence.
    fn printed_integrand(s: f64, g: f64, z: f64, d1: f64, d2: f64, branch: BranchId) -> f64 {
        let k = g + z;
        let xi = (-k * s).exp();
        let root = (s * s - 4.0 * xi).sqrt();
        let first = 0.5 * (d2 - d1) * (-(g * s + (g * g - z * z) * xi));
        let brace = -g * s * s + k * (2.0 - (g - z) * s) * xi;
        let second = (d1 + d2) / (2.0 * root) * brace;
        match branch {
            BranchId::A => first - second,
            BranchId::B => first + second,
        }
    }

    #[test]
    fn unit_valence_integrand_matches_printed_form() {
        let p = TwoSpeciesParams::new(1.0, 20.0, 1.0).unwrap();
        for &s in &[0.3, 0.5, 1.0, 2.5] {
            for b in [BranchId::A, BranchId::B] {
                let a = sigma_integrand(s, &p, 1.0, 2.5, b);
                let w = printed_integrand(s, 1.0, 20.0, 1.0, 2.5, b);
                assert!((a - w).abs() <= 1e-12 * (1.0 + w.abs()), "{a} {w}");
            }
        }
    }

    #[test]
    fn equal_diffusion_drops_difference_terms() {
        let p = TwoSpeciesParams::new(1.0, 20.0, 1.0).unwrap();
        let t = sigma_terms(0.7, &p).unwrap();
        let k = p.k();
        let want = 0.5 * (3.0 + 3.0) * (t.sigma - (t.sigma + 2.0 * k * t.xi) / t.turning);
        let got = reduced_current(0.7, &p, 3.0, 3.0, BranchId::A).unwrap();
        assert!((got - want).abs() < 1e-12);
        let got_b = reduced_current(0.7, &p, 3.0, 3.0, BranchId::B).unwrap();
        assert!((got_b - want).abs() < 1e-12);
    }

    #[test]
    fn constant_solution_carries_no_current() {
        let cfg = three();
        let sol = solve_three(&cfg, BranchId::A, 0.0, 0.0, None);
        let diff = DiffusionSet::unit(vec![1.0, 2.0, 1.0]).unwrap();
        let rep = current_report_three(&sol, &cfg, &diff, BranchId::A, -0.5, 0.5).unwrap();
        assert!(rep.pointwise.values.iter().all(|&v| v == 0.0));
        assert_eq!(rep.integral_x, 0.0);
        assert_eq!(rep.integral_sigma, 0.0);
    }

    #[test]
    fn empty_window_and_bounds() {
        let cfg = three();
        let sol = solve_three(&cfg, BranchId::A, 0.3, -0.2, None);
        let diff = DiffusionSet::unit(vec![1.0, 2.0, 1.0]).unwrap();
        let prof = pointwise_current_three(&sol, &cfg, &diff, BranchId::A).unwrap();
        assert_eq!(integral_current_x(&prof, 0.2, 0.2).unwrap(), 0.0);
        assert!(matches!(integral_current_x(&prof, 0.3, 0.2), Err(Error::Bounds { .. })));
        assert!(matches!(integral_current_x(&prof, -1.0, 0.2), Err(Error::Bounds { .. })));
        let s = integral_current_sigma_three(&sol, &cfg, &diff, BranchId::A, 0.2, 0.2).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn routes_agree_three_species_both_branches() {
        let cfg = ThreeSpeciesConfig::new(TwoSpeciesParams::new(1.0, 50.0, 1.0).unwrap(), 1.0, 0.5).unwrap();
        let diff = DiffusionSet::unit(vec![1.0, 2.0, 1.0]).unwrap();
        for label in [BranchId::A, BranchId::B] {
            let sol = solve_three(&cfg, label, 0.3, -0.2, Some(REFERENCE_NODES));
            let rep = current_report_three(&sol, &cfg, &diff, label, -0.9, 0.7).unwrap();
            assert!(rep.routes_agree(), "{label:?}: {} vs {}", rep.integral_x, rep.integral_sigma);
            assert!(rep.warnings.is_empty());
        }
    }

    #[test]
    fn routes_agree_for_non_unit_valence() {
        let cfg = ThreeSpeciesConfig::new(TwoSpeciesParams::new(1.0, 20.0, 2.0).unwrap(), 1.0, 0.5).unwrap();
        let diff = DiffusionSet::new(vec![1.0, 3.0, 1.0], 1.5).unwrap();
        let sol = solve_three(&cfg, BranchId::A, 0.2, -0.1, Some(REFERENCE_NODES));
        let rep = current_report_three(&sol, &cfg, &diff, BranchId::A, -0.8, 0.6).unwrap();
        assert!(rep.routes_agree(), "{} vs {}", rep.integral_x, rep.integral_sigma);
    }

    #[test]
    fn generic_formula_matches_branch_formula() {
        let cfg = three();
        let diff = DiffusionSet::unit(vec![1.0, 2.0, 1.0]).unwrap();
        let sol = solve_three(&cfg, BranchId::A, 0.3, -0.2, Some(4001));
        let prof = pointwise_current_three(&sol, &cfg, &diff, BranchId::A).unwrap();
        let species = three_species_profiles(&sol, &cfg, BranchId::A).unwrap();
        let gen = generic_current(&species, &diff).unwrap();
        let n = prof.values.len();
        for k in 1..n - 1 {
            assert!((prof.values[k] - gen.values[k]).abs() < 1e-6, "node {k}");
        }
    }

    #[test]
    fn boltzmann_species_carries_no_current() {
        let cfg = three();
        let sol = solve_three(&cfg, BranchId::A, 0.3, -0.2, None);
        let mut species = three_species_profiles(&sol, &cfg, BranchId::A).unwrap();
        species.concentrations.truncate(3);
        let diff = DiffusionSet::unit(vec![1e-300, 1e-300, 1.0]).unwrap();
        let gen = generic_current(&species, &diff).unwrap();
        for v in &gen.values {
            assert!(v.abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn inconsistent_profiles_are_rejected() {
        let cfg = three();
        let sol = solve_three(&cfg, BranchId::A, 0.3, -0.2, None);
        let mut species = three_species_profiles(&sol, &cfg, BranchId::A).unwrap();
        species.concentrations[0][5] *= 1.001;
        let diff = DiffusionSet::unit(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(generic_current(&species, &diff), Err(Error::Consistency { node: 5, .. })));
    }

    #[test]
    fn four_species_routes_agree() {
        let p = TwoSpeciesParams::new(1.0, 50.0, 1.0).unwrap();
        let cfg = FourSpeciesConfig::new(p, p, 0.5).unwrap();
        let diff = DiffusionSet::unit(vec![1.0, 2.0, 1.5, 0.5]).unwrap();
        for label in [BranchId::A, BranchId::B] {
            let rhs = assemble_four_species(&cfg, label).unwrap();
            let c = rhs.root().unwrap();
            let d = rhs.domain();
            let (l, r) = (c + 0.4 * (d.hi - c), c - 0.4 * (c - d.lo));
            let prob = BvpProblem::new(1e-2, rhs, RobinBC::new(l, r, 0.05).unwrap(), Some(REFERENCE_NODES)).unwrap();
            let sol = solve(&prob).unwrap();
            let four = integral_current_four(&sol, &cfg, &diff, label, -0.9, 0.8).unwrap();
            let tol = 1e-6f64.max(1e-4 * four.sigma_route.abs());
            assert!((four.x_route - four.sigma_route).abs() <= tol, "{label:?} {four:?}");
            let species = four_species_profiles(&sol, &cfg, label).unwrap();
            let gen = generic_current(&species, &diff).unwrap();
            let pw = pointwise_current_four(&sol, &cfg, &diff, label).unwrap();
            let worst = (1..gen.values.len() - 1)
                .map(|k| (gen.values[k] - pw.values[k]).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-4, "{label:?} {worst}");
        }
    }

    #[test]
    fn rejects_bad_diffusion() {
        assert!(DiffusionSet::unit(vec![1.0, 0.0]).is_err());
        assert!(DiffusionSet::new(vec![1.0], 0.0).is_err());
        let cfg = three();
        let sol = solve_three(&cfg, BranchId::A, 0.1, 0.1, None);
        let diff = DiffusionSet::unit(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            pointwise_current_three(&sol, &cfg, &diff, BranchId::A),
            Err(Error::Length { .. })
        ));
    }
}
