//! Mode pipelines.

use pnp_steric::branch_algebra::{
    concentrations, critical_set, phi_on_branch, BranchId, TwoSpeciesParams, SIGMA_SPAN_FACTOR,
};
use pnp_steric::bvp_solver::{classify_solution, solve_with, BvpOptions, BvpProblem, BvpSolution, RobinBC};
use pnp_steric::excess_current::{current_report_four, current_report_three, CurrentReport};
use pnp_steric::rhs_assembly::{assemble_four_species, assemble_three_species, RhsFunction};
use pnp_steric::Execution;

use crate::config::{Boundary, Mode, RunConfig, Species};
use crate::error::{CliError, Result};
use crate::report::{Results, RunReport, SweepPoint, Table};

/// Smallest offset from `Σ_z` in a branch table, relative to the span.
const FIRST_OFFSET: f64 = 1e-8;

pub fn run(config: &RunConfig) -> Result<RunReport> {
    if config.mode == Mode::Sweep {
        return run_sweep(config);
    }
    let mut warnings = Vec::new();
    let species = config.species()?;
    let exec: Execution = config.execution.into();
    let results = match config.mode {
        Mode::Branches => branches(config, &species, exec)?,
        Mode::Critical => critical(&species, &mut warnings)?,
        Mode::Solve => solve_mode(config, &species, exec, &mut warnings)?,
        Mode::Current => current_mode(config, &species, exec, &mut warnings)?,
        Mode::Sweep => unreachable!(),
    };
    RunReport::new(config.clone(), results, warnings)
}

fn run_sweep(config: &RunConfig) -> Result<RunReport> {
    let sweep = config.sweep.as_ref().expect("sweep mode carries a sweep section");
    let indexed: Vec<(usize, f64)> = sweep.values.iter().copied().enumerate().collect();
    let exec: Execution = config.execution.into();
    let points = exec.map_tasks(&indexed, |&(index, value)| {
        let outcome = config.sweep_point(value).and_then(|c| run(&c));
        match outcome {
            Ok(report) => SweepPoint {
                index,
                value,
                status: 0,
                error: None,
                report: Some(report),
            },
            Err(e) => SweepPoint {
                index,
                value,
                status: e.exit_code(),
                error: Some(e.to_string()),
                report: None,
            },
        }
    });
    let warnings = points
        .iter()
        .filter_map(|p| {
            p.error
                .as_ref()
                .map(|e| format!("sweep point {} ({} = {}): {e}", p.index, sweep.parameter.as_str(), p.value))
        })
        .collect();
    let results = Results {
        sweep: points,
        ..Results::default()
    };
    RunReport::new(config.clone(), results, warnings)
}

fn pairs(species: &Species) -> Vec<(&'static str, TwoSpeciesParams)> {
    match species {
        Species::Two(p) => vec![("", *p)],
        Species::Three(c) => vec![("", c.pair)],
        Species::Four(c) => vec![("pair12_", c.pair12), ("pair34_", c.pair34)],
    }
}

fn critical_scalars(results: &mut Results, prefix: &str, p: &TwoSpeciesParams) -> Result<Option<f64>> {
    let cs = critical_set(p).map_err(CliError::compute("critical constants"))?;
    results.scalar(format!("{prefix}sigma_z"), cs.sigma_z);
    results.scalar(format!("{prefix}g_c"), cs.g_c);
    if let (Some(sc), Some(pac)) = (cs.sigma_c, cs.phi_ac) {
        results.scalar(format!("{prefix}sigma_c"), sc);
        results.scalar(format!("{prefix}phi_Ac"), pac);
    }
    let regime = if cs.sigma_c.is_some() { "supercritical" } else { "subcritical" };
    results.label(format!("{prefix}regime"), regime);
    Ok(cs.sigma_c)
}

fn branches(config: &RunConfig, species: &Species, exec: Execution) -> Result<Results> {
    let mut results = Results::default();
    for (prefix, p) in pairs(species) {
        let sc = critical_scalars(&mut results, prefix, &p)?;
        let sz = pnp_steric::branch_algebra::sigma_z(&p);
        let span = sc.unwrap_or(sz) - sz + SIGMA_SPAN_FACTOR / p.k();
        let n = config.branch_points;
        let rows = exec.map_index(n, |i| {
            let sigma = if i == 0 {
                sz
            } else {
                let t = if n > 2 { (i - 1) as f64 / (n - 2) as f64 } else { 1.0 };
                sz + span * FIRST_OFFSET.powf(1.0 - t)
            };
            let c = concentrations(sigma, &p, BranchId::A)?;
            let pa = phi_on_branch(sigma, &p, BranchId::A)?;
            let pb = phi_on_branch(sigma, &p, BranchId::B)?;
            Ok(vec![sigma, c.c1, c.c2, pa, pb])
        });
        let name = if prefix.is_empty() { "branches".to_string() } else { prefix.trim_end_matches('_').to_string() };
        let mut table = Table::new(name, &["sigma", "c1", "c2", "phi_A", "phi_B"]);
        for r in rows {
            table.push(r.map_err(CliError::compute("branch table"))?);
        }
        results.tables.push(table);
    }
    Ok(results)
}

fn critical(species: &Species, warnings: &mut Vec<String>) -> Result<Results> {
    let mut results = Results::default();
    let mut supercritical = true;
    for (prefix, p) in pairs(species) {
        supercritical &= critical_scalars(&mut results, prefix, &p)?.is_some();
    }
    if supercritical && !matches!(species, Species::Two(_)) {
        for label in [BranchId::A, BranchId::B] {
            match assemble(species, label) {
                Ok(rhs) => {
                    if let Some(c) = rhs.root() {
                        results.scalar(format!("root_{label:?}"), c);
                    }
                }
                Err(e) => warnings.push(format!("branch {label:?} has no bulk root: {e}")),
            }
        }
    }
    Ok(results)
}

fn assemble(species: &Species, label: BranchId) -> Result<RhsFunction> {
    match species {
        Species::Three(c) => assemble_three_species(c, label).map_err(CliError::compute("rhs assembly")),
        Species::Four(c) => assemble_four_species(c, label).map_err(CliError::compute("rhs assembly")),
        Species::Two(_) => Err(CliError::Config("a two-species configuration has no rhs".into())),
    }
}

struct Solved {
    solution: BvpSolution,
    root: f64,
    label: BranchId,
}

fn solve_branch(config: &RunConfig, species: &Species, exec: Execution) -> Result<Solved> {
    let bvp = config
        .bvp
        .as_ref()
        .ok_or_else(|| CliError::Config("bvp section required".into()))?;
    let label: BranchId = bvp.branch.into();
    let rhs = assemble(species, label)?;
    let root = rhs
        .root()
        .ok_or_else(|| CliError::Config(format!("branch {label:?} has no bulk root")))?;
    let value = |b: Boundary| match b {
        Boundary::Root => root,
        Boundary::Value(v) => v,
    };
    let bc = RobinBC::new(value(bvp.phi0_left), value(bvp.phi0_right), bvp.eta)
        .map_err(|e| CliError::Config(format!("bvp: {e}")))?;
    let problem =
        BvpProblem::new(bvp.epsilon, rhs, bc, bvp.n_nodes).map_err(|e| CliError::Config(format!("bvp: {e}")))?;
    let solution =
        solve_with(&problem, &BvpOptions::default().with_execution(exec)).map_err(CliError::compute("solve"))?;
    Ok(Solved { solution, root, label })
}

fn solve_scalars(results: &mut Results, s: &Solved, warnings: &mut Vec<String>) {
    let sol = &s.solution;
    results.scalar("root", s.root);
    results.scalar("epsilon", sol.epsilon);
    results.scalar("eta", sol.bc.eta);
    results.scalar("phi0_left", sol.bc.phi0_left);
    results.scalar("phi0_right", sol.bc.phi0_right);
    results.scalar("n_nodes", sol.nodes.len() as f64);
    results.scalar("iterations", sol.iterations as f64);
    results.scalar("residual_norm", sol.residual_norm);
    results.scalar("tolerance", sol.tolerance);
    results.label("branch", format!("{:?}", s.label));
    match classify_solution(sol, s.root) {
        Ok(c) => results.label("classification", c.as_str()),
        Err(e) => {
            results.label("classification", "inconsistent");
            warnings.push(format!("classification: {e}"));
        }
    }
}

fn solve_mode(config: &RunConfig, species: &Species, exec: Execution, warnings: &mut Vec<String>) -> Result<Results> {
    let s = solve_branch(config, species, exec)?;
    let mut results = Results::default();
    solve_scalars(&mut results, &s, warnings);
    let sol = &s.solution;
    let rows: Vec<pnp_steric::Result<Vec<f64>>> = match species {
        Species::Three(c) => {
            let b = c.branches().map_err(CliError::compute("concentrations"))?;
            exec.map(&sol.values, |&phi| c.concentrations(&b, phi, s.label).map(|(_, v)| v.to_vec()))
        }
        Species::Four(c) => {
            let b = c.branches().map_err(CliError::compute("concentrations"))?;
            exec.map(&sol.values, |&phi| c.concentrations(&b, phi, s.label).map(|(_, _, v)| v.to_vec()))
        }
        Species::Two(_) => unreachable!("checked at validation"),
    };
    let columns: &[&str] = match species {
        Species::Four(_) => &["x", "phi", "c1", "c2", "c3", "c4"],
        _ => &["x", "phi", "c1", "c2", "c3"],
    };
    let mut table = Table::new("profile", columns);
    for ((x, phi), r) in sol.nodes.iter().zip(&sol.values).zip(rows) {
        let mut row = vec![*x, *phi];
        row.extend(r.map_err(CliError::compute("concentrations"))?);
        table.push(row);
    }
    results.tables.push(table);
    Ok(results)
}

fn current_mode(config: &RunConfig, species: &Species, exec: Execution, warnings: &mut Vec<String>) -> Result<Results> {
    let cur = config
        .current
        .as_ref()
        .ok_or_else(|| CliError::Config("current section required".into()))?;
    let diff = cur.diffusion()?;
    let s = solve_branch(config, species, exec)?;
    let sol = &s.solution;
    let report: CurrentReport = match species {
        Species::Three(c) => current_report_three(sol, c, &diff, s.label, cur.x1, cur.x2),
        Species::Four(c) => current_report_four(sol, c, &diff, s.label, cur.x1, cur.x2),
        Species::Two(_) => unreachable!("checked at validation"),
    }
    .map_err(CliError::compute("current"))?;
    let mut results = Results::default();
    solve_scalars(&mut results, &s, warnings);
    results.scalar("x1", cur.x1);
    results.scalar("x2", cur.x2);
    results.scalar("integral_x", report.integral_x);
    results.scalar("integral_sigma", report.integral_sigma);
    results.scalar("route_tolerance", report.route_tolerance());
    results.label("routes_agree", report.routes_agree().to_string());
    warnings.extend(report.warnings.iter().map(|w| w.to_string()));
    if !report.routes_agree() {
        warnings.push(format!(
            "integration routes differ by {:e} (tolerance {:e}); refine n_nodes",
            (report.integral_x - report.integral_sigma).abs(),
            report.route_tolerance()
        ));
    }
    let mut table = Table::new("current", &["x", "phi", "current"]);
    for ((x, phi), i) in sol.nodes.iter().zip(&sol.values).zip(&report.pointwise.values) {
        table.push(vec![*x, *phi, *i]);
    }
    results.tables.push(table);
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run_doc(doc: &str) -> RunReport {
        run(&parse_config(doc).unwrap()).unwrap()
    }

    #[test]
    fn critical_at_zero_self_coupling() {
        let r = run_doc("mode = \"critical\"\n[species]\ng = 0.0\nz = 3.0\n");
        let s = &r.results.scalars;
        assert!((s["g_c"] - std::f64::consts::E).abs() < 1e-6);
        assert!((s["sigma_c"] - 2.0 * 3f64.ln() / 3.0).abs() < 1e-6);
        assert!(s.contains_key("sigma_z") && s.contains_key("phi_Ac"));
        assert_eq!(r.results.labels["regime"], "supercritical");
    }

    #[test]
    fn subcritical_pair_has_no_turning_point() {
        let r = run_doc("mode = \"critical\"\n[species]\ng = 0.0\nz = 1.0\n");
        assert!(!r.results.scalars.contains_key("sigma_c"));
        assert_eq!(r.results.labels["regime"], "subcritical");
    }

    #[test]
    fn branch_table_is_antisymmetric() {
        let r = run_doc("mode = \"branches\"\n[species]\ng = 1.0\nz = 3.0\n[branches]\npoints = 50\n");
        let t = r.results.table("branches").unwrap();
        assert_eq!(t.rows.len(), 50);
        for row in &t.rows {
            assert!((row[3] + row[4]).abs() <= 1e-10 * row[3].abs().max(1.0));
        }
    }

    #[test]
    fn root_data_give_constant_profile() {
        let r = run_doc("mode = \"solve\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[bvp]\nepsilon = 0.01\n");
        let root = r.results.scalars["root"];
        let phi = r.results.table("profile").unwrap().column("phi").unwrap();
        assert!(phi.iter().all(|v| (v - root).abs() < 1e-12));
        assert_eq!(r.results.labels["classification"], "constant");
    }

    #[test]
    fn empty_window_gives_zero_integrals() {
        let r = run_doc(
            "mode = \"current\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[bvp]\nepsilon = 0.01\nphi0_left = 0.0\n[current]\nx1 = 0.2\nx2 = 0.2\n",
        );
        assert_eq!(r.results.scalars["integral_x"], 0.0);
        assert_eq!(r.results.scalars["integral_sigma"], 0.0);
    }

    #[test]
    fn missing_b_root_is_a_solver_failure() {
        let doc = "mode = \"solve\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[bvp]\nepsilon = 0.01\nbranch = \"B\"\n";
        let e = run(&parse_config(doc).unwrap()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().starts_with("rhs assembly failed"), "{e}");
    }

    #[test]
    fn sweep_keeps_index_order_and_records_failures() {
        let doc = "mode = \"sweep\"\n[species]\ng = 1\nz = 20\nrho0 = 0.5\n[bvp]\nepsilon = 0.01\nbranch = \"B\"\n[sweep]\nmode = \"solve\"\nparameter = \"z\"\nvalues = [50.0, 20.0, 40.0]\n";
        let r = run_doc(doc);
        let p = &r.results.sweep;
        assert_eq!(p.iter().map(|p| p.value).collect::<Vec<_>>(), vec![50.0, 20.0, 40.0]);
        assert_eq!(p.iter().map(|p| p.status).collect::<Vec<_>>(), vec![0, 3, 0]);
        assert_eq!(r.status, 3);
        assert_eq!(r.warnings.len(), 1);
    }
}
