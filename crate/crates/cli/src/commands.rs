use std::fmt::Write as _;

use rayon::prelude::*;

use qcv_core::boxop::{convergence_order_estimate, TimeWindow};
use qcv_core::dynamics::{Coupling, Potential};
use qcv_core::equilibria::{
    classify_three_body, restricted_l4, solve_relative_equilibrium, EquilibriumProblem, ThreeBodyShape,
    CLASSIFY_TOLERANCE,
};
use qcv_core::rotframe::{canonical_window, RotatingOperators};
use qcv_core::sim::{
    classical_reference, restricted_grid, restricted_three_body, RestrictedParams, Scenario, Scheme,
};
use qcv_core::{Error, C64};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{num, Artifact, Csv};

/// What a command prints and the files it wants written.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub summary: String,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    fn attach(&mut self, cfg: &Config, key: &str, csv: Csv) {
        if let Some(path) = cfg.path(key) {
            self.artifacts.push(Artifact {
                path,
                contents: csv.as_str().to_string(),
            });
        }
    }
}

/// Quotes a field containing a comma or a quote.
fn field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn run(command: &str, cfg: &Config) -> Result<Report> {
    match command {
        "ops-table" => ops_table(cfg),
        "equilibrium" => equilibrium(cfg),
        "simulate" => simulate(cfg),
        "error-scan" => error_scan(cfg),
        "convergence" => convergence(cfg),
        other => Err(CliError::usage(format!("unknown command '{other}'"))),
    }
}

pub fn ops_table(cfg: &Config) -> Result<Report> {
    let eps = cfg.f64("eps")?;
    let omega = cfg.f64("omega")?;
    let beta = cfg.f64("beta")?;
    let ops = cfg.operators(eps)?;
    let mut csv = Csv::new(&[
        "operator",
        "sum_zero",
        "moment_one",
        "conforming",
        "omega_sq",
        "phi",
        "closed_form_discrepancy",
        "note",
    ]);
    let mut report = Report::default();
    let s = &mut report.summary;
    let _ = writeln!(s, "ε = {eps}, ω = {omega}, β = {beta}");
    let _ = writeln!(s, "{:<28} {:>5} {:>5} {:>22} {:>22} {:>10}", "operator", "Σγ=0", "Σℓγ=1", "Ω²(ε)", "φ(ε)", "closed-form");
    for (name, op) in &ops {
        let (sum, moment) = op.convergence_conditions();
        let rot = RotatingOperators::new(op.clone(), omega)?;
        let window = canonical_window(op);
        let mut note = String::new();
        let omega_sq = match rot.omega_sq_eps(&window) {
            Ok(v) => Some(v),
            Err(e) => {
                note = e.to_string();
                None
            }
        };
        let phi = match omega_sq.map(|_| rot.expansion_factor(beta, &window)) {
            Some(Ok(p)) => Some(p),
            Some(Err(e)) => {
                note = e.to_string();
                None
            }
            None => None,
        };
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        let discrepancy = phi.and_then(|p| p.closed_form_discrepancy);
        csv.row([
            field(name),
            sum.to_string(),
            moment.to_string(),
            (sum && moment).to_string(),
            opt(omega_sq),
            opt(phi.map(|p| p.value)),
            opt(discrepancy),
            field(&note),
        ]);
        let _ = writeln!(
            s,
            "{:<28} {:>5} {:>5} {:>22} {:>22} {:>10}{}",
            name,
            sum,
            moment,
            omega_sq.map(|v| format!("{v:.16}")).unwrap_or_else(|| "-".into()),
            phi.map(|p| format!("{:.16}", p.value)).unwrap_or_else(|| "-".into()),
            discrepancy.map(|d| format!("{d:.1e}")).unwrap_or_else(|| "-".into()),
            if note.is_empty() { String::new() } else { format!("  ({note})") },
        );
    }
    report.attach(cfg, "out", csv);
    Ok(report)
}

fn shape_name(shape: ThreeBodyShape) -> &'static str {
    match shape {
        ThreeBodyShape::Colinear => "collinear",
        ThreeBodyShape::Equilateral => "equilateral",
        ThreeBodyShape::Other => "other",
    }
}

pub fn equilibrium(cfg: &Config) -> Result<Report> {
    let (problem, solution) = match cfg.get("system").unwrap_or("bodies") {
        "l4" => restricted_l4(cfg.f64("mu")?)?,
        "bodies" => {
            let masses = cfg.f64_list("masses")?;
            let beta = cfg.f64("beta")?;
            let g = cfg.f64("g")?;
            let omega = cfg.f64("omega")?;
            let lambda = cfg.opt_f64("lambda")?.unwrap_or(omega * omega);
            let guess = cfg.points("guess")?;
            if guess.len() != masses.len() {
                return Err(CliError::usage(format!(
                    "guess has {} points for {} masses",
                    guess.len(),
                    masses.len()
                )));
            }
            let potential = Potential::homogeneous(beta, Coupling::Gravitational { g, masses: masses.clone() })?;
            let problem = EquilibriumProblem::new(masses, potential, lambda)?;
            let solution = solve_relative_equilibrium(&problem, &guess)?;
            (problem, solution)
        }
        other => return Err(CliError::usage(format!("unknown system '{other}'"))),
    };
    let shape = match solution.coords.as_slice() {
        [a, b, c] => Some(classify_three_body(&[*a, *b, *c], CLASSIFY_TOLERANCE)),
        _ => None,
    };
    let mut comment = format!("lambda={},residual_norm={}", num(solution.lambda), num(solution.residual_norm));
    if let Some(shape) = shape {
        comment.push_str(&format!(",shape={}", shape_name(shape)));
    }
    let mut csv = Csv::with_comment(&comment, &["body", "mass", "x", "y"]);
    let mut report = Report::default();
    let s = &mut report.summary;
    let _ = writeln!(s, "λ = {}, residual = {:.3e}", solution.lambda, solution.residual_norm);
    if let Some(shape) = shape {
        let _ = writeln!(s, "shape: {}", shape_name(shape));
    }
    for (i, (m, p)) in problem.masses.iter().zip(&solution.coords).enumerate() {
        csv.row([i.to_string(), num(*m), num(p[0]), num(p[1])]);
        let _ = writeln!(s, "body {i}: m = {m}, (x, y) = ({:.16}, {:.16})", p[0], p[1]);
    }
    report.attach(cfg, "out", csv);
    Ok(report)
}

fn single_operator(cfg: &Config) -> Result<(String, qcv_core::boxop::Stencil)> {
    let mut ops = cfg.operators(1.0)?;
    if ops.len() != 1 {
        return Err(CliError::usage("simulate takes exactly one operator"));
    }
    Ok(ops.remove(0))
}

fn restricted_frame(cfg: &Config) -> Result<()> {
    if cfg.f64("omega")? != 1.0 || cfg.f64("beta")? != -1.0 || cfg.f64("g")? != 1.0 {
        return Err(CliError::usage("restricted runs use omega=1, beta=-1 and g=1"));
    }
    Ok(())
}

fn metrics_csv(errors: &[f64]) -> Csv {
    let mut csv = Csv::new(&["M", "err"]);
    for (m, e) in errors.iter().enumerate() {
        csv.row([m.to_string(), num(*e)]);
    }
    csv
}

pub fn simulate(cfg: &Config) -> Result<Report> {
    restricted_frame(cfg)?;
    let (name, shape) = single_operator(cfg)?;
    let m = cfg.usize("m")?;
    let k = cfg.usize("k")?;
    let mu = cfg.f64("mu")?;
    let delta = cfg.f64("delta")?;
    let delta_prime = cfg.f64("delta_prime")?;
    let mut report = Report::default();
    match cfg.scheme()? {
        Some(scheme) => {
            let run = restricted_three_body(&RestrictedParams {
                mu,
                operator: shape,
                steps_per_period: m,
                half_periods: k,
                delta,
                delta_prime,
                scheme,
                steps: None,
            })?;
            let traj = &run.trajectory;
            let mut header = vec!["k", "t", "body", "re_a", "im_a", "re_b", "im_b"];
            if scheme == Scheme::Dhe {
                header.extend(["re_c", "im_c", "re_d", "im_d"]);
            }
            let mut csv = Csv::new(&header);
            for (node, row) in traj.positions.iter().enumerate() {
                for (body, p) in row.iter().enumerate() {
                    let mut fields = vec![
                        node.to_string(),
                        num(traj.grid.node(node)),
                        body.to_string(),
                        num(p[0].re),
                        num(p[0].im),
                        num(p[1].re),
                        num(p[1].im),
                    ];
                    if scheme == Scheme::Dhe {
                        match traj.momentum(node, body) {
                            Some([c, d]) => fields.extend([num(c.re), num(c.im), num(d.re), num(d.im)]),
                            None => fields.extend(std::iter::repeat_n(String::new(), 4)),
                        }
                    }
                    csv.row(fields);
                }
            }
            let s = &mut report.summary;
            let _ = writeln!(s, "{scheme} with {name}: μ = {mu}, m = {m}, k = {k}, δ = {delta}, δ' = {delta_prime}");
            let _ = writeln!(s, "ε = {}, steps = {}, φ = {}", traj.grid.eps, traj.grid.steps, run.scenario.phi.value);
            let _ = writeln!(s, "max excursion from scaled L4: {}", run.max_excursion);
            let _ = writeln!(s, "final err: {}", run.errors.last().copied().unwrap_or(0.0));
            let _ = writeln!(s, "max |Im|: {:.3e}, certified residual: {:.3e}", traj.imag_max, traj.residual);
            report.attach(cfg, "out", csv);
            report.attach(cfg, "metrics", metrics_csv(&run.errors));
        }
        None => {
            let (op, grid) = restricted_grid(&shape, m, k)?;
            let scenario = Scenario::restricted(mu, op, delta, delta_prime)?;
            let reference = classical_reference(&scenario, &grid)?;
            if !reference.converged() {
                return Err(Error::NotConverged {
                    iterations: reference.substeps,
                    residual: reference.refinement_gap,
                }
                .into());
            }
            let mut csv = Csv::new(&["k", "t", "body", "re_a", "im_a", "re_b", "im_b"]);
            for (node, row) in reference.positions.iter().enumerate() {
                for (body, p) in row.iter().enumerate() {
                    csv.row([
                        node.to_string(),
                        num(reference.t[node]),
                        body.to_string(),
                        num(p[0]),
                        num(0.0),
                        num(p[1]),
                        num(0.0),
                    ]);
                }
            }
            let all: Vec<usize> = (0..grid.len()).collect();
            let errors = reference.error_norm(&scenario.evolving, &all)?;
            let excursion = reference.max_excursion(&scenario.evolving, &scenario.equilibrium.coords);
            let s = &mut report.summary;
            let _ = writeln!(s, "classical RK4 on the {name} grid: μ = {mu}, m = {m}, k = {k}, δ = {delta}, δ' = {delta_prime}");
            let _ = writeln!(s, "ε = {}, steps = {}, RK4 substeps = {}", grid.eps, grid.steps, reference.substeps);
            let _ = writeln!(s, "max excursion from L4: {excursion}");
            let _ = writeln!(s, "final err: {}", errors.last().copied().unwrap_or(0.0));
            let _ = writeln!(s, "refinement gap: {:.3e}", reference.refinement_gap);
            report.attach(cfg, "out", csv);
            report.attach(cfg, "metrics", metrics_csv(&errors));
        }
    }
    Ok(report)
}

pub fn error_scan(cfg: &Config) -> Result<Report> {
    restricted_frame(cfg)?;
    let ops = cfg.operators(1.0)?;
    let m = cfg.usize("m")?;
    let k = cfg.usize("k")?;
    let mu = cfg.f64("mu")?;
    let delta = cfg.f64("delta")?;
    let delta_prime = cfg.f64("delta_prime")?;
    let stride = cfg.usize("scan_stride")?;
    let count = cfg.usize("scan_count")?;
    if stride == 0 || count == 0 {
        return Err(CliError::usage("scan_stride and scan_count must be positive"));
    }
    let steps = stride * count;
    let marks: Vec<usize> = (0..=count).map(|j| j * stride).collect();
    let jobs: Vec<(usize, Scheme)> = (0..ops.len())
        .flat_map(|i| [(i, Scheme::Del), (i, Scheme::Dhe)])
        .collect();
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(i, scheme)| {
            let run = restricted_three_body(&RestrictedParams {
                mu,
                operator: ops[i].1.clone(),
                steps_per_period: m,
                half_periods: k,
                delta,
                delta_prime,
                scheme,
                steps: Some(steps),
            })?;
            Ok(marks.iter().map(|&mk| run.errors[mk]).collect())
        })
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&["operator", "scheme", "M", "err"]);
    for ((i, scheme), errs) in jobs.iter().zip(&results) {
        for (mk, e) in marks.iter().zip(errs) {
            csv.row([field(&ops[*i].0), scheme.to_string(), mk.to_string(), num(*e)]);
        }
    }
    let mut report = Report::default();
    let s = &mut report.summary;
    let _ = writeln!(s, "μ = {mu}, m = {m}, δ = {delta}, δ' = {delta_prime}, M = 0..={steps} step {stride}");
    let _ = writeln!(s, "{:<28} {:>24} {:>24}  DHE<=DEL", "operator", "err(DEL) final", "err(DHE) final");
    for (i, (name, _)) in ops.iter().enumerate() {
        let (del, dhe) = (results[2 * i][count], results[2 * i + 1][count]);
        let _ = writeln!(s, "{name:<28} {del:>24.16e} {dhe:>24.16e}  {}", dhe <= del);
    }
    report.attach(cfg, "out", csv);
    Ok(report)
}

pub fn convergence(cfg: &Config) -> Result<Report> {
    let eps_list = cfg.f64_list("eps_list")?;
    let first = *eps_list.first().ok_or_else(|| CliError::usage("eps_list is empty"))?;
    let ops = cfg.operators(first)?;
    let mut csv = Csv::new(&["operator", "eps", "error"]);
    let mut report = Report::default();
    let _ = writeln!(report.summary, "Box sin - cos, sup over the middle half of the window");
    for (name, op) in &ops {
        let length = (16.0 * op.halfwidth() as f64 * first).max(4.0);
        let window = TimeWindow::new(0.0, length)?;
        let est = convergence_order_estimate(
            op,
            |t| C64::new(t.sin(), 0.0),
            |t| C64::new(t.cos(), 0.0),
            &window,
            &eps_list,
        )?;
        for (e, err) in est.eps.iter().zip(&est.errors) {
            csv.row([field(name), num(*e), num(*err)]);
        }
        let slope = est.slope.map(|p| format!("{p:.4}")).unwrap_or_else(|| "exact".into());
        let _ = writeln!(report.summary, "{name:<28} slope {slope}");
    }
    report.attach(cfg, "out", csv);
    Ok(report)
}
