use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use aniso_core::geometry::{isocapacitary_k, lipschitz_characteristic, psi_function, Domain2D, DomainKind};
use aniso_core::solver::{generate_mesh, mean_value, solve_continuation, write_solution_csv};
use aniso_core::verify::{
    self, curvature_domain_constants, norm_checks, operator_sweep, sweep_norms, sweep_youngs, trace_rows,
    verify_convex_estimate, verify_divergence_identity, verify_local_estimate, verify_reilly, verify_trace,
    young_checks, C11Check, CheckRow, ScalarField, SWEEP_EPSILONS,
};
use aniso_core::{AnisotropicNorm, Error};

use super::config::{Config, ConfigError};

pub enum Failure {
    Config(ConfigError),
    Run(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::from(e))
    }
}

/// Result of one subcommand: its check rows plus command-specific details for the JSON report.
pub struct Outcome {
    pub rows: Vec<CheckRow>,
    pub details: serde_json::Value,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    seed: u64,
    samples: usize,
    jobs: Option<usize>,
    config: &'a Config,
    pass: bool,
    failing: Vec<&'a str>,
    rows: &'a [CheckRow],
    details: &'a serde_json::Value,
}

pub fn write_report(out: &Path, command: &str, cfg: &Config, outcome: &Outcome) -> Result<PathBuf, Failure> {
    fs::create_dir_all(out)?;
    let csv_path = out.join(format!("{command}.csv"));
    verify::write_rows_csv(&csv_path, &outcome.rows)?;
    let report = Report {
        command,
        seed: seed(cfg),
        samples: samples(cfg),
        jobs: cfg.jobs,
        config: cfg,
        pass: outcome.rows.iter().all(|r| r.pass),
        failing: outcome.rows.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect(),
        rows: &outcome.rows,
        details: &outcome.details,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(out.join(format!("{command}.json")), text + "\n")?;
    Ok(csv_path)
}

fn seed(cfg: &Config) -> u64 {
    cfg.seed.unwrap_or(0)
}

fn samples(cfg: &Config) -> usize {
    cfg.samples.unwrap_or(100_000)
}

pub fn check_norm(cfg: &Config) -> Result<Outcome, Failure> {
    let norms = match cfg.build_norm()? {
        Some(n) => vec![n],
        None => sweep_norms(),
    };
    let rows = norms.iter().enumerate().flat_map(|(i, n)| norm_checks(n, samples(cfg), seed(cfg), i as u64)).collect();
    let details = json!(norms.iter().map(|n| json!({"norm": n.label(), "lambda": n.lambda(), "Lambda": n.big_lambda()})).collect::<Vec<_>>());
    Ok(Outcome { rows, details })
}

pub fn check_young(cfg: &Config) -> Result<Outcome, Failure> {
    let youngs = match cfg.build_young()? {
        Some(y) => vec![y],
        None => sweep_youngs(),
    };
    let eps = cfg.epsilons.clone().unwrap_or(SWEEP_EPSILONS.to_vec());
    let mut rows = Vec::new();
    for (i, y) in youngs.iter().enumerate() {
        rows.extend(young_checks(y, &eps, samples(cfg), seed(cfg), i as u64)?);
    }
    let details = json!(youngs.iter().map(|y| json!({"young": y.label(), "i_b": y.i_b(), "s_b": y.s_b()})).collect::<Vec<_>>());
    Ok(Outcome { rows, details })
}

pub fn check_operator(cfg: &Config) -> Result<Outcome, Failure> {
    let norms = cfg.build_norm()?.map_or_else(sweep_norms, |n| vec![n]);
    let youngs = cfg.build_young()?.map_or_else(sweep_youngs, |y| vec![y]);
    let eps = cfg.epsilons.clone().unwrap_or(SWEEP_EPSILONS.to_vec());
    let rows = operator_sweep(&norms, &youngs, &eps, samples(cfg), seed(cfg))?;
    Ok(Outcome { rows, details: json!({"combinations": norms.len() * youngs.len() * eps.len()}) })
}

pub fn solve(cfg: &Config, out: &Path) -> Result<Outcome, Failure> {
    let spec = cfg.build_spec()?;
    let h = cfg.mesh_sizes(&[0.05])[0];
    let mesh = generate_mesh(&spec.domain, h)?;
    let report = solve_continuation(&spec, &mesh)?;
    fs::create_dir_all(out)?;
    write_solution_csv(&out.join("solution.csv"), &mesh, &report.u)?;
    mesh.write(&out.join("mesh"))?;
    let mut w = csv::Writer::from_path(out.join("rungs.csv")).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(["epsilon", "iterations", "residual", "energy", "delta", "stress_change"]).map_err(|e| Error::Io(e.to_string()))?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in &report.rungs {
        w.write_record([
            r.epsilon.to_string(),
            r.iterations.to_string(),
            r.residual.to_string(),
            r.energy.to_string(),
            opt(r.delta),
            opt(r.stress_change),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    let last = report.rungs.last().unwrap();
    let row = CheckRow {
        lhs: last.residual,
        rhs: spec.newton_tol,
        ratio: last.residual / spec.newton_tol,
        bound: 1.0,
        pass: last.residual <= spec.newton_tol,
        ..CheckRow::for_spec("solve", &spec, Some(h), Some(report.final_epsilon()))
    };
    let u_max = report.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let details = json!({
        "vertices": mesh.n_vertices(),
        "triangles": mesh.n_triangles(),
        "u_max": u_max,
        "u_mean": mean_value(&mesh, &report.u),
        "stopped_early": report.stopped_early,
        "rungs": report.rungs.iter().map(|r| json!({
            "epsilon": r.epsilon, "iterations": r.iterations, "residual": r.residual,
            "energy": r.energy, "delta": r.delta, "stress_change": r.stress_change,
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome { rows: vec![row], details })
}

pub fn verify_convex(cfg: &Config) -> Result<Outcome, Failure> {
    let spec = cfg.build_spec()?;
    let hs = cfg.mesh_sizes(&[0.05, 0.025]);
    let est = verify_convex_estimate(&spec, &hs)?;
    let mut rows = est.rows(&spec);
    let finest = est.levels.iter().min_by(|a, b| a.h.total_cmp(&b.h)).unwrap();
    let mut details = json!({
        "c2_bound": est.c2_bound,
        "ratio1": est.ratio1,
        "ratio2": est.ratio2,
        "eps_robust": est.eps_robust,
        "levels": est.levels.iter().map(|l| json!({
            "h": l.h, "vertices": l.n_vertices, "eps_final": l.eps_final,
            "ratio1": l.ratios.ratio1, "ratio2": l.ratios.ratio2, "eps_robust": l.eps_robust,
            "deltas": l.rungs.iter().map(|r| r.delta).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    if !spec.domain.is_polygon() {
        let constants = curvature_domain_constants(&spec.domain, None)?;
        let c11 = C11Check::from_ratios(constants, finest.h, finest.eps_final, finest.ratios);
        rows.extend(c11.rows(&spec));
        details["curvature_constants"] = json!({
            "L_omega": constants.l_omega, "R_omega": constants.r_omega, "curvature_sup": constants.curvature_sup,
            "log10_c1": constants.log10_c1, "log10_c2": constants.log10_c2,
        });
    }
    Ok(Outcome { rows, details })
}

pub fn verify_local(cfg: &Config) -> Result<Outcome, Failure> {
    let spec = cfg.build_spec()?;
    let hs = cfg.mesh_sizes(&[0.05, 0.025]);
    let balls = cfg.local_balls();
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    for &h in &hs {
        let est = verify_local_estimate(&spec, h, &balls)?;
        for e in &est {
            rows.push(CheckRow {
                check: format!("local_estimate_R{}", e.ball.radius),
                lhs: e.lhs,
                rhs: e.source_l2 + e.radius_factor * e.stress_l2,
                ratio: e.fitted_c,
                bound: f64::NAN,
                pass: e.fitted_c.is_finite(),
                ..CheckRow::for_spec("", &spec, Some(h), None)
            });
        }
        let fitted: Vec<f64> = est.iter().map(|e| e.fitted_c).collect();
        if let Some(prev) = &previous {
            for (e, (a, b)) in est.iter().zip(prev.iter().zip(&fitted)) {
                let gap = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                rows.push(CheckRow {
                    check: format!("local_stability_R{}", e.ball.radius),
                    lhs: *a,
                    rhs: *b,
                    ratio: gap,
                    bound: 0.2,
                    pass: gap <= 0.2,
                    ..CheckRow::for_spec("", &spec, Some(h), None)
                });
            }
        }
        levels.push(json!({"h": h, "balls": est.iter().map(|e| json!({
            "center": e.ball.center, "radius": e.ball.radius, "lhs": e.lhs, "source_l2": e.source_l2,
            "stress_l2": e.stress_l2, "radius_factor": e.radius_factor, "fitted_c": e.fitted_c,
        })).collect::<Vec<_>>()}));
        previous = Some(fitted);
    }
    Ok(Outcome { rows, details: json!({ "levels": levels }) })
}

/// A function vanishing on the boundary of a smooth domain, positive inside.
fn defining_field(dom: &Domain2D) -> Result<ScalarField, Failure> {
    Ok(match *dom.kind() {
        DomainKind::Disk { radius } => ScalarField::paraboloid(radius, 1.0 / (radius * radius)),
        DomainKind::Ellipse { a, b } => {
            let (ia, ib) = (1.0 / (a * a), 1.0 / (b * b));
            ScalarField::new(move |x| 1.0 - ia * x[0] * x[0] - ib * x[1] * x[1])
                .with_gradient(move |x| [-2.0 * ia * x[0], -2.0 * ib * x[1]])
                .with_hessian(move |_| [[-2.0 * ia, 0.0], [0.0, -2.0 * ib]])
        }
        DomainKind::Superellipse { a, b, m } => {
            let m = m as i32;
            let mf = m as f64;
            ScalarField::new(move |x| 1.0 - (x[0] / a).powi(m) - (x[1] / b).powi(m))
                .with_gradient(move |x| [-mf * (x[0] / a).powi(m - 1) / a, -mf * (x[1] / b).powi(m - 1) / b])
                .with_hessian(move |x| {
                    let c = mf * (mf - 1.0);
                    [[-c * (x[0] / a).powi(m - 2) / (a * a), 0.0], [0.0, -c * (x[1] / b).powi(m - 2) / (b * b)]]
                })
        }
        DomainKind::Polygon { .. } => {
            return Err(Failure::Config(ConfigError("verify-reilly needs a smooth domain (disk, ellipse or superellipse)".into())))
        }
    })
}

type Field = fn([f64; 2]) -> [f64; 2];

/// Polynomial vector fields for the divergence identity.
const FIELD_LIBRARY: [(&str, Field); 5] = [
    ("identity", |x| x),
    ("constant", |_| [1.0, -2.0]),
    ("swap_square", |x| [x[1] * x[1], x[0] * x[0]]),
    ("quadratic_mix", |x| [x[0] * x[1], x[0] * x[0] - x[1] * x[1]]),
    ("cubic", |x| [x[0].powi(3) - x[1], x[0] * x[1] * x[1]]),
];
const DIVERGENCE_TOL: f64 = 1e-5;
const REILLY_TOL: f64 = 0.01;

pub fn verify_reilly_cmd(cfg: &Config) -> Result<Outcome, Failure> {
    let dom = cfg.build_domain()?;
    let norm = cfg.build_norm()?.unwrap_or(AnisotropicNorm::euclidean(2)?);
    let v = defining_field(&dom)?;
    let resolution = cfg.resolution.unwrap_or(512);
    let t = verify_reilly(&norm, &dom, &v, &ScalarField::constant(1.0), resolution)?;
    let ratio = t.residual.abs() / t.lhs.abs().max(f64::MIN_POSITIVE);
    let mut rows = vec![CheckRow {
        check: "reilly".into(),
        domain: dom.label(),
        norm: norm.label(),
        young: "-".into(),
        h: Some(1.0 / resolution as f64),
        eps_final: None,
        lhs: t.lhs,
        rhs: t.interior + t.boundary,
        ratio,
        bound: REILLY_TOL,
        pass: ratio <= REILLY_TOL,
    }];
    let mut rng = verify::pointwise::sample_rng(seed(cfg), u64::MAX, 0);
    let points: Vec<[f64; 2]> = (0..1000).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    for (name, field) in FIELD_LIBRARY {
        let r = verify_divergence_identity(field, &points, 1e-4)?;
        rows.push(CheckRow {
            check: format!("divergence_identity_{name}"),
            domain: "-".into(),
            norm: "-".into(),
            young: "-".into(),
            h: Some(1e-4),
            eps_final: None,
            lhs: r,
            rhs: DIVERGENCE_TOL,
            ratio: r,
            bound: DIVERGENCE_TOL,
            pass: r <= DIVERGENCE_TOL,
        });
    }
    let details = json!({
        "lhs": t.lhs, "interior": t.interior, "boundary": t.boundary, "transport": t.transport,
        "residual": t.residual, "lhs_over_pi": t.lhs / PI, "interior_over_pi": t.interior / PI,
        "boundary_over_pi": t.boundary / PI, "resolution": resolution,
    });
    Ok(Outcome { rows, details })
}

pub fn verify_trace_cmd(cfg: &Config) -> Result<Outcome, Failure> {
    let dom = cfg.build_domain()?;
    let radii = cfg.radii.clone().unwrap_or(vec![0.3, 0.5]);
    let h = cfg.mesh_sizes(&[0.025])[0];
    let cases = verify_trace(&dom, &radii, cfg.fields.unwrap_or(20), seed(cfg), h)?;
    let details = json!(cases.iter().map(|c| json!({
        "radius": c.radius, "center": c.center, "kind": format!("{:?}", c.kind), "K": c.k_value,
        "L_omega": c.l_omega, "lhs": c.check.lhs, "rhs": c.check.rhs,
        "gradient_energy": c.check.gradient_energy, "bounded_weight_bound": c.check.bounded_weight_bound,
    })).collect::<Vec<_>>());
    Ok(Outcome { rows: trace_rows(&dom, h, &cases), details })
}

fn profile_csv(path: &Path, profiles: &[(f64, &[f64])]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(["r", "center_index", "value"]).map_err(|e| Error::Io(e.to_string()))?;
    for (r, values) in profiles {
        for (i, v) in values.iter().enumerate() {
            w.write_record([r.to_string(), i.to_string(), v.to_string()]).map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Row checking that `values` shrink along `radii` sorted from large to small.
fn decreasing_row(check: &str, dom: &Domain2D, norm: &str, radii: &[f64], values: &[f64]) -> CheckRow {
    let mut pairs: Vec<(f64, f64)> = radii.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let worst = pairs.windows(2).map(|w| w[1].1 / w[0].1).fold(0.0, f64::max);
    let smallest = pairs.last().map_or(f64::NAN, |p| p.1);
    CheckRow {
        check: check.into(),
        domain: dom.label(),
        norm: norm.into(),
        young: "-".into(),
        h: None,
        eps_final: None,
        lhs: smallest,
        rhs: pairs.first().map_or(f64::NAN, |p| p.1),
        ratio: worst,
        bound: 1.0,
        pass: pairs.len() >= 2 && worst < 1.0 && smallest >= 0.0,
    }
}

pub fn geometry(cfg: &Config, out: &Path) -> Result<Outcome, Failure> {
    let dom = cfg.build_domain()?;
    let norm = cfg.build_norm()?.unwrap_or(AnisotropicNorm::euclidean(2)?);
    let radii = cfg.radii.clone().unwrap_or(vec![0.4, 0.2, 0.1]);
    let mut psi = Vec::new();
    let mut kap = Vec::new();
    let mut lips = Vec::new();
    for &r in &radii {
        psi.push(psi_function(&dom, &norm, r)?);
        kap.push(isocapacitary_k(&dom, &norm, r, r / 8.0)?);
        lips.push(lipschitz_characteristic(&dom, r)?);
    }
    fs::create_dir_all(out)?;
    let zip = |f: &dyn Fn(usize) -> Vec<f64>| -> Vec<(f64, Vec<f64>)> { radii.iter().enumerate().map(|(i, &r)| (r, f(i))).collect() };
    for (name, data) in [
        ("psi_plain", zip(&|i| psi[i].plain_profile.clone())),
        ("psi_anisotropic", zip(&|i| psi[i].anisotropic_profile.clone())),
        ("k_plain", zip(&|i| kap[i].plain_profile.clone())),
        ("k_anisotropic", zip(&|i| kap[i].anisotropic_profile.clone())),
    ] {
        let borrowed: Vec<(f64, &[f64])> = data.iter().map(|(r, v)| (*r, v.as_slice())).collect();
        profile_csv(&out.join(format!("{name}.csv")), &borrowed)?;
    }
    let n = norm.label();
    let rows = vec![
        decreasing_row("psi_decreasing", &dom, "euclidean", &radii, &psi.iter().map(|p| p.plain).collect::<Vec<_>>()),
        decreasing_row("psi_h_decreasing", &dom, &n, &radii, &psi.iter().map(|p| p.anisotropic).collect::<Vec<_>>()),
        decreasing_row("k_decreasing", &dom, "euclidean", &radii, &kap.iter().map(|k| k.plain).collect::<Vec<_>>()),
        decreasing_row("k_h_decreasing", &dom, &n, &radii, &kap.iter().map(|k| k.anisotropic).collect::<Vec<_>>()),
    ];
    let details = json!(radii.iter().enumerate().map(|(i, r)| json!({
        "r": r, "psi": psi[i].plain, "psi_h": psi[i].anisotropic, "k": kap[i].plain, "k_h": kap[i].anisotropic,
        "L_omega": lips[i].l_omega,
    })).collect::<Vec<_>>());
    Ok(Outcome { rows, details })
}
