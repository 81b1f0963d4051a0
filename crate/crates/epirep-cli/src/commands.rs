//! Subcommand bodies. Each returns whether its assertions held.

use std::fmt::Write as _;

use epirep::convex_core::{linspace, Interval};
use epirep::ext;
use epirep::hamiltonians::{
    check_bh, check_class_h, check_hh, check_opc, check_vic, make_ex35, opc_minimal_m, CheckReport, HamiltonianSpec,
    OpcSamples, RolloutSettings, SampleGrid,
};
use epirep::io::{write_atomic, write_json};
use epirep::legendre::biconjugate_check;
use epirep::representation::{
    build_epigraphical_representation, ex35_explicit_triple, ex35_modified_triple, no_graphical_representation_witness,
    reconstruct_hamiltonian, reproduce_ex33_discontinuity, reproduce_ex34_unboundedness, verify_bounds,
    verify_epigraphical, ControlSamples, ControlSet, OmegaPolicy, RepSampleGrid, RepresentationTriple, SteinerSettings,
    EX35_KNOTS,
};
use epirep::stability::{run_ex51_experiment, Ex51Params, ExperimentSetup};
use epirep::value_fn::{
    bellman_reexpansion, extract_optimal_trajectory, hjb_residual_smooth, interior_samples, solve_value_dp,
    vanishing_at_infinity, Grid,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{CommonArgs, Defaults, RunConfig};
use crate::{CliError, Construction, Target};

type Outcome = Result<bool, CliError>;

/// Conjugate tables are clipped to this |v| for unbounded domains.
const V_CLIP: f64 = 10.0;
/// Dual sample range for biconjugate and reconstruction errors.
const P_RANGE: (f64, f64) = (-5.0, 5.0);
const BICONJUGATE_TOL: f64 = 1e-3;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    status: &'static str,
    config: &'a RunConfig,
    result: T,
}

fn finish<T: Serialize>(cfg: &RunConfig, command: &str, pass: bool, result: T) -> Outcome {
    let status = if pass { "ok" } else { "failed" };
    write_json(&cfg.out.join("report.json"), &Report { command, status, config: cfg, result })?;
    println!("{command}: {status} ({})", cfg.out.display());
    Ok(pass)
}

fn x_in_a(cfg: &RunConfig, spec: &HamiltonianSpec) -> Result<Vec<f64>, CliError> {
    let xs: Vec<f64> = cfg.x_nodes().into_iter().filter(|&x| spec.constraint.contains(x)).collect();
    if xs.is_empty() {
        return Err(CliError::Config("x-window misses the constraint set".into()));
    }
    Ok(xs)
}

pub fn conjugate(args: &CommonArgs) -> Outcome {
    let cfg = RunConfig::resolve(args, Defaults::SAMPLED)?;
    let spec = cfg.spec()?;
    let mut table = String::from("t,x,v,hstar\n");
    let mut domains = String::from("t,x,dom_lo,dom_hi\n");
    let ps = linspace(P_RANGE.0, P_RANGE.1, 41);
    let mut worst: f64 = 0.0;
    let mut unbounded = 0;
    for &t in &cfg.t_samples {
        for x in cfg.x_nodes() {
            let prof = spec.conjugate(t, x)?;
            let d = prof.domain();
            let _ = writeln!(domains, "{t},{x},{},{}", ext::fmt(d.lo), ext::fmt(d.hi));
            let view = Interval { lo: d.lo.max(-V_CLIP), hi: d.hi.min(V_CLIP) };
            for v in view.linspace(cfg.v_count) {
                let _ = writeln!(table, "{t},{x},{v},{}", ext::fmt(prof.eval(v)));
            }
            if d.is_bounded() {
                worst = worst.max(biconjugate_check(&spec, t, x, &ps, 2001)?);
            } else {
                unbounded += 1;
            }
        }
    }
    write_atomic(&cfg.out.join("conjugate.csv"), table.as_bytes())?;
    write_atomic(&cfg.out.join("domains.csv"), domains.as_bytes())?;
    let pass = worst <= BICONJUGATE_TOL;
    finish(
        &cfg,
        "conjugate",
        pass,
        json!({ "biconjugate_error": worst, "tolerance": BICONJUGATE_TOL, "unbounded_domains": unbounded }),
    )
}

fn samples_for(triple: &RepresentationTriple, cfg: &RunConfig) -> ControlSamples {
    match triple.control_set {
        ControlSet::Interval { lo, hi } => ControlSamples::interval(lo, hi, cfg.u_count, &EX35_KNOTS),
        ControlSet::UnitBall { .. } => ControlSamples::polar(cfg.u_radii, cfg.u_angles),
        ControlSet::Cube { lo, hi, .. } => ControlSamples::square(lo, hi, cfg.u_radii),
    }
}

pub fn represent(args: &CommonArgs, construction: Option<Construction>) -> Outcome {
    let cfg = RunConfig::resolve(args, Defaults::SAMPLED)?;
    let spec = cfg.spec()?;
    let is_ex35 = cfg.hamiltonian == "ex35";
    let construction = construction.unwrap_or(if is_ex35 { Construction::Explicit } else { Construction::Steiner });
    let triple = match construction {
        Construction::Steiner => build_epigraphical_representation(
            &spec,
            OmegaPolicy::TwiceLambda,
            SteinerSettings { cap_vertices: cfg.cap_vertices },
        )?,
        _ if !is_ex35 => return Err(CliError::Config("closed-form triples exist for ex35 only".into())),
        Construction::Explicit => ex35_explicit_triple(cfg.alpha.clone(), cfg.gamma),
        Construction::Modified => ex35_modified_triple(cfg.alpha.clone(), cfg.gamma),
    };
    let samples = samples_for(&triple, &cfg);
    let xs = x_in_a(&cfg, &spec)?;

    let mut image = String::from("t,x");
    for k in 0..triple.control_dim() {
        let _ = write!(image, ",u{}", k + 1);
    }
    image.push_str(",f,l\n");
    let ps = linspace(P_RANGE.0, P_RANGE.1, 41);
    let mut recon: f64 = 0.0;
    for &t in &cfg.t_samples {
        for &x in &xs {
            for u in &samples.points {
                let (f, l) = triple.eval(t, x, u);
                let _ = write!(image, "{t},{x}");
                for c in u {
                    let _ = write!(image, ",{c}");
                }
                let _ = writeln!(image, ",{},{}", ext::fmt(f), ext::fmt(l));
            }
            for &p in &ps {
                recon = recon.max((reconstruct_hamiltonian(&triple, t, x, p, &samples) - spec.h(t, x, p)).abs());
            }
        }
    }
    write_atomic(&cfg.out.join("representation.csv"), image.as_bytes())?;

    let mut grid = RepSampleGrid::new(cfg.t_samples.clone(), xs, samples.clone());
    grid.v_nodes = cfg.v_count;
    grid.inclusion_tol = cfg.inclusion_tol;
    grid.coverage_tol = cfg.coverage_tol;
    let epi = verify_epigraphical(&triple, &spec, &grid)?;
    let bounds = verify_bounds(&triple, &spec, &grid, 1e-9);
    let pass = epi.pass && bounds.pass && recon <= cfg.representation_tol;
    finish(
        &cfg,
        "represent",
        pass,
        json!({
            "triple": triple.name,
            "provenance": triple.provenance,
            "control_set": triple.control_set,
            "control_samples": samples.len(),
            "control_modulus": samples.modulus,
            "epigraphical": epi,
            "bounds": bounds,
            "reconstruction_error": recon,
            "reconstruction_tol": cfg.representation_tol,
        }),
    )
}

fn unavailable(condition: &str, e: epirep::Error) -> CheckReport {
    CheckReport {
        condition: condition.into(),
        pass: false,
        worst: f64::INFINITY,
        tolerance: 0.0,
        witnesses: Vec::new(),
        evaluated: 0,
        note: Some(e.to_string()),
    }
}

pub fn verify(args: &CommonArgs) -> Outcome {
    let cfg = RunConfig::resolve(args, Defaults::SAMPLED)?;
    let spec = cfg.spec()?;
    let settings = RolloutSettings { seed: cfg.seed, ..RolloutSettings::default() };
    let opc = OpcSamples::default();
    let mut reports = Vec::new();
    let mut minimal_m = None;
    for check in &cfg.checks {
        match check.as_str() {
            "hH" => reports.extend(check_hh(&spec, &SampleGrid::default())),
            "opc" => {
                reports.push(check_opc(&spec, cfg.eta, cfg.r, cfg.m, &opc).unwrap_or_else(|e| unavailable("OPC", e)));
                minimal_m = opc_minimal_m(&spec, cfg.eta, cfg.r, &opc).ok();
            }
            "vic" => reports.push(check_vic(&spec, &opc.t, &cfg.x_nodes()).unwrap_or_else(|e| unavailable("VIC", e))),
            "bH" => reports.push(check_bh(&spec, None, &settings).unwrap_or_else(|e| unavailable("B_H", e))),
            "classH" => match check_class_h(&spec, &[1.0, 2.0, 5.0], &SampleGrid::coarse(), &settings) {
                Ok(r) => reports.extend(r),
                Err(e) => reports.push(unavailable("class", e)),
            },
            other => return Err(CliError::Unknown(format!("check '{other}'"))),
        }
    }
    for r in &reports {
        println!("{:<28} {}", r.condition, if r.pass { "pass" } else { "FAIL" });
    }
    let pass = reports.iter().all(|r| r.pass);
    finish(&cfg, "verify", pass, json!({ "reports": reports, "opc_minimal_m": minimal_m.map(ext::to_json) }))
}

pub fn value(args: &CommonArgs, x0: Option<f64>) -> Outcome {
    let cfg = RunConfig::resolve(args, Defaults::VALUE)?;
    let spec = cfg.spec()?;
    let grid = Grid::new(cfg.t_max, cfg.dt, cfg.x_min, cfg.x_max, cfg.dx)?;
    let field = solve_value_dp(&spec, &grid)?;
    field.write_csv(&cfg.out.join("value_field.csv"))?;
    field.write_json(&cfg.out.join("value_field.json"))?;

    let tail = vanishing_at_infinity(&field);
    let slack = grid.dt + grid.dx;
    let mut csv = String::from("t,sup_abs,s,psi_tail\n");
    let mut tail_pass = true;
    for (i, &t) in tail.t.iter().enumerate() {
        let bound = spec.psi_tail.as_ref().map(|p| p(t));
        if let Some(b) = bound {
            tail_pass &= tail.s[i] <= b + slack;
        }
        let b = bound.map(ext::fmt).unwrap_or_default();
        let _ = writeln!(csv, "{t},{},{},{b}", ext::fmt(tail.sup_abs[i]), ext::fmt(tail.s[i]));
    }
    write_atomic(&cfg.out.join("tail_profile.csv"), csv.as_bytes())?;

    let x0 = match x0 {
        Some(x) => x,
        None => {
            let mid = 0.5 * (cfg.x_min + cfg.x_max);
            let xs = x_in_a(&cfg, &spec)?;
            xs.into_iter().min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs())).unwrap_or(mid)
        }
    };
    let traj = extract_optimal_trajectory(&field, &spec, 0.0, x0)?;
    traj.write_csv(&cfg.out.join("trajectory.csv"))?;

    let reexpansion = bellman_reexpansion(&field, &spec)?;
    let residual = hjb_residual_smooth(&field, &spec, &interior_samples(&grid, 9, 9), 0.5);
    let pass = tail_pass && reexpansion <= 1e-9 && traj.admissible;
    finish(
        &cfg,
        "value",
        pass,
        json!({
            "max_abs": field.max_abs(),
            "finite_nodes": field.finite_count(),
            "window_blocked": field.window_blocked,
            "tail_bound": ext::to_json(field.tail_bound),
            "tail_pass": tail_pass,
            "tail_slack": slack,
            "bellman_reexpansion": reexpansion,
            "hjb_residual_max": residual.max,
            "hjb_residual_mean": residual.mean,
            "hjb_residual_skipped": residual.skipped,
            "trajectory_x0": x0,
            "trajectory_cost": ext::to_json(traj.cost()),
            "trajectory_admissible": traj.admissible,
        }),
    )
}

pub fn stability(args: &CommonArgs) -> Outcome {
    let cfg = RunConfig::resolve(args, Defaults::STABILITY)?;
    if cfg.hamiltonian != "ex51" {
        return Err(CliError::Config("the stability experiment runs the ex51 family".into()));
    }
    let params = Ex51Params { alpha: cfg.alpha.clone(), beta: cfg.beta.clone(), gamma: cfg.gamma };
    let mut setup = ExperimentSetup::standard()?;
    setup.grid = Grid::new(cfg.t_max, cfg.dt, cfg.x_min, cfg.x_max, cfg.dx)?;
    setup.n_list = cfg.n_list.clone();
    setup.u_radii = cfg.u_radii;
    setup.u_angles = cfg.u_angles;
    setup.rep_tol = cfg.representation_tol;
    setup.seed = cfg.seed;
    let bundle = run_ex51_experiment(&params, &setup)?;
    bundle.write(&cfg.out)?;
    let pass = bundle.pass();
    finish(&cfg, "stability", pass, &bundle)
}

pub fn reproduce(args: &CommonArgs, target: Target, i_max: u32, n_max: u32) -> Outcome {
    let cfg = RunConfig::resolve(args, Defaults::SAMPLED)?;
    match target {
        Target::Ex33 => {
            let r = reproduce_ex33_discontinuity(&cfg.t_samples)?;
            finish(&cfg, "reproduce ex33", r.pass, r)
        }
        Target::Ex34 => {
            let r = reproduce_ex34_unboundedness(i_max)?;
            finish(&cfg, "reproduce ex34", r.pass, r)
        }
        Target::Ex35Nograph => {
            let spec = make_ex35(cfg.alpha.clone(), cfg.gamma)?;
            let rows = cfg
                .t_samples
                .iter()
                .map(|&t| no_graphical_representation_witness(&spec, t, n_max))
                .collect::<epirep::Result<Vec<_>>>()?;
            let pass = rows.iter().all(|r| r.pass);
            finish(&cfg, "reproduce ex35-nograph", pass, rows)
        }
    }
}
