use std::fs;
use std::path::Path;
use std::time::Instant;

use convdiff_core::analytic::{exact_1d, exact_2d_eval, oracle_residual_check, oracle_residual_check_1d, SeriesParams, FD_STEP};
use convdiff_core::metrics::{convergence_rates, error_norms, oscillation_indicator, ErrorReport, Exact1d, Exact2d, ExactSolution};
use convdiff_core::solver::{solve_problem, Solution};
use convdiff_core::linsolve::DEFAULT_TOL;
use convdiff_core::Point;

use crate::config::RunConfig;
use crate::output::{line_plot_svg, num, solution_csv, solution_vtk, write_file, Csv, Series};
use crate::CliError;

/// Samples per cell for 1D profiles and along 2D layers.
const PROFILE_SAMPLES: usize = 8;
const LAYER_SAMPLES: usize = 200;

fn make_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

fn reference(cfg: &RunConfig) -> Option<Box<dyn ExactSolution>> {
    let b = cfg.oracle_b()?;
    Some(if cfg.dim == 1 {
        Box::new(Exact1d { b })
    } else {
        let mut e = Exact2d::new(b);
        e.params.tol = cfg.tol;
        Box::new(e)
    })
}

fn solve(cfg: &RunConfig, n: usize, p: usize) -> Result<Solution, CliError> {
    let problem = cfg.problem();
    problem.validate().map_err(CliError::solver)?;
    solve_problem(&problem, n, p, &cfg.stab, DEFAULT_TOL).map_err(CliError::solver)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `solve`: solution, report, and plots.
pub fn run_solve(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.problem().validate().map_err(CliError::solver)?;
    make_out_dir(&cfg.out)?;
    let start = Instant::now();
    let sol = solve(cfg, cfg.n, cfg.degree)?;
    let wall = start.elapsed().as_secs_f64();

    let exact = reference(cfg);
    let report: Option<ErrorReport> = match &exact {
        Some(e) => Some(error_norms(&sol, e.as_ref()).map_err(CliError::oracle)?),
        None => None,
    };
    let (over, under) = oscillation_indicator(sol.values(), 0.0, 1.0);
    let h_max = sol.mesh().stats().h_max;

    write_file(&cfg.out.join("solution.csv"), &solution_csv(&sol))?;
    let mut csv = Csv::new(&[
        "preset", "dim", "b", "eps", "degree", "n", "stab", "beta", "dof", "h_max", "l2", "linf", "h1_semi", "overshoot",
        "undershoot", "wall_time_s",
    ]);
    csv.row(&[
        cfg.preset.to_string(),
        cfg.dim.to_string(),
        num(cfg.b),
        num(cfg.eps),
        cfg.degree.to_string(),
        cfg.n.to_string(),
        cfg.stab.mode.to_string(),
        num(cfg.stab.beta),
        sol.values().len().to_string(),
        num(h_max),
        opt(report.map(|r| r.l2)),
        opt(report.map(|r| r.linf)),
        opt(report.map(|r| r.h1_semi)),
        num(over),
        num(under),
        format!("{wall:.6}"),
    ]);
    write_file(&cfg.out.join("report.csv"), &csv.finish())?;

    if cfg.dim == 1 {
        write_profile(cfg, &sol, exact.as_deref())?;
    } else {
        write_file(&cfg.out.join("solution.vtk"), &solution_vtk(&sol))?;
        for &y in &cfg.layers {
            write_layer(cfg, &sol, exact.as_deref(), y)?;
        }
    }

    println!("dof={} h_max={:.6e} overshoot={over:.6e} undershoot={under:.6e}", sol.values().len(), h_max);
    if let Some(r) = report {
        println!("l2={:.6e} linf={:.6e} h1_semi={:.6e}", r.l2, r.linf, r.h1_semi);
    }
    println!("wall_time={wall:.3}s output={}", cfg.out.display());
    Ok(())
}

fn plot(cfg: &RunConfig, stem: &str, title: &str, rows: &[(f64, f64, Option<f64>)]) -> Result<(), CliError> {
    let mut csv = Csv::new(&["x", "u_h", "u_exact"]);
    for &(x, u, e) in rows {
        csv.row(&[num(x), num(u), opt(e)]);
    }
    write_file(&cfg.out.join(format!("{stem}.csv")), &csv.finish())?;
    let uh: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let ex: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.2.map(|e| (r.0, e))).collect();
    let mut series = vec![Series { label: "finite element", colour: "#d62728", points: &uh }];
    if !ex.is_empty() {
        series.push(Series { label: "exact", colour: "#1f77b4", points: &ex });
    }
    write_file(&cfg.out.join(format!("{stem}.svg")), &line_plot_svg(title, "x", &series))
}

fn write_profile(cfg: &RunConfig, sol: &Solution, exact: Option<&dyn ExactSolution>) -> Result<(), CliError> {
    let samples = cfg.n * PROFILE_SAMPLES;
    let mut rows = Vec::with_capacity(samples + 1);
    for k in 0..=samples {
        let x = k as f64 / samples as f64;
        let u = sol.eval([x, 0.0]).map_err(CliError::solver)?;
        let e = exact.map(|e| e.value([x, 0.0])).transpose().map_err(CliError::oracle)?;
        rows.push((x, u, e));
    }
    let title = format!("b = {}, p = {}, n = {}, {}", cfg.b, cfg.degree, cfg.n, cfg.stab.mode);
    plot(cfg, "profile", &title, &rows)
}

fn write_layer(cfg: &RunConfig, sol: &Solution, exact: Option<&dyn ExactSolution>, y: f64) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(LAYER_SAMPLES + 1);
    for k in 0..=LAYER_SAMPLES {
        let x = k as f64 / LAYER_SAMPLES as f64;
        let u = sol.eval([x, y]).map_err(CliError::solver)?;
        let e = exact.map(|e| e.value([x, y])).transpose().map_err(CliError::oracle)?;
        rows.push((x, u, e));
    }
    let title = format!("y = {y}: b = {}, p = {}, n = {}, {}", cfg.b, cfg.degree, cfg.n, cfg.stab.mode);
    plot(cfg, &format!("layer_y{y}"), &title, &rows)
}

/// `convergence`: one row per (degree, mesh) and a fitted-rate row per degree.
pub fn run_convergence(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.meshes.len() < 2 {
        return Err(CliError::config(format!("convergence needs at least 2 meshes, got {}", cfg.meshes.len())));
    }
    if cfg.meshes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::config("meshes must be strictly increasing".to_string()));
    }
    let exact = reference(cfg).ok_or_else(|| CliError::config("convergence needs a problem with a closed-form reference (c = 0, source = 0, b = by)"))?;
    cfg.problem().validate().map_err(CliError::solver)?;
    make_out_dir(&cfg.out)?;

    let mut csv = Csv::new(&["kind", "degree", "n", "h", "dof", "l2", "h1_semi", "linf", "overshoot"]);
    for &p in &cfg.degrees {
        let mut runs = Vec::new();
        for &n in &cfg.meshes {
            let sol = solve(cfg, n, p)?;
            let r = error_norms(&sol, exact.as_ref()).map_err(CliError::oracle)?;
            csv.row(&[
                "run".into(),
                p.to_string(),
                n.to_string(),
                num(r.h_max),
                r.dof_count.to_string(),
                num(r.l2),
                num(r.h1_semi),
                num(r.linf),
                num(r.overshoot),
            ]);
            runs.push(r);
        }
        let rate = |f: fn(&ErrorReport) -> f64| convergence_rates(&runs.iter().map(|r| (r.h_max, f(r))).collect::<Vec<_>>()).ok();
        let (l2, h1, linf) = (rate(|r| r.l2), rate(|r| r.h1_semi), rate(|r| r.linf));
        csv.row(&["rate".into(), p.to_string(), String::new(), String::new(), String::new(), opt(l2), opt(h1), opt(linf), String::new()]);
        let show = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into());
        println!("p={p}: l2 rate {} h1 rate {} linf rate {}", show(l2), show(h1), show(linf));
    }
    write_file(&cfg.out.join("rates.csv"), &csv.finish())
}

fn oracle_points(cfg: &RunConfig) -> Vec<Point> {
    if let Some(p) = &cfg.points {
        return p.clone();
    }
    let k = cfg.grid;
    let t = |i: usize| i as f64 / (k - 1) as f64;
    if cfg.dim == 1 {
        (0..k).map(|i| [t(i), 0.0]).collect()
    } else {
        (0..k).flat_map(|j| (0..k).map(move |i| [t(i), t(j)])).collect()
    }
}

/// `oracle`: tabulated reference values with a residual-check summary.
pub fn run_oracle(cfg: &RunConfig) -> Result<(), CliError> {
    let b = cfg.oracle_b().ok_or_else(|| CliError::config("the configured problem has no closed-form reference"))?;
    let points = oracle_points(cfg);
    if let Some(p) = points.iter().find(|p| !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1])) {
        return Err(CliError::config(format!("point ({}, {}) is outside the domain", p[0], p[1])));
    }
    let params = SeriesParams { tol: cfg.tol, ..SeriesParams::new(b) };
    if cfg.dim == 2 {
        params.validate().map_err(CliError::config_from)?;
    }

    let mut csv = if cfg.dim == 1 { Csv::new(&["x", "u"]) } else { Csv::new(&["x", "y", "u", "terms"]) };
    for &[x, y] in &points {
        if cfg.dim == 1 {
            csv.row(&[num(x), num(exact_1d(x, b).map_err(CliError::oracle)?)]);
        } else if (x, y) == (0.0, 1.0) || (x, y) == (1.0, 0.0) {
            // where the Dirichlet data jump the series has no limit
            csv.row(&[num(x), num(y), num(0.5), "0".into()]);
        } else {
            let e = exact_2d_eval(x, y, &params, false).map_err(CliError::oracle)?;
            csv.row(&[num(x), num(y), num(e.value), e.terms.to_string()]);
        }
    }

    let (count, residual) = if cfg.dim == 1 {
        let xs: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        (xs.len(), oracle_residual_check_1d(b, &xs).map_err(CliError::oracle)?)
    } else {
        let pts: Vec<Point> = (0..5).flat_map(|j| (0..5).map(move |i| [0.1 + 0.2 * i as f64, 0.1 + 0.2 * j as f64])).collect();
        (pts.len(), oracle_residual_check(&params, &pts).map_err(CliError::oracle)?)
    };
    csv.comment(&format!("residual_check points={count} step={} relative_residual={}", num(FD_STEP), num(residual)));

    make_out_dir(&cfg.out)?;
    write_file(&cfg.out.join("oracle.csv"), &csv.finish())?;
    println!("points={} residual_check={residual:.3e} output={}", points.len(), cfg.out.display());
    Ok(())
}
