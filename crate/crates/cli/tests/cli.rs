use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use convdiff_core::assembly::ProblemSpec;
use convdiff_core::linsolve::DEFAULT_TOL;
use convdiff_core::solver::solve_problem;
use convdiff_core::stabilization::StabilizationConfig;

fn convdiff(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convdiff"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn convdiff")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn paper1d_report_counts_91_dofs() {
    let dir = tempfile::tempdir().unwrap();
    let out = convdiff(&["solve", "--preset", "paper1d", "--b", "50", "--degree", "3", "--n", "30"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("report.csv"));
    let k = header.iter().position(|h| h == "dof").unwrap();
    assert_eq!(rows[0][k], "91");
    assert!(dir.path().join("profile.svg").exists());
}

#[test]
fn paper2d_writes_layers_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let out = convdiff(&["solve", "--preset", "paper2d", "--b", "50", "--degree", "2", "--n", "32", "--stab", "supg"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["layer_y0.5.csv", "layer_y0.5.svg", "layer_y0.7.csv", "layer_y0.7.svg", "solution.vtk", "solution.csv", "report.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let vtk = fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    assert!(vtk.contains("POINTS 4225 double"));
    assert!(vtk.contains("SCALARS u double 1"));
}

#[test]
fn invalid_config_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("run");
    let out = convdiff(&["solve", "--preset", "custom", "--n", "0"], &target);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
    let out = convdiff(&["solve", "--stab", "bubble"], &target);
    assert_eq!(out.status.code(), Some(2));
    let out = convdiff(&["convergence", "--meshes", ""], &target);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
}

#[test]
fn oracle_truncation_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = convdiff(&["oracle", "--preset", "paper2d", "--points", "0.999999:0.000001"], dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn convergence_rates_1d() {
    let dir = tempfile::tempdir().unwrap();
    let out = convdiff(&["convergence", "--b", "10", "--meshes", "32,64,128", "--degrees", "1,2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("rates.csv"));
    let l2 = header.iter().position(|h| h == "l2").unwrap();
    let rates: Vec<f64> = rows.iter().filter(|r| r[0] == "rate").map(|r| r[l2].parse().unwrap()).collect();
    assert_eq!(rows.len(), 8);
    assert!((rates[0] - 2.0).abs() < 0.3, "{rates:?}");
    assert!((rates[1] - 3.0).abs() < 0.3, "{rates:?}");
}

#[test]
fn oracle_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = convdiff(&["oracle", "--preset", "paper1d", "--b", "50", "--points", "0,0.5,1"], dir.path());
    assert!(out.status.success());
    let u = column(&dir.path().join("oracle.csv"), "u");
    assert_eq!(u[0], 1.0);
    assert!((u[1] - (1.0 - (-25f64).exp())).abs() < 1e-15);
    assert_eq!(u[2], 0.0);
    let text = fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# residual_check")));

    let out = convdiff(&["oracle", "--preset", "paper2d", "--b", "50", "--points", "0.5:1"], dir.path());
    assert!(out.status.success());
    assert_eq!(column(&dir.path().join("oracle.csv"), "u"), vec![0.0]);
    let out = convdiff(&["oracle", "--preset", "paper2d", "--b", "0", "--points", "0.5:0.5"], dir.path());
    assert!(out.status.success());
    assert!((column(&dir.path().join("oracle.csv"), "u")[0] - 0.5).abs() < 1e-8);
}

#[test]
fn outputs_are_reproducible() {
    let args = ["solve", "--preset", "paper2d", "--b", "20", "--degree", "2", "--n", "8", "--stab", "artdiff"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(convdiff(&args, a.path()).status.success());
    assert!(convdiff(&args, b.path()).status.success());
    for f in ["solution.csv", "solution.vtk", "layer_y0.5.csv", "layer_y0.5.svg", "layer_y0.7.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    // the report differs only in its wall-time column
    let strip = |p: &Path| {
        let (h, rows) = read_csv(&p.join("report.csv"));
        let k = h.iter().position(|c| c == "wall_time_s").unwrap();
        rows.into_iter().map(|mut r| {
            r.remove(k);
            r
        }).collect::<Vec<_>>()
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn solution_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = convdiff(&["solve", "--preset", "paper1d", "--b", "50", "--degree", "2", "--n", "12", "--stab", "supg"], dir.path());
    assert!(out.status.success());
    let sol = solve_problem(&ProblemSpec::paper_1d(50.0), 12, 2, &StabilizationConfig::supg(), DEFAULT_TOL).unwrap();
    let u = column(&dir.path().join("solution.csv"), "u");
    let x = column(&dir.path().join("solution.csv"), "x");
    assert_eq!(u.len(), sol.values().len());
    for i in 0..u.len() {
        assert_eq!(u[i].to_bits(), sol.values()[i].to_bits());
        assert_eq!(x[i].to_bits(), sol.coords()[i][0].to_bits());
    }
}

#[test]
fn profile_shows_galerkin_overshoot_and_supg_cure() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["solve", "--preset", "paper1d", "--b", "50", "--degree", "1", "--n", "10"];
    let g = dir.path().join("g");
    assert!(convdiff(&[&base[..], &["--stab", "galerkin"]].concat(), &g).status.success());
    let s = dir.path().join("s");
    assert!(convdiff(&[&base[..], &["--stab", "supg"]].concat(), &s).status.success());
    let gmax = column(&g.join("profile.csv"), "u_h").into_iter().fold(f64::MIN, f64::max);
    let smax = column(&s.join("profile.csv"), "u_h").into_iter().fold(f64::MIN, f64::max);
    assert!(gmax > 1.1, "{gmax}");
    assert!(smax <= 1.0 + 1e-12, "{smax}");
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# 2D run\npreset = paper2d\nn = 4\ndegree = 1\nlayers = 0.25\n").unwrap();
    let out = convdiff(&["solve", "--config", cfg.to_str().unwrap(), "--n", "6"], &dir.path().join("o"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("o/report.csv"));
    let k = header.iter().position(|h| h == "dof").unwrap();
    assert_eq!(rows[0][k], "49");
    assert!(dir.path().join("o/layer_y0.25.csv").exists());
    fs::write(&cfg, "colour = red\n").unwrap();
    let out = convdiff(&["solve", "--config", cfg.to_str().unwrap()], &dir.path().join("p"));
    assert_eq!(out.status.code(), Some(2));
}
