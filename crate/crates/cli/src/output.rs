//! CSV, legacy VTK and SVG writers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use convdiff_core::solver::Solution;

use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn comment(&mut self, line: &str) {
        self.text.push_str("# ");
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// `solution.csv`: one row per DOF.
pub fn solution_csv(sol: &Solution) -> String {
    let dim = sol.mesh().dim();
    let mut csv = Csv::new(if dim == 1 { &["dof", "x", "u"] } else { &["dof", "x", "y", "u"] });
    for (i, (p, u)) in sol.coords().iter().zip(sol.values()).enumerate() {
        let mut row = vec![i.to_string(), num(p[0])];
        if dim == 2 {
            row.push(num(p[1]));
        }
        row.push(num(*u));
        csv.row(&row);
    }
    csv.finish()
}

/// Legacy ASCII VTK of a 2D solution. Every DOF is a point; each element is
/// split into `p^2` linear triangles on its nodal lattice.
pub fn solution_vtk(sol: &Solution) -> String {
    let mesh = sol.mesh();
    let dofs = sol.dofmap();
    let p = sol.degree();
    let nodes = sol.element().nodes();
    let lattice: HashMap<(usize, usize), usize> = nodes
        .iter()
        .enumerate()
        .map(|(k, r)| (((r[0] * p as f64).round() as usize, (r[1] * p as f64).round() as usize), k))
        .collect();
    let mut local_tris = Vec::new();
    for j in 0..p {
        for i in 0..p - j {
            local_tris.push([lattice[&(i, j)], lattice[&(i + 1, j)], lattice[&(i, j + 1)]]);
            if i + j + 1 < p {
                local_tris.push([lattice[&(i + 1, j)], lattice[&(i + 1, j + 1)], lattice[&(i, j + 1)]]);
            }
        }
    }

    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nconvection-diffusion solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", sol.coords().len());
    for c in sol.coords() {
        let _ = writeln!(s, "{} {} 0", num(c[0]), num(c[1]));
    }
    let ncells = mesh.cell_count() * local_tris.len();
    let _ = writeln!(s, "CELLS {ncells} {}", 4 * ncells);
    for c in 0..mesh.cell_count() {
        let cd = dofs.cell_dofs(c);
        for t in &local_tris {
            let _ = writeln!(s, "3 {} {} {}", cd[t[0]], cd[t[1]], cd[t[2]]);
        }
    }
    let _ = writeln!(s, "CELL_TYPES {ncells}");
    for _ in 0..ncells {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", sol.values().len());
    s.push_str("SCALARS u double 1\nLOOKUP_TABLE default\n");
    for v in sol.values() {
        s.push_str(&num(*v));
        s.push('\n');
    }
    s
}

pub struct Series<'a> {
    pub label: &'a str,
    pub colour: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Line plot over `x in [0, 1]` with axes, ticks and a legend.
pub fn line_plot_svg(title: &str, x_label: &str, series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const L: f64 = 60.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    let ys = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).filter(|v| v.is_finite());
    let (mut lo, mut hi) = ys.fold((0.0f64, 1.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    let px = |x: f64| L + x * (W - L - R);
    let py = |y: f64| T + (hi - y) / (hi - lo) * (H - T - B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>"#, W / 2.0);
    // axes
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} L{:.2} {:.2}" fill="none" stroke="black"/>"#,
        px(0.0),
        T,
        px(0.0),
        H - B,
        px(1.0),
        H - B
    );
    for k in 0..=4 {
        let x = k as f64 / 4.0;
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#, px(x), H - B, H - B + 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{x}</text>"#, px(x), H - B + 18.0);
    }
    for k in 0..=4 {
        let y = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/>"#, px(0.0) - 5.0, py(y), px(0.0));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{y:.3}</text>"#, px(0.0) - 8.0, py(y) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>"#, px(0.5), H - 10.0);
    for (k, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser.points.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, ser.colour, pts.join(" "));
        let ly = T + 16.0 * k as f64 + 8.0;
        let lx = W - R - 150.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/>"#, lx + 24.0, ser.colour);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#, lx + 30.0, ly + 4.0, ser.label);
    }
    s.push_str("</svg>\n");
    s
}
