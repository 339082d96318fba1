//! Independent finite-difference reference for the 2D preset: first-order
//! upwind on a uniform grid, solved with geometric multigrid.

#![allow(dead_code)]

/// Grid values `u[j * (n + 1) + i]` at `(i/n, j/n)` for
/// `-lap u + b (u_x + u_y) = 0`, `u = 1` on `x = 0` / `y = 0`, `u = 0` on
/// `x = 1` / `y = 1`.
pub struct FdGrid {
    pub n: usize,
    pub u: Vec<f64>,
}

impl FdGrid {
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let i = (x * self.n as f64).round() as usize;
        let j = (y * self.n as f64).round() as usize;
        assert!(((i as f64) / self.n as f64 - x).abs() < 1e-12 && ((j as f64) / self.n as f64 - y).abs() < 1e-12);
        self.u[j * (self.n + 1) + i]
    }
}

#[derive(Clone, Copy)]
struct Stencil {
    c: f64,
    w: f64,
    e: f64,
    s: f64,
    n: f64,
}

fn stencil(n: usize, b: f64) -> Stencil {
    let h = 1.0 / n as f64;
    let d = 1.0 / (h * h);
    let (bp, bm) = (b.max(0.0) / h, (-b).max(0.0) / h);
    Stencil { c: 4.0 * d + 2.0 * (bp + bm), w: -d - bp, e: -d - bm, s: -d - bp, n: -d - bm }
}

fn smooth(u: &mut [f64], f: &[f64], n: usize, st: Stencil, sweeps: usize) {
    let m = n + 1;
    for _ in 0..sweeps {
        for j in 1..n {
            for i in 1..n {
                let k = j * m + i;
                let off = st.w * u[k - 1] + st.e * u[k + 1] + st.s * u[k - m] + st.n * u[k + m];
                u[k] = (f[k] - off) / st.c;
            }
        }
    }
}

fn residual(u: &[f64], f: &[f64], n: usize, st: Stencil) -> Vec<f64> {
    let m = n + 1;
    let mut r = vec![0.0; m * m];
    for j in 1..n {
        for i in 1..n {
            let k = j * m + i;
            let au = st.c * u[k] + st.w * u[k - 1] + st.e * u[k + 1] + st.s * u[k - m] + st.n * u[k + m];
            r[k] = f[k] - au;
        }
    }
    r
}

fn restrict(r: &[f64], n: usize) -> Vec<f64> {
    let (m, nc) = (n + 1, n / 2);
    let mc = nc + 1;
    let mut rc = vec![0.0; mc * mc];
    for jc in 1..nc {
        for ic in 1..nc {
            let k = 2 * jc * m + 2 * ic;
            rc[jc * mc + ic] = 0.25 * r[k]
                + 0.125 * (r[k - 1] + r[k + 1] + r[k - m] + r[k + m])
                + 0.0625 * (r[k - m - 1] + r[k - m + 1] + r[k + m - 1] + r[k + m + 1]);
        }
    }
    rc
}

fn prolong_add(u: &mut [f64], ec: &[f64], n: usize) {
    let (m, mc) = (n + 1, n / 2 + 1);
    for j in 1..n {
        for i in 1..n {
            let (jc, ic) = (j / 2, i / 2);
            let v = match (i % 2, j % 2) {
                (0, 0) => ec[jc * mc + ic],
                (1, 0) => 0.5 * (ec[jc * mc + ic] + ec[jc * mc + ic + 1]),
                (0, 1) => 0.5 * (ec[jc * mc + ic] + ec[(jc + 1) * mc + ic]),
                _ => 0.25 * (ec[jc * mc + ic] + ec[jc * mc + ic + 1] + ec[(jc + 1) * mc + ic] + ec[(jc + 1) * mc + ic + 1]),
            };
            u[j * m + i] += v;
        }
    }
}

fn vcycle(u: &mut [f64], f: &[f64], n: usize, b: f64) {
    let st = stencil(n, b);
    if n <= 2 {
        smooth(u, f, n, st, 50);
        return;
    }
    smooth(u, f, n, st, 2);
    let rc = restrict(&residual(u, f, n, st), n);
    let mut ec = vec![0.0; (n / 2 + 1) * (n / 2 + 1)];
    vcycle(&mut ec, &rc, n / 2, b);
    prolong_add(u, &ec, n);
    smooth(u, f, n, st, 2);
}

/// Solves on an `n x n` grid (`n` a power of two) to a max-norm residual
/// below `1e-10` relative to the diagonal.
pub fn fd_upwind_reference(b: f64, n: usize) -> FdGrid {
    assert!(n.is_power_of_two() && n >= 4);
    let m = n + 1;
    let mut u = vec![0.0; m * m];
    for k in 0..m {
        u[k] = 1.0; // y = 0
        u[k * m] = 1.0; // x = 0
    }
    for k in 1..m {
        u[n * m + k] = 0.0; // y = 1
        u[k * m + n] = 0.0; // x = 1
    }
    let f = vec![0.0; m * m];
    let st = stencil(n, b);
    for _ in 0..200 {
        vcycle(&mut u, &f, n, b);
        let r = residual(&u, &f, n, st);
        let rmax = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if rmax < 1e-10 * st.c {
            return FdGrid { n, u };
        }
    }
    panic!("multigrid did not converge for b = {b}");
}
