//! Closed-form reference solutions.
//!
//! 1D: `u'' - b u' = 0` on `[0,1]`, `u(0) = 1`, `u(1) = 0`, with solution
//! `(e^{bx} - e^b) / (1 - e^b)`.
//!
//! 2D: `lap u - b (u_x + u_y) = 0` on the unit square with `u = 1` on the
//! bottom/left sides and `u = 0` on the top/right sides. Separation of
//! variables after the substitution `u = e^{b(x+y)/2} w` gives
//!
//! ```text
//! u = sum_n C_n e^{b(x+y)/2} [sin(n pi x) S_n(y) + sin(n pi y) S_n(x)]
//! C_n = 8 n pi (1 - (-1)^n e^{-b/2}) / (b^2 + 4 n^2 pi^2)
//! S_n(t) = sinh(mu_n (1 - t)) / sinh(mu_n),   mu_n = sqrt(2b^2 + 4n^2 pi^2) / 2
//! ```
//!
//! This expansion decays like `e^{-n pi min(x, y)}` and does not converge
//! usefully on the inflow sides. The complement `q = 1 - u` solves the same
//! equation with the data swapped, giving
//!
//! ```text
//! q = sum_n e^{-b/2} C_n e^{b(x+y)/2} [sin(n pi x) T_n(y) + sin(n pi y) T_n(x)]
//! T_n(t) = sinh(mu_n t) / sinh(mu_n)
//! ```
//!
//! which decays like `e^{-n pi min(1-x, 1-y)}`. Each point is summed in
//! whichever form has the smaller leading-term magnitude (subject to both
//! converging within the term cap). Every exponential factor is merged into a
//! single exponent before evaluation, so no intermediate overflows for
//! `|b| <= 200`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::Point;

pub const DEFAULT_SERIES_TOL: f64 = 1e-10;
pub const DEFAULT_SERIES_TERMS: usize = 20_000;
/// Consecutive negligible terms required before the sum is accepted.
pub const STOP_RUN: usize = 5;
pub const MAX_ABS_B_2D: f64 = 200.0;
pub const MAX_ABS_B_1D: f64 = 700.0;
/// Step of the finite-difference residual check.
pub const FD_STEP: f64 = 1e-4;

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { point: [x, 0.0], domain: "interval [0, 1]" })
    }
}

fn check_b_1d(b: f64) -> Result<()> {
    if !b.is_finite() || b.abs() > MAX_ABS_B_1D {
        return Err(Error::InvalidArgument(format!("|b| must be <= {MAX_ABS_B_1D}, got {b}")));
    }
    Ok(())
}

/// Exact 1D solution, overflow-free for `|b| <= 700`.
pub fn exact_1d(x: f64, b: f64) -> Result<f64> {
    check_unit(x)?;
    check_b_1d(b)?;
    if b.abs() < 1e-8 {
        return Ok(1.0 - x);
    }
    if b > 0.0 {
        Ok((-b * (1.0 - x)).exp_m1() / (-b).exp_m1())
    } else {
        Ok((b * x).exp() * (b * (1.0 - x)).exp_m1() / b.exp_m1())
    }
}

/// Derivative of [`exact_1d`].
pub fn exact_1d_derivative(x: f64, b: f64) -> Result<f64> {
    check_unit(x)?;
    check_b_1d(b)?;
    if b.abs() < 1e-8 {
        return Ok(-1.0);
    }
    if b > 0.0 {
        Ok(b * (-b * (1.0 - x)).exp() / (-b).exp_m1())
    } else {
        Ok(-b * (b * x).exp() / b.exp_m1())
    }
}

/// `C_n = 8 n pi (1 - (-1)^n e^{-b/2}) / (b^2 + 4 n^2 pi^2)`.
pub fn series_coefficient(n: usize, b: f64) -> f64 {
    let nf = n as f64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    8.0 * nf * PI * (1.0 - sign * (-b / 2.0).exp()) / (b * b + 4.0 * nf * nf * PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesParams {
    pub b: f64,
    pub tol: f64,
    pub n_max: usize,
}

impl SeriesParams {
    pub fn new(b: f64) -> Self {
        SeriesParams { b, tol: DEFAULT_SERIES_TOL, n_max: DEFAULT_SERIES_TERMS }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() || self.b.abs() > MAX_ABS_B_2D {
            return Err(Error::InvalidArgument(format!("|b| must be <= {MAX_ABS_B_2D}, got {}", self.b)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("series tolerance must be > 0, got {}", self.tol)));
        }
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("series term cap must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which of the two equivalent expansions is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesForm {
    /// Homogeneous on the top/right sides; converges away from the inflow
    /// sides `x = 0`, `y = 0`.
    Outflow,
    /// `1 - q` with `q` homogeneous on the bottom/left sides; converges away
    /// from the outflow sides `x = 1`, `y = 1`.
    Inflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    pub gradient: [f64; 2],
    pub terms: usize,
    pub form: SeriesForm,
}

/// `sin(pi z)` with exact zeros at integers.
fn sin_pi(z: f64) -> f64 {
    let r = z - 2.0 * (z / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

/// `cos(pi z)` with exact zeros at half-integers.
fn cos_pi(z: f64) -> f64 {
    let r = z - 2.0 * (z / 2.0).round();
    if r.abs() == 0.5 {
        0.0
    } else {
        (PI * r).cos()
    }
}

fn mu(n: usize, b: f64) -> f64 {
    let nf = n as f64;
    0.5 * (2.0 * b * b + 4.0 * nf * nf * PI * PI).sqrt()
}

/// One term of the chosen expansion and its envelope (the same term with the
/// sine factors replaced by one).
struct Term {
    value: f64,
    grad: [f64; 2],
    envelope: f64,
    grad_envelope: f64,
}

/// Contribution `sin(n pi s) * e^{b(x+y)/2} * H(t)` for one of the two
/// symmetric pieces, where `s` is the sine coordinate and `t` the hyperbolic
/// one. Returns `(value, d/ds, d/dt, envelope)` with the coefficient's two
/// exponent offsets already applied.
fn piece(form: SeriesForm, n: usize, b: f64, s: f64, t: f64) -> (f64, f64, f64, f64) {
    let m = mu(n, b);
    let nf = n as f64;
    let k = 8.0 * nf * PI / (b * b + 4.0 * nf * nf * PI * PI);
    let alt = if n % 2 == 0 { 1.0 } else { -1.0 };
    let denom = -(-2.0 * m).exp_m1();
    let base = b * (s + t) / 2.0;
    // (exponent, ratio factor, derivative factor of the hyperbolic part)
    let (e, f, g, offsets) = match form {
        SeriesForm::Outflow => {
            // sinh(mu(1-t))/sinh(mu) = e^{-mu t} f,  cosh(mu(1-t))/sinh(mu) = e^{-mu t} g
            let tail = (-2.0 * m * (1.0 - t)).exp();
            let f = -(-2.0 * m * (1.0 - t)).exp_m1() / denom;
            let g = (1.0 + tail) / denom;
            (base - m * t, f, -m * g, [(0.0, 1.0), (-b / 2.0, -alt)])
        }
        SeriesForm::Inflow => {
            // sinh(mu t)/sinh(mu) = e^{-mu(1-t)} f,  cosh(mu t)/sinh(mu) = e^{-mu(1-t)} g
            let tail = (-2.0 * m * t).exp();
            let f = -(-2.0 * m * t).exp_m1() / denom;
            let g = (1.0 + tail) / denom;
            (base - m * (1.0 - t), f, m * g, [(-b / 2.0, 1.0), (-b, -alt)])
        }
    };
    let mut amp = 0.0;
    let mut env = 0.0;
    for (off, sign) in offsets {
        let x = (e + off).exp();
        amp += sign * x;
        env += x;
    }
    let sn = sin_pi(nf * s);
    let cn = cos_pi(nf * s);
    let value = k * sn * f * amp;
    let d_s = k * (0.5 * b * sn + nf * PI * cn) * f * amp;
    let d_t = k * sn * (0.5 * b * f + g) * amp;
    (value, d_s, d_t, k * f * env)
}

fn term(form: SeriesForm, n: usize, b: f64, x: f64, y: f64) -> Term {
    // piece in sin(n pi x) S(y) and its mirror sin(n pi y) S(x)
    let (v1, dx1, dy1, e1) = piece(form, n, b, x, y);
    let (v2, dy2, dx2, e2) = piece(form, n, b, y, x);
    let envelope = e1 + e2;
    let nf = n as f64;
    Term {
        value: v1 + v2,
        grad: [dx1 + dx2, dy1 + dy2],
        envelope,
        grad_envelope: envelope * (0.5 * b.abs() + nf * PI + mu(n, b)),
    }
}

fn finish(form: SeriesForm, sum: f64, grad: [f64; 2]) -> (f64, [f64; 2]) {
    match form {
        SeriesForm::Outflow => (sum, grad),
        SeriesForm::Inflow => (1.0 - sum, [-grad[0], -grad[1]]),
    }
}

/// Picks the expansion for a point: the one with the smaller leading-term
/// magnitude, unless only the other converges within the term cap.
pub fn choose_form(x: f64, y: f64, params: &SeriesParams) -> SeriesForm {
    let b = params.b;
    let m1 = mu(1, b);
    let neg = (-b / 2.0).max(0.0);
    let d_out = x.min(y);
    let d_in = (1.0 - x).min(1.0 - y);
    let e_out = b * (x + y) / 2.0 + neg - m1 * d_out;
    let e_in = b * (x + y) / 2.0 - b / 2.0 + neg - m1 * d_in;
    let target = (1.0 / params.tol).ln() + 3.0;
    let estimate = |e: f64, d: f64| {
        if d <= 0.0 {
            f64::INFINITY
        } else {
            (e.max(0.0) + target) / (PI * d)
        }
    };
    let cap = params.n_max as f64;
    let (n_out, n_in) = (estimate(e_out, d_out), estimate(e_in, d_in));
    match (n_out <= cap, n_in <= cap) {
        (true, false) => SeriesForm::Outflow,
        (false, true) => SeriesForm::Inflow,
        _ if e_in < e_out => SeriesForm::Inflow,
        _ => SeriesForm::Outflow,
    }
}

fn check_square(x: f64, y: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::Domain { point: [x, y], domain: "unit square" })
    }
}

/// Sums the 2D series until `STOP_RUN` consecutive terms are negligible.
pub fn exact_2d_eval(x: f64, y: f64, params: &SeriesParams, with_gradient: bool) -> Result<SeriesEval> {
    params.validate()?;
    check_square(x, y)?;
    let form = choose_form(x, y, params);
    sum_until_converged(x, y, params, form, with_gradient)
}

fn sum_until_converged(x: f64, y: f64, params: &SeriesParams, form: SeriesForm, with_gradient: bool) -> Result<SeriesEval> {
    let b = params.b;
    let mut sum = 0.0;
    let mut grad = [0.0; 2];
    let mut run = 0;
    let mut last = f64::NAN;
    for n in 1..=params.n_max {
        let t = term(form, n, b, x, y);
        sum += t.value;
        grad[0] += t.grad[0];
        grad[1] += t.grad[1];
        if !sum.is_finite() {
            return Err(Error::Internal(format!("series overflow at term {n} for ({x}, {y})")));
        }
        last = t.envelope;
        let small = t.envelope < params.tol * (1.0 + sum.abs())
            && (!with_gradient || t.grad_envelope < params.tol * (1.0 + grad[0].abs() + grad[1].abs()));
        run = if small { run + 1 } else { 0 };
        if run >= STOP_RUN {
            let (value, gradient) = finish(form, sum, grad);
            return Ok(SeriesEval { value, gradient, terms: n, form });
        }
    }
    Err(Error::Truncation { terms: params.n_max, last_term: last })
}

/// Value of the 2D solution.
pub fn exact_2d(x: f64, y: f64, params: &SeriesParams) -> Result<f64> {
    exact_2d_eval(x, y, params, false).map(|e| e.value)
}

/// Value and gradient of the 2D solution.
pub fn exact_2d_with_gradient(x: f64, y: f64, params: &SeriesParams) -> Result<(f64, [f64; 2])> {
    exact_2d_eval(x, y, params, true).map(|e| (e.value, e.gradient))
}

/// Partial sum with a fixed number of terms in a fixed form. Every partial
/// sum solves the PDE exactly, which makes it the right object for
/// finite-difference residual checks.
pub fn partial_sum(x: f64, y: f64, b: f64, form: SeriesForm, terms: usize) -> f64 {
    let sum: f64 = (1..=terms).map(|n| term(form, n, b, x, y).value).sum();
    finish(form, sum, [0.0; 2]).0
}

/// `|lap_h u - b (D_x u + D_y u)|` maximized over `points`, divided by
/// `1 + |b| max |grad_h u|`, using second-order centred differences with
/// step `h`.
pub fn fd_relative_residual(u: impl Fn(f64, f64) -> f64, b: f64, points: &[Point], h: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut max_grad: f64 = 0.0;
    for &[x, y] in points {
        let c = u(x, y);
        let (xp, xm, yp, ym) = (u(x + h, y), u(x - h, y), u(x, y + h), u(x, y - h));
        let lap = (xp + xm + yp + ym - 4.0 * c) / (h * h);
        let dx = (xp - xm) / (2.0 * h);
        let dy = (yp - ym) / (2.0 * h);
        worst = worst.max((lap - b * (dx + dy)).abs());
        max_grad = max_grad.max((dx * dx + dy * dy).sqrt());
    }
    worst / (1.0 + b.abs() * max_grad)
}

/// Centred differences of `e^{z t}` with step `h`, divided by `e^{z t}`:
/// `(first, second)` = `(sinh(zh)/h, 4 sinh^2(zh/2)/h^2)`.
fn fd_symbols(z: Complex64, h: f64) -> (Complex64, Complex64) {
    let half = (z * (h / 2.0)).sinh();
    ((z * h).sinh() / h, half * half * (4.0 / (h * h)))
}

/// Five-point stencil of one series term: `(lap_h - b(D_x + D_y), D_x, D_y)`.
///
/// Each piece of the term is a sum of `Im(c e^{lambda s + nu t})`, so the
/// differences are formed from the exact difference symbols instead of by
/// subtracting nearly equal samples. Individual terms can be five orders of
/// magnitude larger than `u`, which would otherwise swamp the residual with
/// rounding amplified by `1/h^2`.
fn term_stencil(form: SeriesForm, n: usize, b: f64, x: f64, y: f64, h: f64) -> (f64, f64, f64) {
    let m = mu(n, b);
    let nf = n as f64;
    let k = 8.0 * nf * PI / (b * b + 4.0 * nf * nf * PI * PI);
    let alt = if n % 2 == 0 { 1.0 } else { -1.0 };
    let denom = -(-2.0 * m).exp_m1();
    // (shift of nu, constant exponent, sign) for the two exponentials of the
    // hyperbolic factor, and the coefficient's exponent offsets
    let (hyper, offsets) = match form {
        SeriesForm::Outflow => ([(-m, 0.0, 1.0), (m, -2.0 * m, -1.0)], [(0.0, 1.0), (-b / 2.0, -alt)]),
        SeriesForm::Inflow => ([(m, -m, 1.0), (-m, -m, -1.0)], [(-b / 2.0, 1.0), (-b, -alt)]),
    };
    let lambda = Complex64::new(b / 2.0, nf * PI);
    let (l1, l2) = fd_symbols(lambda, h);
    let mut res = 0.0;
    let mut grad = [0.0; 2];
    // piece 1: sine in x, hyperbolic in y; piece 2 mirrored
    for (s, t, swap) in [(x, y, false), (y, x, true)] {
        let (sn, cn) = (sin_pi(nf * s), cos_pi(nf * s));
        for &(shift, kappa, sigma) in &hyper {
            let nu = b / 2.0 + shift;
            let (n1, n2) = fd_symbols(Complex64::new(nu, 0.0), h);
            for &(off, sign) in &offsets {
                let mag = k * sign * sigma / denom * (b * s / 2.0 + nu * t + kappa + off).exp();
                let im = |z: Complex64| mag * (sn * z.re + cn * z.im);
                let r = l2 + n2 - (l1 + n1) * b;
                res += im(r);
                let ds = im(l1);
                let dt = mag * sn * n1.re;
                if swap {
                    grad[0] += dt;
                    grad[1] += ds;
                } else {
                    grad[0] += ds;
                    grad[1] += dt;
                }
            }
        }
    }
    match form {
        SeriesForm::Outflow => (res, grad[0], grad[1]),
        SeriesForm::Inflow => (-res, -grad[0], -grad[1]),
    }
}

/// Finite-difference check that the series solves `lap u = b (u_x + u_y)`:
/// the centred five-point stencil with step [`FD_STEP`] applied to a partial
/// sum.
///
/// The partial sum at each sample uses one form and one term count (the
/// largest the stopping rule asks for among the five stencil points). Every
/// partial sum solves the PDE exactly, so what remains is the `O(h^2)`
/// consistency error of the stencil.
pub fn oracle_residual_check(params: &SeriesParams, points: &[Point]) -> Result<f64> {
    params.validate()?;
    let h = FD_STEP;
    let b = params.b;
    let mut worst: f64 = 0.0;
    let mut max_grad: f64 = 0.0;
    for &[x, y] in points {
        if x.min(y).min(1.0 - x).min(1.0 - y) < 0.05 {
            return Err(Error::InvalidArgument(format!("residual check point ({x}, {y}) is within 0.05 of the boundary")));
        }
        let form = choose_form(x, y, params);
        let mut terms = 0;
        for [sx, sy] in [[x, y], [x + h, y], [x - h, y], [x, y + h], [x, y - h]] {
            terms = terms.max(sum_until_converged(sx, sy, params, form, false)?.terms);
        }
        let (mut res, mut dx, mut dy) = (0.0, 0.0, 0.0);
        for n in 1..=terms {
            let (r, gx, gy) = term_stencil(form, n, b, x, y, h);
            res += r;
            dx += gx;
            dy += gy;
        }
        worst = worst.max(res.abs());
        max_grad = max_grad.max((dx * dx + dy * dy).sqrt());
    }
    Ok(worst / (1.0 + b.abs() * max_grad))
}

/// 1D analogue of [`oracle_residual_check`] for `u'' - b u' = 0`.
pub fn oracle_residual_check_1d(b: f64, points: &[f64]) -> Result<f64> {
    let h = FD_STEP;
    let mut worst: f64 = 0.0;
    let mut max_grad: f64 = 0.0;
    for &x in points {
        if x < h || x > 1.0 - h {
            return Err(Error::InvalidArgument(format!("residual check point {x} too close to the boundary")));
        }
        let (c, p, m) = (exact_1d(x, b)?, exact_1d(x + h, b)?, exact_1d(x - h, b)?);
        let d2 = (p - 2.0 * c + m) / (h * h);
        let d1 = (p - m) / (2.0 * h);
        worst = worst.max((d2 - b * d1).abs());
        max_grad = max_grad.max(d1.abs());
    }
    Ok(worst / (1.0 + b.abs() * max_grad))
}
