//! Scalar reductions of the fixpoint equations and the two-dimensional
//! `f1`/`f2` system whose near-diagonal intersection yields the asymmetric
//! `(q,0,0)` point.
//!
//! Throughout, `M = t^(d+1) = q^k - q` and all arguments live just above 1,
//! within `O(1/M)`, so every power is taken through `ln_1p`.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    bracketed_root, certify_unique_root, geometric_sum, pow1p, pow_minus_one, sign_changes,
    to_decimal, Bracket, PrecisionContext,
};
use crate::spin::ModelParams;

fn eps(x: &Float) -> Float {
    Float::with_val(x.prec(), x - 1u32)
}

/// `x^n` for `x > 0`.
fn powu(x: &Float, n: u32) -> Float {
    let mut l = Float::with_val(x.prec(), x.ln_ref());
    l *= n;
    l.exp()
}

fn m_float(p: &ModelParams) -> Float {
    p.weight_base_float()
}

/// `P(x)^d M - (x^d - 1)/(x - 1)` with `P = (x^(d+1) - 1)/(x^d - 1)`; shared head of h, h1, h2.
fn h_head(x: &Float, p: &ModelParams) -> Float {
    let d = p.d();
    let e = eps(x);
    let gd = geometric_sum(&e, d);
    let gd1 = geometric_sum(&e, d + 1);
    let mut lp = Float::with_val(p.prec(), gd1.ln_ref()) - Float::with_val(p.prec(), gd.ln_ref());
    lp *= d;
    lp.exp() * m_float(p) - gd
}

/// `h(x)` with tail `q' + (q'-1) x^d`, `q' = q/2`.
pub fn eval_h(x: &Float, p: &ModelParams) -> Float {
    let qh = p.half_q();
    let tail = Float::with_val(p.prec(), &qh - 1u32) * powu(x, p.d()) + &qh;
    h_head(x, p) + tail
}

/// `h1(x)` with tail `q - x^d`.
pub fn eval_h1(x: &Float, p: &ModelParams) -> Float {
    h_head(x, p) + p.q() - powu(x, p.d())
}

/// `h2(x)` with tail `(q-1) x^d`.
pub fn eval_h2(x: &Float, p: &ModelParams) -> Float {
    h_head(x, p) + powu(x, p.d()) * (p.q() - 1)
}

/// `(1 + a^d (b-1)/(a^d - 1))^d`.
fn inner_pow(a: &Float, b: &Float, d: u32) -> Result<Float> {
    let prec = a.prec();
    let ad_m1 = pow_minus_one(&eps(a), d);
    let ad = Float::with_val(prec, &ad_m1 + 1u32);
    let frac = ad * eps(b) / ad_m1;
    pow1p(&frac, &Float::with_val(prec, d))
}

/// `f1(x,y) = (x-1)((1 + x^d(y-1)/(x^d-1))^d M + q - y^d) - y^d + 1`, for `x > 1`, `y >= 1`.
pub fn eval_f1(x: &Float, y: &Float, p: &ModelParams) -> Float {
    let d = p.d();
    let inner = inner_pow(x, y, d).expect("x > 1 keeps the base positive");
    let yd_m1 = pow_minus_one(&eps(y), d);
    let yd = Float::with_val(p.prec(), &yd_m1 + 1u32);
    let bracket = inner * m_float(p) + p.q() - yd;
    eps(x) * bracket - yd_m1
}

/// `f2(x,y) = (y-1)((1 + y^d(x-1)/(y^d-1))^d M + (q-1) x^d) - x^d + 1`, for `y > 1`, `x >= 1`.
pub fn eval_f2(x: &Float, y: &Float, p: &ModelParams) -> Float {
    let d = p.d();
    let inner = inner_pow(y, x, d).expect("y > 1 keeps the base positive");
    let xd_m1 = pow_minus_one(&eps(x), d);
    let xd = Float::with_val(p.prec(), &xd_m1 + 1u32);
    let bracket = inner * m_float(p) + xd * (p.q() - 1);
    eps(y) * bracket - xd_m1
}

/// `g(x) = (x^d - 1)^d / ((x^(d+1) - 1)^(d-1) (x - 1))`, evaluated as `G_d^d / G_{d+1}^(d-1)`.
pub fn eval_g(x: &Float, p: &ModelParams) -> Float {
    let d = p.d();
    let e = eps(x);
    let a = Float::with_val(p.prec(), geometric_sum(&e, d).ln_ref()) * d;
    let b = Float::with_val(p.prec(), geometric_sum(&e, d + 1).ln_ref()) * (d - 1);
    (a - b).exp()
}

/// `chi = (y^d / (y - q(y-1)))^(1/(d-1))`, defined for `y < 1 + 1/(q-1)`.
pub fn chi(y: &Float, p: &ModelParams) -> Result<Float> {
    let den = Float::with_val(p.prec(), y - Float::with_val(p.prec(), eps(y) * p.q()));
    if den.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain("chi needs y < 1 + 1/(q-1)".into()));
    }
    let l = Float::with_val(p.prec(), y.ln_ref()) * p.d() - den.ln();
    Ok((l / (p.d() - 1)).exp())
}

/// `1 + 1/(M - 1)`: no zero of `f1` has a larger `x`, no zero of `f2` a larger `y`.
pub fn boundary(p: &ModelParams) -> Float {
    let m1 = m_float(p) - 1u32;
    m1.recip() + 1u32
}

/// `y_E = 1 + 0.5/(M - 1)`.
pub fn y_e(p: &ModelParams) -> Float {
    let m1 = m_float(p) - 1u32;
    (m1.recip() / 2u32) + 1u32
}

/// The limit of `h` at `1+`: `((d+1)/d)^d M - d + q - 1`.
pub fn h_limit_at_one(p: &ModelParams) -> Float {
    let d = p.d();
    let base = Float::with_val(p.prec(), d).recip();
    pow1p(&base, &p.float(d)).unwrap() * m_float(p) - d + (p.q() - 1)
}

/// The symmetric one-step scale `u > 1` solving `u = 1 + 1/(M u^d + q - 1)`.
pub fn solve_sym_u(p: &ModelParams) -> Result<Float> {
    let ctx = p.ctx().clone();
    let q = p.q();
    let f = |u: &Float| {
        let ud = powu(u, p.d());
        let den = ud * m_float(p) + (q - 1);
        Float::with_val(u.prec(), u - 1u32) - den.recip()
    };
    // f is increasing: u - 1 grows and the subtracted term shrinks
    let lo = p.float(1);
    let hi = p.float(1) + Float::with_val(p.prec(), q - 1).recip();
    certify_unique_root(f, &lo, &hi, &ctx).map_err(|e| no_root("symmetric u", e))
}

/// The named points of the scalar analysis.
#[derive(Clone, Debug)]
pub struct LandmarkSet {
    pub x_hat: Float,
    pub x_star: Float,
    pub x_2star: Float,
    pub x_0: Float,
    pub y_e: Float,
    pub x_e: Option<Float>,
    pub u: Float,
    pub boundary: Float,
}

impl LandmarkSet {
    /// `x_0 > x_star > x_2star > 1`.
    pub fn ordering_holds(&self) -> bool {
        self.x_0 > self.x_star && self.x_star > self.x_2star && self.x_2star > 1
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "x_hat": to_decimal(&self.x_hat),
            "x_star": to_decimal(&self.x_star),
            "x_2star": to_decimal(&self.x_2star),
            "x_0": to_decimal(&self.x_0),
            "y_E": to_decimal(&self.y_e),
            "x_E": self.x_e.as_ref().map(to_decimal),
            "u": to_decimal(&self.u),
            "boundary": to_decimal(&self.boundary),
            "ordering_holds": self.ordering_holds(),
        })
    }
}

fn no_root(what: &str, e: Error) -> Error {
    match e {
        Error::NoSignChange { .. } => Error::NoRoot(format!("{what}: no sign change")),
        other => other,
    }
}

/// The unique root of `h` in `(1, 1 + 1/(M-1)]`.
pub fn root_h(p: &ModelParams) -> Result<Float> {
    certify_unique_root(|x: &Float| eval_h(x, p), &p.float(1), &boundary(p), p.ctx())
        .map_err(|e| no_root("h", e))
}

/// The unique root `x**` of `h2`.
pub fn root_h2(p: &ModelParams) -> Result<Float> {
    certify_unique_root(|x: &Float| eval_h2(x, p), &p.float(1), &boundary(p), p.ctx())
        .map_err(|e| no_root("h2", e))
}

/// The smallest root `x*` of `h1`; `h1` is checked negative on the scan before it.
pub fn root_h1_smallest(p: &ModelParams) -> Result<Float> {
    let f = |x: &Float| eval_h1(x, p);
    let changes = sign_changes(&f, &p.float(1), &boundary(p), p.ctx().scan_points);
    let first = changes
        .first()
        .ok_or_else(|| Error::NoRoot("h1: no sign change".into()))?;
    if first.f_lo_sign > 0 {
        return Err(Error::NoRoot("h1 is not negative near 1".into()));
    }
    bracketed_root(f, first, p.ctx())
}

/// The unique crossing `g(x_0) = M`.
pub fn x0_crossing(p: &ModelParams) -> Result<Float> {
    let m = m_float(p);
    let f = |x: &Float| eval_g(x, p) - &m;
    let mut hi = boundary(p);
    let mut guard = 0;
    while f(&hi).cmp0() != Some(std::cmp::Ordering::Less) {
        hi = (hi - 1u32) * 2u32 + 1u32;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoRoot("g never drops below M".into()));
        }
    }
    certify_unique_root(f, &p.float(1), &hi, p.ctx()).map_err(|e| no_root("g = M", e))
}

/// Whether `g` decreases along a uniform grid of `n` points on `[lo, hi]`.
pub fn g_decreasing_on_grid(p: &ModelParams, lo: &Float, hi: &Float, n: usize) -> bool {
    let step = Float::with_val(p.prec(), hi - lo) / n as u64;
    let mut prev = eval_g(lo, p);
    for i in 1..=n {
        let x = Float::with_val(p.prec(), &step * i as u64) + lo;
        let v = eval_g(&x, p);
        if v >= prev {
            return false;
        }
        prev = v;
    }
    true
}

/// All landmarks. `x_E` is filled only when `d = 5 q^k`.
pub fn landmarks(p: &ModelParams) -> Result<LandmarkSet> {
    let x_e = match exterior_point_check(p) {
        Ok(r) => r.x_e,
        Err(Error::RegimeMismatch { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(LandmarkSet {
        x_hat: root_h(p)?,
        x_star: root_h1_smallest(p)?,
        x_2star: root_h2(p)?,
        x_0: x0_crossing(p)?,
        y_e: y_e(p),
        x_e,
        u: solve_sym_u(p)?,
        boundary: boundary(p),
    })
}

/// One sampled point of a zero curve.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub x: Float,
    pub y: Float,
    pub residual: Float,
}

/// Points on `f1 = 0` or `f2 = 0`.
#[derive(Clone, Debug)]
pub struct CurveTrace {
    pub which: &'static str,
    pub points: Vec<CurvePoint>,
    /// Grid abscissae where the per-point solve failed.
    pub skipped: Vec<f64>,
}

/// The `y in (1, x]` with `f1(x, y) = 0`; unique for `x < x_0` since `f1` decreases in `y`.
pub fn solve_f1_for_y(x: &Float, p: &ModelParams) -> Result<Float> {
    let f = |y: &Float| eval_f1(x, y, p);
    let br = Bracket::new(&f, p.float(1), x.clone())?;
    bracketed_root(f, &br, &tight(p.ctx()))
}

fn tight(ctx: &PrecisionContext) -> PrecisionContext {
    let mut c = ctx.clone();
    c.abs_tol = ctx.rel_tol * 1e-6;
    c
}

/// Traces the branch of `f1 = 0` below the diagonal from near `(1,1)` to `(x*, x*)`.
///
/// Intervals are split until `|dy| <= 2 |dx|` (at most eight halvings).
pub fn trace_p1_plus(p: &ModelParams, n_points: usize, x_star: &Float) -> CurveTrace {
    let n = n_points.max(2);
    let width = Float::with_val(p.prec(), x_star - 1u32);
    let xs: Vec<Float> = (1..n)
        .map(|i| Float::with_val(p.prec(), &width * i as u64) / n as u64 + 1u32)
        .collect();
    let solved: Vec<(Float, Result<Float>)> = xs
        .into_par_iter()
        .map(|x| {
            let y = solve_f1_for_y(&x, p);
            (x, y)
        })
        .collect();
    let mut pts: Vec<(Float, Float)> = Vec::new();
    let mut skipped = Vec::new();
    for (x, y) in solved {
        match y {
            Ok(y) => pts.push((x, y)),
            Err(_) => skipped.push(x.to_f64()),
        }
    }
    pts.push((x_star.clone(), x_star.clone()));
    let mut refined: Vec<(Float, Float)> = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        refined.push(w[0].clone());
        refine_segment(p, &w[0], &w[1], 8, &mut refined);
    }
    refined.push(pts.last().unwrap().clone());
    let points = refined
        .into_iter()
        .map(|(x, y)| {
            let r = eval_f1(&x, &y, p).abs();
            CurvePoint { x, y, residual: r }
        })
        .collect();
    CurveTrace {
        which: "f1",
        points,
        skipped,
    }
}

fn refine_segment(
    p: &ModelParams,
    a: &(Float, Float),
    b: &(Float, Float),
    depth: u32,
    out: &mut Vec<(Float, Float)>,
) {
    let dx = Float::with_val(p.prec(), &b.0 - &a.0).abs();
    let dy = Float::with_val(p.prec(), &b.1 - &a.1).abs();
    if depth == 0 || dy <= dx * 2u32 {
        return;
    }
    let xm = Float::with_val(p.prec(), &a.0 + &b.0) / 2u32;
    if let Ok(ym) = solve_f1_for_y(&xm, p) {
        let m = (xm, ym);
        refine_segment(p, a, &m, depth - 1, out);
        out.push(m.clone());
        refine_segment(p, &m, b, depth - 1, out);
    }
}

/// Traces `f2 = 0` as `x(y)` for `y` on a grid in `(1, x**)`, keeping the root above the diagonal-side `y`.
pub fn trace_f2(p: &ModelParams, n_points: usize, x_2star: &Float) -> CurveTrace {
    let n = n_points.max(2);
    let width = Float::with_val(p.prec(), x_2star - 1u32);
    let ys: Vec<Float> = (1..n)
        .map(|i| Float::with_val(p.prec(), &width * i as u64) / n as u64 + 1u32)
        .collect();
    let rows: Vec<(Float, Vec<Float>)> = ys
        .into_par_iter()
        .map(|y| {
            let r = solve_f2_for_x(&y, p);
            (y, r)
        })
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (y, roots) in rows {
        if roots.is_empty() {
            skipped.push(y.to_f64());
        }
        for x in roots {
            let r = eval_f2(&x, &y, p).abs();
            points.push(CurvePoint {
                x,
                y: y.clone(),
                residual: r,
            });
        }
    }
    CurveTrace {
        which: "f2",
        points,
        skipped,
    }
}

/// CSV with columns `which,x,y,f1,f2`.
pub fn curves_csv(p: &ModelParams, traces: &[&CurveTrace]) -> String {
    let mut out = String::from("which,x,y,f1,f2\n");
    for tr in traces {
        for pt in &tr.points {
            let f1 = eval_f1(&pt.x, &pt.y, p);
            let f2 = eval_f2(&pt.x, &pt.y, p);
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                tr.which,
                pt.x.to_string_radix(10, Some(30)),
                pt.y.to_string_radix(10, Some(30)),
                f1.to_string_radix(10, Some(12)),
                f2.to_string_radix(10, Some(12)),
            ));
        }
    }
    out
}

/// The roots `x > 1` of `f2(., y)`, at most two, sorted.
///
/// When `f2(y, y) < 0` there is one root on each side of `y`; otherwise both
/// roots (if any) are located by a scan that extends past `chi`.
pub fn solve_f2_for_x(y: &Float, p: &ModelParams) -> Vec<Float> {
    let ctx = tight(p.ctx());
    let f = |x: &Float| eval_f2(x, y, p);
    let one = p.float(1);
    let mut hi = Float::with_val(p.prec(), y * 2u32) - 1u32;
    if let Ok(c) = chi(y, p) {
        if c > hi {
            hi = c;
        }
    }
    let mut guard = 0;
    while f(&hi).cmp0() != Some(std::cmp::Ordering::Greater) && guard < 200 {
        hi = (hi - 1u32) * 2u32 + 1u32;
        guard += 1;
    }
    if f(y).cmp0() == Some(std::cmp::Ordering::Less) {
        let mut out = Vec::new();
        for (lo, up) in [(one, y.clone()), (y.clone(), hi)] {
            if let Ok(br) = Bracket::new(&f, lo, up) {
                if let Ok(r) = bracketed_root(f, &br, &ctx) {
                    out.push(r);
                }
            }
        }
        return out;
    }
    // both roots, if any, sit on one side: scan in ln(x - 1)
    let lo_e = Float::with_val(p.prec(), eps(y).ln() - 12u32);
    let hi_e = Float::with_val(p.prec(), eps(&hi).ln());
    let g = |le: &Float| f(&(Float::with_val(le.prec(), le.exp_ref()) + 1u32));
    sign_changes(&g, &lo_e, &hi_e, p.ctx().scan_points)
        .iter()
        .filter_map(|br| bracketed_root(g, br, &ctx).ok())
        .map(|le| le.exp() + 1u32)
        .collect()
}

/// The exterior point data.
#[derive(Clone, Debug)]
pub struct ExteriorReport {
    pub s: Float,
    pub y_e: Float,
    /// `f2(1 + s/d, 1 + s/(2d))`.
    pub f2_corner: Float,
    /// `f2(y_E, y_E)`.
    pub f2_diag: Float,
    pub x_e: Option<Float>,
    pub x_e_beyond_boundary: bool,
}

impl ExteriorReport {
    pub fn passed(&self) -> bool {
        self.f2_corner.is_sign_negative() && self.f2_diag.is_sign_negative() && self.x_e_beyond_boundary
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "s": to_decimal(&self.s),
            "y_E": to_decimal(&self.y_e),
            "f2_corner": to_decimal(&self.f2_corner),
            "f2_diag": to_decimal(&self.f2_diag),
            "x_E": self.x_e.as_ref().map(to_decimal),
            "x_E_beyond_boundary": self.x_e_beyond_boundary,
            "passed": self.passed(),
        })
    }
}

/// Evaluates the two exterior inequalities and locates `x_E`; requires `d = 5 q^k`.
pub fn exterior_point_check(p: &ModelParams) -> Result<ExteriorReport> {
    let required = 5 * p.q_pow_k();
    if u64::from(p.d()) != required {
        return Err(Error::RegimeMismatch {
            d: u64::from(p.d()),
            required,
        });
    }
    let d = p.d();
    let s = p.float(d) / (m_float(p) - 1u32);
    let sd = Float::with_val(p.prec(), &s / d);
    let x = Float::with_val(p.prec(), &sd + 1u32);
    let y = Float::with_val(p.prec(), &sd / 2u32) + 1u32;
    let f2_corner = eval_f2(&x, &y, p);
    let ye = y_e(p);
    let f2_diag = eval_f2(&ye, &ye, p);
    let x_e = solve_f2_for_x(&ye, p).into_iter().find(|r| *r > ye);
    let x_e_beyond_boundary = x_e.as_ref().is_some_and(|r| *r > boundary(p));
    Ok(ExteriorReport {
        s,
        y_e: ye,
        f2_corner,
        f2_diag,
        x_e,
        x_e_beyond_boundary,
    })
}

/// The near-diagonal solution of `f1 = f2 = 0` together with the reconstructed `r0, c0`.
#[derive(Clone, Debug)]
pub struct Intersection {
    pub x: Float,
    pub y: Float,
    pub f1: Float,
    pub f2: Float,
    /// Where the trace crosses `y = y_E`.
    pub x_m: Float,
    pub f2_at_m: Float,
    pub r0: Float,
    pub c0: Float,
    /// Largest violation of the four reduced `(q,0,0)` relations.
    pub reduced_residual: Float,
}

impl Intersection {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "x": to_decimal(&self.x),
            "y": to_decimal(&self.y),
            "f1": to_decimal(&self.f1),
            "f2": to_decimal(&self.f2),
            "x_M": to_decimal(&self.x_m),
            "f2_at_M": to_decimal(&self.f2_at_m),
            "r0": to_decimal(&self.r0),
            "c0": to_decimal(&self.c0),
            "reduced_residual": to_decimal(&self.reduced_residual),
        })
    }
}

/// `r0 = t((r1 - 1)/(c3^d - 1) + r1)` and `c0 = t((c3 - 1)/(r1^d - 1) + c3)`.
pub fn reconstruct_r0_c0(r1: &Float, c3: &Float, p: &ModelParams) -> (Float, Float) {
    let d = p.d();
    let r0 = (eps(r1) / pow_minus_one(&eps(c3), d) + r1) * p.t();
    let c0 = (eps(c3) / pow_minus_one(&eps(r1), d) + c3) * p.t();
    (r0, c0)
}

/// Largest violation of the reduced relations for type `(q,0,0)` with phantom class 3.
pub fn q00_reduced_residual(r0: &Float, r1: &Float, c0: &Float, c3: &Float, p: &ModelParams) -> Float {
    let d = p.d();
    let t = p.t();
    let q = p.q();
    let (r0d, r1d, c0d, c3d) = (powu(r0, d), powu(r1, d), powu(c0, d), powu(c3, d));
    let r_den = Float::with_val(p.prec(), &c0d * t) + q - &c3d;
    let c_den = Float::with_val(p.prec(), &r0d * t) + Float::with_val(p.prec(), &r1d * (q - 1));
    let t2 = Float::with_val(p.prec(), t.square_ref());
    let r0_rhs = (Float::with_val(p.prec(), &c0d * &t2) + Float::with_val(p.prec(), t * q)) / &r_den;
    let r1_rhs = (Float::with_val(p.prec(), &c0d * t) + (q - 1)) / &r_den;
    let c0_rhs = (Float::with_val(p.prec(), &r0d * &t2)
        + Float::with_val(p.prec(), &r1d * q) * t)
        / &c_den;
    let c3_rhs = (Float::with_val(p.prec(), &r0d * t) + Float::with_val(p.prec(), &r1d * q) - 1u32) / &c_den;
    [(r0, r0_rhs), (r1, r1_rhs), (c0, c0_rhs), (c3, c3_rhs)]
        .into_iter()
        .map(|(v, rhs)| (Float::with_val(p.prec(), v - &rhs) / v).abs())
        .fold(p.float(0), |a, b| a.max(&b))
}

/// Walks the `f1` branch from `M` (where it crosses `y = y_E`) toward `(x*, x*)`
/// and solves for the first zero of `f2` along it.
pub fn find_intersection_near_diagonal(p: &ModelParams, x_star: &Float) -> Result<Intersection> {
    let ye = y_e(p);
    if ye >= *x_star {
        return Err(Error::NoRoot("y_E is not below x*".into()));
    }
    // largest x in (y_E, x*] with f1(x, y_E) = 0
    let f1_ye = |x: &Float| eval_f1(x, &ye, p);
    let lo = Float::with_val(p.prec(), &ye * 1u32);
    let crossings = sign_changes(&f1_ye, &lo, x_star, p.ctx().scan_points);
    let last = crossings.last().ok_or_else(|| Error::NoSignChange {
        lo: to_decimal(&ye),
        hi: to_decimal(x_star),
    })?;
    let x_m = bracketed_root(f1_ye, last, &tight(p.ctx()))?;
    let along = |x: &Float| match solve_f1_for_y(x, p) {
        Ok(y) => eval_f2(x, &y, p),
        Err(_) => Float::with_val(p.prec(), rug::float::Special::Nan),
    };
    let f2_at_m = eval_f2(&x_m, &ye, p);
    let path = sign_changes(&along, &x_m, x_star, 256);
    let Some(first) = path.first() else {
        return Err(Error::NoSignChange {
            lo: format!("x_M={} f2={}", to_decimal(&x_m), f2_at_m.to_f64()),
            hi: format!(
                "x*={} f2={}",
                to_decimal(x_star),
                along(x_star).to_f64()
            ),
        });
    };
    let x = bracketed_root(along, first, &tight(p.ctx()))?;
    let y = solve_f1_for_y(&x, p)?;
    let (r0, c0) = reconstruct_r0_c0(&x, &y, p);
    let reduced_residual = q00_reduced_residual(&r0, &x, &c0, &y, p);
    Ok(Intersection {
        f1: eval_f1(&x, &y, p),
        f2: eval_f2(&x, &y, p),
        x,
        y,
        x_m,
        f2_at_m,
        r0,
        c0,
        reduced_residual,
    })
}

/// The symmetric-case bound data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymBoundReport {
    /// `1 + 3q - 2q^k + (q^k - q)(1 + 1/(2q^k - 2(q+1)))^(5 q^k)`.
    pub value: String,
    pub u: String,
    pub y_e: String,
    pub u_below_y_e: bool,
    pub holds: bool,
}

/// Evaluates the displayed inequality and checks `u < y_E` for the given parameters.
pub fn sym_bound_check(p: &ModelParams) -> Result<SymBoundReport> {
    let q = u64::from(p.q());
    let qk = p.q_pow_k();
    let base = p.float(2 * qk - 2 * (q + 1)).recip();
    let pw = pow1p(&base, &p.float(5 * qk))?;
    let value = pw * (qk - q) + (1 + 3 * q) - p.float(2 * qk);
    let u = solve_sym_u(p)?;
    let ye = y_e(p);
    let u_below = u < ye;
    Ok(SymBoundReport {
        holds: value.is_sign_positive() && !value.is_zero(),
        value: to_decimal(&value),
        u: to_decimal(&u),
        y_e: to_decimal(&ye),
        u_below_y_e: u_below,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: u32, k: u32, d: u32) -> ModelParams {
        ModelParams::from_d(q, k, d, PrecisionContext::extended()).unwrap()
    }

    #[test]
    fn h_limit_matches_direct_value() {
        let p = params(4, 2, 80);
        let direct = eval_h(&p.float(1), &p);
        let lim = h_limit_at_one(&p);
        assert!((direct - lim).abs() < 1e-60);
    }

    #[test]
    fn half_half_root_in_window() {
        let p = params(4, 2, 80);
        let x = root_h(&p).unwrap();
        assert!(x > 1 && x < boundary(&p));
        assert!(eval_h(&x, &p).abs() < p.ctx().abs_tol);
    }

    #[test]
    fn f_diagonal_reduction() {
        let p = params(4, 2, 80);
        for x in [1.001, 1.01, 1.05] {
            let x = p.float(x);
            let f1 = eval_f1(&x, &x, &p);
            let f2 = eval_f2(&x, &x, &p);
            let e = eps(&x);
            let r1 = Float::with_val(256, &f1 - Float::with_val(256, &e * eval_h1(&x, &p)));
            let r2 = Float::with_val(256, &f2 - Float::with_val(256, &e * eval_h2(&x, &p)));
            assert!(r1.abs() < 1e-50 * (1.0 + f1.to_f64().abs()));
            assert!(r2.abs() < 1e-50 * (1.0 + f2.to_f64().abs()));
        }
    }

    #[test]
    fn g_limits() {
        let p = params(4, 2, 80);
        let g1 = eval_g(&p.float(1), &p).to_f64();
        let expect = (80.0 * 80f64.ln() - 79.0 * 81f64.ln()).exp();
        assert!((g1 / expect - 1.0).abs() < 1e-12);
        let big = eval_g(&p.float(1e6), &p).to_f64();
        assert!((big - 1.0).abs() < 1e-3);
    }
}
