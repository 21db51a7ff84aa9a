use std::cmp::Ordering;

use rug::Float;

use super::{bracketed_root, Bracket, PrecisionContext};
use crate::error::{Error, Result};

/// Horner evaluation; coefficients highest degree first.
pub fn eval_poly(coeffs: &[Float], x: &Float) -> Float {
    let prec = x.prec();
    let mut acc = Float::with_val(prec, 0);
    for c in coeffs {
        acc *= x;
        acc += c;
    }
    acc
}

fn derivative(coeffs: &[Float]) -> Vec<Float> {
    let deg = coeffs.len() - 1;
    coeffs[..deg]
        .iter()
        .enumerate()
        .map(|(i, c)| Float::with_val(c.prec(), c * (deg - i) as u64))
        .collect()
}

/// All real roots of a polynomial, sorted ascending, repeated roots reported once.
///
/// Critical points of `p` come from a recursive call on `p'`; between
/// consecutive critical points `p` is monotone, so each interval holds at most
/// one root and bisection isolates it.
pub fn real_polynomial_roots(coeffs: &[Float], ctx: &PrecisionContext) -> Result<Vec<Float>> {
    if coeffs.is_empty() {
        return Ok(Vec::new());
    }
    if coeffs[0].is_zero() {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let prec = ctx.prec();
    let lead = Float::with_val(prec, &coeffs[0]);
    let monic: Vec<Float> = coeffs.iter().map(|c| Float::with_val(prec, c / &lead)).collect();
    let scale = coeffs
        .iter()
        .map(|c| Float::with_val(prec, c.abs_ref()))
        .max_by(|a, b| a.partial_cmp(b).unwrap())
        .unwrap();
    let tol = Float::with_val(prec, &scale * ctx.abs_tol) / Float::with_val(prec, lead.abs_ref());
    roots_monic(&monic, &tol, ctx)
}

fn roots_monic(p: &[Float], tol: &Float, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let prec = ctx.prec();
    let deg = p.len() - 1;
    match deg {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![Float::with_val(prec, -&p[1])]),
        _ => {}
    }
    let dp = derivative(p);
    let dlead = Float::with_val(prec, &dp[0]);
    let dmonic: Vec<Float> = dp.iter().map(|c| Float::with_val(prec, c / &dlead)).collect();
    let crit = roots_monic(&dmonic, tol, ctx)?;

    // Cauchy bound
    let mut bound = Float::with_val(prec, 0);
    for c in &p[1..] {
        let a = Float::with_val(prec, c.abs_ref());
        if a > bound {
            bound = a;
        }
    }
    bound += 1u32;
    let mut points = vec![Float::with_val(prec, -&bound)];
    points.extend(crit.iter().cloned());
    points.push(bound);

    let f = |x: &Float| eval_poly(p, x);
    let mut roots: Vec<Float> = Vec::new();
    let values: Vec<Float> = points.iter().map(f).collect();
    let is_zero = |v: &Float| Float::with_val(prec, v.abs_ref()) <= *tol;
    for (x, v) in points.iter().zip(&values).skip(1).take(crit.len()) {
        if is_zero(v) {
            roots.push(x.clone());
        }
    }
    for i in 0..points.len() - 1 {
        let (vl, vr) = (&values[i], &values[i + 1]);
        if is_zero(vl) || is_zero(vr) {
            continue;
        }
        let sl = vl.cmp0() == Some(Ordering::Less);
        let sr = vr.cmp0() == Some(Ordering::Less);
        if sl != sr && points[i] < points[i + 1] {
            let br = Bracket {
                lo: points[i].clone(),
                hi: points[i + 1].clone(),
                f_lo_sign: if sl { -1 } else { 1 },
                f_hi_sign: if sr { -1 } else { 1 },
            };
            let mut inner = ctx.clone();
            inner.abs_tol = f64::MIN_POSITIVE;
            roots.push(bracketed_root(f, &br, &inner)?);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sep = Float::with_val(prec, tol.clone().sqrt());
    roots.dedup_by(|a, b| Float::with_val(prec, &*a - &*b).abs() <= sep);
    Ok(roots)
}
