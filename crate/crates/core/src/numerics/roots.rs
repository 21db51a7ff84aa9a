use std::cmp::Ordering;

use rug::Float;

use super::PrecisionContext;
use crate::error::{Error, Result};

/// An interval with a certified sign change of the target function.
#[derive(Clone, Debug)]
pub struct Bracket {
    pub lo: Float,
    pub hi: Float,
    pub f_lo_sign: i8,
    pub f_hi_sign: i8,
}

fn sign(v: &Float) -> i8 {
    // an exact zero counts as positive so that a zero at a grid point still
    // registers as a crossing
    match v.cmp0() {
        Some(Ordering::Less) => -1,
        _ => 1,
    }
}

impl Bracket {
    /// Evaluates `f` at both ends and fails unless the signs differ.
    pub fn new<F: Fn(&Float) -> Float>(f: &F, lo: Float, hi: Float) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Domain(format!(
                "bracket needs lo < hi, got [{}, {}]",
                lo.to_f64(),
                hi.to_f64()
            )));
        }
        let fl = f(&lo);
        let fh = f(&hi);
        if fl.is_nan() || fh.is_nan() {
            return Err(Error::Domain("function is NaN at a bracket end".into()));
        }
        let (sl, sh) = (sign(&fl), sign(&fh));
        if sl == sh {
            return Err(Error::NoSignChange {
                lo: lo.to_string_radix(10, Some(20)),
                hi: hi.to_string_radix(10, Some(20)),
            });
        }
        Ok(Self {
            lo,
            hi,
            f_lo_sign: sl,
            f_hi_sign: sh,
        })
    }

    pub fn contains(&self, x: &Float) -> bool {
        *x >= self.lo && *x <= self.hi
    }
}

/// Illinois false position, with a bisection step every fourth iteration.
///
/// The iterate never leaves the bracket.
pub fn bracketed_root<F: Fn(&Float) -> Float>(
    f: F,
    bracket: &Bracket,
    ctx: &PrecisionContext,
) -> Result<Float> {
    let prec = ctx.prec();
    let abs_tol = ctx.abs_tol_float();
    let rel_tol = ctx.rel_tol_float();
    let mut a = Float::with_val(prec, &bracket.lo);
    let mut b = Float::with_val(prec, &bracket.hi);
    let mut fa = f(&a);
    let mut fb = f(&b);
    if sign(&fa) == sign(&fb) {
        return Err(Error::NoSignChange {
            lo: a.to_string_radix(10, Some(20)),
            hi: b.to_string_radix(10, Some(20)),
        });
    }
    if fa.is_zero() {
        return Ok(a);
    }
    if fb.is_zero() {
        return Ok(b);
    }
    let mut side = 0i8;
    for iter in 0..ctx.max_iters {
        let width = Float::with_val(prec, &b - &a);
        let scale = Float::with_val(prec, a.abs_ref()).max(&Float::with_val(prec, b.abs_ref()));
        let tiny = Float::with_val(prec, Float::with_val(prec, 1) >> (prec as i32 - 4));
        if width <= Float::with_val(prec, &rel_tol * &scale) || width <= tiny * &scale {
            return Ok(if Float::with_val(prec, fa.abs_ref()) < Float::with_val(prec, fb.abs_ref()) {
                a
            } else {
                b
            });
        }
        let mid = Float::with_val(prec, &a + &b) / 2u32;
        let c = if iter % 4 == 3 {
            mid
        } else {
            let num = Float::with_val(prec, &a * &fb) - Float::with_val(prec, &b * &fa);
            let den = Float::with_val(prec, &fb - &fa);
            let c = num / den;
            if c.is_nan() || c <= a || c >= b {
                mid
            } else {
                c
            }
        };
        let fc = f(&c);
        if fc.is_nan() {
            return Err(Error::Domain(format!("function is NaN at {}", c.to_f64())));
        }
        if Float::with_val(prec, fc.abs_ref()) <= abs_tol {
            return Ok(c);
        }
        if sign(&fc) == sign(&fa) {
            a = c;
            fa = fc;
            if side == -1 {
                fb /= 2u32;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa /= 2u32;
            }
            side = 1;
        }
    }
    Err(Error::MaxIters(ctx.max_iters))
}

/// All sign changes of `f` on a uniform grid of `n` intervals over `[lo, hi]`.
pub fn sign_changes<F: Fn(&Float) -> Float>(
    f: &F,
    lo: &Float,
    hi: &Float,
    n: usize,
) -> Vec<Bracket> {
    let prec = lo.prec().max(hi.prec());
    let n = n.max(1);
    let step = Float::with_val(prec, hi - lo) / n as u64;
    let mut out = Vec::new();
    let mut prev_x = Float::with_val(prec, lo);
    let mut prev_v = f(&prev_x);
    for i in 1..=n {
        let x = if i == n {
            Float::with_val(prec, hi)
        } else {
            Float::with_val(prec, &step * i as u64) + lo
        };
        let v = f(&x);
        if !prev_v.is_nan() && !v.is_nan() && sign(&prev_v) != sign(&v) {
            out.push(Bracket {
                lo: prev_x.clone(),
                hi: x.clone(),
                f_lo_sign: sign(&prev_v),
                f_hi_sign: sign(&v),
            });
        }
        prev_x = x;
        prev_v = v;
    }
    out
}

/// Finds the root of `f` on `[lo, hi]` after checking that a scan of
/// `ctx.scan_points` cells shows exactly one sign change.
pub fn certify_unique_root<F: Fn(&Float) -> Float>(
    f: F,
    lo: &Float,
    hi: &Float,
    ctx: &PrecisionContext,
) -> Result<Float> {
    let changes = sign_changes(&f, lo, hi, ctx.scan_points);
    match changes.len() {
        0 => Err(Error::NoSignChange {
            lo: lo.to_string_radix(10, Some(20)),
            hi: hi.to_string_radix(10, Some(20)),
        }),
        1 => bracketed_root(f, &changes[0], ctx),
        n => Err(Error::NoRoot(format!(
            "expected a unique root but the scan found {n} sign changes"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::extended()
    }

    #[test]
    fn sqrt_two() {
        let c = ctx();
        let f = |x: &Float| Float::with_val(256, x * x) - 2u32;
        let br = Bracket::new(&f, c.float(1), c.float(2)).unwrap();
        let r = bracketed_root(f, &br, &c).unwrap();
        let err = Float::with_val(256, &r - c.float(2).sqrt()).abs();
        assert!(err < 1e-38, "{}", err.to_f64());
    }

    #[test]
    fn same_sign_rejected() {
        let c = ctx();
        let f = |x: &Float| Float::with_val(256, x * x) + 1u32;
        assert!(matches!(
            Bracket::new(&f, c.float(1), c.float(2)),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn steep_function_converges() {
        let c = ctx();
        // x^500 - 2 on [1, 2]: false position alone would crawl
        let f = |x: &Float| Float::with_val(256, rug::ops::Pow::pow(x, 500u32)) - 2u32;
        let br = Bracket::new(&f, c.float(1), c.float(2)).unwrap();
        let r = bracketed_root(f, &br, &c).unwrap();
        let expect = (2f64.ln() / 500.0).exp();
        assert!((r.to_f64() - expect).abs() < 1e-15);
    }

    #[test]
    fn scan_counts_changes() {
        let f = |x: &Float| Float::with_val(256, x.sin_ref());
        let lo = Float::with_val(256, 0.5);
        let hi = Float::with_val(256, 10);
        assert_eq!(sign_changes(&f, &lo, &hi, 1000).len(), 3);
        assert!(certify_unique_root(f, &lo, &hi, &ctx()).is_err());
    }
}
