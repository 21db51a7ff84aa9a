//! Extended-precision real arithmetic shared by the analytical modules.
//!
//! Everything of the form `x^d` or `t^(d+1)` is evaluated through logarithms
//! and only exponentiated inside [`pow1p`] or [`geometric_sum`], so that
//! degrees in the thousands neither overflow nor cancel.

mod linalg;
mod poly;
mod roots;

pub use linalg::{singular_values, solve_linear, symmetric_eigenvalues};
pub use poly::{eval_poly, real_polynomial_roots};
pub use roots::{bracketed_root, certify_unique_root, sign_changes, Bracket};

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision and solver tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub mantissa_bits: u32,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Grid size used when certifying that a bracketed root is the only one.
    pub scan_points: usize,
}

impl PrecisionContext {
    pub fn new(mantissa_bits: u32, abs_tol: f64, rel_tol: f64, max_iters: usize) -> Result<Self> {
        if mantissa_bits < 53 {
            return Err(Error::InvalidParams(format!(
                "mantissa_bits must be at least 53, got {mantissa_bits}"
            )));
        }
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        if max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be at least 1".into()));
        }
        Ok(Self {
            mantissa_bits,
            abs_tol,
            rel_tol,
            max_iters,
            scan_points: 2048,
        })
    }

    /// The default 256-bit context used by all scalar analyses.
    pub fn extended() -> Self {
        Self::with_bits(256)
    }

    /// Plain double precision, for the integer-exact oracle modules.
    pub fn double() -> Self {
        Self::new(53, 1e-13, 4.0 * f64::EPSILON, 400).unwrap()
    }

    /// A context whose tolerances scale with the mantissa width.
    pub fn with_bits(bits: u32) -> Self {
        let bits = bits.max(53);
        let digits = f64::from(bits) * std::f64::consts::LOG10_2;
        let abs_tol = 10f64.powf(-(digits * 0.52).max(12.0));
        let rel_tol = 10f64.powf(-(digits * 0.8).max(15.0));
        Self::new(bits, abs_tol, rel_tol, 8 * bits as usize + 200).unwrap()
    }

    /// Same tolerances scaled to twice the mantissa bits.
    pub fn escalated(&self) -> Self {
        let mut next = Self::with_bits(self.mantissa_bits * 2);
        next.scan_points = self.scan_points;
        next
    }

    pub fn prec(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn float<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.mantissa_bits, value)
    }

    pub fn abs_tol_float(&self) -> Float {
        self.float(self.abs_tol)
    }

    pub fn rel_tol_float(&self) -> Float {
        self.float(self.rel_tol)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::extended()
    }
}

/// `(1 + a)^b`, computed as `exp(b * log1p(a))`.
pub fn pow1p(a: &Float, b: &Float) -> Result<Float> {
    let prec = a.prec().max(b.prec());
    let one_plus = Float::with_val(prec, a + 1u32);
    if one_plus.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain(format!(
            "pow1p needs 1 + a > 0, got a = {}",
            a.to_f64()
        )));
    }
    let mut e = Float::with_val(prec, a.ln_1p_ref());
    e *= b;
    Ok(e.exp())
}

/// Double-precision `(1 + a)^b`.
pub fn pow1p_f64(a: f64, b: f64) -> Result<f64> {
    if !(a > -1.0) {
        return Err(Error::Domain(format!("pow1p needs 1 + a > 0, got a = {a}")));
    }
    Ok((b * a.ln_1p()).exp())
}

/// `((1 + eps)^n - 1) / eps`, the geometric sum `1 + x + ... + x^(n-1)` at `x = 1 + eps`.
///
/// Stable for `eps -> 0`, where it tends to `n`.
pub fn geometric_sum(eps: &Float, n: u32) -> Float {
    let prec = eps.prec();
    if eps.is_zero() {
        return Float::with_val(prec, n);
    }
    let mut e = Float::with_val(prec, eps.ln_1p_ref());
    e *= n;
    let num = e.exp_m1();
    num / eps
}

/// `ln` of [`geometric_sum`].
pub fn ln_geometric_sum(eps: &Float, n: u32) -> Float {
    geometric_sum(eps, n).ln()
}

/// `x^n - 1` for `x = 1 + eps`, without cancellation.
pub fn pow_minus_one(eps: &Float, n: u32) -> Float {
    let mut e = Float::with_val(eps.prec(), eps.ln_1p_ref());
    e *= n;
    e.exp_m1()
}

/// Checks `exp(a) > (1 + a/b)^b > exp(ab/(a+b))` for positive `a`, `b`.
pub fn check_exp_sandwich(a: &Float, b: &Float) -> bool {
    if a.cmp0() != Some(std::cmp::Ordering::Greater) || b.cmp0() != Some(std::cmp::Ordering::Greater)
    {
        return false;
    }
    let prec = a.prec().max(b.prec());
    let ratio = Float::with_val(prec, a / b);
    let middle_ln = {
        let mut l = Float::with_val(prec, ratio.ln_1p_ref());
        l *= b;
        l
    };
    let lower_ln = Float::with_val(prec, a * b) / Float::with_val(prec, a + b);
    // compare in the log domain; exp is monotone
    *a > middle_ln && middle_ln > lower_ln
}

/// `ln(sum(exp(v)))` without overflow.
pub fn log_sum_exp(values: &[Float]) -> Float {
    let prec = values.iter().map(|v| v.prec()).max().unwrap_or(53);
    let Some(max) = values.iter().max_by(|a, b| a.partial_cmp(b).unwrap()) else {
        return Float::with_val(prec, rug::float::Special::NegInfinity);
    };
    let max = max.clone();
    let mut acc = Float::with_val(prec, 0);
    for v in values {
        acc += Float::with_val(prec, v - &max).exp();
    }
    acc.ln() + max
}

/// Decimal rendering carrying the full precision of `x`.
pub fn to_decimal(x: &Float) -> String {
    let digits = (f64::from(x.prec()) * std::f64::consts::LOG10_2).ceil() as usize + 1;
    x.to_string_radix(10, Some(digits))
}

/// Parses a decimal string at the requested precision.
pub fn parse_decimal(s: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(s).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Largest relative deviation `|a - b| / max(|a|, |b|)` over two equal-length lists.
pub fn max_rel_diff(a: &[Float], b: &[Float]) -> Float {
    let prec = a.first().map(|x| x.prec()).unwrap_or(53);
    let mut worst = Float::with_val(prec, 0);
    for (x, y) in a.iter().zip(b) {
        let diff = Float::with_val(prec, x - y).abs();
        let scale = Float::with_val(prec, x.abs_ref()).max(&Float::with_val(prec, y.abs_ref()));
        if scale.is_zero() {
            continue;
        }
        let rel = diff / scale;
        if rel > worst {
            worst = rel;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(x: f64) -> Float {
        Float::with_val(256, x)
    }

    #[test]
    fn pow1p_identity_cases() {
        assert_eq!(pow1p(&f(0.0), &f(1e6)).unwrap(), 1);
        let four = pow1p(&f(1.0), &f(2.0)).unwrap();
        assert!((four - 4u32).abs() < 1e-70);
    }

    #[test]
    fn pow1p_between_exp_bounds() {
        let a = Float::with_val(256, 1) / 80u32;
        let v = pow1p(&a, &f(80.0)).unwrap().to_f64();
        assert!(v > (80.0f64 / 81.0).exp() && v < std::f64::consts::E, "{v}");
        assert!(v > 2.6853 && v < 2.7183);
    }

    #[test]
    fn pow1p_rejects_domain() {
        assert!(matches!(pow1p(&f(-1.0), &f(2.0)), Err(Error::Domain(_))));
        assert!(pow1p_f64(-1.5, 1.0).is_err());
    }

    #[test]
    fn exp_sandwich_examples() {
        assert!(check_exp_sandwich(&f(5.0), &f(80.0)));
        assert!(check_exp_sandwich(&f(1.0), &f(1.0)));
        assert!(check_exp_sandwich(&f(2.5), &f(1080.0)));
        assert!(!check_exp_sandwich(&f(0.0), &f(1.0)));
    }

    #[test]
    fn geometric_sum_limits() {
        let tiny = Float::with_val(256, 1e-50);
        let g = geometric_sum(&tiny, 80).to_f64();
        assert!((g - 80.0).abs() < 1e-9);
        // (1.5^3 - 1)/0.5 = 4.75
        let g = geometric_sum(&f(0.5), 3);
        assert!((g - 4.75f64).abs() < 1e-70);
    }

    #[test]
    fn log_sum_exp_large_values() {
        let v = [f(1000.0), f(1000.0)];
        let r = log_sum_exp(&v).to_f64();
        assert!((r - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn decimal_round_trip() {
        let x = Float::with_val(256, 2).sqrt();
        let s = to_decimal(&x);
        let y = parse_decimal(&s, 256).unwrap();
        assert!(Float::with_val(256, &x - &y).abs() < 1e-75);
    }

    #[test]
    fn context_validation() {
        assert!(PrecisionContext::new(52, 1e-10, 1e-10, 10).is_err());
        assert!(PrecisionContext::new(64, 0.0, 1e-10, 10).is_err());
        assert!(PrecisionContext::new(64, 1e-10, 1e-10, 0).is_err());
        let ctx = PrecisionContext::extended();
        assert_eq!(ctx.mantissa_bits, 256);
        assert!(ctx.abs_tol < 1e-30);
        assert_eq!(ctx.escalated().mantissa_bits, 512);
    }
}
