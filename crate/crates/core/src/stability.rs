//! Jacobian stability of fixpoints through the normalised interaction matrix.
//!
//! With `alpha_i = sum_j B_ij R_i C_j`, `beta_j = sum_i B_ij R_i C_j` and
//! `a_ij = B_ij R_i C_j / sqrt(alpha_i beta_j)`, the block matrix
//! `L = [[0, A], [A^T, 0]]` has spectrum `± singular values of A`. A fixpoint
//! is stable when the second largest eigenvalue of `L` is below `1/d`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{real_polynomial_roots, singular_values, to_decimal, PrecisionContext};
use crate::spin::{InteractionMatrix, ModelParams};
use crate::tree::{FixpointRC, TypeTriple};

/// Width of the band around `1/d` in which a verdict is withheld.
pub const MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        }
    }
}

/// `A` and `L` for full `(q+1)`-vectors.
pub fn build_a_l(
    r: &[Float],
    c: &[Float],
    b: &InteractionMatrix,
) -> Result<(Vec<Vec<Float>>, Vec<Vec<Float>>)> {
    let n = b.size();
    if r.len() != n || c.len() != n {
        return Err(Error::InvalidParams(format!(
            "vectors must have {n} entries"
        )));
    }
    let prec = r[0].prec();
    let w = |i: usize, j: usize| Float::with_val(prec, b.entry(i, j) * &r[i]) * &c[j];
    let alpha: Vec<Float> = (0..n)
        .map(|i| (0..n).fold(Float::with_val(prec, 0), |acc, j| acc + w(i, j)))
        .collect();
    let beta: Vec<Float> = (0..n)
        .map(|j| (0..n).fold(Float::with_val(prec, 0), |acc, i| acc + w(i, j)))
        .collect();
    for (i, v) in alpha.iter().chain(&beta).enumerate() {
        if v.cmp0() != Some(std::cmp::Ordering::Greater) {
            return Err(Error::ZeroMarginal(i % n));
        }
    }
    let a: Vec<Vec<Float>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| w(i, j) / Float::with_val(prec, &alpha[i] * &beta[j]).sqrt())
                .collect()
        })
        .collect();
    let mut l = vec![vec![Float::with_val(prec, 0); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            l[i][n + j] = a[i][j].clone();
            l[n + j][i] = a[i][j].clone();
        }
    }
    Ok((a, l))
}

/// `±` each singular value of `A`, sorted ascending.
pub fn spectrum_from_a(a: &[Vec<Float>]) -> Vec<Float> {
    let sv = singular_values(a);
    let mut out: Vec<Float> = sv.iter().flat_map(|s| [s.clone(), Float::with_val(s.prec(), -s)]).collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

fn pm(values: &[Float]) -> Vec<Float> {
    let mut out: Vec<Float> = values
        .iter()
        .flat_map(|v| {
            let a = Float::with_val(v.prec(), v.abs_ref());
            [a.clone(), -a]
        })
        .collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Parameters `a, b, c` of the half-half block matrix.
pub fn half_half_abc(x: &Float, q: u32, d: u32) -> (Float, Float, Float) {
    let prec = x.prec();
    let pw = |n: u32| (Float::with_val(prec, x.ln_ref()) * n).exp();
    let xd_m1 = pw(d) - 1u32;
    let e = Float::with_val(prec, x - 1u32);
    let a = (pw(d - 1) * &e / &xd_m1).sqrt();
    let b = (Float::with_val(prec, &e / &xd_m1)).sqrt();
    let qh = Float::with_val(prec, q) / 2u32;
    let xd1_m1 = pw(d + 1) - 1u32;
    let num = Float::with_val(prec, &xd1_m1 - qh * &e * (pw(d) + 1u32));
    let c = (num / xd1_m1).sqrt();
    (a, b, c)
}

/// The half-half cubic `z^3 - (q'a^2 + q'b^2 + c^2) z^2 + (2q'-1) a^2 b^2 z + a^2 b^2 c^2`.
pub fn half_half_cubic(x: &Float, q: u32, d: u32) -> [Float; 4] {
    let prec = x.prec();
    let (a, b, c) = half_half_abc(x, q, d);
    let qh = Float::with_val(prec, q) / 2u32;
    let (a2, b2, c2) = (a.square(), b.square(), c.square());
    let ab2 = Float::with_val(prec, &a2 * &b2);
    [
        Float::with_val(prec, 1),
        -(Float::with_val(prec, &a2 + &b2) * &qh + &c2),
        Float::with_val(prec, Float::with_val(prec, &qh * 2u32) - 1u32) * &ab2,
        ab2 * c2,
    ]
}

/// Closed-form spectrum of `L` at a half-half fixpoint with root `x` of `h`.
pub fn spectrum_half_half(x: &Float, q: u32, d: u32) -> Result<Vec<Float>> {
    let prec = x.prec();
    let (a, b, _) = half_half_abc(x, q, d);
    let ab = Float::with_val(prec, &a * &b);
    let cubic = half_half_cubic(x, q, d);
    let ctx = PrecisionContext::with_bits(prec);
    let roots = real_polynomial_roots(&cubic, &ctx)?;
    if roots.len() != 3 {
        return Err(Error::NoRoot(format!(
            "half-half cubic has {} real roots",
            roots.len()
        )));
    }
    let mut vals = vec![ab; (q - 2) as usize];
    vals.extend(roots);
    Ok(pm(&vals))
}

/// Parameters `a, b, r, s` of the asymmetric `(q,0,0)` block matrix.
pub fn q00_asym_abrs(x: &Float, y: &Float, q: u32, t: &Float) -> (Float, Float, Float, Float) {
    let prec = x.prec();
    let tx = Float::with_val(prec, x * t);
    let ty = Float::with_val(prec, y * t);
    let a = Float::with_val(prec, &tx + (q - 1)).recip().sqrt();
    let b = Float::with_val(prec, &ty + (q - 1)).recip().sqrt();
    let r = (Float::with_val(prec, &ty) / Float::with_val(prec, &tx + q)).sqrt();
    let s = (Float::with_val(prec, &tx) / Float::with_val(prec, &ty + q)).sqrt();
    (a, b, r, s)
}

/// Closed-form spectrum at the asymmetric `(q,0,0)` fixpoint: `±ab` with multiplicity
/// `q-1` and the four roots of the biquadratic.
pub fn spectrum_q00_asym(x: &Float, y: &Float, q: u32, t: &Float) -> Vec<Float> {
    let prec = x.prec();
    let (a, b, r, s) = q00_asym_abrs(x, y, q, t);
    let (a2, b2, r2, s2) = (
        Float::with_val(prec, a.square_ref()),
        Float::with_val(prec, b.square_ref()),
        Float::with_val(prec, r.square_ref()),
        Float::with_val(prec, s.square_ref()),
    );
    let qm1 = Float::with_val(prec, q - 1);
    let k = Float::with_val(prec, qm1.square_ref()) * &a2 * &b2
        + Float::with_val(prec, &b2 * &r2) * q
        + Float::with_val(prec, &a2 * &s2) * q
        + Float::with_val(prec, &r2 * &s2);
    let p = a2.clone() * &b2 * &r2 * &s2;
    let disc = Float::with_val(prec, k.square_ref()) - Float::with_val(prec, &p * 4u32);
    let sq = disc.sqrt();
    let z1 = Float::with_val(prec, &k + &sq) / 2u32;
    let z2 = Float::with_val(prec, &k - &sq) / 2u32;
    let ab = Float::with_val(prec, &a * &b);
    let mut vals = vec![ab; (q - 1) as usize];
    vals.push(z1.sqrt());
    vals.push(z2.sqrt());
    pm(&vals)
}

/// `abrs`, the nontrivial root of the biquadratic.
pub fn q00_asym_lambda2(x: &Float, y: &Float, q: u32, t: &Float) -> Float {
    let (a, b, r, s) = q00_asym_abrs(x, y, q, t);
    a * b * r * s
}

/// Closed-form spectrum at the symmetric `(q,0,0)` fixpoint: `-a` with multiplicity `q-1`,
/// `a = 1/(q - 1 + tx)`, and the two eigenvalues of the reduced 2x2 block.
pub fn spectrum_q00_sym(x: &Float, q: u32, t: &Float) -> Vec<Float> {
    let prec = x.prec();
    let tx = Float::with_val(prec, x * t);
    let a = Float::with_val(prec, &tx + (q - 1)).recip();
    let b = Float::with_val(prec, &tx / Float::with_val(prec, &tx + q));
    // [[b, sqrt(q a b)], [sqrt(q a b), (q-1) a]]
    let d22 = Float::with_val(prec, &a * (q - 1));
    let tr = Float::with_val(prec, &b + &d22);
    let det = Float::with_val(prec, &b * &d22) - Float::with_val(prec, &a * &b) * q;
    let disc = (Float::with_val(prec, tr.square_ref()) - Float::with_val(prec, &det * 4u32)).sqrt();
    let l1 = Float::with_val(prec, &tr + &disc) / 2u32;
    let l2 = Float::with_val(prec, &tr - &disc) / 2u32;
    let mut vals = vec![a; (q - 1) as usize];
    vals.push(l1);
    vals.push(l2);
    pm(&vals)
}

/// `(x^d - 1)/(x - 1) > d x^((d-1)/2)`, which gives `ab < 1/d` at half-half points.
pub fn am_gm_holds(x: &Float, d: u32) -> bool {
    let prec = x.prec();
    let e = Float::with_val(prec, x - 1u32);
    let lhs = crate::numerics::ln_geometric_sum(&e, d);
    let rhs = Float::with_val(prec, d).ln() + Float::with_val(prec, x.ln_ref()) * (d - 1) / 2u32;
    lhs > rhs
}

/// The outcome of [`classify`].
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub label: String,
    pub eigenvalues: Vec<Float>,
    pub second_largest: Float,
    pub threshold: Float,
    pub verdict: Verdict,
    pub closed_form_used: &'static str,
    pub closed_form: Option<Vec<Float>>,
    pub crosscheck_delta: Option<Float>,
    /// Distance from `±1` to the nearest eigenvalue.
    pub unit_pair_distance: Float,
    pub precision_bits: u32,
}

impl StabilityReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "type": self.label,
            "eigenvalues": self.eigenvalues.iter().map(to_decimal).collect::<Vec<_>>(),
            "second_largest": to_decimal(&self.second_largest),
            "threshold": to_decimal(&self.threshold),
            "verdict": self.verdict.as_str(),
            "closed_form_used": self.closed_form_used,
            "closed_form": self.closed_form.as_ref().map(|v| v.iter().map(to_decimal).collect::<Vec<_>>()),
            "crosscheck_delta": self.crosscheck_delta.as_ref().map(to_decimal),
            "unit_pair_distance": to_decimal(&self.unit_pair_distance),
            "precision_bits": self.precision_bits,
        })
    }
}

/// Largest relative difference between two sorted spectra.
pub fn spectrum_delta(a: &[Float], b: &[Float]) -> Float {
    let prec = a.first().map(|x| x.prec()).unwrap_or(53);
    if a.len() != b.len() {
        return Float::with_val(prec, rug::float::Special::Infinity);
    }
    crate::numerics::max_rel_diff(a, b)
}

fn nearest(vals: &[Float], target: f64) -> Float {
    let prec = vals.first().map(|x| x.prec()).unwrap_or(53);
    vals.iter()
        .map(|v| Float::with_val(prec, v - target).abs())
        .fold(Float::with_val(prec, rug::float::Special::Infinity), |a, b| a.min(&b))
}

fn closed_form_for(fp: &FixpointRC, params: &ModelParams) -> Result<(&'static str, Option<Vec<Float>>)> {
    let prec = params.prec();
    let q = params.q();
    let d = params.d();
    let t = params.t();
    let qv = fp.qvec.canonical();
    let rel = |a: &Float, b: &Float| (Float::with_val(prec, a - b) / a).abs() < 1e-12;
    let root_d = |v: Float| (v.ln() / d).exp();
    if q % 2 == 0 && qv == TypeTriple::half_half(q) {
        let act = fp.qvec.active();
        let (i, j) = (act[0], act[1]);
        let ratio = Float::with_val(prec, &fp.r[i] / &fp.r[j]);
        let ratio = if ratio < 1 { ratio.recip() } else { ratio };
        let x = root_d(ratio);
        return Ok(("half_half", Some(spectrum_half_half(&x, q, d)?)));
    }
    if qv == TypeTriple::q00(q) {
        let i = fp.qvec.active()[0];
        let x = Float::with_val(prec, &fp.r[0] / &fp.r[i]);
        let y = Float::with_val(prec, &fp.c[0] / &fp.c[i]);
        if rel(&x, &y) {
            return Ok(("q00_sym", Some(spectrum_q00_sym(&x, q, t))));
        }
        let (x, y) = if x > y { (x, y) } else { (y, x) };
        return Ok(("q00_asym", Some(spectrum_q00_asym(&x, &y, q, t))));
    }
    Ok(("generic", None))
}

/// Generic verdict with a closed-form cross-check where one applies.
///
/// A second largest eigenvalue within [`MARGIN`] of `1/d` triggers one rerun at
/// twice the precision before the verdict is reported as marginal.
pub fn classify(fp: &FixpointRC, params: &ModelParams) -> Result<StabilityReport> {
    let report = classify_at(fp, params)?;
    if report.verdict != Verdict::Marginal {
        return Ok(report);
    }
    let hi = params.with_ctx(params.ctx().escalated());
    let lift = |v: &[Float; 4]| -> [Float; 4] { std::array::from_fn(|i| Float::with_val(hi.prec(), &v[i])) };
    let fp_hi = FixpointRC {
        r: lift(&fp.r),
        c: lift(&fp.c),
        residual: Float::with_val(hi.prec(), &fp.residual),
        ..fp.clone()
    };
    classify_at(&fp_hi, &hi)
}

fn classify_at(fp: &FixpointRC, params: &ModelParams) -> Result<StabilityReport> {
    let prec = params.prec();
    let (r, c) = fp.expand()?;
    let b = InteractionMatrix::new(params);
    let (a, _l) = build_a_l(&r, &c, &b)?;
    let sv = singular_values(&a);
    let eigenvalues = spectrum_from_a(&a);
    let second_largest = sv.get(1).cloned().unwrap_or_else(|| Float::with_val(prec, 0));
    let threshold = Float::with_val(prec, params.d()).recip();
    let gap = Float::with_val(prec, &threshold - &second_largest);
    let verdict = if gap > MARGIN {
        Verdict::Stable
    } else if gap < -MARGIN {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    };
    let (tag, closed) = closed_form_for(fp, params)?;
    let crosscheck_delta = closed.as_ref().map(|cf| spectrum_delta(&eigenvalues, cf));
    let unit = nearest(&eigenvalues, 1.0).max(&nearest(&eigenvalues, -1.0));
    Ok(StabilityReport {
        label: fp.qvec.label(),
        eigenvalues,
        second_largest,
        threshold,
        verdict,
        closed_form_used: tag,
        closed_form: closed,
        crosscheck_delta,
        unit_pair_distance: unit,
        precision_bits: prec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{q00_fixpoint, solve_asymmetric_q00, solve_half_half, solve_symmetric_q00};

    fn params() -> ModelParams {
        ModelParams::from_d(4, 2, 80, PrecisionContext::extended()).unwrap()
    }

    #[test]
    fn three_families() {
        let p = params();
        let hh = classify(&solve_half_half(&p).unwrap(), &p).unwrap();
        assert_eq!(hh.verdict, Verdict::Stable);
        let dh = hh.crosscheck_delta.clone().unwrap();
        assert!(dh < 1e-30, "{}", dh.to_f64());
        let a = solve_asymmetric_q00(&p).unwrap();
        let rep = classify(&q00_fixpoint(&a.x, &a.y, &p, "t").unwrap(), &p).unwrap();
        assert_eq!(rep.verdict, Verdict::Stable);
        assert!(rep.crosscheck_delta.unwrap() < 1e-30);
        let s = solve_symmetric_q00(&p).unwrap();
        let rep = classify(&q00_fixpoint(&s.x, &s.x, &p, "t").unwrap(), &p).unwrap();
        assert_eq!(rep.verdict, Verdict::Unstable);
        assert!(rep.crosscheck_delta.unwrap() < 1e-30);
        assert!(rep.unit_pair_distance < 1e-30);
    }

    #[test]
    fn cubic_has_unit_root() {
        let p = params();
        let x = crate::scalar::root_h(&p).unwrap();
        let cubic = half_half_cubic(&x, 4, 80);
        let v = crate::numerics::eval_poly(&cubic, &p.float(1));
        assert!(v.abs() < 1e-40);
    }
}
