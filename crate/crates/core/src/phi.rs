//! The matrix-norm objective, its reduced three-class form and the dominant-phase search.
//!
//! Comparisons between fixpoints never evaluate the free energy directly; they
//! run through the reduced objective, which agrees with it at critical points.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, to_decimal};
use crate::spin::{InteractionMatrix, ModelParams};
use crate::stability::{classify, Verdict};
use crate::tree::{
    conv_tol, q00_fixpoint, reduced_residual, solve_asymmetric_q00, solve_general_type, solve_half_half,
    solve_symmetric_q00, FixpointRC, Init, TypeTriple,
};

/// Relative tolerance under which two classes are treated as merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Required lead of the winner over the runner-up.
pub const DOMINANCE_MARGIN: f64 = 1e-6;

fn ln_p_norm_pow(v: &[Float], weights: &[Float], p: &Float) -> Result<Float> {
    let prec = p.prec();
    if v.iter().any(|x| x.is_sign_negative() && !x.is_zero()) {
        return Err(Error::Domain("negative entry".into()));
    }
    // Weights may be slightly negative under finite differences, so the sum is
    // scaled by its largest term instead of going through log-sum-exp.
    let logs: Vec<Option<Float>> = v
        .iter()
        .map(|x| (!x.is_zero()).then(|| Float::with_val(prec, x.ln_ref()) * p))
        .collect();
    let Some(top) = logs.iter().flatten().max_by(|a, b| a.partial_cmp(b).unwrap()).cloned() else {
        return Err(Error::ZeroInteraction);
    };
    let mut acc = Float::with_val(prec, 0);
    for (l, w) in logs.iter().zip(weights) {
        if let Some(l) = l {
            acc += Float::with_val(prec, l - &top).exp() * w;
        }
    }
    if acc.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InfeasiblePoint);
    }
    Ok(acc.ln() + top)
}

/// `Delta ln(R^T B C / (|R|_p |C|_p))` with `p = Delta/(Delta - 1)`.
pub fn phi_norm(r: &[Float], c: &[Float], params: &ModelParams) -> Result<Float> {
    phi_norm_with(r, c, &InteractionMatrix::new(params), params.delta())
}

/// [`phi_norm`] for an arbitrary interaction matrix.
pub fn phi_norm_with(r: &[Float], c: &[Float], b: &InteractionMatrix, delta: u32) -> Result<Float> {
    let n = b.size();
    if r.len() != n || c.len() != n {
        return Err(Error::InvalidParams(format!("vectors must have {n} entries")));
    }
    if delta < 2 {
        return Err(Error::InvalidParams("Delta must be at least 2".into()));
    }
    let prec = r[0].prec();
    let mut s = Float::with_val(prec, 0);
    for i in 0..n {
        for j in 0..n {
            s += Float::with_val(prec, b.entry(i, j) * &r[i]) * &c[j];
        }
    }
    if s.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::ZeroInteraction);
    }
    let p = Float::with_val(prec, delta) / (delta - 1);
    let ones = vec![Float::with_val(prec, 1); n];
    let lr = ln_p_norm_pow(r, &ones, &p)?;
    let lc = ln_p_norm_pow(c, &ones, &p)?;
    Ok(s.ln() * delta - (lr + lc) * (delta - 1))
}

fn q_floats(qvec: &TypeTriple, prec: u32) -> [Float; 3] {
    std::array::from_fn(|i| Float::with_val(prec, qvec.q[i]))
}

/// The interaction sum `S` of the reduced objective; must be positive.
pub fn interaction_sum(q: &[Float; 3], r: &[Float; 4], c: &[Float; 4], t: &Float) -> Float {
    let prec = t.prec();
    let (sr, sc, src) = weighted_sums(q, r, c);
    let r0c0 = Float::with_val(prec, &r[0] * &c[0]);
    Float::with_val(prec, &r0c0 * t) * t
        + Float::with_val(prec, &sr * &c[0]) * t
        + Float::with_val(prec, &sc * &r[0]) * t
        + Float::with_val(prec, &sr * &sc)
        - src
}

fn weighted_sums(q: &[Float; 3], r: &[Float; 4], c: &[Float; 4]) -> (Float, Float, Float) {
    let prec = r[0].prec();
    let mut sr = Float::with_val(prec, 0);
    let mut sc = Float::with_val(prec, 0);
    let mut src = Float::with_val(prec, 0);
    for i in 1..=3 {
        sr += Float::with_val(prec, &q[i - 1] * &r[i]);
        sc += Float::with_val(prec, &q[i - 1] * &c[i]);
        src += Float::with_val(prec, &q[i - 1] * &r[i]) * &c[i];
    }
    (sr, sc, src)
}

/// The reduced objective with real multiplicities, not necessarily summing to `q`.
///
/// The formula is analytic in the multiplicities, so small negative values are
/// accepted for finite differencing.
pub fn phi_s_bar_real(q: &[Float; 3], r: &[Float; 4], c: &[Float; 4], params: &ModelParams) -> Result<Float> {
    if r.iter().chain(c).any(|x| x.is_sign_negative() && !x.is_zero()) {
        return Err(Error::InfeasiblePoint);
    }
    let prec = params.prec();
    let d = params.d();
    let s = interaction_sum(q, r, c, params.t());
    if s.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InfeasiblePoint);
    }
    let p = Float::with_val(prec, d + 1) / d;
    let w: Vec<Float> = std::iter::once(Float::with_val(prec, 1)).chain(q.iter().cloned()).collect();
    let lr = ln_p_norm_pow(r, &w, &p)?;
    let lc = ln_p_norm_pow(c, &w, &p)?;
    Ok(s.ln() * (d + 1) - (lr + lc) * d)
}

/// The reduced objective of a type triple at `(R4, C4)`.
pub fn phi_s_bar(qvec: &TypeTriple, r: &[Float; 4], c: &[Float; 4], params: &ModelParams) -> Result<Float> {
    phi_s_bar_real(&q_floats(qvec, params.prec()), r, c, params)
}

/// Closed-form q-derivatives at a critical point.
pub fn dphi_dq(qvec: &TypeTriple, r: &[Float; 4], c: &[Float; 4], params: &ModelParams) -> Result<[Float; 3]> {
    let res = reduced_residual(qvec, r, c, params);
    if !(res <= conv_tol(params.prec())) {
        return Err(Error::NotCritical(res.to_string_radix(10, Some(6))));
    }
    let prec = params.prec();
    let t = params.t();
    let d = params.d();
    let q = q_floats(qvec, prec);
    let s = interaction_sum(&q, r, c, t);
    if s.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InfeasiblePoint);
    }
    let (sr, sc, _) = weighted_sums(&q, r, c);
    Ok(std::array::from_fn(|k| {
        let i = k + 1;
        let num = Float::with_val(prec, &r[i] * &c[0]) * t
            + Float::with_val(prec, &r[0] * &c[i]) * t
            + Float::with_val(prec, &r[i] * &c[i]) * (d - 1)
            + Float::with_val(prec, &r[i] * &sc)
            + Float::with_val(prec, &c[i] * &sr);
        num / &s
    }))
}

/// Partial q-derivatives at fixed `(R4, C4)`, valid away from critical points.
pub fn dphi_dq_general(
    qvec: &TypeTriple,
    r: &[Float; 4],
    c: &[Float; 4],
    params: &ModelParams,
) -> Result<[Float; 3]> {
    let prec = params.prec();
    let t = params.t();
    let d = params.d();
    let q = q_floats(qvec, prec);
    let s = interaction_sum(&q, r, c, t);
    if s.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InfeasiblePoint);
    }
    let p = Float::with_val(prec, d + 1) / d;
    let pw = |x: &Float| Float::with_val(prec, x.pow(&p));
    let mut spr = pw(&r[0]);
    let mut spc = pw(&c[0]);
    for i in 1..=3 {
        spr += pw(&r[i]) * &q[i - 1];
        spc += pw(&c[i]) * &q[i - 1];
    }
    let (sr, sc, _) = weighted_sums(&q, r, c);
    Ok(std::array::from_fn(|k| {
        let i = k + 1;
        let num = Float::with_val(prec, &r[i] * &c[0]) * t + Float::with_val(prec, &r[0] * &c[i]) * t
            - Float::with_val(prec, &r[i] * &c[i])
            + Float::with_val(prec, &r[i] * &sc)
            + Float::with_val(prec, &c[i] * &sr);
        num / &s * (d + 1) - (pw(&r[i]) / &spr + pw(&c[i]) / &spc) * d
    }))
}

/// Central differences of the reduced objective in each multiplicity.
pub fn dphi_dq_fd(
    qvec: &TypeTriple,
    r: &[Float; 4],
    c: &[Float; 4],
    params: &ModelParams,
    step: f64,
) -> Result<[Float; 3]> {
    let prec = params.prec();
    let base = q_floats(qvec, prec);
    let h = Float::with_val(prec, step);
    let mut out: [Float; 3] = std::array::from_fn(|_| Float::with_val(prec, 0));
    for k in 0..3 {
        let mut up = base.clone();
        let mut dn = base.clone();
        up[k] += &h;
        dn[k] -= &h;
        let f_up = phi_s_bar_real(&up, r, c, params)?;
        let f_dn = phi_s_bar_real(&dn, r, c, params)?;
        out[k] = (f_up - f_dn) / Float::with_val(prec, &h * 2u32);
    }
    Ok(out)
}

/// `g(r1, c3) = (r1 - c3)(r1^d - 1)(c3^d - 1) - d (r1 - 1)(c3 - 1)(r1^d - c3^d)`.
pub fn sign_law_g(r1: &Float, c3: &Float, d: u32) -> Float {
    let prec = r1.prec();
    let pd = |x: &Float| (Float::with_val(prec, x.ln_ref()) * d).exp();
    let (r1d, c3d) = (pd(r1), pd(c3));
    Float::with_val(prec, r1 - c3) * Float::with_val(prec, &r1d - 1u32) * Float::with_val(prec, &c3d - 1u32)
        - Float::with_val(prec, r1 - 1u32) * Float::with_val(prec, c3 - 1u32) * Float::with_val(prec, &r1d - &c3d) * d
}

/// `(g, -g / (S (r1 - 1)(c3 - 1)))` at a point with `r1^d = R1/R3` and `c3^d = C3/C1`,
/// where `S` is the interaction sum scaled to `R3 = C1 = 1`.
///
/// At a critical point the second entry equals `dq1 - dq3`; the positive factor
/// `1/((r1 - 1)(c3 - 1))` does not change its sign.
pub fn sign_law(qvec: &TypeTriple, r: &[Float; 4], c: &[Float; 4], params: &ModelParams) -> Result<(Float, Float)> {
    let prec = params.prec();
    let d = params.d();
    let rs: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, &r[i] / &r[3]));
    let cs: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, &c[i] / &c[1]));
    let s = interaction_sum(&q_floats(qvec, prec), &rs, &cs, params.t());
    if s.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InfeasiblePoint);
    }
    let root = |x: &Float| (Float::with_val(prec, x.ln_ref()) / d).exp();
    let r1 = root(&rs[1]);
    let c3 = root(&cs[3]);
    let g = sign_law_g(&r1, &c3, d);
    let scale = s * Float::with_val(prec, &r1 - 1u32) * Float::with_val(prec, &c3 - 1u32);
    let pred = Float::with_val(prec, -&g) / scale;
    Ok((g, pred))
}

/// Spin frequencies on the two sides.
#[derive(Clone, Debug)]
pub struct PhasePoint {
    pub alpha: Vec<Float>,
    pub beta: Vec<Float>,
}

impl PhasePoint {
    /// `alpha = beta` within `1e-12 |alpha|_1`.
    pub fn is_balanced(&self) -> bool {
        let prec = self.alpha[0].prec();
        let l1 = self.alpha.iter().fold(Float::with_val(prec, 0), |acc, x| acc + x.clone().abs());
        let tol = l1 * 1e-12;
        self.alpha
            .iter()
            .zip(&self.beta)
            .all(|(a, b)| Float::with_val(prec, a - b).abs() <= tol)
    }

    /// Whether `(beta, alpha)` is a colour relabelling of `(alpha, beta)` fixing spin 0.
    pub fn is_permutation_symmetric(&self) -> bool {
        let n = self.alpha.len();
        let close = |a: &Float, b: &Float| {
            let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(b.prec(), b.abs_ref()));
            Float::with_val(a.prec(), a - b).abs() <= scale * 1e-12
        };
        if !close(&self.alpha[0], &self.beta[0]) {
            return false;
        }
        let mut used = vec![false; n];
        for i in 1..n {
            let hit = (1..n).find(|&j| {
                !used[j] && close(&self.alpha[i], &self.beta[j]) && close(&self.beta[i], &self.alpha[j])
            });
            match hit {
                Some(j) => used[j] = true,
                None => return false,
            }
        }
        true
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha": self.alpha.iter().map(to_decimal).collect::<Vec<_>>(),
            "beta": self.beta.iter().map(to_decimal).collect::<Vec<_>>(),
        })
    }
}

/// `alpha_i = R_i^p / |R|_p^p` and likewise for `beta`.
pub fn to_phase(r: &[Float], c: &[Float], params: &ModelParams) -> PhasePoint {
    let prec = params.prec();
    let d = params.d();
    let p = Float::with_val(prec, d + 1) / d;
    let side = |v: &[Float]| -> Vec<Float> {
        let logs: Vec<Option<Float>> = v
            .iter()
            .map(|x| (!x.is_zero()).then(|| Float::with_val(prec, x.ln_ref()) * &p))
            .collect();
        let present: Vec<Float> = logs.iter().flatten().cloned().collect();
        let lse = log_sum_exp(&present);
        logs.into_iter()
            .map(|l| l.map_or(Float::with_val(prec, 0), |l| (l - &lse).exp()))
            .collect()
    };
    PhasePoint {
        alpha: side(r),
        beta: side(c),
    }
}

/// Multi-start settings for [`phi_bar`].
#[derive(Clone, Debug)]
pub struct SearchStrategy {
    pub n_random: usize,
    pub seed: u64,
    pub damping: f64,
}

impl Default for SearchStrategy {
    fn default() -> Self {
        Self {
            n_random: 4,
            seed: 0x5eed,
            damping: 0.5,
        }
    }
}

fn interior(fp: &FixpointRC) -> bool {
    let pos = |x: &Float| x.cmp0() == Some(std::cmp::Ordering::Greater);
    pos(&fp.r[0]) && pos(&fp.c[0]) && fp.qvec.active().iter().all(|&i| pos(&fp.r[i]) && pos(&fp.c[i]))
}

/// The best converged critical point of a type, by reduced objective.
///
/// Runs the multi-start solver; if nothing converges, retries with heavier
/// damping and twice as many random starts before giving up.
pub fn phi_bar(qvec: &TypeTriple, params: &ModelParams, strategy: &SearchStrategy) -> Result<(Float, FixpointRC)> {
    let attempt = |n_random: usize, damping: f64, seed: u64| -> Option<(Float, FixpointRC)> {
        Init::standard(qvec, params, n_random, seed)
            .par_iter()
            .filter_map(|init| solve_general_type(qvec, params, init, damping).ok())
            .filter(|fp| fp.converged && interior(fp))
            .filter_map(|fp| phi_s_bar(qvec, &fp.r, &fp.c, params).ok().map(|v| (v, fp)))
            .collect::<Vec<_>>()
            .into_iter()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    };
    attempt(strategy.n_random, strategy.damping, strategy.seed)
        .or_else(|| attempt(2 * strategy.n_random + 4, strategy.damping / 5.0, strategy.seed ^ 0x9e37))
        .ok_or_else(|| Error::NotConverged {
            residual: "no start converged".into(),
            iters: 0,
        })
}

/// The type obtained by merging active classes with coinciding values.
pub fn merged_type(fp: &FixpointRC) -> TypeTriple {
    let close = |a: &Float, b: &Float| {
        let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(b.prec(), b.abs_ref()));
        Float::with_val(a.prec(), a - b).abs() <= scale * MERGE_TOL
    };
    let mut q = fp.qvec.q;
    let act = fp.qvec.active();
    for (n, &i) in act.iter().enumerate() {
        for &j in &act[n + 1..] {
            if q[i - 1] > 0.0 && q[j - 1] > 0.0 && close(&fp.r[i], &fp.r[j]) && close(&fp.c[i], &fp.c[j]) {
                q[i - 1] += q[j - 1];
                q[j - 1] = 0.0;
            }
        }
    }
    TypeTriple { q }.canonical()
}

/// One ranked entry of a dominance search.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub family: String,
    pub qvec: TypeTriple,
    pub merged: Option<TypeTriple>,
    pub fixpoint: Option<FixpointRC>,
    pub value: Option<Float>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
}

impl Candidate {
    fn failed(family: &str, qvec: TypeTriple, err: Error) -> Self {
        Self {
            family: family.into(),
            qvec,
            merged: None,
            fixpoint: None,
            value: None,
            verdict: None,
            error: Some(err.to_string()),
        }
    }

    fn from_fixpoint(family: &str, fp: FixpointRC, params: &ModelParams) -> Self {
        let qvec = fp.qvec;
        let value = match phi_s_bar(&qvec, &fp.r, &fp.c, params) {
            Ok(v) => v,
            Err(e) => return Self::failed(family, qvec, e),
        };
        let verdict = if qvec.is_integer() {
            classify(&fp, params).ok().map(|r| r.verdict)
        } else {
            None
        };
        Self {
            family: family.into(),
            qvec,
            merged: Some(merged_type(&fp)),
            fixpoint: Some(fp),
            value: Some(value),
            verdict,
            error: None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "type": self.qvec.label(),
            "merged_type": self.merged.map(|m| m.label()),
            "phi_s_bar": self.value.as_ref().map(to_decimal),
            "verdict": self.verdict.map(|v| v.as_str()),
            "fixpoint": self.fixpoint.as_ref().map(|f| f.to_json()),
            "error": self.error,
        })
    }
}

/// Ranked candidates and the properties of the winning phase.
#[derive(Clone, Debug)]
pub struct DominanceReport {
    /// Evaluated candidates, by descending value; failures last.
    pub candidates: Vec<Candidate>,
    pub winner: Option<usize>,
    /// Lead of the winner over the best candidate of a different merged type.
    pub margin: Option<Float>,
    pub balanced: Option<bool>,
    pub permutation_symmetric: Option<bool>,
    /// Set for odd `q`, where the ranking is outside the proven regime.
    pub heuristic: bool,
    pub duplicates_dropped: usize,
}

impl DominanceReport {
    pub fn winner(&self) -> Option<&Candidate> {
        self.winner.map(|i| &self.candidates[i])
    }

    /// The best value among candidates of a given family.
    pub fn family_value(&self, family: &str) -> Option<&Float> {
        self.candidates
            .iter()
            .filter(|c| c.family == family)
            .find_map(|c| c.value.as_ref())
    }

    /// Winner leads every other distinct candidate by more than [`DOMINANCE_MARGIN`].
    pub fn winner_is_strict(&self) -> bool {
        self.margin.as_ref().map_or(false, |m| *m > DOMINANCE_MARGIN)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "candidates": self.candidates.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "winner": self.winner,
            "margin": self.margin.as_ref().map(to_decimal),
            "balanced": self.balanced,
            "permutation_symmetric": self.permutation_symmetric,
            "label": if self.heuristic { "heuristic, outside proven regime" } else { "proven regime" },
            "duplicates_dropped": self.duplicates_dropped,
        })
    }

    /// `type,merged_type,family,phi_s_bar,verdict` rows in ranking order.
    pub fn ranking_csv(&self) -> String {
        let mut out = String::from("type,merged_type,family,phi_s_bar,verdict\n");
        for c in &self.candidates {
            out.push_str(&format!(
                "\"{}\",\"{}\",{},{},{}\n",
                c.qvec.label(),
                c.merged.map(|m| m.label()).unwrap_or_default(),
                c.family,
                c.value.as_ref().map(|v| v.to_string_radix(10, Some(30))).unwrap_or_else(|| "NA".into()),
                c.verdict.map(|v| v.as_str()).unwrap_or("NA"),
            ));
        }
        out
    }
}

/// Lattice of types with step `q/16` plus all integer triples, up to permutation.
pub fn type_lattice(q: u32) -> Vec<TypeTriple> {
    let mut out: Vec<TypeTriple> = Vec::new();
    let mut push = |t: TypeTriple| {
        let t = t.canonical();
        if !out.contains(&t) {
            out.push(t);
        }
    };
    let step = f64::from(q) / 16.0;
    for a in 0..=16u32 {
        for b in 0..=16 - a {
            let c = 16 - a - b;
            push(TypeTriple {
                q: [f64::from(a) * step, f64::from(b) * step, f64::from(c) * step],
            });
        }
    }
    for a in 0..=q {
        for b in 0..=q - a {
            push(TypeTriple {
                q: [f64::from(a), f64::from(b), f64::from(q - a - b)],
            });
        }
    }
    out
}

/// Ranks the named families and the lattice candidates by reduced objective.
pub fn dominant_search(params: &ModelParams, strategy: &SearchStrategy) -> DominanceReport {
    let q = params.q();
    let mut named: Vec<Candidate> = Vec::new();
    if q % 2 == 0 {
        named.push(match solve_half_half(params) {
            Ok(fp) => Candidate::from_fixpoint("half_half", fp, params),
            Err(e) => Candidate::failed("half_half", TypeTriple::half_half(q), e),
        });
    }
    named.push(
        match solve_symmetric_q00(params).and_then(|s| q00_fixpoint(&s.x, &s.x, params, "symmetric (q,0,0)")) {
            Ok(fp) => Candidate::from_fixpoint("q00_sym", fp, params),
            Err(e) => Candidate::failed("q00_sym", TypeTriple::q00(q), e),
        },
    );
    named.push(
        match solve_asymmetric_q00(params).and_then(|a| q00_fixpoint(&a.x, &a.y, params, "asymmetric (q,0,0)")) {
            Ok(fp) => Candidate::from_fixpoint("q00_asym", fp, params),
            Err(e) => Candidate::failed("q00_asym", TypeTriple::q00(q), e),
        },
    );
    let lattice: Vec<Candidate> = type_lattice(q)
        .par_iter()
        .map(|t| match phi_bar(t, params, strategy) {
            Ok((_, fp)) => Candidate::from_fixpoint("lattice", fp, params),
            Err(e) => Candidate::failed("lattice", *t, e),
        })
        .collect();

    // Named families first, so a lattice copy of a named point is the one dropped.
    let mut kept: Vec<Candidate> = Vec::new();
    let mut failures = Vec::new();
    let mut duplicates_dropped = 0;
    for c in named.into_iter().chain(lattice) {
        let Some(v) = c.value.clone() else {
            failures.push(c);
            continue;
        };
        let dup = kept.iter().any(|k| {
            let kv = k.value.as_ref().unwrap();
            let same_value = Float::with_val(v.prec(), &v - kv).abs() <= Float::with_val(v.prec(), v.abs_ref()) * MERGE_TOL;
            same_value && k.merged == c.merged
        });
        if dup {
            duplicates_dropped += 1;
        } else {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| b.value.as_ref().unwrap().partial_cmp(a.value.as_ref().unwrap()).unwrap());
    let winner = (!kept.is_empty()).then_some(0);
    let margin = match kept.as_slice() {
        [first, second, ..] => Some(Float::with_val(
            params.prec(),
            first.value.as_ref().unwrap() - second.value.as_ref().unwrap(),
        )),
        _ => None,
    };
    let phase = kept.first().and_then(|c| {
        let fp = c.fixpoint.as_ref()?;
        let (r, cc) = fp.expand().ok()?;
        Some(to_phase(&r, &cc, params))
    });
    kept.extend(failures);
    DominanceReport {
        candidates: kept,
        winner,
        margin,
        balanced: phase.as_ref().map(|p| p.is_balanced()),
        permutation_symmetric: phase.as_ref().map(|p| p.is_permutation_symmetric()),
        heuristic: q % 2 == 1,
        duplicates_dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionContext;

    fn params() -> ModelParams {
        ModelParams::from_d(4, 2, 80, PrecisionContext::extended()).unwrap()
    }

    #[test]
    fn all_ones_norm() {
        let p = params();
        let ones = vec![p.float(1); 5];
        let v = phi_norm(&ones, &ones, &p).unwrap();
        let t = p.t();
        let s = Float::with_val(256, t * t) + Float::with_val(256, t * 8u32) + 12u32;
        let delta = p.delta();
        let expect = (s.ln() - p.float(5).ln() * 2u32 * (delta - 1) / delta) * delta;
        assert!(Float::with_val(256, &v - &expect).abs() < 1e-60);
    }

    #[test]
    fn half_half_derivatives_and_phase() {
        let p = params();
        let fp = solve_half_half(&p).unwrap();
        let dq = dphi_dq(&fp.qvec, &fp.r, &fp.c, &p).unwrap();
        assert!(Float::with_val(256, &dq[0] - &dq[1]).abs() < 1e-40);
        let fd = dphi_dq_fd(&fp.qvec, &fp.r, &fp.c, &p, 1e-8).unwrap();
        for k in 0..3 {
            assert!((Float::with_val(256, &dq[k] - &fd[k]) / &dq[k]).abs() < 1e-6);
        }
        let (r, c) = fp.expand().unwrap();
        let ph = to_phase(&r, &c, &p);
        assert!(!ph.is_balanced());
        assert!(ph.is_permutation_symmetric());
        let a = phi_s_bar(&fp.qvec, &fp.r, &fp.c, &p).unwrap();
        let b = phi_norm(&r, &c, &p).unwrap();
        assert!(Float::with_val(256, &a - &b).abs() < 1e-60);
    }
}
