//! Fixpoints of the tree recursion on the `d`-ary tree.
//!
//! Reduced points carry four values per side: index 0 is the mixed spin and
//! indices 1..=3 are the colour classes of sizes `q1, q2, q3`. Classes of size
//! zero are phantoms that copy an active class, so the critical equations hold
//! for every index and derivatives in `q` are well defined.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    bracketed_root, parse_decimal, sign_changes, solve_linear, to_decimal, Bracket,
};
use crate::scalar;
use crate::spin::ModelParams;

/// Class multiplicities `(q1, q2, q3)` summing to `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeTriple {
    pub q: [f64; 3],
}

impl TypeTriple {
    pub fn new(q1: f64, q2: f64, q3: f64, total: u32) -> Result<Self> {
        let q = [q1, q2, q3];
        if q.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidParams(format!("negative multiplicity in {q:?}")));
        }
        if (q1 + q2 + q3 - f64::from(total)).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "multiplicities {q:?} do not sum to {total}"
            )));
        }
        Ok(Self { q })
    }

    pub fn half_half(q: u32) -> Self {
        let h = f64::from(q) / 2.0;
        Self { q: [h, h, 0.0] }
    }

    pub fn q00(q: u32) -> Self {
        Self {
            q: [f64::from(q), 0.0, 0.0],
        }
    }

    pub fn total(&self) -> f64 {
        self.q.iter().sum()
    }

    /// Sorted descending; permutations of a triple are identified.
    pub fn canonical(&self) -> Self {
        let mut q = self.q;
        q.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Self { q }
    }

    pub fn is_integer(&self) -> bool {
        self.q.iter().all(|x| x.fract() == 0.0)
    }

    /// Class indices `1..=3` with positive multiplicity.
    pub fn active(&self) -> Vec<usize> {
        (1..=3).filter(|&i| self.q[i - 1] > 0.0).collect()
    }

    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.q[i - 1]
        }
    }

    pub fn label(&self) -> String {
        let fmt = |x: f64| {
            if x.fract() == 0.0 {
                format!("{x:.0}")
            } else {
                format!("{x}")
            }
        };
        format!("({},{},{})", fmt(self.q[0]), fmt(self.q[1]), fmt(self.q[2]))
    }
}

/// A reduced fixpoint, normalised so that `R0 + sum q_i R_i = C0 + sum q_i C_i = 1`.
#[derive(Clone, Debug)]
pub struct FixpointRC {
    pub qvec: TypeTriple,
    pub r: [Float; 4],
    pub c: [Float; 4],
    /// Largest violation of the critical equations, in log ratios.
    pub residual: Float,
    pub converged: bool,
    pub provenance: String,
}

fn f4(prec: u32) -> [Float; 4] {
    std::array::from_fn(|_| Float::with_val(prec, 0))
}

impl FixpointRC {
    /// Builds from unnormalised positive values, copying phantoms from the first active class.
    pub fn from_values(
        qvec: TypeTriple,
        r: [Float; 4],
        c: [Float; 4],
        params: &ModelParams,
        provenance: &str,
    ) -> Result<Self> {
        let mut r = r;
        let mut c = c;
        fill_phantoms(&qvec, &mut r);
        fill_phantoms(&qvec, &mut c);
        normalize(&qvec, &mut r);
        normalize(&qvec, &mut c);
        let residual = reduced_residual(&qvec, &r, &c, params);
        let tol = conv_tol(params.prec());
        Ok(Self {
            qvec,
            converged: residual <= tol,
            r,
            c,
            residual,
            provenance: provenance.to_string(),
        })
    }

    /// Full `(q+1)`-vectors; only for integer multiplicities.
    pub fn expand(&self) -> Result<(Vec<Float>, Vec<Float>)> {
        if !self.qvec.is_integer() {
            return Err(Error::InvalidParams(format!(
                "cannot expand non-integer type {}",
                self.qvec.label()
            )));
        }
        let mut r = vec![self.r[0].clone()];
        let mut c = vec![self.c[0].clone()];
        for i in 1..=3 {
            for _ in 0..self.qvec.q[i - 1] as usize {
                r.push(self.r[i].clone());
                c.push(self.c[i].clone());
            }
        }
        Ok((r, c))
    }

    /// Violation of the unreduced recursion on the expanded vectors.
    pub fn full_residual(&self, params: &ModelParams) -> Result<Float> {
        let (r, c) = self.expand()?;
        let r_next = tree_step(&c, params)?;
        let c_next = tree_step(&r, params)?;
        let rn = normalized(&r);
        let cn = normalized(&c);
        let mut worst = params.float(0);
        for (a, b) in rn.iter().zip(&r_next).chain(cn.iter().zip(&c_next)) {
            let d = (Float::with_val(params.prec(), a / b).ln()).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    /// Number of distinct active colour values on the R side.
    pub fn distinct_values(&self, rel_tol: f64) -> usize {
        let mut vals: Vec<f64> = self.qvec.active().iter().map(|&i| self.r[i].to_f64()).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut n = 0;
        let mut last: Option<f64> = None;
        for v in vals {
            if last.map_or(true, |l| (v - l).abs() > rel_tol * v.abs().max(l.abs())) {
                n += 1;
            }
            last = Some(v);
        }
        n
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "type": self.qvec.q,
            "label": self.qvec.label(),
            "R": self.r.iter().map(to_decimal).collect::<Vec<_>>(),
            "C": self.c.iter().map(to_decimal).collect::<Vec<_>>(),
            "residual": to_decimal(&self.residual),
            "converged": self.converged,
            "provenance": self.provenance,
        })
    }

    pub fn from_json(v: &serde_json::Value, params: &ModelParams) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("fixpoint record: missing or bad {what}"));
        let q: [f64; 3] = serde_json::from_value(v.get("type").cloned().ok_or_else(|| bad("type"))?)
            .map_err(|_| bad("type"))?;
        let qvec = TypeTriple::new(q[0], q[1], q[2], params.q())?;
        let read = |key: &str| -> Result<[Float; 4]> {
            let arr = v.get(key).and_then(|x| x.as_array()).ok_or_else(|| bad(key))?;
            if arr.len() != 4 {
                return Err(bad(key));
            }
            let mut out = f4(params.prec());
            for (slot, s) in out.iter_mut().zip(arr) {
                *slot = parse_decimal(s.as_str().ok_or_else(|| bad(key))?, params.prec())?;
            }
            Ok(out)
        };
        let provenance = v
            .get("provenance")
            .and_then(|x| x.as_str())
            .unwrap_or("file")
            .to_string();
        let mut r = read("R")?;
        let mut c = read("C")?;
        normalize(&qvec, &mut r);
        normalize(&qvec, &mut c);
        let residual = reduced_residual(&qvec, &r, &c, params);
        Ok(Self {
            qvec,
            converged: residual <= conv_tol(params.prec()),
            r,
            c,
            residual,
            provenance,
        })
    }
}

/// Convergence threshold on the residual: `1e-30`, or a few hundred ulps at low precision.
pub fn conv_tol(prec: u32) -> f64 {
    1e-30f64.max(2f64.powi(20 - prec as i32))
}

fn normalized(v: &[Float]) -> Vec<Float> {
    let prec = v[0].prec();
    let mut s = Float::with_val(prec, 0);
    for x in v {
        s += x;
    }
    v.iter().map(|x| Float::with_val(prec, x / &s)).collect()
}

fn fill_phantoms(qvec: &TypeTriple, v: &mut [Float; 4]) {
    let act = qvec.active();
    if let Some(&src) = act.first() {
        for i in 1..=3 {
            if !act.contains(&i) {
                v[i] = v[src].clone();
            }
        }
    }
}

fn normalize(qvec: &TypeTriple, v: &mut [Float; 4]) {
    let prec = v[0].prec();
    let mut s = Float::with_val(prec, &v[0]);
    for i in 1..=3 {
        s += Float::with_val(prec, &v[i] * qvec.q[i - 1]);
    }
    for x in v.iter_mut() {
        *x /= &s;
    }
}

/// The reduced interaction sums `(B C)_0 = C0 t^2 + t S` and `(B C)_i = C0 t + S - C_i`, `S = sum q_j C_j`.
pub fn bc_reduced(qvec: &TypeTriple, c: &[Float; 4], t: &Float) -> [Float; 4] {
    let prec = c[0].prec();
    let mut s = Float::with_val(prec, 0);
    for j in 1..=3 {
        s += Float::with_val(prec, &c[j] * qvec.q[j - 1]);
    }
    let c0t = Float::with_val(prec, &c[0] * t);
    let b0 = Float::with_val(prec, &c0t * t) + Float::with_val(prec, &s * t);
    let base = Float::with_val(prec, &c0t + &s);
    [
        b0,
        Float::with_val(prec, &base - &c[1]),
        Float::with_val(prec, &base - &c[2]),
        Float::with_val(prec, &base - &c[3]),
    ]
}

/// Largest `|ln R_i - d ln (BC)_i - (ln R_0 - d ln (BC)_0)|` over all four indices and both sides.
pub fn reduced_residual(qvec: &TypeTriple, r: &[Float; 4], c: &[Float; 4], params: &ModelParams) -> Float {
    let prec = params.prec();
    let d = params.d();
    let t = params.t();
    let mut worst = Float::with_val(prec, 0);
    for (x, y) in [(r, c), (c, r)] {
        let bc = bc_reduced(qvec, y, t);
        if bc.iter().any(|b| b.cmp0() != Some(std::cmp::Ordering::Greater)) {
            return Float::with_val(prec, rug::float::Special::Infinity);
        }
        let v: Vec<Float> = (0..4)
            .map(|i| Float::with_val(prec, x[i].ln_ref()) - Float::with_val(prec, bc[i].ln_ref()) * d)
            .collect();
        for vi in &v[1..] {
            let dev = Float::with_val(prec, vi - &v[0]).abs();
            if !(dev <= worst) {
                worst = dev;
            }
        }
    }
    worst
}

/// One step of the recursion on full vectors, normalised to sum 1.
pub fn tree_step(c: &[Float], params: &ModelParams) -> Result<Vec<Float>> {
    let q = params.q() as usize;
    if c.len() != q + 1 {
        return Err(Error::InvalidParams(format!(
            "expected {} entries, got {}",
            q + 1,
            c.len()
        )));
    }
    let prec = params.prec();
    let t = params.t();
    if c.iter().any(|x| x.is_sign_negative() && !x.is_zero()) {
        return Err(Error::Domain("tree_step needs nonnegative input".into()));
    }
    let mut sum = Float::with_val(prec, 0);
    for x in &c[1..] {
        sum += x;
    }
    let c0t = Float::with_val(prec, &c[0] * t);
    let d = params.d();
    let mut logs = Vec::with_capacity(q + 1);
    let b0 = Float::with_val(prec, &c0t * t) + Float::with_val(prec, &sum * t);
    logs.push(b0.ln() * d);
    for cj in &c[1..] {
        let bi = Float::with_val(prec, &c0t + &sum) - cj;
        logs.push(bi.ln() * d);
    }
    let lse = crate::numerics::log_sum_exp(&logs);
    Ok(logs.into_iter().map(|l| (l - &lse).exp()).collect())
}

/// `t^d ((t y + q)/(t y + q - 1))^d`, the two-spin map for `(q,0,0)` ratios.
pub fn two_spin_step(y: &Float, params: &ModelParams) -> Float {
    let prec = params.prec();
    let t = params.t();
    let den = Float::with_val(prec, y * t) + (params.q() - 1);
    let mut l = Float::with_val(prec, den.recip_ref()).ln_1p() + Float::with_val(prec, t.ln_ref());
    l *= params.d();
    l.exp()
}

/// The standard two-spin recursion `lambda ((beta y + 1)/(y + gamma))^d`.
pub fn ising_step(y: &Float, beta: &Float, gamma: &Float, lambda: &Float, d: u32) -> Float {
    let prec = y.prec();
    let num = Float::with_val(prec, beta * y) + 1u32;
    let den = Float::with_val(prec, y + gamma);
    let mut l = (num / den).ln();
    l *= d;
    l.exp() * lambda
}

/// `(beta, gamma, lambda) = (t/q, (q-1)/t, q^d)`.
pub fn ising_parameters(params: &ModelParams) -> (Float, Float, Float) {
    let prec = params.prec();
    let t = params.t();
    let q = params.q();
    let beta = Float::with_val(prec, t / q);
    let gamma = Float::with_val(prec, q - 1) / t;
    let lambda = Float::with_val(prec, q).ln() * params.d();
    (beta, gamma, lambda.exp())
}

/// The symmetric `(q,0,0)` solution.
#[derive(Clone, Debug)]
pub struct SymmetricQ00 {
    /// `x = R0/R1 = C0/C1`.
    pub x: Float,
    /// `u = x^(1/d) / t`.
    pub u: Float,
    pub residual: Float,
    /// `t x + q - 1 < d`.
    pub below_d: bool,
    /// `u < 1 + 0.5/(M - 1)`.
    pub u_below_y_e: bool,
}

/// Solves `x = ((t^2 x + q t)/(t x + q - 1))^d` through its monotone form in `u`.
pub fn solve_symmetric_q00(params: &ModelParams) -> Result<SymmetricQ00> {
    let prec = params.prec();
    let u = scalar::solve_sym_u(params)?;
    let x = Float::with_val(prec, &u * params.t()).ln() * params.d();
    let x = x.exp();
    let rhs = two_spin_step(&x, params);
    let residual = (Float::with_val(prec, &rhs - &x) / &x).abs();
    let txq = Float::with_val(prec, &x * params.t()) + (params.q() - 1);
    Ok(SymmetricQ00 {
        below_d: txq < params.d(),
        u_below_y_e: u < scalar::y_e(params),
        x,
        u,
        residual,
    })
}

/// The asymmetric `(q,0,0)` pair together with the symmetric value between them.
#[derive(Clone, Debug)]
pub struct AsymmetricQ00 {
    pub x: Float,
    pub y: Float,
    pub q_star: Float,
    /// Relative residual of both two-spin equations.
    pub residual: Float,
    pub x_gt_y: bool,
    /// `x > d^2 / (q^k - q)`.
    pub above_bound: bool,
}

/// The largest root of `Y(Y(z)) - z`, scanned downward in `ln z` from `10 d^2/(q^k - q)`.
pub fn solve_asymmetric_q00(params: &ModelParams) -> Result<AsymmetricQ00> {
    let prec = params.prec();
    let sym = solve_symmetric_q00(params)?;
    let m = params.weight_base_float();
    let d2m = params.float(params.d()).square() / &m;
    let z_hi = Float::with_val(prec, &d2m * 10u32).max(&Float::with_val(prec, &sym.x * 4u32));
    let f = |lz: &Float| {
        let z = Float::with_val(prec, lz.exp_ref());
        let yz = two_spin_step(&z, params);
        let yyz = two_spin_step(&yz, params);
        (yyz.ln() - lz).exp_m1()
    };
    let lo = Float::with_val(prec, sym.x.ln_ref()) + Float::with_val(prec, 1e-12);
    let hi = Float::with_val(prec, z_hi.ln_ref());
    if lo >= hi {
        return Err(Error::NoAsymmetricFixpoint);
    }
    let changes = sign_changes(&f, &lo, &hi, params.ctx().scan_points);
    let Some(last) = changes.last() else {
        return Err(Error::NoAsymmetricFixpoint);
    };
    let br = Bracket::new(&f, last.lo.clone(), last.hi.clone())?;
    let lx = bracketed_root(f, &br, params.ctx())?;
    let x = lx.exp();
    if Float::with_val(prec, &x / &sym.x) - 1u32 < 1e-9 {
        return Err(Error::NoAsymmetricFixpoint);
    }
    let y = two_spin_step(&x, params);
    let back = two_spin_step(&y, params);
    let residual = (Float::with_val(prec, &back - &x) / &x).abs();
    Ok(AsymmetricQ00 {
        x_gt_y: x > y,
        above_bound: x > d2m,
        x,
        y,
        q_star: sym.x,
        residual,
    })
}

/// The `(q,0,0)` fixpoint with `R0/R1 = x` and `C0/C1 = y`.
pub fn q00_fixpoint(x: &Float, y: &Float, params: &ModelParams, provenance: &str) -> Result<FixpointRC> {
    let prec = params.prec();
    let one = Float::with_val(prec, 1);
    let r = [x.clone(), one.clone(), one.clone(), one.clone()];
    let c = [y.clone(), one.clone(), one.clone(), one];
    FixpointRC::from_values(TypeTriple::q00(params.q()), r, c, params, provenance)
}

/// The `(q,0,0)` point in the chart where class 3 is a phantom with `R1/R3 = r1^d`, `C3/C1 = c3^d`.
pub fn q00_phantom_fixpoint(
    r0: &Float,
    r1: &Float,
    c0: &Float,
    c3: &Float,
    params: &ModelParams,
) -> Result<FixpointRC> {
    let prec = params.prec();
    let d = params.d();
    let pw = |v: &Float| (Float::with_val(prec, v.ln_ref()) * d).exp();
    let one = Float::with_val(prec, 1);
    let r = [pw(r0), pw(r1), pw(r1), one.clone()];
    let c = [pw(c0), one.clone(), one, pw(c3)];
    let qvec = TypeTriple::q00(params.q());
    let mut r = r;
    let mut c = c;
    normalize(&qvec, &mut r);
    normalize(&qvec, &mut c);
    let residual = reduced_residual(&qvec, &r, &c, params);
    Ok(FixpointRC {
        qvec,
        converged: residual <= conv_tol(prec),
        r,
        c,
        residual,
        provenance: "f1-f2 intersection".into(),
    })
}

/// The `(q/2, q/2, 0)` fixpoint from the root of `h`.
pub fn solve_half_half(params: &ModelParams) -> Result<FixpointRC> {
    if params.q() % 2 != 0 {
        return Err(Error::InvalidParams("half-half type needs even q".into()));
    }
    let prec = params.prec();
    let d = params.d();
    let x = scalar::root_h(params)?;
    let e = Float::with_val(prec, &x - 1u32);
    // r0 = t P(x), P = G_{d+1}/G_d
    let lp = crate::numerics::ln_geometric_sum(&e, d + 1) - crate::numerics::ln_geometric_sum(&e, d);
    let lr0 = (lp + Float::with_val(prec, params.t().ln_ref())) * d;
    let r0 = lr0.exp();
    let xd = (Float::with_val(prec, x.ln_ref()) * d).exp();
    let one = Float::with_val(prec, 1);
    let r = [r0.clone(), xd.clone(), one.clone(), xd.clone()];
    let c = [r0, one.clone(), xd, one];
    FixpointRC::from_values(TypeTriple::half_half(params.q()), r, c, params, "root of h")
}

/// Newton's method on the reduced critical system in log coordinates.
fn newton_polish(
    qvec: &TypeTriple,
    lr: &mut [Float; 4],
    lc: &mut [Float; 4],
    params: &ModelParams,
    steps: usize,
) {
    let prec = params.prec();
    let t = params.t();
    let d = params.d();
    let mut idx = vec![0usize];
    idx.extend(qvec.active());
    let n = idx.len();
    let w: Vec<f64> = idx.iter().map(|&a| qvec.weight(a)).collect();
    let weight = |a: usize, b: usize| -> Float {
        let qb = qvec.weight(b);
        match (a, b) {
            (0, 0) => Float::with_val(prec, t.square_ref()),
            (0, _) => Float::with_val(prec, t * qb),
            (_, 0) => t.clone(),
            _ => Float::with_val(prec, qb - if a == b { 1.0 } else { 0.0 }),
        }
    };
    let eval = |lr: &[Float; 4], lc: &[Float; 4]| -> Option<(Vec<Float>, Vec<Vec<Float>>)> {
        let r: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, lr[i].exp_ref()));
        let c: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, lc[i].exp_ref()));
        let mut fv = vec![Float::with_val(prec, 0); 2 * n];
        let mut jac = vec![vec![Float::with_val(prec, 0); 2 * n]; 2 * n];
        for (side, (x, lx, y)) in [(&r, lr, &c), (&c, lc, &r)].into_iter().enumerate() {
            let bc = bc_reduced(qvec, y, t);
            if bc.iter().any(|b| b.cmp0() != Some(std::cmp::Ordering::Greater)) {
                return None;
            }
            let own = side * n;
            let other = (1 - side) * n;
            // normalisation row
            let mut s = Float::with_val(prec, 0);
            for (k, &a) in idx.iter().enumerate() {
                s += Float::with_val(prec, &x[a] * w[k]);
            }
            fv[own] = Float::with_val(prec, s.ln_ref());
            for (k, &a) in idx.iter().enumerate() {
                jac[own][own + k] = Float::with_val(prec, &x[a] * w[k]) / &s;
            }
            let v0 = Float::with_val(prec, &lx[0]) - Float::with_val(prec, bc[0].ln_ref()) * d;
            for (k, &a) in idx.iter().enumerate().skip(1) {
                let va = Float::with_val(prec, &lx[a]) - Float::with_val(prec, bc[a].ln_ref()) * d;
                fv[own + k] = va - &v0;
                jac[own + k][own + k] += 1u32;
                jac[own + k][own] -= 1u32;
                for (m, &b) in idx.iter().enumerate() {
                    let da = weight(a, b) * &y[b] / &bc[a];
                    let d0 = weight(0, b) * &y[b] / &bc[0];
                    jac[own + k][other + m] -= (da - d0) * d;
                }
            }
        }
        Some((fv, jac))
    };
    let norm = |f: &[Float]| {
        f.iter()
            .map(|x| Float::with_val(prec, x.abs_ref()))
            .fold(Float::with_val(prec, 0), |a, b| a.max(&b))
    };
    for _ in 0..steps {
        let Some((fv, jac)) = eval(lr, lc) else { return };
        let cur = norm(&fv);
        if cur.is_zero() {
            return;
        }
        let rhs: Vec<Float> = fv.iter().map(|x| Float::with_val(prec, -x)).collect();
        let Some(delta) = solve_linear(&jac, &rhs) else { return };
        let mut lam = Float::with_val(prec, 1);
        let mut accepted = false;
        for _ in 0..40 {
            let mut nr = lr.clone();
            let mut nc = lc.clone();
            for (k, &a) in idx.iter().enumerate() {
                nr[a] += Float::with_val(prec, &delta[k] * &lam);
                nc[a] += Float::with_val(prec, &delta[n + k] * &lam);
            }
            if let Some((nf, _)) = eval(&nr, &nc) {
                if norm(&nf) < cur {
                    *lr = nr;
                    *lc = nc;
                    accepted = true;
                    break;
                }
            }
            lam /= 2u32;
        }
        if !accepted {
            return;
        }
    }
}

/// Starting point for [`solve_general_type`].
#[derive(Clone, Debug)]
pub struct Init {
    pub r: [Float; 4],
    pub c: [Float; 4],
}

impl Init {
    pub fn from_f64(r: [f64; 4], c: [f64; 4], prec: u32) -> Self {
        Self {
            r: r.map(|x| Float::with_val(prec, x)),
            c: c.map(|x| Float::with_val(prec, x)),
        }
    }

    /// Deterministic multi-start set: uniform, two opposed splits and seeded random points.
    pub fn standard(qvec: &TypeTriple, params: &ModelParams, n_random: usize, seed: u64) -> Vec<Self> {
        let prec = params.prec();
        let x = params.float(params.d()).ln().to_f64();
        let big = x.exp().max(2.0);
        let mut out = vec![
            Self::from_f64([1.0; 4], [1.0; 4], prec),
            Self::from_f64([big, big, 1.0, 0.5], [big, 1.0, big, 2.0], prec),
            Self::from_f64([big, 1.0, big, 2.0], [big, big, 1.0, 0.5], prec),
            Self::from_f64([big * big, big, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0], prec),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ qvec.q.iter().fold(0u64, |h, v| h.rotate_left(17) ^ v.to_bits()));
        for _ in 0..n_random {
            let mut r = [0.0; 4];
            let mut c = [0.0; 4];
            for i in 0..4 {
                r[i] = (rng.gen_range(-1.0..1.0) * x).exp();
                c[i] = (rng.gen_range(-1.0..1.0) * x).exp();
            }
            out.push(Self::from_f64(r, c, prec));
        }
        out
    }
}

/// Damped log-domain iteration of the critical system followed by Newton polishing.
pub fn solve_general_type(
    qvec: &TypeTriple,
    params: &ModelParams,
    init: &Init,
    damping: f64,
) -> Result<FixpointRC> {
    if (qvec.total() - f64::from(params.q())).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "type {} does not sum to q = {}",
            qvec.label(),
            params.q()
        )));
    }
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::InvalidParams("damping must lie in (0, 1]".into()));
    }
    let prec = params.prec();
    let d = params.d();
    let t = params.t();
    if init.r.iter().chain(&init.c).any(|x| x.cmp0() != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::InvalidParams("initial point must be positive".into()));
    }
    let mut r = init.r.clone();
    let mut c = init.c.clone();
    fill_phantoms(qvec, &mut r);
    fill_phantoms(qvec, &mut c);
    normalize(qvec, &mut r);
    normalize(qvec, &mut c);
    let mut lr: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, r[i].ln_ref()));
    let mut lc: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, c[i].ln_ref()));
    let tol = conv_tol(prec);
    let renorm = |l: &mut [Float; 4]| {
        let mut vals = Vec::new();
        for i in 0..4 {
            let w = qvec.weight(i);
            if w > 0.0 {
                vals.push(Float::with_val(prec, &l[i]) + Float::with_val(prec, w).ln());
            }
        }
        let lse = crate::numerics::log_sum_exp(&vals);
        for x in l.iter_mut() {
            *x -= &lse;
        }
    };
    let half_step = |own: &mut [Float; 4], other: &[Float; 4]| -> bool {
        let y: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, other[i].exp_ref()));
        let bc = bc_reduced(qvec, &y, t);
        if bc.iter().any(|b| b.cmp0() != Some(std::cmp::Ordering::Greater)) {
            return false;
        }
        for i in 0..4 {
            let target = Float::with_val(prec, bc[i].ln_ref()) * d;
            let mixed = Float::with_val(prec, &own[i] * (1.0 - damping)) + target * damping;
            own[i] = mixed;
        }
        renorm(own);
        true
    };
    let residual_of = |lr: &[Float; 4], lc: &[Float; 4]| {
        let r: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, lr[i].exp_ref()));
        let c: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, lc[i].exp_ref()));
        reduced_residual(qvec, &r, &c, params)
    };
    let max_iters = 400;
    let mut iters = 0;
    for _ in 0..max_iters {
        iters += 1;
        if !half_step(&mut lr, &lc) || !half_step(&mut lc, &lr) {
            break;
        }
        let res = residual_of(&lr, &lc);
        if res.is_nan() || res < 1e-6 {
            break;
        }
    }
    newton_polish(qvec, &mut lr, &mut lc, params, 80);
    renorm(&mut lr);
    renorm(&mut lc);
    let r: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, lr[i].exp_ref()));
    let c: [Float; 4] = std::array::from_fn(|i| Float::with_val(prec, lc[i].exp_ref()));
    let mut fp = FixpointRC::from_values(*qvec, r, c, params, "damped iteration + Newton")?;
    if fp.residual.is_nan() || fp.residual > tol {
        return Err(Error::NotConverged {
            residual: fp.residual.to_string_radix(10, Some(12)),
            iters,
        });
    }
    fp.converged = true;
    Ok(fp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionContext;

    fn params(q: u32, k: u32, d: u32) -> ModelParams {
        ModelParams::from_d(q, k, d, PrecisionContext::extended()).unwrap()
    }

    #[test]
    fn half_half_is_fixpoint() {
        let p = params(4, 2, 80);
        let fp = solve_half_half(&p).unwrap();
        assert!(fp.converged, "{}", fp.residual.to_f64());
        assert!(fp.full_residual(&p).unwrap() < 1e-30);
    }

    #[test]
    fn q00_families() {
        let p = params(4, 2, 80);
        let s = solve_symmetric_q00(&p).unwrap();
        assert!(s.below_d && s.u_below_y_e);
        let a = solve_asymmetric_q00(&p).unwrap();
        assert!(a.x_gt_y && a.above_bound);
        assert!(a.x > a.q_star && a.q_star > a.y);
        let fp = q00_fixpoint(&a.x, &a.y, &p, "test").unwrap();
        assert!(fp.full_residual(&p).unwrap() < 1e-30);
    }

    #[test]
    fn general_solver_recovers_half_half() {
        let p = params(4, 2, 80);
        let hh = solve_half_half(&p).unwrap();
        let q = TypeTriple::half_half(4);
        let init = Init::from_f64([80.0, 80.0, 1.0, 1.0], [80.0, 1.0, 80.0, 1.0], p.prec());
        let fp = solve_general_type(&q, &p, &init, 0.5).unwrap();
        for i in 0..4 {
            let rel = Float::with_val(256, &fp.r[i] - &hh.r[i]).abs() / &hh.r[i];
            assert!(rel < 1e-25, "{i}: {}", rel.to_f64());
        }
    }
}
