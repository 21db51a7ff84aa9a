//! First-moment functionals for colourings of random regular hypergraphs.
//!
//! `alpha` is the colour frequency vector and `beta` the frequency of ordered
//! colour tuples on hyperedges. Tuples are indexed in base `q` with the first
//! position most significant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tuple space for which `beta` is materialised.
pub const MAX_TUPLES: u64 = 1_000_000;

/// Shannon entropy with `0 ln 0 = 0`.
pub fn entropy(v: &[f64]) -> f64 {
    -v.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// `q^K`, refusing spaces larger than [`MAX_TUPLES`].
fn tuple_count(q: u32, arity: u32) -> Result<usize> {
    match u64::from(q).checked_pow(arity) {
        Some(n) if n <= MAX_TUPLES => Ok(n as usize),
        _ => Err(Error::TooLarge {
            states: format!("{q}^{arity}"),
            budget: MAX_TUPLES,
        }),
    }
}

/// Colour occurrence counts of tuple number `idx`.
pub fn tuple_counts(idx: usize, q: u32, arity: u32) -> Vec<u32> {
    let mut counts = vec![0u32; q as usize];
    let mut rest = idx;
    for _ in 0..arity {
        counts[rest % q as usize] += 1;
        rest /= q as usize;
    }
    counts
}

fn is_mono(counts: &[u32]) -> bool {
    counts.iter().filter(|&&c| c > 0).count() <= 1
}

/// A candidate pair of colour and tuple frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    pub q: u32,
    pub arity: u32,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl PhasePair {
    /// Largest violation among the feasibility constraints.
    pub fn max_violation(&self) -> f64 {
        let q = self.q as usize;
        let mut worst = (self.alpha.iter().sum::<f64>() - 1.0).abs();
        let mut marg = vec![0.0; q];
        for (idx, &b) in self.beta.iter().enumerate() {
            let counts = tuple_counts(idx, self.q, self.arity);
            if is_mono(&counts) {
                worst = worst.max(b.abs());
            }
            worst = worst.max((-b).max(0.0));
            for i in 0..q {
                marg[i] += f64::from(counts[i]) * b;
            }
        }
        for i in 0..q {
            worst = worst.max((marg[i] - f64::from(self.arity) * self.alpha[i]).abs());
            worst = worst.max((-self.alpha[i]).max(0.0));
        }
        worst
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.alpha.len() == self.q as usize
            && self.beta.len() as u64 == u64::from(self.q).pow(self.arity)
            && self.max_violation() <= tol
    }
}

/// `-(Delta - 1) h(alpha) + (Delta / K) h(beta)`.
pub fn f_value(pp: &PhasePair, delta: u32) -> f64 {
    -(f64::from(delta) - 1.0) * entropy(&pp.alpha)
        + f64::from(delta) / f64::from(pp.arity) * entropy(&pp.beta)
}

/// `h(beta) + sum_i ln(alpha_i) sum_tuples t_i beta`.
pub fn g_value(pp: &PhasePair) -> f64 {
    let mut acc = entropy(&pp.beta);
    for (idx, &b) in pp.beta.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let counts = tuple_counts(idx, pp.q, pp.arity);
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                acc += f64::from(c) * b * pp.alpha[i].ln();
            }
        }
    }
    acc
}

/// `||alpha||_K^K`.
pub fn norm_k_pow(alpha: &[f64], arity: u32) -> f64 {
    alpha.iter().map(|a| a.powi(arity as i32)).sum()
}

/// The maximiser of `G` for fixed `alpha` over distributions vanishing on the
/// monochromatic tuples: product weights, renormalised.
///
/// The marginal constraints are not imposed, so the pair is feasible only at
/// uniform `alpha`; `G` at this point bounds `G` at every feasible pair.
pub fn beta_star(alpha: &[f64], arity: u32) -> Result<PhasePair> {
    let q = alpha.len() as u32;
    let z = 1.0 - norm_k_pow(alpha, arity);
    if !(z > 0.0) {
        return Err(Error::Domain(format!(
            "||alpha||_K^K = {} leaves no non-monochromatic mass",
            1.0 - z
        )));
    }
    let n = tuple_count(q, arity)?;
    let beta = (0..n)
        .map(|idx| {
            let counts = tuple_counts(idx, q, arity);
            if is_mono(&counts) {
                0.0
            } else {
                counts
                    .iter()
                    .zip(alpha)
                    .map(|(&c, a)| a.powi(c as i32))
                    .product::<f64>()
                    / z
            }
        })
        .collect();
    Ok(PhasePair {
        q,
        arity,
        alpha: alpha.to_vec(),
        beta,
    })
}

/// `h(alpha) + (Delta/K) ln(1 - ||alpha||_K^K)`, an upper bound on `F(alpha, beta)` over feasible `beta`.
pub fn reduced_f(alpha: &[f64], arity: u32, delta: u32) -> f64 {
    let z = 1.0 - norm_k_pow(alpha, arity);
    if !(z > 0.0) {
        return f64::NEG_INFINITY;
    }
    entropy(alpha) + f64::from(delta) / f64::from(arity) * z.ln()
}

/// `ln(q (1 - q^(1-K))^(Delta/K))`.
pub fn f_upper_bound(q: u32, arity: u32, delta: u32) -> f64 {
    let q = f64::from(q);
    let k = f64::from(arity);
    q.ln() + f64::from(delta) / k * (-q.powf(1.0 - k)).ln_1p()
}

/// `K q^(K-1) ln q`, the sufficient degree for the bound to be negative.
pub fn threshold(q: u32, arity: u32) -> f64 {
    let qf = f64::from(q);
    f64::from(arity) * qf.powi(arity as i32 - 1) * qf.ln()
}

/// The exact degree at which [`f_upper_bound`] crosses zero.
pub fn exact_zero_degree(q: u32, arity: u32) -> f64 {
    let qf = f64::from(q);
    -f64::from(arity) * qf.ln() / (-qf.powf(1.0 - f64::from(arity))).ln_1p()
}

/// `Delta > K q^(K-1) ln q`.
pub fn is_uncolourable_regime(q: u32, arity: u32, delta: u32) -> bool {
    f64::from(delta) > threshold(q, arity)
}

/// Whether the upper bound itself is negative.
pub fn bound_is_negative(q: u32, arity: u32, delta: u32) -> bool {
    f_upper_bound(q, arity, delta) < 0.0
}

/// Smallest integer degree strictly above [`threshold`].
pub fn threshold_degree(q: u32, arity: u32) -> u32 {
    threshold(q, arity).floor() as u32 + 1
}

/// Smallest integer degree strictly above `K q^(K-1) ln q + 1`, where the
/// disequality gadget construction applies.
pub fn gadget_threshold_degree(q: u32, arity: u32) -> u32 {
    (threshold(q, arity) + 1.0).floor() as u32 + 1
}

/// Result of [`maximize_f_grid`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridMax {
    pub value: f64,
    pub alpha: Vec<f64>,
    pub evaluations: usize,
}

/// All compositions of `total` into `parts` nonnegative parts.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
    }
    if parts > 0 {
        rec(0, total, &mut cur, &mut out);
    }
    out
}

/// Maximises `F` over the simplex lattice of the given resolution, then refines
/// three times around the incumbent at ten times finer spacing.
pub fn maximize_f_grid(q: u32, arity: u32, delta: u32, resolution: u32) -> Result<GridMax> {
    if q < 2 || arity < 2 || resolution == 0 {
        return Err(Error::InvalidParams(
            "need q >= 2, K >= 2 and a positive resolution".into(),
        ));
    }
    tuple_count(q, arity)?;
    let qn = q as usize;
    let pts = compositions(resolution, qn);
    let mut evaluations = pts.len();
    let (mut value, mut alpha) = pts
        .par_iter()
        .map(|c| {
            let a: Vec<f64> = c.iter().map(|&x| f64::from(x) / f64::from(resolution)).collect();
            (reduced_f(&a, arity, delta), a)
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |x, y| if y.0 > x.0 { y } else { x },
        );
    let mut step = 1.0 / f64::from(resolution);
    let radius: i32 = if qn <= 3 { 10 } else { 3 };
    for _ in 0..3 {
        step /= 10.0;
        let span = (2 * radius + 1) as usize;
        let total = span.pow(qn as u32 - 1);
        evaluations += total;
        let centre = alpha.clone();
        let best = (0..total)
            .into_par_iter()
            .filter_map(|code| {
                let mut a = centre.clone();
                let mut rest = code;
                let mut last = 1.0;
                for slot in a.iter_mut().take(qn - 1) {
                    let off = (rest % span) as i32 - radius;
                    rest /= span;
                    *slot += f64::from(off) * step;
                    if *slot < 0.0 {
                        return None;
                    }
                    last -= *slot;
                }
                if last < -1e-15 {
                    return None;
                }
                a[qn - 1] = last.max(0.0);
                Some((reduced_f(&a, arity, delta), a))
            })
            .reduce(
                || (f64::NEG_INFINITY, Vec::new()),
                |x, y| if y.0 > x.0 { y } else { x },
            );
        if best.0 > value {
            value = best.0;
            alpha = best.1;
        }
    }
    Ok(GridMax {
        value,
        alpha,
        evaluations,
    })
}

/// CSV rows `alpha_1,...,alpha_q,F` over the simplex lattice.
pub fn landscape_csv(q: u32, arity: u32, delta: u32, resolution: u32) -> Result<String> {
    tuple_count(q, arity)?;
    let mut out = String::new();
    let header: Vec<String> = (1..=q).map(|i| format!("alpha_{i}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",F\n");
    for c in compositions(resolution, q as usize) {
        let a: Vec<f64> = c.iter().map(|&x| f64::from(x) / f64::from(resolution)).collect();
        let f = reduced_f(&a, arity, delta);
        let cols: Vec<String> = a.iter().map(|x| format!("{x:.12}")).collect();
        out.push_str(&format!("{},{:.15e}\n", cols.join(","), f));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_basics() {
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.5]) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn uniform_beta_star() {
        let pp = beta_star(&[1.0 / 3.0; 3], 3).unwrap();
        assert!((pp.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pp.is_feasible(1e-12));
        let expect = (-(3f64.powi(-2))).ln_1p();
        assert!((g_value(&pp) - expect).abs() < 1e-12);
    }

    #[test]
    fn point_mass_rejected() {
        assert!(matches!(beta_star(&[1.0, 0.0], 3), Err(Error::Domain(_))));
    }

    #[test]
    fn bound_values() {
        let b10 = f_upper_bound(2, 3, 10);
        assert!((b10 - (2f64.ln() + 10.0 / 3.0 * 0.75f64.ln())).abs() < 1e-12);
        assert!((b10 + 0.2658).abs() < 1e-4);
        assert!(is_uncolourable_regime(2, 3, 10));
        assert!(!is_uncolourable_regime(2, 3, 8));
        assert!((threshold(2, 3) - 8.317766166719343).abs() < 1e-12);
        assert_eq!(threshold_degree(2, 3), 9);
        assert_eq!(gadget_threshold_degree(2, 3), 10);
    }

    #[test]
    fn grid_max_q2() {
        let m = maximize_f_grid(2, 3, 10, 100).unwrap();
        assert!(m.value < 0.0);
        assert!((m.alpha[0] - 0.5).abs() < 1e-9);
        let m = maximize_f_grid(2, 3, 2, 100).unwrap();
        assert!(m.value > 0.0);
    }
}
