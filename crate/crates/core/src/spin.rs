//! Model parameters, the interaction matrix and exact partition functions on graphs.
//!
//! Spin 0 is the mixed state; pure colours are `1..=q`.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{symmetric_eigenvalues, PrecisionContext};

/// Default cap on the number of enumerated states.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// The parameter bundle consumed by every analysis.
#[derive(Clone, Debug)]
pub struct ModelParams {
    q: u32,
    k: u32,
    delta: u32,
    /// `q^k - q`, which is also `t^Delta`.
    weight_base: u64,
    t: Float,
    ctx: PrecisionContext,
}

impl ModelParams {
    /// Checks the parameters and computes `t = (q^k - q)^(1/Delta)` in the log domain.
    ///
    /// `delta = 2` is accepted for the cycle oracles; the analytical modules
    /// all run with much larger degrees.
    pub fn new(q: u32, k: u32, delta: u32, ctx: PrecisionContext) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParams(format!("q must be at least 2, got {q}")));
        }
        if delta < 1 {
            return Err(Error::InvalidParams("Delta must be at least 1".into()));
        }
        let qk = u64::from(q)
            .checked_pow(k)
            .ok_or_else(|| Error::InvalidParams(format!("q^k overflows for q={q}, k={k}")))?;
        if qk <= u64::from(q) {
            return Err(Error::InvalidParams(format!(
                "q^k - q must be positive, got q={q}, k={k}"
            )));
        }
        let weight_base = qk - u64::from(q);
        let prec = ctx.prec();
        let t = (Float::with_val(prec, weight_base).ln() / delta).exp();
        Ok(Self {
            q,
            k,
            delta,
            weight_base,
            t,
            ctx,
        })
    }

    /// Parameters given the tree degree `d = Delta - 1`.
    pub fn from_d(q: u32, k: u32, d: u32, ctx: PrecisionContext) -> Result<Self> {
        Self::new(q, k, d + 1, ctx)
    }

    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    /// Hyperedge arity `K = 2k`.
    pub fn arity(&self) -> u32 {
        2 * self.k
    }
    pub fn delta(&self) -> u32 {
        self.delta
    }
    pub fn d(&self) -> u32 {
        self.delta - 1
    }
    pub fn t(&self) -> &Float {
        &self.t
    }
    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }
    pub fn prec(&self) -> u32 {
        self.ctx.prec()
    }
    pub fn q_pow_k(&self) -> u64 {
        self.weight_base + u64::from(self.q)
    }
    /// `q^k - q = t^(d+1)`.
    pub fn weight_base(&self) -> u64 {
        self.weight_base
    }
    pub fn weight_base_float(&self) -> Float {
        self.ctx.float(self.weight_base)
    }
    /// `q / 2` as a real, the class size of the half-half type.
    pub fn half_q(&self) -> Float {
        self.ctx.float(self.q) / 2u32
    }

    /// `q` even and at least 4, with `d >= 5 q^k`.
    pub fn is_proven_regime(&self) -> bool {
        self.q % 2 == 0 && self.q >= 4 && u64::from(self.d()) >= 5 * self.q_pow_k()
    }

    pub fn with_ctx(&self, ctx: PrecisionContext) -> Self {
        Self::new(self.q, self.k, self.delta, ctx).expect("parameters were already validated")
    }

    pub fn float<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        self.ctx.float(value)
    }
}

/// The `(q+1) x (q+1)` interaction matrix.
#[derive(Clone, Debug)]
pub struct InteractionMatrix {
    entries: Vec<Vec<Float>>,
}

impl InteractionMatrix {
    pub fn new(params: &ModelParams) -> Self {
        let q = params.q() as usize;
        let t = params.t();
        let prec = params.prec();
        let entries = (0..=q)
            .map(|i| {
                (0..=q)
                    .map(|j| match (i, j) {
                        (0, 0) => Float::with_val(prec, t.square_ref()),
                        (0, _) | (_, 0) => t.clone(),
                        _ if i == j => Float::with_val(prec, 0),
                        _ => Float::with_val(prec, 1),
                    })
                    .collect()
            })
            .collect();
        Self { entries }
    }

    /// Builds from arbitrary entries (used by permutation tests).
    pub fn from_entries(entries: Vec<Vec<Float>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParams("interaction matrix must be square".into()));
        }
        Ok(Self { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Float {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<Float>] {
        &self.entries
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64()).collect())
            .collect()
    }

    /// `P B P^T` for the spin relabelling `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.size();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| self.entries[perm[i]][perm[j]].clone()).collect())
            .collect();
        Self { entries }
    }

    pub fn eigenvalues(&self) -> Vec<Float> {
        symmetric_eigenvalues(&self.entries)
    }

    /// `trace(B^m)`.
    pub fn trace_power(&self, m: u32) -> Float {
        let n = self.size();
        let prec = self.entries[0][0].prec();
        let mut acc: Vec<Vec<Float>> = (0..n)
            .map(|i| (0..n).map(|j| Float::with_val(prec, u32::from(i == j))).collect())
            .collect();
        for _ in 0..m {
            acc = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut s = Float::with_val(prec, 0);
                            for l in 0..n {
                                s += Float::with_val(prec, &acc[i][l] * &self.entries[l][j]);
                            }
                            s
                        })
                        .collect()
                })
                .collect();
        }
        let mut tr = Float::with_val(prec, 0);
        for (i, row) in acc.iter().enumerate() {
            tr += &row[i];
        }
        tr
    }
}

/// A multigraph without self-loops.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParams(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParams(format!("self-loop at {u}")));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// The common degree, if every vertex has the same one.
    pub fn regular_degree(&self) -> Option<usize> {
        let deg = self.degrees();
        let first = *deg.first()?;
        deg.iter().all(|&d| d == first).then_some(first)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).unwrap()
    }

    pub fn path(n: usize) -> Self {
        assert!(n >= 1);
        Self::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()).unwrap()
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, edges).unwrap()
    }

    /// The 3-dimensional hypercube.
    pub fn cube() -> Self {
        let mut edges = Vec::new();
        for u in 0..8usize {
            for b in 0..3 {
                let v = u ^ (1 << b);
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        Self::new(8, edges).unwrap()
    }

    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + self.n, v + self.n)));
        Self::new(self.n + other.n, edges).unwrap()
    }
}

/// A spin assignment `V -> {0, ..., q}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment(pub Vec<u32>);

impl Assignment {
    /// Number of vertices in the mixed state.
    pub fn n0(&self) -> usize {
        self.0.iter().filter(|&&s| s == 0).count()
    }
}

/// `prod_{(u,v) in E} B[sigma(u)][sigma(v)]`.
pub fn weight(sigma: &Assignment, g: &Graph, b: &InteractionMatrix) -> Result<Float> {
    if sigma.0.len() != g.n() {
        return Err(Error::InvalidParams("assignment is not total".into()));
    }
    let prec = b.entry(0, 0).prec();
    let mut w = Float::with_val(prec, 1);
    for &(u, v) in g.edges() {
        let (a, c) = (sigma.0[u] as usize, sigma.0[v] as usize);
        if a >= b.size() || c >= b.size() {
            return Err(Error::InvalidParams("spin out of range".into()));
        }
        w *= b.entry(a, c);
        if w.is_zero() {
            break;
        }
    }
    Ok(w)
}

/// Output of [`partition_function_zb`].
#[derive(Clone, Debug)]
pub enum PartitionValue {
    Float(f64),
    Exact(Integer),
}

impl PartitionValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Float(v) => *v,
            Self::Exact(i) => i.to_f64(),
        }
    }
    pub fn as_exact(&self) -> Option<&Integer> {
        match self {
            Self::Exact(i) => Some(i),
            Self::Float(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZbMode {
    Float,
    ExactInteger,
}

pub(crate) fn check_budget(base: u64, n: usize, budget: u64) -> Result<()> {
    let states = (base as f64).powi(n as i32);
    let fits = u32::try_from(n)
        .ok()
        .and_then(|n| base.checked_pow(n))
        .is_some_and(|s| s <= budget);
    if fits {
        Ok(())
    } else {
        Err(Error::TooLarge {
            states: format!("{base}^{n} ~ {states:.3e}"),
            budget,
        })
    }
}

/// Adjacency to earlier vertices: for each `v`, the earlier endpoints of its edges.
fn back_edges(g: &Graph) -> Vec<Vec<usize>> {
    let mut back = vec![Vec::new(); g.n()];
    for &(u, v) in g.edges() {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        back[hi].push(lo);
    }
    back
}

/// Splits the enumeration into prefixes over the first few vertices.
fn prefixes(n: usize, spins: u32) -> Vec<Vec<u32>> {
    let depth = n.min(3);
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..spins).map(move |s| {
                    let mut p = p.clone();
                    p.push(s);
                    p
                })
            })
            .collect();
    }
    out
}

/// Histogram of `n0` over assignments with no pure-colour conflict, for a
/// `Delta`-regular graph every such assignment weighs `(q^k - q)^n0`.
fn zero_histogram(g: &Graph, q: u32) -> Vec<u64> {
    let n = g.n();
    let back = back_edges(g);
    let parts: Vec<Vec<u64>> = prefixes(n, q + 1)
        .into_par_iter()
        .map(|prefix| {
            let mut hist = vec![0u64; n + 1];
            let mut sigma = vec![0u32; n];
            let ok = prefix.iter().enumerate().all(|(v, &s)| {
                sigma[v] = s;
                s == 0 || back[v].iter().all(|&u| sigma[u] != s)
            });
            if ok {
                let zeros = prefix.iter().filter(|&&s| s == 0).count();
                dfs_hist(prefix.len(), zeros, &mut sigma, &back, q, &mut hist);
            }
            hist
        })
        .collect();
    let mut hist = vec![0u64; n + 1];
    for p in parts {
        for (h, c) in hist.iter_mut().zip(p) {
            *h += c;
        }
    }
    hist
}

fn dfs_hist(v: usize, zeros: usize, sigma: &mut [u32], back: &[Vec<usize>], q: u32, hist: &mut [u64]) {
    if v == sigma.len() {
        hist[zeros] += 1;
        return;
    }
    for s in 0..=q {
        if s != 0 && back[v].iter().any(|&u| sigma[u] == s) {
            continue;
        }
        sigma[v] = s;
        dfs_hist(v + 1, zeros + usize::from(s == 0), sigma, back, q, hist);
    }
}

/// Sum of edge-weight products over all assignments for an arbitrary matrix.
pub fn partition_function_matrix(g: &Graph, b: &[Vec<f64>], budget: u64) -> Result<f64> {
    let spins = b.len() as u32;
    check_budget(u64::from(spins), g.n(), budget)?;
    let back = back_edges(g);
    let n = g.n();
    let total: f64 = prefixes(n, spins)
        .into_par_iter()
        .map(|prefix| {
            let mut sigma = vec![0u32; n];
            let mut w = 1.0;
            for (v, &s) in prefix.iter().enumerate() {
                sigma[v] = s;
                for &u in &back[v] {
                    w *= b[sigma[u] as usize][s as usize];
                }
            }
            if w == 0.0 {
                return 0.0;
            }
            dfs_matrix(prefix.len(), w, &mut sigma, &back, b)
        })
        .sum();
    Ok(total)
}

fn dfs_matrix(v: usize, w: f64, sigma: &mut [u32], back: &[Vec<usize>], b: &[Vec<f64>]) -> f64 {
    if v == sigma.len() {
        return w;
    }
    let mut acc = 0.0;
    for s in 0..b.len() {
        let mut w2 = w;
        for &u in &back[v] {
            w2 *= b[sigma[u] as usize][s];
        }
        if w2 == 0.0 {
            continue;
        }
        sigma[v] = s as u32;
        acc += dfs_matrix(v + 1, w2, sigma, back, b);
    }
    acc
}

/// `Z_B(G)` by exhaustive enumeration of the `(q+1)^n` assignments.
pub fn partition_function_zb(
    g: &Graph,
    params: &ModelParams,
    mode: ZbMode,
    budget: u64,
) -> Result<PartitionValue> {
    check_budget(u64::from(params.q()) + 1, g.n(), budget)?;
    match mode {
        ZbMode::Float => {
            let b = InteractionMatrix::new(params).to_f64();
            Ok(PartitionValue::Float(partition_function_matrix(g, &b, budget)?))
        }
        ZbMode::ExactInteger => {
            let delta = g.regular_degree().unwrap_or(0);
            if g.n() > 0 && (delta != params.delta() as usize || g.regular_degree().is_none()) {
                return Err(Error::NotRegular);
            }
            let hist = zero_histogram(g, params.q());
            let base = Integer::from(params.weight_base());
            let mut z = Integer::new();
            for (n0, &count) in hist.iter().enumerate() {
                if count > 0 {
                    z += Integer::from((&base).pow(n0 as u32)) * count;
                }
            }
            Ok(PartitionValue::Exact(z))
        }
    }
}

/// Number of monochromatic edges under `sigma`.
pub fn mono_count(g: &Graph, sigma: &[u32]) -> usize {
    g.edges().iter().filter(|&&(u, v)| sigma[u] == sigma[v]).count()
}

/// Histogram over `q^n` colourings of the number of monochromatic edges.
pub fn mono_histogram(g: &Graph, q: u32, budget: u64) -> Result<Vec<u64>> {
    check_budget(u64::from(q), g.n(), budget)?;
    let n = g.n();
    let back = back_edges(g);
    let m = g.m();
    let parts: Vec<Vec<u64>> = prefixes(n, q)
        .into_par_iter()
        .map(|prefix| {
            let mut hist = vec![0u64; m + 1];
            let mut sigma = vec![0u32; n];
            let mut mono = 0;
            for (v, &s) in prefix.iter().enumerate() {
                sigma[v] = s;
                mono += back[v].iter().filter(|&&u| sigma[u] == s).count();
            }
            dfs_mono(prefix.len(), mono, &mut sigma, &back, q, &mut hist);
            hist
        })
        .collect();
    let mut hist = vec![0u64; m + 1];
    for p in parts {
        for (h, c) in hist.iter_mut().zip(p) {
            *h += c;
        }
    }
    Ok(hist)
}

fn dfs_mono(v: usize, mono: usize, sigma: &mut [u32], back: &[Vec<usize>], q: u32, hist: &mut [u64]) {
    if v == sigma.len() {
        hist[mono] += 1;
        return;
    }
    for s in 0..q {
        sigma[v] = s;
        let add = back[v].iter().filter(|&&u| sigma[u] == s).count();
        dfs_mono(v + 1, mono + add, sigma, back, q, hist);
    }
}

/// `sum_sigma B^Mono(G, sigma)` in floating point.
pub fn potts_partition(g: &Graph, q: u32, b: f64, budget: u64) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::InvalidParams("Potts weight must be nonnegative".into()));
    }
    let hist = mono_histogram(g, q, budget)?;
    Ok(hist
        .iter()
        .enumerate()
        .map(|(m, &c)| c as f64 * b.powi(m as i32))
        .sum())
}

/// `sum_sigma B^Mono(G, sigma)` in exact rational arithmetic.
pub fn potts_partition_exact(g: &Graph, q: u32, b: &Rational, budget: u64) -> Result<Rational> {
    if b.cmp0() == std::cmp::Ordering::Less {
        return Err(Error::InvalidParams("Potts weight must be nonnegative".into()));
    }
    let hist = mono_histogram(g, q, budget)?;
    let mut z = Rational::new();
    for (m, &c) in hist.iter().enumerate() {
        if c > 0 {
            z += Rational::from(b.pow(m as i32)) * Integer::from(c);
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: u32, k: u32, delta: u32) -> ModelParams {
        ModelParams::new(q, k, delta, PrecisionContext::extended()).unwrap()
    }

    #[test]
    fn t_values() {
        let p = params(4, 2, 81);
        let t = p.t().to_f64();
        assert!((t - (12f64.ln() / 81.0).exp()).abs() < 1e-15);
        assert!((1.0..=1.0312).contains(&t));
        assert!(p.is_proven_regime());
        let p = params(2, 2, 2);
        let t2 = Float::with_val(256, p.t().square_ref());
        assert!(Float::with_val(256, t2 - 2u32).abs() < 1e-70);
        assert!(matches!(
            ModelParams::new(2, 1, 5, PrecisionContext::extended()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn matrix_shape_and_spectrum() {
        let p = params(4, 2, 81);
        let b = InteractionMatrix::new(&p);
        assert_eq!(b.size(), 5);
        let t = p.t().to_f64();
        assert!((b.entry(0, 0).to_f64() - t * t).abs() < 1e-15);
        assert_eq!(*b.entry(1, 1), 0);
        assert_eq!(*b.entry(2, 3), 1);
        let ev: Vec<f64> = b.eigenvalues().iter().map(|x| x.to_f64()).collect();
        let minus_ones = ev.iter().filter(|&&x| (x + 1.0).abs() < 1e-30).count();
        assert_eq!(minus_ones, 3);
        let rest: Vec<f64> = ev.iter().copied().filter(|x| (x + 1.0).abs() >= 1e-30).collect();
        assert_eq!(rest.len(), 2);
        assert!((rest[0] + rest[1] - (3.0 + t * t)).abs() < 1e-12);
        assert!((rest[0] * rest[1] + t * t).abs() < 1e-12);
    }

    #[test]
    fn weights_on_triangle() {
        let p = params(3, 2, 2);
        let b = InteractionMatrix::new(&p);
        let g = Graph::cycle(3);
        assert_eq!(weight(&Assignment(vec![1, 1, 1]), &g, &b).unwrap(), 0);
        assert_eq!(weight(&Assignment(vec![1, 2, 3]), &g, &b).unwrap(), 1);
        // one mixed vertex on a 2-regular graph: t^2 = q^k - q = 6
        let w = weight(&Assignment(vec![0, 1, 2]), &g, &b).unwrap();
        assert!((w.to_f64() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_z_is_44() {
        let p = params(2, 2, 2);
        let g = Graph::cycle(3);
        let exact = partition_function_zb(&g, &p, ZbMode::ExactInteger, DEFAULT_BUDGET).unwrap();
        assert_eq!(*exact.as_exact().unwrap(), 44);
        let fl = partition_function_zb(&g, &p, ZbMode::Float, DEFAULT_BUDGET).unwrap();
        assert!((fl.to_f64() - 44.0).abs() < 1e-9);
        let tr = InteractionMatrix::new(&p).trace_power(3).to_f64();
        assert!((tr - 44.0).abs() < 1e-9);
    }

    #[test]
    fn isolated_vertex_and_budget() {
        let p = params(3, 2, 3);
        let g = Graph::new(1, vec![]).unwrap();
        let z = partition_function_zb(&g, &p, ZbMode::Float, DEFAULT_BUDGET).unwrap();
        assert_eq!(z.to_f64(), 4.0);
        let big = Graph::new(30, vec![]).unwrap();
        assert!(matches!(
            partition_function_zb(&big, &p, ZbMode::Float, DEFAULT_BUDGET),
            Err(Error::TooLarge { .. })
        ));
        let path = Graph::path(3);
        assert!(matches!(
            partition_function_zb(&path, &p, ZbMode::ExactInteger, DEFAULT_BUDGET),
            Err(Error::NotRegular)
        ));
    }

    #[test]
    fn potts_basics() {
        let g = Graph::cycle(3);
        assert_eq!(potts_partition(&g, 3, 1.0, DEFAULT_BUDGET).unwrap(), 27.0);
        assert_eq!(potts_partition(&g, 3, 0.0, DEFAULT_BUDGET).unwrap(), 6.0);
        assert_eq!(mono_count(&g, &[2, 2, 2]), 3);
        let z = potts_partition_exact(&g, 2, &Rational::from((1, 2)), DEFAULT_BUDGET).unwrap();
        // 2 all-same (b^3) + 6 with one monochromatic edge
        assert_eq!(z, Rational::from((2, 8)) + Rational::from((6, 2)));
    }
}
