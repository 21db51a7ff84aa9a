//! Hypergraphs, exact colouring counts, the halving fiber map and the pairing-model sampler.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{check_budget, Assignment, Graph};

/// Name of the generator used by [`sample_configuration_model`].
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3)";

/// A hypergraph whose hyperedges are stored as sorted vertex lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut sorted = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            if e.is_empty() {
                return Err(Error::InvalidParams(format!("hyperedge {i} is empty")));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParams(format!(
                    "hyperedge {i} repeats a vertex"
                )));
            }
            if *e.last().unwrap() >= n {
                return Err(Error::InvalidParams(format!(
                    "hyperedge {i} has a vertex out of range for n = {n}"
                )));
            }
            sorted.push(e);
        }
        Ok(Self { n, edges: sorted })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// The common hyperedge size, if all hyperedges have the same one.
    pub fn arity(&self) -> Option<usize> {
        let first = self.edges.first()?.len();
        self.edges.iter().all(|e| e.len() == first).then_some(first)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.binary_search(&v).is_ok()).count()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn without_edge(&self, i: usize) -> Self {
        let mut edges = self.edges.clone();
        edges.remove(i);
        Self { n: self.n, edges }
    }

    pub fn with_edge(&self, e: Vec<usize>) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.push(e);
        Self::new(self.n, edges)
    }

    /// Every pair of distinct hyperedges shares at most one vertex.
    pub fn is_simple(&self) -> bool {
        for (i, a) in self.edges.iter().enumerate() {
            for b in &self.edges[i + 1..] {
                if a.iter().filter(|v| b.binary_search(v).is_ok()).count() > 1 {
                    return false;
                }
            }
        }
        true
    }

    /// The Fano plane: 7 points, 7 lines of 3.
    pub fn fano() -> Self {
        let lines = (0..7)
            .map(|i| vec![i, (i + 1) % 7, (i + 3) % 7])
            .collect();
        Self::new(7, lines).unwrap()
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    /// Whether `colouring` leaves every hyperedge non-monochromatic.
    pub fn first_monochromatic(&self, colouring: &[u32]) -> Option<usize> {
        self.edges.iter().position(|e| {
            let c = colouring[e[0]];
            e.iter().all(|&v| colouring[v] == c)
        })
    }
}

/// For each vertex `v`, the hyperedges whose largest vertex is `v`.
fn closing_edges(h: &Hypergraph) -> Vec<Vec<usize>> {
    let mut closing = vec![Vec::new(); h.n()];
    for (i, e) in h.edges().iter().enumerate() {
        closing[*e.last().unwrap()].push(i);
    }
    closing
}

fn edge_mono(e: &[usize], sigma: &[u32]) -> bool {
    let c = sigma[e[0]];
    e.iter().all(|&v| sigma[v] == c)
}

/// Depth-first walk over proper colourings; calls `visit` at each leaf.
pub(crate) fn for_each_proper<F: FnMut(&[u32])>(h: &Hypergraph, q: u32, visit: &mut F) {
    let closing = closing_edges(h);
    let mut sigma = vec![0u32; h.n()];
    walk(0, h, q, &closing, &mut sigma, visit);
}

fn walk<F: FnMut(&[u32])>(
    v: usize,
    h: &Hypergraph,
    q: u32,
    closing: &[Vec<usize>],
    sigma: &mut [u32],
    visit: &mut F,
) {
    if v == sigma.len() {
        visit(sigma);
        return;
    }
    for c in 0..q {
        sigma[v] = c;
        if closing[v].iter().any(|&i| edge_mono(&h.edges()[i], sigma)) {
            continue;
        }
        walk(v + 1, h, q, closing, sigma, visit);
    }
}

fn count_from(v: usize, h: &Hypergraph, q: u32, closing: &[Vec<usize>], sigma: &mut [u32]) -> u64 {
    if v == sigma.len() {
        return 1;
    }
    let mut total = 0;
    for c in 0..q {
        sigma[v] = c;
        if closing[v].iter().any(|&i| edge_mono(&h.edges()[i], sigma)) {
            continue;
        }
        total += count_from(v + 1, h, q, closing, sigma);
    }
    total
}

/// Number of `q`-colourings with no monochromatic hyperedge, by enumeration.
pub fn count_colourings(h: &Hypergraph, q: u32, budget: u64) -> Result<u64> {
    check_budget(u64::from(q), h.n(), budget)?;
    let n = h.n();
    if n == 0 {
        return Ok(1);
    }
    let closing = closing_edges(h);
    // colour symmetry: fix vertex 0 to colour 0 and multiply by q
    let firsts: Vec<Vec<u32>> = if n >= 2 {
        (0..q).map(|c| vec![0, c]).collect()
    } else {
        vec![vec![0]]
    };
    let total: u64 = firsts
        .into_par_iter()
        .map(|prefix| {
            let mut sigma = vec![0u32; n];
            for (v, &c) in prefix.iter().enumerate() {
                sigma[v] = c;
                if closing[v].iter().any(|&i| edge_mono(&h.edges()[i], &sigma)) {
                    return 0;
                }
            }
            count_from(prefix.len(), h, q, &closing, &mut sigma)
        })
        .sum();
    Ok(total * u64::from(q))
}

/// Largest table an elimination step may create.
const ELIMINATION_TABLE_CAP: u64 = 1 << 26;

struct Factor {
    scope: Vec<usize>,
    table: Vec<u128>,
}

/// Exact colouring count by bucket elimination, for instances beyond brute force.
pub fn count_colourings_by_elimination(h: &Hypergraph, q: u32) -> Result<Integer> {
    let qs = q as usize;
    let overflow = || Error::TooLarge {
        states: "elimination count overflowed u128".into(),
        budget: u64::MAX,
    };
    let mut factors: Vec<Factor> = h
        .edges()
        .iter()
        .map(|e| {
            let size = qs.pow(e.len() as u32);
            let mut table = vec![1u128; size];
            for c in 0..qs {
                // all digits equal to c
                let idx: usize = (0..e.len()).map(|i| c * qs.pow(i as u32)).sum();
                table[idx] = 0;
            }
            Factor {
                scope: e.clone(),
                table,
            }
        })
        .collect();
    let mut result = Integer::from(1);
    let mut remaining: BTreeSet<usize> = (0..h.n()).collect();
    while !remaining.is_empty() {
        // min-size union scope
        let mut best: Option<(usize, usize)> = None;
        for &v in &remaining {
            let mut union: BTreeSet<usize> = BTreeSet::new();
            for f in factors.iter().filter(|f| f.scope.contains(&v)) {
                union.extend(f.scope.iter().copied());
            }
            if best.is_none_or(|(_, s)| union.len() < s) {
                best = Some((v, union.len()));
            }
        }
        let (v, _) = best.unwrap();
        remaining.remove(&v);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.scope.contains(&v));
        factors = rest;
        if touching.is_empty() {
            result *= q;
            continue;
        }
        let mut union: Vec<usize> = touching
            .iter()
            .flat_map(|f| f.scope.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        union.retain(|&x| x != v);
        (q as u64)
            .checked_pow(union.len() as u32 + 1)
            .filter(|&s| s <= ELIMINATION_TABLE_CAP)
            .ok_or_else(|| Error::TooLarge {
                states: format!("{q}^{} elimination table", union.len() + 1),
                budget: ELIMINATION_TABLE_CAP,
            })?;
        let full: Vec<usize> = std::iter::once(v).chain(union.iter().copied()).collect();
        let strides: Vec<Vec<usize>> = touching
            .iter()
            .map(|f| {
                full.iter()
                    .map(|x| {
                        f.scope
                            .iter()
                            .position(|y| y == x)
                            .map_or(0, |p| qs.pow(p as u32))
                    })
                    .collect()
            })
            .collect();
        let new_size = qs.pow(union.len() as u32);
        let table: Vec<u128> = (0..new_size)
            .into_par_iter()
            .map(|rest_idx| {
                let mut digits = vec![0usize; full.len()];
                let mut r = rest_idx;
                for d in digits.iter_mut().skip(1) {
                    *d = r % qs;
                    r /= qs;
                }
                let mut sum: u128 = 0;
                for c in 0..qs {
                    digits[0] = c;
                    let mut prod: u128 = 1;
                    for (f, st) in touching.iter().zip(&strides) {
                        let idx: usize = digits.iter().zip(st).map(|(d, s)| d * s).sum();
                        prod = prod.checked_mul(f.table[idx])?;
                        if prod == 0 {
                            break;
                        }
                    }
                    sum = sum.checked_add(prod)?;
                }
                Some(sum)
            })
            .collect::<Option<Vec<u128>>>()
            .ok_or_else(overflow)?;
        if union.is_empty() {
            result *= Integer::from(table[0]);
        } else {
            factors.push(Factor { scope: union, table });
        }
    }
    for f in factors {
        // only constant factors can remain
        result *= Integer::from(f.table[0]);
    }
    Ok(result)
}

/// `phi(tau)(v) = i` when all `k` clones of `v` share colour `i`, else 0.
///
/// Colours in `tau` are `0..q`; pure spins in the result are `1..=q`.
pub fn phi_map(tau: &[u32], g: &Graph, k: usize) -> Result<Assignment> {
    if tau.len() != g.n() * k {
        return Err(Error::InvalidParams(format!(
            "colouring has {} entries, expected {}",
            tau.len(),
            g.n() * k
        )));
    }
    let hg = crate::reductions::halve(g, k);
    if let Some(i) = hg.first_monochromatic(tau) {
        return Err(Error::NotProper(i));
    }
    Ok(phi_unchecked(tau, g.n(), k))
}

pub(crate) fn phi_unchecked(tau: &[u32], n: usize, k: usize) -> Assignment {
    Assignment(
        (0..n)
            .map(|v| {
                let clones = &tau[v * k..(v + 1) * k];
                if clones.iter().all(|&c| c == clones[0]) {
                    clones[0] + 1
                } else {
                    0
                }
            })
            .collect(),
    )
}

/// `(q^k - q)^{n0(sigma)}`.
pub fn fiber_size(sigma: &Assignment, k: u32, q: u32) -> Integer {
    let base = Integer::from(Integer::u_pow_u(q, k)) - q;
    base.pow(sigma.n0() as u32)
}

/// One draw of the pairing model: the ordered `K`-tuples as drawn.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigurationSample {
    pub n: usize,
    pub delta: usize,
    pub arity: usize,
    pub seed: u64,
    pub rng: String,
    pub tuples: Vec<Vec<usize>>,
}

impl ConfigurationSample {
    /// Some tuple repeats a vertex.
    pub fn has_degenerate_edge(&self) -> bool {
        self.tuples.iter().any(|t| {
            let s: BTreeSet<_> = t.iter().collect();
            s.len() < t.len()
        })
    }

    /// Brute-force simplicity test on the raw tuples read as multisets.
    pub fn is_simple(&self) -> bool {
        if self.has_degenerate_edge() {
            return false;
        }
        for (i, a) in self.tuples.iter().enumerate() {
            for b in &self.tuples[i + 1..] {
                let shared = a.iter().filter(|v| b.contains(v)).count();
                if shared > 1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for t in &self.tuples {
            for &v in t {
                deg[v] += 1;
            }
        }
        deg
    }

    /// The multihypergraph, failing on tuples with a repeated vertex.
    pub fn to_hypergraph(&self) -> Result<Hypergraph> {
        Hypergraph::new(self.n, self.tuples.clone())
    }
}

fn draw(n: usize, delta: usize, arity: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, delta)).collect();
    points.shuffle(rng);
    points.chunks(arity).map(|c| c.to_vec()).collect()
}

/// A `Delta`-regular `K`-uniform multihypergraph from a uniform pairing.
pub fn sample_configuration_model(
    n: usize,
    delta: usize,
    arity: usize,
    seed: u64,
) -> Result<ConfigurationSample> {
    if arity == 0 {
        return Err(Error::InvalidParams("arity must be positive".into()));
    }
    let total = (n * delta) as u64;
    if total % arity as u64 != 0 {
        return Err(Error::Indivisible(total, arity));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ConfigurationSample {
        n,
        delta,
        arity,
        seed,
        rng: RNG_NAME.into(),
        tuples: draw(n, delta, arity, &mut rng),
    })
}

/// Rejection sampling for a simple instance; returns it with the number of draws used.
pub fn sample_simple_hypergraph(
    n: usize,
    delta: usize,
    arity: usize,
    seed: u64,
    max_retries: usize,
) -> Result<(Hypergraph, usize)> {
    let total = (n * delta) as u64;
    if arity == 0 || total % arity as u64 != 0 {
        return Err(Error::Indivisible(total, arity));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=max_retries {
        let sample = ConfigurationSample {
            n,
            delta,
            arity,
            seed,
            rng: RNG_NAME.into(),
            tuples: draw(n, delta, arity, &mut rng),
        };
        if sample.is_simple() {
            return Ok((sample.to_hypergraph()?, attempt));
        }
    }
    Err(Error::MaxIters(max_retries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::DEFAULT_BUDGET;

    #[test]
    fn single_edge_and_empty() {
        let h = Hypergraph::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(count_colourings(&h, 3, DEFAULT_BUDGET).unwrap(), 78);
        assert_eq!(count_colourings(&Hypergraph::empty(5), 2, DEFAULT_BUDGET).unwrap(), 32);
        assert_eq!(count_colourings(&Hypergraph::empty(0), 2, DEFAULT_BUDGET).unwrap(), 1);
    }

    #[test]
    fn fano_facts() {
        let f = Hypergraph::fano();
        assert_eq!(count_colourings(&f, 2, DEFAULT_BUDGET).unwrap(), 0);
        assert!(f.is_simple());
        assert_eq!(f.degrees(), vec![3; 7]);
        let dup = Hypergraph::new(3, vec![vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        assert!(!dup.is_simple());
        assert!(Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap().is_simple());
    }

    #[test]
    fn elimination_matches_brute_force() {
        let f = Hypergraph::fano();
        for q in 2..=3 {
            let a = count_colourings(&f, q, DEFAULT_BUDGET).unwrap();
            let b = count_colourings_by_elimination(&f, q).unwrap();
            assert_eq!(b, a);
        }
        let h = Hypergraph::new(6, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 0]]).unwrap();
        assert_eq!(
            count_colourings_by_elimination(&h, 2).unwrap(),
            count_colourings(&h, 2, DEFAULT_BUDGET).unwrap()
        );
    }

    #[test]
    fn sampler_shapes() {
        let s = sample_configuration_model(6, 2, 3, 7).unwrap();
        assert_eq!(s.tuples.len(), 4);
        assert_eq!(s.degrees(), vec![2; 6]);
        let s = sample_configuration_model(4, 3, 3, 1).unwrap();
        assert_eq!(s.tuples.len(), 4);
        assert!(matches!(
            sample_configuration_model(5, 2, 3, 0),
            Err(Error::Indivisible(10, 3))
        ));
        let again = sample_configuration_model(4, 3, 3, 1).unwrap();
        assert_eq!(s.tuples, again.tuples);
    }

    #[test]
    fn fiber_sizes() {
        assert_eq!(fiber_size(&Assignment(vec![1, 2, 1]), 2, 2), 1);
        assert_eq!(fiber_size(&Assignment(vec![0, 2, 1]), 2, 2), 2);
    }
}
