//! Halving, gadget discovery by trimming, the equality and Potts edge gadgets,
//! and parallel-edge powering.

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{count_colourings, count_colourings_by_elimination, for_each_proper, Hypergraph};
use crate::spin::{check_budget, potts_partition_exact, Graph};

/// Each vertex `v` becomes clones `v*k .. v*k + k`; each edge one `2k`-hyperedge.
pub fn halve(g: &Graph, k: usize) -> Hypergraph {
    let edges = g
        .edges()
        .iter()
        .map(|&(u, v)| (0..k).map(|i| u * k + i).chain((0..k).map(|i| v * k + i)).collect())
        .collect();
    Hypergraph::new(g.n() * k, edges).expect("halving a loopless graph gives valid hyperedges")
}

/// Removes hyperedges in input order while the hypergraph stays uncolourable.
///
/// A single pass suffices: removing edges only adds colourings, so an edge
/// that was needed stays needed.
pub fn trim_to_minimal(h: &Hypergraph, q: u32, budget: u64) -> Result<Hypergraph> {
    if count_colourings(h, q, budget)? > 0 {
        return Err(Error::NotUncolourable(q));
    }
    let mut current = h.clone();
    let mut i = 0;
    while i < current.m() {
        let candidate = current.without_edge(i);
        if count_colourings(&candidate, q, budget)? == 0 {
            current = candidate;
        } else {
            i += 1;
        }
    }
    Ok(current)
}

/// Whether every single-edge deletion makes `h` colourable.
pub fn is_minimal_uncolourable(h: &Hypergraph, q: u32, budget: u64) -> Result<bool> {
    if count_colourings(h, q, budget)? > 0 {
        return Ok(false);
    }
    for i in 0..h.m() {
        if count_colourings(&h.without_edge(i), q, budget)? == 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GadgetKind {
    Disequality,
    Equality,
}

impl GadgetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Disequality => "disequality",
            Self::Equality => "equality",
        }
    }
}

/// A hypergraph with two pinned vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gadget {
    pub h: Hypergraph,
    pub u: usize,
    pub v: usize,
    pub kind: GadgetKind,
    pub q: u32,
    /// Colourings per admissible ordered colour pair of `(u, v)`.
    pub c0: u64,
}

/// Proper-colouring counts by the colour pair on `(u, v)`.
pub fn pair_counts(h: &Hypergraph, u: usize, v: usize, q: u32, budget: u64) -> Result<Vec<Vec<u64>>> {
    check_budget(u64::from(q), h.n(), budget)?;
    let mut counts = vec![vec![0u64; q as usize]; q as usize];
    for_each_proper(h, q, &mut |sigma| {
        counts[sigma[u] as usize][sigma[v] as usize] += 1;
    });
    Ok(counts)
}

/// Re-derives the gadget property and `C0` by enumeration.
pub fn verify_gadget(g: &Gadget, budget: u64) -> Result<u64> {
    let counts = pair_counts(&g.h, g.u, g.v, g.q, budget)?;
    let q = g.q as usize;
    let mut c0 = None;
    for i in 0..q {
        for j in 0..q {
            let allowed = match g.kind {
                GadgetKind::Disequality => i != j,
                GadgetKind::Equality => i == j,
            };
            let c = counts[i][j];
            if !allowed {
                if c != 0 {
                    return Err(Error::GadgetVerification(format!(
                        "{} colourings put colours ({i}, {j}) on (u, v)",
                        c
                    )));
                }
            } else if *c0.get_or_insert(c) != c {
                return Err(Error::GadgetVerification(format!(
                    "pair counts are not uniform: {counts:?}"
                )));
            }
        }
    }
    let c0 = c0.unwrap_or(0);
    if c0 == 0 {
        return Err(Error::GadgetVerification("gadget has no colourings".into()));
    }
    if g.h.degree(g.u) != 1 {
        return Err(Error::GadgetVerification(format!(
            "degree(u) = {}, expected 1",
            g.h.degree(g.u)
        )));
    }
    if g.kind == GadgetKind::Equality && g.h.degree(g.v) != 1 {
        return Err(Error::GadgetVerification(format!(
            "degree(v) = {}, expected 1",
            g.h.degree(g.v)
        )));
    }
    Ok(c0)
}

/// Splits the lexicographically first hyperedge of a minimal uncolourable
/// hypergraph until it becomes colourable.
pub fn build_disequality_gadget(h_min: &Hypergraph, q: u32, budget: u64) -> Result<Gadget> {
    let (ei, e) = h_min
        .edges()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .ok_or_else(|| Error::InvalidParams("hypergraph has no edges".into()))?;
    let rest = h_min.without_edge(ei);
    let deg = rest.degrees();
    let mut s: Vec<usize> = e.iter().copied().filter(|&v| deg[v] > 0).collect();
    if s.is_empty() {
        return Err(Error::EmptyS(ei));
    }
    s.sort_unstable();
    let mut order = s.clone();
    order.extend(e.iter().copied().filter(|v| !s.contains(v)));
    let n = h_min.n();
    for j in 1..=s.len() {
        let fresh: Vec<usize> = (n..n + j).collect();
        let ej: Vec<usize> = fresh.iter().copied().chain(order[j..].iter().copied()).collect();
        let mut edges = rest.edges().to_vec();
        edges.push(ej);
        let hj = Hypergraph::new(n + j, edges)?;
        if count_colourings(&hj, q, budget)? > 0 {
            let mut gadget = Gadget {
                h: hj,
                u: n + j - 1,
                v: order[j - 1],
                kind: GadgetKind::Disequality,
                q,
                c0: 0,
            };
            gadget.c0 = verify_gadget(&gadget, budget)?;
            return Ok(gadget);
        }
    }
    Err(Error::GadgetVerification(
        "every H_j stayed uncolourable; the input was not minimal".into(),
    ))
}

/// Two disequality copies sharing their `v`: `u != w != v` forces `u = v` for `q = 2`.
pub fn build_equality_gadget(dis: &Gadget, budget: u64) -> Result<Gadget> {
    if dis.q != 2 {
        return Err(Error::WrongQ(dis.q));
    }
    let n = dis.h.n();
    let map_b = |x: usize| -> usize {
        if x == dis.v {
            dis.v
        } else if x < dis.v {
            n + x
        } else {
            n + x - 1
        }
    };
    let mut edges = dis.h.edges().to_vec();
    edges.extend(dis.h.edges().iter().map(|e| e.iter().map(|&x| map_b(x)).collect()));
    let h = Hypergraph::new(2 * n - 1, edges)?;
    let mut gadget = Gadget {
        h,
        u: dis.u,
        v: map_b(dis.u),
        kind: GadgetKind::Equality,
        q: 2,
        c0: 0,
    };
    gadget.c0 = verify_gadget(&gadget, budget)?;
    Ok(gadget)
}

/// Where the gadget copies of one graph edge landed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeReplacement {
    pub edge: (usize, usize),
    pub w1: usize,
    pub w2: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PottsReplacement {
    pub h: Hypergraph,
    pub edges: Vec<EdgeReplacement>,
}

/// Replaces each edge `(u, v)` by gadget copies on `(u, w1)`, `(w2, w1)`, `(v, w2)`.
pub fn potts_edge_gadget_replace(g: &Graph, dis: &Gadget) -> Result<PottsReplacement> {
    let gn = dis.h.n();
    let internal: Vec<usize> = (0..gn).filter(|&x| x != dis.u && x != dis.v).collect();
    let mut next = g.n();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut record = Vec::new();
    let place = |a: usize, b: usize, next: &mut usize, edges: &mut Vec<Vec<usize>>| {
        let mut map = vec![usize::MAX; gn];
        map[dis.u] = a;
        map[dis.v] = b;
        for &x in &internal {
            map[x] = *next;
            *next += 1;
        }
        edges.extend(dis.h.edges().iter().map(|e| e.iter().map(|&x| map[x]).collect()));
    };
    for &(a, b) in g.edges() {
        let w1 = next;
        let w2 = next + 1;
        next += 2;
        place(a, w1, &mut next, &mut edges);
        place(w2, w1, &mut next, &mut edges);
        place(b, w2, &mut next, &mut edges);
        record.push(EdgeReplacement { edge: (a, b), w1, w2 });
    }
    let h = Hypergraph::new(next, edges)?;

    let deg = h.degrees();
    let d0 = dis.h.max_degree();
    let gdeg = g.degrees();
    for r in &record {
        if deg[r.w1] > 2 * d0 || deg[r.w2] > d0 + 1 {
            return Err(Error::GadgetVerification(format!(
                "degree bound violated at w1 = {} or w2 = {}",
                r.w1, r.w2
            )));
        }
    }
    if (0..g.n()).any(|v| deg[v] != gdeg[v]) {
        return Err(Error::GadgetVerification(
            "original vertices changed degree".into(),
        ));
    }
    Ok(PottsReplacement { h, edges: record })
}

/// `B = 1 - 1/(q^2 - 3q + 3)`.
pub fn potts_weight(q: u32) -> Rational {
    let q = i64::from(q);
    Rational::from(1) - Rational::from((1, q * q - 3 * q + 3))
}

/// `C = ((q-2)^2 + (q-1)) * C0^3`.
pub fn potts_constant(q: u32, c0: u64) -> Integer {
    let q = i64::from(q);
    Integer::from((q - 2) * (q - 2) + (q - 1)) * Integer::from(c0).pow(3)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PottsIdentityReport {
    pub z_col: String,
    pub c: String,
    pub b: String,
    pub z_potts: String,
    pub edges: usize,
    pub hypergraph_vertices: usize,
    pub method: String,
    pub holds: bool,
}

/// Checks `Z_col(H_G) = C^|E| Z_potts(G, B)` exactly.
pub fn verify_potts_identity(g: &Graph, dis: &Gadget, budget: u64) -> Result<PottsIdentityReport> {
    if dis.kind != GadgetKind::Disequality {
        return Err(Error::InvalidParams("Potts replacement needs a disequality gadget".into()));
    }
    let c0 = verify_gadget(dis, budget)?;
    let rep = potts_edge_gadget_replace(g, dis)?;
    let q = dis.q;
    let (z_col, method) = if check_budget(u64::from(q), rep.h.n(), budget).is_ok() {
        (Integer::from(count_colourings(&rep.h, q, budget)?), "enumeration")
    } else {
        (count_colourings_by_elimination(&rep.h, q)?, "elimination")
    };
    let b = potts_weight(q);
    let c = potts_constant(q, c0);
    let z_potts = potts_partition_exact(g, q, &b, budget)?;
    let rhs = Rational::from(c.clone().pow(g.m() as u32)) * &z_potts;
    let holds = Rational::from(z_col.clone()) == rhs;
    Ok(PottsIdentityReport {
        z_col: z_col.to_string(),
        c: c.to_string(),
        b: b.to_string(),
        z_potts: z_potts.to_string(),
        edges: g.m(),
        hypergraph_vertices: rep.h.n(),
        method: method.into(),
        holds,
    })
}

/// Each edge repeated `s` times in place.
pub fn parallel_power(g: &Graph, s: usize) -> Result<Graph> {
    if s == 0 {
        return Err(Error::InvalidParams("s must be at least 1".into()));
    }
    let edges = g
        .edges()
        .iter()
        .flat_map(|&e| std::iter::repeat_n(e, s))
        .collect();
    Graph::new(g.n(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::DEFAULT_BUDGET;

    #[test]
    fn halve_shapes() {
        let h = halve(&Graph::cycle(3), 2);
        assert_eq!(h.n(), 6);
        assert_eq!(h.m(), 3);
        assert_eq!(h.arity(), Some(4));
        assert_eq!(h.degrees(), vec![2; 6]);
        let h = halve(&Graph::path(2), 3);
        assert_eq!(h.edges(), &[vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn fano_trim() {
        let f = Hypergraph::fano();
        assert_eq!(trim_to_minimal(&f, 2, DEFAULT_BUDGET).unwrap(), f);
        let plus = f.with_edge(vec![0, 1, 2]).unwrap();
        assert_eq!(trim_to_minimal(&plus, 2, DEFAULT_BUDGET).unwrap().m(), 7);
        assert!(matches!(
            trim_to_minimal(&Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap(), 2, DEFAULT_BUDGET),
            Err(Error::NotUncolourable(2))
        ));
    }

    #[test]
    fn fano_gadgets() {
        let dis = build_disequality_gadget(&Hypergraph::fano(), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(dis.h.degree(dis.u), 1);
        assert!(dis.h.degree(dis.v) <= 3);
        assert!(dis.c0 > 0);
        let eq = build_equality_gadget(&dis, DEFAULT_BUDGET).unwrap();
        assert_eq!(eq.kind, GadgetKind::Equality);
        assert!(eq.h.max_degree() <= 2 * dis.h.max_degree());
    }

    #[test]
    fn potts_weights() {
        assert_eq!(potts_weight(3), Rational::from((2, 3)));
        assert_eq!(potts_weight(2), 0);
    }

    #[test]
    fn powering() {
        let g = Graph::cycle(3);
        assert_eq!(parallel_power(&g, 1).unwrap(), g);
        let g2 = parallel_power(&g, 2).unwrap();
        assert_eq!(g2.m(), 6);
        let a = potts_partition_exact(&g2, 2, &Rational::from((1, 2)), DEFAULT_BUDGET).unwrap();
        let b = potts_partition_exact(&g, 2, &Rational::from((1, 4)), DEFAULT_BUDGET).unwrap();
        assert_eq!(a, b);
    }
}
