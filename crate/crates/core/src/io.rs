//! Plain-text instance formats.
//!
//! Graphs: a header `n m`, then `m` lines `u v`. Hypergraphs: a header `n m K`,
//! then `m` lines of `K` vertices. Gadgets: a hypergraph followed by a trailer
//! `u v kind C0`. Vertices are 0-based; blank lines and `#` comments are skipped.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::reductions::{Gadget, GadgetKind};
use crate::spin::Graph;

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty())
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {line}: expected a non-negative integer, got {s:?}")))
}

fn header<'a>(it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>, width: usize) -> Result<(usize, Vec<usize>)> {
    let (line, f) = it.next().ok_or_else(|| Error::Parse("empty input".into()))?;
    if f.len() != width {
        return Err(Error::Parse(format!("line {line}: header needs {width} fields")));
    }
    Ok((line, f.iter().map(|s| num(s, line)).collect::<Result<_>>()?))
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut it = lines(text);
    let (_, h) = header(&mut it, 2)?;
    let (n, m) = (h[0], h[1]);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, f) = it.next().ok_or_else(|| Error::Parse(format!("expected {m} edges")))?;
        if f.len() != 2 {
            return Err(Error::Parse(format!("line {line}: an edge has two endpoints")));
        }
        edges.push((num(f[0], line)?, num(f[1], line)?));
    }
    if let Some((line, _)) = it.next() {
        return Err(Error::Parse(format!("line {line}: trailing content")));
    }
    Graph::new(n, edges)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

fn parse_hyper_body<'a>(it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>) -> Result<Hypergraph> {
    let (_, h) = header(it, 3)?;
    let (n, m, k) = (h[0], h[1], h[2]);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, f) = it.next().ok_or_else(|| Error::Parse(format!("expected {m} hyperedges")))?;
        if f.len() != k {
            return Err(Error::Parse(format!("line {line}: a hyperedge has {k} vertices")));
        }
        edges.push(f.iter().map(|s| num(s, line)).collect::<Result<Vec<usize>>>()?);
    }
    Hypergraph::new(n, edges)
}

pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let mut it = lines(text);
    let h = parse_hyper_body(&mut it)?;
    if let Some((line, _)) = it.next() {
        return Err(Error::Parse(format!("line {line}: trailing content")));
    }
    Ok(h)
}

pub fn write_hypergraph(h: &Hypergraph) -> String {
    let k = h.arity().unwrap_or(0);
    let mut out = format!("{} {} {}\n", h.n(), h.m(), k);
    for e in h.edges() {
        let parts: Vec<String> = e.iter().map(|v| v.to_string()).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

/// Reads a gadget; the colour count is not part of the format and is supplied.
pub fn parse_gadget(text: &str, q: u32) -> Result<Gadget> {
    let mut it = lines(text);
    let h = parse_hyper_body(&mut it)?;
    let (line, f) = it.next().ok_or_else(|| Error::Parse("missing gadget trailer".into()))?;
    if f.len() != 4 {
        return Err(Error::Parse(format!("line {line}: trailer is \"u v kind C0\"")));
    }
    let kind = match f[2] {
        "disequality" => GadgetKind::Disequality,
        "equality" => GadgetKind::Equality,
        other => return Err(Error::Parse(format!("line {line}: unknown gadget kind {other:?}"))),
    };
    let u: usize = num(f[0], line)?;
    let v: usize = num(f[1], line)?;
    if u >= h.n() || v >= h.n() || u == v {
        return Err(Error::Parse(format!("line {line}: bad terminals {u} {v}")));
    }
    if let Some((line, _)) = it.next() {
        return Err(Error::Parse(format!("line {line}: trailing content")));
    }
    Ok(Gadget {
        h,
        u,
        v,
        kind,
        q,
        c0: num(f[3], line)?,
    })
}

pub fn write_gadget(g: &Gadget) -> String {
    format!(
        "{}{} {} {} {}\n",
        write_hypergraph(&g.h),
        g.u,
        g.v,
        g.kind.as_str(),
        g.c0
    )
}
