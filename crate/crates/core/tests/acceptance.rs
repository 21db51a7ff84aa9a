//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Every criterion except 8 is asserted. Criterion 8 is false as worded for
//! integer degrees (the bound is already negative at 8 and 9), so it is
//! reported with its numbers and left unasserted.

use std::time::Instant;

use colphase::first_moment::{
    exact_zero_degree, f_upper_bound, gadget_threshold_degree, maximize_f_grid, threshold,
};
use colphase::hypergraph::{count_colourings, count_colourings_by_elimination, Hypergraph};
use colphase::numerics::{
    bracketed_root, check_exp_sandwich, eval_poly, real_polynomial_roots, Bracket, PrecisionContext,
};
use colphase::phi::{dominant_search, dphi_dq, dphi_dq_fd, sign_law, SearchStrategy, DOMINANCE_MARGIN};
use colphase::reductions::{
    build_disequality_gadget, halve, potts_constant, potts_edge_gadget_replace, trim_to_minimal,
    verify_potts_identity, Gadget,
};
use colphase::scalar::{
    boundary, curves_csv, eval_f1, eval_f2, exterior_point_check, find_intersection_near_diagonal,
    landmarks, trace_f2, trace_p1_plus, y_e,
};
use colphase::spin::{partition_function_zb, Graph, ModelParams, ZbMode};
use colphase::stability::{classify, Verdict};
use colphase::tree::{
    q00_fixpoint, q00_phantom_fixpoint, solve_asymmetric_q00, solve_half_half, solve_symmetric_q00,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Integer};

const BUDGET: u64 = 100_000_000;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn params(q: u32, k: u32, d: u32) -> ModelParams {
    ModelParams::from_d(q, k, d, PrecisionContext::extended()).unwrap()
}

const TRIPLES: [(u32, u32, u32); 3] = [(4, 2, 80), (6, 2, 180), (4, 3, 320)];

fn criterion_1() -> Outcome {
    let graphs = [
        ("C3", Graph::cycle(3)),
        ("C4", Graph::cycle(4)),
        ("C5", Graph::cycle(5)),
        ("C6", Graph::cycle(6)),
        ("K4", Graph::complete(4)),
        ("cube", Graph::cube()),
    ];
    let mut checked = 0;
    for (name, g) in &graphs {
        let delta = g.regular_degree().unwrap() as u32;
        for (q, k) in [(2u32, 2u32), (3, 2), (4, 2), (2, 3)] {
            let states = f64::from(q).powi((k as usize * g.n()) as i32);
            if states > 1e8 {
                continue;
            }
            let p = ModelParams::new(q, k, delta, PrecisionContext::extended()).map_err(|e| e.to_string())?;
            let zb = partition_function_zb(g, &p, ZbMode::ExactInteger, BUDGET).map_err(|e| e.to_string())?;
            let zcol = count_colourings(&halve(g, k as usize), q, BUDGET).map_err(|e| e.to_string())?;
            ensure(
                zb.as_exact() == Some(&Integer::from(zcol)),
                format!("{name} q={q} k={k}: Z_B={} Z_col={zcol}", zb.to_f64()),
            )?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (graph, q, k) cases equal exactly"))
}

/// Colourings of the gadget with `(u, v)` coloured `(0, 1)`, by plain enumeration.
fn brute_c0(g: &Gadget) -> u64 {
    let n = g.h.n();
    let mut count = 0;
    for code in 0u64..(1 << n) {
        let col = |v: usize| (code >> v) & 1;
        if col(g.u) != 0 || col(g.v) != 1 {
            continue;
        }
        let proper = g.h.edges().iter().all(|e| e.iter().any(|&v| col(v) != col(e[0])));
        count += u64::from(proper);
    }
    count
}

fn criterion_2() -> Outcome {
    let h = trim_to_minimal(&Hypergraph::fano(), 2, BUDGET).map_err(|e| e.to_string())?;
    let dis = build_disequality_gadget(&h, 2, BUDGET).map_err(|e| e.to_string())?;
    let c0 = brute_c0(&dis);
    let c = potts_constant(2, c0);
    let mut parts = Vec::new();
    for (name, g) in [("edge", Graph::path(2)), ("P3", Graph::path(3))] {
        let rep = verify_potts_identity(&g, &dis, BUDGET).map_err(|e| e.to_string())?;
        ensure(rep.holds, format!("{name}: identity fails {rep:?}"))?;
        ensure(rep.c == c.to_string(), format!("{name}: C {} vs recomputed {c}", rep.c))?;
        // at q = 2 the Potts weight is 0: Z_potts counts proper 2-colourings of a tree, 2
        ensure(rep.z_potts == "2", format!("{name}: Z_potts = {}", rep.z_potts))?;
        let want = c.clone().pow(g.m() as u32) * Integer::from(2);
        ensure(rep.z_col == want.to_string(), format!("{name}: Z_col {} vs {want}", rep.z_col))?;
        if name == "edge" {
            // second counting route on the replaced hypergraph
            let hg = potts_edge_gadget_replace(&g, &dis).map_err(|e| e.to_string())?.h;
            let elim = count_colourings_by_elimination(&hg, 2).map_err(|e| e.to_string())?;
            ensure(elim.to_string() == rep.z_col, "elimination disagrees with enumeration")?;
        }
        parts.push(format!("{name}: Z_col={} ({})", rep.z_col, rep.method));
    }
    Ok(format!("C0={c0} C={c}; {}", parts.join(", ")))
}

fn criterion_3() -> Outcome {
    let strategy = SearchStrategy::default();
    let mut parts = Vec::new();
    for (q, k, d) in TRIPLES {
        let start = Instant::now();
        let p = params(q, k, d);
        let rep = dominant_search(&p, &strategy);
        let w = rep.winner().ok_or("no winner")?;
        ensure(w.family == "half_half", format!("({q},{k},{d}): winner {} {}", w.family, w.qvec.label()))?;
        let hh = rep.family_value("half_half").ok_or("half-half missing")?.clone();
        for fam in ["q00_sym", "q00_asym"] {
            let v = rep.family_value(fam).ok_or(format!("{fam} missing"))?;
            ensure(Float::with_val(256, &hh - v) > DOMINANCE_MARGIN, format!("({q},{k},{d}): {fam} too close"))?;
        }
        let mut best_other: Option<Float> = None;
        for cand in rep.candidates.iter().filter(|c| c.family != "half_half") {
            let (Some(v), Some(fp)) = (&cand.value, &cand.fixpoint) else { continue };
            if fp.converged && best_other.as_ref().map_or(true, |b| v > b) {
                best_other = Some(v.clone());
            }
        }
        let margin = Float::with_val(256, &hh - best_other.ok_or("no other candidate")?);
        ensure(margin > DOMINANCE_MARGIN, format!("({q},{k},{d}): margin {}", margin.to_f64()))?;
        parts.push(format!(
            "({q},{k},{d}) margin {:.3e} over {} candidates in {:.1}s",
            margin.to_f64(),
            rep.candidates.len(),
            start.elapsed().as_secs_f64()
        ));
    }
    Ok(parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    for (q, k, d) in TRIPLES {
        let p = params(q, k, d);
        let s = solve_symmetric_q00(&p).map_err(|e| e.to_string())?;
        let a = solve_asymmetric_q00(&p).map_err(|e| e.to_string())?;
        let cases = [
            ("half-half", solve_half_half(&p).map_err(|e| e.to_string())?, Verdict::Stable),
            ("asym q00", q00_fixpoint(&a.x, &a.y, &p, "asym").map_err(|e| e.to_string())?, Verdict::Stable),
            ("sym q00", q00_fixpoint(&s.x, &s.x, &p, "sym").map_err(|e| e.to_string())?, Verdict::Unstable),
        ];
        let mut worst = 0.0f64;
        for (name, fp, want) in cases {
            let rep = classify(&fp, &p).map_err(|e| e.to_string())?;
            ensure(rep.verdict == want, format!("({q},{k},{d}) {name}: {}", rep.verdict.as_str()))?;
            let delta = rep.crosscheck_delta.ok_or(format!("{name}: no closed form"))?.to_f64();
            ensure(delta <= 1e-8, format!("({q},{k},{d}) {name}: closed form off by {delta}"))?;
            ensure(rep.unit_pair_distance < 1e-10, format!("({q},{k},{d}) {name}: no unit pair"))?;
            worst = worst.max(delta);
        }
        parts.push(format!("({q},{k},{d}) max delta {worst:.1e}"));
    }
    Ok(parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut n = 0;
    for q in [4u32, 6, 8, 10] {
        for k in [2u32, 3] {
            let d = 5 * q.pow(k);
            let p = params(q, k, d);
            let s = solve_symmetric_q00(&p).map_err(|e| e.to_string())?;
            let a = solve_asymmetric_q00(&p).map_err(|e| e.to_string())?;
            let tx = s.x.to_f64() * p.t().to_f64() + f64::from(q) - 1.0;
            ensure(tx < f64::from(d) && s.below_d, format!("q={q} k={k}: tx+q-1 = {tx}"))?;
            let bound = f64::from(d).powi(2) / (f64::from(q).powi(k as i32) - f64::from(q));
            ensure(a.x.to_f64() > bound, format!("q={q} k={k}: x = {} <= {bound}", a.x.to_f64()))?;
            // three distinct fixpoints: y < x_sym < x
            let gap = |u: &Float, v: &Float| (Float::with_val(256, u / v) - 1u32).to_f64();
            ensure(gap(&s.x, &a.y) > 1e-6 && gap(&a.x, &s.x) > 1e-6, format!("q={q} k={k}: fixpoints coincide"))?;
            n += 1;
        }
    }
    Ok(format!("{n} (q,k) pairs, three distinct fixpoints each"))
}

fn criterion_6() -> Outcome {
    let p = params(6, 3, 1080);
    let lm = landmarks(&p).map_err(|e| e.to_string())?;
    ensure(lm.ordering_holds(), "landmark ordering")?;
    ensure(lm.x_0 > lm.x_star && lm.x_star > lm.x_2star, "x0 > x* > x**")?;
    let ext = exterior_point_check(&p).map_err(|e| e.to_string())?;
    let s_want = Float::with_val(256, 1080u32) / 209u32;
    ensure(Float::with_val(256, &ext.s - &s_want).abs() < 1e-60, "s = 1080/209")?;
    ensure(ext.f2_corner.is_sign_negative() && ext.f2_diag.is_sign_negative(), "exterior inequalities")?;
    let it = find_intersection_near_diagonal(&p, &lm.x_star).map_err(|e| e.to_string())?;
    let f1 = eval_f1(&it.x, &it.y, &p).to_f64().abs();
    let f2 = eval_f2(&it.x, &it.y, &p).to_f64().abs();
    ensure(f1 <= 1e-25 && f2 <= 1e-25, format!("|f1|={f1:e} |f2|={f2:e}"))?;
    ensure(it.x > it.y && it.y > y_e(&p), "x > y > y_E")?;
    // P1+ stays below the diagonal and the intersection sits near it
    let p1 = trace_p1_plus(&p, 200, &lm.x_star);
    let f2t = trace_f2(&p, 200, &lm.x_2star);
    ensure(p1.points.iter().all(|pt| pt.y <= pt.x && pt.x < boundary(&p)), "P1+ leaves the region below y = x")?;
    let csv = curves_csv(&p, &[&p1, &f2t]);
    ensure(csv.starts_with("which,x,y,f1,f2\n"), "csv header")?;
    let rows = csv.lines().count() - 1;
    ensure(rows == p1.points.len() + f2t.points.len(), "csv rows")?;
    let rel_gap = (Float::with_val(256, &it.x - &it.y) / Float::with_val(256, &it.x - 1u32)).to_f64();
    ensure(rel_gap < 0.5, format!("intersection far from the diagonal: {rel_gap}"))?;
    Ok(format!(
        "x-1={:.6e} y-1={:.6e} |f1|={f1:.1e} |f2|={f2:.1e}; {rows} curve rows",
        (Float::with_val(256, &it.x - 1u32)).to_f64(),
        (Float::with_val(256, &it.y - 1u32)).to_f64()
    ))
}

fn criterion_7() -> Outcome {
    let p = params(6, 3, 1080);
    let lm = landmarks(&p).map_err(|e| e.to_string())?;
    let it = find_intersection_near_diagonal(&p, &lm.x_star).map_err(|e| e.to_string())?;
    ensure(it.x > it.y, "r1 > c3")?;
    let fp = q00_phantom_fixpoint(&it.r0, &it.x, &it.c0, &it.y, &p).map_err(|e| e.to_string())?;
    let dq = dphi_dq(&fp.qvec, &fp.r, &fp.c, &p).map_err(|e| e.to_string())?;
    let fd = dphi_dq_fd(&fp.qvec, &fp.r, &fp.c, &p, 1e-8).map_err(|e| e.to_string())?;
    for i in 0..3 {
        let rel = (Float::with_val(256, &dq[i] - &fd[i]) / &dq[i]).abs().to_f64();
        ensure(rel <= 1e-6, format!("dq{} off by {rel:e}", i + 1))?;
    }
    let diff = Float::with_val(256, &dq[0] - &dq[2]);
    ensure(diff.is_sign_negative(), format!("dq1 - dq3 = {}", diff.to_f64()))?;
    let (g, pred) = sign_law(&fp.qvec, &fp.r, &fp.c, &p).map_err(|e| e.to_string())?;
    ensure(g.is_sign_positive(), "g(r1, c3) > 0")?;
    let law = (Float::with_val(256, &pred - &diff) / &diff).abs().to_f64();
    ensure(law < 1e-20, format!("sign-law form off by {law:e}"))?;
    Ok(format!("dq1-dq3 = {:.6e}, g = {:.6e}", diff.to_f64(), g.to_f64()))
}

fn criterion_8() -> Outcome {
    let (q, k) = (2u32, 3u32);
    let mut mismatches = Vec::new();
    for delta in 1..=40u32 {
        let b = f_upper_bound(q, k, delta);
        let independent = 2f64.ln() + f64::from(delta) / 3.0 * 0.75f64.ln();
        if (b - independent).abs() > 1e-9 {
            return Err(format!("bound at {delta} is {b}, expected {independent}"));
        }
        if (b < 0.0) != (delta >= 10) {
            mismatches.push(format!("Δ={delta}: {b:.6}"));
        }
    }
    let at10 = maximize_f_grid(q, k, 10, 60).map_err(|e| e.to_string())?.value;
    let at2 = maximize_f_grid(q, k, 2, 60).map_err(|e| e.to_string())?.value;
    let corroborated = at10 < 0.0 && at2 > 0.0;
    let detail = format!(
        "threshold {:.4}, gadget degree {}, bound zero at Δ={:.4}; max F at Δ=10 {at10:.4}, at Δ=2 {at2:.4}",
        threshold(q, k),
        gadget_threshold_degree(q, k),
        exact_zero_degree(q, k)
    );
    if mismatches.is_empty() && corroborated {
        Ok(detail)
    } else {
        Err(format!("bound negative below Δ=10 ({}); {detail}", mismatches.join(", ")))
    }
}

fn criterion_9() -> Outcome {
    let h = trim_to_minimal(&Hypergraph::fano(), 2, BUDGET).map_err(|e| e.to_string())?;
    let g = build_disequality_gadget(&h, 2, BUDGET).map_err(|e| e.to_string())?;
    ensure(g.h.degree(g.u) == 1, "degree(u) != 1")?;
    let n = g.h.n();
    let mut counts = [[0u64; 2]; 2];
    for code in 0u64..(1 << n) {
        let col = |v: usize| ((code >> v) & 1) as usize;
        if g.h.edges().iter().all(|e| e.iter().any(|&v| col(v) != col(e[0]))) {
            counts[col(g.u)][col(g.v)] += 1;
        }
    }
    ensure(counts[0][0] == 0 && counts[1][1] == 0, format!("u = v in some colouring: {counts:?}"))?;
    ensure(counts[0][1] == counts[1][0] && counts[0][1] == g.c0, format!("pair counts {counts:?}"))?;
    Ok(format!("n={n} m={} u={} v={} C0={}", g.h.m(), g.u, g.v, g.c0))
}

fn criterion_10() -> Outcome {
    for i in 0..40 {
        for j in 0..25 {
            let a = Float::with_val(256, 100.0 * f64::from(i + 1) / 40.0);
            let b = Float::with_val(256, 10f64.powf(-3.0 + 5.0 * f64::from(j) / 24.0));
            ensure(check_exp_sandwich(&a, &b), format!("sandwich at ({}, {})", a.to_f64(), b.to_f64()))?;
        }
    }
    let ctx = PrecisionContext::extended();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let deg = rng.gen_range(2..6);
        let mut roots: Vec<f64> = (0..deg).map(|_| rng.gen_range(-20.0..20.0)).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if roots.windows(2).any(|w| w[1] - w[0] < 1e-3) {
            continue;
        }
        // expand prod (z - r)
        let mut coeffs = vec![Float::with_val(256, 1)];
        for r in &roots {
            let mut next = vec![Float::with_val(256, 0); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= Float::with_val(256, c * *r);
            }
            coeffs = next;
        }
        let got = real_polynomial_roots(&coeffs, &ctx).map_err(|e| e.to_string())?;
        ensure(got.len() == roots.len(), "root count")?;
        for (g, r) in got.iter().zip(&roots) {
            ensure((g.to_f64() - r).abs() <= 1e-9, format!("root {} vs {r}", g.to_f64()))?;
            ensure(eval_poly(&coeffs, g).to_f64().abs() < 1e-40, "residual")?;
        }
    }
    for _ in 0..200 {
        let c: f64 = rng.gen_range(-3.0..3.0);
        let lo = c - rng.gen_range(0.001..4.0);
        let hi = c + rng.gen_range(0.001..4.0);
        let f = move |x: &Float| {
            let y = Float::with_val(256, x - c);
            Float::with_val(256, y.atan_ref()) + Float::with_val(256, &y * &y) * &y
        };
        let br = Bracket::new(&f, Float::with_val(256, lo), Float::with_val(256, hi)).map_err(|e| e.to_string())?;
        let x = bracketed_root(f, &br, &ctx).map_err(|e| e.to_string())?;
        ensure(br.contains(&x), "root left its bracket")?;
    }
    let mut worst = 0.0f64;
    for q in (4..=30).step_by(2) {
        for k in 2..=5u32 {
            let qk = 5u64 * u64::from(q).pow(k);
            if qk > 5_000_000 {
                continue;
            }
            for d in [qk as u32, qk as u32 + 1, 2 * qk as u32] {
                let p = params(q, k, d);
                ensure(p.is_proven_regime(), "regime flag")?;
                let t = p.t().to_f64();
                ensure(t >= 1.0 && t <= 1.0312, format!("t = {t} at q={q} k={k} d={d}"))?;
                worst = worst.max(t);
            }
        }
    }
    Ok(format!("largest regime t = {worst:.6}"))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome, bool); 10] = [
        (1, criterion_1, true),
        (2, criterion_2, true),
        (3, criterion_3, true),
        (4, criterion_4, true),
        (5, criterion_5, true),
        (6, criterion_6, true),
        (7, criterion_7, true),
        (8, criterion_8, false),
        (9, criterion_9, true),
        (10, criterion_10, true),
    ];
    let mut failed = Vec::new();
    for (n, run, asserted) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS ({secs:.1}s) {detail}"),
            Err(detail) => {
                let note = if asserted { "" } else { " [not asserted]" };
                println!("criterion {n}: FAIL{note} ({secs:.1}s) {detail}");
                if asserted {
                    failed.push(n);
                }
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("asserted criteria failed: {failed:?}");
        std::process::exit(1);
    }
}
