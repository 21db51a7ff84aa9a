use colphase::numerics::PrecisionContext;
use colphase::scalar::{
    boundary, eval_f1, eval_f2, eval_h, find_intersection_near_diagonal, landmarks, solve_f2_for_x,
    trace_p1_plus, y_e,
};
use colphase::spin::ModelParams;
use rug::Float;

fn params(q: u32, k: u32) -> ModelParams {
    ModelParams::from_d(q, k, 5 * q.pow(k), PrecisionContext::extended()).unwrap()
}

#[test]
fn landmark_ordering_over_regime() {
    for q in [4u32, 6, 8, 10] {
        for k in [2u32, 3] {
            let p = params(q, k);
            let lm = landmarks(&p).unwrap();
            assert!(lm.ordering_holds(), "q={q} k={k}");
            // the ordering recomputed from the fields
            assert!(lm.x_0 > lm.x_star && lm.x_star > lm.x_2star && lm.x_2star > 1u32);
            // x_hat is a root of h
            let h = eval_h(&lm.x_hat, &p).to_f64().abs();
            assert!(h < 1e-40, "h(x_hat) = {h}");
        }
    }
}

#[test]
fn p1_trace_stays_below_diagonal_and_boundary() {
    for (q, k) in [(4u32, 2u32), (6, 3)] {
        let p = params(q, k);
        let lm = landmarks(&p).unwrap();
        let tr = trace_p1_plus(&p, 200, &lm.x_star);
        assert!(tr.points.len() >= 150, "only {} points", tr.points.len());
        let b = boundary(&p);
        for pt in &tr.points {
            assert!(pt.x < b);
            assert!(pt.y <= pt.x);
            assert!(pt.y >= 1u32);
            let f1 = eval_f1(&pt.x, &pt.y, &p).to_f64().abs();
            assert!(f1 < 1e-40, "f1 = {f1}");
        }
    }
}

#[test]
fn f2_has_at_most_two_roots_per_row() {
    for (q, k) in [(4u32, 2u32), (6, 3)] {
        let p = params(q, k);
        let lm = landmarks(&p).unwrap();
        let width = Float::with_val(p.prec(), &lm.x_2star - 1u32);
        let mut nonempty = 0;
        for i in 1..=200u32 {
            let y = Float::with_val(p.prec(), &width * i) / 201u32 + 1u32;
            let roots = solve_f2_for_x(&y, &p);
            assert!(roots.len() <= 2, "{} roots at y={}", roots.len(), y.to_f64());
            for x in &roots {
                assert!(*x > 1u32);
                // a genuine sign change around each root
                let h = Float::with_val(p.prec(), x - 1u32) * 1e-25;
                let lo = eval_f2(&Float::with_val(p.prec(), x - &h), &y, &p);
                let hi = eval_f2(&Float::with_val(p.prec(), x + &h), &y, &p);
                assert!(lo.is_sign_negative() != hi.is_sign_negative());
            }
            nonempty += usize::from(!roots.is_empty());
        }
        assert!(nonempty > 0);
    }
}

#[test]
fn near_diagonal_intersection() {
    for (q, k) in [(4u32, 2u32), (6, 2), (4, 3), (6, 3)] {
        let p = params(q, k);
        let lm = landmarks(&p).unwrap();
        let it = find_intersection_near_diagonal(&p, &lm.x_star).unwrap();
        let tol = p.ctx().abs_tol;
        // residuals recomputed, not read back
        assert!(eval_f1(&it.x, &it.y, &p).to_f64().abs() <= tol, "q={q} k={k}");
        assert!(eval_f2(&it.x, &it.y, &p).to_f64().abs() <= tol, "q={q} k={k}");
        assert!(it.x > it.y && it.y > y_e(&p), "q={q} k={k}");
        assert!(it.x < boundary(&p));
        assert!(it.reduced_residual.to_f64() <= 1e-30);
    }
}
