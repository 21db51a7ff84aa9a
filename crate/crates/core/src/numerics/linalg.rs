//! Small dense Jacobi routines in arbitrary precision.

use rug::Float;

fn prec_of(m: &[Vec<Float>]) -> u32 {
    m.iter().flatten().map(|x| x.prec()).max().unwrap_or(53)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted ascending.
pub fn symmetric_eigenvalues(m: &[Vec<Float>]) -> Vec<Float> {
    let n = m.len();
    let prec = prec_of(m);
    let mut a: Vec<Vec<Float>> = m
        .iter()
        .map(|r| r.iter().map(|x| Float::with_val(prec, x)).collect())
        .collect();
    let eps = Float::with_val(prec, 1) >> (prec as i32 - 2);
    for _sweep in 0..100 {
        let mut off = Float::with_val(prec, 0);
        let mut total = Float::with_val(prec, 0);
        for i in 0..n {
            for j in 0..n {
                let sq = Float::with_val(prec, a[i][j].square_ref());
                if i != j {
                    off += &sq;
                }
                total += sq;
            }
        }
        if off <= Float::with_val(prec, &eps * &eps) * &total || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].is_zero() {
                    continue;
                }
                let theta = Float::with_val(prec, &a[q][q] - &a[p][p]) / Float::with_val(prec, &a[p][q] * 2u32);
                let sgn = if theta.is_sign_negative() { -1 } else { 1 };
                let denom = Float::with_val(prec, theta.abs_ref())
                    + Float::with_val(prec, Float::with_val(prec, theta.square_ref()) + 1u32).sqrt();
                let t = Float::with_val(prec, sgn) / denom;
                let c = Float::with_val(prec, Float::with_val(prec, t.square_ref()) + 1u32).sqrt().recip();
                let s = Float::with_val(prec, &t * &c);
                for k in 0..n {
                    let akp = a[k][p].clone();
                    let akq = a[k][q].clone();
                    a[k][p] = Float::with_val(prec, &c * &akp) - Float::with_val(prec, &s * &akq);
                    a[k][q] = Float::with_val(prec, &s * &akp) + Float::with_val(prec, &c * &akq);
                }
                for k in 0..n {
                    let apk = a[p][k].clone();
                    let aqk = a[q][k].clone();
                    a[p][k] = Float::with_val(prec, &c * &apk) - Float::with_val(prec, &s * &aqk);
                    a[q][k] = Float::with_val(prec, &s * &apk) + Float::with_val(prec, &c * &aqk);
                }
            }
        }
    }
    let mut ev: Vec<Float> = (0..n).map(|i| a[i][i].clone()).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Singular values by one-sided (Hestenes) Jacobi, sorted descending.
pub fn singular_values(m: &[Vec<Float>]) -> Vec<Float> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let prec = prec_of(m);
    // work on columns
    let mut u: Vec<Vec<Float>> = (0..cols)
        .map(|j| (0..rows).map(|i| Float::with_val(prec, &m[i][j])).collect())
        .collect();
    let eps = Float::with_val(prec, 1) >> (prec as i32 - 4);
    let dot = |x: &[Float], y: &[Float]| {
        let mut acc = Float::with_val(prec, 0);
        for (a, b) in x.iter().zip(y) {
            acc += Float::with_val(prec, a * b);
        }
        acc
    };
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                let bound = Float::with_val(prec, &alpha * &beta).sqrt() * &eps;
                if Float::with_val(prec, gamma.abs_ref()) <= bound || gamma.is_zero() {
                    continue;
                }
                rotated = true;
                let zeta = Float::with_val(prec, &beta - &alpha) / Float::with_val(prec, &gamma * 2u32);
                let sgn = if zeta.is_sign_negative() { -1 } else { 1 };
                let denom = Float::with_val(prec, zeta.abs_ref())
                    + Float::with_val(prec, Float::with_val(prec, zeta.square_ref()) + 1u32).sqrt();
                let t = Float::with_val(prec, sgn) / denom;
                let c = Float::with_val(prec, Float::with_val(prec, t.square_ref()) + 1u32).sqrt().recip();
                let s = Float::with_val(prec, &c * &t);
                for i in 0..rows {
                    let up = u[p][i].clone();
                    let uq = u[q][i].clone();
                    u[p][i] = Float::with_val(prec, &c * &up) - Float::with_val(prec, &s * &uq);
                    u[q][i] = Float::with_val(prec, &s * &up) + Float::with_val(prec, &c * &uq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<Float> = u.iter().map(|col| dot(col, col).sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sv
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot vanishes.
pub fn solve_linear(m: &[Vec<Float>], rhs: &[Float]) -> Option<Vec<Float>> {
    let n = m.len();
    let prec = prec_of(m).max(rhs.iter().map(|x| x.prec()).max().unwrap_or(53));
    let mut a: Vec<Vec<Float>> = m
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row: Vec<Float> = r.iter().map(|x| Float::with_val(prec, x)).collect();
            row.push(Float::with_val(prec, b));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            let ai = Float::with_val(prec, a[i][col].abs_ref());
            let aj = Float::with_val(prec, a[j][col].abs_ref());
            ai.partial_cmp(&aj).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col].is_zero() || a[piv][col].is_nan() {
            return None;
        }
        a.swap(col, piv);
        for i in col + 1..n {
            let f = Float::with_val(prec, &a[i][col] / &a[col][col]);
            for j in col..=n {
                let sub = Float::with_val(prec, &f * &a[col][j]);
                a[i][j] -= sub;
            }
        }
    }
    let mut x = vec![Float::with_val(prec, 0); n];
    for i in (0..n).rev() {
        let mut acc = Float::with_val(prec, &a[i][n]);
        for j in i + 1..n {
            acc -= Float::with_val(prec, &a[i][j] * &x[j]);
        }
        x[i] = acc / &a[i][i];
    }
    Some(x)
}
