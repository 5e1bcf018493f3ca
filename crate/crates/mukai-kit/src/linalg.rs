//! Small exact-integer linear algebra: Hermite normal form and the kernel of
//! an integral functional. Everything here works over `BigInt`; nothing is
//! allowed to overflow or round.

use num::{BigInt, Integer, One, Signed, Zero};

/// Row-style Hermite normal form.
///
/// Pivots are positive, entries above each pivot are reduced into
/// `[0, pivot)`, and zero rows are dropped. The output is the canonical
/// representative of the row span, so two generating sets of the same
/// lattice reduce to identical matrices.
pub fn row_hnf(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pr = 0;
    for col in 0..ncols {
        if pr >= rows.len() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in pr..rows.len() {
                if !rows[i][col].is_zero() {
                    best = match best {
                        Some(b) if rows[i][col].abs() >= rows[b][col].abs() => Some(b),
                        _ => Some(i),
                    };
                }
            }
            let Some(b) = best else { break };
            rows.swap(pr, b);
            let mut eliminated = true;
            for i in pr + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[pr][col]);
                if !q.is_zero() {
                    for c in 0..ncols {
                        let t = &rows[pr][c] * &q;
                        rows[i][c] -= t;
                    }
                }
                if !rows[i][col].is_zero() {
                    eliminated = false;
                }
            }
            if eliminated {
                break;
            }
        }
        if rows[pr][col].is_zero() {
            continue;
        }
        if rows[pr][col].is_negative() {
            for c in 0..ncols {
                rows[pr][c] = -rows[pr][c].clone();
            }
        }
        for i in 0..pr {
            let q = rows[i][col].div_floor(&rows[pr][col]);
            if !q.is_zero() {
                for c in 0..ncols {
                    let t = &rows[pr][c] * &q;
                    rows[i][c] -= t;
                }
            }
        }
        pr += 1;
    }
    rows.truncate(pr);
    rows
}

/// Saturated integral basis of `{ x in Z^n : sum_i c[i] * x[i] = 0 }`.
///
/// Computed by unimodular column reduction (the column operations that
/// perform the extended Euclidean algorithm on the coefficients), so the
/// result is a direct summand of `Z^n`: every integral solution is an
/// integral combination of the returned rows. Output is in [`row_hnf`] form.
pub fn kernel_of_functional(c: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = c.len();
    let mut vals: Vec<BigInt> = c.to_vec();
    let mut gens: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    loop {
        let mut best: Option<usize> = None;
        for j in 0..n {
            if !vals[j].is_zero() {
                best = match best {
                    Some(b) if vals[j].abs() >= vals[b].abs() => Some(b),
                    _ => Some(j),
                };
            }
        }
        let Some(p) = best else { break };
        let mut changed = false;
        for j in 0..n {
            if j == p || vals[j].is_zero() {
                continue;
            }
            let q = vals[j].div_floor(&vals[p]);
            if !q.is_zero() {
                let t = &vals[p] * &q;
                vals[j] -= t;
                for i in 0..n {
                    let t = &gens[p][i] * &q;
                    gens[j][i] -= t;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let kernel: Vec<Vec<BigInt>> = (0..n)
        .filter(|&j| vals[j].is_zero())
        .map(|j| gens[j].clone())
        .collect();
    row_hnf(kernel)
}

/// Integral coordinates of `target` in the row span of an HNF basis, if any.
///
/// `basis` must be in [`row_hnf`] form (back substitution relies on the
/// echelon shape).
pub fn solve_in_hnf_span(basis: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut residue = target.to_vec();
    let mut coeffs = Vec::with_capacity(basis.len());
    for row in basis {
        let pivot_col = row.iter().position(|x| !x.is_zero())?;
        let (q, rem) = residue[pivot_col].div_rem(&row[pivot_col]);
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (res, b) in residue.iter_mut().zip(row.iter()) {
                let t = b * &q;
                *res -= t;
            }
        }
        coeffs.push(q);
    }
    if residue.iter().all(Zero::is_zero) {
        Some(coeffs)
    } else {
        None
    }
}

/// gcd of a slice, zero for the empty slice or all-zero input.
pub fn gcd_all(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Divides out the content and flips the sign so the first nonzero entry is
/// positive. Returns `None` for the zero vector.
pub fn primitive_normalized(xs: &[BigInt]) -> Option<Vec<BigInt>> {
    let g = gcd_all(xs);
    if g.is_zero() {
        return None;
    }
    let mut out: Vec<BigInt> = xs.iter().map(|x| x / &g).collect();
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in out.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    Some(out)
}
