//! Dense two-phase simplex over exact rationals (Bland's rule).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn rat(a: i64, b: i64) -> Q {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// min c·x subject to A x = b, x >= 0 (b >= 0 required).
/// Returns None when infeasible; unboundedness is not expected by callers
/// and reported as None too.
pub fn minimize(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> Option<(Q, Vec<Q>)> {
    let m = a.len();
    let n = c.len();
    // tableau columns: n originals, m artificials, rhs
    let w = n + m + 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        assert!(!b[i].is_negative());
        let mut row = vec![Q::zero(); w];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = Q::one();
        row[w - 1] = b[i].clone();
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // phase 1: minimise the sum of artificials
    let mut obj = vec![Q::zero(); w];
    for j in n..n + m {
        obj[j] = Q::one();
    }
    for i in 0..m {
        let r = t[i].clone();
        for j in 0..w {
            obj[j] -= &r[j];
        }
    }
    t.push(obj);
    run(&mut t, &mut basis, n + m)?;
    if !t[m][w - 1].is_zero() {
        return None;
    }
    // drive artificials out of the basis where possible
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    // phase 2 objective over original columns only
    let mut obj = vec![Q::zero(); w];
    obj[..n].clone_from_slice(c);
    for i in 0..m {
        let bj = basis[i];
        if bj < n && !c[bj].is_zero() {
            let f = c[bj].clone();
            let r = t[i].clone();
            for j in 0..w {
                obj[j] -= &f * &r[j];
            }
        }
    }
    // forbid artificials from re-entering
    for row in t.iter_mut() {
        for j in n..n + m {
            row[j] = Q::zero();
        }
    }
    for i in 0..m {
        if basis[i] >= n {
            t[i][basis[i]] = Q::one();
        }
    }
    t[m] = obj;
    run(&mut t, &mut basis, n)?;
    let mut x = vec![Q::zero(); n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][w - 1].clone();
        }
    }
    let val = x.iter().zip(c).fold(Q::zero(), |acc, (xi, ci)| acc + xi * ci);
    Some((val, x))
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, col: usize) {
    let p = t[r][col].clone();
    for v in t[r].iter_mut() {
        *v /= &p;
    }
    let pr = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[col].is_zero() {
            continue;
        }
        let f = row[col].clone();
        for (v, pv) in row.iter_mut().zip(&pr) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
    basis[r] = col;
}

fn run(t: &mut [Vec<Q>], basis: &mut [usize], ncols: usize) -> Option<()> {
    let m = t.len() - 1;
    let w = t[0].len();
    loop {
        let Some(col) = (0..ncols).find(|&j| t[m][j].is_negative()) else {
            return Some(());
        };
        let mut best: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][col].is_positive() {
                let ratio = &t[i][w - 1] / &t[i][col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let (r, _) = best?;
        pivot(t, basis, r, col);
    }
}
