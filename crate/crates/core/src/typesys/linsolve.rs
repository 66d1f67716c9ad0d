//! Exact Gaussian elimination over the scalar field.

use crate::scalar::Scalar;

/// Solves `rows · x = rhs`. Free variables are set to zero; `None` when the
/// system is inconsistent.
pub fn solve(mut rows: Vec<Vec<Scalar>>, mut rhs: Vec<Scalar>, nvars: usize) -> Option<Vec<Scalar>> {
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = &Scalar::one() / &rows[r][c];
        for x in &mut rows[r][c..nvars] {
            *x = &*x * &inv;
        }
        rhs[r] = &rhs[r] * &inv;
        let pivot_row = rows[r].clone();
        for i in 0..nrows {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            for (x, y) in rows[i][c..nvars].iter_mut().zip(&pivot_row[c..nvars]) {
                *x = &*x - &(&f * y);
            }
            let d = &f * &rhs[r];
            rhs[i] = &rhs[i] - &d;
        }
        pivots.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    if rhs[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![Scalar::zero(); nvars];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rhs[i].clone();
    }
    Some(x)
}
