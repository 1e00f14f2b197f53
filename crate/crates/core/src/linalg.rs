//! Exact linear solves over Q(ζ).

use crate::error::{Error, Result};
use crate::scalars::CycScalar;

/// Solves the (possibly overdetermined) system `rows · x = rhs` exactly.
///
/// Fails when the system is inconsistent or the solution is not unique.
pub fn solve(rows: &[Vec<CycScalar>], rhs: &[CycScalar]) -> Result<Vec<CycScalar>> {
    let cols = vec![rhs.to_vec()];
    Ok(solve_many(rows, &cols)?.pop().unwrap())
}

/// As `solve`, for several right-hand sides sharing one elimination.
pub fn solve_many(rows: &[Vec<CycScalar>], rhs: &[Vec<CycScalar>]) -> Result<Vec<Vec<CycScalar>>> {
    let n = rows.first().map_or(0, Vec::len);
    let k = rhs.len();
    let mut m: Vec<Vec<CycScalar>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend(rhs.iter().map(|b| b[i].clone()));
            r
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..n {
        let Some(p) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            return Err(Error::Fit(format!("column {col} is not determined")));
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].inv()?;
        for x in m[pivot_row][col..].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == pivot_row || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row[col..].iter_mut().zip(&prow[col..]) {
                if !y.is_zero() {
                    *x -= &(&f * y);
                }
            }
        }
        pivot_row += 1;
    }
    if m[n..].iter().any(|r| r[n..].iter().any(|x| !x.is_zero())) {
        return Err(Error::Fit("overdetermined system is inconsistent".into()));
    }
    Ok((0..k).map(|j| (0..n).map(|r| m[r][n + j].clone()).collect()).collect())
}
