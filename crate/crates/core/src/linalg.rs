//! Exact dense linear algebra over rationals via reduced row echelon form.

use num_traits::{One, Zero};

use crate::num::Rational;

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Vec<Vec<Rational>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

/// Row-reduces `rows` (each of length `ncols`). The first `nrestrict` columns
/// are the only ones allowed to hold pivots; later columns ride along (used for
/// augmented systems).
fn reduce(mut rows: Vec<Vec<Rational>>, ncols: usize, nrestrict: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nrestrict {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Echelon { rows, pivots, ncols }
}

pub fn echelon(rows: &[Vec<Rational>], ncols: usize) -> Echelon {
    reduce(rows.to_vec(), ncols, ncols)
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    echelon(rows, ncols).pivots.len()
}

/// Rank of a family of vectors given as columns.
pub fn column_rank(columns: &[Vec<Rational>]) -> usize {
    match columns.first() {
        None => 0,
        Some(c) => rank(columns, c.len()),
    }
}

/// Some solution of `a x = b`, with free variables set to zero; `None` when the
/// system is inconsistent.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    debug_assert_eq!(a.len(), b.len());
    let aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let ech = reduce(aug, ncols + 1, ncols);
    let k = ech.pivots.len();
    if ech.rows[k..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &c) in ech.rows.iter().zip(&ech.pivots) {
        x[c] = row[ncols].clone();
    }
    Some(x)
}

/// The solution of `a x = b` when it exists and is unique.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    if rank(a, ncols) < ncols {
        return None;
    }
    solve(a, b, ncols)
}

/// Basis of `{x : a x = 0}`.
pub fn nullspace(a: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let ech = echelon(a, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !ech.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in ech.rows.iter().zip(&ech.pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Whether `target` is a linear combination of `columns`; returns coefficients.
pub fn express_in_span(columns: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let n = target.len();
    let k = columns.len();
    let rows: Vec<Vec<Rational>> = (0..n).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    solve(&rows, target, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn rank_of_dependent_rows() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rank(&a, 3), 2);
        assert_eq!(rank(&[], 3), 0);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let x = solve(&a, &[int(3), int(1)], 2).unwrap();
        assert_eq!(x, vec![int(2), int(1)]);
        let singular = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&singular, &[int(1), int(3)], 2).is_none());
        let x = solve(&singular, &[int(1), int(2)], 2).unwrap();
        assert_eq!(x, vec![int(1), int(0)]);
    }

    #[test]
    fn unique_solution_requires_full_rank() {
        let a = m(&[&[1, 1], &[1, -1], &[2, 0]]);
        assert_eq!(
            solve_unique(&a, &[int(3), int(1), int(4)], 2),
            Some(vec![int(2), int(1)])
        );
        assert!(solve_unique(&a[..1], &[int(3)], 2).is_none());
    }

    #[test]
    fn nullspace_vectors_are_annihilated() {
        let a = m(&[&[1, 2, 3, 4], &[0, 1, 1, 0]]);
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &a {
                let s: Rational = row.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn span_membership() {
        let cols = m(&[&[1, 0, 1], &[0, 1, 1]]);
        assert!(express_in_span(&cols, &[int(2), int(3), int(5)]).is_some());
        assert!(express_in_span(&cols, &[int(2), int(3), int(4)]).is_none());
        assert!(express_in_span(&[], &[int(0), int(0)]).is_some());
    }
}
