use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::Zero;

use super::{LinearProgram, LpError, Relation};
use crate::linalg;
use crate::num::{self, Rational};

/// Largest variable count accepted by [`enumerate_vertices`].
pub const MAX_VERTEX_DIMENSION: usize = 12;

const MAX_BASES: u128 = 2_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All vertices of the feasible region of `lp` (the objective is ignored),
/// sorted lexicographically. Brute force over active sets, so only for tiny
/// polytopes; a region without vertices yields an empty list.
pub fn enumerate_vertices(lp: &LinearProgram) -> Result<Vec<Vec<Rational>>, LpError> {
    lp.check_dimensions()?;
    let n = lp.num_vars();
    if n > MAX_VERTEX_DIMENSION {
        return Err(LpError::DimensionGuard {
            got: n,
            max: MAX_VERTEX_DIMENSION,
        });
    }

    let mut eq_rows = Vec::new();
    let mut eq_rhs = Vec::new();
    // Inequalities normalised to `a·x <= b`.
    let mut ineq: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for c in &lp.constraints {
        match c.relation {
            Relation::Eq => {
                eq_rows.push(c.coeffs.clone());
                eq_rhs.push(c.rhs.clone());
            }
            Relation::Le => ineq.push((c.coeffs.clone(), c.rhs.clone())),
            Relation::Ge => ineq.push((c.coeffs.iter().map(|x| -x).collect(), -&c.rhs)),
        }
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let unit = |s: i64| {
            let mut v = vec![Rational::zero(); n];
            v[j] = num::int(s);
            v
        };
        if let Some(lo) = &b.lower {
            ineq.push((unit(-1), -lo));
        }
        if let Some(hi) = &b.upper {
            ineq.push((unit(1), hi.clone()));
        }
    }

    let r = linalg::rank(&eq_rows, n);
    let need = n - r;
    let bases = binomial(ineq.len(), need);
    if bases > MAX_BASES {
        return Err(LpError::TooManyBases(bases));
    }

    let feasible = |x: &[Rational]| {
        eq_rows.iter().zip(&eq_rhs).all(|(a, b)| num::dot(a, x) == *b) && ineq.iter().all(|(a, b)| num::dot(a, x) <= *b)
    };

    let mut found = BTreeSet::new();
    for active in (0..ineq.len()).combinations(need) {
        let mut rows = eq_rows.clone();
        let mut rhs = eq_rhs.clone();
        for &i in &active {
            rows.push(ineq[i].0.clone());
            rhs.push(ineq[i].1.clone());
        }
        if let Some(x) = linalg::solve_unique(&rows, &rhs, n) {
            if feasible(&x) {
                found.insert(x);
            }
        }
    }
    Ok(found.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpsolve::{Bound, Sense};
    use crate::num::{int, ratio};

    fn simplex(n: usize) -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![int(0); n]);
        lp.constrain(vec![int(1); n], Relation::Eq, int(1));
        lp
    }

    #[test]
    fn standard_simplex_vertices() {
        let v = enumerate_vertices(&simplex(2)).unwrap();
        assert_eq!(v, vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
    }

    #[test]
    fn extra_equality_collapses_to_point() {
        let mut lp = simplex(2);
        lp.constrain(vec![int(1), int(-1)], Relation::Eq, int(0));
        let v = enumerate_vertices(&lp).unwrap();
        assert_eq!(v, vec![vec![ratio(1, 2), ratio(1, 2)]]);
    }

    #[test]
    fn infeasible_and_vertexless_regions() {
        let mut lp = simplex(2);
        lp.constrain(vec![int(1), int(1)], Relation::Ge, int(2));
        assert!(enumerate_vertices(&lp).unwrap().is_empty());
        let mut free = LinearProgram::new(Sense::Maximize, vec![int(0)]);
        free.set_bound(0, Bound::free());
        assert!(enumerate_vertices(&free).unwrap().is_empty());
    }

    #[test]
    fn dimension_guard() {
        assert!(matches!(
            enumerate_vertices(&simplex(13)),
            Err(LpError::DimensionGuard { got: 13, max: 12 })
        ));
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }
}
