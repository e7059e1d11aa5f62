use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use super::{LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense};
use crate::num::{self, Rational};

/// Scalar field the tableau runs over. Comparisons go through `eps`, which is
/// zero for rationals.
pub(super) trait Field: Clone + PartialOrd + Debug {
    fn nil() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn eps(tol: f64) -> Self;
    fn is_nil(&self) -> bool;
    fn neg(&self) -> Self;
    fn div(&self, other: &Self) -> Self;
    /// `self -= a * b`.
    fn sub_mul(&mut self, a: &Self, b: &Self);
    fn div_assign(&mut self, d: &Self);
    fn max_pivots() -> usize;
}

impl Field for Rational {
    fn nil() -> Self {
        <Rational as Zero>::zero()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn eps(_tol: f64) -> Self {
        <Rational as Zero>::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn div_assign(&mut self, d: &Self) {
        *self /= d;
    }
    fn max_pivots() -> usize {
        1_000_000
    }
}

impl Field for f64 {
    fn nil() -> Self {
        0.0
    }
    fn from_rational(r: &Rational) -> Self {
        num::to_f64(r)
    }
    fn to_rational(&self) -> Rational {
        num::from_f64(*self)
    }
    fn eps(tol: f64) -> Self {
        // Pivot threshold well below the certification tolerance.
        (tol * 1e-3).max(1e-14)
    }
    fn is_nil(&self) -> bool {
        *self == 0.0
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
        if self.abs() < 1e-15 {
            *self = 0.0;
        }
    }
    fn div_assign(&mut self, d: &Self) {
        *self /= d;
    }
    fn max_pivots() -> usize {
        50_000
    }
}

/// How an original variable is expressed through non-negative tableau columns.
#[derive(Debug, Clone)]
enum VarMap {
    /// x = lo + col
    Shift { col: usize, lo: Rational },
    /// x = hi - col
    Mirror { col: usize, hi: Rational },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

struct Tableau<T: Field> {
    /// m rows, each `ncols + 1` wide; the last entry is the right-hand side.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// Reduced-cost row, same width; last entry is minus the objective.
    obj: Vec<T>,
    ncols: usize,
    first_artificial: usize,
    eps: T,
    pivots: usize,
}

impl<T: Field> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            if !x.is_nil() {
                x.div_assign(&p);
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..=self.ncols).filter(|&k| !pivot_row[k].is_nil()).collect();
        for row in self.rows.iter_mut() {
            if row.is_empty() || row[c].is_nil() {
                continue;
            }
            let f = row[c].clone();
            for &k in &nz {
                row[k].sub_mul(&f, &pivot_row[k]);
            }
        }
        if !self.obj[c].is_nil() {
            let f = self.obj[c].clone();
            for &k in &nz {
                self.obj[k].sub_mul(&f, &pivot_row[k]);
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Loads a cost vector and prices out the current basis.
    fn set_costs(&mut self, costs: &[T]) {
        let mut obj: Vec<T> = costs.to_vec();
        obj.push(T::nil());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &costs[b];
            if cb.is_nil() {
                continue;
            }
            for (o, x) in obj.iter_mut().zip(row) {
                if !x.is_nil() {
                    o.sub_mul(cb, x);
                }
            }
        }
        self.obj = obj;
    }

    /// Bland's rule: lowest-index improving column, ratio ties broken by the
    /// lowest basic index. Returns false on an unbounded direction.
    fn optimize(&mut self) -> Result<bool, LpError> {
        let neg_eps = self.eps.neg();
        loop {
            if self.pivots > T::max_pivots() {
                return Err(LpError::RetryExact(format!("pivot limit {} reached", T::max_pivots())));
            }
            let Some(c) = (0..self.first_artificial).find(|&j| self.obj[j] < neg_eps) else {
                return Ok(true);
            };
            let mut best: Option<(usize, T)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[c] <= self.eps {
                    continue;
                }
                let ratio = row[self.ncols].div(&row[c]);
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Ok(false),
            }
        }
    }
}

pub(super) fn solve_generic<T: Field>(lp: &LinearProgram, tol: f64) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();

    // Column layout: structural, then slacks, then artificials.
    let mut maps = Vec::with_capacity(n);
    let mut nstruct = 0;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        match (&b.lower, &b.upper) {
            (Some(lo), hi) => {
                if let Some(hi) = hi {
                    bound_rows.push((nstruct, hi - lo));
                }
                maps.push(VarMap::Shift {
                    col: nstruct,
                    lo: lo.clone(),
                });
                nstruct += 1;
            }
            (None, Some(hi)) => {
                maps.push(VarMap::Mirror {
                    col: nstruct,
                    hi: hi.clone(),
                });
                nstruct += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split {
                    pos: nstruct,
                    neg: nstruct + 1,
                });
                nstruct += 2;
            }
        }
    }

    // Rows in structural coordinates: (coeffs, relation, rhs).
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); nstruct];
        let mut rhs = c.rhs.clone();
        for (a, m) in c.coeffs.iter().zip(&maps) {
            if a.is_zero() {
                continue;
            }
            match m {
                VarMap::Shift { col, lo } => {
                    coeffs[*col] += a;
                    rhs -= a * lo;
                }
                VarMap::Mirror { col, hi } => {
                    coeffs[*col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.relation, rhs));
    }
    for (col, width) in bound_rows {
        let mut coeffs = vec![Rational::zero(); nstruct];
        coeffs[col] = Rational::one();
        rows.push((coeffs, Relation::Le, width));
    }

    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let first_artificial = nstruct + nslack;
    let mut flipped = vec![false; m];
    let mut init_col = vec![0usize; m];
    let mut needs_artificial = vec![false; m];
    let mut slack_of = vec![None; m];
    {
        let mut s = nstruct;
        for (i, (_, rel, rhs)) in rows.iter().enumerate() {
            flipped[i] = rhs.is_negative();
            if *rel != Relation::Eq {
                slack_of[i] = Some(s);
                let slack_sign_positive = (*rel == Relation::Le) != flipped[i];
                if slack_sign_positive {
                    init_col[i] = s;
                } else {
                    needs_artificial[i] = true;
                }
                s += 1;
            } else {
                needs_artificial[i] = true;
            }
        }
    }
    let nart = needs_artificial.iter().filter(|&&a| a).count();
    let ncols = first_artificial + nart;

    let mut table: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut a = first_artificial;
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        let sign = if flipped[i] { -1 } else { 1 };
        let mut row = vec![T::nil(); ncols + 1];
        for (j, v) in coeffs.iter().enumerate() {
            if !v.is_zero() {
                row[j] = T::from_rational(&(v * num::int(sign)));
            }
        }
        if let Some(s) = slack_of[i] {
            let base = if *rel == Relation::Le { 1 } else { -1 };
            row[s] = T::from_rational(&num::int(base * sign));
        }
        if needs_artificial[i] {
            row[a] = T::from_rational(&num::int(1));
            init_col[i] = a;
            a += 1;
        }
        row[ncols] = T::from_rational(&(rhs * num::int(sign)));
        basis[i] = init_col[i];
        table.push(row);
    }

    let mut tab = Tableau {
        rows: table,
        basis,
        obj: Vec::new(),
        ncols,
        first_artificial,
        eps: T::eps(tol),
        pivots: 0,
    };

    // Phase I: minimise the sum of artificials.
    if nart > 0 {
        let mut costs = vec![T::nil(); ncols];
        for c in costs.iter_mut().skip(first_artificial) {
            *c = T::from_rational(&num::int(1));
        }
        tab.set_costs(&costs);
        // Artificials never re-enter, but they may start basic.
        tab.optimize()?;
        let infeasibility = tab.obj[ncols].neg();
        if infeasibility > tab.eps {
            return Ok(LpSolution::without_solution(LpStatus::Infeasible, tab.pivots));
        }
        for r in 0..m {
            if tab.basis[r] < first_artificial {
                continue;
            }
            let candidate = (0..first_artificial).find(|&j| {
                let v = &tab.rows[r][j];
                v > &tab.eps || v < &tab.eps.neg()
            });
            if let Some(j) = candidate {
                tab.pivot(r, j);
            }
        }
    }

    // Phase II on the minimisation form.
    let flip_obj = lp.sense == Sense::Maximize;
    let mut costs_q = vec![Rational::zero(); ncols];
    let mut obj_const = Rational::zero();
    for (cj, m) in lp.objective.iter().zip(&maps) {
        let c = if flip_obj { -cj } else { cj.clone() };
        match m {
            VarMap::Shift { col, lo } => {
                costs_q[*col] += &c;
                obj_const += &c * lo;
            }
            VarMap::Mirror { col, hi } => {
                costs_q[*col] -= &c;
                obj_const += &c * hi;
            }
            VarMap::Split { pos, neg } => {
                costs_q[*pos] += &c;
                costs_q[*neg] -= &c;
            }
        }
    }
    let costs: Vec<T> = costs_q.iter().map(T::from_rational).collect();
    tab.set_costs(&costs);
    if !tab.optimize()? {
        return Ok(LpSolution::without_solution(LpStatus::Unbounded, tab.pivots));
    }

    let mut xs = vec![Rational::zero(); ncols];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        xs[b] = row[ncols].to_rational();
    }
    let primal: Vec<Rational> = maps
        .iter()
        .map(|m| match m {
            VarMap::Shift { col, lo } => lo + &xs[*col],
            VarMap::Mirror { col, hi } => hi - &xs[*col],
            VarMap::Split { pos, neg } => &xs[*pos] - &xs[*neg],
        })
        .collect();

    // y_i = -reduced cost of the row's initial identity column (zero cost).
    let sense_sign = if flip_obj { num::int(-1) } else { num::int(1) };
    let duals: Vec<Rational> = (0..lp.constraints.len())
        .map(|i| {
            let y = tab.obj[init_col[i]].to_rational();
            let row_sign = if flipped[i] { num::int(-1) } else { num::int(1) };
            -y * row_sign * &sense_sign
        })
        .collect();
    let reduced_costs: Vec<Rational> = (0..n)
        .map(|j| {
            let mut d = lp.objective[j].clone();
            for (c, y) in lp.constraints.iter().zip(&duals) {
                if !c.coeffs[j].is_zero() && !y.is_zero() {
                    d -= &c.coeffs[j] * y;
                }
            }
            d
        })
        .collect();
    let objective = num::dot(&lp.objective, &primal);
    let _ = obj_const;

    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        duals,
        reduced_costs,
        objective,
        pivots: tab.pivots,
    })
}
