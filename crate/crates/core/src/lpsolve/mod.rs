//! Dense two-phase simplex with exact-rational and `f64` backends, plus a
//! brute-force vertex enumerator used as an oracle on tiny polytopes.
//!
//! Every optimal solution carries primal values, one dual value per
//! constraint, and reduced costs per variable, so callers (and tests) can
//! check feasibility, complementary slackness and the duality gap against the
//! original data rather than trusting the tableau.

mod simplex;
mod vertices;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::num::{self, Arithmetic, Rational};

pub use vertices::{enumerate_vertices, MAX_VERTEX_DIMENSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Per-variable bounds; `None` means infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bound {
    pub fn non_negative() -> Self {
        Bound {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Bound {
            lower: None,
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        Bound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// All variables start non-negative.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![Bound::non_negative(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn set_bound(&mut self, var: usize, bound: Bound) {
        self.bounds[var] = bound;
    }

    pub fn check_dimensions(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::Dimension(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Dimension(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless optimal.
    pub primal: Vec<Rational>,
    /// One per constraint, Lagrangian sign convention: the dual objective is
    /// `Σ duals[i]·rhs[i]` plus bound terms from `reduced_costs`.
    pub duals: Vec<Rational>,
    /// `c - Aᵀy`.
    pub reduced_costs: Vec<Rational>,
    pub objective: Rational,
    pub pivots: usize,
}

impl LpSolution {
    fn without_solution(status: LpStatus, pivots: usize) -> Self {
        LpSolution {
            status,
            primal: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: Rational::zero(),
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Residuals of the optimality certificate measured on the original data.
    pub fn check(&self, lp: &LinearProgram) -> OptimalityCheck {
        check_certificate(lp, self)
    }
}

/// All fields are zero for an exactly optimal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCheck {
    pub primal_infeasibility: Rational,
    pub dual_infeasibility: Rational,
    pub complementary_slackness: Rational,
    pub dual_objective: Rational,
    pub duality_gap: Rational,
}

impl OptimalityCheck {
    pub fn worst(&self) -> Rational {
        [
            &self.primal_infeasibility,
            &self.dual_infeasibility,
            &self.complementary_slackness,
            &self.duality_gap,
        ]
        .into_iter()
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero)
    }

    pub fn is_exact(&self) -> bool {
        self.worst().is_zero()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("floating-point simplex could not certify its result ({0}); retry in exact mode")]
    RetryExact(String),
    #[error("vertex enumeration limited to dimension {max}, got {got}")]
    DimensionGuard { got: usize, max: usize },
    #[error("vertex enumeration would visit {0} candidate bases")]
    TooManyBases(u128),
}

pub fn solve(lp: &LinearProgram, arith: Arithmetic) -> Result<LpSolution, LpError> {
    lp.check_dimensions()?;
    match arith {
        Arithmetic::Exact => Ok(simplex::solve_generic::<Rational>(lp, 0.0)?),
        Arithmetic::Float { tol } => {
            let sol = simplex::solve_generic::<f64>(lp, tol)?;
            if sol.is_optimal() {
                let check = sol.check(lp);
                let scale = num::int(1) + data_scale(lp);
                let limit = num::from_f64(tol) * scale;
                if check.worst() > limit {
                    return Err(LpError::RetryExact(format!(
                        "certificate residual {} exceeds {}",
                        num::to_f64(&check.worst()),
                        num::to_f64(&limit)
                    )));
                }
            }
            Ok(sol)
        }
    }
}

fn data_scale(lp: &LinearProgram) -> Rational {
    let rhs = num::max_abs(lp.constraints.iter().map(|c| &c.rhs));
    let obj = num::max_abs(&lp.objective);
    rhs.max(obj)
}

fn check_certificate(lp: &LinearProgram, sol: &LpSolution) -> OptimalityCheck {
    let zero = Rational::zero();
    let x = &sol.primal;
    let maximize = lp.sense == Sense::Maximize;

    let mut primal_inf = zero.clone();
    let mut dual_inf = zero.clone();
    let mut slackness = zero.clone();
    let mut dual_obj = zero.clone();

    for (c, y) in lp.constraints.iter().zip(&sol.duals) {
        let lhs = num::dot(&c.coeffs, x);
        let slack = &lhs - &c.rhs;
        let viol = match c.relation {
            Relation::Le => num::positive_part(&slack),
            Relation::Ge => num::positive_part(&-&slack),
            Relation::Eq => slack.abs(),
        };
        primal_inf = primal_inf.max(viol);
        // Sign of a valid multiplier: for min, ≥ rows take y ≥ 0 and ≤ rows y ≤ 0.
        let wrong_sign = match (c.relation, maximize) {
            (Relation::Ge, false) | (Relation::Le, true) => num::positive_part(&-y),
            (Relation::Le, false) | (Relation::Ge, true) => num::positive_part(y),
            (Relation::Eq, _) => zero.clone(),
        };
        dual_inf = dual_inf.max(wrong_sign);
        if c.relation != Relation::Eq {
            slackness = slackness.max((y * &slack).abs());
        }
        dual_obj += y * &c.rhs;
    }

    for ((d, b), xj) in sol.reduced_costs.iter().zip(&lp.bounds).zip(x) {
        let lower = b.lower.as_ref();
        let upper = b.upper.as_ref();
        if let Some(lo) = lower {
            primal_inf = primal_inf.max(num::positive_part(&(lo - xj)));
        }
        if let Some(hi) = upper {
            primal_inf = primal_inf.max(num::positive_part(&(xj - hi)));
        }
        if d.is_zero() {
            continue;
        }
        // For min a positive reduced cost pins the variable at its lower bound.
        let at_lower = d.is_positive() != maximize;
        let bound = if at_lower { lower } else { upper };
        match bound {
            Some(v) => {
                dual_obj += d * v;
                slackness = slackness.max((d * (xj - v)).abs());
            }
            None => dual_inf = dual_inf.max(d.abs()),
        }
    }

    let primal_obj = num::dot(&lp.objective, x);
    let gap = (&primal_obj - &dual_obj).abs();
    let obj_mismatch = (&primal_obj - &sol.objective).abs();
    OptimalityCheck {
        primal_infeasibility: primal_inf,
        dual_infeasibility: dual_inf,
        complementary_slackness: slackness,
        dual_objective: dual_obj,
        duality_gap: gap.max(obj_mismatch),
    }
}
