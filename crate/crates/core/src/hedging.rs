//! Super-replication prices and hedges, the interval of arbitrage-free
//! prices, and finite-space checks of the polar-cone and attainability
//! characterisations.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ftap::{
    combination, find_measure, ftap_verdict, FtapError, MeasureCertificate, MeasureKind, OutcomeClasses, Verdict,
};
use crate::linalg;
use crate::lpsolve::{self, enumerate_vertices, Bound, LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::market::{enumerate_generators, Generator, MarketModel, SignConstraint, Strategy};
use crate::num::{self, Arithmetic, Rational};
use crate::probspace::RandomVariable;

/// Largest outcome count for [`polar_cone_check`].
pub const MAX_POLAR_OUTCOMES: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HedgingError {
    #[error(transparent)]
    Ftap(#[from] FtapError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("unpriced market: the model admits arbitrage")]
    Unpriced,
    #[error("claim has {got} values for {expected} outcomes")]
    ClaimShape { expected: usize, got: usize },
    #[error("polar-cone check limited to {max} outcomes, got {got}")]
    TooManyOutcomes { got: usize, max: usize },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

/// Super-hedge `x + Gλ ≥ f` for a claim `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeCertificate {
    pub price: Rational,
    pub lambda: Vec<Rational>,
    pub claim: RandomVariable,
    /// `x + Gλ − f`: what the hedge throws away. Non-negative everywhere and
    /// zero wherever the dual optimiser puts mass.
    pub consumption: RandomVariable,
    pub strategy: Strategy,
}

impl HedgeCertificate {
    /// Largest shortfall of the hedge below the claim (zero when valid).
    pub fn shortfall(&self) -> Rational {
        num::max_abs(self.consumption.values().iter().filter(|x| x.is_negative()))
    }

    /// `Σ q·(x + Gλ − f)`, zero under complementary slackness.
    pub fn slackness(&self, q: &[Rational]) -> Rational {
        self.consumption.integrate(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superhedge {
    pub mode: SignConstraint,
    pub hedge: HedgeCertificate,
    pub dual: MeasureCertificate,
    /// Optimum of the dual program; equals `hedge.price` exactly in exact mode.
    pub dual_value: Rational,
    pub duality_gap: Rational,
}

fn check_claim(model: &MarketModel, f: &RandomVariable) -> Result<(), HedgingError> {
    if f.len() != model.outcome_count() {
        return Err(HedgingError::ClaimShape {
            expected: model.outcome_count(),
            got: f.len(),
        });
    }
    Ok(())
}

fn require_no_arbitrage(model: &MarketModel, mode: SignConstraint, arith: Arithmetic) -> Result<(), HedgingError> {
    match ftap_verdict(model, mode, arith)? {
        Verdict::NoArbitrage(_) => Ok(()),
        Verdict::Arbitrage(_) => Err(HedgingError::Unpriced),
    }
}

fn hedge_lp(gens: &[Generator], classes: &OutcomeClasses, f: &RandomVariable, mode: SignConstraint) -> LinearProgram {
    let k = gens.len();
    let mut objective = vec![Rational::zero(); 1 + k];
    objective[0] = Rational::one();
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    lp.set_bound(0, Bound::free());
    if mode == SignConstraint::Free {
        for j in 0..k {
            lp.set_bound(1 + j, Bound::free());
        }
    }
    for c in 0..classes.len() {
        let mut row = vec![Rational::one()];
        row.extend(gens.iter().map(|g| classes.value(&g.payoff, c)));
        lp.constrain(row, Relation::Ge, classes.value(f, c));
    }
    lp
}

/// Class masses `q ≥ 0`, `Σq = 1`, `qᵀg = 0` (or `≤ 0`) for every generator.
fn polytope_lp(
    gens: &[Generator],
    classes: &OutcomeClasses,
    kind: MeasureKind,
    sense: Sense,
    objective: Vec<Rational>,
) -> LinearProgram {
    let m = classes.len();
    let mut lp = LinearProgram::new(sense, objective);
    lp.constrain(vec![Rational::one(); m], Relation::Eq, Rational::one());
    let relation = match kind {
        MeasureKind::Martingale => Relation::Eq,
        MeasureKind::Supermartingale => Relation::Le,
    };
    for g in gens {
        let row = (0..m).map(|c| classes.value(&g.payoff, c)).collect();
        lp.constrain(row, relation, Rational::zero());
    }
    lp
}

/// The dual polytope on the full outcome space (no class merging), for
/// oracles and vertex enumeration.
pub fn dual_polytope(model: &MarketModel, mode: SignConstraint) -> LinearProgram {
    let n = model.outcome_count();
    let gens = enumerate_generators(model, mode);
    let mut lp = LinearProgram::new(Sense::Maximize, vec![Rational::zero(); n]);
    lp.constrain(vec![Rational::one(); n], Relation::Eq, Rational::one());
    let relation = match mode {
        SignConstraint::Free => Relation::Eq,
        SignConstraint::LongOnly => Relation::Le,
    };
    for g in &gens {
        lp.constrain(g.payoff.values().to_vec(), relation, Rational::zero());
    }
    lp
}

fn float_gap_limit(arith: Arithmetic, f: &RandomVariable) -> Rational {
    arith.tolerance() * (Rational::one() + num::max_abs(f.values()))
}

/// Cheapest super-hedge of `f` and the dual measure attaining the same value.
pub fn superreplicate(
    model: &MarketModel,
    f: &RandomVariable,
    mode: SignConstraint,
    arith: Arithmetic,
) -> Result<Superhedge, HedgingError> {
    check_claim(model, f)?;
    require_no_arbitrage(model, mode, arith)?;
    let n = model.outcome_count();
    let gens = enumerate_generators(model, mode);
    let classes = OutcomeClasses::new(n, &gens, &[f]);

    let primal = lpsolve::solve(&hedge_lp(&gens, &classes, f, mode), arith)?;
    let objective = (0..classes.len()).map(|c| classes.value(f, c)).collect();
    let kind = MeasureKind::for_mode(mode);
    let dual = lpsolve::solve(&polytope_lp(&gens, &classes, kind, Sense::Maximize, objective), arith)?;
    if primal.status != LpStatus::Optimal || dual.status != LpStatus::Optimal {
        return Err(HedgingError::Inconsistent(format!(
            "hedging programs returned {:?} / {:?} in a market without arbitrage",
            primal.status, dual.status
        )));
    }

    let lambda: Vec<Rational> = primal.primal[1..].to_vec();
    let gl = combination(n, &gens, &lambda);
    // Lift x by any rounding shortfall so the hedge dominates f exactly.
    let mut price = primal.primal[0].clone();
    let short = num::max_abs(f.sub(&gl).shift(&-&price).values().iter().filter(|x| x.is_positive()));
    price += short;
    let consumption = gl.shift(&price).sub(f);

    let gap = (&price - &dual.objective).abs();
    let limit = if arith.is_exact() {
        Rational::zero()
    } else {
        float_gap_limit(arith, f)
    };
    if gap > limit {
        return Err(HedgingError::Inconsistent(format!(
            "duality gap {} between hedge price and dual value",
            num::format_rational(&gap)
        )));
    }

    let q = classes.spread(&dual.primal);
    Ok(Superhedge {
        mode,
        hedge: HedgeCertificate {
            price,
            strategy: Strategy::from_generators(model, &gens, &lambda, mode),
            lambda,
            claim: f.clone(),
            consumption,
        },
        dual: MeasureCertificate::new(q, kind, &gens),
        dual_value: dual.objective,
        duality_gap: gap,
    })
}

/// Exact replication `x + Gλ = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub price: Rational,
    pub lambda: Vec<Rational>,
}

/// For a non-attainable claim: a full-support martingale measure whose value
/// is within `eta` of the upper bound, mixed from the boundary optimiser.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingWitness {
    pub optimizer: Vec<Rational>,
    /// Outcomes the boundary optimiser does not charge.
    pub null_outcomes: Vec<usize>,
    pub interior: Vec<Rational>,
    pub weight: Rational,
    pub mixed: Vec<Rational>,
    pub mixed_value: Rational,
    pub eta: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceInterval {
    pub lower: Rational,
    pub upper: Rational,
    pub lower_attained: bool,
    pub upper_attained: bool,
    pub replication: Option<Replication>,
    pub witness: Option<MixingWitness>,
}

impl PriceInterval {
    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn is_attainable(&self) -> bool {
        self.lower == self.upper
    }
}

fn extreme_value(
    gens: &[Generator],
    classes: &OutcomeClasses,
    f: &RandomVariable,
    sense: Sense,
    arith: Arithmetic,
) -> Result<(Rational, Vec<Rational>), HedgingError> {
    let objective = (0..classes.len()).map(|c| classes.value(f, c)).collect();
    let sol = lpsolve::solve(
        &polytope_lp(gens, classes, MeasureKind::Martingale, sense, objective),
        arith,
    )?;
    if sol.status != LpStatus::Optimal {
        return Err(HedgingError::Inconsistent(format!(
            "price bound program is {:?}",
            sol.status
        )));
    }
    Ok((sol.objective, classes.spread(&sol.primal)))
}

/// Whether some full-support martingale measure prices `f` at `value`.
fn attained_by_full_support(
    gens: &[Generator],
    classes: &OutcomeClasses,
    f: &RandomVariable,
    value: &Rational,
    arith: Arithmetic,
) -> Result<bool, HedgingError> {
    let m = classes.len();
    let total = num::int(classes.class_of.len() as i64);
    let mut objective = vec![Rational::one()];
    objective.extend(std::iter::repeat_n(Rational::zero(), m));
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    let mut row = vec![total];
    row.extend(std::iter::repeat_n(Rational::one(), m));
    lp.constrain(row, Relation::Eq, Rational::one());
    let weighted = |x: &RandomVariable| {
        let vals: Vec<Rational> = (0..m).map(|c| classes.value(x, c)).collect();
        let eps = (0..m).fold(Rational::zero(), |acc, c| acc + &vals[c] * classes.size(c));
        let mut row = vec![eps];
        row.extend(vals);
        row
    };
    for g in gens {
        lp.constrain(weighted(&g.payoff), Relation::Eq, Rational::zero());
    }
    lp.constrain(weighted(f), Relation::Eq, value.clone());
    let sol = lpsolve::solve(&lp, arith)?;
    Ok(sol.status == LpStatus::Optimal && sol.objective > arith.tolerance())
}

/// Smallest and largest martingale-measure value of `f`, with either an
/// exact replication (zero width) or a mixing witness for the upper bound.
pub fn price_interval(
    model: &MarketModel,
    f: &RandomVariable,
    eta: &Rational,
    arith: Arithmetic,
) -> Result<PriceInterval, HedgingError> {
    check_claim(model, f)?;
    require_no_arbitrage(model, SignConstraint::Free, arith)?;
    let n = model.outcome_count();
    let gens = enumerate_generators(model, SignConstraint::Free);
    let classes = OutcomeClasses::new(n, &gens, &[f]);
    let (lower, _) = extreme_value(&gens, &classes, f, Sense::Minimize, arith)?;
    let (upper, q_star) = extreme_value(&gens, &classes, f, Sense::Maximize, arith)?;
    let lower_attained = attained_by_full_support(&gens, &classes, f, &lower, arith)?;
    let upper_attained = attained_by_full_support(&gens, &classes, f, &upper, arith)?;

    let close = if arith.is_exact() {
        lower == upper
    } else {
        (&upper - &lower).abs() <= float_gap_limit(arith, f)
    };
    let mut interval = PriceInterval {
        lower,
        upper,
        lower_attained,
        upper_attained,
        replication: None,
        witness: None,
    };
    if close {
        let (x, lambda) = replicate(n, &gens, f).ok_or_else(|| {
            HedgingError::Inconsistent("zero-width interval but the replication system is inconsistent".into())
        })?;
        interval.replication = Some(Replication { price: x, lambda });
        return Ok(interval);
    }

    let interior = find_measure(model, MeasureKind::Martingale, arith)?
        .ok_or_else(|| HedgingError::Inconsistent("no full-support martingale measure".into()))?
        .q;
    let upper = &interval.upper;
    let inner_value = f.integrate(&interior);
    let distance = upper - &inner_value;
    if !distance.is_positive() {
        return Err(HedgingError::Inconsistent(
            "full-support measure attains the upper bound of a non-attainable claim".into(),
        ));
    }
    let weight = (eta / &distance).min(num::ratio(1, 2));
    let keep = Rational::one() - &weight;
    let mixed: Vec<Rational> = q_star
        .iter()
        .zip(&interior)
        .map(|(a, b)| a * &keep + b * &weight)
        .collect();
    let mixed_value = f.integrate(&mixed);
    interval.witness = Some(MixingWitness {
        null_outcomes: q_star
            .iter()
            .enumerate()
            .filter(|(_, x)| x.is_zero())
            .map(|(w, _)| w)
            .collect(),
        optimizer: q_star,
        interior,
        weight,
        mixed,
        mixed_value,
        eta: eta.clone(),
    });
    Ok(interval)
}

/// Solves `x·𝟙 + Gλ = f`.
fn replicate(n: usize, gens: &[Generator], f: &RandomVariable) -> Option<(Rational, Vec<Rational>)> {
    let rows: Vec<Vec<Rational>> = (0..n)
        .map(|w| {
            let mut r = vec![Rational::one()];
            r.extend(gens.iter().map(|g| g.payoff[w].clone()));
            r
        })
        .collect();
    let sol = linalg::solve(&rows, f.values(), 1 + gens.len())?;
    Some((sol[0].clone(), sol[1..].to_vec()))
}

/// The three finite-space descriptions of attainability, side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct AttainabilityReport {
    /// Price at which `f − x ∈ C ∩ −C`, when the cone route succeeds.
    pub price: Option<Rational>,
    /// `f − x ∈ C ∩ −C`, via super-hedging `f` and `−f`.
    pub cone: bool,
    /// `E_Q[f − x] = 0` at every vertex of the dual polytope.
    pub vertices: bool,
    /// `f − x` in the span of the generators.
    pub span: bool,
    pub vertex_count: usize,
}

impl AttainabilityReport {
    pub fn consistent(&self) -> bool {
        self.cone == self.vertices && self.vertices == self.span
    }
}

pub fn attainability_set_check(
    model: &MarketModel,
    f: &RandomVariable,
    arith: Arithmetic,
) -> Result<AttainabilityReport, HedgingError> {
    check_claim(model, f)?;
    let n = model.outcome_count();
    let up = superreplicate(model, f, SignConstraint::Free, arith)?;
    let down = superreplicate(model, &f.scale(&-Rational::one()), SignConstraint::Free, arith)?;
    let lower = -down.hedge.price;
    let cone = up.hedge.price <= lower;

    let vertices = enumerate_vertices(&dual_polytope(model, SignConstraint::Free))?;
    let values: Vec<Rational> = vertices.iter().map(|q| f.integrate(q)).collect();
    let vertex_route = !values.is_empty() && values.iter().all(|v| *v == values[0]);

    let gens = enumerate_generators(model, SignConstraint::Free);
    let span = replicate(n, &gens, f).is_some();

    Ok(AttainabilityReport {
        price: cone.then_some(up.hedge.price),
        cone,
        vertices: vertex_route,
        span,
        vertex_count: vertices.len(),
    })
}

/// Extreme rays of the polar cone of `C` next to the dual-polytope vertices,
/// both as densities with respect to the reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarReport {
    pub polar_rays: Vec<Vec<Rational>>,
    pub vertex_densities: Vec<Vec<Rational>>,
    /// Every polar ray lies in the cone over the dual polytope.
    pub polar_in_dual: bool,
    /// Every scaled vertex lies in the polar cone.
    pub dual_in_polar: bool,
}

impl PolarReport {
    pub fn holds(&self) -> bool {
        self.polar_in_dual && self.dual_in_polar
    }
}

/// Extreme rays of `{z ≥ 0 : zᵀg = 0 ∀g}`, normalised to unit mass: minimal
/// supports on which the restricted system has a one-dimensional, strictly
/// positive solution set.
fn polar_extreme_rays(n: usize, gens: &[Generator]) -> Vec<Vec<Rational>> {
    let mut rays = std::collections::BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|w| mask & (1 << w) != 0).collect();
        let rows: Vec<Vec<Rational>> = gens
            .iter()
            .map(|g| support.iter().map(|&w| g.payoff[w].clone()).collect())
            .collect();
        let basis = linalg::nullspace(&rows, support.len());
        if basis.len() != 1 {
            continue;
        }
        let v = &basis[0];
        let sign = if v[0].is_negative() {
            -Rational::one()
        } else {
            Rational::one()
        };
        if !v.iter().all(|x| (x * &sign).is_positive()) {
            continue;
        }
        let total: Rational = v.iter().map(|x| x * &sign).sum();
        let mut z = vec![Rational::zero(); n];
        for (k, &w) in support.iter().enumerate() {
            z[w] = &v[k] * &sign / &total;
        }
        rays.insert(z);
    }
    rays.into_iter().collect()
}

/// Double-inclusion check that the polar of `C` is the cone over the closed
/// set of martingale measures.
pub fn polar_cone_check(model: &MarketModel, arith: Arithmetic) -> Result<PolarReport, HedgingError> {
    let n = model.outcome_count();
    if n > MAX_POLAR_OUTCOMES {
        return Err(HedgingError::TooManyOutcomes {
            got: n,
            max: MAX_POLAR_OUTCOMES,
        });
    }
    require_no_arbitrage(model, SignConstraint::Free, arith)?;
    let gens = enumerate_generators(model, SignConstraint::Free);
    let p = model.space.probs();
    let density = |q: &Vec<Rational>| -> Vec<Rational> { q.iter().zip(p).map(|(a, b)| a / b).collect() };

    let rays = polar_extreme_rays(n, &gens);
    let vertices = enumerate_vertices(&dual_polytope(model, SignConstraint::Free))?;

    let in_polar =
        |q: &Vec<Rational>| q.iter().all(|x| !x.is_negative()) && gens.iter().all(|g| g.payoff.integrate(q).is_zero());
    let dual_in_polar = vertices.iter().all(in_polar);
    // A normalised extreme ray of the polar is a vertex of its unit-mass slice.
    let polar_in_dual = rays.iter().all(|r| vertices.contains(r));

    Ok(PolarReport {
        polar_rays: rays.iter().map(density).collect(),
        vertex_densities: vertices.iter().map(density).collect(),
        polar_in_dual,
        dual_in_polar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::num::{int, ratio};

    fn exact() -> Arithmetic {
        Arithmetic::Exact
    }

    #[test]
    fn constants_cost_their_value() {
        let m = canonical::delayed_binomial();
        let f = RandomVariable::constant(4, ratio(7, 3));
        let s = superreplicate(&m, &f, SignConstraint::Free, exact()).unwrap();
        assert_eq!(s.hedge.price, ratio(7, 3));
        assert!(s.hedge.lambda.iter().all(Zero::is_zero));
        assert!(s.duality_gap.is_zero());
    }

    #[test]
    fn binomial_call() {
        let m = canonical::one_period_binomial();
        let f = RandomVariable::from_ints(&[1, 0]);
        let s = superreplicate(&m, &f, SignConstraint::Free, exact()).unwrap();
        assert_eq!(s.hedge.price, ratio(1, 3));
        assert_eq!(s.hedge.lambda, vec![ratio(2, 3)]);
        assert!(s.hedge.consumption.is_zero());
        assert_eq!(s.dual.q, vec![ratio(1, 3), ratio(2, 3)]);
        let i = price_interval(&m, &f, &ratio(1, 1_000_000), exact()).unwrap();
        assert!(i.is_attainable());
        assert_eq!(i.replication.unwrap().lambda, vec![ratio(2, 3)]);
    }

    #[test]
    fn arbitrage_market_is_unpriced() {
        let m = canonical::deterministic_increase();
        let f = RandomVariable::zeros(4);
        assert_eq!(
            superreplicate(&m, &f, SignConstraint::Free, exact()),
            Err(HedgingError::Unpriced)
        );
    }

    #[test]
    fn traded_asset_gain_is_attainable() {
        let m = canonical::delayed_binomial();
        let f = m.prices[0][2].sub(&m.prices[0][0]);
        let i = price_interval(&m, &f, &ratio(1, 1_000_000), exact()).unwrap();
        assert_eq!((i.lower.clone(), i.upper.clone()), (int(0), int(0)));
        let r = i.replication.unwrap();
        assert_eq!(r.price, int(0));
        let gens = enumerate_generators(&m, SignConstraint::Free);
        assert_eq!(combination(4, &gens, &r.lambda), f);
    }

    #[test]
    fn complete_market_prices_everything() {
        let m = canonical::two_period_binomial();
        for f in [[1, 0, 0, 0], [5, -2, 3, 7], [0, 0, 0, 1]] {
            let i = price_interval(&m, &RandomVariable::from_ints(&f), &ratio(1, 10), exact()).unwrap();
            assert!(i.is_attainable());
            assert!(i.upper_attained && i.lower_attained);
        }
    }

    #[test]
    fn delayed_call_has_open_interval() {
        let m = canonical::delayed_binomial();
        let f = m.prices[0][2].map(|x| num::positive_part(&(x - int(4))));
        let eta = ratio(1, 1_000_000);
        let i = price_interval(&m, &f, &eta, exact()).unwrap();
        assert!(i.width().is_positive());
        assert!(!i.upper_attained && !i.lower_attained);
        let w = i.witness.unwrap();
        assert!(!w.null_outcomes.is_empty());
        assert!(w.mixed.iter().all(Signed::is_positive));
        assert!(&i.upper - &w.mixed_value <= eta);
        assert!(w.mixed_value < i.upper);

        // Price equals the best vertex of the dual polytope.
        let s = superreplicate(&m, &f, SignConstraint::Free, exact()).unwrap();
        let best = enumerate_vertices(&dual_polytope(&m, SignConstraint::Free))
            .unwrap()
            .iter()
            .map(|q| f.integrate(q))
            .max()
            .unwrap();
        assert_eq!(s.hedge.price, best);
        assert_eq!(s.hedge.price, i.upper);
        assert!(s.hedge.slackness(&s.dual.q).is_zero());
        assert!(s.hedge.shortfall().is_zero());
    }

    #[test]
    fn long_only_costs_at_least_as_much() {
        let m = canonical::delayed_binomial();
        let f = RandomVariable::from_ints(&[3, 0, 1, 2]);
        let free = superreplicate(&m, &f, SignConstraint::Free, exact()).unwrap();
        let long = superreplicate(&m, &f, SignConstraint::LongOnly, exact()).unwrap();
        assert!(long.hedge.price >= free.hedge.price);
        assert!(long.hedge.lambda.iter().all(|x| !x.is_negative()));
        assert_eq!(long.dual.kind, MeasureKind::Supermartingale);
    }

    #[test]
    fn attainability_examples() {
        let m = canonical::delayed_binomial();
        let gens = enumerate_generators(&m, SignConstraint::Free);
        let in_k0 = combination(4, &gens, &[int(2), int(-1)]);
        let r = attainability_set_check(&m, &in_k0, exact()).unwrap();
        assert!(r.cone && r.vertices && r.span);
        assert_eq!(r.price, Some(int(0)));

        let one = RandomVariable::constant(4, int(1));
        let r = attainability_set_check(&m, &one, exact()).unwrap();
        assert!(r.cone && r.vertices && r.span);
        assert_eq!(r.price, Some(int(1)));

        let call = RandomVariable::from_ints(&[5, 0, 0, 0]);
        let r = attainability_set_check(&m, &call, exact()).unwrap();
        assert!(!r.cone && !r.vertices && !r.span);
        assert!(r.consistent());
    }

    #[test]
    fn polar_cone_examples() {
        let c = polar_cone_check(&canonical::constant_market(3), exact()).unwrap();
        assert!(c.holds());
        assert_eq!(c.polar_rays.len(), 3);
        assert_eq!(c.polar_rays[0], vec![int(0), int(0), int(3)]);

        let c = polar_cone_check(&canonical::one_period_binomial(), exact()).unwrap();
        assert!(c.holds());
        assert_eq!(c.polar_rays, vec![vec![ratio(2, 3), ratio(4, 3)]]);

        let c = polar_cone_check(&canonical::delayed_binomial(), exact()).unwrap();
        assert!(c.holds());
        assert_eq!(c.polar_rays, c.vertex_densities);
    }

    #[test]
    fn float_mode_matches_exact_price() {
        let m = canonical::two_asset();
        let f = RandomVariable::from_ints(&[4, 1, 0, 2]);
        let e = superreplicate(&m, &f, SignConstraint::Free, exact()).unwrap();
        let x = superreplicate(&m, &f, SignConstraint::Free, Arithmetic::float()).unwrap();
        let diff = num::to_f64(&(&e.hedge.price - &x.hedge.price)).abs();
        assert!(diff < 1e-8, "{diff}");
        assert!(x.hedge.shortfall().is_zero());
    }
}
