use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::{theta_payoff, BayesError, BuiltMarket};
use crate::hedging::superreplicate;
use crate::lpsolve::{self, Bound, LinearProgram, LpStatus, Relation, Sense};
use crate::market::{enumerate_generators, AdmissibleSet, MarketModel, SignConstraint};
use crate::num::{Arithmetic, Rational};
use crate::probspace::{Filtration, Partition, RandomVariable};

/// An option with terminal payoff `payoff` that can only be traded at the
/// grid times `trading_times`, where it is quoted at `prices`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionGridSpec {
    pub name: String,
    pub payoff: RandomVariable,
    pub trading_times: Vec<Rational>,
    pub prices: Vec<RandomVariable>,
}

impl OptionGridSpec {
    fn check(&self, model: &MarketModel) -> Result<(), BayesError> {
        let n = model.outcome_count();
        let bad = |msg: &str| Err(BayesError::OptionPrices(format!("option {}: {msg}", self.name)));
        if self.trading_times.is_empty() {
            return bad("no trading times");
        }
        if self.trading_times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("trading times must increase strictly");
        }
        if self.trading_times.iter().any(|t| model.grid_index(t).is_none()) {
            return bad("trading times must be grid times");
        }
        if self.prices.len() != self.trading_times.len() {
            return bad("one price per trading time required");
        }
        if self.payoff.len() != n || self.prices.iter().any(|p| p.len() != n) {
            return bad("payoff or prices have the wrong length");
        }
        let last = model.grid.last().expect("non-empty grid");
        if let Some(k) = self.trading_times.iter().position(|t| t == last) {
            if self.prices[k] != self.payoff {
                return bad("price at the final time differs from the payoff");
            }
        }
        Ok(())
    }

    /// Quote at the next trading time at or after each grid time, and the
    /// payoff once no trading time is left.
    pub fn extended_prices(&self, grid: &[Rational]) -> Vec<RandomVariable> {
        grid.iter()
            .map(|t| match self.trading_times.iter().position(|s| s >= t) {
                Some(k) => self.prices[k].clone(),
                None => self.payoff.clone(),
            })
            .collect()
    }
}

/// Adds each option as an asset whose price jumps only at its trading times.
/// Every admissible set `A` gains a sibling `A ∪ {options}` trading on the
/// same filtration as `A`. When the look-ahead quotes are not adapted to the
/// big filtration, that filtration becomes the full power set at every time.
pub fn embed_semistatic(model: &MarketModel, specs: &[OptionGridSpec]) -> Result<MarketModel, BayesError> {
    model.ensure_valid()?;
    let mut names: BTreeSet<&str> = model.assets.iter().map(String::as_str).collect();
    for s in specs {
        s.check(model)?;
        if !names.insert(&s.name) {
            return Err(BayesError::OptionPrices(format!("duplicate asset name {}", s.name)));
        }
    }
    let mut m = model.clone();
    let first = m.assets.len();
    for s in specs {
        m.assets.push(s.name.clone());
        m.prices.push(s.extended_prices(&m.grid));
    }
    let adapted = m.prices[first..].iter().all(|path| {
        m.grid
            .iter()
            .zip(path)
            .all(|(t, x)| m.big_filtration.at(t).is_measurable(x))
    });
    if !adapted {
        let n = m.outcome_count();
        m.big_filtration = Filtration::constant(m.grid.clone(), Partition::discrete(n))?;
    }
    let options: BTreeSet<usize> = (first..m.assets.len()).collect();
    if !options.is_empty() {
        for a in &model.admissible {
            m.admissible.push(AdmissibleSet {
                assets: a.assets.union(&options).cloned().collect(),
                filtration: a.filtration.clone(),
            });
        }
    }
    m.ensure_valid()?;
    Ok(m)
}

/// Super-replication price of `claim` with dynamic trading in the model's
/// assets plus explicit per-trading-time option positions, without embedding.
pub fn semistatic_direct_price(
    model: &MarketModel,
    specs: &[OptionGridSpec],
    claim: &RandomVariable,
    arith: Arithmetic,
) -> Result<Rational, BayesError> {
    model.ensure_valid()?;
    for s in specs {
        s.check(model)?;
    }
    let n = model.outcome_count();
    let gens = enumerate_generators(model, SignConstraint::Free);
    let top = &model.admissible[model.top_set()].filtration;

    // Columns: dynamic bets, then one column per option position.
    let mut columns: Vec<RandomVariable> = gens.iter().map(|g| g.payoff.clone()).collect();
    for s in specs {
        for (k, t) in s.trading_times.iter().enumerate() {
            let next = s.prices.get(k + 1).unwrap_or(&s.payoff);
            let change = next.sub(&s.prices[k]);
            if change.is_zero() {
                continue;
            }
            for block in top.at(t).blocks() {
                columns.push(RandomVariable::indicator(n, block).mul(&change));
            }
        }
    }

    let mut objective = vec![Rational::zero(); 1 + columns.len()];
    objective[0] = Rational::one();
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..=columns.len() {
        lp.set_bound(j, Bound::free());
    }
    for w in 0..n {
        let mut row = vec![Rational::one()];
        row.extend(columns.iter().map(|c| c[w].clone()));
        lp.constrain(row, Relation::Ge, claim[w].clone());
    }
    let sol = lpsolve::solve(&lp, arith).map_err(|e| BayesError::Solver(e.to_string()))?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        LpStatus::Unbounded => Err(BayesError::Solver(
            "semi-static market admits arbitrage; price is unbounded below".into(),
        )),
        LpStatus::Infeasible => Err(BayesError::Solver("semi-static program infeasible".into())),
    }
}

/// Parameter-dependent payoff quoted once, at the first grid time.
pub fn uncertainty_swap(
    built: &BuiltMarket,
    name: &str,
    per_theta: &[Rational],
    initial_price: Rational,
) -> Result<OptionGridSpec, BayesError> {
    let n = built.model.outcome_count();
    Ok(OptionGridSpec {
        name: name.to_string(),
        payoff: theta_payoff(built, per_theta)?,
        trading_times: vec![built.model.grid[0].clone()],
        prices: vec![RandomVariable::constant(n, initial_price)],
    })
}

/// Embedded super-replication price, for comparison with the direct program.
pub fn embedded_price(
    model: &MarketModel,
    specs: &[OptionGridSpec],
    claim: &RandomVariable,
    arith: Arithmetic,
) -> Result<Rational, BayesError> {
    let embedded = embed_semistatic(model, specs)?;
    let s =
        superreplicate(&embedded, claim, SignConstraint::Free, arith).map_err(|e| BayesError::Solver(e.to_string()))?;
    Ok(s.hedge.price)
}
