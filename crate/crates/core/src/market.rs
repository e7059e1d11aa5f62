//! Market models with prices adapted to a large filtration and trading
//! restricted to per-asset-set filtrations, plus simple strategies and the
//! elementary bets that span all attainable terminal wealths.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::linalg;
use crate::num::{self, Rational};
use crate::probspace::{Filtration, FiniteSpace, Partition, ProbError, RandomVariable};

/// Whether strategies may short.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignConstraint {
    Free,
    LongOnly,
}

impl fmt::Display for SignConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignConstraint::Free => write!(f, "free"),
            SignConstraint::LongOnly => write!(f, "long_only"),
        }
    }
}

/// One member of the admissible family together with its trading filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSet {
    pub assets: BTreeSet<usize>,
    pub filtration: Filtration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    pub space: FiniteSpace,
    /// Common trading grid, strictly increasing in `[0, 1]`.
    pub grid: Vec<Rational>,
    pub big_filtration: Filtration,
    pub assets: Vec<String>,
    /// `prices[i][k]` is asset `i` at `grid[k]`.
    pub prices: Vec<Vec<RandomVariable>>,
    pub admissible: Vec<AdmissibleSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationKind {
    Shape,
    Adaptedness,
    Refining,
    Monotonicity,
    Containment,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Shape => "shape",
            ViolationKind::Adaptedness => "adaptedness",
            ViolationKind::Refining => "refining",
            ViolationKind::Monotonicity => "monotonicity",
            ViolationKind::Containment => "containment",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
    /// Offending outcome blocks, when the violation is about a partition.
    pub blocks: Vec<Vec<usize>>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)?;
        if !self.blocks.is_empty() {
            write!(f, " (blocks {:?})", self.blocks)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("invalid market model: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid strategy: {0}")]
    Strategy(String),
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Prob(#[from] ProbError),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

fn label_set(model: &MarketModel, set: &BTreeSet<usize>) -> String {
    let names: Vec<&str> = set
        .iter()
        .map(|&i| model.assets.get(i).map(String::as_str).unwrap_or("?"))
        .collect();
    format!("{{{}}}", names.join(","))
}

/// `fine` refines `coarse` at every time either filtration or the grid mentions.
fn refines_throughout(fine: &Filtration, coarse: &Filtration, grid: &[Rational]) -> Option<Rational> {
    let mut times: Vec<&Rational> = grid.iter().chain(fine.times()).chain(coarse.times()).collect();
    times.sort();
    times.dedup();
    times
        .into_iter()
        .find(|t| !fine.at(t).refines(coarse.at(t)).unwrap_or(false))
        .cloned()
}

impl MarketModel {
    /// One admissible set holding every asset, traded on `filtration`.
    pub fn with_filtration(
        space: FiniteSpace,
        grid: Vec<Rational>,
        big_filtration: Filtration,
        assets: Vec<String>,
        prices: Vec<Vec<RandomVariable>>,
        filtration: Filtration,
    ) -> Self {
        let all = (0..assets.len()).collect();
        MarketModel {
            space,
            grid,
            big_filtration,
            assets,
            prices,
            admissible: vec![AdmissibleSet {
                assets: all,
                filtration,
            }],
        }
    }

    /// Classical market: trading on the price filtration itself.
    pub fn full_information(
        space: FiniteSpace,
        grid: Vec<Rational>,
        big_filtration: Filtration,
        assets: Vec<String>,
        prices: Vec<Vec<RandomVariable>>,
    ) -> Self {
        let f = big_filtration.clone();
        Self::with_filtration(space, grid, big_filtration, assets, prices, f)
    }

    pub fn outcome_count(&self) -> usize {
        self.space.len()
    }

    pub fn asset_index(&self, name: &str) -> Result<usize, MarketError> {
        self.assets
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| MarketError::Unknown {
                kind: "asset",
                name: name.to_string(),
            })
    }

    /// Index of the admissible set with exactly these assets.
    pub fn set_index(&self, assets: &BTreeSet<usize>) -> Option<usize> {
        self.admissible.iter().position(|a| &a.assets == assets)
    }

    pub fn set_index_by_names(&self, names: &[&str]) -> Result<usize, MarketError> {
        let set = names
            .iter()
            .map(|n| self.asset_index(n))
            .collect::<Result<BTreeSet<_>, _>>()?;
        self.set_index(&set).ok_or_else(|| MarketError::Unknown {
            kind: "admissible set",
            name: names.join(","),
        })
    }

    /// Grid index of `t`, if `t` is a grid time.
    pub fn grid_index(&self, t: &Rational) -> Option<usize> {
        self.grid.iter().position(|s| s == t)
    }

    pub fn terminal_prices(&self, asset: usize) -> &RandomVariable {
        self.prices[asset].last().expect("non-empty grid")
    }

    /// Same model with different (full-support) reference probabilities.
    pub fn with_probs(&self, probs: Vec<Rational>) -> Result<Self, MarketError> {
        let mut m = self.clone();
        m.space = self.space.with_probs(probs)?;
        Ok(m)
    }

    /// Every structural and semantic invariant that fails; empty when valid.
    pub fn validate(&self) -> Vec<Violation> {
        let shape = self.shape_violations();
        if !shape.is_empty() {
            return shape;
        }
        let mut out = Vec::new();
        self.check_adaptedness(&mut out);
        self.check_refining(&mut out);
        self.check_monotonicity(&mut out);
        self.check_containment(&mut out);
        out
    }

    pub fn ensure_valid(&self) -> Result<(), MarketError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(MarketError::Invalid(v))
        }
    }

    fn shape_violations(&self) -> Vec<Violation> {
        let n = self.outcome_count();
        let mut out = Vec::new();
        let mut push = |detail: String| {
            out.push(Violation {
                kind: ViolationKind::Shape,
                detail,
                blocks: Vec::new(),
            })
        };
        let zero = Rational::zero();
        let one = num::one();
        if self.grid.is_empty()
            || self.grid[0] < zero
            || self.grid[self.grid.len() - 1] > one
            || self.grid.windows(2).any(|w| w[0] >= w[1])
        {
            push("grid must be non-empty, strictly increasing and inside [0,1]".into());
        }
        if self.big_filtration.outcome_count() != n {
            push(format!(
                "big filtration covers {} outcomes, space has {n}",
                self.big_filtration.outcome_count()
            ));
        }
        if self.assets.is_empty() {
            push("market has no assets".into());
        }
        let mut seen = HashSet::new();
        for a in &self.assets {
            if !seen.insert(a) {
                push(format!("duplicate asset name `{a}`"));
            }
        }
        if self.prices.len() != self.assets.len() {
            push(format!(
                "{} price processes for {} assets",
                self.prices.len(),
                self.assets.len()
            ));
        } else {
            for (name, path) in self.assets.iter().zip(&self.prices) {
                if path.len() != self.grid.len() {
                    push(format!(
                        "asset {name} has {} prices for {} grid times",
                        path.len(),
                        self.grid.len()
                    ));
                }
                if path.iter().any(|x| x.len() != n) {
                    push(format!("asset {name} has a price vector of the wrong length"));
                }
            }
        }
        if self.admissible.is_empty() {
            push("admissible family is empty".into());
        }
        for (k, a) in self.admissible.iter().enumerate() {
            if a.assets.is_empty() {
                push(format!("admissible set #{k} is empty"));
            }
            if a.assets.iter().any(|&i| i >= self.assets.len()) {
                push(format!("admissible set #{k} names an unknown asset"));
            }
            if a.filtration.outcome_count() != n {
                push(format!("trading filtration of set #{k} has the wrong outcome count"));
            }
        }
        let mut sets = HashSet::new();
        for a in &self.admissible {
            if !sets.insert(&a.assets) {
                push(format!("admissible set {} listed twice", label_set(self, &a.assets)));
            }
        }
        out
    }

    fn check_adaptedness(&self, out: &mut Vec<Violation>) {
        for (i, path) in self.prices.iter().enumerate() {
            for (t, x) in self.grid.iter().zip(path) {
                let part = self.big_filtration.at(t);
                let bad: Vec<Vec<usize>> = part
                    .blocks()
                    .iter()
                    .filter(|b| b.iter().any(|&w| x[w] != x[b[0]]))
                    .cloned()
                    .collect();
                if !bad.is_empty() {
                    out.push(Violation {
                        kind: ViolationKind::Adaptedness,
                        detail: format!(
                            "asset {} at t={} varies within a block of the big filtration",
                            self.assets[i],
                            num::format_rational(t)
                        ),
                        blocks: bad,
                    });
                }
            }
        }
    }

    fn check_refining(&self, out: &mut Vec<Violation>) {
        let family: HashSet<&BTreeSet<usize>> = self.admissible.iter().map(|a| &a.assets).collect();
        for (x, a) in self.admissible.iter().enumerate() {
            for b in &self.admissible[x + 1..] {
                let u: BTreeSet<usize> = a.assets.union(&b.assets).cloned().collect();
                if !family.contains(&u) {
                    out.push(Violation {
                        kind: ViolationKind::Refining,
                        detail: format!(
                            "union {} of {} and {} is not admissible",
                            label_set(self, &u),
                            label_set(self, &a.assets),
                            label_set(self, &b.assets)
                        ),
                        blocks: Vec::new(),
                    });
                }
            }
        }
    }

    fn check_monotonicity(&self, out: &mut Vec<Violation>) {
        for a in &self.admissible {
            for b in &self.admissible {
                if a.assets == b.assets || !a.assets.is_subset(&b.assets) {
                    continue;
                }
                if let Some(t) = refines_throughout(&b.filtration, &a.filtration, &self.grid) {
                    out.push(Violation {
                        kind: ViolationKind::Monotonicity,
                        detail: format!(
                            "{}⊂{} but the trading filtration of {} is not contained in that of {} at t={}",
                            label_set(self, &a.assets),
                            label_set(self, &b.assets),
                            label_set(self, &a.assets),
                            label_set(self, &b.assets),
                            num::format_rational(&t)
                        ),
                        blocks: a.filtration.at(&t).blocks().to_vec(),
                    });
                }
            }
        }
    }

    fn check_containment(&self, out: &mut Vec<Violation>) {
        for a in &self.admissible {
            if let Some(t) = refines_throughout(&self.big_filtration, &a.filtration, &self.grid) {
                out.push(Violation {
                    kind: ViolationKind::Containment,
                    detail: format!(
                        "trading filtration of {} exceeds the big filtration at t={}",
                        label_set(self, &a.assets),
                        num::format_rational(&t)
                    ),
                    blocks: a.filtration.at(&t).blocks().to_vec(),
                });
            }
        }
    }

    /// Adds every missing union of admissible sets, trading on the join of the
    /// constituents' filtrations, until the family is union-closed.
    pub fn close_under_unions(&self) -> MarketModel {
        let mut m = self.clone();
        loop {
            let mut added = false;
            let snapshot = m.admissible.clone();
            for (x, a) in snapshot.iter().enumerate() {
                for b in &snapshot[x + 1..] {
                    let u: BTreeSet<usize> = a.assets.union(&b.assets).cloned().collect();
                    if m.set_index(&u).is_none() {
                        m.admissible.push(AdmissibleSet {
                            assets: u,
                            filtration: a.filtration.join(&b.filtration),
                        });
                        added = true;
                    }
                }
            }
            if !added {
                return m;
            }
        }
    }

    /// The admissible set containing all others (exists in a valid model).
    pub fn top_set(&self) -> usize {
        let all: BTreeSet<usize> = self.admissible.iter().flat_map(|a| a.assets.iter().cloned()).collect();
        self.set_index(&all).unwrap_or(0)
    }
}

/// Holdings over one grid interval, one random variable per asset of the set
/// (in ascending asset order).
#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub from: Rational,
    pub to: Rational,
    pub holdings: Vec<RandomVariable>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    /// Index into `MarketModel::admissible`.
    pub asset_set: usize,
    pub legs: Vec<Leg>,
    pub sign: SignConstraint,
}

impl Strategy {
    pub fn check(&self, model: &MarketModel) -> Result<(), MarketError> {
        let set = model
            .admissible
            .get(self.asset_set)
            .ok_or_else(|| MarketError::Strategy(format!("no admissible set #{}", self.asset_set)))?;
        let zero = Rational::zero();
        for leg in &self.legs {
            if leg.from >= leg.to || leg.from < zero || leg.to > num::one() {
                return Err(MarketError::Strategy(format!(
                    "leg [{}, {}] is not an interval in [0,1]",
                    num::format_rational(&leg.from),
                    num::format_rational(&leg.to)
                )));
            }
            if model.grid_index(&leg.from).is_none() || model.grid_index(&leg.to).is_none() {
                return Err(MarketError::Strategy("leg endpoints must be grid times".into()));
            }
            if leg.holdings.len() != set.assets.len() {
                return Err(MarketError::Strategy(format!(
                    "leg holds {} positions for {} assets",
                    leg.holdings.len(),
                    set.assets.len()
                )));
            }
            let part = set.filtration.at(&leg.from);
            for h in &leg.holdings {
                if h.len() != model.outcome_count() || !part.is_measurable(h) {
                    return Err(MarketError::Strategy(format!(
                        "holding on [{}, {}] is not measurable for the trading filtration",
                        num::format_rational(&leg.from),
                        num::format_rational(&leg.to)
                    )));
                }
                if self.sign == SignConstraint::LongOnly && h.values().iter().any(Signed::is_negative) {
                    return Err(MarketError::Strategy(
                        "long-only strategy holds a short position".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Collects `Σ λ_g g` into one strategy on the top admissible set; its
    /// terminal wealth equals the generator combination.
    pub fn from_generators(
        model: &MarketModel,
        generators: &[Generator],
        lambda: &[Rational],
        sign: SignConstraint,
    ) -> Strategy {
        let top = model.top_set();
        let set: Vec<usize> = model.admissible[top].assets.iter().cloned().collect();
        let n = model.outcome_count();
        let mut legs: BTreeMap<usize, Vec<Vec<Rational>>> = BTreeMap::new();
        for (g, l) in generators.iter().zip(lambda) {
            if l.is_zero() {
                continue;
            }
            let k = model.grid_index(&g.from).expect("generator on grid");
            let slot = set.iter().position(|&a| a == g.asset).expect("asset in top set");
            let leg = legs
                .entry(k)
                .or_insert_with(|| vec![vec![Rational::zero(); n]; set.len()]);
            for &w in &g.block {
                leg[slot][w] += l;
            }
        }
        Strategy {
            asset_set: top,
            legs: legs
                .into_iter()
                .map(|(k, h)| Leg {
                    from: model.grid[k].clone(),
                    to: model.grid[k + 1].clone(),
                    holdings: h.into_iter().map(RandomVariable::new).collect(),
                })
                .collect(),
            sign,
        }
    }
}

/// `(H·S)_t` at every grid time.
pub fn wealth_process(model: &MarketModel, strat: &Strategy) -> Result<Vec<RandomVariable>, MarketError> {
    strat.check(model)?;
    let n = model.outcome_count();
    let assets: Vec<usize> = model.admissible[strat.asset_set].assets.iter().cloned().collect();
    let price_at = |i: usize, t: &Rational| -> &RandomVariable {
        let k = model.grid.iter().rposition(|s| s <= t).unwrap_or(0);
        &model.prices[i][k]
    };
    let out = model
        .grid
        .iter()
        .map(|t| {
            let mut w = RandomVariable::zeros(n);
            for leg in &strat.legs {
                let a = leg.from.clone().min(t.clone());
                let b = leg.to.clone().min(t.clone());
                if a == b {
                    continue;
                }
                for (h, &i) in leg.holdings.iter().zip(&assets) {
                    let ds = price_at(i, &b).sub(price_at(i, &a));
                    w = w.add(&h.mul(&ds));
                }
            }
            w
        })
        .collect();
    Ok(out)
}

/// The elementary bet `𝟙_B (S^i_to − S^i_from)` with `B` a block of the
/// trading filtration of admissible set `set` at `from`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub asset: usize,
    pub set: usize,
    pub from: Rational,
    pub to: Rational,
    pub block: Vec<usize>,
    pub payoff: RandomVariable,
    /// Only non-negative multiples are allowed.
    pub one_sided: bool,
}

impl Generator {
    pub fn recompute(&self, model: &MarketModel) -> RandomVariable {
        let k = model.grid_index(&self.from).expect("generator on grid");
        let ds = model.prices[self.asset][k + 1].sub(&model.prices[self.asset][k]);
        RandomVariable::indicator(model.outcome_count(), &self.block).mul(&ds)
    }
}

/// Adjacent-interval bets over every admissible set, asset and block, in that
/// order. Identical payoffs are kept once and zero payoffs are dropped, since
/// neither changes the spanned cone.
pub fn enumerate_generators(model: &MarketModel, mode: SignConstraint) -> Vec<Generator> {
    let n = model.outcome_count();
    let mut seen: HashSet<RandomVariable> = HashSet::new();
    let mut out = Vec::new();
    for (s, set) in model.admissible.iter().enumerate() {
        for &i in &set.assets {
            for k in 0..model.grid.len().saturating_sub(1) {
                let ds = model.prices[i][k + 1].sub(&model.prices[i][k]);
                if ds.is_zero() {
                    continue;
                }
                let part: &Partition = set.filtration.at(&model.grid[k]);
                for block in part.blocks() {
                    let payoff = RandomVariable::indicator(n, block).mul(&ds);
                    if payoff.is_zero() || !seen.insert(payoff.clone()) {
                        continue;
                    }
                    out.push(Generator {
                        asset: i,
                        set: s,
                        from: model.grid[k].clone(),
                        to: model.grid[k + 1].clone(),
                        block: block.clone(),
                        payoff,
                        one_sided: mode == SignConstraint::LongOnly,
                    });
                }
            }
        }
    }
    out
}

/// Generator matrix of the attainable cone and what it means.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDescription {
    pub mode: SignConstraint,
    pub generators: Vec<Generator>,
    /// `rows[ω][g]`.
    pub matrix: Vec<Vec<Rational>>,
    pub rank: usize,
    pub summary: String,
}

pub fn terminal_cone_description(model: &MarketModel, mode: SignConstraint) -> ConeDescription {
    let generators = enumerate_generators(model, mode);
    let matrix = generator_matrix(model.outcome_count(), &generators);
    let rank = linalg::rank(&matrix, generators.len());
    let k0 = match mode {
        SignConstraint::Free => "column span of G",
        SignConstraint::LongOnly => "conic hull of the columns of G",
    };
    let summary = if generators.is_empty() {
        "K0 = {0}; C = -(non-negative orthant)".to_string()
    } else {
        format!(
            "K0 = {k0} ({} columns, rank {rank}); C = K0 - (non-negative orthant), closed on a finite space",
            generators.len()
        )
    };
    ConeDescription {
        mode,
        generators,
        matrix,
        rank,
        summary,
    }
}

/// Row-per-outcome matrix of generator payoffs.
pub fn generator_matrix(n: usize, generators: &[Generator]) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|w| generators.iter().map(|g| g.payoff[w].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::num::{int, ratio};

    #[test]
    fn classical_market_is_valid() {
        assert!(canonical::one_period_binomial().validate().is_empty());
        assert!(canonical::two_period_binomial().validate().is_empty());
        assert!(canonical::delayed_binomial().validate().is_empty());
        assert!(canonical::two_asset().validate().is_empty());
    }

    #[test]
    fn adaptedness_violation_is_reported() {
        let mut m = canonical::two_period_binomial();
        // Price at t=1/2 now differs inside the up block.
        m.prices[0][1] = RandomVariable::from_ints(&[6, 5, 2, 2]);
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Adaptedness);
        assert_eq!(v[0].blocks, vec![vec![0, 1]]);
        assert!(v[0].to_string().starts_with("adaptedness: asset S at t=1/2"));
    }

    #[test]
    fn monotonicity_violation_is_reported() {
        let mut m = canonical::two_asset();
        // Make the smaller set see more than the larger one.
        let small = m.set_index_by_names(&["S"]).unwrap();
        let big = m.set_index_by_names(&["S", "R"]).unwrap();
        let delayed = m.admissible[small].filtration.clone();
        m.admissible[small].filtration = m.admissible[big].filtration.clone();
        m.admissible[big].filtration = delayed;
        let kinds: Vec<ViolationKind> = m.validate().iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::Monotonicity));
    }

    #[test]
    fn refining_violation_and_closure() {
        let mut m = canonical::two_asset();
        let grid = m.grid.clone();
        let r_only = AdmissibleSet {
            assets: [1].into_iter().collect(),
            filtration: Filtration::trivial(4, grid).unwrap(),
        };
        let big = m.set_index_by_names(&["S", "R"]).unwrap();
        m.admissible.remove(big);
        m.admissible.push(r_only);
        let v = m.validate();
        assert!(v.iter().any(|x| x.kind == ViolationKind::Refining));
        let closed = m.close_under_unions();
        assert!(closed.validate().is_empty(), "{:?}", closed.validate());
        assert_eq!(closed.admissible.len(), 3);
    }

    #[test]
    fn containment_violation() {
        let mut m = canonical::two_period_binomial();
        let grid = m.grid.clone();
        m.admissible[0].filtration = Filtration::constant(grid, Partition::discrete(4)).unwrap();
        let kinds: Vec<ViolationKind> = m.validate().iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::Containment]);
    }

    #[test]
    fn wealth_examples() {
        let m = canonical::two_period_binomial();
        let one = RandomVariable::constant(4, int(1));
        let hold = Strategy {
            asset_set: 0,
            legs: vec![
                Leg {
                    from: int(0),
                    to: ratio(1, 2),
                    holdings: vec![one.clone()],
                },
                Leg {
                    from: ratio(1, 2),
                    to: int(1),
                    holdings: vec![one.clone()],
                },
            ],
            sign: SignConstraint::Free,
        };
        let w = wealth_process(&m, &hold).unwrap();
        assert!(w[0].is_zero());
        assert_eq!(w[2], m.prices[0][2].sub(&m.prices[0][0]));

        let mut flip = hold.clone();
        flip.legs[1].holdings = vec![one.scale(&int(-1))];
        let w = wealth_process(&m, &flip).unwrap();
        // S_{1/2} - S_0 - (S_1 - S_{1/2}) on (uu, ud, du, dd).
        assert_eq!(w[2], RandomVariable::from_ints(&[-1, 5, -3, -1]));
        assert_eq!(w[1], RandomVariable::from_ints(&[2, 2, -2, -2]));

        let zero = Strategy {
            asset_set: 0,
            legs: vec![],
            sign: SignConstraint::Free,
        };
        assert!(wealth_process(&m, &zero).unwrap().iter().all(RandomVariable::is_zero));
    }

    #[test]
    fn non_measurable_holdings_rejected() {
        let m = canonical::delayed_binomial();
        let s = Strategy {
            asset_set: 0,
            legs: vec![Leg {
                from: ratio(1, 2),
                to: int(1),
                holdings: vec![RandomVariable::from_ints(&[1, 1, 0, 0])],
            }],
            sign: SignConstraint::Free,
        };
        assert!(matches!(wealth_process(&m, &s), Err(MarketError::Strategy(_))));
    }

    #[test]
    fn generator_counts() {
        let m = canonical::two_period_binomial();
        let g = enumerate_generators(&m, SignConstraint::Free);
        assert_eq!(g.len(), 3);
        for x in &g {
            assert_eq!(x.recompute(&m), x.payoff);
        }
        assert_eq!(
            enumerate_generators(&canonical::delayed_binomial(), SignConstraint::Free).len(),
            2
        );
        let c = terminal_cone_description(&m, SignConstraint::Free);
        assert_eq!(c.rank, 3);

        let trivial = canonical::one_period_binomial_blind();
        let g = enumerate_generators(&trivial, SignConstraint::Free);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].payoff, trivial.prices[0][1].sub(&trivial.prices[0][0]));
    }

    #[test]
    fn two_asset_generators_deduplicate() {
        let m = canonical::two_asset();
        let g = enumerate_generators(&m, SignConstraint::Free);
        assert_eq!(g.len(), 5);
        // The delayed set's bet on S over [0,1/2] is the same payoff as the
        // full-information one and is kept once.
        let s_first: Vec<&Generator> = g.iter().filter(|x| x.asset == 0 && x.from.is_zero()).collect();
        assert_eq!(s_first.len(), 1);
        assert_eq!(terminal_cone_description(&m, SignConstraint::Free).rank, 3);
    }

    #[test]
    fn constant_prices_give_empty_cone() {
        let m = canonical::constant_market(3);
        let c = terminal_cone_description(&m, SignConstraint::Free);
        assert!(c.generators.is_empty());
        assert_eq!(c.rank, 0);
        assert!(c.summary.starts_with("K0 = {0}"));
    }

    #[test]
    fn strategy_from_generators_reproduces_combination() {
        let m = canonical::two_asset();
        let g = enumerate_generators(&m, SignConstraint::Free);
        let lambda: Vec<Rational> = (0..g.len()).map(|k| ratio(k as i64 + 1, 3)).collect();
        let s = Strategy::from_generators(&m, &g, &lambda, SignConstraint::Free);
        let w = wealth_process(&m, &s).unwrap();
        let mut expect = RandomVariable::zeros(4);
        for (x, l) in g.iter().zip(&lambda) {
            expect = expect.add(&x.payoff.scale(l));
        }
        assert_eq!(w.last().unwrap(), &expect);
    }
}
