//! Small reference markets used throughout the tests, benchmarks and golden
//! scenario files.
//!
//! The two-period binomial tree has outcomes `uu, ud, du, dd` (uniform
//! reference measure), grid `0, 1/2, 1`, and `S = 4 → {6, 2} → {9, 3 | 3, 1}`.
//! Its delayed variant trades on the price filtration delayed by one grid
//! step. The two-asset variant adds `R = 2 → {3, 1} → {3, 3 | 2, 0}` with the
//! family `{S}` (delayed) ⊂ `{S, R}` (full information).

use crate::bayes::{BayesSetup, PathMarket};
use crate::market::{AdmissibleSet, MarketModel};
use crate::num::{int, ratio, Rational};
use crate::probspace::{delayed_filtration, Filtration, FiniteSpace, Partition, RandomVariable};

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn rv(values: &[i64]) -> RandomVariable {
    RandomVariable::from_ints(values)
}

fn half_grid() -> Vec<Rational> {
    vec![int(0), ratio(1, 2), int(1)]
}

/// Price filtration of the two-period tree.
pub fn binomial_tree_filtration() -> Filtration {
    Filtration::new(
        half_grid(),
        vec![
            Partition::trivial(4),
            Partition::new(4, vec![vec![0, 1], vec![2, 3]]).expect("valid"),
            Partition::discrete(4),
        ],
    )
    .expect("refining")
}

fn one_period(filtration_trivial: bool) -> MarketModel {
    let space = FiniteSpace::uniform(labels(&["up", "down"])).expect("valid");
    let grid = vec![int(0), int(1)];
    let big = Filtration::new(grid.clone(), vec![Partition::trivial(2), Partition::discrete(2)]).expect("refining");
    let prices = vec![vec![
        RandomVariable::constant(2, int(1)),
        RandomVariable::new(vec![int(2), ratio(1, 2)]),
    ]];
    let f = if filtration_trivial {
        Filtration::trivial(2, grid.clone()).expect("valid")
    } else {
        big.clone()
    };
    MarketModel::with_filtration(space, grid, big, labels(&["S"]), prices, f)
}

/// `S_0 = 1`, `S_1 ∈ {2, 1/2}`, full information.
pub fn one_period_binomial() -> MarketModel {
    one_period(false)
}

/// Same prices, nothing observed at any time.
pub fn one_period_binomial_blind() -> MarketModel {
    one_period(true)
}

fn two_period_space() -> FiniteSpace {
    FiniteSpace::uniform(labels(&["uu", "ud", "du", "dd"])).expect("valid")
}

fn stock_path() -> Vec<RandomVariable> {
    vec![rv(&[4, 4, 4, 4]), rv(&[6, 6, 2, 2]), rv(&[9, 3, 3, 1])]
}

pub fn two_period_binomial() -> MarketModel {
    MarketModel::full_information(
        two_period_space(),
        half_grid(),
        binomial_tree_filtration(),
        labels(&["S"]),
        vec![stock_path()],
    )
}

/// Trading on the price filtration delayed by `1/2`.
pub fn delayed_binomial() -> MarketModel {
    let big = binomial_tree_filtration();
    let f = delayed_filtration(&big, &ratio(1, 2)).expect("non-negative delay");
    MarketModel::with_filtration(
        two_period_space(),
        half_grid(),
        big,
        labels(&["S"]),
        vec![stock_path()],
        f,
    )
}

pub fn two_asset() -> MarketModel {
    let big = binomial_tree_filtration();
    let delayed = delayed_filtration(&big, &ratio(1, 2)).expect("non-negative delay");
    MarketModel {
        space: two_period_space(),
        grid: half_grid(),
        big_filtration: big.clone(),
        assets: labels(&["S", "R"]),
        prices: vec![
            stock_path(),
            vec![rv(&[2, 2, 2, 2]), rv(&[3, 3, 1, 1]), rv(&[3, 3, 2, 0])],
        ],
        admissible: vec![
            AdmissibleSet {
                assets: [0].into_iter().collect(),
                filtration: delayed,
            },
            AdmissibleSet {
                assets: [0, 1].into_iter().collect(),
                filtration: big,
            },
        ],
    }
}

/// `n` outcomes, one asset worth 1 at both grid times.
pub fn constant_market(n: usize) -> MarketModel {
    let names: Vec<String> = (0..n).map(|k| format!("w{k}")).collect();
    let space = FiniteSpace::uniform(names).expect("valid");
    let grid = vec![int(0), int(1)];
    let big = Filtration::new(grid.clone(), vec![Partition::trivial(n), Partition::discrete(n)]).expect("refining");
    let prices = vec![vec![RandomVariable::constant(n, int(1)); 2]];
    MarketModel::full_information(space, grid, big, labels(&["S"]), prices)
}

/// `S_1 = S_0 + 1` on every outcome of the two-period tree's terminal
/// partition; trading is blind.
pub fn deterministic_increase() -> MarketModel {
    let big = binomial_tree_filtration();
    let f = Filtration::trivial(4, half_grid()).expect("valid");
    MarketModel::with_filtration(
        two_period_space(),
        half_grid(),
        big,
        labels(&["S"]),
        vec![vec![rv(&[1, 1, 1, 1]), rv(&[1, 1, 1, 1]), rv(&[2, 2, 2, 2])]],
        f,
    )
}

/// Two outcomes that split at `1/2`; afterwards the price keeps moving in the
/// same direction, so anyone who sees the split has a riskless bet.
/// With `delayed` the split becomes visible only at time 1.
pub fn momentum(delayed: bool) -> MarketModel {
    let space = FiniteSpace::uniform(labels(&["up", "down"])).expect("valid");
    let grid = half_grid();
    let big = Filtration::new(
        grid.clone(),
        vec![Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)],
    )
    .expect("refining");
    let prices = vec![vec![
        RandomVariable::constant(2, int(1)),
        RandomVariable::new(vec![ratio(11, 10), ratio(9, 10)]),
        RandomVariable::new(vec![ratio(6, 5), ratio(4, 5)]),
    ]];
    let f = if delayed {
        delayed_filtration(&big, &ratio(1, 2)).expect("non-negative delay")
    } else {
        big.clone()
    };
    MarketModel::with_filtration(space, grid, big, labels(&["S"]), prices, f)
}

/// Two regimes on the two-period tree: up-probability `1/4` (`lo`) or `3/4`
/// (`hi`), equally likely a priori.
pub fn two_regime() -> (BayesSetup, PathMarket) {
    let m = two_period_binomial();
    let lik = |p: Rational| -> Vec<Rational> {
        let q = int(1) - &p;
        vec![&p * &p, &p * &q, &q * &p, &q * &q]
    };
    let setup = BayesSetup {
        thetas: labels(&["lo", "hi"]),
        prior: vec![ratio(1, 2), ratio(1, 2)],
        likelihoods: vec![lik(ratio(1, 4)), lik(ratio(3, 4))],
    };
    (setup, PathMarket::from_model(&m))
}
