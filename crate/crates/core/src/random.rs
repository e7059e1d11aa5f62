//! Seeded random markets for property tests, the acceptance suite and the
//! randomized CLI experiments. Everything here is driven by a caller-supplied
//! RNG so that runs are reproducible from a seed.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::market::{AdmissibleSet, MarketModel};
use crate::num::{self, int, Rational};
use crate::probspace::{conditional_expectation, Filtration, FiniteSpace, NullBlockPolicy, Partition, RandomVariable};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomMarketConfig {
    pub min_outcomes: usize,
    pub max_outcomes: usize,
    pub max_assets: usize,
    /// Grid size, including time 0.
    pub max_times: usize,
    /// Chance of building prices as martingales under a hidden measure.
    pub martingale_chance: f64,
    /// Largest integer price.
    pub max_price: i64,
}

impl Default for RandomMarketConfig {
    fn default() -> Self {
        RandomMarketConfig {
            min_outcomes: 2,
            max_outcomes: 8,
            max_assets: 3,
            max_times: 4,
            martingale_chance: 0.5,
            max_price: 8,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive integer weights 1..=9, normalized.
pub fn random_probs<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| num::ratio(x, total)).collect()
}

/// Integer payoff in `lo..=hi`.
pub fn random_claim<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> RandomVariable {
    RandomVariable::new((0..n).map(|_| int(rng.random_range(lo..=hi))).collect())
}

/// Splits each block of `p` into up to three pieces at random.
fn refine<R: Rng>(rng: &mut R, p: &Partition, chance: f64) -> Partition {
    let n = p.outcome_count();
    let mut tag = vec![0usize; n];
    for b in p.blocks() {
        if b.len() > 1 && rng.random_bool(chance) {
            let pieces = rng.random_range(2..=3.min(b.len()));
            for &w in b {
                tag[w] = rng.random_range(0..pieces);
            }
        }
    }
    Partition::from_key(n, |w| (p.block_of(w), tag[w]))
}

/// Merges blocks of `p` into at most as many groups at random.
fn coarsen<R: Rng>(rng: &mut R, p: &Partition) -> Partition {
    let groups = rng.random_range(1..=p.len());
    let label: Vec<usize> = (0..p.len()).map(|_| rng.random_range(0..groups)).collect();
    Partition::from_key(p.outcome_count(), |w| label[p.block_of(w)])
}

/// A coarsening of `big` at every time, kept refining by joining with the
/// previous time.
pub fn random_coarsening<R: Rng>(rng: &mut R, big: &Filtration) -> Filtration {
    let mut parts: Vec<Partition> = Vec::new();
    for p in big.partitions() {
        let c = coarsen(rng, p);
        parts.push(match parts.last() {
            Some(prev) => prev.join(&c),
            None => c,
        });
    }
    Filtration::new(big.times().to_vec(), parts).expect("joins keep refining")
}

/// A valid market: random refining big filtration, adapted prices
/// (sometimes martingales under a hidden full-support measure), trading on a
/// random coarsening, optionally with a smaller nested admissible set.
pub fn random_market<R: Rng>(rng: &mut R, cfg: &RandomMarketConfig) -> MarketModel {
    let n = rng.random_range(cfg.min_outcomes..=cfg.max_outcomes);
    let times = rng.random_range(2..=cfg.max_times.max(2));
    let nassets = rng.random_range(1..=cfg.max_assets.max(1));
    let grid: Vec<Rational> = (0..times).map(|k| num::ratio(k as i64, (times - 1) as i64)).collect();

    let mut parts = vec![Partition::trivial(n)];
    for k in 1..times {
        let last = k + 1 == times;
        let prev = &parts[k - 1];
        parts.push(if last && rng.random_bool(0.5) {
            Partition::discrete(n)
        } else {
            refine(rng, prev, 0.6)
        });
    }
    let big = Filtration::new(grid.clone(), parts).expect("refining by construction");
    let labels: Vec<String> = (0..n).map(|w| format!("w{w}")).collect();
    let space = FiniteSpace::new(labels, random_probs(rng, n)).expect("positive weights");

    let prices: Vec<Vec<RandomVariable>> = (0..nassets)
        .map(|_| {
            if rng.random_bool(cfg.martingale_chance) {
                let q = random_probs(rng, n);
                let terminal = per_block(rng, big.at(&grid[times - 1]), cfg.max_price);
                grid.iter()
                    .map(|t| {
                        conditional_expectation(&terminal, big.at(t), &q, NullBlockPolicy::Reject)
                            .expect("full support")
                    })
                    .collect()
            } else {
                grid.iter().map(|t| per_block(rng, big.at(t), cfg.max_price)).collect()
            }
        })
        .collect();

    let trade = random_coarsening(rng, &big);
    let all: BTreeSet<usize> = (0..nassets).collect();
    let mut admissible = vec![AdmissibleSet {
        assets: all,
        filtration: trade.clone(),
    }];
    if nassets > 1 && rng.random_bool(0.5) {
        admissible.insert(
            0,
            AdmissibleSet {
                assets: [0].into_iter().collect(),
                filtration: random_coarsening(rng, &trade),
            },
        );
    }
    MarketModel {
        space,
        grid,
        big_filtration: big,
        assets: (0..nassets).map(|i| format!("S{i}")).collect(),
        prices,
        admissible,
    }
}

fn per_block<R: Rng>(rng: &mut R, p: &Partition, max: i64) -> RandomVariable {
    let v: Vec<i64> = (0..p.len()).map(|_| rng.random_range(0..=max)).collect();
    RandomVariable::new((0..p.outcome_count()).map(|w| int(v[p.block_of(w)])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_markets_are_valid() {
        let mut rng = rng_from_seed(7);
        for _ in 0..200 {
            let m = random_market(&mut rng, &RandomMarketConfig::default());
            assert!(m.validate().is_empty(), "{:?}", m.validate());
        }
    }

    #[test]
    fn same_seed_same_market() {
        let cfg = RandomMarketConfig::default();
        let a = random_market(&mut rng_from_seed(3), &cfg);
        let b = random_market(&mut rng_from_seed(3), &cfg);
        assert_eq!(a, b);
    }
}
