//! Instance builders shared by the benchmarks.

use platonic::lpsolve::{LinearProgram, Relation, Sense};
use platonic::market::MarketModel;
use platonic::num::{int, Rational};
use platonic::probspace::RandomVariable;
use platonic::random::{random_claim, random_market, rng_from_seed, RandomMarketConfig};

/// Seeded random markets with `outcomes` states, plus one claim each.
pub fn markets(seed: u64, count: usize, outcomes: usize) -> Vec<(MarketModel, RandomVariable)> {
    let mut rng = rng_from_seed(seed);
    let cfg = RandomMarketConfig {
        min_outcomes: outcomes,
        max_outcomes: outcomes,
        ..RandomMarketConfig::default()
    };
    (0..count)
        .map(|_| {
            let m = random_market(&mut rng, &cfg);
            let f = random_claim(&mut rng, m.outcome_count(), -4, 8);
            (m, f)
        })
        .collect()
}

/// A dense feasible LP: maximise sum x over a band of `n` variables.
pub fn band_lp(n: usize) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize, vec![int(1); n]);
    for i in 0..n {
        let coeffs: Vec<Rational> = (0..n)
            .map(|j| {
                if i == j {
                    int(3)
                } else if i.abs_diff(j) == 1 {
                    int(1)
                } else {
                    int(0)
                }
            })
            .collect();
        lp.constrain(coeffs, Relation::Le, int(i as i64 + 2));
    }
    lp
}
