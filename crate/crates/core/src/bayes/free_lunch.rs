//! One-period market with `n` zero-priced claims on `{0,1}^n` (uniform
//! reference measure) whose sum is bounded below by `-1` and is at least `1`
//! except on an event of probability `2^-n`.
//!
//! With `A_k` the event that the first `k` flips are `0` and
//! `L_k = 1 - 2^-k`:
//! `f_1 = 1` off `A_1` and `-1/2` on `A_1`; for `k ≥ 2`, `f_k = 1 + L_{k-1}`
//! on `A_{k-1} \ A_k`, `-2^-k` on `A_k` and `0` elsewhere. Then
//! `g_n = Σ f_k` equals `1` off `A_n` and `-L_n` on `A_n`.

use num_traits::{One, Signed, Zero};

use super::BayesError;
use crate::market::MarketModel;
use crate::num::{self, Rational};
use crate::probspace::{Filtration, FiniteSpace, Partition, RandomVariable};

pub const MAX_FREE_LUNCH_N: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FreeLunchDiagnostics {
    pub n: usize,
    /// `E[|1 − (g_n ∧ 1)|]` under the reference measure.
    pub gap: Rational,
    /// Reference probability of `g_n ≥ 1`.
    pub prob_at_least_one: Rational,
    pub min_gain: Rational,
    /// Reference-measure means of the individual claims.
    pub reference_means: Vec<Rational>,
}

fn pow2_inv(k: usize) -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(1u8) << k)
}

fn level(k: usize) -> Rational {
    Rational::one() - pow2_inv(k)
}

/// Value of `f_k` (1-based) on an outcome whose first `lead` flips are 0.
fn claim_value(k: usize, lead: usize) -> Rational {
    if k == 1 {
        return if lead >= 1 { -num::ratio(1, 2) } else { Rational::one() };
    }
    if lead + 1 < k {
        Rational::zero()
    } else if lead + 1 == k {
        Rational::one() + level(k - 1)
    } else {
        -pow2_inv(k)
    }
}

pub fn free_lunch_truncation(n: usize) -> Result<(MarketModel, FreeLunchDiagnostics), BayesError> {
    if n == 0 || n > MAX_FREE_LUNCH_N {
        return Err(BayesError::Guard {
            got: n,
            max: MAX_FREE_LUNCH_N,
        });
    }
    let size = 1usize << n;
    let labels: Vec<String> = (0..size).map(|w| format!("{w:0n$b}")).collect();
    let leads: Vec<usize> = labels
        .iter()
        .map(|s| s.chars().take_while(|c| *c == '0').count())
        .collect();
    let space = FiniteSpace::uniform(labels)?;
    let grid = vec![Rational::zero(), Rational::one()];
    let big = Filtration::new(grid.clone(), vec![Partition::trivial(size), Partition::discrete(size)])?;
    let claims: Vec<RandomVariable> = (1..=n)
        .map(|k| RandomVariable::new(leads.iter().map(|&l| claim_value(k, l)).collect()))
        .collect();
    let prices = claims
        .iter()
        .map(|f| vec![RandomVariable::zeros(size), f.clone()])
        .collect();
    let names = (1..=n).map(|k| format!("f{k}")).collect();
    let trivial = Filtration::trivial(size, grid.clone())?;
    let model = MarketModel::with_filtration(space, grid, big, names, prices, trivial);

    let mut g = RandomVariable::zeros(size);
    for f in &claims {
        g = g.add(f);
    }
    let one = Rational::one();
    let gap_rv = g.map(|x| (&one - x.clone().min(one.clone())).abs());
    let diagnostics = FreeLunchDiagnostics {
        n,
        gap: model.space.expectation(&gap_rv),
        prob_at_least_one: model
            .space
            .expectation(&g.map(|x| if *x >= one { one.clone() } else { Rational::zero() })),
        min_gain: g.min_value().cloned().unwrap_or_else(Rational::zero),
        reference_means: claims.iter().map(|f| model.space.expectation(f)).collect(),
    };
    Ok((model, diagnostics))
}

/// `2^-n (2 - 2^-n)`: the closed form of the gap for this construction.
pub fn gap_closed_form(n: usize) -> Rational {
    pow2_inv(n) * (Rational::one() + level(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ftap::{ftap_verdict, Verdict};
    use crate::market::SignConstraint;
    use crate::num::{ratio, Arithmetic};

    #[test]
    fn sum_is_bounded_and_mostly_large() {
        for n in 1..=6 {
            let (m, d) = free_lunch_truncation(n).unwrap();
            assert!(m.validate().is_empty());
            assert_eq!(d.min_gain, -level(n));
            assert_eq!(d.prob_at_least_one, level(n));
            assert_eq!(d.gap, gap_closed_form(n));
        }
    }

    #[test]
    fn first_gap() {
        let (_, d) = free_lunch_truncation(1).unwrap();
        assert_eq!(d.gap, ratio(3, 4));
        assert_eq!(d.reference_means, vec![ratio(1, 4)]);
    }

    #[test]
    fn truncations_are_arbitrage_free() {
        for n in 1..=5 {
            let (m, _) = free_lunch_truncation(n).unwrap();
            match ftap_verdict(&m, SignConstraint::Free, Arithmetic::Exact).unwrap() {
                Verdict::NoArbitrage(q) => assert!(q.is_full_support()),
                v => panic!("n={n}: {v:?}"),
            }
        }
    }

    #[test]
    fn guard() {
        assert!(free_lunch_truncation(0).is_err());
        assert!(free_lunch_truncation(17).is_err());
    }
}
