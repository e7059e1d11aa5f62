use num_traits::Zero;

use super::{cartesian, quantize, BayesError, BuiltMarket, NoiseSpec, MAX_BUILT_OUTCOMES};
use crate::market::MarketModel;
use crate::num::{self, Rational};
use crate::probspace::{Filtration, FiniteSpace, Partition, RandomVariable};

/// What traders see in a noisy-price market.
#[derive(Debug, Clone, PartialEq)]
pub enum Observe {
    Nothing,
    /// The noiseless prices `Y`.
    Base,
    /// The traded prices `S = Y + Z`, optionally rounded.
    Noisy {
        quantizer: Option<Rational>,
    },
}

/// Traded prices `S = Y + Z` with `Y` from `base` and independent noise `Z`
/// added at each of `noisy_times` (per asset). The big filtration sees `Y`
/// and the noise drawn so far.
pub fn build_uncertain_price(
    base: &MarketModel,
    noise: &NoiseSpec,
    noisy_times: &[Rational],
    observe: &Observe,
) -> Result<BuiltMarket, BayesError> {
    base.ensure_valid()?;
    noise.check()?;
    if noisy_times.iter().any(|t| base.grid_index(t).is_none()) {
        return Err(BayesError::Setup("noisy times must be grid times".into()));
    }
    let nassets = base.assets.len();
    let slots = noisy_times.len() * nassets;
    let size = (noise.values.len() as f64).powi(slots as i32) * base.outcome_count() as f64;
    if size > MAX_BUILT_OUTCOMES as f64 {
        return Err(BayesError::TooLarge(size as usize));
    }
    let tuples = cartesian(&vec![noise.values.len(); slots]);
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    let mut origin = Vec::new();
    for (d, label) in base.space.labels().iter().enumerate() {
        for tuple in &tuples {
            let mut p = base.space.probs()[d].clone();
            for &c in tuple {
                p *= &noise.probs[c];
            }
            let tags: Vec<&str> = tuple.iter().map(|&c| noise.labels[c].as_str()).collect();
            labels.push(if tags.is_empty() {
                label.clone()
            } else {
                format!("{label}|{}", tags.join(","))
            });
            probs.push(p);
            origin.push((d, tuple.clone()));
        }
    }
    let n = labels.len();
    let space = FiniteSpace::new(labels, probs)?;
    let grid = base.grid.clone();

    let slot_of = |k: usize| noisy_times.iter().position(|t| *t == grid[k]);
    let prices: Vec<Vec<RandomVariable>> = (0..nassets)
        .map(|i| {
            (0..grid.len())
                .map(|k| {
                    RandomVariable::new(
                        origin
                            .iter()
                            .map(|(d, tuple)| {
                                let y = base.prices[i][k][*d].clone();
                                match slot_of(k) {
                                    Some(s) => y + &noise.values[tuple[s * nassets + i]],
                                    None => y,
                                }
                            })
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();

    let seen = |t: &Rational| noisy_times.iter().filter(|s| *s <= t).count() * nassets;
    let big = Filtration::new(
        grid.clone(),
        grid.iter()
            .map(|t| {
                let pf = base.big_filtration.at(t);
                let upto = seen(t);
                Partition::from_key(n, |w| {
                    let (d, tuple) = &origin[w];
                    (pf.block_of(*d), tuple[..upto].to_vec())
                })
            })
            .collect(),
    )?;
    let observation = match observe {
        Observe::Nothing => Filtration::trivial(n, grid.clone())?,
        Observe::Base => Filtration::new(
            grid.clone(),
            grid.iter()
                .map(|t| {
                    let pf = base.big_filtration.at(t);
                    Partition::from_key(n, |w| pf.block_of(origin[w].0))
                })
                .collect(),
        )?,
        Observe::Noisy { quantizer } => Filtration::new(
            grid.clone(),
            (0..grid.len())
                .map(|k| {
                    Partition::from_key(n, |w| {
                        (0..=k)
                            .flat_map(|j| {
                                prices.iter().map(move |p| match quantizer {
                                    Some(step) => quantize(&p[j][w], step),
                                    None => p[j][w].clone(),
                                })
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect(),
        )?,
    };
    let model = MarketModel::with_filtration(space, grid, big, base.assets.clone(), prices, observation);
    model.ensure_valid()?;
    let mut warnings = Vec::new();
    if !noise.mean().is_zero() {
        warnings.push(format!("noise has mean {}", num::format_rational(&noise.mean())));
    }
    Ok(BuiltMarket {
        model,
        theta_of: None,
        path_of: origin.iter().map(|(d, _)| *d).collect(),
        pruned: Vec::new(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::ftap::{find_measure, MeasureKind};
    use crate::hedging::superreplicate;
    use crate::market::SignConstraint;
    use crate::num::{int, ratio, Arithmetic};

    #[test]
    fn zero_noise_keeps_prices() {
        let y = canonical::one_period_binomial();
        let z = NoiseSpec {
            labels: vec!["0".into()],
            values: vec![int(0)],
            probs: vec![int(1)],
        };
        let b = build_uncertain_price(&y, &z, &[int(1)], &Observe::Base).unwrap();
        assert_eq!(b.model.prices, y.prices);
    }

    #[test]
    fn blind_noisy_market_has_a_measure() {
        let y = canonical::one_period_binomial();
        let b = build_uncertain_price(&y, &NoiseSpec::symmetric(ratio(1, 4)), &[int(1)], &Observe::Nothing).unwrap();
        assert_eq!(b.model.outcome_count(), 4);
        let q = find_measure(&b.model, MeasureKind::Martingale, Arithmetic::Exact).unwrap();
        assert!(q.unwrap().is_full_support());
    }

    #[test]
    fn noise_raises_the_call_price() {
        let y = canonical::one_period_binomial();
        let call = |m: &MarketModel| m.terminal_prices(0).map(|x| num::positive_part(&(x - int(1))));
        let clean = superreplicate(&y, &call(&y), SignConstraint::Free, Arithmetic::Exact)
            .unwrap()
            .hedge
            .price;
        assert_eq!(clean, ratio(1, 3));
        let b = build_uncertain_price(&y, &NoiseSpec::symmetric(ratio(1, 4)), &[int(1)], &Observe::Base).unwrap();
        let noisy = superreplicate(&b.model, &call(&b.model), SignConstraint::Free, Arithmetic::Exact)
            .unwrap()
            .hedge
            .price;
        assert!(noisy > clean, "{noisy} vs {clean}");
    }

    #[test]
    fn biased_noise_warns() {
        let y = canonical::one_period_binomial();
        let z = NoiseSpec {
            labels: vec!["a".into(), "b".into()],
            values: vec![int(1), int(0)],
            probs: vec![ratio(1, 2), ratio(1, 2)],
        };
        let b = build_uncertain_price(&y, &z, &[int(1)], &Observe::Noisy { quantizer: None }).unwrap();
        assert_eq!(b.warnings.len(), 1);
    }
}
