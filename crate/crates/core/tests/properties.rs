use num_traits::{One, Zero};
use platonic::bayes::{build_product_market, posterior_process, BayesSetup, ObservationSpec, PathMarket};
use platonic::canonical;
use platonic::ftap::combination;
use platonic::ftap::{ftap_verdict, Verdict};
use platonic::hedging::{dual_polytope, superreplicate};
use platonic::lpsolve::enumerate_vertices;
use platonic::market::{enumerate_generators, wealth_process, AdmissibleSet, MarketModel, SignConstraint, Strategy};
use platonic::num::{int, ratio, Arithmetic, Rational};
use platonic::probspace::{
    conditional_expectation, delayed_filtration, is_sub_filtration, Filtration, NullBlockPolicy, Partition,
    RandomVariable,
};
use platonic::random::{
    random_claim, random_coarsening, random_market, random_probs, rng_from_seed, RandomMarketConfig,
};
use proptest::prelude::*;
use rand::Rng;

const EXACT: Arithmetic = Arithmetic::Exact;

fn market(seed: u64) -> MarketModel {
    random_market(&mut rng_from_seed(seed), &RandomMarketConfig::default())
}

fn verdict_label(m: &MarketModel, mode: SignConstraint) -> &'static str {
    ftap_verdict(m, mode, EXACT).unwrap().label()
}

fn price(m: &MarketModel, f: &RandomVariable, mode: SignConstraint) -> Rational {
    superreplicate(m, f, mode, EXACT).unwrap().hedge.price
}

fn arbitrage_free(m: &MarketModel, mode: SignConstraint) -> bool {
    !ftap_verdict(m, mode, EXACT).unwrap().is_arbitrage()
}

/// The same market with an extra grid time inserted after `grid[k]`, where
/// nothing moves and nothing new is learned.
fn with_idle_time(m: &MarketModel, k: usize) -> MarketModel {
    let t = (&m.grid[k] + &m.grid[k + 1]) / int(2);
    let mut grid = m.grid.clone();
    grid.insert(k + 1, t);
    let stretch = |f: &Filtration| {
        let mut parts: Vec<Partition> = f.partitions().to_vec();
        let p = f.at(&m.grid[k]).clone();
        parts.insert(k + 1, p);
        Filtration::new(grid.clone(), parts).unwrap()
    };
    MarketModel {
        space: m.space.clone(),
        grid: grid.clone(),
        big_filtration: stretch(&m.big_filtration),
        assets: m.assets.clone(),
        prices: m
            .prices
            .iter()
            .map(|path| {
                let mut p = path.clone();
                p.insert(k + 1, path[k].clone());
                p
            })
            .collect(),
        admissible: m
            .admissible
            .iter()
            .map(|a| AdmissibleSet {
                assets: a.assets.clone(),
                filtration: stretch(&a.filtration),
            })
            .collect(),
    }
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn tower_property(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let m = market(seed);
        let n = m.outcome_count();
        let q = random_probs(&mut rng, n);
        let x = random_claim(&mut rng, n, -5, 5);
        let parts = m.big_filtration.partitions();
        for a in 0..parts.len() {
            let coarse = conditional_expectation(&x, &parts[a], &q, NullBlockPolicy::Reject).unwrap();
            prop_assert!(parts[a].is_measurable(&coarse));
            prop_assert_eq!(coarse.integrate(&q), x.integrate(&q));
            for fine in &parts[a..] {
                let inner = conditional_expectation(&x, fine, &q, NullBlockPolicy::Reject).unwrap();
                let outer = conditional_expectation(&inner, &parts[a], &q, NullBlockPolicy::Reject).unwrap();
                prop_assert_eq!(&outer, &coarse);
            }
            // Measurable variables are fixed points.
            prop_assert_eq!(conditional_expectation(&coarse, &parts[a], &q, NullBlockPolicy::Reject).unwrap(), coarse);
        }
    }

    #[test]
    fn conditional_expectation_is_linear(seed in any::<u64>(), c in -4i64..=4) {
        let mut rng = rng_from_seed(seed);
        let m = market(seed);
        let n = m.outcome_count();
        let q = random_probs(&mut rng, n);
        let x = random_claim(&mut rng, n, -5, 5);
        let y = random_claim(&mut rng, n, -5, 5);
        let p = m.big_filtration.partitions().last().unwrap();
        let ce = |v: &RandomVariable| conditional_expectation(v, p, &q, NullBlockPolicy::Reject).unwrap();
        prop_assert_eq!(ce(&x.scale(&int(c)).add(&y)), ce(&x).scale(&int(c)).add(&ce(&y)));
    }

    #[test]
    fn delay_shrinks_information(seed in any::<u64>(), d1 in 0i64..=4, d2 in 0i64..=4) {
        let m = market(seed);
        let f = &m.admissible[m.top_set()].filtration;
        let (small, large) = (d1.min(d2), d1.max(d2));
        let less = delayed_filtration(f, &ratio(small, 4)).unwrap();
        let more = delayed_filtration(f, &ratio(large, 4)).unwrap();
        prop_assert!(is_sub_filtration(&more, &less).unwrap());
        prop_assert!(is_sub_filtration(&less, f).unwrap());
    }

    #[test]
    fn delay_never_creates_arbitrage(seed in any::<u64>(), d in 1i64..=4) {
        let m = market(seed);
        let mut delayed = m.clone();
        for a in delayed.admissible.iter_mut() {
            a.filtration = delayed_filtration(&a.filtration, &ratio(d, 4)).unwrap();
        }
        prop_assert!(delayed.validate().is_empty());
        if arbitrage_free(&m, SignConstraint::Free) {
            prop_assert!(arbitrage_free(&delayed, SignConstraint::Free));
        }
    }

    #[test]
    fn exactly_one_certificate(seed in any::<u64>()) {
        let m = market(seed);
        for mode in [SignConstraint::Free, SignConstraint::LongOnly] {
            let gens = enumerate_generators(&m, mode);
            match ftap_verdict(&m, mode, EXACT).unwrap() {
                Verdict::Arbitrage(a) => prop_assert!(a.verify(&gens)),
                Verdict::NoArbitrage(q) => {
                    prop_assert!(q.is_full_support());
                    prop_assert!(q.residual().is_zero());
                }
            }
        }
    }

    #[test]
    fn long_only_arbitrage_implies_free_arbitrage(seed in any::<u64>()) {
        let m = market(seed);
        if !arbitrage_free(&m, SignConstraint::LongOnly) {
            prop_assert!(!arbitrage_free(&m, SignConstraint::Free));
        }
    }

    #[test]
    fn price_scaling_keeps_verdicts(seed in any::<u64>(), num in 1i64..=7, den in 1i64..=7) {
        let m = market(seed);
        let c = ratio(num, den);
        let mut scaled = m.clone();
        for path in scaled.prices.iter_mut() {
            for x in path.iter_mut() {
                *x = x.scale(&c);
            }
        }
        for mode in [SignConstraint::Free, SignConstraint::LongOnly] {
            prop_assert_eq!(verdict_label(&m, mode), verdict_label(&scaled, mode));
        }
    }

    #[test]
    fn reference_measure_is_irrelevant(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed ^ 0x5eed);
        let m = market(seed);
        let other = m.with_probs(random_probs(&mut rng, m.outcome_count())).unwrap();
        let f = random_claim(&mut rng, m.outcome_count(), -3, 6);
        for mode in [SignConstraint::Free, SignConstraint::LongOnly] {
            prop_assert_eq!(verdict_label(&m, mode), verdict_label(&other, mode));
            if arbitrage_free(&m, mode) {
                prop_assert_eq!(price(&m, &f, mode), price(&other, &f, mode));
            }
        }
    }

    #[test]
    fn strong_duality_and_price_axioms(seed in any::<u64>(), c in 1i64..=5, shift in -3i64..=3) {
        let mut rng = rng_from_seed(seed ^ 0xd0a1);
        let m = market(seed);
        let n = m.outcome_count();
        let f = random_claim(&mut rng, n, -3, 6);
        let bump = random_claim(&mut rng, n, 0, 2);
        for mode in [SignConstraint::Free, SignConstraint::LongOnly] {
            if !arbitrage_free(&m, mode) {
                continue;
            }
            let s = superreplicate(&m, &f, mode, EXACT).unwrap();
            prop_assert_eq!(&s.hedge.price, &s.dual_value);
            prop_assert!(s.hedge.shortfall().is_zero());
            prop_assert!(s.hedge.slackness(&s.dual.q).is_zero());
            let p = s.hedge.price;
            prop_assert_eq!(price(&m, &f.scale(&int(c)), mode), &p * int(c));
            prop_assert_eq!(price(&m, &f.shift(&int(shift)), mode), &p + int(shift));
            prop_assert!(price(&m, &f.add(&bump), mode) >= p);
            // Bounded by the claim's range.
            prop_assert!(p <= f.max_value().unwrap().clone());
            prop_assert!(p >= f.min_value().unwrap().clone());
        }
        if arbitrage_free(&m, SignConstraint::Free) {
            prop_assert!(price(&m, &f, SignConstraint::LongOnly) >= price(&m, &f, SignConstraint::Free));
        }
    }

    #[test]
    fn lp_dual_matches_vertex_oracle(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed ^ 0x7e47);
        let m = market(seed);
        if !arbitrage_free(&m, SignConstraint::Free) {
            return Ok(());
        }
        let vertices = enumerate_vertices(&dual_polytope(&m, SignConstraint::Free)).unwrap();
        let f = random_claim(&mut rng, m.outcome_count(), -3, 6);
        let best = vertices.iter().map(|q| f.integrate(q)).max().unwrap();
        prop_assert_eq!(superreplicate(&m, &f, SignConstraint::Free, EXACT).unwrap().dual_value, best);
    }

    #[test]
    fn terminal_wealth_is_a_generator_combination(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed ^ 0x3a11);
        let m = market(seed);
        let gens = enumerate_generators(&m, SignConstraint::Free);
        let lambda: Vec<Rational> = gens.iter().map(|_| int(rng.random_range(-3..=3))).collect();
        let strat = Strategy::from_generators(&m, &gens, &lambda, SignConstraint::Free);
        let wealth = wealth_process(&m, &strat).unwrap();
        prop_assert!(wealth[0].is_zero());
        prop_assert_eq!(wealth.last().unwrap(), &combination(m.outcome_count(), &gens, &lambda));
    }

    #[test]
    fn idle_grid_times_change_nothing(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed ^ 0x9e1d);
        let m = market(seed);
        let k = rng.random_range(0..m.grid.len() - 1);
        let fine = with_idle_time(&m, k);
        prop_assert!(fine.validate().is_empty());
        let f = random_claim(&mut rng, m.outcome_count(), -3, 6);
        for mode in [SignConstraint::Free, SignConstraint::LongOnly] {
            prop_assert_eq!(verdict_label(&m, mode), verdict_label(&fine, mode));
            if arbitrage_free(&m, mode) {
                prop_assert_eq!(price(&m, &f, mode), price(&fine, &f, mode));
            }
        }
    }

    #[test]
    fn coarser_trading_raises_prices(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed ^ 0xc0a5);
        let m = market(seed);
        if !arbitrage_free(&m, SignConstraint::Free) || m.admissible.len() != 1 {
            return Ok(());
        }
        let mut coarse = m.clone();
        coarse.admissible[0].filtration = random_coarsening(&mut rng, &m.admissible[0].filtration);
        let f = random_claim(&mut rng, m.outcome_count(), -3, 6);
        prop_assert!(arbitrage_free(&coarse, SignConstraint::Free));
        prop_assert!(price(&coarse, &f, SignConstraint::Free) >= price(&m, &f, SignConstraint::Free));
    }
}

fn random_setup<R: Rng>(rng: &mut R, thetas: usize, paths: usize) -> BayesSetup {
    BayesSetup {
        thetas: (0..thetas).map(|k| format!("t{k}")).collect(),
        prior: random_probs(rng, thetas),
        likelihoods: (0..thetas).map(|_| random_probs(rng, paths)).collect(),
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn posterior_is_a_martingale(seed in any::<u64>(), thetas in 1usize..=3, delayed in any::<bool>()) {
        let mut rng = rng_from_seed(seed);
        let paths = PathMarket::from_model(&canonical::two_period_binomial());
        let setup = random_setup(&mut rng, thetas, paths.paths.len());
        let mut obs = ObservationSpec::full(&paths.grid, 1);
        if delayed {
            obs.delay = ratio(1, 2);
        }
        let b = build_product_market(&setup, &paths, &obs).unwrap();
        let p = b.model.space.probs();
        let grid = &b.model.grid;
        for theta in 0..thetas {
            for k in 0..grid.len() - 1 {
                let now = posterior_process(&setup, &b, &grid[k], theta).unwrap();
                let next = posterior_process(&setup, &b, &grid[k + 1], theta).unwrap();
                let part = b.observation_filtration().at(&grid[k]);
                prop_assert_eq!(conditional_expectation(&next, part, p, NullBlockPolicy::Reject).unwrap(), now);
            }
        }
    }

    #[test]
    fn finer_observation_spreads_the_posterior(seed in any::<u64>(), strike in 0i64..=8) {
        let mut rng = rng_from_seed(seed);
        let paths = PathMarket::from_model(&canonical::two_period_binomial());
        let setup = random_setup(&mut rng, 2, paths.paths.len());
        let fine_obs = ObservationSpec::full(&paths.grid, 1);
        let mut coarse_obs = fine_obs.clone();
        coarse_obs.delay = ratio(1, 2);
        let fine = build_product_market(&setup, &paths, &fine_obs).unwrap();
        let coarse = build_product_market(&setup, &paths, &coarse_obs).unwrap();
        prop_assert_eq!(&fine.model.space, &coarse.model.space);
        let p = fine.model.space.probs();
        let k = ratio(strike, 8);
        let t = Rational::one();
        let nu_f = posterior_process(&setup, &fine, &t, 0).unwrap();
        let nu_c = posterior_process(&setup, &coarse, &t, 0).unwrap();
        // Same mean, and larger for every convex test function.
        prop_assert_eq!(nu_f.integrate(p), nu_c.integrate(p));
        let call = |v: &RandomVariable| v.map(|x| platonic::num::positive_part(&(x - &k))).integrate(p);
        prop_assert!(call(&nu_f) >= call(&nu_c));
        prop_assert!(nu_f.mul(&nu_f).integrate(p) >= nu_c.mul(&nu_c).integrate(p));
    }
}
