//! Scenario constructors for parameter uncertainty: Bayesian product and
//! mixture spaces observed through gridded, quantised, noisy or delayed
//! prices; options traded only on their own grids; additive price noise; and
//! a family of finite truncations of an asymptotic free lunch.

mod free_lunch;
mod noise;
mod semistatic;

pub use free_lunch::{free_lunch_truncation, gap_closed_form, FreeLunchDiagnostics, MAX_FREE_LUNCH_N};
pub use noise::{build_uncertain_price, Observe};
pub use semistatic::{embed_semistatic, embedded_price, semistatic_direct_price, uncertainty_swap, OptionGridSpec};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::market::{MarketError, MarketModel};
use crate::num::{self, Rational};
use crate::probspace::{delayed_filtration, Filtration, FiniteSpace, Partition, ProbError, RandomVariable};

/// Largest outcome count the constructors will build.
pub const MAX_BUILT_OUTCOMES: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("invalid setup: {0}")]
    Setup(String),
    #[error("likelihood of parameter `{0}` is zero on every path")]
    AllZeroLikelihood(String),
    #[error("construction would have {0} outcomes (limit {MAX_BUILT_OUTCOMES})")]
    TooLarge(usize),
    #[error("market has no parameter coordinate; posteriors need a product market")]
    NoParameter,
    #[error("inconsistent option prices: {0}")]
    OptionPrices(String),
    #[error("free-lunch truncation needs 1 ≤ n ≤ {max}, got {got}")]
    Guard { got: usize, max: usize },
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("{0}")]
    Solver(String),
}

/// Prices on a finite path space with its own filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMarket {
    pub paths: Vec<String>,
    pub grid: Vec<Rational>,
    pub filtration: Filtration,
    pub assets: Vec<String>,
    /// `prices[i][k]` over paths.
    pub prices: Vec<Vec<RandomVariable>>,
}

impl PathMarket {
    pub fn from_model(model: &MarketModel) -> Self {
        PathMarket {
            paths: model.space.labels().to_vec(),
            grid: model.grid.clone(),
            filtration: model.big_filtration.clone(),
            assets: model.assets.clone(),
            prices: model.prices.clone(),
        }
    }

    fn check(&self) -> Result<(), BayesError> {
        let n = self.paths.len();
        if self.filtration.outcome_count() != n {
            return Err(BayesError::Setup("path filtration has the wrong outcome count".into()));
        }
        if self.prices.len() != self.assets.len()
            || self
                .prices
                .iter()
                .any(|p| p.len() != self.grid.len() || p.iter().any(|x| x.len() != n))
        {
            return Err(BayesError::Setup(
                "path prices do not match assets, grid and paths".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters `θ` with prior `ν` and a path distribution `P^θ` for each.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesSetup {
    pub thetas: Vec<String>,
    pub prior: Vec<Rational>,
    /// `likelihoods[θ][path]`.
    pub likelihoods: Vec<Vec<Rational>>,
}

impl BayesSetup {
    fn check(&self, npaths: usize) -> Result<(), BayesError> {
        if self.thetas.is_empty() || self.prior.len() != self.thetas.len() {
            return Err(BayesError::Setup("one prior weight per parameter required".into()));
        }
        if self.prior.iter().any(|p| !p.is_positive()) || !num::sum(&self.prior).is_one() {
            return Err(BayesError::Setup(
                "prior must be strictly positive and sum to one".into(),
            ));
        }
        if self.likelihoods.len() != self.thetas.len() {
            return Err(BayesError::Setup("one likelihood row per parameter required".into()));
        }
        for (t, row) in self.thetas.iter().zip(&self.likelihoods) {
            if row.len() != npaths {
                return Err(BayesError::Setup(format!("likelihood of `{t}` has the wrong length")));
            }
            if row.iter().any(Signed::is_negative) {
                return Err(BayesError::Setup(format!("likelihood of `{t}` has a negative weight")));
            }
            if row.iter().all(Zero::is_zero) {
                return Err(BayesError::AllZeroLikelihood(t.clone()));
            }
            if !num::sum(row).is_one() {
                return Err(BayesError::Setup(format!("likelihood of `{t}` does not sum to one")));
            }
        }
        Ok(())
    }
}

/// Finite noise alphabet, applied independently wherever it is used.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub labels: Vec<String>,
    pub values: Vec<Rational>,
    pub probs: Vec<Rational>,
}

impl NoiseSpec {
    /// `±delta` with equal weights.
    pub fn symmetric(delta: Rational) -> Self {
        NoiseSpec {
            labels: vec!["+".into(), "-".into()],
            values: vec![delta.clone(), -delta],
            probs: vec![num::ratio(1, 2), num::ratio(1, 2)],
        }
    }

    pub fn mean(&self) -> Rational {
        num::dot(&self.values, &self.probs)
    }

    fn check(&self) -> Result<(), BayesError> {
        let k = self.values.len();
        if k == 0 || self.labels.len() != k || self.probs.len() != k {
            return Err(BayesError::Setup(
                "noise needs matching labels, values and weights".into(),
            ));
        }
        if self.probs.iter().any(|p| !p.is_positive()) || !num::sum(&self.probs).is_one() {
            return Err(BayesError::Setup(
                "noise weights must be positive and sum to one".into(),
            ));
        }
        Ok(())
    }
}

/// How prices are observed by traders.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSpec {
    /// Grid times at which prices are observed.
    pub obs_times: Vec<Rational>,
    /// Rounding step per asset (`None` = exact observation).
    pub quantizer: Vec<Option<Rational>>,
    /// Additive noise on every observation, independent across times and assets.
    pub noise: Option<NoiseSpec>,
    pub delay: Rational,
}

impl ObservationSpec {
    /// Every grid time, exact, no delay.
    pub fn full(grid: &[Rational], assets: usize) -> Self {
        ObservationSpec {
            obs_times: grid.to_vec(),
            quantizer: vec![None; assets],
            noise: None,
            delay: Rational::zero(),
        }
    }

    fn check(&self, grid: &[Rational], assets: usize) -> Result<(), BayesError> {
        if self.obs_times.iter().any(|t| !grid.contains(t)) {
            return Err(BayesError::Setup("observation times must be grid times".into()));
        }
        if self.quantizer.len() != assets {
            return Err(BayesError::Setup("one quantizer entry per asset required".into()));
        }
        if self.quantizer.iter().flatten().any(|s| !s.is_positive()) {
            return Err(BayesError::Setup("quantizer steps must be positive".into()));
        }
        if self.delay.is_negative() {
            return Err(ProbError::NegativeDelay.into());
        }
        if let Some(n) = &self.noise {
            n.check()?;
        }
        Ok(())
    }
}

/// Nearest multiple of `step`, ties rounded up.
pub fn quantize(x: &Rational, step: &Rational) -> Rational {
    let half = num::ratio(1, 2);
    ((x / step) + half).floor() * step
}

/// A constructed market with the bookkeeping needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltMarket {
    pub model: MarketModel,
    /// Parameter index per outcome (product construction only).
    pub theta_of: Option<Vec<usize>>,
    pub path_of: Vec<usize>,
    /// Labels of zero-mass outcomes removed during construction.
    pub pruned: Vec<String>,
    pub warnings: Vec<String>,
}

impl BuiltMarket {
    /// The traders' observation filtration.
    pub fn observation_filtration(&self) -> &Filtration {
        &self.model.admissible[0].filtration
    }
}

/// Every tuple with `sizes[k]` choices in slot `k`, in lexicographic order.
pub(crate) fn cartesian(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..s).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

struct RawOutcome {
    label: String,
    mass: Rational,
    path: usize,
    theta: Option<usize>,
    /// Noise choice per (observation time, asset) slot.
    noise: Vec<usize>,
}

fn build(
    setup: &BayesSetup,
    paths: &PathMarket,
    obs: &ObservationSpec,
    product: bool,
) -> Result<BuiltMarket, BayesError> {
    paths.check()?;
    setup.check(paths.paths.len())?;
    obs.check(&paths.grid, paths.assets.len())?;
    let nassets = paths.assets.len();
    let slots = obs.obs_times.len() * nassets;
    let alphabet = obs.noise.as_ref().map_or(1, |n| n.values.len());
    let thetas = if product { setup.thetas.len() } else { 1 };
    let size = (alphabet as f64).powi(slots as i32) * (paths.paths.len() * thetas) as f64;
    if size > MAX_BUILT_OUTCOMES as f64 {
        return Err(BayesError::TooLarge(size as usize));
    }
    let noise_tuples = match &obs.noise {
        Some(n) => cartesian(&vec![n.values.len(); slots]),
        None => vec![Vec::new()],
    };

    let mut raw = Vec::new();
    for (d, path) in paths.paths.iter().enumerate() {
        let thetas: Vec<Option<usize>> = if product {
            (0..setup.thetas.len()).map(Some).collect()
        } else {
            vec![None]
        };
        for theta in thetas {
            let base = match theta {
                Some(t) => &setup.prior[t] * &setup.likelihoods[t][d],
                None => (0..setup.thetas.len()).fold(Rational::zero(), |acc, t| {
                    acc + &setup.prior[t] * &setup.likelihoods[t][d]
                }),
            };
            for tuple in &noise_tuples {
                let mut mass = base.clone();
                let mut label = path.clone();
                if let Some(t) = theta {
                    label = format!("{label}|{}", setup.thetas[t]);
                }
                if let Some(n) = &obs.noise {
                    for &c in tuple {
                        mass *= &n.probs[c];
                    }
                    let tags: Vec<&str> = tuple.iter().map(|&c| n.labels[c].as_str()).collect();
                    label = format!("{label}|{}", tags.join(","));
                }
                raw.push(RawOutcome {
                    label,
                    mass,
                    path: d,
                    theta,
                    noise: tuple.clone(),
                });
            }
        }
    }

    let (kept, dropped): (Vec<RawOutcome>, Vec<RawOutcome>) = raw.into_iter().partition(|o| o.mass.is_positive());
    let pruned: Vec<String> = dropped.into_iter().map(|o| o.label).collect();
    let n = kept.len();
    let space = FiniteSpace::new(
        kept.iter().map(|o| o.label.clone()).collect(),
        kept.iter().map(|o| o.mass.clone()).collect(),
    )?;

    let grid = paths.grid.clone();
    // Slot index of (observation time k, asset i) is k * nassets + i.
    let obs_index = |t: &Rational| obs.obs_times.iter().filter(|s| *s <= t).count();

    let big_parts = grid
        .iter()
        .map(|t| {
            let pf = paths.filtration.at(t);
            let seen = obs_index(t) * nassets;
            Partition::from_key(n, |w| {
                let o = &kept[w];
                let noise: Vec<usize> = o.noise.iter().take(seen).cloned().collect();
                (pf.block_of(o.path), o.theta, noise)
            })
        })
        .collect();
    let big = Filtration::new(grid.clone(), big_parts)?;

    let grid_pos = |t: &Rational| grid.iter().position(|s| s == t).expect("observation on grid");
    let observed = |w: usize, k: usize| -> Vec<Rational> {
        let o = &kept[w];
        let g = grid_pos(&obs.obs_times[k]);
        (0..nassets)
            .map(|i| {
                let s = &paths.prices[i][g][o.path];
                let mut v = match &obs.quantizer[i] {
                    Some(step) => quantize(s, step),
                    None => s.clone(),
                };
                if let Some(noise) = &obs.noise {
                    v += &noise.values[o.noise[k * nassets + i]];
                }
                v
            })
            .collect()
    };
    let obs_parts = grid
        .iter()
        .map(|t| {
            let upto = obs_index(t);
            Partition::from_key(n, |w| (0..upto).map(|k| observed(w, k)).collect::<Vec<_>>())
        })
        .collect();
    let generated = Filtration::new(grid.clone(), obs_parts)?;
    let observation = delayed_filtration(&generated, &obs.delay)?;

    let prices = paths
        .prices
        .iter()
        .map(|path| {
            path.iter()
                .map(|x| RandomVariable::new(kept.iter().map(|o| x[o.path].clone()).collect()))
                .collect()
        })
        .collect();
    let model = MarketModel::with_filtration(space, grid, big, paths.assets.clone(), prices, observation);
    model.ensure_valid()?;

    let mut warnings = Vec::new();
    if !pruned.is_empty() {
        warnings.push(format!("pruned {} zero-mass outcomes", pruned.len()));
    }
    if let Some(noise) = &obs.noise {
        if !noise.mean().is_zero() {
            warnings.push(format!(
                "observation noise has mean {}",
                num::format_rational(&noise.mean())
            ));
        }
    }
    Ok(BuiltMarket {
        model,
        theta_of: product.then(|| kept.iter().map(|o| o.theta.expect("product outcome")).collect()),
        path_of: kept.iter().map(|o| o.path).collect(),
        pruned,
        warnings,
    })
}

/// Outcomes are `(path, θ)` pairs with mass `ν(θ)·P^θ(path)`; `θ` is known in
/// the big filtration from the start but never observed by traders.
pub fn build_product_market(
    setup: &BayesSetup,
    paths: &PathMarket,
    obs: &ObservationSpec,
) -> Result<BuiltMarket, BayesError> {
    build(setup, paths, obs, true)
}

/// Outcomes are paths under the mixture `Σ_θ ν(θ) P^θ`.
pub fn build_mixture_market(
    setup: &BayesSetup,
    paths: &PathMarket,
    obs: &ObservationSpec,
) -> Result<BuiltMarket, BayesError> {
    build(setup, paths, obs, false)
}

/// Posterior over parameters on one block of the observation filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPosterior {
    pub block: Vec<usize>,
    pub weights: Vec<Rational>,
}

/// `ν_t(θ | B)` for every block `B` of the observation filtration at `t`.
pub fn posterior(setup: &BayesSetup, built: &BuiltMarket, t: &Rational) -> Result<Vec<BlockPosterior>, BayesError> {
    let theta_of = built.theta_of.as_ref().ok_or(BayesError::NoParameter)?;
    let p = built.model.space.probs();
    let part = built.observation_filtration().at(t);
    Ok(part
        .blocks()
        .iter()
        .map(|b| {
            let mut w = vec![Rational::zero(); setup.thetas.len()];
            for &o in b {
                w[theta_of[o]] += &p[o];
            }
            let total = num::sum(&w);
            BlockPosterior {
                block: b.clone(),
                weights: w.into_iter().map(|x| x / &total).collect(),
            }
        })
        .collect())
}

/// Posterior weight of `theta` as a random variable on the built space.
pub fn posterior_process(
    setup: &BayesSetup,
    built: &BuiltMarket,
    t: &Rational,
    theta: usize,
) -> Result<RandomVariable, BayesError> {
    let mut out = vec![Rational::zero(); built.model.outcome_count()];
    for b in posterior(setup, built, t)? {
        for &o in &b.block {
            out[o] = b.weights[theta].clone();
        }
    }
    Ok(RandomVariable::new(out))
}

/// Observation-block counts at every grid time.
pub fn block_counts(f: &Filtration, grid: &[Rational]) -> Vec<usize> {
    grid.iter().map(|t| f.at(t).len()).collect()
}

/// Labels grouped per block, handy for reports.
pub fn block_labels(space: &FiniteSpace, part: &Partition) -> Vec<Vec<String>> {
    part.blocks()
        .iter()
        .map(|b| b.iter().map(|&w| space.labels()[w].clone()).collect())
        .collect()
}

/// Distinct values of a parameter-dependent payoff, keyed by parameter.
pub fn theta_payoff(built: &BuiltMarket, per_theta: &[Rational]) -> Result<RandomVariable, BayesError> {
    let theta_of = built.theta_of.as_ref().ok_or(BayesError::NoParameter)?;
    Ok(RandomVariable::new(
        theta_of.iter().map(|&t| per_theta[t].clone()).collect(),
    ))
}
