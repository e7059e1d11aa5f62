//! JSON scenario documents (`"schema_version": 1`).
//!
//! Parsing is pure: callers hand over the text and get back a model plus the
//! named claims, with any builder sections (`bayes`, `noise`, `options`)
//! already applied. Rationals are written as `"a/b"` strings; plain JSON
//! numbers are read exactly from their decimal text. The full schema is
//! described in `SCENARIO_FORMAT.md` at the repository root.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{
    self, BayesError, BayesSetup, BuiltMarket, NoiseSpec, ObservationSpec, Observe, OptionGridSpec, PathMarket,
};
use crate::market::{AdmissibleSet, MarketError, MarketModel};
use crate::num::{self, format_rational, parse_rational, Rational};
use crate::probspace::{delayed_filtration, Filtration, FiniteSpace, Partition, RandomVariable};

pub const SCHEMA_VERSION: u32 = 1;

/// A rational written either as a string or as a JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Number(serde_json::Number),
}

impl Num {
    pub fn of(x: &Rational) -> Self {
        Num::Text(format_rational(x))
    }

    fn text(&self) -> String {
        match self {
            Num::Text(s) => s.clone(),
            Num::Number(n) => n.to_string(),
        }
    }
}

/// Values over outcomes, or one value for all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Constant(Num),
    List(Vec<Num>),
}

/// `"trivial"`, `"discrete"`, or explicit blocks of outcome labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Named(String),
    Blocks(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub outcomes: Vec<String>,
    /// Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<Num>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetSection {
    pub name: String,
    /// One entry per grid time.
    pub values: Vec<Values>,
}

/// Either explicit partitions per grid time, or the big filtration delayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<PartitionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSection {
    pub assets: Vec<String>,
    #[serde(default = "default_name")]
    pub filtration: String,
}

fn default_name() -> String {
    "default".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Values>,
    /// Payoff depending only on the parameter (needs a `bayes` section).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_theta: Option<Vec<Num>>,
    /// Call or put on an asset's terminal price in the built market.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanilla: Option<VanillaSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VanillaKind {
    Call,
    Put,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VanillaSection {
    #[serde(rename = "type")]
    pub kind: VanillaKind,
    pub asset: String,
    pub strike: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub values: Vec<Num>,
    pub probs: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSection {
    /// All grid times when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantizer: Option<Vec<Option<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<AlphabetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Product,
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesSection {
    pub thetas: Vec<String>,
    pub prior: Vec<Num>,
    /// One row per parameter, over the outcomes of `space`.
    pub likelihoods: Vec<Vec<Num>>,
    #[serde(default = "product")]
    pub construction: Construction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ObservationSection>,
}

fn product() -> Construction {
    Construction::Product
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObserveMode {
    Nothing,
    Base,
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub values: Vec<Num>,
    pub probs: Vec<Num>,
    /// Every grid time after the first when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<Num>>,
    pub observe: ObserveMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantizer: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<Values>,
    /// Name of a claim to use as the payoff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff_claim: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_theta: Option<Vec<Num>>,
    pub trading_times: Vec<Num>,
    /// One entry per trading time.
    pub prices: Vec<Values>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub space: SpaceSection,
    pub grid: Vec<Num>,
    /// One partition per grid time.
    pub big_filtration: Vec<PartitionSpec>,
    pub assets: Vec<AssetSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trading_filtrations: Vec<FiltrationSection>,
    /// One set of all assets on the big filtration when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub admissible_sets: Vec<SetSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bayes: Option<BayesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<OptionSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<ClaimSection>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    /// The document parses but describes an invalid market.
    #[error("invalid model: {0}")]
    Model(String),
}

impl ScenarioError {
    /// Whether the failure is about the market rather than the document.
    pub fn is_model_error(&self) -> bool {
        matches!(self, ScenarioError::Model(_))
    }
}

fn field(path: impl fmt::Display, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Field {
        path: path.to_string(),
        message: message.to_string(),
    }
}

impl From<BayesError> for ScenarioError {
    fn from(e: BayesError) -> Self {
        match e {
            BayesError::Market(m) => ScenarioError::Model(m.to_string()),
            other => field("builder", other),
        }
    }
}

impl From<MarketError> for ScenarioError {
    fn from(e: MarketError) -> Self {
        ScenarioError::Model(e.to_string())
    }
}

/// Everything a scenario document describes, ready for the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub description: Option<String>,
    pub model: MarketModel,
    pub claims: Vec<(String, RandomVariable)>,
    pub bayes: Option<BayesSetup>,
    /// Present when a `bayes` or `noise` section built the market.
    pub built: Option<BuiltMarket>,
    pub options: Vec<OptionGridSpec>,
    /// The market before options were embedded.
    pub pre_embedding: Option<MarketModel>,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn claim(&self, name: &str) -> Option<&RandomVariable> {
        self.claims.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }
}

fn rational(x: &Num, path: &str) -> Result<Rational, ScenarioError> {
    parse_rational(&x.text()).map_err(|e| field(path, e))
}

fn rationals(xs: &[Num], path: &str) -> Result<Vec<Rational>, ScenarioError> {
    xs.iter()
        .enumerate()
        .map(|(i, x)| rational(x, &format!("{path}[{i}]")))
        .collect()
}

fn values(v: &Values, n: usize, path: &str) -> Result<RandomVariable, ScenarioError> {
    match v {
        Values::Constant(c) => Ok(RandomVariable::constant(n, rational(c, path)?)),
        Values::List(xs) if xs.len() == n => Ok(RandomVariable::new(rationals(xs, path)?)),
        Values::List(xs) => Err(field(path, format!("expected {n} values, found {}", xs.len()))),
    }
}

fn partition(p: &PartitionSpec, space: &FiniteSpace, path: &str) -> Result<Partition, ScenarioError> {
    let n = space.len();
    match p {
        PartitionSpec::Named(s) if s == "trivial" => Ok(Partition::trivial(n)),
        PartitionSpec::Named(s) if s == "discrete" => Ok(Partition::discrete(n)),
        PartitionSpec::Named(s) => Err(field(path, format!("unknown partition `{s}`"))),
        PartitionSpec::Blocks(blocks) => {
            let idx = blocks
                .iter()
                .enumerate()
                .map(|(b, block)| {
                    block
                        .iter()
                        .map(|l| {
                            space
                                .index_of(l)
                                .ok_or_else(|| field(format!("{path}[{b}]"), format!("unknown outcome `{l}`")))
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Partition::new(n, idx).map_err(|e| field(path, e))
        }
    }
}

fn filtration(
    ps: &[PartitionSpec],
    space: &FiniteSpace,
    grid: &[Rational],
    path: &str,
) -> Result<Filtration, ScenarioError> {
    if ps.len() != grid.len() {
        return Err(field(
            path,
            format!("expected {} partitions, found {}", grid.len(), ps.len()),
        ));
    }
    let parts = ps
        .iter()
        .enumerate()
        .map(|(k, p)| partition(p, space, &format!("{path}[{k}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Filtration::new(grid.to_vec(), parts).map_err(|e| field(path, e))
}

fn time_list(xs: &[Num], grid: &[Rational], path: &str) -> Result<Vec<Rational>, ScenarioError> {
    let ts = rationals(xs, path)?;
    if let Some(t) = ts.iter().find(|t| !grid.contains(t)) {
        return Err(field(path, format!("{} is not a grid time", format_rational(t))));
    }
    Ok(ts)
}

fn alphabet(a: &AlphabetSection, path: &str) -> Result<NoiseSpec, ScenarioError> {
    let values = rationals(&a.values, &format!("{path}.values"))?;
    let probs = rationals(&a.probs, &format!("{path}.probs"))?;
    let labels = match &a.labels {
        Some(l) => l.clone(),
        None => values.iter().map(format_rational).collect(),
    };
    if labels.len() != values.len() || probs.len() != values.len() {
        return Err(field(path, "labels, values and probs must have equal length"));
    }
    Ok(NoiseSpec { labels, values, probs })
}

/// Parses and builds a scenario from JSON text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build_scenario(&file)
}

pub fn build_scenario(file: &ScenarioFile) -> Result<Scenario, ScenarioError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(ScenarioError::Version(file.schema_version));
    }
    let labels = file.space.outcomes.clone();
    let space = match &file.space.probs {
        None => FiniteSpace::uniform(labels),
        Some(p) => FiniteSpace::new(labels, rationals(p, "space.probs")?),
    }
    .map_err(|e| field("space", e))?;
    let n = space.len();
    let grid = rationals(&file.grid, "grid")?;
    let big = filtration(&file.big_filtration, &space, &grid, "big_filtration")?;

    let mut names = BTreeSet::new();
    let mut prices = Vec::new();
    for (i, a) in file.assets.iter().enumerate() {
        let path = format!("assets[{i}]");
        if !names.insert(a.name.clone()) {
            return Err(field(path, format!("duplicate asset `{}`", a.name)));
        }
        if a.values.len() != grid.len() {
            return Err(field(
                &path,
                format!("expected {} time slices, found {}", grid.len(), a.values.len()),
            ));
        }
        prices.push(
            a.values
                .iter()
                .enumerate()
                .map(|(k, v)| values(v, n, &format!("{path}.values[{k}]")))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let assets: Vec<String> = file.assets.iter().map(|a| a.name.clone()).collect();

    if file.bayes.is_some() && file.noise.is_some() {
        return Err(field("bayes", "a scenario may use either `bayes` or `noise`, not both"));
    }
    let builds = file.bayes.is_some() || file.noise.is_some();
    if builds && (!file.admissible_sets.is_empty() || !file.trading_filtrations.is_empty()) {
        return Err(field(
            "admissible_sets",
            "trading filtrations are derived from the builder section and cannot be given",
        ));
    }

    let base = MarketModel::with_filtration(
        space.clone(),
        grid.clone(),
        big.clone(),
        assets.clone(),
        prices,
        big.clone(),
    );
    let mut bayes_setup = None;
    let mut warnings = Vec::new();
    let (mut model, built) = if let Some(b) = &file.bayes {
        let setup = BayesSetup {
            thetas: b.thetas.clone(),
            prior: rationals(&b.prior, "bayes.prior")?,
            likelihoods: b
                .likelihoods
                .iter()
                .enumerate()
                .map(|(k, row)| rationals(row, &format!("bayes.likelihoods[{k}]")))
                .collect::<Result<_, _>>()?,
        };
        let mut obs = ObservationSpec::full(&grid, assets.len());
        if let Some(o) = &b.observation {
            if let Some(ts) = &o.times {
                obs.obs_times = time_list(ts, &grid, "bayes.observation.times")?;
            }
            if let Some(q) = &o.quantizer {
                obs.quantizer = q
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.as_ref()
                            .map(|s| rational(s, &format!("bayes.observation.quantizer[{i}]")))
                            .transpose()
                    })
                    .collect::<Result<_, _>>()?;
            }
            if let Some(a) = &o.noise {
                obs.noise = Some(alphabet(a, "bayes.observation.noise")?);
            }
            if let Some(d) = &o.delay {
                obs.delay = rational(d, "bayes.observation.delay")?;
            }
        }
        let paths = PathMarket::from_model(&base);
        let built = match b.construction {
            Construction::Product => bayes::build_product_market(&setup, &paths, &obs)?,
            Construction::Mixture => bayes::build_mixture_market(&setup, &paths, &obs)?,
        };
        bayes_setup = Some(setup);
        (built.model.clone(), Some(built))
    } else if let Some(z) = &file.noise {
        base.ensure_valid()?;
        let spec = alphabet(
            &AlphabetSection {
                labels: z.labels.clone(),
                values: z.values.clone(),
                probs: z.probs.clone(),
            },
            "noise",
        )?;
        let times = match &z.times {
            Some(ts) => time_list(ts, &grid, "noise.times")?,
            None => grid[1..].to_vec(),
        };
        let observe = match z.observe {
            ObserveMode::Nothing => Observe::Nothing,
            ObserveMode::Base => Observe::Base,
            ObserveMode::Noisy => Observe::Noisy {
                quantizer: z
                    .quantizer
                    .as_ref()
                    .map(|q| rational(q, "noise.quantizer"))
                    .transpose()?,
            },
        };
        let built = bayes::build_uncertain_price(&base, &spec, &times, &observe)?;
        (built.model.clone(), Some(built))
    } else {
        let mut named: Vec<(String, Filtration)> = vec![("default".into(), big.clone())];
        for (i, f) in file.trading_filtrations.iter().enumerate() {
            let path = format!("trading_filtrations[{i}]");
            if named.iter().any(|(n, _)| *n == f.name) {
                return Err(field(path, format!("duplicate filtration `{}`", f.name)));
            }
            let filt = match (&f.partitions, &f.delay) {
                (Some(ps), None) => filtration(ps, &space, &grid, &format!("{path}.partitions"))?,
                (None, Some(d)) => {
                    delayed_filtration(&big, &rational(d, &format!("{path}.delay"))?).map_err(|e| field(&path, e))?
                }
                _ => return Err(field(path, "give exactly one of `partitions` and `delay`")),
            };
            named.push((f.name.clone(), filt));
        }
        let mut admissible = Vec::new();
        for (i, s) in file.admissible_sets.iter().enumerate() {
            let path = format!("admissible_sets[{i}]");
            let mut set = BTreeSet::new();
            for a in &s.assets {
                let k = assets
                    .iter()
                    .position(|x| x == a)
                    .ok_or_else(|| field(&path, format!("unknown asset `{a}`")))?;
                set.insert(k);
            }
            let filt = named
                .iter()
                .find(|(n, _)| *n == s.filtration)
                .map(|(_, f)| f.clone())
                .ok_or_else(|| field(&path, format!("unknown filtration `{}`", s.filtration)))?;
            admissible.push(AdmissibleSet {
                assets: set,
                filtration: filt,
            });
        }
        let mut m = base.clone();
        if !admissible.is_empty() {
            m.admissible = admissible;
        }
        (m, None)
    };
    if let Some(b) = &built {
        warnings.extend(b.warnings.iter().cloned());
        if !b.pruned.is_empty() {
            warnings.push(format!("pruned {} zero-mass outcomes", b.pruned.len()));
        }
    }

    let lift = |rv: RandomVariable| -> RandomVariable {
        match &built {
            Some(b) => RandomVariable::new(b.path_of.iter().map(|&p| rv[p].clone()).collect()),
            None => rv,
        }
    };
    let per_theta = |xs: &[Num], path: &str| -> Result<RandomVariable, ScenarioError> {
        let b = built
            .as_ref()
            .filter(|b| b.theta_of.is_some())
            .ok_or_else(|| field(path, "`per_theta` needs a bayes section with the product construction"))?;
        let xs = rationals(xs, path)?;
        if xs.len() != bayes_setup.as_ref().map_or(0, |s| s.thetas.len()) {
            return Err(field(path, "one value per parameter required"));
        }
        Ok(bayes::theta_payoff(b, &xs)?)
    };

    let mut claims: Vec<(String, RandomVariable)> = Vec::new();
    for (i, c) in file.claims.iter().enumerate() {
        let path = format!("claims[{i}]");
        if claims.iter().any(|(n, _)| *n == c.name) {
            return Err(field(path, format!("duplicate claim `{}`", c.name)));
        }
        let rv = match (&c.values, &c.per_theta, &c.vanilla) {
            (Some(v), None, None) => lift(values(v, n, &format!("{path}.values"))?),
            (None, Some(xs), None) => per_theta(xs, &format!("{path}.per_theta"))?,
            (None, None, Some(v)) => {
                let i = model
                    .assets
                    .iter()
                    .position(|a| *a == v.asset)
                    .ok_or_else(|| field(&path, format!("unknown asset `{}`", v.asset)))?;
                let k = rational(&v.strike, &format!("{path}.vanilla.strike"))?;
                model.terminal_prices(i).map(|s| match v.kind {
                    VanillaKind::Call => num::positive_part(&(s - &k)),
                    VanillaKind::Put => num::positive_part(&(&k - s)),
                })
            }
            _ => return Err(field(path, "give exactly one of `values`, `per_theta` and `vanilla`")),
        };
        claims.push((c.name.clone(), rv));
    }

    let mut options = Vec::new();
    let mut pre_embedding = None;
    if !file.options.is_empty() {
        let m = model.outcome_count();
        for (i, o) in file.options.iter().enumerate() {
            let path = format!("options[{i}]");
            let payoff = match (&o.payoff, &o.payoff_claim, &o.per_theta) {
                (Some(v), None, None) => lift(values(v, n, &format!("{path}.payoff"))?),
                (None, Some(c), None) => claims
                    .iter()
                    .find(|(n, _)| n == c)
                    .map(|(_, rv)| rv.clone())
                    .ok_or_else(|| field(&path, format!("unknown claim `{c}`")))?,
                (None, None, Some(xs)) => per_theta(xs, &format!("{path}.per_theta"))?,
                _ => {
                    return Err(field(
                        path,
                        "give exactly one of `payoff`, `payoff_claim` and `per_theta`",
                    ))
                }
            };
            let trading_times = time_list(&o.trading_times, &grid, &format!("{path}.trading_times"))?;
            if o.prices.len() != trading_times.len() {
                return Err(field(&path, "one price entry per trading time required"));
            }
            // Quotes are given over the document's outcomes, or as constants.
            let prices = o
                .prices
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let p = format!("{path}.prices[{k}]");
                    match v {
                        Values::Constant(c) => Ok(RandomVariable::constant(m, rational(c, &p)?)),
                        list => Ok(lift(values(list, n, &p)?)),
                    }
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            options.push(OptionGridSpec {
                name: o.name.clone(),
                payoff,
                trading_times,
                prices,
            });
        }
        let embedded = bayes::embed_semistatic(&model, &options)?;
        pre_embedding = Some(std::mem::replace(&mut model, embedded));
    }

    Ok(Scenario {
        name: file.name.clone(),
        description: file.description.clone(),
        model,
        claims,
        bayes: bayes_setup,
        built,
        options,
        pre_embedding,
        warnings,
    })
}

fn partition_spec(space: &FiniteSpace, p: &Partition) -> PartitionSpec {
    if p.is_trivial() {
        return PartitionSpec::Named("trivial".into());
    }
    if p.len() == p.outcome_count() {
        return PartitionSpec::Named("discrete".into());
    }
    PartitionSpec::Blocks(bayes::block_labels(space, p))
}

fn filtration_spec(space: &FiniteSpace, grid: &[Rational], f: &Filtration) -> Vec<PartitionSpec> {
    grid.iter().map(|t| partition_spec(space, f.at(t))).collect()
}

fn values_spec(rv: &RandomVariable) -> Values {
    match rv.values().split_first() {
        Some((first, rest)) if rest.iter().all(|x| x == first) => Values::Constant(Num::of(first)),
        _ => Values::List(rv.values().iter().map(Num::of).collect()),
    }
}

/// Flat document (no builder sections) describing `model` and `claims`.
pub fn to_scenario_file(model: &MarketModel, claims: &[(String, RandomVariable)]) -> ScenarioFile {
    let space = &model.space;
    let mut filtrations: Vec<FiltrationSection> = Vec::new();
    let mut sets = Vec::new();
    for a in &model.admissible {
        let spec = filtration_spec(space, &model.grid, &a.filtration);
        let name = if a.filtration == model.big_filtration {
            "default".to_string()
        } else if let Some(f) = filtrations.iter().find(|f| f.partitions.as_ref() == Some(&spec)) {
            f.name.clone()
        } else {
            let name = format!("F{}", filtrations.len() + 1);
            filtrations.push(FiltrationSection {
                name: name.clone(),
                partitions: Some(spec),
                delay: None,
            });
            name
        };
        sets.push(SetSection {
            assets: a.assets.iter().map(|&i| model.assets[i].clone()).collect(),
            filtration: name,
        });
    }
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: None,
        description: None,
        space: SpaceSection {
            outcomes: space.labels().to_vec(),
            probs: Some(space.probs().iter().map(Num::of).collect()),
        },
        grid: model.grid.iter().map(Num::of).collect(),
        big_filtration: filtration_spec(space, &model.grid, &model.big_filtration),
        assets: model
            .assets
            .iter()
            .zip(&model.prices)
            .map(|(name, path)| AssetSection {
                name: name.clone(),
                values: path.iter().map(values_spec).collect(),
            })
            .collect(),
        trading_filtrations: filtrations,
        admissible_sets: sets,
        bayes: None,
        noise: None,
        options: Vec::new(),
        claims: claims
            .iter()
            .map(|(name, rv)| ClaimSection {
                name: name.clone(),
                values: Some(values_spec(rv)),
                per_theta: None,
                vanilla: None,
            })
            .collect(),
    }
}

pub fn to_json(file: &ScenarioFile) -> String {
    serde_json::to_string_pretty(file).expect("scenario documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::num::{int, ratio};

    const BINOMIAL: &str = r#"{
        "schema_version": 1,
        "space": {"outcomes": ["up", "down"], "probs": ["1/2", 0.5]},
        "grid": ["0", "1"],
        "big_filtration": ["trivial", "discrete"],
        "assets": [{"name": "S", "values": [1, ["2", "1/2"]]}],
        "claims": [{"name": "call", "values": ["1", "0"]}]
    }"#;

    #[test]
    fn parses_binomial() {
        let s = parse_scenario(BINOMIAL).unwrap();
        assert_eq!(s.model, canonical::one_period_binomial());
        assert_eq!(s.claim("call").unwrap(), &RandomVariable::from_ints(&[1, 0]));
    }

    #[test]
    fn round_trips_canonical_models() {
        for m in [
            canonical::one_period_binomial(),
            canonical::two_period_binomial(),
            canonical::delayed_binomial(),
            canonical::two_asset(),
            canonical::momentum(true),
        ] {
            let claims = vec![("x".to_string(), m.terminal_prices(0).clone())];
            let text = to_json(&to_scenario_file(&m, &claims));
            let back = parse_scenario(&text).unwrap();
            assert_eq!(back.model, m);
            assert_eq!(back.claims, claims);
        }
    }

    #[test]
    fn json_errors_carry_a_location() {
        match parse_scenario("{\n  \"schema_version\": 1,\n  oops").unwrap_err() {
            ScenarioError::Json { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn field_errors_carry_a_path() {
        let bad = BINOMIAL.replace(r#"["2", "1/2"]"#, r#"["2", "x"]"#);
        match parse_scenario(&bad).unwrap_err() {
            ScenarioError::Field { path, .. } => assert_eq!(path, "assets[0].values[1][1]"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let bad = BINOMIAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert_eq!(parse_scenario(&bad).unwrap_err(), ScenarioError::Version(2));
    }

    #[test]
    fn delayed_filtration_by_name() {
        let text = r#"{
            "schema_version": 1,
            "space": {"outcomes": ["uu", "ud", "du", "dd"]},
            "grid": ["0", "1/2", "1"],
            "big_filtration": ["trivial", [["uu", "ud"], ["du", "dd"]], "discrete"],
            "assets": [{"name": "S", "values": [4, [6, 6, 2, 2], [9, 3, 3, 1]]}],
            "trading_filtrations": [{"name": "lag", "delay": "1/2"}],
            "admissible_sets": [{"assets": ["S"], "filtration": "lag"}]
        }"#;
        assert_eq!(parse_scenario(text).unwrap().model, canonical::delayed_binomial());
    }

    #[test]
    fn bayes_section_builds_product_market() {
        let (_, paths) = canonical::two_regime();
        let mut file = to_scenario_file(&canonical::two_period_binomial(), &[]);
        file.admissible_sets.clear();
        let q = |p: Rational| {
            let r = int(1) - &p;
            [&p * &p, &p * &r, &r * &p, &r * &r].iter().map(Num::of).collect()
        };
        file.bayes = Some(BayesSection {
            thetas: vec!["lo".into(), "hi".into()],
            prior: vec![Num::Text("1/2".into()), Num::Text("1/2".into())],
            likelihoods: vec![q(ratio(1, 4)), q(ratio(3, 4))],
            construction: Construction::Product,
            observation: None,
        });
        file.claims = vec![ClaimSection {
            name: "swap".into(),
            values: None,
            per_theta: Some(vec![Num::Text("0".into()), Num::Text("1".into())]),
            vanilla: None,
        }];
        let s = parse_scenario(&to_json(&file)).unwrap();
        assert_eq!(s.model.outcome_count(), 2 * paths.paths.len());
        assert!(s.bayes.is_some());
        assert_eq!(
            s.claim("swap")
                .unwrap()
                .values()
                .iter()
                .filter(|x| **x == int(1))
                .count(),
            4
        );
    }

    #[test]
    fn noise_section_builds() {
        let text = BINOMIAL.replace(
            "\"claims\"",
            r#""noise": {"values": ["1/4", "-1/4"], "probs": ["1/2", "1/2"], "observe": "base"}, "claims""#,
        );
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.model.outcome_count(), 4);
        assert_eq!(s.claim("call").unwrap(), &RandomVariable::from_ints(&[1, 1, 0, 0]));
        let text = text.replace(
            r#"{"name": "call", "values": ["1", "0"]}"#,
            r#"{"name": "call", "vanilla": {"type": "call", "asset": "S", "strike": 1}}"#,
        );
        let s = parse_scenario(&text).unwrap();
        let expected = [ratio(5, 4), ratio(3, 4), int(0), int(0)];
        assert_eq!(s.claim("call").unwrap().values(), &expected);
    }

    #[test]
    fn unknown_outcome_reported() {
        let bad = BINOMIAL.replace("\"discrete\"]", "[[\"up\"], [\"sideways\"]]]");
        assert!(matches!(parse_scenario(&bad).unwrap_err(), ScenarioError::Field { .. }));
    }
}
