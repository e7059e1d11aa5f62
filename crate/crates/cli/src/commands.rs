use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::Global;
use platonic::bayes::{block_counts, block_labels, free_lunch_truncation, posterior, BayesError, MAX_FREE_LUNCH_N};
use platonic::ftap::{find_measure, ftap_verdict, project_prices, FtapError, MeasureCertificate, MeasureKind, Verdict};
use platonic::hedging::{dual_polytope, price_interval, superreplicate, HedgeCertificate, HedgingError};
use platonic::lpsolve::{enumerate_vertices, MAX_VERTEX_DIMENSION};
use platonic::market::{enumerate_generators, Generator, MarketError, MarketModel, SignConstraint, Strategy};
use platonic::num::{self, format_rational, parse_rational, Arithmetic, Rational};
use platonic::probspace::{FiniteSpace, NullBlockPolicy, RandomVariable};
use platonic::random::{random_market, rng_from_seed, RandomMarketConfig};
use platonic::scenario::{parse_scenario, to_json, to_scenario_file, Scenario, ScenarioError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_INCONSISTENT: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

type Run = Result<Outcome, Failure>;

fn market_failure(e: &MarketError) -> Failure {
    match e {
        MarketError::Invalid(_) => Failure::new(EXIT_INVALID, e.to_string()),
        _ => Failure::new(EXIT_ERROR, e.to_string()),
    }
}

fn ftap_failure(e: FtapError) -> Failure {
    match &e {
        FtapError::Inconsistent { .. } => Failure::new(EXIT_INCONSISTENT, e.to_string()),
        FtapError::Market(m) => market_failure(m),
        _ => Failure::new(EXIT_ERROR, e.to_string()),
    }
}

fn hedging_failure(e: HedgingError) -> Failure {
    match e {
        HedgingError::Ftap(f) => ftap_failure(f),
        HedgingError::Inconsistent(_) => Failure::new(EXIT_INCONSISTENT, e.to_string()),
        other => Failure::new(EXIT_ERROR, other.to_string()),
    }
}

fn bayes_failure(e: BayesError) -> Failure {
    match &e {
        BayesError::Market(m) => market_failure(m),
        _ => Failure::new(EXIT_ERROR, e.to_string()),
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_ERROR, format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e: ScenarioError| {
        let code = if e.is_model_error() { EXIT_INVALID } else { EXIT_ERROR };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

fn require_valid(s: &Scenario) -> Result<(), Failure> {
    let v = s.model.validate();
    if v.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = v.iter().map(|x| format!("  {x}")).collect();
    Err(Failure::new(
        EXIT_INVALID,
        format!("invalid model:\n{}", lines.join("\n")),
    ))
}

fn claim<'a>(s: &'a Scenario, name: &str) -> Result<&'a RandomVariable, Failure> {
    s.claim(name).ok_or_else(|| {
        let known: Vec<&str> = s.claims.iter().map(|(n, _)| n.as_str()).collect();
        Failure::new(
            EXIT_ERROR,
            format!("unknown claim `{name}` (available: {})", known.join(", ")),
        )
    })
}

fn r(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn labelled(space: &FiniteSpace, values: &[Rational]) -> Value {
    let map: Map<String, Value> = space.labels().iter().cloned().zip(values.iter().map(r)).collect();
    Value::Object(map)
}

fn mode_of(long_only: bool) -> SignConstraint {
    if long_only {
        SignConstraint::LongOnly
    } else {
        SignConstraint::Free
    }
}

fn header(command: &str, scenario: Option<&Path>, arith: Option<Arithmetic>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    if let Some(p) = scenario {
        m.insert("scenario".into(), json!(p.display().to_string()));
    }
    if let Some(a) = arith {
        m.insert("mode".into(), json!(a.to_string()));
        if let Arithmetic::Float { tol } = a {
            m.insert("tolerance".into(), json!(tol));
        }
    }
    m
}

fn finish(mut m: Map<String, Value>, start: Instant, code: u8) -> Run {
    m.insert(
        "timing".into(),
        json!({"elapsed_ms": (start.elapsed().as_secs_f64() * 1e6).round() / 1e3}),
    );
    Ok(Outcome {
        report: Value::Object(m),
        code,
    })
}

fn generator_json(model: &MarketModel, g: &Generator, weight: &Rational) -> Value {
    json!({
        "asset": model.assets[g.asset],
        "from": r(&g.from),
        "to": r(&g.to),
        "block": g.block.iter().map(|&w| model.space.labels()[w].clone()).collect::<Vec<_>>(),
        "weight": r(weight),
    })
}

fn positions(model: &MarketModel, gens: &[Generator], lambda: &[Rational]) -> Value {
    Value::Array(
        gens.iter()
            .zip(lambda)
            .filter(|(_, l)| **l != Rational::from_integer(0.into()))
            .map(|(g, l)| generator_json(model, g, l))
            .collect(),
    )
}

fn strategy_json(model: &MarketModel, s: &Strategy) -> Value {
    let assets: Vec<usize> = model.admissible[s.asset_set].assets.iter().cloned().collect();
    Value::Array(
        s.legs
            .iter()
            .map(|leg| {
                let holdings: Map<String, Value> = assets
                    .iter()
                    .zip(&leg.holdings)
                    .map(|(&i, h)| (model.assets[i].clone(), labelled(&model.space, h.values())))
                    .collect();
                json!({"from": r(&leg.from), "to": r(&leg.to), "holdings": holdings})
            })
            .collect(),
    )
}

fn measure_json(space: &FiniteSpace, q: &MeasureCertificate) -> Value {
    json!({
        "type": q.kind.to_string(),
        "q": labelled(space, &q.q),
        "min_mass": r(&q.min_mass),
    })
}

pub fn validate(g: &Global, path: &Path) -> Run {
    let start = Instant::now();
    let s = load(path)?;
    let m = &s.model;
    let violations = m.validate();
    let mut rep = header("validate", Some(path), None);
    rep.insert("valid".into(), json!(violations.is_empty()));
    rep.insert("outcomes".into(), json!(m.outcome_count()));
    rep.insert("assets".into(), json!(m.assets));
    rep.insert("grid".into(), Value::Array(m.grid.iter().map(r).collect()));
    if violations.is_empty() {
        let sets: Vec<Value> = m
            .admissible
            .iter()
            .map(|a| {
                json!({
                    "assets": a.assets.iter().map(|&i| m.assets[i].clone()).collect::<Vec<_>>(),
                    "blocks": block_counts(&a.filtration, &m.grid),
                })
            })
            .collect();
        rep.insert("admissible_sets".into(), Value::Array(sets));
        rep.insert(
            "generators".into(),
            json!(enumerate_generators(m, SignConstraint::Free).len()),
        );
    }
    rep.insert(
        "claims".into(),
        json!(s.claims.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>()),
    );
    rep.insert("warnings".into(), json!(s.warnings));
    rep.insert(
        "violations".into(),
        Value::Array(
            violations
                .iter()
                .map(|v| {
                    let blocks: Vec<Vec<String>> = v
                        .blocks
                        .iter()
                        .map(|b| b.iter().map(|&w| m.space.labels()[w].clone()).collect())
                        .collect();
                    json!({"kind": v.kind.to_string(), "detail": v.detail, "blocks": blocks})
                })
                .collect(),
        ),
    );
    let _ = g;
    let code = if violations.is_empty() { EXIT_OK } else { EXIT_INVALID };
    finish(rep, start, code)
}

pub fn ftap(g: &Global, path: &Path, long_only: bool) -> Run {
    let start = Instant::now();
    let s = load(path)?;
    require_valid(&s)?;
    let m = &s.model;
    let arith = g.arithmetic(m.outcome_count());
    let mode = mode_of(long_only);
    let verdict = ftap_verdict(m, mode, arith).map_err(ftap_failure)?;
    let gens = enumerate_generators(m, mode);
    let mut rep = header("ftap", Some(path), Some(arith));
    rep.insert("trading".into(), json!(mode.to_string()));
    rep.insert("verdict".into(), json!(verdict.label()));
    rep.insert("generators".into(), json!(gens.len()));
    match &verdict {
        Verdict::Arbitrage(c) => {
            rep.insert(
                "certificate".into(),
                json!({
                    "type": "arbitrage",
                    "terminal_gain": labelled(&m.space, c.terminal_gain.values()),
                    "consumption": labelled(&m.space, c.consumption.values()),
                    "positions": positions(m, &gens, &c.lambda),
                    "strategy": strategy_json(m, &c.strategy),
                }),
            );
            rep.insert("residuals".into(), json!({"verified": c.verify(&gens)}));
        }
        Verdict::NoArbitrage(q) => {
            let mut cert = measure_json(&m.space, q);
            cert["generator_expectations"] = Value::Array(q.generator_expectations.iter().map(r).collect());
            rep.insert("certificate".into(), cert);
            rep.insert("residuals".into(), json!({"max_violation": r(&q.residual())}));
        }
    }
    rep.insert("warnings".into(), json!(s.warnings));
    finish(rep, start, EXIT_OK)
}

fn measure_from_report(path: &str, space: &FiniteSpace) -> Result<(Vec<Rational>, MeasureKind), Failure> {
    let bad = |msg: &str| Failure::new(EXIT_ERROR, format!("{path}: {msg}"));
    let text = std::fs::read_to_string(path).map_err(|e| bad(&e.to_string()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
    let cert = &v["certificate"];
    let kind = match cert["type"].as_str() {
        Some("martingale") => MeasureKind::Martingale,
        Some("supermartingale") => MeasureKind::Supermartingale,
        _ => return Err(bad("report carries no measure certificate")),
    };
    let q = cert["q"].as_object().ok_or_else(|| bad("certificate.q missing"))?;
    let values = space
        .labels()
        .iter()
        .map(|l| {
            let x = q
                .get(l)
                .and_then(Value::as_str)
                .ok_or_else(|| bad(&format!("no weight for `{l}`")))?;
            parse_rational(x).map_err(|e| bad(&e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((values, kind))
}

pub fn project(g: &Global, path: &Path, set: &str, measure: &str, long_only: bool) -> Run {
    let start = Instant::now();
    let s = load(path)?;
    require_valid(&s)?;
    let m = &s.model;
    let arith = g.arithmetic(m.outcome_count());
    let names: Vec<&str> = set.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
    let idx = m.set_index_by_names(&names).map_err(|e| market_failure(&e))?;
    let kind = MeasureKind::for_mode(mode_of(long_only));
    let cert = if measure == "search" {
        find_measure(m, kind, arith)
            .map_err(ftap_failure)?
            .ok_or_else(|| Failure::new(EXIT_ERROR, "no full-support measure: the market admits arbitrage"))?
    } else {
        let (q, kind) = measure_from_report(measure, &m.space)?;
        let gens = enumerate_generators(m, mode_of(kind == MeasureKind::Supermartingale));
        MeasureCertificate::new(q, kind, &gens)
    };
    let p = m.space.probs().to_vec();
    let projected = project_prices(m, &cert, idx, NullBlockPolicy::Reference(&p)).map_err(ftap_failure)?;
    let assets: Vec<usize> = m.admissible[idx].assets.iter().cloned().collect();
    let paths: Map<String, Value> = assets
        .iter()
        .zip(&projected)
        .map(|(&i, path)| {
            let times: Vec<Value> = m
                .grid
                .iter()
                .zip(path)
                .map(|(t, x)| json!({"t": r(t), "values": labelled(&m.space, x.values())}))
                .collect();
            (m.assets[i].clone(), Value::Array(times))
        })
        .collect();
    let mut rep = header("project", Some(path), Some(arith));
    rep.insert("set".into(), json!(names));
    rep.insert("measure".into(), measure_json(&m.space, &cert));
    rep.insert("projected".into(), Value::Object(paths));
    rep.insert(
        "residuals".into(),
        json!({"measure_violation": r(&cert.residual()), "projection_check": "passed"}),
    );
    finish(rep, start, EXIT_OK)
}

fn hedge_json(m: &MarketModel, gens: &[Generator], h: &HedgeCertificate) -> Value {
    json!({
        "price": r(&h.price),
        "positions": positions(m, gens, &h.lambda),
        "strategy": strategy_json(m, &h.strategy),
        "consumption": labelled(&m.space, h.consumption.values()),
    })
}

pub fn superhedge(g: &Global, path: &Path, name: &str, long_only: bool) -> Run {
    let start = Instant::now();
    let s = load(path)?;
    require_valid(&s)?;
    let m = &s.model;
    let f = claim(&s, name)?;
    let arith = g.arithmetic(m.outcome_count());
    let mode = mode_of(long_only);
    let sh = superreplicate(m, f, mode, arith).map_err(hedging_failure)?;
    let gens = enumerate_generators(m, mode);
    let mut rep = header("superhedge", Some(path), Some(arith));
    rep.insert("trading".into(), json!(mode.to_string()));
    rep.insert("claim".into(), json!(name));
    rep.insert("price".into(), r(&sh.hedge.price));
    rep.insert("hedge".into(), hedge_json(m, &gens, &sh.hedge));
    let mut dual = measure_json(&m.space, &sh.dual);
    dual["value"] = r(&sh.dual_value);
    rep.insert("dual".into(), dual);
    rep.insert(
        "residuals".into(),
        json!({
            "duality_gap": r(&sh.duality_gap),
            "shortfall": r(&sh.hedge.shortfall()),
            "slackness": r(&sh.hedge.slackness(&sh.dual.q)),
        }),
    );
    finish(rep, start, EXIT_OK)
}

pub fn interval(g: &Global, path: &Path, name: &str, eta: &str) -> Run {
    let start = Instant::now();
    let s = load(path)?;
    require_valid(&s)?;
    let m = &s.model;
    let f = claim(&s, name)?;
    let eta = parse_rational(eta).map_err(|e| Failure::new(EXIT_ERROR, format!("--eta: {e}")))?;
    let arith = g.arithmetic(m.outcome_count());
    let iv = price_interval(m, f, &eta, arith).map_err(hedging_failure)?;
    let gens = enumerate_generators(m, SignConstraint::Free);
    let mut rep = header("interval", Some(path), Some(arith));
    rep.insert("claim".into(), json!(name));
    rep.insert(
        "interval".into(),
        json!({
            "lower": r(&iv.lower),
            "upper": r(&iv.upper),
            "lower_attained": iv.lower_attained,
            "upper_attained": iv.upper_attained,
            "width": r(&iv.width()),
            "attainable": iv.is_attainable(),
        }),
    );
    rep.insert(
        "replication".into(),
        iv.replication.as_ref().map_or(
            Value::Null,
            |x| json!({"price": r(&x.price), "positions": positions(m, &gens, &x.lambda)}),
        ),
    );
    rep.insert(
        "witness".into(),
        iv.witness.as_ref().map_or(Value::Null, |w| {
            json!({
                "q": labelled(&m.space, &w.mixed),
                "value": r(&w.mixed_value),
                "mixing_weight": r(&w.weight),
                "eta": r(&w.eta),
                "distance_to_upper": r(&(&iv.upper - &w.mixed_value)),
            })
        }),
    );
    finish(rep, start, EXIT_OK)
}

pub fn check_duality(g: &Global, path: &Path, names: &[String], long_only: bool) -> Run {
    let start = Instant::now();
    let s = load(path)?;
    require_valid(&s)?;
    let m = &s.model;
    let arith = g.arithmetic(m.outcome_count());
    let mode = mode_of(long_only);
    let selected: Vec<(String, RandomVariable)> = if names.is_empty() {
        s.claims.clone()
    } else {
        names
            .iter()
            .map(|n| claim(&s, n).map(|c| (n.clone(), c.clone())))
            .collect::<Result<_, _>>()?
    };
    if selected.is_empty() {
        return Err(Failure::new(EXIT_ERROR, "scenario defines no claims"));
    }
    let poly = dual_polytope(m, mode);
    let vertices = if poly.num_vars() <= MAX_VERTEX_DIMENSION {
        Some(enumerate_vertices(&poly).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?)
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut all_agree = true;
    for (name, f) in &selected {
        let sh = superreplicate(m, f, mode, arith).map_err(hedging_failure)?;
        let limit = arith.tolerance() * (Rational::from_integer(1.into()) + num::max_abs(f.values()));
        let vertex_max = vertices.as_ref().and_then(|vs| vs.iter().map(|q| f.integrate(q)).max());
        let close = |a: &Rational, b: &Rational| {
            let d = a - b;
            (if d < Rational::from_integer(0.into()) { -d } else { d }) <= limit
        };
        let agree =
            close(&sh.hedge.price, &sh.dual_value) && vertex_max.as_ref().is_none_or(|v| close(v, &sh.hedge.price));
        all_agree &= agree;
        rows.push(json!({
            "claim": name,
            "primal": r(&sh.hedge.price),
            "dual": r(&sh.dual_value),
            "gap": r(&sh.duality_gap),
            "vertex_max": vertex_max.as_ref().map_or(Value::Null, r),
            "agree": agree,
        }));
    }
    let mut rep = header("check-duality", Some(path), Some(arith));
    rep.insert("trading".into(), json!(mode.to_string()));
    rep.insert(
        "vertices".into(),
        vertices.as_ref().map_or(Value::Null, |v| json!(v.len())),
    );
    rep.insert("claims".into(), Value::Array(rows));
    rep.insert("all_agree".into(), json!(all_agree));
    finish(rep, start, if all_agree { EXIT_OK } else { EXIT_INCONSISTENT })
}

pub fn bayes_build(g: &Global, path: &Path, out: &Path) -> Run {
    let start = Instant::now();
    let s = load(path)?;
    let built = s
        .built
        .as_ref()
        .ok_or_else(|| Failure::new(EXIT_ERROR, "scenario has no `bayes` or `noise` section to build"))?;
    require_valid(&s)?;
    let m = &s.model;
    let mut file = to_scenario_file(m, &s.claims);
    file.name = Some(format!("{}-built", s.name.clone().unwrap_or_else(|| "scenario".into())));
    file.description = s.description.clone();
    std::fs::write(out, to_json(&file))
        .map_err(|e| Failure::new(EXIT_ERROR, format!("cannot write {}: {e}", out.display())))?;

    let obs = built.observation_filtration();
    let mut rep = header("bayes build", Some(path), None);
    rep.insert("out".into(), json!(out.display().to_string()));
    rep.insert("outcomes".into(), json!(m.outcome_count()));
    rep.insert("pruned".into(), json!(built.pruned));
    rep.insert("observation_blocks".into(), json!(block_counts(obs, &m.grid)));
    if let Some(setup) = &s.bayes {
        if built.theta_of.is_some() {
            let mut times = Vec::new();
            for t in &m.grid {
                let blocks = posterior(setup, built, t).map_err(bayes_failure)?;
                let part = obs.at(t);
                let labels = block_labels(&m.space, part);
                let rows: Vec<Value> = blocks
                    .iter()
                    .zip(labels)
                    .map(|(b, l)| {
                        let w: Map<String, Value> = setup.thetas.iter().cloned().zip(b.weights.iter().map(r)).collect();
                        json!({"outcomes": l, "posterior": w})
                    })
                    .collect();
                times.push(json!({"t": r(t), "blocks": rows}));
            }
            rep.insert("posterior".into(), Value::Array(times));
        }
    }
    rep.insert("warnings".into(), json!(s.warnings));
    let _ = g;
    finish(rep, start, EXIT_OK)
}

pub fn free_lunch(g: &Global, max_n: usize, scenario_out: Option<&Path>) -> Run {
    let start = Instant::now();
    if max_n == 0 || max_n > MAX_FREE_LUNCH_N {
        return Err(Failure::new(
            EXIT_ERROR,
            format!("--max-n must be between 1 and {MAX_FREE_LUNCH_N}"),
        ));
    }
    let mut rows = Vec::new();
    let mut gaps: Vec<Rational> = Vec::new();
    let mut arith_used = None;
    let mut last = None;
    for n in 1..=max_n {
        let (m, d) = free_lunch_truncation(n).map_err(bayes_failure)?;
        let arith = g.arithmetic(m.outcome_count());
        arith_used.get_or_insert(arith);
        let verdict = ftap_verdict(&m, SignConstraint::Free, arith).map_err(ftap_failure)?;
        let min_mass = match &verdict {
            Verdict::NoArbitrage(q) => format!("{:.3e}", num::to_f64(&q.min_mass)),
            Verdict::Arbitrage(_) => "-".into(),
        };
        rows.push(json!({
            "n": n,
            "verdict": verdict.label(),
            "d_n": r(&d.gap),
            "d_n_approx": format!("{:.6e}", num::to_f64(&d.gap)),
            "p_g_at_least_1": r(&d.prob_at_least_one),
            "min_g": r(&d.min_gain),
            "min_mass": min_mass,
        }));
        gaps.push(d.gap);
        last = Some(m);
    }
    if let (Some(path), Some(m)) = (scenario_out, &last) {
        let mut g_n = RandomVariable::zeros(m.outcome_count());
        for i in 0..m.assets.len() {
            g_n = g_n.add(m.terminal_prices(i));
        }
        let mut file = to_scenario_file(m, &[("g_n".to_string(), g_n)]);
        file.name = Some("free-lunch".into());
        file.description = Some(format!(
            "Truncation n = {max_n}: {max_n} zero-priced claims whose sum is at least -1 and at least 1 off an event of probability 2^-{max_n}."
        ));
        std::fs::write(path, to_json(&file))
            .map_err(|e| Failure::new(EXIT_ERROR, format!("cannot write {}: {e}", path.display())))?;
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let mut rep = header("experiment free-lunch", None, arith_used);
    rep.insert("max_n".into(), json!(max_n));
    rep.insert("rows".into(), Value::Array(rows));
    rep.insert("strictly_decreasing".into(), json!(decreasing));
    finish(rep, start, EXIT_OK)
}

pub fn ftap_suite(g: &Global, count: usize) -> Run {
    let start = Instant::now();
    let mut rng = rng_from_seed(g.seed);
    let cfg = RandomMarketConfig::default();
    let mut tally = Map::new();
    let mut inconsistencies = Vec::new();
    let mut arith_used = None;
    for i in 0..count {
        let m = random_market(&mut rng, &cfg);
        let arith = g.arithmetic(m.outcome_count());
        arith_used.get_or_insert(arith);
        for mode in [SignConstraint::Free, SignConstraint::LongOnly] {
            let label = match ftap_verdict(&m, mode, arith) {
                Ok(v) => v.label().to_string(),
                Err(e @ FtapError::Inconsistent { .. }) => {
                    inconsistencies.push(json!({"instance": i, "trading": mode.to_string(), "error": e.to_string()}));
                    "INCONSISTENT".to_string()
                }
                Err(e) => return Err(ftap_failure(e)),
            };
            let entry = tally
                .entry(mode.to_string())
                .or_insert_with(|| Value::Object(Map::new()));
            let slot = &mut entry[label.as_str()];
            *slot = json!(slot.as_u64().unwrap_or(0) + 1);
        }
    }
    let mut rep = header("experiment ftap-suite", None, arith_used);
    rep.insert("seed".into(), json!(g.seed));
    rep.insert("count".into(), json!(count));
    rep.insert("verdicts".into(), Value::Object(tally));
    let code = if inconsistencies.is_empty() {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    };
    rep.insert("inconsistencies".into(), Value::Array(inconsistencies));
    finish(rep, start, code)
}
