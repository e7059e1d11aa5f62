//! Arbitrage search over the super-replicable cone and the dual search for a
//! full-support measure under which every elementary bet has zero (or
//! non-positive) expectation.
//!
//! Both programs work on outcome classes: outcomes whose generator rows agree
//! are merged, which shrinks the programs without changing their optima, and
//! the certificates are expanded back to the full space before verification.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lpsolve::{self, Bound, LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense};
use crate::market::{enumerate_generators, Generator, MarketError, MarketModel, SignConstraint, Strategy};
use crate::num::{self, Arithmetic, Rational};
use crate::probspace::{conditional_expectation, NullBlockPolicy, ProbError, RandomVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Martingale,
    Supermartingale,
}

impl MeasureKind {
    /// The dual kind matching a trading mode.
    pub fn for_mode(mode: SignConstraint) -> Self {
        match mode {
            SignConstraint::Free => MeasureKind::Martingale,
            SignConstraint::LongOnly => MeasureKind::Supermartingale,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::Martingale => write!(f, "martingale"),
            MeasureKind::Supermartingale => write!(f, "supermartingale"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCertificate {
    pub q: Vec<Rational>,
    pub kind: MeasureKind,
    pub min_mass: Rational,
    /// `E_Q[g]` for every generator, in enumeration order.
    pub generator_expectations: Vec<Rational>,
}

impl MeasureCertificate {
    pub fn new(q: Vec<Rational>, kind: MeasureKind, generators: &[Generator]) -> Self {
        let min_mass = q.iter().min().cloned().unwrap_or_else(Rational::zero);
        let generator_expectations = generators.iter().map(|g| g.payoff.integrate(&q)).collect();
        MeasureCertificate {
            q,
            kind,
            min_mass,
            generator_expectations,
        }
    }

    pub fn is_full_support(&self) -> bool {
        self.min_mass.is_positive()
    }

    /// Largest violation of `Σq = 1`, `q ≥ 0` and the generator conditions.
    pub fn residual(&self) -> Rational {
        let mut worst = (num::sum(&self.q) - Rational::one()).abs();
        for x in &self.q {
            worst = worst.max(num::positive_part(&-x));
        }
        for e in &self.generator_expectations {
            let v = match self.kind {
                MeasureKind::Martingale => e.abs(),
                MeasureKind::Supermartingale => num::positive_part(e),
            };
            worst = worst.max(v);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageCertificate {
    pub strategy: Strategy,
    pub lambda: Vec<Rational>,
    pub terminal_gain: RandomVariable,
    pub consumption: RandomVariable,
}

impl ArbitrageCertificate {
    /// Checks `f = Gλ − h`, `f ≥ 0`, `h ≥ 0`, `Σf > 0` exactly.
    pub fn verify(&self, generators: &[Generator]) -> bool {
        let n = self.terminal_gain.len();
        let gl = combination(n, generators, &self.lambda);
        let f = &self.terminal_gain;
        let h = &self.consumption;
        gl.sub(h) == *f
            && f.values().iter().all(|x| !x.is_negative())
            && h.values().iter().all(|x| !x.is_negative())
            && num::sum(f.values()).is_positive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Arbitrage(ArbitrageCertificate),
    NoArbitrage(MeasureCertificate),
}

impl Verdict {
    pub fn is_arbitrage(&self) -> bool {
        matches!(self, Verdict::Arbitrage(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Arbitrage(_) => "ARBITRAGE",
            Verdict::NoArbitrage(_) => "NO_ARBITRAGE",
        }
    }
}

/// Raw output of one of the two programs, kept for diagnosis.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLp {
    pub program: LinearProgram,
    pub solution: LpSolution,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FtapError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(
        "arbitrage and measure searches disagree (arbitrage found: {arbitrage}, full-support measure found: {measure})"
    )]
    Inconsistent {
        arbitrage: bool,
        measure: bool,
        arbitrage_lp: Box<RawLp>,
        measure_lp: Box<RawLp>,
    },
    #[error("measure found with minimum mass {0} below the float tolerance; rerun in exact mode")]
    Boundary(String),
    #[error("projected prices fail the {0} check")]
    ProjectionCheck(MeasureKind),
    #[error("certificate has {got} weights for {expected} outcomes")]
    CertificateShape { expected: usize, got: usize },
}

/// `Σ λ_g g`.
pub fn combination(n: usize, generators: &[Generator], lambda: &[Rational]) -> RandomVariable {
    let mut out = vec![Rational::zero(); n];
    for (g, l) in generators.iter().zip(lambda) {
        if l.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(g.payoff.values()) {
            if !x.is_zero() {
                *o += l * x;
            }
        }
    }
    RandomVariable::new(out)
}

/// Outcomes grouped by their rows in the generator matrix (and any extra
/// random variables), in order of first appearance.
#[derive(Debug, Clone)]
pub(crate) struct OutcomeClasses {
    pub class_of: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl OutcomeClasses {
    pub fn new(n: usize, generators: &[Generator], extra: &[&RandomVariable]) -> Self {
        let mut index: BTreeMap<Vec<&Rational>, usize> = BTreeMap::new();
        let mut class_of = Vec::with_capacity(n);
        let mut members: Vec<Vec<usize>> = Vec::new();
        for w in 0..n {
            let key: Vec<&Rational> = generators
                .iter()
                .map(|g| &g.payoff[w])
                .chain(extra.iter().map(|x| &x[w]))
                .collect();
            let next = members.len();
            let c = *index.entry(key).or_insert(next);
            if c == next {
                members.push(Vec::new());
            }
            members[c].push(w);
            class_of.push(c);
        }
        OutcomeClasses { class_of, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn size(&self, c: usize) -> Rational {
        num::int(self.members[c].len() as i64)
    }

    /// Value of `x` on class `c` (constant on the class by construction).
    pub fn value(&self, x: &RandomVariable, c: usize) -> Rational {
        x[self.members[c][0]].clone()
    }

    /// Spreads class masses uniformly over the members.
    pub fn spread(&self, mass: &[Rational]) -> Vec<Rational> {
        self.class_of.iter().map(|&c| &mass[c] / self.size(c)).collect()
    }
}

fn arbitrage_lp(gens: &[Generator], classes: &OutcomeClasses, mode: SignConstraint) -> LinearProgram {
    let k = gens.len();
    let m = classes.len();
    // Variables: λ (k), then f per class (m).
    let mut objective = vec![Rational::zero(); k];
    objective.extend((0..m).map(|c| classes.size(c)));
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    if mode == SignConstraint::Free {
        for j in 0..k {
            lp.set_bound(j, Bound::free());
        }
    }
    for c in 0..m {
        lp.set_bound(k + c, Bound::between(Rational::zero(), Rational::one()));
        let mut row: Vec<Rational> = gens.iter().map(|g| -classes.value(&g.payoff, c)).collect();
        row.extend((0..m).map(|d| if d == c { Rational::one() } else { Rational::zero() }));
        lp.constrain(row, Relation::Le, Rational::zero());
    }
    lp
}

fn measure_lp(gens: &[Generator], classes: &OutcomeClasses, kind: MeasureKind) -> LinearProgram {
    let m = classes.len();
    // Variables: ε, then r per class; class mass is |c|·ε + r_c.
    let mut objective = vec![Rational::one()];
    objective.extend(std::iter::repeat_n(Rational::zero(), m));
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    let mut total = vec![num::int(classes.class_of.len() as i64)];
    total.extend(std::iter::repeat_n(Rational::one(), m));
    lp.constrain(total, Relation::Eq, Rational::one());
    let relation = match kind {
        MeasureKind::Martingale => Relation::Eq,
        MeasureKind::Supermartingale => Relation::Le,
    };
    for g in gens {
        let vals: Vec<Rational> = (0..m).map(|c| classes.value(&g.payoff, c)).collect();
        let eps_coeff = (0..m).fold(Rational::zero(), |acc, c| acc + &vals[c] * classes.size(c));
        let mut row = vec![eps_coeff];
        row.extend(vals);
        lp.constrain(row, relation, Rational::zero());
    }
    lp
}

struct ArbitrageSearch {
    cert: Option<ArbitrageCertificate>,
    raw: RawLp,
}

struct MeasureSearch {
    cert: Option<MeasureCertificate>,
    raw: RawLp,
}

fn search_arbitrage(
    model: &MarketModel,
    gens: &[Generator],
    mode: SignConstraint,
    arith: Arithmetic,
) -> Result<ArbitrageSearch, FtapError> {
    let n = model.outcome_count();
    let classes = OutcomeClasses::new(n, gens, &[]);
    let lp = arbitrage_lp(gens, &classes, mode);
    let sol = lpsolve::solve(&lp, arith)?;
    if sol.status != LpStatus::Optimal {
        // λ = 0, f = 0 is always feasible and f ≤ 1 bounds the objective.
        return Err(LpError::RetryExact(format!("arbitrage program reported {:?}", sol.status)).into());
    }
    let found = sol.objective > arith.tolerance();
    let cert = if found {
        let lambda: Vec<Rational> = sol.primal[..gens.len()].to_vec();
        // Rebuild f from λ so the identity f = Gλ − h holds exactly.
        let gl = combination(n, gens, &lambda);
        let f = gl.map(|x| num::positive_part(x).min(Rational::one()));
        if f.is_zero() {
            return Err(LpError::RetryExact("arbitrage witness vanished after rounding".into()).into());
        }
        let h = gl.sub(&f);
        Some(ArbitrageCertificate {
            strategy: Strategy::from_generators(model, gens, &lambda, mode),
            lambda,
            terminal_gain: f,
            consumption: h,
        })
    } else {
        None
    };
    Ok(ArbitrageSearch {
        cert,
        raw: RawLp {
            program: lp,
            solution: sol,
        },
    })
}

fn search_measure(
    model: &MarketModel,
    gens: &[Generator],
    kind: MeasureKind,
    arith: Arithmetic,
) -> Result<MeasureSearch, FtapError> {
    let n = model.outcome_count();
    let classes = OutcomeClasses::new(n, gens, &[]);
    let lp = measure_lp(gens, &classes, kind);
    let sol = lpsolve::solve(&lp, arith)?;
    let raw_cert = |sol: &LpSolution| {
        let eps = &sol.primal[0];
        let mass: Vec<Rational> = (0..classes.len())
            .map(|c| eps * classes.size(c) + &sol.primal[1 + c])
            .collect();
        MeasureCertificate::new(classes.spread(&mass), kind, gens)
    };
    let cert = match sol.status {
        LpStatus::Optimal if sol.objective.is_positive() => {
            let cert = raw_cert(&sol);
            if !arith.is_exact() && cert.min_mass <= arith.tolerance() {
                return Err(FtapError::Boundary(num::to_f64(&cert.min_mass).to_string()));
            }
            Some(cert)
        }
        _ => None,
    };
    Ok(MeasureSearch {
        cert,
        raw: RawLp {
            program: lp,
            solution: sol,
        },
    })
}

/// A non-negative, non-zero super-replicable claim, if one exists.
pub fn find_arbitrage(
    model: &MarketModel,
    mode: SignConstraint,
    arith: Arithmetic,
) -> Result<Option<ArbitrageCertificate>, FtapError> {
    model.ensure_valid()?;
    let gens = enumerate_generators(model, mode);
    Ok(search_arbitrage(model, &gens, mode, arith)?.cert)
}

/// A full-support measure making every generator a fair (or unfavourable)
/// bet, chosen to maximise the smallest outcome weight.
pub fn find_measure(
    model: &MarketModel,
    kind: MeasureKind,
    arith: Arithmetic,
) -> Result<Option<MeasureCertificate>, FtapError> {
    model.ensure_valid()?;
    let mode = match kind {
        MeasureKind::Martingale => SignConstraint::Free,
        MeasureKind::Supermartingale => SignConstraint::LongOnly,
    };
    let gens = enumerate_generators(model, mode);
    Ok(search_measure(model, &gens, kind, arith)?.cert)
}

/// Runs both searches and insists that exactly one succeeds.
pub fn ftap_verdict(model: &MarketModel, mode: SignConstraint, arith: Arithmetic) -> Result<Verdict, FtapError> {
    model.ensure_valid()?;
    let gens = enumerate_generators(model, mode);
    let arb = search_arbitrage(model, &gens, mode, arith)?;
    let meas = search_measure(model, &gens, MeasureKind::for_mode(mode), arith)?;
    match (arb.cert, meas.cert) {
        (Some(a), None) => Ok(Verdict::Arbitrage(a)),
        (None, Some(q)) => Ok(Verdict::NoArbitrage(q)),
        (a, q) => Err(FtapError::Inconsistent {
            arbitrage: a.is_some(),
            measure: q.is_some(),
            arbitrage_lp: Box::new(arb.raw),
            measure_lp: Box::new(meas.raw),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingDensity {
    /// `Z = dQ/dP`.
    pub z: RandomVariable,
    /// `E_P[Z g]` per generator; all zero.
    pub pairings: Vec<Rational>,
}

/// Strictly positive density annihilating the attainable cone, read off the
/// martingale-measure certificate.
pub fn find_separating_density(model: &MarketModel, arith: Arithmetic) -> Result<Option<SeparatingDensity>, FtapError> {
    let Some(cert) = find_measure(model, MeasureKind::Martingale, arith)? else {
        return Ok(None);
    };
    let p = model.space.probs();
    let z = RandomVariable::new(cert.q.iter().zip(p).map(|(q, p)| q / p).collect());
    let gens = enumerate_generators(model, SignConstraint::Free);
    let pairings = gens
        .iter()
        .map(|g| model.space.expectation(&z.mul(&g.payoff)))
        .collect();
    Ok(Some(SeparatingDensity { z, pairings }))
}

/// `E_Q[S^i_t | 𝔽^A_t]` for every asset of admissible set `set` (outer index,
/// ascending asset order) and grid time (inner index), checked to be a
/// (super)martingale on the trading filtration.
pub fn project_prices(
    model: &MarketModel,
    cert: &MeasureCertificate,
    set: usize,
    policy: NullBlockPolicy<'_>,
) -> Result<Vec<Vec<RandomVariable>>, FtapError> {
    model.ensure_valid()?;
    let n = model.outcome_count();
    if cert.q.len() != n {
        return Err(FtapError::CertificateShape {
            expected: n,
            got: cert.q.len(),
        });
    }
    let adm = model.admissible.get(set).ok_or_else(|| MarketError::Unknown {
        kind: "admissible set",
        name: format!("#{set}"),
    })?;
    let q = &cert.q;
    let mut out = Vec::new();
    for &i in &adm.assets {
        let mut path = Vec::new();
        for (k, t) in model.grid.iter().enumerate() {
            let part = adm.filtration.at(t);
            path.push(conditional_expectation(&model.prices[i][k], part, q, policy)?);
        }
        for (a, t) in model.grid.iter().enumerate() {
            let part = adm.filtration.at(t);
            for b in a + 1..model.grid.len() {
                let e = conditional_expectation(&path[b], part, q, policy)?;
                let ok = e
                    .values()
                    .iter()
                    .zip(path[a].values())
                    .all(|(later, now)| match cert.kind {
                        MeasureKind::Martingale => later == now,
                        MeasureKind::Supermartingale => later <= now,
                    });
                if !ok {
                    return Err(FtapError::ProjectionCheck(cert.kind));
                }
            }
        }
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical;
    use crate::num::{int, ratio};

    fn exact() -> Arithmetic {
        Arithmetic::Exact
    }

    #[test]
    fn deterministic_increase_is_arbitrage() {
        let m = canonical::deterministic_increase();
        let cert = find_arbitrage(&m, SignConstraint::Free, exact()).unwrap().unwrap();
        assert_eq!(cert.terminal_gain, RandomVariable::constant(4, int(1)));
        let gens = enumerate_generators(&m, SignConstraint::Free);
        assert!(cert.verify(&gens));
        assert!(ftap_verdict(&m, SignConstraint::Free, exact()).unwrap().is_arbitrage());
        assert!(find_measure(&m, MeasureKind::Martingale, exact()).unwrap().is_none());
    }

    #[test]
    fn one_period_binomial_measure() {
        let m = canonical::one_period_binomial();
        assert!(find_arbitrage(&m, SignConstraint::Free, exact()).unwrap().is_none());
        let q = find_measure(&m, MeasureKind::Martingale, exact()).unwrap().unwrap();
        assert_eq!(q.q, vec![ratio(1, 3), ratio(2, 3)]);
        assert!(q.residual().is_zero());
        match ftap_verdict(&m, SignConstraint::Free, exact()).unwrap() {
            Verdict::NoArbitrage(c) => assert_eq!(c.q, vec![ratio(1, 3), ratio(2, 3)]),
            v => panic!("{v:?}"),
        }
        let z = find_separating_density(&m, exact()).unwrap().unwrap();
        assert_eq!(z.z, RandomVariable::new(vec![ratio(2, 3), ratio(4, 3)]));
        assert!(z.pairings.iter().all(Zero::is_zero));
    }

    #[test]
    fn constant_prices_give_uniform_measure() {
        let m = canonical::constant_market(3);
        let q = find_measure(&m, MeasureKind::Martingale, exact()).unwrap().unwrap();
        assert_eq!(q.q, vec![ratio(1, 3); 3]);
        let z = find_separating_density(&m, exact()).unwrap().unwrap();
        assert_eq!(z.z, RandomVariable::constant(3, int(1)));
    }

    #[test]
    fn delay_destroys_arbitrage() {
        let full = canonical::momentum(false);
        let cert = find_arbitrage(&full, SignConstraint::Free, exact()).unwrap().unwrap();
        assert!(cert.verify(&enumerate_generators(&full, SignConstraint::Free)));
        let delayed = canonical::momentum(true);
        assert!(find_arbitrage(&delayed, SignConstraint::Free, exact())
            .unwrap()
            .is_none());
        assert!(!ftap_verdict(&delayed, SignConstraint::Free, exact())
            .unwrap()
            .is_arbitrage());
    }

    #[test]
    fn delayed_binomial_certificate_is_exact() {
        let m = canonical::delayed_binomial();
        let q = find_measure(&m, MeasureKind::Martingale, exact()).unwrap().unwrap();
        assert!(q.is_full_support());
        assert!(q.generator_expectations.iter().all(Zero::is_zero));
        let z = find_separating_density(&m, exact()).unwrap().unwrap();
        assert!(z.z.min_value().unwrap().is_positive());
    }

    #[test]
    fn projections() {
        let m = canonical::two_period_binomial();
        let q = find_measure(&m, MeasureKind::Martingale, exact()).unwrap().unwrap();
        let proj = project_prices(&m, &q, 0, NullBlockPolicy::Reject).unwrap();
        assert_eq!(proj[0], m.prices[0]);

        let blind = canonical::one_period_binomial_blind();
        let q = find_measure(&blind, MeasureKind::Martingale, exact()).unwrap().unwrap();
        let proj = project_prices(&blind, &q, 0, NullBlockPolicy::Reject).unwrap();
        for (k, x) in proj[0].iter().enumerate() {
            let mean = blind.prices[0][k].integrate(&q.q);
            assert_eq!(x, &RandomVariable::constant(2, mean));
        }

        let d = canonical::delayed_binomial();
        let q = find_measure(&d, MeasureKind::Martingale, exact()).unwrap().unwrap();
        let proj = project_prices(&d, &q, 0, NullBlockPolicy::Reject).unwrap();
        let means: Vec<Rational> = proj[0].iter().map(|x| x.integrate(&q.q)).collect();
        assert!(means.iter().all(|x| *x == means[0]));
    }

    #[test]
    fn projection_rejects_wrong_measure() {
        let m = canonical::one_period_binomial();
        let gens = enumerate_generators(&m, SignConstraint::Free);
        let bad = MeasureCertificate::new(vec![ratio(1, 2), ratio(1, 2)], MeasureKind::Martingale, &gens);
        assert!(matches!(
            project_prices(&m, &bad, 0, NullBlockPolicy::Reject),
            Err(FtapError::ProjectionCheck(_))
        ));
    }

    #[test]
    fn long_only_mode() {
        // Falling price: shorting would be an arbitrage, long-only cannot exploit it.
        let mut m = canonical::deterministic_increase();
        m.prices[0][2] = RandomVariable::constant(4, int(0));
        assert!(ftap_verdict(&m, SignConstraint::Free, exact()).unwrap().is_arbitrage());
        match ftap_verdict(&m, SignConstraint::LongOnly, exact()).unwrap() {
            Verdict::NoArbitrage(c) => {
                assert_eq!(c.kind, MeasureKind::Supermartingale);
                assert!(c.residual().is_zero());
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn float_mode_agrees() {
        for m in [
            canonical::delayed_binomial(),
            canonical::two_asset(),
            canonical::momentum(false),
        ] {
            let e = ftap_verdict(&m, SignConstraint::Free, exact()).unwrap();
            let f = ftap_verdict(&m, SignConstraint::Free, Arithmetic::float()).unwrap();
            assert_eq!(e.label(), f.label());
        }
    }
}
