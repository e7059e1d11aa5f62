//! Finite probability spaces, partitions, filtrations and conditional
//! expectation.
//!
//! A finite σ-algebra is represented by the partition of its atoms, so
//! measurability is block-constancy and inclusion of σ-algebras is refinement
//! of partitions.

use std::collections::{BTreeMap, HashSet};
use std::ops::Index;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::num::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("space needs at least one outcome")]
    EmptySpace,
    #[error("{labels} labels but {probs} probabilities")]
    LengthMismatch { labels: usize, probs: usize },
    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),
    #[error("outcome `{label}` has non-positive probability {prob}")]
    NonPositiveProbability { label: String, prob: String },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
    #[error("partition over {expected} outcomes got {got}")]
    OutcomeCountMismatch { expected: usize, got: usize },
    #[error("partition has an empty block")]
    EmptyBlock,
    #[error("outcome {0} is out of range or appears in two blocks")]
    BadCover(usize),
    #[error("outcome {0} is not covered by any block")]
    Uncovered(usize),
    #[error("filtration needs one partition per time ({times} times, {partitions} partitions)")]
    FiltrationShape { times: usize, partitions: usize },
    #[error("filtration times must lie in [0,1] and increase strictly")]
    BadTimes,
    #[error("filtration partition at time index {0} does not refine its predecessor")]
    NotRefining(usize),
    #[error("conditioning block {block:?} has zero mass and no null-block convention was chosen")]
    NullBlock { block: Vec<usize> },
    #[error("measure has a negative weight")]
    NegativeMeasure,
    #[error("delay must be non-negative")]
    NegativeDelay,
}

/// Outcomes with strictly positive reference probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    probs: Vec<Rational>,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>, probs: Vec<Rational>) -> Result<Self, ProbError> {
        Self::check_labels(&labels, probs.len())?;
        for (l, p) in labels.iter().zip(&probs) {
            if !p.is_positive() {
                return Err(ProbError::NonPositiveProbability {
                    label: l.clone(),
                    prob: num::format_rational(p),
                });
            }
        }
        let total = num::sum(&probs);
        if !total.is_one() {
            return Err(ProbError::NotNormalized(num::format_rational(&total)));
        }
        Ok(FiniteSpace { labels, probs })
    }

    /// Float weights must sum to one within `1e-12`; they are stored as the
    /// exact binary values renormalised by their exact sum.
    pub fn from_f64(labels: Vec<String>, probs: &[f64]) -> Result<Self, ProbError> {
        Self::check_labels(&labels, probs.len())?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ProbError::NotNormalized(total.to_string()));
        }
        let exact: Vec<Rational> = probs.iter().map(|&p| num::from_f64(p)).collect();
        let s = num::sum(&exact);
        let exact = exact.into_iter().map(|p| p / &s).collect();
        Self::new(labels, exact)
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self, ProbError> {
        let n = labels.len();
        if n == 0 {
            return Err(ProbError::EmptySpace);
        }
        let p = num::ratio(1, n as i64);
        Self::new(labels, vec![p; n])
    }

    fn check_labels(labels: &[String], nprobs: usize) -> Result<(), ProbError> {
        if labels.is_empty() {
            return Err(ProbError::EmptySpace);
        }
        if labels.len() != nprobs {
            return Err(ProbError::LengthMismatch {
                labels: labels.len(),
                probs: nprobs,
            });
        }
        let mut seen = HashSet::new();
        for l in labels {
            if !seen.insert(l.as_str()) {
                return Err(ProbError::DuplicateLabel(l.clone()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn expectation(&self, x: &RandomVariable) -> Rational {
        num::dot(&self.probs, x.values())
    }

    /// Same outcomes, different (full-support) reference weights.
    pub fn with_probs(&self, probs: Vec<Rational>) -> Result<Self, ProbError> {
        Self::new(self.labels.clone(), probs)
    }
}

/// One scalar per outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RandomVariable(Vec<Rational>);

impl RandomVariable {
    pub fn new(values: Vec<Rational>) -> Self {
        RandomVariable(values)
    }

    pub fn zeros(n: usize) -> Self {
        RandomVariable(vec![Rational::zero(); n])
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        RandomVariable(vec![c; n])
    }

    pub fn from_ints(values: &[i64]) -> Self {
        RandomVariable(values.iter().map(|&v| num::int(v)).collect())
    }

    pub fn indicator(n: usize, block: &[usize]) -> Self {
        let mut v = vec![Rational::zero(); n];
        for &w in block {
            v[w] = Rational::one();
        }
        RandomVariable(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &RandomVariable) -> RandomVariable {
        RandomVariable(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RandomVariable) -> RandomVariable {
        RandomVariable(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rational) -> RandomVariable {
        RandomVariable(self.0.iter().map(|a| a * c).collect())
    }

    pub fn shift(&self, c: &Rational) -> RandomVariable {
        RandomVariable(self.0.iter().map(|a| a + c).collect())
    }

    pub fn mul(&self, other: &RandomVariable) -> RandomVariable {
        RandomVariable(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> RandomVariable {
        RandomVariable(self.0.iter().map(f).collect())
    }

    /// `Σ q(ω) x(ω)` for an arbitrary weight vector `q`.
    pub fn integrate(&self, q: &[Rational]) -> Rational {
        num::dot(q, &self.0)
    }

    pub fn min_value(&self) -> Option<&Rational> {
        self.0.iter().min()
    }

    pub fn max_value(&self) -> Option<&Rational> {
        self.0.iter().max()
    }
}

impl Index<usize> for RandomVariable {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl From<Vec<Rational>> for RandomVariable {
    fn from(v: Vec<Rational>) -> Self {
        RandomVariable(v)
    }
}

/// Disjoint nonempty blocks covering `0..n`, stored canonically: each block
/// sorted, blocks ordered by their smallest outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self, ProbError> {
        let mut owner = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ProbError::EmptyBlock);
            }
            for &w in block {
                if w >= n || owner[w] != usize::MAX {
                    return Err(ProbError::BadCover(w));
                }
                owner[w] = b;
            }
        }
        if let Some(w) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(ProbError::Uncovered(w));
        }
        Ok(Self::canonical(n, blocks))
    }

    fn canonical(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![0; n];
        for (i, b) in blocks.iter().enumerate() {
            for &w in b {
                block_of[w] = i;
            }
        }
        Partition { n, blocks, block_of }
    }

    pub fn trivial(n: usize) -> Self {
        Self::canonical(n, vec![(0..n).collect()])
    }

    pub fn discrete(n: usize) -> Self {
        Self::canonical(n, (0..n).map(|w| vec![w]).collect())
    }

    /// Level sets of `key`.
    pub fn from_key<K: Ord>(n: usize, key: impl Fn(usize) -> K) -> Self {
        let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
        for w in 0..n {
            groups.entry(key(w)).or_default().push(w);
        }
        Self::canonical(n, groups.into_values().collect())
    }

    pub fn outcome_count(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, outcome: usize) -> usize {
        self.block_of[outcome]
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    /// True iff every block of `self` sits inside a block of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> Result<bool, ProbError> {
        refines(self, coarse)
    }

    /// Coarsest common refinement (σ-algebra generated by both).
    pub fn join(&self, other: &Partition) -> Partition {
        assert_eq!(self.n, other.n, "join of partitions over different spaces");
        Partition::from_key(self.n, |w| (self.block_of[w], other.block_of[w]))
    }

    pub fn is_measurable(&self, x: &RandomVariable) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|&w| x[w] == x[b[0]]))
    }
}

pub fn refines(fine: &Partition, coarse: &Partition) -> Result<bool, ProbError> {
    if fine.n != coarse.n {
        return Err(ProbError::OutcomeCountMismatch {
            expected: coarse.n,
            got: fine.n,
        });
    }
    Ok(fine.blocks.iter().all(|b| {
        let owner = coarse.block_of[b[0]];
        b.iter().all(|&w| coarse.block_of[w] == owner)
    }))
}

/// Time-indexed refining sequence of partitions over a fixed outcome count.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    times: Vec<Rational>,
    partitions: Vec<Partition>,
    before_start: Partition,
}

impl Filtration {
    pub fn new(times: Vec<Rational>, partitions: Vec<Partition>) -> Result<Self, ProbError> {
        if times.len() != partitions.len() || times.is_empty() {
            return Err(ProbError::FiltrationShape {
                times: times.len(),
                partitions: partitions.len(),
            });
        }
        let zero = Rational::zero();
        let one = Rational::one();
        if times[0] < zero || times[times.len() - 1] > one || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProbError::BadTimes);
        }
        let n = partitions[0].n;
        for p in &partitions {
            if p.n != n {
                return Err(ProbError::OutcomeCountMismatch { expected: n, got: p.n });
            }
        }
        for k in 1..partitions.len() {
            if !refines(&partitions[k], &partitions[k - 1])? {
                return Err(ProbError::NotRefining(k));
            }
        }
        Ok(Filtration {
            times,
            partitions,
            before_start: Partition::trivial(n),
        })
    }

    /// Same partition at every time.
    pub fn constant(times: Vec<Rational>, partition: Partition) -> Result<Self, ProbError> {
        let k = times.len();
        Self::new(times, vec![partition; k])
    }

    pub fn trivial(n: usize, times: Vec<Rational>) -> Result<Self, ProbError> {
        Self::constant(times, Partition::trivial(n))
    }

    pub fn times(&self) -> &[Rational] {
        &self.times
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn outcome_count(&self) -> usize {
        self.before_start.n
    }

    /// Partition at the latest time `≤ t`; trivial when no such time exists.
    pub fn at(&self, t: &Rational) -> &Partition {
        match self.times.iter().rposition(|s| s <= t) {
            Some(k) => &self.partitions[k],
            None => &self.before_start,
        }
    }

    /// Pointwise join with another filtration, evaluated on the union of the
    /// two time grids.
    pub fn join(&self, other: &Filtration) -> Filtration {
        let mut times: Vec<Rational> = self.times.iter().chain(&other.times).cloned().collect();
        times.sort();
        times.dedup();
        let partitions = times.iter().map(|t| self.at(t).join(other.at(t))).collect();
        Filtration::new(times, partitions).expect("join of filtrations refines in time")
    }
}

/// `small ⊆ big` pointwise in time: at each of `small`'s times, `big`'s
/// partition in force refines `small`'s.
pub fn is_sub_filtration(small: &Filtration, big: &Filtration) -> Result<bool, ProbError> {
    for (t, p) in small.times.iter().zip(&small.partitions) {
        if !refines(big.at(t), p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// What to do with a conditioning block of zero `q`-mass.
#[derive(Debug, Clone, Copy)]
pub enum NullBlockPolicy<'a> {
    Reject,
    /// Average with the reference weights instead.
    Reference(&'a [Rational]),
}

/// `E_q[x | σ(part)]`, constant on each block.
pub fn conditional_expectation(
    x: &RandomVariable,
    part: &Partition,
    q: &[Rational],
    policy: NullBlockPolicy<'_>,
) -> Result<RandomVariable, ProbError> {
    if x.len() != part.n || q.len() != part.n {
        return Err(ProbError::OutcomeCountMismatch {
            expected: part.n,
            got: if x.len() != part.n { x.len() } else { q.len() },
        });
    }
    if q.iter().any(Signed::is_negative) {
        return Err(ProbError::NegativeMeasure);
    }
    let mut out = vec![Rational::zero(); part.n];
    for block in &part.blocks {
        let mut weights = q;
        let mut mass: Rational = block.iter().map(|&w| &q[w]).sum();
        if mass.is_zero() {
            match policy {
                NullBlockPolicy::Reject => return Err(ProbError::NullBlock { block: block.clone() }),
                NullBlockPolicy::Reference(p) => {
                    weights = p;
                    mass = block.iter().map(|&w| &p[w]).sum();
                    if mass.is_zero() {
                        return Err(ProbError::NullBlock { block: block.clone() });
                    }
                }
            }
        }
        let total: Rational = block.iter().map(|&w| &weights[w] * &x[w]).sum();
        let avg = total / mass;
        for &w in block {
            out[w] = avg.clone();
        }
    }
    Ok(RandomVariable(out))
}

/// Information arrives `delay` late: at each base time `t` the partition is
/// the one base had at `t - delay` (trivial before the first base time).
pub fn delayed_filtration(base: &Filtration, delay: &Rational) -> Result<Filtration, ProbError> {
    if delay.is_negative() {
        return Err(ProbError::NegativeDelay);
    }
    let partitions = base.times.iter().map(|t| base.at(&(t - delay)).clone()).collect();
    Filtration::new(base.times.clone(), partitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    fn part(n: usize, blocks: &[&[usize]]) -> Partition {
        Partition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    fn grid3() -> Vec<Rational> {
        vec![int(0), ratio(1, 2), int(1)]
    }

    #[test]
    fn refines_examples() {
        assert!(refines(&part(2, &[&[0], &[1]]), &part(2, &[&[0, 1]])).unwrap());
        assert!(!refines(&part(2, &[&[0, 1]]), &part(2, &[&[0], &[1]])).unwrap());
        assert!(refines(&part(4, &[&[0, 1], &[2, 3]]), &Partition::trivial(4)).unwrap());
        assert!(matches!(
            refines(&Partition::trivial(2), &Partition::trivial(3)),
            Err(ProbError::OutcomeCountMismatch { .. })
        ));
    }

    #[test]
    fn partition_rejects_bad_covers() {
        assert_eq!(Partition::new(2, vec![vec![0]]), Err(ProbError::Uncovered(1)));
        assert_eq!(
            Partition::new(2, vec![vec![0, 1], vec![1]]),
            Err(ProbError::BadCover(1))
        );
        assert_eq!(Partition::new(2, vec![vec![0, 1], vec![]]), Err(ProbError::EmptyBlock));
        assert_eq!(part(3, &[&[2, 0], &[1]]), part(3, &[&[1], &[0, 2]]));
    }

    #[test]
    fn space_validation() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(FiniteSpace::new(labels.clone(), vec![ratio(1, 2), ratio(1, 2)]).is_ok());
        assert!(matches!(
            FiniteSpace::new(labels.clone(), vec![int(1), int(0)]),
            Err(ProbError::NonPositiveProbability { .. })
        ));
        assert!(matches!(
            FiniteSpace::new(labels.clone(), vec![ratio(1, 2), ratio(1, 3)]),
            Err(ProbError::NotNormalized(_))
        ));
        assert!(matches!(
            FiniteSpace::new(vec!["a".into(), "a".into()], vec![ratio(1, 2), ratio(1, 2)]),
            Err(ProbError::DuplicateLabel(_))
        ));
        let f = FiniteSpace::from_f64(labels.clone(), &[0.3, 0.7]).unwrap();
        assert!(num::sum(f.probs()).is_one());
        assert!(FiniteSpace::from_f64(labels, &[0.3, 0.71]).is_err());
    }

    #[test]
    fn filtration_requires_refinement_and_times() {
        let n = 2;
        let ok = Filtration::new(
            vec![int(0), int(1)],
            vec![Partition::trivial(n), Partition::discrete(n)],
        );
        assert!(ok.is_ok());
        assert_eq!(
            Filtration::new(
                vec![int(0), int(1)],
                vec![Partition::discrete(n), Partition::trivial(n)]
            ),
            Err(ProbError::NotRefining(1))
        );
        assert_eq!(Filtration::trivial(n, vec![int(1), int(0)]), Err(ProbError::BadTimes));
        assert_eq!(Filtration::trivial(n, vec![int(0), int(2)]), Err(ProbError::BadTimes));
    }

    #[test]
    fn sub_filtration_examples() {
        let n = 4;
        let big = Filtration::new(
            grid3(),
            vec![
                Partition::trivial(n),
                part(n, &[&[0, 1], &[2, 3]]),
                Partition::discrete(n),
            ],
        )
        .unwrap();
        let trivial = Filtration::trivial(n, grid3()).unwrap();
        assert!(is_sub_filtration(&trivial, &big).unwrap());
        assert!(is_sub_filtration(&big, &big).unwrap());
        let informed_early = Filtration::constant(grid3(), Partition::discrete(n)).unwrap();
        assert!(!is_sub_filtration(&informed_early, &big).unwrap());
        // big has no time before 1/4 in this variant, so it is trivial there.
        let late_big = Filtration::new(vec![ratio(1, 2)], vec![Partition::discrete(n)]).unwrap();
        let small0 = Filtration::new(vec![int(0)], vec![Partition::discrete(n)]).unwrap();
        assert!(!is_sub_filtration(&small0, &late_big).unwrap());
    }

    #[test]
    fn conditional_expectation_examples() {
        let x = RandomVariable::from_ints(&[1, 3]);
        let half = vec![ratio(1, 2), ratio(1, 2)];
        let ce = conditional_expectation(&x, &Partition::trivial(2), &half, NullBlockPolicy::Reject).unwrap();
        assert_eq!(ce, RandomVariable::from_ints(&[2, 2]));

        let ce = conditional_expectation(&x, &Partition::discrete(2), &half, NullBlockPolicy::Reject).unwrap();
        assert_eq!(ce, x);

        // Block averages: (4·1/3 + 1·1/6)/(1/2) = 3, (1·1/3 + 1/4·1/6)/(1/2) = 3/4.
        let x = RandomVariable::new(vec![int(4), int(1), int(1), ratio(1, 4)]);
        let q = vec![ratio(1, 3), ratio(1, 6), ratio(1, 3), ratio(1, 6)];
        let p = part(4, &[&[0, 1], &[2, 3]]);
        let ce = conditional_expectation(&x, &p, &q, NullBlockPolicy::Reject).unwrap();
        assert_eq!(ce, RandomVariable::new(vec![int(3), int(3), ratio(3, 4), ratio(3, 4)]));
    }

    #[test]
    fn null_block_needs_convention() {
        let x = RandomVariable::from_ints(&[1, 5, 7]);
        let q = vec![int(1), int(0), int(0)];
        let p = part(3, &[&[0], &[1, 2]]);
        assert!(matches!(
            conditional_expectation(&x, &p, &q, NullBlockPolicy::Reject),
            Err(ProbError::NullBlock { .. })
        ));
        let reference = vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)];
        let ce = conditional_expectation(&x, &p, &q, NullBlockPolicy::Reference(&reference)).unwrap();
        assert_eq!(ce, RandomVariable::from_ints(&[1, 6, 6]));
    }

    #[test]
    fn delayed_filtration_examples() {
        let n = 4;
        let p_half = part(n, &[&[0, 1], &[2, 3]]);
        let base = Filtration::new(
            grid3(),
            vec![Partition::trivial(n), p_half.clone(), Partition::discrete(n)],
        )
        .unwrap();
        assert_eq!(delayed_filtration(&base, &int(0)).unwrap(), base);
        let late = delayed_filtration(&base, &int(2)).unwrap();
        assert!(late.partitions().iter().all(Partition::is_trivial));
        let d = delayed_filtration(&base, &ratio(1, 2)).unwrap();
        assert_eq!(d.partitions(), &[Partition::trivial(n), Partition::trivial(n), p_half]);
        assert!(is_sub_filtration(&d, &base).unwrap());
        assert_eq!(delayed_filtration(&base, &int(-1)), Err(ProbError::NegativeDelay));
    }

    #[test]
    fn join_is_common_refinement() {
        let a = part(4, &[&[0, 1], &[2, 3]]);
        let b = part(4, &[&[0, 2], &[1, 3]]);
        assert_eq!(a.join(&b), Partition::discrete(4));
        assert!(a.join(&b).refines(&a).unwrap());
    }
}
