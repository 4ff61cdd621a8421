//! Classical-quantum channels, input distributions, cost budgets and the
//! type-class combinatorics used to evaluate i.i.d. block extensions without
//! touching every one of the `k^n` input sequences.
//!
//! A channel `W` maps each classical input label to a density matrix `W_x`
//! on a fixed output space; a blocklength-`n` input sequence maps to the
//! tensor product `W_{x_1} (x) ... (x) W_{x_n}`.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::operator::DensityMatrix;

/// A classical-quantum channel: an ordered list of labeled output states
/// sharing one Hilbert-space dimension.
#[derive(Debug, Clone)]
pub struct CqChannel {
    dim: usize,
    inputs: Vec<(String, DensityMatrix)>,
    index: BTreeMap<String, usize>,
}

impl CqChannel {
    pub fn new(inputs: Vec<(String, DensityMatrix)>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptyInput("channel with no inputs"));
        }
        let dim = inputs[0].1.dim();
        let mut index = BTreeMap::new();
        for (pos, (label, state)) in inputs.iter().enumerate() {
            if state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: state.dim(),
                    right: dim,
                });
            }
            if index.insert(label.clone(), pos).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { dim, inputs, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.inputs.iter().map(|(l, _)| l.as_str())
    }

    pub fn inputs(&self) -> &[(String, DensityMatrix)] {
        &self.inputs
    }

    pub fn state(&self, label: &str) -> Result<&DensityMatrix> {
        self.index
            .get(label)
            .map(|&i| &self.inputs[i].1)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    /// Ensemble average `W_P = sum_x P(x) W_x`.
    pub fn output_average(&self, p: &FiniteDistribution) -> Result<DensityMatrix> {
        let mut acc = crate::operator::HermitianOperator::zero(self.dim);
        for (label, weight) in p.weights() {
            let state = self.state(label)?;
            acc = &acc + &state.scale(*weight);
        }
        DensityMatrix::new(acc)
    }

    /// Product state `W_{x^n} = W_{x_1} (x) ... (x) W_{x_n}` of a block input,
    /// guarded by the dense dimension bound.
    pub fn sequence_state(&self, sequence: &[&str], tol: &Tolerances) -> Result<DensityMatrix> {
        if sequence.is_empty() {
            return Err(Error::EmptyInput("empty input sequence"));
        }
        let dim = (self.dim as u128)
            .checked_pow(sequence.len() as u32)
            .ok_or(Error::DimensionBound {
                required: u128::MAX,
                bound: tol.max_dim,
            })?;
        tol.check_dim(dim)?;
        let mut out = self.state(sequence[0])?.clone();
        for label in &sequence[1..] {
            out = out.kron(self.state(label)?);
        }
        Ok(out)
    }
}

/// A probability distribution with finite support over channel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    weights: BTreeMap<String, f64>,
}

impl FiniteDistribution {
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self> {
        Self::new_with(weights, &Tolerances::default())
    }

    pub fn new_with(weights: BTreeMap<String, f64>, tol: &Tolerances) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("distribution with empty support"));
        }
        for (label, &w) in &weights {
            if w < 0.0 {
                return Err(Error::NegativeWeight {
                    label: label.clone(),
                    weight: w,
                });
            }
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > tol.weight_sum {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(Self { weights })
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(l, w)| (l.to_string(), *w))
                .collect(),
        )
    }

    pub fn uniform<'a>(labels: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let labels: Vec<&str> = labels.into_iter().collect();
        if labels.is_empty() {
            return Err(Error::EmptyInput("uniform distribution over no labels"));
        }
        let w = 1.0 / labels.len() as f64;
        Self::new(labels.iter().map(|l| (l.to_string(), w)).collect())
    }

    pub fn point_mass(label: &str) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(label.to_string(), 1.0);
        Self { weights }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn probability(&self, label: &str) -> f64 {
        self.weights.get(label).copied().unwrap_or(0.0)
    }

    /// Labels carrying strictly positive weight, in label order.
    pub fn support(&self) -> Vec<&str> {
        self.weights
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(l, _)| l.as_str())
            .collect()
    }

    /// Checks the support is contained in the channel's label set.
    pub fn check_support(&self, channel: &CqChannel) -> Result<()> {
        for label in self.support() {
            if !channel.contains(label) {
                return Err(Error::UnknownLabel(label.to_string()));
            }
        }
        Ok(())
    }

    /// Expectation of a per-symbol cost under this distribution.
    pub fn expected_cost(&self, cost: &CostSpec) -> Result<f64> {
        let mut acc = 0.0;
        for (label, &w) in &self.weights {
            if w > 0.0 {
                acc += w * cost.cost_of(label)?;
            }
        }
        Ok(acc)
    }
}

/// Per-symbol cost function and a per-symbol average budget `gamma`.
/// A block input `x^n` is admissible when `sum_i c(x_i) <= n gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    cost: BTreeMap<String, f64>,
    budget: f64,
}

impl CostSpec {
    pub fn new(cost: BTreeMap<String, f64>, budget: f64) -> Self {
        Self { cost, budget }
    }

    pub fn from_pairs(pairs: &[(&str, f64)], budget: f64) -> Self {
        Self::new(
            pairs.iter().map(|(l, c)| (l.to_string(), *c)).collect(),
            budget,
        )
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn with_budget(&self, budget: f64) -> Self {
        Self {
            cost: self.cost.clone(),
            budget,
        }
    }

    pub fn cost_of(&self, label: &str) -> Result<f64> {
        self.cost
            .get(label)
            .copied()
            .ok_or_else(|| Error::MissingCost(label.to_string()))
    }

    pub fn costs(&self) -> &BTreeMap<String, f64> {
        &self.cost
    }

    /// Checks every channel label has a cost.
    pub fn check_covers(&self, channel: &CqChannel) -> Result<()> {
        for label in channel.labels() {
            self.cost_of(label)?;
        }
        Ok(())
    }

    /// Restriction predicate for blocklength `n`: accepts `x^n` iff
    /// `sum_i c(x_i) <= n gamma` (up to additive roundoff slack 1e-12).
    pub fn block_predicate(&self, n: usize) -> CostPredicate<'_> {
        CostPredicate {
            spec: self,
            n,
            slack: 1e-12 * (n as f64) * self.budget.abs().max(1.0),
        }
    }
}

/// Acceptance predicate for cost-constrained block inputs.
#[derive(Debug, Clone)]
pub struct CostPredicate<'a> {
    spec: &'a CostSpec,
    n: usize,
    slack: f64,
}

impl CostPredicate<'_> {
    pub fn accepts(&self, sequence: &[&str]) -> Result<bool> {
        debug_assert_eq!(sequence.len(), self.n);
        let mut total = 0.0;
        for label in sequence {
            total += self.spec.cost_of(label)?;
        }
        Ok(total <= self.n as f64 * self.spec.budget + self.slack)
    }

    /// Same test on a type-class count vector.
    pub fn accepts_counts(&self, counts: &BTreeMap<String, usize>) -> Result<bool> {
        let mut total = 0.0;
        for (label, &k) in counts {
            total += k as f64 * self.spec.cost_of(label)?;
        }
        Ok(total <= self.n as f64 * self.spec.budget + self.slack)
    }
}

/// The set of length-`n` sequences sharing a symbol-count vector.
///
/// Permutation symmetry of i.i.d. inputs and product reference states makes
/// per-class evaluation of symmetric functionals lossless, which is what
/// keeps blocklength sweeps tractable.
#[derive(Debug, Clone)]
pub struct TypeClass {
    pub counts: BTreeMap<String, usize>,
    /// Number of sequences in the class: `n! / prod_x counts[x]!`, exact.
    pub multiplicity: BigUint,
    /// One member of the class, symbols grouped in label order.
    pub representative: Vec<String>,
}

impl TypeClass {
    pub fn n(&self) -> usize {
        self.counts.values().sum()
    }

    /// `P^(n)` probability of a single sequence in this class.
    pub fn sequence_probability(&self, p: &FiniteDistribution) -> f64 {
        let mut acc = 1.0;
        for (label, &k) in &self.counts {
            acc *= p.probability(label).powi(k as i32);
        }
        acc
    }

    /// Total `P^(n)` mass of the class: multiplicity times the per-sequence
    /// probability.
    pub fn class_probability(&self, p: &FiniteDistribution) -> f64 {
        big_to_f64(&self.multiplicity) * self.sequence_probability(p)
    }

    pub fn representative_refs(&self) -> Vec<&str> {
        self.representative.iter().map(|s| s.as_str()).collect()
    }
}

fn big_to_f64(b: &BigUint) -> f64 {
    // Exact for every multiplicity within the configured enumeration bounds.
    let s = b.to_string();
    s.parse::<f64>().unwrap_or(f64::INFINITY)
}

fn multinomial(n: usize, counts: &[usize]) -> BigUint {
    debug_assert_eq!(counts.iter().sum::<usize>(), n);
    let mut num = BigUint::from(1u32);
    for i in 2..=n {
        num *= BigUint::from(i);
    }
    let mut den = BigUint::from(1u32);
    for &k in counts {
        for i in 2..=k {
            den *= BigUint::from(i);
        }
    }
    num / den
}

/// Enumerates all type classes of length-`n` sequences over the support of
/// `p`, in lexicographic count order.
pub fn enumerate_type_classes(
    p: &FiniteDistribution,
    n: usize,
    tol: &Tolerances,
) -> Result<Vec<TypeClass>> {
    let support: Vec<&str> = p.support();
    let k = support.len();
    if k == 0 || n == 0 {
        return Err(Error::EmptyInput("type classes need n >= 1 and support"));
    }
    let count = compositions(n as u128, k as u128);
    if count > tol.max_type_classes as u128 {
        return Err(Error::CombinatorialBound {
            count,
            bound: tol.max_type_classes,
        });
    }

    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0usize; k];
    fill_compositions(n, 0, &mut counts, &mut |counts| {
        let mut map = BTreeMap::new();
        let mut representative = Vec::with_capacity(n);
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                map.insert(support[i].to_string(), c);
            }
            for _ in 0..c {
                representative.push(support[i].to_string());
            }
        }
        out.push(TypeClass {
            counts: map,
            multiplicity: multinomial(n, counts),
            representative,
        });
    });
    Ok(out)
}

fn compositions(n: u128, k: u128) -> u128 {
    // C(n + k - 1, k - 1)
    let mut acc: u128 = 1;
    for i in 0..(k - 1) {
        acc = acc.saturating_mul(n + k - 1 - i) / (i + 1);
    }
    acc
}

fn fill_compositions(rest: usize, idx: usize, counts: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if idx + 1 == counts.len() {
        counts[idx] = rest;
        emit(counts);
        return;
    }
    for c in 0..=rest {
        counts[idx] = c;
        fill_compositions(rest - c, idx + 1, counts, emit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level_channel() -> CqChannel {
        CqChannel::new(vec![
            (
                "x0".into(),
                DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap(),
            ),
            (
                "x1".into(),
                DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap(),
            ),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_duplicate_labels() {
        let s = DensityMatrix::maximally_mixed(2);
        let r = CqChannel::new(vec![("a".into(), s.clone()), ("a".into(), s)]);
        assert!(matches!(r, Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn output_average_point_mass_and_uniform() {
        let ch = two_level_channel();
        let point = FiniteDistribution::point_mass("x0");
        let avg = ch.output_average(&point).unwrap();
        assert!((avg.matrix() - ch.state("x0").unwrap().matrix()).norm() < 1e-12);

        let unif = FiniteDistribution::uniform(["x0", "x1"]).unwrap();
        let avg = ch.output_average(&unif).unwrap();
        let expect = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        assert!((avg.matrix() - expect.matrix()).norm() < 1e-12);
    }

    #[test]
    fn output_average_weighted() {
        let ch = two_level_channel();
        let p = FiniteDistribution::from_pairs(&[("x0", 0.3), ("x1", 0.7)]).unwrap();
        let avg = ch.output_average(&p).unwrap();
        let expect = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!((avg.matrix() - expect.matrix()).norm() < 1e-12);
    }

    #[test]
    fn output_average_is_affine() {
        let ch = two_level_channel();
        let p = FiniteDistribution::from_pairs(&[("x0", 0.2), ("x1", 0.8)]).unwrap();
        let q = FiniteDistribution::from_pairs(&[("x0", 0.9), ("x1", 0.1)]).unwrap();
        let alpha = 0.37;
        let mix = FiniteDistribution::from_pairs(&[
            ("x0", alpha * 0.2 + (1.0 - alpha) * 0.9),
            ("x1", alpha * 0.8 + (1.0 - alpha) * 0.1),
        ])
        .unwrap();
        let lhs = ch.output_average(&mix).unwrap();
        let rhs = &ch.output_average(&p).unwrap().scale(alpha)
            + &ch.output_average(&q).unwrap().scale(1.0 - alpha);
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-12);
    }

    #[test]
    fn sequence_state_properties() {
        let ch = two_level_channel();
        let tol = Tolerances::default();
        let s1 = ch.sequence_state(&["x0"], &tol).unwrap();
        assert!((s1.matrix() - ch.state("x0").unwrap().matrix()).norm() < 1e-12);

        // Tensor of a pure state stays pure.
        let s2 = ch.sequence_state(&["x0", "x0"], &tol).unwrap();
        let ev = s2.eigenvalues();
        assert!((ev[3] - 1.0).abs() < 1e-12);
        assert!(ev[2].abs() < 1e-12);

        let s3 = ch.sequence_state(&["x0", "x1", "x0"], &tol).unwrap();
        assert!((s3.trace() - 1.0).abs() < 1e-12);
        assert_eq!(s3.dim(), 8);
    }

    #[test]
    fn sequence_state_respects_bound() {
        let ch = two_level_channel();
        let tol = Tolerances {
            max_dim: 4,
            ..Tolerances::default()
        };
        let seq = ["x0", "x0", "x0"];
        assert!(matches!(
            ch.sequence_state(&seq, &tol),
            Err(Error::DimensionBound { .. })
        ));
    }

    #[test]
    fn type_classes_single_letter() {
        let p = FiniteDistribution::point_mass("a");
        let classes = enumerate_type_classes(&p, 5, &Tolerances::default()).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].multiplicity, BigUint::from(1u32));
    }

    #[test]
    fn type_classes_binomial() {
        let p = FiniteDistribution::from_pairs(&[("a", 0.5), ("b", 0.5)]).unwrap();
        let classes = enumerate_type_classes(&p, 2, &Tolerances::default()).unwrap();
        assert_eq!(classes.len(), 3);
        let mults: Vec<u32> = classes
            .iter()
            .map(|c| c.multiplicity.to_string().parse().unwrap())
            .collect();
        let mut sorted = mults.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 1, 2]);
    }

    #[test]
    fn type_classes_ternary_against_brute_force() {
        let p =
            FiniteDistribution::from_pairs(&[("a", 0.2), ("b", 0.3), ("c", 0.5)]).unwrap();
        let classes = enumerate_type_classes(&p, 4, &Tolerances::default()).unwrap();
        assert_eq!(classes.len(), 15);
        let total: u32 = classes
            .iter()
            .map(|c| c.multiplicity.to_string().parse::<u32>().unwrap())
            .sum();
        assert_eq!(total, 81); // 3^4 sequences

        // Brute force: count every sequence by its type.
        let labels = ["a", "b", "c"];
        let mut brute: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
        for s in 0..81usize {
            let seq = [s % 3, (s / 3) % 3, (s / 9) % 3, (s / 27) % 3];
            let mut counts = vec![0usize; 3];
            for &i in &seq {
                counts[i] += 1;
            }
            *brute.entry(counts).or_insert(0) += 1;
        }
        for class in &classes {
            let counts: Vec<usize> = labels
                .iter()
                .map(|l| class.counts.get(*l).copied().unwrap_or(0))
                .collect();
            let mult: u32 = class.multiplicity.to_string().parse().unwrap();
            assert_eq!(brute.get(&counts), Some(&mult));
        }

        // Probabilities form a partition of unity.
        let mass: f64 = classes.iter().map(|c| c.class_probability(&p)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cost_predicate_enumeration() {
        let cost = CostSpec::from_pairs(&[("x0", 0.0), ("x1", 1.0)], 0.5);
        let pred = cost.block_predicate(2);
        assert!(pred.accepts(&["x0", "x0"]).unwrap());
        assert!(pred.accepts(&["x0", "x1"]).unwrap());
        assert!(pred.accepts(&["x1", "x0"]).unwrap());
        assert!(!pred.accepts(&["x1", "x1"]).unwrap());
    }

    #[test]
    fn cost_predicate_extremes() {
        let cost = CostSpec::from_pairs(&[("a", 1.0), ("b", 3.0)], 3.0);
        let pred = cost.block_predicate(2);
        // Budget at the max cost admits everything.
        for s in [["a", "a"], ["a", "b"], ["b", "b"]] {
            assert!(pred.accepts(&s).unwrap());
        }
        let starved = CostSpec::from_pairs(&[("a", 1.0), ("b", 3.0)], 0.5);
        let pred = starved.block_predicate(2);
        for s in [["a", "a"], ["a", "b"], ["b", "b"]] {
            assert!(!pred.accepts(&s).unwrap());
        }
    }

    #[test]
    fn multinomial_is_exact_at_scale() {
        // 64! / (16!)^4 must be exact in big integers.
        let m = multinomial(64, &[16, 16, 16, 16]);
        let s = m.to_string();
        assert!(s.len() > 30);
        let p = FiniteDistribution::from_pairs(&[
            ("a", 0.25),
            ("b", 0.25),
            ("c", 0.25),
            ("d", 0.25),
        ])
        .unwrap();
        let tol = Tolerances::default();
        let classes = enumerate_type_classes(&p, 16, &tol).unwrap();
        let mass: f64 = classes.iter().map(|c| c.class_probability(&p)).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_check() {
        let ch = two_level_channel();
        let p = FiniteDistribution::from_pairs(&[("x0", 0.5), ("zz", 0.5)]).unwrap();
        assert!(matches!(
            p.check_support(&ch),
            Err(Error::UnknownLabel(_))
        ));
    }
}
