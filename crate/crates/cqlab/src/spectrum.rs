//! Finite-blocklength information-spectrum tails.
//!
//! Everything here evaluates, at explicit `n`, trace quantities of the form
//!
//! ```text
//! sum_{x^n} P^n(x^n) Tr[ W_{x^n} {W_{x^n} - e^{na} sigma^n > 0} ]      (information tail)
//! Tr[ rho^n { rho^n - e^{na} sigma^n > 0 } ]                          (divergence tail)
//! Tr[ W_P^n { W_P^n >= e^{-nb} } ],  sum P^n Tr[ W_{x^n} { W_{x^n} <= e^{-nc} } ]
//! ```
//!
//! whose `n -> inf` behavior defines the spectral rates. The limits are
//! never returned as numbers: sweeps only report the finite-`n` grid plus a
//! labeled bracket. Inputs are i.i.d. extensions and product reference
//! states, which is what makes the type-class reduction lossless.
//!
//! The general theory quantifies over arbitrary reference-state sequences;
//! whether product references attain the same infimum is an open question,
//! so this engine makes no claim beyond the product case it evaluates.

use crate::capacity::tr_power_pair;
use crate::channel::{enumerate_type_classes, CqChannel, FiniteDistribution};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::operator::{trace_product, Comparator, DensityMatrix};

/// Which spectral tail a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    InfoTail,
    DivergenceTail,
    EntropyTailOutput,
    EntropyTailConditional,
}

impl TailKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TailKind::InfoTail => "info_tail",
            TailKind::DivergenceTail => "divergence_tail",
            TailKind::EntropyTailOutput => "entropy_tail_output",
            TailKind::EntropyTailConditional => "entropy_tail_conditional",
        }
    }

    /// Whether the tail grows with the threshold (at fixed `n`).
    pub fn increasing_in_threshold(self) -> bool {
        matches!(self, TailKind::EntropyTailOutput)
    }
}

/// One evaluated tail value.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SpectrumPoint {
    pub kind: TailKind,
    pub n: usize,
    /// Threshold in nats per symbol (`a`, `b` or `c` depending on the kind).
    pub threshold: f64,
    pub tail: f64,
}

/// Finite-`n` transition bracket at the largest swept blocklength.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Bracket {
    pub n: usize,
    pub epsilon: f64,
    /// Largest threshold whose transition value stays below `epsilon`.
    pub below: Option<f64>,
    /// Smallest threshold whose transition value exceeds `1 - epsilon`.
    pub above: Option<f64>,
    /// Honesty label: these numbers bracket a finite-n transition region,
    /// they are not the asymptotic rate.
    pub note: String,
}

pub const BRACKET_NOTE: &str = "finite-n bracket (not the limit)";

/// A rectangular `(n, threshold)` grid of tail values.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepCurve {
    pub kind: TailKind,
    pub metadata: String,
    pub points: Vec<SpectrumPoint>,
    pub bracket: Bracket,
}

impl SweepCurve {
    /// CSV rendering: `kind,n,threshold,tail` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,n,threshold,tail\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e}\n",
                p.kind.as_str(),
                p.n,
                p.threshold,
                p.tail
            ));
        }
        out
    }
}

fn block_scale(n: usize, a: f64) -> Result<f64> {
    let na = n as f64 * a;
    let c = na.exp();
    if !c.is_finite() {
        return Err(Error::ThresholdOverflow { na });
    }
    Ok(c)
}

/// Information-spectrum tail with the output average as reference:
/// `sum_{x^n} P^n(x^n) Tr[W_{x^n} {W_{x^n} - e^{na} W_P^n cmp 0}]`.
pub fn info_tail(
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    a: f64,
    cmp: Comparator,
    tol: &Tolerances,
) -> Result<f64> {
    let sigma = channel.output_average(p)?;
    info_tail_vs(p, channel, &sigma, n, a, cmp, tol)
}

/// Same tail against an arbitrary single-symbol reference state `sigma`
/// (tensored to the block), the integrand of the J-quantities.
pub fn info_tail_vs(
    p: &FiniteDistribution,
    channel: &CqChannel,
    sigma: &DensityMatrix,
    n: usize,
    a: f64,
    cmp: Comparator,
    tol: &Tolerances,
) -> Result<f64> {
    p.check_support(channel)?;
    if sigma.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            left: sigma.dim(),
            right: channel.dim(),
        });
    }
    let c = block_scale(n, a)?;
    let sigma_n = sigma.tensor_power(n, tol)?;
    let classes = enumerate_type_classes(p, n, tol)?;
    let mut acc = 0.0;
    for class in &classes {
        let seq = class.representative_refs();
        let w_seq = channel.sequence_state(&seq, tol)?;
        let diff = w_seq.op() - &sigma_n.scale(c);
        let proj = diff.spectral_projection_with(cmp, 0.0, tol);
        acc += class.class_probability(p) * trace_product(&w_seq, &proj);
    }
    Ok(acc)
}

/// Reference implementation of [`info_tail`] that walks every one of the
/// `k^n` sequences; exists to pin the type-class path down in tests.
pub fn info_tail_naive(
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    a: f64,
    cmp: Comparator,
    tol: &Tolerances,
) -> Result<f64> {
    p.check_support(channel)?;
    let c = block_scale(n, a)?;
    let sigma_n = channel.output_average(p)?.tensor_power(n, tol)?;
    let support = p.support();
    let k = support.len();
    let total = k.checked_pow(n as u32).ok_or(Error::CombinatorialBound {
        count: u128::MAX,
        bound: tol.max_type_classes,
    })?;
    let mut acc = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        let mut seq = Vec::with_capacity(n);
        let mut prob = 1.0;
        for _ in 0..n {
            let s = support[rest % k];
            rest /= k;
            prob *= p.probability(s);
            seq.push(s);
        }
        let w_seq = channel.sequence_state(&seq, tol)?;
        let diff = w_seq.op() - &sigma_n.scale(c);
        let proj = diff.spectral_projection_with(cmp, 0.0, tol);
        acc += prob * trace_product(&w_seq, &proj);
    }
    Ok(acc)
}

/// Hypothesis-testing tail `Tr[rho^n {rho^n - e^{na} sigma^n > 0}]`,
/// evaluated exactly by a dense spectral projection in dimension `d^n`.
pub fn divergence_tail(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    a: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let c = block_scale(n, a)?;
    let rho_n = rho.tensor_power(n, tol)?;
    let sigma_n = sigma.tensor_power(n, tol)?;
    let diff = rho_n.op() - &sigma_n.scale(c);
    let proj = diff.spectral_projection_with(Comparator::Greater, 0.0, tol);
    Ok(trace_product(&rho_n, &proj))
}

/// Which entropy-spectrum tail to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyTail {
    /// `Tr[W_P^n {W_P^n >= e^{-nb}}]`, the output-entropy tail.
    OutputLower,
    /// `sum P^n(x^n) Tr[W_{x^n} {W_{x^n} <= e^{-nc}}]`, the conditional tail.
    ConditionalUpper,
}

/// Entropy-spectrum tails of the block output state and of the codeword
/// states.
///
/// Both operators are diagonal in a product eigenbasis, so the trace reduces
/// exactly to a classical tail of an i.i.d. sum of log-eigenvalues; no
/// `d^n`-dimensional decomposition is needed.
pub fn entropy_tail(
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    threshold: f64,
    which: EntropyTail,
    tol: &Tolerances,
) -> Result<f64> {
    p.check_support(channel)?;
    match which {
        EntropyTail::OutputLower => {
            let sigma = channel.output_average(p)?;
            let dec = sigma.spectral_decompose();
            let cut = dec.rank_cutoff(tol);
            let items: Vec<(f64, f64)> = dec
                .eigenvalues
                .iter()
                .filter(|&&l| l > cut)
                .map(|&l| (l, l.ln()))
                .collect();
            product_log_tail(&items, n, -(n as f64) * threshold, Comparator::GreaterEq, tol)
        }
        EntropyTail::ConditionalUpper => {
            let mut items = Vec::new();
            for (label, &w) in p.weights() {
                if w <= 0.0 {
                    continue;
                }
                let dec = channel.state(label)?.spectral_decompose();
                let cut = dec.rank_cutoff(tol);
                for &l in &dec.eigenvalues {
                    if l > cut {
                        items.push((w * l, l.ln()));
                    }
                }
            }
            product_log_tail(&items, n, -(n as f64) * threshold, Comparator::LessEq, tol)
        }
    }
}

/// Tail of an i.i.d. sum of `n` log-values: the total weight of count
/// vectors whose weighted log-sum passes `cmp log_threshold`.
fn product_log_tail(
    items: &[(f64, f64)],
    n: usize,
    log_threshold: f64,
    cmp: Comparator,
    tol: &Tolerances,
) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::EmptyInput("no spectrum mass to enumerate"));
    }
    let combos = compositions_count(n as u128, items.len() as u128);
    if combos > tol.max_type_classes as u128 {
        return Err(Error::CombinatorialBound {
            count: combos,
            bound: tol.max_type_classes,
        });
    }
    let band = tol.threshold_band * log_threshold.abs().max(1.0);

    struct Walker<'a> {
        items: &'a [(f64, f64)],
        counts: Vec<usize>,
        n: usize,
        log_threshold: f64,
        band: f64,
        cmp: Comparator,
        acc: f64,
    }
    impl Walker<'_> {
        fn walk(&mut self, idx: usize, rest: usize) {
            if idx + 1 == self.counts.len() {
                self.counts[idx] = rest;
                let mut log_sum = 0.0;
                let mut weight_log = 0.0;
                for (&(w, lv), &k) in self.items.iter().zip(&self.counts) {
                    if k > 0 {
                        log_sum += k as f64 * lv;
                        weight_log += k as f64 * w.ln();
                    }
                }
                if self.cmp.admits(log_sum, self.log_threshold, self.band) {
                    self.acc += multinomial_f64(self.n, &self.counts) * weight_log.exp();
                }
                return;
            }
            for c in 0..=rest {
                self.counts[idx] = c;
                self.walk(idx + 1, rest - c);
            }
        }
    }

    let mut walker = Walker {
        items,
        counts: vec![0usize; items.len()],
        n,
        log_threshold,
        band,
        cmp,
        acc: 0.0,
    };
    walker.walk(0, n);
    Ok(walker.acc)
}

fn compositions_count(n: u128, k: u128) -> u128 {
    // C(n + k - 1, k - 1)
    let mut acc: u128 = 1;
    for i in 0..(k - 1) {
        acc = acc.saturating_mul(n + k - 1 - i) / (i + 1);
    }
    acc
}

fn multinomial_f64(n: usize, counts: &[usize]) -> f64 {
    let mut log = 0.0;
    for i in 2..=n {
        log += (i as f64).ln();
    }
    for &k in counts {
        for i in 2..=k {
            log -= (i as f64).ln();
        }
    }
    log.exp().round()
}

/// Ogawa-Nagaoka exponential upper bound on the i.i.d. divergence tail,
/// `exp[-n (a s - log Tr[rho^{1+s} sigma^{-s}])]`, returned together with
/// the exact tail it dominates.
pub fn ogawa_nagaoka_tail_bound(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n: usize,
    a: f64,
    s: f64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "Ogawa-Nagaoka bound needs 0 <= s <= 1, got {s}"
        )));
    }
    let log_tr = tr_power_pair(
        &rho.spectral_decompose(),
        &sigma.spectral_decompose(),
        s,
        tol,
    )
    .ln();
    let bound = (-(n as f64) * (a * s - log_tr)).exp();
    let exact = divergence_tail(rho, sigma, n, a, tol)?;
    Ok((bound, exact))
}

/// Evaluates a full `(n, threshold)` grid for one tail kind.
pub fn sweep(
    kind: TailKind,
    metadata: String,
    ns: &[usize],
    thresholds: &[f64],
    epsilon: f64,
    eval: impl Fn(usize, f64) -> Result<f64> + Sync,
) -> Result<SweepCurve> {
    if ns.is_empty() || thresholds.is_empty() {
        return Err(Error::EmptyInput("sweep needs a nonempty grid"));
    }
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);

    let jobs: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| sorted.iter().map(move |&t| (n, t)))
        .collect();
    let results = crate::parallel::map_indexed(jobs.len(), None, |i| {
        let (n, t) = jobs[i];
        eval(n, t).map(|tail| SpectrumPoint {
            kind,
            n,
            threshold: t,
            tail,
        })
    });
    let mut points = Vec::with_capacity(results.len());
    for r in results {
        points.push(r?);
    }

    let n_max = *ns.iter().max().expect("nonempty");
    let transition = |tail: f64| if kind.increasing_in_threshold() { tail } else { 1.0 - tail };
    let mut below = None;
    let mut above = None;
    for pt in points.iter().filter(|p| p.n == n_max) {
        let g = transition(pt.tail);
        if g < epsilon {
            below = Some(below.map_or(pt.threshold, |b: f64| b.max(pt.threshold)));
        }
        if g > 1.0 - epsilon {
            above = Some(above.map_or(pt.threshold, |b: f64| b.min(pt.threshold)));
        }
    }
    Ok(SweepCurve {
        kind,
        metadata,
        points,
        bracket: Bracket {
            n: n_max,
            epsilon,
            below,
            above,
            note: BRACKET_NOTE.to_string(),
        },
    })
}
