//! Construction and exact evaluation of block codes.
//!
//! A code is a triple `(N, phi, Y)`: size, encoder sequences, and a decoding
//! POVM with `sum_i Y_i <= I` (the remainder is the failure outcome). The
//! average error probability is evaluated exactly,
//!
//! ```text
//! P_e = (1/N) sum_i (1 - Tr[W_{phi(i)} Y_i]),
//! ```
//!
//! for decoders of the square-root-measurement form
//! `Y_i = (sum_j pi_j)^(-1/2) pi_i (sum_j pi_j)^(-1/2)` built from spectral
//! projections of the codeword states against a scaled reference state.
//! Random-coding experiments sample encoders i.i.d. from `P^n` (or from its
//! budget-conditioned restriction) and compare the sampled error statistics
//! against the analytic achievability bounds; the converse check evaluates
//! the matching lower bound for any code whatsoever.

use std::collections::HashMap;

use crate::channel::{enumerate_type_classes, CostSpec, CqChannel, FiniteDistribution};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::operator::{trace_product, Comparator, DensityMatrix, HermitianOperator};
use crate::rng::Stream;
use crate::spectrum::{entropy_tail, info_tail, EntropyTail};

/// Decoder-side slack allowed on the POVM invariants.
const POVM_TOL: f64 = 1e-9;

/// A block code: `N` codeword sequences and a decoding POVM.
#[derive(Debug, Clone)]
pub struct Code {
    encoder: Vec<Vec<String>>,
    decoder: Vec<HermitianOperator>,
}

impl Code {
    /// Validates the POVM conditions: every `Y_i` is PSD and
    /// `sum_i Y_i <= I` within `1e-9`.
    pub fn new(encoder: Vec<Vec<String>>, decoder: Vec<HermitianOperator>) -> Result<Self> {
        if encoder.is_empty() || encoder.len() != decoder.len() {
            return Err(Error::DimensionMismatch {
                left: encoder.len(),
                right: decoder.len(),
            });
        }
        let n = encoder[0].len();
        if encoder.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidParameter(
                "codeword sequences must share one blocklength".into(),
            ));
        }
        let dim = decoder[0].dim();
        let mut total = HermitianOperator::zero(dim);
        for y in &decoder {
            if y.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: y.dim(),
                    right: dim,
                });
            }
            let min = y.min_eigenvalue();
            if min < -POVM_TOL {
                return Err(Error::NotPsd {
                    min_eigenvalue: min,
                });
            }
            total = &total + y;
        }
        let excess = (&total - &HermitianOperator::identity(dim))
            .eigenvalues()
            .last()
            .copied()
            .unwrap_or(0.0);
        if excess > POVM_TOL {
            return Err(Error::InvalidParameter(format!(
                "decoder sums above the identity by {excess:e}"
            )));
        }
        Ok(Self { encoder, decoder })
    }

    pub fn size(&self) -> usize {
        self.encoder.len()
    }

    pub fn blocklength(&self) -> usize {
        self.encoder[0].len()
    }

    pub fn encoder(&self) -> &[Vec<String>] {
        &self.encoder
    }

    pub fn decoder(&self) -> &[HermitianOperator] {
        &self.decoder
    }

    /// Exact average error probability over uniform messages.
    pub fn average_error(&self, channel: &CqChannel, tol: &Tolerances) -> Result<f64> {
        let mut states: HashMap<&[String], DensityMatrix> = HashMap::new();
        let mut miss = 0.0;
        for (seq, y) in self.encoder.iter().zip(&self.decoder) {
            let state = match states.get(seq.as_slice()) {
                Some(s) => s.clone(),
                None => {
                    let refs: Vec<&str> = seq.iter().map(|s| s.as_str()).collect();
                    let s = channel.sequence_state(&refs, tol)?;
                    states.insert(seq.as_slice(), s.clone());
                    s
                }
            };
            if state.dim() != y.dim() {
                return Err(Error::DimensionMismatch {
                    left: state.dim(),
                    right: y.dim(),
                });
            }
            miss += 1.0 - trace_product(&state, y);
        }
        Ok(miss / self.size() as f64)
    }
}

/// Square-root measurement over the given PSD pieces:
/// `Y_i = G^(-1/2) pi_i G^(-1/2)` with `G = sum_j pi_j`.
pub fn srm_decoder(
    pieces: &[HermitianOperator],
    tol: &Tolerances,
) -> Result<Vec<HermitianOperator>> {
    if pieces.is_empty() {
        return Err(Error::EmptyInput("square-root measurement over no pieces"));
    }
    let dim = pieces[0].dim();
    let mut gram = HermitianOperator::zero(dim);
    for p in pieces {
        gram = &gram + p;
    }
    let root = gram.inv_sqrt_with(tol)?;
    Ok(pieces.iter().map(|p| root.sandwich(p)).collect())
}

/// Likelihood-ratio decoder pieces
/// `pi_i = {W_{phi(i)} - e^{na} W_P^n > 0}` for a given encoder (the
/// `lemma3` decoder of the CLI).
pub fn lemma3_pieces(
    encoder: &[Vec<String>],
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    a: f64,
    tol: &Tolerances,
) -> Result<Vec<HermitianOperator>> {
    let sigma_n = channel.output_average(p)?.tensor_power(n, tol)?;
    let scaled = scaled_reference(&sigma_n, n, a)?;
    pieces_against(encoder, channel, &scaled, tol)
}

fn scaled_reference(sigma_n: &DensityMatrix, n: usize, a: f64) -> Result<HermitianOperator> {
    let na = n as f64 * a;
    let c = na.exp();
    if !c.is_finite() {
        return Err(Error::ThresholdOverflow { na });
    }
    Ok(sigma_n.scale(c))
}

fn pieces_against(
    encoder: &[Vec<String>],
    channel: &CqChannel,
    scaled_ref: &HermitianOperator,
    tol: &Tolerances,
) -> Result<Vec<HermitianOperator>> {
    let mut cache: HashMap<&[String], HermitianOperator> = HashMap::new();
    let mut out = Vec::with_capacity(encoder.len());
    for seq in encoder {
        if let Some(p) = cache.get(seq.as_slice()) {
            out.push(p.clone());
            continue;
        }
        let refs: Vec<&str> = seq.iter().map(|s| s.as_str()).collect();
        let w_seq = channel.sequence_state(&refs, tol)?;
        let piece =
            (w_seq.op() - scaled_ref).spectral_projection_with(Comparator::Greater, 0.0, tol);
        cache.insert(seq.as_slice(), piece.clone());
        out.push(piece);
    }
    Ok(out)
}

/// Holevo-Schumacher-Westmoreland decoder: square-root measurement over the
/// pieces `tau nu_i tau` with `tau = {W_P^n < e^{-nb}}` and
/// `nu_i = {W_{phi(i)} > e^{-nc}}`.
pub fn hsw_decoder(
    encoder: &[Vec<String>],
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    b: f64,
    c: f64,
    tol: &Tolerances,
) -> Result<Vec<HermitianOperator>> {
    let pieces = hsw_pieces(encoder, p, channel, n, b, c, tol)?;
    srm_decoder(&pieces, tol)
}

fn exp_neg(n: usize, rate: f64) -> Result<f64> {
    let v = (-(n as f64) * rate).exp();
    if !v.is_finite() {
        return Err(Error::ThresholdOverflow {
            na: -(n as f64) * rate,
        });
    }
    Ok(v)
}

/// The raw HSW pieces `tau nu_i tau` before square-root normalization.
pub fn hsw_pieces(
    encoder: &[Vec<String>],
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    b: f64,
    c: f64,
    tol: &Tolerances,
) -> Result<Vec<HermitianOperator>> {
    let sigma_n = channel.output_average(p)?.tensor_power(n, tol)?;
    let tau = sigma_n.spectral_projection_with(Comparator::Less, exp_neg(n, b)?, tol);
    let nu_threshold = exp_neg(n, c)?;
    let mut cache: HashMap<&[String], HermitianOperator> = HashMap::new();
    let mut out = Vec::with_capacity(encoder.len());
    for seq in encoder {
        if let Some(piece) = cache.get(seq.as_slice()) {
            out.push(piece.clone());
            continue;
        }
        let refs: Vec<&str> = seq.iter().map(|s| s.as_str()).collect();
        let w_seq = channel.sequence_state(&refs, tol)?;
        let nu = w_seq.spectral_projection_with(Comparator::Greater, nu_threshold, tol);
        let piece = tau.sandwich(&nu);
        cache.insert(seq.as_slice(), piece.clone());
        out.push(piece);
    }
    Ok(out)
}

/// Achievability bound of the random-coding lemma, both at a fixed trade-off
/// constant and at the optimal one.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DirectBound {
    /// Miss term `A = sum P^n(x^n) Tr[W_{x^n} {W_{x^n} - e^{na} W_P^n <= 0}]`.
    pub miss_term: f64,
    /// Collision term `B = e^{-na} N`.
    pub collision_term: f64,
    /// `(1+c) A + (2+c+1/c) B` at the requested `c`.
    pub at_c: f64,
    pub c: f64,
    /// `A + 2B + 2 sqrt(B(A+B))`, the minimum over `c`.
    pub optimal: f64,
    pub optimal_c: f64,
}

/// Evaluates `(1+c) A + (2+c+1/c) B` and its minimum over `c > 0`, reached
/// at `c = sqrt(B/(A+B))`.
pub fn direct_bound_rhs(
    miss_term: f64,
    n: usize,
    a: f64,
    code_size: usize,
    c: Option<f64>,
) -> Result<DirectBound> {
    let b = exp_neg(n, a)? * code_size as f64;
    let a_term = miss_term;
    let optimal = a_term + 2.0 * b + 2.0 * (b * (a_term + b)).sqrt();
    let optimal_c = if a_term + b > 0.0 {
        (b / (a_term + b)).sqrt()
    } else {
        1.0
    };
    let c = c.unwrap_or(optimal_c);
    let at_c = if c > 0.0 {
        (1.0 + c) * a_term + (2.0 + c + 1.0 / c) * b
    } else {
        f64::INFINITY
    };
    Ok(DirectBound {
        miss_term: a_term,
        collision_term: b,
        at_c,
        c,
        optimal,
        optimal_c,
    })
}

/// Which decoder a random-coding experiment builds per sampled encoder.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecoderKind {
    /// Square-root measurement over `{W_{phi(i)} - e^{na} W_P^n > 0}`.
    Lemma3 { a: f64 },
    /// Square-root measurement over `tau nu_i tau`.
    Hsw { b: f64, c: f64 },
}

/// Parameters of one random-coding experiment.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ExperimentSpec {
    pub n: usize,
    pub code_size: usize,
    pub trials: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
}

/// Sampling statistics of the budget-conditioned codeword distribution.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BudgetStats {
    /// Exact `K_n = P^n(allowed sequences)`, from the type-class sum.
    pub exact_kn: f64,
    /// Accepted fraction of the rejection sampler, an estimate of `K_n`.
    pub empirical_kn: f64,
    pub draws: u64,
    pub accepted: u64,
}

/// Outcome of a random-coding experiment.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RandomCodingReport {
    pub spec: ExperimentSpec,
    pub per_trial_pe: Vec<f64>,
    pub mean_pe: f64,
    pub min_pe: f64,
    pub std_error: f64,
    /// The analytic bound the sampled mean is compared against.
    pub bound_rhs: f64,
    pub bound: ExperimentBound,
    pub budget: Option<BudgetStats>,
}

/// Analytic bound attached to a random-coding experiment.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentBound {
    /// Unconstrained direct bound at the optimal trade-off constant.
    Direct(DirectBound),
    /// Budget-conditioned bound `(2 A + 4 B) / K_n` at `c = 1`.
    DirectCost {
        miss_term: f64,
        collision_term: f64,
        kn: f64,
    },
    /// `(3 T_out(b) + T_cond(c) + e^{-n(b-c)} N) / K_n`; `kn = 1` without a
    /// budget. Conditioning on the budget inflates each nonnegative term by
    /// at most `1 / K_n`.
    Hsw {
        output_term: f64,
        conditional_term: f64,
        cross_term: f64,
        kn: f64,
    },
}

impl ExperimentBound {
    pub fn value(&self) -> f64 {
        match self {
            ExperimentBound::Direct(d) => d.optimal,
            ExperimentBound::DirectCost {
                miss_term,
                collision_term,
                kn,
            } => (2.0 * miss_term + 4.0 * collision_term) / kn,
            ExperimentBound::Hsw {
                output_term,
                conditional_term,
                cross_term,
                kn,
            } => (output_term + conditional_term + cross_term) / kn,
        }
    }
}

/// Random-coding achievability bound of the HSW decoder:
/// `3 Tr[W_P^n {W_P^n >= e^{-nb}}] + sum_x P^n Tr[W_x^n {W_x^n <= e^{-nc}}]
///  + e^{-n(b-c)} N`.
pub fn hsw_random_bound(
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    b: f64,
    c: f64,
    code_size: usize,
    tol: &Tolerances,
) -> Result<ExperimentBound> {
    let output_term = 3.0 * entropy_tail(p, channel, n, b, EntropyTail::OutputLower, tol)?;
    let conditional_term = entropy_tail(p, channel, n, c, EntropyTail::ConditionalUpper, tol)?;
    let cross_term = exp_neg(n, b - c)? * code_size as f64;
    Ok(ExperimentBound::Hsw {
        output_term,
        conditional_term,
        cross_term,
        kn: 1.0,
    })
}

/// Exact `K_n = P^n({x^n : sum_i c(x_i) <= n gamma})` via type classes.
pub fn budget_probability(
    p: &FiniteDistribution,
    cost: &CostSpec,
    n: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let pred = cost.block_predicate(n);
    let mut acc = 0.0;
    for class in enumerate_type_classes(p, n, tol)? {
        if pred.accepts_counts(&class.counts)? {
            acc += class.class_probability(p);
        }
    }
    Ok(acc)
}

fn sample_codeword(
    stream: &mut Stream,
    support: &[&str],
    weights: &[f64],
    n: usize,
) -> Vec<String> {
    (0..n)
        .map(|_| support[stream.next_weighted(weights)].to_string())
        .collect()
}

/// Runs a random-coding experiment: encoders sampled i.i.d. from `P^n`
/// (conditioned on the budget when a cost spec is given, which simulates the
/// restricted distribution exactly), the decoder rebuilt per trial, the
/// error probability evaluated exactly.
///
/// Deterministic for a fixed seed; trial `i` draws from the stream
/// `(seed, i)` no matter how trials are scheduled.
pub fn random_coding_experiment(
    spec: &ExperimentSpec,
    p: &FiniteDistribution,
    channel: &CqChannel,
    cost: Option<&CostSpec>,
    tol: &Tolerances,
) -> Result<RandomCodingReport> {
    if spec.trials == 0 || spec.code_size == 0 {
        return Err(Error::EmptyInput("experiment needs trials and codewords"));
    }
    p.check_support(channel)?;

    let exact_kn = match cost {
        Some(cs) => {
            let kn = budget_probability(p, cs, spec.n, tol)?;
            if kn < 1e-9 {
                return Err(Error::InfeasibleBudget {
                    budget: cs.budget(),
                });
            }
            Some(kn)
        }
        None => None,
    };

    struct TrialOut {
        pe: Result<f64>,
        draws: u64,
        accepted: u64,
    }

    let run_trial = |trial: usize| -> TrialOut {
        let (encoder, draws, accepted) = match sample_encoder_counted(spec, p, trial, cost) {
            Ok(t) => t,
            Err(e) => {
                return TrialOut {
                    pe: Err(e),
                    draws: 0,
                    accepted: 0,
                }
            }
        };
        let pe = build_and_score(&encoder, spec, p, channel, tol);
        TrialOut {
            pe,
            draws,
            accepted,
        }
    };

    let outcomes = crate::parallel::map_indexed(spec.trials, None, run_trial);
    let mut per_trial_pe = Vec::with_capacity(spec.trials);
    let mut draws = 0u64;
    let mut accepted = 0u64;
    for o in outcomes {
        per_trial_pe.push(o.pe?);
        draws += o.draws;
        accepted += o.accepted;
    }

    let mean_pe = per_trial_pe.iter().sum::<f64>() / spec.trials as f64;
    let min_pe = per_trial_pe.iter().copied().fold(f64::INFINITY, f64::min);
    let std_error = if spec.trials > 1 {
        let var = per_trial_pe
            .iter()
            .map(|x| (x - mean_pe) * (x - mean_pe))
            .sum::<f64>()
            / (spec.trials - 1) as f64;
        (var / spec.trials as f64).sqrt()
    } else {
        0.0
    };

    let bound = match spec.decoder {
        DecoderKind::Lemma3 { a } => {
            let miss = 1.0 - info_tail(p, channel, spec.n, a, Comparator::Greater, tol)?;
            match exact_kn {
                Some(kn) => ExperimentBound::DirectCost {
                    miss_term: miss,
                    collision_term: exp_neg(spec.n, a)? * spec.code_size as f64,
                    kn,
                },
                None => ExperimentBound::Direct(direct_bound_rhs(
                    miss,
                    spec.n,
                    a,
                    spec.code_size,
                    None,
                )?),
            }
        }
        DecoderKind::Hsw { b, c } => {
            let mut bound = hsw_random_bound(p, channel, spec.n, b, c, spec.code_size, tol)?;
            if let (ExperimentBound::Hsw { kn, .. }, Some(exact)) = (&mut bound, exact_kn) {
                *kn = exact;
            }
            bound
        }
    };

    let budget = exact_kn.map(|kn| BudgetStats {
        exact_kn: kn,
        empirical_kn: accepted as f64 / draws.max(1) as f64,
        draws,
        accepted,
    });

    Ok(RandomCodingReport {
        spec: spec.clone(),
        bound_rhs: bound.value(),
        bound,
        per_trial_pe,
        mean_pe,
        min_pe,
        std_error,
        budget,
    })
}

fn build_and_score(
    encoder: &[Vec<String>],
    spec: &ExperimentSpec,
    p: &FiniteDistribution,
    channel: &CqChannel,
    tol: &Tolerances,
) -> Result<f64> {
    let code = build_code(encoder.to_vec(), spec, p, channel, tol)?;
    code.average_error(channel, tol)
}

/// Builds the code a sampled encoder induces, for callers that need the code
/// itself rather than just its error probability.
pub fn build_code(
    encoder: Vec<Vec<String>>,
    spec: &ExperimentSpec,
    p: &FiniteDistribution,
    channel: &CqChannel,
    tol: &Tolerances,
) -> Result<Code> {
    let pieces = match spec.decoder {
        DecoderKind::Lemma3 { a } => lemma3_pieces(&encoder, p, channel, spec.n, a, tol)?,
        DecoderKind::Hsw { b, c } => hsw_pieces(&encoder, p, channel, spec.n, b, c, tol)?,
    };
    let decoder = srm_decoder(&pieces, tol)?;
    Code::new(encoder, decoder)
}

/// Samples the encoder of trial `trial` of an experiment without scoring it.
pub fn sample_encoder(
    spec: &ExperimentSpec,
    p: &FiniteDistribution,
    trial: usize,
    cost: Option<&CostSpec>,
) -> Result<Vec<Vec<String>>> {
    sample_encoder_counted(spec, p, trial, cost).map(|(e, _, _)| e)
}

fn sample_encoder_counted(
    spec: &ExperimentSpec,
    p: &FiniteDistribution,
    trial: usize,
    cost: Option<&CostSpec>,
) -> Result<(Vec<Vec<String>>, u64, u64)> {
    let support = p.support();
    let weights: Vec<f64> = support.iter().map(|l| p.probability(l)).collect();
    let mut stream = Stream::new(spec.seed, trial as u64);
    let mut encoder = Vec::with_capacity(spec.code_size);
    let mut draws = 0u64;
    let mut accepted = 0u64;
    for _ in 0..spec.code_size {
        loop {
            let seq = sample_codeword(&mut stream, &support, &weights, spec.n);
            draws += 1;
            let ok = match cost {
                Some(cs) => {
                    let refs: Vec<&str> = seq.iter().map(|s| s.as_str()).collect();
                    cs.block_predicate(spec.n).accepts(&refs)?
                }
                None => true,
            };
            if ok {
                accepted += 1;
                encoder.push(seq);
                break;
            }
            if draws > 1_000_000 {
                return Err(Error::InfeasibleBudget {
                    budget: cost.map(|c| c.budget()).unwrap_or(f64::NAN),
                });
            }
        }
    }
    Ok((encoder, draws, accepted))
}

/// Comparison of a code against the converse lower bound
/// `P_e >= sum_x P_emp(x^n) Tr[W_{x^n} {W_{x^n} - e^{na} sigma^n <= 0}]
///        - e^{na} / N`
/// with the empirical distribution of the codewords. The slack must be
/// nonnegative for every code; a violation is a bug, not a tolerance issue.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConverseReport {
    pub pe: f64,
    pub tail_term: f64,
    pub penalty: f64,
    pub rhs: f64,
    /// `pe - rhs`.
    pub slack: f64,
}

pub fn converse_check(
    code: &Code,
    channel: &CqChannel,
    sigma_n: &HermitianOperator,
    a: f64,
    tol: &Tolerances,
) -> Result<ConverseReport> {
    let n = code.blocklength();
    let na = n as f64 * a;
    let c = na.exp();
    if !c.is_finite() {
        return Err(Error::ThresholdOverflow { na });
    }
    let scaled = sigma_n.scale(c);
    let mut cache: HashMap<&[String], f64> = HashMap::new();
    let mut tail_term = 0.0;
    for seq in code.encoder() {
        let t = match cache.get(seq.as_slice()) {
            Some(&t) => t,
            None => {
                let refs: Vec<&str> = seq.iter().map(|s| s.as_str()).collect();
                let w_seq = channel.sequence_state(&refs, tol)?;
                let proj =
                    (w_seq.op() - &scaled).spectral_projection_with(Comparator::LessEq, 0.0, tol);
                let t = trace_product(&w_seq, &proj);
                cache.insert(seq.as_slice(), t);
                t
            }
        };
        tail_term += t / code.size() as f64;
    }
    let penalty = c / code.size() as f64;
    let rhs = tail_term - penalty;
    let pe = code.average_error(channel, tol)?;
    Ok(ConverseReport {
        pe,
        tail_term,
        penalty,
        rhs,
        slack: pe - rhs,
    })
}

/// Block test family for the hypothesis-testing code construction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SteinTestFamily {
    /// `T_{x^n} = {W_{x^n} - e^{na} W_P^n > 0}`.
    Natural { a: f64 },
    /// `T_{x^n} = I` (vacuous second term).
    Identity,
    /// `T_{x^n} = 0` (vacuous first term).
    Zero,
}

/// Outcome of the hypothesis-testing random-coding experiment.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SteinReport {
    pub trials: usize,
    pub seed: u64,
    pub mean_pe: f64,
    pub min_pe: f64,
    pub std_error: f64,
    /// `2 (1 - Tr[R^n T])`.
    pub miss_term: f64,
    /// `4 N Tr[S^n T]`.
    pub confusion_term: f64,
    pub rhs: f64,
}

/// Random coding through a block test `T^(n) = (+)_{x^n} T_{x^n}`: each
/// sampled encoder decodes with the square-root measurement over
/// `T_{phi(i)}`, and the sampled mean error is compared against
/// `2 (1 - Tr[R^n T]) + 4 N Tr[S^n T]`.
#[allow(clippy::too_many_arguments)]
pub fn stein_code_bound(
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    code_size: usize,
    trials: usize,
    seed: u64,
    family: SteinTestFamily,
    tol: &Tolerances,
) -> Result<SteinReport> {
    p.check_support(channel)?;
    let sigma_n = channel.output_average(p)?.tensor_power(n, tol)?;
    let scaled = match family {
        SteinTestFamily::Natural { a } => Some(scaled_reference(&sigma_n, n, a)?),
        _ => None,
    };
    let dim = sigma_n.dim();
    let test_for = |w_seq: &DensityMatrix| -> HermitianOperator {
        match family {
            SteinTestFamily::Natural { .. } => (w_seq.op()
                - scaled.as_ref().expect("scaled reference"))
            .spectral_projection_with(Comparator::Greater, 0.0, tol),
            SteinTestFamily::Identity => HermitianOperator::identity(dim),
            SteinTestFamily::Zero => HermitianOperator::zero(dim),
        }
    };

    // Expected test performance under the two block hypotheses, via type
    // classes (both reference operators are permutation invariant).
    let mut hit = 0.0;
    let mut false_alarm = 0.0;
    for class in enumerate_type_classes(p, n, tol)? {
        let refs = class.representative_refs();
        let w_seq = channel.sequence_state(&refs, tol)?;
        let t = test_for(&w_seq);
        let prob = class.class_probability(p);
        hit += prob * trace_product(&w_seq, &t);
        false_alarm += prob * trace_product(&sigma_n, &t);
    }
    let miss_term = 2.0 * (1.0 - hit);
    let confusion_term = 4.0 * code_size as f64 * false_alarm;

    let support = p.support();
    let weights: Vec<f64> = support.iter().map(|l| p.probability(l)).collect();
    let per_trial = crate::parallel::map_indexed(trials, None, |trial| -> Result<f64> {
        let mut stream = Stream::new(seed, trial as u64);
        let mut cache: HashMap<Vec<String>, (DensityMatrix, HermitianOperator)> = HashMap::new();
        let mut encoder = Vec::with_capacity(code_size);
        for _ in 0..code_size {
            let seq = sample_codeword(&mut stream, &support, &weights, n);
            if !cache.contains_key(&seq) {
                let refs: Vec<&str> = seq.iter().map(|s| s.as_str()).collect();
                let w_seq = channel.sequence_state(&refs, tol)?;
                let t = test_for(&w_seq);
                cache.insert(seq.clone(), (w_seq, t));
            }
            encoder.push(seq);
        }
        let pieces: Vec<HermitianOperator> =
            encoder.iter().map(|s| cache[s].1.clone()).collect();
        let decoder = srm_decoder(&pieces, tol)?;
        let mut miss = 0.0;
        for (seq, y) in encoder.iter().zip(&decoder) {
            miss += 1.0 - trace_product(&cache[seq].0, y);
        }
        Ok(miss / code_size as f64)
    });

    let mut pes = Vec::with_capacity(trials);
    for r in per_trial {
        pes.push(r?);
    }
    let mean_pe = pes.iter().sum::<f64>() / trials as f64;
    let min_pe = pes.iter().copied().fold(f64::INFINITY, f64::min);
    let std_error = if trials > 1 {
        let var = pes
            .iter()
            .map(|x| (x - mean_pe) * (x - mean_pe))
            .sum::<f64>()
            / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    } else {
        0.0
    };

    Ok(SteinReport {
        trials,
        seed,
        mean_pe,
        min_pe,
        std_error,
        miss_term,
        confusion_term,
        rhs: miss_term + confusion_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{max_entry_diff, random_state};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn orthogonal_channel() -> CqChannel {
        CqChannel::new(vec![
            ("x0".into(), DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap()),
            ("x1".into(), DensityMatrix::from_diagonal(&[0.0, 1.0]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn average_error_trivial_codes() {
        let ch = orthogonal_channel();
        // Single message decoded by the identity: never errs.
        let code = Code::new(
            vec![vec!["x0".into()]],
            vec![HermitianOperator::identity(2)],
        )
        .unwrap();
        assert!(code.average_error(&ch, &tol()).unwrap().abs() < 1e-12);

        // Orthogonal codewords with the projective decoder: never errs.
        let code = Code::new(
            vec![vec!["x0".into()], vec!["x1".into()]],
            vec![
                HermitianOperator::from_diagonal(&[1.0, 0.0]),
                HermitianOperator::from_diagonal(&[0.0, 1.0]),
            ],
        )
        .unwrap();
        assert!(code.average_error(&ch, &tol()).unwrap().abs() < 1e-12);

        // Y_1 = Y_2 = I/2 guesses blindly: error exactly 1/2.
        let code = Code::new(
            vec![vec!["x0".into()], vec!["x1".into()]],
            vec![
                HermitianOperator::identity(2).scale(0.5),
                HermitianOperator::identity(2).scale(0.5),
            ],
        )
        .unwrap();
        assert!((code.average_error(&ch, &tol()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn code_rejects_oversized_povm() {
        let r = Code::new(
            vec![vec!["x0".into()], vec!["x1".into()]],
            vec![
                HermitianOperator::identity(2),
                HermitianOperator::identity(2).scale(0.5),
            ],
        );
        assert!(r.is_err());
    }

    #[test]
    fn srm_fixes_orthogonal_projections() {
        let p0 = HermitianOperator::from_diagonal(&[1.0, 0.0, 0.0]);
        let p1 = HermitianOperator::from_diagonal(&[0.0, 1.0, 0.0]);
        let ys = srm_decoder(&[p0.clone(), p1.clone()], &tol()).unwrap();
        assert!(max_entry_diff(&ys[0], &p0) < 1e-9);
        assert!(max_entry_diff(&ys[1], &p1) < 1e-9);
    }

    #[test]
    fn srm_single_piece_is_range_projection() {
        let pi = crate::testutil::random_psd_rank(4, 2, 33);
        let ys = srm_decoder(&[pi.clone()], &tol()).unwrap();
        let range = pi.support_projection().unwrap();
        assert!(max_entry_diff(&ys[0], &range) < 1e-8);
    }

    #[test]
    fn srm_total_is_range_projection_of_sum() {
        let pieces: Vec<HermitianOperator> = (0..3)
            .map(|i| crate::testutil::random_psd_rank(4, 2, 100 + i))
            .collect();
        let ys = srm_decoder(&pieces, &tol()).unwrap();
        let mut total = HermitianOperator::zero(4);
        for y in &ys {
            total = &total + y;
        }
        let mut gram = HermitianOperator::zero(4);
        for p in &pieces {
            gram = &gram + p;
        }
        let range = gram.support_projection().unwrap();
        assert!(max_entry_diff(&total, &range) < 1e-8);
        // In particular sum Y <= I.
        let excess = (&total - &HermitianOperator::identity(4))
            .eigenvalues()
            .last()
            .copied()
            .unwrap();
        assert!(excess <= 1e-9);
    }

    #[test]
    fn lemma3_pieces_extremes() {
        let ch = orthogonal_channel();
        let p = FiniteDistribution::uniform(["x0", "x1"]).unwrap();
        let enc = vec![vec!["x0".into()], vec!["x1".into()]];

        // Far above any likelihood ratio: all pieces vanish, P_e = 1.
        let pieces = lemma3_pieces(&enc, &p, &ch, 1, 400.0, &tol()).unwrap();
        for piece in &pieces {
            assert!(max_entry_diff(piece, &HermitianOperator::zero(2)) < 1e-12);
        }
        let decoder = srm_decoder(&pieces, &tol()).unwrap();
        let code = Code::new(enc.clone(), decoder).unwrap();
        assert!((code.average_error(&ch, &tol()).unwrap() - 1.0).abs() < 1e-12);

        // Identical codewords give identical pieces.
        let enc2 = vec![vec!["x0".into()], vec!["x0".into()]];
        let pieces = lemma3_pieces(&enc2, &p, &ch, 1, 0.1, &tol()).unwrap();
        assert!(max_entry_diff(&pieces[0], &pieces[1]) < 1e-12);
    }

    #[test]
    fn lemma3_piece_matches_direct_projection() {
        let ch = CqChannel::new(vec![
            ("a".into(), random_state(2, 51)),
            ("b".into(), random_state(2, 52)),
        ])
        .unwrap();
        let p = FiniteDistribution::from_pairs(&[("a", 0.6), ("b", 0.4)]).unwrap();
        let a = 0.2;
        let enc = vec![vec!["a".into()]];
        let piece = lemma3_pieces(&enc, &p, &ch, 1, a, &tol())
            .unwrap()
            .remove(0);
        let sigma = ch.output_average(&p).unwrap();
        let direct = (ch.state("a").unwrap().op() - &sigma.scale(a.exp()))
            .spectral_projection(Comparator::Greater, 0.0);
        assert!(max_entry_diff(&piece, &direct) < 1e-12);
    }

    #[test]
    fn direct_bound_values() {
        // A = 0, B = 1 at the optimal c: 0 + 2 + 2 = 4.
        let b = direct_bound_rhs(0.0, 1, 0.0, 1, None).unwrap();
        assert!((b.optimal - 4.0).abs() < 1e-12);

        // Fixed c = 1, A = 0.1, B = 0.01: 2*0.1 + 4*0.01 = 0.24.
        let n = 2;
        let a = -(0.01f64 / 2.0).ln() / n as f64; // e^{-na} * N = 0.01 at N = 2
        let b = direct_bound_rhs(0.1, n, a, 2, Some(1.0)).unwrap();
        assert!((b.at_c - 0.24).abs() < 1e-12, "{}", b.at_c);
        // Optimized never exceeds any fixed c.
        for c in [0.05, 0.3, 1.0, 2.5, 20.0] {
            let fixed = direct_bound_rhs(0.1, n, a, 2, Some(c)).unwrap();
            assert!(b.optimal <= fixed.at_c + 1e-12);
        }
    }

    #[test]
    fn hsw_pieces_threshold_extremes() {
        let ch = CqChannel::new(vec![
            ("a".into(), random_state(2, 61)),
            ("b".into(), random_state(2, 62)),
        ])
        .unwrap();
        let p = FiniteDistribution::uniform(["a", "b"]).unwrap();
        let enc = vec![vec!["a".into()], vec!["b".into()]];
        let n = 1;

        // Threshold far above the spectrum (b very negative): tau = I and
        // the pieces reduce to the nu projections alone.
        let sigma = ch.output_average(&p).unwrap();
        let tau = sigma.spectral_projection(Comparator::Less, 50f64.exp());
        assert!(max_entry_diff(&tau, &HermitianOperator::identity(2)) < 1e-12);
        let pieces = hsw_pieces(&enc, &p, &ch, n, -50.0, 30.0, &tol()).unwrap();
        for (seq, piece) in enc.iter().zip(&pieces) {
            let state = ch.state(&seq[0]).unwrap();
            let nu =
                state.spectral_projection(Comparator::Greater, (-(n as f64) * 30.0).exp());
            assert!(max_entry_diff(piece, &nu) < 1e-12);
        }

        // c large: nu becomes the support projector (identity at full rank).
        let state = ch.state("a").unwrap();
        let nu = state.spectral_projection(Comparator::Greater, (-(n as f64) * 200.0).exp());
        assert!(max_entry_diff(&nu, &HermitianOperator::identity(2)) < 1e-12);
    }

    #[test]
    fn single_message_experiment_decodes_reliably() {
        let ch = CqChannel::new(vec![
            ("a".into(), random_state(2, 81)),
            ("b".into(), random_state(2, 82)),
        ])
        .unwrap();
        let p = FiniteDistribution::uniform(["a", "b"]).unwrap();
        let spec = ExperimentSpec {
            n: 2,
            code_size: 1,
            trials: 30,
            seed: 4,
            decoder: DecoderKind::Lemma3 { a: -20.0 },
        };
        // With a far below the likelihood scale the single decoder element
        // covers the codeword support, so decoding almost never fails.
        let report = random_coding_experiment(&spec, &p, &ch, None, &tol()).unwrap();
        assert!(report.mean_pe < 1e-9, "mean {}", report.mean_pe);
    }

    #[test]
    fn hsw_bound_edges() {
        let ch = orthogonal_channel();
        let p = FiniteDistribution::uniform(["x0", "x1"]).unwrap();
        // b <= c makes the cross term at least N: vacuous.
        let vac = hsw_random_bound(&p, &ch, 3, 0.2, 0.5, 2, &tol()).unwrap();
        assert!(vac.value() >= 2.0 - 1e-12);

        // Pure-state channel, b just below the output entropy rate, c just
        // above zero: the entropy tails vanish and only the cross term is
        // left, which is well below 1 at moderate n.
        let good = hsw_random_bound(&p, &ch, 8, 0.6, 0.05, 2, &tol()).unwrap();
        assert!(good.value() < 0.05, "bound {}", good.value());

        // Monotone increasing in the code size.
        let mut last = 0.0;
        for n_codes in [1, 2, 4, 8] {
            let b = hsw_random_bound(&p, &ch, 4, 0.5, 0.1, n_codes, &tol()).unwrap();
            assert!(b.value() >= last - 1e-15);
            last = b.value();
        }
    }

    #[test]
    fn experiment_identical_states_cannot_beat_half() {
        let s = random_state(2, 71);
        let ch = CqChannel::new(vec![("a".into(), s.clone()), ("b".into(), s)]).unwrap();
        let p = FiniteDistribution::uniform(["a", "b"]).unwrap();
        let spec = ExperimentSpec {
            n: 2,
            code_size: 2,
            trials: 20,
            seed: 5,
            decoder: DecoderKind::Lemma3 { a: 0.05 },
        };
        let report = random_coding_experiment(&spec, &p, &ch, None, &tol()).unwrap();
        assert!(report.mean_pe >= 0.5 - 1e-9, "mean {}", report.mean_pe);
    }

    #[test]
    fn experiment_is_reproducible() {
        let ch = orthogonal_channel();
        let p = FiniteDistribution::uniform(["x0", "x1"]).unwrap();
        let spec = ExperimentSpec {
            n: 2,
            code_size: 2,
            trials: 8,
            seed: 42,
            decoder: DecoderKind::Lemma3 { a: 0.3 },
        };
        let r1 = random_coding_experiment(&spec, &p, &ch, None, &tol()).unwrap();
        let r2 = random_coding_experiment(&spec, &p, &ch, None, &tol()).unwrap();
        assert_eq!(r1.per_trial_pe, r2.per_trial_pe);
    }

    #[test]
    fn experiment_orthogonal_channel_decodes_well() {
        let ch = orthogonal_channel();
        let p = FiniteDistribution::uniform(["x0", "x1"]).unwrap();
        let spec = ExperimentSpec {
            n: 2,
            code_size: 2,
            trials: 50,
            seed: 9,
            decoder: DecoderKind::Lemma3 { a: 0.5 },
        };
        let report = random_coding_experiment(&spec, &p, &ch, None, &tol()).unwrap();
        assert!(report.mean_pe <= report.bound_rhs + 3.0 * report.std_error + 1e-9);
        assert!(report.min_pe <= report.bound_rhs + 1e-9);
    }

    #[test]
    fn budget_probability_exact_binary() {
        let p = FiniteDistribution::from_pairs(&[("z", 0.5), ("o", 0.5)]).unwrap();
        let cost = CostSpec::from_pairs(&[("z", 0.0), ("o", 1.0)], 0.5);
        // n = 4: at most 2 ones among 4 fair bits: (1+4+6)/16.
        let kn = budget_probability(&p, &cost, 4, &tol()).unwrap();
        assert!((kn - 11.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn cost_constrained_sampling_respects_budget() {
        let ch = orthogonal_channel();
        let p = FiniteDistribution::from_pairs(&[("x0", 0.5), ("x1", 0.5)]).unwrap();
        let cost = CostSpec::from_pairs(&[("x0", 0.0), ("x1", 1.0)], 0.5);
        let spec = ExperimentSpec {
            n: 3,
            code_size: 4,
            trials: 30,
            seed: 77,
            decoder: DecoderKind::Lemma3 { a: 0.2 },
        };
        let report = random_coding_experiment(&spec, &p, &ch, Some(&cost), &tol()).unwrap();
        let stats = report.budget.expect("budget stats present");
        assert!(stats.exact_kn > 0.0);
        assert!((stats.empirical_kn - stats.exact_kn).abs() < 0.15);

        // And the sampled codewords really do satisfy the budget.
        for trial in 0..spec.trials {
            let enc = sample_encoder(&spec, &p, trial, Some(&cost)).unwrap();
            for seq in &enc {
                let refs: Vec<&str> = seq.iter().map(|s| s.as_str()).collect();
                assert!(cost.block_predicate(spec.n).accepts(&refs).unwrap());
            }
        }
    }

    #[test]
    fn converse_trivial_directions() {
        let ch = orthogonal_channel();
        let p = FiniteDistribution::uniform(["x0", "x1"]).unwrap();
        let spec = ExperimentSpec {
            n: 2,
            code_size: 2,
            trials: 1,
            seed: 3,
            decoder: DecoderKind::Lemma3 { a: 0.3 },
        };
        let enc = sample_encoder(&spec, &p, 0, None).unwrap();
        let code = build_code(enc, &spec, &p, &ch, &tol()).unwrap();
        let sigma_n = ch
            .output_average(&p)
            .unwrap()
            .tensor_power(2, &tol())
            .unwrap();

        // a very negative: tail term ~ 0, trivially below P_e.
        let low = converse_check(&code, &ch, &sigma_n, -100.0, &tol()).unwrap();
        assert!(low.slack >= -1e-9);
        // a large: penalty dominates, RHS < 0.
        let hi = converse_check(&code, &ch, &sigma_n, 5.0, &tol()).unwrap();
        assert!(hi.rhs < 0.0);
        assert!(hi.slack >= -1e-9);
    }

    #[test]
    fn stein_vacuous_tests() {
        let ch = orthogonal_channel();
        let p = FiniteDistribution::uniform(["x0", "x1"]).unwrap();
        let identity =
            stein_code_bound(&p, &ch, 2, 2, 5, 1, SteinTestFamily::Identity, &tol()).unwrap();
        assert!((identity.confusion_term - 8.0).abs() < 1e-9);
        assert!(identity.rhs >= 1.0);

        let zero =
            stein_code_bound(&p, &ch, 2, 2, 5, 1, SteinTestFamily::Zero, &tol()).unwrap();
        assert!((zero.miss_term - 2.0).abs() < 1e-12);
        assert!((zero.mean_pe - 1.0).abs() < 1e-12);
        assert!(zero.rhs >= 2.0 - 1e-12);
    }
}
