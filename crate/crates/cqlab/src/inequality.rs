//! Randomized and adversarial verification of the operator inequalities the
//! coding bounds rest on.
//!
//! Each check returns a signed margin or slack; the inequalities are exact
//! theorems, so any value materially below zero (beyond eigensolver
//! roundoff) is a release-blocking bug and gets shrunk to a small witness.

use nalgebra::Complex;
use serde_json::json;

use crate::capacity::tr_power_pair;
use crate::channel::{CqChannel, FiniteDistribution};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::operator::{trace_product, CMat, Comparator, DensityMatrix, HermitianOperator};
use crate::rng::Stream;

/// Margin floor: slack below this at dims <= 16 indicates a genuine bug,
/// not roundoff.
pub const MARGIN_FLOOR: f64 = -1e-8;

/// Key operator inequality behind the square-root-measurement analysis:
/// for `0 <= S <= I`, `T >= 0`, `c > 0`,
///
/// ```text
/// I - sqrt(S+T)^-1 S sqrt(S+T)^-1  <=  (1+c)(I-S) + (2+c+1/c) T.
/// ```
///
/// Returns the minimum eigenvalue of `RHS - LHS`.
pub fn key_inequality_margin(
    s: &HermitianOperator,
    t: &HermitianOperator,
    c: f64,
    tol: &Tolerances,
) -> Result<f64> {
    check_contraction(s, tol)?;
    check_psd(t, tol)?;
    if c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "key inequality needs c > 0, got {c}"
        )));
    }
    key_inequality_margin_unchecked(s, t, c, 2.0 + c + 1.0 / c, tol)
}

fn key_inequality_margin_unchecked(
    s: &HermitianOperator,
    t: &HermitianOperator,
    c: f64,
    cross_coefficient: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let dim = s.dim();
    let root = (s + t).inv_sqrt_with(tol)?;
    let lhs = &HermitianOperator::identity(dim) - &root.sandwich(s);
    let id_minus_s = &HermitianOperator::identity(dim) - s;
    let rhs = &id_minus_s.scale(1.0 + c) + &t.scale(cross_coefficient);
    Ok((&rhs - &lhs).min_eigenvalue())
}

/// Quantum Neyman-Pearson comparison: for self-adjoint `A` and `0 <= T <= I`,
/// `Tr[A T] <= Tr[A {A > 0}]`. Returns the slack.
///
/// The textbook statement assumes `A >= 0` (where it is immediate); the
/// converse argument applies it to differences of states, so the
/// self-adjoint form is what is implemented and verified here.
pub fn neyman_pearson_slack(
    a: &HermitianOperator,
    t: &HermitianOperator,
    tol: &Tolerances,
) -> Result<f64> {
    check_contraction(t, tol)?;
    let proj = a.spectral_projection_with(Comparator::Greater, 0.0, tol);
    Ok(trace_product(a, &proj) - trace_product(a, t))
}

/// Tail-vs-moment inequality: for states `rho`, `sigma`, `c > 0` and
/// `0 <= s <= 1`, `Tr[rho {rho - c sigma > 0}] <= c^-s Tr[rho^{1+s} sigma^-s]`.
/// Returns the slack; infinite when the moment side is infinite (the
/// inequality is then trivially true).
pub fn ogawa_nagaoka_slack(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    c: f64,
    s: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if c <= 0.0 || !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and 0 <= s <= 1, got c = {c}, s = {s}"
        )));
    }
    let lhs = {
        let diff = rho.op() - &sigma.scale(c);
        let proj = diff.spectral_projection_with(Comparator::Greater, 0.0, tol);
        trace_product(rho, &proj)
    };
    let moment = tr_power_pair(
        &rho.spectral_decompose(),
        &sigma.spectral_decompose(),
        s,
        tol,
    );
    if moment.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(c.powf(-s) * moment - lhs)
}

/// Projection-sandwich inequality: for a state `rho` and projections
/// `nu, tau` with `[rho, nu] = 0`,
/// `Tr[rho tau nu tau] >= Tr[rho nu] - 2 Tr[rho (I - tau)]`.
/// Returns the slack.
pub fn tau_nu_slack(
    rho: &DensityMatrix,
    nu: &HermitianOperator,
    tau: &HermitianOperator,
    tol: &Tolerances,
) -> Result<f64> {
    let comm = (rho.matrix() * nu.matrix()) - (nu.matrix() * rho.matrix());
    let defect = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "rho and nu must commute, defect {defect:e}"
        )));
    }
    let _ = tol;
    let lhs = trace_product(rho, &tau.sandwich(nu));
    let keep = trace_product(rho, nu);
    let outside = 1.0 - trace_product(rho, tau);
    Ok(lhs - keep + 2.0 * outside)
}

/// Cross-term bound for the HSW analysis: with `tau = {W_P^n < e^{-nb}}` and
/// `nu = {W_{x^n} > e^{-nc}}`, `Tr[W_P^n tau nu tau] <= e^{-n(b-c)}`.
/// Returns the slack.
pub fn cross_term_slack(
    p: &FiniteDistribution,
    channel: &CqChannel,
    n: usize,
    b: f64,
    c: f64,
    sequence: &[&str],
    tol: &Tolerances,
) -> Result<f64> {
    let sigma_n = channel.output_average(p)?.tensor_power(n, tol)?;
    let tau = sigma_n.spectral_projection_with(Comparator::Less, exp_neg(n, b)?, tol);
    let w_seq = channel.sequence_state(sequence, tol)?;
    let nu = w_seq.spectral_projection_with(Comparator::Greater, exp_neg(n, c)?, tol);
    let lhs = trace_product(&sigma_n, &tau.sandwich(&nu));
    Ok(exp_neg(n, b - c)? - lhs)
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

fn check_psd(t: &HermitianOperator, tol: &Tolerances) -> Result<()> {
    let min = t.min_eigenvalue();
    if min < -tol.psd {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

fn check_contraction(s: &HermitianOperator, tol: &Tolerances) -> Result<()> {
    let ev = s.eigenvalues();
    let min = ev[0];
    let max = ev[ev.len() - 1];
    if min < -tol.psd || max > 1.0 + tol.psd {
        return Err(Error::InvalidParameter(format!(
            "operator spectrum [{min}, {max}] leaves [0, 1]"
        )));
    }
    Ok(())
}

/// Which inequality family a suite run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    Lemma2,
    NeymanPearson,
    OgawaNagaoka,
    TauNu,
    CrossTerm,
}

impl SuiteKind {
    pub const ALL: &'static [SuiteKind] = &[
        SuiteKind::Lemma2,
        SuiteKind::NeymanPearson,
        SuiteKind::OgawaNagaoka,
        SuiteKind::TauNu,
        SuiteKind::CrossTerm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteKind::Lemma2 => "lemma2",
            SuiteKind::NeymanPearson => "neyman-pearson",
            SuiteKind::OgawaNagaoka => "ogawa-nagaoka",
            SuiteKind::TauNu => "tau-nu",
            SuiteKind::CrossTerm => "cross-term",
        }
    }

    pub fn parse(s: &str) -> Option<SuiteKind> {
        SuiteKind::ALL.iter().copied().find(|k| k.as_str() == s)
    }

    /// Slack floor below which an instance counts as a violation.
    pub fn margin_floor(self) -> f64 {
        match self {
            SuiteKind::Lemma2 => MARGIN_FLOOR,
            SuiteKind::NeymanPearson | SuiteKind::OgawaNagaoka | SuiteKind::TauNu => -1e-9,
            SuiteKind::CrossTerm => -1e-12,
        }
    }
}

/// One sampled operand set with its computed margin.
#[derive(Debug, Clone)]
pub struct InequalityInstance {
    pub kind: SuiteKind,
    pub seed: u64,
    pub index: u64,
    pub dim: usize,
    pub margin: f64,
    pub operands: Operands,
}

/// Operand sets per inequality family.
#[derive(Debug, Clone)]
pub enum Operands {
    KeyInequality {
        s: HermitianOperator,
        t: HermitianOperator,
        c: f64,
    },
    NeymanPearson {
        a: HermitianOperator,
        t: HermitianOperator,
    },
    OgawaNagaoka {
        rho: DensityMatrix,
        sigma: DensityMatrix,
        c: f64,
        s: f64,
    },
    TauNu {
        rho: DensityMatrix,
        nu: HermitianOperator,
        tau: HermitianOperator,
    },
    CrossTerm {
        channel: CqChannel,
        p: FiniteDistribution,
        n: usize,
        b: f64,
        c: f64,
        sequence: Vec<String>,
    },
}

/// Deliberate corruption of an inequality constant, for negative-control
/// tests of the failure path. `shrink_rhs` scales the dominating side down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defect {
    pub shrink_rhs: f64,
}

/// Evaluates the instance margin, optionally under an injected defect.
pub fn evaluate(op: &Operands, defect: Option<Defect>, tol: &Tolerances) -> Result<f64> {
    let scale = defect.map_or(1.0, |d| d.shrink_rhs);
    match op {
        Operands::KeyInequality { s, t, c } => {
            if scale == 1.0 {
                key_inequality_margin(s, t, *c, tol)
            } else {
                // Corrupt the cross coefficient only.
                check_contraction(s, tol)?;
                check_psd(t, tol)?;
                key_inequality_margin_unchecked(s, t, *c, scale * (2.0 + c + 1.0 / c), tol)
            }
        }
        Operands::NeymanPearson { a, t } => {
            let slack = neyman_pearson_slack(a, t, tol)?;
            if scale == 1.0 {
                Ok(slack)
            } else {
                let dominant = {
                    let proj = a.spectral_projection_with(Comparator::Greater, 0.0, tol);
                    trace_product(a, &proj)
                };
                Ok(slack - (1.0 - scale) * dominant)
            }
        }
        Operands::OgawaNagaoka { rho, sigma, c, s } => {
            let slack = ogawa_nagaoka_slack(rho, sigma, *c, *s, tol)?;
            if scale == 1.0 || slack.is_infinite() {
                Ok(slack)
            } else {
                let diff = rho.op() - &sigma.scale(*c);
                let proj = diff.spectral_projection_with(Comparator::Greater, 0.0, tol);
                let lhs = trace_product(rho, &proj);
                Ok(scale * (slack + lhs) - lhs)
            }
        }
        Operands::TauNu { rho, nu, tau } => {
            let slack = tau_nu_slack(rho, nu, tau, tol)?;
            if scale == 1.0 {
                Ok(slack)
            } else {
                let outside = 1.0 - trace_product(rho, tau);
                Ok(slack - (1.0 - scale) * 2.0 * outside)
            }
        }
        Operands::CrossTerm {
            channel,
            p,
            n,
            b,
            c,
            sequence,
        } => {
            let refs: Vec<&str> = sequence.iter().map(|s| s.as_str()).collect();
            let slack = cross_term_slack(p, channel, *n, *b, *c, &refs, tol)?;
            if scale == 1.0 {
                Ok(slack)
            } else {
                let rhs = exp_neg(*n, b - c)?;
                Ok(slack - (1.0 - scale) * rhs)
            }
        }
    }
}

fn random_hermitian(rng: &mut Stream, dim: usize) -> HermitianOperator {
    let g = CMat::from_fn(dim, dim, |_, _| {
        Complex::new(rng.next_normal(), rng.next_normal())
    });
    HermitianOperator::hermitian_part(g)
}

fn random_psd(rng: &mut Stream, dim: usize, rank: usize) -> HermitianOperator {
    let g = CMat::from_fn(dim, rank.max(1), |_, _| {
        Complex::new(rng.next_normal(), rng.next_normal())
    });
    HermitianOperator::hermitian_part(&g * g.adjoint())
}

fn random_density(rng: &mut Stream, dim: usize, rank: usize) -> DensityMatrix {
    let h = random_psd(rng, dim, rank);
    DensityMatrix::new(h.scale(1.0 / h.trace())).expect("normalized Gram matrix is a state")
}

/// `0 <= S <= I` via a logistic squash of a random spectrum.
fn random_contraction(rng: &mut Stream, dim: usize) -> HermitianOperator {
    random_hermitian(rng, dim)
        .spectral_decompose()
        .apply(|l| 1.0 / (1.0 + (-l).exp()))
}

fn random_projection(rng: &mut Stream, dim: usize) -> HermitianOperator {
    let dec = random_hermitian(rng, dim).spectral_decompose();
    let keep: Vec<bool> = (0..dim).map(|_| rng.next_f64() < 0.5).collect();
    dec.projection_of_indices(&keep)
}

fn random_qubit_channel(rng: &mut Stream, dim: usize, inputs: usize) -> (CqChannel, FiniteDistribution) {
    let states: Vec<(String, DensityMatrix)> = (0..inputs)
        .map(|i| (format!("x{i}"), random_density(rng, dim, dim)))
        .collect();
    let labels: Vec<&str> = states.iter().map(|(l, _)| l.as_str()).collect();
    let p = FiniteDistribution::uniform(labels).expect("nonempty");
    (CqChannel::new(states).expect("valid channel"), p)
}

/// Draws instance `index` of a suite. Deterministic in `(seed, index)`.
/// Indices beyond `count - adversarial_count` use the adversarial presets:
/// rank-deficient operands, near-degenerate spectra, extreme constants.
pub fn sample_instance(
    kind: SuiteKind,
    dims: &[usize],
    seed: u64,
    index: u64,
    adversarial: bool,
) -> Operands {
    let mut rng = Stream::new(seed ^ ((kind as u64) << 24), index);
    let dim = dims[rng.next_index(dims.len())];
    match kind {
        SuiteKind::Lemma2 => {
            let (s, t) = if adversarial {
                match rng.next_index(4) {
                    // S an exact projection, T rank one: the tight regime.
                    0 => (random_projection(&mut rng, dim), random_psd(&mut rng, dim, 1)),
                    // T = 0.
                    1 => (
                        random_contraction(&mut rng, dim),
                        HermitianOperator::zero(dim),
                    ),
                    // Near-degenerate S: a projection nudged by a tiny
                    // perturbation, against a tiny T.
                    2 => {
                        let base = random_projection(&mut rng, dim);
                        let bump = random_hermitian(&mut rng, dim).scale(1e-11);
                        (
                            (&base + &bump).spectral_decompose().apply(|l| l.clamp(0.0, 1.0)),
                            random_psd(&mut rng, dim, 1).scale(1e-8),
                        )
                    }
                    // Huge T against tiny S.
                    _ => (
                        random_contraction(&mut rng, dim).scale(1e-6),
                        random_psd(&mut rng, dim, dim).scale(1e3),
                    ),
                }
            } else {
                let rank = 1 + rng.next_index(dim);
                (
                    random_contraction(&mut rng, dim),
                    random_psd(&mut rng, dim, rank).scale(rng.next_log_uniform(1e-2, 1e2)),
                )
            };
            let c = if adversarial && rng.next_f64() < 0.5 {
                if rng.next_f64() < 0.5 {
                    1e-3
                } else {
                    1e3
                }
            } else {
                rng.next_log_uniform(1e-3, 1e3)
            };
            Operands::KeyInequality { s, t, c }
        }
        SuiteKind::NeymanPearson => {
            let a = if adversarial {
                // Spectrum crowded around zero.
                random_hermitian(&mut rng, dim).scale(1e-9)
            } else {
                random_hermitian(&mut rng, dim)
            };
            let t = if adversarial && rng.next_f64() < 0.3 {
                HermitianOperator::identity(dim)
            } else {
                random_contraction(&mut rng, dim)
            };
            Operands::NeymanPearson { a, t }
        }
        SuiteKind::OgawaNagaoka => {
            let (rho, sigma) = if adversarial {
                // Rank-deficient rho against full-rank sigma.
                (
                    random_density(&mut rng, dim, 1),
                    random_density(&mut rng, dim, dim),
                )
            } else {
                (
                    random_density(&mut rng, dim, dim),
                    random_density(&mut rng, dim, dim),
                )
            };
            let c = rng.next_log_uniform(1e-3, 1e3);
            let s = rng.next_f64();
            Operands::OgawaNagaoka { rho, sigma, c, s }
        }
        SuiteKind::TauNu => {
            let rho = if adversarial {
                let rank = 1 + rng.next_index(dim);
                random_density(&mut rng, dim, rank)
            } else {
                random_density(&mut rng, dim, dim)
            };
            // nu from rho's own eigenprojections, which realizes the
            // commutation hypothesis exhaustively.
            let dec = rho.spectral_decompose();
            let keep: Vec<bool> = (0..dim).map(|_| rng.next_f64() < 0.5).collect();
            let nu = dec.projection_of_indices(&keep);
            let tau = random_projection(&mut rng, dim);
            Operands::TauNu { rho, nu, tau }
        }
        SuiteKind::CrossTerm => {
            let (channel, p) = random_qubit_channel(&mut rng, 2, 2);
            let n = 1 + rng.next_index(4);
            let (b, c) = if adversarial {
                // b <= c makes the bound trivially loose; also probe b >> c.
                if rng.next_f64() < 0.5 {
                    (0.1, 0.9)
                } else {
                    (3.0, 0.01)
                }
            } else {
                (rng.next_f64() * 2.0 - 0.3, rng.next_f64() * 2.0 - 0.3)
            };
            let labels: Vec<String> = p.support().iter().map(|s| s.to_string()).collect();
            let sequence: Vec<String> = (0..n)
                .map(|_| labels[rng.next_index(labels.len())].clone())
                .collect();
            Operands::CrossTerm {
                channel,
                p,
                n,
                b,
                c,
                sequence,
            }
        }
    }
}

/// A deterministic near-tight instance per suite. These sit close enough to
/// equality that any corruption of the inequality constants must flip them,
/// which is what makes the defect-injection negative control reliable.
pub fn tight_instance(kind: SuiteKind) -> Operands {
    match kind {
        SuiteKind::Lemma2 => Operands::KeyInequality {
            s: HermitianOperator::from_diagonal(&[1.0, 0.0]),
            t: HermitianOperator::from_diagonal(&[1e-3, 1e-3]),
            c: 1.0,
        },
        SuiteKind::NeymanPearson => {
            let a = HermitianOperator::from_diagonal(&[1.0, -1.0]);
            let t = HermitianOperator::from_diagonal(&[1.0, 0.0]);
            Operands::NeymanPearson { a, t }
        }
        SuiteKind::OgawaNagaoka => Operands::OgawaNagaoka {
            rho: DensityMatrix::maximally_mixed(2),
            sigma: DensityMatrix::maximally_mixed(2),
            c: 0.5,
            s: 0.5,
        },
        SuiteKind::TauNu => Operands::TauNu {
            rho: DensityMatrix::maximally_mixed(2),
            nu: HermitianOperator::identity(2),
            tau: HermitianOperator::from_diagonal(&[1.0, 0.0]),
        },
        SuiteKind::CrossTerm => {
            let channel = CqChannel::new(vec![
                (
                    "x0".into(),
                    DensityMatrix::from_diagonal(&[1.0, 0.0]).expect("valid state"),
                ),
                (
                    "x1".into(),
                    DensityMatrix::from_diagonal(&[0.0, 1.0]).expect("valid state"),
                ),
            ])
            .expect("valid channel");
            let p = FiniteDistribution::uniform(["x0", "x1"]).expect("nonempty");
            Operands::CrossTerm {
                channel,
                p,
                n: 1,
                b: 0.5,
                c: 0.5,
                sequence: vec!["x0".into()],
            }
        }
    }
}

/// Outcome of a suite run.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub kind: SuiteKind,
    pub checked: usize,
    pub min_margin: f64,
    /// `(seed, index)` of the minimal-margin instance.
    pub worst: (u64, u64),
    pub failures: Vec<InequalityInstance>,
}

/// Runs `count` random plus `adversarial` preset instances of one suite.
pub fn run_suite(
    kind: SuiteKind,
    dims: &[usize],
    count: usize,
    adversarial: usize,
    seed: u64,
    defect: Option<Defect>,
    tol: &Tolerances,
) -> Result<SuiteOutcome> {
    if dims.is_empty() {
        return Err(Error::EmptyInput("suite needs candidate dimensions"));
    }
    let total = count + adversarial;
    let mut evals = crate::parallel::map_indexed(total, None, |i| {
        let adversarial_instance = i >= count;
        let ops = sample_instance(kind, dims, seed, i as u64, adversarial_instance);
        let margin = evaluate(&ops, defect, tol);
        (ops, margin)
    });
    if defect.is_some() && total > 0 {
        // Negative-control runs include the near-tight sentinel, which any
        // corrupted constant must flip.
        let ops = tight_instance(kind);
        let margin = evaluate(&ops, defect, tol);
        evals.push((ops, margin));
    }

    let mut min_margin = f64::INFINITY;
    let mut worst = (seed, 0u64);
    let mut failures = Vec::new();
    let mut checked = 0usize;
    for (i, (ops, margin)) in evals.into_iter().enumerate() {
        let margin = margin?;
        checked += 1;
        if margin < min_margin {
            min_margin = margin;
            worst = (seed, i as u64);
        }
        if margin < kind.margin_floor() {
            let shrunk = shrink(
                InequalityInstance {
                    kind,
                    seed,
                    index: i as u64,
                    dim: operand_dim(&ops),
                    margin,
                    operands: ops,
                },
                defect,
                tol,
            );
            failures.push(shrunk);
        }
    }
    Ok(SuiteOutcome {
        kind,
        checked,
        min_margin,
        worst,
        failures,
    })
}

fn operand_dim(op: &Operands) -> usize {
    match op {
        Operands::KeyInequality { s, .. } => s.dim(),
        Operands::NeymanPearson { a, .. } => a.dim(),
        Operands::OgawaNagaoka { rho, .. } => rho.dim(),
        Operands::TauNu { rho, .. } => rho.dim(),
        Operands::CrossTerm { channel, .. } => channel.dim(),
    }
}

/// Shrinks a failing instance: repeatedly blends operands toward trivial
/// targets (identity or zero) and drops trailing dimensions, keeping each
/// move only if the violation persists.
pub fn shrink(
    mut inst: InequalityInstance,
    defect: Option<Defect>,
    tol: &Tolerances,
) -> InequalityInstance {
    let floor = inst.kind.margin_floor();
    for _ in 0..24 {
        let mut improved = false;
        for candidate in shrink_moves(&inst.operands) {
            if let Ok(margin) = evaluate(&candidate, defect, tol) {
                if margin < floor {
                    inst.operands = candidate;
                    inst.margin = margin;
                    inst.dim = operand_dim(&inst.operands);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
    inst
}

fn blend(op: &HermitianOperator, target: &HermitianOperator, lambda: f64) -> HermitianOperator {
    &op.scale(1.0 - lambda) + &target.scale(lambda)
}

fn truncate(op: &HermitianOperator, dim: usize) -> HermitianOperator {
    let sub = op.matrix().view((0, 0), (dim, dim)).clone_owned();
    HermitianOperator::hermitian_part(sub)
}

fn truncate_state(rho: &DensityMatrix, dim: usize) -> Option<DensityMatrix> {
    let sub = truncate(rho, dim);
    let tr = sub.trace();
    if tr <= 1e-12 {
        return None;
    }
    let clamped = sub.spectral_decompose().apply(|l| l.max(0.0));
    DensityMatrix::new(clamped.scale(1.0 / clamped.trace())).ok()
}

fn shrink_moves(op: &Operands) -> Vec<Operands> {
    let mut moves = Vec::new();
    match op {
        Operands::KeyInequality { s, t, c } => {
            let dim = s.dim();
            if dim > 2 {
                moves.push(Operands::KeyInequality {
                    s: truncate(s, dim - 1)
                        .spectral_decompose()
                        .apply(|l| l.clamp(0.0, 1.0)),
                    t: truncate(t, dim - 1).spectral_decompose().apply(|l| l.max(0.0)),
                    c: *c,
                });
            }
            for lambda in [0.5, 0.25] {
                moves.push(Operands::KeyInequality {
                    s: blend(s, &HermitianOperator::identity(dim), lambda),
                    t: t.clone(),
                    c: *c,
                });
                moves.push(Operands::KeyInequality {
                    s: s.clone(),
                    t: t.scale(1.0 - lambda),
                    c: *c,
                });
            }
            moves.push(Operands::KeyInequality {
                s: s.clone(),
                t: t.clone(),
                c: 1.0,
            });
        }
        Operands::NeymanPearson { a, t } => {
            let dim = a.dim();
            if dim > 2 {
                moves.push(Operands::NeymanPearson {
                    a: truncate(a, dim - 1),
                    t: truncate(t, dim - 1)
                        .spectral_decompose()
                        .apply(|l| l.clamp(0.0, 1.0)),
                });
            }
            for lambda in [0.5, 0.25] {
                moves.push(Operands::NeymanPearson {
                    a: a.scale(1.0 - lambda),
                    t: t.clone(),
                });
                moves.push(Operands::NeymanPearson {
                    a: a.clone(),
                    t: blend(t, &HermitianOperator::zero(dim), lambda),
                });
            }
        }
        Operands::OgawaNagaoka { rho, sigma, c, s } => {
            let dim = rho.dim();
            if dim > 2 {
                if let (Some(r), Some(g)) = (truncate_state(rho, dim - 1), truncate_state(sigma, dim - 1)) {
                    moves.push(Operands::OgawaNagaoka {
                        rho: r,
                        sigma: g,
                        c: *c,
                        s: *s,
                    });
                }
            }
            let mixed = DensityMatrix::maximally_mixed(dim);
            for lambda in [0.5, 0.25] {
                if let Ok(r) = DensityMatrix::new(blend(rho, &mixed, lambda)) {
                    moves.push(Operands::OgawaNagaoka {
                        rho: r,
                        sigma: sigma.clone(),
                        c: *c,
                        s: *s,
                    });
                }
            }
            moves.push(Operands::OgawaNagaoka {
                rho: rho.clone(),
                sigma: sigma.clone(),
                c: 1.0,
                s: *s,
            });
        }
        Operands::TauNu { rho, nu, tau } => {
            let dim = rho.dim();
            for lambda in [0.5, 0.25] {
                moves.push(Operands::TauNu {
                    rho: rho.clone(),
                    nu: nu.clone(),
                    tau: blend(tau, &HermitianOperator::identity(dim), lambda)
                        .spectral_decompose()
                        .projection_where(|l| l > 0.5),
                });
            }
        }
        Operands::CrossTerm {
            channel,
            p,
            n,
            b,
            c,
            sequence,
        } => {
            if *n > 1 {
                moves.push(Operands::CrossTerm {
                    channel: channel.clone(),
                    p: p.clone(),
                    n: n - 1,
                    b: *b,
                    c: *c,
                    sequence: sequence[..n - 1].to_vec(),
                });
            }
        }
    }
    moves
}

/// Serializable witness of a violated inequality.
pub fn witness_json(inst: &InequalityInstance) -> serde_json::Value {
    let op_json = |h: &HermitianOperator| crate::files::entries_json(h);
    let operands = match &inst.operands {
        Operands::KeyInequality { s, t, c } => json!({
            "s": op_json(s), "t": op_json(t), "c": c,
        }),
        Operands::NeymanPearson { a, t } => json!({
            "a": op_json(a), "t": op_json(t),
        }),
        Operands::OgawaNagaoka { rho, sigma, c, s } => json!({
            "rho": op_json(rho), "sigma": op_json(sigma), "c": c, "s": s,
        }),
        Operands::TauNu { rho, nu, tau } => json!({
            "rho": op_json(rho), "nu": op_json(nu), "tau": op_json(tau),
        }),
        Operands::CrossTerm {
            p, n, b, c, sequence, channel,
        } => json!({
            "labels": channel.labels().collect::<Vec<_>>(),
            "weights": p.weights(),
            "n": n, "b": b, "c": c, "sequence": sequence,
        }),
    };
    json!({
        "inequality": inst.kind.as_str(),
        "seed": inst.seed,
        "index": inst.index,
        "dim": inst.dim,
        "margin": inst.margin,
        "operands": operands,
    })
}
