//! Quantum relative entropy, the Holevo quantity, capacity optimization with
//! and without cost constraint, and the error exponents attached to the
//! strong-converse and sphere-packing style bounds.
//!
//! The variational characterizations solved here are
//!
//! ```text
//! C       = sup_P I(P,W) = min_sigma sup_x D(W_x || sigma)
//! C_gamma = sup { I(P,W) : E_P[c] <= gamma }
//! ```
//!
//! with `I(P,W) = sum_x P(x) D(W_x || W_P)`. The optimization algorithm is
//! not prescribed by those identities; this module uses a multiplicative
//! fixed point from the uniform start,
//! `P'(x) ∝ P(x) exp(D(W_x || W_P))`, stopping when the duality gap
//! `max_x D(W_x || W_P) - I(P,W)` certifies optimality.

use std::collections::BTreeMap;

use crate::channel::{CostSpec, CqChannel, FiniteDistribution};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::operator::{DensityMatrix, SpectralDecomposition};

/// Outcome of a capacity optimization.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Optimal value in nats.
    pub value: f64,
    /// Maximizing input distribution.
    pub optimizer: FiniteDistribution,
    /// Min-max center `sigma* = W_{P*}`.
    pub center: DensityMatrix,
    /// Certified optimality gap (upper bound minus `value`).
    pub duality_gap: f64,
    pub iterations: usize,
    /// Lagrange multiplier of an active cost constraint, zero otherwise.
    pub cost_multiplier: f64,
    /// `E_{P*}[c]` when a cost constraint was in force.
    pub expected_cost: Option<f64>,
}

/// Solver knobs for the fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Duality-gap stopping threshold in nats.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 100_000,
        }
    }
}

/// Quantum relative entropy `D(rho || sigma) = Tr[rho (log rho - log sigma)]`
/// in nats; `+inf` when the support of `rho` leaks outside the support of
/// `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> f64 {
    relative_entropy_parts(&rho.spectral_decompose(), &sigma.spectral_decompose(), tol)
}

/// Same, from precomputed spectral decompositions.
pub fn relative_entropy_parts(
    rho: &SpectralDecomposition,
    sigma: &SpectralDecomposition,
    tol: &Tolerances,
) -> f64 {
    let cut_r = rho.rank_cutoff(tol);
    let cut_s = sigma.rank_cutoff(tol);
    let overlap = rho.eigenvectors.adjoint() * &sigma.eigenvectors;
    let dim = rho.dim();

    let mut leak = 0.0;
    let mut cross = 0.0;
    for i in 0..dim {
        let p = rho.eigenvalues[i];
        if p <= cut_r {
            continue;
        }
        for j in 0..dim {
            let w = overlap[(i, j)].norm_sqr();
            let q = sigma.eigenvalues[j];
            if q <= cut_s {
                leak += p * w;
            } else {
                cross += p * w * q.ln();
            }
        }
    }
    if leak > tol.support_leak {
        return f64::INFINITY;
    }
    let self_term: f64 = rho
        .eigenvalues
        .iter()
        .filter(|&&p| p > cut_r)
        .map(|&p| p * p.ln())
        .sum();
    self_term - cross
}

/// Von Neumann entropy `-Tr[rho log rho]` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix, tol: &Tolerances) -> f64 {
    let dec = rho.spectral_decompose();
    let cut = dec.rank_cutoff(tol);
    -dec.eigenvalues
        .iter()
        .filter(|&&p| p > cut)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Holevo quantity `I(P,W) = sum_x P(x) D(W_x || W_P)` in nats.
pub fn holevo_information(
    p: &FiniteDistribution,
    channel: &CqChannel,
    tol: &Tolerances,
) -> Result<f64> {
    p.check_support(channel)?;
    let sigma = channel.output_average(p)?;
    j_divergence_to(p, &sigma, channel, tol)
}

/// Entropy-difference form `H(W_P) - sum_x P(x) H(W_x)`; equal to
/// [`holevo_information`] in finite dimension and used to cross-check it.
pub fn holevo_information_entropy_form(
    p: &FiniteDistribution,
    channel: &CqChannel,
    tol: &Tolerances,
) -> Result<f64> {
    p.check_support(channel)?;
    let sigma = channel.output_average(p)?;
    let mut cond = 0.0;
    for (label, &w) in p.weights() {
        if w > 0.0 {
            cond += w * von_neumann_entropy(channel.state(label)?, tol);
        }
    }
    Ok(von_neumann_entropy(&sigma, tol) - cond)
}

/// `J(P, sigma, W) = sum_x P(x) D(W_x || sigma)`; `+inf` propagates.
pub fn j_divergence(
    p: &FiniteDistribution,
    sigma: &DensityMatrix,
    channel: &CqChannel,
    tol: &Tolerances,
) -> Result<f64> {
    p.check_support(channel)?;
    j_divergence_to(p, sigma, channel, tol)
}

fn j_divergence_to(
    p: &FiniteDistribution,
    sigma: &DensityMatrix,
    channel: &CqChannel,
    tol: &Tolerances,
) -> Result<f64> {
    let sigma_dec = sigma.spectral_decompose();
    let mut acc = 0.0;
    for (label, &w) in p.weights() {
        if w > 0.0 {
            let d = relative_entropy_parts(
                &channel.state(label)?.spectral_decompose(),
                &sigma_dec,
                tol,
            );
            if d.is_infinite() {
                return Ok(f64::INFINITY);
            }
            acc += w * d;
        }
    }
    Ok(acc)
}

struct SolveState {
    labels: Vec<String>,
    state_decs: Vec<SpectralDecomposition>,
    weights: Vec<f64>,
}

impl SolveState {
    fn new(channel: &CqChannel) -> Self {
        let labels: Vec<String> = channel.labels().map(str::to_string).collect();
        let state_decs = channel
            .inputs()
            .iter()
            .map(|(_, s)| s.spectral_decompose())
            .collect();
        let k = labels.len();
        Self {
            labels,
            state_decs,
            weights: vec![1.0 / k as f64; k],
        }
    }

    fn distribution(&self) -> FiniteDistribution {
        let map: BTreeMap<String, f64> = self
            .labels
            .iter()
            .cloned()
            .zip(self.weights.iter().copied())
            .collect();
        // Weights are maintained normalized and nonnegative by the update.
        FiniteDistribution::new(map).expect("solver keeps a valid distribution")
    }

    fn average(&self, channel: &CqChannel) -> DensityMatrix {
        let mut acc = crate::operator::HermitianOperator::zero(channel.dim());
        for (i, (_, s)) in channel.inputs().iter().enumerate() {
            if self.weights[i] > 0.0 {
                acc = &acc + &s.scale(self.weights[i]);
            }
        }
        DensityMatrix::new(acc).expect("mixture of states is a state")
    }

    /// One multiplicative step against relative-entropy scores minus an
    /// optional linear penalty; returns `(I, max score, expected penalty)`.
    fn step(
        &mut self,
        channel: &CqChannel,
        penalty: &[f64],
        tol: &Tolerances,
    ) -> (f64, f64, f64) {
        let sigma_dec = self.average(channel).spectral_decompose();
        let k = self.labels.len();
        let mut scores = vec![0.0f64; k];
        let mut info = 0.0;
        let mut pen = 0.0;
        for i in 0..k {
            let d = relative_entropy_parts(&self.state_decs[i], &sigma_dec, tol);
            scores[i] = d - penalty[i];
            if self.weights[i] > 0.0 {
                info += self.weights[i] * d;
                pen += self.weights[i] * penalty[i];
            }
        }
        let max_score = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (w, score) in self.weights.iter_mut().zip(&scores) {
            *w *= (score - max_score).exp();
            total += *w;
        }
        for w in &mut self.weights {
            *w /= total;
        }
        (info, max_score, pen)
    }
}

/// Unconstrained Holevo capacity via the multiplicative fixed point.
///
/// Terminates once `max_x D(W_x || W_P) - I(P,W) <= opts.tol`; that gap is a
/// certificate because the capacity is wedged between the two sides.
pub fn holevo_capacity(
    channel: &CqChannel,
    opts: &SolverOptions,
    tol: &Tolerances,
) -> Result<CapacityResult> {
    let mut st = SolveState::new(channel);
    let penalty = vec![0.0f64; channel.len()];
    let mut best: Option<CapacityResult> = None;

    for iter in 1..=opts.max_iter {
        let (info, max_d, _) = st.step(channel, &penalty, tol);
        let gap = max_d - info;
        let better = best.as_ref().is_none_or(|b| gap < b.duality_gap);
        if better {
            best = Some(CapacityResult {
                value: info,
                optimizer: st.distribution(),
                center: st.average(channel),
                duality_gap: gap,
                iterations: iter,
                cost_multiplier: 0.0,
                expected_cost: None,
            });
        }
        if gap <= opts.tol {
            return Ok(best.expect("just stored"));
        }
    }
    let best = best.expect("at least one iteration ran");
    Err(Error::NonConvergence {
        tol: opts.tol,
        iterations: opts.max_iter,
        gap: best.duality_gap,
        best: Box::new(best),
    })
}

/// Min-max center: radius `min_sigma sup_x D(W_x || sigma)` with the
/// minimizing state, certified by evaluating the sup side at `W_{P*}`.
pub fn minmax_center(
    channel: &CqChannel,
    opts: &SolverOptions,
    tol: &Tolerances,
) -> Result<(f64, DensityMatrix)> {
    let cap = holevo_capacity(channel, opts, tol)?;
    let sigma_dec = cap.center.spectral_decompose();
    let mut radius = f64::NEG_INFINITY;
    for (_, state) in channel.inputs() {
        let d = relative_entropy_parts(&state.spectral_decompose(), &sigma_dec, tol);
        radius = radius.max(d);
    }
    Ok((radius, cap.center))
}

/// Cost-constrained capacity `sup { I(P,W) : E_P[c] <= gamma }`.
///
/// Lagrangian dual: for each multiplier `mu >= 0` the inner fixed point uses
/// scores `D(W_x || W_P) - mu c(x)`; `mu` is then bisected to meet the
/// budget, with ties resolved toward feasibility and a final blend between
/// the bracketing solutions when the constraint is active.
pub fn cost_capacity(
    channel: &CqChannel,
    cost: &CostSpec,
    opts: &SolverOptions,
    tol: &Tolerances,
) -> Result<CapacityResult> {
    cost.check_covers(channel)?;
    let gamma = cost.budget();
    let costs: Vec<f64> = channel
        .labels()
        .map(|l| cost.cost_of(l))
        .collect::<Result<_>>()?;
    let min_cost = costs.iter().copied().fold(f64::INFINITY, f64::min);
    if min_cost > gamma {
        return Err(Error::InfeasibleBudget { budget: gamma });
    }

    let solve_mu = |mu: f64| -> Result<(CapacityResult, f64)> {
        let mut st = SolveState::new(channel);
        let penalty: Vec<f64> = costs.iter().map(|c| mu * c).collect();
        let mut last = (0.0, f64::INFINITY, 0.0);
        let mut iters = 0;
        for iter in 1..=opts.max_iter {
            iters = iter;
            let (info, max_score, pen) = st.step(channel, &penalty, tol);
            // Gap for the penalized objective I - mu E[c].
            let gap = max_score - (info - pen);
            last = (info, gap, pen);
            if gap <= opts.tol {
                break;
            }
        }
        let p = st.distribution();
        let e_cost = p.expected_cost(cost)?;
        let result = CapacityResult {
            value: last.0,
            optimizer: p,
            center: st.average(channel),
            duality_gap: last.1,
            iterations: iters,
            cost_multiplier: mu,
            expected_cost: Some(e_cost),
        };
        Ok((result, e_cost))
    };

    // Unconstrained solution first; if it already fits the budget, done.
    let (free, e_free) = solve_mu(0.0)?;
    if e_free <= gamma + 1e-9 {
        return finish_cost_result(free, channel, cost, 0.0, tol);
    }

    // Bracket: expected cost is nonincreasing in mu.
    let spread = {
        let max_cost = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (max_cost - min_cost).max(1e-9)
    };
    let mut mu_lo = 0.0;
    let mut mu_hi = free.duality_gap.max(free.value).max(1.0) / spread;
    let mut hi_sol = loop {
        let (sol, e) = solve_mu(mu_hi)?;
        if e <= gamma + 1e-9 {
            break sol;
        }
        mu_lo = mu_hi;
        mu_hi *= 2.0;
        if mu_hi > 1e12 {
            return Err(Error::InfeasibleBudget { budget: gamma });
        }
    };
    let mut lo_sol = if mu_lo == 0.0 { free } else { solve_mu(mu_lo)?.0 };

    for _ in 0..60 {
        let mid = 0.5 * (mu_lo + mu_hi);
        let (sol, e) = solve_mu(mid)?;
        if e <= gamma + 1e-9 {
            mu_hi = mid;
            hi_sol = sol;
        } else {
            mu_lo = mid;
            lo_sol = sol;
        }
        if mu_hi - mu_lo < 1e-12 * mu_hi.max(1.0) {
            break;
        }
    }

    // hi_sol is feasible. If the infeasible bracket end carries more
    // information, blend the two optimizers to sit exactly on the budget;
    // both are near-optimal for the common multiplier, and I is concave.
    let e_hi = hi_sol.expected_cost.unwrap_or(gamma);
    let e_lo = lo_sol.expected_cost.unwrap_or(f64::INFINITY);
    let mut final_sol = hi_sol;
    if e_lo.is_finite() && e_lo > gamma && e_hi < gamma - 1e-12 {
        let t = (gamma - e_hi) / (e_lo - e_hi);
        let mut mixed = BTreeMap::new();
        for label in channel.labels() {
            let w = (1.0 - t) * final_sol.optimizer.probability(label)
                + t * lo_sol.optimizer.probability(label);
            if w > 0.0 {
                mixed.insert(label.to_string(), w);
            }
        }
        let blend = FiniteDistribution::new_with(mixed, tol)?;
        let blend_info = holevo_information(&blend, channel, tol)?;
        if blend_info > final_sol.value {
            final_sol = CapacityResult {
                value: blend_info,
                center: channel.output_average(&blend)?,
                expected_cost: Some(blend.expected_cost(cost)?),
                optimizer: blend,
                ..final_sol
            };
        }
    }
    let mu = final_sol.cost_multiplier;
    finish_cost_result(final_sol, channel, cost, mu, tol)
}

/// Recomputes the certified gap for a cost-constrained solution:
/// `C_gamma <= max_x [D(W_x||sigma) - mu c(x)] + mu gamma` for any
/// `sigma, mu >= 0`.
fn finish_cost_result(
    mut sol: CapacityResult,
    channel: &CqChannel,
    cost: &CostSpec,
    mu: f64,
    tol: &Tolerances,
) -> Result<CapacityResult> {
    let sigma_dec = sol.center.spectral_decompose();
    let mut upper = f64::NEG_INFINITY;
    for (label, state) in channel.inputs() {
        let d = relative_entropy_parts(&state.spectral_decompose(), &sigma_dec, tol);
        upper = upper.max(d - mu * cost.cost_of(label)?);
    }
    upper += mu * cost.budget();
    sol.value = holevo_information(&sol.optimizer, channel, tol)?;
    sol.duality_gap = upper - sol.value;
    sol.cost_multiplier = mu;
    sol.expected_cost = Some(sol.optimizer.expected_cost(cost)?);
    Ok(sol)
}

/// `Tr[rho^(1+s) sigma^(-s)]` with the generalized-inverse power convention;
/// `+inf` when `rho` has support outside `sigma` (and `s > 0`).
pub fn tr_power_pair(
    rho: &SpectralDecomposition,
    sigma: &SpectralDecomposition,
    s: f64,
    tol: &Tolerances,
) -> f64 {
    let cut_r = rho.rank_cutoff(tol);
    let cut_s = sigma.rank_cutoff(tol);
    let overlap = rho.eigenvectors.adjoint() * &sigma.eigenvectors;
    let dim = rho.dim();
    let mut acc = 0.0;
    let mut leak = 0.0;
    for i in 0..dim {
        let p = rho.eigenvalues[i].max(0.0);
        if p <= cut_r {
            continue;
        }
        for j in 0..dim {
            let w = overlap[(i, j)].norm_sqr();
            let q = sigma.eigenvalues[j];
            if q <= cut_s {
                leak += p * w;
            } else {
                acc += p.powf(1.0 + s) * q.powf(-s) * w;
            }
        }
    }
    if s > 0.0 && leak > tol.support_leak {
        return f64::INFINITY;
    }
    acc
}

/// `sup` of `J(P, sigma, W)` over the cost-feasible distributions, via the
/// reduction to two-point distributions (the feasible set is the convex
/// hull of its at-most-two-point members and the objective is linear in P).
pub fn sup_j_constrained(
    channel: &CqChannel,
    sigma: &DensityMatrix,
    cost: &CostSpec,
    tol: &Tolerances,
) -> Result<f64> {
    let sigma_dec = sigma.spectral_decompose();
    let g: Vec<f64> = channel
        .inputs()
        .iter()
        .map(|(_, state)| relative_entropy_parts(&state.spectral_decompose(), &sigma_dec, tol))
        .collect();
    pairwise_sup(channel, cost, &g)
}

/// Strong-converse exponent integrand
/// `psi(s) = sup { sum_x P(x) log Tr[W_x^(1+s) sigma^(-s)] : E_P[c] <= gamma }`,
/// computed exactly through the same two-point reduction.
pub fn psi_exponent(
    channel: &CqChannel,
    sigma: &DensityMatrix,
    cost: &CostSpec,
    s: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "psi exponent needs 0 <= s <= 1, got {s}"
        )));
    }
    let sigma_dec = sigma.spectral_decompose();
    let g: Vec<f64> = channel
        .inputs()
        .iter()
        .map(|(_, state)| {
            tr_power_pair(&state.spectral_decompose(), &sigma_dec, s, tol).ln()
        })
        .collect();
    pairwise_sup(channel, cost, &g)
}

/// Maximizes the linear functional `sum_x P(x) g(x)` over
/// `{P : E_P[c] <= gamma}`. For each input pair the feasible mixing weight
/// is an interval and the optimum sits at one of its ends.
fn pairwise_sup(channel: &CqChannel, cost: &CostSpec, g: &[f64]) -> Result<f64> {
    cost.check_covers(channel)?;
    let gamma = cost.budget();
    let labels: Vec<&str> = channel.labels().collect();
    let costs: Vec<f64> = labels
        .iter()
        .map(|l| cost.cost_of(l))
        .collect::<Result<_>>()?;
    let k = labels.len();
    let slack = 1e-12 * gamma.abs().max(1.0);

    let mut best = f64::NEG_INFINITY;
    let mut feasible = false;
    for i in 0..k {
        if costs[i] <= gamma + slack {
            feasible = true;
            best = best.max(g[i]);
        }
    }
    let eval = |lambda: f64, i: usize, j: usize| -> f64 {
        if lambda <= 0.0 {
            g[j]
        } else if lambda >= 1.0 {
            g[i]
        } else {
            lambda * g[i] + (1.0 - lambda) * g[j]
        }
    };
    for i in 0..k {
        for j in (i + 1)..k {
            let (ci, cj) = (costs[i], costs[j]);
            // lambda (ci - cj) <= gamma - cj, lambda in [0,1]
            if (ci - cj).abs() <= slack {
                if ci <= gamma + slack {
                    best = best.max(eval(0.0, i, j)).max(eval(1.0, i, j));
                    feasible = true;
                }
            } else if ci < cj {
                let lo = ((gamma - cj) / (ci - cj)).max(0.0);
                if lo <= 1.0 + 1e-15 {
                    best = best.max(eval(lo.min(1.0), i, j)).max(eval(1.0, i, j));
                    feasible = true;
                }
            } else {
                let hi = ((gamma - cj) / (ci - cj)).min(1.0);
                if hi >= -1e-15 {
                    best = best.max(eval(0.0, i, j)).max(eval(hi.max(0.0), i, j));
                    feasible = true;
                }
            }
        }
    }
    if !feasible {
        return Err(Error::InfeasibleBudget { budget: gamma });
    }
    Ok(best)
}

/// Exponent report: the inner maximization grid for one threshold.
#[derive(Debug, Clone)]
pub struct ExponentReport {
    /// Rate threshold `a` in nats per symbol.
    pub a: f64,
    /// Sampled `(t, objective)` pairs on `[0,1]`.
    pub grid: Vec<(f64, f64)>,
    /// Maximizer of the objective.
    pub t_star: f64,
    /// The exponent value `phi_bar(a)`, always `>= 0`.
    pub value: f64,
    /// `k * dim H`, the block size entering the polynomial prefactor.
    pub dim_parameter: usize,
}

/// Random-coding exponent
/// `phi_bar(a) = max_{0<=t<=1} ( -a t - log sum_i lambda_i
///   Tr[rho_i sigma^(t/2) rho_i^(-t) sigma^(t/2)] )` with `sigma = W_P`.
///
/// The inner objective vanishes at `t = 0`, so the exponent is nonnegative;
/// it is strictly positive for `a < I(P,W)`.
pub fn phi_bar(
    a: f64,
    p: &FiniteDistribution,
    channel: &CqChannel,
    tol: &Tolerances,
) -> Result<ExponentReport> {
    p.check_support(channel)?;
    let sigma = channel.output_average(p)?;
    let support = p.support();
    let states: Vec<(f64, &DensityMatrix)> = support
        .iter()
        .map(|l| Ok((p.probability(l), channel.state(l)?)))
        .collect::<Result<_>>()?;

    let objective = |t: f64| -> f64 {
        let m = sigma
            .power_with(t / 2.0, tol)
            .expect("state powers are defined");
        let mut total = 0.0;
        for (lambda, rho) in &states {
            let rho_negt = rho.power_with(-t, tol).expect("state powers are defined");
            let prod = m.matrix() * rho_negt.matrix() * m.matrix();
            let tr: f64 = (rho.matrix() * prod)
                .diagonal()
                .iter()
                .map(|z| z.re)
                .sum();
            total += lambda * tr;
        }
        -a * t - total.ln()
    };

    // Coarse scan, then golden-section refinement around the best point.
    let grid_n = 64;
    let mut grid = Vec::with_capacity(grid_n + 1);
    for i in 0..=grid_n {
        let t = i as f64 / grid_n as f64;
        grid.push((t, objective(t)));
    }
    let best_idx = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = if best_idx == 0 { 0.0 } else { grid[best_idx - 1].0 };
    let hi = if best_idx == grid.len() - 1 {
        1.0
    } else {
        grid[best_idx + 1].0
    };
    let (t_star, v_star) = golden_max(&objective, lo, hi, 200);

    let mut t_best = t_star;
    let mut value = v_star;
    for &(t, v) in &grid {
        if v > value {
            value = v;
            t_best = t;
        }
    }
    // t = 0 yields exactly 0, so never report below that.
    if value < 0.0 {
        value = 0.0;
        t_best = 0.0;
    }

    Ok(ExponentReport {
        a,
        grid,
        t_star: t_best,
        value,
        dim_parameter: support.len() * channel.dim(),
    })
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

/// Sphere-packing style code bound `min(1, 6 (n+1)^d e^(-n phi_bar))` on the
/// average error probability at rate `a` (block size `e^{na}`).
pub fn sp_code_bound(n: usize, d: usize, phi_bar_value: f64) -> f64 {
    let log_bound =
        6f64.ln() + d as f64 * ((n + 1) as f64).ln() - n as f64 * phi_bar_value;
    log_bound.exp().min(1.0)
}
