//! Independent classical oracles for cross-checking the quantum paths.
//!
//! Everything here works on plain probability vectors with scalar loops; no
//! code is shared with the operator machinery under test.

#![allow(dead_code)]

/// Entropy of a probability vector in nats.
pub fn entropy_nats(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub fn binary_entropy_nats(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

/// Classical KL divergence in nats; infinite off support.
pub fn kl_nats(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            acc += pi * (pi / qi).ln();
        }
    }
    acc
}

/// Classical mutual information for prior `p` and row-stochastic `w[x][y]`.
pub fn mutual_information(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w[0].len();
    let mut out = vec![0.0; ny];
    for (x, row) in w.iter().enumerate() {
        for (y, &v) in row.iter().enumerate() {
            out[y] += p[x] * v;
        }
    }
    let mut acc = 0.0;
    for (x, row) in w.iter().enumerate() {
        if p[x] > 0.0 {
            acc += p[x] * kl_nats(row, &out);
        }
    }
    acc
}

/// Classical Blahut-Arimoto capacity of `w[x][y]`, in nats: multiplicative
/// fixed point with duality-gap stopping.
pub fn classical_capacity_ba(w: &[Vec<f64>], tol: f64, max_iter: usize) -> f64 {
    let k = w.len();
    let ny = w[0].len();
    let mut p = vec![1.0 / k as f64; k];
    let mut best = 0.0;
    for _ in 0..max_iter {
        let mut out = vec![0.0; ny];
        for (x, row) in w.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                out[y] += p[x] * v;
            }
        }
        let d: Vec<f64> = w.iter().map(|row| kl_nats(row, &out)).collect();
        let info: f64 = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
        let max_d = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best = info;
        if max_d - info <= tol {
            break;
        }
        let mut total = 0.0;
        for (pi, di) in p.iter_mut().zip(&d) {
            *pi *= (di - max_d).exp();
            total += *pi;
        }
        for pi in &mut p {
            *pi /= total;
        }
    }
    best
}

/// Classical constrained capacity `sup { I(p) : sum p c <= gamma }` via
/// Lagrangian bisection around classical Blahut-Arimoto.
pub fn classical_capacity_ba_cost(
    w: &[Vec<f64>],
    costs: &[f64],
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> f64 {
    let solve = |mu: f64| -> (Vec<f64>, f64) {
        let k = w.len();
        let ny = w[0].len();
        let mut p = vec![1.0 / k as f64; k];
        for _ in 0..max_iter {
            let mut out = vec![0.0; ny];
            for (x, row) in w.iter().enumerate() {
                for (y, &v) in row.iter().enumerate() {
                    out[y] += p[x] * v;
                }
            }
            let scores: Vec<f64> = w
                .iter()
                .zip(costs)
                .map(|(row, &c)| kl_nats(row, &out) - mu * c)
                .collect();
            let avg: f64 = p.iter().zip(&scores).map(|(pi, si)| pi * si).sum();
            let max_s = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max_s - avg <= tol {
                break;
            }
            let mut total = 0.0;
            for (pi, si) in p.iter_mut().zip(&scores) {
                *pi *= (si - max_s).exp();
                total += *pi;
            }
            for pi in &mut p {
                *pi /= total;
            }
        }
        let e: f64 = p.iter().zip(costs).map(|(pi, ci)| pi * ci).sum();
        (p, e)
    };

    let (p0, e0) = solve(0.0);
    if e0 <= gamma + 1e-9 {
        return mutual_information(&p0, w);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while solve(hi).1 > gamma + 1e-9 {
        hi *= 2.0;
        if hi > 1e9 {
            break;
        }
    }
    let mut best_p = solve(hi).0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (p, e) = solve(mid);
        if e <= gamma + 1e-9 {
            hi = mid;
            best_p = p;
        } else {
            lo = mid;
        }
    }
    mutual_information(&best_p, w)
}

/// Eigenvalues of a 2x2 Hermitian matrix [[a, b], [conj(b), c]] given the
/// real diagonal and |b|^2, via the closed form.
pub fn herm2_eigs(a: f64, c: f64, b_norm_sq: f64) -> (f64, f64) {
    let tr = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b_norm_sq).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

/// Brute-force capacity of a two-pure-qubit-state channel over a dense prior
/// grid: the states are `cos(beta)|0> +- sin(beta)|1>`, and the Holevo
/// quantity of a pure-state ensemble is the output entropy.
pub fn two_pure_capacity_grid(beta: f64, resolution: f64) -> f64 {
    let (cb, sb) = (beta.cos(), beta.sin());
    // rho_p = p v0 v0^T + (1-p) v1 v1^T with v = (cb, +-sb).
    let mut best = 0.0f64;
    let steps = (1.0 / resolution) as usize;
    for i in 0..=steps {
        let p = i as f64 * resolution;
        let a = cb * cb;
        let c = sb * sb;
        let b = (p - (1.0 - p)) * cb * sb; // off-diagonal, real
        let (l1, l2) = herm2_eigs(a, c, b * b);
        let h = entropy_nats(&[l1.max(0.0), l2.max(0.0)]);
        best = best.max(h);
    }
    best
}

/// Classical information-spectrum tail for a commuting (diagonal) channel:
/// `Pr[ sum_i log(W(y_i|x_i) / q(y_i)) > n a ]` under the joint i.i.d. law
/// `P(x) W(y|x)`, by exhaustive enumeration.
pub fn classical_info_tail(p: &[f64], w: &[Vec<f64>], n: usize, a: f64) -> f64 {
    let k = p.len();
    let ny = w[0].len();
    let q: Vec<f64> = (0..ny)
        .map(|y| (0..k).map(|x| p[x] * w[x][y]).sum())
        .collect();
    let pairs = k * ny;
    let total = pairs.pow(n as u32);
    let mut acc = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        let mut prob = 1.0;
        let mut llr = 0.0;
        for _ in 0..n {
            let pair = rest % pairs;
            rest /= pairs;
            let (x, y) = (pair / ny, pair % ny);
            prob *= p[x] * w[x][y];
            if prob == 0.0 {
                break;
            }
            llr += (w[x][y] / q[y]).ln();
        }
        if prob > 0.0 && llr > n as f64 * a {
            acc += prob;
        }
    }
    acc
}

/// Classical divergence tail `Pr_p[ sum log(p/q) > n a ]` by enumeration.
pub fn classical_divergence_tail(p: &[f64], q: &[f64], n: usize, a: f64) -> f64 {
    let d = p.len();
    let total = d.pow(n as u32);
    let mut acc = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        let mut prob = 1.0;
        let mut llr = 0.0;
        let mut dead = false;
        for _ in 0..n {
            let y = rest % d;
            rest /= d;
            if p[y] == 0.0 {
                dead = true;
                break;
            }
            prob *= p[y];
            llr += (p[y] / q[y].max(1e-300)).ln();
        }
        if !dead && llr > n as f64 * a {
            acc += prob;
        }
    }
    acc
}

/// Classical entropy tail of an i.i.d. source by enumeration:
/// `Pr[prod p(y_i) >= e^{-nb}]` (mass of high-probability strings).
pub fn classical_entropy_tail_output(p: &[f64], n: usize, b: f64) -> f64 {
    let d = p.len();
    let total = d.pow(n as u32);
    let mut acc = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        let mut prob = 1.0;
        for _ in 0..n {
            prob *= p[rest % d];
            rest /= d;
        }
        if prob > 0.0 && prob.ln() >= -(n as f64) * b {
            acc += prob;
        }
    }
    acc
}

/// Classical scalar brute force for the random-coding exponent on a
/// commuting instance: `max_t [-a t - ln sum_i lambda_i sum_y
/// rho_i(y)^{1-t} sigma(y)^t]` over a uniform t-grid.
pub fn classical_phi_bar_grid(
    lambdas: &[f64],
    rhos: &[Vec<f64>],
    sigma: &[f64],
    a: f64,
    t_step: f64,
) -> f64 {
    let mut best: f64 = 0.0;
    let steps = (1.0 / t_step) as usize;
    for i in 0..=steps {
        let t = (i as f64 * t_step).min(1.0);
        let mut total = 0.0;
        for (l, rho) in lambdas.iter().zip(rhos) {
            let mut inner = 0.0;
            for (ry, sy) in rho.iter().zip(sigma) {
                if *ry > 0.0 {
                    inner += ry.powf(1.0 - t) * sy.powf(t);
                }
            }
            total += l * inner;
        }
        best = best.max(-a * t - total.ln());
    }
    best
}
