//! Wasm bindings for the browser demo.
//!
//! Three interactive operations, all JSON-string in / JSON-string out so the
//! page stays a single static file with no framework:
//!
//! - [`capacity_json`]: capacity, optimizer, min-max radius for a channel,
//! - [`sweep_json`]: finite-n tail curves over a threshold grid,
//! - [`exponent_json`]: the random-coding exponent curve.
//!
//! Channels come either from [`preset_channel`] or from a pasted channel
//! file. Errors come back as `{"error": "..."}` rather than exceptions.

use wasm_bindgen::prelude::wasm_bindgen;

use cqlab::capacity::{holevo_capacity, minmax_center, phi_bar, SolverOptions};
use cqlab::channel::FiniteDistribution;
use cqlab::files::ChannelFile;
use cqlab::operator::Comparator;
use cqlab::presets::{preset, PRESET_NAMES};
use cqlab::spectrum::{divergence_tail, entropy_tail, info_tail, EntropyTail};
use cqlab::Tolerances;
use serde_json::json;

fn err_json(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn parse_channel(channel_json: &str) -> Result<(cqlab::channel::CqChannel, ChannelFile), String> {
    let file = ChannelFile::parse(channel_json).map_err(|e| e.to_string())?;
    let (channel, _) = file.to_model(&Tolerances::default()).map_err(|e| e.to_string())?;
    Ok((channel, file))
}

/// Available presets with descriptions and known capacities.
#[wasm_bindgen]
pub fn preset_list() -> String {
    let rows: Vec<_> = PRESET_NAMES
        .iter()
        .filter_map(|name| preset(name, None).ok())
        .map(|p| {
            json!({
                "name": p.name,
                "description": p.description,
                "known_capacity": p.known_capacity,
            })
        })
        .collect();
    json!(rows).to_string()
}

/// Channel file JSON for a named preset; `param` is the preset parameter
/// (NaN means default).
#[wasm_bindgen]
pub fn preset_channel(name: &str, param: f64) -> String {
    let param = if param.is_nan() { None } else { Some(param) };
    match preset(name, param) {
        Ok(p) => ChannelFile::from_model(&p.channel, None).render(),
        Err(e) => err_json(e),
    }
}

/// Capacity of the channel: value, optimizer, duality gap, min-max radius.
#[wasm_bindgen]
pub fn capacity_json(channel_json: &str, tol: f64) -> String {
    let tolerances = Tolerances::default();
    let (channel, _) = match parse_channel(channel_json) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let opts = SolverOptions {
        tol: if tol > 0.0 { tol } else { 1e-7 },
        max_iter: 500_000,
    };
    let cap = match holevo_capacity(&channel, &opts, &tolerances) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let radius = match minmax_center(&channel, &opts, &tolerances) {
        Ok((r, _)) => r,
        Err(e) => return err_json(e),
    };
    json!({
        "value_nats": cap.value,
        "value_bits": cap.value / std::f64::consts::LN_2,
        "optimizer": cap.optimizer.weights(),
        "duality_gap": cap.duality_gap,
        "iterations": cap.iterations,
        "minmax_radius": radius,
    })
    .to_string()
}

/// Tail curves over a threshold grid, one curve per blocklength.
///
/// `kind`: `info`, `divergence`, `entropy-output` or `entropy-conditional`.
/// For `divergence`, `arg1`/`arg2` name the two states; otherwise they are
/// ignored and the input distribution is uniform. Blocklengths are
/// `1..=n_max` capped by the dimension bound.
#[wasm_bindgen]
pub fn sweep_json(
    channel_json: &str,
    kind: &str,
    arg1: &str,
    arg2: &str,
    n_max: u32,
    a_min: f64,
    a_max: f64,
    steps: u32,
) -> String {
    let t = Tolerances::default();
    let (channel, _) = match parse_channel(channel_json) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let steps = steps.clamp(2, 400) as usize;
    let thresholds: Vec<f64> = (0..steps)
        .map(|i| a_min + (a_max - a_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let ns: Vec<usize> = (1..=n_max.clamp(1, 12) as usize).collect();
    let uniform = match FiniteDistribution::uniform(channel.labels()) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };

    let mut curves = Vec::new();
    for &n in &ns {
        let mut tails = Vec::with_capacity(thresholds.len());
        for &a in &thresholds {
            let v = match kind {
                "info" => info_tail(&uniform, &channel, n, a, Comparator::Greater, &t),
                "divergence" => {
                    let rho = channel.state(arg1).map(Clone::clone);
                    let sigma = channel.state(arg2).map(Clone::clone);
                    match (rho, sigma) {
                        (Ok(r), Ok(s)) => divergence_tail(&r, &s, n, a, &t),
                        (Err(e), _) | (_, Err(e)) => Err(e),
                    }
                }
                "entropy-output" => {
                    entropy_tail(&uniform, &channel, n, a, EntropyTail::OutputLower, &t)
                }
                "entropy-conditional" => {
                    entropy_tail(&uniform, &channel, n, a, EntropyTail::ConditionalUpper, &t)
                }
                other => return err_json(format!("unknown sweep kind `{other}`")),
            };
            match v {
                Ok(v) => tails.push(v),
                // Blocklengths beyond the dimension bound just end the
                // curve family early.
                Err(cqlab::Error::DimensionBound { .. }) => {
                    return json!({
                        "thresholds": thresholds,
                        "curves": curves,
                        "note": format!("stopped at n = {} (dimension bound)", n - 1),
                    })
                    .to_string()
                }
                Err(e) => return err_json(e),
            }
        }
        curves.push(json!({ "n": n, "tails": tails }));
    }
    json!({ "thresholds": thresholds, "curves": curves }).to_string()
}

/// Random-coding exponent curve `a -> phi_bar(a)` at the uniform input,
/// with the capacity marked.
#[wasm_bindgen]
pub fn exponent_json(channel_json: &str, a_min: f64, a_max: f64, steps: u32) -> String {
    let t = Tolerances::default();
    let (channel, _) = match parse_channel(channel_json) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let uniform = match FiniteDistribution::uniform(channel.labels()) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let info = match cqlab::capacity::holevo_information(&uniform, &channel, &t) {
        Ok(i) => i,
        Err(e) => return err_json(e),
    };
    let steps = steps.clamp(2, 400) as usize;
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let a = a_min + (a_max - a_min) * i as f64 / (steps - 1) as f64;
        match phi_bar(a, &uniform, &channel, &t) {
            Ok(rep) => rows.push(json!({ "a": a, "phi_bar": rep.value, "t_star": rep.t_star })),
            Err(e) => return err_json(e),
        }
    }
    json!({ "rows": rows, "holevo_information": info }).to_string()
}
