//! Command execution layer shared by the CLI and the tests.
//!
//! Every command takes a serializable parameter struct (channel files are
//! embedded inline, not referenced by path) and produces a [`RunRecord`]
//! whose `outputs` field is a pure function of the parameters; replaying a
//! record must reproduce those outputs byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::capacity::{
    cost_capacity, holevo_capacity, minmax_center, phi_bar, psi_exponent, sp_code_bound,
    SolverOptions,
};
use crate::channel::{CqChannel, FiniteDistribution};
use crate::coding::{
    direct_bound_rhs, hsw_random_bound, random_coding_experiment, DecoderKind, ExperimentSpec,
};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::files::{entries_json, fmt_f64, ChannelFile, RunRecord};
use crate::inequality::{run_suite, witness_json, Defect, SuiteKind};
use crate::operator::Comparator;
use crate::spectrum::{
    divergence_tail, entropy_tail, info_tail, sweep, EntropyTail, TailKind,
};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityParams {
    pub channel: ChannelFile,
    pub tol: f64,
    pub max_iter: usize,
    /// Overrides the channel file's budget when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepParams {
    pub channel: ChannelFile,
    /// `info`, `divergence`, `entropy-output` or `entropy-conditional`.
    pub kind: String,
    pub ns: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// Input distribution for the info/entropy kinds; uniform by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<BTreeMap<String, f64>>,
    /// Labels `[rho, sigma]` for the divergence kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<[String; 2]>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateParams {
    pub channel: ChannelFile,
    pub n: usize,
    pub code_size: usize,
    pub trials: usize,
    pub seed: u64,
    /// `lemma3` or `hsw`.
    pub decoder: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyParams {
    /// `all` or one suite name.
    pub suite: String,
    pub count: usize,
    pub adversarial: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Negative control: corrupt a constant so the suite must fail.
    #[serde(default)]
    pub inject_defect: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentParams {
    pub channel: ChannelFile,
    /// `phi-bar` (random-coding exponent over a-grid) or `psi`
    /// (cost-constrained moment exponent over s-grid).
    pub mode: String,
    pub range: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
}

/// A fully-specified invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Capacity(CapacityParams),
    Sweep(SweepParams),
    Simulate(SimulateParams),
    Verify(VerifyParams),
    Exponent(ExponentParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Capacity(_) => "capacity",
            Command::Sweep(_) => "sweep",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
            Command::Exponent(_) => "exponent",
        }
    }

    fn seed(&self) -> u64 {
        match self {
            Command::Simulate(p) => p.seed,
            Command::Verify(p) => p.seed,
            _ => 0,
        }
    }

    fn params_value(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("commands serialize");
        // Drop the tag; the record carries the name separately.
        if let Some(map) = v.as_object_mut() {
            map.remove("command");
        }
        v
    }
}

/// Result of running a command: the record plus any side files written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    /// True when a verify run found no violations (always true otherwise).
    pub verified: bool,
    /// Witness files written, if any.
    pub witness_paths: Vec<PathBuf>,
}

/// Executes a command. Witness files for failed verification runs are
/// written under `witness_dir` when given.
pub fn run(cmd: &Command, witness_dir: Option<&Path>, tol: &Tolerances) -> Result<RunOutcome> {
    let start = std::time::Instant::now();
    let (outputs, verified, witness_paths) = match cmd {
        Command::Capacity(p) => (run_capacity(p, tol)?, true, Vec::new()),
        Command::Sweep(p) => (run_sweep(p, tol)?, true, Vec::new()),
        Command::Simulate(p) => (run_simulate(p, tol)?, true, Vec::new()),
        Command::Verify(p) => run_verify(p, witness_dir, tol)?,
        Command::Exponent(p) => (run_exponent(p, tol)?, true, Vec::new()),
    };
    let record = RunRecord {
        command: cmd.name().to_string(),
        params: cmd.params_value(),
        seed: cmd.seed(),
        version: ARTIFACT_VERSION.to_string(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        outputs,
    };
    Ok(RunOutcome {
        record,
        verified,
        witness_paths,
    })
}

/// Re-executes a recorded command and reports whether the outputs are
/// byte-identical.
pub fn replay(record: &RunRecord, tol: &Tolerances) -> Result<(RunOutcome, bool)> {
    let mut tagged = record.params.clone();
    if let Some(map) = tagged.as_object_mut() {
        map.insert("command".into(), json!(record.command));
    }
    let cmd: Command = serde_json::from_value(tagged)?;
    let outcome = run(&cmd, None, tol)?;
    let identical = outcome.record.outputs_canonical() == record.outputs_canonical();
    Ok((outcome, identical))
}

fn dist_from(
    channel: &CqChannel,
    dist: &Option<BTreeMap<String, f64>>,
) -> Result<FiniteDistribution> {
    match dist {
        Some(weights) => {
            let p = FiniteDistribution::new(weights.clone())?;
            p.check_support(channel)?;
            Ok(p)
        }
        None => FiniteDistribution::uniform(channel.labels()),
    }
}

fn run_capacity(p: &CapacityParams, tol: &Tolerances) -> Result<serde_json::Value> {
    let (channel, file_cost) = p.channel.to_model(tol)?;
    let opts = SolverOptions {
        tol: p.tol,
        max_iter: p.max_iter,
    };
    let cost = match p.budget {
        Some(budget) => {
            let base = file_cost.clone().ok_or_else(|| {
                Error::ChannelFile("budget override needs costs in the channel file".into())
            })?;
            Some(base.with_budget(budget))
        }
        None => file_cost,
    };

    let result = match &cost {
        Some(cs) => cost_capacity(&channel, cs, &opts, tol)?,
        None => holevo_capacity(&channel, &opts, tol)?,
    };
    let (radius, _) = match &cost {
        Some(_) => (f64::NAN, ()),
        None => (minmax_center(&channel, &opts, tol)?.0, ()),
    };

    let optimizer: BTreeMap<String, f64> = result
        .optimizer
        .weights()
        .iter()
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    let mut out = json!({
        "value_nats": result.value,
        "value_bits": result.value / std::f64::consts::LN_2,
        "optimizer": optimizer,
        "center": entries_json(&result.center),
        "duality_gap": result.duality_gap,
        "iterations": result.iterations,
    });
    if let Some(cs) = &cost {
        let e = result.expected_cost.unwrap_or(f64::NAN);
        out["expected_cost"] = json!(e);
        out["budget"] = json!(cs.budget());
        out["cost_multiplier"] = json!(result.cost_multiplier);
        out["constraint_active"] = json!(e >= cs.budget() - 1e-6);
        out["slackness_residual"] = json!(result.cost_multiplier * (e - cs.budget()));
    } else {
        out["minmax_radius"] = json!(radius);
    }
    Ok(out)
}

fn run_sweep(p: &SweepParams, tol: &Tolerances) -> Result<serde_json::Value> {
    let (channel, _) = p.channel.to_model(tol)?;
    let epsilon = p.epsilon;
    let curve = match p.kind.as_str() {
        "info" => {
            let dist = dist_from(&channel, &p.dist)?;
            sweep(
                TailKind::InfoTail,
                format!("info tail, {} inputs, d = {}", channel.len(), channel.dim()),
                &p.ns,
                &p.thresholds,
                epsilon,
                |n, a| info_tail(&dist, &channel, n, a, Comparator::Greater, tol),
            )?
        }
        "divergence" => {
            let [r_label, s_label] = p
                .states
                .as_ref()
                .ok_or_else(|| {
                    Error::InvalidParameter("divergence sweep needs two state labels".into())
                })?
                .clone();
            let rho = channel.state(&r_label)?.clone();
            let sigma = channel.state(&s_label)?.clone();
            sweep(
                TailKind::DivergenceTail,
                format!("divergence tail, rho = {r_label}, sigma = {s_label}"),
                &p.ns,
                &p.thresholds,
                epsilon,
                |n, a| divergence_tail(&rho, &sigma, n, a, tol),
            )?
        }
        "entropy" | "entropy-output" => {
            let dist = dist_from(&channel, &p.dist)?;
            sweep(
                TailKind::EntropyTailOutput,
                "output entropy tail".to_string(),
                &p.ns,
                &p.thresholds,
                epsilon,
                |n, b| entropy_tail(&dist, &channel, n, b, EntropyTail::OutputLower, tol),
            )?
        }
        "entropy-conditional" => {
            let dist = dist_from(&channel, &p.dist)?;
            sweep(
                TailKind::EntropyTailConditional,
                "conditional entropy tail".to_string(),
                &p.ns,
                &p.thresholds,
                epsilon,
                |n, c| entropy_tail(&dist, &channel, n, c, EntropyTail::ConditionalUpper, tol),
            )?
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown sweep kind `{other}`"
            )))
        }
    };
    Ok(json!({
        "kind": curve.kind.as_str(),
        "metadata": curve.metadata,
        "csv": curve.to_csv(),
        "bracket": curve.bracket,
    }))
}

fn run_simulate(p: &SimulateParams, tol: &Tolerances) -> Result<serde_json::Value> {
    let (channel, file_cost) = p.channel.to_model(tol)?;
    let dist = dist_from(&channel, &p.dist)?;
    let cost = match p.budget {
        Some(budget) => Some(
            file_cost
                .clone()
                .ok_or_else(|| {
                    Error::ChannelFile("budget override needs costs in the channel file".into())
                })?
                .with_budget(budget),
        ),
        None => file_cost,
    };

    let decoder = match p.decoder.as_str() {
        "lemma3" => DecoderKind::Lemma3 {
            a: p.a.ok_or_else(|| {
                Error::InvalidParameter("lemma3 decoder needs the rate threshold a".into())
            })?,
        },
        "hsw" => DecoderKind::Hsw {
            b: p.b.ok_or_else(|| {
                Error::InvalidParameter("hsw decoder needs b".into())
            })?,
            c: p.c.ok_or_else(|| {
                Error::InvalidParameter("hsw decoder needs c".into())
            })?,
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown decoder `{other}`"
            )))
        }
    };
    let spec = ExperimentSpec {
        n: p.n,
        code_size: p.code_size,
        trials: p.trials,
        seed: p.seed,
        decoder,
    };
    let report = random_coding_experiment(&spec, &dist, &channel, cost.as_ref(), tol)?;

    // Bound comparison table. The sphere-packing style bound is evaluated at
    // the code's actual rate log(N)/n.
    let rate = (p.code_size as f64).ln() / p.n as f64;
    let lemma3_a = p.a.unwrap_or(rate);
    let miss = 1.0 - info_tail(&dist, &channel, p.n, lemma3_a, Comparator::Greater, tol)?;
    let direct = direct_bound_rhs(miss, p.n, lemma3_a, p.code_size, Some(1.0))?;
    let hsw = match (p.b, p.c) {
        (Some(b), Some(c)) => Some(
            hsw_random_bound(&dist, &channel, p.n, b, c, p.code_size, tol)?.value(),
        ),
        _ => None,
    };
    let exponent = phi_bar(rate, &dist, &channel, tol)?;
    let sp = sp_code_bound(p.n, exponent.dim_parameter, exponent.value);

    // Probability bounds above 1 are reported clipped, with the raw value
    // kept and flagged as vacuous.
    let clip = |raw: f64| {
        json!({ "raw": raw, "clipped": raw.min(1.0), "vacuous": raw > 1.0 })
    };
    Ok(json!({
        "report": report,
        "bounds": {
            "lemma3_at_c1": clip(direct.at_c),
            "lemma3_optimal": clip(direct.optimal),
            "lemma3_threshold": lemma3_a,
            "hsw": hsw.map(clip),
            "sp_exponent": { "rate": rate, "phi_bar": exponent.value, "bound": sp },
        },
    }))
}

fn run_verify(
    p: &VerifyParams,
    witness_dir: Option<&Path>,
    tol: &Tolerances,
) -> Result<(serde_json::Value, bool, Vec<PathBuf>)> {
    let kinds: Vec<SuiteKind> = if p.suite == "all" {
        SuiteKind::ALL.to_vec()
    } else {
        vec![SuiteKind::parse(&p.suite).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown suite `{}` (all, lemma2, neyman-pearson, ogawa-nagaoka, tau-nu, cross-term)",
                p.suite
            ))
        })?]
    };
    let defect = p.inject_defect.then_some(Defect { shrink_rhs: 0.2 });

    let mut suites = Vec::new();
    let mut verified = true;
    let mut witness_paths = Vec::new();
    for kind in kinds {
        let out = run_suite(
            kind,
            &p.dims,
            p.count,
            p.adversarial,
            p.seed,
            defect,
            tol,
        )?;
        let pass = out.failures.is_empty();
        verified &= pass;
        let witnesses: Vec<serde_json::Value> =
            out.failures.iter().map(witness_json).collect();
        if let (Some(dir), false) = (witness_dir, witnesses.is_empty()) {
            std::fs::create_dir_all(dir)?;
            for (i, w) in witnesses.iter().enumerate() {
                let path = dir.join(format!(
                    "witness-{}-seed{}-{}.json",
                    kind.as_str(),
                    p.seed,
                    i
                ));
                std::fs::write(&path, serde_json::to_string_pretty(w)?)?;
                witness_paths.push(path);
            }
        }
        suites.push(json!({
            "suite": kind.as_str(),
            "checked": out.checked,
            "min_margin": out.min_margin,
            "margin_floor": kind.margin_floor(),
            "worst_seed": out.worst,
            "pass": pass,
            "witnesses": witnesses,
        }));
    }
    let value = json!({
        "pass": verified,
        "vacuous": p.count + p.adversarial == 0,
        "suites": suites,
    });
    Ok((value, verified, witness_paths))
}

fn run_exponent(p: &ExponentParams, tol: &Tolerances) -> Result<serde_json::Value> {
    let (channel, file_cost) = p.channel.to_model(tol)?;
    match p.mode.as_str() {
        "phi-bar" => {
            let dist = dist_from(&channel, &p.dist)?;
            let mut csv = String::from("a,phi_bar,t_star\n");
            let mut rows = Vec::new();
            for &a in &p.range {
                let rep = phi_bar(a, &dist, &channel, tol)?;
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt_f64(a),
                    fmt_f64(rep.value),
                    fmt_f64(rep.t_star)
                ));
                rows.push(json!({
                    "a": a,
                    "phi_bar": rep.value,
                    "t_star": rep.t_star,
                    "dim_parameter": rep.dim_parameter,
                }));
            }
            Ok(json!({ "mode": "phi-bar", "csv": csv, "rows": rows }))
        }
        "psi" => {
            let cost = match p.budget {
                Some(budget) => file_cost
                    .ok_or_else(|| {
                        Error::ChannelFile(
                            "psi exponent needs costs in the channel file".into(),
                        )
                    })?
                    .with_budget(budget),
                None => file_cost.ok_or_else(|| {
                    Error::InvalidParameter(
                        "psi exponent needs a cost budget (channel file or --budget)".into(),
                    )
                })?,
            };
            // Reference state: the min-max center of the unconstrained
            // channel.
            let opts = SolverOptions::default();
            let (_, sigma) = minmax_center(&channel, &opts, tol)?;
            let mut csv = String::from("s,psi\n");
            let mut rows = Vec::new();
            for &s in &p.range {
                let v = psi_exponent(&channel, &sigma, &cost, s, tol)?;
                csv.push_str(&format!("{},{}\n", fmt_f64(s), fmt_f64(v)));
                rows.push(json!({ "s": s, "psi": v }));
            }
            Ok(json!({ "mode": "psi", "csv": csv, "rows": rows }))
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown exponent mode `{other}`"
        ))),
    }
}
