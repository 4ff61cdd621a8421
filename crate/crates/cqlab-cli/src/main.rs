//! Batch front end: capacity solves, spectrum sweeps, random-coding
//! simulations, inequality verification, and exponent curves, with every run
//! persisted as a replayable record.
//!
//! Exit codes: 0 success, 1 verification failure (witnesses written),
//! 2 usage or input error, 3 resource bound exceeded.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cqlab::files::{ChannelFile, RunRecord};
use cqlab::presets::{preset, PRESET_NAMES};
use cqlab::runner::{
    self, CapacityParams, Command, ExponentParams, SimulateParams, SweepParams, VerifyParams,
};
use cqlab::{Error, Tolerances};

#[derive(Parser)]
#[command(name = "cqlab", version, about = "finite-blocklength laboratory for classical-quantum channel coding")]
struct Cli {
    /// Cap the worker thread count (default: all cores, or CQLAB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the full run record (JSON) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct ChannelArgs {
    /// Channel file (JSON). Exactly one of --channel / --preset.
    #[arg(long, conflicts_with = "preset")]
    channel: Option<PathBuf>,

    /// Bundled preset channel; see `cqlab presets`.
    #[arg(long)]
    preset: Option<String>,

    /// Preset parameter (flip probability for bsc, angle for
    /// two-pure-overlap).
    #[arg(long, requires = "preset")]
    param: Option<f64>,
}

impl ChannelArgs {
    fn load(&self) -> Result<ChannelFile, Error> {
        match (&self.channel, &self.preset) {
            (Some(path), None) => ChannelFile::parse(&std::fs::read_to_string(path)?),
            (None, Some(name)) => {
                let p = preset(name, self.param)?;
                Ok(ChannelFile::from_model(&p.channel, None))
            }
            _ => Err(Error::InvalidParameter(
                "give exactly one of --channel FILE or --preset NAME".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Holevo capacity (optionally cost-constrained).
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Duality-gap stopping threshold in nats.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Per-symbol cost budget (requires costs in the channel file).
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Finite-n tail sweep over an (n, threshold) grid; emits CSV.
    Sweep {
        #[command(flatten)]
        channel: ChannelArgs,
        /// info | divergence | entropy-output | entropy-conditional
        #[arg(long)]
        kind: String,
        /// Blocklengths: comma list (1,2,4) or inclusive range (1:6).
        #[arg(long = "n")]
        ns: String,
        /// Thresholds in nats/symbol: comma list or lo:hi:steps.
        #[arg(long = "thresholds", alias = "a-range", allow_hyphen_values = true)]
        thresholds: String,
        /// Input distribution, e.g. x0=0.3,x1=0.7 (default uniform).
        #[arg(long)]
        dist: Option<String>,
        /// Two labels "rho,sigma" for the divergence kind.
        #[arg(long)]
        states: Option<String>,
        /// Bracket tolerance.
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        /// Write the CSV here (default: stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Random-coding experiment with exact per-trial error evaluation.
    Simulate {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long)]
        n: usize,
        /// Code size N.
        #[arg(long = "code-size", alias = "N")]
        code_size: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// lemma3 | hsw
        #[arg(long, default_value = "lemma3")]
        decoder: String,
        /// Rate threshold for the lemma3 decoder.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Output-entropy threshold for the hsw decoder.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        /// Codeword-entropy threshold for the hsw decoder.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long)]
        dist: Option<String>,
        /// Cost budget for restricted random coding.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Randomized verification of the operator inequalities.
    Verify {
        /// all | lemma2 | neyman-pearson | ogawa-nagaoka | tau-nu | cross-term
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 100)]
        adversarial: usize,
        /// Candidate dimensions: comma list or inclusive range (2:8).
        #[arg(long, default_value = "2:8")]
        dims: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for witness files of any violations.
        #[arg(long, default_value = "cqlab-witnesses")]
        witness_dir: PathBuf,
        /// Test mode: corrupt a constant so the suite must fail.
        #[arg(long, hide = true)]
        inject_defect: bool,
    },
    /// Error-exponent curves: phi-bar over an a-grid or psi over an s-grid.
    Exponent {
        #[command(flatten)]
        channel: ChannelArgs,
        /// phi-bar | psi
        #[arg(long, default_value = "phi-bar")]
        mode: String,
        /// Grid: comma list or lo:hi:steps.
        #[arg(long, alias = "a-range", alias = "s-range", allow_hyphen_values = true)]
        range: String,
        #[arg(long)]
        dist: Option<String>,
        /// Cost budget (psi mode).
        #[arg(long)]
        budget: Option<f64>,
        /// Reference state for psi; only `auto` (the min-max center).
        #[arg(long, default_value = "auto")]
        sigma: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-execute a stored run record and check bit-identity of outputs.
    Replay {
        record: PathBuf,
    },
    /// List bundled preset channels.
    Presets,
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, Error> {
    let bad = |_| Error::InvalidParameter(format!("cannot parse `{text}` as integer list"));
    if let Some((lo, hi)) = text.split_once(':') {
        let lo: usize = lo.trim().parse().map_err(bad)?;
        let hi: usize = hi.trim().parse().map_err(bad)?;
        if lo > hi {
            return Err(Error::InvalidParameter(format!("empty range `{text}`")));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(bad))
        .collect()
}

fn parse_f64_grid(text: &str) -> Result<Vec<f64>, Error> {
    let bad = |_| Error::InvalidParameter(format!("cannot parse `{text}` as number grid"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        3 => {
            let lo: f64 = parts[0].trim().parse().map_err(bad)?;
            let hi: f64 = parts[1].trim().parse().map_err(bad)?;
            let steps: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad step count in `{text}`")))?;
            if steps < 2 {
                return Ok(vec![lo]);
            }
            Ok((0..steps)
                .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                .collect())
        }
        1 => text
            .split(',')
            .map(|s| s.trim().parse().map_err(bad))
            .collect(),
        _ => Err(Error::InvalidParameter(format!(
            "grid must be `lo:hi:steps` or a comma list, got `{text}`"
        ))),
    }
}

fn parse_dist(text: &str) -> Result<BTreeMap<String, f64>, Error> {
    let mut map = BTreeMap::new();
    for part in text.split(',') {
        let (label, w) = part.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("distribution entries look like label=weight: `{part}`"))
        })?;
        let w: f64 = w.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("bad weight in `{part}`"))
        })?;
        map.insert(label.trim().to_string(), w);
    }
    Ok(map)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::DimensionBound { .. }
        | Error::CombinatorialBound { .. }
        | Error::ThresholdOverflow { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        cqlab::parallel::set_worker_cap(n);
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    let tol = Tolerances::default();
    let (cmd, csv_path, witness_dir) = match &cli.command {
        Cmd::Presets => {
            for name in PRESET_NAMES {
                let p = preset(name, None)?;
                println!(
                    "{name:20} {}  [known capacity: {} nats]",
                    p.description,
                    p.known_capacity
                        .map(|c| format!("{c:.9}"))
                        .unwrap_or_else(|| "-".into())
                );
            }
            return Ok(ExitCode::SUCCESS);
        }
        Cmd::Replay { record } => {
            let rec = RunRecord::parse(&std::fs::read_to_string(record)?)?;
            let (outcome, identical) = runner::replay(&rec, &tol)?;
            println!(
                "replayed `{}` (version {} -> {}): outputs {}",
                rec.command,
                rec.version,
                outcome.record.version,
                if identical { "bit-identical" } else { "DIVERGED" }
            );
            if let Some(out) = &cli.out {
                std::fs::write(out, outcome.record.render())?;
            }
            return Ok(if identical {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        Cmd::Capacity {
            channel,
            tol: gap_tol,
            max_iter,
            budget,
        } => (
            Command::Capacity(CapacityParams {
                channel: channel.load()?,
                tol: *gap_tol,
                max_iter: *max_iter,
                budget: *budget,
            }),
            None,
            None,
        ),
        Cmd::Sweep {
            channel,
            kind,
            ns,
            thresholds,
            dist,
            states,
            epsilon,
            csv,
        } => {
            let states = match states {
                Some(s) => {
                    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
                    if parts.len() != 2 {
                        return Err(Error::InvalidParameter(
                            "--states takes two labels: rho,sigma".into(),
                        ));
                    }
                    Some([parts[0].to_string(), parts[1].to_string()])
                }
                None => None,
            };
            (
                Command::Sweep(SweepParams {
                    channel: channel.load()?,
                    kind: kind.clone(),
                    ns: parse_usize_list(ns)?,
                    thresholds: parse_f64_grid(thresholds)?,
                    dist: dist.as_deref().map(parse_dist).transpose()?,
                    states,
                    epsilon: *epsilon,
                }),
                csv.clone(),
                None,
            )
        }
        Cmd::Simulate {
            channel,
            n,
            code_size,
            trials,
            seed,
            decoder,
            a,
            b,
            c,
            dist,
            budget,
        } => (
            Command::Simulate(SimulateParams {
                channel: channel.load()?,
                n: *n,
                code_size: *code_size,
                trials: *trials,
                seed: *seed,
                decoder: decoder.clone(),
                a: *a,
                b: *b,
                c: *c,
                dist: dist.as_deref().map(parse_dist).transpose()?,
                budget: *budget,
            }),
            None,
            None,
        ),
        Cmd::Verify {
            suite,
            count,
            adversarial,
            dims,
            seed,
            witness_dir,
            inject_defect,
        } => (
            Command::Verify(VerifyParams {
                suite: suite.clone(),
                count: *count,
                adversarial: *adversarial,
                dims: parse_usize_list(dims)?,
                seed: *seed,
                inject_defect: *inject_defect,
            }),
            None,
            Some(witness_dir.clone()),
        ),
        Cmd::Exponent {
            channel,
            mode,
            range,
            dist,
            budget,
            sigma,
            csv,
        } => {
            if sigma != "auto" {
                return Err(Error::InvalidParameter(
                    "only --sigma auto (the min-max center) is supported".into(),
                ));
            }
            (
            Command::Exponent(ExponentParams {
                channel: channel.load()?,
                mode: mode.clone(),
                range: parse_f64_grid(range)?,
                dist: dist.as_deref().map(parse_dist).transpose()?,
                budget: *budget,
            }),
            csv.clone(),
            None,
            )
        }
    };

    let outcome = runner::run(&cmd, witness_dir.as_deref(), &tol)?;
    print_summary(&outcome.record);
    if let Some(path) = csv_path {
        if let Some(csv) = outcome.record.outputs.get("csv").and_then(|v| v.as_str()) {
            std::fs::write(&path, csv)?;
            println!("csv written to {}", path.display());
        }
    }
    if let Some(out) = &cli.out {
        std::fs::write(out, outcome.record.render())?;
        println!("run record written to {}", out.display());
    }
    for p in &outcome.witness_paths {
        println!("witness: {}", p.display());
    }
    Ok(if outcome.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn print_summary(rec: &RunRecord) {
    let o = &rec.outputs;
    match rec.command.as_str() {
        "capacity" => {
            println!(
                "C = {:.9} nats = {:.9} bits  (duality gap {:.3e}, {} iterations)",
                o["value_nats"].as_f64().unwrap_or(f64::NAN),
                o["value_bits"].as_f64().unwrap_or(f64::NAN),
                o["duality_gap"].as_f64().unwrap_or(f64::NAN),
                o["iterations"].as_u64().unwrap_or(0),
            );
            if let Some(p) = o["optimizer"].as_object() {
                let parts: Vec<String> = p
                    .iter()
                    .map(|(k, v)| format!("{k}={:.6}", v.as_f64().unwrap_or(f64::NAN)))
                    .collect();
                println!("P* : {}", parts.join("  "));
            }
            if let Some(e) = o.get("expected_cost").and_then(|v| v.as_f64()) {
                println!(
                    "E[c] = {:.6} (budget {}, constraint {})",
                    e,
                    o["budget"],
                    if o["constraint_active"].as_bool() == Some(true) {
                        "active"
                    } else {
                        "inactive"
                    }
                );
            } else if let Some(r) = o.get("minmax_radius").and_then(|v| v.as_f64()) {
                println!("min-max radius = {r:.9} nats (duality check)");
            }
        }
        "sweep" => {
            let b = &o["bracket"];
            println!(
                "{} sweep; bracket at n = {}: below {} / above {}  [{}]",
                o["kind"].as_str().unwrap_or("?"),
                b["n"],
                b["below"],
                b["above"],
                b["note"].as_str().unwrap_or(""),
            );
            if let Some(csv) = o["csv"].as_str() {
                print!("{csv}");
            }
        }
        "simulate" => {
            let r = &o["report"];
            println!(
                "mean P_e = {:.6} (se {:.2e}), min P_e = {:.6} over {} trials",
                r["mean_pe"].as_f64().unwrap_or(f64::NAN),
                r["std_error"].as_f64().unwrap_or(f64::NAN),
                r["min_pe"].as_f64().unwrap_or(f64::NAN),
                r["spec"]["trials"],
            );
            let b = &o["bounds"];
            let show = |bound: &serde_json::Value| -> String {
                match bound.get("raw").and_then(|v| v.as_f64()) {
                    Some(raw) if raw > 1.0 => format!("1 (vacuous, raw {raw:.4})"),
                    Some(raw) => format!("{raw:.6}"),
                    None => "-".into(),
                }
            };
            println!(
                "bounds: lemma3(c=1) {}, lemma3(opt) {}, hsw {}, sp {:.6} (phi_bar {:.6} at rate {:.4})",
                show(&b["lemma3_at_c1"]),
                show(&b["lemma3_optimal"]),
                show(&b["hsw"]),
                b["sp_exponent"]["bound"].as_f64().unwrap_or(f64::NAN),
                b["sp_exponent"]["phi_bar"].as_f64().unwrap_or(f64::NAN),
                b["sp_exponent"]["rate"].as_f64().unwrap_or(f64::NAN),
            );
            if let Some(budget) = r.get("budget").filter(|b| !b.is_null()) {
                println!(
                    "budget sampling: exact K_n = {:.6}, empirical {:.6} ({} / {} draws)",
                    budget["exact_kn"].as_f64().unwrap_or(f64::NAN),
                    budget["empirical_kn"].as_f64().unwrap_or(f64::NAN),
                    budget["accepted"],
                    budget["draws"],
                );
            }
        }
        "verify" => {
            for s in o["suites"].as_array().into_iter().flatten() {
                println!(
                    "{:16} {}  checked {:6}  min margin {:.3e} (floor {:.0e})",
                    s["suite"].as_str().unwrap_or("?"),
                    if s["pass"].as_bool() == Some(true) {
                        "pass"
                    } else {
                        "FAIL"
                    },
                    s["checked"],
                    s["min_margin"].as_f64().unwrap_or(f64::NAN),
                    s["margin_floor"].as_f64().unwrap_or(f64::NAN),
                );
            }
            if o["vacuous"].as_bool() == Some(true) {
                println!("warning: zero instances requested, pass is vacuous");
            }
        }
        "exponent" => {
            if let Some(csv) = o["csv"].as_str() {
                print!("{csv}");
            }
        }
        _ => {}
    }
}
