use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use majcolor::code::{min_logical_weight, validate_code, CodeLayout};
use majcolor::decoder::{Decoder, Weighting};
use majcolor::exactsim::{
    simulate_stab_meas_circuit, verify_distillation, verify_exchange_and_phase, verify_qubit_encoding,
    verify_tgate_circuit, verify_transfer_circuit, StabMeasQuery,
};
use majcolor::noisesim::{build_schedule, read_histories, run_shots, write_histories, ErrorParams, HistoryHeader};
use majcolor::surgery::{run_surgery, verify_logical_phase, MergeType};
use majcolor::threshold::{
    compounded, estimate_threshold, run_threshold_with, write_csv, Crossing, RoundsPolicy, SweepConfig, ThresholdRecord,
};
use majcolor::{build_code, Report};

#[derive(Parser)]
#[command(name = "majcolor", version, about = "Majorana color code construction, verification, simulation and decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the triangular code and write its layout as JSON.
    Build {
        #[arg(long)]
        d: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every layout invariant.
    Validate {
        #[command(flatten)]
        src: LayoutSource,
        #[arg(long)]
        json: bool,
    },
    /// Exact small-system checks of the gate, transfer, T-gate,
    /// stabilizer-measurement and distillation circuits.
    VerifyCircuits {
        #[arg(long)]
        json: bool,
    },
    /// Build a lattice-surgery merge, construct its bar pattern and check
    /// the outcome identities.
    VerifySurgery {
        #[arg(long, default_value_t = 5)]
        d: usize,
        /// 1 (type-I), 2 (type-II) or pp (parity projection).
        #[arg(long = "type", default_value = "1")]
        merge_type: MergeType,
        #[arg(long)]
        json: bool,
    },
    /// Minimum weight of a logical string; must equal d.
    Distance {
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        d: Vec<usize>,
    },
    /// Run noisy memory experiments and write the syndrome histories.
    Simulate {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        rate: Rate,
        /// Noisy rounds; defaults to d.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a history file and report logical failures.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "probability")]
        weighting: Weighting,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo threshold sweep; writes the CSV and prints crossings.
    Threshold(ThresholdArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct LayoutSource {
    #[arg(long)]
    d: Option<usize>,
    /// A layout JSON written by `build`.
    #[arg(long)]
    layout: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Rate {
    /// Per-primitive fault rate ε.
    #[arg(long)]
    eps: Option<f64>,
    /// Parity-projection error rate 5ε.
    #[arg(long)]
    pp: Option<f64>,
}

impl Rate {
    fn params(&self) -> majcolor::Result<ErrorParams> {
        match (self.eps, self.pp) {
            (Some(e), _) => ErrorParams::new(e),
            (_, Some(pp)) => ErrorParams::from_pp_rate(pp),
            _ => unreachable!("clap requires one of --eps/--pp"),
        }
    }
}

#[derive(Args)]
struct ThresholdArgs {
    /// JSON sweep configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', conflicts_with = "pp_list")]
    eps_list: Option<Vec<f64>>,
    /// Parity-projection rates; converted to ε = pp / 5.
    #[arg(long, value_delimiter = ',')]
    pp_list: Option<Vec<f64>>,
    #[arg(long)]
    shots: Option<u64>,
    /// `d` or a fixed number of rounds.
    #[arg(long)]
    rounds: Option<RoundsPolicy>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    weighting: Option<Weighting>,
    /// Suppress per-point progress on stderr.
    #[arg(long, short)]
    quiet: bool,
}

impl ThresholdArgs {
    fn config(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                SweepConfig::from_json(&text)?
            }
            None => SweepConfig::default(),
        };
        if let Some(v) = &self.d_list {
            cfg.d_list = v.clone();
        }
        if let Some(v) = &self.eps_list {
            cfg.eps_list = v.clone();
        }
        if let Some(v) = &self.pp_list {
            cfg.eps_list = v.iter().map(|pp| pp / 5.0).collect();
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
        }
        if let Some(r) = self.rounds {
            cfg.rounds = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.weighting {
            cfg.weighting = w;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn show(reports: &[Report], json: bool) -> Result<bool> {
    if json {
        println!("{}", serde_json::to_string_pretty(reports)?);
    } else {
        for r in reports {
            print!("{r}");
        }
    }
    Ok(reports.iter().all(Report::passed))
}

fn load_layout(src: &LayoutSource) -> Result<CodeLayout> {
    match (&src.d, &src.layout) {
        (Some(d), _) => Ok(build_code(*d)?),
        (_, Some(p)) => CodeLayout::load(p).with_context(|| format!("loading {}", p.display())),
        _ => unreachable!("clap requires one of --d/--layout"),
    }
}

/// `Ok(true)` on success, `Ok(false)` when a check failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Build { d, out } => {
            let layout = build_code(d)?;
            let mut w = output(out.as_ref())?;
            writeln!(w, "{}", layout.to_json()?)?;
            w.flush()?;
            if let Some(p) = out {
                eprintln!(
                    "d = {d}: {} modes, {} plaquettes -> {}",
                    layout.n_vertices(),
                    layout.plaquettes.len(),
                    p.display()
                );
            }
            Ok(true)
        }
        Command::Validate { src, json } => {
            let layout = load_layout(&src)?;
            let report = validate_code(&layout);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("d = {}, {} modes", layout.d, layout.n_vertices());
                print!("{report}");
            }
            Ok(report.all_passed())
        }
        Command::VerifyCircuits { json } => {
            let stab = simulate_stab_meas_circuit(&StabMeasQuery::default())?;
            let reports = [
                verify_exchange_and_phase(),
                verify_qubit_encoding(),
                verify_transfer_circuit(),
                verify_tgate_circuit(),
                stab.to_report(1e-9),
                verify_distillation(),
            ];
            show(&reports, json)
        }
        Command::VerifySurgery { d, merge_type, json } => {
            let (m, pattern, report) = run_surgery(d, merge_type)?;
            let phase = verify_logical_phase(&m.patches[0]);
            if !json {
                println!(
                    "{merge_type}, d = {d}: {} modes ({} ancilla), {} bars",
                    m.n_modes(),
                    m.ancilla.len(),
                    pattern.bars.len()
                );
            }
            show(&[report, phase], json)
        }
        Command::Distance { d } => {
            let mut ok = true;
            for d in d {
                let w = min_logical_weight(&build_code(d)?);
                println!("d = {d}: minimum logical weight {w}");
                ok &= w == d;
            }
            Ok(ok)
        }
        Command::Simulate { d, rate, rounds, shots, seed, out } => {
            let params = rate.params()?;
            let rounds = rounds.unwrap_or(d);
            anyhow::ensure!(rounds > 0, majcolor::Error::Config("rounds must be at least 1".into()));
            let layout = build_code(d)?;
            let histories = run_shots(&build_schedule(&layout), &params, rounds, shots, seed);
            let header = HistoryHeader {
                d,
                rounds,
                n_plaquettes: layout.plaquettes.len(),
                n_data: layout.n_vertices(),
                shots,
                epsilon: params.epsilon,
                seed,
            };
            let f = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_histories(BufWriter::new(f), &header, &histories)?;
            let quiet = histories.iter().filter(|h| h.is_trivial()).count();
            println!("{shots} shots, d = {d}, {rounds} rounds, ε = {}: {quiet} without any flip", params.epsilon);
            Ok(true)
        }
        Command::Decode { input, weighting, json } => {
            let f = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let (header, shots) = read_histories(BufReader::new(f))?;
            let layout = build_code(header.d)?;
            // A noiseless file still needs finite weights.
            let eps = if header.epsilon > 0.0 { header.epsilon } else { 1e-3 };
            let decoder = Decoder::new(&layout, header.rounds, &ErrorParams::new(eps)?, weighting);
            let matcher = decoder.matcher();
            let mut failures = 0u64;
            for h in &shots {
                failures += u64::from(decoder.decode_with(&matcher, h)?.logical_failure);
            }
            if json {
                let v = serde_json::json!({ "header": header, "failures": failures });
                println!("{}", serde_json::to_string_pretty(&v)?);
            } else {
                println!(
                    "{} shots, d = {}, {} rounds: {failures} logical failures ({:.3e} per round)",
                    header.shots,
                    header.d,
                    header.rounds,
                    failures as f64 / (header.shots.max(1) as f64 * header.rounds as f64)
                );
            }
            Ok(true)
        }
        Command::Threshold(args) => {
            let cfg = args.config()?;
            let quiet = args.quiet;
            let records = run_threshold_with(&cfg, |r| {
                if !quiet {
                    eprintln!(
                        "d = {:<2} 5ε = {:.4}: {} / {} failures, {:.3e} per round",
                        r.d, r.pp_rate, r.failures, r.shots, r.rate_per_round
                    );
                }
            })?;
            let mut w = output(cfg.out.as_ref())?;
            write_csv(&mut w, &records)?;
            w.flush()?;
            drop(w);
            if cfg.d_list.len() >= 2 {
                print_crossings("rate = failures/(shots·R)", &records);
                print_crossings("compounded per-round rate", &compounded(&records));
            }
            Ok(true)
        }
    }
}

fn print_crossings(label: &str, records: &[ThresholdRecord]) {
    let est = match estimate_threshold(records) {
        Ok(est) => est,
        Err(e) => {
            eprintln!("{label}: no threshold estimate: {e}");
            return;
        }
    };
    for p in &est.pairs {
        match p.crossing {
            Crossing::At { pp, sigma } => {
                eprintln!("{label}: crossing d = {}/{} at 5ε = {pp:.4} ± {sigma:.4}", p.d_small, p.d_large)
            }
            Crossing::NoCrossing => {
                eprintln!("{label}: crossing d = {}/{} not in the scanned window", p.d_small, p.d_large)
            }
        }
    }
}

/// Bad input is a usage error; anything else is a failed run.
fn exit_code(e: &anyhow::Error) -> u8 {
    use majcolor::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::Config(_) | E::InvalidDistance { .. } | E::Format(_) | E::Json(_) | E::Io(_)) => 2,
        Some(_) => 1,
        None if e.downcast_ref::<io::Error>().is_some() => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
