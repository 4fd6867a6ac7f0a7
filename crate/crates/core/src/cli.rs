//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on data or validation errors (including a
//! failed `reproduce`), 2 on usage errors.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::Statistics;
use crate::game::{
    enumerate_deterministic_strategies, strategy_distribution, ClassicalStrategy,
    ConditionalDistribution, CoherenceReport, Response,
};
use crate::observable::BlochObservable;
use crate::report::{self, game_provenance, Envelope, Provenance, ReproduceOptions};
use crate::scheme_one::{self, SchemeOneConfig};
use crate::scheme_two::{self, SourceAmplitudes};
use crate::sweep::{self, Grid, Scheme};
use crate::trials::{self, DEFAULT_ALPHA, DEFAULT_SEED, SEED_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TrialSource {
    /// Detection strategy with equal branch weights.
    Classical,
    /// Scheme one, bosons, sigma_x on both sides.
    Scheme1,
    /// Scheme two, balanced source, sigma_x on both sides.
    Scheme2,
}

#[derive(Debug, Parser)]
#[command(name = "coherence-game", version, about = "Coherence-without-re-interference game simulator")]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical one-way-signalling strategies.
    Classical {
        /// Report all 32 deterministic strategies.
        #[arg(long)]
        enumerate: bool,
        /// Weight of the path to Alice for the detection strategy.
        #[arg(long, default_value_t = 0.5)]
        lambda_sa: f64,
    },
    /// Source plus shared ancilla, post-selected on one particle per side.
    Scheme1 {
        #[arg(long)]
        stats: Statistics,
        #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
        theta_a: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi_a: f64,
        #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
        theta_b: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi_b: f64,
    },
    /// Single particle over two modes, vacuum/one-particle readout.
    Scheme2 {
        #[arg(long, default_value = "boson")]
        stats: Statistics,
        /// Magnitude of the amplitude on |1>_A|0>_B (rescaled together with --s1).
        #[arg(long, default_value_t = FRAC_1_SQRT_2, allow_negative_numbers = true)]
        s0: f64,
        #[arg(long, default_value_t = FRAC_1_SQRT_2, allow_negative_numbers = true)]
        s1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s0_phase: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s1_phase: f64,
        #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
        theta_a: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi_a: f64,
        #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
        theta_b: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi_b: f64,
    },
    /// Grid search for the largest win probability.
    Sweep {
        #[arg(long, value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long, default_value = "boson")]
        stats: Statistics,
        /// Points per polar-angle axis.
        #[arg(long, default_value_t = 37)]
        resolution: usize,
        /// Also write every grid point and its value as CSV.
        #[arg(long)]
        grid_csv: Option<PathBuf>,
    },
    /// Sample game rounds and test them against the classical value 1/2.
    Trials {
        #[arg(long, value_enum, default_value_t = TrialSource::Scheme1)]
        source: TrialSource,
        /// Play from a distribution file (JSON or CSV) instead of --source.
        #[arg(long)]
        dist: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Recompute every headline number and check it.
    Reproduce {
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Test hook: offset added to every computed value.
        #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
        perturb: f64,
    },
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    match s {
        "one" | "1" | "scheme1" => Ok(Scheme::One),
        "two" | "2" | "scheme2" => Ok(Scheme::Two),
        other => Err(format!("unknown scheme `{other}` (expected one or two)")),
    }
}

/// Runs a parsed command. `Ok(false)` means the command ran but its checks
/// failed.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            let ok = execute(cli, &mut w)?;
            w.flush()?;
            Ok(ok)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            execute(cli, &mut w)
        }
    }
}

fn write_json<T: Serialize, W: Write + ?Sized>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct StrategyRow {
    index: usize,
    strategy: ClassicalStrategy,
    p_win: f64,
    interference: [f64; 4],
}

#[derive(Serialize)]
struct ClassicalBody {
    strategies: Vec<StrategyRow>,
    all_interference_zero: bool,
    all_p_win_half: bool,
}

#[derive(Serialize)]
struct DetectionBody {
    lambda_sa: f64,
    p_table: ConditionalDistribution,
    interference: [f64; 4],
    p_win: f64,
}

#[derive(Serialize)]
struct TrialsBody {
    source: String,
    #[serde(flatten)]
    significance: trials::SignificanceReport,
}

fn function_name(r: &Response) -> String {
    format!("{:?}/{:?}", r.a, r.b).to_lowercase()
}

/// Runs the command, writing its report to `out`.
pub fn execute<W: Write + ?Sized>(cli: &Cli, out: &mut W) -> Result<bool> {
    match &cli.command {
        Command::Classical {
            enumerate,
            lambda_sa,
        } => {
            if *enumerate {
                let rows: Vec<StrategyRow> = enumerate_deterministic_strategies()
                    .into_iter()
                    .enumerate()
                    .map(|(index, strategy)| {
                        let r = CoherenceReport::of(&strategy_distribution(&strategy));
                        StrategyRow {
                            index,
                            strategy,
                            p_win: r.p_win,
                            interference: r.interference,
                        }
                    })
                    .collect();
                let all_zero = rows.iter().all(|r| r.interference.iter().all(|i| i.abs() <= 1e-12));
                let all_half = rows.iter().all(|r| (r.p_win - 0.5).abs() <= 1e-12);
                match cli.format {
                    Format::Json => write_json(
                        out,
                        &Envelope::new(
                            "classical",
                            game_provenance(),
                            ClassicalBody {
                                strategies: rows,
                                all_interference_zero: all_zero,
                                all_p_win_half: all_half,
                            },
                        ),
                    )?,
                    Format::Csv => {
                        let mut w = csv::Writer::from_writer(&mut *out);
                        w.write_record([
                            "index", "lambda_sa", "response_sa", "response_sb", "p_win", "i00",
                            "i01", "i10", "i11",
                        ])?;
                        for r in &rows {
                            let mut rec = vec![
                                r.index.to_string(),
                                r.strategy.lambda_sa.to_string(),
                                function_name(&r.strategy.response_sa),
                                function_name(&r.strategy.response_sb),
                                r.p_win.to_string(),
                            ];
                            rec.extend(r.interference.iter().map(|i| i.to_string()));
                            w.write_record(rec)?;
                        }
                        w.flush()?;
                    }
                }
                Ok(all_zero && all_half)
            } else {
                let dist = strategy_distribution(&ClassicalStrategy::detection(*lambda_sa)?);
                let r = CoherenceReport::of(&dist);
                emit_table(
                    cli.format,
                    out,
                    "classical",
                    game_provenance(),
                    &DetectionBody {
                        lambda_sa: *lambda_sa,
                        p_table: dist,
                        interference: r.interference,
                        p_win: r.p_win,
                    },
                    &dist,
                )?;
                Ok(true)
            }
        }
        Command::Scheme1 {
            stats,
            theta_a,
            phi_a,
            theta_b,
            phi_b,
        } => {
            let config = SchemeOneConfig {
                stats: *stats,
                obs_a: BlochObservable::new(*theta_a, *phi_a)?,
                obs_b: BlochObservable::new(*theta_b, *phi_b)?,
            };
            let body = scheme_one::report(&config);
            let mut prov = game_provenance();
            prov.push(Provenance::new(
                "p_win_closed_form",
                "1/2 +/- (1/32)(<0|s_A|1><1|s_B|0> + <1|s_A|0><0|s_B|1>), + for bosons",
            ));
            prov.push(Provenance::new(
                "p_table",
                "(1 - q_xy)/4 + q_xy <psi_xy|P_a x P_b|psi_xy>, q_xy = one-particle-per-side rate",
            ));
            emit_table(cli.format, out, "scheme1", prov, &body, &body.p_table)?;
            Ok(true)
        }
        Command::Scheme2 {
            stats,
            s0,
            s1,
            s0_phase,
            s1_phase,
            theta_a,
            phi_a,
            theta_b,
            phi_b,
        } => {
            let source = SourceAmplitudes::normalized(
                Complex64::from_polar(*s0, *s0_phase),
                Complex64::from_polar(*s1, *s1_phase),
            )?;
            let obs_a = BlochObservable::new(*theta_a, *phi_a)?;
            let obs_b = BlochObservable::new(*theta_b, *phi_b)?;
            let body = scheme_two::report(*stats, &source, &obs_a, &obs_b)?;
            let mut prov = game_provenance();
            prov.push(Provenance::new("p_table", "p(ab|xy) = Tr[rho_xy P_a x P_b]"));
            prov.push(Provenance::new(
                "p_win_closed_form",
                "1/2 + (1/8)(s0 s1* <0|s_A|1><1|s_B|0> + h.c.)",
            ));
            prov.push(Provenance::new(
                "interference_closed_form",
                "s0 s1* <0|P_a|1><1|P_b|0> + h.c.",
            ));
            emit_table(cli.format, out, "scheme2", prov, &body, &body.p_table)?;
            Ok(true)
        }
        Command::Sweep {
            scheme,
            stats,
            resolution,
            grid_csv,
        } => {
            let report = sweep::sweep(*scheme, *stats, *resolution)?;
            if let Some(path) = grid_csv {
                write_grid_csv(*scheme, *stats, *resolution, path)?;
            }
            let prov = vec![Provenance::new(
                "best_value",
                "maximum of the closed-form win probability over the grid",
            )];
            emit_table(cli.format, out, "sweep", prov, &report, &report.p_win_table_at_best)?;
            Ok(true)
        }
        Command::Trials {
            source,
            dist,
            n,
            seed,
            alpha,
        } => {
            let (label, table) = match dist {
                Some(path) => (path.display().to_string(), read_distribution(path)?),
                None => (format!("{source:?}").to_lowercase(), source_distribution(*source)?),
            };
            let log = trials::simulate_game(&table, *n, *seed)?;
            let significance = trials::significance(&log, *alpha)?;
            match cli.format {
                Format::Json => write_json(
                    out,
                    &Envelope::new(
                        "trials",
                        vec![
                            Provenance::new("f_n", "(f_1 + ... + f_N)/N"),
                            Provenance::new("bound", "min(1, 2 exp(-2 N epsilon^2)), epsilon = |F_N - 1/2|"),
                        ],
                        TrialsBody {
                            source: label,
                            significance,
                        },
                    ),
                )?,
                Format::Csv => log.write_csv(&mut *out)?,
            }
            Ok(true)
        }
        Command::Reproduce { seed, perturb } => {
            let opts = ReproduceOptions {
                seed: *seed,
                perturbation: *perturb,
                ..ReproduceOptions::default()
            };
            let report = report::reproduce(&opts)?;
            match cli.format {
                Format::Json => write_json(out, &Envelope::new("reproduce", game_provenance(), &report))?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["claim", "expected", "comparison", "tolerance", "closed_form", "pipeline", "pass"])?;
                    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
                    for c in &report.checks {
                        w.write_record([
                            c.claim.clone(),
                            c.expected.to_string(),
                            format!("{:?}", c.comparison).to_lowercase(),
                            c.tolerance.to_string(),
                            opt(c.closed_form),
                            opt(c.pipeline),
                            c.pass.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
            Ok(report.all_passed)
        }
    }
}

fn emit_table<T: Serialize, W: Write + ?Sized>(
    format: Format,
    out: &mut W,
    command: &str,
    provenance: Vec<Provenance>,
    body: &T,
    table: &ConditionalDistribution,
) -> Result<()> {
    match format {
        Format::Json => write_json(out, &Envelope::new(command, provenance, body)),
        Format::Csv => table.write_csv(&mut *out),
    }
}

fn source_distribution(source: TrialSource) -> Result<ConditionalDistribution> {
    Ok(match source {
        TrialSource::Classical => strategy_distribution(&ClassicalStrategy::detection(0.5)?),
        TrialSource::Scheme1 => {
            scheme_one::measurement_distribution(&SchemeOneConfig::optimal(Statistics::Boson))
        }
        TrialSource::Scheme2 => {
            let sx = BlochObservable::sigma_x();
            scheme_two::measurement_distribution(&SourceAmplitudes::balanced(), &sx, &sx)
        }
    })
}

/// Reads a distribution written by this tool: the `{"p": ...}` JSON object
/// (bare or inside a report's `p_table`) or the `x,y,a,b,p` CSV.
pub fn read_distribution(path: &PathBuf) -> Result<ConditionalDistribution> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let inner = value.get("p_table").cloned().unwrap_or(value);
        let dist: ConditionalDistribution = serde_json::from_value(inner)?;
        dist.validate()?;
        Ok(dist)
    } else {
        ConditionalDistribution::read_csv(text.as_bytes())
    }
}

type Objective = Box<dyn Fn(&[f64]) -> f64>;

fn write_grid_csv(scheme: Scheme, stats: Statistics, resolution: usize, path: &PathBuf) -> Result<()> {
    let (grid, objective): (Grid, Objective) = match scheme {
        Scheme::One => (
            Grid::scheme_one(resolution)?,
            Box::new(sweep::scheme_one_objective(stats)),
        ),
        Scheme::Two => (Grid::scheme_two(resolution)?, Box::new(sweep::scheme_two_objective())),
    };
    let mut w = csv::Writer::from_path(path)?;
    let mut header = grid.names();
    header.push("p_win".into());
    w.write_record(&header)?;
    for point in grid.points() {
        let value = objective(&point);
        let mut rec: Vec<String> = point.iter().map(|v| v.to_string()).collect();
        rec.push(value.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Maps an error to the process exit code.
pub fn exit_code(_err: &Error) -> i32 {
    1
}
