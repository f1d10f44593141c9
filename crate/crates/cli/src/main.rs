//! `egr`: excess growth rate computations from the command line.
//!
//! ```text
//! egr compute --pi 0.5,0.5 --returns 2,0.5
//! egr rolling --file panel.csv --window 20 --top-k 10 --format csv
//! egr optimize-expected --scenarios scenarios.csv --tol 1e-8
//! egr selftest
//! ```
//!
//! Results go to stdout as JSON (or CSV with `--format csv`). Failures print
//! `{"error": {"code": ..., "message": ...}}` and exit with 2 for bad input,
//! 3 for numerical failures.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Value};

use egr::backtest::{load_panel, rebalanced_decomposition, rolling_egr, PanelFormat, Weighting};
use egr::dirichlet::{ldp_gap, renyi_identity_residual, sample, LocationParams, ScaledDirichletParams};
use egr::egr::egr;
use egr::info::shannon_entropy;
use egr::optimize::{
    constrained_joint, load_scenarios, max_egr, maximize_expected_egr, penalized_joint, phi_eta, DualSolveResult,
    ScenarioSet,
};
use egr::{Error, Weights};
use egr_acceptance::{run_all, DEFAULT_SEED, SUITE_BUDGET};

use output::{error_envelope, fmt_num, Format, Report, Table};

#[derive(Parser)]
#[command(name = "egr", version, about = "Excess growth rate toolkit")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["returns", "log_returns"])))]
struct ReturnsInput {
    /// Gross returns, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    returns: Option<Vec<f64>>,

    /// Log returns, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    log_returns: Option<Vec<f64>>,
}

impl ReturnsInput {
    fn gross(&self) -> Vec<f64> {
        match (&self.returns, &self.log_returns) {
            (Some(g), _) => g.clone(),
            (None, Some(r)) => r.iter().map(|x| x.exp()).collect(),
            (None, None) => unreachable!("clap enforces the input group"),
        }
    }

    fn log(&self) -> Vec<f64> {
        match (&self.returns, &self.log_returns) {
            (_, Some(r)) => r.clone(),
            (Some(g), None) => g.iter().map(|x| x.ln()).collect(),
            (None, None) => unreachable!("clap enforces the input group"),
        }
    }
}

#[derive(Args)]
struct PanelInput {
    /// Returns panel: `period,<asset1>,...,<assetN>`.
    #[arg(long)]
    file: PathBuf,

    /// Panel cells are log returns instead of gross returns.
    #[arg(long)]
    log_returns: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Excess growth rate of a portfolio for one period.
    Compute {
        #[arg(long, value_delimiter = ',', required = true)]
        pi: Vec<f64>,
        #[command(flatten)]
        input: ReturnsInput,
    },
    /// Split the log return of a rebalanced portfolio into average log return and accumulated EGR.
    Decompose {
        #[arg(long, value_delimiter = ',', required = true)]
        pi: Vec<f64>,
        #[command(flatten)]
        panel: PanelInput,
    },
    /// EGR over non-overlapping windows of a panel.
    #[command(group(ArgGroup::new("weighting").required(true).args(["top_k", "pi"])))]
    Rolling {
        #[command(flatten)]
        panel: PanelInput,
        #[arg(long)]
        window: usize,
        /// Equal weights on the k assets with the highest relative price.
        #[arg(long)]
        top_k: Option<usize>,
        /// Fixed weights.
        #[arg(long, value_delimiter = ',')]
        pi: Option<Vec<f64>>,
    },
    /// Portfolio maximizing the EGR for known returns.
    OptimizeMax {
        #[command(flatten)]
        input: ReturnsInput,
    },
    /// Perspective problems: divergence-constrained (`--eta`) or penalized (`--lambda`).
    #[command(group(ArgGroup::new("mode").required(true).args(["eta", "lambda"])))]
    OptimizeEta {
        /// Reference portfolio; without it the portfolio is optimized jointly.
        #[arg(long, value_delimiter = ',', conflicts_with = "lambda")]
        pi: Option<Vec<f64>>,
        #[command(flatten)]
        input: ReturnsInput,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Maximize the expected EGR over a scenario set.
    OptimizeExpected {
        /// CSV of log-return scenarios, optionally with a trailing `prob` column.
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Draw from a scaled Dirichlet distribution.
    #[command(group(ArgGroup::new("params").required(true).args(["alpha", "pi"])))]
    DirichletSample {
        #[arg(long, value_delimiter = ',', requires = "beta")]
        alpha: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<f64>>,
        /// Location form: weights π with `--x` and `--sigma`.
        #[arg(long, value_delimiter = ',', requires_all = ["x", "sigma"], conflicts_with = "beta")]
        pi: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<f64>>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Gap between the scaled log density and the EGR as σ shrinks.
    LdpCheck {
        #[arg(long, value_delimiter = ',', required = true)]
        pi: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001")]
        sigma: Vec<f64>,
    },
    /// Compare a Rényi divergence of scaled Dirichlet laws with the EGR divergence over σ.
    RenyiCheck {
        #[arg(long, value_delimiter = ',', required = true)]
        pi: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        /// Monte Carlo draws (used for n > 2).
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Run the acceptance suite; one PASS/FAIL line per criterion.
    Selftest {
        /// Append runtimes (output is then no longer reproducible byte for byte).
        #[arg(long)]
        timings: bool,
    },
}

fn weights(v: Vec<f64>) -> egr::Result<Weights> {
    Weights::new(v)
}

fn dual_json(r: &DualSolveResult) -> Value {
    json!({
        "lambda_star": r.lambda_star,
        "pi_star": r.pi_star,
        "q_star": r.q_star,
        "value": r.value,
        "kkt_residual": r.kkt_residual,
        "iterations": r.iterations,
        "branch": r.branch,
    })
}

/// Standard error of each certificate entry when the scenarios are draws
/// from a larger distribution: the entry is a mean over scenarios of
/// R_j/⟨π,R⟩ − (r_j − ⟨π,r⟩), and its spread gives the sampling error. An
/// entry within two or three of these of zero is indistinguishable from an
/// exact certificate.
fn certificate_std_error(s: &ScenarioSet, pi: &Weights) -> Vec<f64> {
    let p = s.probs();
    let effective = 1.0 / p.iter().map(|q| q * q).sum::<f64>();
    (0..s.dim())
        .map(|j| {
            let terms: Vec<f64> = s
                .scenarios()
                .iter()
                .map(|r| {
                    let wealth: f64 = pi.iter().zip(r).map(|(w, x)| w * x.exp()).sum();
                    let mean_log: f64 = pi.iter().zip(r).map(|(w, x)| w * x).sum();
                    r[j].exp() / wealth - (r[j] - mean_log)
                })
                .collect();
            let mean: f64 = terms.iter().zip(p.iter()).map(|(t, q)| q * t).sum();
            let var: f64 = terms.iter().zip(p.iter()).map(|(t, q)| q * (t - mean).powi(2)).sum();
            (var / effective).sqrt()
        })
        .collect()
}

fn execute(cli: Cli) -> egr::Result<Report> {
    let seed = cli.seed;
    match cli.command {
        Command::Compute { pi, input } => Ok(Report::new(json!({ "egr": egr(&weights(pi)?, &input.gross())? }))),
        Command::Decompose { pi, panel } => {
            let p = load_panel(
                &panel.file,
                PanelFormat {
                    log_returns: panel.log_returns,
                },
            )?;
            let d = rebalanced_decomposition(&weights(pi)?, &p)?;
            let mut running = 0.0;
            let rows = p
                .period_labels()
                .iter()
                .zip(&d.per_period_egr)
                .map(|(label, g)| {
                    running += g;
                    vec![label.clone(), fmt_num(*g), fmt_num(running)]
                })
                .collect();
            let table = Table {
                header: vec!["period".into(), "egr".into(), "cumulative_egr".into()],
                rows,
            };
            Ok(Report::new(json!({
                "total_log_return": d.total_log_return,
                "weighted_avg_log_return": d.weighted_avg_log_return,
                "cumulative_egr": d.cumulative_egr,
                "per_period_egr": d.per_period_egr,
                "periods": p.period_labels(),
            }))
            .with_table(table))
        }
        Command::Rolling {
            panel,
            window,
            top_k,
            pi,
        } => {
            let p = load_panel(
                &panel.file,
                PanelFormat {
                    log_returns: panel.log_returns,
                },
            )?;
            let weighting = match (top_k, pi) {
                (Some(k), _) => Weighting::EqualOnTopK(k),
                (None, Some(pi)) => Weighting::Fixed(weights(pi)?),
                (None, None) => unreachable!("clap enforces the weighting group"),
            };
            let roll = rolling_egr(&p, window, &weighting)?;
            let mut buf = Vec::new();
            roll.write_csv(&mut buf, fmt_num)?;
            let mut rdr = csv::Reader::from_reader(buf.as_slice());
            let rows = rdr
                .records()
                .map(|r| {
                    r.map(|r| r.iter().map(str::to_string).collect())
                        .map_err(|e| Error::Io(e.to_string()))
                })
                .collect::<egr::Result<Vec<Vec<String>>>>()?;
            let header = ["window_start", "window_end", "egr", "cumulative_egr"]
                .map(String::from)
                .to_vec();
            let windows: Vec<Value> = roll
                .windows
                .iter()
                .map(|w| {
                    json!({
                        "window_start": w.start_label,
                        "window_end": w.end_label,
                        "egr": w.egr,
                        "cumulative_egr": w.cumulative_egr,
                    })
                })
                .collect();
            Ok(Report::new(json!({ "windows": windows })).with_table(Table { header, rows }))
        }
        Command::OptimizeMax { input } => {
            let res = max_egr(&input.log())?;
            let support = res.pair().map(|(i, j)| json!({ "argmax": i + 1, "argmin": j + 1 }));
            Ok(Report::new(
                json!({ "pi_star": res.pi_star, "value": res.value, "support": support }),
            ))
        }
        Command::OptimizeEta { pi, input, eta, lambda } => {
            let r = input.log();
            let res = match (pi, eta, lambda) {
                (Some(pi), Some(eta), _) => phi_eta(&weights(pi)?, &r, eta)?,
                (None, Some(eta), _) => constrained_joint(&r, eta)?,
                (_, None, Some(lambda)) => penalized_joint(&r, lambda)?,
                (_, None, None) => unreachable!("clap enforces the mode group"),
            };
            Ok(Report::new(dual_json(&res)))
        }
        Command::OptimizeExpected { scenarios, tol } => {
            let s = load_scenarios(&scenarios)?;
            let res = maximize_expected_egr(&s, tol)?;
            Ok(Report::new(json!({
                "pi_star": res.pi_star,
                "value": res.value,
                "certificate": res.certificate,
                "certificate_std_error": certificate_std_error(&s, &res.pi_star),
                "iterations": res.iterations,
                "converged": res.converged,
            })))
        }
        Command::DirichletSample {
            alpha,
            beta,
            pi,
            x,
            sigma,
            count,
        } => {
            let params = match (alpha, pi) {
                (Some(a), _) => ScaledDirichletParams::new(a, beta.expect("clap requires --beta"))?,
                (None, Some(pi)) => LocationParams::new(
                    weights(pi)?,
                    weights(x.expect("clap requires --x"))?,
                    sigma.expect("clap requires --sigma"),
                )?
                .to_params(),
                (None, None) => unreachable!("clap enforces the params group"),
            };
            let draws = sample(&params, seed, count);
            let header = (1..=params.dim()).map(|i| format!("y{i}")).collect();
            let rows = draws.iter().map(|w| w.iter().map(|v| fmt_num(*v)).collect()).collect();
            Ok(Report::new(json!({ "samples": draws })).with_table(Table { header, rows }))
        }
        Command::LdpCheck { pi, x, y, sigma } => {
            let (pi, x, y) = (weights(pi)?, weights(x)?, weights(y)?);
            let checks = sigma
                .iter()
                .map(|&s| {
                    let loc = LocationParams::new(pi.clone(), x.clone(), s)?;
                    Ok(json!({ "sigma": s, "gap": ldp_gap(&loc, &y)? }))
                })
                .collect::<egr::Result<Vec<Value>>>()?;
            Ok(Report::new(
                json!({ "entropy": shannon_entropy(&pi), "checks": checks }),
            ))
        }
        Command::RenyiCheck {
            pi,
            x,
            y,
            sigma,
            samples,
        } => {
            let res = renyi_identity_residual(&weights(pi)?, &weights(x)?, &weights(y)?, sigma, samples, seed)?;
            Ok(Report::new(json!({
                "divergence": res.divergence,
                "egr_over_sigma": res.egr_over_sigma,
                "residual": res.residual,
                "std_error": res.std_error,
            })))
        }
        Command::Selftest { .. } => unreachable!("handled before dispatch"),
    }
}

fn selftest(seed: u64, timings: bool) -> ExitCode {
    let (outcomes, total) = run_all(seed, |o| {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let detail = if o.passed {
            o.notes.first().cloned().unwrap_or_default()
        } else {
            o.failures.join("; ")
        };
        let time = if timings {
            format!(" ({:.2}s)", o.elapsed.as_secs_f64())
        } else {
            String::new()
        };
        println!("{status} [{:>2}] {}{time}: {detail}", o.id, o.title);
    });
    let suite_ok = total <= SUITE_BUDGET;
    if timings || !suite_ok {
        println!(
            "{} suite runtime {:.1}s (budget {}s)",
            if suite_ok { "PASS" } else { "FAIL" },
            total.as_secs_f64(),
            SUITE_BUDGET.as_secs()
        );
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if passed == outcomes.len() && suite_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            print!("{}", error_envelope("USAGE_ERROR", e.render().to_string().trim_end()));
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    if let Command::Selftest { timings } = cli.command {
        return selftest(cli.seed, timings);
    }
    let format = cli.format;
    match execute(cli) {
        Ok(report) => {
            print!("{}", report.render(format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            print!("{}", error_envelope(e.code(), &e.to_string()));
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical_failure() { 3 } else { 2 })
        }
    }
}
