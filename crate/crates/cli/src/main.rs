//! Command-line drivers for the sparse choice toolkit.
//!
//! Exit status: 0 on success, 1 when a search finds no model, 2 on bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sparse_choice::aggregation::hare;
use sparse_choice::apa;
use sparse_choice::birkhoff::{decompose, DEFAULT_TOL};
use sparse_choice::cdf::{cdf_compare, cdf_csv};
use sparse_choice::generators::{
    condition_check, exact_distribution, mnl_samples, random_sparse_model, ConditionThreshold, ExpFamParams, Family,
    MnlParams,
};
use sparse_choice::io::{format_matrix, format_model, parse_square_matrix, read_matrix, read_model, MatrixMode};
use sparse_choice::recovery::{
    greedy_fit, recover, recover_search, recover_without_signature, Basis, RecoveryResult, SearchOptions,
};
use sparse_choice::sparsify::{empirical_distribution, sample_sparsify};
use sparse_choice::{marginals, SparseChoiceModel, StochasticMatrix};

#[derive(Parser)]
#[command(name = "sparse-choice", version, about = "Learn and use sparse distributions over rankings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MatrixInput {
    /// Comma-separated N×N marginal matrix (rows = items, columns = positions).
    #[arg(long)]
    matrix: PathBuf,
    /// Entries are percentages; divide by 100 and balance.
    #[arg(long, conflicts_with = "normalize")]
    percent: bool,
    /// Sinkhorn-balance the matrix instead of requiring it to be doubly stochastic.
    #[arg(long)]
    normalize: bool,
}

impl MatrixInput {
    fn load(&self) -> Result<StochasticMatrix> {
        let mode = if self.percent {
            MatrixMode::Percent
        } else if self.normalize {
            MatrixMode::Normalize
        } else {
            MatrixMode::Strict
        };
        read_matrix(&self.matrix, mode).with_context(|| format!("reading {}", self.matrix.display()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// First-order marginals of a model file.
    Marginals {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Birkhoff–von Neumann decomposition, printed as a model file.
    Decompose {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Sampling sparsifier: ⌈N/ε²⌉ draws from a decomposition.
    Sparsify {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sparse model recovery by multiplicative weights.
    Recover {
        #[command(flatten)]
        input: MatrixInput,
        /// Support size; required unless --search is given.
        #[arg(long, required_unless_present = "search")]
        k: Option<usize>,
        /// l∞ tolerance in (0, 1/2); required unless --search is given.
        #[arg(long, required_unless_present = "search")]
        epsilon: Option<f64>,
        /// Enumerate quantized probability vectors instead of signature cells.
        #[arg(long, conflicts_with = "search")]
        no_signature: bool,
        /// Grow K from 1 at --epsilon0, then halve ε while recovery succeeds.
        #[arg(long, requires = "epsilon0")]
        search: bool,
        #[arg(long)]
        epsilon0: Option<f64>,
        /// Smallest ε tried by --search (default ε₀/8).
        #[arg(long)]
        epsilon_floor: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy heuristic: heaviest-first prefix of a Birkhoff decomposition.
    Fit {
        #[command(flatten)]
        input: MatrixInput,
        /// l2 target for the renormalized prefix.
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hare-system elimination: winner, aggregate ranking and tallies.
    Hare {
        #[arg(long)]
        model: PathBuf,
    },
    /// Generate a model from a parametric family or at random.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        #[arg(long)]
        n: Option<usize>,
        /// MNL weights or an exponential-family θ matrix.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Support size for --family random.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// MNL only: empirical model of this many draws instead of the exact law.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regularity condition check for MNL or exponential-family parameters.
    CheckCondition {
        #[arg(long, value_enum)]
        family: ParamFamily,
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
    },
    /// CDFs of two models along an adjacent-transposition walk, as CSV.
    CdfCompare {
        #[arg(long)]
        model_a: PathBuf,
        #[arg(long)]
        model_b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The embedded APA election fixture.
    Apa {
        #[arg(value_enum)]
        what: ApaItem,
        /// Emit the table before balancing, or the model as published.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Mnl,
    Expfam,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamFamily {
    Mnl,
    Expfam,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApaItem {
    Marginals,
    Model,
}

enum Status {
    Done,
    NotFound,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_model(path: &Path) -> Result<SparseChoiceModel> {
    read_model(path).with_context(|| format!("reading {}", path.display()))
}

fn mnl_params(path: &Path) -> Result<MnlParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let weights = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad weight {t:?}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(MnlParams::new(weights)?)
}

fn expfam_params(path: &Path) -> Result<ExpFamParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExpFamParams::new(parse_square_matrix(&text)?)?)
}

fn report(r: &RecoveryResult) {
    match &r.basis {
        Basis::Signature(sig) => eprintln!("signature set: {sig}"),
        Basis::Quantized(p) => eprintln!("column masses: {p:?}"),
    }
    eprintln!(
        "epsilon {}  support {}  mass {:.6}  linf {:.6}  raw linf {:.6}  rounds {}  candidates {}",
        r.epsilon,
        r.model.support_size(),
        r.total_mass,
        r.achieved_linf,
        r.raw_linf,
        r.iterations,
        r.candidates_examined
    );
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Marginals { model, out } => {
            let m = load_model(&model)?.normalized()?;
            emit(out.as_deref(), &format_matrix(marginals(&m)?))?;
        }
        Command::Decompose { input, tol } => {
            let d = input.load()?;
            let dec = decompose(&d, tol)?;
            eprintln!("terms {}  residual linf {:e}", dec.terms.len(), dec.residual_norm);
            print!("{}", format_model(&dec.to_model()?));
        }
        Command::Sparsify { input, epsilon, seed, out } => {
            let s = sample_sparsify(&input.load()?, epsilon, seed)?;
            eprintln!("samples {}  support {}", s.samples, s.model.support_size());
            emit(out.as_deref(), &format_model(&s.model))?;
        }
        Command::Recover { input, k, epsilon, no_signature, search, epsilon0, epsilon_floor, out } => {
            let d = input.load()?;
            let found = if search {
                let e0 = epsilon0.expect("required by clap");
                let mut opts = SearchOptions::for_epsilon(e0);
                if let Some(floor) = epsilon_floor {
                    opts.epsilon_floor = floor;
                }
                recover_search(&d, e0, &opts)?.map(|s| {
                    for (k, eps, ok) in &s.attempts {
                        eprintln!("k {k}  epsilon {eps}  {}", if *ok { "ok" } else { "infeasible" });
                    }
                    s.best
                })
            } else {
                let (k, eps) = (k.expect("required by clap"), epsilon.expect("required by clap"));
                if no_signature {
                    recover_without_signature(&d, k, eps)?
                } else {
                    recover(&d, k, eps)?
                }
            };
            let Some(r) = found else {
                eprintln!("no model found");
                return Ok(Status::NotFound);
            };
            report(&r);
            emit(out.as_deref(), &format_model(&r.model))?;
        }
        Command::Fit { input, epsilon, out } => {
            let fit = greedy_fit(&input.load()?, epsilon)?;
            eprintln!(
                "heuristic fit: support {} of {}  l2 {:.6}  target met {}  signature family {}",
                fit.model.support_size(),
                fit.terms_available,
                fit.l2_error,
                fit.met_target,
                fit.in_signature_family
            );
            emit(out.as_deref(), &format_model(&fit.model))?;
        }
        Command::Hare { model } => {
            let trace = hare(&load_model(&model)?)?;
            println!("winner {}", trace.winner);
            println!("ranking {}", trace.ranking);
            for (i, round) in trace.rounds.iter().enumerate() {
                let tallies: Vec<String> = round.tallies.iter().map(|(c, m)| format!("{c}:{m:.6}")).collect();
                let tie = if round.tie_broken { " (tie-break)" } else { "" };
                println!("round {}  {}  eliminated {}{tie}", i + 1, tallies.join(" "), round.eliminated);
            }
        }
        Command::Gen { family, n, params, seed, k, samples, out } => {
            let model = match family {
                GenFamily::Random => {
                    let Some(n) = n else { bail!("--family random needs --n") };
                    random_sparse_model(n, k, seed)?
                }
                GenFamily::Mnl => {
                    let p = match (&params, n) {
                        (Some(path), _) => mnl_params(path)?,
                        (None, Some(n)) => MnlParams::equal(n),
                        (None, None) => bail!("--family mnl needs --params or --n"),
                    };
                    match samples {
                        Some(t) => empirical_distribution(&mnl_samples(&p, t, seed))?,
                        None => exact_distribution(&Family::Mnl(p))?,
                    }
                }
                GenFamily::Expfam => {
                    let p = match (&params, n) {
                        (Some(path), _) => expfam_params(path)?,
                        (None, Some(n)) => ExpFamParams::zeros(n),
                        (None, None) => bail!("--family expfam needs --params or --n"),
                    };
                    exact_distribution(&Family::ExpFam(p))?
                }
            };
            emit(out.as_deref(), &format_model(&model))?;
        }
        Command::CheckCondition { family, params, delta } => {
            let fam = match family {
                ParamFamily::Mnl => Family::Mnl(mnl_params(&params)?),
                ParamFamily::Expfam => Family::ExpFam(expfam_params(&params)?),
            };
            let r = condition_check(&fam, delta, ConditionThreshold::SqrtLog)?;
            println!("holds {}", r.holds);
            println!("ratio {:e}", r.ratio);
            println!("bound {:e}", r.bound);
        }
        Command::CdfCompare { model_a, model_b, out } => {
            let rows = cdf_compare(&load_model(&model_a)?, &load_model(&model_b)?)?;
            emit(out.as_deref(), &cdf_csv(&rows))?;
        }
        Command::Apa { what, raw } => match (what, raw) {
            (ApaItem::Marginals, false) => print!("{}", format_matrix(apa::table())),
            (ApaItem::Marginals, true) => print!("{}", format_matrix(apa::table_raw())),
            (ApaItem::Model, false) => print!("{}", format_model(&apa::published_model())),
            (ApaItem::Model, true) => print!("{}", format_model(&apa::published_model_raw())),
        },
    }
    Ok(Status::Done)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotFound) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
