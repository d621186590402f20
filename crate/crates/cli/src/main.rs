use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fid_core::format::GraphFile;
use fid_core::mag::{cpdag_fid_range, project_checked, ExtensionMode};
use fid_core::sweep::{run_sweep, SweepConfig};
use fid_core::{all_pairs, fid, fid_symmetric, Admg, Cap, EstimandStatus, FidError, FidOptions, Identifier, MissPolicy, PairQuery};

#[derive(Parser)]
#[command(name = "fid", version, about = "Fixing identification distance between ADMGs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Directional,
    Symmetric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Miss {
    Error,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Extensions {
    Exact,
    Sample,
}

#[derive(clap::Args)]
struct Scoring {
    /// `all`, or a comma-separated list of T:Y pairs
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Fixing sequences enumerated per district (0 = unlimited)
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    /// Score when the reference identifies a pair the candidate does not
    #[arg(long, value_enum, default_value = "error")]
    miss_policy: Miss,
}

#[derive(Subcommand)]
enum Cmd {
    /// Distance of a candidate graph from a reference graph
    Dist {
        reference: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
        #[arg(long, value_enum, default_value = "directional")]
        mode: Mode,
        /// Report the per-pair mean instead of the sum
        #[arg(long)]
        normalized: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Print the canonical estimands of one causal effect
    Identify {
        graph: PathBuf,
        #[arg(long, short)]
        treatment: String,
        #[arg(long, short)]
        outcome: String,
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
    },
    /// Run a perturbation sweep and write CSV tables
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (overrides the config; 0 = all cores)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Project an ADMG onto a maximal ancestral graph
    ProjectMag {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: GraphFormat,
    },
    /// Range of normalized directional distance between two CPDAGs
    CpdagRange {
        reference: PathBuf,
        candidate: PathBuf,
        #[command(flatten)]
        scoring: Scoring,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Extensions,
        /// Draws per CPDAG in sample mode
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn cap(n: usize) -> Cap {
    if n == 0 {
        Cap::Unlimited
    } else {
        Cap::Limited(n)
    }
}

impl Scoring {
    fn options(&self) -> FidOptions {
        FidOptions {
            cap: cap(self.cap),
            miss_policy: match self.miss_policy {
                Miss::Error => MissPolicy::MissIsError,
                Miss::Zero => MissPolicy::MissIsZero,
            },
        }
    }

    fn pairs(&self, nodes: &Admg) -> Result<Vec<PairQuery>, FidError> {
        if self.pairs == "all" {
            return Ok(all_pairs(nodes));
        }
        self.pairs
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| match s.split_once(':') {
                Some((t, y)) => PairQuery::new(t.trim(), y.trim()),
                None => Err(FidError::InvalidArgument(format!("pair `{s}` is not of the form T:Y"))),
            })
            .collect()
    }
}

fn read_graph(path: &PathBuf) -> Result<GraphFile, FidError> {
    GraphFile::read(path).map_err(|e| with_path(path, e))
}

fn read_admg(path: &PathBuf) -> Result<Admg, FidError> {
    read_graph(path)?.to_admg().map_err(|e| with_path(path, e))
}

fn with_path(path: &PathBuf, e: FidError) -> FidError {
    match e {
        FidError::Parse { line, msg } => FidError::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    }
}

fn run(cmd: Cmd) -> Result<(), FidError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Cmd::Dist {
            reference,
            candidate,
            scoring,
            mode,
            normalized,
            format,
        } => {
            let g = read_admg(&reference)?;
            let h = read_admg(&candidate)?;
            let pairs = scoring.pairs(&g)?;
            let opts = scoring.options();
            let names = (reference.display().to_string(), candidate.display().to_string());
            match mode {
                Mode::Directional => {
                    let r = fid(&g, &h, &pairs, opts)?.with_names(&names.0, &names.1);
                    match format {
                        Format::Csv => r.write_csv(&mut out)?,
                        Format::Json => {
                            let distance = if normalized { r.normalized } else { r.total };
                            let v = serde_json::json!({ "mode": "directional", "normalized": normalized, "distance": distance, "report": r });
                            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))?;
                        }
                    }
                }
                Mode::Symmetric => {
                    let mut r = fid_symmetric(&g, &h, &pairs, opts)?;
                    r.forward = r.forward.with_names(&names.0, &names.1);
                    r.backward = r.backward.with_names(&names.1, &names.0);
                    match format {
                        Format::Csv => {
                            r.forward.write_csv(&mut out)?;
                            r.backward.write_csv(&mut out)?;
                        }
                        Format::Json => {
                            let distance = if normalized { r.normalized } else { r.total };
                            let v = serde_json::json!({ "mode": "symmetric", "normalized": normalized, "distance": distance, "report": r });
                            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))?;
                        }
                    }
                }
            }
        }
        Cmd::Identify {
            graph,
            treatment,
            outcome,
            cap: c,
        } => {
            let g = read_admg(&graph)?;
            let q = PairQuery::new(&treatment, &outcome)?;
            let set = Identifier::new(&g, cap(c)).identify(&q)?;
            if set.status == EstimandStatus::NotIdentifiable {
                writeln!(out, "NOT IDENTIFIABLE")?;
            }
            for e in set.rendered() {
                writeln!(out, "{e}")?;
            }
            if set.truncated {
                eprintln!("warning: fixing sequences truncated at {c}");
            }
        }
        Cmd::Sweep { config, out: dir, workers } => {
            let mut cfg = SweepConfig::read(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let res = run_sweep(&cfg)?;
            res.write_dir(&cfg, &dir)?;
            for &b in &cfg.n_bi {
                for &p in &cfg.p_dir {
                    let n = res.instances.iter().filter(|r| r.n_bi == b && r.p_dir == p).count();
                    eprintln!("cell n_bi={b} p_dir={p}: {n} instances");
                }
            }
            let t = res.timed_out();
            if t > 0 {
                eprintln!("{t} instances over the time limit, excluded from tables");
            }
        }
        Cmd::ProjectMag { graph, format } => {
            let g = read_admg(&graph)?;
            let p = project_checked(&g)?;
            if p.equivalent == Some(false) {
                eprintln!("warning: no Markov equivalent MAG; the projection changes m-separations");
            }
            let f = GraphFile::from_mag(&p.mag);
            match format {
                GraphFormat::Text => write!(out, "{}", f.to_text())?,
                GraphFormat::Json => writeln!(out, "{}", f.to_json())?,
            }
        }
        Cmd::CpdagRange {
            reference,
            candidate,
            scoring,
            mode,
            budget,
            seed,
        } => {
            let c1 = read_graph(&reference)?.to_cpdag()?;
            let c2 = read_graph(&candidate)?.to_cpdag()?;
            let nodes = Admg::dag(c1.nodes(), &[])?;
            let pairs = scoring.pairs(&nodes)?;
            let mode = match mode {
                Extensions::Exact => ExtensionMode::Exact,
                Extensions::Sample => ExtensionMode::Sample { budget, seed },
            };
            let r = cpdag_fid_range(&c1, &c2, &pairs, mode, scoring.options())?;
            writeln!(out, "{:.6} {:.6}", r.lo, r.hi)?;
        }
    }
    Ok(())
}

fn exit_code(e: &FidError) -> u8 {
    match e {
        FidError::Internal(_) | FidError::BudgetExhausted(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
