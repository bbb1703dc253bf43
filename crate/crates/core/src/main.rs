#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use graphcrb::bounds::{bandlimited_crb_trace, relative_crb, BoundSummary, FisherInfo};
use graphcrb::sampling::{select_nodes, spanning_tree_policy, NodePolicy, TreePolicy};
use graphcrb::simkit::io::{
    format_edge_selection, format_node_selection, load_graph_csv, load_node_noise_csv, parse_node_list,
};
use graphcrb::simkit::montecarlo::{run_config_file, PRNG_ID};
use graphcrb::{decompose, Error, ErrorKind};

/// Graph-signal recovery bounds, estimators and sensor placement.
#[derive(Parser)]
#[command(name = "graphcrb", disable_version_flag = true)]
struct Cli {
    /// Print version and random-number generator identifiers.
    #[arg(short = 'V', long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Laplacian eigenvalues (and optionally eigenvectors) of a graph.
    Spectrum {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append eigenvector entries `x1..xM` to every row.
        #[arg(long)]
        vectors: bool,
    },
    /// Trace bound on the Dirichlet energy of the estimation error.
    Crb {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        sigma2: f64,
        /// Measurement graph (relative model); defaults to the physical graph.
        #[arg(long)]
        meas_graph: Option<PathBuf>,
        /// Bandwidth (bandlimited model).
        #[arg(long)]
        r: Option<usize>,
        /// Sampled nodes, 1-based, separated by `;` or `,` (bandlimited model).
        #[arg(long)]
        subset: Option<String>,
        /// Per-node variance multipliers, `node,variance` (bandlimited model).
        #[arg(long)]
        noise_csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose measurement edges or sampled nodes.
    Place {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Noise variance used for the reported objective.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Per-node variance multipliers for node policies.
        #[arg(long)]
        noise_csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a TOML file.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; 0 uses all cores. Output does not depend on this.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Relative,
    Bandlimited,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| {
            Error::Io {
                path: p.display().to_string(),
                msg: e.to_string(),
            }
            .into()
        }),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|e| {
                Error::Io {
                    path: "<stdout>".into(),
                    msg: e.to_string(),
                }
                .into()
            })
        }
    }
}

fn variances(m: usize, sigma2: f64, noise_csv: Option<&PathBuf>) -> Result<DVector<f64>, Failure> {
    match noise_csv {
        None => Ok(DVector::from_element(m, sigma2)),
        Some(p) => {
            let v = load_node_noise_csv(p)?;
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: v.len(),
                }
                .into());
            }
            Ok(v * sigma2)
        }
    }
}

fn cmd_spectrum(graph: PathBuf, out: Option<PathBuf>, vectors: bool) -> Result<(), Failure> {
    let g = load_graph_csv(&graph)?;
    let spec = decompose(&g.laplacian())?;
    let m = spec.dim();
    let mut s = String::from("index,eigenvalue");
    if vectors {
        for j in 1..=m {
            s.push_str(&format!(",x{j}"));
        }
    }
    s.push('\n');
    for k in 0..m {
        s.push_str(&format!("{},{}", k + 1, spec.eigenvalues[k]));
        if vectors {
            for j in 0..m {
                s.push_str(&format!(",{}", spec.vectors[(j, k)]));
            }
        }
        s.push('\n');
    }
    emit(out.as_ref(), &s)
}

#[allow(clippy::too_many_arguments)]
fn cmd_crb(
    graph: PathBuf,
    model: Model,
    sigma2: f64,
    meas_graph: Option<PathBuf>,
    r: Option<usize>,
    subset: Option<String>,
    noise_csv: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let summary = match model {
        Model::Relative => {
            if r.is_some() || subset.is_some() || noise_csv.is_some() {
                return Err(usage("--r, --subset and --noise-csv apply to --model bandlimited only"));
            }
            let g = load_graph_csv(&graph)?;
            let meas = match &meas_graph {
                Some(p) => load_graph_csv(p)?,
                None => g.clone(),
            };
            let laplacian = g.laplacian();
            let spec = decompose(&laplacian)?;
            let b = relative_crb(&laplacian, &spec, &meas, sigma2)?;
            BoundSummary {
                model: "relative".into(),
                policy: "given".into(),
                m: g.num_vertices(),
                r: None,
                d: meas.num_edges(),
                sigma2,
                trace: b.trace,
            }
        }
        Model::Bandlimited => {
            if meas_graph.is_some() {
                return Err(usage("--meas-graph applies to --model relative only"));
            }
            let (Some(r), Some(subset)) = (r, subset) else {
                return Err(usage("--model bandlimited needs --r and --subset"));
            };
            let s = parse_node_list(&subset).map_err(|e| usage(format!("bad --subset: {e}")))?;
            if !(sigma2 > 0.0) || !sigma2.is_finite() {
                return Err(Error::InvalidVariance(sigma2).into());
            }
            let g = load_graph_csv(&graph)?;
            let m = g.num_vertices();
            if let Some(&bad) = s.iter().find(|&&i| i >= m) {
                return Err(usage(format!("--subset node {} exceeds M = {m}", bad + 1)));
            }
            let spec = decompose(&g.laplacian())?;
            let var = variances(m, sigma2, noise_csv.as_ref())?;
            let js = FisherInfo::diagonal(var)?.restrict(&s)?;
            let trace = bandlimited_crb_trace(&spec, r, &s, &js)?;
            BoundSummary {
                model: "bandlimited".into(),
                policy: "given".into(),
                m,
                r: Some(r),
                d: s.len(),
                sigma2,
                trace,
            }
        }
    };
    emit(out.as_ref(), &format!("{}\n{}\n", BoundSummary::HEADER, summary))
}

#[allow(clippy::too_many_arguments)]
fn cmd_place(
    graph: PathBuf,
    policy: String,
    r: Option<usize>,
    d: Option<usize>,
    seed: u64,
    sigma2: f64,
    noise_csv: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let row = if let Ok(tp) = policy.parse::<TreePolicy>() {
        if r.is_some() || d.is_some() || noise_csv.is_some() {
            return Err(usage("--r, --d and --noise-csv apply to node policies only"));
        }
        let g = load_graph_csv(&graph)?;
        let res = spanning_tree_policy(&g, tp, seed, sigma2)?;
        format!(
            "{},seed={},{},{}",
            tp,
            seed,
            format_edge_selection(&res.edges),
            res.crb_trace
        )
    } else if let Ok(np) = policy.parse::<NodePolicy>() {
        let (Some(r), Some(d)) = (r, d) else {
            return Err(usage(format!("--policy {policy} needs --r and --d")));
        };
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidVariance(sigma2).into());
        }
        let g = load_graph_csv(&graph)?;
        let spec = decompose(&g.laplacian())?;
        let j = FisherInfo::diagonal(variances(g.num_vertices(), sigma2, noise_csv.as_ref())?)?;
        let res = select_nodes(np, &spec, r, d, &j, seed)?;
        format!(
            "{},r={} d={} seed={},{},{}",
            np,
            r,
            d,
            seed,
            format_node_selection(&res.subset),
            res.objective
        )
    } else {
        return Err(usage(format!(
            "unknown --policy `{policy}`; expected max-st, min-st, rand-st, greedy, a-design, e-design or random"
        )));
    };
    emit(out.as_ref(), &format!("policy,param,selection,objective\n{row}\n"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.version {
        println!("graphcrb {}\nprng: {}", env!("CARGO_PKG_VERSION"), PRNG_ID);
        return Ok(());
    }
    match cli.command {
        None => Err(usage("missing subcommand; try --help")),
        Some(Command::Spectrum { graph, out, vectors }) => cmd_spectrum(graph, out, vectors),
        Some(Command::Crb {
            graph,
            model,
            sigma2,
            meas_graph,
            r,
            subset,
            noise_csv,
            out,
        }) => cmd_crb(graph, model, sigma2, meas_graph, r, subset, noise_csv, out),
        Some(Command::Place {
            graph,
            policy,
            r,
            d,
            seed,
            sigma2,
            noise_csv,
            out,
        }) => cmd_place(graph, policy, r, d, seed, sigma2, noise_csv, out),
        Some(Command::Montecarlo { config, threads, out }) => {
            let res = run_config_file(&config, threads)?;
            emit(out.as_ref(), &res.to_csv())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            })
        }
    }
}
