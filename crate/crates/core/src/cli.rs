//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apps::{directed_solve, pagerank, pagerank_correlation, spectral_partition};
use crate::error::{Error, Result};
use crate::graph::{laplacian, symmetrized_laplacian, DirectedGraph};
use crate::io::{read_matrix_market, read_vector_from, write_matrix_market, write_report};
use crate::oracle::generalized_eigen_with_kernel;
use crate::seed::build_seed;
use crate::sensitivity::{default_starts, dominant_vectors, mu_estimate, DEFAULT_STEPS};
use crate::solver::{symmetrized_kernel, SolverParams, SpsSolver};
use crate::sparsify::{sparsify, SparsifyParams};
use crate::synthetic;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Largest graph for which `spectrum` computes the full generalized spectrum.
const DENSE_SPECTRUM_LIMIT: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "dirspar", version, about = "Spectral sparsification of directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sparsify a graph and write the subgraph and a per-iteration report.
    Sparsify {
        #[arg(long)]
        input: PathBuf,
        /// Out-degree cap for tails of added edges.
        #[arg(long, default_value_t = crate::sensitivity::DEFAULT_D_OUT)]
        dout: usize,
        /// Spectral similarity threshold for the edge filter.
        #[arg(long, default_value_t = crate::sensitivity::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 5.0)]
        alpha_percent: f64,
        #[arg(long, default_value_t = 100.0)]
        mu_limit: f64,
        #[arg(long, default_value_t = 20)]
        max_iters: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Power iteration steps.
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        t: usize,
        /// Random starts; chosen from the graph size when omitted.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write zero wall times so that reports are byte-reproducible.
        #[arg(long)]
        no_timings: bool,
    },
    /// PageRank on a graph, and on its sparsifier when given.
    Pagerank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sparsifier: Option<PathBuf>,
        /// Jump constant.
        #[arg(long, default_value_t = 0.15)]
        alpha: f64,
        /// Gauss-Seidel sweeps applied to the sparsifier result.
        #[arg(long, default_value_t = 0)]
        gs_sweeps: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve L_G x = b, preconditioned by a sparsifier (the graph itself by default).
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sparsifier: Option<PathBuf>,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long, default_value_t = 5)]
        gs_sweeps: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Spectral k-way partitioning on the symmetrized Laplacian.
    Partition {
        #[arg(long)]
        input: PathBuf,
        #[arg(short = 'k', long = "k")]
        k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Leading generalized eigenvalues of (L_Su⁺ L_Gu); the seed subgraph is used
    /// when no sparsifier is given.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sparsifier: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write one of the bundled synthetic graphs.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Gre115,
    Ibm32,
    Pesa,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(Error::InvalidParameter(m)) => {
            eprintln!("error: invalid parameter: {m}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn read_graph(path: &Path) -> Result<DirectedGraph> {
    read_matrix_market(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn read_pair(input: &Path, sparsifier: Option<&Path>) -> Result<(DirectedGraph, Option<DirectedGraph>)> {
    let g = read_graph(input)?;
    let s = sparsifier.map(read_graph).transpose()?;
    if let Some(s) = &s {
        if s.node_count() != g.node_count() {
            return Err(Error::DimensionMismatch {
                expected: g.node_count(),
                got: s.node_count(),
            });
        }
    }
    Ok((g, s))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Sparsify {
            input,
            dout,
            epsilon,
            alpha_percent,
            mu_limit,
            max_iters,
            seed,
            t,
            r,
            output,
            report,
            no_timings,
        } => {
            let params = SparsifyParams {
                d_out: dout,
                iter_max: max_iters,
                mu_limit,
                alpha_percent,
                epsilon,
                t,
                r,
                seed,
                ..SparsifyParams::default()
            };
            params.validate()?;
            let g = read_graph(&input)?;
            let s = sparsify(&g, &params)?;
            if let Some(path) = output {
                write_matrix_market(&s.graph, path)?;
            }
            if let Some(path) = report {
                write_report(&s.iterations, !no_timings, BufWriter::new(File::create(path)?))?;
            }
            eprintln!(
                "kept {} of {} edges (ratio {:.4}), mu_max {:.4e} -> {:.4e} ({:.3e}x)",
                s.kept_edge_ids.len(),
                g.edge_count(),
                s.edge_ratio,
                s.mu_initial,
                s.mu_final,
                s.reduction()
            );
            Ok(())
        }
        Command::Pagerank {
            input,
            sparsifier,
            alpha,
            gs_sweeps,
            output,
        } => {
            let (g, s) = read_pair(&input, sparsifier.as_deref())?;
            let p = pagerank(&g, alpha, None, 1e-12, 10_000)?;
            let mut out = sink(output.as_deref())?;
            match s {
                None => {
                    writeln!(out, "node,pagerank")?;
                    for (i, v) in p.p.iter().enumerate() {
                        writeln!(out, "{},{v:.16e}", i + 1)?;
                    }
                }
                Some(s) => {
                    let q = pagerank(&s, alpha, None, 1e-12, 10_000)?;
                    writeln!(out, "node,pagerank,pagerank_sparsifier")?;
                    for (i, (a, b)) in p.p.iter().zip(&q.p).enumerate() {
                        writeln!(out, "{},{a:.16e},{b:.16e}", i + 1)?;
                    }
                    let c = pagerank_correlation(&g, &s, alpha, None, gs_sweeps)?;
                    eprintln!("pearson correlation {:.6} (after {gs_sweeps} sweeps {:.6})", c.raw, c.smoothed);
                }
            }
            out.flush()?;
            Ok(())
        }
        Command::Solve {
            input,
            sparsifier,
            rhs,
            gs_sweeps,
            tol,
            output,
        } => {
            let (g, s) = read_pair(&input, sparsifier.as_deref())?;
            let b = read_vector_from(BufReader::new(File::open(&rhs)?))?;
            let params = SolverParams {
                tol,
                ..SolverParams::default()
            };
            params.validate()?;
            let sol = directed_solve(&g, s.as_ref().unwrap_or(&g), &b, gs_sweeps, &params)?;
            let residual: Vec<f64> = laplacian(&g)
                .mul_vec(&sol.x)
                .iter()
                .zip(&b)
                .map(|(a, b)| a - b)
                .collect();
            eprintln!(
                "relative residual {:.4e}",
                crate::sparse::norm2(&residual) / crate::sparse::norm2(&b).max(f64::MIN_POSITIVE)
            );
            let mut out = sink(output.as_deref())?;
            writeln!(out, "node,x")?;
            for (i, v) in sol.x.iter().enumerate() {
                writeln!(out, "{},{v:.16e}", i + 1)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Partition { input, k, seed, output } => {
            let g = read_graph(&input)?;
            let p = spectral_partition(&g, k, seed)?;
            let mut out = sink(output.as_deref())?;
            writeln!(out, "node,cluster")?;
            for (i, c) in p.assignment.iter().enumerate() {
                writeln!(out, "{},{c}", i + 1)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Spectrum {
            input,
            sparsifier,
            top,
            seed,
            output,
        } => {
            let (g, s) = read_pair(&input, sparsifier.as_deref())?;
            let s = s.unwrap_or_else(|| build_seed(&g).graph);
            let values = generalized_spectrum(&g, &s, top, seed)?;
            let mut out = sink(output.as_deref())?;
            writeln!(out, "index,mu")?;
            for (i, v) in values.iter().enumerate() {
                writeln!(out, "{},{v:.16e}", i + 1)?;
            }
            out.flush()?;
            Ok(())
        }
        Command::Generate { kind, seed, output } => {
            let g = match kind {
                Kind::Gre115 => synthetic::gre115_like(seed),
                Kind::Ibm32 => synthetic::ibm32_like(seed),
                Kind::Pesa => synthetic::pesa_like(seed),
            };
            write_matrix_market(&g, output)
        }
    }
}

/// Up to `top` largest generalized eigenvalues; only the dominant one is
/// estimated on graphs too large for a dense computation.
fn generalized_spectrum(g: &DirectedGraph, s: &DirectedGraph, top: usize, seed: u64) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n <= DENSE_SPECTRUM_LIMIT {
        let a = symmetrized_laplacian(g).to_dense();
        let b = symmetrized_laplacian(s).to_dense();
        let (values, _) = generalized_eigen_with_kernel(&a, &b, &symmetrized_kernel(s));
        return Ok(values.into_iter().take(top).collect());
    }
    log::warn!("{n} nodes: reporting the dominant eigenvalue estimate only");
    let solver = SpsSolver::for_graph(s, SparsifyParams::default().solver)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = dominant_vectors(&laplacian(g), &solver, default_starts(n), DEFAULT_STEPS, &mut rng)?;
    Ok(vec![mu_estimate(&pairs)].into_iter().take(top).collect())
}
