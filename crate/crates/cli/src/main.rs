//! `bbpyramid`: evaluate, assemble and check Bernstein-Bézier pyramid bases.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, 3 domain,
//! 4 parse, 5 geometry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bbpyramid::analysis::{conditioning_study, StudyConfig};
use bbpyramid::assembly::{
    default_nq, dirichlet_partition, mass_matrix, restrict, stiffness_matrix, tet_matrices, weak_derivative_matrices,
    ElementMatrix,
};
use bbpyramid::bases::{BasisDescriptor, Shape};
use bbpyramid::export::{matrix_csv, matrix_json, study_csv, study_json};
use bbpyramid::geometry::VertexPyramid;
use bbpyramid::verify::{self, VerifyConfig, VerifySummary};
use bbpyramid::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bbpyramid", version, about = "Bernstein-Bézier pyramid basis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the number of basis functions.
    Dim {
        #[arg(long)]
        shape: ShapeArg,
        #[arg(long)]
        order: usize,
    },
    /// Evaluate every basis function at one reference point.
    Eval {
        #[arg(long)]
        shape: ShapeArg,
        #[arg(long)]
        order: usize,
        /// Comma-separated reference coordinates, e.g. "0.2,0.3,0.1".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Assemble one element matrix.
    Assemble {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value = "pyramid")]
        shape: ShapeArg,
        #[arg(long)]
        order: usize,
        /// Vertex pyramid JSON; the reference pyramid when absent.
        #[arg(long)]
        geometry: Option<PathBuf>,
        /// Quadrature points per direction (default N + 2).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        nq: Option<u64>,
        /// Keep only the DOFs that vanish on the element boundary.
        #[arg(long)]
        restrict: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the basis property suites.
    Verify {
        /// Highest order checked (at most 8).
        #[arg(long = "order-max", alias = "n-max", default_value_t = 4)]
        order_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `json` prints the summary instead of the table.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Also write the JSON summary to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb: Option<f64>,
    },
    /// Condition numbers of reference mass and stiffness matrices.
    CondStudy {
        #[arg(long, default_value_t = 1)]
        order_min: usize,
        #[arg(long, default_value_t = 8)]
        order_max: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        nq: Option<u64>,
        /// Restrict mass matrices to interior DOFs as well.
        #[arg(long)]
        restrict_mass: bool,
        /// Use full (singular) stiffness matrices instead of the interior block.
        #[arg(long)]
        no_restrict_stiffness: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Mass,
    WeakX,
    WeakY,
    WeakZ,
    Stiffness,
}

#[derive(Clone, Copy)]
struct ShapeArg(Shape);

impl std::str::FromStr for ShapeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(ShapeArg).map_err(|e: Error| e.to_string())
    }
}

enum Failure {
    Lib(Error),
    /// Unreadable input (exit 4) or unwritable output (exit 2).
    Io(String, u8),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Io(msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage(_) => 2,
                Error::Domain(_) => 3,
                Error::Parse(_) => 4,
                Error::Geometry { .. } => 5,
            })
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Dim { shape, order } => {
            println!("{}", BasisDescriptor::new(shape.0, order).dimension());
            Ok(())
        }
        Command::Eval {
            shape,
            order,
            point,
            out,
        } => {
            let coords = parse_point(&point)?;
            let basis = BasisDescriptor::new(shape.0, order);
            let values = basis.eval_reference(&coords)?;
            let mut text = String::new();
            for (idx, v) in basis.index_set().iter().zip(&values) {
                text.push_str(&format!("{idx}: {v}\n"));
            }
            emit(out.out.as_deref(), &text)
        }
        Command::Assemble {
            kind,
            shape,
            order,
            geometry,
            nq,
            restrict: restrict_it,
            format,
            out,
        } => {
            let nq = nq.map(|n| n as usize).unwrap_or_else(|| default_nq(order));
            let (matrix, hash) = assemble(kind, shape.0, order, geometry.as_deref(), nq)?;
            let matrix = if restrict_it {
                restrict(&matrix, &dirichlet_partition(order, shape.0))?
            } else {
                matrix
            };
            let warning = (restrict_it && matrix.is_empty())
                .then(|| format!("{} of order {order} has no interior degrees of freedom", shape.0));
            if let Some(w) = &warning {
                eprintln!("warning: {w}");
            }
            let text = match format {
                Format::Csv => matrix_csv(&matrix),
                Format::Json => matrix_json(&matrix, &hash, warning.as_deref()),
            };
            emit(out.out.as_deref(), &text)
        }
        Command::Verify {
            order_max,
            seed,
            format,
            out,
            perturb,
        } => {
            let cfg = VerifyConfig {
                perturbation: perturb,
                ..VerifyConfig::new(order_max, seed)
            };
            let summary = verify::run(&cfg)?;
            let json = summary_json(&summary);
            if let Some(path) = &out {
                write_file(path, &json)?;
            }
            match format {
                Some(Format::Json) => print!("{json}"),
                _ => print!("{}", summary_table(&summary)),
            }
            if summary.passed {
                Ok(())
            } else {
                for s in summary.failed() {
                    eprintln!("suite failed: {}", s.name);
                }
                Err(Failure::Verify)
            }
        }
        Command::CondStudy {
            order_min,
            order_max,
            nq,
            restrict_mass,
            no_restrict_stiffness,
            seed,
            format,
            out,
        } => {
            if order_min > order_max {
                return Err(Error::Usage(format!("empty order range {order_min}..={order_max}")).into());
            }
            let config = StudyConfig {
                nq: nq.map(|n| n as usize),
                restrict_mass,
                restrict_stiffness: !no_restrict_stiffness,
                ..StudyConfig::reference(order_min..=order_max)
            };
            let result = conditioning_study(&config)?;
            for s in &result.skipped {
                eprintln!("skipped {} {} N={}: {}", s.shape, s.kind, s.order, s.reason);
            }
            let text = match format {
                Format::Csv => study_csv(&result),
                Format::Json => study_json(&result, seed, &config),
            };
            emit(out.out.as_deref(), &text)
        }
    }
}

fn parse_point(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad coordinate '{t}' in --point")).into())
        })
        .collect()
}

fn assemble(
    kind: KindArg,
    shape: Shape,
    order: usize,
    geometry: Option<&Path>,
    nq: usize,
) -> Result<(ElementMatrix, String), Failure> {
    match shape {
        Shape::Pyramid => {
            let p = match geometry {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display()), 4))?;
                    VertexPyramid::from_json(&text)?
                }
                None => VertexPyramid::reference(),
            };
            let m = match kind {
                KindArg::Mass => mass_matrix(order, &p, nq)?,
                KindArg::Stiffness => stiffness_matrix(order, &p, nq)?,
                KindArg::WeakX | KindArg::WeakY | KindArg::WeakZ => {
                    let [x, y, z] = weak_derivative_matrices(order, &p, nq)?;
                    match kind {
                        KindArg::WeakX => x,
                        KindArg::WeakY => y,
                        _ => z,
                    }
                }
            };
            Ok((m, p.hash()))
        }
        Shape::Tetrahedron => {
            if geometry.is_some() {
                return Err(Error::Usage("--geometry applies to pyramids only".into()).into());
            }
            let (m, k) = tet_matrices(order, nq)?;
            let m = match kind {
                KindArg::Mass => m,
                KindArg::Stiffness => k,
                _ => return Err(Error::Usage("tetrahedra support mass and stiffness only".into()).into()),
            };
            Ok((m, "reference".into()))
        }
        other => Err(Error::Usage(format!("cannot assemble {other} matrices")).into()),
    }
}

fn summary_json(summary: &VerifySummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("plain data serializes");
    s.push('\n');
    s
}

fn summary_table(summary: &VerifySummary) -> String {
    let mut t = format!("{:<30} {:<6} {:>12} {:>12}\n", "suite", "status", "value", "bound");
    for s in &summary.suites {
        let bound = format!("{}{:.0e}", if s.bound == "min" { ">=" } else { "<=" }, s.tolerance);
        t.push_str(&format!(
            "{:<30} {:<6} {:>12.3e} {:>12}\n",
            s.name,
            if s.passed { "PASS" } else { "FAIL" },
            s.max_error,
            bound
        ));
    }
    t.push_str(if summary.passed {
        "all suites passed\n"
    } else {
        "some suites FAILED\n"
    });
    t
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()), 2))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Io(format!("cannot write output: {e}"), 2))
        }
    }
}
