//! `symred`: command-line front end for the catalog checks, reductions and
//! numerical validation.

mod commands;
mod config;
mod error;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Report;
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "symred",
    version,
    about = "Symmetry checks, ansatz reductions and numerical validation for u_t = (H(x)/u)_xx + F"
)]
struct Cli {
    /// File of `key = value` lines using the long flag names; flags given
    /// on the command line take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the report to PATH instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Relative integration tolerance [default: 1e-10 for solve, 1e-8 for mol]
    #[arg(long, global = true)]
    rtol: Option<f64>,

    /// Absolute integration tolerance [default: 1e-12 for solve, 1e-10 for mol]
    #[arg(long, global = true)]
    atol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect and verify the third-order ODE catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Lie-Bäcklund symmetry checks for u3 = U(x, u, u1, u2)
    Symmetry {
        #[command(subcommand)]
        action: SymmetryCmd,
    },
    /// Point symmetries of the diffusion equations
    Pde {
        #[command(subcommand)]
        action: PdeCmd,
    },
    /// Derive the ODE system for phi0, phi1, phi2 and compare with the catalog
    Reduce(ReduceArgs),
    /// Evaluate a closed-form family, optionally against RK45 (pass: max relative deviation <= 1e-6)
    Solve(SolveArgs),
    /// Residual of the full equation on a grid (pass: exact <= 1e-9, finite differences ratio in [3.2, 4.8])
    Residual(ResidualArgs),
    /// Method-of-lines cross-check against the closed form (pass: relative max error <= 1e-3)
    Mol(MolArgs),
    /// Numerical rank test for classical invariance under point generators
    Invariance(InvarianceArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    /// List ODE entries, cases and solution families
    List,
    /// Print the whole catalog as JSON
    Dump,
    /// Check that each entry's operator is a symmetry; one line per entry
    Verify {
        /// Only this entry [default: all 13 table entries]
        #[arg(long)]
        entry: Option<String>,
        /// Exact parameter values, e.g. `n=3/2, gamma=1`
        #[arg(long)]
        params: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum SymmetryCmd {
    /// Check an operator, or a catalog entry's operator and characteristics
    Check(SymmetryArgs),
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("equation").required(true).args(["ode", "file"]))]
struct SymmetryArgs {
    /// Catalog entry id
    #[arg(long)]
    ode: Option<String>,
    /// File holding U, optionally written `u3 = U`; lines starting with # are ignored
    #[arg(long, requires = "operator")]
    file: Option<PathBuf>,
    /// Characteristic F(x, u, u1, u2) [default with --ode: the entry's operator and listed characteristics]
    #[arg(long)]
    operator: Option<String>,
    /// Exact parameter values
    #[arg(long)]
    params: Option<String>,
}

#[derive(Subcommand, Debug)]
enum PdeCmd {
    /// Check each listed generator under its side conditions
    ClassifyVerify {
        /// Case id (A, B, C or D)
        #[arg(long)]
        case: String,
        /// Exact parameter values; generators whose side conditions conflict are reported as n/a
        #[arg(long)]
        params: Option<String>,
    },
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Case id
    #[arg(long)]
    case: String,
    /// Same as --format json
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Case id
    #[arg(long)]
    case: String,
    /// Solution family id
    #[arg(long)]
    family: String,
    /// Parameter values overriding the family defaults; decimals are read exactly
    #[arg(long)]
    params: Option<String>,
    /// Integration constants overriding the family defaults
    #[arg(long)]
    constants: Option<String>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Start time [default: start of the family window]
    #[arg(long)]
    t0: Option<f64>,
    /// End time [default: end of the family window]
    #[arg(long)]
    t1: Option<f64>,
    /// Number of output times
    #[arg(long, default_value_t = 11)]
    points: usize,
    /// Integrate the system with RK45 from the closed form at t0 and compare
    #[arg(long)]
    rk45: bool,
    /// Also write the table as CSV to PATH
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ResidualArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// x0,x1,nx [default: the family x window with 65 points]
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(f64, f64, usize)>,
    /// Comma-separated times [default: start, middle and end of the family window]
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    /// Analytic spatial derivatives instead of finite differences
    #[arg(long)]
    exact: bool,
    /// Use the negative branch of the ansatz
    #[arg(long)]
    negative: bool,
}

#[derive(Args, Debug)]
struct MolArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// x0,x1,nx [default: the family x window with 201 points]
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(f64, f64, usize)>,
    /// Start time [default: start of the family window]
    #[arg(long)]
    t0: Option<f64>,
    /// End time [default: t0 + 0.25]
    #[arg(long)]
    t1: Option<f64>,
}

#[derive(Args, Debug)]
struct InvarianceArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Number of sample points; the rank threshold is 1e-8 relative to the largest singular value
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Seed for the sample points
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated generator names [default: those admitted at the parameter values]
    #[arg(long, value_delimiter = ',')]
    generators: Vec<String>,
    /// Fail unless the verdict is this one
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Expect {
    Invariant,
    NonInvariant,
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected x0,x1,nx, got `{s}`"));
    };
    let a: f64 = a.parse().map_err(|e| format!("x0: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("x1: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("nx: {e}"))?;
    Ok((a, b, n))
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    let tol = commands::TolOverride {
        rtol: cli.rtol,
        atol: cli.atol,
    };
    match &cli.command {
        Command::Catalog { action } => match action {
            CatalogCmd::List => commands::catalog_list(),
            CatalogCmd::Dump => commands::catalog_dump(),
            CatalogCmd::Verify { entry, params } => {
                commands::catalog_verify(entry.as_deref(), params.as_deref())
            }
        },
        Command::Symmetry {
            action: SymmetryCmd::Check(a),
        } => commands::symmetry_check(
            a.ode.as_deref(),
            a.file.as_deref(),
            a.operator.as_deref(),
            a.params.as_deref(),
        ),
        Command::Pde {
            action: PdeCmd::ClassifyVerify { case, params },
        } => commands::classify_verify(case, params.as_deref()),
        Command::Reduce(a) => commands::reduce(&a.case),
        Command::Solve(a) => commands::solve(
            &(&a.inst).into(),
            a.t0,
            a.t1,
            a.points,
            a.rk45,
            a.csv.as_deref(),
            tol,
        ),
        Command::Residual(a) => {
            commands::residual(&(&a.inst).into(), a.grid, &a.times, a.exact, a.negative)
        }
        Command::Mol(a) => commands::mol(&(&a.inst).into(), a.grid, a.t0, a.t1, tol),
        Command::Invariance(a) => commands::invariance(
            &(&a.inst).into(),
            a.samples,
            a.seed,
            &a.generators,
            a.expect.map(|e| e == Expect::Invariant),
        ),
    }
}

impl From<&InstanceArgs> for commands::InstanceSpec {
    fn from(a: &InstanceArgs) -> Self {
        commands::InstanceSpec {
            case: a.case.clone(),
            family: a.family.clone(),
            params: a.params.clone(),
            constants: a.constants.clone(),
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), CliError> {
    let format = match &cli.command {
        Command::Reduce(a) if a.json => Format::Json,
        _ => cli.format,
    };
    let body = match format {
        Format::Text => report.text.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json)
                .map_err(|e| CliError::new("io", e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => report
            .csv
            .clone()
            .ok_or_else(|| CliError::usage("this command has no CSV output"))?,
    };
    match &cli.output {
        Some(p) => {
            fs::write(p, body).map_err(|e| CliError::new("io", format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::new("io", e.to_string())),
    }
}

fn run(args: Vec<String>) -> Result<u8, CliError> {
    let args = config::expand(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                return Ok(0);
            }
            _ => {
                let msg = e.render().to_string();
                let msg = msg.split("\n\n").next().unwrap_or_default();
                let msg = msg
                    .trim_start_matches("error: ")
                    .split_whitespace()
                    .collect::<Vec<_>>();
                return Err(CliError::usage(msg.join(" ")));
            }
        },
    };
    let report = dispatch(&cli)?;
    emit(&cli, &report)?;
    if report.passed {
        Ok(0)
    } else {
        eprintln!("ERROR verification-failed: {}", report.summary);
        Ok(1)
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        assert_eq!(parse_grid("1, 2.5,201"), Ok((1.0, 2.5, 201)));
        assert!(parse_grid("1,2").is_err());
        assert!(parse_grid("1,2,x").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
