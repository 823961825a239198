use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use entroinv::applications::{cost_sweep, solve_marginal_problem, MarginalProblem, MarginalSolution};
use entroinv::cli::io::{
    load_problem, matrix_rows, read_csv_values, table_csv, to_json, AuditResiduals, PathSample, ResultFile,
};
use entroinv::cli::verify::{self, Suite, DEFAULT_SEED};
use entroinv::cli::{error_exit_code, status_exit_code};
use entroinv::geometry::{geodesic_lambda, geodesic_tau, geodesic_xi, surface_geodesic, GeodesicPath, DEFAULT_GRID};
use entroinv::solver::{sensitivity_lambda, sensitivity_xi};
use entroinv::{solve, BoxDomain, Error, InverseProblem, Result, TauPoint};

#[derive(Parser)]
#[command(name = "entroinv", version, about = "Entropy-regularized box-constrained inverse problems")]
struct Cli {
    /// Seed for randomized suites.
    #[arg(long, global = true, env = "ENTROINV_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Tau,
    Xi,
    Lambda,
    Surface,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write the result as JSON.
    Solve {
        problem: PathBuf,
        /// Result file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a closed-form geodesic.
    Geodesic {
        #[arg(long, value_enum)]
        space: Space,
        /// Start point (CSV or file).
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// End point (CSV or file).
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Problem file; required for lambda and surface paths.
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Box lower bounds for tau/xi paths (default: unit box).
        #[arg(long, requires = "upper", allow_hyphen_values = true)]
        lower: Option<String>,
        #[arg(long, requires = "lower", allow_hyphen_values = true)]
        upper: Option<String>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-order response of the solution to a datum change.
    Sensitivity {
        problem: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        dy: String,
        /// Re-solve at y + dy and y + dy/2 and report the first-order error.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a joint table from row and column marginals.
    Marginals {
        #[arg(long, allow_hyphen_values = true)]
        rows: String,
        #[arg(long, allow_hyphen_values = true)]
        cols: String,
        /// Cost weights per cell, row-major.
        #[arg(long, allow_hyphen_values = true)]
        cost: Option<String>,
        /// Cost target.
        #[arg(long, requires = "cost", conflicts_with = "sweep", allow_negative_numbers = true)]
        w: Option<f64>,
        /// Cost targets to solve in turn.
        #[arg(long, requires = "cost", allow_hyphen_values = true)]
        sweep: Option<String>,
        /// JSON diagnostics file; appended to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized self-checks.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}

/// Writes to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn emit(json: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, json).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display()))),
        None => {
            say(json);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve { problem, out } => {
            let problem = load_problem(&problem)?;
            let solution = solve(&problem)?;
            emit(&to_json(&ResultFile::from_solution(&solution)), out.as_deref())?;
            if !solution.is_converged() {
                eprintln!("status: {}", solution.status.name());
            }
            Ok(status_exit_code(solution.status))
        }
        Command::Geodesic {
            space,
            from,
            to,
            problem,
            lower,
            upper,
            samples,
            out,
        } => {
            let start = read_csv_values(&from, "--from")?;
            let end = read_csv_values(&to, "--to")?;
            let problem = problem.as_deref().map(load_problem).transpose()?;
            let path = build_path(space, start, end, problem.as_ref(), lower, upper)?;
            let result = describe_path(&path, samples)?;
            emit(&to_json(&result), out.as_deref())?;
            Ok(0)
        }
        Command::Sensitivity { problem, dy, check, out } => {
            let problem = load_problem(&problem)?;
            let dy = read_csv_values(&dy, "--dy")?;
            let solution = solve(&problem)?;
            if !solution.is_converged() {
                eprintln!("status: {}", solution.status.name());
                return Ok(status_exit_code(solution.status));
            }
            let g_inv = sensitivity_lambda(&solution, &problem)?;
            let dxi = sensitivity_xi(&solution, &problem, &dy)?;
            let mut result = ResultFile::from_solution(&solution);
            result.g_inverse = Some(matrix_rows(&g_inv));
            result.dxi = Some(dxi.as_slice().to_vec());
            if check {
                let err = |scale: f64| -> Result<f64> {
                    let step = &dy * scale;
                    let moved = solve(&problem.with_datum(problem.datum() + &step)?)?;
                    if !moved.is_converged() {
                        return Err(Error::NotConverged(format!(
                            "re-solve at y + {scale} dy ended with {}",
                            moved.status.name()
                        )));
                    }
                    let predicted = sensitivity_xi(&solution, &problem, &step)?;
                    Ok((moved.xi_star.coords() - solution.xi_star.coords() - predicted).norm())
                };
                let full = err(1.0)?;
                let half = err(0.5)?;
                result.first_order_error = Some(full);
                result.first_order_ratio = Some(full / half);
            }
            emit(&to_json(&result), out.as_deref())?;
            Ok(0)
        }
        Command::Marginals {
            rows,
            cols,
            cost,
            w,
            sweep,
            out,
        } => {
            let mut mp = MarginalProblem::new(read_csv_values(&rows, "--rows")?, read_csv_values(&cols, "--cols")?)?;
            if let Some(cost) = &cost {
                mp = mp.with_cost(read_csv_values(cost, "--cost")?, w.unwrap_or(0.0))?;
            }
            if cost.is_some() && w.is_none() && sweep.is_none() {
                return Err(Error::InvalidInput("--cost needs --w or --sweep".into()));
            }
            let json = match sweep {
                Some(sweep) => {
                    let targets = read_csv_values(&sweep, "--sweep")?;
                    let steps = cost_sweep(&mp, targets.as_slice())?;
                    let mut blocks = Vec::with_capacity(steps.len());
                    for step in steps {
                        let block = match step.outcome {
                            Ok(solution) => {
                                say(&format!("# w = {:.16e}, status Converged\n", step.w));
                                say(&table_csv(&solution.table));
                                marginal_block(&solution)
                            }
                            Err(e) => {
                                say(&format!("# w = {:.16e}, status {}\n", step.w, error_status(&e)));
                                ResultFile {
                                    status: Some(error_status(&e).into()),
                                    message: Some(e.to_string()),
                                    ..ResultFile::default()
                                }
                            }
                        };
                        blocks.push(ResultFile { w: Some(step.w), ..block });
                    }
                    to_json(&blocks)
                }
                None => {
                    let solution = solve_marginal_problem(&mp)?;
                    say(&table_csv(&solution.table));
                    let mut block = marginal_block(&solution);
                    block.w = w;
                    to_json(&block)
                }
            };
            if out.is_none() {
                say("\n");
            }
            emit(&json, out.as_deref())?;
            Ok(0)
        }
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            let report = verify::run(suite, cli.seed);
            say(&report.render());
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn error_status(e: &Error) -> &'static str {
    match e {
        Error::InfeasibleDatum(_) => "InfeasibleDatum",
        Error::RankDeficient { .. } => "RankDeficient",
        Error::NotConverged(_) => "IterationLimit",
        _ => "Error",
    }
}

fn marginal_block(solution: &MarginalSolution) -> ResultFile {
    ResultFile {
        table: Some(matrix_rows(&solution.table)),
        residual_inf: Some(
            solution
                .row_residual
                .max(solution.col_residual)
                .max(solution.cost_residual.unwrap_or(0.0)),
        ),
        ..ResultFile::from_solution(&solution.solution)
    }
}

fn box_for(dim: usize, lower: Option<String>, upper: Option<String>) -> Result<BoxDomain> {
    match (lower, upper) {
        (Some(l), Some(u)) => BoxDomain::new(
            read_csv_values(&l, "--lower")?.as_slice().to_vec(),
            read_csv_values(&u, "--upper")?.as_slice().to_vec(),
        ),
        _ => Ok(BoxDomain::unit(dim)),
    }
}

fn build_path(
    space: Space,
    start: DVector<f64>,
    end: DVector<f64>,
    problem: Option<&InverseProblem>,
    lower: Option<String>,
    upper: Option<String>,
) -> Result<GeodesicPath> {
    let needs_problem = |name: &str| {
        problem.ok_or_else(|| Error::InvalidInput(format!("--space {name} requires --problem")))
    };
    let domain = || match problem {
        Some(p) if lower.is_none() => Ok(p.domain().clone()),
        _ => box_for(start.len(), lower.clone(), upper.clone()),
    };
    match space {
        Space::Tau => {
            let domain = domain()?;
            geodesic_tau(&TauPoint::new(start)?, &TauPoint::new(end)?, &domain)
        }
        Space::Xi => {
            let domain = domain()?;
            geodesic_xi(
                &domain.interior(start.as_slice())?,
                &domain.interior(end.as_slice())?,
                &domain,
            )
        }
        Space::Lambda => geodesic_lambda(&start, &end, needs_problem("lambda")?),
        Space::Surface => {
            let problem = needs_problem("surface")?;
            let domain = problem.domain();
            surface_geodesic(
                &domain.interior(start.as_slice())?,
                &domain.interior(end.as_slice())?,
                problem,
            )
        }
    }
}

fn describe_path(path: &GeodesicPath, samples: usize) -> Result<ResultFile> {
    let samples = samples.max(2);
    let points = path.samples(samples)?;
    let range_residuals = match path.space() {
        entroinv::geometry::PathSpace::Lambda | entroinv::geometry::PathSpace::Surface => Some(
            points
                .iter()
                .map(|(t, _)| path.audit_residual(*t))
                .collect::<Result<Vec<f64>>>()?,
        ),
        _ => None,
    };
    Ok(ResultFile {
        path_samples: Some(
            points
                .into_iter()
                .map(|(t, p)| PathSample {
                    t,
                    point: p.as_slice().to_vec(),
                })
                .collect(),
        ),
        distance: Some(path.distance()),
        audit_residuals: Some(AuditResiduals {
            affinity_deviation: path.affinity_deviation(samples)?,
            range_residuals,
        }),
        ..ResultFile::default()
    })
}
