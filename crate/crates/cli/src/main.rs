//! `mrf`: batch front end for Clayton MRF copula computations.
//!
//! Component indices on the command line are 1-based.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mrf_core::dependence::tie_frequency;
use mrf_core::taildep::default_tail_grid;
use mrf_core::{
    classify_special_case, copula_cdf, maximal_path, sample_copula, sample_default_times,
    simdefault_analytic, simdefault_mc, spearman_rho, spearman_rho_numeric, tail_indices, Error,
    ErrorClass, MrfModel,
};

#[derive(Parser)]
#[command(name = "mrf", version, about = "Clayton copulas with multiple risk factors")]
struct Cli {
    /// Model file (JSON).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000, global = true)]
    draws: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Uniforms,
    Times,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model and report its structure.
    Validate,
    /// Evaluate the copula at a point.
    Eval {
        #[arg(long, value_delimiter = ',', required = true)]
        point: Vec<f64>,
    },
    /// Draw copula uniforms or default times.
    Sample {
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Spearman's rho of a pair.
    Spearman {
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pair: Vec<usize>,
        /// Also integrate the copula numerically.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Probability that every member of a subset defaults at once.
    Simdefault {
        #[arg(long, value_delimiter = ',', num_args = 1)]
        subset: Vec<usize>,
        /// Add Monte Carlo estimates (ratio average and tie frequency).
        #[arg(long)]
        mc: bool,
    },
    /// Classical and maximal lower tail-dependence indices of a pair.
    Taildep {
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pair: Vec<usize>,
    },
    /// Path of maximal dependence on a geometric grid `a:b:steps`.
    MdpPath {
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pair: Vec<usize>,
        #[arg(long)]
        ugrid: String,
    },
}

struct Failure {
    error: Error,
    context: Value,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let context = match &error {
            Error::InvalidModel(problems) => json!({
                "problems": problems
                    .iter()
                    .map(|p| json!({"code": p.code(), "message": p.to_string()}))
                    .collect::<Vec<_>>()
            }),
            _ => json!({}),
        };
        Failure { error, context }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: String, context: Value) -> Failure {
    Failure {
        error: Error::PreconditionViolated(msg),
        context,
    }
}

fn to_zero_based(indices: &[usize], what: &str) -> CliResult<Vec<usize>> {
    indices
        .iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| usage(format!("{what} indices are 1-based"), json!({ what: indices })))
        })
        .collect()
}

fn pair_arg(pair: &[usize]) -> CliResult<(usize, usize)> {
    match to_zero_based(pair, "pair")?[..] {
        [i, k] => Ok((i, k)),
        _ => Err(usage("--pair takes exactly two indices".into(), json!({ "pair": pair }))),
    }
}

/// `a:b:steps` → `steps` geometrically spaced levels from `a` to `b`.
fn parse_ugrid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| Failure {
        error: Error::DegenerateGrid(format!("{why}: expected a:b:steps, got '{spec}'")),
        context: json!({ "ugrid": spec }),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, steps] = parts[..] else {
        return Err(bad("wrong number of fields"));
    };
    let a: f64 = a.parse().map_err(|_| bad("bad start"))?;
    let b: f64 = b.parse().map_err(|_| bad("bad end"))?;
    let steps: usize = steps.parse().map_err(|_| bad("bad step count"))?;
    if steps < 2 || !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
        return Err(bad("levels must lie in (0,1) with at least 2 steps"));
    }
    let (la, lb) = (a.ln(), b.ln());
    let mut grid: Vec<f64> = (0..steps)
        .map(|s| (la + (lb - la) * s as f64 / (steps - 1) as f64).exp())
        .collect();
    grid[0] = a;
    grid[steps - 1] = b;
    Ok(grid)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(output: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json(output: &Option<PathBuf>, value: &Value) -> CliResult<()> {
    emit(output, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

/// Single-record CSV: one header line, one value line.
fn emit_record(output: &Option<PathBuf>, fields: &[(&str, String)]) -> CliResult<()> {
    emit(output, |w| {
        let names: Vec<&str> = fields.iter().map(|f| f.0).collect();
        let values: Vec<&str> = fields.iter().map(|f| f.1.as_str()).collect();
        writeln!(w, "{}", names.join(","))?;
        writeln!(w, "{}", values.join(","))
    })
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn run(cli: Cli) -> CliResult<()> {
    let path = cli
        .model
        .clone()
        .ok_or_else(|| usage("--model is required".into(), json!({})))?;
    let model = MrfModel::from_json_file(&path).map_err(|e| {
        let mut f = Failure::from(e);
        f.context["model"] = json!(path.display().to_string());
        f
    })?;
    let out = &cli.output;
    let csv = cli.format == Format::Csv;

    match cli.command {
        Command::Validate => {
            let case = classify_special_case(&model);
            let case_name = serde_json::to_value(case).expect("enum serializes");
            if csv {
                let mut fields = vec![
                    ("special_case", case_name.as_str().unwrap_or_default().to_string()),
                    ("dimension", model.dim().to_string()),
                    ("factors", model.factor_count().to_string()),
                ];
                let names: Vec<String> = (1..=model.dim()).map(|i| format!("xi_c_{i}")).collect();
                for (name, xi) in names.iter().zip(model.agg_shapes()) {
                    fields.push((name.as_str(), num(*xi)));
                }
                fields.push(("model_hash", model.digest()));
                emit_record(out, &fields)
            } else {
                emit_json(
                    out,
                    &json!({
                        "special_case": case_name,
                        "dimension": model.dim(),
                        "factors": model.factor_count(),
                        "aggregated_shapes": model.agg_shapes(),
                        "warnings": model.warnings(),
                        "model_hash": model.digest(),
                    }),
                )
            }
        }
        Command::Eval { point } => {
            let value = copula_cdf(&model, &point)?;
            if csv {
                emit_record(out, &[("value", num(value))])
            } else {
                emit_json(out, &json!({ "point": point, "value": value }))
            }
        }
        Command::Sample { kind } => {
            let batch = match kind {
                Kind::Uniforms => sample_copula(&model, cli.draws, cli.seed)?,
                Kind::Times => sample_default_times(&model, cli.draws, cli.seed)?,
            };
            if csv {
                emit(out, |w| batch.write_csv(w).map_err(|e| io::Error::other(e.to_string())))?;
            } else {
                let rows: Vec<&[f64]> = (0..batch.rows).map(|r| batch.row(r)).collect();
                emit_json(out, &json!({ "metadata": batch.metadata(), "rows": rows }))?;
            }
            if let Some(p) = out {
                let meta = serde_json::to_string_pretty(&batch.metadata()).expect("metadata serializes");
                std::fs::write(sidecar_path(p), meta + "\n")?;
            }
            Ok(())
        }
        Command::Spearman {
            pair,
            numeric,
            tolerance,
        } => {
            let (i, k) = pair_arg(&pair)?;
            let params = model.bivariate_params(i, k)?;
            let rho = spearman_rho(&params)?;
            let rho_numeric = if numeric {
                Some(spearman_rho_numeric(&params, tolerance)?)
            } else {
                None
            };
            if csv {
                let mut fields = vec![("rho", num(rho))];
                if let Some(q) = rho_numeric {
                    fields.push(("rho_numeric", num(q)));
                }
                emit_record(out, &fields)
            } else {
                let mut v = json!({ "pair": pair, "rho": rho });
                if let Some(q) = rho_numeric {
                    v["rho_numeric"] = json!(q);
                }
                emit_json(out, &v)
            }
        }
        Command::Simdefault { subset, mc } => {
            let members = to_zero_based(&subset, "subset")?;
            let analytic = simdefault_analytic(&model, &members)?;
            let estimates = if mc {
                let ratio = simdefault_mc(&model, &members, cli.draws, cli.seed)?;
                let times = sample_default_times(&model, cli.draws, cli.seed)?;
                Some((ratio, tie_frequency(&times, &members)?))
            } else {
                None
            };
            if csv {
                let mut fields = vec![
                    ("probability", num(analytic.value)),
                    ("error_bound", num(analytic.error_bound)),
                ];
                if let Some((r, t)) = &estimates {
                    fields.extend([
                        ("mc_mean", num(r.mean)),
                        ("mc_std_error", num(r.std_error)),
                        ("tie_frequency", num(t.mean)),
                        ("tie_std_error", num(t.std_error)),
                    ]);
                }
                emit_record(out, &fields)
            } else {
                let mut v = json!({
                    "subset": subset,
                    "probability": analytic.value,
                    "error_bound": analytic.error_bound,
                });
                if let Some((r, t)) = estimates {
                    v["mc"] = json!({ "mean": r.mean, "std_error": r.std_error, "draws": r.draws, "seed": cli.seed });
                    v["tie_frequency"] = json!({ "mean": t.mean, "std_error": t.std_error });
                }
                emit_json(out, &v)
            }
        }
        Command::Taildep { pair } => {
            let (i, k) = pair_arg(&pair)?;
            let t = tail_indices(&model.bivariate_params(i, k)?);
            let fields = [
                ("lambdaL", t.classical.lambda),
                ("chiL", t.classical.chi),
                ("kappaL", t.classical.kappa),
                ("lambdaStar", t.maximal.lambda),
                ("chiStar", t.maximal.chi),
                ("kappaStar", t.maximal.kappa),
            ];
            if csv {
                let f: Vec<(&str, String)> = fields.iter().map(|&(n, v)| (n, num(v))).collect();
                emit_record(out, &f)
            } else {
                let mut v = serde_json::Map::new();
                v.insert("pair".into(), json!(pair));
                for (n, x) in fields {
                    v.insert(n.into(), json!(x));
                }
                emit_json(out, &Value::Object(v))
            }
        }
        Command::MdpPath { pair, ugrid } => {
            let (i, k) = pair_arg(&pair)?;
            let params = model.bivariate_params(i, k)?;
            let grid = if ugrid == "default" {
                default_tail_grid()
            } else {
                parse_ugrid(&ugrid)?
            };
            let points = grid
                .iter()
                .map(|&u| maximal_path(&params, u))
                .collect::<mrf_core::Result<Vec<_>>>()?;
            if csv {
                emit(out, |w| {
                    writeln!(w, "u,x_star,y_star,pi_star,regime")?;
                    for p in &points {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            num(p.u),
                            num(p.x_star),
                            num(p.y_star()),
                            num(p.pi_star),
                            p.regime.as_str()
                        )?;
                    }
                    Ok(())
                })
            } else {
                let rows: Vec<Value> = points
                    .iter()
                    .map(|p| {
                        json!({
                            "u": p.u,
                            "x_star": p.x_star,
                            "y_star": p.y_star(),
                            "pi_star": p.pi_star,
                            "regime": p.regime.as_str(),
                        })
                    })
                    .collect();
                emit_json(out, &json!(rows))
            }
        }
    }
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Validation => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Io => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { error, context }) => {
            let report = json!({
                "code": error.code(),
                "message": error.to_string(),
                "context": context,
            });
            eprintln!("{report}");
            ExitCode::from(exit_code(error.class()))
        }
    }
}
