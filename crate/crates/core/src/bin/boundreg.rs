use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use boundreg::correlation::correlations;
use boundreg::experiments::{self, reproduce_table, TableId};
use boundreg::io::{read_dataset_csv, write_dataset_csv};
use boundreg::mdist::fitted_residuals;
use boundreg::{
    local_constant_fit, make_dataset, minimize_theta, Bandwidths, BoundaryKind, CriterionKind,
    CriterionSpec, Design, Family, Model, ParamBox, ScenarioSpec, SearchOptions, TransformSpec,
    YGrid,
};

#[derive(Parser)]
#[command(
    name = "boundreg",
    version,
    about = "Transformation boundary regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    Fixed,
    Random,
}

impl From<DesignArg> for Design {
    fn from(d: DesignArg) -> Self {
        match d {
            DesignArg::Fixed => Design::Fixed,
            DesignArg::Random => Design::Random,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy)]
enum Threads {
    Auto,
    Fixed(usize),
}

fn parse_threads(s: &str) -> Result<Threads, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Threads::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
        _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
    }
}

fn parse_theta0(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (-0.5..=2.5).contains(&v) {
        Ok(v)
    } else {
        Err(format!("theta0 must lie in [-0.5, 2.5], got {v}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, got `{s}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from one of the four simulation models.
    Gen {
        /// Simulation model, 1 to 4.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        model: u8,
        /// Sample size.
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        /// True Yeo-Johnson parameter in [-0.5, 2.5].
        #[arg(long, value_parser = parse_theta0)]
        theta0: f64,
        #[arg(long, value_enum, default_value = "fixed")]
        design: DesignArg,
        #[arg(long, env = "BOUNDREG_SEED", default_value_t = 42)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the transformation parameter for an `x,y` CSV dataset.
    Fit {
        /// Input CSV with an `x,y` header.
        #[arg(long)]
        data: PathBuf,
        /// yeo-johnson, sinh-arcsinh or identity.
        #[arg(long, default_value = "yeo-johnson", value_parser = |s: &str| s.parse::<Family>().map_err(|e| e.to_string()))]
        family: Family,
        /// TKS, TCM, TKSCM or TCMKS.
        #[arg(long, default_value = "TCM", value_parser = |s: &str| s.parse::<CriterionKind>().map_err(|e| e.to_string()))]
        criterion: CriterionKind,
        /// Window half-width; defaults to n^(-1/3).
        #[arg(long, value_parser = parse_positive)]
        bn: Option<f64>,
        /// Smoothing bandwidth; defaults to bn / 2.
        #[arg(long, value_parser = parse_positive)]
        an: Option<f64>,
        /// Lower end of the search interval (yeo-johnson only).
        #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
        theta_min: Option<f64>,
        /// Upper end of the search interval (yeo-johnson only).
        #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
        theta_max: Option<f64>,
        /// Number of residual grid points.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
        y_grid: u64,
        /// Residual grid placement: quantile or equispaced.
        #[arg(long, default_value = "quantile", value_parser = |s: &str| s.parse::<YGrid>().map_err(|e| e.to_string()))]
        y_grid_kind: YGrid,
        /// Use the unsmoothed windowed maximum for residuals.
        #[arg(long)]
        raw_boundary: bool,
        /// Include the fitted boundary on a 201-point grid.
        #[arg(long)]
        emit_boundary: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Reproduce one of the simulation tables.
    Table {
        /// 1 to 8, cor1 or cor2.
        #[arg(long, value_parser = |s: &str| s.parse::<TableId>().map_err(|e| e.to_string()))]
        table: TableId,
        /// Replications per cell; 0 lists the reference values only.
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        /// Worker threads, or auto.
        #[arg(long, default_value = "auto", value_parser = parse_threads)]
        threads: Threads,
        #[arg(long, env = "BOUNDREG_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Suppress progress output on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Apply a transformation (or its inverse) to values.
    Transform {
        #[arg(long, default_value = "yeo-johnson", value_parser = |s: &str| s.parse::<Family>().map_err(|e| e.to_string()))]
        family: Family,
        /// Parameters, comma separated (e.g. `0.5` or `1.2,-0.3`).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        /// Apply the inverse map instead.
        #[arg(long)]
        inverse: bool,
        #[arg(required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
}

type CliResult = Result<(), String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen {
            model,
            n,
            theta0,
            design,
            seed,
            out,
        } => cmd_gen(model, n as usize, theta0, design.into(), seed, out),
        Command::Fit {
            data,
            family,
            criterion,
            bn,
            an,
            theta_min,
            theta_max,
            y_grid,
            y_grid_kind,
            raw_boundary,
            emit_boundary,
            format,
        } => {
            let bounds = match (family, theta_min, theta_max) {
                (_, None, None) => Ok(family.default_box()),
                (Family::YeoJohnson, lo, hi) => {
                    let d = family.default_box().bounds()[0];
                    ParamBox::interval(lo.unwrap_or(d.0), hi.unwrap_or(d.1))
                        .map_err(|e| e.to_string())
                }
                _ => {
                    Err("--theta-min/--theta-max apply to the yeo-johnson family only".to_string())
                }
            };
            match bounds {
                Err(msg) => return usage_error(&msg),
                Ok(bx) => cmd_fit(FitArgs {
                    data,
                    family,
                    criterion,
                    bn,
                    an,
                    theta_box: bx,
                    y_grid: y_grid as usize,
                    y_grid_kind,
                    boundary: if raw_boundary {
                        BoundaryKind::Raw
                    } else {
                        BoundaryKind::Smoothed
                    },
                    emit_boundary,
                    format,
                }),
            }
        }
        Command::Table {
            table,
            reps,
            threads,
            seed,
            format,
            quiet,
        } => cmd_table(table, reps, threads, seed, format, quiet),
        Command::Transform {
            family,
            params,
            inverse,
            values,
        } => cmd_transform(family, params, inverse, values),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn cmd_gen(
    model: u8,
    n: usize,
    theta0: f64,
    design: Design,
    seed: u64,
    out: Option<PathBuf>,
) -> CliResult {
    let model = Model::from_number(model).map_err(|e| e.to_string())?;
    let spec = ScenarioSpec {
        model,
        theta0,
        n,
        design,
        seed,
    };
    let data = make_dataset(&spec).map_err(|e| e.to_string())?;
    match out {
        Some(path) => {
            let file = File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            write_dataset_csv(&data, io::BufWriter::new(file)).map_err(|e| e.to_string())
        }
        None => write_dataset_csv(&data, io::stdout().lock()).map_err(|e| e.to_string()),
    }
}

struct FitArgs {
    data: PathBuf,
    family: Family,
    criterion: CriterionKind,
    bn: Option<f64>,
    an: Option<f64>,
    theta_box: ParamBox,
    y_grid: usize,
    y_grid_kind: YGrid,
    boundary: BoundaryKind,
    emit_boundary: bool,
    format: Format,
}

fn json_num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn cmd_fit(args: FitArgs) -> CliResult {
    let file = File::open(&args.data).map_err(|e| format!("{}: {e}", args.data.display()))?;
    let data = read_dataset_csv(BufReader::new(file), Design::Random).map_err(|e| e.to_string())?;
    let n = data.len();
    let bn = args.bn.unwrap_or_else(|| Bandwidths::rule(n, 2.0).b);
    let an = args.an.unwrap_or(bn / 2.0);
    let bw = Bandwidths::new(bn, an).map_err(|e| e.to_string())?;
    let spec = CriterionSpec::with_y_grid_size(args.criterion, args.y_grid)
        .map_err(|e| e.to_string())?
        .with_y_grid(args.y_grid_kind);
    let est = minimize_theta(
        &data,
        args.family,
        &args.theta_box,
        bw,
        &spec,
        SearchOptions {
            boundary: args.boundary,
            keep_trace: false,
        },
    )
    .map_err(|e| e.to_string())?;
    let transform =
        TransformSpec::new(args.family, est.theta_hat.clone()).map_err(|e| e.to_string())?;
    let r = fitted_residuals(&data, &transform, bw, args.boundary).map_err(|e| e.to_string())?;

    let theta_hat = if est.theta_hat.len() == 1 {
        json_num(est.theta_hat[0])
    } else {
        Value::Array(est.theta_hat.iter().map(|&t| json_num(t)).collect())
    };
    let corr = match correlations(data.xs(), &r) {
        Ok(c) => {
            json!({"pearson": json_num(c.pearson), "kendall": json_num(c.kendall), "spearman": json_num(c.spearman)})
        }
        Err(_) => json!({"pearson": null, "kendall": null, "spearman": null}),
    };
    let rmin = r.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rmean = r.iter().sum::<f64>() / n as f64;
    let mut doc = json!({
        "theta_hat": theta_hat,
        "family": args.family.name(),
        "criterion": args.criterion.label(),
        "criterion_value": json_num(est.criterion_value),
        "n": n,
        "bn": json_num(bn),
        "an": json_num(an),
        "evaluations": est.evaluations,
        "residual_summary": {
            "min": json_num(rmin),
            "max": json_num(rmax),
            "mean": json_num(rmean),
            "median": json_num(experiments::median(&r)),
        },
        "correlations": corr,
    });
    if args.emit_boundary {
        let fit = local_constant_fit(&data, &transform, bn).map_err(|e| e.to_string())?;
        let smooth = fit.clone().smooth(an).map_err(|e| e.to_string())?;
        let points: Vec<Value> = (0..=200)
            .map(|k| {
                let x = k as f64 / 200.0;
                let s = smooth.eval(x);
                json!({"x": json_num(x), "raw": json_num(fit.eval(x)), "smoothed": json_num(s.value), "fallback": s.fallback})
            })
            .collect();
        doc["boundary"] = Value::Array(points);
    }
    let mut out = io::stdout().lock();
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?,
        Format::Text | Format::Csv => {
            let mut s = String::new();
            for (k, v) in doc.as_object().expect("object") {
                if k != "boundary" {
                    s.push_str(&format!("{k}: {v}\n"));
                }
            }
            s.pop();
            s
        }
    };
    writeln!(out, "{text}").map_err(|e| e.to_string())
}

fn cmd_table(
    table: TableId,
    reps: usize,
    threads: Threads,
    seed: u64,
    format: Format,
    quiet: bool,
) -> CliResult {
    let threads = match threads {
        Threads::Auto => None,
        Threads::Fixed(t) => Some(t),
    };
    let report_progress = |done: usize, total: usize| {
        let step = (total / 20).max(1);
        if done % step == 0 || done == total {
            eprintln!("[table {table}] {done}/{total} replications");
        }
    };
    let progress: Option<experiments::Progress<'_>> =
        if quiet { None } else { Some(&report_progress) };
    let report =
        reproduce_table(table, reps, seed, threads, progress).map_err(|e| e.to_string())?;
    let text = match format {
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv(),
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n",
    };
    io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| e.to_string())
}

fn cmd_transform(family: Family, params: Vec<f64>, inverse: bool, values: Vec<f64>) -> CliResult {
    let spec = TransformSpec::new(family, params).map_err(|e| e.to_string())?;
    let mut out = io::stdout().lock();
    for v in values {
        let r = if inverse {
            spec.inverse(v)
        } else {
            spec.forward(v)
        }
        .map_err(|e| e.to_string())?;
        writeln!(out, "{}", boundreg::io::fmt17(r)).map_err(|e| e.to_string())?;
    }
    Ok(())
}
