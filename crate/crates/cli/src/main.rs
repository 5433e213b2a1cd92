//! Command-line front end for the search-collusion model.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{FileConfig, OutputFormat, RunConfig};
use search_collusion::model::{self, MarketParams};
use search_collusion::plot::render_svg;
use search_collusion::solvers::{self, RootNote, RootResult, SolverConfig};
use search_collusion::sweep::{self, column_ordering, Sweep};
use search_collusion::verify::{self, SuiteConfig};
use search_collusion::{CurveTable, Error, Regime};

#[derive(Parser)]
#[command(
    name = "search-collusion",
    version,
    about = "Collusion under costly consumer search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the model at a single (N, λ, s, v).
    Point(PointArgs),
    /// Compute λ̂, the inflection point of G and λ̃.
    Thresholds(ThresholdArgs),
    /// δ* curves over λ, one file per (N, s).
    SweepDelta(SweepDeltaArgs),
    /// G(λ;N) for several N next to the 1−λ diagonal.
    SweepG(SweepGArgs),
    /// Run the numerical verification suite.
    Verify(VerifyArgs),
    /// Render a CSV curve table as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Common {
    /// JSON file with default values; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    firms: Option<u32>,
    /// Shopper share λ in (0, 1).
    #[arg(long)]
    shoppers: Option<f64>,
    #[arg(long)]
    search_cost: Option<f64>,
    #[arg(long)]
    valuation: Option<f64>,
    /// Also write the JSON record here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    firms: Option<u32>,
    #[arg(long)]
    search_cost: Option<f64>,
    #[arg(long)]
    valuation: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepDeltaArgs {
    /// Firm counts: "2,3" or "3..10".
    #[arg(long)]
    firms: Option<String>,
    /// Search costs: "0.2,0.6".
    #[arg(long)]
    search_cost: Option<String>,
    #[arg(long)]
    valuation: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepGArgs {
    #[arg(long)]
    firms: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    firms: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scales the H′ prefactor; anything but 1 must make the suite fail.
    #[arg(long, hide = true, default_value_t = 1.0)]
    inject_hprime_scale: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PlotArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long)]
    title: Option<String>,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Verification(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Point(a) => point(a),
        Command::Thresholds(a) => thresholds(a),
        Command::SweepDelta(a) => sweep_delta(a),
        Command::SweepG(a) => sweep_g(a),
        Command::Verify(a) => run_verify(a),
        Command::Plot(a) => plot(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(names)) => {
            eprintln!("verification failed: {}", names.join(", "));
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, Failure> {
    flag.or(file)
        .ok_or_else(|| Failure::Usage(format!("missing --{name}")))
}

fn single(list: Option<config::RealList>, name: &str) -> Result<Option<f64>, Failure> {
    match list.map(|l| l.resolve()).transpose()? {
        None => Ok(None),
        Some(v) if v.len() == 1 => Ok(Some(v[0])),
        Some(_) => Err(Failure::Usage(format!(
            "--{name} takes a single value here"
        ))),
    }
}

fn single_firm(list: Option<config::IntList>) -> Result<Option<u32>, Failure> {
    match list.map(|l| l.resolve()).transpose()? {
        None => Ok(None),
        Some(v) if v.len() == 1 => Ok(Some(v[0])),
        Some(_) => Err(Failure::Usage("--firms takes a single value here".into())),
    }
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.10}"))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn point(a: PointArgs) -> Outcome {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let icfg = config::integration(a.common.abs_tol, a.common.rel_tol, &file)?;
    let params = MarketParams::new(
        required(a.firms, single_firm(file.firms.clone())?, "firms")?,
        required(a.shoppers, file.shoppers, "shoppers")?,
        required(
            a.search_cost,
            single(file.search_cost.clone(), "search-cost")?,
            "search-cost",
        )?,
        a.valuation.or(file.valuation).unwrap_or(1.0),
    )?;
    let eq = model::equilibrium_point(&params, &icfg)?;

    println!("N        {}", params.n_firms);
    println!("lambda   {}", params.shopper_share);
    println!("s        {}", params.search_cost);
    println!("v        {}", params.valuation);
    println!("G        {:.10}", eq.g_family.g);
    println!("G'       {:.10}", eq.g_family.g1);
    println!("G''      {:.10}", eq.g_family.g2);
    println!("p*       {:.10}", eq.p_star);
    println!("pi_c     {:.10}", eq.profit_collusive);
    println!("pi_d     {:.10}", eq.profit_deviation);
    println!("pi*      {}", opt(eq.profit_nash));
    println!("delta*   {}", opt(eq.delta_star));
    println!("H        {}", opt(eq.h));
    println!("Gamma    {}", opt(eq.gamma));
    println!("regime   {}", sweep::regime_label(eq.regime));
    if eq.regime == Regime::NoReservationPrice {
        println!("note     p* > v: no reservation-price equilibrium, delta* undefined");
    }
    let json = to_json(&eq);
    println!("{json}");
    if let Some(out) = a.out.or(file.out) {
        write_file(&out, &json)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ThresholdReport {
    n_firms: u32,
    search_cost: f64,
    valuation: f64,
    lambda_hat: RootResult,
    lambda_inflection: RootResult,
    lambda_tilde: RootResult,
}

fn thresholds(a: ThresholdArgs) -> Outcome {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let icfg = config::integration(a.common.abs_tol, a.common.rel_tol, &file)?;
    let n = required(a.firms, single_firm(file.firms.clone())?, "firms")?;
    let s = required(
        a.search_cost,
        single(file.search_cost.clone(), "search-cost")?,
        "search-cost",
    )?;
    let v = a.valuation.or(file.valuation).unwrap_or(1.0);
    MarketParams::new(n, 0.5, s, v)?;
    let scfg = SolverConfig::default();

    let report = ThresholdReport {
        n_firms: n,
        search_cost: s,
        valuation: v,
        lambda_hat: solvers::lambda_hat(n, s, v, &scfg, &icfg)?,
        lambda_inflection: solvers::lambda_inflection(n, &scfg, &icfg)?,
        lambda_tilde: solvers::lambda_tilde(n, s, v, &scfg, &icfg)?,
    };
    for (name, r) in [
        ("lambda_hat", &report.lambda_hat),
        ("lambda_f", &report.lambda_inflection),
        ("lambda_tilde", &report.lambda_tilde),
    ] {
        println!(
            "{name:<13} {:.12}  residual {:.2e}  iterations {}",
            r.root, r.residual, r.iterations
        );
        match r.note {
            Some(RootNote::GridArgminFallback) => {
                eprintln!("warning: {name} is a grid argmin of delta*, not a converged root")
            }
            Some(RootNote::FlatRegion) => eprintln!("warning: {name} sits in a flat region"),
            None if !r.converged => eprintln!("warning: {name} did not converge"),
            None => {}
        }
    }
    if report.lambda_hat.root >= report.lambda_tilde.root {
        return Err(Failure::Numerical(format!(
            "lambda_hat {} is not below lambda_tilde {}",
            report.lambda_hat.root, report.lambda_tilde.root
        )));
    }
    let json = to_json(&report);
    println!("{json}");
    if let Some(out) = a.out.or(file.out) {
        write_file(&out, &json)?;
    }
    Ok(())
}

fn render(table: &CurveTable, format: OutputFormat, title: &str) -> Result<String, Failure> {
    Ok(match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
        OutputFormat::Svg => render_svg(table, Some(title))?,
    })
}

fn report_failures(label: &str, sweep: &Sweep) {
    for f in &sweep.failures {
        eprintln!("warning: {label} lambda={}: {}", f.shopper_share, f.message);
    }
}

fn sweep_delta(a: SweepDeltaArgs) -> Outcome {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let run = RunConfig {
        n_firms: config::firms(a.firms.as_deref(), &file, &[2])?,
        search_costs: config::search_costs(a.search_cost.as_deref(), &file, &[0.2])?,
        valuation: a.valuation.or(file.valuation).unwrap_or(1.0),
        grid_points: a.grid.or(file.grid).unwrap_or(verify::DEFAULT_GRID),
        integration: config::integration(a.common.abs_tol, a.common.rel_tol, &file)?,
        output_path: a
            .out
            .or(file.out.clone())
            .unwrap_or_else(|| PathBuf::from(".")),
        output_format: a.format.or(file.format).unwrap_or(OutputFormat::Csv),
    };
    run.validate()?;
    std::fs::create_dir_all(&run.output_path)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", run.output_path.display())))?;

    let lambdas = verify::lambda_grid(run.grid_points);
    let mut failed_rows = 0;
    for &n in &run.n_firms {
        for &s in &run.search_costs {
            let sweep = sweep::delta_sweep(n, s, run.valuation, &lambdas, &run.integration)?;
            let label = format!("N={n} s={s}");
            report_failures(&label, &sweep);
            failed_rows += sweep.failures.len();
            let table = match run.output_format {
                OutputFormat::Svg => sweep.table.select(&["delta_star"])?,
                _ => sweep.table,
            };
            let body = render(&table, run.output_format, &format!("delta* for {label}"))?;
            let path = run
                .output_path
                .join(format!("delta_N{n}_s{s}.{}", run.output_format.extension()));
            write_file(&path, &body)?;
            println!("{}  ({} rows)", path.display(), table.rows.len());
        }
    }
    if failed_rows > 0 {
        return Err(Failure::Numerical(format!(
            "{failed_rows} sweep rows failed"
        )));
    }
    Ok(())
}

fn sweep_g(a: SweepGArgs) -> Outcome {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let run = RunConfig {
        n_firms: config::firms(a.firms.as_deref(), &file, &[3, 4, 5])?,
        search_costs: vec![],
        valuation: 1.0,
        grid_points: a.grid.or(file.grid).unwrap_or(verify::DEFAULT_GRID),
        integration: config::integration(a.common.abs_tol, a.common.rel_tol, &file)?,
        output_path: a
            .out
            .or(file.out.clone())
            .unwrap_or_else(|| PathBuf::from("sweep_g.csv")),
        output_format: a.format.or(file.format).unwrap_or(OutputFormat::Csv),
    };
    run.validate()?;
    for &n in &run.n_firms {
        model::MarketShape::new(n, 0.5)?;
    }

    let sweep = sweep::g_sweep(
        &run.n_firms,
        &verify::lambda_grid(run.grid_points),
        &run.integration,
    )?;
    report_failures("G sweep", &sweep);
    let body = render(&sweep.table, run.output_format, "G(lambda; N)")?;
    write_file(&run.output_path, &body)?;
    println!(
        "{}  ({} rows)",
        run.output_path.display(),
        sweep.table.rows.len()
    );

    let ordering = column_ordering(&sweep.table);
    let verdict = if ordering.holds(1e-9) {
        "holds"
    } else {
        "VIOLATED"
    };
    println!(
        "ordering 1-lambda <= G(N) ascending in N: {verdict} (min gap {:.3e} at lambda {:.6})",
        ordering.worst_margin, ordering.worst_lambda
    );
    if !sweep.failures.is_empty() {
        return Err(Failure::Numerical(format!(
            "{} sweep rows failed",
            sweep.failures.len()
        )));
    }
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Outcome {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let mut suite = SuiteConfig {
        integration: config::integration(a.common.abs_tol, a.common.rel_tol, &file)?,
        hprime_prefactor_scale: a.inject_hprime_scale,
        ..SuiteConfig::default()
    };
    if a.firms.is_some() || file.firms.is_some() {
        suite.n_list = config::firms(a.firms.as_deref(), &file, &[])?;
        for &n in &suite.n_list {
            model::MarketShape::new(n, 0.5)?;
        }
    }
    if let Some(grid) = a.grid.or(file.grid) {
        if grid < 100 {
            return Err(Failure::Usage(format!(
                "--grid must be at least 100, got {grid}"
            )));
        }
        suite.grid_points = grid;
    }
    if !suite.hprime_prefactor_scale.is_finite() {
        return Err(Failure::Usage(
            "--inject-hprime-scale must be finite".into(),
        ));
    }

    let report = verify::run_suite(&suite);
    for check in &report.checks {
        println!("{}", check.summary());
    }
    let out = a
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("verify_report.json"));
    write_file(&out, &report.to_json())?;
    println!("report written to {}", out.display());
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification(
            report.failing().into_iter().map(String::from).collect(),
        ))
    }
}

fn plot(a: PlotArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", a.input.display())))?;
    let table = CurveTable::from_csv(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.input.display())))?;
    let svg = render_svg(&table, a.title.as_deref())?;
    write_file(&a.output, &svg)?;
    println!("{}", a.output.display());
    Ok(())
}
