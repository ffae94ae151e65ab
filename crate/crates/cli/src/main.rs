use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use vlink::analysis::{congestion_report, price_heatmap_svg, price_stats};
use vlink::cases::{self, case_ieee30, Ieee30Options, PricePolicy, IEEE30_DEFAULT_SEED};
use vlink::clearing::{clear, ClearError, ClearOptions, ClearingSolution};
use vlink::lp::{LpError, PivotRule, SolveOptions};
use vlink::netmodel::{parse_case, to_case_string, CaseSpec};
use vlink::report::{render_table, solution_csv, table_cells, table_csv, SolutionReport};

/// Market clearing with space-time virtual links.
///
/// Exit codes: 0 success, 2 usage, 3 parse or I/O error, 4 infeasible,
/// 5 unbounded, 6 numerical failure, 7 golden or property mismatch.
#[derive(Parser)]
#[command(name = "vlink", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clear one case and write reports.
    Solve(SolveArgs),
    /// Clear every scenario of a built-in family and compare with the
    /// golden values.
    Sweep(SweepArgs),
    /// Write a built-in case in the case-file format.
    Export(ExportArgs),
}

const BUILTIN_NAMES: [&str; 3] = ["3bus", "1bus5t", "ieee30"];

#[derive(Args)]
struct InputArgs {
    /// Case file.
    #[arg(value_name = "CASE", conflicts_with_all = ["builtin", "case"])]
    path: Option<PathBuf>,
    /// Case file.
    #[arg(long, env = "VLINK_CASE", conflicts_with = "builtin")]
    case: Option<PathBuf>,
    /// Built-in case.
    #[arg(long, env = "VLINK_BUILTIN", value_parser = BUILTIN_NAMES)]
    builtin: Option<String>,
    /// Scenario of the built-in family (ieee30: 1 without links, 2 with).
    #[arg(long, env = "VLINK_SCENARIO", default_value_t = 1)]
    scenario: usize,
    /// Seed of the synthetic 30-bus bids.
    #[arg(long, env = "VLINK_SEED", default_value_t = IEEE30_DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SolverArgs {
    /// Primal and dual feasibility tolerance.
    #[arg(long, env = "VLINK_TOL")]
    tol: Option<f64>,
    /// Entering-variable rule: dantzig or bland.
    #[arg(long, env = "VLINK_PIVOT", default_value = "dantzig")]
    pivot: PivotRule,
}

impl SolverArgs {
    fn options(&self) -> ClearOptions {
        let mut solver = SolveOptions {
            pivot: self.pivot,
            ..SolveOptions::default()
        };
        if let Some(t) = self.tol {
            solver.tol_feas = t;
            solver.tol_dual = t;
        }
        ClearOptions { solver }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
    Svg,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, env = "VLINK_OUT")]
    out: Option<PathBuf>,
    /// Comma-separated report formats.
    #[arg(long, env = "VLINK_FORMAT", value_delimiter = ',', default_value = "table")]
    format: Vec<Format>,
}

#[derive(Args)]
struct SweepArgs {
    /// Built-in family.
    #[arg(long, env = "VLINK_BUILTIN", value_parser = BUILTIN_NAMES)]
    builtin: String,
    /// Seed of the synthetic 30-bus bids.
    #[arg(long, env = "VLINK_SEED", default_value_t = IEEE30_DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory; the table goes to stdout when absent.
    #[arg(long, env = "VLINK_OUT")]
    out: Option<PathBuf>,
    /// csv or table.
    #[arg(long, env = "VLINK_FORMAT", default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ExportArgs {
    /// Built-in case.
    #[arg(long, env = "VLINK_BUILTIN", value_parser = BUILTIN_NAMES)]
    builtin: String,
    /// Scenario of the built-in family.
    #[arg(long, env = "VLINK_SCENARIO", default_value_t = 1)]
    scenario: usize,
    /// Seed of the synthetic 30-bus bids.
    #[arg(long, env = "VLINK_SEED", default_value_t = IEEE30_DEFAULT_SEED)]
    seed: u64,
    /// Output directory; the case goes to stdout when absent.
    #[arg(long, env = "VLINK_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(anyhow::Error),
    Infeasible(String),
    Unbounded(String),
    Numerical(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Infeasible(_) => 4,
            Failure::Unbounded(_) => 5,
            Failure::Numerical(_) => 6,
            Failure::Mismatch(_) => 7,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(e) => format!("{e:#}"),
            Failure::Usage(m)
            | Failure::Infeasible(m)
            | Failure::Unbounded(m)
            | Failure::Numerical(m)
            | Failure::Mismatch(m) => m.clone(),
        }
    }
}

impl From<ClearError> for Failure {
    fn from(e: ClearError) -> Self {
        let msg = e.to_string();
        match e {
            ClearError::Build(_) => Failure::Input(anyhow::anyhow!(msg)),
            ClearError::Infeasible => Failure::Infeasible(msg),
            ClearError::Unbounded => Failure::Unbounded(msg),
            ClearError::Lp(LpError::NumericalFailure { .. } | LpError::IterationLimit { .. }) => {
                Failure::Numerical(msg)
            }
            ClearError::Lp(_) => Failure::Numerical(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Export(a) => cmd_export(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn builtin_case(name: &str, scenario: usize, seed: u64) -> Result<CaseSpec, Failure> {
    cases::builtin(name, scenario, seed).map_err(|e| Failure::Usage(e.to_string()))
}

fn load_case(input: &InputArgs) -> Result<CaseSpec, Failure> {
    if let Some(name) = &input.builtin {
        return builtin_case(name, input.scenario, input.seed);
    }
    let Some(path) = input.path.as_ref().or(input.case.as_ref()) else {
        return Err(Failure::Usage("give a case file or --builtin".into()));
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Input)?;
    parse_case(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Input)
}

fn emit(out: Option<&Path>, file: &str, body: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(dir) => {
            fs::create_dir_all(dir)
                .and_then(|_| fs::write(dir.join(file), body))
                .with_context(|| format!("writing {}", dir.join(file).display()))
                .map_err(Failure::Input)
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Failure> {
    let case = load_case(&a.input)?;
    let sol = clear(&case, &a.solver.options())?;
    let name = &case.name;
    let out = a.out.as_deref();
    for f in &a.format {
        match f {
            Format::Json => emit(out, &format!("{name}.json"), &SolutionReport::new(&sol).to_json())?,
            Format::Csv => {
                emit(out, &format!("{name}.csv"), &solution_csv(&sol))?;
                if out.is_some() {
                    emit(out, &format!("{name}-stats.csv"), &price_stats(&sol).to_csv())?;
                }
            }
            Format::Table => emit(out, &format!("{name}.txt"), &render_table(&[table_cells(name, &sol)]))?,
            Format::Svg => emit(out, &format!("{name}.svg"), &price_heatmap_svg(&sol))?,
        }
    }
    Ok(())
}

fn write_table(a: &SweepArgs, rows: &[Vec<String>], extra: &[&str]) -> Result<(), Failure> {
    let body = match a.format {
        Format::Table => render_table(rows),
        _ => table_csv(rows, extra),
    };
    let ext = if a.format == Format::Table { "txt" } else { "csv" };
    emit(a.out.as_deref(), &format!("sweep-{}.{ext}", a.builtin), &body)
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    if a.builtin == "ieee30" {
        return sweep_ieee30(a);
    }
    let template = cases::template_for(&a.builtin).expect("family has a template");
    let golden = cases::golden_for(&a.builtin).expect("family has golden values");
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (k, row) in cases::sweep(&template, &a.solver.options()).into_iter().enumerate() {
        let id = k + 1;
        let sol = row.result?;
        let v = golden.verdict(id, &sol, 1e-6, 1e-8);
        let status = if !v.pass() {
            failed.push(id);
            "fail"
        } else if v.prices.is_empty() {
            "pass"
        } else {
            "pass-certificate"
        };
        for m in v.quantities.iter().chain(&v.prices) {
            let note = if m.field == "lmp" && v.policy == PricePolicy::CertificateOnly {
                " (non-unique prices, certificate valid)"
            } else {
                ""
            };
            eprintln!(
                "scenario {id}: {}[{}] expected {} got {}{note}",
                m.field, m.index, m.expected, m.actual
            );
        }
        let mut cells = table_cells(&id.to_string(), &sol);
        cells.push(status.to_string());
        rows.push(cells);
    }
    write_table(a, &rows, &["golden"])?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("golden mismatch in scenarios {failed:?}")))
    }
}

fn sweep_ieee30(a: &SweepArgs) -> Result<(), Failure> {
    let opts = a.solver.options();
    let solve = |flex| -> Result<ClearingSolution, Failure> {
        Ok(clear(&case_ieee30(&Ieee30Options { flex, seed: a.seed }), &opts)?)
    };
    let base = solve(false)?;
    let flex = solve(true)?;
    let (sb, sf) = (price_stats(&base), price_stats(&flex));
    let mut checks = vec![("welfare increases".to_string(), flex.welfare > base.welfare)];
    for (pb, pf) in sb.periods.iter().zip(&sf.periods) {
        checks.push((format!("t{} sigma decreases", pb.period), pf.std_dev < pb.std_dev));
        checks.push((format!("t{} MAD decreases", pb.period), pf.mad < pb.mad));
    }
    let (nb, nf) = (
        congestion_report(&base, 1e-7).negative_prices(),
        congestion_report(&flex, 1e-7).negative_prices(),
    );
    checks.push(("negative prices do not increase".into(), nf <= nb));
    for (name, ok) in &checks {
        eprintln!("{}: {name}", if *ok { "PASS" } else { "FAIL" });
    }
    let all = checks.iter().all(|c| c.1);
    let verdict = if all { "pass" } else { "fail" };
    let mut rows = Vec::new();
    for (label, sol) in [("no-flex", &base), ("flex", &flex)] {
        let mut cells = table_cells(label, sol);
        cells.push(verdict.to_string());
        rows.push(cells);
    }
    write_table(a, &rows, &["property"])?;
    if all {
        Ok(())
    } else {
        Err(Failure::Mismatch("30-bus property check failed".into()))
    }
}

fn cmd_export(a: &ExportArgs) -> Result<(), Failure> {
    let case = builtin_case(&a.builtin, a.scenario, a.seed)?;
    emit(a.out.as_deref(), &format!("{}.toml", case.name), &to_case_string(&case))
}
