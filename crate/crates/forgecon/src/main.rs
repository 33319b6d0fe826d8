use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use forgecon::bench::{self, BenchRow, Origin, SweepKind};
use forgecon::format::{self, FormatError, SolutionRecord};
use forgecon::mps;
use forgecon_core::instgen::{generate, GenSpec};
use forgecon_core::milp::build_model;
use forgecon_core::oracle::{brute_force, DEFAULT_ENUMERATION_LIMIT};
use forgecon_core::{verify, Error, Instance, SolveConfig, SolveResult, SolveStatus};

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_LIMIT: u8 = 5;

/// Forging consolidation: generate instances, solve them exactly, compare
/// against the no-consolidation baseline and export the MILP.
#[derive(Parser)]
#[command(name = "forgecon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Generate {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output file (stdout if omitted).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve an instance, verify the result and print a CSV summary.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Tie-shuffling seed for the search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the solution document.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Check a solution document against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Compare the optimum with the no-consolidation baseline.
    Bench {
        /// Instance file; otherwise one is generated from the spec flags.
        #[arg(required_unless_present = "seed")]
        instance: Option<PathBuf>,
        #[command(flatten)]
        spec: OptionalSpecArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// CSV output file (stdout if omitted).
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Directory for the solution and baseline documents.
        #[arg(long)]
        solutions: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Re-solve a generated instance while varying one parameter.
    Sweep {
        #[arg(value_parser = clap::builder::ValueParser::new(parse_kind))]
        kind: SweepKind,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        parts: u32,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        forgings: u32,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        options: u32,
        #[arg(long)]
        seed: u64,
        /// Comma-separated sweep values (defaults depend on the sweep).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Directory for the solution and baseline documents.
        #[arg(long)]
        solutions: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Write the MILP as fixed-format MPS plus a name table.
    Export {
        instance: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Name table path (defaults to `<out>.names`).
        #[arg(long)]
        names: Option<PathBuf>,
    },
    /// Solve with both the search and brute force and compare the optima.
    OracleCheck {
        #[arg(required_unless_present = "seed")]
        instance: Option<PathBuf>,
        #[command(flatten)]
        spec: OptionalSpecArgs,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: u128,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        workers: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    parts: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    forgings: u32,
    /// Forging draws per part (a part gets between 1 and this many options).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    options: u32,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    multipliers: MultiplierArgs,
}

#[derive(Args)]
struct OptionalSpecArgs {
    #[arg(long, requires_all = ["forgings", "seed"], conflicts_with = "instance", value_parser = clap::value_parser!(u32).range(1..))]
    parts: Option<u32>,
    #[arg(long, requires_all = ["parts", "seed"], value_parser = clap::value_parser!(u32).range(1..))]
    forgings: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    options: Option<u32>,
    #[arg(long, requires_all = ["parts", "forgings"])]
    seed: Option<u64>,
    #[command(flatten)]
    multipliers: MultiplierArgs,
}

#[derive(Args)]
struct MultiplierArgs {
    /// Scales forging fixed ordering costs.
    #[arg(long, default_value_t = 1.0)]
    fixed_cost_multiplier: f64,
    /// Scales forging holding costs.
    #[arg(long, default_value_t = 1.0)]
    holding_multiplier: f64,
    /// Scales forging discount fractions (capped at 50%).
    #[arg(long, default_value_t = 1.0)]
    discount_multiplier: f64,
}

#[derive(Args)]
struct SolveArgs {
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Stop once the relative gap is at most this value.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
}

fn parse_kind(s: &str) -> Result<SweepKind, String> {
    s.parse()
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self::new(EXIT_OTHER, error)
    }
}

fn core_failure(e: Error) -> Failure {
    let code = match e {
        Error::EnumerationLimit { .. } => EXIT_LIMIT,
        _ => EXIT_INVALID,
    };
    Failure::new(code, e)
}

fn format_failure(e: FormatError, path: &Path) -> Failure {
    let code = match e {
        FormatError::Invalid { .. } => EXIT_INVALID,
        _ => EXIT_PARSE,
    };
    Failure::new(
        code,
        anyhow!(e).context(format!("reading {}", path.display())),
    )
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Generate { spec, out } => {
            let spec = spec.to_spec()?;
            let instance = generate(&spec).map_err(core_failure)?;
            let text = format::save_instance(&instance).map_err(|e| Failure::new(EXIT_OTHER, e))?;
            write_output(out.as_deref(), text.as_bytes())?;
            Ok(0)
        }
        Command::Solve {
            instance,
            solve,
            seed,
            out,
            format: Format::Csv,
        } => {
            let inst = read_instance(&instance)?;
            let mut config = solve.to_config()?;
            config.seed = seed;
            let result = forgecon::solve(&inst, &config).map_err(core_failure)?;
            verify(&inst, &result.solution).map_err(core_failure)?;
            if let Some(path) = out {
                write_solution(&path, &SolutionRecord::from(&result))?;
            }
            print_solve_csv(&result)?;
            eprintln!("{}", summary_line(&result));
            Ok(status_code(result.status))
        }
        Command::Verify { instance, solution } => {
            let inst = read_instance(&instance)?;
            let text = read_text(&solution)?;
            let record = format::load_solution(&text).map_err(|e| format_failure(e, &solution))?;
            let costs = verify(&inst, &record.solution)
                .map_err(|e| Failure::new(EXIT_INVALID, anyhow!(e).context("solution rejected")))?;
            println!(
                "valid: total {} (machining {}, forging {}, inventory {}), {} forgings selected",
                costs.total,
                costs.machining,
                costs.forging,
                costs.inventory,
                record.solution.selected.len()
            );
            Ok(0)
        }
        Command::Bench {
            instance,
            spec,
            solve,
            out,
            solutions,
            format: Format::Csv,
        } => {
            let config = solve.to_config()?;
            let (inst, origin) = instance_or_spec(instance.as_deref(), &spec)?;
            let row = bench::bench_instance(&inst, origin, &config).map_err(core_failure)?;
            verify(&inst, &row.result.solution).map_err(core_failure)?;
            if let Some(dir) = solutions {
                save_row(&dir, "bench", &row)?;
            }
            let mut buf = Vec::new();
            bench::write_rows_csv(std::slice::from_ref(&row), &mut buf).context("writing CSV")?;
            write_output(out.as_deref(), &buf)?;
            Ok(status_code(row.result.status))
        }
        Command::Sweep {
            kind,
            parts,
            forgings,
            options,
            seed,
            values,
            solve,
            out,
            solutions,
            format: Format::Csv,
        } => {
            let config = solve.to_config()?;
            let mut base = GenSpec::new(parts as usize, forgings as usize, seed);
            base.options_per_part = options as usize;
            let values = values.unwrap_or_else(|| kind.default_values());
            let report = bench::run_sweep(kind, &base, &values, &config).map_err(core_failure)?;
            if let Some(dir) = solutions {
                for (n, p) in report.points.iter().enumerate() {
                    save_row(&dir, &format!("{kind}-{n}"), &p.row)?;
                }
            }
            let mut buf = Vec::new();
            report.write_csv(&mut buf).context("writing CSV")?;
            write_output(out.as_deref(), &buf)?;
            let worst = report
                .points
                .iter()
                .map(|p| status_code(p.row.result.status))
                .max()
                .unwrap_or(0);
            Ok(worst)
        }
        Command::Export {
            instance,
            out,
            names,
        } => {
            let inst = read_instance(&instance)?;
            let (model, _) = build_model(&inst).map_err(core_failure)?;
            let export = mps::export_mps(&model).map_err(|e| Failure::new(EXIT_INVALID, e))?;
            let names = names.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".names");
                PathBuf::from(p)
            });
            write_output(Some(&out), export.mps.as_bytes())?;
            write_output(Some(&names), export.names.as_bytes())?;
            eprintln!(
                "wrote {} ({} variables, {} rows) and {}",
                out.display(),
                model.variables().len(),
                model.constraints().len(),
                names.display()
            );
            Ok(0)
        }
        Command::OracleCheck {
            instance,
            spec,
            limit,
            workers,
        } => {
            let (inst, _) = instance_or_spec(instance.as_deref(), &spec)?;
            let oracle = brute_force(&inst, limit).map_err(core_failure)?;
            let config = SolveConfig {
                worker_count: workers as usize,
                ..SolveConfig::default()
            };
            let search = forgecon::solve(&inst, &config).map_err(core_failure)?;
            let (a, b) = (search.solution.costs.total, oracle.solution.costs.total);
            let agree = (a - b).abs() <= 1e-6 * b.abs().max(1.0);
            println!(
                "search {a} ({}), oracle {b} ({} assignments): {}",
                search.status.as_str(),
                oracle.node_count,
                if agree { "agree" } else { "DISAGREE" }
            );
            if agree {
                Ok(0)
            } else {
                Err(Failure::new(
                    EXIT_OTHER,
                    anyhow!("search and oracle optima differ"),
                ))
            }
        }
    }
}

impl SpecArgs {
    fn to_spec(&self) -> Result<GenSpec, Failure> {
        let mut spec = GenSpec::new(self.parts as usize, self.forgings as usize, self.seed);
        spec.options_per_part = self.options as usize;
        self.multipliers.apply(&mut spec);
        spec.validate().map_err(core_failure)?;
        Ok(spec)
    }
}

impl MultiplierArgs {
    fn apply(&self, spec: &mut GenSpec) {
        spec.multipliers.forging_fixed_cost = self.fixed_cost_multiplier;
        spec.multipliers.holding_cost = self.holding_multiplier;
        spec.multipliers.forging_discount = self.discount_multiplier;
    }
}

impl SolveArgs {
    fn to_config(&self) -> Result<SolveConfig, Failure> {
        let config = SolveConfig {
            time_limit: self.time_limit,
            target_gap: self.gap,
            worker_count: self.workers as usize,
            seed: 0,
        };
        config.validate().map_err(|e| Failure::new(EXIT_USAGE, e))?;
        Ok(config)
    }
}

fn instance_or_spec(
    path: Option<&Path>,
    spec: &OptionalSpecArgs,
) -> Result<(Instance, Origin), Failure> {
    if let Some(path) = path {
        return Ok((read_instance(path)?, Origin::default()));
    }
    let (Some(parts), Some(forgings), Some(seed)) = (spec.parts, spec.forgings, spec.seed) else {
        return Err(Failure::new(
            EXIT_USAGE,
            anyhow!("give an instance file or --parts, --forgings and --seed"),
        ));
    };
    let mut g = GenSpec::new(parts as usize, forgings as usize, seed);
    if let Some(o) = spec.options {
        g.options_per_part = o as usize;
    }
    spec.multipliers.apply(&mut g);
    let inst = generate(&g).map_err(core_failure)?;
    Ok((inst, Origin::from(&g)))
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal | SolveStatus::GapLimit => 0,
        SolveStatus::TimeLimit => EXIT_LIMIT,
    }
}

fn summary_line(r: &SolveResult) -> String {
    let c = &r.solution.costs;
    format!(
        "{}: total {} (machining {}, forging {}, inventory {}), {} forgings selected, bound {}, gap {:.3e}, {} nodes, {:.3}s",
        r.status.as_str(),
        c.total,
        c.machining,
        c.forging,
        c.inventory,
        r.solution.selected.len(),
        r.lower_bound,
        r.gap(),
        r.node_count,
        r.wall_time
    )
}

fn print_solve_csv(r: &SolveResult) -> Result<(), Failure> {
    let c = &r.solution.costs;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let result: csv::Result<()> = (|| {
        w.write_record([
            "status",
            "total",
            "machining",
            "forging",
            "inventory",
            "selected",
            "lower_bound",
            "gap",
            "nodes",
            "wall_time",
        ])?;
        w.write_record([
            r.status.as_str().to_string(),
            c.total.to_string(),
            c.machining.to_string(),
            c.forging.to_string(),
            c.inventory.to_string(),
            r.solution.selected.len().to_string(),
            r.lower_bound.to_string(),
            r.gap().to_string(),
            r.node_count.to_string(),
            format!("{:.6}", r.wall_time),
        ])?;
        w.flush()?;
        Ok(())
    })();
    result.context("writing CSV").map_err(Failure::from)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::from)
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read_text(path)?;
    format::load_instance(&text).map_err(|e| format_failure(e, path))
}

fn write_solution(path: &Path, record: &SolutionRecord) -> Result<(), Failure> {
    let text = format::save_solution(record).map_err(|e| Failure::new(EXIT_OTHER, e))?;
    write_output(Some(path), text.as_bytes())
}

fn save_row(dir: &Path, label: &str, row: &BenchRow) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_solution(
        &dir.join(format!("{label}.solution.toml")),
        &SolutionRecord::from(&row.result),
    )?;
    write_solution(
        &dir.join(format!("{label}.baseline.toml")),
        &SolutionRecord::bare(row.baseline.clone()),
    )
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .context("writing to stdout")?;
        }
    }
    Ok(())
}
