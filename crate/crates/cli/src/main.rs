//! `rescon`: run, sweep, certify and plot resilient consensus experiments.
//!
//! Exit codes: 0 success, 1 I/O or usage error, 2 invalid input, 3 unstable run,
//! 4 N-function certification FAIL.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use resilient_consensus::io::TraceTable;
use resilient_consensus::nussbaum::{certify_nfunction, Candidate, NussbaumFamily, Verdict};
use resilient_consensus::plot::{trace_charts, Selection};
use resilient_consensus::scenario::{builtin, parse_and_validate, Scenario, ScenarioError, BENCHMARK_NAME};
use resilient_consensus::simulator::{compute_summary, integrate, RunStatus};
use resilient_consensus::sweep::{run_sweep, sweep_chart, sweep_csv, SweepPlan};

const EXIT_INVALID: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_CERT_FAIL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "rescon",
    version,
    about = "Simulate and certify consensus controllers for agents with corrupted channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write trace.csv and summary.json.
    Run {
        /// Scenario JSON file, or the name of a built-in scenario.
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also record e, z1, z2, v1, Phi2 and the corrupted measurements.
        #[arg(long)]
        verbose_trace: bool,
    },
    /// Run one scenario per value of a swept parameter.
    Sweep {
        plan: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Certify an N-function candidate from its window integrals.
    NussbaumVerify {
        /// JSON with fields a, b, c, omega, variant. Mutually exclusive with --preset.
        file: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "file")]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 12)]
        max_index: usize,
        /// Write the per-index table here as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Draw SVG charts from a trace.csv.
    Plot {
        trace: PathBuf,
        /// outputs, gains, errors or E.
        #[arg(long, default_value = "outputs")]
        select: String,
        /// Terminal-set radius drawn as guides on the error chart.
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a scenario file against every constraint.
    Validate { scenario: String },
    /// Print a built-in scenario as JSON.
    EmitBuiltin {
        #[arg(default_value = BENCHMARK_NAME)]
        name: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    SlowGrowth,
    GaussianEnvelope,
}

/// Failure carrying its exit code.
struct Exit(u8);

fn load_scenario(arg: &str) -> Result<std::result::Result<Scenario<f64>, ScenarioError>> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(sc) = builtin(arg) {
            return Ok(Ok(sc));
        }
        bail!("{arg}: no such file and no built-in scenario of that name");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_and_validate(&text))
}

fn report_invalid(err: &ScenarioError) -> Exit {
    eprintln!("{err}");
    Exit(EXIT_INVALID)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run(scenario: &str, out: &Path, verbose: bool) -> Result<Option<Exit>> {
    let mut sc = match load_scenario(scenario)? {
        Ok(sc) => sc,
        Err(e) => return Ok(Some(report_invalid(&e))),
    };
    sc.flags.verbose_trace |= verbose;
    let trace = integrate(&sc).context("integrating")?;
    let summary = compute_summary(&trace, &sc);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let table = TraceTable::from_trace(&trace, sc.flags.verbose_trace);
    table.write_csv(fs::File::create(out.join("trace.csv"))?)?;
    write(&out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    match &summary.status {
        RunStatus::Completed => {
            println!(
                "{}: completed, T_s = {}, E_final = {:.3e}",
                sc.name,
                summary.settling_time.map_or("not reached".into(), |t| format!("{t:.3} s")),
                summary.e_final
            );
            Ok(None)
        }
        RunStatus::Unstable(i) => {
            eprintln!("{}: unstable at t = {} (agent {}): {i:?}", sc.name, i.time(), i.agent() + 1);
            Ok(Some(Exit(EXIT_UNSTABLE)))
        }
    }
}

fn sweep(plan: &Path, out: &Path) -> Result<Option<Exit>> {
    let text = fs::read_to_string(plan).with_context(|| format!("reading {}", plan.display()))?;
    let plan: SweepPlan = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("malformed sweep document: {e}");
            return Ok(Some(Exit(EXIT_INVALID)));
        }
    };
    let runs = match run_sweep(&plan) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return Ok(Some(Exit(EXIT_INVALID)));
        }
    };
    fs::create_dir_all(out)?;
    write(&out.join("sweep.csv"), sweep_csv(&runs))?;
    write(&out.join("sweep.svg"), sweep_chart(&plan, &runs).to_svg()?)?;
    for (k, r) in runs.iter().enumerate() {
        write(&out.join(format!("summary_{k}.json")), serde_json::to_string_pretty(&r.summary)?)?;
    }
    let mut unstable = false;
    for r in &runs {
        let status = match &r.summary.status {
            RunStatus::Completed => "completed".to_string(),
            RunStatus::Unstable(i) => {
                unstable = true;
                format!("unstable at t = {}", i.time())
            }
        };
        println!("{:>12}  E_final = {:.3e}  {status}", r.value.label(), r.summary.e_final);
    }
    Ok(unstable.then_some(Exit(EXIT_UNSTABLE)))
}

fn nussbaum_verify(
    file: Option<&Path>,
    preset: Option<Preset>,
    max_index: usize,
    csv: Option<&Path>,
) -> Result<Option<Exit>> {
    let family: NussbaumFamily<f64> = match (file, preset) {
        (_, Some(Preset::SlowGrowth)) => NussbaumFamily::slow_growth(),
        (_, Some(Preset::GaussianEnvelope)) => NussbaumFamily::gaussian_envelope(),
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            match serde_json::from_str(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("malformed N-function document: {e}");
                    return Ok(Some(Exit(EXIT_INVALID)));
                }
            }
        }
        (None, None) => bail!("give an N-function file or --preset"),
    };
    let report = match certify_nfunction(Candidate::Family(&family), max_index) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return Ok(Some(Exit(EXIT_INVALID)));
        }
    };
    println!("{:>5} {:>14} {:>14} {:>10}", "index", "ln ratio1", "ln ratio2", "dominated");
    for r in &report.rows {
        let dom = r.domination.map_or("-".to_string(), |d| d.holds().to_string());
        println!("{:>5} {:>14.4} {:>14.4} {:>10}", r.index, r.ln_ratio1, r.ln_ratio2, dom);
    }
    if let Some(path) = csv {
        write(path, report.to_csv())?;
    }
    let (r1, r2) = report.final_ratios();
    println!("verdict: {:?} (final ratios {r1:.3e}, {r2:.3e})", report.verdict);
    Ok((report.verdict == Verdict::Fail).then_some(Exit(EXIT_CERT_FAIL)))
}

fn plot(trace: &Path, select: &str, omega: Option<f64>, out: &Path) -> Result<Option<Exit>> {
    let selection: Selection = select.parse()?;
    let table = TraceTable::read_csv(fs::File::open(trace).with_context(|| format!("opening {}", trace.display()))?)?;
    fs::create_dir_all(out)?;
    for (k, chart) in trace_charts(&table, selection, omega)?.iter().enumerate() {
        let path = out.join(format!("{}_{k}.svg", select.to_lowercase()));
        write(&path, chart.to_svg()?)?;
        println!("{}", path.display());
    }
    Ok(None)
}

fn validate(scenario: &str) -> Result<Option<Exit>> {
    match load_scenario(scenario)? {
        Ok(sc) => {
            println!("{}: valid ({} agents, omega bound {})", sc.name, sc.agent_count(), sc.omega_bound());
            Ok(None)
        }
        Err(e) => Ok(Some(report_invalid(&e))),
    }
}

fn dispatch(cli: Cli) -> Result<Option<Exit>> {
    match cli.command {
        Command::Run { scenario, out, verbose_trace } => run(&scenario, &out, verbose_trace),
        Command::Sweep { plan, out } => sweep(&plan, &out),
        Command::NussbaumVerify { file, preset, max_index, csv } => {
            nussbaum_verify(file.as_deref(), preset, max_index, csv.as_deref())
        }
        Command::Plot { trace, select, omega, out } => plot(&trace, &select, omega, &out),
        Command::Validate { scenario } => validate(&scenario),
        Command::EmitBuiltin { name } => match builtin::<f64>(&name) {
            Some(sc) => {
                println!("{}", sc.to_json());
                Ok(None)
            }
            None => bail!("no built-in scenario named {name:?}"),
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Exit(code))) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::Cli;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }
}
