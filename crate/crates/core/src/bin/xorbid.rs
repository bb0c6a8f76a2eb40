//! Command-line front end for forecasting, bid selection, clearing and the
//! experiment sweeps.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when an optimization or
//! consistency check fails.

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use xorbid::agents::{Agent, AgentKind};
use xorbid::bids::{enumerate_candidates, heuristic_ii_from_candidates, ExclusiveGroup};
use xorbid::experiments::{
    generate_synthetic_prices, DaySelection, ExperimentConfig, ExperimentError, Prepared, SweepAxes, SweepAxis,
    SweepResult,
};
use xorbid::market::{check_wasserstein_bound, clear_xor, unrestricted_surplus, wasserstein_distance, DiscreteMeasure};
use xorbid::scenarios::PriceHistory;

#[derive(Parser)]
#[command(name = "xorbid", version, about = "XOR package-bid selection for day-ahead auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point forecast for one day from the days before it.
    Forecast {
        #[command(flatten)]
        input: Input,
        /// Day to forecast (YYYY-MM-DD).
        #[arg(long)]
        date: NaiveDate,
        /// Write `date,h01,..` here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the exclusive bid group for one agent and day.
    SelectBids {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        day: DayArgs,
        /// Bid limit B, replacing the configured one.
        #[arg(long)]
        bids: Option<usize>,
        /// Group file to write (`bid_id,price_eur,q_h01,..`).
        #[arg(long)]
        output: PathBuf,
    },
    /// Clear a group file against realized prices.
    Clear {
        #[arg(long)]
        group: PathBuf,
        /// Price file in `date,h01,..` form.
        #[arg(long)]
        prices: PathBuf,
        /// Row to use when the price file holds several days.
        #[arg(long)]
        date: Option<NaiveDate>,
        /// Also report the best response of this agent and the profit loss.
        #[arg(long)]
        agent: Option<AgentKind>,
        /// Agent parameter file (TOML); the case-study agents by default.
        #[arg(long)]
        agent_params: Option<PathBuf>,
    },
    /// Sweep the bid limit.
    SweepBids(SweepArgs),
    /// Sweep the scenario count.
    SweepScenarios(SweepArgs),
    /// Sweep the tightening toward the realized prices.
    SweepInformation(SweepArgs),
    /// Distance from one day's scenarios to the realized prices, with the
    /// profit-loss bound for the agent.
    Wasserstein {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        day: DayArgs,
    },
    /// Write a synthetic price history.
    SynthPrices {
        /// Experiment config whose `[prices]` section supplies the defaults.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        days: Option<usize>,
        /// Periods per day.
        #[arg(long)]
        periods: Option<usize>,
        /// History file to write (`date,h01,..`).
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct Input {
    /// Experiment config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Price history file, replacing the configured source.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct DayArgs {
    /// generator, battery or heat.
    #[arg(long)]
    agent: AgentKind,
    /// Delivery day (YYYY-MM-DD).
    #[arg(long)]
    date: NaiveDate,
    /// Scenario count S, replacing the configured one.
    #[arg(long)]
    scenarios: Option<usize>,
    /// Tightening factor in [0, 1], replacing the configured one.
    #[arg(long)]
    tightening: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: Input,
    /// Comma-separated values for the swept axis, replacing the configured ones.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Number of days to sample, replacing the configured day list.
    #[arg(long)]
    sample: Option<usize>,
    /// Seed for the day sample.
    #[arg(long)]
    seed: Option<u64>,
    /// Where the records, failures and summary are written.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}

fn run(command: Command) -> Result<(), ExperimentError> {
    match command {
        Command::Forecast { input, date, output } => {
            let config = input.load()?;
            let history = config.load_history()?;
            let forecast = config.forecast.forecast(&history, date)?;
            let single = PriceHistory::new(vec![date], vec![forecast])?;
            match output {
                Some(path) => single.save(path)?,
                None => single.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::SelectBids { input, day, bids, output } => {
            let mut config = input.load()?;
            if let Some(b) = bids {
                config.bid_limit = b;
            }
            let (agent, prepared, index) = one_day(config.clone(), &day)?;
            let scenarios = prepared.scenarios(index, day.scenarios.unwrap_or(config.scenario_count), tightening(&config, &day))?;
            let candidates = enumerate_candidates(&agent, &scenarios)?;
            let outcome = heuristic_ii_from_candidates(candidates, &scenarios, config.bid_limit)?;
            outcome.group.save(&output, scenarios.periods())?;
            let path = outcome.selection.as_ref().map(|s| format!("{:?}", s.path)).unwrap_or_else(|| "AllCandidates".into());
            println!(
                "{} bids ({} candidates, {path}), in-sample expected surplus {:.2} EUR -> {}",
                outcome.group.len(),
                outcome.candidates.len(),
                outcome.expected_surplus,
                output.display()
            );
        }
        Command::Clear { group, prices, date, agent, agent_params } => {
            let (group, _) = ExclusiveGroup::load(&group, None)?;
            let history = PriceHistory::load(&prices)?;
            let realized = match date {
                Some(d) => history.prices_on(d).ok_or_else(|| ExperimentError::Invalid(format!("{d} is not in {}", prices.display())))?,
                None if history.len() == 1 => history.day(0).1,
                None => return Err(ExperimentError::Invalid("price file holds several days; pass --date".into())),
            };
            let outcome = clear_xor(&group, realized)?;
            let mut report = serde_json::json!({
                "accepted": outcome.accepted,
                "payment_eur": outcome.payment,
                "surplus_eur": outcome.surplus,
            });
            if let Some(kind) = agent {
                let agent = load_agent(kind, agent_params)?;
                let maximal = unrestricted_surplus(&agent, realized)?;
                report["maximal_eur"] = maximal.into();
                report["profit_loss_eur"] = (maximal - outcome.surplus).into();
                report["percent"] = xorbid::experiments::achieved_percent(outcome.surplus, maximal).into();
            }
            println!("{}", serde_json::to_string_pretty(&report).expect("json values serialize"));
        }
        Command::SweepBids(args) => sweep(args, SweepAxis::Bids)?,
        Command::SweepScenarios(args) => sweep(args, SweepAxis::Scenarios)?,
        Command::SweepInformation(args) => sweep(args, SweepAxis::Tightening)?,
        Command::Wasserstein { input, day } => {
            let config = input.load()?;
            let (agent, prepared, index) = one_day(config.clone(), &day)?;
            let scenarios = prepared.scenarios(index, day.scenarios.unwrap_or(config.scenario_count), tightening(&config, &day))?;
            let realized = DiscreteMeasure::degenerate(prepared.actual(index).to_vec())?;
            let distance = wasserstein_distance(&DiscreteMeasure::from(&scenarios), &realized)?;
            let report = check_wasserstein_bound(&agent, &realized, &scenarios)?;
            let out = serde_json::json!({ "d_W": distance, "bound": report });
            println!("{}", serde_json::to_string_pretty(&out).expect("json values serialize"));
        }
        Command::SynthPrices { config, seed, days, periods, output } => {
            let base = config.map(ExperimentConfig::load).transpose()?;
            let source = base.as_ref().map(|c| &c.prices);
            let seed = seed
                .or(source.and_then(|s| s.synthetic_seed))
                .ok_or_else(|| ExperimentError::Invalid("pass --seed or a config with a synthetic seed".into()))?;
            let days = days.or(source.map(|s| s.synthetic_days)).unwrap_or(365);
            let periods = periods.or(source.map(|s| s.periods)).unwrap_or(24);
            let settings = source.map(|s| s.synthetic.clone()).unwrap_or_default();
            generate_synthetic_prices(seed, days, periods, &settings)?.save(&output)?;
            println!("{days} days x {periods} periods -> {}", output.display());
        }
    }
    Ok(())
}

impl Input {
    fn load(&self) -> Result<ExperimentConfig, ExperimentError> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(h) = &self.history {
            config.prices.history = Some(h.clone());
            config.prices.synthetic_seed = None;
        }
        config.validate()?;
        Ok(config)
    }
}

fn tightening(config: &ExperimentConfig, day: &DayArgs) -> f64 {
    day.tightening.unwrap_or(config.tightening)
}

fn load_agent(kind: AgentKind, params: Option<PathBuf>) -> Result<Agent, ExperimentError> {
    let config = match params {
        Some(p) => xorbid::agents::AgentsConfig::load(p)?,
        None => xorbid::agents::AgentsConfig::table1(),
    };
    Ok(config.agent(kind)?)
}

/// Agent, prepared inputs and history position for a single-day command.
fn one_day(mut config: ExperimentConfig, day: &DayArgs) -> Result<(Agent, Prepared, usize), ExperimentError> {
    if let Some(a) = day.tightening {
        if !(0.0..=1.0).contains(&a) {
            return Err(ExperimentError::Invalid(format!("tightening factor must lie in [0, 1], got {a}")));
        }
    }
    let count = day.scenarios.unwrap_or(config.scenario_count);
    if count == 0 {
        return Err(ExperimentError::Invalid("scenario count must be at least 1".into()));
    }
    config.agents = vec![day.agent];
    config.days = DaySelection { dates: Some(vec![day.date]), sample: None, seed: 0 };
    let agent = config.load_agents()?.remove(0);
    let prepared = Prepared::new(&config, config.load_history()?, count)?;
    let index = prepared.days[0];
    Ok((agent, prepared, index))
}

fn sweep(args: SweepArgs, axis: SweepAxis) -> Result<(), ExperimentError> {
    let mut config = args.input.load()?;
    if let Some(values) = args.values {
        let counts = || -> Result<Vec<usize>, ExperimentError> {
            values
                .iter()
                .map(|&v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(ExperimentError::Invalid(format!("{v} is not a positive whole number")))
                    }
                })
                .collect()
        };
        config.sweep = match axis {
            SweepAxis::Bids => SweepAxes { bids: Some(counts()?), ..SweepAxes::default() },
            SweepAxis::Scenarios => SweepAxes { scenarios: Some(counts()?), ..SweepAxes::default() },
            SweepAxis::Tightening => SweepAxes { tightening: Some(values.clone()), ..SweepAxes::default() },
        };
    }
    if let Some(n) = args.sample {
        config.days.dates = None;
        config.days.sample = Some(n);
    }
    if let Some(seed) = args.seed {
        config.days.seed = seed;
    }
    if let Some(dir) = args.output_dir {
        config.output_dir = dir;
    }
    config.validate()?;
    let result: SweepResult = match axis {
        SweepAxis::Bids => xorbid::experiments::run_bid_sweep(&config)?,
        SweepAxis::Scenarios => xorbid::experiments::run_scenario_sweep(&config)?,
        SweepAxis::Tightening => xorbid::experiments::run_information_sweep(&config)?,
    };
    let paths = result.save(&config.output_dir)?;
    println!("{:<10} {:>10} {:>5} {:>9} {:>8} {:>10}", "agent", axis.name(), "days", "percent", "stderr", "d_W");
    for p in result.summary() {
        let d_w = p.mean_d_w.map(|d| format!("{d:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<10} {:>10} {:>5} {:>9.2} {:>8.2} {:>10}",
            p.agent.to_string(),
            p.sweep_value,
            p.days,
            p.mean_percent,
            p.std_error,
            d_w
        );
    }
    for f in &result.failures {
        eprintln!("skipped {} {}: {}", f.agent, f.day, f.message);
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}
