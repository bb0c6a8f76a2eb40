//! The three sweeps: bid limit, scenario count and scenario tightening.
//!
//! Every (agent, day) pair is an independent unit of work. For each it builds
//! scenarios from the point forecast and past forecast errors, forms the
//! bid group, clears it against the realized prices and compares the
//! realized surplus with the best response to those prices.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, SweepAxis};
use super::results::{achieved_percent, DayFailure, SweepRecord, SweepResult};
use super::{invalid, ExperimentError};
use crate::agents::Agent;
use crate::bids::{enumerate_candidates, heuristic_ii_from_candidates, CandidateSet, HeuristicOutcome};
use crate::market::{clear_xor, unrestricted_surplus, wasserstein_distance, DiscreteMeasure};
use crate::scenarios::{generate_scenarios, tighten_scenarios, ForecastConfig, ForecastRecord, PriceHistory, ScenarioSet};

/// History plus the backtested point forecast of every day that may be needed.
pub struct Prepared {
    pub history: PriceHistory,
    /// Indexed by history position; `None` where no forecast was made.
    pub forecasts: Vec<Option<ForecastRecord>>,
    /// History positions of the days to evaluate, ascending.
    pub days: Vec<usize>,
}

impl Prepared {
    /// Picks the days and backtests the forecasts that `max_scenarios`
    /// scenarios on those days require.
    pub fn new(config: &ExperimentConfig, history: PriceHistory, max_scenarios: usize) -> Result<Self, ExperimentError> {
        let first_eligible = config.forecast.min_history + max_scenarios - 1;
        if history.len() <= first_eligible {
            return Err(invalid(format!(
                "{max_scenarios} scenarios need more than {first_eligible} days of history, found {}",
                history.len()
            )));
        }
        let days: Vec<usize> = match (&config.days.dates, config.days.sample) {
            (Some(dates), _) => {
                let mut idx = dates
                    .iter()
                    .map(|d| {
                        let i = history.index_of(*d).ok_or_else(|| invalid(format!("{d} is not in the price history")))?;
                        if i < first_eligible {
                            return Err(invalid(format!(
                                "{d} has only {i} earlier days; {first_eligible} are needed for {max_scenarios} scenarios"
                            )));
                        }
                        Ok(i)
                    })
                    .collect::<Result<Vec<_>, ExperimentError>>()?;
                idx.sort_unstable();
                idx.dedup();
                idx
            }
            (None, Some(n)) => {
                let eligible = history.len() - first_eligible;
                if n > eligible {
                    return Err(invalid(format!("cannot sample {n} days from {eligible} eligible ones")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(config.days.seed);
                let mut idx: Vec<usize> =
                    rand::seq::index::sample(&mut rng, eligible, n).into_iter().map(|i| i + first_eligible).collect();
                idx.sort_unstable();
                idx
            }
            (None, None) => return Err(invalid("give a list of dates or a sample size")),
        };
        let needed: BTreeSet<usize> = days.iter().flat_map(|&d| d + 1 - max_scenarios..=d).collect();
        let made: Vec<(usize, ForecastRecord)> = needed
            .into_par_iter()
            .map(|i| forecast_record(&history, &config.forecast, i).map(|r| (i, r)))
            .collect::<Result<_, _>>()?;
        let mut forecasts = vec![None; history.len()];
        for (i, r) in made {
            forecasts[i] = Some(r);
        }
        Ok(Self { history, forecasts, days })
    }

    /// `count` equally likely scenarios for history position `day`, pulled
    /// toward the realized prices by `tightening`.
    pub fn scenarios(&self, day: usize, count: usize, tightening: f64) -> Result<ScenarioSet, ExperimentError> {
        let missing = || invalid(format!("no forecast prepared for day {day} with {count} scenarios"));
        if day + 1 < count {
            return Err(missing());
        }
        let point = &self.forecasts[day].as_ref().ok_or_else(missing)?.forecast;
        let past: Vec<ForecastRecord> = self.forecasts[day + 1 - count..day]
            .iter()
            .map(|r| r.clone().ok_or_else(missing))
            .collect::<Result<_, _>>()?;
        let set = generate_scenarios(point, &past, count)?;
        if tightening > 0.0 {
            Ok(tighten_scenarios(&set, self.actual(day), tightening)?)
        } else {
            Ok(set)
        }
    }

    pub fn actual(&self, day: usize) -> &[f64] {
        &self.history.prices()[day]
    }
}

fn forecast_record(history: &PriceHistory, config: &ForecastConfig, i: usize) -> Result<ForecastRecord, ExperimentError> {
    let (date, actual) = history.day(i);
    Ok(ForecastRecord { date, forecast: config.forecast(history, date)?, actual: actual.to_vec() })
}

/// Group submitted by the hybrid heuristic and what it realizes.
pub struct DayOutcome {
    pub outcome: HeuristicOutcome,
    pub achieved: f64,
}

/// Forms the group for `limit` bids and clears it at `actual`.
pub fn evaluate_group(
    candidates: &CandidateSet,
    scenarios: &ScenarioSet,
    limit: usize,
    actual: &[f64],
) -> Result<DayOutcome, ExperimentError> {
    let outcome = heuristic_ii_from_candidates(candidates.clone(), scenarios, limit)?;
    let cleared = clear_xor(&outcome.group, actual)?;
    Ok(DayOutcome { outcome, achieved: cleared.surplus })
}

fn record(
    agent: &Agent,
    prepared: &Prepared,
    day: usize,
    sweep_value: f64,
    achieved: f64,
    maximal: f64,
    distance: Option<f64>,
) -> SweepRecord {
    SweepRecord {
        agent: agent.kind(),
        sweep_value,
        day: prepared.history.dates()[day],
        achieved,
        maximal,
        percent: achieved_percent(achieved, maximal),
        distance,
    }
}

/// Runs `per_day` on every (agent, day) pair, keeping failures apart.
fn run_days<F>(agents: &[Agent], prepared: &Prepared, axis: SweepAxis, per_day: F) -> Result<SweepResult, ExperimentError>
where
    F: Fn(&Agent, usize) -> Result<Vec<SweepRecord>, ExperimentError> + Sync,
{
    let work: Vec<(usize, usize)> =
        (0..agents.len()).flat_map(|a| prepared.days.iter().map(move |&d| (a, d))).collect();
    let outcomes: Vec<Result<Vec<SweepRecord>, DayFailure>> = work
        .par_iter()
        .map(|&(a, d)| {
            per_day(&agents[a], d).map_err(|e| DayFailure {
                agent: agents[a].kind(),
                day: prepared.history.dates()[d],
                message: e.to_string(),
            })
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.extend(r),
            Err(f) => failures.push(f),
        }
    }
    if records.is_empty() && !failures.is_empty() {
        return Err(ExperimentError::AllDaysFailed { failures: failures.len(), first: failures[0].message.clone() });
    }
    Ok(SweepResult::new(axis, records, failures))
}

fn expect_axis(config: &ExperimentConfig, axis: SweepAxis) -> Result<(), ExperimentError> {
    config.validate()?;
    let given = config.axis()?;
    if given != axis {
        return Err(invalid(format!("config sweeps {}, expected {}", given.name(), axis.name())));
    }
    Ok(())
}

/// Bid-limit sweep on prepared inputs.
pub fn bid_sweep(agents: &[Agent], prepared: &Prepared, limits: &[usize], scenario_count: usize, tightening: f64) -> Result<SweepResult, ExperimentError> {
    run_days(agents, prepared, SweepAxis::Bids, |agent, day| {
        let actual = prepared.actual(day);
        let scenarios = prepared.scenarios(day, scenario_count, tightening)?;
        let candidates = enumerate_candidates(agent, &scenarios)?;
        let maximal = unrestricted_surplus(agent, actual)?;
        limits
            .iter()
            .map(|&b| {
                let day_outcome = evaluate_group(&candidates, &scenarios, b, actual)?;
                Ok(record(agent, prepared, day, b as f64, day_outcome.achieved, maximal, None))
            })
            .collect()
    })
}

/// Scenario-count sweep on prepared inputs. Whenever the count does not
/// exceed the bid limit, the group must be built without the selection step.
pub fn scenario_sweep(agents: &[Agent], prepared: &Prepared, counts: &[usize], limit: usize, tightening: f64) -> Result<SweepResult, ExperimentError> {
    run_days(agents, prepared, SweepAxis::Scenarios, |agent, day| {
        let actual = prepared.actual(day);
        let maximal = unrestricted_surplus(agent, actual)?;
        counts
            .iter()
            .map(|&s| {
                let scenarios = prepared.scenarios(day, s, tightening)?;
                let candidates = enumerate_candidates(agent, &scenarios)?;
                let day_outcome = evaluate_group(&candidates, &scenarios, limit, actual)?;
                if s <= limit && day_outcome.outcome.selection.is_some() {
                    return Err(ExperimentError::Internal(format!(
                        "{s} scenarios under a limit of {limit} bids still ran the selection step"
                    )));
                }
                Ok(record(agent, prepared, day, s as f64, day_outcome.achieved, maximal, None))
            })
            .collect()
    })
}

/// Tightening sweep on prepared inputs; records the distance from each
/// tightened scenario set to the realized prices.
pub fn tightening_sweep(agents: &[Agent], prepared: &Prepared, factors: &[f64], scenario_count: usize, limit: usize) -> Result<SweepResult, ExperimentError> {
    run_days(agents, prepared, SweepAxis::Tightening, |agent, day| {
        let actual = prepared.actual(day);
        let maximal = unrestricted_surplus(agent, actual)?;
        let realized = DiscreteMeasure::degenerate(actual.to_vec())?;
        factors
            .iter()
            .map(|&a| {
                let scenarios = prepared.scenarios(day, scenario_count, a)?;
                let distance = wasserstein_distance(&DiscreteMeasure::from(&scenarios), &realized)?;
                let candidates = enumerate_candidates(agent, &scenarios)?;
                let day_outcome = evaluate_group(&candidates, &scenarios, limit, actual)?;
                Ok(record(agent, prepared, day, a, day_outcome.achieved, maximal, Some(distance)))
            })
            .collect()
    })
}

/// Sweeps the bid limit as configured.
pub fn run_bid_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    expect_axis(config, SweepAxis::Bids)?;
    let agents = config.load_agents()?;
    let prepared = Prepared::new(config, config.load_history()?, config.scenario_count)?;
    let limits = config.sweep.bids.as_deref().unwrap_or_default();
    bid_sweep(&agents, &prepared, limits, config.scenario_count, config.tightening)
}

/// Sweeps the scenario count as configured.
pub fn run_scenario_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    expect_axis(config, SweepAxis::Scenarios)?;
    let agents = config.load_agents()?;
    let counts = config.sweep.scenarios.as_deref().unwrap_or_default();
    let max = counts.iter().copied().max().unwrap_or(1);
    let prepared = Prepared::new(config, config.load_history()?, max)?;
    scenario_sweep(&agents, &prepared, counts, config.bid_limit, config.tightening)
}

/// Sweeps the tightening factor as configured.
pub fn run_information_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    expect_axis(config, SweepAxis::Tightening)?;
    let agents = config.load_agents()?;
    let prepared = Prepared::new(config, config.load_history()?, config.scenario_count)?;
    let factors = config.sweep.tightening.as_deref().unwrap_or_default();
    tightening_sweep(&agents, &prepared, factors, config.scenario_count, config.bid_limit)
}

/// Runs whichever sweep the config names.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    match config.axis()? {
        SweepAxis::Bids => run_bid_sweep(config),
        SweepAxis::Scenarios => run_scenario_sweep(config),
        SweepAxis::Tightening => run_information_sweep(config),
    }
}
