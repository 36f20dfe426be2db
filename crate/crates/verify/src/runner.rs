use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::checks::{find_measure, run_group, Bound, Ctx, Group, GROUPS, SPECTRAL_RATIO_CHECKS, UNASSERTED_CHECKS};
use crate::config::{ConfigError, Suite, SuiteConfig};
use crate::report::{ConvergenceRow, Record, SuiteReport};

/// A single record to rerun, written `name:seed:N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordSelector {
    pub name: String,
    pub seed: u64,
    pub n: usize,
}

impl FromStr for RecordSelector {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<RecordSelector, ConfigError> {
        let bad = |msg: &str| ConfigError::Invalid {
            field: "--record".into(),
            message: format!("`{s}`: {msg}"),
        };
        let parts: Vec<&str> = s.split(':').collect();
        let [name, seed, n] = parts.as_slice() else {
            return Err(bad("expected name:seed:N"));
        };
        if find_measure(name).is_none() {
            return Err(bad("unknown record name"));
        }
        Ok(RecordSelector {
            name: name.to_string(),
            seed: seed.parse().map_err(|_| bad("seed is not an integer"))?,
            n: n.parse().map_err(|_| bad("N is not an integer"))?,
        })
    }
}

struct Task {
    group: &'static Group,
    seed: u64,
    n: usize,
}

fn bound_for(config: &SuiteConfig, suite: Suite, bound: Bound) -> Bound {
    match (bound, config.tolerance_override(suite)) {
        (Bound::AtMost(_), Some(t)) => Bound::AtMost(t),
        (b, _) => b,
    }
}

fn execute(config: &SuiteConfig, task: &Task) -> Vec<Record> {
    let start = Instant::now();
    let outcome = Ctx::new(task.seed, task.n, config.kmax).and_then(|ctx| run_group(task.group, &ctx));
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    task.group
        .measures
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let bound = bound_for(config, task.group.suite, m.bound);
            let (residual, passed, cause) = match &outcome {
                Ok(values) if values[i].is_finite() => (Some(values[i]), bound.admits(values[i]), None),
                Ok(values) => (None, false, Some(format!("non-finite residual {}", values[i]))),
                Err(e) => (None, false, Some(e.clone())),
            };
            Record {
                name: task.group.record_name(m),
                suite: task.group.suite,
                seed: task.seed,
                n: task.n,
                kmax: config.kmax,
                residual,
                tolerance: bound.threshold(),
                comparison: bound.comparison().into(),
                passed,
                wall_ms,
                cause,
            }
        })
        .collect()
}

fn sizes(config: &SuiteConfig, suite: Suite) -> Vec<usize> {
    if suite == Suite::Convergence {
        let mut s = config.grid_sizes.clone();
        s.sort_unstable();
        s.dedup();
        s
    } else {
        vec![config.primary_size()]
    }
}

fn tasks(config: &SuiteConfig) -> Vec<Task> {
    let mut suites = config.suites.clone();
    suites.sort();
    suites.dedup();
    let mut out = Vec::new();
    for suite in suites {
        for group in GROUPS.iter().filter(|g| g.suite == suite) {
            let take = group.max_seeds.unwrap_or(usize::MAX);
            for n in sizes(config, suite) {
                for &seed in config.seeds.iter().take(take) {
                    out.push(Task { group, seed, n });
                }
            }
        }
    }
    out
}

fn flag(check: &str, ratio: Option<f64>, residual: f64) -> String {
    match ratio {
        None => "base",
        Some(_) if UNASSERTED_CHECKS.contains(&check) => "recorded",
        Some(r) if r <= 1e-2 => "spectral",
        Some(r) if r < 1.0 => "decreasing",
        Some(_) if residual < 1e-12 => "floor",
        Some(_) => "stalled",
    }
    .into()
}

/// Rows of the convergence table plus the ratio records and warnings derived
/// from the convergence measurements.
fn convergence_summary(config: &SuiteConfig, records: &[Record]) -> (Vec<ConvergenceRow>, Vec<Record>, Vec<String>) {
    let mut warnings = Vec::new();
    if !config.suites.contains(&Suite::Convergence) {
        warnings.push("no convergence data: the convergence suite was not run; table is empty".to_string());
        return (vec![], vec![], warnings);
    }
    let ns = sizes(config, Suite::Convergence);
    if ns.len() < 2 {
        warnings.push(format!("no convergence data: a single grid size ({}) gives no ratios; table is empty", ns[0]));
        return (vec![], vec![], warnings);
    }
    // check -> N -> worst residual
    let mut worst: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.suite == Suite::Convergence) {
        let check = r.name.trim_start_matches("convergence.").to_string();
        let slot = worst.entry(check).or_default().entry(r.n).or_insert(0.0);
        *slot = slot.max(r.residual.unwrap_or(f64::NAN));
    }
    let mut rows = Vec::new();
    for (check, by_n) in &worst {
        let mut prev: Option<f64> = None;
        for (&n, &residual) in by_n {
            let ratio = prev.filter(|p| *p > 0.0).map(|p| residual / p);
            rows.push(ConvergenceRow {
                check: check.clone(),
                n,
                residual,
                ratio,
                flag: flag(check, prev.map(|_| ratio.unwrap_or(f64::NAN)), residual),
            });
            prev = Some(residual);
        }
    }
    let mut extra = Vec::new();
    let (lo, hi) = (ns[0], *ns.last().unwrap());
    for &(check, limit) in SPECTRAL_RATIO_CHECKS {
        let bound = bound_for(config, Suite::Convergence, Bound::AtMost(limit));
        let by_n = worst.get(check);
        let ratio = by_n.and_then(|m| Some(m.get(&hi)? / m.get(&lo)?));
        let finite = ratio.filter(|r| r.is_finite());
        extra.push(Record {
            name: format!("convergence.{check}_ratio"),
            suite: Suite::Convergence,
            seed: config.seeds[0],
            n: hi,
            kmax: config.kmax,
            residual: finite,
            tolerance: bound.threshold(),
            comparison: bound.comparison().into(),
            passed: finite.is_some_and(|r| bound.admits(r)),
            wall_ms: 0.0,
            cause: match finite {
                Some(_) => None,
                None => Some(format!("no finite residuals for {check} at N={lo} and N={hi}")),
            },
        });
    }
    (rows, extra, warnings)
}

/// Runs every configured suite. Numerical failures become failed records.
pub fn run_suites(config: &SuiteConfig) -> SuiteReport {
    let start = Instant::now();
    let mut records: Vec<Record> = tasks(config).par_iter().flat_map(|t| execute(config, t)).collect();
    let (rows, extra, warnings) = convergence_summary(config, &records);
    records.extend(extra);
    SuiteReport::new(config.clone(), records, rows, warnings, start.elapsed().as_secs_f64())
}

/// Reruns the one record named by `selector`.
pub fn run_record(config: &SuiteConfig, selector: &RecordSelector) -> Result<SuiteReport, ConfigError> {
    let (group, _) = find_measure(&selector.name).ok_or_else(|| ConfigError::Invalid {
        field: "--record".into(),
        message: format!("unknown record `{}`", selector.name),
    })?;
    if selector.n < 8 || selector.n % 2 != 0 || 8 * config.kmax > selector.n {
        return Err(ConfigError::Invalid {
            field: "--record".into(),
            message: format!("N = {} is not usable with kmax = {}", selector.n, config.kmax),
        });
    }
    let start = Instant::now();
    let records: Vec<Record> = execute(
        config,
        &Task {
            group,
            seed: selector.seed,
            n: selector.n,
        },
    )
    .into_iter()
    .filter(|r| r.name == selector.name)
    .collect();
    Ok(SuiteReport::new(config.clone(), records, vec![], vec![], start.elapsed().as_secs_f64()))
}
