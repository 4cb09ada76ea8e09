//! Collector: per-window aggregation of monitor reports and the global
//! detection decision.
//!
//! For every destination present in at least one report, the collector sums
//! the lower bounds and the upper bounds elementwise across the reporting
//! monitors and runs the censored rank test on the summed bounds. Monitors
//! that did not report a destination contribute nothing to its aggregate.
//!
//! The Bonferroni baseline skips aggregation entirely: a destination is
//! flagged when `K * min_k p_k` falls below the level, with `K` the total
//! monitor count.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::monitor::MonitorReport;
use crate::rank_test::{test_series, TestResult};
use crate::series::CensoredSeries;

/// The two collector-side decision schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Aggregate censored bounds across monitors, then test the sum.
    DTopRank,
    /// Bonferroni-correct the smallest local p-value.
    BTopRank,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::DTopRank => "dtoprank",
            Method::BTopRank => "btoprank",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dtoprank" => Ok(Method::DTopRank),
            "btoprank" => Ok(Method::BTopRank),
            other => Err(Error::invalid(format!(
                "unknown method {other:?}, expected dtoprank or btoprank"
            ))),
        }
    }
}

/// Sum of censored bounds for one destination plus the monitors it came from.
#[derive(Debug, Clone)]
pub struct AggregatedSeries {
    pub series: CensoredSeries,
    /// Monitor ids that reported this destination, ascending.
    pub monitors: Vec<u32>,
}

/// A destination flagged as attacked in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Alarm {
    pub dst: String,
    pub window_id: u64,
    pub p_value: f64,
    /// Estimated change-point bin, 1-based.
    pub change_point: usize,
    pub contributing_monitors: Vec<u32>,
}

/// Checks that all reports target the same window and series length, and
/// returns that length.
pub fn check_uniform_reports(reports: &[MonitorReport]) -> Result<usize> {
    let mut bins: Option<usize> = None;
    let mut window: Option<u64> = None;
    for report in reports {
        match window {
            None => window = Some(report.window_id),
            Some(w) if w != report.window_id => {
                return Err(Error::protocol(format!(
                    "reports mix windows {w} and {}",
                    report.window_id
                )))
            }
            _ => {}
        }
        for entry in &report.entries {
            match bins {
                None => bins = Some(entry.series.len()),
                Some(p) if p != entry.series.len() => {
                    return Err(Error::protocol(format!(
                        "reports mix series lengths {p} and {} (dst {})",
                        entry.series.len(),
                        entry.dst
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(bins.unwrap_or(0))
}

/// Sums censored bounds per destination over exactly the monitors that
/// reported it. Fails on mixed window ids or series lengths.
pub fn aggregate(reports: &[MonitorReport]) -> Result<BTreeMap<String, AggregatedSeries>> {
    check_uniform_reports(reports)?;
    let mut out: BTreeMap<String, AggregatedSeries> = BTreeMap::new();
    for report in reports {
        for entry in &report.entries {
            match out.get_mut(&entry.dst) {
                None => {
                    out.insert(
                        entry.dst.clone(),
                        AggregatedSeries {
                            series: entry.series.clone(),
                            monitors: vec![report.monitor_id],
                        },
                    );
                }
                Some(agg) => {
                    agg.series.add_assign(&entry.series)?;
                    agg.monitors.push(report.monitor_id);
                }
            }
        }
    }
    for agg in out.values_mut() {
        agg.monitors.sort_unstable();
    }
    Ok(out)
}

/// Runs the rank test on every aggregated series.
pub fn test_aggregated(
    aggregated: &BTreeMap<String, AggregatedSeries>,
) -> Result<BTreeMap<String, TestResult>> {
    aggregated
        .iter()
        .map(|(dst, agg)| Ok((dst.clone(), test_series(&agg.series)?)))
        .collect()
}

/// Global decision: alarm on every aggregated destination whose p-value is
/// strictly below `alpha`.
pub fn global_detect(
    aggregated: &BTreeMap<String, AggregatedSeries>,
    window_id: u64,
    alpha: f64,
) -> Result<Vec<Alarm>> {
    check_alpha(alpha)?;
    let mut alarms = Vec::new();
    for (dst, agg) in aggregated {
        let result = test_series(&agg.series)?;
        if result.p_value < alpha {
            alarms.push(Alarm {
                dst: dst.clone(),
                window_id,
                p_value: result.p_value,
                change_point: result.change_point,
                contributing_monitors: agg.monitors.clone(),
            });
        }
    }
    Ok(alarms)
}

/// Bonferroni-corrected score of one destination under the baseline scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct BonferroniScore {
    /// `min(1, K * min_k p_k)`.
    pub p_value: f64,
    /// Monitor holding the minimal local p-value (lowest id on ties).
    pub best_monitor: u32,
    /// Local change-point estimate of that monitor's series.
    pub change_point: usize,
}

/// Per-destination Bonferroni scores over the `k_total` monitors.
///
/// The correction always uses the full monitor count, not the number of
/// monitors that happened to report the destination.
pub fn btoprank_scores(
    reports: &[MonitorReport],
    k_total: u32,
) -> Result<BTreeMap<String, BonferroniScore>> {
    if k_total < 1 {
        return Err(Error::invalid("monitor count K must be >= 1"));
    }
    check_uniform_reports(reports)?;
    let mut best: BTreeMap<String, (f64, u32, &CensoredSeries)> = BTreeMap::new();
    for report in reports {
        for entry in &report.entries {
            let candidate = (entry.p_value, report.monitor_id, &entry.series);
            match best.get_mut(&entry.dst) {
                None => {
                    best.insert(entry.dst.clone(), candidate);
                }
                Some(cur) => {
                    if (candidate.0, candidate.1) < (cur.0, cur.1) {
                        *cur = candidate;
                    }
                }
            }
        }
    }
    best.into_iter()
        .map(|(dst, (p, monitor, series))| {
            let result = test_series(series)?;
            Ok((
                dst,
                BonferroniScore {
                    p_value: (k_total as f64 * p).min(1.0),
                    best_monitor: monitor,
                    change_point: result.change_point,
                },
            ))
        })
        .collect()
}

/// Baseline decision: alarm iff `K * min_k p_k < alpha`.
pub fn btoprank_decide(
    reports: &[MonitorReport],
    alpha: f64,
    k_total: u32,
) -> Result<Vec<Alarm>> {
    check_alpha(alpha)?;
    let window_id = reports.first().map_or(0, |r| r.window_id);
    let scores = btoprank_scores(reports, k_total)?;
    Ok(scores
        .into_iter()
        .filter(|(_, s)| s.p_value < alpha)
        .map(|(dst, s)| Alarm {
            dst,
            window_id,
            p_value: s.p_value,
            change_point: s.change_point,
            contributing_monitors: vec![s.best_monitor],
        })
        .collect())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "false alarm level must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}
