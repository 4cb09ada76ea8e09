//! Local monitor pipeline: flow ingestion, per-destination binning, top-M
//! record filtering, censored-series construction, local change-point tests,
//! and selection of the report sent to the collector.
//!
//! A monitor never stores more than the M largest counts per bin. Every other
//! destination is only known to lie below the bin's retention threshold,
//! which is exactly the information the censored rank test consumes.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::rank_test::{test_series, TestResult};
use crate::series::CensoredSeries;

/// One flow summary as exported by a network probe.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    /// Flow start, seconds.
    pub start_time: f64,
    /// Flow end, seconds (`>= start_time`).
    pub end_time: f64,
    /// Source address (opaque identifier).
    pub src: String,
    /// Destination address (opaque identifier).
    pub dst: String,
    /// Number of SYN packets carried by the flow.
    pub syn_count: u64,
}

/// Per-destination SYN counts over one observation window of `bins`
/// sub-intervals of `delta` seconds each.
///
/// Destinations with no traffic are simply absent; an absent destination is
/// an all-zero series.
#[derive(Debug, Clone)]
pub struct BinnedWindow {
    pub window_id: u64,
    pub bins: usize,
    pub delta: f64,
    counts: BTreeMap<String, Vec<u64>>,
}

impl BinnedWindow {
    /// Observed count series for `dst`, if any traffic was seen.
    pub fn dst_counts(&self, dst: &str) -> Option<&[u64]> {
        self.counts.get(dst).map(Vec::as_slice)
    }

    /// All destinations with traffic, in ascending order.
    pub fn counts(&self) -> impl Iterator<Item = (&str, &[u64])> {
        self.counts.iter().map(|(d, c)| (d.as_str(), c.as_slice()))
    }

    pub fn n_dsts(&self) -> usize {
        self.counts.len()
    }
}

/// Output of [`top_m_filter`]: what the monitor actually retains.
#[derive(Debug, Clone)]
pub struct TopMFilter {
    /// `top[t]`: up to M destinations with the largest nonzero counts in bin
    /// `t`, descending by count, ties broken by ascending destination.
    pub top: Vec<Vec<String>>,
    /// `thresholds[t]`: smallest retained count in bin `t` (0 when nothing
    /// was retained). Everything not retained is known to be `<= threshold`.
    pub thresholds: Vec<u64>,
}

impl TopMFilter {
    /// Whether `dst` was retained in bin `t`.
    pub fn retained(&self, t: usize, dst: &str) -> bool {
        self.top[t].iter().any(|d| d == dst)
    }

    /// Total number of retained scalars, at most `M * P`.
    pub fn stored_scalars(&self) -> usize {
        self.top.iter().map(Vec::len).sum()
    }
}

/// Detection parameters of one monitor.
#[derive(Debug, Clone, Copy)]
pub struct DetectorParams {
    /// M: counts retained per bin.
    pub top_m: usize,
    /// S: maximum number of censored series built per window.
    pub max_series: usize,
    /// d: number of series reported to the collector.
    pub report_d: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            top_m: 10,
            max_series: 60,
            report_d: 1,
        }
    }
}

/// A locally tested destination.
#[derive(Debug, Clone)]
pub struct LocalDetection {
    pub dst: String,
    pub series: CensoredSeries,
    pub result: TestResult,
}

/// One report entry on the monitor-to-collector wire.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub dst: String,
    pub series: CensoredSeries,
    pub p_value: f64,
}

/// The d series with the smallest local p-values a monitor ships per window.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub monitor_id: u32,
    pub window_id: u64,
    /// Sorted ascending by p-value, ties by destination.
    pub entries: Vec<ReportEntry>,
}

/// Accumulates per-destination SYN counts into the window's bins.
///
/// A flow contributes its whole SYN count to the bin containing its start
/// time (SYN packets open connections). Flows starting outside
/// `[window_start, window_start + bins * delta)` are ignored.
pub fn bin_flows(
    flows: &[FlowRecord],
    window_start: f64,
    delta: f64,
    bins: usize,
    window_id: u64,
) -> BinnedWindow {
    let mut counts: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    let window_len = bins as f64 * delta;
    for flow in flows {
        let offset = flow.start_time - window_start;
        if !(0.0..window_len).contains(&offset) {
            continue;
        }
        let bin = (offset / delta) as usize;
        if bin >= bins {
            // start sat right on the window edge after rounding
            continue;
        }
        match counts.get_mut(&flow.dst) {
            Some(series) => series[bin] += flow.syn_count,
            None => {
                let mut series = vec![0; bins];
                series[bin] = flow.syn_count;
                counts.insert(flow.dst.clone(), series);
            }
        }
    }
    BinnedWindow {
        window_id,
        bins,
        delta,
        counts,
    }
}

/// Record filtering: keeps, for every bin, the up-to-`m` destinations with
/// the largest nonzero counts and the bin's retention threshold.
pub fn top_m_filter(window: &BinnedWindow, m: usize) -> TopMFilter {
    let mut per_bin: Vec<Vec<(u64, &str)>> = vec![Vec::new(); window.bins];
    for (dst, counts) in window.counts() {
        for (t, &c) in counts.iter().enumerate() {
            if c > 0 {
                per_bin[t].push((c, dst));
            }
        }
    }

    let mut top = Vec::with_capacity(window.bins);
    let mut thresholds = Vec::with_capacity(window.bins);
    for mut candidates in per_bin {
        // descending count, ascending destination on ties
        let order = |a: &(u64, &str), b: &(u64, &str)| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1));
        if candidates.len() > m {
            candidates.select_nth_unstable_by(m - 1, order);
            candidates.truncate(m);
        }
        candidates.sort_unstable_by(order);
        thresholds.push(candidates.last().map_or(0, |&(c, _)| c));
        top.push(candidates.into_iter().map(|(_, d)| d.to_string()).collect());
    }
    TopMFilter { top, thresholds }
}

/// Builds censored series for up to `s` distinct destinations.
///
/// Destinations are taken in the order: rank-1 of bin 1, rank-1 of bin 2,
/// ..., rank-1 of bin P, rank-2 of bin 1, ... with duplicates skipped, until
/// `s` distinct destinations are collected or the retained lists are
/// exhausted. A retained bin contributes the exact count; an unretained bin
/// contributes the interval `[0, threshold]`.
pub fn build_censored_series(
    window: &BinnedWindow,
    filter: &TopMFilter,
    s: usize,
) -> Vec<(String, CensoredSeries)> {
    let mut selected: Vec<&str> = Vec::with_capacity(s);
    let max_rank = filter.top.iter().map(Vec::len).max().unwrap_or(0);
    'outer: for rank in 0..max_rank {
        for bin in &filter.top {
            if selected.len() == s {
                break 'outer;
            }
            if let Some(dst) = bin.get(rank) {
                if !selected.contains(&dst.as_str()) {
                    selected.push(dst);
                }
            }
        }
    }

    selected
        .into_iter()
        .map(|dst| {
            let counts = window
                .dst_counts(dst)
                .expect("retained destination has counts");
            let mut lower = Vec::with_capacity(window.bins);
            let mut upper = Vec::with_capacity(window.bins);
            for t in 0..window.bins {
                if filter.retained(t, dst) {
                    lower.push(counts[t]);
                    upper.push(counts[t]);
                } else {
                    lower.push(0);
                    upper.push(filter.thresholds[t]);
                }
            }
            let series = CensoredSeries::new(lower, upper).expect("bounds ordered by construction");
            (dst.to_string(), series)
        })
        .collect()
}

/// Full local processing of one window: filter, build series, test each.
/// Results come back unfiltered, in series-construction order.
pub fn local_detect(window: &BinnedWindow, m: usize, s: usize) -> Result<Vec<LocalDetection>> {
    let filter = top_m_filter(window, m);
    build_censored_series(window, &filter, s)
        .into_iter()
        .map(|(dst, series)| {
            let result = test_series(&series)?;
            Ok(LocalDetection {
                dst,
                series,
                result,
            })
        })
        .collect()
}

/// Keeps the `d` detections with the smallest p-values (ties broken by
/// ascending destination) as the monitor's report.
pub fn select_top_d(
    mut results: Vec<LocalDetection>,
    d: usize,
    monitor_id: u32,
    window_id: u64,
) -> MonitorReport {
    results.sort_by(|a, b| {
        a.result
            .p_value
            .total_cmp(&b.result.p_value)
            .then_with(|| a.dst.cmp(&b.dst))
    });
    results.truncate(d);
    MonitorReport {
        monitor_id,
        window_id,
        entries: results
            .into_iter()
            .map(|r| ReportEntry {
                dst: r.dst,
                series: r.series,
                p_value: r.result.p_value,
            })
            .collect(),
    }
}

/// Convenience composition of [`local_detect`] and [`select_top_d`].
pub fn process_window(
    window: &BinnedWindow,
    params: &DetectorParams,
    monitor_id: u32,
) -> Result<MonitorReport> {
    let detections = local_detect(window, params.top_m, params.max_series)?;
    Ok(select_top_d(
        detections,
        params.report_d,
        monitor_id,
        window.window_id,
    ))
}
