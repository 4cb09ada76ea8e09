//! Monte-Carlo evaluation harness: replication driver, ROC curves, AUC and
//! communication-volume accounting.

use rayon::prelude::*;

use crate::collector::{aggregate, btoprank_scores, test_aggregated};
pub use crate::collector::Method;
use crate::error::{Error, Result};
use crate::monitor::{bin_flows, process_window, DetectorParams, MonitorReport};
use crate::netsim::{compute_routes, gen_graph, gen_replication, SimConfig};

/// Score of one destination in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct DstScore {
    pub dst: String,
    /// Decision score on the p-value scale (Bonferroni-corrected for the
    /// baseline); alarms fire when it falls strictly below the level.
    pub p_value: f64,
    /// Ground-truth label.
    pub attacked: bool,
    /// False when the destination never reached the collector; such a score
    /// is a synthetic miss with p-value 1.
    pub tested: bool,
}

/// Everything measured in one replication.
#[derive(Debug, Clone)]
pub struct ReplicationOutcome {
    pub replication: u32,
    pub dtoprank: Vec<DstScore>,
    pub btoprank: Vec<DstScore>,
    pub comms: CommsAccounting,
}

/// One point of a ROC curve at decision level `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub alpha: f64,
    /// Mean over replications of (false alarms / negatives tested).
    pub false_alarm_rate: f64,
    /// Mean over replications of (detections / ground-truth positives).
    pub detection_rate: f64,
}

/// Transmission volume of one window, in scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommsAccounting {
    /// Report entries across all monitors.
    pub report_entries: u64,
    /// Scalars shipped by the distributed scheme: `entries * 2P`.
    pub dtoprank_scalars: u64,
    /// Flow records a centralized collector would have had to receive.
    pub flows: u64,
    /// Scalars of the centralized scheme: five per flow (two timestamps,
    /// two addresses, one count).
    pub centralized_scalars: u64,
}

impl CommsAccounting {
    /// How many times fewer scalars the distributed scheme transmits.
    pub fn reduction_ratio(&self) -> f64 {
        self.centralized_scalars as f64 / self.dtoprank_scalars as f64
    }
}

/// Counts the scalars each scheme ships to the collector for one window.
pub fn comms_accounting(
    reports: &[MonitorReport],
    total_flows: u64,
    bins: usize,
) -> CommsAccounting {
    let report_entries: u64 = reports.iter().map(|r| r.entries.len() as u64).sum();
    CommsAccounting {
        report_entries,
        dtoprank_scalars: report_entries * 2 * bins as u64,
        flows: total_flows,
        centralized_scalars: total_flows * 5,
    }
}

/// The default decision-level grid: 60 log-spaced points in `[1e-6, 0.5]`.
pub fn default_alpha_grid() -> Vec<f64> {
    let (lo, hi) = (1e-6f64.log10(), 0.5f64.log10());
    (0..60)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / 59.0))
        .collect()
}

/// Runs `reps` independent replications of the synthetic experiment.
///
/// The graph is generated once from the config seed and shared; host
/// placement, monitor placement, intensities and traffic are re-randomized
/// per replication from a derived seed, so results are reproducible and
/// independent of worker scheduling. `jobs` caps the worker threads (0 or
/// `None` uses the rayon default).
pub fn run_replications(
    cfg: &SimConfig,
    detector: &DetectorParams,
    methods: &[Method],
    reps: u32,
    jobs: Option<usize>,
) -> Result<Vec<ReplicationOutcome>> {
    if reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    cfg.validate()?;
    let graph = gen_graph(cfg.n_nodes, cfg.edge_prob, cfg.seed)?;
    let routes = compute_routes(&graph);

    let run_one = |rep: u32| -> Result<ReplicationOutcome> {
        let (_, streams, truth) = gen_replication(cfg, &graph, &routes, rep)?;

        let mut reports = Vec::with_capacity(streams.len());
        for (k, stream) in streams.iter().enumerate() {
            let window = bin_flows(stream, 0.0, cfg.delta, cfg.bins, 0);
            reports.push(process_window(&window, detector, k as u32)?);
        }
        let total_flows: u64 = streams.iter().map(|s| s.len() as u64).sum();
        let comms = comms_accounting(&reports, total_flows, cfg.bins);

        let mut outcome = ReplicationOutcome {
            replication: rep,
            dtoprank: Vec::new(),
            btoprank: Vec::new(),
            comms,
        };
        for method in methods {
            let mut scores: Vec<DstScore> = match method {
                Method::DTopRank => {
                    let agg = aggregate(&reports)?;
                    test_aggregated(&agg)?
                        .into_iter()
                        .map(|(dst, result)| DstScore {
                            attacked: dst == truth.attacked_dst,
                            dst,
                            p_value: result.p_value,
                            tested: true,
                        })
                        .collect()
                }
                Method::BTopRank => btoprank_scores(&reports, cfg.monitors as u32)?
                    .into_iter()
                    .map(|(dst, score)| DstScore {
                        attacked: dst == truth.attacked_dst,
                        dst,
                        p_value: score.p_value,
                        tested: true,
                    })
                    .collect(),
            };
            if !scores.iter().any(|s| s.attacked) {
                scores.push(DstScore {
                    dst: truth.attacked_dst.clone(),
                    p_value: 1.0,
                    attacked: true,
                    tested: false,
                });
            }
            match method {
                Method::DTopRank => outcome.dtoprank = scores,
                Method::BTopRank => outcome.btoprank = scores,
            }
        }
        Ok(outcome)
    };

    let run_all = || (0..reps).into_par_iter().map(run_one).collect();
    match jobs {
        Some(j) if j > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::invalid(format!("worker pool: {e}")))?
            .install(run_all),
        _ => run_all(),
    }
}

/// Averaged ROC curve over per-replication score sets.
///
/// Rates are computed over the destinations actually tested at the
/// collector, positives and negatives alike: an untested destination can
/// never alarm at any level, so counting it would deflate false-alarm rates
/// and make detection incomparable to them (at `eta = 1` the two must agree
/// in expectation). Per replication and level, the false alarm rate is the
/// alarmed fraction of tested negatives and the detection rate the alarmed
/// fraction of tested positives; replications missing one of the two groups
/// are skipped in that average. Alarms use the strict `p < alpha` rule of
/// the collector.
pub fn roc_curve(replications: &[Vec<DstScore>], alpha_grid: &[f64]) -> Result<Vec<RocPoint>> {
    let tested = |s: &&DstScore| s.tested;
    let has_positive = replications.iter().flatten().filter(tested).any(|s| s.attacked);
    let has_negative = replications.iter().flatten().filter(tested).any(|s| !s.attacked);
    if !has_positive || !has_negative {
        return Err(Error::invalid(
            "ROC needs at least one tested positive and one tested negative",
        ));
    }
    let mut curve = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let (mut fa_sum, mut fa_reps) = (0.0, 0u32);
        let (mut det_sum, mut det_reps) = (0.0, 0u32);
        for rep in replications {
            let negatives = rep.iter().filter(|s| s.tested && !s.attacked).count();
            if negatives > 0 {
                let fp = rep
                    .iter()
                    .filter(|s| s.tested && !s.attacked && s.p_value < alpha)
                    .count();
                fa_sum += fp as f64 / negatives as f64;
                fa_reps += 1;
            }
            let positives = rep.iter().filter(|s| s.tested && s.attacked).count();
            if positives > 0 {
                let tp = rep
                    .iter()
                    .filter(|s| s.tested && s.attacked && s.p_value < alpha)
                    .count();
                det_sum += tp as f64 / positives as f64;
                det_reps += 1;
            }
        }
        curve.push(RocPoint {
            alpha,
            false_alarm_rate: if fa_reps > 0 { fa_sum / fa_reps as f64 } else { 0.0 },
            detection_rate: if det_reps > 0 { det_sum / det_reps as f64 } else { 0.0 },
        });
    }
    Ok(curve)
}

/// Area under the ROC polyline by the trapezoid rule, with the curve closed
/// at `(0, 0)` and `(1, 1)`.
pub fn auc(curve: &[RocPoint]) -> f64 {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .map(|p| (p.false_alarm_rate, p.detection_rate))
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("rates are finite"));
    let mut area = 0.0;
    let (mut px, mut py) = (0.0, 0.0);
    for (x, y) in pts.into_iter().chain(std::iter::once((1.0, 1.0))) {
        area += (x - px) * (y + py) / 2.0;
        (px, py) = (x, y);
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(dst: &str, p: f64, attacked: bool) -> DstScore {
        DstScore {
            dst: dst.into(),
            p_value: p,
            attacked,
            tested: true,
        }
    }

    #[test]
    fn perfect_scores_give_auc_one() {
        let rep = vec![score("pos", 0.0, true), score("neg", 1.0, false)];
        let curve = roc_curve(&[rep], &default_alpha_grid()).unwrap();
        assert!((auc(&curve) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_scores_give_auc_half() {
        use rand::Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let rep: Vec<DstScore> = (0..10_000)
            .map(|i| score(&format!("d{i}"), rng.random(), i % 2 == 0))
            .collect();
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let curve = roc_curve(&[rep], &grid).unwrap();
        let a = auc(&curve);
        assert!((a - 0.5).abs() < 0.05, "auc = {a}");
    }

    #[test]
    fn curve_is_monotone_in_alpha() {
        use rand::Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let reps: Vec<Vec<DstScore>> = (0..5)
            .map(|_| {
                (0..50)
                    .map(|i| score(&format!("d{i}"), rng.random(), i == 0))
                    .collect()
            })
            .collect();
        let curve = roc_curve(&reps, &default_alpha_grid()).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].false_alarm_rate >= w[0].false_alarm_rate);
            assert!(w[1].detection_rate >= w[0].detection_rate);
        }
    }

    #[test]
    fn degenerate_labels_rejected() {
        let only_pos = vec![vec![score("a", 0.1, true)]];
        assert!(roc_curve(&only_pos, &[0.05]).is_err());
        let only_neg = vec![vec![score("a", 0.1, false)]];
        assert!(roc_curve(&only_neg, &[0.05]).is_err());
    }

    #[test]
    fn untested_records_leave_the_denominators() {
        let missed = DstScore {
            dst: "pos".into(),
            p_value: 1.0,
            attacked: true,
            tested: false,
        };
        // rep 1: positive missed entirely; rep 2: tested positive detected
        let reps = vec![
            vec![missed, score("neg", 0.9, false)],
            vec![score("pos", 0.001, true), score("neg", 0.9, false)],
        ];
        let curve = roc_curve(&reps, &[0.05]).unwrap();
        assert_eq!(curve[0].detection_rate, 1.0);
        assert_eq!(curve[0].false_alarm_rate, 0.0);
    }

    #[test]
    fn auc_includes_endpoints() {
        // single mid point: area of the two trapezoids around it
        let curve = vec![RocPoint {
            alpha: 0.05,
            false_alarm_rate: 0.5,
            detection_rate: 0.5,
        }];
        assert!((auc(&curve) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn alpha_grid_shape() {
        let grid = default_alpha_grid();
        assert_eq!(grid.len(), 60);
        assert!((grid[0] - 1e-6).abs() < 1e-12);
        assert!((grid[59] - 0.5).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn comms_accounting_examples() {
        use crate::monitor::{MonitorReport, ReportEntry};
        use crate::series::CensoredSeries;
        let reports: Vec<MonitorReport> = (0..15)
            .map(|k| MonitorReport {
                monitor_id: k,
                window_id: 0,
                entries: vec![ReportEntry {
                    dst: "a".into(),
                    series: CensoredSeries::uncensored(vec![1; 60]),
                    p_value: 0.5,
                }],
            })
            .collect();
        let acc = comms_accounting(&reports, 34_000, 60);
        assert_eq!(acc.dtoprank_scalars, 1800);
        assert_eq!(acc.centralized_scalars, 170_000);
        assert!((acc.reduction_ratio() - 94.44).abs() < 0.01);

        let acc = comms_accounting(&[], 0, 60);
        assert_eq!(acc.dtoprank_scalars, 0);
    }

    fn tiny_config() -> SimConfig {
        SimConfig {
            hosts: 50,
            series: 1010,
            attackers: 10,
            monitors: 5,
            seed: 40,
            ..SimConfig::default()
        }
    }

    #[test]
    fn replications_are_deterministic() {
        let cfg = tiny_config();
        let det = DetectorParams::default();
        let methods = [Method::DTopRank, Method::BTopRank];
        let a = run_replications(&cfg, &det, &methods, 2, Some(2)).unwrap();
        let b = run_replications(&cfg, &det, &methods, 2, Some(1)).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.dtoprank, y.dtoprank);
            assert_eq!(x.btoprank, y.btoprank);
            assert_eq!(x.comms, y.comms);
        }
    }

    #[test]
    fn each_replication_has_one_positive() {
        let cfg = tiny_config();
        let det = DetectorParams::default();
        let outcomes =
            run_replications(&cfg, &det, &[Method::DTopRank], 3, None).unwrap();
        for o in &outcomes {
            assert_eq!(o.dtoprank.iter().filter(|s| s.attacked).count(), 1);
        }
    }
}
