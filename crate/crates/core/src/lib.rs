//! Distributed detection of SYN-flood targets from per-destination packet
//! counts.
//!
//! Local monitors keep only the largest per-bin counts (top-M record
//! filtering), turn each retained destination into a doubly censored time
//! series, test every series for a change-point with a rank test, and ship
//! the few most suspicious series to a collector. The collector sums the
//! censored bounds per destination across monitors and applies the same rank
//! test to the aggregate, which recovers attacks that no single monitor can
//! see. A Bonferroni baseline over local p-values ([`collector::btoprank_decide`])
//! is included for comparison, along with a topology/traffic simulator
//! ([`netsim`]) and a Monte-Carlo evaluation harness ([`eval`]).

pub mod collector;
pub mod error;
pub mod eval;
pub mod monitor;
pub mod netsim;
pub mod series;
pub mod wire;

pub use collector::{
    aggregate, btoprank_decide, btoprank_scores, global_detect, test_aggregated,
    AggregatedSeries, Alarm, Method,
};
pub use error::{Error, Result};
pub use eval::{
    auc, comms_accounting, default_alpha_grid, roc_curve, run_replications, CommsAccounting,
    DstScore, ReplicationOutcome, RocPoint,
};
pub use monitor::{
    bin_flows, build_censored_series, local_detect, process_window, select_top_d, top_m_filter,
    BinnedWindow, DetectorParams, FlowRecord, LocalDetection, MonitorReport, ReportEntry,
    TopMFilter,
};
pub use netsim::{
    compute_routes, gen_graph, gen_intensities, gen_traffic, place_monitors, Graph, GroundTruth,
    Routes, SimConfig, Topology,
};
pub use rank_test::{
    brownian_bridge_pvalue, compute_u, compute_u_bruteforce, normalize_y, statistic_w,
    test_series, TestResult,
};
pub use series::CensoredSeries;
