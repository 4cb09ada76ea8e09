//! Synthetic experiment generator: random topology, shortest-path routing,
//! monitor placement, heavy-tailed Poisson traffic and attack injection.
//!
//! One experiment suite fixes a connected random graph; every Monte-Carlo
//! replication then re-randomizes host placement, monitor placement and
//! traffic on that graph.

mod graph;
mod traffic;

pub use graph::{compute_routes, gen_graph, place_monitors, Graph, Routes};
pub use traffic::{
    gen_intensities, gen_traffic, pareto_quantile, GroundTruth, Topology,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All generation parameters of one synthetic experiment.
///
/// Defaults describe the reference scenario: a 15-node sparse graph, 1000
/// hosts, 15 monitors, 10100 active source-destination pairs of which 100
/// attack a single destination pinned to `target_node`, over a 60-bin window
/// with the rate change at bin 30.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Number of graph nodes.
    pub n_nodes: usize,
    /// Edge creation probability of the random graph.
    pub edge_prob: f64,
    /// Number of hosts (D), spread uniformly over the nodes.
    pub hosts: usize,
    /// Number of monitors (K), each sitting on a distinct edge.
    pub monitors: usize,
    /// Total number of active source-destination pairs (N).
    pub series: usize,
    /// Number of attacker pairs (N_a), all aimed at the attacked host.
    pub attackers: usize,
    /// Sub-intervals per observation window (P).
    pub bins: usize,
    /// Change-point bin (1-based): bins after `tau` carry attack traffic.
    pub tau: usize,
    /// Attack intensity multiplier applied after `tau`.
    pub eta: f64,
    /// Pareto shape of the per-pair intensity distribution.
    pub pareto_alpha: f64,
    /// Pareto scale of the per-pair intensity distribution.
    pub pareto_gamma: f64,
    /// Node hosting the attacked destination.
    pub target_node: usize,
    /// Master seed; everything downstream derives from it.
    pub seed: u64,
    /// Bin length in seconds.
    pub delta: f64,
    /// Optional edge (by endpoints) monitors must never occupy.
    pub exclude_edge: Option<(usize, usize)>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_nodes: 15,
            edge_prob: 0.15,
            hosts: 1000,
            monitors: 15,
            series: 10_100,
            attackers: 100,
            bins: 60,
            tau: 30,
            eta: 1.5,
            pareto_alpha: 2.5,
            pareto_gamma: 0.72,
            target_node: 7,
            seed: DEFAULT_SEED,
            delta: 1.0,
            exclude_edge: None,
        }
    }
}

/// Default master seed. Chosen so the default graph is connected, carries
/// enough edges (21) for 15 monitors plus one exclusion, and places node 7
/// at the edge of the network: a leaf behind the single access link 10-7,
/// so a monitor on that edge sees all traffic to the attacked host.
pub const DEFAULT_SEED: u64 = 62;

impl SimConfig {
    /// Parses a TOML key-value config; unknown keys are rejected by name.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::invalid("n_nodes must be >= 2"));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) {
            return Err(Error::invalid("edge_prob must lie in (0, 1]"));
        }
        if self.hosts < 2 {
            return Err(Error::invalid("hosts must be >= 2"));
        }
        if self.bins < 2 {
            return Err(Error::invalid("bins must be >= 2"));
        }
        if !(1..self.bins).contains(&self.tau) {
            return Err(Error::invalid("tau must satisfy 1 <= tau < bins"));
        }
        if self.eta <= 0.0 {
            return Err(Error::invalid("eta must be positive"));
        }
        if self.pareto_alpha <= 1.0 {
            return Err(Error::invalid("pareto_alpha must exceed 1"));
        }
        if self.pareto_gamma <= 0.0 {
            return Err(Error::invalid("pareto_gamma must be positive"));
        }
        if self.target_node >= self.n_nodes {
            return Err(Error::invalid("target_node must name an existing node"));
        }
        if self.attackers >= self.series {
            return Err(Error::invalid("attackers must be smaller than series"));
        }
        if self.attackers > self.hosts - 1 {
            return Err(Error::invalid("attackers must not exceed hosts - 1"));
        }
        if 41 * self.attackers > self.series {
            return Err(Error::invalid(
                "series too small for the attacker intensity rank band (need series >= 41 * attackers)",
            ));
        }
        let background = self.series - self.attackers;
        let capacity = (self.hosts - 1) * (self.hosts - 1);
        if background > capacity {
            return Err(Error::invalid(format!(
                "series = attackers + background pairs requires {background} distinct \
                 background pairs but only {capacity} exist"
            )));
        }
        if self.delta <= 0.0 {
            return Err(Error::invalid("delta must be positive"));
        }
        Ok(())
    }
}

/// Splitmix-style seed derivation: one independent stream per (seed, index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates one full replication: monitor placement and traffic from a
/// single seed stream derived from `(cfg.seed, replication)`. The graph and
/// routes are generated once per experiment and shared across replications;
/// this function is the one deterministic path used both by the in-memory
/// evaluation harness and by the file-writing simulate command.
pub fn gen_replication(
    cfg: &SimConfig,
    graph: &Graph,
    routes: &Routes,
    replication: u32,
) -> crate::error::Result<(Topology, Vec<Vec<crate::monitor::FlowRecord>>, GroundTruth)> {
    use rand::SeedableRng;
    let mut rng =
        rand_chacha::ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, replication as u64));
    let monitor_edges = place_monitors(graph, cfg.monitors, cfg.exclude_edge, &mut rng)?;
    let topology = Topology {
        graph: graph.clone(),
        routes: routes.clone(),
        monitor_edges,
    };
    let (streams, truth) = gen_traffic(cfg, &topology, &mut rng)?;
    Ok((topology, streams, truth))
}
