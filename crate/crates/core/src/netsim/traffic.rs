//! Heavy-tailed Poisson traffic generation and attack injection.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::monitor::FlowRecord;
use crate::netsim::graph::{Graph, Routes};
use crate::netsim::SimConfig;

/// A graph with routes and monitor positions: everything traffic needs to
/// know about the network.
#[derive(Debug, Clone)]
pub struct Topology {
    pub graph: Graph,
    pub routes: Routes,
    /// Edge index hosting monitor `k`, ascending.
    pub monitor_edges: Vec<usize>,
}

/// What actually happened in one generated replication.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// The attacked destination host.
    pub attacked_dst: String,
    /// The attacker source hosts, ascending.
    pub attacker_srcs: Vec<String>,
    /// Change-point bin (1-based); bins after it carry attack traffic.
    pub change_bin: usize,
    /// Node each host was placed on (`host_nodes[h - 1]` for host `h`).
    pub host_nodes: Vec<usize>,
}

/// Quantile function of the Pareto law with density
/// `gamma * alpha / (1 + gamma x)^(1 + alpha)` on `x > 0`.
pub fn pareto_quantile(u: f64, alpha: f64, gamma: f64) -> f64 {
    ((1.0 - u).powf(-1.0 / alpha) - 1.0) / gamma
}

/// Draws `n` i.i.d. Pareto intensities and returns them sorted descending.
pub fn gen_intensities(n: usize, alpha: f64, gamma: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut mu: Vec<f64> = (0..n)
        .map(|_| pareto_quantile(rng.random::<f64>(), alpha, gamma))
        .collect();
    mu.sort_unstable_by(|a, b| b.total_cmp(a));
    mu
}

fn host_label(index: usize, width: usize) -> String {
    format!("h{index:0width$}")
}

/// Generates one replication of traffic: per-monitor flow streams plus the
/// ground truth.
///
/// Hosts are placed uniformly on the nodes, with the attacked host pinned to
/// `target_node`. Attacker pairs draw their intensities from the rank band
/// `[40 * attackers, 41 * attackers)` of the sorted intensity sequence (the
/// bulk of the distribution, around its 0.4 upper quantile); the remaining
/// intensities go to uniformly sampled distinct background pairs. Every pair
/// emits, per bin, a Poisson count as one flow record delivered to every
/// monitor whose edge lies on the pair's route; attacker pairs switch from
/// rate `theta` to `eta * theta` after bin `tau`.
pub fn gen_traffic(
    cfg: &SimConfig,
    topology: &Topology,
    rng: &mut impl Rng,
) -> Result<(Vec<Vec<FlowRecord>>, GroundTruth)> {
    cfg.validate()?;
    if topology.monitor_edges.iter().any(|&e| e >= topology.graph.edges().len()) {
        return Err(Error::invalid("monitor edge index out of range"));
    }
    if cfg.target_node >= topology.graph.n() {
        return Err(Error::invalid("target node missing from topology"));
    }

    let width = cfg.hosts.to_string().len();
    let n_nodes = topology.graph.n();

    // Hosts 1..=D on uniform nodes; the attacked host 1 is pinned.
    let mut host_nodes: Vec<usize> = (0..cfg.hosts)
        .map(|_| rng.random_range(0..n_nodes))
        .collect();
    host_nodes[0] = cfg.target_node;
    let attacked = host_label(1, width);

    // Attacker sources: a random subset of the other hosts.
    let mut attacker_hosts: Vec<usize> = sample(rng, cfg.hosts - 1, cfg.attackers)
        .iter()
        .map(|i| i + 2) // hosts 2..=D
        .collect();
    attacker_hosts.sort_unstable();

    let mu = gen_intensities(cfg.series, cfg.pareto_alpha, cfg.pareto_gamma, rng);
    let band_start = 40 * cfg.attackers;
    let attacker_theta = &mu[band_start..band_start + cfg.attackers];

    // Background pairs: distinct (src, dst), src != dst, dst != attacked host.
    let n_background = cfg.series - cfg.attackers;
    let mut background: Vec<(usize, usize)> = Vec::with_capacity(n_background);
    let mut used: HashSet<(usize, usize)> = HashSet::with_capacity(n_background);
    while background.len() < n_background {
        let src = rng.random_range(1..=cfg.hosts);
        let dst = rng.random_range(2..=cfg.hosts);
        if src == dst {
            continue;
        }
        if used.insert((src, dst)) {
            background.push((src, dst));
        }
    }
    let mut background_theta: Vec<f64> = mu[..band_start]
        .iter()
        .chain(&mu[band_start + cfg.attackers..])
        .copied()
        .collect();
    background_theta.shuffle(rng);

    // Monitor lookup per edge.
    let mut monitor_of_edge: Vec<Option<usize>> = vec![None; topology.graph.edges().len()];
    for (k, &e) in topology.monitor_edges.iter().enumerate() {
        monitor_of_edge[e] = Some(k);
    }

    // Attacker pairs first, then background pairs.
    struct PairSpec {
        src: usize,
        dst: usize,
        theta_pre: f64,
        theta_post: f64,
    }
    let pairs = attacker_hosts
        .iter()
        .enumerate()
        .map(|(i, &src)| PairSpec {
            src,
            dst: 1,
            theta_pre: attacker_theta[i],
            theta_post: cfg.eta * attacker_theta[i],
        })
        .chain(
            background
                .iter()
                .enumerate()
                .map(|(i, &(src, dst))| PairSpec {
                    src,
                    dst,
                    theta_pre: background_theta[i],
                    theta_post: background_theta[i],
                }),
        );

    let mut streams: Vec<Vec<FlowRecord>> = vec![Vec::new(); topology.monitor_edges.len()];
    for spec in pairs {
        let route = &topology.routes[host_nodes[spec.src - 1]][host_nodes[spec.dst - 1]];
        let watchers: Vec<usize> = route.iter().filter_map(|&e| monitor_of_edge[e]).collect();
        if watchers.is_empty() || spec.theta_pre <= 0.0 {
            continue;
        }
        let pre = Poisson::new(spec.theta_pre)
            .map_err(|e| Error::Generation(format!("poisson({}): {e}", spec.theta_pre)))?;
        let post = Poisson::new(spec.theta_post)
            .map_err(|e| Error::Generation(format!("poisson({}): {e}", spec.theta_post)))?;
        let src_label = host_label(spec.src, width);
        let dst_label = host_label(spec.dst, width);
        for t in 0..cfg.bins {
            let count = if t < cfg.tau {
                pre.sample(rng)
            } else {
                post.sample(rng)
            } as u64;
            if count == 0 {
                continue;
            }
            let start = (t as f64 + rng.random::<f64>()) * cfg.delta;
            let flow = FlowRecord {
                start_time: start,
                end_time: start,
                src: src_label.clone(),
                dst: dst_label.clone(),
                syn_count: count,
            };
            for &k in &watchers {
                streams[k].push(flow.clone());
            }
        }
    }

    Ok((
        streams,
        GroundTruth {
            attacked_dst: attacked,
            attacker_srcs: attacker_hosts
                .iter()
                .map(|&h| host_label(h, width))
                .collect(),
            change_bin: cfg.tau,
            host_nodes,
        },
    ))
}
