use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{row_state, AccessCase, Backhaul, D2DActivity, Server, StateMatrix, SERVERS, STATE_ROWS};
use crate::model::NetworkConfig;

use super::rates::RateMatrix;

/// Density [nodes/m²] of each node type that serves requests: active D2D
/// transmitters, relays, BSs and cache-enabled users (their own local cache).
pub fn node_densities(cfg: &NetworkConfig, activity: &D2DActivity) -> [f64; SERVERS] {
    [activity.lambda1_active, cfg.lambda2, cfg.lambda3, cfg.alpha * cfg.lambda0]
}

/// Per-class load at each node type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLoads {
    /// Mean number of users per node in each state.
    pub n: [[f64; SERVERS]; STATE_ROWS],
    /// Request arrival rate per node [requests/s].
    pub zeta: [[f64; SERVERS]; STATE_ROWS],
    /// Traffic demand per node [bits/s].
    pub sigma: [[f64; SERVERS]; STATE_ROWS],
    /// Mean request size [bits] (`S / varrho`).
    pub mean_request_bits: f64,
}

/// Loads for the request intensity `cfg.varsigma`; each user issues requests
/// at rate `lambda_3 varsigma / lambda_0`.
pub fn class_loads(cfg: &NetworkConfig, states: &StateMatrix, densities: [f64; SERVERS]) -> Result<ClassLoads> {
    cfg.validate()?;
    let mut n = [[0.0; SERVERS]; STATE_ROWS];
    for (row, out) in n.iter_mut().enumerate() {
        for server in Server::ALL {
            let j = server.index();
            let d = states.d[row][j];
            if d == 0.0 {
                continue;
            }
            if densities[j] <= 0.0 {
                return Err(Error::ModelInconsistency(format!(
                    "state {:?} has probability {d} but no {} nodes exist",
                    row_state(row),
                    server.name()
                )));
            }
            out[j] = cfg.lambda0 * d / densities[j];
        }
    }
    let per_user = cfg.lambda3 * cfg.varsigma / cfg.lambda0;
    let bits = cfg.content_size_s * cfg.varrho_inv;
    let zeta = n.map(|row| row.map(|v| v * per_user));
    let sigma = zeta.map(|row| row.map(|v| v * bits));
    Ok(ClassLoads { n, zeta, sigma, mean_request_bits: bits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeState {
    /// No traffic reaches this node type.
    Idle,
    Stable,
    /// Steady ruler >= 1; the queue grows without bound.
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub case: AccessCase,
    pub backhaul: Backhaul,
    pub zeta: f64,
    pub sigma: f64,
    pub service_rate: f64,
    /// Mean number of requests of this class; `None` when unstable.
    pub mean_requests: Option<f64>,
    /// Throughput per request [bits/s].
    pub throughput: Option<f64>,
    /// Mean sojourn time [s].
    pub delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub server: Server,
    pub state: NodeState,
    /// Steady ruler `sigma_j / sigma_c,j`.
    pub ruler: f64,
    pub sigma: f64,
    pub zeta: f64,
    /// Critical traffic demand [bits/s]; `None` when no class uses this node type.
    pub sigma_c: Option<f64>,
    pub mean_requests: Option<f64>,
    /// `sigma_c,j - sigma_j` [bits/s].
    pub throughput: Option<f64>,
    pub delay: Option<f64>,
    /// Classes with positive load, in state-row order.
    pub classes: Vec<ClassMetrics>,
}

impl NodeMetrics {
    pub fn class(&self, case: AccessCase, backhaul: Backhaul) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.case == case && c.backhaul == backhaul)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueMetrics {
    pub nodes: Vec<NodeMetrics>,
}

impl QueueMetrics {
    pub fn node(&self, server: Server) -> &NodeMetrics {
        &self.nodes[server.index()]
    }
}

/// Multiclass processor-sharing metrics at every node type.
pub fn queue_metrics(loads: &ClassLoads, rates: &RateMatrix) -> Result<QueueMetrics> {
    let mut nodes = Vec::with_capacity(SERVERS);
    for server in Server::ALL {
        let j = server.index();
        let mut sigma = 0.0;
        let mut zeta = 0.0;
        let mut ruler = 0.0;
        let mut users = 0.0;
        let mut users_over_rate = 0.0;
        for row in 0..STATE_ROWS {
            let n = loads.n[row][j];
            if n == 0.0 {
                continue;
            }
            let a = rates.a[row][j];
            if !(a > 0.0) {
                return Err(Error::ModelInconsistency(format!(
                    "class {:?} loads the {} queue but has service rate {a}",
                    row_state(row),
                    server.name()
                )));
            }
            sigma += loads.sigma[row][j];
            zeta += loads.zeta[row][j];
            ruler += loads.sigma[row][j] / a;
            users += n;
            users_over_rate += n / a;
        }
        // sigma_c is the load-weighted harmonic mean of the service rates and
        // does not depend on the request intensity.
        let sigma_c = (users > 0.0).then(|| users / users_over_rate);
        let state = if sigma == 0.0 {
            NodeState::Idle
        } else if ruler < 1.0 {
            NodeState::Stable
        } else {
            NodeState::Unstable
        };
        let stable = state != NodeState::Unstable;
        let classes = (0..STATE_ROWS)
            .filter(|&row| loads.n[row][j] > 0.0)
            .map(|row| {
                let (case, backhaul) = row_state(row);
                let a = rates.a[row][j];
                let s = loads.sigma[row][j];
                let z = loads.zeta[row][j];
                let free = (1.0 - ruler) * a;
                ClassMetrics {
                    case,
                    backhaul,
                    zeta: z,
                    sigma: s,
                    service_rate: a,
                    mean_requests: stable.then(|| s / free),
                    throughput: stable.then_some(free),
                    delay: stable.then(|| loads.mean_request_bits / free),
                }
            })
            .collect();
        let mean_requests = stable.then(|| ruler / (1.0 - ruler));
        nodes.push(NodeMetrics {
            server,
            state,
            ruler,
            sigma,
            zeta,
            sigma_c,
            mean_requests,
            throughput: if stable { sigma_c.map(|c| c - sigma) } else { None },
            delay: match (stable, zeta > 0.0) {
                (true, true) => mean_requests.map(|m| m / zeta),
                (true, false) => sigma_c.map(|c| loads.mean_request_bits / c),
                _ => None,
            },
            classes,
        });
    }
    Ok(QueueMetrics { nodes })
}
