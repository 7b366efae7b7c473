use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{state_row, AccessCase, Backhaul, Server, StateMatrix, SERVERS, STATE_ROWS};
use crate::model::{NetworkConfig, Tier};
use crate::network::Network;
use crate::rate::rate_case1;

use super::metrics::{class_loads, node_densities, queue_metrics, ClassLoads, NodeState, QueueMetrics};
use super::rates::{rate_matrix, CaseRates, RateMatrix};

/// Everything needed to evaluate the node queues at any request intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueModel {
    pub cfg: NetworkConfig,
    pub states: StateMatrix,
    pub rates: RateMatrix,
    pub node_densities: [f64; SERVERS],
}

/// Steady rulers at one request intensity and the largest stable intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyRuler {
    pub varsigma: f64,
    /// Ruler per node type in [`Server`] order.
    pub rulers: [f64; SERVERS],
    /// Node type with the largest ruler.
    pub binding: Server,
    /// `varsigma*`; rulers are linear in `varsigma`, so this is exact.
    pub max_arrival_rate: f64,
    /// The same quantity located by bisection on the full load computation.
    pub max_arrival_rate_bisection: f64,
}

impl QueueModel {
    /// The cache-enabled network with analytic rates.
    pub fn cached(net: &Network) -> Result<Self> {
        let rates = CaseRates::analytic(net)?;
        Self::with_rates(net, &rates)
    }

    /// The cache-enabled network with externally supplied rates.
    pub fn with_rates(net: &Network, rates: &CaseRates) -> Result<Self> {
        let cfg = net.config().clone();
        Ok(Self {
            rates: rate_matrix(&cfg, net.states(), rates)?,
            states: net.states().clone(),
            node_densities: node_densities(&cfg, net.activity()),
            cfg,
        })
    }

    /// The network without any caching: users associate with the stronger of
    /// relay and BS, and every relay request is fetched over the backhaul.
    pub fn baseline(cfg: &NetworkConfig) -> Result<Self> {
        let cfg = NetworkConfig { alpha: 0.0, ..cfg.clone() };
        let net = Network::new(cfg.clone())?;
        let mut d = [[0.0; SERVERS]; STATE_ROWS];
        d[state_row(AccessCase::One, Backhaul::Needed)][Server::Relay.index()] =
            net.infrastructure_association(Tier::Relay)?;
        d[state_row(AccessCase::One, Backhaul::Free)][Server::Bs.index()] = net.infrastructure_association(Tier::Bs)?;
        let states = StateMatrix { d };
        let mut u = CaseRates { u: [[0.0; SERVERS]; 4] };
        for tier in [Tier::Relay, Tier::Bs] {
            u.u[AccessCase::One.index()][Server::from(tier).index()] = rate_case1(&net, tier)?.value;
        }
        Ok(Self {
            rates: rate_matrix(&cfg, &states, &u)?,
            states,
            node_densities: [0.0, cfg.lambda2, cfg.lambda3, 0.0],
            cfg,
        })
    }

    pub fn with_varsigma(&self, varsigma: f64) -> NetworkConfig {
        NetworkConfig { varsigma, ..self.cfg.clone() }
    }

    pub fn loads(&self, varsigma: f64) -> Result<ClassLoads> {
        class_loads(&self.with_varsigma(varsigma), &self.states, self.node_densities)
    }

    pub fn metrics(&self, varsigma: f64) -> Result<QueueMetrics> {
        queue_metrics(&self.loads(varsigma)?, &self.rates)
    }

    fn rulers(&self, varsigma: f64) -> Result<[f64; SERVERS]> {
        let m = self.metrics(varsigma)?;
        Ok(Server::ALL.map(|s| m.node(s).ruler))
    }

    /// Rulers at the configured intensity plus `varsigma*`.
    pub fn steady(&self) -> Result<SteadyRuler> {
        let varsigma = self.cfg.varsigma;
        let rulers = self.rulers(varsigma)?;
        let slope = self.rulers(1.0)?;
        let (binding, max_slope) = Server::ALL
            .iter()
            .map(|&s| (s, slope[s.index()]))
            .fold((Server::Bs, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(max_slope > 0.0) {
            return Err(Error::ModelInconsistency("no node type carries any traffic".into()));
        }
        let max_arrival_rate = 1.0 / max_slope;
        Ok(SteadyRuler {
            varsigma,
            rulers,
            binding,
            max_arrival_rate,
            max_arrival_rate_bisection: self.bisect_max_arrival_rate(max_arrival_rate)?,
        })
    }

    fn bisect_max_arrival_rate(&self, hint: f64) -> Result<f64> {
        let stable = |v: f64| -> Result<bool> {
            let m = self.metrics(v)?;
            Ok(m.nodes.iter().all(|n| n.state != NodeState::Unstable))
        };
        let mut lo = 0.0;
        let mut hi = hint.max(f64::MIN_POSITIVE);
        while stable(hi)? {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if stable(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Cached network against the no-caching baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub cached: SteadyRuler,
    pub baseline: SteadyRuler,
    /// `varsigma*_cached / varsigma*_baseline - 1`.
    pub throughput_gain: f64,
    /// Throughput per request of Case-1 D2D requests relative to baseline BS
    /// requests at the configured intensity, minus one; `None` if either
    /// queue is unstable or unused.
    pub d2d_over_baseline_bs: Option<f64>,
}

pub fn compare_with_baseline(net: &Network) -> Result<BaselineComparison> {
    let cached = QueueModel::cached(net)?;
    let baseline = QueueModel::baseline(net.config())?;
    let (cs, bs) = (cached.steady()?, baseline.steady()?);
    let varsigma = net.config().varsigma;
    let d2d = cached.metrics(varsigma)?;
    let base = baseline.metrics(varsigma)?;
    let d2d_thr = d2d.node(Server::D2d).class(AccessCase::One, Backhaul::Free).and_then(|c| c.throughput);
    let bs_thr = base.node(Server::Bs).class(AccessCase::One, Backhaul::Free).and_then(|c| c.throughput);
    Ok(BaselineComparison {
        throughput_gain: cs.max_arrival_rate / bs.max_arrival_rate - 1.0,
        d2d_over_baseline_bs: d2d_thr.zip(bs_thr).map(|(d, b)| d / b - 1.0),
        cached: cs,
        baseline: bs,
    })
}
