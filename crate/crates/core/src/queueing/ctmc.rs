use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng, Execution};
use crate::geometry::{Server, STATE_ROWS};

use super::metrics::ClassLoads;
use super::rates::RateMatrix;

/// Reporting options for [`CtmcQueue::simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtmcOptions {
    /// Sampling period of the slotted occupancy record [s].
    pub slot: f64,
    /// Initial period excluded from averages [s].
    pub warmup: f64,
    /// Keep the per-slot state vectors (otherwise only averages are kept).
    pub record_slots: bool,
}

impl Default for CtmcOptions {
    fn default() -> Self {
        Self { slot: 0.2, warmup: 0.0, record_slots: true }
    }
}

/// Sampled path of the per-class request counts at one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtmcTrace {
    pub server: Server,
    pub seed: u64,
    pub stream: u64,
    pub horizon: f64,
    pub slot: f64,
    /// State at each slot boundary `k * slot` (`k >= 1`), when recorded.
    pub slots: Vec<[u32; STATE_ROWS]>,
    /// Mean total occupancy over the slot samples after warm-up.
    pub slot_mean: f64,
    /// Exact time-average of each class count after warm-up.
    pub time_average: [f64; STATE_ROWS],
    pub time_average_total: f64,
    pub jumps: u64,
    pub final_state: [u32; STATE_ROWS],
}

/// One event of the generator: class `class` gains (`+1`) or loses (`-1`) a
/// request at `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub class: usize,
    pub delta: i8,
    pub rate: f64,
}

/// Multiclass processor-sharing queue of one node type as a CTMC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtmcQueue {
    pub server: Server,
    /// Request arrival rate per class [1/s].
    pub arrival: [f64; STATE_ROWS],
    /// Completion rate of a class when served alone [1/s].
    pub service: [f64; STATE_ROWS],
}

impl CtmcQueue {
    pub fn new(loads: &ClassLoads, rates: &RateMatrix, server: Server) -> Result<Self> {
        let j = server.index();
        let mut arrival = [0.0; STATE_ROWS];
        let mut service = [0.0; STATE_ROWS];
        for row in 0..STATE_ROWS {
            arrival[row] = loads.zeta[row][j];
            service[row] = rates.a[row][j] / loads.mean_request_bits;
            if arrival[row] > 0.0 && !(service[row] > 0.0) {
                return Err(Error::ModelInconsistency(format!(
                    "class {row} arrives at the {} queue but is never served",
                    server.name()
                )));
            }
        }
        Ok(Self { server, arrival, service })
    }

    /// Offered load `sum_i arrival_i / service_i` (the steady ruler).
    pub fn load(&self) -> f64 {
        self.arrival.iter().zip(&self.service).filter(|(a, _)| **a > 0.0).map(|(a, s)| a / s).sum()
    }

    /// Outgoing transitions from `state`: arrivals at `arrival_i`, departures
    /// at `service_i * x_i / sum(x)`.
    pub fn transitions(&self, state: &[u32; STATE_ROWS]) -> Vec<Transition> {
        let total: u32 = state.iter().sum();
        let mut out = Vec::new();
        for i in 0..STATE_ROWS {
            if self.arrival[i] > 0.0 {
                out.push(Transition { class: i, delta: 1, rate: self.arrival[i] });
            }
        }
        for (i, &n) in state.iter().enumerate() {
            if n > 0 {
                let rate = self.service[i] * n as f64 / total as f64;
                out.push(Transition { class: i, delta: -1, rate });
            }
        }
        out
    }

    /// Exact-jump simulation from the empty state over `[0, horizon]`.
    pub fn simulate(&self, horizon: f64, seed: u64, stream: u64, opts: &CtmcOptions) -> Result<CtmcTrace> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::domain(format!("simulation horizon must be > 0, got {horizon}")));
        }
        if !(opts.slot > 0.0) || !(opts.warmup >= 0.0) || opts.warmup >= horizon {
            return Err(Error::domain("slot must be > 0 and warm-up must lie in [0, horizon)"));
        }
        let mut rng = stream_rng(seed, stream);
        let mut state = [0u32; STATE_ROWS];
        let mut area = [0.0; STATE_ROWS];
        let mut slots = Vec::new();
        let mut slot_sum = 0.0;
        let mut slot_count = 0u64;
        let mut slot_index = 1u64;
        let mut next_slot = opts.slot;
        let mut t = 0.0;
        let mut jumps = 0u64;

        loop {
            let transitions = self.transitions(&state);
            let rate: f64 = transitions.iter().map(|tr| tr.rate).sum();
            let dt = if rate > 0.0 {
                let e: f64 = Exp1.sample(&mut rng);
                e / rate
            } else {
                f64::INFINITY
            };
            let t_next = (t + dt).min(horizon);

            // the state is constant on [t, t_next)
            let from = t.max(opts.warmup);
            if t_next > from {
                for (acc, &x) in area.iter_mut().zip(&state) {
                    *acc += x as f64 * (t_next - from);
                }
            }
            while next_slot <= t_next && next_slot <= horizon {
                if next_slot >= opts.warmup {
                    slot_sum += state.iter().sum::<u32>() as f64;
                    slot_count += 1;
                }
                if opts.record_slots {
                    slots.push(state);
                }
                slot_index += 1;
                next_slot = slot_index as f64 * opts.slot;
            }
            if t + dt >= horizon {
                break;
            }
            t += dt;

            let mut pick = rng.random::<f64>() * rate;
            // the last transition absorbs rounding in the cumulative sum
            let mut chosen = *transitions.last().expect("positive rate implies a transition");
            for tr in &transitions {
                if pick < tr.rate {
                    chosen = *tr;
                    break;
                }
                pick -= tr.rate;
            }
            if chosen.delta > 0 {
                state[chosen.class] += 1;
            } else {
                state[chosen.class] -= 1;
            }
            jumps += 1;
        }

        let span = horizon - opts.warmup;
        let time_average = area.map(|a| a / span);
        Ok(CtmcTrace {
            server: self.server,
            seed,
            stream,
            horizon,
            slot: opts.slot,
            slots,
            slot_mean: if slot_count > 0 { slot_sum / slot_count as f64 } else { 0.0 },
            time_average_total: time_average.iter().sum(),
            time_average,
            jumps,
            final_state: state,
        })
    }

    /// Independent replications; replication `r` uses stream `r` of `seed`.
    pub fn replicate(
        &self,
        horizon: f64,
        seed: u64,
        replications: usize,
        opts: &CtmcOptions,
        exec: Execution,
    ) -> Result<Vec<CtmcTrace>> {
        map_indexed(replications, exec, |r| self.simulate(horizon, seed, r as u64, opts)).into_iter().collect()
    }
}

/// Convenience wrapper: build the queue of `server` and simulate one run.
pub fn ctmc_simulate(
    loads: &ClassLoads,
    rates: &RateMatrix,
    server: Server,
    horizon: f64,
    seed: u64,
    opts: &CtmcOptions,
) -> Result<CtmcTrace> {
    CtmcQueue::new(loads, rates, server)?.simulate(horizon, seed, 0, opts)
}
