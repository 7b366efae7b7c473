use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{row_state, AccessCase, Backhaul, Server, StateMatrix, SERVERS, STATE_ROWS};
use crate::model::NetworkConfig;
use crate::network::Network;
use crate::rate::rate_for;

/// Average ergodic rate [nats/s/Hz] per (case, server); the Case-4 local
/// entry holds the read-out rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRates {
    pub u: [[f64; SERVERS]; 4],
}

impl CaseRates {
    /// Analytic rates for every (case, server) pair with non-zero probability.
    pub fn analytic(net: &Network) -> Result<Self> {
        let states = net.states();
        let mut u = [[0.0; SERVERS]; 4];
        for case in AccessCase::ALL {
            for server in Server::ALL {
                let used =
                    states.get(case, Backhaul::Free, server) > 0.0 || states.get(case, Backhaul::Needed, server) > 0.0;
                if !used {
                    continue;
                }
                if let Some(r) = rate_for(net, case, server)? {
                    u[case.index()][server.index()] = r.value;
                }
            }
        }
        Ok(Self { u })
    }

    pub fn get(&self, case: AccessCase, server: Server) -> f64 {
        self.u[case.index()][server.index()]
    }
}

/// Service rate [bits/s] of each request class at each node type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    pub a: [[f64; SERVERS]; STATE_ROWS],
}

impl RateMatrix {
    pub fn get(&self, row: usize, server: Server) -> f64 {
        self.a[row][server.index()]
    }
}

/// Converts per-case rates to bits/s (`eta * w * U`), applies the backhaul
/// penalty `kappa * U` on backhaul-needed rows and zeroes states that never
/// occur.
pub fn rate_matrix(cfg: &NetworkConfig, states: &StateMatrix, rates: &CaseRates) -> Result<RateMatrix> {
    cfg.validate()?;
    let mut a = [[0.0; SERVERS]; STATE_ROWS];
    for (row, out) in a.iter_mut().enumerate() {
        let (case, bh) = row_state(row);
        for server in Server::ALL {
            if states.d[row][server.index()] == 0.0 {
                continue;
            }
            let u = rates.get(case, server);
            let penalty = if bh == Backhaul::Needed { cfg.backhaul_kappa } else { 1.0 };
            out[server.index()] = cfg.eta * cfg.bandwidth_w * penalty * u;
        }
    }
    Ok(RateMatrix { a })
}
