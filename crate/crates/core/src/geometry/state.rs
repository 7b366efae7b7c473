use std::fmt;

use serde::{Deserialize, Serialize};

use super::activity::active_d2d_density;
use super::tiers::{first_association_probability, ordering_probability, TierSpec};
use crate::error::Result;
use crate::model::{NetworkConfig, Tier};

/// Content-access situation of a requesting user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AccessCase {
    /// Non-caching user served by its strongest node, which holds (or fetches) the content.
    One,
    /// Cache-enabled user whose content is not in its own cache.
    Two,
    /// Non-caching user whose strongest node is a cache-enabled user lacking the content.
    Three,
    /// Cache-enabled user reading the content from its own cache.
    Four,
}

impl AccessCase {
    pub const ALL: [AccessCase; 4] = [AccessCase::One, AccessCase::Two, AccessCase::Three, AccessCase::Four];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_number(n: usize) -> Option<Self> {
        Self::ALL.get(n.wrapping_sub(1)).copied()
    }
}

impl fmt::Display for AccessCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case{}", self.number())
    }
}

/// Whether the serving node must first fetch the content over the backhaul.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backhaul {
    Free,
    Needed,
}

/// Who delivers the content: one of the radio tiers or the user's own cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Server {
    D2d,
    Relay,
    Bs,
    Local,
}

impl Server {
    pub const ALL: [Server; 4] = [Server::D2d, Server::Relay, Server::Bs, Server::Local];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Server::D2d => "d2d",
            Server::Relay => "relay",
            Server::Bs => "bs",
            Server::Local => "local",
        }
    }

    pub fn tier(self) -> Option<Tier> {
        match self {
            Server::D2d => Some(Tier::D2d),
            Server::Relay => Some(Tier::Relay),
            Server::Bs => Some(Tier::Bs),
            Server::Local => None,
        }
    }
}

impl From<Tier> for Server {
    fn from(t: Tier) -> Self {
        match t {
            Tier::D2d => Server::D2d,
            Tier::Relay => Server::Relay,
            Tier::Bs => Server::Bs,
        }
    }
}

/// Row index in the 8-row state layout: cases in order, backhaul-free row first.
pub fn state_row(case: AccessCase, backhaul: Backhaul) -> usize {
    2 * case.index() + usize::from(backhaul == Backhaul::Needed)
}

/// Inverse of [`state_row`].
pub fn row_state(row: usize) -> (AccessCase, Backhaul) {
    let case = AccessCase::ALL[row / 2];
    let bh = if row.is_multiple_of(2) { Backhaul::Free } else { Backhaul::Needed };
    (case, bh)
}

pub const STATE_ROWS: usize = 8;
pub const SERVERS: usize = 4;

/// Probability of each (case, backhaul, server) user state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMatrix {
    pub d: [[f64; SERVERS]; STATE_ROWS],
}

impl StateMatrix {
    pub fn get(&self, case: AccessCase, backhaul: Backhaul, server: Server) -> f64 {
        self.d[state_row(case, backhaul)][server.index()]
    }

    pub fn case_probability(&self, case: AccessCase) -> f64 {
        let r = state_row(case, Backhaul::Free);
        self.d[r].iter().chain(self.d[r + 1].iter()).sum()
    }

    pub fn column_sum(&self, server: Server) -> f64 {
        self.d.iter().map(|row| row[server.index()]).sum()
    }

    pub fn total(&self) -> f64 {
        self.d.iter().flatten().sum()
    }
}

/// Fills the state probabilities from association probabilities, the caching
/// ratio and the popularity of the content ranges held by each cache.
pub fn state_matrix(cfg: &NetworkConfig) -> Result<StateMatrix> {
    cfg.validate()?;
    // validates the popularity ranges as a side effect
    active_d2d_density(cfg)?;
    let pop = cfg.popularity()?;
    let f = |a: usize, b: usize| pop.prefix(a, b);
    let n = cfg.n_contents;
    let (m1, m2) = (cfg.m1, cfg.m2);
    let alpha = cfg.alpha;

    let tiers = TierSpec::three_tier(cfg)?;
    let g = |t: Tier| first_association_probability(&tiers, t.index());
    let infra = TierSpec::infrastructure(cfg)?;
    let p23 = first_association_probability(&infra, 0)?;
    let p32 = first_association_probability(&infra, 1)?;
    let p123 = ordering_probability(&tiers, &[0, 1, 2])?;
    let p132 = ordering_probability(&tiers, &[0, 2, 1])?;

    let mut d = [[0.0; SERVERS]; STATE_ROWS];
    let mut set = |case, bh, server: Server, v: f64| d[state_row(case, bh)][server.index()] = v;
    use AccessCase::*;
    use Backhaul::*;

    set(One, Free, Server::D2d, g(Tier::D2d)? * (1.0 - alpha) * f(1, m1)?);
    set(One, Free, Server::Relay, g(Tier::Relay)? * (1.0 - alpha) * f(1, m2)?);
    set(One, Free, Server::Bs, g(Tier::Bs)? * (1.0 - alpha));
    set(One, Needed, Server::Relay, g(Tier::Relay)? * (1.0 - alpha) * f(m2 + 1, n)?);

    set(Two, Free, Server::Relay, p23 * alpha * f(m1 + 1, m2)?);
    set(Two, Free, Server::Bs, p32 * alpha * f(m1 + 1, n)?);
    set(Two, Needed, Server::Relay, p23 * alpha * f(m2 + 1, n)?);

    set(Three, Free, Server::Relay, p123 * (1.0 - alpha) * f(m1 + 1, m2)?);
    set(Three, Free, Server::Bs, p132 * (1.0 - alpha) * f(m1 + 1, n)?);
    set(Three, Needed, Server::Relay, p123 * (1.0 - alpha) * f(m2 + 1, n)?);

    set(Four, Free, Server::Local, alpha * f(1, m1)?);

    Ok(StateMatrix { d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn row_layout_round_trips() {
        for row in 0..STATE_ROWS {
            let (c, b) = row_state(row);
            assert_eq!(state_row(c, b), row);
        }
        assert_eq!(state_row(AccessCase::Four, Backhaul::Free), 6);
        assert_eq!(AccessCase::from_number(3), Some(AccessCase::Three));
        assert_eq!(AccessCase::from_number(0), None);
    }

    #[test]
    fn defaults_sum_to_one_with_structural_zeros() {
        let cfg = NetworkConfig::default();
        let s = state_matrix(&cfg).unwrap();
        assert_relative_eq!(s.total(), 1.0, epsilon = 1e-12);
        assert_eq!(s.get(AccessCase::One, Backhaul::Needed, Server::D2d), 0.0);
        assert_eq!(s.get(AccessCase::One, Backhaul::Needed, Server::Bs), 0.0);
        assert_eq!(s.get(AccessCase::Two, Backhaul::Free, Server::D2d), 0.0);
        assert_eq!(s.get(AccessCase::Two, Backhaul::Needed, Server::Bs), 0.0);
        assert_eq!(s.get(AccessCase::Three, Backhaul::Needed, Server::Bs), 0.0);
        assert_eq!(s.d[7], [0.0; 4]);
        for row in 0..6 {
            assert_eq!(s.d[row][Server::Local.index()], 0.0);
        }
        assert_relative_eq!(s.case_probability(AccessCase::Four), 0.1 * 0.2596280468404344, max_relative = 1e-12);
        assert_relative_eq!(
            s.case_probability(AccessCase::Two) + s.case_probability(AccessCase::Four),
            cfg.alpha,
            max_relative = 1e-12
        );
    }

    #[test]
    fn no_cache_enabled_users() {
        let cfg = NetworkConfig { alpha: 0.0, ..NetworkConfig::default() };
        let s = state_matrix(&cfg).unwrap();
        assert_eq!(s.column_sum(Server::Local), 0.0);
        assert_eq!(s.column_sum(Server::D2d), 0.0);
        assert_eq!(s.case_probability(AccessCase::Two), 0.0);
        assert_eq!(s.case_probability(AccessCase::Four), 0.0);
        assert_eq!(s.case_probability(AccessCase::Three), 0.0);
        assert_relative_eq!(s.total(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn case4_grows_with_skew() {
        let base = NetworkConfig::default();
        let mut prev = -1.0;
        for i in 0..=20 {
            let cfg = NetworkConfig { gamma: 0.1 * i as f64, ..base.clone() };
            let c4 = state_matrix(&cfg).unwrap().case_probability(AccessCase::Four);
            assert!(c4 > prev);
            prev = c4;
        }
    }

    proptest! {
        #[test]
        fn totals_one_for_random_configs(
            alpha in 0.0..1.0f64,
            gamma in 0.0..2.5f64,
            m1 in 1usize..30,
            extra in 1usize..100,
            p1_dbm in 0.0..30.0f64,
        ) {
            let cfg = NetworkConfig {
                alpha,
                gamma,
                m1,
                m2: m1 + extra,
                p1: crate::model::dbm_to_watts(p1_dbm),
                ..NetworkConfig::default()
            };
            let s = state_matrix(&cfg).unwrap();
            prop_assert!((s.total() - 1.0).abs() < 1e-10);
            prop_assert!(s.d.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
