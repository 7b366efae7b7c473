use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::grid::PointGrid;
use super::topology::{sample_topology, BoundaryMode, Point, SpatialRealization};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, stream_rng, Execution};
use crate::geometry::{state_row, AccessCase, Backhaul, Server, SERVERS, STATE_ROWS};
use crate::model::{db_to_linear, NetworkConfig, PopularityModel, Tier};
use crate::network::Network;
use crate::stats::{EmpiricalEstimate, RatioAccumulator};

/// Which cache-enabled users transmit (and therefore interfere).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActiveD2dRule {
    /// Independent thinning to the analytic active density.
    #[default]
    Thinning,
    /// Every cache-enabled user transmits.
    AllCacheEnabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    /// Side of the square window [m].
    pub side: f64,
    pub boundary: BoundaryMode,
    pub topologies: usize,
    /// Fading redraws per reference user.
    pub fading_draws: usize,
    /// At most this many users per case and topology get SINR samples
    /// (chosen uniformly); association statistics always use every
    /// reference user.
    pub per_case_cap: Option<usize>,
    /// Outage thresholds [dB].
    pub thresholds_db: Vec<f64>,
    pub active_rule: ActiveD2dRule,
    /// Count the nearest cache-enabled user of a Case-3 user as an
    /// interferer (it is silent in the analysis).
    pub case3_nearest_d2d_interferes: bool,
    /// Redraws allowed when a topology has no relay or no BS.
    pub max_resamples: usize,
    /// Keep every SINR sample for CSV export.
    pub keep_samples: bool,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            side: 2000.0,
            boundary: BoundaryMode::default(),
            topologies: 200,
            fading_draws: 20,
            per_case_cap: None,
            thresholds_db: vec![-10.0, -5.0],
            active_rule: ActiveD2dRule::Thinning,
            case3_nearest_d2d_interferes: false,
            max_resamples: 100,
            keep_samples: false,
            seed: 1,
            execution: Execution::Parallel,
        }
    }
}

/// One raw SINR draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrSample {
    pub case: AccessCase,
    pub server: Server,
    pub sinr_db: f64,
    pub rate_nats: f64,
}

/// Index of link statistics: cases 1-3 by server, plus a pooled column.
const LINK_COLUMNS: usize = 4;
const POOLED: usize = 3;

fn link_slot(case: AccessCase, column: usize) -> usize {
    case.index() * LINK_COLUMNS + column
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct LinkTally {
    draws: f64,
    rate_sum: f64,
    outages: Vec<f64>,
}

/// Statistics of one topology; merged across topologies by cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyTally {
    pub resamples: u64,
    pub reference_users: f64,
    strongest: [f64; 3],
    infra_strongest: [f64; 2],
    states: [[f64; SERVERS]; STATE_ROWS],
    links: Vec<LinkTally>,
    /// Distance from the window centre to the nearest node of each tier.
    pub nearest: [Option<f64>; 3],
    pub samples: Vec<SinrSample>,
}

#[derive(Debug, Clone, Copy)]
enum Node {
    User(usize),
    Relay(usize),
    Bs(usize),
    Local,
}

struct Classified {
    case: AccessCase,
    backhaul: Backhaul,
    server: Server,
    serving: Node,
    nearest_cache: Option<usize>,
    /// Strongest mean received power per tier (0 for an empty tier).
    powers: [f64; 3],
}

struct Context<'a> {
    cfg: &'a NetworkConfig,
    settings: &'a McSettings,
    popularity: &'a PopularityModel,
    thresholds: Vec<f64>,
}

fn nearest(real: &SpatialRealization, boundary: BoundaryMode, from: Point, nodes: &[Point]) -> Option<(usize, f64)> {
    nodes.iter().enumerate().map(|(k, &p)| (k, real.dist2(boundary, from, p))).min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Received mean power `P d^-beta` from squared distance.
fn mean_power(p: f64, d2: f64, beta: f64) -> f64 {
    p * d2.powf(-beta / 2.0)
}

impl Context<'_> {
    fn classify(&self, real: &SpatialRealization, cache: &PointGrid, user: usize, rank: usize) -> Classified {
        let cfg = self.cfg;
        let boundary = self.settings.boundary;
        let at = real.users[user];
        let best_cache = cache.nearest(boundary, at, Some(user));
        let relay = nearest(real, boundary, at, &real.relays).expect("relay tier is non-empty");
        let bs = nearest(real, boundary, at, &real.bss).expect("BS tier is non-empty");
        let relay_power = mean_power(cfg.p2, relay.1, cfg.beta);
        let bs_power = mean_power(cfg.p3, bs.1, cfg.beta);
        let (infra_server, infra_node) =
            if relay_power > bs_power { (Server::Relay, Node::Relay(relay.0)) } else { (Server::Bs, Node::Bs(bs.0)) };
        let d2d_power = best_cache.map_or(0.0, |(_, d2)| mean_power(cfg.p1, d2, cfg.beta));
        let relay_backhaul = if rank > cfg.m2 { Backhaul::Needed } else { Backhaul::Free };
        let infra_backhaul = if infra_server == Server::Relay { relay_backhaul } else { Backhaul::Free };
        let nearest_cache = best_cache.map(|(j, _)| j);
        let powers = [d2d_power, relay_power, bs_power];

        if real.cache_enabled[user] {
            if rank <= cfg.m1 {
                return Classified {
                    case: AccessCase::Four,
                    backhaul: Backhaul::Free,
                    server: Server::Local,
                    serving: Node::Local,
                    nearest_cache,
                    powers,
                };
            }
            return Classified {
                case: AccessCase::Two,
                backhaul: infra_backhaul,
                server: infra_server,
                serving: infra_node,
                nearest_cache,
                powers,
            };
        }
        if d2d_power > relay_power.max(bs_power) {
            let j = nearest_cache.expect("positive D2D power implies a cache-enabled user");
            if rank <= cfg.m1 {
                return Classified {
                    case: AccessCase::One,
                    backhaul: Backhaul::Free,
                    server: Server::D2d,
                    serving: Node::User(j),
                    nearest_cache,
                    powers,
                };
            }
            return Classified {
                case: AccessCase::Three,
                backhaul: infra_backhaul,
                server: infra_server,
                serving: infra_node,
                nearest_cache,
                powers,
            };
        }
        let backhaul = if infra_server == Server::Relay { relay_backhaul } else { Backhaul::Free };
        Classified { case: AccessCase::One, backhaul, server: infra_server, serving: infra_node, nearest_cache, powers }
    }

    /// Mean received powers of the serving link and of every interferer.
    fn link_powers(&self, real: &SpatialRealization, user: usize, c: &Classified) -> (f64, Vec<f64>) {
        let cfg = self.cfg;
        let boundary = self.settings.boundary;
        let at = real.users[user];
        let beta = cfg.beta;
        let silent_cache = match (c.case, self.settings.case3_nearest_d2d_interferes) {
            (AccessCase::Three, false) => c.nearest_cache,
            _ => None,
        };
        let mut powers = Vec::new();
        let transmits = |j: usize| match self.settings.active_rule {
            ActiveD2dRule::Thinning => real.active[j],
            ActiveD2dRule::AllCacheEnabled => real.cache_enabled[j],
        };
        let mut signal = 0.0;
        for (j, &p) in real.users.iter().enumerate() {
            if j == user {
                continue;
            }
            let serving = matches!(c.serving, Node::User(s) if s == j);
            if serving {
                signal = mean_power(cfg.p1, real.dist2(boundary, at, p), beta);
            } else if transmits(j) && silent_cache != Some(j) {
                powers.push(mean_power(cfg.p1, real.dist2(boundary, at, p), beta));
            }
        }
        for (k, &p) in real.relays.iter().enumerate() {
            let pw = mean_power(cfg.p2, real.dist2(boundary, at, p), beta);
            if matches!(c.serving, Node::Relay(s) if s == k) {
                signal = pw;
            } else {
                powers.push(pw);
            }
        }
        for (k, &p) in real.bss.iter().enumerate() {
            let pw = mean_power(cfg.p3, real.dist2(boundary, at, p), beta);
            if matches!(c.serving, Node::Bs(s) if s == k) {
                signal = pw;
            } else {
                powers.push(pw);
            }
        }
        (signal, powers)
    }

    fn measure(&self, real: &SpatialRealization, rng: &mut impl Rng, resamples: u64) -> Result<TopologyTally> {
        let cfg = self.cfg;
        let n_thr = self.thresholds.len();
        let mut tally = TopologyTally {
            resamples,
            reference_users: 0.0,
            strongest: [0.0; 3],
            infra_strongest: [0.0; 2],
            states: [[0.0; SERVERS]; STATE_ROWS],
            links: vec![LinkTally { outages: vec![0.0; n_thr], ..LinkTally::default() }; 3 * LINK_COLUMNS],
            nearest: [None; 3],
            samples: Vec::new(),
        };

        let centre = [real.side / 2.0, real.side / 2.0];
        let boundary = self.settings.boundary;
        let cache_points: Vec<Point> =
            real.users.iter().zip(&real.cache_enabled).filter(|(_, c)| **c).map(|(p, _)| *p).collect();
        for (slot, nodes) in [&cache_points, &real.relays, &real.bss].into_iter().enumerate() {
            tally.nearest[slot] = nearest(real, boundary, centre, nodes).map(|(_, d2)| d2.sqrt());
        }

        let cache = PointGrid::new(
            real.side,
            real.users.iter().enumerate().filter(|(j, _)| real.cache_enabled[*j]).map(|(j, p)| (j, *p)),
            2.0,
        );
        let refs = real.reference_users(boundary)?;
        let mut by_case: [Vec<(usize, Classified)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for &u in &refs {
            let rank = self.popularity.rank_for_quantile(rng.random::<f64>());
            let c = self.classify(real, &cache, u, rank);
            tally.reference_users += 1.0;
            tally.states[state_row(c.case, c.backhaul)][c.server.index()] += 1.0;
            let best = (0..3).max_by(|&a, &b| c.powers[a].total_cmp(&c.powers[b])).expect("three tiers");
            tally.strongest[best] += 1.0;
            tally.infra_strongest[usize::from(c.powers[2] >= c.powers[1])] += 1.0;
            if c.case != AccessCase::Four {
                by_case[c.case.index()].push((u, c));
            }
        }

        for mut group in by_case {
            // Subsampled users stand in for the whole group, so each kept draw is
            // weighted by group size / kept size to preserve per-user weighting.
            let mut weight = 1.0;
            if let Some(cap) = self.settings.per_case_cap {
                // partial Fisher-Yates: a uniform subset of size `cap`
                let keep = cap.min(group.len());
                if keep > 0 {
                    weight = group.len() as f64 / keep as f64;
                }
                for i in 0..keep {
                    let j = rng.random_range(i..group.len());
                    group.swap(i, j);
                }
                group.truncate(keep);
            }
            for (u, c) in group {
                let (signal, interferers) = self.link_powers(real, u, &c);
                for _ in 0..self.settings.fading_draws {
                    let mut interference = cfg.noise;
                    for p in &interferers {
                        let g: f64 = Exp1.sample(rng);
                        interference += p * g;
                    }
                    let g: f64 = Exp1.sample(rng);
                    if interference <= 0.0 {
                        return Err(Error::Simulation("SINR undefined: no interferers and zero noise".into()));
                    }
                    let sinr = signal * g / interference;
                    let rate = sinr.ln_1p();
                    for column in [c.server.index(), POOLED] {
                        let link = &mut tally.links[link_slot(c.case, column)];
                        link.draws += weight;
                        link.rate_sum += weight * rate;
                        for (k, &t) in self.thresholds.iter().enumerate() {
                            if sinr <= t {
                                link.outages[k] += weight;
                            }
                        }
                    }
                    if self.settings.keep_samples {
                        tally.samples.push(SinrSample {
                            case: c.case,
                            server: c.server,
                            sinr_db: 10.0 * sinr.log10(),
                            rate_nats: rate,
                        });
                    }
                }
            }
        }
        Ok(tally)
    }
}

/// Per-case (and per-server) empirical rate and outage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEstimate {
    pub case: AccessCase,
    /// `None` pools every server of the case.
    pub server: Option<Server>,
    /// Total SINR draws, weighted by the subsampling factor when a per-case cap applies.
    pub draws: f64,
    pub rate: EmpiricalEstimate,
    /// `(threshold dB, P(SINR <= threshold))`.
    pub outage: Vec<(f64, EmpiricalEstimate)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub topologies: usize,
    pub resamples: u64,
    pub reference_users: f64,
    /// Empirical `G_{3,i}` in tier order.
    pub association: [EmpiricalEstimate; 3],
    /// Empirical `P_{2,3}`, `P_{3,2}`.
    pub infrastructure: [EmpiricalEstimate; 2],
    /// Empirical state probabilities in the state-matrix layout.
    pub states: [[EmpiricalEstimate; SERVERS]; STATE_ROWS],
    /// Empirical case probabilities (row-pair sums of `states`).
    pub cases: [EmpiricalEstimate; 4],
    /// Empirical serving-node probabilities (column sums of `states`).
    pub servers: [EmpiricalEstimate; SERVERS],
    pub links: Vec<LinkEstimate>,
    /// Nearest-node distances from the window centre, one per topology.
    pub nearest_distances: [Vec<f64>; 3],
    pub samples: Vec<SinrSample>,
}

impl McReport {
    pub fn from_tallies(tallies: Vec<TopologyTally>, thresholds_db: &[f64]) -> Self {
        let ratio = |f: &dyn Fn(&TopologyTally) -> (f64, f64)| {
            let mut acc = RatioAccumulator::default();
            for t in &tallies {
                let (c, y) = f(t);
                acc.add_cluster(c, y);
            }
            acc.estimate()
        };
        let association = [0, 1, 2].map(|i| ratio(&|t| (t.reference_users, t.strongest[i])));
        let infrastructure = [0, 1].map(|i| ratio(&|t| (t.reference_users, t.infra_strongest[i])));
        let mut states = [[EmpiricalEstimate { estimate: 0.0, standard_error: 0.0, samples: 0 }; SERVERS]; STATE_ROWS];
        for (row, out) in states.iter_mut().enumerate() {
            for (j, e) in out.iter_mut().enumerate() {
                *e = ratio(&|t| (t.reference_users, t.states[row][j]));
            }
        }
        let cases = [0, 1, 2, 3]
            .map(|c| ratio(&|t| (t.reference_users, t.states[2 * c].iter().chain(&t.states[2 * c + 1]).sum())));
        let servers = [0, 1, 2, 3].map(|j| ratio(&|t| (t.reference_users, t.states.iter().map(|r| r[j]).sum())));
        let mut links = Vec::new();
        for case in [AccessCase::One, AccessCase::Two, AccessCase::Three] {
            for column in 0..LINK_COLUMNS {
                let slot = link_slot(case, column);
                let draws: f64 = tallies.iter().map(|t| t.links[slot].draws).sum();
                if draws == 0.0 {
                    continue;
                }
                let outage = thresholds_db
                    .iter()
                    .enumerate()
                    .map(|(k, &db)| (db, ratio(&|t| (t.links[slot].draws, t.links[slot].outages[k]))))
                    .collect();
                links.push(LinkEstimate {
                    case,
                    server: (column != POOLED).then(|| Server::ALL[column]),
                    draws,
                    rate: ratio(&|t| (t.links[slot].draws, t.links[slot].rate_sum)),
                    outage,
                });
            }
        }
        let nearest_distances = [0, 1, 2].map(|i| tallies.iter().filter_map(|t| t.nearest[i]).collect());
        McReport {
            topologies: tallies.len(),
            resamples: tallies.iter().map(|t| t.resamples).sum(),
            reference_users: tallies.iter().map(|t| t.reference_users).sum(),
            association,
            infrastructure,
            states,
            cases,
            servers,
            links,
            nearest_distances,
            samples: tallies.into_iter().flat_map(|t| t.samples).collect(),
        }
    }

    pub fn link(&self, case: AccessCase, server: Option<Server>) -> Option<&LinkEstimate> {
        self.links.iter().find(|l| l.case == case && l.server == server)
    }

    pub fn association_of(&self, tier: Tier) -> EmpiricalEstimate {
        self.association[tier.index()]
    }
}

/// Measures one given realization (all reference users, fresh ranks and fading).
pub fn measure_realization<R: Rng>(
    cfg: &NetworkConfig,
    real: &SpatialRealization,
    settings: &McSettings,
    rng: &mut R,
) -> Result<TopologyTally> {
    let popularity = cfg.popularity()?;
    let ctx = Context {
        cfg,
        settings,
        popularity: &popularity,
        thresholds: settings.thresholds_db.iter().map(|&d| db_to_linear(d)).collect(),
    };
    if real.relays.is_empty() || real.bss.is_empty() {
        return Err(Error::Simulation("realization needs at least one relay and one BS".into()));
    }
    ctx.measure(real, rng, 0)
}

fn validate_settings(settings: &McSettings) -> Result<()> {
    if !(settings.side.is_finite() && settings.side > 0.0) {
        return Err(Error::domain("window side must be > 0"));
    }
    if let BoundaryMode::CentralMargin { margin } = settings.boundary {
        if !(margin >= 0.0 && 2.0 * margin < settings.side) {
            return Err(Error::domain(format!(
                "margin {margin} leaves no central region in a {} m window",
                settings.side
            )));
        }
    }
    if settings.topologies == 0 {
        return Err(Error::domain("at least one topology is required"));
    }
    if settings.thresholds_db.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("outage thresholds must be finite"));
    }
    Ok(())
}

/// Runs `settings.topologies` independent topologies; topology `t` draws from
/// stream `t` of `settings.seed`.
pub fn simulate(cfg: &NetworkConfig, settings: &McSettings) -> Result<McReport> {
    validate_settings(settings)?;
    let net = Network::new(cfg.clone())?;
    let active_fraction = net.activity().active_fraction(cfg);
    let ctx = Context {
        cfg,
        settings,
        popularity: net.popularity(),
        thresholds: settings.thresholds_db.iter().map(|&d| db_to_linear(d)).collect(),
    };
    let tallies = map_indexed(settings.topologies, settings.execution, |t| {
        let mut rng = stream_rng(settings.seed, t as u64);
        let mut resamples = 0u64;
        loop {
            let real = sample_topology(cfg, active_fraction, settings.side, &mut rng)?;
            if !real.relays.is_empty() && !real.bss.is_empty() {
                return ctx.measure(&real, &mut rng, resamples);
            }
            resamples += 1;
            if resamples as usize > settings.max_resamples {
                return Err(Error::Simulation(format!(
                    "topology {t}: no relay or no BS after {} redraws",
                    settings.max_resamples
                )));
            }
        }
    });
    let tallies = tallies.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(McReport::from_tallies(tallies, &settings.thresholds_db))
}
