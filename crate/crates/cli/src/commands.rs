//! Experiment commands. Each one turns a configuration into a [`Table`].

use anyhow::Context;
use cachenet::exec::{map_indexed, map_slice, stream_rng};
use cachenet::geometry::{row_state, AccessCase, Backhaul, Server, STATE_ROWS};
use cachenet::model::{db_to_linear, Tier};
use cachenet::montecarlo::{simulate, McReport};
use cachenet::network::Network;
use cachenet::outage::outage_for;
use cachenet::queueing::{compare_with_baseline, CtmcOptions, CtmcQueue, QueueModel};
use cachenet::rate::rate_for;
use cachenet::stats::EmpiricalEstimate;
use cachenet::Execution;
use clap::{Args, ValueEnum};
use rand::RngCore;

use crate::config::FileConfig;
use crate::grid::Grid;
use crate::table::{Cell, Table};

/// Area of the 500 m reference disk used for "per disk" counts [m²].
const DISK_AREA: f64 = std::f64::consts::PI * 500.0 * 500.0;

/// Inputs shared by every command.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub cfg: FileConfig,
    pub seed: u64,
    /// Collapse every default grid to the configured value (sweep points).
    pub point: bool,
}

impl Ctx {
    fn exec(&self) -> Execution {
        self.cfg.execution
    }

    fn grid(&self, given: &Option<Grid>, configured: f64, default: &str) -> Grid {
        match given {
            Some(g) => g.clone(),
            None if self.point => Grid::single(configured),
            None => default.parse().expect("built-in grid"),
        }
    }

    fn network_at(&self, alpha: f64) -> anyhow::Result<Network> {
        let cfg = FileConfig { alpha, ..self.cfg.clone() }.network()?;
        Ok(Network::new(cfg)?)
    }

    /// Seed of the `index`-th independent sub-run.
    fn sub_seed(&self, index: usize) -> u64 {
        stream_rng(self.seed, index as u64).next_u64()
    }

    fn monte_carlo(&self, cfg: &FileConfig, index: usize, thresholds_db: Vec<f64>) -> anyhow::Result<McReport> {
        let net = cfg.network()?;
        let settings = cfg.monte_carlo(self.sub_seed(index), thresholds_db);
        simulate(&net, &settings).context("Monte Carlo simulation failed")
    }
}

fn server_name(server: Option<Server>) -> &'static str {
    server.map_or("pooled", Server::name)
}

fn backhaul_name(b: Backhaul) -> &'static str {
    match b {
        Backhaul::Free => "free",
        Backhaul::Needed => "needed",
    }
}

fn estimate_cells(e: &EmpiricalEstimate) -> [Cell; 2] {
    [Cell::num(e.estimate), Cell::num(e.standard_error)]
}

/// The (case, server) pairs carried by radio links.
const LINKS: [(AccessCase, Tier); 7] = [
    (AccessCase::One, Tier::D2d),
    (AccessCase::One, Tier::Relay),
    (AccessCase::One, Tier::Bs),
    (AccessCase::Two, Tier::Relay),
    (AccessCase::Two, Tier::Bs),
    (AccessCase::Three, Tier::Relay),
    (AccessCase::Three, Tier::Bs),
];

fn status<T>(r: &cachenet::Result<T>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => e.to_string().into(),
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct AssociationArgs {
    /// Zipf skew grid (default: the configured value).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<Grid>,
    /// Add Monte Carlo estimates at every grid point.
    #[arg(long)]
    pub with_mc: bool,
}

pub fn association(ctx: &Ctx, args: &AssociationArgs) -> anyhow::Result<Table> {
    let gammas = args.gamma.clone().unwrap_or(Grid::single(ctx.cfg.gamma));
    let mut t = Table::new(&["gamma", "quantity", "source", "value", "se"]);
    for (i, &gamma) in gammas.values().iter().enumerate() {
        let cfg = FileConfig { gamma, ..ctx.cfg.clone() };
        let net = Network::new(cfg.network()?)?;
        let states = net.states();
        let mut rows: Vec<(String, f64)> = Vec::new();
        for tier in Tier::ALL {
            rows.push((format!("association_{}", Server::from(tier).name()), net.association(tier)));
        }
        for tier in [Tier::Relay, Tier::Bs] {
            rows.push((format!("infrastructure_{}", Server::from(tier).name()), net.infrastructure_association(tier)?));
        }
        for case in AccessCase::ALL {
            rows.push((case.to_string(), states.case_probability(case)));
        }
        for server in Server::ALL {
            rows.push((format!("served_by_{}", server.name()), states.column_sum(server)));
        }
        for (q, v) in &rows {
            t.push(vec![gamma.into(), q.as_str().into(), "analytic".into(), Cell::num(*v), Cell::Num(0.0)]);
        }
        if args.with_mc {
            let r = ctx.monte_carlo(&cfg, i, Vec::new())?;
            let mut mc: Vec<(String, EmpiricalEstimate)> = Vec::new();
            for tier in Tier::ALL {
                mc.push((format!("association_{}", Server::from(tier).name()), r.association_of(tier)));
            }
            for (k, tier) in [Tier::Relay, Tier::Bs].into_iter().enumerate() {
                mc.push((format!("infrastructure_{}", Server::from(tier).name()), r.infrastructure[k]));
            }
            for case in AccessCase::ALL {
                mc.push((case.to_string(), r.cases[case.index()]));
            }
            for server in Server::ALL {
                mc.push((format!("served_by_{}", server.name()), r.servers[server.index()]));
            }
            for (q, e) in &mc {
                let [v, se] = estimate_cells(e);
                t.push(vec![gamma.into(), q.as_str().into(), "mc".into(), v, se]);
            }
        }
    }
    Ok(t)
}

#[derive(Args, Debug, Clone, Default)]
pub struct AlphaArgs {
    /// Caching-ratio grid (default 0:0.6:0.01).
    #[arg(long)]
    pub alpha: Option<Grid>,
}

pub fn d2d_density(ctx: &Ctx, args: &AlphaArgs) -> anyhow::Result<Table> {
    let alphas = ctx.grid(&args.alpha, ctx.cfg.alpha, "0:0.6:0.01");
    let mut t = Table::new(&[
        "alpha",
        "lambda1_active_per_m2",
        "active_d2d_per_disk",
        "cache_enabled_per_disk",
        "active_fraction",
        "all_cache_enabled_active",
    ]);
    let mut marks = None;
    for &alpha in alphas.values() {
        let net = ctx.network_at(alpha)?;
        let a = *net.activity();
        let lambda1 = net.config().lambda1();
        t.push(vec![
            alpha.into(),
            Cell::num(a.lambda1_active),
            Cell::num(a.lambda1_active * DISK_AREA),
            Cell::num(lambda1 * DISK_AREA),
            Cell::num(a.active_fraction(net.config())),
            (a.lambda1_active >= lambda1).into(),
        ]);
        marks = Some(a);
    }
    if let Some(a) = marks {
        t.note("alpha_star", a.alpha_star);
        t.note("alpha_hat", a.alpha_hat);
        t.note("h", a.h);
    }
    Ok(t)
}

#[derive(Args, Debug, Clone, Default)]
pub struct RateArgs {
    /// Caching-ratio grid of the analytic curves (default 0:0.6:0.01).
    #[arg(long)]
    pub alpha: Option<Grid>,
    /// Add Monte Carlo estimates.
    #[arg(long)]
    pub with_mc: bool,
    /// Caching-ratio grid of the Monte Carlo points (default 0.05:0.6:0.05).
    #[arg(long)]
    pub mc_alpha: Option<Grid>,
}

/// Monte Carlo reports at every point of the MC grid, in order.
fn mc_over_alpha(ctx: &Ctx, alphas: &Grid, thresholds_db: &[f64]) -> anyhow::Result<Vec<(f64, McReport)>> {
    alphas
        .values()
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let cfg = FileConfig { alpha, ..ctx.cfg.clone() };
            Ok((alpha, ctx.monte_carlo(&cfg, i, thresholds_db.to_vec())?))
        })
        .collect()
}

pub fn rate(ctx: &Ctx, args: &RateArgs) -> anyhow::Result<Table> {
    let alphas = ctx.grid(&args.alpha, ctx.cfg.alpha, "0:0.6:0.01");
    let mut t = Table::new(&["alpha", "case", "server", "source", "rate", "se", "status", "active_d2d_per_disk"]);
    let per_alpha = map_slice(alphas.values(), ctx.exec(), |&alpha| -> anyhow::Result<Vec<Vec<Cell>>> {
        let net = ctx.network_at(alpha)?;
        let active = Cell::num(net.activity().lambda1_active * DISK_AREA);
        let mut rows = Vec::new();
        let pairs = LINKS.iter().map(|&(c, tier)| (c, Server::from(tier))).chain([(AccessCase::Four, Server::Local)]);
        for (case, server) in pairs {
            let r = rate_for(&net, case, server);
            let value = match &r {
                Ok(Some(x)) => Cell::num(x.value),
                _ => Cell::Empty,
            };
            rows.push(vec![
                alpha.into(),
                case.to_string().into(),
                server.name().into(),
                "analytic".into(),
                value,
                Cell::Num(0.0),
                status(&r),
                active.clone(),
            ]);
        }
        Ok(rows)
    });
    for rows in per_alpha {
        for row in rows? {
            t.push(row);
        }
    }
    if args.with_mc {
        let mc_alphas = ctx.grid(&args.mc_alpha, ctx.cfg.alpha, "0.05:0.6:0.05");
        for (alpha, r) in mc_over_alpha(ctx, &mc_alphas, &[])? {
            let active = Cell::num(ctx.network_at(alpha)?.activity().lambda1_active * DISK_AREA);
            for l in &r.links {
                let [v, se] = estimate_cells(&l.rate);
                t.push(vec![
                    alpha.into(),
                    l.case.to_string().into(),
                    server_name(l.server).into(),
                    "mc".into(),
                    v,
                    se,
                    "ok".into(),
                    active.clone(),
                ]);
            }
        }
    }
    let net = ctx.network_at(ctx.cfg.alpha)?;
    t.note("alpha_star", net.activity().alpha_star);
    t.note("alpha_hat", net.activity().alpha_hat);
    Ok(t)
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutageArgs {
    /// Caching-ratio grid of the analytic curves (default 0:0.6:0.02).
    #[arg(long)]
    pub alpha: Option<Grid>,
    /// SINR thresholds [dB] (default: the configured `tau_db`).
    #[arg(long, allow_hyphen_values = true)]
    pub tau_db: Option<Grid>,
    #[arg(long)]
    pub with_mc: bool,
    /// Caching-ratio grid of the Monte Carlo points (default 0.05:0.6:0.05).
    #[arg(long)]
    pub mc_alpha: Option<Grid>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SinrCdfArgs {
    /// Caching ratios (default: the configured value).
    #[arg(long)]
    pub alpha: Option<Grid>,
    /// SINR grid [dB] (default -20:20:1).
    #[arg(long, allow_hyphen_values = true)]
    pub tau_db: Option<Grid>,
    #[arg(long)]
    pub with_mc: bool,
}

const PROBABILITY_COLUMNS: [&str; 8] = ["alpha", "tau_db", "case", "server", "source", "probability", "se", "status"];

/// `P(SINR <= tau)` per link on an `alpha x tau` grid, analytic and optionally MC.
fn sinr_table(ctx: &Ctx, alphas: &Grid, taus_db: &[f64], mc_alphas: Option<&Grid>) -> anyhow::Result<Table> {
    let mut t = Table::new(&PROBABILITY_COLUMNS);
    let per_alpha = map_slice(alphas.values(), ctx.exec(), |&alpha| -> anyhow::Result<Vec<Vec<Cell>>> {
        let net = ctx.network_at(alpha)?;
        let mut rows = Vec::new();
        for &(case, tier) in &LINKS {
            for &db in taus_db {
                let r = outage_for(&net, case, tier, db_to_linear(db));
                rows.push(vec![
                    alpha.into(),
                    db.into(),
                    case.to_string().into(),
                    Server::from(tier).name().into(),
                    "analytic".into(),
                    r.as_ref().map_or(Cell::Empty, |o| Cell::num(o.probability)),
                    Cell::Num(0.0),
                    status(&r),
                ]);
            }
        }
        Ok(rows)
    });
    for rows in per_alpha {
        for row in rows? {
            t.push(row);
        }
    }
    if let Some(mc_alphas) = mc_alphas {
        for (alpha, r) in mc_over_alpha(ctx, mc_alphas, taus_db)? {
            for l in &r.links {
                for (db, e) in &l.outage {
                    let [v, se] = estimate_cells(e);
                    t.push(vec![
                        alpha.into(),
                        (*db).into(),
                        l.case.to_string().into(),
                        server_name(l.server).into(),
                        "mc".into(),
                        v,
                        se,
                        "ok".into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

pub fn outage(ctx: &Ctx, args: &OutageArgs) -> anyhow::Result<Table> {
    let alphas = ctx.grid(&args.alpha, ctx.cfg.alpha, "0:0.6:0.02");
    let taus = args.tau_db.as_ref().map_or(ctx.cfg.tau_db.clone(), |g| g.values().to_vec());
    let mc = args.with_mc.then(|| ctx.grid(&args.mc_alpha, ctx.cfg.alpha, "0.05:0.6:0.05"));
    sinr_table(ctx, &alphas, &taus, mc.as_ref())
}

pub fn sinr_cdf(ctx: &Ctx, args: &SinrCdfArgs) -> anyhow::Result<Table> {
    let alphas = args.alpha.clone().unwrap_or(Grid::single(ctx.cfg.alpha));
    let taus = match &args.tau_db {
        Some(g) => g.clone(),
        None => "-20:20:1".parse().expect("built-in grid"),
    };
    if taus.values().windows(2).any(|w| w[0] > w[1]) {
        anyhow::bail!("the SINR grid must be ascending");
    }
    sinr_table(ctx, &alphas, taus.values(), args.with_mc.then_some(&alphas))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NodeArg {
    D2d,
    Relay,
    Bs,
    Local,
}

impl From<NodeArg> for Server {
    fn from(n: NodeArg) -> Self {
        match n {
            NodeArg::D2d => Server::D2d,
            NodeArg::Relay => Server::Relay,
            NodeArg::Bs => Server::Bs,
            NodeArg::Local => Server::Local,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct QueueArgs {
    /// Request intensity [requests/s] (default: the configured `varsigma_per_s`).
    #[arg(long)]
    pub varsigma: Option<f64>,
    /// Add the network without caching.
    #[arg(long)]
    pub baseline: bool,
    /// Simulate the request-count process of one node type instead.
    #[arg(long, value_enum)]
    pub trace: Option<NodeArg>,
}

fn cached_model(cfg: &FileConfig) -> anyhow::Result<QueueModel> {
    Ok(QueueModel::cached(&Network::new(cfg.network()?)?)?)
}

fn class_name(row: usize) -> String {
    let (case, bh) = row_state(row);
    format!("{case}_{}", backhaul_name(bh))
}

pub fn queue(ctx: &Ctx, args: &QueueArgs) -> anyhow::Result<Table> {
    let varsigma = args.varsigma.unwrap_or(ctx.cfg.varsigma_per_s);
    if !(varsigma.is_finite() && varsigma >= 0.0) {
        anyhow::bail!("request intensity must be >= 0, got {varsigma}");
    }
    if let Some(node) = args.trace {
        return trace(ctx, varsigma, node.into());
    }
    let mut t = Table::new(&[
        "system",
        "server",
        "case",
        "backhaul",
        "state",
        "ruler",
        "zeta",
        "sigma",
        "sigma_c",
        "service_rate",
        "mean_requests",
        "throughput_per_request",
        "delay",
    ]);
    let cached = cached_model(&ctx.cfg)?;
    let mut systems = vec![("cached", cached.clone())];
    if args.baseline {
        systems.push(("baseline", QueueModel::baseline(&cached.cfg)?));
    }
    for (name, model) in &systems {
        let m = model.metrics(varsigma)?;
        for node in &m.nodes {
            let state = format!("{:?}", node.state).to_lowercase();
            t.push(vec![
                (*name).into(),
                node.server.name().into(),
                "all".into(),
                "all".into(),
                state.as_str().into(),
                Cell::num(node.ruler),
                Cell::num(node.zeta),
                Cell::num(node.sigma),
                Cell::opt(node.sigma_c),
                Cell::Empty,
                Cell::opt(node.mean_requests),
                Cell::opt(node.throughput),
                Cell::opt(node.delay),
            ]);
            for c in &node.classes {
                t.push(vec![
                    (*name).into(),
                    node.server.name().into(),
                    c.case.to_string().into(),
                    backhaul_name(c.backhaul).into(),
                    state.as_str().into(),
                    Cell::Empty,
                    Cell::num(c.zeta),
                    Cell::num(c.sigma),
                    Cell::Empty,
                    Cell::num(c.service_rate),
                    Cell::opt(c.mean_requests),
                    Cell::opt(c.throughput),
                    Cell::opt(c.delay),
                ]);
            }
        }
        t.note(format!("varsigma_star_{name}"), model.steady()?.max_arrival_rate);
    }
    t.note("varsigma", varsigma);
    if let (Some(c), Some(b)) = (t.summary.get("varsigma_star_cached"), t.summary.get("varsigma_star_baseline")) {
        let gain = c / b - 1.0;
        t.note("throughput_gain", gain);
    }
    Ok(t)
}

/// Slotted request counts of one node, plus replicated time averages.
fn trace(ctx: &Ctx, varsigma: f64, server: Server) -> anyhow::Result<Table> {
    let model = cached_model(&ctx.cfg)?;
    let q = CtmcQueue::new(&model.loads(varsigma)?, &model.rates, server)?;
    let node = model.metrics(varsigma)?.node(server).clone();
    let opts = ctx.cfg.ctmc();
    let horizon = ctx.cfg.ctmc_horizon_s;
    let run = q.simulate(horizon, ctx.seed, 0, &opts)?;

    let classes: Vec<String> = (0..STATE_ROWS).map(class_name).collect();
    let mut columns = vec!["slot", "time_s", "total"];
    columns.extend(classes.iter().map(String::as_str));
    let mut t = Table::new(&columns);
    for (k, s) in run.slots.iter().enumerate() {
        let mut row = vec![
            Cell::from(k + 1),
            Cell::num((k + 1) as f64 * run.slot),
            Cell::Int(s.iter().map(|&x| i64::from(x)).sum()),
        ];
        row.extend(s.iter().map(|&x| Cell::Int(i64::from(x))));
        t.push(row);
    }
    t.note("ruler", node.ruler);
    if let Some(n) = node.mean_requests {
        t.note("analytic_mean_requests", n);
    }
    t.note("slot_mean", run.slot_mean);
    let reps = ctx.cfg.ctmc_replications;
    if reps > 0 {
        let opts = CtmcOptions { record_slots: false, ..opts };
        let runs = q.replicate(horizon, ctx.seed, reps, &opts, ctx.exec())?;
        let est = EmpiricalEstimate::from_samples(&runs.iter().map(|r| r.slot_mean).collect::<Vec<_>>());
        t.note("replicated_slot_mean", est.estimate);
        t.note("replicated_slot_mean_se", est.standard_error);
        t.note("replications", reps as f64);
    }
    Ok(t)
}

#[derive(Args, Debug, Clone, Default)]
pub struct SteadyArgs {
    /// Request-intensity grid [requests/s] (default 0:1.5:0.01).
    #[arg(long)]
    pub varsigma: Option<Grid>,
    /// Zipf skews (default: the configured value).
    #[arg(long)]
    pub gamma: Option<Grid>,
    /// Add the network without caching.
    #[arg(long)]
    pub baseline: bool,
}

pub fn steady(ctx: &Ctx, args: &SteadyArgs) -> anyhow::Result<Table> {
    let varsigmas = ctx.grid(&args.varsigma, ctx.cfg.varsigma_per_s, "0:1.5:0.01");
    if varsigmas.values().iter().any(|&v| v < 0.0) {
        anyhow::bail!("request intensities must be >= 0");
    }
    let gammas = args.gamma.clone().unwrap_or(Grid::single(ctx.cfg.gamma));
    let mut t =
        Table::new(&["system", "gamma", "varsigma", "ruler_d2d", "ruler_relay", "ruler_bs", "binding", "stable"]);
    for &gamma in gammas.values() {
        let cached = cached_model(&FileConfig { gamma, ..ctx.cfg.clone() })?;
        let mut systems = vec![("cached", cached.clone())];
        if args.baseline {
            systems.push(("baseline", QueueModel::baseline(&cached.cfg)?));
        }
        for (name, model) in &systems {
            let s = model.steady()?;
            for &v in varsigmas.values() {
                let m = model.metrics(v)?;
                let r = |srv: Server| m.node(srv).ruler;
                t.push(vec![
                    (*name).into(),
                    gamma.into(),
                    v.into(),
                    Cell::num(r(Server::D2d)),
                    Cell::num(r(Server::Relay)),
                    Cell::num(r(Server::Bs)),
                    s.binding.name().into(),
                    (v < s.max_arrival_rate).into(),
                ]);
            }
            t.note(format!("varsigma_star_{name}[gamma={gamma}]"), s.max_arrival_rate);
        }
        if args.baseline {
            let c = compare_with_baseline(&Network::new(cached.cfg.clone())?)?;
            t.note(format!("throughput_gain[gamma={gamma}]"), c.throughput_gain);
        }
    }
    Ok(t)
}

#[derive(Args, Debug, Clone, Default)]
pub struct BaselineArgs {
    /// Zipf skews (default: the configured value).
    #[arg(long)]
    pub gamma: Option<Grid>,
    /// Backhaul penalty factors (default: the configured value).
    #[arg(long)]
    pub kappa: Option<Grid>,
}

pub fn baseline_compare(ctx: &Ctx, args: &BaselineArgs) -> anyhow::Result<Table> {
    let gammas = args.gamma.clone().unwrap_or(Grid::single(ctx.cfg.gamma));
    let kappas = args.kappa.clone().unwrap_or(Grid::single(ctx.cfg.backhaul_kappa));
    let mut t = Table::new(&[
        "gamma",
        "kappa",
        "varsigma_star_cached",
        "varsigma_star_baseline",
        "throughput_gain",
        "binding_cached",
        "binding_baseline",
        "d2d_over_baseline_bs",
    ]);
    let points: Vec<(f64, f64)> =
        gammas.values().iter().flat_map(|&g| kappas.values().iter().map(move |&k| (g, k))).collect();
    let results = map_slice(&points, ctx.exec(), |&(gamma, kappa)| -> anyhow::Result<Vec<Cell>> {
        let cfg = FileConfig { gamma, backhaul_kappa: kappa, ..ctx.cfg.clone() };
        let c = compare_with_baseline(&Network::new(cfg.network()?)?)?;
        Ok(vec![
            gamma.into(),
            kappa.into(),
            Cell::num(c.cached.max_arrival_rate),
            Cell::num(c.baseline.max_arrival_rate),
            Cell::num(c.throughput_gain),
            c.cached.binding.name().into(),
            c.baseline.binding.name().into(),
            Cell::opt(c.d2d_over_baseline_bs),
        ])
    });
    for row in results {
        t.push(row?);
    }
    Ok(t)
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimulateArgs {
    /// Caching ratio (default: the configured value).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Also write every SINR draw to `<name>_samples.csv`.
    #[arg(long)]
    pub samples: bool,
}

/// Monte Carlo estimates next to their analytic counterparts. The second
/// table holds the raw draws when requested.
pub fn simulate_cmd(ctx: &Ctx, args: &SimulateArgs) -> anyhow::Result<(Table, Option<Table>)> {
    let alpha = args.alpha.unwrap_or(ctx.cfg.alpha);
    let cfg = FileConfig { alpha, ..ctx.cfg.clone() };
    let net = Network::new(cfg.network()?)?;
    let mut settings = cfg.monte_carlo(ctx.seed, cfg.tau_db.clone());
    settings.keep_samples = args.samples;
    let r = simulate(net.config(), &settings).context("Monte Carlo simulation failed")?;

    let mut t =
        Table::new(&["quantity", "case", "backhaul", "server", "tau_db", "estimate", "se", "weight", "analytic"]);
    let mut push = |q: &str,
                    case: &str,
                    bh: &str,
                    server: &str,
                    tau: Cell,
                    e: &EmpiricalEstimate,
                    weight: Cell,
                    analytic: Cell| {
        let [v, se] = estimate_cells(e);
        t.push(vec![q.into(), case.into(), bh.into(), server.into(), tau, v, se, weight, analytic]);
    };
    let units = Cell::num(r.reference_users);
    for tier in Tier::ALL {
        let name = Server::from(tier).name();
        push(
            "association",
            "",
            "",
            name,
            Cell::Empty,
            &r.association_of(tier),
            units.clone(),
            Cell::num(net.association(tier)),
        );
    }
    for (k, tier) in [Tier::Relay, Tier::Bs].into_iter().enumerate() {
        let analytic = Cell::num(net.infrastructure_association(tier)?);
        push(
            "infrastructure",
            "",
            "",
            Server::from(tier).name(),
            Cell::Empty,
            &r.infrastructure[k],
            units.clone(),
            analytic,
        );
    }
    let states = net.states();
    for case in AccessCase::ALL {
        let analytic = Cell::num(states.case_probability(case));
        push(
            "case_probability",
            &case.to_string(),
            "",
            "",
            Cell::Empty,
            &r.cases[case.index()],
            units.clone(),
            analytic,
        );
    }
    for (row, out) in r.states.iter().enumerate() {
        let (case, bh) = row_state(row);
        for server in Server::ALL {
            let analytic = Cell::num(states.get(case, bh, server));
            let e = &out[server.index()];
            push("state", &case.to_string(), backhaul_name(bh), server.name(), Cell::Empty, e, units.clone(), analytic);
        }
    }
    for l in &r.links {
        let analytic_rate = match l.server {
            Some(s) => rate_for(&net, l.case, s).ok().flatten().map(|x| x.value),
            None => None,
        };
        let (case, server, weight) = (l.case.to_string(), server_name(l.server), Cell::num(l.draws));
        push("rate", &case, "", server, Cell::Empty, &l.rate, weight.clone(), Cell::opt(analytic_rate));
        for (db, e) in &l.outage {
            let analytic = l
                .server
                .and_then(Server::tier)
                .and_then(|tier| outage_for(&net, l.case, tier, db_to_linear(*db)).ok().map(|o| o.probability));
            push("outage", &case, "", server, (*db).into(), e, weight.clone(), Cell::opt(analytic));
        }
    }
    t.note("alpha", alpha);
    t.note("topologies", r.topologies as f64);
    t.note("resamples", r.resamples as f64);
    t.note("reference_users", r.reference_users);

    let samples = args.samples.then(|| {
        let mut s = Table::new(&["case", "server", "sinr_db", "rate_nats"]);
        for x in &r.samples {
            s.push(vec![
                x.case.to_string().into(),
                x.server.name().into(),
                Cell::num(x.sinr_db),
                Cell::num(x.rate_nats),
            ]);
        }
        s
    });
    Ok((t, samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Association,
    D2dDensity,
    Rate,
    Outage,
    Queue,
    Steady,
    BaselineCompare,
    Simulate,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// Config key to vary (any numeric key of the config file).
    #[arg(long)]
    pub var: String,
    /// Values as start:stop:step or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Grid,
    /// Command evaluated at every grid point.
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Include Monte Carlo estimates where the metric supports them.
    #[arg(long)]
    pub with_mc: bool,
}

/// Evaluates `metric` at every grid value of `var`. Points run concurrently;
/// point `i` uses the seed of stream `i`.
pub fn sweep(ctx: &Ctx, args: &SweepArgs) -> anyhow::Result<Table> {
    let base = ctx.cfg.with_key(&args.var, args.grid.values()[0])?;
    base.network()?;
    let tables = map_indexed(args.grid.values().len(), ctx.exec(), |i| -> anyhow::Result<Table> {
        let value = args.grid.values()[i];
        let cfg = ctx.cfg.with_key(&args.var, value)?;
        let point = Ctx { cfg, seed: ctx.sub_seed(i), point: true };
        let t = run_metric(&point, args.metric, args.with_mc).with_context(|| format!("{} = {value}", args.var))?;
        let mut t = t.with_leading(&args.var, value.into());
        t.summary =
            std::mem::take(&mut t.summary).into_iter().map(|(k, v)| (format!("{}={value}/{k}", args.var), v)).collect();
        Ok(t)
    });
    let mut out: Option<Table> = None;
    for t in tables {
        let t = t?;
        match &mut out {
            Some(acc) => acc.extend(t),
            None => out = Some(t),
        }
    }
    Ok(out.expect("grids are non-empty"))
}

fn run_metric(ctx: &Ctx, metric: Metric, with_mc: bool) -> anyhow::Result<Table> {
    match metric {
        Metric::Association => association(ctx, &AssociationArgs { with_mc, ..Default::default() }),
        Metric::D2dDensity => d2d_density(ctx, &AlphaArgs::default()),
        Metric::Rate => rate(ctx, &RateArgs { with_mc, ..Default::default() }),
        Metric::Outage => outage(ctx, &OutageArgs { with_mc, ..Default::default() }),
        Metric::Queue => queue(ctx, &QueueArgs::default()),
        Metric::Steady => steady(ctx, &SteadyArgs::default()),
        Metric::BaselineCompare => baseline_compare(ctx, &BaselineArgs::default()),
        Metric::Simulate => Ok(simulate_cmd(ctx, &SimulateArgs::default())?.0),
    }
}
