use cachenet::exec::Execution;
use cachenet::geometry::{state_row, AccessCase, Backhaul, Server};
use cachenet::montecarlo::{measure_realization, simulate, BoundaryMode, McReport, McSettings, SpatialRealization};
use cachenet::network::Network;
use cachenet::outage::outage_case1;
use cachenet::specfun::{integrate_semi_infinite, QuadratureSpec};
use cachenet::stats::{ks_critical_value, ks_statistic, EmpiricalEstimate};
use cachenet::{NetworkConfig, Tier};
use std::f64::consts::PI;

fn torus(side: f64, topologies: usize, cap: Option<usize>) -> McSettings {
    McSettings { side, boundary: BoundaryMode::Torus, topologies, per_case_cap: cap, ..McSettings::default() }
}

fn z_between(a: &EmpiricalEstimate, b: &EmpiricalEstimate) -> f64 {
    (a.estimate - b.estimate) / a.standard_error.hypot(b.standard_error)
}

fn case1_outage(rep: &McReport, k: usize) -> EmpiricalEstimate {
    rep.link(AccessCase::One, None).unwrap().outage[k].1
}

#[test]
fn same_seed_gives_identical_reports() {
    let cfg = NetworkConfig::default();
    let s = McSettings { keep_samples: true, ..torus(2000.0, 6, Some(20)) };
    let a = simulate(&cfg, &s).unwrap();
    let b = simulate(&cfg, &s).unwrap();
    assert_eq!(a, b);
    let seq = simulate(&cfg, &McSettings { execution: Execution::Sequential, ..s.clone() }).unwrap();
    assert_eq!(a, seq);
    let other = simulate(&cfg, &McSettings { seed: 2, ..s }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn association_fractions_sum_to_one_and_match_lemma() {
    let cfg = NetworkConfig::default();
    let net = Network::new(cfg.clone()).unwrap();
    let rep = simulate(&cfg, &torus(4000.0, 40, Some(0))).unwrap();
    assert!(rep.reference_users > 1e4);
    let total: f64 = Tier::ALL.iter().map(|&t| rep.association_of(t).estimate).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for t in Tier::ALL {
        let e = rep.association_of(t);
        assert!(e.covers(net.association(t), 3.0), "{t:?}: {e:?} vs {}", net.association(t));
    }
    let p23 = net.infrastructure_association(Tier::Relay).unwrap();
    assert!(rep.infrastructure[0].covers(p23, 3.0), "{:?} vs {p23}", rep.infrastructure[0]);
}

#[test]
fn equal_weight_tiers_split_evenly() {
    // lambda_i * P_i^(2/beta) is the same for all three tiers
    let l = 2.0 / (PI * 500.0 * 500.0);
    let cfg = NetworkConfig {
        lambda0: 10.0 * l,
        alpha: 0.1,
        lambda2: 4.0 * l,
        lambda3: l,
        p1: 1.0,
        p2: 1.0 / 16.0,
        p3: 1.0,
        ..NetworkConfig::default()
    };
    let rep = simulate(&cfg, &torus(6000.0, 60, Some(0))).unwrap();
    for t in Tier::ALL {
        assert!(rep.association_of(t).covers(1.0 / 3.0, 3.0), "{t:?}: {:?}", rep.association_of(t));
    }
}

#[test]
fn state_fractions_match_table_composition() {
    let cfg = NetworkConfig::default();
    let net = Network::new(cfg.clone()).unwrap();
    let rep = simulate(&cfg, &torus(4000.0, 40, Some(0))).unwrap();
    let mut total = 0.0;
    for case in AccessCase::ALL {
        for bh in [Backhaul::Free, Backhaul::Needed] {
            for server in Server::ALL {
                let e = rep.states[state_row(case, bh)][server.index()];
                let a = net.states().get(case, bh, server);
                total += e.estimate;
                if a == 0.0 {
                    assert_eq!(e.estimate, 0.0, "{case} {bh:?} {server:?}");
                } else {
                    assert!(e.covers(a, 3.5), "{case} {bh:?} {server:?}: {e:?} vs {a}");
                }
            }
        }
    }
    assert!((total - 1.0).abs() < 1e-12);

    for case in AccessCase::ALL {
        let rows = [Backhaul::Free, Backhaul::Needed].map(|b| state_row(case, b));
        let sum: f64 = rows.iter().flat_map(|&r| rep.states[r].iter()).map(|e| e.estimate).sum();
        assert!((rep.cases[case.index()].estimate - sum).abs() < 1e-12, "{case}");
    }
    for server in Server::ALL {
        let sum: f64 = rep.states.iter().map(|row| row[server.index()].estimate).sum();
        let e = rep.servers[server.index()];
        assert!((e.estimate - sum).abs() < 1e-12, "{server:?}");
        assert!(e.standard_error > 0.0 || e.estimate == 0.0, "{server:?}: {e:?}");
    }
}

#[test]
fn cached_fractions_grow_with_skew() {
    let mut last = 0.0;
    for gamma in [0.4, 0.8, 1.2, 1.8] {
        let cfg = NetworkConfig { gamma, ..NetworkConfig::default() };
        let rep = simulate(&cfg, &torus(2000.0, 10, Some(0))).unwrap();
        let frac: f64 = [AccessCase::One, AccessCase::Four]
            .iter()
            .flat_map(|&c| [Backhaul::Free, Backhaul::Needed].map(|b| state_row(c, b)))
            .map(|row| rep.states[row].iter().map(|e| e.estimate).sum::<f64>())
            .sum();
        assert!(frac > last, "gamma {gamma}: {frac} <= {last}");
        last = frac;
    }
}

#[test]
fn nearest_distances_follow_rayleigh_law() {
    let cfg = NetworkConfig { alpha: 0.1, ..NetworkConfig::default() };
    let rep = simulate(&cfg, &torus(3000.0, 400, Some(0))).unwrap();
    let densities = [cfg.alpha * cfg.lambda0, cfg.lambda2, cfg.lambda3];
    for (i, lambda) in densities.into_iter().enumerate() {
        let d = &rep.nearest_distances[i];
        let ks = ks_statistic(d, |r| 1.0 - (-PI * lambda * r * r).exp());
        let crit = ks_critical_value(d.len(), 0.01);
        assert!(ks < crit, "tier {}: D = {ks} >= {crit}", i + 1);
    }
}

#[test]
fn outage_is_monotone_and_bounded() {
    let cfg = NetworkConfig::default();
    let s = McSettings { thresholds_db: vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0], ..torus(2000.0, 8, Some(30)) };
    let rep = simulate(&cfg, &s).unwrap();
    assert!(!rep.links.is_empty());
    for link in &rep.links {
        for w in link.outage.windows(2) {
            assert!(w[0].1.estimate <= w[1].1.estimate, "{link:?}");
        }
        assert!(link.outage.iter().all(|(_, e)| (0.0..=1.0).contains(&e.estimate)));
    }
}

#[test]
fn case2_rate_below_case1_rate() {
    let cfg = NetworkConfig::default();
    let rep = simulate(&cfg, &torus(4000.0, 30, Some(60))).unwrap();
    let r1 = rep.link(AccessCase::One, None).unwrap().rate;
    let r2 = rep.link(AccessCase::Two, None).unwrap().rate;
    assert!(r2.estimate < r1.estimate, "{r2:?} vs {r1:?}");
}

#[test]
fn case1_sinr_distribution_is_unchanged_below_threshold_alpha() {
    // alpha = 0.05 and 0.1 are both below alpha*, so every cache-enabled user
    // transmits and the Case-1 interference scale is the same.
    let s = McSettings { thresholds_db: vec![-10.0, -5.0, 0.0, 5.0], ..torus(4000.0, 60, Some(60)) };
    let a = simulate(&NetworkConfig { alpha: 0.05, ..NetworkConfig::default() }, &s).unwrap();
    let b = simulate(&NetworkConfig { alpha: 0.1, ..NetworkConfig::default() }, &McSettings { seed: 7, ..s }).unwrap();
    for k in 0..4 {
        let z = z_between(&case1_outage(&a, k), &case1_outage(&b, k));
        assert!(z.abs() < 3.0, "threshold {k}: z = {z}");
    }
}

#[test]
fn margin_and_torus_agree_and_zero_margin_shows_edge_bias() {
    let cfg = NetworkConfig::default();
    let margin = |m: f64| McSettings {
        boundary: BoundaryMode::CentralMargin { margin: m },
        topologies: 200,
        per_case_cap: Some(60),
        ..McSettings::default()
    };
    let central = simulate(&cfg, &margin(500.0)).unwrap();
    let wrapped = simulate(&cfg, &McSettings { seed: 3, ..torus(2000.0, 60, Some(60)) }).unwrap();
    let z = z_between(&case1_outage(&central, 0), &case1_outage(&wrapped, 0));
    assert!(z.abs() < 3.0, "margin vs torus z = {z}");

    // edge users see a truncated interference field, so outage drops
    let analytic = outage_case1(&Network::new(cfg.clone()).unwrap(), Tier::Bs, 0.1).unwrap().probability;
    let edge = case1_outage(&simulate(&cfg, &McSettings { seed: 5, ..margin(0.0) }).unwrap(), 0);
    let inner = case1_outage(&central, 0);
    assert!(edge.estimate < inner.estimate, "{edge:?} vs {inner:?}");
    assert!(analytic - edge.estimate > 3.0 * edge.standard_error, "{edge:?} vs {analytic}");
    assert!((analytic - inner.estimate).abs() < (analytic - edge.estimate).abs());
}

/// One user, a BS at `distance` and a relay so far away that it is negligible.
fn lone_link(distance: f64) -> SpatialRealization {
    let far = 1e7;
    SpatialRealization {
        side: 2.0 * far,
        users: vec![[far, far]],
        cache_enabled: vec![false],
        active: vec![false],
        relays: vec![[1.5 * far, far]],
        bss: vec![[far + distance, far]],
    }
}

#[test]
fn noise_limited_link_matches_quadrature() {
    let distance: f64 = 200.0;
    let cfg0 = NetworkConfig { alpha: 0.0, ..NetworkConfig::default() };
    let snr = 10.0;
    let noise = cfg0.p3 * distance.powf(-cfg0.beta) / snr;
    let cfg = NetworkConfig { noise, ..cfg0 };
    let real = lone_link(distance);
    let s = McSettings {
        boundary: BoundaryMode::CentralMargin { margin: 0.0 },
        fading_draws: 40_000,
        keep_samples: true,
        thresholds_db: vec![0.0, 10.0],
        ..McSettings::default()
    };
    let tally = measure_realization(&cfg, &real, &s, &mut cachenet::exec::stream_rng(11, 0)).unwrap();
    assert_eq!(tally.samples.len(), 40_000);
    assert!(tally.samples.iter().all(|x| x.case == AccessCase::One && x.server == Server::Bs));

    let rates: Vec<f64> = tally.samples.iter().map(|x| x.rate_nats).collect();
    let mc = EmpiricalEstimate::from_samples(&rates);
    let exact = integrate_semi_infinite(|g| (snr * g).ln_1p() * (-g).exp(), &QuadratureSpec::default()).unwrap().value;
    assert!(mc.covers(exact, 3.5), "{mc:?} vs {exact}");

    // P(SINR <= t) = 1 - exp(-t / snr) for a single Rayleigh link
    for t_db in [0.0f64, 10.0] {
        let t = 10f64.powf(t_db / 10.0);
        let hits: Vec<f64> = tally.samples.iter().map(|x| f64::from(u8::from(x.sinr_db <= t_db))).collect();
        let e = EmpiricalEstimate::from_samples(&hits);
        assert!(e.covers(1.0 - (-t / snr).exp(), 3.5), "{t_db} dB: {e:?}");
    }
}
