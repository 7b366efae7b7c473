use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NetworkConfig, Tier};

/// A K-tier Poisson network: per-tier densities [nodes/m²], powers [W] and the
/// common path-loss exponent. Tiers are indexed from 0.
///
/// Individual densities may be zero (an empty tier never wins association),
/// but at least one tier must be populated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierSpec {
    densities: Vec<f64>,
    powers: Vec<f64>,
    beta: f64,
}

impl TierSpec {
    pub fn new(densities: Vec<f64>, powers: Vec<f64>, beta: f64) -> Result<Self> {
        if densities.is_empty() {
            return Err(Error::domain("a tier specification needs at least one tier"));
        }
        if densities.len() != powers.len() {
            return Err(Error::domain(format!("{} densities but {} powers", densities.len(), powers.len())));
        }
        if densities.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::domain("tier densities must be finite and >= 0"));
        }
        if densities.iter().all(|d| *d == 0.0) {
            return Err(Error::domain("at least one tier must have a positive density"));
        }
        if powers.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::domain("tier powers must be finite and > 0"));
        }
        if !(beta.is_finite() && beta > 2.0) {
            return Err(Error::domain(format!("path-loss exponent must be > 2, got {beta}")));
        }
        Ok(Self { densities, powers, beta })
    }

    /// The three transmitting tiers (cache-enabled users, relays, BSs).
    pub fn three_tier(cfg: &NetworkConfig) -> Result<Self> {
        Self::new(cfg.tier_densities().to_vec(), cfg.tier_powers().to_vec(), cfg.beta)
    }

    /// Relays and BSs only, as seen by a user that never associates over D2D.
    pub fn infrastructure(cfg: &NetworkConfig) -> Result<Self> {
        Self::new(vec![cfg.lambda2, cfg.lambda3], vec![cfg.p2, cfg.p3], cfg.beta)
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::domain(format!("tier index {i} out of range for {} tiers", self.len())))
        }
    }

    /// `lambda_i P_i^(2/beta)`: the tier's share in every association race.
    fn weight(&self, i: usize) -> f64 {
        self.densities[i] * self.powers[i].powf(2.0 / self.beta)
    }

    fn total_weight(&self) -> f64 {
        (0..self.len()).map(|i| self.weight(i)).sum()
    }

    /// `sum_j lambda_j (P_j / P_i)^(2/beta)`, the effective density seen from
    /// a user served by tier `i`.
    pub fn effective_density(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self.total_weight() / self.powers[i].powf(2.0 / self.beta))
    }
}

/// Probability that the strongest received powers rank the tiers in `order`
/// (strongest first). `order` must be a permutation of `0..K`.
pub fn ordering_probability(tiers: &TierSpec, order: &[usize]) -> Result<f64> {
    let k = tiers.len();
    let mut seen = vec![false; k];
    if order.len() != k {
        return Err(Error::domain(format!("ordering of length {} for {k} tiers", order.len())));
    }
    for &t in order {
        if t >= k || seen[t] {
            return Err(Error::domain(format!("{order:?} is not a permutation of 0..{k}")));
        }
        seen[t] = true;
    }
    let mut remaining: f64 = order.iter().map(|&t| tiers.weight(t)).sum();
    let mut prob = 1.0;
    for (n, &t) in order.iter().enumerate().take(k - 1) {
        let w = tiers.weight(t);
        if remaining > 0.0 {
            prob *= w / remaining;
        } else {
            // only empty tiers are left; their order is arbitrary
            prob /= (k - n) as f64;
        }
        remaining -= w;
        if remaining < 0.0 {
            remaining = 0.0;
        }
    }
    Ok(prob)
}

/// Probability that tier `i` provides the strongest received power, `G_{K,i}`.
pub fn first_association_probability(tiers: &TierSpec, i: usize) -> Result<f64> {
    tiers.check_index(i)?;
    Ok(tiers.weight(i) / tiers.total_weight())
}

/// Probability that `tier` (relay or BS) is the stronger of the two
/// infrastructure tiers, `P_{i,j}`.
pub fn pairwise_association_probability(cfg: &NetworkConfig, tier: Tier) -> Result<f64> {
    let idx = match tier {
        Tier::Relay => 0,
        Tier::Bs => 1,
        Tier::D2d => return Err(Error::domain("pairwise association is defined for relay and BS only")),
    };
    first_association_probability(&TierSpec::infrastructure(cfg)?, idx)
}

/// Density of the distance to the serving node of tier `i`, conditioned on
/// tier `i` winning association among `tiers`.
///
/// Pass [`TierSpec::three_tier`] for users that may associate over D2D and
/// [`TierSpec::infrastructure`] for cache-enabled users.
pub fn nearest_distance_pdf(tiers: &TierSpec, i: usize, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("distance must be >= 0, got {x}")));
    }
    let s = tiers.effective_density(i)?;
    if tiers.densities[i] == 0.0 {
        return Err(Error::domain(format!("tier {i} is empty and never serves")));
    }
    Ok(2.0 * PI * s * x * (-PI * s * x * x).exp())
}

/// Joint density of the distance `x` to the nearest cache-enabled user and the
/// distance `y` to the serving tier-`serving` node, conditioned on the D2D tier
/// being strongest and `serving` being the stronger infrastructure tier.
pub fn joint_distance_pdf_case3(cfg: &NetworkConfig, serving: Tier, x: f64, y: f64) -> Result<f64> {
    if x.is_nan() || y.is_nan() || x < 0.0 || y < 0.0 {
        return Err(Error::domain(format!("distances must be >= 0, got ({x}, {y})")));
    }
    let other =
        serving.other_infrastructure().ok_or_else(|| Error::domain("Case-3 users are served by a relay or a BS"))?;
    let tiers = TierSpec::three_tier(cfg)?;
    let order = [Tier::D2d.index(), serving.index(), other.index()];
    let norm = ordering_probability(&tiers, &order)?;
    if norm == 0.0 {
        return Err(Error::domain("Case 3 has zero probability for this configuration"));
    }
    let delta = 2.0 / cfg.beta;
    let (p1, pj) = (cfg.p1, cfg.power(serving));
    if y <= (pj / p1).powf(1.0 / cfg.beta) * x {
        return Ok(0.0);
    }
    let l1 = cfg.lambda1();
    let lj = cfg.density(serving);
    let lk = cfg.density(other);
    let pk = cfg.power(other);
    let exponent = -PI * l1 * x * x - PI * y * y * (lj + lk * (pk / pj).powf(delta));
    Ok(4.0 * PI * PI * l1 * lj * x * y / norm * exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quad::{integrate, integrate_semi_infinite, QuadratureSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..k {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn symmetric_tiers() {
        let two = TierSpec::new(vec![1e-4; 2], vec![1.0; 2], 4.0).unwrap();
        assert_relative_eq!(ordering_probability(&two, &[1, 0]).unwrap(), 0.5, epsilon = 1e-15);
        let three = TierSpec::new(vec![1e-4; 3], vec![2.0; 3], 3.5).unwrap();
        for p in permutations(3) {
            assert_relative_eq!(ordering_probability(&three, &p).unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        }
        for i in 0..3 {
            assert_relative_eq!(first_association_probability(&three, i).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_non_permutations() {
        let t = TierSpec::three_tier(&NetworkConfig::default()).unwrap();
        assert!(ordering_probability(&t, &[0, 0, 1]).is_err());
        assert!(ordering_probability(&t, &[0, 1]).is_err());
        assert!(ordering_probability(&t, &[0, 1, 3]).is_err());
        assert!(first_association_probability(&t, 3).is_err());
    }

    #[test]
    fn pairwise_probabilities_are_complementary() {
        let cfg = NetworkConfig::default();
        let p23 = pairwise_association_probability(&cfg, Tier::Relay).unwrap();
        let p32 = pairwise_association_probability(&cfg, Tier::Bs).unwrap();
        assert_relative_eq!(p23 + p32, 1.0, epsilon = 1e-15);
        let equal = NetworkConfig { lambda2: cfg.lambda3, p2: cfg.p3, ..cfg.clone() };
        assert_relative_eq!(pairwise_association_probability(&equal, Tier::Bs).unwrap(), 0.5, epsilon = 1e-15);
        assert!(pairwise_association_probability(&cfg, Tier::D2d).is_err());
    }

    #[test]
    fn empty_tier_never_wins() {
        let cfg = NetworkConfig { alpha: 0.0, ..NetworkConfig::default() };
        let t = TierSpec::three_tier(&cfg).unwrap();
        assert_eq!(first_association_probability(&t, 0).unwrap(), 0.0);
        let total: f64 = permutations(3).iter().map(|p| ordering_probability(&t, p).unwrap()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        let two_empty = TierSpec::new(vec![0.0, 1e-5, 0.0], vec![1.0, 2.0, 3.0], 4.0).unwrap();
        let total: f64 = permutations(3).iter().map(|p| ordering_probability(&two_empty, p).unwrap()).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-14);
        assert!(TierSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 4.0).is_err());
    }

    #[test]
    fn nearest_distance_pdf_normalizes() {
        let cfg = NetworkConfig::default();
        let spec = QuadratureSpec::default().with_length_scale(300.0);
        for tiers in [TierSpec::three_tier(&cfg).unwrap(), TierSpec::infrastructure(&cfg).unwrap()] {
            for i in 0..tiers.len() {
                let total = integrate_semi_infinite(|x| nearest_distance_pdf(&tiers, i, x).unwrap(), &spec).unwrap();
                assert_relative_eq!(total.value, 1.0, max_relative = 1e-8);
            }
        }
        assert!(nearest_distance_pdf(&TierSpec::three_tier(&cfg).unwrap(), 0, -1.0).is_err());
    }

    #[test]
    fn single_populated_tier_gives_rayleigh_distance() {
        let lambda = 1e-4;
        let t = TierSpec::new(vec![lambda, 0.0, 0.0], vec![1.0, 5.0, 20.0], 4.0).unwrap();
        for x in [1.0, 30.0, 120.0] {
            let rayleigh = 2.0 * PI * lambda * x * (-PI * lambda * x * x).exp();
            assert_relative_eq!(nearest_distance_pdf(&t, 0, x).unwrap(), rayleigh, max_relative = 1e-14);
        }
    }

    #[test]
    fn case3_joint_pdf_normalizes_and_respects_support() {
        let cfg = NetworkConfig::default();
        let inner = QuadratureSpec::with_tolerances(1e-10, 1e-16);
        let outer = QuadratureSpec::with_tolerances(1e-8, 1e-14).with_length_scale(20.0);
        for serving in [Tier::Relay, Tier::Bs] {
            let scale = (cfg.power(serving) / cfg.p1).powf(1.0 / cfg.beta);
            let total = integrate_semi_infinite(
                |x| {
                    let lo = scale * x;
                    integrate_semi_infinite(
                        |s| joint_distance_pdf_case3(&cfg, serving, x, lo + s).unwrap(),
                        &inner.with_length_scale(300.0),
                    )
                    .unwrap()
                    .value
                },
                &outer,
            )
            .unwrap();
            assert_relative_eq!(total.value, 1.0, max_relative = 1e-6);
            assert_eq!(joint_distance_pdf_case3(&cfg, serving, 10.0, 0.99 * scale * 10.0).unwrap(), 0.0);
        }
        assert!(joint_distance_pdf_case3(&cfg, Tier::D2d, 1.0, 5.0).is_err());
        // finite-range sanity of the inner integral
        let r = integrate(|y| joint_distance_pdf_case3(&cfg, Tier::Bs, 5.0, y).unwrap(), 0.0, 1.0, &inner).unwrap();
        assert_eq!(r.value, 0.0);
    }

    fn tiers_strategy(k: usize) -> impl Strategy<Value = TierSpec> {
        (proptest::collection::vec(1e-7..1e-3f64, k), proptest::collection::vec(1e-3..1e2f64, k), 2.1..6.0f64)
            .prop_map(|(d, p, b)| TierSpec::new(d, p, b).unwrap())
    }

    proptest! {
        #[test]
        fn orderings_partition_probability(t in (2usize..=4).prop_flat_map(tiers_strategy)) {
            let total: f64 = permutations(t.len()).iter().map(|p| ordering_probability(&t, p).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn first_association_marginalizes_orderings(t in (2usize..=4).prop_flat_map(tiers_strategy)) {
            for i in 0..t.len() {
                let marginal: f64 = permutations(t.len())
                    .iter()
                    .filter(|p| p[0] == i)
                    .map(|p| ordering_probability(&t, p).unwrap())
                    .sum();
                let g = first_association_probability(&t, i).unwrap();
                prop_assert!((marginal - g).abs() < 1e-12);
            }
        }

        #[test]
        fn association_is_scale_invariant(t in tiers_strategy(3), c in 1e-3..1e3f64) {
            let scaled_p = TierSpec::new(
                t.densities().to_vec(),
                t.powers().iter().map(|p| p * c).collect(),
                t.beta(),
            ).unwrap();
            let scaled_d = TierSpec::new(
                t.densities().iter().map(|d| d * c).collect(),
                t.powers().to_vec(),
                t.beta(),
            ).unwrap();
            for i in 0..3 {
                let g = first_association_probability(&t, i).unwrap();
                prop_assert!((first_association_probability(&scaled_p, i).unwrap() - g).abs() < 1e-12);
                prop_assert!((first_association_probability(&scaled_d, i).unwrap() - g).abs() < 1e-12);
            }
        }
    }
}
