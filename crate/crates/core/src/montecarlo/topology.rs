use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NetworkConfig;

pub type Point = [f64; 2];

/// How reference users are shielded from the finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// Only users at least `margin` metres from every edge are referenced.
    CentralMargin { margin: f64 },
    /// Distances wrap around the window; every user is referenced.
    Torus,
}

impl Default for BoundaryMode {
    fn default() -> Self {
        BoundaryMode::CentralMargin { margin: 500.0 }
    }
}

/// One draw of the three node processes in a square window `[0, side)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialRealization {
    pub side: f64,
    pub users: Vec<Point>,
    /// Users that cache content (and may act as D2D transmitters).
    pub cache_enabled: Vec<bool>,
    /// Cache-enabled users that transmit; always false for the others.
    pub active: Vec<bool>,
    pub relays: Vec<Point>,
    pub bss: Vec<Point>,
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::Simulation(format!("poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as usize)
}

fn uniform_points<R: Rng + ?Sized>(n: usize, side: f64, rng: &mut R) -> Vec<Point> {
    (0..n).map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side]).collect()
}

/// Samples users, relays and BSs as independent Poisson processes; users are
/// cache-enabled with probability `alpha`, and each cache-enabled user is
/// active with probability `active_fraction`.
pub fn sample_topology<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    active_fraction: f64,
    side: f64,
    rng: &mut R,
) -> Result<SpatialRealization> {
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::domain(format!("window side must be > 0, got {side}")));
    }
    let area = side * side;
    let n_users = poisson_count(cfg.lambda0 * area, rng)?;
    let users = uniform_points(n_users, side, rng);
    let mut cache_enabled = Vec::with_capacity(n_users);
    let mut active = Vec::with_capacity(n_users);
    for _ in 0..n_users {
        let caching = rng.random::<f64>() < cfg.alpha;
        let mark = rng.random::<f64>();
        cache_enabled.push(caching);
        active.push(caching && mark < active_fraction);
    }
    let n_relays = poisson_count(cfg.lambda2 * area, rng)?;
    let relays = uniform_points(n_relays, side, rng);
    let n_bss = poisson_count(cfg.lambda3 * area, rng)?;
    let bss = uniform_points(n_bss, side, rng);
    Ok(SpatialRealization { side, users, cache_enabled, active, relays, bss })
}

impl SpatialRealization {
    /// Squared distance under the given boundary mode.
    pub fn dist2(&self, boundary: BoundaryMode, a: Point, b: Point) -> f64 {
        let mut dx = (a[0] - b[0]).abs();
        let mut dy = (a[1] - b[1]).abs();
        if let BoundaryMode::Torus = boundary {
            dx = dx.min(self.side - dx);
            dy = dy.min(self.side - dy);
        }
        dx * dx + dy * dy
    }

    /// Indices of users whose statistics are recorded.
    pub fn reference_users(&self, boundary: BoundaryMode) -> Result<Vec<usize>> {
        match boundary {
            BoundaryMode::Torus => Ok((0..self.users.len()).collect()),
            BoundaryMode::CentralMargin { margin } => {
                if !(margin >= 0.0 && 2.0 * margin < self.side) {
                    return Err(Error::domain(format!(
                        "margin {margin} leaves no central region in a {} m window",
                        self.side
                    )));
                }
                let hi = self.side - margin;
                Ok((0..self.users.len())
                    .filter(|&i| {
                        let [x, y] = self.users[i];
                        x >= margin && x <= hi && y >= margin && y <= hi
                    })
                    .collect())
            }
        }
    }
}
