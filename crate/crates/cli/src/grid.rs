use std::fmt;
use std::str::FromStr;

const MAX_POINTS: usize = 1_000_000;

/// A non-empty, strictly monotone list of values given as `start:stop:step`
/// (both ends inclusive) or as a comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl Grid {
    pub fn single(x: f64) -> Self {
        Grid(vec![x])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Removes the representation noise of `start + k * step` (0.30000000000000004 -> 0.3).
fn tidy(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if (r - x).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let values = match parts.as_slice() {
            [a, b, step] => {
                let (a, b, step) = (number(a)?, number(b)?, number(step)?);
                if step == 0.0 || (b - a) * step < 0.0 {
                    return Err(format!("step {step} does not lead from {a} to {b}"));
                }
                let n = ((b - a) / step + 1e-9).floor();
                if n >= MAX_POINTS as f64 {
                    return Err(format!("grid `{s}` has more than {MAX_POINTS} points"));
                }
                (0..=n as usize).map(|k| tidy(a + k as f64 * step)).collect()
            }
            [_] => s.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
            _ => return Err(format!("`{s}` is neither start:stop:step nor a comma-separated list")),
        };
        let grid = Grid(values);
        grid.check()?;
        Ok(grid)
    }
}

impl Grid {
    fn check(&self) -> Result<(), String> {
        let v = &self.0;
        if v.is_empty() {
            return Err("grid is empty".into());
        }
        let up = v.windows(2).all(|w| w[0] < w[1]);
        let down = v.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(format!("grid {self} is not strictly monotone"));
        }
        Ok(())
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}
