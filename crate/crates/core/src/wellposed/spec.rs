use crate::error::{Error, Result};

/// Finite surrogate for "there are ε > 0 and neighborhoods U, V".
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSpec {
    pub rho_x: f64,
    pub rho_y: f64,
    pub epsilon: f64,
    /// Decreasing scales in `(0, ε)`.
    pub t_values: Vec<f64>,
    /// Grid points per axis for `U` and `V`.
    pub grid_density: usize,
    /// Number of sampled directions of `M` (and `L` for probes).
    pub target_dirs: usize,
    /// Radial fractions of target balls are `k/R` for `k < R` plus `1 − 1e-6`.
    pub radial_steps: usize,
    /// Slack for strict inequalities; margins within it are INCONCLUSIVE.
    pub slack: f64,
    /// Witness violations below this are treated as boundary cases when
    /// comparing verdicts.
    pub boundary_band: f64,
    /// Retries with halved radii before a failure is reported.
    pub retries: usize,
}

pub const DEFAULT_T_COUNT: usize = 6;

impl NeighborhoodSpec {
    pub fn new(rho_x: f64, rho_y: f64, epsilon: f64) -> Result<Self> {
        let spec = Self {
            rho_x,
            rho_y,
            epsilon,
            t_values: geometric_scales(epsilon / 2.0, DEFAULT_T_COUNT),
            grid_density: 21,
            target_dirs: 64,
            radial_steps: 4,
            slack: 1e-9,
            boundary_band: 1e-6,
            retries: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_t_values(mut self, t_values: Vec<f64>) -> Result<Self> {
        self.t_values = t_values;
        self.validate()?;
        Ok(self)
    }

    pub fn with_grid_density(mut self, d: usize) -> Result<Self> {
        self.grid_density = d;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidParameter(s));
        if !(self.rho_x > 0.0 && self.rho_y > 0.0 && self.epsilon > 0.0) {
            return bad(format!(
                "radii and epsilon must be positive (rho_x {}, rho_y {}, epsilon {})",
                self.rho_x, self.rho_y, self.epsilon
            ));
        }
        if self.grid_density < 3 {
            return bad(format!("grid_density {} < 3", self.grid_density));
        }
        if self.t_values.is_empty() {
            return bad("t_values is empty".into());
        }
        for w in self.t_values.windows(2) {
            if !(w[1] < w[0]) {
                return bad(format!("t_values must be decreasing: {} then {}", w[0], w[1]));
            }
        }
        if let Some(t) = self.t_values.iter().find(|t| !(**t > 0.0 && **t < self.epsilon)) {
            return bad(format!("t = {t} outside (0, epsilon = {})", self.epsilon));
        }
        if self.radial_steps == 0 || self.target_dirs == 0 {
            return bad("radial_steps and target_dirs must be positive".into());
        }
        Ok(())
    }

    pub fn radial_fractions(&self) -> Vec<f64> {
        let r = self.radial_steps;
        (1..r).map(|k| k as f64 / r as f64).chain(std::iter::once(1.0 - 1e-6)).collect()
    }

    /// Radii and ε halved; scales outside the new `(0, ε)` are dropped.
    pub fn halved(&self) -> Self {
        let mut s = self.clone();
        s.rho_x /= 2.0;
        s.rho_y /= 2.0;
        s.epsilon /= 2.0;
        s.t_values.retain(|t| *t < s.epsilon);
        if s.t_values.is_empty() {
            s.t_values = geometric_scales(s.epsilon / 2.0, DEFAULT_T_COUNT);
        }
        s
    }

    /// Scales refined by `extra` further halvings.
    pub fn refined(&self, extra: usize) -> Self {
        let mut s = self.clone();
        let mut last = *s.t_values.last().expect("nonempty");
        for _ in 0..extra {
            last /= 2.0;
            s.t_values.push(last);
        }
        s
    }
}

/// `first, first/2, first/4, ...` (`count` values).
pub fn geometric_scales(first: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| first * 0.5f64.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let s = NeighborhoodSpec::new(0.25, 0.25, 0.5).unwrap();
        assert_eq!(s.t_values[0], 0.25);
        assert_eq!(s.t_values.len(), DEFAULT_T_COUNT);
        assert_eq!(s.grid_density, 21);
        assert_eq!(s.radial_fractions(), vec![0.25, 0.5, 0.75, 1.0 - 1e-6]);
    }

    #[test]
    fn validation() {
        let s = NeighborhoodSpec::new(0.25, 0.25, 0.5).unwrap();
        assert!(s.clone().with_grid_density(2).is_err());
        assert!(s.clone().with_t_values(vec![0.6]).is_err());
        assert!(s.clone().with_t_values(vec![0.1, 0.2]).is_err());
        assert!(NeighborhoodSpec::new(0.0, 1.0, 1.0).is_err());
        let h = s.halved();
        assert_eq!(h.epsilon, 0.25);
        assert!(h.t_values.iter().all(|t| *t < 0.25));
    }
}
