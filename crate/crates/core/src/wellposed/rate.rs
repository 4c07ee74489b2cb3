use crate::error::{Error, Result};

/// Strictly increasing continuous `φ` with `φ(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateFunction {
    /// `φ(t) = c·tʳ`.
    Power { c: f64, r: f64 },
    /// Linear interpolation through `(0,0)` and the knots, continued with
    /// the last slope.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl RateFunction {
    pub fn power(c: f64, r: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidRate(format!("modulus c = {c} must be positive")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidRate(format!("rate r = {r} must be positive")));
        }
        Ok(RateFunction::Power { c, r })
    }

    pub fn linear(c: f64) -> Result<Self> {
        Self::power(c, 1.0)
    }

    /// Knots `(t_i, φ_i)` strictly increasing in both coordinates, all
    /// positive (the origin is implicit).
    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidRate("no knots".into()));
        }
        let mut prev = (0.0, 0.0);
        for &(t, p) in &knots {
            if !(t > prev.0 && p > prev.1) || !t.is_finite() || !p.is_finite() {
                return Err(Error::InvalidRate(format!(
                    "knots must be strictly increasing from the origin: ({t}, {p}) after {prev:?}"
                )));
            }
            prev = (t, p);
        }
        Ok(RateFunction::PiecewiseLinear(knots))
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return f64::INFINITY;
        }
        let t = t.max(0.0);
        match self {
            RateFunction::Power { c, r } => c * t.powf(*r),
            RateFunction::PiecewiseLinear(knots) => {
                let mut prev = (0.0, 0.0);
                for &(tk, pk) in knots {
                    if t <= tk {
                        return prev.1 + (pk - prev.1) * (t - prev.0) / (tk - prev.0);
                    }
                    prev = (tk, pk);
                }
                let n = knots.len();
                let before = if n >= 2 { knots[n - 2] } else { (0.0, 0.0) };
                let slope = (prev.1 - before.1) / (prev.0 - before.0);
                prev.1 + slope * (t - prev.0)
            }
        }
    }

    /// Exact inverse; `Power(c, r)⁻¹ = Power(c^{−1/r}, 1/r)`.
    pub fn inverse(&self) -> RateFunction {
        match self {
            RateFunction::Power { c, r } => RateFunction::Power { c: c.powf(-1.0 / r), r: 1.0 / r },
            RateFunction::PiecewiseLinear(knots) => {
                RateFunction::PiecewiseLinear(knots.iter().map(|&(t, p)| (p, t)).collect())
            }
        }
    }

    /// Whether the exact inverse modulus `c^{−1/r}` differs from the
    /// reciprocal `1/c` (the two conventions agree only for `r = 1` or `c = 1`).
    pub fn reciprocal_convention_differs(&self) -> bool {
        match self {
            RateFunction::Power { c, r } => (c.powf(-1.0 / r) - 1.0 / c).abs() > 1e-12 * (1.0 / c),
            RateFunction::PiecewiseLinear(_) => false,
        }
    }

    pub fn label(&self) -> String {
        match self {
            RateFunction::Power { c, r } => format!("{c}*t^{r}"),
            RateFunction::PiecewiseLinear(k) => {
                let pts: Vec<String> = k.iter().map(|(t, p)| format!("({t};{p})")).collect();
                format!("pl[{}]", pts.join(" "))
            }
        }
    }
}
