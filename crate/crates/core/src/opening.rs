//! Time profiles `f_n(t)` that switch the atom–field coupling on and off.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpeningFunction {
    /// `f ≡ 1`.
    Constant,
    /// `sin²(πt/T)` on `[0, T]`, zero elsewhere.
    SinSqWindow { duration: f64 },
    /// `cos²(πt/2T)` on `[0, T]`, zero elsewhere.
    CosSqWindow { duration: f64 },
    /// `e^{t/τ}` for `t < 0`, then `inner` for `t ≥ 0`.
    ExpRampThenWindow {
        ramp_time: f64,
        inner: Box<OpeningFunction>,
    },
}

/// One term `c·e^{iνt}` of an opening function written as a finite sum of
/// exponentials on its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub coeff: Complex64,
    pub freq: f64,
}

impl OpeningFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            OpeningFunction::Constant => Ok(()),
            OpeningFunction::SinSqWindow { duration } | OpeningFunction::CosSqWindow { duration } => {
                if duration.is_finite() && *duration >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameters(format!(
                        "window duration must be finite and >= 0, got {duration}"
                    )))
                }
            }
            OpeningFunction::ExpRampThenWindow { ramp_time, inner } => {
                if !(ramp_time.is_finite() && *ramp_time > 0.0) {
                    return Err(Error::InvalidParameters(format!(
                        "ramp time must be finite and > 0, got {ramp_time}"
                    )));
                }
                if matches!(**inner, OpeningFunction::ExpRampThenWindow { .. }) {
                    return Err(Error::InvalidParameters("nested ramps are not supported".into()));
                }
                inner.validate()
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            OpeningFunction::Constant => 1.0,
            OpeningFunction::SinSqWindow { duration } => {
                if t < 0.0 || t > *duration || *duration == 0.0 {
                    0.0
                } else {
                    (PI * t / duration).sin().powi(2)
                }
            }
            OpeningFunction::CosSqWindow { duration } => {
                if t < 0.0 || t > *duration || *duration == 0.0 {
                    0.0
                } else {
                    (PI * t / (2.0 * duration)).cos().powi(2)
                }
            }
            OpeningFunction::ExpRampThenWindow { ramp_time, inner } => {
                if t < 0.0 {
                    (t / ramp_time).exp()
                } else {
                    inner.eval(t)
                }
            }
        }
    }

    /// End of the support on `t ≥ 0`; `None` if the profile never closes.
    pub fn window_end(&self) -> Option<f64> {
        match self {
            OpeningFunction::Constant => None,
            OpeningFunction::SinSqWindow { duration } | OpeningFunction::CosSqWindow { duration } => {
                Some(*duration)
            }
            OpeningFunction::ExpRampThenWindow { inner, .. } => inner.window_end(),
        }
    }

    /// The profile restricted to `[0, window_end]` as `Σ c_j e^{iν_j t}`.
    pub fn exp_terms(&self) -> Vec<ExpTerm> {
        let term = |c: f64, freq: f64| ExpTerm {
            coeff: Complex64::new(c, 0.0),
            freq,
        };
        match self {
            OpeningFunction::Constant => vec![term(1.0, 0.0)],
            OpeningFunction::SinSqWindow { duration } => {
                let w = 2.0 * PI / duration;
                vec![term(0.5, 0.0), term(-0.25, w), term(-0.25, -w)]
            }
            OpeningFunction::CosSqWindow { duration } => {
                let w = PI / duration;
                vec![term(0.5, 0.0), term(0.25, w), term(0.25, -w)]
            }
            OpeningFunction::ExpRampThenWindow { inner, .. } => inner.exp_terms(),
        }
    }

    /// Largest angular frequency present in the profile on `t ≥ 0`.
    pub fn bandwidth(&self) -> f64 {
        self.exp_terms().iter().map(|t| t.freq.abs()).fold(0.0, f64::max)
    }

    /// The `t ≥ 0` part, with any adiabatic ramp stripped.
    pub fn post_ramp(&self) -> &OpeningFunction {
        match self {
            OpeningFunction::ExpRampThenWindow { inner, .. } => inner,
            f => f,
        }
    }

    /// True if the profile vanishes identically on `t ≥ 0`.
    pub fn is_zero_after_start(&self) -> bool {
        self.window_end() == Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_terms(f: &OpeningFunction, t: f64) -> f64 {
        f.exp_terms()
            .iter()
            .map(|e| e.coeff * Complex64::from_polar(1.0, e.freq * t))
            .sum::<Complex64>()
            .re
    }

    #[test]
    fn exponential_decomposition_matches_profile() {
        let profiles = [
            OpeningFunction::Constant,
            OpeningFunction::SinSqWindow { duration: 0.1 },
            OpeningFunction::CosSqWindow { duration: 0.37 },
        ];
        for f in &profiles {
            let end = f.window_end().unwrap_or(1.0);
            for i in 0..=50 {
                let t = end * i as f64 / 50.0;
                assert!((f.eval(t) - from_terms(f, t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn windows_vanish_outside_and_stay_in_unit_interval() {
        let f = OpeningFunction::SinSqWindow { duration: 0.1 };
        assert_eq!(f.eval(-0.01), 0.0);
        assert_eq!(f.eval(0.11), 0.0);
        let g = OpeningFunction::CosSqWindow { duration: 0.1 };
        assert_eq!(g.eval(0.0), 1.0);
        assert_eq!(g.eval(0.2), 0.0);
        for i in 0..=100 {
            let t = i as f64 * 0.001;
            for v in [f.eval(t), g.eval(t)] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn ramp_then_window() {
        let f = OpeningFunction::ExpRampThenWindow {
            ramp_time: 2.0,
            inner: Box::new(OpeningFunction::CosSqWindow { duration: 1.0 }),
        };
        assert!((f.eval(-2.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(1.5), 0.0);
        assert_eq!(f.window_end(), Some(1.0));
        assert!(f.validate().is_ok());
        let bad = OpeningFunction::ExpRampThenWindow {
            ramp_time: 0.0,
            inner: Box::new(OpeningFunction::Constant),
        };
        assert!(bad.validate().is_err());
    }
}
