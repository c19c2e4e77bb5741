//! Vacuum correlation functions of the displacement operators at two sites:
//!
//! ```text
//! F_a(τ)  = ⟨0|{q_A(t′), q_B(t″)}|0⟩ = Σ_k 2 Re(λ_Ak λ*_Bk e^{iω_k τ})
//! iF_c(τ) = ⟨0|[q_A(t′), q_B(t″)]|0⟩,  F_c(τ) = Σ_k 2 Im(λ_Ak λ*_Bk e^{iω_k τ})
//! ```
//!
//! with `τ = t″ − t′`. `F_c` carries direct signalling; its rise marks the
//! discrete light cone.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::modes::ModeBasis;
use crate::{Error, Result};

/// Precomputed `λ_Ak λ*_Bk` for every mode.
#[derive(Debug, Clone)]
pub struct PairCorrelator<'a> {
    basis: &'a ModeBasis,
    products: Vec<Complex64>,
}

impl<'a> PairCorrelator<'a> {
    pub fn new(basis: &'a ModeBasis, a: usize, b: usize) -> Result<Self> {
        basis.check_site(a)?;
        basis.check_site(b)?;
        let products = (0..basis.n_modes())
            .map(|k| basis.coupling(a, k) * basis.coupling(b, k).conj())
            .collect();
        Ok(PairCorrelator { basis, products })
    }

    /// `(F_a(τ), F_c(τ))`.
    pub fn eval(&self, tau: f64) -> (f64, f64) {
        let mut fa = 0.0;
        let mut fc = 0.0;
        for (p, &w) in self.products.iter().zip(self.basis.frequencies()) {
            let (s, c) = (w * tau).sin_cos();
            fa += 2.0 * (p.re * c - p.im * s);
            fc += 2.0 * (p.re * s + p.im * c);
        }
        (fa, fc)
    }

    /// `Σ_k |λ_Ak λ_Bk|`; zero when the two sites share no mode.
    pub fn coupling_weight(&self) -> f64 {
        self.products.iter().map(|p| p.norm()).sum()
    }
}

pub fn anticommutator(basis: &ModeBasis, a: usize, b: usize, tau: f64) -> Result<f64> {
    Ok(PairCorrelator::new(basis, a, b)?.eval(tau).0)
}

pub fn commutator(basis: &ModeBasis, a: usize, b: usize, tau: f64) -> Result<f64> {
    Ok(PairCorrelator::new(basis, a, b)?.eval(tau).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisTag {
    HarmonicChain,
    IonTrap,
    Custom,
}

impl From<&ModeBasis> for BasisTag {
    fn from(b: &ModeBasis) -> Self {
        match b.kind() {
            crate::SystemKind::HarmonicChain(_) => BasisTag::HarmonicChain,
            crate::SystemKind::IonTrap { .. } => BasisTag::IonTrap,
            crate::SystemKind::Custom => BasisTag::Custom,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalityTrace {
    pub taus: Vec<f64>,
    pub f_a: Vec<f64>,
    pub f_c: Vec<f64>,
    pub sites: (usize, usize),
    pub basis_kind: BasisTag,
}

/// `F_a` and `F_c` on a strictly increasing grid of `τ`.
pub fn causality_trace(basis: &ModeBasis, a: usize, b: usize, taus: &[f64]) -> Result<CausalityTrace> {
    if taus.is_empty() {
        return Err(Error::InvalidParameters("empty tau grid".into()));
    }
    if taus.windows(2).any(|w| !(w[0] < w[1])) || taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameters(
            "tau grid must be finite and strictly increasing".into(),
        ));
    }
    let corr = PairCorrelator::new(basis, a, b)?;
    let values: Vec<(f64, f64)> = taus.par_iter().map(|&t| corr.eval(t)).collect();
    let (f_a, f_c) = values.into_iter().unzip();
    Ok(CausalityTrace {
        taus: taus.to_vec(),
        f_a,
        f_c,
        sites: (a, b),
        basis_kind: basis.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightconeEstimate {
    /// Location of the steepest forward rise of `F_c`.
    pub rise_time: f64,
    /// `L·R/(c·N)` on a chain, `1/ω_min` on a trap; NaN for custom bases.
    pub nominal_causal_time: f64,
    /// Peak forward difference quotient of `F_c` divided by `max|F_c|` on
    /// the scan, i.e. an inverse front width. Dividing out the amplitude
    /// keeps sizes comparable, since `F_c` itself shrinks like `1/N`.
    pub sharpness: f64,
    /// Grid size actually used.
    pub n_samples: usize,
}

pub const MIN_LIGHTCONE_SAMPLES: usize = 100;
/// Samples per period of the fastest mode below which the grid is widened.
pub const SAMPLES_PER_FASTEST_PERIOD: f64 = 20.0;

/// Scan `F_c` on `[0, τ_max]` and locate its steepest rise.
pub fn lightcone_estimate(
    basis: &ModeBasis,
    a: usize,
    b: usize,
    tau_max: f64,
    n_samples: usize,
) -> Result<LightconeEstimate> {
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "tau_max must be finite and > 0, got {tau_max}"
        )));
    }
    if n_samples < MIN_LIGHTCONE_SAMPLES {
        return Err(Error::InvalidParameters(format!(
            "lightcone scan needs at least {MIN_LIGHTCONE_SAMPLES} samples, got {n_samples}"
        )));
    }
    let corr = PairCorrelator::new(basis, a, b)?;
    if corr.coupling_weight() == 0.0 {
        return Err(Error::NoRiseDetected { site_a: a, site_b: b });
    }
    let periods = tau_max * basis.max_frequency() / (2.0 * std::f64::consts::PI);
    let needed = (SAMPLES_PER_FASTEST_PERIOD * periods).ceil() as usize + 1;
    let n = n_samples.max(needed);
    let dt = tau_max / (n - 1) as f64;

    let fc: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| corr.eval(i as f64 * dt).1)
        .collect();
    let (best, rise) = fc
        .windows(2)
        .map(|w| w[1] - w[0])
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    let scale = corr.coupling_weight() * basis.max_frequency() * dt;
    if !(rise > 1e-12 * scale) {
        return Err(Error::NoRiseDetected { site_a: a, site_b: b });
    }
    Ok(LightconeEstimate {
        rise_time: (best as f64 + 0.5) * dt,
        nominal_causal_time: basis.nominal_causal_time(a, b).unwrap_or(f64::NAN),
        sharpness: rise / dt / fc.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
        n_samples: n,
    })
}
