//! Site-resolved field excitations around the two coupled sites.
//!
//! To leading order the interaction-picture state carries one-phonon
//! components `ε c_{Ak}` (from `A`, spin up) and `ε c_{Bk}` (from `B`, spin
//! down), so
//!
//! ```text
//! D_n(t) = ε² ( |Σ_l λ_{nl} c_{Al} e^{−iω_l t}|² + |Σ_l λ_{nl} c_{Bl} e^{−iω_l t}|² )
//! c_{Ak} = λ*_{Ak} ( d₁/(Ω+ω_k)      + i ∫₀ᵗ f_A e^{−i(Ω−ω_k)t'} dt' )
//! c_{Bk} = λ*_{Bk} ( (d₁+d₂)/(Ω+ω_k) + i ∫₀ᵗ f_B e^{ i(Ω+ω_k)t'} dt' )
//! ```
//!
//! `q⁺_n q⁻_n` is not a local observable, so `D` is a qualitative picture of
//! the cloud rather than something a site-local detector could measure.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{at_mode, check_times, AmplitudeOptions};
use crate::dressing::DressingScheme;
use crate::kernels;
use crate::modes::ModeBasis;
use crate::scenario::Scenario;
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudSnapshot {
    pub time: f64,
    /// `D_n(t)` indexed by site.
    pub d: Vec<f64>,
    pub scheme: DressingScheme,
}

impl CloudSnapshot {
    pub fn total(&self) -> f64 {
        self.d.iter().sum()
    }

    pub fn peak(&self) -> (usize, f64) {
        self.d
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (n, v)| if v > acc.1 { (n, v) } else { acc })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("cloud time must be finite and >= 0, got {t}")))
    }
}

fn check_denominators(basis: &ModeBasis, omega: f64, weight: f64, site: &str) -> Result<()> {
    if weight != 0.0 && basis.frequencies().iter().any(|w| omega + w == 0.0) {
        return Err(Error::Unsupported(format!(
            "dressing denominator Ω + ω vanishes for site {site}"
        )));
    }
    Ok(())
}

/// Mode coefficients `c_{Ak}` and `c_{Bk}` at time `t`.
pub fn cloud_coefficients(
    basis: &ModeBasis,
    scenario: &Scenario,
    scheme: DressingScheme,
    t: f64,
    opts: &AmplitudeOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    scenario.validate(basis)?;
    check_time(t)?;
    let (d1, d2) = scheme.factors();
    check_denominators(basis, scenario.omega_a, d1, "A")?;
    check_denominators(basis, scenario.omega_b, d1 + d2, "B")?;
    let (oa, ob) = (scenario.omega_a, scenario.omega_b);
    let mut ca = Vec::with_capacity(basis.n_modes());
    let mut cb = Vec::with_capacity(basis.n_modes());
    for (k, &w) in basis.frequencies().iter().enumerate() {
        let sa = at_mode(k, kernels::single(&scenario.opening_a, -(oa - w), t, &opts.method))?;
        let sb = at_mode(k, kernels::single(&scenario.opening_b, ob + w, t, &opts.method))?;
        let la = basis.coupling(scenario.site_a, k).conj();
        let lb = basis.coupling(scenario.site_b, k).conj();
        let static_a = if d1 == 0.0 { 0.0 } else { d1 / (oa + w) };
        let static_b = if d1 + d2 == 0.0 { 0.0 } else { (d1 + d2) / (ob + w) };
        ca.push(la * (static_a + I * sa));
        cb.push(lb * (static_b + I * sb));
    }
    Ok((ca, cb))
}

fn project(basis: &ModeBasis, c: &[Complex64], t: f64, eps2: f64) -> Vec<f64> {
    let phases: Vec<Complex64> = basis
        .frequencies()
        .iter()
        .zip(c)
        .map(|(&w, &c)| c * Complex64::from_polar(1.0, -w * t))
        .collect();
    (0..basis.n_sites())
        .map(|n| {
            let u: Complex64 = phases
                .iter()
                .enumerate()
                .map(|(l, &p)| basis.coupling(n, l) * p)
                .sum();
            eps2 * u.norm_sqr()
        })
        .collect()
}

/// `D^↑` (from `A`) and `D^↓` (from `B`) separately.
pub fn single_site_distributions(
    basis: &ModeBasis,
    scenario: &Scenario,
    scheme: DressingScheme,
    t: f64,
    opts: &AmplitudeOptions,
) -> Result<(CloudSnapshot, CloudSnapshot)> {
    let (ca, cb) = cloud_coefficients(basis, scenario, scheme, t, opts)?;
    let eps2 = scenario.epsilon * scenario.epsilon;
    let snap = |d| CloudSnapshot { time: t, d, scheme };
    Ok((snap(project(basis, &ca, t, eps2)), snap(project(basis, &cb, t, eps2))))
}

pub fn excitation_distribution(
    basis: &ModeBasis,
    scenario: &Scenario,
    scheme: DressingScheme,
    t: f64,
    opts: &AmplitudeOptions,
) -> Result<CloudSnapshot> {
    let (up, down) = single_site_distributions(basis, scenario, scheme, t, opts)?;
    let d = up.d.iter().zip(&down.d).map(|(x, y)| x + y).collect();
    Ok(CloudSnapshot { time: t, d, scheme })
}

/// Snapshots at several times, computed in parallel and returned in input
/// order.
pub fn excitation_history(
    basis: &ModeBasis,
    scenario: &Scenario,
    scheme: DressingScheme,
    times: &[f64],
    opts: &AmplitudeOptions,
) -> Result<Vec<CloudSnapshot>> {
    check_times(times)?;
    times
        .par_iter()
        .map(|&t| excitation_distribution(basis, scenario, scheme, t, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{build_harmonic_chain, build_ion_trap, ChainParams, TrapParams};
    use crate::opening::OpeningFunction;

    fn chain(n: usize) -> ModeBasis {
        build_harmonic_chain(ChainParams::new(n, 1.0, 1.0, 1.0)).unwrap()
    }

    fn scenario(a: usize, b: usize) -> Scenario {
        Scenario::symmetric(a, b, 2.0, 0.1, OpeningFunction::SinSqWindow { duration: 0.1 }, 0.1)
    }

    fn opts() -> AmplitudeOptions {
        AmplitudeOptions::default()
    }

    #[test]
    fn bare_cloud_starts_empty_then_spreads() {
        let basis = chain(40);
        let s = scenario(10, 20);
        let d0 = excitation_distribution(&basis, &s, DressingScheme::Bare, 0.0, &opts()).unwrap();
        assert!(d0.d.iter().all(|&x| x.abs() <= 1e-14));
        let d1 = excitation_distribution(&basis, &s, DressingScheme::Bare, 0.05, &opts()).unwrap();
        assert!(d1.peak().1 > 0.0);
    }

    #[test]
    fn dressed_cloud_exists_at_zero() {
        let basis = chain(40);
        let s = scenario(10, 20);
        for scheme in [DressingScheme::SigmaX, DressingScheme::SigmaPlus] {
            let d = excitation_distribution(&basis, &s, scheme, 0.0, &opts()).unwrap();
            assert!(d.total() > 0.0);
        }
    }

    #[test]
    fn clouds_add() {
        let basis = chain(30);
        let s = scenario(3, 17);
        for scheme in DressingScheme::ALL {
            for t in [0.0, 0.03, 0.2] {
                let (up, down) = single_site_distributions(&basis, &s, scheme, t, &opts()).unwrap();
                let all = excitation_distribution(&basis, &s, scheme, t, &opts()).unwrap();
                for n in 0..30 {
                    assert!((up.d[n] + down.d[n] - all.d[n]).abs() <= 1e-12);
                    assert!(all.d[n] >= -1e-14);
                }
            }
        }
    }

    #[test]
    fn epsilon_squared_scaling() {
        let basis = chain(20);
        let s = scenario(2, 9);
        let a = excitation_distribution(&basis, &s, DressingScheme::SigmaX, 0.07, &opts()).unwrap();
        let b = excitation_distribution(&basis, &s.with_epsilon(0.3), DressingScheme::SigmaX, 0.07, &opts())
            .unwrap();
        for (x, y) in a.d.iter().zip(&b.d) {
            assert!((y - 9.0 * x).abs() <= 1e-12 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn translation_covariance() {
        let n = 24;
        let basis = chain(n);
        let shift = 7;
        let s = scenario(1, 6);
        let mut moved = s.clone();
        moved.site_a += shift;
        moved.site_b += shift;
        let a = excitation_distribution(&basis, &s, DressingScheme::SigmaPlus, 0.08, &opts()).unwrap();
        let b = excitation_distribution(&basis, &moved, DressingScheme::SigmaPlus, 0.08, &opts()).unwrap();
        for m in 0..n {
            let x = a.d[m];
            let y = b.d[(m + shift) % n];
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12), "site {m}: {x} vs {y}");
        }
    }

    #[test]
    fn sigma_plus_only_changes_b() {
        let basis = chain(20);
        let s = scenario(4, 12);
        let (up_x, down_x) = single_site_distributions(&basis, &s, DressingScheme::SigmaX, 0.05, &opts()).unwrap();
        let (up_p, down_p) =
            single_site_distributions(&basis, &s, DressingScheme::SigmaPlus, 0.05, &opts()).unwrap();
        let (up_b, _) = single_site_distributions(&basis, &s, DressingScheme::Bare, 0.05, &opts()).unwrap();
        // σ_+ has d₁ = 0, so A's cloud is bare; d₁ + d₂ = 1 in both dressed schemes.
        assert_eq!(up_p.d, up_b.d);
        assert_ne!(up_x.d, up_p.d);
        for (x, y) in down_x.d.iter().zip(&down_p.d) {
            assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn cloud_starts_on_a_and_spreads_symmetrically() {
        let basis = chain(100);
        let mut s = scenario(50, 80);
        s.epsilon = 1.0;
        let front = |t: f64| {
            let (up, _) = single_site_distributions(&basis, &s, DressingScheme::Bare, t, &opts()).unwrap();
            for r in 1..40 {
                assert!((up.d[50 + r] - up.d[50 - r]).abs() <= 1e-12 * up.peak().1);
            }
            up.peak().0.abs_diff(50)
        };
        assert_eq!(front(0.05), 0);
        let (f1, f2) = (front(0.1), front(0.2));
        assert!(f1 > 0 && f2 > f1, "front at {f1}, {f2}");
    }

    #[test]
    fn works_on_traps_and_rejects_negative_time() {
        let basis = build_ion_trap(TrapParams::new(3, 1.0)).unwrap();
        let s = Scenario::symmetric(0, 2, 1.5, 0.2, OpeningFunction::Constant, 1.0);
        let d = excitation_distribution(&basis, &s, DressingScheme::SigmaX, 0.4, &opts()).unwrap();
        assert_eq!(d.d.len(), 3);
        assert!(excitation_distribution(&basis, &s, DressingScheme::Bare, -0.1, &opts()).is_err());
    }
}
