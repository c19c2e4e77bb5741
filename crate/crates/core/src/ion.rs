//! Two ions hit by strong impulsive pulses.
//!
//! The motional ground state, written in the local number basis of the two
//! ions, is a two-mode squeezed state `|V⟩ = Z Σ_n e^{−βn}|n⟩|n⟩` fixed by the
//! symplectic eigenvalue of one ion's reduced state. Neglecting the free
//! Hamiltonian during the pulse, `U = e^{iα_A σ_x^A X_A} e^{iα_B σ_x^B X_B}`
//! with `X = a + a†`, and since `⟨↓|e^{iασ_x X}|↑⟩ = i sin(αX)` the swap
//! amplitude is
//!
//! ```text
//! A = −Σ_{m,n} s_m s_n ⟨m|sin(α_A X)|n⟩ ⟨m|sin(α_B X)|n⟩,   s_n = e^{−βn}.
//! ```
//!
//! Keeping `n ∈ {0, 1}` gives `A ≈ −2 e^{−(α_A²+α_B²)/2} α_A α_B e^{−β}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kernels::{self, KernelMethod};
use crate::opening::OpeningFunction;
use crate::{Error, Result};

/// Schmidt terms are kept until the discarded weight is below this.
pub const SCHMIDT_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalGroundState {
    pub lambda_symp: f64,
    /// `+∞` for a product ground state.
    pub beta: f64,
    pub e_minus_beta: f64,
    /// `Z e^{−βn}` for `n = 0..len`.
    pub schmidt_coeffs: Vec<f64>,
}

impl ThermalGroundState {
    pub fn z(&self) -> f64 {
        (1.0 - self.e_minus_beta * self.e_minus_beta).sqrt()
    }

    /// `e^{−βn}` without the normalization.
    pub fn weight(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.e_minus_beta.powi(n as i32)
        }
    }
}

fn check_frequency(w: f64, name: &str) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} must be finite and > 0, got {w}")))
    }
}

/// Thermal parameter of one ion's reduced motional state, from the two mode
/// frequencies.
pub fn symplectic_temperature(omega0: f64, omega1: f64) -> Result<ThermalGroundState> {
    check_frequency(omega0, "omega0")?;
    check_frequency(omega1, "omega1")?;
    let lambda = 0.25 * ((omega0 / omega1).sqrt() + (omega1 / omega0).sqrt());
    let x = ((lambda - 0.5).max(0.0) / (lambda + 0.5)).sqrt();
    let beta = -x.ln();
    let z = (1.0 - x * x).sqrt();
    let mut schmidt_coeffs = vec![z];
    // Weight beyond index n is x^{2(n+1)}.
    let mut tail = x * x;
    while tail >= SCHMIDT_TAIL {
        let n = schmidt_coeffs.len();
        schmidt_coeffs.push(z * x.powi(n as i32));
        tail *= x * x;
    }
    Ok(ThermalGroundState {
        lambda_symp: lambda,
        beta,
        e_minus_beta: x,
        schmidt_coeffs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub alpha_a: f64,
    pub alpha_b: f64,
}

impl PulseSpec {
    pub fn new(alpha_a: f64, alpha_b: f64) -> Result<Self> {
        if !(alpha_a.is_finite() && alpha_b.is_finite()) {
            return Err(Error::InvalidParameters("pulse areas must be finite".into()));
        }
        Ok(PulseSpec { alpha_a, alpha_b })
    }

    pub fn equal(alpha: f64) -> Result<Self> {
        PulseSpec::new(alpha, alpha)
    }

    /// `α_n = −(ε/√(2ω₀)) ∫₀ᵀ f_n dt`.
    pub fn from_pulses(
        epsilon: f64,
        omega0: f64,
        f_a: &OpeningFunction,
        f_b: &OpeningFunction,
        duration: f64,
    ) -> Result<Self> {
        check_frequency(omega0, "omega0")?;
        f_a.validate()?;
        f_b.validate()?;
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::InvalidParameters(format!("duration must be >= 0, got {duration}")));
        }
        let scale = -epsilon / (2.0 * omega0).sqrt();
        let area = |f: &OpeningFunction| -> Result<f64> {
            Ok(kernels::single(f, 0.0, duration, &KernelMethod::ClosedForm)?.re)
        };
        PulseSpec::new(scale * area(f_a)?, scale * area(f_b)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapResult {
    pub amplitude: f64,
    pub probability: f64,
    /// Same amplitude with both ground states normalized by `Z²`; only
    /// meaningful once the Schmidt series has converged.
    pub normalized_probability: f64,
}

/// Leading-order swap amplitude, `|V⟩ ≈ |00⟩ + e^{−β}|11⟩`.
pub fn swap_probability(pulse: &PulseSpec, thermal: &ThermalGroundState) -> SwapResult {
    let (a, b) = (pulse.alpha_a, pulse.alpha_b);
    let amplitude = -2.0 * (a * b) * (-(a * a + b * b) / 2.0).exp() * thermal.e_minus_beta;
    let z2 = thermal.z().powi(2);
    SwapResult {
        amplitude,
        probability: amplitude * amplitude,
        normalized_probability: (amplitude * z2).powi(2),
    }
}

/// Generalized Laguerre `L_n^{(k)}(x)` by the three-term recurrence.
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨m|D(β)|n⟩` for the displacement `D(β) = e^{βa† − β*a}`.
pub fn displacement_element(m: usize, n: usize, beta: Complex64) -> Complex64 {
    let x = beta.norm_sqr();
    let gauss = (-0.5 * x).exp();
    let ratio = |lo: usize, hi: usize| -> f64 { ((lo + 1)..=hi).map(|j| 1.0 / (j as f64)).product::<f64>().sqrt() };
    if m >= n {
        beta.powi((m - n) as i32) * (ratio(n, m) * gauss * laguerre(n, m - n, x))
    } else {
        (-beta.conj()).powi((n - m) as i32) * (ratio(m, n) * gauss * laguerre(m, n - m, x))
    }
}

/// `⟨m|sin(αX)|n⟩`, `X = a + a†`.
pub fn sin_quadrature_element(m: usize, n: usize, alpha: f64) -> f64 {
    // sin(αX) = (D(iα) − D(−iα)) / 2i
    let plus = displacement_element(m, n, Complex64::new(0.0, alpha));
    let minus = displacement_element(m, n, Complex64::new(0.0, -alpha));
    ((plus - minus) / Complex64::new(0.0, 2.0)).re
}

/// Swap amplitude summed over the first `schmidt_cutoff` Schmidt terms on
/// both sides. `schmidt_cutoff = 2` is the leading-order truncation.
pub fn swap_probability_full(
    pulse: &PulseSpec,
    thermal: &ThermalGroundState,
    schmidt_cutoff: usize,
) -> Result<SwapResult> {
    if schmidt_cutoff < 2 {
        return Err(Error::InvalidParameters(format!(
            "Schmidt cutoff must be >= 2, got {schmidt_cutoff}"
        )));
    }
    let sa: Vec<Vec<f64>> = (0..schmidt_cutoff)
        .map(|m| (0..schmidt_cutoff).map(|n| sin_quadrature_element(m, n, pulse.alpha_a)).collect())
        .collect();
    let sb: Vec<Vec<f64>> = (0..schmidt_cutoff)
        .map(|m| (0..schmidt_cutoff).map(|n| sin_quadrature_element(m, n, pulse.alpha_b)).collect())
        .collect();
    let mut amplitude = 0.0;
    for m in 0..schmidt_cutoff {
        for n in 0..schmidt_cutoff {
            if (m + n) % 2 == 1 {
                amplitude -= thermal.weight(m) * thermal.weight(n) * sa[m][n] * sb[m][n];
            }
        }
    }
    let z2 = thermal.z().powi(2);
    Ok(SwapResult {
        amplitude,
        probability: amplitude * amplitude,
        normalized_probability: (amplitude * z2).powi(2),
    })
}

/// Pulse area maximizing the leading-order probability for equal pulses on
/// `[lo, hi]`: grid scan, then golden-section refinement.
pub fn optimal_equal_pulse(thermal: &ThermalGroundState, lo: f64, hi: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameters(format!("bad scan interval [{lo}, {hi}]")));
    }
    let p = |a: f64| swap_probability(&PulseSpec { alpha_a: a, alpha_b: a }, thermal).probability;
    let n = 200;
    let h = (hi - lo) / n as f64;
    let best = (0..=n)
        .map(|i| lo + i as f64 * h)
        .fold((lo, f64::NEG_INFINITY), |acc, a| {
            let v = p(a);
            if v > acc.1 {
                (a, v)
            } else {
                acc
            }
        })
        .0;
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while b - a > 1e-12 {
        if p(c) > p(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causality::PairCorrelator;
    use crate::linalg::{symmetric_eigen, SquareMatrix};
    use crate::modes::{build_ion_trap, TrapParams};

    /// Reduced covariance of ion 0 in the two-mode vacuum with
    /// `D = [[1, 1], [1, −1]]/√2`, then its Williamson form.
    fn covariance_oracle(w0: f64, w1: f64) -> (f64, f64) {
        let d = [[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()], [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()]];
        let w = [w0, w1];
        // Ordering (x0, p0, x1, p1); ⟨x_n x_m⟩ = Σ D D/(2ω), ⟨p_n p_m⟩ = Σ D D ω/2.
        let mut sigma = [[0.0; 4]; 4];
        for n in 0..2 {
            for m in 0..2 {
                let xx: f64 = (0..2).map(|k| d[n][k] * d[m][k] / (2.0 * w[k])).sum();
                let pp: f64 = (0..2).map(|k| d[n][k] * d[m][k] * w[k] / 2.0).sum();
                sigma[2 * n][2 * m] = xx;
                sigma[2 * n + 1][2 * m + 1] = pp;
            }
        }
        // Pure global state: det σ = (1/2)^4.
        let rows: Vec<Vec<f64>> = sigma.iter().map(|r| r.to_vec()).collect();
        let full = SquareMatrix::from_rows(&rows);
        let eig = symmetric_eigen(&full, 1e-15).unwrap();
        let det: f64 = eig.values.iter().product();
        assert!((det - 1.0 / 16.0).abs() < 1e-12);
        let nu = (sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0]).sqrt();
        let beta = 0.5 * ((nu + 0.5) / (nu - 0.5)).ln();
        (nu, beta)
    }

    #[test]
    fn two_ion_constants() {
        let t = symplectic_temperature(1.0, 3f64.sqrt()).unwrap();
        assert!((t.lambda_symp - 0.5189).abs() < 2e-4);
        assert!((t.e_minus_beta - 0.1364).abs() < 2e-4);
        assert!((t.beta - 1.9916).abs() < 2e-3);
        let p = swap_probability(&PulseSpec::equal(1.0).unwrap(), &t);
        assert!((p.probability - 0.0100819).abs() < 2e-5, "{}", p.probability);
        let total: f64 = t.schmidt_coeffs.iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < SCHMIDT_TAIL);
    }

    #[test]
    fn degenerate_modes_give_product_state() {
        let t = symplectic_temperature(2.0, 2.0).unwrap();
        assert_eq!(t.lambda_symp, 0.5);
        assert_eq!(t.e_minus_beta, 0.0);
        assert_eq!(t.beta, f64::INFINITY);
        assert_eq!(t.schmidt_coeffs, vec![1.0]);
        let pulse = PulseSpec::equal(1.0).unwrap();
        assert_eq!(swap_probability(&pulse, &t).probability, 0.0);
        assert_eq!(swap_probability_full(&pulse, &t, 8).unwrap().probability, 0.0);
    }

    #[test]
    fn williamson_oracle_agrees() {
        for ratio in [1.1, 3f64.sqrt(), 5.0, 10.0] {
            let t = symplectic_temperature(1.0, ratio).unwrap();
            let (nu, beta) = covariance_oracle(1.0, ratio);
            assert!((t.lambda_symp - nu).abs() < 1e-10, "ratio {ratio}");
            assert!((t.beta - beta).abs() < 1e-10, "ratio {ratio}");
        }
    }

    #[test]
    fn lambda_is_at_least_half() {
        for (a, b) in [(1.0, 1.0001), (0.3, 7.0), (5.0, 0.2)] {
            assert!(symplectic_temperature(a, b).unwrap().lambda_symp > 0.5);
        }
        assert!(symplectic_temperature(0.0, 1.0).is_err());
    }

    #[test]
    fn no_pulse_on_a_means_no_swap() {
        let t = symplectic_temperature(1.0, 3f64.sqrt()).unwrap();
        let p = PulseSpec::new(0.0, 1.3).unwrap();
        assert_eq!(swap_probability(&p, &t).probability, 0.0);
        assert_eq!(swap_probability_full(&p, &t, 10).unwrap().probability, 0.0);
    }

    #[test]
    fn symmetric_in_pulses() {
        let t = symplectic_temperature(1.0, 3f64.sqrt()).unwrap();
        let p = swap_probability(&PulseSpec::new(0.4, 1.7).unwrap(), &t);
        let q = swap_probability(&PulseSpec::new(1.7, 0.4).unwrap(), &t);
        assert_eq!(p, q);
        let p = swap_probability_full(&PulseSpec::new(0.4, 1.7).unwrap(), &t, 9).unwrap();
        let q = swap_probability_full(&PulseSpec::new(1.7, 0.4).unwrap(), &t, 9).unwrap();
        assert!((p.amplitude - q.amplitude).abs() < 1e-15);
    }

    #[test]
    fn full_series_reduces_and_converges() {
        let t = symplectic_temperature(1.0, 3f64.sqrt()).unwrap();
        let pulse = PulseSpec::equal(1.0).unwrap();
        let lead = swap_probability(&pulse, &t);
        let two = swap_probability_full(&pulse, &t, 2).unwrap();
        assert!((two.amplitude - lead.amplitude).abs() <= 1e-15 * lead.amplitude.abs());
        let ten = swap_probability_full(&pulse, &t, 10).unwrap();
        let rel = (ten.probability - lead.probability).abs() / lead.probability;
        assert!(rel <= 5e-2, "relative change {rel}");
        let twenty = swap_probability_full(&pulse, &t, 20).unwrap();
        assert!((twenty.amplitude - ten.amplitude).abs() < 1e-8 * ten.amplitude.abs());
    }

    #[test]
    fn sin_elements_match_matrix_function() {
        // sin(αX) from the spectral decomposition of a large truncated X.
        let dim = 80;
        let mut x = SquareMatrix::zeros(dim);
        for n in 0..dim - 1 {
            let v = ((n + 1) as f64).sqrt();
            x[(n, n + 1)] = v;
            x[(n + 1, n)] = v;
        }
        let eig = symmetric_eigen(&x, 1e-14).unwrap();
        for alpha in [0.3, 1.0, 1.8] {
            for m in 0..8 {
                for n in 0..8 {
                    let direct: f64 = (0..dim)
                        .map(|j| eig.vectors[(m, j)] * (alpha * eig.values[j]).sin() * eig.vectors[(n, j)])
                        .sum();
                    let got = sin_quadrature_element(m, n, alpha);
                    assert!((got - direct).abs() < 1e-10, "α={alpha} ({m},{n}): {got} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn equal_pulse_optimum_is_one() {
        let t = symplectic_temperature(1.0, 3f64.sqrt()).unwrap();
        let a = optimal_equal_pulse(&t, 0.0, 3.0).unwrap();
        assert!((a - 1.0).abs() < 1e-6, "{a}");
    }

    #[test]
    fn pulse_areas_from_profiles() {
        let f = OpeningFunction::SinSqWindow { duration: 0.2 };
        let p = PulseSpec::from_pulses(10.0, 1.0, &f, &OpeningFunction::Constant, 0.2).unwrap();
        let scale = -10.0 / 2f64.sqrt();
        assert!((p.alpha_a - scale * 0.1).abs() < 1e-14);
        assert!((p.alpha_b - scale * 0.2).abs() < 1e-14);
    }

    #[test]
    fn commutator_is_negligible_for_short_pulses() {
        let basis = build_ion_trap(TrapParams::new(2, 1.0)).unwrap();
        let corr = PairCorrelator::new(&basis, 0, 1).unwrap();
        for t in [0.01, 0.05, 0.1] {
            let (fa, fc) = corr.eval(t);
            assert!((fc / fa).abs() < 0.1, "T={t}: {fc}/{fa}");
        }
    }
}
