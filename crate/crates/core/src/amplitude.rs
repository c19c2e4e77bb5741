//! Bare second-order amplitude for `|↑_A ↓_B 0⟩ → |↓_A ↑_B 0⟩`.
//!
//! With `p_k = λ_Ak λ*_Bk`, `φ_k = Ω + ω_k` and `χ_k = Ω − ω_k`, the
//! correlation part is
//!
//! ```text
//! A₀ = −(ε²/2) Σ_k [ p_k S_A(−φ_k) S_B(φ_k) + p*_k S_A(−χ_k) S_B(χ_k) ]
//! ```
//!
//! and the commutator part replaces each product `S_A S_B` by the signed
//! ordered integral `2N(A; B) − S_A S_B`, with a relative minus sign on the
//! `p*_k` branch. Their sum equals the time-ordered two-path amplitude
//! computed by [`direct_amplitude`].

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernels::{self, KernelMethod};
use crate::modes::ModeBasis;
use crate::opening::OpeningFunction;
use crate::scenario::Scenario;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub a0: Vec<Complex64>,
    pub ac: Vec<Complex64>,
    /// Extra terms from a dressed initial state; zero for bare runs.
    pub dressing: Vec<Complex64>,
    pub total: Vec<Complex64>,
    pub probability: Vec<f64>,
    /// `per_mode[i][k]`: contribution of mode `k` to `total[i]`.
    pub per_mode: Option<Vec<Vec<Complex64>>>,
}

impl AmplitudeTrace {
    pub(crate) fn from_parts(
        times: &[f64],
        a0: Vec<Complex64>,
        ac: Vec<Complex64>,
        dressing: Vec<Complex64>,
        total: Vec<Complex64>,
        per_mode: Option<Vec<Vec<Complex64>>>,
    ) -> Self {
        let probability = total.iter().map(|a| a.norm_sqr()).collect();
        AmplitudeTrace {
            times: times.to_vec(),
            a0,
            ac,
            dressing,
            total,
            probability,
            per_mode,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max|A_c| / max|A₀|`, zero when both vanish.
    pub fn commutator_ratio(&self) -> f64 {
        let max_c = self.ac.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let max_0 = self.a0.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if max_c == 0.0 {
            0.0
        } else {
            max_c / max_0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmplitudeOptions {
    pub method: KernelMethod,
    pub per_mode: bool,
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameters("times must be finite and >= 0".into()));
    }
    Ok(())
}

/// Tag quadrature failures with the mode that produced them.
pub(crate) fn at_mode<T>(k: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::NumericalFailure { what, residual } => Error::NumericalFailure {
            what: format!("mode {k}: {what}"),
            residual,
        },
        e => e,
    })
}

pub(crate) fn pair_products(basis: &ModeBasis, a: usize, b: usize) -> Vec<Complex64> {
    (0..basis.n_modes())
        .map(|k| basis.coupling(a, k) * basis.coupling(b, k).conj())
        .collect()
}

struct ModeTerms {
    a0: Complex64,
    ac: Complex64,
}

fn bare_mode(s: &Scenario, p: Complex64, w: f64, t: f64, m: &KernelMethod) -> Result<ModeTerms> {
    let (fa, fb) = (&s.opening_a, &s.opening_b);
    let phi_a = s.omega_a + w;
    let phi_b = s.omega_b + w;
    let chi_a = s.omega_a - w;
    let chi_b = s.omega_b - w;
    let sa_phi = kernels::single(fa, -phi_a, t, m)?;
    let sb_phi = kernels::single(fb, phi_b, t, m)?;
    let sa_chi = kernels::single(fa, -chi_a, t, m)?;
    let sb_chi = kernels::single(fb, chi_b, t, m)?;
    let n_phi = kernels::nested(fa, -phi_a, fb, phi_b, t, m)?;
    let n_chi = kernels::nested(fa, -chi_a, fb, chi_b, t, m)?;
    let prod_phi = sa_phi * sb_phi;
    let prod_chi = sa_chi * sb_chi;
    let half_eps2 = -0.5 * s.epsilon * s.epsilon;
    Ok(ModeTerms {
        a0: half_eps2 * (p * prod_phi + p.conj() * prod_chi),
        ac: half_eps2 * (p * (2.0 * n_phi - prod_phi) - p.conj() * (2.0 * n_chi - prod_chi)),
    })
}

/// `A₀`, `A_c` and their sum at each time. Times may be in any order.
pub fn bare_amplitude(
    basis: &ModeBasis,
    scenario: &Scenario,
    times: &[f64],
    opts: &AmplitudeOptions,
) -> Result<AmplitudeTrace> {
    scenario.validate(basis)?;
    check_times(times)?;
    let products = pair_products(basis, scenario.site_a, scenario.site_b);
    let freqs = basis.frequencies();
    let rows: Vec<(Complex64, Complex64, Option<Vec<Complex64>>)> = times
        .par_iter()
        .map(|&t| {
            let mut a0 = ZERO;
            let mut ac = ZERO;
            let mut modes = opts.per_mode.then(|| Vec::with_capacity(freqs.len()));
            for (k, (&p, &w)) in products.iter().zip(freqs).enumerate() {
                let m = at_mode(k, bare_mode(scenario, p, w, t, &opts.method))?;
                a0 += m.a0;
                ac += m.ac;
                if let Some(v) = modes.as_mut() {
                    v.push(m.a0 + m.ac);
                }
            }
            Ok((a0, ac, modes))
        })
        .collect::<Result<_>>()?;
    let mut a0 = Vec::with_capacity(rows.len());
    let mut ac = Vec::with_capacity(rows.len());
    let mut per_mode = opts.per_mode.then(Vec::new);
    for (x, y, m) in rows {
        a0.push(x);
        ac.push(y);
        if let (Some(pm), Some(m)) = (per_mode.as_mut(), m) {
            pm.push(m);
        }
    }
    let total = a0.iter().zip(&ac).map(|(x, y)| x + y).collect();
    let dressing = vec![ZERO; times.len()];
    Ok(AmplitudeTrace::from_parts(times, a0, ac, dressing, total, per_mode))
}

/// The time-ordered amplitude summed over its two paths: `A` emits first and
/// `B` absorbs, or `B` emits first and `A` absorbs.
pub fn direct_amplitude(
    basis: &ModeBasis,
    scenario: &Scenario,
    times: &[f64],
    method: &KernelMethod,
) -> Result<Vec<Complex64>> {
    scenario.validate(basis)?;
    check_times(times)?;
    let products = pair_products(basis, scenario.site_a, scenario.site_b);
    let freqs = basis.frequencies();
    let (fa, fb) = (&scenario.opening_a, &scenario.opening_b);
    let eps2 = scenario.epsilon * scenario.epsilon;
    times
        .par_iter()
        .map(|&t| {
            let mut acc = ZERO;
            for (k, (&p, &w)) in products.iter().zip(freqs).enumerate() {
                let a_later = kernels::nested(fa, -(scenario.omega_a + w), fb, scenario.omega_b + w, t, method);
                let b_later = kernels::nested(fb, scenario.omega_b - w, fa, -(scenario.omega_a - w), t, method);
                acc += p * at_mode(k, a_later)? + p.conj() * at_mode(k, b_later)?;
            }
            Ok(-eps2 * acc)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedAmplitude {
    pub trace: AmplitudeTrace,
    /// `max|A_c| / max|A₀|` over the window.
    pub commutator_ratio: f64,
    /// Set when the window outlasts the nominal causal time.
    pub causal_warning: Option<String>,
}

/// Bare amplitude over the whole window `[0, T]` on `n_points` evenly spaced
/// times.
pub fn windowed_amplitude(
    basis: &ModeBasis,
    scenario: &Scenario,
    n_points: usize,
    opts: &AmplitudeOptions,
) -> Result<WindowedAmplitude> {
    let t_end = scenario.duration;
    let times: Vec<f64> = match n_points {
        0 => return Err(Error::InvalidParameters("n_points must be >= 1".into())),
        1 => vec![t_end],
        n => (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect(),
    };
    let trace = bare_amplitude(basis, scenario, &times, opts)?;
    let causal_warning = basis
        .nominal_causal_time(scenario.site_a, scenario.site_b)
        .filter(|&x| t_end > x)
        .map(|x| format!("window T = {t_end} exceeds the nominal causal time {x}"));
    Ok(WindowedAmplitude {
        commutator_ratio: trace.commutator_ratio(),
        trace,
        causal_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    Independent,
    Nested,
}

/// Per-mode kernel with phase `φ = Ω + ω`: `S(f, −φ)·S(f, φ)` for
/// [`Ordering::Independent`], `N(f, −φ; f, φ)` for [`Ordering::Nested`].
pub fn double_window_integral(
    f: &OpeningFunction,
    omega: f64,
    w: f64,
    t: f64,
    ordering: Ordering,
    method: &KernelMethod,
) -> Result<Complex64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameters(format!("t must be finite and >= 0, got {t}")));
    }
    let phi = omega + w;
    match ordering {
        Ordering::Independent => Ok(kernels::single(f, -phi, t, method)? * kernels::single(f, phi, t, method)?),
        Ordering::Nested => kernels::nested(f, -phi, f, phi, t, method),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{build_harmonic_chain, build_ion_trap, ChainParams, TrapParams};
    use crate::quadrature::QuadratureOptions;

    fn chain100() -> ModeBasis {
        build_harmonic_chain(ChainParams::new(100, 1.0, 1.0, 1.0)).unwrap()
    }

    fn constant_pair() -> Scenario {
        Scenario::symmetric(0, 31, 2.0, 1.0, OpeningFunction::Constant, 1.0)
    }

    fn short_window_pair() -> Scenario {
        Scenario::symmetric(0, 31, 2.0, 1.0, OpeningFunction::SinSqWindow { duration: 0.1 }, 0.1)
    }

    #[test]
    fn vanishes_at_time_zero() {
        let tr = bare_amplitude(&chain100(), &constant_pair(), &[0.0], &Default::default()).unwrap();
        assert_eq!(tr.total[0], ZERO);
        assert_eq!(tr.probability[0], 0.0);
    }

    #[test]
    fn vanishes_when_a_is_never_opened() {
        let s = Scenario {
            opening_a: OpeningFunction::SinSqWindow { duration: 0.0 },
            ..constant_pair()
        };
        let tr = bare_amplitude(&chain100(), &s, &[0.1, 0.5, 1.0], &Default::default()).unwrap();
        assert!(tr.total.iter().all(|a| *a == ZERO));
    }

    #[test]
    fn decomposition_matches_direct_route() {
        let basis = chain100();
        let times = [0.05, 0.1, 0.31, 0.7];
        for s in [constant_pair(), short_window_pair()] {
            let tr = bare_amplitude(&basis, &s, &times, &Default::default()).unwrap();
            let direct = direct_amplitude(&basis, &s, &times, &KernelMethod::ClosedForm).unwrap();
            for (a, b) in tr.total.iter().zip(&direct) {
                assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn unequal_splittings_and_trap_also_decompose() {
        let trap = build_ion_trap(TrapParams::new(3, 1.0)).unwrap();
        let s = Scenario {
            site_a: 0,
            site_b: 2,
            omega_a: -0.3,
            omega_b: -0.5,
            epsilon: 0.2,
            opening_a: OpeningFunction::CosSqWindow { duration: 2.0 },
            opening_b: OpeningFunction::SinSqWindow { duration: 1.5 },
            duration: 2.0,
        };
        let times = [0.4, 1.0, 1.7, 2.0];
        let tr = bare_amplitude(&trap, &s, &times, &Default::default()).unwrap();
        let direct = direct_amplitude(&trap, &s, &times, &KernelMethod::ClosedForm).unwrap();
        for (a, b) in tr.total.iter().zip(&direct) {
            assert!((a - b).norm() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn closed_form_and_quadrature_agree() {
        let basis = build_harmonic_chain(ChainParams::new(12, 1.0, 1.0, 1.0)).unwrap();
        let s = Scenario::symmetric(0, 4, 2.0, 1.0, OpeningFunction::SinSqWindow { duration: 0.3 }, 0.3);
        let times = [0.1, 0.3];
        let cf = bare_amplitude(&basis, &s, &times, &Default::default()).unwrap();
        let q = bare_amplitude(
            &basis,
            &s,
            &times,
            &AmplitudeOptions {
                method: KernelMethod::Quadrature(QuadratureOptions::default()),
                per_mode: false,
            },
        )
        .unwrap();
        for i in 0..2 {
            assert!((cf.a0[i] - q.a0[i]).norm() < 1e-9 * cf.a0[i].norm().max(1e-6));
            assert!((cf.ac[i] - q.ac[i]).norm() < 1e-9 * cf.a0[i].norm().max(1e-6));
        }
    }

    #[test]
    fn per_mode_rows_sum_to_total() {
        let tr = bare_amplitude(
            &chain100(),
            &short_window_pair(),
            &[0.03, 0.1],
            &AmplitudeOptions {
                per_mode: true,
                ..Default::default()
            },
        )
        .unwrap();
        let pm = tr.per_mode.as_ref().unwrap();
        for (row, total) in pm.iter().zip(&tr.total) {
            assert_eq!(row.len(), 100);
            let s: Complex64 = row.iter().sum();
            assert!((s - total).norm() < 1e-15 * (1.0 + total.norm()) + 1e-18);
        }
    }

    #[test]
    fn fig4_commutator_part_is_small() {
        let w = windowed_amplitude(&chain100(), &short_window_pair(), 101, &Default::default()).unwrap();
        assert!(w.causal_warning.is_none());
        assert!(w.commutator_ratio < 0.05, "ratio {}", w.commutator_ratio);
    }

    #[test]
    fn long_window_warns() {
        let s = Scenario::symmetric(0, 31, 2.0, 1.0, OpeningFunction::SinSqWindow { duration: 0.5 }, 0.5);
        let w = windowed_amplitude(&chain100(), &s, 11, &Default::default()).unwrap();
        assert!(w.causal_warning.is_some());
    }

    #[test]
    fn empty_window_is_zero() {
        let s = Scenario::symmetric(0, 31, 2.0, 1.0, OpeningFunction::SinSqWindow { duration: 0.0 }, 0.0);
        let w = windowed_amplitude(&chain100(), &s, 5, &Default::default()).unwrap();
        assert!(w.trace.total.iter().all(|a| *a == ZERO));
        assert_eq!(w.commutator_ratio, 0.0);
    }

    #[test]
    fn double_window_kernel_examples() {
        let one = OpeningFunction::Constant;
        let cf = KernelMethod::ClosedForm;
        let n = double_window_integral(&one, 2.0, -2.0, 0.6, Ordering::Nested, &cf).unwrap();
        assert!((n - Complex64::new(0.18, 0.0)).norm() < 1e-15);
        let ind = double_window_integral(&one, 2.0, 3.0, 0.6, Ordering::Independent, &cf).unwrap();
        let s = kernels::exp_integral(5.0, 0.6);
        assert!((ind - s * s.conj()).norm() < 1e-15);
        assert!(double_window_integral(&one, 2.0, 3.0, -1.0, Ordering::Nested, &cf).is_err());
    }

    #[test]
    fn negative_times_rejected() {
        assert!(bare_amplitude(&chain100(), &constant_pair(), &[-0.1], &Default::default()).is_err());
    }
}
