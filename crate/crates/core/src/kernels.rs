//! Single and time-ordered double integrals of an opening profile against a
//! phase, the building blocks of every amplitude in the crate:
//!
//! ```text
//! S(f, φ; t)          = ∫₀ᵗ f(s) e^{iφs} ds
//! N(f, φ; g, χ; t)    = ∫₀ᵗ f(s) e^{iφs} ∫₀ˢ g(u) e^{iχu} du ds
//! ```
//!
//! The closed-form route expands each window into exponentials; the
//! quadrature route integrates the profile directly. Both are kept so they
//! can be checked against each other.

use num_complex::Complex64;

use crate::opening::OpeningFunction;
use crate::quadrature::{self, GaussLegendre, QuadratureOptions};
use crate::Result;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KernelMethod {
    #[default]
    ClosedForm,
    Quadrature(QuadratureOptions),
}

/// `∫₀ᵗ e^{ixs} ds`, cancellation-free for small `xt`.
pub fn exp_integral(x: f64, t: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(t, 0.0);
    }
    let half = (0.5 * x * t).sin();
    Complex64::new((x * t).sin() / x, 2.0 * half * half / x)
}

/// `∫₀ᵗ e^{ixs} ∫₀ˢ e^{iyu} du ds`.
pub fn nested_exp_integral(x: f64, y: f64, t: f64) -> Complex64 {
    if t <= 0.0 {
        return ZERO;
    }
    if y.abs() * t >= 0.1 {
        return (exp_integral(x + y, t) - exp_integral(x, t)) / (I * y);
    }
    // Near resonance the divided difference cancels; integrate the outer
    // variable with the inner integral in closed form instead.
    let panels = ((x.abs() * t / std::f64::consts::PI).ceil() as usize).max(1);
    let rule = GaussLegendre::new(16);
    let h = t / panels as f64;
    (0..panels)
        .map(|j| {
            rule.integrate(j as f64 * h, (j + 1) as f64 * h, |s| {
                Complex64::from_polar(1.0, x * s) * exp_integral(y, s)
            })
        })
        .sum()
}

fn support_end(f: &OpeningFunction, t: f64) -> f64 {
    match f.window_end() {
        Some(end) => t.min(end),
        None => t,
    }
    .max(0.0)
}

/// `S(f, φ; t)`.
pub fn single(f: &OpeningFunction, phase: f64, t: f64, method: &KernelMethod) -> Result<Complex64> {
    let end = support_end(f, t);
    if end <= 0.0 {
        return Ok(ZERO);
    }
    match method {
        KernelMethod::ClosedForm => Ok(single_closed(f, phase, end)),
        KernelMethod::Quadrature(opts) => {
            let f = f.post_ramp();
            quadrature::integrate(
                |s| Complex64::from_polar(f.eval(s), phase * s),
                end,
                phase.abs() + f.bandwidth(),
                opts,
            )
        }
    }
}

fn single_closed(f: &OpeningFunction, phase: f64, end: f64) -> Complex64 {
    f.exp_terms()
        .iter()
        .map(|term| term.coeff * exp_integral(phase + term.freq, end))
        .sum()
}

/// `N(f_out, φ_out; f_in, φ_in; t)`: `f_in` is integrated first, up to the
/// running outer time.
pub fn nested(
    f_out: &OpeningFunction,
    phase_out: f64,
    f_in: &OpeningFunction,
    phase_in: f64,
    t: f64,
    method: &KernelMethod,
) -> Result<Complex64> {
    let end_out = support_end(f_out, t);
    if end_out <= 0.0 || support_end(f_in, t) <= 0.0 {
        return Ok(ZERO);
    }
    match method {
        KernelMethod::ClosedForm => {
            let end_in = f_in.window_end().unwrap_or(f64::INFINITY);
            let overlap = end_out.min(end_in);
            let terms_out = f_out.exp_terms();
            let terms_in = f_in.exp_terms();
            let mut acc = ZERO;
            for a in &terms_out {
                for b in &terms_in {
                    acc += a.coeff
                        * b.coeff
                        * nested_exp_integral(phase_out + a.freq, phase_in + b.freq, overlap);
                }
            }
            if end_out > end_in {
                // Inner integral is frozen once f_in has closed.
                let frozen = single_closed(f_in, phase_in, end_in);
                acc += frozen
                    * (single_closed(f_out, phase_out, end_out)
                        - single_closed(f_out, phase_out, end_in));
            }
            Ok(acc)
        }
        KernelMethod::Quadrature(opts) => {
            let fo = f_out.post_ramp();
            let fi = f_in.post_ramp();
            let max_freq = (phase_out.abs() + fo.bandwidth()).max(phase_in.abs() + fi.bandwidth());
            quadrature::integrate_nested(
                |s| Complex64::from_polar(fo.eval(s), phase_out * s),
                |u| Complex64::from_polar(fi.eval(u), phase_in * u),
                end_out,
                max_freq,
                opts,
            )
        }
    }
}
