//! Dressed states and dressed transition amplitudes.
//!
//! The coupling is switched on adiabatically before `t = 0`, so the state at
//! `t = 0` is the perturbatively dressed ground state `|G⟩`. Spin `A` is then
//! excited by `σ_x^A` or `σ_+^A`, or the bare state is used instead, and the
//! swap amplitude is
//!
//! ```text
//! A(t) = ε² Σ_k [ λ_Ak λ*_Bk F_1k(t) + λ*_Ak λ_Bk F_2k(t) ]
//! F_1k = −N(f_A, −φ; f_B, φ) + i(d₁+d₂)/φ · S(f_A, −φ) + d₁/(2Ωφ)
//! F_2k = −N(f_B, χ; f_A, −χ) + i d₁/φ · S(f_B, χ)      + d₁/(2Ωφ)
//! ```
//!
//! with `φ = Ω + ω_k`, `χ = Ω − ω_k`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{at_mode, bare_amplitude, check_times, pair_products, AmplitudeOptions, AmplitudeTrace};
use crate::kernels;
use crate::modes::{build_harmonic_chain, ChainParams, ModeBasis};
use crate::oracle::FockSpace;
use crate::scenario::Scenario;
use crate::spin::SpinPattern;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One configuration `|spins; phonons⟩` at a given order in `ε`.
/// `phonons` is sorted by mode and lists only occupied modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub order: u8,
    pub spins: SpinPattern,
    pub phonons: Vec<(usize, u8)>,
    pub coeff: Complex64,
}

impl ExpansionTerm {
    pub fn phonon_number(&self) -> u32 {
        self.phonons.iter().map(|&(_, n)| n as u32).sum()
    }
}

/// A perturbative ket `Σ ε^order · coeff · |spins; phonons⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateExpansion {
    pub terms: Vec<ExpansionTerm>,
    pub epsilon: f64,
}

fn occupied(modes: &[usize]) -> Vec<(usize, u8)> {
    let mut m = modes.to_vec();
    m.sort_unstable();
    let mut out: Vec<(usize, u8)> = Vec::new();
    for k in m {
        match out.last_mut() {
            Some((last, n)) if *last == k => *n += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

impl StateExpansion {
    /// Summed coefficient of one configuration; `modes` lists each phonon
    /// once per quantum, in any order.
    pub fn coefficient(&self, order: u8, spins: SpinPattern, modes: &[usize]) -> Complex64 {
        let phonons = occupied(modes);
        self.terms
            .iter()
            .filter(|t| t.order == order && t.spins == spins && t.phonons == phonons)
            .map(|t| t.coeff)
            .sum()
    }

    pub fn terms_of_order(&self, order: u8) -> impl Iterator<Item = &ExpansionTerm> {
        self.terms.iter().filter(move |t| t.order == order)
    }

    /// Every order has phonon number of the same parity as the order, and
    /// `σ_z^A σ_z^B (−1)^N` takes one value across all terms.
    pub fn parity_consistent(&self) -> bool {
        let parity = |t: &ExpansionTerm| {
            let s = if t.spins.total_sz() == 0 { -1 } else { 1 };
            s * if t.phonon_number().is_multiple_of(2) { 1 } else { -1 }
        };
        match self.terms.first() {
            None => true,
            Some(first) => {
                let p = parity(first);
                self.terms
                    .iter()
                    .all(|t| parity(t) == p && (t.order as u32 % 2) == t.phonon_number() % 2)
            }
        }
    }

    /// `‖ψ⁽ⁿ⁾‖²` of the order-`n` part.
    pub fn order_norm_sqr(&self, order: u8) -> f64 {
        self.terms_of_order(order).map(|t| t.coeff.norm_sqr()).sum()
    }

    /// Amplitudes in a truncated Fock space, `ε^order` applied.
    pub fn to_fock_vector(&self, fock: &FockSpace) -> Result<Vec<Complex64>> {
        let mut v = vec![ZERO; fock.dimension()];
        let mut occ = vec![0u8; fock.n_modes()];
        for t in &self.terms {
            occ.iter_mut().for_each(|n| *n = 0);
            for &(k, n) in &t.phonons {
                if k >= occ.len() {
                    return Err(Error::IndexOutOfRange { index: k, len: occ.len() });
                }
                occ[k] = n;
            }
            let i = fock.index(t.spins, &occ).ok_or_else(|| {
                Error::InvalidParameters(format!(
                    "configuration with {} phonons exceeds the Fock cutoff {}",
                    t.phonon_number(),
                    fock.max_total_phonons()
                ))
            })?;
            v[i] += t.coeff * self.epsilon.powi(t.order as i32);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DressingScheme {
    /// `σ_x^A` on the dressed ground state: `(d₁, d₂) = (1, 0)`.
    SigmaX,
    /// `σ_+^A` on the dressed ground state: `(d₁, d₂) = (0, 1)`.
    SigmaPlus,
    /// Bare initial state: `(d₁, d₂) = (0, 0)`.
    Bare,
}

impl DressingScheme {
    pub const ALL: [DressingScheme; 3] = [DressingScheme::SigmaX, DressingScheme::SigmaPlus, DressingScheme::Bare];

    pub fn factors(self) -> (f64, f64) {
        match self {
            DressingScheme::SigmaX => (1.0, 0.0),
            DressingScheme::SigmaPlus => (0.0, 1.0),
            DressingScheme::Bare => (0.0, 0.0),
        }
    }
}

fn dressing_omega(basis: &ModeBasis, scenario: &Scenario) -> Result<f64> {
    scenario.validate(basis)?;
    let omega = scenario.common_omega()?;
    if !(omega > 0.0) {
        return Err(Error::Unsupported(format!(
            "dressing needs a positive splitting, got {omega}"
        )));
    }
    Ok(omega)
}

/// `|G⟩ = |↓↓0⟩ + ε|G⁽¹⁾⟩ + ε²|G⁽²⁾⟩` from time-independent perturbation
/// theory (intermediate normalization).
pub fn dressed_ground_state(basis: &ModeBasis, scenario: &Scenario) -> Result<StateExpansion> {
    let omega = dressing_omega(basis, scenario)?;
    let la = basis.site_coupling_row(scenario.site_a)?;
    let lb = basis.site_coupling_row(scenario.site_b)?;
    let w = basis.frequencies();
    let m = w.len();
    let term = |order: u8, spins: SpinPattern, modes: &[usize], coeff: Complex64| ExpansionTerm {
        order,
        spins,
        phonons: occupied(modes),
        coeff,
    };
    let mut terms = vec![term(0, SpinPattern::DownDown, &[], Complex64::new(1.0, 0.0))];

    for k in 0..m {
        let d = omega + w[k];
        terms.push(term(1, SpinPattern::UpDown, &[k], -la[k].conj() / d));
        terms.push(term(1, SpinPattern::DownUp, &[k], -lb[k].conj() / d));
    }

    let mut upup_vacuum = ZERO;
    for k in 0..m {
        let d = omega + w[k];
        upup_vacuum += (la[k].conj() * lb[k] + lb[k].conj() * la[k]) / (2.0 * omega * d);
    }
    terms.push(term(2, SpinPattern::UpUp, &[], upup_vacuum));
    for k in 0..m {
        let d = omega + w[k];
        let same = la[k].conj().powi(2) + lb[k].conj().powi(2);
        terms.push(term(2, SpinPattern::DownDown, &[k, k], same / (SQRT_2 * d * w[k])));
        terms.push(term(2, SpinPattern::UpUp, &[k, k], SQRT_2 * la[k].conj() * lb[k].conj() / (d * d)));
    }
    // Each unordered pair collects both orderings of the emission path.
    for k in 0..m {
        for l in (k + 1)..m {
            let (dk, dl) = (omega + w[k], omega + w[l]);
            let same = la[k].conj() * la[l].conj() + lb[k].conj() * lb[l].conj();
            let cross = la[k].conj() * lb[l].conj() + la[l].conj() * lb[k].conj();
            let both = 1.0 / dk + 1.0 / dl;
            terms.push(term(2, SpinPattern::DownDown, &[k, l], same * both / (w[k] + w[l])));
            terms.push(term(2, SpinPattern::UpUp, &[k, l], cross * both / (2.0 * omega + w[k] + w[l])));
        }
    }
    Ok(StateExpansion {
        terms,
        epsilon: scenario.epsilon,
    })
}

/// Excite spin `A` of the dressed ground state according to `scheme`. With
/// `normalize`, the order-`ε²` counter-term `−½‖ψ⁽¹⁾‖²|ψ⁽⁰⁾⟩` is added.
pub fn initial_dressed_state(ground: &StateExpansion, scheme: DressingScheme, normalize: bool) -> StateExpansion {
    let mut terms: Vec<ExpansionTerm> = match scheme {
        DressingScheme::Bare => vec![ExpansionTerm {
            order: 0,
            spins: SpinPattern::UpDown,
            phonons: Vec::new(),
            coeff: Complex64::new(1.0, 0.0),
        }],
        DressingScheme::SigmaX => ground
            .terms
            .iter()
            .map(|t| ExpansionTerm {
                spins: t.spins.flip(0),
                ..t.clone()
            })
            .collect(),
        DressingScheme::SigmaPlus => ground
            .terms
            .iter()
            .filter(|t| !t.spins.a_up())
            .map(|t| ExpansionTerm {
                spins: t.spins.flip(0),
                ..t.clone()
            })
            .collect(),
    };
    if normalize && scheme != DressingScheme::Bare {
        let n1: f64 = terms.iter().filter(|t| t.order == 1).map(|t| t.coeff.norm_sqr()).sum();
        terms.push(ExpansionTerm {
            order: 2,
            spins: SpinPattern::UpDown,
            phonons: Vec::new(),
            coeff: Complex64::new(-0.5 * n1, 0.0),
        });
    }
    StateExpansion {
        terms,
        epsilon: ground.epsilon,
    }
}

/// Dressed swap amplitude. `a0`/`ac` hold the bare decomposition and
/// `dressing` the remainder, so `total = a0 + ac + dressing`.
pub fn dressed_amplitude(
    basis: &ModeBasis,
    scenario: &Scenario,
    scheme: DressingScheme,
    times: &[f64],
    opts: &AmplitudeOptions,
) -> Result<AmplitudeTrace> {
    let omega = dressing_omega(basis, scenario)?;
    check_times(times)?;
    let w = basis.frequencies();
    if let Some(bad) = w.iter().find(|&&wk| !(omega + wk > 0.0)) {
        return Err(Error::InvalidParameters(format!("Ω + ω_k must be > 0 (ω_k = {bad})")));
    }
    let bare = bare_amplitude(basis, scenario, times, &AmplitudeOptions { per_mode: false, ..*opts })?;
    let products = pair_products(basis, scenario.site_a, scenario.site_b);
    let (d1, d2) = scheme.factors();
    let (fa, fb) = (scenario.opening_a.post_ramp(), scenario.opening_b.post_ramp());
    let eps2 = scenario.epsilon * scenario.epsilon;
    let m = &opts.method;

    let rows: Vec<(Complex64, Option<Vec<Complex64>>)> = times
        .par_iter()
        .map(|&t| {
            let mut acc = ZERO;
            let mut modes = opts.per_mode.then(|| Vec::with_capacity(w.len()));
            for (k, (&p, &wk)) in products.iter().zip(w).enumerate() {
                let phi = omega + wk;
                let chi = omega - wk;
                let constant = d1 / (2.0 * omega * phi);
                let mut f1 = -at_mode(k, kernels::nested(fa, -phi, fb, phi, t, m))? + constant;
                let mut f2 = -at_mode(k, kernels::nested(fb, chi, fa, -chi, t, m))? + constant;
                if d1 + d2 != 0.0 {
                    f1 += I * ((d1 + d2) / phi) * at_mode(k, kernels::single(fa, -phi, t, m))?;
                }
                if d1 != 0.0 {
                    f2 += I * (d1 / phi) * at_mode(k, kernels::single(fb, chi, t, m))?;
                }
                let c = eps2 * (p * f1 + p.conj() * f2);
                acc += c;
                if let Some(v) = modes.as_mut() {
                    v.push(c);
                }
            }
            Ok((acc, modes))
        })
        .collect::<Result<_>>()?;

    let mut total = Vec::with_capacity(rows.len());
    let mut per_mode = opts.per_mode.then(Vec::new);
    for (a, modes) in rows {
        total.push(a);
        if let (Some(pm), Some(v)) = (per_mode.as_mut(), modes) {
            pm.push(v);
        }
    }
    let dressing = total
        .iter()
        .zip(bare.a0.iter().zip(&bare.ac))
        .map(|(t, (a0, ac))| t - (a0 + ac))
        .collect();
    Ok(AmplitudeTrace::from_parts(times, bare.a0, bare.ac, dressing, total, per_mode))
}

fn chain_of(basis: &ModeBasis) -> Result<&ChainParams> {
    basis
        .chain_params()
        .ok_or_else(|| Error::Unsupported("static dressing amplitude is defined for harmonic chains only".into()))
}

fn check_splitting(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("Ω must be finite and > 0, got {omega}")))
    }
}

/// `G/ε² = Σ_k cos(θ_k R) / (2NΩω_k(Ω+ω_k))`; `R` is reduced modulo `N`.
pub fn static_dressing_amplitude(basis: &ModeBasis, omega: f64, r: usize) -> Result<f64> {
    let n = chain_of(basis)?.n_sites;
    check_splitting(omega)?;
    let nf = n as f64;
    Ok(basis
        .frequencies()
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let phase = (k * (r % n)) % n;
            (2.0 * PI * phase as f64 / nf).cos() / (2.0 * nf * omega * w * (omega + w))
        })
        .sum())
}

/// `G_min(N)/ε² = Σ_k (−1)^k / (2NΩω_k(Ω+ω_k))` for each even `N`, with
/// `L`, `ν`, `c` taken from `template`.
pub fn g_min(template: &ChainParams, sizes: &[usize], omega: f64) -> Result<Vec<f64>> {
    check_splitting(omega)?;
    if let Some(odd) = sizes.iter().find(|&&n| n % 2 == 1) {
        return Err(Error::InvalidParameters(format!(
            "antipodal sites need an even chain, got N = {odd}"
        )));
    }
    sizes
        .par_iter()
        .map(|&n| {
            let basis = build_harmonic_chain(ChainParams {
                n_sites: n,
                ..*template
            })?;
            let nf = n as f64;
            Ok(basis
                .frequencies()
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign / (2.0 * nf * omega * w * (omega + w))
                })
                .sum())
        })
        .collect()
}
