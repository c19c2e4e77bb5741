//! Exact evolution of the two-spin boson Hamiltonian in a truncated Fock
//! space:
//!
//! ```text
//! H = Σ_k ω_k a_k†a_k + Σ_{n∈{A,B}} [ ½Ω_n σ_z^n + ε f_n(t) q_n σ_x^n ]
//! ```
//!
//! The phonon space keeps every occupation vector with total number at most
//! `max_total_phonons`. Evolution is fixed-step RK4, in either the
//! Schrödinger picture or the interaction picture of the diagonal part.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{bare_amplitude, AmplitudeOptions};
use crate::modes::ModeBasis;
use crate::opening::OpeningFunction;
use crate::scenario::Scenario;
use crate::spin::SpinPattern;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub const MAX_DIMENSION: usize = 2_000_000;
/// Norm drift above which [`evolve`] reports a step-size failure.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// `dt·(ω_max + |Ω|_max + ε·coupling)` must not exceed this.
pub const STEP_BOUND: f64 = 1.0 / 50.0;

#[derive(Debug, Clone)]
pub struct FockSpace {
    n_modes: usize,
    max_total_phonons: usize,
    occupations: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

impl FockSpace {
    pub fn new(n_modes: usize, max_total_phonons: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameters("Fock space needs at least one mode".into()));
        }
        if max_total_phonons > u8::MAX as usize {
            return Err(Error::InvalidParameters("phonon cutoff must be <= 255".into()));
        }
        let n_occ = binomial((n_modes + max_total_phonons) as u128, max_total_phonons as u128);
        let dimension = n_occ.saturating_mul(4);
        if dimension > MAX_DIMENSION as u128 {
            return Err(Error::DimensionOverflow {
                dimension: dimension.min(usize::MAX as u128) as usize,
                limit: MAX_DIMENSION,
                hint: format!(
                    "{n_modes} modes with cutoff {max_total_phonons}; lower the cutoff or use fewer modes"
                ),
            });
        }
        let mut occupations = Vec::with_capacity(n_occ as usize);
        let mut current = vec![0u8; n_modes];
        enumerate(&mut current, 0, max_total_phonons, &mut occupations);
        let lookup = occupations
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clone(), i))
            .collect();
        Ok(FockSpace {
            n_modes,
            max_total_phonons,
            occupations,
            lookup,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn max_total_phonons(&self) -> usize {
        self.max_total_phonons
    }

    pub fn n_occupations(&self) -> usize {
        self.occupations.len()
    }

    pub fn dimension(&self) -> usize {
        4 * self.occupations.len()
    }

    pub fn occupation(&self, i: usize) -> &[u8] {
        &self.occupations[i]
    }

    pub fn index(&self, spins: SpinPattern, occupation: &[u8]) -> Option<usize> {
        self.lookup
            .get(occupation)
            .map(|o| spins.index() * self.n_occupations() + o)
    }

    pub fn vacuum(&self, spins: SpinPattern) -> usize {
        spins.index() * self.n_occupations()
    }

    pub fn state(&self, i: usize) -> (SpinPattern, &[u8]) {
        let n = self.n_occupations();
        (SpinPattern::ALL[i / n], &self.occupations[i % n])
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.dimension()];
        v[i] = Complex64::new(1.0, 0.0);
        v
    }
}

/// Lexicographic enumeration of occupation vectors with bounded total.
fn enumerate(current: &mut Vec<u8>, pos: usize, left: usize, out: &mut Vec<Vec<u8>>) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    for n in 0..=left {
        current[pos] = n as u8;
        enumerate(current, pos + 1, left - n, out);
    }
    current[pos] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Picture {
    Schrodinger,
    /// Interaction picture of `H_F + Σ ½Ω_n σ_z^n`; coincides with the
    /// Schrödinger picture at `t = 0`.
    Interaction,
}

/// Sparse action of `H(t)`. Off-diagonal entries carry `q_n σ_x^n` without
/// the `ε f_n(t)` factor, which is applied on the fly.
#[derive(Debug, Clone)]
pub struct SpinBosonHamiltonian {
    energies: Vec<f64>,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
    sites: Vec<u8>,
    epsilon: f64,
    openings: [OpeningFunction; 2],
    coupling_scale: f64,
    max_frequency: f64,
}

pub fn build_hamiltonian(
    basis: &ModeBasis,
    scenario: &Scenario,
    fock: &FockSpace,
) -> Result<SpinBosonHamiltonian> {
    scenario.validate(basis)?;
    if fock.n_modes() != basis.n_modes() {
        return Err(Error::InvalidParameters(format!(
            "Fock space has {} modes, basis has {}",
            fock.n_modes(),
            basis.n_modes()
        )));
    }
    let freqs = basis.frequencies();
    let dim = fock.dimension();
    let site_rows = [
        basis.site_coupling_row(scenario.site_a)?,
        basis.site_coupling_row(scenario.site_b)?,
    ];
    let cutoff = fock.max_total_phonons();

    let mut energies = Vec::with_capacity(dim);
    let mut row_start = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut values = Vec::new();
    let mut sites = Vec::new();
    let mut occ = Vec::with_capacity(fock.n_modes());
    for row in 0..dim {
        let (spins, occ_row) = fock.state(row);
        let phonon_energy: f64 = occ_row.iter().zip(freqs).map(|(&n, w)| n as f64 * w).sum();
        energies.push(phonon_energy + spins.energy(scenario.omega_a, scenario.omega_b));
        row_start.push(cols.len());
        let total: usize = occ_row.iter().map(|&n| n as usize).sum();
        // ⟨row| q_n σ_x^n |col⟩: col has spin n flipped and one phonon more
        // (a_k term) or one fewer (a_k† term).
        for (site, lambda) in site_rows.iter().enumerate() {
            let col_spins = spins.flip(site);
            for k in 0..fock.n_modes() {
                if total < cutoff {
                    occ.clear();
                    occ.extend_from_slice(occ_row);
                    occ[k] += 1;
                    let col = fock.index(col_spins, &occ).expect("occupation in range");
                    cols.push(col);
                    values.push(lambda[k] * (occ[k] as f64).sqrt());
                    sites.push(site as u8);
                }
                if occ_row[k] > 0 {
                    occ.clear();
                    occ.extend_from_slice(occ_row);
                    occ[k] -= 1;
                    let col = fock.index(col_spins, &occ).expect("occupation in range");
                    cols.push(col);
                    values.push(lambda[k].conj() * (occ_row[k] as f64).sqrt());
                    sites.push(site as u8);
                }
            }
        }
    }
    row_start.push(cols.len());
    let coupling_scale = site_rows
        .iter()
        .map(|row| row.iter().map(|l| l.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * 2.0
        * ((cutoff + 1) as f64).sqrt();
    Ok(SpinBosonHamiltonian {
        energies,
        row_start,
        cols,
        values,
        sites,
        epsilon: scenario.epsilon,
        openings: [scenario.opening_a.clone(), scenario.opening_b.clone()],
        coupling_scale,
        max_frequency: freqs.iter().copied().fold(0.0, f64::max) * cutoff as f64
            + scenario.omega_a.abs().max(scenario.omega_b.abs()),
    })
}

impl SpinBosonHamiltonian {
    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    /// Eigenvalues of the uncoupled Hamiltonian, one per basis state.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn nonzeros(&self) -> usize {
        self.cols.len()
    }

    /// Largest RK4 step allowed by [`STEP_BOUND`].
    pub fn max_step(&self) -> f64 {
        STEP_BOUND / (self.max_frequency + self.epsilon.abs() * self.coupling_scale)
    }

    /// `out = H(t)·psi`.
    pub fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64], picture: Picture) {
        let g = [
            self.epsilon * self.openings[0].eval(t),
            self.epsilon * self.openings[1].eval(t),
        ];
        let phases: Option<Vec<Complex64>> = match picture {
            Picture::Interaction => Some(
                self.energies
                    .iter()
                    .map(|e| Complex64::from_polar(1.0, e * t))
                    .collect(),
            ),
            Picture::Schrodinger => None,
        };
        for row in 0..self.dimension() {
            let mut acc = ZERO;
            for j in self.row_start[row]..self.row_start[row + 1] {
                let gj = g[self.sites[j] as usize];
                if gj == 0.0 {
                    continue;
                }
                let col = self.cols[j];
                let x = self.values[j] * psi[col] * gj;
                acc += match &phases {
                    Some(ph) => x * ph[row] * ph[col].conj(),
                    None => x,
                };
            }
            out[row] = match picture {
                Picture::Schrodinger => acc + self.energies[row] * psi[row],
                Picture::Interaction => acc,
            };
        }
    }

    /// Dense `H(t)`, for small spaces.
    pub fn dense(&self, t: f64, picture: Picture) -> Vec<Vec<Complex64>> {
        let n = self.dimension();
        let mut e = vec![ZERO; n];
        let mut out = vec![ZERO; n];
        let mut cols = vec![vec![ZERO; n]; n];
        for (j, col) in cols.iter_mut().enumerate() {
            e[j] = Complex64::new(1.0, 0.0);
            self.apply(t, &e, &mut out, picture);
            col.copy_from_slice(&out);
            e[j] = ZERO;
        }
        (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
    }

    /// `⟨H(t)⟩` in the Schrödinger picture for a state given in `picture`.
    pub fn energy(&self, t: f64, psi: &[Complex64], picture: Picture) -> f64 {
        let psi_s: Vec<Complex64> = match picture {
            Picture::Schrodinger => psi.to_vec(),
            Picture::Interaction => psi
                .iter()
                .zip(&self.energies)
                .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
                .collect(),
        };
        let mut h = vec![ZERO; psi.len()];
        self.apply(t, &psi_s, &mut h, Picture::Schrodinger);
        let num: Complex64 = psi_s.iter().zip(&h).map(|(a, b)| a.conj() * b).sum();
        num.re / norm(&psi_s).powi(2)
    }
}

fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub state: Vec<Complex64>,
    /// `projections[i][j] = ⟨target_j|ψ(times[i])⟩`.
    pub projections: Vec<Vec<Complex64>>,
    pub norm_drift: f64,
}

/// Classic RK4 from `t0` to `t1` with steps no longer than `dt`. The norm is
/// never renormalized; its drift is the accuracy report.
pub fn evolve(
    h: &SpinBosonHamiltonian,
    psi0: &[Complex64],
    t0: f64,
    t1: f64,
    dt: f64,
    picture: Picture,
    targets: &[usize],
) -> Result<EvolutionResult> {
    let n = h.dimension();
    if psi0.len() != n {
        return Err(Error::InvalidParameters(format!(
            "state has length {}, Hamiltonian dimension is {n}",
            psi0.len()
        )));
    }
    if let Some(&bad) = targets.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    if !(t1 >= t0 && t0.is_finite() && t1.is_finite()) {
        return Err(Error::InvalidParameters(format!("need t0 <= t1, got [{t0}, {t1}]")));
    }
    if !(dt > 0.0 && dt <= h.max_step() * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameters(format!(
            "step {dt} outside (0, {}]",
            h.max_step()
        )));
    }
    let steps = ((t1 - t0) / dt).ceil() as usize;
    let step = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
    let minus_i = Complex64::new(0.0, -1.0);

    let mut psi = psi0.to_vec();
    let norm0 = norm(&psi);
    let mut drift: f64 = 0.0;
    let deriv = |t: f64, y: &[Complex64], out: &mut [Complex64]| {
        h.apply(t, y, out, picture);
        out.iter_mut().for_each(|v| *v *= minus_i);
    };
    let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    let mut tmp = vec![ZERO; n];
    let project = |psi: &[Complex64]| targets.iter().map(|&i| psi[i]).collect::<Vec<_>>();
    let mut times = vec![t0];
    let mut projections = vec![project(&psi)];

    for s in 0..steps {
        let t = t0 + s as f64 * step;
        deriv(t, &psi, &mut k1);
        tmp.iter_mut().zip(&psi).zip(&k1).for_each(|((x, p), k)| *x = p + k * (0.5 * step));
        deriv(t + 0.5 * step, &tmp, &mut k2);
        tmp.iter_mut().zip(&psi).zip(&k2).for_each(|((x, p), k)| *x = p + k * (0.5 * step));
        deriv(t + 0.5 * step, &tmp, &mut k3);
        tmp.iter_mut().zip(&psi).zip(&k3).for_each(|((x, p), k)| *x = p + k * step);
        deriv(t + step, &tmp, &mut k4);
        for i in 0..n {
            psi[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (step / 6.0);
        }
        drift = drift.max((norm(&psi) - norm0).abs());
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::StepSize {
                drift,
                limit: NORM_DRIFT_LIMIT,
            });
        }
        times.push(t + step);
        projections.push(project(&psi));
    }
    Ok(EvolutionResult {
        times,
        state: psi,
        projections,
        norm_drift: drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub start_cutoff: usize,
    pub max_cutoff: usize,
    /// Cutoff is raised until the projected amplitude moves by less than
    /// `cutoff_tol·|A|`.
    pub cutoff_tol: f64,
    /// Step as a fraction of [`SpinBosonHamiltonian::max_step`].
    pub step_fraction: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            start_cutoff: 2,
            max_cutoff: 6,
            cutoff_tol: 1e-9,
            step_fraction: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPoint {
    pub epsilon: f64,
    pub cutoff: usize,
    pub exact: Complex64,
    pub perturbative: Complex64,
    pub residual: f64,
    pub norm_drift: f64,
}

/// Exact `⟨↓↑0|U_I(T,0)|↑↓0⟩` at the given cutoff.
pub fn exact_swap_amplitude(
    basis: &ModeBasis,
    scenario: &Scenario,
    cutoff: usize,
    step_fraction: f64,
) -> Result<(Complex64, f64)> {
    let fock = FockSpace::new(basis.n_modes(), cutoff)?;
    let h = build_hamiltonian(basis, scenario, &fock)?;
    let psi0 = fock.basis_vector(fock.vacuum(SpinPattern::UpDown));
    let target = fock.vacuum(SpinPattern::DownUp);
    let dt = h.max_step() * step_fraction;
    let r = evolve(&h, &psi0, 0.0, scenario.duration, dt, Picture::Interaction, &[target])?;
    Ok((r.state[target], r.norm_drift))
}

/// Compare the second-order amplitude at `t = T` with exact evolution,
/// raising the cutoff until the exact value settles.
pub fn compare_with_perturbation(
    basis: &ModeBasis,
    scenario: &Scenario,
    opts: &OracleOptions,
) -> Result<ComparisonPoint> {
    if opts.start_cutoff < 1 || opts.max_cutoff < opts.start_cutoff {
        return Err(Error::InvalidParameters(format!(
            "bad cutoff range {}..={}",
            opts.start_cutoff, opts.max_cutoff
        )));
    }
    if !(opts.step_fraction > 0.0 && opts.step_fraction <= 1.0) {
        return Err(Error::InvalidParameters("step_fraction must lie in (0, 1]".into()));
    }
    let pert = bare_amplitude(basis, scenario, &[scenario.duration], &AmplitudeOptions::default())?.total[0];
    let mut cutoff = opts.start_cutoff;
    let (mut exact, mut drift) = exact_swap_amplitude(basis, scenario, cutoff, opts.step_fraction)?;
    loop {
        if cutoff == opts.max_cutoff {
            return Err(Error::NumericalFailure {
                what: format!("exact amplitude not converged at cutoff {cutoff}"),
                residual: f64::NAN,
            });
        }
        let (next, next_drift) = exact_swap_amplitude(basis, scenario, cutoff + 1, opts.step_fraction)?;
        let change = (next - exact).norm();
        exact = next;
        drift = drift.max(next_drift);
        cutoff += 1;
        if change <= opts.cutoff_tol * exact.norm() {
            break;
        }
    }
    Ok(ComparisonPoint {
        epsilon: scenario.epsilon,
        cutoff,
        exact,
        perturbative: pert,
        residual: (pert - exact).norm(),
        norm_drift: drift,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSweep {
    pub points: Vec<ComparisonPoint>,
    /// Fitted log-log slope of the residual; NaN if any residual is zero.
    pub slope: f64,
}

pub fn epsilon_sweep(
    basis: &ModeBasis,
    scenario: &Scenario,
    epsilons: &[f64],
    opts: &OracleOptions,
) -> Result<EpsilonSweep> {
    let points: Vec<ComparisonPoint> = epsilons
        .par_iter()
        .map(|&e| compare_with_perturbation(basis, &scenario.with_epsilon(e), opts))
        .collect::<Result<_>>()?;
    let slope = if points.len() >= 2 && points.iter().all(|p| p.residual > 0.0 && p.epsilon > 0.0) {
        let x: Vec<f64> = points.iter().map(|p| p.epsilon).collect();
        let y: Vec<f64> = points.iter().map(|p| p.residual).collect();
        log_log_slope(&x, &y)
    } else {
        f64::NAN
    };
    Ok(EpsilonSweep { points, slope })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticReport {
    pub ramp_time: f64,
    /// `|⟨G_pert|ψ(0)⟩|` with both vectors normalized.
    pub overlap: f64,
    pub norm_drift: f64,
}

/// Number of ramp times simulated before `t = 0`.
pub const RAMP_SPAN: f64 = 10.0;

/// Switch the coupling on as `e^{t/τ}` from `t = −10τ` to `0`, starting in
/// `|↓↓0⟩`, and compare with the perturbatively dressed ground state.
pub fn adiabatic_dressing_check(
    basis: &ModeBasis,
    scenario: &Scenario,
    ramp_time: f64,
    cutoff: usize,
) -> Result<AdiabaticReport> {
    if !(ramp_time.is_finite() && ramp_time > 0.0) {
        return Err(Error::InvalidParameters(format!("ramp time must be > 0, got {ramp_time}")));
    }
    if cutoff < 2 {
        return Err(Error::InvalidParameters("the dressed state needs a cutoff of at least 2".into()));
    }
    let ramp = OpeningFunction::ExpRampThenWindow {
        ramp_time,
        inner: Box::new(OpeningFunction::Constant),
    };
    let s = Scenario {
        opening_a: ramp.clone(),
        opening_b: ramp,
        ..scenario.clone()
    };
    let analytic = crate::dressing::dressed_ground_state(basis, &s)?;
    let fock = FockSpace::new(basis.n_modes(), cutoff)?;
    let h = build_hamiltonian(basis, &s, &fock)?;
    let psi0 = fock.basis_vector(fock.vacuum(SpinPattern::DownDown));
    let r = evolve(&h, &psi0, -RAMP_SPAN * ramp_time, 0.0, h.max_step(), Picture::Interaction, &[])?;
    let g = analytic.to_fock_vector(&fock)?;
    let dot: Complex64 = g.iter().zip(&r.state).map(|(a, b)| a.conj() * b).sum();
    Ok(AdiabaticReport {
        ramp_time,
        overlap: dot.norm() / (norm(&g) * norm(&r.state)),
        norm_drift: r.norm_drift,
    })
}

pub fn adiabatic_sweep(
    basis: &ModeBasis,
    scenario: &Scenario,
    ramp_times: &[f64],
    cutoff: usize,
) -> Result<Vec<AdiabaticReport>> {
    ramp_times
        .par_iter()
        .map(|&tau| adiabatic_dressing_check(basis, scenario, tau, cutoff))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{build_harmonic_chain, ChainParams};

    fn chain(n: usize) -> ModeBasis {
        build_harmonic_chain(ChainParams::new(n, 1.0, 1.0, 1.0)).unwrap()
    }

    fn constant(eps: f64, t: f64) -> Scenario {
        Scenario::symmetric(0, 1, 2.0, eps, OpeningFunction::Constant, t)
    }

    #[test]
    fn fock_dimension_and_order() {
        let f = FockSpace::new(2, 1).unwrap();
        assert_eq!(f.dimension(), 12);
        assert_eq!(f.occupation(0), &[0, 0]);
        assert_eq!(f.occupation(1), &[0, 1]);
        assert_eq!(f.occupation(2), &[1, 0]);
        let f = FockSpace::new(3, 4).unwrap();
        assert_eq!(f.n_occupations(), 35);
        for i in 0..f.dimension() {
            let (s, o) = f.state(i);
            assert_eq!(f.index(s, o), Some(i));
        }
    }

    #[test]
    fn oversized_space_is_refused() {
        let err = FockSpace::new(100, 4).unwrap_err();
        assert!(matches!(err, Error::DimensionOverflow { limit: MAX_DIMENSION, .. }));
    }

    #[test]
    fn uncoupled_spectrum() {
        let basis = chain(3);
        let fock = FockSpace::new(3, 2).unwrap();
        let s = Scenario {
            omega_b: 3.0,
            ..constant(0.0, 1.0)
        };
        let h = build_hamiltonian(&basis, &s, &fock).unwrap();
        let dense = h.dense(0.3, Picture::Schrodinger);
        for i in 0..h.dimension() {
            let (spins, occ) = fock.state(i);
            let e: f64 = occ.iter().zip(basis.frequencies()).map(|(&n, w)| n as f64 * w).sum::<f64>()
                + spins.energy(2.0, 3.0);
            assert!((dense[i][i].re - e).abs() < 1e-14);
            for j in 0..h.dimension() {
                if i != j {
                    assert_eq!(dense[i][j], ZERO);
                }
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let basis = chain(3);
        let fock = FockSpace::new(3, 3).unwrap();
        let h = build_hamiltonian(&basis, &constant(0.7, 1.0), &fock).unwrap();
        for picture in [Picture::Schrodinger, Picture::Interaction] {
            let d = h.dense(0.37, picture);
            for i in 0..d.len() {
                for j in 0..d.len() {
                    let diff = (d[i][j] - d[j][i].conj()).norm();
                    let tol = if picture == Picture::Schrodinger { 0.0 } else { 1e-15 };
                    assert!(diff <= tol, "{picture:?} ({i},{j}) {diff}");
                }
            }
        }
    }

    #[test]
    fn decoupled_sectors_stay_empty() {
        let basis = chain(3);
        let fock = FockSpace::new(3, 2).unwrap();
        let h = build_hamiltonian(&basis, &constant(0.0, 1.0), &fock).unwrap();
        let psi0 = fock.basis_vector(fock.vacuum(SpinPattern::UpDown));
        let target = fock.vacuum(SpinPattern::DownUp);
        let r = evolve(&h, &psi0, 0.0, 1.0, h.max_step(), Picture::Schrodinger, &[target]).unwrap();
        assert!(r.projections.iter().all(|p| p[0] == ZERO));
    }

    #[test]
    fn parity_selection_rule_is_exact() {
        let basis = chain(3);
        let fock = FockSpace::new(3, 3).unwrap();
        let h = build_hamiltonian(&basis, &constant(0.3, 1.0), &fock).unwrap();
        let psi0 = fock.basis_vector(fock.vacuum(SpinPattern::UpDown));
        let r = evolve(&h, &psi0, 0.0, 1.0, h.max_step(), Picture::Interaction, &[]).unwrap();
        for (i, c) in r.state.iter().enumerate() {
            let (s, occ) = fock.state(i);
            let phonons: u32 = occ.iter().map(|&n| n as u32).sum();
            // σ_z^A σ_z^B (−1)^N is conserved; it starts at −1.
            let parity = if s.total_sz() == 0 { -1 } else { 1 } * if phonons.is_multiple_of(2) { 1 } else { -1 };
            if parity != -1 {
                assert!(c.norm() < 1e-12, "state {i} ({s:?}, {occ:?}) = {c}");
            }
        }
    }

    #[test]
    fn norm_and_energy_are_conserved() {
        let basis = chain(3);
        let fock = FockSpace::new(3, 3).unwrap();
        let h = build_hamiltonian(&basis, &constant(0.2, 2.0), &fock).unwrap();
        let psi0 = fock.basis_vector(fock.vacuum(SpinPattern::UpDown));
        for picture in [Picture::Schrodinger, Picture::Interaction] {
            let r = evolve(&h, &psi0, 0.0, 2.0, h.max_step(), picture, &[]).unwrap();
            assert!(r.norm_drift < 1e-8, "{picture:?}: {}", r.norm_drift);
            let e0 = h.energy(0.0, &psi0, picture);
            let e1 = h.energy(2.0, &r.state, picture);
            // ⟨H⟩ starts at 0 here; measure drift against the splitting.
            assert!((e1 - e0).abs() < 1e-8 * 2.0, "{picture:?}: {e0} -> {e1}");
        }
    }

    #[test]
    fn pictures_agree() {
        let basis = chain(3);
        let fock = FockSpace::new(3, 2).unwrap();
        let h = build_hamiltonian(&basis, &constant(0.2, 1.0), &fock).unwrap();
        let psi0 = fock.basis_vector(fock.vacuum(SpinPattern::UpDown));
        let dt = h.max_step() / 4.0;
        let s = evolve(&h, &psi0, 0.0, 1.0, dt, Picture::Schrodinger, &[]).unwrap();
        let i = evolve(&h, &psi0, 0.0, 1.0, dt, Picture::Interaction, &[]).unwrap();
        for (j, (a, b)) in s.state.iter().zip(&i.state).enumerate() {
            let b_s = b * Complex64::from_polar(1.0, -h.energies()[j] * 1.0);
            assert!((a - b_s).norm() < 1e-9, "{j}: {a} vs {b_s}");
        }
    }

    #[test]
    fn oversized_step_is_rejected() {
        let basis = chain(3);
        let fock = FockSpace::new(3, 2).unwrap();
        let h = build_hamiltonian(&basis, &constant(0.2, 1.0), &fock).unwrap();
        let psi0 = fock.basis_vector(0);
        assert!(evolve(&h, &psi0, 0.0, 1.0, 2.0 * h.max_step(), Picture::Schrodinger, &[]).is_err());
    }

    #[test]
    fn zero_coupling_has_zero_residual() {
        let p = compare_with_perturbation(&chain(3), &constant(0.0, 0.5), &Default::default()).unwrap();
        assert_eq!(p.residual, 0.0);
    }

    #[test]
    fn cutoff_convergence_at_small_coupling() {
        let basis = chain(3);
        let s = constant(1e-2, 1.0);
        let a2 = exact_swap_amplitude(&basis, &s, 2, 1.0).unwrap().0;
        let a3 = exact_swap_amplitude(&basis, &s, 3, 1.0).unwrap().0;
        let a4 = exact_swap_amplitude(&basis, &s, 4, 1.0).unwrap().0;
        assert!((a3 - a2).norm() < 1e-8 && (a4 - a3).norm() < 1e-8);
    }

    #[test]
    fn windowed_residual_drops_sixteenfold_per_halving() {
        // The exact amplitude is even in ε, so the first correction is ε⁴.
        let basis = chain(3);
        let s = Scenario::symmetric(0, 1, 2.0, 1e-2, OpeningFunction::SinSqWindow { duration: 1.0 }, 1.0);
        let sweep = epsilon_sweep(&basis, &s, &[1e-2, 5e-3], &Default::default()).unwrap();
        let factor = sweep.points[0].residual / sweep.points[1].residual;
        assert!((15.0..=17.0).contains(&factor), "factor {factor}");
        assert!(sweep.points.iter().all(|p| p.norm_drift <= 1e-8));
    }

    #[test]
    fn slope_fit() {
        let x = [1.0, 2.0, 4.0];
        let y = [3.0, 24.0, 192.0];
        assert!((log_log_slope(&x, &y) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_ramp_reaches_dressed_state() {
        let basis = chain(2);
        let s = constant(1e-2, 1.0);
        let taus: Vec<f64> = [6.25, 12.5, 25.0, 50.0].iter().map(|x| x / 2.0).collect();
        let reports = adiabatic_sweep(&basis, &s, &taus, 3).unwrap();
        let infid: Vec<f64> = reports.iter().map(|r| 1.0 - r.overlap).collect();
        assert!(infid.windows(2).all(|w| w[1] < w[0]), "{infid:?}");
        assert!(reports[3].overlap >= 0.999);
        let free = adiabatic_dressing_check(&basis, &constant(0.0, 1.0), 5.0, 2).unwrap();
        assert_eq!(free.overlap, 1.0);
    }
}
