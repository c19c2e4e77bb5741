//! Mode decomposition of quadratic bosonic systems.
//!
//! Every system is reduced to the same data: mode frequencies `ω_k` and the
//! coefficients `λ_nk` in `q_n = Σ_k (λ_nk a_k + λ*_nk a_k†)`. The harmonic
//! chain and the ion trap only differ in how those are produced.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{symmetric_eigen, SquareMatrix};
use crate::{Error, Result};

/// Periodic chain of `n_sites` oscillators on a ring of circumference
/// `length`, pinned at frequency `pinning_frequency`, with continuum
/// propagation speed `speed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub n_sites: usize,
    pub length: f64,
    pub pinning_frequency: f64,
    pub speed: f64,
}

impl ChainParams {
    pub fn new(n_sites: usize, length: f64, pinning_frequency: f64, speed: f64) -> Self {
        ChainParams {
            n_sites,
            length,
            pinning_frequency,
            speed,
        }
    }

    /// `1 − α = L²ν² / (2N²c²)`, computed directly to avoid cancellation.
    pub fn one_minus_alpha(&self) -> f64 {
        let n = self.n_sites as f64;
        let x = self.length * self.pinning_frequency / (n * self.speed);
        0.5 * x * x
    }

    /// Nearest-neighbour coupling `α = 1 − L²ν²/(2N²c²)`.
    pub fn alpha(&self) -> f64 {
        1.0 - self.one_minus_alpha()
    }

    /// `E₀ = ν / √(1 − α)`.
    pub fn e0(&self) -> f64 {
        self.pinning_frequency / self.one_minus_alpha().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidParameters("chain needs n_sites >= 1".into()));
        }
        for (name, v) in [
            ("length", self.length),
            ("pinning_frequency", self.pinning_frequency),
            ("speed", self.speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "chain {name} must be finite and > 0, got {v}"
                )));
            }
        }
        let oma = self.one_minus_alpha();
        if !(oma < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "alpha = 1 - L^2 nu^2 / (2 N^2 c^2) = {} violates alpha > 0",
                1.0 - oma
            )));
        }
        if !(oma > 0.0) {
            return Err(Error::InvalidParameters(
                "alpha = 1 - L^2 nu^2 / (2 N^2 c^2) violates alpha < 1".into(),
            ));
        }
        Ok(())
    }
}

/// Linear Paul trap with `n_ions` identical ions and axial center-of-mass
/// frequency `omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapParams {
    pub n_ions: usize,
    pub omega0: f64,
}

impl TrapParams {
    pub fn new(n_ions: usize, omega0: f64) -> Self {
        TrapParams { n_ions, omega0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 2 {
            return Err(Error::InvalidParameters(format!(
                "ion trap needs n_ions >= 2, got {}",
                self.n_ions
            )));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "trap omega0 must be finite and > 0, got {}",
                self.omega0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SystemKind {
    HarmonicChain(ChainParams),
    IonTrap {
        params: TrapParams,
        /// Dimensionless equilibrium positions, ascending.
        equilibrium: Vec<f64>,
        /// Orthogonal eigenmode matrix `D_nk` (row = ion, column = mode).
        eigenvectors: Vec<f64>,
    },
    Custom,
}

/// Frequencies and site couplings of a quadratic bosonic system.
///
/// Immutable after construction. The canonical normalization
/// `Σ_k 2ω_k |λ_nk|² = 1` holds for every site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBasis {
    n_sites: usize,
    frequencies: Vec<f64>,
    /// Row-major `n_sites × n_modes`.
    couplings: Vec<Complex64>,
    kind: SystemKind,
}

pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

impl ModeBasis {
    /// Build a basis from explicit data, checking positivity and the
    /// canonical normalization.
    pub fn custom(frequencies: Vec<f64>, couplings: Vec<Vec<Complex64>>) -> Result<Self> {
        let n_sites = couplings.len();
        let n_modes = frequencies.len();
        if n_sites == 0 || n_modes == 0 {
            return Err(Error::InvalidParameters("empty mode basis".into()));
        }
        if couplings.iter().any(|row| row.len() != n_modes) {
            return Err(Error::InvalidParameters(
                "every coupling row needs one entry per mode".into(),
            ));
        }
        let basis = ModeBasis {
            n_sites,
            frequencies,
            couplings: couplings.into_iter().flatten().collect(),
            kind: SystemKind::Custom,
        };
        basis.check()?;
        Ok(basis)
    }

    fn check(&self) -> Result<()> {
        if let Some(w) = self.frequencies.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameters(format!(
                "mode frequencies must be finite and > 0, found {w}"
            )));
        }
        let dev = self.max_normalization_error();
        if !(dev <= NORMALIZATION_TOLERANCE) {
            return Err(Error::InvalidParameters(format!(
                "canonical normalization violated by {dev:e}"
            )));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn chain_params(&self) -> Option<&ChainParams> {
        match &self.kind {
            SystemKind::HarmonicChain(p) => Some(p),
            _ => None,
        }
    }

    pub fn max_frequency(&self) -> f64 {
        self.frequencies.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_frequency(&self) -> f64 {
        self.frequencies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn check_site(&self, n: usize) -> Result<()> {
        if n < self.n_sites {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: n,
                len: self.n_sites,
            })
        }
    }

    /// `λ_nk` without bounds reporting; panics on a bad index.
    #[inline]
    pub fn coupling(&self, n: usize, k: usize) -> Complex64 {
        self.couplings[n * self.n_modes() + k]
    }

    /// Row `n` of the coupling matrix.
    pub fn site_coupling_row(&self, n: usize) -> Result<&[Complex64]> {
        self.check_site(n)?;
        let m = self.n_modes();
        Ok(&self.couplings[n * m..(n + 1) * m])
    }

    /// `Σ_k 2ω_k |λ_nk|²` for site `n`.
    pub fn normalization(&self, n: usize) -> f64 {
        (0..self.n_modes())
            .map(|k| 2.0 * self.frequencies[k] * self.coupling(n, k).norm_sqr())
            .sum()
    }

    pub fn max_normalization_error(&self) -> f64 {
        (0..self.n_sites)
            .map(|n| (self.normalization(n) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Time scale on which a signal is expected to travel from `a` to `b`:
    /// `L·R/(c·N)` on a chain (shortest way round the ring), `1/ω_min` on a
    /// trap. `None` for custom bases.
    pub fn nominal_causal_time(&self, a: usize, b: usize) -> Option<f64> {
        match &self.kind {
            SystemKind::HarmonicChain(p) => {
                let r = ring_distance(a, b, p.n_sites);
                Some(p.length * r as f64 / (p.speed * p.n_sites as f64))
            }
            SystemKind::IonTrap { .. } => Some(1.0 / self.min_frequency()),
            SystemKind::Custom => None,
        }
    }
}

/// Shortest separation of two sites on a ring of `n` sites.
pub fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = (b as i64 - a as i64).rem_euclid(n as i64) as usize;
    d.min(n - d)
}

/// Mode basis of the periodic chain: `ω_k = E₀√(1 − α cos θ_k)`,
/// `λ_nk = e^{iθ_k n}/√(2Nω_k)`, `θ_k = 2πk/N`.
///
/// Modes `k` and `N − k` are kept separate; their frequencies agree bit for
/// bit and their couplings are exact complex conjugates.
pub fn build_harmonic_chain(params: ChainParams) -> Result<ModeBasis> {
    params.validate()?;
    let n = params.n_sites;
    let oma = params.one_minus_alpha();
    let alpha = params.alpha();
    let nu = params.pinning_frequency;

    // 1 − α cos θ = (1 − α) + 2α sin²(θ/2); evaluated on the folded index so
    // that ω_k and ω_{N−k} are identical.
    let frequencies: Vec<f64> = (0..n)
        .map(|k| {
            let kf = k.min(n - k) as f64;
            let s = (PI * kf / n as f64).sin();
            nu * (1.0 + 2.0 * alpha * s * s / oma).sqrt()
        })
        .collect();

    let mut couplings = Vec::with_capacity(n * n);
    for site in 0..n {
        for (k, &w) in frequencies.iter().enumerate() {
            let amp = 1.0 / (2.0 * n as f64 * w).sqrt();
            // Phase θ_k·site reduced mod 2π in exact integer arithmetic.
            let m = (k * site) % n;
            let signed = if 2 * m > n { m as f64 - n as f64 } else { m as f64 };
            let phase = 2.0 * PI * signed / n as f64;
            let c = if 2 * m == n {
                Complex64::new(-amp, 0.0)
            } else if m == 0 {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::from_polar(amp, phase)
            };
            couplings.push(c);
        }
    }

    Ok(ModeBasis {
        n_sites: n,
        frequencies,
        couplings,
        kind: SystemKind::HarmonicChain(params),
    })
}

/// Equilibrium positions of `n` ions in the dimensionless linear trap
/// potential `Σ u_i²/2 + Σ_{i<j} 1/|u_i − u_j|`.
pub fn ion_equilibrium(n: usize) -> Result<Vec<f64>> {
    const MAX_ITER: usize = 200;
    const TOL: f64 = 1e-14;

    let spacing = 2.018 / (n as f64).powf(0.559);
    let mut u: Vec<f64> = (0..n)
        .map(|i| spacing * (i as f64 - (n as f64 - 1.0) / 2.0))
        .collect();

    let gradient = |u: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut g = u[i];
                for j in 0..n {
                    if j != i {
                        let d = u[i] - u[j];
                        g -= d.signum() / (d * d);
                    }
                }
                g
            })
            .collect()
    };
    let norm = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut g = gradient(&u);
    let mut residual = norm(&g);
    for _ in 0..MAX_ITER {
        if residual < TOL {
            return Ok(u);
        }
        let h = trap_hessian(&u);
        let step = solve_linear(&h, &g.iter().map(|x| -x).collect::<Vec<_>>())?;
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + damping * s).collect();
            let ordered = trial.windows(2).all(|w| w[0] < w[1]);
            if ordered {
                let gt = gradient(&trial);
                let rt = norm(&gt);
                if rt < residual || damping < 1e-6 {
                    u = trial;
                    g = gt;
                    residual = rt;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-12 {
                return Err(Error::NumericalFailure {
                    what: "ion equilibrium line search stalled".into(),
                    residual,
                });
            }
        }
    }
    if residual < TOL {
        Ok(u)
    } else {
        Err(Error::NumericalFailure {
            what: format!("ion equilibrium did not converge in {MAX_ITER} Newton steps"),
            residual,
        })
    }
}

/// Hessian of the dimensionless trap potential at positions `u`:
/// `H_ii = 1 + 2Σ_{j≠i} 1/|u_i−u_j|³`, `H_ij = −2/|u_i−u_j|³`.
pub fn trap_hessian(u: &[f64]) -> SquareMatrix {
    let n = u.len();
    let mut h = SquareMatrix::zeros(n);
    for i in 0..n {
        h[(i, i)] = 1.0;
        for j in 0..n {
            if i != j {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                h[(i, i)] += c;
                h[(i, j)] = -c;
            }
        }
    }
    h
}

fn solve_linear(a: &SquareMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap();
        if m[(piv, col)].abs() < 1e-300 {
            return Err(Error::NumericalFailure {
                what: "singular Hessian in ion equilibrium solve".into(),
                residual: 0.0,
            });
        }
        if piv != col {
            for k in 0..n {
                let t = m[(col, k)];
                m[(col, k)] = m[(piv, k)];
                m[(piv, k)] = t;
            }
            x.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[(r, col)] / m[(col, col)];
            for k in col..n {
                m[(r, k)] -= f * m[(col, k)];
            }
            x[r] -= f * x[col];
        }
    }
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|k| m[(r, k)] * x[k]).sum();
        x[r] = (x[r] - s) / m[(r, r)];
    }
    Ok(x)
}

/// Axial normal modes of a linear ion crystal: `ω_k = ω₀√μ_k` from the
/// trap Hessian, `λ_nk = D_nk/√(2ω_k)`.
pub fn build_ion_trap(params: TrapParams) -> Result<ModeBasis> {
    params.validate()?;
    let n = params.n_ions;
    let u = ion_equilibrium(n)?;
    let eig = symmetric_eigen(&trap_hessian(&u), 1e-14)?;
    let frequencies: Vec<f64> = eig
        .values
        .iter()
        .map(|&mu| params.omega0 * mu.sqrt())
        .collect();
    let mut couplings = Vec::with_capacity(n * n);
    for site in 0..n {
        for (k, &w) in frequencies.iter().enumerate() {
            couplings.push(Complex64::new(eig.vectors[(site, k)] / (2.0 * w).sqrt(), 0.0));
        }
    }
    let mut eigenvectors = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            eigenvectors.push(eig.vectors[(i, k)]);
        }
    }
    let basis = ModeBasis {
        n_sites: n,
        frequencies,
        couplings,
        kind: SystemKind::IonTrap {
            params,
            equilibrium: u,
            eigenvectors,
        },
    };
    basis.check()?;
    Ok(basis)
}
