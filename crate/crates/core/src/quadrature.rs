//! Composite Gauss–Legendre quadrature for smooth oscillatory integrands.
//!
//! Panels are sized so that the fastest phase gets at least
//! `min_nodes_per_period` nodes per period; the panel count is then doubled
//! until two successive results agree to `rel_tol`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(x, w)` pairs mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> Complex64>(&self, a: f64, b: f64, f: F) -> Complex64 {
        self.mapped(a, b).map(|(x, w)| f(x) * w).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub nodes_per_panel: usize,
    pub min_nodes_per_period: f64,
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            nodes_per_panel: 10,
            min_nodes_per_period: 20.0,
            rel_tol: 1e-10,
            max_doublings: 12,
        }
    }
}

impl QuadratureOptions {
    fn initial_panels(&self, max_freq: f64, length: f64) -> usize {
        let periods = max_freq.abs() * length / (2.0 * PI);
        let nodes = (self.min_nodes_per_period * periods).ceil();
        ((nodes / self.nodes_per_panel as f64).ceil() as usize).max(1)
    }
}

/// `∫₀ᵗ g(s) ds` with automatic panel doubling. `max_freq` bounds the
/// angular frequencies present in `g`.
pub fn integrate<G>(g: G, t: f64, max_freq: f64, opts: &QuadratureOptions) -> Result<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    if t <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rule = GaussLegendre::new(opts.nodes_per_panel);
    let composite = |panels: usize| -> Complex64 {
        let h = t / panels as f64;
        (0..panels)
            .map(|j| rule.integrate(j as f64 * h, (j + 1) as f64 * h, &g))
            .sum()
    };
    refine(composite, opts.initial_panels(max_freq, t), t, opts)
}

/// `∫₀ᵗ g_out(s) ∫₀ˢ g_in(u) du ds` with automatic panel doubling.
pub fn integrate_nested<GO, GI>(
    g_out: GO,
    g_in: GI,
    t: f64,
    max_freq: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64>
where
    GO: Fn(f64) -> Complex64,
    GI: Fn(f64) -> Complex64,
{
    if t <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rule = GaussLegendre::new(opts.nodes_per_panel);
    let composite = |panels: usize| -> Complex64 {
        let h = t / panels as f64;
        let mut cumulative = Complex64::new(0.0, 0.0);
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..panels {
            let a = j as f64 * h;
            let b = a + h;
            for (s, w) in rule.mapped(a, b) {
                let inner = cumulative + rule.integrate(a, s, &g_in);
                total += g_out(s) * inner * w;
            }
            cumulative += rule.integrate(a, b, &g_in);
        }
        total
    };
    refine(composite, opts.initial_panels(max_freq, t), t * t, opts)
}

fn refine<C>(composite: C, initial: usize, scale: f64, opts: &QuadratureOptions) -> Result<Complex64>
where
    C: Fn(usize) -> Complex64,
{
    let mut panels = initial;
    let mut prev = composite(panels);
    let mut diff = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        panels *= 2;
        let next = composite(panels);
        diff = (next - prev).norm();
        if diff <= opts.rel_tol * next.norm() + 1e-15 * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NumericalFailure {
        what: format!("quadrature did not converge with {panels} panels"),
        residual: diff / prev.norm().max(f64::MIN_POSITIVE),
    })
}
