//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use twoedge::catalog::Preset;
use twoedge::scalar::{cr, Cx};
use twoedge::special::gauss_legendre_16;
use twoedge::spectral::{scan_first_roots, EigenSolution, ScanOptions, SpectralScan};
use twoedge::TwoEdgeGraph;

pub fn reference_graph() -> TwoEdgeGraph<f64> {
    TwoEdgeGraph::new(16.0, 1.0, std::f64::consts::E, std::f64::consts::PI).unwrap()
}

pub fn first_roots(g: &TwoEdgeGraph<f64>, preset: Preset, count: usize) -> SpectralScan<f64> {
    scan_first_roots(g, &preset.boundary_condition(), count, &ScanOptions::default()).unwrap()
}

/// Composite 16-point Gauss-Legendre rule with `n` panels on `[a, b]`.
fn gl<F: Fn(f64) -> Cx<f64>>(f: F, a: f64, b: f64, n: usize) -> Cx<f64> {
    let h = (b - a) / n as f64;
    let mut s = cr(0.0);
    for i in 0..n {
        let lo = a + h * i as f64;
        for (x, w) in gauss_legendre_16(lo, lo + h) {
            s += f(x) * w;
        }
    }
    s
}

/// `psi(x)` taking the edge from the side of the junction `x` approaches from.
fn psi_side(sol: &EigenSolution<f64>, x: f64, left: bool) -> Cx<f64> {
    let c = sol.coefficients();
    let (k1, k2) = sol.wavenumbers();
    let e = |k: f64| cr(0.0) + Cx::new(0.0, k * x).exp();
    if left {
        c[0] * e(k1) + c[1] * e(-k1)
    } else {
        c[2] * e(k2) + c[3] * e(-k2)
    }
}

/// `(1 / 2 pi hbar) int conj(psi(x - y/2)) psi(x + y/2) e^{-i p y / hbar} dy` by direct quadrature.
pub fn wigner_integral(sol: &EigenSolution<f64>, x: f64, p: f64) -> Cx<f64> {
    let g = sol.graph();
    let (l1, l2, h) = (g.l1(), g.l2(), g.hbar());
    // Both x - y/2 and x + y/2 must lie in [-l1, l2].
    let lo = (2.0 * (x - l2)).max(-2.0 * (x + l1));
    let hi = (2.0 * (x + l1)).min(2.0 * (l2 - x));
    if hi <= lo {
        return cr(0.0);
    }
    let mut cuts = vec![lo, hi, 2.0 * x, -2.0 * x];
    cuts.retain(|&c| c >= lo && c <= hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let (k1, k2) = sol.wavenumbers();
    let rate = k1.max(k2) + p.abs() / h + 1.0;
    let mut total = cr(0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let left_minus = x - mid / 2.0 < 0.0;
        let left_plus = x + mid / 2.0 < 0.0;
        let n = ((b - a) * rate).ceil() as usize + 2;
        total += gl(
            |y| {
                psi_side(sol, x - y / 2.0, left_minus).conj()
                    * psi_side(sol, x + y / 2.0, left_plus)
                    * Cx::new(0.0, -p * y / h).exp()
            },
            a,
            b,
            n,
        );
    }
    total / (2.0 * std::f64::consts::PI * h)
}

/// `int |psi|^2` over each edge by quadrature.
pub fn edge_norms(sol: &EigenSolution<f64>) -> (f64, f64) {
    let g = sol.graph();
    let (k1, k2) = sol.wavenumbers();
    let n1 = (g.l1() * k1).ceil() as usize + 4;
    let n2 = (g.l2() * k2).ceil() as usize + 4;
    let a = gl(|x| cr(psi_side(sol, x, true).norm_sqr()), -g.l1(), 0.0, n1).re;
    let b = gl(|x| cr(psi_side(sol, x, false).norm_sqr()), 0.0, g.l2(), n2).re;
    (a, b)
}

/// Second branch of the segment zero set through `phi1`.
pub fn segment_phi2(g: &TwoEdgeGraph<f64>, phi1: f64) -> f64 {
    (-g.m1().sqrt() * phi1.sin()).atan2(g.m2().sqrt() * phi1.cos())
}
