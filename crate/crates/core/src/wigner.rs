//! Wigner function of eigenstates and its semiclassical limit at the mass jump.

use crate::catalog::{f_p, Preset};
use crate::error::{Error, Result};
use crate::graph::TwoEdgeGraph;
use crate::scalar::{cabs, cis, cr, wrap_angle, Cx, Real};
use crate::special::{gauss_legendre_16, pairwise_sum, sinc, sinc_tail};
use crate::spectral::{EigenSolution, ModeProfile, SpectralRoot, SpectralScan};
use nalgebra::{DMatrix, Vector4};
use rayon::prelude::*;

/// Tent functions `a_ij(x)` and the `y`-integration regions of the Wigner integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionGeometry<T: Real> {
    pub l1: T,
    pub l2: T,
    pub hbar: T,
}

pub fn region_geometry<T: Real>(g: &TwoEdgeGraph<T>) -> RegionGeometry<T> {
    RegionGeometry {
        l1: g.l1(),
        l2: g.l2(),
        hbar: g.hbar(),
    }
}

impl<T: Real> RegionGeometry<T> {
    fn two() -> T {
        T::lit(2.0)
    }

    fn half_sum(&self) -> T {
        (self.l1 + self.l2) / Self::two()
    }

    fn cross_offset(&self) -> T {
        (self.l2 - self.l1) / Self::two()
    }

    /// `(l1 - 2|x + l1/2|) / hbar`, zero outside `I1`.
    pub fn a11(&self, x: T) -> T {
        if x > -self.l1 && x < T::zero() {
            (self.l1 - Self::two() * (x + self.l1 / Self::two()).mag()) / self.hbar
        } else {
            T::zero()
        }
    }

    /// `(l2 - 2|x - l2/2|) / hbar`, zero outside `I2`.
    pub fn a22(&self, x: T) -> T {
        if x > T::zero() && x < self.l2 {
            (self.l2 - Self::two() * (x - self.l2 / Self::two()).mag()) / self.hbar
        } else {
            T::zero()
        }
    }

    /// `((l1 + l2)/2 - |x - (l2 - l1)/2| - |x|) / hbar`, zero outside `I12`.
    pub fn a12(&self, x: T) -> T {
        if x > -self.l1 / Self::two() && x < self.l2 / Self::two() {
            (self.half_sum() - (x - self.cross_offset()).mag() - x.mag()) / self.hbar
        } else {
            T::zero()
        }
    }

    /// `((l1 + l2)/2 - |x - (l2 - l1)/2| + |x|) / hbar`.
    pub fn a12_tilde(&self, x: T) -> T {
        (self.half_sum() - (x - self.cross_offset()).mag() + x.mag()) / self.hbar
    }

    /// `y`-interval of the first-edge auto block.
    pub fn r11(&self, x: T) -> Option<(T, T)> {
        let h = self.a11(x) * self.hbar;
        (h > T::zero()).then_some((-h, h))
    }

    /// `y`-interval of the second-edge auto block.
    pub fn r22(&self, x: T) -> Option<(T, T)> {
        let h = self.a22(x) * self.hbar;
        (h > T::zero()).then_some((-h, h))
    }

    /// `y`-interval where `x - y/2` lies on edge 1 and `x + y/2` on edge 2.
    pub fn r12(&self, x: T) -> Option<(T, T)> {
        let lo = Self::two() * x.mag();
        let hi = self.l1 + self.l2 - Self::two() * (x - self.cross_offset()).mag();
        (hi > lo && self.a12(x) > T::zero()).then_some((lo, hi))
    }

    /// Mirror image of [`Self::r12`].
    pub fn r21(&self, x: T) -> Option<(T, T)> {
        self.r12(x).map(|(lo, hi)| (-hi, -lo))
    }

    /// Whether any tent is positive at `x`.
    pub fn in_support(&self, x: T) -> bool {
        self.a11(x) > T::zero() || self.a22(x) > T::zero() || self.a12(x) > T::zero()
    }
}

/// `Re(amp e^{i b (p - c)}) sinc(a (p - c))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincTerm<T: Real> {
    pub amp: Cx<T>,
    pub width: T,
    pub phase_rate: T,
    pub center: T,
}

impl<T: Real> SincTerm<T> {
    pub fn value(&self, p: T) -> T {
        let q = p - self.center;
        (self.amp * cis(self.phase_rate * q)).re * sinc(self.width * q)
    }

    /// Integral of the term over `|p| > big`.
    fn tails(&self, big: T) -> T {
        let a = self.width;
        let mut b = self.phase_rate;
        if (b.mag() - a).mag() <= T::eps() * a {
            b = b + b.signum() * T::lit(16.0) * T::eps() * a;
        }
        let upper = sinc_tail(a, b, big - self.center);
        let lower = sinc_tail(a, -b, big + self.center);
        (self.amp * upper).re + (self.amp * lower).re
    }
}

fn plane_wave<T: Real>(sol: &EigenSolution<T>) -> Result<()> {
    match sol.profile() {
        ModeProfile::PlaneWave => Ok(()),
        ModeProfile::Affine => Err(Error::UnsupportedProfile),
    }
}

fn check_x<T: Real>(geom: &RegionGeometry<T>, x: T) -> Result<()> {
    if x < -geom.l1 || x > geom.l2 || !x.is_finite() {
        Err(Error::OutOfDomain {
            x: x.as_f64(),
            lo: (-geom.l1).as_f64(),
            hi: geom.l2.as_f64(),
        })
    } else {
        Ok(())
    }
}

/// Decomposes `p -> W psi(x, p)` at fixed `x` into sinc terms.
pub fn wigner_terms<T: Real>(sol: &EigenSolution<T>, x: T, geom: &RegionGeometry<T>) -> Result<Vec<SincTerm<T>>> {
    plane_wave(sol)?;
    check_x(geom, x)?;
    let c = sol.coefficients();
    let (c1, d1, c2, d2) = (c[0], c[1], c[2], c[3]);
    let (k1, k2) = sol.wavenumbers();
    let h = geom.hbar;
    let two = T::lit(2.0);
    let z = T::zero();
    let mut out = Vec::with_capacity(10);
    let auto = |out: &mut Vec<SincTerm<T>>, a: T, c: Cx<T>, d: Cx<T>, k: T| {
        if a <= z {
            return;
        }
        let s = a / T::pi();
        out.push(SincTerm { amp: cr(s * c.norm_sqr()), width: a, phase_rate: z, center: h * k });
        out.push(SincTerm { amp: cr(s * d.norm_sqr()), width: a, phase_rate: z, center: -h * k });
        out.push(SincTerm { amp: c * d.conj() * cis(two * k * x) * cr(two * s), width: a, phase_rate: z, center: z });
    };
    auto(&mut out, geom.a11(x), c1, d1, k1);
    auto(&mut out, geom.a22(x), c2, d2, k2);
    let a = geom.a12(x);
    if a > z {
        let b = geom.a12_tilde(x);
        let s = cr(two * a / T::pi());
        let (sum, dif) = ((k1 + k2) / two, (k1 - k2) / two);
        let cross = [
            (c1 * c2.conj() * cis((k1 - k2) * x), h * sum),
            (c1 * d2.conj() * cis((k1 + k2) * x), h * dif),
            (d1 * c2.conj() * cis(-(k1 + k2) * x), -h * dif),
            (d1 * d2.conj() * cis(-(k1 - k2) * x), -h * sum),
        ];
        for (amp, center) in cross {
            out.push(SincTerm { amp: amp * s, width: a, phase_rate: b, center });
        }
    }
    Ok(out)
}

/// `W psi(x, p)` from the closed form.
pub fn wigner_eval<T: Real>(sol: &EigenSolution<T>, x: T, p: T, geom: &RegionGeometry<T>) -> Result<T> {
    let terms = wigner_terms(sol, x, geom)?;
    Ok(pairwise_sum(&terms.iter().map(|t| t.value(p)).collect::<Vec<_>>()))
}

/// `W11 + W22 + W12 + W21` summed as complex numbers; its imaginary part measures realness.
pub fn wigner_eval_complex<T: Real>(sol: &EigenSolution<T>, x: T, p: T, geom: &RegionGeometry<T>) -> Result<Cx<T>> {
    plane_wave(sol)?;
    check_x(geom, x)?;
    let c = sol.coefficients();
    let (c1, d1, c2, d2) = (c[0], c[1], c[2], c[3]);
    let (k1, k2) = sol.wavenumbers();
    let h = geom.hbar;
    let two = T::lit(2.0);
    let mut w = cr(T::zero());
    let auto = |a: T, c: Cx<T>, d: Cx<T>, k: T| -> Cx<T> {
        if a <= T::zero() {
            return cr(T::zero());
        }
        let s0 = sinc(a * p);
        let terms = cr(c.norm_sqr() * sinc(a * (p - h * k)) + d.norm_sqr() * sinc(a * (p + h * k)))
            + c * d.conj() * cis(two * k * x) * cr(s0)
            + c.conj() * d * cis(-two * k * x) * cr(s0);
        terms * cr(a / T::pi())
    };
    w += auto(geom.a11(x), c1, d1, k1);
    w += auto(geom.a22(x), c2, d2, k2);
    let a = geom.a12(x);
    if a > T::zero() {
        let b = geom.a12_tilde(x);
        let (sum, dif) = ((k1 + k2) / two, (k1 - k2) / two);
        let parts = [
            (c1, c2, k1 - k2, sum),
            (c1, d2, k1 + k2, dif),
            (d1, c2, -(k1 + k2), -dif),
            (d1, d2, -(k1 - k2), -sum),
        ];
        let s = cr(a / T::pi());
        for (u, v, kx, center) in parts {
            let q = p - h * center;
            let env = cr(sinc(a * q));
            // W21 carries u conj(v), W12 carries conj(u) v with the opposite phases.
            w += u * v.conj() * cis(kx * x) * cis(b * q) * env * s;
            w += u.conj() * v * cis(-kx * x) * cis(-b * q) * env * s;
        }
    }
    Ok(w)
}

/// Which function a [`WignerGrid`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerKind {
    FiniteHbar,
    Semiclassical,
}

/// Wigner values on a rectangular grid; rows follow `x_axis`, columns `p_axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid<T: Real> {
    pub x_axis: Vec<T>,
    pub p_axis: Vec<T>,
    pub values: DMatrix<T>,
    pub kind: WignerKind,
    /// Largest `|Im|` of the complex block sum over the grid.
    pub imag_residue: T,
}

fn sorted<T: Real>(v: &[T]) -> Vec<T> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Samples `W psi` on `x_axis x p_axis`.
pub fn wigner_grid<T: Real>(sol: &EigenSolution<T>, x_axis: &[T], p_axis: &[T]) -> Result<WignerGrid<T>> {
    let geom = region_geometry(sol.graph());
    let xs = sorted(x_axis);
    let ps = sorted(p_axis);
    let rows: Vec<Vec<(T, T)>> = xs
        .par_iter()
        .map(|&x| {
            ps.iter()
                .map(|&p| {
                    let v = wigner_eval(sol, x, p, &geom)?;
                    let c = wigner_eval_complex(sol, x, p, &geom)?;
                    Ok((v, c.im.mag()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let values = DMatrix::from_fn(xs.len(), ps.len(), |i, j| rows[i][j].0);
    let imag_residue = rows
        .iter()
        .flatten()
        .fold(T::zero(), |acc, &(_, r)| acc.max(r));
    Ok(WignerGrid {
        x_axis: xs,
        p_axis: ps,
        values,
        kind: WignerKind::FiniteHbar,
        imag_residue,
    })
}

/// `int W psi(x, p) dp` by Gauss-Legendre quadrature on a finite window plus exact sinc tails.
pub fn momentum_marginal<T: Real>(sol: &EigenSolution<T>, x: T, geom: &RegionGeometry<T>) -> Result<T> {
    let terms = wigner_terms(sol, x, geom)?;
    Ok(integrate_terms(&terms))
}

fn integrate_terms<T: Real>(terms: &[SincTerm<T>]) -> T {
    if terms.is_empty() {
        return T::zero();
    }
    let a_max = terms.iter().fold(T::zero(), |m, t| m.max(t.width));
    let rate = terms
        .iter()
        .fold(T::zero(), |m, t| m.max(t.width + t.phase_rate.mag()));
    let c_max = terms.iter().fold(T::zero(), |m, t| m.max(t.center.mag()));
    let big = c_max + T::lit(40.0) * T::pi() / a_max;
    let panel = T::lit(2.0) / rate;
    let n = ((T::lit(2.0) * big) / panel).ceil().as_f64().max(1.0) as usize;
    let step = T::lit(2.0) * big / T::from_count(n);
    let mut parts = Vec::with_capacity(n + terms.len());
    for i in 0..n {
        let lo = -big + step * T::from_count(i);
        let mut s = T::zero();
        for (p, w) in gauss_legendre_16(lo, lo + step) {
            s += w * terms.iter().fold(T::zero(), |acc, t| acc + t.value(p));
        }
        parts.push(s);
    }
    parts.extend(terms.iter().map(|t| t.tails(big)));
    pairwise_sum(&parts)
}

/// `int int W psi dx dp`, with `x` on Gauss-Legendre panels between the tent kinks.
pub fn wigner_normalization<T: Real>(sol: &EigenSolution<T>, geom: &RegionGeometry<T>) -> Result<T> {
    plane_wave(sol)?;
    let two = T::lit(2.0);
    let mut breaks = vec![
        -geom.l1,
        -geom.l1 / two,
        T::zero(),
        geom.l2 / two,
        geom.l2,
        (geom.l2 - geom.l1) / two,
    ];
    breaks = sorted(&breaks);
    breaks.dedup();
    let (k1, k2) = sol.wavenumbers();
    let width = T::pi() / (T::lit(4.0) * (k1.max(k2) + T::one()));
    let mut nodes = Vec::new();
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        let n = ((b - a) / width).ceil().as_f64().max(1.0) as usize;
        let step = (b - a) / T::from_count(n);
        for i in 0..n {
            let lo = a + step * T::from_count(i);
            nodes.extend(gauss_legendre_16(lo, lo + step));
        }
    }
    let parts: Vec<T> = nodes
        .par_iter()
        .map(|&(x, w)| momentum_marginal(sol, x, geom).map(|m| w * m))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&parts))
}

/// Torus point on the segment zero set together with its limiting coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalPoint<T: Real> {
    pub energy: T,
    pub phi1: T,
    pub phi2: T,
    /// Classical momenta `sqrt(2 m_j E)`.
    pub p1: T,
    pub p2: T,
    pub coeffs: Vector4<Cx<T>>,
}

/// Limit of the segment coefficient vector along roots approaching `(phi1, phi2)`.
pub fn limit_coefficients<T: Real>(g: &TwoEdgeGraph<T>, phi1: T, phi2: T, energy: T) -> Result<SemiclassicalPoint<T>> {
    let (s1, s2) = (phi1.sin(), phi2.sin());
    let tiny = T::lit(1e-12).max(T::eps() * T::lit(64.0));
    if s1.mag() < tiny || s2.mag() < tiny {
        return Err(Error::SingularTorusPoint {
            phi1: phi1.as_f64(),
            phi2: phi2.as_f64(),
        });
    }
    let residual = f_p(Preset::Segment, g, phi1, phi2);
    let scale = T::one() + g.m1().sqrt() + g.m2().sqrt();
    if residual.mag() > T::lit(1e-8).max(T::eps().sqrt()) * scale {
        return Err(Error::OffBranch {
            preset: Preset::Segment.name(),
            branch: 0,
            residual: residual.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let norm = (two * g.l1() / (s1 * s1) + two * g.l2() / (s2 * s2)).sqrt();
    let coeffs = Vector4::new(
        cis(phi1) / cr(s1),
        -cis(-phi1) / cr(s1),
        -cis(-phi2) / cr(s2),
        cis(phi2) / cr(s2),
    ) / cr(norm);
    Ok(SemiclassicalPoint {
        energy,
        phi1,
        phi2,
        p1: (two * g.m1() * energy).sqrt(),
        p2: (two * g.m2() * energy).sqrt(),
        coeffs,
    })
}

/// `W_E(u, p)` as displayed for the limit at the junction.
pub fn semiclassical_wigner<T: Real>(pt: &SemiclassicalPoint<T>, u: T, p: T) -> T {
    let c = pt.coeffs;
    let (c1, d1, c2, d2) = (c[0], c[1], c[2], c[3]);
    let (p1, p2) = (pt.p1, pt.p2);
    let two = T::lit(2.0);
    let z = T::zero();
    let pi = T::pi();
    let block = |c: Cx<T>, d: Cx<T>, pj: T| {
        c.norm_sqr() * sinc(two * u * (p - pj))
            + d.norm_sqr() * sinc(two * u * (p + pj))
            + two * (c * d.conj() * cis(two * pj * u)).re * sinc(two * u * p)
    };
    let mut w = z;
    if u < z {
        w += two * u / pi * block(c1, d1, p1);
    }
    if u > z {
        w -= two * u / pi * block(c2, d2, p2);
    }
    let au = u.mag();
    let (sum, dif) = ((p1 + p2) / two, (p1 - p2) / two);
    let cross = c1 * c2.conj() * cis((p1 - p2) * u) * cr(sinc(two * au * (p - sum)))
        + c1 * d2.conj() * cis((p1 + p2) * u) * cr(sinc(two * au * (p - dif)))
        + d1 * c2.conj() * cis(-(p1 + p2) * u) * cr(sinc(two * au * (p + dif)))
        + d1 * d2.conj() * cis(-(p1 - p2) * u) * cr(sinc(two * au * (p + sum)));
    w - two * au / pi * cross.re
}

/// Samples [`semiclassical_wigner`] on `u_axis x p_axis`.
pub fn semiclassical_grid<T: Real>(pt: &SemiclassicalPoint<T>, u_axis: &[T], p_axis: &[T]) -> WignerGrid<T> {
    let us = sorted(u_axis);
    let ps = sorted(p_axis);
    let values = DMatrix::from_fn(us.len(), ps.len(), |i, j| semiclassical_wigner(pt, us[i], ps[j]));
    WignerGrid {
        x_axis: us,
        p_axis: ps,
        values,
        kind: WignerKind::Semiclassical,
        imag_residue: T::zero(),
    }
}

/// `hbar W psi(hbar u, p)` for the eigenfunction's own `hbar`.
pub fn scaled_wigner<T: Real>(sol: &EigenSolution<T>, u: T, p: T) -> Result<T> {
    let geom = region_geometry(sol.graph());
    Ok(geom.hbar * wigner_eval(sol, geom.hbar * u, p, &geom)?)
}

/// Geodesic distance on the flat torus `[0, 2 pi)^2`.
pub fn torus_distance<T: Real>(a: (T, T), b: (T, T)) -> T {
    let d = |x: T, y: T| {
        let r = wrap_angle(x - y);
        r.min(T::two_pi() - r)
    };
    let (d1, d2) = (d(a.0, b.0), d(a.1, b.1));
    (d1 * d1 + d2 * d2).sqrt()
}

/// Roots whose torus image `(omega1 kappa, omega2 kappa)` lies within `delta` of `target`, in increasing `kappa`.
pub fn subsequence_near<T: Real>(
    scan: &SpectralScan<T>,
    g: &TwoEdgeGraph<T>,
    target: (T, T),
    delta: T,
) -> Vec<(SpectralRoot<T>, T)> {
    let (w1, w2) = g.frequencies();
    scan.roots
        .iter()
        .filter_map(|r| {
            let d = torus_distance((w1 * r.kappa, w2 * r.kappa), target);
            (d <= delta).then_some((*r, d))
        })
        .collect()
}

/// `min_theta |v - e^{i theta} w|`.
pub fn phase_aligned_distance<T: Real>(v: &Vector4<Cx<T>>, w: &Vector4<Cx<T>>) -> T {
    let inner = w.dotc(v);
    let m = cabs(inner);
    let rot = if m > T::zero() { inner / cr(m) } else { cr(T::one()) };
    (v - w * rot).norm()
}
