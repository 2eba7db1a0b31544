//! Spectral matrix `A_U(kappa)` and its numerical kernel.

use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, TwoEdgeGraph};
use crate::scalar::{carg, cis, cr, Cx, Real};
use nalgebra::{Matrix4, Vector4};

/// `A_U(kappa) = (I + U) X(kappa) + kappa (I - U) G Y(kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMatrix<T: Real> {
    pub kappa: T,
    pub a: Matrix4<Cx<T>>,
}

impl<T: Real> SpectralMatrix<T> {
    /// Determinant by compensated cofactor expansion.
    pub fn determinant(&self) -> Cx<T> {
        compensated_determinant(&self.a)
    }

    /// Singular values in ascending order.
    pub fn singular_values(&self) -> [T; 4] {
        sorted_singular_values(&self.a)
    }
}

/// Value-trace matrix: `gamma = X c` for `c = (c1, d1, c2, d2)`.
#[rustfmt::skip]
pub fn value_matrix<T: Real>(g: &TwoEdgeGraph<T>, kappa: T) -> Matrix4<Cx<T>> {
    let (w1, w2) = g.frequencies();
    let (e1, e2) = (cis(w1 * kappa), cis(w2 * kappa));
    let (o, z) = (cr(T::one()), cr(T::zero()));
    Matrix4::new(
        e1.conj(), e1, z, z,
        o, o, z, z,
        z, z, o, o,
        z, z, e2, e2.conj(),
    )
}

/// Derivative-trace matrix: `nu = -i kappa G Y c`.
#[rustfmt::skip]
pub fn derivative_matrix<T: Real>(g: &TwoEdgeGraph<T>, kappa: T) -> Matrix4<Cx<T>> {
    let (w1, w2) = g.frequencies();
    let (e1, e2) = (cis(w1 * kappa), cis(w2 * kappa));
    let (o, z) = (cr(T::one()), cr(T::zero()));
    Matrix4::new(
        e1.conj(), -e1, z, z,
        -o, o, z, z,
        z, z, o, -o,
        z, z, -e2, e2.conj(),
    )
}

/// `diag(1/sqrt(m1), 1/sqrt(m1), 1/sqrt(m2), 1/sqrt(m2))`.
pub fn mass_matrix<T: Real>(g: &TwoEdgeGraph<T>) -> Matrix4<Cx<T>> {
    let a = cr(T::one() / g.m1().sqrt());
    let b = cr(T::one() / g.m2().sqrt());
    Matrix4::from_diagonal(&Vector4::new(a, a, b, b))
}

pub fn assemble_spectral_matrix<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    kappa: T,
) -> SpectralMatrix<T> {
    let id = Matrix4::<Cx<T>>::identity();
    let u = bc.unitary();
    let a = (id + u) * value_matrix(g, kappa)
        + (id - u) * mass_matrix(g) * derivative_matrix(g, kappa) * cr(kappa);
    SpectralMatrix { kappa, a }
}

/// `S_U(kappa) = det A_U(kappa)`.
pub fn spectral_function<T: Real>(g: &TwoEdgeGraph<T>, bc: &BoundaryCondition<T>, kappa: T) -> Cx<T> {
    assemble_spectral_matrix(g, bc, kappa).determinant()
}

/// Smallest singular value of `A_U(kappa)`.
pub fn singular_gap<T: Real>(g: &TwoEdgeGraph<T>, bc: &BoundaryCondition<T>, kappa: T) -> T {
    assemble_spectral_matrix(g, bc, kappa).singular_values()[0]
}

/// A matrix with the same kernel as `A_U(kappa)` for `kappa > 0` and entries of unit scale.
///
/// Scale-free conditions use `(I - P) X + P G Y`; general ones use `A_U` with unit rows.
pub fn balanced_matrix<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    kappa: T,
) -> Matrix4<Cx<T>> {
    match bc.projection() {
        Some((p, _)) => {
            let id = Matrix4::<Cx<T>>::identity();
            (id - p) * value_matrix(g, kappa) + p * mass_matrix(g) * derivative_matrix(g, kappa)
        }
        None => {
            let mut a = assemble_spectral_matrix(g, bc, kappa).a;
            for mut row in a.row_iter_mut() {
                let n = row.norm();
                if n > T::zero() {
                    row /= cr(n);
                }
            }
            a
        }
    }
}

/// Unimodular factor that makes `det` of the balanced matrix real when `U = U^T`.
pub fn indicator_phase<T: Real>(bc: &BoundaryCondition<T>) -> Cx<T> {
    match bc.projection() {
        Some((_, rank)) => cis(-T::frac_pi_2() * T::from_count(rank)),
        None => {
            let d = bc.unitary().determinant();
            cis(-carg(d) * T::lit(0.5))
        }
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy)]
struct Dd<T: Real> {
    hi: T,
    lo: T,
}

fn two_sum<T: Real>(a: T, b: T) -> Dd<T> {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn two_prod<T: Real>(a: T, b: T) -> Dd<T> {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl<T: Real> Dd<T> {
    fn from(x: T) -> Self {
        Self { hi: x, lo: T::zero() }
    }

    fn add(self, o: Self) -> Self {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let v = two_sum(s.hi, s.lo + t.hi);
        two_sum(v.hi, v.lo + t.lo)
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Self) -> Self {
        let p = two_prod(self.hi, o.hi);
        two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

#[derive(Clone, Copy)]
struct DdCx<T: Real> {
    re: Dd<T>,
    im: Dd<T>,
}

impl<T: Real> DdCx<T> {
    fn from(z: Cx<T>) -> Self {
        Self {
            re: Dd::from(z.re),
            im: Dd::from(z.im),
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    fn neg(self) -> Self {
        Self {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
}

/// 4x4 determinant by Laplace expansion in double-word arithmetic.
///
/// The result is the determinant of the stored (rounded) entries up to a final rounding,
/// so cancellation between large cofactors does not lose accuracy.
pub fn compensated_determinant<T: Real>(m: &Matrix4<Cx<T>>) -> Cx<T> {
    let e = |i: usize, j: usize| DdCx::from(m[(i, j)]);
    let minor = |c0: usize, c1: usize, r0: usize, r1: usize| e(r0, c0).mul(e(r1, c1)).add(e(r0, c1).mul(e(r1, c0)).neg());
    // Expansion along rows (0, 1) against complementary rows (2, 3).
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut acc = DdCx::from(Cx::new(T::zero(), T::zero()));
    for &(a, b) in &PAIRS {
        let (c, d) = match (a, b) {
            (0, 1) => (2, 3),
            (0, 2) => (1, 3),
            (0, 3) => (1, 2),
            (1, 2) => (0, 3),
            (1, 3) => (0, 2),
            _ => (0, 1),
        };
        let term = minor(a, b, 0, 1).mul(minor(c, d, 2, 3));
        let sign_odd = (a + b + 1) % 2 == 1;
        acc = acc.add(if sign_odd { term.neg() } else { term });
    }
    Cx::new(acc.re.hi + acc.re.lo, acc.im.hi + acc.im.lo)
}

/// Ascending singular values of a 4x4 complex matrix.
pub fn sorted_singular_values<T: Real>(m: &Matrix4<Cx<T>>) -> [T; 4] {
    let s = m.singular_values();
    let mut out = [s[0], s[1], s[2], s[3]];
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// `sigma_min / sigma_max`, or zero for the zero matrix.
pub fn relative_gap<T: Real>(m: &Matrix4<Cx<T>>) -> T {
    let s = sorted_singular_values(m);
    if s[3] > T::zero() {
        s[0] / s[3]
    } else {
        T::zero()
    }
}

/// Orthonormal basis of the right singular vectors with `sigma <= rank_tol * sigma_max`.
pub fn kernel_basis<T: Real>(m: &Matrix4<Cx<T>>, rank_tol: T, kappa: T) -> Result<Vec<Vector4<Cx<T>>>> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let smax = svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s));
    let mut picked: Vec<(T, Vector4<Cx<T>>)> = Vec::new();
    let mut smin = T::infinity();
    for i in 0..4 {
        let s = svd.singular_values[i];
        smin = smin.min(s);
        if s <= rank_tol * smax {
            let row = v_t.row(i);
            let v = Vector4::new(row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj());
            picked.push((s, v));
        }
    }
    if picked.is_empty() {
        let ratio = if smax > T::zero() { smin / smax } else { T::zero() };
        return Err(Error::EmptyKernel {
            kappa: kappa.as_f64(),
            ratio: ratio.as_f64(),
        });
    }
    picked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(picked.into_iter().map(|(_, v)| v).collect())
}

/// Numerical kernel of `A_U(kappa)`.
pub fn null_space<T: Real>(a: &SpectralMatrix<T>, rank_tol: T) -> Result<Vec<Vector4<Cx<T>>>> {
    kernel_basis(&a.a, rank_tol, a.kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> TwoEdgeGraph<f64> {
        TwoEdgeGraph::new(16.0, 1.0, std::f64::consts::E, std::f64::consts::PI).unwrap()
    }

    #[test]
    fn dirichlet_determinant_is_product_of_sines() {
        let g = graph();
        let bc = BoundaryCondition::dirichlet();
        let (w1, w2) = g.frequencies();
        for &k in &[0.1, 0.77, 3.3] {
            let s = spectral_function(&g, &bc, k);
            let expect = -64.0 * (w1 * k).sin() * (w2 * k).sin();
            assert!((s.re - expect).abs() < 1e-12 && s.im.abs() < 1e-12, "{s} vs {expect}");
        }
    }

    #[test]
    fn compensated_determinant_matches_lu() {
        let g = graph();
        let bc = BoundaryCondition::from_span(&[Vector4::new(cr(0.3), cr(1.0), cr(-0.2), cr(0.7))]).unwrap();
        for &k in &[0.2, 1.7, 9.4] {
            let a = assemble_spectral_matrix(&g, &bc, k).a;
            let d = compensated_determinant(&a);
            assert!((d - a.determinant()).norm() < 1e-12 * (1.0 + d.norm()));
        }
        let perm = Matrix4::new(
            cr(0.0), cr(1.0), cr(0.0), cr(0.0),
            cr(1.0), cr(0.0), cr(0.0), cr(0.0),
            cr(0.0), cr(0.0), cr(0.0), cr(1.0),
            cr(0.0), cr(0.0), cr(1.0), cr(0.0),
        );
        assert_eq!(compensated_determinant(&perm), cr(1.0));
    }

    #[test]
    fn balanced_matrix_shares_kernel_direction() {
        let g = graph();
        let bc = BoundaryCondition::neumann();
        let k = 0.9;
        let a = assemble_spectral_matrix(&g, &bc, k).a;
        let b = balanced_matrix(&g, &bc, k);
        assert!((a - b * cr(2.0 * k)).norm() < 1e-12);
    }

    #[test]
    fn kernel_of_rank_deficient_matrix() {
        let mut m = Matrix4::<Cx<f64>>::identity();
        m[(2, 2)] = cr(0.0);
        let k = kernel_basis(&m, 1e-8, 0.0).unwrap();
        assert_eq!(k.len(), 1);
        assert!((k[0][2].norm() - 1.0).abs() < 1e-14);
        assert!(matches!(
            kernel_basis(&Matrix4::<Cx<f64>>::identity(), 1e-8, 1.0),
            Err(Error::EmptyKernel { .. })
        ));
    }
}
