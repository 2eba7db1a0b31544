//! Normalized eigenfunctions built from kernel vectors of the spectral matrix.

use super::matrix::{balanced_matrix, kernel_basis};
use super::scan::{default_rank_tol, SpectralRoot};
use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, BoundaryTrace, TwoEdgeGraph};
use crate::scalar::{cabs, cis, cr, cx, Cx, Real};
use crate::special::sinc;
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

/// Functional form of an eigenfunction on each edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeProfile {
    /// `c e^{ikx} + d e^{-ikx}` with coefficients `(c1, d1, c2, d2)`.
    PlaneWave,
    /// `a + b x` with coefficients `(a1, b1, a2, b2)`; only at `kappa = 0`.
    Affine,
}

/// L2-normalized eigenfunction with a fixed global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution<T: Real> {
    graph: TwoEdgeGraph<T>,
    root: SpectralRoot<T>,
    coeffs: Vector4<Cx<T>>,
    profile: ModeProfile,
    weights: (T, T),
}

impl<T: Real> EigenSolution<T> {
    /// Normalizes `coeffs` and fixes the phase; the coefficients need not be normalized.
    pub fn from_coefficients(
        graph: TwoEdgeGraph<T>,
        root: SpectralRoot<T>,
        coeffs: Vector4<Cx<T>>,
        profile: ModeProfile,
    ) -> Self {
        let (m1, m2) = gram_blocks(&graph, root.kappa, profile);
        let (coeffs, weights) = normalize(coeffs, &m1, &m2);
        Self {
            graph,
            root,
            coeffs,
            profile,
            weights,
        }
    }

    pub fn graph(&self) -> &TwoEdgeGraph<T> {
        &self.graph
    }

    pub fn root(&self) -> &SpectralRoot<T> {
        &self.root
    }

    pub fn kappa(&self) -> T {
        self.root.kappa
    }

    pub fn energy(&self) -> T {
        self.graph.energy(self.root.kappa)
    }

    pub fn coefficients(&self) -> &Vector4<Cx<T>> {
        &self.coeffs
    }

    pub fn profile(&self) -> ModeProfile {
        self.profile
    }

    /// `(k1, k2) = (kappa sqrt(m1), kappa sqrt(m2))`.
    pub fn wavenumbers(&self) -> (T, T) {
        self.graph.wavenumbers(self.root.kappa)
    }

    /// `(||psi_1||^2, ||psi_2||^2)`, summing to one.
    pub fn edge_weights(&self) -> (T, T) {
        self.weights
    }

    /// `||psi_2||^2 - ||psi_1||^2`.
    pub fn leaning(&self) -> T {
        self.weights.1 - self.weights.0
    }

    fn check_domain(&self, x: T) -> Result<()> {
        let (lo, hi) = (-self.graph.l1(), self.graph.l2());
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x: x.as_f64(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            })
        }
    }

    /// `psi(x)`; the junction `x = 0` evaluates the first edge.
    pub fn evaluate(&self, x: T) -> Result<Cx<T>> {
        self.check_domain(x)?;
        Ok(self.value_on_edge(x, x <= T::zero()))
    }

    /// `psi'(x)`; the junction `x = 0` evaluates the first edge.
    pub fn derivative(&self, x: T) -> Result<Cx<T>> {
        self.check_domain(x)?;
        Ok(self.derivative_on_edge(x, x <= T::zero()))
    }

    fn edge_coeffs(&self, first: bool) -> (Cx<T>, Cx<T>, T) {
        let (k1, k2) = self.wavenumbers();
        if first {
            (self.coeffs[0], self.coeffs[1], k1)
        } else {
            (self.coeffs[2], self.coeffs[3], k2)
        }
    }

    fn value_on_edge(&self, x: T, first: bool) -> Cx<T> {
        let (c, d, k) = self.edge_coeffs(first);
        match self.profile {
            ModeProfile::PlaneWave => c * cis(k * x) + d * cis(-k * x),
            ModeProfile::Affine => c + d * x,
        }
    }

    fn derivative_on_edge(&self, x: T, first: bool) -> Cx<T> {
        let (c, d, k) = self.edge_coeffs(first);
        match self.profile {
            ModeProfile::PlaneWave => (c * cis(k * x) - d * cis(-k * x)) * cx(T::zero(), k),
            ModeProfile::Affine => d,
        }
    }

    /// Boundary trace `(gamma, nu)` of the eigenfunction.
    pub fn trace(&self) -> BoundaryTrace<T> {
        let (l1, l2) = (self.graph.l1(), self.graph.l2());
        let z = T::zero();
        let values = [
            self.value_on_edge(-l1, true),
            self.value_on_edge(z, true),
            self.value_on_edge(z, false),
            self.value_on_edge(l2, false),
        ];
        let derivatives = [
            self.derivative_on_edge(-l1, true),
            self.derivative_on_edge(z, true),
            self.derivative_on_edge(z, false),
            self.derivative_on_edge(l2, false),
        ];
        BoundaryTrace::from_endpoints(&self.graph, values, derivatives)
    }
}

/// Hermitian forms `(N1, N2)` with `||psi_j||^2 = c^* N_j c`.
pub fn gram_blocks<T: Real>(
    g: &TwoEdgeGraph<T>,
    kappa: T,
    profile: ModeProfile,
) -> (Matrix4<Cx<T>>, Matrix4<Cx<T>>) {
    let (l1, l2) = (g.l1(), g.l2());
    let mut n1 = Matrix4::<Cx<T>>::zeros();
    let mut n2 = Matrix4::<Cx<T>>::zeros();
    match profile {
        ModeProfile::PlaneWave => {
            let (w1, w2) = g.frequencies();
            let (p1, p2) = (w1 * kappa, w2 * kappa);
            let z1 = cis(-p1) * (l1 * sinc(p1));
            let z2 = cis(p2) * (l2 * sinc(p2));
            n1[(0, 0)] = cr(l1);
            n1[(1, 1)] = cr(l1);
            n1[(0, 1)] = z1.conj();
            n1[(1, 0)] = z1;
            n2[(2, 2)] = cr(l2);
            n2[(3, 3)] = cr(l2);
            n2[(2, 3)] = z2.conj();
            n2[(3, 2)] = z2;
        }
        ModeProfile::Affine => {
            let half = T::lit(0.5);
            let third = T::one() / T::lit(3.0);
            n1[(0, 0)] = cr(l1);
            n1[(0, 1)] = cr(-half * l1 * l1);
            n1[(1, 0)] = cr(-half * l1 * l1);
            n1[(1, 1)] = cr(third * l1 * l1 * l1);
            n2[(2, 2)] = cr(l2);
            n2[(2, 3)] = cr(half * l2 * l2);
            n2[(3, 2)] = cr(half * l2 * l2);
            n2[(3, 3)] = cr(third * l2 * l2 * l2);
        }
    }
    (n1, n2)
}

fn quad<T: Real>(v: &Vector4<Cx<T>>, m: &Matrix4<Cx<T>>) -> T {
    v.dotc(&(m * v)).re
}

/// Rotates `v` so that its largest-magnitude entry (first on ties) is real and positive.
pub fn fix_phase<T: Real>(v: Vector4<Cx<T>>) -> Vector4<Cx<T>> {
    let max = v.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)));
    if max == T::zero() {
        return v;
    }
    let cut = max * (T::one() - T::lit(1e-8).max(T::eps() * T::lit(16.0)));
    let pivot = v.iter().find(|z| cabs(**z) >= cut).copied().unwrap_or(v[0]);
    v * (pivot.conj() / cr(cabs(pivot)))
}

fn normalize<T: Real>(
    v: Vector4<Cx<T>>,
    n1: &Matrix4<Cx<T>>,
    n2: &Matrix4<Cx<T>>,
) -> (Vector4<Cx<T>>, (T, T)) {
    let total = quad(&v, n1) + quad(&v, n2);
    let v = fix_phase(v / cr(total.sqrt()));
    let (a, b) = (quad(&v, n1), quad(&v, n2));
    let s = a + b;
    (v / cr(s.sqrt()), (a / s, b / s))
}

/// Kernel basis orthonormal in L2 that diagonalizes the leaning form, ordered by leaning.
fn leaning_basis<T: Real>(
    basis: &[Vector4<Cx<T>>],
    n1: &Matrix4<Cx<T>>,
    n2: &Matrix4<Cx<T>>,
) -> Vec<Vector4<Cx<T>>> {
    let d = basis.len();
    if d <= 1 {
        return basis.to_vec();
    }
    let v = DMatrix::from_fn(4, d, |i, j| basis[j][i]);
    let n1d = DMatrix::from_fn(4, 4, |i, j| n1[(i, j)]);
    let n2d = DMatrix::from_fn(4, 4, |i, j| n2[(i, j)]);
    let gram = v.adjoint() * (&n1d + &n2d) * &v;
    let lean = v.adjoint() * (&n2d - &n1d) * &v;
    let gram = (&gram + gram.adjoint()) * cr(T::lit(0.5));
    let lean = (&lean + lean.adjoint()) * cr(T::lit(0.5));
    let Some(chol) = gram.clone().cholesky() else {
        return basis.to_vec();
    };
    let l = chol.l();
    let Some(linv) = l.clone().try_inverse() else {
        return basis.to_vec();
    };
    let c = &linv * lean * linv.adjoint();
    let c = (&c + c.adjoint()) * cr(T::lit(0.5));
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let back = linv.adjoint();
    order
        .into_iter()
        .map(|k| {
            let z: DVector<Cx<T>> = eig.eigenvectors.column(k).into_owned();
            let y = &back * z;
            let c = &v * y;
            Vector4::new(c[0], c[1], c[2], c[3])
        })
        .collect()
}

/// One eigenfunction per kernel dimension at a root, ordered by leaning.
pub fn build_eigensolutions<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    root: &SpectralRoot<T>,
    rank_tol: T,
) -> Result<Vec<EigenSolution<T>>> {
    if root.is_zero_mode {
        return Ok(detect_zero_modes(g, bc));
    }
    let m = balanced_matrix(g, bc, root.kappa);
    let kernel = kernel_basis(&m, rank_tol, root.kappa)?;
    let (n1, n2) = gram_blocks(g, root.kappa, ModeProfile::PlaneWave);
    Ok(leaning_basis(&kernel, &n1, &n2)
        .into_iter()
        .map(|c| EigenSolution::from_coefficients(*g, *root, c, ModeProfile::PlaneWave))
        .collect())
}

/// Eigenfunction from the smallest singular direction at a root.
pub fn build_eigensolution<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    root: &SpectralRoot<T>,
) -> Result<EigenSolution<T>> {
    let m = balanced_matrix(g, bc, root.kappa);
    let kernel = kernel_basis(&m, default_rank_tol(), root.kappa)?;
    Ok(EigenSolution::from_coefficients(
        *g,
        *root,
        kernel[0],
        ModeProfile::PlaneWave,
    ))
}

/// Boundary system for affine functions: `gamma = Gamma v`, `nu = N v`.
fn zero_mode_matrix<T: Real>(g: &TwoEdgeGraph<T>, bc: &BoundaryCondition<T>) -> Matrix4<Cx<T>> {
    let (l1, l2) = (g.l1(), g.l2());
    let (o, z) = (T::one(), T::zero());
    let (i1, i2) = (o / g.m1(), o / g.m2());
    #[rustfmt::skip]
    let gamma = Matrix4::new(
        o, -l1, z, z,
        o, z, z, z,
        z, z, o, z,
        z, z, o, l2,
    )
    .map(cr);
    #[rustfmt::skip]
    let nu = Matrix4::new(
        z, -i1, z, z,
        z, i1, z, z,
        z, z, z, -i2,
        z, z, z, i2,
    )
    .map(cr);
    let id = Matrix4::<Cx<T>>::identity();
    let u = bc.unitary();
    (id + u) * gamma * cx(T::zero(), T::one()) - (id - u) * nu
}

/// Tolerance for the exact (not root-refined) zero-mode kernel.
pub fn zero_mode_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::eps() * T::lit(1e3))
}

/// Dimension of the `E = 0` eigenspace.
pub fn zero_mode_dimension<T: Real>(g: &TwoEdgeGraph<T>, bc: &BoundaryCondition<T>) -> usize {
    let m = zero_mode_matrix(g, bc);
    kernel_basis(&m, zero_mode_tolerance(), T::zero())
        .map(|k| k.len())
        .unwrap_or(0)
}

/// Orthonormal basis of the `E = 0` eigenspace, diagonalizing the leaning form.
pub fn detect_zero_modes<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
) -> Vec<EigenSolution<T>> {
    let m = zero_mode_matrix(g, bc);
    let Ok(kernel) = kernel_basis(&m, zero_mode_tolerance(), T::zero()) else {
        return Vec::new();
    };
    let root = SpectralRoot {
        kappa: T::zero(),
        residual: T::zero(),
        bracket: (T::zero(), T::zero()),
        multiplicity: kernel.len(),
        is_zero_mode: true,
    };
    let (n1, n2) = gram_blocks(g, T::zero(), ModeProfile::Affine);
    leaning_basis(&kernel, &n1, &n2)
        .into_iter()
        .map(|c| EigenSolution::from_coefficients(*g, root, c, ModeProfile::Affine))
        .collect()
}
