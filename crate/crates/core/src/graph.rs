//! Two-edge graph with a mass jump at the junction, and its boundary conditions.

use crate::error::{Error, Result};
use crate::scalar::{cabs, cr, cx, Cx, Real};
use nalgebra::{Matrix4, Vector4};
use num_rational::Ratio;

/// Masses and lengths of the two edges `I1 = [-l1, 0]` and `I2 = [0, l2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoEdgeGraph<T: Real> {
    m1: T,
    m2: T,
    l1: T,
    l2: T,
    hbar: T,
}

impl<T: Real> TwoEdgeGraph<T> {
    /// Graph with `hbar = 1`.
    pub fn new(m1: T, m2: T, l1: T, l2: T) -> Result<Self> {
        Self::with_hbar(m1, m2, l1, l2, T::one())
    }

    pub fn with_hbar(m1: T, m2: T, l1: T, l2: T, hbar: T) -> Result<Self> {
        for (name, v) in [("m1", m1), ("m2", m2), ("l1", l1), ("l2", l2), ("hbar", hbar)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(name));
            }
        }
        Ok(Self { m1, m2, l1, l2, hbar })
    }

    pub fn m1(&self) -> T {
        self.m1
    }

    pub fn m2(&self) -> T {
        self.m2
    }

    pub fn l1(&self) -> T {
        self.l1
    }

    pub fn l2(&self) -> T {
        self.l2
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    /// `(sqrt(m1) l1, sqrt(m2) l2)`.
    pub fn frequencies(&self) -> (T, T) {
        (self.m1.sqrt() * self.l1, self.m2.sqrt() * self.l2)
    }

    /// Wavenumbers `(kappa sqrt(m1), kappa sqrt(m2))` on each edge.
    pub fn wavenumbers(&self, kappa: T) -> (T, T) {
        (kappa * self.m1.sqrt(), kappa * self.m2.sqrt())
    }

    /// Energy `hbar^2 kappa^2 / 2`.
    pub fn energy(&self, kappa: T) -> T {
        self.hbar * self.hbar * kappa * kappa * T::lit(0.5)
    }

    /// Inverse of [`Self::energy`].
    pub fn kappa_of_energy(&self, energy: T) -> T {
        (T::lit(2.0) * energy).sqrt() / self.hbar
    }

    /// Same graph with the two edges exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            m1: self.m2,
            m2: self.m1,
            l1: self.l2,
            l2: self.l1,
            hbar: self.hbar,
        }
    }

    /// Continued-fraction analysis of `omega1 / omega2`.
    pub fn nonresonance_report(&self, depth: usize) -> NonresonanceReport {
        let (w1, w2) = self.frequencies();
        nonresonance_report((w1 / w2).as_f64(), depth)
    }
}

/// Structure attached to a boundary matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum BcKind<T: Real> {
    General,
    /// `U = I - 2P` with `P` an orthogonal projection of the given rank.
    ScaleFree { projection: Matrix4<Cx<T>>, rank: usize },
}

/// Self-adjoint boundary condition `i(I + U) gamma = (I - U) nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition<T: Real> {
    u: Matrix4<Cx<T>>,
    kind: BcKind<T>,
}

/// Default tolerance for unitarity and projection checks.
pub fn unitary_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::eps() * T::lit(64.0))
}

/// Default tolerance for the scale-free test.
pub fn scale_free_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::eps() * T::lit(256.0))
}

fn max_abs_entry<T: Real>(m: &Matrix4<Cx<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

impl<T: Real> BoundaryCondition<T> {
    /// Wraps a unitary matrix, classifying it as scale-free when it is Hermitian.
    pub fn from_unitary(u: Matrix4<Cx<T>>) -> Result<Self> {
        check_unitary(&u, unitary_tolerance())?;
        let kind = if is_scale_free_matrix(&u, scale_free_tolerance())? {
            let projection = projection_from_unitary(&u);
            let rank = projection.trace().re.as_f64().round() as usize;
            BcKind::ScaleFree { projection, rank }
        } else {
            BcKind::General
        };
        Ok(Self { u, kind })
    }

    /// Scale-free condition `U = I - 2P` from an orthogonal projection.
    pub fn from_projection(p: Matrix4<Cx<T>>) -> Result<Self> {
        let tol = unitary_tolerance::<T>() * T::lit(10.0);
        let dev = max_abs_entry(&(p * p - p)).max(max_abs_entry(&(p.adjoint() - p)));
        if !(dev <= tol) {
            return Err(Error::NotProjection {
                deviation: dev.as_f64(),
            });
        }
        let rank = p.trace().re.as_f64().round() as usize;
        Ok(Self {
            u: unitary_from_projection(&p),
            kind: BcKind::ScaleFree {
                projection: p,
                rank,
            },
        })
    }

    /// Scale-free condition whose projection range is spanned by `vectors`.
    pub fn from_span(vectors: &[Vector4<Cx<T>>]) -> Result<Self> {
        let mut basis: Vec<Vector4<Cx<T>>> = Vec::new();
        for v in vectors {
            let mut w = *v;
            for b in &basis {
                w -= b * b.dotc(&w);
            }
            let n = w.norm();
            if n > T::lit(1e-10) {
                basis.push(w / cr(n));
            }
        }
        let mut p = Matrix4::zeros();
        for b in &basis {
            p += b * b.adjoint();
        }
        Self::from_projection(p)
    }

    /// `U = -I`, equivalently `P = I`: vanishing derivative trace.
    pub fn neumann() -> Self {
        Self::from_projection(Matrix4::identity()).expect("identity is a projection")
    }

    /// `U = I`, equivalently `P = 0`: vanishing value trace.
    pub fn dirichlet() -> Self {
        Self::from_projection(Matrix4::zeros()).expect("zero is a projection")
    }

    pub fn unitary(&self) -> &Matrix4<Cx<T>> {
        &self.u
    }

    pub fn kind(&self) -> &BcKind<T> {
        &self.kind
    }

    /// Projection and rank when the condition is scale-free.
    pub fn projection(&self) -> Option<(&Matrix4<Cx<T>>, usize)> {
        match &self.kind {
            BcKind::ScaleFree { projection, rank } => Some((projection, *rank)),
            BcKind::General => None,
        }
    }

    pub fn is_scale_free(&self) -> bool {
        matches!(self.kind, BcKind::ScaleFree { .. })
    }

    /// Whether `U = U^T`, which makes the phase-corrected secular function real.
    pub fn is_symmetric(&self, tol: T) -> bool {
        max_abs_entry(&(self.u - self.u.transpose())) <= tol
    }

    /// Whether a boundary trace satisfies the domain condition.
    pub fn domain_check(&self, t: &BoundaryTrace<T>, tol: T) -> bool {
        self.domain_residual(t) <= tol * (t.gamma.norm() + t.nu.norm() + T::one())
    }

    /// `|| i(I + U) gamma - (I - U) nu ||`.
    pub fn domain_residual(&self, t: &BoundaryTrace<T>) -> T {
        let id = Matrix4::<Cx<T>>::identity();
        let i = cx(T::zero(), T::one());
        ((id + self.u) * t.gamma * i - (id - self.u) * t.nu).norm()
    }
}

fn check_unitary<T: Real>(u: &Matrix4<Cx<T>>, tol: T) -> Result<()> {
    let dev = max_abs_entry(&(u.adjoint() * u - Matrix4::identity()));
    if dev <= tol {
        Ok(())
    } else {
        Err(Error::NonUnitary {
            deviation: dev.as_f64(),
        })
    }
}

fn is_scale_free_matrix<T: Real>(u: &Matrix4<Cx<T>>, tol: T) -> Result<bool> {
    // The Hermitian part (U - U^*)/(2i) has eigenvalues Im(lambda_j) for unitary U.
    let skew = (u - u.adjoint()) * cx(T::zero(), -T::lit(0.5));
    let herm = (skew + skew.adjoint()) * cr(T::lit(0.5));
    let eig = herm.symmetric_eigenvalues();
    Ok(eig.iter().all(|l| l.mag() <= tol))
}

/// Whether the spectrum of `U` lies in `{-1, 1}` within `tol`.
pub fn is_scale_free<T: Real>(u: &Matrix4<Cx<T>>, tol: T) -> Result<bool> {
    check_unitary(u, unitary_tolerance::<T>().max(tol))?;
    is_scale_free_matrix(u, tol)
}

/// `P = (I - U) / 2`.
pub fn projection_from_unitary<T: Real>(u: &Matrix4<Cx<T>>) -> Matrix4<Cx<T>> {
    (Matrix4::identity() - u) * cr(T::lit(0.5))
}

/// `U = I - 2P`.
pub fn unitary_from_projection<T: Real>(p: &Matrix4<Cx<T>>) -> Matrix4<Cx<T>> {
    Matrix4::identity() - p * cr(T::lit(2.0))
}

/// Boundary values `gamma` and scaled outward derivatives `nu`.
///
/// Components are ordered `(-l1, 0-, 0+, l2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTrace<T: Real> {
    pub gamma: Vector4<Cx<T>>,
    pub nu: Vector4<Cx<T>>,
}

impl<T: Real> BoundaryTrace<T> {
    pub fn new(gamma: Vector4<Cx<T>>, nu: Vector4<Cx<T>>) -> Self {
        Self { gamma, nu }
    }

    /// Builds the trace from endpoint values and plain derivatives.
    ///
    /// Both arrays are ordered `(psi1(-l1), psi1(0), psi2(0), psi2(l2))`.
    pub fn from_endpoints(g: &TwoEdgeGraph<T>, values: [Cx<T>; 4], derivatives: [Cx<T>; 4]) -> Self {
        let (m1, m2) = (g.m1(), g.m2());
        let gamma = Vector4::new(values[0], values[1], values[2], values[3]);
        let nu = Vector4::new(
            -derivatives[0] / m1,
            derivatives[1] / m1,
            -derivatives[2] / m2,
            derivatives[3] / m2,
        );
        Self { gamma, nu }
    }

    /// `<gamma, nu>`, which vanishes for every vector in a scale-free domain.
    pub fn orthogonality(&self) -> Cx<T> {
        self.gamma.dotc(&self.nu)
    }
}

/// `(hbar^2 / 2)(<gamma_phi, nu_psi> - <nu_phi, gamma_psi>)`.
pub fn boundary_form<T: Real>(g: &TwoEdgeGraph<T>, phi: &BoundaryTrace<T>, psi: &BoundaryTrace<T>) -> Cx<T> {
    let h = g.hbar();
    (phi.gamma.dotc(&psi.nu) - phi.nu.dotc(&psi.gamma)) * (h * h * T::lit(0.5))
}

/// Continued-fraction data for a frequency ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct NonresonanceReport {
    pub ratio: f64,
    pub partial_quotients: Vec<i64>,
    pub convergents: Vec<Ratio<i64>>,
    /// Set when a convergent `p/q` with `q <= 1e6` has `q^2 |ratio - p/q| < 1e-6`.
    pub near_resonant: bool,
}

const RESONANCE_MAX_DENOMINATOR: i64 = 1_000_000;
const RESONANCE_SCALED_GAP: f64 = 1e-6;

/// Continued-fraction expansion of `ratio` to at most `depth` terms.
pub fn nonresonance_report(ratio: f64, depth: usize) -> NonresonanceReport {
    let mut partial_quotients = Vec::new();
    let mut convergents = Vec::new();
    let (mut hm1, mut hm2, mut km1, mut km2) = (1i64, 0i64, 0i64, 1i64);
    let mut x = ratio;
    let mut near_resonant = false;
    for _ in 0..depth.max(1) {
        if !x.is_finite() || x.abs() > 1e15 {
            break;
        }
        let a = x.floor();
        let ai = a as i64;
        let (Some(hn), Some(kn)) = (
            ai.checked_mul(hm1).and_then(|v| v.checked_add(hm2)),
            ai.checked_mul(km1).and_then(|v| v.checked_add(km2)),
        ) else {
            break;
        };
        partial_quotients.push(ai);
        convergents.push(Ratio::new_raw(hn, kn));
        if kn <= RESONANCE_MAX_DENOMINATOR {
            let q = kn as f64;
            if q * q * (ratio - hn as f64 / q).abs() < RESONANCE_SCALED_GAP {
                near_resonant = true;
            }
        }
        hm2 = hm1;
        hm1 = hn;
        km2 = km1;
        km1 = kn;
        let frac = x - a;
        if frac < 1e-15 * x.abs().max(1.0) {
            break;
        }
        x = 1.0 / frac;
    }
    NonresonanceReport {
        ratio,
        partial_quotients,
        convergents,
        near_resonant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_graph() -> TwoEdgeGraph<f64> {
        TwoEdgeGraph::new(16.0, 1.0, std::f64::consts::E, std::f64::consts::PI).unwrap()
    }

    #[test]
    fn frequencies_of_reference_graph() {
        let (w1, w2) = reference_graph().frequencies();
        assert_relative_eq!(w1, 4.0 * std::f64::consts::E, epsilon = 1e-15);
        assert_relative_eq!(w2, std::f64::consts::PI, epsilon = 1e-15);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert_eq!(
            TwoEdgeGraph::new(1.0, 0.0, 1.0, 1.0),
            Err(Error::InvalidParameter("m2"))
        );
        assert!(TwoEdgeGraph::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn scale_free_classification() {
        assert!(BoundaryCondition::<f64>::neumann().is_scale_free());
        assert!(BoundaryCondition::<f64>::dirichlet().is_scale_free());
        let mut u = Matrix4::<Cx<f64>>::identity();
        u[(0, 0)] = cx(0.0, 1.0);
        let bc = BoundaryCondition::from_unitary(u).unwrap();
        assert!(!bc.is_scale_free());
        let mut bad = Matrix4::<Cx<f64>>::identity();
        bad[(0, 1)] = cr(0.5);
        assert!(matches!(
            BoundaryCondition::from_unitary(bad),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn golden_ratio_is_nonresonant() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r = nonresonance_report(phi, 40);
        assert!(!r.near_resonant);
        assert!(r.partial_quotients.iter().take(20).all(|&a| a == 1));
    }

    #[test]
    fn integer_ratio_is_resonant() {
        let r = nonresonance_report(2.0, 10);
        assert!(r.near_resonant);
        assert_eq!(r.convergents, vec![Ratio::new(2, 1)]);
    }

    #[test]
    fn reference_ratio_is_nonresonant() {
        let r = reference_graph().nonresonance_report(30);
        assert!(!r.near_resonant);
        assert_eq!(r.partial_quotients[0], 3);
    }

    #[test]
    fn boundary_form_matches_definition() {
        let g = reference_graph();
        let a = BoundaryTrace::new(
            Vector4::new(cx(1.0, 2.0), cx(0.5, 0.0), cx(0.0, -1.0), cx(3.0, 1.0)),
            Vector4::new(cx(0.2, 0.1), cx(-1.0, 0.0), cx(0.0, 0.3), cx(1.0, 1.0)),
        );
        let b = BoundaryTrace::new(
            Vector4::new(cx(0.0, 1.0), cx(1.0, 1.0), cx(2.0, 0.0), cx(-1.0, 0.5)),
            Vector4::new(cx(1.0, 0.0), cx(0.0, 2.0), cx(1.0, -1.0), cx(0.5, 0.5)),
        );
        let mut expected = cr(0.0);
        for j in 0..4 {
            expected += a.gamma[j].conj() * b.nu[j] - a.nu[j].conj() * b.gamma[j];
        }
        let got = boundary_form(&g, &a, &b);
        assert_relative_eq!(got.re, 0.5 * expected.re, epsilon = 1e-14);
        assert_relative_eq!(got.im, 0.5 * expected.im, epsilon = 1e-14);
        let anti = boundary_form(&g, &b, &a);
        assert_relative_eq!(anti.re, -got.re, epsilon = 1e-14);
        assert_relative_eq!(anti.im, got.im, epsilon = 1e-14);
    }
}
