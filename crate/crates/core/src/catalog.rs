//! Closed forms for the six scale-free boundary conditions of the catalog.

use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, TwoEdgeGraph};
use crate::scalar::{cis, cr, cx, wrap_angle, Cx, Real};
use crate::spectral::{EigenSolution, ModeProfile, SpectralRoot};
use nalgebra::Vector4;
use std::fmt;
use std::str::FromStr;

/// Named scale-free boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Dirichlet,
    Neumann,
    Segment,
    Ring,
    Pendant,
    Rose,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Dirichlet,
        Preset::Neumann,
        Preset::Segment,
        Preset::Ring,
        Preset::Pendant,
        Preset::Rose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Dirichlet => "dirichlet",
            Preset::Neumann => "neumann",
            Preset::Segment => "segment",
            Preset::Ring => "ring",
            Preset::Pendant => "pendant",
            Preset::Rose => "rose",
        }
    }

    /// Rank of the projection `P`.
    pub fn rank(self) -> usize {
        match self {
            Preset::Dirichlet => 0,
            Preset::Neumann => 4,
            Preset::Segment | Preset::Pendant | Preset::Rose => 1,
            Preset::Ring => 2,
        }
    }

    /// Number of components of the zero set on the torus.
    pub fn branch_count(self) -> usize {
        match self {
            Preset::Segment => 1,
            Preset::Dirichlet | Preset::Neumann | Preset::Ring | Preset::Pendant => 2,
            Preset::Rose => 3,
        }
    }

    /// Vectors spanning the range of `P`.
    pub fn projection_vectors<T: Real>(self) -> Vec<Vector4<Cx<T>>> {
        let v = |a: f64, b: f64, c: f64, d: f64| {
            Vector4::new(cr(T::lit(a)), cr(T::lit(b)), cr(T::lit(c)), cr(T::lit(d)))
        };
        match self {
            Preset::Dirichlet => vec![],
            Preset::Neumann => vec![
                v(1.0, 0.0, 0.0, 0.0),
                v(0.0, 1.0, 0.0, 0.0),
                v(0.0, 0.0, 1.0, 0.0),
                v(0.0, 0.0, 0.0, 1.0),
            ],
            Preset::Segment => vec![v(0.0, 1.0, 1.0, 0.0)],
            Preset::Ring => vec![v(0.0, 1.0, 1.0, 0.0), v(1.0, 0.0, 0.0, 1.0)],
            Preset::Pendant => vec![v(0.0, 1.0, 1.0, 1.0)],
            Preset::Rose => vec![v(1.0, 1.0, 1.0, 1.0)],
        }
    }

    pub fn boundary_condition<T: Real>(self) -> BoundaryCondition<T> {
        BoundaryCondition::from_span(&self.projection_vectors())
            .expect("catalog spans define orthogonal projections")
    }

    fn check_branch(self, branch: usize) -> Result<()> {
        if branch < self.branch_count() {
            Ok(())
        } else {
            Err(Error::UnknownBranch {
                preset: self.name(),
                branch,
            })
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

struct Half<T> {
    s1: T,
    c1: T,
    s2: T,
    c2: T,
}

fn half<T: Real>(phi1: T, phi2: T) -> Half<T> {
    let h = T::lit(0.5);
    Half {
        s1: (phi1 * h).sin(),
        c1: (phi1 * h).cos(),
        s2: (phi2 * h).sin(),
        c2: (phi2 * h).cos(),
    }
}

/// Quasi-periodic factor `f_P` of the spectral function.
pub fn f_p<T: Real>(preset: Preset, g: &TwoEdgeGraph<T>, phi1: T, phi2: T) -> T {
    let (r1, r2) = (g.m1().sqrt(), g.m2().sqrt());
    let (s1, c1, s2, c2) = (phi1.sin(), phi1.cos(), phi2.sin(), phi2.cos());
    let one = T::one();
    match preset {
        Preset::Dirichlet | Preset::Neumann => s1 * s2,
        Preset::Segment => r1 * s1 * c2 + r2 * s2 * c1,
        Preset::Ring => {
            T::lit(2.0) * r1 * r2 * (one - c1 * c2) + (g.m1() + g.m2()) * s1 * s2
        }
        Preset::Pendant => {
            let (sh, ch) = ((phi2 * T::lit(0.5)).sin(), (phi2 * T::lit(0.5)).cos());
            sh * (T::lit(2.0) * r1 * s1 * sh - r2 * c1 * ch)
        }
        Preset::Rose => r1 * s1 * (one - c2) + r2 * s2 * (one - c1),
    }
}

/// Constant `g_P` with `S_U(kappa) = kappa^r g_P f_P(omega kappa)`.
pub fn g_p<T: Real>(preset: Preset, g: &TwoEdgeGraph<T>) -> Cx<T> {
    let mm = g.m1() * g.m2();
    let rm = mm.sqrt();
    match preset {
        Preset::Dirichlet => cr(T::lit(-64.0)),
        Preset::Neumann => cr(T::lit(-64.0) / mm),
        Preset::Segment => cx(T::zero(), T::lit(-32.0) / rm),
        Preset::Ring => cr(T::lit(-16.0) / mm),
        Preset::Pendant => cx(T::zero(), T::lit(128.0) / (T::lit(3.0) * rm)),
        Preset::Rose => cx(T::zero(), T::lit(32.0) / rm),
    }
}

/// `kappa^r g_P f_P(omega1 kappa, omega2 kappa)`.
pub fn closed_form_spectral_function<T: Real>(preset: Preset, g: &TwoEdgeGraph<T>, kappa: T) -> Cx<T> {
    let (w1, w2) = g.frequencies();
    let f = f_p(preset, g, w1 * kappa, w2 * kappa);
    g_p(preset, g) * (kappa.powi(preset.rank() as i32) * f)
}

/// Smooth factor of `f_P` vanishing exactly on branch `branch`.
pub fn branch_factor<T: Real>(
    preset: Preset,
    branch: usize,
    g: &TwoEdgeGraph<T>,
    phi1: T,
    phi2: T,
) -> Result<T> {
    preset.check_branch(branch)?;
    let (r1, r2) = (g.m1().sqrt(), g.m2().sqrt());
    let h = half(phi1, phi2);
    Ok(match (preset, branch) {
        (Preset::Dirichlet | Preset::Neumann, 0) => phi1.sin(),
        (Preset::Dirichlet | Preset::Neumann, _) => phi2.sin(),
        (Preset::Segment, _) => f_p(preset, g, phi1, phi2),
        (Preset::Ring, 0) => r2 * h.s2 * h.c1 + r1 * h.s1 * h.c2,
        (Preset::Ring, _) => r1 * h.s2 * h.c1 + r2 * h.s1 * h.c2,
        (Preset::Pendant, 0) => h.s2,
        (Preset::Pendant, _) => T::lit(2.0) * r1 * phi1.sin() * h.s2 - r2 * phi1.cos() * h.c2,
        (Preset::Rose, 0) => h.s1,
        (Preset::Rose, 1) => h.s2,
        (Preset::Rose, _) => r1 * h.c1 * h.s2 + r2 * h.c2 * h.s1,
    })
}

/// Geometry of one zero-set component.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchShape<T: Real> {
    /// `phi1` takes one of the listed values; `phi2` is free.
    VerticalLines(Vec<T>),
    /// `phi2` takes one of the listed values; `phi1` is free.
    HorizontalLines(Vec<T>),
    /// `phi2` is a (multi-valued) function of `phi1`.
    Curve,
}

/// Component `Sigma_{P,j}` of the zero set.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSetBranch<T: Real> {
    pub preset: Preset,
    pub index: usize,
    pub shape: BranchShape<T>,
    graph: TwoEdgeGraph<T>,
}

impl<T: Real> ZeroSetBranch<T> {
    /// Values of `phi2` in `[0, 2 pi)` on the branch above `phi1`.
    ///
    /// Vertical lines return an empty list; they are not graphs over `phi1`.
    pub fn phi2_of(&self, phi1: T) -> Vec<T> {
        let g = &self.graph;
        let (r1, r2) = (g.m1().sqrt(), g.m2().sqrt());
        let h = T::lit(0.5);
        let two = T::lit(2.0);
        let (sh, ch) = ((phi1 * h).sin(), (phi1 * h).cos());
        match &self.shape {
            BranchShape::VerticalLines(_) => vec![],
            BranchShape::HorizontalLines(v) => v.clone(),
            BranchShape::Curve => match (self.preset, self.index) {
                (Preset::Segment, _) => {
                    let a = (-r1 * phi1.sin()).atan2(r2 * phi1.cos());
                    vec![wrap_angle(a), wrap_angle(a + T::pi())]
                }
                (Preset::Ring, 0) => vec![wrap_angle(two * (-r1 * sh).atan2(r2 * ch))],
                (Preset::Ring, _) | (Preset::Rose, _) => {
                    vec![wrap_angle(two * (-r2 * sh).atan2(r1 * ch))]
                }
                (Preset::Pendant, _) => {
                    vec![wrap_angle(two * (r2 * phi1.cos()).atan2(two * r1 * phi1.sin()))]
                }
                _ => vec![],
            },
        }
    }
}

/// Components of the zero set of `f_P`.
pub fn zero_set_branches<T: Real>(preset: Preset, g: &TwoEdgeGraph<T>) -> Result<Vec<ZeroSetBranch<T>>> {
    if preset == Preset::Ring && (g.m1() - g.m2()).mag() <= T::eps() * T::lit(16.0) * g.m1() {
        return Err(Error::DegenerateSplit);
    }
    let pi = T::pi();
    let z = T::zero();
    let shapes = match preset {
        Preset::Dirichlet | Preset::Neumann => vec![
            BranchShape::VerticalLines(vec![z, pi]),
            BranchShape::HorizontalLines(vec![z, pi]),
        ],
        Preset::Segment => vec![BranchShape::Curve],
        Preset::Ring => vec![BranchShape::Curve, BranchShape::Curve],
        Preset::Pendant => vec![BranchShape::HorizontalLines(vec![z]), BranchShape::Curve],
        Preset::Rose => vec![
            BranchShape::VerticalLines(vec![z]),
            BranchShape::HorizontalLines(vec![z]),
            BranchShape::Curve,
        ],
    };
    Ok(shapes
        .into_iter()
        .enumerate()
        .map(|(index, shape)| ZeroSetBranch {
            preset,
            index,
            shape,
            graph: *g,
        })
        .collect())
}

/// Root of a single branch factor along the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogRoot<T: Real> {
    pub kappa: T,
    pub branch: usize,
}

/// Roots in `(0, kappa_max]` of every branch factor along `kappa -> (omega1, omega2) kappa`.
///
/// Coinciding roots of different branches are both listed.
pub fn catalog_roots<T: Real>(preset: Preset, g: &TwoEdgeGraph<T>, kappa_max: T) -> Vec<CatalogRoot<T>> {
    let (w1, w2) = g.frequencies();
    let mut out = Vec::new();
    let lattice = |step: T, branch: usize, out: &mut Vec<CatalogRoot<T>>| {
        let mut n = 1usize;
        loop {
            let k = step * T::from_count(n);
            if k > kappa_max {
                break;
            }
            out.push(CatalogRoot { kappa: k, branch });
            n += 1;
        }
    };
    let pi = T::pi();
    let two_pi = T::two_pi();
    for branch in 0..preset.branch_count() {
        match (preset, branch) {
            (Preset::Dirichlet | Preset::Neumann, 0) => lattice(pi / w1, 0, &mut out),
            (Preset::Dirichlet | Preset::Neumann, _) => lattice(pi / w2, 1, &mut out),
            (Preset::Pendant, 0) => lattice(two_pi / w2, 0, &mut out),
            (Preset::Rose, 0) => lattice(two_pi / w1, 0, &mut out),
            (Preset::Rose, 1) => lattice(two_pi / w2, 1, &mut out),
            _ => {
                let f = |k: T| {
                    branch_factor(preset, branch, g, w1 * k, w2 * k).expect("branch index checked")
                };
                let h = T::lit(0.05) * pi / (w1 + w2);
                let mut a = h * T::lit(0.5);
                let mut fa = f(a);
                while a < kappa_max {
                    let b = (a + h).min(kappa_max);
                    let fb = f(b);
                    if fa == T::zero() {
                        out.push(CatalogRoot { kappa: a, branch });
                    } else if fb != T::zero() && (fa < T::zero()) != (fb < T::zero()) {
                        let (mut lo, mut hi, mut flo) = (a, b, fa);
                        for _ in 0..200 {
                            let mid = lo + (hi - lo) * T::lit(0.5);
                            if !(mid > lo && mid < hi) {
                                break;
                            }
                            let fm = f(mid);
                            if (fm < T::zero()) == (flo < T::zero()) {
                                lo = mid;
                                flo = fm;
                            } else {
                                hi = mid;
                            }
                        }
                        out.push(CatalogRoot {
                            kappa: lo + (hi - lo) * T::lit(0.5),
                            branch,
                        });
                    }
                    a = b;
                    fa = fb;
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.kappa
            .partial_cmp(&b.kappa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.branch.cmp(&b.branch))
    });
    out
}

/// Eigenfunction of branch `branch` at a root `kappa`, from the closed-form profile.
pub fn closed_form_eigenfunction<T: Real>(
    preset: Preset,
    branch: usize,
    g: &TwoEdgeGraph<T>,
    kappa: T,
) -> Result<EigenSolution<T>> {
    let (w1, w2) = g.frequencies();
    let (p1, p2) = (w1 * kappa, w2 * kappa);
    let residual = branch_factor(preset, branch, g, p1, p2)?;
    let scale = T::one() + g.m1().sqrt() + g.m2().sqrt();
    if residual.mag() > T::lit(1e-6).max(T::eps().sqrt()) * scale {
        return Err(Error::OffBranch {
            preset: preset.name(),
            branch,
            residual: residual.as_f64(),
        });
    }
    let h = half(p1, p2);
    let half_i = cx(T::zero(), -T::lit(0.5));
    let sine = |amp: T, shift: T| (cis(shift) * half_i * amp, -cis(-shift) * half_i * amp);
    let cosine = |amp: T, shift: T| {
        let a = T::lit(0.5) * amp;
        (cis(shift) * a, cis(-shift) * a)
    };
    let z = (cr(T::zero()), cr(T::zero()));
    let hf = T::lit(0.5);
    let (e1, e2) = match (preset, branch) {
        (Preset::Dirichlet, 0) | (Preset::Rose, 0) => (sine(T::one(), T::zero()), z),
        (Preset::Dirichlet, _) | (Preset::Pendant, 0) | (Preset::Rose, 1) => {
            (z, sine(T::one(), T::zero()))
        }
        (Preset::Neumann, 0) => (cosine(T::one(), T::zero()), z),
        (Preset::Neumann, _) => (z, cosine(T::one(), T::zero())),
        (Preset::Segment, _) => (sine(p2.sin(), p1), sine(-p1.sin(), -p2)),
        (Preset::Ring, 0) => (sine(h.s2, p1 * hf), sine(-h.s1, -p2 * hf)),
        (Preset::Ring, _) | (Preset::Rose, _) => (cosine(h.c2, p1 * hf), cosine(h.c1, -p2 * hf)),
        (Preset::Pendant, _) => (sine(h.c2, p1), cosine(p1.sin(), -p2 * hf)),
    };
    let coeffs = Vector4::new(e1.0, e1.1, e2.0, e2.1);
    let root = SpectralRoot {
        kappa,
        residual: residual.mag(),
        bracket: (kappa, kappa),
        multiplicity: 1,
        is_zero_mode: false,
    };
    Ok(EigenSolution::from_coefficients(*g, root, coeffs, ModeProfile::PlaneWave))
}

fn lean_ratio<T: Real>(d: T, l2: T, a: T) -> T {
    (d * l2 - a) / (d * l2 + a)
}

/// Leading-order leaning of branch `branch` eigenfunctions at torus angle `phi1`.
pub fn leaning_asymptotic<T: Real>(preset: Preset, branch: usize, g: &TwoEdgeGraph<T>, phi1: T) -> Result<T> {
    preset.check_branch(branch)?;
    let (m1, m2, l1, l2) = (g.m1(), g.m2(), g.l1(), g.l2());
    let (s, c) = (phi1.sin(), phi1.cos());
    let one = T::one();
    let two = T::lit(2.0);
    Ok(match (preset, branch) {
        (Preset::Dirichlet | Preset::Neumann, 0) | (Preset::Rose, 0) => -one,
        (Preset::Dirichlet | Preset::Neumann, _) | (Preset::Pendant, 0) | (Preset::Rose, 1) => one,
        (Preset::Segment, _) => lean_ratio(m1 * s * s + m2 * c * c, l2, m1 * l1),
        (Preset::Ring, 0) => lean_ratio(m1 * (one - c) + m2 * (one + c), l2, two * m1 * l1),
        (Preset::Ring, _) | (Preset::Rose, _) => {
            lean_ratio(m1 * (one + c) + m2 * (one - c), l2, two * m1 * l1)
        }
        (Preset::Pendant, _) => {
            let q = (T::lit(4.0) * m1 + m2) - (T::lit(4.0) * m1 - m2) * (two * phi1).cos();
            lean_ratio(q, l2, T::lit(8.0) * m1 * l1)
        }
    })
}

fn norm_omega<T: Real>(g: &TwoEdgeGraph<T>) -> T {
    let (w1, w2) = g.frequencies();
    (w1 * w1 + w2 * w2).sqrt()
}

/// Cosine of the angle between the flow and the normal of branch `branch` at `phi1`.
///
/// Pole-free rewritings of the displayed formulas are used; they agree wherever those are defined.
pub fn flow_tangency_cos<T: Real>(preset: Preset, branch: usize, g: &TwoEdgeGraph<T>, phi1: T) -> Result<T> {
    preset.check_branch(branch)?;
    if !phi1.is_finite() {
        return Err(Error::SingularPoint { phi1: phi1.as_f64() });
    }
    let (w1, w2) = g.frequencies();
    let (m1, m2) = (g.m1(), g.m2());
    let (r1, r2) = (m1.sqrt(), m2.sqrt());
    let nw = norm_omega(g);
    let (s, c) = (phi1.sin(), phi1.cos());
    let (sh, ch) = ((phi1 * T::lit(0.5)).sin(), (phi1 * T::lit(0.5)).cos());
    let out = match (preset, branch) {
        (Preset::Dirichlet | Preset::Neumann, 0) | (Preset::Rose, 0) => w1 / nw,
        (Preset::Dirichlet | Preset::Neumann, _) | (Preset::Pendant, 0) | (Preset::Rose, 1) => w2 / nw,
        (Preset::Segment, _) => {
            // rho = sin^2(phi1) / sin^2(phi2) on the branch.
            let rho = (m1 * s * s + m2 * c * c) / m1;
            -(w1 * r2 + w2 * r1 * rho) / (nw * (m2 + m1 * rho * rho).sqrt())
        }
        (Preset::Ring, 0) => {
            // rho = (1 + cos phi1) / (1 + cos phi2) on the branch.
            let rho = (m2 * ch * ch + m1 * sh * sh) / m2;
            (w1 * r1 + w2 * r2 * rho) / (nw * (m1 + m2 * rho * rho).sqrt())
        }
        (Preset::Ring, _) | (Preset::Rose, _) => {
            let rho = (m1 * ch * ch + m2 * sh * sh) / m1;
            (w1 * r2 + w2 * r1 * rho) / (nw * (m2 + m1 * rho * rho).sqrt())
        }
        (Preset::Pendant, _) => {
            let four = T::lit(4.0);
            let num = four * w1 * (m1 * m2).sqrt() + four * m1 * w2 * s * s + m2 * w2 * c * c;
            let rad = four * (m2 * m2 - T::lit(16.0) * m1 * m1) * (T::lit(2.0) * phi1).cos()
                + T::lit(48.0) * m1 * m1
                + (m2 - four * m1) * (m2 - four * m1) * (four * phi1).cos()
                + T::lit(136.0) * m1 * m2
                + T::lit(3.0) * m2 * m2;
            num / (nw * rad.sqrt())
        }
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::SingularPoint { phi1: phi1.as_f64() })
    }
}

/// Continuous or atomic part of the Barra-Gaspard marginal in `phi1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityShape<T: Real> {
    /// Constant density.
    Uniform(T),
    /// `pref (omega1 num / (base + coef cos(harmonic phi1)) + omega2)`.
    Rational {
        pref: T,
        num: T,
        base: T,
        coef: T,
        harmonic: T,
    },
    /// Point mass.
    Atom { location: T, mass: T },
}

/// One branch contribution to the Barra-Gaspard measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgComponent<T: Real> {
    pub branch: usize,
    pub shape: DensityShape<T>,
}

/// Barra-Gaspard measure projected onto `phi1 in [0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BgDensity<T: Real> {
    pub preset: Preset,
    pub components: Vec<BgComponent<T>>,
    omega: (T, T),
}

impl<T: Real> BgDensity<T> {
    fn shape_value(&self, shape: &DensityShape<T>, phi1: T) -> T {
        match *shape {
            DensityShape::Uniform(v) => v,
            DensityShape::Rational {
                pref,
                num,
                base,
                coef,
                harmonic,
            } => pref * (self.omega.0 * num / (base + coef * (harmonic * phi1).cos()) + self.omega.1),
            DensityShape::Atom { .. } => T::zero(),
        }
    }

    /// Density of the absolutely continuous part at `phi1`.
    pub fn density(&self, phi1: T) -> T {
        self.components
            .iter()
            .fold(T::zero(), |acc, c| acc + self.shape_value(&c.shape, phi1))
    }

    /// Density of the continuous part of one branch.
    pub fn branch_density(&self, branch: usize, phi1: T) -> T {
        self.components
            .iter()
            .filter(|c| c.branch == branch)
            .fold(T::zero(), |acc, c| acc + self.shape_value(&c.shape, phi1))
    }

    /// Point masses as `(location, mass)`.
    pub fn atoms(&self) -> Vec<(T, T)> {
        self.components
            .iter()
            .filter_map(|c| match c.shape {
                DensityShape::Atom { location, mass } => Some((location, mass)),
                _ => None,
            })
            .collect()
    }

    /// Measure of `[a, b]`, atoms included when their location lies in `[a, b)`.
    pub fn mass_between(&self, a: T, b: T) -> T {
        let cont = crate::special::integrate(|x| self.density(x), a, b, 4);
        let atoms = self
            .atoms()
            .into_iter()
            .filter(|(x, _)| *x >= a && *x < b)
            .fold(T::zero(), |acc, (_, m)| acc + m);
        cont + atoms
    }

    /// Total mass over `[0, 2 pi)`.
    pub fn total_mass(&self) -> T {
        let cont = crate::special::integrate(|x| self.density(x), T::zero(), T::two_pi(), 64);
        self.atoms().into_iter().fold(cont, |acc, (_, m)| acc + m)
    }
}

/// Barra-Gaspard marginal density of the torus points `(omega1, omega2) kappa mod 2 pi`.
pub fn bg_density<T: Real>(preset: Preset, g: &TwoEdgeGraph<T>) -> BgDensity<T> {
    let (w1, w2) = g.frequencies();
    let (m1, m2) = (g.m1(), g.m2());
    let rm = (m1 * m2).sqrt();
    let sum = w1 + w2;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let pref2 = T::one() / (T::two_pi() * sum);
    let pref4 = T::one() / (four * T::pi() * sum);
    let comp = |branch, shape| BgComponent { branch, shape };
    let components = match preset {
        Preset::Dirichlet | Preset::Neumann => vec![
            comp(0, DensityShape::Atom {
                location: T::zero(),
                mass: w1 / (two * sum),
            }),
            comp(0, DensityShape::Atom {
                location: T::pi(),
                mass: w1 / (two * sum),
            }),
            comp(1, DensityShape::Uniform(w2 * pref2)),
        ],
        Preset::Segment => vec![comp(
            0,
            DensityShape::Rational {
                pref: pref2,
                num: rm,
                base: (m1 + m2) / two,
                coef: (m2 - m1) / two,
                harmonic: two,
            },
        )],
        Preset::Ring => vec![
            comp(
                0,
                DensityShape::Rational {
                    pref: pref4,
                    num: two * rm,
                    base: m1 + m2,
                    coef: m2 - m1,
                    harmonic: T::one(),
                },
            ),
            comp(
                1,
                DensityShape::Rational {
                    pref: pref4,
                    num: two * rm,
                    base: m1 + m2,
                    coef: m1 - m2,
                    harmonic: T::one(),
                },
            ),
        ],
        Preset::Pendant => vec![
            comp(0, DensityShape::Uniform(w2 * pref4)),
            comp(
                1,
                DensityShape::Rational {
                    pref: pref4,
                    num: T::lit(8.0) * rm,
                    base: four * m1 + m2,
                    coef: -(four * m1 - m2),
                    harmonic: two,
                },
            ),
        ],
        Preset::Rose => vec![
            comp(0, DensityShape::Atom {
                location: T::zero(),
                mass: w1 / (two * sum),
            }),
            comp(1, DensityShape::Uniform(w2 * pref4)),
            comp(
                2,
                DensityShape::Rational {
                    pref: pref4,
                    num: two * rm,
                    base: m1 + m2,
                    coef: m1 - m2,
                    harmonic: T::one(),
                },
            ),
        ],
    };
    BgDensity {
        preset,
        components,
        omega: (w1, w2),
    }
}

/// Limit of the Cesaro mean of the leaning: `(omega2 - omega1) / (omega2 + omega1)`.
pub fn cesaro_closed_form<T: Real>(g: &TwoEdgeGraph<T>) -> T {
    let (w1, w2) = g.frequencies();
    (w2 - w1) / (w2 + w1)
}

/// `(liminf, limsup)` of the leaning over the dense (non-localized) part of the spectrum.
///
/// The band endpoints are returned in increasing order.
pub fn leaning_extremes<T: Real>(preset: Preset, g: &TwoEdgeGraph<T>) -> (T, T) {
    let (m1, m2, l1, l2) = (g.m1(), g.m2(), g.l1(), g.l2());
    let geometric = (l2 - l1) / (l2 + l1);
    let weighted = |k: T| (m2 * l2 - k * m1 * l1) / (m2 * l2 + k * m1 * l1);
    let other = match preset {
        Preset::Dirichlet | Preset::Neumann => return (-T::one(), T::one()),
        Preset::Segment | Preset::Ring | Preset::Rose => weighted(T::one()),
        Preset::Pendant => weighted(T::lit(4.0)),
    };
    (geometric.min(other), geometric.max(other))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectral_function;

    fn graph() -> TwoEdgeGraph<f64> {
        TwoEdgeGraph::new(16.0, 1.0, std::f64::consts::E, std::f64::consts::PI).unwrap()
    }

    #[test]
    fn closed_form_matches_determinant_for_every_preset() {
        for g in [graph(), TwoEdgeGraph::new(0.7, 2.3, 1.1, 0.4).unwrap()] {
            for p in Preset::ALL {
                let bc = p.boundary_condition();
                for i in 1..40 {
                    let k = 0.173 * i as f64;
                    let a = spectral_function(&g, &bc, k);
                    let b = closed_form_spectral_function(p, &g, k);
                    let scale = 1.0 + b.norm().max(a.norm());
                    assert!((a - b).norm() < 1e-10 * scale, "{p} at {k}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn branch_factors_multiply_to_f_p() {
        let g = TwoEdgeGraph::new(2.0, 5.0, 1.3, 0.8).unwrap();
        for &(a, b) in &[(0.3, 1.9), (2.5, -0.7), (4.0, 5.5)] {
            let prod: f64 = (0..Preset::Ring.branch_count())
                .map(|j| branch_factor(Preset::Ring, j, &g, a, b).unwrap())
                .product();
            assert!((4.0 * prod - f_p(Preset::Ring, &g, a, b)).abs() < 1e-12);
            let rose: f64 = (0..3).map(|j| branch_factor(Preset::Rose, j, &g, a, b).unwrap()).product();
            assert!((4.0 * rose - f_p(Preset::Rose, &g, a, b)).abs() < 1e-12);
            let pend: f64 = (0..2).map(|j| branch_factor(Preset::Pendant, j, &g, a, b).unwrap()).product();
            assert!((pend - f_p(Preset::Pendant, &g, a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn branch_parametrizations_lie_on_zero_set() {
        let g = TwoEdgeGraph::new(2.0, 5.0, 1.3, 0.8).unwrap();
        for p in [Preset::Segment, Preset::Ring, Preset::Pendant, Preset::Rose] {
            for b in zero_set_branches(p, &g).unwrap() {
                for i in 0..50 {
                    let phi1 = 0.1257 * i as f64;
                    for phi2 in b.phi2_of(phi1) {
                        let f = branch_factor(p, b.index, &g, phi1, phi2).unwrap();
                        assert!(f.abs() < 1e-12, "{p} branch {} at {phi1}: {f}", b.index);
                    }
                }
            }
        }
    }

    #[test]
    fn equal_mass_ring_split_is_degenerate() {
        let g = TwoEdgeGraph::new(1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(zero_set_branches(Preset::Ring, &g), Err(Error::DegenerateSplit));
    }

    #[test]
    fn bg_densities_have_unit_mass() {
        for g in [graph(), TwoEdgeGraph::new(0.7, 2.3, 1.1, 0.4).unwrap()] {
            for p in Preset::ALL {
                let d = bg_density(p, &g);
                assert!((d.total_mass() - 1.0).abs() < 1e-12, "{p}: {}", d.total_mass());
            }
        }
    }

    #[test]
    fn extremes_are_ordered() {
        let g = graph();
        for p in Preset::ALL {
            let (lo, hi) = leaning_extremes(p, &g);
            assert!(lo <= hi);
        }
        let (lo, hi) = leaning_extremes(Preset::Segment, &g);
        let e = std::f64::consts::E;
        let pi = std::f64::consts::PI;
        assert!((lo - (pi - 16.0 * e) / (pi + 16.0 * e)).abs() < 1e-15);
        assert!((hi - (pi - e) / (pi + e)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_eigenfunctions_rejected_off_branch() {
        let g = graph();
        assert!(matches!(
            closed_form_eigenfunction(Preset::Segment, 0, &g, 1.0),
            Err(Error::OffBranch { .. })
        ));
        assert!(matches!(
            branch_factor(Preset::Segment, 3, &g, 0.0, 0.0),
            Err(Error::UnknownBranch { .. })
        ));
    }
}
