//! Root scan of the spectral determinant on a fixed `kappa` grid.

use super::eigen::zero_mode_dimension;
use super::matrix::{balanced_matrix, indicator_phase, kernel_basis, relative_gap};
use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, TwoEdgeGraph};
use crate::scalar::{cabs, Cx, Real};
use crate::special::golden_min;
use rayon::prelude::*;

/// Positive root of the spectral determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRoot<T: Real> {
    pub kappa: T,
    /// `sigma_min / sigma_max` of the balanced spectral matrix at `kappa`.
    pub residual: T,
    /// Bracket the root was refined from.
    pub bracket: (T, T),
    pub multiplicity: usize,
    pub is_zero_mode: bool,
}

/// How roots are located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndicatorMode {
    /// Sign changes of the phase-corrected real determinant.
    RealDeterminant,
    /// Local minima of the smallest singular value.
    SingularGap,
}

/// Tuning knobs of [`scan_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions<T: Real> {
    /// Grid step as a fraction of `pi / (omega1 + omega2)`.
    pub safety: T,
    /// Root refinement target `|d kappa| < refine_tol * max(1, kappa)`.
    pub refine_tol: T,
    pub max_iter: usize,
    /// Acceptance threshold on `sigma_min / sigma_max` at a refined root.
    pub root_tol: T,
    /// Relative threshold defining the numerical kernel.
    pub rank_tol: T,
    /// Roots closer than `gap_tol * max(1, kappa)` are merged.
    pub gap_tol: T,
    /// Largest relative imaginary part tolerated before falling back to [`IndicatorMode::SingularGap`].
    pub imag_tol: T,
}

/// Default relative threshold for numerical kernels.
pub fn default_rank_tol<T: Real>() -> T {
    T::lit(1e-8).max(T::eps().sqrt() * T::lit(10.0))
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        Self {
            safety: T::lit(0.1),
            refine_tol: T::lit(1e-12).max(T::eps() * T::lit(8.0)),
            max_iter: 200,
            root_tol: T::lit(1e-7).max(T::eps().sqrt() * T::lit(10.0)),
            rank_tol: default_rank_tol(),
            gap_tol: T::lit(1e-10).max(T::eps() * T::lit(64.0)),
            imag_tol: T::lit(1e-8).max(T::eps().sqrt()),
        }
    }
}

/// Roots found in `(0, kappa_max]`, plus the dimension of the zero-energy eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScan<T: Real> {
    pub roots: Vec<SpectralRoot<T>>,
    pub zero_modes: usize,
    /// Every root up to this value is included.
    pub kappa_max: T,
    pub mode: IndicatorMode,
}

impl<T: Real> SpectralScan<T> {
    /// Number of positive roots counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn kappas(&self) -> Vec<T> {
        self.roots.iter().map(|r| r.kappa).collect()
    }
}

struct Indicator<'a, T: Real> {
    g: &'a TwoEdgeGraph<T>,
    bc: &'a BoundaryCondition<T>,
    phase: Cx<T>,
}

impl<'a, T: Real> Indicator<'a, T> {
    fn complex(&self, kappa: T) -> Cx<T> {
        balanced_matrix(self.g, self.bc, kappa).determinant() * self.phase
    }

    fn real(&self, kappa: T) -> T {
        self.complex(kappa).re
    }

    fn gap(&self, kappa: T) -> T {
        relative_gap(&balanced_matrix(self.g, self.bc, kappa))
    }
}

fn grid<T: Real>(g: &TwoEdgeGraph<T>, kappa_max: T, safety: T) -> Vec<T> {
    let (w1, w2) = g.frequencies();
    let h = safety * T::pi() / (w1 + w2);
    let start = h * T::lit(0.5);
    if kappa_max <= start {
        return vec![start];
    }
    let n = ((kappa_max - start) / h).ceil().as_f64() as usize;
    let mut out: Vec<T> = (0..n).map(|i| start + h * T::from_count(i)).collect();
    out.push(kappa_max);
    out
}

fn bisect<T: Real, F: Fn(T) -> T>(
    f: &F,
    lo: T,
    hi: T,
    f_lo: T,
    opts: &ScanOptions<T>,
) -> Result<T> {
    let (mut lo, mut hi, mut f_lo) = (lo, hi, f_lo);
    let half = T::lit(0.5);
    for _ in 0..opts.max_iter {
        let mid = lo + (hi - lo) * half;
        if !(mid > lo && mid < hi) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let mid = lo + (hi - lo) * half;
    if hi - lo <= opts.refine_tol * mid.max(T::one()) {
        Ok(mid)
    } else {
        Err(Error::ScanIncomplete {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        })
    }
}

fn minimize_gap<T: Real>(ind: &Indicator<T>, lo: T, hi: T, opts: &ScanOptions<T>) -> (T, T) {
    let tol = T::eps() * T::lit(4.0) * hi.max(T::one());
    golden_min(|k| ind.gap(k), lo, hi, tol, opts.max_iter)
}

enum Candidate<T> {
    Exact(T),
    /// Grid cell `(lo, hi, f(lo), f(hi), local scale)`.
    Cell(T, T, T, T, T),
    GapMin(T, T),
}

/// Subdivision levels applied to cells whose endpoint values are small.
const CELL_DEPTH: usize = 3;
const CELL_SPLIT: usize = 16;

fn is_small<T: Real>(fa: T, fb: T, scale: T) -> bool {
    fa.mag().min(fb.mag()) <= T::lit(0.25) * scale
}

fn refine_dip<T: Real>(
    ind: &Indicator<T>,
    lo: T,
    hi: T,
    flo: T,
    scale: T,
    opts: &ScanOptions<T>,
) -> Result<Vec<(T, (T, T))>> {
    let f = |k: T| ind.real(k);
    let s = if flo < T::zero() { -T::one() } else { T::one() };
    let tol = T::eps() * T::lit(4.0) * hi.max(T::one());
    let (kmin, vmin) = golden_min(|k| s * f(k), lo, hi, tol, opts.max_iter);
    if vmin < T::zero() {
        let a = bisect(&f, lo, kmin, flo, opts)?;
        let b = bisect(&f, kmin, hi, f(kmin), opts)?;
        Ok(vec![(a, (lo, kmin)), (b, (kmin, hi))])
    } else if vmin <= T::lit(1e-9) * scale {
        let (k, gap) = minimize_gap(ind, lo, hi, opts);
        if gap <= opts.root_tol {
            Ok(vec![(k, (lo, hi))])
        } else {
            Ok(vec![])
        }
    } else {
        Ok(vec![])
    }
}

/// Roots of the real indicator in one cell; small-valued cells are subdivided to separate clustered roots.
fn refine_cell<T: Real>(
    ind: &Indicator<T>,
    (lo, hi, flo, fhi): (T, T, T, T),
    scale: T,
    depth: usize,
    opts: &ScanOptions<T>,
) -> Result<Vec<(T, (T, T))>> {
    let f = |k: T| ind.real(k);
    let change = (flo < T::zero()) != (fhi < T::zero());
    if depth == 0 || !is_small(flo, fhi, scale) {
        return if change {
            Ok(vec![(bisect(&f, lo, hi, flo, opts)?, (lo, hi))])
        } else if is_small(flo, fhi, scale) {
            refine_dip(ind, lo, hi, flo, scale, opts)
        } else {
            Ok(vec![])
        };
    }
    let step = (hi - lo) / T::from_count(CELL_SPLIT);
    let ks: Vec<T> = (0..=CELL_SPLIT)
        .map(|j| if j == CELL_SPLIT { hi } else { lo + step * T::from_count(j) })
        .collect();
    let mut vs: Vec<T> = ks.iter().map(|&k| f(k)).collect();
    vs[0] = flo;
    vs[CELL_SPLIT] = fhi;
    let sub_scale = vs.iter().fold(T::zero(), |m, v| m.max(v.mag()));
    let jmin = (0..=CELL_SPLIT)
        .min_by(|&a, &b| vs[a].mag().partial_cmp(&vs[b].mag()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut out = Vec::new();
    for j in 0..CELL_SPLIT {
        let (a, b) = (vs[j], vs[j + 1]);
        if a == T::zero() {
            out.push((ks[j], (ks[j], ks[j])));
            continue;
        }
        if b == T::zero() {
            continue;
        }
        let change = (a < T::zero()) != (b < T::zero());
        // Same-sign cells are searched further only next to the smallest sampled |f|.
        if change || ((j == jmin || j + 1 == jmin) && is_small(a, b, sub_scale)) {
            out.extend(refine_cell(ind, (ks[j], ks[j + 1], a, b), sub_scale, depth - 1, opts)?);
        }
    }
    Ok(out)
}

fn local_scale<T: Real>(vals: &[T], i: usize) -> T {
    let lo = i.saturating_sub(32);
    let hi = (i + 33).min(vals.len());
    vals[lo..hi].iter().fold(T::zero(), |acc, v| acc.max(v.mag()))
}

fn refine_candidate<T: Real>(
    ind: &Indicator<T>,
    cand: &Candidate<T>,
    opts: &ScanOptions<T>,
) -> Result<Vec<(T, (T, T))>> {
    match *cand {
        Candidate::Exact(k) => Ok(vec![(k, (k, k))]),
        Candidate::Cell(lo, hi, flo, fhi, scale) => refine_cell(ind, (lo, hi, flo, fhi), scale, CELL_DEPTH, opts),
        Candidate::GapMin(lo, hi) => {
            let (k, gap) = minimize_gap(ind, lo, hi, opts);
            if gap > opts.root_tol {
                return Ok(vec![]);
            }
            let mut out = vec![(k, (lo, hi))];
            let w = (hi - lo) * T::lit(1e-3);
            for (a, b) in [(lo, k - w), (k + w, hi)] {
                if b > a {
                    let (k2, gap2) = minimize_gap(ind, a, b, opts);
                    if gap2 <= opts.root_tol && k2 > a + w && k2 < b - w {
                        out.push((k2, (a, b)));
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Finds every positive root up to `kappa_max`.
///
/// Grid evaluation and root refinement run on the current rayon pool; output order is deterministic.
pub fn scan_roots<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    kappa_max: T,
    opts: &ScanOptions<T>,
) -> Result<SpectralScan<T>> {
    let ind = Indicator {
        g,
        bc,
        phase: indicator_phase(bc),
    };
    let ks = grid(g, kappa_max, opts.safety);
    let vals: Vec<Cx<T>> = ks.par_iter().map(|&k| ind.complex(k)).collect();
    let symmetric = bc.is_scale_free() || bc.is_symmetric(T::lit(1e-10).max(T::eps() * T::lit(64.0)));
    let re: Vec<T> = vals.iter().map(|z| z.re).collect();
    let scale_all = vals.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)));
    let max_im = vals.iter().fold(T::zero(), |acc, z| acc.max(z.im.mag()));
    let mode = if symmetric && max_im <= opts.imag_tol * scale_all {
        IndicatorMode::RealDeterminant
    } else {
        IndicatorMode::SingularGap
    };

    let mut cands = Vec::new();
    match mode {
        IndicatorMode::RealDeterminant => {
            for i in 0..ks.len() {
                if re[i] == T::zero() {
                    cands.push(Candidate::Exact(ks[i]));
                    continue;
                }
                if i + 1 == ks.len() || re[i + 1] == T::zero() {
                    continue;
                }
                let scale = local_scale(&re, i);
                if (re[i] < T::zero()) != (re[i + 1] < T::zero()) || is_small(re[i], re[i + 1], scale) {
                    cands.push(Candidate::Cell(ks[i], ks[i + 1], re[i], re[i + 1], scale));
                }
            }
        }
        IndicatorMode::SingularGap => {
            let gaps: Vec<T> = ks.par_iter().map(|&k| ind.gap(k)).collect();
            let n = gaps.len();
            for i in 0..n {
                let left = i == 0 || gaps[i] <= gaps[i - 1];
                let right = i + 1 == n || gaps[i] < gaps[i + 1];
                if left && right {
                    let lo = ks[i.saturating_sub(1)];
                    let hi = ks[(i + 1).min(n - 1)];
                    cands.push(Candidate::GapMin(lo, hi));
                }
            }
        }
    }

    let found: Vec<Vec<(T, (T, T))>> = cands
        .par_iter()
        .map(|c| refine_candidate(&ind, c, opts))
        .collect::<Result<_>>()?;
    let mut raw: Vec<(T, (T, T))> = found.into_iter().flatten().collect();
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut groups: Vec<Vec<(T, (T, T))>> = Vec::new();
    for r in raw {
        match groups.last_mut() {
            Some(grp) if r.0 - grp[0].0 <= opts.gap_tol * r.0.max(T::one()) => grp.push(r),
            _ => groups.push(vec![r]),
        }
    }
    let roots: Vec<SpectralRoot<T>> = groups
        .par_iter()
        .map(|grp| {
            let kappa = grp[0].0;
            let lo = grp.iter().fold(grp[0].1 .0, |a, r| a.min(r.1 .0));
            let hi = grp.iter().fold(grp[0].1 .1, |a, r| a.max(r.1 .1));
            let m = balanced_matrix(g, bc, kappa);
            let dim = kernel_basis(&m, opts.rank_tol, kappa)
                .map(|k| k.len())
                .unwrap_or(0);
            SpectralRoot {
                kappa,
                residual: relative_gap(&m),
                bracket: (lo, hi),
                multiplicity: dim.max(grp.len()).max(1),
                is_zero_mode: false,
            }
        })
        .collect();

    Ok(SpectralScan {
        roots,
        zero_modes: zero_mode_dimension(g, bc),
        kappa_max: *ks.last().unwrap_or(&kappa_max),
        mode,
    })
}

/// Scans until at least `count` positive roots are found and keeps the first `count`.
pub fn scan_first_roots<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    count: usize,
    opts: &ScanOptions<T>,
) -> Result<SpectralScan<T>> {
    let (w1, w2) = g.frequencies();
    let spacing = T::pi() / (w1 + w2);
    let mut kmax = spacing * T::from_count(count + 8) * T::lit(1.05);
    loop {
        let mut scan = scan_roots(g, bc, kmax, opts)?;
        if scan.roots.len() > count {
            let next = scan.roots[count].kappa;
            scan.roots.truncate(count);
            let last = scan.roots.last().map(|r| r.kappa).unwrap_or(T::zero());
            scan.kappa_max = (last + next) * T::lit(0.5);
            return Ok(scan);
        }
        kmax *= T::lit(1.5);
    }
}
