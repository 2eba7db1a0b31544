//! Leaning statistics, eigenvalue counting and torus-flow equidistribution.

use crate::catalog::BgDensity;
use crate::error::{Error, Result};
use crate::graph::{BoundaryCondition, TwoEdgeGraph};
use crate::scalar::{wrap_angle, Real};
use crate::special::{adaptive_simpson, gauss_legendre_16, integrate, pairwise_sum};
use crate::spectral::{build_eigensolutions, detect_zero_modes, EigenSolution, SpectralScan};
use rayon::prelude::*;

/// `||psi_2||^2 - ||psi_1||^2` of a normalized eigenfunction.
pub fn leaning<T: Real>(sol: &EigenSolution<T>) -> T {
    sol.leaning()
}

/// One eigenfunction in a [`LeaningSeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaningEntry<T: Real> {
    pub kappa: T,
    pub energy: T,
    pub leaning: T,
}

/// Leanings of consecutive eigenfunctions, sorted by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaningSeries<T: Real> {
    pub entries: Vec<LeaningEntry<T>>,
    pub graph: TwoEdgeGraph<T>,
    pub label: String,
}

impl<T: Real> LeaningSeries<T> {
    /// Builds a series from `(kappa, leaning)` pairs.
    pub fn from_values(graph: TwoEdgeGraph<T>, label: &str, values: &[(T, T)]) -> Self {
        let entries = values
            .iter()
            .map(|&(kappa, leaning)| LeaningEntry {
                kappa,
                energy: graph.energy(kappa),
                leaning,
            })
            .collect();
        Self {
            entries,
            graph,
            label: label.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn leanings(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.leaning).collect()
    }
}

/// Eigenfunctions for every root of a scan (zero modes first), one per kernel dimension.
pub fn scan_eigensolutions<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    scan: &SpectralScan<T>,
    rank_tol: T,
) -> Result<Vec<EigenSolution<T>>> {
    let mut out = if scan.zero_modes > 0 {
        detect_zero_modes(g, bc)
    } else {
        Vec::new()
    };
    let rest: Vec<Vec<EigenSolution<T>>> = scan
        .roots
        .par_iter()
        .map(|r| build_eigensolutions(g, bc, r, rank_tol))
        .collect::<Result<_>>()?;
    out.extend(rest.into_iter().flatten());
    Ok(out)
}

/// Leaning series over all eigenfunctions of a scan.
pub fn leaning_series<T: Real>(
    g: &TwoEdgeGraph<T>,
    bc: &BoundaryCondition<T>,
    scan: &SpectralScan<T>,
    label: &str,
    rank_tol: T,
) -> Result<LeaningSeries<T>> {
    let sols = scan_eigensolutions(g, bc, scan, rank_tol)?;
    let entries = sols
        .iter()
        .map(|s| LeaningEntry {
            kappa: s.kappa(),
            energy: s.energy(),
            leaning: s.leaning(),
        })
        .collect();
    Ok(LeaningSeries {
        entries,
        graph: *g,
        label: label.to_string(),
    })
}

/// Mean leaning over entries with `energy <= e_max`.
pub fn cesaro_mean<T: Real>(series: &LeaningSeries<T>, e_max: T) -> Result<T> {
    let vals: Vec<T> = series
        .entries
        .iter()
        .filter(|e| e.energy <= e_max)
        .map(|e| e.leaning)
        .collect();
    if vals.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(pairwise_sum(&vals) / T::from_count(vals.len()))
}

/// Mean leaning over the whole series.
pub fn cesaro_mean_all<T: Real>(series: &LeaningSeries<T>) -> Result<T> {
    cesaro_mean(series, T::infinity())
}

/// Minimum and maximum leaning over the second half of the series.
pub fn running_extremes<T: Real>(series: &LeaningSeries<T>) -> Result<(T, T)> {
    let n = series.entries.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let tail = &series.entries[n / 2..];
    let first = tail[0].leaning;
    Ok(tail
        .iter()
        .fold((first, first), |(lo, hi), e| (lo.min(e.leaning), hi.max(e.leaning))))
}

/// Eigenvalue count and its Weyl asymptotic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylCount<T: Real> {
    pub count: usize,
    pub asymptotic: T,
}

/// `#{E_kappa <= E}` with multiplicity (zero modes included) and `(omega1 + omega2) sqrt(2E) / (hbar pi)`.
pub fn weyl_count<T: Real>(scan: &SpectralScan<T>, g: &TwoEdgeGraph<T>, energy: T) -> Result<WeylCount<T>> {
    let kappa = g.kappa_of_energy(energy);
    if kappa > scan.kappa_max {
        return Err(Error::ScanTooShort {
            required: kappa.as_f64(),
            available: scan.kappa_max.as_f64(),
        });
    }
    let positive: usize = scan
        .roots
        .iter()
        .filter(|r| r.kappa <= kappa)
        .map(|r| r.multiplicity)
        .sum();
    let (w1, w2) = g.frequencies();
    Ok(WeylCount {
        count: positive + scan.zero_modes,
        asymptotic: (w1 + w2) * kappa / T::pi(),
    })
}

/// Torus points `(omega1 kappa, omega2 kappa) mod 2 pi` at the positive roots.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSample<T: Real> {
    pub points: Vec<(T, T)>,
    pub omega: (T, T),
}

fn torus_angle<T: Real>(phi: T) -> T {
    let r = wrap_angle(phi);
    if T::two_pi() - r < T::lit(1e-8) {
        T::zero()
    } else {
        r
    }
}

/// Maps every positive root (repeated by multiplicity) onto the torus.
pub fn torus_sample<T: Real>(scan: &SpectralScan<T>, g: &TwoEdgeGraph<T>) -> TorusSample<T> {
    let (w1, w2) = g.frequencies();
    let points = scan
        .roots
        .iter()
        .flat_map(|r| {
            let p = (torus_angle(w1 * r.kappa), torus_angle(w2 * r.kappa));
            std::iter::repeat_n(p, r.multiplicity.max(1))
        })
        .collect();
    TorusSample {
        points,
        omega: (w1, w2),
    }
}

/// Histogram of `phi1` values over uniform bins of `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchHistogram {
    pub counts: Vec<usize>,
    pub bin_count: usize,
    pub total: usize,
    pub label: Option<String>,
}

/// Bins `phi1`; points within `1e-9` below a bin edge count in the upper bin.
pub fn bg_histogram<T: Real>(sample: &TorusSample<T>, bins: usize) -> BranchHistogram {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    let width = T::two_pi() / T::from_count(bins);
    for &(phi1, _) in &sample.points {
        let x = phi1 / width + T::lit(1e-9);
        let mut b = x.floor().as_f64() as usize;
        if b >= bins {
            b %= bins;
        }
        counts[b] += 1;
    }
    BranchHistogram {
        counts,
        bin_count: bins,
        total: sample.points.len(),
        label: None,
    }
}

/// Analytic mass of each histogram bin, atoms assigned to their containing bin.
pub fn bin_masses<T: Real>(density: &BgDensity<T>, bins: usize) -> Vec<T> {
    let width = T::two_pi() / T::from_count(bins);
    (0..bins)
        .map(|b| {
            let a = width * T::from_count(b);
            let mut m = T::zero();
            for (x, w) in gauss_legendre_16(a, a + width) {
                m += w * density.density(x);
            }
            m
        })
        .enumerate()
        .map(|(b, m)| {
            let a = width * T::from_count(b);
            density
                .atoms()
                .into_iter()
                .filter(|(x, _)| {
                    let x = wrap_angle(*x);
                    x >= a && x < a + width
                })
                .fold(m, |acc, (_, mass)| acc + mass)
        })
        .collect()
}

/// `sum_b |count_b / total - mass_b|`.
pub fn l1_distance<T: Real>(hist: &BranchHistogram, density: &BgDensity<T>) -> T {
    let masses = bin_masses(density, hist.bin_count);
    let total = T::from_count(hist.total.max(1));
    let diffs: Vec<T> = hist
        .counts
        .iter()
        .zip(&masses)
        .map(|(&c, &m)| (T::from_count(c) / total - m).mag())
        .collect();
    pairwise_sum(&diffs)
}

/// Time average along the flow and space average over the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAverage<T: Real> {
    pub time_avg: T,
    pub space_avg: T,
}

/// Compares `(1/K) int_0^K f(omega kappa) d kappa` with `(1/4 pi^2) int int f`.
pub fn time_average_check<T: Real, F: Fn(T, T) -> T + Sync>(g: &TwoEdgeGraph<T>, f: F, k: T) -> TimeAverage<T> {
    let (w1, w2) = g.frequencies();
    let along = |kappa: T| f(wrap_angle(w1 * kappa), wrap_angle(w2 * kappa));
    let panel = T::frac_pi_2() / w1.max(w2);
    let n = (k / panel).ceil().as_f64().max(1.0) as usize;
    let step = k / T::from_count(n);
    let tol = T::lit(1e-10).max(T::eps() * T::lit(100.0)) * step;
    let parts: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = step * T::from_count(i);
            adaptive_simpson(&along, a, a + step, tol, 30)
        })
        .collect();
    let time_avg = pairwise_sum(&parts) / k;
    let inner = |phi1: T| integrate(|phi2| f(phi1, phi2), T::zero(), T::two_pi(), 16);
    let space = integrate(inner, T::zero(), T::two_pi(), 16);
    TimeAverage {
        time_avg,
        space_avg: space / (T::lit(4.0) * T::pi() * T::pi()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{bg_density, Preset};

    fn graph() -> TwoEdgeGraph<f64> {
        TwoEdgeGraph::new(16.0, 1.0, std::f64::consts::E, std::f64::consts::PI).unwrap()
    }

    #[test]
    fn constant_series_statistics() {
        let g = graph();
        let vals: Vec<(f64, f64)> = (1..50).map(|i| (i as f64, 0.25)).collect();
        let s = LeaningSeries::from_values(g, "const", &vals);
        assert!((cesaro_mean(&s, 1e9).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(running_extremes(&s).unwrap(), (0.25, 0.25));
        assert_eq!(cesaro_mean(&s, 0.1), Err(Error::EmptySeries));
    }

    #[test]
    fn uniform_histogram_against_uniform_density() {
        let g = graph();
        let mut d = bg_density(Preset::Pendant, &g);
        d.components = vec![crate::catalog::BgComponent {
            branch: 0,
            shape: crate::catalog::DensityShape::Uniform(1.0 / std::f64::consts::TAU),
        }];
        let bins = 16;
        let width = std::f64::consts::TAU / bins as f64;
        let points = (0..bins * 10)
            .map(|i| ((i / 10) as f64 * width + 0.5 * width, 0.0))
            .collect();
        let sample = TorusSample {
            points,
            omega: g.frequencies(),
        };
        let h = bg_histogram(&sample, bins);
        assert_eq!(h.counts.iter().sum::<usize>(), h.total);
        assert!(l1_distance(&h, &d) < 1e-12);
    }

    #[test]
    fn time_average_of_constants_and_characters() {
        let g = graph();
        let t = time_average_check(&g, |_, _| 1.0, 10.0);
        assert!((t.time_avg - 1.0).abs() < 1e-10 && (t.space_avg - 1.0).abs() < 1e-12);
        let k = 200.0;
        let t = time_average_check(&g, |a: f64, b: f64| (a - b).cos(), k);
        let (w1, w2) = g.frequencies();
        let exact = (k * (w1 - w2)).sin() / (k * (w1 - w2));
        assert!((t.time_avg - exact).abs() < 1e-8);
        assert!(t.space_avg.abs() < 1e-12);
    }
}
