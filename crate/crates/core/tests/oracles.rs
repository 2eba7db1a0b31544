//! Engine results against closed forms and independent quadrature.

mod common;

use common::{edge_norms, first_roots, reference_graph};
use twoedge::catalog::{
    bg_density, catalog_roots, closed_form_eigenfunction, leaning_asymptotic, Preset,
};
use twoedge::observables::{bin_masses, scan_eigensolutions};
use twoedge::spectral::{build_eigensolutions, default_rank_tol, scan_roots, ScanOptions};
use twoedge::wigner::{phase_aligned_distance, region_geometry, wigner_eval, wigner_grid};
use twoedge::{BoundaryCondition, TwoEdgeGraph};

#[test]
fn leaning_approaches_its_asymptotic_branch_value() {
    let g = reference_graph();
    let (w1, _) = g.frequencies();
    for preset in [Preset::Segment, Preset::Ring] {
        let bc = preset.boundary_condition();
        let scan = first_roots(&g, preset, 1200);
        let cat = catalog_roots(preset, &g, scan.kappa_max);
        for r in scan.roots.iter().skip(1000).filter(|r| r.multiplicity == 1) {
            let branch = cat
                .iter()
                .min_by(|a, b| (a.kappa - r.kappa).abs().total_cmp(&(b.kappa - r.kappa).abs()))
                .unwrap()
                .branch;
            let s = &build_eigensolutions(&g, &bc, r, default_rank_tol()).unwrap()[0];
            let expect = leaning_asymptotic(preset, branch, &g, w1 * r.kappa).unwrap();
            let bound = 4.0 / (r.kappa * g.l1().min(g.l2()));
            assert!((s.leaning() - expect).abs() < bound, "{preset} kappa {}: {} vs {expect}", r.kappa, s.leaning());
        }
    }
}

#[test]
fn engine_coefficients_match_closed_form_eigenfunctions() {
    let g = reference_graph();
    for preset in [Preset::Segment, Preset::Ring, Preset::Pendant, Preset::Rose] {
        let bc = preset.boundary_condition();
        let scan = first_roots(&g, preset, 60);
        let cat = catalog_roots(preset, &g, scan.kappa_max);
        for r in scan.roots.iter().filter(|r| r.multiplicity == 1) {
            let c = cat
                .iter()
                .find(|c| (c.kappa - r.kappa).abs() < 1e-9 * r.kappa)
                .expect("catalog root");
            let engine = &build_eigensolutions(&g, &bc, r, default_rank_tol()).unwrap()[0];
            let closed = closed_form_eigenfunction(preset, c.branch, &g, r.kappa).unwrap();
            let d = phase_aligned_distance(engine.coefficients(), closed.coefficients());
            assert!(d < 1e-7, "{preset} kappa {}: distance {d:.2e}", r.kappa);
        }
    }
}

#[test]
fn edge_weights_match_quadrature() {
    let g = reference_graph();
    let scan = first_roots(&g, Preset::Pendant, 40);
    let bc = Preset::Pendant.boundary_condition();
    for s in scan_eigensolutions(&g, &bc, &scan, default_rank_tol()).unwrap() {
        let (a, b) = edge_norms(&s);
        let (wa, wb) = s.edge_weights();
        assert!((a - wa).abs() < 1e-10 && (b - wb).abs() < 1e-10);
    }
}

#[test]
fn pendant_localizes_only_on_the_pendant_edge() {
    let g = reference_graph();
    let scan = first_roots(&g, Preset::Pendant, 800);
    let bc = Preset::Pendant.boundary_condition();
    let leanings: Vec<f64> = scan_eigensolutions(&g, &bc, &scan, default_rank_tol())
        .unwrap()
        .iter()
        .map(|s| s.leaning())
        .collect();
    assert!(leanings.iter().any(|l| (l - 1.0).abs() < 1e-10));
    assert!(leanings.iter().all(|l| (l + 1.0).abs() > 1e-3));
}

#[test]
fn bg_densities_are_probability_measures() {
    for g in [reference_graph(), TwoEdgeGraph::new(0.7, 2.3, 1.1, 0.4).unwrap()] {
        for preset in [Preset::Segment, Preset::Ring, Preset::Pendant, Preset::Rose] {
            let d = bg_density(preset, &g);
            assert!((d.total_mass() - 1.0).abs() < 1e-10, "{preset}");
            let masses = bin_masses(&d, 32);
            assert!(masses.iter().all(|&m| m >= -1e-14));
            assert!((masses.iter().sum::<f64>() - 1.0).abs() < 1e-8, "{preset}");
        }
    }
}

#[test]
fn wigner_is_real_and_vanishes_at_the_outer_ends() {
    let g = reference_graph();
    let geom = region_geometry(&g);
    let bc = Preset::Segment.boundary_condition();
    let scan = first_roots(&g, Preset::Segment, 12);
    let sol = &build_eigensolutions(&g, &bc, &scan.roots[11], default_rank_tol()).unwrap()[0];
    let xs: Vec<f64> = (0..=40).map(|i| -g.l1() + (g.l1() + g.l2()) * i as f64 / 40.0).collect();
    let ps: Vec<f64> = (0..=40).map(|i| -20.0 + i as f64).collect();
    let grid = wigner_grid(sol, &xs, &ps).unwrap();
    assert!(grid.imag_residue < 1e-12);
    for &p in &ps {
        assert!(wigner_eval(sol, -g.l1(), p, &geom).unwrap().abs() < 1e-12);
        assert!(wigner_eval(sol, g.l2(), p, &geom).unwrap().abs() < 1e-12);
    }
}

#[test]
fn single_precision_scan_tracks_double() {
    let g64 = reference_graph();
    let g32 = TwoEdgeGraph::<f32>::new(16.0, 1.0, std::f32::consts::E, std::f32::consts::PI).unwrap();
    for (b64, b32) in [
        (BoundaryCondition::<f64>::dirichlet(), BoundaryCondition::<f32>::dirichlet()),
        (Preset::Segment.boundary_condition(), Preset::Segment.boundary_condition()),
    ] {
        let a = scan_roots(&g64, &b64, 10.0, &ScanOptions::default()).unwrap();
        let b = scan_roots(&g32, &b32, 10.0f32, &ScanOptions::default()).unwrap();
        assert_eq!(a.count_with_multiplicity(), b.count_with_multiplicity());
        for (x, y) in a.roots.iter().zip(&b.roots) {
            assert!((x.kappa - y.kappa as f64).abs() < 1e-4 * x.kappa, "{} vs {}", x.kappa, y.kappa);
        }
    }
}
