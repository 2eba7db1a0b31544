//! Property tests over random graphs and boundary conditions.

use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;
use twoedge::catalog::{closed_form_spectral_function, Preset};
use twoedge::observables::scan_eigensolutions;
use twoedge::scalar::{cx, Cx};
use twoedge::special::integrate_complex;
use twoedge::spectral::{default_rank_tol, scan_first_roots, scan_roots, EigenSolution, ScanOptions};
use twoedge::{BoundaryCondition, TwoEdgeGraph};

fn graph_strategy() -> impl Strategy<Value = TwoEdgeGraph<f64>> {
    (0.2f64..20.0, 0.2f64..20.0, 0.3f64..4.0, 0.3f64..4.0)
        .prop_map(|(m1, m2, l1, l2)| TwoEdgeGraph::new(m1, m2, l1, l2).unwrap())
}

fn preset_strategy() -> impl Strategy<Value = Preset> {
    prop::sample::select(Preset::ALL.to_vec())
}

fn complex_vec() -> impl Strategy<Value = Vector4<Cx<f64>>> {
    prop::array::uniform8(-1.0f64..1.0)
        .prop_map(|a| Vector4::new(cx(a[0], a[1]), cx(a[2], a[3]), cx(a[4], a[5]), cx(a[6], a[7])))
}

fn unitary_strategy() -> impl Strategy<Value = Matrix4<Cx<f64>>> {
    prop::array::uniform4(complex_vec())
        .prop_filter("well conditioned", |cols| Matrix4::from_columns(cols).determinant().norm() > 1e-2)
        .prop_map(|cols| Matrix4::from_columns(&cols).qr().q())
}

/// `<f, g>` in `L2(-l1, l2)` by quadrature of the evaluated eigenfunctions.
fn inner(a: &EigenSolution<f64>, b: &EigenSolution<f64>) -> Cx<f64> {
    let g = a.graph();
    let f = |x: f64| a.evaluate(x).unwrap().conj() * b.evaluate(x).unwrap();
    let panels = |l: f64| (l * (a.kappa() + b.kappa()) * 4.0).ceil() as usize + 8;
    integrate_complex(f, -g.l1(), 0.0, panels(g.l1() * g.m1().sqrt()))
        + integrate_complex(f, 0.0, g.l2(), panels(g.l2() * g.m2().sqrt()))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn preset_eigenfunctions_satisfy_the_boundary_condition(g in graph_strategy(), p in preset_strategy()) {
        let bc = p.boundary_condition();
        let scan = scan_first_roots(&g, &bc, 30, &ScanOptions::default()).unwrap();
        for r in &scan.roots {
            let f = closed_form_spectral_function(p, &g, r.kappa);
            let h = closed_form_spectral_function(p, &g, r.kappa * (1.0 + 1e-3));
            prop_assert!(f.norm() <= 1e-6 * (1.0 + h.norm()), "{p} root {} not a closed-form zero", r.kappa);
        }
        for s in scan_eigensolutions(&g, &bc, &scan, default_rank_tol()).unwrap() {
            let t = s.trace();
            prop_assert!(bc.domain_check(&t, 1e-8));
            prop_assert!(t.orthogonality().norm() < 1e-8);
            prop_assert!(s.leaning().abs() <= 1.0 + 1e-12);
            let (a, b) = s.edge_weights();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_scale_free_conditions_give_orthonormal_eigenfunctions(
        g in graph_strategy(),
        vecs in prop::collection::vec(complex_vec(), 1..4),
    ) {
        let bc = BoundaryCondition::from_span(&vecs).unwrap();
        prop_assert!(bc.is_scale_free());
        let scan = scan_first_roots(&g, &bc, 6, &ScanOptions::default()).unwrap();
        let sols: Vec<_> = scan_eigensolutions(&g, &bc, &scan, default_rank_tol())
            .unwrap()
            .into_iter()
            .filter(|s| s.kappa() > 0.0)
            .collect();
        for s in &sols {
            prop_assert!(bc.domain_check(&s.trace(), 1e-7));
        }
        for i in 0..sols.len() {
            for j in 0..sols.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                let v = inner(&sols[i], &sols[j]);
                prop_assert!((v - cx(expect, 0.0)).norm() < 1e-7, "<{i},{j}> = {v}");
            }
        }
    }

    #[test]
    fn general_unitary_roots_carry_kernel_vectors(g in graph_strategy(), u in unitary_strategy()) {
        let bc = BoundaryCondition::from_unitary(u).unwrap();
        let (w1, w2) = g.frequencies();
        let scan = scan_roots(&g, &bc, 12.0 * std::f64::consts::PI / (w1 + w2), &ScanOptions::default()).unwrap();
        for s in scan_eigensolutions(&g, &bc, &scan, default_rank_tol()).unwrap() {
            prop_assert!(bc.domain_residual(&s.trace()) < 1e-6);
            prop_assert!(s.leaning().abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn mirroring_negates_leaning(g in graph_strategy(), p in prop::sample::select(vec![Preset::Segment, Preset::Ring, Preset::Rose])) {
        let bc = p.boundary_condition();
        let opts = ScanOptions::default();
        let a = scan_first_roots(&g, &bc, 25, &opts).unwrap();
        let b = scan_first_roots(&g.mirrored(), &bc, 25, &opts).unwrap();
        let la = scan_eigensolutions(&g, &bc, &a, default_rank_tol()).unwrap();
        let lb = scan_eigensolutions(&g.mirrored(), &bc, &b, default_rank_tol()).unwrap();
        prop_assert_eq!(la.len(), lb.len());
        for (x, y) in la.iter().zip(&lb) {
            prop_assert!((x.kappa() - y.kappa()).abs() < 1e-9 * x.kappa().max(1.0));
            if x.root().multiplicity == 1 {
                prop_assert!((x.leaning() + y.leaning()).abs() < 1e-8);
            }
        }
    }
}
