use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qlr_core::linalg::{hermitian_eig, hermitian_violation, symmetric_violation};
use qlr_core::qlr::solve::isotropic;
use qlr_core::qlr::{
    build_matrices, hermitify, linear_response_function, oscillator_strengths, polarizability, property_gradient, solve, ExcitationSolution,
    Method, MethodId, PropertyGradientVector, ResponseMatrices,
};
use qlr_core::vqe::{optimize, GroundStateRecord, VqeOptions};
use qlr_core::{OneElectronOperatorSet, SpacePartition, C64};

mod common;

fn ground(n_orb: usize, n_elec: usize, cas: (usize, usize), seed: u64) -> (GroundStateRecord, OneElectronOperatorSet) {
    let ints = common::model_integrals(n_orb, n_elec, seed);
    let part = SpacePartition::new(n_orb, n_elec, cas, None).unwrap();
    let rec = optimize(&ints, &part, 2, &VqeOptions { grad_tol: 1e-9, analytic_theta: true, ..Default::default() }).unwrap();
    assert!(rec.converged);
    (rec, common::model_dipoles(n_orb, seed))
}

fn grads(id: MethodId, rec: &GroundStateRecord, ops: &OneElectronOperatorSet) -> [PropertyGradientVector; 3] {
    ["x", "y", "z"].map(|l| property_gradient(id, rec, ops, l).unwrap())
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn commutator_norm(m: &ResponseMatrices, z: &DVector<C64>, y: &DVector<C64>) -> f64 {
    let zc = z.map(|c| c.conj());
    let yc = y.map(|c| c.conj());
    ((z.transpose() * &m.sigma * zc)[(0, 0)] - (y.transpose() * m.sigma.transpose() * yc)[(0, 0)]).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn matrices_have_their_symmetries(seed in 0u64..200) {
        let (rec, _) = ground(6, 4, (2, 3), seed);
        for m in Method::ALL {
            let r = build_matrices(MethodId::plain(m), &rec).unwrap();
            prop_assert!(hermitian_violation(&r.a) < 1e-10, "{}: A", m.name());
            prop_assert!(symmetric_violation(&r.b) < 1e-10, "{}: B", m.name());
            prop_assert!(hermitian_violation(&r.sigma) < 1e-10, "{}: Sigma", m.name());
            prop_assert!(max_abs(&r.delta) < 1e-10, "{}: Delta", m.name());
        }
    }

    #[test]
    fn strengths_do_not_depend_on_vector_normalization(seed in 0u64..200, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 0.1);
        let (rec, ops) = ground(6, 4, (2, 3), seed);
        let id = MethodId::plain(Method::Naive);
        let m = build_matrices(id, &rec).unwrap();
        let sol = solve(&m).unwrap();
        let g = grads(id, &rec, &ops);
        let f = oscillator_strengths(&sol, &g);
        let c = C64::new(re, im);
        let mut scaled: ExcitationSolution = sol.clone();
        for k in 0..scaled.len() {
            scaled.z[k] *= c;
            scaled.y[k] *= c;
            scaled.norm[k] = commutator_norm(&m, &scaled.z[k], &scaled.y[k]);
            prop_assert!((scaled.norm[k] - sol.norm[k] * c.norm_sqr()).abs() < 1e-9 * scaled.norm[k].abs());
        }
        let fs = oscillator_strengths(&scaled, &g);
        for (a, b) in f.iter().zip(&fs) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        }
    }
}

#[test]
fn polarizability_symmetries_and_response_function() {
    let (rec, ops) = ground(6, 4, (2, 3), 17);
    for m in [Method::Naive, Method::St, Method::AllProj] {
        let id = MethodId::plain(m);
        let r = build_matrices(id, &rec).unwrap();
        let sol = solve(&r).unwrap();
        let g = grads(id, &rec, &ops);
        let w = 0.3 * sol.omega[0];
        let a = polarizability(&sol, &g, w).unwrap();
        let b = polarizability(&sol, &g, -w).unwrap();
        assert!((a - b.transpose()).iter().all(|z| z.norm() < 1e-10), "{}: alpha(w) != alpha(-w)^T", m.name());
        let a0 = polarizability(&sol, &g, 0.0).unwrap();
        assert!((a0 - a0.transpose()).iter().all(|z| z.norm() < 1e-10));
        assert!(a0.iter().all(|z| z.im.abs() < 1e-10));
        assert!(isotropic(&a0) > 0.0, "{}: static polarizability {}", m.name(), isotropic(&a0));
        // sum over states against the direct linear solve
        for i in 0..3 {
            for j in 0..3 {
                let lr = linear_response_function(&r, &g[i], &g[j], w).unwrap();
                let d = (lr + a[(i, j)]).norm();
                assert!(d < 1e-8 * (1.0 + a[(i, j)].norm()), "{} ({i},{j}): <<;>> {lr} vs -alpha {}", m.name(), -a[(i, j)]);
            }
        }
    }
}

#[test]
fn all_st_reduces_to_a_metric_eigenproblem() {
    let (rec, _) = ground(7, 4, (2, 3), 23);
    let r = build_matrices(MethodId::plain(Method::AllSt), &rec).unwrap();
    assert!(max_abs(&r.b) < 1e-10, "all-ST B = {:e}", max_abs(&r.b));
    let sol = solve(&r).unwrap();
    let (s, v) = hermitian_eig(&r.sigma);
    let keep: Vec<usize> = (0..s.len()).filter(|&k| s[k] > 1e-10).collect();
    let x = DMatrix::from_fn(r.dim(), keep.len(), |i, k| v[(i, keep[k])] / s[keep[k]].sqrt());
    let (w, _) = hermitian_eig(&(x.adjoint() * &r.a * &x));
    let mut w: Vec<f64> = w.into_iter().filter(|x| *x > 0.0).collect();
    w.sort_by(f64::total_cmp);
    assert_eq!(w.len(), sol.len());
    for (a, b) in w.iter().zip(&sol.omega) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn hermitified_state_transfer_stays_structured() {
    let (rec, ops) = ground(6, 4, (2, 3), 29);
    let id = MethodId::new(Method::St, true).unwrap();
    let plain = build_matrices(MethodId::plain(Method::St), &rec).unwrap();
    let h = hermitify(&plain, &rec).unwrap();
    assert!(hermitian_violation(&h.a) < 1e-10 && symmetric_violation(&h.b) < 1e-10);
    let direct = build_matrices(id, &rec).unwrap();
    assert!(max_abs(&(&direct.a - &h.a)) < 1e-12 && max_abs(&(&direct.b - &h.b)) < 1e-12);
    let sol = solve(&direct).unwrap();
    let f = oscillator_strengths(&sol, &grads(id, &rec, &ops));
    assert!(f.iter().all(|x| *x >= 0.0 && x.is_finite()));
    assert!(MethodId::new(Method::Naive, true).is_err());
}

#[test]
fn excitations_are_positive_and_sorted() {
    let (rec, ops) = ground(6, 4, (2, 2), 31);
    for m in Method::ALL {
        let id = MethodId::plain(m);
        let sol = solve(&build_matrices(id, &rec).unwrap()).unwrap();
        assert!(sol.omega.windows(2).all(|w| w[0] <= w[1]));
        assert!(sol.omega.iter().all(|w| *w > 0.0));
        assert!(sol.norm.iter().all(|n| *n > 0.0));
        let f = oscillator_strengths(&sol, &grads(id, &rec, &ops));
        assert!(f.iter().all(|x| *x >= 0.0));
    }
}
