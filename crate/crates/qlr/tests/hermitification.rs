use qlr::checks::{ground_state, rhf_energy, tight_options};
use qlr::fixtures::load;
use qlr::oracle::Oracle;
use qlr_core::qlr::{build_matrices, hermitify, solve, Method, MethodId};
use qlr_core::vqe::{energy, optimize, AnsatzContext, GroundStateRecord};
use qlr_core::SpacePartition;

mod common;

const HERM: [Method; 3] = [Method::Sc, Method::St, Method::StProj];

fn at_reference(rec: &GroundStateRecord) -> GroundStateRecord {
    let mut r = rec.clone();
    r.theta.theta.iter_mut().for_each(|t| *t = 0.0);
    let ctx = AnsatzContext::new(&r.partition, r.rank).unwrap();
    r.state = ctx.state(&r.theta.theta).unwrap();
    r.energy = energy(&r.integrals, &r.partition, r.rank, &r.theta.theta).unwrap();
    r
}

/// Added mixed block and diagnostic against the dense construction.
fn check_against_dense(rec: &GroundStateRecord, label: &str) {
    let or = Oracle::new(rec);
    for m in HERM {
        let plain = build_matrices(MethodId::plain(m), rec).unwrap();
        let herm = hermitify(&plain, rec).unwrap();
        let dense = common::dense_mixed_block(&or, m);
        let (nq, ng) = (plain.n_rotations(), plain.n_excitations);
        assert_eq!((dense.nrows(), dense.ncols()), (ng, nq));
        let mut worst: f64 = 0.0;
        for n in 0..ng {
            for l in 0..nq {
                let added = herm.a[(nq + n, l)] - plain.a[(nq + n, l)];
                worst = worst.max((added - dense[(n, l)]).norm());
            }
        }
        assert!(worst < 1e-10, "{label} {}: mixed block off by {worst:e}", m.name());
        let d = herm.herm_diagnostic.unwrap();
        assert!((d - dense.norm()).abs() < 1e-10, "{label} {}: diagnostic {d} vs {}", m.name(), dense.norm());
        assert!(herm.b.view((nq, 0), (ng, nq)).iter().all(|z| z.norm() == 0.0));
    }
}

#[test]
fn mixed_block_matches_dense_construction() {
    for (name, cas) in [("lih_sto3g", (2, 4)), ("h2o_sto3g", (4, 4))] {
        let (ints, _) = load(name).unwrap();
        let rec = ground_state(&ints, cas, 2).unwrap();
        check_against_dense(&rec, name);
        check_against_dense(&at_reference(&rec), &format!("{name} at theta = 0"));
    }
}

#[test]
fn state_transfer_diagnostic_is_the_dropped_b_block() {
    let (ints, _) = load("lih_sto3g").unwrap();
    let rec = ground_state(&ints, (2, 4), 2).unwrap();
    let plain = build_matrices(MethodId::plain(Method::St), &rec).unwrap();
    let herm = hermitify(&plain, &rec).unwrap();
    let (nq, ng) = (plain.n_rotations(), plain.n_excitations);
    let dropped = plain.b.view((nq, 0), (ng, nq)).norm();
    assert!((dropped - herm.herm_diagnostic.unwrap()).abs() < 1e-10, "{dropped} vs {:?}", herm.herm_diagnostic);
}

#[test]
fn decoupled_fragments_leave_nothing_to_drop() {
    let (ints, _) = common::decoupled_dimer();
    let part = SpacePartition::new(4, 4, (2, 2), Some(&common::DIMER_ORDER)).unwrap();
    let rec = optimize(&ints, &part, 2, &tight_options()).unwrap();
    assert!(rec.converged);
    let (mono, _) = load("h2_sto3g").unwrap();
    // A correlated, B frozen at its closed-shell determinant
    let expect = ground_state(&mono, (2, 2), 2).unwrap().energy + rhf_energy(&mono);
    assert!((rec.energy - expect).abs() < 1e-9, "{} vs {expect}", rec.energy);
    check_against_dense(&rec, "dimer");
    for m in HERM {
        let plain = build_matrices(MethodId::plain(m), &rec).unwrap();
        let herm = hermitify(&plain, &rec).unwrap();
        let d = herm.herm_diagnostic.unwrap();
        assert!(d < 1e-8, "{}: diagnostic {d:e}", m.name());
        let (a, b) = (solve(&plain).unwrap(), solve(&herm).unwrap());
        assert_eq!(a.len(), b.len());
        for (x, y) in a.omega.iter().zip(&b.omega) {
            assert!((x - y).abs() < 1e-6, "{}: {x} vs {y}", m.name());
        }
    }
}

#[test]
fn coupled_water_has_a_visible_diagnostic() {
    let (ints, _) = load("h2o_631g").unwrap();
    let rec = ground_state(&ints, (4, 4), 2).unwrap();
    let plain = build_matrices(MethodId::plain(Method::St), &rec).unwrap();
    let d = hermitify(&plain, &rec).unwrap().herm_diagnostic.unwrap();
    eprintln!("h2o_631g (4,4) HST diagnostic {d:.4}");
    assert!(d > 1e-3 && d < 1.0, "diagnostic {d}");
}

#[test]
fn exact_ground_state_is_left_unchanged() {
    let (ints, _) = load("h2_631g").unwrap();
    let rec = ground_state(&ints, (2, 4), 2).unwrap();
    for m in HERM {
        let plain = build_matrices(MethodId::plain(m), &rec).unwrap();
        let herm = hermitify(&plain, &rec).unwrap();
        assert!((&herm.a - &plain.a).iter().all(|z| z.norm() < 1e-8), "{}: A changed", m.name());
        assert!((&herm.b - &plain.b).iter().all(|z| z.norm() < 1e-8), "{}: B changed", m.name());
        assert!(herm.herm_diagnostic.unwrap() < 1e-8);
    }
}
