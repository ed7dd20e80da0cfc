use nalgebra::DMatrix;
use qlr::checks::ground_state;
use qlr::fixtures::load;
use qlr::oracle::{clusters, compare, fci, Oracle};
use qlr_core::qlr::solve::isotropic;
use qlr_core::qlr::{build_matrices, oscillator_strengths, polarizability, property_gradient, solve, Method, MethodId};
use qlr_core::vqe::casci;
use qlr_core::{OneElectronOperatorSet, SpacePartition};

fn dipoles(ops: &OneElectronOperatorSet) -> [DMatrix<f64>; 3] {
    ["x", "y", "z"].map(|l| ops.get_or_zero(l))
}

#[test]
fn all_active_h2_reaches_fci() {
    let (ints, ops) = load("h2_631g").unwrap();
    let exact = fci(&ints, &dipoles(&ops));
    let part = SpacePartition::new(4, 2, (2, 4), None).unwrap();
    let e_cas = casci(&ints, &part).unwrap()[0].0;
    assert!((e_cas - exact.energies[0]).abs() < 1e-10);
    let rec = ground_state(&ints, (2, 4), 2).unwrap();
    assert!((rec.energy - exact.energies[0]).abs() < 1e-9, "{} vs {}", rec.energy, exact.energies[0]);
}

#[test]
fn naive_response_reproduces_fci_spectrum_and_polarizability() {
    let (ints, ops) = load("h2_631g").unwrap();
    let exact = fci(&ints, &dipoles(&ops));
    let rec = ground_state(&ints, (2, 4), 2).unwrap();
    let id = MethodId::plain(Method::Naive);
    let sol = solve(&build_matrices(id, &rec).unwrap()).unwrap();
    let g = ["x", "y", "z"].map(|l| property_gradient(id, &rec, &ops, l).unwrap());
    let f = oscillator_strengths(&sol, &g);
    let e0 = exact.energies[0];
    let gaps: Vec<f64> = exact.energies[1..].iter().map(|e| e - e0).collect();
    let fe: Vec<f64> = gaps.iter().zip(&exact.dipole_sq[1..]).map(|(w, d)| 2.0 / 3.0 * w * d).collect();
    let (mine, theirs) = (clusters(&sol.omega, &f), clusters(&gaps, &fe));
    assert_eq!(mine.len(), theirs.len());
    for (a, b) in mine.iter().zip(&theirs) {
        assert!((a.0 - b.0).abs() < 1e-8, "omega {} vs {}", a.0, b.0);
        assert!((a.1 - b.1).abs() < 1e-8, "f {} vs {}", a.1, b.1);
    }
    let sos: f64 = gaps.iter().zip(&exact.dipole_sq[1..]).map(|(w, d)| 2.0 * d / w).sum::<f64>() / 3.0;
    let alpha = isotropic(&polarizability(&sol, &g, 0.0).unwrap());
    assert!((alpha - sos).abs() < 1e-7 * sos.abs().max(1.0), "{alpha} vs {sos}");
}

#[test]
fn perpendicular_dipole_of_h2_has_no_gradient() {
    // only s functions on the bond axis: x and y couple nothing
    let (ints, ops) = load("h2_631g").unwrap();
    let rec = ground_state(&ints, (2, 2), 2).unwrap();
    for m in Method::ALL {
        let id = MethodId::plain(m);
        for l in ["x", "y"] {
            let g = property_gradient(id, &rec, &ops, l).unwrap();
            assert!(g.stacked().iter().all(|z| z.norm() < 1e-9), "{} {l}", m.name());
        }
        let z_only = ["x", "y", "x"].map(|l| property_gradient(id, &rec, &ops, l).unwrap());
        let sol = solve(&build_matrices(id, &rec).unwrap()).unwrap();
        assert!(oscillator_strengths(&sol, &z_only).iter().all(|f| f.abs() < 1e-15), "{}", m.name());
    }
}

#[test]
fn dense_oracle_agrees_on_small_fixtures() {
    for (name, cas) in [("h2_631g", (2, 2)), ("lih_sto3g", (2, 4))] {
        let (ints, ops) = load(name).unwrap();
        let rec = ground_state(&ints, cas, 2).unwrap();
        let or = Oracle::new(&rec);
        assert!((or.embedded_record_state() - &or.psi).norm() < 1e-10, "{name}: state embedding");
        assert!((or.psi.dot(&or.hpsi) - rec.energy).abs() < 1e-10, "{name}: energy");
        for m in Method::ALL {
            let c = compare(&or, m, &ops).unwrap();
            assert!(c.worst() < 1e-9, "{name} {}: {c:?}", m.name());
        }
    }
}
