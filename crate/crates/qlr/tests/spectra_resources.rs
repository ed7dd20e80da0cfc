use proptest::prelude::*;
use qlr::resources::{resource_rows, resource_table};
use qlr::spectrum::{parse_broadening, spectrum, SpectrumError, SpectrumOptions};
use qlr_core::qlr::solve::{broadened_spectrum, Broadening};
use qlr_core::qlr::{Method, MethodId};

const KINDS: [Broadening; 2] = [Broadening::Lorentzian, Broadening::Gaussian];

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

#[test]
fn width_is_full_width_at_half_maximum() {
    for kind in KINDS {
        let v = broadened_spectrum(&[10.0], &[1.0], 0.4, kind, &[10.0, 10.2, 9.8]);
        assert!((v[1] / v[0] - 0.5).abs() < 1e-14 && (v[2] / v[0] - 0.5).abs() < 1e-14, "{kind:?}: {v:?}");
    }
}

#[test]
fn gaussian_line_has_unit_area() {
    let opts = SpectrumOptions { kind: Broadening::Gaussian, width_ev: 0.3, points: 4001 };
    let c = spectrum(&[(12.0, 1.0)], &opts).unwrap();
    let area = trapezoid(&c.energy_ev, &c.intensity);
    assert!((area - 1.0).abs() < 1e-2, "area {area}");
}

#[test]
fn single_peak_maximum_sits_on_the_excitation() {
    for kind in KINDS {
        let opts = SpectrumOptions { kind, width_ev: 0.2, points: 2000 };
        let c = spectrum(&[(8.765, 0.4)], &opts).unwrap();
        let step = c.energy_ev[1] - c.energy_ev[0];
        let imax = (0..c.intensity.len()).max_by(|&a, &b| c.intensity[a].total_cmp(&c.intensity[b])).unwrap();
        assert!((c.energy_ev[imax] - 8.765).abs() <= step, "{kind:?}: max at {}", c.energy_ev[imax]);
        assert!(c.energy_ev.windows(2).all(|w| w[1] > w[0]));
        assert!((c.energy_ev[0] - (8.765 - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn dark_states_give_a_flat_spectrum() {
    let c = spectrum(&[(3.0, 0.0), (5.0, 0.0)], &SpectrumOptions::default()).unwrap();
    assert!(c.intensity.iter().all(|i| *i == 0.0));
    assert_eq!(c.to_csv().lines().next(), Some("energy_ev,intensity"));
}

#[test]
fn bad_spectrum_inputs_are_rejected() {
    assert_eq!(spectrum(&[], &SpectrumOptions::default()), Err(SpectrumError::NoPeaks));
    let bad = SpectrumOptions { width_ev: 0.0, ..Default::default() };
    assert!(matches!(spectrum(&[(1.0, 1.0)], &bad), Err(SpectrumError::Width(_))));
    let bad = SpectrumOptions { points: 1, ..Default::default() };
    assert!(matches!(spectrum(&[(1.0, 1.0)], &bad), Err(SpectrumError::Points(1))));
    assert!(parse_broadening("voigt").is_err());
    assert_eq!(parse_broadening("Gaussian"), Ok(Broadening::Gaussian));
}

proptest! {
    #[test]
    fn broadening_is_linear(e1 in 1.0f64..20.0, e2 in 1.0f64..20.0, f1 in 0.0f64..2.0, f2 in 0.0f64..2.0, w in 0.05f64..1.0) {
        let grid: Vec<f64> = (0..200).map(|i| 0.1 * i as f64).collect();
        for kind in KINDS {
            let both = broadened_spectrum(&[e1, e2], &[f1, f2], w, kind, &grid);
            let a = broadened_spectrum(&[e1], &[f1], w, kind, &grid);
            let b = broadened_spectrum(&[e2], &[f2], w, kind, &grid);
            for k in 0..grid.len() {
                prop_assert!((both[k] - a[k] - b[k]).abs() <= 1e-12 * (1.0 + both[k].abs()));
                prop_assert!(both[k] >= 0.0);
            }
        }
    }
}

#[test]
fn resource_table_lists_every_method() {
    let ids = Method::ALL.map(MethodId::plain);
    let rows = resource_rows(&ids);
    let terms: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(terms, ["18", "9", "7", "10", "8", "3", "7", "4"]);
    let adjusted: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(adjusted, ["-", "herm: 16", "herm: 10", "-", "decomp: 24", "decomp: 9", "-", "herm: 8"]);
    let text = resource_table(&ids);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().next().unwrap().starts_with("method"));
    let herm: Vec<MethodId> = [Method::Sc, Method::St, Method::StProj].map(|m| MethodId::new(m, true).unwrap()).to_vec();
    let used: Vec<String> = resource_rows(&herm).into_iter().map(|r| r[4].clone()).collect();
    assert_eq!(used, ["16", "10", "8"]);
}
