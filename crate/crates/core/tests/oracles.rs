//! Independent checks of the closed forms against brute-force numerics.

use std::sync::OnceLock;

use num_complex::Complex64;
use portq::linalg::{self, CMatrix};
use portq::matching;
use portq::momwire::{self, LossModel};
use portq::netparam::{
    self, DataFormat, FrequencyGrid, FrequencyUnit, MultiportNetwork, ParamKind,
};
use portq::portreduce::{PortExcitation, PortReduction};
use portq::qcore;
use portq::scenario::{self, AntennaModel, DipoleDesign, Feeding, MomModel, SweepSpec};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real(v: &[f64]) -> PortExcitation {
    PortExcitation::from_real(v).unwrap()
}

fn rel_matrix(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::max_abs(&(a - b)) / linalg::max_abs(b)
}

struct Pair {
    omega0: f64,
    y0: CMatrix,
    dy0: CMatrix,
}

/// Two dipoles at lambda/8, assembled once for the property tests.
fn pair() -> &'static Pair {
    static CELL: OnceLock<Pair> = OnceLock::new();
    CELL.get_or_init(|| {
        let d = DipoleDesign::default();
        let model = MomModel::new(d.row(2, 0.125).unwrap());
        let p = model.point(d.omega0(), &real(&[1.0, 1.0])).unwrap();
        Pair {
            omega0: d.omega0(),
            y0: p.y0,
            dy0: p.dy0,
        }
    })
}

#[test]
fn admittance_derivative_rejects_hermitian_adjoint() {
    let d = DipoleDesign::default();
    let geometry = d.row(2, 0.25).unwrap();
    let w = 1.03 * d.omega0();
    let red = PortReduction::from_geometry(&geometry);
    let loss = LossModel::lossless();
    let system = momwire::assemble(&geometry, w).unwrap();
    let dz = momwire::impedance_derivative(&geometry, w).unwrap();
    let good = red.port_admittance_derivative(&system, &dz, &loss).unwrap();
    let ydp = red.port_currents_basis(&system, &loss).unwrap();
    let bad = -(ydp.adjoint() * &dz * &ydp);

    let y = |w: f64| {
        let s = momwire::assemble(&geometry, w).unwrap();
        red.port_admittance(&s, &loss).unwrap()
    };
    let h = 1e-4 * w;
    let fd = |h: f64| (y(w + h) - y(w - h)) / c(2.0 * h, 0.0);
    let oracle = (fd(0.5 * h) * c(4.0, 0.0) - fd(h)) / c(3.0, 0.0);
    assert!(rel_matrix(&good, &oracle) < 1e-6);
    assert!(rel_matrix(&bad, &oracle) > 1e-2);
}

#[test]
fn admittance_is_reciprocal() {
    let d = DipoleDesign::default();
    let model = MomModel::new(d.row(5, 0.3).unwrap());
    let (y0, _) = model.admittance(d.omega0()).unwrap();
    assert!(linalg::symmetry_defect(&y0) < 1e-12);
}

#[test]
fn frequency_scaling_of_port_admittance() {
    let slow = DipoleDesign::default();
    let fast = DipoleDesign {
        f0: 3.0 * slow.f0,
        ..slow
    };
    let v = real(&[1.0, -1.0]);
    let a = MomModel::new(slow.row(2, 0.25).unwrap())
        .point(slow.omega0(), &v)
        .unwrap();
    let b = MomModel::new(fast.row(2, 0.25).unwrap())
        .point(fast.omega0(), &v)
        .unwrap();
    assert!(rel_matrix(&b.y0, &a.y0) < 1e-9);
    assert!(rel_matrix(&(b.dy0 * c(3.0, 0.0)), &a.dy0) < 1e-6);
}

#[test]
fn matched_second_term_vanishes() {
    let d = DipoleDesign::default();
    let model = MomModel::new(d.row(2, 0.75).unwrap());
    let w0 = d.omega0();
    for f in [[1.0, 1.0], [1.0, -1.0]] {
        let v = real(&f);
        let p = model.point(w0, &v).unwrap();
        let ddy0 = model.second_derivative(w0).unwrap();
        let m = matching::synthesize_match(&p.y0, &v, w0).unwrap();
        let with = qcore::eta_second_derivative(&p.y0, &p.dy0, Some(&ddy0), &m, &v, w0).unwrap();
        let without = qcore::eta_second_derivative(&p.y0, &p.dy0, None, &m, &v, w0).unwrap();
        assert!(
            ((with - without) / without).abs() < 1e-10,
            "{with} vs {without}"
        );
    }
}

#[test]
fn unmatched_state_needs_second_derivative() {
    let p = pair();
    let v = real(&[1.0, 1.0]);
    let m = matching::MatchingState::new(vec![50.0, 50.0], vec![0.0, 0.0], p.omega0).unwrap();
    let err = qcore::eta_second_derivative(&p.y0, &p.dy0, None, &m, &v, p.omega0);
    assert!(err.is_err());
    assert!(matches!(
        qcore::q_tarc(&p.y0, &p.dy0, &m, &v, p.omega0),
        Err(portq::Error::Unmatched { .. })
    ));
}

#[test]
fn lossless_approximation_tracks_sweep() {
    let d = DipoleDesign::default();
    let model = MomModel::new(d.row(2, 0.125).unwrap());
    let sweep = SweepSpec::new(0.01, 41).unwrap();
    let a = scenario::analyze_point(
        "lossless",
        &model,
        &real(&[1.0, 1.0]),
        d.omega0(),
        0.2,
        &sweep,
    )
    .unwrap();
    let centre = a.curve.iter().find(|s| s.omega == d.omega0()).unwrap();
    assert!(centre.tarc < 1e-10);
    for s in &a.curve {
        assert!((s.tarc - s.tarc_approx).abs() < 0.02, "{s:?}");
    }
}

#[test]
fn series_rlc_q_from_touchstone() {
    for (r, q) in [(10.0, 5.0), (50.0, 20.0), (75.0, 60.0)] {
        let f0 = 2.4e9;
        let w0 = 2.0 * std::f64::consts::PI * f0;
        let l = q * r / w0;
        let cap = 1.0 / (w0 * w0 * l);
        let grid = FrequencyGrid::from_frequencies(
            scenario::linspace(0.8 * f0 / 1e9, 1.2 * f0 / 1e9, 801),
            FrequencyUnit::GHz,
        )
        .unwrap();
        let samples = grid
            .omegas()
            .iter()
            .map(|w| CMatrix::from_element(1, 1, c(r, w * l - 1.0 / (w * cap))))
            .collect();
        let net = MultiportNetwork::new(grid, ParamKind::Impedance, vec![50.0], samples).unwrap();
        let text = net.to_touchstone(DataFormat::RealImag).unwrap();
        let model = scenario::NetworkModel::from_touchstone(&text, Some(1)).unwrap();
        let a = scenario::cmd_analyze(
            &model,
            &Feeding::Custom(vec![c(1.0, 0.0)]),
            f0,
            0.2,
            &SweepSpec::default(),
        )
        .unwrap();
        assert!(
            (a.report.q_tarc - q).abs() / q < 5e-3,
            "Q {q}: {}",
            a.report.q_tarc
        );
        let qz = a.report.q_z.unwrap();
        assert!((qz - a.report.q_tarc).abs() / qz < 1e-9);
    }
}

#[test]
fn touchstone_formats_agree() {
    let d = DipoleDesign::default();
    let model = MomModel::new(d.row(2, 0.25).unwrap());
    let omegas = SweepSpec::new(0.1, 21).unwrap().omegas(d.omega0());
    let net = model.network(&omegas).unwrap().to_scattering().unwrap();
    let reference = net.to_admittance().unwrap();
    for format in [
        DataFormat::RealImag,
        DataFormat::MagAngle,
        DataFormat::DbAngle,
    ] {
        let text = net.to_touchstone(format).unwrap();
        let back = netparam::parse_touchstone(&text, Some(2))
            .unwrap()
            .to_admittance()
            .unwrap();
        for (a, b) in back.samples().iter().zip(reference.samples()) {
            assert!(rel_matrix(a, b) < 1e-6, "{format:?}");
        }
    }
}

fn excitation(values: &[(f64, f64)]) -> PortExcitation {
    let v: Vec<Complex64> = values.iter().map(|&(re, im)| c(re, im)).collect();
    PortExcitation::from_complex(&v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_is_invariant_to_excitation_scale(
        v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
        scale in (0.01f64..100.0, 0.0f64..std::f64::consts::TAU),
    ) {
        let p = pair();
        let v = excitation(&v);
        prop_assume!(v.vector().norm() > 0.1);
        let Ok(m) = matching::synthesize_match(&p.y0, &v, p.omega0) else {
            return Err(TestCaseError::reject("no passive match"));
        };
        let q = qcore::q_tarc(&p.y0, &p.dy0, &m, &v, p.omega0).unwrap();
        let s = Complex64::from_polar(scale.0, scale.1);
        let vs = v.scaled(s);
        let ms = matching::synthesize_match(&p.y0, &vs, p.omega0).unwrap();
        let qs = qcore::q_tarc(&p.y0, &p.dy0, &ms, &vs, p.omega0).unwrap();
        prop_assert!((q - qs).abs() / q < 1e-9);
        let zm = qcore::q_zm(&p.y0, &p.dy0, &v, p.omega0).unwrap();
        let zms = qcore::q_zm(&p.y0, &p.dy0, &vs, p.omega0).unwrap();
        prop_assert!((zm - zms).abs() / zm < 1e-9);
    }

    #[test]
    fn efficiency_curvature_is_nonpositive_and_bounds_zm(
        v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
    ) {
        let p = pair();
        let v = excitation(&v);
        prop_assume!(v.vector().norm() > 0.1);
        let Ok(m) = matching::synthesize_match(&p.y0, &v, p.omega0) else {
            return Err(TestCaseError::reject("no passive match"));
        };
        let eta2 = qcore::eta_second_derivative(&p.y0, &p.dy0, None, &m, &v, p.omega0).unwrap();
        prop_assert!(eta2 <= 0.0);
        let q = qcore::q_tarc(&p.y0, &p.dy0, &m, &v, p.omega0).unwrap();
        let from_eta = qcore::q_from_eta_second_derivative(eta2, p.omega0);
        prop_assert!((q - from_eta).abs() / q < 1e-9);
        let zm = qcore::q_zm(&p.y0, &p.dy0, &v, p.omega0).unwrap();
        prop_assert!(zm <= q * (1.0 + 1e-9));
    }

    #[test]
    fn matched_tarc_is_zero_at_resonance(
        v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2),
    ) {
        let p = pair();
        let v = excitation(&v);
        prop_assume!(v.vector().norm() > 0.1);
        let Ok(m) = matching::synthesize_match(&p.y0, &v, p.omega0) else {
            return Err(TestCaseError::reject("no passive match"));
        };
        let waves = matching::waves(&p.y0, &m, p.omega0, &v).unwrap();
        prop_assert!(matching::tarc(&waves).unwrap() < 1e-10);
    }

    #[test]
    fn predicted_bandwidth_inverts(q in 0.5f64..500.0, gamma in 0.01f64..0.9) {
        let f = qcore::fbw_predict(q, gamma).unwrap();
        let back = qcore::q_fbw(f, gamma).unwrap();
        prop_assert!((back - q).abs() / q < 1e-12);
    }

    #[test]
    fn lossy_approximation_reduces_to_lossless(q in 0.5f64..100.0, delta in -0.05f64..0.05) {
        let w0 = 1e9;
        let w = w0 * (1.0 + delta);
        let lossless = qcore::tarc_approx(q, w0, w, 1.0);
        let almost = qcore::tarc_approx(q, w0, w, 1.0 - 1e-14);
        prop_assert!((lossless - almost).abs() < 1e-6);
        prop_assert!(qcore::tarc_approx(q, w0, w, 0.9) >= 0.9f64.sqrt() * lossless.min(1.0) - 1e-12);
    }
}
