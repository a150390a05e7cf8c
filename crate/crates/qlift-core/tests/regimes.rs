//! Boundary and size regimes beyond the acceptance fleet: larger chains,
//! strictness margins pushed toward 1, and the |q| hypothesis boundary.

use qlift_core::lifting::*;
use qlift_core::linalg::*;
use qlift_core::qalgebra::*;
use qlift_core::Error;

#[test]
fn engines_hold_at_dim_six_depth_eight() {
    let tol = Tolerances::default();
    for seed in [0u64, 1, 2] {
        let s = random_qpair(6, seed, 0.85, &tol).unwrap();
        let iso = isometric_lift_q(&s.pair, 8, &tol).unwrap();
        let coiso = coiso_lift_q(&s.pair, 8, &tol).unwrap();
        assert!(iso.passed(), "iso worst {:.3e}", iso.worst_residual());
        assert!(coiso.passed(), "coiso worst {:.3e}", coiso.worst_residual());
    }
}

#[test]
fn coextension_degrades_gracefully_near_the_strictness_boundary() {
    let tol = Tolerances::default();
    let mut last_cond = 0.0;
    for t2_norm in [0.99, 0.999, 0.99999] {
        let s = random_qpair(3, 5, t2_norm, &tol).unwrap();
        let triple = q_coextension(&s.pair, 4, 4, &tol).unwrap();
        assert!(
            triple.certificate.passed(),
            "norm {t2_norm}: worst {:.3e}",
            triple.certificate.worst_residual()
        );
        // The defect inverse gets worse as the norm approaches 1, and the
        // certificate records it.
        assert!(triple.cond_defect > last_cond);
        last_cond = triple.cond_defect;
    }
}

#[test]
fn q_range_boundary_is_enforced() {
    let tol = Tolerances::default();
    // Rescaled T1 has norm 1, so |q| = 2 violates |q| ||T1|| <= 1 even
    // though the pair itself q-commutes.
    let ex = example_pair_jordan(cr(1.0), cr(0.5), cr(0.25), cr(2.0), &tol).unwrap();
    assert!(matches!(
        isometric_lift_q(&ex.pair, 4, &tol),
        Err(Error::QOutOfRange { .. })
    ));

    // |q| = 1/||T1|| exactly is admissible.
    let ex = example_pair_jordan(cr(1.0), cr(0.5), cr(0.25), c(0.0, 1.0), &tol).unwrap();
    let lift = isometric_lift_q(&ex.pair, 6, &tol).unwrap();
    assert!(lift.passed());
}

#[test]
fn structured_pairs_certify_exactly() {
    let tol = Tolerances::default();
    // The shift model is exact in floating point, and so are its lifts.
    let hp = hardy_pair_truncated(c(0.6, 0.8), 5, &tol).unwrap();
    for lift in [
        isometric_lift_q(&hp, 6, &tol).unwrap(),
        coiso_lift_q(&hp, 6, &tol).unwrap(),
        qcommutant_lift(&hp, 6, &tol).unwrap(),
        unitary_q_lift(&hp, 5, &tol).unwrap(),
    ] {
        assert!(lift.worst_residual() <= 1e-14);
    }
}
