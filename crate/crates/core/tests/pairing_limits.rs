use bksreg_core::bks::{
    iterated_limit, pairing_limit, pairing_sequence, regularized_pairing, PairingQuadrature, PairingSchedule, PairingTolerance,
};
use bksreg_core::schrodinger::{SchrodingerState, StateFamily};
use bksreg_core::UniformGrid;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn hermite(k: usize) -> SchrodingerState<f64> {
    SchrodingerState::from_family(&StateFamily::Hermite { k }, UniformGrid::new(-10.0, 10.0, 256), 1.0).unwrap()
}

fn cheap() -> PairingQuadrature<f64> {
    PairingQuadrature { h_nodes: 12, theta_nodes: 8, ..Default::default() }
}

#[test]
fn iterated_and_joint_limits_agree() {
    let psi = hermite(1);
    let schedule = PairingSchedule::default();
    let quad = PairingQuadrature::default();
    let joint = pairing_limit(&psi, 1, &schedule, &quad, &PairingTolerance::default()).unwrap().value;
    let iterated = iterated_limit(&psi, 1, &schedule, &quad).unwrap();
    assert!((joint - iterated).norm() <= 1e-4 * joint.norm(), "{joint} vs {iterated}");
}

#[test]
fn combination_orthogonal_to_the_leaf() {
    let (a, b) = (hermite(0), hermite(2));
    let m = 0;
    let schedule = PairingSchedule::default();
    let quad = PairingQuadrature::default();
    let tol = PairingTolerance::default();
    let ca = pairing_limit(&a, m, &schedule, &quad, &tol).unwrap().value;
    let cb = pairing_limit(&b, m, &schedule, &quad, &tol).unwrap().value;
    let psi = a.combine(cb.conj(), &b, -ca.conj()).unwrap();
    // the limit is zero while the finite-time values are O(1e-3): the Neville
    // error estimate of a vanishing limit is not useful, so read the value
    let res = pairing_sequence(&psi, m, &schedule, &quad, &tol).unwrap();
    assert!(res.value.norm() <= 1e-6, "{}", res.diagnostics());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pairing_is_antilinear(re in -3.0..3.0f64, im in -3.0..3.0f64, m in 0usize..3) {
        let psi = hermite(1);
        let lambda = C::new(re, im);
        let base = regularized_pairing(&psi, m, 0.05, 20.0, &cheap()).unwrap();
        let scaled = regularized_pairing(&psi.scaled(lambda), m, 0.05, 20.0, &cheap()).unwrap();
        prop_assert!((scaled - lambda.conj() * base).norm() <= 1e-12 * (1.0 + scaled.norm()));
    }
}
