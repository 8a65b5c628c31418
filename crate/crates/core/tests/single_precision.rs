use genrob_core::discrimination::{achieving_ensemble, optimal_measurement};
use genrob_core::freesets::ConvexFreeSet;
use genrob_core::qcore::{random_state, seeded_rng, tensor_power, DensityMatrix};
use genrob_core::robustness::robustness_convex;
use genrob_core::witness::{build_multicopy_operator, shifted_S};
use num_complex::Complex;

#[test]
fn plus_state_robustness_in_f32() {
    let h = std::f32::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::pure(&[Complex::new(h, 0.0f32), Complex::new(h, 0.0)]).unwrap();
    let z = ConvexFreeSet::<f32>::incoherent_computational("z", 2).unwrap();
    let cert = robustness_convex(&plus, &z).unwrap();
    assert!((cert.value - 1.0).abs() < 1e-3, "{}", cert.value);
}

#[test]
fn two_copy_contract_in_f32() {
    let mut rng = seeded_rng(9);
    let rho = random_state::<f32, _>(&mut rng, 2);
    let w = build_multicopy_operator(&rho, 0.5f32, 2).unwrap();
    for _ in 0..10 {
        let eta = random_state::<f32, _>(&mut rng, 2);
        let lhs = w.trace_product(&tensor_power(eta.as_hermitian(), 2).unwrap());
        let rhs = shifted_S(&rho, 0.5, &eta, 2).unwrap();
        assert!((lhs - rhs).abs() < 1e-3 * (1.0 + rhs.abs()));
    }
}

#[test]
fn achieving_ensemble_in_f32() {
    let mut rng = seeded_rng(4);
    let x = random_state::<f32, _>(&mut rng, 2).into_hermitian();
    let e = achieving_ensemble(&x, 100).unwrap();
    let eta = random_state::<f32, _>(&mut rng, 2);
    let v = optimal_measurement(&e, eta.as_hermitian()).unwrap().value;
    let a = x.scale(1.0 / x.operator_norm().unwrap());
    assert!((v - (0.99 * a.trace_product(eta.as_hermitian()) + 0.01)).abs() < 1e-5);
}
