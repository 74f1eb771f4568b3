mod common;

use common::*;
use feupdate::model::{
    assemble, cost, solve_modes, BeamElement, BeamStructure, Boundary, CostWeights, DofLayout, ModalData,
    SystemMatrices,
};
use feupdate::scenario::HGeometry;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pencil(k: DMatrix<f64>, m: DMatrix<f64>) -> SystemMatrices {
    let n = k.nrows();
    SystemMatrices {
        mass: m,
        stiffness: k,
        dof_count: n,
        free_dofs: (0..n).collect(),
    }
}

#[test]
fn oracle_reproduces_hand_roots() {
    let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]);
    let m = DMatrix::identity(2, 2);
    let l = oracle_eigenvalues(&k, &m);
    let s5 = 5f64.sqrt();
    assert!((l[0] - (3.0 - s5) / 2.0).abs() < 1e-13);
    assert!((l[1] - (3.0 + s5) / 2.0).abs() < 1e-13);
}

#[test]
fn eigensolver_matches_characteristic_polynomial_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..40 {
        let n = 1 + case % 6;
        let (k, m) = random_pencil(&mut rng, n);
        let expected = oracle_eigenvalues(&k, &m);
        let modes = solve_modes(&pencil(k.clone(), m.clone()), n).unwrap();
        for (i, &lambda) in expected.iter().enumerate() {
            let w2 = modes.frequencies[i].powi(2);
            assert!(
                (w2 - lambda).abs() <= 1e-8 * lambda,
                "case {case} mode {i}: {w2} vs {lambda}"
            );
            let v = null_vector(&k, &m, lambda);
            let phi: Vec<f64> = modes.shapes.column(i).iter().copied().collect();
            let mac = mac_vectors(&phi, v.as_slice());
            assert!((mac - 1.0).abs() < 1e-8, "case {case} mode {i}: MAC {mac}");
        }
    }
}

fn strip(n_elements: usize, boundary: impl Fn(&BeamStructure) -> Boundary) -> (BeamStructure, f64, f64) {
    let (b, h) = (0.05, 0.01);
    let template = BeamElement {
        node_a: 0,
        node_b: 1,
        area: b * h,
        second_moment: b * h * h * h / 12.0,
        density: 2700.0,
        modulus: 7e10,
        torsion_constant: 0.0,
        polar_moment: 0.0,
        poisson_ratio: 0.0,
    };
    let free = BeamStructure::uniform_beam(1.0, n_elements, template, Boundary::FreeFree, DofLayout::Bending).unwrap();
    let s = BeamStructure {
        boundary: boundary(&free),
        ..free
    };
    (
        s,
        template.modulus * template.second_moment,
        template.density * template.area,
    )
}

#[test]
fn cantilever_matches_closed_form() {
    let (s, ei, rho_a) = strip(20, |s| Boundary::Constrained(vec![s.dof(0, 0), s.dof(0, 1)]));
    let modes = solve_modes(&assemble(&s, &s.nominal_moduli()).unwrap(), 2).unwrap();
    assert!(modes.rigid_body.iter().all(|r| !r));
    for (i, bl) in CANTILEVER_BETA_L.iter().enumerate() {
        let exact = euler_bernoulli_omega(*bl, 1.0, ei, rho_a);
        assert!((modes.frequencies[i] - exact).abs() / exact < 0.01);
    }
}

#[test]
fn free_free_matches_closed_form() {
    let (s, ei, rho_a) = strip(20, |_| Boundary::FreeFree);
    let modes = solve_modes(&assemble(&s, &s.nominal_moduli()).unwrap(), 4).unwrap();
    assert_eq!(modes.rigid_body, vec![true, true, false, false]);
    for (i, bl) in FREE_FREE_BETA_L.iter().enumerate() {
        let exact = euler_bernoulli_omega(*bl, 1.0, ei, rho_a);
        assert!((modes.frequencies[i + 2] - exact).abs() / exact < 0.01);
    }
}

fn measured(freqs: &[f64], shapes: DMatrix<f64>) -> ModalData {
    let n = freqs.len();
    ModalData {
        frequencies: freqs.to_vec(),
        coordinates: (0..shapes.nrows()).collect(),
        shapes,
        damping: vec![0.0; n],
        rigid_body: vec![false; n],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_modes_satisfy_residual_and_orthogonality(
        moduli in proptest::collection::vec(6e10f64..8e10, 12),
    ) {
        let s = HGeometry::default().build(7e10).unwrap();
        let k = assemble(&s, &moduli).unwrap();
        let modes = solve_modes(&k, 11).unwrap();
        let phi = &modes.shapes;
        let gram = phi.transpose() * &k.mass * phi;
        prop_assert!((gram - DMatrix::identity(11, 11)).amax() < 1e-8);
        for i in 0..11 {
            if modes.rigid_body[i] {
                continue;
            }
            let v: DVector<f64> = phi.column(i).into();
            let kv = &k.stiffness * &v;
            let r = (&kv - &k.mass * &v * modes.frequencies[i].powi(2)).norm() / kv.norm();
            prop_assert!(r <= 1e-8, "mode {i}: residual {r}");
        }
    }

    #[test]
    fn cost_ignores_shape_scale_and_grows_with_frequency_error(
        scales in proptest::collection::vec(prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], 3),
        shift in 0.01f64..0.5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shapes = DMatrix::from_fn(6, 3, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let noisy = &shapes + DMatrix::from_fn(6, 3, |_, _| rand::Rng::random_range(&mut rng, -0.1..0.1));
        let meas = measured(&[10.0, 20.0, 30.0], shapes);
        let w = CostWeights::new(vec![1.0, 2.0, 0.5], 0.75).unwrap();
        let calc = measured(&[11.0, 19.0, 30.5], noisy.clone());
        let mut scaled = noisy;
        for (j, s) in scales.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        let base = cost(&calc, &meas, &w).unwrap();
        let rescaled = cost(&measured(&[11.0, 19.0, 30.5], scaled), &meas, &w).unwrap();
        prop_assert!((base - rescaled).abs() <= 1e-12 * base.max(1.0));
        let mut worse = calc.clone();
        worse.frequencies[1] -= shift;
        prop_assert!(cost(&worse, &meas, &w).unwrap() > base);
    }
}
