use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vakonomic::linalg::{Matrix, Svd};
use vakonomic::submanifold::*;
use vakonomic::{builtin, BUILTIN_NAMES};

fn chart(name: &str, kind: SubmanifoldKind, seed: u64, lambda: Option<&[f64]>) -> (vakonomic::SystemSpec, SubmanifoldChart<f64>) {
    let spec = builtin(name).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = SubmanifoldChart::random(&spec, kind, &mut rng, lambda).unwrap();
    (spec, chart)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vakonomic_pullback_vanishes(seed in any::<u64>(), index in 0usize..3) {
        let (spec, c) = chart(BUILTIN_NAMES[index], SubmanifoldKind::Vakonomic, seed, None);
        let pb = pullback_matrix(&spec, &c).unwrap();
        prop_assert!(pb.max_abs <= 1e-6, "{}", pb.max_abs);
        prop_assert!(pb.antisymmetry <= 1e-12);
    }

    #[test]
    fn nonholonomic_obstruction_is_linear_in_multipliers(seed in any::<u64>(), index in 0usize..3) {
        let name = BUILTIN_NAMES[index];
        let (spec, c) = chart(name, SubmanifoldKind::Nonholonomic, seed, None);
        let doubled: Vec<f64> = c.lambda().iter().map(|l| 2.0 * l).collect();
        let c2 = SubmanifoldChart::new(&spec, SubmanifoldKind::Nonholonomic, c.q().to_vec(), c.qdot().to_vec(), doubled).unwrap();
        let (a, b) = (pullback_matrix(&spec, &c).unwrap(), pullback_matrix(&spec, &c2).unwrap());
        let rel = (b.obstruction_max_abs - 2.0 * a.obstruction_max_abs).abs() / b.obstruction_max_abs.max(1e-300);
        prop_assert!(rel <= 1e-6, "{name}: {} vs {}", a.obstruction_max_abs, b.obstruction_max_abs);
        prop_assert!(a.analytic_deviation <= 1e-4);
    }

    #[test]
    fn nonholonomic_pullback_vanishes_without_multipliers(seed in any::<u64>(), index in 0usize..3) {
        let name = BUILTIN_NAMES[index];
        let m = builtin(name).unwrap().m();
        let zero = vec![0.0; m];
        let (spec, c) = chart(name, SubmanifoldKind::Nonholonomic, seed, Some(&zero));
        prop_assert!(pullback_matrix(&spec, &c).unwrap().obstruction_max_abs <= 1e-6);
    }

    #[test]
    fn tangent_vectors_are_independent(seed in any::<u64>(), index in 0usize..3, nonh in any::<bool>()) {
        let kind = if nonh { SubmanifoldKind::Nonholonomic } else { SubmanifoldKind::Vakonomic };
        let (spec, c) = chart(BUILTIN_NAMES[index], kind, seed, None);
        let basis = tangent_basis(&spec, &c).unwrap();
        prop_assert_eq!(basis.vectors.len(), 2 * spec.n());
        let rows: Vec<Vec<f64>> = basis.vectors.iter().map(|v| v.to_flat()).collect();
        let svd = Svd::new(&Matrix::from_columns(&rows));
        let (largest, smallest) = (svd.sigma[0], svd.sigma[svd.sigma.len() - 1]);
        prop_assert!(smallest > 1e-8 * largest, "{:?}", svd.sigma);
    }
}

#[test]
fn particle_embedding_reference() {
    let spec = builtin("particle").unwrap();
    let c =
        SubmanifoldChart::new(&spec, SubmanifoldKind::Vakonomic, vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![2.0]).unwrap();
    let x = embed(&spec, &c).unwrap();
    assert_eq!(x.p(), &[-1.0, 0.0, 3.0]);
    assert_eq!(x.dq(), &[1.0, 0.0, 1.0]);
    assert_eq!(x.dp(), &[0.0, -2.0, 0.0]);
    assert_eq!(tangent_basis(&spec, &c).unwrap().vectors.len(), 6);
}

#[test]
fn embeddings_agree_without_multipliers() {
    for name in BUILTIN_NAMES {
        let spec = builtin(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zero = vec![0.0; spec.m()];
        let v = SubmanifoldChart::random(&spec, SubmanifoldKind::Vakonomic, &mut rng, Some(&zero)).unwrap();
        let h = SubmanifoldChart::new(&spec, SubmanifoldKind::Nonholonomic, v.q().to_vec(), v.qdot().to_vec(), zero).unwrap();
        assert_eq!(embed(&spec, &v).unwrap(), embed(&spec, &h).unwrap(), "{name}");
    }
}

#[test]
fn pure_multiplier_direction_for_nonholonomic_kind() {
    let spec = builtin("skate").unwrap();
    let c = SubmanifoldChart::new(
        &spec,
        SubmanifoldKind::Nonholonomic,
        vec![0.2, 0.1, 0.3],
        vec![0.3_f64.cos(), 0.3_f64.sin(), 0.5],
        vec![1.0],
    )
    .unwrap();
    let basis = tangent_basis(&spec, &c).unwrap();
    let last = basis.vectors.last().unwrap();
    let mu = spec.mu(c.q()).unwrap();
    assert!(last.p().iter().all(|x| x.abs() < 1e-9));
    for (a, b) in last.dp().iter().zip(&mu[0]) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn disk_obstruction_at_zero_angle() {
    let spec = builtin("disk").unwrap();
    let c = SubmanifoldChart::new(&spec, SubmanifoldKind::Nonholonomic, vec![0.0; 4], vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 0.0])
        .unwrap();
    let pb = pullback_matrix(&spec, &c).unwrap();
    // basis entries 0 and 2 move x and θ
    assert!((pb.matrix[(0, 2)].abs() - 1.0).abs() < 1e-4);
    assert!(pb.analytic_deviation < 1e-4);
}

#[test]
fn off_constraint_chart_is_rejected() {
    let spec = builtin("particle").unwrap();
    let err = SubmanifoldChart::new(&spec, SubmanifoldKind::Vakonomic, vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0], vec![1.0]);
    assert!(err.is_err());
}
