use pentaheat_core::pentagon::*;
use pentaheat_core::poly::Rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn equivariance_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let p = random_convex_pentagon(&mut rng);
        let t = random_transform(&mut rng);
        let direct = normalize(&heat_step(&p).unwrap()).unwrap();
        let moved = normalize(&heat_step(&t.apply_polygon(&p)).unwrap()).unwrap();
        assert_eq!(direct, moved);
    }
}

#[test]
fn midpoint_lies_on_its_edge() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = random_convex_pentagon(&mut rng);
        let v = p.vertices();
        let s = projective_midpoint(&v[0], &v[1], &v[2], &v[3]).unwrap();
        assert!(join(&v[1], &v[2]).unwrap().contains(&s));
    }
}

#[test]
fn random_convex_pentagons_converge() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let polys: Vec<Polygon<Rational>> = (0..100).map(|_| random_convex_pentagon(&mut rng)).collect();
    let rows = convergence_table(&polys, 1e-6, 100);
    let worst = rows.iter().filter_map(|r| r.iterations).max();
    for r in &rows {
        assert!(r.iterations.is_some(), "pentagon {}: {:?}", r.index, r.error);
    }
    println!("slowest convergence: {worst:?} iterations");
}

#[test]
fn regular_class_matches_float_normalization() {
    let exact = regular_class_f64();
    let float = normalize(&regular_pentagon().to_f64()).unwrap().dehomogenize().unwrap();
    assert!((exact.0 - float.0).abs() < 1e-12 && (exact.1 - float.1).abs() < 1e-12);
}
