use fedosov::forms::VectorField;
use fedosov::random::{Sampler, Shape};
use fedosov::scalar::GaussianRational;
use fedosov::weyl::{parse_weyl, WeylElement};

const CAP: u32 = 10;

fn sign(k: u32, l: u32) -> GaussianRational {
    GaussianRational::from_int(if (k * l) % 2 == 1 { -1 } else { 1 })
}

#[test]
fn hodge_decomposition_on_random_sample() {
    for dim in [2, 4] {
        let mut rng = Sampler::new(11 + dim as u64, dim);
        for _ in 0..200 {
            let a = rng.weyl(&Shape::default(), CAP);
            let sigma = WeylElement::nu_series(&a.sigma(), dim, CAP);
            let rebuilt = a.delta_inv().delta().add(&a.delta().delta_inv()).add(&sigma);
            assert_eq!(rebuilt, a, "{a}");
        }
    }
}

#[test]
fn delta_and_delta_star_square_to_zero() {
    let mut rng = Sampler::new(3, 4);
    for _ in 0..200 {
        let a = rng.weyl(&Shape::default(), CAP);
        assert!(a.delta().delta().is_zero());
        assert!(a.delta_star().delta_star().is_zero());
        assert!(a.delta_inv().delta_inv().is_zero());
    }
}

#[test]
fn mu_is_super_commutative() {
    let mut rng = Sampler::new(5, 4);
    for _ in 0..100 {
        let (k, l) = (rng.below(2), rng.below(2));
        let (sa, sb) = (rng.below(2), rng.below(2));
        let a = rng.homogeneous(sa, k, 0, CAP);
        let b = rng.homogeneous(sb, l, 0, CAP);
        assert_eq!(a.mu(&b), b.mu(&a).scale(&sign(k, l)));
    }
}

#[test]
fn insertions_are_derivations() {
    let mut rng = Sampler::new(7, 2);
    for _ in 0..100 {
        let k = rng.below(2);
        let sa = rng.below(2);
        let a = rng.homogeneous(sa, k, 0, CAP);
        let b = rng.weyl(&Shape::default(), CAP);
        let x: VectorField = rng.vector_field(1);
        let lhs = a.mu(&b).insert_sym(&x);
        let rhs = a.insert_sym(&x).mu(&b).add(&a.mu(&b.insert_sym(&x)));
        assert_eq!(lhs, rhs);
        let lhs = a.mu(&b).insert_anti(&x);
        let rhs = a.insert_anti(&x).mu(&b).add(&a.mu(&b.insert_anti(&x)).scale(&sign(k, 1)));
        assert_eq!(lhs, rhs);
        let lhs = a.mu(&b).delta();
        let rhs = a.delta().mu(&b).add(&a.mu(&b.delta()).scale(&sign(k, 1)));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn text_round_trips_on_random_sample() {
    for dim in [2, 4] {
        let mut rng = Sampler::new(19, dim);
        let shape = Shape { complex: true, max_nu: 3, ..Shape::default() };
        for _ in 0..100 {
            let a = rng.weyl(&shape, CAP);
            assert_eq!(parse_weyl(&a.to_string(), dim, CAP).unwrap(), a);
        }
    }
}
