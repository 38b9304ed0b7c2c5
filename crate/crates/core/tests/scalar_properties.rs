use fedosov::scalar::{
    canonical_string, conjugate_scalar, parse_nu_series, parse_scalar, partial_derivative, rat, GaussianRational,
    Monomial, NuSeries, Scalar,
};
use proptest::prelude::*;

const DIM: usize = 3;

fn coefficient() -> impl Strategy<Value = GaussianRational> {
    (-9i64..=9, 1i64..=5, -9i64..=9, 1i64..=5).prop_map(|(a, b, c, d)| GaussianRational::new(rat(a, b), rat(c, d)))
}

/// Polynomials in x1..x3 of total degree <= 4.
fn scalar() -> impl Strategy<Value = Scalar> {
    let term = (prop::collection::vec(0u32..=4, DIM), coefficient()).prop_filter_map("degree <= 4", |(e, c)| {
        (e.iter().sum::<u32>() <= 4).then(|| Scalar::monomial(c, Monomial::from_exponents(e)))
    });
    prop::collection::vec(term, 0..6).prop_map(|ts| ts.into_iter().fold(Scalar::zero(), |a, t| &a + &t))
}

fn series() -> impl Strategy<Value = NuSeries> {
    prop::collection::vec(scalar(), 0..4).prop_map(NuSeries::from_coeffs)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, rng_algorithm: prop::test_runner::RngAlgorithm::ChaCha, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &Scalar::one(), a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn canonical_text_round_trips(a in scalar()) {
        prop_assert_eq!(parse_scalar(&canonical_string(&a), DIM).unwrap(), a);
    }

    #[test]
    fn series_text_round_trips(f in series()) {
        prop_assert_eq!(parse_nu_series(&f.to_string(), DIM).unwrap(), f);
    }

    #[test]
    fn partials_commute(a in scalar(), i in 1..=DIM, j in 1..=DIM) {
        let ij = partial_derivative(&partial_derivative(&a, j, DIM).unwrap(), i, DIM).unwrap();
        let ji = partial_derivative(&partial_derivative(&a, i, DIM).unwrap(), j, DIM).unwrap();
        prop_assert_eq!(ij, ji);
    }

    #[test]
    fn leibniz(a in scalar(), b in scalar(), i in 0..DIM) {
        prop_assert_eq!((&a * &b).partial(i), &(&a.partial(i) * &b) + &(&a * &b.partial(i)));
    }

    #[test]
    fn conjugation_is_multiplicative(a in scalar(), b in scalar()) {
        prop_assert_eq!(conjugate_scalar(&(&a * &b)), &conjugate_scalar(&a) * &conjugate_scalar(&b));
        prop_assert_eq!(conjugate_scalar(&conjugate_scalar(&a)), a);
    }
}

#[test]
fn out_of_range_derivative_is_an_error() {
    assert!(partial_derivative(&Scalar::var(0), 0, DIM).is_err());
    assert!(partial_derivative(&Scalar::var(0), 4, DIM).is_err());
    assert_eq!(partial_derivative(&Scalar::var(0), 1, DIM).unwrap(), Scalar::one());
}
