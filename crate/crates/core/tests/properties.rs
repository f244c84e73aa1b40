use num_complex::Complex64;
use proptest::prelude::*;

use opakit::filter2d::{array_to_poly, run_recursion, stabilize_with, DataArray, FilterSpec};
use opakit::opa::{grammian, nu2_pythagoras, opa, residual_orthogonal};
use opakit::spaces::{inner_product, kernel_eval_exact, kernel_taylor};
use opakit::text::parse_poly;
use opakit::zero_scan::{face_profile, univariate_roots};
use opakit::{ExactScalar, MPoly, MultiIndex, QuadExt, Rational, SpaceSpec};

fn ratio() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=5).prop_map(|(n, d)| Rational::frac(n, d))
}

fn scalar() -> impl Strategy<Value = ExactScalar> {
    (ratio(), ratio(), ratio(), ratio())
        .prop_map(|(a, b, c, d)| ExactScalar::new(QuadExt::new(a, b), QuadExt::new(c, d)))
}

fn rational_scalar() -> impl Strategy<Value = ExactScalar> {
    ratio().prop_map(ExactScalar::from_rational)
}

fn poly2(coeff: impl Strategy<Value = ExactScalar>, degree: u32) -> impl Strategy<Value = MPoly> {
    let monomials: Vec<MultiIndex> =
        (0..=degree).flat_map(|t| (0..=t).map(move |a| MultiIndex::new(vec![t - a, a]))).collect();
    let n = monomials.len();
    proptest::collection::vec(coeff, n)
        .prop_map(move |cs| MPoly::from_terms(2, monomials.iter().cloned().zip(cs)).expect("two-variable terms"))
}

/// Nonzero constant term so that the target is not in the closure of `z·H`.
fn target(coeff: impl Strategy<Value = ExactScalar>, degree: u32) -> impl Strategy<Value = MPoly> {
    poly2(coeff, degree).prop_map(|p| if p.constant_term().is_zero() { p.add(&MPoly::one(2)).unwrap() } else { p })
}

fn exact_spaces() -> impl Strategy<Value = SpaceSpec> {
    prop_oneof![
        Just(SpaceSpec::hardy_bidisk()),
        Just(SpaceSpec::bergman_bidisk()),
        Just(SpaceSpec::dirichlet_bidisk(1.0, 0.0)),
        Just(SpaceSpec::drury_arveson(2)),
    ]
}

fn small_point() -> impl Strategy<Value = Vec<ExactScalar>> {
    let c = (-2i64..=2, -2i64..=2).prop_map(|(a, b)| {
        ExactScalar::new(QuadExt::from_rational(Rational::frac(a, 5)), QuadExt::from_rational(Rational::frac(b, 5)))
    });
    proptest::collection::vec(c, 2)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn grammian_is_hermitian(s in exact_spaces(), f in target(scalar(), 1), n in 0usize..6) {
        let (g, _) = grammian(&s, &f, n).unwrap();
        prop_assert!(g.is_hermitian());
    }

    #[test]
    fn residual_is_orthogonal_and_pythagoras_holds(s in exact_spaces(), f in target(rational_scalar(), 2), n in 0usize..6) {
        let r = opa(&s, &f, n).unwrap();
        prop_assert!(residual_orthogonal(&r).unwrap());
        prop_assert_eq!(nu2_pythagoras(&r).unwrap(), r.nu2.clone());
        prop_assert!(r.nu2.signum() >= 0);
    }

    #[test]
    fn kernel_reproduces_polynomials(p in poly2(scalar(), 3), lambda in small_point()) {
        for s in [SpaceSpec::hardy_bidisk(), SpaceSpec::bergman_bidisk(), SpaceSpec::drury_arveson(2)] {
            let k = kernel_taylor(&s, &lambda, 3).unwrap();
            prop_assert_eq!(inner_product(&s, &p, &k).unwrap(), p.eval_exact(&lambda).unwrap());
        }
    }

    #[test]
    fn product_kernel_factors(lambda in small_point(), z in small_point()) {
        let disk = SpaceSpec::Dirichlet { alphas: vec![0.0] };
        let bergman = SpaceSpec::Dirichlet { alphas: vec![-1.0] };
        let k = kernel_eval_exact(&SpaceSpec::hardy_bidisk(), &lambda, &z).unwrap();
        let k1 = kernel_eval_exact(&disk, &lambda[..1], &z[..1]).unwrap();
        let k2 = kernel_eval_exact(&disk, &lambda[1..], &z[1..]).unwrap();
        prop_assert_eq!(k, &k1 * &k2);
        let mixed = SpaceSpec::dirichlet_bidisk(-1.0, 0.0);
        let k = kernel_eval_exact(&mixed, &lambda, &z).unwrap();
        let k1 = kernel_eval_exact(&bergman, &lambda[..1], &z[..1]).unwrap();
        prop_assert_eq!(k, &k1 * &k2);
    }

    #[test]
    fn display_round_trips(p in poly2(scalar(), 3)) {
        let text = p.to_string();
        prop_assert_eq!(parse_poly(&text, 2).unwrap(), p);
    }
}

fn small_array(rows: usize, cols: usize) -> impl Strategy<Value = DataArray<ExactScalar>> {
    proptest::collection::vec(proptest::collection::vec((-4i64..=4).prop_map(ExactScalar::from_integer), cols), rows)
        .prop_map(|r| DataArray::from_rows(r).unwrap())
}

/// `1 + b10 z1 + b01 z2 + b11 z1 z2` with small coefficients, zero free on the closed bidisk.
fn stable_denominator() -> impl Strategy<Value = MPoly> {
    (-2i64..=2, -2i64..=2, -2i64..=2)
        .prop_map(|(a, b, c)| parse_poly(&format!("1+({a}/7)*z1+({b}/7)*z2+({c}/7)*z1*z2"), 2).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn recursion_is_linear(b in stable_denominator(), a in poly2(rational_scalar(), 1), d1 in small_array(3, 3), d2 in small_array(3, 3)) {
        let fs = FilterSpec::new(a, b).unwrap();
        let sum = run_recursion(&fs, &d1.add(&d2).unwrap(), 6, 6).unwrap();
        let parts = run_recursion(&fs, &d1, 6, 6).unwrap().add(&run_recursion(&fs, &d2, 6, 6).unwrap()).unwrap();
        prop_assert_eq!(sum, parts);
    }

    #[test]
    fn impulse_response_is_the_series_of_a_over_b(b in stable_denominator(), a in poly2(rational_scalar(), 1)) {
        const ORDER: u32 = 12;
        let fs = FilterSpec::new(a.clone(), b.clone()).unwrap();
        let n = ORDER as usize + 1;
        let r = run_recursion(&fs, &DataArray::impulse(1, 1), n, n).unwrap();
        let series = array_to_poly(&r).unwrap();
        let prod = b.mul(&series).unwrap();
        for j in 0..=ORDER {
            for k in 0..=ORDER {
                let m = MultiIndex::new(vec![j, k]);
                prop_assert_eq!(prod.coeff(&m), a.coeff(&m));
            }
        }
    }

    #[test]
    fn face_profiles_are_conjugate_symmetric(p in target(rational_scalar(), 2), face in 0usize..2) {
        const GRID: usize = 64;
        let prof = face_profile(&p, face, GRID).unwrap();
        for i in 0..GRID / 2 {
            let (a, b) = (&prof.samples[i], &prof.samples[GRID - 1 - i]);
            match (a.min_modulus, b.min_modulus) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0), "{x} vs {y}"),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn roots_have_small_backward_error(cs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..10)) {
        let mut c: Vec<Complex64> = cs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let last = c.len() - 1;
        if c[last].norm() < 0.5 {
            c[last] = Complex64::new(1.0, 0.0);
        }
        let set = univariate_roots(&c).unwrap();
        prop_assert_eq!(set.trimmed, 0);
        prop_assert_eq!(set.roots.len(), last);
        for z in &set.roots {
            let value: Complex64 = c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
            let bound: f64 = c.iter().rev().fold(0.0, |acc, a| acc * z.norm() + a.norm());
            prop_assert!(value.norm() <= 1e-10 * bound, "|p(z)| = {} vs bound {}", value.norm(), bound);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn stabilize_scales_inversely(b in stable_denominator(), c in ratio().prop_filter("nonzero", |r| !r.is_zero()), n in 0usize..3) {
        const GRID: usize = 32;
        let base = stabilize_with(&b, n, GRID, 1e-3).unwrap();
        let cb = b.scale(&ExactScalar::from_rational(c.clone()));
        let scaled = stabilize_with(&cb, n, GRID, 1e-3).unwrap();
        let inv = ExactScalar::from_rational(c.checked_inv().unwrap());
        prop_assert_eq!(scaled.p_n_star, base.p_n_star.scale(&inv));
    }
}

#[test]
fn fir_filter_is_plain_convolution() {
    let a = parse_poly("1+2*z1-z2+3*z1*z2", 2).unwrap();
    let d = DataArray::from_rows(vec![
        vec![ExactScalar::from_integer(1), ExactScalar::from_integer(-1)],
        vec![ExactScalar::from_integer(2), ExactScalar::from_integer(0)],
    ])
    .unwrap();
    let fs = FilterSpec::new(a.clone(), MPoly::one(2)).unwrap();
    let out = array_to_poly(&run_recursion(&fs, &d, 4, 4).unwrap()).unwrap();
    assert_eq!(out, a.mul(&array_to_poly(&d).unwrap()).unwrap());
}
