use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;

use spectral_riesz::bounds::{self, Side};
use spectral_riesz::exact::{rat, rat_to_f64, uint_to_f64};
use spectral_riesz::riesz::{self, lemma_sum, lemma_sum_exact, riesz_mean, riesz_mean_exact, Spectrum, SpectrumQuery, DEFAULT_LEVEL_CAP};
use spectral_riesz::{Family, Space};

fn any_space() -> impl Strategy<Value = Space> {
    prop_oneof![
        (1u32..=8).prop_map(|d| Space::sphere(d).unwrap()),
        (2u32..=8).prop_map(|d| Space::hemisphere_dirichlet(d).unwrap()),
        (2u32..=8).prop_map(|d| Space::hemisphere_neumann(d).unwrap()),
        (2u32..=8).prop_map(|d| Space::real_projective(d).unwrap()),
        (2u32..=5).prop_map(|n| Space::complex_projective(2 * n).unwrap()),
        (2u32..=3).prop_map(|n| Space::quaternion_projective(4 * n).unwrap()),
        Just(Space::circle()),
        Just(Space::cayley_plane()),
    ]
}

fn laplacian(space: Space) -> SpectrumQuery {
    SpectrumQuery::laplacian(space)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn riesz_means_are_nondecreasing(space in any_space(), z in 0.0f64..400.0, dz in 0.0f64..50.0) {
        let q = laplacian(space);
        let t = Spectrum::covering(q, z + dz, DEFAULT_LEVEL_CAP).unwrap();
        prop_assert!(t.counting(z) <= t.counting(z + dz));
        for gamma in 1..=2 {
            prop_assert!(t.riesz(gamma, z) <= t.riesz(gamma, z + dz));
        }
    }

    #[test]
    fn sphere_splits_into_dirichlet_and_neumann_halves(d in 2u32..=9, num in 0i64..20_000, den in 1i64..40) {
        let z = rat(num, den);
        let whole = laplacian(Space::sphere(d).unwrap());
        let dir = laplacian(Space::hemisphere_dirichlet(d).unwrap());
        let neu = laplacian(Space::hemisphere_neumann(d).unwrap());
        for gamma in 0..=2 {
            let s = riesz_mean_exact(&whole, gamma, &z).unwrap();
            let halves = riesz_mean_exact(&dir, gamma, &z).unwrap() + riesz_mean_exact(&neu, gamma, &z).unwrap();
            prop_assert_eq!(s, halves);
        }
    }

    #[test]
    fn projective_space_keeps_the_even_sphere_levels(d in 2u32..=9, l in 0u64..200) {
        let rp = Space::real_projective(d).unwrap();
        let sphere = Space::sphere(d).unwrap();
        prop_assert_eq!(rp.lambda(l), sphere.lambda(2 * l));
        prop_assert_eq!(rp.multiplicity(l), sphere.multiplicity(2 * l));
    }

    #[test]
    fn hemisphere_halves_share_levels(d in 2u32..=9, l in 1u64..300) {
        let dir = Space::hemisphere_dirichlet(d).unwrap();
        let neu = Space::hemisphere_neumann(d).unwrap();
        let sphere = Space::sphere(d).unwrap();
        prop_assert_eq!(dir.lambda(l), sphere.lambda(l));
        prop_assert_eq!(neu.lambda(l), sphere.lambda(l));
        prop_assert!(neu.multiplicity(l) >= dir.multiplicity(l));
        prop_assert_eq!(dir.multiplicity(l) + neu.multiplicity(l), sphere.multiplicity(l));
        // Dirichlet modes at level l are Neumann modes at level l - 1 times the height function
        prop_assert_eq!(dir.multiplicity(l), neu.multiplicity(l - 1));
    }

    #[test]
    fn buckling_sum_is_polyharmonic_mean_without_constant_mode(p in 1u32..=4, num in 0i64..100_000, den in 1i64..16) {
        let z = rat(num, den);
        let poly = SpectrumQuery::polyharmonic(Space::sphere(2).unwrap(), p).unwrap();
        let full = riesz_mean_exact(&poly, 1, &z).unwrap();
        prop_assert_eq!(lemma_sum_exact(p, &z).unwrap(), full - &z);
        let zf = rat_to_f64(&z);
        prop_assert!(close(lemma_sum(p, zf).unwrap(), riesz_mean(&poly, 1, zf).unwrap() - zf, 1e-12));
    }

    #[test]
    fn second_mean_integrates_the_first(space in any_space(), num in 1i64..4000, h_den in 64i64..512) {
        // R2 is C^1 and piecewise quadratic, so a centred difference is exact away from eigenvalues.
        let q = laplacian(space);
        let z = rat(num, 8);
        let h = rat(1, h_den);
        let lo = &z - &h;
        let hi = &z + &h;
        let t = Spectrum::covering_exact(q, &hi, DEFAULT_LEVEL_CAP).unwrap();
        prop_assume!(t.counting_exact(&lo) == t.counting_exact(&hi));
        let slope = (t.riesz_exact(2, &hi) - t.riesz_exact(2, &lo)) / (h * BigRational::from_integer(2.into()));
        prop_assert_eq!(slope, t.riesz_exact(1, &z) * BigRational::from_integer(2.into()));
    }

    #[test]
    fn float_means_agree_with_exact_ones(space in any_space(), num in 0i64..50_000, den in 1i64..64) {
        let q = laplacian(space);
        let z = rat(num, den);
        let t = Spectrum::covering_exact(q, &z, DEFAULT_LEVEL_CAP).unwrap();
        let zf = rat_to_f64(&z);
        prop_assert_eq!(uint_to_f64(&t.counting_exact(&z)), uint_to_f64(&t.counting(zf)));
        for gamma in 1..=2 {
            let exact = rat_to_f64(&t.riesz_exact(gamma, &z));
            prop_assert!(close(t.riesz(gamma, zf), exact, 1e-12), "gamma {gamma}: {} vs {exact}", t.riesz(gamma, zf));
        }
    }

    #[test]
    fn domain_bounds_scale_linearly_with_area(idx in 0usize..64, frac in 0.01f64..0.5, z in 0.5f64..500.0) {
        let doms: Vec<_> = bounds::catalog().iter().filter(|s| s.area.is_some()).collect();
        let spec = doms[idx % doms.len()];
        let area = frac * spec.default_params().area.unwrap();
        let one = spec.params(None, None, Some(area)).unwrap();
        let two = spec.params(None, None, Some(2.0 * area)).unwrap();
        for &side in spec.sides {
            let b1 = bounds::bound_value(spec.id, &one, Some(side), z).unwrap();
            let b2 = bounds::bound_value(spec.id, &two, Some(side), z).unwrap();
            prop_assert!(close(b2, 2.0 * b1, 1e-12), "{} {:?}: {b1} {b2}", spec.id, side);
        }
    }

    #[test]
    fn counting_matches_cumulative_multiplicities(space in any_space(), l in 0u64..60) {
        let t = Spectrum::up_to_level(laplacian(space), l + 1).unwrap();
        let lam = space.lambda(l) as f64;
        let below: BigUint = (space.first_level()..=l).map(|k| space.multiplicity(k)).sum();
        prop_assert_eq!(t.counting(lam), below);
    }
}

#[test]
fn sphere_two_r1_closed_form_at_levels() {
    for l in 0..50u64 {
        let z = (l * (l + 1)) as f64;
        let closed = riesz::riesz1_closed_sphere(2, z).unwrap();
        let brute = riesz_mean(&laplacian(Space::sphere(2).unwrap()), 1, z).unwrap();
        assert!(close(closed, brute, 1e-13));
        let lower = bounds::bound_value(
            "s2.r1.lower",
            &bounds::lookup("s2.r1.lower").unwrap().default_params(),
            Some(Side::Lower),
            z,
        )
        .unwrap();
        assert!(close(lower, brute, 1e-12), "touching at level {l}");
    }
    assert_eq!(Space::sphere(2).unwrap().family(), Family::Sphere);
}
