use spectral_riesz::bounds::{catalog, verify, VerifyOptions};

#[test]
fn every_catalog_sweep_behaves_as_documented() {
    let mut failures = Vec::new();
    for spec in catalog() {
        for params in spec.sweep_params() {
            let rep = verify(spec.id, &params, &VerifyOptions::default()).unwrap();
            if !rep.passed {
                failures.push(format!(
                    "{} on {} p={}: {} {:?}",
                    spec.id,
                    rep.space,
                    rep.p,
                    rep.outcome,
                    rep.violations.first().or(rep.sides[0].first_violation.as_ref())
                ));
                if let Some(e) = rep.equality_checks.iter().find(|e| !e.ok) {
                    failures.push(format!("   equality {:?}", e));
                }
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn second_riesz_lower_bound_fails_on_circle_and_real_projective_plane() {
    use spectral_riesz::bounds::{lookup, GridSpec, Side};
    use spectral_riesz::Space;
    let spec = lookup("sd.r2.twosided").unwrap();
    let opts = VerifyOptions {
        grid: GridSpec::Points((0..=400).map(|i| i as f64 * 0.05).collect()),
        ..Default::default()
    };
    for space in [Space::circle(), Space::sphere(1).unwrap(), Space::real_projective(2).unwrap()] {
        let params = spec.params(Some(space), None, None).unwrap();
        let rep = verify(spec.id, &params, &opts).unwrap();
        let lower = rep.sides.iter().find(|s| s.side == Side::Lower).unwrap();
        let upper = rep.sides.iter().find(|s| s.side == Side::Upper).unwrap();
        assert!(lower.violations > 0, "{space}");
        assert_eq!(upper.violations, 0, "{space}");
    }
}
