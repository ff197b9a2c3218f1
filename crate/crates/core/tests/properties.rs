use cpsmooth_core::approx::{build_g, build_pi, DEFAULT_SERIES_TOL};
use cpsmooth_core::bounds::{
    bound_shape, check_conditions, lemma_ac, BoundVariant, Quadrature, ShapeOptions, TheoremId,
};
use cpsmooth_core::exact::{weighted_sum_distribution, BlockSpec};
use cpsmooth_core::SignedMeasure;
use proptest::prelude::*;

fn signed_measure(max_atoms: usize) -> impl Strategy<Value = SignedMeasure> {
    prop::collection::vec((-6i32..=6, -1.0f64..1.0), 1..=max_atoms)
        .prop_map(|pairs| SignedMeasure::new(pairs.into_iter().map(|(x, m)| (x as f64 * 0.5, m))).unwrap())
}

fn distribution(max_atoms: usize) -> impl Strategy<Value = SignedMeasure> {
    prop::collection::vec((-8i32..=8, 0.01f64..1.0), 1..=max_atoms).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        SignedMeasure::new(pairs.into_iter().map(|(x, m)| (x as f64, m / total))).unwrap()
    })
}

/// Zero-mass measure with total variation at most 2.
fn zero_mass(max_atoms: usize) -> impl Strategy<Value = SignedMeasure> {
    (prop::collection::vec((-4i32..=4, -1.0f64..1.0), 1..=max_atoms), 0.1f64..=1.0).prop_map(|(pairs, scale)| {
        let raw = SignedMeasure::new(pairs.into_iter().map(|(x, m)| (x as f64, m))).unwrap();
        let centred = raw.sub(&SignedMeasure::dirac(0.0).scale_mass(raw.total_mass()));
        let tv = centred.total_variation();
        if tv > 0.0 {
            centred.scale_mass(2.0 * scale / tv)
        } else {
            centred
        }
    })
}

fn scale(ms: &[&SignedMeasure]) -> f64 {
    ms.iter().map(|m| m.total_variation()).product::<f64>().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn convolution_commutes(a in signed_measure(6), b in signed_measure(6)) {
        let d = a.convolve(&b).sub(&b.convolve(&a)).total_variation();
        prop_assert!(d <= 1e-12 * scale(&[&a, &b]));
    }

    #[test]
    fn convolution_associates(a in signed_measure(5), b in signed_measure(5), c in signed_measure(5)) {
        let left = a.convolve(&b).convolve(&c);
        let right = a.convolve(&b.convolve(&c));
        prop_assert!(left.sub(&right).total_variation() <= 1e-12 * scale(&[&a, &b, &c]));
    }

    #[test]
    fn total_mass_multiplies(a in signed_measure(6), b in signed_measure(6)) {
        let d = (a.convolve(&b).total_mass() - a.total_mass() * b.total_mass()).abs();
        prop_assert!(d <= 1e-12 * scale(&[&a, &b]));
    }

    #[test]
    fn kolmogorov_norm_of_product(w in signed_measure(6), v in signed_measure(6)) {
        let lhs = w.convolve(&v).kolmogorov_norm();
        let rhs = w.total_variation() * v.kolmogorov_norm();
        prop_assert!(lhs <= rhs + 1e-12 * scale(&[&w, &v]));
    }

    #[test]
    fn kolmogorov_below_total_variation(m in signed_measure(8)) {
        prop_assert!(m.kolmogorov_norm() <= m.total_variation() + 1e-15);
    }

    #[test]
    fn exponential_of_sum_factorises(w1 in zero_mass(5), w2 in zero_mass(5)) {
        let joint = w1.add(&w2).exp(DEFAULT_SERIES_TOL).unwrap();
        let split = w1.exp(DEFAULT_SERIES_TOL).unwrap().convolve(&w2.exp(DEFAULT_SERIES_TOL).unwrap());
        prop_assert!(joint.sub(&split).total_variation() <= 1e-10);
    }

    #[test]
    fn charfn_multiplies(a in signed_measure(6), b in signed_measure(6), t in -10.0f64..10.0) {
        let d = (a.convolve(&b).charfn(t) - a.charfn(t) * b.charfn(t)).norm();
        prop_assert!(d <= 1e-12 * scale(&[&a, &b]));
    }

    #[test]
    fn concentration_is_monotone_and_bounded(f in distribution(8), h1 in 0.0f64..10.0, dh in 0.0f64..5.0) {
        let q1 = f.concentration(h1).unwrap();
        let q2 = f.concentration(h1 + dh).unwrap();
        let top = f.atoms().iter().map(|a| a.mass).fold(0.0, f64::max);
        prop_assert!(q1 <= q2 + 1e-15);
        prop_assert!(q1 >= top - 1e-15 && q2 <= 1.0 + 1e-12);
    }

    #[test]
    fn concentration_window_rescaling(f in distribution(6), h in 0.2f64..3.0, a in 0.2f64..3.0) {
        let report = lemma_ac(&f, h, a, &Quadrature::default(), DEFAULT_SERIES_TOL).unwrap();
        prop_assert!(report.ac3.pass, "{:?}", report.ac3);
    }

    #[test]
    fn conditions_survive_smaller_p(p in 0.001f64..0.2, shrink in 0.0f64..1.0, n in 2usize..60, n2 in 2usize..60) {
        let blocks = |p: f64| [
            BlockSpec::two_runs(p, n, 1.0).unwrap(),
            BlockSpec::two_runs(p * 0.7, n2, 2.0).unwrap(),
        ];
        if check_conditions(TheoremId::Theorem1, &blocks(p)).passed() {
            prop_assert!(check_conditions(TheoremId::Theorem1, &blocks(p * shrink)).passed());
        }
    }

    #[test]
    fn smoothed_shapes_nonnegative_and_decreasing_in_h(
        p in 0.005f64..0.05,
        n in 5usize..80,
        w2 in 1.0f64..3.0,
    ) {
        let blocks = [BlockSpec::two_runs(p, n, 1.0).unwrap(), BlockSpec::two_runs(p, n, w2).unwrap()];
        let opts = ShapeOptions::default();
        let grid: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
        for variant in BoundVariant::ALL.iter().copied().filter(|v| v.smoothing().is_some()) {
            let mut last = f64::INFINITY;
            for &h in &grid {
                let total = match bound_shape(variant, &blocks, Some(h), &opts) {
                    Ok(s) => s.total,
                    Err(_) => break,
                };
                prop_assert!(total >= 0.0);
                prop_assert!(total <= last * (1.0 + 1e-12), "{} h={h}: {total} > {last}", variant.name());
                last = total;
            }
        }
    }
}

fn ratios(variant: BoundVariant, p: f64, ns: &[usize]) -> Vec<f64> {
    ns.iter()
        .map(|&n| {
            let blocks = [BlockSpec::two_runs(p, n, 1.0).unwrap(), BlockSpec::two_runs(p, n, 1.0).unwrap()];
            assert!(check_conditions(TheoremId::Theorem1, &blocks).passed());
            let f = weighted_sum_distribution(&blocks).unwrap();
            let approx = match variant {
                BoundVariant::Theorem1Pi => build_pi(&blocks, DEFAULT_SERIES_TOL).unwrap(),
                _ => build_g(&blocks, DEFAULT_SERIES_TOL).unwrap(),
            };
            let shape = bound_shape(variant, &blocks, None, &ShapeOptions::default()).unwrap();
            f.sub(&approx).kolmogorov_norm() / shape.total
        })
        .collect()
}

fn band(rs: &[f64]) -> f64 {
    let hi = rs.iter().copied().fold(f64::MIN, f64::max);
    let lo = rs.iter().copied().fold(f64::MAX, f64::min);
    hi / lo
}

// Known to fail: on this grid np^2 only reaches 2 and the ratio is still
// drifting down.
#[test]
fn theorem1_ratio_band_on_doubling_grid() {
    let ns = [50, 100, 200, 400, 800];
    for variant in [BoundVariant::Theorem1Pi, BoundVariant::Theorem1G] {
        let rs = ratios(variant, 0.05, &ns);
        println!("{}: {rs:?}", variant.name());
        assert!(band(&rs) <= 2.0, "{}: ratios {rs:?} span a factor {}", variant.name(), band(&rs));
    }
}

#[test]
fn theorem1_ratio_band_once_spread_is_large() {
    let ns = [800, 1600, 3200, 6400];
    for variant in [BoundVariant::Theorem1Pi, BoundVariant::Theorem1G] {
        let rs = ratios(variant, 0.05, &ns);
        assert!(band(&rs) <= 2.0, "{}: ratios {rs:?}", variant.name());
    }
}
