//! Library results against independent brute-force computations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cpsmooth_core::approx::{build_pi, build_smoothing, SmoothingKind};
use cpsmooth_core::bounds::{
    bound_roos_hipp, bound_shape, compare, BoundVariant, ShapeOptions, ROOS_HIPP_CONSTANT,
};
use cpsmooth_core::exact::{block_distribution, block_moments, weighted_sum_distribution, BlockSpec};
use cpsmooth_core::SignedMeasure;

/// Sorted, merged atom list built without the library.
fn merged(mut pairs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, m) in pairs {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= 1e-9 * x.abs().max(1.0) => last.1 += m,
            _ => out.push((x, m)),
        }
    }
    out
}

/// Total variation between a library measure and an oracle atom list.
fn tv_against(lib: &SignedMeasure, oracle: &[(f64, f64)]) -> f64 {
    let mut pairs: Vec<(f64, f64)> = lib.atoms().iter().map(|a| (a.location, a.mass)).collect();
    pairs.extend(oracle.iter().map(|&(x, m)| (x, -m)));
    merged(pairs).iter().map(|(_, m)| m.abs()).sum()
}

fn two_runs_paths(p: f64, n: usize, w: f64) -> Vec<(f64, f64)> {
    let mut pairs = Vec::with_capacity(1 << (n + 1));
    for bits in 0u32..(1 << (n + 1)) {
        let eta = |i: usize| (bits >> i) & 1;
        let ones = bits.count_ones() as i32;
        let prob = p.powi(ones) * (1.0 - p).powi(n as i32 + 1 - ones);
        let s: u32 = (0..n).map(|k| eta(k) * eta(k + 1)).sum();
        pairs.push((w * s as f64, prob));
    }
    merged(pairs)
}

#[test]
fn two_runs_matches_path_enumeration() {
    for n in 1..=12 {
        for &p in &[0.05, 0.3, 0.5, 0.9] {
            let law = block_distribution(&BlockSpec::two_runs(p, n, 1.0).unwrap()).unwrap();
            let tv = tv_against(&law, &two_runs_paths(p, n, 1.0));
            assert!(tv <= 1e-12, "n={n} p={p} tv={tv}");
        }
    }
}

#[test]
fn weighted_pair_matches_joint_enumeration() {
    let w2 = 2f64.sqrt();
    for (n1, n2) in [(3, 4), (6, 8), (7, 7), (1, 13)] {
        let (p1, p2) = (0.2, 0.35);
        let a = two_runs_paths(p1, n1, 1.0);
        let b = two_runs_paths(p2, n2, w2);
        let mut joint = Vec::with_capacity(a.len() * b.len());
        for &(x, px) in &a {
            for &(y, py) in &b {
                joint.push((x + y, px * py));
            }
        }
        let blocks = [
            BlockSpec::two_runs(p1, n1, 1.0).unwrap(),
            BlockSpec::two_runs(p2, n2, w2).unwrap(),
        ];
        let law = weighted_sum_distribution(&blocks).unwrap();
        let tv = tv_against(&law, &merged(joint));
        assert!(tv <= 1e-12, "n=({n1},{n2}) tv={tv}");
    }
}

#[test]
fn poisson_binomial_matches_sequential_convolution() {
    // N = 100 Bernoulli blocks of length 1 with varying p.
    let ps: Vec<f64> = (0..100).map(|i| 0.01 + 0.004 * i as f64).collect();
    let mut pmf = vec![1.0];
    for &p in &ps {
        let mut next = vec![0.0; pmf.len() + 1];
        for (k, &q) in pmf.iter().enumerate() {
            next[k] += q * (1.0 - p);
            next[k + 1] += q * p;
        }
        pmf = next;
    }
    let oracle: Vec<(f64, f64)> = pmf.iter().enumerate().map(|(k, &m)| (k as f64, m)).collect();
    let blocks: Vec<BlockSpec> = ps.iter().map(|&p| BlockSpec::bernoulli(p, 1, 1.0).unwrap()).collect();
    let law = weighted_sum_distribution(&blocks).unwrap();
    assert!(tv_against(&law, &oracle) <= 1e-12);

    // the same power through repeated squaring
    let iid = block_distribution(&BlockSpec::bernoulli(0.1, 100, 1.0).unwrap()).unwrap();
    let mut binom = vec![0.0; 101];
    let mut c = 1.0f64;
    for (k, slot) in binom.iter_mut().enumerate() {
        *slot = c * 0.1f64.powi(k as i32) * 0.9f64.powi(100 - k as i32);
        c = c * (100 - k) as f64 / (k + 1) as f64;
    }
    let oracle: Vec<(f64, f64)> = binom.iter().enumerate().map(|(k, &m)| (k as f64, m)).collect();
    assert!(tv_against(&iid, &oracle) <= 1e-12);
}

/// `exp(W)` by summing forty terms of the series on an integer lattice.
fn series_oracle(w: &[(i64, f64)]) -> Vec<(f64, f64)> {
    let mut sum: BTreeMap<i64, f64> = BTreeMap::from([(0, 1.0)]);
    let mut term = sum.clone();
    for k in 1..=40 {
        let mut next = BTreeMap::new();
        for (&x, &a) in &term {
            for &(y, b) in w {
                *next.entry(x + y).or_insert(0.0) += a * b / k as f64;
            }
        }
        for (&x, &a) in &next {
            *sum.entry(x).or_insert(0.0) += a;
        }
        term = next;
    }
    sum.into_iter().map(|(x, m)| (x as f64, m)).collect()
}

#[test]
fn exp_matches_series_oracle() {
    let cases: [&[(i64, f64)]; 4] = [
        &[(1, 1.0), (0, -1.0)],
        &[(1, 0.3), (-2, 0.2), (0, -0.5)],
        &[(0, 0.7), (3, -0.4), (-1, 0.25)],
        &[(1, 0.6), (2, -0.3), (0, -0.3)],
    ];
    for w in cases {
        let m = SignedMeasure::new(w.iter().map(|&(x, v)| (x as f64, v))).unwrap();
        let e = m.exp(1e-15).unwrap();
        let tv = tv_against(&e, &series_oracle(w));
        assert!(tv <= 1e-12, "{w:?}: {tv}");
    }
}

#[test]
fn binomial_against_poisson_kolmogorov() {
    let binom = SignedMeasure::new([(0.0, 0.81), (1.0, 0.18), (2.0, 0.01)]).unwrap();
    let poisson = SignedMeasure::new([(1.0, 0.2), (0.0, -0.2)]).unwrap().exp(1e-15).unwrap();
    let d = binom.sub(&poisson).kolmogorov_norm();

    let e = (-0.2f64).exp();
    let mut cdf_b = 0.0;
    let mut cdf_p = 0.0;
    let mut term = e;
    let mut oracle = 0.0f64;
    for k in 0..30 {
        cdf_b += [0.81, 0.18, 0.01].get(k).copied().unwrap_or(0.0);
        cdf_p += term;
        term *= 0.2 / (k + 1) as f64;
        oracle = oracle.max((cdf_b - cdf_p).abs());
    }
    assert!((d - oracle).abs() < 1e-14);
    assert!((d - 8.731e-3).abs() < 5e-7, "{d}");
}

#[test]
fn two_runs_moment_closed_forms() {
    for (n, p) in [(10usize, 0.1f64), (50, 0.05), (200, 0.02), (3, 0.2)] {
        let m = block_moments(&BlockSpec::two_runs(p, n, 1.0).unwrap()).unwrap();
        let lat = m.lattice().unwrap();
        let nf = n as f64;
        assert!((lat.gamma1 - nf * p * p).abs() <= 1e-12);
        let g2 = (nf * p.powi(3) * (2.0 - 3.0 * p) - 2.0 * p.powi(3) * (1.0 - p)) / 2.0;
        assert!((lat.gamma2 - g2).abs() <= 1e-12, "n={n} p={p}");
        // binary summands: ν_2 = 0, E X_{k-1} X_k = p^3 from k = 2 on
        let r0 = nf * p.powi(4) + (nf - 1.0) * p.powi(3);
        assert!((lat.r0 - r0).abs() <= 1e-14);
        assert!(lat.nu2.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn pi_for_two_runs_is_poisson() {
    let blocks = [BlockSpec::two_runs(0.1, 20, 1.0).unwrap()];
    let pi = build_pi(&blocks, 1e-15).unwrap();
    let lambda: f64 = 20.0 * 0.01;
    let mut term = (-lambda).exp();
    for k in 0..10 {
        assert!((pi.mass_at(k as f64) - term).abs() < 1e-15);
        term *= lambda / (k + 1) as f64;
    }
}

/// `e^{-r} I_0(r)`: central atom of `exp{r((δ_1 + δ_{-1})/2 - δ)}`.
fn symmetric_poisson_center(r: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= (r / 2.0) * (r / 2.0) / (k as f64 * k as f64);
        sum += term;
    }
    (-r).exp() * sum
}

#[test]
fn theorem1_pi_shape_two_runs() {
    let blocks = [BlockSpec::two_runs(0.05, 50, 1.0).unwrap()];
    let shape = bound_shape(BoundVariant::Theorem1Pi, &blocks, Some(0.5), &ShapeOptions::default()).unwrap();
    let gamma1 = 50.0 * 0.0025;
    let q = symmetric_poisson_center(0.05 * gamma1);
    assert!((shape.factor - q).abs() < 1e-14);
    let r0 = 50.0 * 0.05f64.powi(4) + 49.0 * 0.05f64.powi(3);
    let want = q * r0 * (2.0 * (1.0f64).min(gamma1.powf(-0.5)) + (1.0f64).min(1.0 / gamma1));
    assert!((shape.total - want).abs() < 1e-14, "{} vs {want}", shape.total);
}

#[test]
fn theorem3_single_summand_shape() {
    let jump = SignedMeasure::new([(1.0, 0.5), (2f64.sqrt(), 0.5)]).unwrap();
    let p = 0.3;
    let blocks = [BlockSpec::general_jump(p, jump.clone(), 1, 1.0).unwrap()];
    let h = 0.2;
    let shape = bound_shape(BoundVariant::Theorem3First, &blocks, Some(h), &ShapeOptions::default()).unwrap();
    let q = build_smoothing(SmoothingKind::M3, &blocks, 1e-15).unwrap().concentration(h).unwrap();
    let mu1 = (1.0 + 2f64.sqrt()) / 2.0;
    assert!((shape.factor - q).abs() < 1e-15);
    assert!((shape.total - q * p * p * (mu1 / h + 1.0)).abs() < 1e-14);
}

#[test]
fn roos_hipp_single_summand() {
    let blocks = [BlockSpec::general_jump(0.5, SignedMeasure::dirac(1.0), 1, 1.0).unwrap()];
    let shape = bound_roos_hipp(&blocks, 1e-15).unwrap();
    // H̃ = exp{0.125(δ_1 - δ)}: a closed window of length 1 holds two atoms.
    let q = (-0.125f64).exp() * 1.125;
    let want = PI * PI / 4.0 * (0.25 / 0.5) * q;
    assert!((shape.total - want).abs() < 1e-14);
    assert!((shape.total - 1.22483).abs() < 1e-5);
    assert_eq!(shape.factor, ROOS_HIPP_CONSTANT);

    let exact = block_distribution(&blocks[0]).unwrap();
    let accompanying = SignedMeasure::new([(1.0, 0.5), (0.0, -0.5)]).unwrap().exp(1e-15).unwrap();
    let report = compare(&exact, &accompanying, shape);
    assert!(report.ratio <= 1.0);
    assert_eq!(report.dominated(), Some(true));
}

#[test]
fn roos_hipp_expansion_invariance() {
    let jump = SignedMeasure::new([(0.5, 0.25), (1.7, 0.75)]).unwrap();
    let one = [BlockSpec::general_jump(0.3, jump.clone(), 2, 1.0).unwrap()];
    let two = [
        BlockSpec::general_jump(0.3, jump.clone(), 1, 1.0).unwrap(),
        BlockSpec::general_jump(0.3, jump, 1, 1.0).unwrap(),
    ];
    let a = bound_roos_hipp(&one, 1e-15).unwrap().total;
    let b = bound_roos_hipp(&two, 1e-15).unwrap().total;
    assert!((a - b).abs() <= 1e-14 * a);
}

#[test]
fn magic_factor_unit_blocks() {
    let blocks: Vec<BlockSpec> = (0..100).map(|_| BlockSpec::bernoulli(0.1, 1, 1.0).unwrap()).collect();
    let s = bound_shape(BoundVariant::MagicFactor, &blocks, None, &ShapeOptions::default()).unwrap();
    assert!((s.total - 1.0 / 10f64.sqrt()).abs() < 1e-14);
}

#[test]
fn large_rate_poisson() {
    // e^{-200} alone is far below the prune threshold
    let lambda = 200.0f64;
    let pmf = SignedMeasure::new([(1.0, lambda), (0.0, -lambda)]).unwrap().exp(1e-15).unwrap();
    assert!((pmf.total_mass() - 1.0).abs() < 1e-10);
    for k in [150u32, 190, 200, 230, 260] {
        let log_p = -lambda + k as f64 * lambda.ln() - (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
        assert!((pmf.mass_at(k as f64) - log_p.exp()).abs() < 1e-12, "k={k}");
    }
    assert!(pmf.dropped_mass_bound() < 1e-10);
}
