//! Randomized validator suite. Every family draws from its own ChaCha
//! stream so that changing one family's size leaves the others intact.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cpsmooth_core::approx::{build_accompanying, build_smoothing, smoothing_charfn, SmoothingKind};
use cpsmooth_core::bounds::{
    bound_roos_hipp, charfn_bound, check_conditions, lemma_ac, presman, uniform_grid, CheckKind,
    Quadrature, TheoremId, ValidationRecord,
};
use cpsmooth_core::exact::{weighted_sum_distribution, BlockSpec};
use cpsmooth_core::SignedMeasure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Agreement required between a constructed smoothing measure and its
/// closed-form characteristic function.
pub const SMOOTHING_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSizes {
    pub lemma1: usize,
    pub presman: usize,
    pub glb1: usize,
    pub roos_hipp: usize,
    pub smoothing: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            lemma1: 100,
            presman: 100,
            glb1: 20,
            roos_hipp: 50,
            smoothing: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteEntry {
    pub family: &'static str,
    pub instance: usize,
    pub outcome: Result<ValidationRecord, String>,
}

impl SuiteEntry {
    pub fn is_hard_failure(&self) -> bool {
        match &self.outcome {
            Ok(r) => r.kind == CheckKind::Hard && !r.pass,
            Err(_) => true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn hard_failures(&self) -> usize {
        self.entries.iter().filter(|e| e.is_hard_failure()).count()
    }

    pub fn rows(&self) -> Vec<SuiteRow> {
        self.entries.iter().map(SuiteRow::from).collect()
    }
}

/// Flat CSV form of a suite entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub family: &'static str,
    pub instance: usize,
    pub check: &'static str,
    pub kind: &'static str,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
    pub inputs: String,
    pub error: String,
}

impl From<&SuiteEntry> for SuiteRow {
    fn from(e: &SuiteEntry) -> Self {
        match &e.outcome {
            Ok(r) => SuiteRow {
                family: e.family,
                instance: e.instance,
                check: r.check,
                kind: match r.kind {
                    CheckKind::Hard => "hard",
                    CheckKind::Empirical => "empirical",
                },
                lhs: Some(r.lhs),
                rhs: Some(r.rhs),
                margin: Some(r.margin),
                pass: r.pass,
                inputs: r
                    .inputs
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";"),
                error: String::new(),
            },
            Err(msg) => SuiteRow {
                family: e.family,
                instance: e.instance,
                check: "",
                kind: "hard",
                lhs: None,
                rhs: None,
                margin: None,
                pass: false,
                inputs: String::new(),
                error: msg.clone(),
            },
        }
    }
}

fn stream(seed: u64, family: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(family);
    rng
}

/// Normalized random weights on `k` atoms.
fn random_masses(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|m| m / total).collect()
}

/// Random distribution with up to eight atoms on `[-5, 5]`, on the integers
/// for every other draw.
pub fn random_distribution(rng: &mut ChaCha8Rng) -> SignedMeasure {
    let k = rng.random_range(1..=8);
    let lattice = rng.random_bool(0.5);
    let masses = random_masses(rng, k);
    let atoms = masses.into_iter().map(|m| {
        let x = if lattice {
            rng.random_range(-5i32..=5) as f64
        } else {
            (rng.random_range(-5.0..5.0f64) * 1000.0).round() / 1000.0
        };
        (x, m)
    });
    SignedMeasure::new(atoms.collect::<Vec<_>>()).expect("finite atoms")
}

/// Random signed measure on `{-3, ..., 3}`.
pub fn random_integer_signed(rng: &mut ChaCha8Rng) -> SignedMeasure {
    let mut atoms = Vec::new();
    for k in -3i32..=3 {
        if rng.random_bool(0.7) {
            atoms.push((k as f64, rng.random_range(-1.0..1.0)));
        }
    }
    SignedMeasure::new(atoms).expect("finite atoms")
}

/// Two-runs block satisfying the Theorem 1 hypotheses.
pub fn random_valid_two_runs(rng: &mut ChaCha8Rng) -> BlockSpec {
    loop {
        let p = rng.random_range(0.005..0.05);
        let n = rng.random_range(3..=200);
        let w = rng.random_range(0.5..2.0);
        let b = BlockSpec::two_runs(p, n, w).expect("valid parameters");
        if check_conditions(TheoremId::Theorem1, std::slice::from_ref(&b)).passed() {
            return b;
        }
    }
}

/// One to six single-summand blocks with atomic jump laws on `(0, 5]` and
/// `p <= 1/2`.
pub fn random_roos_hipp_instance(rng: &mut ChaCha8Rng) -> Vec<BlockSpec> {
    let count = rng.random_range(1..=6);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=4);
            let masses = random_masses(rng, k);
            let integer = rng.random_bool(0.5);
            let atoms: Vec<(f64, f64)> = masses
                .into_iter()
                .map(|m| {
                    let x = if integer {
                        rng.random_range(1i32..=5) as f64
                    } else {
                        (rng.random_range(0.05..5.0f64) * 100.0).round() / 100.0
                    };
                    (x, m)
                })
                .collect();
            let jump = SignedMeasure::new(atoms).expect("finite atoms");
            let p = rng.random_range(0.0..=0.5);
            BlockSpec::general_jump(p, jump, 1, 1.0).expect("valid parameters")
        })
        .collect()
}

/// Random block sets for the `M_2` (Bernoulli lattice) or `M_3` (general
/// jump) smoothing measures.
pub fn random_smoothing_blocks(rng: &mut ChaCha8Rng, kind: SmoothingKind) -> Vec<BlockSpec> {
    let count = rng.random_range(1..=3);
    (0..count)
        .map(|_| match kind {
            SmoothingKind::M2 => {
                let p = rng.random_range(0.01..0.9);
                let n = rng.random_range(1..=20);
                let w = rng.random_range(0.5..2.0);
                BlockSpec::bernoulli(p, n, w).expect("valid parameters")
            }
            _ => {
                let k = rng.random_range(1..=3);
                let masses = random_masses(rng, k);
                let atoms: Vec<(f64, f64)> = masses
                    .into_iter()
                    .map(|m| ((rng.random_range(-3.0..3.0f64) * 100.0).round() / 100.0, m))
                    .collect();
                let jump = SignedMeasure::new(atoms).expect("finite atoms");
                let p = rng.random_range(0.0..0.9);
                let n = rng.random_range(1..=10);
                BlockSpec::general_jump(p, jump, n, 1.0).expect("valid parameters")
            }
        })
        .collect()
}

const WINDOWS: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

/// Runs every validator family.
pub fn lemma_suite(seed: u64, sizes: &SuiteSizes, quad: &Quadrature, series_tol: f64) -> SuiteReport {
    let mut entries = Vec::new();

    let mut rng = stream(seed, 1);
    for i in 0..sizes.lemma1 {
        let f = random_distribution(&mut rng);
        let h = WINDOWS[rng.random_range(0..WINDOWS.len())];
        let a = WINDOWS[rng.random_range(0..WINDOWS.len())];
        match lemma_ac(&f, h, a, quad, series_tol) {
            Ok(report) => {
                for r in report.records() {
                    entries.push(SuiteEntry { family: "lemma1", instance: i, outcome: Ok(r.clone()) });
                }
            }
            Err(e) => entries.push(SuiteEntry { family: "lemma1", instance: i, outcome: Err(e.to_string()) }),
        }
    }

    let mut rng = stream(seed, 2);
    for i in 0..sizes.presman {
        let m = random_integer_signed(&mut rng);
        let gamma = [0.5, 1.0, 2.0][i % 3];
        let upsilon = rng.random_range(-3.0..3.0);
        let outcome = presman(&m, gamma, upsilon, quad).map_err(|e| e.to_string());
        entries.push(SuiteEntry { family: "presman", instance: i, outcome });
    }

    let mut rng = stream(seed, 3);
    for i in 0..sizes.glb1 {
        let b = random_valid_two_runs(&mut rng);
        let reach = PI / b.weight;
        let outcome = charfn_bound(&b, &uniform_grid(-reach, reach, 400)).map_err(|e| e.to_string());
        entries.push(SuiteEntry { family: "glb1", instance: i, outcome });
    }

    let mut rng = stream(seed, 4);
    for i in 0..sizes.roos_hipp {
        let blocks = random_roos_hipp_instance(&mut rng);
        entries.push(SuiteEntry { family: "roos-hipp", instance: i, outcome: roos_hipp_check(&blocks, series_tol) });
    }

    let mut rng = stream(seed, 5);
    for i in 0..sizes.smoothing {
        let kind = if i % 2 == 0 { SmoothingKind::M2 } else { SmoothingKind::M3 };
        let blocks = random_smoothing_blocks(&mut rng, kind);
        entries.push(SuiteEntry {
            family: "smoothing-charfn",
            instance: i,
            outcome: smoothing_check(kind, &blocks, series_tol),
        });
    }

    SuiteReport { entries }
}

/// Measured distance to the accompanying law against the explicit bound.
pub fn roos_hipp_check(blocks: &[BlockSpec], series_tol: f64) -> Result<ValidationRecord, String> {
    let exact = weighted_sum_distribution(blocks).map_err(|e| e.to_string())?;
    let approx = build_accompanying(blocks, series_tol).map_err(|e| e.to_string())?;
    let shape = bound_roos_hipp(blocks, series_tol).map_err(|e| e.to_string())?;
    let measured = exact.sub(&approx).kolmogorov_norm();
    let mut inputs = BTreeMap::new();
    inputs.insert("summands", blocks.len() as f64);
    inputs.insert("max_p", blocks.iter().filter_map(|b| b.mixture()).map(|m| m.0).fold(0.0, f64::max));
    Ok(ValidationRecord::hard("roos-hipp", inputs, measured, shape.total))
}

/// Largest deviation between the built smoothing measure's transform and
/// its closed form on a 200-point grid.
pub fn smoothing_check(kind: SmoothingKind, blocks: &[BlockSpec], series_tol: f64) -> Result<ValidationRecord, String> {
    let m = build_smoothing(kind, blocks, series_tol).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for t in uniform_grid(-PI, PI, 200) {
        let want = smoothing_charfn(kind, blocks, t).map_err(|e| e.to_string())?;
        worst = worst.max((m.charfn(t) - want).norm());
    }
    let mut inputs = BTreeMap::new();
    inputs.insert("blocks", blocks.len() as f64);
    inputs.insert("atoms", m.len() as f64);
    Ok(ValidationRecord::hard(
        match kind {
            SmoothingKind::M2 => "m2-charfn",
            _ => "m3-charfn",
        },
        inputs,
        worst,
        SMOOTHING_TOLERANCE,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_deterministic_and_passes() {
        let sizes = SuiteSizes { lemma1: 5, presman: 5, glb1: 2, roos_hipp: 5, smoothing: 4 };
        let a = lemma_suite(7, &sizes, &Quadrature::default(), 1e-15);
        let b = lemma_suite(7, &sizes, &Quadrature::default(), 1e-15);
        assert_eq!(a, b);
        assert_eq!(a.hard_failures(), 0, "{:?}", a.entries.iter().filter(|e| e.is_hard_failure()).collect::<Vec<_>>());
        assert_eq!(a.entries.len(), 5 * 4 + 5 + 2 + 5 + 4);
    }
}
