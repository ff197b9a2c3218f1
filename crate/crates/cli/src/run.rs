//! Grid runs: exact laws, approximants, distances and bound shapes.

use std::collections::{BTreeMap, HashMap};

use cpsmooth_core::approx::{
    build_accompanying, build_franken_second, build_g, build_pi, build_theorem3, Order,
};
use cpsmooth_core::bounds::{
    bound_shape, check_conditions, compare, compare_normal, BoundReport, BoundShape, BoundVariant,
    ShapeOptions,
};
use cpsmooth_core::exact::{weighted_sum_distribution, BlockKind, BlockSpec};
use cpsmooth_core::SignedMeasure;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, GridPoint, Scenario};
use crate::suite::{self, SuiteReport};
use crate::HarnessError;

/// Largest exact-distribution atom count run without `--force`.
pub const ATOM_GUARDRAIL: f64 = 1e7;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub force: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approximant {
    Pi,
    G,
    FrankenSecond,
    Accompanying,
    JumpSecond,
    Normal,
}

impl Approximant {
    pub fn for_variant(v: BoundVariant) -> Self {
        use BoundVariant::*;
        match v {
            Theorem1Pi | Theorem2First | Corollary1 => Approximant::Pi,
            Theorem1G | Naive | Joint => Approximant::G,
            Theorem2Second => Approximant::FrankenSecond,
            Theorem3First | MagicFactor | Az | RoosHipp => Approximant::Accompanying,
            Theorem3Second => Approximant::JumpSecond,
            BerryEsseen => Approximant::Normal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Approximant::Pi => "pi",
            Approximant::G => "g",
            Approximant::FrankenSecond => "franken-second",
            Approximant::Accompanying => "accompanying",
            Approximant::JumpSecond => "jump-second",
            Approximant::Normal => "normal",
        }
    }

    fn build(self, blocks: &[BlockSpec], tol: f64) -> cpsmooth_core::Result<Option<SignedMeasure>> {
        let m = match self {
            Approximant::Pi => build_pi(blocks, tol)?,
            Approximant::G => build_g(blocks, tol)?,
            Approximant::FrankenSecond => build_franken_second(blocks, tol)?,
            Approximant::Accompanying
                if blocks.iter().all(|b| matches!(b.kind, BlockKind::GeneralJump { .. })) =>
            {
                build_theorem3(blocks, Order::First, tol)?
            }
            Approximant::Accompanying => build_accompanying(blocks, tol)?,
            Approximant::JumpSecond => build_theorem3(blocks, Order::Second, tol)?,
            Approximant::Normal => return Ok(None),
        };
        Ok(Some(m))
    }
}

/// One CSV row: a bound variant evaluated at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub grid_id: usize,
    #[serde(rename = "N")]
    pub blocks: usize,
    /// Total number of summands over all blocks.
    pub summands: usize,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub w: Option<f64>,
    pub variant: &'static str,
    pub approximant: &'static str,
    pub h: Option<f64>,
    pub distance: Option<f64>,
    pub factor: Option<f64>,
    pub factor_label: &'static str,
    /// Per-block terms joined with `;`.
    pub breakdown: String,
    pub total: Option<f64>,
    pub ratio: Option<f64>,
    pub conditions_pass: Option<bool>,
    pub failed_conditions: String,
    pub unit_constants: String,
    pub gamma_policy: Option<&'static str>,
    pub reference_only: Option<bool>,
    /// Set for explicit-constant variants: whether `distance <= total`.
    pub dominated: Option<bool>,
    pub error: String,
}

impl ResultRow {
    fn blank(point: &GridPoint, blocks: usize, summands: usize, variant: BoundVariant) -> Self {
        ResultRow {
            grid_id: point.id,
            blocks,
            summands,
            n: point.n,
            p: point.p,
            w: point.w,
            variant: variant.name(),
            approximant: Approximant::for_variant(variant).name(),
            h: None,
            distance: None,
            factor: None,
            factor_label: "",
            breakdown: String::new(),
            total: None,
            ratio: None,
            conditions_pass: None,
            failed_conditions: String::new(),
            unit_constants: String::new(),
            gamma_policy: None,
            reference_only: None,
            dominated: None,
            error: String::new(),
        }
    }

    fn fill_shape(&mut self, shape: &BoundShape) {
        self.h = shape.h;
        self.factor = Some(shape.factor);
        self.factor_label = shape.factor_label;
        self.breakdown = join_terms(shape);
        self.total = Some(shape.total);
        self.unit_constants = shape.constant_policy.unit.join(";");
        self.gamma_policy = shape.gamma_policy.map(|g| match g {
            cpsmooth_core::bounds::GammaPolicy::PerBlock => "per-block",
            cpsmooth_core::bounds::GammaPolicy::Global => "global",
        });
        self.reference_only = Some(shape.reference_only);
    }

    /// Per-block terms parsed back from the `breakdown` column.
    pub fn breakdown_terms(&self) -> Vec<f64> {
        if self.breakdown.is_empty() {
            return Vec::new();
        }
        self.breakdown.split(';').filter_map(|s| s.parse().ok()).collect()
    }
}

fn join_terms(shape: &BoundShape) -> String {
    shape
        .breakdown
        .iter()
        .map(|t| t.value.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridReport {
    pub points: Vec<GridPoint>,
    pub rows: Vec<ResultRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Grid(GridReport),
    Suite(SuiteReport),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub outcome: Outcome,
}

impl RunReport {
    /// Failed hard assertions: explicit-constant bounds that are exceeded
    /// and validator checks with explicit constants.
    pub fn hard_failures(&self) -> usize {
        match &self.outcome {
            Outcome::Grid(g) => g.rows.iter().filter(|r| r.dominated == Some(false)).count(),
            Outcome::Suite(s) => s.hard_failures(),
        }
    }
}

/// Rough atom count of the exact law: lattice blocks with a common weight
/// share a support, everything else multiplies.
pub fn atom_estimate(blocks: &[BlockSpec]) -> f64 {
    let mut spans: HashMap<u64, f64> = HashMap::new();
    let mut product = 1.0f64;
    for b in blocks {
        let n = b.length as f64;
        let span = match &b.kind {
            BlockKind::TwoRuns { .. } => n,
            BlockKind::IidLattice { pmf } => n * pmf.len().saturating_sub(1) as f64,
            BlockKind::LatentDriver(d) => {
                let top = d.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                n * top
            }
            BlockKind::GeneralJump { jump, .. } => {
                // compositions of n summands over k + 1 outcomes
                let k = jump.len() as f64;
                let mut c = 1.0f64;
                for i in 0..jump.len() {
                    c *= (n + k - i as f64) / (i as f64 + 1.0);
                }
                product *= c.max(1.0);
                continue;
            }
        };
        *spans.entry(b.weight.to_bits()).or_insert(0.0) += span;
    }
    spans.values().map(|s| s + 1.0).product::<f64>() * product
}

/// Runs the experiment. Grid points are evaluated in parallel; rows come
/// back in grid order.
pub fn run(config: &ExperimentConfig, opts: RunOptions) -> Result<RunReport, HarnessError> {
    if config.scenario == Scenario::LemmaSuite {
        let report = suite::lemma_suite(config.seed, &suite::SuiteSizes::default(), &config.quadrature, config.series_tol);
        return Ok(RunReport {
            scenario: config.scenario,
            seed: config.seed,
            outcome: Outcome::Suite(report),
        });
    }
    let points = config.grid.points();
    if !opts.force {
        for point in &points {
            if let Ok(blocks) = config.blocks_at(point) {
                let estimate = atom_estimate(&blocks);
                if estimate > ATOM_GUARDRAIL {
                    return Err(HarnessError::Guardrail {
                        id: point.id,
                        estimate,
                        limit: ATOM_GUARDRAIL,
                    });
                }
            }
        }
    }
    let rows: Vec<Vec<ResultRow>> = points.par_iter().map(|p| evaluate_point(config, p, true)).collect();
    Ok(RunReport {
        scenario: config.scenario,
        seed: config.seed,
        outcome: Outcome::Grid(GridReport {
            points,
            rows: rows.into_iter().flatten().collect(),
        }),
    })
}

/// Bound shapes only, without exact laws or approximants.
pub fn shapes(config: &ExperimentConfig) -> Result<GridReport, HarnessError> {
    if config.scenario == Scenario::LemmaSuite {
        return Err(HarnessError::Config("the lemma suite has no bound shapes".into()));
    }
    let points = config.grid.points();
    let rows: Vec<Vec<ResultRow>> = points.par_iter().map(|p| evaluate_point(config, p, false)).collect();
    Ok(GridReport {
        points,
        rows: rows.into_iter().flatten().collect(),
    })
}

fn evaluate_point(config: &ExperimentConfig, point: &GridPoint, with_distances: bool) -> Vec<ResultRow> {
    let fail_all = |blocks: usize, summands: usize, msg: String| -> Vec<ResultRow> {
        config
            .variants
            .iter()
            .map(|&v| {
                let mut row = ResultRow::blank(point, blocks, summands, v);
                row.error = msg.clone();
                row
            })
            .collect()
    };
    let blocks = match config.blocks_at(point) {
        Ok(b) => b,
        Err(e) => return fail_all(point.blocks.unwrap_or(config.blocks.len()), 0, e.to_string()),
    };
    let summands: usize = blocks.iter().map(|b| b.length).sum();
    let exact = if with_distances {
        match weighted_sum_distribution(&blocks) {
            Ok(m) => Some(m),
            Err(e) => return fail_all(blocks.len(), summands, format!("exact law: {e}")),
        }
    } else {
        None
    };

    let opts = ShapeOptions {
        gamma_policy: config.gamma_policy,
        series_tol: config.series_tol,
    };
    let h = config.h_policy.resolve();
    let mut approximants: BTreeMap<&'static str, Result<Option<SignedMeasure>, String>> = BTreeMap::new();
    let mut rows = Vec::with_capacity(config.variants.len());
    for &variant in &config.variants {
        let mut row = ResultRow::blank(point, blocks.len(), summands, variant);
        if let Some(theorem) = variant.theorem() {
            let report = check_conditions(theorem, &blocks);
            row.conditions_pass = Some(report.passed());
            row.failed_conditions = report
                .failures()
                .map(|r| format!("{}:{}", r.block, r.name))
                .collect::<Vec<_>>()
                .join(";");
        }
        let shape = match bound_shape(variant, &blocks, h, &opts) {
            Ok(s) => s,
            Err(e) => {
                row.error = format!("shape: {e}");
                rows.push(row);
                continue;
            }
        };
        row.fill_shape(&shape);
        if let Some(exact) = &exact {
            let kind = Approximant::for_variant(variant);
            let built = approximants
                .entry(kind.name())
                .or_insert_with(|| kind.build(&blocks, config.series_tol).map_err(|e| e.to_string()));
            let report: Result<BoundReport, String> = match built {
                Ok(Some(approx)) => Ok(compare(exact, approx, shape)),
                Ok(None) => compare_normal(exact, shape).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            match report {
                Ok(r) => {
                    row.distance = Some(r.measured_distance);
                    row.ratio = Some(r.ratio);
                    row.dominated = r.dominated();
                }
                Err(e) => row.error = format!("approximant {}: {e}", kind.name()),
            }
        }
        rows.push(row);
    }
    rows
}

/// x coordinate used for slope fits: the `n` axis value when the grid has
/// one, otherwise the total number of summands.
pub fn slope_x(row: &ResultRow) -> f64 {
    row.n.unwrap_or(row.summands) as f64
}

/// Least-squares slope of `ln y` against `ln x` over points with positive
/// finite coordinates; `None` with fewer than two distinct x values.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let k = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [50.0, 100.0, 200.0, 400.0].iter().map(|&n: &f64| (n, 3.0 / n.sqrt())).collect();
        assert!((loglog_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(1.0, 1.0)]), None);
        assert_eq!(loglog_slope(&[(2.0, 1.0), (2.0, 3.0)]), None);
    }

    #[test]
    fn estimate_shares_lattice() {
        let blocks: Vec<BlockSpec> = (0..100).map(|_| BlockSpec::bernoulli(0.1, 1, 1.0).unwrap()).collect();
        assert_eq!(atom_estimate(&blocks), 101.0);
        let two = [
            BlockSpec::two_runs(0.1, 10, 1.0).unwrap(),
            BlockSpec::two_runs(0.1, 20, 2f64.sqrt()).unwrap(),
        ];
        assert_eq!(atom_estimate(&two), 11.0 * 21.0);
    }
}
