//! Hypothesis checks, bound right-hand sides and distance comparisons.
//!
//! Bounds whose absolute constants are not known are evaluated with those
//! constants set to one; [`ConstantPolicy`] records which constants were
//! replaced and which are explicit. Every shape is reported as
//! `total = factor * Σ breakdown`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::approx::{build_smoothing, SmoothingKind};
use crate::exact::{block_distribution, block_moments, BlockKind, BlockSpec, MomentSummary};
use crate::measure::SignedMeasure;
use crate::{Error, Result};

mod quadrature;
mod validate;

pub use quadrature::Quadrature;
pub use validate::{
    charfn_bound, lemma_ac, presman, uniform_grid, CheckKind, LemmaAcReport, ValidationRecord,
    CHARFN_DECAY, ROUNDING_SLACK,
};

/// `π² / 4`, the explicit constant of the Roos–Hipp bound.
pub const ROOS_HIPP_CONSTANT: f64 = PI * PI / 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TheoremId {
    /// 1-dependent lattice blocks, approximants `Π` and `G`.
    Theorem1,
    /// I.i.d. lattice blocks under the Franken condition.
    Theorem2,
    /// I.i.d. Bernoulli-mixture blocks with general jumps.
    Theorem3,
    /// Nonnegative jumps with explicit constant.
    RoosHipp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Relation {
    #[cfg_attr(feature = "serde", serde(rename = "<="))]
    Le,
    #[cfg_attr(feature = "serde", serde(rename = "<"))]
    Lt,
    #[cfg_attr(feature = "serde", serde(rename = ">"))]
    Gt,
    #[cfg_attr(feature = "serde", serde(rename = ">="))]
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConditionRecord {
    pub block: usize,
    pub name: &'static str,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl ConditionRecord {
    fn new(block: usize, name: &'static str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        ConditionRecord {
            block,
            name,
            relation,
            lhs,
            rhs,
            pass: relation.holds(lhs, rhs),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConditionReport {
    pub theorem: TheoremId,
    pub records: Vec<ConditionRecord>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

/// Evaluates every hypothesis of `theorem` on `blocks`. Failures are
/// reported as records, never as errors.
pub fn check_conditions(theorem: TheoremId, blocks: &[BlockSpec]) -> ConditionReport {
    let mut records = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        let moments = match block_moments(b) {
            Ok(m) => m,
            Err(_) => {
                records.push(ConditionRecord::new(i, "valid block", 0.0, Relation::Gt, 0.0));
                continue;
            }
        };
        match theorem {
            TheoremId::Theorem1 => theorem1_conditions(i, &moments, &mut records),
            TheoremId::Theorem2 => {
                let iid = matches!(b.kind, BlockKind::IidLattice { .. });
                records.push(ConditionRecord::new(i, "i.i.d. lattice summands", iid as u8 as f64, Relation::Gt, 0.0));
                if let Some(f) = moments.franken {
                    records.push(ConditionRecord::new(i, "lambda = nu1 - nu1^2 - nu2 > 0", f.lambda, Relation::Gt, 0.0));
                    records.push(ConditionRecord::new(i, "nu3 finite", f.nu3, Relation::Lt, f64::INFINITY));
                }
            }
            TheoremId::Theorem3 => {
                let jump = matches!(b.kind, BlockKind::GeneralJump { .. });
                records.push(ConditionRecord::new(i, "general-jump summands", jump as u8 as f64, Relation::Gt, 0.0));
                if let Some(j) = moments.jump {
                    records.push(ConditionRecord::new(i, "p >= 0", j.p, Relation::Ge, 0.0));
                    records.push(ConditionRecord::new(i, "p < 1", j.p, Relation::Lt, 1.0));
                    records.push(ConditionRecord::new(i, "mu1 finite", j.mu1, Relation::Lt, f64::INFINITY));
                }
            }
            TheoremId::RoosHipp => {
                match b.mixture() {
                    Some((p, jump)) => {
                        let lowest = jump.atoms().first().map_or(f64::INFINITY, |a| a.location);
                        records.push(ConditionRecord::new(i, "jump law on (0, inf)", lowest, Relation::Gt, 0.0));
                        records.push(ConditionRecord::new(i, "p < 1", p, Relation::Lt, 1.0));
                    }
                    None => records.push(ConditionRecord::new(i, "independent Bernoulli-mixture summands", 0.0, Relation::Gt, 0.0)),
                }
            }
        }
    }
    ConditionReport { theorem, records }
}

fn theorem1_conditions(i: usize, m: &MomentSummary, records: &mut Vec<ConditionRecord>) {
    let Some(lat) = m.lattice.as_ref() else {
        records.push(ConditionRecord::new(i, "nonnegative integer summands", 0.0, Relation::Gt, 0.0));
        return;
    };
    let max_nu1 = lat.nu1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst_nu2 = lat
        .nu2
        .iter()
        .zip(&lat.nu1)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_nu3 = lat.nu3.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum_nu2: f64 = lat.nu2.iter().sum();
    let sum_cov: f64 = lat.cov_adjacent.iter().map(|c| c.abs()).sum();
    records.push(ConditionRecord::new(i, "max nu1(k) <= 1/100", max_nu1, Relation::Le, 0.01));
    records.push(ConditionRecord::new(i, "max nu2(k) - nu1(k) <= 0", worst_nu2, Relation::Le, 0.0));
    records.push(ConditionRecord::new(i, "nu3 finite", max_nu3, Relation::Lt, f64::INFINITY));
    records.push(ConditionRecord::new(i, "sum nu2 <= Gamma1/20", sum_nu2, Relation::Le, lat.gamma1 / 20.0));
    records.push(ConditionRecord::new(i, "sum |Cov| <= Gamma1/20", sum_cov, Relation::Le, lat.gamma1 / 20.0));
}

/// Bound right-hand sides that can be evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BoundVariant {
    /// `Q(M_1,h) Σ R_{m0} {w/h min(1, Γ^{-1/2}) + min(1, Γ^{-1})}` against `Π`.
    Theorem1Pi,
    /// `Q(M_1,h) Σ R_{m1} {w/h min(1, Γ^{-1}) + min(1, Γ^{-3/2})}` against `G`.
    Theorem1G,
    Theorem2First,
    Theorem2Second,
    Theorem3First,
    Theorem3Second,
    /// `(Σ n p)^{-1/2} Σ min(n p^2, √n p^{3/2})` for Bernoulli blocks.
    Corollary1,
    /// Triangle-inequality shape `Σ p_m / √n_m` for two-runs blocks.
    Naive,
    /// Smoothed two-runs shape `Σ p_m^2 / √(Σ n_m p_m^2)`.
    Joint,
    /// `Σ n p^2 (Σ n p)^{-1/2}`.
    MagicFactor,
    /// `π²/4 Σ p^2/(1-p) Q(H̃, μ)`, explicit constant.
    RoosHipp,
    /// `Σ β_3 / (Σ σ^2)^{3/2}` against the normal law.
    BerryEsseen,
    /// `min(Σ p^2, max p)`, no smoothing.
    Az,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 13] = [
        BoundVariant::Theorem1Pi,
        BoundVariant::Theorem1G,
        BoundVariant::Theorem2First,
        BoundVariant::Theorem2Second,
        BoundVariant::Theorem3First,
        BoundVariant::Theorem3Second,
        BoundVariant::Corollary1,
        BoundVariant::Naive,
        BoundVariant::Joint,
        BoundVariant::MagicFactor,
        BoundVariant::RoosHipp,
        BoundVariant::BerryEsseen,
        BoundVariant::Az,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::Theorem1Pi => "theorem1-pi",
            BoundVariant::Theorem1G => "theorem1-g",
            BoundVariant::Theorem2First => "theorem2-first",
            BoundVariant::Theorem2Second => "theorem2-second",
            BoundVariant::Theorem3First => "theorem3-first",
            BoundVariant::Theorem3Second => "theorem3-second",
            BoundVariant::Corollary1 => "corollary1",
            BoundVariant::Naive => "naive",
            BoundVariant::Joint => "joint",
            BoundVariant::MagicFactor => "magic-factor",
            BoundVariant::RoosHipp => "roos-hipp",
            BoundVariant::BerryEsseen => "berry-esseen",
            BoundVariant::Az => "az",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    /// Smoothing measure whose concentration function multiplies the sum.
    pub fn smoothing(self) -> Option<SmoothingKind> {
        match self {
            BoundVariant::Theorem1Pi | BoundVariant::Theorem1G => Some(SmoothingKind::M1),
            BoundVariant::Theorem2First | BoundVariant::Theorem2Second => Some(SmoothingKind::M2),
            BoundVariant::Theorem3First | BoundVariant::Theorem3Second => Some(SmoothingKind::M3),
            _ => None,
        }
    }

    /// Theorem whose hypotheses the variant relies on.
    pub fn theorem(self) -> Option<TheoremId> {
        match self {
            BoundVariant::Theorem1Pi | BoundVariant::Theorem1G | BoundVariant::Naive | BoundVariant::Joint => {
                Some(TheoremId::Theorem1)
            }
            BoundVariant::Theorem2First | BoundVariant::Theorem2Second | BoundVariant::Corollary1 => {
                Some(TheoremId::Theorem2)
            }
            BoundVariant::Theorem3First | BoundVariant::Theorem3Second => Some(TheoremId::Theorem3),
            BoundVariant::RoosHipp => Some(TheoremId::RoosHipp),
            _ => None,
        }
    }

    /// True when every constant in the bound is known, so that
    /// `measured <= total` is a hard assertion.
    pub fn is_explicit(self) -> bool {
        matches!(self, BoundVariant::RoosHipp)
    }
}

/// Reading of the bare `Γ_1` in the second term of the Theorem 1 bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum GammaPolicy {
    /// `Γ_{m1}` of the block inside the sum.
    #[default]
    PerBlock,
    /// `Σ_m Γ_{m1}` over all blocks.
    Global,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConstantPolicy {
    /// Constants the bound leaves unspecified, set to one.
    pub unit: Vec<&'static str>,
    /// Constants fixed by the bound itself.
    pub explicit: Vec<(&'static str, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BlockTerm {
    pub block: usize,
    pub value: f64,
}

/// Evaluated right-hand side of a bound.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundShape {
    pub variant: BoundVariant,
    /// Window width used for `Q(M, h)`; `None` for h-free variants.
    pub h: Option<f64>,
    /// Leading factor: `Q(M, h)` for the smoothed variants, otherwise the
    /// variant's common prefactor.
    pub factor: f64,
    pub factor_label: &'static str,
    pub breakdown: Vec<BlockTerm>,
    pub total: f64,
    pub constant_policy: ConstantPolicy,
    pub gamma_policy: Option<GammaPolicy>,
    /// Set when the variant's hypotheses do not cover the blocks and the
    /// value is shown for orientation only.
    pub reference_only: bool,
}

impl BoundShape {
    pub fn breakdown_sum(&self) -> f64 {
        self.breakdown.iter().map(|t| t.value).sum()
    }

    fn assemble(
        variant: BoundVariant,
        h: Option<f64>,
        factor: f64,
        factor_label: &'static str,
        terms: Vec<f64>,
        constant_policy: ConstantPolicy,
    ) -> Self {
        let breakdown: Vec<BlockTerm> = terms
            .into_iter()
            .enumerate()
            .map(|(block, value)| BlockTerm { block, value })
            .collect();
        let sum: f64 = breakdown.iter().map(|t| t.value).sum();
        let total = if sum == 0.0 { 0.0 } else { factor * sum };
        BoundShape {
            variant,
            h,
            factor,
            factor_label,
            breakdown,
            total,
            constant_policy,
            gamma_policy: None,
            reference_only: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeOptions {
    pub gamma_policy: GammaPolicy,
    pub series_tol: f64,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        ShapeOptions {
            gamma_policy: GammaPolicy::PerBlock,
            series_tol: crate::approx::DEFAULT_SERIES_TOL,
        }
    }
}

/// `min_m |w_m| / 2`.
pub fn default_h(blocks: &[BlockSpec]) -> f64 {
    blocks
        .iter()
        .map(|b| b.weight.abs())
        .fold(f64::INFINITY, f64::min)
        / 2.0
}

fn unit(names: &[&'static str]) -> ConstantPolicy {
    ConstantPolicy {
        unit: names.to_vec(),
        explicit: Vec::new(),
    }
}

#[inline]
fn min1(x: f64) -> f64 {
    x.min(1.0)
}

/// `x^{-e}` with `0^{-e} = +inf`, so that `min(1, ·)` saturates.
#[inline]
fn inv_pow(x: f64, e: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else {
        libm::pow(x, -e)
    }
}

fn two_runs_p(b: &BlockSpec, i: usize) -> Result<f64> {
    match b.kind {
        BlockKind::TwoRuns { p } => Ok(p),
        _ => Err(Error::domain(format!("block {i} is not a two-runs block"))),
    }
}

fn bernoulli_p(b: &BlockSpec, i: usize) -> Result<f64> {
    match &b.kind {
        BlockKind::IidLattice { pmf } if pmf.len() <= 2 => Ok(pmf.get(1).copied().unwrap_or(0.0)),
        _ => Err(Error::domain(format!("block {i} is not a Bernoulli block"))),
    }
}

fn mixture_p(b: &BlockSpec, i: usize) -> Result<f64> {
    b.mixture()
        .map(|(p, _)| p)
        .ok_or_else(|| Error::domain(format!("block {i} has no Bernoulli-mixture form")))
}

fn require_window(h: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::input(format!("window width must be positive, got {h}")));
    }
    Ok(h)
}

/// Evaluates the right-hand side of `variant` on `blocks`.
///
/// `h = None` selects [`default_h`]. Hypotheses are not enforced here; use
/// [`check_conditions`] to see whether the bound applies.
pub fn bound_shape(
    variant: BoundVariant,
    blocks: &[BlockSpec],
    h: Option<f64>,
    opts: &ShapeOptions,
) -> Result<BoundShape> {
    if blocks.is_empty() {
        return Err(Error::input("bound shape needs at least one block"));
    }
    let moments = blocks
        .iter()
        .map(block_moments)
        .collect::<Result<Vec<_>>>()?;

    if let Some(kind) = variant.smoothing() {
        let h = require_window(h.unwrap_or_else(|| default_h(blocks)))?;
        let terms = smoothed_terms(variant, blocks, &moments, h, opts.gamma_policy)?;
        let q = build_smoothing(kind, blocks, opts.series_tol)?.concentration(h)?;
        let (label, policy) = match kind {
            SmoothingKind::M1 if variant == BoundVariant::Theorem1Pi => ("Q(M1,h)", unit(&["C2"])),
            SmoothingKind::M1 => ("Q(M1,h)", unit(&["C3"])),
            SmoothingKind::M2 if variant == BoundVariant::Theorem2First => ("Q(M2,h)", unit(&["C4"])),
            SmoothingKind::M2 => ("Q(M2,h)", unit(&["C5"])),
            SmoothingKind::M3 if variant == BoundVariant::Theorem3First => ("Q(M3,h)", unit(&["C8"])),
            _ => ("Q(M3,h)", unit(&["C9"])),
        };
        let mut shape = BoundShape::assemble(variant, Some(h), q, label, terms, policy);
        if kind == SmoothingKind::M1 {
            shape.gamma_policy = Some(opts.gamma_policy);
        }
        return Ok(shape);
    }

    match variant {
        BoundVariant::Corollary1 => {
            let ps = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| bernoulli_p(b, i))
                .collect::<Result<Vec<_>>>()?;
            let mean: f64 = blocks.iter().zip(&ps).map(|(b, p)| b.length as f64 * p).sum();
            let terms = blocks
                .iter()
                .zip(&ps)
                .map(|(b, &p)| {
                    let n = b.length as f64;
                    (n * p * p).min(libm::sqrt(n) * libm::pow(p, 1.5))
                })
                .collect();
            Ok(BoundShape::assemble(variant, None, magic(mean), "(sum n p)^-1/2", terms, unit(&["C"])))
        }
        BoundVariant::Naive => {
            let terms = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| Ok(two_runs_p(b, i)? / libm::sqrt(b.length as f64)))
                .collect::<Result<Vec<_>>>()?;
            Ok(BoundShape::assemble(variant, None, 1.0, "1", terms, unit(&["C"])))
        }
        BoundVariant::Joint => {
            let ps = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| two_runs_p(b, i))
                .collect::<Result<Vec<_>>>()?;
            let spread: f64 = blocks.iter().zip(&ps).map(|(b, p)| b.length as f64 * p * p).sum();
            let terms = ps.iter().map(|p| p * p).collect();
            Ok(BoundShape::assemble(variant, None, magic(spread), "(sum n p^2)^-1/2", terms, unit(&["C"])))
        }
        BoundVariant::MagicFactor => {
            let ps = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| mixture_p(b, i))
                .collect::<Result<Vec<_>>>()?;
            let mean: f64 = blocks.iter().zip(&ps).map(|(b, p)| b.length as f64 * p).sum();
            let terms = blocks.iter().zip(&ps).map(|(b, p)| b.length as f64 * p * p).collect();
            Ok(BoundShape::assemble(variant, None, magic(mean), "(sum n p)^-1/2", terms, unit(&["C"])))
        }
        BoundVariant::Az => {
            let ps = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| mixture_p(b, i))
                .collect::<Result<Vec<_>>>()?;
            let terms: Vec<f64> = blocks.iter().zip(&ps).map(|(b, p)| b.length as f64 * p * p).collect();
            let squares: f64 = terms.iter().sum();
            let largest = ps.iter().copied().fold(0.0, f64::max);
            let factor = if squares > largest { largest / squares } else { 1.0 };
            Ok(BoundShape::assemble(variant, None, factor, "min(1, max p / sum p^2)", terms, unit(&["C"])))
        }
        BoundVariant::BerryEsseen => berry_esseen(blocks),
        BoundVariant::RoosHipp => bound_roos_hipp(blocks, opts.series_tol),
        _ => unreachable!("smoothed variants handled above"),
    }
}

fn magic(x: f64) -> f64 {
    if x > 0.0 {
        1.0 / libm::sqrt(x)
    } else {
        0.0
    }
}

fn smoothed_terms(
    variant: BoundVariant,
    blocks: &[BlockSpec],
    moments: &[MomentSummary],
    h: f64,
    policy: GammaPolicy,
) -> Result<Vec<f64>> {
    match variant {
        BoundVariant::Theorem1Pi | BoundVariant::Theorem1G => {
            let lats = moments
                .iter()
                .map(|m| m.lattice())
                .collect::<Result<Vec<_>>>()?;
            let global: f64 = lats.iter().map(|l| l.gamma1).sum();
            Ok(blocks
                .iter()
                .zip(&lats)
                .map(|(b, lat)| {
                    let ratio = b.weight.abs() / h;
                    let bare = match policy {
                        GammaPolicy::PerBlock => lat.gamma1,
                        GammaPolicy::Global => global,
                    };
                    if variant == BoundVariant::Theorem1Pi {
                        lat.r0 * (ratio * min1(inv_pow(lat.gamma1, 0.5)) + min1(inv_pow(bare, 1.0)))
                    } else {
                        lat.r1 * (ratio * min1(inv_pow(lat.gamma1, 1.0)) + min1(inv_pow(bare, 1.5)))
                    }
                })
                .collect())
        }
        BoundVariant::Theorem2First | BoundVariant::Theorem2Second => blocks
            .iter()
            .zip(moments)
            .enumerate()
            .map(|(i, (b, m))| {
                if !matches!(b.kind, BlockKind::IidLattice { .. }) {
                    return Err(Error::domain(format!("block {i} is not an i.i.d. lattice block")));
                }
                let f = m.franken()?;
                if !(f.lambda > 0.0) {
                    return Err(Error::domain(format!(
                        "block {i}: lambda = {} <= 0, bound divides by lambda",
                        f.lambda
                    )));
                }
                let n = b.length as f64;
                let spread = n * f.lambda;
                let ratio = b.weight.abs() / h;
                let damp = 1.0 + f.nu1 / f.lambda;
                Ok(if variant == BoundVariant::Theorem2First {
                    n * (f.nu2 + f.nu1 * f.nu1)
                        * (ratio * min1(inv_pow(spread, 0.5)) + min1(inv_pow(spread, 1.0)) * damp)
                } else {
                    n * f.r1 * (ratio * min1(inv_pow(spread, 1.0)) + min1(inv_pow(spread, 1.5)) * damp)
                })
            })
            .collect(),
        BoundVariant::Theorem3First | BoundVariant::Theorem3Second => blocks
            .iter()
            .zip(moments)
            .enumerate()
            .map(|(i, (b, m))| {
                if !matches!(b.kind, BlockKind::GeneralJump { .. }) {
                    return Err(Error::domain(format!("block {i} is not a general-jump block")));
                }
                let j = m.jump()?;
                let n = b.length as f64;
                let rate = n * j.p;
                let ratio = j.mu1 / h;
                Ok(if variant == BoundVariant::Theorem3First {
                    n * j.p * j.p * (ratio * min1(inv_pow(rate, 0.5)) + min1(inv_pow(rate, 1.0)))
                } else {
                    n * j.p * j.p * j.p * (ratio * min1(inv_pow(rate, 1.0)) + min1(inv_pow(rate, 1.5)))
                })
            })
            .collect(),
        _ => unreachable!("not a smoothed variant"),
    }
}

/// `Σ β_3 / (Σ σ^2)^{3/2}` over independent components: the individual
/// summands of i.i.d. blocks, whole block laws for dependent blocks (then
/// flagged as reference only).
fn berry_esseen(blocks: &[BlockSpec]) -> Result<BoundShape> {
    let mut variance = 0.0;
    let mut terms = Vec::with_capacity(blocks.len());
    let mut reference_only = false;
    for b in blocks {
        let (law, copies) = match b.summand_law() {
            Some(single) => (single.scale_support(b.weight)?, b.length as f64),
            None => {
                reference_only = true;
                (block_distribution(b)?, 1.0)
            }
        };
        let mean = law.mean();
        let var: f64 = law.atoms().iter().map(|a| a.mass * (a.location - mean) * (a.location - mean)).sum();
        let beta3: f64 = law
            .atoms()
            .iter()
            .map(|a| a.mass * { let d = libm::fabs(a.location - mean); d * d * d })
            .sum();
        variance += copies * var;
        terms.push(copies * beta3);
    }
    let factor = if variance > 0.0 { libm::pow(variance, -1.5) } else { 0.0 };
    let mut shape = BoundShape::assemble(
        BoundVariant::BerryEsseen,
        None,
        factor,
        "(sum sigma^2)^-3/2",
        terms,
        unit(&["C1"]),
    );
    shape.reference_only = reference_only;
    Ok(shape)
}

/// Roos–Hipp bound with its explicit constant. Blocks are expanded into
/// their `n_m` identical summands, so `n_m` multiplies each block term.
pub fn bound_roos_hipp(blocks: &[BlockSpec], series_tol: f64) -> Result<BoundShape> {
    let report = check_conditions(TheoremId::RoosHipp, blocks);
    if let Some(bad) = report.failures().next() {
        return Err(Error::domain(format!(
            "Roos-Hipp hypothesis '{}' fails for block {} ({} vs {})",
            bad.name, bad.block, bad.lhs, bad.rhs
        )));
    }
    let smoothing = build_smoothing(SmoothingKind::HTilde, blocks, series_tol)?;
    let mut terms = Vec::with_capacity(blocks.len());
    for b in blocks {
        let (p, jump) = b.mixture().expect("checked above");
        let n = b.length as f64;
        let term = if p == 0.0 {
            0.0
        } else {
            n * p * p / (1.0 - p) * smoothing.concentration(jump.mean())?
        };
        terms.push(term);
    }
    let policy = ConstantPolicy {
        unit: Vec::new(),
        explicit: vec![("pi^2/4", ROOS_HIPP_CONSTANT)],
    };
    Ok(BoundShape::assemble(
        BoundVariant::RoosHipp,
        None,
        ROOS_HIPP_CONSTANT,
        "pi^2/4",
        terms,
        policy,
    ))
}

/// Measured distance next to a bound.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundReport {
    pub measured_distance: f64,
    pub shape: BoundShape,
    /// `measured / total`; zero when both vanish, infinite when only the
    /// bound does.
    pub ratio: f64,
    pub conditions: Option<ConditionReport>,
}

impl BoundReport {
    pub fn with_conditions(mut self, conditions: ConditionReport) -> Self {
        self.conditions = Some(conditions);
        self
    }

    /// For explicit-constant variants: whether the bound dominates.
    pub fn dominated(&self) -> Option<bool> {
        self.shape
            .variant
            .is_explicit()
            .then_some(self.measured_distance <= self.shape.total)
    }
}

fn ratio(measured: f64, total: f64) -> f64 {
    if total > 0.0 {
        measured / total
    } else if measured == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `||exact - approximant||_K` against `shape`.
pub fn compare(exact: &SignedMeasure, approximant: &SignedMeasure, shape: BoundShape) -> BoundReport {
    let measured = exact.sub(approximant).kolmogorov_norm();
    BoundReport {
        measured_distance: measured,
        ratio: ratio(measured, shape.total),
        shape,
        conditions: None,
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// `sup_x |F(x) - Φ((x - mean)/sd)|` for an atomic law `F`, checking both
/// one-sided limits at every atom.
pub fn kolmogorov_to_normal(law: &SignedMeasure, mean: f64, variance: f64) -> Result<f64> {
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::domain(format!("normal comparison needs positive variance, got {variance}")));
    }
    let sd = libm::sqrt(variance);
    let mut below = 0.0;
    let mut best = 0.0_f64;
    for a in law.atoms() {
        let phi = normal_cdf((a.location - mean) / sd);
        let above = below + a.mass;
        best = best.max((below - phi).abs()).max((above - phi).abs());
        below = above;
    }
    Ok(best)
}

/// Berry–Esseen comparison: the approximant is the normal law with the
/// exact mean and variance.
pub fn compare_normal(exact: &SignedMeasure, shape: BoundShape) -> Result<BoundReport> {
    let mean = exact.mean();
    let variance: f64 = exact
        .atoms()
        .iter()
        .map(|a| a.mass * (a.location - mean) * (a.location - mean))
        .sum();
    let measured = kolmogorov_to_normal(exact, mean, variance)?;
    Ok(BoundReport {
        measured_distance: measured,
        ratio: ratio(measured, shape.total),
        shape,
        conditions: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn theorem1_conditions_two_runs() {
        let pass = check_conditions(TheoremId::Theorem1, &[BlockSpec::two_runs(0.05, 50, 1.0).unwrap()]);
        assert!(pass.passed(), "{pass:?}");
        let cov = pass.records.iter().find(|r| r.name.starts_with("sum |Cov|")).unwrap();
        assert!(close(cov.lhs, 49.0 * (0.05f64.powi(3) - 0.05f64.powi(4)), 1e-15));
        assert!(close(cov.rhs, 6.25e-3, 1e-15));

        let fail = check_conditions(TheoremId::Theorem1, &[BlockSpec::two_runs(0.2, 50, 1.0).unwrap()]);
        assert!(!fail.passed());
        let nu1 = fail.records.iter().find(|r| r.name.starts_with("max nu1")).unwrap();
        assert!(!nu1.pass && close(nu1.lhs, 0.04, 1e-15));
    }

    #[test]
    fn franken_failure_is_reported() {
        // ν_1 = 0.5, ν_2 = 0.3 from pmf {0: 0.65, 1: 0.2, 2: 0.15}
        let b = BlockSpec::iid_lattice(alloc::vec![0.65, 0.2, 0.15], 3, 1.0).unwrap();
        let r = check_conditions(TheoremId::Theorem2, &[b]);
        let lambda = r.records.iter().find(|r| r.name.starts_with("lambda")).unwrap();
        assert!(close(lambda.lhs, -0.05, 1e-15));
        assert!(!r.passed());
    }

    #[test]
    fn corollary1_arithmetic() {
        let blocks = [
            BlockSpec::bernoulli(0.1, 100, 1.0).unwrap(),
            BlockSpec::bernoulli(0.1, 100, 1.0).unwrap(),
        ];
        let s = bound_shape(BoundVariant::Corollary1, &blocks, None, &ShapeOptions::default()).unwrap();
        let want = 2.0 * 0.1_f64.sqrt() / 20.0_f64.sqrt();
        assert!(close(s.total, want, 1e-15));
        assert!(close(s.total, 0.14142, 1e-5));
    }

    #[test]
    fn theorem2_needs_positive_lambda() {
        let b = BlockSpec::iid_lattice(alloc::vec![0.65, 0.2, 0.15], 3, 1.0).unwrap();
        let r = bound_shape(BoundVariant::Theorem2First, &[b], Some(0.5), &ShapeOptions::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn roos_hipp_zero_probability() {
        let b = BlockSpec::general_jump(0.0, SignedMeasure::dirac(1.0), 3, 1.0).unwrap();
        let s = bound_roos_hipp(&[b], 1e-15).unwrap();
        assert_eq!(s.total, 0.0);
    }

    #[test]
    fn roos_hipp_rejects_negative_jumps() {
        let b = BlockSpec::general_jump(0.2, SignedMeasure::dirac(1.0), 3, -1.0).unwrap();
        assert!(matches!(bound_roos_hipp(&[b], 1e-15), Err(Error::Domain(_))));
    }

    #[test]
    fn compare_identical_is_zero() {
        let m = SignedMeasure::new([(0.0, 0.3), (1.0, 0.7)]).unwrap();
        let shape = bound_shape(
            BoundVariant::MagicFactor,
            &[BlockSpec::bernoulli(0.7, 1, 1.0).unwrap()],
            None,
            &ShapeOptions::default(),
        )
        .unwrap();
        let r = compare(&m, &m, shape);
        assert_eq!(r.measured_distance, 0.0);
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn normal_distance_of_symmetric_two_point() {
        let m = SignedMeasure::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let d = kolmogorov_to_normal(&m, 0.0, 1.0).unwrap();
        // largest gap sits just below +1 (or at -1): |0.5 - Φ(1)|.
        assert!(close(d, normal_cdf(1.0) - 0.5, 1e-15));
    }
}
