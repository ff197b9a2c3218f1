//! Exact laws and moment summaries of weighted blocks `w_m S_m`.
//!
//! A block is `n_m` summands `X_{m1}, ..., X_{m n_m}` scaled by `w_m`. The
//! summands are either i.i.d. (lattice pmf, or a Bernoulli mixture with a
//! general jump law) or 1-dependent through a latent driver:
//! `X_k = f(η_k, η_{k+1})` with i.i.d. finite-support drivers `η`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::measure::SignedMeasure;
use crate::{Error, Result};

/// Tolerance for "sums to one" checks on user-supplied laws.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// I.i.d. driver law with a link table `f(a, b)` over driver indices.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentDriver {
    values: Vec<f64>,
    probs: Vec<f64>,
    /// Row-major `|support| x |support|` table of `f(values[i], values[j])`.
    link: Vec<u32>,
}

impl LatentDriver {
    /// Tabulates `link` over the driver support.
    pub fn new<F>(values: Vec<f64>, probs: Vec<f64>, link: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> u32,
    {
        let table = values
            .iter()
            .flat_map(|&a| values.iter().map(move |&b| (a, b)))
            .map(|(a, b)| link(a, b))
            .collect();
        Self::from_table(values, probs, table)
    }

    /// `table` is row-major: entry `i * len + j` is `f(values[i], values[j])`.
    pub fn from_table(values: Vec<f64>, probs: Vec<f64>, table: Vec<u32>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::input("driver support and probabilities must be non-empty and of equal length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite driver value"));
        }
        check_pmf(&probs, "driver")?;
        if table.len() != values.len() * values.len() {
            return Err(Error::input(format!(
                "link table has {} entries, expected {}",
                table.len(),
                values.len() * values.len()
            )));
        }
        Ok(LatentDriver {
            values,
            probs,
            link: table,
        })
    }

    /// Bernoulli(p) driver with `f(a, b) = a b`.
    pub fn two_runs(p: f64) -> Result<Self> {
        check_probability(p)?;
        Self::from_table(vec![0.0, 1.0], vec![1.0 - p, p], vec![0, 0, 0, 1])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn link(&self, from: usize, to: usize) -> u32 {
        self.link[from * self.values.len() + to]
    }

    fn max_link(&self) -> u32 {
        self.link.iter().copied().max().unwrap_or(0)
    }
}

/// How the summands of a block are generated.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockKind {
    /// I.i.d. summands with `P(X = k) = pmf[k]`.
    IidLattice { pmf: Vec<f64> },
    /// 1-dependent summands `X_k = f(η_k, η_{k+1})`.
    LatentDriver(LatentDriver),
    /// `X_k = η_k η_{k+1}` with Bernoulli(p) drivers.
    TwoRuns { p: f64 },
    /// I.i.d. summands with law `(1 - p) δ + p B`.
    GeneralJump { p: f64, jump: SignedMeasure },
}

/// One weighted block `w S`, `S = X_1 + ... + X_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpec {
    pub weight: f64,
    pub length: usize,
    pub kind: BlockKind,
}

impl BlockSpec {
    pub fn new(kind: BlockKind, length: usize, weight: f64) -> Result<Self> {
        let spec = BlockSpec {
            weight,
            length,
            kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn iid_lattice(pmf: Vec<f64>, length: usize, weight: f64) -> Result<Self> {
        Self::new(BlockKind::IidLattice { pmf }, length, weight)
    }

    pub fn bernoulli(p: f64, length: usize, weight: f64) -> Result<Self> {
        check_probability(p)?;
        Self::iid_lattice(vec![1.0 - p, p], length, weight)
    }

    pub fn two_runs(p: f64, length: usize, weight: f64) -> Result<Self> {
        Self::new(BlockKind::TwoRuns { p }, length, weight)
    }

    pub fn latent(driver: LatentDriver, length: usize, weight: f64) -> Result<Self> {
        Self::new(BlockKind::LatentDriver(driver), length, weight)
    }

    pub fn general_jump(p: f64, jump: SignedMeasure, length: usize, weight: f64) -> Result<Self> {
        Self::new(BlockKind::GeneralJump { p, jump }, length, weight)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight.is_finite() && self.weight != 0.0) {
            return Err(Error::input(format!("block weight must be finite and nonzero, got {}", self.weight)));
        }
        if self.length == 0 {
            return Err(Error::input("block length must be at least 1"));
        }
        match &self.kind {
            BlockKind::IidLattice { pmf } => check_pmf(pmf, "summand"),
            BlockKind::LatentDriver(_) => Ok(()),
            BlockKind::TwoRuns { p } => check_probability(*p),
            BlockKind::GeneralJump { p, jump } => {
                check_probability(*p)?;
                if !jump.is_distribution(PMF_TOLERANCE) {
                    return Err(Error::input("jump law must be a probability distribution"));
                }
                Ok(())
            }
        }
    }

    /// True for kinds whose summands are independent.
    pub fn is_independent(&self) -> bool {
        matches!(self.kind, BlockKind::IidLattice { .. } | BlockKind::GeneralJump { .. })
    }

    /// Law of a single (unweighted) summand for the i.i.d. kinds.
    pub fn summand_law(&self) -> Option<SignedMeasure> {
        match &self.kind {
            BlockKind::IidLattice { pmf } => SignedMeasure::from_lattice_pmf(pmf).ok(),
            BlockKind::GeneralJump { p, jump } => Some(bernoulli_mixture(*p, jump)),
            _ => None,
        }
    }

    /// Driver form of the dependent kinds.
    pub fn driver(&self) -> Option<LatentDriver> {
        match &self.kind {
            BlockKind::LatentDriver(d) => Some(d.clone()),
            BlockKind::TwoRuns { p } => LatentDriver::two_runs(*p).ok(),
            _ => None,
        }
    }

    /// Bernoulli-mixture view `(1 - p) δ + p B` of an i.i.d. summand, with
    /// `B` already scaled by the block weight. `None` for dependent kinds.
    pub fn mixture(&self) -> Option<(f64, SignedMeasure)> {
        match &self.kind {
            BlockKind::GeneralJump { p, jump } => {
                Some((*p, jump.scale_support(self.weight).ok()?))
            }
            BlockKind::IidLattice { pmf } => {
                let p = 1.0 - pmf[0];
                if p <= 0.0 {
                    return Some((0.0, SignedMeasure::dirac(self.weight)));
                }
                let jump = SignedMeasure::new(
                    pmf.iter()
                        .enumerate()
                        .skip(1)
                        .map(|(k, &m)| (k as f64 * self.weight, m / p)),
                )
                .ok()?;
                Some((p, jump))
            }
            _ => None,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_pmf(pmf: &[f64], what: &str) -> Result<()> {
    if pmf.is_empty() {
        return Err(Error::input(format!("{what} pmf is empty")));
    }
    if pmf.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::input(format!("{what} pmf has a negative or non-finite mass")));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::input(format!("{what} pmf sums to {total}, not 1")));
    }
    Ok(())
}

fn bernoulli_mixture(p: f64, jump: &SignedMeasure) -> SignedMeasure {
    SignedMeasure::dirac(0.0)
        .scale_mass(1.0 - p)
        .add(&jump.scale_mass(p))
}

/// Exact law of `w_m S_m`.
pub fn block_distribution(spec: &BlockSpec) -> Result<SignedMeasure> {
    spec.validate()?;
    let unweighted = match &spec.kind {
        BlockKind::IidLattice { .. } | BlockKind::GeneralJump { .. } => {
            let single = spec
                .summand_law()
                .ok_or_else(|| Error::input("summand law unavailable"))?;
            single.convolve_power(spec.length as u64)
        }
        BlockKind::LatentDriver(driver) => driver_sum_law(driver, spec.length)?,
        BlockKind::TwoRuns { p } => driver_sum_law(&LatentDriver::two_runs(*p)?, spec.length)?,
    };
    unweighted.scale_support(spec.weight)
}

/// Law of `X_1 + ... + X_n`, `X_k = f(η_k, η_{k+1})`, by a forward pass over
/// (current driver, integer partial sum).
fn driver_sum_law(driver: &LatentDriver, n: usize) -> Result<SignedMeasure> {
    let states = driver.support_len();
    let max_step = driver.max_link() as usize;
    let width = n
        .checked_mul(max_step)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| Error::input("block too long for the partial-sum table"))?;

    let mut current = vec![vec![0.0_f64; width]; states];
    for (s, row) in current.iter_mut().enumerate() {
        row[0] = driver.probs()[s];
    }
    let mut next = vec![vec![0.0_f64; width]; states];
    let mut reach = 0usize;
    for _ in 0..n {
        for row in next.iter_mut() {
            row[..=(reach + max_step).min(width - 1)].fill(0.0);
        }
        for (from, row) in current.iter().enumerate() {
            for (sum, &mass) in row[..=reach].iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                for to in 0..states {
                    let q = driver.probs()[to];
                    if q == 0.0 {
                        continue;
                    }
                    next[to][sum + driver.link(from, to) as usize] += mass * q;
                }
            }
        }
        core::mem::swap(&mut current, &mut next);
        reach = (reach + max_step).min(width - 1);
    }

    let mut pmf = vec![0.0_f64; reach + 1];
    for row in &current {
        for (acc, &m) in pmf.iter_mut().zip(&row[..=reach]) {
            *acc += m;
        }
    }
    SignedMeasure::from_lattice_pmf(&pmf)
}

/// Law of `w_1 S_1 + ... + w_N S_N` for independent blocks.
pub fn weighted_sum_distribution(blocks: &[BlockSpec]) -> Result<SignedMeasure> {
    let (first, rest) = blocks
        .split_first()
        .ok_or_else(|| Error::input("weighted sum needs at least one block"))?;
    let mut law = block_distribution(first)?;
    for block in rest {
        law = law.convolve(&block_distribution(block)?);
    }
    Ok(law)
}

/// Stationary moments of a single summand and of adjacent windows.
///
/// All kinds here are stationary in `k`, so one window evaluation serves
/// every index; boundary effects are applied when the per-index sequences
/// are assembled.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WindowMoments {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    /// `E X_{k-1} X_k`.
    pub pair: f64,
    /// `E X_{k-1}(X_{k-1} - 1) X_k`.
    pub fact_then_plain: f64,
    /// `E X_{k-1} X_k (X_k - 1)`.
    pub plain_then_fact: f64,
    /// `E X_{k-2} X_{k-1} X_k`.
    pub triple: f64,
}

impl WindowMoments {
    fn independent(nu1: f64, nu2: f64, nu3: f64) -> Self {
        WindowMoments {
            nu1,
            nu2,
            nu3,
            pair: nu1 * nu1,
            fact_then_plain: nu2 * nu1,
            plain_then_fact: nu1 * nu2,
            triple: nu1 * nu1 * nu1,
        }
    }
}

/// Per-index factorial and mixed moments of an integer-valued block and the
/// derived scalars `Γ_1`, `Γ_2`, `R_0`, `R_1`.
///
/// Index `i` of each sequence corresponds to summand `k = i + 1`. Terms that
/// reference a summand before the first one are zero.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LatticeMoments {
    pub window: WindowMoments,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub nu3: Vec<f64>,
    /// `Cov(X_{k-1}, X_k)`.
    pub cov_adjacent: Vec<f64>,
    /// `E X_{k-1} X_k`.
    pub pair_moments: Vec<f64>,
    /// `wexp(X_{k-1}(X_{k-1}-1), X_k)`.
    pub wexp_fact_left: Vec<f64>,
    /// `wexp(X_{k-1}, X_k(X_k-1))`.
    pub wexp_fact_right: Vec<f64>,
    /// `E X_{k-2} X_{k-1} X_k`.
    pub triple_moments: Vec<f64>,
    /// `E X_{k-2} · E X_{k-1} X_k`.
    pub lag2_products: Vec<f64>,
    /// `wexp(X_{k-2}, X_{k-1}) · E X_k`.
    pub wexp_lag2: Vec<f64>,
    pub gamma1: f64,
    pub gamma2: f64,
    pub r0: f64,
    pub r1: f64,
}

/// Scalars of an i.i.d. lattice summand law `H`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FrankenMoments {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    /// `ν_1 - ν_1^2 - ν_2`.
    pub lambda: f64,
    /// `ν_1^3 + ν_1 ν_2 + ν_3`.
    pub r1: f64,
}

/// Bernoulli-mixture scalars of an i.i.d. summand `(1 - p) δ + p B`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JumpMoments {
    pub p: f64,
    /// `int |x| B(dx)` of the weighted jump law.
    pub mu1: f64,
    /// `int x B(dx)` of the weighted jump law.
    pub mean: f64,
}

/// All moment-derived scalars of a block.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MomentSummary {
    pub length: usize,
    pub weight: f64,
    /// Present when the summands are nonnegative integers.
    pub lattice: Option<LatticeMoments>,
    /// Present for i.i.d. integer-valued summands.
    pub franken: Option<FrankenMoments>,
    /// Present for i.i.d. summands.
    pub jump: Option<JumpMoments>,
}

impl MomentSummary {
    pub fn lattice(&self) -> Result<&LatticeMoments> {
        self.lattice
            .as_ref()
            .ok_or_else(|| Error::domain("block summands are not nonnegative integers"))
    }

    pub fn franken(&self) -> Result<&FrankenMoments> {
        self.franken
            .as_ref()
            .ok_or_else(|| Error::domain("block is not an i.i.d. lattice block"))
    }

    pub fn jump(&self) -> Result<&JumpMoments> {
        self.jump
            .as_ref()
            .ok_or_else(|| Error::domain("block is not a Bernoulli-mixture block"))
    }
}

#[inline]
fn falling(x: f64, j: u32) -> f64 {
    (0..j).map(|i| x - i as f64).product()
}

fn pmf_factorial_moments(pmf: &[f64]) -> (f64, f64, f64) {
    pmf.iter().enumerate().fold((0.0, 0.0, 0.0), |acc, (k, &m)| {
        let x = k as f64;
        (
            acc.0 + m * falling(x, 1),
            acc.1 + m * falling(x, 2),
            acc.2 + m * falling(x, 3),
        )
    })
}

/// Integer pmf of a measure supported on `{0, 1, 2, ...}`, if it is.
fn integer_pmf(law: &SignedMeasure) -> Option<Vec<f64>> {
    let mut pmf = Vec::new();
    for a in law.atoms() {
        let k = libm::round(a.location);
        if k < 0.0 || (a.location - k).abs() > 1e-9 || k > 1e7 {
            return None;
        }
        let k = k as usize;
        if pmf.len() <= k {
            pmf.resize(k + 1, 0.0);
        }
        pmf[k] += a.mass;
    }
    Some(pmf)
}

fn driver_window_moments(driver: &LatentDriver) -> WindowMoments {
    let s = driver.support_len();
    let p = driver.probs();
    let f = |a: usize, b: usize| driver.link(a, b) as f64;
    let mut w = WindowMoments::default();
    for a in 0..s {
        for b in 0..s {
            let pab = p[a] * p[b];
            let x = f(a, b);
            w.nu1 += pab * falling(x, 1);
            w.nu2 += pab * falling(x, 2);
            w.nu3 += pab * falling(x, 3);
            for c in 0..s {
                let pabc = pab * p[c];
                let y = f(b, c);
                w.pair += pabc * x * y;
                w.fact_then_plain += pabc * falling(x, 2) * y;
                w.plain_then_fact += pabc * x * falling(y, 2);
                for d in 0..s {
                    w.triple += pabc * p[d] * x * y * f(c, d);
                }
            }
        }
    }
    w
}

fn assemble_lattice(w: WindowMoments, n: usize) -> LatticeMoments {
    let at = |k: usize, first: usize, v: f64| if k >= first { v } else { 0.0 };
    let nu1 = vec![w.nu1; n];
    let nu2 = vec![w.nu2; n];
    let nu3 = vec![w.nu3; n];
    let mut cov = Vec::with_capacity(n);
    let mut pair = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    let mut triple = Vec::with_capacity(n);
    let mut lag2 = Vec::with_capacity(n);
    let mut wlag2 = Vec::with_capacity(n);
    for k in 1..=n {
        pair.push(at(k, 2, w.pair));
        cov.push(at(k, 2, w.pair - w.nu1 * w.nu1));
        left.push(at(k, 2, w.fact_then_plain + w.nu2 * w.nu1));
        right.push(at(k, 2, w.plain_then_fact + w.nu1 * w.nu2));
        triple.push(at(k, 3, w.triple));
        lag2.push(at(k, 3, w.nu1 * w.pair));
        wlag2.push(at(k, 3, (w.pair + w.nu1 * w.nu1) * w.nu1));
    }

    let gamma1: f64 = nu1.iter().sum();
    let gamma2 = 0.5 * nu1
        .iter()
        .zip(&nu2)
        .map(|(a, b)| b - a * a)
        .sum::<f64>()
        + cov.iter().sum::<f64>();

    let nu1_at = |k: usize| if k >= 1 { nu1[k - 1] } else { 0.0 };
    let mut r0 = 0.0;
    let mut r1 = 0.0;
    for k in 1..=n {
        let i = k - 1;
        let (v1, v2, v3) = (nu1[i], nu2[i], nu3[i]);
        r0 += v2 + v1 * v1 + pair[i];
        let nu_window = nu1_at(k.saturating_sub(2)) + nu1_at(k - 1) + v1;
        r1 += v1 * v1 * v1
            + v1 * v2
            + v3
            + nu_window * pair[i]
            + left[i]
            + right[i]
            + triple[i]
            + lag2[i]
            + wlag2[i];
    }

    LatticeMoments {
        window: w,
        nu1,
        nu2,
        nu3,
        cov_adjacent: cov,
        pair_moments: pair,
        wexp_fact_left: left,
        wexp_fact_right: right,
        triple_moments: triple,
        lag2_products: lag2,
        wexp_lag2: wlag2,
        gamma1,
        gamma2,
        r0,
        r1,
    }
}

fn franken(nu1: f64, nu2: f64, nu3: f64) -> FrankenMoments {
    FrankenMoments {
        nu1,
        nu2,
        nu3,
        lambda: nu1 - nu1 * nu1 - nu2,
        r1: nu1 * nu1 * nu1 + nu1 * nu2 + nu3,
    }
}

/// Moment summary of a block, filled as far as its kind allows.
pub fn block_moments(spec: &BlockSpec) -> Result<MomentSummary> {
    spec.validate()?;
    let n = spec.length;
    let mut summary = MomentSummary {
        length: n,
        weight: spec.weight,
        lattice: None,
        franken: None,
        jump: None,
    };
    match &spec.kind {
        BlockKind::IidLattice { pmf } => {
            let (v1, v2, v3) = pmf_factorial_moments(pmf);
            summary.lattice = Some(assemble_lattice(WindowMoments::independent(v1, v2, v3), n));
            summary.franken = Some(franken(v1, v2, v3));
        }
        BlockKind::GeneralJump { jump, .. } => {
            let single = spec.summand_law().expect("i.i.d. kind");
            if let Some(pmf) = integer_pmf(&single) {
                let (v1, v2, v3) = pmf_factorial_moments(&pmf);
                summary.lattice =
                    Some(assemble_lattice(WindowMoments::independent(v1, v2, v3), n));
                summary.franken = Some(franken(v1, v2, v3));
            }
            debug_assert!(jump.is_nonnegative());
        }
        BlockKind::LatentDriver(driver) => {
            summary.lattice = Some(assemble_lattice(driver_window_moments(driver), n));
        }
        BlockKind::TwoRuns { p } => {
            let driver = LatentDriver::two_runs(*p)?;
            summary.lattice = Some(assemble_lattice(driver_window_moments(&driver), n));
        }
    }
    if let Some((p, jump)) = spec.mixture() {
        summary.jump = Some(JumpMoments {
            p,
            mu1: jump.abs_first_moment(),
            mean: jump.mean(),
        });
    }
    Ok(summary)
}
