//! Compound Poisson approximants and symmetric smoothing measures.
//!
//! Everything here is an exponential `exp{Σ a_m (J_m - δ) + b_m (J_m - δ)^2}`
//! of a zero-mass measure, built explicitly as a [`SignedMeasure`].

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::exact::{block_moments, BlockKind, BlockSpec, PMF_TOLERANCE};
use crate::measure::SignedMeasure;
use crate::{Error, Result};

/// Default truncation tolerance for measure exponentials.
pub const DEFAULT_SERIES_TOL: f64 = 1e-15;

/// Rate of `M_1` relative to `Γ_1` (jump `½(δ_w + δ_{-w})`).
const M1_RATE: f64 = 0.05;

/// One summand `a (J - δ) + b (J - δ)^2` of an exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct CpComponent {
    pub rate_linear: f64,
    pub rate_quadratic: f64,
    pub jump: SignedMeasure,
}

impl CpComponent {
    pub fn linear(rate: f64, jump: SignedMeasure) -> Self {
        CpComponent {
            rate_linear: rate,
            rate_quadratic: 0.0,
            jump,
        }
    }

    pub fn new(rate_linear: f64, rate_quadratic: f64, jump: SignedMeasure) -> Self {
        CpComponent {
            rate_linear,
            rate_quadratic,
            jump,
        }
    }
}

/// `Σ a (J - δ) + b (J - δ)^2`, with the square expanded to `J^2 - 2J + δ`.
pub fn exponent(components: &[CpComponent]) -> Result<SignedMeasure> {
    let origin = SignedMeasure::dirac(0.0);
    let mut acc = SignedMeasure::zero();
    for (i, c) in components.iter().enumerate() {
        if !(c.rate_linear.is_finite() && c.rate_quadratic.is_finite()) {
            return Err(Error::input(format!("component {i} has a non-finite rate")));
        }
        if !c.jump.is_distribution(PMF_TOLERANCE) {
            return Err(Error::input(format!("component {i} jump is not a probability distribution")));
        }
        let centered = c.jump.sub(&origin);
        acc = acc.add(&centered.scale_mass(c.rate_linear));
        if c.rate_quadratic != 0.0 {
            acc = acc.add(&centered.convolve(&centered).scale_mass(c.rate_quadratic));
        }
    }
    Ok(acc)
}

/// `exp` of the exponent built from `components`.
pub fn compound_poisson(components: &[CpComponent], series_tol: f64) -> Result<SignedMeasure> {
    exponent(components)?.exp(series_tol)
}

/// Components of `Π`: rate `Γ_{m1}`, jump `δ_{w_m}`.
pub fn pi_components(blocks: &[BlockSpec]) -> Result<Vec<CpComponent>> {
    blocks
        .iter()
        .map(|b| {
            let m = block_moments(b)?;
            Ok(CpComponent::linear(m.lattice()?.gamma1, SignedMeasure::dirac(b.weight)))
        })
        .collect()
}

/// Components of `G`: rates `Γ_{m1}` and `Γ_{m2}`, jump `δ_{w_m}`.
pub fn g_components(blocks: &[BlockSpec]) -> Result<Vec<CpComponent>> {
    blocks
        .iter()
        .map(|b| {
            let m = block_moments(b)?;
            let lat = m.lattice()?;
            Ok(CpComponent::new(lat.gamma1, lat.gamma2, SignedMeasure::dirac(b.weight)))
        })
        .collect()
}

pub fn build_pi(blocks: &[BlockSpec], series_tol: f64) -> Result<SignedMeasure> {
    compound_poisson(&pi_components(blocks)?, series_tol)
}

pub fn build_g(blocks: &[BlockSpec], series_tol: f64) -> Result<SignedMeasure> {
    compound_poisson(&g_components(blocks)?, series_tol)
}

fn require_iid_lattice(b: &BlockSpec, i: usize) -> Result<()> {
    match b.kind {
        BlockKind::IidLattice { .. } => Ok(()),
        _ => Err(Error::domain(format!("block {i} is not an i.i.d. lattice block"))),
    }
}

fn require_general_jump(b: &BlockSpec, i: usize) -> Result<()> {
    match b.kind {
        BlockKind::GeneralJump { .. } => Ok(()),
        _ => Err(Error::domain(format!("block {i} is not a general-jump block"))),
    }
}

/// Components of the second-order lattice approximant: rates
/// `n ν_1` and `n (ν_2 - ν_1^2) / 2`, jump `δ_w`.
pub fn franken_second_components(blocks: &[BlockSpec]) -> Result<Vec<CpComponent>> {
    blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            require_iid_lattice(b, i)?;
            let f = *block_moments(b)?.franken()?;
            let n = b.length as f64;
            Ok(CpComponent::new(
                n * f.nu1,
                n * (f.nu2 - f.nu1 * f.nu1) / 2.0,
                SignedMeasure::dirac(b.weight),
            ))
        })
        .collect()
}

pub fn build_franken_second(blocks: &[BlockSpec], series_tol: f64) -> Result<SignedMeasure> {
    compound_poisson(&franken_second_components(blocks)?, series_tol)
}

/// Order of the accompanying approximation for Bernoulli-mixture blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Order {
    First,
    Second,
}

/// Components `n p (B - δ)` and, for the second order, `-(n/2) p^2 (B - δ)^2`.
/// `B` is taken after scaling by the block weight.
pub fn jump_components(blocks: &[BlockSpec], order: Order) -> Result<Vec<CpComponent>> {
    blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            require_general_jump(b, i)?;
            mixture_component(b, order)
        })
        .collect()
}

fn mixture_component(b: &BlockSpec, order: Order) -> Result<CpComponent> {
    let (p, jump) = b
        .mixture()
        .ok_or_else(|| Error::domain("block has no Bernoulli-mixture form"))?;
    let n = b.length as f64;
    let quadratic = match order {
        Order::First => 0.0,
        Order::Second => -n * p * p / 2.0,
    };
    Ok(CpComponent::new(n * p, quadratic, jump))
}

pub fn build_theorem3(blocks: &[BlockSpec], order: Order, series_tol: f64) -> Result<SignedMeasure> {
    compound_poisson(&jump_components(blocks, order)?, series_tol)
}

/// Accompanying first-order approximant `exp{Σ n p (B - δ)}` for any block
/// with a Bernoulli-mixture form (i.i.d. lattice or general jump).
pub fn build_accompanying(blocks: &[BlockSpec], series_tol: f64) -> Result<SignedMeasure> {
    let comps = blocks
        .iter()
        .map(|b| mixture_component(b, Order::First))
        .collect::<Result<Vec<_>>>()?;
    compound_poisson(&comps, series_tol)
}

/// Symmetric smoothing measures attached to the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SmoothingKind {
    /// `exp{0.025 Σ Γ_{m1}(δ_{w_m} + δ_{-w_m} - 2δ)}`.
    M1,
    /// Transform `exp{-Σ n λ sin^2(t w / 2)}`.
    M2,
    /// Transform `exp{Σ n p (1 - p) (Re B̂(t) - 1) / 2}`.
    M3,
    /// `exp{Σ n p (1 - p) (B - δ) / 2}`; not symmetric.
    HTilde,
}

/// `½(J + reflect(J))`.
pub fn symmetrize(jump: &SignedMeasure) -> SignedMeasure {
    jump.add(&jump.reflect()).scale_mass(0.5)
}

fn two_point(w: f64) -> SignedMeasure {
    symmetrize(&SignedMeasure::dirac(w))
}

/// Exponent components of a smoothing measure.
pub fn smoothing_components(kind: SmoothingKind, blocks: &[BlockSpec]) -> Result<Vec<CpComponent>> {
    blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let n = b.length as f64;
            match kind {
                SmoothingKind::M1 => {
                    let gamma1 = block_moments(b)?.lattice()?.gamma1;
                    Ok(CpComponent::linear(M1_RATE * gamma1, two_point(b.weight)))
                }
                SmoothingKind::M2 => {
                    require_iid_lattice(b, i)?;
                    let lambda = block_moments(b)?.franken()?.lambda;
                    if !(lambda > 0.0) {
                        return Err(Error::domain(format!(
                            "block {i} violates the Franken condition (lambda = {lambda})"
                        )));
                    }
                    Ok(CpComponent::linear(n * lambda / 2.0, two_point(b.weight)))
                }
                SmoothingKind::M3 => {
                    require_general_jump(b, i)?;
                    let (p, jump) = b.mixture().expect("general jump has a mixture form");
                    Ok(CpComponent::linear(n * p * (1.0 - p) / 2.0, symmetrize(&jump)))
                }
                SmoothingKind::HTilde => {
                    let (p, jump) = b.mixture().ok_or_else(|| {
                        Error::domain(format!("block {i} has no Bernoulli-mixture form"))
                    })?;
                    Ok(CpComponent::linear(n * p * (1.0 - p) / 2.0, jump))
                }
            }
        })
        .collect()
}

pub fn build_smoothing(kind: SmoothingKind, blocks: &[BlockSpec], series_tol: f64) -> Result<SignedMeasure> {
    compound_poisson(&smoothing_components(kind, blocks)?, series_tol)
}

/// Closed-form transform of a smoothing measure, evaluated directly from
/// the block parameters (independent of the series construction).
pub fn smoothing_charfn(kind: SmoothingKind, blocks: &[BlockSpec], t: f64) -> Result<Complex64> {
    let mut log = Complex64::new(0.0, 0.0);
    for (i, b) in blocks.iter().enumerate() {
        let n = b.length as f64;
        let w = b.weight;
        match kind {
            SmoothingKind::M1 => {
                let gamma1 = block_moments(b)?.lattice()?.gamma1;
                log += 0.025 * gamma1 * (2.0 * libm::cos(t * w) - 2.0);
            }
            SmoothingKind::M2 => {
                require_iid_lattice(b, i)?;
                let lambda = block_moments(b)?.franken()?.lambda;
                let s = libm::sin(t * w / 2.0);
                log -= n * lambda * s * s;
            }
            SmoothingKind::M3 => {
                require_general_jump(b, i)?;
                let (p, jump) = b.mixture().expect("general jump has a mixture form");
                log += 0.5 * n * p * (1.0 - p) * (jump.charfn(t).re - 1.0);
            }
            SmoothingKind::HTilde => {
                let (p, jump) = b
                    .mixture()
                    .ok_or_else(|| Error::domain(format!("block {i} has no Bernoulli-mixture form")))?;
                log += (jump.charfn(t) - 1.0) * (n * p * (1.0 - p) / 2.0);
            }
        }
    }
    Ok(log.exp())
}
