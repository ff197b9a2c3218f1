//! Finite atomic signed measures on the real line.
//!
//! Every measure keeps its atoms sorted by location. Atoms closer than the
//! relative merge tolerance are combined, atoms whose absolute mass does not
//! exceed the prune threshold are dropped, and the discarded mass is carried
//! along in [`SignedMeasure::dropped_mass_bound`] so that every result comes
//! with a certified total-variation distance to the ideal un-pruned measure.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Relative snap used to merge nearly coincident support points.
pub const DEFAULT_MERGE_TOLERANCE: f64 = 1e-9;
/// Atoms with `|mass|` at or below this are pruned.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-15;
/// Maximum number of terms in a truncated exponential series.
pub const DEFAULT_SERIES_CAP: usize = 10_000;

/// Largest `max(-origin mass, ||V||)` summed directly by `exp`.
const SQUARING_REACH: f64 = 8.0;

/// A point mass.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Atom {
    #[cfg_attr(feature = "serde", serde(rename = "x"))]
    pub location: f64,
    #[cfg_attr(feature = "serde", serde(rename = "m"))]
    pub mass: f64,
}

impl Atom {
    pub const fn new(location: f64, mass: f64) -> Self {
        Atom { location, mass }
    }
}

/// Merge and prune settings of a measure.
///
/// `merge` is relative: two locations `a <= b` are identified when
/// `b - a <= merge * max(1, |a|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub merge: f64,
    pub prune: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            merge: DEFAULT_MERGE_TOLERANCE,
            prune: DEFAULT_PRUNE_THRESHOLD,
        }
    }
}

impl Tolerances {
    pub fn new(merge: f64, prune: f64) -> Result<Self> {
        if !(merge.is_finite() && merge >= 0.0 && prune.is_finite() && prune >= 0.0) {
            return Err(Error::input(format!(
                "tolerances must be finite and nonnegative (merge={merge}, prune={prune})"
            )));
        }
        Ok(Tolerances { merge, prune })
    }

    /// No merging beyond exact equality and no pruning beyond exact zeros.
    pub const fn exact() -> Self {
        Tolerances {
            merge: 0.0,
            prune: 0.0,
        }
    }

    /// Absolute merge radius around `anchor`.
    #[inline]
    pub fn snap(&self, anchor: f64) -> f64 {
        self.merge * anchor.abs().max(1.0)
    }

    fn combine(self, other: Tolerances) -> Tolerances {
        Tolerances {
            merge: self.merge.max(other.merge),
            prune: self.prune.max(other.prune),
        }
    }
}

/// A finite atomic signed measure.
///
/// Measures are immutable values; every operation returns a new measure.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedMeasure {
    atoms: Vec<Atom>,
    tol: Tolerances,
    dropped: f64,
}

impl Default for SignedMeasure {
    fn default() -> Self {
        SignedMeasure::zero()
    }
}

impl SignedMeasure {
    /// Builds a measure from `(location, mass)` pairs, merging and pruning.
    pub fn from_atoms<I>(pairs: I, tol: Tolerances) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let raw: Vec<Atom> = pairs
            .into_iter()
            .map(|(x, m)| Atom::new(x, m))
            .collect();
        if let Some(bad) = raw
            .iter()
            .find(|a| !a.location.is_finite() || !a.mass.is_finite())
        {
            return Err(Error::input(format!(
                "non-finite atom ({}, {})",
                bad.location, bad.mass
            )));
        }
        Ok(Self::build(raw, tol, 0.0))
    }

    /// [`from_atoms`](Self::from_atoms) with default tolerances.
    pub fn new<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        Self::from_atoms(pairs, Tolerances::default())
    }

    /// Masses `pmf[k]` at the integers `k = 0, 1, 2, ...`.
    pub fn from_lattice_pmf(pmf: &[f64]) -> Result<Self> {
        Self::new(pmf.iter().enumerate().map(|(k, &m)| (k as f64, m)))
    }

    /// Reassembles a measure from already normalized parts (e.g. after
    /// deserialization). Nothing is merged or pruned; the invariants are
    /// checked instead so that a round trip is bit-faithful.
    pub fn from_raw_parts(atoms: Vec<Atom>, tol: Tolerances, dropped: f64) -> Result<Self> {
        let tol = Tolerances::new(tol.merge, tol.prune)?;
        if !(dropped.is_finite() && dropped >= 0.0) {
            return Err(Error::input("dropped mass bound must be finite and nonnegative"));
        }
        for a in &atoms {
            if !a.location.is_finite() || !a.mass.is_finite() {
                return Err(Error::input("non-finite atom"));
            }
            if a.mass.abs() <= tol.prune {
                return Err(Error::input(format!(
                    "atom at {} has mass {} within prune threshold",
                    a.location, a.mass
                )));
            }
        }
        for pair in atoms.windows(2) {
            if pair[1].location - pair[0].location <= tol.snap(pair[0].location) {
                return Err(Error::input(format!(
                    "atoms at {} and {} are not separated by the merge tolerance",
                    pair[0].location, pair[1].location
                )));
            }
        }
        Ok(SignedMeasure { atoms, tol, dropped })
    }

    pub fn zero() -> Self {
        SignedMeasure {
            atoms: Vec::new(),
            tol: Tolerances::default(),
            dropped: 0.0,
        }
    }

    /// The unit point mass at `a`.
    pub fn dirac(a: f64) -> Self {
        Self::point(a, 1.0, Tolerances::default())
    }

    fn point(a: f64, mass: f64, tol: Tolerances) -> Self {
        debug_assert!(a.is_finite());
        Self::build(alloc::vec![Atom::new(a, mass)], tol, 0.0)
    }

    fn build(raw: Vec<Atom>, tol: Tolerances, inherited: f64) -> Self {
        let (atoms, pruned) = normalize(raw, tol);
        SignedMeasure {
            atoms,
            tol,
            dropped: inherited + pruned,
        }
    }

    /// Returns the same mass distribution renormalized under new tolerances.
    pub fn with_tolerances(&self, tol: Tolerances) -> Self {
        Self::build(self.atoms.clone(), tol, self.dropped)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Upper bound on the total variation distance to the un-pruned,
    /// un-truncated measure this value stands for.
    pub fn dropped_mass_bound(&self) -> f64 {
        self.dropped
    }

    pub fn locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.location)
    }

    /// `W(R)`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `||W|| = W+(R) + W-(R)`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass.abs()).sum()
    }

    /// `sup_x |W((-inf, x])|`.
    pub fn kolmogorov_norm(&self) -> f64 {
        let mut running = 0.0_f64;
        let mut best = 0.0_f64;
        for a in &self.atoms {
            running += a.mass;
            best = best.max(running.abs());
        }
        best
    }

    /// `W((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let end = self.atoms.partition_point(|a| a.location <= x);
        self.atoms[..end].iter().map(|a| a.mass).sum()
    }

    /// Mass of the atom at `x` (within the merge tolerance), zero if none.
    pub fn mass_at(&self, x: f64) -> f64 {
        let radius = self.tol.snap(x);
        let start = self.atoms.partition_point(|a| a.location < x - radius);
        self.atoms[start..]
            .iter()
            .take_while(|a| a.location <= x + radius)
            .map(|a| a.mass)
            .sum()
    }

    /// `int x W(dx)`.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.location * a.mass).sum()
    }

    /// `int |x| |W|(dx)`.
    pub fn abs_first_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.location.abs() * a.mass.abs())
            .sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.mass >= 0.0)
    }

    /// True when every mass is nonnegative and the total is within `tol` of one.
    pub fn is_distribution(&self, tol: f64) -> bool {
        self.is_nonnegative() && (self.total_mass() - 1.0).abs() <= tol
    }

    /// Pushforward under `x -> w x`.
    pub fn scale_support(&self, w: f64) -> Result<Self> {
        if !w.is_finite() {
            return Err(Error::input(format!("non-finite support scale {w}")));
        }
        let raw = self
            .atoms
            .iter()
            .map(|a| Atom::new(w * a.location + 0.0, a.mass))
            .collect();
        Ok(Self::build(raw, self.tol, self.dropped))
    }

    /// Pushforward under `x -> -x`.
    pub fn reflect(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .rev()
            .map(|a| Atom::new(-a.location + 0.0, a.mass))
            .collect();
        SignedMeasure {
            atoms,
            tol: self.tol,
            dropped: self.dropped,
        }
    }

    /// Multiplies every mass by `c`.
    pub fn scale_mass(&self, c: f64) -> Self {
        let raw = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.location, c * a.mass))
            .collect();
        Self::build(raw, self.tol, c.abs() * self.dropped)
    }

    /// Measure sum.
    pub fn add(&self, other: &SignedMeasure) -> Self {
        let mut raw = Vec::with_capacity(self.len() + other.len());
        raw.extend_from_slice(&self.atoms);
        raw.extend_from_slice(&other.atoms);
        Self::build(raw, self.tol.combine(other.tol), self.dropped + other.dropped)
    }

    /// Measure difference.
    pub fn sub(&self, other: &SignedMeasure) -> Self {
        let mut raw = Vec::with_capacity(self.len() + other.len());
        raw.extend_from_slice(&self.atoms);
        raw.extend(other.atoms.iter().map(|a| Atom::new(a.location, -a.mass)));
        Self::build(raw, self.tol.combine(other.tol), self.dropped + other.dropped)
    }

    /// Convolution product.
    pub fn convolve(&self, other: &SignedMeasure) -> Self {
        let mut raw = Vec::with_capacity(self.len() * other.len());
        for a in &self.atoms {
            for b in &other.atoms {
                raw.push(Atom::new(a.location + b.location + 0.0, a.mass * b.mass));
            }
        }
        let propagated = self.dropped * other.total_variation()
            + other.dropped * self.total_variation()
            + self.dropped * other.dropped;
        let inherited = propagated.max(self.dropped).max(other.dropped);
        Self::build(raw, self.tol.combine(other.tol), inherited)
    }

    /// `n`-fold convolution power by binary exponentiation; `W^0 = δ`.
    pub fn convolve_power(&self, n: u64) -> Self {
        let mut result = Self::point(0.0, 1.0, self.tol);
        if n == 0 {
            return result;
        }
        let mut base = self.clone();
        let mut k = n;
        loop {
            if k & 1 == 1 {
                result = result.convolve(&base);
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.convolve(&base);
        }
        result
    }

    /// `exp{W} = sum_m W^m / m!` with the default term cap.
    pub fn exp(&self, series_tol: f64) -> Result<Self> {
        self.exp_capped(series_tol, DEFAULT_SERIES_CAP)
    }

    /// Truncated measure exponential.
    ///
    /// The atom at the origin, `a δ`, commutes with everything and is
    /// factored out exactly as `e^a δ`. The remainder `V` is summed to `K`
    /// terms, where `K` is the smallest integer with
    /// `e^a ||V||^(K+1) e^||V|| / (K+1)! < series_tol`; that tail bound is
    /// added to the dropped-mass bound. `K` above `cap` is a resource error.
    /// Large exponents are evaluated by scaling and squaring.
    pub fn exp_capped(&self, series_tol: f64, cap: usize) -> Result<Self> {
        if !(series_tol.is_finite() && series_tol > 0.0) {
            return Err(Error::input(format!("series tolerance must be positive, got {series_tol}")));
        }
        let origin = self.mass_at(0.0);
        let radius = self.tol.snap(0.0);
        let off = SignedMeasure {
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|a| a.location.abs() > radius)
                .collect(),
            tol: self.tol,
            dropped: self.dropped,
        };
        let scale = libm::exp(origin);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::domain(format!(
                "exponent has mass {origin} at the origin; e^mass is not representable"
            )));
        }
        let norm = off.total_variation();
        let (terms, tail) = series_length(origin, norm, series_tol, cap)?;

        // A large |origin| makes e^origin, and with it every series term,
        // fall below the prune threshold. Evaluate exp(W / 2^s) instead and
        // square s times; the dropped-mass bound follows the squarings.
        let reach = (-origin).max(norm);
        if reach > SQUARING_REACH {
            let s = libm::ceil(libm::log2(reach / SQUARING_REACH)) as i32;
            let pieces = libm::exp2(s as f64);
            let mut out = self.scale_mass(1.0 / pieces).exp_capped(series_tol / pieces, cap)?;
            for _ in 0..s {
                out = out.convolve(&out);
            }
            out.dropped = out.dropped.max(self.dropped);
            return Ok(out);
        }

        let mut term = Self::point(0.0, scale, self.tol);
        let mut sum = term.clone();
        for m in 1..=terms {
            term = term.convolve(&off).scale_mass(1.0 / m as f64);
            sum = sum.add(&term);
        }
        sum.dropped = sum.dropped.max(self.dropped) + tail;
        Ok(sum)
    }

    /// Lévy concentration function `Q(F, h) = sup_x F{[x, x + h]}`.
    ///
    /// Defined for nonnegative measures only. The window is closed; the
    /// right endpoint is widened by the merge radius so that lattice points
    /// produced by different rounding paths are treated consistently.
    pub fn concentration(&self, h: f64) -> Result<f64> {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::input(format!("window width must be finite and nonnegative, got {h}")));
        }
        if let Some(neg) = self.atoms.iter().find(|a| a.mass < 0.0) {
            return Err(Error::domain(format!(
                "concentration function needs a nonnegative measure; atom at {} has mass {}",
                neg.location, neg.mass
            )));
        }
        let mut prefix = Vec::with_capacity(self.len() + 1);
        prefix.push(0.0_f64);
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.mass;
            prefix.push(acc);
        }
        let mut best = 0.0_f64;
        let mut right = 0;
        for (left, a) in self.atoms.iter().enumerate() {
            let end = a.location + h;
            let limit = end + self.tol.snap(end);
            while right < self.atoms.len() && self.atoms[right].location <= limit {
                right += 1;
            }
            best = best.max(prefix[right] - prefix[left]);
        }
        Ok(best)
    }

    /// Fourier-Stieltjes transform `sum m e^{i t x}`.
    pub fn charfn(&self, t: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for a in &self.atoms {
            let (s, c) = libm::sincos(t * a.location);
            re += a.mass * c;
            im += a.mass * s;
        }
        Complex64::new(re, im)
    }

    /// Derivative in `t` of the transform, `sum i x m e^{i t x}`.
    pub fn charfn_derivative(&self, t: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for a in &self.atoms {
            let (s, c) = libm::sincos(t * a.location);
            re -= a.location * a.mass * s;
            im += a.location * a.mass * c;
        }
        Complex64::new(re, im)
    }
}

fn normalize(mut raw: Vec<Atom>, tol: Tolerances) -> (Vec<Atom>, f64) {
    raw.sort_unstable_by(|a, b| a.location.total_cmp(&b.location));
    let mut merged: Vec<Atom> = Vec::with_capacity(raw.len());
    for atom in raw {
        match merged.last_mut() {
            Some(last) if atom.location - last.location <= tol.snap(last.location) => {
                last.mass += atom.mass;
            }
            _ => merged.push(atom),
        }
    }
    let mut pruned = 0.0;
    merged.retain(|a| {
        let keep = a.mass.abs() > tol.prune;
        if !keep {
            pruned += a.mass.abs();
        }
        keep
    });
    (merged, pruned)
}

/// Number of series terms and the certified tail bound.
fn series_length(log_scale: f64, norm: f64, series_tol: f64, cap: usize) -> Result<(usize, f64)> {
    if norm == 0.0 {
        return Ok((0, 0.0));
    }
    if !norm.is_finite() {
        return Err(Error::input("exponent has non-finite total variation"));
    }
    let log_tol = libm::log(series_tol);
    let log_norm = libm::log(norm);
    let log_tail = |k: usize| {
        let next = (k + 1) as f64;
        log_scale + next * log_norm + norm - libm::lgamma(next + 1.0)
    };
    let mut k = 0usize;
    while log_tail(k) >= log_tol {
        k += 1;
    }
    if k > cap {
        return Err(Error::Resource { required: k, cap });
    }
    Ok((k, libm::exp(log_tail(k))))
}

impl Add for &SignedMeasure {
    type Output = SignedMeasure;

    fn add(self, rhs: &SignedMeasure) -> SignedMeasure {
        SignedMeasure::add(self, rhs)
    }
}

impl Sub for &SignedMeasure {
    type Output = SignedMeasure;

    fn sub(self, rhs: &SignedMeasure) -> SignedMeasure {
        SignedMeasure::sub(self, rhs)
    }
}

/// Convolution.
impl Mul for &SignedMeasure {
    type Output = SignedMeasure;

    fn mul(self, rhs: &SignedMeasure) -> SignedMeasure {
        self.convolve(rhs)
    }
}

impl Neg for &SignedMeasure {
    type Output = SignedMeasure;

    fn neg(self) -> SignedMeasure {
        self.scale_mass(-1.0)
    }
}

#[cfg(feature = "serde")]
mod serde_impl {
    use alloc::vec::Vec;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{Atom, SignedMeasure, Tolerances};

    #[derive(Serialize)]
    struct MeasureRef<'a> {
        atoms: &'a [Atom],
        merge_tolerance: f64,
        prune_threshold: f64,
        dropped_mass_bound: f64,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct MeasureRepr {
        atoms: Vec<Atom>,
        merge_tolerance: f64,
        prune_threshold: f64,
        #[serde(default)]
        dropped_mass_bound: f64,
    }

    impl Serialize for SignedMeasure {
        fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
            MeasureRef {
                atoms: &self.atoms,
                merge_tolerance: self.tol.merge,
                prune_threshold: self.tol.prune,
                dropped_mass_bound: self.dropped,
            }
            .serialize(serializer)
        }
    }

    impl<'de> Deserialize<'de> for SignedMeasure {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
            let repr = MeasureRepr::deserialize(deserializer)?;
            let tol = Tolerances {
                merge: repr.merge_tolerance,
                prune: repr.prune_threshold,
            };
            SignedMeasure::from_raw_parts(repr.atoms, tol, repr.dropped_mass_bound)
                .map_err(serde::de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bernoulli(p: f64) -> SignedMeasure {
        SignedMeasure::new([(0.0, 1.0 - p), (1.0, p)]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn construction_merges_and_prunes() {
        let d = SignedMeasure::new([(1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(d.atoms(), &[Atom::new(1.0, 1.0)]);

        let b = SignedMeasure::new([(2.0, 0.01), (0.0, 0.81), (1.0, 0.18)]).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.atoms()[0], Atom::new(0.0, 0.81));

        let p = SignedMeasure::new([(0.0, 1.0), (3.0, 1e-17)]).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.dropped_mass_bound(), 1e-17);

        let z = SignedMeasure::new([(0.0, 1.0), (0.0, -1.0)]).unwrap();
        assert!(z.is_empty());
    }

    #[test]
    fn non_finite_input_is_rejected() {
        assert!(matches!(
            SignedMeasure::new([(f64::NAN, 1.0)]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            SignedMeasure::new([(0.0, f64::INFINITY)]),
            Err(Error::Input(_))
        ));
        assert!(bernoulli(0.3).scale_support(f64::NAN).is_err());
    }

    #[test]
    fn relative_snap_merges_rounding_noise() {
        let a = 2.0_f64.sqrt();
        let m = SignedMeasure::new([(a + 1.0, 0.5), (1.0 + a * (1.0 + 1e-15), 0.5)]).unwrap();
        assert_eq!(m.len(), 1);
        let far = SignedMeasure::new([(1000.0, 0.5), (1000.0 + 1e-5, 0.5)]).unwrap();
        assert_eq!(far.len(), 2);
    }

    #[test]
    fn scaling_support() {
        let b = bernoulli(0.3);
        assert_eq!(b.scale_support(1.0).unwrap(), b);
        assert_eq!(
            SignedMeasure::dirac(2.0).scale_support(0.5).unwrap(),
            SignedMeasure::dirac(1.0)
        );
        let s = b.scale_support(2.0_f64.sqrt()).unwrap();
        assert_eq!(s.atoms()[1], Atom::new(2.0_f64.sqrt(), 0.3));
        let collapsed = b.scale_support(0.0).unwrap();
        assert_eq!(collapsed.len(), 1);
        assert!(close(collapsed.mass_at(0.0), 1.0, 1e-15));
        let neg = b.scale_support(-1.0).unwrap();
        assert_eq!(neg.atoms()[0], Atom::new(-1.0, 0.3));
    }

    #[test]
    fn convolution_examples() {
        let ab = SignedMeasure::dirac(1.5).convolve(&SignedMeasure::dirac(-0.25));
        assert_eq!(ab, SignedMeasure::dirac(1.25));

        let two = bernoulli(0.5).convolve(&bernoulli(0.5));
        let masses: Vec<f64> = two.atoms().iter().map(|a| a.mass).collect();
        assert_eq!(masses, vec![0.25, 0.5, 0.25]);

        let r2 = 2.0_f64.sqrt();
        let mixed = bernoulli(0.5).convolve(&bernoulli(0.5).scale_support(r2).unwrap());
        let locs: Vec<f64> = mixed.locations().collect();
        assert_eq!(locs, vec![0.0, 1.0, r2, 1.0 + r2]);
        assert!(mixed.atoms().iter().all(|a| a.mass == 0.25));
    }

    #[test]
    fn powers() {
        let b = bernoulli(0.1);
        assert_eq!(b.convolve_power(0), SignedMeasure::dirac(0.0));
        let sq = b.convolve_power(2);
        assert!(close(sq.mass_at(0.0), 0.81, 1e-15));
        assert!(close(sq.mass_at(1.0), 0.18, 1e-15));
        assert!(close(sq.mass_at(2.0), 0.01, 1e-15));
    }

    #[test]
    fn exponential_of_zero_and_poisson() {
        assert_eq!(SignedMeasure::zero().exp(1e-15).unwrap(), SignedMeasure::dirac(0.0));
        let w = SignedMeasure::new([(1.0, 1.0), (0.0, -1.0)]).unwrap();
        let pois = w.exp(1e-15).unwrap();
        let mut fact = 1.0;
        for k in 0..15 {
            if k > 0 {
                fact *= k as f64;
            }
            let want = libm::exp(-1.0) / fact;
            assert!(close(pois.mass_at(k as f64), want, 1e-16), "k={k}");
        }
        assert!(close(pois.mass_at(0.0), 0.36787944117144233, 1e-16));
        assert!(close(pois.total_mass(), 1.0, 1e-15));
        assert!(pois.dropped_mass_bound() < 1e-14);
    }

    #[test]
    fn exponential_cap_reports_required_terms() {
        let w = SignedMeasure::new([(1.0, 50.0), (0.0, -50.0)]).unwrap();
        match w.exp_capped(1e-15, 10) {
            Err(Error::Resource { required, cap }) => {
                assert_eq!(cap, 10);
                assert!(required > 10);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
        assert!(w.exp(0.0).is_err());
    }

    #[test]
    fn norms() {
        let d = SignedMeasure::new([(1.0, 1.0), (0.0, -1.0)]).unwrap();
        assert_eq!(d.total_variation(), 2.0);
        assert_eq!(d.kolmogorov_norm(), 1.0);
        assert_eq!(d.convolve(&d).total_variation(), 4.0);
        let b = bernoulli(0.3);
        assert!(close(b.total_variation(), 1.0, 1e-15));
        assert_eq!(b.sub(&b).kolmogorov_norm(), 0.0);
    }

    #[test]
    fn cdf_examples() {
        let d0 = SignedMeasure::dirac(0.0);
        assert_eq!(d0.cdf(-1.0), 0.0);
        assert_eq!(d0.cdf(0.0), 1.0);
        assert!(close(bernoulli(0.3).cdf(0.5), 0.7, 1e-15));
        let d = SignedMeasure::new([(1.0, 1.0), (0.0, -1.0)]).unwrap();
        assert_eq!(d.cdf(0.0), -1.0);
    }

    #[test]
    fn concentration_examples() {
        assert_eq!(SignedMeasure::dirac(3.0).concentration(0.0).unwrap(), 1.0);
        assert_eq!(SignedMeasure::dirac(3.0).concentration(7.0).unwrap(), 1.0);
        let u = SignedMeasure::new((0..4).map(|k| (k as f64, 0.25))).unwrap();
        assert_eq!(u.concentration(1.0).unwrap(), 0.5);
        assert_eq!(u.concentration(0.999).unwrap(), 0.25);
        assert_eq!(u.concentration(3.0).unwrap(), 1.0);
        let d = SignedMeasure::new([(1.0, 1.0), (0.0, -1.0)]).unwrap();
        assert!(matches!(d.concentration(1.0), Err(Error::Domain(_))));
        assert!(u.concentration(-1.0).is_err());
    }

    #[test]
    fn charfn_examples() {
        assert_eq!(SignedMeasure::dirac(0.0).charfn(1.7), Complex64::new(1.0, 0.0));
        let z = SignedMeasure::dirac(0.8).charfn(2.0);
        assert!(close(z.re, libm::cos(1.6), 1e-15) && close(z.im, libm::sin(1.6), 1e-15));
        let b = bernoulli(0.5).charfn(core::f64::consts::PI);
        assert!(b.norm() < 1e-15);
    }

    #[test]
    fn raw_parts_validation() {
        let tol = Tolerances::default();
        assert!(SignedMeasure::from_raw_parts(vec![Atom::new(1.0, 1.0), Atom::new(0.0, 1.0)], tol, 0.0).is_err());
        assert!(SignedMeasure::from_raw_parts(vec![Atom::new(0.0, 0.0)], tol, 0.0).is_err());
        assert!(SignedMeasure::from_raw_parts(vec![Atom::new(0.0, 1.0)], tol, -1.0).is_err());
        let ok = SignedMeasure::from_raw_parts(vec![Atom::new(0.0, 1.0)], tol, 1e-16).unwrap();
        assert_eq!(ok.dropped_mass_bound(), 1e-16);
    }
}
