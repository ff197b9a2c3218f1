//! Experiment configuration files.

use std::path::{Path, PathBuf};

use cpsmooth_core::bounds::{BoundVariant, GammaPolicy, Quadrature};
use cpsmooth_core::exact::{BlockSpec, LatentDriver};
use cpsmooth_core::{SignedMeasure, Tolerances};
use serde::Deserialize;

use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    TworunsSmoothing,
    PoissonBinomial,
    Franken,
    Generalized,
    LemmaSuite,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::TworunsSmoothing => "tworuns-smoothing",
            Scenario::PoissonBinomial => "poisson-binomial",
            Scenario::Franken => "franken",
            Scenario::Generalized => "generalized",
            Scenario::LemmaSuite => "lemma-suite",
        }
    }

    pub fn default_variants(self) -> Vec<BoundVariant> {
        use BoundVariant::*;
        match self {
            Scenario::TworunsSmoothing => vec![Theorem1Pi, Theorem1G, Naive, Joint],
            Scenario::PoissonBinomial => vec![Corollary1, MagicFactor, RoosHipp, Az, BerryEsseen],
            Scenario::Franken => vec![Theorem2First, Theorem2Second],
            Scenario::Generalized => vec![Theorem3First, Theorem3Second],
            Scenario::LemmaSuite => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BlockTemplate {
    TwoRuns {
        p: f64,
        n: usize,
        #[serde(default = "unit_weight")]
        w: f64,
    },
    Bernoulli {
        p: f64,
        n: usize,
        #[serde(default = "unit_weight")]
        w: f64,
    },
    IidLattice {
        pmf: Vec<f64>,
        n: usize,
        #[serde(default = "unit_weight")]
        w: f64,
    },
    GeneralJump {
        p: f64,
        jump: Vec<(f64, f64)>,
        n: usize,
        #[serde(default = "unit_weight")]
        w: f64,
    },
    Latent {
        values: Vec<f64>,
        probs: Vec<f64>,
        /// Row-major `link[from * k + to]`.
        link: Vec<u32>,
        n: usize,
        #[serde(default = "unit_weight")]
        w: f64,
    },
}

fn unit_weight() -> f64 {
    1.0
}

impl BlockTemplate {
    fn has_p(&self) -> bool {
        matches!(
            self,
            BlockTemplate::TwoRuns { .. } | BlockTemplate::Bernoulli { .. } | BlockTemplate::GeneralJump { .. }
        )
    }

    fn kind_name(&self) -> &'static str {
        match self {
            BlockTemplate::TwoRuns { .. } => "two-runs",
            BlockTemplate::Bernoulli { .. } => "bernoulli",
            BlockTemplate::IidLattice { .. } => "iid-lattice",
            BlockTemplate::GeneralJump { .. } => "general-jump",
            BlockTemplate::Latent { .. } => "latent",
        }
    }

    /// Block with the grid point's axis values substituted.
    pub fn instantiate(&self, point: &GridPoint, tol: Tolerances) -> cpsmooth_core::Result<BlockSpec> {
        let n_of = |n: usize| point.n.unwrap_or(n);
        let w_of = |w: f64| point.w.unwrap_or(w);
        let p_of = |p: f64| point.p.unwrap_or(p);
        match self {
            BlockTemplate::TwoRuns { p, n, w } => BlockSpec::two_runs(p_of(*p), n_of(*n), w_of(*w)),
            BlockTemplate::Bernoulli { p, n, w } => BlockSpec::bernoulli(p_of(*p), n_of(*n), w_of(*w)),
            BlockTemplate::IidLattice { pmf, n, w } => BlockSpec::iid_lattice(pmf.clone(), n_of(*n), w_of(*w)),
            BlockTemplate::GeneralJump { p, jump, n, w } => {
                let law = SignedMeasure::from_atoms(jump.iter().copied(), tol)?;
                BlockSpec::general_jump(p_of(*p), law, n_of(*n), w_of(*w))
            }
            BlockTemplate::Latent { values, probs, link, n, w } => {
                let driver = LatentDriver::from_table(values.clone(), probs.clone(), link.clone())?;
                BlockSpec::latent(driver, n_of(*n), w_of(*w))
            }
        }
    }
}

/// Axes are crossed in the order `N`, `n`, `p`, `w`; a missing axis keeps
/// the template values.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(rename = "N")]
    pub blocks: Option<Vec<usize>>,
    pub n: Option<Vec<usize>>,
    pub p: Option<Vec<f64>>,
    pub w: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct GridPoint {
    pub id: usize,
    #[serde(rename = "N")]
    pub blocks: Option<usize>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub w: Option<f64>,
}

impl Grid {
    pub fn points(&self) -> Vec<GridPoint> {
        fn axis<T: Copy>(v: &Option<Vec<T>>) -> Vec<Option<T>> {
            match v {
                Some(values) => values.iter().map(|&x| Some(x)).collect(),
                None => vec![None],
            }
        }
        let mut out = Vec::new();
        for &blocks in &axis(&self.blocks) {
            for &n in &axis(&self.n) {
                for &p in &axis(&self.p) {
                    for &w in &axis(&self.w) {
                        out.push(GridPoint { id: out.len(), blocks, n, p, w });
                    }
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let empty = |name: &str, len: Option<usize>| match len {
            Some(0) => Err(HarnessError::Config(format!("grid axis '{name}' is empty"))),
            _ => Ok(()),
        };
        empty("N", self.blocks.as_ref().map(Vec::len))?;
        empty("n", self.n.as_ref().map(Vec::len))?;
        empty("p", self.p.as_ref().map(Vec::len))?;
        empty("w", self.w.as_ref().map(Vec::len))?;
        if self.blocks.iter().flatten().any(|&n| n == 0) {
            return Err(HarnessError::Config("grid axis 'N' needs positive block counts".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HPolicy {
    Fixed(f64),
    HalfMinWeight,
}

impl<'de> Deserialize<'de> for HPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(h) if h.is_finite() && h > 0.0 => Ok(HPolicy::Fixed(h)),
            Raw::Number(h) => Err(serde::de::Error::custom(format!("h must be positive, got {h}"))),
            Raw::Name(s) if s == "half-min-weight" => Ok(HPolicy::HalfMinWeight),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "unknown h policy '{s}', expected a number or \"half-min-weight\""
            ))),
        }
    }
}

impl HPolicy {
    pub fn resolve(self) -> Option<f64> {
        match self {
            HPolicy::Fixed(h) => Some(h),
            HPolicy::HalfMinWeight => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    /// Applied to jump laws given in the config.
    pub merge: Option<f64>,
    pub prune: Option<f64>,
    pub series: Option<f64>,
    pub quadrature: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    scenario: Scenario,
    #[serde(default)]
    blocks: Vec<BlockTemplate>,
    #[serde(default)]
    grid: Grid,
    #[serde(default)]
    h_policy: Option<HPolicy>,
    #[serde(default)]
    variants: Option<Vec<String>>,
    #[serde(default)]
    gamma_policy: GammaPolicy,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    tolerances: ToleranceOverrides,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub blocks: Vec<BlockTemplate>,
    pub grid: Grid,
    pub h_policy: HPolicy,
    pub variants: Vec<BoundVariant>,
    pub gamma_policy: GammaPolicy,
    pub seed: u64,
    pub output: PathBuf,
    pub tolerances: Tolerances,
    pub series_tol: f64,
    pub quadrature: Quadrature,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("invalid config: {e}")))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                raw.schema_version
            )));
        }
        raw.grid.validate()?;

        let variants = match raw.variants {
            Some(names) => names
                .iter()
                .map(|s| {
                    BoundVariant::from_name(s)
                        .ok_or_else(|| HarnessError::Config(format!("unknown bound variant '{s}'")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => raw.scenario.default_variants(),
        };

        let defaults = Tolerances::default();
        let tolerances = Tolerances::new(
            raw.tolerances.merge.unwrap_or(defaults.merge),
            raw.tolerances.prune.unwrap_or(defaults.prune),
        )
        .map_err(|e| HarnessError::Config(e.to_string()))?;
        let series_tol = raw.tolerances.series.unwrap_or(cpsmooth_core::approx::DEFAULT_SERIES_TOL);
        if !(series_tol.is_finite() && series_tol > 0.0) {
            return Err(HarnessError::Config(format!("series tolerance must be positive, got {series_tol}")));
        }
        let mut quadrature = Quadrature::default();
        if let Some(q) = raw.tolerances.quadrature {
            if !(q.is_finite() && q > 0.0) {
                return Err(HarnessError::Config(format!("quadrature tolerance must be positive, got {q}")));
            }
            quadrature.rel_tol = q;
        }

        let config = ExperimentConfig {
            scenario: raw.scenario,
            blocks: raw.blocks,
            grid: raw.grid,
            h_policy: raw.h_policy.unwrap_or(HPolicy::HalfMinWeight),
            variants,
            gamma_policy: raw.gamma_policy,
            seed: raw.seed,
            output: raw.output.unwrap_or_else(|| PathBuf::from("out")),
            tolerances,
            series_tol,
            quadrature,
        };
        config.check_kinds()?;
        Ok(config)
    }

    fn check_kinds(&self) -> Result<(), HarnessError> {
        if self.scenario == Scenario::LemmaSuite {
            return Ok(());
        }
        if self.blocks.is_empty() {
            return Err(HarnessError::Config("scenario needs at least one block template".into()));
        }
        if self.grid.p.is_some() && self.blocks.iter().any(|b| !b.has_p()) {
            return Err(HarnessError::Config("grid axis 'p' needs blocks that have a p parameter".into()));
        }
        for v in &self.variants {
            for b in &self.blocks {
                if !variant_accepts(*v, b) {
                    return Err(HarnessError::Config(format!(
                        "variant '{}' does not apply to {} blocks",
                        v.name(),
                        b.kind_name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Blocks of one grid point: templates repeated cyclically up to `N`.
    pub fn blocks_at(&self, point: &GridPoint) -> cpsmooth_core::Result<Vec<BlockSpec>> {
        let count = point.blocks.unwrap_or(self.blocks.len());
        (0..count)
            .map(|i| self.blocks[i % self.blocks.len()].instantiate(point, self.tolerances))
            .collect()
    }
}

fn variant_accepts(v: BoundVariant, b: &BlockTemplate) -> bool {
    use BlockTemplate as T;
    use BoundVariant::*;
    match v {
        Theorem1Pi | Theorem1G => !matches!(b, T::GeneralJump { .. }),
        Naive | Joint => matches!(b, T::TwoRuns { .. }),
        Theorem2First | Theorem2Second => matches!(b, T::Bernoulli { .. } | T::IidLattice { .. }),
        Corollary1 => matches!(b, T::Bernoulli { .. }),
        Theorem3First | Theorem3Second => matches!(b, T::GeneralJump { .. }),
        MagicFactor | Az | RoosHipp => {
            matches!(b, T::Bernoulli { .. } | T::IidLattice { .. } | T::GeneralJump { .. })
        }
        BerryEsseen => true,
    }
}
