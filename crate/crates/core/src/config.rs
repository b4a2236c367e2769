//! JSON experiment configurations. Unknown fields are rejected and parse
//! errors carry the offending field path.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::{
    make_halfline_indicators, make_interval_indicators, make_monotone_class, FunctionClass,
    DEFAULT_CLASS_CAP,
};
use crate::covering::{candidate_family, CandidateFamily, CoverOptions};
use crate::error::{Error, Result};
use crate::integral::{EntropyCurve, EntropyFn, PowerJ};
use crate::measure::{DiscreteMeasure, Grid, GridFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `m` equispaced points in `[0, 1]`.
    Unit {
        m: usize,
    },
    Points {
        points: Vec<f64>,
    },
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid<f64>>> {
        Ok(Arc::new(match self {
            GridSpec::Unit { m } => Grid::unit(*m)?,
            GridSpec::Points { points } => Grid::new(points.clone())?,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Uniform,
    /// Nonnegative masses, normalized.
    Masses {
        masses: Vec<f64>,
    },
    /// Mass at the `j`-th point proportional to `(j + 1)^exponent`.
    Power {
        exponent: f64,
    },
}

impl MeasureSpec {
    pub fn build(&self, grid: &Arc<Grid<f64>>) -> Result<DiscreteMeasure<f64>> {
        match self {
            MeasureSpec::Uniform => Ok(DiscreteMeasure::uniform(Arc::clone(grid))),
            MeasureSpec::Masses { masses } => {
                DiscreteMeasure::from_masses(Arc::clone(grid), masses.clone())
            }
            MeasureSpec::Power { exponent } => {
                let masses = (1..=grid.len())
                    .map(|j| (j as f64).powf(*exponent))
                    .collect();
                DiscreteMeasure::from_masses(Arc::clone(grid), masses)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassFamily {
    /// The single function `f ≡ 0`.
    Zero,
    Halflines,
    Intervals,
    Monotone {
        levels: usize,
        #[serde(default)]
        cap: Option<usize>,
    },
    Explicit {
        members: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub family: ClassFamily,
    /// Constant multiplier applied to members and envelope.
    #[serde(default)]
    pub scale: Option<f64>,
    /// `[a, b]`: members and envelope multiplied by `|a + b·x|`.
    #[serde(default)]
    pub affine_weight: Option<[f64; 2]>,
}

impl ClassSpec {
    pub fn build(&self, grid: &Arc<Grid<f64>>) -> Result<FunctionClass<f64>> {
        let m = grid.len();
        let mut class = match &self.family {
            ClassFamily::Zero => {
                FunctionClass::new(Arc::clone(grid), vec![GridFunction::zero(m)], None, "zero")?
            }
            ClassFamily::Halflines => make_halfline_indicators(Arc::clone(grid)),
            ClassFamily::Intervals => make_interval_indicators(Arc::clone(grid)),
            ClassFamily::Monotone { levels, cap } => {
                make_monotone_class(Arc::clone(grid), *levels, cap.unwrap_or(DEFAULT_CLASS_CAP))?
            }
            ClassFamily::Explicit { members } => {
                let fs = members
                    .iter()
                    .map(|v| GridFunction::new(v.clone()))
                    .collect::<Result<Vec<_>>>()?;
                FunctionClass::new(Arc::clone(grid), fs, None, "explicit")?
            }
        };
        if let Some(c) = self.scale {
            class = class.scale(c)?;
        }
        if let Some([a, b]) = self.affine_weight {
            let w = GridFunction::new(grid.points().iter().map(|x| a + b * x).collect())?;
            class = class.scale_pointwise(&w, format!("{}·|{a}+{b}x|", class.label()))?;
        }
        Ok(class)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// `log N(ε) = log K + V log(1/ε)`.
    Vc {
        k: f64,
        v: f64,
    },
    /// `log N(ε) = scale·log(1 + 1/ε)`.
    Log {
        scale: f64,
    },
    /// Step table `[[ε, log N], …]` with increasing `ε`. Loaded without the
    /// monotonicity requirement; the structure checks judge it.
    Tabulated {
        steps: Vec<(f64, f64)>,
    },
    Singleton,
    /// `J(δ) = scale·δ^exponent` without an underlying `log N`.
    Power {
        scale: f64,
        exponent: f64,
    },
}

impl CurveSpec {
    /// Curves with a `log N` model.
    pub fn entropy_curve(&self) -> Result<EntropyCurve<f64>> {
        match self {
            CurveSpec::Vc { k, v } => EntropyCurve::vc(*k, *v),
            CurveSpec::Log { scale } => EntropyCurve::log(*scale),
            CurveSpec::Tabulated { steps } => EntropyCurve::tabulated_unchecked(steps.clone()),
            CurveSpec::Singleton => Ok(EntropyCurve::singleton()),
            CurveSpec::Power { .. } => Err(Error::Config(
                "a power curve has no log N model; use vc, log or tabulated".into(),
            )),
        }
    }

    pub fn entropy_fn(&self) -> Result<Arc<dyn EntropyFn<f64>>> {
        match self {
            CurveSpec::Power { scale, exponent } => Ok(Arc::new(PowerJ::new(*scale, *exponent)?)),
            _ => Ok(Arc::new(self.entropy_curve()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    /// Number of empirical measures added to the fixed candidates.
    pub empirical: usize,
    pub sample_size: usize,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            empirical: 8,
            sample_size: 64,
        }
    }
}

impl FamilySpec {
    pub fn build(
        &self,
        grid: &Arc<Grid<f64>>,
        base: &DiscreteMeasure<f64>,
        seed: u64,
    ) -> Result<CandidateFamily<f64>> {
        candidate_family(grid, base, self.empirical, self.sample_size, seed)
    }
}

fn default_exact_cap() -> usize {
    CoverOptions::default().exact_cap
}

fn default_r() -> f64 {
    2.0
}

fn default_structure_points() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub seed: u64,
    pub grid: GridSpec,
    pub measure: MeasureSpec,
    pub class: ClassSpec,
    pub eps_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    #[serde(default = "default_r")]
    pub metric_r: f64,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
    #[serde(default)]
    pub family: FamilySpec,
    /// Evaluated alongside the measured curves when present.
    #[serde(default)]
    pub curve: Option<CurveSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case", deny_unknown_fields)]
pub enum RatioSpec {
    Thm21 {
        max_ratio: f64,
        #[serde(default)]
        max_abs_slope: Option<f64>,
    },
    SmallDelta {
        max_ratio: f64,
        #[serde(default)]
        max_abs_slope: Option<f64>,
    },
    Thm31 {
        p: f64,
        max_ratio: f64,
        #[serde(default)]
        max_abs_slope: Option<f64>,
    },
    Thm32 {
        p: f64,
        c: f64,
        max_ratio: f64,
        #[serde(default)]
        max_abs_slope: Option<f64>,
    },
}

impl RatioSpec {
    pub fn max_ratio(&self) -> f64 {
        match self {
            RatioSpec::Thm21 { max_ratio, .. }
            | RatioSpec::SmallDelta { max_ratio, .. }
            | RatioSpec::Thm31 { max_ratio, .. }
            | RatioSpec::Thm32 { max_ratio, .. } => *max_ratio,
        }
    }

    pub fn max_abs_slope(&self) -> Option<f64> {
        match self {
            RatioSpec::Thm21 { max_abs_slope, .. }
            | RatioSpec::SmallDelta { max_abs_slope, .. }
            | RatioSpec::Thm31 { max_abs_slope, .. }
            | RatioSpec::Thm32 { max_abs_slope, .. } => *max_abs_slope,
        }
    }
}

/// An MC study: its own class and measure plus the grids it runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub name: String,
    pub grid: GridSpec,
    pub measure: MeasureSpec,
    pub class: ClassSpec,
    pub curve: CurveSpec,
    pub n_grid: Vec<usize>,
    pub delta_grid: Vec<f64>,
    pub replications: usize,
    #[serde(default)]
    pub ratios: Vec<RatioSpec>,
    #[serde(default)]
    pub chain: bool,
    #[serde(default)]
    pub variance: bool,
    #[serde(default)]
    pub family: FamilySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSpec {
    /// Frozen bound on `J(z_max)/bound` over the recursion sweeps.
    pub k22: f64,
    pub k33: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub young_pairs: usize,
    pub grid: GridSpec,
    pub measure: MeasureSpec,
    pub class: ClassSpec,
    /// Sample sizes of the empirical draws; every check runs at each.
    pub n_list: Vec<usize>,
    pub draws: usize,
    /// `p` values of the Hölder diameter check.
    pub holder_p: Vec<f64>,
    /// Largest admissible coefficient of variation of the fourth-moment ratio over the draws.
    pub max_cv: f64,
    /// Moment index of the fourth-moment check; the log order is `2/p`.
    pub fourth_moment_p: f64,
    /// Largest admissible relative change of the log-bound constant under grid doubling.
    pub max_refinement_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Curves whose `J` must pass the structure checks.
    #[serde(default)]
    pub curves: Vec<CurveSpec>,
    #[serde(default = "default_structure_points")]
    pub structure_points: usize,
    #[serde(default)]
    pub studies: Vec<StudySpec>,
    #[serde(default)]
    pub lemmas: Option<LemmaSpec>,
    #[serde(default)]
    pub devices: Option<DeviceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulusSpec {
    /// `φ(δ) = c·δ^a`.
    Power { c: f64, a: f64 },
    /// `φ_n(δ) = J(δ)(1 + J(δ)/(δ²√n))`.
    Entropy { curve: CurveSpec },
    /// Solve `J(δ) ≤ √n δ²` directly.
    EntropyDirect { curve: CurveSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub sigma: f64,
    /// Closed interval the fitted slope must fall in.
    #[serde(default)]
    pub slope_interval: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub seed: u64,
    pub modulus: ModulusSpec,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub experiment: Option<ExperimentSpec>,
}

/// Raw bytes and parsed document of a config file.
pub struct LoadedConfig<C> {
    pub bytes: Vec<u8>,
    pub config: C,
}

pub fn parse<C: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<C> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Error::Config(format!("at `{}`: {inner}", e.path()))
    })
}

pub fn load<C: for<'de> Deserialize<'de>>(path: &Path) -> Result<LoadedConfig<C>> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse(&bytes)?;
    Ok(LoadedConfig { bytes, config })
}
