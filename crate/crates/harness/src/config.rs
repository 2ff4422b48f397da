//! JSON mission and benchmark configuration. Every key is optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unified_ipp::grid::RasterKind;
use unified_ipp::metrics::UncNormalization;
use unified_ipp::{Pose, PlannerConfig};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Discrete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Coverage,
    Greedy,
    Mcts,
    Cmaes,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [PlannerKind::Coverage, PlannerKind::Greedy, PlannerKind::Mcts, PlannerKind::Cmaes];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Coverage => "coverage",
            PlannerKind::Greedy => "greedy",
            PlannerKind::Mcts => "mcts",
            PlannerKind::Cmaes => "cmaes",
        }
    }

    /// Stream index for the planner's private random numbers.
    pub(crate) fn stream(self) -> u64 {
        match self {
            PlannerKind::Coverage => 10,
            PlannerKind::Greedy => 11,
            PlannerKind::Mcts => 12,
            PlannerKind::Cmaes => 13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Static,
    Varying,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Static => "static",
            Protocol::Varying => "varying",
        }
    }
}

/// Where the ground truth comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSource {
    /// Smoothed seeded noise. The smoothing scale is `correlation_ratio · lengthscale`.
    Generated { correlation_ratio: f64 },
    /// CSV or PGM raster; its size overrides `width`/`height`.
    Raster { path: PathBuf },
}

impl Default for FieldSource {
    fn default() -> Self {
        // Gaussian smoothing with this std matches the Matérn-3/2 correlation at one lengthscale.
        FieldSource::Generated { correlation_ratio: 0.586 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpParams {
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub prior_mean: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        GpParams { lengthscale: 0.35, signal_variance: 1.0, prior_mean: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccupancyParams {
    pub classes: u16,
    /// Diagonal of a uniform-noise confusion matrix; ignored when `confusion` is set.
    pub confusion_diagonal: f64,
    pub confusion: Option<Vec<Vec<f64>>>,
    pub clamp: (f64, f64),
}

impl Default for OccupancyParams {
    fn default() -> Self {
        OccupancyParams { classes: 3, confusion_diagonal: 0.8, confusion: None, clamp: (0.01, 0.99) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorParams {
    pub noise_std: f64,
    pub continuous_fov: usize,
    pub semantic_fov: usize,
}

impl Default for SensorParams {
    fn default() -> Self {
        SensorParams { noise_std: 0.1, continuous_fov: 1, semantic_fov: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    pub kind: FeatureKind,
    pub width: usize,
    pub height: usize,
    pub field: FieldSource,
    /// Interest threshold for continuous missions.
    pub threshold: f64,
    /// Interesting class ids for discrete missions.
    pub interesting_classes: Vec<u16>,
    /// Map kernel; its lengthscale also sets the generated field's correlation.
    pub gp: GpParams,
    pub occupancy: OccupancyParams,
    pub sensor: SensorParams,
    pub budget: f64,
    pub start: Pose,
    pub planner: PlannerKind,
    pub planning: PlannerConfig,
    /// Row spacing of the coverage sweep; defaults to the sensor footprint width.
    pub coverage_step: Option<usize>,
    pub unc_normalization: UncNormalization,
    pub seed: u64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        MissionConfig {
            kind: FeatureKind::Continuous,
            width: 25,
            height: 25,
            field: FieldSource::default(),
            threshold: 0.4,
            interesting_classes: vec![1],
            gp: GpParams::default(),
            occupancy: OccupancyParams::default(),
            sensor: SensorParams::default(),
            budget: 100.0,
            start: Pose::new(0, 0),
            planner: PlannerKind::Greedy,
            planning: PlannerConfig::default(),
            coverage_step: None,
            unc_normalization: UncNormalization::TraceRatio,
            seed: 0,
        }
    }
}

impl MissionConfig {
    pub fn fov(&self) -> usize {
        match self.kind {
            FeatureKind::Continuous => self.sensor.continuous_fov,
            FeatureKind::Discrete => self.sensor.semantic_fov,
        }
    }

    pub fn coverage_step(&self) -> usize {
        self.coverage_step.unwrap_or(2 * self.fov() + 1)
    }

    pub fn raster_kind(&self) -> RasterKind {
        match self.kind {
            FeatureKind::Continuous => RasterKind::Continuous,
            FeatureKind::Discrete => RasterKind::Discrete,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return bad(format!("budget must be positive, got {}", self.budget));
        }
        if self.width < 2 || self.height < 2 {
            return bad("grid must be at least 2x2".into());
        }
        if let FieldSource::Generated { correlation_ratio } = self.field {
            if !(correlation_ratio > 0.0) {
                return bad("correlation_ratio must be positive".into());
            }
        }
        if !(self.gp.lengthscale > 0.0) {
            return bad("gp.lengthscale must be positive".into());
        }
        if self.kind == FeatureKind::Discrete && self.interesting_classes.is_empty() {
            return bad("discrete missions need at least one interesting class".into());
        }
        if !(self.sensor.noise_std > 0.0) && self.kind == FeatureKind::Continuous {
            return bad("continuous missions need sensor noise_std > 0".into());
        }
        if self.coverage_step == Some(0) {
            return bad("coverage_step must be >= 1".into());
        }
        self.planning.validate()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub protocol: Protocol,
    pub missions: usize,
    /// Number of repeat seeds derived from `seed`.
    pub repeats: usize,
    pub planners: Vec<PlannerKind>,
    pub static_threshold: f64,
    pub static_lengthscale: f64,
    pub threshold_range: (f64, f64),
    pub lengthscale_range: (f64, f64),
    pub seed: u64,
    /// Template for every mission; protocol values override its threshold,
    /// lengthscale, interesting classes, planner and seed.
    pub mission: MissionConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            protocol: Protocol::Static,
            missions: 100,
            repeats: 3,
            planners: vec![PlannerKind::Coverage, PlannerKind::Greedy, PlannerKind::Mcts, PlannerKind::Cmaes],
            static_threshold: 0.4,
            static_lengthscale: 0.35,
            threshold_range: (0.0, 0.8),
            lengthscale_range: (0.15, 0.55),
            seed: 0,
            mission: MissionConfig::default(),
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.missions < 1 || self.repeats < 1 {
            return bad("missions and repeats must be >= 1");
        }
        if self.planners.is_empty() {
            return bad("planner list is empty");
        }
        let (t0, t1) = self.threshold_range;
        let (l0, l1) = self.lengthscale_range;
        if !(t0 < t1) || !(l0 < l1) || !(l0 > 0.0) {
            return bad("sampling ranges must be non-degenerate with positive lengthscales");
        }
        if !(self.static_lengthscale > 0.0) {
            return bad("static lengthscale must be positive");
        }
        self.mission.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path)
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}
