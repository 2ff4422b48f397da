//! One budgeted mission: move, sense, fuse, record, until the budget runs out.

use std::time::Instant;

use serde::Serialize;
use unified_ipp::belief::{gp_init, occ_init, MapBelief, MaternKernel, UncertaintyVariant};
use unified_ipp::grid::{generate_continuous_field, generate_discrete_field, interest_mask, load_raster, InterestSpec, TerrainField};
use unified_ipp::metrics::{
    classification_metrics, ii_metric, mll_metric, normalized_uncertainty, rmse_metric, unc_metric, MetricsRecord,
    UncertaintyTrace,
};
use unified_ipp::planning::{
    BudgetState, CmaesPlanner, CoveragePlanner, GreedyPlanner, LookaheadModel, MctsPlanner, PlanningContext,
};
use unified_ipp::reward::weighted_reduction;
use unified_ipp::sensors::{sense_continuous, sense_semantic, ConfusionMatrix, ContinuousSensorModel, FieldOfView};
use unified_ipp::unified::{assemble_state, Hyperparams, UnifiedState};
use unified_ipp::{Action, GridGeometry, Planner, PlannerConfig, Pose};

use crate::config::{FeatureKind, FieldSource, MissionConfig, PlannerKind};
use crate::error::{HarnessError, Result};
use crate::seeds;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub pose: Pose,
    /// `None` for the initial record.
    pub action: Option<Action>,
    pub consumed_budget: f64,
    pub reward: f64,
    /// Normalised uncertainty over the true area of interest.
    pub uncertainty: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeLog {
    pub config: MissionConfig,
    pub steps: Vec<StepRecord>,
    pub metrics: Option<MetricsRecord>,
    /// Wall-clock seconds per planner call.
    pub replan_seconds: Vec<f64>,
    pub valid: bool,
    pub error: Option<String>,
}

impl EpisodeLog {
    pub const CSV_HEADER: &'static str = "step,x,y,action,consumed_budget,reward,uncertainty";

    /// Per-step CSV; contains no timing so it is reproducible byte for byte.
    pub fn steps_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.steps {
            let action = s.action.map(|a| a.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                s.step, s.pose.x, s.pose.y, action, s.consumed_budget, s.reward, s.uncertainty
            ));
        }
        out
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().filter_map(|s| s.action).collect()
    }

    pub fn path(&self) -> Vec<Pose> {
        self.steps.iter().map(|s| s.pose).collect()
    }

    pub fn mean_replan_seconds(&self) -> f64 {
        if self.replan_seconds.is_empty() {
            0.0
        } else {
            self.replan_seconds.iter().sum::<f64>() / self.replan_seconds.len() as f64
        }
    }
}

/// Everything fixed before the first move.
pub struct MissionSetup {
    pub field: TerrainField<f64>,
    pub spec: InterestSpec<f64>,
    pub mask: Vec<bool>,
    pub prior: MapBelief<f64>,
    pub confusion: Option<ConfusionMatrix<f64>>,
    pub hyperparams: Hyperparams<f64>,
}

pub fn build_field(config: &MissionConfig) -> Result<TerrainField<f64>> {
    let seed = seeds::derive(config.seed, seeds::FIELD);
    match &config.field {
        FieldSource::Raster { path } => Ok(load_raster(path, config.raster_kind())?),
        FieldSource::Generated { correlation_ratio } => {
            let g = GridGeometry::new(config.width, config.height)?;
            let cl = correlation_ratio * config.gp.lengthscale;
            Ok(match config.kind {
                FeatureKind::Continuous => generate_continuous_field(seed, g, cl)?,
                FeatureKind::Discrete => generate_discrete_field(seed, g, config.occupancy.classes, cl)?,
            })
        }
    }
}

pub fn setup(config: &MissionConfig) -> Result<MissionSetup> {
    config.validate()?;
    let field = build_field(config)?;
    let geometry = field.geometry();
    geometry.check_pose(config.start)?;
    let (spec, prior, confusion) = match config.kind {
        FeatureKind::Continuous => {
            let spec = InterestSpec::threshold(config.threshold, (0.0, 1.0))?;
            let kernel = MaternKernel::new(config.gp.lengthscale, config.gp.signal_variance)?;
            let noise = config.sensor.noise_std * config.sensor.noise_std;
            let prior = MapBelief::Gaussian(gp_init(geometry, kernel, config.gp.prior_mean, noise)?);
            (spec, prior, None)
        }
        FeatureKind::Discrete => {
            let k = field.class_count().expect("discrete field");
            let spec = InterestSpec::classes(config.interesting_classes.iter().copied(), k)?;
            let cm = match &config.occupancy.confusion {
                Some(rows) => ConfusionMatrix::from_rows(rows)?,
                None => ConfusionMatrix::uniform_noise(k, config.occupancy.confusion_diagonal)?,
            };
            let prior = MapBelief::Occupancy(occ_init(geometry, k, config.occupancy.clamp)?);
            (spec, prior, Some(cm))
        }
    };
    let mask = interest_mask(&field, &spec)?;
    if !mask.iter().any(|m| *m) {
        return Err(HarnessError::Config("the area of interest is empty for this field".into()));
    }
    let hyperparams = Hyperparams::new(&spec, &prior)?;
    Ok(MissionSetup { field, spec, mask, prior, confusion, hyperparams })
}

pub fn make_planner(config: &MissionConfig) -> Box<dyn Planner<f64> + Send> {
    let planning = PlannerConfig {
        seed: seeds::derive(config.seed, config.planner.stream()),
        ..config.planning.clone()
    };
    match config.planner {
        PlannerKind::Coverage => Box::new(CoveragePlanner::new(config.coverage_step())),
        PlannerKind::Greedy => Box::new(GreedyPlanner { config: planning }),
        PlannerKind::Mcts => Box::new(MctsPlanner::new(planning)),
        PlannerKind::Cmaes => Box::new(CmaesPlanner::new(planning)),
    }
}

/// Live mission state, advanced one action at a time.
pub struct Mission {
    pub config: MissionConfig,
    pub setup: MissionSetup,
    pub belief: MapBelief<f64>,
    pub pose: Pose,
    pub budget: BudgetState,
    planner: Box<dyn Planner<f64> + Send>,
    sensor_rng: rand_chacha::ChaCha8Rng,
    model: LookaheadModel<f64>,
    trace: UncertaintyTrace<f64>,
    pub steps: Vec<StepRecord>,
    pub replan_seconds: Vec<f64>,
}

impl Mission {
    pub fn new(config: &MissionConfig) -> Result<Self> {
        let setup = setup(config)?;
        let belief = setup.prior.clone();
        let model = LookaheadModel { fov: FieldOfView::new(config.fov()), confusion: setup.confusion.clone() };
        let steps = vec![StepRecord {
            step: 0,
            pose: config.start,
            action: None,
            consumed_budget: 0.0,
            reward: 0.0,
            uncertainty: 1.0,
        }];
        Ok(Mission {
            config: config.clone(),
            belief,
            pose: config.start,
            budget: BudgetState::new(config.budget)?,
            planner: make_planner(config),
            sensor_rng: seeds::stream(config.seed, seeds::SENSOR),
            model,
            trace: UncertaintyTrace::new(),
            steps,
            replan_seconds: Vec::new(),
            setup,
        })
    }

    pub fn state(&self) -> Result<UnifiedState<f64>> {
        Ok(assemble_state(
            &self.belief,
            &self.setup.spec,
            self.pose,
            self.budget.remaining,
            self.setup.hyperparams.clone(),
        )?)
    }

    /// Plans and executes one action; `Ok(false)` once the planner stops.
    pub fn step(&mut self) -> Result<bool> {
        let state = self.state()?;
        let ctx = PlanningContext { state: &state, belief: &self.belief, spec: &self.setup.spec, model: &self.model };
        let t0 = Instant::now();
        let action = self.planner.plan(&ctx)?;
        self.replan_seconds.push(t0.elapsed().as_secs_f64());
        let Some(action) = action.filter(|a| self.budget.can_afford(*a)) else {
            return Ok(false);
        };
        self.pose = action.apply(self.pose, self.belief.geometry());
        self.budget.spend(action)?;
        let reward = self.sense_and_fuse(&state.interest)?;
        let consumed = self.budget.consumed();
        let unc = normalized_uncertainty(&self.belief, &self.setup.prior, &self.setup.mask, self.config.unc_normalization)?;
        self.trace.push(consumed, unc)?;
        self.steps.push(StepRecord {
            step: self.steps.len(),
            pose: self.pose,
            action: Some(action),
            consumed_budget: consumed,
            reward,
            uncertainty: unc,
        });
        Ok(true)
    }

    /// Measures from the current pose and returns the reward actually earned.
    fn sense_and_fuse(&mut self, interest: &[f64]) -> Result<f64> {
        let before = self.belief.uncertainty_grid(UncertaintyVariant::Reward);
        let fov = self.model.fov;
        let m = match self.config.kind {
            FeatureKind::Continuous => {
                let model = ContinuousSensorModel::new(self.config.sensor.noise_std)?;
                sense_continuous(&self.setup.field, self.pose, fov, &model, &mut self.sensor_rng)?
            }
            FeatureKind::Discrete => {
                let cm = self.setup.confusion.as_ref().expect("discrete missions carry a confusion matrix");
                sense_semantic(&self.setup.field, self.pose, fov, cm, &mut self.sensor_rng)?
            }
        };
        let m = unified_ipp::sensors::Measurement { timestamp: self.steps.len(), ..m };
        self.belief.fuse_in_place(&m, self.setup.confusion.as_ref())?;
        let after = self.belief.uncertainty_grid(UncertaintyVariant::Reward);
        Ok(weighted_reduction(&before, &after, interest))
    }

    pub fn metrics(&self) -> Result<MetricsRecord> {
        let s = &self.setup;
        let ii = ii_metric(&self.trace, self.config.budget)?;
        let unc = unc_metric(&self.belief, &s.prior, &s.mask, self.config.unc_normalization)?;
        let mut rec = MetricsRecord { ii, unc, ..Default::default() };
        match &self.belief {
            MapBelief::Gaussian(b) => {
                rec.rmse = Some(rmse_metric(b, &s.field, &s.mask)?);
                rec.mll = Some(mll_metric(b, &s.field, &s.mask)?);
            }
            MapBelief::Occupancy(b) => {
                let (miou, f1) = classification_metrics(b, &s.field, &s.spec, &s.mask)?;
                rec.miou = Some(miou);
                rec.f1 = Some(f1);
            }
        }
        Ok(rec)
    }

    fn into_log(self, error: Option<String>) -> EpisodeLog {
        let metrics = if error.is_none() { self.metrics().ok() } else { None };
        let error = error.or_else(|| metrics.is_none().then(|| "metric evaluation failed".to_string()));
        EpisodeLog {
            config: self.config,
            steps: self.steps,
            valid: error.is_none(),
            metrics,
            replan_seconds: self.replan_seconds,
            error,
        }
    }
}

/// Runs a mission to budget exhaustion.
///
/// Configuration problems are errors. Failures after the mission started
/// abort it and return the partial log flagged invalid.
pub fn run_mission(config: &MissionConfig) -> Result<EpisodeLog> {
    let mut mission = Mission::new(config)?;
    loop {
        match mission.step() {
            Ok(true) => {}
            Ok(false) => return Ok(mission.into_log(None)),
            Err(HarnessError::Core(e)) if !e.is_config() => return Ok(mission.into_log(Some(e.to_string()))),
            Err(e) => return Err(e),
        }
    }
}

