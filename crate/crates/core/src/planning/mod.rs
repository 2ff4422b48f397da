//! Online planners that see only the unified state, the map belief and the reward.

mod cmaes;
mod coverage;
mod greedy;
mod lookahead;
mod mcts;

pub use self::cmaes::{cmaes_plan, CmaesPlanner};
pub use coverage::{coverage_plan, CoveragePlanner};
pub use greedy::{greedy_path, greedy_plan, GreedyPlanner};
pub use lookahead::{simulate_update, LookaheadBelief, LookaheadModel};
pub use mcts::{mcts_plan, mcts_search, MctsPlanner};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::MapBelief;
use crate::error::{IppError, Result};
use crate::grid::{GridGeometry, InterestSpec, Pose};
use crate::scalar::Real;
use crate::unified::UnifiedState;

/// Every action moves one cell and costs one budget unit.
pub const ACTION_COST: f64 = 1.0;

/// One-cell compass move, listed in tie-breaking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Action {
    pub const ALL: [Action; 8] = [
        Action::N,
        Action::NE,
        Action::E,
        Action::SE,
        Action::S,
        Action::SW,
        Action::W,
        Action::NW,
    ];

    /// `(dx, dy)` with y growing southwards.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Action::N => (0, -1),
            Action::NE => (1, -1),
            Action::E => (1, 0),
            Action::SE => (1, 1),
            Action::S => (0, 1),
            Action::SW => (-1, 1),
            Action::W => (-1, 0),
            Action::NW => (-1, -1),
        }
    }

    pub fn from_offset(dx: i64, dy: i64) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.offset() == (dx.signum(), dy.signum()))
    }

    /// Resulting pose, clamped to the grid.
    pub fn apply(self, pose: Pose, geometry: GridGeometry) -> Pose {
        let (dx, dy) = self.offset();
        let x = (pose.x as i64 + dx).clamp(0, geometry.width() as i64 - 1);
        let y = (pose.y as i64 + dy).clamp(0, geometry.height() as i64 - 1);
        Pose::new(x as usize, y as usize)
    }

    pub fn cost(self) -> f64 {
        ACTION_COST
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Actions whose move stays inside the grid, in compass order.
///
/// Moves that would be clamped at the border are dropped, so no two feasible
/// actions lead to the same pose and none leaves the robot in place.
pub fn feasible_actions(geometry: GridGeometry, pose: Pose) -> Vec<(Action, Pose)> {
    Action::ALL
        .into_iter()
        .filter_map(|a| {
            let (dx, dy) = a.offset();
            let (x, y) = (pose.x as i64 + dx, pose.y as i64 + dy);
            geometry.contains(x, y).then(|| (a, Pose::new(x as usize, y as usize)))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetState {
    pub initial: f64,
    pub remaining: f64,
}

impl BudgetState {
    pub fn new(initial: f64) -> Result<Self> {
        if !(initial > 0.0 && initial.is_finite()) {
            return Err(IppError::config(format!("budget must be positive, got {initial}")));
        }
        Ok(BudgetState { initial, remaining: initial })
    }

    pub fn consumed(&self) -> f64 {
        self.initial - self.remaining
    }

    pub fn can_afford(&self, action: Action) -> bool {
        self.remaining >= action.cost()
    }

    pub fn spend(&mut self, action: Action) -> Result<()> {
        if !self.can_afford(action) {
            return Err(IppError::config(format!("action {action} exceeds remaining budget {}", self.remaining)));
        }
        self.remaining -= action.cost();
        Ok(())
    }
}

/// Number of unit actions affordable with `remaining` budget, capped at `horizon`.
pub(crate) fn affordable_steps<T: Real>(remaining: T, horizon: usize) -> usize {
    let steps = (remaining.as_f64() / ACTION_COST + 1e-9).floor();
    if steps <= 0.0 {
        0
    } else {
        (steps as usize).min(horizon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MctsConfig {
    pub simulations: usize,
    /// UCB exploration constant, scaled by the observed return range.
    pub exploration: f64,
    pub discount: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig { simulations: 300, exploration: 1.0, discount: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmaesConfig {
    pub population: usize,
    pub sigma0: f64,
    pub generations: usize,
}

impl Default for CmaesConfig {
    fn default() -> Self {
        CmaesConfig { population: 12, sigma0: 0.1, generations: 30 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub horizon: usize,
    pub mcts: MctsConfig,
    pub cmaes: CmaesConfig,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { horizon: 5, mcts: MctsConfig::default(), cmaes: CmaesConfig::default(), seed: 0 }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(IppError::config("planning horizon must be >= 1"));
        }
        if self.mcts.simulations < 1 {
            return Err(IppError::config("MCTS needs at least one simulation"));
        }
        if !(self.mcts.exploration >= 0.0) || !(self.mcts.discount > 0.0 && self.mcts.discount <= 1.0) {
            return Err(IppError::config("MCTS exploration must be >= 0 and discount in (0, 1]"));
        }
        if self.cmaes.population < 4 {
            return Err(IppError::config("CMA-ES population must be >= 4"));
        }
        if !(self.cmaes.sigma0 > 0.0) {
            return Err(IppError::config("CMA-ES initial step size must be > 0"));
        }
        Ok(())
    }
}

/// Everything a planner may look at for one decision.
pub struct PlanningContext<'a, T> {
    pub state: &'a UnifiedState<T>,
    pub belief: &'a MapBelief<T>,
    pub spec: &'a InterestSpec<T>,
    pub model: &'a LookaheadModel<T>,
}

impl<'a, T: Real> PlanningContext<'a, T> {
    /// Lookahead rooted at the live belief with the state's interest grid frozen.
    pub fn lookahead(&self) -> Result<LookaheadBelief<T>> {
        LookaheadBelief::new(self.belief, self.state.interest.clone(), self.model)
    }

    pub fn geometry(&self) -> GridGeometry {
        self.state.geometry
    }
}

/// A planner chooses the next action, or `None` once the budget cannot pay for one.
pub trait Planner<T: Real> {
    fn name(&self) -> &'static str;

    fn plan(&mut self, ctx: &PlanningContext<'_, T>) -> Result<Option<Action>>;
}
