use super::{affordable_steps, feasible_actions, Action, Planner, PlannerConfig, PlanningContext};
use crate::error::Result;
use crate::grid::Pose;
use crate::scalar::Real;

use super::lookahead::LookaheadBelief;

/// Best single move from `pose`; ties go to the earliest action in compass order.
fn best_move<T: Real>(look: &LookaheadBelief<T>, pose: Pose) -> Result<(Action, Pose, LookaheadBelief<T>)> {
    let mut best: Option<(T, Action, Pose, LookaheadBelief<T>)> = None;
    for (action, next) in feasible_actions(look.geometry(), pose) {
        let mut after = look.clone();
        let r = after.advance(next)?;
        if best.as_ref().is_none_or(|(b, ..)| r > *b) {
            best = Some((r, action, next, after));
        }
    }
    let (_, a, p, l) = best.expect("grids are at least 2x2 so some move is feasible");
    Ok((a, p, l))
}

/// One-step lookahead: the action with the highest expected reward.
pub fn greedy_plan<T: Real>(ctx: &PlanningContext<'_, T>, _config: &PlannerConfig) -> Result<Option<Action>> {
    if affordable_steps(ctx.state.remaining_budget, 1) == 0 {
        return Ok(None);
    }
    let look = ctx.lookahead()?;
    Ok(Some(best_move(&look, ctx.state.pose)?.0))
}

/// Poses visited by chaining `steps` greedy moves.
pub fn greedy_path<T: Real>(ctx: &PlanningContext<'_, T>, steps: usize) -> Result<Vec<(Action, Pose)>> {
    let mut look = ctx.lookahead()?;
    let mut pose = ctx.state.pose;
    let mut path = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (a, p, l) = best_move(&look, pose)?;
        path.push((a, p));
        look = l;
        pose = p;
    }
    Ok(path)
}

#[derive(Clone, Debug, Default)]
pub struct GreedyPlanner {
    pub config: PlannerConfig,
}

impl<T: Real> Planner<T> for GreedyPlanner {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn plan(&mut self, ctx: &PlanningContext<'_, T>) -> Result<Option<Action>> {
        greedy_plan(ctx, &self.config)
    }
}
