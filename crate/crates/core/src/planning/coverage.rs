use super::{Action, Planner, PlanningContext};
use crate::error::{IppError, Result};
use crate::grid::{GridGeometry, Pose};
use crate::scalar::Real;

/// Boustrophedon sweep: full rows joined by vertical moves of `step` rows,
/// bouncing back at the top and bottom. Yields `budget` actions.
pub fn coverage_plan(geometry: GridGeometry, start: Pose, step: usize, budget: usize) -> Result<Vec<Action>> {
    geometry.check_pose(start)?;
    if step == 0 {
        return Err(IppError::config("coverage row spacing must be >= 1"));
    }
    let (w, h) = (geometry.width() as i64, geometry.height() as i64);
    let mut pose = (start.x as i64, start.y as i64);
    let mut east = pose.0 < w - 1;
    let mut south = pose.1 + step as i64 <= h - 1 || pose.1 == 0;
    let mut out = Vec::with_capacity(budget);
    let push = |a: Action, pose: &mut (i64, i64), out: &mut Vec<Action>| {
        let (dx, dy) = a.offset();
        pose.0 += dx;
        pose.1 += dy;
        out.push(a);
        out.len() >= budget
    };
    if budget == 0 {
        return Ok(out);
    }
    loop {
        let end = if east { w - 1 } else { 0 };
        let a = if east { Action::E } else { Action::W };
        while pose.0 != end {
            if push(a, &mut pose, &mut out) {
                return Ok(out);
            }
        }
        east = !east;
        let dir = |south: bool| if south { step as i64 } else { -(step as i64) };
        let mut target = pose.1 + dir(south);
        if !(0..h).contains(&target) {
            south = !south;
            target = (pose.1 + dir(south)).clamp(0, h - 1);
        }
        let a = if south { Action::S } else { Action::N };
        while pose.1 != target {
            if push(a, &mut pose, &mut out) {
                return Ok(out);
            }
        }
    }
}

/// Replays a precomputed sweep; ignores the belief.
pub struct CoveragePlanner {
    pub step: usize,
    queue: Option<std::vec::IntoIter<Action>>,
}

impl CoveragePlanner {
    pub fn new(step: usize) -> Self {
        CoveragePlanner { step, queue: None }
    }
}

impl<T: Real> Planner<T> for CoveragePlanner {
    fn name(&self) -> &'static str {
        "coverage"
    }

    fn plan(&mut self, ctx: &PlanningContext<'_, T>) -> Result<Option<Action>> {
        let steps = super::affordable_steps(ctx.state.remaining_budget, usize::MAX);
        if steps == 0 {
            return Ok(None);
        }
        if self.queue.is_none() {
            let plan = coverage_plan(ctx.geometry(), ctx.state.pose, self.step, steps)?;
            self.queue = Some(plan.into_iter());
        }
        Ok(self.queue.as_mut().and_then(|q| q.next()))
    }
}
