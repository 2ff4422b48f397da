use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::greedy::greedy_path;
use super::lookahead::LookaheadBelief;
use super::{affordable_steps, Action, Planner, PlannerConfig, PlanningContext};
use crate::error::Result;
use crate::grid::Pose;
use crate::optim::{cmaes_minimize, CmaesOptions};
use crate::scalar::Real;

/// Walks unit steps towards each waypoint in turn, at most `steps` moves.
/// Returns the summed reward and the first move taken.
fn decode<T: Real>(look: &LookaheadBelief<T>, start: Pose, x: &[T], steps: usize) -> Result<(T, Option<Action>)> {
    let geometry = look.geometry();
    let mut look = look.clone();
    let mut pose = start;
    let mut total = T::zero();
    let mut first = None;
    let mut taken = 0;
    for w in x.chunks_exact(2) {
        let p = [w[0].as_f64().clamp(0.0, 1.0), w[1].as_f64().clamp(0.0, 1.0)];
        let target = geometry.nearest_cell(p);
        while pose != target && taken < steps {
            let dx = target.x as i64 - pose.x as i64;
            let dy = target.y as i64 - pose.y as i64;
            let action = Action::from_offset(dx, dy).expect("non-zero offset");
            pose = action.apply(pose, geometry);
            total += look.advance(pose)?;
            first.get_or_insert(action);
            taken += 1;
        }
    }
    Ok((total, first))
}

/// Optimises `horizon` waypoints with CMA-ES, starting from the greedy path.
pub fn cmaes_search<T: Real, R: Rng + ?Sized>(
    ctx: &PlanningContext<'_, T>,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<Option<Action>> {
    let steps = affordable_steps(ctx.state.remaining_budget, config.horizon);
    if steps == 0 {
        return Ok(None);
    }
    let geometry = ctx.geometry();
    let greedy = greedy_path(ctx, steps)?;
    let x0: Vec<T> = greedy
        .iter()
        .flat_map(|(_, p)| geometry.cell_center(geometry.pose_index(*p)))
        .map(T::lit)
        .collect();
    let look = ctx.lookahead()?;
    let start = ctx.state.pose;
    let options = CmaesOptions {
        population: config.cmaes.population,
        sigma0: T::lit(config.cmaes.sigma0),
        max_generations: config.cmaes.generations,
        target: None,
    };
    let best = cmaes_minimize(|x| decode(&look, start, x, steps).map(|(r, _)| -r), x0, &options, rng)?;
    let (_, first) = decode(&look, start, &best.best_x, steps)?;
    Ok(first.or(Some(greedy[0].0)))
}

/// CMA-ES decision seeded from `config.seed`.
pub fn cmaes_plan<T: Real>(ctx: &PlanningContext<'_, T>, config: &PlannerConfig) -> Result<Option<Action>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    cmaes_search(ctx, config, &mut rng)
}

pub struct CmaesPlanner {
    pub config: PlannerConfig,
    rng: ChaCha8Rng,
}

impl CmaesPlanner {
    pub fn new(config: PlannerConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        CmaesPlanner { config, rng }
    }
}

impl<T: Real> Planner<T> for CmaesPlanner {
    fn name(&self) -> &'static str {
        "cmaes"
    }

    fn plan(&mut self, ctx: &PlanningContext<'_, T>) -> Result<Option<Action>> {
        cmaes_search(ctx, &self.config, &mut self.rng)
    }
}
