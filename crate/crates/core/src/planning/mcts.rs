use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lookahead::LookaheadBelief;
use super::{affordable_steps, feasible_actions, Action, Planner, PlannerConfig, PlanningContext};
use crate::error::Result;
use crate::grid::Pose;
use crate::scalar::Real;

struct Node<T> {
    pose: Pose,
    depth: usize,
    action: Option<Action>,
    look: LookaheadBelief<T>,
    /// Reward earned on the edge into this node.
    reward: f64,
    children: Vec<usize>,
    /// Unexpanded moves, in reverse compass order so `pop` yields compass order.
    untried: Vec<(Action, Pose)>,
    visits: u32,
    value_sum: f64,
}

impl<T: Real> Node<T> {
    fn new(pose: Pose, depth: usize, action: Option<Action>, look: LookaheadBelief<T>, reward: f64) -> Self {
        let mut untried = feasible_actions(look.geometry(), pose);
        untried.reverse();
        Node { pose, depth, action, look, reward, children: Vec::new(), untried, visits: 0, value_sum: 0.0 }
    }

    fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.value_sum / self.visits as f64
        }
    }
}

/// UCT search over `min(horizon, affordable steps)` moves with uniform random rollouts.
pub fn mcts_search<T: Real, R: Rng + ?Sized>(
    ctx: &PlanningContext<'_, T>,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<Option<Action>> {
    let depth = affordable_steps(ctx.state.remaining_budget, config.horizon);
    if depth == 0 {
        return Ok(None);
    }
    let gamma = config.mcts.discount;
    let c_ucb = config.mcts.exploration;
    let mut nodes = vec![Node::new(ctx.state.pose, 0, None, ctx.lookahead()?, 0.0)];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut path = Vec::with_capacity(depth + 1);

    for _ in 0..config.mcts.simulations {
        path.clear();
        let mut id = 0;
        path.push(id);
        // selection
        while nodes[id].depth < depth && nodes[id].untried.is_empty() {
            let parent_visits = nodes[id].visits.max(1) as f64;
            let range = if hi > lo { hi - lo } else { 1.0 };
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for &ch in &nodes[id].children {
                let child = &nodes[ch];
                let score = if child.visits == 0 {
                    f64::INFINITY
                } else {
                    child.mean() + c_ucb * range * (parent_visits.ln() / child.visits as f64).sqrt()
                };
                if score > best.0 {
                    best = (score, ch);
                }
            }
            id = best.1;
            path.push(id);
        }
        // expansion
        if nodes[id].depth < depth {
            let (action, pose) = nodes[id].untried.pop().expect("untried moves remain");
            let mut look = nodes[id].look.clone();
            let r = look.advance(pose)?.as_f64();
            let child = Node::new(pose, nodes[id].depth + 1, Some(action), look, r);
            nodes.push(child);
            let ch = nodes.len() - 1;
            nodes[id].children.push(ch);
            id = ch;
            path.push(id);
        }
        // rollout
        let mut ret = 0.0;
        if nodes[id].depth < depth {
            let mut look = nodes[id].look.clone();
            let mut pose = nodes[id].pose;
            let mut discount = 1.0;
            for _ in nodes[id].depth..depth {
                let moves = feasible_actions(look.geometry(), pose);
                let &(_, next) = moves.choose(rng).expect("some move is feasible");
                ret += discount * look.advance(next)?.as_f64();
                discount *= gamma;
                pose = next;
            }
        }
        // backpropagation
        for &n in path.iter().rev() {
            let node = &mut nodes[n];
            if n != 0 {
                ret = node.reward + gamma * ret;
            }
            node.visits += 1;
            node.value_sum += ret;
            if node.depth == 1 {
                lo = lo.min(ret);
                hi = hi.max(ret);
            }
        }
    }

    let mut best: Option<&Node<T>> = None;
    for &ch in &nodes[0].children {
        let c = &nodes[ch];
        let better = match best {
            None => true,
            Some(b) => c.visits > b.visits || (c.visits == b.visits && c.mean() > b.mean()),
        };
        if better {
            best = Some(c);
        }
    }
    Ok(best.and_then(|n| n.action))
}

/// MCTS decision seeded from `config.seed`.
pub fn mcts_plan<T: Real>(ctx: &PlanningContext<'_, T>, config: &PlannerConfig) -> Result<Option<Action>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    mcts_search(ctx, config, &mut rng)
}

/// Keeps one random stream across a mission's decisions.
pub struct MctsPlanner {
    pub config: PlannerConfig,
    rng: ChaCha8Rng,
}

impl MctsPlanner {
    pub fn new(config: PlannerConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        MctsPlanner { config, rng }
    }
}

impl<T: Real> Planner<T> for MctsPlanner {
    fn name(&self) -> &'static str {
        "mcts"
    }

    fn plan(&mut self, ctx: &PlanningContext<'_, T>) -> Result<Option<Action>> {
        mcts_search(ctx, &self.config, &mut self.rng)
    }
}
