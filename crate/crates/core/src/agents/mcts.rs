use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{agent_rng, argmax_uniform, heuristic, random_act, Agent, AgentBudget};
use crate::engine::{ActionId, GameState, PlayerId};
use crate::error::AgentError;

/// Statistics of one edge out of a [`SearchNode`].
#[derive(Clone, Debug, PartialEq)]
pub struct Child {
    pub action: ActionId,
    pub visits: u32,
    /// Summed evaluation for every player.
    pub value: Vec<f64>,
    /// Index of the node reached through this edge, once expanded.
    pub node: Option<usize>,
}

impl Child {
    /// Mean value from `player`'s perspective.
    pub fn mean(&self, player: usize) -> f64 {
        self.value[player] / self.visits as f64
    }
}

/// Node of an open-loop tree: it stands for an action sequence, so the
/// acting player and the legal actions come from the sampled state.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SearchNode {
    pub visits: u32,
    pub player: usize,
    pub children: Vec<Child>,
}

impl SearchNode {
    pub fn child(&self, action: ActionId) -> Option<&Child> {
        self.children.iter().find(|c| c.action == action)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchTree {
    pub nodes: Vec<SearchNode>,
}

impl SearchTree {
    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    /// Most visited root action, ties broken uniformly.
    pub fn best_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<ActionId> {
        let scored: Vec<(ActionId, f64)> = self
            .root()
            .children
            .iter()
            .map(|c| (c.action, c.visits as f64))
            .collect();
        argmax_uniform(&scored, rng)
    }
}

/// UCT choice among `legal`: any action never tried from this node goes
/// first (uniformly among them), otherwise the argmax of
/// `Q + c * sqrt(ln N / n)` with `Q` taken from `player`'s perspective.
pub fn select_child<R: Rng + ?Sized>(
    node: &SearchNode,
    legal: &[ActionId],
    player: usize,
    c: f64,
    rng: &mut R,
) -> ActionId {
    let untried: Vec<ActionId> = legal
        .iter()
        .copied()
        .filter(|&a| node.child(a).map_or(true, |ch| ch.visits == 0))
        .collect();
    if let Some(&a) = untried.choose(rng) {
        return a;
    }
    let ln_n = (node.visits.max(1) as f64).ln();
    let scored: Vec<(ActionId, f64)> = legal
        .iter()
        .map(|&a| {
            let ch = node.child(a).expect("tried");
            (a, ch.mean(player) + c * (ln_n / ch.visits as f64).sqrt())
        })
        .collect();
    argmax_uniform(&scored, rng).expect("legal actions present")
}

fn evaluate(state: &GameState) -> Vec<f64> {
    (0..state.num_players())
        .map(|p| heuristic(state, PlayerId(p)))
        .collect()
}

/// Runs `budget.mcts_iterations` iterations, each on a fresh
/// redeterminization of `state` from `player`'s point of view.
pub fn search<R: Rng + ?Sized>(
    state: &GameState,
    player: PlayerId,
    budget: &AgentBudget,
    rng: &mut R,
) -> Result<SearchTree, AgentError> {
    let root_player = state.current_player()?;
    let n = state.num_players();
    let mut nodes = vec![SearchNode {
        player: root_player.0,
        ..Default::default()
    }];
    let mut path: Vec<(usize, usize)> = Vec::new();
    for _ in 0..budget.mcts_iterations.max(1) {
        let mut sim = state.redeterminize(player, rng.gen());
        path.clear();
        let mut node = 0;
        // selection and expansion
        loop {
            let Ok(actor) = sim.current_player() else { break };
            let legal: Vec<ActionId> = sim.legal_actions()?.legal().collect();
            let a = select_child(
                &nodes[node],
                &legal,
                actor.0,
                budget.exploration_constant,
                rng,
            );
            sim.apply(a)?;
            let ci = match nodes[node].children.iter().position(|c| c.action == a) {
                Some(ci) => ci,
                None => {
                    nodes[node].children.push(Child {
                        action: a,
                        visits: 0,
                        value: vec![0.0; n],
                        node: None,
                    });
                    nodes[node].children.len() - 1
                }
            };
            path.push((node, ci));
            let fresh = nodes[node].children[ci].visits == 0;
            match nodes[node].children[ci].node {
                Some(next) => node = next,
                None => {
                    let next = nodes.len();
                    nodes.push(SearchNode {
                        player: sim.current_player().map_or(actor.0, |p| p.0),
                        ..Default::default()
                    });
                    nodes[node].children[ci].node = Some(next);
                    node = next;
                }
            }
            if fresh {
                break;
            }
        }
        // rollout
        let mut depth = 0;
        while depth < budget.rollout_depth_cap && !sim.is_terminal() {
            let a = random_act(&sim.legal_actions()?, rng)?;
            sim.apply(a)?;
            depth += 1;
        }
        let value = evaluate(&sim);
        nodes[0].visits += 1;
        for &(nd, ci) in &path {
            let ch = &mut nodes[nd].children[ci];
            ch.visits += 1;
            for (w, v) in ch.value.iter_mut().zip(&value) {
                *w += v;
            }
            if let Some(next) = ch.node {
                nodes[next].visits += 1;
            }
        }
    }
    Ok(SearchTree { nodes })
}

pub fn mcts_act<R: Rng + ?Sized>(
    state: &GameState,
    player: PlayerId,
    budget: &AgentBudget,
    rng: &mut R,
) -> Result<ActionId, AgentError> {
    let tree = search(state, player, budget, rng)?;
    tree.best_action(rng).ok_or(AgentError::EmptyMask)
}

pub struct MctsAgent {
    budget: AgentBudget,
    rng: ChaCha8Rng,
}

impl MctsAgent {
    pub fn new(budget: AgentBudget, seed: u64) -> Self {
        Self {
            budget,
            rng: agent_rng(seed),
        }
    }
}

impl Agent for MctsAgent {
    fn name(&self) -> &str {
        "mcts"
    }

    fn act(&mut self, state: &GameState) -> Result<ActionId, AgentError> {
        let me = state.current_player()?;
        mcts_act(state, me, &self.budget, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::GameId;
    use rand::SeedableRng;

    fn child(action: ActionId, visits: u32, value: f64) -> Child {
        Child {
            action,
            visits,
            value: vec![value, -value],
            node: None,
        }
    }

    #[test]
    fn zero_exploration_is_greedy() {
        let node = SearchNode {
            visits: 30,
            player: 0,
            children: vec![child(0, 10, 2.0), child(1, 10, 7.0), child(2, 10, 5.0)],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_child(&node, &[0, 1, 2], 0, 0.0, &mut rng), 1);
        // the other player's perspective prefers the smallest sum
        assert_eq!(select_child(&node, &[0, 1, 2], 1, 0.0, &mut rng), 0);
    }

    #[test]
    fn untried_actions_come_first() {
        let node = SearchNode {
            visits: 100,
            player: 0,
            children: vec![child(0, 99, 99.0), child(1, 1, -1.0)],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(select_child(&node, &[0, 1, 2], 0, 1.4, &mut rng), 2);
        }
    }

    #[test]
    fn root_visits_equal_iterations_and_state_untouched() {
        let s = GameState::reset(GameId::LoveLetter, 3, 4).unwrap();
        let before = s.to_bytes();
        let budget = AgentBudget {
            mcts_iterations: 64,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = search(&s, s.current_player().unwrap(), &budget, &mut rng).unwrap();
        assert_eq!(tree.root().visits, 64);
        assert_eq!(tree.root().children.iter().map(|c| c.visits).sum::<u32>(), 64);
        assert_eq!(s.to_bytes(), before);
    }

    #[test]
    fn finds_the_winning_move() {
        let mut s = GameState::reset(GameId::TicTacToe, 2, 0).unwrap();
        for a in [0, 3, 1, 4] {
            s.apply(a).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let me = s.current_player().unwrap();
        assert_eq!(mcts_act(&s, me, &AgentBudget::default(), &mut rng).unwrap(), 2);
    }
}
