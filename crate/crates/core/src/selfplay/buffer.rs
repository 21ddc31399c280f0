use crate::ppo::{gae, PpoError, TrainSample};

/// A learner decision: what it saw, what it did and the policy's view.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub obs: Vec<f32>,
    pub mask: Vec<bool>,
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub decision: Decision,
    pub reward: f64,
    pub done: bool,
}

/// Per-environment learner transitions. A decision stays open until the
/// learner's next decision (or the end of the episode) delivers its reward.
#[derive(Clone, Debug, Default)]
pub struct RolloutBuffers {
    closed: Vec<Vec<Transition>>,
    open: Vec<Option<Decision>>,
}

impl RolloutBuffers {
    pub fn new(num_envs: usize) -> Self {
        Self {
            closed: vec![Vec::new(); num_envs],
            open: vec![None; num_envs],
        }
    }

    pub fn len(&self, env: usize) -> usize {
        self.closed[env].len()
    }

    pub fn lens(&self) -> Vec<usize> {
        self.closed.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.closed.iter().map(Vec::len).sum()
    }

    pub fn has_open(&self, env: usize) -> bool {
        self.open[env].is_some()
    }

    /// Records a new learner decision; `reward` is what the learner
    /// received at this decision point and closes the previous one.
    pub fn decide(&mut self, env: usize, reward: f64, decision: Decision) {
        if let Some(prev) = self.open[env].take() {
            self.closed[env].push(Transition {
                decision: prev,
                reward,
                done: false,
            });
        }
        self.open[env] = Some(decision);
    }

    /// Closes the open decision at the end of an episode.
    pub fn finish_episode(&mut self, env: usize, reward: f64) {
        if let Some(prev) = self.open[env].take() {
            self.closed[env].push(Transition {
                decision: prev,
                reward,
                done: true,
            });
        }
    }

    /// Closes a still-running episode's decision without ending it, used
    /// when training stops; `reward` is what accrued so far.
    pub fn truncate(&mut self, env: usize, reward: f64) -> bool {
        match self.open[env].take() {
            Some(prev) => {
                self.closed[env].push(Transition {
                    decision: prev,
                    reward,
                    done: false,
                });
                true
            }
            None => false,
        }
    }

    /// True once any environment holds `horizon` closed transitions.
    pub fn ready(&self, horizon: usize) -> bool {
        self.closed.iter().any(|b| b.len() >= horizon)
    }

    /// Drains every environment's closed transitions into one batch.
    /// `bootstrap(env)` gives the value after the last transition of a
    /// running episode.
    pub fn flush(
        &mut self,
        gamma: f64,
        lambda: f64,
        mut bootstrap: impl FnMut(usize, &Self) -> f64,
    ) -> Result<Vec<TrainSample>, PpoError> {
        let mut out = Vec::with_capacity(self.total());
        for env in 0..self.closed.len() {
            if self.closed[env].is_empty() {
                continue;
            }
            let boot = bootstrap(env, self);
            let seg = std::mem::take(&mut self.closed[env]);
            let r: Vec<f64> = seg.iter().map(|t| t.reward).collect();
            let v: Vec<f64> = seg.iter().map(|t| t.decision.value).collect();
            let d: Vec<bool> = seg.iter().map(|t| t.done).collect();
            let (adv, ret) = gae(&r, &v, &d, boot, gamma, lambda)?;
            for ((t, a), rt) in seg.into_iter().zip(adv).zip(ret) {
                out.push(TrainSample {
                    obs: t.decision.obs,
                    mask: t.decision.mask,
                    action: t.decision.action,
                    old_log_prob: t.decision.log_prob,
                    advantage: a,
                    ret: rt,
                });
            }
        }
        Ok(out)
    }

    /// Value of the open decision in `env`, if any.
    pub fn open_value(&self, env: usize) -> Option<f64> {
        self.open[env].as_ref().map(|d| d.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decision(v: f64) -> Decision {
        Decision {
            obs: vec![0.0],
            mask: vec![true],
            action: 0,
            log_prob: 0.0,
            value: v,
        }
    }

    #[test]
    fn flush_takes_everything_and_clears() {
        let h = 16;
        let mut b = RolloutBuffers::new(3);
        for (env, n) in [h, h - 3, h - 7].into_iter().enumerate() {
            for _ in 0..=n {
                b.decide(env, 0.0, decision(0.0));
            }
        }
        assert_eq!(b.lens(), vec![h, h - 3, h - 7]);
        assert!(b.ready(h));
        let batch = b.flush(0.99, 0.95, |_, _| 0.0).unwrap();
        assert_eq!(batch.len(), 3 * h - 10);
        assert_eq!(b.total(), 0);
        assert!(!b.ready(1));
        // open decisions survive the flush
        assert!((0..3).all(|e| b.has_open(e)));
    }

    #[test]
    fn rewards_close_the_previous_decision() {
        let mut b = RolloutBuffers::new(1);
        b.decide(0, 0.0, decision(0.1));
        b.decide(0, 2.0, decision(0.2));
        b.finish_episode(0, -1.0);
        assert_eq!(b.closed[0].iter().map(|t| (t.reward, t.done)).collect::<Vec<_>>(), vec![(2.0, false), (-1.0, true)]);
        assert!(!b.has_open(0));
    }
}
