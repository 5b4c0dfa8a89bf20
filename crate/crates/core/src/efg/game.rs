//! Game trees with chance, imperfect information and any number of players.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Information set: a player's decision point, shared by all nodes the
/// player cannot tell apart. Names are unique per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Infoset {
    pub player: usize,
    pub name: String,
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Outcomes as `(probability, child)` pairs.
    Chance {
        outcomes: Vec<(f64, usize)>,
    },
    /// `children[a]` follows action `a` of the infoset.
    Decision {
        infoset: usize,
        children: Vec<usize>,
    },
    Terminal {
        payoffs: Vec<f64>,
    },
}

/// An extensive-form game. The JSON encoding is the serde form of this
/// struct; see the repository README for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTree {
    pub players: usize,
    pub root: usize,
    pub infosets: Vec<Infoset>,
    pub nodes: Vec<Node>,
}

const PROBABILITY_TOLERANCE: f64 = 1e-9;

impl GameTree {
    /// Parses and validates a game from its JSON encoding.
    pub fn from_json(text: &str) -> Result<Self> {
        let game: GameTree = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("malformed game JSON: {e}")))?;
        game.validate()?;
        Ok(game)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("game trees always serialize")
    }

    pub fn infoset(&self, id: usize) -> &Infoset {
        &self.infosets[id]
    }

    /// Structural checks: tree shape, chance normalisation, payoff arity,
    /// infoset consistency and perfect recall for every player.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.players == 0 {
            return fail("game needs at least one player".into());
        }
        if self.root >= self.nodes.len() {
            return fail(format!("root {} out of range", self.root));
        }
        for (i, info) in self.infosets.iter().enumerate() {
            if info.player >= self.players {
                return fail(format!(
                    "infoset {i} belongs to unknown player {}",
                    info.player
                ));
            }
            if info.actions.is_empty() {
                return fail(format!("infoset {i} ({}) has no actions", info.name));
            }
        }
        let mut seen_names = HashMap::new();
        for (i, info) in self.infosets.iter().enumerate() {
            if let Some(prev) = seen_names.insert((info.player, info.name.as_str()), i) {
                return fail(format!(
                    "infosets {prev} and {i} share the name {:?} for player {}",
                    info.name, info.player
                ));
            }
        }

        let mut parents = vec![0usize; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            let children: Vec<usize> = match node {
                Node::Chance { outcomes } => {
                    if outcomes.is_empty() {
                        return fail(format!("chance node {id} has no outcomes"));
                    }
                    let mut total = 0.0;
                    for &(p, _) in outcomes {
                        if !(p.is_finite() && p >= 0.0) {
                            return fail(format!("chance node {id} has probability {p}"));
                        }
                        total += p;
                    }
                    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                        return fail(format!("chance node {id} sums to {total}"));
                    }
                    outcomes.iter().map(|&(_, c)| c).collect()
                }
                Node::Decision { infoset, children } => {
                    let Some(info) = self.infosets.get(*infoset) else {
                        return fail(format!("node {id} references unknown infoset {infoset}"));
                    };
                    if children.len() != info.actions.len() {
                        return fail(format!(
                            "node {id} has {} children but infoset {:?} has {} actions",
                            children.len(),
                            info.name,
                            info.actions.len()
                        ));
                    }
                    children.clone()
                }
                Node::Terminal { payoffs } => {
                    if payoffs.len() != self.players {
                        return fail(format!(
                            "terminal {id} has {} payoffs for {} players",
                            payoffs.len(),
                            self.players
                        ));
                    }
                    if payoffs.iter().any(|p| !p.is_finite()) {
                        return fail(format!("terminal {id} has a non-finite payoff"));
                    }
                    Vec::new()
                }
            };
            for c in children {
                if c >= self.nodes.len() {
                    return fail(format!("node {id} points to missing node {c}"));
                }
                parents[c] += 1;
            }
        }
        if parents[self.root] != 0 {
            return fail("root has a parent".into());
        }
        for (id, &count) in parents.iter().enumerate() {
            if id != self.root && count != 1 {
                return fail(format!("node {id} has {count} parents; expected a tree"));
            }
        }
        let reachable = self.preorder().len();
        if reachable != self.nodes.len() {
            return fail(format!(
                "{} nodes are unreachable from the root",
                self.nodes.len() - reachable
            ));
        }
        self.check_perfect_recall()
    }

    /// Node ids in depth-first preorder from the root.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        let mut visited = vec![false; self.nodes.len()];
        while let Some(id) = stack.pop() {
            if visited[id] {
                continue;
            }
            visited[id] = true;
            order.push(id);
            match &self.nodes[id] {
                Node::Chance { outcomes } => stack.extend(outcomes.iter().rev().map(|&(_, c)| c)),
                Node::Decision { children, .. } => stack.extend(children.iter().rev()),
                Node::Terminal { .. } => {}
            }
        }
        order
    }

    /// Every infoset must be reached with the same last own (infoset, action)
    /// pair; inductively this makes the whole own history agree.
    fn check_perfect_recall(&self) -> Result<()> {
        let mut parent_of: Vec<Option<Option<(usize, usize)>>> = vec![None; self.infosets.len()];
        let mut stack = vec![(self.root, vec![None; self.players])];
        while let Some((id, last)) = stack.pop() {
            match &self.nodes[id] {
                Node::Chance { outcomes } => {
                    for &(_, c) in outcomes {
                        stack.push((c, last.clone()));
                    }
                }
                Node::Decision { infoset, children } => {
                    let player = self.infosets[*infoset].player;
                    match parent_of[*infoset] {
                        None => parent_of[*infoset] = Some(last[player]),
                        Some(prev) if prev != last[player] => {
                            return Err(Error::Validation(format!(
                                "perfect recall violated at infoset {:?} of player {player}",
                                self.infosets[*infoset].name
                            )));
                        }
                        Some(_) => {}
                    }
                    for (a, &c) in children.iter().enumerate() {
                        let mut next = last.clone();
                        next[player] = Some((*infoset, a));
                        stack.push((c, next));
                    }
                }
                Node::Terminal { .. } => {}
            }
        }
        Ok(())
    }

    /// `max − min` over every payoff of every terminal.
    pub fn payoff_range(&self) -> f64 {
        let (lo, hi) = self.payoff_bounds();
        hi - lo
    }

    pub fn payoff_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for node in &self.nodes {
            if let Node::Terminal { payoffs } = node {
                for &p in payoffs {
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
            }
        }
        (lo, hi)
    }

    /// Constant `c` with `Σ_i u_i(z) = c` at every terminal, if any.
    pub fn constant_sum(&self) -> Option<f64> {
        let mut sum = None;
        for node in &self.nodes {
            if let Node::Terminal { payoffs } = node {
                let s: f64 = payoffs.iter().sum();
                match sum {
                    None => sum = Some(s),
                    Some(prev) if (prev - s).abs() > 1e-9 => return None,
                    Some(_) => {}
                }
            }
        }
        sum
    }

    pub fn is_zero_sum(&self) -> bool {
        matches!(self.constant_sum(), Some(c) if c.abs() <= 1e-9)
    }

    /// Same game with every payoff mapped affinely onto `[0, 1]`.
    pub fn normalized(&self) -> GameTree {
        let (lo, hi) = self.payoff_bounds();
        let range = if hi > lo { hi - lo } else { 1.0 };
        let mut out = self.clone();
        for node in &mut out.nodes {
            if let Node::Terminal { payoffs } = node {
                payoffs.iter_mut().for_each(|p| *p = (*p - lo) / range);
            }
        }
        out
    }
}

/// Incremental construction, children first. Infosets are interned by
/// `(player, name)` and must keep the same action labels.
#[derive(Debug, Clone)]
pub struct GameBuilder {
    players: usize,
    infosets: Vec<Infoset>,
    index: HashMap<(usize, String), usize>,
    nodes: Vec<Node>,
}

impl GameBuilder {
    pub fn new(players: usize) -> Self {
        Self {
            players,
            infosets: Vec::new(),
            index: HashMap::new(),
            nodes: Vec::new(),
        }
    }

    pub fn terminal(&mut self, payoffs: Vec<f64>) -> usize {
        self.nodes.push(Node::Terminal { payoffs });
        self.nodes.len() - 1
    }

    pub fn chance(&mut self, outcomes: Vec<(f64, usize)>) -> usize {
        self.nodes.push(Node::Chance { outcomes });
        self.nodes.len() - 1
    }

    pub fn decision(
        &mut self,
        player: usize,
        infoset: &str,
        actions: &[&str],
        children: Vec<usize>,
    ) -> Result<usize> {
        let key = (player, infoset.to_string());
        let id = match self.index.get(&key) {
            Some(&id) => {
                let existing = &self.infosets[id].actions;
                if existing.len() != actions.len()
                    || existing.iter().zip(actions).any(|(a, b)| a != b)
                {
                    return Err(Error::Validation(format!(
                        "infoset {infoset:?} of player {player} reused with different actions"
                    )));
                }
                id
            }
            None => {
                self.infosets.push(Infoset {
                    player,
                    name: infoset.to_string(),
                    actions: actions.iter().map(|a| a.to_string()).collect(),
                });
                self.index.insert(key, self.infosets.len() - 1);
                self.infosets.len() - 1
            }
        };
        self.nodes.push(Node::Decision {
            infoset: id,
            children,
        });
        Ok(self.nodes.len() - 1)
    }

    pub fn finish(self, root: usize) -> Result<GameTree> {
        let game = GameTree {
            players: self.players,
            root,
            infosets: self.infosets,
            nodes: self.nodes,
        };
        game.validate()?;
        Ok(game)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GameTree {
        let mut b = GameBuilder::new(2);
        let t1 = b.terminal(vec![1.0, -1.0]);
        let t2 = b.terminal(vec![-1.0, 1.0]);
        let d = b.decision(0, "root", &["l", "r"], vec![t1, t2]).unwrap();
        b.finish(d).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let g = tiny();
        let back = GameTree::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        assert!(g.to_json().contains("\"kind\":\"terminal\""));
    }

    #[test]
    fn detects_bad_chance() {
        let mut b = GameBuilder::new(1);
        let t = b.terminal(vec![0.0]);
        let u = b.terminal(vec![1.0]);
        let c = b.chance(vec![(0.5, t), (0.4, u)]);
        assert!(b.finish(c).is_err());
    }

    #[test]
    fn detects_shared_children() {
        let g = GameTree {
            players: 1,
            root: 0,
            infosets: vec![Infoset {
                player: 0,
                name: "a".into(),
                actions: vec!["x".into(), "y".into()],
            }],
            nodes: vec![
                Node::Decision {
                    infoset: 0,
                    children: vec![1, 1],
                },
                Node::Terminal { payoffs: vec![0.0] },
            ],
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn detects_imperfect_recall() {
        // Player 0 acts, then reaches the same infoset after either action.
        let mut b = GameBuilder::new(1);
        let leaves: Vec<usize> = (0..4).map(|i| b.terminal(vec![i as f64])).collect();
        let d1 = b
            .decision(0, "forget", &["a", "b"], vec![leaves[0], leaves[1]])
            .unwrap();
        let d2 = b
            .decision(0, "forget", &["a", "b"], vec![leaves[2], leaves[3]])
            .unwrap();
        let root = b.decision(0, "root", &["l", "r"], vec![d1, d2]).unwrap();
        let err = b.finish(root).unwrap_err();
        assert!(err.to_string().contains("perfect recall"), "{err}");
    }

    #[test]
    fn reused_infoset_with_other_actions_is_rejected() {
        let mut b = GameBuilder::new(1);
        let t = b.terminal(vec![0.0]);
        b.decision(0, "i", &["a"], vec![t]).unwrap();
        let u = b.terminal(vec![0.0]);
        assert!(b.decision(0, "i", &["b"], vec![u]).is_err());
    }

    #[test]
    fn payoff_helpers() {
        let g = tiny();
        assert_eq!(g.payoff_range(), 2.0);
        assert!(g.is_zero_sum());
        let n = g.normalized();
        assert_eq!(n.payoff_bounds(), (0.0, 1.0));
        assert_eq!(n.constant_sum(), Some(1.0));
    }

    #[test]
    fn malformed_json_is_a_validation_error() {
        assert!(matches!(
            GameTree::from_json("{"),
            Err(Error::Validation(_))
        ));
    }
}
