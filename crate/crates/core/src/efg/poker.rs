//! Multiplayer Kuhn and Leduc poker generators.
//!
//! Both share one betting engine: every player antes, cards are dealt by
//! rank (suits are strategically irrelevant, so deals are merged by rank with
//! the matching probabilities), and each betting round lets players check or
//! bet until someone bets; afterwards every other live player must fold, call
//! or (while under the raise cap) raise. Payoffs are net chips.

use std::collections::VecDeque;

use super::game::{GameBuilder, GameTree};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LeducParams {
    pub players: usize,
    pub ranks: usize,
    pub suits: usize,
    /// Maximum number of bets/raises per round.
    pub max_bets: usize,
    /// Bet size in the first and second round.
    pub raise_sizes: [f64; 2],
    pub ante: f64,
}

impl LeducParams {
    pub fn new(players: usize) -> Self {
        Self {
            players,
            ranks: 3,
            suits: 3,
            max_bets: 1,
            raise_sizes: [2.0, 4.0],
            ante: 1.0,
        }
    }
}

/// Kuhn poker with `players` players and a deck of `ranks` distinct cards.
pub fn kuhn(players: usize, ranks: usize) -> Result<GameTree> {
    if players < 2 {
        return Err(Error::InvalidArgument(
            "Kuhn poker needs at least 2 players".into(),
        ));
    }
    if ranks < players {
        return Err(Error::InvalidArgument(format!(
            "Kuhn poker with {players} players needs at least {players} ranks, got {ranks}"
        )));
    }
    let rules = Rules {
        players,
        copies: vec![1; ranks],
        raise_sizes: vec![1.0],
        max_bets: 1,
        ante: 1.0,
        board: false,
    };
    rules.generate()
}

pub fn leduc(params: &LeducParams) -> Result<GameTree> {
    if !(2..=4).contains(&params.players) {
        return Err(Error::InvalidArgument(format!(
            "Leduc poker supports 2 to 4 players, got {}",
            params.players
        )));
    }
    if params.ranks == 0 || params.suits == 0 || params.max_bets == 0 {
        return Err(Error::InvalidArgument(
            "Leduc poker needs ranks, suits and max_bets >= 1".into(),
        ));
    }
    if params.ranks * params.suits < params.players + 1 {
        return Err(Error::InvalidArgument(format!(
            "deck of {} cards cannot deal {} hands plus a board card",
            params.ranks * params.suits,
            params.players
        )));
    }
    let rules = Rules {
        players: params.players,
        copies: vec![params.suits; params.ranks],
        raise_sizes: params.raise_sizes.to_vec(),
        max_bets: params.max_bets,
        ante: params.ante,
        board: true,
    };
    rules.generate()
}

struct Rules {
    players: usize,
    /// Cards per rank in a fresh deck.
    copies: Vec<usize>,
    /// One entry per betting round.
    raise_sizes: Vec<f64>,
    max_bets: usize,
    ante: f64,
    /// Whether a board card is revealed between rounds.
    board: bool,
}

#[derive(Clone)]
struct Hand {
    cards: Vec<usize>,
    board: Option<usize>,
    deck: Vec<usize>,
    contrib: Vec<f64>,
    folded: Vec<bool>,
    history: String,
}

impl Hand {
    fn live(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.folded.len()).filter(|&i| !self.folded[i])
    }
}

impl Rules {
    fn generate(&self) -> Result<GameTree> {
        let mut b = GameBuilder::new(self.players);
        let hand = Hand {
            cards: Vec::with_capacity(self.players),
            board: None,
            deck: self.copies.clone(),
            contrib: vec![self.ante; self.players],
            folded: vec![false; self.players],
            history: String::new(),
        };
        let root = self.deal_private(&mut b, hand)?;
        b.finish(root)
    }

    fn deal_private(&self, b: &mut GameBuilder, hand: Hand) -> Result<usize> {
        if hand.cards.len() == self.players {
            let pending = hand.live().collect();
            return self.betting(b, hand, 0, pending, 0);
        }
        let left: usize = hand.deck.iter().sum();
        let mut outcomes = Vec::new();
        for rank in 0..hand.deck.len() {
            if hand.deck[rank] == 0 {
                continue;
            }
            let p = hand.deck[rank] as f64 / left as f64;
            let mut next = hand.clone();
            next.deck[rank] -= 1;
            next.cards.push(rank);
            outcomes.push((p, self.deal_private(b, next)?));
        }
        Ok(b.chance(outcomes))
    }

    fn betting(
        &self,
        b: &mut GameBuilder,
        hand: Hand,
        round: usize,
        mut pending: VecDeque<usize>,
        bets: usize,
    ) -> Result<usize> {
        if hand.live().count() == 1 {
            return Ok(self.settle(b, &hand));
        }
        let Some(&p) = pending.front() else {
            return self.end_round(b, hand, round);
        };
        let level = hand.contrib.iter().copied().fold(f64::MIN, f64::max);
        let to_call = level - hand.contrib[p];
        let can_raise = bets < self.max_bets;
        let name = self.infoset_name(&hand, p);
        let mut labels = Vec::new();
        let mut children = Vec::new();

        let rest: VecDeque<usize> = pending.iter().skip(1).copied().collect();
        if to_call == 0.0 {
            let mut next = hand.clone();
            next.history.push('c');
            labels.push("check");
            children.push(self.betting(b, next, round, rest.clone(), bets)?);
        } else {
            let mut next = hand.clone();
            next.history.push('f');
            next.folded[p] = true;
            labels.push("fold");
            children.push(self.betting(b, next, round, rest.clone(), bets)?);

            let mut next = hand.clone();
            next.history.push('k');
            next.contrib[p] = level;
            labels.push("call");
            children.push(self.betting(b, next, round, rest, bets)?);
        }
        if can_raise {
            let mut next = hand.clone();
            next.history.push(if to_call == 0.0 { 'b' } else { 'r' });
            next.contrib[p] = level + self.raise_sizes[round];
            labels.push(if to_call == 0.0 { "bet" } else { "raise" });
            let n = self.players;
            let after: VecDeque<usize> = (1..n)
                .map(|k| (p + k) % n)
                .filter(|&i| !next.folded[i])
                .collect();
            children.push(self.betting(b, next, round, after, bets + 1)?);
        }
        pending.clear();
        b.decision(p, &name, &labels, children)
    }

    fn end_round(&self, b: &mut GameBuilder, hand: Hand, round: usize) -> Result<usize> {
        if !self.board || round + 1 >= self.raise_sizes.len() {
            return Ok(self.settle(b, &hand));
        }
        let left: usize = hand.deck.iter().sum();
        let mut outcomes = Vec::new();
        for rank in 0..hand.deck.len() {
            if hand.deck[rank] == 0 {
                continue;
            }
            let p = hand.deck[rank] as f64 / left as f64;
            let mut next = hand.clone();
            next.deck[rank] -= 1;
            next.board = Some(rank);
            next.history.push('/');
            let pending = next.live().collect();
            outcomes.push((p, self.betting(b, next, round + 1, pending, 0)?));
        }
        Ok(b.chance(outcomes))
    }

    fn infoset_name(&self, hand: &Hand, player: usize) -> String {
        match hand.board {
            Some(board) => format!("{}|{}:{}", hand.cards[player], board, hand.history),
            None => format!("{}:{}", hand.cards[player], hand.history),
        }
    }

    fn strength(&self, hand: &Hand, player: usize) -> usize {
        let card = hand.cards[player];
        match hand.board {
            Some(board) if board == card => self.copies.len() + card,
            _ => card,
        }
    }

    /// Pot goes to the best live hand; ties split evenly.
    fn settle(&self, b: &mut GameBuilder, hand: &Hand) -> usize {
        let pot: f64 = hand.contrib.iter().sum();
        let best = hand
            .live()
            .map(|i| self.strength(hand, i))
            .max()
            .unwrap_or(0);
        let winners: Vec<usize> = hand
            .live()
            .filter(|&i| self.strength(hand, i) == best)
            .collect();
        let share = pot / winners.len() as f64;
        let payoffs = (0..self.players)
            .map(|i| {
                if winners.contains(&i) {
                    share - hand.contrib[i]
                } else {
                    -hand.contrib[i]
                }
            })
            .collect();
        b.terminal(payoffs)
    }
}
