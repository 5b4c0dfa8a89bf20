//! Normal-form games encoded as game trees: players move in turn, each
//! without observing the others.

use super::game::{GameBuilder, GameTree};
use crate::error::{Error, Result};

/// Builds the tree of a normal-form game with `actions[i]` choices for
/// player `i` and payoff vector `payoff(profile)`.
pub fn normal_form<F>(actions: &[usize], payoff: F) -> Result<GameTree>
where
    F: Fn(&[usize]) -> Vec<f64>,
{
    if actions.is_empty() || actions.contains(&0) {
        return Err(Error::InvalidArgument(
            "every player needs at least one action".into(),
        ));
    }
    let labels: Vec<Vec<String>> = actions
        .iter()
        .map(|&n| (0..n).map(|a| a.to_string()).collect())
        .collect();
    let mut builder = GameBuilder::new(actions.len());
    let mut profile = Vec::with_capacity(actions.len());
    let root = build(&mut builder, actions, &labels, &payoff, &mut profile)?;
    builder.finish(root)
}

fn build<F: Fn(&[usize]) -> Vec<f64>>(
    b: &mut GameBuilder,
    actions: &[usize],
    labels: &[Vec<String>],
    payoff: &F,
    profile: &mut Vec<usize>,
) -> Result<usize> {
    let i = profile.len();
    if i == actions.len() {
        return Ok(b.terminal(payoff(profile)));
    }
    let mut children = Vec::with_capacity(actions[i]);
    for a in 0..actions[i] {
        profile.push(a);
        children.push(build(b, actions, labels, payoff, profile)?);
        profile.pop();
    }
    let names: Vec<&str> = labels[i].iter().map(String::as_str).collect();
    b.decision(i, &format!("p{i}"), &names, children)
}

/// Two-player zero-sum bimatrix game from the row player's payoff matrix.
pub fn zero_sum_matrix(matrix: &[Vec<f64>]) -> Result<GameTree> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument("ragged payoff matrix".into()));
    }
    normal_form(&[rows, cols], |a| {
        let v = matrix[a[0]][a[1]];
        vec![v, -v]
    })
}

/// Matching pennies with payoffs ±1; the unique equilibrium is uniform.
pub fn matching_pennies() -> GameTree {
    zero_sum_matrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).expect("matching pennies is well formed")
}
