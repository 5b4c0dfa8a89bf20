//! Extensive-form games: tree model, sequence-form utilities, best responses,
//! exploitability and the poker generators.

mod game;
mod nfg;
mod poker;
mod sequence_form;

pub use game::{GameBuilder, GameTree, Infoset, Node};
pub use nfg::{matching_pennies, normal_form, zero_sum_matrix};
pub use poker::{kuhn, leduc, LeducParams};
pub use sequence_form::{best_response, best_response_value, SequenceFormGame, STRATEGY_TOLERANCE};

use crate::error::{Error, Result};
use crate::kernels::Tfsdp;

/// The decision problem `player` faces in `game`.
pub fn derive_tfsdp(game: &GameTree, player: usize) -> Result<Tfsdp> {
    if player >= game.players {
        return Err(Error::InvalidArgument(format!("no player {player}")));
    }
    Ok(SequenceFormGame::new(game)?.tfsdp(player).clone())
}
