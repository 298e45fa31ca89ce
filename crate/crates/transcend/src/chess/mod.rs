//! Chess rules and measurement tooling: board state, legal-move generation,
//! FEN and SAN, PGN parsing, the 32-symbol movetext tokenizer, rating-cutoff
//! filtering, and the common-state action-entropy metric.
//!
//! Correctness of the rules engine is pinned by perft node counts and SAN
//! round-trips; everything else sits on top of those primitives.

mod board;
mod entropy;
mod fen;
mod movegen;
mod pgn;
mod san;
mod tokenizer;

pub use board::{Castling, Color, Move, Piece, PieceKind, Position, Square};
pub use entropy::{common_state_entropy, EntropySummary, StateEntropy};
pub use fen::{fen_format, fen_parse};
pub use movegen::perft;
pub use pgn::{
    filter_by_rating, parse_pgn, FilterOutcome, GameResult, ParsedPgn, PgnErrorRecord, PgnGame,
};
pub use san::{apply_san, san_format};
pub use tokenizer::{detokenize, tokenize32, vocab_table, TOKEN_VOCAB};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChessError {
    #[error("malformed FEN (field {field}): {message}")]
    MalformedFen { field: usize, message: String },
    #[error("malformed SAN '{0}'")]
    MalformedSan(String),
    #[error("SAN '{0}' matches no legal move")]
    IllegalSan(String),
    #[error("SAN '{0}' is ambiguous")]
    AmbiguousSan(String),
    #[error("symbol '{symbol}' at byte {position} is outside the 32-symbol vocabulary")]
    UnknownSymbol { position: usize, symbol: char },
    #[error("token id {id} at position {position} is outside the vocabulary")]
    BadTokenId { position: usize, id: u8 },
    #[error("no state reaches the action-count threshold")]
    NoQualifyingStates,
    #[error("min_count must be at least 2, got {0}")]
    MinCountTooSmall(u64),
    #[error("illegal move {0} in this position")]
    IllegalMove(String),
}
