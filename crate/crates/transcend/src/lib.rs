//! A laboratory for studying when a learner trained to imitate a pool of
//! experts can outperform every one of them.
//!
//! The crate has three layers:
//!
//! * **Exact theory on finite spaces** — probability vectors, temperature
//!   transforms, expert families, reward functionals, and executable checks
//!   of the mixture/temperature results ([`dist`], [`experts`], [`reward`]).
//! * **A solved sequential testbed** — tic-tac-toe with an exact minimax
//!   reward oracle, rollouts, visitation sampling, and an end-to-end
//!   demonstration that tempered mixtures beat their own experts ([`ttt`]).
//! * **Chess measurement apparatus** — a rules engine with SAN/FEN/PGN
//!   support, the 32-symbol movetext tokenizer, rating-cutoff filtering,
//!   action-entropy diversity metrics, Glicko-2 rating, and a UCI engine
//!   client ([`chess`], [`rating`], [`engine`]).
//!
//! Everything is deterministic given an explicit seed; the [`cli`] module
//! binds the layers into reproducible experiment runs.

pub mod chess;
pub mod cli;
pub mod dist;
pub mod engine;
pub mod experts;
pub mod rating;
pub mod reward;
pub mod ttt;
