//! Dataset diversity as normalized action entropy over common states.
//!
//! States are keyed by position identity — FEN minus the move clocks — so
//! transpositions pool their action counts. For every state observed at
//! least `min_count` times, the Shannon entropy of its empirical action
//! distribution is divided by `log2` of the number of legal moves there. A
//! dataset of peaked, repetitive play scores near 0; uniformly random play
//! scores near 1. States with fewer than two legal moves carry no
//! information (the normalizer would be `log2(1)`) and are skipped.

use std::collections::HashMap;

use crate::dist::normalized_entropy;

use super::fen::{fen_key, parse_fen_key};
use super::pgn::PgnGame;
use super::ChessError;

/// Entropy of one qualifying state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEntropy {
    /// FEN without the halfmove/fullmove fields.
    pub fen_key: String,
    pub legal_count: usize,
    pub action_count: u64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySummary {
    /// Qualifying states sorted by key for deterministic output.
    pub per_state: Vec<StateEntropy>,
    pub n_states: usize,
    pub mean_entropy: f64,
    /// States that met the count threshold but had fewer than two legal
    /// moves, excluded from the mean.
    pub skipped_forced: usize,
}

/// Computes normalized action entropy over all states observed at least
/// `min_count` times in the games.
pub fn common_state_entropy<'a, I>(games: I, min_count: u64) -> Result<EntropySummary, ChessError>
where
    I: IntoIterator<Item = &'a PgnGame>,
{
    if min_count < 2 {
        return Err(ChessError::MinCountTooSmall(min_count));
    }
    // state key -> (action uci -> count)
    let mut table: HashMap<String, HashMap<String, u64>> = HashMap::new();
    for game in games {
        let mut pos = game.start_position().clone();
        for mv in &game.moves {
            let key = fen_key(&pos);
            *table.entry(key).or_default().entry(mv.to_uci()).or_insert(0) += 1;
            pos = pos.apply_move(*mv);
        }
    }

    let mut per_state = Vec::new();
    let mut skipped_forced = 0usize;
    for (key, actions) in &table {
        let total: u64 = actions.values().sum();
        if total < min_count {
            continue;
        }
        let pos = parse_fen_key(key).expect("keys come from replayed positions");
        let legal_count = pos.legal_moves().len();
        if legal_count < 2 {
            skipped_forced += 1;
            continue;
        }
        let counts: Vec<u64> = actions.values().copied().collect();
        let entropy = normalized_entropy(&counts, legal_count)
            .expect("support >= 2 and counts nonzero");
        per_state.push(StateEntropy {
            fen_key: key.clone(),
            legal_count,
            action_count: total,
            entropy,
        });
    }
    if per_state.is_empty() {
        return Err(ChessError::NoQualifyingStates);
    }
    per_state.sort_by(|a, b| a.fen_key.cmp(&b.fen_key));
    let mean_entropy = per_state.iter().map(|s| s.entropy).sum::<f64>() / per_state.len() as f64;
    Ok(EntropySummary { n_states: per_state.len(), mean_entropy, per_state, skipped_forced })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::parse_pgn;

    fn corpus(movetexts: &[&str]) -> Vec<PgnGame> {
        let text: String = movetexts
            .iter()
            .map(|mt| format!("[Result \"*\"]\n\n{mt} *\n\n"))
            .collect();
        let parsed = parse_pgn(&text);
        assert_eq!(parsed.errors, vec![]);
        parsed.games
    }

    #[test]
    fn identical_openings_have_zero_entropy() {
        let games = corpus(&["1. e4", "1. e4", "1. e4"]);
        let summary = common_state_entropy(&games, 3).unwrap();
        // Only the start position qualifies, and its action is always e4.
        assert_eq!(summary.n_states, 1);
        assert_eq!(summary.per_state[0].entropy, 0.0);
        assert_eq!(summary.per_state[0].legal_count, 20);
        assert_eq!(summary.per_state[0].action_count, 3);
    }

    #[test]
    fn uniform_openings_have_unit_entropy() {
        // One game per legal opening move: uniform over all 20.
        let mut movetexts = Vec::new();
        let start = crate::chess::Position::startpos();
        for mv in start.legal_moves() {
            let san = crate::chess::san_format(&start, mv).unwrap();
            movetexts.push(format!("1. {san}"));
        }
        let refs: Vec<&str> = movetexts.iter().map(|s| s.as_str()).collect();
        let games = corpus(&refs);
        let summary = common_state_entropy(&games, 20).unwrap();
        assert_eq!(summary.n_states, 1);
        assert!((summary.per_state[0].entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_count_gates_qualification() {
        let games = corpus(&["1. e4 e5 2. Nf3", "1. e4 e5 2. f4"]);
        // Threshold 2: startpos (2 actions) and the position after 1.e4
        // (2 actions: both e5) and after e5 (Nf3/f4) qualify.
        let summary = common_state_entropy(&games, 2).unwrap();
        assert_eq!(summary.n_states, 3);
        // Threshold 3: nothing reaches three observations.
        assert_eq!(common_state_entropy(&games, 3).unwrap_err(), ChessError::NoQualifyingStates);
        assert_eq!(common_state_entropy(&games, 1).unwrap_err(), ChessError::MinCountTooSmall(1));
    }

    #[test]
    fn transpositions_pool_counts() {
        // 1.d4 d5 2.Nf3 and 1.Nf3 d5 2.d4 reach the same position; the
        // counts at that shared state pool under the positional key.
        let games = corpus(&["1. d4 d5 2. Nf3 Nf6", "1. Nf3 d5 2. d4 Nf6"]);
        let summary = common_state_entropy(&games, 2).unwrap();
        let pooled = summary
            .per_state
            .iter()
            .find(|s| s.fen_key.starts_with("rnbqkb1r/ppp1pppp/5n2"))
            .is_some()
            || summary.per_state.iter().any(|s| s.action_count == 2 && s.entropy == 0.0);
        assert!(pooled);
    }
}
