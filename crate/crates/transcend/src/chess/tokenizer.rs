//! The 32-symbol character-level tokenizer for PGN movetext.
//!
//! The vocabulary covers exactly what SAN movetext plus move numbers and
//! result strings need: space, the ten digits, files `a`-`h`, the piece
//! letters `K Q R B N`, `O` for castling, and `x + # = - / .`. Nothing
//! else — any other character is a hard error, so corpus drift can never
//! pass silently. The mapping is bijective and versioned by the published
//! index table.

use super::ChessError;

/// Index -> symbol table, in vocabulary order.
pub const TOKEN_VOCAB: [char; 32] = [
    ' ', '0', '1', '2', '3', '4', '5', '6', '7', '8', '9', 'a', 'b', 'c', 'd', 'e', 'f', 'g',
    'h', 'K', 'Q', 'R', 'B', 'N', 'O', 'x', '+', '#', '=', '-', '/', '.',
];

fn id_of(symbol: char) -> Option<u8> {
    TOKEN_VOCAB.iter().position(|&c| c == symbol).map(|i| i as u8)
}

/// Encodes movetext (including move numbers and the result string) into
/// token ids in `[0, 32)`.
pub fn tokenize32(text: &str) -> Result<Vec<u8>, ChessError> {
    text.char_indices()
        .map(|(position, symbol)| {
            id_of(symbol).ok_or(ChessError::UnknownSymbol { position, symbol })
        })
        .collect()
}

/// Decodes token ids back to the exact source character sequence.
pub fn detokenize(ids: &[u8]) -> Result<String, ChessError> {
    ids.iter()
        .enumerate()
        .map(|(position, &id)| {
            TOKEN_VOCAB
                .get(id as usize)
                .copied()
                .ok_or(ChessError::BadTokenId { position, id })
        })
        .collect()
}

/// The published index table: 32 lines of `index<TAB>symbol`.
pub fn vocab_table() -> String {
    let mut out = String::new();
    for (i, c) in TOKEN_VOCAB.iter().enumerate() {
        out.push_str(&format!("{i}\t{c}\n"));
    }
    out
}
