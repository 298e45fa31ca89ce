//! FEN parsing and formatting.
//!
//! Parsing validates the position invariants, not just the syntax: exactly
//! one king per side, the side not to move may not be in check, declared
//! castling rights must match king and rook placement, and an en-passant
//! square must sit behind an enemy pawn that could just have double-pushed.

use super::board::{Castling, Color, Piece, PieceKind, Position, Square};
use super::ChessError;

fn err(field: usize, message: impl Into<String>) -> ChessError {
    ChessError::MalformedFen { field, message: message.into() }
}

/// Parses a 6-field FEN string into a validated [`Position`].
pub fn fen_parse(text: &str) -> Result<Position, ChessError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(err(0, format!("expected 6 fields, got {}", fields.len())));
    }

    // Field 1: piece placement.
    let mut board: [Option<Piece>; 64] = [None; 64];
    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(err(1, "expected 8 ranks"));
    }
    for (i, rank_str) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in rank_str.chars() {
            if let Some(skip) = c.to_digit(10) {
                if skip == 0 || skip > 8 {
                    return Err(err(1, format!("bad skip digit {c}")));
                }
                file += skip as u8;
            } else {
                let piece =
                    Piece::from_fen_char(c).ok_or_else(|| err(1, format!("bad piece {c}")))?;
                if file >= 8 {
                    return Err(err(1, format!("rank {} overflows", rank + 1)));
                }
                if piece.kind == PieceKind::Pawn && (rank == 0 || rank == 7) {
                    return Err(err(1, "pawn on a back rank"));
                }
                board[Square::new(file, rank).index()] = Some(piece);
                file += 1;
            }
            if file > 8 {
                return Err(err(1, format!("rank {} overflows", rank + 1)));
            }
        }
        if file != 8 {
            return Err(err(1, format!("rank {} underfull", rank + 1)));
        }
    }

    // Field 2: side to move.
    let side = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(err(2, format!("bad side '{other}'"))),
    };

    // Field 3: castling rights.
    let mut castling = Castling::none();
    if fields[2] != "-" {
        for c in fields[2].chars() {
            match c {
                'K' if !castling.white_king => castling.white_king = true,
                'Q' if !castling.white_queen => castling.white_queen = true,
                'k' if !castling.black_king => castling.black_king = true,
                'q' if !castling.black_queen => castling.black_queen = true,
                _ => return Err(err(3, format!("bad castling char '{c}'"))),
            }
        }
    }

    // Field 4: en-passant square.
    let en_passant = match fields[3] {
        "-" => None,
        s => Some(Square::from_algebraic(s).ok_or_else(|| err(4, format!("bad square '{s}'")))?),
    };

    // Fields 5 and 6: clocks.
    let halfmove_clock: u32 =
        fields[4].parse().map_err(|_| err(5, format!("bad halfmove clock '{}'", fields[4])))?;
    let fullmove_number: u32 =
        fields[5].parse().map_err(|_| err(6, format!("bad fullmove number '{}'", fields[5])))?;
    if fullmove_number == 0 {
        return Err(err(6, "fullmove number starts at 1"));
    }

    let pos = Position::from_parts(board, side, castling, en_passant, halfmove_clock, fullmove_number);
    validate(&pos)?;
    Ok(pos)
}

fn validate(pos: &Position) -> Result<(), ChessError> {
    for color in [Color::White, Color::Black] {
        let kings = (0..64)
            .filter(|&i| {
                pos.piece_at(Square::from_index(i)) == Some(Piece::new(color, PieceKind::King))
            })
            .count();
        if kings != 1 {
            return Err(err(1, format!("{color:?} has {kings} kings")));
        }
    }
    // The player who just moved may not have left their king attacked.
    if pos.in_check(pos.side_to_move().other()) {
        return Err(err(2, "side not to move is in check"));
    }
    // Rights require the king and the matching rook on their home squares.
    let c = pos.castling();
    let rook_at = |file: u8, rank: u8, color: Color| {
        pos.piece_at(Square::new(file, rank)) == Some(Piece::new(color, PieceKind::Rook))
    };
    let king_at = |rank: u8, color: Color| {
        pos.piece_at(Square::new(4, rank)) == Some(Piece::new(color, PieceKind::King))
    };
    let checks = [
        (c.white_king, king_at(0, Color::White) && rook_at(7, 0, Color::White), "K"),
        (c.white_queen, king_at(0, Color::White) && rook_at(0, 0, Color::White), "Q"),
        (c.black_king, king_at(7, Color::Black) && rook_at(7, 7, Color::Black), "k"),
        (c.black_queen, king_at(7, Color::Black) && rook_at(0, 7, Color::Black), "q"),
    ];
    for (declared, consistent, name) in checks {
        if declared && !consistent {
            return Err(err(3, format!("castling right '{name}' without king/rook in place")));
        }
    }
    // En passant: correct rank, and an enemy pawn sitting where it would
    // have just landed.
    if let Some(ep) = pos.en_passant() {
        let (rank, pawn_rank, pawn_color) = match pos.side_to_move() {
            Color::White => (5u8, 4u8, Color::Black),
            Color::Black => (2u8, 3u8, Color::White),
        };
        if ep.rank() != rank {
            return Err(err(4, format!("en-passant square {ep} on wrong rank")));
        }
        let pawn_sq = Square::new(ep.file(), pawn_rank);
        if pos.piece_at(pawn_sq) != Some(Piece::new(pawn_color, PieceKind::Pawn)) {
            return Err(err(4, format!("no pawn behind en-passant square {ep}")));
        }
    }
    Ok(())
}

/// Canonical 6-field FEN for a position.
pub fn fen_format(pos: &Position) -> String {
    let mut placement = String::new();
    for rank in (0..8).rev() {
        let mut empties = 0;
        for file in 0..8 {
            match pos.piece_at(Square::new(file, rank)) {
                None => empties += 1,
                Some(p) => {
                    if empties > 0 {
                        placement.push_str(&empties.to_string());
                        empties = 0;
                    }
                    placement.push(p.fen_char());
                }
            }
        }
        if empties > 0 {
            placement.push_str(&empties.to_string());
        }
        if rank > 0 {
            placement.push('/');
        }
    }
    let side = match pos.side_to_move() {
        Color::White => "w",
        Color::Black => "b",
    };
    let c = pos.castling();
    let mut rights = String::new();
    if c.white_king {
        rights.push('K');
    }
    if c.white_queen {
        rights.push('Q');
    }
    if c.black_king {
        rights.push('k');
    }
    if c.black_queen {
        rights.push('q');
    }
    if rights.is_empty() {
        rights.push('-');
    }
    let ep = match pos.en_passant() {
        Some(sq) => sq.to_algebraic(),
        None => "-".to_string(),
    };
    format!(
        "{placement} {side} {rights} {ep} {} {}",
        pos.halfmove_clock(),
        pos.fullmove_number()
    )
}

/// The first four FEN fields: position identity without the move clocks.
/// Used as the state key for the diversity metric.
pub fn fen_key(pos: &Position) -> String {
    let full = fen_format(pos);
    full.rsplitn(3, ' ').nth(2).expect("six-field FEN").to_string()
}

pub(crate) fn parse_fen_key(key: &str) -> Result<Position, ChessError> {
    fen_parse(&format!("{key} 0 1"))
}
