//! Standard Algebraic Notation, both directions.
//!
//! The three failure modes stay distinct because a play harness has to tell
//! "the text is not a move" ([`ChessError::MalformedSan`]) apart from "the
//! move does not exist here" ([`ChessError::IllegalSan`]) and "more than one
//! move matches" ([`ChessError::AmbiguousSan`]).

use super::board::{Move, PieceKind, Position, Square};
use super::ChessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Suffix {
    None,
    Check,
    Mate,
}

#[derive(Debug)]
struct SanParts {
    piece: PieceKind,
    from_file: Option<u8>,
    from_rank: Option<u8>,
    capture: bool,
    dest: Square,
    promotion: Option<PieceKind>,
    suffix: Suffix,
    castle: Option<bool>, // Some(true) = king side
}

fn piece_from_letter(c: char) -> Option<PieceKind> {
    match c {
        'N' => Some(PieceKind::Knight),
        'B' => Some(PieceKind::Bishop),
        'R' => Some(PieceKind::Rook),
        'Q' => Some(PieceKind::Queen),
        'K' => Some(PieceKind::King),
        _ => None,
    }
}

fn parse_parts(san: &str) -> Result<SanParts, ChessError> {
    let malformed = || ChessError::MalformedSan(san.to_string());
    let mut body = san;
    let suffix = if let Some(stripped) = body.strip_suffix('#') {
        body = stripped;
        Suffix::Mate
    } else if let Some(stripped) = body.strip_suffix('+') {
        body = stripped;
        Suffix::Check
    } else {
        Suffix::None
    };
    if body.is_empty() {
        return Err(malformed());
    }

    if body == "O-O" || body == "O-O-O" {
        return Ok(SanParts {
            piece: PieceKind::King,
            from_file: None,
            from_rank: None,
            capture: false,
            dest: Square::new(0, 0), // resolved later from the side to move
            promotion: None,
            suffix,
            castle: Some(body == "O-O"),
        });
    }

    let mut promotion = None;
    if let Some(eq) = body.find('=') {
        let promo_str = &body[eq + 1..];
        if promo_str.len() != 1 {
            return Err(malformed());
        }
        let kind = piece_from_letter(promo_str.chars().next().unwrap()).ok_or_else(malformed)?;
        if kind == PieceKind::King {
            return Err(malformed());
        }
        promotion = Some(kind);
        body = &body[..eq];
    }

    let chars: Vec<char> = body.chars().collect();
    if chars.len() < 2 {
        return Err(malformed());
    }
    // The destination square is always the final two characters.
    let dest_str: String = chars[chars.len() - 2..].iter().collect();
    let dest = Square::from_algebraic(&dest_str).ok_or_else(malformed)?;
    let mut head = &chars[..chars.len() - 2];

    let piece = match head.first().and_then(|&c| piece_from_letter(c)) {
        Some(kind) => {
            head = &head[1..];
            kind
        }
        None => PieceKind::Pawn,
    };
    if promotion.is_some() && piece != PieceKind::Pawn {
        return Err(malformed());
    }

    let mut capture = false;
    if head.last() == Some(&'x') {
        capture = true;
        head = &head[..head.len() - 1];
    }

    let (mut from_file, mut from_rank) = (None, None);
    for &c in head {
        match c {
            'a'..='h' if from_file.is_none() => from_file = Some(c as u8 - b'a'),
            '1'..='8' if from_rank.is_none() => from_rank = Some(c as u8 - b'1'),
            _ => return Err(malformed()),
        }
    }
    // A pawn capture must name its file; a bare pawn push may not carry
    // disambiguation or a capture mark.
    if piece == PieceKind::Pawn {
        if capture && from_file.is_none() {
            return Err(malformed());
        }
        if !capture && (from_file.is_some() || from_rank.is_some()) {
            return Err(malformed());
        }
    }

    Ok(SanParts { piece, from_file, from_rank, capture, dest, promotion, suffix, castle: None })
}

fn is_capture(pos: &Position, mv: Move) -> bool {
    pos.piece_at(mv.to).is_some()
        || (pos.piece_at(mv.from).map(|p| p.kind) == Some(PieceKind::Pawn)
            && Some(mv.to) == pos.en_passant()
            && mv.from.file() != mv.to.file())
}

/// Resolves a SAN string against a position and applies it.
pub fn apply_san(pos: &Position, san: &str) -> Result<(Position, Move), ChessError> {
    let parts = parse_parts(san)?;
    let legal = pos.legal_moves();

    let candidates: Vec<Move> = match parts.castle {
        Some(king_side) => {
            let rank = match pos.side_to_move() {
                super::board::Color::White => 0,
                super::board::Color::Black => 7,
            };
            let dest = Square::new(if king_side { 6 } else { 2 }, rank);
            legal
                .into_iter()
                .filter(|m| {
                    m.from == Square::new(4, rank)
                        && m.to == dest
                        && pos.piece_at(m.from).map(|p| p.kind) == Some(PieceKind::King)
                })
                .collect()
        }
        None => legal
            .into_iter()
            .filter(|m| {
                let piece = pos.piece_at(m.from).expect("legal move");
                piece.kind == parts.piece
                    && m.to == parts.dest
                    && m.promotion == parts.promotion
                    && parts.from_file.map_or(true, |f| m.from.file() == f)
                    && parts.from_rank.map_or(true, |r| m.from.rank() == r)
                    && is_capture(pos, *m) == parts.capture
                    // Castling is written O-O, never as a king move to g/c.
                    && !(piece.kind == PieceKind::King
                        && m.from.file() == 4
                        && (m.to.file() as i8 - 4).abs() == 2)
            })
            .collect(),
    };

    match candidates.len() {
        0 => Err(ChessError::IllegalSan(san.to_string())),
        1 => {
            let mv = candidates[0];
            let next = pos.apply_move(mv);
            // Validate any declared check/mate suffix against reality.
            let ok = match parts.suffix {
                Suffix::None => true,
                Suffix::Check => next.in_check(next.side_to_move()),
                Suffix::Mate => next.is_checkmate(),
            };
            if ok {
                Ok((next, mv))
            } else {
                Err(ChessError::IllegalSan(san.to_string()))
            }
        }
        _ => Err(ChessError::AmbiguousSan(san.to_string())),
    }
}

/// Canonical SAN for a legal move: minimal disambiguation, `x` on captures,
/// `=Q` promotions, and `+`/`#` derived from the resulting position.
pub fn san_format(pos: &Position, mv: Move) -> Result<String, ChessError> {
    let piece = pos
        .piece_at(mv.from)
        .ok_or_else(|| ChessError::IllegalMove(mv.to_uci()))?;
    let legal = pos.legal_moves();
    if !legal.contains(&mv) {
        return Err(ChessError::IllegalMove(mv.to_uci()));
    }

    let mut san = String::new();
    let castle =
        piece.kind == PieceKind::King && mv.from.file() == 4 && (mv.to.file() as i8 - 4).abs() == 2;
    if castle {
        san.push_str(if mv.to.file() == 6 { "O-O" } else { "O-O-O" });
    } else if piece.kind == PieceKind::Pawn {
        if is_capture(pos, mv) {
            san.push((b'a' + mv.from.file()) as char);
            san.push('x');
        }
        san.push_str(&mv.to.to_algebraic());
        if let Some(kind) = mv.promotion {
            san.push('=');
            san.push(kind.san_letter().expect("promotion piece"));
        }
    } else {
        san.push(piece.kind.san_letter().expect("non-pawn"));
        // Disambiguate against other same-kind pieces reaching the square.
        let rivals: Vec<Move> = legal
            .iter()
            .copied()
            .filter(|m| {
                m.from != mv.from
                    && m.to == mv.to
                    && pos.piece_at(m.from).map(|p| p.kind) == Some(piece.kind)
            })
            .collect();
        if !rivals.is_empty() {
            let file_unique = rivals.iter().all(|m| m.from.file() != mv.from.file());
            let rank_unique = rivals.iter().all(|m| m.from.rank() != mv.from.rank());
            if file_unique {
                san.push((b'a' + mv.from.file()) as char);
            } else if rank_unique {
                san.push((b'1' + mv.from.rank()) as char);
            } else {
                san.push_str(&mv.from.to_algebraic());
            }
        }
        if is_capture(pos, mv) {
            san.push('x');
        }
        san.push_str(&mv.to.to_algebraic());
    }

    let next = pos.apply_move(mv);
    if next.is_checkmate() {
        san.push('#');
    } else if next.in_check(next.side_to_move()) {
        san.push('+');
    }
    Ok(san)
}
