//! Board representation: a 64-square mailbox with side to move, castling
//! rights, en-passant square, and the two move counters.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    White,
    Black,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    /// Pawn push direction as a rank delta.
    fn forward(self) -> i8 {
        match self {
            Color::White => 1,
            Color::Black => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PieceKind {
    Pawn,
    Knight,
    Bishop,
    Rook,
    Queen,
    King,
}

impl PieceKind {
    pub fn san_letter(self) -> Option<char> {
        match self {
            PieceKind::Pawn => None,
            PieceKind::Knight => Some('N'),
            PieceKind::Bishop => Some('B'),
            PieceKind::Rook => Some('R'),
            PieceKind::Queen => Some('Q'),
            PieceKind::King => Some('K'),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Piece {
    pub color: Color,
    pub kind: PieceKind,
}

impl Piece {
    pub fn new(color: Color, kind: PieceKind) -> Self {
        Piece { color, kind }
    }

    pub fn fen_char(self) -> char {
        let c = match self.kind {
            PieceKind::Pawn => 'p',
            PieceKind::Knight => 'n',
            PieceKind::Bishop => 'b',
            PieceKind::Rook => 'r',
            PieceKind::Queen => 'q',
            PieceKind::King => 'k',
        };
        match self.color {
            Color::White => c.to_ascii_uppercase(),
            Color::Black => c,
        }
    }

    pub fn from_fen_char(c: char) -> Option<Self> {
        let kind = match c.to_ascii_lowercase() {
            'p' => PieceKind::Pawn,
            'n' => PieceKind::Knight,
            'b' => PieceKind::Bishop,
            'r' => PieceKind::Rook,
            'q' => PieceKind::Queen,
            'k' => PieceKind::King,
            _ => return None,
        };
        let color = if c.is_ascii_uppercase() { Color::White } else { Color::Black };
        Some(Piece { color, kind })
    }
}

/// A board square, 0..64 with a1 = 0, h1 = 7, a8 = 56.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    pub fn new(file: u8, rank: u8) -> Square {
        debug_assert!(file < 8 && rank < 8);
        Square(rank * 8 + file)
    }

    pub fn from_index(idx: u8) -> Square {
        debug_assert!(idx < 64);
        Square(idx)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn file(self) -> u8 {
        self.0 % 8
    }

    pub fn rank(self) -> u8 {
        self.0 / 8
    }

    /// `None` when stepping off the board.
    pub fn offset(self, df: i8, dr: i8) -> Option<Square> {
        let f = self.file() as i8 + df;
        let r = self.rank() as i8 + dr;
        if (0..8).contains(&f) && (0..8).contains(&r) {
            Some(Square::new(f as u8, r as u8))
        } else {
            None
        }
    }

    pub fn from_algebraic(s: &str) -> Option<Square> {
        let mut chars = s.chars();
        let file = chars.next()?;
        let rank = chars.next()?;
        if chars.next().is_some() || !('a'..='h').contains(&file) || !('1'..='8').contains(&rank) {
            return None;
        }
        Some(Square::new(file as u8 - b'a', rank as u8 - b'1'))
    }

    pub fn to_algebraic(self) -> String {
        format!("{}{}", (b'a' + self.file()) as char, (b'1' + self.rank()) as char)
    }
}

impl std::fmt::Display for Square {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_algebraic())
    }
}

/// A move in coordinate form; castling is encoded as the king's two-square
/// step and en passant as the diagonal pawn move onto the empty square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub from: Square,
    pub to: Square,
    pub promotion: Option<PieceKind>,
}

impl Move {
    pub fn new(from: Square, to: Square) -> Move {
        Move { from, to, promotion: None }
    }

    pub fn promoting(from: Square, to: Square, kind: PieceKind) -> Move {
        Move { from, to, promotion: Some(kind) }
    }

    /// Long algebraic form used by engine protocols, e.g. `e2e4`, `e7e8q`.
    pub fn to_uci(self) -> String {
        let promo = match self.promotion {
            Some(PieceKind::Knight) => "n",
            Some(PieceKind::Bishop) => "b",
            Some(PieceKind::Rook) => "r",
            Some(PieceKind::Queen) => "q",
            _ => "",
        };
        format!("{}{}{}", self.from.to_algebraic(), self.to.to_algebraic(), promo)
    }

    pub fn from_uci(s: &str) -> Option<Move> {
        if s.len() < 4 || s.len() > 5 {
            return None;
        }
        let from = Square::from_algebraic(&s[0..2])?;
        let to = Square::from_algebraic(&s[2..4])?;
        let promotion = match s.as_bytes().get(4) {
            None => None,
            Some(b'n') => Some(PieceKind::Knight),
            Some(b'b') => Some(PieceKind::Bishop),
            Some(b'r') => Some(PieceKind::Rook),
            Some(b'q') => Some(PieceKind::Queen),
            Some(_) => return None,
        };
        Some(Move { from, to, promotion })
    }
}

/// Castling availability per side and wing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Castling {
    pub white_king: bool,
    pub white_queen: bool,
    pub black_king: bool,
    pub black_queen: bool,
}

impl Castling {
    pub fn all() -> Castling {
        Castling { white_king: true, white_queen: true, black_king: true, black_queen: true }
    }

    pub fn none() -> Castling {
        Castling::default()
    }

    pub fn any(self) -> bool {
        self.white_king || self.white_queen || self.black_king || self.black_queen
    }
}

/// Full game state for one position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    board: [Option<Piece>; 64],
    side: Color,
    castling: Castling,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

pub(crate) const KNIGHT_DELTAS: [(i8, i8); 8] =
    [(1, 2), (2, 1), (2, -1), (1, -2), (-1, -2), (-2, -1), (-2, 1), (-1, 2)];
pub(crate) const KING_DELTAS: [(i8, i8); 8] =
    [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];
pub(crate) const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, -1), (-1, 1)];
pub(crate) const ROOK_DIRS: [(i8, i8); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

impl Position {
    pub(crate) fn from_parts(
        board: [Option<Piece>; 64],
        side: Color,
        castling: Castling,
        en_passant: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) -> Position {
        Position { board, side, castling, en_passant, halfmove_clock, fullmove_number }
    }

    /// The standard initial position.
    pub fn startpos() -> Position {
        crate::chess::fen_parse("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1")
            .expect("startpos FEN is well-formed")
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side
    }

    pub fn castling(&self) -> Castling {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub(crate) fn board(&self) -> &[Option<Piece>; 64] {
        &self.board
    }

    pub fn king_square(&self, color: Color) -> Option<Square> {
        (0..64).map(Square::from_index).find(|&sq| {
            self.board[sq.index()]
                == Some(Piece { color, kind: PieceKind::King })
        })
    }

    /// Is `sq` attacked by any piece of `by`?
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        // Pawns attack one rank toward the enemy.
        let back = -by.forward();
        for df in [-1i8, 1] {
            if let Some(from) = sq.offset(df, back) {
                if self.board[from.index()] == Some(Piece::new(by, PieceKind::Pawn)) {
                    return true;
                }
            }
        }
        for (df, dr) in KNIGHT_DELTAS {
            if let Some(from) = sq.offset(df, dr) {
                if self.board[from.index()] == Some(Piece::new(by, PieceKind::Knight)) {
                    return true;
                }
            }
        }
        for (df, dr) in KING_DELTAS {
            if let Some(from) = sq.offset(df, dr) {
                if self.board[from.index()] == Some(Piece::new(by, PieceKind::King)) {
                    return true;
                }
            }
        }
        for (dirs, straight) in [(BISHOP_DIRS, false), (ROOK_DIRS, true)] {
            for (df, dr) in dirs {
                let mut cur = sq;
                while let Some(next) = cur.offset(df, dr) {
                    match self.board[next.index()] {
                        None => cur = next,
                        Some(p) => {
                            if p.color == by
                                && (p.kind == PieceKind::Queen
                                    || (straight && p.kind == PieceKind::Rook)
                                    || (!straight && p.kind == PieceKind::Bishop))
                            {
                                return true;
                            }
                            break;
                        }
                    }
                }
            }
        }
        false
    }

    pub fn in_check(&self, color: Color) -> bool {
        match self.king_square(color) {
            Some(k) => self.is_attacked(k, color.other()),
            None => false,
        }
    }

    /// Applies a move assumed to come from the legal move list. Handles
    /// castling rook displacement, en-passant capture, promotion, rights
    /// updates, and the move counters.
    pub fn apply_move(&self, mv: Move) -> Position {
        let mut next = self.clone();
        let piece = self.board[mv.from.index()].expect("move from an occupied square");
        let captured = self.board[mv.to.index()];
        debug_assert_eq!(piece.color, self.side);

        next.en_passant = None;
        next.board[mv.from.index()] = None;

        let mut is_capture = captured.is_some();
        if piece.kind == PieceKind::Pawn {
            // En passant: diagonal onto the empty marked square.
            if Some(mv.to) == self.en_passant && captured.is_none() && mv.from.file() != mv.to.file()
            {
                let victim = mv.to.offset(0, -piece.color.forward()).expect("inside board");
                next.board[victim.index()] = None;
                is_capture = true;
            }
            // Double push marks the skipped square; the mark is kept only
            // when some enemy pawn can actually take en passant, so that
            // transposed move orders produce identical positions.
            let from_rank = mv.from.rank() as i8;
            let to_rank = mv.to.rank() as i8;
            if (to_rank - from_rank).abs() == 2 {
                next.en_passant = mv.from.offset(0, piece.color.forward());
            }
        }

        let placed = match mv.promotion {
            Some(kind) => Piece::new(piece.color, kind),
            None => piece,
        };
        next.board[mv.to.index()] = Some(placed);

        // Castling: king steps two files, the rook jumps over.
        if piece.kind == PieceKind::King && mv.from.file() == 4 {
            let rank = mv.from.rank();
            if mv.to.file() == 6 {
                let rook_from = Square::new(7, rank);
                let rook = next.board[rook_from.index()].take();
                next.board[Square::new(5, rank).index()] = rook;
            } else if mv.to.file() == 2 {
                let rook_from = Square::new(0, rank);
                let rook = next.board[rook_from.index()].take();
                next.board[Square::new(3, rank).index()] = rook;
            }
        }

        // Rights: any king move clears both wings; rook moves or captures on
        // a corner clear that wing.
        let mut c = next.castling;
        if piece.kind == PieceKind::King {
            match piece.color {
                Color::White => {
                    c.white_king = false;
                    c.white_queen = false;
                }
                Color::Black => {
                    c.black_king = false;
                    c.black_queen = false;
                }
            }
        }
        for sq in [mv.from, mv.to] {
            match sq.index() {
                0 => c.white_queen = false,
                7 => c.white_king = false,
                56 => c.black_queen = false,
                63 => c.black_king = false,
                _ => {}
            }
        }
        next.castling = c;

        if piece.kind == PieceKind::Pawn || is_capture {
            next.halfmove_clock = 0;
        } else {
            next.halfmove_clock += 1;
        }
        if self.side == Color::Black {
            next.fullmove_number += 1;
        }
        next.side = self.side.other();
        if let Some(ep) = next.en_passant {
            if !next.has_legal_ep_capture(ep) {
                next.en_passant = None;
            }
        }
        next
    }

    /// Can the side to move legally capture en passant onto `ep`?
    fn has_legal_ep_capture(&self, ep: Square) -> bool {
        let us = self.side;
        for df in [-1i8, 1] {
            if let Some(from) = ep.offset(df, -us.forward()) {
                if self.piece_at(from) == Some(Piece::new(us, PieceKind::Pawn)) {
                    let mv = Move::new(from, ep);
                    if !self.apply_move(mv).in_check(us) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// No pawns, no majors, and at most one minor piece per side (or two
    /// same-colored bishops): neither player can force mate.
    pub fn insufficient_material(&self) -> bool {
        let mut minors: Vec<(Color, PieceKind, bool)> = Vec::new();
        for idx in 0..64 {
            if let Some(p) = self.board[idx] {
                match p.kind {
                    PieceKind::King => {}
                    PieceKind::Knight | PieceKind::Bishop => {
                        let dark = (idx / 8 + idx % 8) % 2 == 0;
                        minors.push((p.color, p.kind, dark));
                    }
                    _ => return false,
                }
            }
        }
        match minors.len() {
            0 | 1 => true,
            2 => {
                // Two bishops on the same square color cannot mate either.
                minors.iter().all(|(_, k, _)| *k == PieceKind::Bishop)
                    && minors[0].2 == minors[1].2
            }
            _ => false,
        }
    }
}
