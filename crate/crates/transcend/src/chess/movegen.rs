//! Legal move generation: pseudo-legal moves filtered by king safety, plus
//! perft node counting for validation.

use super::board::{
    Color, Move, Piece, PieceKind, Position, Square, BISHOP_DIRS, KING_DELTAS, KNIGHT_DELTAS,
    ROOK_DIRS,
};

const PROMOTIONS: [PieceKind; 4] =
    [PieceKind::Queen, PieceKind::Rook, PieceKind::Bishop, PieceKind::Knight];

impl Position {
    /// The complete legal move set for the side to move, in a fixed
    /// deterministic order (by from-square, then direction, then promotion).
    pub fn legal_moves(&self) -> Vec<Move> {
        let us = self.side_to_move();
        self.pseudo_legal_moves()
            .into_iter()
            .filter(|&mv| !self.apply_move(mv).in_check(us))
            .collect()
    }

    pub fn is_legal(&self, mv: Move) -> bool {
        self.legal_moves().contains(&mv)
    }

    pub fn is_checkmate(&self) -> bool {
        self.in_check(self.side_to_move()) && self.legal_moves().is_empty()
    }

    pub fn is_stalemate(&self) -> bool {
        !self.in_check(self.side_to_move()) && self.legal_moves().is_empty()
    }

    fn pseudo_legal_moves(&self) -> Vec<Move> {
        let us = self.side_to_move();
        let mut moves = Vec::with_capacity(48);
        for idx in 0..64u8 {
            let from = Square::from_index(idx);
            let piece = match self.piece_at(from) {
                Some(p) if p.color == us => p,
                _ => continue,
            };
            match piece.kind {
                PieceKind::Pawn => self.pawn_moves(from, us, &mut moves),
                PieceKind::Knight => self.step_moves(from, us, &KNIGHT_DELTAS, &mut moves),
                PieceKind::King => self.step_moves(from, us, &KING_DELTAS, &mut moves),
                PieceKind::Bishop => self.slide_moves(from, us, &BISHOP_DIRS, &mut moves),
                PieceKind::Rook => self.slide_moves(from, us, &ROOK_DIRS, &mut moves),
                PieceKind::Queen => {
                    self.slide_moves(from, us, &BISHOP_DIRS, &mut moves);
                    self.slide_moves(from, us, &ROOK_DIRS, &mut moves);
                }
            }
        }
        self.castling_moves(us, &mut moves);
        moves
    }

    fn push_pawn_move(from: Square, to: Square, moves: &mut Vec<Move>) {
        if to.rank() == 0 || to.rank() == 7 {
            for kind in PROMOTIONS {
                moves.push(Move::promoting(from, to, kind));
            }
        } else {
            moves.push(Move::new(from, to));
        }
    }

    fn pawn_moves(&self, from: Square, us: Color, moves: &mut Vec<Move>) {
        let dir = match us {
            Color::White => 1,
            Color::Black => -1,
        };
        let start_rank = match us {
            Color::White => 1,
            Color::Black => 6,
        };
        if let Some(one) = from.offset(0, dir) {
            if self.piece_at(one).is_none() {
                Self::push_pawn_move(from, one, moves);
                if from.rank() == start_rank {
                    let two = from.offset(0, 2 * dir).expect("double push stays on board");
                    if self.piece_at(two).is_none() {
                        moves.push(Move::new(from, two));
                    }
                }
            }
        }
        for df in [-1, 1] {
            if let Some(to) = from.offset(df, dir) {
                match self.piece_at(to) {
                    Some(p) if p.color != us => Self::push_pawn_move(from, to, moves),
                    None if Some(to) == self.en_passant() => moves.push(Move::new(from, to)),
                    _ => {}
                }
            }
        }
    }

    fn step_moves(&self, from: Square, us: Color, deltas: &[(i8, i8)], moves: &mut Vec<Move>) {
        for &(df, dr) in deltas {
            if let Some(to) = from.offset(df, dr) {
                match self.piece_at(to) {
                    Some(p) if p.color == us => {}
                    _ => moves.push(Move::new(from, to)),
                }
            }
        }
    }

    fn slide_moves(&self, from: Square, us: Color, dirs: &[(i8, i8)], moves: &mut Vec<Move>) {
        for &(df, dr) in dirs {
            let mut cur = from;
            while let Some(to) = cur.offset(df, dr) {
                match self.piece_at(to) {
                    None => {
                        moves.push(Move::new(from, to));
                        cur = to;
                    }
                    Some(p) => {
                        if p.color != us {
                            moves.push(Move::new(from, to));
                        }
                        break;
                    }
                }
            }
        }
    }

    fn castling_moves(&self, us: Color, moves: &mut Vec<Move>) {
        let (rank, king_right, queen_right) = match us {
            Color::White => (0u8, self.castling().white_king, self.castling().white_queen),
            Color::Black => (7u8, self.castling().black_king, self.castling().black_queen),
        };
        if !(king_right || queen_right) {
            return;
        }
        let king_sq = Square::new(4, rank);
        if self.piece_at(king_sq) != Some(Piece::new(us, PieceKind::King))
            || self.is_attacked(king_sq, us.other())
        {
            return;
        }
        let them = us.other();
        if king_right {
            let f = Square::new(5, rank);
            let g = Square::new(6, rank);
            if self.piece_at(f).is_none()
                && self.piece_at(g).is_none()
                && !self.is_attacked(f, them)
                && !self.is_attacked(g, them)
            {
                moves.push(Move::new(king_sq, g));
            }
        }
        if queen_right {
            let b = Square::new(1, rank);
            let c = Square::new(2, rank);
            let d = Square::new(3, rank);
            if self.piece_at(b).is_none()
                && self.piece_at(c).is_none()
                && self.piece_at(d).is_none()
                && !self.is_attacked(c, them)
                && !self.is_attacked(d, them)
            {
                moves.push(Move::new(king_sq, c));
            }
        }
    }
}

/// Counts leaf nodes of the legal move tree to the given depth.
pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = pos.legal_moves();
    if depth == 1 {
        return moves.len() as u64;
    }
    moves.iter().map(|&mv| perft(&pos.apply_move(mv), depth - 1)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chess::fen_parse;

    #[test]
    fn startpos_has_twenty_moves() {
        let pos = Position::startpos();
        let moves = pos.legal_moves();
        assert_eq!(moves.len(), 20);
        // 16 pawn moves and 4 knight moves, countable by hand.
        let pawn_moves = moves
            .iter()
            .filter(|m| pos.piece_at(m.from).unwrap().kind == PieceKind::Pawn)
            .count();
        assert_eq!(pawn_moves, 16);
    }

    #[test]
    fn perft_startpos_depths_1_to_4() {
        let pos = Position::startpos();
        assert_eq!(perft(&pos, 1), 20);
        assert_eq!(perft(&pos, 2), 400);
        assert_eq!(perft(&pos, 3), 8_902);
        assert_eq!(perft(&pos, 4), 197_281);
    }

    #[test]
    fn perft_tactical_position_kiwipete() {
        // Castling, en passant, pins and promotions all in play.
        let pos = fen_parse("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1")
            .unwrap();
        assert_eq!(perft(&pos, 1), 48);
        assert_eq!(perft(&pos, 2), 2_039);
        assert_eq!(perft(&pos, 3), 97_862);
        assert_eq!(perft(&pos, 4), 4_085_603);
    }

    #[test]
    fn perft_tactical_position_endgame() {
        // Pawn endgame rich in en-passant and promotion edge cases.
        let pos = fen_parse("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1").unwrap();
        assert_eq!(perft(&pos, 1), 14);
        assert_eq!(perft(&pos, 2), 191);
        assert_eq!(perft(&pos, 3), 2_812);
        assert_eq!(perft(&pos, 4), 43_238);
    }

    #[test]
    fn en_passant_pin_is_rejected()
    {
        // Capturing en passant here would expose the white king on the rank.
        let pos = fen_parse("8/8/8/K2pP2q/8/8/8/7k w - d6 0 1").unwrap();
        let ep = Move::new(Square::from_algebraic("e5").unwrap(), Square::from_algebraic("d6").unwrap());
        assert!(!pos.is_legal(ep));
    }

    #[test]
    fn castling_through_check_is_rejected() {
        let pos = fen_parse("4k3/8/8/8/8/5r2/8/R3K2R w KQ - 0 1").unwrap();
        let moves = pos.legal_moves();
        let g1 = Square::from_algebraic("g1").unwrap();
        let c1 = Square::from_algebraic("c1").unwrap();
        let e1 = Square::from_algebraic("e1").unwrap();
        // f1 is attacked: no king-side castling; the queen-side path is clear.
        assert!(!moves.contains(&Move::new(e1, g1)));
        assert!(moves.contains(&Move::new(e1, c1)));
    }

    #[test]
    fn checkmate_and_stalemate_detection() {
        let mate = fen_parse("rnb1kbnr/pppp1ppp/8/4p3/6Pq/5P2/PPPPP2P/RNBQKBNR w KQkq - 1 3")
            .unwrap();
        assert!(mate.is_checkmate());
        let stale = fen_parse("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1").unwrap();
        assert!(stale.is_stalemate());
    }

    #[test]
    fn insufficient_material_cases() {
        assert!(fen_parse("8/8/4k3/8/8/3K4/8/8 w - - 0 1").unwrap().insufficient_material());
        assert!(fen_parse("8/8/4k3/8/8/3KB3/8/8 w - - 0 1").unwrap().insufficient_material());
        assert!(!fen_parse("8/8/4k3/8/8/3K4/6Q1/8 w - - 0 1").unwrap().insufficient_material());
        // Bishops on opposite square colors can still mate.
        assert!(!fen_parse("8/8/2b1k3/8/8/3KB3/8/8 w - - 0 1").unwrap().insufficient_material());
    }

    #[test]
    fn promotion_moves_generated() {
        let pos = fen_parse("8/P6k/8/8/8/8/8/K7 w - - 0 1").unwrap();
        let promos: Vec<Move> = pos
            .legal_moves()
            .into_iter()
            .filter(|m| m.promotion.is_some())
            .collect();
        assert_eq!(promos.len(), 4);
        let queen = promos.iter().find(|m| m.promotion == Some(PieceKind::Queen)).unwrap();
        let after = pos.apply_move(*queen);
        assert_eq!(
            after.piece_at(Square::from_algebraic("a8").unwrap()).unwrap().kind,
            PieceKind::Queen
        );
    }
}
