//! PGN import and canonical re-export.
//!
//! The parser handles export-format and Lichess-database movetext: tag
//! pairs, brace comments, nested variations, numeric annotation glyphs,
//! semicolon comments, `%`-escaped lines, and suffix annotations on moves.
//! Every game is replay-validated move by move; a game that fails to replay
//! becomes a [`PgnErrorRecord`] with its byte offset and is skipped rather
//! than aborting the stream.
//!
//! Re-emission is canonical: SAN is regenerated from the replayed moves
//! (minimal disambiguation, derived check/mate suffixes), movetext sits on
//! one line, and parsing the emitted text reproduces the same games, so
//! parse -> re-emit is a fixed point.

use super::board::{Color, Move, Position};
use super::fen::fen_parse;
use super::san::{apply_san, san_format};

/// Game termination token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameResult {
    WhiteWins,
    BlackWins,
    Draw,
    Unfinished,
}

impl GameResult {
    pub fn as_token(self) -> &'static str {
        match self {
            GameResult::WhiteWins => "1-0",
            GameResult::BlackWins => "0-1",
            GameResult::Draw => "1/2-1/2",
            GameResult::Unfinished => "*",
        }
    }

    fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "1-0" => Some(GameResult::WhiteWins),
            "0-1" => Some(GameResult::BlackWins),
            "1/2-1/2" => Some(GameResult::Draw),
            "*" => Some(GameResult::Unfinished),
            _ => None,
        }
    }
}

/// One replayed game: tags, the canonical SAN movetext, and the result.
#[derive(Debug, Clone, PartialEq)]
pub struct PgnGame {
    pub tags: Vec<(String, String)>,
    /// Canonical SAN, one entry per ply, regenerated from the replay.
    pub sans: Vec<String>,
    pub moves: Vec<Move>,
    pub result: GameResult,
    start: Position,
}

impl PgnGame {
    /// Builds a game record from moves already known to be legal.
    pub fn from_moves(
        tags: Vec<(String, String)>,
        start: Position,
        moves: &[Move],
        result: GameResult,
    ) -> Result<PgnGame, super::ChessError> {
        let mut pos = start.clone();
        let mut sans = Vec::with_capacity(moves.len());
        for &mv in moves {
            sans.push(san_format(&pos, mv)?);
            pos = pos.apply_move(mv);
        }
        Ok(PgnGame { tags, sans, moves: moves.to_vec(), result, start })
    }

    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn white_elo(&self) -> Option<u32> {
        self.tag("WhiteElo").and_then(|v| v.parse().ok())
    }

    pub fn black_elo(&self) -> Option<u32> {
        self.tag("BlackElo").and_then(|v| v.parse().ok())
    }

    pub fn start_position(&self) -> &Position {
        &self.start
    }

    /// Positions before each ply, plus the final position.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let mut pos = self.start.clone();
        for &mv in &self.moves {
            out.push(pos.clone());
            pos = pos.apply_move(mv);
        }
        out.push(pos);
        out
    }

    pub fn final_position(&self) -> Position {
        self.positions().pop().expect("at least the start position")
    }

    /// Movetext with move numbers and the result token, on one line:
    /// `1.e4 e5 2.Nf3 Nc6 1/2-1/2`.
    pub fn movetext(&self) -> String {
        let mut out = String::new();
        let mut pos = self.start.clone();
        for san in &self.sans {
            if pos.side_to_move() == Color::White {
                out.push_str(&format!("{}.", pos.fullmove_number()));
            } else if out.is_empty() {
                // Game record starting with a black move.
                out.push_str(&format!("{}...", pos.fullmove_number()));
            }
            out.push_str(san);
            out.push(' ');
            let (next, _) = apply_san(&pos, san).expect("canonical SAN replays");
            pos = next;
        }
        out.push_str(self.result.as_token());
        out
    }

    /// Canonical PGN: the stored tags, a blank line, one movetext line.
    pub fn to_pgn(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.tags {
            let escaped = v.replace('\\', "\\\\").replace('"', "\\\"");
            out.push_str(&format!("[{k} \"{escaped}\"]\n"));
        }
        out.push('\n');
        out.push_str(&self.movetext());
        out.push('\n');
        out
    }
}

/// A per-game parse failure: where and why.
#[derive(Debug, Clone, PartialEq)]
pub struct PgnErrorRecord {
    pub game_index: usize,
    pub byte_offset: usize,
    pub message: String,
}

/// Result of scanning a PGN stream: the games that replayed cleanly and a
/// record for each one that did not.
#[derive(Debug, Clone, Default)]
pub struct ParsedPgn {
    pub games: Vec<PgnGame>,
    pub errors: Vec<PgnErrorRecord>,
}

struct Cursor<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { text, bytes: text.as_bytes(), pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn at_line_start(&self) -> bool {
        self.pos == 0 || self.bytes[self.pos - 1] == b'\n'
    }

    /// Skips whitespace and `%`-escaped lines.
    fn skip_filler(&mut self) {
        loop {
            while let Some(b) = self.peek() {
                if b.is_ascii_whitespace() {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek() == Some(b'%') && self.at_line_start() {
                while let Some(b) = self.peek() {
                    self.pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
                continue;
            }
            break;
        }
    }

    fn skip_line(&mut self) {
        while let Some(b) = self.peek() {
            self.pos += 1;
            if b == b'\n' {
                break;
            }
        }
    }

    fn skip_brace_comment(&mut self) -> Result<(), String> {
        debug_assert_eq!(self.peek(), Some(b'{'));
        self.pos += 1;
        while let Some(b) = self.peek() {
            self.pos += 1;
            if b == b'}' {
                return Ok(());
            }
        }
        Err("unterminated { comment".into())
    }

    fn skip_variation(&mut self) -> Result<(), String> {
        debug_assert_eq!(self.peek(), Some(b'('));
        let mut depth = 0usize;
        while let Some(b) = self.peek() {
            self.pos += 1;
            match b {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                b'{' => {
                    self.pos -= 1;
                    self.skip_brace_comment()?;
                }
                _ => {}
            }
        }
        Err("unterminated ( variation".into())
    }

    /// A run of symbol characters (moves, move numbers, results).
    fn read_word(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || matches!(b, b'{' | b'}' | b'(' | b')' | b'[' | b';') {
                break;
            }
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    /// Parses one `[Key "Value"]` pair.
    fn read_tag(&mut self) -> Result<(String, String), String> {
        debug_assert_eq!(self.peek(), Some(b'['));
        self.pos += 1;
        self.skip_filler();
        let key_start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || b == b'"' || b == b']' {
                break;
            }
            self.pos += 1;
        }
        let key = self.text[key_start..self.pos].to_string();
        if key.is_empty() {
            return Err("empty tag name".into());
        }
        self.skip_filler();
        if self.peek() != Some(b'"') {
            return Err(format!("tag {key} missing quoted value"));
        }
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.peek() {
                None => return Err(format!("tag {key} unterminated string")),
                Some(b'\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(b'"') => value.push('"'),
                        Some(b'\\') => value.push('\\'),
                        Some(other) => {
                            value.push('\\');
                            value.push(other as char);
                        }
                        None => return Err(format!("tag {key} ends inside escape")),
                    }
                    self.pos += 1;
                }
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => {
                    let c_start = self.pos;
                    let c = self.text[c_start..].chars().next().expect("in-bounds char");
                    value.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
        self.skip_filler();
        if self.peek() != Some(b']') {
            return Err(format!("tag {key} missing closing bracket"));
        }
        self.pos += 1;
        Ok((key, value))
    }
}

fn is_move_number(word: &str) -> bool {
    !word.is_empty() && word.chars().all(|c| c.is_ascii_digit() || c == '.')
}

/// Splits a leading `12.` / `12...` move-number prefix off a token,
/// returning the prefix length in bytes and the remainder.
fn strip_move_number(word: &str) -> (usize, &str) {
    let digits = word.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits == 0 {
        return (0, word);
    }
    let dots = word[digits..].chars().take_while(|&c| c == '.').count();
    if dots == 0 {
        return (0, word);
    }
    let cut = digits + dots;
    (cut, &word[cut..])
}

/// Parses a PGN stream. Games that fail to parse or replay are reported in
/// `errors` (with byte offsets) and skipped; everything else is returned in
/// input order with canonical SAN.
pub fn parse_pgn(text: &str) -> ParsedPgn {
    let mut cursor = Cursor::new(text);
    let mut out = ParsedPgn::default();
    let mut game_index = 0usize;

    loop {
        cursor.skip_filler();
        if cursor.at_end() {
            break;
        }
        let game_offset = cursor.pos;
        let mut failure: Option<(usize, String)> = None;

        // Tag section.
        let mut tags: Vec<(String, String)> = Vec::new();
        while cursor.peek() == Some(b'[') {
            let tag_offset = cursor.pos;
            match cursor.read_tag() {
                Ok(pair) => tags.push(pair),
                Err(msg) => {
                    failure.get_or_insert((tag_offset, msg));
                    cursor.skip_line();
                }
            }
            cursor.skip_filler();
        }

        // Movetext section.
        let mut sans: Vec<(String, usize)> = Vec::new();
        let mut result: Option<GameResult> = None;
        loop {
            cursor.skip_filler();
            match cursor.peek() {
                None => break,
                Some(b'[') => break,
                Some(b'{') => {
                    let off = cursor.pos;
                    if let Err(msg) = cursor.skip_brace_comment() {
                        failure.get_or_insert((off, msg));
                        break;
                    }
                }
                Some(b'(') => {
                    let off = cursor.pos;
                    if let Err(msg) = cursor.skip_variation() {
                        failure.get_or_insert((off, msg));
                        break;
                    }
                }
                Some(b';') => cursor.skip_line(),
                Some(b')') | Some(b'}') => {
                    failure.get_or_insert((cursor.pos, "unbalanced bracket".into()));
                    cursor.pos += 1;
                }
                Some(_) => {
                    let offset = cursor.pos;
                    let word = cursor.read_word();
                    if word.is_empty() {
                        cursor.pos += 1;
                        continue;
                    }
                    if let Some(r) = GameResult::from_token(word) {
                        result = Some(r);
                        break;
                    }
                    if word.starts_with('$') || is_move_number(word) {
                        continue;
                    }
                    // Move numbers may abut the SAN ("1.e4", "3...Nf6").
                    let (skipped, body) = strip_move_number(word);
                    // Strip suffix annotations like !? from raw SAN.
                    let clean = body.trim_end_matches(['!', '?']);
                    if !clean.is_empty() {
                        sans.push((clean.to_string(), offset + skipped));
                    }
                }
            }
        }

        if tags.is_empty() && sans.is_empty() && result.is_none() {
            // Nothing recognizable; stop instead of looping forever.
            if failure.is_none() {
                break;
            }
        }

        let outcome = failure.map(Err).unwrap_or_else(|| {
            build_game(tags, sans, result, game_offset)
        });
        match outcome {
            Ok(game) => out.games.push(game),
            Err((byte_offset, message)) => {
                out.errors.push(PgnErrorRecord { game_index, byte_offset, message })
            }
        }
        game_index += 1;
    }
    out
}

fn build_game(
    tags: Vec<(String, String)>,
    sans: Vec<(String, usize)>,
    result: Option<GameResult>,
    game_offset: usize,
) -> Result<PgnGame, (usize, String)> {
    let result = result.ok_or((game_offset, "movetext has no result token".to_string()))?;

    // The result token must agree with the Result tag when both exist.
    if let Some(tag_result) = tags.iter().find(|(k, _)| k == "Result").map(|(_, v)| v.as_str()) {
        if tag_result != result.as_token() {
            return Err((
                game_offset,
                format!("result token {} disagrees with Result tag {tag_result}", result.as_token()),
            ));
        }
    }

    // Starting position: FEN tag when present, otherwise the initial array.
    let start = match tags.iter().find(|(k, _)| k == "FEN").map(|(_, v)| v.as_str()) {
        Some(fen) => {
            fen_parse(fen).map_err(|e| (game_offset, format!("bad FEN tag: {e}")))?
        }
        None => Position::startpos(),
    };

    let mut pos = start.clone();
    let mut moves = Vec::with_capacity(sans.len());
    let mut canonical = Vec::with_capacity(sans.len());
    for (san, offset) in &sans {
        match apply_san(&pos, san) {
            Ok((next, mv)) => {
                canonical.push(san_format(&pos, mv).expect("legal move formats"));
                moves.push(mv);
                pos = next;
            }
            Err(e) => return Err((*offset, format!("move {san}: {e}"))),
        }
    }
    Ok(PgnGame { tags, sans: canonical, moves, result, start })
}

/// Result of a rating-cutoff pass over a set of games.
#[derive(Debug, Clone)]
pub struct FilterOutcome<'a> {
    pub kept: Vec<&'a PgnGame>,
    /// Games missing either player's rating; these never pass any cutoff.
    pub dropped_missing_rating: usize,
    pub dropped_above_cutoff: usize,
}

/// Keeps games where both players' ratings are known and the stronger one
/// is at or below `cutoff`.
pub fn filter_by_rating(games: &[PgnGame], cutoff: u32) -> FilterOutcome<'_> {
    let mut outcome =
        FilterOutcome { kept: Vec::new(), dropped_missing_rating: 0, dropped_above_cutoff: 0 };
    for game in games {
        match (game.white_elo(), game.black_elo()) {
            (Some(w), Some(b)) => {
                if w.max(b) <= cutoff {
                    outcome.kept.push(game);
                } else {
                    outcome.dropped_above_cutoff += 1;
                }
            }
            _ => outcome.dropped_missing_rating += 1,
        }
    }
    outcome
}
