//! Tic-tac-toe as a fully solved sequential testbed.
//!
//! Chess states cannot be enumerated, so reward oracles there are engine
//! estimates. Here the whole reachable state space (5478 boards) is solved
//! exactly by memoized minimax, which turns every quantity the experiments
//! need — per-move rewards, expected game outcomes, visitation
//! distributions — into exact arithmetic instead of samples. Policies over
//! the game are ordinary tabular [`Policy`] values indexed by the solver's
//! state ids, with 9 outputs (cell indices); mass a policy places on
//! illegal cells is renormalized onto the legal moves at play time, and a
//! policy with no legal mass plays uniformly.

use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;

use crate::dist::{self, Dist};
use crate::experts::{self, Policy};
use crate::reward::RewardTable;

pub const CELLS: usize = 9;

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TttError {
    #[error("state is terminal")]
    TerminalState,
    #[error("illegal move {0}")]
    IllegalMove(usize),
    #[error("invalid board: {0}")]
    InvalidBoard(String),
    #[error("state not in the reachable set")]
    UnknownState,
    #[error(transparent)]
    Expert(#[from] experts::ExpertError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    X,
    O,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    X,
    O,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::X => Player::O,
            Player::O => Player::X,
        }
    }

    fn cell(self) -> Cell {
        match self {
            Player::X => Cell::X,
            Player::O => Cell::O,
        }
    }
}

/// Game result from the referee's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    XWins,
    OWins,
    Draw,
}

impl Outcome {
    pub fn suffix(self) -> char {
        match self {
            Outcome::XWins => 'X',
            Outcome::OWins => 'O',
            Outcome::Draw => 'D',
        }
    }

    /// Reward for the given player: win 1, draw 0.5, loss 0.
    pub fn reward_for(self, player: Player) -> f64 {
        match (self, player) {
            (Outcome::Draw, _) => 0.5,
            (Outcome::XWins, Player::X) | (Outcome::OWins, Player::O) => 1.0,
            _ => 0.0,
        }
    }
}

/// Game-theoretic value from the mover's perspective under perfect play.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameValue {
    Loss,
    Draw,
    Win,
}

impl GameValue {
    fn from_i8(v: i8) -> Self {
        match v {
            -1 => GameValue::Loss,
            0 => GameValue::Draw,
            1 => GameValue::Win,
            _ => unreachable!("minimax values are ternary"),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            GameValue::Loss => -1,
            GameValue::Draw => 0,
            GameValue::Win => 1,
        }
    }

    /// Loss -> 0, Draw -> 0.5, Win -> 1.
    pub fn as_reward(self) -> f64 {
        (self.as_i8() as f64 + 1.0) / 2.0
    }
}

/// A tic-tac-toe position. The side to move is determined by the piece
/// counts (X always moves first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardState {
    cells: [Cell; CELLS],
}

impl BoardState {
    pub fn empty() -> Self {
        BoardState { cells: [Cell::Empty; CELLS] }
    }

    /// Validates piece counts and the single-winner invariant.
    pub fn from_cells(cells: [Cell; CELLS]) -> Result<Self, TttError> {
        let x = cells.iter().filter(|&&c| c == Cell::X).count();
        let o = cells.iter().filter(|&&c| c == Cell::O).count();
        if x != o && x != o + 1 {
            return Err(TttError::InvalidBoard(format!("piece counts X={x} O={o}")));
        }
        let board = BoardState { cells };
        let x_line = board.has_line(Player::X);
        let o_line = board.has_line(Player::O);
        if x_line && o_line {
            return Err(TttError::InvalidBoard("both players have a line".into()));
        }
        // The winner must have made the last move.
        if x_line && x != o + 1 {
            return Err(TttError::InvalidBoard("X has a line but did not move last".into()));
        }
        if o_line && x != o {
            return Err(TttError::InvalidBoard("O has a line but did not move last".into()));
        }
        Ok(board)
    }

    pub fn cells(&self) -> &[Cell; CELLS] {
        &self.cells
    }

    pub fn side_to_move(&self) -> Player {
        let x = self.cells.iter().filter(|&&c| c == Cell::X).count();
        let o = self.cells.iter().filter(|&&c| c == Cell::O).count();
        if x == o { Player::X } else { Player::O }
    }

    fn has_line(&self, p: Player) -> bool {
        let c = p.cell();
        LINES.iter().any(|l| l.iter().all(|&i| self.cells[i] == c))
    }

    pub fn winner(&self) -> Option<Player> {
        if self.has_line(Player::X) {
            Some(Player::X)
        } else if self.has_line(Player::O) {
            Some(Player::O)
        } else {
            None
        }
    }

    pub fn is_full(&self) -> bool {
        self.cells.iter().all(|&c| c != Cell::Empty)
    }

    pub fn is_terminal(&self) -> bool {
        self.winner().is_some() || self.is_full()
    }

    /// Terminal outcome, if the game is over here.
    pub fn outcome(&self) -> Option<Outcome> {
        match self.winner() {
            Some(Player::X) => Some(Outcome::XWins),
            Some(Player::O) => Some(Outcome::OWins),
            None if self.is_full() => Some(Outcome::Draw),
            None => None,
        }
    }

    /// The empty cells, in increasing index order.
    pub fn legal_moves(&self) -> Result<Vec<usize>, TttError> {
        if self.is_terminal() {
            return Err(TttError::TerminalState);
        }
        Ok((0..CELLS).filter(|&i| self.cells[i] == Cell::Empty).collect())
    }

    pub fn apply(&self, cell: usize) -> Result<BoardState, TttError> {
        if self.is_terminal() {
            return Err(TttError::TerminalState);
        }
        if cell >= CELLS || self.cells[cell] != Cell::Empty {
            return Err(TttError::IllegalMove(cell));
        }
        let mut next = *self;
        next.cells[cell] = self.side_to_move().cell();
        Ok(next)
    }

    /// Base-3 packing; unique per board.
    pub fn key(&self) -> u32 {
        self.cells.iter().fold(0u32, |acc, &c| {
            acc * 3
                + match c {
                    Cell::Empty => 0,
                    Cell::X => 1,
                    Cell::O => 2,
                }
        })
    }
}

impl std::fmt::Display for BoardState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for row in 0..3 {
            for col in 0..3 {
                let ch = match self.cells[row * 3 + col] {
                    Cell::Empty => '.',
                    Cell::X => 'X',
                    Cell::O => 'O',
                };
                write!(f, "{ch}")?;
            }
            if row < 2 {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// One played game: the acting states with the moves chosen, plus how it
/// ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<(BoardState, usize)>,
    pub outcome: Outcome,
}

impl Trajectory {
    /// Dump format: cell indices separated by spaces, outcome suffix last,
    /// e.g. `0 4 8 1 7 D`.
    pub fn to_line(&self) -> String {
        let mut parts: Vec<String> = self.steps.iter().map(|(_, m)| m.to_string()).collect();
        parts.push(self.outcome.suffix().to_string());
        parts.join(" ")
    }

    /// Parses the dump format back, replaying for legality.
    pub fn from_line(line: &str) -> Result<Self, TttError> {
        let mut parts: Vec<&str> = line.split_whitespace().collect();
        let suffix = parts
            .pop()
            .ok_or_else(|| TttError::InvalidBoard("empty trajectory line".into()))?;
        let outcome = match suffix {
            "X" => Outcome::XWins,
            "O" => Outcome::OWins,
            "D" => Outcome::Draw,
            other => return Err(TttError::InvalidBoard(format!("bad outcome suffix {other}"))),
        };
        let mut state = BoardState::empty();
        let mut steps = Vec::new();
        for p in parts {
            let cell: usize = p
                .parse()
                .map_err(|_| TttError::InvalidBoard(format!("bad move token {p}")))?;
            steps.push((state, cell));
            state = state.apply(cell)?;
        }
        match state.outcome() {
            Some(o) if o == outcome => Ok(Trajectory { steps, outcome }),
            _ => Err(TttError::InvalidBoard("trajectory does not end as recorded".into())),
        }
    }
}

/// The solved game: every reachable state enumerated (breadth-first from the
/// empty board, so ids are stable) with its exact minimax value.
///
/// Built once, then read-only; safe to share across threads.
pub struct Solved {
    states: Vec<BoardState>,
    index: HashMap<u32, usize>,
    values: Vec<i8>,
}

impl Solved {
    pub fn new() -> Self {
        let mut states = vec![BoardState::empty()];
        let mut index = HashMap::new();
        index.insert(states[0].key(), 0usize);
        let mut head = 0;
        while head < states.len() {
            let s = states[head];
            head += 1;
            if s.is_terminal() {
                continue;
            }
            for m in s.legal_moves().expect("non-terminal") {
                let next = s.apply(m).expect("legal");
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(next.key()) {
                    e.insert(states.len());
                    states.push(next);
                }
            }
        }
        // BFS orders states by piece count, so successors always come later;
        // a reverse sweep resolves every value in one pass.
        let mut values = vec![0i8; states.len()];
        for id in (0..states.len()).rev() {
            let s = states[id];
            values[id] = match s.outcome() {
                // A completed line belongs to the previous mover: mover lost.
                Some(Outcome::XWins) | Some(Outcome::OWins) => -1,
                Some(Outcome::Draw) => 0,
                None => s
                    .legal_moves()
                    .expect("non-terminal")
                    .iter()
                    .map(|&m| -values[index[&s.apply(m).unwrap().key()]])
                    .max()
                    .expect("at least one move"),
            };
        }
        Solved { states, index, values }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, id: usize) -> BoardState {
        self.states[id]
    }

    pub fn id_of(&self, state: &BoardState) -> Result<usize, TttError> {
        self.index.get(&state.key()).copied().ok_or(TttError::UnknownState)
    }

    /// Exact value of the state from the mover's perspective.
    pub fn minimax_value(&self, state: &BoardState) -> Result<GameValue, TttError> {
        Ok(GameValue::from_i8(self.values[self.id_of(state)?]))
    }

    /// Reward of playing `cell` here, from the mover's perspective:
    /// loss 0, draw 0.5, win 1 under subsequent perfect play.
    pub fn reward_of_move(&self, state: &BoardState, cell: usize) -> Result<f64, TttError> {
        let next = state.apply(cell)?;
        let value = GameValue::from_i8(-self.values[self.id_of(&next)?]);
        Ok(value.as_reward())
    }

    /// The `5478 x 9` reward table: exact move rewards on legal cells, 0 on
    /// illegal cells and everywhere in terminal states (an unavailable move
    /// scores like a forfeit).
    pub fn reward_table(&self) -> RewardTable {
        let rows = self
            .states
            .iter()
            .map(|s| {
                let mut row = vec![0.0; CELLS];
                if !s.is_terminal() {
                    for m in s.legal_moves().expect("non-terminal") {
                        row[m] = self.reward_of_move(s, m).expect("legal move");
                    }
                }
                row
            })
            .collect();
        RewardTable::new_allow_constant(rows).expect("rectangular table")
    }

    /// Ids of non-terminal states, the inputs a policy actually acts on.
    pub fn acting_state_ids(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&id| !self.states[id].is_terminal()).collect()
    }
}

impl Default for Solved {
    fn default() -> Self {
        Self::new()
    }
}

/// Restricts a policy's row to the legal moves of `state` and renormalizes.
/// A row with no legal mass falls back to uniform over the legal moves.
pub fn legal_dist(solved: &Solved, policy: &Policy, state: &BoardState) -> Result<Dist, TttError> {
    let legal = state.legal_moves()?;
    let row = policy.row(solved.id_of(state)?);
    let mut weights = vec![0.0; CELLS];
    let mut mass = 0.0;
    for &m in &legal {
        weights[m] = row.get(m);
        mass += row.get(m);
    }
    if mass > 0.0 {
        Ok(dist::normalize(&weights).expect("positive legal mass"))
    } else {
        for &m in &legal {
            weights[m] = 1.0;
        }
        Ok(dist::normalize(&weights).expect("legal moves exist"))
    }
}

/// Plays one game, X moves first.
pub fn rollout<R: Rng>(
    solved: &Solved,
    policy_x: &Policy,
    policy_o: &Policy,
    rng: &mut R,
) -> Trajectory {
    let mut state = BoardState::empty();
    let mut steps = Vec::new();
    loop {
        if let Some(outcome) = state.outcome() {
            return Trajectory { steps, outcome };
        }
        let policy = match state.side_to_move() {
            Player::X => policy_x,
            Player::O => policy_o,
        };
        let d = legal_dist(solved, policy, &state).expect("non-terminal state");
        let m = d.sample(rng);
        steps.push((state, m));
        state = state.apply(m).expect("sampled from legal support");
    }
}

/// States (ids) at which `policy` was to move, over `n_games` rollouts with
/// `policy` as the first player. Repeats included: this is a multiset sample
/// of the visitation distribution.
pub fn visitation_sample<R: Rng>(
    solved: &Solved,
    policy: &Policy,
    opponent: &Policy,
    n_games: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut visited = Vec::new();
    for _ in 0..n_games {
        let traj = rollout(solved, policy, opponent, rng);
        for (state, _) in &traj.steps {
            if state.side_to_move() == Player::X {
                visited.push(solved.id_of(state).expect("reachable state"));
            }
        }
    }
    visited
}

/// Noisy experts over the game's reward table, one per skill level.
pub fn build_expert_cohort(solved: &Solved, skill_levels: &[f64]) -> Result<Vec<Policy>, TttError> {
    let table = solved.reward_table();
    skill_levels
        .iter()
        .map(|&rho| Ok(experts::noisy_expert(&table, rho)?))
        .collect()
}

/// Uniform over the reward-maximal moves at every state: the perfect player.
pub fn optimal_policy(solved: &Solved) -> Policy {
    experts::optimal_expert(&solved.reward_table()).with_label("minimax-optimal")
}

/// Uniform over all nine cells; after legal renormalization this is the
/// uniform random legal player, the `rho -> 1` endpoint of the cohort.
pub fn uniform_policy(solved: &Solved) -> Policy {
    Policy::new("uniform", vec![Dist::uniform(CELLS); solved.num_states()])
        .expect("constant rows")
}

/// Exact win/draw/loss probabilities for X under the two policies, by
/// forward dynamic programming over the solved state space — no sampling.
pub fn exact_outcome_probs(
    solved: &Solved,
    policy_x: &Policy,
    policy_o: &Policy,
) -> (f64, f64, f64) {
    let mut reach = vec![0.0f64; solved.num_states()];
    reach[0] = 1.0;
    let (mut win, mut draw, mut loss) = (0.0, 0.0, 0.0);
    // BFS order is topological: every successor has a larger id.
    for id in 0..solved.num_states() {
        let p = reach[id];
        if p == 0.0 {
            continue;
        }
        let state = solved.state(id);
        match state.outcome() {
            Some(Outcome::XWins) => win += p,
            Some(Outcome::Draw) => draw += p,
            Some(Outcome::OWins) => loss += p,
            None => {
                let policy = match state.side_to_move() {
                    Player::X => policy_x,
                    Player::O => policy_o,
                };
                let d = legal_dist(solved, policy, &state).expect("non-terminal");
                for m in state.legal_moves().expect("non-terminal") {
                    let pm = d.get(m);
                    if pm > 0.0 {
                        let next_id =
                            solved.id_of(&state.apply(m).unwrap()).expect("reachable");
                        reach[next_id] += p * pm;
                    }
                }
            }
        }
    }
    (win, draw, loss)
}

/// Exact expected game reward for X (win 1, draw 0.5, loss 0).
pub fn exact_score(solved: &Solved, policy_x: &Policy, policy_o: &Policy) -> f64 {
    let (win, draw, _) = exact_outcome_probs(solved, policy_x, policy_o);
    win + 0.5 * draw
}

/// Exact visitation distribution of X-to-move states under the policy pair:
/// reach probabilities over non-terminal X states, normalized to sum to 1.
pub fn exact_visitation(
    solved: &Solved,
    policy_x: &Policy,
    policy_o: &Policy,
) -> Vec<(usize, f64)> {
    let mut reach = vec![0.0f64; solved.num_states()];
    reach[0] = 1.0;
    for id in 0..solved.num_states() {
        let p = reach[id];
        if p == 0.0 {
            continue;
        }
        let state = solved.state(id);
        if state.is_terminal() {
            continue;
        }
        let policy = match state.side_to_move() {
            Player::X => policy_x,
            Player::O => policy_o,
        };
        let d = legal_dist(solved, policy, &state).expect("non-terminal");
        for m in state.legal_moves().expect("non-terminal") {
            let pm = d.get(m);
            if pm > 0.0 {
                reach[solved.id_of(&state.apply(m).unwrap()).unwrap()] += p * pm;
            }
        }
    }
    let mut visits: Vec<(usize, f64)> = (0..solved.num_states())
        .filter(|&id| {
            let s = solved.state(id);
            !s.is_terminal() && s.side_to_move() == Player::X && reach[id] > 0.0
        })
        .map(|id| (id, reach[id]))
        .collect();
    let total: f64 = visits.iter().map(|(_, p)| p).sum();
    for (_, p) in &mut visits {
        *p /= total;
    }
    visits
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn board(spec: &str) -> BoardState {
        // Compact fixture syntax: 9 chars of X, O, or '.'.
        let cells: Vec<Cell> = spec
            .chars()
            .map(|c| match c {
                'X' => Cell::X,
                'O' => Cell::O,
                '.' => Cell::Empty,
                _ => panic!("bad fixture char {c}"),
            })
            .collect();
        BoardState::from_cells(cells.try_into().unwrap()).unwrap()
    }

    #[test]
    fn legal_moves_basics() {
        assert_eq!(BoardState::empty().legal_moves().unwrap().len(), 9);
        let nearly_full = board("XOXXOOOX.");
        assert_eq!(nearly_full.legal_moves().unwrap(), vec![8]);
        let won = board("XXXOO....");
        assert_eq!(won.legal_moves(), Err(TttError::TerminalState));
    }

    #[test]
    fn board_validation() {
        // Bad piece counts.
        let cells = [Cell::O; 9];
        assert!(BoardState::from_cells(cells).is_err());
        // Winner without having moved last.
        let mut cells = [Cell::Empty; 9];
        cells[0] = Cell::X;
        cells[1] = Cell::X;
        cells[2] = Cell::X;
        cells[3] = Cell::O;
        cells[4] = Cell::O;
        cells[5] = Cell::O;
        assert!(BoardState::from_cells(cells).is_err());
    }

    #[test]
    fn side_to_move_tracks_counts() {
        let s = BoardState::empty();
        assert_eq!(s.side_to_move(), Player::X);
        let s = s.apply(4).unwrap();
        assert_eq!(s.side_to_move(), Player::O);
    }

    #[test]
    fn empty_board_is_a_draw_by_independent_search() {
        // Plain depth-first negamax with no memoization, as a second route
        // to the same value.
        fn negamax(s: &BoardState) -> i8 {
            match s.outcome() {
                Some(Outcome::Draw) => return 0,
                Some(_) => return -1,
                None => {}
            }
            s.legal_moves()
                .unwrap()
                .into_iter()
                .map(|m| -negamax(&s.apply(m).unwrap()))
                .max()
                .unwrap()
        }
        assert_eq!(negamax(&BoardState::empty()), 0);
        let solved = Solved::new();
        assert_eq!(solved.minimax_value(&BoardState::empty()).unwrap(), GameValue::Draw);
    }

    #[test]
    fn immediate_win_is_detected() {
        // X on 0 and 1, third cell of the top row open, X to move.
        let s = board("XX.OO....");
        let solved = Solved::new();
        assert_eq!(solved.minimax_value(&s).unwrap(), GameValue::Win);
        assert_eq!(solved.reward_of_move(&s, 2).unwrap(), 1.0);
    }

    #[test]
    fn reachable_state_count_is_5478() {
        // Independent depth-first enumeration.
        fn dfs(s: BoardState, seen: &mut std::collections::HashSet<u32>) {
            if !seen.insert(s.key()) || s.is_terminal() {
                return;
            }
            for m in s.legal_moves().unwrap() {
                dfs(s.apply(m).unwrap(), seen);
            }
        }
        let mut seen = std::collections::HashSet::new();
        dfs(BoardState::empty(), &mut seen);
        assert_eq!(seen.len(), 5478);
        assert_eq!(Solved::new().num_states(), 5478);
    }

    #[test]
    fn negamax_consistency_everywhere() {
        // value(s) = max over moves of -value(successor) at every
        // non-terminal state: the perspective-flip identity in bulk.
        let solved = Solved::new();
        for id in solved.acting_state_ids() {
            let s = solved.state(id);
            let v = solved.minimax_value(&s).unwrap().as_i8();
            let best = s
                .legal_moves()
                .unwrap()
                .into_iter()
                .map(|m| -solved.minimax_value(&s.apply(m).unwrap()).unwrap().as_i8())
                .max()
                .unwrap();
            assert_eq!(v, best);
        }
    }

    #[test]
    fn reward_antisymmetry_between_movers() {
        // The zero-sum flip in reward units: my move's reward is one minus
        // the best reward available to the opponent in the position I leave.
        let solved = Solved::new();
        for id in solved.acting_state_ids() {
            let s = solved.state(id);
            for m in s.legal_moves().unwrap() {
                let next = s.apply(m).unwrap();
                if next.is_terminal() {
                    continue;
                }
                let opponent_best = next
                    .legal_moves()
                    .unwrap()
                    .into_iter()
                    .map(|m2| solved.reward_of_move(&next, m2).unwrap())
                    .fold(f64::NEG_INFINITY, f64::max);
                let mine = solved.reward_of_move(&s, m).unwrap();
                assert_eq!(mine, 1.0 - opponent_best);
            }
        }
    }

    #[test]
    fn blunder_reward_is_zero() {
        let solved = Solved::new();
        // X opens in the corner; replying on an adjacent edge loses under
        // perfect play, so that reply scores 0 for O.
        let after_corner = board("X........");
        assert_eq!(solved.reward_of_move(&after_corner, 1).unwrap(), 0.0);
        // And indeed X wins the resulting position.
        let s = after_corner.apply(1).unwrap();
        assert_eq!(solved.minimax_value(&s).unwrap(), GameValue::Win);
    }

    #[test]
    fn all_opening_moves_draw() {
        let solved = Solved::new();
        let s = BoardState::empty();
        for m in 0..9 {
            assert_eq!(solved.reward_of_move(&s, m).unwrap(), 0.5);
        }
    }

    #[test]
    fn reward_of_move_rejects_illegal() {
        let solved = Solved::new();
        let s = board("X........");
        assert_eq!(solved.reward_of_move(&s, 0), Err(TttError::IllegalMove(0)));
    }

    #[test]
    fn perfect_play_draws() {
        let solved = Solved::new();
        let star = optimal_policy(&solved);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let traj = rollout(&solved, &star, &star, &mut rng);
            assert_eq!(traj.outcome, Outcome::Draw);
        }
    }

    #[test]
    fn rollouts_are_reproducible_and_legal() {
        let solved = Solved::new();
        let a = build_expert_cohort(&solved, &[0.6]).unwrap().pop().unwrap();
        let b = uniform_policy(&solved);
        let t1 = rollout(&solved, &a, &b, &mut ChaCha8Rng::seed_from_u64(7));
        let t2 = rollout(&solved, &a, &b, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(t1, t2);
        // Every step is a legal move from its state.
        let mut state = BoardState::empty();
        for (s, m) in &t1.steps {
            assert_eq!(*s, state);
            assert!(state.legal_moves().unwrap().contains(m));
            state = state.apply(*m).unwrap();
        }
        assert_eq!(state.outcome(), Some(t1.outcome));
    }

    #[test]
    fn uniform_play_first_mover_advantage() {
        let solved = Solved::new();
        let u = uniform_policy(&solved);
        // Exact probability of an X win under uniform random play.
        let (win, draw, loss) = exact_outcome_probs(&solved, &u, &u);
        assert!((win + draw + loss - 1.0).abs() < 1e-12);
        assert!(win > 0.56 && win < 0.62, "exact X win rate {win}");
        // Monte-Carlo agrees.
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut wins = 0;
        for _ in 0..10_000 {
            if rollout(&solved, &u, &u, &mut rng).outcome == Outcome::XWins {
                wins += 1;
            }
        }
        let rate = wins as f64 / 10_000.0;
        assert!((0.56..=0.62).contains(&rate), "sampled X win rate {rate}");
        assert!((rate - win).abs() < 0.02);
    }

    #[test]
    fn visitation_sample_shape_and_determinism() {
        let solved = Solved::new();
        let u = uniform_policy(&solved);
        let star = optimal_policy(&solved);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let one = visitation_sample(&solved, &star, &u, 1, &mut rng);
        assert!(!one.is_empty() && one.len() <= 5);
        let v1 = visitation_sample(&solved, &star, &u, 10, &mut ChaCha8Rng::seed_from_u64(9));
        let v2 = visitation_sample(&solved, &star, &u, 10, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(v1, v2);
    }

    #[test]
    fn empirical_visitation_matches_forward_dp() {
        // Small-support policy pair: both players fairly peaked, so the
        // visited-state support is small enough for the L1 bound at this n.
        let solved = Solved::new();
        let cohort = build_expert_cohort(&solved, &[0.4, 0.2]).unwrap();
        let policy = &cohort[0];
        let opponent = &cohort[1];
        let exact: std::collections::HashMap<usize, f64> =
            exact_visitation(&solved, policy, opponent).into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let sample = visitation_sample(&solved, policy, opponent, 50_000, &mut rng);
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for id in &sample {
            *counts.entry(*id).or_insert(0.0) += 1.0;
        }
        let total = sample.len() as f64;
        let mut l1 = 0.0;
        for (&id, &p) in &exact {
            l1 += (p - counts.get(&id).copied().unwrap_or(0.0) / total).abs();
        }
        for (&id, &c) in &counts {
            if !exact.contains_key(&id) {
                l1 += c / total;
            }
        }
        assert!(l1 <= 0.05, "L1 distance {l1}");
    }

    #[test]
    fn cohort_perfect_limit_never_loses() {
        let solved = Solved::new();
        let star = optimal_policy(&solved);
        let minimax = optimal_policy(&solved);
        let uniform = uniform_policy(&solved);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            assert_ne!(rollout(&solved, &star, &minimax, &mut rng).outcome, Outcome::OWins);
            assert_ne!(rollout(&solved, &uniform, &star, &mut rng).outcome, Outcome::XWins);
        }
        // The tiny-rho cohort member behaves the same to first order.
        let nearly = build_expert_cohort(&solved, &[1e-9]).unwrap().pop().unwrap();
        for _ in 0..500 {
            assert_ne!(rollout(&solved, &nearly, &minimax, &mut rng).outcome, Outcome::OWins);
        }
    }

    #[test]
    fn cohort_rejects_bad_rho() {
        let solved = Solved::new();
        assert!(build_expert_cohort(&solved, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn tempered_mixture_transcends_cohort_exactly() {
        // The end-to-end statement on the solved game, without sampling:
        // sharpening the two-expert mixture beats both experts against a
        // fixed reference opponent.
        use crate::dist::{TemperScheme, Temperature};
        let solved = Solved::new();
        let cohort = build_expert_cohort(&solved, &[0.5, 0.7]).unwrap();
        let mixture = experts::mixture_policy(&cohort, None).unwrap();
        let tempered =
            experts::temper(&mixture, Temperature::Tau(0.001), TemperScheme::PowerOnProbs);
        let opponent = uniform_policy(&solved);
        let tempered_score = exact_score(&solved, &tempered, &opponent);
        for expert in &cohort {
            let expert_score = exact_score(&solved, expert, &opponent);
            assert!(
                tempered_score > expert_score,
                "tempered {tempered_score} vs expert {expert_score}"
            );
        }
        // Untempered, the mixture sits between the experts (no transcendence).
        let mix_score = exact_score(&solved, &mixture, &opponent);
        let best: f64 = cohort
            .iter()
            .map(|e| exact_score(&solved, e, &opponent))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(mix_score <= best + 0.02, "mixture {mix_score} best expert {best}");
    }

    #[test]
    fn trajectory_dump_round_trip() {
        let solved = Solved::new();
        let u = uniform_policy(&solved);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let t = rollout(&solved, &u, &u, &mut rng);
            let line = t.to_line();
            let back = Trajectory::from_line(&line).unwrap();
            assert_eq!(back, t);
        }
        assert!(Trajectory::from_line("0 0 X").is_err());
        assert!(Trajectory::from_line("").is_err());
    }
}
