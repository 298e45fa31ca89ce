//! Glicko-2 rating computation and the anchored-tournament protocol.
//!
//! A rating is a `(rating, deviation, volatility)` triple. Updates work on
//! the internal scale `mu = (r - 1500)/173.7178`, `phi = RD/173.7178`: the
//! opponent-weighting function `g`, expected score `E`, estimated variance
//! `v`, improvement `Delta`, then the volatility iteration and the new
//! `(mu', phi')`. A player who sits out a period only has their deviation
//! inflated.
//!
//! Anchored tournaments rate a candidate against opponents whose ratings
//! are frozen: every game updates the candidate only, either as one big
//! rating period (default) or one period per anchor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Internal scale factor between display ratings and `mu`/`phi`.
pub const GLICKO2_SCALE: f64 = 173.7178;

/// Default system constant (volatility responsiveness). The cited system
/// recommends values between 0.3 and 1.2; 0.5 is the middle of the road.
pub const DEFAULT_SYSTEM_TAU: f64 = 0.5;

/// Convergence tolerance of the volatility root-finder.
pub const VOLATILITY_EPS: f64 = 1e-6;

const MAX_VOLATILITY_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatingError {
    #[error("volatility iteration failed to converge within {MAX_VOLATILITY_ITERS} steps")]
    NonConvergence,
    #[error("anchored rating needs at least one game")]
    NoGames,
    #[error("{0} is not a valid game score (want 0, 0.5, or 1)")]
    BadScore(f64),
    #[error("invalid rating parameters: {0}")]
    BadParameters(String),
}

/// A Glicko-2 rating triple on the display scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Glicko2Rating {
    pub rating: f64,
    pub rd: f64,
    pub volatility: f64,
}

impl Glicko2Rating {
    /// The unrated-player prior.
    pub fn new_player() -> Self {
        Glicko2Rating { rating: 1500.0, rd: 350.0, volatility: 0.06 }
    }

    pub fn new(rating: f64, rd: f64, volatility: f64) -> Result<Self, RatingError> {
        if !rating.is_finite() || !rd.is_finite() || !volatility.is_finite() {
            return Err(RatingError::BadParameters("non-finite field".into()));
        }
        if rd <= 0.0 || rd > 500.0 {
            return Err(RatingError::BadParameters(format!("rd {rd} outside (0, 500]")));
        }
        if volatility <= 0.0 || volatility >= 1.0 {
            return Err(RatingError::BadParameters(format!(
                "volatility {volatility} outside (0, 1)"
            )));
        }
        Ok(Glicko2Rating { rating, rd, volatility })
    }

    /// `(mu, phi)` on the internal scale.
    pub fn to_internal(self) -> (f64, f64) {
        ((self.rating - 1500.0) / GLICKO2_SCALE, self.rd / GLICKO2_SCALE)
    }

    pub fn from_internal(mu: f64, phi: f64, volatility: f64) -> Self {
        Glicko2Rating { rating: 1500.0 + GLICKO2_SCALE * mu, rd: GLICKO2_SCALE * phi, volatility }
    }

    /// The `rating +/- 2 RD` interval, covering ~95%.
    pub fn ci95(self) -> (f64, f64) {
        (self.rating - 2.0 * self.rd, self.rating + 2.0 * self.rd)
    }
}

/// Score of one game from the rated player's perspective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameScore {
    Loss,
    Draw,
    Win,
}

impl GameScore {
    pub fn value(self) -> f64 {
        match self {
            GameScore::Loss => 0.0,
            GameScore::Draw => 0.5,
            GameScore::Win => 1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self, RatingError> {
        if v == 0.0 {
            Ok(GameScore::Loss)
        } else if v == 0.5 {
            Ok(GameScore::Draw)
        } else if v == 1.0 {
            Ok(GameScore::Win)
        } else {
            Err(RatingError::BadScore(v))
        }
    }
}

/// One rated game: the opponent's (frozen) rating and the outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub opponent: Glicko2Rating,
    pub score: GameScore,
}

fn g(phi: f64) -> f64 {
    1.0 / (1.0 + 3.0 * phi * phi / (std::f64::consts::PI * std::f64::consts::PI)).sqrt()
}

fn expect(mu: f64, mu_j: f64, phi_j: f64) -> f64 {
    1.0 / (1.0 + (-g(phi_j) * (mu - mu_j)).exp())
}

/// Expected score of `player` against `opponent` under the rating model.
pub fn expected_score(player: Glicko2Rating, opponent: Glicko2Rating) -> f64 {
    let (mu, _) = player.to_internal();
    let (mu_j, phi_j) = opponent.to_internal();
    expect(mu, mu_j, phi_j)
}

/// One rating-period update. Empty `results` only inflates the deviation.
pub fn glicko2_update(
    player: Glicko2Rating,
    results: &[MatchRecord],
    system_tau: f64,
) -> Result<Glicko2Rating, RatingError> {
    let (mu, phi) = player.to_internal();
    let sigma = player.volatility;

    if results.is_empty() {
        let phi_star = (phi * phi + sigma * sigma).sqrt();
        return Ok(Glicko2Rating::from_internal(mu, phi_star, sigma));
    }

    let mut v_inv = 0.0;
    let mut delta_sum = 0.0;
    for r in results {
        let (mu_j, phi_j) = r.opponent.to_internal();
        let gj = g(phi_j);
        let ej = expect(mu, mu_j, phi_j);
        v_inv += gj * gj * ej * (1.0 - ej);
        delta_sum += gj * (r.score.value() - ej);
    }
    let v = 1.0 / v_inv;
    let delta = v * delta_sum;

    let sigma_new = solve_volatility(sigma, delta, phi, v, system_tau)?;
    let phi_star = (phi * phi + sigma_new * sigma_new).sqrt();
    let phi_new = 1.0 / (1.0 / (phi_star * phi_star) + 1.0 / v).sqrt();
    let mu_new = mu + phi_new * phi_new * delta_sum;
    Ok(Glicko2Rating::from_internal(mu_new, phi_new, sigma_new))
}

/// The volatility iteration: a bracketing (Illinois-style) search for the
/// root of the scale function, converging to [`VOLATILITY_EPS`].
fn solve_volatility(
    sigma: f64,
    delta: f64,
    phi: f64,
    v: f64,
    system_tau: f64,
) -> Result<f64, RatingError> {
    let a = (sigma * sigma).ln();
    let delta2 = delta * delta;
    let phi2 = phi * phi;
    let f = |x: f64| {
        let ex = x.exp();
        let num = ex * (delta2 - phi2 - v - ex);
        let den = 2.0 * (phi2 + v + ex) * (phi2 + v + ex);
        num / den - (x - a) / (system_tau * system_tau)
    };

    let mut big_a = a;
    let mut big_b = if delta2 > phi2 + v {
        (delta2 - phi2 - v).ln()
    } else {
        let mut k = 1.0;
        let mut iters = 0;
        while f(a - k * system_tau) < 0.0 {
            k += 1.0;
            iters += 1;
            if iters > MAX_VOLATILITY_ITERS {
                return Err(RatingError::NonConvergence);
            }
        }
        a - k * system_tau
    };

    let mut fa = f(big_a);
    let mut fb = f(big_b);
    let mut iters = 0;
    while (big_b - big_a).abs() > VOLATILITY_EPS {
        iters += 1;
        if iters > MAX_VOLATILITY_ITERS {
            return Err(RatingError::NonConvergence);
        }
        let big_c = big_a + (big_a - big_b) * fa / (fb - fa);
        let fc = f(big_c);
        if fc * fb <= 0.0 {
            big_a = big_b;
            fa = fb;
        } else {
            fa /= 2.0;
        }
        big_b = big_c;
        fb = fc;
    }
    Ok((big_a / 2.0).exp())
}

/// How the anchored games are grouped into rating periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodMode {
    /// All games in one period (default).
    Single,
    /// One period per anchor, in the order the anchors are listed.
    PerAnchor,
}

/// Win/draw/loss counts of the candidate against one anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorResults {
    pub wins: u32,
    pub draws: u32,
    pub losses: u32,
}

impl AnchorResults {
    pub fn total(&self) -> u32 {
        self.wins + self.draws + self.losses
    }
}

/// Outcome of rating a candidate against frozen anchors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchoredRating {
    pub rating: f64,
    pub rd: f64,
    pub volatility: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_games: u32,
}

/// Rates a fresh candidate (1500, 350, 0.06 prior) against anchors with
/// frozen ratings. `results[i]` are the candidate's counts against
/// `anchors[i]`.
pub fn rate_anchored(
    results: &[AnchorResults],
    anchors: &[Glicko2Rating],
    system_tau: f64,
    mode: PeriodMode,
) -> Result<AnchoredRating, RatingError> {
    assert_eq!(results.len(), anchors.len(), "one result bundle per anchor");
    let n_games: u32 = results.iter().map(|r| r.total()).sum();
    if n_games == 0 {
        return Err(RatingError::NoGames);
    }
    let mut candidate = Glicko2Rating::new_player();
    let expand = |r: &AnchorResults, anchor: Glicko2Rating| -> Vec<MatchRecord> {
        let mut records = Vec::with_capacity(r.total() as usize);
        records.extend(
            std::iter::repeat(MatchRecord { opponent: anchor, score: GameScore::Win })
                .take(r.wins as usize),
        );
        records.extend(
            std::iter::repeat(MatchRecord { opponent: anchor, score: GameScore::Draw })
                .take(r.draws as usize),
        );
        records.extend(
            std::iter::repeat(MatchRecord { opponent: anchor, score: GameScore::Loss })
                .take(r.losses as usize),
        );
        records
    };
    match mode {
        PeriodMode::Single => {
            let mut records = Vec::new();
            for (r, &anchor) in results.iter().zip(anchors) {
                records.extend(expand(r, anchor));
            }
            candidate = glicko2_update(candidate, &records, system_tau)?;
        }
        PeriodMode::PerAnchor => {
            for (r, &anchor) in results.iter().zip(anchors) {
                let records = expand(r, anchor);
                if !records.is_empty() {
                    candidate = glicko2_update(candidate, &records, system_tau)?;
                }
            }
        }
    }
    let (ci_low, ci_high) = candidate.ci95();
    Ok(AnchoredRating {
        rating: candidate.rating,
        rd: candidate.rd,
        volatility: candidate.volatility,
        ci_low,
        ci_high,
        n_games,
    })
}

/// The `mean +/- 1.96 sigma` normal 95% interval.
pub fn ci95_sigma(mean: f64, sigma: f64) -> (f64, f64) {
    assert!(sigma >= 0.0, "sigma must be non-negative");
    (mean - 1.96 * sigma, mean + 1.96 * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example_player() -> (Glicko2Rating, Vec<MatchRecord>) {
        let player = Glicko2Rating::new(1500.0, 200.0, 0.06).unwrap();
        let results = vec![
            MatchRecord {
                opponent: Glicko2Rating::new(1400.0, 30.0, 0.06).unwrap(),
                score: GameScore::Win,
            },
            MatchRecord {
                opponent: Glicko2Rating::new(1550.0, 100.0, 0.06).unwrap(),
                score: GameScore::Loss,
            },
            MatchRecord {
                opponent: Glicko2Rating::new(1700.0, 300.0, 0.06).unwrap(),
                score: GameScore::Loss,
            },
        ];
        (player, results)
    }

    #[test]
    fn published_worked_example() {
        let (player, results) = worked_example_player();
        let updated = glicko2_update(player, &results, 0.5).unwrap();
        assert!((updated.rating - 1464.06).abs() < 0.01, "rating {}", updated.rating);
        assert!((updated.rd - 151.52).abs() < 0.01, "rd {}", updated.rd);
        assert!((updated.volatility - 0.05999).abs() < 1e-4);
    }

    #[test]
    fn no_games_inflates_rd_only() {
        let player = Glicko2Rating::new(1500.0, 200.0, 0.06).unwrap();
        let updated = glicko2_update(player, &[], 0.5).unwrap();
        assert_eq!(updated.rating, player.rating);
        assert_eq!(updated.volatility, player.volatility);
        let (_, phi) = player.to_internal();
        let expected_phi = (phi * phi + 0.06f64 * 0.06).sqrt();
        assert!((updated.rd - expected_phi * GLICKO2_SCALE).abs() < 1e-10);
        assert!(updated.rd > player.rd);
    }

    #[test]
    fn mirrored_players_move_symmetrically() {
        let a = Glicko2Rating::new(1500.0, 80.0, 0.06).unwrap();
        let b = Glicko2Rating::new(1500.0, 80.0, 0.06).unwrap();
        let a_up = glicko2_update(
            a,
            &[
                MatchRecord { opponent: b, score: GameScore::Win },
                MatchRecord { opponent: b, score: GameScore::Loss },
            ],
            0.5,
        )
        .unwrap();
        let b_up = glicko2_update(
            b,
            &[
                MatchRecord { opponent: a, score: GameScore::Loss },
                MatchRecord { opponent: a, score: GameScore::Win },
            ],
            0.5,
        )
        .unwrap();
        assert!((a_up.rating + b_up.rating - 3000.0).abs() < 0.5);
        assert!((a_up.rating - b_up.rating).abs() < 0.5);
    }

    #[test]
    fn scale_conversion_round_trip() {
        for rating in [800.0, 1500.0, 2400.0] {
            for rd in [20.0, 150.0, 350.0] {
                let r = Glicko2Rating::new(rating, rd, 0.06).unwrap();
                let (mu, phi) = r.to_internal();
                let back = Glicko2Rating::from_internal(mu, phi, r.volatility);
                assert!((back.rating - rating).abs() < 1e-10);
                assert!((back.rd - rd).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn expected_score_symmetry() {
        let a = Glicko2Rating::new(1650.0, 90.0, 0.06).unwrap();
        let b = Glicko2Rating::new(1493.0, 90.0, 0.06).unwrap();
        let sum = expected_score(a, b) + expected_score(b, a);
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wins_never_hurt_and_losses_never_help() {
        let base = Glicko2Rating::new(1500.0, 120.0, 0.06).unwrap();
        let opp = Glicko2Rating::new(1480.0, 60.0, 0.06).unwrap();
        let mut results =
            vec![MatchRecord { opponent: opp, score: GameScore::Draw }; 5];
        let before = glicko2_update(base, &results, 0.5).unwrap();
        results.push(MatchRecord { opponent: opp, score: GameScore::Win });
        let with_win = glicko2_update(base, &results, 0.5).unwrap();
        assert!(with_win.rating >= before.rating);
        results.pop();
        results.push(MatchRecord { opponent: opp, score: GameScore::Loss });
        let with_loss = glicko2_update(base, &results, 0.5).unwrap();
        assert!(with_loss.rating <= before.rating);
    }

    #[test]
    fn rd_shrinks_after_playing_reasonable_opponents() {
        // Holds across the realistic range (the identity can reverse only
        // for astronomically mismatched pairings).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        for _ in 0..200 {
            let player = Glicko2Rating::new(
                rng.gen_range(1000.0..2000.0),
                rng.gen_range(30.0..350.0),
                0.06,
            )
            .unwrap();
            let games = rng.gen_range(1..=10);
            let results: Vec<MatchRecord> = (0..games)
                .map(|_| MatchRecord {
                    opponent: Glicko2Rating::new(
                        rng.gen_range(1000.0..2000.0),
                        rng.gen_range(30.0..350.0),
                        0.06,
                    )
                    .unwrap(),
                    score: match rng.gen_range(0..3) {
                        0 => GameScore::Loss,
                        1 => GameScore::Draw,
                        _ => GameScore::Win,
                    },
                })
                .collect();
            let updated = glicko2_update(player, &results, 0.5).unwrap();
            assert!(
                updated.rd < player.rd,
                "rd grew: {} -> {} over {games} games",
                player.rd,
                updated.rd
            );
        }
    }

    #[test]
    fn anchored_all_losses_lands_below_weakest_anchor() {
        let anchors = [
            Glicko2Rating::new(1552.0, 45.2, 0.06).unwrap(),
            Glicko2Rating::new(1842.0, 45.2, 0.06).unwrap(),
            Glicko2Rating::new(2142.0, 59.0, 0.06).unwrap(),
        ];
        let results = [
            AnchorResults { wins: 0, draws: 0, losses: 100 },
            AnchorResults { wins: 0, draws: 0, losses: 100 },
            AnchorResults { wins: 0, draws: 0, losses: 100 },
        ];
        let rated =
            rate_anchored(&results, &anchors, DEFAULT_SYSTEM_TAU, PeriodMode::Single).unwrap();
        assert_eq!(rated.n_games, 300);
        assert!(rated.rating + 2.0 * rated.rd < 1552.0, "rating {}", rated.rating);
        // All wins sails past the strongest anchor.
        let all_wins = [
            AnchorResults { wins: 100, draws: 0, losses: 0 },
            AnchorResults { wins: 100, draws: 0, losses: 0 },
            AnchorResults { wins: 100, draws: 0, losses: 0 },
        ];
        let rated =
            rate_anchored(&all_wins, &anchors, DEFAULT_SYSTEM_TAU, PeriodMode::Single).unwrap();
        assert!(rated.rating > 2142.0, "rating {}", rated.rating);
    }

    #[test]
    fn anchored_even_score_stays_near_prior() {
        let anchors = [Glicko2Rating::new(1500.0, 50.0, 0.06).unwrap()];
        let results = [AnchorResults { wins: 50, draws: 0, losses: 50 }];
        let rated =
            rate_anchored(&results, &anchors, DEFAULT_SYSTEM_TAU, PeriodMode::Single).unwrap();
        assert!((rated.rating - 1500.0).abs() < 5.0);
    }

    #[test]
    fn period_modes_both_work_and_differ() {
        let anchors = [
            Glicko2Rating::new(1552.0, 45.2, 0.06).unwrap(),
            Glicko2Rating::new(1842.0, 45.2, 0.06).unwrap(),
        ];
        let results = [
            AnchorResults { wins: 60, draws: 10, losses: 30 },
            AnchorResults { wins: 20, draws: 10, losses: 70 },
        ];
        let single =
            rate_anchored(&results, &anchors, DEFAULT_SYSTEM_TAU, PeriodMode::Single).unwrap();
        let per =
            rate_anchored(&results, &anchors, DEFAULT_SYSTEM_TAU, PeriodMode::PerAnchor).unwrap();
        assert_eq!(single.n_games, per.n_games);
        // Same ballpark, but not the identical number.
        assert!((single.rating - per.rating).abs() < 150.0);
        assert!((single.rating - per.rating).abs() > 1e-9);
    }

    #[test]
    fn no_games_is_an_error() {
        let anchors = [Glicko2Rating::new(1500.0, 50.0, 0.06).unwrap()];
        let results = [AnchorResults { wins: 0, draws: 0, losses: 0 }];
        assert_eq!(
            rate_anchored(&results, &anchors, DEFAULT_SYSTEM_TAU, PeriodMode::Single).unwrap_err(),
            RatingError::NoGames
        );
    }

    #[test]
    fn ci_helpers() {
        assert_eq!(ci95_sigma(0.0, 1.0), (-1.96, 1.96));
        assert_eq!(ci95_sigma(5.0, 0.0), (5.0, 5.0));
        let (lo, hi) = ci95_sigma(1500.0, 45.2 / 1.96);
        assert!((hi - lo - 90.4).abs() < 1e-9);
        let r = Glicko2Rating::new(1464.0, 151.0, 0.06).unwrap();
        assert_eq!(r.ci95(), (1464.0 - 302.0, 1464.0 + 302.0));
    }

    #[test]
    fn parameter_validation() {
        assert!(Glicko2Rating::new(1500.0, 0.0, 0.06).is_err());
        assert!(Glicko2Rating::new(1500.0, 501.0, 0.06).is_err());
        assert!(Glicko2Rating::new(1500.0, 350.0, 1.5).is_err());
        assert!(GameScore::from_value(0.3).is_err());
        assert_eq!(GameScore::from_value(0.5), Ok(GameScore::Draw));
    }
}
