//! Relative Elo from head-to-head results.
//!
//! The model is Bradley–Terry on the Elo scale with a Davidson draw term
//! and a first-move advantage. For a game where White leads by
//! `x = (r_white + adv − r_black)·ln10/400` and `ν` is the draw parameter:
//!
//! ```text
//! P(white wins) = e^{x/2} / Z,  P(draw) = ν / Z,  P(black wins) = e^{−x/2} / Z,
//! Z = e^{x/2} + e^{−x/2} + ν
//! ```
//!
//! Without draws this is the familiar `1/(1+10^{−Δ/400})`. Ratings get a
//! zero-centred Gaussian prior whose precision (in natural-logit units) is
//! the confidence scale, which keeps the estimate finite for players who won
//! or lost everything. The posterior mode is found by damped Newton steps;
//! ratings are then shifted to mean zero and rounded onto a dyadic grid so
//! that their sum is exactly zero.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seeded_rng;

/// Default prior precision on ratings.
pub const DEFAULT_CONFIDENCE: f64 = 0.5;
const K: f64 = std::f64::consts::LN_10 / 400.0;
/// Prior standard deviation of the colour advantage, in Elo.
const ADVANTAGE_SD_ELO: f64 = 200.0;
/// Prior standard deviation of `ln ν`.
const DRAW_LOG_SD: f64 = 3.0;
const MAX_ITERATIONS: usize = 200;
const GRADIENT_TOLERANCE: f64 = 1e-10;
/// Ratings are reported as multiples of 2^-20 Elo.
const GRID: f64 = 1048576.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EloError {
    #[error("no games given")]
    Empty,
    #[error("results do not connect all players: {0:?} are separate from the rest")]
    Disconnected(Vec<String>),
    #[error("invalid score {0} (expected 0, 0.5 or 1)")]
    BadScore(f64),
    #[error("player {0:?} played against themselves")]
    SelfPlay(String),
}

/// One finished game from White's point of view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Game {
    pub white: String,
    pub black: String,
    /// 1 for a White win, 0.5 for a draw, 0 for a Black win.
    pub white_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerRating {
    pub name: String,
    pub rating: f64,
    /// Half-width of the 95% interval, in Elo.
    pub uncertainty: f64,
    pub games: usize,
    /// `(wins + 0.5·draws) / games`.
    pub score: f64,
    /// Fraction of this player's games that were drawn.
    pub draws: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingTable {
    /// Highest rating first.
    pub players: Vec<PlayerRating>,
    /// Davidson `ν`.
    pub draw_parameter: f64,
    /// White's advantage in Elo.
    pub advantage: f64,
    pub iterations: usize,
}

impl RatingTable {
    pub fn get(&self, name: &str) -> Option<&PlayerRating> {
        self.players.iter().find(|p| p.name == name)
    }

    pub fn scores(&self) -> BTreeMap<String, f64> {
        self.players.iter().map(|p| (p.name.clone(), p.score)).collect()
    }

    /// Text table: rank, name, relative Elo ± uncertainty, score, draws.
    pub fn to_text(&self) -> String {
        let w = self.players.iter().map(|p| p.name.len()).max().unwrap_or(4).max(6);
        let mut out = format!("{:>3}  {:<w$}  {:>13}  {:>6}  {:>6}  {:>6}\n", "#", "Player", "Rel. Elo", "Games", "Score", "Draws");
        for (i, p) in self.players.iter().enumerate() {
            let elo = format!("{:+.0} ± {:.0}", p.rating, p.uncertainty);
            out.push_str(&format!(
                "{:>3}  {:<w$}  {:>13}  {:>6}  {:>5.1}%  {:>5.1}%\n",
                i + 1,
                p.name,
                elo,
                p.games,
                100.0 * p.score,
                100.0 * p.draws
            ));
        }
        out
    }
}

/// Head-to-head totals for one (white, black) pairing.
#[derive(Clone, Copy, Default)]
struct Tally {
    wins: f64,
    draws: f64,
    losses: f64,
}

struct Data {
    names: Vec<String>,
    tallies: BTreeMap<(usize, usize), Tally>,
}

fn collect(games: &[Game]) -> Result<Data, EloError> {
    if games.is_empty() {
        return Err(EloError::Empty);
    }
    let names: Vec<String> =
        games.iter().flat_map(|g| [g.white.clone(), g.black.clone()]).collect::<BTreeSet<_>>().into_iter().collect();
    let idx: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut tallies: BTreeMap<(usize, usize), Tally> = BTreeMap::new();
    for g in games {
        if g.white == g.black {
            return Err(EloError::SelfPlay(g.white.clone()));
        }
        let t = tallies.entry((idx[g.white.as_str()], idx[g.black.as_str()])).or_default();
        if g.white_score == 1.0 {
            t.wins += 1.0;
        } else if g.white_score == 0.5 {
            t.draws += 1.0;
        } else if g.white_score == 0.0 {
            t.losses += 1.0;
        } else {
            return Err(EloError::BadScore(g.white_score));
        }
    }
    // Union-find over pairings.
    let mut parent: Vec<usize> = (0..names.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for &(a, b) in tallies.keys() {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        parent[ra] = rb;
    }
    let r0 = root(&mut parent, 0);
    let apart: Vec<String> = (0..names.len()).filter(|&i| root(&mut parent, i) != r0).map(|i| names[i].clone()).collect();
    if !apart.is_empty() {
        return Err(EloError::Disconnected(apart));
    }
    Ok(Data { names, tallies })
}

/// Negative log posterior, its gradient and Hessian. Parameters are the
/// ratings in logit units, then the advantage, then `ln ν`.
fn objective(data: &Data, params: &[f64], confidence: f64) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let n = data.names.len();
    let (ia, it) = (n, n + 1);
    let dim = n + 2;
    let mut f = 0.0;
    let mut g = vec![0.0; dim];
    let mut h = vec![vec![0.0; dim]; dim];
    let theta = params[it];
    let nu = theta.exp();
    for (&(w, b), t) in &data.tallies {
        let x = params[w] - params[b] + params[ia];
        let (ea, eb) = ((x / 2.0).exp(), (-x / 2.0).exp());
        let z = ea + eb + nu;
        let (pa, pb, pn) = (ea / z, eb / z, nu / z);
        let games = t.wins + t.draws + t.losses;
        let ln_z = z.ln();
        f -= t.wins * (x / 2.0 - ln_z) + t.draws * (theta - ln_z) + t.losses * (-x / 2.0 - ln_z);
        // d(−LL)/dx and d(−LL)/dθ
        let gx = games * (pa - pb) / 2.0 - (t.wins - t.losses) / 2.0;
        let gt = games * pn - t.draws;
        let hxx = games * ((pa + pb) / 4.0 - (pa - pb) * (pa - pb) / 4.0);
        let htt = games * (pn - pn * pn);
        let hxt = -games * (pa - pb) / 2.0 * pn;
        // x = y_w − y_b + adv
        let dx = [(w, 1.0), (b, -1.0), (ia, 1.0)];
        for &(i, si) in &dx {
            g[i] += si * gx;
            h[i][it] += si * hxt;
            h[it][i] += si * hxt;
            for &(j, sj) in &dx {
                h[i][j] += si * sj * hxx;
            }
        }
        g[it] += gt;
        h[it][it] += htt;
    }
    for i in 0..n {
        f += confidence / 2.0 * params[i] * params[i];
        g[i] += confidence * params[i];
        h[i][i] += confidence;
    }
    let pa = 1.0 / (ADVANTAGE_SD_ELO * K).powi(2);
    f += pa / 2.0 * params[ia] * params[ia];
    g[ia] += pa * params[ia];
    h[ia][ia] += pa;
    let pt = 1.0 / (DRAW_LOG_SD * DRAW_LOG_SD);
    f += pt / 2.0 * theta * theta;
    g[it] += pt * theta;
    h[it][it] += pt;
    (f, g, h)
}

/// Solves `h · x = g` for symmetric positive definite `h` (Cholesky).
fn solve_spd(h: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (h[i][i] - s).max(1e-300).sqrt();
            } else {
                l[i][j] = (h[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (g[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Posterior-mode ratings with mean exactly zero.
pub fn estimate(games: &[Game], confidence: f64) -> Result<RatingTable, EloError> {
    let data = collect(games)?;
    let n = data.names.len();
    let mut params = vec![0.0; n + 2];
    let (mut f, mut g, mut h) = objective(&data, &params, confidence);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && norm(&g) >= GRADIENT_TOLERANCE {
        iterations += 1;
        let step = solve_spd(&h, &g);
        // Backtracking on the objective; Newton's full step is tried first.
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = params.iter().zip(&step).map(|(p, s)| p - t * s).collect();
            let (ft, gt, ht) = objective(&data, &trial, confidence);
            if ft <= f || t < 1e-12 {
                params = trial;
                (f, g, h) = (ft, gt, ht);
                break;
            }
            t /= 2.0;
        }
    }

    let mean = params[..n].iter().sum::<f64>() / n as f64;
    let mut ratings: Vec<f64> = params[..n].iter().map(|y| ((y - mean) / K * GRID).round() / GRID).collect();
    // Dyadic values of this size add exactly, so fixing the last entry makes
    // the sum exactly zero in any summation order.
    let rest: f64 = ratings[..n - 1].iter().sum();
    ratings[n - 1] = -rest;

    let mut played = vec![0usize; n];
    let mut points = vec![0.0; n];
    let mut drawn = vec![0usize; n];
    for (&(w, b), t) in &data.tallies {
        let games = (t.wins + t.draws + t.losses) as usize;
        played[w] += games;
        played[b] += games;
        points[w] += t.wins + 0.5 * t.draws;
        points[b] += t.losses + 0.5 * t.draws;
        drawn[w] += t.draws as usize;
        drawn[b] += t.draws as usize;
    }
    let mut players: Vec<PlayerRating> = (0..n)
        .map(|i| PlayerRating {
            name: data.names[i].clone(),
            rating: ratings[i],
            uncertainty: 1.96 / (h[i][i] * K * K).sqrt(),
            games: played[i],
            score: points[i] / played[i] as f64,
            draws: drawn[i] as f64 / played[i] as f64,
        })
        .collect();
    players.sort_by(|a, b| b.rating.total_cmp(&a.rating).then_with(|| a.name.cmp(&b.name)));
    Ok(RatingTable { players, draw_parameter: params[n + 1].exp(), advantage: params[n] / K, iterations })
}

/// Whether the rating order and the score order agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub rating_order: Vec<String>,
    pub score_order: Vec<String>,
    /// Pairs `(a, b)` with `a` rated above `b` but ranked below it by score.
    pub inversions: Vec<(String, String)>,
}

/// Compares the two orderings; ties on either side are broken by name.
pub fn rank_consistency(table: &RatingTable, scores: &BTreeMap<String, f64>) -> ConsistencyReport {
    let order = |value: &dyn Fn(&str) -> f64| {
        let mut names: Vec<String> = table.players.iter().map(|p| p.name.clone()).collect();
        names.sort_by(|a, b| value(b).total_cmp(&value(a)).then_with(|| a.cmp(b)));
        names
    };
    let rating = |n: &str| table.get(n).map_or(f64::NEG_INFINITY, |p| p.rating);
    let score = |n: &str| scores.get(n).copied().unwrap_or(f64::NEG_INFINITY);
    let rating_order = order(&rating);
    let score_order = order(&score);
    let pos = |list: &[String], n: &str| list.iter().position(|x| x == n).expect("same player set");
    let mut inversions = Vec::new();
    for (i, a) in rating_order.iter().enumerate() {
        for b in &rating_order[i + 1..] {
            if pos(&score_order, a) > pos(&score_order, b) {
                inversions.push((a.clone(), b.clone()));
            }
        }
    }
    ConsistencyReport { consistent: inversions.is_empty(), rating_order, score_order, inversions }
}

/// Expected score of a player `delta` Elo stronger, ignoring draws.
pub fn expected_score(delta: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-delta / 400.0))
}

/// Round robin drawn from the model: every pair plays `games_per_pair`
/// games, half with each colour.
pub fn simulate_round_robin(
    ratings: &[(&str, f64)],
    games_per_pair: usize,
    draw_parameter: f64,
    advantage: f64,
    seed: u64,
) -> Vec<Game> {
    let mut rng = seeded_rng(seed);
    let mut games = Vec::new();
    for (i, &(a, ra)) in ratings.iter().enumerate() {
        for &(b, rb) in &ratings[i + 1..] {
            for g in 0..games_per_pair {
                let (white, black, rw, rbk) = if g % 2 == 0 { (a, b, ra, rb) } else { (b, a, rb, ra) };
                let x = (rw + advantage - rbk) * K;
                let (ea, eb) = ((x / 2.0).exp(), (-x / 2.0).exp());
                let z = ea + eb + draw_parameter;
                let u: f64 = rng.gen::<f64>() * z;
                let white_score = if u < ea {
                    1.0
                } else if u < ea + draw_parameter {
                    0.5
                } else {
                    0.0
                };
                games.push(Game { white: white.into(), black: black.into(), white_score });
            }
        }
    }
    games
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_draw_limit_is_logistic() {
        // With ν = 0 the Davidson win probability is the Elo expectation.
        let x: f64 = 150.0 * K;
        let p = (x / 2.0).exp() / ((x / 2.0).exp() + (-x / 2.0).exp());
        assert!((p - expected_score(150.0)).abs() < 1e-15);
    }

    #[test]
    fn cholesky_solves() {
        let h = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = solve_spd(&h, &[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-12 && (x[0] + 3.0 * x[1] - 2.0).abs() < 1e-12);
    }
}
