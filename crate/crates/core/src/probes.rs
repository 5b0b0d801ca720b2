//! Probes over a policy's output distribution: where the probability mass
//! starts from, how much of it is on legal moves, and how that evolves
//! across training checkpoints.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::kernel::{attacks, Board, CastlingRights, Color, Piece, PieceKind, Position, Setup, Square, Variant};
use crate::metrics::legal_accuracy;
use crate::notation::actions::{all_actions, encode_move};
use crate::notation::fen::format_fen;
use crate::policy::{Policy, PolicyDistribution, PolicyError};
use crate::seeded_rng;

/// Boards sampled per piece kind for the relative-legality probe.
pub const BOARDS_PER_PIECE: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("at least two checkpoints are needed, got {0}")]
    TooFewCheckpoints(usize),
    #[error("checkpoint steps must increase strictly ({0} then {1})")]
    UnorderedCheckpoints(u64, u64),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

/// Per-square values, `values[rank][file]` with rank 0 = rank 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub values: [[f64; 8]; 8],
    pub fen: String,
    pub checkpoint: String,
}

impl HeatmapGrid {
    pub fn at(&self, sq: Square) -> f64 {
        self.values[sq.rank() as usize][sq.file() as usize]
    }

    /// Eight lines, rank 8 first, files a..h left to right.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for rank in (0..8).rev() {
            let row: Vec<String> = self.values[rank].iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Renders the grid as a PNG, `cell` pixels per square; white is 0 and
    /// saturated red is 1, with a faint checkerboard to keep squares apart.
    pub fn write_png(&self, path: &Path, cell: u32) -> Result<(), ProbeError> {
        let size = 8 * cell;
        let img = image::RgbImage::from_fn(size, size, |x, y| {
            let file = (x / cell) as usize;
            let rank = 7 - (y / cell) as usize;
            let v = self.values[rank][file].clamp(0.0, 1.0);
            let shade = if (file + rank) % 2 == 0 { 235.0 } else { 255.0 };
            let fade = |c: f64| (shade * (1.0 - v) + c * v).round() as u8;
            image::Rgb([fade(200.0), fade(20.0), fade(20.0)])
        });
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }
}

/// Probability mass by origin square, before normalization.
pub fn origin_mass(dist: &PolicyDistribution) -> [f64; 64] {
    let mut by_square: [Vec<usize>; 64] = std::array::from_fn(|_| Vec::new());
    for (i, m) in all_actions().iter().enumerate() {
        by_square[m.from.index()].push(i);
    }
    std::array::from_fn(|s| dist.mass(by_square[s].iter().copied()))
}

/// Origin-square mass divided by its maximum; an all-zero grid stays zero.
pub fn origin_heatmap(dist: &PolicyDistribution, pos: &Position, checkpoint: &str) -> HeatmapGrid {
    let mass = origin_mass(dist);
    let max = mass.iter().copied().fold(0.0, f64::max);
    let mut values = [[0.0; 8]; 8];
    for sq in Square::all() {
        if max > 0.0 {
            values[sq.rank() as usize][sq.file() as usize] = mass[sq.index()] / max;
        }
    }
    HeatmapGrid { values, fen: format_fen(pos), checkpoint: checkpoint.to_string() }
}

fn legal_indices(pos: &Position) -> Vec<usize> {
    pos.legal_moves().into_iter().filter_map(|m| encode_move(pos, m).ok()).collect()
}

/// Total probability of the legal moves.
pub fn legal_mass(dist: &PolicyDistribution, pos: &Position) -> f64 {
    dist.mass(legal_indices(pos))
}

/// `p(legal moves from sq) / p(all actions from sq)`, or `None` when the
/// distribution puts no mass on `sq` at all.
pub fn relative_legality_at(dist: &PolicyDistribution, pos: &Position, sq: Square) -> Option<f64> {
    let from_sq: Vec<usize> = all_actions().iter().enumerate().filter(|(_, m)| m.from == sq).map(|(i, _)| i).collect();
    let all = dist.mass(from_sq);
    if all <= 0.0 {
        return None;
    }
    let legal: Vec<usize> =
        pos.legal_moves().into_iter().filter(|m| m.from == sq).filter_map(|m| encode_move(pos, m).ok()).collect();
    Some(dist.mass(legal) / all)
}

/// Boards with two kings and, unless `kind` is the king, one white piece of
/// that kind; White to move, neither king in check, kings apart. Returns the
/// board and the square of the probed piece.
pub fn simple_boards(kind: PieceKind, seed: u64, n: usize) -> Vec<(Position, Square)> {
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let picks = index::sample(&mut rng, 64, 3).into_vec();
        let (wk, bk, extra) = (Square::from_index(picks[0] as u8), Square::from_index(picks[1] as u8), Square::from_index(picks[2] as u8));
        if attacks::king_attacks(wk).contains(bk) {
            continue;
        }
        let mut board = Board::empty();
        board.put(wk, Piece::new(Color::White, PieceKind::King));
        board.put(bk, Piece::new(Color::Black, PieceKind::King));
        let probed = if kind == PieceKind::King {
            wk
        } else {
            if kind == PieceKind::Pawn && (extra.rank() == 0 || extra.rank() == 7) {
                continue;
            }
            board.put(extra, Piece::new(Color::White, kind));
            extra
        };
        let setup = Setup {
            board,
            turn: Color::White,
            castling: CastlingRights::none(),
            ep_square: None,
            halfmove_clock: 0,
            fullmove_number: 1,
            variant: Variant::Standard,
        };
        match Position::from_setup(setup) {
            Ok(pos) if !pos.is_check() => out.push((pos, probed)),
            _ => {}
        }
    }
    out
}

/// Mean relative legality of `kind` over [`BOARDS_PER_PIECE`] simple
/// boards. Boards where the policy puts no mass on the piece are left out;
/// 0 if that leaves nothing.
pub fn piece_relative_legality(policy: &mut dyn Policy, kind: PieceKind, seed: u64) -> Result<f64, ProbeError> {
    piece_relative_legality_n(policy, kind, seed, BOARDS_PER_PIECE)
}

pub fn piece_relative_legality_n(
    policy: &mut dyn Policy,
    kind: PieceKind,
    seed: u64,
    boards: usize,
) -> Result<f64, ProbeError> {
    let mut sum = 0.0;
    let mut counted = 0usize;
    for (pos, sq) in simple_boards(kind, seed, boards) {
        let dist = policy.distribution(&pos)?;
        if let Some(r) = relative_legality_at(&dist, &pos, sq) {
            sum += r;
            counted += 1;
        }
    }
    Ok(if counted == 0 { 0.0 } else { sum / counted as f64 })
}

/// One checkpoint's measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsPoint {
    pub checkpoint: String,
    pub step: u64,
    pub id_legal_rate: f64,
    pub ood_legal_rate: f64,
    pub id_legal_mass: f64,
    pub ood_legal_mass: f64,
    /// Relative legality keyed by piece letter (N, R, B, Q, P, K).
    pub piece_legality: BTreeMap<char, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSeries {
    pub points: Vec<DynamicsPoint>,
}

/// A policy at one training step.
pub struct Checkpoint<'a> {
    pub label: String,
    pub step: u64,
    pub policy: &'a mut dyn Policy,
}

fn mean_legal_mass(policy: &mut dyn Policy, boards: &[Position]) -> Result<f64, ProbeError> {
    if boards.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for pos in boards {
        total += legal_mass(&policy.distribution(pos)?, pos);
    }
    Ok(total / boards.len() as f64)
}

/// Legal-move rate, mean legal mass (ID and OOD) and per-piece relative
/// legality at every checkpoint.
pub fn dynamics_series(
    checkpoints: &mut [Checkpoint<'_>],
    id_boards: &[Position],
    ood_boards: &[Position],
    seed: u64,
    boards_per_piece: usize,
) -> Result<DynamicsSeries, ProbeError> {
    if checkpoints.len() < 2 {
        return Err(ProbeError::TooFewCheckpoints(checkpoints.len()));
    }
    for w in checkpoints.windows(2) {
        if w[1].step <= w[0].step {
            return Err(ProbeError::UnorderedCheckpoints(w[0].step, w[1].step));
        }
    }
    let mut series = DynamicsSeries::default();
    for cp in checkpoints.iter_mut() {
        let policy = &mut *cp.policy;
        let id_legal_rate = legal_accuracy(policy, id_boards)?.accuracy;
        let ood_legal_rate = legal_accuracy(policy, ood_boards)?.accuracy;
        let id_legal_mass = mean_legal_mass(policy, id_boards)?;
        let ood_legal_mass = mean_legal_mass(policy, ood_boards)?;
        let mut piece_legality = BTreeMap::new();
        for kind in [PieceKind::Knight, PieceKind::Rook, PieceKind::Bishop, PieceKind::Queen, PieceKind::Pawn, PieceKind::King] {
            let r = piece_relative_legality_n(policy, kind, seed, boards_per_piece)?;
            piece_legality.insert(kind.char().to_ascii_uppercase(), r);
        }
        series.points.push(DynamicsPoint {
            checkpoint: cp.label.clone(),
            step: cp.step,
            id_legal_rate,
            ood_legal_rate,
            id_legal_mass,
            ood_legal_mass,
            piece_legality,
        });
    }
    Ok(series)
}

const PIECE_COLUMNS: [char; 6] = ['N', 'R', 'B', 'Q', 'P', 'K'];

impl DynamicsSeries {
    pub fn write_csv(&self, out: impl Write) -> Result<(), ProbeError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["checkpoint", "step", "id_legal_rate", "ood_legal_rate", "id_legal_mass", "ood_legal_mass"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend(PIECE_COLUMNS.iter().map(|c| format!("rel_legal_{c}")));
        w.write_record(&header)?;
        for p in &self.points {
            let mut row = vec![
                p.checkpoint.clone(),
                p.step.to_string(),
                p.id_legal_rate.to_string(),
                p.ood_legal_rate.to_string(),
                p.id_legal_mass.to_string(),
                p.ood_legal_mass.to_string(),
            ];
            row.extend(PIECE_COLUMNS.iter().map(|c| p.piece_legality.get(c).map_or(String::new(), |v| v.to_string())));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Static line chart of every series against the checkpoint index.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (640.0, 360.0, 40.0);
        let n = self.points.len().max(2) - 1;
        let x = |i: usize| pad + (w - 2.0 * pad) * i as f64 / n as f64;
        let y = |v: f64| h - pad - (h - 2.0 * pad) * v.clamp(0.0, 1.0);
        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
             <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>\n",
            h - pad,
            w - pad,
            h - pad,
            h - pad
        );
        type Getter = fn(&DynamicsPoint) -> f64;
        let series: [(&str, &str, Getter); 4] = [
            ("ID legal rate", "#1f77b4", |p| p.id_legal_rate),
            ("OOD legal rate", "#ff7f0e", |p| p.ood_legal_rate),
            ("ID legal mass", "#2ca02c", |p| p.id_legal_mass),
            ("OOD legal mass", "#d62728", |p| p.ood_legal_mass),
        ];
        for (k, (label, color, get)) in series.iter().enumerate() {
            let pts: Vec<String> =
                self.points.iter().enumerate().map(|(i, p)| format!("{:.1},{:.1}", x(i), y(get(p)))).collect();
            let _ = writeln!(svg, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>", pts.join(" "));
            let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{label}</text>", pad + 8.0, pad + 14.0 * k as f64);
        }
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>", x(i), h - pad + 16.0, p.step);
        }
        svg.push_str("</svg>\n");
        svg
    }
}
