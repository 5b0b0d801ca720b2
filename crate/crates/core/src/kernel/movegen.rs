use super::attacks;
use super::bitboard::Bitboard;
use super::position::{CastleSide, Move, Setup};
use super::types::{Color, Piece, PieceKind, Square, Variant};

impl Setup {
    pub(crate) fn pseudo_legal_moves(&self, out: &mut Vec<Move>) {
        let us = self.turn;
        let own = self.us();
        let occupied = self.board.occupied();
        let b = &self.board;

        self.pawn_moves(out);
        for from in b.pieces(us, PieceKind::Knight) {
            push_targets(out, from, attacks::knight_attacks(from) & !own);
        }
        for from in b.pieces(us, PieceKind::Bishop) {
            push_targets(out, from, attacks::bishop_attacks(from, occupied) & !own);
        }
        for from in b.pieces(us, PieceKind::Rook) {
            push_targets(out, from, attacks::rook_attacks(from, occupied) & !own);
        }
        for from in b.pieces(us, PieceKind::Queen) {
            push_targets(out, from, attacks::queen_attacks(from, occupied) & !own);
        }
        for from in b.pieces(us, PieceKind::King) {
            push_targets(out, from, attacks::king_attacks(from) & !own);
        }
        self.castling_moves(out);
    }

    fn pawn_moves(&self, out: &mut Vec<Move>) {
        let us = self.turn;
        let occupied = self.board.occupied();
        let them = self.them();
        let (dir, start_rank, promo_rank) = match us {
            Color::White => (1i8, 1u8, 7u8),
            Color::Black => (-1i8, 6u8, 0u8),
        };
        let horde_white = self.variant == Variant::Horde && us == Color::White;
        let push = |out: &mut Vec<Move>, from: Square, to: Square| {
            if to.rank() == promo_rank {
                for kind in PieceKind::PROMOTIONS {
                    out.push(Move::with_promotion(from, to, kind));
                }
            } else {
                out.push(Move::new(from, to));
            }
        };
        for from in self.board.pieces(us, PieceKind::Pawn) {
            if let Some(one) = from.offset(0, dir) {
                if !occupied.contains(one) {
                    push(out, from, one);
                    let may_double = from.rank() == start_rank || (horde_white && from.rank() == 0);
                    if may_double {
                        if let Some(two) = one.offset(0, dir) {
                            if !occupied.contains(two) {
                                out.push(Move::new(from, two));
                            }
                        }
                    }
                }
            }
            let targets = attacks::pawn_attacks(us, from);
            for to in targets & them {
                push(out, from, to);
            }
            if let Some(ep) = self.ep_square {
                if targets.contains(ep) && !occupied.contains(ep) {
                    out.push(Move::new(from, ep));
                }
            }
        }
    }

    fn castling_moves(&self, out: &mut Vec<Move>) {
        let us = self.turn;
        let Some(king) = self.board.king_of(us) else { return };
        let back = us.back_rank();
        if king.rank() != back {
            return;
        }
        for side in [CastleSide::King, CastleSide::Queen] {
            let Some(rook_file) = self.castling.get(us, side) else { continue };
            let rook = Square::from_coords(rook_file, back);
            if self.board.piece_at(rook) != Some(Piece::new(us, PieceKind::Rook)) {
                continue;
            }
            let king_to = Square::from_coords(side.king_target_file(), back);
            let rook_to = Square::from_coords(side.rook_target_file(), back);
            let others = self.board.occupied().without(king).without(rook);
            let must_be_empty = span(king, king_to) | span(rook, rook_to);
            if (must_be_empty & others).any() {
                continue;
            }
            let occupied = self.board.occupied();
            let attacked = span(king, king_to).into_iter().any(|sq| self.attackers_to(sq, !us, occupied).any());
            if attacked {
                continue;
            }
            out.push(Move::new(king, rook));
        }
    }

    pub(crate) fn legal_moves(&self) -> Vec<Move> {
        let mut moves = Vec::with_capacity(64);
        self.pseudo_legal_moves(&mut moves);
        if self.board.king_of(self.turn).is_none() {
            return moves;
        }
        moves.retain(|&m| self.leaves_king_safe(m));
        moves
    }

    pub(crate) fn leaves_king_safe(&self, m: Move) -> bool {
        let mut next = *self;
        next.play(m);
        !next.in_check(self.turn)
    }

    /// Plays `m` without checking legality.
    pub(crate) fn play(&mut self, m: Move) {
        let us = self.turn;
        let Some(piece) = self.board.piece_at(m.from) else { return };
        let prev_ep = self.ep_square.take();
        let back = us.back_rank();

        if self.is_castling(m) {
            let side = if m.to.file() > m.from.file() { CastleSide::King } else { CastleSide::Queen };
            self.board.remove(m.from);
            self.board.remove(m.to);
            self.board.put(Square::from_coords(side.king_target_file(), back), Piece::new(us, PieceKind::King));
            self.board.put(Square::from_coords(side.rook_target_file(), back), Piece::new(us, PieceKind::Rook));
            self.castling.clear_color(us);
            self.halfmove_clock += 1;
        } else {
            let mut captured = self.board.piece_at(m.to);
            if piece.kind == PieceKind::Pawn && Some(m.to) == prev_ep && captured.is_none() {
                let victim = Square::from_coords(m.to.file(), m.from.rank());
                captured = self.board.remove(victim);
            }
            self.board.remove(m.from);
            let placed = match m.promotion {
                Some(kind) if piece.kind == PieceKind::Pawn => Piece::new(us, kind),
                _ => piece,
            };
            self.board.put(m.to, placed);

            if piece.kind == PieceKind::Pawn {
                let double_from = match us {
                    Color::White => 1,
                    Color::Black => 6,
                };
                if m.from.rank() == double_from && m.from.rank().abs_diff(m.to.rank()) == 2 {
                    self.ep_square = Some(Square::from_coords(m.from.file(), (m.from.rank() + m.to.rank()) / 2));
                }
            }
            if piece.kind == PieceKind::King {
                self.castling.clear_color(us);
            } else if piece.kind == PieceKind::Rook && m.from.rank() == back {
                self.castling.remove_rook_file(us, m.from.file());
            }
            if let Some(cap) = captured {
                if cap.kind == PieceKind::Rook && m.to.rank() == (!us).back_rank() {
                    self.castling.remove_rook_file(!us, m.to.file());
                }
            }
            if piece.kind == PieceKind::Pawn || captured.is_some() {
                self.halfmove_clock = 0;
            } else {
                self.halfmove_clock += 1;
            }
        }
        if us == Color::Black {
            self.fullmove_number += 1;
        }
        self.turn = !us;
    }

    pub(crate) fn perft(&self, depth: u32) -> u64 {
        if depth == 0 {
            return 1;
        }
        let moves = self.legal_moves();
        if depth == 1 {
            return moves.len() as u64;
        }
        moves
            .into_iter()
            .map(|m| {
                let mut next = *self;
                next.play(m);
                next.perft(depth - 1)
            })
            .sum()
    }

    /// Absolute pins: a piece alone between its king and an enemy slider on
    /// a shared line, with a pseudo-legal move leaving that line. The en
    /// passant capture that removes two pawns from the king's rank is
    /// handled separately.
    pub(crate) fn pinned_pieces(&self) -> Bitboard {
        let us = self.turn;
        let Some(king) = self.board.king_of(us) else { return Bitboard::EMPTY };
        let occupied = self.board.occupied();
        let b = &self.board;
        let them = !us;
        let rook_like = b.pieces(them, PieceKind::Rook) | b.pieces(them, PieceKind::Queen);
        let bishop_like = b.pieces(them, PieceKind::Bishop) | b.pieces(them, PieceKind::Queen);
        let snipers = (attacks::rook_attacks(king, Bitboard::EMPTY) & rook_like)
            | (attacks::bishop_attacks(king, Bitboard::EMPTY) & bishop_like);

        let mut pseudo = Vec::with_capacity(64);
        self.pseudo_legal_moves(&mut pseudo);

        let mut pinned = Bitboard::EMPTY;
        for sniper in snipers {
            let blockers = attacks::between(king, sniper) & occupied;
            if blockers.count() != 1 || (blockers & self.us()).is_empty() {
                continue;
            }
            let sq = blockers.first().expect("one blocker");
            let pin_line = attacks::line(king, sniper);
            if pseudo.iter().any(|m| m.from == sq && !pin_line.contains(m.to)) {
                pinned = pinned.with(sq);
            }
        }

        // En passant may vacate two squares of the king's rank at once.
        if let Some(ep) = self.ep_square {
            for from in attacks::pawn_attacks(them, ep) & b.pieces(us, PieceKind::Pawn) {
                let m = Move::new(from, ep);
                if pinned.contains(from) || !pseudo.contains(&m) {
                    continue;
                }
                let was_checked = self.attackers_to(king, them, occupied);
                let mut next = *self;
                next.play(m);
                let now_checked = next.attackers_to(king, them, next.board.occupied());
                if (now_checked & !was_checked).any() {
                    pinned = pinned.with(from);
                }
            }
        }
        pinned
    }
}

fn push_targets(out: &mut Vec<Move>, from: Square, targets: Bitboard) {
    for to in targets {
        out.push(Move::new(from, to));
    }
}

/// Squares from `a` to `b` inclusive along a rank.
fn span(a: Square, b: Square) -> Bitboard {
    let (lo, hi) = if a.index() <= b.index() { (a.index(), b.index()) } else { (b.index(), a.index()) };
    (lo..=hi).map(|i| Square::from_index(i as u8)).collect()
}
