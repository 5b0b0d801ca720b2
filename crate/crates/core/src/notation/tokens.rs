//! Fixed-width 77-token FEN encoding.
//!
//! Layout, by token offset:
//!
//! | offset | width | content                                              |
//! |--------|-------|------------------------------------------------------|
//! | 0      | 64    | one token per square, a8..h8, a7..h7, …, a1..h1; `.` empty |
//! | 64     | 1     | side to move (`w`/`b`)                               |
//! | 65     | 4     | castling field, right-padded with `.`                |
//! | 69     | 2     | en passant square, or `-.`                           |
//! | 71     | 3     | halfmove clock digits, right-padded with `.`          |
//! | 74     | 3     | fullmove number digits, right-padded with `.`         |

use std::sync::LazyLock;

pub const TOKEN_COUNT: usize = 77;
pub type TokenizedFen = [u8; TOKEN_COUNT];

/// The token alphabet in id order.
pub const VOCABULARY: &str = "-.0123456789ABCDEFGHKNPQRabcdefghknpqrw";

static IDS: LazyLock<[Option<u8>; 128]> = LazyLock::new(|| {
    let mut ids = [None; 128];
    for (i, c) in VOCABULARY.bytes().enumerate() {
        ids[c as usize] = Some(i as u8);
    }
    ids
});

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TokenError {
    #[error("FEN needs 6 fields, found {0}")]
    FieldCount(usize),
    #[error("{field} field {value:?} does not fit in {width} tokens")]
    Overflow { field: &'static str, value: String, width: usize },
    #[error("character {0:?} is not in the vocabulary")]
    UnknownSymbol(char),
    #[error("token id {0} is not in the vocabulary")]
    UnknownToken(u8),
    #[error("placement does not describe 64 squares")]
    Placement,
}

fn id(c: char) -> Result<u8, TokenError> {
    IDS.get(c as usize).copied().flatten().ok_or(TokenError::UnknownSymbol(c))
}

fn push_padded(out: &mut Vec<u8>, field: &'static str, value: &str, width: usize) -> Result<(), TokenError> {
    if value.len() > width {
        return Err(TokenError::Overflow { field, value: value.to_string(), width });
    }
    for c in value.chars() {
        out.push(id(c)?);
    }
    for _ in value.len()..width {
        out.push(id('.')?);
    }
    Ok(())
}

/// Encodes a six-field FEN string into exactly [`TOKEN_COUNT`] ids.
pub fn tokenize_fen(fen: &str) -> Result<TokenizedFen, TokenError> {
    let fields: Vec<&str> = fen.split_ascii_whitespace().collect();
    if fields.len() != 6 {
        return Err(TokenError::FieldCount(fields.len()));
    }
    let mut out = Vec::with_capacity(TOKEN_COUNT);
    for c in fields[0].chars() {
        match c {
            '/' => {}
            '1'..='8' => {
                for _ in 0..c.to_digit(10).unwrap() {
                    out.push(id('.')?);
                }
            }
            _ => out.push(id(c)?),
        }
    }
    if out.len() != 64 {
        return Err(TokenError::Placement);
    }
    push_padded(&mut out, "side to move", fields[1], 1)?;
    push_padded(&mut out, "castling", fields[2], 4)?;
    push_padded(&mut out, "en passant", fields[3], 2)?;
    push_padded(&mut out, "halfmove", fields[4], 3)?;
    push_padded(&mut out, "fullmove", fields[5], 3)?;
    Ok(out.try_into().expect("layout sums to 77"))
}

/// Decodes tokens back into a FEN string.
pub fn detokenize(tokens: &TokenizedFen) -> Result<String, TokenError> {
    let vocab = VOCABULARY.as_bytes();
    let chars: Vec<char> = tokens
        .iter()
        .map(|&t| vocab.get(t as usize).map(|&b| b as char).ok_or(TokenError::UnknownToken(t)))
        .collect::<Result<_, _>>()?;
    let mut fen = String::with_capacity(90);
    for rank in 0..8 {
        let mut empty = 0;
        for &c in &chars[rank * 8..rank * 8 + 8] {
            if c == '.' {
                empty += 1;
            } else {
                if empty > 0 {
                    fen.push(char::from_digit(empty, 10).unwrap());
                    empty = 0;
                }
                fen.push(c);
            }
        }
        if empty > 0 {
            fen.push(char::from_digit(empty, 10).unwrap());
        }
        if rank < 7 {
            fen.push('/');
        }
    }
    let field = |range: std::ops::Range<usize>| chars[range].iter().filter(|&&c| c != '.').collect::<String>();
    for range in [64..65, 65..69, 69..71, 71..74, 74..77] {
        fen.push(' ');
        fen.push_str(&field(range));
    }
    Ok(fen)
}
