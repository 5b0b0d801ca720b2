//! Text and index codecs: FEN, UCI move text, SAN output, the 1968-entry
//! action space and the 77-token FEN encoding.

pub mod actions;
pub mod fen;
pub mod san;
pub mod tokens;
pub mod uci;

pub use actions::{decode, encode, encode_move, ActionError, ACTION_COUNT};
pub use fen::{format_fen, parse_fen, parse_fen_any, FenError};
pub use tokens::{detokenize, tokenize_fen, TokenError, TokenizedFen, TOKEN_COUNT};
pub use uci::{format_move, parse_legal_move, parse_move, UciMove, UciParseError};
