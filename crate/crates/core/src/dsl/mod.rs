//! Protocol description language: AST, parser, static validation, and
//! canonical rendering.

pub mod ast;
pub mod parse;
pub mod render;
pub mod validate;

pub use ast::{Action, Commitment, LabeledBlock, Mode, Protocol, VisiblePattern};
pub use parse::{parse_protocol, ParseError};
pub use render::render;
pub use validate::{validate, Diagnostic, Severity};
