//! Machine translation evaluation: BLEU, METEOR and METEOR-Hindi.

pub mod align;
pub mod bleu;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod hindi;
pub mod meteor;
pub mod ngram;
pub mod report;
pub mod resources;
pub mod text;

pub use error::{Error, Result};
