//! Toolkit for "wug test" morphological-inflection datasets: lemma-disjoint
//! splits, copy-bias augmentation, and stem-replacing data hallucination with
//! character- or substring-based dummy stems.

pub mod align;
pub mod corpus;
pub mod error;
pub mod evalkit;
pub mod hallucinate;
pub mod rng;
pub mod splitter;

pub use error::{Error, Result};
