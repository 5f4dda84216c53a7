//! Identification of desire expressions in first-person narratives and
//! prediction of whether each desire is fulfilled.
//!
//! The pipeline runs in stages: [`extractor`] finds desire expressions and
//! their context windows, [`aggregator`] turns crowd annotations into gold
//! labels, [`features`] computes sparse feature vectors using the resources
//! in [`lexicons`], [`classifier`] trains logistic regression or Naive Bayes
//! models, and [`evaluation`] scores and compares them. [`pipeline`] wires
//! the stages together for the `desire` command-line tool.

pub mod aggregator;
pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod extractor;
pub mod features;
pub mod lexicons;
pub mod pipeline;

pub use error::{Error, Result};
