//! Inventories, item keying and scoring, reliability and validity kernels.

pub mod inventory;
pub mod reliability;
pub mod validity;

use thiserror::Error;

pub use inventory::{score_sheet, trait_scores, Inventory, Item, ResponseSheet, EMOTIONAL_STABILITY};
pub use reliability::{
    cronbach_alpha, guttman_lambda6, mcdonald_omega, subscale_reliability, ItemMatrix, Lambda6,
    ReliabilityReport, SubscaleReliability, OMEGA_ESTIMATOR,
};
pub use validity::{
    criterion_validity, default_expectations, mtmm, CriterionReport, CriterionResult, Expectation, MtmmReport,
    MtmmTrait, Sign,
};

#[derive(Debug, Error)]
pub enum PsychometricsError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("inventory JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid inventory: {0}")]
    InvalidInventory(String),
    #[error("no answer for item `{0}`")]
    IncompleteSheet(String),
    #[error("answer {value} for item `{item}` is outside 1..={scale_max}")]
    AnswerOutOfRange { item: String, value: u8, scale_max: u8 },
    #[error("item matrix: {0}")]
    Matrix(String),
    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("coefficient undefined: {0}")]
    Undefined(String),
}
