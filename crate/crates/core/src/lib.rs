//! Encode discrete quadratic models as QUBOs under one-hot and domain-wall
//! schemes and analyze the resulting landscapes exhaustively: validity,
//! strict local minima as a function of the penalty strength, and the
//! penalty thresholds that control them.

pub mod bits;
pub mod encode;
pub mod error;
pub mod landscape;
pub mod model;
pub mod qubo_text;
pub mod sample;
pub mod thresholds;

pub use bits::BitString;
pub use encode::{
    build_k_hot_penalty, encode, encode_domain_wall, encode_one_hot, DecodeResult, EncodingDescriptor, EncodingKind,
    QuadraticForm, QuboPair,
};
pub use error::{Error, Result};
pub use landscape::{GammaInterval, Landscape, RegisterClass, SolutionRecord, DEFAULT_CAP};
pub use model::{DiscreteAssignment, DqmInstance, TermKey};
pub use qubo_text::{export_qubo, import_qubo};
pub use thresholds::{verify_predicates, SearchPredicate, ThresholdReport};
