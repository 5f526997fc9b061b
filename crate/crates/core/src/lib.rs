//! Finite-dimensional simulation of indirect quantum measurements.
//!
//! The crate builds object/probe measurement models, evaluates their
//! measurement error, disturbance and spread statistics as exact operator
//! expectations, checks error-disturbance uncertainty relations with signed
//! slack, and searches parameter spaces for configurations that minimize (or
//! violate) a relation.
//!
//! ```
//! use qmeas_core::{build_sigma_phi, check, named_state, observable, sigma_x, sigma_y, Configuration, RelationId};
//!
//! let model = build_sigma_phi(std::f64::consts::FRAC_PI_2).unwrap();
//! let cfg = Configuration::new(model, named_state("+y").unwrap(), observable(sigma_x()), observable(sigma_y())).unwrap();
//! let verdict = check(RelationId::OzawaE2, &cfg, 1e-9).unwrap();
//! assert!(verdict.holds);
//! ```

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pauli;
pub mod random;
pub mod relations;
pub mod search;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianObservable, MixedState, PureState, C64};
pub use metrics::{full_report, Configuration, MetricsReport};
pub use model::{
    build_shift_model, build_sigma_phi, conditional_post_state, evolve, outcome_probabilities, rescale_mvo,
    EvolvedOperators, IndirectModel, ModelSpec, Outcome, ValueMap,
};
pub use pauli::{named_matrix, named_state, observable, sigma_x, sigma_y, sigma_z};
pub use relations::{check, check_all, RelationId, RelationVerdict, DEFAULT_TOL};
pub use search::{certify, search_min_slack, Family, ObservablePair, SearchResult, SearchSpace, Witness};
