//! Stationary equilibria of finite-state, finite-action mean field games in continuous time.
//!
//! A model ([`ModelSpec`]) gives population-dependent transition rates `Q_{ija}(m)` and
//! rewards `r_{ia}(m)`. For fixed `m` the single-player problem is a discounted
//! continuous-time MDP ([`ctmdp`]); its optimal strategies induce stationary distributions
//! ([`stationary`]); an equilibrium is a fixed point of that best-response map
//! ([`equilibrium`]).

pub mod ctmdp;
pub mod equilibrium;
pub mod error;
pub mod format;
pub mod library;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod stationary;

pub use ctmdp::{
    mixed_generator, optimal_action_sets, policy_value, solve_optimal_value, uniformize, DiscreteMdp,
    OptimalitySummary, DEFAULT_TIE_TOL,
};
pub use equilibrium::{
    best_response_vertices, find_mixed_equilibria, find_pure_equilibria, hull_distance, recover_strategy, solve,
    verify_equilibrium, BestResponseHull, EquilibriumCertificate, EquilibriumKind, SearchConfig, SearchReport,
};
pub use error::{MfgError, Result};
pub use format::{load_model, model_to_string, parse_model, save_model, ModelFile};
pub use model::{
    validate_model, DeterministicStrategy, ModelBuilder, ModelSpec, PopulationDistribution, RateTensor, RewardTerm,
    StationaryStrategy, ValidationReport,
};
pub use poly::{Monomial, Polynomial};
pub use stationary::{
    assemble_generator, cofactor_stationary, cut_residual, is_irreducible, minor_sign_check, stationary_distribution,
    GeneratorMatrix, StationaryPoint,
};
