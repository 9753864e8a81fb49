//! Built-in example models with closed-form reference solutions, and random models.

pub mod consumer;
pub mod corruption;
pub mod random;

pub use consumer::{
    consumer_model, consumer_reference, consumer_thresholds, ConsumerCase, ConsumerParams, ConsumerReference,
    ReferenceEquilibrium, ReferenceKind,
};
pub use corruption::{
    corruption_model, corruption_reference, manifold_point, manifold_residual, CorruptionParams, CorruptionReference,
    MixedCandidate, PureCandidate,
};
pub use random::{random_model, RandomModelConfig};
