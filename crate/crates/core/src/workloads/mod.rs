//! Workload generation and bundled fixtures.

pub mod builder;
pub mod fixtures;
pub mod generator;
pub mod small;

pub use builder::InstanceBuilder;
pub use fixtures::{config, real_world_fixture, real_world_tg, transformation_example, ConfigId};
pub use generator::{derive_candidate_params, generate_tg, synthetic_instance, GeneratorParams, ParamRanges};
pub use small::{random_small_instance, SmallParams};
