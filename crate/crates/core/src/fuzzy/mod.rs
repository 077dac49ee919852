//! Three-input Mamdani controller producing the damper command.

mod inference;
mod membership;
mod rules;

pub use inference::{nearest_level, FuzzyParams, FuzzySystem, Inference};
pub use membership::{bell, BellMF, FuzzyVariable, Level, ACCELERATION_MFS, DISTORTION_MFS, FORCE_MFS, VELOCITY_MFS};
pub use rules::{build_rule_base, build_rule_base_for, RuleBase, PRINTED_RULES};
