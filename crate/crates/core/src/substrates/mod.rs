//! Trace generators with known ground truth.

pub mod lattice;
pub mod string_world;

pub use lattice::{
    ca_step, find_loops, langton_causal, langton_distance, langton_run, simulate_langton,
    LangtonParams, Lattice, LatticeError, Loop, RuleTable,
};
pub use string_world::{
    neutral_script, random_script, render_string_world, selection_script, Event, FamilyLimits,
    GenealogyScript, GroundTruth, ScriptError, SCENARIO_GENES,
};
