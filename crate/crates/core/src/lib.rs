//! Observation engine for artificial evolutionary systems.
//!
//! A run of recorded simulation states is turned into entities, the
//! recognition / causal / descendance relations between them, and per-axiom
//! verdicts on reproduction, fecundity, heredity and natural selection.

pub mod bench;
pub mod config;
pub mod evolution;
pub mod multiset;
pub mod observer;
pub mod probe;
pub mod relations;
pub mod report;
pub mod substrates;
pub mod trace;
pub mod verdict;
