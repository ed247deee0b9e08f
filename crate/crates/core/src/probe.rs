//! Step-count instrumentation.
//!
//! Counters are monotone and only ever observed; enabling a probe must not
//! change anything the pipeline computes.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Counter {
    /// Entity equality comparisons (t_=).
    EntityComparisons,
    /// Distance evaluations (t_D).
    DistanceEvaluations,
    /// Causal predicate tests (t_c).
    CausalTests,
    /// Delta membership tests (t_Δ).
    DeltaTests,
    /// Recognition candidate tests (t_δmut).
    RecognitionTests,
    /// Reachability propagations while maintaining the transitive closure.
    ClosureRelaxations,
    /// Elementary work done by a recognizer while extracting entities.
    RecognitionSteps,
}

impl Counter {
    pub const ALL: [Counter; 7] = [
        Counter::EntityComparisons,
        Counter::DistanceEvaluations,
        Counter::CausalTests,
        Counter::DeltaTests,
        Counter::RecognitionTests,
        Counter::ClosureRelaxations,
        Counter::RecognitionSteps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Counter::EntityComparisons => "entity_comparisons",
            Counter::DistanceEvaluations => "distance_evaluations",
            Counter::CausalTests => "causal_tests",
            Counter::DeltaTests => "delta_tests",
            Counter::RecognitionTests => "recognition_tests",
            Counter::ClosureRelaxations => "closure_relaxations",
            Counter::RecognitionSteps => "recognition_steps",
        }
    }
}

pub type Snapshot = [u64; 7];

#[derive(Debug, Default)]
pub struct Probe {
    enabled: bool,
    counts: [AtomicU64; 7],
    snapshots: Mutex<Vec<Snapshot>>,
}

impl Probe {
    pub fn enabled() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    #[inline]
    pub fn add(&self, counter: Counter, n: u64) {
        if self.enabled {
            self.counts[counter as usize].fetch_add(n, Ordering::Relaxed);
        }
    }

    #[inline]
    pub fn tick(&self, counter: Counter) {
        self.add(counter, 1);
    }

    pub fn get(&self, counter: Counter) -> u64 {
        self.counts[counter as usize].load(Ordering::Relaxed)
    }

    pub fn totals(&self) -> Snapshot {
        std::array::from_fn(|i| self.counts[i].load(Ordering::Relaxed))
    }

    /// Records the running totals at the end of a processed state.
    pub fn snapshot(&self) {
        if self.enabled {
            let totals = self.totals();
            self.snapshots.lock().expect("probe lock").push(totals);
        }
    }

    pub fn snapshots(&self) -> Vec<Snapshot> {
        self.snapshots.lock().expect("probe lock").clone()
    }

    pub fn report(&self) -> ProbeReport {
        ProbeReport {
            totals: Counter::ALL
                .iter()
                .map(|&c| (c.name().to_string(), self.get(c)))
                .collect(),
            states: self.snapshots.lock().expect("probe lock").len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub totals: BTreeMap<String, u64>,
    pub states: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_probe_counts_nothing() {
        let p = Probe::disabled();
        p.add(Counter::DeltaTests, 10);
        p.snapshot();
        assert_eq!(p.get(Counter::DeltaTests), 0);
        assert!(p.snapshots().is_empty());
    }

    #[test]
    fn snapshots_are_monotone() {
        let p = Probe::enabled();
        for i in 0..5 {
            p.add(Counter::CausalTests, i);
            p.tick(Counter::DistanceEvaluations);
            p.snapshot();
        }
        let snaps = p.snapshots();
        assert_eq!(snaps.len(), 5);
        assert!(snaps
            .windows(2)
            .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b)));
        assert_eq!(p.get(Counter::CausalTests), 10);
    }
}
