//! The per-run axiom report.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::ObserverConfig;
use crate::evolution::{
    check_heredity, check_preservation, check_reproduction, fecundity_auto,
    natural_selection_verdict, Generation, SelectionStats, Thresholds,
};
use crate::observer::Recognizer;
use crate::relations::Observation;
use crate::verdict::Verdict;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictReport {
    pub run: String,
    pub recognizer: String,
    pub states: usize,
    pub entities: usize,
    pub omega: [usize; 2],
    pub thresholds: Thresholds,
    /// Reproduction, fecundity, heredity, preservation, the four selection
    /// axioms and natural selection, in that order.
    pub verdicts: Vec<Verdict>,
    pub generations: Vec<Generation>,
    pub selection: SelectionStats,
}

impl VerdictReport {
    pub fn verdict(&self, axiom: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.axiom == axiom)
    }
}

fn from_error(axiom: &str, e: impl ToString) -> Verdict {
    Verdict::new(axiom, false).note(e.to_string())
}

pub fn evaluate<R: Recognizer>(
    run_id: &str,
    obs: &Observation<'_, R>,
    config: &ObserverConfig,
) -> VerdictReport {
    let omega = config.omega_range(obs.states.len());
    let t = &config.thresholds;
    let mut verdicts = vec![check_reproduction(obs)];
    let mut generations = Vec::new();
    match fecundity_auto(obs, config.cycles.as_deref(), t) {
        Ok((g, v)) => {
            generations = g;
            verdicts.push(v);
        }
        Err(e) => verdicts.push(from_error("fecundity", e)),
    }
    verdicts.push(
        check_heredity(obs, omega.clone(), t.epsilon).unwrap_or_else(|e| from_error("heredity", e)),
    );
    verdicts.push(check_preservation(obs, omega.clone()));
    let (selection, parts, overall) = natural_selection_verdict(obs, omega.clone(), t);
    verdicts.extend(parts);
    verdicts.push(overall);
    VerdictReport {
        run: run_id.to_string(),
        recognizer: obs.rec.name().to_string(),
        states: obs.states.len(),
        entities: obs.entities.len(),
        omega: [omega.start, omega.end.saturating_sub(1)],
        thresholds: t.clone(),
        verdicts,
        generations,
        selection,
    }
}

fn summary(v: &Verdict) -> String {
    let keys: &[&str] = match v.axiom.as_str() {
        "reproduction" => &["parentDeltaMinPairs", "witness"],
        "fecundity" => &["generationLength", "sizes", "failedAt"],
        "heredity" => &["best", "ratios"],
        "preservation" => &["statesJudged", "failingStates"],
        "evolutionaryTimeScale" => &["states", "population"],
        "sorting" => &["sigmaSqRor", "characterVariation"],
        "heritableVariation" => &["varChMut", "ratio"],
        "correlation" => &["positive"],
        "naturalSelection" => &["failedAt"],
        _ => &[],
    };
    keys.iter()
        .filter_map(|k| v.evidence.get(*k).map(|val| format!("{k}={val}")))
        .chain(v.notes.iter().map(|n| format!("({n})")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Plain-text rendering: one row per axiom, then per-dimension statistics.
pub fn render_text(r: &VerdictReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "run {}  recognizer {}  states {}  entities {}  omega [{}, {}]",
        r.run, r.recognizer, r.states, r.entities, r.omega[0], r.omega[1]
    );
    let width = r.verdicts.iter().map(|v| v.axiom.len()).max().unwrap_or(0);
    for v in &r.verdicts {
        let _ = writeln!(
            out,
            "{:width$}  {}  {}",
            v.axiom,
            if v.passed { "PASS" } else { "FAIL" },
            summary(v)
        );
    }
    let s = &r.selection;
    if !s.char_stats.is_empty() {
        let _ = writeln!(
            out,
            "\n{:10} {:>12} {:>14} {:>14} {:>10}",
            "dimension", "mu", "sigma^2", "sigma^2/n", "r"
        );
        for (name, d) in &s.char_stats {
            let r = match s.pearson.get(name) {
                Some(Some(r)) => format!("{r:.4}"),
                Some(None) => "undefined".into(),
                None => "-".into(),
            };
            let _ = writeln!(
                out,
                "{:10} {:>12.4} {:>14.4} {:>14.4} {:>10}",
                name, d.mu, d.sigma_sq, d.sigma_sq_normalized, r
            );
        }
    }
    if let Some(d) = &s.ror_stats {
        let _ = writeln!(
            out,
            "{:10} {:>12.4} {:>14.4} {:>14.4}",
            "ror", d.mu, d.sigma_sq, d.sigma_sq_normalized
        );
    }
    out
}
