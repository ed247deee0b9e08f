//! Growth of the operation counters over families of runs.
//!
//! Each family varies one size parameter; the fitted log-log slope of the
//! measured cost is compared against the order of the worst-case bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::multiset::Multiset;
use crate::observer::{GridRecognizer, Recognizer, TokenRecognizer};
use crate::probe::{Counter, Probe, ProbeReport};
use crate::relations::RelationBuilder;
use crate::substrates::{
    find_loops, render_string_world, simulate_langton, Event, GenealogyScript, LangtonParams,
};

/// Slope allowed for per-state recognition and relation cost against lattice size.
pub const LATTICE_SLOPE_LIMIT: f64 = 1.2;
/// Slope allowed for closure work against run length.
pub const CLOSURE_SLOPE_LIMIT: f64 = 4.2;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    /// The varied parameter: lattice cells or run length.
    pub size: u64,
    pub states: usize,
    pub entities: usize,
    pub totals: ProbeReport,
    /// The measured quantity the slope is fitted to.
    pub cost: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyReport {
    pub family: String,
    pub measure: String,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of ln(cost) on ln(size); none below two rows.
    pub slope: Option<f64>,
    pub limit: f64,
    pub exceeds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub families: Vec<FamilyReport>,
}

/// Least-squares slope through `(ln x, ln y)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn family(name: &str, measure: &str, mut rows: Vec<BenchRow>, limit: f64) -> FamilyReport {
    rows.sort_by_key(|r| r.size);
    let slope = log_log_slope(
        &rows
            .iter()
            .map(|r| (r.size as f64, r.cost))
            .collect::<Vec<_>>(),
    );
    FamilyReport {
        family: name.into(),
        measure: measure.into(),
        rows,
        slope,
        limit,
        exceeds: slope.is_some_and(|s| s > limit),
    }
}

fn build<R: Recognizer>(
    rec: &R,
    probe: &Probe,
    states: Vec<Vec<Multiset<crate::trace::Atom>>>,
) -> usize {
    let mut b = RelationBuilder::new("bench", rec, rec.default_bounds(), probe)
        .expect("default bounds fit");
    for s in states {
        b.push_structures(s);
    }
    b.finish().entities.len()
}

/// One Langton run per side length on a `side × side` lattice, seed centred.
/// Cost is the mean per-state total of every counter.
pub fn langton_family(sides: &[usize], steps: usize) -> FamilyReport {
    let rows = sides
        .par_iter()
        .map(|&side| {
            let params = LangtonParams {
                width: side,
                height: side,
                steps,
                origin: (side as i64 / 2 - 12, side as i64 / 2 - 5),
            };
            let lattices = simulate_langton(&params).expect("seed fits the lattice");
            let probe = Probe::enabled();
            let structures = lattices
                .iter()
                .map(|l| {
                    find_loops(l, &probe)
                        .iter()
                        .map(|lp| lp.structure())
                        .collect()
                })
                .collect();
            let entities = build(&GridRecognizer::default(), &probe, structures);
            let total: u64 = probe.totals().iter().sum();
            BenchRow {
                size: (side * side) as u64,
                states: lattices.len(),
                entities,
                totals: probe.report(),
                cost: total as f64 / lattices.len() as f64,
            }
        })
        .collect();
    family("langton", "operations per state", rows, LATTICE_SLOPE_LIMIT)
}

/// A founder that keeps replacing itself with an exact copy: two
/// individuals alive at most, `r` states.
pub fn chain_script(r: usize) -> GenealogyScript {
    let mut events = vec![Event::Spawn {
        t: 0,
        tag: "g0".into(),
        genes: vec![1, 2],
    }];
    let mut k = 0;
    let mut t = 1;
    while t + 1 < r {
        events.push(Event::Reproduce {
            t,
            parent: format!("g{k}"),
            child: format!("g{}", k + 1),
            epigenetic_steps: 0,
            mutation_vector: vec![0, 0],
        });
        events.push(Event::Die {
            t: t + 1,
            tag: format!("g{k}"),
        });
        k += 1;
        t += 2;
    }
    GenealogyScript {
        genes: 2,
        states: r,
        events,
    }
}

/// One string-world chain per run length. Cost is total closure work.
pub fn string_world_family(lengths: &[usize]) -> FamilyReport {
    let rows = lengths
        .par_iter()
        .map(|&r| {
            let (run, _) =
                render_string_world("bench", &chain_script(r)).expect("chain script is valid");
            let rec = TokenRecognizer::new(2);
            let probe = Probe::enabled();
            let structures = run
                .states
                .iter()
                .map(|s| rec.extract(s, &probe).expect("token extraction is total"))
                .collect();
            let entities = build(&rec, &probe, structures);
            BenchRow {
                size: r as u64,
                states: run.len(),
                entities,
                totals: probe.report(),
                cost: probe.get(Counter::ClosureRelaxations) as f64,
            }
        })
        .collect();
    family(
        "string-world",
        "closure relaxations",
        rows,
        CLOSURE_SLOPE_LIMIT,
    )
}

pub fn run_bench(sides: &[usize], steps: usize, lengths: &[usize]) -> BenchReport {
    let mut families = Vec::new();
    if !sides.is_empty() {
        families.push(langton_family(sides, steps));
    }
    if !lengths.is_empty() {
        families.push(string_world_family(lengths));
    }
    BenchReport { families }
}

pub fn render_text(report: &BenchReport) -> String {
    let mut out = String::new();
    for f in &report.families {
        out.push_str(&format!("{} ({})\n", f.family, f.measure));
        out.push_str(&format!(
            "{:>8} {:>7} {:>9} {:>16}\n",
            "size", "states", "entities", "cost"
        ));
        for r in &f.rows {
            out.push_str(&format!(
                "{:>8} {:>7} {:>9} {:>16.1}\n",
                r.size, r.states, r.entities, r.cost
            ));
        }
        match f.slope {
            Some(s) => out.push_str(&format!(
                "slope {s:.3} (limit {}){}\n\n",
                f.limit,
                if f.exceeds { "  EXCEEDS" } else { "" }
            )),
            None => out.push_str("slope undefined\n\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_laws() {
        let cube: Vec<(f64, f64)> = (1..6)
            .map(|x| (x as f64, 3.0 * (x as f64).powi(3)))
            .collect();
        assert!((log_log_slope(&cube).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&[(2.0, 5.0)]), None);
        assert_eq!(log_log_slope(&[(2.0, 5.0), (2.0, 7.0)]), None);
    }

    #[test]
    fn empty_family_gives_empty_table() {
        let r = run_bench(&[], 10, &[]);
        assert!(r.families.is_empty());
        assert_eq!(render_text(&r), "");
        let f = string_world_family(&[]);
        assert!(f.rows.is_empty() && f.slope.is_none() && !f.exceeds);
    }

    #[test]
    fn chain_keeps_population_small() {
        let (run, truth) = render_string_world("c", &chain_script(10)).unwrap();
        assert_eq!(run.len(), 10);
        assert!(run.states.iter().all(|s| s.size() > 0));
        assert_eq!(truth.parent_delta_min.len(), 4);
    }

    #[test]
    fn small_langton_family() {
        let f = langton_family(&[32, 48], 20);
        assert_eq!(f.rows.len(), 2);
        assert!(f.rows.iter().all(|r| r.states == 21 && r.entities >= 21));
        assert!(f.slope.unwrap() > 0.5);
    }
}
