use evobserve::multiset::Multiset;
use evobserve::observer::{Recognizer, TokenRecognizer};
use evobserve::probe::Probe;
use evobserve::relations::{build_batch, observe};
use evobserve::substrates::{random_script, render_string_world, FamilyLimits};
use evobserve::trace::Atom;

#[test]
fn observer_recovers_random_genealogies() {
    let limits = FamilyLimits::default();
    let rec = TokenRecognizer::new(limits.genes);
    for seed in 0..300 {
        let script = random_script(seed, &limits);
        let (run, truth) = render_string_world("sw", &script).unwrap();
        let probe = Probe::disabled();
        let obs = observe(&run, &rec, rec.default_bounds(), &probe).unwrap();
        let r = &obs.relations;
        assert_eq!(
            obs.tag_pairs(&r.recognition),
            truth.recognition,
            "seed {seed}: recognition"
        );
        assert_eq!(
            obs.tag_pairs(&r.causal),
            truth.causal,
            "seed {seed}: causal"
        );
        assert_eq!(
            obs.tag_pairs(&r.ancestor_of),
            truth.ancestor_of,
            "seed {seed}: ancestorOf"
        );
        assert_eq!(
            obs.tag_pairs(&r.parent_delta_min),
            truth.parent_delta_min,
            "seed {seed}: parentDeltaMin"
        );
    }
}

#[test]
fn incremental_construction_equals_batch() {
    let limits = FamilyLimits::default();
    let rec = TokenRecognizer::new(limits.genes);
    for seed in 1000..1100 {
        let (run, _) = render_string_world("sw", &random_script(seed, &limits)).unwrap();
        let probe = Probe::disabled();
        let obs = observe(&run, &rec, rec.default_bounds(), &probe).unwrap();
        let structures: Vec<Vec<Multiset<Atom>>> = obs
            .entity_sets()
            .into_iter()
            .map(|s| s.into_iter().map(|e| (*e.structure).clone()).collect())
            .collect();
        assert_eq!(
            build_batch(&rec, &rec.default_bounds(), &structures),
            obs.relations,
            "seed {seed}"
        );
    }
}
