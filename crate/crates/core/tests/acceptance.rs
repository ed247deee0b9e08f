//! Acceptance criteria, one PASS/FAIL line each.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evobserve::bench::{run_bench, CLOSURE_SLOPE_LIMIT, LATTICE_SLOPE_LIMIT};
use evobserve::evolution::clique::{max_clique, Graph};
use evobserve::evolution::stats::{mean_and_sigma_sq, pearson, Streaming};
use evobserve::evolution::{
    check_reproduction, fecundity_auto, natural_selection_verdict, Thresholds,
};
use evobserve::multiset::Multiset;
use evobserve::observer::{GridRecognizer, Recognizer, TokenRecognizer};
use evobserve::probe::Probe;
use evobserve::relations::{observe, transitive_closure, Edge};
use evobserve::substrates::{
    langton_run, neutral_script, random_script, render_string_world, selection_script,
    FamilyLimits, LangtonParams, SCENARIO_GENES,
};
use evobserve::trace::Run;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, format!("took {t:.1?}, limit {limit:?}"))
}

fn random_multiset(rng: &mut ChaCha8Rng) -> Multiset<u8> {
    let mut m = Multiset::new();
    for _ in 0..rng.gen_range(0..5) {
        m.insert(rng.gen_range(0..6), rng.gen_range(1..4));
    }
    m
}

fn multiset_laws() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    const CASES: usize = 1000;
    for case in 0..CASES {
        let (a, b, c) = (
            random_multiset(&mut rng),
            random_multiset(&mut rng),
            random_multiset(&mut rng),
        );
        let e = Multiset::new();
        check(
            a.join(&b) == b.join(&a),
            format!("case {case}: join not commutative"),
        )?;
        check(
            a.join(&b).join(&c) == a.join(&b.join(&c)),
            format!("case {case}: join not associative"),
        )?;
        check(
            a.join(&e) == a,
            format!("case {case}: empty is not an identity"),
        )?;
        check(
            a.join(&b).size() == a.size() + b.size(),
            format!("case {case}: size not additive"),
        )?;
        // reflexive, antisymmetric and transitive on a ⊆ a⊎b ⊆ a⊎b⊎c
        let ab = a.join(&b);
        let abc = ab.join(&c);
        check(
            a.is_subset(&a),
            format!("case {case}: subset not reflexive"),
        )?;
        check(
            a.is_subset(&ab) && ab.is_subset(&abc) && a.is_subset(&abc),
            format!("case {case}: subset not transitive"),
        )?;
        check(
            !(a.is_subset(&b) && b.is_subset(&a)) || a == b,
            format!("case {case}: subset not antisymmetric"),
        )?;
        check(
            !ab.is_subset(&a) || b.is_empty(),
            format!("case {case}: subset antisymmetry on a join"),
        )?;
        let expected: u128 = a.iter().map(|(_, m)| m as u128 + 1).product();
        let enumerated = a
            .power_multiset(1 << 16)
            .map_err(|e| e.to_string())?
            .count() as u128;
        check(
            a.power_count() == expected && enumerated == expected,
            format!("case {case}: power multiset has {enumerated}, expected {expected}"),
        )?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{CASES} cases per law in {:.1?}", start.elapsed()))
}

fn genealogy_oracle() -> Outcome {
    let start = Instant::now();
    let limits = FamilyLimits::default();
    let rec = TokenRecognizer::new(limits.genes);
    const SCRIPTS: u64 = 500;
    for seed in 0..SCRIPTS {
        let (run, truth) =
            render_string_world("sw", &random_script(seed, &limits)).map_err(|e| e.to_string())?;
        let probe = Probe::disabled();
        let obs = observe(&run, &rec, rec.default_bounds(), &probe).map_err(|e| e.to_string())?;
        let r = &obs.relations;
        check(
            obs.tag_pairs(&r.parent_delta_min) == truth.parent_delta_min,
            format!("seed {seed}: parentDeltaMin differs"),
        )?;
        check(
            obs.tag_pairs(&r.recognition) == truth.recognition,
            format!("seed {seed}: recognition differs"),
        )?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{SCRIPTS} scripts, zero mismatches in {:.1?}",
        start.elapsed()
    ))
}

fn warshall(n: usize, edges: &[Edge]) -> Vec<Edge> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a as usize][b as usize] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                m[i][j] |= m[i][k] && m[k][j];
            }
        }
    }
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &r) in row.iter().enumerate() {
            if r {
                out.push((i as u32, j as u32));
            }
        }
    }
    out
}

fn closure_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    const GRAPHS: usize = 200;
    for g in 0..GRAPHS {
        let n = rng.gen_range(1..=12usize);
        let p = rng.gen_range(0.05..0.4);
        let edges: Vec<Edge> = (0..n as u32)
            .flat_map(|a| (0..n as u32).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        let mut got = transitive_closure(&edges);
        got.sort_unstable();
        got.dedup();
        check(
            got == warshall(n, &edges),
            format!("graph {g}: closure differs"),
        )?;
    }
    Ok(format!("{GRAPHS} digraphs match the matrix oracle"))
}

fn langton() -> Outcome {
    let start = Instant::now();
    let rec = GridRecognizer::default();
    let params = LangtonParams {
        steps: 1000,
        ..LangtonParams::default()
    };
    let run = langton_run("langton", &params).map_err(|e| e.to_string())?;
    let probe = Probe::disabled();
    let obs = observe(&run, &rec, rec.default_bounds(), &probe).map_err(|e| e.to_string())?;
    let r = &obs.relations;
    let first_causal = r
        .causal
        .iter()
        .map(|&(p, c)| (obs.state_of(p), obs.state_of(c)))
        .min();
    check(
        first_causal == Some((127, 128)),
        format!("first causal edge {first_causal:?}, expected 127 -> 128"),
    )?;
    let first_delta = r.delta.iter().map(|&(_, c)| obs.state_of(c)).min();
    check(
        first_delta == Some(151),
        format!("first delta link at {first_delta:?}, expected 151"),
    )?;

    let prefix = Run::new("langton", run.states[..152].to_vec());
    let early = observe(&prefix, &rec, rec.default_bounds(), &probe).map_err(|e| e.to_string())?;
    check(
        check_reproduction(&early).passed,
        "reproduction not detected by step 151",
    )?;
    let before = Run::new("langton", run.states[..151].to_vec());
    let earlier =
        observe(&before, &rec, rec.default_bounds(), &probe).map_err(|e| e.to_string())?;
    check(
        !check_reproduction(&earlier).passed,
        "reproduction detected before step 151",
    )?;

    let (gens, v) =
        fecundity_auto(&obs, None, &Thresholds::default()).map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = gens
        .iter()
        .filter(|g| g.observable)
        .map(|g| g.members.len())
        .collect();
    check(
        sizes.len() >= 4,
        format!("only {} judged generations", sizes.len()),
    )?;
    check(
        sizes.windows(2).all(|w| w[0] <= w[1]),
        format!("generation sizes {sizes:?} decrease"),
    )?;
    check(
        v.passed,
        format!(
            "fecundity failed: {}",
            serde_json::to_string(&v).unwrap_or_default()
        ),
    )?;
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "split 127 -> 128, delta at 151, generation sizes {sizes:?}, {:.1?}",
        start.elapsed()
    ))
}

fn selection() -> Outcome {
    let rec = TokenRecognizer::new(SCENARIO_GENES);
    let t = Thresholds::default();
    let verdict = |script| -> Result<(bool, Vec<String>, String), String> {
        let (run, _) = render_string_world("sel", &script).map_err(|e| e.to_string())?;
        let probe = Probe::disabled();
        let obs = observe(&run, &rec, rec.default_bounds(), &probe).map_err(|e| e.to_string())?;
        let (stats, _, v) = natural_selection_verdict(&obs, 0..obs.states.len(), &t);
        let failed = v.evidence["failedAt"]
            .as_array()
            .map(|a| {
                a.iter()
                    .filter_map(|x| x.as_str().map(String::from))
                    .collect()
            })
            .unwrap_or_default();
        let json = serde_json::to_string(&(&stats, &v)).map_err(|e| e.to_string())?;
        Ok((v.passed, failed, json))
    };
    let sel = verdict(selection_script())?;
    let neu = verdict(neutral_script())?;
    check(sel.0, format!("selection scenario failed at {:?}", sel.1))?;
    check(
        !neu.0 && neu.1 == ["correlation"],
        format!("neutral scenario failed at {:?}", neu.1),
    )?;
    check(
        verdict(selection_script())?.2 == sel.2 && verdict(neutral_script())?.2 == neu.2,
        "verdicts differ between runs",
    )?;
    Ok("selection passes, neutral fails at correlation only, both reproducible".into())
}

fn brute_clique(g: &Graph) -> usize {
    let n = g.len();
    (0u32..1 << n)
        .filter(|mask| {
            let vs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            g.is_clique(&vs)
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn statistics() -> Outcome {
    let (_, s2) = mean_and_sigma_sq(&[1.0, 2.0, 3.0]).ok_or("no variance")?;
    check(s2 == 2.0, format!("sigma^2 of [1,2,3] is {s2}"))?;
    let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.37 - 5.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 2.0).collect();
    let r = pearson(&xs, &ys).ok_or("r undefined on linear data")?;
    check((r - 1.0).abs() <= 1e-12, format!("r = {r}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-1e3..1e3)).collect();
    let batch = pts.iter().sum::<f64>() / pts.len() as f64;
    let stream = Streaming::of(&pts).mean;
    check(
        (stream - batch).abs() <= 1e-9,
        format!("streaming mean {stream} vs {batch}"),
    )?;
    const GRAPHS: usize = 300;
    for k in 0..GRAPHS {
        let n = rng.gen_range(0..=15usize);
        let p = rng.gen_range(0.1..0.9);
        let mut g = Graph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(a, b);
                }
            }
        }
        let (c, _) = max_clique(&g);
        let best = brute_clique(&g);
        check(
            g.is_clique(&c) && c.len() == best,
            format!("graph {k}: clique of {} vs {best}", c.len()),
        )?;
    }
    Ok(format!(
        "sigma^2 = 2, r = {r}, streaming mean ok, {GRAPHS} cliques exact"
    ))
}

fn complexity() -> Outcome {
    let start = Instant::now();
    let report = run_bench(&[32, 64, 128], 100, &[10, 20, 40]);
    let slope = |name: &str| {
        report
            .families
            .iter()
            .find(|f| f.family == name)
            .and_then(|f| f.slope)
            .ok_or(format!("no slope for {name}"))
    };
    let (lat, sw) = (slope("langton")?, slope("string-world")?);
    check(
        lat <= LATTICE_SLOPE_LIMIT,
        format!("lattice slope {lat:.3}"),
    )?;
    check(sw <= CLOSURE_SLOPE_LIMIT, format!("closure slope {sw:.3}"))?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("lattice slope {lat:.3}, closure slope {sw:.3}"))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_evobserve"))
        .args(args)
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    check(status.success(), format!("{args:?} exited with {status}"))
}

fn probe_transparency() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    std::fs::write(dir.path().join("token.toml"), "recognizer = \"token\"\n")
        .map_err(|e| e.to_string())?;
    let mut traces = Vec::new();
    for seed in 0..14 {
        let t = path(&format!("sw{seed}.jsonl"));
        cli(&[
            "simulate",
            "--substrate",
            "string-world",
            "--seed",
            &seed.to_string(),
            "--out",
            &t,
        ])?;
        traces.push((t, Some(path("token.toml"))));
    }
    for steps in [0, 20, 60, 127, 140, 160] {
        let t = path(&format!("langton{steps}.jsonl"));
        cli(&[
            "simulate",
            "--substrate",
            "langton",
            "--steps",
            &steps.to_string(),
            "--out",
            &t,
        ])?;
        traces.push((t, None));
    }
    for (i, (trace, config)) in traces.iter().enumerate() {
        let (plain, probed) = (
            path(&format!("plain{i}.json")),
            path(&format!("probed{i}.json")),
        );
        let mut base = vec!["observe", trace.as_str(), "--dump-relations"];
        if let Some(c) = config {
            base.extend(["--config", c.as_str()]);
        }
        cli(&[base.as_slice(), &["--out", &plain]].concat())?;
        cli(&[base.as_slice(), &["--out", &probed, "--probe"]].concat())?;
        let (a, b) = (std::fs::read(&plain), std::fs::read(&probed));
        check(
            a.is_ok() && a.ok() == b.ok(),
            format!("{}: dumps differ", Path::new(trace).display()),
        )?;
    }
    Ok(format!("{} traces byte-identical", traces.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 multiset algebra laws", multiset_laws),
        (
            "2 relation construction vs generator ground truth",
            genealogy_oracle,
        ),
        ("3 transitive closure vs matrix oracle", closure_oracle),
        ("4 Langton reproduction and fecundity", langton),
        ("5 natural selection discrimination", selection),
        ("6 statistics and maximum clique", statistics),
        ("7 complexity bound consistency", complexity),
        ("8 probe transparency", probe_transparency),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
