//! Acceptance suite. Each test prints one `[PASS]` or `[FAIL]` line,
//! written straight to stdout, so they show without `--nocapture`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cognate::catalog::{normalize_text, LoadOptions};
use cognate::centers::{anneal_medoid, CenterConfig, CenterMethod};
use cognate::cognate::{normalized_levenshtein, score_tokens, token_jaccard, trigram_dice, RegressionWeights};
use cognate::grouping::{as_partition, threshold_cluster, MetaCollection, Payload, SimilarityMatrix, StreamClusterer};
use cognate::pipeline::{
    ingest, match_datasets, pairwise_reports, run_pipeline, ReportFormat, ReportWriter, RunConfig, Stage,
};
use cognate::pooling::{record_cycle, traverse, DomainChannel, LinearPointer, SearchCycleLog, VisitGraph};

// pinned tolerances
const AC1_BUDGET: Duration = Duration::from_secs(1);
const AC3_PAIRS: usize = 1000;
const AC3_BUDGET: Duration = Duration::from_secs(5);
const AC4_TRIALS: usize = 200;
const AC5_TRIALS: usize = 100;
const AC5_SIZE: usize = 50;
const AC5_RATIO: f64 = 1.05;
const AC5_REQUIRED: usize = 95;
const AC5_BUDGET: Duration = Duration::from_secs(30);
const AC6_INSTANCES: usize = 100;
const AC6_MAX_N: usize = 50;
const AC9_DATASETS: usize = 18;
const AC9_BUDGET: Duration = Duration::from_secs(60);
const SEED: u64 = 20_240_601;

fn verdict(id: &str, what: &str, pass: bool, detail: impl AsRef<str>) {
    let tag = if pass { "PASS" } else { "FAIL" };
    // bypasses the test harness capture so the line shows in a plain run
    let mut out = std::io::stdout().lock();
    writeln!(out, "[{tag}] {id} {what}: {}", detail.as_ref()).unwrap();
    assert!(pass, "{id} {what} failed: {}", detail.as_ref());
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corpus").join(name)
}

const BUNDLED: [&str; 3] = ["transport", "accidents", "labor"];

#[test]
fn ac1_triple_fidelity() {
    let out = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let outcome = ingest(&[corpus("transport.csv"), corpus("accidents.csv")], &LoadOptions::default());
    let report = match_datasets(&outcome.catalog, "transport", "accidents", &RunConfig::default()).unwrap();
    let mut w = ReportWriter::new(out.path(), ReportFormat::Structured).unwrap();
    w.match_report("", &report).unwrap();
    let elapsed = start.elapsed();

    // schema: an array of {source: str, target: str, percent: int 0..=100}
    let raw: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("triples.json")).unwrap()).unwrap();
    let rows = raw.as_array().expect("array");
    let keys: BTreeSet<&str> = ["source", "target", "percent"].into();
    let mut bad = Vec::new();
    for row in rows {
        let obj = row.as_object().expect("object");
        let ok = obj.keys().map(String::as_str).collect::<BTreeSet<_>>() == keys
            && obj["source"].is_string()
            && obj["target"].is_string()
            && obj["percent"].as_u64().is_some_and(|p| p <= 100);
        if !ok {
            bad.push(row.to_string());
        }
    }
    let expected = 10 * 9;
    let pass = bad.is_empty() && rows.len() == expected && elapsed < AC1_BUDGET;
    verdict(
        "AC1",
        "triple fidelity",
        pass,
        format!(
            "{} triples ({} expected), {} schema violations, {:.1} ms (budget {:?})",
            rows.len(),
            expected,
            bad.len(),
            elapsed.as_secs_f64() * 1e3,
            AC1_BUDGET
        ),
    );
}

#[test]
fn ac2_identity() {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    for stem in BUNDLED {
        // the copy has no sidecar, only the same header and rows
        let copy = dir.path().join(format!("{stem}_copy.csv"));
        fs::copy(corpus(&format!("{stem}.csv")), &copy).unwrap();
        let outcome = ingest(&[corpus(&format!("{stem}.csv")), copy], &LoadOptions::default());
        let copy_id = format!("{stem}_copy");
        let report = match_datasets(&outcome.catalog, stem, &copy_id, &RunConfig::default()).unwrap();
        let m = &report.matrix;
        for (i, row) in m.cells.iter().enumerate() {
            if row[i] != 100 {
                failures.push(format!("{} vs {} = {}", m.row_ids[i], m.col_ids[i], row[i]));
            }
        }
        if !report.evidence.connected {
            failures.push(format!("{stem} not connected"));
        }
    }
    verdict(
        "AC2",
        "identity suite",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} datasets, every diagonal cell 100, all connected", BUNDLED.len())
        } else {
            failures.join("; ")
        },
    );
}

fn random_name(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[char] = &[
        'a', 'b', 'c', 'd', 'e', 'i', 'o', 't', 'r', 's', 'A', 'D', 'T', '_', '_', ' ', '-', '1', '2', '9', 'é', 'ß',
    ];
    let len = rng.gen_range(0..=18);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

#[test]
fn ac3_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let w = RegressionWeights::default();
    let start = Instant::now();
    let mut violations = Vec::new();
    for _ in 0..AC3_PAIRS {
        let (x, y) = (random_name(&mut rng), random_name(&mut rng));
        let (tx, ty) = (normalize_text(&x), normalize_text(&y));
        let (jx, jy) = (tx.join(" "), ty.join(" "));
        let pairs = [
            ("jaccard", token_jaccard(&tx, &ty), token_jaccard(&ty, &tx)),
            ("dice", trigram_dice(&jx, &jy), trigram_dice(&jy, &jx)),
            ("levenshtein", normalized_levenshtein(&jx, &jy), normalized_levenshtein(&jy, &jx)),
        ];
        for (name, xy, yx) in pairs {
            if xy.to_bits() != yx.to_bits() {
                violations.push(format!("{name} asymmetric on {x:?}/{y:?}"));
            }
            if !(0.0..=1.0).contains(&xy) {
                violations.push(format!("{name} = {xy} on {x:?}/{y:?}"));
            }
        }
        let (sxy, syx) = (score_tokens(&tx, &ty, &w), score_tokens(&ty, &tx, &w));
        if sxy != syx {
            violations.push(format!("score asymmetric on {x:?}/{y:?}"));
        }
        if sxy > 100 {
            violations.push(format!("score {sxy} on {x:?}/{y:?}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = violations.is_empty() && elapsed < AC3_BUDGET;
    verdict(
        "AC3",
        "property suite",
        pass,
        format!(
            "{AC3_PAIRS} pairs (seed {SEED}), {} violations{}, {:.1} ms (budget {:?})",
            violations.len(),
            violations.first().map(|v| format!(", first: {v}")).unwrap_or_default(),
            elapsed.as_secs_f64() * 1e3,
            AC3_BUDGET
        ),
    );
}

/// Random symmetric matrix over `n` ids handed out in shuffled order, so the
/// smallest id is not always row 0. `levels` bounds the distinct cell values;
/// few levels means many cost ties.
fn random_collection(rng: &mut ChaCha8Rng, n: usize, levels: u8) -> (MetaCollection, SimilarityMatrix) {
    let mut ids: Vec<String> = (0..n).map(|i| format!("v{i:03}")).collect();
    ids.shuffle(rng);
    let step = 100 / levels.max(1);
    let mut rows = vec![vec![100u8; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(0..=levels) * step;
            rows[i][j] = v.min(100);
            rows[j][i] = rows[i][j];
        }
    }
    let matrix = SimilarityMatrix::from_rows(ids.clone(), rows).unwrap();
    let collection = MetaCollection {
        id: "s/X1".into(),
        member_ids: ids.into_iter().collect(),
        space_id: "s".into(),
    };
    (collection, matrix)
}

/// Brute-force medoid: cost Σ(100 − cell), ties to the smallest id.
fn brute_medoid(c: &MetaCollection, m: &SimilarityMatrix) -> (String, u64) {
    let mut best: Option<(u64, &String)> = None;
    for cand in &c.member_ids {
        let cost: u64 = c
            .member_ids
            .iter()
            .map(|other| 100 - u64::from(m.get(cand, other).unwrap()))
            .sum();
        let better = match best {
            None => true,
            Some((bc, bid)) => cost < bc || (cost == bc && cand < bid),
        };
        if better {
            best = Some((cost, cand));
        }
    }
    let (cost, id) = best.unwrap();
    (id.clone(), cost)
}

#[test]
fn ac4_medoid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let cfg = CenterConfig::default();
    let mut mismatches = Vec::new();
    for trial in 0..AC4_TRIALS {
        let n = rng.gen_range(2..=12);
        let levels = if trial % 2 == 0 { 100 } else { 2 };
        let (c, m) = random_collection(&mut rng, n, levels);
        let got = anneal_medoid(&c, &m, &cfg).unwrap();
        let (want, cost) = brute_medoid(&c, &m);
        if got.node_id != want || got.method != CenterMethod::Exact || (got.cost - cost as f64 / 100.0).abs() > 1e-9 {
            mismatches.push(format!("trial {trial}: got {} want {want}", got.node_id));
        }
    }
    verdict(
        "AC4",
        "medoid oracle equivalence",
        mismatches.is_empty(),
        format!("{AC4_TRIALS} collections of size 2..=12, {} mismatches", mismatches.len()),
    );
}

#[test]
fn ac5_annealing_quality() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let cfg = CenterConfig::default();
    let start = Instant::now();
    let mut within = 0;
    let mut worst: f64 = 1.0;
    for trial in 0..AC5_TRIALS {
        let (c, m) = random_collection(&mut rng, AC5_SIZE, 100);
        let mut trial_cfg = cfg;
        trial_cfg.schedule.seed = cfg.schedule.seed.wrapping_add(trial as u64);
        let got = anneal_medoid(&c, &m, &trial_cfg).unwrap();
        let (_, optimum) = brute_medoid(&c, &m);
        let optimum = optimum as f64 / 100.0;
        let ratio = if optimum == 0.0 { 1.0 } else { got.cost / optimum };
        worst = worst.max(ratio);
        if got.cost <= AC5_RATIO * optimum + 1e-9 {
            within += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = within >= AC5_REQUIRED && elapsed < AC5_BUDGET;
    verdict(
        "AC5",
        "annealing quality",
        pass,
        format!(
            "{within}/{AC5_TRIALS} within {AC5_RATIO}x of optimum (need {AC5_REQUIRED}), worst ratio {worst:.4}, {:.2} s (budget {:?})",
            elapsed.as_secs_f64(),
            AC5_BUDGET
        ),
    );
}

#[test]
fn ac6_clustering_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut failures = Vec::new();
    for trial in 0..AC6_INSTANCES {
        let n = rng.gen_range(1..=AC6_MAX_N);
        let levels = *[100u8, 10, 4].choose(&mut rng).unwrap();
        let (_, m) = random_collection(&mut rng, n, levels);
        let tau: u16 = rng.gen_range(0..=100);
        let delta: u16 = rng.gen_range(0..=30);
        let batch = threshold_cluster(&m, tau, "s");

        for _ in 0..3 {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let mut stream = StreamClusterer::new(tau);
            for i in order {
                stream.insert_from_matrix(&m, i).unwrap();
            }
            if stream.collections("s") != batch {
                failures.push(format!("trial {trial}: stream differs from batch"));
            }
        }

        let mut seen = BTreeSet::new();
        for c in &batch {
            if c.member_ids.is_empty() {
                failures.push(format!("trial {trial}: empty collection"));
            }
            for id in &c.member_ids {
                if !seen.insert(id.clone()) {
                    failures.push(format!("trial {trial}: {id} in two collections"));
                }
            }
        }
        if seen != m.node_ids().iter().cloned().collect() {
            failures.push(format!("trial {trial}: not a cover"));
        }

        let coarse = as_partition(&batch);
        let fine = as_partition(&threshold_cluster(&m, tau + delta, "s"));
        if !fine.iter().all(|f| coarse.iter().any(|c| f.is_subset(c))) {
            failures.push(format!("trial {trial}: tau {} does not refine tau {tau}", tau + delta));
        }
    }
    verdict(
        "AC6",
        "clustering laws",
        failures.is_empty(),
        format!(
            "{AC6_INSTANCES} instances (n <= {AC6_MAX_N}), 3 permutations each, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    );
}

#[test]
fn ac7_graph_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut log = SearchCycleLog::new();
    let mut graph = VisitGraph::default();
    let mut failures = Vec::new();
    let mut visit_counts = Vec::new();

    let k = 40;
    for cycle in 0..k {
        let len = rng.gen_range(0..=6);
        let channel = DomainChannel {
            domain_label: format!("d{}", cycle % 3),
            center_ids: (0..len).map(|i| format!("d{}/c{i}", cycle % 3)).collect(),
        };
        let pointer = LinearPointer {
            id: format!("p{cycle}"),
            profile: Payload::from_tokens(vec!["x".into()]),
            bind_threshold: 50,
        };
        let visits = traverse(&pointer, &channel, |_, _| rng.gen_range(0..=100));
        visit_counts.push(visits.len());

        let snapshot = serde_json::to_string(&log).unwrap();
        let before = log.entries().to_vec();
        let no = record_cycle(&mut log, &mut graph, "src", &channel.domain_label, visits);
        if no != cycle as u64 + 1 {
            failures.push(format!("cycle number {no} at position {cycle}"));
        }
        if log.entries()[..before.len()] != before[..] {
            failures.push(format!("earlier entries changed at cycle {no}"));
        }
        // the serialized prefix is unchanged as well
        let now = serde_json::to_string(&log).unwrap();
        if !now.starts_with(snapshot.trim_end_matches("]}")) {
            failures.push(format!("snapshot prefix changed at cycle {no}"));
        }
        let expected: usize = visit_counts.iter().map(|v| v.saturating_sub(1)).sum();
        if graph.edges.len() != expected {
            failures.push(format!("after {} cycles: {} edges, expected {expected}", cycle + 1, graph.edges.len()));
        }
    }
    if log.len() != k {
        failures.push(format!("log length {} after {k} cycles", log.len()));
    }

    // the same law on a real pipeline run
    let outcome = ingest(
        &BUNDLED.map(|s| corpus(&format!("{s}.csv"))),
        &LoadOptions::default(),
    );
    let report = run_pipeline(&outcome.catalog, &RunConfig::default(), Stage::Pool).unwrap();
    let expected: usize = report
        .log
        .entries()
        .iter()
        .map(|e| e.visit_records.len().saturating_sub(1))
        .sum();
    if report.graph.edges.len() != expected {
        failures.push(format!("pipeline: {} edges, expected {expected}", report.graph.edges.len()));
    }

    verdict(
        "AC7",
        "graph law",
        failures.is_empty(),
        format!(
            "{k} synthetic cycles plus {} pipeline cycles, {} failures{}",
            report.log.len(),
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    );
}

fn snapshot_dir(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn ac8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut files = 0;
    for format in [ReportFormat::Structured, ReportFormat::Csv, ReportFormat::Dot] {
        let mut snapshots = Vec::new();
        for run in 0..2 {
            let cfg = RunConfig {
                inputs: BUNDLED.map(|s| corpus(&format!("{s}.csv"))).to_vec(),
                seed: 7,
                // force the annealed path on the larger collections
                exact_threshold: 2,
                format,
                out: dir.path().join(format!("{format:?}-{run}")),
                ..RunConfig::default()
            };
            let outcome = ingest(&cfg.inputs, &cfg.load_options());
            let report = run_pipeline(&outcome.catalog, &cfg, Stage::Full).unwrap();
            let mut w = ReportWriter::new(&cfg.out, cfg.format).unwrap();
            w.pipeline(&report).unwrap();
            w.finish();
            snapshots.push(snapshot_dir(&cfg.out));
        }
        files += snapshots[0].len();
        if snapshots[0].is_empty() {
            failures.push(format!("{format:?}: no files written"));
        }
        if snapshots[0].keys().ne(snapshots[1].keys()) {
            failures.push(format!("{format:?}: file sets differ"));
        }
        for (path, bytes) in &snapshots[0] {
            if snapshots[1].get(path) != Some(bytes) {
                failures.push(format!("{format:?}: {} differs", path.display()));
            }
        }
    }
    verdict(
        "AC8",
        "determinism",
        failures.is_empty(),
        format!("{files} report files across 3 formats compared byte for byte, {} differences", failures.len()),
    );
}

/// Writes `count` CSVs drawn from a shared vocabulary of road-transport
/// column names, each with 8 to 12 columns and 30 rows.
fn synthetic_pool(dir: &Path, count: usize) -> Vec<PathBuf> {
    const VOCAB: &[&str] = &[
        "Date", "Accident_Date", "Survey_Date", "Vehicle_Type", "Vehicle_Class", "Route", "Route_Code", "Km",
        "Distance_Km", "Speed_Limit", "Avg_Speed", "Road_Type", "Road_Class", "Region", "Local_Authority",
        "Journey_Time", "Passengers", "Fuel_Type", "Casualties", "Severity", "Weather", "Light_Conditions",
        "Traffic_Count", "Hour", "Day_Of_Week", "Junction", "Lane_Count", "Toll", "Operator", "Fare",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    (0..count)
        .map(|i| {
            let ncols = rng.gen_range(8..=12);
            let cols: Vec<&str> = VOCAB.choose_multiple(&mut rng, ncols).copied().collect();
            let mut text = cols.join(",");
            text.push('\n');
            for _ in 0..30 {
                let row: Vec<String> = cols.iter().map(|_| rng.gen_range(0..1000).to_string()).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            let path = dir.join(format!("transport_{:02}.csv", i + 1));
            fs::write(&path, text).unwrap();
            path
        })
        .collect()
}

#[test]
fn ac9_pool_scale_substitute() {
    let dir = tempfile::tempdir().unwrap();
    let paths = synthetic_pool(dir.path(), AC9_DATASETS);
    let out = dir.path().join("out");
    let start = Instant::now();
    let outcome = ingest(&paths, &LoadOptions::default());
    let pairs = pairwise_reports(&outcome.catalog, &RunConfig::default()).unwrap();
    let mut w = ReportWriter::new(&out, ReportFormat::Structured).unwrap();
    w.pairwise(&pairs).unwrap();
    let written = w.finish();
    let elapsed = start.elapsed();

    let expected_pairs = AC9_DATASETS * (AC9_DATASETS - 1) / 2;
    let matrices = written
        .iter()
        .filter(|p| p.to_string_lossy().ends_with(".matrix.csv"))
        .count();
    let evidence: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(out.join("evidence.json")).unwrap()).unwrap();
    let pass = outcome.is_complete()
        && pairs.len() == expected_pairs
        && evidence.len() == expected_pairs
        && matrices == expected_pairs
        && elapsed < AC9_BUDGET;
    writeln!(
        std::io::stdout().lock(),
        "[NOTE] AC9 the original 18-dataset transport pool and its per-pair percentages are not \
         available, so that experiment is NOT reproduced; 18 generated CSVs stand in for it"
    )
    .unwrap();
    verdict(
        "AC9",
        "pool-scale substitute",
        pass,
        format!(
            "{} datasets, {} evidence rows and {} matrices ({} pairs expected), {:.2} s (budget {:?})",
            outcome.catalog.len(),
            evidence.len(),
            matrices,
            expected_pairs,
            elapsed.as_secs_f64(),
            AC9_BUDGET
        ),
    );
}
