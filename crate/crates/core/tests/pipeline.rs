use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fandom_emotions::clustering::{DistanceMatrix, Partition};
use fandom_emotions::model::{BurstinessReport, Emotion};
use fandom_emotions::pipeline::{
    cmd_burstiness, cmd_cluster, cmd_ingest, cmd_regress, cmd_report, cmd_simulate, tree_digests,
    ClusterMethod, Manifest, PipelineConfig, RegressionDocument, SimulationSpec,
};
use fandom_emotions::simulate::ProcessKind;
use fandom_emotions::synthetic::{generate, write_metadata_csv, write_posts_csv, SyntheticSpec};
use fandom_emotions::temporal::{read_reports_csv, write_reports_csv};
use fandom_emotions::Error;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/synthetic")
        .join(name)
}

fn posts_subset(dir: &Path, teams: &[&str]) -> PathBuf {
    let text = fs::read_to_string(fixture("posts.csv")).unwrap();
    let mut lines = text.lines();
    let mut out = format!("{}\n", lines.next().unwrap());
    for l in lines {
        if teams.iter().any(|t| l.starts_with(&format!("{t},"))) {
            out.push_str(l);
            out.push('\n');
        }
    }
    let path = dir.join("posts.csv");
    fs::write(&path, out).unwrap();
    path
}

fn ingest(posts: PathBuf, out: PathBuf) -> PathBuf {
    cmd_ingest(&PipelineConfig {
        posts: Some(posts),
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    out
}

#[test]
fn committed_fixture_matches_generator() {
    let data = generate(&SyntheticSpec::default());
    let mut posts = Vec::new();
    write_posts_csv(&data.posts, &mut posts).unwrap();
    let mut meta = Vec::new();
    write_metadata_csv(&data.teams, &mut meta).unwrap();
    assert_eq!(fs::read(fixture("posts.csv")).unwrap(), posts);
    assert_eq!(fs::read(fixture("metadata.csv")).unwrap(), meta);
}

#[test]
fn ingest_writes_expected_file_set() {
    let tmp = TempDir::new().unwrap();
    let out = ingest(fixture("posts.csv"), tmp.path().join("ingest"));
    let files: Vec<String> = tree_digests(&out).unwrap().into_keys().collect();
    let mut expected = vec!["ingest_stats.csv".to_string(), "manifest.json".to_string()];
    expected.extend((1..=12).map(|i| format!("series/t{i:02}.json")));
    expected.sort();
    assert_eq!(files, expected);

    let manifest: Manifest =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "ingest");
    assert_eq!(manifest.files.len(), 13);
    assert_eq!(manifest.config_hash.len(), 64);
}

#[test]
fn missing_input_names_path() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.csv");
    let err = cmd_ingest(&PipelineConfig {
        posts: Some(missing.clone()),
        out_dir: tmp.path().join("out"),
        ..PipelineConfig::default()
    })
    .unwrap_err();
    assert!(matches!(&err, Error::MissingPath(p) if *p == missing));
    assert!(err.to_string().contains("nope.csv"));
}

#[test]
fn parse_errors_carry_file_and_row() {
    let tmp = TempDir::new().unwrap();
    let posts = tmp.path().join("bad.csv");
    fs::write(
        &posts,
        "team_id,timestamp,n_comments,joy,anger,sadness,fear\na,2022-01-01T00:00:00Z,3,0.5,0.5,0.5,0.5\n",
    )
    .unwrap();
    let err = cmd_ingest(&PipelineConfig {
        posts: Some(posts),
        out_dir: tmp.path().join("out"),
        ..PipelineConfig::default()
    })
    .unwrap_err()
    .to_string();
    assert!(err.contains("bad.csv") && err.contains("row 1"), "{err}");
}

#[test]
fn ingest_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let a = ingest(fixture("posts.csv"), tmp.path().join("a"));
    let b = ingest(fixture("posts.csv"), tmp.path().join("b"));
    assert_eq!(tree_digests(&a).unwrap(), tree_digests(&b).unwrap());
}

fn burstiness(series: &Path, out: PathBuf, emotions: Vec<Emotion>) -> Vec<BurstinessReport> {
    cmd_burstiness(&PipelineConfig {
        series_dir: Some(series.to_path_buf()),
        emotions,
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    read_reports_csv(fs::File::open(out.join("burstiness.csv")).unwrap()).unwrap()
}

#[test]
fn periodic_team_has_minus_one() {
    let tmp = TempDir::new().unwrap();
    let series = ingest(fixture("posts.csv"), tmp.path().join("ingest"));
    let reports = burstiness(&series, tmp.path().join("b"), vec![Emotion::Joy]);
    let t12 = reports.iter().find(|r| r.team_id == "t12").unwrap();
    assert_eq!(t12.b_n, -1.0);
    assert_eq!(t12.memory, None);
    let warnings = fs::read_to_string(tmp.path().join("b/burstiness_warnings.csv")).unwrap();
    assert!(warnings.contains("t12,joy,memory undefined at lag 1"));
}

#[test]
fn three_team_league_gives_six_rows() {
    let tmp = TempDir::new().unwrap();
    let posts = posts_subset(tmp.path(), &["t04", "t07", "t08"]);
    let series = ingest(posts, tmp.path().join("ingest"));
    let reports = burstiness(
        &series,
        tmp.path().join("b"),
        vec![Emotion::Joy, Emotion::Anger],
    );
    assert_eq!(reports.len(), 6);

    let all = burstiness(&series, tmp.path().join("all"), Emotion::ALL.to_vec());
    for team in ["t04", "t07", "t08"] {
        assert_eq!(
            all.iter().filter(|r| r.team_id == team).count(),
            4,
            "{team}"
        );
    }
}

#[test]
fn duplicate_series_are_at_distance_zero() {
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(fixture("posts.csv")).unwrap();
    let copies: String = text
        .lines()
        .filter(|l| l.starts_with("t01,"))
        .map(|l| format!("t01copy{}\n", &l[3..]))
        .collect();
    let posts = tmp.path().join("posts.csv");
    fs::write(&posts, format!("{text}{copies}")).unwrap();
    let meta_text = fs::read_to_string(fixture("metadata.csv")).unwrap();
    let t01 = meta_text.lines().find(|l| l.starts_with("t01,")).unwrap();
    // Same attributes, different league so final ranks stay unique.
    let copy = format!("t01copy{}", &t01[3..])
        .replacen(",A,", ",C,", 1)
        .rsplit_once(',')
        .unwrap()
        .0
        .to_string()
        + ",5";
    let meta = tmp.path().join("metadata.csv");
    fs::write(&meta, format!("{meta_text}{copy}\n")).unwrap();

    let series = ingest(posts, tmp.path().join("ingest"));
    let out = tmp.path().join("cluster");
    cmd_cluster(&PipelineConfig {
        series_dir: Some(series),
        metadata: Some(meta),
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    let dm =
        DistanceMatrix::read_csv(fs::File::open(out.join("distance_matrix.csv")).unwrap()).unwrap();
    let i = dm.labels().iter().position(|l| l == "t01").unwrap();
    let j = dm.labels().iter().position(|l| l == "t01copy").unwrap();
    assert_eq!(dm.get(i, j), 0.0);
    for f in [
        "dendrogram.csv",
        "partition.csv",
        "profiles.json",
        "manifest.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

fn cluster_kmeans(series: &Path, out: PathBuf) -> Partition {
    cmd_cluster(&PipelineConfig {
        series_dir: Some(series.to_path_buf()),
        metadata: Some(fixture("metadata.csv")),
        method: ClusterMethod::Kmeans,
        k: Some(3),
        seed: 7,
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    Partition::read_csv(fs::File::open(out.join("partition.csv")).unwrap()).unwrap()
}

#[test]
fn kmeans_is_deterministic_given_seed() {
    let tmp = TempDir::new().unwrap();
    let series = ingest(fixture("posts.csv"), tmp.path().join("ingest"));
    let a = cluster_kmeans(&series, tmp.path().join("a"));
    let b = cluster_kmeans(&series, tmp.path().join("b"));
    assert_eq!(a, b);
    assert_eq!(a.k(), 3);
    assert_eq!(
        tree_digests(&tmp.path().join("a")).unwrap(),
        tree_digests(&tmp.path().join("b")).unwrap()
    );
}

#[test]
fn hierarchical_cut_height_is_respected() {
    let tmp = TempDir::new().unwrap();
    let series = ingest(fixture("posts.csv"), tmp.path().join("ingest"));
    let out = tmp.path().join("c");
    cmd_cluster(&PipelineConfig {
        series_dir: Some(series),
        metadata: Some(fixture("metadata.csv")),
        cut: Some(1e9),
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    let p = Partition::read_csv(fs::File::open(out.join("partition.csv")).unwrap()).unwrap();
    assert_eq!(p.k(), 1);
}

/// Ten teams whose final rank is an exact linear function of the predictors;
/// welfare is solved from the planted relation.
fn planted_inputs(dir: &Path) -> (PathBuf, PathBuf, [f64; 6]) {
    let beta = [2.0, 0.5, -1e-4, 2e-8, 0.05, 3.0];
    let mut meta = String::from(
        "team_id,league,geo,pci,unemployment,welfare,market_value,heritage_rank,final_rank\n",
    );
    let mut reports = Vec::new();
    for i in 0..10u32 {
        let id = format!("p{i}");
        let rank = i + 1;
        let heritage = (i * 3) % 10 + 1;
        let pci = 15_000.0 + 1_000.0 * f64::from((i * 7) % 10);
        let mv = 1e7 * f64::from((i * i) % 11 + 1);
        let b = -0.4 + 0.1 * f64::from((i * 13) % 9);
        let w = (f64::from(rank)
            - beta[0]
            - beta[1] * f64::from(heritage)
            - beta[2] * pci
            - beta[3] * mv
            - beta[5] * b)
            / beta[4];
        meta.push_str(&format!(
            "{id},A,North,{pci},0.1,{w},{mv},{heritage},{rank}\n"
        ));
        reports.push(BurstinessReport {
            team_id: id,
            emotion: Emotion::Joy,
            n_tau: 10,
            mu_tau: 1.0,
            sigma_tau: 1.0,
            r: 1.0,
            b: 0.0,
            b_n: b,
            memory: None,
            lag: 1,
        });
    }
    let meta_path = dir.join("metadata.csv");
    fs::write(&meta_path, meta).unwrap();
    let burst_path = dir.join("burstiness.csv");
    write_reports_csv(&reports, fs::File::create(&burst_path).unwrap()).unwrap();
    (meta_path, burst_path, beta)
}

#[test]
fn regress_recovers_planted_coefficients() {
    let tmp = TempDir::new().unwrap();
    let (meta, burst, beta) = planted_inputs(tmp.path());
    let out = tmp.path().join("regress");
    cmd_regress(&PipelineConfig {
        metadata: Some(meta),
        burstiness: Some(burst),
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    let doc: RegressionDocument =
        serde_json::from_slice(&fs::read(out.join("regression.json")).unwrap()).unwrap();
    let names = ["intercept", "heritage", "pci", "mv", "welfare", "b_joy"];
    for (name, b) in names.iter().zip(beta) {
        let est = doc.pooled.full.coefficient(name).unwrap();
        assert!((est / b - 1.0).abs() < 1e-6, "{name}: {est} vs {b}");
    }
    assert!((doc.pooled.full.r_squared.unwrap() - 1.0).abs() < 1e-10);
    let reduced = doc.pooled.reduced.as_ref().unwrap();
    assert_eq!(reduced.coefficients.len(), 5);
    assert_eq!(doc.pooled.dropped.as_deref(), Some("b_joy"));
    assert!(doc.pooled.delta_r2_pct.unwrap() > 0.0);
    // A perfect full fit leaves the RMSE change undefined.
    assert!(doc.pooled.full.rmse < 1e-9);
    let scatter = fs::read_to_string(out.join("fit_scatter.csv")).unwrap();
    assert_eq!(scatter.lines().count(), 1 + 20);
}

#[test]
fn regress_on_fixture_reports_two_fits_and_deltas() {
    let tmp = TempDir::new().unwrap();
    let series = ingest(fixture("posts.csv"), tmp.path().join("ingest"));
    burstiness(
        &series,
        tmp.path().join("b"),
        vec![Emotion::Joy, Emotion::Anger],
    );
    let out = tmp.path().join("r");
    cmd_regress(&PipelineConfig {
        metadata: Some(fixture("metadata.csv")),
        burstiness: Some(tmp.path().join("b/burstiness.csv")),
        per_league: false,
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    let doc: RegressionDocument =
        serde_json::from_slice(&fs::read(out.join("regression.json")).unwrap()).unwrap();
    let p = &doc.pooled;
    let (full, reduced) = (&p.full, p.reduced.as_ref().unwrap());
    let r2 =
        100.0 * (full.r_squared.unwrap() - reduced.r_squared.unwrap()) / full.r_squared.unwrap();
    let rmse = 100.0 * (reduced.rmse - full.rmse) / full.rmse;
    assert_eq!(p.delta_r2_pct, Some(r2));
    assert_eq!(p.delta_rmse_pct, Some(rmse));
    assert!(full.r_squared.unwrap() >= reduced.r_squared.unwrap());
}

fn simulate(kind: ProcessKind, n: usize, seed: u64, out: PathBuf) -> Vec<f64> {
    cmd_simulate(&PipelineConfig {
        simulation: Some(SimulationSpec {
            process: kind,
            n_events: n,
        }),
        seed,
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    let mut rdr = csv::Reader::from_path(out.join("events.csv")).unwrap();
    rdr.records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect()
}

#[test]
fn simulate_examples() {
    let tmp = TempDir::new().unwrap();
    let t = simulate(
        ProcessKind::Periodic { interval: 2.5 },
        5,
        1,
        tmp.path().join("p"),
    );
    assert_eq!(t, vec![0.0, 2.5, 5.0, 7.5, 10.0]);

    let t = simulate(
        ProcessKind::Poisson { rate: 4.0 },
        100_001,
        3,
        tmp.path().join("q"),
    );
    let mean = t.last().unwrap() / 100_000.0;
    assert!((mean - 0.25).abs() < 0.0025, "{mean}");

    simulate(
        ProcessKind::Poisson { rate: 4.0 },
        1000,
        9,
        tmp.path().join("s1"),
    );
    simulate(
        ProcessKind::Poisson { rate: 4.0 },
        1000,
        9,
        tmp.path().join("s2"),
    );
    assert_eq!(
        fs::read(tmp.path().join("s1/events.csv")).unwrap(),
        fs::read(tmp.path().join("s2/events.csv")).unwrap()
    );

    let err = cmd_simulate(&PipelineConfig {
        simulation: Some(SimulationSpec {
            process: ProcessKind::Poisson { rate: -1.0 },
            n_events: 10,
        }),
        out_dir: tmp.path().join("bad"),
        ..PipelineConfig::default()
    });
    assert!(matches!(err, Err(Error::InvalidParameter(_))));
}

#[test]
fn report_bundles_every_stage() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("report");
    cmd_report(&PipelineConfig {
        posts: Some(fixture("posts.csv")),
        metadata: Some(fixture("metadata.csv")),
        out_dir: out.clone(),
        ..PipelineConfig::default()
    })
    .unwrap();
    let files = tree_digests(&out).unwrap();
    for f in [
        "burstiness_memory.csv",
        "manifest.json",
        "ingest/ingest_stats.csv",
        "burstiness/burstiness.csv",
        "cluster/profiles.json",
        "cluster/dendrogram.csv",
        "regress/regression.json",
    ] {
        assert!(files.contains_key(f), "{f}");
    }
    let manifests: BTreeMap<_, _> = files
        .keys()
        .filter(|k| k.ends_with("manifest.json"))
        .map(|k| (k.clone(), ()))
        .collect();
    assert_eq!(manifests.len(), 5);
}
