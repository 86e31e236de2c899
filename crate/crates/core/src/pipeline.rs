//! File-level commands behind the `fandom` binary. Every command writes its
//! artifacts into one output directory together with a `manifest.json`
//! recording the command, the config hash, the seed and a SHA-256 per file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::clustering::{
    cut_dendrogram, hierarchical_cluster, kmeans_dtw, pairwise_distances, profile_clusters,
    sweep_linkages, DistanceMatrix, GeoTarget, KMeansConfig, Linkage, Partition,
};
use crate::error::{Error, Result};
use crate::ingest::{
    aggregate_daily, apply_median_threshold, binarize, load_metadata, load_posts, IngestStats,
};
use crate::model::{Emotion, EmotionalSeries, League, TeamMetadata};
use crate::regression::{ablation_compare, build_design, fit_ols, FitResult, Predictor, Response};
use crate::simulate::{derive_seed, event_times, write_event_csv, ProcessKind};
use crate::temporal::{read_reports_csv, write_reports_csv};

pub const MANIFEST: &str = "manifest.json";
pub const SERIES_DIR: &str = "series";
pub const INGEST_STATS: &str = "ingest_stats.csv";
pub const BURSTINESS: &str = "burstiness.csv";
pub const BURSTINESS_WARNINGS: &str = "burstiness_warnings.csv";
pub const DISTANCE_MATRIX: &str = "distance_matrix.csv";
pub const DENDROGRAM: &str = "dendrogram.csv";
pub const PARTITION: &str = "partition.csv";
pub const PROFILES: &str = "profiles.json";
pub const CONVENTION_REPORT: &str = "convention_report.json";
pub const REGRESSION: &str = "regression.json";
pub const REGRESSION_WARNINGS: &str = "regression_warnings.csv";
pub const FIT_SCATTER: &str = "fit_scatter.csv";
pub const BURSTINESS_MEMORY: &str = "burstiness_memory.csv";
pub const EVENTS: &str = "events.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    #[default]
    Hierarchical,
    Kmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub process: ProcessKind,
    pub n_events: usize,
}

/// Settings shared by every command; each command reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub posts: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    /// Output directory of a previous `ingest` run.
    pub series_dir: Option<PathBuf>,
    /// A burstiness report CSV.
    pub burstiness: Option<PathBuf>,
    pub emotions: Vec<Emotion>,
    pub lag: usize,
    pub cluster_emotion: Emotion,
    pub method: ClusterMethod,
    pub linkage: Linkage,
    pub cut: Option<f64>,
    pub k: Option<usize>,
    pub restarts: usize,
    pub window: Option<usize>,
    pub geo_target: Option<GeoTarget>,
    pub response: Response,
    pub predictors: Vec<Predictor>,
    pub drop: Option<Predictor>,
    pub per_league: bool,
    pub simulation: Option<SimulationSpec>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            posts: None,
            metadata: None,
            series_dir: None,
            burstiness: None,
            emotions: vec![Emotion::Joy, Emotion::Anger],
            lag: 1,
            cluster_emotion: Emotion::Joy,
            method: ClusterMethod::Hierarchical,
            linkage: Linkage::Average,
            cut: None,
            k: None,
            restarts: 10,
            window: None,
            geo_target: None,
            response: Response::FinalRank,
            predictors: Predictor::FULL_MODEL.to_vec(),
            drop: Some(Predictor::Burstiness(Emotion::Joy)),
            per_league: false,
            simulation: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

const INPUT_FIELDS: [&str; 4] = ["posts", "metadata", "series_dir", "burstiness"];

impl PipelineConfig {
    fn input(&self, name: &str) -> Option<&Path> {
        match name {
            "posts" => self.posts.as_deref(),
            "metadata" => self.metadata.as_deref(),
            "series_dir" => self.series_dir.as_deref(),
            "burstiness" => self.burstiness.as_deref(),
            _ => None,
        }
    }

    /// Every configured input path must exist.
    pub fn validate(&self) -> Result<()> {
        for name in INPUT_FIELDS {
            if let Some(p) = self.input(name) {
                if !p.exists() {
                    return Err(Error::MissingPath(p.to_path_buf()));
                }
            }
        }
        if self.emotions.is_empty() {
            return Err(Error::InvalidParameter("no emotions selected".into()));
        }
        if self.lag == 0 {
            return Err(Error::InvalidParameter("lag must be at least 1".into()));
        }
        Ok(())
    }

    fn require(&self, name: &'static str) -> Result<&Path> {
        self.input(name)
            .ok_or_else(|| Error::InvalidParameter(format!("`{name}` input path is required")))
    }

    /// SHA-256 of the canonical JSON of the command and its settings, with
    /// input paths replaced by content digests and the output directory left out.
    pub fn config_hash(&self, command: &str) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        let map = v.as_object_mut().expect("config serializes to an object");
        map.remove("out_dir");
        for name in INPUT_FIELDS {
            let digest = match self.input(name) {
                Some(p) => Value::String(digest_path(p)?),
                None => Value::Null,
            };
            map.insert(name.to_string(), digest);
        }
        map.insert("command".into(), Value::String(command.into()));
        Ok(sha256_hex(serde_json::to_string(&v)?.as_bytes()))
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::from(e).in_file(path))
}

/// Content digest of a file, or of a directory tree (relative paths and file digests).
pub fn digest_path(path: &Path) -> Result<String> {
    if path.is_dir() {
        let mut listing = String::new();
        for (rel, digest) in tree_digests(path)? {
            listing.push_str(&format!("{rel}\t{digest}\n"));
        }
        Ok(sha256_hex(listing.as_bytes()))
    } else {
        Ok(sha256_hex(&read_file(path)?))
    }
}

/// Relative path (with `/` separators) to SHA-256 for every file under `root`.
pub fn tree_digests(root: &Path) -> Result<BTreeMap<String, String>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::from(e).in_file(dir))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out)?;
            } else {
                let rel = p.strip_prefix(root).expect("under root");
                let rel: Vec<String> = rel
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect();
                out.insert(rel.join("/"), sha256_hex(&read_file(&p)?));
            }
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// Written files relative to the output directory, with their SHA-256.
    pub files: BTreeMap<String, String>,
}

/// Files written by one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outputs {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn bytes(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::from(e).in_file(parent))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::from(e).in_file(&path))?;
        self.files.push(PathBuf::from(rel));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.bytes(rel, s.as_bytes())
    }

    fn with<F>(&mut self, rel: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.bytes(rel, &buf)
    }

    fn finish(mut self, command: &str, cfg: &PipelineConfig) -> Result<Outputs> {
        let mut files = BTreeMap::new();
        for rel in &self.files {
            let key = rel.to_string_lossy().replace('\\', "/");
            files.insert(key, sha256_hex(&read_file(&self.dir.join(rel))?));
        }
        let manifest = Manifest {
            command: command.into(),
            config_hash: cfg.config_hash(command)?,
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            files,
        };
        self.json(MANIFEST, &manifest)?;
        Ok(Outputs {
            dir: self.dir,
            files: self.files,
        })
    }
}

fn csv_rows(
    out: &mut Vec<u8>,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One team's ingested series as stored under `series/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub team_id: String,
    pub stats: IngestStats,
    /// Posts surviving the comment threshold, at their original timestamps.
    pub retained: EmotionalSeries,
    /// Daily means of the retained posts.
    pub daily: EmotionalSeries,
}

fn file_stem(team_id: &str) -> String {
    team_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn open_metadata(path: &Path) -> Result<Vec<TeamMetadata>> {
    load_metadata(read_file(path)?.as_slice()).map_err(|e| e.in_file(path))
}

/// Reads every `series/*.json` document under an ingest output directory, in team order.
pub fn read_series_dir(dir: &Path) -> Result<Vec<SeriesDocument>> {
    let series = dir.join(SERIES_DIR);
    if !series.is_dir() {
        return Err(Error::MissingPath(series));
    }
    let mut docs = Vec::new();
    for (rel, _) in tree_digests(&series)? {
        if rel.ends_with(".json") {
            let path = series.join(&rel);
            let doc: SeriesDocument = serde_json::from_slice(&read_file(&path)?)
                .map_err(|e| Error::from(e).in_file(&path))?;
            docs.push(doc);
        }
    }
    docs.sort_by(|a, b| a.team_id.cmp(&b.team_id));
    Ok(docs)
}

/// Thresholds each team's posts at its median comment count and writes the
/// retained and daily series plus `ingest_stats.csv`.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<Outputs> {
    cfg.validate()?;
    let posts_path = cfg.require("posts")?;
    let by_team =
        load_posts(read_file(posts_path)?.as_slice()).map_err(|e| e.in_file(posts_path))?;
    let mut w = Writer::new(&cfg.out_dir)?;
    let mut stats = Vec::new();
    let mut stems = BTreeMap::new();
    for (team, posts) in &by_team {
        let (retained, st) = apply_median_threshold(posts)?;
        let retained = EmotionalSeries::from_posts(&retained)?;
        let daily = aggregate_daily(&retained)?;
        let stem = file_stem(team);
        if let Some(other) = stems.insert(stem.clone(), team.clone()) {
            return Err(Error::InvalidParameter(format!(
                "teams `{other}` and `{team}` map to the same file name"
            )));
        }
        w.json(
            &format!("{SERIES_DIR}/{stem}.json"),
            &SeriesDocument {
                team_id: team.clone(),
                stats: st.clone(),
                retained,
                daily,
            },
        )?;
        stats.push(st);
    }
    w.with(INGEST_STATS, |out| {
        csv_rows(
            out,
            &[
                "team_id",
                "total_posts",
                "retained_posts",
                "median_comments",
                "posts_per_day_min",
                "posts_per_day_median",
                "posts_per_day_max",
            ],
            stats.iter().map(|s| {
                vec![
                    s.team_id.clone(),
                    s.total_posts.to_string(),
                    s.retained_posts.to_string(),
                    s.median_comments.to_string(),
                    s.posts_per_day.min.to_string(),
                    s.posts_per_day.median.to_string(),
                    s.posts_per_day.max.to_string(),
                ]
            }),
        )
    })?;
    w.finish("ingest", cfg)
}

/// Burstiness and memory for each team and selected emotion, from the
/// retained (per-post) series. Teams with too few events go to the warnings file.
pub fn cmd_burstiness(cfg: &PipelineConfig) -> Result<Outputs> {
    cfg.validate()?;
    let docs = read_series_dir(cfg.require("series_dir")?)?;
    let mut reports = Vec::new();
    let mut warnings = Vec::new();
    for doc in &docs {
        for &emotion in &cfg.emotions {
            let events = binarize(&doc.retained, emotion);
            let result = crate::ingest::extract_inter_event(&events).and_then(|taus| {
                crate::temporal::report_from_taus(&doc.team_id, emotion, &taus, cfg.lag)
            });
            match result {
                Ok(r) => {
                    if r.memory.is_none() {
                        warnings.push(vec![
                            doc.team_id.clone(),
                            emotion.to_string(),
                            format!("memory undefined at lag {}", cfg.lag),
                        ]);
                    }
                    reports.push(r);
                }
                Err(e @ (Error::InsufficientEvents { .. } | Error::DegenerateSequence(_))) => {
                    log::info!("team `{}` {emotion}: {e}", doc.team_id);
                    warnings.push(vec![
                        doc.team_id.clone(),
                        emotion.to_string(),
                        e.to_string(),
                    ]);
                }
                Err(e) => return Err(e),
            }
        }
    }
    let mut w = Writer::new(&cfg.out_dir)?;
    w.with(BURSTINESS, |out| write_reports_csv(&reports, out))?;
    w.with(BURSTINESS_WARNINGS, |out| {
        csv_rows(out, &["team_id", "emotion", "reason"], warnings)
    })?;
    w.finish("burstiness", cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ClusterSummary {
    method: ClusterMethod,
    linkage: Option<Linkage>,
    cut_height: Option<f64>,
    k: usize,
    kmeans_cost: Option<f64>,
    kmeans_restart: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ProfilesDocument {
    summary: ClusterSummary,
    clusters: Vec<crate::clustering::ClusterProfile>,
}

/// DTW distances between daily series, a partition (hierarchical cut or
/// k-means) and per-cluster feature profiles.
pub fn cmd_cluster(cfg: &PipelineConfig) -> Result<Outputs> {
    cfg.validate()?;
    let docs = read_series_dir(cfg.require("series_dir")?)?;
    let meta = open_metadata(cfg.require("metadata")?)?;
    let labels: Vec<String> = docs.iter().map(|d| d.team_id.clone()).collect();
    let signals: Vec<Vec<f64>> = docs
        .iter()
        .map(|d| d.daily.signal(cfg.cluster_emotion))
        .collect();
    let dm = match cfg.window {
        None => pairwise_distances(&labels, &signals)?,
        Some(win) => {
            let n = labels.len();
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = crate::clustering::dtw_distance_windowed(
                        &signals[i],
                        &signals[j],
                        Some(win),
                    )?;
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
            DistanceMatrix::new(labels.clone(), d)?
        }
    };
    let dg = hierarchical_cluster(&dm, cfg.linkage);

    let (partition, summary) = match cfg.method {
        ClusterMethod::Hierarchical => {
            let height = match (cfg.cut, cfg.k) {
                (Some(h), _) => h,
                (None, k) => {
                    let k = k.unwrap_or(3);
                    dg.height_for_k(k).ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "no dendrogram cut yields exactly {k} clusters"
                        ))
                    })?
                }
            };
            let p = cut_dendrogram(&dg, height)?;
            let summary = ClusterSummary {
                method: cfg.method,
                linkage: Some(cfg.linkage),
                cut_height: Some(height),
                k: p.k(),
                kmeans_cost: None,
                kmeans_restart: None,
            };
            (p, summary)
        }
        ClusterMethod::Kmeans => {
            let mut kc = KMeansConfig::new(cfg.k.unwrap_or(3), derive_seed(cfg.seed, 0));
            kc.restarts = cfg.restarts;
            let out = kmeans_dtw(&labels, &signals, &kc)?;
            let summary = ClusterSummary {
                method: cfg.method,
                linkage: None,
                cut_height: None,
                k: out.partition.k(),
                kmeans_cost: Some(out.cost),
                kmeans_restart: Some(out.restart),
            };
            (out.partition, summary)
        }
    };
    let profiles = profile_clusters(&partition, &meta)?;

    let mut w = Writer::new(&cfg.out_dir)?;
    w.with(DISTANCE_MATRIX, |out| dm.write_csv(out))?;
    w.with(DENDROGRAM, |out| dg.write_csv(out))?;
    w.with(PARTITION, |out| partition.write_csv(out))?;
    w.json(
        PROFILES,
        &ProfilesDocument {
            summary,
            clusters: profiles,
        },
    )?;
    if let Some(target) = cfg.geo_target {
        let report = sweep_linkages(&dm, &meta, cfg.k.unwrap_or(3), target)?;
        if report.matched_linkages.is_empty() {
            log::warn!("{}", report.conclusion);
        }
        w.json(CONVENTION_REPORT, &report)?;
    }
    w.finish("cluster", cfg)
}

/// Full and reduced fits for one group of teams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionGroup {
    pub teams: usize,
    pub full: FitResult,
    pub reduced: Option<FitResult>,
    pub dropped: Option<String>,
    pub delta_r2_pct: Option<f64>,
    pub delta_rmse_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDocument {
    pub response: String,
    pub predictors: Vec<String>,
    pub pooled: RegressionGroup,
    pub per_league: BTreeMap<String, RegressionGroup>,
    /// Leagues requested but not fitted, with the reason.
    pub skipped_leagues: BTreeMap<String, String>,
}

fn regress_group(
    meta: &[TeamMetadata],
    reports: &[crate::model::BurstinessReport],
    cfg: &PipelineConfig,
    warnings: &mut Vec<Vec<String>>,
) -> Result<RegressionGroup> {
    let build = build_design(meta, reports, cfg.response, &cfg.predictors)?;
    for ex in &build.excluded {
        warnings.push(vec![ex.team_id.clone(), ex.predictor.clone()]);
    }
    let dm = build.design;
    Ok(match cfg.drop {
        Some(p) => {
            let a = ablation_compare(&dm, &p.to_string())?;
            RegressionGroup {
                teams: dm.n_rows(),
                full: a.full,
                reduced: Some(a.reduced),
                dropped: Some(a.dropped),
                delta_r2_pct: a.delta_r2_pct,
                delta_rmse_pct: a.delta_rmse_pct,
            }
        }
        None => RegressionGroup {
            teams: dm.n_rows(),
            full: fit_ols(&dm)?,
            reduced: None,
            dropped: None,
            delta_r2_pct: None,
            delta_rmse_pct: None,
        },
    })
}

/// Fits the configured model (pooled, and per league on request) and the
/// ablation without the dropped predictor.
pub fn cmd_regress(cfg: &PipelineConfig) -> Result<Outputs> {
    cfg.validate()?;
    let meta = open_metadata(cfg.require("metadata")?)?;
    let path = cfg.require("burstiness")?;
    let reports = read_reports_csv(read_file(path)?.as_slice()).map_err(|e| e.in_file(path))?;
    if let Some(d) = cfg.drop {
        if !cfg.predictors.contains(&d) {
            return Err(Error::UnknownPredictor(format!(
                "{d} (not among the model's predictors)"
            )));
        }
    }
    let mut warnings = Vec::new();
    let pooled = regress_group(&meta, &reports, cfg, &mut warnings)?;
    let mut per_league = BTreeMap::new();
    let mut skipped_leagues = BTreeMap::new();
    if cfg.per_league {
        for league in [League::A, League::B, League::C] {
            let members: Vec<TeamMetadata> = meta
                .iter()
                .filter(|m| m.league == league)
                .cloned()
                .collect();
            if members.is_empty() {
                continue;
            }
            match regress_group(&members, &reports, cfg, &mut Vec::new()) {
                Ok(g) => {
                    per_league.insert(league.to_string(), g);
                }
                Err(
                    e @ (Error::TooFewObservations { .. }
                    | Error::RankDeficient { .. }
                    | Error::EmptyInput(_)),
                ) => {
                    log::warn!("league {league} not fitted: {e}");
                    skipped_leagues.insert(league.to_string(), e.to_string());
                }
                Err(e) => return Err(e),
            }
        }
    }
    let doc = RegressionDocument {
        response: cfg.response.to_string(),
        predictors: cfg.predictors.iter().map(Predictor::to_string).collect(),
        pooled,
        per_league,
        skipped_leagues,
    };

    let mut w = Writer::new(&cfg.out_dir)?;
    w.json(REGRESSION, &doc)?;
    w.with(FIT_SCATTER, |out| {
        let mut rows = Vec::new();
        let models = std::iter::once(("full", &doc.pooled.full))
            .chain(doc.pooled.reduced.as_ref().map(|r| ("reduced", r)));
        for (name, fit) in models {
            for i in 0..fit.rows.len() {
                rows.push(vec![
                    name.to_string(),
                    fit.rows[i].clone(),
                    fit.response[i].to_string(),
                    fit.fitted[i].to_string(),
                    fit.residuals[i].to_string(),
                ]);
            }
        }
        csv_rows(
            out,
            &["model", "team_id", "actual", "predicted", "residual"],
            rows,
        )
    })?;
    w.with(REGRESSION_WARNINGS, |out| {
        csv_rows(out, &["team_id", "undefined_predictor"], warnings)
    })?;
    w.finish("regress", cfg)
}

/// Synthetic event times from one point process.
pub fn cmd_simulate(cfg: &PipelineConfig) -> Result<Outputs> {
    let spec = cfg
        .simulation
        .ok_or_else(|| Error::InvalidParameter("no simulation parameters given".into()))?;
    let times = event_times(&spec.process, spec.n_events, cfg.seed)?;
    let mut w = Writer::new(&cfg.out_dir)?;
    w.with(EVENTS, |out| write_event_csv(&times, out))?;
    w.finish("simulate", cfg)
}

/// Runs ingest, burstiness, cluster and regress into subdirectories of the
/// output directory and adds the league-grouped burstiness–memory table.
pub fn cmd_report(cfg: &PipelineConfig) -> Result<Outputs> {
    cfg.validate()?;
    cfg.require("posts")?;
    let meta_path = cfg.require("metadata")?;
    let root = &cfg.out_dir;
    let stage = |name: &str| PipelineConfig {
        out_dir: root.join(name),
        ..cfg.clone()
    };

    let ingest = stage("ingest");
    cmd_ingest(&ingest)?;

    let burst = PipelineConfig {
        series_dir: Some(ingest.out_dir.clone()),
        ..stage("burstiness")
    };
    cmd_burstiness(&burst)?;

    let cluster = PipelineConfig {
        series_dir: Some(ingest.out_dir.clone()),
        ..stage("cluster")
    };
    cmd_cluster(&cluster)?;

    let burst_csv = burst.out_dir.join(BURSTINESS);
    let regress = PipelineConfig {
        burstiness: Some(burst_csv.clone()),
        ..stage("regress")
    };
    cmd_regress(&regress)?;

    let meta = open_metadata(meta_path)?;
    let league: BTreeMap<&str, League> = meta
        .iter()
        .map(|m| (m.team_id.as_str(), m.league))
        .collect();
    let reports = read_reports_csv(read_file(&burst_csv)?.as_slice())?;
    let mut w = Writer::new(root)?;
    w.with(BURSTINESS_MEMORY, |out| {
        let mut rows: Vec<Vec<String>> = reports
            .iter()
            .filter_map(|r| {
                let l = league.get(r.team_id.as_str())?;
                Some(vec![
                    l.to_string(),
                    r.team_id.clone(),
                    r.emotion.to_string(),
                    r.b_n.to_string(),
                    r.memory.map(|m| m.to_string()).unwrap_or_default(),
                ])
            })
            .collect();
        rows.sort();
        csv_rows(out, &["league", "team_id", "emotion", "B_n", "M"], rows)
    })?;
    let mut out = w.finish("report", cfg)?;
    for sub in ["ingest", "burstiness", "cluster", "regress"] {
        out.files.push(PathBuf::from(sub));
    }
    Ok(out)
}

/// Reads a partition CSV written by `cluster`.
pub fn read_partition(path: &Path) -> Result<Partition> {
    Partition::read_csv(read_file(path)?.as_slice()).map_err(|e| e.in_file(path))
}
