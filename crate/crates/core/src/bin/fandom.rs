use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fandom_emotions::clustering::{GeoTarget, Linkage};
use fandom_emotions::model::Emotion;
use fandom_emotions::pipeline::{
    cmd_burstiness, cmd_cluster, cmd_ingest, cmd_regress, cmd_report, cmd_simulate, ClusterMethod,
    Outputs, PipelineConfig, SimulationSpec,
};
use fandom_emotions::regression::{Predictor, Response};
use fandom_emotions::simulate::ProcessKind;

const INGEST_HELP: &str = "\
Input posts.csv:
  team_id,timestamp,n_comments,joy,anger,sadness,fear[,seq]
  timestamp is ISO-8601 (UTC when no offset is given); emotion shares are
  fractions or percentages (percentages when any share exceeds 1.5); an
  optional integer seq column orders posts sharing a timestamp.

Outputs:
  series/<team>.json  {team_id, stats, retained, daily}; each series is
                      {team_id, observations: [{timestamp, joy, anger, sadness, fear}]}
  ingest_stats.csv    team_id,total_posts,retained_posts,median_comments,
                      posts_per_day_min,posts_per_day_median,posts_per_day_max
  manifest.json       {command, config_hash, seed, version, files: {path: sha256}}";

const BURSTINESS_HELP: &str = "\
Input: an ingest output directory (reads series/*.json, retained series).

Outputs:
  burstiness.csv           team_id,emotion,n_tau,mu,sigma,r,B,B_n,M,lag
                           (M empty when undefined)
  burstiness_warnings.csv  team_id,emotion,reason
  manifest.json";

const CLUSTER_HELP: &str = "\
Inputs: an ingest output directory (daily series) and metadata.csv:
  team_id,league,geo,pci,unemployment,welfare,market_value,heritage_rank,final_rank
  league in {A,B,C}; geo in {North,Center,South}.

Outputs:
  distance_matrix.csv     header row and first column hold team ids
  dendrogram.csv          step,left,right,distance,size (leaves 0..n-1,
                          merge s creates cluster n+s-1)
  partition.csv           team_id,cluster
  profiles.json           {summary, clusters: [{cluster, size, teams, geo, league,
                          pci_tertile, mv_tertile, final_rank, delta_pci, delta_mv}]}
  convention_report.json  with --geo-target: per-linkage cluster compositions
  manifest.json";

const REGRESS_HELP: &str = "\
Inputs: metadata.csv and a burstiness.csv.
Predictors: heritage, pci, unemployment, welfare, mv, b_<emotion>, m_<emotion>.

Outputs:
  regression.json          {response, predictors, pooled, per_league,
                           skipped_leagues}; each group
                           holds full and reduced fits (coefficients raw and
                           standardized, fitted, residuals, r_squared, rmse) and
                           delta_r2_pct, delta_rmse_pct
  fit_scatter.csv          model,team_id,actual,predicted,residual
  regression_warnings.csv  team_id,undefined_predictor
  manifest.json";

const SIMULATE_HELP: &str = "\
Outputs:
  events.csv     event,time (seconds, first event at 0)
  manifest.json";

const REPORT_HELP: &str = "\
Runs ingest, burstiness, cluster and regress into ingest/, burstiness/,
cluster/ and regress/ under the output directory, then writes:
  burstiness_memory.csv  league,team_id,emotion,B_n,M
  manifest.json";

#[derive(Parser)]
#[command(
    name = "fandom",
    version,
    about = "Emotion event-series analytics for sports fandoms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold posts by comment count and build per-team series.
    #[command(after_long_help = INGEST_HELP)]
    Ingest {
        #[arg(long)]
        posts: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Burstiness and memory of emotional events per team.
    #[command(after_long_help = BURSTINESS_HELP)]
    Burstiness {
        /// Output directory of `ingest`.
        #[arg(long)]
        series: PathBuf,
        #[command(flatten)]
        events: EventArgs,
        #[command(flatten)]
        common: Common,
    },
    /// DTW clustering of daily emotion series with cluster profiles.
    #[command(after_long_help = CLUSTER_HELP)]
    Cluster {
        /// Output directory of `ingest`.
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        metadata: PathBuf,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Rank regression with an ablation of one predictor.
    #[command(after_long_help = REGRESS_HELP)]
    Regress {
        #[arg(long)]
        metadata: PathBuf,
        #[arg(long)]
        burstiness: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Event times from a synthetic point process.
    #[command(after_long_help = SIMULATE_HELP)]
    Simulate {
        #[command(flatten)]
        process: ProcessArgs,
        #[command(flatten)]
        common: Common,
    },
    /// The whole pipeline on posts.csv and metadata.csv.
    #[command(after_long_help = REPORT_HELP)]
    Report {
        #[arg(long)]
        posts: PathBuf,
        #[arg(long)]
        metadata: PathBuf,
        #[command(flatten)]
        events: EventArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; per-task seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EventArgs {
    /// Comma-separated emotions, or `all`.
    #[arg(long, default_value = "joy,anger", value_parser = parse_emotions)]
    emotions: EmotionList,
    /// Lag for the memory coefficient.
    #[arg(long, default_value_t = 1)]
    lag: usize,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, value_enum, default_value_t = Method::Hierarchical)]
    method: Method,
    #[arg(long, default_value = "average", value_parser = parse_from_str::<Linkage>)]
    linkage: Linkage,
    /// Dendrogram cut height (hierarchical).
    #[arg(long)]
    cut: Option<f64>,
    /// Number of clusters (k-means, or hierarchical without --cut); default 3.
    #[arg(long)]
    k: Option<usize>,
    /// k-means restarts.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Sakoe-Chiba window for DTW.
    #[arg(long)]
    window: Option<usize>,
    /// Emotion whose daily share is clustered.
    #[arg(long = "cluster-emotion", default_value = "joy", value_parser = parse_from_str::<Emotion>)]
    cluster_emotion: Emotion,
    /// Reference North,Center,South composition to search for across linkages.
    #[arg(long = "geo-target", value_parser = parse_geo_counts)]
    geo_target: Option<[usize; 3]>,
    #[arg(long = "geo-tolerance", default_value_t = 2)]
    geo_tolerance: usize,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "final_rank", value_parser = parse_from_str::<Response>)]
    response: Response,
    #[arg(long, default_value = "heritage,pci,mv,welfare,b_joy", value_delimiter = ',', value_parser = parse_from_str::<Predictor>)]
    predictors: Vec<Predictor>,
    /// Predictor left out of the reduced model, or `none`.
    #[arg(long, default_value = "b_joy")]
    drop: String,
    /// Also fit each league separately.
    #[arg(long)]
    per_league: bool,
}

#[derive(Args)]
struct ProcessArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Number of events.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    interval: f64,
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long, default_value_t = 2.5)]
    shape: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long = "short-mean", default_value_t = 1.0)]
    short_mean: f64,
    #[arg(long = "long-mean", default_value_t = 20.0)]
    long_mean: f64,
    #[arg(long = "leave-short", default_value_t = 0.05)]
    leave_short: f64,
    #[arg(long = "leave-long", default_value_t = 0.05)]
    leave_long: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Hierarchical,
    Kmeans,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Periodic,
    Poisson,
    Pareto,
    Markov,
}

fn parse_from_str<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

#[derive(Clone)]
struct EmotionList(Vec<Emotion>);

fn parse_emotions(s: &str) -> Result<EmotionList, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(EmotionList(Emotion::ALL.to_vec()));
    }
    s.split(',')
        .map(parse_from_str)
        .collect::<Result<_, _>>()
        .map(EmotionList)
}

fn parse_geo_counts(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| "expected three counts: north,center,south".to_string())
}

impl Common {
    fn apply(self, cfg: &mut PipelineConfig) {
        cfg.out_dir = self.out;
        cfg.seed = self.seed;
    }
}

impl EventArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        cfg.emotions = self.emotions.0;
        cfg.lag = self.lag;
    }
}

impl ClusterArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        cfg.method = match self.method {
            Method::Hierarchical => ClusterMethod::Hierarchical,
            Method::Kmeans => ClusterMethod::Kmeans,
        };
        cfg.linkage = self.linkage;
        cfg.cut = self.cut;
        cfg.k = self.k;
        cfg.restarts = self.restarts;
        cfg.window = self.window;
        cfg.cluster_emotion = self.cluster_emotion;
        cfg.geo_target = self.geo_target.map(|[north, center, south]| GeoTarget {
            north,
            center,
            south,
            tolerance: self.geo_tolerance,
        });
    }
}

impl ModelArgs {
    fn apply(self, cfg: &mut PipelineConfig) -> Result<(), String> {
        cfg.response = self.response;
        cfg.predictors = self.predictors;
        cfg.drop = match self.drop.as_str() {
            "none" | "" => None,
            d => Some(parse_from_str(d)?),
        };
        cfg.per_league = self.per_league;
        Ok(())
    }
}

impl ProcessArgs {
    fn spec(&self) -> SimulationSpec {
        let process = match self.kind {
            Kind::Periodic => ProcessKind::Periodic {
                interval: self.interval,
            },
            Kind::Poisson => ProcessKind::Poisson { rate: self.rate },
            Kind::Pareto => ProcessKind::Pareto {
                shape: self.shape,
                scale: self.scale,
            },
            Kind::Markov => ProcessKind::Markov {
                short_mean: self.short_mean,
                long_mean: self.long_mean,
                leave_short: self.leave_short,
                leave_long: self.leave_long,
            },
        };
        SimulationSpec {
            process,
            n_events: self.n,
        }
    }
}

fn run(cli: Cli) -> Result<Outputs, String> {
    let mut cfg = PipelineConfig::default();
    let err = |e: fandom_emotions::Error| e.to_string();
    match cli.command {
        Command::Ingest { posts, common } => {
            cfg.posts = Some(posts);
            common.apply(&mut cfg);
            cmd_ingest(&cfg).map_err(err)
        }
        Command::Burstiness {
            series,
            events,
            common,
        } => {
            cfg.series_dir = Some(series);
            events.apply(&mut cfg);
            common.apply(&mut cfg);
            cmd_burstiness(&cfg).map_err(err)
        }
        Command::Cluster {
            series,
            metadata,
            cluster,
            common,
        } => {
            cfg.series_dir = Some(series);
            cfg.metadata = Some(metadata);
            cluster.apply(&mut cfg);
            common.apply(&mut cfg);
            cmd_cluster(&cfg).map_err(err)
        }
        Command::Regress {
            metadata,
            burstiness,
            model,
            common,
        } => {
            cfg.metadata = Some(metadata);
            cfg.burstiness = Some(burstiness);
            model.apply(&mut cfg)?;
            common.apply(&mut cfg);
            cmd_regress(&cfg).map_err(err)
        }
        Command::Simulate { process, common } => {
            cfg.simulation = Some(process.spec());
            common.apply(&mut cfg);
            cmd_simulate(&cfg).map_err(err)
        }
        Command::Report {
            posts,
            metadata,
            events,
            cluster,
            model,
            common,
        } => {
            cfg.posts = Some(posts);
            cfg.metadata = Some(metadata);
            events.apply(&mut cfg);
            cluster.apply(&mut cfg);
            model.apply(&mut cfg)?;
            common.apply(&mut cfg);
            cmd_report(&cfg).map_err(err)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(out) => {
            for f in &out.files {
                println!("{}", out.dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
