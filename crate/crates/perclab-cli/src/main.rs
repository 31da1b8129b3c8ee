//! Command-line front door: sampling, exact oracle queries, decay-rate and
//! prefactor scans, junction statistics, cluster-structure reports, and
//! byte-exact replay from a run manifest.
//!
//! Exit codes: 0 success, 2 configuration error, 3 enumeration/guard
//! refusal, 4 statistical failure of an asserted check.

mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use manifest::{verify_outputs, OutputSink, RunManifest};
use perclab::events::EventSpec;
use perclab::experiments::{llt, massgap, oz, tail, xi};
use perclab::geometry::DirectionalNorm;
use perclab::lattice::LatticeBox;
use perclab::oracle;
use perclab::renewal::{classify_connection, eta_k_break_points, DirectionContext};
use perclab::{BondConfiguration, Error as PercError};
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_CONFIG: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_STAT: u8 = 4;

#[derive(Parser)]
#[command(name = "perclab", version, about = "subcritical percolation laboratory")]
struct Cli {
    /// JSON config file; flags override its fields
    #[arg(long, global = true)]
    config: Option<String>,
    /// worker threads (0 = rayon default; env PERCLAB_WORKERS)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// output directory
    #[arg(long, global = true)]
    out: Option<String>,
    /// master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// bond probability
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Monte Carlo trials
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample one configuration and dump it in the documented byte layout
    Sample(SampleArgs),
    /// Exact enumeration of an event probability or connection table
    Oracle(OracleArgs),
    /// Decay-rate regression along a direction
    Xi(XiArgs),
    /// Prefactor flatness scan
    Oz(OzArgs),
    /// Junction fluctuation histogram against the predicted Gaussian
    Llt(LltArgs),
    /// Far-junction tail ratios over a scale ladder
    Tail(TailArgs),
    /// Connection flags and break-point report for one pair
    Renewal(RenewalArgs),
    /// Tree skeleton and delta-goodness of a sampled or loaded cluster
    Skeleton(SkeletonArgs),
    /// Exact mass-gap decay table on narrow strips
    Massgap(MassgapArgs),
    /// Re-run a manifest and verify the outputs byte-exactly
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// box as WxH site counts (d=2)
    #[arg(long, default_value = "8x8")]
    r#box: String,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// dump file name inside the output directory
    #[arg(long, default_value = "config.bin")]
    dump: String,
}

#[derive(Args)]
struct OracleArgs {
    /// box as WxH site counts
    #[arg(long, default_value = "2x2")]
    r#box: String,
    /// corner-corner | two-point | triple | junction | h | renewal
    #[arg(long, default_value = "corner-corner")]
    event: String,
    /// semicolon-separated sites, e.g. "0,0;1,1" (order: k first for junction/h)
    #[arg(long)]
    sites: Option<String>,
    /// print the exact fraction (p must be rational like 1/2 or 0.5)
    #[arg(long, default_value_t = false)]
    rational: bool,
}

#[derive(Args)]
struct XiArgs {
    /// direction components "1,0"
    #[arg(long)]
    direction: Option<String>,
    /// comma-separated scales "4,6,8"
    #[arg(long)]
    n_list: Option<String>,
    /// append a (direction, slope) row to this tabulation CSV
    #[arg(long)]
    tab_append: Option<String>,
    #[arg(long, default_value_t = false)]
    override_guard: bool,
}

#[derive(Args)]
struct OzArgs {
    #[arg(long)]
    direction: Option<String>,
    #[arg(long)]
    n_list: Option<String>,
    /// decay rate to rescale with; defaults to a fresh regression
    #[arg(long)]
    xi_hat: Option<f64>,
}

#[derive(Args)]
struct LltArgs {
    /// norm: "euclid:C" | "l1s:C,EPS" | "tab:rows.csv"
    #[arg(long, default_value = "euclid:1")]
    norm: String,
    /// anchor triple "x,y;x,y;x,y" (real coordinates)
    #[arg(long)]
    anchors: Option<String>,
    #[arg(long)]
    n_scale: Option<i64>,
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct TailArgs {
    #[arg(long, default_value = "euclid:1")]
    norm: String,
    #[arg(long)]
    anchors: Option<String>,
    #[arg(long)]
    n_list: Option<String>,
    /// comma-separated exponents in (1/2, 1)
    #[arg(long)]
    alphas: Option<String>,
}

#[derive(Args)]
struct RenewalArgs {
    /// load a dumped configuration instead of sampling
    #[arg(long)]
    load: Option<String>,
    #[arg(long, default_value = "12x5")]
    r#box: String,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, default_value = "0,0")]
    k: String,
    #[arg(long, default_value = "8,0")]
    n: String,
    /// direction t "1,0"
    #[arg(long, default_value = "1,0")]
    t: String,
    #[arg(long, default_value = "euclid:1")]
    norm: String,
}

#[derive(Args)]
struct SkeletonArgs {
    #[arg(long)]
    load: Option<String>,
    #[arg(long, default_value = "17x17")]
    r#box: String,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, default_value = "8,8")]
    k: String,
    /// three targets "a;b;c"
    #[arg(long, default_value = "14,8;2,8;8,2")]
    targets: String,
    #[arg(long, default_value = "euclid:1")]
    norm: String,
}

#[derive(Args)]
struct MassgapArgs {
    #[arg(long)]
    lengths: Option<String>,
    #[arg(long)]
    width: Option<i64>,
    #[arg(long, default_value = "euclid:1")]
    norm: String,
    /// chain spacing constant for the scan
    #[arg(long)]
    cap_k: Option<f64>,
}

#[derive(Args)]
struct ReplayArgs {
    /// manifest.json written by a previous run
    manifest: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify_error(&e))
        }
    }
}

fn classify_error(e: &AppError) -> u8 {
    match e {
        AppError::Config(_) => EXIT_CONFIG,
        AppError::Guard(_) => EXIT_GUARD,
        AppError::Stat(_) => EXIT_STAT,
    }
}

#[derive(Debug)]
enum AppError {
    Config(String),
    Guard(String),
    Stat(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(s) => write!(f, "{s}"),
            AppError::Guard(s) => write!(f, "guard refusal: {s}"),
            AppError::Stat(s) => write!(f, "statistical check failed: {s}"),
        }
    }
}

impl From<PercError> for AppError {
    fn from(e: PercError) -> Self {
        match e {
            PercError::EnumerationGuard { .. } => AppError::Guard(e.to_string()),
            PercError::StatisticalGuard(_) => AppError::Stat(e.to_string()),
            other => AppError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Config(format!("io: {e}"))
    }
}

type AppResult<T> = Result<T, AppError>;

fn run(cli: Cli) -> AppResult<ExitCode> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(AppError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.workers = w;
    } else if let Ok(env) = std::env::var("PERCLAB_WORKERS") {
        cfg.workers = env.parse().map_err(|_| {
            AppError::Config(format!("PERCLAB_WORKERS = {env} is not a number"))
        })?;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(p) = cli.p {
        cfg.p = p;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    cfg.validate().map_err(AppError::Config)?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| AppError::Config(format!("thread pool: {e}")))?;
    }

    let started = Instant::now();
    let mut sink = OutputSink::new(&cfg.out_dir)?;
    let (name, code) = dispatch(&cli.cmd, &mut cfg, &mut sink)?;
    let wall = started.elapsed().as_secs_f64();
    sink.finish(name, &cfg, wall, cfg.workers)?;
    Ok(code)
}

fn dispatch(
    cmd: &Cmd,
    cfg: &mut RunConfig,
    sink: &mut OutputSink,
) -> AppResult<(&'static str, ExitCode)> {
    match cmd {
        Cmd::Sample(a) => cmd_sample(a, cfg, sink).map(|c| ("sample", c)),
        Cmd::Oracle(a) => cmd_oracle(a, cfg, sink).map(|c| ("oracle", c)),
        Cmd::Xi(a) => cmd_xi(a, cfg, sink).map(|c| ("xi", c)),
        Cmd::Oz(a) => cmd_oz(a, cfg, sink).map(|c| ("oz", c)),
        Cmd::Llt(a) => cmd_llt(a, cfg, sink).map(|c| ("llt", c)),
        Cmd::Tail(a) => cmd_tail(a, cfg, sink).map(|c| ("tail", c)),
        Cmd::Renewal(a) => cmd_renewal(a, cfg, sink).map(|c| ("renewal", c)),
        Cmd::Skeleton(a) => cmd_skeleton(a, cfg, sink).map(|c| ("skeleton", c)),
        Cmd::Massgap(a) => cmd_massgap(a, cfg, sink).map(|c| ("massgap", c)),
        Cmd::Replay(a) => cmd_replay(a).map(|c| ("replay", c)),
    }
}

// ---- parsing helpers -------------------------------------------------

fn parse_box(spec: &str) -> AppResult<LatticeBox> {
    let parts: Vec<&str> = spec.split('x').collect();
    if parts.len() < 2 {
        return Err(AppError::Config(format!(
            "box spec '{spec}' should look like 4x4"
        )));
    }
    let mut hi = Vec::new();
    for p in &parts {
        let v: i64 = p
            .trim()
            .parse()
            .map_err(|_| AppError::Config(format!("bad box spec '{spec}'")))?;
        if v < 1 {
            return Err(AppError::Config("box sides must be >= 1 site".into()));
        }
        hi.push(v - 1);
    }
    let lo = vec![0i64; hi.len()];
    Ok(LatticeBox::new(&lo, &hi)?)
}

fn parse_site(s: &str) -> AppResult<Vec<i64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| AppError::Config(format!("bad site '{s}'")))
        })
        .collect()
}

fn parse_sites(s: &str) -> AppResult<Vec<Vec<i64>>> {
    s.split(';').map(parse_site).collect()
}

fn parse_floats(s: &str) -> AppResult<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| AppError::Config(format!("bad number list '{s}'")))
        })
        .collect()
}

fn parse_float_sites(s: &str) -> AppResult<Vec<Vec<f64>>> {
    s.split(';').map(parse_floats).collect()
}

fn parse_ints(s: &str) -> AppResult<Vec<i64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| AppError::Config(format!("bad integer list '{s}'")))
        })
        .collect()
}

fn parse_norm(spec: &str) -> AppResult<DirectionalNorm> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "euclid" => {
            let scale: f64 = if rest.is_empty() {
                1.0
            } else {
                rest.parse()
                    .map_err(|_| AppError::Config(format!("bad norm '{spec}'")))?
            };
            Ok(DirectionalNorm::euclidean(2, scale))
        }
        "l1s" => {
            let v = parse_floats(rest)?;
            if v.len() != 2 {
                return Err(AppError::Config("l1s needs SCALE,EPS".into()));
            }
            Ok(DirectionalNorm::smoothed_l1(2, v[0], v[1]))
        }
        "tab" => {
            let text = std::fs::read_to_string(rest)
                .map_err(|e| AppError::Config(format!("cannot read {rest}: {e}")))?;
            let mut rows = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let v = parse_floats(line)?;
                if v.len() < 3 {
                    return Err(AppError::Config(format!("bad tabulation row '{line}'")));
                }
                rows.push((v[..v.len() - 1].to_vec(), v[v.len() - 1]));
            }
            Ok(DirectionalNorm::tabulated(&rows, 1e-3, true)?)
        }
        other => Err(AppError::Config(format!("unknown norm kind '{other}'"))),
    }
}

// ---- subcommands ------------------------------------------------------

fn cmd_sample(a: &SampleArgs, cfg: &RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    let lattice = parse_box(&a.r#box)?;
    let config = BondConfiguration::sample(cfg.p, &lattice, cfg.master_seed, a.trial)?;
    let mut bytes = Vec::new();
    config.dump(&mut bytes)?;
    sink.write(&a.dump, &bytes)?;
    println!(
        "sampled {} edges, {} open, dumped to {}/{}",
        lattice.n_edges(),
        config.n_open(),
        sink.dir().display(),
        a.dump
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct OracleOut {
    event: String,
    probability: f64,
    rational: Option<(String, String)>,
    edge_count: usize,
}

fn cmd_oracle(a: &OracleArgs, cfg: &RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    let lattice = parse_box(&a.r#box)?;
    let sites = match &a.sites {
        Some(s) => parse_sites(s)?,
        None => Vec::new(),
    };
    let spec: EventSpec = match a.event.as_str() {
        "corner-corner" => EventSpec::TwoPoint {
            a: lattice.lower().to_vec(),
            b: lattice.upper().to_vec(),
        },
        "two-point" => {
            let [s1, s2] = two(&sites, "two-point needs --sites \"a;b\"")?;
            EventSpec::TwoPoint { a: s1, b: s2 }
        }
        "triple" => {
            let [s1, s2, s3] = three(&sites, "triple needs --sites \"a;b;c\"")?;
            EventSpec::Triple { n: [s1, s2, s3] }
        }
        "junction" => {
            if sites.len() != 4 {
                return Err(AppError::Config(
                    "junction needs --sites \"k;a;b;c\"".into(),
                ));
            }
            EventSpec::Junction {
                k: sites[0].clone(),
                n: [sites[1].clone(), sites[2].clone(), sites[3].clone()],
            }
        }
        "h" => return cmd_oracle_h(a, cfg, sink, &lattice, &sites),
        "renewal" => return cmd_oracle_renewal(a, cfg, sink, &lattice, &sites),
        other => {
            return Err(AppError::Config(format!(
                "unknown oracle event '{other}' (corner-corner|two-point|triple|junction|h|renewal)"
            )))
        }
    };
    spec.validate(&lattice)?;
    let result = if a.rational {
        oracle::exact_probability_from_float(&lattice, cfg.p, |c| {
            spec.holds(c).unwrap_or(false)
        })?
    } else {
        oracle::exact_probability(&lattice, cfg.p, |c| spec.holds(c).unwrap_or(false))?
    };
    match &result.rational {
        Some((n, d)) => println!("{} = {}/{} = {}", a.event, n, d, result.probability),
        None => println!("{} = {}", a.event, result.probability),
    }
    sink.write_json(
        "oracle.json",
        &OracleOut {
            event: a.event.clone(),
            probability: result.probability,
            rational: result.rational.clone(),
            edge_count: result.edge_count,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn two(sites: &[Vec<i64>], msg: &str) -> AppResult<[Vec<i64>; 2]> {
    if sites.len() != 2 {
        return Err(AppError::Config(msg.into()));
    }
    Ok([sites[0].clone(), sites[1].clone()])
}

fn three(sites: &[Vec<i64>], msg: &str) -> AppResult<[Vec<i64>; 3]> {
    if sites.len() != 3 {
        return Err(AppError::Config(msg.into()));
    }
    Ok([sites[0].clone(), sites[1].clone(), sites[2].clone()])
}

fn cmd_oracle_h(
    _a: &OracleArgs,
    cfg: &RunConfig,
    sink: &mut OutputSink,
    lattice: &LatticeBox,
    sites: &[Vec<i64>],
) -> AppResult<ExitCode> {
    let [k, n] = two(sites, "h needs --sites \"k;n\"")?;
    let xi = DirectionalNorm::euclidean(2, 1.0);
    let conn = oracle::exact_h_f(
        lattice,
        cfg.p,
        &xi,
        &cfg.direction,
        cfg.eta,
        cfg.cap_k,
        &k,
        &n,
    )?;
    println!(
        "h_t = {}  f_t = {}  h_bar = {}  f_bar = {}  h_eta_k = {}  f_eta_k = {}",
        conn.h_t, conn.f_t, conn.h_bar, conn.f_bar_eta_k, conn.h_eta_k, conn.f_eta_k
    );
    sink.write_json("oracle_h.json", &conn)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_renewal(
    _a: &OracleArgs,
    cfg: &RunConfig,
    sink: &mut OutputSink,
    lattice: &LatticeBox,
    sites: &[Vec<i64>],
) -> AppResult<ExitCode> {
    let [k, n] = two(sites, "renewal needs --sites \"k;n\"")?;
    let xi = DirectionalNorm::euclidean(2, 1.0);
    let check = oracle::verify_renewal(
        lattice,
        cfg.p,
        &xi,
        &cfg.direction,
        cfg.eta,
        cfg.cap_k,
        &k,
        &n,
        cfg.strip_width.max(1) as usize,
    )?;
    println!(
        "renewal lhs = {}  rhs = {}  residual = {:e}",
        check.lhs, check.rhs, check.residual
    );
    sink.write_json("renewal_check.json", &check)?;
    if check.residual > 1e-12 {
        return Err(AppError::Stat(format!(
            "renewal residual {:e} exceeds 1e-12",
            check.residual
        )));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_xi(a: &XiArgs, cfg: &mut RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    if let Some(d) = &a.direction {
        cfg.direction = parse_floats(d)?;
    }
    if let Some(n) = &a.n_list {
        cfg.n_list = parse_ints(n)?;
    }
    if a.override_guard {
        cfg.override_guard = true;
    }
    let est = xi::estimate_xi(
        cfg.p,
        &cfg.direction,
        &cfg.n_list,
        cfg.trials,
        cfg.master_seed,
        cfg.margin,
        cfg.override_guard,
    )?;
    let mut csv = String::from("n,hits,trials,mean,minus_log_p,sigma\n");
    for r in &est.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.n, r.hits, r.trials, r.mean, r.minus_log_p, r.sigma
        )
        .unwrap();
    }
    sink.write("xi.csv", csv.as_bytes())?;
    sink.write_json("xi.json", &est)?;
    if let Some(path) = &a.tab_append {
        let (dir, val) = xi::tabulation_row(&est);
        let mut row = String::new();
        for c in &dir {
            write!(row, "{c},").unwrap();
        }
        writeln!(row, "{val}").unwrap();
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        f.write_all(row.as_bytes())?;
    }
    println!(
        "xi_hat = {} +- {} (intercept {}), rows {}, unusable {:?}",
        est.slope,
        est.slope_stderr,
        est.intercept,
        est.rows.len(),
        est.unusable_n
    );
    // asserted checks: positive slope; axis bound against the direct path
    if est.slope <= 0.0 {
        return Err(AppError::Stat(format!("slope {} not positive", est.slope)));
    }
    let is_axis = cfg.direction.iter().filter(|v| **v != 0.0).count() == 1;
    if is_axis {
        let bound = -(cfg.p.ln());
        if est.slope > bound + 3.0 * est.slope_stderr {
            return Err(AppError::Stat(format!(
                "axis slope {} exceeds -ln p = {bound} beyond 3 sigma",
                est.slope
            )));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oz(a: &OzArgs, cfg: &mut RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    if let Some(d) = &a.direction {
        cfg.direction = parse_floats(d)?;
    }
    if let Some(n) = &a.n_list {
        cfg.n_list = parse_ints(n)?;
    }
    let xi_hat = match a.xi_hat {
        Some(v) => v,
        None => {
            xi::estimate_xi(
                cfg.p,
                &cfg.direction,
                &cfg.n_list,
                cfg.trials,
                cfg.master_seed,
                cfg.margin,
                cfg.override_guard,
            )?
            .slope
        }
    };
    let scan = oz::oz_prefactor_scan(
        cfg.p,
        &cfg.direction,
        &cfg.n_list,
        cfg.trials,
        cfg.master_seed,
        cfg.margin,
        xi_hat,
    )?;
    let mut csv = String::from("n,mean,stderr,rescaled\n");
    for r in &scan.rows {
        writeln!(csv, "{},{},{},{}", r.n, r.mean, r.stderr, r.rescaled).unwrap();
    }
    sink.write("oz.csv", csv.as_bytes())?;
    sink.write_json("oz.json", &scan)?;
    println!("flatness = {} over {} rows", scan.flatness, scan.rows.len());
    Ok(ExitCode::SUCCESS)
}

fn anchors_from(cfg: &RunConfig) -> AppResult<[Vec<f64>; 3]> {
    if cfg.anchors.len() != 3 {
        return Err(AppError::Config("need exactly three anchors".into()));
    }
    Ok([
        cfg.anchors[0].clone(),
        cfg.anchors[1].clone(),
        cfg.anchors[2].clone(),
    ])
}

fn cmd_llt(a: &LltArgs, cfg: &mut RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    if let Some(s) = &a.anchors {
        cfg.anchors = parse_float_sites(s)?;
    }
    if let Some(b) = a.beta {
        cfg.beta = b;
    }
    let n_scale = a.n_scale.unwrap_or(24);
    let norm = parse_norm(&a.norm)?;
    let triple = anchors_from(cfg)?;
    let report = llt::llt_junction_histogram(
        &norm,
        cfg.p,
        &triple,
        n_scale,
        cfg.trials,
        cfg.master_seed,
        cfg.margin,
        cfg.beta,
    )?;
    sink.write_json("llt.json", &report)?;
    println!(
        "conditioned {} / {} trials, junctions {}, cov rel error {:.4}, spread fraction {:.5}",
        report.conditioned,
        report.trials,
        report.with_junction,
        report.cov_rel_error,
        report.spread_fraction
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_tail(a: &TailArgs, cfg: &mut RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    if let Some(s) = &a.anchors {
        cfg.anchors = parse_float_sites(s)?;
    }
    if let Some(n) = &a.n_list {
        cfg.n_list = parse_ints(n)?;
    }
    if let Some(al) = &a.alphas {
        cfg.alphas = parse_floats(al)?;
    }
    let norm = parse_norm(&a.norm)?;
    let triple = anchors_from(cfg)?;
    let report = tail::far_junction_tail(
        &norm,
        cfg.p,
        &triple,
        &cfg.alphas,
        &cfg.n_list,
        cfg.trials,
        cfg.master_seed,
        cfg.margin,
    )?;
    let mut csv = String::from("n,alpha,conditioned,far_hits,ratio,stderr\n");
    for row in &report.rows {
        for (ai, &alpha) in report.alphas.iter().enumerate() {
            let (r, se) = row.ratio(ai);
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                row.n, alpha, row.conditioned, row.far_hits[ai], r, se
            )
            .unwrap();
        }
    }
    sink.write("tail.csv", csv.as_bytes())?;
    sink.write_json("tail.json", &report)?;
    // exact inclusion in alpha; monotone over N within error bars
    for row in &report.rows {
        for w in row.far_hits.windows(2) {
            if w[1] > w[0] {
                return Err(AppError::Stat(
                    "far-junction counts increased with alpha".into(),
                ));
            }
        }
    }
    for ai in 0..report.alphas.len() {
        for w in report.rows.windows(2) {
            let (r1, s1) = w[0].ratio(ai);
            let (r2, s2) = w[1].ratio(ai);
            if r1.is_finite() && r2.is_finite() && r2 > r1 + 3.0 * (s1 + s2) {
                return Err(AppError::Stat(format!(
                    "tail ratio rose from {r1} to {r2} between scales {} and {}",
                    w[0].n, w[1].n
                )));
            }
        }
    }
    println!("tail rows: {}", report.rows.len());
    Ok(ExitCode::SUCCESS)
}

fn load_or_sample(
    load: &Option<String>,
    box_spec: &str,
    trial: u64,
    cfg: &RunConfig,
) -> AppResult<BondConfiguration> {
    match load {
        Some(path) => {
            let bytes = std::fs::read(path)?;
            Ok(BondConfiguration::load(&mut bytes.as_slice())?)
        }
        None => {
            let lattice = parse_box(box_spec)?;
            Ok(BondConfiguration::sample(
                cfg.p,
                &lattice,
                cfg.master_seed,
                trial,
            )?)
        }
    }
}

#[derive(serde::Serialize)]
struct RenewalOut {
    flags: perclab::renewal::ConnectionFlags,
    report: perclab::renewal::BreakPointReport,
}

fn cmd_renewal(a: &RenewalArgs, cfg: &RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    let config = load_or_sample(&a.load, &a.r#box, a.trial, cfg)?;
    let k = parse_site(&a.k)?;
    let n = parse_site(&a.n)?;
    let t = parse_floats(&a.t)?;
    let norm = parse_norm(&a.norm)?;
    let ctx = DirectionContext::new(&norm, &t, cfg.eta, cfg.cap_k)?;
    let flags = classify_connection(&config, &ctx, &k, &n)?;
    let report = eta_k_break_points(&config, &ctx, &k, &n);
    match report {
        Ok(report) => {
            println!(
                "flags: {:?}\nbreaks: {} plain, head {:?}, {} chain members",
                flags,
                report.t_break_points.len(),
                report.chain_head,
                report.eta_k_break_points.len()
            );
            sink.write_json("renewal.json", &RenewalOut { flags, report })?;
        }
        Err(PercError::NotConnected(_, _)) => {
            println!("flags: {flags:?}\npair not connected; no break report");
            sink.write_json("renewal_flags.json", &flags)?;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct SkeletonOut {
    tree: perclab::renewal::tree::TreeSkeleton,
    delta_good: perclab::renewal::tree::DeltaGoodReport,
}

fn cmd_skeleton(a: &SkeletonArgs, cfg: &RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    let config = load_or_sample(&a.load, &a.r#box, a.trial, cfg)?;
    let k = parse_site(&a.k)?;
    let targets = parse_sites(&a.targets)?;
    let [t1, t2, t3] = three(&targets, "skeleton needs --targets \"a;b;c\"")?;
    let norm = parse_norm(&a.norm)?;
    let witness = perclab::event_f(&config, &k, &t1, &t2, &t3)?.ok_or_else(|| {
        AppError::Stat("no three-armed witness from k to the targets".into())
    })?;
    let mut tree =
        perclab::renewal::tree::tree_skeleton(&config, &witness, cfg.m_scale, &norm)?;
    let verdict = perclab::renewal::tree::delta_good(
        &mut tree,
        &norm,
        cfg.eta,
        cfg.delta,
        cfg.r_window,
    )?;
    println!(
        "tree: {} cluster sites, leaves {:?}, coverage {}, delta-good {}",
        tree.cluster_size,
        tree.leaves.iter().map(Vec::len).collect::<Vec<_>>(),
        tree.coverage_ok,
        verdict.verdict
    );
    sink.write_json(
        "skeleton.json",
        &SkeletonOut {
            tree,
            delta_good: verdict,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_massgap(a: &MassgapArgs, cfg: &mut RunConfig, sink: &mut OutputSink) -> AppResult<ExitCode> {
    if let Some(l) = &a.lengths {
        cfg.lengths = parse_ints(l)?;
    }
    if let Some(w) = a.width {
        cfg.strip_width = w;
    }
    let cap_k = a.cap_k.unwrap_or(0.15);
    let norm = parse_norm(&a.norm)?;
    let rows = massgap::mass_gap_scan(
        cfg.p,
        &norm,
        &cfg.direction,
        cfg.eta,
        cap_k,
        cfg.strip_width,
        &cfg.lengths,
    )?;
    let verdict = massgap::assess(&rows);
    let mut csv = String::from("length,h_t,f_t,h_bar,f_bar,ratio_bar,ratio_plain\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.length, r.h_t, r.f_t, r.h_bar, r.f_bar, r.ratio_bar, r.ratio_plain
        )
        .unwrap();
    }
    sink.write("massgap.csv", csv.as_bytes())?;
    sink.write_json("massgap.json", &verdict)?;
    println!("massgap verdict: {verdict:?}");
    if !(verdict.h_bar_decreasing && verdict.f_bar_decreasing && verdict.plain_ratio_decreasing)
    {
        return Err(AppError::Stat("mass-gap decay verdict failed".into()));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(a: &ReplayArgs) -> AppResult<ExitCode> {
    let text = std::fs::read_to_string(&a.manifest)?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| AppError::Config(format!("bad manifest: {e}")))?;
    let dir = std::path::Path::new(&a.manifest)
        .parent()
        .unwrap_or_else(|| std::path::Path::new("."));
    verify_outputs(&manifest, dir).map_err(AppError::Stat)?;
    println!(
        "manifest verified: {} outputs byte-identical",
        manifest.outputs.len()
    );
    Ok(ExitCode::SUCCESS)
}
