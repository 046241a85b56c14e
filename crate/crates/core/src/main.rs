use clap::{Args, Parser, Subcommand, ValueEnum};
use starhairs::cli_io::{self, Command, MapSpec, RunConfig, Style, ViewportSpec};
use starhairs::Error;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "starhairs", version, about = "Rays, tracts and escaping sets of z^n·exp(P(z)+Q(1/z))")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output path of the main artifact.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads.
    #[arg(long, global = true, env = "STARHAIRS_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    style: Option<StyleArg>,
    /// Named map: arnold, disjoint, broken, landing, quadratic.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Comma-separated preset parameters.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Itinerary,
    Phase,
}

#[derive(Subcommand)]
enum Cmd {
    /// Orders, critical data, normalization radius and tracts.
    Info,
    /// Escape-time image and raster dump.
    Render(RenderArgs),
    /// Trace one ray tail.
    TraceRay(RayArgs),
    /// Periodic orbits, or the landing point of a periodic ray.
    Periodic(PeriodicArgs),
    /// Tract boundary polylines.
    Tracts(TractArgs),
    /// Expansivity and head-start report.
    Check(CheckArgs),
    /// Rays sharing an essential itinerary.
    Bouquet(BouquetArgs),
}

#[derive(Args, Default)]
struct ViewArgs {
    /// Viewport center as re,im.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Vec<f64>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    half_height: Option<f64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    max_iter: Option<u32>,
    #[arg(long)]
    escape_radius: Option<f64>,
    #[arg(long)]
    prefix_len: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    view: ViewArgs,
    /// Raster dump path.
    #[arg(long)]
    dump: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_count: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Overlay image path.
    #[arg(long)]
    overlay: Option<String>,
    #[command(flatten)]
    view: ViewArgs,
}

#[derive(Args)]
struct RayArgs {
    /// Address text, e.g. "[] ([(inf,0,0)])".
    #[arg(long)]
    address: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct PeriodicArgs {
    #[arg(long)]
    period: Option<usize>,
    /// Newton seed as re,im.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    seed: Vec<f64>,
    /// Seed on the unit circle and keep orbits on it.
    #[arg(long)]
    on_circle: bool,
    /// Land this periodic address instead of searching orbits.
    #[arg(long)]
    address: Option<String>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct TractArgs {
    /// First and last strip as a,b.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    strips: Vec<i64>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
}

#[derive(Args)]
struct BouquetArgs {
    /// Itinerary text, e.g. "[] ([inf])".
    #[arg(long)]
    itinerary: Option<String>,
    /// Tract list, e.g. "[(inf,0,0),(inf,0,1)]".
    #[arg(long)]
    symbols: Option<String>,
    #[arg(long)]
    max_period: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
}

fn pair(v: &[f64], name: &str) -> Result<Option<[f64; 2]>, Error> {
    match v {
        [] => Ok(None),
        [a, b] => Ok(Some([*a, *b])),
        _ => Err(Error::Usage(format!("--{name} takes two comma-separated numbers"))),
    }
}

fn apply_view(cfg: &mut RunConfig, v: &ViewArgs) -> Result<(), Error> {
    let center = pair(&v.center, "center")?;
    if center.is_some() || v.half_width.is_some() || v.half_height.is_some() || v.width.is_some() || v.height.is_some() {
        let base = cfg.viewport.clone().unwrap_or(ViewportSpec {
            center: [0.0, 0.0],
            half_width: 4.0,
            half_height: 4.0,
            width: 512,
            height: 512,
        });
        let half_width = v.half_width.unwrap_or(base.half_width);
        let width = v.width.unwrap_or(base.width);
        cfg.viewport = Some(ViewportSpec {
            center: center.unwrap_or(base.center),
            half_width,
            half_height: v.half_height.or(v.half_width.filter(|_| v.half_height.is_none())).unwrap_or(base.half_height),
            width,
            height: v.height.or(v.width.filter(|_| v.height.is_none())).unwrap_or(base.height),
        });
    }
    cfg.max_iter = v.max_iter.or(cfg.max_iter);
    cfg.escape_log_radius = v.escape_radius.or(cfg.escape_log_radius);
    cfg.prefix_len = v.prefix_len.or(cfg.prefix_len);
    Ok(())
}

fn apply_grid(cfg: &mut RunConfig, g: &GridArgs) -> Result<(), Error> {
    cfg.t_max = g.t_max.or(cfg.t_max);
    cfg.t_count = g.t_count.or(cfg.t_count);
    cfg.tol = g.tol.or(cfg.tol);
    cfg.overlay = g.overlay.clone().or(cfg.overlay.take());
    apply_view(cfg, &g.view)
}

fn build_config(cli: &Cli) -> Result<(Command, RunConfig), Error> {
    let from_file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
                cli_io::ConfigError::Syntax { line: e.line(), column: e.column(), msg: e.to_string() }
            })?;
            Some(cfg)
        }
        None => None,
    };
    let preset = cli.preset.clone().map(|name| MapSpec::Preset { name, params: cli.params.clone() });
    let mut cfg = match (from_file, preset) {
        (Some(mut c), Some(p)) => {
            c.map = p;
            c
        }
        (Some(c), None) => c,
        (None, Some(p)) => RunConfig::new(p),
        (None, None) => return Err(Error::Usage("a map is required: pass --preset or --config".into())),
    };
    cfg.out = cli.out.clone().or(cfg.out.take());
    cfg.threads = cli.threads.or(cfg.threads);
    if let Some(s) = cli.style {
        cfg.style = Some(match s {
            StyleArg::Itinerary => Style::Itinerary,
            StyleArg::Phase => Style::Phase,
        });
    }
    let cmd = match &cli.command {
        Cmd::Info => Command::Info,
        Cmd::Render(a) => {
            apply_view(&mut cfg, &a.view)?;
            cfg.dump = a.dump.clone().or(cfg.dump.take());
            Command::Render
        }
        Cmd::TraceRay(a) => {
            cfg.address = a.address.clone().or(cfg.address.take());
            apply_grid(&mut cfg, &a.grid)?;
            Command::TraceRay
        }
        Cmd::Periodic(a) => {
            cfg.period = a.period.or(cfg.period);
            if let Some(s) = pair(&a.seed, "seed")? {
                cfg.seed = Some(s);
            }
            if a.on_circle {
                cfg.on_circle = Some(true);
            }
            cfg.address = a.address.clone().or(cfg.address.take());
            apply_grid(&mut cfg, &a.grid)?;
            Command::Periodic
        }
        Cmd::Tracts(a) => {
            match a.strips.as_slice() {
                [] => {}
                [x, y] => cfg.strips = Some([*x, *y]),
                _ => return Err(Error::Usage("--strips takes two comma-separated integers".into())),
            }
            Command::Tracts
        }
        Cmd::Check(a) => {
            cfg.samples = a.samples.or(cfg.samples);
            cfg.pairs = a.pairs.or(cfg.pairs);
            cfg.rng_seed = a.rng_seed.or(cfg.rng_seed);
            Command::Check
        }
        Cmd::Bouquet(a) => {
            cfg.itinerary = a.itinerary.clone().or(cfg.itinerary.take());
            cfg.symbols = a.symbols.clone().or(cfg.symbols.take());
            cfg.max_period = a.max_period.or(cfg.max_period);
            apply_grid(&mut cfg, &a.grid)?;
            Command::Bouquet
        }
    };
    Ok((cmd, cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|(cmd, cfg)| {
        if let Some(t) = cfg.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
        }
        cli_io::run(cmd, &cfg)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
