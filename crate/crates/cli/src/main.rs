//! Command line front end: self-verification, single-point certificates,
//! parameter sweeps with CSV/JSON emission, and mask file exchange.
//!
//! Exit codes: 0 success, 1 check violation, 2 usage or config error,
//! 3 I/O error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use phasestab::adapters::{
    masked_fourier_family, stft_family, verify_masked_fourier_identity, verify_stft_identity,
    MaskedFourierSpec, StftSpec,
};
use phasestab::bounds::{fit_scaling, ScalingFit};
use phasestab::io::{load_family, save_family};
use phasestab::measurement::{
    measure, random_family, two_shot_family, windowed_fourier_family, FamilyTag, MapKind,
    MaskFamily, MeasurementGeometry,
};
use phasestab::oracle;
use phasestab::signal::{metric_d1, metric_d2, ComplexSignal};
use phasestab::witness::{certify, improve_witness, Certificate, WitnessPair};

#[derive(Parser)]
#[command(
    name = "phasestab",
    version,
    about = "Certify lower Lipschitz bounds for phase retrieval from locally supported measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run self-checks: metric closed forms vs oracles, exact collisions,
    /// and the measurement-equivalence identities
    Verify(VerifyArgs),
    /// Build a family and witness pair for one geometry point and print the
    /// certified ratio
    Certify(CertifyArgs),
    /// Evaluate certificates over a parameter grid, emitting one row per
    /// point plus a scaling fit when exactly one axis varies
    Sweep(SweepArgs),
    /// Export or import mask families as JSON files
    Masks(MasksArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Signal length (default 16, or taken from the mask file)
    #[arg(long)]
    d: Option<usize>,
    /// Shift count; the stride is d/L (default: L = d)
    #[arg(long = "L")]
    shift_count: Option<usize>,
    /// Mask support length (default 4, or taken from the mask file)
    #[arg(long)]
    delta: Option<usize>,
    /// Seed for the randomized trials
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional mask file to validate and include in the collision check
    masks: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Signal length
    #[arg(long)]
    d: usize,
    /// Shift count; the stride is d/L (default: L = d)
    #[arg(long = "L")]
    shift_count: Option<usize>,
    /// Mask support length
    #[arg(long)]
    delta: usize,
    /// Lower magnitude of the witness class (p = 0 exhibits a collision)
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Upper magnitude of the witness class
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Decay parameter for windowed-fourier masks
    #[arg(long)]
    b: Option<f64>,
    /// Mask family: two-shot, windowed-fourier, stft, masked-fourier, custom
    /// (the latter three need a mask file)
    #[arg(long)]
    family: Option<FamilyTag>,
    /// Measurement map: Y (squared magnitudes) or Z (magnitudes)
    #[arg(long, default_value = "Z")]
    map: MapKind,
    /// Seed for witness refinement
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refinement steps; 0 reports the atoll pair as built
    #[arg(long, default_value_t = 0)]
    budget: usize,
    /// Also write the certificate as JSON to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mask file supplying the family
    masks: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid of signal lengths, comma separated
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Grid of shift counts (default: L = d at every point)
    #[arg(long = "L", value_delimiter = ',')]
    shift_count: Option<Vec<usize>>,
    /// Grid of mask support lengths
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<usize>>,
    /// Grid of lower magnitudes
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Grid of upper magnitudes
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    /// Grid of decay parameters (windowed-fourier only)
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    /// Mask family: two-shot or windowed-fourier
    #[arg(long)]
    family: Option<FamilyTag>,
    /// Measurement map: Y or Z
    #[arg(long)]
    map: Option<MapKind>,
    /// Base seed; row i refines with seed + i
    #[arg(long)]
    seed: Option<u64>,
    /// Refinement steps per row; 0 reports the atoll pairs as built
    #[arg(long)]
    budget: Option<usize>,
    /// Output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<String>,
    /// JSON file mirroring these flags; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MasksArgs {
    #[command(subcommand)]
    command: MasksCommand,
}

#[derive(Subcommand)]
enum MasksCommand {
    /// Build a family from parameters and write it as a JSON file
    Export(MasksExportArgs),
    /// Load a family file, validate it, and print a summary
    Import(MasksImportArgs),
}

#[derive(Args)]
struct MasksExportArgs {
    /// Mask family: two-shot, windowed-fourier, stft, masked-fourier
    #[arg(long, default_value = "two-shot")]
    family: FamilyTag,
    /// Signal length
    #[arg(long)]
    d: usize,
    /// Mask support length
    #[arg(long)]
    delta: usize,
    /// Decay parameter for windowed-fourier masks (default 8)
    #[arg(long)]
    b: Option<f64>,
    /// Seed for the randomized stft / masked-fourier generators
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination file
    path: PathBuf,
}

#[derive(Args)]
struct MasksImportArgs {
    /// Expected signal length (checked against the file when given)
    #[arg(long)]
    d: Option<usize>,
    /// Expected support length (checked against the file when given)
    #[arg(long)]
    delta: Option<usize>,
    /// Source file
    path: PathBuf,
}

/// Failure carrying the exit code contract.
enum Failure {
    /// A numeric check or sweep row failed: exit 1.
    Check(String),
    /// Bad flags, config, or geometry: exit 2.
    Usage(String),
    /// Unreadable, unwritable, or corrupt files: exit 3.
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn io_failure<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Io(e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Masks(args) => match args.command {
            MasksCommand::Export(args) => cmd_masks_export(args),
            MasksCommand::Import(args) => cmd_masks_import(args),
        },
    }
}

// ---------------------------------------------------------------- verify --

struct CheckLine {
    name: &'static str,
    deviation: f64,
    /// deviation / tolerance, maximized over trials; passes iff <= 1.
    fraction: f64,
}

fn report(line: &CheckLine) -> bool {
    let passed = line.fraction <= 1.0;
    println!(
        "{} {}: max deviation {:.3e} = {:.2e} of tolerance",
        if passed { "PASS" } else { "FAIL" },
        line.name,
        line.deviation,
        line.fraction
    );
    passed
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let loaded = match &args.masks {
        Some(path) => Some(load_family(path).map_err(io_failure)?),
        None => None,
    };
    if let Some(family) = &loaded {
        if args.d.is_some_and(|d| d != family.d()) {
            return Err(usage(format!(
                "mask file has d = {}, which disagrees with --d",
                family.d()
            )));
        }
        if args.delta.is_some_and(|delta| delta != family.delta()) {
            return Err(usage(format!(
                "mask file has delta = {}, which disagrees with --delta",
                family.delta()
            )));
        }
    }
    let d = loaded.as_ref().map(|f| f.d()).or(args.d).unwrap_or(16);
    let delta = loaded
        .as_ref()
        .map(|f| f.delta())
        .or(args.delta)
        .unwrap_or(4);
    let shift_count = args.shift_count.unwrap_or(d);
    let geometry = MeasurementGeometry::new(d, shift_count, delta).map_err(usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);

    let lines = [
        check_d2_closed_form(&mut rng, d),
        check_d1_closed_form(&mut rng, d),
        check_collision(&mut rng, &geometry, loaded.as_ref()),
        check_stft_identity(&mut rng, &geometry),
        check_masked_fourier_identity(&mut rng, &geometry),
    ];
    let failed = lines.iter().filter(|line| !report(line)).count();
    if failed > 0 {
        return Err(Failure::Check(format!(
            "{failed} of {} verification checks failed",
            lines.len()
        )));
    }
    println!(
        "all checks passed at d={d}, L={}, delta={delta}",
        geometry.shift_count()
    );
    Ok(())
}

fn random_signal(rng: &mut ChaCha8Rng, d: usize) -> ComplexSignal<f64> {
    ComplexSignal::new(
        (0..d)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .expect("random entries are finite")
}

fn check_d2_closed_form(rng: &mut ChaCha8Rng, d: usize) -> CheckLine {
    let mut line = CheckLine {
        name: "closed-form d2 vs phase-grid oracle",
        deviation: 0.0,
        fraction: 0.0,
    };
    for _ in 0..25 {
        let x = random_signal(rng, d);
        let y = random_signal(rng, d);
        let closed = metric_d2(&x, &y).expect("equal lengths");
        let grid = oracle::d2_phase_grid(&x, &y, 10_000).expect("equal lengths");
        let deviation = (closed - grid).abs();
        let fraction = deviation / (1e-4 * grid);
        if fraction > line.fraction {
            line.fraction = fraction;
            line.deviation = deviation;
        }
    }
    line
}

fn check_d1_closed_form(rng: &mut ChaCha8Rng, d: usize) -> CheckLine {
    let mut line = CheckLine {
        name: "closed-form d1 vs trace-norm oracle",
        deviation: 0.0,
        fraction: 0.0,
    };
    for _ in 0..25 {
        let x = random_signal(rng, d);
        let y = random_signal(rng, d);
        let closed = metric_d1(&x, &y).expect("equal lengths");
        let trace = oracle::d1_trace_norm(&x, &y).expect("equal lengths");
        let deviation = (closed - trace).abs();
        let fraction = deviation / (1e-10 * trace);
        if fraction > line.fraction {
            line.fraction = fraction;
            line.deviation = deviation;
        }
    }
    line
}

/// The p = 0 atoll pair must collide exactly under every family supported on
/// 1..=delta: random families, plus the loaded one when present.
fn check_collision(
    rng: &mut ChaCha8Rng,
    geometry: &MeasurementGeometry,
    loaded: Option<&MaskFamily<f64>>,
) -> CheckLine {
    let mut line = CheckLine {
        name: "exact collision of the unit atoll pair",
        deviation: 0.0,
        fraction: 0.0,
    };
    let d = geometry.d();
    let delta = geometry.delta();
    let pair = WitnessPair::<f64>::atoll_unit(d, delta).expect("valid geometry");
    let mut families: Vec<MaskFamily<f64>> = (0..10)
        .map(|_| random_family(d, delta, 2 * delta - 1, rng).expect("valid geometry"))
        .collect();
    if let Some(family) = loaded {
        families.push(family.clone());
    }
    for family in &families {
        let scale = family.sup_norm() * delta as f64;
        for (kind, power) in [(MapKind::Z, 1i32), (MapKind::Y, 2)] {
            let plus = measure(family, geometry, pair.x_plus(), kind).expect("valid inputs");
            let minus = measure(family, geometry, pair.x_minus(), kind).expect("valid inputs");
            let deviation = plus.max_abs_difference(&minus).expect("same shape");
            let fraction = deviation / (1e-12 * scale.powi(power));
            if fraction > line.fraction {
                line.fraction = fraction;
                line.deviation = deviation;
            }
        }
    }
    line
}

fn check_stft_identity(rng: &mut ChaCha8Rng, geometry: &MeasurementGeometry) -> CheckLine {
    let mut line = CheckLine {
        name: "stft magnitude identity",
        deviation: 0.0,
        fraction: 0.0,
    };
    for _ in 0..25 {
        let spec = StftSpec::random(geometry.d(), geometry.delta(), 3, rng).expect("valid");
        let x = random_signal(rng, geometry.d());
        let deviation = verify_stft_identity(&spec, geometry, &x).expect("valid inputs");
        let fraction = deviation / (1e-9 * x.norm() * spec.window().one_norm());
        if fraction > line.fraction {
            line.fraction = fraction;
            line.deviation = deviation;
        }
    }
    line
}

fn check_masked_fourier_identity(
    rng: &mut ChaCha8Rng,
    geometry: &MeasurementGeometry,
) -> CheckLine {
    let mut line = CheckLine {
        name: "masked-fourier magnitude identity",
        deviation: 0.0,
        fraction: 0.0,
    };
    for _ in 0..25 {
        let spec = MaskedFourierSpec::random(geometry.d(), geometry.delta(), 3, rng).expect("valid");
        let x = random_signal(rng, geometry.d());
        let deviation = verify_masked_fourier_identity(&spec, geometry, &x).expect("valid inputs");
        let sup = spec
            .vectors()
            .iter()
            .map(|w| w.sup_norm())
            .fold(0.0f64, f64::max);
        let fraction = deviation / (1e-9 * geometry.d() as f64 * x.norm() * sup);
        if fraction > line.fraction {
            line.fraction = fraction;
            line.deviation = deviation;
        }
    }
    line
}

// --------------------------------------------------------------- certify --

fn cmd_certify(args: CertifyArgs) -> Result<(), Failure> {
    let shift_count = args.shift_count.unwrap_or(args.d);
    let geometry = MeasurementGeometry::new(args.d, shift_count, args.delta).map_err(usage)?;
    let family = certify_family(&args)?;
    let mut pair = WitnessPair::atoll(args.d, args.delta, args.p, args.q).map_err(usage)?;

    let mut refined_from = None;
    if args.budget > 0 {
        let base = certify(&family, &geometry, &pair, args.map).map_err(usage)?;
        pair = improve_witness(&family, &geometry, &pair, args.map, args.budget, args.seed)
            .map_err(usage)?;
        refined_from = Some(base.ratio);
    }
    let cert = certify(&family, &geometry, &pair, args.map).map_err(usage)?;

    println!(
        "geometry: d={}, L={}, a={}, delta={}",
        geometry.d(),
        geometry.shift_count(),
        geometry.stride(),
        geometry.delta()
    );
    println!(
        "family:   {}, K={}, sup norm {:e}",
        family.tag(),
        family.mask_count(),
        family.sup_norm()
    );
    println!(
        "witness:  atoll class, p={}, q={}, eta={}",
        args.p,
        args.q,
        pair.eta()
    );
    if let Some(base) = refined_from {
        println!(
            "refined:  budget={}, seed={}, ratio {} -> {}",
            args.budget,
            args.seed,
            fmt_ratio(base),
            fmt_ratio(cert.ratio)
        );
    }
    println!();
    print!("{cert}");

    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&cert).map_err(io_failure)?;
        fs::write(path, json + "\n").map_err(io_failure)?;
        println!("wrote certificate to {}", path.display());
    }
    Ok(())
}

fn fmt_ratio(ratio: Option<f64>) -> String {
    match ratio {
        Some(r) => format!("{r:e}"),
        None => "inf".to_string(),
    }
}

fn certify_family(args: &CertifyArgs) -> Result<MaskFamily<f64>, Failure> {
    if let Some(path) = &args.masks {
        let family = load_family(path).map_err(io_failure)?;
        if family.d() != args.d || family.delta() != args.delta {
            return Err(usage(format!(
                "mask file geometry (d={}, delta={}) disagrees with the flags",
                family.d(),
                family.delta()
            )));
        }
        if args.family.is_some_and(|tag| tag != family.tag()) {
            return Err(usage(format!(
                "mask file holds a {} family, which disagrees with --family",
                family.tag()
            )));
        }
        return Ok(family);
    }
    match args.family.unwrap_or(FamilyTag::TwoShot) {
        FamilyTag::TwoShot => two_shot_family(args.d, args.delta).map_err(usage),
        FamilyTag::WindowedFourier => {
            windowed_fourier_family(args.d, args.delta, args.b.unwrap_or(8.0)).map_err(usage)
        }
        other => Err(usage(format!(
            "family {other} needs a mask file argument; see `masks export`"
        ))),
    }
}

// ----------------------------------------------------------------- sweep --

/// JSON mirror of the sweep flags. Absent fields take the defaults below, so
/// a config file only needs the grids it actually varies.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepConfig {
    d: Vec<usize>,
    delta: Vec<usize>,
    #[serde(rename = "L")]
    shift_count: Vec<usize>,
    p: Vec<f64>,
    q: Vec<f64>,
    b: Vec<f64>,
    family: String,
    map: String,
    seed: u64,
    budget: usize,
    out: Option<PathBuf>,
    format: Option<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            d: Vec::new(),
            delta: Vec::new(),
            shift_count: Vec::new(),
            p: vec![1.0],
            q: vec![1.0],
            b: Vec::new(),
            family: FamilyTag::TwoShot.as_str().to_string(),
            map: MapKind::Z.as_str().to_string(),
            seed: 0,
            budget: 0,
            out: None,
            format: None,
        }
    }
}

enum OutputFormat {
    Csv,
    Json,
}

struct ResolvedSweep {
    d: Vec<usize>,
    delta: Vec<usize>,
    /// Explicit shift counts; None means L = d at every point.
    shift_count: Option<Vec<usize>>,
    p: Vec<f64>,
    q: Vec<f64>,
    /// One entry per b grid point; a single None for families without b.
    b: Vec<Option<f64>>,
    family: FamilyTag,
    map: MapKind,
    seed: u64,
    budget: usize,
    out: Option<PathBuf>,
    format: OutputFormat,
}

/// One grid point's results. CSV emits the fixed column set; JSON adds the
/// b coordinate and any per-row error.
#[derive(Serialize)]
struct SweepRow {
    d: usize,
    delta: usize,
    a: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "K")]
    k: usize,
    p: f64,
    q: f64,
    b: Option<f64>,
    family: String,
    map: String,
    signal_distance: Option<f64>,
    measurement_distance: Option<f64>,
    /// None with infinite_ratio set means the measurements collide exactly.
    ratio: Option<f64>,
    infinite_ratio: bool,
    rhs_no_const: Option<f64>,
    empirical_const: Option<f64>,
    wall_time: f64,
    error: Option<String>,
}

const CSV_HEADER: &str = "d,delta,a,L,K,p,q,family,map,signal_distance,\
                          measurement_distance,ratio,rhs_no_const,empirical_const,wall_time";

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let sweep = resolve_sweep(args)?;
    validate_grid(&sweep)?;

    let mut rows = Vec::new();
    for &d in &sweep.d {
        for &delta in &sweep.delta {
            let shift_counts = match &sweep.shift_count {
                Some(values) => values.clone(),
                None => vec![d],
            };
            for &l in &shift_counts {
                for &p in &sweep.p {
                    for &q in &sweep.q {
                        for &b in &sweep.b {
                            let index = rows.len() as u64;
                            rows.push(evaluate_row(&sweep, d, delta, l, p, q, b, index));
                        }
                    }
                }
            }
        }
    }

    let fit = grid_fit(&sweep, &rows);
    let body = match sweep.format {
        OutputFormat::Csv => render_csv(&sweep, &rows, fit.as_ref()),
        OutputFormat::Json => render_json(&rows, fit.as_ref())?,
    };
    match &sweep.out {
        Some(path) => fs::write(path, &body).map_err(io_failure)?,
        None => print!("{body}"),
    }

    let failed: Vec<&SweepRow> = rows.iter().filter(|row| row.error.is_some()).collect();
    if !failed.is_empty() {
        for row in &failed {
            eprintln!(
                "row d={}, delta={}, L={}, p={}, q={} failed: {}",
                row.d,
                row.delta,
                row.l,
                row.p,
                row.q,
                row.error.as_deref().unwrap_or("unknown")
            );
        }
        return Err(Failure::Check(format!("{} sweep rows failed", failed.len())));
    }
    Ok(())
}

fn resolve_sweep(args: SweepArgs) -> Result<ResolvedSweep, Failure> {
    let mut cfg = SweepConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
        cfg = serde_json::from_str(&text)
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    }
    if let Some(v) = args.d {
        cfg.d = v;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if let Some(v) = args.shift_count {
        cfg.shift_count = v;
    }
    if let Some(v) = args.p {
        cfg.p = v;
    }
    if let Some(v) = args.q {
        cfg.q = v;
    }
    if let Some(v) = args.b {
        cfg.b = v;
    }
    if let Some(v) = args.family {
        cfg.family = v.as_str().to_string();
    }
    if let Some(v) = args.map {
        cfg.map = v.as_str().to_string();
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.budget {
        cfg.budget = v;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if args.format.is_some() {
        cfg.format = args.format;
    }

    let family: FamilyTag = cfg.family.parse().map_err(usage)?;
    let map: MapKind = cfg.map.parse().map_err(usage)?;
    let format = match cfg.format.as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => return Err(usage(format!("unknown format {other:?}, expected csv or json"))),
    };

    let b = match family {
        FamilyTag::WindowedFourier => {
            let values = if cfg.b.is_empty() { vec![8.0] } else { cfg.b };
            values.into_iter().map(Some).collect()
        }
        _ if !cfg.b.is_empty() => {
            return Err(usage("--b applies to windowed-fourier families only"));
        }
        _ => vec![None],
    };
    if !matches!(family, FamilyTag::TwoShot | FamilyTag::WindowedFourier) {
        return Err(usage(format!(
            "sweeps need a family parameterized by the grid, not {family}; \
             use certify with a mask file instead"
        )));
    }

    Ok(ResolvedSweep {
        d: cfg.d,
        delta: cfg.delta,
        shift_count: if cfg.shift_count.is_empty() {
            None
        } else {
            Some(cfg.shift_count)
        },
        p: cfg.p,
        q: cfg.q,
        b,
        family,
        map,
        seed: cfg.seed,
        budget: cfg.budget,
        out: cfg.out,
        format,
    })
}

/// Every grid point must pass geometry and witness validation before any row
/// runs, so a bad grid is a usage error rather than a late partial failure.
fn validate_grid(sweep: &ResolvedSweep) -> Result<(), Failure> {
    for (name, empty) in [
        ("d", sweep.d.is_empty()),
        ("delta", sweep.delta.is_empty()),
        ("p", sweep.p.is_empty()),
        ("q", sweep.q.is_empty()),
    ] {
        if empty {
            return Err(usage(format!("grid for {name} is empty")));
        }
    }
    for &d in &sweep.d {
        for &delta in &sweep.delta {
            let shift_counts = match &sweep.shift_count {
                Some(values) => values.clone(),
                None => vec![d],
            };
            for &l in &shift_counts {
                MeasurementGeometry::new(d, l, delta)
                    .map_err(|e| usage(format!("grid point d={d}, L={l}, delta={delta}: {e}")))?;
            }
            if sweep.family == FamilyTag::TwoShot && delta < 2 {
                return Err(usage(format!(
                    "grid point delta={delta}: two-shot masks need delta >= 2"
                )));
            }
            for &p in &sweep.p {
                for &q in &sweep.q {
                    WitnessPair::<f64>::atoll(d, delta, p, q).map_err(|e| {
                        usage(format!("grid point d={d}, delta={delta}, p={p}, q={q}: {e}"))
                    })?;
                }
            }
        }
    }
    for &b in sweep.b.iter().flatten() {
        // rejects NaN along with the sign
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(b > 0.0) {
            return Err(usage(format!("decay parameter b={b} must be positive")));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evaluate_row(
    sweep: &ResolvedSweep,
    d: usize,
    delta: usize,
    l: usize,
    p: f64,
    q: f64,
    b: Option<f64>,
    index: u64,
) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        d,
        delta,
        a: d / l,
        l,
        k: 2 * delta - 1,
        p,
        q,
        b,
        family: sweep.family.as_str().to_string(),
        map: sweep.map.as_str().to_string(),
        signal_distance: None,
        measurement_distance: None,
        ratio: None,
        infinite_ratio: false,
        rhs_no_const: None,
        empirical_const: None,
        wall_time: 0.0,
        error: None,
    };
    match row_certificate(sweep, d, delta, l, p, q, b, index) {
        Ok((cert, mask_count)) => {
            row.k = mask_count;
            row.signal_distance = Some(cert.signal_distance);
            row.measurement_distance = Some(cert.measurement_distance);
            row.infinite_ratio = cert.ratio.is_none();
            row.ratio = cert.ratio;
            row.rhs_no_const = cert.rhs_no_const;
            row.empirical_const = cert.empirical_const;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row.wall_time = start.elapsed().as_secs_f64();
    row
}

#[allow(clippy::too_many_arguments)]
fn row_certificate(
    sweep: &ResolvedSweep,
    d: usize,
    delta: usize,
    l: usize,
    p: f64,
    q: f64,
    b: Option<f64>,
    index: u64,
) -> phasestab::Result<(Certificate<f64>, usize)> {
    let geometry = MeasurementGeometry::new(d, l, delta)?;
    let family = match sweep.family {
        FamilyTag::TwoShot => two_shot_family(d, delta)?,
        FamilyTag::WindowedFourier => {
            windowed_fourier_family(d, delta, b.expect("resolved for windowed-fourier"))?
        }
        _ => unreachable!("sweeps are restricted to parameterized families"),
    };
    let mut pair = WitnessPair::atoll(d, delta, p, q)?;
    if sweep.budget > 0 {
        pair = improve_witness(
            &family,
            &geometry,
            &pair,
            sweep.map,
            sweep.budget,
            sweep.seed.wrapping_add(index),
        )?;
    }
    let cert = certify(&family, &geometry, &pair, sweep.map)?;
    Ok((cert, family.mask_count()))
}

/// Fit ratio against the single varying axis, requiring at least 3 distinct
/// abscissas and leaving the output fit-free when 0 or 2+ axes vary.
fn grid_fit(sweep: &ResolvedSweep, rows: &[SweepRow]) -> Option<ScalingFit<f64>> {
    let mut axes: Vec<(&str, Vec<f64>)> = vec![
        ("d", rows.iter().map(|r| r.d as f64).collect()),
        ("delta", rows.iter().map(|r| r.delta as f64).collect()),
        ("p", rows.iter().map(|r| r.p).collect()),
        ("q", rows.iter().map(|r| r.q).collect()),
    ];
    if sweep.shift_count.is_some() {
        axes.push(("L", rows.iter().map(|r| r.l as f64).collect()));
    }
    if sweep.b.iter().any(Option::is_some) {
        axes.push(("b", rows.iter().filter_map(|r| r.b).collect()));
    }

    let distinct = |values: &[f64]| {
        let mut bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
        bits.sort_unstable();
        bits.dedup();
        bits.len()
    };
    let varying: Vec<&(&str, Vec<f64>)> =
        axes.iter().filter(|(_, values)| distinct(values) >= 2).collect();
    let [(axis, values)] = varying.as_slice() else {
        return None;
    };
    if distinct(values) < 3 {
        return None;
    }

    let points: Vec<(f64, f64)> = rows
        .iter()
        .zip(values.iter())
        .filter(|(row, _)| row.error.is_none())
        .filter_map(|(row, &x)| row.ratio.map(|ratio| (x, ratio)))
        .collect();
    fit_scaling(axis, &points).ok()
}

fn join_usize(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn fmt_e(value: f64) -> String {
    format!("{value:.16e}")
}

fn csv_cell(value: Option<f64>) -> String {
    value.map(fmt_e).unwrap_or_default()
}

fn render_csv(sweep: &ResolvedSweep, rows: &[SweepRow], fit: Option<&ScalingFit<f64>>) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# family={} map={} seed={} budget={}",
        sweep.family, sweep.map, sweep.seed, sweep.budget
    )
    .unwrap();
    let l_part = match &sweep.shift_count {
        Some(values) => join_usize(values),
        None => "d".to_string(),
    };
    let b_part = if sweep.b.iter().any(Option::is_some) {
        let values: Vec<f64> = sweep.b.iter().flatten().copied().collect();
        format!(" b={}", join_f64(&values))
    } else {
        String::new()
    };
    writeln!(
        out,
        "# grid d={} delta={} L={} p={} q={}{}",
        join_usize(&sweep.d),
        join_usize(&sweep.delta),
        l_part,
        join_f64(&sweep.p),
        join_f64(&sweep.q),
        b_part
    )
    .unwrap();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for row in rows {
        let ratio = if row.error.is_some() {
            String::new()
        } else if row.infinite_ratio {
            "inf".to_string()
        } else {
            csv_cell(row.ratio)
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.d,
            row.delta,
            row.a,
            row.l,
            row.k,
            fmt_e(row.p),
            fmt_e(row.q),
            row.family,
            row.map,
            csv_cell(row.signal_distance),
            csv_cell(row.measurement_distance),
            ratio,
            csv_cell(row.rhs_no_const),
            csv_cell(row.empirical_const),
            fmt_e(row.wall_time),
        )
        .unwrap();
    }
    if let Some(fit) = fit {
        writeln!(
            out,
            "# fit axis={} exponent={} amplitude={} r_squared={} points={}",
            fit.axis,
            fmt_e(fit.exponent),
            fmt_e(fit.amplitude),
            fmt_e(fit.r_squared),
            fit.points.len()
        )
        .unwrap();
    }
    out
}

fn render_json(rows: &[SweepRow], fit: Option<&ScalingFit<f64>>) -> Result<String, Failure> {
    #[derive(Serialize)]
    struct Document<'a> {
        rows: &'a [SweepRow],
        fit: Option<&'a ScalingFit<f64>>,
    }
    let json = serde_json::to_string_pretty(&Document { rows, fit }).map_err(io_failure)?;
    Ok(json + "\n")
}

// ----------------------------------------------------------------- masks --

fn cmd_masks_export(args: MasksExportArgs) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mask_count = 2 * args.delta - 1;
    let family = match args.family {
        FamilyTag::TwoShot => two_shot_family(args.d, args.delta).map_err(usage)?,
        FamilyTag::WindowedFourier => {
            windowed_fourier_family(args.d, args.delta, args.b.unwrap_or(8.0)).map_err(usage)?
        }
        FamilyTag::Stft => {
            let spec = StftSpec::random(args.d, args.delta, mask_count, &mut rng).map_err(usage)?;
            stft_family(&spec).map_err(usage)?
        }
        FamilyTag::MaskedFourier => {
            let spec =
                MaskedFourierSpec::random(args.d, args.delta, mask_count, &mut rng).map_err(usage)?;
            masked_fourier_family(&spec).map_err(usage)?
        }
        FamilyTag::Custom => {
            return Err(usage("custom families are imported from files, not exported"));
        }
    };
    save_family(&family, &args.path).map_err(io_failure)?;
    println!(
        "wrote {} family to {}: d={}, delta={}, K={}",
        family.tag(),
        args.path.display(),
        family.d(),
        family.delta(),
        family.mask_count()
    );
    Ok(())
}

fn cmd_masks_import(args: MasksImportArgs) -> Result<(), Failure> {
    let family = load_family(&args.path).map_err(io_failure)?;
    if args.d.is_some_and(|d| d != family.d()) {
        return Err(usage(format!(
            "mask file has d = {}, which disagrees with --d",
            family.d()
        )));
    }
    if args.delta.is_some_and(|delta| delta != family.delta()) {
        return Err(usage(format!(
            "mask file has delta = {}, which disagrees with --delta",
            family.delta()
        )));
    }
    println!(
        "loaded {} family from {}",
        family.tag(),
        args.path.display()
    );
    println!(
        "d={}, delta={}, K={}, sup norm {:e}",
        family.d(),
        family.delta(),
        family.mask_count(),
        family.sup_norm()
    );
    if let Some(b) = family.decay() {
        println!("decay parameter b={b}");
    }
    Ok(())
}
