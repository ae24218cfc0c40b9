use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use uvremap::baseline::transfer_affine;
use uvremap::cache::{load_map, save_map};
use uvremap::corr::load_correspondence;
use uvremap::error::Error;
use uvremap::fixtures::generate_fixture_set;
use uvremap::mesh::load_mesh;
use uvremap::metrics::{l1_distance, psnr, ssim, MetricsReport};
use uvremap::sampling::{
    build_sampling_map, fingerprint, resolve_pairs, BuildParams, DEFAULT_EPS,
};
use uvremap::texture::{load_png, save_png, Texture};
use uvremap::transfer::{apply, image_mask, roundtrip, BlendSettings, Fill, SampleMode};

#[derive(Parser)]
#[command(name = "uvremap", version, about = "UV texture retargeting toolkit")]
struct Cli {
    /// Pin the worker thread count (for determinism checks).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Precompute a sampling map and write it as a SMAP cache file.
    BuildMap(BuildMapArgs),
    /// Apply a cached sampling map to a source texture.
    Transfer(TransferArgs),
    /// Forward + reverse transfer with quality metrics vs the original.
    Roundtrip(RoundtripArgs),
    /// Time the per-triangle baseline against the cached fast path.
    Bench(BenchArgs),
    /// Generate the synthetic mesh/correspondence/texture fixture set.
    GenFixtures(GenFixturesArgs),
}

#[derive(Args)]
struct BuildMapArgs {
    #[arg(long)]
    src_mesh: PathBuf,
    #[arg(long)]
    tgt_mesh: PathBuf,
    #[arg(long)]
    corr: PathBuf,
    #[arg(long)]
    width: u32,
    #[arg(long)]
    height: u32,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

#[derive(Args)]
struct TransferArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    src_tex: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fill for uncovered pixels: "r,g,b" bytes, "#rrggbb", or a PNG path.
    #[arg(long)]
    fill: Option<String>,
    #[arg(long, default_value_t = 0)]
    feather: u32,
    #[arg(long)]
    nearest: bool,
    /// Hex fingerprint of the expected inputs; mismatch means stale cache.
    #[arg(long)]
    expect_fingerprint: Option<String>,
}

#[derive(Args)]
struct RoundtripArgs {
    #[arg(long)]
    fwd_map: PathBuf,
    #[arg(long)]
    rev_map: PathBuf,
    #[arg(long)]
    tex: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Metrics JSON destination; standard output when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    feather: u32,
    #[arg(long)]
    nearest: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    src_mesh: PathBuf,
    #[arg(long)]
    tgt_mesh: PathBuf,
    #[arg(long)]
    corr: PathBuf,
    #[arg(long)]
    width: u32,
    #[arg(long)]
    height: u32,
    #[arg(long)]
    tex: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    repeat: u32,
    /// Run the baseline with internal parallelism (fairness experiments;
    /// the conventional approach is single-threaded by default).
    #[arg(long)]
    parallel_baseline: bool,
}

#[derive(Args)]
struct GenFixturesArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    grid: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool already initialized");
    }
    let result = match cli.command {
        Command::BuildMap(a) => cmd_build_map(a),
        Command::Transfer(a) => cmd_transfer(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenFixtures(a) => cmd_gen_fixtures(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::StaleCache { .. } => 3,
        Error::ResolutionMismatch { .. } | Error::ShapeMismatch(_) => 4,
        _ => 1,
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_hex16(s: &str) -> Result<[u8; 16], Error> {
    let s = s.trim();
    if s.len() != 32 || !s.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(Error::Invalid(format!(
            "fingerprint must be 32 hex chars, got \"{s}\""
        )));
    }
    let mut out = [0u8; 16];
    for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
        out[i] = u8::from_str_radix(std::str::from_utf8(chunk).unwrap(), 16).unwrap();
    }
    Ok(out)
}

fn cmd_build_map(a: BuildMapArgs) -> Result<(), Error> {
    let src = load_mesh(&a.src_mesh)?;
    let tgt = load_mesh(&a.tgt_mesh)?;
    let corr = load_correspondence(&a.corr)?;
    let params = BuildParams {
        width: a.width,
        height: a.height,
        eps: a.eps,
    };
    let digest = fingerprint(&tgt, &src, &corr, &params);

    let start = Instant::now();
    let resolved = resolve_pairs(&tgt, &src, &corr)?;
    let map = build_sampling_map(&resolved.pairs, a.width, a.height, a.eps, digest);
    let precompute_s = start.elapsed().as_secs_f64();

    save_map(&map, &a.out)?;
    println!(
        "{}",
        serde_json::json!({
            "precompute_s": precompute_s,
            "width": a.width,
            "height": a.height,
            "mask_coverage": map.mask_coverage(),
            "skipped_faces": resolved.skipped_total(),
            "skipped_unmapped": resolved.skipped_unmapped,
            "skipped_degenerate": resolved.skipped_degenerate,
            "fingerprint": hex(&digest),
        })
    );
    Ok(())
}

fn parse_fill(spec: Option<&str>) -> Result<Fill, Error> {
    let Some(spec) = spec else {
        return Ok(Fill::None);
    };
    if let Some(hexpart) = spec.strip_prefix('#') {
        if hexpart.len() == 6 && hexpart.chars().all(|c| c.is_ascii_hexdigit()) {
            let v = u32::from_str_radix(hexpart, 16).unwrap();
            return Ok(Fill::Color([
                ((v >> 16) & 0xff) as f32 / 255.0,
                ((v >> 8) & 0xff) as f32 / 255.0,
                (v & 0xff) as f32 / 255.0,
            ]));
        }
        return Err(Error::Invalid(format!("bad fill color \"{spec}\"")));
    }
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() == 3 {
        if let (Ok(r), Ok(g), Ok(b)) = (
            parts[0].trim().parse::<u8>(),
            parts[1].trim().parse::<u8>(),
            parts[2].trim().parse::<u8>(),
        ) {
            return Ok(Fill::Color([
                r as f32 / 255.0,
                g as f32 / 255.0,
                b as f32 / 255.0,
            ]));
        }
    }
    Ok(Fill::Texture(load_png(spec)?))
}

fn cmd_transfer(a: TransferArgs) -> Result<(), Error> {
    let expected = a
        .expect_fingerprint
        .as_deref()
        .map(parse_hex16)
        .transpose()?;
    let map = load_map(&a.map, expected)?;
    let src = load_png(&a.src_tex)?;
    let blend = BlendSettings {
        fill: parse_fill(a.fill.as_deref())?,
        feather_radius: a.feather,
    };
    let mode = if a.nearest {
        SampleMode::Nearest
    } else {
        SampleMode::Bilinear
    };

    let start = Instant::now();
    let out = apply(&map, &src, &blend, mode)?;
    let apply_s = start.elapsed().as_secs_f64();

    save_png(&out, &a.out)?;
    println!(
        "{}",
        serde_json::json!({
            "apply_s": apply_s,
            "mask_coverage": map.mask_coverage(),
        })
    );
    Ok(())
}

fn metrics_report(
    a: &Texture,
    b: &Texture,
    mask: Option<&[u8]>,
    coverage: f64,
    timings: BTreeMap<String, f64>,
) -> Result<MetricsReport, Error> {
    Ok(MetricsReport {
        l1: l1_distance(a, b, mask)?,
        ssim: ssim(a, b, mask)?,
        psnr: psnr(a, b, mask)?,
        lpips: None,
        mask_coverage: coverage,
        timings,
    })
}

fn cmd_roundtrip(a: RoundtripArgs) -> Result<(), Error> {
    let fwd = load_map(&a.fwd_map, None)?;
    let rev = load_map(&a.rev_map, None)?;
    let original = load_png(&a.tex)?;
    let blend = BlendSettings {
        fill: Fill::None,
        feather_radius: a.feather,
    };
    let mode = if a.nearest {
        SampleMode::Nearest
    } else {
        SampleMode::Bilinear
    };

    let start = Instant::now();
    let reconstructed = roundtrip(&fwd, &rev, &original, &blend, mode)?;
    let roundtrip_s = start.elapsed().as_secs_f64();
    save_png(&reconstructed, &a.out)?;

    let mask = image_mask(&rev);
    let mut timings = BTreeMap::new();
    timings.insert("roundtrip_s".to_string(), roundtrip_s);
    let full = metrics_report(&original, &reconstructed, None, 1.0, timings.clone())?;
    let masked = metrics_report(
        &original,
        &reconstructed,
        Some(&mask),
        rev.mask_coverage(),
        timings,
    )?;
    let report = serde_json::json!({ "full": full, "masked": masked });
    let text = serde_json::to_string_pretty(&report).unwrap();
    match &a.report {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), Error> {
    let src = load_mesh(&a.src_mesh)?;
    let tgt = load_mesh(&a.tgt_mesh)?;
    let corr = load_correspondence(&a.corr)?;
    let tex = load_png(&a.tex)?;
    let params = BuildParams {
        width: a.width,
        height: a.height,
        eps: DEFAULT_EPS,
    };
    let digest = fingerprint(&tgt, &src, &corr, &params);
    let blend = BlendSettings::default();

    let start = Instant::now();
    let resolved = resolve_pairs(&tgt, &src, &corr)?;
    let map = build_sampling_map(&resolved.pairs, a.width, a.height, DEFAULT_EPS, digest);
    let precompute_s = start.elapsed().as_secs_f64();

    let mut apply_times = Vec::new();
    let mut fast_out = None;
    for _ in 0..a.repeat {
        let t = Instant::now();
        let out = apply(&map, &tex, &blend, SampleMode::Bilinear)?;
        apply_times.push(t.elapsed().as_secs_f64());
        fast_out = Some(out);
    }
    let fast_out = fast_out.unwrap();

    let mut baseline_times = Vec::new();
    let mut baseline_out = None;
    for _ in 0..a.repeat {
        let t = Instant::now();
        let out = transfer_affine(
            &resolved.pairs,
            &tex,
            a.width,
            a.height,
            DEFAULT_EPS,
            &blend,
            SampleMode::Bilinear,
            a.parallel_baseline,
        )?;
        baseline_times.push(t.elapsed().as_secs_f64());
        baseline_out = Some(out);
    }
    let baseline_out = baseline_out.unwrap();

    let mask = image_mask(&map);
    let apply_s = median(&mut apply_times);
    let baseline_s = median(&mut baseline_times);
    println!(
        "{}",
        serde_json::json!({
            "precompute_s": precompute_s,
            "apply_s": apply_s,
            "baseline_s": baseline_s,
            "speedup": baseline_s / apply_s,
            "repeats": a.repeat,
            "baseline_parallel": a.parallel_baseline,
            "mask_coverage": map.mask_coverage(),
            "skipped_faces": resolved.skipped_total(),
            "agreement": {
                "l1": l1_distance(&fast_out, &baseline_out, Some(&mask))?,
                "psnr": if psnr(&fast_out, &baseline_out, Some(&mask))?.is_infinite() {
                    serde_json::Value::String("inf".into())
                } else {
                    serde_json::json!(psnr(&fast_out, &baseline_out, Some(&mask))?)
                },
            },
        })
    );
    Ok(())
}

fn cmd_gen_fixtures(a: GenFixturesArgs) -> Result<(), Error> {
    generate_fixture_set(&a.out_dir, a.grid, a.seed)?;
    println!(
        "{}",
        serde_json::json!({
            "out_dir": a.out_dir,
            "grid": a.grid,
            "seed": a.seed,
            "faces_per_grid_mesh": 2 * a.grid * a.grid,
        })
    );
    Ok(())
}
