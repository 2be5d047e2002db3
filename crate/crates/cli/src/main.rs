//! `latentmark` command-line front end.
//!
//! JSON results go to stdout, a one-line human summary to stderr.
//! Exit codes: 0 success or trusted, 1 other I/O failure, 2 usage/config/
//! capacity, 3 image I/O, 4 key, 10 untrusted verdict.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use latentmark::analysis::{self, NgramIndex};
use latentmark::channel::{self, SweepSettings, DEFAULT_SWEEP_THRESHOLD};
use latentmark::codec::{codec_by_name, LatentCodec, Message};
use latentmark::confidence::{self, ConfidenceReport};
use latentmark::image::{self, RasterImage, Transform};
use latentmark::rotation::{self, SecretKey};
use latentmark::sphere::cosine;
use latentmark::Error;
use rand::Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IMAGE: u8 = 3;
const EXIT_KEY: u8 = 4;
const EXIT_UNTRUSTED: u8 = 10;

#[derive(Parser)]
#[command(name = "latentmark", version, about = "Keyed latent-vector watermarking toolkit")]
struct Cli {
    /// Root seed for every random stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Latent dimension.
    #[arg(long, global = true, default_value_t = latentmark::sphere::DEFAULT_DIM)]
    dim: usize,
    /// Message codec.
    #[arg(long, global = true, default_value = "sign")]
    codec: String,
    /// Directory for output files; relative output paths are placed here.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a JSON key file.
    Keygen {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "")]
        label: String,
    },
    /// Encode, rotate and embed a message into an image.
    Seal(SealArgs),
    /// Extract, unrotate, decode and score an image.
    Open {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        key_file: PathBuf,
        /// Trust threshold on ell = -log10(p).
        #[arg(long, default_value_t = DEFAULT_SWEEP_THRESHOLD)]
        threshold: f64,
    },
    /// Apply a pixel-domain transform (`name` or `name:param`).
    Attack {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        transform: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the simulated channel over a profile set.
    Sweep {
        /// Profile config; defaults to the built-in set.
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Sender key; defaults to a key derived from --seed.
        #[arg(long)]
        key_file: Option<PathBuf>,
        /// Receiver key, to measure a mismatched-key channel.
        #[arg(long)]
        receiver_key_file: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SWEEP_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ROC curve and operating points from a `score,label` CSV.
    Roc {
        #[arg(long)]
        scores: PathBuf,
        /// Target false-positive rates.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.01, 0.001])]
        fpr: Vec<f64>,
        /// Where to write the (threshold, fpr, tpr) curve.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time rotation generation.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128, 256])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize])]
        batches: Vec<usize>,
        #[arg(long, default_value_t = 21)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noise scale that yields a target mean cosine.
    Calibrate {
        #[arg(long)]
        target: f64,
    },
    /// Text metrics over line-aligned files.
    Metrics {
        #[command(subcommand)]
        metric: Metric,
    },
    /// Seal and open every P5/P6 image in a directory.
    Corpus {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        key_file: PathBuf,
        #[arg(long, default_value_t = 42.0)]
        psnr: f64,
        #[arg(long, default_value = "identity")]
        transform: String,
        /// Message to seal; random per image when absent.
        #[arg(long)]
        message: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SWEEP_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SealArgs {
    #[arg(long, conflicts_with = "message_hex", required_unless_present = "message_hex")]
    message: Option<String>,
    #[arg(long)]
    message_hex: Option<String>,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    key_file: PathBuf,
    #[arg(long, default_value_t = 42.0)]
    psnr: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the receipt JSON here.
    #[arg(long)]
    receipt: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Metric {
    /// Per-line BLEU-4 of candidates against references.
    Bleu4 {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        references: PathBuf,
    },
    /// Exact-match rate of candidates against references.
    Em {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        references: PathBuf,
    },
    /// 4-gram novelty of sentences against a training corpus.
    Novelty {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        sentences: PathBuf,
        /// Per-line scores (`line,novelty`, `NA` for short lines).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }
}

/// Library errors not tied to a particular input file.
impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Key(_) => EXIT_KEY,
            Error::Pnm(_) | Error::ImageTooSmall { .. } | Error::ShapeMismatch(_) => EXIT_IMAGE,
            Error::Io(_) => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure::new(code, err.to_string())
    }
}

type CmdResult = Result<Outcome, Failure>;

struct Outcome {
    json: Value,
    summary: String,
    code: u8,
}

impl Outcome {
    fn ok(json: Value, summary: impl Into<String>) -> Self {
        Outcome {
            json,
            summary: summary.into(),
            code: 0,
        }
    }
}

struct Ctx {
    seed: Option<u64>,
    dim: usize,
    codec: String,
    out_dir: Option<PathBuf>,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn codec(&self) -> Result<Box<dyn LatentCodec>, Failure> {
        Ok(codec_by_name(&self.codec, self.dim)?)
    }

    /// Output path: relative paths go under `--out-dir`; with no path given,
    /// `default` is used under `--out-dir` when one is set.
    fn output(&self, path: Option<&Path>, default: &str) -> Option<PathBuf> {
        match (path, &self.out_dir) {
            (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
            (Some(p), _) => Some(p.to_path_buf()),
            (None, Some(dir)) => Some(dir.join(default)),
            (None, None) => None,
        }
    }

    fn required_output(&self, path: Option<&Path>, default: &str, flag: &str) -> Result<PathBuf, Failure> {
        self.output(path, default)
            .ok_or_else(|| Failure::usage(format!("{flag} is required (or set --out-dir)")))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn read_text(path: &Path, code: u8) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(code, format!("cannot read {}: {e}", path.display())))
}

fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    Ok(read_text(path, EXIT_USAGE)?.lines().map(str::to_string).collect())
}

fn read_key(path: &Path) -> Result<SecretKey, Failure> {
    let text = read_text(path, EXIT_KEY)?;
    SecretKey::from_json(&text).map_err(|e| Failure::new(EXIT_KEY, format!("{}: {e}", path.display())))
}

fn read_image(path: &Path) -> Result<RasterImage, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::new(EXIT_IMAGE, format!("cannot read {}: {e}", path.display())))?;
    RasterImage::from_pnm_bytes(&bytes).map_err(|e| Failure::new(EXIT_IMAGE, format!("{}: {e}", path.display())))
}

/// JSON number, with `+inf` written as the string "inf".
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        Value::Null
    }
}

fn report_json(report: &ConfidenceReport) -> Value {
    json!({
        "cosine": report.cosine,
        "p_value": report.p_value,
        "ell": report.ell,
        "idempotent": report.idempotent,
        "verdict": report.verdict.as_str(),
    })
}

fn message_json(m: &Message) -> Value {
    json!({
        "text": m.as_text(),
        "hex": hex::encode(m.bytes()),
        "len": m.len(),
    })
}

fn keygen(ctx: &Ctx, out: Option<&Path>, label: &str) -> CmdResult {
    let path = ctx.required_output(out, "key.json", "--out")?;
    let (seed, source) = match ctx.seed {
        Some(s) => (s, "flag"),
        None => (rand::rng().random::<u64>(), "os-entropy"),
    };
    let key = SecretKey::with_label(seed, label);
    write_file(&path, format!("{}\n", key.to_json()).as_bytes())?;
    Ok(Outcome::ok(
        json!({"key_file": path.display().to_string(), "seed": seed, "seed_source": source}),
        format!("wrote key (seed {seed}) to {}", path.display()),
    ))
}

fn seal(ctx: &Ctx, args: &SealArgs) -> CmdResult {
    let message = match (&args.message, &args.message_hex) {
        (Some(text), _) => Message::from_text(text),
        (None, Some(h)) => Message::from_bytes(hex::decode(h).map_err(|e| Failure::usage(format!("--message-hex: {e}")))?),
        (None, None) => return Err(Failure::usage("--message or --message-hex is required")),
    };
    let codec = ctx.codec()?;
    let key = read_key(&args.key_file)?;
    let img = read_image(&args.image)?;
    let out = ctx.required_output(args.out.as_deref(), "sealed.pnm", "--out")?;

    let o = rotation::sample_rotation(&key, ctx.dim)?;
    let y = rotation::rotate(&o, &codec.encode(&message)?)?;
    let sealed = image::embed(&img, &y, &key, args.psnr)?;
    let achieved = image::psnr(&img, &sealed)?;
    write_file(&out, &sealed.to_pnm_bytes())?;

    let receipt = json!({
        // as given, so receipts do not depend on --out-dir
        "image": args.out.as_deref().unwrap_or(Path::new("sealed.pnm")).display().to_string(),
        "width": sealed.width(),
        "height": sealed.height(),
        "channels": sealed.channels(),
        "dim": ctx.dim,
        "codec": ctx.codec,
        "message_len": message.len(),
        "target_psnr_db": args.psnr,
        "psnr_db": num(achieved),
        "vector_sha256": hex::encode(Sha256::digest(y.to_le_bytes())),
    });
    if let Some(path) = ctx.output(args.receipt.as_deref(), "receipt.json").filter(|_| args.receipt.is_some() || ctx.out_dir.is_some()) {
        write_file(&path, format!("{}\n", serde_json::to_string_pretty(&receipt).expect("json")).as_bytes())?;
    }
    Ok(Outcome::ok(
        receipt,
        format!("sealed {} bytes into {} at {:.2} dB", message.len(), out.display(), achieved),
    ))
}

fn open(ctx: &Ctx, image_path: &Path, key_file: &Path, threshold: f64) -> CmdResult {
    let codec = ctx.codec()?;
    let key = read_key(key_file)?;
    let img = read_image(image_path)?;
    let o = rotation::sample_rotation(&key, ctx.dim)?;
    let y_hat = rotation::unrotate(&o, &image::extract(&img, &key, ctx.dim)?)?;
    let (message, report) = confidence::open(codec.as_ref(), &y_hat, threshold)?;
    let code = if report.is_trusted() { 0 } else { EXIT_UNTRUSTED };
    Ok(Outcome {
        json: json!({"message": message_json(&message), "threshold": threshold, "report": report_json(&report)}),
        summary: format!(
            "{}: ell {:.2} (threshold {threshold}), message {:?}",
            report.verdict.as_str(),
            report.ell,
            message.as_text().unwrap_or("<binary>")
        ),
        code,
    })
}

fn attack(ctx: &Ctx, image_path: &Path, transform: &str, out: Option<&Path>) -> CmdResult {
    let t: Transform = transform.parse()?;
    let img = read_image(image_path)?;
    let out = ctx.required_output(out, "attacked.pnm", "--out")?;
    let attacked = image::attack(&img, &t, ctx.seed())?;
    let p = image::psnr(&img, &attacked)?;
    write_file(&out, &attacked.to_pnm_bytes())?;
    Ok(Outcome::ok(
        json!({"image": out.display().to_string(), "transform": t.to_string(), "psnr_db": num(p)}),
        format!("applied {t} -> {} ({p:.2} dB)", out.display()),
    ))
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    ctx: &Ctx,
    profiles: Option<&Path>,
    key_file: Option<&Path>,
    receiver_key_file: Option<&Path>,
    n: usize,
    threshold: f64,
    out: Option<&Path>,
) -> CmdResult {
    let codec = ctx.codec()?;
    let profiles = match profiles {
        Some(path) => {
            let text = read_text(path, EXIT_USAGE)?;
            channel::load_profiles(&text, ctx.dim).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => channel::default_profiles(ctx.dim)?,
    };
    let key = match key_file {
        Some(path) => read_key(path)?,
        None => SecretKey::new(ctx.seed()),
    };
    let mut settings = SweepSettings::new(key, n, ctx.seed());
    settings.threshold = threshold;
    settings.receiver_key = receiver_key_file.map(read_key).transpose()?;
    let rows = channel::run_sweep(&profiles, codec.as_ref(), &settings)?;
    let csv = channel::sweep_csv(&rows);
    let out = ctx.output(out, "sweep.csv");
    if let Some(path) = &out {
        write_file(path, csv.as_bytes())?;
    }
    Ok(Outcome::ok(
        json!({"csv": out.map(|p| p.display().to_string()), "n": n, "threshold": threshold, "rows": rows}),
        format!("swept {} profiles x {n} messages", rows.len()),
    ))
}

fn roc(ctx: &Ctx, scores: &Path, fprs: &[f64], out: Option<&Path>) -> CmdResult {
    let samples = analysis::parse_scored_csv(&read_text(scores, EXIT_USAGE)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", scores.display())))?;
    let curve = analysis::roc(&samples)?;
    let points = fprs
        .iter()
        .map(|&f| analysis::threshold_at_fpr(&samples, f).map(|op| serde_json::to_value(op).expect("json")))
        .collect::<Result<Vec<_>, _>>()?;
    let out = ctx.output(out, "roc.csv");
    if let Some(path) = &out {
        write_file(path, curve.to_csv().as_bytes())?;
    }
    Ok(Outcome::ok(
        json!({"auc": curve.auc, "n_pos": curve.n_pos, "n_neg": curve.n_neg, "operating_points": points}),
        format!("auc {:.4} over {} positives, {} negatives", curve.auc, curve.n_pos, curve.n_neg),
    ))
}

fn bench(ctx: &Ctx, dims: &[usize], batches: &[usize], repeats: usize, out: Option<&Path>) -> CmdResult {
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    let mut rows = Vec::new();
    for &d in &dims {
        for &b in batches {
            rows.push(rotation::benchmark_generation(d, b, repeats)?);
        }
    }
    let mut csv = String::from("dim,batch,repeats,median_ms,max_ms\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{:.6},{:.6}\n", r.dim, r.batch, r.repeats, r.median_ms, r.max_ms));
    }
    let out = ctx.output(out, "bench.csv");
    if let Some(path) = &out {
        write_file(path, csv.as_bytes())?;
    }
    let worst = rows.iter().map(|r| r.median_ms).fold(0.0, f64::max);
    Ok(Outcome::ok(
        json!({"csv": out.map(|p| p.display().to_string()), "rows": rows}),
        format!("benchmarked {} configurations; slowest median {worst:.3} ms/matrix", rows.len()),
    ))
}

fn calibrate(ctx: &Ctx, target: f64) -> CmdResult {
    let sigma = channel::calibrate(target, ctx.dim)?;
    Ok(Outcome::ok(
        json!({"target_cosine": target, "sigma": sigma, "dim": ctx.dim}),
        format!("sigma {sigma:.6} for mean cosine {target}"),
    ))
}

fn paired(candidates: &Path, references: &Path) -> Result<(Vec<String>, Vec<String>), Failure> {
    let c = read_lines(candidates)?;
    let r = read_lines(references)?;
    if c.len() != r.len() {
        return Err(Failure::usage(format!(
            "{} has {} lines but {} has {}",
            candidates.display(),
            c.len(),
            references.display(),
            r.len()
        )));
    }
    Ok((c, r))
}

fn metrics(ctx: &Ctx, metric: &Metric) -> CmdResult {
    match metric {
        Metric::Bleu4 { candidates, references } => {
            let (c, r) = paired(candidates, references)?;
            let scores: Vec<f64> = c
                .iter()
                .zip(&r)
                .map(|(c, r)| analysis::bleu4(&analysis::tokenize(c), &analysis::tokenize(r)))
                .collect();
            let mean = if scores.is_empty() { 0.0 } else { scores.iter().sum::<f64>() / scores.len() as f64 };
            Ok(Outcome::ok(
                json!({"metric": "bleu4", "n": scores.len(), "mean": mean, "scores": scores}),
                format!("mean BLEU-4 {mean:.4} over {} lines", scores.len()),
            ))
        }
        Metric::Em { candidates, references } => {
            let (c, r) = paired(candidates, references)?;
            let pairs: Vec<(String, String)> = c.into_iter().zip(r).collect();
            let em = analysis::exact_match(&pairs);
            Ok(Outcome::ok(
                json!({"metric": "exact_match", "n": pairs.len(), "rate": em}),
                format!("exact match {em:.4} over {} lines", pairs.len()),
            ))
        }
        Metric::Novelty { train, sentences, out } => {
            let train = read_lines(train)?;
            let index = NgramIndex::from_lines(train.iter().map(String::as_str));
            let scores: Vec<Option<f64>> = read_lines(sentences)?
                .iter()
                .map(|s| analysis::novelty_score(&analysis::tokenize(s), &index))
                .collect();
            let scored: Vec<f64> = scores.iter().flatten().copied().collect();
            let mean = if scored.is_empty() { None } else { Some(scored.iter().sum::<f64>() / scored.len() as f64) };
            let out = ctx.output(out.as_deref(), "novelty.csv");
            if let Some(path) = &out {
                let mut csv = String::from("line,novelty\n");
                for (i, s) in scores.iter().enumerate() {
                    match s {
                        Some(x) => csv.push_str(&format!("{},{x:.6}\n", i + 1)),
                        None => csv.push_str(&format!("{},NA\n", i + 1)),
                    }
                }
                write_file(path, csv.as_bytes())?;
            }
            Ok(Outcome::ok(
                json!({
                    "metric": "novelty",
                    "n_scored": scored.len(),
                    "n_excluded": scores.len() - scored.len(),
                    "mean": mean,
                    "index_size": index.len(),
                }),
                format!("{} sentences scored, {} too short", scored.len(), scores.len() - scored.len()),
            ))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn corpus(
    ctx: &Ctx,
    dir: &Path,
    key_file: &Path,
    psnr: f64,
    transform: &str,
    message: Option<&str>,
    threshold: f64,
    out: Option<&Path>,
) -> CmdResult {
    let codec = ctx.codec()?;
    let key = read_key(key_file)?;
    let t: Transform = transform.parse()?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::new(EXIT_IMAGE, format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("pgm" | "ppm" | "pnm")))
        .collect();
    files.sort();
    let o = rotation::sample_rotation(&key, ctx.dim)?;
    let capacity = codec.descriptor().capacity_bytes();
    let mut csv = String::from("file,psnr_db,cosine,ell,verdict,exact_match\n");
    let mut rows = Vec::new();
    for (i, path) in files.iter().enumerate() {
        let m = match message {
            Some(text) => Message::from_text(text),
            None => {
                let mut rng = latentmark::stream::substream(ctx.seed(), "corpus/message", i as u64);
                Message::random_ascii(&mut rng, capacity.min(8), capacity)
            }
        };
        let img = read_image(path)?;
        let y = codec.encode(&m)?;
        let sealed = image::embed(&img, &rotation::rotate(&o, &y)?, &key, psnr)?;
        let achieved = image::psnr(&img, &sealed)?;
        let received = image::attack(&sealed, &t, ctx.seed().wrapping_add(i as u64))?;
        let y_hat = rotation::unrotate(&o, &image::extract(&received, &key, ctx.dim)?)?;
        let (decoded, report) = confidence::open(codec.as_ref(), &y_hat, threshold)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let exact = decoded == m;
        let c = cosine(&y, &y_hat)?;
        csv.push_str(&format!(
            "{name},{achieved:.4},{c:.6},{:.4},{},{}\n",
            report.ell,
            report.verdict.as_str(),
            u8::from(exact)
        ));
        rows.push(json!({
            "file": name, "psnr_db": num(achieved), "cosine": c, "ell": report.ell,
            "verdict": report.verdict.as_str(), "exact_match": exact,
        }));
    }
    let out = ctx.output(out, "corpus.csv");
    if let Some(path) = &out {
        write_file(path, csv.as_bytes())?;
    }
    let exact = rows.iter().filter(|r| r["exact_match"] == true).count();
    Ok(Outcome::ok(
        json!({"csv": out.map(|p| p.display().to_string()), "transform": t.to_string(), "images": rows}),
        format!("{} images, {exact} decoded exactly", files.len()),
    ))
}

fn run(cli: Cli) -> CmdResult {
    let ctx = Ctx {
        seed: cli.seed,
        dim: cli.dim,
        codec: cli.codec,
        out_dir: cli.out_dir,
    };
    if let Some(dir) = &ctx.out_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", dir.display())))?;
    }
    match &cli.command {
        Command::Keygen { out, label } => keygen(&ctx, out.as_deref(), label),
        Command::Seal(args) => seal(&ctx, args),
        Command::Open {
            image,
            key_file,
            threshold,
        } => open(&ctx, image, key_file, *threshold),
        Command::Attack { image, transform, out } => attack(&ctx, image, transform, out.as_deref()),
        Command::Sweep {
            profiles,
            key_file,
            receiver_key_file,
            n,
            threshold,
            out,
        } => sweep(
            &ctx,
            profiles.as_deref(),
            key_file.as_deref(),
            receiver_key_file.as_deref(),
            *n,
            *threshold,
            out.as_deref(),
        ),
        Command::Roc { scores, fpr, out } => roc(&ctx, scores, fpr, out.as_deref()),
        Command::Bench {
            dims,
            batches,
            repeats,
            out,
        } => bench(&ctx, dims, batches, *repeats, out.as_deref()),
        Command::Calibrate { target } => calibrate(&ctx, *target),
        Command::Metrics { metric } => metrics(&ctx, metric),
        Command::Corpus {
            dir,
            key_file,
            psnr,
            transform,
            message,
            threshold,
            out,
        } => corpus(&ctx, dir, key_file, *psnr, transform, message.as_deref(), *threshold, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.json).expect("json"));
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
