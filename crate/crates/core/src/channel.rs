//! Simulated transmission channel on the sphere.
//!
//! The whole embed / attack / extract round trip is modelled as isotropic
//! Gaussian noise followed by renormalization:
//! `v' = normalize(v + sigma * g / sqrt(d))`, `g ~ N(0, I_d)`, so the noise
//! vector has expected squared norm `sigma^2` regardless of `d`. For large
//! `d`, `E[cos(v, v')] ~ 1 / sqrt(1 + sigma^2)`, which [`calibrate`] inverts to
//! pick `sigma` for a target mean cosine.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::codec::{LatentCodec, Message};
use crate::confidence;
use crate::error::{Error, Result};
use crate::rotation::{rotate, sample_rotation, unrotate, SecretKey};
use crate::sphere::{cosine, UnitVector};
use crate::stream;

/// Built-in profile set: mean cosine of a learned embedder/extractor at
/// 42 dB under each image transform.
pub const DEFAULT_PROFILES_JSON: &str = include_str!("../data/profiles_42db.json");

/// A named channel with its noise scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelProfile {
    pub name: String,
    pub target_cosine: f64,
    pub sigma: f64,
    pub dim: usize,
}

impl ChannelProfile {
    /// Profile whose `sigma` is derived from `target_cosine`.
    pub fn calibrated(name: impl Into<String>, target_cosine: f64, dim: usize) -> Result<Self> {
        Ok(ChannelProfile {
            name: name.into(),
            target_cosine,
            sigma: calibrate(target_cosine, dim)?,
            dim,
        })
    }
}

/// `sigma = sqrt(1 / c^2 - 1)`.
pub fn calibrate(target_cosine: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "channel dimension must be at least 2",
        });
    }
    if !(target_cosine > 0.0 && target_cosine <= 1.0) {
        return Err(Error::Domain(format!(
            "target cosine {target_cosine} outside (0, 1]"
        )));
    }
    Ok((1.0 / (target_cosine * target_cosine) - 1.0).max(0.0).sqrt())
}

/// Adds isotropic noise of total scale `sigma` and renormalizes. `sigma = 0`
/// returns `v` unchanged.
pub fn perturb<R: Rng + ?Sized>(v: &UnitVector, sigma: f64, rng: &mut R) -> Result<UnitVector> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("noise scale {sigma} must be finite and >= 0")));
    }
    if sigma == 0.0 {
        return Ok(v.clone());
    }
    let per_component = sigma / (v.dim() as f64).sqrt();
    loop {
        let noisy: Vec<f64> = v
            .components()
            .iter()
            .map(|x| x + per_component * rng.sample::<f64, _>(StandardNormal))
            .collect();
        if let Ok(out) = UnitVector::normalize(noisy) {
            return Ok(out);
        }
    }
}

/// Parses a profile config: a JSON array of `{"name", "target_cosine"}`.
/// Errors name the offending JSON path.
pub fn load_profiles(json: &str, dim: usize) -> Result<Vec<ChannelProfile>> {
    let root: Value = serde_json::from_str(json).map_err(|e| Error::Config {
        path: "$".into(),
        reason: e.to_string(),
    })?;
    let items = root.as_array().ok_or_else(|| Error::Config {
        path: "$".into(),
        reason: "expected an array of profiles".into(),
    })?;
    if items.is_empty() {
        return Err(Error::Config {
            path: "$".into(),
            reason: "no profiles".into(),
        });
    }
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let name = item
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Config {
                    path: format!("$[{i}].name"),
                    reason: "missing or not a string".into(),
                })?;
            let target = item
                .get("target_cosine")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Config {
                    path: format!("$[{i}].target_cosine"),
                    reason: "missing or not a number".into(),
                })?;
            ChannelProfile::calibrated(name, target, dim).map_err(|e| Error::Config {
                path: format!("$[{i}].target_cosine"),
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn default_profiles(dim: usize) -> Result<Vec<ChannelProfile>> {
    load_profiles(DEFAULT_PROFILES_JSON, dim)
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    /// Key used by the sender to rotate.
    pub key: SecretKey,
    /// Key used by the receiver to unrotate; `None` means the sender's key.
    pub receiver_key: Option<SecretKey>,
    pub n_messages: usize,
    /// Root seed for message content and channel noise.
    pub seed: u64,
    /// `ell` threshold for the trusted verdict.
    pub threshold: f64,
    /// Shortest random message, in bytes (capped at codec capacity).
    pub min_message_len: usize,
}

impl SweepSettings {
    pub fn new(key: SecretKey, n_messages: usize, seed: u64) -> Self {
        SweepSettings {
            key,
            receiver_key: None,
            n_messages,
            seed,
            threshold: DEFAULT_SWEEP_THRESHOLD,
            min_message_len: 8,
        }
    }
}

/// Default `ell` threshold for sweeps; above the sign codec's null
/// distribution (median ~57, 99th percentile below 100).
pub const DEFAULT_SWEEP_THRESHOLD: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub profile: String,
    pub n: usize,
    pub mean_cosine: f64,
    pub exact_match: f64,
    pub mean_ell: f64,
    pub trusted_rate: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "profile,n,mean_cosine,exact_match,mean_ell,trusted_rate";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.4},{:.6}",
            self.profile, self.n, self.mean_cosine, self.exact_match, self.mean_ell, self.trusted_rate
        )
    }
}

/// Renders rows as CSV with header.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SweepRow::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_row());
        out.push('\n');
    }
    out
}

struct Cell {
    cosine: f64,
    exact: bool,
    ell: f64,
    trusted: bool,
}

/// For each profile and message: encode, rotate, perturb, unrotate, decode
/// and score. Message `i` is the same across profiles; the noise of cell
/// `(profile, i)` comes from its own substream, so results do not depend on
/// evaluation order.
pub fn run_sweep(
    profiles: &[ChannelProfile],
    codec: &dyn LatentCodec,
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    if settings.n_messages == 0 {
        return Err(Error::Domain("sweep needs at least one message".into()));
    }
    let dim = codec.descriptor().dim;
    if let Some(p) = profiles.iter().find(|p| p.dim != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: p.dim,
        });
    }
    let sender = sample_rotation(&settings.key, dim)?;
    let receiver = match &settings.receiver_key {
        Some(k) if k.seed != settings.key.seed => sample_rotation(k, dim)?,
        _ => sender.clone(),
    };
    let capacity = codec.descriptor().capacity_bytes();
    let min_len = settings.min_message_len.min(capacity);

    let messages: Vec<(Message, UnitVector, UnitVector)> = (0..settings.n_messages)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream::substream(settings.seed, "sweep/message", i as u64);
            let m = Message::random_ascii(&mut rng, min_len, capacity);
            let y = codec.encode(&m)?;
            let yr = rotate(&sender, &y)?;
            Ok((m, y, yr))
        })
        .collect::<Result<_>>()?;

    profiles
        .iter()
        .enumerate()
        .map(|(p_idx, profile)| {
            let cells: Vec<Cell> = messages
                .par_iter()
                .enumerate()
                .map(|(i, (m, y, yr))| {
                    let index = ((p_idx as u64) << 32) | i as u64;
                    let mut rng = stream::substream(settings.seed, "sweep/noise", index);
                    let received = perturb(yr, profile.sigma, &mut rng)?;
                    let y_hat = unrotate(&receiver, &received)?;
                    let (decoded, report) = confidence::open(codec, &y_hat, settings.threshold)?;
                    Ok(Cell {
                        cosine: cosine(y, &y_hat)?,
                        exact: &decoded == m,
                        ell: report.ell,
                        trusted: report.is_trusted(),
                    })
                })
                .collect::<Result<_>>()?;
            let n = cells.len() as f64;
            Ok(SweepRow {
                profile: profile.name.clone(),
                n: cells.len(),
                mean_cosine: cells.iter().map(|c| c.cosine).sum::<f64>() / n,
                exact_match: cells.iter().filter(|c| c.exact).count() as f64 / n,
                mean_ell: cells.iter().map(|c| c.ell).sum::<f64>() / n,
                trusted_rate: cells.iter().filter(|c| c.trusted).count() as f64 / n,
            })
        })
        .collect()
}
