//! Spherical p-value confidence score.
//!
//! A received vector `v` is first decoded and re-encoded. If the codec round
//! trip is not idempotent the message is untrusted outright. Otherwise the
//! cosine `c` between `v` and the re-encoded codeword is scored against the
//! null hypothesis "v is a uniform random point on the sphere":
//!
//! `rho = I_{1-c^2}((d-1)/2, 1/2)` for `c > 0`, and `rho = 1` for `c <= 0`.
//!
//! This is the tail probability `Pr(|cos| >= c)` of a uniform vector (both
//! tails; the one-sided tail is `rho / 2`). The formula is used as written.
//! The score reported is `ell = -log10(rho)`.

use serde::{Deserialize, Serialize};

use crate::codec::{idempotence_check, LatentCodec, Message};
use crate::error::{Error, Result};
use crate::special::ln_reg_inc_beta;
use crate::sphere::{cosine, UnitVector};

/// `ell` reported when `rho` is too small to represent.
pub const ELL_CAP: f64 = 700.0;

const COSINE_SLACK: f64 = 1e-12;

fn check_args(c: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "p-value needs dim >= 2",
        });
    }
    if !c.is_finite() || c.abs() > 1.0 + COSINE_SLACK {
        return Err(Error::Domain(format!("cosine {c} outside [-1, 1]")));
    }
    Ok(c.clamp(-1.0, 1.0))
}

/// Natural log of the spherical p-value; `-inf` at `c = 1`.
pub fn spherical_ln_p_value(c: f64, dim: usize) -> Result<f64> {
    let c = check_args(c, dim)?;
    if c <= 0.0 {
        return Ok(0.0);
    }
    let x = (1.0 - c) * (1.0 + c);
    ln_reg_inc_beta(x.max(0.0), (dim as f64 - 1.0) / 2.0, 0.5)
}

/// `rho = I_{1-c^2}((dim-1)/2, 1/2)` for `c > 0`, `1` otherwise.
pub fn spherical_p_value(c: f64, dim: usize) -> Result<f64> {
    let c = check_args(c, dim)?;
    if c <= 0.0 {
        return Ok(1.0);
    }
    let x = (1.0 - c) * (1.0 + c);
    if x < 1e-4 {
        return Ok(spherical_ln_p_value(c, dim)?.exp());
    }
    crate::special::reg_inc_beta(x, (dim as f64 - 1.0) / 2.0, 0.5)
}

/// `ell = -log10(rho)`, capped at [`ELL_CAP`].
pub fn ell_score(c: f64, dim: usize) -> Result<f64> {
    let ln_p = spherical_ln_p_value(c, dim)?;
    Ok(ell_from_ln_p(ln_p))
}

fn ell_from_ln_p(ln_p: f64) -> f64 {
    let ell = -ln_p / std::f64::consts::LN_10;
    if ell.is_nan() {
        ELL_CAP
    } else {
        ell.clamp(0.0, ELL_CAP)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Trusted,
    Untrusted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Trusted => "trusted",
            Verdict::Untrusted => "untrusted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub cosine: f64,
    /// `0` when `rho` falls below the smallest normal `f64`.
    pub p_value: f64,
    pub ell: f64,
    pub idempotent: bool,
    pub verdict: Verdict,
}

impl ConfidenceReport {
    pub const CSV_HEADER: &'static str = "cosine,p_value,ell,idempotent,verdict";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.6},{:.6e},{:.6},{},{}",
            self.cosine,
            self.p_value,
            self.ell,
            self.idempotent,
            self.verdict.as_str()
        )
    }

    pub fn is_trusted(&self) -> bool {
        self.verdict == Verdict::Trusted
    }
}

/// Scores a received vector. Trusted iff idempotent and `ell >= threshold`.
pub fn assess(codec: &dyn LatentCodec, received: &UnitVector, threshold: f64) -> Result<ConfidenceReport> {
    Ok(open(codec, received, threshold)?.1)
}

/// Decodes and scores in one pass.
pub fn open(
    codec: &dyn LatentCodec,
    received: &UnitVector,
    threshold: f64,
) -> Result<(Message, ConfidenceReport)> {
    let check = idempotence_check(codec, received)?;
    let cos = match &check.reencoded {
        Some(r) => cosine(received, r)?,
        None => 0.0,
    };
    let report = if check.passes {
        let ln_p = spherical_ln_p_value(cos, received.dim())?;
        let p_value = if ln_p < f64::MIN_POSITIVE.ln() { 0.0 } else { ln_p.exp() };
        let ell = ell_from_ln_p(ln_p);
        ConfidenceReport {
            cosine: cos,
            p_value,
            ell,
            idempotent: true,
            verdict: if ell >= threshold {
                Verdict::Trusted
            } else {
                Verdict::Untrusted
            },
        }
    } else {
        ConfidenceReport {
            cosine: cos,
            p_value: 1.0,
            ell: 0.0,
            idempotent: false,
            verdict: Verdict::Untrusted,
        }
    };
    Ok((check.decoded, report))
}
