//! Message <-> sphere codecs.
//!
//! [`LatentCodec`] is the seam where a learned text autoencoder would plug in.
//! The crate ships [`SignCodec`], a one-bit-per-dimension reference codec
//! whose noise behaviour is easy to analyse.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::UnitVector;

/// A payload message. Trailing zero bytes are reserved for padding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    bytes: Vec<u8>,
}

impl Message {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        Message {
            bytes: bytes.into(),
        }
    }

    pub fn from_text(text: &str) -> Self {
        Self::from_bytes(text.as_bytes())
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// UTF-8 view, if the bytes are valid UTF-8.
    pub fn as_text(&self) -> Option<&str> {
        std::str::from_utf8(&self.bytes).ok()
    }

    /// Random printable-ASCII message with length uniform in
    /// `min_len..=max_len`.
    pub fn random_ascii<R: Rng + ?Sized>(rng: &mut R, min_len: usize, max_len: usize) -> Self {
        let len = rng.random_range(min_len..=max_len.max(min_len));
        Message {
            bytes: (0..len).map(|_| rng.random_range(0x20u8..=0x7e)).collect(),
        }
    }
}

/// Static description of a codec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodecDescriptor {
    pub name: String,
    pub dim: usize,
    pub capacity_bits: usize,
    pub deterministic: bool,
}

impl CodecDescriptor {
    pub fn capacity_bytes(&self) -> usize {
        self.capacity_bits / 8
    }
}

/// Encoder/decoder pair between messages and the unit sphere.
///
/// `decode` must be total on vectors of the codec's dimension.
pub trait LatentCodec: Send + Sync {
    fn descriptor(&self) -> &CodecDescriptor;
    fn encode(&self, message: &Message) -> Result<UnitVector>;
    fn decode(&self, v: &UnitVector) -> Result<Message>;
}

/// Sign modulation: message bits (MSB first, zero-padded to capacity) become
/// components `(2b - 1) / sqrt(d)`; decoding takes signs, with an exact zero
/// read as bit 0, then strips trailing zero bytes.
#[derive(Debug, Clone)]
pub struct SignCodec {
    descriptor: CodecDescriptor,
}

impl SignCodec {
    pub const NAME: &'static str = "sign";

    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "codec dimension must be at least 2",
            });
        }
        Ok(SignCodec {
            descriptor: CodecDescriptor {
                name: Self::NAME.to_string(),
                dim,
                capacity_bits: 8 * (dim / 8),
                deterministic: true,
            },
        })
    }
}

impl LatentCodec for SignCodec {
    fn descriptor(&self) -> &CodecDescriptor {
        &self.descriptor
    }

    fn encode(&self, message: &Message) -> Result<UnitVector> {
        let d = &self.descriptor;
        if message.len() > d.capacity_bytes() {
            return Err(Error::CapacityExceeded {
                capacity_bits: d.capacity_bits,
                message_bits: 8 * message.len(),
            });
        }
        if message.bytes().last() == Some(&0) {
            return Err(Error::TrailingNul);
        }
        let amp = 1.0 / (d.dim as f64).sqrt();
        let components = (0..d.dim)
            .map(|i| {
                let byte = message.bytes().get(i / 8).copied().unwrap_or(0);
                if (byte >> (7 - i % 8)) & 1 == 1 {
                    amp
                } else {
                    -amp
                }
            })
            .collect();
        Ok(UnitVector::from_unit_unchecked(components))
    }

    fn decode(&self, v: &UnitVector) -> Result<Message> {
        let d = &self.descriptor;
        if v.dim() != d.dim {
            return Err(Error::DimensionMismatch {
                expected: d.dim,
                actual: v.dim(),
            });
        }
        let mut bytes: Vec<u8> = v.components()[..d.capacity_bits]
            .chunks_exact(8)
            .map(|bits| bits.iter().fold(0u8, |acc, &x| (acc << 1) | u8::from(x > 0.0)))
            .collect();
        while bytes.last() == Some(&0) {
            bytes.pop();
        }
        Ok(Message { bytes })
    }
}

/// Looks up a built-in codec by name.
pub fn codec_by_name(name: &str, dim: usize) -> Result<Box<dyn LatentCodec>> {
    match name {
        SignCodec::NAME => Ok(Box::new(SignCodec::new(dim)?)),
        other => Err(Error::Config {
            path: "codec".into(),
            reason: format!("unknown codec `{other}` (available: {})", SignCodec::NAME),
        }),
    }
}

/// Outcome of the decode / re-encode round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct Idempotence {
    pub passes: bool,
    /// `encode(decoded)`; `None` when the decoded message cannot be re-encoded.
    pub reencoded: Option<UnitVector>,
    pub decoded: Message,
}

/// Decodes `v` to `m`, then checks `decode(encode(m)) == m` byte-exactly.
pub fn idempotence_check(codec: &dyn LatentCodec, v: &UnitVector) -> Result<Idempotence> {
    let decoded = codec.decode(v)?;
    let reencoded = codec.encode(&decoded).ok();
    let passes = match &reencoded {
        Some(r) => codec.decode(r)? == decoded,
        None => false,
    };
    Ok(Idempotence {
        passes,
        reencoded,
        decoded,
    })
}

/// Raw information content of a token sequence versus codec capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapacityReport {
    pub raw_bits: u64,
    pub codec_bits: usize,
    pub fits: bool,
}

pub fn capacity_report(
    codec: &CodecDescriptor,
    tokens_per_message: u64,
    bits_per_token: f64,
) -> Result<CapacityReport> {
    if tokens_per_message == 0 || !(bits_per_token > 0.0) || !bits_per_token.is_finite() {
        return Err(Error::Domain(format!(
            "capacity needs positive arguments (tokens={tokens_per_message}, bits/token={bits_per_token})"
        )));
    }
    let exact = tokens_per_message as f64 * bits_per_token;
    // absorb representation error such as 30 * 15.6 landing just above 468
    let raw_bits = (exact - exact * 1e-12).ceil() as u64;
    Ok(CapacityReport {
        raw_bits,
        codec_bits: codec.capacity_bits,
        fits: raw_bits <= codec.capacity_bits as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;
    use proptest::prelude::*;
    use rand::Rng;
    use std::sync::atomic::{AtomicU64, Ordering};

    #[test]
    fn zero_message_is_constant_vector() {
        let codec = SignCodec::new(256).unwrap();
        let v = codec.encode(&Message::from_bytes(vec![])).unwrap();
        assert!(v.components().iter().all(|&x| x == -0.0625));
        assert_eq!(v.norm(), 1.0);
    }

    #[test]
    fn bit_layout_is_msb_first() {
        let codec = SignCodec::new(8).unwrap();
        let v = codec.encode(&Message::from_bytes(vec![0b1011_0010])).unwrap();
        let a = 1.0 / 8f64.sqrt();
        assert_eq!(v.components(), &[a, -a, a, a, -a, -a, a, -a]);
    }

    #[test]
    fn exhaustive_roundtrip_at_dim_8() {
        let codec = SignCodec::new(8).unwrap();
        let empty = Message::from_bytes(vec![]);
        assert_eq!(codec.decode(&codec.encode(&empty).unwrap()).unwrap(), empty);
        for b in 1..=255u8 {
            let m = Message::from_bytes(vec![b]);
            assert_eq!(codec.decode(&codec.encode(&m).unwrap()).unwrap(), m);
        }
    }

    #[test]
    fn all_positive_decodes_to_ff() {
        let codec = SignCodec::new(256).unwrap();
        let v = UnitVector::new(vec![1.0 / 16.0; 256]).unwrap();
        assert_eq!(codec.decode(&v).unwrap().bytes(), &[0xff; 32]);
    }

    #[test]
    fn exact_zero_decodes_as_zero_bit() {
        let codec = SignCodec::new(8).unwrap();
        let v = UnitVector::new(vec![0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(codec.decode(&v).unwrap().bytes(), &[0b1010_1010]);
    }

    #[test]
    fn capacity_errors() {
        let codec = SignCodec::new(256).unwrap();
        let err = codec.encode(&Message::from_bytes(vec![b'a'; 33])).unwrap_err();
        assert_eq!(
            err,
            Error::CapacityExceeded {
                capacity_bits: 256,
                message_bits: 264
            }
        );
        assert!(codec.encode(&Message::from_bytes(vec![b'a'; 32])).is_ok());
        assert_eq!(
            codec.encode(&Message::from_bytes(vec![b'a', 0])),
            Err(Error::TrailingNul)
        );
    }

    #[test]
    fn odd_dimensions_pad_with_zero_bits() {
        let codec = SignCodec::new(13).unwrap();
        assert_eq!(codec.descriptor().capacity_bits, 8);
        let m = Message::from_bytes(vec![0x81]);
        let v = codec.encode(&m).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert_eq!(codec.decode(&v).unwrap(), m);
    }

    #[test]
    fn decode_is_total_on_matching_dimension() {
        let codec = SignCodec::new(64).unwrap();
        let mut rng = stream::root(8);
        for _ in 0..100 {
            let v = crate::sphere::sample_uniform(64, &mut rng).unwrap();
            assert!(codec.decode(&v).is_ok());
        }
        assert!(matches!(
            codec.decode(&UnitVector::basis(32, 0).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sign_codec_is_idempotent() {
        let codec = SignCodec::new(256).unwrap();
        let mut rng = stream::root(31);
        for _ in 0..200 {
            let v = crate::sphere::sample_uniform(256, &mut rng).unwrap();
            let check = idempotence_check(&codec, &v).unwrap();
            assert!(check.passes);
            let expected = codec.encode(&codec.decode(&v).unwrap()).unwrap();
            assert_eq!(check.reencoded.unwrap().to_le_bytes(), expected.to_le_bytes());
        }
    }

    /// Appends a fresh byte on every decode, so it can never be idempotent.
    struct DriftingCodec {
        inner: SignCodec,
        counter: AtomicU64,
    }

    impl LatentCodec for DriftingCodec {
        fn descriptor(&self) -> &CodecDescriptor {
            self.inner.descriptor()
        }
        fn encode(&self, m: &Message) -> Result<UnitVector> {
            self.inner.encode(m)
        }
        fn decode(&self, v: &UnitVector) -> Result<Message> {
            let mut bytes = self.inner.decode(v)?.bytes().to_vec();
            bytes.truncate(self.descriptor().capacity_bytes() - 1);
            bytes.push(1 + (self.counter.fetch_add(1, Ordering::Relaxed) % 255) as u8);
            Ok(Message::from_bytes(bytes))
        }
    }

    #[test]
    fn drifting_codec_fails_idempotence() {
        let codec = DriftingCodec {
            inner: SignCodec::new(256).unwrap(),
            counter: AtomicU64::new(0),
        };
        let v = crate::sphere::sample_uniform(256, &mut stream::root(2)).unwrap();
        assert!(!idempotence_check(&codec, &v).unwrap().passes);
    }

    #[test]
    fn capacity_fixtures() {
        let d = SignCodec::new(256).unwrap().descriptor().clone();
        assert_eq!(
            capacity_report(&d, 30, 15.6).unwrap(),
            CapacityReport { raw_bits: 468, codec_bits: 256, fits: false }
        );
        assert_eq!(capacity_report(&d, 1, 1.0).unwrap().raw_bits, 1);
        assert!(capacity_report(&d, 1, 1.0).unwrap().fits);
        let edge = capacity_report(&d, 16, 16.0).unwrap();
        assert_eq!((edge.raw_bits, edge.fits), (256, true));
        assert!(capacity_report(&d, 0, 1.0).is_err());
        assert!(capacity_report(&d, 1, 0.0).is_err());
    }

    #[test]
    fn codec_lookup() {
        assert_eq!(codec_by_name("sign", 64).unwrap().descriptor().capacity_bits, 64);
        assert!(matches!(codec_by_name("bert", 64), Err(Error::Config { .. })));
    }

    /// Standard normal CDF via erfc, used as the flip-rate oracle.
    fn phi(x: f64) -> f64 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }

    fn measured_flip_rate(sigma: f64, messages: usize, seed: u64) -> (f64, usize) {
        use rand_distr::StandardNormal;
        let codec = SignCodec::new(256).unwrap();
        let mut rng = stream::root(seed);
        let mut flips = 0usize;
        let mut bits = 0usize;
        for _ in 0..messages {
            let m = Message::from_bytes(
                (0..32).map(|_| rng.random_range(1u8..=255)).collect::<Vec<_>>(),
            );
            let clean = codec.encode(&m).unwrap();
            let noisy: Vec<f64> = clean
                .components()
                .iter()
                .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let noisy = UnitVector::normalize(noisy).unwrap();
            flips += clean
                .components()
                .iter()
                .zip(noisy.components())
                .filter(|(a, b)| (**a > 0.0) != (**b > 0.0))
                .count();
            bits += 256;
        }
        (flips as f64 / bits as f64, bits)
    }

    #[test]
    fn flip_rate_matches_gaussian_tail() {
        // Renormalization does not change signs, so each bit flips with
        // probability Phi(-(1/sqrt(d)) / sigma).
        let sigma = 0.04;
        let (rate, bits) = measured_flip_rate(sigma, 400, 13);
        assert!(bits >= 100_000);
        let expected = phi(-(1.0 / 16.0) / sigma);
        assert!(
            ((rate - expected) / expected).abs() <= 0.20,
            "measured {rate}, expected {expected}"
        );
        // At sigma = 0.01 the analytic rate is ~2e-10: expect no flips at all.
        let (rate, _) = measured_flip_rate(0.01, 400, 14);
        assert!(phi(-6.25) < 1e-9);
        assert_eq!(rate, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn roundtrip_at_256(bytes in proptest::collection::vec(1u8..=255, 0..=32)) {
            let codec = SignCodec::new(256).unwrap();
            let m = Message::from_bytes(bytes);
            let v = codec.encode(&m).unwrap();
            prop_assert!((v.norm() - 1.0).abs() <= 1e-15);
            prop_assert_eq!(codec.decode(&v).unwrap(), m);
        }

        #[test]
        fn encode_decode_encode_is_encode(bytes in proptest::collection::vec(any::<u8>(), 0..=32)) {
            let codec = SignCodec::new(256).unwrap();
            let mut bytes = bytes;
            while bytes.last() == Some(&0) { bytes.pop(); }
            let v = codec.encode(&Message::from_bytes(bytes)).unwrap();
            let again = codec.encode(&codec.decode(&v).unwrap()).unwrap();
            prop_assert_eq!(v.to_le_bytes(), again.to_le_bytes());
        }
    }
}
