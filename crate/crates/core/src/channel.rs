//! BPSK over a real AWGN channel, channel LLRs and the fixed-point quantizer.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LLR magnitude substituted for `2y/σ²` on a noiseless (`σ = 0`) channel.
pub const NOISELESS_LLR: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Eb/N0 in dB; `+inf` selects the noiseless channel.
    pub snr_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelParams {
    /// `σ² = 1 / (2 · R · 10^(Eb/N0 / 10))`.
    pub fn from_ebn0(snr_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::param(format!("code rate {rate} outside (0, 1]")));
        }
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::param(format!("SNR {snr_db} dB is not usable")));
        }
        let sigma = (1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))).sqrt();
        Ok(ChannelParams {
            snr_db,
            rate,
            sigma,
        })
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Bit 0 → +1, bit 1 → −1.
pub fn modulate(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Sign demapper: non-negative samples → 0.
pub fn hard_demap(y: &[f64]) -> Vec<u8> {
    y.iter().map(|&v| (v < 0.0) as u8).collect()
}

/// `y = s + n`, `n ~ N(0, σ²)` i.i.d.
pub fn add_awgn<R: Rng + ?Sized>(s: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    assert!(sigma >= 0.0, "negative noise deviation");
    s.iter()
        .map(|&v| {
            let z: f64 = rng.sample(StandardNormal);
            v + sigma * z
        })
        .collect()
}

/// `L = 2y/σ²`; positive favours bit 0. With `σ = 0` the result is
/// `±NOISELESS_LLR` by the sign of `y` (0 stays 0).
pub fn channel_llr(y: &[f64], sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return y
            .iter()
            .map(|&v| {
                if v == 0.0 {
                    0.0
                } else {
                    NOISELESS_LLR.copysign(v)
                }
            })
            .collect();
    }
    let k = 2.0 / (sigma * sigma);
    y.iter().map(|&v| k * v).collect()
}

/// `round(L · scale)` (half away from zero), saturated to `±(2^(q-1) − 1)`.
pub fn quantize(llr: f64, q_bits: u32, scale: f64) -> i32 {
    assert!(q_bits >= 2, "need at least two bits");
    let lim = crate::arith::symmetric_max(q_bits);
    (llr * scale).round().clamp(-lim, lim) as i32
}

/// Quantizes a frame, returning integer-valued `f64`s for the decoders.
pub fn quantize_frame(llrs: &[f64], q_bits: u32, scale: f64) -> Vec<f64> {
    llrs.iter()
        .map(|&l| f64::from(quantize(l, q_bits, scale)))
        .collect()
}
