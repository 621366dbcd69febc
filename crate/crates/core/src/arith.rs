//! Number representation shared by the decoders.
//!
//! Both modes carry values as `f64`. In fixed mode every value is an integer
//! that has been saturated to the configured word length, so `f64` arithmetic
//! on it is exact and bit-identical to a two's-complement datapath.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default channel-LLR word length in bits.
pub const DEFAULT_Q_CHANNEL: u32 = 6;
/// Default path-metric word length in bits.
pub const DEFAULT_Q_PM: u32 = 8;
/// Default quantizer scale: one LSB per 0.5 LLR unit.
pub const DEFAULT_LLR_SCALE: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Float,
    Fixed {
        /// Channel LLR width; internal stage LLRs use two more bits.
        q_channel: u32,
        /// Unsigned path-metric width.
        q_pm: u32,
        /// LSBs per LLR unit applied by the quantizer.
        llr_scale: f64,
    },
}

impl Arithmetic {
    pub fn hardware() -> Self {
        Arithmetic::Fixed {
            q_channel: DEFAULT_Q_CHANNEL,
            q_pm: DEFAULT_Q_PM,
            llr_scale: DEFAULT_LLR_SCALE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Arithmetic::Fixed {
            q_channel,
            q_pm,
            llr_scale,
        } = *self
        {
            if !(2..=24).contains(&q_channel) {
                return Err(Error::param(format!("q_channel {q_channel} outside [2, 24]")));
            }
            if !(1..=40).contains(&q_pm) {
                return Err(Error::param(format!("q_pm {q_pm} outside [1, 40]")));
            }
            if !(llr_scale.is_finite() && llr_scale > 0.0) {
                return Err(Error::param(format!("llr_scale {llr_scale} must be positive")));
            }
        }
        Ok(())
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Arithmetic::Fixed { .. })
    }

    /// Largest magnitude an internal (stage) LLR may take.
    pub fn llr_limit(&self) -> f64 {
        match *self {
            Arithmetic::Float => f64::INFINITY,
            Arithmetic::Fixed { q_channel, .. } => symmetric_max(q_channel + 2),
        }
    }

    /// Saturation value of the unsigned path metric.
    pub fn pm_limit(&self) -> f64 {
        match *self {
            Arithmetic::Float => f64::INFINITY,
            Arithmetic::Fixed { q_pm, .. } => ((1u64 << q_pm) - 1) as f64,
        }
    }

    #[inline]
    pub fn sat_llr(&self, x: f64) -> f64 {
        let lim = self.llr_limit();
        x.clamp(-lim, lim)
    }

    #[inline]
    pub fn sat_pm(&self, x: f64) -> f64 {
        x.min(self.pm_limit())
    }
}

/// `2^(bits-1) - 1`, the symmetric saturation bound of a signed word.
pub fn symmetric_max(bits: u32) -> f64 {
    ((1u64 << (bits - 1)) - 1) as f64
}
