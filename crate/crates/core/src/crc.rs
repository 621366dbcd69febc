//! Bit-serial CRC over GF(2), MSB first, zero initial state, no reflection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CRC generator polynomial of degree `degree`.
///
/// `taps` holds the coefficients of `x^(degree-1) .. x^0`; the leading
/// `x^degree` term is implicit. CRC-16/CCITT is `CrcPoly { degree: 16, taps: 0x1021 }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CrcPoly {
    pub degree: u32,
    pub taps: u64,
}

impl CrcPoly {
    pub const CCITT16: CrcPoly = CrcPoly {
        degree: 16,
        taps: 0x1021,
    };

    pub fn new(degree: u32, taps: u64) -> Result<Self> {
        if !(1..=63).contains(&degree) {
            return Err(Error::param(format!("CRC degree {degree} outside [1, 63]")));
        }
        if taps >> degree != 0 {
            return Err(Error::param(format!(
                "CRC taps {taps:#x} do not fit below x^{degree}"
            )));
        }
        Ok(CrcPoly { degree, taps })
    }

    /// A conventional polynomial for common lengths.
    pub fn default_for(degree: u32) -> Option<Self> {
        let taps = match degree {
            1 => 0x1,
            4 => 0x3,
            6 => 0x21,
            8 => 0x07,
            11 => 0x621,
            16 => 0x1021,
            24 => 0x86_4CFB,
            _ => return None,
        };
        Some(CrcPoly { degree, taps })
    }

    /// Parses `0x1021`-style hex or plain decimal taps.
    pub fn parse(degree: u32, s: &str) -> Result<Self> {
        let s = s.trim();
        let taps = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse(),
        }
        .map_err(|e| Error::param(format!("bad CRC polynomial {s:?}: {e}")))?;
        Self::new(degree, taps)
    }

    pub fn len(&self) -> usize {
        self.degree as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Remainder of `bits(x) · x^r` modulo the polynomial, as `r` bits MSB first.
    pub fn compute(&self, bits: &[u8]) -> Vec<u8> {
        let r = self.degree;
        let top = 1u64 << (r - 1);
        let mask = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
        let mut reg = 0u64;
        for &b in bits {
            let feedback = ((reg & top) != 0) ^ (b & 1 == 1);
            reg = (reg << 1) & mask;
            if feedback {
                reg ^= self.taps;
            }
        }
        (0..r).rev().map(|k| ((reg >> k) & 1) as u8).collect()
    }

    /// True when the trailing `r` bits of `word` are the CRC of the leading part.
    pub fn check(&self, word: &[u8]) -> bool {
        let r = self.len();
        if word.len() < r {
            return false;
        }
        let (msg, tail) = word.split_at(word.len() - r);
        self.compute(msg) == tail
    }
}
