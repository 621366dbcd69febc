//! Static code description: frozen set, CRC, encoder.
//!
//! Encoding uses the natural-order transform `x = u · F^{⊗n}` with kernel
//! `F = [[1, 0], [1, 1]]` and no bit-reversal permutation, so bit `i` of the
//! source word is the `i`-th leaf of the decoder's scheduling tree.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crc::CrcPoly;
use crate::error::{Error, Result};

/// Default design SNR (Eb/N0, dB) for [`construct_frozen_set`].
pub const DEFAULT_DESIGN_SNR_DB: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarCode {
    n: u32,
    k: usize,
    crc: Option<CrcPoly>,
    frozen: Vec<bool>,
    frozen_set: Vec<usize>,
    info_set: Vec<usize>,
}

impl PolarCode {
    /// Builds a code from an explicit frozen set. `k` counts CRC bits.
    pub fn new(
        n: u32,
        k: usize,
        frozen_set: impl IntoIterator<Item = usize>,
        crc: Option<CrcPoly>,
    ) -> Result<Self> {
        if !(1..=24).contains(&n) {
            return Err(Error::param(format!("exponent n = {n} outside [1, 24]")));
        }
        let len = 1usize << n;
        if k == 0 || k > len {
            return Err(Error::param(format!("K = {k} outside [1, {len}]")));
        }
        let r = crc.map_or(0, |p| p.len());
        if r >= k {
            return Err(Error::param(format!("CRC length {r} must be below K = {k}")));
        }
        let mut frozen = vec![false; len];
        for idx in frozen_set {
            if idx >= len {
                return Err(Error::param(format!("frozen index {idx} >= N = {len}")));
            }
            if std::mem::replace(&mut frozen[idx], true) {
                return Err(Error::param(format!("frozen index {idx} listed twice")));
            }
        }
        let frozen_set: Vec<usize> = (0..len).filter(|&i| frozen[i]).collect();
        if frozen_set.len() != len - k {
            return Err(Error::param(format!(
                "frozen set has {} indices, expected N - K = {}",
                frozen_set.len(),
                len - k
            )));
        }
        let info_set = (0..len).filter(|&i| !frozen[i]).collect();
        Ok(PolarCode {
            n,
            k,
            crc,
            frozen,
            frozen_set,
            info_set,
        })
    }

    /// Bhattacharyya construction at `design_snr_db` with the conventional
    /// CRC polynomial for `crc_bits` (none when `crc_bits == 0`).
    pub fn construct(n: u32, k: usize, crc_bits: u32, design_snr_db: f64) -> Result<Self> {
        let crc = match crc_bits {
            0 => None,
            r => Some(CrcPoly::default_for(r).ok_or_else(|| {
                Error::param(format!("no default CRC polynomial of degree {r}"))
            })?),
        };
        let frozen = construct_frozen_set(n, k, design_snr_db)?;
        Self::new(n, k, frozen, crc)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Code length `N = 2^n`.
    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Information bits including the CRC.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn crc(&self) -> Option<CrcPoly> {
        self.crc
    }

    pub fn crc_len(&self) -> usize {
        self.crc.map_or(0, |p| p.len())
    }

    /// `K - r`: the number of user bits carried per frame.
    pub fn payload_len(&self) -> usize {
        self.k - self.crc_len()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    /// Ascending frozen indices.
    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    /// Ascending non-frozen indices.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Places `payload ∥ crc(payload)` on the non-frozen positions in
    /// ascending order; frozen positions are 0.
    pub fn assemble_source_word(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() != self.payload_len() {
            return Err(Error::param(format!(
                "payload has {} bits, expected K - r = {}",
                payload.len(),
                self.payload_len()
            )));
        }
        let mut u = vec![0u8; self.len()];
        let crc = self.crc.map(|p| p.compute(payload)).unwrap_or_default();
        for (&pos, &bit) in self.info_set.iter().zip(payload.iter().chain(&crc)) {
            u[pos] = bit & 1;
        }
        Ok(u)
    }

    /// The `K` non-frozen bits of a source word, payload first.
    pub fn info_bits(&self, u: &[u8]) -> Vec<u8> {
        self.info_set.iter().map(|&i| u[i]).collect()
    }

    /// Whether the non-frozen bits of `u` carry a consistent CRC.
    /// Always true for codes without CRC.
    pub fn crc_ok(&self, u: &[u8]) -> bool {
        match self.crc {
            None => true,
            Some(p) => p.check(&self.info_bits(u)),
        }
    }

    pub fn encode(&self, u: &[u8]) -> Vec<u8> {
        assert_eq!(u.len(), self.len(), "source word length");
        let mut x = u.to_vec();
        polar_transform(&mut x);
        x
    }

    /// Number of pairs `(2j, 2j+1)` with both indices frozen.
    pub fn count_frozen_siblings(&self) -> usize {
        count_frozen_siblings(&self.frozen)
    }
}

/// Number of pairs `(2j, 2j+1)` with both entries of `frozen_mask` set.
pub fn count_frozen_siblings(frozen_mask: &[bool]) -> usize {
    frozen_mask
        .chunks_exact(2)
        .filter(|pair| pair[0] && pair[1])
        .count()
}

/// In-place `x ← x · F^{⊗n}` over GF(2) by butterfly stages.
/// The transform is its own inverse.
pub fn polar_transform(x: &mut [u8]) {
    let len = x.len();
    assert!(len.is_power_of_two(), "length must be a power of two");
    let mut half = 1;
    while half < len {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Natural-log Bhattacharyya parameters of the `2^n` synthetic channels of a
/// BPSK/AWGN channel at Eb/N0 = `design_snr_db` and code rate `rate`.
pub fn bhattacharyya_log(n: u32, design_snr_db: f64, rate: f64) -> Vec<f64> {
    let es_n0 = rate * 10f64.powf(design_snr_db / 10.0);
    let mut z = vec![-es_n0];
    for _ in 0..n {
        let mut next = Vec::with_capacity(z.len() * 2);
        for &lz in &z {
            // ln(2z - z^2) = ln z + ln(2 - z)
            next.push(lz + (2.0 - lz.exp()).ln());
            next.push(2.0 * lz);
        }
        z = next;
    }
    z
}

/// The `N - K` least reliable indices (largest Bhattacharyya parameter),
/// ascending. Ties freeze the lower index first.
pub fn construct_frozen_set(n: u32, k: usize, design_snr_db: f64) -> Result<Vec<usize>> {
    if !(1..=24).contains(&n) {
        return Err(Error::param(format!("exponent n = {n} outside [1, 24]")));
    }
    let len = 1usize << n;
    if k == 0 || k > len {
        return Err(Error::param(format!("K = {k} outside [1, {len}]")));
    }
    if !design_snr_db.is_finite() {
        return Err(Error::param("design SNR must be finite"));
    }
    let z = bhattacharyya_log(n, design_snr_db, k as f64 / len as f64);
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    let mut frozen = order[..len - k].to_vec();
    frozen.sort_unstable();
    Ok(frozen)
}

/// Parses a frozen-set listing: one decimal index per line, `#` comments,
/// blank lines ignored, any order, no duplicates, every index `< len`.
pub fn parse_frozen_set(text: &str, len: usize, origin: &Path) -> Result<Vec<usize>> {
    let mut seen = vec![false; len];
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Format {
            path: origin.to_path_buf(),
            line: lineno + 1,
            msg,
        };
        let idx: usize = line
            .parse()
            .map_err(|_| err(format!("expected a decimal index, found {line:?}")))?;
        if idx >= len {
            return Err(err(format!("index {idx} >= N = {len}")));
        }
        if std::mem::replace(&mut seen[idx], true) {
            return Err(err(format!("duplicate index {idx}")));
        }
        out.push(idx);
    }
    out.sort_unstable();
    Ok(out)
}

pub fn load_frozen_set(path: impl AsRef<Path>, len: usize) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_frozen_set(&text, len, path)
}
