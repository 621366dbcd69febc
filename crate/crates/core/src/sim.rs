//! Monte Carlo frame-error-rate harness.
//!
//! Frame `t` of every SNR point draws its payload and noise from a ChaCha8
//! stream selected by `(seed, t)`, so results do not depend on how frames
//! are spread over worker threads, and different decoders configured with
//! the same seed see exactly the same frames.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{Arithmetic, DEFAULT_LLR_SCALE, DEFAULT_Q_CHANNEL, DEFAULT_Q_PM};
use crate::channel::{self, ChannelParams};
use crate::crc::CrcPoly;
use crate::error::{Error, Result};
use crate::latency::{cycle_report, CycleReport, HardwareConfig};
use crate::list::{CopyPolicy, DecoderConfig, Pmu, PrunerKind, SclDecoder};
use crate::polar_code::{load_frozen_set, PolarCode, DEFAULT_DESIGN_SNR_DB};
use crate::pruning::FillPolicy;
use crate::sc::{CheckNode, ScDecoder};

pub const TOOL_NAME: &str = "polar-sim";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Frames simulated between stopping-rule checks.
const BATCH: u64 = 256;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Sc,
    Scl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArithMode {
    Float,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    /// Compare the whole source word (payload, CRC and frozen bits).
    Full,
    /// Compare the payload bits only.
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrozenSource {
    Design { snr_db: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u32,
    pub k: usize,
    pub crc_bits: u32,
    /// CRC taps below the leading term; `None` uses the conventional
    /// polynomial for `crc_bits`.
    pub crc_poly: Option<u64>,
    pub frozen: FrozenSource,
    pub decoder: DecoderKind,
    pub list_size: usize,
    pub pruner: PrunerKind,
    pub rt_index: Option<usize>,
    pub fill: FillPolicy,
    pub arith: ArithMode,
    pub q_channel: u32,
    pub q_pm: u32,
    pub llr_scale: f64,
    pub pmu: Pmu,
    pub frozen_sibling: bool,
    #[serde(default)]
    pub pm_normalize: bool,
    #[serde(with = "snr_list")]
    pub snr_db: Vec<f64>,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    pub pe_count: usize,
    pub clock_mhz: f64,
    pub error_mode: ErrorMode,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 10,
            k: 512,
            crc_bits: 16,
            crc_poly: None,
            frozen: FrozenSource::Design {
                snr_db: DEFAULT_DESIGN_SNR_DB,
            },
            decoder: DecoderKind::Scl,
            list_size: 8,
            pruner: PrunerKind::Sort,
            rt_index: None,
            fill: FillPolicy::ScanOrder,
            arith: ArithMode::Float,
            q_channel: DEFAULT_Q_CHANNEL,
            q_pm: DEFAULT_Q_PM,
            llr_scale: DEFAULT_LLR_SCALE,
            pmu: Pmu::Hardware,
            frozen_sibling: false,
            pm_normalize: false,
            snr_db: vec![2.0],
            min_frame_errors: 100,
            max_frames: 10_000_000,
            seed: 1,
            workers: 1,
            pe_count: 64,
            clock_mhz: 641.0,
            error_mode: ErrorMode::Full,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl SimConfig {
    pub fn arithmetic(&self) -> Arithmetic {
        match self.arith {
            ArithMode::Float => Arithmetic::Float,
            ArithMode::Fixed => Arithmetic::Fixed {
                q_channel: self.q_channel,
                q_pm: self.q_pm,
                llr_scale: self.llr_scale,
            },
        }
    }

    pub fn crc(&self) -> Result<Option<CrcPoly>> {
        match (self.crc_bits, self.crc_poly) {
            (0, _) => Ok(None),
            (r, Some(taps)) => CrcPoly::new(r, taps).map(Some),
            (r, None) => CrcPoly::default_for(r).map(Some).ok_or_else(|| {
                Error::Config(format!("no default CRC polynomial of degree {r}; pass --crc-poly"))
            }),
        }
    }

    pub fn build_code(&self) -> Result<PolarCode> {
        let crc = self.crc()?;
        let frozen = match &self.frozen {
            FrozenSource::Design { snr_db } => {
                crate::polar_code::construct_frozen_set(self.n, self.k, *snr_db)?
            }
            FrozenSource::File(p) => load_frozen_set(p, 1usize << self.n)?,
        };
        PolarCode::new(self.n, self.k, frozen, crc)
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        DecoderConfig {
            list_size: self.list_size,
            pruner: self.pruner,
            rt_index: self.rt_index,
            fill: self.fill,
            fill_seed: self.seed,
            arith: self.arithmetic(),
            pmu: self.pmu,
            check: CheckNode::MinSum,
            frozen_sibling: self.frozen_sibling,
            copy: CopyPolicy::Lazy,
            pm_normalize: self.pm_normalize,
        }
    }

    pub fn hardware(&self) -> HardwareConfig {
        HardwareConfig {
            pe_count: self.pe_count,
            clock_mhz: self.clock_mhz,
            frozen_sibling: self.frozen_sibling,
        }
    }

    /// Checks every field; nothing is simulated before this passes.
    pub fn validate(&self) -> Result<PolarCode> {
        let code = self.build_code()?;
        if self.decoder == DecoderKind::Scl {
            self.decoder_config().validate()?;
        } else {
            self.arithmetic().validate()?;
        }
        self.hardware().validate(code.len())?;
        if self.snr_db.is_empty() {
            return Err(Error::Config("at least one SNR point is required".into()));
        }
        for &s in &self.snr_db {
            ChannelParams::from_ebn0(s, code.rate())?;
        }
        if self.max_frames == 0 {
            return Err(Error::Config("max_frames must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(code)
    }
}

/// One transmitted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub source_word: Vec<u8>,
    pub llr: Vec<f64>,
}

/// The RNG stream of frame `index`.
pub fn frame_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random payload → source word → codeword → BPSK → AWGN → LLR, quantized
/// in fixed arithmetic.
pub fn make_frame<R: Rng + ?Sized>(
    code: &PolarCode,
    ch: &ChannelParams,
    arith: &Arithmetic,
    rng: &mut R,
) -> Frame {
    let payload: Vec<u8> = (0..code.payload_len()).map(|_| rng.random_range(0..2)).collect();
    let source_word = code
        .assemble_source_word(&payload)
        .expect("payload length matches");
    let x = code.encode(&source_word);
    let y = channel::add_awgn(&channel::modulate(&x), ch.sigma, rng);
    let mut llr = channel::channel_llr(&y, ch.sigma);
    if let Arithmetic::Fixed {
        q_channel,
        llr_scale,
        ..
    } = *arith
    {
        llr = channel::quantize_frame(&llr, q_channel, llr_scale);
    }
    Frame { source_word, llr }
}

/// Either decoder behind one interface.
#[derive(Debug, Clone)]
pub enum AnyDecoder {
    Sc(ScDecoder),
    Scl(Box<SclDecoder>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameOutcome {
    pub decoded: Vec<u8>,
    pub frame_error: bool,
    pub bit_errors: u64,
    pub starved: bool,
    pub crc_miss: bool,
    pub rule3_filled: u64,
    pub survivors: u64,
}

impl AnyDecoder {
    pub fn new(cfg: &SimConfig, code: &PolarCode) -> Result<Self> {
        Ok(match cfg.decoder {
            DecoderKind::Sc => AnyDecoder::Sc(ScDecoder::new(code, cfg.arithmetic(), CheckNode::MinSum)),
            DecoderKind::Scl => AnyDecoder::Scl(Box::new(SclDecoder::new(code, cfg.decoder_config())?)),
        })
    }

    pub fn run(&mut self, code: &PolarCode, frame: &Frame, mode: ErrorMode, fill_seed: u64) -> FrameOutcome {
        let mut out = FrameOutcome::default();
        match self {
            AnyDecoder::Sc(d) => out.decoded = d.decode(&frame.llr),
            AnyDecoder::Scl(d) => {
                d.reseed(fill_seed);
                let r = d.decode(&frame.llr);
                out.decoded = r.source_word;
                out.starved = r.diagnostics.starved_lpos > 0;
                out.crc_miss = r.diagnostics.crc_miss;
                out.rule3_filled = r.diagnostics.filled_by_rule3 as u64;
                out.survivors = r.diagnostics.survivors as u64;
            }
        }
        let payload = &code.info_set()[..code.payload_len()];
        out.bit_errors = payload
            .iter()
            .filter(|&&i| out.decoded[i] != frame.source_word[i])
            .count() as u64;
        out.frame_error = match mode {
            ErrorMode::Full => out.decoded != frame.source_word,
            ErrorMode::Info => out.bit_errors > 0,
        };
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerResult {
    #[serde(with = "snr_value")]
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub fer_ci_lo: f64,
    pub fer_ci_hi: f64,
    /// Rule-3 survivors over all survivors of double-threshold prunings.
    pub rule3_fill_rate: f64,
    /// Fraction of frames with at least one starved pruning.
    pub starve_rate: f64,
    /// Fraction of frames where no list entry passed the CRC.
    pub crc_miss_rate: f64,
    pub cycles: CycleReport,
    pub seed: u64,
}

/// Wilson score interval at 95 %.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs frames `0..` at `snr_db` until `min_frame_errors` or `max_frames`.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<FerResult> {
    let code = cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    run_point_with(cfg, &code, snr_db, &pool)
}

fn run_point_with(cfg: &SimConfig, code: &PolarCode, snr_db: f64, pool: &rayon::ThreadPool) -> Result<FerResult> {
    let ch = ChannelParams::from_ebn0(snr_db, code.rate())?;
    let arith = cfg.arithmetic();
    let proto = AnyDecoder::new(cfg, code)?;
    let cycles = cycle_report(code, &cfg.hardware())?;

    let (mut frames, mut frame_errors, mut bit_errors) = (0u64, 0u64, 0u64);
    let (mut starved, mut crc_miss, mut filled, mut survivors) = (0u64, 0u64, 0u64, 0u64);
    'outer: while frames < cfg.max_frames {
        let end = (frames + BATCH).min(cfg.max_frames);
        let batch: Vec<FrameOutcome> = pool.install(|| {
            (frames..end)
                .into_par_iter()
                .map_init(
                    || proto.clone(),
                    |dec, t| {
                        let mut rng = frame_rng(cfg.seed, t);
                        let frame = make_frame(code, &ch, &arith, &mut rng);
                        let fill_seed = rng.random();
                        dec.run(code, &frame, cfg.error_mode, fill_seed)
                    },
                )
                .collect()
        });
        for o in batch {
            frames += 1;
            frame_errors += o.frame_error as u64;
            bit_errors += o.bit_errors;
            starved += o.starved as u64;
            crc_miss += o.crc_miss as u64;
            filled += o.rule3_filled;
            survivors += o.survivors;
            if frame_errors >= cfg.min_frame_errors {
                break 'outer;
            }
        }
    }
    let (lo, hi) = wilson_interval(frame_errors, frames);
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(FerResult {
        snr_db,
        frames,
        frame_errors,
        bit_errors,
        fer: ratio(frame_errors, frames),
        ber: ratio(bit_errors, frames * code.payload_len() as u64),
        fer_ci_lo: lo,
        fer_ci_hi: hi,
        rule3_fill_rate: if cfg.pruner == PrunerKind::Dts { ratio(filled, survivors) } else { 0.0 },
        starve_rate: ratio(starved, frames),
        crc_miss_rate: ratio(crc_miss, frames),
        cycles,
        seed: cfg.seed,
    })
}

pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<FerResult>> {
    let code = cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    cfg.snr_db
        .iter()
        .map(|&s| run_point_with(cfg, &code, s, &pool))
        .collect()
}

/// Same-frame comparison of two decoder configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divergence {
    pub frames: u64,
    /// Frames whose decoded source words differ between the two decoders.
    pub differing_outputs: u64,
    pub errors_a: u64,
    pub errors_b: u64,
}

/// Decodes frames `0..frames` with both configurations. Channel parameters,
/// seed and code come from `a`; `b` must describe the same code.
pub fn compare_decoders(a: &SimConfig, b: &SimConfig, snr_db: f64, frames: u64) -> Result<Divergence> {
    let code = a.validate()?;
    if b.validate()? != code {
        return Err(Error::Config("compared configurations use different codes".into()));
    }
    let ch = ChannelParams::from_ebn0(snr_db, code.rate())?;
    let arith = a.arithmetic();
    let (pa, pb) = (AnyDecoder::new(a, &code)?, AnyDecoder::new(b, &code)?);
    let pool = thread_pool(a.workers)?;
    let rows: Vec<(bool, bool, bool)> = pool.install(|| {
        (0..frames)
            .into_par_iter()
            .map_init(
                || (pa.clone(), pb.clone()),
                |(da, db), t| {
                    let mut rng = frame_rng(a.seed, t);
                    let frame = make_frame(&code, &ch, &arith, &mut rng);
                    let fill_seed = rng.random();
                    let ra = da.run(&code, &frame, a.error_mode, fill_seed);
                    let rb = db.run(&code, &frame, a.error_mode, fill_seed);
                    (ra.decoded != rb.decoded, ra.frame_error, rb.frame_error)
                },
            )
            .collect()
    });
    Ok(Divergence {
        frames,
        differing_outputs: rows.iter().filter(|r| r.0).count() as u64,
        errors_a: rows.iter().filter(|r| r.1).count() as u64,
        errors_b: rows.iter().filter(|r| r.2).count() as u64,
    })
}

/// Adjacent SNR points whose FER rises with SNR beyond their 95 % intervals.
pub fn monotonicity_flags(results: &[FerResult]) -> Vec<String> {
    let mut pts: Vec<&FerResult> = results.iter().collect();
    pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    pts.windows(2)
        .filter(|w| w[1].fer > w[0].fer && w[1].fer_ci_lo > w[0].fer_ci_hi)
        .map(|w| {
            format!(
                "FER rises from {:.3e} at {} dB to {:.3e} at {} dB",
                w[0].fer, w[0].snr_db, w[1].fer, w[1].snr_db
            )
        })
        .collect()
}

/// Whole-run document written in JSON mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tool: String,
    pub version: String,
    pub config: SimConfig,
    pub results: Vec<FerResult>,
}

impl SweepReport {
    pub fn new(config: &SimConfig, results: Vec<FerResult>) -> Self {
        SweepReport {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            config: config.clone(),
            results,
        }
    }
}

/// CSV columns, in order.
pub const CSV_COLUMNS: [&str; 11] = [
    "snr_db",
    "frames",
    "frame_errors",
    "fer",
    "fer_ci_lo",
    "fer_ci_hi",
    "ber",
    "rule3_fill_rate",
    "starve_rate",
    "cycles",
    "throughput_mbps",
];

pub fn to_json(report: &SweepReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn parse_json(text: &str) -> Result<SweepReport> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("bad report: {e}")))
}

/// `#`-prefixed provenance lines, then a header row and one row per point.
pub fn to_csv(report: &SweepReport) -> String {
    let mut out = format!(
        "# {} {}\n# config: {}\n",
        report.tool,
        report.version,
        serde_json::to_string(&report.config).expect("config serializes")
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in &report.results {
        w.write_record([
            r.snr_db.to_string(),
            r.frames.to_string(),
            r.frame_errors.to_string(),
            r.fer.to_string(),
            r.fer_ci_lo.to_string(),
            r.fer_ci_hi.to_string(),
            r.ber.to_string(),
            r.rule3_fill_rate.to_string(),
            r.starve_rate.to_string(),
            r.cycles.simulated_cycles.to_string(),
            r.cycles.throughput_mbps.to_string(),
        ])
        .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
    out
}

/// Writes `report` to `path`, or standard output when `path` is `None`.
pub fn emit(report: &SweepReport, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(report),
        OutputFormat::Json => to_json(report),
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Non-finite SNRs (the noiseless `inf` point) as strings in JSON.
mod snr_value {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else {
            Repr::Text(v.to_string())
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(s) => s.parse().map_err(E::custom),
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

mod snr_list {
    use super::snr_value::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&x| to_repr(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
    }
}
