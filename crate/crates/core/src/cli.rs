//! Command-line front end of the FER simulator.
//!
//! Every setting can come from a flag, a `POLAR_SIM_*` environment variable
//! or a TOML file (`--config`) using the flag names as keys. Flags beat the
//! environment, which beats the file, which beats the built-in defaults.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::list::{Pmu, PrunerKind};
use crate::pruning::FillPolicy;
use crate::sim::{
    self, ArithMode, DecoderKind, ErrorMode, FrozenSource, OutputFormat, SimConfig, SweepReport,
};

/// Parses a kebab-case enum name through its serde representation.
fn parse_name<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase())).map_err(|e| e.to_string())
}

pub fn parse_switch(s: &str) -> std::result::Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected on or off, got {s:?}")),
    }
}

pub fn parse_hex(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u64::from_str_radix(digits, 16).map_err(|e| format!("bad hex value {s:?}: {e}"))
}

/// SNR points: `1,1.5,2`, `inf`, or inclusive ranges `start:step:stop`,
/// freely mixed.
pub fn parse_snr_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    parse_snr_arg(s).map(|l| l.0)
}

/// Parsed `--snr` value.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrList(pub Vec<f64>);

fn parse_snr_arg(s: &str) -> std::result::Result<SnrList, String> {
    let num = |t: &str| -> std::result::Result<f64, String> {
        t.trim().parse::<f64>().map_err(|_| format!("bad SNR value {t:?}"))
    };
    let mut out = Vec::new();
    for item in s.split(',').filter(|t| !t.trim().is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, step, b] => {
                let (a, step, b) = (num(a)?, num(step)?, num(b)?);
                if !(step > 0.0 && a.is_finite() && b.is_finite() && a <= b) {
                    return Err(format!("bad SNR range {item:?}"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| a + i as f64 * step));
            }
            _ => return Err(format!("bad SNR item {item:?}")),
        }
    }
    if out.is_empty() {
        return Err("empty SNR list".into());
    }
    Ok(SnrList(out))
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "polar-sim",
    version,
    about = "Monte Carlo FER/BER sweeps for CRC-aided polar list decoders"
)]
pub struct Args {
    /// TOML file whose keys are the long flag names
    #[arg(long, env = "POLAR_SIM_CONFIG")]
    pub config: Option<PathBuf>,
    /// log2 of the code length [default: 10]
    #[arg(long, env = "POLAR_SIM_N")]
    pub n: Option<u32>,
    /// Information bits including the CRC [default: N/2]
    #[arg(long, env = "POLAR_SIM_K")]
    pub k: Option<usize>,
    /// CRC length r; 0 disables the CRC [default: 16]
    #[arg(long, env = "POLAR_SIM_CRC_BITS")]
    pub crc_bits: Option<u32>,
    /// CRC taps in hex, leading term omitted [default: conventional for r]
    #[arg(long, env = "POLAR_SIM_CRC_POLY", value_parser = parse_hex)]
    pub crc_poly: Option<u64>,
    /// Frozen-index file: one index per line, `#` starts a comment
    #[arg(long, env = "POLAR_SIM_FROZEN_FILE", conflicts_with = "design_snr")]
    pub frozen_file: Option<PathBuf>,
    /// Design SNR (Eb/N0, dB) of the Bhattacharyya construction [default: 2.0]
    #[arg(long, env = "POLAR_SIM_DESIGN_SNR", allow_negative_numbers = true)]
    pub design_snr: Option<f64>,
    /// sc or scl [default: scl]
    #[arg(long, env = "POLAR_SIM_DECODER", value_parser = parse_name::<DecoderKind>)]
    pub decoder: Option<DecoderKind>,
    /// List size, a power of two [default: 8]
    #[arg(long, short = 'L', env = "POLAR_SIM_LIST_SIZE")]
    pub list_size: Option<usize>,
    /// sort or dts [default: sort]
    #[arg(long, env = "POLAR_SIM_PRUNER", value_parser = parse_name::<PrunerKind>)]
    pub pruner: Option<PrunerKind>,
    /// Sorted index (0-based) of the rejection threshold, in [L/2, L) [default: max(L-2, L/2)]
    #[arg(long, env = "POLAR_SIM_RT_INDEX")]
    pub rt_index: Option<usize>,
    /// Middle-band fill for dts: scan-order or random [default: scan-order]
    #[arg(long, env = "POLAR_SIM_FILL", value_parser = parse_name::<FillPolicy>)]
    pub fill: Option<FillPolicy>,
    /// float or fixed [default: float]
    #[arg(long, env = "POLAR_SIM_ARITH", value_parser = parse_name::<ArithMode>)]
    pub arith: Option<ArithMode>,
    /// Channel LLR bits in fixed mode [default: 6]
    #[arg(long, env = "POLAR_SIM_Q_CHANNEL")]
    pub q_channel: Option<u32>,
    /// Path-metric bits in fixed mode [default: 8]
    #[arg(long, env = "POLAR_SIM_Q_PM")]
    pub q_pm: Option<u32>,
    /// Quantization steps per LLR unit in fixed mode [default: 2.0]
    #[arg(long, env = "POLAR_SIM_LLR_SCALE")]
    pub llr_scale: Option<f64>,
    /// Path-metric update: hardware or exact [default: hardware]
    #[arg(long, env = "POLAR_SIM_PMU", value_parser = parse_name::<Pmu>)]
    pub pmu: Option<Pmu>,
    /// Merge frozen sibling leaves into one update: on or off [default: off]
    #[arg(long, env = "POLAR_SIM_FROZEN_SIBLING", value_parser = parse_switch)]
    pub frozen_sibling: Option<bool>,
    /// Subtract the smallest path metric after every bit: on or off [default: off]
    #[arg(long, env = "POLAR_SIM_PM_NORMALIZE", value_parser = parse_switch)]
    pub pm_normalize: Option<bool>,
    /// Eb/N0 points in dB, e.g. 1,1.5,2 or 1:0.25:3 or inf [default: 2.0]
    #[arg(long, env = "POLAR_SIM_SNR", value_parser = parse_snr_arg, allow_hyphen_values = true)]
    pub snr: Option<SnrList>,
    /// Stop a point after this many frame errors [default: 100]
    #[arg(long, env = "POLAR_SIM_MIN_ERRORS")]
    pub min_errors: Option<u64>,
    /// Frame cap per point [default: 10000000]
    #[arg(long, env = "POLAR_SIM_MAX_FRAMES")]
    pub max_frames: Option<u64>,
    /// Master seed [default: 1]
    #[arg(long, env = "POLAR_SIM_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it [default: available cores]
    #[arg(long, env = "POLAR_SIM_WORKERS")]
    pub workers: Option<usize>,
    /// Processing elements per SC lane [default: min(64, N/2)]
    #[arg(long, env = "POLAR_SIM_PE_COUNT")]
    pub pe_count: Option<usize>,
    /// Clock for the throughput column [default: 641]
    #[arg(long, env = "POLAR_SIM_CLOCK_MHZ")]
    pub clock_mhz: Option<f64>,
    /// Frame errors over the full source word or payload only: full or info [default: full]
    #[arg(long, env = "POLAR_SIM_ERROR_MODE", value_parser = parse_name::<ErrorMode>)]
    pub error_mode: Option<ErrorMode>,
    /// Output file [default: standard output]
    #[arg(long, env = "POLAR_SIM_OUT")]
    pub out: Option<PathBuf>,
    /// csv or json [default: csv]
    #[arg(long, env = "POLAR_SIM_FORMAT", value_parser = parse_name::<OutputFormat>)]
    pub format: Option<OutputFormat>,
    /// Print the resolved configuration as JSON and exit
    #[arg(long)]
    pub print_config: bool,
    /// No progress lines on standard error
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(untagged)]
enum SnrSpec {
    #[default]
    Unset,
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Switch {
    Bool(bool),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum HexOrInt {
    Int(u64),
    Text(String),
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    n: Option<u32>,
    k: Option<usize>,
    crc_bits: Option<u32>,
    crc_poly: Option<HexOrInt>,
    frozen_file: Option<PathBuf>,
    design_snr: Option<f64>,
    decoder: Option<DecoderKind>,
    list_size: Option<usize>,
    pruner: Option<PrunerKind>,
    rt_index: Option<usize>,
    fill: Option<FillPolicy>,
    arith: Option<ArithMode>,
    q_channel: Option<u32>,
    q_pm: Option<u32>,
    llr_scale: Option<f64>,
    pmu: Option<Pmu>,
    frozen_sibling: Option<Switch>,
    pm_normalize: Option<Switch>,
    #[serde(default)]
    snr: SnrSpec,
    min_errors: Option<u64>,
    max_frames: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
    pe_count: Option<usize>,
    clock_mhz: Option<f64>,
    error_mode: Option<ErrorMode>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
}

fn switch(flag: Option<bool>, file: Option<Switch>, default: bool) -> Result<bool> {
    match (flag, file) {
        (Some(v), _) | (None, Some(Switch::Bool(v))) => Ok(v),
        (None, Some(Switch::Text(t))) => parse_switch(&t).map_err(Error::Config),
        (None, None) => Ok(default),
    }
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut file: FileConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    // Relative frozen-set paths are taken from the config file's directory.
    if let (Some(f), Some(dir)) = (&file.frozen_file, path.parent()) {
        if f.is_relative() {
            file.frozen_file = Some(dir.join(f));
        }
    }
    Ok(file)
}

impl Args {
    /// Resolves flags, environment, config file and defaults into one
    /// validated configuration.
    pub fn resolve(&self) -> Result<SimConfig> {
        let file = match &self.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        let cfg_err = |e: String| Error::Config(e);
        let d = SimConfig::default();

        let n = self.n.or(file.n).unwrap_or(d.n);
        if n == 0 || n > 24 {
            return Err(Error::Config(format!("n = {n} outside 1..=24")));
        }
        let frozen = match (&self.frozen_file, self.design_snr) {
            (Some(p), _) => FrozenSource::File(p.clone()),
            (None, Some(s)) => FrozenSource::Design { snr_db: s },
            (None, None) => match (&file.frozen_file, file.design_snr) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config("frozen-file and design-snr are exclusive".into()))
                }
                (Some(p), None) => FrozenSource::File(p.clone()),
                (None, Some(s)) => FrozenSource::Design { snr_db: s },
                (None, None) => d.frozen.clone(),
            },
        };
        let crc_poly = match (self.crc_poly, file.crc_poly) {
            (Some(v), _) => Some(v),
            (None, Some(HexOrInt::Int(v))) => Some(v),
            (None, Some(HexOrInt::Text(t))) => Some(parse_hex(&t).map_err(cfg_err)?),
            (None, None) => None,
        };
        let frozen_sibling = switch(self.frozen_sibling, file.frozen_sibling, d.frozen_sibling)?;
        let pm_normalize = switch(self.pm_normalize, file.pm_normalize, d.pm_normalize)?;
        let snr_db = match (&self.snr, file.snr) {
            (Some(v), _) => v.0.clone(),
            (None, SnrSpec::List(v)) => v,
            (None, SnrSpec::Text(t)) => parse_snr_list(&t).map_err(cfg_err)?,
            (None, SnrSpec::Unset) => d.snr_db.clone(),
        };
        let workers = self.workers.or(file.workers).unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |w| w.get())
        });

        let cfg = SimConfig {
            n,
            k: self.k.or(file.k).unwrap_or(1usize << (n - 1)),
            crc_bits: self.crc_bits.or(file.crc_bits).unwrap_or(d.crc_bits),
            crc_poly,
            frozen,
            decoder: self.decoder.or(file.decoder).unwrap_or(d.decoder),
            list_size: self.list_size.or(file.list_size).unwrap_or(d.list_size),
            pruner: self.pruner.or(file.pruner).unwrap_or(d.pruner),
            rt_index: self.rt_index.or(file.rt_index),
            fill: self.fill.or(file.fill).unwrap_or(d.fill),
            arith: self.arith.or(file.arith).unwrap_or(d.arith),
            q_channel: self.q_channel.or(file.q_channel).unwrap_or(d.q_channel),
            q_pm: self.q_pm.or(file.q_pm).unwrap_or(d.q_pm),
            llr_scale: self.llr_scale.or(file.llr_scale).unwrap_or(d.llr_scale),
            pmu: self.pmu.or(file.pmu).unwrap_or(d.pmu),
            frozen_sibling,
            pm_normalize,
            snr_db,
            min_frame_errors: self.min_errors.or(file.min_errors).unwrap_or(d.min_frame_errors),
            max_frames: self.max_frames.or(file.max_frames).unwrap_or(d.max_frames),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
            workers,
            pe_count: self
                .pe_count
                .or(file.pe_count)
                .unwrap_or(d.pe_count.min((1usize << n) / 2).max(1)),
            clock_mhz: self.clock_mhz.or(file.clock_mhz).unwrap_or(d.clock_mhz),
            error_mode: self.error_mode.or(file.error_mode).unwrap_or(d.error_mode),
            out: self.out.clone().or(file.out),
            format: self.format.or(file.format).unwrap_or(d.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs the simulator and returns the process exit code: 0 on success,
/// 2 for invalid configuration, 1 for I/O failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("polar-sim: {e}");
            match e {
                Error::Io { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn execute(args: &Args) -> Result<()> {
    let cfg = args.resolve()?;
    if args.print_config {
        let text = serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n";
        return std::io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        });
    }
    let mut results = Vec::with_capacity(cfg.snr_db.len());
    for &snr in &cfg.snr_db {
        let r = sim::run_point(&cfg, snr)?;
        if !args.quiet {
            eprintln!(
                "snr {:>6} dB  frames {:>9}  errors {:>6}  fer {:.3e}  [{:.3e}, {:.3e}]",
                r.snr_db, r.frames, r.frame_errors, r.fer, r.fer_ci_lo, r.fer_ci_hi
            );
        }
        results.push(r);
    }
    for w in sim::monotonicity_flags(&results) {
        eprintln!("warning: {w}");
    }
    sim::emit(&SweepReport::new(&cfg, results), cfg.format, cfg.out.as_deref())
}
