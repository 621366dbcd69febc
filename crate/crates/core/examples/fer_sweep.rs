//! A short FER sweep comparing sorted and double-threshold list pruning on
//! the same frames. Prints CSV.
//!
//! cargo run --release --example fer_sweep

use polar_dts::list::PrunerKind;
use polar_dts::sim::{compare_decoders, run_sweep, to_csv, SimConfig, SweepReport};

fn main() -> polar_dts::Result<()> {
    let sort = SimConfig {
        n: 8,
        k: 128,
        crc_bits: 8,
        list_size: 8,
        snr_db: vec![1.0, 1.5, 2.0, 2.5],
        min_frame_errors: 50,
        max_frames: 20_000,
        pe_count: 16,
        ..SimConfig::default()
    };
    let dts = SimConfig {
        pruner: PrunerKind::Dts,
        ..sort.clone()
    };
    for cfg in [&sort, &dts] {
        println!("# pruner {:?}", cfg.pruner);
        print!("{}", to_csv(&SweepReport::new(cfg, run_sweep(cfg)?)));
    }
    let d = compare_decoders(&sort, &dts, 1.5, 2000)?;
    println!(
        "# same 2000 frames at 1.5 dB: outputs differ on {}, errors sort {} vs dts {}",
        d.differing_outputs, d.errors_a, d.errors_b
    );
    Ok(())
}
