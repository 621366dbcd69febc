//! Fixed-point decoding: quantized channel LLRs and saturating path metrics
//! against the floating-point decoder on identical noise.
//!
//! cargo run --release --example fixed_point

use polar_dts::arith::Arithmetic;
use polar_dts::channel::quantize;
use polar_dts::sim::{compare_decoders, ArithMode, SimConfig};

fn main() -> polar_dts::Result<()> {
    for llr in [-40.0, -3.3, -0.2, 0.0, 0.26, 2.9, 15.0] {
        println!("LLR {llr:>6} -> {:>4}", quantize(llr, 6, 2.0));
    }
    let hw = Arithmetic::hardware();
    println!("internal LLR limit {}, path-metric limit {}", hw.llr_limit(), hw.pm_limit());

    let float = SimConfig {
        n: 8,
        k: 128,
        crc_bits: 8,
        pe_count: 16,
        ..SimConfig::default()
    };
    for q_channel in [4, 5, 6] {
        let fixed = SimConfig {
            arith: ArithMode::Fixed,
            q_channel,
            ..float.clone()
        };
        // frames come from the first configuration, so both decode float noise
        let d = compare_decoders(&fixed, &float, 2.0, 3000)?;
        println!(
            "{q_channel}-bit channel LLRs: {} frame errors vs {} in float over {} frames",
            d.errors_a, d.errors_b, d.frames
        );
    }
    Ok(())
}
