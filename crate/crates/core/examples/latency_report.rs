//! Decoding latency of the list decoder hardware model.
//!
//! cargo run --example latency_report

use polar_dts::latency::{cycle_report, cycles_closed_form, simulate_schedule, HardwareConfig};
use polar_dts::polar_code::PolarCode;

fn main() -> polar_dts::Result<()> {
    println!("{:>6} {:>4} {:>8}", "N", "M", "cycles");
    for n in [8u32, 10, 12] {
        for m in [16usize, 64] {
            println!("{:>6} {:>4} {:>8}", 1usize << n, m, cycles_closed_form(1 << n, m)?);
        }
    }

    let code = PolarCode::construct(10, 512, 16, 2.0)?;
    for frozen_sibling in [false, true] {
        let hw = HardwareConfig {
            pe_count: 64,
            clock_mhz: 641.0,
            frozen_sibling,
        };
        let r = cycle_report(&code, &hw)?;
        println!(
            "\n(1024, 512) code, M = 64, frozen-sibling shortcut {}: {} cycles, {:.1} Mbps at 641 MHz ({} frozen pairs)",
            if frozen_sibling { "on" } else { "off" },
            r.simulated_cycles,
            r.throughput_mbps,
            r.fs_count
        );
    }

    let hw = HardwareConfig {
        pe_count: 2,
        clock_mhz: 1.0,
        frozen_sibling: false,
    };
    let sched = simulate_schedule(&[true, false, false, false], &hw, true)?;
    let ops: Vec<String> = sched.trace.iter().flatten().map(|op| op.to_string()).collect();
    println!("\nN = 4, M = 2 schedule ({} cycles): {}", sched.cycles, ops.join(" "));
    Ok(())
}
