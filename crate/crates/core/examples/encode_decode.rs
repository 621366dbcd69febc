//! Encode one random frame, send it over an AWGN channel and decode it with
//! SC, sorted SCL and double-threshold SCL.
//!
//! cargo run --example encode_decode -- [snr_db]

use polar_dts::arith::Arithmetic;
use polar_dts::channel::{add_awgn, channel_llr, modulate, ChannelParams};
use polar_dts::list::{scl_decode, DecoderConfig};
use polar_dts::polar_code::PolarCode;
use polar_dts::sc::sc_decode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> polar_dts::Result<()> {
    let snr: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.5);
    let code = PolarCode::construct(9, 256, 16, 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let payload: Vec<u8> = (0..code.payload_len()).map(|_| rng.random_range(0..2)).collect();
    let u = code.assemble_source_word(&payload)?;
    let x = code.encode(&u);
    let ch = ChannelParams::from_ebn0(snr, code.rate())?;
    let y = add_awgn(&modulate(&x), ch.sigma, &mut rng);
    let llr = channel_llr(&y, ch.sigma);

    println!(
        "N = {}, K = {} ({} payload + {} CRC), Eb/N0 = {snr} dB, sigma = {:.3}",
        code.len(),
        code.k(),
        code.payload_len(),
        code.crc_len(),
        ch.sigma
    );
    let hard_errors = llr.iter().zip(&x).filter(|(l, &b)| (**l < 0.0) != (b == 1)).count();
    println!("channel hard-decision errors: {hard_errors}");

    let sc = sc_decode(&llr, &code, Arithmetic::Float);
    println!("SC           : {}", verdict(&sc, &u));
    for cfg in [DecoderConfig::sort(8), DecoderConfig::dts(8)] {
        let out = scl_decode(&llr, &code, cfg)?;
        println!(
            "{:<4} L = {:<2} : {}, crc {}, pm {:.2}, list-pruning steps {}",
            format!("{:?}", cfg.pruner),
            cfg.list_size,
            verdict(&out.source_word, &u),
            if out.crc_ok { "ok" } else { "failed" },
            out.pm,
            out.diagnostics.lpo_count
        );
    }
    Ok(())
}

fn verdict(decoded: &[u8], sent: &[u8]) -> String {
    let errors = decoded.iter().zip(sent).filter(|(a, b)| a != b).count();
    if errors == 0 {
        "correct".into()
    } else {
        format!("{errors} bit errors")
    }
}
