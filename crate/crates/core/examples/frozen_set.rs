//! Build a frozen set, write it to a file and load a code from that file.
//!
//! cargo run --example frozen_set -- [design_snr_db]

use polar_dts::polar_code::{construct_frozen_set, load_frozen_set, PolarCode};

fn main() -> polar_dts::Result<()> {
    let snr: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let frozen = construct_frozen_set(6, 32, snr)?;
    println!("(64, 32) frozen set at {snr} dB: {frozen:?}");

    let path = std::env::temp_dir().join("polar_dts_frozen_64.txt");
    let text: Vec<String> = frozen.iter().map(|i| i.to_string()).collect();
    std::fs::write(&path, format!("# (64, 32) at {snr} dB\n{}\n", text.join("\n"))).map_err(|source| {
        polar_dts::Error::Io {
            path: path.clone(),
            source,
        }
    })?;

    let loaded = load_frozen_set(&path, 64)?;
    let code = PolarCode::new(6, 32, loaded, None)?;
    println!("loaded from {}: info set {:?}", path.display(), code.info_set());
    println!("frozen sibling pairs: {}", code.count_frozen_siblings());
    Ok(())
}
