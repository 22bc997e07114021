//! Generate a stable AR series, write it as CSV and read it back.

use transparency_game::experiment::{gen_synth, ingest_series_csv, write_series_csv, SynthData, SynthSpec};

fn main() -> transparency_game::Result<()> {
    let spec = SynthSpec::Ar { length: 200, channels: 2, order: 2, noise: 0.05 };
    let SynthData::Series { series, ar } = gen_synth(&spec, 11)? else { unreachable!() };
    let dir = std::env::temp_dir().join("transparency-game-series");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("series.csv");
    write_series_csv(&series, &path)?;
    let back = ingest_series_csv(&path)?;
    println!("{} rows, {} channels, round trip equal: {}", back.len(), back.channels(), back == series);
    if let Some(ar) = ar {
        println!("generating AR parameters: {:?}", ar.flatten());
    }
    Ok(())
}
