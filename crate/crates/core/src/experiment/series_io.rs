//! Multichannel series CSV: header `t,ch0..ch{c−1}`.

use std::path::Path;

use nalgebra::DMatrix;

use super::synth::Series;
use crate::error::{Error, Result};

pub fn write_series_csv(series: &Series, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..series.channels()).map(|c| format!("ch{c}")));
    w.write_record(&header)?;
    for (r, t) in series.t.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(series.values.row(r).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a series, rejecting malformed or non-finite values and any `t` that
/// does not strictly increase. Errors carry the 1-based file line.
pub fn ingest_series_csv(path: impl AsRef<Path>) -> Result<Series> {
    let path_str = path.as_ref().display().to_string();
    let err = |line: usize, message: String| Error::Parse { path: path_str.clone(), line, message };
    let mut rdr = csv::Reader::from_path(path.as_ref())?;
    let header = rdr.headers()?.clone();
    if header.get(0).map(str::trim) != Some("t") {
        return Err(err(1, "first column must be 't'".into()));
    }
    let c = header.len() - 1;
    if c == 0 {
        return Err(err(1, "no channel columns".into()));
    }
    for (k, name) in header.iter().skip(1).enumerate() {
        if name.trim() != format!("ch{k}") {
            return Err(err(1, format!("expected column 'ch{k}', found '{}'", name.trim())));
        }
    }
    let mut t = Vec::new();
    let mut data = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| err(line, e.to_string()))?;
        if record.len() != c + 1 {
            return Err(err(line, format!("expected {} fields, found {}", c + 1, record.len())));
        }
        let mut row = Vec::with_capacity(c + 1);
        for raw in record.iter() {
            let v: f64 = raw.trim().parse().map_err(|_| err(line, format!("'{}' is not a number", raw.trim())))?;
            if !v.is_finite() {
                return Err(err(line, "non-finite value".into()));
            }
            row.push(v);
        }
        if let Some(&prev) = t.last() {
            if !(row[0] > prev) {
                return Err(err(line, format!("t = {} does not increase past {prev}", row[0])));
            }
        }
        t.push(row[0]);
        data.extend_from_slice(&row[1..]);
    }
    if t.is_empty() {
        return Err(err(2, "no data rows".into()));
    }
    Ok(Series { values: DMatrix::from_row_slice(t.len(), c, &data), t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::synth::{gen_synth, SynthData, SynthSpec};
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_small_file() {
        let f = write("t,ch0,ch1\n0,1.0,2.0\n1,1.5,2.5\n2.5,0,-1\n");
        let s = ingest_series_csv(f.path()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.values[(2, 1)], -1.0);
    }

    #[test]
    fn rejects_out_of_order_time() {
        let f = write("t,ch0\n0,1\n2,1\n1,1\n");
        match ingest_series_csv(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let f = write("t,ch0\n0,1\n1,NaN\n");
        assert!(matches!(ingest_series_csv(f.path()), Err(Error::Parse { line: 3, .. })));
        let f = write("t,ch0\n0,1\n1,abc\n");
        assert!(matches!(ingest_series_csv(f.path()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn round_trip() {
        let SynthData::Series { series, .. } = gen_synth(&SynthSpec::Sinusoid { length: 30, channels: 3, noise: 0.2 }, 5).unwrap() else {
            panic!()
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_series_csv(&series, &p).unwrap();
        assert_eq!(ingest_series_csv(&p).unwrap(), series);
    }
}
