//! `time_s,va,vb,vc` waveform files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::SampledWaveform;
use crate::error::{Error, Result};

const COLUMNS: [&str; 4] = ["time_s", "va", "vb", "vc"];

/// Largest accepted deviation of a time step from the mean step, relative.
const MAX_JITTER: f64 = 1e-6;

pub fn read_csv(path: impl AsRef<Path>) -> Result<SampledWaveform> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(BufReader::new(file))
}

/// Parses a waveform from any reader. Row numbers in errors are file line
/// numbers (the header is line 1).
pub fn read_csv_from<R: Read>(reader: R) -> Result<SampledWaveform> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let mut index = [0usize; 4];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }

    let mut time = Vec::new();
    let mut phases = [Vec::new(), Vec::new(), Vec::new()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                reason: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let mut values = [0.0; 4];
        for (v, (&col, name)) in values.iter_mut().zip(index.iter().zip(COLUMNS)) {
            let field = &record[col];
            *v = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    reason: format!("column {name}: `{field}` is not a finite number"),
                })?;
        }
        if let Some(&prev) = time.last() {
            if values[0] <= prev {
                return Err(Error::Parse {
                    row,
                    reason: format!("timestamp {} does not increase (previous {prev})", values[0]),
                });
            }
        }
        time.push(values[0]);
        for (p, v) in phases.iter_mut().zip(&values[1..]) {
            p.push(*v);
        }
    }

    if time.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: time.len() });
    }
    let n = time.len();
    let dt = (time[n - 1] - time[0]) / (n - 1) as f64;
    for (i, pair) in time.windows(2).enumerate() {
        let step = pair[1] - pair[0];
        if ((step - dt) / dt).abs() > MAX_JITTER {
            return Err(Error::Parse {
                row: i + 3,
                reason: format!("non-uniform time step {step} s (mean {dt} s)"),
            });
        }
    }

    let [va, vb, vc] = phases;
    SampledWaveform::new(1.0 / dt, time[0], va, vb, vc)
}

pub fn write_csv(waveform: &SampledWaveform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv_to(waveform, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes with shortest round-trip float formatting, so reading the file
/// back reproduces every sample bit for bit.
pub fn write_csv_to<W: Write + ?Sized>(waveform: &SampledWaveform, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for i in 0..waveform.len() {
        let (a, b, c) = waveform.sample(i);
        writeln!(out, "{},{a},{b},{c}", waveform.time(i))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{generate, SignalSpec};

    #[test]
    fn reads_three_rows() {
        let text = "time_s,va,vb,vc\n0.0,1,-0.5,-0.5\n0.001,0.9,-0.4,-0.5\n0.002,0.8,-0.3,-0.5\n";
        let w = read_csv_from(text.as_bytes()).unwrap();
        assert_eq!(w.len(), 3);
        assert!((w.sample_rate_hz() - 1000.0).abs() < 1e-6);
        assert_eq!(w.sample(1), (0.9, -0.4, -0.5));
    }

    #[test]
    fn missing_column_is_named() {
        let text = "time_s,va,vb\n0,1,2\n0.1,1,2\n";
        let err = read_csv_from(text.as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::MissingColumn(c) if c == "vc"));
        assert!(err.to_string().contains("vc"));
    }

    #[test]
    fn ragged_row_reports_line() {
        let text = "time_s,va,vb,vc\n0,1,2,3\n0.1,1,2\n";
        match read_csv_from(text.as_bytes()).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_uniform_time_rejected() {
        let text = "time_s,va,vb,vc\n0,1,2,3\n0.1,1,2,3\n0.25,1,2,3\n";
        match read_csv_from(text.as_bytes()).unwrap_err() {
            Error::Parse { reason, .. } => assert!(reason.contains("non-uniform")),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn garbage_field_rejected() {
        let text = "time_s,va,vb,vc\n0,1,2,3\n0.1,x,2,3\n";
        assert!(matches!(read_csv_from(text.as_bytes()), Err(Error::Parse { row: 3, .. })));
    }

    #[test]
    fn chirp_round_trip() {
        let w = generate(&SignalSpec::chirp(50.0, -1.0, 0.5), 5000.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chirp.csv");
        write_csv(&w, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), w.len());
        assert!((back.sample_rate_hz() - 5000.0).abs() < 1e-6);
        for (p, q) in w.phases().iter().zip(back.phases()) {
            for (x, y) in p.iter().zip(q) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
        }
    }
}
