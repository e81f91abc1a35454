//! CSV exports: comma delimiter, `.` decimal separator, mandatory header row.

use std::io::{Read, Write};

use super::IoError;
use crate::dynamics::SimTrace;
use crate::edsa::TripCommand;
use crate::lse::SheddingMatrix;
use crate::sweep::NadirSurface;

/// One row per load, one 0/1 column per event label.
pub fn write_matrix<W: Write>(m: &SheddingMatrix, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["load_id".to_owned()];
    header.extend(m.catalog().labels());
    w.write_record(&header)?;
    for (r, load) in m.load_ids().iter().enumerate() {
        let mut rec = vec![load.to_string()];
        rec.extend((0..m.n_cols()).map(|c| if m.get(r, c) { "1" } else { "0" }.to_owned()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.to_string()))
}

/// Parsed matrix CSV: event labels, load ids and the 0/1 rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTable {
    pub labels: Vec<String>,
    pub loads: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

pub fn read_matrix<R: Read>(input: R) -> Result<MatrixTable, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("load_id") {
        return Err(IoError::Csv("first column must be load_id".into()));
    }
    let labels = header.iter().skip(1).map(str::to_owned).collect();
    let mut t = MatrixTable {
        labels,
        loads: Vec::new(),
        rows: Vec::new(),
    };
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        t.loads.push(rec[0].to_owned());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| match v {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(IoError::Csv(format!("row {}: bad cell '{other}'", i + 2))),
            })
            .collect::<Result<_, _>>()?;
        t.rows.push(row);
    }
    Ok(t)
}

pub fn write_commands<W: Write>(commands: &[TripCommand], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestamp_s", "load_id", "event"])?;
    for c in commands {
        w.write_record([
            format!("{:.6}", c.issued_at),
            c.load.to_string(),
            c.event.clone(),
        ])?;
    }
    w.flush().map_err(|e| IoError::Csv(e.to_string()))
}

/// Columns: time, frequency, one mechanical power per generator, connected load.
pub fn write_trace<W: Write>(trace: &SimTrace, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time_s".to_owned(), "frequency_hz".to_owned()];
    header.extend(trace.generator_ids.iter().map(|g| format!("p_{g}_mw")));
    header.push("total_load_mw".into());
    w.write_record(&header)?;
    for k in 0..trace.len() {
        let mut rec = vec![
            format!("{:.6}", trace.time[k]),
            format!("{:.9}", trace.frequency[k]),
        ];
        rec.extend(trace.generator_power.iter().map(|p| format!("{:.6}", p[k])));
        rec.push(format!("{:.6}", trace.total_load[k]));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| IoError::Csv(e.to_string()))
}

/// Long form: one row per cell.
pub fn write_surface<W: Write>(s: &NadirSurface, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sr_mw", "delay_s", "nadir_hz", "blackout"])?;
    for (i, sr) in s.sr_axis.iter().enumerate() {
        for (j, d) in s.delay_axis.iter().enumerate() {
            w.write_record([
                sr.to_string(),
                d.to_string(),
                format!("{:.9}", s.nadir[i][j]),
                u8::from(s.blackout[i][j]).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| IoError::Csv(e.to_string()))
}

/// Rows of (sr, delay, nadir, blackout) from a surface CSV.
pub fn read_surface<R: Read>(input: R) -> Result<Vec<(f64, f64, f64, bool)>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64, IoError> {
            rec.get(c).and_then(|v| v.parse().ok()).ok_or_else(|| {
                IoError::Csv(format!("row {}: column {} is not a number", i + 2, c + 1))
            })
        };
        out.push((num(0)?, num(1)?, num(2)?, num(3)? != 0.0));
    }
    Ok(out)
}
