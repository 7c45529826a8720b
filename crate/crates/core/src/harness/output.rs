use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::run::RunReport;
use super::HarnessError;
use crate::drl::CurvePoint;

/// Column order of `curve.csv`.
pub const CURVE_HEADER: &str = "seed,update,episodes_seen,urllc_score,mean_reward";

/// Appends curve rows to a CSV file, flushing after every row so partial
/// runs leave a readable file.
pub struct CurveWriter {
    inner: csv::Writer<File>,
}

impl CurveWriter {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        inner.write_record(CURVE_HEADER.split(','))?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn append(&mut self, point: &CurvePoint) -> Result<(), HarnessError> {
        self.inner.serialize(point)?;
        self.inner.flush()?;
        Ok(())
    }
}

pub fn read_curve(path: &Path) -> Result<Vec<CurvePoint>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<CurvePoint>, _>>()?)
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<RunReport, HarnessError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Writes `curve.csv` (every seed's curve) and `report.json` into `out_dir`.
pub fn emit_metrics(report: &RunReport, out_dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let mut w = CurveWriter::create(&out_dir.join("curve.csv"))?;
    for seed in &report.seeds {
        for p in &seed.curve {
            w.append(p)?;
        }
    }
    write_report(report, &out_dir.join("report.json"))
}
