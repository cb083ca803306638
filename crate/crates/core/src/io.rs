//! Snapshot files and CSV tables.
//!
//! A snapshot is a pair `<stem>.json` (header) and `<stem>.bin` (little-endian
//! `(re, im)` pairs of `f64`, row-major for fields).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::manybody::{BosonicState, OccupationBasis};
use crate::nls::{Field2D, TrajectoryRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateHeader {
    #[serde(rename = "D")]
    pub modes: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub basis_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: GridSpec,
    pub t: f64,
}

/// `<stem>.json` and `<stem>.bin`, appended so that dots in the stem survive.
fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    let with = |ext: &str| {
        let mut s = stem.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".json"), with(".bin"))
}

fn write_complex(path: &Path, values: &[Complex64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in values {
        w.write_f64::<LittleEndian>(v.re)?;
        w.write_f64::<LittleEndian>(v.im)?;
    }
    w.flush()?;
    Ok(())
}

fn read_complex(path: &Path, len: usize) -> Result<Vec<Complex64>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        out.push(Complex64::new(re, im));
    }
    if r.read(&mut [0u8])? != 0 {
        return Err(Error::DimensionMismatch(format!("{} holds more than {len} values", path.display())));
    }
    Ok(out)
}

pub fn write_state(stem: &Path, state: &BosonicState) -> Result<()> {
    let (json, bin) = paths(stem);
    let header = StateHeader {
        modes: state.basis.modes(),
        particles: state.basis.particles(),
        basis_hash: state.basis.hash(),
    };
    std::fs::write(json, serde_json::to_string_pretty(&header)?)?;
    write_complex(&bin, &state.coefficients)
}

/// Read a state snapshot, rebuilding the occupation basis from the header
/// and rejecting it if the hash disagrees.
pub fn read_state(stem: &Path) -> Result<BosonicState> {
    let (json, bin) = paths(stem);
    let header: StateHeader = serde_json::from_str(&std::fs::read_to_string(json)?)?;
    let basis = OccupationBasis::with_cap(header.modes, header.particles, usize::MAX)?;
    if basis.hash() != header.basis_hash {
        return Err(Error::DimensionMismatch(format!(
            "basis hash {} does not match D = {}, N = {}",
            header.basis_hash, header.modes, header.particles
        )));
    }
    let coefficients = read_complex(&bin, basis.len())?;
    BosonicState::new(Arc::new(basis), coefficients)
}

pub fn write_field(stem: &Path, field: &Field2D, t: f64) -> Result<()> {
    let (json, bin) = paths(stem);
    let header = FieldHeader { grid: field.grid.clone(), t };
    std::fs::write(json, serde_json::to_string_pretty(&header)?)?;
    write_complex(&bin, &field.values)
}

pub fn read_field(stem: &Path) -> Result<(Field2D, f64)> {
    let (json, bin) = paths(stem);
    let header: FieldHeader = serde_json::from_str(&std::fs::read_to_string(json)?)?;
    let values = read_complex(&bin, header.grid.len())?;
    Ok((Field2D::new(header.grid, values)?, header.t))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with a fixed header; numeric cells go through [`format_float`].
pub struct CsvTable {
    writer: csv::Writer<File>,
}

impl CsvTable {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
        writer.write_record(header).map_err(csv_error)?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<()> {
        let text: Vec<String> = cells.iter().map(Cell::render).collect();
        self.writer.write_record(&text).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut table = CsvTable::create(path, &["t", "mass", "energy", "max_amplitude"])?;
    for r in rows {
        table.row(&[Cell::Float(r.t), Cell::Float(r.mass), Cell::Float(r.energy), Cell::Float(r.max_amplitude)])?;
    }
    table.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn state_snapshot_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let basis = Arc::new(OccupationBasis::new(3, 2).unwrap());
        let c: Vec<Complex64> = (0..basis.len()).map(|i| Complex64::new(i as f64 + 1.0, 0.5 - i as f64)).collect();
        let n = crate::manybody::norm(&c);
        let state = BosonicState::new(basis, c.iter().map(|z| z / n).collect()).unwrap();
        let stem = dir.path().join("psi");
        write_state(&stem, &state).unwrap();
        let back = read_state(&stem).unwrap();
        assert_eq!(back.coefficients, state.coefficients);
        let header: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("psi.json")).unwrap()).unwrap();
        assert_eq!(header["D"], 3);
        assert_eq!(header["N"], 2);
    }

    #[test]
    fn field_snapshot_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let grid = GridSpec::new(4.0, 16).unwrap();
        let field = Field2D::from_fn(grid, |x, y| Complex64::new((-x * x).exp(), y));
        let stem = dir.path().join("phi");
        write_field(&stem, &field, 0.25).unwrap();
        let (back, t) = read_field(&stem).unwrap();
        assert_eq!(back, field);
        assert_eq!(t, 0.25);
    }

    #[test]
    fn csv_has_header_and_exact_floats() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = [TrajectoryRow { t: 0.1, mass: 1.0 / 3.0, energy: -1.5, max_amplitude: 2.0 }];
        write_trajectory_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,mass,energy,max_amplitude"));
        let cells: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(cells, vec![0.1, 1.0 / 3.0, -1.5, 2.0]);
    }
}
