//! CSV input of initial profiles and CSV output of tables and series.
//! Numbers are written as `{:.16e}` (17 significant digits), LF line ends.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const PROFILE_HEADER: [&str; 3] = ["r", "P0", "u0"];

/// Node samples `(r, P₀, u₀)` read from a `r,P0,u0` table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileSamples {
    pub r: Vec<f64>,
    pub p0: Vec<f64>,
    pub u0: Vec<f64>,
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            reason: format!("{other:?}"),
        },
    }
}

pub fn read_profile<R: Read>(reader: R) -> Result<ProfileSamples> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != PROFILE_HEADER {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header `r,P0,u0`, found `{}`", header.join(",")),
        });
    }
    let mut out = ProfileSamples::default();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut vals = [0.0; 3];
        for (k, (field, name)) in rec.iter().zip(PROFILE_HEADER).enumerate() {
            vals[k] = field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                reason: format!("column `{name}`: `{field}` is not a number"),
            })?;
            if !vals[k].is_finite() {
                return Err(Error::Parse {
                    line,
                    reason: format!("column `{name}` is not finite"),
                });
            }
        }
        out.r.push(vals[0]);
        out.p0.push(vals[1]);
        out.u0.push(vals[2]);
    }
    if out.r.is_empty() {
        return Err(Error::Parse {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    Ok(out)
}

pub fn read_profile_file(path: &Path) -> Result<ProfileSamples> {
    read_profile(File::open(path)?)
}

/// Writes a header and rows of numbers.
pub fn write_table<W: Write, I>(writer: W, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        let row = row.as_ref();
        if row.len() != header.len() {
            return Err(Error::Domain(format!(
                "row has {} columns, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|x| format!("{x:.16e}")))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    write_table(BufWriter::new(File::create(path)?), header, rows)
}
