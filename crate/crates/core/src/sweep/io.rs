use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use super::{Param, SweepResult, SweepRow};
use crate::error::{Error, Result};

pub const JSON_SCHEMA_VERSION: u32 = 1;

/// 17 significant digits: enough to read back the same `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_axis(param: Param, v: f64) -> String {
    if param.is_integer() {
        format!("{}", v as u64)
    } else {
        fmt_f64(v)
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn header(result: &SweepResult) -> Vec<&'static str> {
    let mut h = result.grid.axis_names();
    h.extend(["quantity", "value", "units", "flags"]);
    h
}

fn record(result: &SweepResult, row: &SweepRow) -> Vec<String> {
    let mut rec: Vec<String> = result
        .grid
        .axes
        .iter()
        .zip(&row.point)
        .map(|(a, &v)| fmt_axis(a.param, v))
        .collect();
    rec.push(row.quantity.as_str().to_string());
    rec.push(row.value.map(fmt_f64).unwrap_or_default());
    rec.push(row.units.to_string());
    rec.push(row.flags.join(";"));
    rec
}

/// CSV with LF line endings, one row per (point, quantity).
pub fn write_csv_to<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header(result))?;
    for row in &result.rows {
        w.write_record(record(result, row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_csv_to(result, BufWriter::new(file)).map_err(csv_err(path))
}

/// The JSON document: schema version, metadata and rows.
pub fn to_json(result: &SweepResult) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|row| {
            let point: Map<String, Value> = result
                .grid
                .axes
                .iter()
                .zip(&row.point)
                .map(|(a, &v)| {
                    let v = if a.param.is_integer() {
                        json!(v as u64)
                    } else {
                        json!(v)
                    };
                    (a.param.as_str().to_string(), v)
                })
                .collect();
            json!({
                "point": point,
                "quantity": row.quantity,
                "value": row.value,
                "units": row.units,
                "flags": row.flags,
            })
        })
        .collect();
    json!({
        "schema": JSON_SCHEMA_VERSION,
        "metadata": {
            "tool": "ea-toolkit",
            "version": crate::VERSION,
            "timestamp_unix": timestamp,
            "seed": result.seed,
            "grid": result.grid,
        },
        "rows": rows,
    })
}

pub fn write_json(result: &SweepResult, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &to_json(result))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

/// One CSV data row read back.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub point: Vec<(String, f64)>,
    pub quantity: String,
    pub value: Option<f64>,
    pub units: String,
    pub flags: Vec<String>,
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("{}: bad number '{s}'", path.display())))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(String::from)
        .collect();
    let axes = header
        .iter()
        .position(|h| h == "quantity")
        .ok_or_else(|| Error::Parse(format!("{}: no quantity column", path.display())))?;
    if header.len() != axes + 4 {
        return Err(Error::Parse(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let point = header[..axes]
            .iter()
            .zip(rec.iter())
            .map(|(h, v)| Ok((h.clone(), parse_f64(v, path)?)))
            .collect::<Result<Vec<_>>>()?;
        let value = match &rec[axes + 1] {
            "" => None,
            v => Some(parse_f64(v, path)?),
        };
        let flags = match &rec[axes + 3] {
            "" => Vec::new(),
            f => f.split(';').map(String::from).collect(),
        };
        out.push(CsvRecord {
            point,
            quantity: rec[axes].to_string(),
            value,
            units: rec[axes + 2].to_string(),
            flags,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    fn sample() -> SweepResult {
        let grid = SweepGrid::new(
            vec![
                Axis::log(Param::NS, 1e-7, 1e-2, 6),
                Axis::log(Param::NOrder, 2.0, 64.0, 6),
            ],
            FixedParams::default(),
            vec![Quantity::RateRatio, Quantity::EaCapacity],
        )
        .unwrap();
        run_sweep(&grid).unwrap()
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let res = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&res, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), res.rows.len());
        for (a, b) in res.rows.iter().zip(&back) {
            assert_eq!(a.value.map(f64::to_bits), b.value.map(f64::to_bits));
            assert_eq!(a.point.len(), b.point.len());
            for (x, (_, y)) in a.point.iter().zip(&b.point) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            assert_eq!(a.quantity.as_str(), b.quantity);
            assert_eq!(a.flags, b.flags);
        }
    }

    #[test]
    fn empty_quantity_list_gives_header_only() {
        let grid = SweepGrid::new(
            vec![Axis::log(Param::NS, 1e-6, 1e-3, 4)],
            FixedParams::default(),
            vec![],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv_to(&run_sweep(&grid).unwrap(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n_s,quantity,value,units,flags\n"
        );
    }

    #[test]
    fn csv_is_deterministic() {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_csv_to(&sample(), &mut a).unwrap();
        write_csv_to(&sample(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_shape() {
        let v = to_json(&sample());
        assert_eq!(v["schema"], 1);
        assert_eq!(v["metadata"]["tool"], "ea-toolkit");
        assert_eq!(v["rows"].as_array().unwrap().len(), 72);
        assert!(v["rows"][0]["point"]["n_s"].is_number());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_json(&sample(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["rows"], v["rows"]);
    }

    #[test]
    fn unwritable_path_reports_io_error() {
        let res = sample();
        let path = Path::new("/nonexistent-dir/x.csv");
        assert!(matches!(write_csv(&res, path), Err(Error::Io { .. })));
    }
}
