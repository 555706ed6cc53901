use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// 17 significant digits in scientific notation; `nan` / `inf` spelled out.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes `rows` as comma-separated lines after `header`, LF endings.
pub fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    let mut w = open(out)?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn write_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> io::Result<()> {
    let mut w = open(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}
