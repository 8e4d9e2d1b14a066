//! Line-oriented text format for lasso instances:
//!
//! ```text
//! LASSO v1 <l> <n> <nu> <seed>
//! <row 1 of D>
//! ...
//! <row l of D>
//! <b>
//! XTRUE <x_true>        (optional)
//! ```
//!
//! Values are space separated and written with 17 significant digits, so a
//! written instance reads back bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{LassoError, LassoInstance};
use crate::linalg::{DenseMatrix, DenseVector};

const MAGIC: &str = "LASSO";
const VERSION: &str = "v1";

/// Scientific notation with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_values<W: Write>(out: &mut W, prefix: Option<&str>, values: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    if let Some(p) = prefix {
        out.write_all(p.as_bytes())?;
        first = false;
    }
    for v in values {
        if !first {
            out.write_all(b" ")?;
        }
        first = false;
        out.write_all(format_f64(*v).as_bytes())?;
    }
    out.write_all(b"\n")
}

pub fn write_instance<W: Write>(inst: &LassoInstance, out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "{MAGIC} {VERSION} {} {} {} {}",
        inst.rows(),
        inst.cols(),
        format_f64(inst.nu),
        inst.seed
    )?;
    for i in 0..inst.rows() {
        write_values(out, None, inst.d.row(i))?;
    }
    write_values(out, None, &inst.b)?;
    if let Some(xt) = &inst.x_true {
        write_values(out, Some("XTRUE"), xt)?;
    }
    Ok(())
}

pub fn save_instance(inst: &LassoInstance, path: &Path) -> Result<(), LassoError> {
    let io_err = |source| LassoError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    write_instance(inst, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

fn parse_err(line: usize, message: impl Into<String>) -> LassoError {
    LassoError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_values(line_no: usize, tokens: &[&str], expected: usize) -> Result<Vec<f64>, LassoError> {
    if tokens.len() != expected {
        return Err(parse_err(
            line_no,
            format!("expected {expected} values, found {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("bad number {t:?}: {e}")))
        })
        .collect()
}

pub fn read_instance<R: Read>(input: R) -> Result<LassoInstance, LassoError> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_line = |what: &str| -> Result<Option<(usize, String)>, LassoError> {
        match lines.next() {
            None => Ok(None),
            Some((no, Ok(text))) => Ok(Some((no, text))),
            Some((no, Err(e))) => Err(parse_err(no, format!("reading {what}: {e}"))),
        }
    };

    let (no, header) = next_line("header")?.ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MAGIC) {
        return Err(parse_err(no, "missing LASSO header"));
    }
    match fields.get(1) {
        Some(&VERSION) => {}
        Some(other) => return Err(LassoError::UnsupportedVersion(other.to_string())),
        None => return Err(parse_err(no, "missing version")),
    }
    if fields.len() != 6 {
        return Err(parse_err(no, "header must be: LASSO v1 <l> <n> <nu> <seed>"));
    }
    let l: usize = fields[2].parse().map_err(|_| parse_err(no, "bad row count"))?;
    let n: usize = fields[3].parse().map_err(|_| parse_err(no, "bad column count"))?;
    let nu: f64 = fields[4].parse().map_err(|_| parse_err(no, "bad nu"))?;
    let seed: u64 = fields[5].parse().map_err(|_| parse_err(no, "bad seed"))?;
    if l == 0 || n == 0 {
        return Err(parse_err(no, "dimensions must be positive"));
    }

    let mut data = Vec::with_capacity(l * n);
    for i in 0..l {
        let (no, text) = next_line("D")?.ok_or_else(|| parse_err(i + 2, "missing row of D"))?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        data.extend(parse_values(no, &tokens, n)?);
    }
    let (no, text) = next_line("b")?.ok_or_else(|| parse_err(l + 2, "missing b"))?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let b = parse_values(no, &tokens, l)?;

    let mut x_true = None;
    while let Some((no, text)) = next_line("trailer")? {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens.first() {
            None => continue,
            Some(&"XTRUE") if x_true.is_none() => {
                x_true = Some(DenseVector::from_vec(parse_values(no, &tokens[1..], n)?)?);
            }
            Some(_) => return Err(parse_err(no, "unexpected trailing content")),
        }
    }

    let d = DenseMatrix::new(l, n, data)?;
    LassoInstance::new(d, DenseVector::from_vec(b)?, nu, x_true, seed)
}

pub fn load_instance(path: &Path) -> Result<LassoInstance, LassoError> {
    let file = File::open(path).map_err(|source| LassoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_instance(file)
}
