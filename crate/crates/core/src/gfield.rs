//! The `GFIELD` text format for multi-component grid data.
//!
//! ```text
//! GFIELD 1
//! nx ny ncomp
//! x0 y0 dx dy
//! <ncomp blocks of ny lines, each with nx values, y ascending>
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! finite double exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::HeightMap;
use crate::grid::{GridDomain, ScalarField};

pub const MAGIC: &str = "GFIELD";
pub const VERSION: u32 = 1;

/// Formats a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_fields<W: Write>(mut out: W, fields: &[ScalarField]) -> Result<()> {
    let d = match fields.first() {
        Some(f) => *f.domain(),
        None => return Err(Error::InvalidField("GFIELD needs at least one component".into())),
    };
    for f in fields {
        crate::grid::ensure_same_domain(&d, f.domain(), "GFIELD write")?;
    }
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "{} {} {}", d.nx, d.ny, fields.len())?;
    writeln!(out, "{} {} {} {}", fmt_f64(d.x0), fmt_f64(d.y0), fmt_f64(d.dx), fmt_f64(d.dy))?;
    let mut line = String::new();
    for f in fields {
        for j in 0..d.ny {
            line.clear();
            for i in 0..d.nx {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{:.16e}", f.at(i, j));
            }
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_fields<R: BufRead>(input: R) -> Result<Vec<ScalarField>> {
    let mut lines = input.lines().enumerate().filter_map(|(n, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((n + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(s))) => Ok((n, s)),
            Some((_, Err(e))) => Err(Error::Io(e)),
            None => Err(Error::Gfield { line: 0, msg: format!("unexpected end of input, expected {what}") }),
        }
    };
    let bad = |line: usize, msg: String| Error::Gfield { line, msg };

    let (ln, header) = next("header")?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(bad(ln, format!("expected `{MAGIC} {VERSION}`")));
    }
    match parts.next().map(str::parse::<u32>) {
        Some(Ok(VERSION)) => {}
        _ => return Err(bad(ln, format!("unsupported version, expected {VERSION}"))),
    }

    let (ln, dims) = next("dimensions")?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| bad(ln, format!("bad dimension `{t}`: {e}"))))
        .collect::<Result<_>>()?;
    let [nx, ny, ncomp] = dims[..] else {
        return Err(bad(ln, "expected `nx ny ncomp`".into()));
    };
    if ncomp == 0 {
        return Err(bad(ln, "ncomp must be at least 1".into()));
    }

    let (ln, geom) = next("geometry")?;
    let geom: Vec<f64> = geom.split_whitespace().map(|t| parse_value(t, ln)).collect::<Result<_>>()?;
    let [x0, y0, dx, dy] = geom[..] else {
        return Err(bad(ln, "expected `x0 y0 dx dy`".into()));
    };
    let domain = GridDomain::new(x0, y0, dx, dy, nx, ny)?;

    let mut fields = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut values = Vec::with_capacity(domain.len());
        for _ in 0..ny {
            let (ln, row) = next("data row")?;
            let before = values.len();
            for t in row.split_whitespace() {
                values.push(parse_value(t, ln)?);
            }
            if values.len() - before != nx {
                return Err(bad(ln, format!("expected {nx} values, found {}", values.len() - before)));
            }
        }
        fields.push(ScalarField::new(domain, values)?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(bad(ln, "trailing data after last block".into()));
    }
    Ok(fields)
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|e| Error::Gfield { line, msg: format!("bad number `{token}`: {e}") })?;
    if !v.is_finite() {
        return Err(Error::Gfield { line, msg: format!("non-finite value `{token}`") });
    }
    Ok(v)
}

pub fn to_string(fields: &[ScalarField]) -> Result<String> {
    let mut buf = Vec::new();
    write_fields(&mut buf, fields)?;
    Ok(String::from_utf8(buf).expect("GFIELD output is ASCII"))
}

pub fn from_str(s: &str) -> Result<Vec<ScalarField>> {
    read_fields(s.as_bytes())
}

pub fn write_file(path: impl AsRef<Path>, fields: &[ScalarField]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_fields(std::io::BufWriter::new(file), fields)
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<ScalarField>> {
    let file = std::fs::File::open(path)?;
    read_fields(std::io::BufReader::new(file))
}

pub fn read_height_map(path: impl AsRef<Path>) -> Result<HeightMap> {
    HeightMap::new(read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ScalarField> {
        let d = GridDomain::new(-0.3, 1.5, 0.1, 0.2, 6, 5).unwrap();
        vec![
            ScalarField::from_fn(d, |x, y| (x * 3.1).sin() + y / 7.0),
            ScalarField::from_fn(d, |x, y| -1e-300 * x + 1e300 * y),
        ]
    }

    #[test]
    fn layout_matches_format() {
        let text = to_string(&sample()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "GFIELD 1");
        assert_eq!(lines[1], "6 5 2");
        assert_eq!(lines.len(), 3 + 2 * 5);
        assert_eq!(lines[3].split_whitespace().count(), 6);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let fields = sample();
        let back = from_str(&to_string(&fields).unwrap()).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in fields.iter().zip(&back) {
            assert_eq!(a.domain(), b.domain());
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let good = to_string(&sample()).unwrap();
        assert!(from_str(&good.replacen("GFIELD 1", "GFIELD 2", 1)).is_err());
        assert!(from_str(&good.replacen("6 5 2", "6 5 3", 1)).is_err());
        assert!(from_str(&good.replacen("6 5 2", "7 5 2", 1)).is_err());
        let mut extra = good.clone();
        extra.push_str("1 2 3\n");
        assert!(from_str(&extra).is_err());
        let nan = good.replacen("GFIELD 1\n6 5 2\n", "GFIELD 1\n6 5 2\nNaN ", 1);
        assert!(from_str(&nan).is_err());
    }
}
