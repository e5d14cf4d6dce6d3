//! File formats: CCXGRID text grids, PGM images, CSV scattered samples.
//! Every writer goes through [`write_atomic`].

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CcxError, Result};
use crate::grid::{GridDomain, GridFunction, SampleMask, ScatteredSamples};

pub const GRID_MAGIC: &str = "CCXGRID 1";

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`. Readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CcxError::Parse(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn join<T: std::fmt::Debug>(xs: &[T]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

/// CCXGRID text: magic, dimension, shape, spacings, origin, then the
/// row-major values, one last-axis row per line. `{:?}` gives the
/// shortest decimal that round-trips.
pub fn grid_to_string(g: &GridFunction) -> String {
    let d = g.domain();
    let mut out = String::new();
    out.push_str(GRID_MAGIC);
    out.push('\n');
    out.push_str(&format!("{}\n", d.dim()));
    out.push_str(&join(d.shape()));
    out.push('\n');
    out.push_str(&join(d.spacing()));
    out.push('\n');
    out.push_str(&join(d.origin()));
    out.push('\n');
    let row = d.shape()[d.dim() - 1];
    for chunk in g.values().chunks(row) {
        out.push_str(&join(chunk));
        out.push('\n');
    }
    out
}

fn parse_list<T: std::str::FromStr>(line: Option<&str>, what: &str, n: usize) -> Result<Vec<T>> {
    let line = line.ok_or_else(|| CcxError::Parse(format!("missing {what} line")))?;
    let xs = line
        .split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| CcxError::Parse(format!("bad {what} entry `{t}`"))))
        .collect::<Result<Vec<T>>>()?;
    if xs.len() != n {
        return Err(CcxError::Parse(format!("{what} has {} entries, expected {n}", xs.len())));
    }
    Ok(xs)
}

pub fn grid_from_str(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(GRID_MAGIC) {
        return Err(CcxError::Parse(format!("missing `{GRID_MAGIC}` header")));
    }
    let dim: usize = parse_list(lines.next(), "dimension", 1)?[0];
    let shape: Vec<usize> = parse_list(lines.next(), "shape", dim)?;
    let spacing: Vec<f64> = parse_list(lines.next(), "spacing", dim)?;
    let origin: Vec<f64> = parse_list(lines.next(), "origin", dim)?;
    let domain = GridDomain::new(shape, spacing, origin)?;
    let values = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<f64>().map_err(|_| CcxError::Parse(format!("bad value `{t}`"))))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != domain.len() {
        return Err(CcxError::Parse(format!(
            "{} values for {} nodes",
            values.len(),
            domain.len()
        )));
    }
    GridFunction::new(domain, values)
}

/// Parses a binary (P5) or plain (P2) PGM image into a 2-D grid with
/// spacing 1, rows along axis 0, values divided by the image maximum.
pub fn pgm_from_bytes(bytes: &[u8]) -> Result<GridFunction> {
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(CcxError::Parse("truncated PGM".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    let num = |s: String| -> Result<usize> {
        s.parse().map_err(|_| CcxError::Parse(format!("bad PGM header field `{s}`")))
    };
    let width = num(token(&mut pos)?)?;
    let height = num(token(&mut pos)?)?;
    let maxval = num(token(&mut pos)?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(CcxError::Parse(format!("PGM maxval {maxval}")));
    }
    let n = width * height;
    let raw: Vec<usize> = match magic.as_str() {
        "P2" => (0..n).map(|_| num(token(&mut pos)?)).collect::<Result<_>>()?,
        "P5" => {
            // Exactly one whitespace byte separates the header from the data.
            let start = pos + 1;
            let bpp = if maxval < 256 { 1 } else { 2 };
            let data = bytes
                .get(start..start + n * bpp)
                .ok_or_else(|| CcxError::Parse("truncated PGM raster".into()))?;
            if bpp == 1 {
                data.iter().map(|&b| b as usize).collect()
            } else {
                data.chunks(2).map(|c| (c[0] as usize) << 8 | c[1] as usize).collect()
            }
        }
        other => return Err(CcxError::Parse(format!("unsupported PGM magic `{other}`"))),
    };
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(CcxError::Parse(format!("PGM sample {v} exceeds maxval {maxval}")));
    }
    let domain = GridDomain::new(vec![height, width], vec![1.0, 1.0], vec![0.0, 0.0])?;
    let scale = maxval as f64;
    GridFunction::new(domain, raw.into_iter().map(|v| v as f64 / scale).collect())
}

/// Plain PGM with maxval 255; values are clamped to `[0, 1]`.
pub fn pgm_p2_to_string(g: &GridFunction) -> Result<String> {
    let d = g.domain();
    if d.dim() != 2 {
        return Err(CcxError::InvalidDomain("PGM needs a 2-D grid".into()));
    }
    let (height, width) = (d.shape()[0], d.shape()[1]);
    let mut out = format!("P2\n{width} {height}\n255\n");
    for row in g.values().chunks(width) {
        let line: Vec<String> = row
            .iter()
            .map(|v| ((v.clamp(0.0, 1.0) * 255.0).round() as u32).to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

fn is_pgm(bytes: &[u8]) -> bool {
    bytes.starts_with(b"P2") || bytes.starts_with(b"P5")
}

pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let bytes = fs::read(path)?;
    if is_pgm(&bytes) {
        return pgm_from_bytes(&bytes);
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| CcxError::Parse(format!("{} is not UTF-8", path.display())))?;
    grid_from_str(&text)
}

/// A mask is any grid; nonzero nodes are members.
pub fn mask_from_grid(g: &GridFunction) -> Result<SampleMask> {
    SampleMask::new(g.domain().clone(), g.values().iter().map(|&v| v != 0.0).collect())
}

pub fn mask_to_grid(k: &SampleMask) -> GridFunction {
    let values = k.member().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    GridFunction::new(k.domain().clone(), values).expect("one value per node")
}

pub fn read_mask(path: &Path) -> Result<SampleMask> {
    mask_from_grid(&read_grid(path)?)
}

pub fn write_grid(path: &Path, g: &GridFunction) -> Result<()> {
    write_atomic(path, grid_to_string(g).as_bytes())
}

/// CSV rows `x1,...,xn,value`. `#` starts a comment; a first row that does
/// not parse as numbers is a header.
pub fn samples_from_csv(text: &str) -> Result<ScatteredSamples> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut seen_row = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|t| t.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if !seen_row => {
                seen_row = true;
                continue;
            }
            Err(_) => {
                return Err(CcxError::Parse(format!("line {}: `{line}`", lineno + 1)));
            }
        };
        seen_row = true;
        if row.len() < 2 {
            return Err(CcxError::Parse(format!(
                "line {}: need coordinates and a value",
                lineno + 1
            )));
        }
        let (v, p) = row.split_last().expect("nonempty row");
        points.push(p.to_vec());
        values.push(*v);
    }
    ScatteredSamples::new(points, values)
}

pub fn samples_to_csv(x: &ScatteredSamples) -> String {
    let mut out = String::new();
    for (p, v) in x.iter() {
        let mut fields: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
        fields.push(format!("{v:?}"));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn read_samples(path: &Path) -> Result<ScatteredSamples> {
    samples_from_csv(&fs::read_to_string(path)?)
}
