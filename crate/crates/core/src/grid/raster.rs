use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::rescale_unit;
use super::{GridGeometry, TerrainField};
use crate::error::{IppError, Result};
use crate::scalar::Real;

const MAX_RASTER_CLASSES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RasterKind {
    Continuous,
    Discrete,
}

/// Reads an external field from a CSV grid or a binary PGM (P5) image.
///
/// Continuous rasters are rescaled onto `[0, 1]`; discrete rasters get class
/// ids by enumerating their distinct values in ascending order.
pub fn load_raster<T: Real>(path: impl AsRef<Path>, kind: RasterKind) -> Result<TerrainField<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path)
        .map_err(|e| IppError::ingestion(format!("cannot read {}: {e}", path.display())))?;
    let (width, height, values) = if bytes.starts_with(b"P5") {
        parse_pgm(&bytes)?
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| IppError::ingestion(format!("{} is neither PGM nor UTF-8 CSV", path.display())))?;
        parse_csv_grid(text)?
    };
    let geometry = GridGeometry::new(width, height)
        .map_err(|e| IppError::ingestion(format!("raster too small: {e}")))?;
    match kind {
        RasterKind::Continuous => {
            TerrainField::continuous(geometry, rescale_unit(&values), T::zero(), T::one())
        }
        RasterKind::Discrete => {
            let mut distinct = values.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            if distinct.len() > MAX_RASTER_CLASSES {
                return Err(IppError::ingestion(format!(
                    "{} distinct values exceed the {MAX_RASTER_CLASSES}-class limit",
                    distinct.len()
                )));
            }
            let labels = values
                .iter()
                .map(|v| distinct.partition_point(|d| d < v) as u16 + 1)
                .collect();
            TerrainField::discrete(geometry, labels, distinct.len().max(2) as u16)
        }
    }
}

/// Parses comma-separated rows (row-major, north-up). Blank lines are ignored.
pub fn parse_csv_grid(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    IppError::ingestion(format!("line {}: bad number {:?}", lineno + 1, s.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(IppError::ingestion(format!(
                    "line {}: ragged row with {} values, expected {w}",
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(IppError::ingestion(format!("line {}: non-finite value {v}", lineno + 1)));
        }
        values.extend(row);
        height += 1;
    }
    let width = width.ok_or_else(|| IppError::ingestion("empty CSV grid"))?;
    Ok((width, height, values))
}

/// Parses a binary PGM (P5). Maxval up to 255 uses one byte per pixel, larger
/// maxvals two big-endian bytes.
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(IppError::ingestion("truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(IppError::ingestion("not a binary PGM (P5)"));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| IppError::ingestion(format!("bad PGM header field {s:?}")))
    };
    let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(IppError::ingestion(format!("invalid PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let depth = if maxval > 255 { 2 } else { 1 };
    let needed = width * height * depth;
    let data = bytes
        .get(pos..pos + needed)
        .ok_or_else(|| IppError::ingestion("PGM raster shorter than header promises"))?;
    let values = if depth == 1 {
        data.iter().map(|b| *b as f64).collect()
    } else {
        data.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    };
    Ok((width, height, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f
    }

    #[test]
    fn csv_identity_ingestion() {
        let f = write_tmp(b"0,1\n1,0\n");
        let field = load_raster::<f64>(f.path(), RasterKind::Continuous).unwrap();
        assert_eq!(field.continuous_values().unwrap(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_pgm_maps_to_half() {
        let mut bytes = b"P5\n# constant\n3 2\n255\n".to_vec();
        bytes.extend([128u8; 6]);
        let f = write_tmp(&bytes);
        let field = load_raster::<f64>(f.path(), RasterKind::Continuous).unwrap();
        assert!(field.continuous_values().unwrap().iter().all(|v| *v == 0.5));
        assert_eq!(field.geometry().width(), 3);
    }

    #[test]
    fn discrete_enumeration_in_ascending_order() {
        let f = write_tmp(b"1,2\n2,3\n");
        let field = load_raster::<f64>(f.path(), RasterKind::Discrete).unwrap();
        assert_eq!(field.labels().unwrap(), &[1, 2, 2, 3]);
        assert_eq!(field.class_count(), Some(3));
    }

    #[test]
    fn ingestion_errors() {
        let ragged = write_tmp(b"1,2\n3\n");
        assert!(matches!(
            load_raster::<f64>(ragged.path(), RasterKind::Continuous),
            Err(IppError::Ingestion(_))
        ));
        assert!(load_raster::<f64>("/definitely/not/here.csv", RasterKind::Continuous).is_err());
        let many: String = (0..10)
            .map(|r| (0..10).map(|c| (r * 10 + c).to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("\n");
        let f = write_tmp(many.as_bytes());
        assert!(load_raster::<f64>(f.path(), RasterKind::Discrete).is_err());
        assert!(load_raster::<f64>(f.path(), RasterKind::Continuous).is_ok());
        let short = write_tmp(b"P5 4 4 255\n\x01\x02");
        assert!(load_raster::<f64>(short.path(), RasterKind::Continuous).is_err());
    }
}
