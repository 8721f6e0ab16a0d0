//! On-disk format for grid fields: one JSON header line carrying the box
//! (center, half-widths, resolution) and the decay model, a newline, then
//! the samples as little-endian 64-bit floats in x₁-fastest row-major order.
//! Files conventionally use the `.gf3` extension.
//!
//! The analytic profile annotation, when present, is not serialized: a
//! reloaded field evaluates from its samples.

use crate::grid::{Box3, DecayModel, GridField3};
use crate::{FracqError, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct Header {
    center: [f64; 3],
    half_widths: [f64; 3],
    resolution: [usize; 3],
    decay: DecayModel,
}

pub fn write_gf3(field: &GridField3, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_gf3_to(field, &mut BufWriter::new(file))
}

pub fn write_gf3_to(field: &GridField3, w: &mut impl Write) -> Result<()> {
    let b = &field.box3;
    let header = Header {
        center: b.center,
        half_widths: b.half_widths,
        resolution: b.resolution,
        decay: field.decay,
    };
    let line = serde_json::to_string(&header)
        .map_err(|e| FracqError::InvalidField(format!("gf3 header: {e}")))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_gf3(path: impl AsRef<Path>) -> Result<GridField3> {
    let file = std::fs::File::open(path)?;
    read_gf3_from(&mut BufReader::new(file))
}

pub fn read_gf3_from(r: &mut impl BufRead) -> Result<GridField3> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end())
        .map_err(|e| FracqError::InvalidField(format!("gf3 header: {e}")))?;
    let box3 = Box3::new(header.center, header.half_widths, header.resolution)?;
    let n = box3.num_cells();
    let mut bytes = Vec::with_capacity(n * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * 8 {
        return Err(FracqError::InvalidField(format!(
            "gf3 payload: expected {} bytes for {n} samples, found {}",
            n * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    GridField3::from_values(box3, values, header.decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Profile;

    fn sample_field() -> GridField3 {
        GridField3::from_profile(
            Box3::new([0.5, 0.0, -1.0], [2.0, 3.0, 1.5], [8, 4, 6]).unwrap(),
            Profile::Gaussian { center: [0.5, 0.0, -1.0], sigma: 1.0, amp: 2.0 },
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_box_decay_and_samples_bitwise() {
        let field = sample_field();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.gf3");
        write_gf3(&field, &path).unwrap();
        let back = read_gf3(&path).unwrap();
        assert_eq!(back.box3, field.box3);
        assert_eq!(back.decay, field.decay);
        assert!(back.profile.is_none());
        assert_eq!(back.values().len(), field.values().len());
        for (a, b) in back.values().iter().zip(field.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn header_line_is_plain_json() {
        let mut buf = Vec::new();
        write_gf3_to(&sample_field(), &mut buf).unwrap();
        let nl = buf.iter().position(|b| *b == b'\n').unwrap();
        let header: serde_json::Value = serde_json::from_slice(&buf[..nl]).unwrap();
        assert_eq!(header["resolution"][0], 8);
        assert_eq!(buf.len() - nl - 1, 8 * 4 * 6 * 8);
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let mut buf = Vec::new();
        write_gf3_to(&sample_field(), &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        let err = read_gf3_from(&mut std::io::Cursor::new(&buf)).unwrap_err();
        assert!(matches!(err, FracqError::InvalidField(_)), "{err}");

        let garbage = b"not a header\n";
        let err = read_gf3_from(&mut std::io::Cursor::new(&garbage[..])).unwrap_err();
        assert!(matches!(err, FracqError::InvalidField(_)), "{err}");
    }
}
