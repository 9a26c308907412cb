//! Binary 8-bit grayscale PGM ("P5", maxval 255).

use std::path::Path;

use super::Tensor;
use crate::binio::{read_file, write_file};
use crate::error::{Error, Result};

fn parse_header(bytes: &[u8]) -> Result<(usize, usize, usize)> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::UnsupportedFormat(
            "only binary PGM (P5) is supported".into(),
        ));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format {
                offset: pos as u64,
                message: "expected a header integer".into(),
            });
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::Format {
                offset: start as u64,
                message: "header integer out of range".into(),
            })?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format {
            offset: pos as u64,
            message: "missing whitespace after maxval".into(),
        });
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} (only 255 is supported)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Format {
            offset: 2,
            message: "zero image dimension".into(),
        });
    }
    Ok((width, height, pos + 1))
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Tensor> {
    let (width, height, start) = parse_header(bytes)?;
    let count = width * height;
    let raster = &bytes[start..];
    if raster.len() < count {
        return Err(Error::Truncated {
            offset: start as u64,
            expected: count as u64,
            found: raster.len() as u64,
        });
    }
    let data = raster[..count].iter().map(|&v| v as f32 / 255.0).collect();
    Tensor::new(vec![height, width], data)
}

pub(crate) fn encode(t: &Tensor) -> Result<Vec<u8>> {
    if t.rank() != 2 {
        return Err(Error::invalid(format!(
            "PGM output needs a rank-2 tensor, got shape {:?}",
            t.shape()
        )));
    }
    let (h, w) = (t.shape()[0], t.shape()[1]);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(
        t.data()
            .iter()
            .map(|&x| (x.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    Ok(out)
}

/// Loads a P5 image as a `[height, width]` tensor with values `v / 255`.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<Tensor> {
    decode(&read_file(path.as_ref())?)
}

pub fn save_pgm(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_and_mapping() {
        let t = decode(b"P5\n2 2\n255\n\0\0\0\0").unwrap();
        assert_eq!(t.shape(), &[2, 2]);
        assert!(t.data().iter().all(|&v| v == 0.0));
        let t = decode(b"P5 2 1 255\n\xff\x80").unwrap();
        assert_eq!(t.data(), &[1.0, 128.0 / 255.0]);
    }

    #[test]
    fn comments_in_header() {
        let t = decode(b"P5\n# made by hand\n1 1\n255\n\x07").unwrap();
        assert_eq!(t.data(), &[7.0 / 255.0]);
    }

    #[test]
    fn every_byte_survives_a_round_trip() {
        let mut bytes = b"P5\n16 16\n255\n".to_vec();
        bytes.extend(0u8..=255);
        let t = decode(&bytes).unwrap();
        assert_eq!(encode(&t).unwrap(), bytes);
    }

    #[test]
    fn unsupported_variants() {
        assert!(matches!(
            decode(b"P2\n1 1\n255\n0"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode(b"P5\n1 1\n65535\n\0\0"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode(b"P5\n2 2\n255\n\0"),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn save_clamps() {
        let t = Tensor::new(vec![1, 3], vec![-0.5, 0.5, 2.0]).unwrap();
        let bytes = encode(&t).unwrap();
        assert_eq!(&bytes[bytes.len() - 3..], &[0, 128, 255]);
    }
}
