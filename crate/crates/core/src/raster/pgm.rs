use super::GrayImage;
use crate::{Error, Result};

/// Parses a binary (P5) portable graymap with maxval 255.
///
/// The header may use any ASCII whitespace between fields and may contain
/// `#` comments running to end of line. Exactly one whitespace byte
/// separates the maxval from the raster. Bytes past the raster are ignored.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::MalformedHeader("missing P5 magic".into()));
    }
    pos += 2;
    let width = header_field(bytes, &mut pos, "width")?;
    let height = header_field(bytes, &mut pos, "height")?;
    let maxval = header_field(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval as u32));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("expected whitespace after maxval".into())),
    }
    let expected = width.checked_mul(height).ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(Error::TruncatedRaster { expected, found: raster.len() });
    }
    Ok(GrayImage::from_vec(width, height, raster[..expected].to_vec()).expect("sized"))
}

fn header_field(bytes: &[u8], pos: &mut usize, name: &str) -> Result<usize> {
    // Leading whitespace and comments.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedHeader(format!("missing {name}")));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedHeader(format!("bad {name}")))
}

/// Serializes as `P5\n<w> <h>\n255\n` followed by the raw raster.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_file() {
        let mut b = b"P5 2 1 255 ".to_vec();
        b.extend([0, 255]);
        let img = load_pgm(&b).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.data(), &[0, 255]);
    }

    #[test]
    fn truncated_raster() {
        let err = load_pgm(b"P5 1 1 255\n").unwrap_err();
        assert!(matches!(err, Error::TruncatedRaster { expected: 1, found: 0 }));
    }

    #[test]
    fn rejects_other_maxval_and_magic() {
        assert!(matches!(load_pgm(b"P5 1 1 65535\n\0\0").unwrap_err(), Error::UnsupportedMaxval(65535)));
        assert!(matches!(load_pgm(b"P2 1 1 255\n0").unwrap_err(), Error::MalformedHeader(_)));
        assert!(matches!(load_pgm(b"P5 x 1 255\n0").unwrap_err(), Error::MalformedHeader(_)));
    }

    #[test]
    fn comments_and_whitespace() {
        let mut b = b"P5\n# made by hand\n  3\t1 # trailing\n255\n".to_vec();
        b.extend([1, 2, 3]);
        assert_eq!(load_pgm(&b).unwrap().data(), &[1, 2, 3]);
    }

    #[test]
    fn save_format() {
        let img = GrayImage::new(1, 1, 7);
        assert_eq!(save_pgm(&img), b"P5\n1 1\n255\n\x07".to_vec());
        let img = GrayImage::new(2, 2, 255);
        let mut want = b"P5\n2 2\n255\n".to_vec();
        want.extend([255; 4]);
        assert_eq!(save_pgm(&img), want);
    }
}
