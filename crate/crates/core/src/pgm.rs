//! Binary PGM (`P5`) reading and writing, maxval 255 only.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

fn pgm_err(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Pgm {
        field,
        reason: reason.into(),
    }
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.data.get(self.pos) {
                None => pgm_err(field, "unexpected end of header"),
                Some(&b) => pgm_err(
                    field,
                    format!("expected a decimal number, found byte 0x{b:02x}"),
                ),
            });
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        text.parse()
            .map_err(|_| pgm_err(field, format!("value {text} is out of range")))
    }
}

/// Parses a binary PGM. Header comments (`#`) are accepted; bytes after the
/// pixel payload are ignored.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(pgm_err("magic", "expected \"P5\""));
    }
    let mut header = Header {
        data: bytes,
        pos: 2,
    };
    if !header
        .data
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(pgm_err("magic", "expected whitespace after \"P5\""));
    }
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(pgm_err("dimensions", format!("{width}x{height} is empty")));
    }
    if maxval != 255 {
        return Err(pgm_err(
            "maxval",
            format!("only 255 is supported, found {maxval}"),
        ));
    }
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => {
            return Err(pgm_err(
                "maxval",
                "expected a single whitespace byte before the payload",
            ))
        }
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| pgm_err("dimensions", "pixel count overflows"))?;
    let payload = &bytes[header.pos..];
    if payload.len() < len {
        return Err(pgm_err(
            "payload",
            format!("truncated: expected {len} bytes, found {}", payload.len()),
        ));
    }
    Image::new(height, width, payload[..len].to_vec())
}

pub fn write_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> std::io::Result<Image> {
    let bytes = std::fs::read(path)?;
    read_pgm(&bytes).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

pub fn save_pgm(path: impl AsRef<Path>, img: &Image) -> std::io::Result<()> {
    std::fs::write(path, write_pgm(img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_file() {
        let img = read_pgm(b"P5 2 2 255 \x01\x02\x03\x04").unwrap();
        assert_eq!(img.dims(), (2, 2));
        assert_eq!(img.pixels(), &[1, 2, 3, 4]);
    }

    #[test]
    fn width_and_height_order() {
        let img = read_pgm(b"P5\n3 2\n255\n\x00\x01\x02\x03\x04\x05").unwrap();
        assert_eq!(img.dims(), (2, 3));
        assert_eq!(img.get(1, 0), 3);
        assert_eq!(&write_pgm(&img)[..11], b"P5\n3 2\n255\n");
    }

    #[test]
    fn comments_in_header() {
        let img = read_pgm(b"P5\n# made by hand\n1 1\n# max\n255\n\x07").unwrap();
        assert_eq!(img.pixels(), &[7]);
    }

    #[test]
    fn payload_may_start_with_whitespace_byte() {
        let img = read_pgm(b"P5 1 1 255\n\n").unwrap();
        assert_eq!(img.pixels(), b"\n");
    }

    fn field_of(err: Error) -> &'static str {
        match err {
            Error::Pgm { field, .. } => field,
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(field_of(read_pgm(b"P2 1 1 255 0").unwrap_err()), "magic");
        assert_eq!(field_of(read_pgm(b"P5 2 2 65535 ").unwrap_err()), "maxval");
        assert_eq!(
            field_of(read_pgm(b"P5 2 2 255 \x01\x02").unwrap_err()),
            "payload"
        );
        assert_eq!(field_of(read_pgm(b"P5 x 2 255 ").unwrap_err()), "width");
        assert_eq!(field_of(read_pgm(b"P5 2").unwrap_err()), "height");
        assert_eq!(
            field_of(read_pgm(b"P5 0 2 255 ").unwrap_err()),
            "dimensions"
        );
        assert_eq!(field_of(read_pgm(b"P5 1 1 255").unwrap_err()), "maxval");
    }

    proptest! {
        #[test]
        fn round_trip(h in 1usize..20, w in 1usize..20, seed in any::<u64>()) {
            let mut s = seed;
            let img = Image::from_fn(h, w, |_, _| { s = s.wrapping_mul(0x5851F42D4C957F2D).wrapping_add(11); (s >> 33) as u8 });
            prop_assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
        }
    }
}
