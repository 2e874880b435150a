//! Netpbm graymap (PGM) reading and writing, P2 and P5, maxval ≤ 255.

use std::path::Path;

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayscaleImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayscaleImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::pgm("image must be non-empty"));
        }
        if pixels.len() != width * height {
            return Err(Error::pgm(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Binary P5 encoding with maxval 255.
    pub fn to_p5(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// ASCII P2 encoding with maxval 255.
    pub fn to_p2(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::pgm(format!("malformed header: expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::pgm(format!("malformed header: {what} out of range")))
    }
}

/// Parses P2 or P5 data. Values under a maxval below 255 are rescaled to
/// the 0–255 range.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayscaleImage> {
    if bytes.len() < 2 || bytes[0] != b'P' || !matches!(bytes[1], b'2' | b'5') {
        return Err(Error::pgm("malformed header: expected magic P2 or P5"));
    }
    let binary = bytes[1] == b'5';
    let mut hdr = Header { bytes, pos: 2 };
    let width = hdr.token("width")?;
    let height = hdr.token("height")?;
    let maxval = hdr.token("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::pgm(format!("unsupported maxval {maxval}")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::pgm("image dimensions overflow"))?;

    let mut raw = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates maxval from the raster
        if hdr.pos >= bytes.len() || !bytes[hdr.pos].is_ascii_whitespace() {
            return Err(Error::pgm("truncated payload"));
        }
        let start = hdr.pos + 1;
        let payload = bytes
            .get(start..start + count)
            .ok_or_else(|| Error::pgm(format!("truncated payload: need {count} bytes")))?;
        raw.extend_from_slice(payload);
    } else {
        for k in 0..count {
            hdr.skip_space_and_comments();
            if hdr.pos >= bytes.len() {
                return Err(Error::pgm(format!("truncated payload: {k} of {count} samples")));
            }
            let v = hdr.token("sample")?;
            raw.push(u8::try_from(v).map_err(|_| Error::pgm(format!("sample {v} exceeds maxval")))?);
        }
    }
    if let Some(&v) = raw.iter().find(|&&v| v as usize > maxval) {
        return Err(Error::pgm(format!("sample {v} exceeds maxval {maxval}")));
    }
    if maxval != 255 {
        for v in &mut raw {
            *v = ((*v as usize * 255 + maxval / 2) / maxval) as u8;
        }
    }
    GrayscaleImage::new(width, height, raw)
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayscaleImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::Pgm {
        path: Some(path.to_path_buf()),
        msg: e.to_string(),
    })?;
    parse_pgm(&bytes).map_err(|e| match e {
        Error::Pgm { msg, .. } => Error::Pgm {
            path: Some(path.to_path_buf()),
            msg,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_ascii() {
        let img = parse_pgm(b"P2 1 1 255 0").unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels(), &[0]);
    }

    #[test]
    fn binary_payload() {
        let mut data = b"P5\n2 2\n255\n".to_vec();
        data.extend_from_slice(&[0, 17, 200, 255]);
        let img = parse_pgm(&data).unwrap();
        assert_eq!(img.pixels(), &[0, 17, 200, 255]);
        assert_eq!(img.get(1, 0), 200);
    }

    #[test]
    fn comments_ignored() {
        let plain = parse_pgm(b"P2\n2 1\n255\n10 20\n").unwrap();
        let commented = parse_pgm(b"P2\n# made by hand\n2 # width\n1\n255\n10 20\n").unwrap();
        assert_eq!(plain, commented);
        let mut p5 = b"P5\n# c\n1 1\n255\n".to_vec();
        p5.push(b'#');
        assert_eq!(parse_pgm(&p5).unwrap().pixels(), b"#");
    }

    #[test]
    fn errors() {
        assert!(parse_pgm(b"P3 1 1 255 0").is_err());
        assert!(parse_pgm(b"P2 1 x 255 0").is_err());
        assert!(parse_pgm(b"P2 2 2 255 0 1 2").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00\x01").is_err());
        assert!(parse_pgm(b"P2 1 1 65535 0").is_err());
        assert!(parse_pgm(b"P2 1 1 10 11").is_err());
        assert!(parse_pgm(b"P2 0 1 255").is_err());
    }

    #[test]
    fn low_maxval_rescaled() {
        assert_eq!(parse_pgm(b"P2 3 1 2 0 1 2").unwrap().pixels(), &[0, 128, 255]);
    }

    #[test]
    fn encoders_parse_back() {
        let img = GrayscaleImage::new(3, 2, vec![0, 50, 100, 150, 200, 255]).unwrap();
        assert_eq!(parse_pgm(&img.to_p5()).unwrap(), img);
        assert_eq!(parse_pgm(img.to_p2().as_bytes()).unwrap(), img);
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_pgm("/nonexistent/letter.pgm").unwrap_err();
        assert!(err.to_string().contains("letter.pgm"));
    }
}
