//! Binary (P5) PGM reader/writer. Only 8-bit images are supported; pixel
//! bytes pass through untouched in both directions.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::GrayFrame;

fn is_pgm_whitespace(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_separators(&mut self) {
        loop {
            while self.pos < self.bytes.len() && is_pgm_whitespace(self.bytes[self.pos]) {
                self.pos += 1;
            }
            // Comments run to end of line.
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::format(format!("pgm: missing {what}")));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<usize>()
            .map_err(|_| Error::format(format!("pgm: bad {what} '{text}'")))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayFrame> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(Error::format("pgm: not a binary P5 file".to_string()));
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.read_uint("width")?;
    let height = cur.read_uint("height")?;
    let maxval = cur.read_uint("maxval")?;
    if maxval > 255 {
        return Err(Error::format(format!(
            "pgm: maxval {maxval} unsupported (only 8-bit)"
        )));
    }
    if maxval == 0 {
        return Err(Error::format("pgm: maxval 0".to_string()));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if cur.pos >= bytes.len() || !is_pgm_whitespace(bytes[cur.pos]) {
        return Err(Error::format("pgm: missing raster separator".to_string()));
    }
    cur.pos += 1;
    let expected = width * height;
    let raster = &bytes[cur.pos..];
    if raster.len() < expected {
        return Err(Error::format(format!(
            "pgm: raster truncated, expected {expected} bytes, got {}",
            raster.len()
        )));
    }
    GrayFrame::new(width, height, raster[..expected].to_vec())
}

pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let bytes = fs::read(path)?;
    parse_pgm(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_pgm(path: &Path, frame: &GrayFrame) -> Result<()> {
    let mut out = Vec::with_capacity(frame.pixels.len() + 32);
    out.extend_from_slice(format!("P5\n{} {}\n255\n", frame.width, frame.height).as_bytes());
    out.extend_from_slice(&frame.pixels);
    fs::write(path, out)?;
    Ok(())
}
