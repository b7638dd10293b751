use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Writes an 8-bit binary greymap (P5).
pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::Shape(format!("{} pixels for a {}x{} image", pixels.len(), width, height)));
    }
    write!(w, "P5\n{} {}\n255\n", width, height)?;
    w.write_all(pixels)?;
    Ok(())
}

/// Writes an 8-bit binary pixmap (P6) from RGB triples.
pub fn write_ppm<W: Write>(mut w: W, width: usize, height: usize, rgb: &[[u8; 3]]) -> Result<()> {
    if rgb.len() != width * height {
        return Err(Error::Shape(format!("{} pixels for a {}x{} image", rgb.len(), width, height)));
    }
    write!(w, "P6\n{} {}\n255\n", width, height)?;
    let flat: Vec<u8> = rgb.iter().flatten().copied().collect();
    w.write_all(&flat)?;
    Ok(())
}

fn header_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            break;
        }
        let c = byte[0] as char;
        if c == '#' && tok.is_empty() {
            let mut line = String::new();
            r.read_line(&mut line)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(c);
    }
    if tok.is_empty() {
        return Err(Error::Format("truncated image header".into()));
    }
    Ok(tok)
}

/// Reads an 8-bit P5 image as `(width, height, pixels)`.
pub fn read_pgm<R: Read>(r: R) -> Result<(usize, usize, Vec<u8>)> {
    let mut r = BufReader::new(r);
    if header_token(&mut r)? != "P5" {
        return Err(Error::Format("not a binary PGM (P5)".into()));
    }
    let parse = |t: String| t.parse::<usize>().map_err(|_| Error::Format(format!("bad PGM header value {:?}", t)));
    let width = parse(header_token(&mut r)?)?;
    let height = parse(header_token(&mut r)?)?;
    if parse(header_token(&mut r)?)? != 255 {
        return Err(Error::Format("only 8-bit PGM is supported".into()));
    }
    let mut pixels = Vec::new();
    r.read_to_end(&mut pixels)?;
    if pixels.len() != width * height {
        return Err(Error::Format(format!("PGM has {} bytes of data, expected {}", pixels.len(), width * height)));
    }
    Ok((width, height, pixels))
}

/// Affine grey mapping of an image: grey 0 is `lo`, grey 255 is `hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrayMapping {
    pub lo: f64,
    pub hi: f64,
}

/// Maps values linearly from `[lo, hi]` onto 0..=255, clamping.
pub fn to_gray(values: &[f64], lo: f64, hi: f64) -> Vec<u8> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    values.iter().map(|v| (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8).collect()
}
