//! Frame files and graymap export.
//!
//! A frame file is a 20-byte header followed by samples:
//!
//! | offset | type     | content              |
//! |--------|----------|----------------------|
//! | 0      | `[u8;4]` | magic `LGFR`         |
//! | 4      | `u32`    | format version (1)   |
//! | 8      | `u32`    | width                |
//! | 12     | `u32`    | height               |
//! | 16     | `u32`    | frame count          |
//! | 20     | `f32`... | samples              |
//!
//! Integers and samples are little-endian. Samples are row-major within a
//! frame and frames follow each other.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::engine::{Frame, FrameRole};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"LGFR";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

/// Serializes frames of a common shape. Samples are narrowed to `f32`.
pub fn write_frames<W: Write>(mut out: W, frames: &[Frame]) -> Result<()> {
    let (w, h) = frames.first().map_or((0, 0), |f| (f.width, f.height));
    let dim = |v: usize| u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")));
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(&MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&dim(w)?.to_le_bytes());
    header.extend_from_slice(&dim(h)?.to_le_bytes());
    header.extend_from_slice(&dim(frames.len())?.to_le_bytes());
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(w * h * 4);
    for f in frames {
        f.check_shape(w, h)?;
        buf.clear();
        for &v in &f.data {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a frame file. Frames are indexed from zero and tagged `role`.
pub fn read_frames<R: Read>(mut input: R, role: FrameRole) -> Result<Vec<Frame>> {
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if header[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes")) as usize;
    if word(4) != VERSION as usize {
        return Err(Error::Format(format!("unsupported version {}", word(4))));
    }
    let (w, h, n) = (word(8), word(12), word(16));
    let len = w
        .checked_mul(h)
        .ok_or_else(|| Error::Format("frame size overflows".into()))?;
    let mut bytes = vec![0u8; len * 4];
    let mut frames = Vec::with_capacity(n.min(1 << 16));
    for index in 0..n {
        input
            .read_exact(&mut bytes)
            .map_err(|e| Error::Format(format!("truncated frame {index}: {e}")))?;
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
            .collect();
        frames.push(Frame::new(w, h, index, role, data)?);
    }
    let mut extra = [0u8; 1];
    if input.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after last frame".into()));
    }
    Ok(frames)
}

pub fn save_frames(path: &Path, frames: &[Frame]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_frames(BufWriter::new(file), frames)
}

pub fn load_frames(path: &Path, role: FrameRole) -> Result<Vec<Frame>> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_frames(BufReader::new(file), role)
}

/// Binary 8-bit graymap, linearly scaled from the frame's min/max.
pub fn write_pgm<W: Write>(mut out: W, frame: &Frame) -> Result<()> {
    let (lo, hi) = frame
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    write!(out, "P5\n{} {}\n255\n", frame.width, frame.height)?;
    let pixels: Vec<u8> = frame
        .data
        .iter()
        .map(|&v| ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    out.write_all(&pixels)?;
    out.flush()?;
    Ok(())
}

pub fn save_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_pgm(BufWriter::new(file), frame)
}
