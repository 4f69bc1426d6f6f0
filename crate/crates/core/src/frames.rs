//! RGB frames, binary masks and binary portable pixmap (P6) I/O.
//!
//! Frames use a top-left origin with x growing rightward and y downward.
//! Only `P6` with a maxval of 255 is accepted.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: malformed header at byte {offset}: {reason}")]
    Header {
        path: PathBuf,
        offset: usize,
        reason: String,
    },
    #[error("{path}: unsupported maxval {maxval} at byte {offset} (expected 255)")]
    Maxval {
        path: PathBuf,
        offset: usize,
        maxval: u32,
    },
    #[error(
        "{path}: truncated pixel data at byte {offset}: expected {expected} bytes, found {found}"
    )]
    Truncated {
        path: PathBuf,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid dimensions {width}x{height}")]
    Dimensions { width: usize, height: usize },
    #[error("{dir}: no files match pattern `{pattern}`")]
    NoMatches { dir: PathBuf, pattern: String },
    #[error("invalid glob pattern `{pattern}`: {reason}")]
    Pattern { pattern: String, reason: String },
}

pub type Rgb = [u8; 3];

/// An 8-bit RGB image stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl Frame {
    /// A frame filled with a single color.
    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::Dimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            pixels: vec![color; width * height],
        })
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(FrameError::Dimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: Rgb) {
        self.pixels[y * self.width + x] = value;
    }

    /// Raw interleaved bytes, row-major.
    pub fn as_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }
}

/// A row-major boolean image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, FrameError> {
        if bits.len() != width * height {
            return Err(FrameError::Dimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Render as an RGB frame, true as white and false as black.
    pub fn to_frame(&self) -> Frame {
        let pixels = self
            .bits
            .iter()
            .map(|&b| if b { [255; 3] } else { [0; 3] })
            .collect();
        Frame {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Decode a P6 byte buffer. `path` is only used for error messages.
pub fn decode_ppm(bytes: &[u8], path: &Path) -> Result<Frame, FrameError> {
    let mut cursor = HeaderCursor {
        bytes,
        pos: 0,
        path,
    };
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(cursor.error("expected magic `P6`"));
    }
    cursor.pos = 2;
    let (width, _) = cursor.number()?;
    let (height, _) = cursor.number()?;
    let (maxval, maxval_offset) = cursor.number()?;
    let (width, height) = (width as usize, height as usize);
    if maxval != 255 {
        return Err(FrameError::Maxval {
            path: path.to_path_buf(),
            offset: maxval_offset,
            maxval,
        });
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(cursor.error("expected whitespace after maxval")),
    }
    if width == 0 || height == 0 {
        return Err(cursor.error("zero image dimension"));
    }
    let expected = width * height * 3;
    let data = &bytes[cursor.pos..];
    if data.len() < expected {
        return Err(FrameError::Truncated {
            path: path.to_path_buf(),
            offset: bytes.len(),
            expected,
            found: data.len(),
        });
    }
    let pixels = data[..expected]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(Frame {
        width,
        height,
        pixels,
    })
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl HeaderCursor<'_> {
    fn error(&self, reason: &str) -> FrameError {
        FrameError::Header {
            path: self.path.to_path_buf(),
            offset: self.pos,
            reason: reason.to_string(),
        }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Next whitespace-preceded decimal and the offset it starts at.
    fn number(&mut self) -> Result<(u32, usize), FrameError> {
        let start_len = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == start_len {
            return Err(self.error("expected whitespace"));
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map(|n| (n, start))
            .ok_or_else(|| self.error("number out of range"))
    }
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.reserve(frame.pixels.len() * 3);
    for px in &frame.pixels {
        out.extend_from_slice(px);
    }
    out
}

pub fn load_frame(path: &Path) -> Result<Frame, FrameError> {
    let bytes = fs::read(path).map_err(|source| FrameError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_ppm(&bytes, path)
}

pub fn save_frame(frame: &Frame, path: &Path) -> Result<(), FrameError> {
    let io_err = |source| FrameError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    writer.write_all(&encode_ppm(frame)).map_err(io_err)?;
    writer.flush().map_err(io_err)
}

/// Write a mask as P6, true pixels white.
pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<(), FrameError> {
    save_frame(&mask.to_frame(), path)
}

/// Debug dump file name for the mask of frame `t`.
pub fn mask_file_name(t: usize) -> String {
    format!("mask_{t:06}.ppm")
}

/// Files in `directory` whose names match `pattern`, sorted lexicographically.
/// The position in the returned list is the frame index.
pub fn list_frame_sequence(directory: &Path, pattern: &str) -> Result<Vec<PathBuf>, FrameError> {
    let matcher = glob::Pattern::new(pattern).map_err(|e| FrameError::Pattern {
        pattern: pattern.to_string(),
        reason: e.to_string(),
    })?;
    let entries = fs::read_dir(directory).map_err(|source| FrameError::Io {
        path: directory.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| FrameError::Io {
            path: directory.to_path_buf(),
            source,
        })?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if matcher.matches(name) && entry.path().is_file() {
            paths.push(entry.path());
        }
    }
    if paths.is_empty() {
        return Err(FrameError::NoMatches {
            dir: directory.to_path_buf(),
            pattern: pattern.to_string(),
        });
    }
    paths.sort();
    Ok(paths)
}
