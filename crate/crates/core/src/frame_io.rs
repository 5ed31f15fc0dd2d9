//! Raw video ingestion (Y4M 4:2:0 subset, headerless I420 / gray) and
//! deterministic synthetic sequences.
//!
//! Only the luma plane is kept. Every plane handed to the encoder is padded
//! on the right and bottom by edge replication to a multiple of the
//! superblock size; the original dimensions survive as the visible window.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{hash_words, unit_f64};

pub const PAD_MULTIPLE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChromaFormat {
    C420,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamInfo {
    pub width: usize,
    pub height: usize,
    /// Unknown for streaming Y4M reads.
    pub frame_count: Option<usize>,
    pub chroma: ChromaFormat,
    pub bit_depth: u8,
}

impl StreamInfo {
    pub fn luma_len(&self) -> usize {
        self.width * self.height
    }

    pub fn chroma_len(&self) -> usize {
        2 * self.width.div_ceil(2) * self.height.div_ceil(2)
    }
}

/// One 8-bit luma plane. `width`/`height` are the stored (padded)
/// dimensions; `visible_*` the source dimensions before padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramePlane {
    width: usize,
    height: usize,
    visible_width: usize,
    visible_height: usize,
    frame_index: usize,
    samples: Vec<u8>,
}

impl FramePlane {
    pub fn new(width: usize, height: usize, frame_index: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDims { w: width, h: height });
        }
        if samples.len() != width * height {
            return Err(Error::DimMismatch(format!(
                "{} samples for a {width}x{height} plane",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            visible_width: width,
            visible_height: height,
            frame_index,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, frame_index: usize, value: u8) -> Result<Self> {
        Self::new(width, height, frame_index, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn visible_width(&self) -> usize {
        self.visible_width
    }

    pub fn visible_height(&self) -> usize {
        self.visible_height
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn with_frame_index(mut self, frame_index: usize) -> Self {
        self.frame_index = frame_index;
        self
    }

    pub(crate) fn set_visible(&mut self, w: usize, h: usize) {
        self.visible_width = w;
        self.visible_height = h;
    }

    pub fn is_padded(&self) -> bool {
        self.width.is_multiple_of(PAD_MULTIPLE) && self.height.is_multiple_of(PAD_MULTIPLE)
    }

    /// Pads right/bottom by replicating the last visible column/row.
    /// Samples inside the visible window are untouched.
    pub fn padded(&self) -> FramePlane {
        let vw = self.visible_width;
        let vh = self.visible_height;
        let pw = vw.div_ceil(PAD_MULTIPLE) * PAD_MULTIPLE;
        let ph = vh.div_ceil(PAD_MULTIPLE) * PAD_MULTIPLE;
        if pw == self.width && ph == self.height {
            return self.clone();
        }
        let mut out = vec![0u8; pw * ph];
        for y in 0..ph {
            let sy = y.min(vh - 1);
            let src = &self.samples[sy * self.width..sy * self.width + vw];
            let dst = &mut out[y * pw..(y + 1) * pw];
            dst[..vw].copy_from_slice(src);
            let edge = src[vw - 1];
            dst[vw..].fill(edge);
        }
        FramePlane {
            width: pw,
            height: ph,
            visible_width: vw,
            visible_height: vh,
            frame_index: self.frame_index,
            samples: out,
        }
    }

    /// Row-major copy of the visible window.
    pub fn visible_samples(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.visible_width * self.visible_height);
        for y in 0..self.visible_height {
            out.extend_from_slice(&self.row(y)[..self.visible_width]);
        }
        out
    }
}

fn header_err(msg: impl Into<String>) -> Error {
    Error::MalformedHeader(msg.into())
}

/// Parses the Y4M stream header line and leaves the reader at the first
/// `FRAME` marker.
pub fn parse_y4m_header<R: BufRead>(reader: &mut R) -> Result<StreamInfo> {
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    if line.last() == Some(&b'\n') {
        line.pop();
    }
    let text = std::str::from_utf8(&line).map_err(|_| header_err("non-ASCII header"))?;
    let mut tokens = text.split(' ').filter(|t| !t.is_empty());
    if tokens.next() != Some("YUV4MPEG2") {
        return Err(header_err("missing YUV4MPEG2 signature"));
    }
    let mut width = None;
    let mut height = None;
    for tok in tokens {
        let (tag, value) = tok.split_at(1);
        match tag {
            "W" => width = Some(parse_dim(value, "W")?),
            "H" => height = Some(parse_dim(value, "H")?),
            "C" => check_chroma(value)?,
            // frame rate, interlace, aspect, extensions: accepted and ignored
            _ => {}
        }
    }
    let width = width.ok_or_else(|| header_err("missing W tag"))?;
    let height = height.ok_or_else(|| header_err("missing H tag"))?;
    Ok(StreamInfo {
        width,
        height,
        frame_count: None,
        chroma: ChromaFormat::C420,
        bit_depth: 8,
    })
}

fn parse_dim(value: &str, tag: &str) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(header_err(format!("bad {tag} value {value:?}"))),
    }
}

fn check_chroma(value: &str) -> Result<()> {
    match value {
        "420" | "420jpeg" | "420paldv" | "420mpeg2" => Ok(()),
        v if v.starts_with("420p") => Err(Error::UnsupportedFormat(format!(
            "bit depth {v} (only 8-bit is supported)"
        ))),
        v => Err(Error::UnsupportedFormat(format!("chroma C{v} (only 4:2:0)"))),
    }
}

/// Reads up to `buf.len()` bytes; returns how many were read before EOF.
fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

fn skip_bytes<R: Read>(reader: &mut R, n: usize) -> Result<usize> {
    let copied = std::io::copy(&mut reader.take(n as u64), &mut std::io::sink())?;
    Ok(copied as usize)
}

fn luma_frame(info: &StreamInfo, frame_index: usize, luma: Vec<u8>) -> Result<FramePlane> {
    Ok(FramePlane::new(info.width, info.height, frame_index, luma)?.padded())
}

/// Sequential Y4M frame reader.
pub struct Y4mReader<R> {
    reader: R,
    info: StreamInfo,
    next_index: usize,
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut reader: R) -> Result<Self> {
        let info = parse_y4m_header(&mut reader)?;
        Ok(Self {
            reader,
            info,
            next_index: 0,
        })
    }

    pub fn info(&self) -> &StreamInfo {
        &self.info
    }

    /// Returns `Ok(None)` at a clean end of stream.
    pub fn read_frame(&mut self) -> Result<Option<FramePlane>> {
        let mut marker = Vec::new();
        let n = self.reader.read_until(b'\n', &mut marker)?;
        if n == 0 {
            return Ok(None);
        }
        if !marker.starts_with(b"FRAME") {
            return Err(header_err("expected FRAME marker"));
        }
        let expected = self.info.luma_len() + self.info.chroma_len();
        if marker.last() != Some(&b'\n') {
            return Err(Error::TruncatedFrame { expected, got: 0 });
        }
        let mut luma = vec![0u8; self.info.luma_len()];
        let got = read_full(&mut self.reader, &mut luma)?;
        let skipped = if got == luma.len() {
            skip_bytes(&mut self.reader, self.info.chroma_len())?
        } else {
            0
        };
        if got + skipped < expected {
            return Err(Error::TruncatedFrame {
                expected,
                got: got + skipped,
            });
        }
        let plane = luma_frame(&self.info, self.next_index, luma)?;
        self.next_index += 1;
        Ok(Some(plane))
    }

    pub fn read_all(&mut self, limit: Option<usize>) -> Result<Vec<FramePlane>> {
        let mut frames = Vec::new();
        while limit.is_none_or(|l| frames.len() < l) {
            match self.read_frame()? {
                Some(f) => frames.push(f),
                None => break,
            }
        }
        Ok(frames)
    }
}

/// Headerless planar reader: tightly packed I420, or luma-only when `gray`.
pub struct RawReader<R> {
    reader: R,
    info: StreamInfo,
    gray: bool,
    next_index: usize,
}

impl<R: Read> RawReader<R> {
    pub fn new(reader: R, width: usize, height: usize, gray: bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDims { w: width, h: height });
        }
        Ok(Self {
            reader,
            info: StreamInfo {
                width,
                height,
                frame_count: None,
                chroma: ChromaFormat::C420,
                bit_depth: 8,
            },
            gray,
            next_index: 0,
        })
    }

    pub fn info(&self) -> &StreamInfo {
        &self.info
    }

    pub fn read_frame(&mut self) -> Result<Option<FramePlane>> {
        let chroma = if self.gray { 0 } else { self.info.chroma_len() };
        let expected = self.info.luma_len() + chroma;
        let mut luma = vec![0u8; self.info.luma_len()];
        let got = read_full(&mut self.reader, &mut luma)?;
        if got == 0 {
            return Ok(None);
        }
        let skipped = if got == luma.len() {
            skip_bytes(&mut self.reader, chroma)?
        } else {
            0
        };
        if got + skipped < expected {
            return Err(Error::TruncatedFrame {
                expected,
                got: got + skipped,
            });
        }
        let plane = luma_frame(&self.info, self.next_index, luma)?;
        self.next_index += 1;
        Ok(Some(plane))
    }

    pub fn read_all(&mut self, limit: Option<usize>) -> Result<Vec<FramePlane>> {
        let mut frames = Vec::new();
        while limit.is_none_or(|l| frames.len() < l) {
            match self.read_frame()? {
                Some(f) => frames.push(f),
                None => break,
            }
        }
        Ok(frames)
    }
}

fn write_visible_i420<W: Write>(out: &mut W, frame: &FramePlane, gray: bool) -> Result<()> {
    out.write_all(&frame.visible_samples())?;
    if !gray {
        let c = 2 * frame.visible_width().div_ceil(2) * frame.visible_height().div_ceil(2);
        out.write_all(&vec![128u8; c])?;
    }
    Ok(())
}

/// Writes the visible window of each plane as raw I420 (neutral chroma) or gray.
pub fn write_raw<W: Write>(out: &mut W, frames: &[FramePlane], gray: bool) -> Result<()> {
    for f in frames {
        write_visible_i420(out, f, gray)?;
    }
    Ok(())
}

pub fn write_y4m<W: Write>(out: &mut W, frames: &[FramePlane], fps: u32) -> Result<()> {
    let first = frames.first().ok_or(Error::Empty)?;
    writeln!(
        out,
        "YUV4MPEG2 W{} H{} F{fps}:1 Ip A1:1 C420jpeg",
        first.visible_width(),
        first.visible_height()
    )?;
    for f in frames {
        out.write_all(b"FRAME\n")?;
        write_visible_i420(out, f, false)?;
    }
    Ok(())
}

/// Synthetic content generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pattern {
    Constant { value: u8 },
    Gradient,
    Checkerboard { period: usize },
    /// Independent uniform noise per frame around mid-gray.
    Noise { amplitude: u8 },
    /// Multi-scale smooth texture with patches of fine detail, translated by
    /// `(vx, vy)` pixels per frame.
    MovingTexture { vx: i32, vy: i32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub pattern: Pattern,
    pub seed: u64,
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    /// `constant:V`, `gradient`, `checkerboard:P`, `noise:A`, `moving_texture:VX:VY`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidSpec(format!("cannot parse pattern {s:?}"));
        let num = |i: usize| parts.get(i).ok_or_else(bad)?.parse::<i64>().map_err(|_| bad());
        let pattern = match parts[0] {
            "constant" => Pattern::Constant {
                value: u8::try_from(num(1)?).map_err(|_| bad())?,
            },
            "gradient" => Pattern::Gradient,
            "checkerboard" => Pattern::Checkerboard {
                period: usize::try_from(num(1)?).map_err(|_| bad())?,
            },
            "noise" => Pattern::Noise {
                amplitude: u8::try_from(num(1)?).map_err(|_| bad())?,
            },
            "moving_texture" => Pattern::MovingTexture {
                vx: i32::try_from(num(1)?).map_err(|_| bad())?,
                vy: i32::try_from(num(2)?).map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        Ok(pattern)
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Smoothly interpolated lattice noise in `[0, 1]`.
fn value_noise(seed: u64, octave: u64, u: i64, v: i64, cell: i64) -> f64 {
    let cu = u.div_euclid(cell);
    let cv = v.div_euclid(cell);
    let fu = smoothstep(u.rem_euclid(cell) as f64 / cell as f64);
    let fv = smoothstep(v.rem_euclid(cell) as f64 / cell as f64);
    let lattice = |i: i64, j: i64| unit_f64(hash_words(&[seed, octave, i as u64, j as u64]));
    let top = lattice(cu, cv) * (1.0 - fu) + lattice(cu + 1, cv) * fu;
    let bottom = lattice(cu, cv + 1) * (1.0 - fu) + lattice(cu + 1, cv + 1) * fu;
    top * (1.0 - fv) + bottom * fv
}

fn texture_sample(seed: u64, u: i64, v: i64, frame: usize, x: usize, y: usize) -> u8 {
    let base = value_noise(seed, 0, u, v, 48);
    let mid = value_noise(seed, 1, u, v, 16);
    let fine = value_noise(seed, 2, u, v, 5);
    let mask = smoothstep((value_noise(seed, 3, u, v, 96) - 0.35) / 0.3);
    let grain = unit_f64(hash_words(&[seed, 4, u as u64, v as u64]));
    let sensor = unit_f64(hash_words(&[seed, 5, frame as u64, x as u64, y as u64]));
    let s = 40.0
        + 150.0 * base
        + mask * (70.0 * (mid - 0.5) + 60.0 * (fine - 0.5))
        + 6.0 * (grain - 0.5)
        + 3.0 * (sensor - 0.5);
    s.round().clamp(0.0, 255.0) as u8
}

/// Generates a deterministic, padded sequence.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<FramePlane>> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 || spec.frame_count == 0 {
        return Err(Error::InvalidSpec("zero dimension or frame count".into()));
    }
    if let Pattern::Checkerboard { period: 0 } = spec.pattern {
        return Err(Error::InvalidSpec("checkerboard period must be positive".into()));
    }
    let mut frames = Vec::with_capacity(spec.frame_count);
    for t in 0..spec.frame_count {
        let mut samples = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                samples[y * w + x] = match spec.pattern {
                    Pattern::Constant { value } => value,
                    Pattern::Gradient => {
                        let gx = if w > 1 { x * 255 / (w - 1) } else { 0 };
                        let gy = if h > 1 { y * 255 / (h - 1) } else { 0 };
                        ((gx + gy) / 2) as u8
                    }
                    Pattern::Checkerboard { period } => {
                        if (x / period + y / period) % 2 == 0 {
                            0
                        } else {
                            255
                        }
                    }
                    Pattern::Noise { amplitude } => {
                        let u = unit_f64(hash_words(&[spec.seed, t as u64, x as u64, y as u64]));
                        let a = amplitude as f64;
                        (128.0 + (2.0 * u - 1.0) * a).round().clamp(0.0, 255.0) as u8
                    }
                    Pattern::MovingTexture { vx, vy } => {
                        let u = x as i64 + vx as i64 * t as i64;
                        let v = y as i64 + vy as i64 * t as i64;
                        texture_sample(spec.seed, u, v, t, x, y)
                    }
                };
            }
        }
        frames.push(FramePlane::new(w, h, t, samples)?.padded());
    }
    Ok(frames)
}
