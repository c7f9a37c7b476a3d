//! Planar 4:2:0 frames and readers for raw YUV and Y4M streams.
//!
//! 8-bit material uses one byte per sample. 10-bit material uses two bytes per
//! sample, little-endian, and any value above 1023 is rejected rather than masked.

use std::io::{BufRead, BufReader, Read, Write};

use crate::catalog::SceneMeta;
use crate::{Error, Result};

const Y4M_MAGIC: &[u8] = b"YUV4MPEG2";

#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u16>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Mismatch(format!(
                "plane {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Plane { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| v as f64).collect()
    }
}

/// A 4:2:0 frame. Chroma planes are `ceil(w/2) x ceil(h/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePlanar {
    pub luma: Plane,
    pub chroma_b: Plane,
    pub chroma_r: Plane,
    pub bit_depth: u8,
}

pub fn chroma_dims(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(2), height.div_ceil(2))
}

impl FramePlanar {
    pub fn new(luma: Plane, chroma_b: Plane, chroma_r: Plane, bit_depth: u8) -> Result<Self> {
        if bit_depth != 8 && bit_depth != 10 {
            return Err(Error::invalid("bit_depth", format!("{bit_depth} not in {{8, 10}}")));
        }
        let (cw, ch) = chroma_dims(luma.width, luma.height);
        for p in [&chroma_b, &chroma_r] {
            if p.width != cw || p.height != ch {
                return Err(Error::Mismatch(format!(
                    "chroma plane {}x{} inconsistent with 4:2:0 luma {}x{}",
                    p.width, p.height, luma.width, luma.height
                )));
            }
        }
        let max = max_value(bit_depth);
        for p in [&luma, &chroma_b, &chroma_r] {
            if let Some(v) = p.data.iter().find(|&&v| v > max) {
                return Err(Error::invalid(
                    "sample",
                    format!("{v} exceeds {bit_depth}-bit range"),
                ));
            }
        }
        Ok(FramePlanar {
            luma,
            chroma_b,
            chroma_r,
            bit_depth,
        })
    }

    /// Frame with the given luma plane and mid-grey chroma.
    pub fn from_luma(luma: Plane, bit_depth: u8) -> Result<Self> {
        let (cw, ch) = chroma_dims(luma.width, luma.height);
        let mid = 1u16 << (bit_depth - 1);
        FramePlanar::new(luma, Plane::filled(cw, ch, mid), Plane::filled(cw, ch, mid), bit_depth)
    }

    pub fn width(&self) -> usize {
        self.luma.width
    }

    pub fn height(&self) -> usize {
        self.luma.height
    }

    pub fn peak(&self) -> f64 {
        max_value(self.bit_depth) as f64
    }
}

pub fn max_value(bit_depth: u8) -> u16 {
    ((1u32 << bit_depth) - 1) as u16
}

fn frame_bytes(width: usize, height: usize, bit_depth: u8) -> usize {
    let (cw, ch) = chroma_dims(width, height);
    let samples = width * height + 2 * cw * ch;
    if bit_depth > 8 {
        samples * 2
    } else {
        samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
}

/// Streams frames from raw planar YUV or a Y4M container.
///
/// A Y4M header, when present, overrides the geometry and bit depth of `meta`.
pub struct FrameReader<R: Read> {
    inner: BufReader<R>,
    geometry: Geometry,
    y4m: bool,
    buf: Vec<u8>,
    index: usize,
    done: bool,
}

impl<R: Read> FrameReader<R> {
    pub fn new(reader: R, meta: &SceneMeta) -> Result<Self> {
        if meta.subsampling.trim_start_matches('C') != "420" {
            return Err(Error::invalid(
                "subsampling",
                format!("`{}` unsupported, only 420", meta.subsampling),
            ));
        }
        let mut inner = BufReader::new(reader);
        let y4m = inner.fill_buf()?.starts_with(Y4M_MAGIC);
        let geometry = if y4m {
            let mut line = Vec::new();
            inner.read_until(b'\n', &mut line)?;
            parse_y4m_header(&line)?
        } else {
            Geometry {
                width: meta.width,
                height: meta.height,
                bit_depth: meta.bit_depth,
            }
        };
        if geometry.width == 0 || geometry.height == 0 {
            return Err(Error::invalid("dimensions", "zero-sized frame"));
        }
        Ok(FrameReader {
            inner,
            geometry,
            y4m,
            buf: vec![0; frame_bytes(geometry.width, geometry.height, geometry.bit_depth)],
            index: 0,
            done: false,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn read_frame(&mut self) -> Result<Option<FramePlanar>> {
        if self.y4m {
            let mut line = Vec::new();
            let n = self.inner.read_until(b'\n', &mut line)?;
            if n == 0 {
                return Ok(None);
            }
            if !line.starts_with(b"FRAME") {
                return Err(Error::parse(
                    format!("frame {}", self.index),
                    "expected FRAME marker",
                ));
            }
        }
        let got = read_full(&mut self.inner, &mut self.buf)?;
        if got == 0 {
            if self.y4m {
                return Err(Error::Truncated {
                    expected: self.buf.len(),
                    got: 0,
                });
            }
            return Ok(None);
        }
        if got < self.buf.len() {
            return Err(Error::Truncated {
                expected: self.buf.len(),
                got,
            });
        }
        let Geometry {
            width,
            height,
            bit_depth,
        } = self.geometry;
        let samples = decode_samples(&self.buf, bit_depth, self.index)?;
        let (cw, ch) = chroma_dims(width, height);
        let luma_len = width * height;
        let c_len = cw * ch;
        let frame = FramePlanar {
            luma: Plane::new(width, height, samples[..luma_len].to_vec())?,
            chroma_b: Plane::new(cw, ch, samples[luma_len..luma_len + c_len].to_vec())?,
            chroma_r: Plane::new(cw, ch, samples[luma_len + c_len..].to_vec())?,
            bit_depth,
        };
        self.index += 1;
        Ok(Some(frame))
    }
}

impl<R: Read> Iterator for FrameReader<R> {
    type Item = Result<FramePlanar>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_frame() {
            Ok(Some(f)) => Some(Ok(f)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

fn decode_samples(bytes: &[u8], bit_depth: u8, frame_index: usize) -> Result<Vec<u16>> {
    if bit_depth <= 8 {
        return Ok(bytes.iter().map(|&b| b as u16).collect());
    }
    let max = max_value(bit_depth);
    bytes
        .chunks_exact(2)
        .map(|c| {
            let v = u16::from_le_bytes([c[0], c[1]]);
            if v > max {
                Err(Error::invalid(
                    "sample",
                    format!("value {v} exceeds {bit_depth}-bit range in frame {frame_index}"),
                ))
            } else {
                Ok(v)
            }
        })
        .collect()
}

fn parse_y4m_header(line: &[u8]) -> Result<Geometry> {
    let text = std::str::from_utf8(line)
        .map_err(|_| Error::parse("y4m header", "not valid UTF-8"))?
        .trim_end();
    let mut width = None;
    let mut height = None;
    let mut bit_depth = 8;
    for token in text.split_ascii_whitespace().skip(1) {
        let (key, value) = token.split_at(1);
        match key {
            "W" => width = value.parse().ok(),
            "H" => height = value.parse().ok(),
            "C" => {
                bit_depth = match value {
                    "420" | "420jpeg" | "420paldv" | "420mpeg2" => 8,
                    "420p10" => 10,
                    other => {
                        return Err(Error::Mismatch(format!(
                            "y4m colorspace C{other} does not match declared 4:2:0 subsampling"
                        )))
                    }
                }
            }
            _ => {}
        }
    }
    match (width, height) {
        (Some(width), Some(height)) => Ok(Geometry {
            width,
            height,
            bit_depth,
        }),
        _ => Err(Error::parse("y4m header", format!("missing W/H in `{text}`"))),
    }
}

/// Reads every frame of a stream into memory.
pub fn read_frames<R: Read>(reader: R, meta: &SceneMeta) -> Result<Vec<FramePlanar>> {
    FrameReader::new(reader, meta)?.collect()
}

fn write_samples<W: Write>(out: &mut W, frame: &FramePlanar) -> Result<()> {
    for plane in [&frame.luma, &frame.chroma_b, &frame.chroma_r] {
        if frame.bit_depth > 8 {
            let bytes: Vec<u8> = plane.data.iter().flat_map(|v| v.to_le_bytes()).collect();
            out.write_all(&bytes)?;
        } else {
            let bytes: Vec<u8> = plane.data.iter().map(|&v| v as u8).collect();
            out.write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Writes frames as raw planar YUV.
pub fn write_raw<W: Write>(mut out: W, frames: &[FramePlanar]) -> Result<()> {
    for f in frames {
        write_samples(&mut out, f)?;
    }
    Ok(())
}

/// Writes frames as a Y4M stream (`C420` or `C420p10`).
pub fn write_y4m<W: Write>(mut out: W, frames: &[FramePlanar], fps: (u32, u32)) -> Result<()> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Insufficient("no frames to write".into()))?;
    let colorspace = if first.bit_depth > 8 { "420p10" } else { "420" };
    writeln!(
        out,
        "YUV4MPEG2 W{} H{} F{}:{} Ip A1:1 C{}",
        first.width(),
        first.height(),
        fps.0,
        fps.1,
        colorspace
    )?;
    for f in frames {
        if f.width() != first.width() || f.height() != first.height() || f.bit_depth != first.bit_depth {
            return Err(Error::Mismatch("frames differ in geometry".into()));
        }
        out.write_all(b"FRAME\n")?;
        write_samples(&mut out, f)?;
    }
    Ok(())
}
