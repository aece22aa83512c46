//! Ordered sequences of fixed-dimension spectral vectors.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Frame period of the analysis front-end, in seconds.
pub const FRAME_PERIOD: f64 = 0.010;

/// Frames per second at the default 10 ms hop. Durations are expressed in
/// frames everywhere; this is the only conversion point.
pub const FRAMES_PER_SECOND: usize = 100;

/// Converts a duration in seconds to a whole number of frames.
pub fn seconds_to_frames(seconds: f64) -> usize {
    (seconds * FRAMES_PER_SECOND as f64).round() as usize
}

/// A sequence of `dim`-dimensional vectors stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    dim: usize,
    data: Vec<f64>,
    frame_period: f64,
}

impl FrameSequence {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            data: Vec::new(),
            frame_period: FRAME_PERIOD,
        }
    }

    pub fn with_capacity(dim: usize, frames: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(dim * frames),
            frame_period: FRAME_PERIOD,
        }
    }

    /// Builds a sequence from a flat row-major buffer.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: data.len(),
            });
        }
        Ok(Self {
            dim,
            data,
            frame_period: FRAME_PERIOD,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut seq = Self::with_capacity(dim, rows.len());
        for r in rows {
            seq.push(r.as_ref())?;
        }
        Ok(seq)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame_period(&self) -> f64 {
        self.frame_period
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        self.data.extend_from_slice(v);
        Ok(())
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// Frames `[start, end)` as a new sequence.
    pub fn slice(&self, start: usize, end: usize) -> FrameSequence {
        FrameSequence {
            dim: self.dim,
            data: self.data[start * self.dim..end * self.dim].to_vec(),
            frame_period: self.frame_period,
        }
    }

    /// Appends frames `[start, end)` of `other`.
    pub fn extend_from_range(&mut self, other: &FrameSequence, start: usize, end: usize) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        self.data
            .extend_from_slice(&other.data[start * self.dim..end * self.dim]);
        Ok(())
    }

    pub fn append(&mut self, other: &FrameSequence) -> Result<()> {
        self.extend_from_range(other, 0, other.len())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Headerless CSV, one frame per row, values printed with round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.data.len() * 20);
        for f in self.frames() {
            for (j, v) in f.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                // Debug formatting is the shortest string that parses back to the same bits.
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let mut dim = None;
        let mut data = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let before = data.len();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    path: origin.to_string(),
                    line: lineno + 1,
                    msg: format!("not a number: {field:?}"),
                })?;
                data.push(v);
            }
            let n = data.len() - before;
            match dim {
                None => dim = Some(n),
                Some(d) if d != n => {
                    return Err(Error::Parse {
                        path: origin.to_string(),
                        line: lineno + 1,
                        msg: format!("expected {d} columns, found {n}"),
                    })
                }
                _ => {}
            }
        }
        match dim {
            Some(d) => Self::from_flat(d, data),
            None => Err(Error::Parse {
                path: origin.to_string(),
                line: 0,
                msg: "no frames".into(),
            }),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }
}
