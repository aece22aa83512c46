use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// Mono 16-bit PCM samples at a declared sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl SampleBuffer {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Self {
        Self { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Decodes a mono 16-bit PCM WAV file. Any other layout is rejected with an
/// error naming the offending header field; the sample rate is passed through.
pub fn load_wav(path: impl AsRef<Path>) -> Result<SampleBuffer> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::Unsupported => Error::WavFormat {
            field: "format",
            detail: "unsupported wav encoding".into(),
        },
        other => Error::WavFormat {
            field: "header",
            detail: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int {
        return Err(Error::WavFormat {
            field: "sample format",
            detail: "expected integer PCM, found float".into(),
        });
    }
    if spec.bits_per_sample != 16 {
        return Err(Error::WavFormat {
            field: "bit depth",
            detail: format!("expected 16 bits per sample, found {}", spec.bits_per_sample),
        });
    }
    if spec.channels != 1 {
        return Err(Error::WavFormat {
            field: "channels",
            detail: format!("expected mono, found {} channels", spec.channels),
        });
    }
    let samples = reader
        .into_samples::<i16>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::WavFormat {
            field: "data",
            detail: e.to_string(),
        })?;
    Ok(SampleBuffer::new(samples, spec.sample_rate))
}

/// Writes a buffer as mono 16-bit PCM.
pub fn write_wav(path: impl AsRef<Path>, buf: &SampleBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(other.to_string())),
    };
    let mut w = WavWriter::create(path, spec).map_err(wrap)?;
    for &s in &buf.samples {
        w.write_sample(s).map_err(wrap)?;
    }
    w.finalize().map_err(wrap)
}
