//! Stereo WAV input and output.
//!
//! Integer PCM is scaled by `1 / 2^(bits-1)`, so the negative full-scale code
//! maps to exactly `-1.0`. No level normalization and no resampling happen
//! here.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// The only sample rate accepted without `allow_any_rate`.
pub const NOMINAL_RATE: u32 = 48_000;

/// Length differences above this many samples (one default STFT hop) are
/// flagged as significant by [`align_pair`].
pub const ALIGN_TOLERANCE: usize = 512;

/// Two equally long channels of finite samples, full scale = 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoBuffer {
    left: Vec<f64>,
    right: Vec<f64>,
    sample_rate: u32,
}

impl StereoBuffer {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<StereoBuffer> {
        if left.len() != right.len() {
            return Err(Error::InvalidBuffer(format!(
                "channel lengths differ ({} vs {})",
                left.len(),
                right.len()
            )));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidBuffer("sample rate must be positive".into()));
        }
        if left.iter().chain(right.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidBuffer("non-finite sample".into()));
        }
        Ok(StereoBuffer {
            left,
            right,
            sample_rate,
        })
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    /// Same buffer with left and right exchanged.
    pub fn swapped(&self) -> StereoBuffer {
        StereoBuffer {
            left: self.right.clone(),
            right: self.left.clone(),
            sample_rate: self.sample_rate,
        }
    }

    /// Multiplies both channels by `gain`.
    pub fn scaled(&self, gain: f64) -> StereoBuffer {
        StereoBuffer {
            left: self.left.iter().map(|x| x * gain).collect(),
            right: self.right.iter().map(|x| x * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn truncated(&self, len: usize) -> StereoBuffer {
        let len = len.min(self.len());
        StereoBuffer {
            left: self.left[..len].to_vec(),
            right: self.right[..len].to_vec(),
            sample_rate: self.sample_rate,
        }
    }

    pub(crate) fn into_channels(self) -> (Vec<f64>, Vec<f64>, u32) {
        (self.left, self.right, self.sample_rate)
    }
}

/// Reads a two-channel RIFF/WAVE file.
///
/// Accepts 16, 24 and 32 bit integer PCM and 32 bit IEEE float. Chunks other
/// than `fmt ` and `data` are skipped.
pub fn load_stereo_wav(path: &Path, allow_any_rate: bool) -> Result<StereoBuffer> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| read_error(path, e))?;
    let spec = reader.spec();

    if spec.channels != 2 {
        return Err(Error::NotStereo {
            path: path.to_path_buf(),
            channels: spec.channels,
        });
    }
    if spec.sample_rate == 0 {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            detail: "sample rate is zero".into(),
        });
    }
    if spec.sample_rate != NOMINAL_RATE && !allow_any_rate {
        return Err(Error::UnsupportedRate {
            path: path.to_path_buf(),
            rate: spec.sample_rate,
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| read_error(path, e))?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| read_error(path, e))?,
        (format, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?}"),
            })
        }
    };

    if !interleaved.len().is_multiple_of(2) {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            detail: "odd number of samples".into(),
        });
    }
    if interleaved.iter().any(|x| !x.is_finite()) {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            detail: "non-finite sample".into(),
        });
    }

    let (left, right) = interleaved.chunks_exact(2).map(|f| (f[0], f[1])).unzip();
    StereoBuffer::new(left, right, spec.sample_rate)
}

/// Writes a buffer as 32 bit float stereo WAV.
pub fn write_stereo_wav(path: &Path, buf: &StereoBuffer) -> Result<()> {
    let spec = WavSpec {
        channels: 2,
        sample_rate: buf.sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| hound_error(path, e))?;
    for (l, r) in buf.left.iter().zip(&buf.right) {
        writer
            .write_sample(*l as f32)
            .map_err(|e| hound_error(path, e))?;
        writer
            .write_sample(*r as f32)
            .map_err(|e| hound_error(path, e))?;
    }
    writer.finalize().map_err(|e| hound_error(path, e))
}

/// Writes a buffer as 16 bit integer PCM stereo WAV, clipping to full scale.
pub fn write_stereo_wav_pcm16(path: &Path, buf: &StereoBuffer) -> Result<()> {
    let spec = WavSpec {
        channels: 2,
        sample_rate: buf.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let to_i16 = |x: f64| (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
    let mut writer = WavWriter::create(path, spec).map_err(|e| hound_error(path, e))?;
    for (l, r) in buf.left.iter().zip(&buf.right) {
        writer
            .write_sample(to_i16(*l))
            .map_err(|e| hound_error(path, e))?;
        writer
            .write_sample(to_i16(*r))
            .map_err(|e| hound_error(path, e))?;
    }
    writer.finalize().map_err(|e| hound_error(path, e))
}

/// Errors while decoding an already opened file mean the content is bad.
fn read_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(source) => Error::CorruptFile {
            path: path.to_path_buf(),
            detail: source.to_string(),
        },
        other => hound_error(path, other),
    }
}

fn hound_error(path: &Path, err: hound::Error) -> Error {
    let path = path.to_path_buf();
    match err {
        hound::Error::IoError(source) => Error::Io { path, source },
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path,
            detail: "unsupported WAV format".into(),
        },
        hound::Error::FormatError(detail) => Error::CorruptFile {
            path,
            detail: detail.into(),
        },
        other => Error::CorruptFile {
            path,
            detail: other.to_string(),
        },
    }
}

/// Produced by [`align_pair`] whenever the two inputs had different lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthWarning {
    pub reference_len: usize,
    pub test_len: usize,
}

impl LengthWarning {
    pub fn difference(&self) -> usize {
        self.reference_len.abs_diff(self.test_len)
    }

    /// True when the lengths differ by more than one STFT hop.
    pub fn exceeds_hop(&self) -> bool {
        self.difference() > ALIGN_TOLERANCE
    }
}

impl std::fmt::Display for LengthWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "reference has {} samples, test signal {}; both truncated to {}",
            self.reference_len,
            self.test_len,
            self.reference_len.min(self.test_len)
        )?;
        if self.exceeds_hop() {
            write!(
                f,
                " (difference exceeds one hop of {ALIGN_TOLERANCE} samples)"
            )?;
        }
        Ok(())
    }
}

/// Truncates a reference/test pair to their common length.
pub fn align_pair(
    reference: StereoBuffer,
    test: StereoBuffer,
) -> Result<(StereoBuffer, StereoBuffer, Option<LengthWarning>)> {
    if reference.sample_rate != test.sample_rate {
        return Err(Error::RateMismatch {
            reference: reference.sample_rate,
            test: test.sample_rate,
        });
    }
    if reference.len() == test.len() {
        return Ok((reference, test, None));
    }
    let warning = LengthWarning {
        reference_len: reference.len(),
        test_len: test.len(),
    };
    let len = reference.len().min(test.len());
    Ok((reference.truncated(len), test.truncated(len), Some(warning)))
}
