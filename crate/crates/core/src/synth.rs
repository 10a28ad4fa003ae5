//! Deterministic test signals and stereo-image degradations.
//!
//! All degradations are linear channel mixes, so the panning index of every
//! coherent bin after processing has a closed form (see [`PanLaw::panning_index`]).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal_io::StereoBuffer;

/// Left/right amplitude gains applied to a mono source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanLaw {
    pub left: f64,
    pub right: f64,
}

impl PanLaw {
    pub const HARD_LEFT: PanLaw = PanLaw {
        left: 1.0,
        right: 0.0,
    };
    pub const HARD_RIGHT: PanLaw = PanLaw {
        left: 0.0,
        right: 1.0,
    };

    pub fn new(left: f64, right: f64) -> Result<PanLaw> {
        if !(left >= 0.0 && right >= 0.0 && left.is_finite() && right.is_finite())
            || left + right == 0.0
        {
            return Err(Error::InvalidConfig(format!(
                "pan gains must be non-negative and not both zero, got ({left}, {right})"
            )));
        }
        Ok(PanLaw { left, right })
    }

    /// Gains scaled so that `left^2 + right^2 = 1`.
    pub fn constant_power(left: f64, right: f64) -> Result<PanLaw> {
        let law = PanLaw::new(left, right)?;
        let norm = law.left.hypot(law.right);
        Ok(PanLaw {
            left: law.left / norm,
            right: law.right / norm,
        })
    }

    pub fn center() -> PanLaw {
        PanLaw {
            left: 0.5f64.sqrt(),
            right: 0.5f64.sqrt(),
        }
    }

    /// Panning index of a source carried with these gains:
    /// `sgn(g_R - g_L) (g_L - g_R)^2 / (g_L^2 + g_R^2)`.
    pub fn panning_index(&self) -> f64 {
        let d = self.right - self.left;
        let sign = if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        };
        sign * d * d / (self.left * self.left + self.right * self.right)
    }
}

/// Mono source waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonoSource {
    Sine {
        freq_hz: f64,
        amplitude: f64,
    },
    /// Uniform white noise in `[-amplitude, amplitude)`.
    WhiteNoise {
        seed: u64,
        amplitude: f64,
    },
}

impl MonoSource {
    pub fn render(&self, len: usize, sample_rate: u32) -> Vec<f64> {
        match *self {
            MonoSource::Sine { freq_hz, amplitude } => {
                let w = 2.0 * PI * freq_hz / sample_rate as f64;
                (0..len).map(|n| amplitude * (w * n as f64).sin()).collect()
            }
            MonoSource::WhiteNoise { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..len)
                    .map(|_| amplitude * rng.gen_range(-1.0..1.0))
                    .collect()
            }
        }
    }
}

/// Renders `source` for `duration` seconds and pans it with `law`.
pub fn panned_source(
    source: MonoSource,
    law: PanLaw,
    duration: f64,
    sample_rate: u32,
) -> Result<StereoBuffer> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let len = (duration * sample_rate as f64).round() as usize;
    let mono = source.render(len, sample_rate);
    let left = mono.iter().map(|x| law.left * x).collect();
    let right = mono.iter().map(|x| law.right * x).collect();
    StereoBuffer::new(left, right, sample_rate)
}

fn sample_span(buf: &StereoBuffer, t0: f64, t1: f64) -> Result<(usize, usize)> {
    let duration = buf.duration_secs();
    if !(t0 >= 0.0 && t0 < t1 && t1 <= duration + 1e-9) {
        return Err(Error::BadInterval { t0, t1, duration });
    }
    let rate = buf.sample_rate() as f64;
    let start = (t0 * rate).round() as usize;
    let end = ((t1 * rate).round() as usize).min(buf.len());
    Ok((start, end))
}

/// Pulls both channels towards their mid signal within `[t0, t1)` seconds.
///
/// `severity` 0 leaves the signal untouched, 1 makes the interval mono.
pub fn pan_collapse(
    buf: &StereoBuffer,
    severity: f64,
    interval: (f64, f64),
) -> Result<StereoBuffer> {
    if !(0.0..=1.0).contains(&severity) {
        return Err(Error::InvalidConfig(format!(
            "collapse severity must be in [0, 1], got {severity}"
        )));
    }
    let (start, end) = sample_span(buf, interval.0, interval.1)?;
    let (mut left, mut right, rate) = buf.clone().into_channels();
    for n in start..end {
        let (l, r) = (left[n], right[n]);
        let mid = 0.5 * (l + r);
        left[n] = (1.0 - severity) * l + severity * mid;
        right[n] = (1.0 - severity) * r + severity * mid;
    }
    StereoBuffer::new(left, right, rate)
}

/// Symmetric channel leakage: `L + beta R`, `R + beta L`.
pub fn crosstalk(buf: &StereoBuffer, leakage: f64) -> Result<StereoBuffer> {
    if !(0.0..=1.0).contains(&leakage) {
        return Err(Error::InvalidConfig(format!(
            "crosstalk must be in [0, 1], got {leakage}"
        )));
    }
    let left = buf
        .left()
        .iter()
        .zip(buf.right())
        .map(|(l, r)| l + leakage * r)
        .collect();
    let right = buf
        .right()
        .iter()
        .zip(buf.left())
        .map(|(r, l)| r + leakage * l)
        .collect();
    StereoBuffer::new(left, right, buf.sample_rate())
}
