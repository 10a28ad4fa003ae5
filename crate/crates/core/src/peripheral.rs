//! Peripheral ear model: Hann-windowed STFT, equal-ERB band grouping and
//! outer/middle-ear band weighting.

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal_io::StereoBuffer;

pub const DEFAULT_BLOCK: usize = 1024;
pub const DEFAULT_BANDS: usize = 20;

/// Lowest frequency at which the ear weighting is evaluated, keeps the
/// `f^-0.8` term away from its pole at DC.
pub const EAR_WEIGHT_MIN_HZ: f64 = 50.0;

/// Block analysis parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    pub block: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl StftConfig {
    /// 1024-sample blocks with 50 % overlap.
    pub fn new(sample_rate: u32) -> StftConfig {
        StftConfig {
            block: DEFAULT_BLOCK,
            hop: DEFAULT_BLOCK / 2,
            sample_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.block == 0 {
            return Err(Error::InvalidConfig("block size must be positive".into()));
        }
        if self.hop == 0 || self.hop > self.block {
            return Err(Error::InvalidConfig(format!(
                "hop must be in 1..={}, got {}",
                self.block, self.hop
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        Ok(())
    }

    /// One-sided spectrum size, `M/2 + 1`.
    pub fn bins(&self) -> usize {
        self.block / 2 + 1
    }

    /// Number of complete blocks in a signal of `len` samples. The tail after
    /// the last complete block is dropped.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.block {
            0
        } else {
            (len - self.block) / self.hop + 1
        }
    }

    pub fn frame_duration_secs(&self) -> f64 {
        self.block as f64 / self.sample_rate as f64
    }

    pub fn hop_secs(&self) -> f64 {
        self.hop as f64 / self.sample_rate as f64
    }

    pub fn bin_hz(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate as f64 / self.block as f64
    }
}

/// Symmetric Hann window, `0.5 - 0.5 cos(2 pi n / (M - 1))`.
pub fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

/// Complex one-sided spectra of both channels, frames along axis 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoSpectrum {
    pub left: Array2<Complex64>,
    pub right: Array2<Complex64>,
    pub config: StftConfig,
}

impl StereoSpectrum {
    pub fn frames(&self) -> usize {
        self.left.nrows()
    }

    pub fn bins(&self) -> usize {
        self.left.ncols()
    }
}

/// Short-time Fourier transform of one channel.
pub fn stft_channel(samples: &[f64], cfg: &StftConfig) -> Result<Array2<Complex64>> {
    cfg.validate()?;
    if samples.len() < cfg.block {
        return Err(Error::InputTooShort {
            len: samples.len(),
            block: cfg.block,
        });
    }
    let frames = cfg.frame_count(samples.len());
    let bins = cfg.bins();
    let window = hann(cfg.block);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.block);

    let mut out = Array2::zeros((frames, bins));
    let mut block = vec![Complex64::new(0.0, 0.0); cfg.block];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for (m, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let start = m * cfg.hop;
        for ((dst, x), w) in block
            .iter_mut()
            .zip(&samples[start..start + cfg.block])
            .zip(&window)
        {
            *dst = Complex64::new(x * w, 0.0);
        }
        fft.process_with_scratch(&mut block, &mut scratch);
        row.iter_mut()
            .zip(&block[..bins])
            .for_each(|(dst, x)| *dst = *x);
    }
    Ok(out)
}

/// Short-time Fourier transform of both channels.
pub fn stft_analyze(buf: &StereoBuffer, cfg: &StftConfig) -> Result<StereoSpectrum> {
    if buf.sample_rate() != cfg.sample_rate {
        return Err(Error::InvalidConfig(format!(
            "STFT configured for {} Hz but signal is {} Hz",
            cfg.sample_rate,
            buf.sample_rate()
        )));
    }
    Ok(StereoSpectrum {
        left: stft_channel(buf.left(), cfg)?,
        right: stft_channel(buf.right(), cfg)?,
        config: *cfg,
    })
}

/// ERB-number in Cams (Glasberg & Moore).
pub fn erb_number(hz: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * hz).log10()
}

/// Inverse of [`erb_number`].
pub fn erb_number_to_hz(cams: f64) -> f64 {
    (10f64.powf(cams / 21.4) - 1.0) / 0.00437
}

/// Grouping of STFT bins into contiguous bands equally spaced in ERB-number.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPartition {
    edges_hz: Vec<f64>,
    ranges: Vec<Range<usize>>,
}

impl BandPartition {
    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// The `B + 1` band edges in Hz.
    pub fn edges_hz(&self) -> &[f64] {
        &self.edges_hz
    }

    /// Bin indices belonging to band `b`.
    pub fn range(&self, b: usize) -> Range<usize> {
        self.ranges[b].clone()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    /// Band width `K_b` in bins.
    pub fn width(&self, b: usize) -> usize {
        self.ranges[b].len()
    }

    /// Total number of bins covered.
    pub fn bins(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    /// Frequency at which the ear weight of band `b` is evaluated: geometric
    /// mean of the edges, or arithmetic mean when the lower edge is 0 Hz,
    /// never below [`EAR_WEIGHT_MIN_HZ`].
    pub fn center_hz(&self, b: usize) -> f64 {
        let (lo, hi) = (self.edges_hz[b], self.edges_hz[b + 1]);
        let center = if lo <= 0.0 {
            0.5 * (lo + hi)
        } else {
            (lo * hi).sqrt()
        };
        center.max(EAR_WEIGHT_MIN_HZ)
    }
}

/// Splits the bins `0..=M/2` into `bands` groups whose edges are equally
/// spaced in ERB-number between `f_min` and Nyquist.
///
/// A bin belongs to the band whose edges bracket its center frequency. Bins
/// below `f_min` are folded into band 0 so that every bin is covered.
pub fn erb_partition(cfg: &StftConfig, bands: usize, f_min: f64) -> Result<BandPartition> {
    cfg.validate()?;
    let nyquist = cfg.sample_rate as f64 / 2.0;
    if bands == 0 {
        return Err(Error::InvalidConfig("band count must be at least 1".into()));
    }
    if !(0.0..nyquist).contains(&f_min) {
        return Err(Error::InvalidConfig(format!(
            "f_min must be in [0, {nyquist}), got {f_min}"
        )));
    }

    let lo = erb_number(f_min);
    let step = (erb_number(nyquist) - lo) / bands as f64;
    let mut edges_hz: Vec<f64> = (0..=bands)
        .map(|b| erb_number_to_hz(lo + step * b as f64))
        .collect();
    edges_hz[0] = f_min;
    edges_hz[bands] = nyquist;

    let bins = cfg.bins();
    let mut ranges = Vec::with_capacity(bands);
    let mut start = 0;
    for b in 0..bands {
        let end = if b + 1 == bands {
            bins
        } else {
            let upper = edges_hz[b + 1];
            (start..bins)
                .find(|&k| cfg.bin_hz(k) >= upper)
                .unwrap_or(bins)
        };
        if end <= start {
            return Err(Error::InfeasiblePartition { band: b });
        }
        ranges.push(start..end);
        start = end;
    }
    Ok(BandPartition { edges_hz, ranges })
}

/// Outer/middle-ear magnitude response in dB (PEAQ model).
pub fn ear_weight_db(hz: f64) -> f64 {
    let khz = hz / 1000.0;
    -0.6 * 3.64 * khz.powf(-0.8) + 6.5 * (-0.6 * (khz - 3.3).powi(2)).exp() - 1e-3 * khz.powf(3.6)
}

/// Linear per-band gains derived from [`ear_weight_db`].
#[derive(Debug, Clone, PartialEq)]
pub struct EarWeights {
    gains: Vec<f64>,
}

impl EarWeights {
    pub fn for_partition(part: &BandPartition) -> EarWeights {
        let gains = (0..part.len())
            .map(|b| 10f64.powf(ear_weight_db(part.center_hz(b)) / 20.0))
            .collect();
        EarWeights { gains }
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }
}

/// Ear-weighted, band-partitioned spectra of both channels (`X_{i,b}(m,k)`).
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSpectrogram {
    pub left: Array2<Complex64>,
    pub right: Array2<Complex64>,
    pub partition: BandPartition,
    pub weights: EarWeights,
    pub config: StftConfig,
}

impl BandedSpectrogram {
    pub fn frames(&self) -> usize {
        self.left.nrows()
    }

    pub fn bins(&self) -> usize {
        self.left.ncols()
    }
}

/// Multiplies every bin of band `b` in both channels by the band's ear gain.
pub fn apply_ear_weighting(
    spec: StereoSpectrum,
    part: &BandPartition,
) -> Result<BandedSpectrogram> {
    if spec.left.dim() != spec.right.dim() {
        return Err(Error::ShapeMismatch(format!(
            "left spectrum {:?} vs right {:?}",
            spec.left.dim(),
            spec.right.dim()
        )));
    }
    if part.bins() != spec.bins() {
        return Err(Error::ShapeMismatch(format!(
            "partition covers {} bins, spectrum has {}",
            part.bins(),
            spec.bins()
        )));
    }
    let weights = EarWeights::for_partition(part);
    let StereoSpectrum {
        mut left,
        mut right,
        config,
    } = spec;
    for (range, &gain) in part.ranges().iter().zip(weights.gains()) {
        for channel in [&mut left, &mut right] {
            channel
                .slice_mut(ndarray::s![.., range.clone()])
                .mapv_inplace(|x| x * gain);
        }
    }
    Ok(BandedSpectrogram {
        left,
        right,
        partition: part.clone(),
        weights,
        config,
    })
}

/// STFT, default 20-band ERB partition from `f_min`, and ear weighting.
pub fn peripheral_model(
    buf: &StereoBuffer,
    cfg: &StftConfig,
    bands: usize,
    f_min: f64,
) -> Result<BandedSpectrogram> {
    let part = erb_partition(cfg, bands, f_min)?;
    apply_ear_weighting(stft_analyze(buf, cfg)?, &part)
}
