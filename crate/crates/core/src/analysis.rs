//! End-to-end analysis settings and the signal → map → report pipeline.

use std::path::Path;

use crate::distortion::{dld, DldReport};
use crate::error::{Error, Result};
use crate::loudness::{loudness_map, BandRange, DirectionalLoudnessMap};
use crate::panning::{panning_index, DirectionBank, DEFAULT_DIRECTIONS, DEFAULT_XI};
use crate::peripheral::{peripheral_model, StftConfig, DEFAULT_BANDS, DEFAULT_BLOCK};
use crate::signal_io::{align_pair, load_stereo_wav, LengthWarning, StereoBuffer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub directions: usize,
    pub xi: f64,
    pub bands: BandRange,
    pub band_count: usize,
    pub f_min: f64,
    pub block: usize,
    pub hop: usize,
    pub allow_any_rate: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            directions: DEFAULT_DIRECTIONS,
            xi: DEFAULT_XI,
            bands: BandRange::HIGH,
            band_count: DEFAULT_BANDS,
            f_min: 0.0,
            block: DEFAULT_BLOCK,
            hop: DEFAULT_BLOCK / 2,
            allow_any_rate: false,
        }
    }
}

impl AnalysisConfig {
    pub fn stft(&self, sample_rate: u32) -> StftConfig {
        StftConfig {
            block: self.block,
            hop: self.hop,
            sample_rate,
        }
    }

    pub fn bank(&self) -> Result<DirectionBank> {
        DirectionBank::new(self.directions, self.xi)
    }

    pub fn validate(&self) -> Result<()> {
        self.bank()?;
        self.stft(48_000).validate()?;
        self.bands.validate(self.band_count)?;
        if !(self.f_min.is_finite() && self.f_min >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "f_min must be non-negative, got {}",
                self.f_min
            )));
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn merge_key_values(mut self, text: &str) -> Result<AnalysisConfig> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || {
                Error::InvalidConfig(format!(
                    "line {}: bad value {value:?} for {key}",
                    lineno + 1
                ))
            };
            match key {
                "directions" => self.directions = value.parse().map_err(|_| bad())?,
                "xi" => self.xi = value.parse().map_err(|_| bad())?,
                "bands" => self.bands = value.parse()?,
                "fmin" | "f_min" => self.f_min = value.parse().map_err(|_| bad())?,
                "block" => self.block = value.parse().map_err(|_| bad())?,
                "hop" => self.hop = value.parse().map_err(|_| bad())?,
                "any_rate" | "any-rate" | "allow_any_rate" => {
                    self.allow_any_rate = value.parse().map_err(|_| bad())?
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key {key:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(self)
    }

    pub fn from_file(path: &Path, base: AnalysisConfig) -> Result<AnalysisConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        base.merge_key_values(&text)
    }
}

/// Directional loudness map of one stereo signal.
pub fn analyze(
    buf: &StereoBuffer,
    cfg: &AnalysisConfig,
    parallel: bool,
) -> Result<DirectionalLoudnessMap> {
    cfg.validate()?;
    let spec = peripheral_model(buf, &cfg.stft(buf.sample_rate()), cfg.band_count, cfg.f_min)?;
    let field = panning_index(&spec);
    loudness_map(&spec, &field, &cfg.bank()?, cfg.bands, cfg.f_min, parallel)
}

pub fn load(path: &Path, cfg: &AnalysisConfig) -> Result<StereoBuffer> {
    load_stereo_wav(path, cfg.allow_any_rate)
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub reference: DirectionalLoudnessMap,
    pub test: DirectionalLoudnessMap,
    pub report: DldReport,
    pub warning: Option<LengthWarning>,
}

/// Aligns a reference/test pair, maps both and computes the distortion.
pub fn compare(
    reference: StereoBuffer,
    test: StereoBuffer,
    cfg: &AnalysisConfig,
    parallel: bool,
) -> Result<Comparison> {
    let (reference, test, warning) = align_pair(reference, test)?;
    let reference = analyze(&reference, cfg, parallel)?;
    let test = analyze(&test, cfg, parallel)?;
    let report = dld(&reference, &test)?;
    Ok(Comparison {
        reference,
        test,
        report,
        warning,
    })
}

pub fn compare_files(
    reference: &Path,
    test: &Path,
    cfg: &AnalysisConfig,
    parallel: bool,
) -> Result<Comparison> {
    compare(load(reference, cfg)?, load(test, cfg)?, cfg, parallel)
}
