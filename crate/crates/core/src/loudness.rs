//! Directional loudness: per-band loudness of the directional downmix and
//! the frames-by-directions loudness map.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panning::{extract_directional, DirectionBank, PanningIndexField};
use crate::peripheral::BandedSpectrogram;

/// Inclusive range of band indices averaged into the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BandRange {
    pub lo: usize,
    pub hi: usize,
}

impl BandRange {
    /// Bands 7 through 19, roughly the level-difference dominated region.
    pub const HIGH: BandRange = BandRange { lo: 7, hi: 19 };

    pub fn new(lo: usize, hi: usize) -> BandRange {
        BandRange { lo, hi }
    }

    pub fn full(bands: usize) -> BandRange {
        BandRange {
            lo: 0,
            hi: bands.saturating_sub(1),
        }
    }

    pub fn len(&self) -> usize {
        if self.hi < self.lo {
            0
        } else {
            self.hi - self.lo + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..self.hi + 1
    }

    pub fn validate(&self, bands: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptySubset);
        }
        if self.hi >= bands {
            return Err(Error::BandOutOfRange {
                band: self.hi,
                bands,
            });
        }
        Ok(())
    }
}

impl Default for BandRange {
    fn default() -> Self {
        BandRange::HIGH
    }
}

impl fmt::Display for BandRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for BandRange {
    type Err = Error;

    /// Parses `LO..HI` (inclusive) or a single band index.
    fn from_str(s: &str) -> Result<BandRange> {
        let bad = || Error::InvalidConfig(format!("expected band range LO..HI, got {s:?}"));
        let s = s.trim();
        let (lo, hi) = match s.split_once("..") {
            Some((lo, hi)) => (lo.trim(), hi.trim().trim_start_matches('=')),
            None => (s, s),
        };
        let range = BandRange {
            lo: lo.parse().map_err(|_| bad())?,
            hi: hi.parse().map_err(|_| bad())?,
        };
        if range.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(range)
    }
}

/// Sum of the left and right directional signals.
pub fn downmix(left: &Array2<Complex64>, right: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    if left.dim() != right.dim() {
        return Err(Error::ShapeMismatch(format!(
            "downmix of {:?} and {:?}",
            left.dim(),
            right.dim()
        )));
    }
    Ok(left + right)
}

/// Loudness of one band in every frame: the fourth root of the mean squared
/// magnitude over the band's bins.
pub fn band_loudness(downmix: ArrayView2<Complex64>, band: std::ops::Range<usize>) -> Array1<f64> {
    let width = band.len() as f64;
    downmix
        .slice(ndarray::s![.., band])
        .map_axis(Axis(1), |row| {
            (row.iter().map(|x| x.norm_sqr()).sum::<f64>() / width).powf(0.25)
        })
}

/// Everything that has to agree before two maps can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapParams {
    pub xi: f64,
    pub directions: usize,
    pub bands: BandRange,
    pub band_count: usize,
    pub f_min: f64,
    pub block: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

/// Loudness over frames (rows) and look directions (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalLoudnessMap {
    values: Array2<f64>,
    directions: Vec<f64>,
    params: MapParams,
}

impl DirectionalLoudnessMap {
    pub fn new(
        values: Array2<f64>,
        directions: Vec<f64>,
        params: MapParams,
    ) -> Result<DirectionalLoudnessMap> {
        if values.ncols() != directions.len() {
            return Err(Error::ShapeMismatch(format!(
                "map has {} columns but {} directions",
                values.ncols(),
                directions.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(
                "map values must be finite and non-negative".into(),
            ));
        }
        Ok(DirectionalLoudnessMap {
            values,
            directions,
            params,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn directions(&self) -> &[f64] {
        &self.directions
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn direction_count(&self) -> usize {
        self.values.ncols()
    }

    /// Time step between consecutive rows, in seconds.
    pub fn hop_secs(&self) -> f64 {
        self.params.hop as f64 / self.params.sample_rate as f64
    }

    pub fn frame_duration_secs(&self) -> f64 {
        self.params.block as f64 / self.params.sample_rate as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Loudness of direction `j` in every frame, averaged over the band subset.
fn direction_column(
    spec: &BandedSpectrogram,
    field: &PanningIndexField,
    bank: &DirectionBank,
    subset: BandRange,
    j: usize,
) -> Result<Array1<f64>> {
    let directional = extract_directional(spec, field, bank, j)?;
    let dm = downmix(&directional.left, &directional.right)?;
    let mut column = Array1::zeros(spec.frames());
    for b in subset.iter() {
        column += &band_loudness(dm.view(), spec.partition.range(b));
    }
    Ok(column / subset.len() as f64)
}

/// Builds the directional loudness map of a spectrogram.
///
/// With `parallel`, directions are evaluated on the current rayon pool; the
/// result is identical either way.
pub fn loudness_map(
    spec: &BandedSpectrogram,
    field: &PanningIndexField,
    bank: &DirectionBank,
    subset: BandRange,
    f_min: f64,
    parallel: bool,
) -> Result<DirectionalLoudnessMap> {
    subset.validate(spec.partition.len())?;
    let columns: Vec<Array1<f64>> = if parallel {
        (0..bank.len())
            .into_par_iter()
            .map(|j| direction_column(spec, field, bank, subset, j))
            .collect::<Result<_>>()?
    } else {
        (0..bank.len())
            .map(|j| direction_column(spec, field, bank, subset, j))
            .collect::<Result<_>>()?
    };

    let mut values = Array2::zeros((spec.frames(), bank.len()));
    for (j, column) in columns.into_iter().enumerate() {
        values.column_mut(j).assign(&column);
    }
    let params = MapParams {
        xi: bank.xi(),
        directions: bank.len(),
        bands: subset,
        band_count: spec.partition.len(),
        f_min,
        block: spec.config.block,
        hop: spec.config.hop,
        sample_rate: spec.config.sample_rate,
    };
    DirectionalLoudnessMap::new(values, bank.directions().to_vec(), params)
}
