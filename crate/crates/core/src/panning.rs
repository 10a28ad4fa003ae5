//! Panning index per time-frequency bin and the Gaussian direction windows
//! used to pull out the content sitting at a given stereo position.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::peripheral::BandedSpectrogram;

pub const DEFAULT_DIRECTIONS: usize = 22;
pub const DEFAULT_XI: f64 = 0.006;

/// Panning index of a single bin, in `[-1, 1]`, -1 meaning hard left.
///
/// `1 - psi` where `psi = 2|L||R| / (|L|^2 + |R|^2)` is the inter-channel
/// similarity, signed by which channel dominates. The partial-similarity
/// difference `|L R*|/|L|^2 - |L R*|/|R|^2` has the sign of `|R|^2 - |L|^2`
/// whenever both channels are non-zero, so that comparison is used directly.
pub fn bin_panning_index(left: Complex64, right: Complex64) -> f64 {
    let pl = left.norm_sqr();
    let pr = right.norm_sqr();
    match (pl == 0.0, pr == 0.0) {
        (true, true) => 0.0,
        (false, true) => -1.0,
        (true, false) => 1.0,
        (false, false) => {
            let similarity = 2.0 * left.norm() * right.norm() / (pl + pr);
            let side = if pr > pl {
                1.0
            } else if pr < pl {
                -1.0
            } else {
                0.0
            };
            ((1.0 - similarity).max(0.0) * side).clamp(-1.0, 1.0)
        }
    }
}

/// `Psi(m, k)` for every bin of a spectrogram.
#[derive(Debug, Clone, PartialEq)]
pub struct PanningIndexField {
    values: Array2<f64>,
}

impl PanningIndexField {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, frame: usize, bin: usize) -> f64 {
        self.values[[frame, bin]]
    }
}

pub fn panning_index(spec: &BandedSpectrogram) -> PanningIndexField {
    let values = Zip::from(&spec.left)
        .and(&spec.right)
        .map_collect(|l, r| bin_panning_index(*l, *r));
    PanningIndexField { values }
}

/// Gaussian direction window, `exp(-(psi - center)^2 / (2 xi))`.
pub fn gaussian_window(psi: f64, center: f64, xi: f64) -> f64 {
    let d = psi - center;
    (-(d * d) / (2.0 * xi)).exp()
}

/// Equally spaced look directions over `[-1, 1]` plus the window width.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionBank {
    directions: Vec<f64>,
    xi: f64,
}

impl DirectionBank {
    pub fn new(count: usize, xi: f64) -> Result<DirectionBank> {
        if count < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 directions, got {count}"
            )));
        }
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "window width must be positive, got {xi}"
            )));
        }
        // Integer numerator keeps the grid exactly symmetric about zero.
        let last = (count - 1) as f64;
        let directions = (0..count).map(|j| (2.0 * j as f64 - last) / last).collect();
        Ok(DirectionBank { directions, xi })
    }

    pub fn directions(&self) -> &[f64] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Window weight of direction `j` for a bin with panning index `psi`.
    pub fn weight(&self, j: usize, psi: f64) -> f64 {
        gaussian_window(psi, self.directions[j], self.xi)
    }
}

impl Default for DirectionBank {
    fn default() -> Self {
        DirectionBank::new(DEFAULT_DIRECTIONS, DEFAULT_XI).expect("default bank is valid")
    }
}

/// Left/right signals extracted for one look direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalSignal {
    pub left: Array2<Complex64>,
    pub right: Array2<Complex64>,
}

/// Weights every bin of both channels by direction `j`'s window.
pub fn extract_directional(
    spec: &BandedSpectrogram,
    field: &PanningIndexField,
    bank: &DirectionBank,
    j: usize,
) -> Result<DirectionalSignal> {
    if field.values.dim() != spec.left.dim() || spec.left.dim() != spec.right.dim() {
        return Err(Error::ShapeMismatch(format!(
            "panning field {:?} vs spectrogram {:?}/{:?}",
            field.values.dim(),
            spec.left.dim(),
            spec.right.dim()
        )));
    }
    if j >= bank.len() {
        return Err(Error::InvalidConfig(format!(
            "direction {j} out of range (bank has {})",
            bank.len()
        )));
    }
    let weights = field.values.mapv(|psi| bank.weight(j, psi));
    Ok(DirectionalSignal {
        left: &spec.left * &weights.mapv(Complex64::from),
        right: &spec.right * &weights.mapv(Complex64::from),
    })
}
