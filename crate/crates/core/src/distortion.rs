//! Directional loudness distortion between a reference and a test map.

use ndarray::Axis;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loudness::{DirectionalLoudnessMap, MapParams};

/// Comparison result for one reference/test pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DldReport {
    /// Mean absolute map difference over all frames and directions.
    pub dld: f64,
    pub frames: usize,
    pub directions: usize,
    /// Time-averaged absolute difference for each direction.
    pub per_direction: Vec<f64>,
    /// Direction-averaged absolute difference for each frame.
    pub per_frame: Vec<f64>,
    pub parameters: MapParams,
}

fn check_compatible(a: &DirectionalLoudnessMap, b: &DirectionalLoudnessMap) -> Result<()> {
    if a.params() != b.params() || a.directions() != b.directions() {
        return Err(Error::ParameterMismatch(format!(
            "{:?} vs {:?}",
            a.params(),
            b.params()
        )));
    }
    if a.values().dim() != b.values().dim() {
        return Err(Error::ShapeMismatch(format!(
            "reference map is {:?}, test map is {:?}",
            a.values().dim(),
            b.values().dim()
        )));
    }
    Ok(())
}

/// Element-wise `|reference - test|`.
pub fn map_difference(
    reference: &DirectionalLoudnessMap,
    test: &DirectionalLoudnessMap,
) -> Result<DirectionalLoudnessMap> {
    check_compatible(reference, test)?;
    let diff = (reference.values() - test.values()).mapv(f64::abs);
    DirectionalLoudnessMap::new(diff, reference.directions().to_vec(), *reference.params())
}

pub fn dld(reference: &DirectionalLoudnessMap, test: &DirectionalLoudnessMap) -> Result<DldReport> {
    let diff = map_difference(reference, test)?;
    let values = diff.values();
    let (frames, directions) = values.dim();
    if frames == 0 || directions == 0 {
        return Err(Error::ShapeMismatch("cannot compare empty maps".into()));
    }
    let per_direction = values.mean_axis(Axis(0)).expect("non-empty").to_vec();
    let per_frame = values.mean_axis(Axis(1)).expect("non-empty").to_vec();
    let dld = values.sum() / (frames * directions) as f64;
    Ok(DldReport {
        dld,
        frames,
        directions,
        per_direction,
        per_frame,
        parameters: *reference.params(),
    })
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateInput(format!(
            "lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateInput("need at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
