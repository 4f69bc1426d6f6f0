use crate::detection::Blob;
use crate::features::{
    combined_score, pair_features, FeatureConfig, FeatureVector, Observation, OutOfBounds,
};
use crate::frames::Frame;

/// Normalized pair features between two consecutive frames. Rows index
/// blobs in the higher frame, columns blobs in the lower frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn from_observations(
        low: &[Observation],
        high: &[Observation],
        config: &FeatureConfig,
    ) -> Self {
        let mut cells = Vec::with_capacity(low.len() * high.len());
        for h in high {
            for l in low {
                cells.push(pair_features(l, h).normalized(&config.caps));
            }
        }
        Self {
            rows: high.len(),
            cols: low.len(),
            cells,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, high: usize, low: usize) -> &FeatureVector {
        &self.cells[high * self.cols + low]
    }

    /// Combined similarity of one cell.
    pub fn score(&self, high: usize, low: usize, config: &FeatureConfig) -> f64 {
        combined_score(self.cell(high, low), &config.weights)
    }
}

/// Extract observations from both frames and build their feature matrix.
pub fn build_feature_matrix(
    blobs_low: &[Blob],
    blobs_high: &[Blob],
    frame_low: &Frame,
    frame_high: &Frame,
    config: &FeatureConfig,
) -> Result<FeatureMatrix, OutOfBounds> {
    let low = blobs_low
        .iter()
        .map(|b| Observation::from_blob(frame_low, b))
        .collect::<Result<Vec<_>, _>>()?;
    let high = blobs_high
        .iter()
        .map(|b| Observation::from_blob(frame_high, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix::from_observations(&low, &high, config))
}

/// Which lower-frame blob may continue as which higher-frame blob. Same
/// axes as [`FeatureMatrix`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilityMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl PossibilityMatrix {
    /// A cell is possible when its combined similarity reaches the threshold.
    pub fn build(fm: &FeatureMatrix, config: &FeatureConfig) -> Self {
        let mut cells = Vec::with_capacity(fm.rows * fm.cols);
        for h in 0..fm.rows {
            for l in 0..fm.cols {
                cells.push(fm.score(h, l, config) >= config.possibility_threshold);
            }
        }
        Self {
            rows: fm.rows,
            cols: fm.cols,
            cells,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, high: usize, low: usize) -> bool {
        self.cells[high * self.cols + low]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

/// Feature and possibility matrices between two consecutive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub features: FeatureMatrix,
    pub possible: PossibilityMatrix,
}

impl Link {
    pub fn build(low: &[Observation], high: &[Observation], config: &FeatureConfig) -> Self {
        let features = FeatureMatrix::from_observations(low, high, config);
        let possible = PossibilityMatrix::build(&features, config);
        Self { features, possible }
    }
}
