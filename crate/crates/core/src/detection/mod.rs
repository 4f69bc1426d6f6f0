//! Foreground detection: thresholded masks, morphological cleaning and blob
//! extraction.

mod background;
mod components;
mod morphology;

pub use background::BackgroundModel;
pub use components::{connected_components, Blob, BoundingBox};
pub use morphology::{clean, close, dilate, erode, open};

use thiserror::Error;

use crate::frames::{BinaryMask, Frame};

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error("frame is {}x{}, model expects {}x{}", found.0, found.1, expected.0, expected.1)]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("background model has not seen any frame")]
    EmptyModel,
    #[error("background mode requires a background model")]
    MissingModel,
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    /// Subtract a learned running background.
    Background,
    /// Red minus green color prior.
    RedHat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundParams {
    pub alpha: f64,
    pub eta: f64,
    pub initial_variance: f64,
}

impl Default for BackgroundParams {
    fn default() -> Self {
        Self {
            alpha: 0.95,
            eta: 2.0,
            initial_variance: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    pub mode: DetectionMode,
    pub threshold: f64,
    pub morphology_radius: usize,
    pub min_blob_area: usize,
    pub background: BackgroundParams,
}

pub const DEFAULT_BACKGROUND_THRESHOLD: f64 = 25.0;
pub const DEFAULT_REDHAT_THRESHOLD: f64 = 50.0;

impl DetectionConfig {
    pub fn background() -> Self {
        Self {
            mode: DetectionMode::Background,
            threshold: DEFAULT_BACKGROUND_THRESHOLD,
            morphology_radius: 1,
            min_blob_area: 20,
            background: BackgroundParams::default(),
        }
    }

    pub fn redhat() -> Self {
        Self {
            mode: DetectionMode::RedHat,
            threshold: DEFAULT_REDHAT_THRESHOLD,
            ..Self::background()
        }
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        if !(0.0..=255.0).contains(&self.threshold) {
            return Err(DetectionError::Parameter(format!(
                "threshold {} outside [0, 255]",
                self.threshold
            )));
        }
        let bg = &self.background;
        if !(bg.alpha > 0.0 && bg.alpha < 1.0) {
            return Err(DetectionError::Parameter(format!(
                "alpha {} outside (0, 1)",
                bg.alpha
            )));
        }
        if !(bg.eta >= 0.0) || !(bg.initial_variance >= 0.0) {
            return Err(DetectionError::Parameter(
                "eta and initial variance must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Foreground where `R - G > threshold`, computed in signed arithmetic.
/// The blue channel is ignored.
pub fn detect_redhat(frame: &Frame, threshold: f64) -> BinaryMask {
    let bits = frame
        .pixels()
        .iter()
        .map(|px| f64::from(i16::from(px[0]) - i16::from(px[1])) > threshold)
        .collect();
    BinaryMask::from_bits(frame.width(), frame.height(), bits).expect("frame dimensions")
}

/// Intermediate and final products of detecting one frame.
#[derive(Debug, Clone)]
pub struct Detection {
    pub raw_mask: BinaryMask,
    pub mask: BinaryMask,
    pub blobs: Vec<Blob>,
}

/// Detect blobs in one frame. In background mode `model` is updated with
/// `frame` before subtraction.
pub fn detect(
    frame: &Frame,
    frame_index: usize,
    config: &DetectionConfig,
    model: Option<&mut BackgroundModel>,
) -> Result<Detection, DetectionError> {
    let raw_mask = match config.mode {
        DetectionMode::RedHat => detect_redhat(frame, config.threshold),
        DetectionMode::Background => {
            let model = model.ok_or(DetectionError::MissingModel)?;
            model.update(frame)?;
            model.subtract(frame, config.threshold)?
        }
    };
    let mask = clean(&raw_mask, config.morphology_radius);
    let blobs = connected_components(&mask, frame_index, config.min_blob_area);
    Ok(Detection {
        raw_mask,
        mask,
        blobs,
    })
}

/// Stateful detector owning the background model, created lazily from the
/// first frame's dimensions.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectionConfig,
    model: Option<BackgroundModel>,
}

impl Detector {
    pub fn new(config: DetectionConfig) -> Result<Self, DetectionError> {
        config.validate()?;
        Ok(Self {
            config,
            model: None,
        })
    }

    pub fn config(&self) -> &DetectionConfig {
        &self.config
    }

    pub fn model(&self) -> Option<&BackgroundModel> {
        self.model.as_ref()
    }

    pub fn detect(
        &mut self,
        frame: &Frame,
        frame_index: usize,
    ) -> Result<Detection, DetectionError> {
        if self.config.mode == DetectionMode::Background && self.model.is_none() {
            let bg = self.config.background;
            self.model = Some(BackgroundModel::new(
                frame.width(),
                frame.height(),
                bg.alpha,
                bg.eta,
                bg.initial_variance,
            )?);
        }
        detect(frame, frame_index, &self.config, self.model.as_mut())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn redhat_pixel_cases() {
        let f =
            Frame::from_pixels(3, 1, vec![[200, 50, 0], [120, 120, 120], [10, 200, 10]]).unwrap();
        assert_eq!(detect_redhat(&f, 100.0).bits(), &[true, false, false]);
        assert_eq!(detect_redhat(&f, 0.0).bits(), &[true, false, false]);
    }

    #[test]
    fn black_frame_has_no_blobs() {
        let f = Frame::filled(16, 16, [0; 3]).unwrap();
        let d = detect(&f, 0, &DetectionConfig::redhat(), None).unwrap();
        assert!(d.blobs.is_empty());
    }

    #[test]
    fn background_mode_needs_model() {
        let f = Frame::filled(4, 4, [0; 3]).unwrap();
        assert!(matches!(
            detect(&f, 0, &DetectionConfig::background(), None),
            Err(DetectionError::MissingModel)
        ));
    }

    #[test]
    fn learned_background_yields_nothing() {
        let mut det = Detector::new(DetectionConfig::background()).unwrap();
        let f = Frame::filled(8, 8, [40, 90, 10]).unwrap();
        for t in 0..5 {
            assert!(det.detect(&f, t).unwrap().blobs.is_empty());
        }
    }

    #[test]
    fn config_validation() {
        let mut c = DetectionConfig::redhat();
        c.threshold = 300.0;
        assert!(c.validate().is_err());
        let mut c = DetectionConfig::background();
        c.background.alpha = 1.5;
        assert!(Detector::new(c).is_err());
    }
}
