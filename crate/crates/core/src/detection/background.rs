//! Per-pixel recursive mean/variance background model.

use crate::frames::{BinaryMask, Frame};

use super::DetectionError;

/// Running background estimate: a true running mean and an exponentially
/// smoothed variance, both tracked per pixel and per channel.
#[derive(Debug, Clone)]
pub struct BackgroundModel {
    width: usize,
    height: usize,
    mean: Vec<[f64; 3]>,
    variance: Vec<[f64; 3]>,
    frame_count: u64,
    alpha: f64,
    eta: f64,
}

impl BackgroundModel {
    /// `alpha` must lie in (0, 1); `eta` and `initial_variance` must be non-negative.
    pub fn new(
        width: usize,
        height: usize,
        alpha: f64,
        eta: f64,
        initial_variance: f64,
    ) -> Result<Self, DetectionError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DetectionError::Parameter(format!(
                "alpha {alpha} outside (0, 1)"
            )));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(DetectionError::Parameter(format!("eta {eta} must be >= 0")));
        }
        if !(initial_variance >= 0.0 && initial_variance.is_finite()) {
            return Err(DetectionError::Parameter(format!(
                "initial variance {initial_variance} must be >= 0"
            )));
        }
        let n = width * height;
        Ok(Self {
            width,
            height,
            mean: vec![[0.0; 3]; n],
            variance: vec![[initial_variance; 3]; n],
            frame_count: 0,
            alpha,
            eta,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_count(&self) -> u64 {
        self.frame_count
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mean(&self) -> &[[f64; 3]] {
        &self.mean
    }

    pub fn variance(&self) -> &[[f64; 3]] {
        &self.variance
    }

    fn check_dims(&self, frame: &Frame) -> Result<(), DetectionError> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(DetectionError::DimensionMismatch {
                expected: (self.width, self.height),
                found: (frame.width(), frame.height()),
            });
        }
        Ok(())
    }

    /// Fold one frame into the model.
    ///
    /// The mean update `((t-1)/t)·μ + I/t` is evaluated as `μ + (I - μ)/t`,
    /// which is algebraically identical and exact for constant input. The
    /// variance uses the freshly updated mean.
    pub fn update(&mut self, frame: &Frame) -> Result<(), DetectionError> {
        self.check_dims(frame)?;
        self.frame_count += 1;
        let t = self.frame_count as f64;
        let alpha = self.alpha;
        for ((mean, var), px) in self
            .mean
            .iter_mut()
            .zip(self.variance.iter_mut())
            .zip(frame.pixels())
        {
            for c in 0..3 {
                let value = f64::from(px[c]);
                let mu = if self.frame_count == 1 {
                    value
                } else {
                    mean[c] + (value - mean[c]) / t
                };
                let dev = value - mu;
                mean[c] = mu;
                var[c] = alpha * var[c] + (1.0 - alpha) * dev * dev;
            }
        }
        Ok(())
    }

    /// Background image `μ + η·σ` per pixel and channel.
    pub fn background_image(&self) -> Result<Vec<[f64; 3]>, DetectionError> {
        if self.frame_count == 0 {
            return Err(DetectionError::EmptyModel);
        }
        Ok(self
            .mean
            .iter()
            .zip(&self.variance)
            .map(|(m, v)| {
                [
                    m[0] + self.eta * v[0].sqrt(),
                    m[1] + self.eta * v[1].sqrt(),
                    m[2] + self.eta * v[2].sqrt(),
                ]
            })
            .collect())
    }

    /// Foreground where `I - B > threshold` on any channel. One-sided: pixels
    /// darker than the background never fire.
    pub fn subtract(&self, frame: &Frame, threshold: f64) -> Result<BinaryMask, DetectionError> {
        self.check_dims(frame)?;
        let background = self.background_image()?;
        let bits = frame
            .pixels()
            .iter()
            .zip(&background)
            .map(|(px, b)| (0..3).any(|c| f64::from(px[c]) - b[c] > threshold))
            .collect();
        Ok(BinaryMask::from_bits(self.width, self.height, bits).expect("dimensions checked"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, v: u8) -> Frame {
        Frame::filled(w, h, [v; 3]).unwrap()
    }

    #[test]
    fn first_update_copies_frame() {
        let mut m = BackgroundModel::new(2, 2, 0.95, 2.0, 0.0).unwrap();
        m.update(&gray(2, 2, 100)).unwrap();
        assert!(m.mean().iter().all(|px| *px == [100.0; 3]));
        assert_eq!(m.frame_count(), 1);
    }

    #[test]
    fn constant_sequence_decays_variance_geometrically() {
        let mut m = BackgroundModel::new(1, 1, 0.9, 2.0, 10.0).unwrap();
        // scalar recursion unrolled by hand: with I - μ = 0 only the α term survives
        let mut oracle = 10.0_f64;
        for _ in 0..25 {
            m.update(&gray(1, 1, 100)).unwrap();
            oracle *= 0.9;
            assert_eq!(m.mean()[0], [100.0; 3]);
            for c in 0..3 {
                approx::assert_relative_eq!(m.variance()[0][c], oracle, max_relative = 1e-12);
            }
        }
        approx::assert_relative_eq!(
            m.variance()[0][0],
            10.0 * 0.9_f64.powi(25),
            max_relative = 1e-12
        );
    }

    #[test]
    fn alternating_frames_average() {
        let mut m = BackgroundModel::new(1, 1, 0.5, 0.0, 0.0).unwrap();
        m.update(&gray(1, 1, 0)).unwrap();
        m.update(&gray(1, 1, 200)).unwrap();
        assert_eq!(m.mean()[0][0], 100.0);
        // σ² = 0.5·0 + 0.5·(200 − 100)²
        assert_eq!(m.variance()[0][0], 5000.0);
    }

    #[test]
    fn background_image_adds_scaled_deviation() {
        let mut m = BackgroundModel::new(1, 1, 0.5, 2.0, 50.0).unwrap();
        assert!(matches!(
            m.background_image(),
            Err(DetectionError::EmptyModel)
        ));
        m.update(&gray(1, 1, 100)).unwrap();
        // σ² = 0.5·50 = 25 → B = 100 + 2·5
        assert_eq!(m.background_image().unwrap()[0], [110.0; 3]);

        let mut zero_eta = BackgroundModel::new(1, 1, 0.5, 0.0, 50.0).unwrap();
        zero_eta.update(&gray(1, 1, 37)).unwrap();
        assert_eq!(zero_eta.background_image().unwrap()[0], [37.0; 3]);
    }

    #[test]
    fn subtraction_is_strict_and_any_channel() {
        let mut m = BackgroundModel::new(3, 1, 0.9, 0.0, 0.0).unwrap();
        m.update(&gray(3, 1, 10)).unwrap();
        // I == B with φ = 0 never fires
        assert_eq!(m.subtract(&gray(3, 1, 10), 0.0).unwrap().count_ones(), 0);
        let mut f = gray(3, 1, 10);
        f.set(1, 0, [60, 10, 10]);
        let mask = m.subtract(&f, 30.0).unwrap();
        assert_eq!(mask.bits(), &[false, true, false]);
        // darker than background is not foreground
        let dark = gray(3, 1, 0);
        assert_eq!(m.subtract(&dark, 0.0).unwrap().count_ones(), 0);
        assert_eq!(m.subtract(&gray(3, 1, 255), 255.0).unwrap().count_ones(), 0);
    }

    #[test]
    fn rejects_bad_parameters_and_dimensions() {
        assert!(BackgroundModel::new(1, 1, 1.0, 1.0, 0.0).is_err());
        assert!(BackgroundModel::new(1, 1, 0.0, 1.0, 0.0).is_err());
        assert!(BackgroundModel::new(1, 1, 0.5, -1.0, 0.0).is_err());
        let mut m = BackgroundModel::new(2, 2, 0.5, 1.0, 0.0).unwrap();
        assert!(matches!(
            m.update(&gray(3, 2, 0)),
            Err(DetectionError::DimensionMismatch { .. })
        ));
    }
}
