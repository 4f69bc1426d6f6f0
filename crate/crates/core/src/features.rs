//! Blob appearance and motion features.
//!
//! Raw features measure dissimilarity (0 = identical). [`normalize_feature`]
//! maps them onto a similarity scale in [0, 1] where 1 means identical, and
//! [`combined_score`] folds a normalized vector into a single weighted sum.

use thiserror::Error;

use crate::detection::Blob;
use crate::frames::Frame;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("blob pixel ({x}, {y}) lies outside the {width}x{height} frame")]
pub struct OutOfBounds {
    pub x: u32,
    pub y: u32,
    pub width: usize,
    pub height: usize,
}

pub type Point = (f64, f64);

/// Per-channel 256-bin histogram of a blob's colors. Zero-valued samples
/// are left out of a channel's histogram and its count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorHistogram {
    pub bins: [[u32; 256]; 3],
    pub area_nonzero: [u32; 3],
}

impl Default for ColorHistogram {
    fn default() -> Self {
        Self {
            bins: [[0; 256]; 3],
            area_nonzero: [0; 3],
        }
    }
}

impl ColorHistogram {
    pub fn add(&mut self, px: [u8; 3]) {
        for (c, &v) in px.iter().enumerate() {
            if v != 0 {
                self.bins[c][v as usize] += 1;
                self.area_nonzero[c] += 1;
            }
        }
    }
}

/// Histogram of the frame's colors under the blob's pixels.
pub fn color_histogram(frame: &Frame, blob: &Blob) -> Result<ColorHistogram, OutOfBounds> {
    let mut hist = ColorHistogram::default();
    for &(x, y) in &blob.pixels {
        if x as usize >= frame.width() || y as usize >= frame.height() {
            return Err(OutOfBounds {
                x,
                y,
                width: frame.width(),
                height: frame.height(),
            });
        }
        hist.add(frame.get(x as usize, y as usize));
    }
    Ok(hist)
}

/// Entropy of one channel's histogram in nats. Empty channels give 0.
pub fn channel_entropy(bins: &[u32; 256], area: u32) -> f64 {
    if area == 0 {
        return 0.0;
    }
    let a = f64::from(area);
    -bins
        .iter()
        .filter(|&&h| h > 0)
        .map(|&h| {
            let p = f64::from(h) / a;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Sum of the three channel entropies.
pub fn entropy(hist: &ColorHistogram) -> f64 {
    (0..3)
        .map(|c| channel_entropy(&hist.bins[c], hist.area_nonzero[c]))
        .sum::<f64>()
        .max(0.0)
}

pub fn entropy_difference(e_low: f64, e_high: f64) -> f64 {
    (e_high - e_low).abs()
}

pub fn centroid_distance(a: Point, b: Point) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

/// `w1·(1 − cos φ)` where φ is the turn between segments `a→b` and `b→c`.
/// A zero-length segment counts as no turn.
pub fn movement_angle(a: Point, b: Point, c: Point, w1: f64) -> f64 {
    let (ux, uy) = (b.0 - a.0, b.1 - a.1);
    let (vx, vy) = (c.0 - b.0, c.1 - b.1);
    let nu = ux.hypot(uy);
    let nv = vx.hypot(vy);
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let cos = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
    w1 * (1.0 - cos)
}

/// `w2·(1 − 2·√(d1·d2)/(d1 + d2))`: zero when consecutive step lengths agree.
pub fn speed_feature(a: Point, b: Point, c: Point, w2: f64) -> f64 {
    let d1 = centroid_distance(a, b);
    let d2 = centroid_distance(b, c);
    if d1 + d2 == 0.0 {
        return 0.0;
    }
    (w2 * (1.0 - 2.0 * (d1 * d2).sqrt() / (d1 + d2))).max(0.0)
}

/// Map a dissimilarity onto [0, 1]: `√(1 − (f/cap)²)` below the cap, 0 at or
/// beyond it.
pub fn normalize_feature(f: f64, cap: f64) -> f64 {
    if f >= cap {
        return 0.0;
    }
    let r = f / cap;
    (1.0 - r * r).sqrt()
}

/// One value per feature kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerFeature {
    pub entropy_diff: f64,
    pub distance: f64,
    pub angle: f64,
    pub speed: f64,
}

impl PerFeature {
    pub fn splat(v: f64) -> Self {
        Self {
            entropy_diff: v,
            distance: v,
            angle: v,
            speed: v,
        }
    }

    fn values(&self) -> [f64; 4] {
        [self.entropy_diff, self.distance, self.angle, self.speed]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    /// Weight inside the movement-angle feature.
    pub w1: f64,
    /// Weight inside the speed feature.
    pub w2: f64,
    /// Normalization cap per feature.
    pub caps: PerFeature,
    /// Weight of each normalized feature in the combined score.
    pub weights: PerFeature,
    /// Minimum combined pair similarity for a link to be possible.
    pub possibility_threshold: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            w1: 1.0,
            w2: 1.0,
            caps: PerFeature {
                entropy_diff: 2.0,
                distance: 50.0,
                angle: 1.0,
                speed: 0.5,
            },
            weights: PerFeature::splat(1.0),
            possibility_threshold: 1.2,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self
            .caps
            .values()
            .iter()
            .any(|&c| !(c > 0.0 && c.is_finite()))
        {
            return Err("every feature cap must be > 0".into());
        }
        let w = self.weights.values();
        if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || w.iter().sum::<f64>() <= 0.0 {
            return Err("feature weights must be >= 0 with a positive sum".into());
        }
        if !(self.w1 >= 0.0 && self.w2 >= 0.0) {
            return Err("w1 and w2 must be >= 0".into());
        }
        if !self.possibility_threshold.is_finite() {
            return Err("possibility threshold must be finite".into());
        }
        Ok(())
    }
}

/// Pairwise or triple-wise features. Angle and speed only exist for
/// triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub entropy_diff: f64,
    pub distance: f64,
    pub angle: Option<f64>,
    pub speed: Option<f64>,
}

impl FeatureVector {
    pub fn pair(entropy_diff: f64, distance: f64) -> Self {
        Self {
            entropy_diff,
            distance,
            angle: None,
            speed: None,
        }
    }

    pub fn with_motion(self, angle: f64, speed: f64) -> Self {
        Self {
            angle: Some(angle),
            speed: Some(speed),
            ..self
        }
    }

    pub fn normalized(&self, caps: &PerFeature) -> Self {
        Self {
            entropy_diff: normalize_feature(self.entropy_diff, caps.entropy_diff),
            distance: normalize_feature(self.distance, caps.distance),
            angle: self.angle.map(|a| normalize_feature(a, caps.angle)),
            speed: self.speed.map(|s| normalize_feature(s, caps.speed)),
        }
    }
}

/// Weighted sum of the features present in `v`.
pub fn combined_score(v: &FeatureVector, weights: &PerFeature) -> f64 {
    weights.entropy_diff * v.entropy_diff
        + weights.distance * v.distance
        + v.angle.map_or(0.0, |a| weights.angle * a)
        + v.speed.map_or(0.0, |s| weights.speed * s)
}

/// What the tracker keeps of a blob once its features are extracted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub centroid: Point,
    pub entropy: f64,
    pub area: usize,
}

impl Observation {
    pub fn from_blob(frame: &Frame, blob: &Blob) -> Result<Self, OutOfBounds> {
        Ok(Self {
            centroid: blob.centroid,
            entropy: entropy(&color_histogram(frame, blob)?),
            area: blob.area(),
        })
    }
}

/// Raw pair features between a lower-frame and a higher-frame observation.
pub fn pair_features(low: &Observation, high: &Observation) -> FeatureVector {
    FeatureVector::pair(
        entropy_difference(low.entropy, high.entropy),
        centroid_distance(low.centroid, high.centroid),
    )
}
