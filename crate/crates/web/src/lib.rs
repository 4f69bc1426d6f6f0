//! Browser bindings for the pedestrian tracker: render a scripted scene,
//! show the red-hat detection mask for one frame, and track a whole scene.

use pedtrack::config::preset_scene;
use pedtrack::detection::{DetectionConfig, DetectionMode, Detector};
use pedtrack::frames::Frame;
use pedtrack::pipeline::Pipeline;
use pedtrack::synth::{self, SceneScript};
use pedtrack::tracker::{ntyx_to_csv, TrackerConfig};
use wasm_bindgen::prelude::*;

/// An RGBA image ready for `ImageData`.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    rgba: Vec<u8>,
    blobs: usize,
}

#[wasm_bindgen]
impl Image {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel bytes, four per pixel.
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// Blobs found; zero for plain renders.
    #[wasm_bindgen(getter)]
    pub fn blobs(&self) -> usize {
        self.blobs
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    ntyx: String,
    accuracy: f64,
    id_switches: usize,
    tracks: usize,
    frames: usize,
}

#[wasm_bindgen]
impl TrackResult {
    /// The `N,T,Y,X` table.
    #[wasm_bindgen(getter)]
    pub fn ntyx(&self) -> String {
        self.ntyx.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    #[wasm_bindgen(getter)]
    pub fn id_switches(&self) -> usize {
        self.id_switches
    }

    #[wasm_bindgen(getter)]
    pub fn tracks(&self) -> usize {
        self.tracks
    }

    #[wasm_bindgen(getter)]
    pub fn frames(&self) -> usize {
        self.frames
    }
}

fn scene(preset: &str, seed: u32) -> Result<SceneScript, String> {
    preset_scene(preset, u64::from(seed)).map_err(|e| e.to_string())
}

fn to_rgba(frame: &Frame) -> Vec<u8> {
    frame
        .pixels()
        .iter()
        .flat_map(|&[r, g, b]| [r, g, b, 255])
        .collect()
}

/// Number of frames in a preset scene.
pub fn scene_length(preset: &str) -> Result<usize, String> {
    Ok(scene(preset, 0)?.num_frames)
}

pub fn render_image(preset: &str, seed: u32, t: usize) -> Result<Image, String> {
    let script = scene(preset, seed)?;
    let (frame, _) = synth::render(&script, t).map_err(|e| e.to_string())?;
    Ok(Image {
        width: frame.width(),
        height: frame.height(),
        rgba: to_rgba(&frame),
        blobs: 0,
    })
}

/// Cleaned red-hat mask of one frame; each blob is tinted, its centroid
/// marked in white.
pub fn detect_image(
    preset: &str,
    seed: u32,
    t: usize,
    threshold: f64,
    morphology_radius: usize,
    min_blob_area: usize,
) -> Result<Image, String> {
    let script = scene(preset, seed)?;
    let (frame, _) = synth::render(&script, t).map_err(|e| e.to_string())?;
    let config = DetectionConfig {
        mode: DetectionMode::RedHat,
        threshold,
        morphology_radius,
        min_blob_area,
        ..DetectionConfig::redhat()
    };
    let mut detector = Detector::new(config).map_err(|e| e.to_string())?;
    let detection = detector.detect(&frame, t).map_err(|e| e.to_string())?;
    let mut out = Frame::filled(frame.width(), frame.height(), [0, 0, 0]).expect("frame size");
    const TINTS: [[u8; 3]; 6] = [
        [230, 80, 80],
        [80, 200, 120],
        [90, 140, 240],
        [230, 200, 70],
        [200, 100, 220],
        [80, 210, 220],
    ];
    for (n, blob) in detection.blobs.iter().enumerate() {
        for &(x, y) in &blob.pixels {
            out.set(x as usize, y as usize, TINTS[n % TINTS.len()]);
        }
        let (cx, cy) = blob.centroid;
        out.set(cx.round() as usize, cy.round() as usize, [255, 255, 255]);
    }
    Ok(Image {
        width: out.width(),
        height: out.height(),
        rgba: to_rgba(&out),
        blobs: detection.blobs.len(),
    })
}

/// Run detection and tracking over a preset scene and score it against the
/// script. The sparse scene uses background subtraction, the others the
/// red-hat detector.
pub fn track(
    preset: &str,
    seed: u32,
    threshold: f64,
    occlusion_limit: usize,
) -> Result<TrackResult, String> {
    let script = scene(preset, seed)?;
    let mut detection = if preset == "sparse" {
        DetectionConfig::background()
    } else {
        DetectionConfig::redhat()
    };
    detection.threshold = threshold;
    let tracking = TrackerConfig {
        occlusion_limit,
        ..TrackerConfig::default()
    };
    let mut pipeline = Pipeline::new(detection, tracking).map_err(|e| e.to_string())?;
    let mut truth = Vec::new();
    for t in 0..script.num_frames {
        let (frame, entries) = synth::render(&script, t).map_err(|e| e.to_string())?;
        truth.extend(entries);
        pipeline.push(&frame).map_err(|e| e.to_string())?;
    }
    let records = pipeline.records();
    let radius = script.actors.iter().map(|a| a.radius).fold(1.0, f64::max);
    let score = synth::score(&records, &truth, radius);
    Ok(TrackResult {
        ntyx: ntyx_to_csv(&records),
        accuracy: score.accuracy,
        id_switches: score.id_switches,
        tracks: pipeline.tracker().tracks().len(),
        frames: pipeline.frames(),
    })
}

#[wasm_bindgen(js_name = sceneLength)]
pub fn scene_length_js(preset: &str) -> Result<usize, JsError> {
    scene_length(preset).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = renderFrame)]
pub fn render_frame_js(preset: &str, seed: u32, t: usize) -> Result<Image, JsError> {
    render_image(preset, seed, t).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = detectFrame)]
pub fn detect_frame_js(
    preset: &str,
    seed: u32,
    t: usize,
    threshold: f64,
    morphology_radius: usize,
    min_blob_area: usize,
) -> Result<Image, JsError> {
    detect_image(preset, seed, t, threshold, morphology_radius, min_blob_area)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = trackScene)]
pub fn track_scene_js(
    preset: &str,
    seed: u32,
    threshold: f64,
    occlusion_limit: usize,
) -> Result<TrackResult, JsError> {
    track(preset, seed, threshold, occlusion_limit).map_err(|e| JsError::new(&e))
}
