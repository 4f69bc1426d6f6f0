//! Detection plus tracking over a frame sequence, and the file-level runner
//! behind the CLI.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{InputSource, RunConfig};
use crate::detection::{Detection, DetectionConfig, Detector};
use crate::frames::{self, Frame};
use crate::synth::{self, ScoreReport};
use crate::tracker::{self, NtyxRecord, Tracker, TrackerConfig};
use crate::Error;

/// Streaming detector and tracker. Frames must share one size.
#[derive(Debug, Clone)]
pub struct Pipeline {
    detector: Detector,
    tracker: Tracker,
    dims: Option<(usize, usize)>,
    frames: usize,
}

impl Pipeline {
    pub fn new(detection: DetectionConfig, tracking: TrackerConfig) -> Result<Self, Error> {
        Ok(Self {
            detector: Detector::new(detection)?,
            tracker: Tracker::new(tracking),
            dims: None,
            frames: 0,
        })
    }

    /// Detect and track one frame; returns the detection products.
    pub fn push(&mut self, frame: &Frame) -> Result<Detection, Error> {
        let dims = (frame.width(), frame.height());
        match self.dims {
            None => self.dims = Some(dims),
            Some(expected) if expected != dims => {
                return Err(crate::detection::DetectionError::DimensionMismatch {
                    expected,
                    found: dims,
                }
                .into())
            }
            Some(_) => {}
        }
        let detection = self.detector.detect(frame, self.frames)?;
        self.tracker.step_blobs(frame, &detection.blobs)?;
        self.frames += 1;
        Ok(detection)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn detector(&self) -> &Detector {
        &self.detector
    }

    pub fn records(&self) -> Vec<NtyxRecord> {
        self.tracker.export_ntyx()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub frames: usize,
    pub tracks: usize,
    pub records: usize,
    pub output: PathBuf,
    pub truth_output: Option<PathBuf>,
    pub score: Option<ScoreReport>,
}

/// Write `contents` to `path` through a sibling temp file and a rename, so a
/// failed run never leaves a half-written table behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

fn dump_mask(dir: &Path, t: usize, detection: &Detection) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    frames::save_mask(&detection.raw_mask, &dir.join(frames::mask_file_name(t)))?;
    Ok(())
}

/// Run a configuration end to end. Relative paths in the configuration are
/// taken as given (relative to the working directory), except scene files,
/// which resolve against `base`.
pub fn run(config: &RunConfig, base: &Path) -> Result<RunSummary, Error> {
    let mut pipeline = Pipeline::new(config.detection, config.tracker.clone())?;
    let mut truth_info = None;

    match &config.input {
        InputSource::Frames { dir, pattern } => {
            let paths = frames::list_frame_sequence(dir, pattern)?;
            for path in &paths {
                let frame = frames::load_frame(path)?;
                let detection = pipeline.push(&frame).map_err(|e| match e {
                    Error::Detection(crate::detection::DetectionError::DimensionMismatch {
                        expected,
                        found,
                    }) => Error::FrameSize {
                        path: path.clone(),
                        expected,
                        found,
                    },
                    other => other,
                })?;
                if let Some(dir) = &config.dump_masks {
                    dump_mask(dir, pipeline.frames() - 1, &detection)?;
                }
            }
        }
        InputSource::Scene(_) => {
            let scene = config.load_scene(base)?.expect("scene input");
            let mut truth = Vec::new();
            for t in 0..scene.num_frames {
                let (frame, entries) = synth::render(&scene, t)?;
                truth.extend(entries);
                let detection = pipeline.push(&frame)?;
                if let Some(dir) = &config.dump_masks {
                    dump_mask(dir, t, &detection)?;
                }
            }
            let radius = config.match_radius.unwrap_or_else(|| {
                scene
                    .actors
                    .iter()
                    .map(|a| a.radius)
                    .fold(0.0, f64::max)
                    .max(1.0)
            });
            truth_info = Some((truth, radius));
        }
    }

    let records = pipeline.records();
    write_atomic(&config.output, tracker::ntyx_to_csv(&records).as_bytes())?;

    let (truth_output, score) = match truth_info {
        Some((truth, radius)) => {
            let path = config.truth_path();
            write_atomic(&path, synth::truth_to_csv(&truth).as_bytes())?;
            (Some(path), Some(synth::score(&records, &truth, radius)))
        }
        None => (None, None),
    };

    Ok(RunSummary {
        frames: pipeline.frames(),
        tracks: pipeline.tracker().tracks().len(),
        records: records.len(),
        output: config.output.clone(),
        truth_output,
        score,
    })
}
