//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! Run configuration sections: `io`, `detection`, `features`, `tracker` and
//! `synth`; `mode` may appear before any header or under `[io]`. Scene
//! scripts use the same syntax with one `[scene]` section and any number of
//! `[actor]` sections. `#` and `;` start comments.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::detection::{
    BackgroundParams, DetectionConfig, DetectionMode, DEFAULT_BACKGROUND_THRESHOLD,
    DEFAULT_REDHAT_THRESHOLD,
};
use crate::features::FeatureConfig;
use crate::frames::Rgb;
use crate::synth::{self, Actor, SceneScript, Waypoint, DEFAULT_VISIBILITY_COVER};
use crate::tracker::{TrackerConfig, DEFAULT_OCCLUSION_LIMIT};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: cannot parse `{value}` for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}` out of range: {reason}")]
    Range { key: String, reason: String },
    #[error("no input source: set `input_dir` under [io] or `scene`/`preset` under [synth]")]
    MissingInput,
    #[error("more than one input source given")]
    ConflictingInput,
    #[error("missing required key `{0}`")]
    MissingKey(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

#[derive(Debug, Clone, PartialEq)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

/// Parsed file: sections in order, the unnamed leading section first.
fn parse_document(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections = vec![Section {
        name: String::new(),
        line: 0,
        entries: Vec::new(),
    }];
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                reason: format!("unterminated section header `{content}`"),
            })?;
            sections.push(Section {
                name: name.trim().to_ascii_lowercase(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            reason: format!("expected `key = value`, found `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                reason: "empty key".into(),
            });
        }
        sections
            .last_mut()
            .expect("root section")
            .entries
            .push(Entry {
                line,
                key: key.to_ascii_lowercase(),
                value: value.trim().to_string(),
            });
    }
    Ok(sections)
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    e.value
        .parse()
        .map_err(|err: T::Err| ConfigError::BadValue {
            line: e.line,
            key: e.key.clone(),
            value: e.value.clone(),
            reason: err.to_string(),
        })
}

fn parse_rgb(e: &Entry) -> Result<Rgb, ConfigError> {
    let bad = |reason: &str| ConfigError::BadValue {
        line: e.line,
        key: e.key.clone(),
        value: e.value.clone(),
        reason: reason.into(),
    };
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad("expected `r, g, b`"));
    }
    let mut rgb = [0u8; 3];
    for (c, p) in rgb.iter_mut().zip(parts) {
        *c = p.parse().map_err(|_| bad("channel must be 0..=255"))?;
    }
    Ok(rgb)
}

/// `frame:x,y | frame:x,y | ...`
fn parse_waypoints(e: &Entry) -> Result<Vec<Waypoint>, ConfigError> {
    let bad = |reason: String| ConfigError::BadValue {
        line: e.line,
        key: e.key.clone(),
        value: e.value.clone(),
        reason,
    };
    e.value
        .split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (frame, xy) = item
                .split_once(':')
                .ok_or_else(|| bad(format!("waypoint `{item}` is not `frame:x,y`")))?;
            let (x, y) = xy
                .split_once(',')
                .ok_or_else(|| bad(format!("waypoint `{item}` is not `frame:x,y`")))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|err| bad(err.to_string()));
            Ok(Waypoint {
                frame: frame
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad frame in `{item}`")))?,
                x: num(x)?,
                y: num(y)?,
            })
        })
        .collect()
}

fn unknown(section: &Section, e: &Entry) -> ConfigError {
    ConfigError::UnknownKey {
        line: e.line,
        section: if section.name.is_empty() {
            "<root>".into()
        } else {
            section.name.clone()
        },
        key: e.key.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Background,
    RedHat,
    Synth,
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "background" => Ok(Self::Background),
            "redhat" | "red-hat" | "red_hat" => Ok(Self::RedHat),
            "synth" => Ok(Self::Synth),
            other => Err(format!(
                "unknown mode `{other}` (background, redhat, synth)"
            )),
        }
    }
}

fn parse_detector(s: &str) -> Result<DetectionMode, String> {
    match s.parse::<RunMode>()? {
        RunMode::Background => Ok(DetectionMode::Background),
        RunMode::RedHat => Ok(DetectionMode::RedHat),
        RunMode::Synth => Err("detector must be background or redhat".into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneSource {
    File(PathBuf),
    Preset(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Frames { dir: PathBuf, pattern: String },
    Scene(SceneSource),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub input: InputSource,
    pub detection: DetectionConfig,
    pub tracker: TrackerConfig,
    pub output: PathBuf,
    /// Ground-truth CSV written in synth mode.
    pub truth_output: Option<PathBuf>,
    pub dump_masks: Option<PathBuf>,
    pub seed: u64,
    /// Scoring radius in synth mode; defaults to the scene's largest actor
    /// radius.
    pub match_radius: Option<f64>,
}

impl RunConfig {
    /// Where the truth CSV goes: the configured path, or `<output stem>_truth.csv`.
    pub fn truth_path(&self) -> PathBuf {
        self.truth_output.clone().unwrap_or_else(|| {
            let stem = self
                .output
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("tracks");
            self.output.with_file_name(format!("{stem}_truth.csv"))
        })
    }

    /// Load the scene for synth mode, applying the run seed.
    pub fn load_scene(&self, base: &Path) -> Result<Option<SceneScript>, ConfigError> {
        let InputSource::Scene(source) = &self.input else {
            return Ok(None);
        };
        let mut scene = match source {
            SceneSource::Preset(name) => preset_scene(name, self.seed)?,
            SceneSource::File(path) => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                read_scene(&path)?
            }
        };
        scene.seed = self.seed;
        Ok(Some(scene))
    }
}

pub fn preset_scene(name: &str, seed: u64) -> Result<SceneScript, ConfigError> {
    Ok(match name {
        "single" => synth::single_actor_scene(seed),
        "crowded" => synth::crowded_scene(seed),
        "occlusion" => synth::occlusion_scene(seed),
        "sparse" => synth::sparse_scene(seed),
        "congested" => synth::congested_scene(seed),
        other => {
            return Err(ConfigError::Range {
                key: "preset".into(),
                reason: format!(
                    "unknown preset `{other}` (single, crowded, congested, occlusion, sparse)"
                ),
            })
        }
    })
}

fn range(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        key: key.into(),
        reason: reason.into(),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let sections = parse_document(text)?;

    let mut mode = RunMode::RedHat;
    let mut input_dir: Option<PathBuf> = None;
    let mut pattern = "*.ppm".to_string();
    let mut output = PathBuf::from("tracks.csv");
    let mut truth_output = None;
    let mut dump_masks = None;
    let mut seed = 0u64;
    let mut scene_file = None;
    let mut preset = None;
    let mut detector = DetectionMode::RedHat;
    let mut match_radius = None;

    let mut threshold: Option<f64> = None;
    let mut morphology_radius = 1usize;
    let mut min_blob_area = 20usize;
    let mut bg = BackgroundParams::default();

    let mut features = FeatureConfig::default();
    let mut angle_cap = None;
    let mut speed_cap = None;
    let mut occlusion_limit = DEFAULT_OCCLUSION_LIMIT;

    for section in &sections {
        for e in &section.entries {
            let key = e.key.as_str();
            match (section.name.as_str(), key) {
                ("" | "io", "mode") => {
                    mode = e.value.parse().map_err(|reason| ConfigError::BadValue {
                        line: e.line,
                        key: e.key.clone(),
                        value: e.value.clone(),
                        reason,
                    })?
                }
                ("io", "input_dir") => input_dir = Some(PathBuf::from(&e.value)),
                ("io", "pattern") => pattern = e.value.clone(),
                ("io", "output") => output = PathBuf::from(&e.value),
                ("io", "truth_output") => truth_output = Some(PathBuf::from(&e.value)),
                ("io", "dump_masks") => dump_masks = Some(PathBuf::from(&e.value)),
                ("detection", "threshold") => threshold = Some(parse_value(e)?),
                ("detection", "morphology_radius") => morphology_radius = parse_value(e)?,
                ("detection", "min_blob_area") => min_blob_area = parse_value(e)?,
                ("detection", "alpha") => bg.alpha = parse_value(e)?,
                ("detection", "eta") => bg.eta = parse_value(e)?,
                ("detection", "initial_variance") => bg.initial_variance = parse_value(e)?,
                ("features", "w1") => features.w1 = parse_value(e)?,
                ("features", "w2") => features.w2 = parse_value(e)?,
                ("features", "cap_entropy_diff") => features.caps.entropy_diff = parse_value(e)?,
                ("features", "cap_distance") => features.caps.distance = parse_value(e)?,
                ("features", "cap_angle") => angle_cap = Some(parse_value(e)?),
                ("features", "cap_speed") => speed_cap = Some(parse_value(e)?),
                ("features", "weight_entropy_diff") => {
                    features.weights.entropy_diff = parse_value(e)?
                }
                ("features", "weight_distance") => features.weights.distance = parse_value(e)?,
                ("features", "weight_angle") => features.weights.angle = parse_value(e)?,
                ("features", "weight_speed") => features.weights.speed = parse_value(e)?,
                ("features", "possibility_threshold") => {
                    features.possibility_threshold = parse_value(e)?
                }
                ("tracker", "occlusion_limit") => occlusion_limit = parse_value(e)?,
                ("synth", "scene") => scene_file = Some(PathBuf::from(&e.value)),
                ("synth", "preset") => preset = Some(e.value.clone()),
                ("synth", "seed") => seed = parse_value(e)?,
                ("synth", "match_radius") => match_radius = Some(parse_value(e)?),
                ("synth", "detector") => {
                    detector = parse_detector(&e.value).map_err(|reason| ConfigError::BadValue {
                        line: e.line,
                        key: e.key.clone(),
                        value: e.value.clone(),
                        reason,
                    })?
                }
                ("" | "io" | "detection" | "features" | "tracker" | "synth", _) => {
                    return Err(unknown(section, e))
                }
                (other, _) => {
                    return Err(ConfigError::UnknownSection {
                        line: section.line,
                        section: other.to_string(),
                    })
                }
            }
        }
        if !matches!(
            section.name.as_str(),
            "" | "io" | "detection" | "features" | "tracker" | "synth"
        ) {
            return Err(ConfigError::UnknownSection {
                line: section.line,
                section: section.name.clone(),
            });
        }
    }

    features.caps.angle = angle_cap.unwrap_or(features.w1);
    features.caps.speed = speed_cap.unwrap_or(0.5 * features.w2);

    let scene_source = match (scene_file, preset) {
        (Some(_), Some(_)) => return Err(ConfigError::ConflictingInput),
        (Some(f), None) => Some(SceneSource::File(f)),
        (None, Some(p)) => Some(SceneSource::Preset(p)),
        (None, None) => None,
    };
    let input = match (mode, input_dir, scene_source) {
        (_, Some(_), Some(_)) => return Err(ConfigError::ConflictingInput),
        (RunMode::Synth, None, Some(s)) => InputSource::Scene(s),
        (RunMode::Synth, _, None) => return Err(ConfigError::MissingInput),
        (_, Some(dir), None) => InputSource::Frames { dir, pattern },
        (_, None, _) => return Err(ConfigError::MissingInput),
    };

    let detection_mode = match mode {
        RunMode::Background => DetectionMode::Background,
        RunMode::RedHat => DetectionMode::RedHat,
        RunMode::Synth => detector,
    };
    let threshold = threshold.unwrap_or(match detection_mode {
        DetectionMode::Background => DEFAULT_BACKGROUND_THRESHOLD,
        DetectionMode::RedHat => DEFAULT_REDHAT_THRESHOLD,
    });
    let detection = DetectionConfig {
        mode: detection_mode,
        threshold,
        morphology_radius,
        min_blob_area,
        background: bg,
    };
    detection.validate().map_err(|e| {
        let key = if e.to_string().contains("alpha") {
            "alpha"
        } else if e.to_string().contains("threshold") {
            "threshold"
        } else {
            "detection"
        };
        range(key, e.to_string())
    })?;
    features.validate().map_err(|r| range("features", r))?;
    if let Some(r) = match_radius {
        if !(r > 0.0) {
            return Err(range("match_radius", "must be > 0"));
        }
    }

    Ok(RunConfig {
        mode,
        input,
        detection,
        tracker: TrackerConfig {
            features,
            occlusion_limit,
        },
        output,
        truth_output,
        dump_masks,
        seed,
        match_radius,
    })
}

pub fn read_scene(path: &Path) -> Result<SceneScript, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scene_str(&text)
}

/// Parse a scene script: one `[scene]` section and one `[actor]` section per
/// actor. Waypoints are written `frame:x,y` separated by `|`.
pub fn parse_scene_str(text: &str) -> Result<SceneScript, ConfigError> {
    let sections = parse_document(text)?;
    let mut scene = SceneScript {
        width: 0,
        height: 0,
        num_frames: 0,
        actors: Vec::new(),
        background: [30, 30, 35],
        noise_amplitude: 0,
        seed: 0,
        visibility_cover: DEFAULT_VISIBILITY_COVER,
    };
    let mut seen_scene = false;
    for section in &sections {
        match section.name.as_str() {
            "" if section.entries.is_empty() => {}
            "scene" => {
                seen_scene = true;
                for e in &section.entries {
                    match e.key.as_str() {
                        "width" => scene.width = parse_value(e)?,
                        "height" => scene.height = parse_value(e)?,
                        "frames" | "num_frames" => scene.num_frames = parse_value(e)?,
                        "background" => scene.background = parse_rgb(e)?,
                        "noise" | "noise_amplitude" => scene.noise_amplitude = parse_value(e)?,
                        "seed" => scene.seed = parse_value(e)?,
                        "visibility_cover" => scene.visibility_cover = parse_value(e)?,
                        _ => return Err(unknown(section, e)),
                    }
                }
            }
            "actor" => {
                let mut id = None;
                let mut radius = 6.0;
                let mut color = [210, 30, 35];
                let mut waypoints = None;
                for e in &section.entries {
                    match e.key.as_str() {
                        "id" => id = Some(parse_value(e)?),
                        "radius" => radius = parse_value(e)?,
                        "color" => color = parse_rgb(e)?,
                        "waypoints" => waypoints = Some(parse_waypoints(e)?),
                        _ => return Err(unknown(section, e)),
                    }
                }
                scene.actors.push(Actor {
                    id: id.unwrap_or(scene.actors.len() as u32 + 1),
                    waypoints: waypoints
                        .ok_or_else(|| ConfigError::MissingKey("waypoints".into()))?,
                    radius,
                    color,
                });
            }
            "" => return Err(unknown(section, &section.entries[0])),
            other => {
                return Err(ConfigError::UnknownSection {
                    line: section.line,
                    section: other.to_string(),
                })
            }
        }
    }
    if !seen_scene {
        return Err(ConfigError::MissingKey("[scene]".into()));
    }
    scene
        .validate()
        .map_err(|e| range("scene", e.to_string()))?;
    Ok(scene)
}

/// Serialize a scene in the format [`parse_scene_str`] reads.
pub fn scene_to_string(scene: &SceneScript) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let [r, g, b] = scene.background;
    let _ = writeln!(
        out,
        "[scene]\nwidth = {}\nheight = {}\nframes = {}\nbackground = {r}, {g}, {b}\nnoise = {}\nseed = {}\nvisibility_cover = {}",
        scene.width, scene.height, scene.num_frames, scene.noise_amplitude, scene.seed, scene.visibility_cover
    );
    for a in &scene.actors {
        let [r, g, b] = a.color;
        let wps: Vec<String> = a
            .waypoints
            .iter()
            .map(|w| format!("{}:{},{}", w.frame, w.x, w.y))
            .collect();
        let _ = writeln!(
            out,
            "\n[actor]\nid = {}\nradius = {}\ncolor = {r}, {g}, {b}\nwaypoints = {}",
            a.id,
            a.radius,
            wps.join(" | ")
        );
    }
    out
}
