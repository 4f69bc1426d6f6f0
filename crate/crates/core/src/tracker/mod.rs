//! Identity maintenance across frames and NTYX trajectory export.
//!
//! Each step looks at three consecutive frames. Chains `(i, j, k)` through
//! the probability tree extend the track that owns blob `j`; whatever the
//! tree leaves unmatched falls back to pair-level greedy matching, then to
//! reclaiming recently lost tracks, and finally spawns new tracks.

mod matrix;
mod tree;

pub use matrix::{build_feature_matrix, FeatureMatrix, Link, PossibilityMatrix};
pub use tree::{build_probability_tree, Edge, Leaf, Match, ProbabilityTree};

use std::fmt::Write as _;
use std::io;

use crate::detection::Blob;
use crate::features::{centroid_distance, FeatureConfig, Observation, OutOfBounds};
use crate::frames::Frame;

pub const DEFAULT_OCCLUSION_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub features: FeatureConfig,
    /// Frames a track may stay unmatched before it is terminated.
    pub occlusion_limit: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            occlusion_limit: DEFAULT_OCCLUSION_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Active,
    /// Unmatched for `age` consecutive frames.
    Lost {
        age: usize,
    },
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u32,
    pub samples: Vec<Sample>,
    pub status: TrackStatus,
    /// Prior of the blob this track last occupied.
    pub prior: f64,
}

impl Track {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("tracks are born with a sample")
    }
}

/// One row of the NTYX table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtyxRecord {
    pub n: u32,
    pub t: usize,
    pub y: f64,
    pub x: f64,
}

/// Observations of one frame and the track index owning each of them.
#[derive(Debug, Clone)]
struct FrameSlot {
    observations: Vec<Observation>,
    owners: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    tracks: Vec<Track>,
    next_id: u32,
    /// Up to the two most recent frames, oldest first.
    history: Vec<FrameSlot>,
    /// Link between the two frames in `history`, reused as the lower link
    /// of the next step.
    last_link: Option<Link>,
    /// Priors of the older frame in `history`, i.e. the next step's roots.
    root_priors: Vec<f64>,
    /// The most recent probability tree, kept for inspection.
    last_tree: Option<ProbabilityTree>,
    frames_seen: usize,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Self {
        Self {
            config,
            tracks: Vec::new(),
            next_id: 1,
            history: Vec::new(),
            last_link: None,
            root_priors: Vec::new(),
            last_tree: None,
            frames_seen: 0,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn last_tree(&self) -> Option<&ProbabilityTree> {
        self.last_tree.as_ref()
    }

    /// Track ids owning the blobs of the most recent frame, in blob order.
    pub fn current_owners(&self) -> Vec<u32> {
        self.history
            .last()
            .map(|slot| slot.owners.iter().map(|&o| self.tracks[o].id).collect())
            .unwrap_or_default()
    }

    /// Feed the blobs detected in the next frame.
    pub fn step_blobs(&mut self, frame: &Frame, blobs: &[Blob]) -> Result<(), OutOfBounds> {
        let observations = blobs
            .iter()
            .map(|b| Observation::from_blob(frame, b))
            .collect::<Result<Vec<_>, _>>()?;
        self.step(&observations);
        Ok(())
    }

    /// Advance by one frame. Frames are numbered by call order from 0.
    pub fn step(&mut self, observations: &[Observation]) {
        let t = self.frames_seen;
        self.frames_seen += 1;
        let cfg = self.config.features.clone();
        let n = observations.len();
        let mut owners: Vec<Option<usize>> = vec![None; n];
        let mut extended = vec![false; self.tracks.len()];

        let link = self
            .history
            .last()
            .map(|prev| Link::build(&prev.observations, observations, &cfg));

        if let (Some(high), Some(low), [older, newer]) =
            (&link, &self.last_link, self.history.as_slice())
        {
            let mut tree = build_probability_tree(
                &older.observations,
                &newer.observations,
                observations,
                low,
                high,
                &cfg,
            );
            tree.compute_posteriors(&self.root_priors);
            for m in tree.assign() {
                let track = newer.owners[m.child];
                owners[m.leaf] = Some(track);
                extended[track] = true;
            }
            let priors = tree.update_priors();
            for (&owner, &p) in newer.owners.iter().zip(&priors) {
                self.tracks[owner].prior = p;
            }
            self.root_priors = priors;
            self.last_tree = Some(tree);
        }

        // pair-level matching for chains the tree could not form (always the
        // case on the second frame)
        if let (Some(high), Some(prev)) = (&link, self.history.last()) {
            let mut candidates = Vec::new();
            for (j, &track) in prev.owners.iter().enumerate() {
                if extended[track] {
                    continue;
                }
                for (k, owner) in owners.iter().enumerate() {
                    if owner.is_none() && high.possible.get(k, j) {
                        candidates.push((high.features.score(k, j, &cfg), j, k));
                    }
                }
            }
            candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            for (_, j, k) in candidates {
                let track = prev.owners[j];
                if extended[track] || owners[k].is_some() {
                    continue;
                }
                owners[k] = Some(track);
                extended[track] = true;
            }
        }

        // reclaim lost tracks near their last sighting
        let mut reclaim = Vec::new();
        for (ti, track) in self.tracks.iter().enumerate() {
            if !matches!(track.status, TrackStatus::Lost { .. }) {
                continue;
            }
            let last = track.last();
            for (k, obs) in observations.iter().enumerate() {
                if owners[k].is_some() {
                    continue;
                }
                let d = centroid_distance((last.x, last.y), obs.centroid);
                if d <= cfg.caps.distance {
                    reclaim.push((d, track.id, ti, k));
                }
            }
        }
        reclaim.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.3).cmp(&(b.1, b.3))));
        for (_, _, ti, k) in reclaim {
            if extended[ti] || owners[k].is_some() {
                continue;
            }
            owners[k] = Some(ti);
            extended[ti] = true;
        }

        let default_prior = self.newborn_prior();
        let owners: Vec<usize> = owners
            .into_iter()
            .map(|owner| {
                owner.unwrap_or_else(|| {
                    self.tracks.push(Track {
                        id: self.next_id,
                        samples: Vec::new(),
                        status: TrackStatus::Active,
                        prior: default_prior,
                    });
                    self.next_id += 1;
                    extended.push(true);
                    self.tracks.len() - 1
                })
            })
            .collect();

        for (k, &ti) in owners.iter().enumerate() {
            let (x, y) = observations[k].centroid;
            let track = &mut self.tracks[ti];
            track.samples.push(Sample { t, x, y });
            track.status = TrackStatus::Active;
        }
        for (ti, track) in self.tracks.iter_mut().enumerate() {
            if extended[ti] {
                continue;
            }
            track.status = match track.status {
                TrackStatus::Active => TrackStatus::Lost { age: 1 },
                TrackStatus::Lost { age } => TrackStatus::Lost { age: age + 1 },
                TrackStatus::Terminated => TrackStatus::Terminated,
            };
            if let TrackStatus::Lost { age } = track.status {
                if age > self.config.occlusion_limit {
                    track.status = TrackStatus::Terminated;
                }
            }
        }

        if self.history.is_empty() {
            self.root_priors = vec![1.0 / n.max(1) as f64; n];
            for &ti in &owners {
                self.tracks[ti].prior = 1.0 / n.max(1) as f64;
            }
        }
        self.history.push(FrameSlot {
            observations: observations.to_vec(),
            owners,
        });
        if self.history.len() > 2 {
            self.history.remove(0);
        }
        self.last_link = link;
    }

    fn newborn_prior(&self) -> f64 {
        self.tracks
            .iter()
            .filter(|t| t.status == TrackStatus::Active && t.prior > 0.0)
            .map(|t| t.prior)
            .fold(None, |m: Option<f64>, p| Some(m.map_or(p, |m| m.min(p))))
            .unwrap_or(1.0)
    }

    /// One record per sample, sorted by id then time.
    pub fn export_ntyx(&self) -> Vec<NtyxRecord> {
        let mut tracks: Vec<&Track> = self.tracks.iter().collect();
        tracks.sort_by_key(|t| t.id);
        tracks
            .into_iter()
            .flat_map(|track| {
                track.samples.iter().map(move |s| NtyxRecord {
                    n: track.id,
                    t: s.t,
                    y: s.y,
                    x: s.x,
                })
            })
            .collect()
    }
}

/// Render records as `N,T,Y,X` CSV with two-decimal coordinates.
pub fn ntyx_to_csv(records: &[NtyxRecord]) -> String {
    let mut out = String::from("N,T,Y,X\n");
    for r in records {
        let _ = writeln!(out, "{},{},{:.2},{:.2}", r.n, r.t, r.y, r.x);
    }
    out
}

pub fn write_ntyx<W: io::Write>(records: &[NtyxRecord], mut w: W) -> io::Result<()> {
    w.write_all(ntyx_to_csv(records).as_bytes())?;
    w.flush()
}

/// Parse an `N,T,Y,X` table back into records.
pub fn parse_ntyx(text: &str) -> Result<Vec<NtyxRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("N,T,Y,X") => {}
        other => return Err(format!("bad NTYX header {other:?}")),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(no, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || format!("line {}: malformed record `{line}`", no + 2);
            if f.len() != 4 {
                return Err(bad());
            }
            Ok(NtyxRecord {
                n: f[0].parse().map_err(|_| bad())?,
                t: f[1].parse().map_err(|_| bad())?,
                y: f[2].parse().map_err(|_| bad())?,
                x: f[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
