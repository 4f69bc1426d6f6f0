//! Synthetic scenes with known trajectories, and scoring of tracker output
//! against them.
//!
//! Actors are filled discs (the hat seen from above) moving linearly between
//! waypoints. An actor exists from its first to its last waypoint frame.
//! Discs are painted in increasing id order, so later ids cover earlier ones.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::frames::{Frame, Rgb};
use crate::tracker::NtyxRecord;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("frame {t} outside scene of {num_frames} frames")]
    FrameOutOfRange { t: usize, num_frames: usize },
    #[error("invalid scene: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub id: u32,
    pub waypoints: Vec<Waypoint>,
    pub radius: f64,
    pub color: Rgb,
}

impl Actor {
    /// Interpolated position at frame `t`, or `None` outside the actor's
    /// scripted lifetime.
    pub fn position(&self, t: usize) -> Option<(f64, f64)> {
        let first = self.waypoints.first()?;
        let last = self.waypoints.last()?;
        if t < first.frame || t > last.frame {
            return None;
        }
        let seg = self.waypoints.windows(2).find(|w| t <= w[1].frame);
        match seg {
            None => Some((first.x, first.y)),
            Some(w) => {
                let (a, b) = (w[0], w[1]);
                let s = (t - a.frame) as f64 / (b.frame - a.frame) as f64;
                Some((a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)))
            }
        }
    }
}

pub const DEFAULT_VISIBILITY_COVER: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneScript {
    pub width: usize,
    pub height: usize,
    pub num_frames: usize,
    pub actors: Vec<Actor>,
    pub background: Rgb,
    /// Per-channel uniform noise in `[-amplitude, amplitude]`.
    pub noise_amplitude: u8,
    pub seed: u64,
    /// Covered fraction at which an actor counts as occluded.
    pub visibility_cover: f64,
}

impl SceneScript {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        if self.width == 0 || self.height == 0 || self.num_frames == 0 {
            return bad("width, height and num_frames must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.visibility_cover) {
            return bad(format!(
                "visibility cover {} outside [0, 1]",
                self.visibility_cover
            ));
        }
        let mut ids: Vec<u32> = self.actors.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate actor id".into());
        }
        for a in &self.actors {
            if a.waypoints.is_empty() {
                return bad(format!("actor {} has no waypoints", a.id));
            }
            if !(a.radius > 0.0) {
                return bad(format!("actor {} radius must be positive", a.id));
            }
            if a.waypoints.windows(2).any(|w| w[0].frame >= w[1].frame) {
                return bad(format!("actor {} waypoints must increase in frame", a.id));
            }
            for w in &a.waypoints {
                if w.x < 0.0 || w.y < 0.0 || w.x >= self.width as f64 || w.y >= self.height as f64 {
                    return bad(format!(
                        "actor {} waypoint ({}, {}) out of bounds",
                        a.id, w.x, w.y
                    ));
                }
            }
        }
        Ok(())
    }

    fn actors_in_paint_order(&self) -> Vec<&Actor> {
        let mut actors: Vec<&Actor> = self.actors.iter().collect();
        actors.sort_by_key(|a| a.id);
        actors
    }
}

/// True position of one actor in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthEntry {
    pub actor: u32,
    pub t: usize,
    pub x: f64,
    pub y: f64,
    pub visible: bool,
}

pub type GroundTruth = Vec<TruthEntry>;

/// Render frame `t` and the truth for every actor present in it.
pub fn render(script: &SceneScript, t: usize) -> Result<(Frame, Vec<TruthEntry>), SynthError> {
    if t >= script.num_frames {
        return Err(SynthError::FrameOutOfRange {
            t,
            num_frames: script.num_frames,
        });
    }
    let (w, h) = (script.width, script.height);
    let mut frame =
        Frame::filled(w, h, script.background).map_err(|e| SynthError::Invalid(e.to_string()))?;
    let mut owner: Vec<Option<usize>> = vec![None; w * h];
    let actors = script.actors_in_paint_order();
    let mut painted = vec![0usize; actors.len()];
    let mut present = Vec::new();

    for (n, actor) in actors.iter().enumerate() {
        let Some((cx, cy)) = actor.position(t) else {
            continue;
        };
        present.push((n, cx, cy));
        let r = actor.radius;
        let x0 = (cx - r).floor().max(0.0) as usize;
        let y0 = (cy - r).floor().max(0.0) as usize;
        let x1 = ((cx + r).ceil() as usize).min(w - 1);
        let y1 = ((cy + r).ceil() as usize).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy <= r * r {
                    frame.set(x, y, actor.color);
                    owner[y * w + x] = Some(n);
                    painted[n] += 1;
                }
            }
        }
    }

    let mut visible_px = vec![0usize; actors.len()];
    for n in owner.iter().flatten() {
        visible_px[*n] += 1;
    }

    if script.noise_amplitude > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(
            script.seed ^ (t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let a = i16::from(script.noise_amplitude);
        for px in frame.pixels_mut() {
            for c in px.iter_mut() {
                let v = i16::from(*c) + rng.gen_range(-a..=a);
                *c = v.clamp(0, 255) as u8;
            }
        }
    }

    let truth = present
        .into_iter()
        .map(|(n, x, y)| {
            let covered = if painted[n] == 0 {
                1.0
            } else {
                1.0 - visible_px[n] as f64 / painted[n] as f64
            };
            TruthEntry {
                actor: actors[n].id,
                t,
                x,
                y,
                visible: covered < script.visibility_cover,
            }
        })
        .collect();
    Ok((frame, truth))
}

/// Truth for the whole scene without keeping the frames.
pub fn ground_truth(script: &SceneScript) -> Result<GroundTruth, SynthError> {
    let mut all = Vec::new();
    for t in 0..script.num_frames {
        all.extend(render(script, t)?.1);
    }
    Ok(all)
}

pub fn truth_to_csv(truth: &[TruthEntry]) -> String {
    let mut out = String::from("actor,T,Y,X,visible\n");
    for e in truth {
        let _ = writeln!(
            out,
            "{},{},{:.2},{:.2},{}",
            e.actor,
            e.t,
            e.y,
            e.x,
            u8::from(e.visible)
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport {
    /// Correct position matches over visible truth entries.
    pub accuracy: f64,
    pub matched: usize,
    pub visible: usize,
    /// Times an actor's matched pedestrian id differs from its previous one.
    pub id_switches: usize,
}

/// Per frame, greedily pair track samples with visible truth positions
/// (closest first, at most `match_radius` apart).
pub fn score(records: &[NtyxRecord], truth: &[TruthEntry], match_radius: f64) -> ScoreReport {
    let max_t = truth
        .iter()
        .map(|e| e.t)
        .chain(records.iter().map(|r| r.t))
        .max()
        .map_or(0, |m| m + 1);
    let mut truth_by_t: Vec<Vec<&TruthEntry>> = vec![Vec::new(); max_t];
    for e in truth.iter().filter(|e| e.visible) {
        truth_by_t[e.t].push(e);
    }
    let mut recs_by_t: Vec<Vec<&NtyxRecord>> = vec![Vec::new(); max_t];
    for r in records {
        recs_by_t[r.t].push(r);
    }

    let mut last_id: std::collections::BTreeMap<u32, u32> = Default::default();
    let (mut matched, mut visible, mut id_switches) = (0, 0, 0);
    for (truths, recs) in truth_by_t.iter().zip(&recs_by_t) {
        visible += truths.len();
        let mut pairs = Vec::new();
        for (a, e) in truths.iter().enumerate() {
            for (b, r) in recs.iter().enumerate() {
                let d = (e.x - r.x).hypot(e.y - r.y);
                if d <= match_radius {
                    pairs.push((d, e.actor, r.n, a, b));
                }
            }
        }
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then((p.1, p.2).cmp(&(q.1, q.2))));
        let mut used_truth = vec![false; truths.len()];
        let mut used_rec = vec![false; recs.len()];
        for (_, actor, n, a, b) in pairs {
            if used_truth[a] || used_rec[b] {
                continue;
            }
            used_truth[a] = true;
            used_rec[b] = true;
            matched += 1;
            if let Some(prev) = last_id.insert(actor, n) {
                if prev != n {
                    id_switches += 1;
                }
            }
        }
    }
    ScoreReport {
        accuracy: if visible == 0 {
            0.0
        } else {
            matched as f64 / visible as f64
        },
        matched,
        visible,
        id_switches,
    }
}

/// Truth entries converted to NTYX records, using actor ids as pedestrian
/// numbers. Handy as a perfect tracker.
pub fn truth_as_records(truth: &[TruthEntry]) -> Vec<NtyxRecord> {
    truth
        .iter()
        .filter(|e| e.visible)
        .map(|e| NtyxRecord {
            n: e.actor,
            t: e.t,
            y: e.y,
            x: e.x,
        })
        .collect()
}

fn segments_cross(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Number of actor pairs whose paths intersect in the image plane.
pub fn count_path_crossings(script: &SceneScript) -> usize {
    let paths: Vec<Vec<(f64, f64)>> = script
        .actors
        .iter()
        .map(|a| a.waypoints.iter().map(|w| (w.x, w.y)).collect())
        .collect();
    let mut count = 0;
    for a in 0..paths.len() {
        for b in a + 1..paths.len() {
            let crosses = paths[a].windows(2).any(|s| {
                paths[b]
                    .windows(2)
                    .any(|u| segments_cross(s[0], s[1], u[0], u[1]))
            });
            count += usize::from(crosses);
        }
    }
    count
}

/// Smallest centre distance between two actors over the frames both exist.
pub fn closest_approach(script: &SceneScript, a: u32, b: u32) -> Option<f64> {
    let find = |id| script.actors.iter().find(|x| x.id == id);
    let (a, b) = (find(a)?, find(b)?);
    (0..script.num_frames)
        .filter_map(|t| {
            let (p, q) = (a.position(t)?, b.position(t)?);
            Some((p.0 - q.0).hypot(p.1 - q.1))
        })
        .min_by(f64::total_cmp)
}

fn wp(frame: usize, x: f64, y: f64) -> Waypoint {
    Waypoint { frame, x, y }
}

const HAT_COLORS: [Rgb; 4] = [[210, 30, 35], [225, 45, 40], [195, 25, 50], [235, 40, 30]];

/// A single red-hatted walker crossing the frame.
pub fn single_actor_scene(seed: u64) -> SceneScript {
    SceneScript {
        width: 160,
        height: 120,
        num_frames: 40,
        actors: vec![Actor {
            id: 1,
            waypoints: vec![wp(0, 20.0, 30.0), wp(39, 140.0, 90.0)],
            radius: 6.0,
            color: HAT_COLORS[0],
        }],
        background: [30, 30, 35],
        noise_amplitude: 0,
        seed,
        visibility_cover: DEFAULT_VISIBILITY_COVER,
    }
}

/// Twelve walkers on a 320×240 plaza: six cross it horizontally and six
/// vertically, so every horizontal path crosses every vertical one. Entry
/// and exit frames are staggered so that walkers never come closer than
/// 24 px center to center.
pub fn crowded_scene(seed: u64) -> SceneScript {
    // (entry frame, exit frame) per actor id 1..=12
    const TIMING: [(usize, usize); 12] = [
        (49, 185),
        (14, 174),
        (1, 153),
        (32, 153),
        (27, 140),
        (58, 142),
        (21, 178),
        (59, 140),
        (9, 194),
        (58, 161),
        (51, 160),
        (26, 144),
    ];
    plaza_scene(seed, &TIMING)
}

/// The plaza walkers all moving for the whole clip. Many pairs collide and
/// merge into one blob, which costs identities; kept to show that failure
/// mode.
pub fn congested_scene(seed: u64) -> SceneScript {
    plaza_scene(seed, &[(0, 199); 12])
}

fn plaza_scene(seed: u64, timing: &[(usize, usize); 12]) -> SceneScript {
    let frames = 200;
    let mut actors = Vec::new();
    let horizontal: [(f64, f64, f64); 6] = [
        // (start x, y, end x)
        (10.0, 30.0, 300.0),
        (310.0, 70.0, 20.0),
        (15.0, 110.0, 305.0),
        (305.0, 150.0, 15.0),
        (10.0, 190.0, 300.0),
        (300.0, 220.0, 30.0),
    ];
    for (n, &(x0, y, x1)) in horizontal.iter().enumerate() {
        actors.push(Actor {
            id: n as u32 + 1,
            waypoints: vec![
                wp(timing[n].0, x0, y),
                wp(timing[n].1, x1, y + if n % 2 == 0 { 6.0 } else { -6.0 }),
            ],
            radius: 6.0,
            color: HAT_COLORS[n % 4],
        });
    }
    let vertical: [(f64, f64, f64); 6] = [
        // (x, start y, end y)
        (40.0, 10.0, 230.0),
        (90.0, 230.0, 15.0),
        (140.0, 12.0, 228.0),
        (190.0, 228.0, 12.0),
        (240.0, 15.0, 225.0),
        (285.0, 225.0, 10.0),
    ];
    for (n, &(x, y0, y1)) in vertical.iter().enumerate() {
        actors.push(Actor {
            id: n as u32 + 7,
            waypoints: vec![
                wp(timing[n + 6].0, x, y0),
                wp(timing[n + 6].1, x + if n % 2 == 0 { 8.0 } else { -8.0 }, y1),
            ],
            radius: 6.0,
            color: HAT_COLORS[(n + 2) % 4],
        });
    }
    SceneScript {
        width: 320,
        height: 240,
        num_frames: frames,
        actors,
        background: [30, 30, 35],
        noise_amplitude: 10,
        seed,
        visibility_cover: DEFAULT_VISIBILITY_COVER,
    }
}

/// Two walkers; the first is hidden for exactly ten frames under a dark,
/// hatless pedestrian who walks on top of it and then leaves.
pub fn occlusion_scene(seed: u64) -> SceneScript {
    // walker: (20, 60) → (140, 60) over frames 0..=59, 2 px per frame
    let walker = Actor {
        id: 1,
        waypoints: vec![wp(0, 20.0, 60.0), wp(60, 140.0, 60.0)],
        radius: 6.0,
        color: HAT_COLORS[0],
    };
    // occluder: sweeps in fast, sits concentric over frames 25..=34, sweeps out
    let on = |t: usize| 20.0 + 2.0 * t as f64;
    let occluder = Actor {
        id: 2,
        waypoints: vec![
            wp(0, on(25) - 40.0, 5.0),
            wp(24, on(24) - 30.0, 60.0 - 30.0),
            wp(25, on(25), 60.0),
            wp(34, on(34), 60.0),
            wp(35, on(35) + 30.0, 90.0),
            wp(60, 155.0, 115.0),
        ],
        radius: 14.0,
        color: [40, 42, 45],
    };
    SceneScript {
        width: 160,
        height: 120,
        num_frames: 61,
        actors: vec![walker, occluder],
        background: [30, 30, 35],
        noise_amplitude: 5,
        seed,
        visibility_cover: DEFAULT_VISIBILITY_COVER,
    }
}

/// Three well separated walkers entering a learned, empty scene.
pub fn sparse_scene(seed: u64) -> SceneScript {
    let start = 20;
    let end = 119;
    SceneScript {
        width: 240,
        height: 180,
        num_frames: 120,
        actors: vec![
            Actor {
                id: 1,
                waypoints: vec![wp(start, 15.0, 30.0), wp(end, 225.0, 45.0)],
                radius: 6.0,
                color: [220, 60, 50],
            },
            Actor {
                id: 2,
                waypoints: vec![wp(start, 220.0, 90.0), wp(end, 20.0, 95.0)],
                radius: 6.0,
                color: [200, 200, 60],
            },
            Actor {
                id: 3,
                waypoints: vec![wp(start, 30.0, 160.0), wp(end, 210.0, 140.0)],
                radius: 6.0,
                color: [60, 90, 220],
            },
        ],
        background: [40, 40, 40],
        noise_amplitude: 6,
        seed,
        visibility_cover: DEFAULT_VISIBILITY_COVER,
    }
}
