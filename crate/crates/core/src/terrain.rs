//! Procedural terrain: obstacle-segment planning, heightfield rasterization,
//! and the non-uniform egocentric heightmap observation grid.
//!
//! Flat terrain is a single zero-height segment. Variable terrain alternates
//! flat stretches with hills, steps, or rubble along +x, profile constant
//! along y. Planning fixes lengths first (adjusting only the trailing
//! segments inside their legal ranges so the tiling is exact), then samples
//! obstacle parameters, so every emitted segment satisfies its range.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::rng::Stream;

/// Evolution environment, which fixes the arena footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Env {
    Ft,
    Vt,
    Mvt,
}

impl Env {
    pub const ALL: [Env; 3] = [Env::Ft, Env::Vt, Env::Mvt];

    /// Arena size (x, y) in meters.
    pub fn arena(self) -> (f64, f64) {
        match self {
            Env::Ft => (150.0, 150.0),
            Env::Vt => (100.0, 100.0),
            Env::Mvt => (60.0, 40.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Env::Ft => "ft",
            Env::Vt => "vt",
            Env::Mvt => "mvt",
        }
    }
}

impl core::fmt::Display for Env {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Default rasterization resolution (m per cell); resolves the 0.2 m step
/// features with two cells.
pub const DEFAULT_RESOLUTION: f64 = 0.1;

/// Flat stretch length range (m).
pub const FLAT_RANGE: (f64, f64) = (1.0, 3.0);
/// Obstacle length range (m).
pub const OBSTACLE_RANGE: (f64, f64) = (4.0, 8.0);
/// Hill sine-wave amplitude range (m).
pub const HILL_AMPLITUDE_RANGE: (f64, f64) = (0.6, 1.2);
/// Step riser height (m); eight steps, four up then four down.
pub const STEP_HEIGHT: f64 = 0.2;
/// Rubble bump clip-height range (m).
pub const RUBBLE_CLIP_RANGE: (f64, f64) = (0.2, 0.3);
/// Rubble sawtooth period before clipping (m).
pub const RUBBLE_PERIOD: f64 = 0.6;
/// Unclipped rubble sawtooth peak (m); above the clip range so every bump
/// is actually truncated.
const RUBBLE_PEAK: f64 = 0.4;

/// Plateau heights of the eight-step profile (m): four risers up, four
/// down, ending level with the next flat segment.
fn step_level(index: usize) -> f64 {
    let k = if index < 4 { index + 1 } else { 7 - index };
    k as f64 * STEP_HEIGHT
}

/// One terrain segment along +x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SegmentKind {
    Flat,
    Hills { amplitude: f64 },
    Steps,
    Rubble { clips: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSegment {
    #[serde(flatten)]
    pub kind: SegmentKind,
    pub length: f64,
}

impl ObstacleSegment {
    /// Profile height at offset `u` in `[0, length)` from the segment start.
    pub fn height_at(&self, u: f64) -> f64 {
        match &self.kind {
            SegmentKind::Flat => 0.0,
            // One full sine wave across the segment, zero at both ends.
            SegmentKind::Hills { amplitude } => {
                amplitude * libm::sin(core::f64::consts::TAU * u / self.length)
            }
            SegmentKind::Steps => {
                let idx = ((u / self.length) * 8.0) as usize;
                step_level(idx.min(7))
            }
            SegmentKind::Rubble { clips } => {
                let bump = (u / RUBBLE_PERIOD) as usize;
                let w = u - bump as f64 * RUBBLE_PERIOD;
                let tri = RUBBLE_PEAK * (1.0 - (w - RUBBLE_PERIOD / 2.0).abs() / (RUBBLE_PERIOD / 2.0));
                let clip = clips.get(bump).copied().unwrap_or(RUBBLE_CLIP_RANGE.0);
                tri.min(clip).max(0.0)
            }
        }
    }
}

/// Generation spec: environment plus seed; resolution is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerrainSpec {
    pub env: Env,
    pub seed: u64,
    pub resolution: f64,
}

impl TerrainSpec {
    pub fn new(env: Env, seed: u64) -> Self {
        TerrainSpec {
            env,
            seed,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

/// Rasterized terrain elevation grid over the arena, row-major `[iy][ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heightfield {
    pub resolution: f64,
    pub x_len: f64,
    pub y_len: f64,
    pub nx: usize,
    pub ny: usize,
    pub heights: Vec<f64>,
}

impl Heightfield {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.heights[iy * self.nx + ix]
    }

    /// Bilinear height lookup; queries outside the arena clamp to the edge.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let gx = (x / self.resolution).clamp(0.0, (self.nx - 1) as f64);
        let gy = (y / self.resolution).clamp(0.0, (self.ny - 1) as f64);
        let x0 = gx as usize;
        let y0 = gy as usize;
        let x1 = (x0 + 1).min(self.nx - 1);
        let y1 = (y0 + 1).min(self.ny - 1);
        let fx = gx - x0 as f64;
        let fy = gy - y0 as f64;
        let h00 = self.at(x0, y0);
        let h10 = self.at(x1, y0);
        let h01 = self.at(x0, y1);
        let h11 = self.at(x1, y1);
        (1.0 - fy) * ((1.0 - fx) * h00 + fx * h10) + fy * ((1.0 - fx) * h01 + fx * h11)
    }
}

/// Backwards-compatible free-function form of [`Heightfield::sample`].
pub fn sample_height(hf: &Heightfield, x: f64, y: f64) -> f64 {
    hf.sample(x, y)
}

// Length-only plan entry; obstacle kinds and parameters are sampled after
// the tiling is final.
#[derive(Clone, Copy)]
enum Planned {
    Flat(f64),
    Obstacle(f64),
}

/// Plans segment lengths so they tile `[0, arena_x]` exactly: alternating
/// flat/obstacle starting and ending on flat, every flat in [1,3] and every
/// obstacle in [4,8]. Only the trailing flat/obstacle lengths are adjusted
/// (within range) to close the tiling.
fn plan_lengths(arena_x: f64, rng: &mut Stream) -> Vec<Planned> {
    let (flo, fhi) = FLAT_RANGE;
    let (olo, ohi) = OBSTACLE_RANGE;
    // Worst-case tail: one obstacle plus one flat.
    let tail = ohi + fhi;
    if arena_x < olo + 2.0 * flo {
        // Too small for any obstacle course.
        return vec![Planned::Flat(arena_x)];
    }
    let mut plan: Vec<Planned> = Vec::new();
    let mut cum = 0.0;
    let f0 = rng.next_range(flo, fhi);
    plan.push(Planned::Flat(f0));
    cum += f0;
    while arena_x - cum > tail {
        let o = rng.next_range(olo, ohi);
        plan.push(Planned::Obstacle(o));
        cum += o;
        let f = rng.next_range(flo, fhi);
        plan.push(Planned::Flat(f));
        cum += f;
    }
    let mut rem = arena_x - cum;
    let min_append = olo + flo;
    if rem > 0.0 && rem < min_append {
        // Close the gap inside the trailing segments' ranges: absorb the
        // remainder if they have capacity, otherwise shrink them so the
        // remainder grows into the appendable window.
        let n = plan.len();
        if n >= 3 {
            let (f_last, o_last) = match (plan[n - 1], plan[n - 2]) {
                (Planned::Flat(f), Planned::Obstacle(o)) => (f, o),
                _ => unreachable!("plan alternates and ends on flat"),
            };
            let absorb_cap = (fhi - f_last) + (ohi - o_last);
            if rem <= absorb_cap {
                let into_flat = rem.min(fhi - f_last);
                plan[n - 1] = Planned::Flat(f_last + into_flat);
                plan[n - 2] = Planned::Obstacle(o_last + (rem - into_flat));
                rem = 0.0;
            } else {
                plan[n - 1] = Planned::Flat(flo);
                plan[n - 2] = Planned::Obstacle(olo);
                rem += (f_last - flo) + (o_last - olo);
            }
        } else {
            // Single flat so far: stretch or shrink it within range.
            let f0 = match plan[0] {
                Planned::Flat(f) => f,
                Planned::Obstacle(_) => unreachable!(),
            };
            if rem <= fhi - f0 {
                plan[0] = Planned::Flat(f0 + rem);
                rem = 0.0;
            } else {
                plan[0] = Planned::Flat(flo);
                rem += f0 - flo;
            }
        }
    }
    if rem > 0.0 {
        // rem is now in [olo + flo, ohi + fhi]: solvable exactly.
        let o = rng.next_range((rem - fhi).max(olo), (rem - flo).min(ohi));
        plan.push(Planned::Obstacle(o));
        plan.push(Planned::Flat(rem - o));
    }
    plan
}

fn sample_obstacle(length: f64, rng: &mut Stream) -> ObstacleSegment {
    let kind = match rng.next_below(3) {
        0 => SegmentKind::Hills {
            amplitude: rng.next_range(HILL_AMPLITUDE_RANGE.0, HILL_AMPLITUDE_RANGE.1),
        },
        1 => SegmentKind::Steps,
        _ => {
            let bumps = libm::ceil(length / RUBBLE_PERIOD) as usize;
            let clips = (0..bumps)
                .map(|_| rng.next_range(RUBBLE_CLIP_RANGE.0, RUBBLE_CLIP_RANGE.1))
                .collect();
            SegmentKind::Rubble { clips }
        }
    };
    ObstacleSegment { kind, length }
}

/// Generates the segment sequence and rasterizes it. Flat terrain yields a
/// single zero-height segment covering the arena; variable terrains tile
/// the arena exactly with alternating flat and obstacle segments.
pub fn generate(env: Env, resolution: f64, rng: &mut Stream) -> (Vec<ObstacleSegment>, Heightfield) {
    let (x_len, y_len) = env.arena();
    generate_arena(env, x_len, y_len, resolution, rng)
}

/// Generation over an explicit arena footprint (configs may override the
/// standard sizes).
pub fn generate_arena(
    env: Env,
    x_len: f64,
    y_len: f64,
    resolution: f64,
    rng: &mut Stream,
) -> (Vec<ObstacleSegment>, Heightfield) {
    let segments: Vec<ObstacleSegment> = match env {
        Env::Ft => vec![ObstacleSegment {
            kind: SegmentKind::Flat,
            length: x_len,
        }],
        Env::Vt | Env::Mvt => {
            let plan = plan_lengths(x_len, rng);
            plan.into_iter()
                .map(|p| match p {
                    Planned::Flat(length) => ObstacleSegment {
                        kind: SegmentKind::Flat,
                        length,
                    },
                    Planned::Obstacle(length) => sample_obstacle(length, rng),
                })
                .collect()
        }
    };
    let hf = rasterize(&segments, x_len, y_len, resolution);
    (segments, hf)
}

/// Convenience wrapper deriving the stream from the seed in the spec struct.
pub fn generate_spec(spec: &TerrainSpec) -> (Vec<ObstacleSegment>, Heightfield) {
    let mut rng = Stream::derive(spec.seed, "terrain", spec.env as u64);
    generate(spec.env, spec.resolution, &mut rng)
}

/// Profile height at absolute x, walking the segment sequence.
pub fn profile_height(segments: &[ObstacleSegment], x: f64) -> f64 {
    let mut start = 0.0;
    for seg in segments {
        let end = start + seg.length;
        if x < end || core::ptr::eq(seg, segments.last().unwrap()) {
            return seg.height_at((x - start).clamp(0.0, seg.length));
        }
        start = end;
    }
    0.0
}

fn rasterize(segments: &[ObstacleSegment], x_len: f64, y_len: f64, resolution: f64) -> Heightfield {
    let nx = libm::round(x_len / resolution) as usize + 1;
    let ny = libm::round(y_len / resolution) as usize + 1;
    let mut row = Vec::with_capacity(nx);
    for ix in 0..nx {
        let x = (ix as f64 * resolution).min(x_len);
        row.push(profile_height(segments, x));
    }
    let mut heights = Vec::with_capacity(nx * ny);
    for _ in 0..ny {
        heights.extend_from_slice(&row);
    }
    Heightfield {
        resolution,
        x_len,
        y_len,
        nx,
        ny,
        heights,
    }
}

/// Along-track sample offsets (m): 1 m behind to 4 m ahead, densest at the
/// root.
pub const OBS_ALONG: [f64; 11] = [
    -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 1.5, 2.25, 3.0, 4.0,
];
/// Cross-track sample offsets (m), measured toward the agent's right.
pub const OBS_CROSS: [f64; 9] = [-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0];

/// Egocentric heightmap observation: terrain heights on the non-uniform
/// grid rotated into the heading frame, each relative to the ground height
/// under the root. Row-major, back-to-front rows, left-to-right within a
/// row; fixed length `OBS_ALONG.len() * OBS_CROSS.len()`.
pub fn heightmap_observation(
    hf: &Heightfield,
    agent_x: f64,
    agent_y: f64,
    heading_rad: f64,
) -> Vec<f64> {
    let (cos_h, sin_h) = (libm::cos(heading_rad), libm::sin(heading_rad));
    let under_root = hf.sample(agent_x, agent_y);
    let mut out = Vec::with_capacity(OBS_ALONG.len() * OBS_CROSS.len());
    for &a in &OBS_ALONG {
        for &c in &OBS_CROSS {
            // forward = (cos, sin); right = (sin, -cos).
            let x = agent_x + a * cos_h + c * sin_h;
            let y = agent_y + a * sin_h - c * cos_h;
            out.push(hf.sample(x, y) - under_root);
        }
    }
    out
}
