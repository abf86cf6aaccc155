//! Analytic geometry for capsule-limbed bodies: world-pose resolution,
//! self-intersection, mass properties, support-polygon stability, and
//! morphological descriptors.
//!
//! All predicates evaluate the rest pose: limbs extend along their sampled
//! direction with zero joint rotation, head centered at the origin. Azimuth
//! and polar angles come from finite degree domains, so their sines and
//! cosines are taken from exact tables; mirrored twins therefore cancel in
//! y to the last bit and the center of mass sits on the sagittal plane
//! exactly.

pub mod hull;
pub mod vec3;

use alloc::vec::Vec;

use crate::morphology::{BodyRef, LimbId, Morphology, Parent, SitePoint};
use hull::P2;
pub use vec3::Vec3;

const SQRT_HALF: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// (cos, sin) of an azimuth from the finite domain, exact for multiples
/// of 45 degrees so that mirrored pairs are bitwise symmetric.
fn theta_cos_sin(theta_deg: u16) -> (f64, f64) {
    match theta_deg {
        0 => (1.0, 0.0),
        45 => (SQRT_HALF, SQRT_HALF),
        90 => (0.0, 1.0),
        135 => (-SQRT_HALF, SQRT_HALF),
        180 => (-1.0, 0.0),
        225 => (-SQRT_HALF, -SQRT_HALF),
        270 => (0.0, -1.0),
        315 => (SQRT_HALF, -SQRT_HALF),
        d => {
            let r = (d as f64).to_radians();
            (libm::cos(r), libm::sin(r))
        }
    }
}

/// (sin, cos) of a polar angle from the finite domain.
fn phi_sin_cos(phi_deg: u16) -> (f64, f64) {
    match phi_deg {
        90 => (1.0, 0.0),
        135 => (SQRT_HALF, -SQRT_HALF),
        180 => (0.0, -1.0),
        d => {
            let r = (d as f64).to_radians();
            (libm::sin(r), libm::cos(r))
        }
    }
}

/// Unit growth direction for (theta, phi). phi >= 90 gives z <= 0, so
/// trees only grow downward.
pub fn direction(theta_deg: u16, phi_deg: u16) -> Vec3 {
    let (ct, st) = theta_cos_sin(theta_deg);
    let (sp, cp) = phi_sin_cos(phi_deg);
    Vec3::new(sp * ct, sp * st, cp)
}

/// A capsule: segment from `p0` to `p1` swept by a sphere of `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub p0: Vec3,
    pub p1: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub fn segment_len(&self) -> f64 {
        self.p0.dist(self.p1)
    }

    /// Lowest z reached by any point of the capsule.
    pub fn min_z(&self) -> f64 {
        self.p0.z.min(self.p1.z) - self.radius
    }
}

/// One limb resolved to world coordinates (head at origin, zero joint
/// angles).
#[derive(Debug, Clone, Copy)]
pub struct ResolvedLimb {
    pub id: LimbId,
    pub capsule: Capsule,
}

/// World-frame rest pose of a morphology.
#[derive(Debug, Clone)]
pub struct RestPose {
    pub head_center: Vec3,
    pub head_radius: f64,
    pub limbs: Vec<ResolvedLimb>,
}

impl RestPose {
    /// Global minimum z over all bodies.
    pub fn min_z(&self) -> f64 {
        let mut low = self.head_center.z - self.head_radius;
        for l in &self.limbs {
            low = low.min(l.capsule.min_z());
        }
        low
    }
}

/// Resolves every limb's capsule. Requires a structurally sound tree
/// (parents stored before children), which `Morphology::validate` checks
/// before invoking any geometric predicate.
pub fn rest_pose(m: &Morphology) -> RestPose {
    let mut limbs: Vec<ResolvedLimb> = Vec::with_capacity(m.limbs.len());
    for limb in &m.limbs {
        let p0 = match limb.parent {
            Parent::Head => Vec3::ZERO,
            Parent::Limb(pid) => {
                let parent = limbs
                    .iter()
                    .find(|r| r.id == pid)
                    .expect("parents precede children in birth order");
                match limb.attachment {
                    SitePoint::Mid => (parent.capsule.p0 + parent.capsule.p1) * 0.5,
                    SitePoint::End => parent.capsule.p1,
                    SitePoint::Center => parent.capsule.p0,
                }
            }
        };
        let dir = direction(limb.params.theta_deg, limb.params.phi_deg);
        let p1 = p0 + dir * limb.params.length;
        limbs.push(ResolvedLimb {
            id: limb.id,
            capsule: Capsule {
                p0,
                p1,
                radius: limb.params.radius,
            },
        });
    }
    RestPose {
        head_center: Vec3::ZERO,
        head_radius: m.head.radius,
        limbs,
    }
}

/// Closest distance between two segments (Ericson, Real-Time Collision
/// Detection 5.1.9).
pub fn segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm2();
    let e = d2.norm2();
    let f = d2.dot(r);
    let eps = 1e-24;

    let (s, t);
    if a <= eps && e <= eps {
        return r.norm();
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s_ = if denom != 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t_ = (b * s_ + f) / e;
            let t_clamped = t_.clamp(0.0, 1.0);
            if t_ != t_clamped {
                s_ = ((t_clamped * b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_clamped;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Signed capsule-capsule distance: segment distance minus the radius sum.
/// Negative means overlap; for identical capsules it equals `-2 * radius`.
/// Arguments are ordered canonically first, so `d(a, b)` and `d(b, a)` are
/// bitwise identical despite the clamping branches in the segment solver.
pub fn capsule_distance(a: &Capsule, b: &Capsule) -> f64 {
    let key = |c: &Capsule| {
        [c.p0.x, c.p0.y, c.p0.z, c.p1.x, c.p1.y, c.p1.z, c.radius]
    };
    let (first, second) = if key(a) <= key(b) { (a, b) } else { (b, a) };
    segment_distance(first.p0, first.p1, second.p0, second.p1) - (a.radius + b.radius)
}

/// Signed sphere-capsule distance.
pub fn sphere_capsule_distance(center: Vec3, radius: f64, c: &Capsule) -> f64 {
    segment_distance(center, center, c.p0, c.p1) - (radius + c.radius)
}

/// Overlap deeper than this is a self-intersection.
const OVERLAP_TOLERANCE: f64 = 1e-6;

/// Capsule with the attachment neighborhood removed: collisions within
/// `2 * radius` of the mount point count as contact at the attachment site
/// and are forgiven. Limb segments are always longer than the trim.
fn trimmed(c: &Capsule) -> Capsule {
    let len = c.segment_len();
    let cut = (2.0 * c.radius).min(len);
    let dir = (c.p1 - c.p0) * (1.0 / len);
    Capsule {
        p0: c.p0 + dir * cut,
        p1: c.p1,
        radius: c.radius,
    }
}

/// All overlapping non-adjacent body pairs at rest pose.
///
/// Parent-child pairs (including head-child) are excluded: they meet at
/// the joint by construction. For every other pair, overlap is measured
/// with each limb's attachment neighborhood trimmed away, so that two
/// limbs sharing a mount point are flagged only when they collide beyond
/// the shared site.
pub fn self_intersects(m: &Morphology) -> Vec<(BodyRef, BodyRef)> {
    let pose = rest_pose(m);
    let mut out = Vec::new();
    let trimmed_caps: Vec<Capsule> = pose.limbs.iter().map(|l| trimmed(&l.capsule)).collect();

    for i in 0..pose.limbs.len() {
        let li = &m.limbs[i];
        for j in (i + 1)..pose.limbs.len() {
            let lj = &m.limbs[j];
            let adjacent = li.parent == Parent::Limb(lj.id) || lj.parent == Parent::Limb(li.id);
            if adjacent {
                continue;
            }
            if capsule_distance(&trimmed_caps[i], &trimmed_caps[j]) < -OVERLAP_TOLERANCE {
                out.push((BodyRef::Limb(li.id), BodyRef::Limb(lj.id)));
            }
        }
        // Head versus every limb that is not its direct child.
        if li.parent != Parent::Head
            && sphere_capsule_distance(pose.head_center, pose.head_radius, &trimmed_caps[i])
                < -OVERLAP_TOLERANCE
        {
            out.push((BodyRef::Head, BodyRef::Limb(li.id)));
        }
    }
    out
}

/// Total mass and center of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassProperties {
    pub total_mass: f64,
    pub com: Vec3,
}

fn sphere_volume(r: f64) -> f64 {
    (4.0 / 3.0) * core::f64::consts::PI * r * r * r
}

fn capsule_volume(r: f64, len: f64) -> f64 {
    core::f64::consts::PI * r * r * len + sphere_volume(r)
}

/// Mass-weighted centroid over the head sphere and limb capsules, parts
/// summed independently (overlap volume is not subtracted).
pub fn mass_properties(m: &Morphology) -> MassProperties {
    let pose = rest_pose(m);
    let mut total = m.head.density as f64 * sphere_volume(m.head.radius);
    let mut weighted = pose.head_center * total;
    for (limb, resolved) in m.limbs.iter().zip(&pose.limbs) {
        let mass = limb.params.density as f64
            * capsule_volume(limb.params.radius, limb.params.length);
        let centroid = (resolved.capsule.p0 + resolved.capsule.p1) * 0.5;
        total += mass;
        weighted = weighted + centroid * mass;
    }
    MassProperties {
        total_mass: total,
        com: weighted * (1.0 / total),
    }
}

/// Convex hull of ground-contact points, counter-clockwise.
#[derive(Debug, Clone, Default)]
pub struct SupportPolygon {
    pub vertices: Vec<P2>,
}

impl SupportPolygon {
    pub fn area(&self) -> f64 {
        hull::polygon_area(&self.vertices)
    }
}

/// Result of the passive-stability test.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// True when the COM projects strictly inside a positive-area support
    /// polygon.
    pub stable: bool,
    /// Signed distance (m) from the COM projection to the support boundary;
    /// positive inside, negative outside or degenerate.
    pub margin: f64,
    /// Fewer than 3 non-collinear contact points.
    pub degenerate: bool,
    pub support: SupportPolygon,
}

/// Vertical tolerance for counting a body as touching the ground.
const CONTACT_TOLERANCE: f64 = 1e-3;

/// Ground-plane projections of every body point whose lowest extent is
/// within tolerance of the global minimum.
pub fn contact_points(m: &Morphology) -> Vec<P2> {
    let pose = rest_pose(m);
    let floor = pose.min_z() + CONTACT_TOLERANCE;
    let mut pts = Vec::new();
    if pose.head_center.z - pose.head_radius <= floor {
        pts.push((pose.head_center.x, pose.head_center.y));
    }
    for l in &pose.limbs {
        let c = &l.capsule;
        if c.p0.z - c.radius <= floor {
            pts.push((c.p0.x, c.p0.y));
        }
        if c.p1.z - c.radius <= floor {
            pts.push((c.p1.x, c.p1.y));
        }
    }
    pts
}

/// Passive stability: COM strictly inside the positive-area convex hull of
/// ground contacts. Boundary contact counts as unstable.
pub fn passive_stability(m: &Morphology) -> StabilityReport {
    let com = mass_properties(m).com;
    let com_xy = (com.x, com.y);
    let contacts = contact_points(m);
    let hull_pts = hull::convex_hull(&contacts);
    if hull_pts.len() < 3 {
        // Point or line support: unstable with a non-positive margin.
        let margin = if hull_pts.is_empty() {
            f64::NEG_INFINITY
        } else {
            -hull::boundary_distance(com_xy, &hull_pts)
        };
        return StabilityReport {
            stable: false,
            margin,
            degenerate: true,
            support: SupportPolygon { vertices: hull_pts },
        };
    }
    let area = hull::polygon_area(&hull_pts);
    let inside = hull::strictly_inside_convex(com_xy, &hull_pts);
    let dist = hull::boundary_distance(com_xy, &hull_pts);
    StabilityReport {
        stable: inside && area > 0.0,
        margin: if inside { dist } else { -dist },
        degenerate: false,
        support: SupportPolygon { vertices: hull_pts },
    }
}

/// Morphological descriptors reported by the analytics pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptors {
    pub extent_x: f64,
    pub extent_y: f64,
    pub extent_z: f64,
    /// Primitive volume over axis-aligned bounding-box volume.
    pub coverage: f64,
    pub mass: f64,
    pub dof: usize,
}

/// Rest-pose axis-aligned bounding box as (min, max) corners.
pub fn bounding_box(m: &Morphology) -> (Vec3, Vec3) {
    let pose = rest_pose(m);
    let r = pose.head_radius;
    let mut lo = pose.head_center - Vec3::new(r, r, r);
    let mut hi = pose.head_center + Vec3::new(r, r, r);
    for l in &pose.limbs {
        let c = &l.capsule;
        for p in [c.p0, c.p1] {
            lo.x = lo.x.min(p.x - c.radius);
            lo.y = lo.y.min(p.y - c.radius);
            lo.z = lo.z.min(p.z - c.radius);
            hi.x = hi.x.max(p.x + c.radius);
            hi.y = hi.y.max(p.y + c.radius);
            hi.z = hi.z.max(p.z + c.radius);
        }
    }
    (lo, hi)
}

pub fn descriptors(m: &Morphology) -> Descriptors {
    let (lo, hi) = bounding_box(m);
    let extent = hi - lo;
    let mut volume = sphere_volume(m.head.radius);
    for limb in &m.limbs {
        volume += capsule_volume(limb.params.radius, limb.params.length);
    }
    let box_volume = extent.x * extent.y * extent.z;
    Descriptors {
        extent_x: extent.x,
        extent_y: extent.y,
        extent_z: extent.z,
        coverage: volume / box_volume,
        mass: mass_properties(m).total_mass,
        dof: m.dof_count(),
    }
}

pub use crate::morphology::domains::COM_Y_TOLERANCE;
