//! Body-plan genotype: a kinematic tree of capsule limbs rooted at a
//! spherical head, with hinge joints and bilateral symmetry pairing.
//!
//! All numeric fields are drawn from finite design-space domains (see
//! [`domains`]), which makes domain membership an exact-equality check and
//! keeps the canonical JSON serialization byte-stable across round trips.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::digest;
use crate::geometry;

/// Design-space parameter domains. Mutation operators sample from these
/// lists exactly; validation checks membership by exact equality.
pub mod domains {
    /// Fixed capsule radius for every limb (m).
    pub const LIMB_RADIUS: f64 = 0.05;
    /// Fixed head sphere radius (m).
    pub const HEAD_RADIUS: f64 = 0.10;
    /// Allowed cylindrical-segment lengths (m).
    pub const LIMB_LENGTHS: [f64; 3] = [0.2, 0.3, 0.4];
    /// Allowed densities for head and limbs (kg/m^3).
    pub const DENSITIES: [u32; 6] = [500, 600, 700, 800, 900, 1000];
    /// Allowed azimuth angles (degrees).
    pub const THETAS: [u16; 8] = [0, 45, 90, 135, 180, 225, 270, 315];
    /// Allowed polar angles from vertical (degrees); all >= 90 so growth
    /// points downward.
    pub const PHIS: [u16; 3] = [90, 135, 180];
    /// Allowed motor gear ratios.
    pub const GEARS: [u16; 4] = [150, 200, 250, 300];
    /// Allowed per-axis joint limits (degrees, lo < hi).
    pub const JOINT_LIMITS: [(i16, i16); 13] = [
        (-30, 0),
        (0, 30),
        (-30, 30),
        (-45, 45),
        (-45, 0),
        (0, 45),
        (-60, 0),
        (0, 60),
        (-60, 60),
        (-90, 0),
        (0, 90),
        (-60, 30),
        (-30, 60),
    ];
    /// Maximum limb count.
    pub const MAX_LIMBS: usize = 10;
    /// Minimum limb count for an evaluable morphology.
    pub const MIN_LIMBS: usize = 1;
    /// Azimuths at which a single unmirrored limb keeps the body bilaterally
    /// symmetric.
    pub const SAGITTAL_THETAS: [u16; 2] = [0, 180];
    /// Tolerance on the center-of-mass sagittal offset (m).
    pub const COM_Y_TOLERANCE: f64 = 1e-6;

    /// Mirrored azimuth: theta' = (360 - theta) mod 360.
    pub const fn mirror_theta(theta: u16) -> u16 {
        (360 - theta) % 360
    }
}

/// Stable limb identifier, assigned in birth order and never reused within
/// a morphology's lifetime (new limbs always get ids above all existing).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct LimbId(pub u32);

impl fmt::Display for LimbId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a limb is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parent {
    Head,
    Limb(LimbId),
}

/// Attachment point on the parent body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SitePoint {
    /// Center of the head sphere; only valid with `Parent::Head`.
    Center,
    /// Midpoint of the parent limb's segment.
    Mid,
    /// Far endpoint of the parent limb's segment.
    End,
}

/// Physical parameters of one limb.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimbParams {
    /// Capsule radius (m), fixed at 0.05.
    pub radius: f64,
    /// Cylindrical-segment length (m).
    pub length: f64,
    /// Density (kg/m^3); equal across all limbs.
    pub density: u32,
    /// Azimuth (degrees).
    pub theta_deg: u16,
    /// Polar angle from +z (degrees); >= 90 forces downward growth.
    pub phi_deg: u16,
}

/// Hinge rotation axis in the child limb's frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointAxis {
    X,
    Y,
}

/// One motor-actuated hinge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hinge {
    pub axis: JointAxis,
    /// Rotation limits (degrees, lo < hi), a member of the allowed list.
    pub limit: (i16, i16),
    /// Motor gear ratio.
    pub gear: u16,
}

/// Joint between a limb and its parent: one or two hinges on distinct axes,
/// stored in canonical order (X before Y).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointSpec {
    pub hinges: Vec<Hinge>,
}

impl JointSpec {
    pub fn single(axis: JointAxis, limit: (i16, i16), gear: u16) -> Self {
        JointSpec {
            hinges: alloc::vec![Hinge { axis, limit, gear }],
        }
    }

    pub fn dual(x: ((i16, i16), u16), y: ((i16, i16), u16)) -> Self {
        JointSpec {
            hinges: alloc::vec![
                Hinge {
                    axis: JointAxis::X,
                    limit: x.0,
                    gear: x.1
                },
                Hinge {
                    axis: JointAxis::Y,
                    limit: y.0,
                    gear: y.1
                },
            ],
        }
    }

    /// Number of actuated degrees of freedom this joint contributes.
    pub fn dof(&self) -> usize {
        self.hinges.len()
    }
}

/// One limb of the kinematic tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limb {
    pub id: LimbId,
    pub parent: Parent,
    pub attachment: SitePoint,
    pub params: LimbParams,
    pub joint: JointSpec,
    /// Bilateral twin, if this limb is one half of a mirrored pair.
    pub mirror: Option<LimbId>,
}

/// Head sphere forming the root of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub radius: f64,
    pub density: u32,
}

/// The genotype: head plus an ordered collection of limbs.
///
/// Limbs are stored in birth (id) order; parents always precede children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Morphology {
    pub head: Head,
    pub limbs: Vec<Limb>,
    /// Density shared by every limb; `None` until the first limb is grown.
    pub shared_limb_density: Option<u32>,
}

/// Errors from direct construction entry points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainError {
    HeadDensity(u32),
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::HeadDensity(d) => {
                write!(f, "head density {d} is not in the allowed set")
            }
        }
    }
}

impl core::error::Error for DomainError {}

/// A single violated invariant found by [`Morphology::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Limb count outside `[1, 10]`.
    LimbCount(usize),
    /// A numeric field is not a member of its design-space domain.
    Domain { limb: Option<LimbId>, field: &'static str },
    /// A limb's density differs from the shared limb density.
    DensityUniformity(LimbId),
    /// Limbs exist but `shared_limb_density` is unset.
    SharedDensityMissing,
    /// Joint spec malformed: hinge count, duplicate axes, or axis order.
    JointStructure(LimbId),
    /// Parent reference missing, out of birth order, cyclic, or attachment
    /// point inconsistent with the parent kind.
    Tree(LimbId),
    /// Mirror links broken or twin parameters not mirror images.
    Symmetry(LimbId),
    /// Center of mass off the sagittal plane.
    ComOffSagittal { com_y: f64 },
    /// Overlapping non-adjacent bodies at rest pose.
    SelfIntersection(Vec<(BodyRef, BodyRef)>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LimbCount(n) => write!(f, "limb count {n} outside [1, 10]"),
            Violation::Domain { limb: Some(id), field } => {
                write!(f, "limb {id}: {field} outside its allowed set")
            }
            Violation::Domain { limb: None, field } => {
                write!(f, "head: {field} outside its allowed set")
            }
            Violation::DensityUniformity(id) => {
                write!(f, "limb {id}: density differs from shared limb density")
            }
            Violation::SharedDensityMissing => {
                write!(f, "limbs present but shared limb density unset")
            }
            Violation::JointStructure(id) => write!(f, "limb {id}: malformed joint spec"),
            Violation::Tree(id) => write!(f, "limb {id}: broken tree structure"),
            Violation::Symmetry(id) => write!(f, "limb {id}: bilateral symmetry violated"),
            Violation::ComOffSagittal { com_y } => {
                write!(f, "center of mass off sagittal plane (com_y = {com_y:e})")
            }
            Violation::SelfIntersection(pairs) => {
                write!(f, "self-intersecting body pairs: {pairs:?}")
            }
        }
    }
}

/// Rigid body reference used in intersection reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyRef {
    Head,
    Limb(LimbId),
}

/// Outcome of full validation; empty report means valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// A site where a new limb may attach. Sites on mirrored limbs come in
/// pairs that must be consumed together to preserve symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteRef {
    pub host: Parent,
    pub point: SitePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteEntry {
    /// On the head or a sagittal (unmirrored) limb.
    Single(SiteRef),
    /// Corresponding sites on a mirrored pair.
    Paired(SiteRef, SiteRef),
}

impl Morphology {
    /// Head-only construction intermediate. Fails [`Morphology::validate`]
    /// until at least one limb is grown.
    pub fn new_head(head_density: u32) -> Result<Self, DomainError> {
        if !domains::DENSITIES.contains(&head_density) {
            return Err(DomainError::HeadDensity(head_density));
        }
        Ok(Morphology {
            head: Head {
                radius: domains::HEAD_RADIUS,
                density: head_density,
            },
            limbs: Vec::new(),
            shared_limb_density: None,
        })
    }

    pub fn limb(&self, id: LimbId) -> Option<&Limb> {
        self.limbs.iter().find(|l| l.id == id)
    }

    /// Next id for a grown limb: above every id ever used in this tree.
    pub fn next_limb_id(&self) -> LimbId {
        LimbId(self.limbs.iter().map(|l| l.id.0 + 1).max().unwrap_or(0))
    }

    /// Ids of a limb's children, in birth order.
    pub fn children_of(&self, parent: Parent) -> impl Iterator<Item = &Limb> {
        self.limbs.iter().filter(move |l| l.parent == parent)
    }

    pub fn is_leaf(&self, id: LimbId) -> bool {
        !self.limbs.iter().any(|l| l.parent == Parent::Limb(id))
    }

    /// Total actuated degrees of freedom: sum of hinge counts over limbs.
    pub fn dof_count(&self) -> usize {
        self.limbs.iter().map(|l| l.joint.dof()).sum()
    }

    /// Whether a limb lies entirely in the sagittal plane: unmirrored
    /// azimuth on an unmirrored parent chain.
    pub fn is_sagittal(&self, limb: &Limb) -> bool {
        if !domains::SAGITTAL_THETAS.contains(&limb.params.theta_deg) {
            return false;
        }
        match limb.parent {
            Parent::Head => true,
            Parent::Limb(pid) => self
                .limb(pid)
                .map(|p| p.mirror.is_none() && self.is_sagittal(p))
                .unwrap_or(false),
        }
    }

    /// All available attachment sites: the head center plus the mid and end
    /// point of every limb. Sites on mirrored limbs are paired entries.
    pub fn attachment_sites(&self) -> Vec<SiteEntry> {
        let mut out = Vec::new();
        out.push(SiteEntry::Single(SiteRef {
            host: Parent::Head,
            point: SitePoint::Center,
        }));
        for limb in &self.limbs {
            match limb.mirror {
                None => {
                    for point in [SitePoint::Mid, SitePoint::End] {
                        out.push(SiteEntry::Single(SiteRef {
                            host: Parent::Limb(limb.id),
                            point,
                        }));
                    }
                }
                // Pairs are emitted once, keyed at the lower-id twin.
                Some(twin) if twin.0 > limb.id.0 => {
                    for point in [SitePoint::Mid, SitePoint::End] {
                        out.push(SiteEntry::Paired(
                            SiteRef {
                                host: Parent::Limb(limb.id),
                                point,
                            },
                            SiteRef {
                                host: Parent::Limb(twin),
                                point,
                            },
                        ));
                    }
                }
                Some(_) => {}
            }
        }
        out
    }

    /// Checks every structural invariant and returns all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.limbs.len();
        if !(domains::MIN_LIMBS..=domains::MAX_LIMBS).contains(&n) {
            report.violations.push(Violation::LimbCount(n));
        }

        self.check_domains(&mut report);
        let tree_ok = self.check_tree(&mut report);
        self.check_symmetry(&mut report);

        // Geometric checks need a resolvable pose.
        if tree_ok && !self.limbs.is_empty() {
            let props = geometry::mass_properties(self);
            if props.com.y.abs() > domains::COM_Y_TOLERANCE {
                report
                    .violations
                    .push(Violation::ComOffSagittal { com_y: props.com.y });
            }
            let overlaps = geometry::self_intersects(self);
            if !overlaps.is_empty() {
                report.violations.push(Violation::SelfIntersection(overlaps));
            }
        }
        report
    }

    fn check_domains(&self, report: &mut ValidationReport) {
        if self.head.radius != domains::HEAD_RADIUS {
            report.violations.push(Violation::Domain {
                limb: None,
                field: "head radius",
            });
        }
        if !domains::DENSITIES.contains(&self.head.density) {
            report.violations.push(Violation::Domain {
                limb: None,
                field: "head density",
            });
        }
        match self.shared_limb_density {
            Some(d) if !domains::DENSITIES.contains(&d) => {
                report.violations.push(Violation::Domain {
                    limb: None,
                    field: "shared limb density",
                });
            }
            None if !self.limbs.is_empty() => {
                report.violations.push(Violation::SharedDensityMissing);
            }
            _ => {}
        }
        for limb in &self.limbs {
            let p = &limb.params;
            if p.radius != domains::LIMB_RADIUS {
                report.violations.push(Violation::Domain {
                    limb: Some(limb.id),
                    field: "radius",
                });
            }
            if !domains::LIMB_LENGTHS.contains(&p.length) {
                report.violations.push(Violation::Domain {
                    limb: Some(limb.id),
                    field: "length",
                });
            }
            if !domains::DENSITIES.contains(&p.density) {
                report.violations.push(Violation::Domain {
                    limb: Some(limb.id),
                    field: "density",
                });
            }
            if !domains::THETAS.contains(&p.theta_deg) {
                report.violations.push(Violation::Domain {
                    limb: Some(limb.id),
                    field: "theta",
                });
            }
            if !domains::PHIS.contains(&p.phi_deg) {
                report.violations.push(Violation::Domain {
                    limb: Some(limb.id),
                    field: "phi",
                });
            }
            if let Some(shared) = self.shared_limb_density {
                if p.density != shared {
                    report.violations.push(Violation::DensityUniformity(limb.id));
                }
            }
            let hinges = &limb.joint.hinges;
            let structure_ok = match hinges.len() {
                1 => true,
                2 => hinges[0].axis == JointAxis::X && hinges[1].axis == JointAxis::Y,
                _ => false,
            };
            if !structure_ok {
                report.violations.push(Violation::JointStructure(limb.id));
            }
            for h in hinges {
                if !domains::JOINT_LIMITS.contains(&h.limit) {
                    report.violations.push(Violation::Domain {
                        limb: Some(limb.id),
                        field: "joint limit",
                    });
                }
                if !domains::GEARS.contains(&h.gear) {
                    report.violations.push(Violation::Domain {
                        limb: Some(limb.id),
                        field: "gear",
                    });
                }
            }
        }
    }

    /// Returns true when the tree is sound enough to resolve world poses:
    /// unique increasing ids, parents existing and born before children,
    /// attachment points matching the parent kind.
    fn check_tree(&self, report: &mut ValidationReport) -> bool {
        let mut ok = true;
        let mut prev: Option<u32> = None;
        for limb in &self.limbs {
            if prev.is_some_and(|p| limb.id.0 <= p) {
                report.violations.push(Violation::Tree(limb.id));
                ok = false;
            }
            prev = Some(limb.id.0);
            match (limb.parent, limb.attachment) {
                (Parent::Head, SitePoint::Center) => {}
                (Parent::Head, _) | (Parent::Limb(_), SitePoint::Center) => {
                    report.violations.push(Violation::Tree(limb.id));
                    ok = false;
                }
                (Parent::Limb(pid), _) => {
                    // Birth order makes cycles impossible when pid < id.
                    if pid.0 >= limb.id.0 || self.limb(pid).is_none() {
                        report.violations.push(Violation::Tree(limb.id));
                        ok = false;
                    }
                }
            }
        }
        ok
    }

    fn check_symmetry(&self, report: &mut ValidationReport) {
        for limb in &self.limbs {
            match limb.mirror {
                None => {
                    if !domains::SAGITTAL_THETAS.contains(&limb.params.theta_deg)
                        || !self.parent_is_sagittal(limb)
                    {
                        report.violations.push(Violation::Symmetry(limb.id));
                    }
                }
                Some(twin_id) => {
                    let Some(twin) = self.limb(twin_id) else {
                        report.violations.push(Violation::Symmetry(limb.id));
                        continue;
                    };
                    if twin.mirror != Some(limb.id) {
                        report.violations.push(Violation::Symmetry(limb.id));
                        continue;
                    }
                    // Report each broken pair once, at the lower-id twin.
                    if limb.id.0 > twin_id.0 {
                        continue;
                    }
                    if !Self::pair_is_mirror(limb, twin) || !self.pair_parents_match(limb, twin) {
                        report.violations.push(Violation::Symmetry(limb.id));
                    }
                }
            }
        }
    }

    fn parent_is_sagittal(&self, limb: &Limb) -> bool {
        match limb.parent {
            Parent::Head => true,
            Parent::Limb(pid) => self.limb(pid).is_some_and(|p| p.mirror.is_none()),
        }
    }

    fn pair_is_mirror(a: &Limb, b: &Limb) -> bool {
        a.params.length == b.params.length
            && a.params.radius == b.params.radius
            && a.params.density == b.params.density
            && a.params.phi_deg == b.params.phi_deg
            && b.params.theta_deg == domains::mirror_theta(a.params.theta_deg)
            && a.joint == b.joint
            && a.attachment == b.attachment
    }

    fn pair_parents_match(&self, a: &Limb, b: &Limb) -> bool {
        match (a.parent, b.parent) {
            // Both on the head, or both on the same sagittal limb.
            (Parent::Head, Parent::Head) => true,
            (Parent::Limb(pa), Parent::Limb(pb)) if pa == pb => {
                self.limb(pa).is_some_and(|p| p.mirror.is_none())
            }
            // On mirrored parent twins.
            (Parent::Limb(pa), Parent::Limb(pb)) => {
                self.limb(pa).is_some_and(|p| p.mirror == Some(pb))
            }
            _ => false,
        }
    }

    /// Canonical serialization: compact JSON with fields in declaration
    /// order. Byte-identical across serialize/parse/serialize round trips.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("morphology serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Content digest of the canonical serialization.
    pub fn digest(&self) -> String {
        digest::hex_digest(self.to_canonical_json().as_bytes())
    }
}
