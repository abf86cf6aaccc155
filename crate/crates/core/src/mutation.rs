//! Mutation operators over body-plan genotypes.
//!
//! Three classes, seven operators: grow/delete limbs (tree topology),
//! limb params and density (physical properties), and DoF/gear/joint-angle
//! (joint properties). Operators that can produce invalid geometry use
//! rejection sampling: fresh draws until the child validates or the retry
//! cap is hit. Mirrored pairs are always mutated together.
//!
//! Every operator is a pure function of `(parent, rng stream)`; callers own
//! stream derivation, so identical inputs replay identical children.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::morphology::{
    domains, Hinge, JointAxis, JointSpec, Limb, LimbId, LimbParams, Morphology, SiteEntry,
    ValidationReport,
};
use crate::rng::Stream;

/// Rejection-and-retry budget for one mutation call.
pub const RETRY_CAP: u32 = 64;

/// The seven operator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    GrowLimbs,
    DeleteLimbs,
    MutateLimbParams,
    MutateDensity,
    MutateDof,
    MutateGear,
    MutateJointAngle,
}

impl MutationKind {
    pub const ALL: [MutationKind; 7] = [
        MutationKind::GrowLimbs,
        MutationKind::DeleteLimbs,
        MutationKind::MutateLimbParams,
        MutationKind::MutateDensity,
        MutationKind::MutateDof,
        MutationKind::MutateGear,
        MutationKind::MutateJointAngle,
    ];
}

/// Relative operator weights for dispatch; sampled among the operators
/// applicable to the parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationWeights {
    pub grow_limbs: f64,
    pub delete_limbs: f64,
    pub mutate_limb_params: f64,
    pub mutate_density: f64,
    pub mutate_dof: f64,
    pub mutate_gear: f64,
    pub mutate_joint_angle: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        MutationWeights {
            grow_limbs: 1.0,
            delete_limbs: 1.0,
            mutate_limb_params: 1.0,
            mutate_density: 1.0,
            mutate_dof: 1.0,
            mutate_gear: 1.0,
            mutate_joint_angle: 1.0,
        }
    }
}

impl MutationWeights {
    fn weight(&self, kind: MutationKind) -> f64 {
        match kind {
            MutationKind::GrowLimbs => self.grow_limbs,
            MutationKind::DeleteLimbs => self.delete_limbs,
            MutationKind::MutateLimbParams => self.mutate_limb_params,
            MutationKind::MutateDensity => self.mutate_density,
            MutationKind::MutateDof => self.mutate_dof,
            MutationKind::MutateGear => self.mutate_gear,
            MutationKind::MutateJointAngle => self.mutate_joint_angle,
        }
    }
}

/// An accepted mutation: validated child plus audit trail.
#[derive(Debug, Clone)]
pub struct MutationOutcome {
    pub child: Morphology,
    pub op: MutationKind,
    pub parent_hash: String,
    pub rng_draws: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MutationError {
    /// Grow requested on a body already at the limb cap.
    Capacity,
    /// No leaf can be removed without leaving a limbless body.
    NoDeletableLeaf,
    /// No validated child found within the retry cap.
    RetriesExhausted(MutationKind),
    /// Operator needs at least one limb.
    NoLimbs,
}

impl core::fmt::Display for MutationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MutationError::Capacity => write!(f, "limb capacity reached"),
            MutationError::NoDeletableLeaf => write!(f, "no deletable leaf"),
            MutationError::RetriesExhausted(op) => {
                write!(f, "retries exhausted for {op:?}")
            }
            MutationError::NoLimbs => write!(f, "operator requires at least one limb"),
        }
    }
}

impl core::error::Error for MutationError {}

// ---------------------------------------------------------------------------
// Symmetric mutation units: a sagittal limb alone or a mirrored pair.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Single(LimbId),
    /// Lower-id twin first.
    Pair(LimbId, LimbId),
}

/// All mutation units, one per sagittal limb and one per mirrored pair.
pub fn units(m: &Morphology) -> Vec<Unit> {
    let mut out = Vec::new();
    for limb in &m.limbs {
        match limb.mirror {
            None => out.push(Unit::Single(limb.id)),
            Some(twin) if twin.0 > limb.id.0 => out.push(Unit::Pair(limb.id, twin)),
            Some(_) => {}
        }
    }
    out
}

/// Leaf units whose removal still leaves at least one limb.
pub fn deletable_units(m: &Morphology) -> Vec<Unit> {
    units(m)
        .into_iter()
        .filter(|u| match *u {
            Unit::Single(id) => m.is_leaf(id) && m.limbs.len() >= 2,
            Unit::Pair(a, b) => m.is_leaf(a) && m.is_leaf(b) && m.limbs.len() >= 3,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Grow limb(s)
// ---------------------------------------------------------------------------

/// Fully specified grow decision; the sampling wrapper draws one of these
/// uniformly, and tests can force exact draws.
#[derive(Debug, Clone)]
pub struct GrowChoice {
    pub site: SiteEntry,
    pub theta_deg: u16,
    pub phi_deg: u16,
    pub length: f64,
    /// Shared limb density; only consulted when the body has no limbs yet.
    pub density: Option<u32>,
    pub joint: JointSpec,
}

/// Why a grow draw was not accepted.
#[derive(Debug, Clone)]
pub enum GrowRejection {
    /// Adding this unit would exceed the limb cap.
    WouldExceedCapacity,
    /// Child failed validation (collision, COM, or domain).
    Invalid(ValidationReport),
}

/// Applies one grow decision deterministically.
///
/// A sagittal azimuth on a single site adds one unmirrored limb; any other
/// combination adds a mirrored pair (twin azimuth reflected across the
/// sagittal plane). The first limb ever grown fixes the shared density.
pub fn grow_limbs_with(m: &Morphology, choice: &GrowChoice) -> Result<Morphology, GrowRejection> {
    let single = matches!(choice.site, SiteEntry::Single(_))
        && domains::SAGITTAL_THETAS.contains(&choice.theta_deg);
    let added = if single { 1 } else { 2 };
    if m.limbs.len() + added > domains::MAX_LIMBS {
        return Err(GrowRejection::WouldExceedCapacity);
    }

    let mut child = m.clone();
    let density = match child.shared_limb_density {
        Some(d) => d,
        None => {
            let d = choice.density.unwrap_or(domains::DENSITIES[0]);
            child.shared_limb_density = Some(d);
            d
        }
    };
    let params = |theta: u16| LimbParams {
        radius: domains::LIMB_RADIUS,
        length: choice.length,
        density,
        theta_deg: theta,
        phi_deg: choice.phi_deg,
    };
    let id_a = child.next_limb_id();
    match choice.site {
        SiteEntry::Single(site) if single => {
            child.limbs.push(Limb {
                id: id_a,
                parent: site.host,
                attachment: site.point,
                params: params(choice.theta_deg),
                joint: choice.joint.clone(),
                mirror: None,
            });
        }
        SiteEntry::Single(site) => {
            let id_b = LimbId(id_a.0 + 1);
            child.limbs.push(Limb {
                id: id_a,
                parent: site.host,
                attachment: site.point,
                params: params(choice.theta_deg),
                joint: choice.joint.clone(),
                mirror: Some(id_b),
            });
            child.limbs.push(Limb {
                id: id_b,
                parent: site.host,
                attachment: site.point,
                params: params(domains::mirror_theta(choice.theta_deg)),
                joint: choice.joint.clone(),
                mirror: Some(id_a),
            });
        }
        SiteEntry::Paired(site_a, site_b) => {
            let id_b = LimbId(id_a.0 + 1);
            child.limbs.push(Limb {
                id: id_a,
                parent: site_a.host,
                attachment: site_a.point,
                params: params(choice.theta_deg),
                joint: choice.joint.clone(),
                mirror: Some(id_b),
            });
            child.limbs.push(Limb {
                id: id_b,
                parent: site_b.host,
                attachment: site_b.point,
                params: params(domains::mirror_theta(choice.theta_deg)),
                joint: choice.joint.clone(),
                mirror: Some(id_a),
            });
        }
    }

    let report = child.validate();
    if report.is_valid() {
        Ok(child)
    } else {
        Err(GrowRejection::Invalid(report))
    }
}

fn sample_joint(rng: &mut Stream) -> JointSpec {
    let hinge = |rng: &mut Stream, axis: JointAxis| Hinge {
        axis,
        limit: *rng.choose(&domains::JOINT_LIMITS),
        gear: *rng.choose(&domains::GEARS),
    };
    match rng.next_below(3) {
        0 => JointSpec {
            hinges: alloc::vec![hinge(rng, JointAxis::X)],
        },
        1 => JointSpec {
            hinges: alloc::vec![hinge(rng, JointAxis::Y)],
        },
        _ => JointSpec {
            hinges: alloc::vec![hinge(rng, JointAxis::X), hinge(rng, JointAxis::Y)],
        },
    }
}

fn sample_grow_choice(m: &Morphology, rng: &mut Stream) -> GrowChoice {
    let sites = m.attachment_sites();
    GrowChoice {
        site: *rng.choose(&sites),
        theta_deg: *rng.choose(&domains::THETAS),
        phi_deg: *rng.choose(&domains::PHIS),
        length: *rng.choose(&domains::LIMB_LENGTHS),
        density: Some(*rng.choose(&domains::DENSITIES)),
        joint: sample_joint(rng),
    }
}

/// Grows one limb or a mirrored pair at a uniformly sampled attachment
/// site, rejecting and redrawing until the child validates.
pub fn grow_limbs(m: &Morphology, rng: &mut Stream) -> Result<MutationOutcome, MutationError> {
    if m.limbs.len() >= domains::MAX_LIMBS {
        return Err(MutationError::Capacity);
    }
    let start = rng.draws();
    for _ in 0..RETRY_CAP {
        let choice = sample_grow_choice(m, rng);
        if let Ok(child) = grow_limbs_with(m, &choice) {
            return Ok(outcome(m, child, MutationKind::GrowLimbs, rng.draws() - start));
        }
    }
    Err(MutationError::RetriesExhausted(MutationKind::GrowLimbs))
}

// ---------------------------------------------------------------------------
// Delete limb(s)
// ---------------------------------------------------------------------------

/// Removes a leaf unit. Only affects leaves, so the result is always valid.
pub fn delete_limbs_with(m: &Morphology, unit: Unit) -> Result<Morphology, MutationError> {
    let deletable = deletable_units(m);
    if !deletable.contains(&unit) {
        return Err(MutationError::NoDeletableLeaf);
    }
    let mut child = m.clone();
    child.limbs.retain(|l| match unit {
        Unit::Single(id) => l.id != id,
        Unit::Pair(a, b) => l.id != a && l.id != b,
    });
    debug_assert!(child.validate().is_valid());
    Ok(child)
}

/// Uniformly removes one deletable leaf unit.
pub fn delete_limbs(m: &Morphology, rng: &mut Stream) -> Result<MutationOutcome, MutationError> {
    let units = deletable_units(m);
    if units.is_empty() {
        return Err(MutationError::NoDeletableLeaf);
    }
    let start = rng.draws();
    let unit = *rng.choose(&units);
    let child = delete_limbs_with(m, unit)?;
    Ok(outcome(m, child, MutationKind::DeleteLimbs, rng.draws() - start))
}

// ---------------------------------------------------------------------------
// Mutate limb parameters
// ---------------------------------------------------------------------------

/// Replaces a unit's length and orientation; mirrored twins change jointly.
pub fn mutate_limb_params_with(
    m: &Morphology,
    unit: Unit,
    length: f64,
    theta_deg: u16,
    phi_deg: u16,
) -> Result<Morphology, GrowRejection> {
    let mut child = m.clone();
    let apply = |limb: &mut Limb, theta: u16| {
        limb.params.length = length;
        limb.params.theta_deg = theta;
        limb.params.phi_deg = phi_deg;
    };
    for limb in &mut child.limbs {
        match unit {
            Unit::Single(id) if limb.id == id => apply(limb, theta_deg),
            Unit::Pair(a, _) if limb.id == a => apply(limb, theta_deg),
            Unit::Pair(_, b) if limb.id == b => apply(limb, domains::mirror_theta(theta_deg)),
            _ => {}
        }
    }
    let report = child.validate();
    if report.is_valid() {
        Ok(child)
    } else {
        Err(GrowRejection::Invalid(report))
    }
}

/// Resamples length and orientation for one uniformly chosen unit, with
/// rejection on collisions and on the no-op draw.
pub fn mutate_limb_params(
    m: &Morphology,
    rng: &mut Stream,
) -> Result<MutationOutcome, MutationError> {
    let units = units(m);
    if units.is_empty() {
        return Err(MutationError::NoLimbs);
    }
    let start = rng.draws();
    for _ in 0..RETRY_CAP {
        let unit = *rng.choose(&units);
        let (lead, sagittal_only) = match unit {
            Unit::Single(id) => (id, true),
            Unit::Pair(a, _) => (a, false),
        };
        let theta = if sagittal_only {
            *rng.choose(&domains::SAGITTAL_THETAS)
        } else {
            *rng.choose(&domains::THETAS)
        };
        let length = *rng.choose(&domains::LIMB_LENGTHS);
        let phi = *rng.choose(&domains::PHIS);
        let current = &m.limb(lead).expect("unit limb exists").params;
        if current.length == length && current.theta_deg == theta && current.phi_deg == phi {
            continue; // no-op draw
        }
        if let Ok(child) = mutate_limb_params_with(m, unit, length, theta, phi) {
            return Ok(outcome(
                m,
                child,
                MutationKind::MutateLimbParams,
                rng.draws() - start,
            ));
        }
    }
    Err(MutationError::RetriesExhausted(MutationKind::MutateLimbParams))
}

// ---------------------------------------------------------------------------
// Mutate density
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityTarget {
    Head,
    Limbs,
}

/// Sets the head density or the shared limb density to a new value.
pub fn mutate_density_with(m: &Morphology, target: DensityTarget, density: u32) -> Morphology {
    let mut child = m.clone();
    match target {
        DensityTarget::Head => child.head.density = density,
        DensityTarget::Limbs => {
            child.shared_limb_density = Some(density);
            for limb in &mut child.limbs {
                limb.params.density = density;
            }
        }
    }
    child
}

/// Fair coin between head and shared limb density, then a uniformly drawn
/// different value. Density never invalidates geometry.
pub fn mutate_density(m: &Morphology, rng: &mut Stream) -> Result<MutationOutcome, MutationError> {
    let start = rng.draws();
    let target = match m.shared_limb_density {
        Some(_) if rng.next_below(2) == 0 => DensityTarget::Limbs,
        Some(_) => DensityTarget::Head,
        None => DensityTarget::Head,
    };
    let current = match target {
        DensityTarget::Head => m.head.density,
        DensityTarget::Limbs => m.shared_limb_density.expect("checked above"),
    };
    let value = *rng.choose_other(&domains::DENSITIES, &current);
    let child = mutate_density_with(m, target, value);
    debug_assert!(child.validate().is_valid() || !m.validate().is_valid());
    Ok(outcome(m, child, MutationKind::MutateDensity, rng.draws() - start))
}

// ---------------------------------------------------------------------------
// Mutate DoF, gear, joint angle
// ---------------------------------------------------------------------------

/// A joint edit applied to one unit (both twins of a pair).
#[derive(Debug, Clone)]
pub enum JointChange {
    /// Replace the axes configuration. Retained axes keep their hinge
    /// parameters; a pure relabel carries parameters to the new axis; newly
    /// added axes take the provided fresh hinge parameters.
    Axes {
        config: AxesConfig,
        fresh: ((i16, i16), u16),
    },
    /// New gear for the hinge at `slot`.
    Gear { slot: usize, gear: u16 },
    /// New limits for the hinge at `slot`.
    Limit { slot: usize, limit: (i16, i16) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxesConfig {
    X,
    Y,
    Xy,
}

impl AxesConfig {
    pub const ALL: [AxesConfig; 3] = [AxesConfig::X, AxesConfig::Y, AxesConfig::Xy];

    fn of(joint: &JointSpec) -> AxesConfig {
        match joint.hinges.as_slice() {
            [h] if h.axis == JointAxis::X => AxesConfig::X,
            [h] if h.axis == JointAxis::Y => AxesConfig::Y,
            _ => AxesConfig::Xy,
        }
    }

    fn axes(self) -> &'static [JointAxis] {
        match self {
            AxesConfig::X => &[JointAxis::X],
            AxesConfig::Y => &[JointAxis::Y],
            AxesConfig::Xy => &[JointAxis::X, JointAxis::Y],
        }
    }
}

fn rebuild_axes(joint: &JointSpec, config: AxesConfig, fresh: ((i16, i16), u16)) -> JointSpec {
    let old = &joint.hinges;
    let hinges = config
        .axes()
        .iter()
        .map(|&axis| {
            if let Some(h) = old.iter().find(|h| h.axis == axis) {
                *h
            } else if old.len() == 1 && config.axes().len() == 1 {
                // Pure relabel: keep limits and gear on the new axis.
                Hinge { axis, ..old[0] }
            } else {
                Hinge {
                    axis,
                    limit: fresh.0,
                    gear: fresh.1,
                }
            }
        })
        .collect();
    JointSpec { hinges }
}

/// Applies one joint edit to a unit.
pub fn mutate_joint_with(m: &Morphology, unit: Unit, change: &JointChange) -> Morphology {
    let mut child = m.clone();
    let targets: [Option<LimbId>; 2] = match unit {
        Unit::Single(id) => [Some(id), None],
        Unit::Pair(a, b) => [Some(a), Some(b)],
    };
    for limb in &mut child.limbs {
        if !targets.contains(&Some(limb.id)) {
            continue;
        }
        match change {
            JointChange::Axes { config, fresh } => {
                limb.joint = rebuild_axes(&limb.joint, *config, *fresh);
            }
            JointChange::Gear { slot, gear } => {
                if let Some(h) = limb.joint.hinges.get_mut(*slot) {
                    h.gear = *gear;
                }
            }
            JointChange::Limit { slot, limit } => {
                if let Some(h) = limb.joint.hinges.get_mut(*slot) {
                    h.limit = *limit;
                }
            }
        }
    }
    child
}

/// Joint mutations: replace the axes set, one hinge's gear, or one hinge's
/// limits with a different member of the corresponding domain list. Joint
/// changes never affect rest geometry, so no rejection loop is needed.
pub fn mutate_joint(
    m: &Morphology,
    rng: &mut Stream,
    kind: MutationKind,
) -> Result<MutationOutcome, MutationError> {
    debug_assert!(matches!(
        kind,
        MutationKind::MutateDof | MutationKind::MutateGear | MutationKind::MutateJointAngle
    ));
    let units = units(m);
    if units.is_empty() {
        return Err(MutationError::NoLimbs);
    }
    let start = rng.draws();
    let unit = *rng.choose(&units);
    let lead = match unit {
        Unit::Single(id) => id,
        Unit::Pair(a, _) => a,
    };
    let joint = m.limb(lead).expect("unit limb exists").joint.clone();
    let change = match kind {
        MutationKind::MutateDof => {
            let current = AxesConfig::of(&joint);
            let config = *rng.choose_other(&AxesConfig::ALL, &current);
            JointChange::Axes {
                config,
                fresh: (
                    *rng.choose(&domains::JOINT_LIMITS),
                    *rng.choose(&domains::GEARS),
                ),
            }
        }
        MutationKind::MutateGear => {
            let slot = rng.next_below(joint.hinges.len() as u64) as usize;
            let gear = *rng.choose_other(&domains::GEARS, &joint.hinges[slot].gear);
            JointChange::Gear { slot, gear }
        }
        _ => {
            let slot = rng.next_below(joint.hinges.len() as u64) as usize;
            let limit = *rng.choose_other(&domains::JOINT_LIMITS, &joint.hinges[slot].limit);
            JointChange::Limit { slot, limit }
        }
    };
    let child = mutate_joint_with(m, unit, &change);
    debug_assert!(child.validate().is_valid() || !m.validate().is_valid());
    Ok(outcome(m, child, kind, rng.draws() - start))
}

// ---------------------------------------------------------------------------
// Dispatch and population initialization
// ---------------------------------------------------------------------------

fn outcome(parent: &Morphology, child: Morphology, op: MutationKind, draws: u64) -> MutationOutcome {
    debug_assert_ne!(parent.to_canonical_json(), child.to_canonical_json());
    MutationOutcome {
        child,
        op,
        parent_hash: parent.digest(),
        rng_draws: draws,
    }
}

/// Operators applicable to this parent: grow below the cap, delete when a
/// leaf can go, the rest whenever a limb exists.
pub fn applicable_ops(m: &Morphology) -> Vec<MutationKind> {
    let mut ops = Vec::new();
    if m.limbs.len() < domains::MAX_LIMBS {
        ops.push(MutationKind::GrowLimbs);
    }
    if !deletable_units(m).is_empty() {
        ops.push(MutationKind::DeleteLimbs);
    }
    if !m.limbs.is_empty() {
        ops.extend([
            MutationKind::MutateLimbParams,
            MutationKind::MutateDensity,
            MutationKind::MutateDof,
            MutationKind::MutateGear,
            MutationKind::MutateJointAngle,
        ]);
    }
    ops
}

fn weighted_pick(ops: &[MutationKind], weights: &MutationWeights, rng: &mut Stream) -> MutationKind {
    let total: f64 = ops.iter().map(|&k| weights.weight(k).max(0.0)).sum();
    if total <= 0.0 {
        return *rng.choose(ops);
    }
    let mut x = rng.next_f64() * total;
    for &k in ops {
        x -= weights.weight(k).max(0.0);
        if x <= 0.0 {
            return k;
        }
    }
    ops[ops.len() - 1]
}

/// Samples one applicable operator (by weight) and applies it.
pub fn mutate(
    m: &Morphology,
    rng: &mut Stream,
    weights: &MutationWeights,
) -> Result<MutationOutcome, MutationError> {
    let ops = applicable_ops(m);
    if ops.is_empty() {
        return Err(MutationError::NoLimbs);
    }
    let op = weighted_pick(&ops, weights, rng);
    apply(m, rng, op)
}

/// Applies one specific operator.
pub fn apply(
    m: &Morphology,
    rng: &mut Stream,
    op: MutationKind,
) -> Result<MutationOutcome, MutationError> {
    match op {
        MutationKind::GrowLimbs => grow_limbs(m, rng),
        MutationKind::DeleteLimbs => delete_limbs(m, rng),
        MutationKind::MutateLimbParams => mutate_limb_params(m, rng),
        MutationKind::MutateDensity => mutate_density(m, rng),
        k => mutate_joint(m, rng, k),
    }
}

/// Default founder limb-count range.
pub const INITIAL_LIMB_RANGE: (usize, usize) = (3, 10);

/// Samples a founder: head density from the domain list, a target limb
/// count from `range`, then grow mutations until the target is reached
/// (a final paired grow may overshoot by one). Resamples the target on
/// retry exhaustion.
pub fn sample_initial_morphology(rng: &mut Stream, range: (usize, usize)) -> Morphology {
    assert!(range.0 >= 1 && range.0 <= range.1 && range.1 <= domains::MAX_LIMBS);
    for _ in 0..10_000 {
        let head_density = *rng.choose(&domains::DENSITIES);
        let target = range.0 + rng.next_below((range.1 - range.0 + 1) as u64) as usize;
        let mut m = Morphology::new_head(head_density).expect("domain density");
        let mut failed = false;
        while m.limbs.len() < target {
            match grow_limbs(&m, rng) {
                Ok(out) => m = out.child,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        if !failed {
            debug_assert!(m.validate().is_valid());
            return m;
        }
    }
    unreachable!("founder sampling cannot fail persistently: small trees always admit growth")
}
