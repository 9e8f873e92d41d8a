//! Quadrant-ordered grouping of overlapping measurements.
//!
//! For each reference position, up to `top_n` nearest neighbors within a
//! distance band are partitioned into the four Cartesian quadrants
//! relative to the reference, and one member is sampled per quadrant.
//! The fixed channel-to-quadrant map gives the group its positional
//! encoding: channel 0 is (x < 0, y > 0), 1 is (x > 0, y > 0),
//! 2 is (x < 0, y < 0), 3 is (x > 0, y < 0). Coordinates exactly on an
//! axis count as positive.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::core::RandomSeed;
use crate::error::{Error, Result};
use crate::scan::kdtree::KdTree2;
use crate::scan::patterns::ScanPlan;

pub const QUADRANT_COUNT: usize = 4;

/// Channel index for an offset (dx, dy) from the reference.
pub fn quadrant_of(dx: f64, dy: f64) -> usize {
    let x_neg = dx < 0.0;
    let y_pos = dy >= 0.0;
    match (x_neg, y_pos) {
        (true, true) => 0,
        (false, true) => 1,
        (true, false) => 2,
        (false, false) => 3,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupingParams {
    /// Minimum neighbor distance in pixels.
    pub d_min: f64,
    /// Maximum neighbor distance in pixels.
    pub d_max: f64,
    /// Sampling rounds per reference position.
    pub groups_per_reference: usize,
    /// Candidate pool size per reference.
    pub top_n: usize,
}

impl GroupingParams {
    /// Defaults relative to the plan's mean step: distance band
    /// [0.3, 1.8] x step, 12 candidates, one round.
    pub fn for_step(mean_step: f64) -> Self {
        Self { d_min: 0.3 * mean_step, d_max: 1.8 * mean_step, groups_per_reference: 1, top_n: 12 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.d_min < self.d_max) || self.d_min < 0.0 {
            return Err(Error::InvalidParameter {
                field: "d_min/d_max",
                message: format!("need 0 <= d_min < d_max, got [{}, {}]", self.d_min, self.d_max),
            });
        }
        if self.top_n < QUADRANT_COUNT {
            return Err(Error::InvalidParameter {
                field: "top_n",
                message: format!("need at least {QUADRANT_COUNT} candidates, got {}", self.top_n),
            });
        }
        if self.groups_per_reference == 0 {
            return Err(Error::InvalidParameter {
                field: "groups_per_reference",
                message: "must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// One reference with its four quadrant-ordered members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub reference: usize,
    /// Member index per channel (quadrant).
    pub channels: [usize; QUADRANT_COUNT],
    /// Bit c set: channel c was filled by the out-of-quadrant fallback
    /// and does not satisfy the quadrant sign constraint.
    pub fallback_mask: u8,
}

impl Group {
    pub fn is_self_channel(&self, channel: usize) -> bool {
        self.channels[channel] == self.reference
    }

    pub fn is_fallback_channel(&self, channel: usize) -> bool {
        self.fallback_mask & (1 << channel) != 0
    }
}

/// Per-reference channel assignments plus references that could not form
/// a complete group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSet {
    pub groups: Vec<Group>,
    /// References skipped because no complete group could be formed.
    pub skipped: Vec<usize>,
    pub params: GroupingParams,
}

impl GroupSet {
    pub fn reference_indices(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.reference).collect()
    }
}

/// Build quadrant-ordered groups over the plan.
pub fn group_quadrants(
    plan: &ScanPlan,
    params: GroupingParams,
    seed: RandomSeed,
) -> Result<GroupSet> {
    params.validate()?;
    if plan.len() < 2 {
        return Err(Error::Validation(format!(
            "grouping needs at least 2 scan positions, got {}",
            plan.len()
        )));
    }
    plan.validate()?;

    let tree = KdTree2::build(&plan.positions);
    let n = plan.len();
    let mut groups = Vec::with_capacity(n * params.groups_per_reference);
    let mut skipped = Vec::new();

    for round in 0..params.groups_per_reference {
        for reference in 0..n {
            let (rx, ry) = plan.positions[reference];
            let candidates =
                tree.neighbors_in_range((rx, ry), params.d_min, params.d_max, params.top_n, reference);

            let mut buckets: [Vec<usize>; QUADRANT_COUNT] = Default::default();
            for &(idx, _) in &candidates {
                let (cx, cy) = plan.positions[idx];
                buckets[quadrant_of(cx - rx, cy - ry)].push(idx);
            }
            if buckets.iter().all(|b| b.is_empty()) {
                skipped.push(reference);
                continue;
            }

            let mut rng = seed.derive("group", (round * n + reference) as u64).rng();
            let mut channels = [usize::MAX; QUADRANT_COUNT];
            let mut used: Vec<usize> = Vec::with_capacity(QUADRANT_COUNT);
            for (q, bucket) in buckets.iter().enumerate() {
                if let Some(&pick) = bucket.choose(&mut rng) {
                    channels[q] = pick;
                    used.push(pick);
                }
            }

            // The reference itself may stand in for one empty quadrant.
            let empty: Vec<usize> =
                (0..QUADRANT_COUNT).filter(|&q| channels[q] == usize::MAX).collect();
            if let Some(&q) = empty.choose(&mut rng) {
                channels[q] = reference;
            }

            // Remaining empty quadrants draw from unused candidates in any
            // quadrant; those channels are flagged.
            let mut fallback_mask = 0u8;
            let mut complete = true;
            for q in 0..QUADRANT_COUNT {
                if channels[q] != usize::MAX {
                    continue;
                }
                let pool: Vec<usize> = candidates
                    .iter()
                    .map(|&(idx, _)| idx)
                    .filter(|idx| !used.contains(idx))
                    .collect();
                match pool.choose(&mut rng) {
                    Some(&pick) => {
                        channels[q] = pick;
                        used.push(pick);
                        fallback_mask |= 1 << q;
                    }
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                groups.push(Group { reference, channels, fallback_mask });
            } else {
                skipped.push(reference);
            }
        }
    }
    Ok(GroupSet { groups, skipped, params })
}

/// Fresh sampling of an existing grouping under a new seed; constraints
/// and parameters are unchanged.
pub fn regroup(plan: &ScanPlan, existing: &GroupSet, seed: RandomSeed) -> Result<GroupSet> {
    group_quadrants(plan, existing.params, seed)
}

/// Exhaustive re-check of a group set against the plan. Returns the
/// number of members verified. Unflagged non-self members must satisfy
/// the quadrant sign map and the distance band; flagged members must
/// still satisfy the distance band; the reference may appear at most
/// once per group.
pub fn verify_groupset(plan: &ScanPlan, set: &GroupSet) -> Result<usize> {
    let mut verified = 0;
    for group in &set.groups {
        let (rx, ry) = plan.positions[group.reference];
        let mut self_uses = 0;
        let mut seen: Vec<usize> = Vec::with_capacity(QUADRANT_COUNT);
        for q in 0..QUADRANT_COUNT {
            let member = group.channels[q];
            if member == group.reference {
                self_uses += 1;
                if self_uses > 1 {
                    return Err(Error::Validation(format!(
                        "reference {} used more than once in its group",
                        group.reference
                    )));
                }
                continue;
            }
            if seen.contains(&member) {
                return Err(Error::Validation(format!(
                    "member {member} repeated within group of reference {}",
                    group.reference
                )));
            }
            seen.push(member);

            let (mx, my) = plan.positions[member];
            let (dx, dy) = (mx - rx, my - ry);
            let dist = (dx * dx + dy * dy).sqrt();
            if dist < set.params.d_min || dist > set.params.d_max {
                return Err(Error::Validation(format!(
                    "member {member} at distance {dist} outside [{}, {}]",
                    set.params.d_min, set.params.d_max
                )));
            }
            if !group.is_fallback_channel(q) && quadrant_of(dx, dy) != q {
                return Err(Error::Validation(format!(
                    "member {member} of reference {} assigned to quadrant {q} but lies in {}",
                    group.reference,
                    quadrant_of(dx, dy)
                )));
            }
            verified += 1;
        }
    }
    Ok(verified)
}
