//! Channel assignment for the reference cell.
//!
//! Admission runs in this order:
//!
//! 1. A free original (X) channel serves the call, whatever its class.
//! 2. Otherwise one channel is borrowed. The first donor group `{3, 5, 7}` is
//!    searched first, up to `first_threshold` per donor; the second group
//!    `{2, 4, 6}` only picks up what the first could not supply.
//! 3. Non-real-time calls go straight onto the borrowed channel, inner zone.
//! 4. A real-time call takes over the lowest original channel held by a
//!    non-real-time call, which moves onto the borrowed channel. If no
//!    non-real-time call holds an original channel, the real-time call is
//!    served on the borrowed channel in the inner zone.
//!
//! Every borrowed channel protects the donor's same-band partners: their
//! matching channel is blocked if idle, or confined to the partner's inner
//! zone if busy. Protection is reference-counted and lifted on release.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{check_inner_ratio, CellId, ClusterLayout, Point, Zone};
use crate::spectrum::{ChannelId, ChannelState, SpectrumPlan, StateKind, SubBand, SubBandTag, TrafficClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RequestId(pub u64);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficRequest {
    pub id: RequestId,
    pub class: TrafficClass,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorrowPolicy {
    pub first_group: Vec<CellId>,
    pub second_group: Vec<CellId>,
    pub first_threshold: usize,
    pub second_threshold: usize,
    pub donors_per_group: usize,
}

impl BorrowPolicy {
    /// Groups `{3,5,7}` then `{2,4,6}`, thresholds a quarter of the pool, one
    /// donor per group.
    pub fn for_pool(channels_per_cell: u32) -> Self {
        let quarter = channels_per_cell as usize / 4;
        BorrowPolicy {
            first_group: vec![CellId(3), CellId(5), CellId(7)],
            second_group: vec![CellId(2), CellId(4), CellId(6)],
            first_threshold: quarter,
            second_threshold: quarter,
            donors_per_group: 1,
        }
    }

    pub fn with_thresholds(mut self, first: usize, second: usize) -> Self {
        self.first_threshold = first;
        self.second_threshold = second;
        self
    }

    pub fn validate(&self, layout: &ClusterLayout) -> Result<()> {
        let first: BTreeSet<_> = self.first_group.iter().collect();
        if self.second_group.iter().any(|c| first.contains(c)) {
            return Err(Error::param("second_group", "donor groups must be disjoint"));
        }
        for &cell in self.first_group.iter().chain(&self.second_group) {
            if cell == layout.reference() || layout.cell(cell)?.tier != 1 {
                return Err(Error::param(
                    "donor_group",
                    format!("cell {cell} is not a tier-1 neighbour"),
                ));
            }
        }
        if self.donors_per_group == 0 {
            return Err(Error::param("donors_per_group", "must be >= 1"));
        }
        Ok(())
    }

    fn groups(&self) -> [(&[CellId], usize); 2] {
        [
            (&self.first_group, self.first_threshold),
            (&self.second_group, self.second_threshold),
        ]
    }

    /// The threshold that applies to `donor`, if it belongs to a group.
    pub fn threshold_for(&self, donor: CellId) -> Option<usize> {
        self.groups()
            .into_iter()
            .find(|(group, _)| group.contains(&donor))
            .map(|(_, t)| t)
    }
}

/// Channels taken from one donor in one borrowing episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Borrowed {
    pub donor: CellId,
    pub channels: Vec<ChannelId>,
}

/// Borrow up to `demand` channels for `borrower`, moving them Free → LentOut.
///
/// Within a group the donor with the most Free channels goes first (ties to
/// the lowest id); a donor only qualifies while it is below its group
/// threshold. Partial fulfilment returns what was found; an empty result
/// means nothing was borrowable.
pub fn borrow_channels(
    plan: &mut SpectrumPlan,
    policy: &BorrowPolicy,
    borrower: CellId,
    demand: usize,
) -> Result<Vec<Borrowed>> {
    let mut remaining = demand;
    let mut out = Vec::new();
    for (group, threshold) in policy.groups() {
        let mut used = BTreeSet::new();
        for _ in 0..policy.donors_per_group {
            if remaining == 0 {
                return Ok(out);
            }
            let mut best: Option<(CellId, usize, usize)> = None;
            for &cell in group.iter().filter(|c| !used.contains(*c)) {
                let free = plan.free_count(cell)?;
                let allowance = threshold.saturating_sub(plan.lent_count(cell)?);
                if free == 0 || allowance == 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((b, bf, _)) => free > bf || (free == bf && cell < b),
                };
                if better {
                    best = Some((cell, free, allowance));
                }
            }
            let Some((donor, free, allowance)) = best else { break };
            used.insert(donor);
            let take = remaining.min(free).min(allowance);
            let ids: Vec<ChannelId> = plan
                .pool(donor)?
                .iter()
                .filter(|c| c.state == ChannelState::Free)
                .take(take)
                .map(|c| c.id)
                .collect();
            for &id in &ids {
                plan.transition(id, ChannelState::LentOut { to: borrower })?;
            }
            remaining -= ids.len();
            out.push(Borrowed { donor, channels: ids });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    AssignedOriginal,
    AssignedBorrowed,
    SwappedOntoOriginal,
    Blocked,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::AssignedOriginal => "AssignedOriginal",
            Outcome::AssignedBorrowed => "AssignedBorrowed",
            Outcome::SwappedOntoOriginal => "SwappedOntoOriginal",
            Outcome::Blocked => "Blocked",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bifurcation and blocking actions taken to protect a borrowed channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideEffect {
    BifurcateCell(CellId),
    Block {
        cell: CellId,
        channel: ChannelId,
    },
    MoveToInner {
        cell: CellId,
        channel: ChannelId,
    },
    Unblock {
        cell: CellId,
        channel: ChannelId,
    },
    /// A blocked channel reactivated for an inner-zone call.
    ReactivateInner {
        cell: CellId,
        channel: ChannelId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Displacement {
    pub request: RequestId,
    pub channel: ChannelId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentDecision {
    pub outcome: Outcome,
    pub channel: Option<ChannelId>,
    pub displaced: Option<Displacement>,
    pub side_effects: Vec<SideEffect>,
}

impl AssignmentDecision {
    fn blocked() -> Self {
        AssignmentDecision {
            outcome: Outcome::Blocked,
            channel: None,
            displaced: None,
            side_effects: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseOutcome {
    pub channel: ChannelId,
    pub side_effects: Vec<SideEffect>,
}

/// A call currently in service.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Call {
    pub class: TrafficClass,
    pub cell: CellId,
    pub channel: ChannelId,
    pub borrowed: bool,
    pub zone: Zone,
    /// Set when a real-time call landed on a borrowed channel because no
    /// non-real-time call held an original channel.
    pub housed_by_bifurcation: bool,
}

/// Single-writer state machine over the spectrum plan.
#[derive(Debug, Clone)]
pub struct Engine {
    layout: ClusterLayout,
    plan: SpectrumPlan,
    policy: BorrowPolicy,
    inner_ratio: f64,
    calls: BTreeMap<RequestId, Call>,
    protection: BTreeMap<ChannelId, usize>,
}

impl Engine {
    pub fn new(layout: ClusterLayout, plan: SpectrumPlan, policy: BorrowPolicy, inner_ratio: f64) -> Result<Self> {
        check_inner_ratio(inner_ratio)?;
        policy.validate(&layout)?;
        for site in layout.cells() {
            plan.pool(site.id)?;
        }
        Ok(Engine {
            layout,
            plan,
            policy,
            inner_ratio,
            calls: BTreeMap::new(),
            protection: BTreeMap::new(),
        })
    }

    /// Fresh engine over a new layout and plan.
    pub fn with_defaults(cell_radius: f64, tier_count: u32, channels_per_cell: u32, inner_ratio: f64) -> Result<Self> {
        let layout = ClusterLayout::build(cell_radius, tier_count)?;
        let plan = SpectrumPlan::new(&layout, channels_per_cell)?;
        Self::new(layout, plan, BorrowPolicy::for_pool(channels_per_cell), inner_ratio)
    }

    pub fn layout(&self) -> &ClusterLayout {
        &self.layout
    }

    pub fn plan(&self) -> &SpectrumPlan {
        &self.plan
    }

    pub fn policy(&self) -> &BorrowPolicy {
        &self.policy
    }

    pub fn calls(&self) -> &BTreeMap<RequestId, Call> {
        &self.calls
    }

    pub fn call(&self, id: RequestId) -> Option<&Call> {
        self.calls.get(&id)
    }

    pub fn protection_count(&self, channel: ChannelId) -> usize {
        self.protection.get(&channel).copied().unwrap_or(0)
    }

    fn reference(&self) -> CellId {
        self.layout.reference()
    }

    fn original_tag(&self, class: TrafficClass, zone: Zone) -> Result<SubBandTag> {
        let label = self.layout.cell(self.reference())?.band_label;
        let level = match (class, zone) {
            (TrafficClass::RealTime, Zone::Outer) => SubBand::Prime,
            (TrafficClass::RealTime, Zone::Inner) => SubBand::DoublePrime,
            (TrafficClass::NonRealTime, _) => SubBand::TriplePrime,
        };
        Ok(SubBandTag { label, level })
    }

    fn tag_of(&self, cell: CellId, level: SubBand) -> Result<SubBandTag> {
        Ok(SubBandTag {
            label: self.layout.cell(cell)?.band_label,
            level,
        })
    }

    fn occupy_original(&mut self, channel: ChannelId, class: TrafficClass, zone: Zone) -> Result<()> {
        let reference = self.reference();
        self.plan.transition(
            channel,
            ChannelState::Occupied {
                class,
                zone,
                serving: reference,
            },
        )?;
        let tag = self.original_tag(class, zone)?;
        self.plan.set_tag(channel, Some(tag))
    }

    fn serve_on_borrowed(&mut self, channel: ChannelId, class: TrafficClass) -> Result<()> {
        let reference = self.reference();
        let donor = self.plan.channel(channel)?.owner;
        self.plan.serve_borrowed(reference, channel, class, Zone::Inner)?;
        let tag = self.tag_of(donor, SubBand::DoublePrime)?;
        self.plan.set_borrowed_tag(reference, channel, Some(tag))
    }

    /// Admit a call arriving in the reference cell.
    pub fn admit(&mut self, request: TrafficRequest) -> Result<AssignmentDecision> {
        if self.calls.contains_key(&request.id) {
            return Err(Error::DuplicateRequest(request.id));
        }
        let reference = self.reference();
        if !self.layout.contains(reference, request.position)? {
            return Err(Error::OutOfScopeRequest {
                id: request.id,
                position: request.position,
            });
        }
        let zone = self.layout.zone_of(reference, request.position, self.inner_ratio)?;

        if let Some(channel) = self.plan.first_free(reference)? {
            self.occupy_original(channel, request.class, zone)?;
            self.calls.insert(
                request.id,
                Call {
                    class: request.class,
                    cell: reference,
                    channel,
                    borrowed: false,
                    zone,
                    housed_by_bifurcation: false,
                },
            );
            return Ok(AssignmentDecision {
                outcome: Outcome::AssignedOriginal,
                channel: Some(channel),
                displaced: None,
                side_effects: Vec::new(),
            });
        }

        let borrowed = borrow_channels(&mut self.plan, &self.policy, reference, 1)?;
        let Some(borrowed_channel) = borrowed.iter().flat_map(|b| b.channels.iter()).copied().next() else {
            return Ok(AssignmentDecision::blocked());
        };
        let side_effects = self.apply_interference_control(&borrowed)?;

        let swap_target = match request.class {
            TrafficClass::RealTime => self.lowest_nrt_original()?,
            TrafficClass::NonRealTime => None,
        };

        let decision = match (request.class, swap_target) {
            (TrafficClass::RealTime, Some((original, displaced_id))) => {
                // the non-real-time call moves out to the borrowed channel
                self.plan.transition(original, ChannelState::Free)?;
                self.serve_on_borrowed(borrowed_channel, TrafficClass::NonRealTime)?;
                let moved = self.calls.get_mut(&displaced_id).expect("call on original channel");
                moved.channel = borrowed_channel;
                moved.borrowed = true;
                moved.zone = Zone::Inner;

                self.occupy_original(original, TrafficClass::RealTime, zone)?;
                self.calls.insert(
                    request.id,
                    Call {
                        class: TrafficClass::RealTime,
                        cell: reference,
                        channel: original,
                        borrowed: false,
                        zone,
                        housed_by_bifurcation: false,
                    },
                );
                AssignmentDecision {
                    outcome: Outcome::SwappedOntoOriginal,
                    channel: Some(original),
                    displaced: Some(Displacement {
                        request: displaced_id,
                        channel: borrowed_channel,
                    }),
                    side_effects,
                }
            }
            (class, _) => {
                self.serve_on_borrowed(borrowed_channel, class)?;
                self.calls.insert(
                    request.id,
                    Call {
                        class,
                        cell: reference,
                        channel: borrowed_channel,
                        borrowed: true,
                        zone: Zone::Inner,
                        housed_by_bifurcation: class == TrafficClass::RealTime,
                    },
                );
                AssignmentDecision {
                    outcome: Outcome::AssignedBorrowed,
                    channel: Some(borrowed_channel),
                    displaced: None,
                    side_effects,
                }
            }
        };
        Ok(decision)
    }

    /// Lowest original channel carrying a non-real-time call, with that call.
    fn lowest_nrt_original(&self) -> Result<Option<(ChannelId, RequestId)>> {
        let reference = self.reference();
        let Some(channel) = self
            .plan
            .pool(reference)?
            .iter()
            .find(|c| {
                matches!(
                    c.state,
                    ChannelState::Occupied {
                        class: TrafficClass::NonRealTime,
                        ..
                    }
                )
            })
            .map(|c| c.id)
        else {
            return Ok(None);
        };
        let holder = self
            .calls
            .iter()
            .find(|(_, call)| !call.borrowed && call.channel == channel)
            .map(|(&id, _)| id)
            .ok_or_else(|| Error::InvariantViolation(format!("no call recorded on channel {channel}")))?;
        Ok(Some((channel, holder)))
    }

    /// Protect freshly borrowed channels in the donors' same-band partners.
    ///
    /// Idle matching channels are blocked; busy ones are confined to the
    /// partner's inner zone, which bifurcates that partner. The reference
    /// cell is bifurcated whenever a borrowed channel is in service.
    pub fn apply_interference_control(&mut self, borrowed: &[Borrowed]) -> Result<Vec<SideEffect>> {
        let mut effects = Vec::new();
        if borrowed.iter().all(|b| b.channels.is_empty()) {
            return Ok(effects);
        }
        for b in borrowed {
            let partners = self.layout.same_band_partners(b.donor)?;
            for &lent in &b.channels {
                let index = self.plan.channel(lent)?.index;
                self.plan.set_tag(lent, Some(self.tag_of(b.donor, SubBand::Prime)?))?;
                for &partner in &partners {
                    let matching = self.plan.channel_id(partner, index)?;
                    *self.protection.entry(matching).or_default() += 1;
                    match self.plan.channel(matching)?.state {
                        ChannelState::Free => {
                            self.plan.transition(matching, ChannelState::Blocked)?;
                            self.plan
                                .set_tag(matching, Some(self.tag_of(partner, SubBand::QuadruplePrime)?))?;
                            effects.push(SideEffect::Block {
                                cell: partner,
                                channel: matching,
                            });
                        }
                        ChannelState::Occupied { .. } => {
                            self.plan.rezone(matching, Zone::Inner)?;
                            self.plan
                                .set_tag(matching, Some(self.tag_of(partner, SubBand::TriplePrime)?))?;
                            if let Some(call) = self.calls.values_mut().find(|c| !c.borrowed && c.channel == matching) {
                                call.zone = Zone::Inner;
                            }
                            if !effects.contains(&SideEffect::BifurcateCell(partner)) {
                                effects.push(SideEffect::BifurcateCell(partner));
                            }
                            effects.push(SideEffect::MoveToInner {
                                cell: partner,
                                channel: matching,
                            });
                        }
                        // already protected by an earlier borrow
                        ChannelState::Blocked => {}
                        ChannelState::LentOut { .. } => {
                            return Err(Error::InvariantViolation(format!(
                                "matching channel {matching} of a borrowed channel is itself lent out"
                            )))
                        }
                    }
                }
            }
        }
        effects.push(SideEffect::BifurcateCell(self.reference()));
        Ok(effects)
    }

    fn lift_protection(&mut self, lent: ChannelId) -> Result<Vec<SideEffect>> {
        let donor = self.plan.channel(lent)?.owner;
        let index = self.plan.channel(lent)?.index;
        let mut effects = Vec::new();
        for partner in self.layout.same_band_partners(donor)? {
            let matching = self.plan.channel_id(partner, index)?;
            let count = self
                .protection
                .get_mut(&matching)
                .ok_or_else(|| Error::InvariantViolation(format!("channel {matching} was not protected")))?;
            *count -= 1;
            if *count > 0 {
                continue;
            }
            self.protection.remove(&matching);
            self.plan.set_tag(matching, None)?;
            if self.plan.channel(matching)?.state == ChannelState::Blocked {
                self.plan.transition(matching, ChannelState::Free)?;
                effects.push(SideEffect::Unblock {
                    cell: partner,
                    channel: matching,
                });
            }
        }
        Ok(effects)
    }

    /// Admit a call local to a non-reference cell.
    ///
    /// Free channels go first. Failing that, a blocked channel is reactivated
    /// for the cell's inner zone. Returns `None` when the cell is full.
    pub fn admit_local(
        &mut self,
        id: RequestId,
        cell: CellId,
        class: TrafficClass,
        zone: Zone,
    ) -> Result<Option<(ChannelId, Vec<SideEffect>)>> {
        if self.calls.contains_key(&id) {
            return Err(Error::DuplicateRequest(id));
        }
        if cell == self.reference() {
            return Err(Error::param("cell", "use admit for the reference cell"));
        }
        let pool = self.plan.pool(cell)?;
        let free = pool.iter().find(|c| c.state == ChannelState::Free).map(|c| c.id);
        let blocked = pool.iter().find(|c| c.state == ChannelState::Blocked).map(|c| c.id);
        let (channel, zone, effects) = match (free, blocked) {
            (Some(ch), _) => (ch, zone, Vec::new()),
            (None, Some(ch)) => (
                ch,
                Zone::Inner,
                vec![
                    SideEffect::BifurcateCell(cell),
                    SideEffect::ReactivateInner { cell, channel: ch },
                ],
            ),
            (None, None) => return Ok(None),
        };
        self.plan.transition(
            channel,
            ChannelState::Occupied {
                class,
                zone,
                serving: cell,
            },
        )?;
        if !effects.is_empty() {
            self.plan
                .set_tag(channel, Some(self.tag_of(cell, SubBand::TriplePrime)?))?;
        }
        self.calls.insert(
            id,
            Call {
                class,
                cell,
                channel,
                borrowed: false,
                zone,
                housed_by_bifurcation: false,
            },
        );
        Ok(Some((channel, effects)))
    }

    /// End a call. Borrowed channels go back to their donor and the
    /// protection they induced is lifted.
    pub fn release(&mut self, id: RequestId) -> Result<ReleaseOutcome> {
        let call = self.calls.remove(&id).ok_or(Error::UnknownRequest(id))?;
        let mut side_effects = Vec::new();
        if call.borrowed {
            self.plan.vacate_borrowed(call.cell, call.channel)?;
            self.plan.set_borrowed_tag(call.cell, call.channel, None)?;
            self.plan.transition(call.channel, ChannelState::Free)?;
            self.plan.set_tag(call.channel, None)?;
            side_effects = self.lift_protection(call.channel)?;
        } else {
            self.plan.transition(call.channel, ChannelState::Free)?;
            if self.protection_count(call.channel) > 0 {
                // still shielding a borrowed channel
                self.plan.transition(call.channel, ChannelState::Blocked)?;
                let tag = self.tag_of(call.cell, SubBand::QuadruplePrime)?;
                self.plan.set_tag(call.channel, Some(tag))?;
                side_effects.push(SideEffect::Block {
                    cell: call.cell,
                    channel: call.channel,
                });
            } else {
                self.plan.set_tag(call.channel, None)?;
            }
        }
        Ok(ReleaseOutcome {
            channel: call.channel,
            side_effects,
        })
    }

    /// Whether any borrowed channel is currently in service at the reference.
    pub fn reference_bifurcated(&self) -> bool {
        self.plan
            .borrowed_by(self.reference())
            .iter()
            .any(|r| r.state.kind() == StateKind::Occupied)
    }

    /// Spectrum conservation plus the engine's own bookkeeping rules.
    pub fn check_invariants(&self) -> Result<()> {
        self.plan.check_invariants()?;
        let violation = |msg: String| Err(Error::InvariantViolation(msg));
        let reference = self.reference();
        for (&id, call) in &self.calls {
            let state = if call.borrowed {
                self.plan
                    .borrowed_by(call.cell)
                    .iter()
                    .find(|r| r.channel == call.channel)
                    .map(|r| r.state)
            } else {
                Some(self.plan.channel(call.channel)?.state)
            };
            match state {
                Some(ChannelState::Occupied { class, zone, serving })
                    if class == call.class && serving == call.cell && zone == call.zone => {}
                other => return violation(format!("call {id} does not match channel state {other:?}")),
            }
            if call.borrowed && (call.cell != reference || call.zone != Zone::Inner) {
                return violation(format!("borrowed call {id} not in the reference inner zone"));
            }
        }
        let served = self.calls.len();
        let occupied: usize = self
            .plan
            .cell_ids()
            .map(|c| self.plan.count(c, StateKind::Occupied).unwrap_or(0))
            .sum::<usize>()
            + self
                .plan
                .cell_ids()
                .flat_map(|c| self.plan.borrowed_by(c))
                .filter(|r| r.state.kind() == StateKind::Occupied)
                .count();
        if served != occupied {
            return violation(format!("{served} calls but {occupied} occupied channels"));
        }
        // idle borrowed records are never left behind
        if self
            .plan
            .borrowed_by(reference)
            .iter()
            .any(|r| r.state == ChannelState::Free)
        {
            return violation("idle borrowed channel held by the reference cell".into());
        }
        for cell in self.plan.cell_ids() {
            if let Some(threshold) = self.policy.threshold_for(cell) {
                let lent = self.plan.lent_count(cell)?;
                if lent > threshold {
                    return violation(format!("cell {cell} lent {lent} > threshold {threshold}"));
                }
            }
        }
        for (&channel, &count) in &self.protection {
            let state = self.plan.channel(channel)?.state;
            if count == 0
                || !matches!(
                    state,
                    ChannelState::Blocked | ChannelState::Occupied { zone: Zone::Inner, .. }
                )
            {
                return violation(format!("protected channel {channel} in state {state:?}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mini(per_cell: u32, threshold: usize) -> Engine {
        let layout = ClusterLayout::build(1.0, 1).unwrap();
        let plan = SpectrumPlan::new(&layout, per_cell).unwrap();
        let policy = BorrowPolicy::for_pool(per_cell).with_thresholds(threshold, threshold);
        Engine::new(layout, plan, policy, 0.5).unwrap()
    }

    fn request(id: u64, class: TrafficClass, x: f64) -> TrafficRequest {
        TrafficRequest {
            id: RequestId(id),
            class,
            position: Point::new(x, 0.0),
        }
    }

    fn load(engine: &mut Engine, cell: u32, n: usize, next_id: &mut u64) {
        for _ in 0..n {
            *next_id += 1;
            engine
                .admit_local(
                    RequestId(*next_id),
                    CellId(cell),
                    TrafficClass::NonRealTime,
                    Zone::Outer,
                )
                .unwrap()
                .unwrap();
        }
    }

    fn frees(plan: &SpectrumPlan, cells: &[u32]) -> Vec<usize> {
        cells.iter().map(|&c| plan.free_count(CellId(c)).unwrap()).collect()
    }

    // Hand traces of the group search: first group {3,5,7} capped at A_Th,
    // then {2,4,6} capped at B_Th, one donor per group.
    #[test]
    fn borrow_single_donor() {
        let mut e = mini(60, 20);
        let mut id = 1000;
        load(&mut e, 3, 55, &mut id);
        load(&mut e, 5, 60, &mut id);
        load(&mut e, 7, 35, &mut id);
        assert_eq!(frees(e.plan(), &[3, 5, 7]), vec![5, 0, 25]);
        let policy = e.policy().clone();
        let got = borrow_channels(&mut e.plan, &policy, CellId(1), 10).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].donor, CellId(7));
        assert_eq!(got[0].channels.len(), 10);
    }

    #[test]
    fn borrow_falls_through_to_second_group() {
        let mut e = mini(60, 20);
        let mut id = 1000;
        load(&mut e, 3, 55, &mut id);
        load(&mut e, 5, 60, &mut id);
        load(&mut e, 7, 35, &mut id);
        load(&mut e, 2, 60, &mut id);
        load(&mut e, 4, 52, &mut id);
        load(&mut e, 6, 20, &mut id);
        assert_eq!(frees(e.plan(), &[2, 4, 6]), vec![0, 8, 40]);
        let policy = e.policy().clone();
        let got = borrow_channels(&mut e.plan, &policy, CellId(1), 30).unwrap();
        let summary: Vec<_> = got.iter().map(|b| (b.donor, b.channels.len())).collect();
        assert_eq!(summary, vec![(CellId(7), 20), (CellId(6), 10)]);
        assert_eq!(e.plan().lent_count(CellId(7)).unwrap(), 20);
    }

    #[test]
    fn borrow_nothing_available() {
        let mut e = mini(4, 2);
        let mut id = 1000;
        for c in 2..=7 {
            load(&mut e, c, 4, &mut id);
        }
        let policy = e.policy().clone();
        assert!(borrow_channels(&mut e.plan, &policy, CellId(1), 10).unwrap().is_empty());
    }

    #[test]
    fn borrow_respects_cumulative_threshold() {
        let mut e = mini(8, 2);
        let policy = e.policy().clone();
        let first = borrow_channels(&mut e.plan, &policy, CellId(1), 2).unwrap();
        assert_eq!(first[0].donor, CellId(3));
        // cell 3 is at its cap; the tie between 5 and 7 goes to 5
        let second = borrow_channels(&mut e.plan, &policy, CellId(1), 1).unwrap();
        assert_eq!(second[0].donor, CellId(5));
    }

    #[test]
    fn original_first() {
        let mut e = mini(4, 2);
        let d = e.admit(request(1, TrafficClass::RealTime, 0.2)).unwrap();
        assert_eq!(d.outcome, Outcome::AssignedOriginal);
        assert_eq!(d.channel, Some(ChannelId(0)));
        assert!(d.side_effects.is_empty());
        assert_eq!(e.call(RequestId(1)).unwrap().zone, Zone::Inner);
        e.check_invariants().unwrap();
    }

    #[test]
    fn real_time_swaps_onto_original() {
        let mut e = mini(4, 2);
        e.admit(request(1, TrafficClass::RealTime, 0.2)).unwrap();
        e.admit(request(2, TrafficClass::NonRealTime, 0.8)).unwrap();
        e.admit(request(3, TrafficClass::RealTime, 0.8)).unwrap();
        e.admit(request(4, TrafficClass::NonRealTime, 0.2)).unwrap();
        let d = e.admit(request(5, TrafficClass::RealTime, 0.8)).unwrap();
        assert_eq!(d.outcome, Outcome::SwappedOntoOriginal);
        assert_eq!(d.channel, Some(ChannelId(1)));
        let displaced = d.displaced.unwrap();
        assert_eq!(displaced.request, RequestId(2));
        let moved = e.call(RequestId(2)).unwrap();
        assert!(moved.borrowed);
        assert_eq!(moved.zone, Zone::Inner);
        assert_eq!(moved.channel, displaced.channel);
        // first group, tie broken to cell 3
        assert_eq!(e.plan().channel(displaced.channel).unwrap().owner, CellId(3));
        assert!(d.side_effects.contains(&SideEffect::BifurcateCell(CellId(1))));
        assert!(e.reference_bifurcated());
        e.check_invariants().unwrap();
    }

    #[test]
    fn non_real_time_goes_to_borrowed_inner() {
        let mut e = mini(4, 2);
        for i in 0..4 {
            e.admit(request(i, TrafficClass::RealTime, 0.8)).unwrap();
        }
        let d = e.admit(request(9, TrafficClass::NonRealTime, 0.8)).unwrap();
        assert_eq!(d.outcome, Outcome::AssignedBorrowed);
        let call = e.call(RequestId(9)).unwrap();
        assert!(call.borrowed);
        assert_eq!(call.zone, Zone::Inner);
        assert!(d.side_effects.contains(&SideEffect::BifurcateCell(CellId(1))));
        e.check_invariants().unwrap();
    }

    #[test]
    fn real_time_housed_by_bifurcation_when_no_nrt_on_originals() {
        let mut e = mini(4, 2);
        for i in 0..4 {
            e.admit(request(i, TrafficClass::RealTime, 0.8)).unwrap();
        }
        let d = e.admit(request(9, TrafficClass::RealTime, 0.8)).unwrap();
        assert_eq!(d.outcome, Outcome::AssignedBorrowed);
        assert!(e.call(RequestId(9)).unwrap().housed_by_bifurcation);
    }

    #[test]
    fn blocked_when_nothing_borrowable() {
        let mut e = mini(2, 1);
        let mut id = 100;
        for c in 2..=7 {
            load(&mut e, c, 2, &mut id);
        }
        e.admit(request(1, TrafficClass::NonRealTime, 0.1)).unwrap();
        e.admit(request(2, TrafficClass::NonRealTime, 0.1)).unwrap();
        let d = e.admit(request(3, TrafficClass::RealTime, 0.1)).unwrap();
        assert_eq!(d, AssignmentDecision::blocked());
        assert!(e.call(RequestId(3)).is_none());
    }

    #[test]
    fn admit_errors() {
        let mut e = mini(4, 2);
        let outside = TrafficRequest {
            id: RequestId(1),
            class: TrafficClass::RealTime,
            position: Point::new(1.5, 0.0),
        };
        assert!(matches!(e.admit(outside), Err(Error::OutOfScopeRequest { .. })));
        e.admit(request(2, TrafficClass::RealTime, 0.1)).unwrap();
        assert_eq!(
            e.admit(request(2, TrafficClass::RealTime, 0.1)),
            Err(Error::DuplicateRequest(RequestId(2)))
        );
    }

    #[test]
    fn idle_partners_are_blocked_not_bifurcated() {
        let mut e = mini(10, 10);
        let lent: Vec<_> = (0..10).map(|k| e.plan().channel_id(CellId(6), k).unwrap()).collect();
        for &ch in &lent {
            e.plan.transition(ch, ChannelState::LentOut { to: CellId(1) }).unwrap();
        }
        let effects = e
            .apply_interference_control(&[Borrowed {
                donor: CellId(6),
                channels: lent,
            }])
            .unwrap();
        let blocks = effects.iter().filter(|s| matches!(s, SideEffect::Block { .. })).count();
        assert_eq!(blocks, 20);
        assert!(!effects.contains(&SideEffect::BifurcateCell(CellId(2))));
        assert!(!effects.contains(&SideEffect::BifurcateCell(CellId(4))));
        assert_eq!(e.plan().count(CellId(2), StateKind::Blocked).unwrap(), 10);
    }

    #[test]
    fn partially_occupied_partner_is_bifurcated() {
        let mut e = mini(10, 10);
        let mut id = 100;
        load(&mut e, 2, 3, &mut id);
        let lent: Vec<_> = (0..10).map(|k| e.plan().channel_id(CellId(6), k).unwrap()).collect();
        for &ch in &lent {
            e.plan.transition(ch, ChannelState::LentOut { to: CellId(1) }).unwrap();
        }
        let effects = e
            .apply_interference_control(&[Borrowed {
                donor: CellId(6),
                channels: lent,
            }])
            .unwrap();
        let in_cell2 = |pred: fn(&SideEffect) -> bool| effects.iter().filter(|s| pred(s)).count();
        assert_eq!(
            in_cell2(|s| matches!(s, SideEffect::MoveToInner { cell: CellId(2), .. })),
            3
        );
        assert_eq!(in_cell2(|s| matches!(s, SideEffect::Block { cell: CellId(2), .. })), 7);
        assert!(effects.contains(&SideEffect::BifurcateCell(CellId(2))));
        assert!(!effects.contains(&SideEffect::BifurcateCell(CellId(4))));
        let tag = |level| SubBandTag {
            label: e.layout().cell(CellId(2)).unwrap().band_label,
            level,
        };
        assert_eq!(e.plan().tagged_count(CellId(2), tag(SubBand::TriplePrime)).unwrap(), 3);
        assert_eq!(
            e.plan().tagged_count(CellId(2), tag(SubBand::QuadruplePrime)).unwrap(),
            7
        );
        assert!(e
            .calls()
            .values()
            .filter(|c| c.cell == CellId(2))
            .all(|c| c.zone == Zone::Inner));
    }

    #[test]
    fn blocked_partner_channel_reactivates_inner() {
        let mut e = mini(2, 2);
        let mut id = 100;
        e.admit(request(1, TrafficClass::NonRealTime, 0.1)).unwrap();
        e.admit(request(2, TrafficClass::NonRealTime, 0.1)).unwrap();
        // borrow from cell 3 (first group, lowest id on ties): partners 5 and 7
        let d = e.admit(request(3, TrafficClass::NonRealTime, 0.1)).unwrap();
        let lent = d.channel.unwrap();
        assert_eq!(e.plan().channel(lent).unwrap().owner, CellId(3));
        let matching = e.plan().channel_id(CellId(5), 0).unwrap();
        assert_eq!(e.plan().channel(matching).unwrap().state, ChannelState::Blocked);

        load(&mut e, 5, 1, &mut id); // takes the remaining free channel
        let (ch, effects) = e
            .admit_local(RequestId(500), CellId(5), TrafficClass::RealTime, Zone::Outer)
            .unwrap()
            .unwrap();
        assert_eq!(ch, matching);
        assert!(effects.contains(&SideEffect::ReactivateInner {
            cell: CellId(5),
            channel: ch
        }));
        assert_eq!(e.call(RequestId(500)).unwrap().zone, Zone::Inner);
        e.check_invariants().unwrap();

        // local release keeps the protection in force
        let out = e.release(RequestId(500)).unwrap();
        assert_eq!(
            out.side_effects,
            vec![SideEffect::Block {
                cell: CellId(5),
                channel: ch
            }]
        );
        assert_eq!(e.plan().channel(ch).unwrap().state, ChannelState::Blocked);
        e.check_invariants().unwrap();
    }

    #[test]
    fn release_borrowed_lifts_blocks() {
        let mut e = mini(2, 2);
        e.admit(request(1, TrafficClass::NonRealTime, 0.1)).unwrap();
        e.admit(request(2, TrafficClass::NonRealTime, 0.1)).unwrap();
        let d = e.admit(request(3, TrafficClass::NonRealTime, 0.1)).unwrap();
        let lent = d.channel.unwrap();
        let out = e.release(RequestId(3)).unwrap();
        assert_eq!(out.channel, lent);
        assert_eq!(e.plan().channel(lent).unwrap().state, ChannelState::Free);
        let unblocks = out
            .side_effects
            .iter()
            .filter(|s| matches!(s, SideEffect::Unblock { .. }))
            .count();
        assert_eq!(unblocks, 2);
        for c in [5, 7] {
            assert_eq!(e.plan().count(CellId(c), StateKind::Blocked).unwrap(), 0);
        }
        assert!(!e.reference_bifurcated());
        e.check_invariants().unwrap();
    }

    #[test]
    fn release_original_and_twice() {
        let mut e = mini(4, 2);
        e.admit(request(1, TrafficClass::RealTime, 0.1)).unwrap();
        let out = e.release(RequestId(1)).unwrap();
        assert_eq!(e.plan().channel(out.channel).unwrap().state, ChannelState::Free);
        assert_eq!(e.release(RequestId(1)), Err(Error::UnknownRequest(RequestId(1))));
    }

    #[test]
    fn overlapping_protection_is_reference_counted() {
        let mut e = mini(4, 4);
        let lent = e.plan().channel_id(CellId(3), 1).unwrap();
        e.plan
            .transition(lent, ChannelState::LentOut { to: CellId(1) })
            .unwrap();
        let borrow = Borrowed {
            donor: CellId(3),
            channels: vec![lent],
        };
        e.apply_interference_control(std::slice::from_ref(&borrow)).unwrap();
        e.apply_interference_control(std::slice::from_ref(&borrow)).unwrap();
        let shared = e.plan().channel_id(CellId(5), 1).unwrap();
        assert_eq!(e.protection_count(shared), 2);
        assert!(e.lift_protection(lent).unwrap().is_empty());
        assert_eq!(e.plan().channel(shared).unwrap().state, ChannelState::Blocked);
        assert_eq!(e.lift_protection(lent).unwrap().len(), 2);
        assert_eq!(e.plan().channel(shared).unwrap().state, ChannelState::Free);
        assert_eq!(e.protection_count(shared), 0);
    }
}
