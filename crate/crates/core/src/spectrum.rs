//! Per-cell channel pools and the channel lifecycle.
//!
//! Every cell owns `channels_per_cell` channels for its whole life. Channel
//! `k` of a band is the same frequency in every cell carrying that band, which
//! is what makes a borrowed channel interfere with its partners' channel `k`.
//!
//! Lending is two records: the owner keeps the channel as `LentOut`, and the
//! borrower holds a `Free` or `Occupied` record pointing at the same id.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{BandLabel, CellId, ClusterLayout, Zone};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u32);

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrafficClass {
    RealTime,
    NonRealTime,
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficClass::RealTime => "RT",
            TrafficClass::NonRealTime => "NRT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelState {
    Free,
    Occupied {
        class: TrafficClass,
        zone: Zone,
        serving: CellId,
    },
    LentOut {
        to: CellId,
    },
    Blocked,
}

/// State discriminant, used in error reports and counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateKind {
    Free,
    Occupied,
    LentOut,
    Blocked,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl ChannelState {
    pub fn kind(&self) -> StateKind {
        match self {
            ChannelState::Free => StateKind::Free,
            ChannelState::Occupied { .. } => StateKind::Occupied,
            ChannelState::LentOut { .. } => StateKind::LentOut,
            ChannelState::Blocked => StateKind::Blocked,
        }
    }
}

/// Prime level of a sub-band: `X1'`, `X1''`, `X1'''`, `A2''''`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubBand {
    Prime,
    DoublePrime,
    TriplePrime,
    QuadruplePrime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubBandTag {
    pub label: BandLabel,
    pub level: SubBand,
}

impl fmt::Display for SubBandTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let primes = match self.level {
            SubBand::Prime => 1,
            SubBand::DoublePrime => 2,
            SubBand::TriplePrime => 3,
            SubBand::QuadruplePrime => 4,
        };
        write!(f, "{}{}", self.label, "'".repeat(primes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub id: ChannelId,
    pub owner: CellId,
    pub band: BandLabel,
    /// Position within the band; equal indices share a frequency.
    pub index: u32,
    pub sub_band: Option<SubBandTag>,
    pub state: ChannelState,
}

/// Borrower-side view of a channel lent by `donor`.
#[derive(Debug, Clone, PartialEq)]
pub struct BorrowedChannel {
    pub channel: ChannelId,
    pub donor: CellId,
    pub sub_band: Option<SubBandTag>,
    /// Only `Free` or `Occupied`.
    pub state: ChannelState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPlan {
    channels_per_cell: u32,
    pools: BTreeMap<CellId, Vec<Channel>>,
    borrowed: BTreeMap<CellId, Vec<BorrowedChannel>>,
}

fn legal(from: &ChannelState, to: &ChannelState) -> bool {
    use ChannelState::*;
    matches!(
        (from, to),
        (Free, Occupied { .. })
            | (Free, LentOut { .. })
            | (Free, Blocked)
            | (Occupied { .. }, Free)
            | (LentOut { .. }, Free)
            | (Blocked, Free)
            | (Blocked, Occupied { .. })
    )
}

impl SpectrumPlan {
    /// Every cell of `layout` gets `channels_per_cell` Free channels of its band.
    pub fn new(layout: &ClusterLayout, channels_per_cell: u32) -> Result<Self> {
        if channels_per_cell == 0 {
            return Err(Error::param("channels_per_cell", "must be >= 1"));
        }
        let pools = layout
            .cells()
            .iter()
            .map(|site| {
                let base = (site.id.0 - 1) * channels_per_cell;
                let pool = (0..channels_per_cell)
                    .map(|k| Channel {
                        id: ChannelId(base + k),
                        owner: site.id,
                        band: site.band_label,
                        index: k,
                        sub_band: None,
                        state: ChannelState::Free,
                    })
                    .collect();
                (site.id, pool)
            })
            .collect();
        Ok(SpectrumPlan {
            channels_per_cell,
            pools,
            borrowed: BTreeMap::new(),
        })
    }

    pub fn channels_per_cell(&self) -> u32 {
        self.channels_per_cell
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        self.pools.keys().copied()
    }

    pub fn total_channels(&self) -> usize {
        self.pools.values().map(Vec::len).sum()
    }

    pub fn pool(&self, cell: CellId) -> Result<&[Channel]> {
        self.pools.get(&cell).map(Vec::as_slice).ok_or(Error::UnknownCell(cell))
    }

    /// Channels this cell currently holds from donors.
    pub fn borrowed_by(&self, cell: CellId) -> &[BorrowedChannel] {
        self.borrowed.get(&cell).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn channel_id(&self, cell: CellId, index: u32) -> Result<ChannelId> {
        if !self.pools.contains_key(&cell) {
            return Err(Error::UnknownCell(cell));
        }
        if index >= self.channels_per_cell {
            return Err(Error::param("index", format!("{index} >= {}", self.channels_per_cell)));
        }
        Ok(ChannelId((cell.0 - 1) * self.channels_per_cell + index))
    }

    fn locate(&self, id: ChannelId) -> Result<(CellId, usize)> {
        let owner = CellId(id.0 / self.channels_per_cell + 1);
        let index = (id.0 % self.channels_per_cell) as usize;
        if self.pools.contains_key(&owner) {
            Ok((owner, index))
        } else {
            Err(Error::UnknownChannel(id))
        }
    }

    pub fn channel(&self, id: ChannelId) -> Result<&Channel> {
        let (owner, index) = self.locate(id)?;
        Ok(&self.pools[&owner][index])
    }

    fn channel_mut(&mut self, id: ChannelId) -> Result<&mut Channel> {
        let (owner, index) = self.locate(id)?;
        Ok(&mut self.pools.get_mut(&owner).expect("located")[index])
    }

    pub fn count(&self, cell: CellId, kind: StateKind) -> Result<usize> {
        Ok(self.pool(cell)?.iter().filter(|c| c.state.kind() == kind).count())
    }

    pub fn free_count(&self, cell: CellId) -> Result<usize> {
        self.count(cell, StateKind::Free)
    }

    /// Lowest-index Free channel of `cell`.
    pub fn first_free(&self, cell: CellId) -> Result<Option<ChannelId>> {
        Ok(self
            .pool(cell)?
            .iter()
            .find(|c| c.state == ChannelState::Free)
            .map(|c| c.id))
    }

    /// Apply a lifecycle transition to an owned channel.
    ///
    /// `Free -> LentOut` also opens the borrower-side record, and
    /// `LentOut -> Free` closes it; the latter is refused while the borrower
    /// still has a call on it.
    pub fn transition(&mut self, id: ChannelId, new_state: ChannelState) -> Result<()> {
        let from = self.channel(id)?.state;
        let illegal = || Error::IllegalTransition {
            channel: id,
            from: from.kind(),
            to: new_state.kind(),
        };
        if !legal(&from, &new_state) {
            return Err(illegal());
        }
        match (from, new_state) {
            (ChannelState::Free, ChannelState::LentOut { to }) => {
                let owner = self.channel(id)?.owner;
                if to == owner || !self.pools.contains_key(&to) {
                    return Err(illegal());
                }
                self.borrowed.entry(to).or_default().push(BorrowedChannel {
                    channel: id,
                    donor: owner,
                    sub_band: None,
                    state: ChannelState::Free,
                });
            }
            (ChannelState::LentOut { to }, ChannelState::Free) => {
                let records = self.borrowed.get_mut(&to).ok_or_else(illegal)?;
                let pos = records.iter().position(|r| r.channel == id).ok_or_else(illegal)?;
                if records[pos].state != ChannelState::Free {
                    return Err(illegal());
                }
                records.remove(pos);
                if records.is_empty() {
                    self.borrowed.remove(&to);
                }
            }
            _ => {}
        }
        self.channel_mut(id)?.state = new_state;
        Ok(())
    }

    /// Change the zone of an occupied owned channel.
    pub fn rezone(&mut self, id: ChannelId, new_zone: Zone) -> Result<()> {
        let ch = self.channel_mut(id)?;
        match &mut ch.state {
            ChannelState::Occupied { zone, .. } => {
                *zone = new_zone;
                Ok(())
            }
            other => Err(Error::IllegalTransition {
                channel: id,
                from: other.kind(),
                to: StateKind::Occupied,
            }),
        }
    }

    fn borrowed_record_mut(&mut self, borrower: CellId, id: ChannelId) -> Result<&mut BorrowedChannel> {
        self.borrowed
            .get_mut(&borrower)
            .and_then(|rs| rs.iter_mut().find(|r| r.channel == id))
            .ok_or(Error::UnknownChannel(id))
    }

    /// Put a call on a channel the borrower holds Free.
    pub fn serve_borrowed(&mut self, borrower: CellId, id: ChannelId, class: TrafficClass, zone: Zone) -> Result<()> {
        let record = self.borrowed_record_mut(borrower, id)?;
        if record.state != ChannelState::Free {
            return Err(Error::IllegalTransition {
                channel: id,
                from: record.state.kind(),
                to: StateKind::Occupied,
            });
        }
        record.state = ChannelState::Occupied {
            class,
            zone,
            serving: borrower,
        };
        Ok(())
    }

    /// End the call on a borrowed channel; the record stays lent until returned.
    pub fn vacate_borrowed(&mut self, borrower: CellId, id: ChannelId) -> Result<()> {
        let record = self.borrowed_record_mut(borrower, id)?;
        if record.state.kind() != StateKind::Occupied {
            return Err(Error::IllegalTransition {
                channel: id,
                from: record.state.kind(),
                to: StateKind::Free,
            });
        }
        record.state = ChannelState::Free;
        Ok(())
    }

    pub fn set_tag(&mut self, id: ChannelId, tag: Option<SubBandTag>) -> Result<()> {
        self.channel_mut(id)?.sub_band = tag;
        Ok(())
    }

    pub fn set_borrowed_tag(&mut self, borrower: CellId, id: ChannelId, tag: Option<SubBandTag>) -> Result<()> {
        self.borrowed_record_mut(borrower, id)?.sub_band = tag;
        Ok(())
    }

    /// Record sub-band partitions for `cell`. Channels not named in any part
    /// end up untagged; states are untouched.
    pub fn partition_band(&mut self, cell: CellId, parts: &[(SubBandTag, Vec<ChannelId>)]) -> Result<()> {
        let pool_len = self.pool(cell)?.len();
        let mut tags: Vec<Option<SubBandTag>> = vec![None; pool_len];
        let mut labels = BTreeSet::new();
        for (tag, ids) in parts {
            if !labels.insert(*tag) {
                return Err(Error::InvalidPartition(format!("label {tag} given twice")));
            }
            for &id in ids {
                let (owner, index) = self.locate(id)?;
                if owner != cell {
                    return Err(Error::InvalidPartition(format!(
                        "channel {id} belongs to cell {owner}, not {cell}"
                    )));
                }
                if let Some(prev) = tags[index] {
                    return Err(Error::InvalidPartition(format!(
                        "channel {id} tagged both {prev} and {tag}"
                    )));
                }
                tags[index] = Some(*tag);
            }
        }
        let pool = self.pools.get_mut(&cell).expect("checked");
        for (ch, tag) in pool.iter_mut().zip(tags) {
            ch.sub_band = tag;
        }
        Ok(())
    }

    pub fn tagged_count(&self, cell: CellId, tag: SubBandTag) -> Result<usize> {
        Ok(self.pool(cell)?.iter().filter(|c| c.sub_band == Some(tag)).count())
    }

    /// Number of LentOut channels owned by `cell`.
    pub fn lent_count(&self, cell: CellId) -> Result<usize> {
        self.count(cell, StateKind::LentOut)
    }

    /// Check channel conservation and lending bookkeeping.
    pub fn check_invariants(&self) -> Result<()> {
        let violation = |msg: String| Err(Error::InvariantViolation(msg));
        let mut lent_total = 0usize;
        for (&cell, pool) in &self.pools {
            if pool.len() != self.channels_per_cell as usize {
                return violation(format!("cell {cell} owns {} channels", pool.len()));
            }
            let mut by_kind = [0usize; 4];
            for (k, ch) in pool.iter().enumerate() {
                if ch.owner != cell || ch.index as usize != k || self.locate(ch.id)? != (cell, k) {
                    return violation(format!("channel {} misfiled in cell {cell}", ch.id));
                }
                by_kind[ch.state.kind() as usize] += 1;
                if let ChannelState::LentOut { to } = ch.state {
                    lent_total += 1;
                    let n = self.borrowed_by(to).iter().filter(|r| r.channel == ch.id).count();
                    if n != 1 {
                        return violation(format!("lent channel {} has {n} borrower records at {to}", ch.id));
                    }
                }
                if let ChannelState::Occupied { serving, .. } = ch.state {
                    if serving != cell {
                        return violation(format!("owned channel {} serving another cell", ch.id));
                    }
                }
            }
            if by_kind.iter().sum::<usize>() != self.channels_per_cell as usize {
                return violation(format!("state counts do not add up in cell {cell}"));
            }
        }
        let mut served_total = 0usize;
        for (&borrower, records) in &self.borrowed {
            for r in records {
                served_total += 1;
                match self.channel(r.channel)?.state {
                    ChannelState::LentOut { to } if to == borrower => {}
                    other => {
                        return violation(format!(
                            "borrower {borrower} holds channel {} whose owner state is {}",
                            r.channel,
                            other.kind()
                        ))
                    }
                }
                match r.state {
                    ChannelState::Free => {}
                    ChannelState::Occupied { serving, .. } if serving == borrower => {}
                    other => return violation(format!("borrowed record {} in state {}", r.channel, other.kind())),
                }
            }
        }
        if served_total != lent_total {
            return violation(format!("{lent_total} lent but {served_total} held by borrowers"));
        }
        Ok(())
    }
}

/// Outer-available share of a lent band: `lent − inner_assigned`.
pub fn outer_available(lent: usize, inner_assigned: usize) -> Result<usize> {
    lent.checked_sub(inner_assigned)
        .ok_or_else(|| Error::InvalidPartition(format!("inner share {inner_assigned} exceeds lent {lent}")))
}
