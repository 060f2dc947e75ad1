//! Ground-truth and declared-ledger state for the chip supply chain.
//!
//! A [`WorldState`] tracks two parallel views of every facility: what is
//! physically true, and what the inspected state has declared. Honest
//! operations keep the views identical; violation strategies drive them
//! apart, and [`WorldState::reconcile`] reports the difference.
//!
//! Chips are stored as counts with virtual contiguous unique-identifier
//! spans rather than per-chip records, since populations reach into the
//! billions and the sampling mechanics only need counts. Time is an integer
//! step representing one day.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use core::fmt;

use crate::adversary::StrategyId;

/// Simulation time in days.
pub type Step = u32;

pub const STEPS_PER_YEAR: Step = 365;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacilityKind {
    Fab,
    DataCenter,
    Storage,
    Elimination,
    SupplierSite,
    /// A site unknown to the verifier; never appears in any declared ledger.
    UndeclaredSite,
}

impl fmt::Display for FacilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FacilityKind::Fab => "fab",
            FacilityKind::DataCenter => "data_center",
            FacilityKind::Storage => "storage",
            FacilityKind::Elimination => "elimination",
            FacilityKind::SupplierSite => "supplier_site",
            FacilityKind::UndeclaredSite => "undeclared_site",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChipTier {
    CuttingEdgeAi,
    Commodity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChipStatus {
    Compliant,
    Tampered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomFunction {
    ServerRoom,
    NonServerArea,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FacilityId(pub String);

impl FacilityId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FacilityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FacilityId {
    fn from(s: &str) -> Self {
        Self(String::from(s))
    }
}

/// A contiguous range of virtual unique identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UidSpan {
    pub start: u64,
    pub len: u64,
}

impl UidSpan {
    pub fn end(&self) -> u64 {
        self.start + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LedgerKey {
    pub tier: ChipTier,
    pub status: ChipStatus,
}

impl LedgerKey {
    pub const CUTTING_EDGE: Self = Self {
        tier: ChipTier::CuttingEdgeAi,
        status: ChipStatus::Compliant,
    };
    pub const CUTTING_EDGE_TAMPERED: Self = Self {
        tier: ChipTier::CuttingEdgeAi,
        status: ChipStatus::Tampered,
    };
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub count: u64,
    pub spans: Vec<UidSpan>,
}

/// Counts keyed by chip tier and compliance status, with the uid spans
/// backing each count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InventoryLedger {
    entries: BTreeMap<LedgerKey, LedgerEntry>,
}

impl InventoryLedger {
    pub fn count(&self, key: LedgerKey) -> u64 {
        self.entries.get(&key).map_or(0, |e| e.count)
    }

    pub fn total(&self) -> u64 {
        self.entries.values().map(|e| e.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LedgerKey, &LedgerEntry)> {
        self.entries.iter()
    }

    pub fn add(&mut self, key: LedgerKey, spans: Vec<UidSpan>) {
        let entry = self.entries.entry(key).or_default();
        for span in spans {
            if span.len == 0 {
                continue;
            }
            entry.count += span.len;
            // Coalesce with the previous span when contiguous.
            if let Some(last) = entry.spans.last_mut() {
                if last.end() == span.start {
                    last.len += span.len;
                    continue;
                }
            }
            entry.spans.push(span);
        }
    }

    /// Remove `count` chips front-first and return the spans taken.
    pub fn take(&mut self, key: LedgerKey, count: u64) -> Result<Vec<UidSpan>, WorldError> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let entry = self
            .entries
            .get_mut(&key)
            .filter(|e| e.count >= count)
            .ok_or(WorldError::InsufficientInventory)?;
        entry.count -= count;
        let mut remaining = count;
        let mut taken = Vec::new();
        while remaining > 0 {
            let span = entry.spans.first_mut().expect("count covered by spans");
            if span.len <= remaining {
                remaining -= span.len;
                taken.push(entry.spans.remove(0));
            } else {
                taken.push(UidSpan {
                    start: span.start,
                    len: remaining,
                });
                span.start += remaining;
                span.len -= remaining;
                remaining = 0;
            }
        }
        Ok(taken)
    }
}

/// A room in a facility's declared (or secret) layout.
///
/// Declared holdings are fungible across a facility's declared server
/// rooms, so rooms only carry the chips that sit outside the declared view:
/// hidden surpluses and secret-room contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub declared: bool,
    pub function: RoomFunction,
    /// Truth chips physically here that no declaration accounts for.
    pub hidden_chips: u64,
    /// Strategy that placed the hidden chips (or built the secret room).
    pub tag: Option<StrategyId>,
    /// Present when the hidden chips relocate in response to inspection
    /// notice.
    pub relocation: Option<RelocationPlan>,
}

impl Room {
    pub fn declared_room(id: impl Into<String>, function: RoomFunction) -> Self {
        Self {
            id: id.into(),
            declared: true,
            function,
            hidden_chips: 0,
            tag: None,
            relocation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelocationPlan {
    /// Steps of notice needed to clear the room before inspectors arrive.
    pub cleanup_steps: u32,
    /// Probability a relocation attempt moves everything cleanly.
    pub cleanup_success: f64,
}

/// Minimum steps a facility must hold received chips before shipping them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldingRule {
    pub min_hold_steps: Step,
}

impl Default for HoldingRule {
    // The required holding period is unspecified upstream; 30 days is an
    // arbitrary scenario default.
    fn default() -> Self {
        Self { min_hold_steps: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub id: FacilityId,
    pub kind: FacilityKind,
    pub declared: bool,
    pub rooms: Vec<Room>,
    pub true_inventory: InventoryLedger,
    pub declared_inventory: InventoryLedger,
    pub machines_true: u64,
    pub machines_declared: u64,
    /// Machines concealed in a secret room, invisible to counting.
    pub machines_hidden: u64,
    /// Declared chips-per-step production rate.
    pub rate_declared: u64,
    /// True output of declared machines (what in-line instrumentation sees).
    pub rate_metered: u64,
    /// True output of undeclared machines.
    pub rate_covert: u64,
    /// Strategy that opened a gap between metered and declared rates.
    pub rate_gap_tag: Option<StrategyId>,
    /// Strategy operating the covert production.
    pub covert_tag: Option<StrategyId>,
    /// Declared chips absent from the truth ledger, by responsible strategy.
    pub missing_declared: BTreeMap<StrategyId, u64>,
    /// Tampered chips in the truth ledger, by responsible strategy.
    pub tampered_by: BTreeMap<StrategyId, u64>,
    /// Truth chips held long enough to satisfy the holding rule.
    aged_stock: u64,
    /// Recently received truth chips, oldest first.
    unaged: VecDeque<(Step, u64)>,
}

impl Facility {
    pub fn new(id: FacilityId, kind: FacilityKind, declared: bool) -> Self {
        Self {
            id,
            kind,
            declared,
            rooms: Vec::new(),
            true_inventory: InventoryLedger::default(),
            declared_inventory: InventoryLedger::default(),
            machines_true: 0,
            machines_declared: 0,
            machines_hidden: 0,
            rate_declared: 0,
            rate_metered: 0,
            rate_covert: 0,
            rate_gap_tag: None,
            covert_tag: None,
            missing_declared: BTreeMap::new(),
            tampered_by: BTreeMap::new(),
            aged_stock: 0,
            unaged: VecDeque::new(),
        }
    }

    pub fn rate_true(&self) -> u64 {
        self.rate_metered + self.rate_covert
    }

    pub fn missing_total(&self) -> u64 {
        self.missing_declared.values().sum()
    }

    pub fn tampered_total(&self) -> u64 {
        self.true_inventory.count(LedgerKey::CUTTING_EDGE_TAMPERED)
    }

    /// Chips hidden in declared server rooms; counting inspections see
    /// these as surplus.
    pub fn hidden_in_server_rooms(&self) -> u64 {
        self.rooms
            .iter()
            .filter(|r| r.declared && r.function == RoomFunction::ServerRoom)
            .map(|r| r.hidden_chips)
            .sum()
    }

    /// Machines visible to a counting inspection.
    pub fn machines_visible(&self) -> u64 {
        self.machines_true - self.machines_hidden
    }

    pub fn secret_rooms(&self) -> impl Iterator<Item = &Room> {
        self.rooms.iter().filter(|r| !r.declared)
    }

    pub fn room_mut(&mut self, room_id: &str) -> Option<&mut Room> {
        self.rooms.iter_mut().find(|r| r.id == room_id)
    }

    fn age_stock(&mut self, now: Step, rule: HoldingRule) {
        while let Some(&(received, count)) = self.unaged.front() {
            if now.saturating_sub(received) >= rule.min_hold_steps {
                self.aged_stock += count;
                self.unaged.pop_front();
            } else {
                break;
            }
        }
    }

    /// Truth chips a declared shipment may draw on under the holding rule.
    pub fn shippable(&self) -> u64 {
        self.aged_stock
    }

    fn draw_stock(&mut self, count: u64, declared_shipment: bool) -> Result<(), WorldError> {
        if declared_shipment {
            if self.aged_stock < count {
                return Err(WorldError::HoldingRuleViolation);
            }
            self.aged_stock -= count;
            return Ok(());
        }
        // Covert movement ignores the rule: aged first, then recent.
        let mut remaining = count;
        let from_aged = remaining.min(self.aged_stock);
        self.aged_stock -= from_aged;
        remaining -= from_aged;
        while remaining > 0 {
            let (step, held) = self
                .unaged
                .pop_front()
                .ok_or(WorldError::InsufficientInventory)?;
            if held <= remaining {
                remaining -= held;
            } else {
                self.unaged.push_front((step, held - remaining));
                remaining = 0;
            }
        }
        Ok(())
    }

    fn receive_stock(&mut self, now: Step, count: u64) {
        if count > 0 {
            self.unaged.push_back((now, count));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitRoute {
    /// Through a designated, monitored portal.
    Portal,
    /// Over the perimeter, avoiding portals.
    Covert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shipment {
    pub id: u32,
    pub origin: FacilityId,
    pub destination: FacilityId,
    pub count: u64,
    pub declared: bool,
    pub depart_time: Step,
    pub arrive_time: Step,
    pub diverted_to: Option<FacilityId>,
    pub route: ExitRoute,
    pub tag: Option<StrategyId>,
    spans_truth: Vec<UidSpan>,
    spans_declared: Vec<UidSpan>,
}

/// Everything needed to launch a shipment at the current step.
#[derive(Debug, Clone)]
pub struct ShipmentSpec {
    pub origin: FacilityId,
    pub destination: FacilityId,
    pub count: u64,
    pub declared: bool,
    pub transit_steps: Step,
    pub diverted_to: Option<FacilityId>,
    pub route: ExitRoute,
    pub tag: Option<StrategyId>,
}

/// Observable traces of physical activity that passive detection layers
/// can pick up. Honest behavior emits none of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentEvent {
    pub kind: LatentKind,
    pub facility: FacilityId,
    pub tag: StrategyId,
    pub time: Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentKind {
    /// Undeclared cargo crossing a facility boundary; carries the route.
    PortalCrossing { route: ExitRoute },
    /// Construction activity (secret fab, secret room).
    Construction,
    /// An undeclared purchase of materials, machines, or site equipment.
    ProcurementOrder,
    /// Production this step exceeded the declared rate on metered machines.
    UnderReporting,
    /// Chips physically moved away from their declared fate.
    DiversionMove,
    /// Hidden chips moved in response to inspection activity.
    Relocation,
    /// Chips being tampered with.
    TamperingActivity,
    /// A reported destruction that did not happen.
    EliminationFraud,
    /// Standing presence of a hidden cache in a surveilled area.
    HiddenPresence,
}

/// Outcome of an [`WorldState::eliminate`] call, consumed by elimination
/// inspections the same step.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationRecord {
    pub facility: FacilityId,
    pub count: u64,
    pub fraudulent: bool,
    pub tag: Option<StrategyId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldError {
    UnknownFacility,
    WrongFacilityKind,
    InsufficientInventory,
    HoldingRuleViolation,
    UnknownRoom,
    DeclaredRateExceedsTrue,
    InvalidShipment,
}

impl fmt::Display for WorldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorldError::UnknownFacility => "facility does not exist",
            WorldError::WrongFacilityKind => "operation not valid for this facility kind",
            WorldError::InsufficientInventory => "facility holds fewer chips than requested",
            WorldError::HoldingRuleViolation => {
                "declared shipment would move chips held for less than the minimum period"
            }
            WorldError::UnknownRoom => "room does not exist at this facility",
            WorldError::DeclaredRateExceedsTrue => {
                "declared production rate exceeds true metered rate"
            }
            WorldError::InvalidShipment => "shipment endpoints are inconsistent",
        })
    }
}

/// Per-facility, per-key differences between declarations and ground truth.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    /// `declared - truth` per facility and ledger key; zero rows omitted.
    pub facility_diffs: BTreeMap<FacilityId, BTreeMap<LedgerKey, i64>>,
    /// Truth chips sitting at undeclared sites.
    pub undeclared_site_chips: u64,
    /// Truth chips flipped to tampered status anywhere.
    pub tampered_chips: u64,
}

impl DiscrepancyReport {
    pub fn is_all_zero(&self) -> bool {
        self.facility_diffs.is_empty()
            && self.undeclared_site_chips == 0
            && self.tampered_chips == 0
    }

    pub fn facility_diff(&self, id: &FacilityId, key: LedgerKey) -> i64 {
        self.facility_diffs
            .get(id)
            .and_then(|m| m.get(&key))
            .copied()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantViolation {
    ChipConservation,
    DeclaredConservation,
    SpanCountMismatch,
    UidOverlap,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvariantViolation::ChipConservation => {
                "truth chips do not equal produced minus destroyed"
            }
            InvariantViolation::DeclaredConservation => {
                "declared chips do not equal declared produced minus declared destroyed"
            }
            InvariantViolation::SpanCountMismatch => "ledger count disagrees with its uid spans",
            InvariantViolation::UidOverlap => "a uid belongs to two ledger ranges",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub clock: Step,
    pub holding_rule: HoldingRule,
    pub facilities: BTreeMap<FacilityId, Facility>,
    pub in_transit: Vec<Shipment>,
    /// Latent activity emitted since the engine last drained it.
    pub latent: Vec<LatentEvent>,
    /// Chips each strategy has put into a violating state (at undeclared
    /// sites, hidden beyond declarations, or tampered). Cumulative.
    pub attributed: BTreeMap<StrategyId, u64>,
    uid_next: u64,
    next_shipment_id: u32,
    pub total_produced: u64,
    pub total_destroyed: u64,
    pub declared_produced: u64,
    pub declared_destroyed: u64,
}

impl WorldState {
    pub fn new(holding_rule: HoldingRule) -> Self {
        Self {
            clock: 0,
            holding_rule,
            facilities: BTreeMap::new(),
            in_transit: Vec::new(),
            latent: Vec::new(),
            attributed: BTreeMap::new(),
            uid_next: 0,
            next_shipment_id: 0,
            total_produced: 0,
            total_destroyed: 0,
            declared_produced: 0,
            declared_destroyed: 0,
        }
    }

    pub fn insert_facility(&mut self, facility: Facility) {
        debug_assert!(
            facility.declared
                || (facility.declared_inventory.is_empty() && facility.machines_declared == 0),
            "undeclared facilities must not declare anything"
        );
        self.facilities.insert(facility.id.clone(), facility);
    }

    pub fn facility(&self, id: &FacilityId) -> Result<&Facility, WorldError> {
        self.facilities.get(id).ok_or(WorldError::UnknownFacility)
    }

    pub fn facility_mut(&mut self, id: &FacilityId) -> Result<&mut Facility, WorldError> {
        self.facilities
            .get_mut(id)
            .ok_or(WorldError::UnknownFacility)
    }

    pub fn alloc_span(&mut self, len: u64) -> UidSpan {
        let span = UidSpan {
            start: self.uid_next,
            len,
        };
        self.uid_next += len;
        span
    }

    /// Seed a facility with initial stock (counts as production at step 0;
    /// exempt from the holding rule).
    pub fn seed_inventory(
        &mut self,
        id: &FacilityId,
        tier: ChipTier,
        count: u64,
    ) -> Result<(), WorldError> {
        if count == 0 {
            return Ok(());
        }
        let span = self.alloc_span(count);
        let key = LedgerKey {
            tier,
            status: ChipStatus::Compliant,
        };
        let declared = self.facility(id)?.declared;
        let facility = self.facility_mut(id)?;
        facility.true_inventory.add(key, alloc::vec![span]);
        facility.aged_stock += count;
        self.total_produced += count;
        if declared {
            let facility = self.facility_mut(id)?;
            facility.declared_inventory.add(key, alloc::vec![span]);
            self.declared_produced += count;
        }
        Ok(())
    }

    /// Move the holding-rule window forward; call once per step.
    pub fn begin_step(&mut self, now: Step) {
        self.clock = now;
        let rule = self.holding_rule;
        for facility in self.facilities.values_mut() {
            facility.age_stock(now, rule);
        }
    }

    /// One production step at a fab. Truth grows by the true rate, the
    /// declaration by the declared rate; fresh uid spans back the new chips.
    pub fn produce(&mut self, fab_id: &FacilityId) -> Result<(), WorldError> {
        let now = self.clock;
        let fab = self.facility(fab_id)?;
        if fab.kind != FacilityKind::Fab {
            return Err(WorldError::WrongFacilityKind);
        }
        let true_rate = fab.rate_true();
        let declared_rate = fab.rate_declared;
        let metered = fab.rate_metered;
        if fab.declared && declared_rate > metered {
            return Err(WorldError::DeclaredRateExceedsTrue);
        }
        if true_rate == 0 {
            return Ok(());
        }
        let span = self.alloc_span(true_rate);
        let declared_span = UidSpan {
            start: span.start,
            len: declared_rate,
        };

        let fab = self.facility_mut(fab_id)?;
        let is_declared_facility = fab.declared;
        fab.true_inventory
            .add(LedgerKey::CUTTING_EDGE, alloc::vec![span]);
        fab.aged_stock += true_rate; // produced on site, not received
        let gap_tag = fab.rate_gap_tag;
        let covert_tag = fab.covert_tag;
        let rate_covert = fab.rate_covert;
        if is_declared_facility && declared_rate > 0 {
            fab.declared_inventory
                .add(LedgerKey::CUTTING_EDGE, alloc::vec![declared_span]);
        }
        self.total_produced += true_rate;
        if is_declared_facility {
            self.declared_produced += declared_rate;
        }

        // Secret output leaves observable traces: metering that disagrees
        // with the declaration, and material purchases nobody declared.
        if let Some(tag) = gap_tag {
            if metered != declared_rate {
                self.push_latent(LatentKind::UnderReporting, fab_id, tag, now);
                self.push_latent(LatentKind::ProcurementOrder, fab_id, tag, now);
                self.attribute(tag, metered.saturating_sub(declared_rate));
            }
        }
        if let Some(tag) = covert_tag {
            if rate_covert > 0 {
                self.push_latent(LatentKind::ProcurementOrder, fab_id, tag, now);
                self.attribute(tag, rate_covert);
            }
        }
        Ok(())
    }

    /// Launch a shipment at the current step. Declared shipments must obey
    /// the holding rule and move declared ledger entries alongside truth.
    pub fn ship(&mut self, spec: ShipmentSpec) -> Result<u32, WorldError> {
        if spec.origin == spec.destination
            || spec.transit_steps == 0
            || spec.diverted_to.as_ref() == Some(&spec.destination)
        {
            return Err(WorldError::InvalidShipment);
        }
        if !self.facilities.contains_key(&spec.destination) {
            return Err(WorldError::UnknownFacility);
        }
        if let Some(divert) = &spec.diverted_to {
            if !self.facilities.contains_key(divert) {
                return Err(WorldError::UnknownFacility);
            }
        }
        let now = self.clock;
        let origin = self.facility_mut(&spec.origin)?;
        if origin.true_inventory.count(LedgerKey::CUTTING_EDGE) < spec.count {
            return Err(WorldError::InsufficientInventory);
        }
        origin.draw_stock(spec.count, spec.declared)?;
        let spans_truth = origin
            .true_inventory
            .take(LedgerKey::CUTTING_EDGE, spec.count)?;
        let spans_declared = if spec.declared {
            origin
                .declared_inventory
                .take(LedgerKey::CUTTING_EDGE, spec.count)?
        } else {
            Vec::new()
        };

        let id = self.next_shipment_id;
        self.next_shipment_id += 1;
        let shipment = Shipment {
            id,
            origin: spec.origin.clone(),
            destination: spec.destination,
            count: spec.count,
            declared: spec.declared,
            depart_time: now,
            arrive_time: now + spec.transit_steps,
            diverted_to: spec.diverted_to,
            route: spec.route,
            tag: spec.tag,
            spans_truth,
            spans_declared,
        };
        // Undeclared cargo crossing the boundary is what portal and
        // perimeter systems look for.
        if !shipment.declared {
            if let Some(tag) = shipment.tag {
                self.push_latent(
                    LatentKind::PortalCrossing {
                        route: shipment.route,
                    },
                    &spec.origin,
                    tag,
                    now,
                );
            }
        }
        self.in_transit.push(shipment);
        Ok(id)
    }

    /// Deliver every shipment due at the current step.
    pub fn deliver_arrivals(&mut self) -> Result<(), WorldError> {
        let now = self.clock;
        let mut due = Vec::new();
        let mut i = 0;
        while i < self.in_transit.len() {
            if self.in_transit[i].arrive_time <= now {
                due.push(self.in_transit.remove(i));
            } else {
                i += 1;
            }
        }
        for shipment in due {
            let physical_dest = shipment
                .diverted_to
                .clone()
                .unwrap_or_else(|| shipment.destination.clone());
            {
                let dest = self.facility_mut(&physical_dest)?;
                dest.true_inventory
                    .add(LedgerKey::CUTTING_EDGE, shipment.spans_truth.clone());
                dest.receive_stock(now, shipment.count);
            }
            if shipment.declared {
                // The declaration records arrival at the claimed
                // destination regardless of where the chips went.
                let claimed = self.facility_mut(&shipment.destination)?;
                claimed
                    .declared_inventory
                    .add(LedgerKey::CUTTING_EDGE, shipment.spans_declared.clone());
                if shipment.diverted_to.is_some() {
                    if let Some(tag) = shipment.tag {
                        *claimed.missing_declared.entry(tag).or_insert(0) += shipment.count;
                        self.push_latent(LatentKind::DiversionMove, &physical_dest, tag, now);
                        self.attribute(tag, shipment.count);
                    }
                }
            }
        }
        Ok(())
    }

    /// Report `count` chips destroyed at an elimination facility. Truth
    /// only follows when `actually_destroy`; otherwise the chips move to an
    /// undeclared diversion cache adjacent to the facility.
    pub fn eliminate(
        &mut self,
        facility_id: &FacilityId,
        count: u64,
        actually_destroy: bool,
        tag: Option<StrategyId>,
    ) -> Result<EliminationRecord, WorldError> {
        let now = self.clock;
        {
            let facility = self.facility(facility_id)?;
            if facility.kind != FacilityKind::Elimination {
                return Err(WorldError::WrongFacilityKind);
            }
        }
        if count == 0 {
            return Ok(EliminationRecord {
                facility: facility_id.clone(),
                count,
                fraudulent: false,
                tag: None,
            });
        }
        let facility = self.facility_mut(facility_id)?;
        if facility.true_inventory.count(LedgerKey::CUTTING_EDGE) < count {
            return Err(WorldError::InsufficientInventory);
        }
        // The report always says "melted".
        facility
            .declared_inventory
            .take(LedgerKey::CUTTING_EDGE, count)?;
        self.declared_destroyed += count;

        if actually_destroy {
            let facility = self.facility_mut(facility_id)?;
            facility.draw_stock(count, false)?;
            facility
                .true_inventory
                .take(LedgerKey::CUTTING_EDGE, count)?;
            self.total_destroyed += count;
            return Ok(EliminationRecord {
                facility: facility_id.clone(),
                count,
                fraudulent: false,
                tag: None,
            });
        }

        let cache_id = self.elimination_cache(facility_id);
        let strategy = tag.unwrap_or(StrategyId::DivertAtElimination);
        let facility = self.facility_mut(facility_id)?;
        facility.draw_stock(count, false)?;
        let spans = facility
            .true_inventory
            .take(LedgerKey::CUTTING_EDGE, count)?;
        let cache = self.facility_mut(&cache_id)?;
        cache.true_inventory.add(LedgerKey::CUTTING_EDGE, spans);
        cache.receive_stock(now, count);
        self.push_latent(LatentKind::EliminationFraud, facility_id, strategy, now);
        self.attribute(strategy, count);
        Ok(EliminationRecord {
            facility: facility_id.clone(),
            count,
            fraudulent: true,
            tag: Some(strategy),
        })
    }

    /// The undeclared cache receiving chips from fake eliminations.
    fn elimination_cache(&mut self, facility_id: &FacilityId) -> FacilityId {
        let cache_id = FacilityId(format!("{}.diversion-cache", facility_id.as_str()));
        if !self.facilities.contains_key(&cache_id) {
            self.insert_facility(Facility::new(
                cache_id.clone(),
                FacilityKind::UndeclaredSite,
                false,
            ));
        }
        cache_id
    }

    /// Flip `count` compliant chips to tampered in the truth ledger; the
    /// declaration keeps claiming compliance.
    pub fn tamper(
        &mut self,
        facility_id: &FacilityId,
        count: u64,
        tag: StrategyId,
    ) -> Result<(), WorldError> {
        let now = self.clock;
        let facility = self.facility_mut(facility_id)?;
        let spans = facility
            .true_inventory
            .take(LedgerKey::CUTTING_EDGE, count)?;
        facility
            .true_inventory
            .add(LedgerKey::CUTTING_EDGE_TAMPERED, spans);
        if count > 0 {
            *facility.tampered_by.entry(tag).or_insert(0) += count;
            self.push_latent(LatentKind::TamperingActivity, facility_id, tag, now);
            self.attribute(tag, count);
        }
        Ok(())
    }

    /// Move `count` chips out of a declared facility to an undeclared site,
    /// leaving the declaration untouched.
    pub fn divert(
        &mut self,
        from: &FacilityId,
        to: &FacilityId,
        count: u64,
        tag: StrategyId,
    ) -> Result<(), WorldError> {
        let now = self.clock;
        if !self.facilities.contains_key(to) {
            return Err(WorldError::UnknownFacility);
        }
        let origin = self.facility_mut(from)?;
        if origin.true_inventory.count(LedgerKey::CUTTING_EDGE) < count {
            return Err(WorldError::InsufficientInventory);
        }
        origin.draw_stock(count, false)?;
        let spans = origin
            .true_inventory
            .take(LedgerKey::CUTTING_EDGE, count)?;
        *origin.missing_declared.entry(tag).or_insert(0) += count;
        let dest = self.facility_mut(to)?;
        dest.true_inventory.add(LedgerKey::CUTTING_EDGE, spans);
        dest.receive_stock(now, count);
        self.push_latent(LatentKind::DiversionMove, from, tag, now);
        self.attribute(tag, count);
        Ok(())
    }

    /// Materialize chips that no declaration knows about (secret production
    /// or prior acquisition) in a room at a facility.
    pub fn spawn_hidden(
        &mut self,
        facility_id: &FacilityId,
        room_id: &str,
        count: u64,
        tag: StrategyId,
    ) -> Result<(), WorldError> {
        if count == 0 {
            return Ok(());
        }
        let span = self.alloc_span(count);
        let facility = self.facility_mut(facility_id)?;
        let room = facility.room_mut(room_id).ok_or(WorldError::UnknownRoom)?;
        room.hidden_chips += count;
        room.tag = Some(tag);
        facility
            .true_inventory
            .add(LedgerKey::CUTTING_EDGE, alloc::vec![span]);
        facility.aged_stock += count;
        self.total_produced += count;
        self.attribute(tag, count);
        Ok(())
    }

    fn attribute(&mut self, tag: StrategyId, count: u64) {
        if count > 0 {
            *self.attributed.entry(tag).or_insert(0) += count;
        }
    }

    pub fn push_latent(
        &mut self,
        kind: LatentKind,
        facility: &FacilityId,
        tag: StrategyId,
        time: Step,
    ) {
        self.latent.push(LatentEvent {
            kind,
            facility: facility.clone(),
            tag,
            time,
        });
    }

    /// Drain the latent activity accumulated since the last call.
    pub fn take_latent(&mut self) -> Vec<LatentEvent> {
        core::mem::take(&mut self.latent)
    }

    /// Compare declarations against ground truth.
    pub fn reconcile(&self) -> DiscrepancyReport {
        let mut report = DiscrepancyReport::default();
        for (id, facility) in &self.facilities {
            if facility.declared {
                let mut diffs: BTreeMap<LedgerKey, i64> = BTreeMap::new();
                for (key, entry) in facility.declared_inventory.iter() {
                    if entry.count > 0 {
                        *diffs.entry(*key).or_insert(0) += entry.count as i64;
                    }
                }
                for (key, entry) in facility.true_inventory.iter() {
                    if entry.count > 0 {
                        *diffs.entry(*key).or_insert(0) -= entry.count as i64;
                    }
                }
                diffs.retain(|_, v| *v != 0);
                if !diffs.is_empty() {
                    report.facility_diffs.insert(id.clone(), diffs);
                }
            } else {
                report.undeclared_site_chips += facility.true_inventory.total();
            }
            report.tampered_chips += facility.tampered_total();
        }
        report
    }

    /// Check conservation and uid-disjointness invariants.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let mut truth_total = 0u64;
        let mut declared_total = 0u64;
        let mut spans: Vec<UidSpan> = Vec::new();
        for facility in self.facilities.values() {
            for (_, entry) in facility.true_inventory.iter() {
                let span_sum: u64 = entry.spans.iter().map(|s| s.len).sum();
                if span_sum != entry.count {
                    return Err(InvariantViolation::SpanCountMismatch);
                }
                truth_total += entry.count;
                spans.extend_from_slice(&entry.spans);
            }
            for (_, entry) in facility.declared_inventory.iter() {
                declared_total += entry.count;
            }
        }
        for shipment in &self.in_transit {
            truth_total += shipment.count;
            spans.extend_from_slice(&shipment.spans_truth);
            if shipment.declared {
                declared_total += shipment.count;
            }
        }
        if truth_total != self.total_produced - self.total_destroyed {
            return Err(InvariantViolation::ChipConservation);
        }
        if declared_total != self.declared_produced - self.declared_destroyed {
            return Err(InvariantViolation::DeclaredConservation);
        }
        spans.retain(|s| s.len > 0);
        spans.sort_by_key(|s| s.start);
        for pair in spans.windows(2) {
            if pair[0].end() > pair[1].start {
                return Err(InvariantViolation::UidOverlap);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fab_world(rate_metered: u64, rate_declared: u64) -> (WorldState, FacilityId) {
        let mut world = WorldState::new(HoldingRule { min_hold_steps: 0 });
        let fab_id = FacilityId::from("fab-1");
        let mut fab = Facility::new(fab_id.clone(), FacilityKind::Fab, true);
        fab.rate_metered = rate_metered;
        fab.rate_declared = rate_declared;
        if rate_metered != rate_declared {
            fab.rate_gap_tag = Some(StrategyId::UnderReportProduction);
        }
        world.insert_facility(fab);
        (world, fab_id)
    }

    #[test]
    fn honest_production_keeps_ledgers_equal() {
        let (mut world, fab_id) = fab_world(100, 100);
        for t in 0..10 {
            world.begin_step(t);
            world.produce(&fab_id).unwrap();
        }
        let fab = world.facility(&fab_id).unwrap();
        assert_eq!(fab.true_inventory.count(LedgerKey::CUTTING_EDGE), 1000);
        assert_eq!(fab.declared_inventory.count(LedgerKey::CUTTING_EDGE), 1000);
        assert!(world.reconcile().is_all_zero());
        assert!(world.check_invariants().is_ok());
        assert!(world.take_latent().is_empty());
    }

    #[test]
    fn under_reporting_accumulates_discrepancy() {
        let (mut world, fab_id) = fab_world(120, 100);
        for t in 0..10 {
            world.begin_step(t);
            world.produce(&fab_id).unwrap();
        }
        let report = world.reconcile();
        assert_eq!(
            report.facility_diff(&fab_id, LedgerKey::CUTTING_EDGE),
            -200,
            "twenty undeclared chips per step for ten steps"
        );
        assert!(world.check_invariants().is_ok());
        // Under-reporting leaves metering and procurement traces each step.
        let latent = world.take_latent();
        assert_eq!(
            latent
                .iter()
                .filter(|e| e.kind == LatentKind::UnderReporting)
                .count(),
            10
        );
    }

    #[test]
    fn zero_rate_production_is_a_noop() {
        let (mut world, fab_id) = fab_world(0, 0);
        world.begin_step(0);
        world.produce(&fab_id).unwrap();
        assert_eq!(world.facility(&fab_id).unwrap().true_inventory.total(), 0);
    }

    #[test]
    fn produce_rejects_wrong_kind_and_unknown_facility() {
        let mut world = WorldState::new(HoldingRule::default());
        let dc = FacilityId::from("dc-1");
        world.insert_facility(Facility::new(dc.clone(), FacilityKind::DataCenter, true));
        assert_eq!(world.produce(&dc), Err(WorldError::WrongFacilityKind));
        assert_eq!(
            world.produce(&FacilityId::from("nope")),
            Err(WorldError::UnknownFacility)
        );
    }

    fn shipping_world() -> (WorldState, FacilityId, FacilityId, FacilityId) {
        let mut world = WorldState::new(HoldingRule { min_hold_steps: 5 });
        let origin = FacilityId::from("storage-1");
        let dest = FacilityId::from("dc-1");
        let hideout = FacilityId::from("hideout");
        world.insert_facility(Facility::new(origin.clone(), FacilityKind::Storage, true));
        world.insert_facility(Facility::new(dest.clone(), FacilityKind::DataCenter, true));
        world.insert_facility(Facility::new(
            hideout.clone(),
            FacilityKind::UndeclaredSite,
            false,
        ));
        world
            .seed_inventory(&origin, ChipTier::CuttingEdgeAi, 1000)
            .unwrap();
        (world, origin, dest, hideout)
    }

    #[test]
    fn declared_shipment_moves_both_ledgers() {
        let (mut world, origin, dest, _) = shipping_world();
        world.begin_step(0);
        world
            .ship(ShipmentSpec {
                origin: origin.clone(),
                destination: dest.clone(),
                count: 400,
                declared: true,
                transit_steps: 3,
                diverted_to: None,
                route: ExitRoute::Portal,
                tag: None,
            })
            .unwrap();
        // In transit: removed from origin on both ledgers.
        assert!(world.reconcile().is_all_zero());
        world.begin_step(3);
        world.deliver_arrivals().unwrap();
        let d = world.facility(&dest).unwrap();
        assert_eq!(d.true_inventory.count(LedgerKey::CUTTING_EDGE), 400);
        assert_eq!(d.declared_inventory.count(LedgerKey::CUTTING_EDGE), 400);
        assert!(world.reconcile().is_all_zero());
        assert!(world.check_invariants().is_ok());
    }

    #[test]
    fn diverted_shipment_splits_claim_from_truth() {
        let (mut world, origin, dest, hideout) = shipping_world();
        world.begin_step(0);
        world
            .ship(ShipmentSpec {
                origin,
                destination: dest.clone(),
                count: 250,
                declared: true,
                transit_steps: 2,
                diverted_to: Some(hideout),
                route: ExitRoute::Portal,
                tag: Some(StrategyId::DivertInTransit),
            })
            .unwrap();
        world.begin_step(2);
        world.deliver_arrivals().unwrap();
        let report = world.reconcile();
        assert_eq!(report.facility_diff(&dest, LedgerKey::CUTTING_EDGE), 250);
        assert_eq!(report.undeclared_site_chips, 250);
        assert_eq!(
            world.facility(&dest).unwrap().missing_total(),
            250,
            "declared chips never arrived"
        );
        assert!(world.check_invariants().is_ok());
    }

    #[test]
    fn undeclared_shipment_touches_truth_only() {
        let (mut world, origin, _, hideout) = shipping_world();
        world.begin_step(0);
        world
            .ship(ShipmentSpec {
                origin: origin.clone(),
                destination: hideout.clone(),
                count: 100,
                declared: false,
                transit_steps: 1,
                diverted_to: None,
                route: ExitRoute::Covert,
                tag: Some(StrategyId::DivertFromStorage),
            })
            .unwrap();
        world.begin_step(1);
        world.deliver_arrivals().unwrap();
        // Truth moved; declared ledger still claims everything at origin.
        let report = world.reconcile();
        assert_eq!(report.facility_diff(&origin, LedgerKey::CUTTING_EDGE), 100);
        assert_eq!(report.undeclared_site_chips, 100);
        let crossings = world
            .take_latent()
            .iter()
            .filter(|e| matches!(e.kind, LatentKind::PortalCrossing { .. }))
            .count();
        assert_eq!(crossings, 1);
    }

    #[test]
    fn holding_rule_rejects_fresh_declared_shipments() {
        let (mut world, origin, dest, _) = shipping_world();
        // Chips arrive at the data center at t=1, then someone tries to
        // ship them onward right away.
        world.begin_step(0);
        world
            .ship(ShipmentSpec {
                origin: origin.clone(),
                destination: dest.clone(),
                count: 1000,
                declared: true,
                transit_steps: 1,
                diverted_to: None,
                route: ExitRoute::Portal,
                tag: None,
            })
            .unwrap();
        world.begin_step(1);
        world.deliver_arrivals().unwrap();
        world.begin_step(2);
        let err = world.ship(ShipmentSpec {
            origin: dest.clone(),
            destination: origin.clone(),
            count: 10,
            declared: true,
            transit_steps: 1,
            diverted_to: None,
            route: ExitRoute::Portal,
            tag: None,
        });
        assert_eq!(err.unwrap_err(), WorldError::HoldingRuleViolation);
        // After the holding period the same shipment goes through.
        world.begin_step(1 + 5);
        assert!(world
            .ship(ShipmentSpec {
                origin: dest,
                destination: origin,
                count: 10,
                declared: true,
                transit_steps: 1,
                diverted_to: None,
                route: ExitRoute::Portal,
                tag: None,
            })
            .is_ok());
    }

    #[test]
    fn ship_rejects_overdraw_and_bad_endpoints() {
        let (mut world, origin, dest, hideout) = shipping_world();
        world.begin_step(0);
        assert_eq!(
            world
                .ship(ShipmentSpec {
                    origin: origin.clone(),
                    destination: dest.clone(),
                    count: 5000,
                    declared: true,
                    transit_steps: 1,
                    diverted_to: None,
                    route: ExitRoute::Portal,
                    tag: None,
                })
                .unwrap_err(),
            WorldError::InsufficientInventory
        );
        assert_eq!(
            world
                .ship(ShipmentSpec {
                    origin: origin.clone(),
                    destination: dest.clone(),
                    count: 1,
                    declared: true,
                    transit_steps: 1,
                    diverted_to: Some(dest.clone()),
                    route: ExitRoute::Portal,
                    tag: None,
                })
                .unwrap_err(),
            WorldError::InvalidShipment,
            "diversion target must differ from the declared destination"
        );
        assert_eq!(
            world
                .ship(ShipmentSpec {
                    origin,
                    destination: FacilityId::from("nowhere"),
                    count: 1,
                    declared: true,
                    transit_steps: 1,
                    diverted_to: None,
                    route: ExitRoute::Portal,
                    tag: None,
                })
                .unwrap_err(),
            WorldError::UnknownFacility
        );
        let _ = hideout;
    }

    fn elimination_world() -> (WorldState, FacilityId) {
        let mut world = WorldState::new(HoldingRule { min_hold_steps: 0 });
        let elim = FacilityId::from("elim-1");
        world.insert_facility(Facility::new(elim.clone(), FacilityKind::Elimination, true));
        world
            .seed_inventory(&elim, ChipTier::CuttingEdgeAi, 800)
            .unwrap();
        (world, elim)
    }

    #[test]
    fn honest_elimination_keeps_ledgers_agreeing() {
        let (mut world, elim) = elimination_world();
        world.begin_step(0);
        let record = world.eliminate(&elim, 300, true, None).unwrap();
        assert!(!record.fraudulent);
        assert!(world.reconcile().is_all_zero());
        assert_eq!(world.total_destroyed, 300);
        assert!(world.check_invariants().is_ok());
    }

    #[test]
    fn fake_elimination_diverts_to_cache() {
        let (mut world, elim) = elimination_world();
        world.begin_step(0);
        let record = world
            .eliminate(&elim, 500, false, Some(StrategyId::DivertAtElimination))
            .unwrap();
        assert!(record.fraudulent);
        let report = world.reconcile();
        assert_eq!(report.undeclared_site_chips, 500);
        // Declared says 300 remain; truth agrees at the facility itself.
        assert_eq!(report.facility_diff(&elim, LedgerKey::CUTTING_EDGE), 0);
        assert_eq!(world.total_destroyed, 0);
        assert!(world.check_invariants().is_ok());
    }

    #[test]
    fn zero_count_elimination_is_a_noop() {
        let (mut world, elim) = elimination_world();
        world.begin_step(0);
        let record = world.eliminate(&elim, 0, false, None).unwrap();
        assert!(!record.fraudulent);
        assert!(world.reconcile().is_all_zero());
    }

    #[test]
    fn eliminate_rejects_overdraw_and_wrong_kind() {
        let (mut world, elim) = elimination_world();
        world.begin_step(0);
        assert_eq!(
            world.eliminate(&elim, 900, true, None).unwrap_err(),
            WorldError::InsufficientInventory
        );
        let dc = FacilityId::from("dc-x");
        world.insert_facility(Facility::new(dc.clone(), FacilityKind::DataCenter, true));
        assert_eq!(
            world.eliminate(&dc, 1, true, None).unwrap_err(),
            WorldError::WrongFacilityKind
        );
    }

    #[test]
    fn tampering_shows_in_reconcile() {
        let mut world = WorldState::new(HoldingRule::default());
        let dc = FacilityId::from("dc-1");
        world.insert_facility(Facility::new(dc.clone(), FacilityKind::DataCenter, true));
        world.seed_inventory(&dc, ChipTier::CuttingEdgeAi, 10).unwrap();
        world.begin_step(0);
        world.tamper(&dc, 3, StrategyId::TamperChips).unwrap();
        let report = world.reconcile();
        assert_eq!(report.tampered_chips, 3);
        assert_eq!(report.facility_diff(&dc, LedgerKey::CUTTING_EDGE), 3);
        assert_eq!(
            report.facility_diff(&dc, LedgerKey::CUTTING_EDGE_TAMPERED),
            -3
        );
        assert!(world.check_invariants().is_ok());
    }

    #[test]
    fn fresh_world_reconciles_to_zero() {
        let (world, _, _, _) = shipping_world();
        assert!(world.reconcile().is_all_zero());
        assert!(world.check_invariants().is_ok());
    }
}
