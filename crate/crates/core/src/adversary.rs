//! The eleven enumerated violation strategies.
//!
//! Each strategy mutates the world's ground truth while leaving declarations
//! claiming compliance, and tags everything it touches so detection events
//! can be attributed back to it. Strategies are immutable after
//! construction; per-trial progress lives in the world and in the
//! [`StrategyRuntime`] returned by [`enact`].

use alloc::format;
use alloc::string::String;


use serde::{Deserialize, Serialize};

use core::fmt;

use crate::world::{
    ExitRoute, FacilityId, FacilityKind, LedgerKey, LatentKind, RelocationPlan, Room,
    RoomFunction, ShipmentSpec, Step, WorldError, WorldState,
};

/// Identifier of a violation channel.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    /// A1: report chip-making machines accurately, production levels low.
    UnderReportProduction,
    /// A2: run undeclared chip-making machines at a declared fab.
    UndeclaredMachines,
    /// A3: build and run an undeclared fab.
    UndeclaredFab,
    /// A4: divert chips from a declared data center or storage facility.
    DivertFromStorage,
    /// A5: divert chips from a reported transit path.
    DivertInTransit,
    /// A6: report chips melted at an elimination facility, keep them.
    DivertAtElimination,
    /// A7: hold undeclared chips in plain sight in declared server rooms.
    HideInServerRooms,
    /// A8: cache chips in areas that reportedly contain none.
    HideInNonServerAreas,
    /// A9: hide chips in secret rooms at a declared facility.
    SecretRooms,
    /// A10: move hidden chips away from inspectors mid-inspection.
    MoveDuringInspection,
    /// A11: strip required design features while declaring compliance.
    TamperChips,
}

impl StrategyId {
    pub const ALL: [StrategyId; 11] = [
        StrategyId::UnderReportProduction,
        StrategyId::UndeclaredMachines,
        StrategyId::UndeclaredFab,
        StrategyId::DivertFromStorage,
        StrategyId::DivertInTransit,
        StrategyId::DivertAtElimination,
        StrategyId::HideInServerRooms,
        StrategyId::HideInNonServerAreas,
        StrategyId::SecretRooms,
        StrategyId::MoveDuringInspection,
        StrategyId::TamperChips,
    ];

    /// Short channel code, `A1` through `A11`.
    pub fn code(&self) -> &'static str {
        match self {
            StrategyId::UnderReportProduction => "A1",
            StrategyId::UndeclaredMachines => "A2",
            StrategyId::UndeclaredFab => "A3",
            StrategyId::DivertFromStorage => "A4",
            StrategyId::DivertInTransit => "A5",
            StrategyId::DivertAtElimination => "A6",
            StrategyId::HideInServerRooms => "A7",
            StrategyId::HideInNonServerAreas => "A8",
            StrategyId::SecretRooms => "A9",
            StrategyId::MoveDuringInspection => "A10",
            StrategyId::TamperChips => "A11",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|s| s.code().eq_ignore_ascii_case(code))
    }

    /// True for the channels that *acquire* chips for undeclared use (as
    /// opposed to hosting them or tampering with them).
    pub fn is_acquisition(&self) -> bool {
        matches!(
            self,
            StrategyId::UnderReportProduction
                | StrategyId::UndeclaredMachines
                | StrategyId::UndeclaredFab
                | StrategyId::DivertFromStorage
                | StrategyId::DivertInTransit
                | StrategyId::DivertAtElimination
        )
    }

    /// True for the channels that *host* chips at or near declared sites.
    pub fn is_hosting(&self) -> bool {
        matches!(
            self,
            StrategyId::HideInServerRooms
                | StrategyId::HideInNonServerAreas
                | StrategyId::SecretRooms
                | StrategyId::MoveDuringInspection
        )
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Optional side-channel for strategies that accumulate chips at a fab:
/// periodically smuggle the surplus out to an undeclared site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExfiltrationPlan {
    pub to: FacilityId,
    pub every_steps: Step,
    pub route: ExitRoute,
}

/// Strategy-specific parameters. Exactly one channel per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StrategyParams {
    UnderReportProduction {
        fab: FacilityId,
        /// Chips per step produced beyond the declared rate.
        rate_gap: u64,
        exfiltrate: Option<ExfiltrationPlan>,
    },
    UndeclaredMachines {
        fab: FacilityId,
        machines: u64,
        /// Chips per step from the undeclared machines.
        extra_rate: u64,
        /// Conceal the machines in a secret room rather than on the floor.
        hide_in_secret_room: bool,
    },
    UndeclaredFab {
        /// Identifier for the new undeclared site.
        site: FacilityId,
        construction_steps: Step,
        rate: u64,
    },
    DivertFromStorage {
        facility: FacilityId,
        count: u64,
        to: FacilityId,
    },
    DivertInTransit {
        origin: FacilityId,
        destination: FacilityId,
        count: u64,
        divert_to: FacilityId,
        transit_steps: Step,
    },
    DivertAtElimination {
        facility: FacilityId,
        count: u64,
    },
    HideInServerRooms {
        facility: FacilityId,
        count: u64,
    },
    HideInNonServerAreas {
        facility: FacilityId,
        count: u64,
        /// Number of separate caches, one per declared non-server area.
        caches: u32,
    },
    SecretRooms {
        facility: FacilityId,
        count: u64,
        construction_steps: Step,
    },
    MoveDuringInspection {
        facility: FacilityId,
        count: u64,
        plan: RelocationPlan,
    },
    TamperChips {
        facility: FacilityId,
        count: u64,
    },
}

impl StrategyParams {
    pub fn id(&self) -> StrategyId {
        match self {
            StrategyParams::UnderReportProduction { .. } => StrategyId::UnderReportProduction,
            StrategyParams::UndeclaredMachines { .. } => StrategyId::UndeclaredMachines,
            StrategyParams::UndeclaredFab { .. } => StrategyId::UndeclaredFab,
            StrategyParams::DivertFromStorage { .. } => StrategyId::DivertFromStorage,
            StrategyParams::DivertInTransit { .. } => StrategyId::DivertInTransit,
            StrategyParams::DivertAtElimination { .. } => StrategyId::DivertAtElimination,
            StrategyParams::HideInServerRooms { .. } => StrategyId::HideInServerRooms,
            StrategyParams::HideInNonServerAreas { .. } => StrategyId::HideInNonServerAreas,
            StrategyParams::SecretRooms { .. } => StrategyId::SecretRooms,
            StrategyParams::MoveDuringInspection { .. } => StrategyId::MoveDuringInspection,
            StrategyParams::TamperChips { .. } => StrategyId::TamperChips,
        }
    }
}

/// One enacted violation channel with its goal size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryStrategy {
    pub params: StrategyParams,
    /// Chips the adversary needs at undeclared locations or tampered.
    pub goal_m: u64,
    /// Step at which the strategy is enacted.
    pub start_step: Step,
}

impl AdversaryStrategy {
    pub fn new(params: StrategyParams, goal_m: u64) -> Self {
        Self {
            params,
            goal_m,
            start_step: 0,
        }
    }

    pub fn id(&self) -> StrategyId {
        self.params.id()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    World(WorldError),
    /// Parameters reference a facility of the wrong kind or missing rooms.
    ParameterMismatch(String),
}

impl From<WorldError> for AdversaryError {
    fn from(e: WorldError) -> Self {
        AdversaryError::World(e)
    }
}

impl fmt::Display for AdversaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryError::World(e) => e.fmt(f),
            AdversaryError::ParameterMismatch(why) => write!(f, "parameter mismatch: {why}"),
        }
    }
}

/// Ongoing behavior a strategy leaves behind after enactment; the engine
/// steps it once per simulated day.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyRuntime {
    /// Everything already applied.
    Inert,
    /// Construction in progress at `site` until `completes_at`; production
    /// at `rate` begins on completion (the site is created at enactment).
    Construction {
        site: FacilityId,
        tag: StrategyId,
        completes_at: Step,
        rate: u64,
        started: bool,
    },
    /// Periodically smuggle accumulated surplus out of a fab.
    Exfiltration {
        fab: FacilityId,
        plan: ExfiltrationPlan,
        tag: StrategyId,
        last_run: Step,
    },
}

impl StrategyRuntime {
    /// Advance ongoing behavior at step `t`.
    pub fn step(&mut self, world: &mut WorldState, t: Step) -> Result<(), AdversaryError> {
        match self {
            StrategyRuntime::Inert => Ok(()),
            StrategyRuntime::Construction {
                site,
                tag,
                completes_at,
                rate,
                started,
            } => {
                if t < *completes_at {
                    world.push_latent(LatentKind::Construction, site, *tag, t);
                } else if !*started {
                    *started = true;
                    let facility = world.facility_mut(site)?;
                    facility.rate_covert = *rate;
                    facility.covert_tag = Some(*tag);
                    facility.machines_true += 1;
                }
                Ok(())
            }
            StrategyRuntime::Exfiltration {
                fab,
                plan,
                tag,
                last_run,
            } => {
                if t.saturating_sub(*last_run) < plan.every_steps {
                    return Ok(());
                }
                let facility = world.facility(fab)?;
                let truth = facility.true_inventory.count(LedgerKey::CUTTING_EDGE);
                let declared = facility.declared_inventory.count(LedgerKey::CUTTING_EDGE);
                let surplus = truth.saturating_sub(declared);
                if surplus == 0 {
                    return Ok(());
                }
                *last_run = t;
                world.ship(ShipmentSpec {
                    origin: fab.clone(),
                    destination: plan.to.clone(),
                    count: surplus,
                    declared: false,
                    transit_steps: 1,
                    diverted_to: None,
                    route: plan.route,
                    tag: Some(*tag),
                })?;
                Ok(())
            }
        }
    }
}

fn require_kind(
    world: &WorldState,
    id: &FacilityId,
    allowed: &[FacilityKind],
) -> Result<(), AdversaryError> {
    let facility = world.facility(id)?;
    if allowed.contains(&facility.kind) {
        Ok(())
    } else {
        Err(AdversaryError::ParameterMismatch(format!(
            "{} is a {}, expected one of {:?}",
            id, facility.kind, allowed
        )))
    }
}

fn first_declared_room(
    world: &mut WorldState,
    facility_id: &FacilityId,
    function: RoomFunction,
    index: usize,
) -> Result<String, AdversaryError> {
    let facility = world.facility(facility_id)?;
    facility
        .rooms
        .iter()
        .filter(|r| r.declared && r.function == function)
        .nth(index)
        .map(|r| r.id.clone())
        .ok_or_else(|| {
            AdversaryError::ParameterMismatch(format!(
                "{} lacks a declared {:?} room at index {}",
                facility_id, function, index
            ))
        })
}

/// Apply a strategy's mutation to the world at step `t` and return the
/// runtime driving any ongoing behavior. Latent events land in the world's
/// event buffer as side effects of the mutations.
pub fn enact(
    world: &mut WorldState,
    strategy: &AdversaryStrategy,
    t: Step,
) -> Result<StrategyRuntime, AdversaryError> {
    let tag = strategy.id();
    match &strategy.params {
        StrategyParams::UnderReportProduction {
            fab,
            rate_gap,
            exfiltrate,
        } => {
            require_kind(world, fab, &[FacilityKind::Fab])?;
            let facility = world.facility_mut(fab)?;
            if *rate_gap > facility.rate_metered {
                return Err(AdversaryError::ParameterMismatch(String::from(
                    "rate gap exceeds the fab's true production rate",
                )));
            }
            facility.rate_declared = facility.rate_metered - rate_gap;
            facility.rate_gap_tag = Some(tag);
            Ok(match exfiltrate {
                Some(plan) => StrategyRuntime::Exfiltration {
                    fab: fab.clone(),
                    plan: plan.clone(),
                    tag,
                    last_run: t,
                },
                None => StrategyRuntime::Inert,
            })
        }
        StrategyParams::UndeclaredMachines {
            fab,
            machines,
            extra_rate,
            hide_in_secret_room,
        } => {
            require_kind(world, fab, &[FacilityKind::Fab])?;
            let facility = world.facility_mut(fab)?;
            facility.machines_true += machines;
            facility.rate_covert += extra_rate;
            facility.covert_tag = Some(tag);
            if *hide_in_secret_room {
                facility.machines_hidden += machines;
                facility.rooms.push(Room {
                    id: format!("{}.secret-machine-room", fab.as_str()),
                    declared: false,
                    function: RoomFunction::NonServerArea,
                    hidden_chips: 0,
                    tag: Some(tag),
                    relocation: None,
                });
            }
            // Machines have to be bought and brought in.
            world.push_latent(LatentKind::ProcurementOrder, fab, tag, t);
            world.push_latent(
                LatentKind::PortalCrossing {
                    route: ExitRoute::Covert,
                },
                fab,
                tag,
                t,
            );
            Ok(StrategyRuntime::Inert)
        }
        StrategyParams::UndeclaredFab {
            site,
            construction_steps,
            rate,
        } => {
            if world.facilities.contains_key(site) {
                return Err(AdversaryError::ParameterMismatch(format!(
                    "site {site} already exists"
                )));
            }
            // An undeclared fab: kind Fab, unknown to the verifier.
            let facility = crate::world::Facility::new(site.clone(), FacilityKind::Fab, false);
            world.insert_facility(facility);
            world.push_latent(LatentKind::ProcurementOrder, site, tag, t);
            Ok(StrategyRuntime::Construction {
                site: site.clone(),
                tag,
                completes_at: t + construction_steps,
                rate: *rate,
                started: false,
            })
        }
        StrategyParams::DivertFromStorage {
            facility,
            count,
            to,
        } => {
            require_kind(
                world,
                facility,
                &[FacilityKind::DataCenter, FacilityKind::Storage],
            )?;
            world.divert(facility, to, *count, tag)?;
            Ok(StrategyRuntime::Inert)
        }
        StrategyParams::DivertInTransit {
            origin,
            destination,
            count,
            divert_to,
            transit_steps,
        } => {
            world.ship(ShipmentSpec {
                origin: origin.clone(),
                destination: destination.clone(),
                count: *count,
                declared: true,
                transit_steps: *transit_steps,
                diverted_to: Some(divert_to.clone()),
                route: ExitRoute::Portal,
                tag: Some(tag),
            })?;
            Ok(StrategyRuntime::Inert)
        }
        StrategyParams::DivertAtElimination { facility, count } => {
            require_kind(world, facility, &[FacilityKind::Elimination])?;
            world.eliminate(facility, *count, false, Some(tag))?;
            Ok(StrategyRuntime::Inert)
        }
        StrategyParams::HideInServerRooms { facility, count } => {
            require_kind(
                world,
                facility,
                &[FacilityKind::DataCenter, FacilityKind::Storage],
            )?;
            let room = first_declared_room(world, facility, RoomFunction::ServerRoom, 0)?;
            world.spawn_hidden(facility, &room, *count, tag)?;
            Ok(StrategyRuntime::Inert)
        }
        StrategyParams::HideInNonServerAreas {
            facility,
            count,
            caches,
        } => {
            require_kind(
                world,
                facility,
                &[FacilityKind::DataCenter, FacilityKind::Storage],
            )?;
            if *caches == 0 {
                return Err(AdversaryError::ParameterMismatch(String::from(
                    "at least one cache required",
                )));
            }
            let per_cache = count / *caches as u64;
            let mut remainder = count % *caches as u64;
            for i in 0..*caches {
                let room =
                    first_declared_room(world, facility, RoomFunction::NonServerArea, i as usize)?;
                let mut amount = per_cache;
                if remainder > 0 {
                    amount += 1;
                    remainder -= 1;
                }
                world.spawn_hidden(facility, &room, amount, tag)?;
            }
            Ok(StrategyRuntime::Inert)
        }
        StrategyParams::SecretRooms {
            facility,
            count,
            construction_steps,
        } => {
            require_kind(
                world,
                facility,
                &[FacilityKind::DataCenter, FacilityKind::Storage, FacilityKind::Fab],
            )?;
            let room_id = format!("{}.secret-room", facility.as_str());
            {
                let f = world.facility_mut(facility)?;
                f.rooms.push(Room {
                    id: room_id.clone(),
                    declared: false,
                    function: RoomFunction::ServerRoom,
                    hidden_chips: 0,
                    tag: Some(tag),
                    relocation: None,
                });
            }
            world.spawn_hidden(facility, &room_id, *count, tag)?;
            Ok(StrategyRuntime::Construction {
                site: facility.clone(),
                tag,
                completes_at: t + construction_steps,
                rate: 0,
                started: false,
            })
        }
        StrategyParams::MoveDuringInspection {
            facility,
            count,
            plan,
        } => {
            require_kind(
                world,
                facility,
                &[FacilityKind::DataCenter, FacilityKind::Storage],
            )?;
            let room = first_declared_room(world, facility, RoomFunction::ServerRoom, 0)?;
            world.spawn_hidden(facility, &room, *count, tag)?;
            let f = world.facility_mut(facility)?;
            let room = f.room_mut(&room).expect("room just used");
            room.relocation = Some(*plan);
            Ok(StrategyRuntime::Inert)
        }
        StrategyParams::TamperChips { facility, count } => {
            require_kind(
                world,
                facility,
                &[
                    FacilityKind::DataCenter,
                    FacilityKind::Storage,
                    FacilityKind::Fab,
                ],
            )?;
            world.tamper(facility, *count, tag)?;
            Ok(StrategyRuntime::Inert)
        }
    }
}

/// Fraction of the strategy's goal currently realized: chips it has put at
/// undeclared locations, hidden beyond declarations, or tampered, over
/// `goal_m`, clipped to `[0, 1]`.
pub fn progress(world: &WorldState, strategy: &AdversaryStrategy) -> f64 {
    let done = world
        .attributed
        .get(&strategy.id())
        .copied()
        .unwrap_or(0);
    let fraction = done as f64 / strategy.goal_m.max(1) as f64;
    fraction.min(1.0)
}
