//! Desk-scale end-to-end runs: a scenario description in, a tick-by-tick
//! event log out.
//!
//! A scenario places one PMU, a ring of remote GPS units reporting over a
//! 915 MHz uplink, and one counterfeit-signal transmitter, then gives the
//! transmitter a power profile over time. Each tick the engine sizes the
//! counterfeit signal at every receiver through free-space propagation,
//! decides capture (by power margin, or by synthesizing both signals and
//! running correlation acquisition), moves every captured clock by the
//! attacker's offset, carries unit reports across the uplink as real
//! frames, and lets the units outvote the PMU's own time source. Runs are
//! fully deterministic: the same scenario always yields the same log.
//!
//! # Example
//!
//! ```
//! use spoofwatch_core::simkit::{run, AttackProfile, Scenario};
//!
//! let mut scenario = Scenario::default();
//! scenario.profile = AttackProfile::None;
//! scenario.ticks = 3;
//!
//! let log = run(&scenario).unwrap();
//! assert_eq!(log.ticks.len(), 3);
//! assert_eq!(log.summary().attack_ticks, 0);
//! ```

mod engine;
mod log;
mod scenario;

pub use engine::{run, DEFAULT_LORA_TX_POWER_W, SIM_EPOCH_MS};
pub use log::{EventLog, RunSummary, TickRecord, UnitTickRecord};
pub use scenario::{
    AttackProfile, Placement, Scenario, SimError, SimMode, UnitPlacement, DEFAULT_UNIT_RADIUS_M,
    SCENARIO_SCHEMA,
};
