//! Gate-event logging and the error-injection hook shared by both quantum
//! protocols.
//!
//! Time accounting: one counted step is one two-body gate event (a routing
//! hop, a storage or unloading operation, or the memory interaction). Bus
//! injection/ejection and the output transfer happen at the tree boundary
//! and are logged without advancing the clock.
//!
//! Error accounting: per-switch errors attach to switching elements only.
//! In the fanout architecture every one of the `2^n - 1` controlled routing
//! gates fires once per pass (the reflected return trip reuses the same
//! activation), so both counting modes sample each gate once. In the bucket
//! brigade every clocked transit of a node is a distinct switching event;
//! per-active-switch counting samples only the `n` storage events, while
//! per-gate-event counting samples every hop, storage, and unloading event.
//! Memory couplings and output transfers are never sampled.

use serde::Serialize;

use crate::qstate::Trit;

/// What a logged two-body event did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    /// Controlled routing of a carrier at a tree node.
    Route,
    /// A waiting qutrit absorbed an index qubit.
    Store,
    /// Inverse storage: a qutrit released its index qubit.
    Unstore,
    /// Bus payload coupled to a memory cell.
    MemoryAccess,
    /// Bus payload transferred into the output register.
    OutputTransfer,
    BusInject,
    BusEject,
}

/// One entry of a call's gate-event log.
#[derive(Debug, Clone, Serialize)]
pub struct GateEvent {
    /// Clock value after this event; uncounted events repeat the current
    /// clock.
    pub step: u64,
    pub kind: GateKind,
    pub control: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

#[derive(Debug, Default)]
pub(crate) struct EventLog {
    pub events: Vec<GateEvent>,
    step: u64,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn counted(
        &mut self,
        kind: GateKind,
        control: impl Into<String>,
        target: impl Into<String>,
        level: Option<usize>,
    ) -> u64 {
        self.step += 1;
        self.events.push(GateEvent {
            step: self.step,
            kind,
            control: control.into(),
            target: target.into(),
            level,
        });
        self.step
    }

    pub fn uncounted(
        &mut self,
        kind: GateKind,
        control: impl Into<String>,
        target: impl Into<String>,
        level: Option<usize>,
    ) {
        self.events.push(GateEvent {
            step: self.step,
            kind,
            control: control.into(),
            target: target.into(),
            level,
        });
    }
}

/// Which carrier a bucket-brigade routing hop moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Carrier {
    IndexBit(usize),
    Bus,
    RecoveredBit(usize),
}

/// A switching event eligible for error injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SwitchSite {
    /// One controlled routing gate of the fanout tree firing.
    FanoutGate {
        node: u32,
        level: usize,
        pass: usize,
    },
    /// Storage of index bit `level` into its waiting qutrit.
    BucketStore { level: usize },
    /// Inverse storage releasing index bit `level`.
    BucketUnstore { level: usize },
    /// A carrier routed by the active switch at `level`.
    BucketHop { level: usize, carrier: Carrier },
}

/// Corruption applied by a sampled error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FaultAction {
    /// The switch routes (or stores) the wrong way.
    RouteFlip,
    /// The transiting carrier's value flips.
    PayloadFlip,
    /// The switching element's three-level state is replaced.
    SetTrit(Trit),
}

/// Decides, event by event, whether a switching event errs.
pub(crate) trait FaultInjector {
    fn sample(&mut self, site: &SwitchSite) -> Option<FaultAction>;
}

/// Ideal execution: no event ever errs.
pub(crate) struct NoFaults;

impl FaultInjector for NoFaults {
    fn sample(&mut self, _site: &SwitchSite) -> Option<FaultAction> {
        None
    }
}
