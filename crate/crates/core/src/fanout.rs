//! Fanout quantum RAM protocol.
//!
//! The `k`'th index qubit controls the routing gates at every node of tree
//! level `k` simultaneously, so a memory call fires all `2^n - 1` routing
//! gates even though the bus only traverses `n` of them per branch. The call
//! runs binary-to-unary translation (index register into bus position),
//! couples the bus to the memory cells, transfers the payload into the
//! output register, and uncomputes the translation by reflecting the bus
//! back through the tree.
//!
//! Hardware details of any particular realization are abstracted to one
//! controlled routing gate per node; the gate-event log distinguishes
//! levels.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::event::{
    EventLog, FaultAction, FaultInjector, GateEvent, GateKind, NoFaults, SwitchSite,
};
use crate::oracle::{validate_call, AccessMode, MemoryArray};
use crate::qstate::{Bus, BusPosition, Configuration, Direction, QuantumState, Trit};
use crate::tree::{ChildSlot, TreeTopology};

/// Outcome of one fanout memory call.
#[derive(Debug)]
pub struct FanoutCallReport {
    pub final_state: QuantumState,
    pub gate_events: Vec<GateEvent>,
    /// Physical interactions between each branch's index qubits and the bus
    /// per pass: one per address bit.
    pub index_bus_interactions: usize,
    /// Routing nodes the bus traverses in any single branch.
    pub routing_nodes_traversed_per_branch: usize,
}

/// Static gate inventory of a depth-`n` fanout tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FanoutGateCounts {
    /// Routing gates present in hardware: `2^n - 1`.
    pub total_routing_gates: u64,
    /// Gates controlled by index bit `k`: `2^k`.
    pub controls_of_index_bit: Vec<u64>,
    /// Bus interactions per branch: `n`.
    pub bus_interactions: usize,
}

/// Gate inventory: `2^n - 1` routing gates, index bit `k` controlling `2^k`
/// of them, and `n` bus interactions per branch.
pub fn fanout_gate_counts(n: usize) -> Result<FanoutGateCounts> {
    if n < 1 {
        return Err(SimError::InvalidWidth(n));
    }
    if n > 62 {
        return Err(SimError::InvalidInput(format!(
            "address width {n} exceeds the 62-bit counting limit"
        )));
    }
    Ok(FanoutGateCounts {
        total_routing_gates: (1u64 << n) - 1,
        controls_of_index_bit: (0..n).map(|k| 1u64 << k).collect(),
        bus_interactions: n,
    })
}

/// Routing sense of a fanout node: ordinarily the controlling index bit,
/// unless an error latched the node's switching element.
fn effective_sense(cfg: &Configuration, node: u32, level: usize, n: usize) -> u8 {
    match cfg.qutrits[node as usize] {
        Trit::Wait => cfg.index_bit(level, n),
        t => t.to_bit(),
    }
}

fn bus_above(node: u32) -> BusPosition {
    if node == 0 {
        BusPosition::RootEdge
    } else {
        BusPosition::Node(node)
    }
}

pub(crate) struct FanoutEngine<'a> {
    topo: TreeTopology,
    n: usize,
    memory: &'a MemoryArray,
    mode: AccessMode,
    pub branches: Vec<(Configuration, Complex64)>,
    pub log: EventLog,
}

impl<'a> FanoutEngine<'a> {
    fn new(state: &QuantumState, memory: &'a MemoryArray, mode: AccessMode) -> Result<Self> {
        Ok(FanoutEngine {
            topo: TreeTopology::new(state.n())?,
            n: state.n(),
            memory,
            mode,
            branches: state.to_branches(),
            log: EventLog::new(),
        })
    }

    fn inject(&mut self) {
        self.log.uncounted(GateKind::BusInject, "-", "bus", None);
        for (cfg, _) in &mut self.branches {
            debug_assert!(cfg.bus.is_none());
            cfg.bus = Some(Bus {
                position: BusPosition::RootEdge,
                payload: 0,
                direction: Direction::Down,
            });
        }
    }

    /// Fires every routing gate level by level, carrying each branch's bus
    /// from the root edge to its addressed leaf.
    fn descend(&mut self, pass: usize, injector: &mut dyn FaultInjector) {
        for level in 0..self.n {
            for node in self.topo.level_nodes(level) {
                let fault = injector.sample(&SwitchSite::FanoutGate { node, level, pass });
                self.log.counted(
                    GateKind::Route,
                    format!("q{level}"),
                    format!("node:{node}"),
                    Some(level),
                );
                for (cfg, _) in &mut self.branches {
                    fire(cfg, &self.topo, node, level, self.n, fault);
                }
            }
        }
    }

    /// Couples each branch's bus to the cell at its leaf, then moves the
    /// payload into output bit `bit` of register A.
    fn interact_with_memory(&mut self, bit: usize) {
        for leaf in 0..self.topo.leaf_count() {
            self.log
                .uncounted(GateKind::MemoryAccess, format!("cell:{leaf}"), "bus", None);
        }
        self.log
            .uncounted(GateKind::OutputTransfer, "bus", format!("a{bit}"), None);
        for (cfg, _) in &mut self.branches {
            leaf_interaction(cfg, self.memory, self.mode, bit);
        }
    }

    /// Reflects the bus back through the tree; the same gates uncompute the
    /// translation, so no new switching events are logged or sampled.
    fn ascend(&mut self) {
        for level in (0..self.n).rev() {
            for node in self.topo.level_nodes(level) {
                for (cfg, _) in &mut self.branches {
                    fire_inverse(cfg, &self.topo, node, level, self.n);
                }
            }
        }
    }

    fn eject(&mut self, strict: bool) -> Result<()> {
        self.log.uncounted(GateKind::BusEject, "-", "bus", None);
        for (cfg, _) in &mut self.branches {
            match cfg.bus {
                Some(bus) if bus.position == BusPosition::RootEdge && bus.payload == 0 => {
                    cfg.bus = None;
                }
                Some(_) if strict => {
                    return Err(SimError::BusState(
                        "bus failed to return to the tree entrance".into(),
                    ));
                }
                // Faulty trajectories may strand the bus; keep it in the
                // configuration so the corruption stays visible.
                _ => {}
            }
        }
        Ok(())
    }
}

fn fire(
    cfg: &mut Configuration,
    topo: &TreeTopology,
    node: u32,
    level: usize,
    n: usize,
    fault: Option<FaultAction>,
) {
    match fault {
        Some(FaultAction::SetTrit(t)) => cfg.qutrits[node as usize] = t,
        Some(FaultAction::RouteFlip) => {
            // The switching element latches into the wrong routing sense.
            let sense = effective_sense(cfg, node, level, n);
            cfg.qutrits[node as usize] = Trit::from_bit(sense ^ 1);
        }
        Some(FaultAction::PayloadFlip) => {
            if let Some(bus) = &mut cfg.bus {
                if bus.position == bus_above(node) {
                    bus.payload ^= 1;
                }
            }
        }
        None => {}
    }
    let sense = effective_sense(cfg, node, level, n);
    if let Some(bus) = &mut cfg.bus {
        if bus.position == bus_above(node) {
            bus.position = match topo.child(node, sense) {
                ChildSlot::Node(c) => BusPosition::Node(c),
                ChildSlot::Leaf(l) => BusPosition::Leaf(l),
            };
        }
    }
}

fn fire_inverse(cfg: &mut Configuration, topo: &TreeTopology, node: u32, level: usize, n: usize) {
    let sense = effective_sense(cfg, node, level, n);
    let below = match topo.child(node, sense) {
        ChildSlot::Node(c) => BusPosition::Node(c),
        ChildSlot::Leaf(l) => BusPosition::Leaf(l),
    };
    if let Some(bus) = &mut cfg.bus {
        if bus.position == below {
            bus.position = bus_above(node);
            // Back at the entrance the bus is restored to its injected
            // orientation, making the ascent the exact inverse of the
            // descent.
            bus.direction = if bus.position == BusPosition::RootEdge {
                Direction::Down
            } else {
                Direction::Up
            };
        }
    }
}

/// Cell coupling and output transfer at the leaf, acting on output bit
/// `bit`. Copy mode accumulates by XOR and uncomputes the payload through a
/// second cell coupling; swap mode exchanges, vacating quantum cells.
pub(crate) fn leaf_interaction(
    cfg: &mut Configuration,
    memory: &MemoryArray,
    mode: AccessMode,
    bit: usize,
) {
    let Some(mut bus) = cfg.bus else { return };
    let BusPosition::Leaf(leaf) = bus.position else {
        return;
    };
    match mode {
        AccessMode::Copy => {
            let cell_bit = match cfg.memory.as_ref() {
                Some(cells) => ((cells[leaf as usize] >> bit) & 1) as u8,
                None => ((memory.cell(leaf) >> bit) & 1) as u8,
            };
            bus.payload ^= cell_bit;
            cfg.xor_output_bit(bit, bus.payload);
            bus.payload ^= cell_bit;
        }
        AccessMode::Swap => {
            let cells = cfg.memory.as_mut().expect("swap requires quantum memory");
            let cell_bit = ((cells[leaf as usize] >> bit) & 1) as u8;
            if cell_bit != bus.payload {
                cells[leaf as usize] ^= 1 << bit;
                bus.payload = cell_bit;
            }
            let out_bit = cfg.output_bit(bit);
            if out_bit != bus.payload {
                cfg.output ^= 1 << bit;
                bus.payload = out_bit;
            }
        }
    }
    cfg.bus = Some(bus);
}

fn ensure_bus_at(state: &QuantumState, want_root: bool) -> Result<()> {
    for (cfg, _) in state.terms() {
        match cfg.bus {
            None => {
                return Err(SimError::BusState("bus absent".into()));
            }
            Some(bus) if want_root => {
                if bus.position != BusPosition::RootEdge {
                    return Err(SimError::BusState(format!(
                        "bus at {}, expected the tree entrance",
                        bus.position.render()
                    )));
                }
                if bus.payload != 0 {
                    return Err(SimError::BusState("bus payload must start at 0".into()));
                }
            }
            Some(bus) => {
                if !matches!(bus.position, BusPosition::Leaf(_)) {
                    return Err(SimError::BusState(format!(
                        "bus at {}, expected a memory leaf",
                        bus.position.render()
                    )));
                }
            }
        }
        if cfg.qutrits.iter().any(|t| t.is_active()) {
            return Err(SimError::QutritPattern(
                "fanout routing expects every qutrit waiting".into(),
            ));
        }
    }
    Ok(())
}

/// Places a fresh bus (payload 0, pointing down) on the tree entrance edge.
pub fn inject_bus(state: &QuantumState) -> Result<QuantumState> {
    for (cfg, _) in state.terms() {
        if cfg.bus.is_some() {
            return Err(SimError::BusState("bus already present".into()));
        }
    }
    let branches = state
        .to_branches()
        .into_iter()
        .map(|(mut cfg, amp)| {
            cfg.bus = Some(Bus {
                position: BusPosition::RootEdge,
                payload: 0,
                direction: Direction::Down,
            });
            (cfg, amp)
        })
        .collect();
    Ok(QuantumState::from_branches(
        state.n(),
        state.d(),
        state.memory_mode(),
        branches,
    ))
}

/// Binary-to-unary translation: converts the address in Q into the position
/// of the bus, leaf `k` for each basis term with address `k`. For superposed
/// inputs the bus position ends perfectly correlated with Q.
pub fn binary_to_unary(state: &QuantumState) -> Result<QuantumState> {
    ensure_bus_at(state, true)?;
    let n = state.n();
    let topo = TreeTopology::new(n)?;
    let mut branches = state.to_branches();
    for level in 0..n {
        for node in topo.level_nodes(level) {
            for (cfg, _) in &mut branches {
                fire(cfg, &topo, node, level, n, None);
            }
        }
    }
    let out = QuantumState::from_branches(n, state.d(), state.memory_mode(), branches);
    out.check_norm()?;
    Ok(out)
}

/// Inverse translation: reflects the bus from the leaves back to the tree
/// entrance, uncomputing the position register.
pub fn inverse_binary_to_unary(state: &QuantumState) -> Result<QuantumState> {
    ensure_bus_at(state, false)?;
    let n = state.n();
    let topo = TreeTopology::new(n)?;
    let mut branches = state.to_branches();
    for level in (0..n).rev() {
        for node in topo.level_nodes(level) {
            for (cfg, _) in &mut branches {
                fire_inverse(cfg, &topo, node, level, n);
            }
        }
    }
    let out = QuantumState::from_branches(n, state.d(), state.memory_mode(), branches);
    out.check_norm()?;
    Ok(out)
}

/// Full fanout memory call: `d` passes of translate, couple, transfer,
/// uncompute. With classical memory the final state is exactly
/// `sum_k alpha_k |k>_Q |a xor f_k>_A` with the bus returned and
/// disentangled.
pub fn fanout_call(
    state: &QuantumState,
    memory: &MemoryArray,
    mode: AccessMode,
) -> Result<FanoutCallReport> {
    fanout_call_with_faults(state, memory, mode, &mut NoFaults, true)
}

pub(crate) fn fanout_call_with_faults(
    state: &QuantumState,
    memory: &MemoryArray,
    mode: AccessMode,
    injector: &mut dyn FaultInjector,
    strict: bool,
) -> Result<FanoutCallReport> {
    validate_call(state, memory, mode, true)?;
    let mut engine = FanoutEngine::new(state, memory, mode)?;
    for pass in 0..memory.d() {
        engine.inject();
        engine.descend(pass, injector);
        engine.interact_with_memory(pass);
        engine.ascend();
        engine.eject(strict)?;
    }
    let mut final_state =
        QuantumState::from_branches(state.n(), memory.d(), state.memory_mode(), engine.branches);
    final_state.set_d(memory.d());
    if strict {
        final_state.check_norm()?;
        debug_assert_eq!(final_state.support_len(), state.support_len());
    }
    Ok(FanoutCallReport {
        final_state,
        gate_events: engine.log.events,
        index_bus_interactions: state.n(),
        routing_nodes_traversed_per_branch: state.n(),
    })
}

impl FanoutCallReport {
    /// JSON report with the final-state dump, gate counts, and event log.
    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "final_state": self.final_state.dump(),
            "index_bus_interactions": self.index_bus_interactions,
            "routing_nodes_traversed_per_branch": self.routing_nodes_traversed_per_branch,
            "gate_events": self.gate_events,
        });
        serde_json::to_string_pretty(&value).expect("report serialization cannot fail")
    }
}
