//! Bucket-brigade quantum RAM protocol.
//!
//! Index qubits are sent into the tree one at a time. A waiting qutrit
//! absorbs the first qubit that reaches it (a two-level swap into its
//! active subspace) and from then on routes all later traffic by the stored
//! value. After the `n` qubits have carved a route, a bus qubit descends to
//! the addressed leaf, couples to the cell, transfers its payload to the
//! output register, and is reflected back. Unloading applies the inverse
//! storage operation level by level, deepest first, restoring the index
//! register and returning every qutrit to the waiting state.
//!
//! Only the `n` qutrits on the carved route ever switch, whatever the size
//! of the tree; a full call takes `n(n+1) + 2n + 1` two-body steps.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::event::{
    Carrier, EventLog, FaultAction, FaultInjector, GateEvent, GateKind, NoFaults, SwitchSite,
};
use crate::oracle::{validate_call, AccessMode, MemoryArray};
use crate::qstate::{Bus, BusPosition, Configuration, Direction, QuantumState, Trit};
use crate::tree::{ChildSlot, TreeTopology};

/// When each tree level was touched during a call (clock values from the
/// event log, first pass).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelTiming {
    pub level: usize,
    pub load_step: u64,
    pub descent_step: u64,
    pub ascent_step: u64,
    pub unload_step: u64,
}

/// Outcome of one bucket-brigade memory call.
#[derive(Debug)]
pub struct BucketCallReport {
    pub final_state: QuantumState,
    /// Switches active after loading, in every basis branch.
    pub active_switches_per_branch: usize,
    pub gate_events: Vec<GateEvent>,
    /// Counted two-body steps: `n(n+1) + d(2n+1)`.
    pub time_steps: u64,
    pub level_timing: Vec<LevelTiming>,
}

/// Two-body steps per call with single-bit cells:
/// `n(n+1)` for loading and unloading, `2n` for the bus round trip, and one
/// memory interaction. Quadratic in `n` while addressing `2^n` cells.
pub fn bb_step_count(n: u64) -> Result<u64> {
    if n < 1 {
        return Err(SimError::InvalidWidth(n as usize));
    }
    Ok(n * (n + 1) + 2 * n + 1)
}

struct BucketEngine<'a> {
    topo: TreeTopology,
    n: usize,
    memory: &'a MemoryArray,
    mode: AccessMode,
    branches: Vec<(Configuration, Complex64)>,
    log: EventLog,
    timing: Vec<LevelTiming>,
}

impl<'a> BucketEngine<'a> {
    fn new(state: &QuantumState, memory: &'a MemoryArray, mode: AccessMode) -> Result<Self> {
        let n = state.n();
        Ok(BucketEngine {
            topo: TreeTopology::new(n)?,
            n,
            memory,
            mode,
            branches: state.to_branches(),
            log: EventLog::new(),
            timing: (0..n)
                .map(|level| LevelTiming {
                    level,
                    load_step: 0,
                    descent_step: 0,
                    ascent_step: 0,
                    unload_step: 0,
                })
                .collect(),
        })
    }

    /// Sends the index qubits into the tree one at a time. Qubit `j` is
    /// routed through the `j` switches set before it and stored by the first
    /// waiting qutrit it meets, at level `j`.
    fn load(&mut self, injector: &mut dyn FaultInjector) {
        for j in 0..self.n {
            let mut hop_faults = Vec::with_capacity(j);
            for level in 0..j {
                hop_faults.push(injector.sample(&SwitchSite::BucketHop {
                    level,
                    carrier: Carrier::IndexBit(j),
                }));
                self.log.counted(
                    GateKind::Route,
                    format!("switch:level{level}"),
                    format!("q{j}"),
                    Some(level),
                );
            }
            let store_fault = injector.sample(&SwitchSite::BucketStore { level: j });
            let step = self.log.counted(
                GateKind::Store,
                format!("q{j}"),
                format!("qutrit:level{j}"),
                Some(j),
            );
            self.timing[j].load_step = step;
            for (cfg, _) in &mut self.branches {
                load_walk(cfg, &self.topo, self.n, j, &hop_faults, store_fault);
            }
        }
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

    fn descend(&mut self, pass: usize, injector: &mut dyn FaultInjector) {
        let mut faults = Vec::with_capacity(self.n);
        for level in 0..self.n {
            faults.push(injector.sample(&SwitchSite::BucketHop {
                level,
                carrier: Carrier::Bus,
            }));
            let step = self.log.counted(
                GateKind::Route,
                format!("switch:level{level}"),
                "bus",
                Some(level),
            );
            if pass == 0 {
                self.timing[level].descent_step = step;
            }
        }
        for (cfg, _) in &mut self.branches {
            bus_down_walk(cfg, &self.topo, &faults);
        }
    }

    fn interact_with_memory(&mut self, bit: usize) {
        self.log
            .counted(GateKind::MemoryAccess, "cell", "bus", None);
        self.log
            .uncounted(GateKind::OutputTransfer, "bus", format!("a{bit}"), None);
        for (cfg, _) in &mut self.branches {
            crate::fanout::leaf_interaction(cfg, self.memory, self.mode, bit);
        }
    }

    fn ascend(&mut self, pass: usize, injector: &mut dyn FaultInjector) {
        let mut faults = Vec::with_capacity(self.n);
        for level in (0..self.n).rev() {
            faults.push(injector.sample(&SwitchSite::BucketHop {
                level,
                carrier: Carrier::Bus,
            }));
            let step = self.log.counted(
                GateKind::Route,
                format!("switch:level{level}"),
                "bus",
                Some(level),
            );
            if pass == 0 {
                self.timing[level].ascent_step = step;
            }
        }
        for (cfg, _) in &mut self.branches {
            bus_up_walk(cfg, &self.topo, &faults);
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
                _ => {}
            }
        }
        Ok(())
    }

    /// Applies the inverse storage operation level by level, starting from
    /// the last level; recovered qubits are routed back up the carved path
    /// into the index register.
    fn unload(&mut self, injector: &mut dyn FaultInjector) {
        for j in (0..self.n).rev() {
            let unstore_fault = injector.sample(&SwitchSite::BucketUnstore { level: j });
            let step = self.log.counted(
                GateKind::Unstore,
                format!("qutrit:level{j}"),
                format!("q{j}"),
                Some(j),
            );
            self.timing[j].unload_step = step;
            let mut hop_faults = Vec::with_capacity(j);
            for level in (0..j).rev() {
                hop_faults.push(injector.sample(&SwitchSite::BucketHop {
                    level,
                    carrier: Carrier::RecoveredBit(j),
                }));
                self.log.counted(
                    GateKind::Route,
                    format!("switch:level{level}"),
                    format!("q{j}"),
                    Some(level),
                );
            }
            for (cfg, _) in &mut self.branches {
                unload_walk(cfg, &self.topo, self.n, j, unstore_fault, &hop_faults);
            }
        }
    }
}

/// The chain of active qutrits reachable from the root by following stored
/// values. In a properly loaded state this is the carved route.
fn active_chain(cfg: &Configuration, topo: &TreeTopology) -> Vec<u32> {
    let mut chain = Vec::new();
    let mut node = 0u32;
    loop {
        match cfg.qutrits[node as usize] {
            Trit::Wait => break,
            t => {
                chain.push(node);
                match topo.child(node, t.to_bit()) {
                    ChildSlot::Node(c) => node = c,
                    ChildSlot::Leaf(_) => break,
                }
            }
        }
    }
    chain
}

fn load_walk(
    cfg: &mut Configuration,
    topo: &TreeTopology,
    n: usize,
    j: usize,
    hop_faults: &[Option<FaultAction>],
    store_fault: Option<FaultAction>,
) {
    let mut value = cfg.index_bit(j, n);
    cfg.xor_index_bit(j, n, value); // swapped out of the register
    let mut node = 0u32;
    let mut hop = 0usize;
    loop {
        match cfg.qutrits[node as usize] {
            Trit::Wait => {
                match store_fault {
                    None => cfg.qutrits[node as usize] = Trit::from_bit(value),
                    // The switch stores the wrong way; a flipped carrier
                    // stores its flipped value.
                    Some(FaultAction::RouteFlip) | Some(FaultAction::PayloadFlip) => {
                        cfg.qutrits[node as usize] = Trit::from_bit(value ^ 1)
                    }
                    Some(FaultAction::SetTrit(t)) => cfg.qutrits[node as usize] = t,
                }
                return;
            }
            t => {
                let mut sense = t.to_bit();
                match hop_faults.get(hop).copied().flatten() {
                    Some(FaultAction::RouteFlip) => sense ^= 1,
                    Some(FaultAction::PayloadFlip) => value ^= 1,
                    Some(FaultAction::SetTrit(new)) => {
                        cfg.qutrits[node as usize] = new;
                        match new {
                            Trit::Wait => {
                                // The depolarized switch absorbs the carrier.
                                cfg.qutrits[node as usize] = Trit::from_bit(value);
                                return;
                            }
                            active => sense = active.to_bit(),
                        }
                    }
                    None => {}
                }
                hop += 1;
                match topo.child(node, sense) {
                    ChildSlot::Node(c) => node = c,
                    // Carrier misrouted out of the switching tree; it is
                    // absorbed at the array boundary and lost.
                    ChildSlot::Leaf(_) => return,
                }
            }
        }
    }
}

fn bus_down_walk(cfg: &mut Configuration, topo: &TreeTopology, faults: &[Option<FaultAction>]) {
    let Some(bus) = &mut cfg.bus else { return };
    debug_assert_eq!(bus.position, BusPosition::RootEdge);
    let mut node = 0u32;
    let mut hop = 0usize;
    loop {
        match cfg.qutrits[node as usize] {
            Trit::Wait => {
                // A waiting qutrit stores any incoming qubit, bus included.
                cfg.qutrits[node as usize] = Trit::from_bit(bus.payload);
                cfg.bus = None;
                return;
            }
            t => {
                let mut sense = t.to_bit();
                match faults.get(hop).copied().flatten() {
                    Some(FaultAction::RouteFlip) => sense ^= 1,
                    Some(FaultAction::PayloadFlip) => bus.payload ^= 1,
                    Some(FaultAction::SetTrit(new)) => {
                        cfg.qutrits[node as usize] = new;
                        match new {
                            Trit::Wait => {
                                cfg.qutrits[node as usize] = Trit::from_bit(bus.payload);
                                cfg.bus = None;
                                return;
                            }
                            active => sense = active.to_bit(),
                        }
                    }
                    None => {}
                }
                hop += 1;
                match topo.child(node, sense) {
                    ChildSlot::Node(c) => {
                        node = c;
                        bus.position = BusPosition::Node(c);
                    }
                    ChildSlot::Leaf(l) => {
                        bus.position = BusPosition::Leaf(l);
                        return;
                    }
                }
            }
        }
    }
}

fn bus_up_walk(cfg: &mut Configuration, topo: &TreeTopology, faults: &[Option<FaultAction>]) {
    let Some(bus) = &mut cfg.bus else { return };
    bus.direction = Direction::Up;
    let mut hop = 0usize;
    while bus.position != BusPosition::RootEdge {
        let below = bus.position;
        let parent = match below {
            BusPosition::Node(c) => topo.parent(c).expect("non-root edge has a parent"),
            BusPosition::Leaf(l) => topo.parent_of_leaf(l),
            BusPosition::RootEdge => unreachable!(),
        };
        match faults.get(hop).copied().flatten() {
            Some(FaultAction::RouteFlip) => {
                // Deflected into the sibling subtree, where the first
                // waiting qutrit absorbs the bus (or the carrier is lost at
                // the array boundary).
                let came_from = match below {
                    BusPosition::Node(c) => topo.slot_of(parent, ChildSlot::Node(c)),
                    BusPosition::Leaf(l) => topo.slot_of(parent, ChildSlot::Leaf(l)),
                    BusPosition::RootEdge => unreachable!(),
                };
                match topo.child(parent, came_from ^ 1) {
                    ChildSlot::Node(w) => {
                        if cfg.qutrits[w as usize] == Trit::Wait {
                            cfg.qutrits[w as usize] = Trit::from_bit(bus.payload);
                        }
                        cfg.bus = None;
                    }
                    ChildSlot::Leaf(_) => cfg.bus = None,
                }
                return;
            }
            Some(FaultAction::PayloadFlip) => bus.payload ^= 1,
            Some(FaultAction::SetTrit(t)) => cfg.qutrits[parent as usize] = t,
            None => {}
        }
        hop += 1;
        bus.position = if parent == 0 {
            bus.direction = Direction::Down;
            BusPosition::RootEdge
        } else {
            BusPosition::Node(parent)
        };
    }
}

fn unload_walk(
    cfg: &mut Configuration,
    topo: &TreeTopology,
    n: usize,
    j: usize,
    unstore_fault: Option<FaultAction>,
    hop_faults: &[Option<FaultAction>],
) {
    let chain = active_chain(cfg, topo);
    if chain.len() <= j {
        return; // nothing stored at this level (only possible after errors)
    }
    let node_j = chain[j];
    let mut value = cfg.qutrits[node_j as usize].to_bit();
    match unstore_fault {
        None => cfg.qutrits[node_j as usize] = Trit::Wait,
        Some(FaultAction::RouteFlip) | Some(FaultAction::PayloadFlip) => {
            value ^= 1;
            cfg.qutrits[node_j as usize] = Trit::Wait;
        }
        Some(FaultAction::SetTrit(t)) => cfg.qutrits[node_j as usize] = t,
    }
    // Route the recovered qubit back up the carved path.
    for (idx, level) in (0..j).rev().enumerate() {
        let here = chain[level];
        let from_below = chain[level + 1];
        match hop_faults.get(idx).copied().flatten() {
            Some(FaultAction::RouteFlip) => {
                let came_from = topo.slot_of(here, ChildSlot::Node(from_below));
                match topo.child(here, came_from ^ 1) {
                    ChildSlot::Node(w) => {
                        if cfg.qutrits[w as usize] == Trit::Wait {
                            cfg.qutrits[w as usize] = Trit::from_bit(value);
                        }
                    }
                    ChildSlot::Leaf(_) => {}
                }
                return; // carrier never reaches the register
            }
            Some(FaultAction::PayloadFlip) => value ^= 1,
            Some(FaultAction::SetTrit(t)) => cfg.qutrits[here as usize] = t,
            None => {}
        }
    }
    cfg.xor_index_bit(j, n, value);
}

fn ensure_all_waiting(state: &QuantumState) -> Result<()> {
    for (cfg, _) in state.terms() {
        if cfg.qutrits.iter().any(|t| t.is_active()) {
            return Err(SimError::QutritPattern(
                "loading requires every qutrit in the waiting state".into(),
            ));
        }
    }
    Ok(())
}

fn ensure_loaded_pattern(state: &QuantumState) -> Result<()> {
    let topo = TreeTopology::new(state.n())?;
    for (cfg, _) in state.terms() {
        let chain = active_chain(cfg, &topo);
        if chain.len() != state.n() {
            return Err(SimError::QutritPattern(format!(
                "active chain from the root has length {}, expected {}",
                chain.len(),
                state.n()
            )));
        }
        let active = cfg.active_qutrits();
        if active != state.n() {
            return Err(SimError::QutritPattern(format!(
                "{active} active qutrit(s) but only {} lie on the root-connected path",
                state.n()
            )));
        }
        if cfg.index != 0 {
            return Err(SimError::QutritPattern(
                "index register must be empty while its qubits are stored in the tree".into(),
            ));
        }
        if cfg.bus.is_some() {
            return Err(SimError::BusState(
                "no bus may be in flight during unloading".into(),
            ));
        }
    }
    Ok(())
}

/// Stores the index qubits into the tree. After loading, each basis branch
/// has exactly `n` active qutrits along its carved route and an emptied
/// index register.
pub fn load_index(state: &QuantumState) -> Result<QuantumState> {
    ensure_all_waiting(state)?;
    let n = state.n();
    let topo = TreeTopology::new(n)?;
    let mut branches = state.to_branches();
    for j in 0..n {
        for (cfg, _) in &mut branches {
            load_walk(cfg, &topo, n, j, &[], None);
        }
    }
    for (cfg, _) in &branches {
        debug_assert_eq!(cfg.active_qutrits(), n);
    }
    let out = QuantumState::from_branches(n, state.d(), state.memory_mode(), branches);
    out.check_norm()?;
    Ok(out)
}

/// Inverse of [`load_index`]: recovers the index register and restores every
/// qutrit to the waiting state, deepest level first.
pub fn unload_index(state: &QuantumState) -> Result<QuantumState> {
    ensure_loaded_pattern(state)?;
    let n = state.n();
    let topo = TreeTopology::new(n)?;
    let mut branches = state.to_branches();
    for j in (0..n).rev() {
        for (cfg, _) in &mut branches {
            unload_walk(cfg, &topo, n, j, None, &[]);
        }
    }
    let out = QuantumState::from_branches(n, state.d(), state.memory_mode(), branches);
    out.check_norm()?;
    Ok(out)
}

/// Full bucket-brigade memory call: load, bus round trip with memory
/// coupling (one round trip per cell bit), unload. With classical memory the
/// final state is exactly `sum_k alpha_k |k>_Q |a xor f_k>_A`.
pub fn bb_call(
    state: &QuantumState,
    memory: &MemoryArray,
    mode: AccessMode,
) -> Result<BucketCallReport> {
    bb_call_with_faults(state, memory, mode, &mut NoFaults, true)
}

pub(crate) fn bb_call_with_faults(
    state: &QuantumState,
    memory: &MemoryArray,
    mode: AccessMode,
    injector: &mut dyn FaultInjector,
    strict: bool,
) -> Result<BucketCallReport> {
    validate_call(state, memory, mode, true)?;
    ensure_all_waiting(state)?;
    let mut engine = BucketEngine::new(state, memory, mode)?;
    engine.load(injector);
    for pass in 0..memory.d() {
        engine.inject();
        engine.descend(pass, injector);
        engine.interact_with_memory(pass);
        engine.ascend(pass, injector);
        engine.eject(strict)?;
    }
    engine.unload(injector);
    let mut final_state =
        QuantumState::from_branches(state.n(), memory.d(), state.memory_mode(), engine.branches);
    final_state.set_d(memory.d());
    if strict {
        final_state.check_norm()?;
        debug_assert_eq!(final_state.support_len(), state.support_len());
    }
    Ok(BucketCallReport {
        final_state,
        active_switches_per_branch: state.n(),
        time_steps: engine.log.step(),
        gate_events: engine.log.events,
        level_timing: engine.timing,
    })
}

impl BucketCallReport {
    /// JSON report with the final-state dump, counters, event log, and the
    /// per-level timing trace.
    pub fn to_json(&self) -> String {
        let value = serde_json::json!({
            "final_state": self.final_state.dump(),
            "active_switches_per_branch": self.active_switches_per_branch,
            "time_steps": self.time_steps,
            "level_timing": self.level_timing,
            "gate_events": self.gate_events,
        });
        serde_json::to_string_pretty(&value).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ideal_qram_oracle;
    use crate::qstate::{
        fidelity, make_address_state, make_quantum_memory_state, schmidt_rank, MemoryMode, Register,
    };

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn load_stores_bits_along_the_route() {
        // k = 01: root stores 0 and routes up; node 1 stores 1.
        let state = make_address_state(2, &[(1, c(1.0))]).unwrap();
        let loaded = load_index(&state).unwrap();
        let (cfg, _) = loaded.terms().next().unwrap();
        assert_eq!(cfg.qutrits[0], Trit::Zero);
        assert_eq!(cfg.qutrits[1], Trit::One);
        assert_eq!(cfg.qutrits[2], Trit::Wait);
        assert_eq!(cfg.index, 0, "index qubits are swapped out");
    }

    #[test]
    fn load_acts_linearly_on_superpositions() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let state = make_address_state(2, &[(0, c(a)), (2, c(a))]).unwrap();
        let loaded = load_index(&state).unwrap();
        assert_eq!(loaded.support_len(), 2);
        let roots: std::collections::BTreeSet<Trit> =
            loaded.terms().map(|(cfg, _)| cfg.qutrits[0]).collect();
        assert_eq!(roots, [Trit::Zero, Trit::One].into_iter().collect());
    }

    #[test]
    fn load_activates_exactly_n_switches() {
        for k in 0..8 {
            let state = make_address_state(3, &[(k, c(1.0))]).unwrap();
            let loaded = load_index(&state).unwrap();
            let (cfg, _) = loaded.terms().next().unwrap();
            assert_eq!(cfg.active_qutrits(), 3);
            assert_eq!(cfg.qutrits.len() - cfg.active_qutrits(), 4);
        }
    }

    #[test]
    fn load_rejects_dirty_trees() {
        let state = make_address_state(2, &[(0, c(1.0))]).unwrap();
        let loaded = load_index(&state).unwrap();
        assert!(matches!(
            load_index(&loaded),
            Err(SimError::QutritPattern(_))
        ));
    }

    #[test]
    fn unload_inverts_load_on_a_basis_state() {
        let state = make_address_state(2, &[(1, c(1.0))]).unwrap();
        let back = unload_index(&load_index(&state).unwrap()).unwrap();
        assert!((fidelity(&state, &back).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unload_inverts_load_on_random_superpositions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        for _ in 0..50 {
            let mut addresses: Vec<u64> = (0..8).collect();
            for i in (1..addresses.len()).rev() {
                let j = rng.random_range(0..=i);
                addresses.swap(i, j);
            }
            let m = rng.random_range(2..=4usize);
            let mut terms: Vec<(u64, Complex64)> = addresses[..m]
                .iter()
                .map(|&k| {
                    (
                        k,
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    )
                })
                .collect();
            let norm = terms.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
            for (_, a) in &mut terms {
                *a /= norm;
            }
            let state = make_address_state(3, &terms).unwrap();
            let back = unload_index(&load_index(&state).unwrap()).unwrap();
            assert!((fidelity(&state, &back).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unload_rejects_orphan_switches() {
        let state = make_address_state(2, &[(3, c(1.0))]).unwrap();
        let loaded = load_index(&state).unwrap();
        let mut branches = loaded.to_branches();
        // Activate a qutrit disconnected from the carved route.
        branches[0].0.qutrits[1] = Trit::One;
        let corrupted = QuantumState::from_branches(2, 1, MemoryMode::Classical, branches);
        assert!(matches!(
            unload_index(&corrupted),
            Err(SimError::QutritPattern(_))
        ));
    }

    #[test]
    fn basis_call_reads_the_addressed_cell() {
        let memory = MemoryArray::new(2, 1, vec![1, 0, 0, 1], MemoryMode::Classical).unwrap();
        let state = make_address_state(2, &[(3, c(1.0))]).unwrap();
        let report = bb_call(&state, &memory, AccessMode::Copy).unwrap();
        let (cfg, _) = report.final_state.terms().next().unwrap();
        assert_eq!(cfg.index, 3);
        assert_eq!(cfg.output, 1);
        assert_eq!(cfg.active_qutrits(), 0);
        assert!(cfg.bus.is_none());
    }

    #[test]
    fn call_matches_oracle_and_fanout() {
        let memory = MemoryArray::random(3, 1, 77).unwrap();
        let state =
            make_address_state(3, &[(1, c(0.5)), (3, c(0.5)), (4, c(0.5)), (6, c(0.5))]).unwrap();
        let bucket = bb_call(&state, &memory, AccessMode::Copy).unwrap();
        let oracle = ideal_qram_oracle(&state, &memory, AccessMode::Copy).unwrap();
        let fanout = crate::fanout::fanout_call(&state, &memory, AccessMode::Copy).unwrap();
        assert!((fidelity(&bucket.final_state, &oracle).unwrap() - 1.0).abs() < 1e-12);
        for (cfg, amp) in oracle.terms() {
            assert!((bucket.final_state.amplitude(cfg) - amp).norm() < 1e-12);
            assert!((fanout.final_state.amplitude(cfg) - amp).norm() < 1e-12);
        }
    }

    #[test]
    fn swap_moves_a_quantum_cell_into_the_output() {
        // Cell 0 in (|0> + |1>)/sqrt(2), cell 1 in |0>, address |0>.
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let state =
            make_quantum_memory_state(1, 1, &[(0, vec![0, 0], c(a)), (0, vec![1, 0], c(a))])
                .unwrap();
        let memory = MemoryArray::zeros(1, 1).unwrap().into_quantum();
        let report = bb_call(&state, &memory, AccessMode::Swap).unwrap();
        // Output carries the superposition; cell 0 is vacated to |0>.
        let mut outputs = std::collections::BTreeSet::new();
        for (cfg, amp) in report.final_state.terms() {
            assert_eq!(cfg.memory.as_ref().unwrap(), &vec![0, 0]);
            assert!((amp.norm() - a).abs() < 1e-12);
            outputs.insert(cfg.output);
        }
        assert_eq!(outputs, [0u64, 1u64].into_iter().collect());
        assert_eq!(
            schmidt_rank(&report.final_state, &[Register::Memory]).unwrap(),
            1
        );
    }

    #[test]
    fn step_count_closed_form() {
        assert_eq!(bb_step_count(1).unwrap(), 5);
        assert_eq!(bb_step_count(3).unwrap(), 19);
        assert_eq!(bb_step_count(100).unwrap(), 10301);
        assert!(bb_step_count(0).is_err());
    }

    #[test]
    fn step_count_grows_quadratically() {
        for n in [20u64, 50, 100, 1000] {
            let ratio = bb_step_count(2 * n).unwrap() as f64 / bb_step_count(n).unwrap() as f64;
            assert!((3.5..=4.0).contains(&ratio), "ratio {ratio} at n={n}");
        }
    }

    #[test]
    fn traced_call_matches_step_count() {
        for n in 1..=6 {
            let state = make_address_state(n, &[(1 % (1 << n), c(1.0))]).unwrap();
            let memory = MemoryArray::random(n, 1, 3).unwrap();
            let report = bb_call(&state, &memory, AccessMode::Copy).unwrap();
            assert_eq!(report.time_steps, bb_step_count(n as u64).unwrap());
            let counted = report
                .gate_events
                .iter()
                .filter(|e| {
                    matches!(
                        e.kind,
                        GateKind::Route
                            | GateKind::Store
                            | GateKind::Unstore
                            | GateKind::MemoryAccess
                    )
                })
                .count() as u64;
            assert_eq!(counted, report.time_steps);
        }
    }

    #[test]
    fn level_timing_is_ordered() {
        let state = make_address_state(3, &[(5, c(1.0))]).unwrap();
        let memory = MemoryArray::zeros(3, 1).unwrap();
        let report = bb_call(&state, &memory, AccessMode::Copy).unwrap();
        for t in &report.level_timing {
            assert!(t.load_step < t.descent_step);
            assert!(t.descent_step < t.ascent_step);
            assert!(t.ascent_step < t.unload_step);
        }
    }

    #[test]
    fn report_exports_as_json_with_timing() {
        let state = make_address_state(2, &[(1, c(1.0))]).unwrap();
        let memory = MemoryArray::random(2, 1, 2).unwrap();
        let report = bb_call(&state, &memory, AccessMode::Copy).unwrap();
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(value["active_switches_per_branch"], 2);
        assert_eq!(value["time_steps"], 11);
        assert_eq!(value["level_timing"].as_array().unwrap().len(), 2);
        assert!(value["final_state"].is_array());
    }

    #[test]
    fn multi_bit_cells_need_one_round_trip_per_bit() {
        let memory = MemoryArray::random(2, 2, 8).unwrap();
        let state = make_address_state(2, &[(2, c(1.0))]).unwrap();
        let report = bb_call(&state, &memory, AccessMode::Copy).unwrap();
        let n = 2u64;
        assert_eq!(report.time_steps, n * (n + 1) + 2 * (2 * n + 1));
        let oracle = ideal_qram_oracle(&state, &memory, AccessMode::Copy).unwrap();
        assert!((fidelity(&report.final_state, &oracle).unwrap() - 1.0).abs() < 1e-12);
    }
}
