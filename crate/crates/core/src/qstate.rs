//! Sparse quantum state over the simulator's composite registers.
//!
//! A [`Configuration`] fixes one computational-basis assignment of every
//! register in the device: the index register Q, the mobile bus, the tree of
//! node qutrits, the memory cells (quantum-memory mode only), and the output
//! register A. A [`QuantumState`] is a sparse map from configurations to
//! complex amplitudes. All protocol gates on classical memory are
//! basis-state permutations, so the support of a state never grows during a
//! memory call.
//!
//! Conventions:
//! * index bit 0 is the root-level routing bit and the most significant bit
//!   of the integer address `k = k0 k1 .. k(n-1)`;
//! * bit value 0 routes "up" (child slot 0), bit value 1 routes "down";
//! * `d`, the output/cell width, defaults to 1; wider cells are transferred
//!   bit by bit.
//!
//! States are immutable once built: every operation returns a new value, so
//! they can be shared freely across threads.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SimError};

/// Amplitudes below this magnitude are dropped after every operation.
/// Protocol gates are exact permutations, so genuine amplitudes never decay
/// toward the threshold.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Allowed deviation of the squared norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Three-state switching element placed at each tree node.
///
/// `Wait` is the passive state (drawn as a dot); `Zero` and `One` route
/// transiting signals up or down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trit {
    Wait,
    Zero,
    One,
}

impl Trit {
    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Trit::Zero
        } else {
            Trit::One
        }
    }

    /// Routing direction of an active trit. Panics on `Wait`.
    pub fn to_bit(self) -> u8 {
        match self {
            Trit::Wait => panic!("waiting trit has no routing direction"),
            Trit::Zero => 0,
            Trit::One => 1,
        }
    }

    pub fn is_active(self) -> bool {
        self != Trit::Wait
    }

    pub fn render(self) -> char {
        match self {
            Trit::Wait => '.',
            Trit::Zero => '0',
            Trit::One => '1',
        }
    }
}

/// Travel direction of the bus carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Down,
    Up,
}

/// Where the bus sits in the tree: on the entrance edge, on the edge above
/// an internal node, or at a memory leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BusPosition {
    RootEdge,
    Node(u32),
    Leaf(u64),
}

impl BusPosition {
    pub fn render(&self) -> String {
        match self {
            BusPosition::RootEdge => "root".to_string(),
            BusPosition::Node(c) => format!("node:{c}"),
            BusPosition::Leaf(l) => format!("leaf:{l}"),
        }
    }
}

/// Mobile carrier transporting one bit between the tree entrance and the
/// memory cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bus {
    pub position: BusPosition,
    pub payload: u8,
    pub direction: Direction,
}

/// Whether the memory cells are classical parameters outside the state or
/// quantum degrees of freedom folded into every configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryMode {
    Classical,
    Quantum,
}

/// One computational-basis assignment of all registers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    /// Index register Q packed as the integer address (bit 0 is the MSB).
    pub index: u64,
    pub bus: Option<Bus>,
    /// One trit per tree node, level-order; length `2^n - 1`.
    pub qutrits: Vec<Trit>,
    /// Quantum-memory mode only: `2^n` cells of `d` bits each.
    pub memory: Option<Vec<u64>>,
    /// Output register A, `d` bits.
    pub output: u64,
}

impl Configuration {
    /// All-wait configuration for address `k` with empty bus and zero output.
    pub fn blank(n: usize, k: u64) -> Self {
        Configuration {
            index: k,
            bus: None,
            qutrits: vec![Trit::Wait; (1 << n) - 1],
            memory: None,
            output: 0,
        }
    }

    /// Index bit `i` (root-level bit first).
    pub fn index_bit(&self, i: usize, n: usize) -> u8 {
        ((self.index >> (n - 1 - i)) & 1) as u8
    }

    pub(crate) fn xor_index_bit(&mut self, i: usize, n: usize, value: u8) {
        self.index ^= u64::from(value) << (n - 1 - i);
    }

    pub fn output_bit(&self, b: usize) -> u8 {
        ((self.output >> b) & 1) as u8
    }

    pub(crate) fn xor_output_bit(&mut self, b: usize, value: u8) {
        self.output ^= u64::from(value) << b;
    }

    pub fn active_qutrits(&self) -> usize {
        self.qutrits.iter().filter(|t| t.is_active()).count()
    }

    fn render_bits(value: u64, width: usize) -> String {
        (0..width)
            .map(|i| {
                if (value >> (width - 1 - i)) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    fn render_q(&self, n: usize) -> String {
        Self::render_bits(self.index, n)
    }

    fn render_qutrits(&self) -> String {
        self.qutrits.iter().map(|t| t.render()).collect()
    }

    fn render_a(&self, d: usize) -> String {
        Self::render_bits(self.output, d)
    }
}

/// Named register, used to express bipartitions for entanglement checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Register {
    Index,
    Bus,
    Qutrits,
    Output,
    Memory,
}

/// Sparse map from configurations to amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    d: usize,
    mode: MemoryMode,
    amps: BTreeMap<Configuration, Complex64>,
}

impl QuantumState {
    pub(crate) fn from_map(
        n: usize,
        d: usize,
        mode: MemoryMode,
        amps: BTreeMap<Configuration, Complex64>,
    ) -> Self {
        let mut state = QuantumState { n, d, mode, amps };
        state.prune();
        state
    }

    /// Rebuilds a state from evolved branches, accumulating any colliding
    /// configurations.
    pub(crate) fn from_branches(
        n: usize,
        d: usize,
        mode: MemoryMode,
        branches: Vec<(Configuration, Complex64)>,
    ) -> Self {
        let mut amps: BTreeMap<Configuration, Complex64> = BTreeMap::new();
        for (cfg, amp) in branches {
            *amps.entry(cfg).or_insert(Complex64::ZERO) += amp;
        }
        Self::from_map(n, d, mode, amps)
    }

    /// Copies the support out as independent branches for an engine run.
    pub(crate) fn to_branches(&self) -> Vec<(Configuration, Complex64)> {
        self.amps.iter().map(|(c, a)| (c.clone(), *a)).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Output register width in bits.
    pub fn d(&self) -> usize {
        self.d
    }

    pub(crate) fn set_d(&mut self, d: usize) {
        self.d = d;
    }

    pub fn memory_mode(&self) -> MemoryMode {
        self.mode
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, cfg: &Configuration) -> Complex64 {
        self.amps.get(cfg).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Configuration, Complex64)> {
        self.amps.iter().map(|(c, a)| (c, *a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub fn check_norm(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalized {
                norm_sqr,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(())
    }

    /// Rescales to unit norm. Used after stochastic error channels whose
    /// trajectories can merge configurations.
    pub fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for a in self.amps.values_mut() {
                *a /= norm;
            }
        }
    }

    /// Machine-readable dump, sorted lexicographically by the rendered
    /// configuration for reproducible diffs.
    pub fn dump(&self) -> Vec<DumpEntry> {
        let mut entries: Vec<DumpEntry> = self
            .amps
            .iter()
            .map(|(cfg, amp)| DumpEntry {
                configuration: DumpConfiguration {
                    q: cfg.render_q(self.n),
                    bus: cfg.bus.map(|b| DumpBus {
                        position: b.position.render(),
                        payload: b.payload,
                        direction: b.direction,
                    }),
                    qutrits: cfg.render_qutrits(),
                    a: cfg.render_a(self.d),
                    m: cfg.memory.as_ref().map(|cells| {
                        cells
                            .iter()
                            .map(|&c| Configuration::render_bits(c, self.d))
                            .collect()
                    }),
                },
                re: amp.re,
                im: amp.im,
            })
            .collect();
        entries.sort_by_key(|e| e.configuration.sort_key());
        entries
    }

    pub fn dump_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump()).expect("dump serialization cannot fail")
    }
}

/// One line of the state dump format.
#[derive(Debug, Clone, Serialize)]
pub struct DumpEntry {
    pub configuration: DumpConfiguration,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpConfiguration {
    pub q: String,
    pub bus: Option<DumpBus>,
    /// One character per tree node: `.` waiting, `0` or `1` active.
    pub qutrits: String,
    pub a: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<String>>,
}

impl DumpConfiguration {
    fn sort_key(&self) -> (String, String, String, String, String) {
        (
            self.q.clone(),
            self.bus
                .as_ref()
                .map(|b| format!("{}|{}|{:?}", b.position, b.payload, b.direction))
                .unwrap_or_default(),
            self.qutrits.clone(),
            self.a.clone(),
            self.m.as_ref().map(|m| m.join(",")).unwrap_or_default(),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpBus {
    pub position: String,
    pub payload: u8,
    pub direction: Direction,
}

fn validate_width(n: usize) -> Result<()> {
    if n < 1 {
        return Err(SimError::InvalidWidth(n));
    }
    if n > crate::tree::MAX_TREE_DEPTH {
        return Err(SimError::InvalidInput(format!(
            "address width {n} exceeds the simulation limit of {}",
            crate::tree::MAX_TREE_DEPTH
        )));
    }
    Ok(())
}

fn validate_amplitude_list(n: usize, amplitudes: &[(u64, Complex64)]) -> Result<()> {
    let limit = 1u64 << n;
    let mut seen = std::collections::BTreeSet::new();
    let mut norm_sqr = 0.0;
    for &(address, amp) in amplitudes {
        if address >= limit {
            return Err(SimError::AddressOutOfRange { address, n, limit });
        }
        if !seen.insert(address) {
            return Err(SimError::DuplicateAddress(address));
        }
        norm_sqr += amp.norm_sqr();
    }
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(SimError::NotNormalized {
            norm_sqr,
            tolerance: NORM_TOLERANCE,
        });
    }
    Ok(())
}

/// Builds the address state `sum_k alpha_k |k>_Q` with all qutrits waiting,
/// no bus, and a cleared output register.
pub fn make_address_state(n: usize, amplitudes: &[(u64, Complex64)]) -> Result<QuantumState> {
    validate_width(n)?;
    validate_amplitude_list(n, amplitudes)?;
    let amps = amplitudes
        .iter()
        .map(|&(k, amp)| (Configuration::blank(n, k), amp))
        .collect();
    Ok(QuantumState::from_map(n, 1, MemoryMode::Classical, amps))
}

/// Single computational-basis state with an explicit output value, used to
/// probe the protocols over the full (Q, A) basis.
pub fn make_basis_state(n: usize, d: usize, address: u64, output: u64) -> Result<QuantumState> {
    validate_width(n)?;
    if !(1..=32).contains(&d) {
        return Err(SimError::InvalidInput(format!(
            "cell width {d} outside supported range 1..=32"
        )));
    }
    let limit = 1u64 << n;
    if address >= limit {
        return Err(SimError::AddressOutOfRange { address, n, limit });
    }
    if output >= (1u64 << d) {
        return Err(SimError::CellValueTooWide {
            address,
            value: output,
            d,
        });
    }
    let mut cfg = Configuration::blank(n, address);
    cfg.output = output;
    let mut amps = BTreeMap::new();
    amps.insert(cfg, Complex64::ONE);
    let mut state = QuantumState::from_map(n, d, MemoryMode::Classical, amps);
    state.set_d(d);
    Ok(state)
}

/// Builds a quantum-memory state from terms of the form
/// (address, cell assignment, amplitude). Cell superpositions are expressed
/// by listing several terms with different cell assignments.
pub fn make_quantum_memory_state(
    n: usize,
    d: usize,
    terms: &[(u64, Vec<u64>, Complex64)],
) -> Result<QuantumState> {
    validate_width(n)?;
    if !(1..=32).contains(&d) {
        return Err(SimError::InvalidInput(format!(
            "cell width {d} outside supported range 1..=32"
        )));
    }
    let cells = 1usize << n;
    let limit = 1u64 << n;
    let mut norm_sqr = 0.0;
    let mut amps: BTreeMap<Configuration, Complex64> = BTreeMap::new();
    for (address, assignment, amp) in terms {
        if *address >= limit {
            return Err(SimError::AddressOutOfRange {
                address: *address,
                n,
                limit,
            });
        }
        if assignment.len() != cells {
            return Err(SimError::MemorySizeMismatch {
                expected: cells,
                actual: assignment.len(),
            });
        }
        for (k, &value) in assignment.iter().enumerate() {
            if value >= (1u64 << d) {
                return Err(SimError::CellValueTooWide {
                    address: k as u64,
                    value,
                    d,
                });
            }
        }
        let mut cfg = Configuration::blank(n, *address);
        cfg.memory = Some(assignment.clone());
        if amps.insert(cfg, *amp).is_some() {
            return Err(SimError::DuplicateAddress(*address));
        }
        norm_sqr += amp.norm_sqr();
    }
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(SimError::NotNormalized {
            norm_sqr,
            tolerance: NORM_TOLERANCE,
        });
    }
    let mut state = QuantumState::from_map(n, d, MemoryMode::Quantum, amps);
    state.set_d(d);
    Ok(state)
}

fn check_same_shape(a: &QuantumState, b: &QuantumState) -> Result<()> {
    if a.n != b.n || a.d != b.d || a.mode != b.mode {
        return Err(SimError::ShapeMismatch(format!(
            "(n={}, d={}, {:?}) vs (n={}, d={}, {:?})",
            a.n, a.d, a.mode, b.n, b.d, b.mode
        )));
    }
    Ok(())
}

/// Squared overlap `|<a|b>|^2`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    check_same_shape(a, b)?;
    let (small, large) = if a.support_len() <= b.support_len() {
        (a, b)
    } else {
        (b, a)
    };
    let mut overlap = Complex64::ZERO;
    for (cfg, amp) in small.terms() {
        overlap += amp.conj() * large.amplitude(cfg);
    }
    Ok(overlap.norm_sqr())
}

fn registers_present(state: &QuantumState) -> Vec<Register> {
    let mut regs = vec![
        Register::Index,
        Register::Bus,
        Register::Qutrits,
        Register::Output,
    ];
    if state.mode == MemoryMode::Quantum {
        regs.push(Register::Memory);
    }
    regs
}

/// Canonical projection of a configuration onto a register subset, packed
/// into a comparable key.
fn project(cfg: &Configuration, selected: &[Register]) -> Vec<u64> {
    let mut key = Vec::new();
    for reg in selected {
        match reg {
            Register::Index => key.push(cfg.index),
            Register::Bus => match cfg.bus {
                None => key.push(u64::MAX),
                Some(bus) => {
                    let pos = match bus.position {
                        BusPosition::RootEdge => 0,
                        BusPosition::Node(c) => 1 + u64::from(c),
                        BusPosition::Leaf(l) => (1 << 32) + l,
                    };
                    key.push(
                        pos * 4
                            + u64::from(bus.payload) * 2
                            + if bus.direction == Direction::Up { 1 } else { 0 },
                    );
                }
            },
            Register::Qutrits => {
                let mut packed = 0u64;
                let mut used = 0;
                for t in &cfg.qutrits {
                    packed |= (*t as u64) << used;
                    used += 2;
                    if used == 64 {
                        key.push(packed);
                        packed = 0;
                        used = 0;
                    }
                }
                key.push(packed);
            }
            Register::Output => key.push(cfg.output),
            Register::Memory => {
                key.extend(cfg.memory.as_deref().unwrap_or(&[]).iter().copied());
            }
        }
    }
    key
}

/// Rank of a complex matrix by Gaussian elimination with partial pivoting.
fn matrix_rank(mut m: Vec<Vec<Complex64>>, tol: f64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).max_by(|&a, &b| {
            m[a][col]
                .norm()
                .partial_cmp(&m[b][col].norm())
                .expect("amplitude magnitudes are finite")
        });
        let Some(pivot) = pivot else { break };
        if m[pivot][col].norm() <= tol {
            continue;
        }
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let factor = row[col] / pivot_row[col];
            for (entry, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *entry -= factor * p;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Schmidt rank of the state across the bipartition (`partition` vs the
/// remaining registers), computed on the sparse support. A rank above 1
/// witnesses entanglement across the cut.
pub fn schmidt_rank(state: &QuantumState, partition: &[Register]) -> Result<usize> {
    let present = registers_present(state);
    let mut selected: Vec<Register> = partition.to_vec();
    selected.sort();
    selected.dedup();
    if selected.len() != partition.len() {
        return Err(SimError::InvalidPartition(
            "duplicate register in partition".into(),
        ));
    }
    if selected.is_empty() {
        return Err(SimError::InvalidPartition("empty partition".into()));
    }
    for reg in &selected {
        if !present.contains(reg) {
            return Err(SimError::InvalidPartition(format!(
                "{reg:?} is not a register of this state"
            )));
        }
    }
    if selected.len() == present.len() {
        return Err(SimError::InvalidPartition(
            "partition selects every register".into(),
        ));
    }
    let complement: Vec<Register> = present
        .iter()
        .copied()
        .filter(|r| !selected.contains(r))
        .collect();

    let mut row_keys = std::collections::BTreeMap::new();
    let mut col_keys = std::collections::BTreeMap::new();
    let mut entries = Vec::new();
    for (cfg, amp) in state.terms() {
        let rk = project(cfg, &selected);
        let ck = project(cfg, &complement);
        let next_row = row_keys.len();
        let row = *row_keys.entry(rk).or_insert(next_row);
        let next_col = col_keys.len();
        let col = *col_keys.entry(ck).or_insert(next_col);
        entries.push((row, col, amp));
    }
    let mut matrix = vec![vec![Complex64::ZERO; col_keys.len()]; row_keys.len()];
    for (row, col, amp) in entries {
        matrix[row][col] += amp;
    }
    Ok(matrix_rank(matrix, 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_basis_state() {
        let state = make_address_state(1, &[(0, c(1.0))]).unwrap();
        assert_eq!(state.support_len(), 1);
        let cfg = Configuration::blank(1, 0);
        assert_eq!(state.amplitude(&cfg), c(1.0));
        state.check_norm().unwrap();
    }

    #[test]
    fn equal_superposition() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let state = make_address_state(2, &[(0, c(a)), (3, c(a))]).unwrap();
        assert_eq!(state.support_len(), 2);
        assert_eq!(state.amplitude(&Configuration::blank(2, 0)), c(a));
        assert_eq!(state.amplitude(&Configuration::blank(2, 3)), c(a));
    }

    #[test]
    fn non_normalized_input_rejected() {
        let err = make_address_state(2, &[(0, c(0.6)), (1, c(0.7))]).unwrap_err();
        match err {
            SimError::NotNormalized { norm_sqr, .. } => {
                assert!((norm_sqr - 0.85).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_address_rejected() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let err = make_address_state(2, &[(1, c(a)), (1, c(a))]).unwrap_err();
        assert!(matches!(err, SimError::DuplicateAddress(1)));
    }

    #[test]
    fn fidelity_identity() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let psi = make_address_state(2, &[(0, c(a)), (2, c(a))]).unwrap();
        assert!((fidelity(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_orthogonal_basis_states() {
        let zero = make_address_state(1, &[(0, c(1.0))]).unwrap();
        let one = make_address_state(1, &[(1, c(1.0))]).unwrap();
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_half_overlap() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let zero = make_address_state(1, &[(0, c(1.0))]).unwrap();
        let plus = make_address_state(1, &[(0, c(a)), (1, c(a))]).unwrap();
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_shape_mismatch_rejected() {
        let a = make_address_state(1, &[(0, c(1.0))]).unwrap();
        let b = make_address_state(2, &[(0, c(1.0))]).unwrap();
        assert!(matches!(fidelity(&a, &b), Err(SimError::ShapeMismatch(_))));
    }

    #[test]
    fn schmidt_rank_product_state() {
        let state = make_address_state(2, &[(0, c(1.0))]).unwrap();
        assert_eq!(schmidt_rank(&state, &[Register::Index]).unwrap(), 1);
    }

    #[test]
    fn schmidt_rank_correlated_pair() {
        // (|00>_Q |0>_A + |01>_Q |1>_A) / sqrt(2)
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = BTreeMap::new();
        amps.insert(Configuration::blank(2, 0), c(a));
        let mut cfg = Configuration::blank(2, 1);
        cfg.output = 1;
        amps.insert(cfg, c(a));
        let state = QuantumState::from_map(2, 1, MemoryMode::Classical, amps);
        assert_eq!(schmidt_rank(&state, &[Register::Index]).unwrap(), 2);
    }

    #[test]
    fn schmidt_rank_rejects_empty_and_full_partitions() {
        let state = make_address_state(1, &[(0, c(1.0))]).unwrap();
        assert!(schmidt_rank(&state, &[]).is_err());
        assert!(schmidt_rank(
            &state,
            &[
                Register::Index,
                Register::Bus,
                Register::Qutrits,
                Register::Output
            ]
        )
        .is_err());
        assert!(schmidt_rank(&state, &[Register::Memory]).is_err());
    }

    #[test]
    fn dump_is_sorted_and_machine_readable() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let state = make_address_state(2, &[(2, c(a)), (0, c(a))]).unwrap();
        let dump = state.dump();
        assert_eq!(dump.len(), 2);
        assert_eq!(dump[0].configuration.q, "00");
        assert_eq!(dump[1].configuration.q, "10");
        assert_eq!(dump[0].configuration.qutrits, "...");
        assert_eq!(dump[0].configuration.a, "0");
        assert!(dump[0].configuration.bus.is_none());
        let parsed: serde_json::Value = serde_json::from_str(&state.dump_json()).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 2);
    }

    #[test]
    fn prune_drops_negligible_amplitudes() {
        let mut amps = BTreeMap::new();
        amps.insert(Configuration::blank(1, 0), c(1.0));
        amps.insert(Configuration::blank(1, 1), c(1e-15));
        let state = QuantumState::from_map(1, 1, MemoryMode::Classical, amps);
        assert_eq!(state.support_len(), 1);
    }

    #[test]
    fn quantum_memory_state_shapes_validated() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let ok = make_quantum_memory_state(1, 1, &[(0, vec![0, 1], c(a)), (1, vec![0, 1], c(a))])
            .unwrap();
        assert_eq!(ok.memory_mode(), MemoryMode::Quantum);
        assert!(make_quantum_memory_state(1, 1, &[(0, vec![0], c(1.0))]).is_err());
        assert!(make_quantum_memory_state(1, 1, &[(0, vec![0, 2], c(1.0))]).is_err());
    }
}
