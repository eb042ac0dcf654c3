//! Memory arrays and the brute-force reference memory call.
//!
//! [`ideal_qram_oracle`] applies the ideal transformation directly on the
//! sparse support, with no tree simulation at all. Every protocol in this
//! crate is tested against it.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::qstate::{Configuration, MemoryMode, QuantumState};

/// How a memory call transfers cell contents into the output register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessMode {
    /// Coherent copy: `|a>_A -> |a xor f_k>_A`. Entangles A with quantum
    /// cells instead of duplicating them.
    Copy,
    /// Exchange cell contents with A. Requires the cells inside the state.
    Swap,
}

/// `2^n` cells of `d` bits each, with a tag saying whether the cells are
/// classical parameters or quantum degrees of freedom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryArray {
    n: usize,
    d: usize,
    cells: Vec<u64>,
    mode: MemoryMode,
}

#[derive(Serialize, Deserialize)]
struct MemoryFile {
    n: usize,
    d: usize,
    cells: Vec<u64>,
}

impl MemoryArray {
    pub fn new(n: usize, d: usize, cells: Vec<u64>, mode: MemoryMode) -> Result<Self> {
        if n < 1 {
            return Err(SimError::InvalidWidth(n));
        }
        if !(1..=32).contains(&d) {
            return Err(SimError::InvalidInput(format!(
                "cell width {d} outside supported range 1..=32"
            )));
        }
        let expected = 1usize << n;
        if cells.len() != expected {
            return Err(SimError::MemorySizeMismatch {
                expected,
                actual: cells.len(),
            });
        }
        for (k, &value) in cells.iter().enumerate() {
            if value >= (1u64 << d) {
                return Err(SimError::CellValueTooWide {
                    address: k as u64,
                    value,
                    d,
                });
            }
        }
        Ok(MemoryArray { n, d, cells, mode })
    }

    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, vec![0; 1 << n], MemoryMode::Classical)
    }

    /// All cells filled with the all-ones `d`-bit value.
    pub fn ones(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, vec![(1 << d) - 1; 1 << n], MemoryMode::Classical)
    }

    /// Seeded uniformly random cell contents; the same seed always yields
    /// the same array.
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = (0..(1usize << n))
            .map(|_| rng.random_range(0..(1u64 << d)))
            .collect();
        Self::new(n, d, cells, MemoryMode::Classical)
    }

    /// Re-tags the array as quantum memory (cells to be folded into the
    /// state before a call).
    pub fn into_quantum(mut self) -> Self {
        self.mode = MemoryMode::Quantum;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> MemoryMode {
        self.mode
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    pub fn cell(&self, k: u64) -> u64 {
        self.cells[k as usize]
    }

    /// Loads `{n, d, cells}` JSON or flat text with one cell value per line.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.trim_start().starts_with('{') {
            Self::from_json(&text)
        } else {
            Self::from_flat_text(&text)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MemoryFile =
            serde_json::from_str(text).map_err(|e| SimError::MemoryFile(e.to_string()))?;
        Self::new(file.n, file.d, file.cells, MemoryMode::Classical)
    }

    /// Flat text: one cell value per line; the address width is inferred
    /// from the line count, which must be a power of two.
    pub fn from_flat_text(text: &str) -> Result<Self> {
        let mut cells = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let value: u64 = line.parse().map_err(|_| {
                SimError::MemoryFile(format!("line {}: {line:?} is not an integer", i + 1))
            })?;
            cells.push(value);
        }
        if cells.is_empty() || !cells.len().is_power_of_two() {
            return Err(SimError::MemoryFile(format!(
                "{} cell(s) found, expected a power of two",
                cells.len()
            )));
        }
        let n = cells.len().trailing_zeros() as usize;
        let d = cells
            .iter()
            .map(|&v| (64 - v.leading_zeros()) as usize)
            .max()
            .unwrap_or(1)
            .max(1);
        Self::new(n, d, cells, MemoryMode::Classical)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MemoryFile {
            n: self.n,
            d: self.d,
            cells: self.cells.clone(),
        })
        .expect("memory serialization cannot fail")
    }
}

/// Folds classical cell values into the state as quantum degrees of
/// freedom, producing a quantum-memory-mode state.
pub fn attach_quantum_memory(state: &QuantumState, memory: &MemoryArray) -> Result<QuantumState> {
    if state.n() != memory.n() {
        return Err(SimError::ShapeMismatch(format!(
            "state n={} vs memory n={}",
            state.n(),
            memory.n()
        )));
    }
    if state.memory_mode() == MemoryMode::Quantum {
        return Err(SimError::ShapeMismatch(
            "state already carries quantum memory cells".into(),
        ));
    }
    let amps: BTreeMap<Configuration, Complex64> = state
        .terms()
        .map(|(cfg, amp)| {
            let mut cfg = cfg.clone();
            cfg.memory = Some(memory.cells().to_vec());
            (cfg, amp)
        })
        .collect();
    let mut out = QuantumState::from_map(state.n(), memory.d(), MemoryMode::Quantum, amps);
    out.set_d(memory.d());
    Ok(out)
}

/// Shared precondition check for a memory call: the state must be a valid
/// address state (no bus, all qutrits waiting) whose memory mode matches the
/// array's, with output values inside the cell width. Swap access
/// additionally needs quantum memory; the protocol modules also need a
/// cleared output register for swap, controlled by `clear_output_for_swap`.
pub(crate) fn validate_call(
    state: &QuantumState,
    memory: &MemoryArray,
    mode: AccessMode,
    clear_output_for_swap: bool,
) -> Result<()> {
    if state.n() != memory.n() {
        return Err(SimError::MemorySizeMismatch {
            expected: 1 << state.n(),
            actual: 1 << memory.n(),
        });
    }
    if mode == AccessMode::Swap && memory.mode() == MemoryMode::Classical {
        return Err(SimError::SwapNeedsQuantumMemory);
    }
    match (memory.mode(), state.memory_mode()) {
        (MemoryMode::Classical, MemoryMode::Classical) => {}
        (MemoryMode::Quantum, MemoryMode::Quantum) => {}
        (MemoryMode::Quantum, MemoryMode::Classical) => {
            return Err(SimError::ShapeMismatch(
                "quantum memory cells must be folded into the state first \
                 (see attach_quantum_memory)"
                    .into(),
            ));
        }
        (MemoryMode::Classical, MemoryMode::Quantum) => {
            return Err(SimError::ShapeMismatch(
                "state carries quantum memory cells but the array is classical".into(),
            ));
        }
    }
    for (cfg, _) in state.terms() {
        if cfg.bus.is_some() {
            return Err(SimError::BusState(
                "address state must not contain a bus".into(),
            ));
        }
        if cfg.qutrits.iter().any(|t| t.is_active()) {
            return Err(SimError::QutritPattern(
                "address state must have every qutrit waiting".into(),
            ));
        }
        if cfg.output >= (1u64 << memory.d()) {
            return Err(SimError::CellValueTooWide {
                address: cfg.index,
                value: cfg.output,
                d: memory.d(),
            });
        }
        if mode == AccessMode::Swap && clear_output_for_swap && cfg.output != 0 {
            return Err(SimError::SwapNeedsClearOutput);
        }
        if state.memory_mode() == MemoryMode::Quantum {
            let cells = cfg.memory.as_ref().ok_or_else(|| {
                SimError::ShapeMismatch("quantum-memory state lacks cell values".into())
            })?;
            if cells.len() != (1 << state.n()) {
                return Err(SimError::MemorySizeMismatch {
                    expected: 1 << state.n(),
                    actual: cells.len(),
                });
            }
        }
    }
    Ok(())
}

/// Ideal memory call, applied term by term on the sparse support.
///
/// Copy mode sends `|k>_Q |a>_A` to `|k>_Q |a xor f_k>_A`; swap mode
/// exchanges cell `k` with A inside each basis term.
pub fn ideal_qram_oracle(
    state: &QuantumState,
    memory: &MemoryArray,
    mode: AccessMode,
) -> Result<QuantumState> {
    validate_call(state, memory, mode, false)?;
    let mut branches = state.to_branches();
    for (cfg, _) in branches.iter_mut() {
        let k = cfg.index as usize;
        match (mode, state.memory_mode()) {
            (AccessMode::Copy, MemoryMode::Classical) => {
                cfg.output ^= memory.cell(cfg.index);
            }
            (AccessMode::Copy, MemoryMode::Quantum) => {
                cfg.output ^= cfg.memory.as_ref().expect("validated")[k];
            }
            (AccessMode::Swap, MemoryMode::Quantum) => {
                let cells = cfg.memory.as_mut().expect("validated");
                std::mem::swap(&mut cells[k], &mut cfg.output);
            }
            (AccessMode::Swap, MemoryMode::Classical) => unreachable!("validated"),
        }
    }
    let mut out = QuantumState::from_branches(state.n(), memory.d(), state.memory_mode(), branches);
    out.set_d(memory.d());
    out.check_norm()?;
    Ok(out)
}
