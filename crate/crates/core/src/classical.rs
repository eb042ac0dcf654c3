//! Event-level simulation of the three classical addressing architectures,
//! with exact activation counts.
//!
//! Element identities:
//! * conventional fanout — each tree node carries a complementary pair of
//!   transistors with ids `2*node` and `2*node + 1`; every index bit drives
//!   one transistor of every pair at its level, so half the `2(2^n - 1)`
//!   transistors switch on every call;
//! * modified fanout — the same per-level banks, but the select signal
//!   threads through the tree so only the pair at the on-path node of each
//!   level is driven, plus one output-enable transistor per memory slot
//!   (ids offset by `2(2^n - 1)`), of which exactly one fires: `2n + 1`
//!   activations in total. The level-`i` bank still wires index bit `i` to
//!   `2^(i+1)` transistors, which is what rules this layout out for
//!   coherent use;
//! * bucket brigade — one trit per node; a call activates the `n` trits on
//!   the carved route and leaves the other `2^n - (n+1)` waiting.

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::qstate::Trit;
use crate::tree::{ChildSlot, TreeTopology};

/// Classical addressing architecture being traced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Fanout,
    ModifiedFanout,
    BucketBrigade,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Architecture::Fanout => "fanout",
            Architecture::ModifiedFanout => "modified-fanout",
            Architecture::BucketBrigade => "bucket-brigade",
        };
        f.write_str(name)
    }
}

/// Per-call log of which switching elements fired.
#[derive(Debug, Clone, Serialize)]
pub struct ActivationTrace {
    pub architecture: Architecture,
    pub n: usize,
    pub address: u64,
    pub activated_elements: Vec<u64>,
    pub activated_count: usize,
    pub total_elements: u64,
    /// Elements on the conducting path to the addressed cell.
    pub on_path_elements: Vec<u64>,
    /// Modified fanout only: transistors wired to each index bit.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fanout_load: Vec<u64>,
    /// Bucket brigade only: trits still waiting after the route is carved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waiting_trits: Option<u64>,
    /// Bucket brigade only: the leaf reached by the probe signal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_leaf: Option<u64>,
    pub time_steps: u64,
}

impl ActivationTrace {
    pub fn csv_header() -> &'static str {
        "architecture,n,k,total,activated,on_path,waiting,steps"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.architecture,
            self.n,
            self.address,
            self.total_elements,
            self.activated_count,
            self.on_path_elements.len(),
            self.waiting_trits
                .map(|w| w.to_string())
                .unwrap_or_default(),
            self.time_steps
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization cannot fail")
    }
}

fn topology_for(n: usize, k: u64) -> Result<TreeTopology> {
    let topo = TreeTopology::new(n)?;
    if k >= topo.leaf_count() {
        return Err(SimError::AddressOutOfRange {
            address: k,
            n,
            limit: topo.leaf_count(),
        });
    }
    Ok(topo)
}

fn bit_of(k: u64, level: usize, n: usize) -> u8 {
    ((k >> (n - 1 - level)) & 1) as u8
}

/// Conventional fanout call: every index bit drives one transistor of every
/// pair it controls, so `2^n - 1` of the `2(2^n - 1)` transistors activate;
/// only the `n` on the conducting path carry the signal.
pub fn simulate_fanout_classical(n: usize, k: u64) -> Result<ActivationTrace> {
    let topo = topology_for(n, k)?;
    let mut activated = Vec::with_capacity(topo.node_count() as usize);
    for level in 0..n {
        let bit = bit_of(k, level, n);
        for node in topo.level_nodes(level) {
            activated.push(2 * u64::from(node) + u64::from(bit));
        }
    }
    let path = crate::tree::path_for_address(n, k)?;
    let on_path: Vec<u64> = path
        .nodes
        .iter()
        .zip(&path.directions)
        .map(|(&node, &dir)| 2 * u64::from(node) + u64::from(dir))
        .collect();
    debug_assert!(on_path.iter().all(|id| activated.contains(id)));
    Ok(ActivationTrace {
        architecture: Architecture::Fanout,
        n,
        address: k,
        activated_count: activated.len(),
        activated_elements: activated,
        total_elements: 2 * topo.node_count(),
        on_path_elements: on_path,
        fanout_load: Vec::new(),
        waiting_trits: None,
        probe_leaf: None,
        time_steps: n as u64,
    })
}

/// Modified fanout call: the select signal threads level by level, driving
/// only the complementary pair at each on-path node plus one final-stage
/// output-enable transistor, `2n + 1` activations in total. The reported
/// fanout load shows the exponential wiring of the later index bits.
pub fn simulate_modified_fanout(n: usize, k: u64) -> Result<ActivationTrace> {
    let topo = topology_for(n, k)?;
    let path = crate::tree::path_for_address(n, k)?;
    let final_stage_offset = 2 * topo.node_count();
    let mut activated = Vec::with_capacity(2 * n + 1);
    let mut on_path = Vec::with_capacity(n + 1);
    for (&node, &dir) in path.nodes.iter().zip(&path.directions) {
        activated.push(2 * u64::from(node));
        activated.push(2 * u64::from(node) + 1);
        on_path.push(2 * u64::from(node) + u64::from(dir));
    }
    activated.push(final_stage_offset + k);
    on_path.push(final_stage_offset + k);
    let fanout_load = (0..n).map(|level| 1u64 << (level + 1)).collect();
    Ok(ActivationTrace {
        architecture: Architecture::ModifiedFanout,
        n,
        address: k,
        activated_count: activated.len(),
        activated_elements: activated,
        total_elements: 2 * topo.node_count() + topo.leaf_count(),
        on_path_elements: on_path,
        fanout_load,
        waiting_trits: None,
        probe_leaf: None,
        time_steps: n as u64 + 1,
    })
}

/// Bucket-brigade call as a trit state machine: the address bits are sent
/// in one at a time, routed by already-set trits and stored by the first
/// waiting trit met; a probe signal then follows the carved route; a reset
/// returns every trit to the waiting state so the protocol can restart.
pub fn simulate_bucket_classical(n: usize, k: u64) -> Result<ActivationTrace> {
    let topo = topology_for(n, k)?;
    let mut trits = vec![Trit::Wait; topo.node_count() as usize];
    let mut activated = Vec::with_capacity(n);
    for level in 0..n {
        let bit = bit_of(k, level, n);
        let mut node = 0u32;
        loop {
            match trits[node as usize] {
                Trit::Wait => {
                    trits[node as usize] = Trit::from_bit(bit);
                    activated.push(u64::from(node));
                    break;
                }
                t => match topo.child(node, t.to_bit()) {
                    ChildSlot::Node(c) => node = c,
                    ChildSlot::Leaf(_) => {
                        unreachable!("a stored bit always meets a waiting trit first")
                    }
                },
            }
        }
    }
    let waiting = trits.iter().filter(|t| **t == Trit::Wait).count() as u64;
    debug_assert_eq!(waiting, topo.node_count() - n as u64);

    // Probe: any subsequent signal is routed straight to the carved leaf.
    let mut node = 0u32;
    let probe_leaf = loop {
        match topo.child(node, trits[node as usize].to_bit()) {
            ChildSlot::Node(c) => node = c,
            ChildSlot::Leaf(l) => break l,
        }
    };

    // Reset: the internal clock returns every element to the waiting state.
    trits.fill(Trit::Wait);
    debug_assert!(trits.iter().all(|t| *t == Trit::Wait));

    Ok(ActivationTrace {
        architecture: Architecture::BucketBrigade,
        n,
        address: k,
        activated_count: activated.len(),
        on_path_elements: activated.clone(),
        activated_elements: activated,
        total_elements: topo.node_count(),
        fanout_load: Vec::new(),
        waiting_trits: Some(waiting),
        probe_leaf: Some(probe_leaf),
        time_steps: 2 * n as u64,
    })
}

/// Switching-element counts for linear versus two-dimensional memory
/// layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Elements2d {
    pub elements_1d: u64,
    pub elements_2d: u64,
}

/// Splitting the address into row and column halves replaces one depth-`n`
/// tree by a row tree and a column tree, cutting the element count to
/// roughly the square root of its original value. Odd widths split as
/// ceil/floor.
pub fn elements_2d(n: usize) -> Result<Elements2d> {
    if n < 2 {
        return Err(SimError::InvalidInput(format!(
            "two-dimensional layout needs n >= 2, got {n}"
        )));
    }
    if n > 62 {
        return Err(SimError::InvalidInput(format!(
            "address width {n} exceeds the 62-bit counting limit"
        )));
    }
    let rows = n.div_ceil(2);
    let cols = n / 2;
    Ok(Elements2d {
        elements_1d: (1u64 << n) - 1,
        elements_2d: ((1u64 << rows) - 1) + ((1u64 << cols) - 1),
    })
}
