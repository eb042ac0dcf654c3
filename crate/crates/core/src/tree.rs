//! Binary-tree topology shared by every addressing architecture.
//!
//! Nodes are numbered level-order (root = 0) so that child and parent
//! lookups are O(1) arithmetic. A tree of depth `n` has `2^n - 1` switching
//! nodes; its `2^n` leaves coincide with the memory addresses. Address bit 0
//! is the root-level routing bit: a bit value of 0 routes "up" (child slot
//! 0), a value of 1 routes "down" (child slot 1), read root to leaf.

use crate::error::{Result, SimError};

/// Largest depth accepted for an instantiated topology. Counting formulas
/// accept larger `n`; this bound only guards allocations.
pub const MAX_TREE_DEPTH: usize = 26;

/// Returns the number of switching nodes, `2^n - 1`.
pub fn node_count(n: usize) -> Result<u64> {
    if n < 1 {
        return Err(SimError::InvalidWidth(n));
    }
    if n > 62 {
        return Err(SimError::InvalidInput(format!(
            "address width {n} exceeds the 62-bit counting limit"
        )));
    }
    Ok((1u64 << n) - 1)
}

/// Returns the number of memory leaves, `2^n`.
pub fn leaf_count(n: usize) -> Result<u64> {
    Ok(node_count(n)? + 1)
}

/// Either an internal switching node or a memory leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChildSlot {
    Node(u32),
    Leaf(u64),
}

/// Depth-`n` binary routing tree with level-order node ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeTopology {
    n: usize,
}

impl TreeTopology {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(SimError::InvalidWidth(n));
        }
        if n > MAX_TREE_DEPTH {
            return Err(SimError::InvalidInput(format!(
                "address width {n} exceeds the simulation limit of {MAX_TREE_DEPTH}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    pub fn leaf_count(&self) -> u64 {
        1u64 << self.n
    }

    /// Tree level of a node (root has level 0).
    pub fn level_of(&self, node: u32) -> usize {
        (u64::from(node) + 1).ilog2() as usize
    }

    /// Node ids making up one tree level.
    pub fn level_nodes(&self, level: usize) -> std::ops::Range<u32> {
        debug_assert!(level < self.n);
        ((1u32 << level) - 1)..((1u32 << (level + 1)) - 1)
    }

    /// Child of `node` in the given direction (0 = up, 1 = down).
    pub fn child(&self, node: u32, direction: u8) -> ChildSlot {
        debug_assert!(direction < 2);
        let c = 2 * u64::from(node) + 1 + u64::from(direction);
        if c < self.node_count() {
            ChildSlot::Node(c as u32)
        } else {
            ChildSlot::Leaf(c - self.node_count())
        }
    }

    /// Parent of an internal node; `None` for the root.
    pub fn parent(&self, node: u32) -> Option<u32> {
        if node == 0 {
            None
        } else {
            Some((node - 1) / 2)
        }
    }

    /// The final-level node wired to a memory leaf.
    pub fn parent_of_leaf(&self, leaf: u64) -> u32 {
        debug_assert!(leaf < self.leaf_count());
        (((leaf + self.node_count()) - 1) / 2) as u32
    }

    /// Which child slot of `parent` leads to `child`.
    pub fn slot_of(&self, parent: u32, child: ChildSlot) -> u8 {
        let c = match child {
            ChildSlot::Node(c) => u64::from(c),
            ChildSlot::Leaf(l) => l + self.node_count(),
        };
        debug_assert_eq!((c - 1) / 2, u64::from(parent));
        ((c - 1) % 2) as u8
    }
}

/// The root-to-leaf route selected by one address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressPath {
    /// Direction taken at each bifurcation, root to leaf (bits k0..k(n-1)).
    pub directions: Vec<u8>,
    /// Node ids visited, root to the final switching level.
    pub nodes: Vec<u32>,
}

/// Maps address `k` to the directions and nodes of its unique route.
pub fn path_for_address(n: usize, k: u64) -> Result<AddressPath> {
    let topo = TreeTopology::new(n)?;
    if k >= topo.leaf_count() {
        return Err(SimError::AddressOutOfRange {
            address: k,
            n,
            limit: topo.leaf_count(),
        });
    }
    let mut directions = Vec::with_capacity(n);
    let mut nodes = Vec::with_capacity(n);
    let mut node = 0u32;
    for level in 0..n {
        let bit = ((k >> (n - 1 - level)) & 1) as u8;
        directions.push(bit);
        nodes.push(node);
        match topo.child(node, bit) {
            ChildSlot::Node(c) => node = c,
            ChildSlot::Leaf(leaf) => debug_assert_eq!(leaf, k),
        }
    }
    Ok(AddressPath { directions, nodes })
}
