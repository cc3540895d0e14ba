//! Unit-delay gate model of the N-port grant logic.
//!
//! Logic depth here is a technology-independent stand-in for combinational
//! delay: every AND/OR/NOT gate costs one level, INPUT and REG nodes cost
//! nothing, and fanout and wiring are ignored. AND and OR take exactly two
//! inputs so that depth tracks the structure of the reduction.
//!
//! Both arbiter circuits take the same sources:
//!
//! - `req{i}` (INPUT): request of port `i`;
//! - `mask{i}` (REG): the registered token as a thermometer code, set iff
//!   `i >= token`.
//!
//! and drive outputs `gnt{i}`. The circuit is a masked/unmasked pair of
//! priority encoders: the lowest requester at or after the token wins, and if
//! there is none the lowest requester overall wins, which is exactly a cyclic
//! scan from the token. The two builders differ only in how the prefix ORs
//! are formed: [`build_chain`] ripples them port by port (depth linear in N),
//! [`build_tree`] uses a Sklansky parallel prefix (depth `ceil(log2 N)`).

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ports::RequestVector;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
    Input,
    Reg,
}

impl GateKind {
    fn is_source(self) -> bool {
        matches!(self, GateKind::Input | GateKind::Reg)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Input => "INPUT",
            GateKind::Reg => "REG",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: GateKind,
    pub fanin: Vec<NodeId>,
    /// Net name, required for INPUT and REG nodes.
    pub name: Option<String>,
}

/// Combinational DAG with registered sources.
///
/// REG outputs act as sources; a REG's optional fanin is its D input and is a
/// sink for timing purposes, so edges into a REG never close a combinational
/// loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateGraph {
    nodes: Vec<Node>,
    outputs: Vec<(String, NodeId)>,
}

impl GateGraph {
    /// Assemble a graph from raw parts. Arity, references and source names
    /// are checked here; acyclicity is checked by the analyses.
    pub fn from_parts(nodes: Vec<Node>, outputs: Vec<(String, NodeId)>) -> Result<Self> {
        for (id, node) in nodes.iter().enumerate() {
            let arity_ok = match node.kind {
                GateKind::And | GateKind::Or => node.fanin.len() == 2,
                GateKind::Not => node.fanin.len() == 1,
                GateKind::Input => node.fanin.is_empty(),
                GateKind::Reg => node.fanin.len() <= 1,
            };
            if !arity_ok {
                return Err(Error::Structure(format!(
                    "node {id}: {} with {} inputs",
                    node.kind,
                    node.fanin.len()
                )));
            }
            if let Some(&bad) = node.fanin.iter().find(|&&f| f >= nodes.len()) {
                return Err(Error::Structure(format!("node {id}: unknown fanin {bad}")));
            }
            if node.kind.is_source() && node.name.is_none() {
                return Err(Error::Structure(format!("node {id}: unnamed {}", node.kind)));
            }
        }
        if let Some((name, _)) = outputs.iter().find(|(_, id)| *id >= nodes.len()) {
            return Err(Error::Structure(format!("output {name} driven by unknown node")));
        }
        Ok(Self { nodes, outputs })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn outputs(&self) -> &[(String, NodeId)] {
        &self.outputs
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.kind.is_source()).count()
    }

    /// Topological order of all nodes, ignoring edges into REG nodes.
    fn topo_order(&self) -> Result<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut pending = vec![0usize; n];
        let mut fanout: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (id, node) in self.nodes.iter().enumerate() {
            if node.kind == GateKind::Reg {
                continue;
            }
            pending[id] = node.fanin.len();
            for &f in &node.fanin {
                fanout[f].push(id);
            }
        }
        let mut ready: Vec<NodeId> = (0..n).filter(|&id| pending[id] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(id) = ready.pop() {
            order.push(id);
            for &succ in &fanout[id] {
                pending[succ] -= 1;
                if pending[succ] == 0 {
                    ready.push(succ);
                }
            }
        }
        if order.len() < n {
            let node = (0..n).find(|&id| pending[id] > 0).unwrap_or(0);
            return Err(Error::CombinationalCycle { node });
        }
        Ok(order)
    }

    /// Gate levels on the longest path from any INPUT/REG to any output or
    /// REG D input.
    pub fn critical_path_depth(&self) -> Result<u32> {
        let mut depth = vec![0u32; self.nodes.len()];
        for id in self.topo_order()? {
            let node = &self.nodes[id];
            if !node.kind.is_source() {
                depth[id] = 1 + node.fanin.iter().map(|&f| depth[f]).max().unwrap_or(0);
            }
        }
        let to_outputs = self.outputs.iter().map(|&(_, id)| depth[id]);
        let to_regs = self
            .nodes
            .iter()
            .filter(|n| n.kind == GateKind::Reg)
            .flat_map(|n| n.fanin.iter().map(|&f| depth[f]));
        Ok(to_outputs.chain(to_regs).max().unwrap_or(0))
    }

    /// Evaluate every output given a value for each INPUT/REG by name.
    pub fn evaluate(&self, assignment: &HashMap<String, bool>) -> Result<Vec<bool>> {
        let mut value = vec![false; self.nodes.len()];
        for id in self.topo_order()? {
            let node = &self.nodes[id];
            let v = |k: usize| value[node.fanin[k]];
            value[id] = match node.kind {
                GateKind::Input | GateKind::Reg => {
                    let name = node.name.as_deref().unwrap_or_default();
                    *assignment
                        .get(name)
                        .ok_or_else(|| Error::MissingInput(name.to_string()))?
                }
                GateKind::And => v(0) && v(1),
                GateKind::Or => v(0) || v(1),
                GateKind::Not => !v(0),
            };
        }
        Ok(self.outputs.iter().map(|&(_, id)| value[id]).collect())
    }

    /// Text netlist, one line per node: `id KIND fanin...`.
    pub fn to_netlist_text(&self) -> String {
        let mut s = String::new();
        for (id, node) in self.nodes.iter().enumerate() {
            let _ = write!(s, "{id} {}", node.kind);
            for f in &node.fanin {
                let _ = write!(s, " {f}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    outputs: Vec<(String, NodeId)>,
}

impl Builder {
    fn push(&mut self, kind: GateKind, fanin: Vec<NodeId>, name: Option<String>) -> NodeId {
        self.nodes.push(Node { kind, fanin, name });
        self.nodes.len() - 1
    }

    fn input(&mut self, name: String) -> NodeId {
        self.push(GateKind::Input, vec![], Some(name))
    }

    fn reg(&mut self, name: String) -> NodeId {
        self.push(GateKind::Reg, vec![], Some(name))
    }

    fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(GateKind::And, vec![a, b], None)
    }

    fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(GateKind::Or, vec![a, b], None)
    }

    fn not(&mut self, a: NodeId) -> NodeId {
        self.push(GateKind::Not, vec![a], None)
    }

    fn finish(self) -> GateGraph {
        GateGraph {
            nodes: self.nodes,
            outputs: self.outputs,
        }
    }

    /// Inclusive prefix OR, rippled.
    fn ripple_prefix(&mut self, xs: &[NodeId]) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::with_capacity(xs.len());
        for &x in xs {
            let next = match out.last() {
                Some(&acc) => self.or(acc, x),
                None => x,
            };
            out.push(next);
        }
        out
    }

    /// Inclusive prefix OR, Sklansky divide and conquer.
    fn sklansky_prefix(&mut self, xs: &[NodeId]) -> Vec<NodeId> {
        if xs.len() <= 1 {
            return xs.to_vec();
        }
        let mid = xs.len().div_ceil(2);
        let mut lo = self.sklansky_prefix(&xs[..mid]);
        let hi = self.sklansky_prefix(&xs[mid..]);
        let carry = *lo.last().expect("non-empty");
        for h in hi {
            let joined = self.or(carry, h);
            lo.push(joined);
        }
        lo
    }
}

#[derive(Clone, Copy)]
enum PrefixStyle {
    Ripple,
    Sklansky,
}

fn build_arbiter(num_ports: usize, style: PrefixStyle) -> GateGraph {
    assert!(num_ports >= 1, "an arbiter needs at least one port");
    let n = num_ports;
    let mut b = Builder::default();
    let req: Vec<NodeId> = (0..n).map(|i| b.input(format!("req{i}"))).collect();
    let mask: Vec<NodeId> = (0..n).map(|i| b.reg(format!("mask{i}"))).collect();

    if n == 1 {
        let g = b.and(req[0], mask[0]);
        b.outputs.push(("gnt0".into(), g));
        return b.finish();
    }

    let masked: Vec<NodeId> = (0..n).map(|i| b.and(req[i], mask[i])).collect();
    let prefix = |b: &mut Builder, xs: &[NodeId]| match style {
        PrefixStyle::Ripple => b.ripple_prefix(xs),
        PrefixStyle::Sklansky => b.sklansky_prefix(xs),
    };
    let masked_seen = prefix(&mut b, &masked);
    let req_seen = prefix(&mut b, &req);
    let none_masked = b.not(masked_seen[n - 1]);

    for i in 0..n {
        let (first_masked, first_req) = if i == 0 {
            (masked[0], req[0])
        } else {
            let no_earlier_masked = b.not(masked_seen[i - 1]);
            let no_earlier_req = b.not(req_seen[i - 1]);
            (
                b.and(masked[i], no_earlier_masked),
                b.and(req[i], no_earlier_req),
            )
        };
        let wrapped = b.and(first_req, none_masked);
        let g = b.or(first_masked, wrapped);
        b.outputs.push((format!("gnt{i}"), g));
    }
    b.finish()
}

/// Grant logic with rippled priority chains; depth grows linearly with N.
pub fn build_chain(num_ports: usize) -> GateGraph {
    build_arbiter(num_ports, PrefixStyle::Ripple)
}

/// Grant logic with parallel-prefix priority resolution; depth grows with
/// `ceil(log2 N)`.
pub fn build_tree(num_ports: usize) -> GateGraph {
    build_arbiter(num_ports, PrefixStyle::Sklansky)
}

/// `ceil(log2 n)` for `n >= 1`.
pub fn reduction_levels(n: usize) -> u32 {
    assert!(n >= 1);
    usize::BITS - (n - 1).leading_zeros()
}

/// Source assignment for an arbiter circuit at a given token position.
pub fn arbiter_assignment(token: usize, requests: &RequestVector) -> HashMap<String, bool> {
    let n = requests.len();
    let mut a = HashMap::with_capacity(2 * n);
    for i in 0..n {
        a.insert(format!("req{i}"), requests.get(i));
        a.insert(format!("mask{i}"), i >= token);
    }
    a
}

/// Grant outputs of an arbiter circuit for a token position and requests.
pub fn evaluate_grants(graph: &GateGraph, token: usize, requests: &RequestVector) -> Result<Vec<bool>> {
    graph.evaluate(&arbiter_assignment(token, requests))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthRow {
    pub n: usize,
    pub chain_depth: u32,
    pub tree_depth: u32,
}

pub fn depth_row(n: usize) -> Result<DepthRow> {
    Ok(DepthRow {
        n,
        chain_depth: build_chain(n).critical_path_depth()?,
        tree_depth: build_tree(n).critical_path_depth()?,
    })
}
