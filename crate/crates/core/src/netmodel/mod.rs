//! Domain model of a space-time clearing instance: nodes, periods,
//! generators, loads, lines, load-owning entities and the virtual links
//! those entities offer.

mod file;
mod validate;

pub use file::{parse_case, to_case_string, CaseError};
pub use validate::{validate, Diagnostic, Rule};

use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: String,
    pub label: String,
}

/// A `(node, period)` coordinate. Periods are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SpaceTimeIndex {
    pub node: String,
    pub period: usize,
}

impl SpaceTimeIndex {
    pub fn new(node: impl Into<String>, period: usize) -> Self {
        Self {
            node: node.into(),
            period,
        }
    }
}

impl fmt::Display for SpaceTimeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},t{})", self.node, self.period)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub id: String,
    pub node: String,
    /// MW per period.
    pub capacity: Vec<f64>,
    /// $/MWh per period.
    pub bid_cost: Vec<f64>,
    /// Largest change in dispatch between consecutive periods, MW.
    pub ramp_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Load {
    pub id: String,
    /// Hub node where the load is requested.
    pub node: String,
    pub entity: String,
    /// Requested MW per period.
    pub request: Vec<f64>,
    /// $/MWh per period.
    pub bid_value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Line {
    pub id: String,
    pub snd: String,
    pub rec: String,
    /// MW per period, applied to |flow|.
    pub capacity: Vec<f64>,
    /// $/MWh per period, charged on |flow|.
    pub bid_cost: Vec<f64>,
    /// Per-unit susceptance.
    pub susceptance: f64,
}

/// Data-center capacity of an entity at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcCapacity {
    pub node: String,
    /// MW per period.
    pub limit: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entity {
    pub id: String,
    pub loads: Vec<String>,
    /// Absent nodes are unbounded.
    pub dc_capacity: Vec<DcCapacity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// Same period, different nodes.
    Spatial,
    /// Same node, different periods.
    Temporal,
    /// Different node and different period.
    SpaceTime,
    /// Sender equals receiver. Never valid.
    SelfLoop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirtualLink {
    pub id: String,
    pub entity: String,
    pub snd: SpaceTimeIndex,
    pub rec: SpaceTimeIndex,
    /// Signed shift bounds, MW. Negative flow runs from `rec` to `snd`.
    pub lower: f64,
    pub upper: f64,
    /// $/MWh on |shift|.
    pub bid_cost: f64,
}

impl VirtualLink {
    pub fn kind(&self) -> LinkKind {
        match (self.snd.node == self.rec.node, self.snd.period == self.rec.period) {
            (true, true) => LinkKind::SelfLoop,
            (false, true) => LinkKind::Spatial,
            (true, false) => LinkKind::Temporal,
            (false, false) => LinkKind::SpaceTime,
        }
    }

    /// Lower bound used when a case file gives only the upper one: spatial
    /// links are bidirectional, links across time only move load forward.
    pub fn default_lower(kind: LinkKind, upper: f64) -> f64 {
        match kind {
            LinkKind::Spatial | LinkKind::SelfLoop => 0.0 - upper,
            LinkKind::Temporal | LinkKind::SpaceTime => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CaseSpec {
    pub name: String,
    pub description: String,
    pub nodes: Vec<Node>,
    /// Number of periods `T`; periods are `1..=T`.
    pub periods: usize,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    pub lines: Vec<Line>,
    pub entities: Vec<Entity>,
    pub virtual_links: Vec<VirtualLink>,
}

impl CaseSpec {
    pub fn period_range(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.periods
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn link(&self, id: &str) -> Option<&VirtualLink> {
        self.virtual_links.iter().find(|v| v.id == id)
    }

    pub fn link_mut(&mut self, id: &str) -> Option<&mut VirtualLink> {
        self.virtual_links.iter_mut().find(|v| v.id == id)
    }

    /// Data-center limit at `(node, period)`, if any entity declares one.
    pub fn dc_limit(&self, node: &str, period: usize) -> Option<f64> {
        self.entities
            .iter()
            .flat_map(|e| e.dc_capacity.iter())
            .find(|c| c.node == node)
            .and_then(|c| c.limit.get(period - 1).copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(a: (&str, usize), b: (&str, usize)) -> VirtualLink {
        VirtualLink {
            id: "v".into(),
            entity: "e".into(),
            snd: SpaceTimeIndex::new(a.0, a.1),
            rec: SpaceTimeIndex::new(b.0, b.1),
            lower: 0.0,
            upper: 1.0,
            bid_cost: 0.0,
        }
    }

    #[test]
    fn link_kinds() {
        assert_eq!(link(("a", 1), ("b", 1)).kind(), LinkKind::Spatial);
        assert_eq!(link(("a", 1), ("a", 2)).kind(), LinkKind::Temporal);
        assert_eq!(link(("a", 1), ("b", 3)).kind(), LinkKind::SpaceTime);
        assert_eq!(link(("a", 2), ("a", 2)).kind(), LinkKind::SelfLoop);
        assert_eq!(VirtualLink::default_lower(LinkKind::Spatial, 15.0), -15.0);
        assert_eq!(VirtualLink::default_lower(LinkKind::Temporal, 15.0), 0.0);
    }
}
