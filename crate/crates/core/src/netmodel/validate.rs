use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{CaseSpec, LinkKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// At least one node and one period.
    NonEmpty,
    UniqueId,
    UnknownReference,
    /// Per-period series must have exactly `T` entries.
    SeriesLength,
    Finite,
    NonNegative,
    PositiveSusceptance,
    /// A line must connect two distinct nodes.
    LineEndpoints,
    /// A virtual link may not start and end at the same space-time node.
    SelfLoop,
    BoundsOrdered,
    PeriodRange,
    /// Entity load lists and load owners must agree.
    Membership,
    /// Link endpoints must sit at nodes where the link's entity has loads.
    LinkEndpoint,
    /// At most one data-center capacity per node.
    DuplicateCapacity,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::NonEmpty => "non-empty case",
            Rule::UniqueId => "unique ids",
            Rule::UnknownReference => "known reference",
            Rule::SeriesLength => "series length",
            Rule::Finite => "finite",
            Rule::NonNegative => "non-negative",
            Rule::PositiveSusceptance => "susceptance > 0",
            Rule::LineEndpoints => "distinct line endpoints",
            Rule::SelfLoop => "no self-loop",
            Rule::BoundsOrdered => "bounds ordered",
            Rule::PeriodRange => "period in range",
            Rule::Membership => "entity membership",
            Rule::LinkEndpoint => "link endpoint at entity node",
            Rule::DuplicateCapacity => "single capacity per node",
        }
    }
}

/// A single invariant violation, located by the id of the offending item.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub entity: String,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.entity, self.rule.name(), self.message)
    }
}

struct Checker<'a> {
    case: &'a CaseSpec,
    out: Vec<Diagnostic>,
    nodes: BTreeSet<&'a str>,
}

impl<'a> Checker<'a> {
    fn push(&mut self, entity: &str, rule: Rule, message: impl Into<String>) {
        self.out.push(Diagnostic {
            entity: entity.to_string(),
            rule,
            message: message.into(),
        });
    }

    fn node_ref(&mut self, owner: &str, field: &str, node: &str) {
        if !self.nodes.contains(node) {
            self.push(
                owner,
                Rule::UnknownReference,
                format!("{field} refers to unknown node '{node}'"),
            );
        }
    }

    fn series(&mut self, owner: &str, field: &str, values: &[f64], non_negative: bool) {
        if values.len() != self.case.periods {
            self.push(
                owner,
                Rule::SeriesLength,
                format!(
                    "{field} has {} entries, expected {}",
                    values.len(),
                    self.case.periods
                ),
            );
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            self.push(owner, Rule::Finite, format!("{field} must be finite (got {v})"));
        } else if non_negative {
            if let Some(v) = values.iter().find(|&&v| v < 0.0) {
                self.push(owner, Rule::NonNegative, format!("{field} ≥ 0 (got {v})"));
            }
        }
    }

    fn scalar(&mut self, owner: &str, field: &str, v: f64, non_negative: bool) {
        if !v.is_finite() {
            self.push(owner, Rule::Finite, format!("{field} must be finite (got {v})"));
        } else if non_negative && v < 0.0 {
            self.push(owner, Rule::NonNegative, format!("{field} ≥ 0 (got {v})"));
        }
    }

    fn unique<'b>(&mut self, kind: &str, ids: impl Iterator<Item = &'b str>) {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(id) {
                self.push(id, Rule::UniqueId, format!("duplicate {kind} id '{id}'"));
            }
        }
    }
}

/// Checks every case invariant. Returns an empty list iff the case is
/// valid; never panics.
pub fn validate(case: &CaseSpec) -> Vec<Diagnostic> {
    let mut c = Checker {
        case,
        out: Vec::new(),
        nodes: case.nodes.iter().map(|n| n.id.as_str()).collect(),
    };

    if case.nodes.is_empty() {
        c.push(&case.name, Rule::NonEmpty, "case has no nodes");
    }
    if case.periods == 0 {
        c.push(&case.name, Rule::NonEmpty, "case has no periods");
    }

    c.unique("node", case.nodes.iter().map(|n| n.id.as_str()));
    c.unique("generator", case.generators.iter().map(|g| g.id.as_str()));
    c.unique("load", case.loads.iter().map(|l| l.id.as_str()));
    c.unique("line", case.lines.iter().map(|l| l.id.as_str()));
    c.unique("entity", case.entities.iter().map(|e| e.id.as_str()));
    c.unique("virtual link", case.virtual_links.iter().map(|v| v.id.as_str()));

    for g in &case.generators {
        c.node_ref(&g.id, "node", &g.node);
        c.series(&g.id, "capacity", &g.capacity, true);
        c.series(&g.id, "bid_cost", &g.bid_cost, false);
        if let Some(r) = g.ramp_limit {
            c.scalar(&g.id, "ramp_limit", r, true);
        }
    }

    let entity_ids: BTreeSet<&str> = case.entities.iter().map(|e| e.id.as_str()).collect();
    for l in &case.loads {
        c.node_ref(&l.id, "node", &l.node);
        if !entity_ids.contains(l.entity.as_str()) {
            c.push(
                &l.id,
                Rule::UnknownReference,
                format!("entity refers to unknown entity '{}'", l.entity),
            );
        }
        c.series(&l.id, "request", &l.request, true);
        c.series(&l.id, "bid_value", &l.bid_value, false);
    }

    for l in &case.lines {
        c.node_ref(&l.id, "snd", &l.snd);
        c.node_ref(&l.id, "rec", &l.rec);
        if l.snd == l.rec {
            c.push(&l.id, Rule::LineEndpoints, format!("line connects '{}' to itself", l.snd));
        }
        c.series(&l.id, "capacity", &l.capacity, true);
        c.series(&l.id, "bid_cost", &l.bid_cost, true);
        if !l.susceptance.is_finite() || l.susceptance <= 0.0 {
            c.push(
                &l.id,
                Rule::PositiveSusceptance,
                format!("susceptance must be positive (got {})", l.susceptance),
            );
        }
    }

    let loads_by_id: BTreeMap<&str, &super::Load> =
        case.loads.iter().map(|l| (l.id.as_str(), l)).collect();
    let mut capacity_nodes = BTreeSet::new();
    for e in &case.entities {
        for lid in &e.loads {
            match loads_by_id.get(lid.as_str()) {
                None => c.push(
                    &e.id,
                    Rule::UnknownReference,
                    format!("lists unknown load '{lid}'"),
                ),
                Some(l) if l.entity != e.id => c.push(
                    &e.id,
                    Rule::Membership,
                    format!("lists load '{lid}' which belongs to '{}'", l.entity),
                ),
                Some(_) => {}
            }
        }
        for cap in &e.dc_capacity {
            c.node_ref(&e.id, "dc_capacity.node", &cap.node);
            c.series(&e.id, "dc_capacity.limit", &cap.limit, true);
            if !capacity_nodes.insert(cap.node.as_str()) {
                c.push(
                    &e.id,
                    Rule::DuplicateCapacity,
                    format!("data-center capacity at '{}' declared twice", cap.node),
                );
            }
        }
    }
    for l in &case.loads {
        if let Some(e) = case.entities.iter().find(|e| e.id == l.entity) {
            if !e.loads.contains(&l.id) {
                c.push(
                    &l.id,
                    Rule::Membership,
                    format!("owner '{}' does not list this load", e.id),
                );
            }
        }
    }

    for v in &case.virtual_links {
        if !entity_ids.contains(v.entity.as_str()) {
            c.push(
                &v.id,
                Rule::UnknownReference,
                format!("entity refers to unknown entity '{}'", v.entity),
            );
        }
        for (field, idx) in [("snd", &v.snd), ("rec", &v.rec)] {
            c.node_ref(&v.id, field, &idx.node);
            if idx.period < 1 || idx.period > case.periods {
                c.push(
                    &v.id,
                    Rule::PeriodRange,
                    format!("{field} period {} outside 1..={}", idx.period, case.periods),
                );
            }
            let hosts = case
                .loads
                .iter()
                .any(|l| l.entity == v.entity && l.node == idx.node);
            if c.nodes.contains(idx.node.as_str()) && !hosts {
                c.push(
                    &v.id,
                    Rule::LinkEndpoint,
                    format!(
                        "{field} node '{}' hosts no load of entity '{}'",
                        idx.node, v.entity
                    ),
                );
            }
        }
        if v.kind() == LinkKind::SelfLoop {
            c.push(
                &v.id,
                Rule::SelfLoop,
                format!("link sends and receives at {}", v.snd),
            );
        }
        c.scalar(&v.id, "lower", v.lower, false);
        c.scalar(&v.id, "upper", v.upper, false);
        if v.lower > v.upper {
            c.push(
                &v.id,
                Rule::BoundsOrdered,
                format!("lower {} exceeds upper {}", v.lower, v.upper),
            );
        }
        c.scalar(&v.id, "bid_cost", v.bid_cost, true);
    }

    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Entity, Generator, Load, Node, SpaceTimeIndex, VirtualLink};

    fn base() -> CaseSpec {
        CaseSpec {
            name: "t".into(),
            description: String::new(),
            nodes: vec![
                Node {
                    id: "n1".into(),
                    label: String::new(),
                },
                Node {
                    id: "n2".into(),
                    label: String::new(),
                },
            ],
            periods: 1,
            generators: vec![Generator {
                id: "g1".into(),
                node: "n1".into(),
                capacity: vec![10.0],
                bid_cost: vec![5.0],
                ramp_limit: None,
            }],
            loads: ["n1", "n2"]
                .iter()
                .enumerate()
                .map(|(k, n)| Load {
                    id: format!("j{}", k + 1),
                    node: n.to_string(),
                    entity: "e".into(),
                    request: vec![5.0],
                    bid_value: vec![20.0],
                })
                .collect(),
            lines: vec![],
            entities: vec![Entity {
                id: "e".into(),
                loads: vec!["j1".into(), "j2".into()],
                dc_capacity: vec![],
            }],
            virtual_links: vec![VirtualLink {
                id: "v".into(),
                entity: "e".into(),
                snd: SpaceTimeIndex::new("n1", 1),
                rec: SpaceTimeIndex::new("n2", 1),
                lower: -3.0,
                upper: 3.0,
                bid_cost: 1.0,
            }],
        }
    }

    fn rules(case: &CaseSpec) -> Vec<Rule> {
        validate(case).into_iter().map(|d| d.rule).collect()
    }

    #[test]
    fn valid_case_has_no_diagnostics() {
        assert!(validate(&base()).is_empty());
    }

    #[test]
    fn negative_ramp_limit() {
        let mut case = base();
        case.generators[0].ramp_limit = Some(-1.0);
        let diags = validate(&case);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, Rule::NonNegative);
        assert!(diags[0].message.contains("ramp_limit ≥ 0"));
        assert_eq!(diags[0].entity, "g1");
    }

    #[test]
    fn inverted_link_bounds() {
        let mut case = base();
        case.virtual_links[0].lower = 5.0;
        case.virtual_links[0].upper = 3.0;
        assert_eq!(rules(&case), vec![Rule::BoundsOrdered]);
        assert_eq!(Rule::BoundsOrdered.name(), "bounds ordered");
    }

    #[test]
    fn empty_case() {
        let case = CaseSpec::default();
        assert_eq!(rules(&case), vec![Rule::NonEmpty, Rule::NonEmpty]);
    }

    #[test]
    fn duplicate_ids_and_membership() {
        let mut case = base();
        case.loads[1].id = "j1".into();
        let r = rules(&case);
        assert!(r.contains(&Rule::UniqueId));
        assert!(r.contains(&Rule::UnknownReference));
    }

    #[test]
    fn link_endpoint_must_host_entity_load() {
        let mut case = base();
        case.loads.pop();
        case.entities[0].loads.pop();
        assert_eq!(rules(&case), vec![Rule::LinkEndpoint]);
    }

    #[test]
    fn link_period_out_of_range() {
        let mut case = base();
        case.virtual_links[0].rec.period = 2;
        assert_eq!(rules(&case), vec![Rule::PeriodRange]);
    }

    #[test]
    fn non_finite_values() {
        let mut case = base();
        case.loads[0].bid_value = vec![f64::NAN];
        case.virtual_links[0].bid_cost = -1.0;
        assert_eq!(rules(&case), vec![Rule::Finite, Rule::NonNegative]);
    }
}
