//! Native case-file format (TOML). See `cases/FORMAT.md` for the grammar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    validate, CaseSpec, DcCapacity, Diagnostic, Entity, Generator, Line, Load, Node,
    SpaceTimeIndex, VirtualLink,
};

#[derive(Debug, Error, PartialEq)]
pub enum CaseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid case ({} problem(s)): {}", .0.len(), summarize(.0))]
    Invalid(Vec<Diagnostic>),
}

fn summarize(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A per-period parameter: either one value broadcast over every period or
/// an explicit series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PerPeriod {
    Scalar(f64),
    Series(Vec<f64>),
}

impl PerPeriod {
    fn expand(self, periods: usize) -> Vec<f64> {
        match self {
            PerPeriod::Scalar(v) => vec![v; periods],
            PerPeriod::Series(s) => s,
        }
    }

    fn compact(values: &[f64]) -> Self {
        match values.split_first() {
            Some((first, rest)) if rest.iter().all(|v| v.to_bits() == first.to_bits()) => {
                PerPeriod::Scalar(*first)
            }
            _ => PerPeriod::Series(values.to_vec()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    name: String,
    #[serde(default)]
    description: String,
    periods: usize,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    generators: Vec<RawGenerator>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    loads: Vec<RawLoad>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lines: Vec<RawLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    entities: Vec<RawEntity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    virtual_links: Vec<RawLink>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    #[serde(default)]
    label: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    id: String,
    node: String,
    capacity: PerPeriod,
    bid_cost: PerPeriod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ramp_limit: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoad {
    id: String,
    node: String,
    entity: String,
    request: PerPeriod,
    bid_value: PerPeriod,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    id: String,
    snd: String,
    rec: String,
    capacity: PerPeriod,
    bid_cost: PerPeriod,
    susceptance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDcCapacity {
    node: String,
    limit: PerPeriod,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntity {
    id: String,
    #[serde(default)]
    loads: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    dc_capacity: Vec<RawDcCapacity>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndex {
    node: String,
    period: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    id: String,
    entity: String,
    snd: RawIndex,
    rec: RawIndex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    upper: f64,
    bid_cost: f64,
}

fn line_col(input: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(input.len());
    let before = &input[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a case file.
pub fn parse_case(input: &str) -> Result<CaseSpec, CaseError> {
    let raw: RawCase = toml::from_str(input).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_col(input, s.start))
            .unwrap_or((0, 0));
        CaseError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let case = from_raw(raw);
    let diags = validate(&case);
    if diags.is_empty() {
        Ok(case)
    } else {
        Err(CaseError::Invalid(diags))
    }
}

fn from_raw(raw: RawCase) -> CaseSpec {
    let t = raw.periods;
    CaseSpec {
        name: raw.name,
        description: raw.description,
        periods: t,
        nodes: raw
            .nodes
            .into_iter()
            .map(|n| Node {
                id: n.id,
                label: n.label,
            })
            .collect(),
        generators: raw
            .generators
            .into_iter()
            .map(|g| Generator {
                id: g.id,
                node: g.node,
                capacity: g.capacity.expand(t),
                bid_cost: g.bid_cost.expand(t),
                ramp_limit: g.ramp_limit,
            })
            .collect(),
        loads: raw
            .loads
            .into_iter()
            .map(|l| Load {
                id: l.id,
                node: l.node,
                entity: l.entity,
                request: l.request.expand(t),
                bid_value: l.bid_value.expand(t),
            })
            .collect(),
        lines: raw
            .lines
            .into_iter()
            .map(|l| Line {
                id: l.id,
                snd: l.snd,
                rec: l.rec,
                capacity: l.capacity.expand(t),
                bid_cost: l.bid_cost.expand(t),
                susceptance: l.susceptance,
            })
            .collect(),
        entities: raw
            .entities
            .into_iter()
            .map(|e| Entity {
                id: e.id,
                loads: e.loads,
                dc_capacity: e
                    .dc_capacity
                    .into_iter()
                    .map(|c| DcCapacity {
                        node: c.node,
                        limit: c.limit.expand(t),
                    })
                    .collect(),
            })
            .collect(),
        virtual_links: raw
            .virtual_links
            .into_iter()
            .map(|v| {
                let snd = SpaceTimeIndex::new(v.snd.node, v.snd.period);
                let rec = SpaceTimeIndex::new(v.rec.node, v.rec.period);
                let mut link = VirtualLink {
                    id: v.id,
                    entity: v.entity,
                    snd,
                    rec,
                    lower: 0.0,
                    upper: v.upper,
                    bid_cost: v.bid_cost,
                };
                link.lower = v
                    .lower
                    .unwrap_or_else(|| VirtualLink::default_lower(link.kind(), v.upper));
                link
            })
            .collect(),
    }
}

fn to_raw(case: &CaseSpec) -> RawCase {
    RawCase {
        name: case.name.clone(),
        description: case.description.clone(),
        periods: case.periods,
        nodes: case
            .nodes
            .iter()
            .map(|n| RawNode {
                id: n.id.clone(),
                label: n.label.clone(),
            })
            .collect(),
        generators: case
            .generators
            .iter()
            .map(|g| RawGenerator {
                id: g.id.clone(),
                node: g.node.clone(),
                capacity: PerPeriod::compact(&g.capacity),
                bid_cost: PerPeriod::compact(&g.bid_cost),
                ramp_limit: g.ramp_limit,
            })
            .collect(),
        loads: case
            .loads
            .iter()
            .map(|l| RawLoad {
                id: l.id.clone(),
                node: l.node.clone(),
                entity: l.entity.clone(),
                request: PerPeriod::compact(&l.request),
                bid_value: PerPeriod::compact(&l.bid_value),
            })
            .collect(),
        lines: case
            .lines
            .iter()
            .map(|l| RawLine {
                id: l.id.clone(),
                snd: l.snd.clone(),
                rec: l.rec.clone(),
                capacity: PerPeriod::compact(&l.capacity),
                bid_cost: PerPeriod::compact(&l.bid_cost),
                susceptance: l.susceptance,
            })
            .collect(),
        entities: case
            .entities
            .iter()
            .map(|e| RawEntity {
                id: e.id.clone(),
                loads: e.loads.clone(),
                dc_capacity: e
                    .dc_capacity
                    .iter()
                    .map(|c| RawDcCapacity {
                        node: c.node.clone(),
                        limit: PerPeriod::compact(&c.limit),
                    })
                    .collect(),
            })
            .collect(),
        virtual_links: case
            .virtual_links
            .iter()
            .map(|v| RawLink {
                id: v.id.clone(),
                entity: v.entity.clone(),
                snd: RawIndex {
                    node: v.snd.node.clone(),
                    period: v.snd.period,
                },
                rec: RawIndex {
                    node: v.rec.node.clone(),
                    period: v.rec.period,
                },
                lower: Some(v.lower),
                upper: v.upper,
                bid_cost: v.bid_cost,
            })
            .collect(),
    }
}

/// Renders a case in the native format. Uniform per-period series are
/// written as scalars and link lower bounds are always explicit.
pub fn to_case_string(case: &CaseSpec) -> String {
    let text = toml::to_string(&to_raw(case)).expect("case data is always representable as TOML");
    let mut doc: toml_edit::DocumentMut = text.parse().expect("serializer output parses");
    if let Some(links) = doc
        .get_mut("virtual_links")
        .and_then(|i| i.as_array_of_tables_mut())
    {
        for link in links.iter_mut() {
            for key in ["snd", "rec"] {
                if let Some(toml_edit::Item::Table(t)) = link.remove(key) {
                    link.insert(key, toml_edit::value(t.into_inline_table()));
                }
            }
        }
    }
    doc.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::Rule;

    const SMALL: &str = r#"
name = "two-node"
periods = 2

[[nodes]]
id = "a"
[[nodes]]
id = "b"

[[generators]]
id = "g"
node = "a"
capacity = 50
bid_cost = [10, 12]
ramp_limit = 20

[[loads]]
id = "j"
node = "b"
entity = "e"
request = 30
bid_value = 40

[[loads]]
id = "k"
node = "a"
entity = "e"
request = 0
bid_value = 40

[[lines]]
id = "l"
snd = "a"
rec = "b"
capacity = 100
bid_cost = 1
susceptance = 0.5

[[entities]]
id = "e"
loads = ["j", "k"]
dc_capacity = [{ node = "b", limit = [60, 70] }]

[[virtual_links]]
id = "v"
entity = "e"
snd = { node = "a", period = 1 }
rec = { node = "b", period = 1 }
upper = 5
bid_cost = 3

[[virtual_links]]
id = "w"
entity = "e"
snd = { node = "b", period = 1 }
rec = { node = "b", period = 2 }
upper = 5
bid_cost = 3
"#;

    #[test]
    fn parses_scalars_series_and_default_bounds() {
        let case = parse_case(SMALL).unwrap();
        assert_eq!(case.periods, 2);
        assert_eq!(case.generators[0].capacity, vec![50.0, 50.0]);
        assert_eq!(case.generators[0].bid_cost, vec![10.0, 12.0]);
        assert_eq!(case.virtual_links[0].lower, -5.0);
        assert_eq!(case.virtual_links[1].lower, 0.0);
        assert_eq!(case.dc_limit("b", 2), Some(70.0));
        assert_eq!(case.dc_limit("a", 1), None);
    }

    #[test]
    fn round_trips() {
        let case = parse_case(SMALL).unwrap();
        let text = to_case_string(&case);
        assert_eq!(parse_case(&text).unwrap(), case);
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_case("name = \"x\"\nperiods = [1,\n").unwrap_err();
        match err {
            CaseError::Syntax { line, .. } => assert!(line >= 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_a_syntax_error() {
        let err = parse_case("name = \"x\"\nperiods = 1\ncolour = 3\n").unwrap_err();
        assert!(matches!(err, CaseError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn generator_at_missing_node() {
        let text = SMALL.replace("node = \"a\"\ncapacity", "node = \"zz\"\ncapacity");
        let CaseError::Invalid(diags) = parse_case(&text).unwrap_err() else {
            panic!("expected diagnostics");
        };
        assert!(diags
            .iter()
            .any(|d| d.rule == Rule::UnknownReference && d.entity == "g"));
    }

    #[test]
    fn self_loop_link_rejected() {
        let text = SMALL.replace(
            "rec = { node = \"b\", period = 1 }\nupper = 5",
            "rec = { node = \"a\", period = 1 }\nupper = 5",
        );
        let CaseError::Invalid(diags) = parse_case(&text).unwrap_err() else {
            panic!("expected diagnostics");
        };
        assert!(diags.iter().any(|d| d.rule == Rule::SelfLoop && d.entity == "v"));
    }

    #[test]
    fn wrong_series_length_reported() {
        let text = SMALL.replace("bid_cost = [10, 12]", "bid_cost = [10, 12, 14]");
        let CaseError::Invalid(diags) = parse_case(&text).unwrap_err() else {
            panic!("expected diagnostics");
        };
        assert_eq!(diags[0].rule, Rule::SeriesLength);
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}
