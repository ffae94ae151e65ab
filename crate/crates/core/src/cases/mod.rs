//! Built-in instances and scenario templates.

mod golden;
mod ieee30;
mod template;

pub use golden::{
    actual, table1, table2, Erratum, FieldMismatch, GoldenScenario, GoldenTable, GoldenVerdict,
    PricePolicy,
};
pub use ieee30::{case_ieee30, Ieee30Options, IEEE30_DC_NODES, IEEE30_DEFAULT_SEED};
pub use template::{sweep, Binding, ScenarioTemplate, SweepRow};

use thiserror::Error;

use crate::netmodel::{
    CaseSpec, Entity, Generator, Line, Load, Node, SpaceTimeIndex, VirtualLink,
};

#[derive(Debug, Error, PartialEq)]
pub enum CasesError {
    #[error("{family} has scenarios 1..={max}, got {scenario}")]
    ScenarioOutOfRange {
        family: &'static str,
        scenario: usize,
        max: usize,
    },
    #[error("unknown built-in case {0:?} (expected 3bus, 1bus5t or ieee30)")]
    UnknownBuiltin(String),
}

/// Three-bus spatial study with the parameters shared by every scenario
/// and all link bounds at zero.
pub fn base_3bus() -> CaseSpec {
    let nodes: Vec<Node> = (1..=3)
        .map(|k| Node {
            id: format!("n{k}"),
            label: format!("bus {k}"),
        })
        .collect();
    let generators = [(50.0, 10.0), (30.0, 20.0), (50.0, 10.0)]
        .iter()
        .enumerate()
        .map(|(k, &(cap, bid))| Generator {
            id: format!("g{}", k + 1),
            node: format!("n{}", k + 1),
            capacity: vec![cap],
            bid_cost: vec![bid],
            ramp_limit: None,
        })
        .collect();
    let loads: Vec<Load> = [(40.0, 40.0), (45.0, 30.0), (40.0, 40.0)]
        .iter()
        .enumerate()
        .map(|(k, &(req, val))| Load {
            id: format!("j{}", k + 1),
            node: format!("n{}", k + 1),
            entity: "dc".into(),
            request: vec![req],
            bid_value: vec![val],
        })
        .collect();
    let pairs = [(1, 2), (1, 3), (2, 3)];
    let lines = pairs
        .iter()
        .zip([5.0, 10.0, 10.0])
        .enumerate()
        .map(|(k, (&(a, b), cap))| Line {
            id: format!("l{}", k + 1),
            snd: format!("n{a}"),
            rec: format!("n{b}"),
            capacity: vec![cap],
            bid_cost: vec![2.0],
            susceptance: 0.5,
        })
        .collect();
    let virtual_links = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| VirtualLink {
            id: format!("v{}", k + 1),
            entity: "dc".into(),
            snd: SpaceTimeIndex::new(format!("n{a}"), 1),
            rec: SpaceTimeIndex::new(format!("n{b}"), 1),
            lower: 0.0,
            upper: 0.0,
            bid_cost: 3.0,
        })
        .collect();
    CaseSpec {
        name: "3bus".into(),
        description: "Three-bus network, one period, spatial virtual links between every pair of data centers".into(),
        entities: vec![Entity {
            id: "dc".into(),
            loads: loads.iter().map(|l| l.id.clone()).collect(),
            dc_capacity: vec![],
        }],
        nodes,
        periods: 1,
        generators,
        loads,
        lines,
        virtual_links,
    }
}

/// One-bus temporal study over five periods with forward links between
/// consecutive periods, all bounds at zero.
pub fn base_1bus_5t() -> CaseSpec {
    let load = Load {
        id: "j1".into(),
        node: "n1".into(),
        entity: "dc".into(),
        request: vec![70.0, 20.0, 70.0, 40.0, 40.0],
        bid_value: vec![30.0, 60.0, 40.0, 50.0, 45.0],
    };
    CaseSpec {
        name: "1bus5t".into(),
        description: "One bus, five periods, forward temporal virtual links, ramp limit 20".into(),
        nodes: vec![Node {
            id: "n1".into(),
            label: "bus 1".into(),
        }],
        periods: 5,
        generators: vec![Generator {
            id: "g1".into(),
            node: "n1".into(),
            capacity: vec![50.0; 5],
            bid_cost: vec![10.0, 20.0, 10.0, 15.0, 20.0],
            ramp_limit: Some(20.0),
        }],
        entities: vec![Entity {
            id: "dc".into(),
            loads: vec![load.id.clone()],
            dc_capacity: vec![],
        }],
        loads: vec![load],
        lines: vec![],
        virtual_links: (1..5)
            .map(|t| VirtualLink {
                id: format!("v{t}"),
                entity: "dc".into(),
                snd: SpaceTimeIndex::new("n1", t),
                rec: SpaceTimeIndex::new("n1", t + 1),
                lower: 0.0,
                upper: 0.0,
                bid_cost: 3.0,
            })
            .collect(),
    }
}

pub fn template_3bus() -> ScenarioTemplate {
    ScenarioTemplate::from_golden(base_3bus(), &table1())
}

pub fn template_1bus_5t() -> ScenarioTemplate {
    ScenarioTemplate::from_golden(base_1bus_5t(), &table2())
}

fn pick(template: ScenarioTemplate, family: &'static str, scenario: usize) -> Result<CaseSpec, CasesError> {
    let max = template.bindings.len();
    if scenario == 0 || scenario > max {
        return Err(CasesError::ScenarioOutOfRange {
            family,
            scenario,
            max,
        });
    }
    let mut case = template.instantiate(&template.bindings[scenario - 1]);
    case.name = format!("{family}-s{scenario}");
    Ok(case)
}

pub fn case_3bus(scenario: usize) -> Result<CaseSpec, CasesError> {
    pick(template_3bus(), "3bus", scenario)
}

pub fn case_1bus_5t(scenario: usize) -> Result<CaseSpec, CasesError> {
    pick(template_1bus_5t(), "1bus5t", scenario)
}

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 3] = ["3bus", "1bus5t", "ieee30"];

/// Resolves a built-in by name. For `ieee30`, scenario 1 is without
/// virtual links and scenario 2 with them.
pub fn builtin(name: &str, scenario: usize, seed: u64) -> Result<CaseSpec, CasesError> {
    match name {
        "3bus" => case_3bus(scenario),
        "1bus5t" => case_1bus_5t(scenario),
        "ieee30" => match scenario {
            1 | 2 => Ok(case_ieee30(&Ieee30Options {
                flex: scenario == 2,
                seed,
            })),
            _ => Err(CasesError::ScenarioOutOfRange {
                family: "ieee30",
                scenario,
                max: 2,
            }),
        },
        other => Err(CasesError::UnknownBuiltin(other.to_string())),
    }
}

/// Number of scenarios a built-in family offers.
pub fn scenario_count(name: &str) -> Result<usize, CasesError> {
    match name {
        "3bus" => Ok(table1().scenario.len()),
        "1bus5t" => Ok(table2().scenario.len()),
        "ieee30" => Ok(2),
        other => Err(CasesError::UnknownBuiltin(other.to_string())),
    }
}

/// Published results for a built-in family, if any.
pub fn golden_for(name: &str) -> Option<GoldenTable> {
    match name {
        "3bus" => Some(table1()),
        "1bus5t" => Some(table2()),
        _ => None,
    }
}

pub fn template_for(name: &str) -> Option<ScenarioTemplate> {
    match name {
        "3bus" => Some(template_3bus()),
        "1bus5t" => Some(template_1bus_5t()),
        _ => None,
    }
}
