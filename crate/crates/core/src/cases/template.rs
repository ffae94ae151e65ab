use crate::clearing::{clear, ClearError, ClearOptions, ClearingSolution};
use crate::netmodel::{CaseSpec, VirtualLink};

use super::GoldenTable;

/// Values for a template's slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub label: String,
    /// One upper bound per slot; lower bounds follow the link kind.
    pub upper: Vec<f64>,
    /// Applied to every slot link when set.
    pub bid_cost: Option<f64>,
}

/// A base case whose virtual-link bounds and costs are rebound per
/// scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTemplate {
    pub base: CaseSpec,
    /// Virtual-link ids, in binding order.
    pub slots: Vec<String>,
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub binding: Binding,
    pub result: Result<ClearingSolution, ClearError>,
}

impl ScenarioTemplate {
    /// Slots are all links of `base` in declaration order.
    pub fn new(base: CaseSpec, bindings: Vec<Binding>) -> Self {
        let slots = base.virtual_links.iter().map(|v| v.id.clone()).collect();
        Self {
            base,
            slots,
            bindings,
        }
    }

    pub fn from_golden(base: CaseSpec, table: &GoldenTable) -> Self {
        let bindings = table
            .scenario
            .iter()
            .map(|s| Binding {
                label: format!("s{}", s.id),
                upper: s.link_upper.clone(),
                bid_cost: Some(s.link_cost),
            })
            .collect();
        Self::new(base, bindings)
    }

    pub fn instantiate(&self, binding: &Binding) -> CaseSpec {
        let mut case = self.base.clone();
        for (slot, &upper) in self.slots.iter().zip(&binding.upper) {
            if let Some(link) = case.link_mut(slot) {
                link.upper = upper;
                link.lower = VirtualLink::default_lower(link.kind(), upper);
                if let Some(c) = binding.bid_cost {
                    link.bid_cost = c;
                }
            }
        }
        case
    }
}

/// Clears every binding in order. Failures are kept per row.
pub fn sweep(template: &ScenarioTemplate, opts: &ClearOptions) -> Vec<SweepRow> {
    template
        .bindings
        .iter()
        .map(|b| SweepRow {
            binding: b.clone(),
            result: clear(&template.instantiate(b), opts),
        })
        .collect()
}
