//! Published results for the two small studies, embedded as data.

use serde::Deserialize;

use crate::clearing::ClearingSolution;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenScenario {
    pub id: usize,
    pub link_upper: Vec<f64>,
    pub link_cost: f64,
    pub welfare: f64,
    pub lmp: Vec<f64>,
    /// Whether the golden prices are the only optimal duals.
    pub lmp_unique: bool,
    pub served: Vec<f64>,
    pub dispatch: Vec<f64>,
    #[serde(default)]
    pub flows: Vec<f64>,
    pub shifts: Vec<f64>,
}

/// A printed value that contradicts the case constraints.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Erratum {
    pub scenario: usize,
    pub field: String,
    pub printed: Vec<f64>,
    pub corrected: Vec<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenTable {
    pub study: String,
    pub scenario: Vec<GoldenScenario>,
    #[serde(default)]
    pub erratum: Vec<Erratum>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMismatch {
    pub field: &'static str,
    pub index: usize,
    pub expected: f64,
    pub actual: f64,
}

pub fn table1() -> GoldenTable {
    toml::from_str(include_str!("../../data/table1.toml")).expect("embedded table1 parses")
}

pub fn table2() -> GoldenTable {
    toml::from_str(include_str!("../../data/table2.toml")).expect("embedded table2 parses")
}

const QUANTITY_FIELDS: [&str; 5] = ["welfare", "served", "dispatch", "flows", "shifts"];

impl GoldenTable {
    pub fn get(&self, id: usize) -> Option<&GoldenScenario> {
        self.scenario.iter().find(|s| s.id == id)
    }

    pub fn erratum_for(&self, id: usize, field: &str) -> Option<&Erratum> {
        self.erratum
            .iter()
            .find(|e| e.scenario == id && e.field == field)
    }

    /// Printed values for `field`, with errata applied.
    pub fn expected(&self, id: usize, field: &str) -> Vec<f64> {
        if let Some(e) = self.erratum_for(id, field) {
            return e.corrected.clone();
        }
        let s = self.get(id).expect("scenario exists");
        match field {
            "welfare" => vec![s.welfare],
            "lmp" => s.lmp.clone(),
            "served" => s.served.clone(),
            "dispatch" => s.dispatch.clone(),
            "flows" => s.flows.clone(),
            "shifts" => s.shifts.clone(),
            other => panic!("unknown golden field {other}"),
        }
    }

    /// Quantity fields (everything but prices) outside `tol`.
    pub fn compare_quantities(&self, id: usize, sol: &ClearingSolution, tol: f64) -> Vec<FieldMismatch> {
        QUANTITY_FIELDS
            .iter()
            .flat_map(|&f| diff(f, &self.expected(id, f), &actual(sol, f), tol))
            .collect()
    }

    pub fn compare_prices(&self, id: usize, sol: &ClearingSolution, tol: f64) -> Vec<FieldMismatch> {
        diff("lmp", &self.expected(id, "lmp"), &actual(sol, "lmp"), tol)
    }
}

/// Solution values in table order: entity-major, then period.
pub fn actual(sol: &ClearingSolution, field: &str) -> Vec<f64> {
    let flat = |v: &Vec<Vec<f64>>| v.iter().flatten().copied().collect::<Vec<_>>();
    match field {
        "welfare" => vec![sol.welfare],
        "lmp" => flat(&sol.lmp),
        "served" => flat(&sol.served),
        "dispatch" => flat(&sol.dispatch),
        "flows" => flat(&sol.flows),
        "shifts" => sol.shifts.clone(),
        other => panic!("unknown golden field {other}"),
    }
}

fn diff(field: &'static str, expected: &[f64], actual: &[f64], tol: f64) -> Vec<FieldMismatch> {
    let n = expected.len().max(actual.len());
    (0..n)
        .filter_map(|k| {
            let e = expected.get(k).copied().unwrap_or(f64::NAN);
            let a = actual.get(k).copied().unwrap_or(f64::NAN);
            if (e - a).abs() <= tol {
                return None;
            }
            Some(FieldMismatch {
                field,
                index: k,
                expected: e,
                actual: a,
            })
        })
        .collect()
}

/// How prices were judged against the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricePolicy {
    /// Published prices are the unique duals and must match.
    Compared,
    /// Several price vectors are optimal; the produced duals only need a
    /// valid certificate. Differences are reported, not failed.
    CertificateOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenVerdict {
    pub scenario: usize,
    pub quantities: Vec<FieldMismatch>,
    pub prices: Vec<FieldMismatch>,
    pub policy: PricePolicy,
    pub certificate_ok: bool,
}

impl GoldenVerdict {
    pub fn pass(&self) -> bool {
        self.quantities.is_empty()
            && self.certificate_ok
            && (self.policy == PricePolicy::CertificateOnly || self.prices.is_empty())
    }
}

impl GoldenTable {
    /// Quantities within `tol`; prices within `tol` when unique, otherwise
    /// a certificate with duality gap at most `gap_tol`.
    pub fn verdict(&self, id: usize, sol: &ClearingSolution, tol: f64, gap_tol: f64) -> GoldenVerdict {
        let unique = self.get(id).is_some_and(|s| s.lmp_unique);
        let cert = &sol.certificate;
        GoldenVerdict {
            scenario: id,
            quantities: self.compare_quantities(id, sol, tol),
            prices: self.compare_prices(id, sol, tol),
            policy: if unique {
                PricePolicy::Compared
            } else {
                PricePolicy::CertificateOnly
            },
            certificate_ok: cert.passes(&Default::default()) && cert.gap.abs() <= gap_tol,
        }
    }
}
