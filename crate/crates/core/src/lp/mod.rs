//! Linear programs in a small standard form and a dense bounded-variable
//! revised simplex that returns primal values together with a dual
//! certificate.
//!
//! Problems are always posed as maximization:
//!
//! ```text
//! max  c·x
//! s.t. A x  = b      (equality rows)
//!      G x <= h      (inequality rows)
//!      lo <= x <= hi (lo may be -inf, hi may be +inf)
//! ```

mod certificate;
mod dump;
mod simplex;

pub use certificate::{check_certificate, CertificateReport};
pub use dump::write_lp_format;
pub use simplex::solve;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ColId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    /// `a·x = rhs`
    Eq,
    /// `a·x <= rhs`
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    /// Sparse coefficients, at most one entry per column.
    pub coeffs: Vec<(ColId, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("column {0} has inverted bounds [{1}, {2}]")]
    InvertedBounds(String, f64, f64),
    #[error("row {row} references column {col} which does not exist")]
    UnknownColumn { row: String, col: usize },
    #[error("row {0} has a non-finite coefficient or right-hand side")]
    NonFinite(String),
    #[error("linear program has no columns")]
    Empty,
    #[error("numerical failure after {iterations} iterations: {detail}")]
    NumericalFailure { iterations: usize, detail: String },
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

/// A maximization LP with named rows and columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> ColId {
        self.columns.push(Column {
            name: name.into(),
            lower,
            upper,
            objective,
        });
        ColId(self.columns.len() - 1)
    }

    /// Adds a row. Repeated columns in `coeffs` are merged and exact zeros
    /// dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        kind: RowKind,
        coeffs: impl IntoIterator<Item = (ColId, f64)>,
        rhs: f64,
    ) -> RowId {
        let mut merged: Vec<(ColId, f64)> = Vec::new();
        for (col, value) in coeffs {
            match merged.iter_mut().find(|(c, _)| *c == col) {
                Some((_, v)) => *v += value,
                None => merged.push((col, value)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        merged.sort_by_key(|&(c, _)| c);
        self.rows.push(Row {
            name: name.into(),
            kind,
            coeffs: merged,
            rhs,
        });
        RowId(self.rows.len() - 1)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn column(&self, id: ColId) -> &Column {
        &self.columns[id.0]
    }

    pub fn row(&self, id: RowId) -> &Row {
        &self.rows[id.0]
    }

    pub fn column_mut(&mut self, id: ColId) -> &mut Column {
        &mut self.columns[id.0]
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn count_rows(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.columns
            .iter()
            .zip(x)
            .map(|(c, v)| c.objective * v)
            .sum()
    }

    /// `a·x` for one row.
    pub fn row_activity(&self, row: &Row, x: &[f64]) -> f64 {
        row.coeffs.iter().map(|&(c, a)| a * x[c.0]).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.columns.is_empty() {
            return Err(LpError::Empty);
        }
        for c in &self.columns {
            if c.lower > c.upper
                || c.lower.is_nan()
                || c.upper.is_nan()
                || c.lower == f64::INFINITY
                || c.upper == f64::NEG_INFINITY
            {
                return Err(LpError::InvertedBounds(c.name.clone(), c.lower, c.upper));
            }
            if !c.objective.is_finite() {
                return Err(LpError::NonFinite(c.name.clone()));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(LpError::NonFinite(r.name.clone()));
            }
            for &(c, a) in &r.coeffs {
                if c.0 >= self.columns.len() {
                    return Err(LpError::UnknownColumn {
                        row: r.name.clone(),
                        col: c.0,
                    });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite(r.name.clone()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    /// Largest reduced cost, falling back to Bland's rule after a run of
    /// degenerate pivots.
    #[default]
    Dantzig,
    /// Smallest eligible index from the first iteration.
    Bland,
}

impl std::str::FromStr for PivotRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dantzig" | "largest" => Ok(PivotRule::Dantzig),
            "bland" => Ok(PivotRule::Bland),
            other => Err(format!("unknown pivot rule '{other}' (expected dantzig or bland)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol_feas: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    /// Smallest acceptable pivot element magnitude.
    pub tol_pivot: f64,
    pub pivot: PivotRule,
    pub max_iterations: usize,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub stall_threshold: usize,
    /// Pivots between fresh basis inversions.
    pub refactor_interval: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-9,
            tol_dual: 1e-9,
            tol_gap: 1e-8,
            tol_pivot: 1e-10,
            pivot: PivotRule::Dantzig,
            max_iterations: 50_000,
            stall_threshold: 50,
            refactor_interval: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural column values.
    pub x: Vec<f64>,
    /// One dual per row, in row order. Empty unless optimal.
    pub duals: Vec<f64>,
    /// `c_j - y·A_j` per column. Empty unless optimal.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// True when every basic variable sits strictly inside its bounds at
    /// the final vertex, which makes the dual solution unique.
    pub nondegenerate: bool,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, col: ColId) -> f64 {
        self.x[col.0]
    }

    pub fn dual(&self, row: RowId) -> f64 {
        self.duals[row.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_row_merges_duplicates_and_drops_zeros() {
        let mut lp = LinearProgram::new();
        let x = lp.add_column("x", 0.0, 1.0, 1.0);
        let y = lp.add_column("y", 0.0, 1.0, 1.0);
        let r = lp.add_row("r", RowKind::Eq, [(y, 1.0), (x, 2.0), (x, -2.0), (y, 1.0)], 0.0);
        assert_eq!(lp.row(r).coeffs, vec![(y, 2.0)]);
    }

    #[test]
    fn validate_rejects_bad_input() {
        let mut lp = LinearProgram::new();
        assert_eq!(lp.validate(), Err(LpError::Empty));
        let x = lp.add_column("x", 2.0, 1.0, 1.0);
        assert!(matches!(lp.validate(), Err(LpError::InvertedBounds(..))));
        lp.column_mut(x).upper = 3.0;
        lp.add_row("r", RowKind::Le, [(ColId(7), 1.0)], 0.0);
        assert!(matches!(lp.validate(), Err(LpError::UnknownColumn { .. })));
    }

    #[test]
    fn pivot_rule_parses() {
        assert_eq!("bland".parse::<PivotRule>(), Ok(PivotRule::Bland));
        assert_eq!("Dantzig".parse::<PivotRule>(), Ok(PivotRule::Dantzig));
        assert!("steepest".parse::<PivotRule>().is_err());
    }
}
