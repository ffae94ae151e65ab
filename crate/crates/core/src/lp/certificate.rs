use serde::Serialize;

use super::{LinearProgram, LpSolution, RowKind, SolveOptions};

/// Residuals of a claimed optimal primal/dual pair, recomputed from the LP
/// data alone. Reduced costs stored in the solution are ignored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    /// Largest `|a·x - b|` over equality rows and `max(0, g·x - h)` over
    /// inequality rows.
    pub max_row_violation: f64,
    pub worst_row: Option<String>,
    /// Largest distance of a column value outside its bounds.
    pub max_bound_violation: f64,
    pub worst_column: Option<String>,
    /// Largest violation of the dual sign conditions: negative duals on
    /// `<=` rows, or reduced costs pushing against an infinite bound.
    pub max_dual_violation: f64,
    /// Largest product of a dual quantity with the matching primal slack.
    pub max_complementarity: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|dual_objective - primal_objective|`
    pub gap: f64,
    /// `1 + max |x_j|`, the scale for primal residuals.
    pub primal_scale: f64,
    /// `1 + max |c_j|`, the scale for dual residuals.
    pub dual_scale: f64,
}

impl CertificateReport {
    /// Checks every residual against `opts`. Primal residuals scale with
    /// `primal_scale`, dual residuals with `dual_scale`, and the gap and
    /// complementarity with `1 + |objective|`.
    pub fn passes(&self, opts: &SolveOptions) -> bool {
        let scale = 1.0 + self.primal_objective.abs();
        self.max_row_violation <= opts.tol_feas * self.primal_scale
            && self.max_bound_violation <= opts.tol_feas * self.primal_scale
            && self.max_dual_violation <= opts.tol_dual * self.dual_scale
            && self.max_complementarity <= opts.tol_gap * scale
            && self.gap <= opts.tol_gap * scale
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.primal_objective.abs())
    }
}

pub fn check_certificate(lp: &LinearProgram, sol: &LpSolution) -> CertificateReport {
    let x = &sol.x;
    let y = &sol.duals;

    let mut max_row_violation = 0.0f64;
    let mut worst_row = None;
    let mut max_dual_violation = 0.0f64;
    let mut max_complementarity = 0.0f64;
    let mut reduced: Vec<f64> = lp.columns().iter().map(|c| c.objective).collect();
    let mut dual_objective = 0.0;

    for (i, row) in lp.rows().iter().enumerate() {
        let activity = lp.row_activity(row, x);
        let violation = match row.kind {
            RowKind::Eq => (activity - row.rhs).abs(),
            RowKind::Le => (activity - row.rhs).max(0.0),
        };
        if violation > max_row_violation {
            max_row_violation = violation;
            worst_row = Some(row.name.clone());
        }
        let yi = y.get(i).copied().unwrap_or(0.0);
        for &(c, a) in &row.coeffs {
            reduced[c.0] -= yi * a;
        }
        dual_objective += yi * row.rhs;
        if row.kind == RowKind::Le {
            max_dual_violation = max_dual_violation.max(-yi);
            let slack = (row.rhs - activity).max(0.0);
            max_complementarity = max_complementarity.max(yi.abs() * slack);
        }
    }

    let mut max_bound_violation = 0.0f64;
    let mut worst_column = None;
    for (j, col) in lp.columns().iter().enumerate() {
        let v = x[j];
        let out = (col.lower - v).max(v - col.upper).max(0.0);
        if out > max_bound_violation {
            max_bound_violation = out;
            worst_column = Some(col.name.clone());
        }
        let d = reduced[j];
        if d > 0.0 {
            if col.upper.is_finite() {
                dual_objective += d * col.upper;
                max_complementarity = max_complementarity.max(d * (col.upper - v).abs());
            } else {
                max_dual_violation = max_dual_violation.max(d);
            }
        } else if d < 0.0 {
            if col.lower.is_finite() {
                dual_objective += d * col.lower;
                max_complementarity = max_complementarity.max(-d * (v - col.lower).abs());
            } else {
                max_dual_violation = max_dual_violation.max(-d);
            }
        }
    }

    let primal_objective = lp.objective_value(x);
    CertificateReport {
        max_row_violation,
        worst_row,
        max_bound_violation,
        worst_column,
        max_dual_violation,
        max_complementarity,
        primal_objective,
        dual_objective,
        gap: (dual_objective - primal_objective).abs(),
        primal_scale: 1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        dual_scale: 1.0 + lp.columns().iter().fold(0.0f64, |a, c| a.max(c.objective.abs())),
    }
}
