//! Builds the clearing LP for a case.
//!
//! Columns, in order: for each period the served loads `d[j,t]`, dispatch
//! `p[i,t]`, split line flows `f+[l,t]`/`f-[l,t]` and, when the case has
//! lines, angles `theta[n,t]`; then the split shifts `dl+[v]`/`dl-[v]`.
//!
//! Rows, in order: for each period the balances `bal[n,t]`, flow
//! definitions `dc[l,t]` and the reference angle `ref[t]`; then the ramp
//! pairs `ramp_up[i,t]`/`ramp_dn[i,t]`; then the absorption rows
//! `absorb_lo[n,t]`/`absorb_hi[n,t]`.
//!
//! Balance rows read `load-side - supply-side = 0` so that their duals are
//! the nodal prices directly:
//!
//! ```text
//! sum d + sum f_out - sum f_in + sum dl_in - sum dl_out - sum p = 0
//! ```

use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::lp::{ColId, LinearProgram, RowId, RowKind};
use crate::netmodel::{validate, CaseSpec, Diagnostic, LinkKind};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BuildError {
    #[error("case failed validation with {} problem(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
}

/// Domain coordinate of an LP column. Indices refer to positions in the
/// case's vectors; periods are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarCoord {
    Served { load: usize, period: usize },
    Dispatch { generator: usize, period: usize },
    FlowPos { line: usize, period: usize },
    FlowNeg { line: usize, period: usize },
    Angle { node: usize, period: usize },
    ShiftPos { link: usize },
    ShiftNeg { link: usize },
}

/// Domain coordinate of an LP row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowCoord {
    Balance { node: usize, period: usize },
    DcFlow { line: usize, period: usize },
    RefAngle { period: usize },
    RampUp { generator: usize, period: usize },
    RampDown { generator: usize, period: usize },
    AbsorbLo { node: usize, period: usize },
    AbsorbHi { node: usize, period: usize },
}

/// Bijection between column coordinates and column ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableMap {
    by_col: Vec<VarCoord>,
    by_coord: BTreeMap<VarCoord, ColId>,
}

impl VariableMap {
    fn insert(&mut self, coord: VarCoord, col: ColId) {
        debug_assert_eq!(col.0, self.by_col.len());
        self.by_col.push(coord);
        self.by_coord.insert(coord, col);
    }

    pub fn col(&self, coord: VarCoord) -> Option<ColId> {
        self.by_coord.get(&coord).copied()
    }

    pub fn coord(&self, col: ColId) -> VarCoord {
        self.by_col[col.0]
    }

    pub fn len(&self) -> usize {
        self.by_col.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_col.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ColId, VarCoord)> + '_ {
        self.by_col.iter().enumerate().map(|(k, c)| (ColId(k), *c))
    }
}

/// Bijection between row coordinates and row ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintMap {
    by_row: Vec<RowCoord>,
    by_coord: BTreeMap<RowCoord, RowId>,
}

impl ConstraintMap {
    fn insert(&mut self, coord: RowCoord, row: RowId) {
        debug_assert_eq!(row.0, self.by_row.len());
        self.by_row.push(coord);
        self.by_coord.insert(coord, row);
    }

    pub fn row(&self, coord: RowCoord) -> Option<RowId> {
        self.by_coord.get(&coord).copied()
    }

    pub fn coord(&self, row: RowId) -> RowCoord {
        self.by_row[row.0]
    }

    pub fn len(&self) -> usize {
        self.by_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_row.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RowId, RowCoord)> + '_ {
        self.by_row.iter().enumerate().map(|(k, c)| (RowId(k), *c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    Spatial,
    Temporal,
    #[serde(rename = "spatiotemporal")]
    SpatioTemporal,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Spatial => "spatial",
            Mode::Temporal => "temporal",
            Mode::SpatioTemporal => "spatiotemporal",
        })
    }
}

/// Classifies a case by the kinds of virtual links it carries.
pub fn mode_of(case: &CaseSpec) -> Mode {
    let mut spatial = false;
    let mut temporal = false;
    for v in &case.virtual_links {
        match v.kind() {
            LinkKind::Spatial => spatial = true,
            LinkKind::Temporal => temporal = true,
            LinkKind::SpaceTime => return Mode::SpatioTemporal,
            LinkKind::SelfLoop => {}
        }
    }
    match (spatial, temporal) {
        (false, false) => Mode::Baseline,
        (true, false) => Mode::Spatial,
        (false, true) => Mode::Temporal,
        (true, true) => Mode::SpatioTemporal,
    }
}

#[derive(Debug, Clone)]
pub struct Formulation {
    pub lp: LinearProgram,
    pub vars: VariableMap,
    pub cons: ConstraintMap,
}

type Interval = (f64, f64);

/// Which split columns a link with bounds `[lower, upper]` needs.
/// `dl-` exists when the link can carry negative flow, `dl+` when it can
/// carry positive flow or is pinned to a non-negative interval.
pub(crate) fn split_bounds(lower: f64, upper: f64) -> (Option<Interval>, Option<Interval>) {
    let pos = (upper > 0.0 || lower >= 0.0).then(|| (lower.max(0.0), upper));
    let neg = (lower < 0.0).then(|| ((-upper).max(0.0), -lower));
    (pos, neg)
}

pub fn build(case: &CaseSpec) -> Result<Formulation, BuildError> {
    let diags = validate(case);
    if !diags.is_empty() {
        return Err(BuildError::Invalid(diags));
    }

    let node_ix: BTreeMap<&str, usize> = case
        .nodes
        .iter()
        .enumerate()
        .map(|(k, n)| (n.id.as_str(), k))
        .collect();
    let mut lp = LinearProgram::new();
    let mut vars = VariableMap::default();
    let mut cons = ConstraintMap::default();
    let has_lines = !case.lines.is_empty();

    for t in case.period_range() {
        let k = t - 1;
        for (j, l) in case.loads.iter().enumerate() {
            let col = lp.add_column(format!("d[{},t{t}]", l.id), 0.0, l.request[k], l.bid_value[k]);
            vars.insert(VarCoord::Served { load: j, period: t }, col);
        }
        for (i, g) in case.generators.iter().enumerate() {
            let col = lp.add_column(format!("p[{},t{t}]", g.id), 0.0, g.capacity[k], -g.bid_cost[k]);
            vars.insert(VarCoord::Dispatch { generator: i, period: t }, col);
        }
        for (li, l) in case.lines.iter().enumerate() {
            let pos = lp.add_column(format!("f+[{},t{t}]", l.id), 0.0, l.capacity[k], -l.bid_cost[k]);
            vars.insert(VarCoord::FlowPos { line: li, period: t }, pos);
            let neg = lp.add_column(format!("f-[{},t{t}]", l.id), 0.0, l.capacity[k], -l.bid_cost[k]);
            vars.insert(VarCoord::FlowNeg { line: li, period: t }, neg);
        }
        if has_lines {
            for (n, node) in case.nodes.iter().enumerate() {
                let col = lp.add_column(
                    format!("theta[{},t{t}]", node.id),
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    0.0,
                );
                vars.insert(VarCoord::Angle { node: n, period: t }, col);
            }
        }
    }
    for (v, link) in case.virtual_links.iter().enumerate() {
        let (pos, neg) = split_bounds(link.lower, link.upper);
        if let Some((lo, hi)) = pos {
            let col = lp.add_column(format!("dl+[{}]", link.id), lo, hi, -link.bid_cost);
            vars.insert(VarCoord::ShiftPos { link: v }, col);
        }
        if let Some((lo, hi)) = neg {
            let col = lp.add_column(format!("dl-[{}]", link.id), lo, hi, -link.bid_cost);
            vars.insert(VarCoord::ShiftNeg { link: v }, col);
        }
    }

    // Signed shift terms `(col, sign)` per link for the absorbed-load
    // expression at each endpoint.
    let shift_terms = |v: usize| -> Vec<(ColId, f64)> {
        let mut terms = Vec::new();
        if let Some(c) = vars.col(VarCoord::ShiftPos { link: v }) {
            terms.push((c, 1.0));
        }
        if let Some(c) = vars.col(VarCoord::ShiftNeg { link: v }) {
            terms.push((c, -1.0));
        }
        terms
    };

    // Absorbed load d^ at (n, t) as a sparse linear expression.
    let absorbed = |n: usize, t: usize| -> Vec<(ColId, f64)> {
        let node = case.nodes[n].id.as_str();
        let mut expr = Vec::new();
        for (j, l) in case.loads.iter().enumerate() {
            if l.node == node {
                expr.push((vars.col(VarCoord::Served { load: j, period: t }).unwrap(), 1.0));
            }
        }
        for (v, link) in case.virtual_links.iter().enumerate() {
            if link.rec.node == node && link.rec.period == t {
                expr.extend(shift_terms(v));
            }
            if link.snd.node == node && link.snd.period == t {
                expr.extend(shift_terms(v).into_iter().map(|(c, s)| (c, -s)));
            }
        }
        expr
    };

    for t in case.period_range() {
        for (n, node) in case.nodes.iter().enumerate() {
            let mut coeffs = absorbed(n, t);
            for (i, g) in case.generators.iter().enumerate() {
                if g.node == node.id {
                    coeffs.push((vars.col(VarCoord::Dispatch { generator: i, period: t }).unwrap(), -1.0));
                }
            }
            for (li, l) in case.lines.iter().enumerate() {
                let pos = vars.col(VarCoord::FlowPos { line: li, period: t }).unwrap();
                let neg = vars.col(VarCoord::FlowNeg { line: li, period: t }).unwrap();
                if l.snd == node.id {
                    coeffs.push((pos, 1.0));
                    coeffs.push((neg, -1.0));
                }
                if l.rec == node.id {
                    coeffs.push((pos, -1.0));
                    coeffs.push((neg, 1.0));
                }
            }
            let row = lp.add_row(format!("bal[{},t{t}]", node.id), RowKind::Eq, coeffs, 0.0);
            cons.insert(RowCoord::Balance { node: n, period: t }, row);
        }
        for (li, l) in case.lines.iter().enumerate() {
            let s = node_ix[l.snd.as_str()];
            let r = node_ix[l.rec.as_str()];
            let coeffs = [
                (vars.col(VarCoord::FlowPos { line: li, period: t }).unwrap(), 1.0),
                (vars.col(VarCoord::FlowNeg { line: li, period: t }).unwrap(), -1.0),
                (vars.col(VarCoord::Angle { node: s, period: t }).unwrap(), -l.susceptance),
                (vars.col(VarCoord::Angle { node: r, period: t }).unwrap(), l.susceptance),
            ];
            let row = lp.add_row(format!("dc[{},t{t}]", l.id), RowKind::Eq, coeffs, 0.0);
            cons.insert(RowCoord::DcFlow { line: li, period: t }, row);
        }
        if has_lines {
            let th = vars.col(VarCoord::Angle { node: 0, period: t }).unwrap();
            let row = lp.add_row(format!("ref[t{t}]"), RowKind::Eq, [(th, 1.0)], 0.0);
            cons.insert(RowCoord::RefAngle { period: t }, row);
        }
    }

    for (i, g) in case.generators.iter().enumerate() {
        let Some(limit) = g.ramp_limit else { continue };
        for t in 2..=case.periods {
            let now = vars.col(VarCoord::Dispatch { generator: i, period: t }).unwrap();
            let prev = vars.col(VarCoord::Dispatch { generator: i, period: t - 1 }).unwrap();
            let up = lp.add_row(
                format!("ramp_up[{},t{t}]", g.id),
                RowKind::Le,
                [(now, 1.0), (prev, -1.0)],
                limit,
            );
            cons.insert(RowCoord::RampUp { generator: i, period: t }, up);
            let dn = lp.add_row(
                format!("ramp_dn[{},t{t}]", g.id),
                RowKind::Le,
                [(prev, 1.0), (now, -1.0)],
                limit,
            );
            cons.insert(RowCoord::RampDown { generator: i, period: t }, dn);
        }
    }

    // d^ >= 0 only needs a row where some shift can lower d^ below the
    // local served load; d^ <= d_max wherever a capacity is declared.
    for t in case.period_range() {
        for (n, node) in case.nodes.iter().enumerate() {
            let can_drain = case.virtual_links.iter().any(|v| {
                (v.snd.node == node.id && v.snd.period == t && v.upper > 0.0)
                    || (v.rec.node == node.id && v.rec.period == t && v.lower < 0.0)
            });
            if can_drain {
                let expr = absorbed(n, t).into_iter().map(|(c, a)| (c, -a));
                let row = lp.add_row(format!("absorb_lo[{},t{t}]", node.id), RowKind::Le, expr, 0.0);
                cons.insert(RowCoord::AbsorbLo { node: n, period: t }, row);
            }
            if let Some(limit) = case.dc_limit(&node.id, t) {
                let row = lp.add_row(
                    format!("absorb_hi[{},t{t}]", node.id),
                    RowKind::Le,
                    absorbed(n, t),
                    limit,
                );
                cons.insert(RowCoord::AbsorbHi { node: n, period: t }, row);
            }
        }
    }

    Ok(Formulation { lp, vars, cons })
}
