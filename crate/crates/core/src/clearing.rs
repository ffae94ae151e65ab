//! Clears a case: builds the LP, solves it, and reads quantities, nodal
//! prices and stakeholder profits back out in domain terms.

use serde::Serialize;
use thiserror::Error;

use crate::formulation::{build, mode_of, BuildError, Formulation, Mode, RowCoord, VarCoord};
use crate::lp::{check_certificate, solve, CertificateReport, LpError, LpSolution, LpStatus, SolveOptions};
use crate::netmodel::CaseSpec;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClearError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Lp(#[from] LpError),
    /// Valid cases always admit the all-zero dispatch, so this signals an
    /// internal inconsistency.
    #[error("clearing problem reported infeasible")]
    Infeasible,
    #[error("clearing problem reported unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClearOptions {
    pub solver: SolveOptions,
}

/// Whether the reported prices are the only optimal duals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualUniqueness {
    /// The final vertex is primal nondegenerate.
    Unique,
    /// Degenerate vertex: other optimal price vectors may exist.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfitReport {
    /// Per generator, summed over the horizon.
    pub generators: Vec<f64>,
    pub loads: Vec<f64>,
    pub lines: Vec<f64>,
    pub links: Vec<f64>,
}

impl ProfitReport {
    pub fn total(&self) -> f64 {
        self.generators.iter().sum::<f64>()
            + self.loads.iter().sum::<f64>()
            + self.lines.iter().sum::<f64>()
            + self.links.iter().sum::<f64>()
    }
}

/// Cleared market in domain terms. Per-period vectors are indexed
/// `[item][period - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClearingSolution {
    pub case: CaseSpec,
    pub mode: Mode,
    pub welfare: f64,
    pub served: Vec<Vec<f64>>,
    pub dispatch: Vec<Vec<f64>>,
    /// Signed, positive from `snd` to `rec`.
    pub flows: Vec<Vec<f64>>,
    /// Signed, positive from `snd` to `rec`.
    pub shifts: Vec<f64>,
    /// Zero when the case has no lines.
    pub angles: Vec<Vec<f64>>,
    /// Nodal prices, $/MWh.
    pub lmp: Vec<Vec<f64>>,
    pub absorbed: Vec<Vec<f64>>,
    pub dual_unique: DualUniqueness,
    pub certificate: CertificateReport,
    pub iterations: usize,
}

/// Builds and solves the clearing LP, returning the raw pieces.
pub fn solve_case(
    case: &CaseSpec,
    opts: &ClearOptions,
) -> Result<(Formulation, LpSolution), ClearError> {
    let form = build(case)?;
    let sol = solve(&form.lp, &opts.solver)?;
    match sol.status {
        LpStatus::Optimal => Ok((form, sol)),
        LpStatus::Infeasible => Err(ClearError::Infeasible),
        LpStatus::Unbounded => Err(ClearError::Unbounded),
    }
}

pub fn clear(case: &CaseSpec, opts: &ClearOptions) -> Result<ClearingSolution, ClearError> {
    let (form, sol) = solve_case(case, opts)?;
    Ok(interpret(case, &form, &sol))
}

/// Maps an optimal LP solution back onto the case.
pub fn interpret(case: &CaseSpec, form: &Formulation, sol: &LpSolution) -> ClearingSolution {
    let t_count = case.periods;
    let value = |c: VarCoord| form.vars.col(c).map_or(0.0, |col| sol.value(col));
    let grid = |n: usize, f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|k| (1..=t_count).map(|t| f(k, t)).collect())
            .collect()
    };

    let served = grid(case.loads.len(), &|j, t| value(VarCoord::Served { load: j, period: t }));
    let dispatch = grid(case.generators.len(), &|i, t| {
        value(VarCoord::Dispatch { generator: i, period: t })
    });
    let flows = grid(case.lines.len(), &|l, t| {
        value(VarCoord::FlowPos { line: l, period: t }) - value(VarCoord::FlowNeg { line: l, period: t })
    });
    let angles = grid(case.nodes.len(), &|n, t| value(VarCoord::Angle { node: n, period: t }));
    let shifts: Vec<f64> = (0..case.virtual_links.len())
        .map(|v| value(VarCoord::ShiftPos { link: v }) - value(VarCoord::ShiftNeg { link: v }))
        .collect();
    let lmp = grid(case.nodes.len(), &|n, t| {
        sol.dual(form.cons.row(RowCoord::Balance { node: n, period: t }).unwrap())
    });
    let absorbed = absorbed_load(case, &served, &shifts);

    ClearingSolution {
        case: case.clone(),
        mode: mode_of(case),
        welfare: welfare(case, &served, &dispatch, &flows, &shifts),
        served,
        dispatch,
        flows,
        shifts,
        angles,
        lmp,
        absorbed,
        dual_unique: if sol.nondegenerate {
            DualUniqueness::Unique
        } else {
            DualUniqueness::Unknown
        },
        certificate: check_certificate(&form.lp, sol),
        iterations: sol.iterations,
    }
}

/// Physically absorbed load per `(node, period)`: local served load plus
/// shifts received minus shifts sent.
pub fn absorbed_load(case: &CaseSpec, served: &[Vec<f64>], shifts: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; case.periods]; case.nodes.len()];
    for (n, node) in case.nodes.iter().enumerate() {
        for (j, l) in case.loads.iter().enumerate() {
            if l.node == node.id {
                for (k, d) in served[j].iter().enumerate() {
                    out[n][k] += d;
                }
            }
        }
    }
    for (v, link) in case.virtual_links.iter().enumerate() {
        if let Some(r) = case.node_index(&link.rec.node) {
            out[r][link.rec.period - 1] += shifts[v];
        }
        if let Some(s) = case.node_index(&link.snd.node) {
            out[s][link.snd.period - 1] -= shifts[v];
        }
    }
    out
}

/// Social welfare from signed primal quantities.
pub fn welfare(
    case: &CaseSpec,
    served: &[Vec<f64>],
    dispatch: &[Vec<f64>],
    flows: &[Vec<f64>],
    shifts: &[f64],
) -> f64 {
    let mut phi = 0.0;
    for (l, d) in case.loads.iter().zip(served) {
        phi += l.bid_value.iter().zip(d).map(|(a, d)| a * d).sum::<f64>();
    }
    for (g, p) in case.generators.iter().zip(dispatch) {
        phi -= g.bid_cost.iter().zip(p).map(|(a, p)| a * p).sum::<f64>();
    }
    for (l, f) in case.lines.iter().zip(flows) {
        phi -= l.bid_cost.iter().zip(f).map(|(a, f)| a * f.abs()).sum::<f64>();
    }
    for (v, s) in case.virtual_links.iter().zip(shifts) {
        phi -= v.bid_cost * s.abs();
    }
    phi
}

impl ClearingSolution {
    pub fn price_at(&self, node: &str, period: usize) -> f64 {
        let n = self.case.node_index(node).expect("node exists in solved case");
        self.lmp[n][period - 1]
    }

    /// `pi_rec - pi_snd` for a virtual link.
    pub fn link_price_gap(&self, link: usize) -> f64 {
        let v = &self.case.virtual_links[link];
        self.price_at(&v.rec.node, v.rec.period) - self.price_at(&v.snd.node, v.snd.period)
    }

    pub fn total_served(&self) -> f64 {
        self.served.iter().flatten().sum()
    }
}

/// Stakeholder profits, summed over the horizon.
pub fn profits(sol: &ClearingSolution) -> ProfitReport {
    let case = &sol.case;
    let generators = case
        .generators
        .iter()
        .zip(&sol.dispatch)
        .map(|(g, p)| {
            (0..case.periods)
                .map(|k| (sol.price_at(&g.node, k + 1) - g.bid_cost[k]) * p[k])
                .sum()
        })
        .collect();
    let loads = case
        .loads
        .iter()
        .zip(&sol.served)
        .map(|(l, d)| {
            (0..case.periods)
                .map(|k| (l.bid_value[k] - sol.price_at(&l.node, k + 1)) * d[k])
                .sum()
        })
        .collect();
    let lines = case
        .lines
        .iter()
        .zip(&sol.flows)
        .map(|(l, f)| {
            (0..case.periods)
                .map(|k| {
                    let gap = sol.price_at(&l.rec, k + 1) - sol.price_at(&l.snd, k + 1);
                    (gap.abs() - l.bid_cost[k]) * f[k].abs()
                })
                .sum()
        })
        .collect();
    let links = case
        .virtual_links
        .iter()
        .enumerate()
        .map(|(v, link)| (sol.link_price_gap(v).abs() - link.bid_cost) * sol.shifts[v].abs())
        .collect();
    ProfitReport {
        generators,
        loads,
        lines,
        links,
    }
}

/// Horizon profit of each entity: its loads priced at their hub nodes plus
/// the settlement of its shifts, `(π_snd − π_rec)·δ − α|δ|` per link.
pub fn entity_profits(sol: &ClearingSolution) -> Vec<(String, f64)> {
    let case = &sol.case;
    let load_profit = profits(sol).loads;
    case.entities
        .iter()
        .map(|e| {
            let loads: f64 = case
                .loads
                .iter()
                .zip(&load_profit)
                .filter(|(l, _)| l.entity == e.id)
                .map(|(_, p)| p)
                .sum();
            let shifts: f64 = case
                .virtual_links
                .iter()
                .enumerate()
                .filter(|(_, v)| v.entity == e.id)
                .map(|(k, v)| -sol.link_price_gap(k) * sol.shifts[k] - v.bid_cost * sol.shifts[k].abs())
                .sum();
            (e.id.clone(), loads + shifts)
        })
        .collect()
}

/// Welfare against the sum of stakeholder profits. With network
/// constraints the profit terms need not add up to the welfare; the
/// difference is reported as `residual`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareDecomposition {
    pub welfare: f64,
    pub load_profit: f64,
    pub generator_profit: f64,
    pub line_profit: f64,
    pub link_profit: f64,
    pub regrouped: f64,
    pub residual: f64,
}

pub fn welfare_decomposition(sol: &ClearingSolution) -> WelfareDecomposition {
    let p = profits(sol);
    let load_profit: f64 = p.loads.iter().sum();
    let generator_profit: f64 = p.generators.iter().sum();
    let line_profit: f64 = p.lines.iter().sum();
    let link_profit: f64 = p.links.iter().sum();
    let regrouped = load_profit + generator_profit + line_profit + link_profit;
    WelfareDecomposition {
        welfare: sol.welfare,
        load_profit,
        generator_profit,
        line_profit,
        link_profit,
        regrouped,
        residual: sol.welfare - regrouped,
    }
}
