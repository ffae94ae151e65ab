//! Machine and human renderings of cleared markets.

use serde::Serialize;

use crate::analysis::{price_stats, PriceStats};
use crate::clearing::{profits, welfare_decomposition, ClearingSolution, DualUniqueness, ProfitReport, WelfareDecomposition};

/// Rounds to 1e-9 and clears negative zero. Output only.
pub fn tidy(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn tidy_all(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(tidy).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftEntry {
    pub id: String,
    pub snd: String,
    pub rec: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub case: String,
    pub mode: String,
    pub periods: usize,
    pub welfare: f64,
    pub dual_unique: DualUniqueness,
    pub lmp: Vec<Series>,
    pub served: Vec<Series>,
    pub dispatch: Vec<Series>,
    pub flows: Vec<Series>,
    pub shifts: Vec<ShiftEntry>,
    pub absorbed: Vec<Series>,
    pub profits: ProfitReport,
    pub decomposition: WelfareDecomposition,
    pub price_stats: PriceStats,
    pub duality_gap: f64,
    pub iterations: usize,
}

fn series<'a>(ids: impl Iterator<Item = &'a String>, rows: &[Vec<f64>]) -> Vec<Series> {
    ids.zip(rows)
        .map(|(id, v)| Series {
            id: id.clone(),
            values: tidy_all(v),
        })
        .collect()
}

impl SolutionReport {
    pub fn new(sol: &ClearingSolution) -> Self {
        let case = &sol.case;
        let mut p = profits(sol);
        for v in [&mut p.generators, &mut p.loads, &mut p.lines, &mut p.links] {
            *v = tidy_all(v);
        }
        let d = welfare_decomposition(sol);
        let mut stats = price_stats(sol);
        for s in &mut stats.periods {
            for x in [
                &mut s.mean,
                &mut s.variance,
                &mut s.std_dev,
                &mut s.mad,
                &mut s.min,
                &mut s.max,
                &mut s.spread,
            ] {
                *x = tidy(*x);
            }
        }
        for s in &mut stats.nodes {
            s.min = tidy(s.min);
            s.max = tidy(s.max);
            s.spread = tidy(s.spread);
        }
        Self {
            case: case.name.clone(),
            mode: sol.mode.to_string(),
            periods: case.periods,
            welfare: tidy(sol.welfare),
            dual_unique: sol.dual_unique,
            lmp: series(case.nodes.iter().map(|n| &n.id), &sol.lmp),
            served: series(case.loads.iter().map(|l| &l.id), &sol.served),
            dispatch: series(case.generators.iter().map(|g| &g.id), &sol.dispatch),
            flows: series(case.lines.iter().map(|l| &l.id), &sol.flows),
            shifts: case
                .virtual_links
                .iter()
                .zip(&sol.shifts)
                .map(|(v, &s)| ShiftEntry {
                    id: v.id.clone(),
                    snd: v.snd.to_string(),
                    rec: v.rec.to_string(),
                    value: tidy(s),
                })
                .collect(),
            absorbed: series(case.nodes.iter().map(|n| &n.id), &sol.absorbed),
            profits: p,
            decomposition: WelfareDecomposition {
                welfare: tidy(d.welfare),
                load_profit: tidy(d.load_profit),
                generator_profit: tidy(d.generator_profit),
                line_profit: tidy(d.line_profit),
                link_profit: tidy(d.link_profit),
                regrouped: tidy(d.regrouped),
                residual: tidy(d.residual),
            },
            price_stats: stats,
            duality_gap: tidy(sol.certificate.gap),
            iterations: sol.iterations,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `[40,42.5,40]`.
pub fn bracket(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| tidy(*x).to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Table columns in the golden-table order.
pub const TABLE_COLUMNS: [&str; 7] = ["scenario", "phi", "pi", "d", "p", "f", "delta"];

/// One row of the comparison table. Per-period fields are flattened item
/// by item, then period.
pub fn table_cells(label: &str, sol: &ClearingSolution) -> Vec<String> {
    let flat = |v: &Vec<Vec<f64>>| bracket(&v.iter().flatten().copied().collect::<Vec<_>>());
    vec![
        label.to_string(),
        tidy(sol.welfare).to_string(),
        flat(&sol.lmp),
        flat(&sol.served),
        flat(&sol.dispatch),
        flat(&sol.flows),
        bracket(&sol.shifts),
    ]
}

/// Aligned plain-text table.
pub fn render_table(rows: &[Vec<String>]) -> String {
    let header: Vec<String> = TABLE_COLUMNS.iter().map(|s| s.to_string()).collect();
    let all: Vec<&Vec<String>> = std::iter::once(&header).chain(rows.iter()).collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| all.iter().map(|r| r.get(c).map_or(0, |s| s.chars().count())).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (k, row) in all.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if k == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("  "));
            out.push('\n');
        }
    }
    out
}

/// CSV with the table columns plus any extra trailing columns.
pub fn table_csv(rows: &[Vec<String>], extra: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = TABLE_COLUMNS.iter().copied().chain(extra.iter().copied()).collect();
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Long format: `kind,id,period,value`. Shifts use period 0.
pub fn solution_csv(sol: &ClearingSolution) -> String {
    let case = &sol.case;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "id", "period", "value"]).expect("in-memory write");
    w.write_record(["welfare", &case.name, "0", &tidy(sol.welfare).to_string()])
        .expect("in-memory write");
    let mut grid = |kind: &str, ids: Vec<&String>, rows: &[Vec<f64>]| {
        for (id, row) in ids.into_iter().zip(rows) {
            for (k, v) in row.iter().enumerate() {
                w.write_record([kind, id, &(k + 1).to_string(), &tidy(*v).to_string()])
                    .expect("in-memory write");
            }
        }
    };
    grid("lmp", case.nodes.iter().map(|n| &n.id).collect(), &sol.lmp);
    grid("served", case.loads.iter().map(|l| &l.id).collect(), &sol.served);
    grid("dispatch", case.generators.iter().map(|g| &g.id).collect(), &sol.dispatch);
    grid("flow", case.lines.iter().map(|l| &l.id).collect(), &sol.flows);
    grid("absorbed", case.nodes.iter().map(|n| &n.id).collect(), &sol.absorbed);
    for (v, s) in case.virtual_links.iter().zip(&sol.shifts) {
        w.write_record(["shift", &v.id, "0", &tidy(*s).to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
