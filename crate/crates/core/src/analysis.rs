//! Price statistics and diagnostics over cleared markets.

use std::fmt::Write as _;

use serde::Serialize;

use crate::clearing::ClearingSolution;
use crate::netmodel::{CaseSpec, LinkKind};

/// Prices below `-NEGATIVE_PRICE_TOL` count as negative.
pub const NEGATIVE_PRICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodStats {
    pub period: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub mad: f64,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSpread {
    pub node: String,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceStats {
    pub periods: Vec<PeriodStats>,
    pub nodes: Vec<NodeSpread>,
}

/// Population statistics of nodal prices per period, and per-node ranges
/// over the horizon.
pub fn price_stats(sol: &ClearingSolution) -> PriceStats {
    let case = &sol.case;
    let periods = (0..case.periods)
        .map(|k| {
            let xs: Vec<f64> = sol.lmp.iter().map(|row| row[k]).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let mad = xs.iter().map(|x| (x - mean).abs()).sum::<f64>() / n;
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            PeriodStats {
                period: k + 1,
                mean,
                variance,
                std_dev: variance.sqrt(),
                mad,
                min,
                max,
                spread: max - min,
            }
        })
        .collect();
    let nodes = case
        .nodes
        .iter()
        .zip(&sol.lmp)
        .map(|(node, row)| {
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            NodeSpread {
                node: node.id.clone(),
                min,
                max,
                spread: max - min,
            }
        })
        .collect();
    PriceStats { periods, nodes }
}

impl PriceStats {
    /// Long format: `metric,period,value`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "period", "value"]).expect("in-memory write");
        for p in &self.periods {
            for (name, v) in [
                ("mean", p.mean),
                ("variance", p.variance),
                ("std_dev", p.std_dev),
                ("mad", p.mad),
                ("min", p.min),
                ("max", p.max),
                ("spread", p.spread),
            ] {
                w.write_record([name, &p.period.to_string(), &v.to_string()])
                    .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Congestion {
    Line {
        line: String,
        period: usize,
        flow: f64,
        capacity: f64,
    },
    /// Change from `period - 1` to `period` at the limit.
    Ramp {
        generator: String,
        period: usize,
        side: Side,
        change: f64,
        limit: f64,
    },
    Shift {
        link: String,
        side: Side,
        shift: f64,
        bound: f64,
    },
    DataCenter {
        node: String,
        period: usize,
        absorbed: f64,
        limit: f64,
    },
    NegativePrice {
        node: String,
        period: usize,
        price: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct CongestionReport {
    pub items: Vec<Congestion>,
}

impl CongestionReport {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn negative_prices(&self) -> usize {
        self.items
            .iter()
            .filter(|c| matches!(c, Congestion::NegativePrice { .. }))
            .count()
    }
}

fn at(value: f64, bound: f64, tol: f64) -> bool {
    (value - bound).abs() <= tol * (1.0 + bound.abs())
}

/// Binding capacities, ramps, shift bounds and data-center limits, plus
/// negative prices. Bounds of zero on links are not reported.
pub fn congestion_report(sol: &ClearingSolution, tol: f64) -> CongestionReport {
    let case = &sol.case;
    let mut items = Vec::new();
    for (l, line) in case.lines.iter().enumerate() {
        for k in 0..case.periods {
            let f = sol.flows[l][k];
            if line.capacity[k] > 0.0 && at(f.abs(), line.capacity[k], tol) {
                items.push(Congestion::Line {
                    line: line.id.clone(),
                    period: k + 1,
                    flow: f,
                    capacity: line.capacity[k],
                });
            }
        }
    }
    for (i, g) in case.generators.iter().enumerate() {
        let Some(limit) = g.ramp_limit else { continue };
        for k in 1..case.periods {
            let change = sol.dispatch[i][k] - sol.dispatch[i][k - 1];
            if at(change.abs(), limit, tol) {
                items.push(Congestion::Ramp {
                    generator: g.id.clone(),
                    period: k + 1,
                    side: if change > 0.0 { Side::Upper } else { Side::Lower },
                    change,
                    limit,
                });
            }
        }
    }
    for (v, link) in case.virtual_links.iter().enumerate() {
        let s = sol.shifts[v];
        if link.upper > 0.0 && at(s, link.upper, tol) {
            items.push(Congestion::Shift {
                link: link.id.clone(),
                side: Side::Upper,
                shift: s,
                bound: link.upper,
            });
        } else if link.lower < 0.0 && at(s, link.lower, tol) {
            items.push(Congestion::Shift {
                link: link.id.clone(),
                side: Side::Lower,
                shift: s,
                bound: link.lower,
            });
        }
    }
    for (n, node) in case.nodes.iter().enumerate() {
        for k in 0..case.periods {
            if let Some(limit) = case.dc_limit(&node.id, k + 1) {
                if at(sol.absorbed[n][k], limit, tol) {
                    items.push(Congestion::DataCenter {
                        node: node.id.clone(),
                        period: k + 1,
                        absorbed: sol.absorbed[n][k],
                        limit,
                    });
                }
            }
        }
    }
    for (n, node) in case.nodes.iter().enumerate() {
        for k in 0..case.periods {
            let price = sol.lmp[n][k];
            if price < -NEGATIVE_PRICE_TOL {
                items.push(Congestion::NegativePrice {
                    node: node.id.clone(),
                    period: k + 1,
                    price,
                });
            }
        }
    }
    CongestionReport { items }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Interior,
    AtUpper,
    AtLower,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkGap {
    pub link: String,
    pub kind: LinkKind,
    pub shift: f64,
    /// `pi_rec - pi_snd`.
    pub price_gap: f64,
    pub bid_cost: f64,
    pub status: BoundStatus,
    /// Shift can grow / shrink without leaving bounds or draining an
    /// empty node or overfilling a data center.
    pub can_increase: bool,
    pub can_decrease: bool,
    /// Largest marginal welfare gain over feasible directions; the check
    /// passes when this is at most the tolerance.
    pub best_gain: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct GapReport {
    pub links: Vec<LinkGap>,
}

impl GapReport {
    pub fn all_pass(&self) -> bool {
        self.links.iter().all(|l| l.passes)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LinkGap> {
        self.links.iter().filter(|l| !l.passes)
    }
}

/// Checks that no feasible change of any single shift is profitable at
/// the cleared prices. For a link strictly inside its bounds this is
/// `|pi_rec - pi_snd| <= cost`; a link pinned at a bound is checked only
/// in the direction it can still move, which makes forward-only links
/// one-sided.
pub fn gap_check(sol: &ClearingSolution, tol: f64) -> GapReport {
    let case = &sol.case;
    let links = case
        .virtual_links
        .iter()
        .enumerate()
        .map(|(v, link)| {
            let s = sol.shifts[v];
            let gap = sol.link_price_gap(v);
            let a = link.bid_cost;
            let q = tol * (1.0 + link.upper.abs().max(link.lower.abs()));
            let status = if link.upper - link.lower <= q {
                BoundStatus::Fixed
            } else if s >= link.upper - q {
                BoundStatus::AtUpper
            } else if s <= link.lower + q {
                BoundStatus::AtLower
            } else {
                BoundStatus::Interior
            };
            let snd = absorbed_room(case, sol, &link.snd.node, link.snd.period);
            let rec = absorbed_room(case, sol, &link.rec.node, link.rec.period);
            // Increasing the shift drains snd and fills rec.
            let can_increase = s < link.upper - q && snd.0 > q && rec.1 > q;
            let can_decrease = s > link.lower + q && rec.0 > q && snd.1 > q;
            let mut best = f64::NEG_INFINITY;
            if can_increase {
                let cost = if s >= -q { a } else { -a };
                best = best.max(-gap - cost);
            }
            if can_decrease {
                let cost = if s <= q { a } else { -a };
                best = best.max(gap - cost);
            }
            LinkGap {
                link: link.id.clone(),
                kind: link.kind(),
                shift: s,
                price_gap: gap,
                bid_cost: a,
                status,
                can_increase,
                can_decrease,
                best_gain: best,
                passes: best <= tol,
            }
        })
        .collect();
    GapReport { links }
}

/// `(absorbed load available to drain, room below the data-center limit)`.
fn absorbed_room(case: &CaseSpec, sol: &ClearingSolution, node: &str, period: usize) -> (f64, f64) {
    let n = case.node_index(node).expect("link endpoint exists");
    let absorbed = sol.absorbed[n][period - 1];
    let room = case
        .dc_limit(node, period)
        .map_or(f64::INFINITY, |lim| lim - absorbed);
    (absorbed, room)
}

/// Heat-map of nodal prices, nodes as rows and periods as columns.
pub fn price_heatmap_svg(sol: &ClearingSolution) -> String {
    const CELL_W: usize = 60;
    const CELL_H: usize = 18;
    const LEFT: usize = 60;
    const TOP: usize = 24;
    let case = &sol.case;
    let all: Vec<f64> = sol.lmp.iter().flatten().copied().collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = LEFT + CELL_W * case.periods + 10;
    let height = TOP + CELL_H * case.nodes.len() + 10;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>{} nodal prices</title>"#, xml_escape(&case.name));
    for k in 0..case.periods {
        let x = LEFT + CELL_W * k + CELL_W / 2;
        let _ = writeln!(s, r#"<text x="{x}" y="16" text-anchor="middle">t{}</text>"#, k + 1);
    }
    for (n, node) in case.nodes.iter().enumerate() {
        let y = TOP + CELL_H * n;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 4,
            y + CELL_H - 5,
            xml_escape(&node.id)
        );
        for k in 0..case.periods {
            let price = sol.lmp[n][k];
            let frac = if hi > lo { (price - lo) / (hi - lo) } else { 0.5 };
            let (r, g, b) = ramp_color(frac);
            let x = LEFT + CELL_W * k;
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="#{r:02x}{g:02x}{b:02x}"><title>{} t{}: {price:.4}</title></rect>"##,
                xml_escape(&node.id),
                k + 1
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Blue through white to red.
fn ramp_color(frac: f64) -> (u8, u8, u8) {
    let f = frac.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, t: f64| (a + (b - a) * t).round() as u8;
    if f < 0.5 {
        let t = f / 0.5;
        (lerp(49.0, 255.0, t), lerp(104.0, 255.0, t), lerp(180.0, 255.0, t))
    } else {
        let t = (f - 0.5) / 0.5;
        (lerp(255.0, 200.0, t), lerp(255.0, 40.0, t), lerp(255.0, 40.0, t))
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
