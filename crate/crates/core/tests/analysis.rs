use proptest::prelude::*;

use vlink::analysis::{
    congestion_report, gap_check, price_heatmap_svg, price_stats, BoundStatus, Congestion, Side,
};
use vlink::cases::{builtin, case_1bus_5t, case_3bus, case_ieee30, Ieee30Options};
use vlink::clearing::{clear, ClearOptions, ClearingSolution};
use vlink::netmodel::{CaseSpec, Entity, Generator, Load, Node};

fn solve(case: &CaseSpec) -> ClearingSolution {
    clear(case, &ClearOptions::default()).unwrap()
}

fn single_bus(request: f64) -> CaseSpec {
    CaseSpec {
        name: "one".into(),
        description: String::new(),
        nodes: vec![Node { id: "n1".into(), label: String::new() }],
        periods: 2,
        generators: vec![Generator {
            id: "g1".into(),
            node: "n1".into(),
            capacity: vec![10.0; 2],
            bid_cost: vec![5.0; 2],
            ramp_limit: None,
        }],
        loads: vec![Load {
            id: "j1".into(),
            node: "n1".into(),
            entity: "e".into(),
            request: vec![request; 2],
            bid_value: vec![20.0; 2],
        }],
        lines: vec![],
        entities: vec![Entity { id: "e".into(), loads: vec!["j1".into()], dc_capacity: vec![] }],
        virtual_links: vec![],
    }
}

#[test]
fn stats_three_bus_scenario_1() {
    let stats = price_stats(&solve(&case_3bus(1).unwrap()));
    let p = &stats.periods[0];
    assert!((p.mean - 58.0 / 3.0).abs() < 1e-9);
    assert!((p.spread - 20.0).abs() < 1e-9);
    assert!((p.mad - 64.0 / 9.0).abs() < 1e-9);
    assert!((p.variance - 608.0 / 9.0).abs() < 1e-9);
    assert!((p.std_dev - (608.0f64 / 9.0).sqrt()).abs() < 1e-9);
    assert!((p.std_dev - 8.219).abs() < 1e-3);
    assert_eq!((p.min, p.max), (10.0, 30.0));
}

#[test]
fn stats_uniform_prices() {
    let p = &price_stats(&solve(&case_3bus(7).unwrap())).periods[0];
    assert!(p.std_dev.abs() < 1e-9 && p.mad.abs() < 1e-9 && p.spread.abs() < 1e-9);
}

#[test]
fn stats_single_node() {
    let stats = price_stats(&solve(&case_1bus_5t(1).unwrap()));
    assert_eq!(stats.periods.len(), 5);
    for p in &stats.periods {
        assert_eq!((p.variance, p.std_dev, p.mad, p.spread), (0.0, 0.0, 0.0, 0.0));
    }
    assert_eq!(stats.nodes.len(), 1);
    assert!((stats.nodes[0].spread - 70.0).abs() < 1e-9);
}

#[test]
fn stats_csv_long_format() {
    let csv = price_stats(&solve(&case_3bus(1).unwrap())).to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("metric,period,value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().any(|r| r.starts_with("spread,1,20")));
}

#[test]
fn congestion_one_bus_scenario_1() {
    let report = congestion_report(&solve(&case_1bus_5t(1).unwrap()), 1e-9);
    let ramps: Vec<(usize, Side)> = report
        .items
        .iter()
        .filter_map(|c| match c {
            Congestion::Ramp { period, side, .. } => Some((*period, *side)),
            _ => None,
        })
        .collect();
    assert_eq!(ramps, [(2, Side::Lower), (3, Side::Upper)]);
    let negative: Vec<(usize, f64)> = report
        .items
        .iter()
        .filter_map(|c| match c {
            Congestion::NegativePrice { period, price, .. } => Some((*period, *price)),
            _ => None,
        })
        .collect();
    assert_eq!(negative.len(), 1);
    assert_eq!(negative[0].0, 2);
    assert!((negative[0].1 + 30.0).abs() < 1e-9);
    assert_eq!(report.negative_prices(), 1);
}

#[test]
fn congestion_three_bus_scenario_1() {
    let report = congestion_report(&solve(&case_3bus(1).unwrap()), 1e-9);
    let lines: Vec<&str> = report
        .items
        .iter()
        .filter_map(|c| match c {
            Congestion::Line { line, .. } => Some(line.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(lines, ["l1"]);
}

#[test]
fn congestion_reports_shift_and_dc_limits() {
    let mut case = case_3bus(2).unwrap();
    case.entities[0].dc_capacity = vec![vlink::netmodel::DcCapacity { node: "n1".into(), limit: vec![44.0] }];
    let report = congestion_report(&solve(&case), 1e-9);
    assert!(report.items.iter().any(|c| matches!(c, Congestion::DataCenter { node, .. } if node == "n1")));
    let report = congestion_report(&solve(&case_3bus(2).unwrap()), 1e-9);
    assert!(report
        .items
        .iter()
        .any(|c| matches!(c, Congestion::Shift { link, side: Side::Lower, .. } if link == "v1")));
}

#[test]
fn congestion_zero_load() {
    let report = congestion_report(&solve(&single_bus(0.0)), 1e-9);
    assert!(report.is_empty(), "{report:?}");
}

#[test]
fn gap_three_bus_scenario_5() {
    let report = gap_check(&solve(&case_3bus(5).unwrap()), 1e-8);
    assert!(report.all_pass());
    for g in &report.links {
        assert!(g.price_gap.abs() <= 3.0 + 1e-8);
        assert_eq!(g.status, BoundStatus::Interior);
    }
    let used: Vec<f64> = report.links.iter().filter(|g| g.shift.abs() > 1e-9).map(|g| g.price_gap.abs()).collect();
    assert_eq!(used.len(), 2);
    assert!(used.iter().all(|g| (g - 3.0).abs() < 1e-9));
}

#[test]
fn gap_one_bus_scenario_4() {
    let report = gap_check(&solve(&case_1bus_5t(4).unwrap()), 1e-8);
    assert!(report.all_pass());
    let v2 = report.links.iter().find(|g| g.link == "v2").unwrap();
    assert!(v2.shift.abs() < 1e-9);
    assert!((v2.price_gap - 20.0).abs() < 1e-9);
    assert_eq!(v2.status, BoundStatus::AtLower);
    assert!(!v2.can_decrease);
    assert!(v2.passes);
}

#[test]
fn gap_no_links() {
    let mut case = case_3bus(1).unwrap();
    case.virtual_links.clear();
    assert!(gap_check(&solve(&case), 1e-8).links.is_empty());
}

#[test]
fn gap_detects_wrong_prices() {
    let mut sol = solve(&case_3bus(5).unwrap());
    sol.lmp[1][0] += 5.0;
    let report = gap_check(&sol, 1e-8);
    assert!(!report.all_pass());
    assert!(report.failures().count() >= 1);
}

#[test]
fn gap_passes_on_all_builtins() {
    for name in ["3bus", "1bus5t"] {
        for k in 1..=7 {
            let report = gap_check(&solve(&builtin(name, k, 0).unwrap()), 1e-8);
            assert!(report.all_pass(), "{name} s{k}: {:?}", report.failures().collect::<Vec<_>>());
        }
    }
    let report = gap_check(&solve(&case_ieee30(&Ieee30Options::default())), 1e-8);
    assert!(report.all_pass());
}

#[test]
fn heatmap_svg() {
    let svg = price_heatmap_svg(&solve(&case_1bus_5t(1).unwrap()));
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<rect").count(), 5);
    assert!(svg.contains("-30.0000"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stats_are_well_formed(k in 1usize..=7, t in any::<bool>()) {
        let sol = solve(&if t { case_1bus_5t(k).unwrap() } else { case_3bus(k).unwrap() });
        let stats = price_stats(&sol);
        for p in &stats.periods {
            prop_assert!(p.variance >= 0.0 && p.std_dev >= 0.0 && p.mad >= 0.0);
            prop_assert!((p.spread - (p.max - p.min)).abs() < 1e-12 && p.spread >= 0.0);
            prop_assert!(p.mad <= p.std_dev + 1e-12);
        }
    }

    #[test]
    fn gap_check_holds_for_random_bounds(
        uppers in proptest::collection::vec(0.0f64..25.0, 3),
        cost in prop_oneof![Just(0.0), 0.0f64..6.0],
    ) {
        let mut case = case_3bus(1).unwrap();
        for (v, u) in case.virtual_links.iter_mut().zip(&uppers) {
            v.upper = *u;
            v.lower = -*u;
            v.bid_cost = cost;
        }
        let report = gap_check(&solve(&case), 1e-8);
        prop_assert!(report.all_pass(), "{:?}", report.failures().collect::<Vec<_>>());
    }
}
