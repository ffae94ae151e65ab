use vlink::analysis::{congestion_report, price_stats};
use vlink::cases::{
    builtin, case_1bus_5t, case_3bus, case_ieee30, scenario_count, sweep, template_1bus_5t, template_3bus,
    CasesError, Ieee30Options, ScenarioTemplate, BUILTINS, IEEE30_DC_NODES,
};
use vlink::clearing::{clear, ClearOptions, ClearingSolution};
use vlink::netmodel::{validate, LinkKind};

fn opts() -> ClearOptions {
    ClearOptions::default()
}

fn first(v: &[Vec<f64>]) -> Vec<f64> {
    v.iter().map(|r| r[0]).collect()
}

fn same_primal(a: &ClearingSolution, b: &ClearingSolution) -> bool {
    a.welfare == b.welfare
        && a.served == b.served
        && a.dispatch == b.dispatch
        && a.flows == b.flows
        && a.shifts == b.shifts
}

#[test]
fn builtins_validate() {
    for name in BUILTINS {
        for k in 1..=scenario_count(name).unwrap() {
            let case = builtin(name, k, 30).unwrap();
            assert!(validate(&case).is_empty(), "{name} s{k}: {:?}", validate(&case));
        }
    }
    for seed in 0..5 {
        assert!(validate(&case_ieee30(&Ieee30Options { flex: true, seed })).is_empty());
    }
}

#[test]
fn three_bus_parameters() {
    let case = case_3bus(1).unwrap();
    let caps: Vec<f64> = case.generators.iter().map(|g| g.capacity[0]).collect();
    assert_eq!(caps, [50.0, 30.0, 50.0]);
    assert_eq!(case.loads.iter().map(|l| l.request[0]).collect::<Vec<_>>(), [40.0, 45.0, 40.0]);
    assert_eq!(case.lines.iter().map(|l| l.capacity[0]).collect::<Vec<_>>(), [5.0, 10.0, 10.0]);
    assert_eq!(case.generators.iter().map(|g| g.bid_cost[0]).collect::<Vec<_>>(), [10.0, 20.0, 10.0]);
    assert_eq!(case.loads.iter().map(|l| l.bid_value[0]).collect::<Vec<_>>(), [40.0, 30.0, 40.0]);
    assert!(case.lines.iter().all(|l| l.bid_cost[0] == 2.0 && l.susceptance == 0.5));

    let s2 = case_3bus(2).unwrap();
    assert_eq!(s2.virtual_links.iter().map(|v| v.upper).collect::<Vec<_>>(), [5.0, 0.0, 0.0]);
    assert!(s2.virtual_links.iter().all(|v| v.bid_cost == 3.0));
    assert!(case_3bus(6).unwrap().virtual_links.iter().all(|v| v.bid_cost == 1.0));
    assert!(case_3bus(7).unwrap().virtual_links.iter().all(|v| v.bid_cost == 0.0));
    assert_eq!(s2.virtual_links[0].lower, -5.0);
}

#[test]
fn one_bus_parameters() {
    let case = case_1bus_5t(1).unwrap();
    assert_eq!(case.generators[0].capacity, vec![50.0; 5]);
    assert_eq!(case.generators[0].ramp_limit, Some(20.0));
    assert_eq!(case.loads[0].request, [70.0, 20.0, 70.0, 40.0, 40.0]);
    assert_eq!(case.generators[0].bid_cost, [10.0, 20.0, 10.0, 15.0, 20.0]);
    assert_eq!(case.loads[0].bid_value, [30.0, 60.0, 40.0, 50.0, 45.0]);
    for (t, v) in case.virtual_links.iter().enumerate() {
        assert_eq!((v.snd.period, v.rec.period), (t + 1, t + 2));
        assert_eq!(v.kind(), LinkKind::Temporal);
        assert_eq!(v.bid_cost, 3.0);
        assert_eq!(v.lower, 0.0);
    }
    let upper = |k| case_1bus_5t(k).unwrap().virtual_links.iter().map(|v| v.upper).collect::<Vec<_>>();
    assert_eq!(upper(2), [10.0, 0.0, 0.0, 0.0]);
    assert_eq!(upper(5), [21.0, 0.0, 21.0, 0.0]);
    assert_eq!(upper(7), [100.0; 4]);
}

#[test]
fn out_of_range() {
    assert!(matches!(case_3bus(0), Err(CasesError::ScenarioOutOfRange { max: 7, .. })));
    assert!(matches!(case_1bus_5t(8), Err(CasesError::ScenarioOutOfRange { max: 7, .. })));
    assert!(matches!(builtin("ieee30", 3, 30), Err(CasesError::ScenarioOutOfRange { max: 2, .. })));
    assert!(matches!(builtin("nosuch", 1, 30), Err(CasesError::UnknownBuiltin(_))));
}

#[test]
fn ieee30_flex_switch() {
    let off = case_ieee30(&Ieee30Options { flex: false, seed: 30 });
    let on = case_ieee30(&Ieee30Options { flex: true, seed: 30 });
    assert!(off.virtual_links.is_empty());
    assert_eq!(on.nodes.len(), 30);
    assert_eq!(on.lines.len(), 41);
    assert_eq!(on.periods, 3);
    assert!(!on.virtual_links.is_empty());
    assert!(on.virtual_links.iter().all(|v| v.upper == 10.0));
    for n in [21, 30] {
        assert!(IEEE30_DC_NODES.contains(&n));
    }
    let mut stripped = on.clone();
    stripped.virtual_links.clear();
    stripped.name = off.name.clone();
    assert_eq!(stripped, off);
}

#[test]
fn ieee30_is_seeded() {
    let a = case_ieee30(&Ieee30Options { flex: true, seed: 7 });
    let b = case_ieee30(&Ieee30Options { flex: true, seed: 7 });
    let c = case_ieee30(&Ieee30Options { flex: true, seed: 8 });
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn ieee30_flex_helps_for_every_seed() {
    for seed in 0..20 {
        let off = clear(&case_ieee30(&Ieee30Options { flex: false, seed }), &opts()).unwrap();
        let on = clear(&case_ieee30(&Ieee30Options { flex: true, seed }), &opts()).unwrap();
        assert!(on.welfare > off.welfare, "seed {seed}");
        let (a, b) = (price_stats(&off), price_stats(&on));
        for (p, q) in a.periods.iter().zip(&b.periods) {
            assert!(q.std_dev < p.std_dev && q.mad < p.mad, "seed {seed} t{}", p.period);
        }
        assert!(
            congestion_report(&on, 1e-9).negative_prices() <= congestion_report(&off, 1e-9).negative_prices(),
            "seed {seed}"
        );
    }
}

#[test]
fn identical_scenarios() {
    let a = clear(&case_3bus(4).unwrap(), &opts()).unwrap();
    let b = clear(&case_3bus(5).unwrap(), &opts()).unwrap();
    assert!(same_primal(&a, &b));
    let a = clear(&case_1bus_5t(3).unwrap(), &opts()).unwrap();
    let b = clear(&case_1bus_5t(4).unwrap(), &opts()).unwrap();
    assert!(same_primal(&a, &b));
}

#[test]
fn sweep_three_bus() {
    let rows = sweep(&template_3bus(), &opts());
    assert_eq!(rows.len(), 7);
    let phi: Vec<f64> = rows.iter().map(|r| r.result.as_ref().unwrap().welfare).collect();
    assert!(phi[..5].windows(2).all(|w| w[1] >= w[0] - 1e-9), "{phi:?}");
    assert!((phi[0] - 2920.0).abs() < 1e-6 && (phi[4] - 3000.0).abs() < 1e-6);
    let labels: Vec<&str> = rows.iter().map(|r| r.binding.label.as_str()).collect();
    assert_eq!(labels[0], "s1");
    assert_eq!(first(&rows[0].result.as_ref().unwrap().served), [40.0, 42.5, 40.0]);
}

#[test]
fn sweep_one_bus() {
    let rows = sweep(&template_1bus_5t(), &opts());
    let phi: Vec<f64> = rows.iter().map(|r| r.result.as_ref().unwrap().welfare).collect();
    assert!((phi[0] - 5200.0).abs() < 1e-6);
    assert!((phi[6] - 6200.0).abs() < 1e-6);
}

#[test]
fn empty_sweep() {
    let t = ScenarioTemplate::new(case_3bus(1).unwrap(), vec![]);
    assert!(sweep(&t, &opts()).is_empty());
}

#[test]
fn sweep_continues_past_failures() {
    let mut t = template_3bus();
    t.base.lines[0].susceptance = -1.0;
    let rows = sweep(&t, &opts());
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.result.is_err()));
}
