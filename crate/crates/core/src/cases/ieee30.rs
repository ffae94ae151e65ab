//! Standard 30-bus topology with synthetic, seeded bids over three periods.
//!
//! Branch reactances are the usual test-system values (susceptance `1/x`);
//! thermal ratings are the usual ones scaled by [`RATING_SCALE`]. Loads
//! follow the usual bus demands scaled by a per-period profile. Bids are
//! drawn from a ChaCha stream, so a seed fixes the whole case.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netmodel::{
    CaseSpec, Entity, Generator, Line, Load, Node, SpaceTimeIndex, VirtualLink,
};

pub const IEEE30_DEFAULT_SEED: u64 = 30;

/// Buses hosting the data centers of the single flexible entity.
pub const IEEE30_DC_NODES: [usize; 7] = [7, 12, 15, 19, 21, 24, 30];

const PERIODS: usize = 3;
const SHIFT_LIMIT: f64 = 10.0;
const SPATIAL_COST: f64 = 0.5;
const TEMPORAL_COST: f64 = 1.0;
const LINE_COST: f64 = 0.5;
const RATING_SCALE: f64 = 0.4;
const PROFILE: [f64; PERIODS] = [0.8, 1.0, 1.2];

/// `(from, to, x, rating)`.
const BRANCHES: [(usize, usize, f64, f64); 41] = [
    (1, 2, 0.0575, 130.0),
    (1, 3, 0.1652, 130.0),
    (2, 4, 0.1737, 65.0),
    (3, 4, 0.0379, 130.0),
    (2, 5, 0.1983, 130.0),
    (2, 6, 0.1763, 65.0),
    (4, 6, 0.0414, 90.0),
    (5, 7, 0.1160, 70.0),
    (6, 7, 0.0820, 130.0),
    (6, 8, 0.0420, 32.0),
    (6, 9, 0.2080, 65.0),
    (6, 10, 0.5560, 32.0),
    (9, 11, 0.2080, 65.0),
    (9, 10, 0.1100, 65.0),
    (4, 12, 0.2560, 65.0),
    (12, 13, 0.1400, 65.0),
    (12, 14, 0.2559, 32.0),
    (12, 15, 0.1304, 32.0),
    (12, 16, 0.1987, 32.0),
    (14, 15, 0.1997, 16.0),
    (16, 17, 0.1923, 16.0),
    (15, 18, 0.2185, 16.0),
    (18, 19, 0.1292, 16.0),
    (19, 20, 0.0680, 32.0),
    (10, 20, 0.2090, 32.0),
    (10, 17, 0.0845, 32.0),
    (10, 21, 0.0749, 32.0),
    (10, 22, 0.1499, 32.0),
    (21, 22, 0.0236, 32.0),
    (15, 23, 0.2020, 16.0),
    (22, 24, 0.1790, 16.0),
    (23, 24, 0.2700, 16.0),
    (24, 25, 0.3292, 16.0),
    (25, 26, 0.3800, 16.0),
    (25, 27, 0.2087, 16.0),
    (28, 27, 0.3960, 65.0),
    (27, 29, 0.4153, 16.0),
    (27, 30, 0.6027, 16.0),
    (29, 30, 0.4533, 16.0),
    (8, 28, 0.2000, 32.0),
    (6, 28, 0.0599, 32.0),
];

/// `(bus, demand MW)`.
const DEMANDS: [(usize, f64); 21] = [
    (2, 21.7),
    (3, 2.4),
    (4, 7.6),
    (5, 94.2),
    (7, 22.8),
    (8, 30.0),
    (10, 5.8),
    (12, 11.2),
    (14, 6.2),
    (15, 8.2),
    (16, 3.5),
    (17, 9.0),
    (18, 3.2),
    (19, 9.5),
    (20, 2.2),
    (21, 17.5),
    (23, 3.2),
    (24, 8.7),
    (26, 3.5),
    (29, 2.4),
    (30, 10.6),
];

/// `(bus, capacity MW, ramp MW)`.
const UNITS: [(usize, f64, f64); 6] = [
    (1, 80.0, 30.0),
    (2, 80.0, 30.0),
    (5, 50.0, 20.0),
    (8, 55.0, 20.0),
    (11, 30.0, 15.0),
    (13, 40.0, 15.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ieee30Options {
    pub flex: bool,
    pub seed: u64,
}

impl Default for Ieee30Options {
    fn default() -> Self {
        Self {
            flex: true,
            seed: IEEE30_DEFAULT_SEED,
        }
    }
}

fn bus(k: usize) -> String {
    format!("b{k}")
}

pub fn case_ieee30(opts: &Ieee30Options) -> CaseSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let nodes = (1..=30)
        .map(|k| Node {
            id: bus(k),
            label: format!("bus {k}"),
        })
        .collect();

    let generators = UNITS
        .iter()
        .map(|&(b, cap, ramp)| {
            let base: f64 = rng.gen_range(8.0..35.0);
            Generator {
                id: format!("g{b}"),
                node: bus(b),
                capacity: vec![cap; PERIODS],
                bid_cost: (0..PERIODS)
                    .map(|_| round2(base + rng.gen_range(-2.0..2.0)))
                    .collect(),
                ramp_limit: Some(ramp),
            }
        })
        .collect();

    let mut entities = Vec::new();
    let mut dc_loads = Vec::new();
    let loads: Vec<Load> = DEMANDS
        .iter()
        .map(|&(b, mw)| {
            let id = format!("j{b}");
            let entity = if IEEE30_DC_NODES.contains(&b) {
                dc_loads.push(id.clone());
                "dc".to_string()
            } else {
                entities.push(Entity {
                    id: format!("u{b}"),
                    loads: vec![id.clone()],
                    dc_capacity: vec![],
                });
                format!("u{b}")
            };
            let value: f64 = rng.gen_range(30.0..70.0);
            Load {
                id,
                node: bus(b),
                entity,
                request: PROFILE
                    .iter()
                    .map(|p| round2(mw * p * rng.gen_range(0.9..1.1)))
                    .collect(),
                bid_value: (0..PERIODS)
                    .map(|_| round2(value + rng.gen_range(-5.0..5.0)))
                    .collect(),
            }
        })
        .collect();
    entities.insert(
        0,
        Entity {
            id: "dc".into(),
            loads: dc_loads,
            dc_capacity: vec![],
        },
    );

    let lines = BRANCHES
        .iter()
        .enumerate()
        .map(|(k, &(a, b, x, rating))| Line {
            id: format!("l{}", k + 1),
            snd: bus(a),
            rec: bus(b),
            capacity: vec![rating * RATING_SCALE; PERIODS],
            bid_cost: vec![LINE_COST; PERIODS],
            susceptance: round4(1.0 / x),
        })
        .collect();

    let virtual_links = if opts.flex { dc_links() } else { Vec::new() };

    CaseSpec {
        name: if opts.flex { "ieee30-flex" } else { "ieee30-base" }.into(),
        description: format!(
            "30-bus network, {PERIODS} periods, synthetic bids (seed {}), data centers at buses {:?}",
            opts.seed, IEEE30_DC_NODES
        ),
        nodes,
        periods: PERIODS,
        generators,
        loads,
        lines,
        entities,
        virtual_links,
    }
}

/// Spatial links between every pair of data centers in each period, and
/// forward temporal links at each data center.
fn dc_links() -> Vec<VirtualLink> {
    let mut out = Vec::new();
    let link = |id: String, snd: SpaceTimeIndex, rec: SpaceTimeIndex, lower: f64, cost: f64| VirtualLink {
        id,
        entity: "dc".into(),
        snd,
        rec,
        lower,
        upper: SHIFT_LIMIT,
        bid_cost: cost,
    };
    for t in 1..=PERIODS {
        for (i, &a) in IEEE30_DC_NODES.iter().enumerate() {
            for &b in &IEEE30_DC_NODES[i + 1..] {
                out.push(link(
                    format!("s{a}_{b}_t{t}"),
                    SpaceTimeIndex::new(bus(a), t),
                    SpaceTimeIndex::new(bus(b), t),
                    -SHIFT_LIMIT,
                    SPATIAL_COST,
                ));
            }
        }
    }
    for &a in &IEEE30_DC_NODES {
        for t in 1..PERIODS {
            out.push(link(
                format!("w{a}_t{t}"),
                SpaceTimeIndex::new(bus(a), t),
                SpaceTimeIndex::new(bus(a), t + 1),
                0.0,
                TEMPORAL_COST,
            ));
        }
    }
    out
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}
