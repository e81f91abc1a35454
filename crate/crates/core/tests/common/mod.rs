//! Random plants and snapshots, and a brute-force shedding-matrix oracle
//! written independently of the library's selection code.

#![allow(dead_code)]

use std::cmp::Ordering;

use fls_core::grid_model::{
    BreakerState, Busbar, Bustie, Event, EventCatalog, ExternalTie, Generator, GeneratorReading,
    GridConfig, Load, LoadReading, NetworkSnapshot, SrCurve,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

/// How measurements are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Values {
    /// Multiples of 0.5 MW, so every sum is exact.
    HalfMw,
    /// Arbitrary doubles.
    Float,
}

fn amount(rng: &mut TestRng, values: Values, lo: f64, hi: f64) -> f64 {
    match values {
        Values::HalfMw => {
            let steps = ((hi - lo) / 0.5).floor() as i64;
            lo + 0.5 * rng.gen_range(0..=steps) as f64
        }
        Values::Float => rng.gen_range(lo..=hi),
    }
}

/// A valid plant: at most 3 busbars, 6 generators and 20 loads.
pub fn random_config(rng: &mut TestRng) -> GridConfig {
    let mut names = ["NORTH", "SOUTH", "EAST", "WEST", "MID"];
    names.shuffle(rng);
    let nb = rng.gen_range(1..=3);
    let busbars: Vec<Busbar> = names[..nb]
        .iter()
        .map(|n| Busbar {
            id: (*n).into(),
            name: n.to_lowercase(),
        })
        .collect();

    // a random spanning tree, then possibly the remaining pair
    let mut pairs = Vec::new();
    for i in 1..nb {
        pairs.push((rng.gen_range(0..i), i));
    }
    if nb == 3 && rng.gen_bool(0.4) {
        let present: Vec<(usize, usize)> =
            pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        for cand in [(0, 1), (0, 2), (1, 2)] {
            if !present.contains(&cand) {
                pairs.push(cand);
                break;
            }
        }
    }
    pairs.shuffle(rng);
    let busties = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| Bustie {
            id: format!("T{}", 9 - k).into(),
            endpoints: if rng.gen_bool(0.5) {
                (busbars[a].id.clone(), busbars[b].id.clone())
            } else {
                (busbars[b].id.clone(), busbars[a].id.clone())
            },
        })
        .collect();

    let ng = rng.gen_range(0..=6);
    let generators = (0..ng)
        .map(|i| {
            let rated = amount(rng, Values::HalfMw, 5.0, 30.0);
            let mut curve = Vec::new();
            let mut p = 0.0;
            for _ in 0..rng.gen_range(0..=3) {
                curve.push((p, amount(rng, Values::HalfMw, 0.0, 8.0)));
                p += amount(rng, Values::HalfMw, 1.0, 10.0);
            }
            Generator {
                id: format!("G{}", [3, 1, 5, 2, 6, 4][i]).into(),
                busbar: busbars[rng.gen_range(0..nb)].id.clone(),
                building: format!("BLD{}", rng.gen_range(1..=3)).into(),
                rated_power: rated,
                rated_apparent_power: rated * 1.25,
                inertia_constant: rng.gen_range(1.0..6.0),
                sr_curve: SrCurve(curve),
            }
        })
        .collect();

    let nl = rng.gen_range(0..=20);
    let loads = (0..nl)
        .map(|i| Load {
            id: format!("LD{:02}", (i * 7) % 23).into(),
            busbar: busbars[rng.gen_range(0..nb)].id.clone(),
            priority: rng.gen_range(1..=4),
            sheddable: rng.gen_bool(0.85),
        })
        .collect();

    let external_tie = rng.gen_bool(0.5).then(|| ExternalTie {
        id: "X1".into(),
        busbar: busbars[rng.gen_range(0..nb)].id.clone(),
        present: rng.gen_bool(0.8),
    });

    GridConfig {
        busbars,
        busties,
        generators,
        loads,
        external_tie,
        nominal_frequency: 50.0,
    }
}

/// Random breaker states and measurements covering every element.
pub fn random_snapshot(rng: &mut TestRng, config: &GridConfig, values: Values) -> NetworkSnapshot {
    let mut s = NetworkSnapshot {
        timestamp: rng.gen_range(0.0..100.0),
        ..Default::default()
    };
    for g in &config.generators {
        let closed = rng.gen_bool(0.75);
        s.generators.insert(
            g.id.clone(),
            GeneratorReading {
                breaker: BreakerState::from_closed(closed),
                power: if closed {
                    amount(rng, values, 0.0, g.rated_power)
                } else {
                    0.0
                },
                // open units may still report a reserve; it must be ignored
                sr: amount(rng, values, 0.0, 10.0),
            },
        );
    }
    for l in &config.loads {
        let closed = rng.gen_bool(0.8);
        s.loads.insert(
            l.id.clone(),
            LoadReading {
                breaker: BreakerState::from_closed(closed),
                power: if closed {
                    amount(rng, values, 0.5, 10.0)
                } else {
                    0.0
                },
                priority: rng.gen_bool(0.2).then(|| rng.gen_range(1..=4)),
            },
        );
    }
    for t in &config.busties {
        s.busties
            .insert(t.id.clone(), BreakerState::from_closed(rng.gen_bool(0.7)));
    }
    if config.active_tie().is_some() {
        let closed = rng.gen_bool(0.6);
        s.external_tie = Some(BreakerState::from_closed(closed));
        s.imported_power = if closed {
            amount(rng, values, -5.0, 15.0)
        } else {
            0.0
        };
    }
    s
}

/// Per sub-network detail of one oracle column.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleShed {
    pub pm: f64,
    /// Shed power of the marked prefix.
    pub ps: f64,
    /// Shed power without the last marked load.
    pub ps_before_last: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Default)]
pub struct OracleMatrix {
    /// loads x events
    pub rows: Vec<Vec<bool>>,
    pub infeasible: Vec<bool>,
    pub sheds: Vec<Vec<OracleShed>>,
}

/// Islands as sets of busbar indices, by depth-first search over closed
/// busties, skipping `skip`.
pub fn islands(config: &GridConfig, closed: &[bool], skip: Option<usize>) -> Vec<Vec<usize>> {
    let n = config.busbars.len();
    let idx = |id: &fls_core::grid_model::BusbarId| {
        config.busbars.iter().position(|b| &b.id == id).unwrap()
    };
    let mut adj = vec![Vec::new(); n];
    for (k, t) in config.busties.iter().enumerate() {
        if closed[k] && Some(k) != skip {
            let (a, b) = (idx(&t.endpoints.0), idx(&t.endpoints.1));
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Exhaustive priority-ordered scan per event, straight from the
/// definitions: mismatch per island, candidates sorted by (priority,
/// descending power, id), shortest prefix whose sum strictly exceeds the
/// mismatch.
pub fn oracle_matrix(
    config: &GridConfig,
    s: &NetworkSnapshot,
    catalog: &EventCatalog,
) -> OracleMatrix {
    let bus = |id: &fls_core::grid_model::BusbarId| {
        config.busbars.iter().position(|b| &b.id == id).unwrap()
    };
    let g_on: Vec<bool> = config
        .generators
        .iter()
        .map(|g| s.generators[&g.id].breaker.is_closed())
        .collect();
    let g_p: Vec<f64> = config
        .generators
        .iter()
        .zip(&g_on)
        .map(|(g, &on)| if on { s.generators[&g.id].power } else { 0.0 })
        .collect();
    let g_sr: Vec<f64> = config
        .generators
        .iter()
        .zip(&g_on)
        .map(|(g, &on)| if on { s.generators[&g.id].sr } else { 0.0 })
        .collect();
    let g_bus: Vec<usize> = config.generators.iter().map(|g| bus(&g.busbar)).collect();
    let l_on: Vec<bool> = config
        .loads
        .iter()
        .map(|l| s.loads[&l.id].breaker.is_closed())
        .collect();
    let l_p: Vec<f64> = config
        .loads
        .iter()
        .zip(&l_on)
        .map(|(l, &on)| if on { s.loads[&l.id].power } else { 0.0 })
        .collect();
    let l_prio: Vec<u32> = config
        .loads
        .iter()
        .map(|l| s.loads[&l.id].priority.unwrap_or(l.priority))
        .collect();
    let l_bus: Vec<usize> = config.loads.iter().map(|l| bus(&l.busbar)).collect();
    let t_on: Vec<bool> = config
        .busties
        .iter()
        .map(|t| s.busties[&t.id].is_closed())
        .collect();
    let tie = config.external_tie.as_ref().filter(|t| t.present);
    let tie_on = tie.is_some() && s.external_tie.is_some_and(|b| b.is_closed());
    let tie_bus = tie.map(|t| bus(&t.busbar));

    let reserve = |island: &[usize], excluded: &dyn Fn(usize) -> bool| -> f64 {
        let mut sum = 0.0;
        for g in 0..g_bus.len() {
            if g_on[g] && island.contains(&g_bus[g]) && !excluded(g) {
                sum += g_sr[g];
            }
        }
        sum
    };

    let n_ev = catalog.len();
    let mut out = OracleMatrix {
        rows: vec![vec![false; n_ev]; config.loads.len()],
        infeasible: vec![false; n_ev],
        sheds: vec![Vec::new(); n_ev],
    };
    let present = islands(config, &t_on, None);

    for (col, event) in catalog.events().iter().enumerate() {
        // (island, mismatch) pairs needing attention
        let mut targets: Vec<(Vec<usize>, f64)> = Vec::new();
        match event {
            Event::GeneratorTrip(id) => {
                let gi = config.generators.iter().position(|g| &g.id == id).unwrap();
                if !g_on[gi] {
                    continue;
                }
                for isl in &present {
                    if isl.contains(&g_bus[gi]) {
                        let others = reserve(isl, &|_| false) - g_sr[gi];
                        targets.push((isl.clone(), g_p[gi] - others));
                    }
                }
            }
            Event::BustieOpen(id) => {
                let ti = config.busties.iter().position(|t| &t.id == id).unwrap();
                if !t_on[ti] {
                    continue;
                }
                let a = bus(&config.busties[ti].endpoints.0);
                let host = present.iter().find(|i| i.contains(&a)).unwrap();
                for isl in islands(config, &t_on, Some(ti)) {
                    if !isl.iter().all(|b| host.contains(b)) {
                        continue;
                    }
                    let mut load = 0.0;
                    for l in 0..l_bus.len() {
                        if l_on[l] && isl.contains(&l_bus[l]) {
                            load += l_p[l];
                        }
                    }
                    let mut gen = 0.0;
                    for g in 0..g_bus.len() {
                        if g_on[g] && isl.contains(&g_bus[g]) {
                            gen += g_p[g];
                        }
                    }
                    if tie_on && tie_bus.is_some_and(|b| isl.contains(&b)) {
                        gen += s.imported_power;
                    }
                    let sr = reserve(&isl, &|_| false);
                    targets.push((isl, load - gen - sr));
                }
            }
            Event::BuildingLoss(id) => {
                let members: Vec<usize> = (0..config.generators.len())
                    .filter(|&g| &config.generators[g].building == id)
                    .collect();
                if members.iter().all(|&g| !g_on[g]) {
                    continue;
                }
                for isl in &present {
                    if !members.iter().any(|&g| isl.contains(&g_bus[g])) {
                        continue;
                    }
                    let mut lost = 0.0;
                    for &g in &members {
                        if g_on[g] && isl.contains(&g_bus[g]) {
                            lost += g_p[g];
                        }
                    }
                    let survivors = reserve(isl, &|g| members.contains(&g));
                    targets.push((isl.clone(), lost - survivors));
                }
            }
            Event::GridBlackout(_) => {
                if !tie_on {
                    continue;
                }
                let tb = tie_bus.unwrap();
                for isl in &present {
                    if isl.contains(&tb) {
                        targets.push((isl.clone(), s.imported_power - reserve(isl, &|_| false)));
                    }
                }
            }
        }

        for (isl, pm) in targets {
            if pm.partial_cmp(&0.0) != Some(Ordering::Greater) {
                continue;
            }
            let mut cand: Vec<usize> = (0..config.loads.len())
                .filter(|&l| config.loads[l].sheddable && l_on[l] && isl.contains(&l_bus[l]))
                .collect();
            cand.sort_by(|&a, &b| {
                l_prio[a]
                    .cmp(&l_prio[b])
                    .then(l_p[b].partial_cmp(&l_p[a]).unwrap_or(Ordering::Equal))
                    .then(config.loads[a].id.as_str().cmp(config.loads[b].id.as_str()))
            });
            // all prefix sums, then the first one that clears the mismatch
            let mut prefix = vec![0.0];
            for &l in &cand {
                let last = *prefix.last().unwrap();
                prefix.push(last + l_p[l]);
            }
            let k = (1..prefix.len()).find(|&k| prefix[k] > pm);
            let take = k.unwrap_or(cand.len());
            for &l in &cand[..take] {
                out.rows[l][col] = true;
            }
            if k.is_none() {
                out.infeasible[col] = true;
            }
            out.sheds[col].push(OracleShed {
                pm,
                ps: prefix[take],
                ps_before_last: if take > 0 { prefix[take - 1] } else { 0.0 },
                feasible: k.is_some(),
            });
        }
    }
    out
}
