//! Invariants of the shedding matrix and detection over random plants.

mod common;

use common::{
    islands, oracle_matrix, random_config, random_snapshot, SeedableRng, TestRng, Values,
};
use fls_core::edsa::detect;
use fls_core::grid_model::{enumerate_events, BreakerState, Event};
use fls_core::io::csv::{read_matrix, write_matrix};
use fls_core::lse::{build_shedding_matrix, ColumnStatus};
use proptest::prelude::*;

fn draw(
    seed: u64,
    float: bool,
) -> (
    fls_core::grid_model::GridConfig,
    fls_core::grid_model::NetworkSnapshot,
) {
    let mut rng = TestRng::seed_from_u64(seed);
    let c = random_config(&mut rng);
    let s = random_snapshot(
        &mut rng,
        &c,
        if float { Values::Float } else { Values::HalfMw },
    );
    (c, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_oracle(seed in any::<u64>(), float in any::<bool>()) {
        let (c, s) = draw(seed, float);
        let catalog = enumerate_events(&c);
        let m = build_shedding_matrix(&c, &s, &catalog).unwrap();
        prop_assert_eq!(m.rows(), oracle_matrix(&c, &s, &catalog).rows);
    }

    #[test]
    fn only_live_sheddable_loads_are_marked(seed in any::<u64>()) {
        let (c, s) = draw(seed, false);
        let m = build_shedding_matrix(&c, &s, &enumerate_events(&c)).unwrap();
        for (r, load) in c.loads.iter().enumerate() {
            let allowed = load.sheddable && s.load_closed(&load.id);
            for col in 0..m.n_cols() {
                prop_assert!(allowed || !m.get(r, col), "{} marked in column {}", load.id, col);
            }
        }
    }

    #[test]
    fn open_targets_give_empty_columns(seed in any::<u64>()) {
        let (c, s) = draw(seed, false);
        let m = build_shedding_matrix(&c, &s, &enumerate_events(&c)).unwrap();
        for col in 0..m.n_cols() {
            let open = match m.catalog().get(col).unwrap() {
                Event::GeneratorTrip(g) => !s.generator_closed(g),
                Event::BustieOpen(t) => !s.bustie_closed(t),
                Event::GridBlackout(_) => !s.tie_closed(),
                Event::BuildingLoss(b) => c
                    .generators
                    .iter()
                    .filter(|g| &g.building == b)
                    .all(|g| !s.generator_closed(&g.id)),
            };
            if open {
                prop_assert_eq!(&m.column_info(col).status, &ColumnStatus::TargetOpen);
                prop_assert!(m.column(col).iter().all(|&x| !x));
            }
        }
    }

    #[test]
    fn trip_column_stays_in_host_island(seed in any::<u64>()) {
        let (c, s) = draw(seed, false);
        let m = build_shedding_matrix(&c, &s, &enumerate_events(&c)).unwrap();
        let closed: Vec<bool> = c.busties.iter().map(|t| s.bustie_closed(&t.id)).collect();
        let isl = islands(&c, &closed, None);
        let bus = |id| c.busbar_index(id).unwrap();
        for (col, e) in m.catalog().events().iter().enumerate() {
            let Event::GeneratorTrip(g) = e else { continue };
            let host = isl.iter().find(|i| i.contains(&bus(&c.generator(g).unwrap().busbar))).unwrap();
            for (r, load) in c.loads.iter().enumerate() {
                prop_assert!(!m.get(r, col) || host.contains(&bus(&load.busbar)));
            }
        }
    }

    /// More output from the tripped unit never sheds less.
    #[test]
    fn shed_power_grows_with_lost_generation(seed in any::<u64>(), extra in 0u32..20) {
        let (c, s) = draw(seed, false);
        let Some(g) = c.generators.iter().find(|g| s.generator_closed(&g.id)) else { return Ok(()) };
        let catalog = enumerate_events(&c);
        let col = catalog.index_of(&Event::GeneratorTrip(g.id.clone())).unwrap();
        let mut more = s.clone();
        more.generators.get_mut(&g.id).unwrap().power += 0.5 * f64::from(extra);
        let a = build_shedding_matrix(&c, &s, &catalog).unwrap();
        let b = build_shedding_matrix(&c, &more, &catalog).unwrap();
        let shed = |m: &fls_core::lse::SheddingMatrix| m.column_info(col).selection.power_shed();
        prop_assert!(shed(&b) >= shed(&a));
    }

    #[test]
    fn matrix_csv_round_trips(seed in any::<u64>()) {
        let (c, s) = draw(seed, true);
        let m = build_shedding_matrix(&c, &s, &enumerate_events(&c)).unwrap();
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        let t = read_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(t.rows, m.rows());
        prop_assert_eq!(t.labels, m.catalog().labels());
        let ids: Vec<String> = c.loads.iter().map(|l| l.id.to_string()).collect();
        prop_assert_eq!(t.loads, ids);
    }

    #[test]
    fn nothing_detected_without_openings(seed in any::<u64>(), close_all in any::<bool>()) {
        let (c, s) = draw(seed, false);
        let catalog = enumerate_events(&c);
        prop_assert!(detect(&c, &catalog, &s, &s).is_empty());
        // closing breakers is never an event either
        let mut next = s.clone();
        if close_all {
            for b in next.busties.values_mut() {
                *b = BreakerState::Closed;
            }
        }
        prop_assert!(detect(&c, &catalog, &s, &next).is_empty());
    }
}
