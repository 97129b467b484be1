mod common;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use common::*;
use junction_core::controller::{parse_report, verdict_label, Label, UnparseablePolicy, Verdict};
use junction_core::layout::{default_layout, Movement};
use junction_core::oracle::{
    analyze, check_analysis, pairwise_conflict, priority_compare, rank_vehicles, render_report, OracleConfig,
};
use junction_core::promptkit::{build_bundle, split_dataset};
use junction_core::scenario::{
    describe_scenario, emit_scenario, parse_scenario, validate_vehicle, Scenario, VehicleRecord,
};
use proptest::prelude::*;
use regex::Regex;

fn scenario_of(records: &[VehicleRecord]) -> Scenario {
    Scenario::from_records(records, &default_layout()).expect("strategy yields valid records")
}

fn pair_strategy() -> impl Strategy<Value = (VehicleRecord, VehicleRecord)> {
    (arb_record(), arb_record()).prop_map(|(mut a, mut b)| {
        a.vehicle_id = "V1".into();
        b.vehicle_id = "V2".into();
        (a, b)
    })
}

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn conflict_is_symmetric((a, b) in pair_strategy(), window in 0.1f64..20.0) {
        let layout = default_layout();
        let (va, vb) = (validate_vehicle(&a, &layout).unwrap(), validate_vehicle(&b, &layout).unwrap());
        let c = OracleConfig { time_window_s: window, ..OracleConfig::default() };
        prop_assert_eq!(pairwise_conflict(&va, &vb, &c), pairwise_conflict(&vb, &va, &c));
        prop_assert_eq!(pairwise_conflict(&va, &vb, &c), expected_conflict(&a, &b, window));
    }

    #[test]
    fn same_heading_never_conflicts(
        heading in 0usize..4, picks in any::<[prop::sample::Index; 4]>(), speed in 5.0f64..120.0, dist in 1.0f64..600.0,
    ) {
        let make = |id: &str, lane_pick: &prop::sample::Index, dest_pick: &prop::sample::Index| {
            let lanes: Vec<_> = LANE_TABLE.iter().filter(|(_, d, _)| *d == DIRECTIONS[heading]).collect();
            let (lane, dir, dests) = *lanes[lane_pick.index(lanes.len())];
            record(id, lane, speed, dist, dir, dests[dest_pick.index(dests.len())])
        };
        let layout = default_layout();
        let va = validate_vehicle(&make("V1", &picks[0], &picks[1]), &layout).unwrap();
        let vb = validate_vehicle(&make("V2", &picks[2], &picks[3]), &layout).unwrap();
        let wide = OracleConfig { time_window_s: 1e9, ..OracleConfig::default() };
        prop_assert!(!pairwise_conflict(&va, &vb, &wide));
    }

    #[test]
    fn opposite_non_left_pairs_never_conflict(
        heading in 0usize..4, right_a in any::<bool>(), right_b in any::<bool>(),
        (sa, da, sb, db) in (5.0f64..120.0, 1.0f64..600.0, 5.0f64..120.0, 1.0f64..600.0),
    ) {
        // odd lanes carry through (first) and right (second) traffic
        let make = |id: &str, h: usize, right: bool, speed: f64, dist: f64| {
            let (lane, dir, dests) = LANE_TABLE[2 * h];
            record(id, lane, speed, dist, dir, dests[usize::from(right)])
        };
        let layout = default_layout();
        let va = validate_vehicle(&make("V1", heading, right_a, sa, da), &layout).unwrap();
        let vb = validate_vehicle(&make("V2", (heading + 2) % 4, right_b, sb, db), &layout).unwrap();
        prop_assert_ne!(va.movement(), Movement::Left);
        prop_assert_ne!(vb.movement(), Movement::Left);
        let wide = OracleConfig { time_window_s: 1e9, ..OracleConfig::default() };
        prop_assert!(!pairwise_conflict(&va, &vb, &wide));
    }

    #[test]
    fn ranks_form_a_permutation_and_leader_never_waits(records in arb_records(10)) {
        let s = scenario_of(&records);
        let a = analyze(&s, &OracleConfig::default());
        prop_assert!(check_analysis(&a).is_ok());
        let mut ranks: Vec<usize> = a.priority_order.values().copied().collect();
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (1..=s.len()).collect::<Vec<_>>());
        let leader = a.priority_order.iter().find(|(_, &r)| r == 1).unwrap().0;
        prop_assert_eq!(a.waiting_times[leader], 0);
    }

    #[test]
    fn report_round_trip(records in arb_records(10)) {
        let a = analyze(&scenario_of(&records), &OracleConfig::default());
        let r = parse_report(&render_report(&a));
        prop_assert_eq!(r.verdict, if a.has_conflict() { Verdict::Yes } else { Verdict::No });
        let want: Vec<(String, String)> =
            a.conflict_vehicles.iter().map(|p| (p.vehicle1_id.clone(), p.vehicle2_id.clone())).collect();
        prop_assert_eq!(&r.pairs, &want);
        prop_assert_eq!(r.priorities.len(), a.priority_order.len());
        for (id, &rank) in &a.priority_order {
            prop_assert_eq!(r.priorities.get(id).copied(), Some(rank as u32));
        }
        prop_assert_eq!(r.waits.len(), a.waiting_times.len());
        for (id, &w) in &a.waiting_times {
            prop_assert_eq!(r.waits.get(id).copied(), Some(w as f64));
        }
        prop_assert_eq!(r.decisions, a.decisions);
    }

    #[test]
    fn scenario_json_round_trip(records in arb_records(12)) {
        let layout = default_layout();
        let s = scenario_of(&records);
        let text = emit_scenario(&s);
        let back = parse_scenario(&text, &layout).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(emit_scenario(&back), text);
    }

    #[test]
    fn conflict_set_matches_hand_predicate(records in arb_records(8)) {
        let a = analyze(&scenario_of(&records), &OracleConfig::default());
        let mut want = BTreeSet::new();
        for i in 0..records.len() {
            for j in i + 1..records.len() {
                if expected_conflict(&records[i], &records[j], 5.0) {
                    want.insert((records[i].vehicle_id.clone(), records[j].vehicle_id.clone()));
                }
            }
        }
        let got: BTreeSet<(String, String)> = a
            .conflict_vehicles
            .iter()
            .map(|p| {
                let (x, y) = (p.vehicle1_id.clone(), p.vehicle2_id.clone());
                let pos = |id: &str| records.iter().position(|r| r.vehicle_id == id).unwrap();
                if pos(&x) < pos(&y) { (x, y) } else { (y, x) }
            })
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn waits_follow_clearance_schedule(records in arb_records(8)) {
        let c = OracleConfig::default();
        let a = analyze(&scenario_of(&records), &c);
        // replay the schedule by hand in rank order
        let mut by_rank: Vec<&VehicleRecord> = records.iter().collect();
        by_rank.sort_by_key(|r| a.priority_order[&r.vehicle_id]);
        let mut entered: Vec<(&VehicleRecord, f64)> = Vec::new();
        for r in by_rank {
            let t = arrival_s(r.speed, r.distance_to_intersection);
            let e = entered
                .iter()
                .filter(|(u, _)| expected_conflict(u, r, c.time_window_s))
                .map(|(_, eu)| eu + c.clearance_gap_s)
                .fold(t, f64::max);
            let wait = (e - t + 0.5).floor() as u64;
            prop_assert_eq!(a.waiting_times[&r.vehicle_id], wait, "{}", r.vehicle_id);
            entered.push((r, e));
        }
    }

    #[test]
    fn comparator_is_antisymmetric_and_total((a, b) in pair_strategy(), eps in 0.0f64..3.0) {
        let layout = default_layout();
        let (va, vb) = (validate_vehicle(&a, &layout).unwrap(), validate_vehicle(&b, &layout).unwrap());
        let c = OracleConfig { tie_epsilon_s: eps, ..OracleConfig::default() };
        let ab = priority_compare(&va, &vb, &c);
        prop_assert_ne!(ab, Ordering::Equal);
        prop_assert_eq!(ab, priority_compare(&vb, &va, &c).reverse());
        prop_assert_eq!(priority_compare(&va, &va, &c), Ordering::Equal);
    }

    #[test]
    fn well_separated_arrivals_rank_by_time(records in arb_records(8)) {
        let c = OracleConfig::default();
        let t: Vec<f64> = records.iter().map(|r| arrival_s(r.speed, r.distance_to_intersection)).collect();
        let separated = (0..t.len()).all(|i| (0..i).all(|j| (t[i] - t[j]).abs() > c.tie_epsilon_s));
        prop_assume!(separated);
        let s = scenario_of(&records);
        let v = s.vehicles();
        // transitivity on every triple
        for x in v { for y in v { for z in v {
            if priority_compare(x, y, &c) == Ordering::Less && priority_compare(y, z, &c) == Ordering::Less {
                prop_assert_eq!(priority_compare(x, z, &c), Ordering::Less);
            }
        }}}
        let mut by_time: Vec<usize> = (0..t.len()).collect();
        by_time.sort_by(|&i, &j| t[i].total_cmp(&t[j]));
        prop_assert_eq!(rank_vehicles(v, &c), by_time);
    }

    #[test]
    fn arrival_is_monotone(speed in 1.0f64..200.0, dist in 1.0f64..1000.0, k in 1.0001f64..5.0) {
        let layout = default_layout();
        let base = validate_vehicle(&record("V1", 1, speed, dist, "north", "F"), &layout).unwrap().arrival_time();
        let faster = validate_vehicle(&record("V1", 1, speed * k, dist, "north", "F"), &layout).unwrap().arrival_time();
        let farther = validate_vehicle(&record("V1", 1, speed, dist * k, "north", "F"), &layout).unwrap().arrival_time();
        prop_assert!(faster < base);
        prop_assert!(farther > base);
        prop_assert!((base - arrival_s(speed, dist)).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn description_recovers_fields(records in arb_records(6)) {
        let s = scenario_of(&records);
        let re = Regex::new(
            r"Vehicle (V\d+) is in lane (\d), moving (north|east|south|west) at a speed of (\d+\.\d{2}) km/h, and is (\d+\.\d{2}) meters away from the intersection, heading towards ([A-H])\.",
        ).unwrap();
        let text = describe_scenario(&s);
        let caps: Vec<_> = re.captures_iter(&text).collect();
        prop_assert_eq!(caps.len(), records.len());
        for (c, r) in caps.iter().zip(&records) {
            prop_assert_eq!(&c[1], r.vehicle_id.as_str());
            prop_assert_eq!(&c[2], r.lane.to_string());
            prop_assert_eq!(&c[3], r.direction.as_str());
            prop_assert_eq!(&c[4], format!("{:.2}", r.speed));
            prop_assert_eq!(&c[5], format!("{:.2}", r.distance_to_intersection));
            prop_assert_eq!(&c[6], r.destination.as_str());
        }
    }

    #[test]
    fn bundle_truth_is_the_rendered_oracle(records in arb_records(8)) {
        let layout = default_layout();
        let c = OracleConfig::default();
        let s = scenario_of(&records);
        let a = analyze(&s, &c);
        let bundle = build_bundle(&s, &layout, &c);
        prop_assert_eq!(&bundle.expected_text, &render_report(&a));
        prop_assert_eq!(&bundle.user_text, &describe_scenario(&s));
        let label = verdict_label(&parse_report(&bundle.expected_text), UnparseablePolicy::Exclude);
        prop_assert_eq!(label, Some(if a.has_conflict() { Label::Positive } else { Label::Negative }));
    }

    #[test]
    fn split_partitions_and_is_seeded(n in 1usize..400, seed in any::<u64>()) {
        let items: Vec<usize> = (0..n).collect();
        let s = split_dataset(items.clone(), (0.7, 0.1, 0.2), seed).unwrap();
        prop_assert_eq!(s.train.len() + s.validation.len() + s.test.len(), n);
        prop_assert_eq!(s.validation.len(), (n as f64 * 0.1).round() as usize);
        prop_assert_eq!(s.test.len(), (n as f64 * 0.2).round() as usize);
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, items.clone());
        let again = split_dataset(items, (0.7, 0.1, 0.2), seed).unwrap();
        prop_assert_eq!(again.train, s.train);
    }
}
