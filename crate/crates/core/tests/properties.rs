use proptest::prelude::*;
use vervaat_core::path::{
    argmin_first, concatenate, detect_split, last_exit_below, running_min, time_reverse, vervaat_transform,
    SuffixMinima,
};
use vervaat_core::samplers::crossing::{bridge_hit_probability, first_touch_time, last_exit_time};
use vervaat_core::samplers::{vervaat_shifted, RngStreamSpec, Transform};
use vervaat_core::verify::bonferroni;
use vervaat_core::{PathGrid, SplitKind};

fn path(max_len: usize) -> impl Strategy<Value = PathGrid> {
    (0.1f64..5.0, prop::collection::vec(-3.0f64..3.0, 2..max_len)).prop_map(|(t, mut v)| {
        v[0] = 0.0;
        PathGrid::new(t, v).unwrap()
    })
}

proptest! {
    #[test]
    fn grid_transform_bounds_and_end(p in path(64)) {
        let v = vervaat_transform(&p);
        prop_assert_eq!(v.n_steps(), p.n_steps());
        prop_assert_eq!(v.start(), 0.0);
        prop_assert_eq!(v.end(), p.end());
        // after the wrap the path sits above its end value
        let floor = p.end().min(0.0) - 1e-12;
        prop_assert!(v.values().iter().all(|&x| x >= floor));
        let wrap = p.n_steps() - argmin_first(&p);
        prop_assert!(v.values()[..=wrap].iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn grid_transform_permutes_increments(p in path(64)) {
        let v = vervaat_transform(&p);
        let inc = |q: &PathGrid| {
            let mut d: Vec<f64> = q.values().windows(2).map(|w| w[1] - w[0]).collect();
            d.sort_by(f64::total_cmp);
            d
        };
        for (a, b) in inc(&p).iter().zip(inc(&v)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn transform_is_idempotent(p in path(64)) {
        let v = vervaat_transform(&p);
        let w = vervaat_transform(&v);
        for (a, b) in v.values().iter().zip(w.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_min_transform_bounds(p in path(64), seed in any::<u64>()) {
        let mut rng = RngStreamSpec::new(seed, 0).rng();
        let s = vervaat_shifted(&p, Transform::BridgeMin, &mut rng);
        prop_assert!(s.offset > 0.0 && s.offset <= p.dt() * (1.0 + 1e-12));
        prop_assert!(s.wrap_index < p.n_steps());
        prop_assert_eq!(s.path.end(), p.end());
        prop_assert!(s.path.values()[..=s.wrap_index].iter().all(|&x| x >= 0.0));
        let floor = p.end().min(0.0);
        prop_assert!(s.path.values().iter().all(|&x| x >= floor));
    }

    #[test]
    fn time_reverse_is_an_involution(p in path(64)) {
        prop_assert_eq!(time_reverse(&time_reverse(&p)), p);
    }

    #[test]
    fn running_min_is_monotone_and_below(p in path(64)) {
        let m = running_min(&p);
        for (w, (&mv, &pv)) in m.values().windows(2).zip(m.values().iter().zip(p.values())) {
            prop_assert!(w[1] <= w[0]);
            prop_assert!(mv <= pv);
        }
        prop_assert_eq!(m.end(), p.min());
    }

    #[test]
    fn last_exit_is_monotone_in_level(p in path(64), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let k = p.n_steps();
        prop_assert!(last_exit_below(&p, lo, k) <= last_exit_below(&p, hi, k));
    }

    #[test]
    fn suffix_minima_agree_with_scan(p in path(48), level in -3.0f64..3.0) {
        let s = SuffixMinima::from_prefix(p.values());
        let scan = p.values().iter().rposition(|&v| v <= level);
        prop_assert_eq!(s.last_exit(level), scan);
    }

    #[test]
    fn concatenation_adds_lengths(a in path(32), b in path(32)) {
        let b = PathGrid::new(a.dt() * b.n_steps() as f64, b.values().iter().map(|x| x + a.end()).collect()).unwrap();
        let c = concatenate(&a, &b).unwrap();
        prop_assert_eq!(c.n_steps(), a.n_steps() + b.n_steps());
        prop_assert!((c.lifetime() - a.lifetime() - b.lifetime()).abs() < 1e-9);
        prop_assert_eq!(c.end(), b.end());
    }

    #[test]
    fn detected_splits_are_interior(p in path(64), level in 0.0f64..2.0) {
        if let Some(r) = detect_split(&p, SplitKind::T0Bm, 0.0).unwrap() {
            prop_assert!(r.split_index >= 1 && r.split_index < p.n_steps());
            prop_assert!(p.values()[r.split_index] <= 0.0);
        }
        if let Some(r) = detect_split(&p, SplitKind::ZhatPos, level).unwrap() {
            prop_assert!(r.split_index < p.n_steps());
            prop_assert!(p.values()[r.split_index] <= level);
        }
    }

    #[test]
    fn argmin_is_a_minimum(p in path(64)) {
        let k = argmin_first(&p);
        prop_assert_eq!(p.values()[k], p.min());
    }

    #[test]
    fn hit_probability_is_a_probability(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, h in 1e-4f64..2.0) {
        let q = bridge_hit_probability(a, b, c, h);
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert_eq!(q, bridge_hit_probability(b, a, c, h));
    }

    #[test]
    fn refined_crossings_bracket_node_crossings(p in path(64), level in -2.0f64..2.0, seed in any::<u64>()) {
        let mut rng = RngStreamSpec::new(seed, 1).rng();
        let (v, dt) = (p.values(), p.dt());
        let k = p.n_steps();
        // a refined first touch is never later than the first node at or below the level
        if let Some(j) = v.iter().position(|&x| x <= level) {
            let t = first_touch_time(v, dt, level, 0, &mut rng).unwrap();
            prop_assert!(t <= j as f64 * dt + 1e-12);
        }
        // a refined last exit is never earlier than the last node at or below it
        if let Some(j) = v.iter().rposition(|&x| x <= level) {
            let t = last_exit_time(v, dt, level, k, &mut rng);
            prop_assert!(t >= j as f64 * dt - 1e-12);
        }
    }

    #[test]
    fn bonferroni_stays_a_probability(p in 0.0f64..=1.0, m in 1usize..100) {
        let q = bonferroni(p, m);
        prop_assert!(q >= p && q <= 1.0);
    }
}
