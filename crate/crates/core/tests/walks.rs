use growth_bounds::enumeration::{count_walks, is_submultiplicative};
use growth_bounds::lattice::{Direction, LatticeId};
use growth_bounds::walk_rules::{
    build_config_table, is_allowed, noncrossing_check, Path, RuleChecker, RuleId, VertexChordConfig, WalkRule,
};
use num_bigint::BigUint;
use proptest::prelude::*;

const PLANAR: [LatticeId; 2] = [LatticeId::Square, LatticeId::Triangular];

fn rule(id: RuleId, lat: LatticeId) -> WalkRule {
    WalkRule::new(id, lat).unwrap()
}

/// Visit every step sequence of length 1..=n_max.
fn for_all_paths(kappa: u8, n_max: usize, mut f: impl FnMut(&[u8])) {
    let mut steps = vec![0u8];
    loop {
        f(&steps);
        if steps.len() < n_max {
            steps.push(0);
            continue;
        }
        while let Some(last) = steps.pop() {
            if last + 1 < kappa {
                steps.push(last + 1);
                break;
            }
        }
        if steps.is_empty() {
            return;
        }
    }
}

#[test]
fn rule_hierarchy_on_all_short_paths() {
    for lat in PLANAR {
        let chain: Vec<RuleChecker> = [RuleId::Naw, RuleId::Saw, RuleId::Odw, RuleId::Sow, RuleId::Eaw, RuleId::Nrw]
            .into_iter()
            .map(|id| RuleChecker::new(rule(id, lat)).unwrap())
            .collect();
        let mut checked = 0u64;
        for_all_paths(lat.coordination() as u8, 8, |steps| {
            let verdicts: Vec<bool> = chain.iter().map(|c| c.allowed(steps)).collect();
            for w in verdicts.windows(2) {
                assert!(!w[0] || w[1], "{lat}: {steps:?} breaks the hierarchy: {verdicts:?}");
            }
            checked += 1;
        });
        let kappa = lat.coordination() as u64;
        assert_eq!(checked, (1..=8).map(|i| kappa.pow(i)).sum::<u64>());
    }
}

#[test]
fn rule_hierarchy_on_counts() {
    let n = 10;
    let counts = |id| count_walks(rule(id, LatticeId::Square), n).unwrap();
    let chain: Vec<Vec<BigUint>> = [RuleId::Naw, RuleId::Saw, RuleId::Odw, RuleId::Sow, RuleId::Eaw, RuleId::Nrw]
        .into_iter()
        .map(counts)
        .collect();
    for w in chain.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
    }
    for (i, c) in chain[5].iter().enumerate() {
        assert_eq!(*c, BigUint::from(4u32) * BigUint::from(3u32).pow(i as u32));
    }
    // the published SAW counts
    let saw: Vec<u64> = vec![4, 12, 36, 100, 284, 780, 2172, 5916, 16268, 44100];
    assert_eq!(chain[1], saw.into_iter().map(BigUint::from).collect::<Vec<_>>());
}

#[test]
fn counts_are_submultiplicative_and_deterministic() {
    for lat in PLANAR {
        for id in [RuleId::Saw, RuleId::Sow, RuleId::Odw, RuleId::Eaw] {
            let n = if lat == LatticeId::Square { 12 } else { 8 };
            let c = count_walks(rule(id, lat), n).unwrap();
            assert!(is_submultiplicative(&c), "{id} on {lat}");
            assert_eq!(c, count_walks(rule(id, lat), n).unwrap());
        }
    }
}

/// All sets of chords (no stubs) on `kappa` directions.
fn chord_configs(kappa: u8) -> Vec<VertexChordConfig> {
    fn rec(free: &[u8], cur: &mut Vec<(u8, u8)>, out: &mut Vec<VertexChordConfig>) {
        out.push(VertexChordConfig {
            chords: cur.clone(),
            stubs: vec![],
        });
        for i in 0..free.len() {
            for j in i + 1..free.len() {
                // keep chords sorted by first element to avoid repeats
                if cur.last().is_some_and(|&(a, _)| a > free[i]) {
                    continue;
                }
                let rest: Vec<u8> = free.iter().copied().filter(|&x| x != free[i] && x != free[j]).collect();
                cur.push((free[i], free[j]));
                rec(&rest, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&(0..kappa).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

#[test]
fn sow_table_is_exactly_the_noncrossing_chord_sets() {
    for lat in PLANAR {
        let table = build_config_table(rule(RuleId::Sow, lat)).unwrap();
        let configs = chord_configs(lat.coordination() as u8);
        // partial matchings on 4 and 6 points
        assert_eq!(configs.len(), if lat == LatticeId::Square { 10 } else { 76 });
        for cfg in &configs {
            assert_eq!(table.contains(cfg), noncrossing_check(cfg, lat), "{lat}: {cfg:?}");
        }
    }
}

#[test]
fn odw_tables() {
    let sq_odw = build_config_table(rule(RuleId::Odw, LatticeId::Square)).unwrap();
    let sq_sow = build_config_table(rule(RuleId::Sow, LatticeId::Square)).unwrap();
    assert_eq!(sq_odw.configs(), sq_sow.configs());

    let tr_odw = build_config_table(rule(RuleId::Odw, LatticeId::Triangular)).unwrap();
    let tr_sow = build_config_table(rule(RuleId::Sow, LatticeId::Triangular)).unwrap();
    assert!(tr_odw.configs().iter().all(|c| tr_sow.contains(c)));
    assert!(tr_odw.len() < tr_sow.len());
}

#[test]
fn tables_are_closed_under_symmetry_and_truncation() {
    for (id, lat) in [
        (RuleId::Saw, LatticeId::Square),
        (RuleId::Sow, LatticeId::Square),
        (RuleId::Lwalk, LatticeId::Square),
        (RuleId::Saw, LatticeId::Triangular),
        (RuleId::Sow, LatticeId::Triangular),
        (RuleId::Odw, LatticeId::Triangular),
    ] {
        let table = build_config_table(rule(id, lat)).unwrap();
        assert!(table.contains(&VertexChordConfig::empty()));
        let group = lat.symmetry_group();
        for cfg in table.configs() {
            for op in &group {
                let img = VertexChordConfig {
                    chords: cfg
                        .chords
                        .iter()
                        .map(|&(a, b)| (op.apply(Direction(a)).0, op.apply(Direction(b)).0))
                        .collect(),
                    stubs: cfg.stubs.iter().map(|&s| op.apply(Direction(s)).0).collect(),
                };
                assert!(table.contains(&img), "{id} {lat}: image of {cfg:?}");
            }
            for i in 0..cfg.chords.len() {
                let (a, b) = cfg.chords[i];
                let mut without = cfg.clone();
                without.chords.remove(i);
                assert!(table.contains(&without));
                for s in [a, b] {
                    let mut cut = without.clone();
                    cut.stubs.push(s);
                    assert!(table.contains(&cut), "{id} {lat}: truncating {cfg:?}");
                }
            }
        }
    }
}

#[test]
fn incremental_agrees_with_whole_path() {
    for (id, lat) in RuleId::ALL
        .iter()
        .flat_map(|&id| PLANAR.map(|lat| (id, lat)))
        .filter(|&(id, lat)| WalkRule::new(id, lat).is_ok())
    {
        let checker = RuleChecker::new(rule(id, lat)).unwrap();
        let kappa = lat.coordination() as u8;
        let mut state = checker.state(8);
        let mut compared = 0u64;
        fn dfs(
            state: &mut growth_bounds::walk_rules::WalkState,
            checker: &RuleChecker,
            kappa: u8,
            depth: usize,
            compared: &mut u64,
        ) {
            if depth == 8 {
                return;
            }
            for d in 0..kappa {
                let mut ext = state.steps().to_vec();
                ext.push(d);
                let ok = state.try_push(Direction(d));
                assert_eq!(ok, checker.allowed(&ext), "{} {:?}", checker.rule(), ext);
                *compared += 1;
                if ok {
                    dfs(state, checker, kappa, depth + 1, compared);
                    state.pop();
                }
            }
        }
        dfs(&mut state, &checker, kappa, 0, &mut compared);
        assert!(compared > 0, "{id} {lat}");
    }
}

proptest! {
    #[test]
    fn public_predicate_matches_checker(steps in prop::collection::vec(0u8..6, 1..14), tri in any::<bool>()) {
        let lat = if tri { LatticeId::Triangular } else { LatticeId::Square };
        let steps: Vec<u8> = steps.into_iter().map(|s| s % lat.coordination() as u8).collect();
        for id in [RuleId::Saw, RuleId::Sow, RuleId::Naw, RuleId::Eaw] {
            let r = rule(id, lat);
            let p = Path::from_indices(lat, &steps);
            prop_assert_eq!(is_allowed(r, &p).unwrap(), RuleChecker::new(r).unwrap().allowed(&steps));
        }
    }
}
