use antclust::colony::ColorAssignment;
use antclust::graph::{ColorId, DynamicGraph};
use antclust::metrics::{brute_force_optimum, cut_ratio};
use antclust::workloads::{
    gen_churn, gen_communities, gen_flocking, ChurnAction, ChurnSchedule, CommunitySpec, FlockSpec, ScheduledAction,
    VertexChurn, Workload,
};
use proptest::prelude::*;

fn replays(w: &Workload) -> DynamicGraph {
    let g = DynamicGraph::replay(&w.events).expect("stream replays cleanly");
    let mut live: Vec<_> = g.vertices().map(|v| v.id()).collect();
    live.sort_unstable();
    assert!(live.into_iter().eq(w.truth.keys().copied()), "truth covers exactly the live vertices");
    g
}

fn community_spec() -> impl Strategy<Value = CommunitySpec> {
    (1usize..8, 1usize..5, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..3.0, 0.0f64..3.0, any::<u64>()).prop_map(
        |(n, k, p_in, p_out, w_in, w_out, seed)| CommunitySpec {
            n_per_community: n,
            k,
            w_in,
            w_out,
            p_in,
            p_out,
            seed,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn community_streams_replay(spec in community_spec()) {
        let w = gen_communities(&spec).unwrap();
        replays(&w);
        prop_assert_eq!(&w, &gen_communities(&spec).unwrap());
    }

    #[test]
    fn churn_streams_replay(
        spec in community_spec(),
        merge_at in 1usize..30,
        grow in 1usize..5,
        rates in (0.0f64..3.0, 0.0f64..3.0),
        seed in any::<u64>(),
    ) {
        let base = gen_communities(&spec).unwrap().with_colors(2);
        let mut actions = vec![
            ScheduledAction { at: 35, action: ChurnAction::AddCommunity { size: grow } },
            ScheduledAction { at: 36, action: ChurnAction::AddColor(ColorId(2)) },
            ScheduledAction { at: 38, action: ChurnAction::RemoveColor(ColorId(0)) },
        ];
        if spec.k >= 2 {
            actions.push(ScheduledAction { at: merge_at, action: ChurnAction::Merge { a: 0, b: 1, p: 0.5 } });
            actions.push(ScheduledAction { at: merge_at + 3, action: ChurnAction::Split { a: 0, b: 1 } });
        }
        let schedule = ChurnSchedule {
            steps: 40,
            actions,
            churn: Some(VertexChurn { remove_rate: rates.0, add_rate: rates.1, from: 2, until: 40 }),
            seed,
        };
        let w = gen_churn(&base, &spec, &schedule).unwrap();
        prop_assert_eq!(w.tick_count(), 40);
        replays(&w);
        prop_assert_eq!(&w, &gen_churn(&base, &spec, &schedule).unwrap());
    }

    #[test]
    fn flocking_streams_replay(n in 1usize..25, predators in 0usize..3, spread in 0.05f64..1.0, seed in any::<u64>()) {
        let spec = FlockSpec { n_agents: n, predator_count: predators, spread, duration: 25, seed, ..FlockSpec::default() };
        let w = gen_flocking(&spec).unwrap();
        prop_assert_eq!(w.tick_count(), 25);
        replays(&w);
        prop_assert_eq!(&w, &gen_flocking(&spec).unwrap());
    }
}

/// Cut ratio of every balanced 2-partition of 8 vertices, by bitmask.
fn balanced_cuts(g: &DynamicGraph) -> Vec<(u32, f64)> {
    let mut ids: Vec<_> = g.vertices().map(|v| v.id()).collect();
    ids.sort_unstable();
    let total: f64 = g.edges().map(|e| e.weight()).sum();
    (0u32..1 << ids.len())
        .filter(|m| m.count_ones() as usize * 2 == ids.len())
        .map(|mask| {
            let side = |v| (mask >> ids.iter().position(|&x| x == v).unwrap()) & 1;
            let cut: f64 = g
                .edges()
                .filter(|e| {
                    let (u, v) = e.endpoints();
                    side(u) != side(v)
                })
                .map(|e| e.weight())
                .sum();
            (mask, cut / total)
        })
        .collect()
}

#[test]
fn planted_partition_is_the_cheapest_balanced_cut() {
    // Complete K4 communities: any other balanced split cuts at least three
    // unit edges, more than all 16 possible 0.1 inter-edges together.
    for seed in 0..20 {
        let spec = CommunitySpec {
            n_per_community: 4,
            k: 2,
            w_in: 1.0,
            w_out: 0.1,
            p_in: 1.0,
            p_out: 0.3,
            seed,
        };
        let w = gen_communities(&spec).unwrap();
        let mut g = replays(&w);
        g.add_color(ColorId(0)).unwrap();
        g.add_color(ColorId(1)).unwrap();
        let truth = ColorAssignment::from_colors(w.truth.iter().map(|(&v, &l)| (v, Some(ColorId(l as u64)))));
        let planted = cut_ratio(&g, &truth);
        for (mask, cut) in balanced_cuts(&g) {
            assert!(planted <= cut + 1e-15, "seed {seed}: mask {mask:#b} cuts {cut} < {planted}");
        }
        let opt = brute_force_optimum(&g, 2, 0.5).unwrap();
        assert!((opt.cut_ratio - planted).abs() < 1e-15, "seed {seed}");
        assert_eq!(opt.balance, 1.0);
    }
}
