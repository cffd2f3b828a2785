use mibn_core::{
    batch_run, empirical_transition, BooleanState, InitialCondition, InteractionGraph, LindbladModel, ModelSpec,
    QubitMeasurement, TrajectoryConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(model: ModelSpec, start: &str, steps: usize) -> TrajectoryConfig {
    TrajectoryConfig {
        model,
        measurement: QubitMeasurement::from_angles(0.5, 0.2),
        tau: 1.0,
        steps,
        initial: InitialCondition::Bits(start.parse().unwrap()),
        seed: 0,
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = config(ModelSpec::Lindblad(LindbladModel::amplitude_damping(2, 0.7).unwrap()), "11", 40);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| batch_run(&cfg, 64, 1234).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn consensus_trajectories_keep_their_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 2..=4 {
        let g = InteractionGraph::random_connected(n, &mut rng).unwrap();
        for start in BooleanState::all(n) {
            let mut cfg = config(ModelSpec::Consensus(g.clone()), "0", 30);
            cfg.initial = InitialCondition::Bits(start.clone());
            for rec in batch_run(&cfg, 8, start.index() as u64).unwrap() {
                assert!(rec.outcomes.iter().all(|s| s.weight() == start.weight()));
            }
        }
    }
}

#[test]
fn single_edge_swap_frequency() {
    let g = InteractionGraph::path(2, 1.0).unwrap();
    let cfg = config(ModelSpec::Consensus(g), "01", 100);
    let records = batch_run(&cfg, 100, 77).unwrap();
    let e = empirical_transition(&records, 2).unwrap();
    let from = "01".parse::<BooleanState>().unwrap().index();
    let to = "10".parse::<BooleanState>().unwrap().index();
    let p = (1.0 - (-2.0f64).exp()) / 2.0;
    let visits = e.visits(from) as f64;
    let se = (p * (1.0 - p) / visits).sqrt();
    assert!((e.frequency(from, to).unwrap() - p).abs() <= 3.0 * se);
}
