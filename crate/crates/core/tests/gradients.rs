mod common;

use std::time::Instant;

use supplykg::model::{loss_and_gradients, optimizer_step, AdamConfig, OptimizerState};

#[test]
fn analytic_gradients_match_central_differences() {
    let start = Instant::now();
    for seed in [1, 2, 3] {
        let (params, block) = common::gradient_fixture(seed);
        let (err, at) = common::max_gradient_error(&params, &block, 1e-5, 1e-6);
        assert!(err < 1e-4, "seed {seed}: relative error {err:e} at {at}");
    }
    assert!(start.elapsed().as_secs() < 30 * 3);
}

#[test]
fn unreachable_embedding_rows_get_zero_gradient() {
    let (params, block) = common::gradient_fixture(4);
    let (_, grads) = loss_and_gradients(&params, &block).unwrap();
    for (id, row) in grads.embeddings.rows().into_iter().enumerate() {
        if !block.nodes.contains(&(id as u32)) {
            assert!(row.iter().all(|&g| g == 0.0), "row {id}");
        }
    }
}

#[test]
fn fifty_steps_reduce_training_loss() {
    let (mut params, block) = common::gradient_fixture(5);
    let mut state = OptimizerState::new(&params, AdamConfig { learning_rate: 0.01, ..AdamConfig::default() });
    let (initial, _) = loss_and_gradients(&params, &block).unwrap();
    for _ in 0..50 {
        let (_, grads) = loss_and_gradients(&params, &block).unwrap();
        assert!(optimizer_step(&mut params, &grads, &mut state).unwrap());
    }
    let (after, _) = loss_and_gradients(&params, &block).unwrap();
    assert!(after < initial, "{after} >= {initial}");
    assert_eq!(state.step, 50);
}

#[test]
fn identical_runs_follow_identical_trajectories() {
    let run = || {
        let (mut params, block) = common::gradient_fixture(6);
        let mut state = OptimizerState::new(&params, AdamConfig::default());
        for _ in 0..10 {
            let (_, grads) = loss_and_gradients(&params, &block).unwrap();
            optimizer_step(&mut params, &grads, &mut state).unwrap();
        }
        params
    };
    assert_eq!(run(), run());
}
