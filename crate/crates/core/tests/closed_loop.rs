use leo_hjb::{metrics, simulate, CrownGrid, Feedback, PlantConfig, PolarState, Problem, Scheme, SolverConfig};

fn fuel_for(alpha: f64) -> f64 {
    let grid = CrownGrid::crown((6930.0, 7070.0), (-0.01, 0.01), (7.526, 7.566), [10, 6, 6, 6]).unwrap();
    let mut problem = Problem::leo_example();
    problem.weights.alpha = alpha;
    let scheme = Scheme::new(grid, problem, SolverConfig::default()).unwrap();
    let sol = scheme.policy_iteration(None, None).unwrap();
    let fb = Feedback::new(&scheme, &sol.values, 10.0).unwrap();
    let s0 = PolarState::circular(6978.0, 0.0, problem.mu);
    let plant = PlantConfig { horizon: 2e4, ..PlantConfig::default() };
    let traj = simulate(&fb, &s0, &plant).unwrap();
    metrics(&traj, &problem.target, 1.0, problem.mu).fuel
}

#[test]
fn costlier_thrust_never_burns_more() {
    let cheap = fuel_for(2.04e-8);
    let dear = fuel_for(2.04e2);
    assert!(dear <= cheap, "{dear} > {cheap}");
    assert!(cheap > 0.0);
}
