//! Solves the LEO orbit-raising problem on a small grid and flies the
//! resulting feedback from a circular 6978 km orbit, with and without drag.
//!
//! cargo run --release -p leo-hjb --example leo_transfer -- [n_rho n_theta n_vrho n_vtheta] [vi]

use std::time::Instant;

use leo_hjb::{metrics, simulate, CrownGrid, DragParams, Feedback, PlantConfig, PolarState, Problem, Scheme, SolverConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let counts: [usize; 4] = if args.len() >= 4 {
        [0, 1, 2, 3].map(|i| args[i].parse().expect("node count"))
    } else {
        [60, 16, 16, 16]
    };
    let use_vi = args.get(4).is_some_and(|a| a == "vi");
    let grid = CrownGrid::crown((6930.0, 7070.0), (-0.01, 0.01), (7.526, 7.566), counts).unwrap();
    let problem = Problem::leo_example();
    let scheme = Scheme::new(grid, problem, SolverConfig::default()).unwrap();
    println!("nodes {} penalty {:.4e}", grid.len(), scheme.penalty());

    let start = Instant::now();
    let sol = if use_vi { scheme.value_iteration(None) } else { scheme.policy_iteration(None, None) }.unwrap();
    println!(
        "iterations {} linear {} residual {:.3e} in {:.1?}",
        sol.iterations,
        sol.linear_iterations,
        sol.residual,
        start.elapsed()
    );
    let thrusting = sol.policy.iter().filter(|&&c| c != 0).count();
    println!("thrust nodes {:.1}%", 100.0 * thrusting as f64 / grid.len() as f64);

    let fb = Feedback::new(&scheme, &sol.values, 10.0).unwrap();
    let s0 = PolarState::circular(6978.0, 0.0, problem.mu);
    for drag in [None, Some(DragParams::LEO_EXAMPLE)] {
        let plant = PlantConfig { drag, ..PlantConfig::default() };
        let traj = simulate(&fb, &s0, &plant).unwrap();
        let m = metrics(&traj, &problem.target, 1.0, problem.mu);
        println!("drag {:?}: exited {} {:?}", drag.is_some(), traj.exited, m);
        let mut last = 0.0;
        for (i, t) in traj.times.iter().enumerate() {
            if *t >= last {
                let e = traj.elements[i].unwrap();
                println!("  t {:>8.0} rho {:.3} a {:.4} e {:.5} u {}", t, traj.states[i].rho, e.a, e.e, traj.controls[i].u_bar());
                last += 50_000.0;
            }
        }
    }
}
