use super::*;
use crate::dynamics::rk2_step;
use crate::grid::CrownGrid;
use crate::hjb::{running_cost, Problem, SolverConfig};
use crate::orbital::{angular_momentum, energy, state_from_elements};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scheme(counts: [usize; 4]) -> Scheme {
    let grid = CrownGrid::crown((6930.0, 7070.0), (-0.01, 0.01), (7.526, 7.566), counts).unwrap();
    Scheme::new(grid, Problem::leo_example(), SolverConfig::default()).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng) -> PolarState {
    PolarState::new(
        rng.gen_range(6935.0..7065.0),
        rng.gen_range(0.0..math::TAU),
        rng.gen_range(-0.009..0.009),
        rng.gen_range(7.53..7.56),
    )
}

#[test]
fn constant_value_function_coasts() {
    let s = scheme([6, 4, 4, 4]);
    let values = vec![42.0; s.grid().len()];
    let fb = Feedback::new(&s, &values, 10.0).unwrap();
    let p = s.problem();
    let on_target = state_from_elements(7000.0, 0.001, 0.0, 2.0, p.mu);
    let d = fb.decide(&on_target);
    assert!(!d.exited);
    assert!(d.control.is_null());
    assert_eq!(d.index, 0);
}

#[test]
fn decision_matches_independent_scan() {
    let s = scheme([8, 6, 6, 6]);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let values: Vec<f64> = (0..s.grid().len()).map(|_| rng.gen_range(0.0..1e4)).collect();
    let tau = 10.0;
    let fb = Feedback::new(&s, &values, tau).unwrap();
    let p = *s.problem();
    let g = libm::exp(-p.weights.lambda * tau);
    for _ in 0..50 {
        let y = random_state(&mut rng);
        let mut best = (f64::INFINITY, 0usize);
        for (i, c) in s.controls().iter().enumerate() {
            let l = running_cost(&y, c, &p.target, &p.weights, p.mu).unwrap();
            let z = rk2_step(&y, c, tau, p.mu).unwrap();
            let q = tau * l + g * s.grid().interpolate(&values, &z, s.penalty());
            if q < best.0 {
                best = (q, i);
            }
        }
        assert_eq!(fb.decide(&y).index, best.1);
    }
}

#[test]
fn decision_ignores_constant_shift() {
    let s = scheme([8, 6, 6, 6]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let values: Vec<f64> = (0..s.grid().len()).map(|_| rng.gen_range(0.0..1e3)).collect();
    let shifted: Vec<f64> = values.iter().map(|v| v + 250.0).collect();
    let a = Feedback::new(&s, &values, 10.0).unwrap();
    let b = Feedback::new(&s, &shifted, 10.0).unwrap();
    for _ in 0..50 {
        let y = random_state(&mut rng);
        assert_eq!(a.decide(&y).index, b.decide(&y).index);
    }
}

#[test]
fn outside_state_is_flagged() {
    let s = scheme([6, 4, 4, 4]);
    let values = vec![0.0; s.grid().len()];
    let fb = Feedback::new(&s, &values, 10.0).unwrap();
    let d = fb.decide(&PolarState::circular(7100.0, 0.0, s.problem().mu));
    assert!(d.exited);
    assert!(d.control.is_null());
}

#[test]
fn coasting_run_keeps_circular_radius() {
    let s = scheme([6, 4, 4, 4]);
    let values = vec![1.0; s.grid().len()];
    let fb = Feedback::new(&s, &values, 10.0).unwrap();
    let mu = s.problem().mu;
    let s0 = PolarState::circular(7000.0, 0.0, mu);
    let plant = PlantConfig { horizon: 1e4, ..PlantConfig::default() };
    let traj = simulate(&fb, &s0, &plant).unwrap();
    assert!(!traj.exited);
    assert_eq!(traj.len(), 1000);
    assert!(traj.controls.iter().all(Control::is_null));
    for st in traj.states.iter().chain([&traj.final_state]) {
        assert!((st.rho - 7000.0).abs() < 1e-6);
    }
    let e0 = energy(&s0, mu);
    let h0 = angular_momentum(&s0);
    assert!(((energy(&traj.final_state, mu) - e0) / e0).abs() < 1e-8);
    assert!(((angular_momentum(&traj.final_state) - h0) / h0).abs() < 1e-8);
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn drag_dissipates_energy() {
    let s = scheme([6, 4, 4, 4]);
    let values = vec![1.0; s.grid().len()];
    let fb = Feedback::new(&s, &values, 10.0).unwrap();
    let mu = s.problem().mu;
    let s0 = PolarState::circular(7000.0, 0.0, mu);
    let clean = PlantConfig { horizon: 2e4, ..PlantConfig::default() };
    let draggy = PlantConfig { drag: Some(DragParams::LEO_EXAMPLE), ..clean };
    let a = simulate(&fb, &s0, &clean).unwrap();
    let b = simulate(&fb, &s0, &draggy).unwrap();
    let (ea, eb) = (energy(&a.final_state, mu), energy(&b.final_state, mu));
    assert!(eb < ea);
    // dE/dt = -C |v|^3 for a circular orbit, to first order.
    let v = s0.v_theta;
    let expected = -DragParams::LEO_EXAMPLE.coefficient_per_km() * v * v * v * 2e4;
    assert!(((eb - ea) - expected).abs() < 0.05 * expected.abs(), "{} vs {expected}", eb - ea);
}

#[test]
fn leaving_the_crown_truncates() {
    let s = scheme([6, 4, 4, 4]);
    let values = vec![1.0; s.grid().len()];
    let fb = Feedback::new(&s, &values, 10.0).unwrap();
    let s0 = PolarState::new(7069.0, 0.0, 0.009, 7.55);
    let traj = simulate(&fb, &s0, &PlantConfig::default()).unwrap();
    assert!(traj.exited);
    assert!(traj.final_time < 1e4);
    assert!(!s.grid().contains(&traj.final_state));
}

#[test]
fn runs_are_bitwise_reproducible() {
    let s = scheme([8, 6, 6, 6]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let values: Vec<f64> = (0..s.grid().len()).map(|_| rng.gen_range(0.0..1e3)).collect();
    let fb = Feedback::new(&s, &values, 10.0).unwrap();
    let s0 = PolarState::circular(6990.0, 0.0, s.problem().mu);
    let plant = PlantConfig { horizon: 5e3, drag: Some(DragParams::LEO_EXAMPLE), ..PlantConfig::default() };
    let a = simulate(&fb, &s0, &plant).unwrap();
    let b = simulate(&fb, &s0, &plant).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_plant_is_rejected() {
    let s = scheme([6, 4, 4, 4]);
    let values = vec![0.0; s.grid().len()];
    let fb = Feedback::new(&s, &values, 10.0).unwrap();
    let s0 = PolarState::circular(7000.0, 0.0, s.problem().mu);
    let plant = PlantConfig { step: 20.0, ..PlantConfig::default() };
    assert!(simulate(&fb, &s0, &plant).is_err());
    assert!(Feedback::new(&s, &values[1..], 10.0).is_err());
    assert!(Feedback::new(&s, &values, 0.0).is_err());
}

fn synthetic(controls: Vec<Control>, a: Vec<f64>, dt: f64) -> Trajectory {
    let mu = GravConstant::EARTH;
    let n = controls.len();
    let states: Vec<PolarState> = a.iter().map(|&a| PolarState::circular(a, 0.0, mu)).collect();
    Trajectory {
        times: (0..n).map(|i| i as f64 * dt).collect(),
        elements: states.iter().map(|s| orbital::elements(s, mu).ok()).collect(),
        final_state: *states.last().unwrap(),
        states,
        controls,
        exited: false,
        final_time: n as f64 * dt,
    }
}

#[test]
fn metrics_of_pure_coasting() {
    let target = Problem::leo_example().target;
    let traj = synthetic(vec![Control::NULL; 2000], vec![7000.0; 2000], 10.0);
    let m = metrics(&traj, &target, 1.0, GravConstant::EARTH);
    assert_eq!(m.switch_off, Some(0.0));
    assert_eq!(m.first_switch_off, Some(0.0));
    assert_eq!(m.band_entry, Some(0.0));
    assert_eq!(m.fuel, 0.0);
    assert_eq!(m.reactivations, 0);
    assert!(m.final_radius_error.unwrap() < 1e-9);
}

#[test]
fn metrics_of_constant_thrust() {
    let target = Problem::leo_example().target;
    let u = 5e-7;
    let traj = synthetic(vec![Control::thrust(u, 1.5); 1000], vec![6978.0; 1000], 10.0);
    let m = metrics(&traj, &target, 1.0, GravConstant::EARTH);
    assert_eq!(m.switch_off, None);
    assert_eq!(m.first_switch_off, None);
    assert_eq!(m.band_entry, None);
    assert!((m.fuel - u * 1e4).abs() < 1e-15);
    assert!((m.final_radius_error.unwrap() - 22.0).abs() < 1e-9);
}

#[test]
fn metrics_count_reactivations_after_long_coast() {
    let mu = GravConstant::EARTH;
    let target = Problem::leo_example().target;
    let period = target.period(mu);
    let dt = 10.0;
    let coast = (period / dt) as usize + 10;
    let on = Control::thrust(5e-7, 1.5);
    let mut controls = vec![on; 50];
    // A short gap before the long coast is not a switch-off.
    controls.extend(vec![Control::NULL; 20]);
    controls.extend(vec![on; 30]);
    controls.extend(vec![Control::NULL; coast]);
    controls.extend(vec![on; 5]);
    controls.extend(vec![Control::NULL; 40]);
    controls.extend(vec![on; 5]);
    controls.extend(vec![Control::NULL; 100]);
    let n = controls.len();
    let traj = synthetic(controls, vec![7000.2; n], dt);
    let m = metrics(&traj, &target, 1.0, mu);
    assert_eq!(m.first_switch_off, Some(100.0 * dt));
    assert_eq!(m.reactivations, 2);
    assert_eq!(m.switch_off, Some((n - 100) as f64 * dt));
    assert!(m.switch_off.unwrap() >= m.band_entry.unwrap());
}

#[test]
fn band_entry_needs_a_full_period_inside() {
    let mu = GravConstant::EARTH;
    let target = Problem::leo_example().target;
    let dt = 100.0;
    let per = (target.period(mu) / dt).ceil() as usize;
    // Dips into the band briefly, leaves, then settles.
    let mut a = vec![6990.0; 10];
    a.extend(vec![7000.5; per / 2]);
    a.extend(vec![6995.0; 10]);
    a.extend(vec![7000.3; 2 * per]);
    let n = a.len();
    let traj = synthetic(vec![Control::NULL; n], a, dt);
    let m = metrics(&traj, &target, 1.0, mu);
    assert_eq!(m.band_entry, Some((10 + per / 2 + 10) as f64 * dt));
}
