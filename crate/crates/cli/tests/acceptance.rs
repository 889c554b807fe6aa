//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --release -p leo-hjb-cli --test acceptance`.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use leo_hjb::orbital::{angular_momentum, elements, energy};
use leo_hjb::{rk4_step, CartesianState, Control, GravConstant, PolarState, Scheme, Trajectory};
use leo_hjb_cli::{export, simulate, solve, ProblemConfig, SolutionArchive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MU: GravConstant = GravConstant::EARTH;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(counts: [usize; 4], extra: &str) -> ProblemConfig {
    let text = format!("[grid]\ncounts = [{}, {}, {}, {}]\n{extra}", counts[0], counts[1], counts[2], counts[3]);
    ProblemConfig::parse(&text).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// (a, e, omega, theta*) from position and velocity via the eccentricity vector.
fn cartesian_oracle(c: &CartesianState, mu: f64) -> [f64; 4] {
    let r = c.y1.hypot(c.y2);
    let v2 = c.v1 * c.v1 + c.v2 * c.v2;
    let rv = c.y1 * c.v1 + c.y2 * c.v2;
    let ex = ((v2 - mu / r) * c.y1 - rv * c.v1) / mu;
    let ey = ((v2 - mu / r) * c.y2 - rv * c.v2) / mu;
    let a = 1.0 / (2.0 / r - v2 / mu);
    [a, ex.hypot(ey), ey.atan2(ex), (ex * c.y2 - ey * c.y1).atan2(ex * c.y1 + ey * c.y2)]
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 4];
    for _ in 0..1000 {
        let s = PolarState::new(
            rng.gen_range(6930.0..=7070.0),
            rng.gen_range(0.0..TAU),
            rng.gen_range(-0.01..=0.01),
            rng.gen_range(7.526..=7.566),
        );
        let el = elements(&s, MU).unwrap();
        let [a, e, omega, nu] = cartesian_oracle(&s.to_cartesian(), MU.mu());
        worst[0] = worst[0].max(((el.a - a) / a).abs());
        worst[1] = worst[1].max((el.e - e).abs());
        worst[2] = worst[2].max(angle_gap(el.omega, omega));
        worst[3] = worst[3].max(angle_gap(el.theta_star, nu));
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-9),
        format!("worst a rel {:.1e}, e {:.1e}, omega {:.1e}, theta* {:.1e}", worst[0], worst[1], worst[2], worst[3]),
    )
}

fn criterion_2() -> Outcome {
    let scheme = config([20, 8, 8, 8], "").scheme().unwrap();
    let n = scheme.grid().len();
    let gamma = scheme.discount();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut ordered, mut worst_ratio) = (true, 0.0f64);
    for _ in 0..100 {
        let f1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1e6)).collect();
        let f2: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1e6)).collect();
        let upper: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a.max(*b)).collect();
        let b1 = scheme.apply(&f1).unwrap().0;
        let b2 = scheme.apply(&f2).unwrap().0;
        let bu = scheme.apply(&upper).unwrap().0;
        ordered &= b1.iter().zip(&bu).all(|(a, b)| a <= b) && b2.iter().zip(&bu).all(|(a, b)| a <= b);
        worst_ratio = worst_ratio.max(sup_diff(&b1, &b2) / sup_diff(&f1, &f2));
    }
    // Last-bit rounding of the interpolation sums is the only slack.
    let contracting = worst_ratio <= gamma * (1.0 + 1e-12);
    outcome(
        ordered && contracting,
        format!("monotone {ordered}, worst ratio {worst_ratio:.12} vs factor {gamma:.12}"),
    )
}

fn criterion_3() -> Outcome {
    let scheme = config([20, 8, 8, 8], "").scheme().unwrap();
    let t = Instant::now();
    let vi = scheme.value_iteration(None).unwrap();
    let t_vi = t.elapsed();
    let t = Instant::now();
    let pi = scheme.policy_iteration(None, None).unwrap();
    let t_pi = t.elapsed();
    let gap = sup_diff(&vi.values, &pi.values);
    outcome(
        gap < 1e-6 && 10 * pi.iterations <= vi.iterations,
        format!(
            "sup gap {gap:.2e}, PI {} evaluations ({t_pi:.1?}), VI {} sweeps ({t_vi:.1?})",
            pi.iterations, vi.iterations
        ),
    )
}

/// Largest change of the scheme value one tabulation step away from `c`.
fn tabulation_step_cost(scheme: &Scheme, j: usize, field: &[f64], c: usize) -> f64 {
    if c == 0 {
        return 0.0;
    }
    let angles = scheme.controls().len() - 1;
    let next = if c == angles { 1 } else { c + 1 };
    let back = if c == 1 { angles } else { c - 1 };
    let here = scheme.bellman_rhs(j, field, c);
    (scheme.bellman_rhs(j, field, next) - here).abs().max((scheme.bellman_rhs(j, field, back) - here).abs())
}

fn criterion_4() -> Outcome {
    let scheme = config([60, 16, 16, 16], "").scheme().unwrap();
    let n = scheme.grid().len();
    let initial = vec![0u32; n];
    let (v0, _) = scheme.solve_evaluation(&scheme.assemble_evaluation(&initial).unwrap(), &vec![0.0; n]).unwrap();
    let (policy, _) = scheme.improve_policy(&v0, &initial, true).unwrap();
    let (v1, _) = scheme.solve_evaluation(&scheme.assemble_evaluation(&policy).unwrap(), &v0).unwrap();

    let t = Instant::now();
    let (walked, _) = scheme.improve_policy(&v1, &policy, false).unwrap();
    let t_walk = t.elapsed();
    let t = Instant::now();
    let (exhaustive, _) = scheme.improve_policy(&v1, &policy, true).unwrap();
    let t_scan = t.elapsed();

    let mut matches = 0;
    let mut beyond = 0;
    let mut worst_excess = 0.0f64;
    for j in 0..n {
        if walked[j] == exhaustive[j] {
            matches += 1;
            continue;
        }
        let w = scheme.bellman_rhs(j, &v1, walked[j] as usize);
        let e = scheme.bellman_rhs(j, &v1, exhaustive[j] as usize);
        let allowance = tabulation_step_cost(&scheme, j, &v1, exhaustive[j] as usize);
        if w - e > allowance {
            beyond += 1;
            worst_excess = worst_excess.max(w - e - allowance);
        }
    }
    let share = matches as f64 / n as f64;
    outcome(
        share >= 0.99 && beyond == 0,
        format!(
            "walk matches exhaustive at {:.3}% of {n} nodes, {beyond} nodes worse by more than one step (excess {worst_excess:.2e}); walk {t_walk:.1?}, scan {t_scan:.1?}",
            100.0 * share
        ),
    )
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), |v| format!("{v:.4}"))
}

fn criterion_5(archive: &SolutionArchive) -> (Outcome, Trajectory) {
    let (traj, m) = simulate(archive, false).unwrap();
    let target = archive.config.problem.target.a_bar;
    let stays = m.band_entry.is_some_and(|t0| {
        traj.times.iter().zip(&traj.elements).filter(|(t, _)| **t >= t0).all(|(_, el)| el.is_some_and(|el| (el.a - target).abs() < 1.0))
    });
    let a_end = elements(&traj.final_state, MU).map(|e| e.a).unwrap_or(f64::NAN);
    let thrusting = traj.controls.iter().filter(|c| !c.is_null()).count();
    let a = m.band_entry.is_some() && stays;
    let b = m.switch_off.is_some() && !traj.exited;
    let c = m.final_radius_error.is_some_and(|e| e <= 1.0);
    let detail = format!(
        "(a) {} band entry {} s, (b) {} switch-off {} s, (c) {} final |a - 7000| {} km; final a {a_end:.3} km, thrust on {}/{} intervals, exited {}",
        if a { "ok" } else { "missed" },
        fmt(m.band_entry),
        if b { "ok" } else { "missed" },
        fmt(m.switch_off),
        if c { "ok" } else { "missed" },
        fmt(m.final_radius_error),
        thrusting,
        traj.len(),
        traj.exited,
    );
    (outcome(a && b && c, detail), traj)
}

fn reactivations_after(traj: &Trajectory, t0: f64) -> usize {
    (1..traj.len())
        .filter(|&k| traj.times[k - 1] >= t0 && traj.controls[k - 1].is_null() && !traj.controls[k].is_null())
        .count()
}

fn criterion_6(archive: &SolutionArchive, clean: &Trajectory) -> Outcome {
    let (dragged, m) = simulate(archive, true).unwrap();
    let Some(t0) = m.first_switch_off else {
        let thrusting = dragged.controls.iter().filter(|c| !c.is_null()).count();
        return outcome(
            false,
            format!(
                "drag run never switches off (thrust on {thrusting}/{} intervals), so no reactivation window exists",
                dragged.len()
            ),
        );
    };
    let (with_drag, without) = (reactivations_after(&dragged, t0), reactivations_after(clean, t0));
    outcome(
        with_drag >= 1 && without == 0,
        format!("window from {t0:.0} s: {with_drag} reactivations with drag, {without} without"),
    )
}

/// Largest relative drift of energy and angular momentum over one period of
/// RK4 coasting at 1 s steps.
fn coasting_drift(s0: PolarState) -> (usize, f64, f64) {
    let a = elements(&s0, MU).unwrap().a;
    let steps = (TAU * (a.powi(3) / MU.mu()).sqrt()).ceil() as usize;
    let (e0, h0) = (energy(&s0, MU), angular_momentum(&s0));
    let (mut s, mut de, mut dh) = (s0, 0.0f64, 0.0f64);
    for _ in 0..steps {
        s = rk4_step(&s, &Control::NULL, 1.0, MU, None).unwrap();
        de = de.max(((energy(&s, MU) - e0) / e0).abs());
        dh = dh.max(((angular_momentum(&s) - h0) / h0).abs());
    }
    (steps, de, dh)
}

fn criterion_7() -> Outcome {
    let (steps, de, dh) = coasting_drift(PolarState::circular(6978.0, 0.0, MU));
    // Not part of the criterion: the same check on an eccentric orbit at the crown edge.
    let edge = PolarState::new(6978.0, 0.0, 0.01, PolarState::circular(6978.0, 0.0, MU).v_theta);
    let (_, ee, eh) = coasting_drift(edge);
    outcome(
        de <= 1e-10 && dh <= 1e-10,
        format!("{steps} steps, max relative drift E {de:.1e}, h {dh:.1e} (eccentric v_rho = 0.01: E {ee:.1e}, h {eh:.1e})"),
    )
}

fn csv_bytes(traj: &Trajectory) -> Vec<u8> {
    let mut buf = Vec::new();
    export::write_csv(traj, &mut buf).unwrap();
    buf
}

fn criterion_8() -> Outcome {
    let cfg = config([20, 8, 8, 8], "[plant]\nhorizon = 50000.0\n");
    let solved = solve(&cfg, None).unwrap();
    let direct = csv_bytes(&simulate(&solved, false).unwrap().0);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solution.bin");
    solved.save(&path).unwrap();
    let loaded = SolutionArchive::load(&path).unwrap();
    let reloaded = csv_bytes(&simulate(&loaded, false).unwrap().0);

    let csv = dir.path().join("trajectory.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_leo-hjb"))
        .args(["simulate", "--archive", path.to_str().unwrap(), "--out", csv.to_str().unwrap()])
        .output()
        .unwrap()
        .status;
    let from_cli = std::fs::read(&csv).unwrap_or_default();

    let same_archive = loaded.values.iter().zip(&solved.values).all(|(a, b)| a.to_bits() == b.to_bits())
        && loaded.policy == solved.policy;
    outcome(
        same_archive && direct == reloaded && status.success() && direct == from_cli,
        format!(
            "{} CSV bytes; archive bitwise {same_archive}, reloaded equal {}, command line equal {}",
            direct.len(),
            direct == reloaded,
            direct == from_cli
        ),
    )
}

fn guarded<T>(f: impl FnOnce() -> T) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).map_err(|e| {
        e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
    })
}

fn report(id: &str, name: &str, started: Instant, result: Result<Outcome, String>) -> bool {
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(panic) => (false, format!("panicked: {panic}")),
    };
    println!(
        "criterion {id} {name}: {} ({:.1?}) {detail}",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed()
    );
    pass
}

fn main() -> ExitCode {
    let mut all = true;
    let mut run = |id: &str, name: &str, f: fn() -> Outcome| {
        let t = Instant::now();
        all &= report(id, name, t, guarded(f));
    };
    run("1", "element oracle", criterion_1);
    run("2", "monotone contraction", criterion_2);
    run("3", "engine cross-validation", criterion_3);
    run("4", "warm-start walk", criterion_4);

    let t = Instant::now();
    let solved = guarded(|| solve(&config([60, 16, 16, 16], ""), None).unwrap());
    let solve_time = t.elapsed();
    match solved {
        Ok(archive) => {
            println!(
                "solved (60,16,16,16) in {solve_time:.1?}: {} evaluations, residual {:.1e}",
                archive.report.iterations, archive.report.residual
            );
            let t = Instant::now();
            let first = guarded(|| criterion_5(&archive));
            let clean = first.as_ref().ok().map(|(_, traj)| traj.clone());
            all &= report("5", "desk-scale transfer", t, first.map(|(o, _)| o));
            let t = Instant::now();
            let second = match clean {
                Some(traj) => guarded(|| criterion_6(&archive, &traj)),
                None => Err("no drag-free run to compare against".into()),
            };
            all &= report("6", "drag reactivation", t, second);
        }
        Err(e) => {
            all &= report("5", "desk-scale transfer", t, Err(e.clone()));
            all &= report("6", "drag reactivation", t, Err(e));
        }
    }

    let mut run = |id: &str, name: &str, f: fn() -> Outcome| {
        let t = Instant::now();
        all &= report(id, name, t, guarded(f));
    };
    run("7", "coasting conservation", criterion_7);
    run("8", "persistence determinism", criterion_8);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
