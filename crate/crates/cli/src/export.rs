//! CSV trajectory export: one row per feedback interval.

use std::io::{Read, Write};
use std::path::Path;

use leo_hjb::{PolarState, Trajectory};
use serde::Deserialize;

use crate::CliError;

pub const HEADER: [&str; 10] = ["t", "rho", "theta", "v_rho", "v_theta", "u_bar", "phi", "a", "e", "omega"];

/// One exported sample. Elements are empty where undefined.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Row {
    pub t: f64,
    pub rho: f64,
    pub theta: f64,
    pub v_rho: f64,
    pub v_theta: f64,
    pub u_bar: f64,
    pub phi: f64,
    pub a: Option<f64>,
    pub e: Option<f64>,
    pub omega: Option<f64>,
}

impl Row {
    pub fn state(&self) -> PolarState {
        PolarState { rho: self.rho, theta: self.theta, v_rho: self.v_rho, v_theta: self.v_theta }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(traj: &Trajectory, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for i in 0..traj.len() {
        let s = &traj.states[i];
        let c = &traj.controls[i];
        let (a, e, omega) = match &traj.elements[i] {
            Some(el) => (num(el.a), num(el.e), num(el.omega)),
            None => (String::new(), String::new(), String::new()),
        };
        w.write_record([
            num(traj.times[i]),
            num(s.rho),
            num(s.theta),
            num(s.v_rho),
            num(s.v_theta),
            num(c.u_bar()),
            num(c.phi()),
            a,
            e,
            omega,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Row>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().collect()
}

pub fn export(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(traj, std::io::BufWriter::new(file)).map_err(|e| CliError::Csv(path.display().to_string(), e))
}

pub fn import(path: &Path) -> Result<Vec<Row>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(std::io::BufReader::new(file)).map_err(|e| CliError::Csv(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use leo_hjb::orbital::elements;
    use leo_hjb::{Control, GravConstant};

    fn trajectory(n: usize) -> Trajectory {
        let mu = GravConstant::EARTH;
        let states: Vec<PolarState> =
            (0..n).map(|i| PolarState::new(6978.0 + i as f64 * 0.37, 0.1 * i as f64, 1e-4 * i as f64, 7.556)).collect();
        Trajectory {
            times: (0..n).map(|i| 10.0 * i as f64).collect(),
            controls: (0..n).map(|i| if i % 2 == 0 { Control::NULL } else { Control::thrust(5e-7, 1.3) }).collect(),
            elements: states.iter().map(|s| elements(s, mu).ok()).collect(),
            final_state: states[n - 1],
            states,
            exited: false,
            final_time: 10.0 * n as f64,
        }
    }

    #[test]
    fn single_sample_has_header_and_one_row() {
        let mut buf = Vec::new();
        write_csv(&trajectory(1), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "t,rho,theta,v_rho,v_theta,u_bar,phi,a,e,omega");
    }

    #[test]
    fn round_trip_preserves_states() {
        let traj = trajectory(25);
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let rows = read_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 25);
        for (row, s) in rows.iter().zip(&traj.states) {
            let back = row.state();
            for (x, y) in [(back.rho, s.rho), (back.theta, s.theta), (back.v_rho, s.v_rho), (back.v_theta, s.v_theta)] {
                assert!((x - y).abs() <= 1e-12 * y.abs());
            }
            let el = elements(&back, GravConstant::EARTH).unwrap();
            assert!((row.a.unwrap() - el.a).abs() <= 1e-12 * el.a);
            assert!((row.e.unwrap() - el.e).abs() <= 1e-12);
        }
        assert!(rows.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(rows[1].u_bar, 5e-7);
    }

    #[test]
    fn undefined_elements_are_blank() {
        let mut traj = trajectory(2);
        traj.elements[1] = None;
        let mut buf = Vec::new();
        write_csv(&traj, &mut buf).unwrap();
        let rows = read_csv(buf.as_slice()).unwrap();
        assert_eq!(rows[1].a, None);
        assert!(String::from_utf8(buf).unwrap().lines().nth(2).unwrap().ends_with(",,,"));
    }
}
