//! Running a scenario: integration, diagnostics, and the files written for
//! each run (trajectory CSV, `_diag.csv`, `meta.json`, `scenario.toml`).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ball::{self, BallWithVertical};
use crate::disk::{self, DiskSystem};
use crate::error::{Result, SimError};
use crate::integrate::{integrate, Stats, Trajectory};
use crate::scenario::{Model, Scenario};
use crate::so3::Vec3;

pub const OUT_ENV: &str = "ROLLSIM_OUT";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Integrated samples for a scenario. For the ball the stored states carry
/// three extra trailing components: the separately integrated vertical.
pub struct RunResult {
    pub model: Model,
    pub trajectory: Trajectory,
    pub wall_time: f64,
}

impl RunResult {
    /// Sample `k` restricted to the system's own state.
    pub fn state(&self, k: usize) -> &[f64] {
        let x = self.trajectory.state(k);
        match &self.model {
            Model::Ball { params, .. } => &x[..params.dim()],
            _ => x,
        }
    }
}

pub fn simulate(sc: &Scenario) -> Result<RunResult> {
    let model = sc.build()?;
    let cfg = sc.integrator.config();
    let span = (sc.tspan[0], sc.tspan[1]);
    let n = sc.output.samples;
    let start = Instant::now();
    let trajectory = match &model {
        Model::Ball { params, x0 } => {
            let mut x = x0.clone();
            let gam = ball::frame_vars(params, span.0, x0)?.vertical;
            x.extend_from_slice(gam.as_slice());
            integrate(&BallWithVertical { params }, &x, span, &cfg, n)?
        }
        Model::Disk { params, x0, .. } => integrate(&DiskSystem { params }, x0, span, &cfg, n)?,
        Model::RigidBody { body, x0 } => integrate(body, x0, span, &cfg, n)?,
        Model::HeavyTop { top, x0 } => integrate(top, x0, span, &cfg, n)?,
        Model::Suslov { body, x0 } => integrate(body, x0, span, &cfg, n)?,
    };
    Ok(RunResult { model, trajectory, wall_time: start.elapsed().as_secs_f64() })
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn state_columns(model: &Model) -> Vec<String> {
    let mut c = vec!["t".to_string()];
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    match model {
        Model::Ball { params, .. } => {
            c.extend(numbered("theta", params.n()));
            c.extend(numbered("thetadot", params.n()));
            c.extend(s(&["q0", "q1", "q2", "q3", "Om1", "Om2", "Om3", "z1", "z2"]));
        }
        Model::Disk { params, .. } => {
            c.extend(numbered("theta", params.n()));
            c.extend(numbered("thetadot", params.n()));
            c.extend(s(&["phi", "phidot", "z"]));
        }
        Model::RigidBody { .. } => c.extend(s(&["Om1", "Om2", "Om3", "q0", "q1", "q2", "q3"])),
        Model::HeavyTop { .. } => c.extend(s(&["Om1", "Om2", "Om3", "Gam1", "Gam2", "Gam3"])),
        Model::Suslov { .. } => c.extend(s(&["Om1", "Om2", "Om3"])),
    }
    c
}

/// Rows of the trajectory CSV, including the leading time column.
pub fn state_rows(run: &RunResult) -> Vec<Vec<f64>> {
    let tr = &run.trajectory;
    (0..tr.len())
        .map(|k| {
            let mut row = vec![tr.times[k]];
            row.extend_from_slice(run.state(k));
            if let Model::Disk { params, x0, z0 } = &run.model {
                let phi = row[1 + 2 * params.n()];
                row.push(disk::gc_position(*z0, x0[2 * params.n()], phi, params.radius));
            }
            row
        })
        .collect()
}

pub struct Diagnostics {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Diagnostics {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn push_xyz(cols: &mut Vec<String>, stem: &str, axes: &[&str]) {
    for a in axes {
        cols.push(format!("{stem}_{a}"));
    }
}

pub fn diagnostics(run: &RunResult) -> Result<Diagnostics> {
    let tr = &run.trajectory;
    let mut columns: Vec<String> = vec!["t".into()];
    let mut rows = Vec::with_capacity(tr.len());
    match &run.model {
        Model::Ball { params, .. } => {
            let n = params.n();
            for c in ["T", "V", "E", "q_norm_sq_minus_1", "gamma_norm_sq_minus_1", "gamma_drift", "dae_residual_max"] {
                columns.push(c.into());
            }
            for i in 0..=n {
                push_xyz(&mut columns, &format!("m{i}_body"), &["x", "y", "z"]);
                push_xyz(&mut columns, &format!("m{i}_spatial"), &["x", "y", "z"]);
            }
            push_xyz(&mut columns, "cm_body", &["x", "y", "z"]);
            push_xyz(&mut columns, "cm_spatial", &["x", "y", "z"]);
            columns.push("gc_x".into());
            columns.push("gc_y".into());
            let d = params.dim();
            for k in 0..tr.len() {
                let t = tr.times[k];
                let full = tr.state(k);
                let x = &full[..d];
                let e = ball::energy(params, t, x);
                let q = &x[2 * n..2 * n + 4];
                let qn = q.iter().map(|v| v * v).sum::<f64>() - 1.0;
                let gi = Vec3::new(full[d], full[d + 1], full[d + 2]);
                let gq = ball::frame_vars(params, t, x)?.vertical;
                let u = params.controls(t);
                let mut f = vec![0.0; d];
                ball::rhs_ode(params, t, x, &u, &mut f)?;
                let res = ball::dae_residual(params, t, x, &f, &u)?;
                let rmax = res.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                let mut row =
                    vec![t, e.kinetic, e.potential, e.total(), qn, gi.norm_squared() - 1.0, (gi - gq).amax(), rmax];
                let mp = ball::mass_positions(params, x);
                for i in 0..=n {
                    row.extend_from_slice(mp.body[i].as_slice());
                    row.extend_from_slice(mp.spatial[i].as_slice());
                }
                row.extend_from_slice(mp.cm_body.as_slice());
                row.extend_from_slice(mp.cm_spatial.as_slice());
                row.push(x[d - 2]);
                row.push(x[d - 1]);
                rows.push(row);
            }
        }
        Model::Disk { params, x0, z0 } => {
            let n = params.n();
            for c in ["T", "V", "E"] {
                columns.push(c.into());
            }
            for i in 0..=n {
                push_xyz(&mut columns, &format!("m{i}_body"), &["x", "z"]);
                push_xyz(&mut columns, &format!("m{i}_spatial"), &["x", "z"]);
            }
            push_xyz(&mut columns, "cm_body", &["x", "z"]);
            push_xyz(&mut columns, "cm_spatial", &["x", "z"]);
            columns.push("gc_x".into());
            for k in 0..tr.len() {
                let x = tr.state(k);
                let e = disk::energy(params, x);
                let mut row = vec![tr.times[k], e.kinetic, e.potential, e.total()];
                let mp = disk::mass_positions(params, x);
                for i in 0..=n {
                    row.extend_from_slice(&mp.body[i]);
                    row.extend_from_slice(&mp.spatial[i]);
                }
                row.extend_from_slice(&mp.cm_body);
                row.extend_from_slice(&mp.cm_spatial);
                row.push(disk::gc_position(*z0, x0[2 * n], x[2 * n], params.radius));
                rows.push(row);
            }
        }
        Model::RigidBody { body, .. } => {
            for c in ["E", "momentum_norm_sq", "L_spatial_1", "L_spatial_2", "L_spatial_3", "q_norm_sq_minus_1"] {
                columns.push(c.into());
            }
            for k in 0..tr.len() {
                let x = tr.state(k);
                let l = body.momentum_spatial(x);
                let qn = x[3..7].iter().map(|v| v * v).sum::<f64>() - 1.0;
                rows.push(vec![tr.times[k], body.energy(x), body.momentum_body(x).norm_squared(), l.x, l.y, l.z, qn]);
            }
        }
        Model::HeavyTop { top, .. } => {
            for c in ["E", "vertical_momentum", "axial_momentum", "gamma_norm_sq_minus_1"] {
                columns.push(c.into());
            }
            for k in 0..tr.len() {
                let x = tr.state(k);
                let g2 = x[3] * x[3] + x[4] * x[4] + x[5] * x[5] - 1.0;
                rows.push(vec![tr.times[k], top.energy(x), top.vertical_momentum(x), top.axial_momentum(x), g2]);
            }
        }
        Model::Suslov { body, .. } => {
            for c in ["E", "constraint", "lambda"] {
                columns.push(c.into());
            }
            for k in 0..tr.len() {
                let t = tr.times[k];
                let x = tr.state(k);
                let (_, lambda) = body.rates(t, &Vec3::new(x[0], x[1], x[2]));
                rows.push(vec![t, body.energy(x), body.constraint(t, x), lambda]);
            }
        }
    }
    Ok(Diagnostics { columns, rows })
}

pub fn write_csv(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{}", columns.join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub scenario_hash: String,
    pub tool_version: String,
    pub system: String,
    pub method: String,
    pub atol: f64,
    pub rtol: f64,
    pub samples: usize,
    pub tspan: [f64; 2],
    pub stats: Stats,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_q_norm: Option<f64>,
    pub trajectory_csv: String,
    pub diagnostics_csv: String,
    pub scenario_file: String,
}

/// Output root: explicit argument, then the environment override, then `runs`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("runs"),
    }
}

/// Integrate and write all run files into `root/<scenario name>/`.
pub fn run_to_dir(sc: &Scenario, root: &Path) -> Result<RunRecord> {
    let run = simulate(sc)?;
    let dir = root.join(&sc.name);
    std::fs::create_dir_all(&dir).map_err(|e| SimError::Io(format!("{}: {e}", dir.display())))?;
    let traj = dir.join(format!("{}.csv", sc.name));
    let diag_path = dir.join(format!("{}_diag.csv", sc.name));
    write_csv(&traj, &state_columns(&run.model), &state_rows(&run))?;
    let diag = diagnostics(&run)?;
    write_csv(&diag_path, &diag.columns, &diag.rows)?;
    let scen_path = dir.join("scenario.toml");
    std::fs::write(&scen_path, sc.to_toml()?)?;

    let final_q_norm = match &run.model {
        Model::Ball { params, .. } => {
            let x = run.state(run.trajectory.len() - 1);
            let o = params.layout().q();
            Some(x[o..o + 4].iter().map(|v| v * v).sum::<f64>().sqrt())
        }
        _ => None,
    };
    let rec = RunRecord {
        scenario: sc.name.clone(),
        scenario_hash: sc.hash(),
        tool_version: TOOL_VERSION.to_string(),
        system: sc.system.name().to_string(),
        method: sc.integrator.method.name().to_string(),
        atol: sc.integrator.atol,
        rtol: sc.integrator.rtol,
        samples: sc.output.samples,
        tspan: sc.tspan,
        stats: run.trajectory.stats,
        wall_time_s: run.wall_time,
        final_q_norm,
        trajectory_csv: traj.display().to_string(),
        diagnostics_csv: diag_path.display().to_string(),
        scenario_file: scen_path.display().to_string(),
    };
    let meta = serde_json::to_string_pretty(&rec).map_err(|e| SimError::Io(e.to_string()))?;
    std::fs::write(dir.join("meta.json"), meta)?;
    Ok(rec)
}

/// Per-sample comparison of the planar equation against the torque-balance
/// reference along the disk trajectory: `(t, variational, newton)`.
pub fn disk_oracle_table(sc: &Scenario) -> Result<Vec<(f64, f64, f64)>> {
    let run = simulate(sc)?;
    let Model::Disk { params, .. } = &run.model else {
        return Err(SimError::Precondition("the torque-balance comparison needs a disk scenario".into()));
    };
    if !disk::is_newton_eligible(params) {
        disk::newton_oracle(params, 0.0, run.model.initial_state(), 0.0)?;
    }
    let tr = &run.trajectory;
    (0..tr.len())
        .map(|k| {
            let t = tr.times[k];
            let x = tr.state(k);
            let u = params.controls(t);
            let a = disk::phi_ddot(params, t, x, &u);
            let b = disk::newton_oracle(params, t, x, u[0])?;
            Ok((t, a, b))
        })
        .collect()
}
