//! Scenario files: system parameters, initial conditions, time span,
//! integrator settings and output options in TOML.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ball::{pack_state, BallParams, ExternalForce};
use crate::classic::{ConstraintAxis, HeavyTop, RigidBody, Suslov};
use crate::disk::DiskParams;
use crate::error::{Result, SimError};
use crate::integrate::{IntegratorConfig, Method};
use crate::rails::{AccelProfile, Rail};
use crate::so3::Vec3;

pub const DEFAULT_SAMPLES: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Ball,
    Disk,
    RigidBody,
    HeavyTop,
    Suslov,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Ball => "ball",
            SystemKind::Disk => "disk",
            SystemKind::RigidBody => "rigid_body",
            SystemKind::HeavyTop => "heavy_top",
            SystemKind::Suslov => "suslov",
        }
    }
}

fn one() -> f64 {
    1.0
}
fn tol() -> f64 {
    1e-10
}
fn h_min() -> f64 {
    1e-12
}
fn max_steps() -> usize {
    2_000_000
}
fn yes() -> bool {
    true
}
fn samples() -> usize {
    DEFAULT_SAMPLES
}
fn identity_q() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}
fn e1_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "tol")]
    pub atol: f64,
    #[serde(default = "tol")]
    pub rtol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_init: Option<f64>,
    #[serde(default = "h_min")]
    pub h_min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
    #[serde(default = "max_steps")]
    pub max_steps: usize,
    #[serde(default = "yes")]
    pub projection: bool,
    /// Fixed step for rk4 / implicit_trap; forces fixed steps for rk45.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            method: Method::Rk45,
            atol: tol(),
            rtol: tol(),
            h_init: None,
            h_min: h_min(),
            h_max: None,
            max_steps: max_steps(),
            projection: true,
            step: None,
        }
    }
}

impl IntegratorSpec {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            method: self.method,
            atol: self.atol,
            rtol: self.rtol,
            h_init: self.h_init,
            h_min: self.h_min,
            h_max: self.h_max.unwrap_or(f64::INFINITY),
            max_steps: self.max_steps,
            projection: self.projection,
            fixed_step: self.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "samples")]
    pub samples: usize,
    /// Not part of the scenario hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { samples: DEFAULT_SAMPLES, dir: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RailSpec {
    Point {
        position: [f64; 3],
    },
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
        /// Spherical (azimuth, elevation, length) of the direction at
        /// parameter zero. The circle is spanned by this direction and
        /// the third basis column.
        #[serde(default = "e1_axis")]
        axis: [f64; 3],
    },
}

impl RailSpec {
    fn build(&self) -> Result<Rail> {
        match self {
            RailSpec::Point { position } => Ok(Rail::StaticPoint(Vec3::from(*position))),
            RailSpec::Circle { radius, center, axis } => Rail::circle(*radius, Vec3::from(*center), *axis),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccelSpec {
    /// `[time, value]` pairs with increasing times.
    pub breakpoints: Vec<[f64; 2]>,
    #[serde(default = "one")]
    pub sign: f64,
}

impl AccelSpec {
    fn build(&self) -> Result<AccelProfile> {
        AccelProfile::new(self.breakpoints.iter().map(|p| (p[0], p[1])).collect(), self.sign)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceSpec {
    Constant([f64; 3]),
    /// Breakpoint tables for the three spatial components.
    Table([Vec<[f64; 2]>; 3]),
}

impl ForceSpec {
    fn build(&self) -> Result<ExternalForce> {
        match self {
            ForceSpec::Constant(f) => {
                if !f.iter().all(|c| c.is_finite()) {
                    return Err(SimError::Validation("external force must be finite".into()));
                }
                Ok(ExternalForce::Constant(Vec3::from(*f)))
            }
            ForceSpec::Table(c) => {
                let mk = |v: &Vec<[f64; 2]>| AccelProfile::new(v.iter().map(|p| (p[0], p[1])).collect(), 1.0);
                Ok(ExternalForce::Table([mk(&c[0])?, mk(&c[1])?, mk(&c[2])?]))
            }
        }
    }
}

fn build_force(f: &Option<ForceSpec>) -> Result<ExternalForce> {
    f.as_ref().map(|f| f.build()).unwrap_or(Ok(ExternalForce::zero()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallInitial {
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_dot: Option<Vec<f64>>,
    #[serde(default = "identity_q")]
    pub q: [f64; 4],
    #[serde(default)]
    pub omega: [f64; 3],
    #[serde(default)]
    pub z: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub masses: Vec<f64>,
    pub radius: f64,
    pub inertia: [f64; 3],
    #[serde(default = "one")]
    pub gravity: f64,
    #[serde(default)]
    pub cm_offset: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<ForceSpec>,
    #[serde(default)]
    pub rails: Vec<RailSpec>,
    #[serde(default)]
    pub accels: Vec<AccelSpec>,
    pub initial: BallInitial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskInitial {
    #[serde(default)]
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_dot: Option<Vec<f64>>,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub phi_dot: f64,
    #[serde(default)]
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub masses: Vec<f64>,
    pub radius: f64,
    pub inertia: f64,
    #[serde(default = "one")]
    pub gravity: f64,
    #[serde(default)]
    pub cm_offset: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<ForceSpec>,
    #[serde(default)]
    pub rails: Vec<RailSpec>,
    #[serde(default)]
    pub accels: Vec<AccelSpec>,
    pub initial: DiskInitial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidBodyInitial {
    pub omega: [f64; 3],
    #[serde(default = "identity_q")]
    pub q: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidBodySpec {
    pub inertia: [f64; 3],
    pub initial: RigidBodyInitial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeavyTopInitial {
    pub omega: [f64; 3],
    pub gamma: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeavyTopSpec {
    pub inertia: [f64; 3],
    pub mass: f64,
    #[serde(default = "one")]
    pub gravity: f64,
    pub cm: [f64; 3],
    pub initial: HeavyTopInitial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AxisSpec {
    Constant([f64; 3]),
    Slerp { from: [f64; 3], to: [f64; 3], t0: f64, t1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuslovInitial {
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuslovSpec {
    pub inertia: [f64; 3],
    pub axis: AxisSpec,
    pub initial: SuslovInitial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub system: SystemKind,
    pub tspan: [f64; 2],
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball: Option<BallSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk: Option<DiskSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigid_body: Option<RigidBodySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heavy_top: Option<HeavyTopSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suslov: Option<SuslovSpec>,
}

/// A scenario turned into concrete dynamics and an initial state.
#[derive(Debug, Clone)]
pub enum Model {
    Ball { params: BallParams, x0: Vec<f64> },
    Disk { params: DiskParams, x0: Vec<f64>, z0: f64 },
    RigidBody { body: RigidBody, x0: Vec<f64> },
    HeavyTop { top: HeavyTop, x0: Vec<f64> },
    Suslov { body: Suslov, x0: Vec<f64> },
}

impl Model {
    pub fn initial_state(&self) -> &[f64] {
        match self {
            Model::Ball { x0, .. }
            | Model::Disk { x0, .. }
            | Model::RigidBody { x0, .. }
            | Model::HeavyTop { x0, .. }
            | Model::Suslov { x0, .. } => x0,
        }
    }
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(SimError::Validation(format!("{what} has length {}, expected {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(SimError::Validation(format!("{what} must be finite")));
    }
    Ok(())
}

fn rails_and_accels(rails: &[RailSpec], accels: &[AccelSpec]) -> Result<(Vec<Rail>, Vec<AccelProfile>)> {
    if accels.len() != rails.len() {
        return Err(SimError::Validation(format!("{} rails but {} acceleration profiles", rails.len(), accels.len())));
    }
    let r = rails.iter().map(|r| r.build()).collect::<Result<Vec<_>>>()?;
    let a = accels.iter().map(|a| a.build()).collect::<Result<Vec<_>>>()?;
    Ok((r, a))
}

fn parse_error(e: toml::de::Error) -> SimError {
    let msg = e.to_string().replace('\n', " ").split_whitespace().collect::<Vec<_>>().join(" ");
    if msg.contains("missing field") {
        SimError::Validation(msg)
    } else {
        SimError::Parse(msg)
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario> {
        let sc: Scenario = toml::from_str(text).map_err(parse_error)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Scenario::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::Io(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.tspan;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(SimError::Validation(format!("tspan must satisfy start < end, got [{a}, {b}]")));
        }
        if self.output.samples < 2 {
            return Err(SimError::Validation("output.samples must be at least 2".into()));
        }
        let present = [
            (SystemKind::Ball, self.ball.is_some()),
            (SystemKind::Disk, self.disk.is_some()),
            (SystemKind::RigidBody, self.rigid_body.is_some()),
            (SystemKind::HeavyTop, self.heavy_top.is_some()),
            (SystemKind::Suslov, self.suslov.is_some()),
        ];
        for (kind, has) in present {
            if kind == self.system && !has {
                return Err(SimError::Validation(format!(
                    "system '{}' needs a [{}] section",
                    kind.name(),
                    kind.name()
                )));
            }
            if kind != self.system && has {
                return Err(SimError::Validation(format!(
                    "section [{}] does not match system '{}'",
                    kind.name(),
                    self.system.name()
                )));
            }
        }
        self.integrator.config().validate()?;
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<Model> {
        match self.system {
            SystemKind::Ball => {
                let s = self.ball.as_ref().ok_or_else(|| SimError::Validation("missing [ball]".into()))?;
                let (rails, accels) = rails_and_accels(&s.rails, &s.accels)?;
                let params = BallParams {
                    masses: s.masses.clone(),
                    radius: s.radius,
                    inertia: Vec3::from(s.inertia),
                    gravity: s.gravity,
                    cm_offset: Vec3::from(s.cm_offset),
                    rails,
                    accels,
                    force: build_force(&s.force)?,
                };
                params.validate()?;
                let n = params.n();
                let ini = &s.initial;
                check_len("initial.theta", &ini.theta, n)?;
                let thd = ini.theta_dot.clone().unwrap_or_else(|| vec![0.0; n]);
                check_len("initial.theta_dot", &thd, n)?;
                check_len("initial.q", &ini.q, 4)?;
                check_len("initial.omega", &ini.omega, 3)?;
                check_len("initial.z", &ini.z, 2)?;
                let qn = ini.q.iter().map(|v| v * v).sum::<f64>();
                if !((qn - 1.0).abs() <= crate::so3::VERSOR_TOL) {
                    return Err(SimError::Validation(format!("initial.q must be a unit quaternion (|q|^2 = {qn})")));
                }
                let x0 = pack_state(&ini.theta, &thd, ini.q, Vec3::from(ini.omega), ini.z);
                Ok(Model::Ball { params, x0 })
            }
            SystemKind::Disk => {
                let s = self.disk.as_ref().ok_or_else(|| SimError::Validation("missing [disk]".into()))?;
                let (rails, accels) = rails_and_accels(&s.rails, &s.accels)?;
                let params = DiskParams {
                    masses: s.masses.clone(),
                    radius: s.radius,
                    inertia: s.inertia,
                    gravity: s.gravity,
                    cm_offset: Vec3::from(s.cm_offset),
                    rails,
                    accels,
                    force: build_force(&s.force)?,
                };
                params.validate()?;
                let n = params.n();
                let ini = &s.initial;
                check_len("initial.theta", &ini.theta, n)?;
                let thd = ini.theta_dot.clone().unwrap_or_else(|| vec![0.0; n]);
                check_len("initial.theta_dot", &thd, n)?;
                check_len("initial.phi", &[ini.phi, ini.phi_dot, ini.z], 3)?;
                let mut x0 = ini.theta.clone();
                x0.extend(&thd);
                x0.push(ini.phi);
                x0.push(ini.phi_dot);
                Ok(Model::Disk { params, x0, z0: ini.z })
            }
            SystemKind::RigidBody => {
                let s = self.rigid_body.as_ref().ok_or_else(|| SimError::Validation("missing [rigid_body]".into()))?;
                let body = RigidBody::new(Vec3::from(s.inertia))?;
                let ini = &s.initial;
                check_len("initial.omega", &ini.omega, 3)?;
                let qn = ini.q.iter().map(|v| v * v).sum::<f64>();
                if !((qn - 1.0).abs() <= crate::so3::VERSOR_TOL) {
                    return Err(SimError::Validation("initial.q must be a unit quaternion".into()));
                }
                let mut x0 = ini.omega.to_vec();
                x0.extend(&ini.q);
                Ok(Model::RigidBody { body, x0 })
            }
            SystemKind::HeavyTop => {
                let s = self.heavy_top.as_ref().ok_or_else(|| SimError::Validation("missing [heavy_top]".into()))?;
                let top = HeavyTop::new(Vec3::from(s.inertia), s.mass, s.gravity, Vec3::from(s.cm))?;
                let ini = &s.initial;
                check_len("initial.omega", &ini.omega, 3)?;
                check_len("initial.gamma", &ini.gamma, 3)?;
                let g = Vec3::from(ini.gamma);
                if !((g.norm() - 1.0).abs() <= 1e-9) {
                    return Err(SimError::Validation("initial.gamma must be a unit vector".into()));
                }
                let mut x0 = ini.omega.to_vec();
                x0.extend(&ini.gamma);
                Ok(Model::HeavyTop { top, x0 })
            }
            SystemKind::Suslov => {
                let s = self.suslov.as_ref().ok_or_else(|| SimError::Validation("missing [suslov]".into()))?;
                let axis = match &s.axis {
                    AxisSpec::Constant(v) => ConstraintAxis::Constant(Vec3::from(*v)),
                    AxisSpec::Slerp { from, to, t0, t1 } => {
                        ConstraintAxis::Slerp { from: Vec3::from(*from), to: Vec3::from(*to), t0: *t0, t1: *t1 }
                    }
                };
                let body = Suslov::new(Vec3::from(s.inertia), axis)?;
                check_len("initial.omega", &s.initial.omega, 3)?;
                body.check_initial(self.tspan[0], &Vec3::from(s.initial.omega))?;
                Ok(Model::Suslov { body, x0: s.initial.omega.to_vec() })
            }
        }
    }

    /// SHA-256 over the canonical JSON form, ignoring the name, description
    /// and output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.name.clear();
        c.description = None;
        c.output.dir = None;
        let json = serde_json::to_string(&c).expect("scenario serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

const BUNDLED: [(&str, &str); 8] = [
    ("disk_paper_sec4", include_str!("../scenarios/disk_paper_sec4.toml")),
    ("ball_paper_sec5", include_str!("../scenarios/ball_paper_sec5.toml")),
    ("disk_single_mass_newton", include_str!("../scenarios/disk_single_mass_newton.toml")),
    ("chaplygin_static_ball", include_str!("../scenarios/chaplygin_static_ball.toml")),
    ("free_rigid_body", include_str!("../scenarios/free_rigid_body.toml")),
    ("heavy_top_lagrange", include_str!("../scenarios/heavy_top_lagrange.toml")),
    ("suslov_fixed_xi", include_str!("../scenarios/suslov_fixed_xi.toml")),
    ("suslov_timevarying_xi", include_str!("../scenarios/suslov_timevarying_xi.toml")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn bundled(name: &str) -> Result<Scenario> {
    let src = bundled_source(name).ok_or_else(|| SimError::Validation(format!("no bundled scenario '{name}'")))?;
    Scenario::from_toml(src)
}

/// Load from a file path, falling back to a bundled scenario of that name.
pub fn resolve(arg: &str) -> Result<Scenario> {
    let path = std::path::Path::new(arg);
    if path.exists() {
        Scenario::load(path)
    } else if let Some(src) = bundled_source(arg) {
        Scenario::from_toml(src)
    } else {
        Err(SimError::Io(format!("{arg}: no such file or bundled scenario")))
    }
}

impl Scenario {
    pub fn with_method(mut self, m: Method) -> Self {
        self.integrator.method = m;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_load_and_round_trip() {
        for name in bundled_names() {
            let sc = bundled(name).unwrap();
            assert_eq!(sc.name, name);
            let text = sc.to_toml().unwrap();
            let back = Scenario::from_toml(&text).unwrap();
            assert_eq!(back, sc, "{name}");
            assert_eq!(back.hash(), sc.hash());
        }
    }

    #[test]
    fn disk_scenario_contents() {
        let sc = bundled("disk_paper_sec4").unwrap();
        let Model::Disk { params, x0, .. } = sc.build().unwrap() else { panic!() };
        assert_eq!(params.n(), 4);
        assert_eq!(params.masses, vec![1.0; 5]);
        let radii: Vec<f64> = params
            .rails
            .iter()
            .map(|r| match r {
                Rail::Circle(c) => c.radius,
                _ => panic!(),
            })
            .collect();
        assert_eq!(radii, vec![0.9, 19.0 / 30.0, 11.0 / 30.0, 0.1]);
        assert_eq!(x0.len(), 10);
        assert!(x0[..4].iter().all(|v| *v == -std::f64::consts::FRAC_PI_2));
        assert!(x0[4..].iter().all(|v| *v == 0.0));
        assert_eq!(params.accels[0].eval(0.05), -1.0);
        assert_eq!(params.accels[1].eval(0.05), 1.0);
    }

    #[test]
    fn ball_scenario_contents() {
        let sc = bundled("ball_paper_sec5").unwrap();
        assert_eq!(sc.integrator.atol, 1e-10);
        let Model::Ball { params, x0 } = sc.build().unwrap() else { panic!() };
        assert_eq!(params.inertia, Vec3::new(0.9, 1.0, 1.1));
        assert_eq!(params.cm_offset, Vec3::new(0.0, 0.0, -0.05));
        assert_eq!(&x0[..3], &[0.0, 2.0369, 0.7044]);
        assert_eq!(x0.len(), 15);
        assert_eq!(x0[6], 1.0);
    }

    #[test]
    fn missing_masses_is_a_validation_error() {
        let src = bundled_source("chaplygin_static_ball").unwrap();
        let cut: String = src.lines().filter(|l| !l.trim_start().starts_with("masses")).collect::<Vec<_>>().join("\n");
        let err = Scenario::from_toml(&cut).unwrap_err();
        assert!(matches!(err, SimError::Validation(_)), "{err:?}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn defaults_are_applied() {
        let src = r#"
name = "tiny"
system = "ball"
tspan = [0.0, 1.0]
[ball]
masses = [2.0]
radius = 1
inertia = [1, 1, 1]
[ball.initial]
"#;
        let sc = Scenario::from_toml(src).unwrap();
        assert_eq!(sc.integrator.atol, 1e-10);
        assert_eq!(sc.integrator.rtol, 1e-10);
        assert_eq!(sc.output.samples, 2001);
        let Model::Ball { params, x0 } = sc.build().unwrap() else { panic!() };
        assert_eq!(params.gravity, 1.0);
        assert_eq!(params.force.at(3.0), Vec3::zeros());
        assert_eq!(x0, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn hash_tracks_meaningful_fields() {
        let sc = bundled("ball_paper_sec5").unwrap();
        let mut renamed = sc.clone();
        renamed.name = "other".into();
        renamed.description = Some("x".into());
        renamed.output.dir = Some("/tmp/x".into());
        assert_eq!(renamed.hash(), sc.hash());
        let mut changed = sc.clone();
        changed.ball.as_mut().unwrap().initial.theta[1] = 2.037;
        assert_ne!(changed.hash(), sc.hash());
        let mut tol = sc.clone();
        tol.integrator.rtol = 1e-9;
        assert_ne!(tol.hash(), sc.hash());
    }

    #[test]
    fn validation_errors() {
        let base = bundled("ball_paper_sec5").unwrap();
        let mut s = base.clone();
        s.tspan = [1.0, 0.0];
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.ball.as_mut().unwrap().initial.theta.pop();
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.ball.as_mut().unwrap().initial.q = [1.0, 0.1, 0.0, 0.0];
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.system = SystemKind::Disk;
        assert!(s.validate().is_err());
        assert!(matches!(Scenario::from_toml("name = 3"), Err(SimError::Parse(_))));
        let mut s = base;
        s.ball.as_mut().unwrap().accels.pop();
        assert!(s.validate().is_err());
    }

    #[test]
    fn unknown_field_is_rejected() {
        let src = bundled_source("free_rigid_body").unwrap().replace("[rigid_body]", "[rigid_body]\nbogus = 1");
        assert!(Scenario::from_toml(&src).is_err());
    }

    #[test]
    fn suslov_inconsistent_start() {
        let src = bundled_source("suslov_fixed_xi").unwrap();
        let mut sc: Scenario = toml::from_str(src).unwrap();
        sc.suslov.as_mut().unwrap().initial.omega = [0.1, 0.2, 0.3];
        assert!(matches!(sc.validate(), Err(SimError::Precondition(_))));
    }
}
