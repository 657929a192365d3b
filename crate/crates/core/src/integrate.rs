//! One-step integrators: fixed-step RK4, adaptive Dormand-Prince 5(4) with a
//! PI step controller, and the implicit trapezoidal rule solved by simplified
//! Newton iteration. Samples on a uniform grid come from the
//! Dormand-Prince continuous extension for rk45 and from cubic Hermite
//! interpolation for the other methods.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// A first-order system `x' = f(t, x)` with an optional projection back onto
/// its constraint manifold.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()>;
    /// Returns true if `x` was modified.
    fn project(&self, _x: &mut [f64]) -> bool {
        false
    }
    /// Times where the right-hand side has a kink in `t`. Adaptive steps
    /// end exactly on them.
    fn breakpoints(&self) -> Vec<f64> {
        vec![]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    #[default]
    Rk45,
    ImplicitTrap,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Rk45 => "rk45",
            Method::ImplicitTrap => "implicit_trap",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "rk45" => Ok(Method::Rk45),
            "implicit_trap" => Ok(Method::ImplicitTrap),
            _ => Err(SimError::Validation(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub atol: f64,
    pub rtol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub projection: bool,
    /// Step for rk4 and implicit_trap. When set for rk45 the error estimate
    /// is ignored and every step is accepted.
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            atol: 1e-10,
            rtol: 1e-10,
            h_init: None,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            projection: true,
            fixed_step: None,
        }
    }
}

pub const DEFAULT_FIXED_STEP: f64 = 1e-3;

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::Validation(m.to_string()));
        if !(self.atol > 0.0) || !(self.rtol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.h_min > 0.0) || !(self.h_max >= self.h_min) {
            return bad("need 0 < h_min <= h_max");
        }
        if let Some(h) = self.h_init {
            if !(h >= self.h_min && h <= self.h_max) {
                return bad("need h_min <= h_init <= h_max");
            }
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) || !h.is_finite() {
                return bad("fixed step must be positive");
            }
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobian_evals: usize,
    pub newton_iters: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Row-major, `times.len() * dim` values.
    pub states: Vec<f64>,
    pub stats: Stats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }
}

/// Uniform grid of `n` points on `[a, b]` with exact end points.
pub fn sample_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![b],
        _ => {
            let mut g: Vec<f64> = (0..n).map(|k| a + (b - a) * (k as f64) / ((n - 1) as f64)).collect();
            g[n - 1] = b;
            g
        }
    }
}

struct Counted<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    stats: Stats,
}

impl<S: OdeSystem + ?Sized> Counted<'_, S> {
    fn f(&mut self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        self.stats.rhs_evals += 1;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Divergence { t });
        }
        self.sys.rhs(t, x, dx)?;
        if dx.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Divergence { t });
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
// Coefficients of the fourth-order continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Result of a single Dormand-Prince step.
pub struct Dp45Step {
    pub x: Vec<f64>,
    pub err: Vec<f64>,
    /// Right-hand side at the new point (first stage of the next step).
    pub f: Vec<f64>,
    /// `h * sum(D[s] * k[s])`, the last term of the continuous extension.
    pub dense: Vec<f64>,
}

impl Dp45Step {
    /// Fourth-order interpolant at fraction `s` of a step of length `h`
    /// that started at `x0` with slope `f0`.
    pub fn interpolate(&self, x0: &[f64], f0: &[f64], h: f64, s: f64) -> Vec<f64> {
        let s1 = 1.0 - s;
        (0..x0.len())
            .map(|j| {
                let diff = self.x[j] - x0[j];
                let b = h * f0[j] - diff;
                let c = diff - h * self.f[j] - b;
                x0[j] + s * (diff + s1 * (b + s * (c + s1 * self.dense[j])))
            })
            .collect()
    }
}

pub fn step_rk45<S: OdeSystem + ?Sized>(sys: &S, t: f64, x: &[f64], f0: &[f64], h: f64) -> Result<Dp45Step> {
    let mut c = Counted { sys, stats: Stats::default() };
    dp45(&mut c, t, x, f0, h)
}

fn dp45<S: OdeSystem + ?Sized>(c: &mut Counted<'_, S>, t: f64, x: &[f64], f0: &[f64], h: f64) -> Result<Dp45Step> {
    let n = x.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(f0.to_vec());
    let mut y = vec![0.0; n];
    for s in 1..7 {
        for j in 0..n {
            let mut acc = 0.0;
            for (m, km) in k.iter().enumerate() {
                acc += A[s][m] * km[j];
            }
            y[j] = x[j] + h * acc;
        }
        let mut ks = vec![0.0; n];
        c.f(t + C[s] * h, &y, &mut ks)?;
        k.push(ks);
    }
    let mut err = vec![0.0; n];
    let mut dense = vec![0.0; n];
    for j in 0..n {
        let (mut e, mut d) = (0.0, 0.0);
        for s in 0..7 {
            e += E[s] * k[s][j];
            d += D[s] * k[s][j];
        }
        err[j] = h * e;
        dense[j] = h * d;
    }
    let f = k.pop().unwrap();
    Ok(Dp45Step { x: y, err, f, dense })
}

fn rk4_step<S: OdeSystem + ?Sized>(c: &mut Counted<'_, S>, t: f64, x: &[f64], f0: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let mut y = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    for j in 0..n {
        y[j] = x[j] + 0.5 * h * f0[j];
    }
    c.f(t + 0.5 * h, &y, &mut k2)?;
    for j in 0..n {
        y[j] = x[j] + 0.5 * h * k2[j];
    }
    c.f(t + 0.5 * h, &y, &mut k3)?;
    for j in 0..n {
        y[j] = x[j] + h * k3[j];
    }
    c.f(t + h, &y, &mut k4)?;
    Ok((0..n).map(|j| x[j] + h / 6.0 * (f0[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect())
}

/// Central-difference Jacobian with per-column step `rel * max(1, |x_j|)`.
pub fn jacobian_fd<S: OdeSystem + ?Sized>(sys: &S, t: f64, x: &[f64], rel: f64) -> Result<DMatrix<f64>> {
    let mut c = Counted { sys, stats: Stats::default() };
    jac(&mut c, t, x, rel)
}

fn jac<S: OdeSystem + ?Sized>(c: &mut Counted<'_, S>, t: f64, x: &[f64], rel: f64) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for col in 0..n {
        let h = rel * x[col].abs().max(1.0);
        xp[col] = x[col] + h;
        c.f(t, &xp, &mut fp)?;
        xp[col] = x[col] - h;
        c.f(t, &xp, &mut fm)?;
        xp[col] = x[col];
        for row in 0..n {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

const NEWTON_MAX_ITERS: usize = 25;
const NEWTON_TOL: f64 = 1e-12;
const JAC_REL_STEP: f64 = 1e-6;

/// One implicit trapezoidal step, `y = x + h/2 (f(t, x) + f(t + h, y))`.
pub fn step_implicit_trap<S: OdeSystem + ?Sized>(sys: &S, t: f64, x: &[f64], f0: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut c = Counted { sys, stats: Stats::default() };
    trap(&mut c, t, x, f0, h)
}

fn trap<S: OdeSystem + ?Sized>(c: &mut Counted<'_, S>, t: f64, x: &[f64], f0: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let j = jac(c, t, x, JAC_REL_STEP)?;
    c.stats.jacobian_evals += 1;
    let m = DMatrix::identity(n, n) - j * (0.5 * h);
    let lu = m.lu();
    let mut y: Vec<f64> = (0..n).map(|k| x[k] + h * f0[k]).collect();
    let mut fy = vec![0.0; n];
    for _ in 0..NEWTON_MAX_ITERS {
        c.stats.newton_iters += 1;
        c.f(t + h, &y, &mut fy)?;
        let g = DVector::from_iterator(n, (0..n).map(|k| y[k] - x[k] - 0.5 * h * (f0[k] + fy[k])));
        let dy = lu.solve(&g).ok_or(SimError::ImplicitStep { t })?;
        if g.amax() <= NEWTON_TOL {
            for k in 0..n {
                y[k] -= dy[k];
            }
            return Ok(y);
        }
        let ymax = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        for k in 0..n {
            y[k] -= dy[k];
        }
        if dy.amax() <= 4.0 * f64::EPSILON * (1.0 + ymax) {
            return Ok(y);
        }
    }
    Err(SimError::ImplicitStep { t })
}

const MAX_HALVINGS: u32 = 20;

fn trap_halving<S: OdeSystem + ?Sized>(
    c: &mut Counted<'_, S>,
    t: f64,
    x: &[f64],
    f0: &[f64],
    h: f64,
    depth: u32,
) -> Result<Vec<f64>> {
    match trap(c, t, x, f0, h) {
        Ok(y) => Ok(y),
        Err(SimError::ImplicitStep { .. }) if depth < MAX_HALVINGS => {
            c.stats.rejected += 1;
            let hh = 0.5 * h;
            let ym = trap_halving(c, t, x, f0, hh, depth + 1)?;
            let mut fm = vec![0.0; x.len()];
            c.f(t + hh, &ym, &mut fm)?;
            trap_halving(c, t + hh, &ym, &fm, hh, depth + 1)
        }
        Err(e) => Err(e),
    }
}

/// Collects grid samples while the integrator walks forward.
struct Sampler<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    grid: Vec<f64>,
    next: usize,
    out: Vec<f64>,
    projection: bool,
}

impl<S: OdeSystem + ?Sized> Sampler<'_, S> {
    fn push(&mut self, x: &[f64]) {
        let mut v = x.to_vec();
        if self.projection {
            self.sys.project(&mut v);
        }
        self.out.extend_from_slice(&v);
        self.next += 1;
    }

    /// Emit all grid points in `(t0, t1]`, evaluating `at(s)` for the
    /// fraction `s` of the step.
    fn emit(&mut self, t0: f64, t1: f64, x1: &[f64], last: bool, at: impl Fn(f64) -> Vec<f64>) {
        let h = t1 - t0;
        while self.next < self.grid.len() {
            let tk = self.grid[self.next];
            if tk > t1 && !(last && self.next == self.grid.len() - 1) {
                break;
            }
            if tk >= t1 {
                self.push(x1);
                continue;
            }
            let v = at((tk - t0) / h);
            self.push(&v);
        }
    }

    /// Cubic Hermite interpolation on the step end points.
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, t0: f64, x0: &[f64], f0: &[f64], t1: f64, x1: &[f64], f1: &[f64], last: bool) {
        let h = t1 - t0;
        self.emit(t0, t1, x1, last, |s| {
            let s2 = s * s;
            let s3 = s2 * s;
            let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
            let h10 = s3 - 2.0 * s2 + s;
            let h01 = -2.0 * s3 + 3.0 * s2;
            let h11 = s3 - s2;
            (0..x0.len()).map(|j| h00 * x0[j] + h10 * h * f0[j] + h01 * x1[j] + h11 * h * f1[j]).collect()
        });
    }
}

/// Integrate `sys` from `x0` over `[a, b]`, returning `samples` uniformly
/// spaced states.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<Trajectory> {
    integrate_observed(sys, x0, tspan, cfg, samples, &mut |_, _| {})
}

/// As [`integrate`], calling `on_step(t, x)` after every accepted step
/// (after projection).
pub fn integrate_observed<S: OdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    tspan: (f64, f64),
    cfg: &IntegratorConfig,
    samples: usize,
    on_step: &mut dyn FnMut(f64, &[f64]),
) -> Result<Trajectory> {
    cfg.validate()?;
    let (a, b) = tspan;
    let n = sys.dim();
    if x0.len() != n {
        return Err(SimError::Validation(format!("initial state has length {}, expected {n}", x0.len())));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(SimError::Validation(format!("invalid time span [{a}, {b}]")));
    }
    if samples < 2 {
        return Err(SimError::Validation("need at least 2 samples".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::Validation("initial state is not finite".into()));
    }

    let mut c = Counted { sys, stats: Stats::default() };
    let grid = sample_grid(a, b, samples);
    let mut sampler =
        Sampler { sys, grid: grid.clone(), next: 0, out: Vec::with_capacity(samples * n), projection: cfg.projection };

    let mut t = a;
    let mut x = x0.to_vec();
    if cfg.projection {
        sys.project(&mut x);
    }
    let mut f = vec![0.0; n];
    c.f(t, &x, &mut f)?;
    sampler.push(&x);

    let fixed = match cfg.method {
        Method::Rk4 | Method::ImplicitTrap => Some(cfg.fixed_step.unwrap_or(DEFAULT_FIXED_STEP)),
        Method::Rk45 => cfg.fixed_step,
    };

    if let Some(h) = fixed {
        let ratio = (b - a) / h;
        let nsteps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
            ratio.round() as usize
        } else {
            ratio.ceil() as usize
        }
        .max(1);
        if nsteps > cfg.max_steps {
            return Err(SimError::Budget { t, max_steps: cfg.max_steps });
        }
        for k in 1..=nsteps {
            let t1 = if k == nsteps { b } else { a + (k as f64) * h };
            let hk = t1 - t;
            let mut dense = None;
            let mut x1 = match cfg.method {
                Method::Rk4 => rk4_step(&mut c, t, &x, &f, hk)?,
                Method::Rk45 => {
                    let st = dp45(&mut c, t, &x, &f, hk)?;
                    let x1 = st.x.clone();
                    dense = Some(st);
                    x1
                }
                Method::ImplicitTrap => trap_halving(&mut c, t, &x, &f, hk, 0)?,
            };
            if cfg.projection {
                sys.project(&mut x1);
            }
            let mut f1 = vec![0.0; n];
            c.f(t1, &x1, &mut f1)?;
            c.stats.steps += 1;
            on_step(t1, &x1);
            match &dense {
                Some(st) => sampler.emit(t, t1, &x1, k == nsteps, |s| st.interpolate(&x, &f, hk, s)),
                None => sampler.step(t, &x, &f, t1, &x1, &f1, k == nsteps),
            }
            t = t1;
            x = x1;
            f = f1;
        }
    } else {
        adaptive(&mut c, &mut sampler, cfg, &mut t, &mut x, &mut f, b, on_step)?;
    }

    Ok(Trajectory { dim: n, times: grid, states: sampler.out, stats: c.stats })
}

fn error_norm(err: &[f64], x: &[f64], y: &[f64], atol: f64, rtol: f64) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..err.len() {
        let sc = atol + rtol * x[j].abs().max(y[j].abs());
        m = m.max((err[j] / sc).abs());
    }
    m
}

fn initial_step<S: OdeSystem + ?Sized>(
    c: &mut Counted<'_, S>,
    t: f64,
    x: &[f64],
    f: &[f64],
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let n = x.len();
    let sc: Vec<f64> = x.iter().map(|v| cfg.atol + cfg.rtol * v.abs()).collect();
    let rms = |v: &[f64]| -> f64 { (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt() };
    let d0 = rms(x);
    let d1 = rms(f);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.h_max);
    let y: Vec<f64> = (0..n).map(|j| x[j] + h0 * f[j]).collect();
    let mut f1 = vec![0.0; n];
    c.f(t + h0, &y, &mut f1)?;
    let diff: Vec<f64> = (0..n).map(|j| f1[j] - f[j]).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 5.0) };
    Ok((100.0 * h0).min(h1).min(cfg.h_max).max(cfg.h_min))
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;

#[allow(clippy::too_many_arguments)]
fn adaptive<S: OdeSystem + ?Sized>(
    c: &mut Counted<'_, S>,
    sampler: &mut Sampler<'_, S>,
    cfg: &IntegratorConfig,
    t: &mut f64,
    x: &mut Vec<f64>,
    f: &mut Vec<f64>,
    b: f64,
    on_step: &mut dyn FnMut(f64, &[f64]),
) -> Result<()> {
    let sys = c.sys;
    let mut h = match cfg.h_init {
        Some(h) => h,
        None => initial_step(c, *t, x, f, cfg)?,
    };
    let mut stops: Vec<f64> = sys.breakpoints().into_iter().filter(|s| *s > *t && *s < b).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut next_stop = 0;
    let mut err_prev = 1e-4_f64;
    let mut rejected_last = false;
    loop {
        if c.stats.steps + c.stats.rejected >= cfg.max_steps {
            return Err(SimError::Budget { t: *t, max_steps: cfg.max_steps });
        }
        h = h.min(cfg.h_max);
        let mut last = false;
        let mut stop = None;
        if *t + 1.01 * h >= b {
            h = b - *t;
            last = true;
        } else if h < cfg.h_min {
            return Err(SimError::StepUnderflow { t: *t, h, state: x.clone() });
        } else if let Some(&s) = stops.get(next_stop) {
            if *t + 1.01 * h >= s {
                h = s - *t;
                stop = Some(s);
            }
        }
        let step = dp45(c, *t, x, f, h)?;
        let err = error_norm(&step.err, x, &step.x, cfg.atol, cfg.rtol);
        if !err.is_finite() {
            return Err(SimError::Divergence { t: *t });
        }
        if err <= 1.0 {
            let t1 = if last { b } else { stop.unwrap_or(*t + h) };
            if stop.is_some() {
                next_stop += 1;
            }
            let mut x1 = step.x.clone();
            let mut f1 = step.f.clone();
            if cfg.projection && sys.project(&mut x1) {
                c.f(t1, &x1, &mut f1)?;
            }
            c.stats.steps += 1;
            on_step(t1, &x1);
            sampler.emit(*t, t1, &x1, last, |s| step.interpolate(x, f, h, s));
            *t = t1;
            *x = x1;
            *f = f1;
            if last {
                return Ok(());
            }
            let e = err.max(1e-10);
            let mut fac = SAFETY * e.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h *= fac;
            err_prev = e;
            rejected_last = false;
        } else {
            c.stats.rejected += 1;
            let fac = (SAFETY * err.powf(-1.0 / 5.0)).max(FAC_MIN);
            h *= fac;
            rejected_last = true;
        }
    }
}
