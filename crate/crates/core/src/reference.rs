//! Finite-difference reference solution of the cavity by artificial
//! compressibility in pseudo-time, plus field comparison metrics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpinn::grid_coord;

/// Dormand–Prince 5(4) tableau for autonomous systems. The last row of `A`
/// holds the fifth-order weights.
mod dp {
    pub const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    /// `B - B*` with `B*` the embedded fourth-order weights.
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

/// Smallest step before the integrator gives up.
pub const MIN_STEP: f64 = 1e-12;

/// Result of one adaptive step attempt.
#[derive(Clone, Debug)]
pub struct Rk45Step {
    /// New state if accepted, the input state otherwise.
    pub state: Vec<f64>,
    /// Suggested next step size.
    pub h_next: f64,
    pub accepted: bool,
    /// Scaled error norm of the attempt.
    pub error: f64,
    /// Right-hand side at the new state (last stage), when accepted.
    pub rhs: Option<Vec<f64>>,
}

/// One Dormand–Prince step of the autonomous system `y' = rhs(y)` with
/// standard RMS error control.
pub fn rk45_step<F>(rhs: &mut F, state: &[f64], h: f64, rtol: f64, atol: f64) -> Result<Rk45Step>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(h >= MIN_STEP) {
        return Err(Error::Stiffness { t: f64::NAN, h });
    }
    let n = state.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    for s in 0..7 {
        tmp.copy_from_slice(state);
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = dp::A[s][j];
            if a != 0.0 {
                for (t, kv) in tmp.iter_mut().zip(kj) {
                    *t += h * a * kv;
                }
            }
        }
        rhs(&tmp, &mut k[s]);
    }
    // stage 7 is evaluated at the fifth-order solution, which is `tmp`
    let next = tmp;
    let mut acc = 0.0;
    for i in 0..n {
        let e: f64 = (0..7).map(|s| dp::E[s] * k[s][i]).sum::<f64>() * h;
        let sc = atol + rtol * state[i].abs().max(next[i].abs());
        acc += (e / sc).powi(2);
    }
    let error = if n == 0 { 0.0 } else { (acc / n as f64).sqrt() };
    let factor = if error == 0.0 {
        5.0
    } else {
        (0.9 * error.powf(-0.2)).clamp(0.2, 5.0)
    };
    let accepted = error <= 1.0;
    Ok(if accepted {
        Rk45Step {
            rhs: Some(k.swap_remove(6)),
            state: next,
            h_next: h * factor,
            accepted,
            error,
        }
    } else {
        Rk45Step {
            state: state.to_vec(),
            h_next: h * factor.min(1.0),
            accepted,
            error,
            rhs: None,
        }
    })
}

/// Integrate `y' = rhs(y)` from 0 to `t_end`.
pub fn integrate<F>(mut rhs: F, y0: &[f64], t_end: f64, rtol: f64, atol: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).max(MIN_STEP);
    while t < t_end {
        let step = h.min(t_end - t);
        let out = rk45_step(&mut rhs, &y, step, rtol, atol).map_err(|e| at_time(e, t))?;
        if out.accepted {
            t += step;
            y = out.state;
        }
        h = out.h_next;
        if h < MIN_STEP {
            return Err(Error::Stiffness { t, h });
        }
    }
    Ok(y)
}

fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::Stiffness { h, .. } => Error::Stiffness { t, h },
        other => other,
    }
}

/// `(N + S + E + W - 4C) / h²`.
pub fn laplacian_stencil(c: f64, n: f64, s: f64, e: f64, w: f64, h: f64) -> f64 {
    (n + s + e + w - 4.0 * c) / (h * h)
}

/// Velocity and pressure on an `nx × ny` node grid of the unit square,
/// `x` varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub nx: usize,
    pub ny: usize,
    pub reynolds: Option<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl FieldGrid {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            reynolds: None,
            u: vec![0.0; nx * ny],
            v: vec![0.0; nx * ny],
            p: vec![0.0; nx * ny],
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coord(&self, k: usize) -> (f64, f64) {
        (grid_coord(k % self.nx, self.nx), grid_coord(k / self.nx, self.ny))
    }

    pub fn speed(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(u, v)| u.hypot(*v)).collect()
    }

    /// Subtract `p(0, 0)` from the pressure.
    pub fn gauge(&mut self) {
        let p0 = self.p[0];
        self.p.iter_mut().for_each(|p| *p -= p0);
    }

    /// Bilinear interpolation of every field at `(x, y)`.
    pub fn sample(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let fx = (x * (self.nx - 1) as f64).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y * (self.ny - 1) as f64).clamp(0.0, (self.ny - 1) as f64);
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let at = |f: &[f64]| {
            let a = f[self.index(i, j)];
            let b = f[self.index(i + 1, j)];
            let c = f[self.index(i, j + 1)];
            let d = f[self.index(i + 1, j + 1)];
            (1.0 - ty) * ((1.0 - tx) * a + tx * b) + ty * ((1.0 - tx) * c + tx * d)
        };
        (at(&self.u), at(&self.v), at(&self.p))
    }

    /// CSV with columns `x, y, u, v, p, speed`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y", "u", "v", "p", "speed"])?;
        for k in 0..self.len() {
            let (x, y) = self.coord(k);
            let (u, v, p) = (self.u[k], self.v[k], self.p[k]);
            w.write_record(&[
                x.to_string(),
                y.to_string(),
                u.to_string(),
                v.to_string(),
                p.to_string(),
                u.hypot(v).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        let want = ["x", "y", "u", "v", "p", "speed"];
        if headers.iter().collect::<Vec<_>>() != want {
            return Err(Error::Usage(format!(
                "{}: expected columns {want:?}, found {:?}",
                path.display(),
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut rows: Vec<[f64; 5]> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut row = [0.0; 5];
            for (slot, field) in row.iter_mut().zip(rec.iter()) {
                *slot = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Usage(format!("{}: bad number `{field}`", path.display())))?;
            }
            rows.push(row);
        }
        let nx = rows.iter().take_while(|r| r[1] == rows[0][1]).count();
        if nx < 2 || rows.len() % nx != 0 {
            return Err(Error::Usage(format!("{}: rows do not form a grid", path.display())));
        }
        let ny = rows.len() / nx;
        let mut g = FieldGrid::zeros(nx, ny);
        for (k, row) in rows.iter().enumerate() {
            let (x, y) = g.coord(k);
            if (row[0] - x).abs() > 1e-9 || (row[1] - y).abs() > 1e-9 {
                return Err(Error::Usage(format!(
                    "{}: row {k} at ({}, {}) is off the uniform {nx}×{ny} grid",
                    path.display(),
                    row[0],
                    row[1]
                )));
            }
            g.u[k] = row[2];
            g.v[k] = row[3];
            g.p[k] = row[4];
        }
        Ok(g)
    }
}

/// Artificial compressibility used by default. The steady state does not
/// depend on it, but the slow pressure modes of the collocated scheme decay
/// at a rate proportional to it.
pub const DEFAULT_BETA: f64 = 3000.0;

/// Pseudo-time integration settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub reynolds: f64,
    pub nx: usize,
    pub ny: usize,
    pub steady_tol: f64,
    /// Artificial compressibility `β`.
    pub beta: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl ReferenceConfig {
    pub fn new(reynolds: f64, nx: usize, ny: usize) -> Self {
        Self {
            reynolds,
            nx,
            ny,
            steady_tol: 1e-6,
            beta: DEFAULT_BETA,
            rtol: 1e-10,
            atol: 1e-13,
            max_steps: 2_000_000,
        }
    }
}

/// Diagnostics of a converged reference run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub steps: usize,
    pub rejected: usize,
    pub pseudo_time: f64,
    /// `‖∂(u, v, p)/∂τ‖_∞` at the final state.
    pub residual: f64,
    /// Largest central-difference `|u_x + v_y|` over interior nodes.
    pub divergence: f64,
}

/// Unknowns are `(u, v, p)` at interior nodes. Wall pressures copy their
/// inner neighbour, except that inside the stencils the bottom-wall node
/// next to the origin carries the reference `p = 0`; without it a constant
/// pressure shift is a null mode and the continuity equations are one too
/// many. Reported fields use the plain copy there as well.
struct Cavity {
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    nu: f64,
    beta: f64,
}

impl Cavity {
    fn interior(&self) -> usize {
        (self.nx - 2) * (self.ny - 2)
    }

    fn state_len(&self) -> usize {
        3 * self.interior()
    }

    /// Full-grid fields from the interior state, boundary values imposed.
    fn expand(&self, s: &[f64], u: &mut [f64], v: &mut [f64], p: &mut [f64], pinned: bool) {
        let (nx, ny, m) = (self.nx, self.ny, self.interior());
        let id = |i: usize, j: usize| j * nx + i;
        u.iter_mut().for_each(|x| *x = 0.0);
        v.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..nx {
            u[id(i, ny - 1)] = 1.0;
        }
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = (j - 1) * (nx - 2) + (i - 1);
                u[id(i, j)] = s[k];
                v[id(i, j)] = s[m + k];
                p[id(i, j)] = s[2 * m + k];
            }
        }
        for j in 1..ny - 1 {
            p[id(0, j)] = p[id(1, j)];
            p[id(nx - 1, j)] = p[id(nx - 2, j)];
        }
        for i in 1..nx - 1 {
            p[id(i, 0)] = p[id(i, 1)];
            p[id(i, ny - 1)] = p[id(i, ny - 2)];
        }
        if pinned {
            p[id(1, 0)] = 0.0;
        }
        p[id(0, 0)] = 0.5 * (p[id(1, 0)] + p[id(0, 1)]);
        p[id(nx - 1, 0)] = 0.5 * (p[id(nx - 2, 0)] + p[id(nx - 1, 1)]);
        p[id(0, ny - 1)] = 0.5 * (p[id(1, ny - 1)] + p[id(0, ny - 2)]);
        p[id(nx - 1, ny - 1)] = 0.5 * (p[id(nx - 2, ny - 1)] + p[id(nx - 1, ny - 2)]);
    }

    fn rhs(&self, s: &[f64], out: &mut [f64], work: &mut [Vec<f64>; 3]) {
        let [u, v, p] = work;
        self.expand(s, u, v, p, true);
        let (nx, ny, m) = (self.nx, self.ny, self.interior());
        let (hx, hy) = (self.hx, self.hy);
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let c = j * nx + i;
                let (e, w, n, so) = (c + 1, c - 1, c + nx, c - nx);
                let k = (j - 1) * (nx - 2) + (i - 1);
                let ux = (u[e] - u[w]) / (2.0 * hx);
                let uy = (u[n] - u[so]) / (2.0 * hy);
                let vx = (v[e] - v[w]) / (2.0 * hx);
                let vy = (v[n] - v[so]) / (2.0 * hy);
                let px = (p[e] - p[w]) / (2.0 * hx);
                let py = (p[n] - p[so]) / (2.0 * hy);
                let lap_u = (u[e] + u[w] - 2.0 * u[c]) / (hx * hx) + (u[n] + u[so] - 2.0 * u[c]) / (hy * hy);
                let lap_v = (v[e] + v[w] - 2.0 * v[c]) / (hx * hx) + (v[n] + v[so] - 2.0 * v[c]) / (hy * hy);
                out[k] = -(u[c] * ux + v[c] * uy) - px + self.nu * lap_u;
                out[m + k] = -(u[c] * vx + v[c] * vy) - py + self.nu * lap_v;
                out[2 * m + k] = -self.beta * (ux + vy);
            }
        }
    }
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Integrate to a steady state and return the gauged fields.
pub fn solve_reference(cfg: &ReferenceConfig) -> Result<(FieldGrid, ReferenceReport)> {
    if cfg.nx < 16 || cfg.ny < 16 {
        return Err(Error::Config(format!(
            "reference grid needs at least 16×16 nodes, got {}×{}",
            cfg.nx, cfg.ny
        )));
    }
    if !(cfg.reynolds > 0.0 && cfg.reynolds.is_finite()) {
        return Err(Error::Config(format!("reynolds must be positive, got {}", cfg.reynolds)));
    }
    if !(cfg.steady_tol > 0.0) {
        return Err(Error::Config("steady_tol must be positive".into()));
    }
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        return Err(Error::Config(format!("beta must be positive, got {}", cfg.beta)));
    }
    let cav = Cavity {
        nx: cfg.nx,
        ny: cfg.ny,
        hx: 1.0 / (cfg.nx - 1) as f64,
        hy: 1.0 / (cfg.ny - 1) as f64,
        nu: 1.0 / cfg.reynolds,
        beta: cfg.beta,
    };
    let full = cfg.nx * cfg.ny;
    let mut work = [vec![0.0; full], vec![0.0; full], vec![0.0; full]];
    let mut rhs = |s: &[f64], out: &mut [f64]| cav.rhs(s, out, &mut work);
    let mut state = vec![0.0; cav.state_len()];
    let mut h = 0.1 * cav.hx.min(cav.hy).powi(2) * cfg.reynolds;
    let (mut t, mut steps, mut rejected) = (0.0, 0usize, 0usize);
    let mut residual = f64::INFINITY;
    while residual >= cfg.steady_tol {
        if steps >= cfg.max_steps {
            return Err(Error::NonConvergence { steps, residual });
        }
        let out = rk45_step(&mut rhs, &state, h, cfg.rtol, cfg.atol).map_err(|e| at_time(e, t))?;
        if out.accepted {
            t += h;
            steps += 1;
            state = out.state;
            residual = norm_inf(out.rhs.as_deref().expect("accepted step carries rhs"));
            if !residual.is_finite() {
                return Err(Error::NonConvergence { steps, residual });
            }
        } else {
            rejected += 1;
        }
        h = out.h_next;
        if h < MIN_STEP {
            return Err(Error::Stiffness { t, h });
        }
    }
    let mut grid = FieldGrid::zeros(cfg.nx, cfg.ny);
    grid.reynolds = Some(cfg.reynolds);
    cav.expand(&state, &mut grid.u, &mut grid.v, &mut grid.p, false);
    grid.gauge();
    let divergence = interior_divergence(&grid);
    Ok((
        grid,
        ReferenceReport {
            steps,
            rejected,
            pseudo_time: t,
            residual,
            divergence,
        },
    ))
}

/// Largest central-difference `|u_x + v_y|` over interior nodes.
pub fn interior_divergence(g: &FieldGrid) -> f64 {
    let (hx, hy) = (1.0 / (g.nx - 1) as f64, 1.0 / (g.ny - 1) as f64);
    let mut worst: f64 = 0.0;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let ux = (g.u[g.index(i + 1, j)] - g.u[g.index(i - 1, j)]) / (2.0 * hx);
            let vy = (g.v[g.index(i, j + 1)] - g.v[g.index(i, j - 1)]) / (2.0 * hy);
            worst = worst.max((ux + vy).abs());
        }
    }
    worst
}

/// Error summary of one field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMetrics {
    pub mse: f64,
    pub rel_l2: f64,
    pub max_abs: f64,
    /// The reference norm was zero, so `rel_l2` holds the absolute norm.
    pub rel_l2_is_absolute: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub speed: FieldMetrics,
    pub pressure: FieldMetrics,
}

/// Compare two sample vectors at matching locations.
pub fn field_metrics(pred: &[f64], reference: &[f64]) -> Result<FieldMetrics> {
    if pred.len() != reference.len() || pred.is_empty() {
        return Err(Error::Usage(format!(
            "sample counts differ: {} predicted vs {} reference",
            pred.len(),
            reference.len()
        )));
    }
    let mut sq = 0.0;
    let mut ref_sq = 0.0;
    let mut max_abs: f64 = 0.0;
    for (a, b) in pred.iter().zip(reference) {
        let d = a - b;
        sq += d * d;
        ref_sq += b * b;
        max_abs = max_abs.max(d.abs());
    }
    let norm = sq.sqrt();
    let ref_norm = ref_sq.sqrt();
    Ok(FieldMetrics {
        mse: sq / pred.len() as f64,
        rel_l2: if ref_norm > 0.0 { norm / ref_norm } else { norm },
        max_abs,
        rel_l2_is_absolute: ref_norm == 0.0,
    })
}

fn gauged(p: &[f64]) -> Vec<f64> {
    let p0 = p[0];
    p.iter().map(|v| v - p0).collect()
}

/// Speed and gauged-pressure errors of `pred` against `reference`. Both
/// grids must have the same shape.
pub fn metrics(pred: &FieldGrid, reference: &FieldGrid) -> Result<Metrics> {
    if (pred.nx, pred.ny) != (reference.nx, reference.ny) {
        return Err(Error::Usage(format!(
            "grid mismatch: prediction {}×{}, reference {}×{}",
            pred.nx, pred.ny, reference.nx, reference.ny
        )));
    }
    Ok(Metrics {
        speed: field_metrics(&pred.speed(), &reference.speed())?,
        pressure: field_metrics(&gauged(&pred.p), &gauged(&reference.p))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_keeps_state() {
        let mut rhs = |_: &[f64], out: &mut [f64]| out.iter_mut().for_each(|v| *v = 0.0);
        let s = rk45_step(&mut rhs, &[1.0, -2.0], 0.1, 1e-6, 1e-9).unwrap();
        assert!(s.accepted);
        assert_eq!(s.state, vec![1.0, -2.0]);
    }

    #[test]
    fn exponential_decay() {
        let y = integrate(|y, out| out[0] = -y[0], &[1.0], 1.0, 1e-8, 1e-12).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-7, "{}", y[0]);
    }

    #[test]
    fn constant_rate_is_exact() {
        let mut rhs = |_: &[f64], out: &mut [f64]| out[0] = 3.0;
        let s = rk45_step(&mut rhs, &[0.5], 0.25, 1e-6, 1e-9).unwrap();
        assert!(s.accepted);
        assert!((s.state[0] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn step_underflow_is_stiffness() {
        let mut rhs = |_: &[f64], out: &mut [f64]| out[0] = 1.0;
        assert!(matches!(
            rk45_step(&mut rhs, &[0.0], 1e-13, 1e-6, 1e-9),
            Err(Error::Stiffness { .. })
        ));
    }

    #[test]
    fn stencil_examples() {
        assert_eq!(laplacian_stencil(0.0, 1.0, 2.0, 3.0, 4.0, 0.5), 40.0);
        assert_eq!(laplacian_stencil(7.0, 7.0, 7.0, 7.0, 7.0, 0.1), 0.0);
        let h: f64 = 0.25;
        let x: f64 = 0.5;
        let f = |x: f64| x * x;
        // y-neighbours equal the centre for f = x²
        let lap = laplacian_stencil(f(x), f(x), f(x), f(x + h), f(x - h), h);
        assert!((lap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_examples() {
        let m = field_metrics(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((m.mse, m.rel_l2, m.max_abs), (0.0, 0.0, 0.0));
        let m = field_metrics(&[1.5, 2.5], &[1.0, 2.0]).unwrap();
        assert!((m.mse - 0.25).abs() < 1e-15 && (m.max_abs - 0.5).abs() < 1e-15);
        let m = field_metrics(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_eq!(m.rel_l2, 1.0);
        let m = field_metrics(&[3.0, 4.0], &[0.0, 0.0]).unwrap();
        assert!(m.rel_l2_is_absolute && m.rel_l2 == 5.0);
        assert!(matches!(field_metrics(&[1.0], &[1.0, 2.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = FieldGrid::zeros(4, 4);
        let b = FieldGrid::zeros(5, 4);
        assert!(matches!(metrics(&a, &b), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut g = FieldGrid::zeros(3, 4);
        for k in 0..g.len() {
            g.u[k] = k as f64 * 0.1;
            g.v[k] = -(k as f64) * 0.05;
            g.p[k] = (k as f64).sin();
        }
        g.write_csv(&path).unwrap();
        let back = FieldGrid::read_csv(&path).unwrap();
        assert_eq!((back.nx, back.ny), (3, 4));
        assert_eq!(back.u, g.u);
        assert_eq!(back.p, g.p);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(
            solve_reference(&ReferenceConfig::new(10.0, 8, 8)),
            Err(Error::Config(_))
        ));
    }
}
