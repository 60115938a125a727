//! Explicit finite-difference solver for `p_tt / c^2 - lap p = S`, used as
//! the full-wave reference.
//!
//! Second order in time, fourth order in space, with damping sponge
//! layers on all four sides. The computational grid refines the model grid
//! by an integer factor; node slowness is the cell average of `1/c^2` over
//! the same piecewise-constant cell model the one-way solver uses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{Provenance, Seismogram};
use crate::model::{on_grid, RunPlan};
use crate::spectral::ricker_source;

/// Stability limit of the scheme: `c dt sqrt(1/hx^2 + 1/hz^2) <= sqrt(3)/2`.
pub const SCHEME_BOUND: f64 = 0.866_025_403_784_438_6;

/// Fraction of [`SCHEME_BOUND`] that is accepted.
pub const CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Error)]
pub enum FdError {
    #[error("time step {dt} s violates the stability limit; use dt <= {max_dt} s")]
    Cfl { dt: f64, max_dt: f64 },
    #[error("receiver depth {0} m is not on the finite-difference grid")]
    OffGrid(f64),
    #[error("invalid finite-difference parameter: {0}")]
    Param(String),
    #[error("non-finite pressure at step {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdParams {
    /// Finite-difference cells per model cell in each direction.
    pub refine: usize,
    /// Width of each sponge layer in model cells; it keeps its physical
    /// thickness under refinement.
    pub sponge_cells: usize,
    /// Undamped medium between the surface and the top sponge, in model
    /// cells, so waves leaving the source at grazing angles do not touch it.
    pub buffer_cells: usize,
    /// Explicit time step; must divide the output sampling.
    pub dt: Option<f64>,
    /// Upper bound on the automatic time step, for accuracy.
    pub max_dt: f64,
}

impl Default for FdParams {
    fn default() -> Self {
        Self {
            refine: 4,
            sponge_cells: 50,
            buffer_cells: 20,
            dt: None,
            max_dt: 5e-4,
        }
    }
}

/// Pressure at three time levels plus the per-node coefficients.
#[derive(Debug, Clone)]
pub struct FdState {
    pub nx: usize,
    pub nz: usize,
    pub hx: f64,
    pub hz: f64,
    pub dt: f64,
    pub p_prev: Vec<f64>,
    pub p_curr: Vec<f64>,
    p_next: Vec<f64>,
    /// `c^2 dt^2` per node.
    c2dt2: Vec<f64>,
    /// `sigma dt` per node; zero outside the sponge.
    pub sigma_dt: Vec<f64>,
    /// Number of completed steps.
    pub step: usize,
}

impl FdState {
    /// `speed2` holds `c^2` per node, row-major in depth.
    pub fn new(nx: usize, nz: usize, hx: f64, hz: f64, dt: f64, speed2: &[f64], sigma_dt: Vec<f64>) -> Self {
        let n = nx * nz;
        assert_eq!(speed2.len(), n);
        assert_eq!(sigma_dt.len(), n);
        assert!(nx >= 5 && nz >= 5, "grid too small for the stencil");
        Self {
            nx,
            nz,
            hx,
            hz,
            dt,
            p_prev: vec![0.0; n],
            p_curr: vec![0.0; n],
            p_next: vec![0.0; n],
            c2dt2: speed2.iter().map(|c2| c2 * dt * dt).collect(),
            sigma_dt,
            step: 0,
        }
    }

    /// Advances `p_tt + 2 sigma p_t = c^2 lap p + c^2 S` by one step.
    /// `source` is `(node index, value)` added as a point density.
    pub fn step(&mut self, source: Option<(usize, f64)>) {
        let (nx, nz) = (self.nx, self.nz);
        let ax = 1.0 / (12.0 * self.hx * self.hx);
        let az = 1.0 / (12.0 * self.hz * self.hz);
        let cur = &self.p_curr;
        let prev = &self.p_prev;
        let coef = &self.c2dt2;
        let sig = &self.sigma_dt;
        self.p_next
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(iz, row)| {
                if iz < 2 || iz + 2 >= nz {
                    row.fill(0.0);
                    return;
                }
                let base = iz * nx;
                let line = |k: usize| &cur[k..k + nx];
                let (m2, m1, c0, p1, p2) = (
                    line(base - 2 * nx),
                    line(base - nx),
                    line(base),
                    line(base + nx),
                    line(base + 2 * nx),
                );
                let pr = &prev[base..base + nx];
                let co = &coef[base..base + nx];
                let sg = &sig[base..base + nx];
                row[..2].fill(0.0);
                row[nx - 2..].fill(0.0);
                for ix in 2..nx - 2 {
                    let p = c0[ix];
                    let lx = -c0[ix - 2] + 16.0 * c0[ix - 1] - 30.0 * p + 16.0 * c0[ix + 1] - c0[ix + 2];
                    let lz = -m2[ix] + 16.0 * m1[ix] - 30.0 * p + 16.0 * p1[ix] - p2[ix];
                    let s = sg[ix];
                    row[ix] = (2.0 * p - (1.0 - s) * pr[ix] + co[ix] * (ax * lx + az * lz)) / (1.0 + s);
                }
            });
        if let Some((k, s)) = source {
            self.p_next[k] += self.c2dt2[k] * s / (1.0 + self.sigma_dt[k]);
        }
        std::mem::swap(&mut self.p_prev, &mut self.p_curr);
        std::mem::swap(&mut self.p_curr, &mut self.p_next);
        self.step += 1;
    }

    /// Discrete energy between the two stored levels, conserved by the
    /// undamped scheme once the source is off.
    pub fn energy(&self) -> f64 {
        let (nx, nz) = (self.nx, self.nz);
        let ax = 1.0 / (12.0 * self.hx * self.hx);
        let az = 1.0 / (12.0 * self.hz * self.hz);
        let mut kinetic = 0.0;
        let mut strain = 0.0;
        for iz in 0..nz {
            for ix in 0..nx {
                let k = iz * nx + ix;
                let c2dt2 = self.c2dt2[k];
                if c2dt2 == 0.0 {
                    continue;
                }
                let dp = self.p_curr[k] - self.p_prev[k];
                kinetic += dp * dp / c2dt2;
                if (2..nx - 2).contains(&ix) && (2..nz - 2).contains(&iz) {
                    let q = &self.p_prev;
                    let lx = -q[k - 2] + 16.0 * q[k - 1] - 30.0 * q[k] + 16.0 * q[k + 1] - q[k + 2];
                    let lz = -q[k - 2 * nx] + 16.0 * q[k - nx] - 30.0 * q[k] + 16.0 * q[k + nx] - q[k + 2 * nx];
                    strain -= self.p_curr[k] * (ax * lx + az * lz);
                }
            }
        }
        kinetic + strain
    }

    pub fn max_abs(&self) -> f64 {
        self.p_curr.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Full-wave reference solver for one shot of a [`RunPlan`].
#[derive(Debug, Clone)]
pub struct FdSolver {
    plan: RunPlan,
    params: FdParams,
    hx: f64,
    hz: f64,
    dt: f64,
    substeps: usize,
    nx: usize,
    nz: usize,
    pad: usize,
    /// Rows above `z = 0`.
    top: usize,
    speed2: Vec<f64>,
    sigma_dt: Vec<f64>,
}

fn cell_average_slowness2(cells: &[f64], dz: f64, above: f64, below: f64, z0: f64, z1: f64) -> f64 {
    let depth = cells.len() as f64 * dz;
    let mut total = 0.0;
    if z0 < 0.0 {
        total += (z1.min(0.0) - z0) / (above * above);
    }
    if z1 > depth {
        total += (z1 - z0.max(depth)) / (below * below);
    }
    let (a, b) = (z0.max(0.0), z1.min(depth));
    if b > a {
        let first = (a / dz).floor() as usize;
        let last = ((b / dz).ceil() as usize).min(cells.len());
        for (l, c) in cells.iter().enumerate().take(last).skip(first) {
            let lo = (l as f64 * dz).max(a);
            let hi = ((l + 1) as f64 * dz).min(b);
            if hi > lo {
                total += (hi - lo) / (c * c);
            }
        }
    }
    total / (z1 - z0)
}

impl FdSolver {
    pub fn new(plan: RunPlan, params: FdParams) -> Result<Self, FdError> {
        if params.refine == 0 {
            return Err(FdError::Param("refine must be >= 1".into()));
        }
        if params.sponge_cells < 4 {
            return Err(FdError::Param("sponge_cells must be >= 4".into()));
        }
        let g = plan.grid;
        let hx = g.dx / params.refine as f64;
        let hz = g.dz / params.refine as f64;
        let model = &plan.model;
        let c_max = model.max_speed();
        let max_dt = CFL_SAFETY * SCHEME_BOUND / (c_max * (1.0 / (hx * hx) + 1.0 / (hz * hz)).sqrt());
        let (dt, substeps) = match params.dt {
            Some(dt) => {
                if !(dt > 0.0) || dt > max_dt {
                    return Err(FdError::Cfl { dt, max_dt });
                }
                let m = (g.dt / dt).round();
                if m < 1.0 || ((g.dt / dt) - m).abs() > 1e-6 {
                    return Err(FdError::Param(format!(
                        "dt = {dt} must divide the output sampling {}",
                        g.dt
                    )));
                }
                (dt, m as usize)
            }
            None => {
                let limit = max_dt.min(params.max_dt);
                let m = (g.dt / limit).ceil().max(1.0) as usize;
                (g.dt / m as f64, m)
            }
        };
        let pad = params.sponge_cells * params.refine;
        // One extra column closes the interior so it is symmetric about its
        // centre, like the depth axis.
        let nx = g.nx * params.refine + 1 + 2 * pad;
        let nz_int = g.nz * params.refine + 1;
        let top = pad + params.buffer_cells * params.refine;
        let nz = nz_int + top + pad;
        let cells = plan.cell_speeds();
        let (above, below) = (model.speed_above(), model.speed_below());
        let mut speed2 = vec![0.0; nx * nz];
        let width = pad as f64;
        let sigma_max = 1.5 * c_max * (1e5f64).ln();
        let mut sigma_dt = vec![0.0; nx * nz];
        for iz in 0..nz {
            let z = (iz as f64 - top as f64) * hz;
            let s2 = cell_average_slowness2(&cells, g.dz, above, below, z - 0.5 * hz, z + 0.5 * hz);
            let dz_in = if iz < pad {
                (pad - iz) as f64
            } else if iz >= top + nz_int {
                (iz - (top + nz_int - 1)) as f64
            } else {
                0.0
            };
            for ix in 0..nx {
                speed2[iz * nx + ix] = 1.0 / s2;
                let dx_in = if ix < pad {
                    (pad - ix) as f64
                } else if ix >= nx - pad {
                    (ix - (nx - pad - 1)) as f64
                } else {
                    0.0
                };
                let sigma = sigma_max / (width * hx) * (dx_in / width).powi(2)
                    + sigma_max / (width * hz) * (dz_in / width).powi(2);
                sigma_dt[iz * nx + ix] = sigma * dt;
            }
        }
        Ok(Self {
            plan,
            params,
            hx,
            hz,
            dt,
            substeps,
            nx,
            nz,
            pad,
            top,
            speed2,
            sigma_dt,
        })
    }

    pub fn plan(&self) -> &RunPlan {
        &self.plan
    }

    pub fn params(&self) -> &FdParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Finite-difference steps per output sample.
    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.nz)
    }

    /// Node index of the model point `(x, z)`; both must be on the grid.
    pub fn node(&self, x: f64, z: f64) -> Result<usize, FdError> {
        if !on_grid(z, self.hz) || z < 0.0 || z > self.plan.model.depth() + 1e-9 {
            return Err(FdError::OffGrid(z));
        }
        if !on_grid(x, self.hx) || x < 0.0 || x >= self.plan.grid.width() {
            return Err(FdError::Param(format!("x = {x} is not on the grid")));
        }
        let ix = self.pad + (x / self.hx).round() as usize;
        let iz = self.top + (z / self.hz).round() as usize;
        Ok(iz * self.nx + ix)
    }

    pub fn new_state(&self) -> FdState {
        FdState::new(self.nx, self.nz, self.hx, self.hz, self.dt, &self.speed2, self.sigma_dt.clone())
    }

    /// Time-stepping driver. The source at `source` (node index) has
    /// strength `rho * S(t)` scaled by `amplitude`; `record` gets the state
    /// at every output time `it * dt_out`.
    pub fn simulate(
        &self,
        source: usize,
        amplitude: f64,
        mut record: impl FnMut(usize, &FdState),
    ) -> Result<(), FdError> {
        let g = self.plan.grid;
        let nu = self.plan.shot.peak_frequency;
        let strength = amplitude * self.plan.model.density() / (self.hx * self.hz);
        let mut state = self.new_state();
        for it in 0..g.nt {
            record(it, &state);
            if it + 1 == g.nt {
                break;
            }
            for _ in 0..self.substeps {
                let t = state.step as f64 * self.dt;
                state.step(Some((source, strength * ricker_source(t, nu))));
            }
            if !state.p_curr[source].is_finite() {
                return Err(FdError::NonFinite(state.step));
            }
        }
        if state.p_curr.iter().any(|v| !v.is_finite()) {
            return Err(FdError::NonFinite(state.step));
        }
        Ok(())
    }

    /// Seismograms at each of `depths`, receivers at every model column.
    pub fn record_seismograms(&self, depths: &[f64]) -> Result<Vec<Seismogram>, FdError> {
        let g = self.plan.grid;
        let rows: Vec<usize> = depths
            .iter()
            .map(|&z| self.node(0.0, z))
            .collect::<Result<_, _>>()?;
        let source = self.node(self.plan.shot.source_x, 0.0)?;
        let mut out: Vec<Seismogram> = depths
            .iter()
            .map(|&z| Seismogram::zeros(g.nt, g.nx, g.dt, g.dx, z, Provenance::FullWave))
            .collect();
        let refine = self.params.refine;
        self.simulate(source, 1.0, |it, state| {
            for (s, &row0) in out.iter_mut().zip(&rows) {
                for ix in 0..g.nx {
                    s.values[it * g.nx + ix] = state.p_curr[row0 + ix * refine];
                }
            }
        })?;
        Ok(out)
    }

    /// Seismogram at the plan's receiver depth.
    pub fn run(&self) -> Result<Seismogram, FdError> {
        Ok(self
            .record_seismograms(&[self.plan.shot.receiver_depth])?
            .remove(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Grid, RunConfig, ShotGeometry, VelocityModel};

    fn small_plan(speed: f64, receiver_depth: f64) -> RunPlan {
        let model = VelocityModel::homogeneous(speed, 1000.0, 400.0).unwrap();
        let grid = Grid {
            dx: 10.0,
            dz: 10.0,
            nx: 64,
            nz: 40,
            dt: 0.002,
            nt: 128,
        };
        let shot = ShotGeometry {
            source_x: 320.0,
            receiver_depth,
            peak_frequency: 15.0,
        };
        RunPlan::new(model, grid, shot, RunConfig::default()).unwrap()
    }

    fn params() -> FdParams {
        FdParams {
            refine: 1,
            sponge_cells: 20,
            ..FdParams::default()
        }
    }

    #[test]
    fn zero_source_stays_zero() {
        let s = FdSolver::new(small_plan(2000.0, 100.0), params()).unwrap();
        let src = s.node(320.0, 0.0).unwrap();
        let mut max = 0.0f64;
        s.simulate(src, 0.0, |_, st| max = max.max(st.max_abs())).unwrap();
        assert_eq!(max, 0.0);
    }

    #[test]
    fn cfl_violation_reports_bound() {
        let p = FdParams {
            dt: Some(0.004),
            ..params()
        };
        match FdSolver::new(small_plan(2000.0, 100.0), p) {
            Err(FdError::Cfl { max_dt, .. }) => {
                let expected = 0.9 * SCHEME_BOUND / (2000.0 * (2.0f64 / 100.0).sqrt());
                assert!((max_dt - expected).abs() < 1e-15);
            }
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn off_grid_receiver_rejected() {
        let s = FdSolver::new(small_plan(2000.0, 100.0), params()).unwrap();
        assert!(matches!(s.record_seismograms(&[103.0]), Err(FdError::OffGrid(_))));
    }

    #[test]
    fn peak_arrival_matches_ray_time() {
        let s = FdSolver::new(small_plan(2000.0, 200.0), params()).unwrap();
        let seis = s.run().unwrap();
        let times = crate::analysis::peak_times(&seis);
        // Reference: the same receiver/source pair with the pulse delay.
        let delay0 = times[32] - 200.0 / 2000.0;
        for ix in [32usize, 36, 40, 44] {
            let r = ((ix as f64 * 10.0 - 320.0).powi(2) + 200.0f64.powi(2)).sqrt();
            let predicted = delay0 + r / 2000.0;
            assert!((times[ix] - predicted).abs() <= 1.5 * 0.002, "ix {ix}: {} vs {predicted}", times[ix]);
        }
    }

    #[test]
    fn surface_section_is_symmetric_about_shot() {
        let s = FdSolver::new(small_plan(2000.0, 0.0), params()).unwrap();
        let seis = s.run().unwrap();
        let peak = seis.max_abs();
        for d in 1..20 {
            for it in 0..seis.nt {
                let a = seis.at(it, 32 - d);
                let b = seis.at(it, 32 + d);
                assert!((a - b).abs() <= 1e-10 * peak);
            }
        }
    }

    #[test]
    fn linear_in_source() {
        let s = FdSolver::new(small_plan(2000.0, 100.0), params()).unwrap();
        let src = s.node(320.0, 0.0).unwrap();
        let probe = s.node(360.0, 100.0).unwrap();
        let mut one = Vec::new();
        let mut two = Vec::new();
        s.simulate(src, 1.0, |_, st| one.push(st.p_curr[probe])).unwrap();
        s.simulate(src, 2.0, |_, st| two.push(st.p_curr[probe])).unwrap();
        let peak = one.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in one.iter().zip(&two) {
            assert!((2.0 * a - b).abs() <= 1e-12 * peak);
        }
    }

    #[test]
    fn reciprocity() {
        let s = FdSolver::new(small_plan(2000.0, 100.0), params()).unwrap();
        let a = s.node(280.0, 50.0).unwrap();
        let b = s.node(370.0, 140.0).unwrap();
        let mut ab = Vec::new();
        let mut ba = Vec::new();
        s.simulate(a, 1.0, |_, st| ab.push(st.p_curr[b])).unwrap();
        s.simulate(b, 1.0, |_, st| ba.push(st.p_curr[a])).unwrap();
        let peak = ab.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in ab.iter().zip(&ba) {
            assert!((x - y).abs() <= 1e-6 * peak);
        }
    }

    #[test]
    fn energy_conserved_without_sponge_after_source() {
        let s = FdSolver::new(small_plan(2000.0, 100.0), params()).unwrap();
        let mut state = FdState::new(
            s.nx,
            s.nz,
            s.hx,
            s.hz,
            s.dt,
            &s.speed2,
            vec![0.0; s.nx * s.nz],
        );
        let src = s.node(320.0, 200.0).unwrap();
        let nsrc = (0.2 / s.dt) as usize;
        for n in 0..nsrc {
            state.step(Some((src, 1e3 * ricker_source(n as f64 * s.dt, 15.0))));
        }
        let e0 = state.energy();
        assert!(e0 > 0.0);
        for _ in 0..200 {
            state.step(None);
            let e = state.energy();
            assert!((e - e0).abs() <= 1e-9 * e0, "{e} vs {e0}");
        }
    }

    #[test]
    fn energy_decays_with_sponge() {
        let p = FdParams {
            sponge_cells: 50,
            ..params()
        };
        let s = FdSolver::new(small_plan(2000.0, 100.0), p).unwrap();
        let mut state = s.new_state();
        let src = s.node(320.0, 200.0).unwrap();
        let nsrc = (0.2 / s.dt) as usize;
        for n in 0..nsrc {
            state.step(Some((src, 1e3 * ricker_source(n as f64 * s.dt, 15.0))));
        }
        let mut prev = state.energy();
        let e0 = prev;
        for _ in 0..1500 {
            state.step(None);
            let e = state.energy();
            assert!(e <= prev * (1.0 + 1e-12) + 1e-30);
            prev = e;
        }
        assert!(prev < 1e-4 * e0, "{prev} vs {e0}");
    }

    #[test]
    fn slowness_average_places_interface_on_node() {
        let cells = [1600.0, 1600.0, 2400.0, 2400.0];
        let s = cell_average_slowness2(&cells, 10.0, 1600.0, 2400.0, 15.0, 25.0);
        let expected = 0.5 / (1600.0 * 1600.0) + 0.5 / (2400.0 * 2400.0);
        assert!((s - expected).abs() < 1e-18);
        let s = cell_average_slowness2(&cells, 10.0, 1000.0, 2400.0, -5.0, 5.0);
        let expected = 0.5 / 1e6 + 0.5 / (1600.0 * 1600.0);
        assert!((s - expected).abs() < 1e-18);
    }
}
