//! Shared desk-scale geometry for the integration tests.

#![allow(dead_code)]

use onewave::analysis::{q_metric, QCurve};
use onewave::{
    Epsilon, FdParams, FdSolver, Grid, Layer, OneWayResult, OneWaySolver, RunConfig, RunPlan, Seismogram,
    ShotGeometry, VelocityModel,
};

pub const SOURCE_X: f64 = 1280.0;
pub const DESK_GRID: Grid = Grid {
    dx: 10.0,
    dz: 10.0,
    nx: 256,
    nz: 100,
    dt: 0.002,
    nt: 512,
};

/// Options for one run on a layered model.
#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub grid: Grid,
    pub source_x: f64,
    pub receiver_depth: f64,
    pub delta: f64,
    pub epsilon: Epsilon,
    pub multiples: usize,
    pub transmission: bool,
    pub peak_frequency: f64,
    /// Upper frequency as a multiple of the peak frequency.
    pub f_max_ratio: f64,
    pub damping_hz: f64,
}

impl Default for Setup {
    fn default() -> Self {
        Self {
            grid: DESK_GRID,
            source_x: SOURCE_X,
            receiver_depth: 600.0,
            delta: 0.0,
            epsilon: Epsilon::Zero,
            multiples: 0,
            transmission: true,
            peak_frequency: 25.0,
            f_max_ratio: 3.0,
            damping_hz: 0.5,
        }
    }
}

impl Setup {
    pub fn plan(&self, layers: &[(f64, f64)]) -> RunPlan {
        let depth = self.grid.nz as f64 * self.grid.dz;
        let layers = layers.iter().map(|&(z, c)| Layer::new(z, c)).collect();
        let model = VelocityModel::new(layers, self.delta, 1000.0, depth).unwrap();
        let shot = ShotGeometry {
            source_x: self.source_x,
            receiver_depth: self.receiver_depth,
            peak_frequency: self.peak_frequency,
        };
        let run = RunConfig {
            epsilon: self.epsilon,
            multiples: self.multiples,
            include_transmission: self.transmission,
            omega_max: 2.0 * std::f64::consts::PI * self.f_max_ratio * self.peak_frequency,
            damping: 2.0 * std::f64::consts::PI * self.damping_hz,
            ..RunConfig::default()
        };
        RunPlan::new(model, self.grid, shot, run).unwrap()
    }

    pub fn oneway(&self, layers: &[(f64, f64)]) -> OneWayResult {
        OneWaySolver::new(self.plan(layers)).run().unwrap()
    }

    pub fn fullwave(&self, layers: &[(f64, f64)]) -> Seismogram {
        FdSolver::new(self.plan(layers), FdParams::default())
            .unwrap()
            .run()
            .unwrap()
    }

    pub fn q(&self, full: &Seismogram, layers: &[(f64, f64)]) -> QCurve {
        q_metric(full, &self.oneway(layers).total, self.source_x).unwrap()
    }
}

pub fn vm1() -> Vec<(f64, f64)> {
    vec![(0.0, 1600.0), (500.0, 2400.0)]
}

pub fn vm3() -> Vec<(f64, f64)> {
    vec![(0.0, 2400.0), (500.0, 1600.0)]
}
