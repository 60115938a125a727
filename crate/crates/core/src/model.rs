//! Velocity models, grids, shot geometry and run configuration.
//!
//! Every type here is plain data; [`RunPlan::new`] checks the cross-field
//! invariants once and the rest of the crate relies on them afterwards.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used when comparing lengths that must coincide.
const LENGTH_RTOL: f64 = 1e-9;

/// One invariant that failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid configuration: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("depth {z} m outside the model range [0, {max}] m")]
    OutOfDomain { z: f64, max: f64 },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl ModelError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ModelError::Invalid(v) => v,
            ModelError::OutOfDomain { .. } => &[],
        }
    }
}

#[derive(Default)]
struct Checker(Vec<Violation>);

impl Checker {
    fn check(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.0.push(Violation {
                field: field.to_string(),
                message: message.into(),
            });
        }
    }

    fn finish(self) -> Result<(), ModelError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(self.0))
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= LENGTH_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// Returns true when `x / step` is an integer up to rounding.
pub(crate) fn on_grid(x: f64, step: f64) -> bool {
    let r = x / step;
    (r - r.round()).abs() <= 1e-6
}

/// A homogeneous layer starting at depth `top` (meters) with speed `speed` (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub top: f64,
    pub speed: f64,
}

impl Layer {
    pub fn new(top: f64, speed: f64) -> Self {
        Self { top, speed }
    }
}

/// Stratified speed profile `c(z)` with constant density.
///
/// The first layer starts at the surface; each later layer's top is an
/// interface. Inside `[z_i - delta/2, z_i + delta/2]` the speed varies
/// linearly between the two adjacent layer speeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityModel {
    layers: Vec<Layer>,
    smoothing_width: f64,
    density: f64,
    depth: f64,
    speed_above: f64,
    speed_below: f64,
}

impl VelocityModel {
    /// Builds a model whose surrounding half-spaces continue the first and
    /// last layers.
    pub fn new(
        layers: Vec<Layer>,
        smoothing_width: f64,
        density: f64,
        depth: f64,
    ) -> Result<Self, ModelError> {
        let above = layers.first().map_or(0.0, |l| l.speed);
        let below = layers.last().map_or(0.0, |l| l.speed);
        Self::with_boundary_speeds(layers, smoothing_width, density, depth, above, below)
    }

    pub fn with_boundary_speeds(
        layers: Vec<Layer>,
        smoothing_width: f64,
        density: f64,
        depth: f64,
        speed_above: f64,
        speed_below: f64,
    ) -> Result<Self, ModelError> {
        let model = Self {
            layers,
            smoothing_width,
            density,
            depth,
            speed_above,
            speed_below,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn homogeneous(speed: f64, density: f64, depth: f64) -> Result<Self, ModelError> {
        Self::new(vec![Layer::new(0.0, speed)], 0.0, density, depth)
    }

    /// Two layers split at `interface` with a transition band of width `delta`.
    pub fn two_layer(
        upper: f64,
        lower: f64,
        interface: f64,
        delta: f64,
        density: f64,
        depth: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            vec![Layer::new(0.0, upper), Layer::new(interface, lower)],
            delta,
            density,
            depth,
        )
    }

    fn validate(&self) -> Result<(), ModelError> {
        let mut c = Checker::default();
        c.check(positive(self.depth), "model.depth", format!("must be > 0, got {}", self.depth));
        c.check(positive(self.density), "model.rho", format!("must be > 0, got {}", self.density));
        c.check(
            self.smoothing_width.is_finite() && self.smoothing_width >= 0.0,
            "model.delta",
            format!("must be >= 0, got {}", self.smoothing_width),
        );
        c.check(
            positive(self.speed_above),
            "model.c_sup",
            format!("must be > 0, got {}", self.speed_above),
        );
        c.check(
            positive(self.speed_below),
            "model.c_inf",
            format!("must be > 0, got {}", self.speed_below),
        );
        if self.layers.is_empty() {
            c.check(false, "model.layers", "at least one layer is required");
            return c.finish();
        }
        c.check(
            self.layers[0].top == 0.0,
            "model.layers",
            format!("first layer must start at depth 0, got {}", self.layers[0].top),
        );
        for (i, layer) in self.layers.iter().enumerate() {
            c.check(
                positive(layer.speed),
                "model.layers",
                format!("speed of layer {i} must be > 0, got {}", layer.speed),
            );
            if i > 0 {
                let prev = self.layers[i - 1].top;
                c.check(
                    layer.top > prev,
                    "model.layers",
                    format!("layer tops must increase strictly ({} after {})", layer.top, prev),
                );
                c.check(
                    layer.top > 0.0 && layer.top < self.depth,
                    "model.layers",
                    format!("interface {} must lie in (0, {})", layer.top, self.depth),
                );
            }
        }
        if self.smoothing_width > 0.0 {
            let min_thickness = self.min_layer_thickness();
            c.check(
                self.smoothing_width <= min_thickness,
                "model.delta",
                format!(
                    "must not exceed the thinnest layer ({min_thickness} m), got {}",
                    self.smoothing_width
                ),
            );
        }
        c.finish()
    }

    fn min_layer_thickness(&self) -> f64 {
        let mut tops: Vec<f64> = self.layers.iter().map(|l| l.top).collect();
        tops.push(self.depth);
        tops.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn smoothing_width(&self) -> f64 {
        self.smoothing_width
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn speed_above(&self) -> f64 {
        self.speed_above
    }

    pub fn speed_below(&self) -> f64 {
        self.speed_below
    }

    /// Same profile with a different constant density.
    pub fn with_density(&self, density: f64) -> Result<Self, ModelError> {
        let mut m = self.clone();
        m.density = density;
        m.validate()?;
        Ok(m)
    }

    /// Speed at depth `z`.
    pub fn evaluate_speed(&self, z: f64) -> Result<f64, ModelError> {
        if !(0.0..=self.depth).contains(&z) {
            return Err(ModelError::OutOfDomain { z, max: self.depth });
        }
        Ok(self.speed_unchecked(z))
    }

    fn speed_unchecked(&self, z: f64) -> f64 {
        let half = 0.5 * self.smoothing_width;
        for i in 1..self.layers.len() {
            let zi = self.layers[i].top;
            if half > 0.0 && (z - zi).abs() <= half {
                let (c0, c1) = (self.layers[i - 1].speed, self.layers[i].speed);
                return c0 + (c1 - c0) * (z - (zi - half)) / self.smoothing_width;
            }
        }
        self.layers
            .iter()
            .rev()
            .find(|l| l.top <= z)
            .unwrap_or(&self.layers[0])
            .speed
    }

    /// Speeds of the `nz` depth cells `[l dz, (l+1) dz]`, sampled at the cell
    /// midpoints. Both solvers discretize the medium through this profile.
    pub fn cell_speeds(&self, dz: f64, nz: usize) -> Vec<f64> {
        (0..nz)
            .map(|l| self.speed_unchecked(((l as f64 + 0.5) * dz).min(self.depth)))
            .collect()
    }

    pub fn max_speed(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.speed)
            .chain([self.speed_above, self.speed_below])
            .fold(0.0, f64::max)
    }

    pub fn min_speed(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.speed)
            .chain([self.speed_above, self.speed_below])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Sampling of the computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub dx: f64,
    pub dz: f64,
    pub nx: usize,
    pub nz: usize,
    pub dt: f64,
    pub nt: usize,
}

impl Grid {
    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn duration(&self) -> f64 {
        self.nt as f64 * self.dt
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    fn check(&self, c: &mut Checker) {
        c.check(positive(self.dx), "grid.dx", format!("must be > 0, got {}", self.dx));
        c.check(positive(self.dz), "grid.dz", format!("must be > 0, got {}", self.dz));
        c.check(positive(self.dt), "grid.dt", format!("must be > 0, got {}", self.dt));
        c.check(
            self.nx >= 2 && self.nx.is_power_of_two(),
            "grid.nx",
            format!("must be a power of two, got {}", self.nx),
        );
        c.check(
            self.nt >= 4 && self.nt.is_power_of_two(),
            "grid.nt",
            format!("must be a power of two, got {}", self.nt),
        );
        c.check(self.nz >= 1, "grid.nz", "must be >= 1");
    }
}

/// Source and receiver placement. The source sits at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotGeometry {
    pub source_x: f64,
    pub receiver_depth: f64,
    pub peak_frequency: f64,
}

/// Placement of the transmission operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Epsilon {
    /// Transmission acts on the right-hand side (`epsilon = 0`).
    Zero,
    /// Transmission is folded into the propagator (`epsilon = 1`).
    One,
}

impl Epsilon {
    pub fn from_index(v: u8) -> Option<Self> {
        match v {
            0 => Some(Epsilon::Zero),
            1 => Some(Epsilon::One),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Epsilon::Zero => 0,
            Epsilon::One => 1,
        }
    }
}

/// Numerical options of a one-way run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub epsilon: Epsilon,
    /// Number of internal multiples `N`; terms up to `j = 2N + 1` are summed.
    pub multiples: usize,
    /// Upper end of the frequency window, rad/s.
    pub omega_max: f64,
    pub include_transmission: bool,
    /// Propagation angle beyond which components are removed, degrees.
    pub angle_cutoff: f64,
    /// Width of the cosine ramp below `angle_cutoff`, degrees.
    pub taper_width: f64,
    /// Imaginary frequency shift `eta` (rad/s); 0 disables it.
    pub damping: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: Epsilon::Zero,
            multiples: 0,
            omega_max: 2.0 * std::f64::consts::PI * 75.0,
            include_transmission: true,
            angle_cutoff: 85.0,
            taper_width: 5.0,
            damping: 2.0 * std::f64::consts::PI * 0.5,
        }
    }
}

impl RunConfig {
    fn check(&self, c: &mut Checker) {
        c.check(
            positive(self.omega_max),
            "run.f_max",
            format!("must be > 0, got {} rad/s", self.omega_max),
        );
        c.check(
            self.angle_cutoff > 0.0 && self.angle_cutoff < 90.0,
            "run.angle_cutoff",
            format!("must lie in (0, 90) degrees, got {}", self.angle_cutoff),
        );
        c.check(
            self.taper_width >= 0.0 && self.taper_width < self.angle_cutoff,
            "run.taper_width",
            format!(
                "must lie in [0, angle_cutoff = {}), got {}",
                self.angle_cutoff, self.taper_width
            ),
        );
        c.check(
            self.damping.is_finite() && self.damping >= 0.0,
            "run.damping",
            format!("must be >= 0, got {}", self.damping),
        );
    }
}

/// A validated combination of model, grid, geometry and options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub model: VelocityModel,
    pub grid: Grid,
    pub shot: ShotGeometry,
    pub run: RunConfig,
}

impl RunPlan {
    /// Checks every cross-field invariant and reports all violations at once.
    pub fn new(
        model: VelocityModel,
        grid: Grid,
        shot: ShotGeometry,
        run: RunConfig,
    ) -> Result<Self, ModelError> {
        let mut c = Checker::default();
        grid.check(&mut c);
        run.check(&mut c);
        if c.0.is_empty() {
            c.check(
                close(grid.nz as f64 * grid.dz, model.depth()),
                "grid.nz",
                format!(
                    "nz * dz = {} must equal the model depth {}",
                    grid.nz as f64 * grid.dz,
                    model.depth()
                ),
            );
            if model.smoothing_width() > 0.0 {
                c.check(
                    close(grid.dz, model.smoothing_width()),
                    "grid.dz",
                    format!(
                        "must equal the smoothing width delta = {} when delta > 0, got {}",
                        model.smoothing_width(),
                        grid.dz
                    ),
                );
            }
            let nyquist = std::f64::consts::PI / grid.dt;
            c.check(
                run.omega_max < nyquist,
                "run.f_max",
                format!(
                    "must stay below the Nyquist frequency {} Hz",
                    0.5 / grid.dt
                ),
            );
            c.check(
                shot.source_x >= 0.0 && shot.source_x < grid.width(),
                "shot.source_x",
                format!("must lie in [0, {}), got {}", grid.width(), shot.source_x),
            );
            c.check(
                on_grid(shot.source_x, grid.dx),
                "shot.source_x",
                format!("must be a multiple of dx = {}", grid.dx),
            );
            c.check(
                shot.receiver_depth >= 0.0 && shot.receiver_depth <= model.depth(),
                "shot.receiver_depth",
                format!(
                    "must lie in [0, {}], got {}",
                    model.depth(),
                    shot.receiver_depth
                ),
            );
            c.check(
                on_grid(shot.receiver_depth, grid.dz),
                "shot.receiver_depth",
                format!("must be a multiple of dz = {}", grid.dz),
            );
        }
        c.check(
            positive(shot.peak_frequency),
            "shot.peak_frequency",
            format!("must be > 0, got {}", shot.peak_frequency),
        );
        c.finish()?;
        Ok(Self {
            model,
            grid,
            shot,
            run,
        })
    }

    pub fn source_index(&self) -> usize {
        (self.shot.source_x / self.grid.dx).round() as usize
    }

    pub fn receiver_node(&self) -> usize {
        (self.shot.receiver_depth / self.grid.dz).round() as usize
    }

    pub fn cell_speeds(&self) -> Vec<f64> {
        self.model.cell_speeds(self.grid.dz, self.grid.nz)
    }
}
