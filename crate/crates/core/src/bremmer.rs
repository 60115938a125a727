//! Bremmer-series propagation in a stratified medium.
//!
//! Fields live on depth nodes `l = 0..=nz` (depth `l dz`) for every
//! wavenumber. Cell `l` spans nodes `l` and `l + 1`. Going down from node
//! `l` to `l + 1`:
//!
//! `D(l+1) = g_l [ t_down(l) D(l) - tau(l) U_prev(l) ]`
//!
//! and going up from node `l + 1` to `l`:
//!
//! `U(l) = g_l [ t_up(l+1) U(l+1) + tau(l+1) D(l+1) ]`
//!
//! where `g_l` is the phase shift through cell `l` with the angular mask and
//! `tau(l) = -ln(gamma_below / gamma_above) / 2` is the interface symbol.
//! With `epsilon = 1` the transmission factors are `exp(+-tau)`; with
//! `epsilon = 0` they are `1 +- tau`.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{Provenance, Seismogram, Snapshot};
use crate::model::{Epsilon, RunPlan};
use crate::spectral::{FrequencyWindow, SpatialTransform, SpectralError, TimeSignal, TimeTransform};
use crate::symbols::{interface_symbols, slowness, AngleTaper, SymbolError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("requested multiple {requested} but only {available} were computed")]
    TooFewMultiples { requested: usize, available: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Per-cell propagation row: `exp(-i dz kz)` where the angle passes, else 0.
#[derive(Debug, Clone)]
struct CellRow {
    prop: Vec<Complex64>,
    gamma: Vec<Complex64>,
    pass: Vec<bool>,
}

/// Coupling at one node between two different cells.
#[derive(Debug, Clone)]
struct NodeRow {
    /// Reflection symbol `tau` (equal to `t0_dz`).
    tau_r: Vec<Complex64>,
    /// Transmission symbol; zero when transmission is disabled.
    tau_t: Vec<Complex64>,
    t_down: Vec<Complex64>,
    t_up: Vec<Complex64>,
}

/// Propagation and coupling symbols of one temporal frequency.
#[derive(Debug, Clone)]
pub struct Medium {
    nx: usize,
    nz: usize,
    epsilon: Epsilon,
    cells: Vec<CellRow>,
    cell_of: Vec<usize>,
    nodes: Vec<NodeRow>,
    node_of: Vec<Option<usize>>,
}

/// Inputs shared by every frequency of a run.
#[derive(Debug, Clone)]
pub struct MediumSpec<'a> {
    /// Speeds of the `nz` cells.
    pub cells: &'a [f64],
    /// Speed of the half-space below the last node.
    pub speed_below: f64,
    pub kx: &'a [f64],
    pub dz: f64,
    pub damping: f64,
    pub taper: AngleTaper,
    pub epsilon: Epsilon,
    pub include_transmission: bool,
}

impl Medium {
    pub fn new(spec: &MediumSpec<'_>, omega: f64) -> Result<Self, SymbolError> {
        let nx = spec.kx.len();
        let nz = spec.cells.len();
        let mut speeds: Vec<f64> = Vec::new();
        let index_of = |c: f64, speeds: &mut Vec<f64>| match speeds.iter().position(|&s| s == c) {
            Some(i) => i,
            None => {
                speeds.push(c);
                speeds.len() - 1
            }
        };
        let cell_of: Vec<usize> = spec.cells.iter().map(|&c| index_of(c, &mut speeds)).collect();
        let below = index_of(spec.speed_below, &mut speeds);

        let mut cells = Vec::with_capacity(speeds.len());
        for &c in &speeds {
            let mut row = CellRow {
                prop: Vec::with_capacity(nx),
                gamma: Vec::with_capacity(nx),
                pass: Vec::with_capacity(nx),
            };
            for &kx in spec.kx {
                let s = slowness(c, kx, omega, spec.damping)?;
                let pass = spec.taper.passes(kx, c, omega) && !s.floored;
                row.gamma.push(s.gamma0);
                row.pass.push(pass);
                row.prop.push(if pass { s.phase(spec.dz) } else { ZERO });
            }
            cells.push(row);
        }

        let mut nodes = Vec::new();
        let mut pair_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut node_of = vec![None; nz + 1];
        for (l, slot) in node_of.iter_mut().enumerate().skip(1) {
            let above = cell_of[l - 1];
            let below = if l < nz { cell_of[l] } else { below };
            if above == below {
                continue;
            }
            if let Some(&i) = pair_index.get(&(above, below)) {
                *slot = Some(i);
                continue;
            }
            let (a, b) = (&cells[above], &cells[below]);
            let mut row = NodeRow {
                tau_r: vec![ZERO; nx],
                tau_t: vec![ZERO; nx],
                t_down: vec![Complex64::new(1.0, 0.0); nx],
                t_up: vec![Complex64::new(1.0, 0.0); nx],
            };
            for i in 0..nx {
                if !(a.pass[i] && b.pass[i]) {
                    row.t_down[i] = ZERO;
                    row.t_up[i] = ZERO;
                    continue;
                }
                let tau = interface_symbols(a.gamma[i], b.gamma[i])?.t0_dz;
                row.tau_r[i] = tau;
                let tt = if spec.include_transmission { tau } else { ZERO };
                row.tau_t[i] = tt;
                match spec.epsilon {
                    Epsilon::Zero => {
                        row.t_down[i] = 1.0 + tt;
                        row.t_up[i] = 1.0 - tt;
                    }
                    Epsilon::One => {
                        row.t_down[i] = tt.exp();
                        row.t_up[i] = (-tt).exp();
                    }
                }
            }
            pair_index.insert((above, below), nodes.len());
            *slot = Some(nodes.len());
            nodes.push(row);
        }
        Ok(Self {
            nx,
            nz,
            epsilon: spec.epsilon,
            cells,
            cell_of,
            nodes,
            node_of,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    /// Vertical slowness in cell `l`.
    pub fn gamma(&self, l: usize) -> &[Complex64] {
        &self.cells[self.cell_of[l]].gamma
    }

    /// Masked phase factor through cell `l`.
    pub fn propagator(&self, l: usize) -> &[Complex64] {
        &self.cells[self.cell_of[l]].prop
    }

    /// Angular pass mask of cell `l`.
    pub fn passes(&self, l: usize) -> &[bool] {
        &self.cells[self.cell_of[l]].pass
    }

    /// Reflection symbol at node `l`, if the node carries an interface.
    pub fn tau(&self, l: usize) -> Option<&[Complex64]> {
        self.node_of[l].map(|i| self.nodes[i].tau_r.as_slice())
    }

    /// Nodes that carry a nonzero coupling.
    pub fn interfaces(&self) -> Vec<usize> {
        (0..=self.nz).filter(|&l| self.node_of[l].is_some()).collect()
    }

    /// Down-going source `S+ = taper q / (2 gamma)` from the transformed
    /// source row `q_row` (already scaled by the temporal source spectrum).
    pub fn downgoing_source(&self, q_row: &[Complex64], taper: &[f64]) -> Vec<Complex64> {
        let row = &self.cells[self.cell_of[0]];
        (0..self.nx)
            .map(|i| {
                if row.pass[i] && taper[i] != 0.0 {
                    q_row[i] * taper[i] / (2.0 * row.gamma[i])
                } else {
                    ZERO
                }
            })
            .collect()
    }
}

fn idx(nx: usize, l: usize, i: usize) -> usize {
    l * nx + i
}

/// One term of the series over `(depth node, kx)`, row-major in depth.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    pub j: usize,
    pub down: Vec<Complex64>,
    pub up: Vec<Complex64>,
}

impl SeriesTerm {
    pub fn down_at(&self, nx: usize, l: usize) -> &[Complex64] {
        &self.down[l * nx..(l + 1) * nx]
    }

    pub fn up_at(&self, nx: usize, l: usize) -> &[Complex64] {
        &self.up[l * nx..(l + 1) * nx]
    }
}

/// Leading term: the source marched downward with the transmission
/// exponential when `epsilon = 1`.
pub fn first_term_downgoing(s_plus: &[Complex64], medium: &Medium) -> SeriesTerm {
    bremmer_terms(s_plus, medium, 0).remove(0)
}

/// Terms `j = 0..=j_max` of the series, each computed only from term `j - 1`.
///
/// `V+^(j)(l+1) = g_l [G+ V+^(j)(l) + (1 - eps) tau V+^(j-1)(l) - tau V-^(j-1)(l)]`
/// `V-^(j)(l) = g_l [G- V-^(j)(l+1) + tau V+^(j-1)(l+1) - (1 - eps) tau V-^(j-1)(l+1)]`
///
/// with `G+- = exp(+-tau)` for `epsilon = 1` and `1` for `epsilon = 0`.
/// Contributions with an exactly zero coefficient are skipped so that
/// vanishing terms stay exactly zero.
pub fn bremmer_terms(s_plus: &[Complex64], medium: &Medium, j_max: usize) -> Vec<SeriesTerm> {
    let nx = medium.nx;
    let nz = medium.nz;
    let size = (nz + 1) * nx;
    let rhs_transmission = medium.epsilon == Epsilon::Zero;
    let mut terms: Vec<SeriesTerm> = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let mut down = vec![ZERO; size];
        let mut up = vec![ZERO; size];
        let prev = if j > 0 { Some(&terms[j - 1]) } else { None };
        if j == 0 {
            down[..nx].copy_from_slice(s_plus);
        }
        for l in 0..nz {
            let g = medium.propagator(l);
            let node = medium.node_of[l].map(|n| &medium.nodes[n]);
            for i in 0..nx {
                let here = down[idx(nx, l, i)];
                let mut inner = match (node, medium.epsilon) {
                    (Some(n), Epsilon::One) => here * n.t_down[i],
                    _ => here,
                };
                if let (Some(n), Some(p)) = (node, prev) {
                    let tt = n.tau_t[i];
                    let tr = n.tau_r[i];
                    let vp = p.down[idx(nx, l, i)];
                    let vm = p.up[idx(nx, l, i)];
                    if rhs_transmission && tt != ZERO && vp != ZERO {
                        inner += tt * vp;
                    }
                    if tr != ZERO && vm != ZERO {
                        inner -= tr * vm;
                    }
                }
                down[idx(nx, l + 1, i)] = if inner == ZERO { ZERO } else { g[i] * inner };
            }
        }
        for l in (0..nz).rev() {
            let g = medium.propagator(l);
            let node = medium.node_of[l + 1].map(|n| &medium.nodes[n]);
            for i in 0..nx {
                let here = up[idx(nx, l + 1, i)];
                let mut inner = match (node, medium.epsilon) {
                    (Some(n), Epsilon::One) => here * n.t_up[i],
                    _ => here,
                };
                if let (Some(n), Some(p)) = (node, prev) {
                    let tt = n.tau_t[i];
                    let tr = n.tau_r[i];
                    let vp = p.down[idx(nx, l + 1, i)];
                    let vm = p.up[idx(nx, l + 1, i)];
                    if tr != ZERO && vp != ZERO {
                        inner += tr * vp;
                    }
                    if rhs_transmission && tt != ZERO && vm != ZERO {
                        inner -= tt * vm;
                    }
                }
                up[idx(nx, l, i)] = if inner == ZERO { ZERO } else { g[i] * inner };
            }
        }
        terms.push(SeriesTerm { j, down, up });
    }
    terms
}

/// Working tables of the grouped sweep for one frequency.
#[derive(Debug, Clone)]
pub struct BremmerAccumulator {
    pub temp: Vec<Complex64>,
    /// Down-to-up coupling `tau D(l)` stored during the down pass.
    pub tab_minus: Vec<Complex64>,
    /// Up-to-down coupling `-tau U(l)` stored during the up pass.
    pub tab_plus: Vec<Complex64>,
    /// Per multiple `m`: (down-going, up-going) field at the receiver node.
    pub results: Vec<(Vec<Complex64>, Vec<Complex64>)>,
    /// Sum over all multiples of `D + U` at every node, when requested.
    pub field: Option<Vec<Complex64>>,
}

impl BremmerAccumulator {
    pub fn new(nx: usize, nz: usize, keep_field: bool) -> Self {
        let size = (nz + 1) * nx;
        Self {
            temp: vec![ZERO; nx],
            tab_minus: vec![ZERO; size],
            tab_plus: vec![ZERO; size],
            results: Vec::new(),
            field: keep_field.then(|| vec![ZERO; size]),
        }
    }
}

/// Grouped sweep: pass `m` collects every path with `2m + 1` reflections.
/// Each pass marches down through the medium, then back up. Transmission
/// enters through the factors of `medium` (its `epsilon`).
pub fn sweep(
    s_plus: &[Complex64],
    medium: &Medium,
    multiples: usize,
    receiver: usize,
    keep_field: bool,
) -> BremmerAccumulator {
    let nx = medium.nx;
    let nz = medium.nz;
    let mut acc = BremmerAccumulator::new(nx, nz, keep_field);
    for m in 0..=multiples {
        if m == 0 {
            acc.temp.copy_from_slice(s_plus);
        } else {
            acc.temp.iter_mut().for_each(|v| *v = ZERO);
        }
        let mut at_receiver_down = vec![ZERO; nx];
        for l in 0..=nz {
            if l == receiver {
                at_receiver_down.copy_from_slice(&acc.temp);
            }
            if let Some(field) = acc.field.as_mut() {
                for (f, t) in field[l * nx..(l + 1) * nx].iter_mut().zip(&acc.temp) {
                    *f += t;
                }
            }
            let node = medium.node_of[l].map(|n| &medium.nodes[n]);
            if let Some(n) = node {
                let tab_m = &mut acc.tab_minus[l * nx..(l + 1) * nx];
                for i in 0..nx {
                    tab_m[i] = n.tau_r[i] * acc.temp[i];
                }
            }
            if l == nz {
                break;
            }
            let g = medium.propagator(l);
            match node {
                Some(n) => {
                    let tab_p = &acc.tab_plus[l * nx..(l + 1) * nx];
                    for i in 0..nx {
                        acc.temp[i] = g[i] * (n.t_down[i] * acc.temp[i] + tab_p[i]);
                    }
                }
                None => {
                    for i in 0..nx {
                        acc.temp[i] *= g[i];
                    }
                }
            }
        }

        acc.temp.iter_mut().for_each(|v| *v = ZERO);
        let mut at_receiver_up = vec![ZERO; nx];
        for l in (0..=nz).rev() {
            let node = medium.node_of[l].map(|n| &medium.nodes[n]);
            if let Some(n) = node {
                let tab_p = &mut acc.tab_plus[l * nx..(l + 1) * nx];
                for i in 0..nx {
                    tab_p[i] = -n.tau_r[i] * acc.temp[i];
                }
            }
            if l == receiver {
                at_receiver_up.copy_from_slice(&acc.temp);
            }
            if let Some(field) = acc.field.as_mut() {
                for (f, t) in field[l * nx..(l + 1) * nx].iter_mut().zip(&acc.temp) {
                    *f += t;
                }
            }
            if l == 0 {
                break;
            }
            let g = medium.propagator(l - 1);
            match node {
                Some(n) => {
                    let tab_m = &acc.tab_minus[l * nx..(l + 1) * nx];
                    for i in 0..nx {
                        acc.temp[i] = g[i] * (n.t_up[i] * acc.temp[i] + tab_m[i]);
                    }
                }
                None => {
                    for i in 0..nx {
                        acc.temp[i] *= g[i];
                    }
                }
            }
        }
        acc.results.push((at_receiver_down, at_receiver_up));
    }
    acc
}

/// Sweep with the transmission exponential folded into the propagator.
/// `medium` must have been built with `epsilon = 1`.
pub fn sweep_epsilon1(
    s_plus: &[Complex64],
    medium: &Medium,
    multiples: usize,
    receiver: usize,
) -> BremmerAccumulator {
    debug_assert_eq!(medium.epsilon, Epsilon::One);
    sweep(s_plus, medium, multiples, receiver, false)
}

/// Single-sweep summation with transmission on the right-hand side: the
/// down pass carries `TEMP + TAB-` with `TAB- = tau TEMP`, the up pass
/// carries `TEMP + TAB+` with `TAB+ = -tau TEMP`, so the `(1 +- tau)`
/// factors emerge from the update. `medium` must have `epsilon = 0`.
pub fn sweep_epsilon0(
    s_plus: &[Complex64],
    medium: &Medium,
    multiples: usize,
    receiver: usize,
) -> BremmerAccumulator {
    debug_assert_eq!(medium.epsilon, Epsilon::Zero);
    sweep(s_plus, medium, multiples, receiver, false)
}

/// Recorded spectrum `D + U` of multiple `m`; the down-going part is left
/// out when the receiver sits at the source depth.
fn recorded(result: &(Vec<Complex64>, Vec<Complex64>), include_down: bool) -> Vec<Complex64> {
    if include_down {
        result.0.iter().zip(&result.1).map(|(d, u)| d + u).collect()
    } else {
        result.1.clone()
    }
}

/// Contribution of the first internal multiple (`m = 1`).
pub fn first_multiple(acc: &BremmerAccumulator, include_down: bool) -> Result<Vec<Complex64>, SolverError> {
    acc.results
        .get(1)
        .map(|r| recorded(r, include_down))
        .ok_or(SolverError::TooFewMultiples {
            requested: 1,
            available: acc.results.len().saturating_sub(1),
        })
}

/// Sum over `m = 0..=truncation` in increasing order.
pub fn assemble_recorded_field(
    acc: &BremmerAccumulator,
    truncation: usize,
    include_down: bool,
) -> Result<Vec<Complex64>, SolverError> {
    if truncation >= acc.results.len() {
        return Err(SolverError::TooFewMultiples {
            requested: truncation,
            available: acc.results.len().saturating_sub(1),
        });
    }
    let nx = acc.temp.len();
    let mut total = vec![ZERO; nx];
    for r in &acc.results[..=truncation] {
        for (t, v) in total.iter_mut().zip(recorded(r, include_down)) {
            *t += v;
        }
    }
    Ok(total)
}

/// Extra outputs of a one-way run.
#[derive(Debug, Clone, Default)]
pub struct OneWayOptions {
    /// Times (seconds) at which the full `(x, z)` pressure is kept.
    pub snapshot_times: Vec<f64>,
}

/// Output of a one-way run.
#[derive(Debug, Clone)]
pub struct OneWayResult {
    /// Pressure at the receiver depth summed over all computed multiples.
    pub total: Seismogram,
    /// Section of each multiple `m = 0..=N`; they sum to `total`.
    pub multiples: Vec<Seismogram>,
    /// Recorded spectra per multiple, `(bin, x)` row-major over the
    /// frequency window, pressure already in `x`.
    pub spectra: Vec<Vec<Complex64>>,
    pub window: FrequencyWindow,
    pub snapshots: Vec<Snapshot>,
}

struct BinOutput {
    per_multiple: Vec<Vec<Complex64>>,
    field: Option<Vec<Complex64>>,
}

/// Frequency-domain one-way modeling of a single shot.
#[derive(Debug, Clone)]
pub struct OneWaySolver {
    plan: RunPlan,
    options: OneWayOptions,
}

impl OneWaySolver {
    pub fn new(plan: RunPlan) -> Self {
        Self {
            plan,
            options: OneWayOptions::default(),
        }
    }

    pub fn with_options(plan: RunPlan, options: OneWayOptions) -> Self {
        Self { plan, options }
    }

    pub fn plan(&self) -> &RunPlan {
        &self.plan
    }

    /// Runs every frequency of the window on the current rayon pool and
    /// gathers the results in bin order.
    pub fn run(&self) -> Result<OneWayResult, SolverError> {
        let plan = &self.plan;
        let g = plan.grid;
        let run = plan.run;
        let rho = plan.model.density();
        let time = TimeTransform::new(g.nt, g.dt, run.damping)?;
        let space = SpatialTransform::new(g.nx, g.dx)?;
        let window = FrequencyWindow::new(g.nt, g.dt, run.omega_max);
        let kx = space.wavenumbers();
        let cells = plan.cell_speeds();
        let taper = AngleTaper::new(run.angle_cutoff, run.taper_width);
        let spec = MediumSpec {
            cells: &cells,
            speed_below: plan.model.speed_below(),
            kx: &kx,
            dz: g.dz,
            damping: run.damping,
            taper,
            epsilon: run.epsilon,
            include_transmission: run.include_transmission,
        };
        let q_hat = time.forward(&TimeSignal::ricker_rate(g.nt, g.dt, plan.shot.peak_frequency))?;
        let source_row = space.point_source(plan.source_index());
        let receiver = plan.receiver_node();
        let include_down = receiver > 0;
        let keep_field = !self.options.snapshot_times.is_empty();
        let nz = g.nz;

        log::info!("source decomposition: the up-going part is not propagated");
        let bins: Vec<usize> = window.bins().collect();
        let chunk = rayon::current_num_threads().max(1) * 4;
        let mut outputs: Vec<BinOutput> = Vec::with_capacity(bins.len());
        let mut snap_acc = vec![vec![0.0; (nz + 1) * g.nx]; self.options.snapshot_times.len()];
        for block in bins.chunks(chunk) {
            let results: Result<Vec<BinOutput>, SolverError> = block
                .par_iter()
                .map(|&k| {
                    let omega = time.omega(k);
                    let medium = Medium::new(&spec, omega)?;
                    let taper_row: Vec<f64> = kx
                        .iter()
                        .map(|&k| taper.factor(k, cells[0], omega))
                        .collect();
                    let q_row: Vec<Complex64> = source_row.iter().map(|s| s * q_hat[k]).collect();
                    let s_plus = medium.downgoing_source(&q_row, &taper_row);
                    let acc = sweep(&s_plus, &medium, run.multiples, receiver, keep_field);
                    let mut per_multiple = Vec::with_capacity(acc.results.len());
                    for r in &acc.results {
                        let mut row = recorded(r, include_down);
                        space.inverse_in_place(&mut row)?;
                        row.iter_mut().for_each(|v| *v *= rho);
                        per_multiple.push(row);
                    }
                    let field = match acc.field {
                        Some(mut f) => {
                            for l in 0..=nz {
                                let row = &mut f[l * g.nx..(l + 1) * g.nx];
                                space.inverse_in_place(row)?;
                                row.iter_mut().for_each(|v| *v *= rho);
                            }
                            Some(f)
                        }
                        None => None,
                    };
                    Ok(BinOutput { per_multiple, field })
                })
                .collect();
            for (out, &k) in results?.into_iter().zip(block) {
                if let Some(f) = &out.field {
                    accumulate_snapshots(&time, k, f, &self.options.snapshot_times, &mut snap_acc);
                }
                outputs.push(BinOutput {
                    per_multiple: out.per_multiple,
                    field: None,
                });
            }
        }

        let n_m = run.multiples + 1;
        let mut spectra = vec![vec![ZERO; bins.len() * g.nx]; n_m];
        for (b, out) in outputs.iter().enumerate() {
            for (m, row) in out.per_multiple.iter().enumerate() {
                spectra[m][b * g.nx..(b + 1) * g.nx].copy_from_slice(row);
            }
        }
        let mut multiples = Vec::with_capacity(n_m);
        for spectrum in &spectra {
            multiples.push(self.to_seismogram(&time, &window, spectrum)?);
        }
        let mut total = multiples[0].clone();
        for s in &multiples[1..] {
            for (a, b) in total.values.iter_mut().zip(&s.values) {
                *a += b;
            }
        }
        if total.values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite("one-way seismogram"));
        }
        let scale = 1.0 / (g.nt as f64 * g.dt);
        let snapshots = self
            .options
            .snapshot_times
            .iter()
            .zip(snap_acc)
            .map(|(&t, values)| Snapshot {
                time: t,
                nz: nz + 1,
                nx: g.nx,
                dz: g.dz,
                dx: g.dx,
                values: values
                    .into_iter()
                    .map(|v| v * scale * (run.damping * t).exp())
                    .collect(),
            })
            .collect();
        Ok(OneWayResult {
            total,
            multiples,
            spectra,
            window,
            snapshots,
        })
    }

    fn to_seismogram(
        &self,
        time: &TimeTransform,
        window: &FrequencyWindow,
        spectrum: &[Complex64],
    ) -> Result<Seismogram, SolverError> {
        let g = self.plan.grid;
        let mut values = vec![0.0; g.nt * g.nx];
        let mut positive = vec![ZERO; g.nt / 2 - 1];
        for ix in 0..g.nx {
            positive.iter_mut().for_each(|v| *v = ZERO);
            for (b, k) in window.bins().enumerate() {
                positive[k - 1] = spectrum[b * g.nx + ix];
            }
            let trace = time.inverse_positive(&positive)?;
            for (it, v) in trace.samples.iter().enumerate() {
                values[it * g.nx + ix] = *v;
            }
        }
        Ok(Seismogram {
            values,
            nt: g.nt,
            nx: g.nx,
            dt: g.dt,
            dx: g.dx,
            receiver_depth: self.plan.shot.receiver_depth,
            provenance: Provenance::OneWay,
        })
    }
}

/// Adds `2 Re(p(x, z, omega_k) exp(i omega_k t))` for each snapshot time.
fn accumulate_snapshots(
    time: &TimeTransform,
    k: usize,
    field: &[Complex64],
    times: &[f64],
    acc: &mut [Vec<f64>],
) {
    let omega = time.omega(k);
    for (&t, out) in times.iter().zip(acc.iter_mut()) {
        let rot = Complex64::from_polar(1.0, omega * t);
        for (o, f) in out.iter_mut().zip(field) {
            *o += 2.0 * (f * rot).re;
        }
    }
}
