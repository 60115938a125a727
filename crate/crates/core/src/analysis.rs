//! Seismograms, the full-wave/one-way amplitude ratio `Q(x)`, and the
//! on-disk section format.
//!
//! A section file is a 64-byte ASCII header
//! `OWWF1 rows cols d_row d_col level origin provenance`, space padded and
//! ending in a newline, followed by `rows * cols` little-endian `f32` values
//! in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

pub const MAGIC: &str = "OWWF1";
pub const HEADER_LEN: usize = 64;

/// Fraction of the global peak below which a trace is considered empty.
pub const NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad section header: {0}")]
    Header(String),
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    OneWay,
    FullWave,
    Spectral,
    Snapshot,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::OneWay => "one_way",
            Provenance::FullWave => "full_wave",
            Provenance::Spectral => "spectral",
            Provenance::Snapshot => "snapshot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "one_way" => Some(Provenance::OneWay),
            "full_wave" => Some(Provenance::FullWave),
            "spectral" => Some(Provenance::Spectral),
            "snapshot" => Some(Provenance::Snapshot),
            _ => None,
        }
    }
}

/// Pressure `p(t, x)` at the receiver depth, stored `values[it * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seismogram {
    pub values: Vec<f64>,
    pub nt: usize,
    pub nx: usize,
    pub dt: f64,
    pub dx: f64,
    pub receiver_depth: f64,
    pub provenance: Provenance,
}

impl Seismogram {
    pub fn zeros(nt: usize, nx: usize, dt: f64, dx: f64, receiver_depth: f64, provenance: Provenance) -> Self {
        Self {
            values: vec![0.0; nt * nx],
            nt,
            nx,
            dt,
            dx,
            receiver_depth,
            provenance,
        }
    }

    pub fn at(&self, it: usize, ix: usize) -> f64 {
        self.values[it * self.nx + ix]
    }

    pub fn trace(&self, ix: usize) -> Vec<f64> {
        (0..self.nt).map(|it| self.at(it, ix)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn to_section(&self, origin: f64) -> Section {
        Section {
            rows: self.nt,
            cols: self.nx,
            d_row: self.dt,
            d_col: self.dx,
            level: self.receiver_depth,
            origin,
            provenance: self.provenance,
            values: self.values.clone(),
        }
    }

    pub fn from_section(s: Section) -> Result<Self, AnalysisError> {
        match s.provenance {
            Provenance::OneWay | Provenance::FullWave => Ok(Self {
                nt: s.rows,
                nx: s.cols,
                dt: s.d_row,
                dx: s.d_col,
                receiver_depth: s.level,
                provenance: s.provenance,
                values: s.values,
            }),
            p => Err(AnalysisError::Header(format!(
                "expected a seismogram, found a {} section",
                p.as_str()
            ))),
        }
    }
}

/// Pressure over `(z, x)` at one instant, stored `values[iz * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub nz: usize,
    pub nx: usize,
    pub dz: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn to_section(&self) -> Section {
        Section {
            rows: self.nz,
            cols: self.nx,
            d_row: self.dz,
            d_col: self.dx,
            level: self.time,
            origin: 0.0,
            provenance: Provenance::Snapshot,
            values: self.values.clone(),
        }
    }
}

/// Generic two-dimensional grid as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub rows: usize,
    pub cols: usize,
    pub d_row: f64,
    pub d_col: f64,
    /// Receiver depth for seismograms, time for snapshots.
    pub level: f64,
    /// Source position for seismograms.
    pub origin: f64,
    pub provenance: Provenance,
    pub values: Vec<f64>,
}

impl Section {
    /// Complex `(rows, cols)` data stored with interleaved real and
    /// imaginary parts.
    pub fn from_complex(rows: usize, cols: usize, d_row: f64, d_col: f64, level: f64, data: &[Complex64]) -> Self {
        Self {
            rows,
            cols: 2 * cols,
            d_row,
            d_col,
            level,
            origin: 0.0,
            provenance: Provenance::Spectral,
            values: data.iter().flat_map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn complex_values(&self) -> Vec<Complex64> {
        self.values
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect()
    }

    fn header(&self) -> Result<Vec<u8>, AnalysisError> {
        let text = format!(
            "{MAGIC} {} {} {} {} {} {} {}",
            self.rows,
            self.cols,
            self.d_row,
            self.d_col,
            self.level,
            self.origin,
            self.provenance.as_str()
        );
        if text.len() > HEADER_LEN - 1 {
            return Err(AnalysisError::Header(format!("header too long: {text}")));
        }
        let mut bytes = text.into_bytes();
        bytes.resize(HEADER_LEN - 1, b' ');
        bytes.push(b'\n');
        Ok(bytes)
    }
}

pub fn write_section(path: &Path, section: &Section) -> Result<(), AnalysisError> {
    if section.values.len() != section.rows * section.cols {
        return Err(AnalysisError::Mismatch(format!(
            "{} values for a {}x{} grid",
            section.values.len(),
            section.rows,
            section.cols
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&section.header()?)?;
    for v in &section.values {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str) -> Result<T, AnalysisError> {
    field
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| AnalysisError::Header(format!("missing or invalid {name}")))
}

pub fn read_section(path: &Path) -> Result<Section, AnalysisError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| AnalysisError::Header("file shorter than the header".into()))?;
    let text = std::str::from_utf8(&header).map_err(|_| AnalysisError::Header("header is not ASCII".into()))?;
    if header[HEADER_LEN - 1] != b'\n' {
        return Err(AnalysisError::Header("header does not end in a newline".into()));
    }
    let mut fields = text.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(AnalysisError::Header("wrong magic".into()));
    }
    let rows: usize = parse_field(fields.next(), "rows")?;
    let cols: usize = parse_field(fields.next(), "cols")?;
    let d_row: f64 = parse_field(fields.next(), "d_row")?;
    let d_col: f64 = parse_field(fields.next(), "d_col")?;
    let level: f64 = parse_field(fields.next(), "level")?;
    let origin: f64 = parse_field(fields.next(), "origin")?;
    let provenance = fields
        .next()
        .and_then(Provenance::parse)
        .ok_or_else(|| AnalysisError::Header("missing or invalid provenance".into()))?;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| AnalysisError::Header("grid too large".into()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != 4 * n {
        return Err(AnalysisError::Header(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            4 * n
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Ok(Section {
        rows,
        cols,
        d_row,
        d_col,
        level,
        origin,
        provenance,
        values,
    })
}

/// CSV with a time column followed by one column per receiver.
pub fn write_seismogram_csv(path: &Path, seis: &Seismogram) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..seis.nx).map(|ix| format!("x{}", ix as f64 * seis.dx)));
    w.write_record(&header)?;
    for it in 0..seis.nt {
        let mut row = vec![(it as f64 * seis.dt).to_string()];
        row.extend((0..seis.nx).map(|ix| seis.at(it, ix).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Peak of `|trace|` with three-point parabolic refinement; returns
/// `(fractional sample index, amplitude)`.
pub fn peak(trace: &[f64]) -> (f64, f64) {
    let Some((i, &m)) = trace
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    else {
        return (0.0, 0.0);
    };
    let m = m.abs();
    if i == 0 || i + 1 == trace.len() || m == 0.0 {
        return (i as f64, m);
    }
    let (y0, y2) = (trace[i - 1].abs(), trace[i + 1].abs());
    let denom = y0 - 2.0 * m + y2;
    if denom >= 0.0 {
        return (i as f64, m);
    }
    let shift = 0.5 * (y0 - y2) / denom;
    (i as f64 + shift, m - 0.25 * (y0 - y2) * shift)
}

/// Peak amplitude of every trace.
pub fn amplitude_vs_offset(seis: &Seismogram) -> Vec<f64> {
    (0..seis.nx).map(|ix| peak(&seis.trace(ix)).1).collect()
}

/// Peak time (seconds) of every trace.
pub fn peak_times(seis: &Seismogram) -> Vec<f64> {
    (0..seis.nx).map(|ix| peak(&seis.trace(ix)).0 * seis.dt).collect()
}

/// `Q(x) = max_t |p_full| / max_t |p_oneway|` per receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct QCurve {
    pub x: Vec<f64>,
    /// NaN where undefined.
    pub q: Vec<f64>,
    pub defined: Vec<bool>,
    pub shot_x: f64,
    pub pair: (String, String),
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12)
}

pub fn q_metric(full: &Seismogram, oneway: &Seismogram, shot_x: f64) -> Result<QCurve, AnalysisError> {
    if full.nt != oneway.nt || full.nx != oneway.nx {
        return Err(AnalysisError::Mismatch(format!(
            "shapes {}x{} and {}x{}",
            full.nt, full.nx, oneway.nt, oneway.nx
        )));
    }
    if !same(full.dt, oneway.dt) || !same(full.dx, oneway.dx) {
        return Err(AnalysisError::Mismatch(format!(
            "sampling dt {} / {}, dx {} / {}",
            full.dt, oneway.dt, full.dx, oneway.dx
        )));
    }
    if !same(full.receiver_depth, oneway.receiver_depth) {
        return Err(AnalysisError::Mismatch(format!(
            "receiver depths {} and {}",
            full.receiver_depth, oneway.receiver_depth
        )));
    }
    let a = amplitude_vs_offset(full);
    let b = amplitude_vs_offset(oneway);
    let floor_a = NOISE_FLOOR * a.iter().fold(0.0f64, |m, v| m.max(*v));
    let floor_b = NOISE_FLOOR * b.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut q = Vec::with_capacity(full.nx);
    let mut defined = Vec::with_capacity(full.nx);
    for (fa, fb) in a.iter().zip(&b) {
        let ok = *fa > floor_a && *fb > floor_b;
        defined.push(ok);
        q.push(if ok { fa / fb } else { f64::NAN });
    }
    Ok(QCurve {
        x: (0..full.nx).map(|ix| ix as f64 * full.dx).collect(),
        q,
        defined,
        shot_x,
        pair: (
            full.provenance.as_str().to_string(),
            oneway.provenance.as_str().to_string(),
        ),
    })
}

impl QCurve {
    pub fn offset(&self, i: usize) -> f64 {
        self.x[i] - self.shot_x
    }

    /// `|Q - 1|` where defined.
    pub fn error(&self, i: usize) -> Option<f64> {
        self.defined[i].then(|| (self.q[i] - 1.0).abs())
    }

    /// Defined errors with `|offset| <= radius`.
    pub fn errors_within(&self, radius: f64) -> Vec<f64> {
        (0..self.x.len())
            .filter(|&i| self.offset(i).abs() <= radius + 1e-9)
            .filter_map(|i| self.error(i))
            .collect()
    }

    /// Smallest error within `radius` of the shot.
    pub fn near_shot_error(&self, radius: f64) -> Option<f64> {
        self.errors_within(radius).into_iter().reduce(f64::min)
    }

    pub fn median_error_within(&self, radius: f64) -> Option<f64> {
        let mut e = self.errors_within(radius);
        if e.is_empty() {
            return None;
        }
        e.sort_by(f64::total_cmp);
        let n = e.len();
        Some(if n % 2 == 1 { e[n / 2] } else { 0.5 * (e[n / 2 - 1] + e[n / 2]) })
    }

    /// Half the length of the contiguous run of receivers around the shot
    /// with `|Q - 1| < tol`. Zero if the receiver nearest the shot fails.
    pub fn half_width(&self, tol: f64) -> f64 {
        let n = self.x.len();
        let Some(center) = (0..n).min_by(|&a, &b| self.offset(a).abs().total_cmp(&self.offset(b).abs())) else {
            return 0.0;
        };
        let ok = |i: usize| self.error(i).is_some_and(|e| e < tol);
        if !ok(center) {
            return 0.0;
        }
        let mut lo = center;
        while lo > 0 && ok(lo - 1) {
            lo -= 1;
        }
        let mut hi = center;
        while hi + 1 < n && ok(hi + 1) {
            hi += 1;
        }
        0.5 * (self.x[hi] - self.x[lo])
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "q", "defined"])?;
        for i in 0..self.x.len() {
            w.write_record([
                self.x[i].to_string(),
                self.q[i].to_string(),
                u8::from(self.defined[i]).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
