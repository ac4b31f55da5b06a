//! Two-dimensional landscapes of conditional phase and leakage, their
//! contours, chevron fitting and the valley-crossing calibration.

use crate::device::PairSpec;
use crate::fit::{brent_root, golden_min, weighted_lstsq};
use crate::gate::{extract_cp_params, unitary_leakage};
use crate::linalg::{phase_distance, wrap_phase};
use crate::model::{full_propagate, full_propagate_lines, full_propagate_segments, reduced_pulse_unitary, runs, FluxSegment};
use crate::noise::{gate_schedule, Allocation};
use crate::pulse::{choose_tp_samples, make_nz, make_snz, make_square, NzParams, SnzParams, Waveform};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, FloatTriangulation, HasPosition, Point2, Triangulation};
use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) || !(x_max - x_min).is_finite() || !(y_max - y_min).is_finite() {
            return Err(Error::InvalidParameter(format!(
                "empty bounds [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    fn to_unit(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.x_min) / (self.x_max - self.x_min),
            (y - self.y_min) / (self.y_max - self.y_min),
        )
    }

    fn from_unit(&self, u: f64, v: f64) -> (f64, f64) {
        (
            self.x_min + u * (self.x_max - self.x_min),
            self.y_min + v * (self.y_max - self.y_min),
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

/// How values of a field are compared and interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Linear,
    /// Angle in radians, compared modulo 2π.
    Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub values: Vec<f64>,
}

/// Scattered samples of one or more fields over a rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSamples {
    pub bounds: Bounds,
    pub kinds: Vec<FieldKind>,
    pub points: Vec<Sample>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    u: f64,
    v: f64,
    index: usize,
}

impl HasPosition for Node {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        Point2::new(self.u, self.v)
    }
}

type Mesh = DelaunayTriangulation<Node>;

impl LandscapeSamples {
    /// `(x, y, value)` of field `k`.
    pub fn field(&self, k: usize) -> Vec<(f64, f64, f64)> {
        self.points.iter().map(|p| (p.x, p.y, p.values[k])).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rows `x,y,value` for field `k`.
    pub fn write_csv<W: std::io::Write>(&self, k: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Config(e.to_string());
        w.write_record(["x", "y", "value"]).map_err(err)?;
        for p in &self.points {
            w.write_record([
                format!("{:.12e}", p.x),
                format!("{:.12e}", p.y),
                format!("{:.12e}", p.values[k]),
            ])
            .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    fn mesh(&self) -> Result<Mesh> {
        let mut mesh = Mesh::new();
        for (index, p) in self.points.iter().enumerate() {
            let (u, v) = self.bounds.to_unit(p.x, p.y);
            mesh.insert(Node { u, v, index })
                .map_err(|e| Error::InvalidParameter(format!("sample ({}, {}): {e:?}", p.x, p.y)))?;
        }
        Ok(mesh)
    }

    /// Piecewise-linear interpolant of every field on an `nx × ny` grid
    /// spanning the bounds. Phase fields are interpolated through their
    /// cosine and sine. Returns `grid[k][j][i]` for field `k`, `x_i`, `y_j`.
    pub fn resample(&self, nx: usize, ny: usize) -> Result<Vec<Vec<Vec<f64>>>> {
        let mesh = self.mesh()?;
        let bary = mesh.barycentric();
        let mut weights = Vec::new();
        let mut out = vec![vec![vec![0.0; nx]; ny]; self.kinds.len()];
        for j in 0..ny {
            for i in 0..nx {
                let u = i as f64 / (nx - 1) as f64;
                let v = j as f64 / (ny - 1) as f64;
                bary.get_weights(Point2::new(u, v), &mut weights);
                if weights.is_empty() {
                    return Err(Error::InvalidParameter(
                        "samples do not cover the bounds".into(),
                    ));
                }
                for (k, kind) in self.kinds.iter().enumerate() {
                    let (mut s, mut cs, mut sn) = (0.0f64, 0.0f64, 0.0f64);
                    for (h, w) in &weights {
                        let val = self.points[mesh.vertex(*h).data().index].values[k];
                        s += w * val;
                        cs += w * val.cos();
                        sn += w * val.sin();
                    }
                    out[k][j][i] = match kind {
                        FieldKind::Linear => s,
                        FieldKind::Phase => sn.atan2(cs),
                    };
                }
            }
        }
        Ok(out)
    }
}

fn check_values(x: f64, y: f64, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "field evaluation at ({x}, {y}) returned {values:?}"
        )));
    }
    Ok(())
}

fn evaluate<F>(f: &F, bounds: &Bounds, unit: &[(f64, f64)], n_fields: usize) -> Result<Vec<Sample>>
where
    F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    unit.par_iter()
        .map(|&(u, v)| {
            let (x, y) = bounds.from_unit(u, v);
            let values = f(x, y)?;
            check_values(x, y, &values, n_fields)?;
            Ok(Sample { x, y, values })
        })
        .collect()
}

/// Points evaluated per refinement round.
const BATCH: usize = 8;
/// Weight of plain area in the refinement loss, so flat regions are still
/// filled in eventually.
const AREA_WEIGHT: f64 = 0.01;
/// Triangles smaller than this (in unit-square area) are not split.
const MIN_AREA: f64 = 1e-9;

/// Samples `f` adaptively with at most `budget` evaluations.
///
/// A uniform grid of `max(4, ⌊√(budget/4)⌋)²` points is triangulated and
/// the triangle with the largest loss `area · (Σ range_k / global range_k +
/// 0.01)` is split at the midpoint of its longest edge, `BATCH` triangles
/// at a time. Coordinates are normalized to the unit square for areas and
/// edge lengths. The result depends only on `f` and the arguments.
pub fn adaptive_sample_fields<F>(
    f: F,
    kinds: &[FieldKind],
    bounds: Bounds,
    budget: usize,
) -> Result<LandscapeSamples>
where
    F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    if budget < 16 {
        return Err(Error::InvalidParameter(format!("budget {budget} is below 16")));
    }
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("no fields to sample".into()));
    }
    let g = ((budget as f64 / 4.0).sqrt().floor() as usize).max(4);
    let mut unit = Vec::with_capacity(g * g);
    for j in 0..g {
        for i in 0..g {
            unit.push((i as f64 / (g - 1) as f64, j as f64 / (g - 1) as f64));
        }
    }
    let mut samples = LandscapeSamples {
        bounds,
        kinds: kinds.to_vec(),
        points: evaluate(&f, &bounds, &unit, kinds.len())?,
    };
    let mut mesh = samples.mesh()?;
    let mut seen: HashSet<(u64, u64)> = unit.iter().map(|&(u, v)| (u.to_bits(), v.to_bits())).collect();

    while samples.points.len() < budget {
        let scale: Vec<f64> = (0..kinds.len())
            .map(|k| match kinds[k] {
                FieldKind::Phase => PI,
                FieldKind::Linear => {
                    let (lo, hi) = samples.points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
                        (lo.min(p.values[k]), hi.max(p.values[k]))
                    });
                    if hi > lo {
                        hi - lo
                    } else {
                        1.0
                    }
                }
            })
            .collect();
        let mut candidates: Vec<(f64, (f64, f64))> = Vec::new();
        for face in mesh.inner_faces() {
            let vs = face.vertices();
            let pos = face.positions();
            let area = face.area().abs();
            if area < MIN_AREA {
                continue;
            }
            let vals: Vec<&Vec<f64>> = vs
                .iter()
                .map(|v| &samples.points[v.data().index].values)
                .collect();
            let mut spread = 0.0;
            for k in 0..kinds.len() {
                let r = match kinds[k] {
                    FieldKind::Linear => {
                        let x = [vals[0][k], vals[1][k], vals[2][k]];
                        x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min)
                    }
                    FieldKind::Phase => phase_distance(vals[0][k], vals[1][k])
                        .max(phase_distance(vals[1][k], vals[2][k]))
                        .max(phase_distance(vals[0][k], vals[2][k])),
                };
                spread += r / scale[k];
            }
            let loss = area * (spread + AREA_WEIGHT);
            // longest edge
            let mut best = (0.0, (0.0, 0.0));
            for e in 0..3 {
                let (p, q) = (pos[e], pos[(e + 1) % 3]);
                let len = (p.x - q.x).hypot(p.y - q.y);
                if len > best.0 {
                    best = (len, (0.5 * (p.x + q.x), 0.5 * (p.y + q.y)));
                }
            }
            candidates.push((loss, best.1));
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1 .0.total_cmp(&b.1 .0)).then(a.1 .1.total_cmp(&b.1 .1)));
        let room = budget - samples.points.len();
        let mut batch = Vec::new();
        for (_, p) in candidates {
            if batch.len() >= BATCH.min(room) {
                break;
            }
            if seen.insert((p.0.to_bits(), p.1.to_bits())) {
                batch.push(p);
            }
        }
        if batch.is_empty() {
            break;
        }
        let new = evaluate(&f, &bounds, &batch, kinds.len())?;
        for (s, &(u, v)) in new.into_iter().zip(&batch) {
            let index = samples.points.len();
            samples.points.push(s);
            mesh.insert(Node { u, v, index })
                .map_err(|e| Error::InvalidParameter(format!("{e:?}")))?;
        }
    }
    Ok(samples)
}

/// Single-field [`adaptive_sample_fields`].
pub fn adaptive_sample<F>(f: F, bounds: Bounds, budget: usize) -> Result<LandscapeSamples>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    adaptive_sample_fields(|x, y| Ok(vec![f(x, y)]), &[FieldKind::Linear], bounds, budget)
}

/// Samples on a regular `nx × ny` grid including the edges.
pub fn grid_sample<F>(f: F, kinds: &[FieldKind], bounds: Bounds, nx: usize, ny: usize) -> Result<LandscapeSamples>
where
    F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter(format!("grid {nx}x{ny} is too small")));
    }
    let mut unit = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            unit.push((i as f64 / (nx - 1) as f64, j as f64 / (ny - 1) as f64));
        }
    }
    Ok(LandscapeSamples {
        bounds,
        kinds: kinds.to_vec(),
        points: evaluate(&f, &bounds, &unit, kinds.len())?,
    })
}

/// Iso-level polylines of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub level: f64,
    pub polylines: Vec<Vec<(f64, f64)>>,
}

impl Contour {
    pub fn vertices(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.polylines.iter().flatten()
    }

    /// Rows `polyline,x,y`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Config(e.to_string());
        w.write_record(["polyline", "x", "y"]).map_err(err)?;
        for (k, line) in self.polylines.iter().enumerate() {
            for (x, y) in line {
                w.write_record([k.to_string(), format!("{x:.12e}"), format!("{y:.12e}")])
                    .map_err(err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Signed distance of a field value from the level: plain difference for
/// linear fields, wrapped difference for phases.
fn offset_from(kind: FieldKind, value: f64, level: f64) -> f64 {
    match kind {
        FieldKind::Linear => value - level,
        FieldKind::Phase => wrap_phase(value - level),
    }
}

/// Grid edge carrying a crossing: `(vertical, i, j)`.
type EdgeKey = (bool, usize, usize);

/// Marching squares on a regular grid of level offsets. Edges whose end
/// values differ by more than `cut` are treated as branch cuts and never
/// crossed.
fn march(g: &[Vec<f64>], cut: f64) -> Vec<Vec<(f64, f64)>> {
    let ny = g.len();
    let nx = g[0].len();
    let crossing = |a: f64, b: f64| (a >= 0.0) != (b >= 0.0) && (a - b).abs() < cut;
    let mut points: HashMap<EdgeKey, (f64, f64)> = HashMap::new();
    let mut segs: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    let frac = |a: f64, b: f64| a / (a - b);
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // corners counter-clockwise from (i, j)
            let c = [g[j][i], g[j][i + 1], g[j + 1][i + 1], g[j + 1][i]];
            let edges: [(EdgeKey, usize, usize); 4] = [
                ((false, i, j), 0, 1),
                ((true, i + 1, j), 1, 2),
                ((false, i, j + 1), 3, 2),
                ((true, i, j), 0, 3),
            ];
            let mut hits: Vec<EdgeKey> = Vec::with_capacity(4);
            for &(key, p, q) in &edges {
                if crossing(c[p], c[q]) {
                    let t = frac(c[p], c[q]);
                    let pt = if key.0 {
                        (key.1 as f64, key.2 as f64 + t)
                    } else {
                        (key.1 as f64 + t, key.2 as f64)
                    };
                    points.insert(key, pt);
                    hits.push(key);
                }
            }
            match hits.len() {
                2 => segs.push((hits[0], hits[1])),
                4 => {
                    // saddle: the centre value decides which corners connect
                    let centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
                    if (centre >= 0.0) == (c[0] >= 0.0) {
                        segs.push((hits[0], hits[1]));
                        segs.push((hits[2], hits[3]));
                    } else {
                        segs.push((hits[0], hits[3]));
                        segs.push((hits[1], hits[2]));
                    }
                }
                _ => {}
            }
        }
    }
    // chain segments through shared edges
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, (a, b)) in segs.iter().enumerate() {
        adj.entry(*a).or_default().push(s);
        adj.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    let walk = |start: EdgeKey, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let mut chain = vec![start];
        let mut at = start;
        loop {
            let next = adj[&at].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            let (a, b) = segs[s];
            at = if a == at { b } else { a };
            chain.push(at);
        }
        chain
    };
    // open chains first (start at edges touched once), then closed loops
    let mut starts: Vec<EdgeKey> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    starts.sort();
    let mut rest: Vec<EdgeKey> = adj.keys().copied().collect();
    rest.sort();
    for start in starts.into_iter().chain(rest) {
        if adj[&start].iter().all(|&s| used[s]) {
            continue;
        }
        let chain = walk(start, &mut used);
        lines.push(chain.iter().map(|k| points[k]).collect());
    }
    lines
}

/// Contour of field `k` at `level` through a piecewise-linear interpolant
/// of the samples on an `n × n` grid (`n = 0` picks a size from the sample
/// count). Phase fields are contoured on the wrapped offset from the level.
pub fn extract_contour_field(samples: &LandscapeSamples, k: usize, level: f64, n: usize) -> Result<Contour> {
    if samples.is_empty() {
        return Err(Error::NoContour { level });
    }
    let kind = samples.kinds[k];
    if kind == FieldKind::Linear {
        let (lo, hi) = samples.points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
            (lo.min(p.values[k]), hi.max(p.values[k]))
        });
        if !(lo <= level && level <= hi) {
            return Err(Error::NoContour { level });
        }
    }
    let n = if n == 0 {
        ((samples.len() as f64).sqrt() as usize * 4).clamp(64, 400)
    } else {
        n.max(2)
    };
    let grid = samples.resample(n, n)?;
    let g: Vec<Vec<f64>> = grid[k]
        .iter()
        .map(|row| row.iter().map(|&v| offset_from(kind, v, level)).collect())
        .collect();
    let cut = match kind {
        FieldKind::Linear => f64::INFINITY,
        FieldKind::Phase => PI,
    };
    let b = samples.bounds;
    let scale = |(i, j): (f64, f64)| b.from_unit(i / (n - 1) as f64, j / (n - 1) as f64);
    let polylines: Vec<Vec<(f64, f64)>> = march(&g, cut)
        .into_iter()
        .map(|l| l.into_iter().map(scale).collect())
        .filter(|l: &Vec<(f64, f64)>| l.len() >= 2)
        .collect();
    if polylines.is_empty() {
        return Err(Error::NoContour { level });
    }
    Ok(Contour { level, polylines })
}

/// [`extract_contour_field`] for the first field.
pub fn extract_contour(samples: &LandscapeSamples, level: f64) -> Result<Contour> {
    extract_contour_field(samples, 0, level, 0)
}

pub const MAX_PROJECTION_MOVE: f64 = 0.02;

/// Moves a point onto the level set of `f` by Newton steps along the
/// finite-difference gradient. Returns `None` when it does not converge
/// inside the bounds or ends up more than [`MAX_PROJECTION_MOVE`] (in unit
/// window coordinates) from the start, which means it jumped branches.
pub fn project_to_level<F>(f: &F, kind: FieldKind, level: f64, bounds: &Bounds, x: f64, y: f64, tol: f64) -> Result<Option<(f64, f64)>>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let (sx, sy) = (bounds.x_max - bounds.x_min, bounds.y_max - bounds.y_min);
    let (hx, hy) = (1e-6 * sx, 1e-6 * sy);
    let (x_start, y_start) = (x, y);
    let (mut x, mut y) = (x, y);
    for _ in 0..30 {
        let r = offset_from(kind, f(x, y)?, level);
        if r.abs() < tol {
            let moved = ((x - x_start) / sx).hypot((y - y_start) / sy);
            return Ok((moved <= MAX_PROJECTION_MOVE).then_some((x, y)));
        }
        let (x0, x1) = ((x - hx).max(bounds.x_min), (x + hx).min(bounds.x_max));
        let (y0, y1) = ((y - hy).max(bounds.y_min), (y + hy).min(bounds.y_max));
        let gx = offset_from(kind, f(x1, y)? - f(x0, y)?, 0.0) / (x1 - x0);
        let gy = offset_from(kind, f(x, y1)? - f(x, y0)?, 0.0) / (y1 - y0);
        // gradient in unit coordinates so both axes count equally
        let (gu, gv) = (gx * sx, gy * sy);
        let norm2 = gu * gu + gv * gv;
        if !(norm2 > 0.0) {
            return Ok(None);
        }
        let step = r / norm2;
        let (mut nx, mut ny) = (x - step * gu * sx, y - step * gv * sy);
        // keep steps small relative to the window
        let len = ((nx - x) / sx).hypot((ny - y) / sy);
        if len > 0.05 {
            nx = x + (nx - x) * 0.05 / len;
            ny = y + (ny - y) * 0.05 / len;
        }
        x = nx.clamp(bounds.x_min, bounds.x_max);
        y = ny.clamp(bounds.y_min, bounds.y_max);
    }
    Ok(None)
}

/// Re-projects contour vertices onto the exact level set of `f`, dropping
/// vertices where the projection fails.
pub fn refine_contour<F>(contour: &Contour, f: &F, kind: FieldKind, bounds: &Bounds, tol: f64) -> Result<Contour>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let mut polylines = Vec::new();
    for line in &contour.polylines {
        let refined: Result<Vec<Option<(f64, f64)>>> = line
            .par_iter()
            .map(|&(x, y)| project_to_level(f, kind, contour.level, bounds, x, y, tol))
            .collect();
        let pts: Vec<(f64, f64)> = refined?.into_iter().flatten().collect();
        if pts.len() >= 2 {
            polylines.push(pts);
        }
    }
    if polylines.is_empty() {
        return Err(Error::NoContour {
            level: contour.level,
        });
    }
    Ok(Contour {
        level: contour.level,
        polylines,
    })
}

/// Which Hamiltonian a gate is simulated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateModel {
    /// Two-level `{|11>, target}` model.
    Reduced,
    /// Two-qutrit model.
    Full,
}

/// Conditional phase and leakage `L₁` of a flux waveform. In the full
/// model `L₁` is the average population leaving the computational subspace.
pub fn gate_metrics(pair: &PairSpec, model: GateModel, w: &Waveform) -> Result<(f64, f64)> {
    match model {
        GateModel::Reduced => {
            let segs: Vec<(f64, f64)> = runs(w.samples())
                .into_iter()
                .map(|(a, k)| (a, k as f64 * w.ts()))
                .collect();
            let u = reduced_pulse_unitary(pair, &segs)?;
            let m = u.matrix();
            Ok((wrap_phase(m[(0, 0)].arg()), m[(1, 0)].norm_sqr() / 4.0))
        }
        // every leakage channel, not only the configured target state: a
        // pulse may cross a second avoided crossing on its way
        GateModel::Full => {
            let u = full_propagate(pair, w)?;
            Ok((extract_cp_params(&u)?.phi2q, unitary_leakage(&u)))
        }
    }
}

/// Population transferred from `|11>` to the target state by a square
/// pulse on the fluxed transmon.
pub fn transfer_population(pair: &PairSpec, model: GateModel, a: f64, samples: usize, ts: f64) -> Result<f64> {
    if samples == 0 {
        return Ok(0.0);
    }
    make_square(a, samples as f64 * ts, ts)?;
    square_transfer(pair, model, a, samples as f64 * ts)
}

/// Like [`transfer_population`] for a duration off the sample grid.
pub fn square_transfer(pair: &PairSpec, model: GateModel, a: f64, duration: f64) -> Result<f64> {
    match model {
        GateModel::Reduced => Ok(reduced_pulse_unitary(pair, &[(a, duration)])?.matrix()[(1, 0)].norm_sqr()),
        GateModel::Full => {
            let seg = FluxSegment {
                fluxed: a,
                partner: 0.0,
                duration,
            };
            Ok(4.0 * extract_cp_params(&full_propagate_segments(pair, &[seg])?)?.leak_l1)
        }
    }
}

/// Chevron sampled adaptively over amplitudes `amp` and durations
/// `[0, max_duration]`; `x` is the amplitude, `y` the duration.
pub fn adaptive_chevron(
    pair: &PairSpec,
    model: GateModel,
    amp: (f64, f64),
    max_duration: f64,
    budget: usize,
) -> Result<LandscapeSamples> {
    let bounds = Bounds::new(amp.0, amp.1, 0.0, max_duration)?;
    adaptive_sample_fields(
        |a, t| square_transfer(pair, model, a, t).map(|p| vec![p]),
        &[FieldKind::Linear],
        bounds,
        budget,
    )
}

/// Target-state population over a grid of square-pulse amplitudes and
/// durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChevronMap {
    pub amplitudes: Vec<f64>,
    pub durations: Vec<f64>,
    /// `population[i][j]` at `amplitudes[i]`, `durations[j]`.
    pub population: Vec<Vec<f64>>,
}

impl ChevronMap {
    /// Rows `amplitude,duration_ns,population`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Config(e.to_string());
        w.write_record(["amplitude", "duration_ns", "population"]).map_err(err)?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, t) in self.durations.iter().enumerate() {
                w.write_record([
                    format!("{a:.12e}"),
                    format!("{:.12e}", t * 1e9),
                    format!("{:.12e}", self.population[i][j]),
                ])
                .map_err(err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Resamples a landscape over `(amplitude, duration)` onto a grid.
    pub fn from_landscape(samples: &LandscapeSamples, n_amp: usize, n_dur: usize) -> Result<Self> {
        let grid = samples.resample(n_amp, n_dur)?;
        let b = samples.bounds;
        let amplitudes = (0..n_amp)
            .map(|i| b.x_min + (b.x_max - b.x_min) * i as f64 / (n_amp - 1) as f64)
            .collect();
        let durations = (0..n_dur)
            .map(|j| b.y_min + (b.y_max - b.y_min) * j as f64 / (n_dur - 1) as f64)
            .collect();
        let population = (0..n_amp)
            .map(|i| (0..n_dur).map(|j| grid[0][j][i]).collect())
            .collect();
        Ok(Self {
            amplitudes,
            durations,
            population,
        })
    }
}

/// Chevron over `amplitudes` and durations `0, ts, …, max_samples·ts`.
pub fn simulate_chevron(
    pair: &PairSpec,
    model: GateModel,
    amplitudes: &[f64],
    max_samples: usize,
    ts: f64,
) -> Result<ChevronMap> {
    let durations: Vec<f64> = (0..=max_samples).map(|k| k as f64 * ts).collect();
    let population: Result<Vec<Vec<f64>>> = amplitudes
        .par_iter()
        .map(|&a| {
            (0..=max_samples)
                .map(|k| transfer_population(pair, model, a, k, ts))
                .collect()
        })
        .collect();
    Ok(ChevronMap {
        amplitudes: amplitudes.to_vec(),
        durations,
        population: population?,
    })
}

/// `p(t) ≈ offset + c·cos(ωt) + s·sin(ωt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub omega: f64,
    pub offset: f64,
    /// Peak-to-peak swing, `2·√(c² + s²)`.
    pub contrast: f64,
    pub rms_residual: f64,
}

/// Least-squares sinusoid: the linear coefficients are eliminated for each
/// trial frequency, the frequency is scanned and then refined by golden
/// section.
pub fn fit_sinusoid(t: &[f64], p: &[f64]) -> Result<SinusoidFit> {
    let n = t.len();
    if n < 6 || p.len() != n {
        return Err(Error::FitFailed(format!("{n} points are too few for a sinusoid")));
    }
    let span = t[n - 1] - t[0];
    let dt = span / (n - 1) as f64;
    if !(span > 0.0) {
        return Err(Error::FitFailed("zero time span".into()));
    }
    let y = DVector::from_column_slice(p);
    let w = DVector::from_element(n, 1.0);
    let solve = |omega: f64| -> Option<(f64, DVector<f64>)> {
        let x = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => (omega * t[i]).cos(),
            _ => (omega * t[i]).sin(),
        });
        weighted_lstsq(&x, &y, &w).ok().map(|f| (f.chi2, f.coeffs))
    };
    let lo = 1.5 * PI / span;
    let hi = 0.95 * PI / dt;
    let m = 8 * n;
    let mut best = (f64::INFINITY, lo);
    for k in 0..m {
        let omega = lo + (hi - lo) * k as f64 / (m - 1) as f64;
        if let Some((chi2, _)) = solve(omega) {
            if chi2 < best.0 {
                best = (chi2, omega);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::FitFailed("no frequency gives a well-posed fit".into()));
    }
    let step = (hi - lo) / (m - 1) as f64;
    let (omega, _) = golden_min(
        |om| solve(om).map_or(f64::INFINITY, |s| s.0),
        (best.1 - step).max(lo),
        (best.1 + step).min(hi),
        1e-10 * best.1,
    );
    let (chi2, c) = solve(omega).ok_or_else(|| Error::FitFailed("refined fit is singular".into()))?;
    Ok(SinusoidFit {
        omega,
        offset: c[0],
        contrast: 2.0 * c[1].hypot(c[2]),
        rms_residual: (chi2 / n as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChevronFit {
    /// Amplitude bringing `|11>` and the target state on resonance.
    pub a_res: f64,
    /// Speed limit `2π / Ω_min` from the slowest oscillation (s).
    pub t_lim_fit: f64,
    /// RMS residual of the sinusoid fit at the column nearest the axis.
    pub goodness: f64,
}

/// Columns whose swing is below this are treated as flat.
const MIN_CONTRAST: f64 = 0.05;

/// Locates the chevron axis from per-amplitude sinusoid fits: near
/// resonance `Ω² = 4J₂² + Δ(A)²` is fitted by a parabola in `A` whose
/// vertex gives the resonance amplitude and the minimum frequency.
pub fn chevron_fit(map: &ChevronMap) -> Result<ChevronFit> {
    if map.amplitudes.len() < 3 {
        return Err(Error::FitFailed("chevron needs at least 3 amplitudes".into()));
    }
    let fits: Vec<Option<SinusoidFit>> = map
        .population
        .par_iter()
        .map(|col| fit_sinusoid(&map.durations, col).ok())
        .collect();
    let max_contrast = fits.iter().flatten().map(|f| f.contrast).fold(0.0, f64::max);
    if max_contrast < MIN_CONTRAST {
        return Err(Error::FitFailed(format!(
            "largest oscillation contrast {max_contrast:.3e} is below {MIN_CONTRAST}"
        )));
    }
    let valid: Vec<(usize, SinusoidFit)> = fits
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.filter(|f| f.contrast >= 0.2 * max_contrast).map(|f| (i, f)))
        .collect();
    if valid.len() < 3 {
        return Err(Error::FitFailed(format!(
            "only {} amplitude columns oscillate",
            valid.len()
        )));
    }
    let k_min = (0..valid.len())
        .min_by(|&a, &b| valid[a].1.omega.total_cmp(&valid[b].1.omega))
        .unwrap();
    let lo = k_min.saturating_sub(3);
    let hi = (k_min + 3).min(valid.len() - 1);
    let (axis_col, axis_fit) = valid[k_min];
    let fallback = ChevronFit {
        a_res: map.amplitudes[axis_col],
        t_lim_fit: 2.0 * PI / axis_fit.omega,
        goodness: axis_fit.rms_residual,
    };
    if hi - lo < 2 {
        return Ok(fallback);
    }
    let pts = &valid[lo..=hi];
    let a0 = map.amplitudes[axis_col];
    let x = DMatrix::from_fn(pts.len(), 3, |i, j| (map.amplitudes[pts[i].0] - a0).powi(j as i32));
    let y = DVector::from_fn(pts.len(), |i, _| pts[i].1.omega.powi(2));
    let w = DVector::from_element(pts.len(), 1.0);
    let q = weighted_lstsq(&x, &y, &w)?.coeffs;
    if !(q[2] > 0.0) {
        return Ok(fallback);
    }
    let shift = -q[1] / (2.0 * q[2]);
    let omega2 = q[0] - q[1] * q[1] / (4.0 * q[2]);
    let a_lo = map.amplitudes[pts[0].0];
    let a_hi = map.amplitudes[pts[pts.len() - 1].0];
    let a_res = a0 + shift;
    if !(omega2 > 0.0) || a_res < a_lo.min(a_hi) || a_res > a_lo.max(a_hi) {
        return Ok(fallback);
    }
    Ok(ChevronFit {
        a_res,
        t_lim_fit: 2.0 * PI / omega2.sqrt(),
        goodness: axis_fit.rms_residual,
    })
}

/// Leakage values below this are treated as equal when comparing minima.
pub const LEAKAGE_FLOOR: f64 = 1e-8;

/// A contour point with its freshly evaluated gate metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub x: f64,
    pub y: f64,
    pub phi2q: f64,
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Best point: `(x, y)` in landscape coordinates.
    pub best: ContourPoint,
    /// `|φ2Q − π|` at the best point (rad).
    pub pc_residual: f64,
    pub contour: Contour,
    /// Leakage along each polyline of the contour.
    pub trace: Vec<Vec<ContourPoint>>,
    /// Distinct leakage minima along the contour, best first.
    pub minima: Vec<ContourPoint>,
    pub speed_limit_threshold: Option<f64>,
    pub speed_limit_violation: bool,
}

/// Local minima of a leakage trace, refined along the curve, with shallow
/// neighbours merged: two minima are distinct only if the trace between
/// them rises above twice the larger one (values floored at
/// [`LEAKAGE_FLOOR`]).
fn trace_minima<F>(trace: &[ContourPoint], refine: &F) -> Result<Vec<ContourPoint>>
where
    F: Fn(&ContourPoint, &ContourPoint, &ContourPoint) -> Result<ContourPoint>,
{
    let n = trace.len();
    if n < 3 {
        return Ok(Vec::new());
    }
    let fl = |p: &ContourPoint| p.leakage.max(LEAKAGE_FLOOR);
    let mut idx: Vec<usize> = (1..n - 1)
        .filter(|&i| trace[i].leakage <= trace[i - 1].leakage && trace[i].leakage < trace[i + 1].leakage)
        .collect();
    // merge minima not separated by a significant barrier
    let mut k = 0;
    while k + 1 < idx.len() {
        let (a, b) = (idx[k], idx[k + 1]);
        let barrier = trace[a..=b].iter().map(fl).fold(0.0, f64::max);
        if barrier < 2.0 * fl(&trace[a]).max(fl(&trace[b])) {
            if trace[b].leakage < trace[a].leakage {
                idx.remove(k);
            } else {
                idx.remove(k + 1);
            }
        } else {
            k += 1;
        }
    }
    idx.iter()
        .map(|&i| refine(&trace[i - 1], &trace[i], &trace[i + 1]))
        .collect()
}

/// Shared valley-crossing search: samples the conditional phase and
/// leakage of `eval(x, y)`, contours `φ2Q = π`, evaluates leakage along the
/// contour and returns the contour point of least leakage.
pub fn calibrate_on_contour<F>(
    eval: F,
    bounds: Bounds,
    budget: usize,
    speed_limit_threshold: Option<f64>,
) -> Result<CalibrationReport>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    let samples = adaptive_sample_fields(
        |x, y| eval(x, y).map(|(p, l)| vec![p, l]),
        &[FieldKind::Phase, FieldKind::Linear],
        bounds,
        budget,
    )?;
    let raw = extract_contour_field(&samples, 0, PI, 0)?;
    let phase = |x: f64, y: f64| eval(x, y).map(|r| r.0);
    let contour = refine_contour(&raw, &phase, FieldKind::Phase, &bounds, 1e-9)?;
    let point = |x: f64, y: f64| -> Result<ContourPoint> {
        let (phi2q, leakage) = eval(x, y)?;
        Ok(ContourPoint { x, y, phi2q, leakage })
    };
    let trace: Vec<Vec<ContourPoint>> = contour
        .polylines
        .iter()
        .map(|line| line.par_iter().map(|&(x, y)| point(x, y)).collect())
        .collect::<Result<_>>()?;
    // golden search between neighbours of a trace minimum, projecting each
    // trial point back onto the contour
    let refine = |a: &ContourPoint, m: &ContourPoint, b: &ContourPoint| -> Result<ContourPoint> {
        let on_curve = |s: f64| -> Option<ContourPoint> {
            let (p, q, t) = if s < 0.0 { (m, a, -s) } else { (m, b, s) };
            let x = p.x + t * (q.x - p.x);
            let y = p.y + t * (q.y - p.y);
            let proj = project_to_level(&phase, FieldKind::Phase, PI, &bounds, x, y, 1e-9).ok()??;
            point(proj.0, proj.1).ok()
        };
        let (s, _) = golden_min(
            |s| on_curve(s).map_or(f64::INFINITY, |p| p.leakage),
            -1.0,
            1.0,
            1e-4,
        );
        Ok(match on_curve(s) {
            Some(p) if p.leakage <= m.leakage => p,
            _ => *m,
        })
    };
    let mut minima = Vec::new();
    for line in &trace {
        minima.extend(trace_minima(line, &refine)?);
    }
    minima.sort_by(|a, b| a.leakage.total_cmp(&b.leakage));
    let best_vertex = trace
        .iter()
        .flatten()
        .min_by(|a, b| a.leakage.total_cmp(&b.leakage))
        .copied()
        .ok_or(Error::NoContour { level: PI })?;
    let best = match minima.first() {
        Some(m) if m.leakage <= best_vertex.leakage => *m,
        _ => best_vertex,
    };
    let violation = speed_limit_threshold.is_some_and(|t| best.leakage > t);
    Ok(CalibrationReport {
        best,
        pc_residual: phase_distance(best.phi2q, PI),
        contour,
        trace,
        minima,
        speed_limit_threshold,
        speed_limit_violation: violation,
    })
}

/// Window of the SNZ calibration: `A ∈ [0.9, 1.1]` and `B = f·A`,
/// `f ∈ [0, 1]`. Landscape `y` coordinates are the fraction `f`.
pub fn snz_window() -> Bounds {
    Bounds::new(0.9, 1.1, 0.0, 1.0).expect("fixed window")
}

/// Result of an SNZ calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnzCalibration {
    pub a_star: f64,
    pub b_star: f64,
    pub params: SnzParams,
    pub report: CalibrationReport,
}

/// Finds `(A, B)` on the `φ2Q = π` contour of least leakage for an SNZ
/// pulse of strong duration `tp` and idle `t_mid`.
pub fn calibrate_snz(
    pair: &PairSpec,
    model: GateModel,
    tp: f64,
    t_mid: f64,
    ts: f64,
    budget: usize,
    speed_limit_threshold: Option<f64>,
) -> Result<SnzCalibration> {
    calibrate_snz_padded(pair, model, tp, t_mid, ts, budget, speed_limit_threshold, 0)
}

/// Like [`calibrate_snz`] but the pulse is followed by an idle that fills
/// a time slot of `slot` seconds, so the conditional phase picked up from
/// residual ZZ at the bias point is absorbed into the calibration.
pub fn calibrate_snz_in_slot(
    pair: &PairSpec,
    model: GateModel,
    tp: f64,
    t_mid: f64,
    ts: f64,
    budget: usize,
    slot: f64,
) -> Result<SnzCalibration> {
    let used = make_snz(&SnzParams::new(1.0, 0.0, tp, t_mid), ts)?.len();
    let pad = slot_padding(slot, used, ts)?;
    calibrate_snz_padded(pair, model, tp, t_mid, ts, budget, None, pad)
}

fn slot_padding(slot: f64, used: usize, ts: f64) -> Result<usize> {
    let total = (slot / ts).round();
    if !(total >= used as f64) {
        return Err(Error::InvalidParameter(format!(
            "slot of {slot:e} s is shorter than the {used}-sample pulse"
        )));
    }
    Ok(total as usize - used)
}

fn padded(w: Waveform, pad: usize) -> Result<Waveform> {
    if pad == 0 {
        return Ok(w);
    }
    let ts = w.ts();
    let mut samples = w.samples().to_vec();
    samples.resize(samples.len() + pad, 0.0);
    Waveform::new(samples, ts)
}

#[allow(clippy::too_many_arguments)]
fn calibrate_snz_padded(
    pair: &PairSpec,
    model: GateModel,
    tp: f64,
    t_mid: f64,
    ts: f64,
    budget: usize,
    speed_limit_threshold: Option<f64>,
    pad: usize,
) -> Result<SnzCalibration> {
    // validate the grid once up front
    make_snz(&SnzParams::new(1.0, 0.0, tp, t_mid), ts)?;
    let eval = |a: f64, f: f64| {
        let w = make_snz(&SnzParams::new(a, f * a, tp, t_mid), ts)?;
        gate_metrics(pair, model, &padded(w, pad)?)
    };
    let report = calibrate_on_contour(eval, snz_window(), budget, speed_limit_threshold)?;
    let a_star = report.best.x;
    let b_star = report.best.y * a_star;
    Ok(SnzCalibration {
        a_star,
        b_star,
        params: SnzParams::new(a_star, b_star, tp, t_mid),
        report,
    })
}

/// Speed-limit threshold relative to the matched-duration minimum.
pub const SPEED_LIMIT_FACTOR: f64 = 10.0;

/// Calibrates at `tp = choose_tp(t_lim)` and returns the threshold
/// `SPEED_LIMIT_FACTOR · max(L₁_min, LEAKAGE_FLOOR)` for other durations.
pub fn matched_speed_limit_threshold(
    pair: &PairSpec,
    model: GateModel,
    t_mid: f64,
    ts: f64,
    budget: usize,
) -> Result<f64> {
    let tp = choose_tp_samples(pair.t_lim(), ts)? as f64 * ts;
    let cal = calibrate_snz(pair, model, tp, t_mid, ts, budget, None)?;
    Ok(SPEED_LIMIT_FACTOR * cal.report.best.leakage.max(LEAKAGE_FLOOR))
}

/// Window of the conventional-NZ calibration: peak amplitude and curvature.
pub fn nz_window() -> Bounds {
    Bounds::new(0.95, 1.4, 0.0, 1.0).expect("fixed window")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NzCalibration {
    pub params: NzParams,
    pub report: CalibrationReport,
}

/// Finds `(a, a_curve)` on the `φ2Q = π` contour of least leakage for a
/// conventional NZ pulse of duration `tp`.
pub fn calibrate_nz(pair: &PairSpec, model: GateModel, tp: f64, ts: f64, budget: usize) -> Result<NzCalibration> {
    calibrate_nz_padded(pair, model, tp, ts, budget, 0)
}

/// NZ counterpart of [`calibrate_snz_in_slot`].
pub fn calibrate_nz_in_slot(pair: &PairSpec, model: GateModel, tp: f64, ts: f64, budget: usize, slot: f64) -> Result<NzCalibration> {
    let used = make_nz(&NzParams { a: 1.0, a_curve: 0.0, tp }, ts)?.len();
    let pad = slot_padding(slot, used, ts)?;
    calibrate_nz_padded(pair, model, tp, ts, budget, pad)
}

fn calibrate_nz_padded(pair: &PairSpec, model: GateModel, tp: f64, ts: f64, budget: usize, pad: usize) -> Result<NzCalibration> {
    let eval = |a: f64, curve: f64| {
        let w = make_nz(&NzParams { a, a_curve: curve, tp }, ts)?;
        gate_metrics(pair, model, &padded(w, pad)?)
    };
    let report = calibrate_on_contour(eval, nz_window(), budget, None)?;
    Ok(NzCalibration {
        params: NzParams {
            a: report.best.x,
            a_curve: report.best.y,
            tp,
        },
        report,
    })
}

/// Largest amplitude a weak pulse of duration `t1q` needs to wind a phase
/// through `2.5π`, limited to half the bias detuning for the fluxed line.
fn weak_amplitude_limit(pair: &PairSpec, fluxed_line: bool, t1q: f64) -> Result<f64> {
    let t = if fluxed_line { &pair.fluxed } else { &pair.static_partner };
    let mut shift = 2.5 * PI / t1q;
    if fluxed_line {
        shift = shift.min(0.5 * pair.delta_bias);
    }
    let turnover = 0.5 * t.flux_arc.period / pair.flux_resonance;
    let a_max = crate::device::MAX_AMPLITUDE.min(turnover * (1.0 - 1e-6));
    let g = |a: f64| t.frequency_shift(pair.flux(a)) + shift;
    if g(a_max) > 0.0 {
        return Ok(a_max);
    }
    brent_root(g, 0.0, a_max, 1e-12)
}

/// Smallest non-negative root of a wrapped phase `phase(c)` on
/// `[0, c_max]`, found by scanning for a sign change that is not a branch
/// cut and refining with Brent.
fn phase_root(phase: impl Fn(f64) -> Result<f64>, c_max: f64) -> Result<f64> {
    const SCAN: usize = 96;
    let mut prev = (0.0, phase(0.0)?);
    if prev.1.abs() < 1e-3 * PHASE_NULL_TOL {
        return Ok(0.0);
    }
    for k in 1..=SCAN {
        let c = c_max * k as f64 / SCAN as f64;
        let v = phase(c)?;
        if (v >= 0.0) != (prev.1 >= 0.0) && (v - prev.1).abs() < PI {
            let mut err = None;
            let r = brent_root(
                |x| match phase(x) {
                    Ok(p) => p,
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                },
                prev.0,
                c,
                1e-13,
            );
            if let Some(e) = err {
                return Err(e);
            }
            return r;
        }
        prev = (c, v);
    }
    Err(Error::RootNotBracketed(format!(
        "single-qubit phase does not cross zero for amplitudes up to {c_max:.4}"
    )))
}

/// Phase tolerance of [`null_single_qubit_phases`].
pub const PHASE_NULL_TOL: f64 = 1e-4;

/// Amplitudes `(c, d)` of the weak bipolar pulses on the fluxed and partner
/// lines that null the single-qubit phases of `strong` followed by the weak
/// pulses and padding to the allocation. `c` nulls the fluxed transmon's
/// phase, `d` the partner's.
pub fn null_single_qubit_phases(pair: &PairSpec, strong: &Waveform, alloc: &Allocation) -> Result<(f64, f64)> {
    let phases = |c: f64, d: f64| -> Result<(f64, f64)> {
        let s = gate_schedule(strong, (c, d), alloc)?;
        let u = full_propagate_lines(
            pair,
            s.fluxed.samples(),
            s.partner.as_ref().map(|p| p.samples()),
            strong.ts(),
        )?;
        let p = extract_cp_params(&u)?;
        Ok((p.phi01, p.phi10))
    };
    let c_max = weak_amplitude_limit(pair, true, alloc.t1q)?;
    let d_max = weak_amplitude_limit(pair, false, alloc.t1q)?;
    let mut d = 0.0;
    for _ in 0..8 {
        let c = phase_root(|x| phases(x, d).map(|p| p.0), c_max)?;
        d = phase_root(|x| phases(c, x).map(|p| p.1), d_max)?;
        let (p01, p10) = phases(c, d)?;
        if p01.abs() < PHASE_NULL_TOL && p10.abs() < PHASE_NULL_TOL {
            return Ok((c, d));
        }
    }
    Err(Error::RootNotBracketed(
        "alternating phase nulling did not converge".into(),
    ))
}
