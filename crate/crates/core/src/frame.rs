//! Integration of the frame equations for the horizontal part `F` of the
//! immersion: state `(psi, u1, u2)` with `F_x = cosh(omega) e^{i psi} / sqrt(rho)`
//! and `F_y = i sinh(omega) e^{i psi} / sqrt(rho)`.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::chart::ChartSpace;
use crate::error::{Error, Result};
use crate::field::OmegaField;
use crate::grid::GridSpec;
use crate::math::{wrap_angle, Real};
use crate::par::map_range;
use crate::source::OmegaSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeStatus {
    Ok,
    /// `omega` is unavailable here (singular set or overflow).
    Singular,
    /// The chart point left the chart domain.
    Overflow,
    /// The integration path was cut before reaching this node.
    Unreached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSeed {
    pub i: usize,
    pub j: usize,
    pub psi0: f64,
    pub u0: [f64; 2],
}

impl FrameSeed {
    pub fn at(i: usize, j: usize) -> Self {
        Self { i, j, psi0: 0.0, u0: [0.0, 0.0] }
    }

    /// Nearest non-singular node to `(i, j)`, searching outward by rings.
    pub fn nearest_regular(field: &OmegaField, i: usize, j: usize) -> Option<Self> {
        let spec = &field.spec;
        let ok = |a: i64, b: i64| {
            a >= 0 && b >= 0 && (a as usize) < spec.nx && (b as usize) < spec.ny && field.get(a as usize, b as usize).is_some()
        };
        let radius = spec.nx.max(spec.ny) as i64;
        for r in 0..radius {
            let mut best: Option<(i64, i64, i64)> = None;
            for dj in -r..=r {
                for di in -r..=r {
                    if di.abs().max(dj.abs()) != r {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    let d2 = di * di + dj * dj;
                    if ok(a, b) && best.is_none_or(|(_, _, e)| d2 < e) {
                        best = Some((a, b, d2));
                    }
                }
            }
            if let Some((a, b, _)) = best {
                return Some(Self::at(a as usize, b as usize));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameOptions {
    /// RK4 steps per grid spacing.
    pub substeps: usize,
    /// Fail on the first singular or overflowing node instead of truncating.
    pub strict: bool,
    /// Columns (and rows) sampled by the transposed-path check.
    pub compat_samples: usize,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self { substeps: 1, strict: false, compat_samples: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameField {
    pub spec: GridSpec,
    pub chart: ChartSpace,
    pub seed: FrameSeed,
    pub psi: Vec<f64>,
    pub u: Vec<[f64; 2]>,
    pub status: Vec<NodeStatus>,
    /// Largest discrepancy between the column-then-row and the
    /// row-then-column integration paths on a sample of nodes.
    pub compat_linf: f64,
}

impl FrameField {
    #[inline]
    pub fn ok(&self, i: usize, j: usize) -> bool {
        self.status[self.spec.idx(i, j)] == NodeStatus::Ok
    }

    pub fn reached(&self) -> usize {
        self.status.iter().filter(|&&s| s == NodeStatus::Ok).count()
    }
}

type State = [f64; 3];

#[derive(Clone, Copy)]
enum Dir {
    X,
    Y,
}

enum StepError {
    Singular,
    Overflow,
}

/// Right-hand side of the frame system along `dir` at `(x, y)`.
fn rhs(src: &dyn OmegaSource, chart: &ChartSpace, dir: Dir, x: f64, y: f64, s: &State) -> core::result::Result<State, StepError> {
    let w = src.sample(x, y).ok_or(StepError::Singular)?;
    let (rho, l) = chart.factor([s[1], s[2]]).map_err(|_| StepError::Overflow)?;
    let sr = rho.sqrt();
    let (sn, cs) = (s[0].sin(), s[0].cos());
    Ok(match dir {
        Dir::X => {
            let ch = w.omega.cosh();
            [-w.omega_y + ch / (2.0 * sr) * (cs * l[1] - sn * l[0]), ch / sr * cs, ch / sr * sn]
        }
        Dir::Y => {
            let sh = w.omega.sinh();
            [w.omega_x - sh / (2.0 * sr) * (cs * l[0] + sn * l[1]), -sh / sr * sn, sh / sr * cs]
        }
    })
}

fn axpy(s: &State, h: f64, k: &State) -> State {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]]
}

/// One RK4 step of size `h` from `t` along `dir` (the other coordinate fixed).
fn rk4(src: &dyn OmegaSource, chart: &ChartSpace, dir: Dir, fixed: f64, t: f64, h: f64, s: &State) -> core::result::Result<State, StepError> {
    let at = |t: f64| match dir {
        Dir::X => (t, fixed),
        Dir::Y => (fixed, t),
    };
    let (x, y) = at(t);
    let k1 = rhs(src, chart, dir, x, y, s)?;
    let (x, y) = at(t + 0.5 * h);
    let k2 = rhs(src, chart, dir, x, y, &axpy(s, 0.5 * h, &k1))?;
    let k3 = rhs(src, chart, dir, x, y, &axpy(s, 0.5 * h, &k2))?;
    let (x, y) = at(t + h);
    let k4 = rhs(src, chart, dir, x, y, &axpy(s, h, &k3))?;
    let out = [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ];
    chart.factor([out[1], out[2]]).map_err(|_| StepError::Overflow)?;
    Ok(out)
}

/// Integrates over `[t, t + span]` in `n` equal RK4 steps.
pub(crate) fn advance(src: &dyn OmegaSource, chart: &ChartSpace, along_x: bool, fixed: f64, t: f64, span: f64, n: usize, s: [f64; 3]) -> Option<[f64; 3]> {
    let dir = if along_x { Dir::X } else { Dir::Y };
    let h = span / n as f64;
    let mut s = s;
    for k in 0..n {
        s = rk4(src, chart, dir, fixed, t + k as f64 * h, h, &s).ok()?;
    }
    Some(s)
}

/// States and statuses along one line of nodes, started at node `start`.
struct Line {
    states: Vec<State>,
    status: Vec<NodeStatus>,
    /// First failure as `(coordinate, status)`.
    failure: Option<(f64, NodeStatus)>,
}

#[allow(clippy::too_many_arguments)]
fn integrate_line(
    src: &dyn OmegaSource,
    chart: &ChartSpace,
    dir: Dir,
    fixed: f64,
    coords: &dyn Fn(usize) -> f64,
    n: usize,
    start: usize,
    s0: State,
    regular: &dyn Fn(usize) -> bool,
    substeps: usize,
) -> Line {
    let mut states = vec![[f64::NAN; 3]; n];
    let mut status = vec![NodeStatus::Unreached; n];
    let mut failure = None;
    states[start] = s0;
    status[start] = NodeStatus::Ok;
    for forward in [true, false] {
        let mut s = s0;
        let mut k = start;
        loop {
            let next = if forward {
                if k + 1 >= n {
                    break;
                }
                k + 1
            } else {
                if k == 0 {
                    break;
                }
                k - 1
            };
            let (t0, t1) = (coords(k), coords(next));
            let h = (t1 - t0) / substeps as f64;
            let mut r = Ok(s);
            for q in 0..substeps {
                r = r.and_then(|st| rk4(src, chart, dir, fixed, t0 + q as f64 * h, h, &st));
            }
            let bad = match r {
                Ok(st) if regular(next) => {
                    s = st;
                    states[next] = st;
                    status[next] = NodeStatus::Ok;
                    None
                }
                Ok(_) | Err(StepError::Singular) => Some(NodeStatus::Singular),
                Err(StepError::Overflow) => Some(NodeStatus::Overflow),
            };
            if let Some(b) = bad {
                status[next] = b;
                if failure.is_none() {
                    failure = Some((t1, b));
                }
                break;
            }
            k = next;
        }
    }
    Line { states, status, failure }
}

fn line_error(fixed_is_x: bool, fixed: f64, failure: (f64, NodeStatus)) -> Error {
    let (x, y) = if fixed_is_x { (fixed, failure.0) } else { (failure.0, fixed) };
    match failure.1 {
        NodeStatus::Overflow => Error::ChartOverflow { x, y },
        _ => Error::SingularCrossing { x, y },
    }
}

/// Integrates the frame along the seed column, then along every row.
pub fn integrate_frame(
    field: &OmegaField,
    source: &dyn OmegaSource,
    chart: &ChartSpace,
    seed: &FrameSeed,
    opts: &FrameOptions,
) -> Result<FrameField> {
    let spec = field.spec;
    if (chart.c0 - field.c0).abs() > 1e-12 * (1.0 + field.c0.abs()) || (source.c0() - field.c0).abs() > 1e-12 * (1.0 + field.c0.abs()) {
        return Err(Error::InvalidParams("chart, source and field curvatures differ"));
    }
    if seed.i >= spec.nx || seed.j >= spec.ny {
        return Err(Error::InvalidParams("seed node outside the grid"));
    }
    if field.get(seed.i, seed.j).is_none() || source.sample(spec.x(seed.i), spec.y(seed.j)).is_none() {
        return Err(Error::SingularCrossing { x: spec.x(seed.i), y: spec.y(seed.j) });
    }
    chart.factor(seed.u0)?;
    let substeps = opts.substeps.max(1);
    let s0 = [seed.psi0, seed.u0[0], seed.u0[1]];
    let xs = |i: usize| spec.x(i);
    let ys = |j: usize| spec.y(j);

    let col = integrate_line(
        source, chart, Dir::Y, spec.x(seed.i), &ys, spec.ny, seed.j, s0,
        &|j| field.get(seed.i, j).is_some(), substeps,
    );
    if opts.strict {
        if let Some(f) = col.failure {
            return Err(line_error(true, spec.x(seed.i), f));
        }
    }
    let rows = map_range(spec.ny, |j| {
        if col.status[j] != NodeStatus::Ok {
            return None;
        }
        Some(integrate_line(
            source, chart, Dir::X, spec.y(j), &xs, spec.nx, seed.i, col.states[j],
            &|i| field.get(i, j).is_some(), substeps,
        ))
    });
    let mut psi = vec![f64::NAN; spec.len()];
    let mut u = vec![[f64::NAN; 2]; spec.len()];
    let mut status = vec![NodeStatus::Unreached; spec.len()];
    for j in 0..spec.ny {
        match &rows[j] {
            Some(line) => {
                if opts.strict {
                    if let Some(f) = line.failure {
                        return Err(line_error(false, spec.y(j), f));
                    }
                }
                for i in 0..spec.nx {
                    let k = spec.idx(i, j);
                    status[k] = line.status[i];
                    if line.status[i] == NodeStatus::Ok {
                        psi[k] = line.states[i][0];
                        u[k] = [line.states[i][1], line.states[i][2]];
                    }
                }
            }
            None => status[spec.idx(seed.i, j)] = col.status[j],
        }
    }

    // Transposed path: seed row first, then a sample of columns.
    let row = integrate_line(
        source, chart, Dir::X, spec.y(seed.j), &xs, spec.nx, seed.i, s0,
        &|i| field.get(i, seed.j).is_some(), substeps,
    );
    let samples = opts.compat_samples.max(1);
    let stride_x = (spec.nx / samples).max(1);
    let stride_y = (spec.ny / samples).max(1);
    let cols: Vec<usize> = (0..spec.nx).filter(|i| i % stride_x == seed.i % stride_x).collect();
    let diffs = map_range(cols.len(), |c| {
        let i = cols[c];
        if row.status[i] != NodeStatus::Ok {
            return 0.0f64;
        }
        let line = integrate_line(
            source, chart, Dir::Y, spec.x(i), &ys, spec.ny, seed.j, row.states[i],
            &|j| field.get(i, j).is_some(), substeps,
        );
        let mut worst = 0.0f64;
        for j in (0..spec.ny).filter(|j| j % stride_y == seed.j % stride_y) {
            let k = spec.idx(i, j);
            if line.status[j] == NodeStatus::Ok && status[k] == NodeStatus::Ok {
                let s = line.states[j];
                let e = wrap_angle(s[0] - psi[k]).abs().max((s[1] - u[k][0]).hypot(s[2] - u[k][1]));
                worst = worst.max(e);
            }
        }
        worst
    });
    let compat_linf = diffs.into_iter().fold(0.0, f64::max);
    Ok(FrameField { spec, chart: *chart, seed: *seed, psi, u, status, compat_linf })
}
