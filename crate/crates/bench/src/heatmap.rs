//! Grid exports of predicted, exact and absolute-error fields.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pinn_core::{Error as CoreError, PdeProblem, PredictorModel};

use crate::checkpoint::Checkpoint;
use crate::error::{BenchError, Result};
use crate::run::fmt_float;

/// Values on a 2D (or 1D) grid, row-major with the first axis slowest.
#[derive(Debug, Clone)]
pub struct Grid {
    pub axes: Vec<(String, Vec<f64>)>,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// The three grids of one component on one slice.
#[derive(Debug, Clone)]
pub struct SliceGrids {
    pub component: usize,
    pub time: Option<f64>,
    pub predicted: Grid,
    pub exact: Grid,
    pub error: Grid,
}

fn axis_name(problem: &PdeProblem, axis: usize) -> String {
    if Some(axis) == problem.time_axis() {
        return "t".into();
    }
    match (problem.spatial_dim(), axis) {
        (d, a) if d <= 3 => ["x", "y", "z"][a].into(),
        (_, a) => format!("x{a}"),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Evaluates `model` with `params` on the plotting plane of its problem.
///
/// One spatial axis plus time gives the full space-time rectangle and
/// `times` is ignored. Otherwise the plane spans the first two spatial axes
/// (a line for 1D Poisson), remaining spatial axes sit at their midpoints
/// and there is one grid per entry of `times`.
pub fn evaluate(model: &PredictorModel, params: &[f64], res: &[usize], times: &[f64]) -> Result<Vec<SliceGrids>> {
    let problem = &model.problem;
    if res.is_empty() || res.iter().any(|&r| r < 2) {
        return Err(BenchError::Config("heatmap resolution must be at least 2 per axis".into()));
    }
    let sd = problem.spatial_dim();
    let plane: Vec<usize> = match (sd, problem.time_axis()) {
        (1, Some(t)) => vec![0, t],
        (1, None) => vec![0],
        _ => vec![0, 1],
    };
    let slices: Vec<Option<f64>> = match problem.time_axis() {
        Some(_) if sd > 1 => {
            if times.is_empty() {
                vec![problem.initial_time()]
            } else {
                times.iter().map(|t| Some(*t)).collect()
            }
        }
        _ => vec![None],
    };
    let axes: Vec<(String, Vec<f64>)> = plane
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let (lo, hi) = problem.bounds(a);
            (axis_name(problem, a), linspace(lo, hi, *res.get(i).unwrap_or(&res[0])))
        })
        .collect();
    let mut out = Vec::new();
    for t in slices {
        if let Some(t) = t {
            if problem.is_singular_time(t) {
                return Err(CoreError::Singularity(t).into());
            }
        }
        let mut base: Vec<f64> = (0..problem.input_dim())
            .map(|a| {
                let (lo, hi) = problem.bounds(a);
                0.5 * (lo + hi)
            })
            .collect();
        if let (Some(ta), Some(t)) = (problem.time_axis(), t) {
            base[ta] = t;
        }
        let comps = problem.components();
        let mut pred = vec![Vec::new(); comps];
        let mut exact = vec![Vec::new(); comps];
        let second = axes.get(1).map_or(vec![0.0], |a| a.1.clone());
        for &u in &axes[0].1 {
            for &v in &second {
                let mut x = base.clone();
                x[plane[0]] = u;
                if plane.len() > 1 {
                    x[plane[1]] = v;
                }
                let p = model.predict(params, &x)?;
                let e = problem.exact_solution(&x)?;
                for c in 0..comps {
                    pred[c].push(p[c]);
                    exact[c].push(e[c]);
                }
            }
        }
        for c in 0..comps {
            let err: Vec<f64> = pred[c].iter().zip(&exact[c]).map(|(a, b)| (a - b).abs()).collect();
            let grid = |values| Grid {
                axes: axes.clone(),
                values,
            };
            out.push(SliceGrids {
                component: c,
                time: t,
                predicted: grid(pred[c].clone()),
                exact: grid(exact[c].clone()),
                error: grid(err),
            });
        }
    }
    Ok(out)
}

pub fn write_grid_csv(path: &Path, grid: &Grid) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::csv(path, e))?;
    let err = |e| BenchError::csv(path, e);
    let mut header: Vec<String> = grid.axes.iter().map(|a| a.0.clone()).collect();
    header.push("value".into());
    w.write_record(&header).map_err(err)?;
    let second = grid.axes.get(1).map_or(1, |a| a.1.len());
    for (i, v) in grid.values.iter().enumerate() {
        let mut row = vec![fmt_float(grid.axes[0].1[i / second])];
        if let Some(a) = grid.axes.get(1) {
            row.push(fmt_float(a.1[i % second]));
        }
        row.push(fmt_float(*v));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Viridis-like five-stop colour ramp.
fn colour(s: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let s = if s.is_finite() { s.clamp(0.0, 1.0) } else { 0.0 };
    let f = s * 4.0;
    let i = (f.floor() as usize).min(3);
    let w = f - i as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * w).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    (mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Minimal SVG rendering: one rectangle per grid cell, first axis left to right.
pub fn render_svg(grid: &Grid) -> String {
    let nx = grid.axes[0].1.len();
    let ny = grid.axes.get(1).map_or(1, |a| a.1.len());
    let (lo, hi) = grid
        .values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell = 4;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
        nx * cell,
        ny * cell
    );
    for i in 0..nx {
        for j in 0..ny {
            let (r, g, b) = colour((grid.values[i * ny + j] - lo) / span);
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="rgb({r},{g},{b})"/>"#,
                i * cell,
                (ny - 1 - j) * cell
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<stem>[_c<k>][_t<time>]_{predicted,exact,error}.csv` (and `.svg`)
/// into `out_dir`; returns the paths written.
pub fn export(ckpt: &Checkpoint, res: &[usize], times: &[f64], out_dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let model = ckpt.predictor()?;
    let grids = evaluate(&model, &ckpt.params, res, times)?;
    std::fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let comps = model.problem.components();
    let mut written = Vec::new();
    for g in &grids {
        let mut stem = format!("{}_r{}", ckpt.preset, ckpt.repeat);
        if comps > 1 {
            stem.push_str(&format!("_c{}", g.component));
        }
        if let Some(t) = g.time {
            stem.push_str(&format!("_t{t}"));
        }
        for (kind, grid) in [("predicted", &g.predicted), ("exact", &g.exact), ("error", &g.error)] {
            let path = out_dir.join(format!("{stem}_{kind}.csv"));
            write_grid_csv(&path, grid)?;
            written.push(path);
            if svg {
                let path = out_dir.join(format!("{stem}_{kind}.svg"));
                std::fs::write(&path, render_svg(grid)).map_err(|e| BenchError::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
