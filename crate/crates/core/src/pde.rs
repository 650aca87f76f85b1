//! Benchmark PDEs with closed-form solutions.
//!
//! Points are laid out as spatial coordinates followed by time (when the
//! problem has a time axis). Closed forms are generic over [`Scalar`] so the
//! same code yields values (f64) and exact Taylor jets.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{config, contract, Error, Result};
use crate::jet::{lift_constant, lift_seed, Jet};
use crate::scalar::Scalar;
use crate::tape::{NodeId, Tape};

const SINGULAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ProblemKind {
    /// `-Δu = f` on the unit cube, zero boundary data.
    Poisson { dim: usize },
    /// `u_t + u u_x = 0`, `u = (αx + β_sol)/(αt + 1)`.
    Burgers1Inviscid { alpha: f64, beta_sol: f64 },
    /// `u_t + u u_x = ν u_xx`, travelling tanh front centred at `x_c`.
    Burgers1Viscid { nu: f64, x_c: f64 },
    /// Two-component inviscid Burgers with blow-up at `t = 1/√2`.
    Burgers2Inviscid {
        t_max: f64,
        /// Use the alternative `x = 1` / `y = 1` boundary data instead of the
        /// traces of the exact solution.
        #[cfg_attr(feature = "serde", serde(default))]
        main_text_boundary: bool,
    },
    /// Three-component viscous Burgers, `ν = 1/Re`.
    Burgers3Viscid {
        re: f64,
        /// Decay the exponential as `e^{-t}` rather than `e^{-3t/Re}`; the
        /// two agree only at `Re = 3`.
        #[cfg_attr(feature = "serde", serde(default))]
        literal_decay: bool,
    },
    /// `u_t + u_xxx + 6 u u_x = 0` with an `N`-soliton solution.
    Kdv {
        solitons: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        x_range: Option<(f64, f64)>,
        #[cfg_attr(feature = "serde", serde(default))]
        t_range: Option<(f64, f64)>,
    },
}

/// Which derivatives a residual consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundleShape {
    pub components: usize,
    pub spatial_dim: usize,
    pub dt: bool,
    pub dx: bool,
    pub dxx: bool,
    pub dxxx: bool,
    pub forcing: bool,
}

impl BundleShape {
    /// `(input axis, highest order)` pairs needed to fill this shape.
    pub fn directions(&self, time_axis: Option<usize>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let spatial_order = if self.dxx {
            2
        } else if self.dx {
            1
        } else {
            0
        };
        for a in 0..self.spatial_dim {
            let mut o = spatial_order;
            if a == 0 && self.dxxx {
                o = 3;
            }
            if o > 0 {
                out.push((a, o));
            }
        }
        if self.dt {
            if let Some(t) = time_axis {
                out.push((t, 1));
            }
        }
        out
    }

    pub fn max_order(&self) -> usize {
        if self.dxxx {
            3
        } else if self.dxx {
            2
        } else if self.dx || self.dt {
            1
        } else {
            0
        }
    }
}

/// Field values and the input derivatives one residual needs.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle<V> {
    pub value: Vec<V>,
    pub dt: Option<Vec<V>>,
    /// `[component][spatial axis]`.
    pub dx: Option<Vec<Vec<V>>>,
    pub dxx: Option<Vec<Vec<V>>>,
    /// Third derivative along the first spatial axis, per component.
    pub dxxx: Option<Vec<V>>,
    /// Source term of the Poisson problem.
    pub forcing: Option<V>,
}

impl<V> DerivativeBundle<V> {
    pub fn shape(&self) -> BundleShape {
        BundleShape {
            components: self.value.len(),
            spatial_dim: self
                .dx
                .as_ref()
                .or(self.dxx.as_ref())
                .and_then(|d| d.first())
                .map_or(0, |r| r.len()),
            dt: self.dt.is_some(),
            dx: self.dx.is_some(),
            dxx: self.dxx.is_some(),
            dxxx: self.dxxx.is_some(),
            forcing: self.forcing.is_some(),
        }
    }
}

/// Minimal arithmetic a residual is written against.
pub trait Arith {
    type V: Clone;
    fn add(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sub(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn scale(&mut self, a: &Self::V, s: f64) -> Self::V;
}

/// Plain floating point.
pub struct Plain;

impl Arith for Plain {
    type V = f64;
    fn add(&mut self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&mut self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&mut self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn scale(&mut self, a: &f64, s: f64) -> f64 {
        a * s
    }
}

impl Arith for Tape<'_> {
    type V = NodeId;
    fn add(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        Tape::add(self, *a, *b)
    }
    fn sub(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        Tape::sub(self, *a, *b)
    }
    fn mul(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        Tape::mul(self, *a, *b)
    }
    fn scale(&mut self, a: &NodeId, s: f64) -> NodeId {
        Tape::scale(self, *a, s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem {
    kind: ProblemKind,
    spatial: Vec<(f64, f64)>,
    time: Option<(f64, f64)>,
    kdv: Option<KdvParams>,
}

#[derive(Debug, Clone, PartialEq)]
struct KdvParams {
    n: usize,
    k: Vec<f64>,
    eta0: Vec<f64>,
    /// Interaction phase for every subset, indexed by bitmask.
    phase: Vec<f64>,
    /// Sum of `k_i` over every subset.
    ksum: Vec<f64>,
}

impl KdvParams {
    fn new(n: usize) -> KdvParams {
        let (k, eta0): (Vec<f64>, Vec<f64>) = match n {
            1 => (vec![2.0], vec![0.0]),
            2 => (vec![-2.0, 4.0], vec![libm::log(1.0 / 3.0), libm::log(1.0 / 3.0)]),
            _ => (
                vec![2.0, 4.0, -6.0],
                vec![libm::log(1.5), libm::log(0.6), libm::log(0.1)],
            ),
        };
        let subsets = 1usize << n;
        let mut phase = vec![0.0; subsets];
        let mut ksum = vec![0.0; subsets];
        for (mask, (ph, ks)) in phase.iter_mut().zip(ksum.iter_mut()).enumerate() {
            for i in 0..n {
                if mask & (1 << i) == 0 {
                    continue;
                }
                *ks += k[i];
                *ph += eta0[i];
                for j in i + 1..n {
                    if mask & (1 << j) != 0 {
                        let r = (k[i] - k[j]) / (k[i] + k[j]);
                        *ph += libm::log(r * r);
                    }
                }
            }
        }
        KdvParams { n, k, eta0, phase, ksum }
    }
}

impl PdeProblem {
    pub fn new(kind: ProblemKind) -> Result<PdeProblem> {
        let unit = (0.0, 1.0);
        let (spatial, time) = match kind {
            ProblemKind::Poisson { dim } => {
                if dim == 0 {
                    return Err(config("poisson dimension must be at least 1"));
                }
                (vec![unit; dim], None)
            }
            ProblemKind::Burgers1Inviscid { alpha, beta_sol } => {
                if !(alpha >= 0.0) || !beta_sol.is_finite() {
                    return Err(config("burgers1 inviscid needs alpha >= 0 and finite beta"));
                }
                (vec![unit], Some(unit))
            }
            ProblemKind::Burgers1Viscid { nu, x_c } => {
                if !(nu > 0.0) || !x_c.is_finite() {
                    return Err(config("burgers1 viscid needs nu > 0"));
                }
                (vec![unit], Some(unit))
            }
            ProblemKind::Burgers2Inviscid { t_max, .. } => {
                if !(t_max > 0.0) || t_max >= core::f64::consts::FRAC_1_SQRT_2 {
                    return Err(config("burgers2 t_max must lie in (0, 1/sqrt(2))"));
                }
                (vec![unit; 2], Some((0.0, t_max)))
            }
            ProblemKind::Burgers3Viscid { re, .. } => {
                if !(re > 0.0) || !re.is_finite() {
                    return Err(config("burgers3 needs Re > 0"));
                }
                (vec![unit; 3], Some(unit))
            }
            ProblemKind::Kdv {
                solitons,
                x_range,
                t_range,
            } => {
                let (dx, dt) = match solitons {
                    1 => ((0.0, 1.0), (0.0, 1.0)),
                    2 => ((-5.0, 5.0), (-1.0, 1.0)),
                    3 => ((-4.0, 4.0), (-0.5, 0.5)),
                    n => return Err(config(format!("kdv soliton count {n} outside 1..=3"))),
                };
                let xr = x_range.unwrap_or(dx);
                let tr = t_range.unwrap_or(dt);
                if !(xr.0 < xr.1) || !(tr.0 < tr.1) {
                    return Err(config("kdv ranges must be increasing"));
                }
                (vec![xr], Some(tr))
            }
        };
        let kdv = match kind {
            ProblemKind::Kdv { solitons, .. } => Some(KdvParams::new(solitons)),
            _ => None,
        };
        Ok(PdeProblem {
            kind,
            spatial,
            time,
            kdv,
        })
    }

    pub fn poisson(dim: usize) -> Result<PdeProblem> {
        PdeProblem::new(ProblemKind::Poisson { dim })
    }

    pub fn burgers1_inviscid() -> PdeProblem {
        match PdeProblem::new(ProblemKind::Burgers1Inviscid {
            alpha: 1.0,
            beta_sol: 0.0,
        }) {
            Ok(p) => p,
            Err(_) => unreachable!(),
        }
    }

    pub fn burgers1_viscid(nu: f64, x_c: f64) -> Result<PdeProblem> {
        PdeProblem::new(ProblemKind::Burgers1Viscid { nu, x_c })
    }

    pub fn burgers2_inviscid(t_max: f64) -> Result<PdeProblem> {
        PdeProblem::new(ProblemKind::Burgers2Inviscid {
            t_max,
            main_text_boundary: false,
        })
    }

    pub fn burgers3_viscid(re: f64) -> Result<PdeProblem> {
        PdeProblem::new(ProblemKind::Burgers3Viscid {
            re,
            literal_decay: false,
        })
    }

    pub fn kdv(solitons: usize) -> Result<PdeProblem> {
        PdeProblem::new(ProblemKind::Kdv {
            solitons,
            x_range: None,
            t_range: None,
        })
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }

    pub fn is_poisson(&self) -> bool {
        matches!(self.kind, ProblemKind::Poisson { .. })
    }

    pub fn is_kdv(&self) -> bool {
        matches!(self.kind, ProblemKind::Kdv { .. })
    }

    /// Short label used in file names and reports.
    pub fn label(&self) -> alloc::string::String {
        match self.kind {
            ProblemKind::Poisson { dim } => format!("poisson_d{dim}"),
            ProblemKind::Burgers1Inviscid { .. } => "burgers1_inviscid".into(),
            ProblemKind::Burgers1Viscid { nu, .. } => format!("burgers1_viscid_nu{nu}"),
            ProblemKind::Burgers2Inviscid { t_max, .. } => format!("burgers2_inviscid_t{t_max}"),
            ProblemKind::Burgers3Viscid { re, .. } => format!("burgers3_viscid_nu{}", 1.0 / re),
            ProblemKind::Kdv { solitons, .. } => format!("kdv{solitons}"),
        }
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial.len()
    }

    pub fn has_time(&self) -> bool {
        self.time.is_some()
    }

    pub fn time_axis(&self) -> Option<usize> {
        self.time.map(|_| self.spatial.len())
    }

    pub fn input_dim(&self) -> usize {
        self.spatial.len() + usize::from(self.time.is_some())
    }

    pub fn components(&self) -> usize {
        match self.kind {
            ProblemKind::Burgers2Inviscid { .. } => 2,
            ProblemKind::Burgers3Viscid { .. } => 3,
            _ => 1,
        }
    }

    /// Closed interval of input axis `axis`.
    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        if axis < self.spatial.len() {
            self.spatial[axis]
        } else {
            match self.time {
                Some(t) => t,
                None => panic!("axis {axis} out of range"),
            }
        }
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        self.time
    }

    /// Time of the initial slice. Every problem starts at `t = 0`, which is
    /// interior for the wider soliton windows.
    pub fn initial_time(&self) -> Option<f64> {
        self.time.map(|_| 0.0)
    }

    /// Field component pinned on faces normal to `axis`.
    pub fn face_component(&self, axis: usize) -> usize {
        if self.components() > 1 {
            axis
        } else {
            0
        }
    }

    pub fn is_singular_time(&self, t: f64) -> bool {
        matches!(self.kind, ProblemKind::Burgers2Inviscid { .. }) && libm::fabs(1.0 - 2.0 * t * t) < SINGULAR_TOL
    }

    /// Viscosity, where the problem has one.
    pub fn viscosity(&self) -> Option<f64> {
        match self.kind {
            ProblemKind::Burgers1Viscid { nu, .. } => Some(nu),
            ProblemKind::Burgers3Viscid { re, .. } => Some(1.0 / re),
            _ => None,
        }
    }

    fn check_point<S: Scalar>(&self, point: &[S]) -> Result<()> {
        if point.len() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                found: point.len(),
            });
        }
        if let Some(t) = self.time_axis() {
            let tv = point[t].value();
            if matches!(self.kind, ProblemKind::Burgers2Inviscid { .. }) {
                let d = 1.0 - 2.0 * tv * tv;
                if libm::fabs(d) < SINGULAR_TOL {
                    return Err(Error::Singularity(libm::fabs(d)));
                }
            }
        }
        Ok(())
    }

    pub fn exact_solution<S: Scalar>(&self, point: &[S]) -> Result<Vec<S>> {
        self.check_point(point)?;
        Ok(match self.kind {
            ProblemKind::Poisson { .. } => {
                let mut u = (point[0] * PI).sin();
                for x in &point[1..] {
                    u = u * (*x * PI).sin();
                }
                vec![u]
            }
            ProblemKind::Burgers1Inviscid { alpha, beta_sol } => {
                let (x, t) = (point[0], point[1]);
                vec![(x * alpha + beta_sol) / (t * alpha + 1.0)]
            }
            ProblemKind::Burgers1Viscid { nu, x_c } => {
                let (x, t) = (point[0], point[1]);
                vec![((x - x_c - t) / (2.0 * nu)).tanh().rsub(1.0)]
            }
            ProblemKind::Burgers2Inviscid { .. } => {
                let (x, y, t) = (point[0], point[1], point[2]);
                let den = (t * t * 2.0).rsub(1.0);
                let u = (x + y - x * t * 2.0) / den;
                let v = (x - y - y * t * 2.0) / den;
                vec![u, v]
            }
            ProblemKind::Burgers3Viscid { re, literal_decay } => {
                let (x, y, z, t) = (point[0], point[1], point[2], point[3]);
                let decay = if literal_decay { 1.0 } else { 3.0 / re };
                let e = (t * -decay).exp();
                let (sx, sy, sz) = (x.sin(), y.sin(), z.sin());
                let den = x + 1.0 + sx * sy * sz * e;
                let c = -2.0 / re;
                let u = (x.cos() * sy * sz * e + 1.0) / den * c;
                let v = sx * y.cos() * sz * e / den * c;
                let w = sx * sy * z.cos() * e / den * c;
                vec![u, v, w]
            }
            ProblemKind::Kdv { .. } => vec![self.kdv_exact(point[0], point[1])],
        })
    }

    fn kdv_exact<S: Scalar>(&self, x: S, t: S) -> S {
        let Some(p) = self.kdv.as_ref() else {
            unreachable!("kdv parameters exist for kdv problems")
        };
        if p.n == 1 {
            let th = (x - t * 4.0).tanh();
            return (th * th).rsub(1.0) * 2.0;
        }
        // u = 2 (f f'' - f'^2) / f^2 with f a sum of exponentials; shift by
        // the largest exponent so nothing overflows.
        let subsets = 1usize << p.n;
        let mut expo = Vec::with_capacity(subsets);
        for mask in 0..subsets {
            let mut e = x.constant_like(p.phase[mask]);
            for i in 0..p.n {
                if mask & (1 << i) != 0 {
                    let k = p.k[i];
                    e = e + x * k - t * (k * k * k);
                }
            }
            expo.push(e);
        }
        let shift = expo.iter().map(|e| e.value()).fold(f64::NEG_INFINITY, f64::max);
        let mut f = x.constant_like(0.0);
        let mut f1 = x.constant_like(0.0);
        let mut f2 = x.constant_like(0.0);
        for (mask, e) in expo.into_iter().enumerate() {
            let w = (e - shift).exp();
            let ks = p.ksum[mask];
            f = f + w;
            f1 = f1 + w * ks;
            f2 = f2 + w * (ks * ks);
        }
        (f * f2 - f1 * f1) / (f * f) * 2.0
    }

    /// Poisson source `f(x) = d π² ∏ sin(π x_i)`.
    pub fn source_term<S: Scalar>(&self, x: &[S]) -> Result<S> {
        let ProblemKind::Poisson { dim } = self.kind else {
            return Err(contract("source term is defined for poisson only"));
        };
        if x.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                found: x.len(),
            });
        }
        let mut u = (x[0] * PI).sin();
        for v in &x[1..] {
            u = u * (*v * PI).sin();
        }
        Ok(u * (dim as f64 * PI * PI))
    }

    /// Face of the spatial box that `point` lies on exactly, if any.
    pub fn face_of(&self, point: &[f64]) -> Option<(usize, bool)> {
        for (a, (lo, hi)) in self.spatial.iter().enumerate() {
            if point.get(a) == Some(lo) {
                return Some((a, false));
            }
            if point.get(a) == Some(hi) {
                return Some((a, true));
            }
        }
        None
    }

    /// Boundary data `g` at a point on a spatial face.
    pub fn boundary_value(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        let (axis, high) = self.face_of(point).ok_or(Error::NotOnBoundary)?;
        self.face_data(axis, high, point)
    }

    /// `g` on face (`axis`, `high`) as a function of the remaining
    /// coordinates of `point`; the face coordinate of `point` is ignored.
    pub fn face_data<S: Scalar>(&self, axis: usize, high: bool, point: &[S]) -> Result<Vec<S>> {
        self.check_point(point)?;
        if axis >= self.spatial.len() {
            return Err(contract("face axis must be spatial"));
        }
        let (lo, hi) = self.spatial[axis];
        let mut p: Vec<S> = point.to_vec();
        p[axis] = point[axis].constant_like(if high { hi } else { lo });
        match self.kind {
            ProblemKind::Poisson { .. } => Ok(vec![point[0].constant_like(0.0)]),
            ProblemKind::Burgers2Inviscid {
                main_text_boundary: true,
                ..
            } if high => {
                let mut g = self.exact_solution(&p)?;
                let t = p[2];
                let den = (t * t * 2.0).rsub(1.0);
                let other = if axis == 0 { p[1] } else { p[0] };
                g[axis] = (other + t * 2.0).rsub(1.0) / den;
                Ok(g)
            }
            _ => self.exact_solution(&p),
        }
    }

    /// `u₀` at a spatial point.
    pub fn initial_value<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let Some(t0) = self.initial_time() else {
            return Err(Error::NoInitialCondition);
        };
        if x.len() != self.spatial.len() {
            return Err(Error::Shape {
                expected: self.spatial.len(),
                found: x.len(),
            });
        }
        if let ProblemKind::Kdv { solitons, .. } = self.kind {
            let th = x[0].tanh();
            let n = solitons as f64;
            return Ok(vec![(th * th).rsub(1.0) * (n * (n + 1.0))]);
        }
        let mut p = x.to_vec();
        p.push(x[0].constant_like(t0));
        self.exact_solution(&p)
    }

    /// Derivatives the strong-form residual consumes.
    pub fn residual_shape(&self) -> BundleShape {
        let components = self.components();
        let spatial_dim = self.spatial_dim();
        let base = BundleShape {
            components,
            spatial_dim,
            dt: true,
            dx: true,
            dxx: false,
            dxxx: false,
            forcing: false,
        };
        match self.kind {
            ProblemKind::Poisson { .. } => BundleShape {
                dt: false,
                dx: false,
                dxx: true,
                forcing: true,
                ..base
            },
            ProblemKind::Burgers1Inviscid { .. } | ProblemKind::Burgers2Inviscid { .. } => base,
            ProblemKind::Burgers1Viscid { .. } | ProblemKind::Burgers3Viscid { .. } => BundleShape { dxx: true, ..base },
            ProblemKind::Kdv { .. } => BundleShape { dxxx: true, ..base },
        }
    }

    /// Derivatives the Ritz energy density consumes (Poisson only).
    pub fn energy_shape(&self) -> Result<BundleShape> {
        if !self.is_poisson() {
            return Err(contract("energy functional is defined for poisson only"));
        }
        Ok(BundleShape {
            components: 1,
            spatial_dim: self.spatial_dim(),
            dt: false,
            dx: true,
            dxx: false,
            dxxx: false,
            forcing: true,
        })
    }

    /// Bundle of shape `shape` at `point` for any field `f` written over
    /// jets, one seeded evaluation per direction. The forcing slot, if the
    /// shape has one, holds the Poisson source.
    pub fn jet_bundle<F>(&self, shape: &BundleShape, point: &[f64], f: F) -> Result<DerivativeBundle<f64>>
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>>,
    {
        let dirs = shape.directions(self.time_axis());
        let order = dirs.iter().map(|d| d.1).max().unwrap_or(0);
        let eval = |axis: Option<usize>| -> Result<Vec<Jet>> {
            let jets = point
                .iter()
                .enumerate()
                .map(|(a, v)| {
                    if Some(a) == axis {
                        lift_seed(*v, order)
                    } else {
                        lift_constant(*v, order)
                    }
                })
                .collect::<Result<Vec<Jet>>>()?;
            f(&jets)
        };
        let base = eval(None)?;
        let along: Vec<(usize, Vec<Jet>)> = dirs
            .iter()
            .map(|(a, _)| eval(Some(*a)).map(|v| (*a, v)))
            .collect::<Result<_>>()?;
        let pick = |axis: usize, c: usize, k: usize| -> f64 {
            along
                .iter()
                .find(|(a, _)| *a == axis)
                .map_or(0.0, |(_, v)| v[c].derivative(k))
        };
        self.assemble(shape, point, |c| base[c].value(), pick)
    }

    /// Bundle of shape `shape` from a derivative oracle `d(axis, component,
    /// order)` and values `value(component)`.
    pub fn assemble(
        &self,
        shape: &BundleShape,
        point: &[f64],
        value: impl Fn(usize) -> f64,
        d: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<DerivativeBundle<f64>> {
        let n = shape.components;
        let sd = shape.spatial_dim;
        let t = self.time_axis();
        let forcing = if shape.forcing {
            Some(self.source_term(&point[..sd])?)
        } else {
            None
        };
        Ok(DerivativeBundle {
            value: (0..n).map(&value).collect(),
            dt: match (shape.dt, t) {
                (true, Some(t)) => Some((0..n).map(|c| d(t, c, 1)).collect()),
                _ => None,
            },
            dx: shape
                .dx
                .then(|| (0..n).map(|c| (0..sd).map(|a| d(a, c, 1)).collect()).collect()),
            dxx: shape
                .dxx
                .then(|| (0..n).map(|c| (0..sd).map(|a| d(a, c, 2)).collect()).collect()),
            dxxx: shape.dxxx.then(|| (0..n).map(|c| d(0, c, 3)).collect()),
            forcing,
        })
    }

    pub fn residual(&self, bundle: &DerivativeBundle<f64>) -> Result<Vec<f64>> {
        self.residual_with(&mut Plain, bundle)
    }

    /// Left-minus-right side of the PDE, one entry per component.
    pub fn residual_with<A: Arith>(&self, ar: &mut A, b: &DerivativeBundle<A::V>) -> Result<Vec<A::V>> {
        if b.shape() != self.residual_shape() {
            return Err(contract("derivative bundle does not match the problem"));
        }
        match self.kind {
            ProblemKind::Poisson { .. } => {
                let (Some(dxx), Some(f)) = (&b.dxx, &b.forcing) else {
                    return Err(contract("derivative bundle does not match the problem"));
                };
                let mut lap = dxx[0][0].clone();
                for d in &dxx[0][1..] {
                    lap = ar.add(&lap, d);
                }
                let neg = ar.scale(&lap, -1.0);
                Ok(vec![ar.sub(&neg, f)])
            }
            _ => {
                let (Some(dt), Some(dx)) = (&b.dt, &b.dx) else {
                    return Err(contract("derivative bundle does not match the problem"));
                };
                let comps = self.components();
                let mut out = Vec::with_capacity(comps);
                for c in 0..comps {
                    let mut r = dt[c].clone();
                    for a in 0..self.spatial_dim() {
                        let adv = ar.mul(&b.value[a.min(comps - 1)], &dx[c][a]);
                        let adv = if self.is_kdv() { ar.scale(&adv, 6.0) } else { adv };
                        r = ar.add(&r, &adv);
                    }
                    if let Some(nu) = self.viscosity() {
                        let Some(dxx) = &b.dxx else {
                            return Err(contract("derivative bundle does not match the problem"));
                        };
                        let mut lap = dxx[c][0].clone();
                        for d in &dxx[c][1..] {
                            lap = ar.add(&lap, d);
                        }
                        let visc = ar.scale(&lap, nu);
                        r = ar.sub(&r, &visc);
                    }
                    if let Some(d3) = &b.dxxx {
                        r = ar.add(&r, &d3[c]);
                    }
                    out.push(r);
                }
                Ok(out)
            }
        }
    }
}
