//! Seeded collocation sets and evaluation meshes.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config, Result};
use crate::pde::PdeProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SampleRole {
    Bulk,
    Boundary,
    Initial,
    Test,
}

impl SampleRole {
    pub fn name(self) -> &'static str {
        match self {
            SampleRole::Bulk => "bulk",
            SampleRole::Boundary => "boundary",
            SampleRole::Initial => "initial",
            SampleRole::Test => "test",
        }
    }

    fn tag(self) -> u64 {
        match self {
            SampleRole::Bulk => 0xB01C,
            SampleRole::Boundary => 0xB0DA,
            SampleRole::Initial => 0x1417,
            SampleRole::Test => 0x7E57,
        }
    }
}

/// Points stored flat, `dim` coordinates each (space then time).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub role: SampleRole,
    pub dim: usize,
    pub seed: u64,
    pub points: Vec<f64>,
    /// Face `(axis, high side)` of each boundary point; empty otherwise.
    pub faces: Vec<(usize, bool)>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.points.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim.max(1))
    }
}

/// How boundary points are spread over the faces of the spatial box.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FaceCounts {
    /// The same count on every face.
    PerFace(usize),
    /// Count per face for each axis (both faces of an axis get it).
    PerAxis(Vec<usize>),
    /// A total split as evenly as possible, earlier faces first.
    Total(usize),
}

impl FaceCounts {
    /// Count for each face, ordered `(axis 0 low, axis 0 high, axis 1 low, ...)`.
    pub fn resolve(&self, spatial_dim: usize) -> Result<Vec<usize>> {
        let faces = 2 * spatial_dim;
        match self {
            FaceCounts::PerFace(n) => Ok(alloc::vec![*n; faces]),
            FaceCounts::PerAxis(v) => {
                if v.len() != spatial_dim {
                    return Err(config(alloc::format!(
                        "per-axis boundary counts need {spatial_dim} entries, got {}",
                        v.len()
                    )));
                }
                Ok(v.iter().flat_map(|n| [*n, *n]).collect())
            }
            FaceCounts::Total(n) => Ok((0..faces).map(|f| n / faces + usize::from(f < n % faces)).collect()),
        }
    }

    pub fn total(&self, spatial_dim: usize) -> usize {
        self.resolve(spatial_dim).map_or(0, |v| v.iter().sum())
    }
}

/// SplitMix64 finaliser; derives independent sub-seeds per role and repeat.
pub fn derive_seed(base: u64, tag: u64, repeat: u64) -> u64 {
    let mut z = base
        .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(repeat.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn role_seed(base: u64, role: SampleRole, repeat: u64) -> u64 {
    derive_seed(base, role.tag(), repeat)
}

fn open_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let v = lo + (hi - lo) * rng.random::<f64>();
        if v > lo && v < hi {
            return v;
        }
    }
}

/// `n` uniform points in the open space-time box.
pub fn sample_bulk(problem: &PdeProblem, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(config("bulk sample count must be at least 1"));
    }
    let dim = problem.input_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n * dim);
    let mut p = alloc::vec![0.0; dim];
    while points.len() < n * dim {
        for (a, v) in p.iter_mut().enumerate() {
            let (lo, hi) = problem.bounds(a);
            *v = open_uniform(&mut rng, lo, hi);
        }
        if let Some(t) = problem.time_axis() {
            if problem.is_singular_time(p[t]) {
                continue;
            }
        }
        points.extend_from_slice(&p);
    }
    Ok(SampleSet {
        role: SampleRole::Bulk,
        dim,
        seed,
        points,
        faces: Vec::new(),
    })
}

/// Uniform points on the spatial faces, face coordinate pinned exactly.
pub fn sample_boundary(problem: &PdeProblem, counts: &FaceCounts, seed: u64) -> Result<SampleSet> {
    let sd = problem.spatial_dim();
    let per_face = counts.resolve(sd)?;
    let dim = problem.input_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = per_face.iter().sum();
    let mut points = Vec::with_capacity(total * dim);
    let mut faces = Vec::with_capacity(total);
    let mut p = alloc::vec![0.0; dim];
    for (f, count) in per_face.iter().enumerate() {
        let (axis, high) = (f / 2, f % 2 == 1);
        let mut made = 0;
        while made < *count {
            for (a, v) in p.iter_mut().enumerate() {
                let (lo, hi) = problem.bounds(a);
                *v = if a == axis {
                    if high {
                        hi
                    } else {
                        lo
                    }
                } else {
                    open_uniform(&mut rng, lo, hi)
                };
            }
            if let Some(t) = problem.time_axis() {
                if problem.is_singular_time(p[t]) {
                    continue;
                }
            }
            points.extend_from_slice(&p);
            faces.push((axis, high));
            made += 1;
        }
    }
    Ok(SampleSet {
        role: SampleRole::Boundary,
        dim,
        seed,
        points,
        faces,
    })
}

/// `n` points on the initial slice (interior in space, `t = 0` exactly).
pub fn sample_initial(problem: &PdeProblem, n: usize, seed: u64) -> Result<SampleSet> {
    let Some(t0) = problem.initial_time() else {
        return Err(crate::error::Error::NoInitialCondition);
    };
    let dim = problem.input_dim();
    let sd = problem.spatial_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n * dim);
    for _ in 0..n {
        for a in 0..sd {
            let (lo, hi) = problem.bounds(a);
            points.push(open_uniform(&mut rng, lo, hi));
        }
        points.push(t0);
    }
    Ok(SampleSet {
        role: SampleRole::Initial,
        dim,
        seed,
        points,
        faces: Vec::new(),
    })
}

/// Tensor grid including endpoints; the first axis varies slowest. Rows at
/// a blow-up time are dropped.
pub fn test_mesh(problem: &PdeProblem, resolution: &[usize]) -> Result<SampleSet> {
    let dim = problem.input_dim();
    if resolution.len() != dim {
        return Err(config(alloc::format!(
            "mesh resolution needs {dim} entries, got {}",
            resolution.len()
        )));
    }
    if resolution.iter().any(|r| *r < 2) {
        return Err(config("mesh resolution must be at least 2 per axis"));
    }
    let total: usize = resolution.iter().product();
    let axes: Vec<Vec<f64>> = resolution
        .iter()
        .enumerate()
        .map(|(a, r)| {
            let (lo, hi) = problem.bounds(a);
            (0..*r)
                .map(|i| if i + 1 == *r { hi } else { lo + (hi - lo) * i as f64 / (*r - 1) as f64 })
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(total * dim);
    let mut idx = alloc::vec![0usize; dim];
    for _ in 0..total {
        let start = points.len();
        for a in 0..dim {
            points.push(axes[a][idx[a]]);
        }
        if let Some(t) = problem.time_axis() {
            if problem.is_singular_time(points[start + t]) {
                points.truncate(start);
            }
        }
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < resolution[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(SampleSet {
        role: SampleRole::Test,
        dim,
        seed: 0,
        points,
        faces: Vec::new(),
    })
}

/// Uniform random evaluation set for boxes too high-dimensional to grid.
pub fn random_test_set(problem: &PdeProblem, n: usize, seed: u64) -> Result<SampleSet> {
    let mut s = sample_bulk(problem, n, seed)?;
    s.role = SampleRole::Test;
    Ok(s)
}
