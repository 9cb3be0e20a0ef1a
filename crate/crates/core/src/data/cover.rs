//! Covering radius `h(X, D) = sup_{x∈D} min_i ‖x − x_i‖`.
//!
//! The supremum over a continuum is not computable exactly, so every mode
//! returns the largest nearest-sample distance actually observed at some
//! domain point: a lower estimate of `h`. The branch-and-bound mode also
//! reports an upper bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{sample_grid, Domain};
use crate::error::{Error, Result};
use crate::linalg::Tensor;
use crate::rng::{seeded, uniform};
use crate::Scalar;

/// Relative gap at which branch-and-bound stops.
const REFINE_REL_TOL: f64 = 1e-4;
/// Cap on cell evaluations in branch-and-bound.
const REFINE_MAX_EVALS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMode {
    /// Probe a grid of `resolution` points per axis, endpoints included.
    ExactGrid,
    /// Probe `resolution` i.i.d. uniform points.
    MonteCarlo,
    /// Start from `resolution` cells per axis and split the cells whose
    /// distance bound could still beat the best probe.
    BranchAndBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverEstimate<T> {
    /// Largest observed nearest-sample distance; never exceeds `h`.
    pub value: T,
    /// Upper bound on `h` when the mode provides one.
    pub upper: Option<T>,
    pub mode: CoverMode,
    pub resolution: usize,
    pub probes: usize,
    /// Always true: `value` is a lower estimate of the covering radius.
    pub lower_estimate: bool,
}

/// Estimate the covering radius of `points` in `domain`.
pub fn covering_radius<T: Scalar>(
    points: &Tensor<T>,
    domain: &Domain<T>,
    mode: CoverMode,
    resolution: usize,
    seed: u64,
) -> Result<CoverEstimate<T>> {
    domain.check_points(points)?;
    if points.rows() == 0 {
        return Err(Error::Argument("covering radius needs at least one point".into()));
    }
    if resolution == 0 {
        return Err(Error::Argument("resolution must be at least 1".into()));
    }
    let index = PointIndex::new(points, domain);
    let n = domain.dim();
    let (value, upper, probes) = match mode {
        CoverMode::ExactGrid => {
            let probes = if resolution == 1 {
                let center: Vec<T> = (0..n)
                    .map(|i| (domain.lower()[i] + domain.upper()[i]) * T::of(0.5))
                    .collect();
                Tensor::row_vector(center)
            } else {
                sample_grid(domain, resolution)?
            };
            let best = (0..probes.rows())
                .map(|i| index.nearest_distance(probes.row(i)))
                .fold(T::zero(), T::max);
            (best, None, probes.rows())
        }
        CoverMode::MonteCarlo => {
            let mut rng = seeded(seed);
            let mut x = vec![T::zero(); n];
            let mut best = T::zero();
            for _ in 0..resolution {
                for (i, v) in x.iter_mut().enumerate() {
                    *v = uniform(&mut rng, domain.lower()[i], domain.upper()[i]);
                }
                best = best.max(index.nearest_distance(&x));
            }
            (best, None, resolution)
        }
        CoverMode::BranchAndBound => {
            let (best, upper, evals) = branch_and_bound(&index, domain, resolution);
            (best, Some(upper), evals)
        }
    };
    Ok(CoverEstimate {
        value,
        upper,
        mode,
        resolution,
        probes,
        lower_estimate: true,
    })
}

struct Cell<T> {
    ub: T,
    center: Vec<T>,
    half: Vec<T>,
}

impl<T: Scalar> PartialEq for Cell<T> {
    fn eq(&self, other: &Self) -> bool {
        self.ub == other.ub
    }
}
impl<T: Scalar> Eq for Cell<T> {}
impl<T: Scalar> PartialOrd for Cell<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Cell<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.partial_cmp(&other.ub).unwrap_or(Ordering::Equal)
    }
}

/// For a box with center `c` and half-widths `r`, every point is within
/// `‖r‖` of `c`, so `d(c) + ‖r‖` bounds the nearest-sample distance inside.
fn branch_and_bound<T: Scalar>(index: &PointIndex<T>, domain: &Domain<T>, resolution: usize) -> (T, T, usize) {
    let n = domain.dim();
    let tol = T::of(REFINE_REL_TOL);
    let half: Vec<T> = (0..n)
        .map(|i| domain.width(i) / T::of(2.0 * resolution as f64))
        .collect();
    let radius = |h: &[T]| crate::linalg::norm(h);
    let mut heap = BinaryHeap::new();
    let mut best = T::zero();
    let mut evals = 0usize;
    let total = resolution.pow(n as u32);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let center: Vec<T> = (0..n)
            .map(|i| domain.lower()[i] + half[i] * T::of((2 * idx[i] + 1) as f64))
            .collect();
        let d = index.nearest_distance(&center);
        evals += 1;
        best = best.max(d);
        heap.push(Cell {
            ub: d + radius(&half),
            center,
            half: half.clone(),
        });
        for i in (0..n).rev() {
            idx[i] += 1;
            if idx[i] < resolution {
                break;
            }
            idx[i] = 0;
        }
    }
    // corners are the extreme probes of the outermost cells
    for corner in 0..(1usize << n) {
        let x: Vec<T> = (0..n)
            .map(|i| if corner >> i & 1 == 1 { domain.upper()[i] } else { domain.lower()[i] })
            .collect();
        best = best.max(index.nearest_distance(&x));
        evals += 1;
    }
    // largest bound among cells dropped without splitting
    let mut dropped = T::zero();
    while let Some(cell) = heap.pop() {
        if cell.ub <= best * (T::one() + tol) || evals >= REFINE_MAX_EVALS {
            dropped = dropped.max(cell.ub);
            break;
        }
        let child_half: Vec<T> = cell.half.iter().map(|&h| h * T::of(0.5)).collect();
        let r = radius(&child_half);
        for mask in 0..(1usize << n) {
            let center: Vec<T> = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        cell.center[i] + child_half[i]
                    } else {
                        cell.center[i] - child_half[i]
                    }
                })
                .collect();
            let d = index.nearest_distance(&center);
            evals += 1;
            best = best.max(d);
            if d + r > best * (T::one() + tol) {
                heap.push(Cell {
                    ub: d + r,
                    center,
                    half: child_half.clone(),
                });
            } else {
                dropped = dropped.max(d + r);
            }
        }
    }
    let upper = best.max(dropped);
    (best, upper, evals)
}

/// Odometer over `[-ring, ring]ⁿ`; false once every offset was visited.
fn next_offset(offset: &mut [isize], ring: isize) -> bool {
    for o in offset.iter_mut().rev() {
        if *o < ring {
            *o += 1;
            return true;
        }
        *o = -ring;
    }
    false
}

/// Uniform bucket grid for exact nearest-neighbour distance queries.
pub struct PointIndex<T> {
    n: usize,
    origin: Vec<T>,
    cell: Vec<T>,
    counts: Vec<usize>,
    // start offsets into `coords` (in points) per bucket (len = buckets + 1)
    starts: Vec<usize>,
    coords: Vec<T>,
}

impl<T: Scalar> PointIndex<T> {
    /// Index the rows of `points`; `domain` fixes the bucket grid extent.
    pub fn new(points: &Tensor<T>, domain: &Domain<T>) -> Self {
        let n = domain.dim();
        let count = points.rows();
        let mut lo = domain.lower().to_vec();
        let mut hi = domain.upper().to_vec();
        for r in 0..count {
            for i in 0..n {
                lo[i] = lo[i].min(points.get(r, i));
                hi[i] = hi[i].max(points.get(r, i));
            }
        }
        let per_axis = ((count as f64 / 2.0).powf(1.0 / n as f64).ceil() as usize).clamp(1, 1 << 12);
        let counts = vec![per_axis; n];
        let cell: Vec<T> = (0..n)
            .map(|i| ((hi[i] - lo[i]) / T::of(per_axis as f64)).max(T::min_positive_value()))
            .collect();
        let buckets = per_axis.pow(n as u32);
        let mut this = Self {
            n,
            origin: lo,
            cell,
            counts,
            starts: vec![0; buckets + 1],
            coords: Vec::with_capacity(count * n),
        };
        let keys: Vec<usize> = (0..count).map(|r| this.bucket_of(points.row(r))).collect();
        for &k in &keys {
            this.starts[k + 1] += 1;
        }
        for b in 0..buckets {
            this.starts[b + 1] += this.starts[b];
        }
        let mut fill = this.starts.clone();
        let mut coords = vec![T::zero(); count * n];
        for (r, &k) in keys.iter().enumerate() {
            let slot = fill[k];
            fill[k] += 1;
            coords[slot * n..(slot + 1) * n].copy_from_slice(points.row(r));
        }
        this.coords = coords;
        this
    }

    fn axis_cell(&self, i: usize, v: T) -> usize {
        let c = ((v - self.origin[i]) / self.cell[i]).floor().to_f64_lossy();
        if c.is_nan() || c < 0.0 {
            0
        } else {
            (c as usize).min(self.counts[i] - 1)
        }
    }

    fn bucket_of(&self, x: &[T]) -> usize {
        (0..self.n).fold(0, |acc, i| acc * self.counts[i] + self.axis_cell(i, x[i]))
    }

    /// Distance from `x` to its nearest indexed point.
    pub fn nearest_distance(&self, x: &[T]) -> T {
        let n = self.n;
        let home: Vec<isize> = (0..n).map(|i| self.axis_cell(i, x[i]) as isize).collect();
        let min_cell = self.cell.iter().copied().fold(T::infinity(), T::min);
        let max_ring = self.counts.iter().copied().max().unwrap_or(1) as isize;
        let mut best2 = T::infinity();
        let mut offset = vec![0isize; n];
        for ring in 0..=max_ring {
            // visit every bucket at Chebyshev distance exactly `ring`
            offset.iter_mut().for_each(|o| *o = -ring);
            loop {
                let on_shell = offset.iter().any(|o| o.abs() == ring);
                if on_shell {
                    let mut key = 0usize;
                    let mut inside = true;
                    for i in 0..n {
                        let c = home[i] + offset[i];
                        if c < 0 || c >= self.counts[i] as isize {
                            inside = false;
                            break;
                        }
                        key = key * self.counts[i] + c as usize;
                    }
                    if inside {
                        for slot in self.starts[key]..self.starts[key + 1] {
                            let p = &self.coords[slot * n..(slot + 1) * n];
                            let d2: T = p.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum();
                            if d2 < best2 {
                                best2 = d2;
                            }
                        }
                    }
                }
                if !next_offset(&mut offset, ring) {
                    break;
                }
            }
            // anything in ring + 1 or beyond is at least ring·min_cell away
            if best2.is_finite() && best2.sqrt() <= T::of(ring as f64) * min_cell {
                break;
            }
        }
        best2.sqrt()
    }
}
