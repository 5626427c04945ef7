//! Uniform grid buckets for fixed-radius neighbor queries, d ≤ 4.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

type Key = [i64; MAX_DIM];

pub struct Grid<'a> {
    dim: usize,
    cell: f64,
    coords: &'a [f64],
    buckets: HashMap<Key, Vec<u32>>,
}

impl<'a> Grid<'a> {
    /// Bucket the first `coords.len() / dim` points with cell side `cell`.
    pub fn new(coords: &'a [f64], dim: usize, cell: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(format!("grid supports 1 <= d <= {MAX_DIM}, got {dim}")));
        }
        let cell = if cell > 0.0 && cell.is_finite() { cell } else { 1.0 };
        let mut buckets: HashMap<Key, Vec<u32>> = HashMap::new();
        for (i, p) in coords.chunks(dim).enumerate() {
            buckets.entry(key(p, cell)).or_default().push(i as u32);
        }
        Ok(Grid { dim, cell, coords, buckets })
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Call `f(j)` for every point j with ‖x_j − p‖ ≤ r (closed).
    pub fn for_each_within<F: FnMut(usize)>(&self, p: &[f64], r: f64, mut f: F) {
        let r2 = r * r;
        self.for_each_candidate(p, r, |j| {
            if dist2(self.point(j), p) <= r2 {
                f(j);
            }
        });
    }

    /// Call `f(j)` for every point in cells meeting the box of half-side r.
    pub fn for_each_candidate<F: FnMut(usize)>(&self, p: &[f64], r: f64, mut f: F) {
        let span = (r / self.cell).ceil() as i64;
        let c = key(p, self.cell);
        let mut off = [0i64; MAX_DIM];
        for i in 0..self.dim {
            off[i] = -span;
        }
        loop {
            let mut k = c;
            for i in 0..self.dim {
                k[i] += off[i];
            }
            if let Some(v) = self.buckets.get(&k) {
                for &j in v {
                    f(j as usize);
                }
            }
            let mut i = 0;
            loop {
                if i == self.dim {
                    return;
                }
                if off[i] < span {
                    off[i] += 1;
                    break;
                }
                off[i] = -span;
                i += 1;
            }
        }
    }

    /// True if some point other than those in `skip` lies at distance < r
    /// (strict) from p.
    pub fn any_strictly_within(&self, p: &[f64], r: f64, skip: &[usize]) -> bool {
        let r2 = r * r;
        let mut hit = false;
        self.for_each_candidate(p, r, |j| {
            if !hit && !skip.contains(&j) && dist2(self.point(j), p) < r2 {
                hit = true;
            }
        });
        hit
    }
}

fn key(p: &[f64], cell: f64) -> Key {
    let mut k = [0i64; MAX_DIM];
    for (i, &c) in p.iter().enumerate() {
        k[i] = (c / cell).floor() as i64;
    }
    k
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}
