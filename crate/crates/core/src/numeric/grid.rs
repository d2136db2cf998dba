//! Discretization lattice and dense value storage.
//!
//! The spatial variable lives on a logarithmic lattice: with `z = ln x` the
//! spatial operator `x²∂xx` becomes the constant-coefficient `∂zz − ∂z`, so
//! uniform steps in `z` give uniform stencils and the positivity of `x` is
//! structural rather than enforced.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::NumericError;

/// A uniform lattice in `(t, z = ln x, y)`.
#[derive(Clone, PartialEq, Debug)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub t_max: f64,
    /// Number of `z` nodes (≥ 4).
    pub nz: usize,
    /// Number of `y` nodes (≥ 4).
    pub ny: usize,
    /// Number of time steps (levels are `0..=nt`).
    pub nt: usize,
}

impl Grid {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        t_max: f64,
        nz: usize,
        ny: usize,
        nt: usize,
    ) -> Result<Grid, NumericError> {
        if !(x_min > 0.0 && x_max > x_min) {
            return Err(NumericError::BadGrid("need 0 < x_min < x_max"));
        }
        if !(y_max > y_min) {
            return Err(NumericError::BadGrid("need y_min < y_max"));
        }
        if !(t_max > 0.0) {
            return Err(NumericError::BadGrid("need t_max > 0"));
        }
        if nz < 4 || ny < 4 || nt < 1 {
            return Err(NumericError::BadGrid("need nz ≥ 4, ny ≥ 4, nt ≥ 1"));
        }
        Ok(Grid {
            x_min,
            x_max,
            y_min,
            y_max,
            t_max,
            nz,
            ny,
            nt,
        })
    }

    /// The default spatial box `x ∈ [1/2, 2]`, `y ∈ [0, 1]`.
    pub fn default_box(t_max: f64, nz: usize, ny: usize, nt: usize) -> Result<Grid, NumericError> {
        Grid::new(0.5, 2.0, 0.0, 1.0, t_max, nz, ny, nt)
    }

    pub fn z_min(&self) -> f64 {
        libm::log(self.x_min)
    }

    pub fn z_max(&self) -> f64 {
        libm::log(self.x_max)
    }

    pub fn dz(&self) -> f64 {
        (self.z_max() - self.z_min()) / (self.nz - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.nt as f64
    }

    pub fn z_at(&self, i: usize) -> f64 {
        self.z_min() + i as f64 * self.dz()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        libm::exp(self.z_at(i))
    }

    pub fn y_at(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    pub fn t_at(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }
}

/// Dense values on all time levels of a [`Grid`]; index order `(k, i, j)`
/// for (time level, z node, y node).
#[derive(Clone, PartialEq, Debug)]
pub struct Field3 {
    pub nz: usize,
    pub ny: usize,
    /// Time levels stored (`nt + 1` for a full solve).
    pub levels: usize,
    data: Vec<f64>,
}

impl Field3 {
    pub fn zeros(levels: usize, nz: usize, ny: usize) -> Field3 {
        Field3 {
            nz,
            ny,
            levels,
            data: alloc::vec![0.0; levels * nz * ny],
        }
    }

    #[inline]
    pub fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.nz + i) * self.ny + j
    }

    #[inline]
    pub fn at(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(k, i, j)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let ix = self.idx(k, i, j);
        self.data[ix] = v;
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.data[k * self.nz * self.ny..(k + 1) * self.nz * self.ny]
    }
}

/// One time level rendered as CSV (`x,y,value` with a header), rows in
/// `x`-major order — diffable and deterministic.
pub fn csv_slice(grid: &Grid, field: &Field3, level: usize) -> String {
    let mut out = String::from("x,y,value\n");
    for i in 0..grid.nz {
        for j in 0..grid.ny {
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{:.12e}",
                grid.x_at(i),
                grid.y_at(j),
                field.at(level, i, j)
            );
        }
    }
    out
}
