//! Cell-centred discretisation of the truncated half-line `[0, L]`.
//!
//! Cell `j` has centre `x_j = (j + 1/2) dx`. The wall sits on the left face
//! of cell 0, so reflective ghost cells give second-order wall conditions.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 8;

/// Default relative tail tolerance used by [`Field::tail_ok`].
pub const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineGrid {
    length: f64,
    cells: usize,
}

impl HalfLineGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Grid(format!("length must be positive, got {length}")));
        }
        if cells < MIN_CELLS {
            return Err(Error::Grid(format!(
                "need at least {MIN_CELLS} cells, got {cells}"
            )));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Centre of cell `j`.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(move |j| self.x(j))
    }

    /// Field sampled from `f` at the cell centres.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: *self,
            values: self.centers().map(f).collect(),
        }
    }

    pub fn constant(&self, c: f64) -> Field {
        Field {
            grid: *self,
            values: vec![c; self.cells],
        }
    }

    pub fn zeros(&self) -> Field {
        self.constant(0.0)
    }

    /// Same domain with the cell count scaled by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            length: self.length,
            cells: self.cells * factor,
        }
    }
}

/// How an end of the domain is closed when differencing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum End {
    /// Second-order one-sided stencil.
    OneSided,
    /// Mirror ghost `f_ghost = f_edge` (homogeneous Neumann).
    Even,
    /// Antisymmetric ghost `f_ghost = -f_edge` (homogeneous Dirichlet on the face).
    Odd,
    /// Explicit ghost value.
    Ghost(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub left: End,
    pub right: End,
}

impl Boundary {
    pub const ONE_SIDED: Boundary = Boundary {
        left: End::OneSided,
        right: End::OneSided,
    };

    pub fn new(left: End, right: End) -> Self {
        Self { left, right }
    }
}

impl Default for Boundary {
    fn default() -> Self {
        Self::ONE_SIDED
    }
}

/// Discrete L1, L2 and sup norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Which norm a quantity is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::Linf];

    pub fn label(&self) -> &'static str {
        match self {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
            NormKind::Linf => "Linf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "L1" | "l1" | "1" => Some(NormKind::L1),
            "L2" | "l2" | "2" => Some(NormKind::L2),
            "Linf" | "linf" | "inf" => Some(NormKind::Linf),
            _ => None,
        }
    }
}

impl Norms {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.l1,
            NormKind::L2 => self.l2,
            NormKind::Linf => self.linf,
        }
    }
}

/// One value per cell of a [`HalfLineGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: HalfLineGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn from_values(grid: HalfLineGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::Mismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.cells()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!(
                "non-finite value {} at x = {}",
                values[j],
                grid.x(j)
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: HalfLineGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cells());
        Self { grid, values }
    }

    pub fn grid(&self) -> &HalfLineGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Quadratic extrapolation of the cell values to the wall `x = 0`.
    pub fn value_at_wall(&self) -> f64 {
        let f = &self.values;
        (15.0 * f[0] - 10.0 * f[1] + 3.0 * f[2]) / 8.0
    }

    /// Quadratic extrapolation to the far face `x = L`.
    pub fn value_at_end(&self) -> f64 {
        let f = &self.values;
        let n = f.len();
        (15.0 * f[n - 1] - 10.0 * f[n - 2] + 3.0 * f[n - 3]) / 8.0
    }

    /// Second-order first derivative.
    pub fn ddx(&self, boundary: Boundary) -> Field {
        let f = &self.values;
        let n = f.len();
        let dx = self.grid.dx();
        let mut out = vec![0.0; n];
        for j in 1..n - 1 {
            out[j] = (f[j + 1] - f[j - 1]) / (2.0 * dx);
        }
        out[0] = match boundary.left {
            End::OneSided => (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx),
            End::Even => (f[1] - f[0]) / (2.0 * dx),
            End::Odd => (f[1] + f[0]) / (2.0 * dx),
            End::Ghost(g) => (f[1] - g) / (2.0 * dx),
        };
        out[n - 1] = match boundary.right {
            End::OneSided => (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx),
            End::Even => (f[n - 1] - f[n - 2]) / (2.0 * dx),
            End::Odd => (-f[n - 1] - f[n - 2]) / (2.0 * dx),
            End::Ghost(g) => (g - f[n - 2]) / (2.0 * dx),
        };
        Field::from_values_unchecked(self.grid, out)
    }

    /// Midpoint-rule integral over `[0, L]`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// `int_x^L f`, with `f` piecewise constant on cells.
    pub fn integrate_tail(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        let n = self.values.len();
        if x <= 0.0 {
            return self.integrate();
        }
        if x >= self.grid.length() {
            return 0.0;
        }
        let j = ((x / dx).floor() as usize).min(n - 1);
        let right_face = (j + 1) as f64 * dx;
        let tail: f64 = self.values[j + 1..].iter().sum::<f64>() * dx;
        tail + self.values[j] * (right_face - x)
    }

    /// Field of tail integrals `int_{x_j}^L f` at every cell centre.
    pub fn tail_integrals(&self) -> Field {
        let dx = self.grid.dx();
        let n = self.values.len();
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        for j in (0..n).rev() {
            out[j] = acc + 0.5 * dx * self.values[j];
            acc += dx * self.values[j];
        }
        Field::from_values_unchecked(self.grid, out)
    }

    /// Field of running integrals `int_0^{x_j} f` at every cell centre.
    pub fn cumulative_integrals(&self) -> Field {
        let dx = self.grid.dx();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        for &v in &self.values {
            out.push(acc + 0.5 * dx * v);
            acc += dx * v;
        }
        Field::from_values_unchecked(self.grid, out)
    }

    /// Whether `|f(L)|` is within `rel_tol` of the sup norm.
    pub fn tail_ok(&self, rel_tol: f64) -> bool {
        let last = self.values[self.values.len() - 1].abs();
        last <= rel_tol * self.linf()
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.dx()
    }

    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norms(&self) -> Norms {
        Norms {
            l1: self.l1(),
            l2: self.l2(),
            linf: self.linf(),
        }
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.l1(),
            NormKind::L2 => self.l2(),
            NormKind::Linf => self.linf(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale(rhs)
    }
}

/// Specific volume and velocity on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub v: Field,
    pub u: Field,
}

impl StateField {
    pub fn new(v: Field, u: Field) -> Result<Self> {
        if v.grid() != u.grid() {
            return Err(Error::Mismatch("v and u live on different grids".into()));
        }
        let grid = *v.grid();
        if let Some(j) = v.values().iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Vacuum {
                x: grid.x(j),
                v: v.values()[j],
            });
        }
        Ok(Self { v, u })
    }

    pub fn grid(&self) -> &HalfLineGrid {
        self.v.grid()
    }
}
