use crate::error::{Error, Result};
use crate::tensor::Vec3;

/// Periodic cell-centered grid on `[0, L)^d`, `d ∈ {1, 3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dims: usize,
    /// Cells per axis; inactive axes hold 1.
    pub n: [usize; 3],
    /// Cell size per axis; inactive axes hold 1.
    pub h: [f64; 3],
}

impl Grid {
    pub fn line(cells: usize, length: f64) -> Result<Self> {
        Self::validate(cells, length)?;
        Ok(Grid { dims: 1, n: [cells, 1, 1], h: [length / cells as f64, 1.0, 1.0] })
    }

    pub fn cube(cells: usize, length: f64) -> Result<Self> {
        Self::validate(cells, length)?;
        let h = length / cells as f64;
        Ok(Grid { dims: 3, n: [cells; 3], h: [h; 3] })
    }

    fn validate(cells: usize, length: f64) -> Result<()> {
        if cells < 4 {
            return Err(Error::InvalidArgument(format!("need at least 4 cells per axis, got {cells}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!("domain length must be positive, got {length}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axes(&self) -> std::ops::Range<usize> {
        0..self.dims
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes().map(|a| self.h[a]).product()
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.n[0] * (c[1] + self.n[1] * c[2])
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        [idx % self.n[0], (idx / self.n[0]) % self.n[1], idx / (self.n[0] * self.n[1])]
    }

    /// Cell center; inactive axes sit at 0.
    pub fn center(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        let mut x = Vec3::ZERO;
        for a in self.axes() {
            x.0[a] = (c[a] as f64 + 0.5) * self.h[a];
        }
        x
    }

    /// Periodic neighbour of `idx` one cell along `axis` in direction `dir` (±1).
    pub fn neighbor(&self, idx: usize, axis: usize, dir: isize) -> usize {
        let mut c = self.coords(idx);
        let n = self.n[axis] as isize;
        c[axis] = (c[axis] as isize + dir).rem_euclid(n) as usize;
        self.index(c)
    }

    /// Point reflection `x ↦ −x` of cell indices.
    pub fn mirror(&self, idx: usize) -> usize {
        let mut c = self.coords(idx);
        for a in self.axes() {
            c[a] = self.n[a] - 1 - c[a];
        }
        self.index(c)
    }

    /// Index of the cell containing `x` (periodically wrapped).
    pub fn locate(&self, x: &Vec3) -> usize {
        let mut c = [0usize; 3];
        for a in self.axes() {
            let k = (x.0[a] / self.h[a]).floor() as isize;
            c[a] = k.rem_euclid(self.n[a] as isize) as usize;
        }
        self.index(c)
    }
}
