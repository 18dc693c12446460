//! Structured quad mesh on a rectangle. The row count is forced odd so
//! a mid-height crack runs along the midline of the central element row
//! rather than along mesh edges.

use super::XfemError;

#[derive(Debug, Clone)]
pub struct Mesh {
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Mesh {
    /// Build with a nominal element size; ny is rounded to the nearest
    /// odd count.
    pub fn rectangle(width: f64, height: f64, h_nominal: f64) -> Result<Self, XfemError> {
        if width <= 0.0 || height <= 0.0 || h_nominal <= 0.0 {
            return Err(XfemError::BadGeometry(format!(
                "{width} x {height} at h = {h_nominal}"
            )));
        }
        let nx = ((width / h_nominal).round() as usize).max(1);
        let mut ny = ((height / h_nominal).round() as usize).max(1);
        if ny % 2 == 0 {
            ny += 1;
        }
        Ok(Mesh {
            width,
            height,
            nx,
            ny,
            dx: width / nx as f64,
            dy: height / ny as f64,
        })
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_elems(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_coord(&self, n: usize) -> [f64; 2] {
        let i = n % (self.nx + 1);
        let j = n / (self.nx + 1);
        [i as f64 * self.dx, j as f64 * self.dy]
    }

    /// Counterclockwise corner nodes of element e.
    pub fn elem_nodes(&self, e: usize) -> [usize; 4] {
        let i = e % self.nx;
        let j = e / self.nx;
        [
            self.node_id(i, j),
            self.node_id(i + 1, j),
            self.node_id(i + 1, j + 1),
            self.node_id(i, j + 1),
        ]
    }

    /// Axis-aligned bounds of element e: (x0, y0, x1, y1).
    pub fn elem_bounds(&self, e: usize) -> (f64, f64, f64, f64) {
        let i = e % self.nx;
        let j = e / self.nx;
        (
            i as f64 * self.dx,
            j as f64 * self.dy,
            (i + 1) as f64 * self.dx,
            (j + 1) as f64 * self.dy,
        )
    }

    pub fn elem_containing(&self, p: [f64; 2]) -> Option<usize> {
        if p[0] < 0.0 || p[0] > self.width || p[1] < 0.0 || p[1] > self.height {
            return None;
        }
        let i = ((p[0] / self.dx) as usize).min(self.nx - 1);
        let j = ((p[1] / self.dy) as usize).min(self.ny - 1);
        Some(j * self.nx + i)
    }

    /// Bilinear shape functions and their parent-space derivatives at
    /// (ξ, η) ∈ [−1, 1]².
    pub fn shape(xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
        let n = [
            0.25 * (1.0 - xi) * (1.0 - eta),
            0.25 * (1.0 + xi) * (1.0 - eta),
            0.25 * (1.0 + xi) * (1.0 + eta),
            0.25 * (1.0 - xi) * (1.0 + eta),
        ];
        let dn = [
            [-0.25 * (1.0 - eta), -0.25 * (1.0 - xi)],
            [0.25 * (1.0 - eta), -0.25 * (1.0 + xi)],
            [0.25 * (1.0 + eta), 0.25 * (1.0 + xi)],
            [-0.25 * (1.0 + eta), 0.25 * (1.0 - xi)],
        ];
        (n, dn)
    }

    /// Map parent coordinates of element e to physical coordinates.
    pub fn to_physical(&self, e: usize, xi: f64, eta: f64) -> [f64; 2] {
        let (x0, y0, x1, y1) = self.elem_bounds(e);
        [
            0.5 * ((x0 + x1) + xi * (x1 - x0)),
            0.5 * ((y0 + y1) + eta * (y1 - y0)),
        ]
    }
}
