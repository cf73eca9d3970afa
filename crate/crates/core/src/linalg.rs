//! Closed-form solves for the 2x2 and 3x3 local normal equations.
//!
//! Only the intercept is needed, so each solve is a single Cramer ratio.
//! Normal equations square the condition number of the local design, so
//! poorly conditioned but nonsingular systems are re-solved from the
//! weighted design rows with Givens rotations.

/// Relative determinant tolerance: a system is singular when
/// `det <= SINGULAR_TOL * trace^dim`.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Systems with `det <= REFINE_TOL * trace^dim` are re-solved by QR.
pub const REFINE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    Singular,
    Poor,
    Good,
}

fn classify(det: f64, trace: f64, dim: i32) -> Conditioning {
    let scale = trace.powi(dim);
    if !(trace > 0.0) || !(det > SINGULAR_TOL * scale) {
        Conditioning::Singular
    } else if det <= REFINE_TOL * scale {
        Conditioning::Poor
    } else {
        Conditioning::Good
    }
}

pub fn conditioning2(s00: f64, s01: f64, s11: f64) -> Conditioning {
    classify(s00 * s11 - s01 * s01, s00 + s11, 2)
}

/// Intercept of the symmetric system `[[s00, s01], [s01, s11]] b = r`.
#[inline]
pub fn intercept2(s00: f64, s01: f64, s11: f64, r0: f64, r1: f64) -> Option<f64> {
    let det = s00 * s11 - s01 * s01;
    let trace = s00 + s11;
    if !(trace > 0.0) || !(det > SINGULAR_TOL * trace * trace) {
        return None;
    }
    Some((s11 * r0 - s01 * r1) / det)
}

/// Symmetric 3x3 moment matrix stored by its six unique entries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Sym3 {
    pub m00: f64,
    pub m01: f64,
    pub m02: f64,
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl Sym3 {
    fn cofactors(&self) -> (f64, f64, f64, f64) {
        let Sym3 {
            m00,
            m01,
            m02,
            m11,
            m12,
            m22,
        } = *self;
        let c00 = m11 * m22 - m12 * m12;
        let c01 = m02 * m12 - m01 * m22;
        let c02 = m01 * m12 - m02 * m11;
        (c00, c01, c02, m00 * c00 + m01 * c01 + m02 * c02)
    }

    pub fn conditioning(&self) -> Conditioning {
        classify(self.cofactors().3, self.m00 + self.m11 + self.m22, 3)
    }

    /// Intercept of `M b = z`.
    #[inline]
    pub fn intercept(&self, z: [f64; 3]) -> Option<f64> {
        let (c00, c01, c02, det) = self.cofactors();
        let trace = self.m00 + self.m11 + self.m22;
        if !(trace > 0.0) || !(det > SINGULAR_TOL * trace * trace * trace) {
            return None;
        }
        // First row of the adjugate is (c00, c01, c02) by symmetry.
        Some((c00 * z[0] + c01 * z[1] + c02 * z[2]) / det)
    }
}

/// Weighted least squares accumulated row by row into a triangular factor
/// with Givens rotations.
#[derive(Debug, Clone, Copy)]
pub struct GivensLs<const D: usize> {
    r: [[f64; D]; D],
    qty: [f64; D],
}

impl<const D: usize> Default for GivensLs<D> {
    fn default() -> Self {
        Self {
            r: [[0.0; D]; D],
            qty: [0.0; D],
        }
    }
}

impl<const D: usize> GivensLs<D> {
    /// Adds the row `sqrt(weight) * (row, y)`. Nonpositive weights are ignored.
    pub fn push(&mut self, weight: f64, row: [f64; D], y: f64) {
        if !(weight > 0.0) {
            return;
        }
        let s = weight.sqrt();
        let mut a = row.map(|v| v * s);
        let mut b = y * s;
        for k in 0..D {
            if a[k] == 0.0 {
                continue;
            }
            let rad = self.r[k][k].hypot(a[k]);
            let (c, sn) = (self.r[k][k] / rad, a[k] / rad);
            for l in k..D {
                let (x, z) = (self.r[k][l], a[l]);
                self.r[k][l] = c * x + sn * z;
                a[l] = c * z - sn * x;
            }
            let x = self.qty[k];
            self.qty[k] = c * x + sn * b;
            b = c * b - sn * x;
        }
    }

    /// First coefficient of the least-squares solution.
    pub fn intercept(&self) -> Option<f64> {
        let mut beta = [0.0; D];
        for k in (0..D).rev() {
            if self.r[k][k] == 0.0 {
                return None;
            }
            let tail: f64 = (k + 1..D).map(|l| self.r[k][l] * beta[l]).sum();
            beta[k] = (self.qty[k] - tail) / self.r[k][k];
        }
        Some(beta[0])
    }
}
