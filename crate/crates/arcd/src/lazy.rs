//! Scaled two-vector representation of the (y, z) pair.
//!
//! The accelerated steppers only ever move y and z inside the plane
//! spanned by the previous pair, plus a one-sparse correction. Tracking
//! coefficient pairs over two base vectors therefore turns the dense
//! O(n) blend into O(1) coefficient arithmetic; a step costs only the
//! sparse dot products of the partial-derivative evaluation. Used when
//! mu = 0 (the momentum update is one-sparse there).
//!
//! The coefficient determinant decays geometrically, so the pair rebases
//! (materializes y and z and restarts from the identity coefficients)
//! whenever the determinant leaves a safe band. Rebases cost O(n) and are
//! rare; the amortized step stays cheap.

use crate::data::Row;

const DET_FLOOR: f64 = 1e-60;
const COEFF_CEIL: f64 = 1e60;

#[derive(Debug, Clone)]
pub struct ScaledPair {
    u: Vec<f64>,
    v: Vec<f64>,
    /// y = my[0] u + my[1] v
    my: [f64; 2],
    /// z = mz[0] u + mz[1] v
    mz: [f64; 2],
    rebases: u64,
}

impl ScaledPair {
    pub fn new(y: Vec<f64>, z: Vec<f64>) -> Self {
        assert_eq!(y.len(), z.len());
        ScaledPair {
            u: y,
            v: z,
            my: [1.0, 0.0],
            mz: [0.0, 1.0],
            rebases: 0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.u.len()
    }

    pub fn rebases(&self) -> u64 {
        self.rebases
    }

    /// Coefficients of x = (1-alpha) y + alpha z.
    pub fn x_coeffs(&self, alpha: f64) -> [f64; 2] {
        [
            (1.0 - alpha) * self.my[0] + alpha * self.mz[0],
            (1.0 - alpha) * self.my[1] + alpha * self.mz[1],
        ]
    }

    pub fn y_coeffs(&self) -> [f64; 2] {
        self.my
    }

    /// Sparse dot of a data row with the vector `c[0] u + c[1] v`.
    pub fn dot_row(&self, row: &Row, c: [f64; 2]) -> f64 {
        c[0] * row.dot(&self.u) + c[1] * row.dot(&self.v)
    }

    /// Single entry of the vector `c[0] u + c[1] v`.
    pub fn entry(&self, c: [f64; 2], k: usize) -> f64 {
        c[0] * self.u[k] + c[1] * self.v[k]
    }

    /// Commits one accelerated step with mu = 0:
    /// `y_new = x - s_y e_k`, `z_new = z - s_z e_k`, where x has
    /// coefficients `xc`.
    ///
    /// Returns false when the coefficient system is too ill-conditioned
    /// to absorb the point corrections; the caller must rebase and apply
    /// the step densely.
    pub fn commit_step(&mut self, xc: [f64; 2], k: usize, s_y: f64, s_z: f64) -> bool {
        let prod_a = xc[0] * self.mz[1];
        let prod_b = xc[1] * self.mz[0];
        let det = prod_a - prod_b;
        let coeff_scale = xc[0]
            .abs()
            .max(xc[1].abs())
            .max(self.mz[0].abs())
            .max(self.mz[1].abs());
        // reject both hard underflow and relative cancellation in det
        if det.abs() < DET_FLOOR
            || det.abs() < 1e-12 * prod_a.abs().max(prod_b.abs())
            || coeff_scale > COEFF_CEIL
        {
            return false;
        }
        // solve  xc . d = -s_y,  mz . d = -s_z  for the base corrections
        let du = (-s_y * self.mz[1] + s_z * xc[1]) / det;
        let dv = (-s_z * xc[0] + s_y * self.mz[0]) / det;
        if !du.is_finite() || !dv.is_finite() {
            return false;
        }
        self.u[k] += du;
        self.v[k] += dv;
        self.my = xc;
        true
    }

    /// Rewrites the pair as explicit vectors with identity coefficients.
    pub fn rebase(&mut self) {
        let y = self.dense(self.my);
        let z = self.dense(self.mz);
        self.u = y;
        self.v = z;
        self.my = [1.0, 0.0];
        self.mz = [0.0, 1.0];
        self.rebases += 1;
    }

    /// Overwrites y and z after a dense out-of-plane step.
    pub fn reset(&mut self, y: Vec<f64>, z: Vec<f64>) {
        assert_eq!(y.len(), self.v.len());
        assert_eq!(y.len(), z.len());
        self.u = y;
        self.v = z;
        self.my = [1.0, 0.0];
        self.mz = [0.0, 1.0];
        self.rebases += 1;
    }

    fn dense(&self, c: [f64; 2]) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(ui, vi)| c[0] * ui + c[1] * vi)
            .collect()
    }

    pub fn y_dense(&self) -> Vec<f64> {
        self.dense(self.my)
    }

    pub fn z_dense(&self) -> Vec<f64> {
        self.dense(self.mz)
    }
}
