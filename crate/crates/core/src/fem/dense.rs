//! Dense symmetric LDLᵀ factorization for the reduced stiffness system.

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest |K_rc − K_cr| relative to the largest diagonal magnitude.
    pub fn asymmetry(&self) -> f64 {
        let scale = (0..self.n).map(|k| self.get(k, k).abs()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for c in r + 1..self.n {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|c| (0..self.n).map(|r| self.get(r, c).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn submatrix(&self, keep: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(keep.len());
        for (r, &kr) in keep.iter().enumerate() {
            for (c, &kc) in keep.iter().enumerate() {
                out.set(r, c, self.get(kr, kc));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPivot {
    pub index: usize,
    pub pivot: f64,
}

#[derive(Debug, Clone)]
pub struct Ldlt {
    factor: DenseMatrix,
    diag: Vec<f64>,
    norm1: f64,
}

/// Pivots at or below this fraction of the largest diagonal entry are zero.
pub const PIVOT_RATIO: f64 = 1e-12;

impl Ldlt {
    pub fn factor(mut a: DenseMatrix) -> Result<Self, ZeroPivot> {
        let n = a.n;
        let norm1 = a.norm1();
        let max_diag = (0..n).map(|k| a.get(k, k).abs()).fold(0.0, f64::max);
        let floor = PIVOT_RATIO * max_diag;
        let mut diag = vec![0.0; n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                let l = a.get(j, k);
                d -= l * l * diag[k];
            }
            if !(d > floor) {
                return Err(ZeroPivot { index: j, pivot: d });
            }
            diag[j] = d;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= a.get(i, k) * a.get(j, k) * diag[k];
                }
                a.set(i, j, s / d);
            }
        }
        Ok(Ldlt { factor: a, diag, norm1 })
    }

    /// 1-norm condition number ‖A‖₁·‖A⁻¹‖₁, with A⁻¹ formed column by column.
    pub fn condition_number(&self) -> f64 {
        let n = self.diag.len();
        let mut inv_norm: f64 = 0.0;
        let mut e = vec![0.0; n];
        for c in 0..n {
            e[c] = 1.0;
            let col = self.solve(&e);
            e[c] = 0.0;
            inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum());
        }
        if n == 0 {
            1.0
        } else {
            self.norm1 * inv_norm
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let l = &self.factor;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= l.get(i, k) * x[k];
            }
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= l.get(k, i) * x[k];
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows.len());
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m.set(r, c, *v);
            }
        }
        m
    }

    #[test]
    fn solves_spd_system() {
        let a = from_rows(&[&[4.0, 1.0, 2.0], &[1.0, 3.0, 0.0], &[2.0, 0.0, 5.0]]);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x_true);
        let x = Ldlt::factor(a).unwrap().solve(&b);
        for (got, want) in x.iter().zip(x_true) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_singular_and_indefinite() {
        let singular = from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(Ldlt::factor(singular).unwrap_err().index, 1);
        let indefinite = from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(Ldlt::factor(indefinite).is_err());
    }

    #[test]
    fn condition_numbers() {
        let a = from_rows(&[&[1e6, 0.0], &[0.0, 1.0]]);
        assert_eq!(Ldlt::factor(a).unwrap().condition_number(), 1e6);
        // inverse is [[2, -1], [-1, 1]]: norms 3 and 3
        let b = from_rows(&[&[1.0, 1.0], &[1.0, 2.0]]);
        assert!((Ldlt::factor(b).unwrap().condition_number() - 9.0).abs() < 1e-12);
    }
}
