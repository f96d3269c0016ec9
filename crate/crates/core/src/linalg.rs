//! Dense symmetric positive-definite solves for small systems.

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }

    /// Copies the upper triangle onto the lower one.
    pub fn mirror_upper(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                self.data[i * self.n + j] = self.data[j * self.n + i];
            }
        }
    }
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
pub(crate) struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Fails when a pivot is not positive relative to the largest diagonal
    /// entry, i.e. the matrix is not numerically positive definite.
    pub fn factor(a: &SymMatrix) -> Option<Self> {
        let n = a.n;
        let scale = (0..n).map(|i| a.at(i, i).abs()).fold(0.0, f64::max);
        let floor = scale * 1e-13;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.at(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d.is_nan() || d <= floor {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = a.at(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Some(Cholesky { n, lower: l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }

    /// Diagonal of `A⁻¹`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            out.push(self.solve(&e)[i]);
            e[i] = 0.0;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix {
            n: rows.len(),
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    #[test]
    fn solves_spd_system() {
        let a = matrix(&[&[4.0, 2.0, 0.6], &[2.0, 5.0, 1.0], &[0.6, 1.0, 3.0]]);
        let chol = Cholesky::factor(&a).unwrap();
        let x = chol.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a.at(i, j) * x[j]).sum();
            assert!((ax - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        // 2x2 inverse by hand: [[4,2],[2,5]]⁻¹ diagonal = [5/16, 4/16].
        let b = matrix(&[&[4.0, 2.0], &[2.0, 5.0]]);
        let d = Cholesky::factor(&b).unwrap().inverse_diagonal();
        assert!((d[0] - 5.0 / 16.0).abs() < 1e-15);
        assert!((d[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_singular() {
        assert!(Cholesky::factor(&matrix(&[&[1.0, 1.0], &[1.0, 1.0]])).is_none());
        assert!(Cholesky::factor(&matrix(&[&[1.0, 0.0], &[0.0, -1.0]])).is_none());
    }
}
