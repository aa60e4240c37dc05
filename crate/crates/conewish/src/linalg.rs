//! Small dense-matrix helpers.
//!
//! These back the oracle side of the test suites (plain LU determinants,
//! symmetric eigenvalues) and the orthogonal-group elements used by the
//! characterization harness. They deliberately know nothing about posets or
//! masks; everything mask-aware lives in [`crate::algebra`].

use crate::scalar::Scalar;
use rand::Rng;

/// Plain dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul(&self, other: &Dense<T>) -> Dense<T> {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Dense<T> {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Principal submatrix on `idx` (rows and columns, in the given order).
    pub fn principal_submatrix(&self, idx: &[usize]) -> Dense<T> {
        let k = idx.len();
        let mut out = Self::zeros(k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    /// Determinant via LU with partial pivoting. Empty matrix has det 1.
    pub fn det(&self) -> T {
        let n = self.n;
        if n == 0 {
            return T::one();
        }
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if a[(piv, col)] == T::zero() {
                return T::zero();
            }
            if piv != col {
                for j in 0..n {
                    let t = a[(col, j)];
                    a[(col, j)] = a[(piv, j)];
                    a[(piv, j)] = t;
                }
                det = -det;
            }
            det *= a[(col, col)];
            for r in col + 1..n {
                let f = a[(r, col)] / a[(col, col)];
                for j in col..n {
                    let sub = f * a[(col, j)];
                    a[(r, j)] -= sub;
                }
            }
        }
        det
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn eigenvalues_symmetric(&self) -> Vec<T> {
        let n = self.n;
        let mut a = self.clone();
        let eps = T::epsilon() * T::of(16.0);
        for _sweep in 0..64 {
            let mut off = T::zero();
            for i in 0..n {
                for j in i + 1..n {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
            let scale: T = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum::<T>() + off;
            if off <= eps * eps * (scale + T::min_positive_value()) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (T::of(2.0) * apq);
                    let t = {
                        let s = if theta >= T::zero() {
                            T::one()
                        } else {
                            -T::one()
                        };
                        s / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }

    /// Pivots of the unit-triangular factorization, as ratios of leading
    /// principal minors (stable LU determinants, no positivity gate): usable
    /// as summaries arbitrarily close to the cone boundary.
    pub fn leading_pivot_ratios(&self) -> Vec<T> {
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        let mut prev = T::one();
        for k in 1..=n {
            let idx: Vec<usize> = (0..k).collect();
            let dk = self.principal_submatrix(&idx).det();
            out.push(dk / prev);
            prev = dk;
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Dense<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Dense<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Haar-ish random orthogonal matrix: QR of a Gaussian matrix by modified
/// Gram-Schmidt, signs fixed so the diagonal of R is positive.
pub fn random_orthogonal<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Dense<T> {
    loop {
        let mut cols: Vec<Vec<T>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| T::sample_normal(rng, T::zero(), T::one()))
                    .collect()
            })
            .collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let dot: T = (0..n).map(|i| cols[j][i] * cols[k][i]).sum();
                for i in 0..n {
                    let sub = dot * cols[k][i];
                    cols[j][i] -= sub;
                }
            }
            let norm: T = (0..n).map(|i| cols[j][i] * cols[j][i]).sum::<T>().sqrt();
            if norm < T::of(1e-8) {
                ok = false;
                break;
            }
            for i in 0..n {
                cols[j][i] /= norm;
            }
        }
        if !ok {
            continue;
        }
        let mut q = Dense::zeros(n);
        for j in 0..n {
            for i in 0..n {
                q[(i, j)] = cols[j][i];
            }
        }
        return q;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_matches_cofactor_expansion() {
        let m: Dense<f64> = Dense::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ]);
        // 2*(12-1) - 1*(4-0) = 18
        assert!((m.det() - 18.0).abs() < 1e-12);
        assert!((Dense::<f64>::zeros(0).det() - 1.0).abs() == 0.0);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let m: Dense<f64> = Dense::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let eig = m.eigenvalues_symmetric();
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pivot_ratios_match_cholesky_diagonal() {
        let m: Dense<f64> = Dense::from_rows(&[
            vec![4.0, 2.0, 0.5],
            vec![2.0, 5.0, 1.0],
            vec![0.5, 1.0, 3.0],
        ]);
        let d = m.leading_pivot_ratios();
        // d1 = 4, d2 = 5 - 1 = 4, d3 = det(m) / (4 * 4)
        assert!((d[0] - 4.0).abs() < 1e-12);
        assert!((d[1] - 4.0).abs() < 1e-12);
        assert!((d[2] - m.det() / 16.0).abs() < 1e-12);
        // Near-singular input stays finite.
        let tiny: Dense<f64> = Dense::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + 1e-15]]);
        let d = tiny.leading_pivot_ratios();
        assert!(d.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let mut rng = crate::rng::stream(3, 0);
        let q: Dense<f64> = random_orthogonal(5, &mut rng);
        let qtq = q.transpose().mul(&q);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-10);
            }
        }
    }
}
