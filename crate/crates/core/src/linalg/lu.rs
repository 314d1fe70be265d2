use super::DenseMatrix;
use crate::error::{Error, Result};

/// Relative pivot size below which a matrix counts as singular.
const SINGULAR_RTOL: f64 = 1e-14;

/// `PA = LU` with unit lower-triangular `L`, packed in one array.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: DenseMatrix,
    perm: Vec<usize>,
}

pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    a.check_finite()?;
    let n = a.n();
    let norm = a.norm_inf();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, big) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if big < SINGULAR_RTOL * norm || big == 0.0 {
            return Err(Error::Singular { pivot: big, norm });
        }
        if piv != k {
            perm.swap(piv, k);
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
        }
        let pivot = lu[(k, k)];
        let (upper, lower) = lu.split_after_row(k);
        for i in (k + 1)..n {
            let row = &mut lower[(i - k - 1) * n..(i - k) * n];
            let l = row[k] / pivot;
            row[k] = l;
            if l != 0.0 {
                for (r, u) in row[k + 1..].iter_mut().zip(&upper[k + 1..]) {
                    *r -= l * u;
                }
            }
        }
    }
    Ok(LuFactors { n, lu, perm })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut inv = DenseMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("length checked");
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}
