use super::DenseMatrix;

const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 60;

/// Singular values in descending order, by one-sided (Hestenes) Jacobi.
///
/// Columns are rotated pairwise until mutually orthogonal; the singular
/// values are then the column norms.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let n = a.n();
    // column-major working copy so rotations touch contiguous memory
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let (alpha, beta) = (norms[i], norms[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let (left, right) = cols.split_at_mut(j);
                let (ci, cj) = (&mut left[i], &mut right[0]);
                let gamma = dot(ci, cj);
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                    let (u, v) = (*x, *y);
                    *x = c * u - s * v;
                    *y = s * u + c * v;
                }
                norms[i] = alpha - t * gamma;
                norms[j] = beta + t * gamma;
            }
        }
        // incremental updates drift; refresh once per sweep
        for (nrm, c) in norms.iter_mut().zip(&cols) {
            *nrm = dot(c, c);
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = norms.into_iter().map(f64::sqrt).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
