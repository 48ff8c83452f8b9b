use nalgebra::{DMatrix, SymmetricEigen};

use super::assemble::DiscreteGraphOperator;
use crate::error::{Error, Result};

/// Largest operator accepted by [`eigen_decompose`].
pub const EIGEN_LIMIT: usize = 5000;

/// Eigenpairs of `L`, eigenvalues descending, eigenvectors `W`-orthonormal (columns).
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Solves the `W`-symmetric eigenproblem through `W^{-1/2} (W L) W^{-1/2}`.
pub fn eigen_decompose(op: &DiscreteGraphOperator) -> Result<Spectrum> {
    let n = op.n();
    if n > EIGEN_LIMIT {
        return Err(Error::Operator(format!("eigen_decompose is limited to {EIGEN_LIMIT} unknowns")));
    }
    let isq: Vec<f64> = op.mass().iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = DMatrix::zeros(n, n);
    for (i, j, v) in op.stiffness().triplets() {
        a[(i, j)] = isq[i] * v * isq[j];
    }
    // symmetrize away rounding in the scaling
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(a, 1e-15, 10_000)
        .ok_or_else(|| Error::Solver("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        // fix the sign so that the largest component is positive
        let big = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        let s = if big < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, c)] = s * col[r] * isq[r];
        }
    }
    Ok(Spectrum { values, vectors })
}

impl Spectrum {
    /// `Σ_p e^{μ_p t} ⟨f, φ_p⟩_W φ_p`.
    pub fn semigroup(&self, mass: &[f64], f: &[f64], t: f64) -> Vec<f64> {
        let n = f.len();
        let wf: Vec<f64> = mass.iter().zip(f).map(|(m, v)| m * v).collect();
        let mut out = vec![0.0; n];
        for (p, mu) in self.values.iter().enumerate() {
            let col = self.vectors.column(p);
            let c: f64 = col.iter().zip(&wf).map(|(a, b)| a * b).sum::<f64>() * (mu * t).exp();
            for (o, v) in out.iter_mut().zip(col.iter()) {
                *o += c * v;
            }
        }
        out
    }

    pub fn mode(&self, p: usize) -> Vec<f64> {
        self.vectors.column(p).iter().copied().collect()
    }
}
