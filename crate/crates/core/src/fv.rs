//! Symmetric finite-volume generators `L = W⁻¹ S` with diagonal mass `W`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::Csr;

/// Significant bits kept in masses and link coefficients.
pub const DYADIC_BITS: i32 = 23;

/// Rounds `v > 0` to `DYADIC_BITS` significant bits.
pub fn round_bits(v: f64) -> f64 {
    let e = v.log2().floor() as i32;
    let scale = 2f64.powi(e - DYADIC_BITS + 1);
    (v / scale).round() * scale
}

/// Generator of a reversible Markov chain on cells: `L_ij = c_ij / m_i`.
///
/// Masses `m_i` and link coefficients `K_ij = c_ij / (m_i m_j)` are rounded to
/// 23 significant bits (relative change below 1.2e-7). Then `L_ij = K_ij m_j`
/// is exact, `m_i L_ij = m_j L_ji` holds in exact arithmetic, and the short row
/// sums of 46-bit entries are exact, so `L·1 = 0` and `mᵀL = 0` without rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FvOperator {
    mass: Vec<f64>,
    /// `S = W L` (exactly symmetric).
    stiffness: Csr,
    generator: Csr,
}

impl FvOperator {
    /// From masses and symmetric links `(i, j, c_ij)`, `i ≠ j`; parallel links are summed.
    pub fn new(mass: Vec<f64>, links: &[(usize, usize, f64)]) -> Result<Self> {
        let n = mass.len();
        if let Some(i) = mass.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::Operator(format!("unknown {i} has non-positive mass {}", mass[i])));
        }
        let mass: Vec<f64> = mass.into_iter().map(round_bits).collect();

        let mut merged: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for &(i, j, c) in links {
            if i == j || i >= n || j >= n || !(c > 0.0 && c.is_finite()) {
                return Err(Error::Operator(format!("link ({i}, {j}) has non-positive weight {c}")));
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
        }

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &c) in &merged {
            let k = round_bits(c / (mass[i] * mass[j]));
            rows[i].push((j, k * mass[j]));
            rows[j].push((i, k * mass[i]));
        }
        let mut l_trip = Vec::with_capacity(2 * merged.len() + n);
        let mut s_trip = Vec::with_capacity(2 * merged.len() + n);
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut diag = 0.0;
            for &(j, a) in row.iter() {
                diag -= a;
                l_trip.push((i, j, a));
                s_trip.push((i, j, mass[i] * a));
            }
            l_trip.push((i, i, diag));
            s_trip.push((i, i, mass[i] * diag));
        }
        Ok(Self {
            mass,
            stiffness: Csr::from_triplets(n, &s_trip),
            generator: Csr::from_triplets(n, &l_trip),
        })
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn generator(&self) -> &Csr {
        &self.generator
    }

    pub fn stiffness(&self) -> &Csr {
        &self.stiffness
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.generator.mul_vec(f)
    }

    /// `⟨f, g⟩_W`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        crate::graph::weighted_dot(&self.mass, f, g)
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Row sums `L·1`, adding the off-diagonal entries before the diagonal.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let mut off = 0.0;
                let mut d = 0.0;
                for (j, v) in self.generator.row(i) {
                    if j == i {
                        d = v;
                    } else {
                        off += v;
                    }
                }
                off + d
            })
            .collect()
    }

    /// Largest `|(WL)_ij − (WL)_ji|` relative to `max |WL|`, computed from `L` and `W`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (i, j, v) in self.generator.triplets() {
            let a = self.mass[i] * v;
            let b = self.mass[j] * self.generator.get(j, i);
            worst = worst.max((a - b).abs());
            scale = scale.max(a.abs());
        }
        worst / scale
    }

    /// `‖mᵀL‖_∞ / ‖m‖_∞`.
    ///
    /// Products are split exactly with fused multiply-add and summed with Neumaier
    /// compensation, so the result reflects the matrix rather than the rounding of
    /// this check.
    pub fn stationary_residual(&self) -> f64 {
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); self.n()];
        for (i, j, v) in self.generator.triplets() {
            let m = self.mass[i];
            let p = m * v;
            terms[j].push(p);
            terms[j].push(m.mul_add(v, -p));
        }
        let num = terms.iter().map(|t| neumaier_sum(t).abs()).fold(0.0f64, f64::max);
        let den = self.mass.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        num / den
    }

    /// Copy with entry `(i, j)` of `L` replaced (negative controls in tests).
    pub fn with_entry(&self, i: usize, j: usize, v: f64) -> Result<Self> {
        let mut out = self.clone();
        out.generator.set(i, j, v)?;
        Ok(out)
    }
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_23_bits() {
        let v = 0.1;
        let r = round_bits(v);
        assert!((r - v).abs() <= v * 2f64.powi(-23));
        assert_eq!(round_bits(r), r);
        assert_eq!(round_bits(4.0 * v), 4.0 * r);
    }

    #[test]
    fn three_node_chain() {
        let op = FvOperator::new(vec![0.3, 0.7, 0.2], &[(0, 1, 1.1), (1, 2, 0.4)]).unwrap();
        assert!(op.row_sums().iter().all(|&s| s == 0.0));
        assert_eq!(op.stationary_residual(), 0.0);
        assert!(op.symmetry_defect() < 1e-15);
        assert!(FvOperator::new(vec![1.0, 1.0], &[(0, 1, -1.0)]).is_err());
        assert!(FvOperator::new(vec![1.0, 0.0], &[(0, 1, 1.0)]).is_err());
    }
}
