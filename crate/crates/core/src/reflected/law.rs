use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sim::Estimate;
use crate::error::{Error, Result};
use crate::geometry::StripComplex;
use crate::quadrature::gauss_legendre_16;
use crate::stats::Welford;

/// Terms whose decay factor falls below this are dropped.
pub const TRUNCATION: f64 = 1e-14;
/// Upper bound on the number of cosine modes used.
pub const MAX_MODES: usize = 4096;

/// Law of the frozen-`x` fast motion on one cross-section component `[y_lo, y_lo + l]`:
/// reflected Brownian motion with generator `(1/(2ε²)) d²/dy²`, so mode `j` decays at
/// rate `(jπ/l)² / (2ε²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionLaw {
    pub y_lo: f64,
    pub length: f64,
    pub eps: f64,
}

impl CrossSectionLaw {
    /// The component of edge `edge` at abscissa `x`.
    pub fn at(sc: &StripComplex, x: f64, edge: usize, eps: f64) -> Result<Self> {
        let c = sc
            .cross_section(x)
            .into_iter()
            .find(|c| c.edge == edge)
            .ok_or_else(|| Error::Domain(format!("edge {edge} has no cross-section at x = {x}")))?;
        if !(c.length > 0.0) {
            return Err(Error::Domain(format!("cross-section of edge {edge} at x = {x} is degenerate")));
        }
        Ok(Self { y_lo: c.y_lo, length: c.length, eps })
    }

    pub fn rate(&self, j: usize) -> f64 {
        let k = j as f64 * PI / self.length;
        0.5 * k * k / (self.eps * self.eps)
    }

    /// Number of modes with decay factor at least [`TRUNCATION`] after time `s`.
    fn n_modes(&self, s: f64) -> usize {
        if s <= 0.0 {
            return MAX_MODES;
        }
        // rate(j)·s ≤ −ln(TRUNCATION)
        let jmax = (-TRUNCATION.ln() / (s * self.rate(1))).sqrt().floor() as usize;
        jmax.min(MAX_MODES)
    }

    fn mode(&self, j: usize, y: f64) -> f64 {
        if j == 0 {
            1.0 / self.length.sqrt()
        } else {
            (2.0 / self.length).sqrt() * (j as f64 * PI * (y - self.y_lo) / self.length).cos()
        }
    }

    /// Coefficients `⟨f, e_j⟩` by composite 16-point Gauss–Legendre.
    fn coefficients(&self, f: &dyn Fn(f64) -> f64, n: usize) -> Vec<f64> {
        let gl = gauss_legendre_16();
        let panels = (n / 4).clamp(16, 1024);
        let h = self.length / panels as f64;
        let mut pts = Vec::with_capacity(panels * 16);
        for p in 0..panels {
            let a = self.y_lo + p as f64 * h;
            for (t, w) in gl.nodes.iter().zip(&gl.weights) {
                let y = a + 0.5 * h * (t + 1.0);
                pts.push((y, 0.5 * h * w * f(y)));
            }
        }
        (0..=n).map(|j| pts.iter().map(|&(y, wf)| wf * self.mode(j, y)).sum()).collect()
    }

    /// `Σ_j e^{−s·rate_j} ⟨f, e_j⟩ e_j`, the expected value of `f(Y_s)` as a function of the start.
    pub fn relax(&self, f: &dyn Fn(f64) -> f64, s: f64) -> impl Fn(f64) -> f64 + use<> {
        let n = self.n_modes(s);
        let c: Vec<f64> = self
            .coefficients(f, n)
            .into_iter()
            .enumerate()
            .map(|(j, c)| c * (-s * self.rate(j)).exp())
            .collect();
        let law = *self;
        move |y| c.iter().enumerate().map(|(j, c)| c * law.mode(j, y)).sum()
    }

    /// `P(Y_s ≤ y | Y_0 = y0)`.
    pub fn transition_cdf(&self, y0: f64, s: f64, y: f64) -> f64 {
        let l = self.length;
        let u = ((y - self.y_lo) / l).clamp(0.0, 1.0);
        if u >= 1.0 {
            return 1.0;
        }
        let u0 = (y0 - self.y_lo) / l;
        let n = self.n_modes(s);
        let mut f = u;
        for j in 1..=n {
            let k = j as f64 * PI;
            f += (-s * self.rate(j)).exp() * 2.0 / k * (k * u0).cos() * (k * u).sin();
        }
        f.clamp(0.0, 1.0)
    }
}

/// `f` relaxed for time `s` in the section of `edge` at `x`.
pub fn cross_section_relaxation(
    sc: &StripComplex,
    x: f64,
    edge: usize,
    eps: f64,
    s: f64,
    f: &dyn Fn(f64) -> f64,
) -> Result<impl Fn(f64) -> f64 + use<>> {
    Ok(CrossSectionLaw::at(sc, x, edge, eps)?.relax(f, s))
}

/// Sample `p`-th moment of local-time increments `φ(t) − φ(r)`.
pub fn local_time_moments(increments: &[f64], p: u32) -> Result<Estimate> {
    if ![1, 2, 4].contains(&p) {
        return Err(Error::Config(format!("moment order must be 1, 2 or 4, got {p}")));
    }
    if increments.iter().any(|d| *d < 0.0) {
        return Err(Error::Config("local time increments must be non-negative".into()));
    }
    let w: Welford = increments.iter().map(|d| d.powi(p as i32)).collect();
    Ok(Estimate::from(&w))
}

/// `γ^p + ε^p γ^{p/2} + ε^{2p}`.
pub fn bound_shape(eps: f64, gamma: f64, p: u32) -> f64 {
    let p = p as i32;
    gamma.powi(p) + eps.powi(p) * gamma.powf(p as f64 / 2.0) + eps.powi(2 * p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub eps: f64,
    pub gamma: f64,
    pub moment: Estimate,
    pub bound: f64,
    pub dominated: bool,
}

/// Fits `c` so that `c · shape` equals the moment at the first (coarsest) entry and
/// checks `moment ≤ slack · c · shape` at every entry.
pub fn fit_and_dominate(points: &[(f64, f64, Estimate)], p: u32, slack: f64) -> Result<(f64, Vec<MomentCheck>)> {
    let &(e0, g0, m0) = points.first().ok_or_else(|| Error::Config("no moments to fit".into()))?;
    let c = m0.mean / bound_shape(e0, g0, p);
    let checks = points
        .iter()
        .map(|&(eps, gamma, moment)| {
            let bound = c * bound_shape(eps, gamma, p);
            MomentCheck { eps, gamma, moment, bound, dominated: moment.mean <= slack * bound }
        })
        .collect();
    Ok((c, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;

    #[test]
    fn constants_do_not_relax() {
        let law = CrossSectionLaw { y_lo: 0.0, length: 2.0, eps: 0.1 };
        for s in [0.0, 1e-3, 1.0] {
            let g = law.relax(&|_| 3.0, s);
            assert!((g(0.7) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cosine_mode_decays_at_half_rate() {
        let law = CrossSectionLaw { y_lo: 0.0, length: PI, eps: 0.5 };
        let s = 0.05;
        let g = law.relax(&|y: f64| y.cos(), s);
        let decay = (-s / (2.0 * 0.25)).exp();
        for y in [0.1, 1.0, 2.5] {
            assert!((g(y) - decay * y.cos()).abs() < 1e-12, "{y}");
        }
    }

    #[test]
    fn long_times_give_the_section_average() {
        let law = CrossSectionLaw { y_lo: 1.0, length: 2.0, eps: 0.1 };
        let g = law.relax(&|y: f64| y * y, 10.0);
        // (1/2)∫_1^3 y² dy = 13/3
        assert!((g(1.3) - 13.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_a_distribution_function() {
        let law = CrossSectionLaw { y_lo: 0.0, length: 3.0, eps: 0.05 };
        let s = 0.003;
        let mut prev = 0.0;
        for i in 0..=300 {
            let y = 3.0 * i as f64 / 300.0;
            let f = law.transition_cdf(1.0, s, y);
            assert!(f + 1e-9 >= prev);
            prev = f;
        }
        assert!((law.transition_cdf(1.0, s, 3.0) - 1.0).abs() < 1e-12);
        // far relaxed: uniform
        assert!((law.transition_cdf(1.0, 1.0, 1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn section_lookup() {
        let sc = domains::single_strip();
        let law = CrossSectionLaw::at(&sc, PI / 2.0, 0, 0.1).unwrap();
        assert!((law.length - 3.0).abs() < 1e-15);
        assert!(CrossSectionLaw::at(&sc, PI / 2.0, 3, 0.1).is_err());
    }

    #[test]
    fn moments() {
        assert_eq!(local_time_moments(&[0.0, 0.0], 2).unwrap().mean, 0.0);
        assert!(local_time_moments(&[1.0], 3).is_err());
        let m = local_time_moments(&[1.0, 2.0], 2).unwrap();
        assert_eq!(m.mean, 2.5);
        let e = Estimate { mean: 1.0, stderr: 0.0, n: 1 };
        let (c, checks) = fit_and_dominate(&[(0.2, 0.03, e), (0.1, 0.01, e)], 2, 1.5).unwrap();
        assert!((c * bound_shape(0.2, 0.03, 2) - 1.0).abs() < 1e-12);
        assert!(!checks[1].dominated);
        assert!((gamma_eps_check() - 0.01 * 10f64.ln()).abs() < 1e-15);
    }

    fn gamma_eps_check() -> f64 {
        super::super::frozen::gamma_eps(0.1, 1.0)
    }
}
