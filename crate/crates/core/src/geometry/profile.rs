use serde::{Deserialize, Serialize};

/// One `amp * sin(freq * x + phase)` term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineTerm {
    pub amp: f64,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

/// A boundary curve `y = h(x)`: a polynomial plus a sum of sine terms.
///
/// `poly[i]` is the coefficient of `x^i`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub sines: Vec<SineTerm>,
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Self { poly: vec![c], sines: Vec::new() }
    }

    pub fn linear(c0: f64, c1: f64) -> Self {
        Self { poly: vec![c0, c1], sines: Vec::new() }
    }

    pub fn with_sine(mut self, amp: f64, freq: f64, phase: f64) -> Self {
        self.sines.push(SineTerm { amp, freq, phase });
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        let p = self.poly.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let s: f64 = self.sines.iter().map(|t| t.amp * (t.freq * x + t.phase).sin()).sum();
        p + s
    }

    pub fn d1(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.poly.iter().enumerate().skip(1).rev() {
            acc = acc * x + i as f64 * c;
        }
        let s: f64 = self
            .sines
            .iter()
            .map(|t| t.amp * t.freq * (t.freq * x + t.phase).cos())
            .sum();
        acc + s
    }

    pub fn d2(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.poly.iter().enumerate().skip(2).rev() {
            acc = acc * x + (i * (i - 1)) as f64 * c;
        }
        let s: f64 = self
            .sines
            .iter()
            .map(|t| -t.amp * t.freq * t.freq * (t.freq * x + t.phase).sin())
            .sum();
        acc + s
    }

    /// The curve scaled vertically by `factor` (`y ↦ factor * y`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            poly: self.poly.iter().map(|c| c * factor).collect(),
            sines: self
                .sines
                .iter()
                .map(|t| SineTerm { amp: t.amp * factor, ..*t })
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.poly.iter().all(|c| c.is_finite())
            && self
                .sines
                .iter()
                .all(|t| t.amp.is_finite() && t.freq.is_finite() && t.phase.is_finite())
    }
}
