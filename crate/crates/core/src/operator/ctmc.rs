use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::assemble::{DiscreteGraphOperator, NodeKind};
use crate::error::Result;
use crate::types::GraphPoint;

/// Continuous-time Markov chain with generator `L` (the discrete graph diffusion).
pub struct CtmcSampler {
    rates: Vec<f64>,
    targets: Vec<Vec<usize>>,
    cumulative: Vec<Vec<f64>>,
}

impl CtmcSampler {
    pub fn new(op: &DiscreteGraphOperator) -> Self {
        let n = op.n();
        let mut rates = vec![0.0; n];
        let mut targets = vec![Vec::new(); n];
        let mut cumulative = vec![Vec::new(); n];
        for i in 0..n {
            let mut acc = 0.0;
            for (j, v) in op.generator().row(i) {
                if j != i && v > 0.0 {
                    acc += v;
                    targets[i].push(j);
                    cumulative[i].push(acc);
                }
            }
            rates[i] = acc;
        }
        Self { rates, targets, cumulative }
    }

    /// State at time `t` starting from unknown `start`.
    pub fn sample<R: Rng + ?Sized>(&self, start: usize, t: f64, rng: &mut R) -> usize {
        let mut s = start;
        let mut clock = 0.0;
        loop {
            let q = self.rates[s];
            if q <= 0.0 {
                return s;
            }
            let e: f64 = Exp1.sample(rng);
            clock += e / q;
            if clock > t {
                return s;
            }
            let u = rng.random::<f64>() * q;
            let k = self.cumulative[s].partition_point(|&c| c <= u).min(self.targets[s].len() - 1);
            s = self.targets[s][k];
        }
    }
}

/// One draw of `Z̄(t)` from `start`, reported as a graph point.
pub fn sample_graph_diffusion<R: Rng + ?Sized>(
    op: &DiscreteGraphOperator,
    sampler: &CtmcSampler,
    start: GraphPoint,
    t: f64,
    rng: &mut R,
) -> Result<GraphPoint> {
    let s = sampler.sample(op.locate(start)?, t, rng);
    let node = op.nodes()[s];
    Ok(match node.kind {
        NodeKind::Cell { edge } => GraphPoint::on_edge(edge, node.x),
        NodeKind::Vertex { vertex } => GraphPoint::Vertex(vertex),
    })
}
