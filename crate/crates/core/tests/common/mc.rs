use bayes_multirate::inference::{gate_decision, BayesParams, CountTables, GateDecision, DEGREES};
use bayes_multirate::rng::CounterStream;

/// Simulated gated-block stream with a known joint law over (d_fL, d_fR,
/// split). The gate posterior is a per-cell value so it correlates with
/// the context; cells with low posterior are the ones that get terminated.
pub struct Stream {
    cell_weight: [[f64; DEGREES]; DEGREES],
    split_prob: [[f64; DEGREES]; DEGREES],
    gate_p: [[f64; DEGREES]; DEGREES],
}

impl Stream {
    pub fn new() -> Self {
        let mut s = Stream {
            cell_weight: [[0.0; DEGREES]; DEGREES],
            split_prob: [[0.0; DEGREES]; DEGREES],
            gate_p: [[0.0; DEGREES]; DEGREES],
        };
        for l in 0..DEGREES {
            for r in 0..DEGREES {
                s.cell_weight[l][r] = 1.0 + ((l * 3 + r * 7) % 5) as f64;
                s.split_prob[l][r] = 0.05 + 0.9 * (l + r) as f64 / 8.0;
                s.gate_p[l][r] = if l + r <= 3 { 0.1 } else { 0.6 };
            }
        }
        s
    }

    pub fn true_conditional(&self) -> [[f64; DEGREES]; DEGREES] {
        let mut out = [[0.0; DEGREES]; DEGREES];
        let mut total = 0.0;
        for l in 0..DEGREES {
            for r in 0..DEGREES {
                out[l][r] = self.cell_weight[l][r] * self.split_prob[l][r];
                total += out[l][r];
            }
        }
        out.iter_mut().flatten().for_each(|v| *v /= total);
        out
    }

    pub fn run(&self, blocks: usize, force_unit_weight: bool) -> CountTables {
        let cells: Vec<(usize, usize, f64)> = (0..DEGREES)
            .flat_map(|l| (0..DEGREES).map(move |r| (l, r)))
            .map(|(l, r)| (l, r, self.cell_weight[l][r]))
            .collect();
        let total: f64 = cells.iter().map(|c| c.2).sum();
        let params = BayesParams::new(0.2, 0.05, 0).unwrap();
        let mut rs = CounterStream::new(17, 1);
        let mut t = CountTables::default();
        for _ in 0..blocks {
            let mut u = rs.next_f64() * total;
            let &(l, r, _) = cells
                .iter()
                .find(|c| {
                    u -= c.2;
                    u < 0.0
                })
                .unwrap_or(cells.last().unwrap());
            let split = rs.next_f64() < self.split_prob[l][r];
            let x = rs.next_f64();
            if let GateDecision::FullSearch { weight } = gate_decision(self.gate_p[l][r], &params, x) {
                let k = if force_unit_weight { 1.0 } else { weight };
                t.update(0, l, r, split, k);
            }
        }
        t
    }
}

pub fn max_cell_error(a: &[[f64; DEGREES]; DEGREES], b: &[[f64; DEGREES]; DEGREES]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

