use bayes_multirate::metrics::RdPoint;

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// BD-rate of two four-point curves by interpolating log-rate over
/// quality and integrating numerically over the shared quality range.
pub fn bd_rate_oracle(anchor: &[RdPoint], test: &[RdPoint]) -> f64 {
    let split = |c: &[RdPoint]| -> (Vec<f64>, Vec<f64>) {
        (c.iter().map(|p| p.quality).collect(), c.iter().map(|p| p.rate.ln()).collect())
    };
    let (xa, ya) = split(anchor);
    let (xt, yt) = split(test);
    let lo = xa.iter().cloned().fold(f64::INFINITY, f64::min).max(xt.iter().cloned().fold(f64::INFINITY, f64::min));
    let hi = xa.iter().cloned().fold(f64::NEG_INFINITY, f64::max).min(xt.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let n = 10_000;
    let ia = simpson(|x| lagrange(&xa, &ya, x), lo, hi, n);
    let it = simpson(|x| lagrange(&xt, &yt, x), lo, hi, n);
    100.0 * (((it - ia) / (hi - lo)).exp() - 1.0)
}

fn curve(points: &[(f64, f64)]) -> Vec<RdPoint> {
    points.iter().map(|&(rate, quality)| RdPoint { rate, quality }).collect()
}

pub fn fixture() -> (Vec<RdPoint>, Vec<RdPoint>) {
    (
        curve(&[(1000.0, 32.1), (1800.0, 35.0), (3100.0, 37.6), (5600.0, 40.3)]),
        curve(&[(1100.0, 32.4), (1900.0, 35.1), (3500.0, 38.0), (6200.0, 40.9)]),
    )
}
