use bayes_multirate::inference::{Line, PriorModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const Q_LO: f64 = 40.0;
pub const Q_HI: f64 = 200.0;

fn ordered(r: &mut ChaCha8Rng) -> [f64; 4] {
    // four values in [0.011, 0.989] with gaps of at least 0.01
    let mut v = [0.0; 4];
    loop {
        for x in v.iter_mut() {
            *x = r.random_range(0.011..0.989);
        }
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= 0.01) {
            return v;
        }
    }
}

/// Prior whose lines stay strictly ordered and inside the clamp range on
/// [Q_LO, Q_HI].
pub fn random_valid_prior(r: &mut ChaCha8Rng) -> PriorModel {
    let lo = ordered(r);
    let hi = ordered(r);
    let lines = std::array::from_fn(|d| {
        let slope = (hi[d] - lo[d]) / (Q_HI - Q_LO);
        Line {
            slope,
            intercept: lo[d] - slope * Q_LO,
        }
    });
    PriorModel::from_lines(lines)
}
