#![allow(dead_code)]
pub mod priors;
pub mod bd;
pub mod mc;

use bayes_multirate::frame_io::FramePlane;
use bayes_multirate::rdo::{BlockGeom, CostModelParams, QualityLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(v: u8) -> QualityLevel {
    QualityLevel::new(v).unwrap()
}

/// 64x64 frame filled with a random mix of flat areas, ramps and noise.
pub fn random_frame(r: &mut ChaCha8Rng, index: usize) -> FramePlane {
    let base: i32 = r.random_range(20..230);
    let amp: i32 = r.random_range(0..60);
    let gx: f64 = r.random_range(-1.5..1.5);
    let gy: f64 = r.random_range(-1.5..1.5);
    let mut s = Vec::with_capacity(64 * 64);
    for y in 0..64 {
        for x in 0..64 {
            let n = if amp > 0 { r.random_range(-amp..=amp) } else { 0 };
            let v = base as f64 + gx * x as f64 + gy * y as f64 + n as f64;
            s.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    FramePlane::new(64, 64, index, s).unwrap()
}

/// Random 16x16 block position inside a 64x64 frame.
pub fn random_block16(r: &mut ChaCha8Rng) -> BlockGeom {
    BlockGeom::new(16 * r.random_range(0..4), 16 * r.random_range(0..4), 16, 16).unwrap()
}

/// Independent leaf cost: min over the two predictors, DC preferred on ties.
pub fn oracle_leaf(
    g: &BlockGeom,
    f: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    p: &CostModelParams,
) -> f64 {
    let step = p.step_base * 2f64.powf((q.q() as f64 - 12.0) / p.step_octave);
    let lambda = p.lambda_scale * step * step;
    let eval = |pred: &dyn Fn(usize, usize) -> f64| {
        let (mut d, mut bits) = (0.0, p.mode_signal_bits);
        for y in g.y..g.y + g.h {
            for x in g.x..g.x + g.w {
                let s = f.get(x, y) as f64;
                let pr = pred(x, y);
                let level = ((s - pr) / step).round();
                let rec = (pr + level * step).round().clamp(0.0, 255.0);
                d += (s - rec) * (s - rec);
                bits += (1.0 + level.abs()).log2();
            }
        }
        d + lambda * bits
    };
    let mut sum = 0.0;
    for y in g.y..g.y + g.h {
        for x in g.x..g.x + g.w {
            sum += f.get(x, y) as f64;
        }
    }
    let dc = (sum / g.area() as f64 + 0.5).floor();
    let intra = eval(&|_, _| dc);
    match prev {
        Some(pf) => {
            let inter = eval(&|x, y| pf.get(x, y) as f64);
            if inter < intra { inter } else { intra }
        }
        None => intra,
    }
}

/// Costs of every legal tree over `g`, built by explicit enumeration.
pub fn oracle_all_costs(
    g: &BlockGeom,
    f: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    p: &CostModelParams,
) -> Vec<f64> {
    let step = p.step_base * 2f64.powf((q.q() as f64 - 12.0) / p.step_octave);
    let lambda = p.lambda_scale * step * step;
    let mut out = vec![oracle_leaf(g, f, prev, q, p)];
    if g.w == g.h && g.w >= 8 {
        let h = g.h / 2;
        let w = g.w / 2;
        let hz = [BlockGeom::new(g.x, g.y, g.w, h).unwrap(), BlockGeom::new(g.x, g.y + h, g.w, h).unwrap()];
        let vt = [BlockGeom::new(g.x, g.y, w, g.h).unwrap(), BlockGeom::new(g.x + w, g.y, w, g.h).unwrap()];
        for halves in [hz, vt] {
            let c: f64 = halves.iter().map(|b| oracle_leaf(b, f, prev, q, p)).sum();
            out.push(c + lambda * p.partition_signal_bits);
        }
        let quads: Vec<Vec<f64>> = [(0, 0), (w, 0), (0, h), (w, h)]
            .iter()
            .map(|&(dx, dy)| oracle_all_costs(&BlockGeom::new(g.x + dx, g.y + dy, w, h).unwrap(), f, prev, q, p))
            .collect();
        for a in &quads[0] {
            for b in &quads[1] {
                for c in &quads[2] {
                    for d in &quads[3] {
                        out.push(a + b + c + d + lambda * p.partition_signal_bits);
                    }
                }
            }
        }
    }
    out
}
