// BD-rate between two rate/PSNR curves.

use bayes_multirate::metrics::{bd_rate, RdPoint};
use bayes_multirate::Result;

fn curve(points: &[(f64, f64)]) -> Vec<RdPoint> {
    points.iter().map(|&(rate, quality)| RdPoint { rate, quality }).collect()
}

pub fn run() -> Result<()> {
    let anchor = curve(&[(1000.0, 32.1), (1800.0, 35.0), (3100.0, 37.6), (5600.0, 40.3)]);
    let test = curve(&[(1100.0, 32.4), (1900.0, 35.1), (3500.0, 38.0), (6200.0, 40.9)]);
    let scaled: Vec<RdPoint> = anchor.iter().map(|p| RdPoint { rate: p.rate * 1.05, ..*p }).collect();
    println!("anchor vs itself: {:+.4}%", bd_rate(&anchor, &anchor)?);
    println!("anchor vs 5% more rate: {:+.4}%", bd_rate(&anchor, &scaled)?);
    println!("anchor vs test: {:+.4}%", bd_rate(&anchor, &test)?);
    println!("test vs anchor: {:+.4}%", bd_rate(&test, &anchor)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
