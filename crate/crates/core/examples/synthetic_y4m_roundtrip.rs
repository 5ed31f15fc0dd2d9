// Generate a synthetic clip, write it as Y4M, and read it back.
//
// Run with `cargo run --example synthetic_y4m_roundtrip`.

use std::io::Cursor;

use bayes_multirate::frame_io::{generate_synthetic, write_y4m, Pattern, SynthSpec, Y4mReader};
use bayes_multirate::Result;

pub fn run() -> Result<()> {
    let spec = SynthSpec {
        width: 100,
        height: 60,
        frame_count: 4,
        pattern: Pattern::MovingTexture { vx: 2, vy: 1 },
        seed: 3,
    };
    let frames = generate_synthetic(&spec)?;
    println!(
        "generated {} frames, visible {}x{}, padded {}x{}",
        frames.len(),
        frames[0].visible_width(),
        frames[0].visible_height(),
        frames[0].width(),
        frames[0].height()
    );

    let mut y4m = Vec::new();
    write_y4m(&mut y4m, &frames, 30)?;
    let mut reader = Y4mReader::new(Cursor::new(y4m))?;
    let info = reader.info().clone();
    let back = reader.read_all(None)?;
    let same = frames.iter().zip(&back).all(|(a, b)| a.visible_samples() == b.visible_samples());
    println!("y4m header {}x{}, {} frames read, identical: {same}", info.width, info.height, back.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
