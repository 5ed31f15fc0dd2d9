//! Bundled synthetic clips used by the tests, examples and the CLI
//! (`--synth clip:<name>`).

use crate::frame_io::{Pattern, SynthSpec};

pub const BUNDLED_FRAMES: usize = 50;

/// Horizontal drift over mixed smooth/detailed texture, 192x128.
///
/// Bundled clips move at least 2 px per frame. At 1 px per frame the
/// zero-motion predictor is good enough at low Q that large smooth areas
/// stay unsplit in the reference while higher-Q locals split them.
pub fn drift() -> SynthSpec {
    SynthSpec {
        width: 192,
        height: 128,
        frame_count: BUNDLED_FRAMES,
        pattern: Pattern::MovingTexture { vx: 3, vy: 0 },
        seed: 11,
    }
}

/// Diagonal pan, 128x128.
pub fn pan() -> SynthSpec {
    SynthSpec {
        width: 128,
        height: 128,
        frame_count: BUNDLED_FRAMES,
        pattern: Pattern::MovingTexture { vx: 2, vy: 1 },
        seed: 23,
    }
}

/// Vertical motion at a size that needs padding (160x96 -> 192x128).
pub fn bubbles() -> SynthSpec {
    SynthSpec {
        width: 160,
        height: 96,
        frame_count: BUNDLED_FRAMES,
        pattern: Pattern::MovingTexture { vx: 0, vy: 2 },
        seed: 5,
    }
}

pub fn bundled() -> Vec<(&'static str, SynthSpec)> {
    vec![("drift", drift()), ("pan", pan()), ("bubbles", bubbles())]
}

pub fn by_name(name: &str) -> Option<SynthSpec> {
    bundled().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s)
}
