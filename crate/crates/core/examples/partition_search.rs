// Rate-distortion partition search on one superblock, with and without a
// split gate, plus the exhaustive check on a 16x16 block.

use bayes_multirate::frame_io::{generate_synthetic, Pattern, SynthSpec};
use bayes_multirate::rdo::{
    brute_force_rdo, enumerate_partition_trees, rdo_search, AllowAll, BlockGeom, CostModelParams, FnGate,
    PartitionTree, QualityLevel,
};
use bayes_multirate::Result;

fn describe(t: &PartitionTree, indent: usize, out: &mut String) {
    out.push_str(&format!("{:indent$}{:?} {}x{} at ({},{})\n", "", t.choice, t.geom.w, t.geom.h, t.geom.x, t.geom.y));
    if indent < 4 {
        for c in &t.children {
            describe(c, indent + 2, out);
        }
    }
}

pub fn run() -> Result<()> {
    let frames = generate_synthetic(&SynthSpec {
        width: 64,
        height: 64,
        frame_count: 2,
        pattern: Pattern::MovingTexture { vx: 2, vy: 0 },
        seed: 8,
    })?;
    let params = CostModelParams::default();
    let sb = BlockGeom::superblock(0, 0);

    for q in [16, 32, 48] {
        let q = QualityLevel::new(q)?;
        let full = rdo_search(&sb, &frames[1], Some(&frames[0]), q, &params, &mut AllowAll)?;
        let mut shallow = FnGate(|g: &BlockGeom| g.depth() < 2);
        let capped = rdo_search(&sb, &frames[1], Some(&frames[0]), q, &params, &mut shallow)?;
        println!(
            "Q{:>2}: full cost {:.1} ({} leaves, {} evaluations), depth<2 gate cost {:.1} ({} evaluations)",
            q.q(),
            full.tree.cost,
            full.tree.leaves().len(),
            full.leaf_evaluations,
            capped.tree.cost,
            capped.leaf_evaluations
        );
    }

    let q = QualityLevel::new(30)?;
    let full = rdo_search(&sb, &frames[1], Some(&frames[0]), q, &params, &mut AllowAll)?;
    let mut tree = String::new();
    describe(&full.tree, 0, &mut tree);
    print!("top of the Q30 tree:\n{tree}");

    let block = BlockGeom::new(16, 16, 16, 16)?;
    let trees = enumerate_partition_trees(&block, &frames[1], Some(&frames[0]), q, &params)?;
    let best = brute_force_rdo(&block, &frames[1], Some(&frames[0]), q, &params)?;
    let searched = rdo_search(&block, &frames[1], Some(&frames[0]), q, &params, &mut AllowAll)?;
    println!(
        "16x16: {} legal trees, brute force {:.3}, search {:.3}, equal: {}",
        trees.len(),
        best.cost,
        searched.tree.cost,
        best.cost == searched.tree.cost
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
