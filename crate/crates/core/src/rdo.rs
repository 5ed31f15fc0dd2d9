//! Quadtree partition geometry, the surrogate rate-distortion cost model,
//! gated recursive search and an exhaustive reference search.
//!
//! The cost of a leaf is `J = D + lambda * R` where `D` is the squared error
//! after quantizing the spatial residual with step `step(Q)` and `R` is a
//! log-magnitude rate proxy. Internal nodes (Horz, Vert, Split4) additionally
//! pay `lambda * partition_signal_bits`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_io::FramePlane;

pub const SUPERBLOCK_SIZE: usize = 64;
pub const MIN_BLOCK_SIZE: usize = 4;
pub const MAX_DEPTH: u8 = 4;
/// Largest superblock accepted by [`brute_force_rdo`].
pub const BRUTE_FORCE_MAX: usize = 16;

fn log2_exact(v: usize) -> Option<u8> {
    (v.is_power_of_two() && (MIN_BLOCK_SIZE..=SUPERBLOCK_SIZE).contains(&v))
        .then(|| v.trailing_zeros() as u8)
}

/// Depth of a `w x h` block: `min(log2(64/w), log2(64/h))`.
pub fn depth_of(w: usize, h: usize) -> Result<u8> {
    match (log2_exact(w), log2_exact(h)) {
        (Some(lw), Some(lh)) => Ok(6 - lw.max(lh)),
        _ => Err(Error::InvalidDims { w, h }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockGeom {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl BlockGeom {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        depth_of(w, h)?;
        Ok(Self { x, y, w, h })
    }

    pub fn superblock(x: usize, y: usize) -> Self {
        Self {
            x,
            y,
            w: SUPERBLOCK_SIZE,
            h: SUPERBLOCK_SIZE,
        }
    }

    pub fn depth(&self) -> u8 {
        let longer = self.w.max(self.h);
        6 - longer.trailing_zeros() as u8
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn is_square(&self) -> bool {
        self.w == self.h
    }

    pub fn can_split4(&self) -> bool {
        self.is_square() && self.w >= 2 * MIN_BLOCK_SIZE
    }

    /// Horz/Vert halves must stay at least 4 wide; non-square blocks never split.
    pub fn can_halve(&self) -> bool {
        self.can_split4()
    }

    pub fn overlaps(&self, other: &BlockGeom) -> bool {
        self.x < other.x + other.w
            && other.x < self.x + self.w
            && self.y < other.y + other.h
            && other.y < self.y + self.h
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.x + self.w <= width && self.y + self.h <= height
    }

    /// Top and bottom halves.
    pub fn horz(&self) -> [BlockGeom; 2] {
        let h = self.h / 2;
        [
            BlockGeom { h, ..*self },
            BlockGeom {
                y: self.y + h,
                h,
                ..*self
            },
        ]
    }

    /// Left and right halves.
    pub fn vert(&self) -> [BlockGeom; 2] {
        let w = self.w / 2;
        [
            BlockGeom { w, ..*self },
            BlockGeom {
                x: self.x + w,
                w,
                ..*self
            },
        ]
    }

    /// Quadrants in raster order.
    pub fn split4(&self) -> [BlockGeom; 4] {
        let n = self.w / 2;
        let q = |dx, dy| BlockGeom {
            x: self.x + dx,
            y: self.y + dy,
            w: n,
            h: n,
        };
        [q(0, 0), q(n, 0), q(0, n), q(n, n)]
    }

    fn check_in(&self, plane: &FramePlane) -> Result<()> {
        if self.fits_in(plane.width(), plane.height()) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x: self.x,
                y: self.y,
                w: self.w,
                h: self.h,
                frame_w: plane.width(),
                frame_h: plane.height(),
            })
        }
    }
}

/// Partition applied at a tree node, in tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartitionChoice {
    None,
    Horz,
    Vert,
    Split4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictionMode {
    DcIntra,
    ZeroMvInter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafResult {
    pub mode: PredictionMode,
    /// Sum of squared error.
    pub distortion: f64,
    /// Abstract bits.
    pub rate_proxy: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModelParams {
    /// Quantizer step at Q = 12.
    pub step_base: f64,
    /// Quality levels per doubling of the step.
    pub step_octave: f64,
    pub lambda_scale: f64,
    pub partition_signal_bits: f64,
    pub mode_signal_bits: f64,
}

impl Default for CostModelParams {
    fn default() -> Self {
        Self {
            step_base: 1.0,
            step_octave: 6.0,
            lambda_scale: 0.85,
            partition_signal_bits: 4.0,
            mode_signal_bits: 2.0,
        }
    }
}

impl CostModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("step_base", self.step_base),
            ("step_octave", self.step_octave),
            ("lambda_scale", self.lambda_scale),
            ("partition_signal_bits", self.partition_signal_bits),
            ("mode_signal_bits", self.mode_signal_bits),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `step_base * 2^((Q - 12) / step_octave)`.
    pub fn step(&self, q: QualityLevel) -> f64 {
        self.step_base * ((q.q() as f64 - 12.0) / self.step_octave).exp2()
    }

    pub fn lambda(&self, q: QualityLevel) -> f64 {
        let s = self.step(q);
        self.lambda_scale * s * s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct QualityLevel(u8);

impl QualityLevel {
    pub const MAX: u8 = 63;

    pub fn new(q: u8) -> Result<Self> {
        if q > Self::MAX {
            return Err(Error::InvalidQuality(q as i32));
        }
        Ok(Self(q))
    }

    pub fn q(self) -> u8 {
        self.0
    }

    /// Position in the quantizer lookup table.
    pub fn q_index(self) -> u32 {
        4 * self.0 as u32
    }

    /// Quality used for special frames: `Q - offset`, floored at 0.
    pub fn lowered(self, offset: u8) -> Self {
        Self(self.0.saturating_sub(offset))
    }
}

impl TryFrom<u8> for QualityLevel {
    type Error = Error;
    fn try_from(q: u8) -> Result<Self> {
        Self::new(q)
    }
}

impl From<QualityLevel> for u8 {
    fn from(q: QualityLevel) -> u8 {
        q.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionTree {
    pub geom: BlockGeom,
    pub choice: PartitionChoice,
    pub children: Vec<PartitionTree>,
    /// Present exactly on leaves (`choice == None`).
    pub leaf: Option<LeafResult>,
    /// Total RD cost of this subtree.
    pub cost: f64,
}

impl PartitionTree {
    fn leaf(geom: BlockGeom, result: LeafResult) -> Self {
        Self {
            geom,
            choice: PartitionChoice::None,
            children: Vec::new(),
            leaf: Some(result),
            cost: result.cost,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Prime blocks in depth-first order.
    pub fn leaves(&self) -> Vec<&PartitionTree> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a PartitionTree>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    pub fn internal_nodes(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            1 + self.children.iter().map(|c| c.internal_nodes()).sum::<usize>()
        }
    }

    /// Sum of leaf distortion.
    pub fn distortion(&self) -> f64 {
        self.leaves().iter().map(|l| l.leaf.map_or(0.0, |r| r.distortion)).sum()
    }

    /// Leaf rate plus partition signalling.
    pub fn rate_proxy(&self, params: &CostModelParams) -> f64 {
        let leaf_rate: f64 = self.leaves().iter().map(|l| l.leaf.map_or(0.0, |r| r.rate_proxy)).sum();
        leaf_rate + params.partition_signal_bits * self.internal_nodes() as f64
    }

    /// Structural equality (geometry and choices), ignoring costs.
    pub fn same_structure(&self, other: &PartitionTree) -> bool {
        self.geom == other.geom
            && self.choice == other.choice
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.same_structure(b))
    }
}

/// Quantizes the residual of `src - pred` over `geom`; returns `(D, sum log2(1+|level|))`
/// and optionally writes the reconstruction.
fn quantize_block<P: Fn(usize, usize) -> i32>(
    geom: &BlockGeom,
    src: &FramePlane,
    pred: P,
    step: f64,
    mut recon: Option<&mut FramePlane>,
) -> (f64, f64) {
    let mut sse: u64 = 0;
    let mut bits = 0.0f64;
    for y in geom.y..geom.y + geom.h {
        let row = src.row(y);
        for x in geom.x..geom.x + geom.w {
            let s = row[x] as i32;
            let p = pred(x, y);
            let level = ((s - p) as f64 / step).round();
            let r = (p as f64 + level * step).round().clamp(0.0, 255.0) as i32;
            let e = (s - r) as i64;
            sse += (e * e) as u64;
            if level != 0.0 {
                bits += (1.0 + level.abs()).log2();
            }
            if let Some(out) = recon.as_deref_mut() {
                let w = out.width();
                out.samples_mut()[y * w + x] = r as u8;
            }
        }
    }
    (sse as f64, bits)
}

fn dc_predictor(geom: &BlockGeom, src: &FramePlane) -> i32 {
    let mut sum: u64 = 0;
    for y in geom.y..geom.y + geom.h {
        sum += src.row(y)[geom.x..geom.x + geom.w].iter().map(|&v| v as u64).sum::<u64>();
    }
    let n = geom.area() as u64;
    ((sum + n / 2) / n) as i32
}

fn check_prev(frame: &FramePlane, prev: Option<&FramePlane>) -> Result<()> {
    match prev {
        Some(p) if p.width() != frame.width() || p.height() != frame.height() => {
            Err(Error::DimMismatch(format!(
                "previous reconstruction {}x{} vs frame {}x{}",
                p.width(),
                p.height(),
                frame.width(),
                frame.height()
            )))
        }
        _ => Ok(()),
    }
}

/// Evaluates DcIntra and (when `prev` is given) ZeroMvInter for one block
/// and returns the cheaper one; DcIntra wins exact ties.
pub fn leaf_cost(
    geom: &BlockGeom,
    frame: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    params: &CostModelParams,
) -> Result<LeafResult> {
    geom.check_in(frame)?;
    check_prev(frame, prev)?;
    Ok(leaf_cost_unchecked(geom, frame, prev, params.step(q), params.lambda(q), params))
}

fn leaf_cost_unchecked(
    geom: &BlockGeom,
    frame: &FramePlane,
    prev: Option<&FramePlane>,
    step: f64,
    lambda: f64,
    params: &CostModelParams,
) -> LeafResult {
    let dc = dc_predictor(geom, frame);
    let (d, bits) = quantize_block(geom, frame, |_, _| dc, step, None);
    let rate = params.mode_signal_bits + bits;
    let mut best = LeafResult {
        mode: PredictionMode::DcIntra,
        distortion: d,
        rate_proxy: rate,
        cost: d + lambda * rate,
    };
    if let Some(p) = prev {
        let (d, bits) = quantize_block(geom, frame, |x, y| p.get(x, y) as i32, step, None);
        let rate = params.mode_signal_bits + bits;
        let cost = d + lambda * rate;
        if cost < best.cost {
            best = LeafResult {
                mode: PredictionMode::ZeroMvInter,
                distortion: d,
                rate_proxy: rate,
                cost,
            };
        }
    }
    best
}

/// Everything a gate learns about a splittable node once it is resolved.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeOutcome {
    pub split_evaluated: bool,
    pub split_chosen: bool,
    /// Cost of the best of None/Horz/Vert.
    pub nonsplit_cost: f64,
    pub split_cost: Option<f64>,
    /// Leaf evaluations spent on None/Horz/Vert at this node.
    pub nonsplit_evaluations: u64,
    /// Leaf evaluations spent on the whole subtree, split branch included.
    pub subtree_evaluations: u64,
}

/// Decides whether a node's Split4 branch is searched. `allow_split` is
/// called once per splittable node after None/Horz/Vert were evaluated;
/// `observe` follows once that node is resolved.
pub trait SplitGate {
    fn allow_split(&mut self, geom: &BlockGeom) -> bool;

    fn observe(&mut self, _geom: &BlockGeom, _outcome: &NodeOutcome) {}
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AllowAll;

impl SplitGate for AllowAll {
    fn allow_split(&mut self, _geom: &BlockGeom) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DenyAll;

impl SplitGate for DenyAll {
    fn allow_split(&mut self, _geom: &BlockGeom) -> bool {
        false
    }
}

/// Adapts a predicate into a gate.
pub struct FnGate<F>(pub F);

impl<F: FnMut(&BlockGeom) -> bool> SplitGate for FnGate<F> {
    fn allow_split(&mut self, geom: &BlockGeom) -> bool {
        (self.0)(geom)
    }
}

/// Full search that records every node outcome.
#[derive(Debug, Default)]
pub struct RecordingGate {
    pub outcomes: std::collections::HashMap<BlockGeom, NodeOutcome>,
}

impl SplitGate for RecordingGate {
    fn allow_split(&mut self, _geom: &BlockGeom) -> bool {
        true
    }

    fn observe(&mut self, geom: &BlockGeom, outcome: &NodeOutcome) {
        self.outcomes.insert(*geom, *outcome);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub tree: PartitionTree,
    pub leaf_evaluations: u64,
}

struct Searcher<'a> {
    frame: &'a FramePlane,
    prev: Option<&'a FramePlane>,
    params: &'a CostModelParams,
    step: f64,
    lambda: f64,
    evaluations: u64,
}

impl<'a> Searcher<'a> {
    fn new(
        frame: &'a FramePlane,
        prev: Option<&'a FramePlane>,
        q: QualityLevel,
        params: &'a CostModelParams,
    ) -> Self {
        Self {
            frame,
            prev,
            params,
            step: params.step(q),
            lambda: params.lambda(q),
            evaluations: 0,
        }
    }

    fn partition_cost(&self) -> f64 {
        self.lambda * self.params.partition_signal_bits
    }

    fn evaluate(&mut self, geom: BlockGeom) -> PartitionTree {
        self.evaluations += 1;
        let r = leaf_cost_unchecked(&geom, self.frame, self.prev, self.step, self.lambda, self.params);
        PartitionTree::leaf(geom, r)
    }

    fn halves(&mut self, choice: PartitionChoice, geom: BlockGeom) -> PartitionTree {
        let parts = match choice {
            PartitionChoice::Horz => geom.horz(),
            _ => geom.vert(),
        };
        let a = self.evaluate(parts[0]);
        let b = self.evaluate(parts[1]);
        let cost = (a.cost + b.cost) + self.partition_cost();
        PartitionTree {
            geom,
            choice,
            children: vec![a, b],
            leaf: None,
            cost,
        }
    }

    fn search(&mut self, geom: BlockGeom, gate: &mut dyn SplitGate) -> PartitionTree {
        let start = self.evaluations;
        let mut best = self.evaluate(geom);
        if !geom.can_split4() {
            return best;
        }
        for choice in [PartitionChoice::Horz, PartitionChoice::Vert] {
            let cand = self.halves(choice, geom);
            if cand.cost < best.cost {
                best = cand;
            }
        }
        let nonsplit_cost = best.cost;
        let nonsplit_evaluations = self.evaluations - start;
        let mut split_cost = None;
        let mut split_chosen = false;
        if gate.allow_split(&geom) {
            let children: Vec<PartitionTree> =
                geom.split4().into_iter().map(|g| self.search(g, gate)).collect();
            let cost = (((children[0].cost + children[1].cost) + children[2].cost) + children[3].cost)
                + self.partition_cost();
            split_cost = Some(cost);
            if cost < best.cost {
                split_chosen = true;
                best = PartitionTree {
                    geom,
                    choice: PartitionChoice::Split4,
                    children,
                    leaf: None,
                    cost,
                };
            }
        }
        gate.observe(
            &geom,
            &NodeOutcome {
                split_evaluated: split_cost.is_some(),
                split_chosen,
                nonsplit_cost,
                split_cost,
                nonsplit_evaluations,
                subtree_evaluations: self.evaluations - start,
            },
        );
        best
    }
}

/// Minimum-cost partition of `geom` over the space the gate permits.
pub fn rdo_search(
    geom: &BlockGeom,
    frame: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    params: &CostModelParams,
    gate: &mut dyn SplitGate,
) -> Result<SearchOutcome> {
    depth_of(geom.w, geom.h)?;
    geom.check_in(frame)?;
    check_prev(frame, prev)?;
    let mut s = Searcher::new(frame, prev, q, params);
    let tree = s.search(*geom, gate);
    Ok(SearchOutcome {
        tree,
        leaf_evaluations: s.evaluations,
    })
}

/// Every legal partition tree of `geom`, each with its cost, in tie-break
/// order (None, Horz, Vert, then Split4 children combinations in
/// lexicographic order).
pub fn enumerate_partition_trees(
    geom: &BlockGeom,
    frame: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    params: &CostModelParams,
) -> Result<Vec<PartitionTree>> {
    if geom.w > BRUTE_FORCE_MAX || geom.h > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge { w: geom.w, h: geom.h });
    }
    depth_of(geom.w, geom.h)?;
    geom.check_in(frame)?;
    check_prev(frame, prev)?;
    let mut s = Searcher::new(frame, prev, q, params);
    Ok(enumerate(&mut s, *geom))
}

fn enumerate(s: &mut Searcher<'_>, geom: BlockGeom) -> Vec<PartitionTree> {
    let mut out = vec![s.evaluate(geom)];
    if !geom.can_split4() {
        return out;
    }
    out.push(s.halves(PartitionChoice::Horz, geom));
    out.push(s.halves(PartitionChoice::Vert, geom));
    let quads: Vec<Vec<PartitionTree>> =
        geom.split4().into_iter().map(|g| enumerate(s, g)).collect();
    let pc = s.partition_cost();
    for a in &quads[0] {
        for b in &quads[1] {
            for c in &quads[2] {
                for d in &quads[3] {
                    let cost = (((a.cost + b.cost) + c.cost) + d.cost) + pc;
                    out.push(PartitionTree {
                        geom,
                        choice: PartitionChoice::Split4,
                        children: vec![a.clone(), b.clone(), c.clone(), d.clone()],
                        leaf: None,
                        cost,
                    });
                }
            }
        }
    }
    out
}

/// Exact minimum over every legal tree (first minimum in enumeration order).
pub fn brute_force_rdo(
    geom: &BlockGeom,
    frame: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    params: &CostModelParams,
) -> Result<PartitionTree> {
    let trees = enumerate_partition_trees(geom, frame, prev, q, params)?;
    let mut best: Option<PartitionTree> = None;
    for t in trees {
        if best.as_ref().is_none_or(|b| t.cost < b.cost) {
            best = Some(t);
        }
    }
    Ok(best.expect("enumeration yields at least the unsplit tree"))
}

/// Result of encoding one padded frame.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedFrame {
    pub frame_index: usize,
    pub special: bool,
    pub q: QualityLevel,
    /// One tree per superblock, raster order.
    pub trees: Vec<PartitionTree>,
    pub reconstruction: FramePlane,
    pub distortion: f64,
    pub rate_proxy: f64,
    pub cost: f64,
    /// `cost / lambda`, a bit-equivalent RD cost.
    pub rd_bits: f64,
    pub leaf_evaluations: u64,
    depth_map: Vec<u8>,
    map_width: usize,
}

impl EncodedFrame {
    pub fn width(&self) -> usize {
        self.reconstruction.width()
    }

    pub fn height(&self) -> usize {
        self.reconstruction.height()
    }

    pub fn prime_blocks(&self) -> impl Iterator<Item = &PartitionTree> {
        self.trees.iter().flat_map(|t| t.leaves())
    }

    /// Max prime-block depth over the region, without bounds checking.
    pub(crate) fn max_depth_in(&self, region: &BlockGeom) -> u8 {
        let x0 = region.x / MIN_BLOCK_SIZE;
        let y0 = region.y / MIN_BLOCK_SIZE;
        let x1 = (region.x + region.w).div_ceil(MIN_BLOCK_SIZE);
        let y1 = (region.y + region.h).div_ceil(MIN_BLOCK_SIZE);
        let mut best = 0;
        for cy in y0..y1 {
            let row = &self.depth_map[cy * self.map_width..];
            for &d in &row[x0..x1] {
                best = best.max(d);
            }
        }
        best
    }
}

fn build_depth_map(trees: &[PartitionTree], width: usize, height: usize) -> (Vec<u8>, usize) {
    let mw = width / MIN_BLOCK_SIZE;
    let mh = height / MIN_BLOCK_SIZE;
    let mut map = vec![0u8; mw * mh];
    for leaf in trees.iter().flat_map(|t| t.leaves()) {
        let g = leaf.geom;
        let d = g.depth();
        for cy in g.y / MIN_BLOCK_SIZE..(g.y + g.h) / MIN_BLOCK_SIZE {
            for cx in g.x / MIN_BLOCK_SIZE..(g.x + g.w) / MIN_BLOCK_SIZE {
                map[cy * mw + cx] = d;
            }
        }
    }
    (map, mw)
}

/// Split degree of `region` in `frame`: the maximum depth of the prime
/// blocks overlapping it.
pub fn split_degree(frame: &EncodedFrame, region: &BlockGeom) -> Result<u8> {
    region.check_in(&frame.reconstruction)?;
    if region.w == 0 || region.h == 0 {
        return Err(Error::InvalidDims { w: region.w, h: region.h });
    }
    Ok(frame.max_depth_in(region))
}

/// Rebuilds the reconstruction a decoder would produce from the chosen leaves.
pub fn reconstruct(
    trees: &[PartitionTree],
    source: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    params: &CostModelParams,
) -> Result<FramePlane> {
    check_prev(source, prev)?;
    let step = params.step(q);
    let mut out = FramePlane::filled(source.width(), source.height(), source.frame_index(), 0)?;
    out.set_visible(source.visible_width(), source.visible_height());
    for leaf in trees.iter().flat_map(|t| t.leaves()) {
        let g = leaf.geom;
        g.check_in(source)?;
        let mode = leaf.leaf.map(|r| r.mode).ok_or_else(|| {
            Error::Invariant(format!("leaf at ({},{}) without payload", g.x, g.y))
        })?;
        match (mode, prev) {
            (PredictionMode::DcIntra, _) => {
                let dc = dc_predictor(&g, source);
                quantize_block(&g, source, |_, _| dc, step, Some(&mut out));
            }
            (PredictionMode::ZeroMvInter, Some(p)) => {
                quantize_block(&g, source, |x, y| p.get(x, y) as i32, step, Some(&mut out));
            }
            (PredictionMode::ZeroMvInter, None) => {
                return Err(Error::Invariant("inter leaf without a previous frame".into()));
            }
        }
    }
    Ok(out)
}

/// Encodes every superblock of a padded frame, raster order.
pub fn encode_frame(
    frame: &FramePlane,
    prev: Option<&FramePlane>,
    q: QualityLevel,
    params: &CostModelParams,
    special: bool,
    gate: &mut dyn SplitGate,
) -> Result<EncodedFrame> {
    if !frame.is_padded() {
        return Err(Error::InvalidDims {
            w: frame.width(),
            h: frame.height(),
        });
    }
    check_prev(frame, prev)?;
    let mut trees = Vec::new();
    let mut evaluations = 0;
    for sy in (0..frame.height()).step_by(SUPERBLOCK_SIZE) {
        for sx in (0..frame.width()).step_by(SUPERBLOCK_SIZE) {
            let out = rdo_search(&BlockGeom::superblock(sx, sy), frame, prev, q, params, gate)?;
            evaluations += out.leaf_evaluations;
            trees.push(out.tree);
        }
    }
    let reconstruction = reconstruct(&trees, frame, prev, q, params)?;
    let distortion = trees.iter().map(|t| t.distortion()).sum();
    let rate_proxy = trees.iter().map(|t| t.rate_proxy(params)).sum();
    let cost: f64 = trees.iter().map(|t| t.cost).sum();
    let (depth_map, map_width) = build_depth_map(&trees, frame.width(), frame.height());
    Ok(EncodedFrame {
        frame_index: frame.frame_index(),
        special,
        q,
        trees,
        reconstruction,
        distortion,
        rate_proxy,
        cost,
        rd_bits: cost / params.lambda(q),
        leaf_evaluations: evaluations,
        depth_map,
        map_width,
    })
}
