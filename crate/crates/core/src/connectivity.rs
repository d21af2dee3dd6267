//! Crossing events, arm events and pivotality.
//!
//! Arm detection labels the monochromatic clusters that touch the inner
//! boundary, keeps those that also reach the outer boundary, and reads them off
//! in the order of the inner boundary. Crossing clusters occupy contiguous
//! stretches of that order, so the available arms form a cyclic (plane) or
//! linear (half-plane) colour word in which a cluster contributes as many
//! copies of its colour as it has vertex-disjoint crossing paths, capped at the
//! longest monochromatic run of the requested word. The event holds iff the
//! requested word is a subsequence of the available word (of some rotation of
//! it, in the plane).

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Error, Result};
use crate::lattice::{build_region, flags, CellIndex, Color, LatticeKind, Region, Shape};
use crate::sampling::Configuration;

/// Colour word of an arm event plus the half-plane flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArmType {
    sigma: Vec<bool>,
    half_plane: bool,
}

impl ArmType {
    pub fn new(sigma: Vec<bool>, half_plane: bool) -> Result<Self> {
        if sigma.is_empty() {
            return Err(param("arm word must be non-empty"));
        }
        Ok(ArmType { sigma, half_plane })
    }

    pub fn four_arm() -> Self {
        ArmType { sigma: vec![false, true, false, true], half_plane: false }
    }

    pub fn one_arm() -> Self {
        ArmType { sigma: vec![true], half_plane: false }
    }

    pub fn sigma(&self) -> &[bool] {
        &self.sigma
    }

    pub fn half_plane(&self) -> bool {
        self.half_plane
    }

    pub fn j(&self) -> usize {
        self.sigma.len()
    }

    /// Colour-swapped word.
    pub fn complement(&self) -> Self {
        ArmType { sigma: self.sigma.iter().map(|b| !b).collect(), half_plane: self.half_plane }
    }

    /// Word rotated left by `k`.
    pub fn rotate(&self, k: usize) -> Self {
        let mut sigma = self.sigma.clone();
        let len = sigma.len();
        sigma.rotate_left(k % len);
        ArmType { sigma, half_plane: self.half_plane }
    }

    /// Longest run of equal colours (cyclic in the plane).
    pub fn max_run(&self) -> usize {
        let s = &self.sigma;
        let j = s.len();
        if s.iter().all(|&b| b == s[0]) {
            return j;
        }
        let mut best = 1;
        let mut run = 1;
        let span = if self.half_plane { j } else { 2 * j };
        for k in 1..span {
            if s[k % j] == s[(k - 1) % j] {
                run += 1;
                best = best.max(run);
            } else {
                run = 1;
            }
        }
        best.min(j)
    }

    fn has_color(&self, c: bool) -> bool {
        self.sigma.contains(&c)
    }

    /// Longest run of colour `c` (cyclic in the plane).
    fn max_run_of(&self, c: bool) -> usize {
        let s = &self.sigma;
        let j = s.len();
        if s.iter().all(|&b| b == c) {
            return j;
        }
        let span = if self.half_plane { j } else { 2 * j };
        let (mut best, mut run) = (0, 0);
        for k in 0..span {
            run = if s[k % j] == c { run + 1 } else { 0 };
            best = best.max(run);
        }
        best.min(j)
    }
}

impl FromStr for ArmType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, half) = match s.strip_suffix('+') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let sigma = body
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(param(format!("arm word `{s}` must use 0/1 with an optional trailing +"))),
            })
            .collect::<Result<Vec<_>>>()?;
        ArmType::new(sigma, half)
    }
}

impl fmt::Display for ArmType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.sigma {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.half_plane {
            f.write_str("+")?;
        }
        Ok(())
    }
}

/// Union-find over a region's cells; two cells are joined iff they have the same
/// colour and are adjacent for that colour.
#[derive(Clone, Debug)]
pub struct ClusterLabeling {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl ClusterLabeling {
    pub fn build(region: &Region, x: &Configuration) -> Result<Self> {
        x.check_region(region)?;
        let n = region.len();
        let mut uf = ClusterLabeling { parent: (0..n as u32).collect(), rank: vec![0; n] };
        for i in 0..n {
            let color = Color::from_bit(x.bit(i));
            for &j in region.adjacency(color).of(i) {
                if j.get() > i && x.bit(j.get()) == x.bit(i) {
                    uf.union(i, j.get());
                }
            }
        }
        Ok(uf)
    }

    pub fn find(&mut self, c: CellIndex) -> CellIndex {
        CellIndex(self.find_index(c.get()) as u32)
    }

    fn find_index(&mut self, mut i: usize) -> usize {
        while self.parent[i] as usize != i {
            let gp = self.parent[self.parent[i] as usize];
            self.parent[i] = gp;
            i = gp as usize;
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find_index(a), self.find_index(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb as u32,
            std::cmp::Ordering::Greater => self.parent[rb] = ra as u32,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra as u32;
                self.rank[ra] += 1;
            }
        }
    }

    pub fn same(&mut self, a: CellIndex, b: CellIndex) -> bool {
        self.find(a) == self.find(b)
    }
}

#[derive(Clone, Copy, Debug)]
struct ClusterInfo {
    color: bool,
    touch: u8,
    seed: u32,
}

/// Worker-local buffers for the evaluators.
#[derive(Debug, Default)]
pub struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    label: Vec<u32>,
    queue: Vec<u32>,
    clusters: Vec<ClusterInfo>,
    seq: Vec<u32>,
    word: Vec<bool>,
    local: Vec<u32>,
    visit: Vec<u32>,
    visit_epoch: u32,
    cells: Vec<usize>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.label.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.clusters.clear();
    }

    #[inline]
    fn seen(&self, i: usize) -> bool {
        self.stamp[i] == self.epoch
    }

    #[inline]
    fn mark(&mut self, i: usize, label: u32) {
        self.stamp[i] = self.epoch;
        self.label[i] = label;
    }

    /// Label the cluster of `start` with a fresh id; returns the union of boundary flags.
    fn flood(&mut self, region: &Region, x: &Configuration, start: usize, stop_on: u8) -> u8 {
        let id = self.clusters.len() as u32;
        let color = x.bit(start);
        let adj = region.adjacency(Color::from_bit(color));
        let fl = region.flags();
        let mut touch = 0u8;
        self.queue.clear();
        self.queue.push(start as u32);
        self.mark(start, id);
        let mut head = 0;
        while head < self.queue.len() {
            let i = self.queue[head] as usize;
            head += 1;
            touch |= fl[i];
            if touch & stop_on == stop_on && stop_on != 0 {
                break;
            }
            for &j in adj.of(i) {
                let j = j.get();
                if !self.seen(j) && x.bit(j) == color {
                    self.mark(j, id);
                    self.queue.push(j as u32);
                }
            }
        }
        self.clusters.push(ClusterInfo { color, touch, seed: start as u32 });
        touch
    }
}

fn expect_box(region: &Region) -> Result<()> {
    match region.shape() {
        Shape::Box { .. } => Ok(()),
        s => Err(Error::RegionKind { expected: "box", got: s.to_string() }),
    }
}

fn expect_annular(region: &Region) -> Result<()> {
    if region.shape().is_annular() {
        Ok(())
    } else {
        Err(Error::RegionKind { expected: "annulus or half-annulus", got: region.shape().to_string() })
    }
}

/// Left-right black (open) crossing of a box.
pub fn crossing_lr(x: &Configuration, region: &Region) -> Result<bool> {
    expect_box(region)?;
    x.check_region(region)?;
    Ok(crossing_lr_with(x, region, &mut Scratch::new()))
}

pub(crate) fn crossing_lr_with(x: &Configuration, region: &Region, s: &mut Scratch) -> bool {
    s.begin(region.len());
    let adj = region.adjacency(Color::Black);
    let fl = region.flags();
    s.queue.clear();
    for &c in region.left() {
        let i = c.get();
        if x.bit(i) {
            if fl[i] & flags::RIGHT != 0 {
                return true;
            }
            s.mark(i, 0);
            s.queue.push(i as u32);
        }
    }
    let mut head = 0;
    while head < s.queue.len() {
        let i = s.queue[head] as usize;
        head += 1;
        for &j in adj.of(i) {
            let j = j.get();
            if !s.seen(j) && x.bit(j) {
                if fl[j] & flags::RIGHT != 0 {
                    return true;
                }
                s.mark(j, 0);
                s.queue.push(j as u32);
            }
        }
    }
    false
}

/// Top-bottom white (closed, dual-open on Z^2) crossing of a box.
pub fn crossing_tb_white(x: &Configuration, region: &Region) -> Result<bool> {
    expect_box(region)?;
    x.check_region(region)?;
    let mut s = Scratch::new();
    s.begin(region.len());
    for &c in region.bottom() {
        let i = c.get();
        if !x.bit(i) && !s.seen(i) && s.flood(region, x, i, flags::TOP | flags::BOTTOM) & flags::TOP != 0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Arm event on an annulus or half-annulus, with the small-scale conventions:
/// the event is certain when `n < j`, and the inner radius is raised to `j` when `m < j <= n`.
pub fn arm_event(x: &Configuration, region: &Region, arm: &ArmType) -> Result<bool> {
    expect_annular(region)?;
    x.check_region(region)?;
    let ev = ArmEvent::new(region.kind(), region.shape(), arm.clone())?;
    let mut s = Scratch::new();
    if ev.effective.shape() == region.shape() {
        return Ok(ev.eval(x, &mut s));
    }
    match &ev.mode {
        ArmMode::Certain => Ok(true),
        ArmMode::Detect => {
            let map = ev.effective.map_into(region)?;
            let mut sub = Configuration::zeros(&ev.effective);
            for (i, &j) in map.iter().enumerate() {
                sub.set_bit(i, x.get(j));
            }
            Ok(ev.eval(&sub, &mut s))
        }
    }
}

/// Arm detection on exactly the given region (no scale conventions).
pub fn arm_event_raw(x: &Configuration, region: &Region, arm: &ArmType, s: &mut Scratch) -> Result<bool> {
    expect_annular(region)?;
    x.check_region(region)?;
    if arm.half_plane() != region.shape().is_half() {
        return Err(param(format!("arm type {arm} does not match {}", region.shape())));
    }
    Ok(detect_arms(x, region, arm, s))
}

fn detect_arms(x: &Configuration, region: &Region, arm: &ArmType, s: &mut Scratch) -> bool {
    let half = arm.half_plane();
    let k = arm.max_run();
    let single = arm.sigma().iter().all(|&b| b == arm.sigma()[0]);
    s.begin(region.len());
    let fl = region.flags();
    let want_black = arm.has_color(true);
    let want_white = arm.has_color(false);
    let attaches = |i: usize, black: bool, black_only: bool| {
        if black {
            want_black && fl[i] & flags::INNER != 0
        } else {
            want_white && !black_only && fl[i] & flags::INNER_W != 0
        }
    };

    // One colour, one arm: any crossing cluster will do.
    if single && arm.j() == 1 {
        let color = arm.sigma()[0];
        let outer = flags::outer_for(color);
        for slot in region.inner_slots() {
            for &c in &slot.cells {
                let i = c.get();
                if x.bit(i) == color
                    && attaches(i, color, slot.black_only)
                    && !s.seen(i)
                    && s.flood(region, x, i, outer) & outer != 0
                {
                    return true;
                }
            }
        }
        return false;
    }

    s.seq.clear();
    for slot in region.inner_slots() {
        for &c in &slot.cells {
            let i = c.get();
            let col = x.bit(i);
            if !attaches(i, col, slot.black_only) {
                continue;
            }
            if !s.seen(i) {
                s.flood(region, x, i, 0);
            }
            let id = s.label[i];
            if s.clusters[id as usize].touch & flags::outer_for(col) == 0 {
                continue;
            }
            if s.seq.last() != Some(&id) {
                s.seq.push(id);
            }
        }
    }
    if !half {
        while s.seq.len() > 1 && s.seq.first() == s.seq.last() {
            s.seq.pop();
        }
    }
    if k == 1 && s.seq.len() < arm.j() {
        return false;
    }
    let contains = |word: &[bool]| {
        if half {
            is_subsequence(arm.sigma(), word)
        } else {
            is_cyclic_subsequence(arm.sigma(), word)
        }
    };
    let mut word = std::mem::take(&mut s.word);
    word.clear();
    word.extend(s.seq.iter().map(|&id| s.clusters[id as usize].color));
    let mut found = contains(&word);
    if !found && k > 1 {
        // Some clusters may carry several disjoint arms of a repeated colour.
        let runs = [arm.max_run_of(false), arm.max_run_of(true)];
        word.clear();
        for idx in 0..s.seq.len() {
            let info = s.clusters[s.seq[idx] as usize];
            let run = runs[info.color as usize];
            let cap = if run > 1 { cluster_capacity(region, x, s, info, run) } else { 1 };
            word.extend(std::iter::repeat_n(info.color, cap));
        }
        found = contains(&word);
    }
    s.word = word;
    found
}

fn is_subsequence(needle: &[bool], hay: &[bool]) -> bool {
    let mut it = needle.iter().peekable();
    for &h in hay {
        match it.peek() {
            Some(&&n) if n == h => {
                it.next();
            }
            None => return true,
            _ => {}
        }
    }
    it.peek().is_none()
}

fn is_cyclic_subsequence(needle: &[bool], hay: &[bool]) -> bool {
    let l = hay.len();
    if needle.len() > l {
        return false;
    }
    (0..l).any(|r| {
        let mut k = 0;
        for d in 0..l {
            if k < needle.len() && hay[(r + d) % l] == needle[k] {
                k += 1;
            }
        }
        k == needle.len()
    })
}

/// Number of vertex-disjoint inner-to-outer paths inside one labelled cluster, capped at `cap`.
fn cluster_capacity(region: &Region, x: &Configuration, s: &mut Scratch, info: ClusterInfo, cap: usize) -> usize {
    // Collect cluster cells (the flood already labelled them).
    let n = region.len();
    if s.visit.len() < n {
        s.visit.resize(n, 0);
        s.local.resize(n, 0);
    }
    s.visit_epoch = s.visit_epoch.wrapping_add(1);
    if s.visit_epoch == 0 {
        s.visit.iter_mut().for_each(|v| *v = 0);
        s.visit_epoch = 1;
    }
    let ep = s.visit_epoch;
    let id = s.label[info.seed as usize];
    let mut cells = std::mem::take(&mut s.cells);
    cells.clear();
    let adj = region.adjacency(Color::from_bit(info.color));
    let seed = info.seed as usize;
    s.visit[seed] = ep;
    s.local[seed] = 0;
    cells.push(seed);
    let mut head = 0;
    while head < cells.len() {
        let i = cells[head];
        head += 1;
        for &j in adj.of(i) {
            let j = j.get();
            if x.bit(j) == info.color && s.seen(j) && s.label[j] == id && s.visit[j] != ep {
                s.visit[j] = ep;
                s.local[j] = cells.len() as u32;
                cells.push(j);
            }
        }
    }
    let fl = region.flags();
    let (inner, outer) = (flags::inner_for(info.color), flags::outer_for(info.color));
    let mut g = FlowGraph::new(2 * cells.len() + 2);
    let (src, snk) = (2 * cells.len(), 2 * cells.len() + 1);
    for (v, &i) in cells.iter().enumerate() {
        g.add(2 * v, 2 * v + 1);
        if fl[i] & inner != 0 {
            g.add(src, 2 * v);
        }
        if fl[i] & outer != 0 {
            g.add(2 * v + 1, snk);
        }
        for &j in adj.of(i) {
            let j = j.get();
            if s.visit[j] == ep {
                g.add(2 * v + 1, 2 * s.local[j] as usize);
            }
        }
    }
    s.cells = cells;
    g.max_flow(src, snk, cap)
}

/// Unit-capacity flow network (Edmonds–Karp).
struct FlowGraph {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u8>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        FlowGraph { head: vec![usize::MAX; n], next: Vec::new(), to: Vec::new(), cap: Vec::new() }
    }

    fn add(&mut self, a: usize, b: usize) {
        for (u, v, c) in [(a, b, 1u8), (b, a, 0u8)] {
            self.to.push(v);
            self.cap.push(c);
            self.next.push(self.head[u]);
            self.head[u] = self.to.len() - 1;
        }
    }

    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let n = self.head.len();
        let mut flow = 0;
        while flow < limit {
            let mut via = vec![usize::MAX; n];
            let mut queue = std::collections::VecDeque::from([s]);
            let mut reached = false;
            via[s] = usize::MAX - 1;
            while let Some(u) = queue.pop_front() {
                let mut e = self.head[u];
                while e != usize::MAX {
                    let v = self.to[e];
                    if self.cap[e] > 0 && via[v] == usize::MAX {
                        via[v] = e;
                        if v == t {
                            reached = true;
                            break;
                        }
                        queue.push_back(v);
                    }
                    e = self.next[e];
                }
                if reached {
                    break;
                }
            }
            if !reached {
                break;
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                v = self.to[e ^ 1];
            }
            flow += 1;
        }
        flow
    }
}

/// `true` iff flipping cell `i` changes `f`.
pub fn is_pivotal(x: &Configuration, i: CellIndex, f: impl Fn(&Configuration) -> bool) -> Result<bool> {
    let y = x.flip(i)?;
    Ok(f(x) != f(&y))
}

/// A Boolean function of the configuration on a fixed region.
pub trait Event: Send + Sync {
    /// Region on which configurations must be sampled.
    fn region(&self) -> &Region;

    fn eval(&self, x: &Configuration, scratch: &mut Scratch) -> bool;

    /// Short label used in result rows.
    fn label(&self) -> String;

    fn is_monotone(&self) -> bool {
        false
    }

    /// Whether the event contains its counterparts at larger outer scales.
    /// Ladders may only exit early after events that nest.
    fn nests(&self) -> bool {
        true
    }
}

/// The left-right crossing indicator of a box.
#[derive(Clone, Debug)]
pub struct Crossing {
    region: Region,
}

impl Crossing {
    pub fn new(kind: LatticeKind, n: u32) -> Result<Self> {
        Ok(Crossing { region: build_region(kind, Shape::Box { n })? })
    }

    /// Marks every pivotal cell of `x`; returns the crossing value.
    pub fn pivotal_mask(&self, x: &Configuration, s: &mut Scratch, out: &mut Vec<bool>) -> bool {
        match self.region.kind() {
            LatticeKind::TriangularSite => tri_pivotal_mask(&self.region, x, s, out),
            LatticeKind::SquareBond => rescan_pivotal_mask(&self.region, x, s, out),
        }
    }
}

impl Event for Crossing {
    fn region(&self) -> &Region {
        &self.region
    }

    fn eval(&self, x: &Configuration, scratch: &mut Scratch) -> bool {
        crossing_lr_with(x, &self.region, scratch)
    }

    fn label(&self) -> String {
        "crossing".into()
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Pivotality on the triangular lattice from one labelling of each colour.
///
/// A white cell is pivotal iff the black clusters around it, together with the
/// cell itself, touch both sides while no crossing exists; a black cell is pivotal
/// iff a crossing exists and the white clusters around it, with the cell itself,
/// touch top and bottom (the box has no left-right black crossing exactly when it
/// has a top-bottom white one).
fn tri_pivotal_mask(region: &Region, x: &Configuration, s: &mut Scratch, out: &mut Vec<bool>) -> bool {
    let n = region.len();
    out.clear();
    out.resize(n, false);
    s.begin(n);
    for i in 0..n {
        if !s.seen(i) {
            s.flood(region, x, i, 0);
        }
    }
    let fl = region.flags();
    let lr = flags::LEFT | flags::RIGHT;
    let tb = flags::TOP | flags::BOTTOM;
    let crossing = s.clusters.iter().any(|c| c.color && c.touch & lr == lr);
    let adj = region.adjacency(Color::Black);
    for i in 0..n {
        let black = x.bit(i);
        if black != crossing {
            continue;
        }
        let (need, opposite) = if black { (tb, false) } else { (lr, true) };
        let mut touch = fl[i];
        for &j in adj.of(i) {
            let j = j.get();
            if x.bit(j) == opposite {
                touch |= s.clusters[s.label[j] as usize].touch;
            }
        }
        out[i] = touch & need == need;
    }
    crossing
}

fn rescan_pivotal_mask(region: &Region, x: &Configuration, s: &mut Scratch, out: &mut Vec<bool>) -> bool {
    out.clear();
    out.resize(region.len(), false);
    let base = crossing_lr_with(x, region, s);
    let mut y = x.clone();
    for (i, o) in out.iter_mut().enumerate() {
        y.set_bit(i, !x.bit(i));
        *o = crossing_lr_with(&y, region, s) != base;
        y.set_bit(i, x.bit(i));
    }
    base
}

#[derive(Clone, Debug)]
enum ArmMode {
    Certain,
    Detect,
}

/// Arm event with the small-scale conventions resolved at construction.
#[derive(Clone, Debug)]
pub struct ArmEvent {
    arm: ArmType,
    declared: Shape,
    effective: Region,
    mode: ArmMode,
}

impl ArmEvent {
    /// `shape` must be an annulus (plane arm types) or a half-annulus (half-plane types).
    pub fn new(kind: LatticeKind, shape: Shape, arm: ArmType) -> Result<Self> {
        let shape = shape.validate()?;
        let (m, n) = match shape {
            Shape::Annulus { m, n } if !arm.half_plane() => (m, n),
            Shape::HalfAnnulus { m, n } if arm.half_plane() => (m, n),
            s => {
                return Err(Error::RegionKind {
                    expected: if arm.half_plane() { "half_annulus" } else { "annulus" },
                    got: s.to_string(),
                })
            }
        };
        let j = arm.j() as u32;
        let (mode, eff) = if n < j {
            (ArmMode::Certain, shape)
        } else if m < j {
            let eff = if arm.half_plane() { Shape::HalfAnnulus { m: j, n } } else { Shape::Annulus { m: j, n } };
            (ArmMode::Detect, eff)
        } else {
            (ArmMode::Detect, shape)
        };
        Ok(ArmEvent { arm, declared: shape, effective: build_region(kind, eff)?, mode })
    }

    pub fn arm(&self) -> &ArmType {
        &self.arm
    }

    pub fn declared(&self) -> Shape {
        self.declared
    }

    /// `true` when the conventions make the event certain at this scale.
    pub fn is_certain(&self) -> bool {
        matches!(self.mode, ArmMode::Certain)
    }
}

impl Event for ArmEvent {
    fn region(&self) -> &Region {
        &self.effective
    }

    fn eval(&self, x: &Configuration, scratch: &mut Scratch) -> bool {
        match self.mode {
            ArmMode::Certain => true,
            ArmMode::Detect => detect_arms(x, &self.effective, &self.arm, scratch),
        }
    }

    /// The degenerate annulus `m = n` (after raising the inner radius) reads the
    /// arms off a single ring and does not contain the event at larger `n`.
    fn nests(&self) -> bool {
        match self.effective.shape() {
            Shape::Annulus { m, n } | Shape::HalfAnnulus { m, n } => m < n || self.is_certain(),
            _ => true,
        }
    }

    fn label(&self) -> String {
        self.arm.to_string()
    }

    fn is_monotone(&self) -> bool {
        self.arm.sigma().iter().all(|&b| b) || self.is_certain()
    }
}

/// Constant event, used for degenerate checks.
#[derive(Clone, Debug)]
pub struct ConstantEvent {
    region: Region,
    value: bool,
}

impl ConstantEvent {
    pub fn new(region: Region, value: bool) -> Self {
        ConstantEvent { region, value }
    }
}

impl Event for ConstantEvent {
    fn region(&self) -> &Region {
        &self.region
    }

    fn eval(&self, _: &Configuration, _: &mut Scratch) -> bool {
        self.value
    }

    fn label(&self) -> String {
        format!("const{}", self.value as u8)
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Event given by a closure.
pub struct FnEvent<F> {
    region: Region,
    name: String,
    f: F,
}

impl<F: Fn(&Configuration) -> bool + Send + Sync> FnEvent<F> {
    pub fn new(region: Region, name: impl Into<String>, f: F) -> Self {
        FnEvent { region, name: name.into(), f }
    }
}

impl<F: Fn(&Configuration) -> bool + Send + Sync> Event for FnEvent<F> {
    fn region(&self) -> &Region {
        &self.region
    }

    fn eval(&self, x: &Configuration, _: &mut Scratch) -> bool {
        (self.f)(x)
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}
