//! Bounding-interval hierarchy over curve segments.

use crate::geom::{ray_hit_dir, Aabb, Point, Segment};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    /// Range `start..start + count` of `order`.
    Leaf {
        start: u32,
        count: u32,
    },
    Inner {
        left: u32,
        right: u32,
    },
}

/// Spatial index handle. Built once per curve and shared read-only.
#[derive(Debug, Clone)]
pub struct SegmentIndex {
    nodes: Vec<Node>,
    order: Vec<u32>,
    n_segments: usize,
}

impl SegmentIndex {
    pub fn build(segments: &[Segment]) -> Self {
        let mut order: Vec<u32> = (0..segments.len() as u32).collect();
        let centers: Vec<Point> = segments.iter().map(|s| s.midpoint()).collect();
        let mut nodes = Vec::with_capacity(2 * segments.len() / LEAF_SIZE + 1);
        if !segments.is_empty() {
            build_rec(segments, &centers, &mut order, 0, &mut nodes);
        }
        SegmentIndex {
            nodes,
            order,
            n_segments: segments.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.n_segments
    }

    pub fn is_empty(&self) -> bool {
        self.n_segments == 0
    }

    /// Smallest hit parameter of the ray `o + t d` over all segments, with
    /// node pruning by entry distance.
    pub(crate) fn min_hit(&self, segments: &[Segment], o: Point, d: Point) -> Option<f64> {
        let inv = Point::new(1.0 / d.x, 1.0 / d.y);
        let mut best = f64::INFINITY;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        if !self.nodes.is_empty() {
            stack.push(0);
        }
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let Some((t0, _)) = node.bounds.ray_interval(o, inv) else {
                continue;
            };
            if t0 > best {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &si in &self.order[start as usize..(start + count) as usize] {
                        if let Some(t) = ray_hit_dir(o, d, &segments[si as usize]) {
                            if t < best {
                                best = t;
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    // Visit the nearer child first.
                    let tl = self.nodes[left as usize]
                        .bounds
                        .ray_interval(o, inv)
                        .map(|r| r.0);
                    let tr = self.nodes[right as usize]
                        .bounds
                        .ray_interval(o, inv)
                        .map(|r| r.0);
                    match (tl, tr) {
                        (Some(a), Some(b)) if a <= b => {
                            stack.push(right);
                            stack.push(left);
                        }
                        (Some(_), Some(_)) => {
                            stack.push(left);
                            stack.push(right);
                        }
                        (Some(_), None) => stack.push(left),
                        (None, Some(_)) => stack.push(right),
                        (None, None) => {}
                    }
                }
            }
        }
        best.is_finite().then_some(best)
    }

    /// Lowest segment index whose hit parameter is at most `limit`.
    pub(crate) fn lowest_hit_within(
        &self,
        segments: &[Segment],
        o: Point,
        d: Point,
        limit: f64,
    ) -> Option<(usize, f64)> {
        let inv = Point::new(1.0 / d.x, 1.0 / d.y);
        let mut best: Option<(usize, f64)> = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        if !self.nodes.is_empty() {
            stack.push(0);
        }
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            match node.bounds.ray_interval(o, inv) {
                Some((t0, _)) if t0 <= limit => {}
                _ => continue,
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &si in &self.order[start as usize..(start + count) as usize] {
                        let si = si as usize;
                        if best.is_some_and(|(b, _)| b <= si) {
                            continue;
                        }
                        if let Some(t) = ray_hit_dir(o, d, &segments[si]) {
                            if t <= limit {
                                best = Some((si, t));
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        best
    }

    /// Distance from `p` to the nearest segment.
    pub fn nearest_distance(&self, segments: &[Segment], p: Point) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        if !self.nodes.is_empty() {
            stack.push(0);
        }
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds.distance_to(p) >= best {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &si in &self.order[start as usize..(start + count) as usize] {
                        best = best.min(segments[si as usize].distance_to(p));
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left as usize].bounds.distance_to(p);
                    let dr = self.nodes[right as usize].bounds.distance_to(p);
                    if dl <= dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best
    }

    /// Whether some segment lies within distance `r` of `p`.
    pub fn any_within(&self, segments: &[Segment], p: Point, r: f64) -> bool {
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        if !self.nodes.is_empty() {
            stack.push(0);
        }
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds.distance_to(p) > r {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    let range = start as usize..(start + count) as usize;
                    if self.order[range]
                        .iter()
                        .any(|&si| segments[si as usize].distance_to(p) <= r)
                    {
                        return true;
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        false
    }

    /// Calls `f` with the index of every segment stored in a leaf whose box
    /// overlaps `query` (expanded by `pad`). This is a superset of the
    /// segments whose own boxes overlap; callers filter exactly.
    pub fn for_each_overlapping(&self, query: &Aabb, pad: f64, mut f: impl FnMut(usize)) {
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        if !self.nodes.is_empty() {
            stack.push(0);
        }
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.bounds.overlaps(query, pad) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &si in &self.order[start as usize..(start + count) as usize] {
                        f(si as usize);
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
    }
}

fn build_rec(
    segments: &[Segment],
    centers: &[Point],
    order: &mut [u32],
    offset: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let bounds = order
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.union(&segments[i as usize].bounds()));
    let me = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node {
            bounds,
            kind: NodeKind::Leaf {
                start: offset as u32,
                count: order.len() as u32,
            },
        });
        return me;
    }
    nodes.push(Node {
        bounds,
        kind: NodeKind::Leaf { start: 0, count: 0 },
    });
    let cb = order
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.include(centers[i as usize]));
    let ext = cb.extent();
    let key = |i: &u32| {
        let c = centers[*i as usize];
        if ext.x >= ext.y {
            c.x
        } else {
            c.y
        }
    };
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_rec(segments, centers, lo, offset, nodes);
    let right = build_rec(segments, centers, hi, offset + mid, nodes);
    nodes[me as usize].kind = NodeKind::Inner { left, right };
    me
}
