//! Static 3D KD-tree used for collision lookups and nearest-neighbor queries.
//!
//! Built once per planning cycle with median splits on the axis of widest
//! spread. Radius queries use closed-ball semantics (`distance <= radius`),
//! and `nearest` breaks distance ties by the lowest point index.

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    // Point indices permuted so that every leaf owns a contiguous range.
    order: Vec<u32>,
    nodes: Vec<Node>,
    depth: usize,
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Squared Euclidean distance with the same operation order the tree uses.
/// Brute-force oracles should call this to compare sets exactly.
pub fn squared_distance(a: &Vec3, b: &Vec3) -> f64 {
    dist2(&[a.x, a.y, a.z], &[b.x, b.y, b.z])
}

/// Squared distance from `p` to the closed segment from `a` to `b`.
pub fn segment_distance2(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return squared_distance(p, a);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    squared_distance(p, &(a + ab * t))
}

impl KdTree {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        Self::from_points(cloud.points())
    }

    pub fn from_points(pts: &[Vec3]) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(i) = pts.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinitePoint(i));
        }
        let points: Vec<[f64; 3]> = pts.iter().map(|p| [p.x, p.y, p.z]).collect();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        let mut depth = 0;
        build_node(&points, &mut order, 0, &mut nodes, 0, &mut depth);
        Ok(Self {
            points,
            order,
            nodes,
            depth,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Depth of the deepest leaf (root alone has depth 0).
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn point(&self, index: usize) -> Vec3 {
        let p = self.points[index];
        Vec3::new(p[0], p[1], p[2])
    }

    /// Point indices in leaf order; identical input yields identical order.
    pub fn leaf_order(&self) -> &[u32] {
        &self.order
    }

    /// Indices of all points within `radius` of `center`, in traversal order.
    pub fn radius_query(&self, center: &Vec3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.radius_visit(center, radius, |i| {
            out.push(i);
            true
        });
        out
    }

    /// True if any point lies within `radius` of `center`. Stops at the first hit.
    pub fn any_within(&self, center: &Vec3, radius: f64) -> bool {
        let mut hit = false;
        self.radius_visit(center, radius, |_| {
            hit = true;
            false
        });
        hit
    }

    /// True if any point lies within `radius` of the segment from `a` to `b` (a capsule).
    pub fn any_within_segment(&self, a: &Vec3, b: &Vec3, radius: f64) -> bool {
        if !(radius >= 0.0) {
            return false;
        }
        let r2 = radius * radius;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            match self.nodes[id as usize] {
                Node::Leaf { start, end } => {
                    for &pi in &self.order[start as usize..end as usize] {
                        if segment_distance2(&self.point(pi as usize), a, b) <= r2 {
                            return true;
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let ax = axis as usize;
                    if a[ax].min(b[ax]) - radius <= value {
                        stack.push(left);
                    }
                    if a[ax].max(b[ax]) + radius >= value {
                        stack.push(right);
                    }
                }
            }
        }
        false
    }

    /// Calls `visit` for each point in the closed ball until it returns false.
    fn radius_visit(&self, center: &Vec3, radius: f64, mut visit: impl FnMut(usize) -> bool) {
        if !(radius >= 0.0) {
            return;
        }
        let q = [center.x, center.y, center.z];
        let r2 = radius * radius;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            match self.nodes[id as usize] {
                Node::Leaf { start, end } => {
                    for &pi in &self.order[start as usize..end as usize] {
                        if dist2(&self.points[pi as usize], &q) <= r2 && !visit(pi as usize) {
                            return;
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = q[axis as usize] - value;
                    let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                    if diff * diff <= r2 {
                        stack.push(far);
                    }
                    stack.push(near);
                }
            }
        }
    }

    /// Global nearest neighbor as `(index, distance)`; ties go to the lowest index.
    pub fn nearest(&self, query: &Vec3) -> (usize, f64) {
        let q = [query.x, query.y, query.z];
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, &q, &mut best);
        (best.0, best.1.sqrt())
    }

    fn nearest_rec(&self, id: u32, q: &[f64; 3], best: &mut (usize, f64)) {
        match self.nodes[id as usize] {
            Node::Leaf { start, end } => {
                for &pi in &self.order[start as usize..end as usize] {
                    let d = dist2(&self.points[pi as usize], q);
                    let pi = pi as usize;
                    if d < best.1 || (d == best.1 && pi < best.0) {
                        *best = (pi, d);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, q, best);
                // `<=` keeps equal-distance candidates with lower indices reachable.
                if diff * diff <= best.1 {
                    self.nearest_rec(far, q, best);
                }
            }
        }
    }
}

fn build_node(
    points: &[[f64; 3]],
    order: &mut [u32],
    offset: usize,
    nodes: &mut Vec<Node>,
    level: usize,
    depth: &mut usize,
) -> u32 {
    let id = nodes.len() as u32;
    *depth = (*depth).max(level);
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + order.len()) as u32,
        });
        return id;
    }
    let mut lo = [f64::MAX; 3];
    let mut hi = [f64::MIN; 3];
    for &i in order.iter() {
        let p = &points[i as usize];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
        .unwrap();
    if hi[axis] - lo[axis] == 0.0 {
        // All points coincide: one leaf holds the duplicates.
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + order.len()) as u32,
        });
        return id;
    }
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let value = points[order[mid] as usize][axis];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (l, r) = order.split_at_mut(mid);
    let left = build_node(points, l, offset, nodes, level + 1, depth);
    let right = build_node(points, r, offset + mid, nodes, level + 1, depth);
    nodes[id as usize] = Node::Split {
        axis: axis as u8,
        value,
        left,
        right,
    };
    id
}
