//! Plane trees stored in breadth-first order, and their statistics.

use crate::error::{Error, Result};

const NO_PARENT: u32 = u32::MAX;

/// A rooted ordered tree. Vertex ids are BFS ranks, so the children of a
/// vertex are contiguous and the tree is determined by its child counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    child_count: Vec<u32>,
    first_child: Vec<u32>,
    parent: Vec<u32>,
    depth: Vec<u32>,
}

/// The tree seen from its (lexicographically least) vertex of maximal
/// degree v': the spine ⟦∅, v'⟦, the subtrees above v''s children, and the
/// forests hanging left and right of the spine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxDecomposition {
    pub vertex: usize,
    pub max_degree: usize,
    pub spine_depth: usize,
    pub subtree_heights: Vec<usize>,
    /// `None` when the forest is empty.
    pub left_forest_height: Option<usize>,
    pub right_forest_height: Option<usize>,
}

impl PlaneTree {
    /// Builds from child counts listed in BFS order.
    pub fn from_bfs_degrees(deg: &[u32]) -> Result<Self> {
        check_excursion(deg)?;
        let n = deg.len();
        let mut first_child = vec![0u32; n];
        let mut parent = vec![NO_PARENT; n];
        let mut depth = vec![0u32; n];
        let mut next = 1u32;
        for v in 0..n {
            first_child[v] = next;
            for c in next..next + deg[v] {
                parent[c as usize] = v as u32;
                depth[c as usize] = depth[v] + 1;
            }
            next += deg[v];
        }
        Ok(PlaneTree {
            child_count: deg.to_vec(),
            first_child,
            parent,
            depth,
        })
    }

    /// Builds from child counts listed in depth-first (lexicographic) order.
    pub fn from_lex_degrees(deg: &[u32]) -> Result<Self> {
        check_excursion(deg)?;
        let n = deg.len();
        // children of each DFS vertex, in left-to-right order
        let mut offset = vec![0usize; n + 1];
        for v in 0..n {
            offset[v + 1] = offset[v] + deg[v] as usize;
        }
        let mut children = vec![0u32; n.saturating_sub(1)];
        let mut fill = offset.clone();
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for v in 0..n as u32 {
            while let Some(&(_, 0)) = stack.last() {
                stack.pop();
            }
            if let Some(top) = stack.last_mut() {
                top.1 -= 1;
                let p = top.0 as usize;
                children[fill[p]] = v;
                fill[p] += 1;
            }
            stack.push((v, deg[v as usize]));
        }
        let mut bfs = Vec::with_capacity(n);
        let mut queue = std::collections::VecDeque::with_capacity(n);
        queue.push_back(0u32);
        while let Some(v) = queue.pop_front() {
            let v = v as usize;
            bfs.push(deg[v]);
            queue.extend(&children[offset[v]..offset[v + 1]]);
        }
        Self::from_bfs_degrees(&bfs)
    }

    pub fn len(&self) -> usize {
        self.child_count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.child_count.is_empty()
    }

    pub fn child_counts(&self) -> &[u32] {
        &self.child_count
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.child_count[v]
    }

    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        let f = self.first_child[v] as usize;
        f..f + self.child_count[v] as usize
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    /// Vertices in depth-first (lexicographic) order.
    pub fn lex_order(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children(v as usize).rev().map(|c| c as u32));
        }
        out
    }

    pub fn height(&self) -> usize {
        // BFS order is sorted by depth
        *self.depth.last().expect("nonempty") as usize
    }

    /// (width, generation sizes).
    pub fn width_profile(&self) -> (usize, Vec<usize>) {
        let mut profile = vec![0usize; self.height() + 1];
        for &d in &self.depth {
            profile[d as usize] += 1;
        }
        (*profile.iter().max().expect("nonempty"), profile)
    }

    pub fn width(&self) -> usize {
        self.width_profile().0
    }

    /// (Δ, v'): the maximal child count and the lexicographically least
    /// vertex attaining it.
    pub fn max_degree(&self) -> (usize, usize) {
        let delta = *self.child_count.iter().max().expect("nonempty");
        if self.child_count.iter().filter(|&&d| d == delta).count() == 1 {
            let v = self
                .child_count
                .iter()
                .position(|&d| d == delta)
                .expect("present");
            return (delta as usize, v);
        }
        let v = self
            .lex_order()
            .into_iter()
            .find(|&v| self.child_count[v as usize] == delta)
            .expect("present");
        (delta as usize, v as usize)
    }

    /// Height of the subtree rooted at every vertex.
    pub fn subtree_heights(&self) -> Vec<usize> {
        let mut h = vec![0usize; self.len()];
        for v in (1..self.len()).rev() {
            let p = self.parent[v] as usize;
            h[p] = h[p].max(h[v] + 1);
        }
        h
    }

    pub fn decompose_at_max(&self) -> MaxDecomposition {
        let (delta, vp) = self.max_degree();
        let h = self.subtree_heights();
        let subtree_heights = self.children(vp).map(|c| h[c]).collect();
        let (mut left, mut right): (Option<usize>, Option<usize>) = (None, None);
        let mut child = vp;
        while let Some(u) = self.parent(child) {
            for c in self.children(u) {
                if c < child {
                    left = Some(left.map_or(h[c], |x| x.max(h[c])));
                } else if c > child {
                    right = Some(right.map_or(h[c], |x| x.max(h[c])));
                }
            }
            child = u;
        }
        MaxDecomposition {
            vertex: vp,
            max_degree: delta,
            spine_depth: self.depth(vp),
            subtree_heights,
            left_forest_height: left,
            right_forest_height: right,
        }
    }
}

impl MaxDecomposition {
    /// spine + 1 + max(subtree and forest heights): the edge from v' to its
    /// children is counted, so the bound holds for every tree.
    pub fn height_upper_bound(&self) -> usize {
        let m = self
            .subtree_heights
            .iter()
            .copied()
            .chain(self.left_forest_height)
            .chain(self.right_forest_height)
            .max();
        match m {
            Some(m) => self.spine_depth + 1 + m,
            None => self.spine_depth,
        }
    }

    pub fn height_lower_bound(&self) -> usize {
        let above = self.subtree_heights.iter().max().map_or(0, |m| m + 1);
        self.spine_depth + above
    }
}

fn check_excursion(deg: &[u32]) -> Result<()> {
    if deg.is_empty() {
        return Err(Error::InvalidPath("empty tree".into()));
    }
    let mut s: i64 = 0;
    for (i, &d) in deg.iter().enumerate() {
        s += d as i64 - 1;
        let last = i + 1 == deg.len();
        if (!last && s < 0) || (last && s != -1) {
            return Err(Error::InvalidPath(format!(
                "child counts {deg:?} do not form an excursion"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Root with children 1,2,3; 1→11; 2→21,22; 22→221,222,223.
    pub(crate) fn figure1() -> PlaneTree {
        PlaneTree::from_bfs_degrees(&[3, 1, 2, 0, 0, 0, 3, 0, 0, 0]).unwrap()
    }

    fn star(k: u32) -> PlaneTree {
        let mut d = vec![k];
        d.extend(std::iter::repeat(0).take(k as usize));
        PlaneTree::from_bfs_degrees(&d).unwrap()
    }

    fn path(k: usize) -> PlaneTree {
        let mut d = vec![1; k];
        d.push(0);
        PlaneTree::from_bfs_degrees(&d).unwrap()
    }

    #[test]
    fn height_examples() {
        assert_eq!(star(0).height(), 0);
        assert_eq!(figure1().height(), 3);
        assert_eq!(path(6).height(), 6);
    }

    #[test]
    fn width_examples() {
        assert_eq!(star(0).width_profile(), (1, vec![1]));
        assert_eq!(figure1().width_profile(), (3, vec![1, 3, 3, 3]));
        assert_eq!(star(7).width_profile(), (7, vec![1, 7]));
    }

    #[test]
    fn max_degree_examples() {
        assert_eq!(star(5).max_degree(), (5, 0));
        assert_eq!(figure1().max_degree(), (3, 0));
        assert_eq!(path(4).max_degree(), (1, 0));
        let t = PlaneTree::from_lex_degrees(&[2, 1, 2, 0, 0, 2, 0, 0]).unwrap();
        let (d, v) = t.max_degree();
        assert_eq!(d, 2);
        assert_eq!(v, 0);
        let t = PlaneTree::from_lex_degrees(&[1, 2, 1, 3, 0, 0, 0, 3, 0, 0, 0]).unwrap();
        // a deeper vertex on the left beats a shallower one on the right
        let (d, v) = t.max_degree();
        assert_eq!(d, 3);
        assert_eq!(
            t.depth(v),
            3,
            "lex-least max vertex sits under the left branch"
        );
    }

    #[test]
    fn decomposition_examples() {
        let s = star(4).decompose_at_max();
        assert_eq!(
            (s.spine_depth, s.subtree_heights.clone()),
            (0, vec![0, 0, 0, 0])
        );
        assert_eq!((s.left_forest_height, s.right_forest_height), (None, None));

        let f = figure1().decompose_at_max();
        assert_eq!(f.spine_depth, 0);
        assert_eq!(f.subtree_heights, vec![1, 2, 0]);
        assert_eq!((f.left_forest_height, f.right_forest_height), (None, None));

        // root → a, root → leaf (right of a), a → four leaves
        let t = PlaneTree::from_bfs_degrees(&[2, 4, 0, 0, 0, 0, 0]).unwrap();
        let d = t.decompose_at_max();
        assert_eq!(d.spine_depth, 1);
        assert_eq!(d.subtree_heights, vec![0, 0, 0, 0]);
        assert_eq!(d.left_forest_height, None);
        assert_eq!(d.right_forest_height, Some(0));
    }

    #[test]
    fn figure1_needs_the_corrected_bound() {
        let t = figure1();
        let d = t.decompose_at_max();
        let m = *d.subtree_heights.iter().max().unwrap();
        assert!(t.height() > d.spine_depth + m);
        assert!(t.height() <= d.height_upper_bound());
    }

    #[test]
    fn rejects_non_excursions() {
        assert!(PlaneTree::from_bfs_degrees(&[0, 1]).is_err());
        assert!(PlaneTree::from_bfs_degrees(&[2, 0]).is_err());
        assert!(PlaneTree::from_lex_degrees(&[]).is_err());
    }
}
