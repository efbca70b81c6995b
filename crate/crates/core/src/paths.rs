//! Lattice paths with increments ≥ −1, the lex/BFS tree codecs and the
//! Vervaat transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::PlaneTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    /// depth-first (lexicographic); the path is the Łukasiewicz path
    Lex,
    /// breadth-first; the path is the queue-length process
    Bfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// ends at −1 and stays ≥ 0 before
    Excursion,
    /// ends at −1
    Bridge,
    Walk,
    Invalid,
}

/// Values s_0..s_n; the length of the path is n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePath {
    values: Vec<i64>,
}

pub fn classify(values: &[i64]) -> PathKind {
    if values.first() != Some(&0) || values.windows(2).any(|w| w[1] - w[0] < -1) {
        return PathKind::Invalid;
    }
    let n = values.len() - 1;
    if n == 0 || values[n] != -1 {
        return PathKind::Walk;
    }
    if values[1..n].iter().all(|&v| v >= 0) {
        PathKind::Excursion
    } else {
        PathKind::Bridge
    }
}

impl LatticePath {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if classify(&values) == PathKind::Invalid {
            return Err(Error::InvalidPath(format!("{values:?}")));
        }
        Ok(LatticePath { values })
    }

    /// Path with the given increments, starting at 0.
    pub fn from_increments(inc: &[i64]) -> Result<Self> {
        let mut values = Vec::with_capacity(inc.len() + 1);
        let mut s = 0i64;
        values.push(0);
        for &x in inc {
            s += x;
            values.push(s);
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn increments(&self) -> Vec<i64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn kind(&self) -> PathKind {
        classify(&self.values)
    }

    pub fn max(&self) -> i64 {
        *self.values.iter().max().expect("nonempty")
    }

    pub fn to_csv_row(&self) -> String {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        parts.join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let values = row
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::InvalidPath(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}

/// W_0 = 0, W_{k+1} = W_k + deg(u_k) − 1 along the chosen vertex order.
pub fn encode(t: &PlaneTree, order: Order) -> LatticePath {
    let degrees: Vec<u32> = match order {
        Order::Bfs => t.child_counts().to_vec(),
        Order::Lex => t
            .lex_order()
            .iter()
            .map(|&v| t.degree(v as usize))
            .collect(),
    };
    let mut values = Vec::with_capacity(degrees.len() + 1);
    let mut s = 0i64;
    values.push(0);
    for d in degrees {
        s += d as i64 - 1;
        values.push(s);
    }
    LatticePath { values }
}

pub fn decode(p: &LatticePath, order: Order) -> Result<PlaneTree> {
    if p.kind() != PathKind::Excursion {
        return Err(Error::InvalidPath("decode needs an excursion".into()));
    }
    let degrees: Vec<u32> = p
        .values
        .windows(2)
        .map(|w| (w[1] - w[0] + 1) as u32)
        .collect();
    match order {
        Order::Bfs => PlaneTree::from_bfs_degrees(&degrees),
        Order::Lex => PlaneTree::from_lex_degrees(&degrees),
    }
}

/// Index of the first minimum of s_0..s_n.
pub fn first_argmin(values: &[i64]) -> usize {
    let mut m = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[m] {
            m = i;
        }
    }
    m
}

/// Rotates the bridge's increments so they start just after its first
/// minimum; the result is the unique excursion among the rotations.
pub fn vervaat(b: &LatticePath) -> Result<(LatticePath, usize)> {
    match b.kind() {
        PathKind::Excursion | PathKind::Bridge => {}
        _ => return Err(Error::InvalidPath("vervaat needs a bridge".into())),
    }
    let m = first_argmin(&b.values);
    let inc = b.increments();
    let n = inc.len();
    let mut values = Vec::with_capacity(n + 1);
    let mut s = 0i64;
    values.push(0);
    for i in 0..n {
        s += inc[(m + i) % n];
        values.push(s);
    }
    Ok((LatticePath { values }, m))
}

/// max_i p_i, an upper bound on the width of the tree a BFS path encodes.
pub fn width_upper(p: &LatticePath) -> i64 {
    p.max()
}

/// Every excursion of length n, i.e. every plane tree with n vertices, in
/// lexicographic order of the degree sequence.
pub fn all_excursions(n: usize) -> Vec<LatticePath> {
    let mut out = Vec::new();
    let mut deg = Vec::with_capacity(n);
    fn rec(n: usize, deg: &mut Vec<u32>, s: i64, out: &mut Vec<LatticePath>) {
        let i = deg.len();
        if i == n {
            if s == -1 {
                let inc: Vec<i64> = deg.iter().map(|&d| d as i64 - 1).collect();
                out.push(LatticePath::from_increments(&inc).expect("valid"));
            }
            return;
        }
        // s ≥ 0 before the last step; the walk must be able to come down to −1
        let remaining = (n - i) as i64;
        for d in 0..=(remaining - 1 - s).max(0) as u32 {
            let ns = s + d as i64 - 1;
            if i + 1 < n && ns < 0 {
                continue;
            }
            if ns + 1 > remaining - 1 {
                break;
            }
            deg.push(d);
            rec(n, deg, ns, out);
            deg.pop();
        }
    }
    if n > 0 {
        rec(n, &mut deg, 0, &mut out);
    }
    out
}
