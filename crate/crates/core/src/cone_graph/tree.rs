//! Edge bound for trees with a marked set of leaves, checked by enumerating labelled trees.

/// Decodes a Prüfer sequence over `n = seq.len() + 2` labels into an edge list.
pub fn prufer_decode(seq: &[usize]) -> Vec<(usize, usize)> {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|v| degree[*v] == 1).expect("a leaf exists");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|v| degree[*v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Summary of checking `|E| <= 2k - 3`, where `k` counts vertices of valence 1 or 2.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TreeBoundReport {
    pub max_vertices: usize,
    pub trees: u64,
    pub violations: u64,
    /// Trees with `|E| = 2k - 3`.
    pub tight: u64,
    /// Tight trees on two vertices (a single edge).
    pub tight_edge: u64,
    /// Tight trees with three leaves around one center.
    pub tight_star: u64,
}

impl TreeBoundReport {
    fn merge(mut self, o: TreeBoundReport) -> TreeBoundReport {
        self.trees += o.trees;
        self.violations += o.violations;
        self.tight += o.tight;
        self.tight_edge += o.tight_edge;
        self.tight_star += o.tight_star;
        self
    }
}

/// Vertex degrees of the tree with Prüfer sequence `seq` on `n` labels.
pub fn prufer_degrees(seq: &[usize], n: usize) -> Vec<usize> {
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    degree
}

fn check_tree(degree: &[usize], rep: &mut TreeBoundReport) {
    let n = degree.len();
    let e = n as i64 - 1;
    let k = degree.iter().filter(|d| **d <= 2).count() as i64;
    rep.trees += 1;
    if k < 2 {
        return;
    }
    if e > 2 * k - 3 {
        rep.violations += 1;
    } else if e == 2 * k - 3 {
        rep.tight += 1;
        if n == 2 {
            rep.tight_edge += 1;
        }
        if n == 4 && degree.iter().filter(|d| **d == 1).count() == 3 {
            rep.tight_star += 1;
        }
    }
}

/// Enumerates every labelled tree on `2..=max_vertices` vertices through its Prüfer sequence
/// and checks `|E| <= 2k - 3` for `k >= 2`.
pub fn tree_edge_bound_oracle(max_vertices: usize) -> TreeBoundReport {
    use rayon::prelude::*;
    let mut rep = TreeBoundReport { max_vertices, ..Default::default() };
    for n in 2..=max_vertices {
        let part = if n < 4 {
            enumerate(n, None)
        } else {
            (0..n)
                .into_par_iter()
                .map(|first| enumerate(n, Some(first)))
                .reduce(TreeBoundReport::default, TreeBoundReport::merge)
        };
        rep = rep.merge(part);
    }
    rep
}

fn enumerate(n: usize, first: Option<usize>) -> TreeBoundReport {
    let mut rep = TreeBoundReport::default();
    let mut seq = vec![0usize; n - 2];
    let fixed = first.is_some() as usize;
    if let Some(f) = first {
        seq[0] = f;
    }
    let mut degree = vec![0usize; n];
    loop {
        degree.iter_mut().for_each(|d| *d = 1);
        for &x in &seq {
            degree[x] += 1;
        }
        check_tree(&degree, &mut rep);
        if !next_sequence(&mut seq[fixed..], n) {
            break;
        }
    }
    rep
}

fn next_sequence(seq: &mut [usize], n: usize) -> bool {
    for x in seq.iter_mut().rev() {
        *x += 1;
        if *x < n {
            return true;
        }
        *x = 0;
    }
    false
}
