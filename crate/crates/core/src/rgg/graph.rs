use serde::{Deserialize, Serialize};

/// Simple undirected graph on `0..n` stored as packed bit rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Graph { n, words, bits: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Adds `{i, j}`; self-loops are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// Edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    /// Every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// First edge of `self` missing from `other`.
    pub fn first_missing_edge(&self, other: &Graph) -> Option<(usize, usize)> {
        self.edges().find(|&(i, j)| !other.has_edge(i, j))
    }

    /// Component sizes in decreasing order.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n);
        for (i, j) in self.edges() {
            uf.union(i, j);
        }
        let roots: Vec<usize> = (0..self.n).filter(|&v| uf.find(v) == v).collect();
        let mut sizes: Vec<usize> = roots.into_iter().map(|v| uf.size[v]).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.component_sizes()[0] == self.n
    }

    /// Whether the graph contains a clique on `k` vertices.
    pub fn has_clique(&self, k: usize) -> bool {
        if k <= 1 {
            return k == 0 || self.n >= 1;
        }
        let cands: Vec<usize> = (0..self.n).filter(|&v| self.degree(v) >= k - 1).collect();
        self.extend_clique(&cands, 0, k)
    }

    fn extend_clique(&self, cands: &[usize], size: usize, k: usize) -> bool {
        if size == k {
            return true;
        }
        if size + cands.len() < k {
            return false;
        }
        for (idx, &v) in cands.iter().enumerate() {
            let next: Vec<usize> = cands[idx + 1..].iter().copied().filter(|&u| self.has_edge(v, u)).collect();
            if self.extend_clique(&next, size + 1, k) {
                return true;
            }
        }
        false
    }
}

/// Union by size with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}
