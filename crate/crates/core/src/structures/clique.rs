//! Exact maximum clique by branch and bound with a greedy colouring bound
//! (the MCQ scheme), on word bitsets.

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn empty(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64)] }
    }

    fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for i in 0..n {
            b.set(i);
        }
        b
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn first(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }
}

/// Simple undirected graph on `0..n` for clique search.
#[derive(Clone, Debug)]
pub struct CliqueGraph {
    n: usize,
    adj: Vec<Bits>,
}

impl CliqueGraph {
    pub fn new(n: usize) -> Self {
        Self { n, adj: vec![Bits::empty(n); n] }
    }

    pub fn from_predicate<F: FnMut(usize, usize) -> bool>(n: usize, mut adjacent: F) -> Self {
        let mut g = Self::new(n);
        for a in 0..n {
            for b in (a + 1)..n {
                if adjacent(a, b) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].set(b);
            self.adj[b].set(a);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].get(b)
    }

    pub fn complement(&self) -> Self {
        Self::from_predicate(self.n, |a, b| !self.has_edge(a, b))
    }

    /// Induced subgraph on `vertices`, relabelled to `0..vertices.len()`.
    pub fn induced(&self, vertices: &[usize]) -> Self {
        Self::from_predicate(vertices.len(), |a, b| self.has_edge(vertices[a], vertices[b]))
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &a)| vertices[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    pub fn is_independent(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &a)| vertices[i + 1..].iter().all(|&b| !self.has_edge(a, b)))
    }

    /// A maximum clique, sorted ascending. Among maximum cliques the search
    /// returns the first one found; the result is deterministic.
    pub fn max_clique(&self) -> Vec<usize> {
        if self.n == 0 {
            return Vec::new();
        }
        // Relabel by non-increasing degree so colouring bounds bite early.
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(self.adj[v].count()), v));
        let relabelled = CliqueGraph::from_predicate(self.n, |a, b| self.has_edge(order[a], order[b]));
        let mut search = Search { g: &relabelled, current: Vec::new(), best: vec![0] };
        search.expand(Bits::full(self.n));
        let mut clique: Vec<usize> = search.best.into_iter().map(|v| order[v]).collect();
        clique.sort_unstable();
        clique
    }

    pub fn max_independent_set(&self) -> Vec<usize> {
        self.complement().max_clique()
    }
}

struct Search<'a> {
    g: &'a CliqueGraph,
    current: Vec<usize>,
    best: Vec<usize>,
}

impl Search<'_> {
    /// Greedy sequential colouring of `candidates`; returns vertices in
    /// colouring order with the colour number of each.
    fn colour(&self, candidates: &Bits) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = candidates.clone();
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut q = uncoloured.clone();
            while let Some(v) = q.first() {
                q.clear(v);
                q.and_not_assign(&self.g.adj[v]);
                uncoloured.clear(v);
                order.push(v);
                colours.push(colour);
            }
        }
        (order, colours)
    }

    fn expand(&mut self, mut candidates: Bits) {
        let (order, colours) = self.colour(&candidates);
        for idx in (0..order.len()).rev() {
            if self.current.len() + colours[idx] <= self.best.len() {
                return;
            }
            let v = order[idx];
            self.current.push(v);
            let next = candidates.and(&self.g.adj[v]);
            if next.is_empty() {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            candidates.clear(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(g: &CliqueGraph) -> usize {
        let n = g.vertex_count();
        (0u32..1 << n)
            .filter(|&mask| {
                let vs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                g.is_clique(&vs)
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let n = rng.gen_range(1..=14);
            let p = rng.gen_range(0.1..0.9);
            let g = CliqueGraph::from_predicate(n, |_, _| rng.gen_bool(p));
            let c = g.max_clique();
            assert!(g.is_clique(&c));
            assert_eq!(c.len(), brute_force(&g));
            let s = g.max_independent_set();
            assert!(g.is_independent(&s));
            assert_eq!(s.len(), brute_force(&g.complement()));
        }
    }

    #[test]
    fn wide_graph_crosses_word_boundary() {
        // complete multipartite graph with 5 parts of size 30: max clique 5
        let g = CliqueGraph::from_predicate(150, |a, b| a % 5 != b % 5);
        let c = g.max_clique();
        assert_eq!(c.len(), 5);
        assert!(g.is_clique(&c));
        assert_eq!(g.max_independent_set().len(), 30);
    }

    #[test]
    fn trivial_graphs() {
        assert!(CliqueGraph::new(0).max_clique().is_empty());
        assert_eq!(CliqueGraph::new(3).max_clique(), vec![0]);
        assert_eq!(CliqueGraph::new(3).max_independent_set(), vec![0, 1, 2]);
    }
}
