use alloc::vec::Vec;

/// Disjoint-set forest over `0..n` with union by size and path halving.
///
/// Tracks the number of components and the largest component size so both
/// are available in O(1) after every union.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
    largest: usize,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "vertex count {n} does not fit in u32");
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: alloc::vec![1; n],
            components: n,
            largest: usize::from(n > 0),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let grand = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = grand;
            v = grand;
        }
        v
    }

    /// Merges the sets of `a` and `b`; returns whether they were distinct.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.components -= 1;
        self.largest = self.largest.max(self.size[ra as usize] as usize);
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn largest(&self) -> usize {
        self.largest
    }

    /// Size of the set containing `v`.
    pub fn set_size(&mut self, v: u32) -> usize {
        let root = self.find(v);
        self.size[root as usize] as usize
    }
}
