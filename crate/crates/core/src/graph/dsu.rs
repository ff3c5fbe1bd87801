/// Union-find over `0..len` with path halving and union by rank.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl DisjointSets {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len).collect(),
            rank: vec![0; len],
            components: len,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Merges the sets of `a` and `b`; false if they were already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
        self.rank.fill(0);
        self.components = self.parent.len();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_merging() {
        let mut d = DisjointSets::new(4);
        assert!(d.union(0, 1));
        assert!(!d.union(1, 0));
        assert!(d.same(0, 1));
        assert!(!d.same(0, 2));
        assert_eq!(d.components(), 3);
        d.reset();
        assert_eq!(d.components(), 4);
        assert!(!d.same(0, 1));
    }

    proptest! {
        #[test]
        fn union_drops_components_by_one_when_roots_differ(
            ops in prop::collection::vec((0usize..20, 0usize..20), 0..60)
        ) {
            let mut d = DisjointSets::new(20);
            for (a, b) in ops {
                let before = d.components();
                let differ = d.find(a) != d.find(b);
                let merged = d.union(a, b);
                prop_assert_eq!(merged, differ);
                prop_assert_eq!(d.components(), before - usize::from(differ));
                let r = d.find(a);
                prop_assert_eq!(d.find(r), r);
                prop_assert_eq!(d.find(b), r);
            }
        }
    }
}
