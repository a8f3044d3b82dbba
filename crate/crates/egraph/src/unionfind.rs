use crate::Id;

/// Union-find over dense [`Id`]s with path halving.
#[derive(Debug, Clone, Default)]
pub struct UnionFind {
    parents: Vec<Id>,
}

impl UnionFind {
    pub fn make_set(&mut self) -> Id {
        let id = Id::from(self.parents.len());
        self.parents.push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn find(&self, mut current: Id) -> Id {
        while current != self.parent(current) {
            current = self.parent(current);
        }
        current
    }

    pub fn find_mut(&mut self, mut current: Id) -> Id {
        while current != self.parent(current) {
            let grandparent = self.parent(self.parent(current));
            self.parents[current.index()] = grandparent;
            current = grandparent;
        }
        current
    }

    /// Makes `root2` point at `root1`. Both must be roots.
    pub fn union_roots(&mut self, root1: Id, root2: Id) -> Id {
        self.parents[root2.index()] = root1;
        root1
    }

    fn parent(&self, id: Id) -> Id {
        self.parents[id.index()]
    }
}
