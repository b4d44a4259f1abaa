use std::cmp::Ordering;

/// Binary min-heap over a fixed set of items `0..n` whose keys can be
/// changed in place. Ties are broken by item index.
#[derive(Debug, Clone)]
pub struct IndexedMinHeap<K> {
    keys: Vec<K>,
    heap: Vec<usize>,
    position: Vec<usize>,
}

impl<K: PartialOrd + Copy> IndexedMinHeap<K> {
    pub fn new(keys: Vec<K>) -> Self {
        let n = keys.len();
        let mut q = Self { keys, heap: (0..n).collect(), position: (0..n).collect() };
        for i in (0..n / 2).rev() {
            q.sift_down(i);
        }
        q
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn key(&self, item: usize) -> K {
        self.keys[item]
    }

    /// Item with the smallest key.
    pub fn peek(&self) -> Option<(usize, K)> {
        self.heap.first().map(|&i| (i, self.keys[i]))
    }

    pub fn update(&mut self, item: usize, key: K) {
        let old = self.keys[item];
        self.keys[item] = key;
        let pos = self.position[item];
        match key.partial_cmp(&old) {
            Some(Ordering::Less) => self.sift_up(pos),
            Some(Ordering::Greater) => self.sift_down(pos),
            _ => {}
        }
    }

    fn less(&self, a: usize, b: usize) -> bool {
        let (ia, ib) = (self.heap[a], self.heap[b]);
        match self.keys[ia].partial_cmp(&self.keys[ib]) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) => false,
            _ => ia < ib,
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.position[self.heap[a]] = a;
        self.position[self.heap[b]] = b;
    }

    fn sift_up(&mut self, mut pos: usize) {
        while pos > 0 {
            let parent = (pos - 1) / 2;
            if self.less(pos, parent) {
                self.swap(pos, parent);
                pos = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut pos: usize) {
        let n = self.heap.len();
        loop {
            let (l, r) = (2 * pos + 1, 2 * pos + 2);
            let mut smallest = pos;
            if l < n && self.less(l, smallest) {
                smallest = l;
            }
            if r < n && self.less(r, smallest) {
                smallest = r;
            }
            if smallest == pos {
                break;
            }
            self.swap(pos, smallest);
            pos = smallest;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn infinite_keys_sink() {
        let mut q = IndexedMinHeap::new(vec![f64::INFINITY, 3.0, f64::INFINITY]);
        assert_eq!(q.peek(), Some((1, 3.0)));
        q.update(1, f64::INFINITY);
        assert_eq!(q.peek().unwrap().0, 0);
        q.update(2, 0.5);
        assert_eq!(q.peek(), Some((2, 0.5)));
    }

    proptest! {
        #[test]
        fn peek_is_minimum_after_updates(
            init in proptest::collection::vec(0.0f64..100.0, 1..40),
            updates in proptest::collection::vec((0usize..40, 0.0f64..100.0), 0..100),
        ) {
            let mut keys = init.clone();
            let mut q = IndexedMinHeap::new(init);
            for (item, key) in updates {
                let item = item % keys.len();
                keys[item] = key;
                q.update(item, key);
                let (best, k) = q.peek().unwrap();
                let min = keys.iter().cloned().fold(f64::INFINITY, f64::min);
                prop_assert_eq!(k, min);
                prop_assert_eq!(keys[best], min);
                let first = keys.iter().position(|&v| v == min).unwrap();
                prop_assert_eq!(best, first);
            }
        }
    }
}
