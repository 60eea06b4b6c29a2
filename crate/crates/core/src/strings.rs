//! Persistent string collection with identifiers that are equal exactly when
//! the strings are equal.
//!
//! Strings are stored as balanced binary trees whose shape depends only on the
//! length (left half `len / 2`). Nodes are hash-consed on their children, so
//! two strings are equal iff their roots are the same node. A substitution
//! copies one root-to-leaf path.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::StringError;

/// Dense identifier, issued in order of first occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StringId(pub u32);

impl StringId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
enum Node {
    Leaf(u32),
    Pair(u32, u32),
}

const EMPTY_ROOT: u32 = u32::MAX;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StringStore {
    alphabet: u32,
    nodes: Vec<Node>,
    node_ids: HashMap<Node, u32>,
    /// Root node and length per issued id.
    roots: Vec<(u32, usize)>,
    id_of_root: HashMap<u32, StringId>,
}

impl StringStore {
    pub fn new(alphabet: u32) -> Self {
        StringStore { alphabet, ..Default::default() }
    }

    #[inline]
    pub fn alphabet_size(&self) -> u32 {
        self.alphabet
    }

    /// Number of distinct strings issued so far.
    #[inline]
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Number of distinct tree nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn intern(&mut self, node: Node) -> u32 {
        if let Some(&id) = self.node_ids.get(&node) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.node_ids.insert(node, id);
        id
    }

    fn id_for_root(&mut self, root: u32, len: usize) -> StringId {
        if let Some(&id) = self.id_of_root.get(&root) {
            return id;
        }
        let id = StringId(self.roots.len() as u32);
        self.roots.push((root, len));
        self.id_of_root.insert(root, id);
        id
    }

    fn check_symbol(&self, c: u32) -> Result<(), StringError> {
        if c >= self.alphabet {
            Err(StringError::SymbolOutOfRange { symbol: c, alphabet: self.alphabet })
        } else {
            Ok(())
        }
    }

    fn build(&mut self, s: &[u32]) -> u32 {
        if s.len() == 1 {
            return self.intern(Node::Leaf(s[0]));
        }
        let mid = s.len() / 2;
        let l = self.build(&s[..mid]);
        let r = self.build(&s[mid..]);
        self.intern(Node::Pair(l, r))
    }

    pub fn insert_explicit(&mut self, s: &[u32]) -> Result<StringId, StringError> {
        for &c in s {
            self.check_symbol(c)?;
        }
        let root = if s.is_empty() { EMPTY_ROOT } else { self.build(s) };
        Ok(self.id_for_root(root, s.len()))
    }

    fn root(&self, id: StringId) -> Result<(u32, usize), StringError> {
        self.roots.get(id.index()).copied().ok_or(StringError::UnknownId(id.0))
    }

    fn substitute(&mut self, node: u32, len: usize, k: usize, c: u32) -> u32 {
        match self.nodes[node as usize] {
            Node::Leaf(_) => self.intern(Node::Leaf(c)),
            Node::Pair(l, r) => {
                let mid = len / 2;
                let pair = if k < mid {
                    Node::Pair(self.substitute(l, mid, k, c), r)
                } else {
                    Node::Pair(l, self.substitute(r, len - mid, k - mid, c))
                };
                self.intern(pair)
            }
        }
    }

    /// Id of `base` with position `k` replaced by `c`.
    pub fn insert_substitution(&mut self, base: StringId, k: usize, c: u32) -> Result<StringId, StringError> {
        let (root, len) = self.root(base)?;
        if k >= len {
            return Err(StringError::IndexOutOfBounds { index: k, len });
        }
        self.check_symbol(c)?;
        let new_root = self.substitute(root, len, k, c);
        Ok(self.id_for_root(new_root, len))
    }

    pub fn length(&self, id: StringId) -> Result<usize, StringError> {
        Ok(self.root(id)?.1)
    }

    pub fn symbol_at(&self, id: StringId, k: usize) -> Result<u32, StringError> {
        let (mut node, mut len) = self.root(id)?;
        if k >= len {
            return Err(StringError::IndexOutOfBounds { index: k, len });
        }
        let mut k = k;
        loop {
            match self.nodes[node as usize] {
                Node::Leaf(c) => return Ok(c),
                Node::Pair(l, r) => {
                    let mid = len / 2;
                    if k < mid {
                        node = l;
                        len = mid;
                    } else {
                        node = r;
                        len -= mid;
                        k -= mid;
                    }
                }
            }
        }
    }

    pub fn string_of(&self, id: StringId) -> Result<Vec<u32>, StringError> {
        let (root, len) = self.root(id)?;
        let mut out = Vec::with_capacity(len);
        if root != EMPTY_ROOT {
            self.collect(root, &mut out);
        }
        Ok(out)
    }

    fn collect(&self, node: u32, out: &mut Vec<u32>) {
        match self.nodes[node as usize] {
            Node::Leaf(c) => out.push(c),
            Node::Pair(l, r) => {
                self.collect(l, out);
                self.collect(r, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: u32 = 0;
    const B: u32 = 1;

    #[test]
    fn interning() {
        let mut s = StringStore::new(2);
        let x = s.insert_explicit(&[A, B, A]).unwrap();
        assert_eq!(s.insert_explicit(&[A, B, A]).unwrap(), x);
        let y = s.insert_explicit(&[A, B, B]).unwrap();
        assert_ne!(x, y);
        let e = s.insert_explicit(&[]).unwrap();
        assert_ne!(e, x);
        assert_ne!(e, y);
        assert_eq!(s.string_of(e).unwrap(), Vec::<u32>::new());
        assert_eq!(s.insert_explicit(&[]).unwrap(), e);
    }

    #[test]
    fn substitution() {
        let mut s = StringStore::new(2);
        let aba = s.insert_explicit(&[A, B, A]).unwrap();
        let aaa = s.insert_substitution(aba, 1, A).unwrap();
        assert_eq!(aaa, s.insert_explicit(&[A, A, A]).unwrap());
        assert_eq!(s.insert_substitution(aba, 0, A).unwrap(), aba);
        assert_eq!(s.string_of(aba).unwrap(), vec![A, B, A]);
        assert_eq!(s.length(aaa).unwrap(), 3);
        assert_eq!(s.symbol_at(aba, 1).unwrap(), B);
    }

    #[test]
    fn chain_equals_explicit() {
        let mut s = StringStore::new(4);
        let mut id = s.insert_explicit(&[0; 7]).unwrap();
        let target = [3, 1, 0, 2, 2, 0, 1];
        for (k, &c) in target.iter().enumerate() {
            id = s.insert_substitution(id, k, c).unwrap();
        }
        assert_eq!(id, s.insert_explicit(&target).unwrap());
    }

    #[test]
    fn errors() {
        let mut s = StringStore::new(2);
        assert_eq!(s.insert_explicit(&[2]), Err(StringError::SymbolOutOfRange { symbol: 2, alphabet: 2 }));
        let x = s.insert_explicit(&[0, 1]).unwrap();
        assert_eq!(s.insert_substitution(x, 2, 0), Err(StringError::IndexOutOfBounds { index: 2, len: 2 }));
        assert_eq!(s.string_of(StringId(9)), Err(StringError::UnknownId(9)));
        let e = s.insert_explicit(&[]).unwrap();
        assert!(s.insert_substitution(e, 0, 0).is_err());
    }
}
