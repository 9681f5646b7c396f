//! Elementary coreductions and collapses on the augmented chain complex.
//!
//! A pair `(a, b)` with `a` a facet of `b` can be cancelled whenever `b` has a
//! single live face or `a` has a single live coface. Incidence coefficients of
//! a simplicial complex are `±1`, so each cancellation is an exact chain
//! homotopy equivalence that only deletes the two cells. The survivors keep
//! their original boundary, restricted to live cells.

use std::collections::VecDeque;

use crate::complex::{lex_cmp, Face, SimplicialComplex};

pub(crate) struct Residual {
    /// Live faces per dimension, index 0 = dimension −1, each in lex order.
    pub layers: Vec<Vec<Face>>,
}

/// Start offsets of the lex-contiguous runs sharing the same smallest `depth` vertices.
struct PrefixIndex {
    depth: u32,
    starts: Vec<u32>,
}

const INDEXED_LAYER: usize = 4096;
const PREFIX_TABLE: usize = 1 << 16;

fn prefix_bucket(face: Face, depth: u32, n: usize) -> usize {
    let mut rest = face;
    let mut key = 0usize;
    for _ in 0..depth {
        key = key * n + rest.trailing_zeros() as usize;
        rest &= rest - 1;
    }
    key
}

impl PrefixIndex {
    fn build(layer: &[Face], size: u32, n: usize) -> Option<Self> {
        if layer.len() < INDEXED_LAYER || n < 2 {
            return None;
        }
        let mut depth = 0u32;
        while depth < size && n.pow(depth + 1) <= PREFIX_TABLE {
            depth += 1;
        }
        if depth == 0 {
            return None;
        }
        let buckets = n.pow(depth);
        let mut starts = vec![0u32; buckets + 1];
        for &f in layer {
            starts[prefix_bucket(f, depth, n) + 1] += 1;
        }
        for i in 0..buckets {
            starts[i + 1] += starts[i];
        }
        Some(PrefixIndex { depth, starts })
    }
}

struct Cells<'a> {
    k: &'a SimplicialComplex,
    offset: Vec<usize>,
    index: Vec<Option<PrefixIndex>>,
    adj: Option<&'a [Face]>,
    all: Face,
    n: usize,
}

impl<'a> Cells<'a> {
    fn id(&self, face: Face) -> Option<usize> {
        let d = face.count_ones() as usize;
        let layer = self.k.faces_by_dim().get(d)?;
        let (lo, hi) = match &self.index[d] {
            Some(ix) => {
                let b = prefix_bucket(face, ix.depth, self.n);
                (ix.starts[b] as usize, ix.starts[b + 1] as usize)
            }
            None => (0, layer.len()),
        };
        layer[lo..hi]
            .binary_search_by(|p| lex_cmp(*p, face))
            .ok()
            .map(|i| self.offset[d] + lo + i)
    }

    fn coface_candidates(&self, f: Face) -> Face {
        match self.adj {
            Some(adj) => {
                let mut blocked = f;
                let mut rest = f;
                while rest != 0 {
                    let v = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    blocked |= adj[v];
                }
                self.all & !blocked
            }
            None => self.all & !f,
        }
    }

    fn face_of(&self, id: usize) -> Face {
        let d = self.offset.partition_point(|&o| o <= id) - 1;
        self.k.faces_by_dim()[d][id - self.offset[d]]
    }

    fn for_each_face(&self, f: Face, mut visit: impl FnMut(usize)) {
        let mut rest = f;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            if let Some(id) = self.id(f ^ bit) {
                visit(id);
            }
        }
    }

    fn for_each_coface(&self, f: Face, mut visit: impl FnMut(usize)) {
        let mut cand = self.coface_candidates(f);
        while cand != 0 {
            let bit = cand & cand.wrapping_neg();
            cand ^= bit;
            if let Some(id) = self.id(f | bit) {
                visit(id);
            }
        }
    }
}

pub(crate) fn coreduce(k: &SimplicialComplex) -> Residual {
    let layers = k.faces_by_dim();
    let mut offset = Vec::with_capacity(layers.len() + 1);
    let mut total = 0usize;
    for l in layers {
        offset.push(total);
        total += l.len();
    }
    offset.push(total);
    let n = k.vertex_count();
    let index = layers
        .iter()
        .enumerate()
        .map(|(d, l)| PrefixIndex::build(l, d as u32, n))
        .collect();
    let cells = Cells {
        k,
        offset,
        index,
        adj: k.graph_adjacency(),
        all: if n == 128 { u128::MAX } else { (1u128 << n) - 1 },
        n,
    };

    let mut alive = vec![true; total];
    let mut faces_left = vec![0u8; total];
    let mut cofaces_left = vec![0u8; total];
    for (d, layer) in layers.iter().enumerate() {
        for (i, &f) in layer.iter().enumerate() {
            let id = cells.offset[d] + i;
            faces_left[id] = d as u8;
            // in an independence complex every candidate extension is a face
            let c = if cells.adj.is_some() {
                cells.coface_candidates(f).count_ones()
            } else {
                let mut c = 0u32;
                cells.for_each_coface(f, |_| c += 1);
                c
            };
            cofaces_left[id] = c as u8;
        }
    }

    let mut queue: VecDeque<usize> = VecDeque::new();
    let kill = |id: usize,
                    alive: &mut Vec<bool>,
                    faces_left: &mut Vec<u8>,
                    cofaces_left: &mut Vec<u8>,
                    queue: &mut VecDeque<usize>| {
        alive[id] = false;
        let f = cells.face_of(id);
        cells.for_each_face(f, |a| {
            if alive[a] {
                cofaces_left[a] -= 1;
                if cofaces_left[a] == 1 {
                    queue.push_back(a);
                }
            }
        });
        cells.for_each_coface(f, |b| {
            if alive[b] {
                faces_left[b] -= 1;
                if faces_left[b] == 1 {
                    queue.push_back(b);
                }
            }
        });
    };

    if total >= 2 && !layers[1].is_empty() {
        // (∅, first vertex)
        kill(0, &mut alive, &mut faces_left, &mut cofaces_left, &mut queue);
        let v0 = cells.offset[1];
        kill(v0, &mut alive, &mut faces_left, &mut cofaces_left, &mut queue);
    }
    for id in 0..total {
        if alive[id] && cofaces_left[id] == 1 {
            queue.push_back(id);
        }
    }
    while let Some(b) = queue.pop_front() {
        if !alive[b] {
            continue;
        }
        let f = cells.face_of(b);
        if faces_left[b] == 1 {
            let mut partner = None;
            cells.for_each_face(f, |a| {
                if alive[a] {
                    partner = Some(a);
                }
            });
            if let Some(a) = partner {
                kill(b, &mut alive, &mut faces_left, &mut cofaces_left, &mut queue);
                kill(a, &mut alive, &mut faces_left, &mut cofaces_left, &mut queue);
                continue;
            }
        }
        if cofaces_left[b] == 1 {
            let mut partner = None;
            cells.for_each_coface(f, |c| {
                if alive[c] {
                    partner = Some(c);
                }
            });
            if let Some(c) = partner {
                kill(c, &mut alive, &mut faces_left, &mut cofaces_left, &mut queue);
                kill(b, &mut alive, &mut faces_left, &mut cofaces_left, &mut queue);
            }
        }
    }

    let mut out = Vec::with_capacity(layers.len());
    for (d, layer) in layers.iter().enumerate() {
        out.push(
            layer
                .iter()
                .enumerate()
                .filter(|(i, _)| alive[cells.offset[d] + i])
                .map(|(_, &f)| f)
                .collect(),
        );
    }
    Residual { layers: out }
}
