//! All graphs on up to 8 vertices, one per isomorphism class.
//!
//! Classes on `n` vertices come from adding a vertex to every class on
//! `n - 1` vertices in all possible ways, deduplicated by a brute-force
//! canonical form: the least edge code over all relabellings that keep the
//! vertices sorted by degree.

use std::collections::BTreeSet;

use icx_core::Graph;

pub const MAX_VERTICES: usize = 8;

/// Adjacency rows as bitmasks.
type Adj = Vec<u8>;

fn code(adj: &Adj, perm: &[usize]) -> u32 {
    let n = adj.len();
    let mut c = 0u32;
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if adj[perm[i]] >> perm[j] & 1 == 1 {
                c |= 1 << bit;
            }
            bit += 1;
        }
    }
    c
}

fn permute_classes(adj: &Adj, classes: &[Vec<usize>], k: usize, perm: &mut Vec<usize>, best: &mut u32) {
    if k == classes.len() {
        *best = (*best).min(code(adj, perm));
        return;
    }
    let class = &classes[k];
    let mut items = class.clone();
    heap_permutations(&mut items, class.len(), &mut |p: &[usize]| {
        let base = perm.len();
        perm.extend_from_slice(p);
        permute_classes(adj, classes, k + 1, perm, best);
        perm.truncate(base);
    });
}

fn heap_permutations(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k <= 1 {
        f(items);
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(items, k - 1, f);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
    heap_permutations(items, k - 1, f);
}

fn canonical(adj: &Adj) -> u32 {
    let n = adj.len();
    let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        by_degree[adj[v].count_ones() as usize].push(v);
    }
    let classes: Vec<Vec<usize>> = by_degree.into_iter().filter(|c| !c.is_empty()).collect();
    let mut best = u32::MAX;
    permute_classes(adj, &classes, 0, &mut Vec::with_capacity(n), &mut best);
    best
}

fn decode(n: usize, c: u32) -> Adj {
    let mut adj = vec![0u8; n];
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if c >> bit & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
            bit += 1;
        }
    }
    adj
}

/// Canonical codes of the classes on exactly `n` vertices.
fn classes(n: usize) -> BTreeSet<u32> {
    assert!(n <= MAX_VERTICES, "enumeration is limited to {MAX_VERTICES} vertices");
    let mut current: BTreeSet<u32> = [0].into_iter().collect();
    for m in 1..=n {
        let mut next = BTreeSet::new();
        for &c in &current {
            let base = decode(m - 1, c);
            for nb in 0u32..1 << (m - 1) {
                let mut adj = base.clone();
                adj.push(nb as u8);
                for (v, row) in adj.iter_mut().enumerate().take(m - 1) {
                    if nb >> v & 1 == 1 {
                        *row |= 1 << (m - 1);
                    }
                }
                next.insert(canonical(&adj));
            }
        }
        current = next;
    }
    current
}

fn to_graph(n: usize, adj: &Adj) -> Graph {
    let edges = (0..n).flat_map(|i| (i + 1..n).filter(move |&j| adj[i] >> j & 1 == 1).map(move |j| (i, j)));
    Graph::from_edges(n, edges).expect("valid edges")
}

/// One graph per isomorphism class on exactly `n` vertices.
pub fn graphs_on(n: usize) -> Vec<Graph> {
    classes(n).into_iter().map(|c| to_graph(n, &decode(n, c))).collect()
}

/// One graph per isomorphism class on `1..=max` vertices.
pub fn graphs_up_to(max: usize) -> Vec<Graph> {
    (1..=max).flat_map(graphs_on).collect()
}
