//! Maximum matchings: augmenting paths for bipartite graphs (Kuhn) and
//! Edmonds' blossom algorithm for general graphs.

use std::collections::VecDeque;

/// Maximum bipartite matching. `adj[a]` lists the right vertices adjacent
/// to left vertex `a`; neighbours are tried in the given order. Returns the
/// partner of each left vertex.
pub fn max_bipartite_matching(right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; right];
    let mut match_left: Vec<Option<usize>> = vec![None; adj.len()];
    // Cheap greedy start, then augment.
    for (a, nbrs) in adj.iter().enumerate() {
        if let Some(&b) = nbrs.iter().find(|&&b| match_right[b].is_none()) {
            match_right[b] = Some(a);
            match_left[a] = Some(b);
        }
    }
    let mut stamp = vec![usize::MAX; right];
    for a in 0..adj.len() {
        if match_left[a].is_none() {
            augment(a, a, adj, &mut match_right, &mut match_left, &mut stamp);
        }
    }
    match_left
}

fn augment(
    a: usize,
    round: usize,
    adj: &[Vec<usize>],
    match_right: &mut [Option<usize>],
    match_left: &mut [Option<usize>],
    stamp: &mut [usize],
) -> bool {
    // Iterative DFS over alternating paths.
    let mut stack: Vec<(usize, usize)> = vec![(a, 0)];
    let mut via: Vec<usize> = Vec::new();
    while let Some(&mut (u, ref mut i)) = stack.last_mut() {
        if *i >= adj[u].len() {
            stack.pop();
            via.pop();
            continue;
        }
        let b = adj[u][*i];
        *i += 1;
        if stamp[b] == round {
            continue;
        }
        stamp[b] = round;
        via.push(b);
        match match_right[b] {
            None => {
                // Flip the path.
                for (k, &(l, _)) in stack.iter().enumerate() {
                    let r = via[k];
                    match_right[r] = Some(l);
                    match_left[l] = Some(r);
                }
                return true;
            }
            Some(next) => stack.push((next, 0)),
        }
    }
    false
}

/// Maximum matching in a general undirected graph given as adjacency lists.
/// Returns the partner of each vertex.
pub fn max_general_matching(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    for v in 0..n {
        if mate[v].is_none() {
            if let Some(&u) = adj[v].iter().find(|&&u| u != v && mate[u].is_none()) {
                mate[v] = Some(u);
                mate[u] = Some(v);
            }
        }
    }
    let mut b = Blossom {
        adj,
        mate,
        parent: vec![None; n],
        base: (0..n).collect(),
        used: vec![false; n],
        in_blossom: vec![false; n],
        queue: VecDeque::new(),
    };
    for root in 0..n {
        if b.mate[root].is_none() {
            if let Some(mut v) = b.find_path(root) {
                loop {
                    let pv = b.parent[v].expect("augmenting path has parents");
                    let next = b.mate[pv];
                    b.mate[v] = Some(pv);
                    b.mate[pv] = Some(v);
                    match next {
                        Some(w) => v = w,
                        None => break,
                    }
                }
            }
        }
    }
    b.mate
}

struct Blossom<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Blossom<'_> {
    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            match self.mate[a] {
                Some(m) => a = self.parent[m].expect("outer vertex has a parent"),
                None => break,
            }
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            let m = self.mate[b].expect("path to root alternates");
            b = self.parent[m].expect("outer vertex has a parent");
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            let m = self.mate[v].expect("inner vertex is matched");
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[m]] = true;
            self.parent[v] = Some(child);
            child = m;
            v = self.parent[m].expect("outer vertex has a parent");
        }
    }

    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.used.iter_mut().for_each(|u| *u = false);
        self.parent.iter_mut().for_each(|p| *p = None);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in &self.adj[v] {
                if to == v || self.base[v] == self.base[to] || self.mate[v] == Some(to) {
                    continue;
                }
                let outer = to == root || self.mate[to].is_some_and(|m| self.parent[m].is_some());
                if outer {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to].is_none() {
                    self.parent[to] = Some(v);
                    match self.mate[to] {
                        None => return Some(to),
                        Some(m) => {
                            self.used[m] = true;
                            self.queue.push_back(m);
                        }
                    }
                }
            }
        }
        None
    }
}
