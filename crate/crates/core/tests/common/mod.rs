//! Reference implementations used as test oracles. They work straight from
//! the topology's link list so they share no code with the library.

#![allow(dead_code)]

use grade_route::topology::Topology;

/// Adjacency matrix of link bandwidths, `None` where there is no link.
pub fn bandwidth_matrix(t: &Topology, keep: &[bool]) -> Vec<Vec<Option<f64>>> {
    let n = t.node_count();
    let mut m = vec![vec![None; n]; n];
    for l in t.links() {
        let (u, v) = (l.u.0, l.v.0);
        if keep[u] && keep[v] {
            m[u][v] = Some(l.bandwidth);
            m[v][u] = Some(l.bandwidth);
        }
    }
    m
}

/// First-link bandwidth over total path bandwidth, summed left to right.
pub fn ratio(m: &[Vec<Option<f64>>], path: &[usize]) -> f64 {
    if path.len() < 2 {
        return 0.0;
    }
    let first = m[path[0]][path[1]].unwrap();
    let total: f64 = path.windows(2).map(|h| m[h[0]][h[1]].unwrap()).sum();
    first / total
}

/// Every simple path from `s` to `d` whose hops pass `allowed`.
pub fn simple_paths(
    m: &[Vec<Option<f64>>],
    s: usize,
    d: usize,
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Vec<Vec<usize>> {
    fn go(
        m: &[Vec<Option<f64>>],
        d: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        path: &mut Vec<usize>,
        on: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let cur = *path.last().unwrap();
        if cur == d {
            out.push(path.clone());
            return;
        }
        for next in 0..m.len() {
            if m[cur][next].is_some() && !on[next] && allowed(cur, next) {
                on[next] = true;
                path.push(next);
                go(m, d, allowed, path, on, out);
                path.pop();
                on[next] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; m.len()];
    on[s] = true;
    go(m, d, allowed, &mut vec![s], &mut on, &mut out);
    out
}

/// Best ratio over the given paths (0 when there are none).
pub fn best_ratio(m: &[Vec<Option<f64>>], paths: &[Vec<usize>]) -> f64 {
    paths.iter().map(|p| ratio(m, p)).fold(0.0, f64::max)
}

/// The decoder's index-window rule, restated.
pub fn window_ok(cur: usize, next: usize, s: usize, d: usize, window: usize) -> bool {
    let delta = next as i64 - cur as i64;
    if s > d {
        delta > -(window as i64)
    } else {
        delta < window as i64
    }
}
