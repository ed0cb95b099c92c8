//! Exact maximum-weight assignment of resource blocks to base stations.
//!
//! One slot's assignment problem is a small transportation instance:
//! every resource block may serve at most one station, every station may
//! accept at most `cap` blocks, and only strictly positive scores are
//! worth assigning (an unused block contributes zero). Successive
//! shortest augmenting paths on the residual flow network solve it
//! exactly; at these sizes a dense Bellman-Ford per augmentation beats
//! anything more elaborate.

#[derive(Debug, Clone, Copy)]
struct Edge {
    from: usize,
    to: usize,
    cap: i32,
    flow: i32,
    cost: f64,
}

/// Chooses the matching of blocks (columns) to stations (rows) that
/// maximizes the total score, subject to each block serving at most one
/// station and each station using at most `cap` blocks. Entries that are
/// zero or negative are never assigned. `scores` is row-major `[n][k]`.
///
/// Returns `(station, block)` pairs sorted by station, then block. The
/// result is deterministic for identical input.
pub fn max_weight_assignment(
    scores: &[f64],
    n_bs: usize,
    n_rb: usize,
    cap: usize,
) -> Vec<(usize, usize)> {
    assert_eq!(scores.len(), n_bs * n_rb, "score table shape");
    assert!(cap >= 1, "station capacity must be at least one block");
    debug_assert!(scores.iter().all(|s| s.is_finite()));

    if n_bs == 1 {
        // Single station: pick the `cap` best positive blocks.
        let mut order: Vec<usize> = (0..n_rb).filter(|&k| scores[k] > 0.0).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        order.truncate(cap);
        order.sort_unstable();
        return order.into_iter().map(|k| (0, k)).collect();
    }
    if cap >= n_rb {
        // Station capacity can never bind; each block goes to its best
        // positive-score station, lowest station index on ties.
        let mut out = Vec::new();
        for k in 0..n_rb {
            let mut best: Option<(usize, f64)> = None;
            for n in 0..n_bs {
                let s = scores[n * n_rb + k];
                if s > 0.0 && best.map_or(true, |(_, bs)| s > bs) {
                    best = Some((n, s));
                }
            }
            if let Some((n, _)) = best {
                out.push((n, k));
            }
        }
        out.sort_unstable();
        return out;
    }

    // Min-cost flow: source -> block (cap 1) -> station (cap 1, cost
    // -score) -> sink (cap `cap`). Augment one unit along the most
    // negative path while one exists.
    let source = 0;
    let rb = |k: usize| 1 + k;
    let bs = |n: usize| 1 + n_rb + n;
    let sink = 1 + n_rb + n_bs;
    let n_nodes = sink + 1;

    let mut edges: Vec<Edge> = Vec::new();
    let add = |edges: &mut Vec<Edge>, from: usize, to: usize, cap: i32, cost: f64| {
        edges.push(Edge {
            from,
            to,
            cap,
            flow: 0,
            cost,
        });
        edges.push(Edge {
            from: to,
            to: from,
            cap: 0,
            flow: 0,
            cost: -cost,
        });
    };
    for k in 0..n_rb {
        add(&mut edges, source, rb(k), 1, 0.0);
    }
    let mut cell_edges = Vec::new();
    for n in 0..n_bs {
        for k in 0..n_rb {
            let s = scores[n * n_rb + k];
            if s > 0.0 {
                cell_edges.push((edges.len(), n, k));
                add(&mut edges, rb(k), bs(n), 1, -s);
            }
        }
    }
    for n in 0..n_bs {
        add(&mut edges, bs(n), sink, cap as i32, 0.0);
    }

    loop {
        // Bellman-Ford in fixed edge order; ties keep the earliest path.
        let mut dist = vec![f64::INFINITY; n_nodes];
        let mut prev = vec![usize::MAX; n_nodes];
        dist[source] = 0.0;
        for _ in 0..n_nodes - 1 {
            let mut changed = false;
            for (i, e) in edges.iter().enumerate() {
                if e.cap - e.flow > 0 && dist[e.from] + e.cost < dist[e.to] {
                    dist[e.to] = dist[e.from] + e.cost;
                    prev[e.to] = i;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !(dist[sink] < 0.0) {
            break;
        }
        let mut v = sink;
        while v != source {
            let i = prev[v];
            edges[i].flow += 1;
            edges[i ^ 1].flow -= 1;
            v = edges[i].from;
        }
    }

    let mut out: Vec<(usize, usize)> = cell_edges
        .iter()
        .filter(|&&(i, _, _)| edges[i].flow == 1)
        .map(|&(_, n, k)| (n, k))
        .collect();
    out.sort_unstable();
    out
}
