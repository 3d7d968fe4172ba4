//! Support feasibility of a transportation problem via maximum flow.

use petgraph::algo::{ford_fulkerson, tarjan_scc};
use petgraph::graph::{DiGraph, EdgeIndex, NodeIndex};

const FLOW_EPS: f64 = 1e-13;

struct Network {
    graph: DiGraph<(), f64>,
    source: NodeIndex,
    sink: NodeIndex,
    rows: Vec<NodeIndex>,
    cols: Vec<NodeIndex>,
    cells: Vec<(usize, usize, EdgeIndex)>,
}

fn network(px: &[f64], py: &[f64], support: impl Fn(usize, usize) -> bool) -> Network {
    let mut graph = DiGraph::<(), f64>::new();
    let source = graph.add_node(());
    let sink = graph.add_node(());
    let rows: Vec<_> = px.iter().map(|_| graph.add_node(())).collect();
    let cols: Vec<_> = py.iter().map(|_| graph.add_node(())).collect();
    for (x, &w) in px.iter().enumerate() {
        if w > 0.0 {
            graph.add_edge(source, rows[x], w);
        }
    }
    for (y, &w) in py.iter().enumerate() {
        if w > 0.0 {
            graph.add_edge(cols[y], sink, w);
        }
    }
    let mut cells = Vec::new();
    for x in 0..px.len() {
        for y in 0..py.len() {
            if px[x] > 0.0 && py[y] > 0.0 && support(x, y) {
                cells.push((x, y, graph.add_edge(rows[x], cols[y], 2.0)));
            }
        }
    }
    Network {
        graph,
        source,
        sink,
        rows,
        cols,
        cells,
    }
}

fn demand(px: &[f64], py: &[f64]) -> f64 {
    px.iter().sum::<f64>().min(py.iter().sum())
}

/// Whether some nonnegative table that vanishes outside `support` has row
/// sums `px` and column sums `py`, up to `tol` of unrouted mass.
pub fn transport_feasible(
    px: &[f64],
    py: &[f64],
    support: impl Fn(usize, usize) -> bool,
    tol: f64,
) -> bool {
    let net = network(px, py, support);
    let (flow, _) = ford_fulkerson(&net.graph, net.source, net.sink);
    flow >= demand(px, py) - tol
}

/// Cells that carry positive mass in at least one feasible table, in
/// row-major order, or `None` when no feasible table exists.
///
/// A zero-flow cell of a maximum flow can be made positive exactly when it
/// lies on a cycle of the residual network.
pub(crate) fn essential_support(
    px: &[f64],
    py: &[f64],
    support: impl Fn(usize, usize) -> bool,
    tol: f64,
) -> Option<Vec<bool>> {
    let net = network(px, py, support);
    let (flow, flows) = ford_fulkerson(&net.graph, net.source, net.sink);
    if flow < demand(px, py) - tol {
        return None;
    }
    let mut residual = DiGraph::<(), ()>::with_capacity(net.graph.node_count(), 0);
    for _ in 0..net.graph.node_count() {
        residual.add_node(());
    }
    for e in net.graph.edge_indices() {
        let (u, v) = net.graph.edge_endpoints(e).expect("edge exists");
        let cap = net.graph[e];
        let f = flows[e.index()];
        if cap - f > FLOW_EPS {
            residual.add_edge(u, v, ());
        }
        if f > FLOW_EPS {
            residual.add_edge(v, u, ());
        }
    }
    let mut component = vec![usize::MAX; residual.node_count()];
    for (k, scc) in tarjan_scc(&residual).into_iter().enumerate() {
        for node in scc {
            component[node.index()] = k;
        }
    }
    let cols = py.len();
    let mut keep = vec![false; px.len() * cols];
    for &(x, y, e) in &net.cells {
        let same = component[net.rows[x].index()] == component[net.cols[y].index()];
        keep[x * cols + y] = flows[e.index()] > FLOW_EPS || same;
    }
    Some(keep)
}
