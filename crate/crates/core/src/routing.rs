//! Oracle neighbor discovery and node-disjoint multipath routes.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use crate::engine::NodeId;
use crate::geometry::{azimuth, beam_for_direction, AntennaConfig, ChannelModel, Position};
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: NodeId,
    pub azimuth: f64,
    pub beam: usize,
}

/// Neighbors of every node within `comm_radius`, sorted by id.
pub fn neighbor_discovery(positions: &[Position], antennas: &[AntennaConfig], ch: &ChannelModel) -> Vec<Vec<Neighbor>> {
    let n = positions.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .filter_map(|j| {
                    let d = positions[i].distance(positions[j]);
                    if d == 0.0 || !ch.in_range(d) {
                        return None;
                    }
                    let az = azimuth(positions[i], positions[j]).ok()?;
                    Some(Neighbor { id: j, azimuth: az, beam: beam_for_direction(&antennas[i], az) })
                })
                .collect()
        })
        .collect()
}

pub fn adjacency(neighbors: &[Vec<Neighbor>]) -> Vec<Vec<NodeId>> {
    neighbors.iter().map(|ns| ns.iter().map(|n| n.id).collect()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteSet {
    pub flow_id: usize,
    pub routes: Vec<Arc<[NodeId]>>,
    pub computed_at: SimTime,
}

impl RouteSet {
    pub fn is_node_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        for r in &self.routes {
            for &n in &r[1..r.len() - 1] {
                if !seen.insert(n) {
                    return false;
                }
            }
        }
        true
    }
}

/// Fewest-hop path avoiding `blocked`; neighbors are explored in ascending
/// id order so ties resolve toward smaller ids.
fn bfs_path(adj: &[Vec<NodeId>], src: NodeId, dst: NodeId, blocked: &[bool], skip_direct: bool) -> Option<Vec<NodeId>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    let mut visited = vec![false; n];
    let mut q = VecDeque::new();
    visited[src] = true;
    q.push_back(src);
    while let Some(u) = q.pop_front() {
        let mut nbrs = adj[u].clone();
        nbrs.sort_unstable();
        for v in nbrs {
            if visited[v] || (v != dst && blocked[v]) {
                continue;
            }
            if skip_direct && u == src && v == dst {
                continue;
            }
            visited[v] = true;
            prev[v] = u;
            if v == dst {
                let mut path = vec![dst];
                let mut cur = dst;
                while cur != src {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            q.push_back(v);
        }
    }
    None
}

/// Up to `k` node-disjoint shortest paths, extracted one at a time with the
/// intermediate nodes of earlier paths removed.
pub fn compute_node_disjoint_routes(
    adj: &[Vec<NodeId>],
    flow_id: usize,
    src: NodeId,
    dst: NodeId,
    k: usize,
    now: SimTime,
) -> RouteSet {
    let mut blocked = vec![false; adj.len()];
    let mut routes: Vec<Arc<[NodeId]>> = Vec::new();
    let mut direct_used = false;
    while routes.len() < k {
        let Some(path) = bfs_path(adj, src, dst, &blocked, direct_used) else {
            break;
        };
        if path.len() == 2 {
            direct_used = true;
        }
        for &n in &path[1..path.len() - 1] {
            blocked[n] = true;
        }
        routes.push(path.into());
    }
    let set = RouteSet { flow_id, routes, computed_at: now };
    debug_assert!(set.is_node_disjoint());
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    #[test]
    fn line_topology_has_one_route() {
        let adj = adj_from_edges(3, &[(0, 1), (1, 2)]);
        let rs = compute_node_disjoint_routes(&adj, 0, 0, 2, 2, SimTime::ZERO);
        assert_eq!(rs.routes.len(), 1);
        assert_eq!(&*rs.routes[0], &[0, 1, 2]);
    }

    #[test]
    fn two_parallel_paths() {
        let adj = adj_from_edges(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        let rs = compute_node_disjoint_routes(&adj, 0, 0, 3, 4, SimTime::ZERO);
        assert_eq!(rs.routes.len(), 2);
        assert_eq!(&*rs.routes[0], &[0, 1, 3]);
        assert_eq!(&*rs.routes[1], &[0, 2, 3]);
        assert!(rs.is_node_disjoint());
    }

    #[test]
    fn direct_link_used_once() {
        let adj = adj_from_edges(3, &[(0, 1), (0, 2), (2, 1)]);
        let rs = compute_node_disjoint_routes(&adj, 0, 0, 1, 4, SimTime::ZERO);
        assert_eq!(rs.routes.len(), 2);
        assert_eq!(&*rs.routes[0], &[0, 1]);
        assert_eq!(&*rs.routes[1], &[0, 2, 1]);
    }

    #[test]
    fn disconnected_gives_empty_set() {
        let adj = adj_from_edges(3, &[(0, 1)]);
        assert!(compute_node_disjoint_routes(&adj, 0, 0, 2, 4, SimTime::ZERO).routes.is_empty());
    }

    #[test]
    fn isolated_node_has_no_neighbors() {
        let ch = ChannelModel { bit_rate: 1e6, comm_radius: 100.0, propagation_speed: 3e8 };
        let pos = vec![Position::new(0.0, 0.0), Position::new(50.0, 0.0), Position::new(500.0, 0.0)];
        let ant = vec![AntennaConfig::sectored(4); 3];
        let nb = neighbor_discovery(&pos, &ant, &ch);
        assert_eq!(nb[0].iter().map(|n| n.id).collect::<Vec<_>>(), vec![1]);
        assert!(nb[2].is_empty());
        assert_eq!(nb[1][0].beam, 2);
    }
}
