//! CDN tree: origin at the root, optional regional tiers, edge surrogates at
//! the leaves and client clusters hanging off edge nodes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Violation, WirelessDeviceProfile};

/// Index of a node inside [`Topology::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeIdx(pub usize);

/// Index of a cluster inside [`Topology::clusters`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterIdx(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Origin,
    Regional,
    Edge,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Origin => "origin",
            Tier::Regional => "regional",
            Tier::Edge => "edge",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachePolicy {
    #[default]
    Lru,
    Lfu,
}

/// A node entry of the scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub tier: Tier,
    /// Required for every tier except the origin.
    #[serde(default)]
    pub parent: Option<String>,
    /// Core-router hops contributed by the link to `parent`.
    #[serde(default)]
    pub hop_contribution: u32,
    #[serde(default)]
    pub cache_capacity_bits: f64,
    #[serde(default)]
    pub cache_policy: CachePolicy,
}

/// A client cluster entry of the scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterDoc {
    pub id: String,
    /// Id of the edge node the cluster attaches to.
    pub edge: String,
    pub user_count: u32,
    /// Key into `user_space.device_profiles`; absent means wired access.
    #[serde(default)]
    pub device_profile: Option<String>,
    pub request_rate_per_user_per_hr: f64,
    #[serde(default = "flat_diurnal")]
    pub diurnal_profile: Vec<f64>,
    /// Hops between the edge node and the cluster itself.
    #[serde(default)]
    pub access_hops: u32,
}

fn flat_diurnal() -> Vec<f64> {
    vec![1.0; 24]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdnNode {
    pub id: String,
    pub tier: Tier,
    pub parent: Option<NodeIdx>,
    pub hop_contribution: u32,
    /// Ignored for the origin, which holds every alive content.
    pub cache_capacity_bits: u64,
    pub cache_policy: CachePolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientCluster {
    pub id: String,
    pub edge: NodeIdx,
    pub user_count: u32,
    pub device_profile_name: Option<String>,
    /// `None` for wired clusters; their device energy is zero.
    pub device_profile: Option<WirelessDeviceProfile>,
    pub request_rate_per_user_per_hr: f64,
    pub diurnal_profile: [f64; 24],
    pub access_hops: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown cluster `{0}`")]
    UnknownCluster(String),
    #[error("node `{server}` is not on the root path of cluster `{cluster}`")]
    NotOnRootPath { server: String, cluster: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<CdnNode>,
    clusters: Vec<ClientCluster>,
    origin: NodeIdx,
    node_index: BTreeMap<String, NodeIdx>,
    cluster_index: BTreeMap<String, ClusterIdx>,
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'))
}

impl Topology {
    /// Builds and validates the tree. All violations are collected; field names
    /// are prefixed with `topology.nodes[i]` / `user_space.clusters[i]`.
    pub fn from_docs(
        nodes: &[NodeDoc],
        clusters: &[ClusterDoc],
        profiles: &BTreeMap<String, WirelessDeviceProfile>,
    ) -> Result<Self, Vec<Violation>> {
        let mut errs = Vec::new();
        let mut node_index = BTreeMap::new();

        for (i, n) in nodes.iter().enumerate() {
            let field = format!("topology.nodes[{i}].id");
            if !valid_id(&n.id) {
                errs.push(Violation::constraint(
                    field,
                    format!("`{}` must be non-empty and use only [A-Za-z0-9_.:-]", n.id),
                ));
            } else if node_index.insert(n.id.clone(), NodeIdx(i)).is_some() {
                errs.push(Violation::constraint(field, format!("duplicate node id `{}`", n.id)));
            }
            if !(n.cache_capacity_bits >= 0.0 && n.cache_capacity_bits.is_finite()) {
                errs.push(Violation::constraint(
                    format!("topology.nodes[{i}].cache_capacity_bits"),
                    "must be a finite value >= 0",
                ));
            }
        }

        let origins: Vec<usize> =
            nodes.iter().enumerate().filter(|(_, n)| n.tier == Tier::Origin).map(|(i, _)| i).collect();
        if origins.len() != 1 {
            errs.push(Violation::constraint(
                "topology.nodes",
                format!("exactly one origin node required, found {}", origins.len()),
            ));
        }
        if !nodes.iter().any(|n| n.tier == Tier::Edge) {
            errs.push(Violation::constraint("topology.nodes", "at least one edge node required"));
        }

        let mut parents = vec![None; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            let field = format!("topology.nodes[{i}].parent");
            match (n.tier, &n.parent) {
                (Tier::Origin, Some(_)) => errs.push(Violation::constraint(field, "the origin must not have a parent")),
                (Tier::Origin, None) => {}
                (_, None) => errs.push(Violation::constraint(field, "required for non-origin nodes")),
                (_, Some(p)) => match node_index.get(p) {
                    None => errs.push(Violation::dangling(field, format!("unknown node `{p}`"))),
                    Some(&pi) => {
                        if nodes[pi.0].tier == Tier::Edge {
                            errs.push(Violation::constraint(field, format!("edge node `{p}` cannot have children")));
                        }
                        parents[i] = Some(pi);
                    }
                },
            }
        }

        // Every parent chain must reach the origin without revisiting a node.
        if errs.is_empty() {
            for start in 0..nodes.len() {
                let mut seen = vec![false; nodes.len()];
                let mut cur = start;
                while let Some(p) = parents[cur] {
                    if seen[cur] {
                        errs.push(Violation::constraint(
                            format!("topology.nodes[{start}].parent"),
                            "parent links form a cycle",
                        ));
                        break;
                    }
                    seen[cur] = true;
                    cur = p.0;
                }
            }
        }

        let mut cluster_index = BTreeMap::new();
        let mut built_clusters = Vec::with_capacity(clusters.len());
        if clusters.is_empty() {
            errs.push(Violation::constraint("user_space.clusters", "at least one cluster required"));
        }
        for (i, c) in clusters.iter().enumerate() {
            let pre = format!("user_space.clusters[{i}]");
            if !valid_id(&c.id) {
                errs.push(Violation::constraint(
                    format!("{pre}.id"),
                    format!("`{}` must be non-empty and use only [A-Za-z0-9_.:-]", c.id),
                ));
            } else if cluster_index.insert(c.id.clone(), ClusterIdx(i)).is_some() {
                errs.push(Violation::constraint(format!("{pre}.id"), format!("duplicate cluster id `{}`", c.id)));
            }
            let edge = match node_index.get(&c.edge) {
                None => {
                    errs.push(Violation::dangling(format!("{pre}.edge"), format!("unknown node `{}`", c.edge)));
                    None
                }
                Some(&e) if nodes[e.0].tier != Tier::Edge => {
                    errs.push(Violation::constraint(
                        format!("{pre}.edge"),
                        format!("node `{}` is not an edge node", c.edge),
                    ));
                    None
                }
                Some(&e) => Some(e),
            };
            if c.user_count < 1 {
                errs.push(Violation::constraint(format!("{pre}.user_count"), "must be >= 1"));
            }
            if !(c.request_rate_per_user_per_hr >= 0.0 && c.request_rate_per_user_per_hr.is_finite()) {
                errs.push(Violation::constraint(
                    format!("{pre}.request_rate_per_user_per_hr"),
                    "must be a finite value >= 0",
                ));
            }
            let mut diurnal = [0.0; 24];
            if c.diurnal_profile.len() != 24 {
                errs.push(Violation::constraint(
                    format!("{pre}.diurnal_profile"),
                    format!("must have exactly 24 entries, found {}", c.diurnal_profile.len()),
                ));
            } else if c.diurnal_profile.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
                errs.push(Violation::constraint(
                    format!("{pre}.diurnal_profile"),
                    "multipliers must be finite and >= 0",
                ));
            } else if c.diurnal_profile.iter().all(|m| *m == 0.0) {
                errs.push(Violation::constraint(format!("{pre}.diurnal_profile"), "multipliers must not all be zero"));
            } else {
                diurnal.copy_from_slice(&c.diurnal_profile);
            }
            let device_profile = match &c.device_profile {
                None => None,
                Some(name) => match profiles.get(name) {
                    None => {
                        errs.push(Violation::dangling(
                            format!("{pre}.device_profile"),
                            format!("unknown device profile `{name}`"),
                        ));
                        None
                    }
                    Some(p) => Some(p.clone()),
                },
            };
            built_clusters.push(ClientCluster {
                id: c.id.clone(),
                edge: edge.unwrap_or(NodeIdx(0)),
                user_count: c.user_count,
                device_profile_name: c.device_profile.clone(),
                device_profile,
                request_rate_per_user_per_hr: c.request_rate_per_user_per_hr,
                diurnal_profile: diurnal,
                access_hops: c.access_hops,
            });
        }

        if !errs.is_empty() {
            return Err(errs);
        }

        let built_nodes = nodes
            .iter()
            .zip(parents)
            .map(|(n, parent)| CdnNode {
                id: n.id.clone(),
                tier: n.tier,
                parent,
                hop_contribution: n.hop_contribution,
                cache_capacity_bits: n.cache_capacity_bits.floor() as u64,
                cache_policy: n.cache_policy,
            })
            .collect();

        Ok(Topology {
            nodes: built_nodes,
            clusters: built_clusters,
            origin: NodeIdx(origins[0]),
            node_index,
            cluster_index,
        })
    }

    pub fn nodes(&self) -> &[CdnNode] {
        &self.nodes
    }

    pub fn clusters(&self) -> &[ClientCluster] {
        &self.clusters
    }

    pub fn node(&self, idx: NodeIdx) -> &CdnNode {
        &self.nodes[idx.0]
    }

    pub fn cluster(&self, idx: ClusterIdx) -> &ClientCluster {
        &self.clusters[idx.0]
    }

    pub fn origin(&self) -> NodeIdx {
        self.origin
    }

    pub fn node_by_id(&self, id: &str) -> Option<NodeIdx> {
        self.node_index.get(id).copied()
    }

    pub fn cluster_by_id(&self, id: &str) -> Option<ClusterIdx> {
        self.cluster_index.get(id).copied()
    }

    pub fn edge_nodes(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.tier == Tier::Edge).map(|(i, _)| NodeIdx(i))
    }

    pub(crate) fn set_cache_capacity(&mut self, idx: NodeIdx, bits: u64) {
        self.nodes[idx.0].cache_capacity_bits = bits;
    }

    /// Walks from `node` up to the origin, `node` first.
    pub fn root_path(&self, node: NodeIdx) -> RootPath<'_> {
        RootPath { topology: self, next: Some(node) }
    }

    /// Hops from `ancestor` down to `descendant`, or `None` when `ancestor`
    /// is not on the root path of `descendant`.
    pub fn path_hops(&self, ancestor: NodeIdx, descendant: NodeIdx) -> Option<u32> {
        let mut hops = 0u32;
        for n in self.root_path(descendant) {
            if n == ancestor {
                return Some(hops);
            }
            hops += self.nodes[n.0].hop_contribution;
        }
        None
    }

    /// Hops between a serving node and a client cluster: the tree path from
    /// `server` to the cluster's edge node plus the cluster's access hops.
    pub fn hops_to_cluster(&self, server: NodeIdx, cluster: ClusterIdx) -> Option<u32> {
        let c = &self.clusters[cluster.0];
        self.path_hops(server, c.edge).map(|h| h + c.access_hops)
    }

    pub fn hop_count(&self, server: &str, cluster: &str) -> Result<u32, TopologyError> {
        let s = self.node_by_id(server).ok_or_else(|| TopologyError::UnknownNode(server.to_string()))?;
        let c = self.cluster_by_id(cluster).ok_or_else(|| TopologyError::UnknownCluster(cluster.to_string()))?;
        self.hops_to_cluster(s, c)
            .ok_or_else(|| TopologyError::NotOnRootPath { server: server.to_string(), cluster: cluster.to_string() })
    }
}

pub struct RootPath<'a> {
    topology: &'a Topology,
    next: Option<NodeIdx>,
}

impl Iterator for RootPath<'_> {
    type Item = NodeIdx;

    fn next(&mut self) -> Option<NodeIdx> {
        let cur = self.next?;
        self.next = self.topology.nodes[cur.0].parent;
        Some(cur)
    }
}
