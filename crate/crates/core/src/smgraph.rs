//! Per-trajectory stop graphs. Each distinct PoI geometry an object stopped
//! at becomes a node carrying its stop intervals; consecutive stops become
//! edges. The label-collapsed variant merges nodes of the same dimension.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::GeometryId;
use crate::moft::ObjectId;
use crate::olap::Olap;
use crate::stops::SmMoft;
use crate::temporal::{Interval, TemporalElement, TemporalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("object {0} has no stops")]
    UnknownObject(ObjectId),
    #[error("geometry {0} is not mapped to any PoI member")]
    UnresolvedGeometry(GeometryId),
    #[error("object {oid}: {source}")]
    Inconsistent { oid: ObjectId, source: TemporalError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmNode {
    pub number: usize,
    pub gid: GeometryId,
    /// PoI member owning the geometry.
    pub extent: String,
    /// Name of the PoI's dimension.
    pub dimension: String,
    /// Short dimension label used by queries.
    pub label: String,
    pub ste: TemporalElement,
}

/// Edge between the nodes of two consecutive stops, tagged with both stop
/// intervals so parallel edges stay distinguishable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmEdge {
    pub from: usize,
    pub to: usize,
    pub from_interval: Interval,
    pub to_interval: Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmGraph {
    oid: ObjectId,
    nodes: Vec<SmNode>,
    edges: Vec<SmEdge>,
}

/// One stop of the unfolded sequence, annotated for matching.
#[derive(Debug, Clone, PartialEq)]
pub struct StopEvent {
    pub gid: GeometryId,
    pub extent: String,
    pub dimension: String,
    pub label: String,
    pub interval: Interval,
}

impl SmGraph {
    pub fn empty(oid: ObjectId) -> Self {
        SmGraph { oid, nodes: Vec::new(), edges: Vec::new() }
    }

    /// Builds the graph of `oid` from its SM-MOFT records. Nodes are
    /// numbered in order of first visit.
    pub fn build(sm: &SmMoft, oid: &ObjectId, olap: &Olap) -> Result<Self, GraphError> {
        let records = sm.select(oid);
        if records.is_empty() {
            return Err(GraphError::UnknownObject(oid.clone()));
        }
        let mut nodes: Vec<SmNode> = Vec::new();
        let mut by_gid: BTreeMap<&GeometryId, usize> = BTreeMap::new();
        let mut edges = Vec::with_capacity(records.len() - 1);
        let mut prev: Option<(usize, Interval)> = None;
        for r in records {
            let n = match by_gid.get(&r.gid) {
                Some(&n) => n,
                None => {
                    let (dim, member) = olap
                        .resolve_geometry(&r.gid)
                        .ok_or_else(|| GraphError::UnresolvedGeometry(r.gid.clone()))?;
                    let n = nodes.len();
                    nodes.push(SmNode {
                        number: n,
                        gid: r.gid.clone(),
                        extent: member.to_owned(),
                        dimension: dim.name().to_owned(),
                        label: dim.label().to_owned(),
                        ste: TemporalElement::new(),
                    });
                    by_gid.insert(&r.gid, n);
                    n
                }
            };
            nodes[n]
                .ste
                .push(r.interval)
                .map_err(|source| GraphError::Inconsistent { oid: oid.clone(), source })?;
            if let Some((p, pi)) = prev {
                edges.push(SmEdge { from: p, to: n, from_interval: pi, to_interval: r.interval });
            }
            prev = Some((n, r.interval));
        }
        Ok(SmGraph { oid: oid.clone(), nodes, edges })
    }

    pub fn oid(&self) -> &ObjectId {
        &self.oid
    }

    pub fn nodes(&self) -> &[SmNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[SmEdge] {
        &self.edges
    }

    pub fn node_by_gid(&self, gid: &GeometryId) -> Option<&SmNode> {
        self.nodes.iter().find(|n| &n.gid == gid)
    }

    /// The stops in temporal order.
    pub fn unfold(&self) -> Vec<(GeometryId, Interval)> {
        self.stop_sequence().into_iter().map(|e| (e.gid, e.interval)).collect()
    }

    /// The stops in temporal order with their OLAP annotations.
    pub fn stop_sequence(&self) -> Vec<StopEvent> {
        let mut seq: Vec<StopEvent> = self
            .nodes
            .iter()
            .flat_map(|n| {
                n.ste.intervals().iter().map(move |i| StopEvent {
                    gid: n.gid.clone(),
                    extent: n.extent.clone(),
                    dimension: n.dimension.clone(),
                    label: n.label.clone(),
                    interval: *i,
                })
            })
            .collect();
        // intervals of one object never overlap, so start order is total
        seq.sort_by(|a, b| a.interval.start().total_cmp(&b.interval.start()));
        seq
    }

    /// Collapses nodes sharing a dimension label.
    pub fn to_asm(&self) -> AsmGraph {
        let mut nodes: Vec<AsmNode> = Vec::new();
        let mut by_label: BTreeMap<&str, usize> = BTreeMap::new();
        let mut remap = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let k = *by_label.entry(n.label.as_str()).or_insert_with(|| {
                nodes.push(AsmNode {
                    number: nodes.len(),
                    label: n.label.clone(),
                    members: Vec::new(),
                    intervals: Vec::new(),
                });
                nodes.len() - 1
            });
            nodes[k].members.push(n.extent.clone());
            nodes[k].intervals.extend_from_slice(n.ste.intervals());
            remap.push(k);
        }
        for n in &mut nodes {
            n.intervals.sort_by(|a, b| a.start().total_cmp(&b.start()));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| SmEdge { from: remap[e.from], to: remap[e.to], ..*e })
            .collect();
        AsmGraph { oid: self.oid.clone(), nodes, edges }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsmNode {
    pub number: usize,
    pub label: String,
    /// Extents of the merged nodes, in node-number order.
    pub members: Vec<String>,
    pub intervals: Vec<Interval>,
}

/// SM-Graph with node identity coarsened to the dimension label.
#[derive(Debug, Clone, PartialEq)]
pub struct AsmGraph {
    oid: ObjectId,
    nodes: Vec<AsmNode>,
    edges: Vec<SmEdge>,
}

impl AsmGraph {
    pub fn oid(&self) -> &ObjectId {
        &self.oid
    }

    pub fn nodes(&self) -> &[AsmNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[SmEdge] {
        &self.edges
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn intervals_text(intervals: &[Interval]) -> String {
    intervals.iter().map(Interval::to_string).collect::<Vec<_>>().join(" ")
}

fn write_edges(out: &mut String, edges: &[SmEdge]) {
    for e in edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label={}];",
            e.from,
            e.to,
            quote(&format!("{} -> {}", e.from_interval, e.to_interval))
        );
    }
}

/// Graphviz text for graphs; output depends only on the graph.
pub trait ToDot {
    fn to_dot(&self) -> String;
}

impl ToDot for SmGraph {
    fn to_dot(&self) -> String {
        let mut out = format!("digraph {} {{\n", quote(&format!("SM {}", self.oid)));
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "  n{} [label={}, extent={}, dim={}, ste={}];",
                n.number,
                quote(n.gid.as_str()),
                quote(&n.extent),
                quote(&n.label),
                quote(&intervals_text(n.ste.intervals()))
            );
        }
        write_edges(&mut out, &self.edges);
        out.push_str("}\n");
        out
    }
}

impl ToDot for AsmGraph {
    fn to_dot(&self) -> String {
        let mut out = format!("digraph {} {{\n", quote(&format!("ASM {}", self.oid)));
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "  n{} [label={}, extents={}, ste={}];",
                n.number,
                quote(&n.label),
                quote(&n.members.join(" ")),
                quote(&intervals_text(&n.intervals))
            );
        }
        write_edges(&mut out, &self.edges);
        out.push_str("}\n");
        out
    }
}

pub fn export_dot(g: &impl ToDot) -> String {
    g.to_dot()
}
