//! OpenStreetMap XML extracts parsed into an in-memory road graph.
//!
//! Only `node`, `way`, `relation`, `tag`, `nd` and `member` elements are
//! read; everything else in the document is skipped. Ways whose node
//! references cannot be resolved (common in bounding-box clipped extracts)
//! are dropped and counted in the [`ParseReport`].

use std::collections::{BTreeMap, HashMap};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

pub type NodeId = i64;
pub type WayId = i64;
pub type RelationId = i64;
pub type Tags = BTreeMap<String, String>;

#[derive(Debug, Error)]
pub enum OsmError {
    #[error("malformed OSM XML: {0}")]
    MalformedXml(String),
    #[error("{element} is missing required attribute `{attr}`")]
    MissingAttribute { element: &'static str, attr: &'static str },
    #[error("invalid value `{value}` for attribute `{attr}`")]
    InvalidAttribute { attr: &'static str, value: String },
    #[error("duplicate {0} id {1}")]
    DuplicateId(&'static str, i64),
    #[error("node {id} has out-of-range coordinates ({lat}, {lon})")]
    CoordinateOutOfRange { id: NodeId, lat: f64, lon: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OsmNode {
    pub id: NodeId,
    pub lat: f64,
    pub lon: f64,
    pub tags: Tags,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OsmWay {
    pub id: WayId,
    pub node_refs: Vec<NodeId>,
    pub tags: Tags,
}

impl OsmWay {
    pub fn is_highway(&self) -> bool {
        self.tags.contains_key("highway")
    }

    pub fn is_closed(&self) -> bool {
        self.node_refs.len() > 2 && self.node_refs.first() == self.node_refs.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemberKind {
    Node,
    Way,
    Relation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub kind: MemberKind,
    pub ref_id: i64,
    pub role: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OsmRelation {
    pub id: RelationId,
    pub members: Vec<Member>,
    pub tags: Tags,
}

/// A way membership of a node: the way and the slot in its `node_refs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WaySlot {
    pub way: WayId,
    pub position: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OsmGraph {
    nodes: BTreeMap<NodeId, OsmNode>,
    ways: BTreeMap<WayId, OsmWay>,
    relations: BTreeMap<RelationId, OsmRelation>,
    way_node_index: HashMap<NodeId, Vec<WaySlot>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub nodes: usize,
    pub ways: usize,
    pub relations: usize,
    /// Ways dropped because a node reference did not resolve or fewer than
    /// two references remained.
    pub dropped_ways: Vec<WayId>,
    pub empty_extract: bool,
}

impl OsmGraph {
    /// Builds a graph from already-constructed elements. Ways with
    /// unresolvable references are dropped and returned.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = OsmNode>,
        ways: impl IntoIterator<Item = OsmWay>,
        relations: impl IntoIterator<Item = OsmRelation>,
    ) -> (Self, Vec<WayId>) {
        let nodes: BTreeMap<_, _> = nodes.into_iter().map(|n| (n.id, n)).collect();
        let mut kept = BTreeMap::new();
        let mut dropped = Vec::new();
        for way in ways {
            let resolved = way.node_refs.len() >= 2 && way.node_refs.iter().all(|r| nodes.contains_key(r));
            if resolved {
                kept.insert(way.id, way);
            } else {
                dropped.push(way.id);
            }
        }
        dropped.sort_unstable();
        let mut way_node_index: HashMap<NodeId, Vec<WaySlot>> = HashMap::new();
        for way in kept.values() {
            for (position, &node) in way.node_refs.iter().enumerate() {
                way_node_index.entry(node).or_default().push(WaySlot { way: way.id, position });
            }
        }
        let graph = OsmGraph {
            nodes,
            ways: kept,
            relations: relations.into_iter().map(|r| (r.id, r)).collect(),
            way_node_index,
        };
        (graph, dropped)
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, OsmNode> {
        &self.nodes
    }

    pub fn ways(&self) -> &BTreeMap<WayId, OsmWay> {
        &self.ways
    }

    pub fn relations(&self) -> &BTreeMap<RelationId, OsmRelation> {
        &self.relations
    }

    pub fn node(&self, id: NodeId) -> Option<&OsmNode> {
        self.nodes.get(&id)
    }

    pub fn way(&self, id: WayId) -> Option<&OsmWay> {
        self.ways.get(&id)
    }

    /// Every (way, position) slot holding `node`, ordered by way id then position.
    pub fn memberships(&self, node: NodeId) -> &[WaySlot] {
        self.way_node_index.get(&node).map_or(&[], Vec::as_slice)
    }

    /// Memberships restricted to highway-tagged ways.
    pub fn highway_memberships(&self, node: NodeId) -> impl Iterator<Item = WaySlot> + '_ {
        self.memberships(node).iter().copied().filter(|s| self.ways[&s.way].is_highway())
    }

    pub fn way_node_index(&self) -> &HashMap<NodeId, Vec<WaySlot>> {
        &self.way_node_index
    }
}

/// Ids of ways carrying a `highway` tag, ascending.
pub fn highway_ways(graph: &OsmGraph) -> Vec<WayId> {
    graph.ways.values().filter(|w| w.is_highway()).map(|w| w.id).collect()
}

enum Pending {
    Node(OsmNode),
    Way(OsmWay),
    Relation(OsmRelation),
}

impl Pending {
    fn tags_mut(&mut self) -> &mut Tags {
        match self {
            Pending::Node(n) => &mut n.tags,
            Pending::Way(w) => &mut w.tags,
            Pending::Relation(r) => &mut r.tags,
        }
    }
}

fn attr(e: &BytesStart<'_>, element: &'static str, name: &'static str) -> Result<Option<String>, OsmError> {
    for a in e.attributes() {
        let a = a.map_err(|err| OsmError::MalformedXml(err.to_string()))?;
        if a.key.as_ref() == name.as_bytes() {
            let v = a.unescape_value().map_err(|err| OsmError::MalformedXml(format!("{element}: {err}")))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &BytesStart<'_>, element: &'static str, name: &'static str) -> Result<String, OsmError> {
    attr(e, element, name)?.ok_or(OsmError::MissingAttribute { element, attr: name })
}

fn parse_num<T: std::str::FromStr>(attr: &'static str, value: String) -> Result<T, OsmError> {
    value.trim().parse().map_err(|_| OsmError::InvalidAttribute { attr, value })
}

struct Collector {
    nodes: Vec<OsmNode>,
    ways: Vec<OsmWay>,
    relations: Vec<OsmRelation>,
    pending: Option<Pending>,
}

impl Collector {
    fn open(&mut self, e: &BytesStart<'_>) -> Result<(), OsmError> {
        match e.name().as_ref() {
            b"node" => {
                let id = parse_num("id", required(e, "node", "id")?)?;
                let lat: f64 = parse_num("lat", required(e, "node", "lat")?)?;
                let lon: f64 = parse_num("lon", required(e, "node", "lon")?)?;
                if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                    return Err(OsmError::CoordinateOutOfRange { id, lat, lon });
                }
                self.pending = Some(Pending::Node(OsmNode { id, lat, lon, tags: Tags::new() }));
            }
            b"way" => {
                let id = parse_num("id", required(e, "way", "id")?)?;
                self.pending = Some(Pending::Way(OsmWay { id, node_refs: Vec::new(), tags: Tags::new() }));
            }
            b"relation" => {
                let id = parse_num("id", required(e, "relation", "id")?)?;
                self.pending = Some(Pending::Relation(OsmRelation { id, members: Vec::new(), tags: Tags::new() }));
            }
            b"tag" => {
                if let Some(p) = self.pending.as_mut() {
                    let k = required(e, "tag", "k")?;
                    let v = required(e, "tag", "v")?;
                    p.tags_mut().insert(k, v);
                }
            }
            b"nd" => {
                if let Some(Pending::Way(w)) = self.pending.as_mut() {
                    w.node_refs.push(parse_num("ref", required(e, "nd", "ref")?)?);
                }
            }
            b"member" => {
                if let Some(Pending::Relation(r)) = self.pending.as_mut() {
                    let kind = match required(e, "member", "type")?.as_str() {
                        "node" => MemberKind::Node,
                        "way" => MemberKind::Way,
                        "relation" => MemberKind::Relation,
                        other => return Err(OsmError::InvalidAttribute { attr: "type", value: other.to_string() }),
                    };
                    let ref_id = parse_num("ref", required(e, "member", "ref")?)?;
                    let role = attr(e, "member", "role")?.unwrap_or_default();
                    r.members.push(Member { kind, ref_id, role });
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn close(&mut self, name: &[u8]) {
        if !matches!(name, b"node" | b"way" | b"relation") {
            return;
        }
        match self.pending.take() {
            Some(Pending::Node(n)) => self.nodes.push(n),
            Some(Pending::Way(w)) => self.ways.push(w),
            Some(Pending::Relation(r)) => self.relations.push(r),
            None => {}
        }
    }
}

fn check_unique<T>(items: &[T], kind: &'static str, id: impl Fn(&T) -> i64) -> Result<(), OsmError> {
    let mut ids: Vec<i64> = items.iter().map(id).collect();
    ids.sort_unstable();
    match ids.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(OsmError::DuplicateId(kind, w[0])),
        None => Ok(()),
    }
}

/// Parses an OSM XML v0.6 document.
pub fn parse_osm(xml: &[u8]) -> Result<(OsmGraph, ParseReport), OsmError> {
    let mut reader = Reader::from_reader(xml);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut depth = 0usize;
    let mut saw_root = false;
    let mut c = Collector { nodes: Vec::new(), ways: Vec::new(), relations: Vec::new(), pending: None };
    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| OsmError::MalformedXml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Start(e) => {
                if depth == 0 {
                    expect_root(&e, &mut saw_root)?;
                } else {
                    c.open(&e)?;
                }
                depth += 1;
            }
            Event::Empty(e) => {
                if depth == 0 {
                    expect_root(&e, &mut saw_root)?;
                } else {
                    c.open(&e)?;
                    c.close(e.name().as_ref());
                }
            }
            Event::End(e) => {
                depth = depth.saturating_sub(1);
                c.close(e.name().as_ref());
            }
            Event::Text(t) if depth == 0 && !t.as_ref().iter().all(u8::is_ascii_whitespace) => {
                return Err(OsmError::MalformedXml("text outside the root element".into()));
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !saw_root {
        return Err(OsmError::MalformedXml("no <osm> root element".into()));
    }
    if depth != 0 {
        return Err(OsmError::MalformedXml("unexpected end of document".into()));
    }
    check_unique(&c.nodes, "node", |n| n.id)?;
    check_unique(&c.ways, "way", |w| w.id)?;
    check_unique(&c.relations, "relation", |r| r.id)?;

    let (graph, dropped_ways) = OsmGraph::from_parts(c.nodes, c.ways, c.relations);
    let report = ParseReport {
        nodes: graph.nodes.len(),
        ways: graph.ways.len(),
        relations: graph.relations.len(),
        empty_extract: graph.nodes.is_empty(),
        dropped_ways,
    };
    if report.empty_extract {
        log::warn!("OSM extract contains no nodes");
    }
    if !report.dropped_ways.is_empty() {
        log::warn!("dropped {} ways with unresolved node references", report.dropped_ways.len());
    }
    Ok((graph, report))
}

fn expect_root(e: &BytesStart<'_>, saw_root: &mut bool) -> Result<(), OsmError> {
    if *saw_root || e.name().as_ref() != b"osm" {
        return Err(OsmError::MalformedXml("expected a single top-level <osm> element".into()));
    }
    *saw_root = true;
    Ok(())
}
