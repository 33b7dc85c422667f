use std::cmp::Ordering;
use std::collections::HashMap;

use super::{to_utm, to_utm_in_zone, GeoError, Hemisphere, UtmPoint, Vec2};
use crate::osm::{NodeId, OsmGraph, WayId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexEntry {
    pub node: NodeId,
    pub way: WayId,
    pub position: usize,
    pub point: Vec2,
}

impl IndexEntry {
    fn key(&self) -> (NodeId, WayId, usize) {
        (self.node, self.way, self.position)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nearest {
    pub entry: IndexEntry,
    pub distance: f64,
}

/// Static 2-D tree over the UTM positions of every highway way node. One
/// entry per (way, position) membership.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    zone: u8,
    hemisphere: Hemisphere,
    // kd-ordered: each subslice's middle element splits on axis depth % 2
    entries: Vec<IndexEntry>,
    positions: HashMap<NodeId, Vec2>,
}

impl SpatialIndex {
    /// Builds the index over all highway ways. All such nodes must fall in
    /// one UTM zone.
    pub fn build(graph: &OsmGraph) -> Result<Self, GeoError> {
        let mut zone: Option<(u8, Hemisphere)> = None;
        for way in graph.ways().values().filter(|w| w.is_highway()) {
            for id in &way.node_refs {
                let n = &graph.nodes()[id];
                let p = to_utm(n.lat, n.lon)?;
                match zone {
                    None => zone = Some(p.zone_key()),
                    Some(z) if z != p.zone_key() => return Err(GeoError::ZoneMismatch(z, p.zone_key())),
                    _ => {}
                }
            }
        }
        let Some((zone, hemisphere)) = zone else {
            return Ok(Self::from_entries(1, Hemisphere::North, Vec::new()));
        };
        Self::build_in_zone(graph, zone, hemisphere)
    }

    /// Builds the index projecting every node into the given zone.
    pub fn build_in_zone(graph: &OsmGraph, zone: u8, hemisphere: Hemisphere) -> Result<Self, GeoError> {
        let mut projected: HashMap<NodeId, Vec2> = HashMap::new();
        let mut entries = Vec::new();
        for way in graph.ways().values().filter(|w| w.is_highway()) {
            for (position, &node) in way.node_refs.iter().enumerate() {
                let point = match projected.get(&node) {
                    Some(p) => *p,
                    None => {
                        let n = &graph.nodes()[&node];
                        let p = to_utm_in_zone(n.lat, n.lon, zone, hemisphere)?.xy();
                        projected.insert(node, p);
                        p
                    }
                };
                entries.push(IndexEntry { node, way: way.id, position, point });
            }
        }
        Ok(Self::from_entries(zone, hemisphere, entries))
    }

    /// Builds the index from caller-supplied planar positions instead of
    /// projecting node coordinates (synthetic maps, pre-projected data).
    pub fn with_positions(
        graph: &OsmGraph,
        zone: u8,
        hemisphere: Hemisphere,
        positions: &HashMap<NodeId, Vec2>,
    ) -> Result<Self, GeoError> {
        let mut entries = Vec::new();
        for way in graph.ways().values().filter(|w| w.is_highway()) {
            for (position, &node) in way.node_refs.iter().enumerate() {
                let point = *positions.get(&node).ok_or(GeoError::MissingPosition(node))?;
                entries.push(IndexEntry { node, way: way.id, position, point });
            }
        }
        Ok(Self::from_entries(zone, hemisphere, entries))
    }

    pub fn from_entries(zone: u8, hemisphere: Hemisphere, mut entries: Vec<IndexEntry>) -> Self {
        let positions = entries.iter().map(|e| (e.node, e.point)).collect();
        build_tree(&mut entries, 0);
        Self { zone, hemisphere, entries, positions }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn zone(&self) -> (u8, Hemisphere) {
        (self.zone, self.hemisphere)
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    /// Planar position of an indexed node.
    pub fn position(&self, node: NodeId) -> Option<Vec2> {
        self.positions.get(&node).copied()
    }

    pub fn utm(&self, node: NodeId) -> Option<UtmPoint> {
        self.position(node).map(|p| UtmPoint::new(p.x, p.y, self.zone, self.hemisphere))
    }

    fn check_zone(&self, p: &UtmPoint) -> Result<(), GeoError> {
        if p.zone_key() != self.zone() {
            return Err(GeoError::ZoneMismatch(self.zone(), p.zone_key()));
        }
        Ok(())
    }

    /// Entry closest to `p`; ties go to the smallest node id, then way id
    /// and position.
    pub fn nearest_way_node(&self, p: &UtmPoint) -> Result<Nearest, GeoError> {
        self.check_zone(p)?;
        let mut best: Option<(f64, IndexEntry)> = None;
        search(&self.entries, 0, p.xy(), &mut best);
        let (d2, entry) = best.ok_or(GeoError::EmptyIndex)?;
        Ok(Nearest { entry, distance: d2.sqrt() })
    }

    /// All entries within `radius` of `p`, in tree order.
    pub fn within_radius(&self, p: &UtmPoint, radius: f64) -> Result<Vec<IndexEntry>, GeoError> {
        self.check_zone(p)?;
        let mut out = Vec::new();
        range(&self.entries, 0, p.xy(), radius * radius, &mut out);
        Ok(out)
    }
}

fn axis(p: Vec2, depth: usize) -> f64 {
    if depth.is_multiple_of(2) {
        p.x
    } else {
        p.y
    }
}

fn build_tree(entries: &mut [IndexEntry], depth: usize) {
    if entries.len() <= 1 {
        return;
    }
    let mid = entries.len() / 2;
    entries.select_nth_unstable_by(mid, |a, b| {
        axis(a.point, depth).total_cmp(&axis(b.point, depth)).then_with(|| a.key().cmp(&b.key()))
    });
    let (left, right) = entries.split_at_mut(mid);
    build_tree(left, depth + 1);
    build_tree(&mut right[1..], depth + 1);
}

fn better(d2: f64, e: &IndexEntry, best: &Option<(f64, IndexEntry)>) -> bool {
    match best {
        None => true,
        Some((bd, be)) => match d2.total_cmp(bd) {
            Ordering::Less => true,
            Ordering::Equal => e.key() < be.key(),
            Ordering::Greater => false,
        },
    }
}

fn search(entries: &[IndexEntry], depth: usize, q: Vec2, best: &mut Option<(f64, IndexEntry)>) {
    if entries.is_empty() {
        return;
    }
    let mid = entries.len() / 2;
    let e = &entries[mid];
    let d2 = (e.point - q).norm_sq();
    if better(d2, e, best) {
        *best = Some((d2, *e));
    }
    let diff = axis(q, depth) - axis(e.point, depth);
    let (near, far) =
        if diff < 0.0 { (&entries[..mid], &entries[mid + 1..]) } else { (&entries[mid + 1..], &entries[..mid]) };
    search(near, depth + 1, q, best);
    // equal distance to the plane may still hide a smaller-id tie
    if best.is_none_or(|(bd, _)| diff * diff <= bd) {
        search(far, depth + 1, q, best);
    }
}

fn range(entries: &[IndexEntry], depth: usize, q: Vec2, r2: f64, out: &mut Vec<IndexEntry>) {
    if entries.is_empty() {
        return;
    }
    let mid = entries.len() / 2;
    let e = &entries[mid];
    if (e.point - q).norm_sq() <= r2 {
        out.push(*e);
    }
    let diff = axis(q, depth) - axis(e.point, depth);
    if diff <= 0.0 || diff * diff <= r2 {
        range(&entries[..mid], depth + 1, q, r2, out);
    }
    if diff >= 0.0 || diff * diff <= r2 {
        range(&entries[mid + 1..], depth + 1, q, r2, out);
    }
}
