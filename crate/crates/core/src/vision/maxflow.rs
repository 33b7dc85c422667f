//! Boykov–Kolmogorov max-flow on a general sparse graph with terminal
//! capacities. Used for the s–t min-cut step of GrabCut.

use std::collections::VecDeque;

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;
const INFINITE_D: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Source,
    Sink,
}

#[derive(Clone, Debug)]
struct Node {
    first: u32,
    parent: u32,
    is_sink: bool,
    active: bool,
    ts: u32,
    dist: u32,
    /// Residual capacity to the sink when negative, from the source when
    /// positive.
    tr_cap: f64,
}

#[derive(Clone, Debug)]
struct Arc {
    head: u32,
    next: u32,
    r_cap: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FlowGraph {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    flow: f64,
    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u32,
}

#[inline]
fn sister(a: u32) -> u32 {
    a ^ 1
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        let node = Node { first: NONE, parent: NONE, is_sink: false, active: false, ts: 0, dist: 0, tr_cap: 0.0 };
        Self { nodes: vec![node; nodes], ..Default::default() }
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        let mut g = Self::new(nodes);
        g.arcs.reserve(2 * edges);
        g
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Adds `i → j` with capacity `cap` and `j → i` with `rev_cap`.
    pub fn add_edge(&mut self, i: usize, j: usize, cap: f64, rev_cap: f64) {
        debug_assert!(i != j && cap >= 0.0 && rev_cap >= 0.0);
        let a = self.arcs.len() as u32;
        self.arcs.push(Arc { head: j as u32, next: self.nodes[i].first, r_cap: cap });
        self.nodes[i].first = a;
        self.arcs.push(Arc { head: i as u32, next: self.nodes[j].first, r_cap: rev_cap });
        self.nodes[j].first = a + 1;
    }

    /// Adds terminal capacities source → i and i → sink.
    pub fn add_tweights(&mut self, i: usize, mut cap_source: f64, mut cap_sink: f64) {
        debug_assert!(cap_source >= 0.0 && cap_sink >= 0.0);
        let delta = self.nodes[i].tr_cap;
        if delta > 0.0 {
            cap_source += delta;
        } else {
            cap_sink -= delta;
        }
        self.flow += cap_source.min(cap_sink);
        self.nodes[i].tr_cap = cap_source - cap_sink;
    }

    fn set_active(&mut self, i: u32) {
        let n = &mut self.nodes[i as usize];
        if !n.active {
            n.active = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            let n = &mut self.nodes[i as usize];
            n.active = false;
            if n.parent != NONE {
                return Some(i);
            }
        }
        None
    }

    /// Runs the max-flow and returns its value (the min-cut capacity).
    pub fn maxflow(&mut self) -> f64 {
        self.active.clear();
        self.orphans.clear();
        self.time = 0;
        for i in 0..self.nodes.len() {
            let n = &mut self.nodes[i];
            n.active = false;
            n.ts = 0;
            if n.tr_cap != 0.0 {
                n.is_sink = n.tr_cap < 0.0;
                n.parent = TERMINAL;
                n.dist = 1;
                self.set_active(i as u32);
            } else {
                n.parent = NONE;
            }
        }
        let mut current: Option<u32> = None;
        loop {
            let i = match current.take() {
                Some(i) if self.nodes[i as usize].parent != NONE => i,
                _ => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };
            let Some(mid) = self.grow(i) else { continue };
            // keep working on this node once the path is augmented
            current = Some(i);
            self.time += 1;
            self.augment(mid);
            self.adopt();
        }
        self.flow
    }

    /// Grows the tree at `i`; returns an arc from the source tree into the
    /// sink tree when the trees touch.
    fn grow(&mut self, i: u32) -> Option<u32> {
        let iu = i as usize;
        let i_sink = self.nodes[iu].is_sink;
        let mut a = self.nodes[iu].first;
        while a != NONE {
            let cap = if i_sink { self.arcs[sister(a) as usize].r_cap } else { self.arcs[a as usize].r_cap };
            if cap > 0.0 {
                let j = self.arcs[a as usize].head;
                let ju = j as usize;
                if self.nodes[ju].parent == NONE {
                    let (ts, dist) = (self.nodes[iu].ts, self.nodes[iu].dist);
                    let nj = &mut self.nodes[ju];
                    nj.is_sink = i_sink;
                    nj.parent = sister(a);
                    nj.ts = ts;
                    nj.dist = dist + 1;
                    self.set_active(j);
                } else if self.nodes[ju].is_sink != i_sink {
                    return Some(if i_sink { sister(a) } else { a });
                } else if self.nodes[ju].ts <= self.nodes[iu].ts && self.nodes[ju].dist > self.nodes[iu].dist {
                    // shorter path to the terminal through i
                    let (ts, dist) = (self.nodes[iu].ts, self.nodes[iu].dist);
                    let nj = &mut self.nodes[ju];
                    nj.parent = sister(a);
                    nj.ts = ts;
                    nj.dist = dist + 1;
                }
            }
            a = self.arcs[a as usize].next;
        }
        None
    }

    fn orphan_front(&mut self, i: u32) {
        self.nodes[i as usize].parent = ORPHAN;
        self.orphans.push_front(i);
    }

    fn orphan_rear(&mut self, i: u32) {
        self.nodes[i as usize].parent = ORPHAN;
        self.orphans.push_back(i);
    }

    fn augment(&mut self, mid: u32) {
        let mut bottleneck = self.arcs[mid as usize].r_cap;
        // source side
        let mut i = self.arcs[sister(mid) as usize].head;
        loop {
            let p = self.nodes[i as usize].parent;
            if p == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[sister(p) as usize].r_cap);
            i = self.arcs[p as usize].head;
        }
        bottleneck = bottleneck.min(self.nodes[i as usize].tr_cap);
        // sink side
        let mut i = self.arcs[mid as usize].head;
        loop {
            let p = self.nodes[i as usize].parent;
            if p == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[p as usize].r_cap);
            i = self.arcs[p as usize].head;
        }
        bottleneck = bottleneck.min(-self.nodes[i as usize].tr_cap);

        self.arcs[sister(mid) as usize].r_cap += bottleneck;
        self.arcs[mid as usize].r_cap -= bottleneck;
        let mut i = self.arcs[sister(mid) as usize].head;
        loop {
            let p = self.nodes[i as usize].parent;
            if p == TERMINAL {
                break;
            }
            self.arcs[p as usize].r_cap += bottleneck;
            self.arcs[sister(p) as usize].r_cap -= bottleneck;
            if self.arcs[sister(p) as usize].r_cap == 0.0 {
                self.orphan_front(i);
            }
            i = self.arcs[p as usize].head;
        }
        self.nodes[i as usize].tr_cap -= bottleneck;
        if self.nodes[i as usize].tr_cap == 0.0 {
            self.orphan_front(i);
        }
        let mut i = self.arcs[mid as usize].head;
        loop {
            let p = self.nodes[i as usize].parent;
            if p == TERMINAL {
                break;
            }
            self.arcs[sister(p) as usize].r_cap += bottleneck;
            self.arcs[p as usize].r_cap -= bottleneck;
            if self.arcs[p as usize].r_cap == 0.0 {
                self.orphan_front(i);
            }
            i = self.arcs[p as usize].head;
        }
        self.nodes[i as usize].tr_cap += bottleneck;
        if self.nodes[i as usize].tr_cap == 0.0 {
            self.orphan_front(i);
        }
        self.flow += bottleneck;
    }

    fn adopt(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            self.process_orphan(i);
        }
    }

    fn process_orphan(&mut self, i: u32) {
        let iu = i as usize;
        let i_sink = self.nodes[iu].is_sink;
        let mut best = NONE;
        let mut d_min = INFINITE_D;
        let mut a0 = self.nodes[iu].first;
        while a0 != NONE {
            let cap = if i_sink { self.arcs[a0 as usize].r_cap } else { self.arcs[sister(a0) as usize].r_cap };
            let j = self.arcs[a0 as usize].head;
            if cap > 0.0 && self.nodes[j as usize].is_sink == i_sink && self.nodes[j as usize].parent != NONE {
                // distance from j to its terminal, if j still has one
                let mut d = 0u32;
                let mut k = j;
                loop {
                    let nk = &self.nodes[k as usize];
                    if nk.ts == self.time {
                        d = d.saturating_add(nk.dist);
                        break;
                    }
                    let p = nk.parent;
                    d += 1;
                    if p == TERMINAL {
                        let time = self.time;
                        let nk = &mut self.nodes[k as usize];
                        nk.ts = time;
                        nk.dist = 1;
                        break;
                    }
                    if p == ORPHAN {
                        d = INFINITE_D;
                        break;
                    }
                    k = self.arcs[p as usize].head;
                }
                if d < INFINITE_D {
                    if d < d_min {
                        best = a0;
                        d_min = d;
                    }
                    let mut k = j;
                    while self.nodes[k as usize].ts != self.time {
                        let time = self.time;
                        let nk = &mut self.nodes[k as usize];
                        nk.ts = time;
                        nk.dist = d;
                        d -= 1;
                        k = self.arcs[nk.parent as usize].head;
                    }
                }
            }
            a0 = self.arcs[a0 as usize].next;
        }
        if best != NONE {
            let time = self.time;
            let n = &mut self.nodes[iu];
            n.parent = best;
            n.ts = time;
            n.dist = d_min + 1;
            return;
        }
        // no parent: i becomes free and its children are orphaned
        let mut a0 = self.nodes[iu].first;
        while a0 != NONE {
            let j = self.arcs[a0 as usize].head;
            let nj_parent = self.nodes[j as usize].parent;
            if self.nodes[j as usize].is_sink == i_sink && nj_parent != NONE {
                let cap = if i_sink { self.arcs[a0 as usize].r_cap } else { self.arcs[sister(a0) as usize].r_cap };
                if cap > 0.0 {
                    self.set_active(j);
                }
                if nj_parent != TERMINAL && nj_parent != ORPHAN && self.arcs[nj_parent as usize].head == i {
                    self.orphan_rear(j);
                }
            }
            a0 = self.arcs[a0 as usize].next;
        }
        self.nodes[iu].parent = NONE;
    }

    /// Side of the minimum cut after [`maxflow`](Self::maxflow). Nodes
    /// reachable from the source in the residual graph are `Source`; all
    /// others are `Sink`.
    pub fn segment(&self, i: usize) -> Segment {
        let n = &self.nodes[i];
        if n.parent != NONE && !n.is_sink {
            Segment::Source
        } else {
            Segment::Sink
        }
    }
}
