//! Consistency of ALCQIb knowledge bases with a completion-graph tableau.
//!
//! Nodes for individuals form an arbitrary graph; every other node hangs in a
//! tree below one of them. Edge labels are closed-world sets of roles, so a
//! boolean role expression holds on an edge iff its literals evaluate to true
//! by membership. Termination comes from pairwise blocking.
//!
//! Axioms `A ⊑ C` and `⊤ ⊑ ¬A₁ ⊔ … ⊔ ¬Aₙ ⊔ C` are unfolded lazily when the
//! atoms appear in a label; every other axiom is added to every node.
//! Backtracking is dependency-directed: each fact records the branch points
//! it depends on, and a clash that does not depend on the current choice
//! skips that choice's remaining alternatives.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use crate::dl::{Concept, Name, Role};
use crate::error::{Error, Result};
use crate::syntax::print_concept;
use crate::translate::{AAssertion, AConcept, AlcqibKb, BoolRole, RoleClause};

type NodeId = usize;
type CId = usize;
type RId = usize;

/// Limits of one consistency check; exceeding one is a resource limit, not
/// a verdict.
#[derive(Clone, Debug)]
pub struct TableauConfig {
    pub max_nodes: usize,
    pub max_branches: usize,
    pub timeout: Option<Duration>,
    pub trace: bool,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig { max_nodes: 5_000_000, max_branches: 5_000_000, timeout: None, trace: false }
    }
}

/// Result of a consistency check.
#[derive(Clone, Debug)]
pub struct Consistency {
    pub consistent: bool,
    /// Directly blocked nodes in the complete, clash-free graph.
    pub blocked_nodes: usize,
    /// Live nodes in the complete, clash-free graph.
    pub final_nodes: usize,
    pub nodes_created: usize,
    pub branches: usize,
    /// One line per rule application when tracing is on.
    pub trace: Vec<String>,
}

/// `true` iff `kb` has a model.
pub fn is_consistent(kb: &AlcqibKb) -> Result<bool> {
    Ok(check(kb, &TableauConfig::default())?.consistent)
}

/// Satisfiability of a concept w.r.t. a TBox.
pub fn is_satisfiable(c: &AConcept, tbox: &[(AConcept, AConcept)], cfg: &TableauConfig) -> Result<bool> {
    let kb = AlcqibKb {
        tbox: tbox.to_vec(),
        abox: vec![AAssertion::Instance(crate::dl::name("_c"), c.clone())],
        clauses: vec![],
    };
    Ok(check(&kb, cfg)?.consistent)
}

/// Evaluates a role expression on a closed-world edge label.
pub fn eval_role_expr(w: &BoolRole, edge: &BTreeSet<Role>) -> bool {
    w.eval(&|r| edge.contains(r))
}

/// Runs the tableau.
pub fn check(kb: &AlcqibKb, cfg: &TableauConfig) -> Result<Consistency> {
    let table = Table::new(kb);
    let mut run = Run {
        table: &table,
        kb,
        cfg,
        start: Instant::now(),
        nodes_created: 0,
        branches: 0,
        trace: cfg.trace.then(Vec::new),
    };
    let g = Graph::initial(&mut run);
    let outcome = search(&mut run, g, 0)?;
    let (consistent, blocked_nodes, final_nodes) = match &outcome {
        Outcome::Sat(g) => {
            let status = g.statuses();
            let live = g.nodes.iter().filter(|n| n.alive).count();
            (true, status.iter().filter(|s| **s == Status::Direct).count(), live)
        }
        Outcome::Clash(_) => (false, 0, 0),
    };
    Ok(Consistency {
        consistent,
        blocked_nodes,
        final_nodes,
        nodes_created: run.nodes_created,
        branches: run.branches,
        trace: run.trace.unwrap_or_default(),
    })
}

/// Branch points a fact depends on, as a bit set over branch levels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Dep(Vec<u64>);

impl Dep {
    fn level(k: usize) -> Dep {
        let mut v = vec![0; k / 64 + 1];
        v[k / 64] |= 1 << (k % 64);
        Dep(v)
    }

    fn union(&self, other: &Dep) -> Dep {
        let mut out = self.clone();
        out.add(other);
        out
    }

    fn add(&mut self, other: &Dep) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn contains(&self, k: usize) -> bool {
        self.0.get(k / 64).is_some_and(|w| w & (1 << (k % 64)) != 0)
    }

    fn without(&self, k: usize) -> Dep {
        let mut out = self.clone();
        if let Some(w) = out.0.get_mut(k / 64) {
            *w &= !(1 << (k % 64));
        }
        out
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Top,
    Bottom,
    Atom(Name),
    Neg(Name),
    And(Vec<CId>),
    Or(Vec<CId>),
    All(RId, CId),
    AtLeast(u64, RId, CId),
    AtMost(u64, RId, CId),
}

/// Interned concepts and role expressions plus the absorbed TBox.
struct Table {
    concepts: Vec<AConcept>,
    kinds: Vec<Kind>,
    ids: HashMap<AConcept, CId>,
    negation: HashMap<CId, CId>,
    roles: Vec<Vec<RoleClause>>,
    role_ids: HashMap<BoolRole, RId>,
    atoms: HashMap<Name, CId>,
    neg_atoms: HashMap<Name, CId>,
    /// For an atom `A`: the other atoms required and the concept to add.
    unfold: HashMap<Name, Vec<(Vec<Name>, CId)>>,
    global: Vec<CId>,
    top: CId,
    /// No role expression mentions a negated literal, so every clash only
    /// depends on facts that are present (needed for backjumping).
    positive: bool,
}

impl Table {
    fn new(kb: &AlcqibKb) -> Table {
        let mut t = Table {
            concepts: vec![],
            kinds: vec![],
            ids: HashMap::new(),
            negation: HashMap::new(),
            roles: vec![],
            role_ids: HashMap::new(),
            atoms: HashMap::new(),
            neg_atoms: HashMap::new(),
            unfold: HashMap::new(),
            global: vec![],
            top: 0,
            positive: true,
        };
        t.top = t.intern(&Concept::Top);
        for (lhs, rhs) in &kb.tbox {
            t.axiom(lhs, rhs);
        }
        for a in kb.abox.iter().chain(kb.clauses.iter().flatten().flatten()) {
            if let AAssertion::Instance(_, c) = a {
                t.intern(c);
            }
        }
        t
    }

    fn axiom(&mut self, lhs: &AConcept, rhs: &AConcept) {
        let rhs = rhs.nnf();
        match lhs {
            Concept::Top => self.top_axiom(&rhs),
            Concept::Atomic(a) => self.absorb(vec![a.clone()], &rhs),
            Concept::And(parts) if parts.iter().all(|p| matches!(p, Concept::Atomic(_))) => {
                let atoms = parts.iter().filter_map(|p| if let Concept::Atomic(a) = p { Some(a.clone()) } else { None });
                self.absorb(atoms.collect(), &rhs)
            }
            _ => self.top_axiom(&Concept::or([lhs.neg_nnf(), rhs])),
        }
    }

    fn top_axiom(&mut self, c: &AConcept) {
        let parts: Vec<AConcept> = match c {
            Concept::Or(parts) => parts.clone(),
            other => vec![other.clone()],
        };
        let (negs, rest): (Vec<AConcept>, Vec<AConcept>) =
            parts.into_iter().partition(|p| matches!(p, Concept::Not(a) if matches!(**a, Concept::Atomic(_))));
        if negs.is_empty() {
            let id = self.intern(c);
            if id != self.top && !self.global.contains(&id) {
                self.global.push(id);
            }
            return;
        }
        let atoms = negs
            .into_iter()
            .filter_map(|n| match n {
                Concept::Not(a) => match *a {
                    Concept::Atomic(a) => Some(a),
                    _ => None,
                },
                _ => None,
            })
            .collect();
        self.absorb(atoms, &Concept::or(rest));
    }

    fn absorb(&mut self, atoms: Vec<Name>, rhs: &AConcept) {
        let rhs = self.intern(rhs);
        for a in &atoms {
            self.intern(&Concept::Atomic(a.clone()));
        }
        if rhs == self.top {
            return;
        }
        for (i, a) in atoms.iter().enumerate() {
            let others = atoms.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()).collect();
            self.unfold.entry(a.clone()).or_default().push((others, rhs));
        }
    }

    fn role(&mut self, r: &BoolRole) -> RId {
        if let Some(&id) = self.role_ids.get(r) {
            return id;
        }
        let dnf = r.dnf();
        if dnf.iter().flatten().any(|(_, p)| !p) {
            self.positive = false;
        }
        let id = self.roles.len();
        self.roles.push(dnf);
        self.role_ids.insert(r.clone(), id);
        id
    }

    fn intern(&mut self, c: &AConcept) -> CId {
        if let Some(&id) = self.ids.get(c) {
            return id;
        }
        let kind = match c {
            Concept::Top => Kind::Top,
            Concept::Bottom => Kind::Bottom,
            Concept::And(v) if v.is_empty() => {
                let id = self.intern(&Concept::Top);
                self.ids.insert(c.clone(), id);
                return id;
            }
            Concept::Or(v) if v.is_empty() => {
                let id = self.intern(&Concept::Bottom);
                self.ids.insert(c.clone(), id);
                return id;
            }
            Concept::Atomic(a) => Kind::Atom(a.clone()),
            Concept::Not(inner) => match &**inner {
                Concept::Atomic(a) => Kind::Neg(a.clone()),
                other => {
                    let id = self.intern(&other.neg_nnf());
                    self.ids.insert(c.clone(), id);
                    return id;
                }
            },
            Concept::AtLeast(0, _, _) => {
                let id = self.intern(&Concept::Top);
                self.ids.insert(c.clone(), id);
                return id;
            }
            Concept::Exists(r, d) => {
                let id = self.intern(&Concept::AtLeast(1, r.clone(), d.clone()));
                self.ids.insert(c.clone(), id);
                return id;
            }
            Concept::And(parts) => Kind::And(parts.iter().map(|p| self.intern(p)).collect()),
            Concept::Or(parts) => Kind::Or(parts.iter().map(|p| self.intern(p)).collect()),
            Concept::Forall(r, d) => Kind::All(self.role(r), self.intern(d)),
            Concept::AtLeast(n, r, d) => Kind::AtLeast(*n, self.role(r), self.intern(d)),
            Concept::AtMost(n, r, d) => {
                let filler = self.intern(d);
                let neg = self.intern(&d.neg_nnf());
                self.negation.insert(filler, neg);
                Kind::AtMost(*n, self.role(r), filler)
            }
        };
        let id = self.concepts.len();
        match &kind {
            Kind::Atom(a) => {
                self.atoms.insert(a.clone(), id);
            }
            Kind::Neg(a) => {
                self.neg_atoms.insert(a.clone(), id);
            }
            _ => {}
        }
        self.concepts.push(c.clone());
        self.kinds.push(kind);
        self.ids.insert(c.clone(), id);
        id
    }

    /// The dependencies of the first DNF disjunct that holds on `roles`.
    fn holds(&self, r: RId, roles: &[(Role, Dep)]) -> Option<Dep> {
        'clauses: for clause in &self.roles[r] {
            let mut dep = Dep::default();
            for (role, positive) in clause {
                match (roles.iter().find(|(q, _)| q == role), positive) {
                    (Some((_, d)), true) => dep.add(d),
                    (None, false) => {}
                    _ => continue 'clauses,
                }
            }
            return Some(dep);
        }
        None
    }
}

struct Run<'a> {
    table: &'a Table,
    kb: &'a AlcqibKb,
    cfg: &'a TableauConfig,
    start: Instant,
    nodes_created: usize,
    branches: usize,
    trace: Option<Vec<String>>,
}

impl Run<'_> {
    fn log(&mut self, rule: &str, x: NodeId, c: Option<CId>) {
        if let Some(trace) = &mut self.trace {
            let line = match c {
                Some(c) => format!("{rule} n{x} {}", print_concept(&self.table.concepts[c])),
                None => format!("{rule} n{x}"),
            };
            trace.push(line);
        }
    }

    fn check_limits(&self) -> Result<()> {
        if self.nodes_created > self.cfg.max_nodes {
            return Err(Error::ResourceLimit(format!("more than {} tableau nodes", self.cfg.max_nodes)));
        }
        if self.branches > self.cfg.max_branches {
            return Err(Error::ResourceLimit(format!("more than {} tableau branches", self.cfg.max_branches)));
        }
        if let Some(limit) = self.cfg.timeout {
            if self.start.elapsed() > limit {
                return Err(Error::ResourceLimit(format!("tableau time limit of {limit:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Node {
    label: BTreeMap<CId, Dep>,
    parent: Option<NodeId>,
    /// Roles from the parent to this node.
    edge: BTreeMap<Role, Dep>,
    children: Vec<NodeId>,
    root: bool,
    alive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Active,
    Direct,
    Indirect,
}

#[derive(Clone, Debug)]
struct Graph {
    nodes: Vec<Node>,
    /// Edges between root nodes, keyed by `(a, b)` with `a ≤ b` and holding
    /// the roles from `a` to `b`.
    root_edges: BTreeMap<(NodeId, NodeId), BTreeMap<Role, Dep>>,
    neq: BTreeMap<(NodeId, NodeId), Dep>,
    not_related: Vec<(NodeId, NodeId, Role, Dep)>,
    inds: BTreeMap<Name, NodeId>,
    resolved: Vec<bool>,
    dirty: BTreeSet<NodeId>,
    clash: Option<Dep>,
}

enum Alt {
    Add(NodeId, CId),
    Merge(NodeId, NodeId, NodeId),
    Clause(usize, usize),
    Generate(NodeId, CId, usize),
}

enum Task {
    Branch(&'static str, NodeId, Vec<Alt>, Dep),
    Generate(NodeId, CId, Dep),
}

enum Outcome {
    Sat(Graph),
    Clash(Dep),
}

fn pair(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

impl Graph {
    fn initial(run: &mut Run) -> Graph {
        let mut g = Graph {
            nodes: vec![],
            root_edges: BTreeMap::new(),
            neq: BTreeMap::new(),
            not_related: vec![],
            inds: BTreeMap::new(),
            resolved: vec![false; run.kb.clauses.len()],
            dirty: BTreeSet::new(),
            clash: None,
        };
        for a in run.kb.individuals() {
            let x = g.new_node(run, None, true, Dep::default());
            g.inds.insert(a, x);
        }
        for a in &run.kb.abox {
            g.assert(run, a, Dep::default());
        }
        g
    }

    fn new_node(&mut self, run: &mut Run, parent: Option<NodeId>, root: bool, dep: Dep) -> NodeId {
        let x = self.nodes.len();
        self.nodes.push(Node {
            label: BTreeMap::new(),
            parent,
            edge: BTreeMap::new(),
            children: vec![],
            root,
            alive: true,
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(x);
        }
        run.nodes_created += 1;
        for &c in &run.table.global {
            self.add(run, x, c, dep.clone(), "⊤");
        }
        self.dirty.insert(x);
        x
    }

    fn set_clash(&mut self, run: &mut Run, x: NodeId, dep: Dep) {
        run.log("clash", x, None);
        if self.clash.is_none() {
            self.clash = Some(dep);
        }
    }

    fn add(&mut self, run: &mut Run, x: NodeId, c: CId, dep: Dep, rule: &str) {
        if self.clash.is_some() || self.nodes[x].label.contains_key(&c) {
            return;
        }
        let t = run.table;
        self.nodes[x].label.insert(c, dep.clone());
        run.log(rule, x, Some(c));
        match &t.kinds[c] {
            Kind::Bottom => self.set_clash(run, x, dep),
            Kind::Atom(a) => {
                if let Some(d) = t.neg_atoms.get(a).and_then(|n| self.nodes[x].label.get(n)) {
                    let d = dep.union(d);
                    return self.set_clash(run, x, d);
                }
                for (others, rhs) in t.unfold.get(a).map(Vec::as_slice).unwrap_or(&[]) {
                    let mut d = dep.clone();
                    let all = others.iter().all(|o| {
                        match t.atoms.get(o).and_then(|id| self.nodes[x].label.get(id)) {
                            Some(od) => {
                                d.add(od);
                                true
                            }
                            None => false,
                        }
                    });
                    if all {
                        self.add(run, x, *rhs, d, "unfold");
                    }
                }
            }
            Kind::Neg(a) => {
                if let Some(d) = t.atoms.get(a).and_then(|n| self.nodes[x].label.get(n)) {
                    let d = dep.union(d);
                    self.set_clash(run, x, d);
                }
            }
            Kind::And(parts) => {
                for &p in parts {
                    self.add(run, x, p, dep.clone(), "⊓");
                }
            }
            Kind::All(..) => {
                self.dirty.insert(x);
            }
            _ => {}
        }
    }

    /// Neighbours of `x` with the roles from `x` to them.
    fn neighbours(&self, x: NodeId) -> Vec<(NodeId, Vec<(Role, Dep)>)> {
        let n = &self.nodes[x];
        let mut out = Vec::new();
        if let Some(p) = n.parent {
            out.push((p, n.edge.iter().map(|(r, d)| (r.inv(), d.clone())).collect()));
        }
        for &c in &n.children {
            if self.nodes[c].alive {
                out.push((c, self.nodes[c].edge.iter().map(|(r, d)| (r.clone(), d.clone())).collect()));
            }
        }
        if n.root {
            for (&(a, b), roles) in &self.root_edges {
                if a != x && b != x {
                    continue;
                }
                let fwd = roles.iter().map(|(r, d)| (r.clone(), d.clone()));
                let bwd = roles.iter().map(|(r, d)| (r.inv(), d.clone()));
                let list: Vec<(Role, Dep)> = if a == b {
                    fwd.chain(bwd).collect()
                } else if a == x {
                    fwd.collect()
                } else {
                    bwd.collect()
                };
                out.push((if a == x { b } else { a }, list));
            }
        }
        out
    }

    /// Roles between two root nodes, oriented from `a` to `b`.
    fn root_roles(&self, a: NodeId, b: NodeId) -> Vec<(Role, Dep)> {
        let Some(roles) = self.root_edges.get(&pair(a, b)) else { return vec![] };
        let fwd = roles.iter().map(|(r, d)| (r.clone(), d.clone()));
        let bwd = roles.iter().map(|(r, d)| (r.inv(), d.clone()));
        if a == b {
            fwd.chain(bwd).collect()
        } else if a < b {
            fwd.collect()
        } else {
            bwd.collect()
        }
    }

    /// Adds `role` from `x` to its neighbour (or fellow root) `z`.
    fn connect(&mut self, run: &mut Run, x: NodeId, z: NodeId, role: Role, dep: Dep) {
        let rec = if self.nodes[z].parent == Some(x) {
            &mut self.nodes[z].edge
        } else if self.nodes[x].parent == Some(z) {
            return self.connect(run, z, x, role.inv(), dep);
        } else {
            let (key, role) = if x <= z { ((x, z), role) } else { ((z, x), role.inv()) };
            let rec = self.root_edges.entry(key).or_default();
            if !rec.contains_key(&role) {
                rec.insert(role, dep);
                self.check_not_related(run);
            }
            self.dirty.insert(x);
            self.dirty.insert(z);
            return;
        };
        rec.entry(role).or_insert(dep);
        self.dirty.insert(x);
        self.dirty.insert(z);
    }

    fn check_not_related(&mut self, run: &mut Run) {
        let mut found = None;
        for (a, b, r, d) in &self.not_related {
            if let Some((_, d2)) = self.root_roles(*a, *b).iter().find(|(q, _)| q == r) {
                found = Some((*a, d.union(d2)));
                break;
            }
        }
        if let Some((a, d)) = found {
            self.set_clash(run, a, d);
        }
    }

    fn set_neq(&mut self, run: &mut Run, a: NodeId, b: NodeId, dep: Dep) {
        if a == b {
            return self.set_clash(run, a, dep);
        }
        self.neq.entry(pair(a, b)).or_insert(dep);
    }

    fn assert(&mut self, run: &mut Run, a: &AAssertion, dep: Dep) {
        match a {
            AAssertion::Instance(x, c) => {
                let x = self.inds[x];
                let c = run.table.ids[c];
                self.add(run, x, c, dep, "abox");
            }
            AAssertion::Related(x, y, r) => {
                let (x, y) = (self.inds[x], self.inds[y]);
                self.connect(run, x, y, r.clone(), dep);
            }
            AAssertion::NotRelated(x, y, r) => {
                let (x, y) = (self.inds[x], self.inds[y]);
                self.not_related.push((x, y, r.clone(), dep));
                self.check_not_related(run);
            }
            AAssertion::Distinct(x, y) => {
                let (x, y) = (self.inds[x], self.inds[y]);
                self.set_neq(run, x, y, dep);
            }
        }
    }

    fn holds_assertion(&self, run: &Run, a: &AAssertion) -> bool {
        match a {
            AAssertion::Instance(x, c) => self.nodes[self.inds[x]].label.contains_key(&run.table.ids[c]),
            AAssertion::Related(x, y, r) => self.root_roles(self.inds[x], self.inds[y]).iter().any(|(q, _)| q == r),
            AAssertion::NotRelated(x, y, r) => {
                let (x, y) = (self.inds[x], self.inds[y]);
                self.not_related.iter().any(|(a, b, q, _)| *a == x && *b == y && q == r)
            }
            AAssertion::Distinct(x, y) => self.neq.contains_key(&pair(self.inds[x], self.inds[y])),
        }
    }

    /// Applies the `∀`-rule from every dirty node until nothing changes.
    fn saturate(&mut self, run: &mut Run) {
        let t = run.table;
        while self.clash.is_none() {
            let Some(x) = self.dirty.pop_first() else { break };
            if !self.nodes[x].alive {
                continue;
            }
            let alls: Vec<(RId, CId, Dep)> = self.nodes[x]
                .label
                .iter()
                .filter_map(|(&c, d)| match t.kinds[c] {
                    Kind::All(r, f) => Some((r, f, d.clone())),
                    _ => None,
                })
                .collect();
            if alls.is_empty() {
                continue;
            }
            let nbrs = self.neighbours(x);
            for (r, f, d) in alls {
                for (y, roles) in &nbrs {
                    if self.nodes[*y].label.contains_key(&f) {
                        continue;
                    }
                    if let Some(rd) = t.holds(r, roles) {
                        self.add(run, *y, f, d.union(&rd), "∀");
                    }
                }
            }
        }
    }

    fn same_label(&self, a: NodeId, b: NodeId) -> bool {
        self.nodes[a].label.keys().eq(self.nodes[b].label.keys())
    }

    fn directly_blocked(&self, x: NodeId) -> bool {
        let Some(p) = self.nodes[x].parent else { return false };
        if self.nodes[p].root {
            return false;
        }
        let mut y = p;
        while let Some(yp) = self.nodes[y].parent {
            if self.nodes[yp].root {
                break;
            }
            if self.same_label(x, y)
                && self.same_label(p, yp)
                && self.nodes[x].edge.keys().eq(self.nodes[y].edge.keys())
            {
                return true;
            }
            y = yp;
        }
        false
    }

    fn statuses(&self) -> Vec<Status> {
        let mut out = vec![Status::Active; self.nodes.len()];
        for x in 0..self.nodes.len() {
            let n = &self.nodes[x];
            if !n.alive || n.root {
                continue;
            }
            let p = n.parent.expect("tree nodes have parents");
            out[x] = if out[p] != Status::Active {
                Status::Indirect
            } else if self.directly_blocked(x) {
                Status::Direct
            } else {
                Status::Active
            };
        }
        out
    }

    /// Whether some `n` of the candidates are pairwise distinct.
    fn has_distinct(&self, cands: &[NodeId], n: usize) -> bool {
        fn go(g: &Graph, cands: &[NodeId], chosen: &mut Vec<NodeId>, n: usize) -> bool {
            if chosen.len() == n {
                return true;
            }
            for (i, &c) in cands.iter().enumerate() {
                if chosen.iter().all(|&d| g.neq.contains_key(&pair(c, d))) {
                    chosen.push(c);
                    if go(g, &cands[i + 1..], chosen, n) {
                        return true;
                    }
                    chosen.pop();
                }
            }
            false
        }
        cands.len() >= n && (n <= 1 || go(self, cands, &mut vec![], n))
    }

    fn next_task(&mut self, run: &Run, status: &[Status]) -> Option<Task> {
        let t = run.table;
        let live: Vec<NodeId> = (0..self.nodes.len()).filter(|&x| self.nodes[x].alive).collect();
        let at_most = |g: &Graph, x: NodeId| -> Vec<(u64, RId, CId, Dep)> {
            g.nodes[x]
                .label
                .iter()
                .filter_map(|(&c, d)| match t.kinds[c] {
                    Kind::AtMost(n, r, f) => Some((n, r, f, d.clone())),
                    _ => None,
                })
                .collect()
        };

        // ≤: merge two neighbours or clash.
        for &x in &live {
            if status[x] == Status::Indirect {
                continue;
            }
            let rules = at_most(self, x);
            if rules.is_empty() {
                continue;
            }
            let nbrs = self.neighbours(x);
            for (n, r, f, d) in rules {
                let mut dep = d.clone();
                let mut set: Vec<NodeId> = Vec::new();
                for (y, roles) in &nbrs {
                    let Some(rd) = t.holds(r, roles) else { continue };
                    let fd = if f == t.top { Some(Dep::default()) } else { self.nodes[*y].label.get(&f).cloned() };
                    if let Some(fd) = fd {
                        dep.add(&rd);
                        dep.add(&fd);
                        set.push(*y);
                    }
                }
                if set.len() as u64 <= n {
                    continue;
                }
                let mut alts = Vec::new();
                for i in 0..set.len() {
                    for j in i + 1..set.len() {
                        match self.neq.get(&pair(set[i], set[j])) {
                            Some(nd) => dep.add(nd),
                            None => alts.push(Alt::Merge(x, set[i], set[j])),
                        }
                    }
                }
                return Some(Task::Branch("≤", x, alts, dep));
            }
        }

        // Spoiler clauses.
        for i in 0..run.kb.clauses.len() {
            if self.resolved[i] {
                continue;
            }
            let clause = &run.kb.clauses[i];
            if clause.iter().any(|alt| alt.iter().all(|a| self.holds_assertion(run, a))) {
                self.resolved[i] = true;
                continue;
            }
            let alts = (0..clause.len()).map(|j| Alt::Clause(i, j)).collect();
            return Some(Task::Branch("clause", 0, alts, Dep::default()));
        }

        // ⊔.
        for &x in &live {
            if status[x] == Status::Indirect {
                continue;
            }
            for (&c, d) in &self.nodes[x].label {
                if let Kind::Or(parts) = &t.kinds[c] {
                    if !parts.iter().any(|p| self.nodes[x].label.contains_key(p)) {
                        let alts = parts.iter().map(|&p| Alt::Add(x, p)).collect();
                        return Some(Task::Branch("⊔", x, alts, d.clone()));
                    }
                }
            }
        }

        // choose.
        for &x in &live {
            if status[x] == Status::Indirect {
                continue;
            }
            let rules = at_most(self, x);
            if rules.is_empty() {
                continue;
            }
            let nbrs = self.neighbours(x);
            for (_, r, f, d) in rules {
                if f == t.top {
                    continue;
                }
                let neg = t.negation[&f];
                for (y, roles) in &nbrs {
                    let label = &self.nodes[*y].label;
                    if label.contains_key(&f) || label.contains_key(&neg) {
                        continue;
                    }
                    if let Some(rd) = t.holds(r, roles) {
                        let alts = vec![Alt::Add(*y, f), Alt::Add(*y, neg)];
                        return Some(Task::Branch("choose", *y, alts, d.union(&rd)));
                    }
                }
            }
        }

        // ≥.
        for &x in &live {
            if status[x] != Status::Active {
                continue;
            }
            let mut nbrs = None;
            for (&c, d) in &self.nodes[x].label {
                let Kind::AtLeast(n, r, f) = t.kinds[c] else { continue };
                let nbrs = nbrs.get_or_insert_with(|| self.neighbours(x));
                let cands: Vec<NodeId> = nbrs
                    .iter()
                    .filter(|(y, roles)| {
                        t.holds(r, roles).is_some() && (f == t.top || self.nodes[*y].label.contains_key(&f))
                    })
                    .map(|(y, _)| *y)
                    .collect();
                if self.has_distinct(&cands, n as usize) {
                    continue;
                }
                if t.roles[r].len() == 1 {
                    return Some(Task::Generate(x, c, d.clone()));
                }
                let alts = (0..t.roles[r].len()).map(|j| Alt::Generate(x, c, j)).collect();
                return Some(Task::Branch("≥", x, alts, d.clone()));
            }
        }
        None
    }

    fn generate(&mut self, run: &mut Run, x: NodeId, c: CId, disjunct: usize, dep: Dep) {
        let t = run.table;
        let Kind::AtLeast(n, r, f) = t.kinds[c] else { unreachable!("≥ task on a non-≥ concept") };
        run.log("≥", x, Some(c));
        let mut fresh = Vec::new();
        for _ in 0..n {
            let y = self.new_node(run, Some(x), false, dep.clone());
            for (role, positive) in &t.roles[r][disjunct] {
                if *positive {
                    self.nodes[y].edge.insert(role.clone(), dep.clone());
                }
            }
            if f != t.top {
                self.add(run, y, f, dep.clone(), "≥");
            }
            for &z in &fresh {
                self.set_neq(run, y, z, dep.clone());
            }
            fresh.push(y);
        }
        self.dirty.insert(x);
    }

    fn prune(&mut self, x: NodeId) {
        self.nodes[x].alive = false;
        for c in self.nodes[x].children.clone() {
            if self.nodes[c].alive {
                self.prune(c);
            }
        }
    }

    /// Merges the neighbours `a` and `b` of `x`: tree nodes into roots,
    /// children into parents, later nodes into earlier ones.
    fn merge(&mut self, run: &mut Run, x: NodeId, a: NodeId, b: NodeId, dep: Dep) {
        let (ra, rb) = (self.nodes[a].root, self.nodes[b].root);
        let (from, into) = match (ra, rb) {
            (true, true) => (a.max(b), a.min(b)),
            (true, false) => (b, a),
            (false, true) => (a, b),
            (false, false) if self.nodes[x].parent == Some(a) => (b, a),
            (false, false) if self.nodes[x].parent == Some(b) => (a, b),
            (false, false) => (a.max(b), a.min(b)),
        };
        run.log("merge", from, None);
        if let Some(d) = self.neq.get(&pair(from, into)) {
            let d = d.union(&dep);
            return self.set_clash(run, into, d);
        }
        if self.nodes[from].root {
            let edges: Vec<((NodeId, NodeId), BTreeMap<Role, Dep>)> = self
                .root_edges
                .iter()
                .filter(|((p, q), _)| *p == from || *q == from)
                .map(|(k, v)| (*k, v.clone()))
                .collect();
            let redirect = |n: NodeId| if n == from { into } else { n };
            for ((p, q), roles) in edges {
                self.root_edges.remove(&(p, q));
                for (role, d) in roles {
                    self.connect(run, redirect(p), redirect(q), role, d.union(&dep));
                }
            }
            for (p, q, _, d) in &mut self.not_related {
                if *p == from || *q == from {
                    d.add(&dep);
                }
                *p = redirect(*p);
                *q = redirect(*q);
            }
            for v in self.inds.values_mut() {
                *v = redirect(*v);
            }
            for c in self.nodes[from].children.clone() {
                self.prune(c);
            }
        } else {
            debug_assert_eq!(self.nodes[from].parent, Some(x));
            let roles: Vec<(Role, Dep)> = self.nodes[from].edge.iter().map(|(r, d)| (r.clone(), d.clone())).collect();
            self.prune(from);
            for (role, d) in roles {
                self.connect(run, x, into, role, d.union(&dep));
            }
        }
        self.nodes[from].alive = false;
        let neqs: Vec<((NodeId, NodeId), Dep)> = self
            .neq
            .iter()
            .filter(|((p, q), _)| *p == from || *q == from)
            .map(|(k, d)| (*k, d.clone()))
            .collect();
        for ((p, q), d) in neqs {
            let other = if p == from { q } else { p };
            self.set_neq(run, into, other, d.union(&dep));
        }
        let labels: Vec<(CId, Dep)> = self.nodes[from].label.iter().map(|(c, d)| (*c, d.clone())).collect();
        for (c, d) in labels {
            self.add(run, into, c, d.union(&dep), "merge");
        }
        self.check_not_related(run);
        self.dirty.insert(into);
        for (y, _) in self.neighbours(into) {
            self.dirty.insert(y);
        }
    }

    fn apply(&mut self, run: &mut Run, alt: &Alt, dep: Dep) {
        match *alt {
            Alt::Add(x, c) => self.add(run, x, c, dep, "branch"),
            Alt::Merge(x, a, b) => self.merge(run, x, a, b, dep),
            Alt::Clause(i, j) => {
                self.resolved[i] = true;
                for a in &run.kb.clauses[i][j] {
                    self.assert(run, a, dep.clone());
                }
            }
            Alt::Generate(x, c, j) => self.generate(run, x, c, j, dep),
        }
    }
}

fn search(run: &mut Run, mut g: Graph, level: usize) -> Result<Outcome> {
    loop {
        run.check_limits()?;
        g.saturate(run);
        if let Some(d) = g.clash.take() {
            return Ok(Outcome::Clash(d));
        }
        let status = g.statuses();
        match g.next_task(run, &status) {
            None => return Ok(Outcome::Sat(g)),
            Some(Task::Generate(x, c, dep)) => g.generate(run, x, c, 0, dep),
            Some(Task::Branch(rule, x, alts, dep)) => {
                run.log(rule, x, None);
                let mut acc = dep.clone();
                let branch_dep = dep.union(&Dep::level(level));
                for alt in &alts {
                    run.branches += 1;
                    let mut next = g.clone();
                    next.apply(run, alt, branch_dep.clone());
                    match search(run, next, level + 1)? {
                        Outcome::Sat(g) => return Ok(Outcome::Sat(g)),
                        Outcome::Clash(d) => {
                            if run.table.positive && !d.contains(level) {
                                return Ok(Outcome::Clash(d));
                            }
                            acc.add(&d.without(level));
                        }
                    }
                }
                return Ok(Outcome::Clash(acc));
            }
        }
    }
}
