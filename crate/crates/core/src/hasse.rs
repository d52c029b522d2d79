//! The degeneration order on iso-classes of sampled instances, its
//! cross-validation against the closure tables, and Hasse diagram output.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{pair_env, Catalog, CatalogError, ClosureTable, Diagram, Env, Instance, Pattern, Witness};
use crate::degeneration::{apply_witness, Engine, Status, WitnessReport, REPORT_SCHEMA_VERSION};
use crate::exactnum::Scalar;

#[derive(Debug, Error)]
pub enum HasseError {
    #[error("degeneration cycle through node {0}")]
    CycleDetected(usize),
    #[error("edge ({0}, {1}) leaves the node set")]
    NodeOutOfRange(usize, usize),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Strict reachability on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    reach: Vec<Vec<bool>>,
}

impl Relation {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.reach[i][j]
    }

    pub fn pairs(&self) -> BTreeSet<(usize, usize)> {
        (0..self.n).flat_map(|i| (0..self.n).filter(move |&j| self.reach[i][j]).map(move |j| (i, j))).collect()
    }

    /// The order induced on `keep`, with nodes renumbered by position.
    pub fn restrict(&self, keep: &[usize]) -> Relation {
        let reach = keep.iter().map(|&i| keep.iter().map(|&j| self.reach[i][j]).collect()).collect();
        Relation { n: keep.len(), reach }
    }
}

/// Transitive closure of proper degeneration edges; self-loops are improper and dropped.
pub fn closure_from_edges(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Result<Relation, HasseError> {
    let mut adj = vec![Vec::new(); n];
    for (i, j) in edges {
        if i >= n || j >= n {
            return Err(HasseError::NodeOutOfRange(i, j));
        }
        if i != j {
            adj[i].push(j);
        }
    }
    let mut reach = vec![vec![false; n]; n];
    for (s, row) in reach.iter_mut().enumerate() {
        let mut queue: VecDeque<usize> = adj[s].iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            if !row[v] {
                row[v] = true;
                queue.extend(adj[v].iter().copied());
            }
        }
        if row[s] {
            return Err(HasseError::CycleDetected(s));
        }
    }
    Ok(Relation { n, reach })
}

/// The unique minimal edge set with the same closure.
pub fn transitive_reduction(rel: &Relation) -> BTreeSet<(usize, usize)> {
    rel.pairs().into_iter().filter(|&(i, j)| !(0..rel.n).any(|k| rel.reach[i][k] && rel.reach[k][j])).collect()
}

/// Iso-classes of instances with the closure of verified witness edges.
#[derive(Debug, Clone)]
pub struct Graph {
    /// Members of each class in ascending order; the first is the representative.
    pub classes: Vec<Vec<Instance>>,
    /// Whether some member lies on the sample grid.
    pub on_grid: Vec<bool>,
    pub edges: BTreeMap<(usize, usize), Vec<String>>,
    pub relation: Relation,
    /// Witness applications beyond the reported samples.
    pub extra: Vec<ExtraSample>,
    index: HashMap<Instance, usize>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// A witness checked at a point the grid does not contain.
#[derive(Debug, Clone, Serialize)]
pub struct ExtraSample {
    pub witness: String,
    pub sample: String,
    pub source: Instance,
    pub target: Instance,
    pub status: Status,
}

const SATURATION_ROUNDS: usize = 4;

fn with_iso_closure(cat: &Catalog, set: &mut BTreeSet<Instance>) -> Result<(), CatalogError> {
    let mut pending: Vec<Instance> = set.iter().cloned().collect();
    while let Some(inst) = pending.pop() {
        for m in cat.iso_closure(&inst)? {
            if set.insert(m.clone()) {
                pending.push(m);
            }
        }
    }
    Ok(())
}

/// Witness points whose parameters take values already present among `nodes`.
fn demanded_points(cat: &Catalog, w: &Witness, nodes: &BTreeSet<Instance>) -> Result<Vec<Env>, CatalogError> {
    if w.params.is_empty() || w.samples.is_some() {
        return Ok(Vec::new());
    }
    let mut values: BTreeMap<String, Vec<Scalar>> = BTreeMap::new();
    for p in &w.params {
        let mut vals = BTreeSet::new();
        for pat in [&w.source, &w.target] {
            for (sym, e) in &pat.params {
                if e.trim() != p {
                    continue;
                }
                for inst in nodes.iter().filter(|i| i.family == pat.family) {
                    if let Some(v) = cat.env_of(inst)?.get(sym) {
                        vals.insert(v.clone());
                    }
                }
            }
        }
        values.insert(p.clone(), vals.into_iter().collect());
    }
    let mut out = Vec::new();
    for env in cat.witness_points(w, &values)? {
        if nodes.contains(&cat.witness_endpoints(w, &env)?.0) {
            out.push(env);
        }
    }
    Ok(out)
}

fn sample_key(env: &Env) -> String {
    env.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

impl Graph {
    /// Nodes from the sample grid and every witness endpoint; edges from verified results.
    ///
    /// Parameterized witnesses are also applied wherever their parameters take
    /// values of existing nodes, so that chains through off-grid instances close up.
    pub fn build(cat: &Catalog, reports: &[WitnessReport]) -> Result<Self, HasseError> {
        let grid: BTreeSet<Instance> = cat.all_instances()?.into_iter().collect();
        let mut found: Vec<(String, Instance, Instance)> = Vec::new();
        let mut done: BTreeSet<(String, String)> = BTreeSet::new();
        for w in reports {
            for r in &w.results {
                done.insert((w.id.clone(), sample_key(&r.sample)));
                if r.status == Status::Verified {
                    found.push((w.id.clone(), r.source.clone(), r.target.clone()));
                }
            }
        }
        let mut extra = Vec::new();
        let mut all = grid.clone();
        for _ in 0..SATURATION_ROUNDS {
            for (_, s, t) in &found {
                all.insert(s.clone());
                all.insert(t.clone());
            }
            with_iso_closure(cat, &mut all)?;
            let mut jobs = Vec::new();
            for w in cat.witnesses() {
                for env in demanded_points(cat, w, &all)? {
                    if done.insert((w.id.clone(), sample_key(&env))) {
                        jobs.push((w, env));
                    }
                }
            }
            if jobs.is_empty() {
                break;
            }
            let results = jobs
                .par_iter()
                .map(|(w, env)| apply_witness(cat, w, env))
                .collect::<Result<Vec<_>, _>>()?;
            for r in results {
                if r.status == Status::Verified {
                    found.push((r.witness.clone(), r.source.clone(), r.target.clone()));
                }
                extra.push(ExtraSample {
                    witness: r.witness,
                    sample: sample_key(&r.sample),
                    source: r.source,
                    target: r.target,
                    status: r.status,
                });
            }
        }
        for (_, s, t) in &found {
            all.insert(s.clone());
            all.insert(t.clone());
        }
        with_iso_closure(cat, &mut all)?;
        let list: Vec<Instance> = all.into_iter().collect();
        let pos: HashMap<&Instance, usize> = list.iter().enumerate().map(|(k, i)| (i, k)).collect();
        let mut parent: Vec<usize> = (0..list.len()).collect();
        for (k, inst) in list.iter().enumerate() {
            for m in cat.iso_closure(inst)? {
                let (a, b) = (find(&mut parent, k), find(&mut parent, pos[&m]));
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut by_root: BTreeMap<usize, Vec<Instance>> = BTreeMap::new();
        for (k, inst) in list.iter().enumerate() {
            let r = find(&mut parent, k);
            by_root.entry(r).or_default().push(inst.clone());
        }
        let classes: Vec<Vec<Instance>> = by_root.into_values().collect();
        let index: HashMap<Instance, usize> =
            classes.iter().enumerate().flat_map(|(c, ms)| ms.iter().map(move |m| (m.clone(), c))).collect();
        let on_grid = classes.iter().map(|ms| ms.iter().any(|m| grid.contains(m))).collect();
        let mut edges: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
        for (id, s, t) in found {
            let (a, b) = (index[&s], index[&t]);
            if a != b {
                let ids = edges.entry((a, b)).or_default();
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
        let relation = closure_from_edges(classes.len(), edges.keys().copied())?;
        Ok(Graph { classes, on_grid, edges, relation, extra, index })
    }

    pub fn class_of(&self, inst: &Instance) -> Option<usize> {
        self.index.get(inst).copied()
    }

    pub fn label(&self, c: usize) -> String {
        self.classes[c].iter().map(ToString::to_string).collect::<Vec<_>>().join(" ≅ ")
    }

    pub fn representative(&self, c: usize) -> &Instance {
        &self.classes[c][0]
    }

    pub fn degenerates(&self, a: usize, b: usize) -> bool {
        self.relation.contains(a, b)
    }

    /// Classes with a member selected by any of `pats`.
    fn matching(&self, cat: &Catalog, pats: &[&Pattern]) -> Result<Vec<usize>, CatalogError> {
        let mut out = Vec::new();
        for (c, ms) in self.classes.iter().enumerate() {
            if !self.on_grid[c] {
                continue;
            }
            let mut hit = false;
            for m in ms {
                for p in pats {
                    if cat.node_matches(p, m)? {
                        hit = true;
                    }
                }
            }
            if hit {
                out.push(c);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Pair {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub source: String,
    pub target: String,
    pub in_closure: bool,
    pub in_table: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifiedPair {
    pub source: String,
    pub target: String,
    pub certificate: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManualPair {
    pub source: String,
    pub target: String,
    pub argument: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeValidation {
    #[serde(rename = "type")]
    pub type_id: u32,
    pub name: String,
    pub pairs_checked: usize,
    pub closure: Vec<Pair>,
    pub discrepancies: Vec<Discrepancy>,
    pub certified: Vec<CertifiedPair>,
    pub manual: Vec<ManualPair>,
    /// Excluded pairs with neither a certificate nor a manual record.
    pub uncovered: Vec<Pair>,
}

impl TypeValidation {
    pub fn ok(&self) -> bool {
        self.discrepancies.is_empty() && self.uncovered.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManualRecordUse {
    pub source: String,
    pub target: String,
    pub group: u32,
    /// Pairs that only this kind of argument settles.
    pub needed_for: usize,
    /// Pairs it matches that also have a machine certificate.
    pub superseded_for: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErratumCheck {
    pub from: String,
    pub to: String,
    pub note: String,
    pub pairs: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagramComparison {
    #[serde(rename = "type")]
    pub type_id: u32,
    pub nodes: usize,
    pub reduction: Vec<Pair>,
    /// Drawn arrows that are not degenerations.
    pub unsound: Vec<Pair>,
    /// Degenerations among the diagram's nodes that the drawing does not imply.
    pub missing: Vec<Pair>,
    pub errata: Vec<ErratumCheck>,
}

impl DiagramComparison {
    pub fn ok(&self) -> bool {
        self.unsound.is_empty() && self.missing.is_empty() && self.errata.iter().all(|e| e.certified)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HasseReport {
    pub schema_version: u32,
    pub nodes: usize,
    pub edges: usize,
    pub types: Vec<TypeValidation>,
    pub manual_records: Vec<ManualRecordUse>,
    pub diagrams: Vec<DiagramComparison>,
    /// Closure pairs whose derivation dimension does not increase.
    pub der_violations: Vec<Pair>,
    /// Off-grid witness applications that did not verify.
    pub extra_failures: Vec<ExtraSample>,
}

impl HasseReport {
    /// Every pair's closure membership agrees with the tables, ignoring whether exclusions are proven.
    pub fn consistent(&self) -> bool {
        self.types.iter().all(|t| t.discrepancies.is_empty())
            && self.der_violations.is_empty()
            && self.extra_failures.is_empty()
            && self.diagrams_ok()
    }

    pub fn uncovered(&self) -> usize {
        self.types.iter().map(|t| t.uncovered.len()).sum()
    }

    pub fn closure_ok(&self) -> bool {
        self.types.iter().all(TypeValidation::ok)
            && self.manual_records.iter().all(|m| m.needed_for + m.superseded_for > 0)
            && self.der_violations.is_empty()
            && self.extra_failures.is_empty()
    }

    pub fn diagrams_ok(&self) -> bool {
        self.diagrams.iter().all(DiagramComparison::ok)
    }

    pub fn ok(&self) -> bool {
        self.closure_ok() && self.diagrams_ok()
    }
}

struct Scope {
    sources: Vec<usize>,
    targets: Vec<usize>,
}

fn letters(cat: &Catalog, pats: impl Iterator<Item = String>) -> Result<BTreeSet<String>, CatalogError> {
    pats.map(|f| Ok(cat.family(&f)?.letter.clone())).collect()
}

fn table_scope(cat: &Catalog, g: &Graph, t: &ClosureTable) -> Result<Scope, CatalogError> {
    let srcs: Vec<&Pattern> = t.rows.iter().map(|r| &r.source).collect();
    let sources = g.matching(cat, &srcs)?;
    let target_letters = letters(cat, t.rows.iter().flat_map(|r| &r.targets).map(|p| p.family.clone()))?;
    let mut targets = Vec::new();
    for (c, ms) in g.classes.iter().enumerate() {
        if g.on_grid[c] && target_letters.contains(&cat.family(&ms[0].family)?.letter) {
            targets.push(c);
        }
    }
    Ok(Scope { sources, targets })
}

fn in_table(cat: &Catalog, g: &Graph, t: &ClosureTable, a: usize, b: usize) -> Result<bool, CatalogError> {
    for row in &t.rows {
        for sa in &g.classes[a] {
            if !cat.node_matches(&row.source, sa)? {
                continue;
            }
            let env = cat.env_of(sa)?;
            for tgt in &row.targets {
                for sb in &g.classes[b] {
                    if cat.pattern_matches(tgt, sb, &env)? {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// First certificate over all member pairs of two classes.
fn certify_classes(
    engine: &Engine,
    g: &Graph,
    a: usize,
    b: usize,
) -> Result<Option<(String, String)>, CatalogError> {
    for sa in &g.classes[a] {
        for sb in &g.classes[b] {
            let hints = engine.matching_records(sa, sb)?;
            if let Some(c) = engine.certify_non_degeneration(sa, sb, &hints)? {
                return Ok(Some((c.label, format!("{sa} -> {sb}: {}", c.detail))));
            }
        }
    }
    Ok(None)
}

fn manual_for(cat: &Catalog, g: &Graph, a: usize, b: usize) -> Result<Option<usize>, CatalogError> {
    for (k, m) in cat.manual_arguments().iter().enumerate() {
        for sa in &g.classes[a] {
            for sb in &g.classes[b] {
                if cat.node_matches(&m.source, sa)? && cat.node_matches(&m.target, sb)? {
                    return Ok(Some(k));
                }
            }
        }
    }
    Ok(None)
}

enum Proof {
    Machine(String, String),
    Transitive(String),
    Manual(usize),
    ManualTransitive(String, usize),
}

impl Proof {
    fn manual_record(&self) -> Option<usize> {
        match self {
            Proof::Manual(k) | Proof::ManualTransitive(_, k) => Some(*k),
            _ => None,
        }
    }
}

fn close_transitively(g: &Graph, excluded: &BTreeSet<(usize, usize)>, proofs: &mut BTreeMap<(usize, usize), Proof>) {
    let n = g.classes.len();
    loop {
        let mut added = Vec::new();
        for &(a, b) in excluded.iter().filter(|p| !proofs.contains_key(p)) {
            let via_target = (0..n).find(|&c| g.degenerates(b, c) && proofs.contains_key(&(a, c)));
            let via_source = || (0..n).find(|&x| g.degenerates(x, a) && proofs.contains_key(&(x, b)));
            let (premise, detail) = if let Some(c) = via_target {
                ((a, c), format!("{} degenerates to {} and {} does not", g.label(b), g.label(c), g.label(a)))
            } else if let Some(x) = via_source() {
                ((x, b), format!("{} degenerates to {} and not to {}", g.label(x), g.label(a), g.label(b)))
            } else {
                continue;
            };
            let proof = match proofs[&premise].manual_record() {
                Some(k) => Proof::ManualTransitive(detail, k),
                None => Proof::Transitive(detail),
            };
            added.push(((a, b), proof));
        }
        if added.is_empty() {
            break;
        }
        proofs.extend(added);
    }
}

/// Compares the witness closure with every closure table and settles each excluded pair.
pub fn cross_validate(
    cat: &Catalog,
    engine: &Engine,
    g: &Graph,
    tables: &[&ClosureTable],
) -> Result<(Vec<TypeValidation>, Vec<ManualRecordUse>), CatalogError> {
    let mut scoped = Vec::new();
    let mut excluded: BTreeSet<(usize, usize)> = BTreeSet::new();
    for t in tables {
        let scope = table_scope(cat, g, t)?;
        let pairs: Vec<(usize, usize)> = scope
            .sources
            .iter()
            .flat_map(|&a| scope.targets.iter().map(move |&b| (a, b)))
            .filter(|(a, b)| a != b)
            .collect();
        let expect: Vec<bool> =
            pairs.par_iter().map(|&(a, b)| in_table(cat, g, t, a, b)).collect::<Result<_, _>>()?;
        excluded.extend(pairs.iter().filter(|(a, b)| !g.degenerates(*a, *b)).copied());
        scoped.push((t, pairs, expect));
    }

    let todo: Vec<(usize, usize)> = excluded.iter().copied().collect();
    let found: Vec<Option<(String, String)>> =
        todo.par_iter().map(|&(a, b)| certify_classes(engine, g, a, b)).collect::<Result<_, _>>()?;
    let mut proofs: BTreeMap<(usize, usize), Proof> = BTreeMap::new();
    for (p, f) in todo.iter().zip(found) {
        if let Some((label, detail)) = f {
            proofs.insert(*p, Proof::Machine(label, detail));
        }
    }
    close_transitively(g, &excluded, &mut proofs);

    let records = cat.manual_arguments();
    let mut uses: Vec<(usize, usize)> = vec![(0, 0); records.len()];
    for &(a, b) in &excluded {
        if let Some(k) = manual_for(cat, g, a, b)? {
            match proofs.entry((a, b)) {
                Entry::Occupied(_) => uses[k].1 += 1,
                Entry::Vacant(slot) => {
                    uses[k].0 += 1;
                    slot.insert(Proof::Manual(k));
                }
            }
        }
    }
    close_transitively(g, &excluded, &mut proofs);

    let pair = |a: usize, b: usize| Pair { source: g.label(a), target: g.label(b) };
    let mut out = Vec::new();
    for (t, pairs, expect) in scoped {
        let mut v = TypeValidation {
            type_id: t.type_id,
            name: t.name.clone(),
            pairs_checked: pairs.len(),
            closure: Vec::new(),
            discrepancies: Vec::new(),
            certified: Vec::new(),
            manual: Vec::new(),
            uncovered: Vec::new(),
        };
        for (&(a, b), &in_tab) in pairs.iter().zip(&expect) {
            let in_clo = g.degenerates(a, b);
            if in_clo {
                v.closure.push(pair(a, b));
            }
            if in_clo != in_tab {
                v.discrepancies.push(Discrepancy {
                    source: g.label(a),
                    target: g.label(b),
                    in_closure: in_clo,
                    in_table: in_tab,
                });
            }
            if in_clo {
                continue;
            }
            match proofs.get(&(a, b)) {
                Some(Proof::Machine(label, detail)) => v.certified.push(CertifiedPair {
                    source: g.label(a),
                    target: g.label(b),
                    certificate: label.clone(),
                    detail: detail.clone(),
                }),
                Some(Proof::Transitive(detail)) => v.certified.push(CertifiedPair {
                    source: g.label(a),
                    target: g.label(b),
                    certificate: "transitivity".into(),
                    detail: detail.clone(),
                }),
                Some(Proof::Manual(k)) => v.manual.push(ManualPair {
                    source: g.label(a),
                    target: g.label(b),
                    argument: records[*k].argument.clone(),
                }),
                Some(Proof::ManualTransitive(detail, k)) => v.manual.push(ManualPair {
                    source: g.label(a),
                    target: g.label(b),
                    argument: format!("{detail}; {}", records[*k].argument),
                }),
                None => v.uncovered.push(pair(a, b)),
            }
        }
        out.push(v);
    }
    let manual = records
        .iter()
        .zip(uses)
        .filter(|(m, _)| tables.iter().any(|t| t.type_id == m.group))
        .map(|(m, (needed_for, superseded_for))| ManualRecordUse {
            source: pattern_label(&m.source),
            target: pattern_label(&m.target),
            group: m.group,
            needed_for,
            superseded_for,
        })
        .collect();
    Ok((out, manual))
}

/// Edge sets of a transcribed diagram against the witness closure on its nodes.
pub fn compare_diagram(
    cat: &Catalog,
    engine: &Engine,
    g: &Graph,
    d: &Diagram,
) -> Result<DiagramComparison, CatalogError> {
    let pats: Vec<&Pattern> = d.nodes.values().collect();
    let keep = g.matching(cat, &pats)?;
    let sub = g.relation.restrict(&keep);
    let pair = |i: usize, j: usize| Pair { source: g.label(keep[i]), target: g.label(keep[j]) };
    let mut drawn = BTreeSet::new();
    let mut unsound = BTreeSet::new();
    let mut errata = Vec::new();
    for e in &d.edges {
        let (from, to) = (&d.nodes[&e.from], &d.nodes[&e.to]);
        let mut hits = Vec::new();
        for (i, &a) in keep.iter().enumerate() {
            for (j, &b) in keep.iter().enumerate() {
                if i != j && edge_selects(cat, g, from, to, &e.relation, a, b)? {
                    hits.push((i, j));
                }
            }
        }
        if let Some(note) = &e.erratum {
            let mut certified = !hits.is_empty();
            for &(i, j) in &hits {
                if sub.contains(i, j) || certify_classes(engine, g, keep[i], keep[j])?.is_none() {
                    certified = false;
                }
            }
            errata.push(ErratumCheck { from: e.from.clone(), to: e.to.clone(), note: note.clone(), pairs: hits.len(), certified });
            continue;
        }
        for (i, j) in hits {
            if sub.contains(i, j) {
                drawn.insert((i, j));
            } else if !e.restrictions_omitted {
                unsound.insert(pair(i, j));
            }
        }
    }
    let implied = closure_from_edges(keep.len(), drawn.iter().copied()).map_err(|e| CatalogError::Invalid(e.to_string()))?;
    let missing = sub.pairs().into_iter().filter(|&(i, j)| !implied.contains(i, j)).map(|(i, j)| pair(i, j)).collect();
    let reduction = transitive_reduction(&sub).into_iter().map(|(i, j)| pair(i, j)).collect();
    Ok(DiagramComparison {
        type_id: d.type_id,
        nodes: keep.len(),
        reduction,
        unsound: unsound.into_iter().collect(),
        missing,
        errata,
    })
}

fn edge_selects(
    cat: &Catalog,
    g: &Graph,
    from: &Pattern,
    to: &Pattern,
    relation: &[String],
    a: usize,
    b: usize,
) -> Result<bool, CatalogError> {
    for sa in &g.classes[a] {
        if !cat.node_matches(from, sa)? {
            continue;
        }
        for sb in &g.classes[b] {
            if cat.node_matches(to, sb)?
                && cat.conditions_hold(relation, &[], &pair_env(&cat.env_of(sa)?, &cat.env_of(sb)?))?
            {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Every closure pair whose derivation dimension fails to increase.
pub fn der_violations(engine: &Engine, g: &Graph) -> Result<Vec<Pair>, CatalogError> {
    let mut out = Vec::new();
    for (a, b) in g.relation.pairs() {
        let (pa, pb) = (engine.profile(g.representative(a))?, engine.profile(g.representative(b))?);
        if pa.der >= pb.der {
            out.push(Pair { source: g.label(a), target: g.label(b) });
        }
    }
    Ok(out)
}

/// Full cross-validation for the selected types.
pub fn build_report(
    cat: &Catalog,
    engine: &Engine,
    g: &Graph,
    types: Option<&[u32]>,
) -> Result<HasseReport, CatalogError> {
    let want = |t: u32| types.is_none_or(|ts| ts.contains(&t));
    let tables: Vec<&ClosureTable> = cat.closure_tables().iter().filter(|t| want(t.type_id)).collect();
    let (types_v, manual_records) = cross_validate(cat, engine, g, &tables)?;
    let diagrams = cat
        .diagrams()
        .iter()
        .filter(|d| want(d.type_id))
        .map(|d| compare_diagram(cat, engine, g, d))
        .collect::<Result<_, _>>()?;
    let manual_records = if types.is_some() {
        manual_records.into_iter().filter(|m: &ManualRecordUse| want(m.group)).collect()
    } else {
        manual_records
    };
    Ok(HasseReport {
        schema_version: REPORT_SCHEMA_VERSION,
        nodes: g.classes.iter().zip(&g.on_grid).filter(|(_, &o)| o).count(),
        edges: g.edges.len(),
        types: types_v,
        manual_records,
        diagrams,
        der_violations: der_violations(engine, g)?,
        extra_failures: g.extra.iter().filter(|e| e.status != Status::Verified).cloned().collect(),
    })
}

/// `B4(a), a ≠ 0` style label.
pub fn pattern_label(p: &Pattern) -> String {
    let mut s = p.family.clone();
    if !p.params.is_empty() {
        let vs: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(s, "({})", vs.join(", ")).unwrap();
    }
    let conds: Vec<String> =
        p.zero.iter().map(|e| format!("{e} = 0")).chain(p.nonzero.iter().map(|e| format!("{e} ≠ 0"))).collect();
    if !conds.is_empty() {
        write!(s, ", {}", conds.join(", ")).unwrap();
    }
    s
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Hasse diagram of one type, with the diagram's node patterns as nodes.
///
/// Edges are the computed transitive reduction projected onto the patterns;
/// an edge is solid when its source is in the type's own table and its
/// target has the table's target letter, dashed otherwise.
pub fn emit_dot(
    cat: &Catalog,
    engine: &Engine,
    g: &Graph,
    d: &Diagram,
    table: Option<&ClosureTable>,
) -> Result<String, CatalogError> {
    let pats: Vec<&Pattern> = d.nodes.values().collect();
    let keep = g.matching(cat, &pats)?;
    let sub = g.relation.restrict(&keep);
    let mut node_of = Vec::new();
    for &c in &keep {
        let mut key = None;
        'find: for (k, p) in &d.nodes {
            for m in &g.classes[c] {
                if cat.node_matches(p, m)? {
                    key = Some(k.clone());
                    break 'find;
                }
            }
        }
        node_of.push(key.expect("matched above"));
    }
    let scope = table.map(|t| table_scope(cat, g, t)).transpose()?;
    let solid = |a: usize, b: usize| {
        scope.as_ref().is_some_and(|s| s.sources.contains(&keep[a]) && s.targets.contains(&keep[b]))
    };
    let mut edges: BTreeMap<(String, String), bool> = BTreeMap::new();
    for (i, j) in transitive_reduction(&sub) {
        if node_of[i] != node_of[j] {
            *edges.entry((node_of[i].clone(), node_of[j].clone())).or_insert(false) |= solid(i, j);
        }
    }
    let used: BTreeSet<&String> = edges.keys().flat_map(|(a, b)| [a, b]).collect();
    let mut ranks: BTreeMap<usize, Vec<&String>> = BTreeMap::new();
    for k in &used {
        let mut dims = Vec::new();
        for (i, &c) in keep.iter().enumerate() {
            if &&node_of[i] == k {
                dims.push(engine.profile(g.representative(c))?.der);
            }
        }
        ranks.entry(dims.into_iter().min().unwrap_or(0)).or_default().push(k);
    }
    let mut out = format!("digraph type_{} {{\n", d.type_id);
    if !used.is_empty() {
        out.push_str("  rankdir=TB;\n  node [shape=box];\n");
    }
    for k in &used {
        writeln!(out, "  {} [label={}];", dot_id(k), dot_id(&pattern_label(&d.nodes[*k]))).unwrap();
    }
    for (dim, ks) in &ranks {
        let ids: Vec<String> = ks.iter().map(|k| dot_id(k)).collect();
        writeln!(out, "  {{ rank=same; /* dim Der = {dim} */ {}; }}", ids.join("; ")).unwrap();
    }
    for ((a, b), is_solid) in &edges {
        let style = if *is_solid { "solid" } else { "dashed" };
        let rel = d.edges.iter().find(|e| &e.from == a && &e.to == b && !e.relation.is_empty());
        match rel {
            Some(e) => writeln!(
                out,
                "  {} -> {} [style={style}, label={}];",
                dot_id(a),
                dot_id(b),
                dot_id(&e.relation.iter().map(|r| format!("{r} = 0")).collect::<Vec<_>>().join(", "))
            )
            .unwrap(),
            None => writeln!(out, "  {} -> {} [style={style}];", dot_id(a), dot_id(b)).unwrap(),
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_reduces_to_its_cover_edges() {
        let rel = closure_from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(transitive_reduction(&rel), BTreeSet::from([(0, 1), (1, 2)]));
        assert_eq!(rel.pairs().len(), 3);
    }

    #[test]
    fn empty_edges_give_empty_closure() {
        let rel = closure_from_edges(4, []).unwrap();
        assert!(rel.pairs().is_empty());
        assert!(transitive_reduction(&rel).is_empty());
    }

    #[test]
    fn cycles_are_rejected() {
        assert!(matches!(closure_from_edges(2, [(0, 1), (1, 0)]), Err(HasseError::CycleDetected(_))));
        assert_eq!(closure_from_edges(2, [(0, 0)]).unwrap().pairs().len(), 0);
    }

    #[test]
    fn restriction_keeps_paths_through_dropped_nodes() {
        let rel = closure_from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let sub = rel.restrict(&[0, 2]);
        assert!(sub.contains(0, 1));
        assert_eq!(transitive_reduction(&sub), BTreeSet::from([(0, 1)]));
    }

    #[test]
    fn pattern_labels() {
        let p = Pattern {
            family: "B4".into(),
            nonzero: vec!["a".into(), "a-1/2".into()],
            ..Default::default()
        };
        assert_eq!(pattern_label(&p), "B4, a ≠ 0, a-1/2 ≠ 0");
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn reduction_preserves_closure(raw in proptest::collection::vec((0usize..8, 0usize..8), 0..20)) {
            let edges: Vec<(usize, usize)> = raw.into_iter().filter(|(a, b)| a < b).collect();
            let rel = closure_from_edges(8, edges).unwrap();
            let red = transitive_reduction(&rel);
            prop_assert_eq!(closure_from_edges(8, red.iter().copied()).unwrap(), rel.clone());
            for &(a, b) in &red {
                let others = red.iter().copied().filter(|&e| e != (a, b));
                prop_assert!(!closure_from_edges(8, others).unwrap().contains(a, b));
            }
        }
    }
}
