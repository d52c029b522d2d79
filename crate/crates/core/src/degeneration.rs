//! Witness verification by exact limits, necessary conditions from invariants, and
//! machine-checked obstructions to degeneration.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{LieClass, OpExpr, Side, StructureConstants, TraceKind, WordCache};
use crate::catalog::{
    pair_env, parse_in, Catalog, CatalogError, Certificate, Env, Instance, Obstruction, Pattern, Witness,
};
use crate::exactnum::{Field, Ring, Scalar};
use crate::linalg::Matrix;
use crate::symring::{ExprError, RatFun};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Index pairs at which trace invariants are compared.
pub const TRACE_PAIRS: [(u32, u32); 3] = [(1, 1), (1, 2), (2, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Diverged,
    LimitMismatch,
    SingularFamily,
}

/// How far a witness check reaches beyond the concrete samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No parameters: the single check is the whole claim.
    Exact,
    /// Checked at the sample points only.
    Sampled,
    /// Also checked over the field of rational functions in the parameters.
    GenericIdentity,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegenerationResult {
    pub witness: String,
    pub sample: Env,
    pub source: Instance,
    pub target: Instance,
    pub status: Status,
    /// Relation of the isomorphism rule used when the limit is an isomorphic copy of the target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via_iso_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub necessary: Option<NecessaryConditionReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericOutcome {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via_iso_rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub id: String,
    #[serde(rename = "type")]
    pub type_id: u32,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generic: Option<GenericOutcome>,
    pub results: Vec<DegenerationResult>,
}

impl WitnessReport {
    pub fn verified(&self) -> bool {
        !self.results.is_empty() && self.results.iter().all(|r| r.status == Status::Verified)
    }

    pub fn necessary_ok(&self) -> bool {
        self.results.iter().all(|r| r.necessary.as_ref().is_none_or(NecessaryConditionReport::all_pass))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegenerationReport {
    pub schema_version: u32,
    pub witnesses: Vec<WitnessReport>,
    /// Witness ids with a failed sample or a failed necessary condition.
    pub failures: Vec<String>,
}

impl DegenerationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Outcome<K> {
    status: Status,
    via: Option<String>,
    limit: Option<StructureConstants<K>>,
    detail: Option<String>,
}

/// Family parameters of `pat` evaluated from witness parameters.
fn endpoint_env<K: Field>(
    cat: &Catalog,
    w: &Witness,
    pat: &Pattern,
    penv: &BTreeMap<String, K>,
) -> Result<BTreeMap<String, K>, CatalogError> {
    let fam = cat.family(&pat.family)?;
    let syms: Vec<&str> = w.params.iter().map(String::as_str).collect();
    let mut out = BTreeMap::new();
    for p in &fam.params {
        let e = pat.params.get(&p.symbol).ok_or_else(|| CatalogError::UnboundParameter {
            family: fam.name.clone(),
            symbol: p.symbol.clone(),
        })?;
        let v = parse_in(e, &syms, &w.id)?
            .eval_map(penv)
            .map_err(|source| CatalogError::Expr { context: format!("witness {}", w.id), source })?;
        out.insert(p.symbol.clone(), v);
    }
    Ok(out)
}

/// `lim_{t -> 0} g_t . S` where `m = g_t^{-1}`; `Err` carries the offending status.
fn contract<K: Field>(
    s: &StructureConstants<K>,
    m: &Matrix<RatFun<K>>,
) -> Result<StructureConstants<K>, (Status, String)> {
    let g = m.invert().map_err(|_| (Status::SingularFamily, "det g_t^{-1} vanishes identically".to_string()))?;
    let lifted = s.map(|c| RatFun::constant(c.clone()));
    let moved = lifted.transport_with_inverse(&g, m).map_err(|e| (Status::SingularFamily, e.to_string()))?;
    let n = s.dim();
    let mut out = StructureConstants::zero(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = moved.get(i, j, k).limit_at_zero().map_err(|_| {
                    (Status::Diverged, format!("coefficient of e{} in e{}*e{} has a pole at t = 0", k + 1, i + 1, j + 1))
                })?;
                out.set(i, j, k, v);
            }
        }
    }
    Ok(out)
}

fn run<K: Field + fmt::Display>(
    cat: &Catalog,
    w: &Witness,
    rows: &[Vec<String>],
    penv: &BTreeMap<String, K>,
) -> Result<Outcome<K>, CatalogError> {
    let mut menv: BTreeMap<String, RatFun<K>> =
        penv.iter().map(|(k, v)| (k.clone(), RatFun::constant(v.clone()))).collect();
    menv.insert("t".into(), RatFun::t());
    let m = cat.witness_matrix_in(rows, w, &menv)?;
    let src_env = endpoint_env(cat, w, &w.source, penv)?;
    let tgt_env = endpoint_env(cat, w, &w.target, penv)?;
    let src = cat.instantiate_in(&w.source.family, &src_env)?;
    let tgt = cat.instantiate_in(&w.target.family, &tgt_env)?;
    let limit = match contract(&src, &m) {
        Ok(l) => l,
        Err((status, detail)) => return Ok(Outcome { status, via: None, limit: None, detail: Some(detail) }),
    };
    if limit == tgt {
        return Ok(Outcome { status: Status::Verified, via: None, limit: Some(limit), detail: None });
    }
    let fam = cat.family(&w.target.family)?;
    let syms = fam.symbols();
    for rule in cat.iso_rules().iter().filter(|r| r.family == w.target.family) {
        let mut img = tgt_env.clone();
        let mut ok = true;
        for (sym, e) in &rule.target_params {
            match parse_in(e, &syms, &rule.relation)?.eval_map(&tgt_env) {
                Ok(v) => {
                    img.insert(sym.clone(), v);
                }
                Err(ExprError::DivisionByZero) => ok = false,
                Err(source) => return Err(CatalogError::Expr { context: rule.relation.clone(), source }),
            }
        }
        if ok && cat.instantiate_in(&w.target.family, &img)? == limit {
            return Ok(Outcome {
                status: Status::Verified,
                via: Some(rule.relation.clone()),
                limit: Some(limit),
                detail: None,
            });
        }
    }
    Ok(Outcome {
        status: Status::LimitMismatch,
        via: None,
        detail: Some(format!("limit {limit} differs from target {tgt}")),
        limit: Some(limit),
    })
}

/// Verifies one witness at one parameter point using its stored matrix.
pub fn apply_witness(cat: &Catalog, w: &Witness, sample: &Env) -> Result<DegenerationResult, CatalogError> {
    apply_witness_matrix(cat, w, &w.matrix, sample)
}

/// Like [`apply_witness`] with an explicit `g_t^{-1}`.
pub fn apply_witness_matrix(
    cat: &Catalog,
    w: &Witness,
    rows: &[Vec<String>],
    sample: &Env,
) -> Result<DegenerationResult, CatalogError> {
    let (source, target) = cat.witness_endpoints(w, sample)?;
    let out = run(cat, w, rows, sample)?;
    Ok(DegenerationResult {
        witness: w.id.clone(),
        sample: sample.clone(),
        source,
        target,
        status: out.status,
        via_iso_rule: out.via,
        limit: out.limit.map(|l| l.to_string()),
        detail: out.detail,
        necessary: None,
    })
}

/// Symbolic check with the witness parameters as indeterminates (up to two, no side constraints).
pub fn apply_witness_generic(cat: &Catalog, w: &Witness) -> Result<Option<GenericOutcome>, CatalogError> {
    if !w.constraints.is_empty() {
        return Ok(None);
    }
    let pack = |status, via, detail| GenericOutcome { status, via_iso_rule: via, detail };
    match w.params.as_slice() {
        [p] => {
            let penv = BTreeMap::from([(p.clone(), RatFun::<Scalar>::t())]);
            let o = run(cat, w, &w.matrix, &penv)?;
            Ok(Some(pack(o.status, o.via, o.detail)))
        }
        [p, q] => {
            let penv = BTreeMap::from([
                (p.clone(), RatFun::constant(RatFun::<Scalar>::t())),
                (q.clone(), RatFun::<RatFun<Scalar>>::t()),
            ]);
            let o = run(cat, w, &w.matrix, &penv)?;
            Ok(Some(pack(o.status, o.via, o.detail)))
        }
        _ => Ok(None),
    }
}

/// Every sample of one witness, plus the symbolic check when available.
pub fn verify_witness(cat: &Catalog, w: &Witness) -> Result<WitnessReport, CatalogError> {
    let samples = cat.witness_samples(w)?;
    let results = samples.par_iter().map(|env| apply_witness(cat, w, env)).collect::<Result<Vec<_>, _>>()?;
    let generic = apply_witness_generic(cat, w)?;
    let regime = if w.params.is_empty() {
        Regime::Exact
    } else if generic.as_ref().is_some_and(|g| g.status == Status::Verified) {
        Regime::GenericIdentity
    } else {
        Regime::Sampled
    };
    Ok(WitnessReport { id: w.id.clone(), type_id: w.type_id, regime, generic, results })
}

/// All witnesses of the selected types, with necessary conditions along each verified edge.
pub fn verify_degenerations(
    cat: &Catalog,
    engine: &Engine,
    types: Option<&[u32]>,
) -> Result<DegenerationReport, CatalogError> {
    let selected: Vec<&Witness> =
        cat.witnesses().iter().filter(|w| types.is_none_or(|ts| ts.contains(&w.type_id))).collect();
    let mut witnesses = selected.par_iter().map(|w| verify_witness(cat, w)).collect::<Result<Vec<_>, _>>()?;
    witnesses.par_iter_mut().try_for_each(|rep| -> Result<(), CatalogError> {
        for r in rep.results.iter_mut().filter(|r| r.status == Status::Verified) {
            let a = engine.profile(&r.source)?;
            let b = engine.profile(&r.target)?;
            r.necessary = Some(engine.necessary_conditions(&a, &b));
        }
        Ok(())
    })?;
    let failures = witnesses.iter().filter(|w| !w.verified() || !w.necessary_ok()).map(|w| w.id.clone()).collect();
    Ok(DegenerationReport { schema_version: REPORT_SCHEMA_VERSION, witnesses, failures })
}

/// Cached invariants of one algebra.
#[derive(Debug)]
pub struct Profile {
    pub algebra: StructureConstants,
    pub der: usize,
    pub square: usize,
    pub annihilators: (usize, usize),
    pub complete: bool,
    pub traces: BTreeMap<(TraceKind, u32, u32), Option<Scalar>>,
    pub lie: Option<LieClass>,
    pub jordan_associative: bool,
    gen_der: Mutex<HashMap<[Scalar; 3], usize>>,
    identities: OnceLock<Vec<bool>>,
    jordan: OnceLock<Box<Profile>>,
}

impl Profile {
    pub fn new(algebra: StructureConstants) -> Self {
        let one = Scalar::one();
        let mut traces = BTreeMap::new();
        for kind in [TraceKind::C, TraceKind::D] {
            for (i, j) in TRACE_PAIRS {
                traces.insert((kind, i, j), algebra.trace_invariant(kind, i, j));
            }
        }
        Profile {
            der: algebra.derivation_dim(&one, &one, &one),
            square: algebra.square_dim(),
            annihilators: algebra.annihilator_dims(),
            complete: algebra.is_complete(),
            lie: algebra.lie_class().ok(),
            jordan_associative: algebra.associated_algebras().jordan_associative,
            traces,
            algebra,
            gen_der: Mutex::new(HashMap::new()),
            identities: OnceLock::new(),
            jordan: OnceLock::new(),
        }
    }

    pub fn gen_der(&self, w: &[Scalar; 3]) -> usize {
        if let Some(&d) = self.gen_der.lock().expect("poisoned").get(w) {
            return d;
        }
        let d = self.algebra.derivation_dim(&w[0], &w[1], &w[2]);
        self.gen_der.lock().expect("poisoned").insert(w.clone(), d);
        d
    }

    pub fn jordan(&self) -> &Profile {
        self.jordan.get_or_init(|| Box::new(Profile::new(self.algebra.associated_algebras().jordan)))
    }

    pub fn annihilator(&self, side: Side) -> usize {
        match side {
            Side::Left => self.annihilators.0,
            Side::Right => self.annihilators.1,
        }
    }

    /// Some isomorphism invariant differs.
    pub fn separated_from(&self, o: &Profile) -> bool {
        self.der != o.der
            || self.square != o.square
            || self.annihilators != o.annihilators
            || self.complete != o.complete
            || self.traces != o.traces
            || matches!((&self.lie, &o.lie), (Some(a), Some(b)) if a != b)
    }
}

/// Operator identity from the catalog, bound at one point of its parameter pools.
#[derive(Debug, Clone)]
pub struct RegisteredIdentity {
    pub label: String,
    pub expr: OpExpr,
    pub determinant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct NecessaryConditionReport {
    pub verdicts: Vec<Verdict>,
}

impl NecessaryConditionReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }

    fn push(&mut self, check: impl Into<String>, pass: bool, detail: String) {
        self.verdicts.push(Verdict { check: check.into(), pass, detail });
    }
}

/// A certificate that machine-checked, with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoundCertificate {
    pub label: String,
    pub detail: String,
    /// Taken from a catalog obstruction record rather than the standard battery.
    pub from_record: bool,
}

fn fixed_weights() -> Vec<[Scalar; 3]> {
    let (z, o) = (Scalar::zero(), Scalar::one());
    vec![
        [z.clone(), o.clone(), z.clone()],
        [z.clone(), z.clone(), o.clone()],
        [o.clone(), o.clone(), z.clone()],
        [o.clone(), z.clone(), o.clone()],
    ]
}

/// Weight triples that depend on a parameter value `p`.
fn parametric_weights(p: &Scalar) -> Vec<[Scalar; 3]> {
    let (z, o) = (Scalar::zero(), Scalar::one());
    let mut out = vec![[o.clone(), p.clone(), o.clone()]];
    if let Ok(v) = p.div(&o.sub(p)) {
        out.push([z.clone(), o.clone(), v]);
    }
    if let Ok(v) = o.sub(p).div(p) {
        out.push([z.clone(), v, o.clone()]);
    }
    if let Ok(v) = p.neg().div(&o.add(p)) {
        out.push([z.clone(), o.clone(), v]);
    }
    out
}

/// Weight triples tried by the battery for a pair whose parameter values are `params`.
pub fn standard_weights<'a>(params: impl IntoIterator<Item = &'a Scalar>) -> Vec<[Scalar; 3]> {
    let mut out = fixed_weights();
    for p in params {
        for w in parametric_weights(p) {
            if !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}

fn fmt_weights(w: &[Scalar; 3]) -> String {
    format!("({}, {}, {})", w[0], w[1], w[2])
}

fn fmt_opt(v: &Option<Scalar>) -> String {
    v.as_ref().map_or("undefined".into(), ToString::to_string)
}

/// Invariant machinery shared by witness checks and the Hasse cross-validation.
pub struct Engine<'c> {
    cat: &'c Catalog,
    identities: Vec<RegisteredIdentity>,
    profiles: Mutex<HashMap<Instance, Arc<Profile>>>,
}

impl<'c> Engine<'c> {
    pub fn new(cat: &'c Catalog) -> Result<Self, CatalogError> {
        let mut identities = Vec::new();
        for id in &cat.file().operator_identities {
            for (env, expr) in cat.identity_instances(&id.name)? {
                let args: Vec<String> = env.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let label = if args.is_empty() { id.name.clone() } else { format!("{}({})", id.name, args.join(", ")) };
                identities.push(RegisteredIdentity { label, expr, determinant: id.determinant });
            }
        }
        Ok(Engine { cat, identities, profiles: Mutex::new(HashMap::new()) })
    }

    pub fn catalog(&self) -> &'c Catalog {
        self.cat
    }

    pub fn identities(&self) -> &[RegisteredIdentity] {
        &self.identities
    }

    pub fn profile(&self, inst: &Instance) -> Result<Arc<Profile>, CatalogError> {
        if let Some(p) = self.profiles.lock().expect("poisoned").get(inst) {
            return Ok(p.clone());
        }
        let p = Arc::new(Profile::new(self.cat.instantiate_instance(inst)?));
        Ok(self.profiles.lock().expect("poisoned").entry(inst.clone()).or_insert(p).clone())
    }

    /// Which registered identities hold on the algebra, in registration order.
    pub fn identity_flags<'p>(&self, p: &'p Profile) -> &'p [bool] {
        p.identities.get_or_init(|| {
            let (l, r) = p.algebra.left_right_operators();
            let mut cache = WordCache::new(l, r);
            self.identities
                .iter()
                .map(|id| {
                    let m = id.expr.evaluate_in(&mut cache);
                    if id.determinant {
                        m.det_expand().expect("square").is_zero()
                    } else {
                        m.is_zero()
                    }
                })
                .collect()
        })
    }

    fn monotone(&self, a: &Profile, b: &Profile, strict: bool, out: &mut NecessaryConditionReport, prefix: &str) {
        let strict = strict || a.separated_from(b);
        let der_ok = if strict { a.der < b.der } else { a.der <= b.der };
        let rel = if strict { "<" } else { "<=" };
        out.push(format!("{prefix}der_dim"), der_ok, format!("{} {rel} {}", a.der, b.der));
        for w in fixed_weights() {
            let (x, y) = (a.gen_der(&w), b.gen_der(&w));
            out.push(format!("{prefix}gen_der{}", fmt_weights(&w)), x <= y, format!("{x} <= {y}"));
        }
        out.push(format!("{prefix}square_dim"), a.square >= b.square, format!("{} >= {}", a.square, b.square));
        for (side, name) in [(Side::Left, "left_annihilator"), (Side::Right, "right_annihilator")] {
            let (x, y) = (a.annihilator(side), b.annihilator(side));
            out.push(format!("{prefix}{name}"), x <= y, format!("{x} <= {y}"));
        }
        out.push(
            format!("{prefix}completeness"),
            !a.complete || b.complete,
            format!("{} -> {}", a.complete, b.complete),
        );
        for (key, va) in &a.traces {
            let vb = &b.traces[key];
            let pass = !(va.is_some() && vb.is_some() && va != vb);
            let name = if key.0 == TraceKind::C { "c" } else { "d" };
            out.push(
                format!("{prefix}{name}_{{{},{}}}", key.1, key.2),
                pass,
                format!("{} vs {}", fmt_opt(va), fmt_opt(vb)),
            );
        }
    }

    /// One verdict per necessary condition for a claimed proper degeneration `a -> b`.
    pub fn necessary_conditions(&self, a: &Profile, b: &Profile) -> NecessaryConditionReport {
        let mut out = NecessaryConditionReport::default();
        self.monotone(a, b, true, &mut out, "");
        let (fa, fb) = (self.identity_flags(a), self.identity_flags(b));
        let lost: Vec<&str> = self
            .identities
            .iter()
            .zip(fa.iter().zip(fb))
            .filter(|(_, (x, y))| **x && !**y)
            .map(|(id, _)| id.label.as_str())
            .collect();
        out.push("operator_identities", lost.is_empty(), if lost.is_empty() { "inherited".into() } else { format!("lost: {}", lost.join(", ")) });
        match (&a.lie, &b.lie) {
            (Some(x), Some(y)) => out.push("lie_type", x.degenerates_to(y), format!("{x} -> {y}")),
            _ => out.push("lie_type", false, "Lie algebra not classified".into()),
        }
        if a.jordan_associative && b.jordan_associative {
            let mut j = NecessaryConditionReport::default();
            self.monotone(a.jordan(), b.jordan(), false, &mut j, "jordan.");
            out.verdicts.extend(j.verdicts);
        }
        out
    }

    /// Obstruction records whose patterns and pair conditions select `(a, b)`.
    pub fn matching_records(&self, a: &Instance, b: &Instance) -> Result<Vec<&'c Obstruction>, CatalogError> {
        let (ea, eb) = (self.cat.env_of(a)?, self.cat.env_of(b)?);
        let pe = pair_env(&ea, &eb);
        let mut out = Vec::new();
        for o in self.cat.obstructions() {
            if self.cat.node_matches(&o.source, a)?
                && self.cat.node_matches(&o.target, b)?
                && self.cat.conditions_hold(&o.pair_zero, &o.pair_nonzero, &pe)?
            {
                out.push(o);
            }
        }
        Ok(out)
    }

    /// `Some(detail)` when `cert` proves `a` does not degenerate properly to `b`.
    pub fn check_certificate(
        &self,
        cert: &Certificate,
        a: &Instance,
        b: &Instance,
    ) -> Result<Option<String>, CatalogError> {
        let (pa, pb) = (self.profile(a)?, self.profile(b)?);
        Ok(match cert {
            Certificate::DerDim => (pa.der >= pb.der).then(|| format!("dim Der {} >= {}", pa.der, pb.der)),
            Certificate::GeneralizedDerivation { weights } => {
                match self.cat.weights_at(&a.family, weights, &self.cat.env_of(a)?) {
                    Ok(w) => {
                        let (x, y) = (pa.gen_der(&w), pb.gen_der(&w));
                        (x > y).then(|| format!("dim Der{} {x} > {y}", fmt_weights(&w)))
                    }
                    Err(CatalogError::Expr { source: ExprError::DivisionByZero, .. }) => None,
                    Err(e) => return Err(e),
                }
            }
            Certificate::SquareDim => {
                (pa.square < pb.square).then(|| format!("dim A.A {} < {}", pa.square, pb.square))
            }
            Certificate::Annihilator { side } => {
                let (x, y) = (pa.annihilator(*side), pb.annihilator(*side));
                (x > y).then(|| format!("dim {side:?} annihilator {x} > {y}").to_lowercase())
            }
            Certificate::TraceInvariant { kind, i, j } => {
                let (x, y) = (&pa.traces_at(*kind, *i, *j), &pb.traces_at(*kind, *i, *j));
                match (x, y) {
                    (Some(x), Some(y)) if x != y => Some(format!("{} {x} vs {y}", cert.label())),
                    _ => None,
                }
            }
            Certificate::OperatorIdentity { identity, bind } => {
                let t = match self.cat.bound_identity(&a.family, identity, bind, &self.cat.env_of(a)?) {
                    Ok(t) => t,
                    Err(CatalogError::Expr { source: ExprError::DivisionByZero, .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let det = self.cat.identity(identity)?.determinant;
                let holds = |s: &StructureConstants| {
                    if det {
                        s.check_determinant_identity(&t)
                    } else {
                        s.check_operator_identity(&t)
                    }
                };
                (holds(&pa.algebra) && !holds(&pb.algebra)).then(|| format!("{identity} holds on {a} but not on {b}"))
            }
            Certificate::Completeness => (pa.complete && !pb.complete).then(|| format!("{a} is complete, {b} is not")),
            Certificate::LieType => match (&pa.lie, &pb.lie) {
                (Some(x), Some(y)) if !x.degenerates_to(y) => Some(format!("{x} does not degenerate to {y}")),
                _ => None,
            },
            Certificate::Jordan => self.jordan_obstruction(&pa, &pb),
        })
    }

    fn jordan_obstruction(&self, a: &Profile, b: &Profile) -> Option<String> {
        let mut rep = NecessaryConditionReport::default();
        self.monotone(a.jordan(), b.jordan(), false, &mut rep, "jordan.");
        let fails: Vec<String> = rep.failures().map(|v| format!("{} ({})", v.check, v.detail)).collect();
        (!fails.is_empty()).then(|| fails.join("; "))
    }

    /// First machine-checked certificate: hinted records first, then the standard battery.
    pub fn certify_non_degeneration(
        &self,
        a: &Instance,
        b: &Instance,
        hints: &[&Obstruction],
    ) -> Result<Option<FoundCertificate>, CatalogError> {
        for o in hints {
            let cert = self.cat.certificate(o)?;
            if let Some(detail) = self.check_certificate(&cert, a, b)? {
                return Ok(Some(FoundCertificate { label: cert.label(), detail, from_record: true }));
            }
        }
        self.battery(a, b)
    }

    fn battery(&self, a: &Instance, b: &Instance) -> Result<Option<FoundCertificate>, CatalogError> {
        let found = |label: String, detail: String| Ok(Some(FoundCertificate { label, detail, from_record: false }));
        for cert in [
            Certificate::DerDim,
            Certificate::SquareDim,
            Certificate::Annihilator { side: Side::Left },
            Certificate::Annihilator { side: Side::Right },
            Certificate::Completeness,
            Certificate::LieType,
        ] {
            if let Some(d) = self.check_certificate(&cert, a, b)? {
                return found(cert.label(), d);
            }
        }
        for kind in [TraceKind::C, TraceKind::D] {
            for (i, j) in TRACE_PAIRS {
                let cert = Certificate::TraceInvariant { kind, i, j };
                if let Some(d) = self.check_certificate(&cert, a, b)? {
                    return found(cert.label(), d);
                }
            }
        }
        let (pa, pb) = (self.profile(a)?, self.profile(b)?);
        let (fa, fb) = (self.identity_flags(&pa), self.identity_flags(&pb));
        if let Some(k) = (0..self.identities.len()).find(|&k| fa[k] && !fb[k]) {
            let id = &self.identities[k];
            return found(format!("operator_identity({})", id.label), format!("holds on {a} but not on {b}"));
        }
        for w in &standard_weights(a.values.iter().chain(&b.values)) {
            let (x, y) = (pa.gen_der(w), pb.gen_der(w));
            if x > y {
                return found(format!("gen_der{}", fmt_weights(w)), format!("{x} > {y}"));
            }
        }
        if let Some(d) = self.jordan_obstruction(&pa, &pb) {
            return found("jordan".into(), d);
        }
        Ok(None)
    }
}

impl Profile {
    pub fn traces_at(&self, kind: TraceKind, i: u32, j: u32) -> Option<Scalar> {
        match self.traces.get(&(kind, i, j)) {
            Some(v) => v.clone(),
            None => self.algebra.trace_invariant(kind, i, j),
        }
    }
}
