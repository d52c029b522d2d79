//! The transcribed classification: families, isomorphisms, derivation table,
//! closure tables, obstruction records, diagrams and degeneration witnesses.

mod audit;
mod model;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::algebra::{LieClass, OpExpr, Side, StructureConstants, TraceKind};
use crate::exactnum::{Field, Ring, Scalar};
use crate::linalg::Matrix;
use crate::symring::{parse_expr, Expr, ExprError};

pub use audit::{audit, AuditCheck, AuditFinding, AuditReport};
pub use model::*;

/// The catalog as shipped with the crate.
pub const SHIPPED_JSON: &str = include_str!("../../data/catalog.json");

pub type Env = BTreeMap<String, Scalar>;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed catalog: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {source}")]
    Expr { context: String, source: ExprError },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("unknown operator identity {0:?}")]
    UnknownIdentity(String),
    #[error("unknown witness {0:?}")]
    UnknownWitness(String),
    #[error("{family}: {symbol} = {value} is excluded")]
    InadmissibleParameter { family: String, symbol: String, value: Scalar },
    #[error("{family}: parameter {symbol} has no value")]
    UnboundParameter { family: String, symbol: String },
    #[error("invalid catalog: {0}")]
    Invalid(String),
}

fn expr_err(context: impl Into<String>) -> impl FnOnce(ExprError) -> CatalogError {
    let context = context.into();
    move |source| CatalogError::Expr { context, source }
}

/// Parses `s` over `symbols`, attaching `context` to any error.
pub fn parse_in(s: &str, symbols: &[&str], context: &str) -> Result<Expr, CatalogError> {
    parse_expr(s, symbols).map_err(expr_err(format!("{context}: {s:?}")))
}

/// A family together with concrete parameter values in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub family: String,
    pub values: Vec<Scalar>,
}

/// Splits `E12` into `("E", 12)` so that `A2 < A10`.
pub fn family_key(name: &str) -> (&str, u64) {
    let cut = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    (&name[..cut], name[cut..].parse().unwrap_or(0))
}

impl Ord for Instance {
    fn cmp(&self, o: &Self) -> Ordering {
        family_key(&self.family)
            .cmp(&family_key(&o.family))
            .then_with(|| self.family.cmp(&o.family))
            .then_with(|| self.values.cmp(&o.values))
    }
}

impl PartialOrd for Instance {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl serde::Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.family)?;
        if !self.values.is_empty() {
            let vs: Vec<String> = self.values.iter().map(ToString::to_string).collect();
            write!(f, "({})", vs.join(", "))?;
        }
        Ok(())
    }
}

/// Environment of a source/target pair: source symbols as is, target symbols uppercased.
pub fn pair_env(source: &Env, target: &Env) -> Env {
    let mut env = source.clone();
    env.extend(target.iter().map(|(k, v)| (k.to_uppercase(), v.clone())));
    env
}

fn cartesian(axes: &[(String, Vec<Scalar>)]) -> Vec<Env> {
    let mut out = vec![Env::new()];
    for (sym, vals) in axes {
        out = out
            .into_iter()
            .flat_map(|env| {
                vals.iter().map(move |v| {
                    let mut e = env.clone();
                    e.insert(sym.clone(), v.clone());
                    e
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone)]
pub struct Catalog {
    file: CatalogFile,
    family_index: HashMap<String, usize>,
}

impl Catalog {
    pub fn from_json_str(s: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = serde_json::from_str(s)?;
        Self::from_file(file)
    }

    pub fn from_file(file: CatalogFile) -> Result<Self, CatalogError> {
        let family_index = file.families.iter().enumerate().map(|(k, f)| (f.name.clone(), k)).collect();
        let cat = Catalog { file, family_index };
        cat.validate()?;
        Ok(cat)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| CatalogError::Io { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text)
    }

    pub fn shipped() -> Self {
        Self::from_json_str(SHIPPED_JSON).expect("shipped catalog is valid")
    }

    pub fn file(&self) -> &CatalogFile {
        &self.file
    }

    pub fn families(&self) -> &[FamilySpec] {
        &self.file.families
    }

    pub fn family(&self, name: &str) -> Result<&FamilySpec, CatalogError> {
        self.family_index
            .get(name)
            .map(|&k| &self.file.families[k])
            .ok_or_else(|| CatalogError::UnknownFamily(name.to_string()))
    }

    pub fn iso_rules(&self) -> &[IsoRule] {
        &self.file.iso_rules
    }

    pub fn witnesses(&self) -> &[Witness] {
        &self.file.witnesses
    }

    pub fn witness(&self, id: &str) -> Result<&Witness, CatalogError> {
        self.file.witnesses.iter().find(|w| w.id == id).ok_or_else(|| CatalogError::UnknownWitness(id.into()))
    }

    pub fn closure_tables(&self) -> &[ClosureTable] {
        &self.file.closure_tables
    }

    pub fn obstructions(&self) -> &[Obstruction] {
        &self.file.obstructions
    }

    pub fn manual_arguments(&self) -> &[ManualArgument] {
        &self.file.manual_arguments
    }

    pub fn diagrams(&self) -> &[Diagram] {
        &self.file.diagrams
    }

    pub fn type_ids(&self) -> Vec<u32> {
        let ids: BTreeSet<u32> = self.file.closure_tables.iter().map(|t| t.type_id).collect();
        ids.into_iter().collect()
    }

    fn eval_const(&self, s: &str, symbols: &[&str], env: &Env, context: &str) -> Result<Scalar, CatalogError> {
        parse_in(s, symbols, context)?.eval_map(env).map_err(expr_err(format!("{context}: {s:?}")))
    }

    fn pool(&self, name: &str) -> Result<Vec<Scalar>, CatalogError> {
        let raw = self
            .file
            .sample_pools
            .get(name)
            .ok_or_else(|| CatalogError::Invalid(format!("unknown sample pool {name:?}")))?;
        raw.iter().map(|s| self.eval_const(s, &[], &Env::new(), "sample pool")).collect()
    }

    fn excluded(&self, fam: &FamilySpec, p: &ParamSpec) -> Result<Vec<Scalar>, CatalogError> {
        p.excluded.iter().map(|s| self.eval_const(s, &[], &Env::new(), &fam.name)).collect()
    }

    /// Admissible sample values of one parameter.
    pub fn param_grid(&self, family: &str, symbol: &str) -> Result<Vec<Scalar>, CatalogError> {
        let fam = self.family(family)?;
        let p = fam
            .params
            .iter()
            .find(|p| p.symbol == symbol)
            .ok_or_else(|| CatalogError::UnboundParameter { family: family.into(), symbol: symbol.into() })?;
        let raw = match (&p.samples, &p.pool) {
            (Some(s), _) => {
                s.iter().map(|v| self.eval_const(v, &[], &Env::new(), &fam.name)).collect::<Result<_, _>>()?
            }
            (None, Some(pool)) => self.pool(pool)?,
            (None, None) => return Err(CatalogError::Invalid(format!("{family}.{symbol} has no samples"))),
        };
        let excluded = self.excluded(fam, p)?;
        let mut out: Vec<Scalar> = Vec::new();
        for v in raw {
            if !excluded.contains(&v) && !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Every combination of admissible parameter samples.
    pub fn default_samples(&self, family: &str) -> Result<Vec<Env>, CatalogError> {
        let fam = self.family(family)?;
        let axes = fam
            .params
            .iter()
            .map(|p| Ok((p.symbol.clone(), self.param_grid(family, &p.symbol)?)))
            .collect::<Result<Vec<_>, CatalogError>>()?;
        Ok(cartesian(&axes))
    }

    pub fn instances(&self, family: &str) -> Result<Vec<Instance>, CatalogError> {
        self.default_samples(family)?.iter().map(|env| self.instance(family, env)).collect()
    }

    pub fn all_instances(&self) -> Result<Vec<Instance>, CatalogError> {
        let mut out = Vec::new();
        for f in &self.file.families {
            out.extend(self.instances(&f.name)?);
        }
        out.sort();
        Ok(out)
    }

    pub fn instance(&self, family: &str, env: &Env) -> Result<Instance, CatalogError> {
        let fam = self.family(family)?;
        let values = fam
            .params
            .iter()
            .map(|p| {
                env.get(&p.symbol).cloned().ok_or_else(|| CatalogError::UnboundParameter {
                    family: family.into(),
                    symbol: p.symbol.clone(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Instance { family: family.into(), values })
    }

    pub fn env_of(&self, inst: &Instance) -> Result<Env, CatalogError> {
        let fam = self.family(&inst.family)?;
        if fam.params.len() != inst.values.len() {
            return Err(CatalogError::Invalid(format!("{inst} has the wrong number of parameters")));
        }
        Ok(fam.params.iter().map(|p| p.symbol.clone()).zip(inst.values.iter().cloned()).collect())
    }

    pub fn check_admissible(&self, family: &str, env: &Env) -> Result<(), CatalogError> {
        let fam = self.family(family)?;
        for p in &fam.params {
            let v = env.get(&p.symbol).ok_or_else(|| CatalogError::UnboundParameter {
                family: family.into(),
                symbol: p.symbol.clone(),
            })?;
            if self.excluded(fam, p)?.contains(v) {
                return Err(CatalogError::InadmissibleParameter {
                    family: family.into(),
                    symbol: p.symbol.clone(),
                    value: v.clone(),
                });
            }
        }
        Ok(())
    }

    /// Structure constants of the family at admissible parameters.
    pub fn instantiate(&self, family: &str, env: &Env) -> Result<StructureConstants, CatalogError> {
        self.check_admissible(family, env)?;
        self.instantiate_in(family, env)
    }

    pub fn instantiate_instance(&self, inst: &Instance) -> Result<StructureConstants, CatalogError> {
        self.instantiate(&inst.family, &self.env_of(inst)?)
    }

    /// Structure constants over any field; no admissibility check.
    pub fn instantiate_in<K: Field>(
        &self,
        family: &str,
        env: &BTreeMap<String, K>,
    ) -> Result<StructureConstants<K>, CatalogError> {
        let fam = self.family(family)?;
        let syms = fam.symbols();
        let mut s = StructureConstants::zero(3);
        for (ij, row) in &fam.products {
            let (i, j) = parse_pair(ij).ok_or_else(|| CatalogError::Invalid(format!("{family}: bad key {ij:?}")))?;
            for (k, coeff) in row {
                let k: usize = k.parse().map_err(|_| CatalogError::Invalid(format!("{family}: bad index {k:?}")))?;
                let v = parse_in(coeff, &syms, family)?.eval_map(env).map_err(expr_err(family))?;
                s.set(i - 1, j - 1, k - 1, v);
            }
        }
        Ok(s)
    }

    /// Expected dimension of the derivation algebra.
    pub fn table1_expected(&self, family: &str, env: &Env) -> Result<usize, CatalogError> {
        self.check_admissible(family, env)?;
        let fam = self.family(family)?;
        let syms = fam.symbols();
        let rows = self
            .file
            .table1
            .get(family)
            .ok_or_else(|| CatalogError::Invalid(format!("no derivation entry for {family}")))?;
        for row in rows {
            let mut all = true;
            for z in &row.zero {
                all &= self.eval_const(z, &syms, env, family)?.is_zero();
            }
            if all {
                return Ok(row.dim);
            }
        }
        Err(CatalogError::Invalid(format!("no derivation entry for {family} matches")))
    }

    pub fn expected_lie(&self, family: &str, env: &Env) -> Result<LieClass, CatalogError> {
        let fam = self.family(family)?;
        let lambda = match &fam.lie.lambda {
            Some(l) => Some(self.eval_const(l, &fam.symbols(), env, family)?),
            None => None,
        };
        LieClass::from_tag(&fam.lie.tag, lambda.as_ref())
            .ok_or_else(|| CatalogError::Invalid(format!("{family}: bad Lie data")))
    }

    /// Whether `inst` is selected by `pat`, reading `pat.params` in `outer`.
    pub fn pattern_matches(&self, pat: &Pattern, inst: &Instance, outer: &Env) -> Result<bool, CatalogError> {
        if pat.family != inst.family {
            return Ok(false);
        }
        let fam = self.family(&inst.family)?;
        let env = self.env_of(inst)?;
        let outer_syms: Vec<&str> = outer.keys().map(String::as_str).collect();
        for (sym, e) in &pat.params {
            let want = match parse_in(e, &outer_syms, &fam.name)?.eval_map(outer) {
                Ok(v) => v,
                Err(ExprError::DivisionByZero) => return Ok(false),
                Err(err) => return Err(expr_err(&fam.name)(err)),
            };
            match env.get(sym) {
                Some(v) if *v == want => {}
                Some(_) => return Ok(false),
                None => return Err(CatalogError::UnboundParameter { family: fam.name.clone(), symbol: sym.clone() }),
            }
        }
        self.conditions_hold(&pat.zero, &pat.nonzero, &env)
    }

    /// Node patterns: fixed values, no outer environment.
    pub fn node_matches(&self, pat: &Pattern, inst: &Instance) -> Result<bool, CatalogError> {
        self.pattern_matches(pat, inst, &Env::new())
    }

    /// All `zero` expressions vanish and all `nonzero` ones do not; a pole counts as failure.
    pub fn conditions_hold(&self, zero: &[String], nonzero: &[String], env: &Env) -> Result<bool, CatalogError> {
        let syms: Vec<&str> = env.keys().map(String::as_str).collect();
        for (list, want_zero) in [(zero, true), (nonzero, false)] {
            for e in list {
                match parse_in(e, &syms, "condition")?.eval_map(env) {
                    Ok(v) if v.is_zero() == want_zero => {}
                    Ok(_) | Err(ExprError::DivisionByZero) => return Ok(false),
                    Err(err) => return Err(expr_err(format!("condition {e:?}"))(err)),
                }
            }
        }
        Ok(true)
    }

    /// Instances of `pat` on the sample grid.
    pub fn pattern_instances(&self, pat: &Pattern) -> Result<Vec<Instance>, CatalogError> {
        let mut out = Vec::new();
        for inst in self.instances(&pat.family)? {
            if self.node_matches(pat, &inst)? {
                out.push(inst);
            }
        }
        Ok(out)
    }

    /// Images of `inst` under each applicable isomorphism rule, with the rule index.
    pub fn iso_images(&self, inst: &Instance) -> Result<Vec<(usize, Instance)>, CatalogError> {
        let env = self.env_of(inst)?;
        let fam = self.family(&inst.family)?;
        let syms = fam.symbols();
        let mut out = Vec::new();
        for (k, rule) in self.file.iso_rules.iter().enumerate() {
            if rule.family != inst.family {
                continue;
            }
            let mut img = env.clone();
            let mut ok = true;
            for (sym, e) in &rule.target_params {
                match parse_in(e, &syms, &rule.relation)?.eval_map(&env) {
                    Ok(v) => {
                        img.insert(sym.clone(), v);
                    }
                    Err(ExprError::DivisionByZero) => ok = false,
                    Err(err) => return Err(expr_err(&rule.relation)(err)),
                }
            }
            if ok && self.check_admissible(&inst.family, &img).is_ok() {
                out.push((k, self.instance(&inst.family, &img)?));
            }
        }
        Ok(out)
    }

    /// Everything reachable from `inst` through isomorphism rules, `inst` included.
    pub fn iso_closure(&self, inst: &Instance) -> Result<BTreeSet<Instance>, CatalogError> {
        let mut seen = BTreeSet::from([inst.clone()]);
        let mut todo = vec![inst.clone()];
        while let Some(cur) = todo.pop() {
            for (_, img) in self.iso_images(&cur)? {
                if seen.insert(img.clone()) {
                    todo.push(img);
                }
            }
        }
        Ok(seen)
    }

    /// Basis-change matrix of a rule at `env`; its columns are the new basis.
    pub fn iso_rule_matrix_in<K: Field>(
        &self,
        rule: &IsoRule,
        env: &BTreeMap<String, K>,
    ) -> Result<Matrix<K>, CatalogError> {
        let fam = self.family(&rule.family)?;
        eval_matrix(&rule.matrix, &fam.symbols(), env, &rule.relation)
    }

    pub fn identity(&self, name: &str) -> Result<&OperatorIdentity, CatalogError> {
        self.file
            .operator_identities
            .iter()
            .find(|i| i.name == name)
            .ok_or_else(|| CatalogError::UnknownIdentity(name.into()))
    }

    pub fn instantiate_identity(&self, name: &str, env: &Env) -> Result<OpExpr, CatalogError> {
        let id = self.identity(name)?;
        let bound: Env =
            id.params.iter().filter_map(|p| env.get(&p.symbol).map(|v| (p.symbol.clone(), v.clone()))).collect();
        OpExpr::parse(&id.expr, &bound).map_err(expr_err(format!("identity {name}")))
    }

    /// The identity at every admissible point of its parameter pools.
    pub fn identity_instances(&self, name: &str) -> Result<Vec<(Env, OpExpr)>, CatalogError> {
        let id = self.identity(name)?;
        let mut axes = Vec::new();
        for p in &id.params {
            let ex: Vec<Scalar> = p
                .excluded
                .iter()
                .map(|s| self.eval_const(s, &[], &Env::new(), name))
                .collect::<Result<_, _>>()?;
            let vals = self.pool(&p.pool)?.into_iter().filter(|v| !ex.contains(v)).collect();
            axes.push((p.symbol.clone(), vals));
        }
        cartesian(&axes).into_iter().map(|env| Ok((env.clone(), self.instantiate_identity(name, &env)?))).collect()
    }

    /// Witness parameter points: explicit samples, or the grid of the family slot each parameter fills.
    pub fn witness_samples(&self, w: &Witness) -> Result<Vec<Env>, CatalogError> {
        let points = match &w.samples {
            Some(list) => list
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|(k, v)| Ok((k.clone(), self.eval_const(v, &[], &Env::new(), &w.id)?)))
                        .collect::<Result<Env, CatalogError>>()
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => {
                let mut axes = Vec::new();
                for p in &w.params {
                    let (pat, sym) = self.witness_slot(w, p)?;
                    axes.push((p.clone(), self.param_grid(&pat.family, sym)?));
                }
                cartesian(&axes)
            }
        };
        let mut out = Vec::new();
        for env in points {
            if self.witness_point_ok(w, &env)? {
                out.push(env);
            }
        }
        Ok(out)
    }

    /// The family parameter filled directly by witness parameter `p`, target side first.
    pub fn witness_slot<'w>(&self, w: &'w Witness, p: &str) -> Result<(&'w Pattern, &'w str), CatalogError> {
        [&w.target, &w.source]
            .into_iter()
            .find_map(|pat| pat.params.iter().find(|(_, e)| e.trim() == p).map(|(s, _)| (pat, s.as_str())))
            .ok_or_else(|| CatalogError::Invalid(format!("witness {}: parameter {p} fills no family slot", w.id)))
    }

    /// Points built from given values for each witness parameter, filtered like the sample grid.
    pub fn witness_points(&self, w: &Witness, values: &BTreeMap<String, Vec<Scalar>>) -> Result<Vec<Env>, CatalogError> {
        let axes: Vec<(String, Vec<Scalar>)> =
            w.params.iter().map(|p| (p.clone(), values.get(p).cloned().unwrap_or_default())).collect();
        let mut out = Vec::new();
        for env in cartesian(&axes) {
            if self.witness_point_ok(w, &env)? {
                out.push(env);
            }
        }
        Ok(out)
    }

    /// Constraints vanish, `nonzero` expressions do not, and both endpoints are admissible.
    pub fn witness_point_ok(&self, w: &Witness, env: &Env) -> Result<bool, CatalogError> {
        if !self.conditions_hold(&w.constraints, &w.nonzero, env)? {
            return Ok(false);
        }
        Ok(match self.witness_endpoints(w, env) {
            Ok((s, t)) => {
                self.check_admissible(&s.family, &self.env_of(&s)?).is_ok()
                    && self.check_admissible(&t.family, &self.env_of(&t)?).is_ok()
            }
            Err(_) => false,
        })
    }

    /// Source and target instances at a witness parameter point.
    pub fn witness_endpoints(&self, w: &Witness, env: &Env) -> Result<(Instance, Instance), CatalogError> {
        let side = |pat: &Pattern| -> Result<Instance, CatalogError> {
            let fam = self.family(&pat.family)?;
            let syms: Vec<&str> = w.params.iter().map(String::as_str).collect();
            let mut fenv = Env::new();
            for p in &fam.params {
                let e = pat.params.get(&p.symbol).ok_or_else(|| CatalogError::UnboundParameter {
                    family: fam.name.clone(),
                    symbol: p.symbol.clone(),
                })?;
                fenv.insert(p.symbol.clone(), self.eval_const(e, &syms, env, &w.id)?);
            }
            self.instance(&fam.name, &fenv)
        };
        Ok((side(&w.source)?, side(&w.target)?))
    }

    /// `g_t^{-1}` over any field; `env` must bind `t` and the witness parameters.
    pub fn witness_matrix_in<K: Field>(
        &self,
        rows: &[Vec<String>],
        w: &Witness,
        env: &BTreeMap<String, K>,
    ) -> Result<Matrix<K>, CatalogError> {
        let mut syms: Vec<&str> = w.params.iter().map(String::as_str).collect();
        syms.push("t");
        eval_matrix(rows, &syms, env, &format!("witness {}", w.id))
    }

    /// Parses every expression in the document against the symbols in scope.
    fn validate(&self) -> Result<(), CatalogError> {
        let f = &self.file;
        for fam in &f.families {
            let syms = fam.symbols();
            for row in fam.products.values() {
                for e in row.values() {
                    parse_in(e, &syms, &fam.name)?;
                }
            }
            if let Some(l) = &fam.lie.lambda {
                parse_in(l, &syms, &fam.name)?;
            }
            for p in &fam.params {
                self.param_grid(&fam.name, &p.symbol)?;
            }
            if !f.table1.contains_key(&fam.name) {
                return Err(CatalogError::Invalid(format!("no derivation entry for {}", fam.name)));
            }
        }
        for (name, rows) in &f.table1 {
            let syms = self.family(name)?.symbols();
            for r in rows {
                for z in &r.zero {
                    parse_in(z, &syms, name)?;
                }
            }
        }
        for rule in &f.iso_rules {
            let syms = self.family(&rule.family)?.symbols();
            for e in rule.target_params.values().chain(rule.matrix.iter().flatten()) {
                parse_in(e, &syms, &rule.relation)?;
            }
        }
        for id in &f.operator_identities {
            let env: Env = id.params.iter().map(|p| (p.symbol.clone(), Scalar::from(7))).collect();
            self.instantiate_identity(&id.name, &env)?;
        }
        for t in &f.closure_tables {
            for row in &t.rows {
                self.validate_node(&row.source)?;
                let src = self.family(&row.source.family)?.symbols();
                for tgt in &row.targets {
                    let tsyms = self.family(&tgt.family)?.symbols();
                    for e in tgt.params.values() {
                        parse_in(e, &src, "closure table")?;
                    }
                    for e in tgt.zero.iter().chain(&tgt.nonzero) {
                        parse_in(e, &tsyms, "closure table")?;
                    }
                }
            }
        }
        for o in &f.obstructions {
            self.validate_pair(&o.source, &o.target, o.pair_zero.iter().chain(&o.pair_nonzero))?;
            self.certificate(o)?;
        }
        for m in &f.manual_arguments {
            self.validate_pair(&m.source, &m.target, std::iter::empty())?;
        }
        for d in &f.diagrams {
            for n in d.nodes.values() {
                self.validate_node(n)?;
            }
            for e in &d.edges {
                let (a, b) = match (d.nodes.get(&e.from), d.nodes.get(&e.to)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(CatalogError::Invalid(format!("diagram {}: dangling edge", d.type_id))),
                };
                self.validate_pair(a, b, e.relation.iter())?;
            }
        }
        let mut ids = BTreeSet::new();
        for w in &f.witnesses {
            if !ids.insert(&w.id) {
                return Err(CatalogError::Invalid(format!("duplicate witness {}", w.id)));
            }
            let syms: Vec<&str> = w.params.iter().map(String::as_str).collect();
            let mut with_t = syms.clone();
            with_t.push("t");
            for pat in [&w.source, &w.target] {
                self.family(&pat.family)?;
                for e in pat.params.values() {
                    parse_in(e, &syms, &w.id)?;
                }
            }
            for e in w.nonzero.iter().chain(&w.constraints) {
                parse_in(e, &syms, &w.id)?;
            }
            for m in std::iter::once(&w.matrix).chain(w.printed_matrix.as_ref()) {
                if m.len() != 3 || m.iter().any(|r| r.len() != 3) {
                    return Err(CatalogError::Invalid(format!("witness {}: matrix is not 3x3", w.id)));
                }
                for e in m.iter().flatten() {
                    parse_in(e, &with_t, &w.id)?;
                }
            }
        }
        Ok(())
    }

    fn validate_node(&self, p: &Pattern) -> Result<(), CatalogError> {
        let syms = self.family(&p.family)?.symbols();
        for e in p.params.values() {
            parse_in(e, &[], &p.family)?;
        }
        for e in p.zero.iter().chain(&p.nonzero) {
            parse_in(e, &syms, &p.family)?;
        }
        Ok(())
    }

    fn validate_pair<'a>(
        &self,
        a: &Pattern,
        b: &Pattern,
        conds: impl Iterator<Item = &'a String>,
    ) -> Result<(), CatalogError> {
        self.validate_node(a)?;
        self.validate_node(b)?;
        let mut syms: Vec<String> = self.family(&a.family)?.symbols().into_iter().map(String::from).collect();
        syms.extend(self.family(&b.family)?.symbols().into_iter().map(str::to_uppercase));
        let syms: Vec<&str> = syms.iter().map(String::as_str).collect();
        for e in conds {
            parse_in(e, &syms, "pair condition")?;
        }
        Ok(())
    }

    /// Typed view of an obstruction record.
    pub fn certificate(&self, o: &Obstruction) -> Result<Certificate, CatalogError> {
        let bad = |what: &str| CatalogError::Invalid(format!("{} -> {}: {what}", o.source.family, o.target.family));
        let payload = o.payload.clone().unwrap_or(serde_json::Value::Null);
        let field = |k: &str| payload.get(k).cloned().ok_or_else(|| bad(&format!("missing {k}")));
        Ok(match o.kind.as_str() {
            "der_dim" => Certificate::DerDim,
            "square_dim" => Certificate::SquareDim,
            "completeness" => Certificate::Completeness,
            "lie_type" => Certificate::LieType,
            "jordan" => Certificate::Jordan,
            "annihilator" => Certificate::Annihilator { side: serde_json::from_value(field("side")?)? },
            "trace_invariant" => Certificate::TraceInvariant {
                kind: serde_json::from_value(field("trace")?)?,
                i: serde_json::from_value(field("i")?)?,
                j: serde_json::from_value(field("j")?)?,
            },
            "generalized_derivation" => {
                let w: Vec<String> = serde_json::from_value(field("weights")?)?;
                let syms = self.family(&o.source.family)?.symbols();
                for e in &w {
                    parse_in(e, &syms, "weights")?;
                }
                let weights: [String; 3] = w.try_into().map_err(|_| bad("weights need three entries"))?;
                Certificate::GeneralizedDerivation { weights }
            }
            "operator_identity" => {
                let identity: String = serde_json::from_value(field("identity")?)?;
                let bind: BTreeMap<String, String> = match payload.get("bind") {
                    Some(b) => serde_json::from_value(b.clone())?,
                    None => BTreeMap::new(),
                };
                let id = self.identity(&identity)?;
                let syms = self.family(&o.source.family)?.symbols();
                for p in &id.params {
                    let e = bind.get(&p.symbol).ok_or_else(|| bad(&format!("{identity} needs {}", p.symbol)))?;
                    parse_in(e, &syms, &identity)?;
                }
                Certificate::OperatorIdentity { identity, bind }
            }
            other => return Err(bad(&format!("unknown certificate kind {other:?}"))),
        })
    }

    /// Evaluates a `gen-der` weight triple at a source point.
    pub fn weights_at(&self, family: &str, weights: &[String; 3], env: &Env) -> Result<[Scalar; 3], CatalogError> {
        let syms = self.family(family)?.symbols();
        let v: Vec<Scalar> =
            weights.iter().map(|e| self.eval_const(e, &syms, env, "weights")).collect::<Result<_, _>>()?;
        Ok([v[0].clone(), v[1].clone(), v[2].clone()])
    }

    /// Operator identity of a certificate, bound at a source point.
    pub fn bound_identity(
        &self,
        family: &str,
        identity: &str,
        bind: &BTreeMap<String, String>,
        env: &Env,
    ) -> Result<OpExpr, CatalogError> {
        let syms = self.family(family)?.symbols();
        let mut point = Env::new();
        for (k, e) in bind {
            point.insert(k.clone(), self.eval_const(e, &syms, env, identity)?);
        }
        self.instantiate_identity(identity, &point)
    }
}

/// Machine-checkable reason why a degeneration cannot exist.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    DerDim,
    GeneralizedDerivation { weights: [String; 3] },
    SquareDim,
    Annihilator { side: Side },
    TraceInvariant { kind: TraceKind, i: u32, j: u32 },
    OperatorIdentity { identity: String, bind: BTreeMap<String, String> },
    Completeness,
    LieType,
    Jordan,
}

impl Certificate {
    pub fn label(&self) -> String {
        match self {
            Certificate::DerDim => "der_dim".into(),
            Certificate::GeneralizedDerivation { weights } => format!("gen_der({})", weights.join(", ")),
            Certificate::SquareDim => "square_dim".into(),
            Certificate::Annihilator { side } => format!("annihilator({side:?})").to_lowercase(),
            Certificate::TraceInvariant { kind, i, j } => {
                format!("{}_{{{i},{j}}}", if *kind == TraceKind::C { 'c' } else { 'd' })
            }
            Certificate::OperatorIdentity { identity, .. } => format!("operator_identity({identity})"),
            Certificate::Completeness => "completeness".into(),
            Certificate::LieType => "lie_type".into(),
            Certificate::Jordan => "jordan".into(),
        }
    }
}

fn parse_pair(ij: &str) -> Option<(usize, usize)> {
    let mut cs = ij.chars();
    let i = cs.next()?.to_digit(10)? as usize;
    let j = cs.next()?.to_digit(10)? as usize;
    (cs.next().is_none() && (1..=3).contains(&i) && (1..=3).contains(&j)).then_some((i, j))
}

fn eval_matrix<K: Field>(
    rows: &[Vec<String>],
    symbols: &[&str],
    env: &BTreeMap<String, K>,
    context: &str,
) -> Result<Matrix<K>, CatalogError> {
    let data = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|e| parse_in(e, symbols, context)?.eval_map(env).map_err(expr_err(context)))
                .collect::<Result<Vec<K>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(data).map_err(|e| CatalogError::Invalid(format!("{context}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    fn env(pairs: &[(&str, &str)]) -> Env {
        pairs.iter().map(|(k, v)| (k.to_string(), q(v))).collect()
    }

    #[test]
    fn instantiate_examples() {
        let cat = Catalog::shipped();
        let b5 = cat.instantiate("B5", &env(&[("b", "1/2")])).unwrap();
        let expected = StructureConstants::from_table(3, &[(1, 2, 3, q("1/2")), (2, 1, 3, q("-1/2"))]);
        assert_eq!(b5, expected);
        let e1 = cat.instantiate("E1", &env(&[("l", "2"), ("a", "-1")])).unwrap();
        let expected = StructureConstants::from_table(
            3,
            &[(1, 1, 1, q("-1")), (1, 3, 3, q("1")), (2, 1, 2, q("-1")), (3, 1, 3, q("-1"))],
        );
        assert_eq!(e1, expected);
        let err = cat.instantiate("C7", &env(&[("g", "0")])).unwrap_err();
        assert!(matches!(err, CatalogError::InadmissibleParameter { ref symbol, .. } if symbol == "g"));
        assert!(matches!(cat.instantiate("B5", &Env::new()), Err(CatalogError::UnboundParameter { .. })));
    }

    #[test]
    fn sample_grids() {
        let cat = Catalog::shipped();
        let b5 = cat.param_grid("B5", "b").unwrap();
        for v in ["0", "1/2", "1"] {
            assert!(b5.contains(&q(v)));
        }
        let e1 = cat.default_samples("E1").unwrap();
        for (l, a) in [("1", "-1"), ("2", "-1"), ("2", "-2"), ("1/2", "3")] {
            assert!(e1.contains(&env(&[("l", l), ("a", a)])), "({l}, {a})");
        }
        assert!(!cat.param_grid("C7", "g").unwrap().contains(&Scalar::zero()));
        let w75 = cat.witness("75").unwrap();
        assert!(w75.params.is_empty());
        assert!(w75.matrix.iter().flatten().any(|e| e.contains('i')));
        assert_eq!(cat.witness_samples(w75).unwrap(), vec![Env::new()]);
    }

    #[test]
    fn constrained_witness_samples() {
        let cat = Catalog::shipped();
        let w = cat.witness("65").unwrap();
        let pts = cat.witness_samples(w).unwrap();
        assert!(pts.contains(&env(&[("a", "4/5"), ("r", "2")])));
        assert!(pts.contains(&env(&[("a", "-1/3"), ("r", "1/2*i")])));
        for p in &pts {
            let (a, r) = (&p["a"], &p["r"]);
            assert_eq!(r.mul(r).mul(&Scalar::one().sub(a)), *a);
        }
    }

    #[test]
    fn derivation_table() {
        let cat = Catalog::shipped();
        assert_eq!(cat.table1_expected("A4", &Env::new()).unwrap(), 0);
        assert_eq!(cat.table1_expected("B5", &env(&[("b", "1/2")])).unwrap(), 6);
        assert_eq!(cat.table1_expected("B5", &env(&[("b", "2")])).unwrap(), 4);
        assert_eq!(cat.table1_expected("E1", &env(&[("l", "1"), ("a", "-1")])).unwrap(), 6);
        assert_eq!(cat.table1_expected("C6", &env(&[("b", "-1")])).unwrap(), 2);
        assert_eq!(cat.table1_expected("C6", &env(&[("b", "3")])).unwrap(), 1);
    }

    #[test]
    fn iso_closure_of_b5() {
        let cat = Catalog::shipped();
        let inst = cat.instance("B5", &env(&[("b", "4/5")])).unwrap();
        let cls = cat.iso_closure(&inst).unwrap();
        let names: Vec<String> = cls.iter().map(ToString::to_string).collect();
        assert_eq!(names, vec!["B5(1/5)", "B5(4/5)"]);
    }

    #[test]
    fn patterns() {
        let cat = Catalog::shipped();
        let pat = Pattern { family: "E1".into(), nonzero: vec!["l-1".into()], ..Default::default() };
        let one = cat.instance("E1", &env(&[("l", "1"), ("a", "0")])).unwrap();
        let two = cat.instance("E1", &env(&[("l", "2"), ("a", "0")])).unwrap();
        assert!(!cat.node_matches(&pat, &one).unwrap());
        assert!(cat.node_matches(&pat, &two).unwrap());
        let rel = Pattern { family: "E1".into(), params: [("a".to_string(), "b".to_string())].into(), ..Default::default() };
        assert!(cat.pattern_matches(&rel, &two, &env(&[("b", "0")])).unwrap());
        assert!(!cat.pattern_matches(&rel, &two, &env(&[("b", "1")])).unwrap());
    }

    #[test]
    fn natural_order() {
        let mut v = [
            Instance { family: "A10".into(), values: vec![] },
            Instance { family: "B1".into(), values: vec![] },
            Instance { family: "A2".into(), values: vec![] },
        ];
        v.sort();
        let names: Vec<String> = v.iter().map(ToString::to_string).collect();
        assert_eq!(names, ["A2", "A10", "B1"]);
    }

    #[test]
    fn rejects_bad_documents() {
        let mut file: CatalogFile = serde_json::from_str(SHIPPED_JSON).unwrap();
        file.families[1].products.insert("33".into(), [("3".to_string(), "q+1".to_string())].into());
        assert!(matches!(Catalog::from_file(file), Err(CatalogError::Expr { .. })));
        assert!(matches!(Catalog::from_json_str(r#"{"families": 3}"#), Err(CatalogError::Json(_))));
        assert!(Catalog::from_json_str("{}").is_ok());
    }
}
