use rayon::prelude::*;
use serde::Serialize;

use super::{Catalog, CatalogError, Env, Instance};
use crate::algebra::verify_isomorphism;
use crate::exactnum::{Ring, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditCheck {
    Novikov,
    LieClass,
    DerivationDim,
    IsoRule,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditFinding {
    pub algebra: Instance,
    pub check: AuditCheck,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AuditReport {
    pub schema_version: u32,
    pub families: usize,
    pub samples: usize,
    pub iso_checks: usize,
    pub failures: Vec<AuditFinding>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn audit_sample(cat: &Catalog, family: &str, env: &Env) -> Result<Vec<AuditFinding>, CatalogError> {
    let algebra = cat.instance(family, env)?;
    let s = cat.instantiate(family, env)?;
    let mut out = Vec::new();
    let mut fail = |check, detail: String| out.push(AuditFinding { algebra: algebra.clone(), check, detail });
    let violations = s.check_novikov();
    if let Some(v) = violations.first() {
        let [i, j, k] = v.triple;
        fail(AuditCheck::Novikov, format!("{:?} fails on (e{i}, e{j}, e{k})", v.identity));
        return Ok(out);
    }
    let expected = cat.expected_lie(family, env)?;
    match s.lie_class() {
        Ok(got) if got == expected => {}
        Ok(got) => fail(AuditCheck::LieClass, format!("expected {expected}, computed {got}")),
        Err(e) => fail(AuditCheck::LieClass, e.to_string()),
    }
    let one = Scalar::one();
    let (want, got) = (cat.table1_expected(family, env)?, s.derivation_dim(&one, &one, &one));
    if want != got {
        fail(AuditCheck::DerivationDim, format!("expected {want}, computed {got}"));
    }
    Ok(out)
}

/// Axioms, Lie classes and derivation dimensions at every sample, plus every isomorphism rule.
pub fn audit(cat: &Catalog) -> Result<AuditReport, CatalogError> {
    let mut jobs = Vec::new();
    for fam in cat.families() {
        for env in cat.default_samples(&fam.name)? {
            jobs.push((fam.name.as_str(), env));
        }
    }
    let found: Vec<Vec<AuditFinding>> =
        jobs.par_iter().map(|(f, env)| audit_sample(cat, f, env)).collect::<Result<_, _>>()?;
    let mut failures: Vec<AuditFinding> = found.into_iter().flatten().collect();
    let mut iso_checks = 0;
    for inst in cat.all_instances()? {
        let env = cat.env_of(&inst)?;
        for (k, img) in cat.iso_images(&inst)? {
            let rule = &cat.iso_rules()[k];
            iso_checks += 1;
            let m = cat.iso_rule_matrix_in(rule, &env)?;
            let ok = match m.invert() {
                Ok(h) => verify_isomorphism(&cat.instantiate_instance(&inst)?, &cat.instantiate_instance(&img)?, &h)
                    .unwrap_or(false),
                Err(_) => false,
            };
            if !ok {
                failures.push(AuditFinding {
                    algebra: inst.clone(),
                    check: AuditCheck::IsoRule,
                    detail: format!("{} does not carry {inst} onto {img}", rule.relation),
                });
            }
        }
    }
    Ok(AuditReport {
        schema_version: crate::degeneration::REPORT_SCHEMA_VERSION,
        families: cat.families().len(),
        samples: jobs.len(),
        iso_checks,
        failures,
    })
}
