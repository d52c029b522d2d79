use novikov::catalog::Catalog;
use novikov::degeneration::{verify_degenerations, Engine, Regime, Status};

#[test]
fn every_witness_verifies_with_its_necessary_conditions() {
    let cat = Catalog::shipped();
    let eng = Engine::new(&cat).unwrap();
    let rep = verify_degenerations(&cat, &eng, None).unwrap();
    for w in &rep.witnesses {
        for r in &w.results {
            if r.status != Status::Verified {
                eprintln!("#{} {:?} at {:?}: {:?}", w.id, r.status, r.sample, r.detail);
            }
            if let Some(n) = &r.necessary {
                for v in n.failures() {
                    eprintln!("#{} {} -> {}: {} ({})", w.id, r.source, r.target, v.check, v.detail);
                }
            }
        }
    }
    assert!(rep.ok(), "failing witnesses: {:?}", rep.failures);
    assert_eq!(rep.witnesses.len(), cat.witnesses().len());
    let generic = rep.witnesses.iter().filter(|w| w.regime == Regime::GenericIdentity).count();
    assert!(generic > 0);
}
