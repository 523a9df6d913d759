//! Data-driven verification cases: a local species with potential, a
//! mutation vertex, an ordered witness script, and the expected image in the
//! premutated algebra. The runner premutates, applies the substitutions in
//! order, decides exact cyclic equality, and compares the reduced parts of
//! both sides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SpError;
use crate::pathalg::{cyc_equivalent, parse_element, Endomorphism};
use crate::sp::{premutate, split, verify_right_equiv, SpeciesWithPotential};
use crate::wquiver::{quiver_from_json, wq_isomorphic};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessStep {
    pub name: String,
    /// arrow id -> image element text, in the premutated quiver
    pub images: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureCase {
    pub name: String,
    pub quiver: serde_json::Value,
    /// potential text on the source quiver
    pub potential: String,
    /// mutation vertex
    pub k: String,
    /// expected image in the premutated algebra, up to cyclic equivalence
    pub target: String,
    /// substitutions applied in order (left factor last)
    pub witness: Vec<WitnessStep>,
    /// truncation degree for the computation
    #[serde(default)]
    pub truncation: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureReport {
    pub name: String,
    pub witness_valid: bool,
    pub cyclic_match: bool,
    pub reduced_quivers_isomorphic: bool,
    pub first_difference: Option<String>,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.witness_valid && self.cyclic_match && self.reduced_quivers_isomorphic
    }
}

pub fn run_fixture(case: &FixtureCase) -> Result<FixtureReport, SpError> {
    let q = quiver_from_json(&case.quiver)?;
    let pot = parse_element(&q, &case.potential).map_err(SpError::Algebra)?;
    let trunc = case.truncation.or(Some(2 * pot.max_degree().unwrap_or(2).max(2) + 4));
    let sp = SpeciesWithPotential::new(q.clone(), pot.truncated(trunc))?;
    let k = sp.quiver.vertex_ix(&case.k)?;
    let (_, pre) = premutate(&sp, k)?;
    let nq = &pre.quiver;

    let target = parse_element(nq, &case.target).map_err(SpError::Algebra)?.truncated(trunc);
    let target_sp = SpeciesWithPotential::new(nq.clone(), target)?;

    let mut witness: Vec<Endomorphism> = Vec::new();
    for step in &case.witness {
        let mut e = Endomorphism::identity();
        for (arrow, text) in &step.images {
            let a = nq.arrow_ix(arrow)?;
            let img = parse_element(nq, text).map_err(SpError::Algebra)?.truncated(trunc);
            e.images.insert(a, img);
        }
        witness.push(e);
    }

    let witness_valid = witness
        .iter()
        .all(|e| crate::pathalg::endo_classify(nq, e).map(|c| c != crate::pathalg::EndoClass::NonInvertible).unwrap_or(false));

    let cyclic_match = if witness_valid {
        verify_right_equiv(&pre, &target_sp, &witness)?
    } else {
        false
    };

    // reduced parts of both sides
    let left = split(&pre)?;
    let right = split(&target_sp)?;
    let reduced_quivers_isomorphic =
        wq_isomorphic(&left.reduced.quiver, &right.reduced.quiver, true).is_some();

    let first_difference = if cyclic_match {
        None
    } else {
        // report the first differing cyclic term
        let mut cur = pre.potential.clone();
        for e in &witness {
            cur = crate::pathalg::apply_endo(nq, e, &cur, trunc).map_err(SpError::Algebra)?;
        }
        let diff = crate::pathalg::cyc_canonical(nq, &cur.sub(&target_sp.potential))
            .map_err(SpError::Algebra)?;
        diff.terms
            .iter()
            .next()
            .map(|(p, c)| format!("({})*{}", c, crate::pathalg::format_path(nq, p)))
    };

    Ok(FixtureReport {
        name: case.name.clone(),
        witness_valid,
        cyclic_match,
        reduced_quivers_isomorphic,
        first_difference,
    })
}

/// Checks cyclic equivalence of two potential texts over a quiver, used by
/// tests that pin printed formulas.
pub fn potentials_cyc_equal(
    quiver: &serde_json::Value,
    a: &str,
    b: &str,
) -> Result<bool, SpError> {
    let q = quiver_from_json(quiver)?;
    let ea = parse_element(&q, a).map_err(SpError::Algebra)?;
    let eb = parse_element(&q, b).map_err(SpError::Algebra)?;
    cyc_equivalent(&q, &ea, &eb).map_err(SpError::Algebra)
}
