//! CSP instances over a Boolean structure and the log-space style reduction
//! along a verified pp-construction certificate: every constraint of a
//! target instance is expanded into the atoms of the defining formula, so
//! the source instance is satisfiable iff the target instance is, and a
//! source solution transports back through the certificate's homomorphism.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ppcon::{singleton_relation, verify_certificate, Atom, PpCertificate};
use crate::structures::Structure;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("certificate `{0}` does not verify")]
    UnverifiedCertificate(String),
    #[error("constraint uses unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("constraint on `{name}` has {got} variables, relation arity is {want}")]
    ConstraintArity { name: String, got: usize, want: usize },
    #[error("variable {0} out of range 1..={1}")]
    VarOutOfRange(usize, usize),
    #[error("instance has {0} variables; brute force handles at most 24")]
    TooManyVars(usize),
    #[error("source structure has no unary singleton relation for {}", *.0 as u8)]
    NoSingleton(bool),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// An instance of `CSP(A)`: a variable count and constraints naming
/// relations of `A`. Variables are 1-based, matching the on-disk format
/// `{"structure": .., "variables": .., "constraints": [["R", [1,2]], ..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspInstance {
    pub structure: String,
    pub variables: usize,
    pub constraints: Vec<(String, Vec<usize>)>,
}

impl CspInstance {
    pub fn validate(&self, a: &Structure) -> Result<(), ReductionError> {
        for (name, vars) in &self.constraints {
            let rel = a
                .relation(name)
                .ok_or_else(|| ReductionError::UnknownRelation(name.clone()))?;
            if vars.len() != rel.arity() {
                return Err(ReductionError::ConstraintArity {
                    name: name.clone(),
                    got: vars.len(),
                    want: rel.arity(),
                });
            }
            for &v in vars {
                if v == 0 || v > self.variables {
                    return Err(ReductionError::VarOutOfRange(v, self.variables));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ReductionError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Does the 0-based assignment satisfy every constraint?
pub fn check_assignment(i: &CspInstance, a: &Structure, assignment: &[bool]) -> bool {
    i.constraints.iter().all(|(name, vars)| {
        let rel = match a.relation(name) {
            Some(r) => r,
            None => return false,
        };
        let mut mask = 0u32;
        for (j, &v) in vars.iter().enumerate() {
            mask |= (assignment[v - 1] as u32) << (rel.arity() - 1 - j);
        }
        rel.contains(mask)
    })
}

/// Exhaustive satisfiability check for instances with at most 24 variables.
pub fn solve_bruteforce(i: &CspInstance, a: &Structure) -> Result<Option<Vec<bool>>, ReductionError> {
    i.validate(a)?;
    if i.variables > 24 {
        return Err(ReductionError::TooManyVars(i.variables));
    }
    for code in 0u32..1u32 << i.variables {
        let assignment: Vec<bool> = (0..i.variables).map(|v| code >> v & 1 == 1).collect();
        if check_assignment(i, a, &assignment) {
            return Ok(Some(assignment));
        }
    }
    Ok(None)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra.max(rb)] = ra.min(rb);
    }
}

/// Rewrites an instance over the certificate's target into an equisatisfiable
/// instance over its source. Each target variable becomes a block of
/// `dimension` source variables; each constraint is replaced by the atoms of
/// its defining formula, with fresh existential variables per constraint and
/// equality atoms merged away. Returns the reduced instance and, per target
/// variable, the final ids of its block.
pub fn reduce_instance(
    i: &CspInstance,
    cert: &PpCertificate,
) -> Result<(CspInstance, Vec<Vec<usize>>), ReductionError> {
    if !verify_certificate(cert) {
        return Err(ReductionError::UnverifiedCertificate(cert.name.clone()));
    }
    i.validate(&cert.target)?;
    let n = cert.power.dimension;
    let formulas: BTreeMap<&str, _> = cert
        .power
        .targets
        .iter()
        .map(|(name, k, phi)| (name.as_str(), (*k, phi)))
        .collect();

    // raw source variables: blocks first, existentials appended per constraint
    let mut total = i.variables * n;
    let mut raw_constraints: Vec<(String, Vec<usize>)> = Vec::new();
    let mut merges: Vec<(usize, usize)> = Vec::new();
    for (name, vars) in &i.constraints {
        let (_, phi) = formulas[name.as_str()];
        let base_exist = total;
        total += phi.existential_vars;
        // formula variable -> raw source variable (0-based)
        let place = |fv: usize| -> usize {
            if fv < phi.free_vars {
                (vars[fv / n] - 1) * n + fv % n
            } else {
                base_exist + (fv - phi.free_vars)
            }
        };
        for atom in &phi.atoms {
            match atom {
                Atom::Rel { name, vars } => {
                    raw_constraints.push((name.clone(), vars.iter().map(|&v| place(v)).collect()));
                }
                Atom::Eq(u, v) => merges.push((place(*u), place(*v))),
                Atom::Const(v, b) => {
                    let rel = singleton_relation(&cert.source, *b)
                        .ok_or(ReductionError::NoSingleton(*b))?;
                    raw_constraints.push((rel.name().to_string(), vec![place(*v)]));
                }
            }
        }
    }

    let mut uf = UnionFind::new(total);
    for (u, v) in merges {
        uf.union(u, v);
    }
    // compress representatives to 1-based variable ids
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut id_of = |uf: &mut UnionFind, raw: usize| -> usize {
        let root = uf.find(raw);
        let next = ids.len() + 1;
        *ids.entry(root).or_insert(next)
    };
    let mut block_map = Vec::with_capacity(i.variables);
    for v in 0..i.variables {
        block_map.push((0..n).map(|j| id_of(&mut uf, v * n + j)).collect::<Vec<_>>());
    }
    let constraints = raw_constraints
        .into_iter()
        .map(|(name, vars)| {
            (
                name,
                vars.into_iter().map(|raw| id_of(&mut uf, raw)).collect(),
            )
        })
        .collect();
    let reduced = CspInstance {
        structure: cert.source.name().to_string(),
        variables: ids.len(),
        constraints,
    };
    Ok((reduced, block_map))
}

/// Maps a solution of the reduced source instance back to the target
/// instance through the certificate's power-to-target homomorphism.
pub fn transport_solution(
    cert: &PpCertificate,
    block_map: &[Vec<usize>],
    source_solution: &[bool],
) -> Vec<bool> {
    let n = cert.power.dimension;
    block_map
        .iter()
        .map(|block| {
            let mut code = 0usize;
            for (j, &id) in block.iter().enumerate() {
                code |= (source_solution[id - 1] as usize) << (n - 1 - j);
            }
            cert.hom_to_target[code] == 1
        })
        .collect()
}

/// A seeded random instance over the structure's signature.
pub fn random_instance(
    a: &Structure,
    variables: usize,
    constraints: usize,
    seed: u64,
) -> CspInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rels = a.relations();
    let constraints = (0..constraints)
        .map(|_| {
            let rel = &rels[rng.gen_range(0..rels.len())];
            let vars = (0..rel.arity())
                .map(|_| rng.gen_range(1..=variables))
                .collect();
            (rel.name().to_string(), vars)
        })
        .collect();
    CspInstance {
        structure: a.name().to_string(),
        variables,
        constraints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppcon::stcon_to_b2;
    use crate::structures::canonical;

    fn inst(structure: &str, variables: usize, constraints: &[(&str, &[usize])]) -> CspInstance {
        CspInstance {
            structure: structure.into(),
            variables,
            constraints: constraints
                .iter()
                .map(|(n, vs)| (n.to_string(), vs.to_vec()))
                .collect(),
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let i = inst("blocker_leq:2", 3, &[("B2", &[1, 2]), ("leq", &[2, 3])]);
        let target = canonical("blocker_leq:2").unwrap();
        i.validate(&target).unwrap();
        let back = CspInstance::from_json(&i.to_json()).unwrap();
        assert_eq!(back, i);
        let bad = inst("blocker_leq:2", 2, &[("B2", &[1, 3])]);
        assert!(matches!(
            bad.validate(&target),
            Err(ReductionError::VarOutOfRange(3, 2))
        ));
        let bad = inst("blocker_leq:2", 2, &[("B2", &[1])]);
        assert!(matches!(
            bad.validate(&target),
            Err(ReductionError::ConstraintArity { .. })
        ));
    }

    #[test]
    fn brute_force_agrees_with_hand_analysis() {
        let target = canonical("blocker_leq:2").unwrap();
        // B2 forbids the all-zero pair, zero forces a zero: jointly fine
        let sat = inst("blocker_leq:2", 2, &[("B2", &[1, 2]), ("zero", &[1])]);
        let sol = solve_bruteforce(&sat, &target).unwrap().unwrap();
        assert!(check_assignment(&sat, &target, &sol));
        // but forcing both ends to zero breaks the blocker
        let unsat = inst(
            "blocker_leq:2",
            2,
            &[("B2", &[1, 2]), ("zero", &[1]), ("zero", &[2])],
        );
        assert!(solve_bruteforce(&unsat, &target).unwrap().is_none());
    }

    #[test]
    fn reduction_preserves_satisfiability_and_transports() {
        let cert = stcon_to_b2();
        let source = cert.source.clone();
        let target = cert.target.clone();
        let i = inst(
            "blocker_leq:2",
            3,
            &[
                ("B2", &[1, 2]),
                ("leq", &[2, 3]),
                ("one", &[3]),
                ("B2", &[3, 3]),
            ],
        );
        let (reduced, map) = reduce_instance(&i, &cert).unwrap();
        reduced.validate(&source).unwrap();
        assert_eq!(map.len(), 3);
        let sol = solve_bruteforce(&reduced, &source).unwrap().unwrap();
        let transported = transport_solution(&cert, &map, &sol);
        assert!(check_assignment(&i, &target, &transported));
    }

    #[test]
    fn seeded_batch_is_equisatisfiable() {
        let cert = stcon_to_b2();
        let target = cert.target.clone();
        let source = cert.source.clone();
        let mut sat_seen = 0;
        for seed in 0..25u64 {
            let i = random_instance(&target, 5, 6, seed);
            let (reduced, map) = reduce_instance(&i, &cert).unwrap();
            let direct = solve_bruteforce(&i, &target).unwrap();
            let through = solve_bruteforce(&reduced, &source).unwrap();
            assert_eq!(direct.is_some(), through.is_some(), "seed {seed}");
            if let Some(sol) = through {
                sat_seen += 1;
                let transported = transport_solution(&cert, &map, &sol);
                assert!(check_assignment(&i, &target, &transported), "seed {seed}");
            }
        }
        assert!(sat_seen > 0, "batch should contain satisfiable instances");
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = canonical("blocker:2").unwrap();
        assert_eq!(random_instance(&a, 4, 5, 7), random_instance(&a, 4, 5, 7));
        assert_ne!(random_instance(&a, 4, 5, 7), random_instance(&a, 4, 5, 8));
    }
}
