use std::collections::{BTreeSet, HashSet};

use super::VerifyError;
use crate::unification::RowAnnotation;

/// Largest union the oracle enumerates.
pub const ORACLE_UNION_BOUND: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleClass {
    pub annotation: RowAnnotation,
    pub promotions: Vec<BTreeSet<String>>,
}

/// Brute-force classification of a family of child sets over bitmasks.
/// Duplicate and empty members are ignored.
pub fn classify_oracle(family: &[BTreeSet<String>]) -> Result<OracleClass, VerifyError> {
    let universe: Vec<&String> = family.iter().flatten().collect::<BTreeSet<_>>().into_iter().collect();
    if universe.len() > ORACLE_UNION_BOUND {
        return Err(VerifyError::BoundExceeded {
            what: "family union",
            size: universe.len(),
            bound: ORACLE_UNION_BOUND,
        });
    }
    let bit = |name: &String| 1u32 << universe.binary_search(&name).expect("member of universe");
    let masks: Vec<u32> = family
        .iter()
        .map(|s| s.iter().map(bit).fold(0, |m, b| m | b))
        .filter(|m| *m != 0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let partial = |s: u32, t: u32| s & t != 0 && s & !t != 0;
    let promoted: Vec<u32> = masks
        .iter()
        .copied()
        .filter(|&s| s.count_ones() >= 2 && masks.iter().all(|&t| t == s || !partial(s, t)))
        .collect();

    // Atoms: promoted groups first, then every single activity not inside one.
    let mut atoms: Vec<u32> = promoted.clone();
    let covered = promoted.iter().fold(0, |m, p| m | p);
    atoms.extend((0..universe.len()).map(|i| 1u32 << i).filter(|b| covered & b == 0));
    let to_atoms = |m: u32| -> u32 {
        let mut rest = m;
        let mut out = 0u32;
        for (k, &a) in atoms.iter().enumerate() {
            if a.count_ones() >= 2 {
                if a & rest == a {
                    rest &= !a;
                    out |= 1 << k;
                }
            } else if a & rest != 0 {
                rest &= !a;
                out |= 1 << k;
            }
        }
        // Leftovers are singletons swallowed by a promotion elsewhere.
        for i in 0..universe.len() {
            if rest & (1 << i) != 0 {
                out |= 1 << (atoms.len() + i);
            }
        }
        out
    };
    let elements: Vec<u32> = masks.iter().map(|&m| to_atoms(m)).collect();

    let annotation = if elements.len() < 2 {
        RowAnnotation::None
    } else if elements
        .iter()
        .enumerate()
        .all(|(i, a)| elements[i + 1..].iter().all(|b| a & b == 0))
    {
        RowAnnotation::Xor
    } else {
        let union = elements.iter().fold(0u32, |m, e| m | e);
        let present: HashSet<u32> = elements.iter().copied().collect();
        // Walk every non-empty submask of the union.
        let mut all = true;
        let mut sub = union;
        while sub != 0 {
            if !present.contains(&sub) {
                all = false;
                break;
            }
            sub = (sub - 1) & union;
        }
        if all && present.iter().all(|e| e & !union == 0) {
            RowAnnotation::OrExhaustive
        } else {
            RowAnnotation::Or
        }
    };
    let mut promotions: Vec<BTreeSet<String>> = promoted
        .iter()
        .map(|&m| {
            (0..universe.len())
                .filter(|i| m & (1 << i) != 0)
                .map(|i| universe[i].clone())
                .collect()
        })
        .collect();
    promotions.sort();
    Ok(OracleClass {
        annotation,
        promotions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(sets: &[&[&str]]) -> Vec<BTreeSet<String>> {
        sets.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
    }

    #[test]
    fn table_examples() {
        assert_eq!(classify_oracle(&fam(&[&["b", "c"], &["f"]])).unwrap().annotation, RowAnnotation::Xor);
        assert_eq!(
            classify_oracle(&fam(&[&["a"], &["b"], &["a", "b"]])).unwrap().annotation,
            RowAnnotation::OrExhaustive
        );
        let or = classify_oracle(&fam(&[&["a", "b"], &["a", "c"]])).unwrap();
        assert_eq!(or.annotation, RowAnnotation::Or);
        assert!(or.promotions.is_empty());
    }

    #[test]
    fn single_member_has_no_annotation() {
        let c = classify_oracle(&fam(&[&["g", "h"], &["g", "h"]])).unwrap();
        assert_eq!(c.annotation, RowAnnotation::None);
        assert_eq!(c.promotions, fam(&[&["g", "h"]]));
    }

    #[test]
    fn refuses_large_unions() {
        let big: Vec<String> = (0..17).map(|i| format!("x{i}")).collect();
        let family = vec![big.into_iter().collect::<BTreeSet<_>>()];
        assert!(matches!(classify_oracle(&family), Err(VerifyError::BoundExceeded { size: 17, .. })));
    }
}
