use std::collections::BTreeSet;

use super::matrix::{apply_promotions, ChildSet, FamilyMatrix, OrAlternativesMap, RowAnnotation};

/// Classification of one row family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyClass {
    pub promotions: Vec<BTreeSet<String>>,
    pub annotation: RowAnnotation,
    /// The family with promotions applied.
    pub elements: Vec<ChildSet>,
}

/// Classifies a family of distinct, non-empty child sets.
///
/// 1. A multi-member set that partially intersects no other member is promoted
///    to a composite element, and every other member containing the whole group
///    gets the composite in its place.
/// 2. Two or more pairwise-disjoint members make the row XOR.
/// 3. Otherwise, two or more members forming every non-empty subset of their
///    union make the row exhaustive OR.
/// 4. Any other multi-member family is a non-exhaustive OR.
pub fn classify_family(family: &[BTreeSet<String>]) -> FamilyClass {
    let mut promotions: Vec<BTreeSet<String>> = family
        .iter()
        .filter(|s| s.len() >= 2)
        .filter(|s| {
            family
                .iter()
                .filter(|t| t != s)
                .all(|t| s.is_disjoint(t) || s.is_subset(t))
        })
        .cloned()
        .collect();
    promotions.sort();
    promotions.dedup();

    let elements: Vec<ChildSet> = family.iter().map(|s| apply_promotions(s, &promotions)).collect();

    let annotation = if elements.len() < 2 {
        RowAnnotation::None
    } else if pairwise_disjoint(&elements) {
        RowAnnotation::Xor
    } else if is_nonempty_powerset(&elements) {
        RowAnnotation::OrExhaustive
    } else {
        RowAnnotation::Or
    };
    FamilyClass {
        promotions,
        annotation,
        elements,
    }
}

fn pairwise_disjoint(sets: &[ChildSet]) -> bool {
    sets.iter()
        .enumerate()
        .all(|(i, a)| sets[i + 1..].iter().all(|b| a.is_disjoint(b)))
}

/// `sets` are distinct, so they are all non-empty subsets of the union exactly
/// when there are 2^|union| - 1 of them.
fn is_nonempty_powerset(sets: &[ChildSet]) -> bool {
    let union: ChildSet = sets.iter().flatten().cloned().collect();
    union.len() < usize::BITS as usize - 1 && sets.len() == (1usize << union.len()) - 1
}

/// Annotates every row of `matrix` and collects the alternatives of OR rows.
pub fn classify(matrix: &FamilyMatrix) -> (FamilyMatrix, OrAlternativesMap) {
    let mut out = matrix.clone();
    let mut alternatives = OrAlternativesMap::new();
    for row in 0..matrix.row_nodes.len() {
        let class = classify_family(&matrix.family(row));
        out.promotions[row] = class.promotions;
        out.annotations[row] = class.annotation;
        if class.annotation == RowAnnotation::Or {
            alternatives.insert(matrix.row_nodes[row].clone(), class.elements);
        }
    }
    (out, alternatives)
}
