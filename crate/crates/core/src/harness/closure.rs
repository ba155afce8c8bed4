use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_edges, EdgeWriter};
use crate::model::ColumnSchema;
use crate::value::KgtkValue;

/// Ancestor-or-self sets of every class in a subclass edge list.
pub fn closure(
    classes: &[KgtkValue],
    edges: &[(KgtkValue, KgtkValue)],
) -> Result<BTreeMap<KgtkValue, BTreeSet<KgtkValue>>> {
    let mut parents: BTreeMap<KgtkValue, Vec<KgtkValue>> = BTreeMap::new();
    for c in classes {
        parents.entry(c.clone()).or_default();
    }
    for (child, parent) in edges {
        parents.entry(parent.clone()).or_default();
        parents.entry(child.clone()).or_default().push(parent.clone());
    }
    let mut done: BTreeMap<KgtkValue, BTreeSet<KgtkValue>> = BTreeMap::new();
    let mut on_stack: BTreeSet<KgtkValue> = BTreeSet::new();
    for root in parents.keys() {
        if done.contains_key(root) {
            continue;
        }
        // Iterative post-order walk so deep hierarchies cannot overflow.
        let mut stack: Vec<(KgtkValue, usize)> = vec![(root.clone(), 0)];
        on_stack.insert(root.clone());
        while let Some((node, next)) = stack.pop() {
            let ps = &parents[&node];
            if next < ps.len() {
                stack.push((node.clone(), next + 1));
                let p = &ps[next];
                if on_stack.contains(p) {
                    return Err(Error::Cycle(p.to_string()));
                }
                if !done.contains_key(p) {
                    on_stack.insert(p.clone());
                    stack.push((p.clone(), 0));
                }
            } else {
                let mut set = BTreeSet::from([node.clone()]);
                for p in ps {
                    set.extend(done[p].iter().cloned());
                }
                on_stack.remove(&node);
                done.insert(node, set);
            }
        }
    }
    Ok(done)
}

/// Writes the reflexive-transitive closure of the `P279` edges in
/// `p279_file` as `P279star` edges. Rows without a label declare a class
/// with no superclass. Returns the edge count.
pub fn closure_p279star(p279_file: &Path, out_file: &Path) -> Result<u64> {
    let (schema, records) = read_edges(p279_file, true)?;
    let subclass = KgtkValue::symbol("P279");
    let mut classes = Vec::new();
    let mut pairs = Vec::new();
    for r in records {
        let r = r?;
        let label = r.label(&schema);
        if label == &subclass {
            pairs.push((r.node1(&schema).clone(), r.node2(&schema).clone()));
        } else if label.is_empty() {
            classes.push(r.node1(&schema).clone());
        }
    }
    let star = closure(&classes, &pairs)?;
    let out_schema = ColumnSchema::edges(["node1", "label", "node2"])?;
    let mut w = EdgeWriter::create(out_file, &out_schema)?;
    let label = KgtkValue::symbol("P279star");
    for (class, ancestors) in &star {
        for a in ancestors {
            w.write_row(&[class.clone(), label.clone(), a.clone()])?;
        }
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(x: &str) -> KgtkValue {
        KgtkValue::symbol(x)
    }

    #[test]
    fn chain() {
        let c = closure(&[], &[(s("A"), s("B")), (s("B"), s("C"))]).unwrap();
        let pairs: usize = c.values().map(BTreeSet::len).sum();
        assert_eq!(pairs, 6);
        assert_eq!(c[&s("A")], BTreeSet::from([s("A"), s("B"), s("C")]));
        assert_eq!(c[&s("C")], BTreeSet::from([s("C")]));
    }

    #[test]
    fn cycles_are_errors() {
        match closure(&[], &[(s("A"), s("B")), (s("B"), s("A"))]) {
            Err(Error::Cycle(m)) => assert!(m == "A" || m == "B"),
            other => panic!("{other:?}"),
        }
        assert!(closure(&[], &[(s("A"), s("A"))]).is_err());
    }

    #[test]
    fn single_class_has_its_self_edge() {
        let c = closure(&[s("A")], &[]).unwrap();
        assert_eq!(c[&s("A")], BTreeSet::from([s("A")]));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p279 = dir.path().join("p279.tsv");
        std::fs::write(&p279, "node1\tlabel\tnode2\nA\tP279\tA2\nX\tP31\tY\n").unwrap();
        let out = dir.path().join("star.tsv");
        assert_eq!(closure_p279star(&p279, &out).unwrap(), 3);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text, "node1\tlabel\tnode2\nA\tP279star\tA\nA\tP279star\tA2\nA2\tP279star\tA2\n");
    }

    /// Reachability by repeated boolean matrix squaring.
    fn squaring(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in edges {
            m[*a][*b] = true;
        }
        let mut len = 1;
        while len < n {
            let mut next = m.clone();
            for i in 0..n {
                for k in 0..n {
                    if m[i][k] {
                        for j in 0..n {
                            next[i][j] |= m[k][j];
                        }
                    }
                }
            }
            m = next;
            len *= 2;
        }
        m
    }

    #[test]
    fn matches_repeated_squaring_on_random_dags() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..12 {
            let n = 2 + rng.gen_range(0..199);
            let mut edges = Vec::new();
            for child in 1..n {
                for _ in 0..rng.gen_range(0..3) {
                    edges.push((child, rng.gen_range(0..child)));
                }
            }
            let name = |i: usize| s(&format!("C{i}"));
            let pairs: Vec<_> = edges.iter().map(|(a, b)| (name(*a), name(*b))).collect();
            let star = closure(&[], &pairs).unwrap();
            let reach = squaring(n, &edges);
            for i in 0..n {
                let expected: BTreeSet<KgtkValue> = (0..n).filter(|j| reach[i][*j]).map(name).collect();
                let got = star.get(&name(i)).cloned().unwrap_or_else(|| BTreeSet::from([name(i)]));
                assert_eq!(got, expected, "round {round}, class {i}");
            }
        }
    }
}
