//! Subject-level dataset partitioning: greedy iterative stratification
//! for the dev/val split plus balanced k-fold assignment. Both eyes of a
//! subject always land on the same side of every boundary.

use super::cohort::{CohortTable, Factor, Split};
use crate::util::quantile_sorted;
use crate::Result;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Stratification label: (factor index, level code). Continuous factors
/// are binned into quintiles; missing values form their own level.
type Label = (u8, u8);
const MISSING_LEVEL: u8 = u8::MAX;

fn subject_labels(table: &CohortTable) -> (Vec<String>, Vec<Vec<Label>>) {
    let subjects = table.subjects();
    let index: BTreeMap<&str, usize> = subjects
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    // one representative row per subject
    let mut rep: Vec<Option<&super::cohort::CohortRow>> = vec![None; subjects.len()];
    for row in &table.rows {
        let i = index[row.subject_id.as_str()];
        rep[i].get_or_insert(row);
    }

    // quintile edges per continuous factor over observed subject values
    let mut edges: Vec<Vec<f64>> = Vec::new();
    for factor in Factor::CONTINUOUS {
        let mut vals: Vec<f64> = rep
            .iter()
            .filter_map(|r| r.unwrap().continuous_value(factor))
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let e = if vals.is_empty() {
            Vec::new()
        } else {
            (1..5)
                .map(|q| quantile_sorted(&vals, q as f64 / 5.0))
                .collect()
        };
        edges.push(e);
    }

    let labels = rep
        .iter()
        .map(|r| {
            let row = r.unwrap();
            let mut ls = Vec::with_capacity(12);
            for (fi, factor) in Factor::ALL.iter().enumerate() {
                let level = if factor.is_categorical() {
                    row.categorical_value(*factor).unwrap_or(MISSING_LEVEL)
                } else {
                    match row.continuous_value(*factor) {
                        None => MISSING_LEVEL,
                        Some(v) => {
                            let e = &edges[factor.block_index()];
                            e.iter().filter(|&&edge| v > edge).count() as u8
                        }
                    }
                };
                ls.push((fi as u8, level));
            }
            ls
        })
        .collect();
    (subjects, labels)
}

/// Greedy iterative stratification over all twelve factor marginals.
/// Returns the split label for every row of the table.
pub fn stratified_split(table: &CohortTable, dev_frac: f64, seed: u64) -> Result<Vec<Split>> {
    assert!((0.0..1.0).contains(&dev_frac) && dev_frac > 0.0);
    let (subjects, labels) = subject_labels(table);
    let n = subjects.len();
    let dev_target = (dev_frac * n as f64).round() as usize;

    // shuffled processing order decides ties deterministically
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let rank: Vec<usize> = {
        let mut r = vec![0; n];
        for (pos, &s) in order.iter().enumerate() {
            r[s] = pos;
        }
        r
    };

    // per-label desired counts and membership
    let mut members: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (s, ls) in labels.iter().enumerate() {
        for &l in ls {
            members.entry(l).or_default().push(s);
        }
    }
    let mut desired: BTreeMap<Label, [f64; 2]> = members
        .iter()
        .map(|(&l, m)| {
            let c = m.len() as f64;
            (l, [dev_frac * c, (1.0 - dev_frac) * c])
        })
        .collect();
    let mut capacity = [dev_target as isize, (n - dev_target) as isize];
    let mut assigned: Vec<Option<usize>> = vec![None; n]; // 0 = dev, 1 = val
    let mut remaining: BTreeMap<Label, usize> =
        members.iter().map(|(&l, m)| (l, m.len())).collect();

    let mut n_assigned = 0;
    while n_assigned < n {
        // label with the fewest unassigned subjects (ties: smallest key)
        let label = *remaining
            .iter()
            .filter(|(_, &c)| c > 0)
            .min_by_key(|(l, &c)| (c, **l))
            .expect("unassigned subjects always carry labels")
            .0;
        let mut subs: Vec<usize> = members[&label]
            .iter()
            .copied()
            .filter(|&s| assigned[s].is_none())
            .collect();
        subs.sort_by_key(|&s| rank[s]);
        for s in subs {
            let d = desired[&label];
            let side = if capacity[0] <= 0 {
                1
            } else if capacity[1] <= 0 {
                0
            } else if d[0] > d[1] {
                0
            } else if d[1] > d[0] {
                1
            } else if capacity[0] >= capacity[1] {
                0
            } else {
                1
            };
            assigned[s] = Some(side);
            capacity[side] -= 1;
            n_assigned += 1;
            for &l in &labels[s] {
                desired.get_mut(&l).unwrap()[side] -= 1.0;
                *remaining.get_mut(&l).unwrap() -= 1;
            }
        }
    }

    let subject_split: BTreeMap<&str, Split> = subjects
        .iter()
        .zip(&assigned)
        .map(|(s, a)| {
            (
                s.as_str(),
                if a.unwrap() == 0 { Split::Dev } else { Split::Val },
            )
        })
        .collect();
    Ok(table
        .rows
        .iter()
        .map(|row| subject_split[row.subject_id.as_str()])
        .collect())
}

/// Subject-level k-fold assignment; fold sizes (in subjects) differ by at
/// most one. Returns a fold index per row.
pub fn kfold(subject_of_row: &[String], k: usize, seed: u64) -> Vec<usize> {
    let mut subjects = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for s in subject_of_row {
        if seen.insert(s.clone()) {
            subjects.push(s.clone());
        }
    }
    assert!(k >= 2 && subjects.len() >= k, "need at least k subjects");
    let mut order: Vec<usize> = (0..subjects.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut fold_of_subject: BTreeMap<&str, usize> = BTreeMap::new();
    for (pos, &si) in order.iter().enumerate() {
        fold_of_subject.insert(subjects[si].as_str(), pos % k);
    }
    subject_of_row
        .iter()
        .map(|s| fold_of_subject[s.as_str()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Eye;

    fn table_with_binary_factor(n: usize) -> CohortTable {
        let mut rows = Vec::new();
        for i in 0..n {
            let mut categorical = [None; 6];
            categorical[0] = Some((i % 2) as u8); // sex alternates
            for eye in [Eye::Left, Eye::Right] {
                rows.push(super::super::cohort::CohortRow {
                    subject_id: format!("s{i:03}"),
                    eye,
                    categorical,
                    continuous: [None; 6],
                    split: None,
                });
            }
        }
        CohortTable { rows }
    }

    #[test]
    fn ten_subjects_balanced_binary() {
        let t = table_with_binary_factor(10);
        let splits = stratified_split(&t, 0.8, 7).unwrap();
        // count dev subjects per level
        let mut dev = [0; 2];
        let mut val = [0; 2];
        for (row, s) in t.rows.iter().zip(&splits).step_by(2) {
            let lvl = row.categorical[0].unwrap() as usize;
            match s {
                Split::Dev => dev[lvl] += 1,
                Split::Val => val[lvl] += 1,
            }
        }
        assert_eq!(dev, [4, 4]);
        assert_eq!(val, [1, 1]);
    }

    #[test]
    fn same_seed_same_assignment_and_eyes_together() {
        let t = table_with_binary_factor(31);
        let a = stratified_split(&t, 0.8, 3).unwrap();
        let b = stratified_split(&t, 0.8, 3).unwrap();
        assert_eq!(a, b);
        for pair in a.chunks(2) {
            assert_eq!(pair[0], pair[1], "both eyes share the split");
        }
    }

    #[test]
    fn marginal_discrepancy_within_two_percent() {
        // 500 subjects with two correlated factors
        let mut rows = Vec::new();
        for i in 0..500usize {
            let mut categorical = [None; 6];
            categorical[0] = Some((i % 2) as u8);
            categorical[2] = Some(((i / 3) % 2) as u8);
            let mut continuous = [None; 6];
            continuous[0] = Some(40.0 + (i % 30) as f64);
            rows.push(super::super::cohort::CohortRow {
                subject_id: format!("s{i:04}"),
                eye: Eye::Left,
                categorical,
                continuous,
                split: None,
            });
        }
        let t = CohortTable { rows };
        let splits = stratified_split(&t, 0.8, 11).unwrap();
        for (block, lvl) in [(0usize, 2u8), (2, 2)] {
            for level in 0..lvl {
                let frac = |s: Split| {
                    let total = t
                        .rows
                        .iter()
                        .zip(&splits)
                        .filter(|(_, &sp)| sp == s)
                        .count() as f64;
                    let hit = t
                        .rows
                        .iter()
                        .zip(&splits)
                        .filter(|(r, &sp)| sp == s && r.categorical[block] == Some(level))
                        .count() as f64;
                    hit / total
                };
                assert!(
                    (frac(Split::Dev) - frac(Split::Val)).abs() <= 0.02,
                    "factor block {block} level {level}"
                );
            }
        }
    }

    #[test]
    fn kfold_sizes() {
        let subjects: Vec<String> = (0..100).map(|i| format!("s{i}")).collect();
        let folds = kfold(&subjects, 10, 1);
        let mut counts = [0usize; 10];
        for &f in &folds {
            counts[f] += 1;
        }
        assert!(counts.iter().all(|&c| c == 10));

        let subjects23: Vec<String> = (0..23).map(|i| format!("s{i}")).collect();
        let folds = kfold(&subjects23, 10, 5);
        let mut counts = vec![0usize; 10];
        for &f in &folds {
            counts[f] += 1;
        }
        counts.sort();
        assert_eq!(&counts[..7], &[2; 7]);
        assert_eq!(&counts[7..], &[3; 3]);
    }

    #[test]
    fn kfold_keeps_subject_rows_together() {
        let mut subject_of_row = Vec::new();
        for i in 0..40 {
            subject_of_row.push(format!("s{i}"));
            subject_of_row.push(format!("s{i}"));
        }
        let folds = kfold(&subject_of_row, 10, 2);
        for pair in folds.chunks(2) {
            assert_eq!(pair[0], pair[1]);
        }
        assert_eq!(kfold(&subject_of_row, 10, 2), folds);
    }
}
