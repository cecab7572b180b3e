/// A partition of the teams into groups sharing one ability.
///
/// Groups are numbered by decreasing level, so group 0 holds the strongest
/// teams.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    assignment: Vec<usize>,
    levels: Vec<f64>,
}

impl Grouping {
    /// Groups teams by `labels` (any integers; equal label = same group) and
    /// sets each group's level to the mean of its members' abilities.
    pub fn from_labels(labels: &[usize], mu: &[f64]) -> Grouping {
        assert_eq!(labels.len(), mu.len());
        let mut distinct: Vec<usize> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let pos = |l: usize| distinct.binary_search(&l).unwrap();
        let mut sums = vec![0.0; distinct.len()];
        let mut counts = vec![0usize; distinct.len()];
        for (&l, &m) in labels.iter().zip(mu) {
            sums[pos(l)] += m;
            counts[pos(l)] += 1;
        }
        let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
        // order groups by decreasing level, first member breaking ties
        let first: Vec<usize> = (0..distinct.len())
            .map(|g| labels.iter().position(|&l| pos(l) == g).unwrap())
            .collect();
        let mut order: Vec<usize> = (0..distinct.len()).collect();
        order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(first[a].cmp(&first[b])));
        let mut rank = vec![0; distinct.len()];
        for (r, &g) in order.iter().enumerate() {
            rank[g] = r;
        }
        Grouping {
            assignment: labels.iter().map(|&l| rank[pos(l)]).collect(),
            levels: order.iter().map(|&g| means[g]).collect(),
        }
    }

    /// Shifts the levels so that the per-team abilities sum to zero.
    pub fn recenter(&mut self) {
        let k = self.assignment.len() as f64;
        if k == 0.0 {
            return;
        }
        let mean = self.assignment.iter().map(|&g| self.levels[g]).sum::<f64>() / k;
        self.levels.iter_mut().for_each(|l| *l -= mean);
    }

    /// Every team on its own.
    pub fn singletons(mu: &[f64]) -> Grouping {
        let labels: Vec<usize> = (0..mu.len()).collect();
        Grouping::from_labels(&labels, mu)
    }

    /// All teams in one group.
    pub fn single(k: usize) -> Grouping {
        Grouping {
            assignment: vec![0; k],
            levels: vec![0.0],
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn group_of(&self, team: usize) -> usize {
        self.assignment[team]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn teams(&self) -> usize {
        self.assignment.len()
    }

    pub fn members(&self, group: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&t| self.assignment[t] == group)
            .collect()
    }

    /// Whether two groupings put the same teams together, ignoring levels.
    pub fn same_partition(&self, other: &Grouping) -> bool {
        self.partition_key() == other.partition_key()
    }

    /// Canonical labels: each team labeled by the first team of its group.
    pub fn partition_key(&self) -> Vec<usize> {
        let mut first = vec![usize::MAX; self.len()];
        self.assignment
            .iter()
            .enumerate()
            .map(|(t, &g)| {
                if first[g] == usize::MAX {
                    first[g] = t;
                }
                first[g]
            })
            .collect()
    }

    /// Per-team abilities implied by the group levels.
    pub fn expand(&self) -> Vec<f64> {
        self.assignment.iter().map(|&g| self.levels[g]).collect()
    }
}
