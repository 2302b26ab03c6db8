use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

/// Dialog indices per split, each list in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitAssignment {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitAssignment {
    pub fn get(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    /// `index<TAB>split` lines in index order.
    pub fn manifest(&self) -> String {
        let n = self.train.len() + self.valid.len() + self.test.len();
        let mut of = vec![Split::Train; n];
        for s in Split::ALL {
            for &i in self.get(s) {
                of[i] = s;
            }
        }
        of.iter()
            .enumerate()
            .map(|(i, s)| format!("{i}\t{}\n", s.name()))
            .collect()
    }
}

/// Seeded shuffle of `n` dialogs into 80/10/10 train/valid/test.
pub fn split_dialogs(n: usize, seed: u64) -> SplitAssignment {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_valid = n / 10;
    let n_test = n / 10;
    let n_train = n - n_valid - n_test;
    let part = |range: std::ops::Range<usize>| {
        let mut v = order[range].to_vec();
        v.sort_unstable();
        v
    };
    SplitAssignment {
        train: part(0..n_train),
        valid: part(n_train..n_train + n_valid),
        test: part(n_train + n_valid..n),
    }
}
