use rayon::prelude::*;

/// Whether per-index work fans out to the rayon pool.
///
/// Results never depend on the choice: outputs are assembled in index order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Serial,
    #[default]
    Parallel,
}

impl Exec {
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Serial => (0..n).map(f).collect(),
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }
}

/// Collects per-index results, reporting the lowest failing index.
pub(crate) fn first_error<T>(results: Vec<crate::Result<T>>) -> crate::Result<Vec<T>> {
    results.into_iter().collect()
}
