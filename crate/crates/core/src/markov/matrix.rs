use nalgebra::DMatrix;

use super::measure::{Measure, DISTRIBUTION_TOL};
use crate::error::{Error, Result};

/// Looser row-sum tolerance for products of many matrices.
pub const PRODUCT_TOL: f64 = 1e-10;

/// Step cap of the power iteration behind [`invariant_distribution`].
pub const POWER_ITERATION_CAP: usize = 1_000_000;

/// Largest chain for which the direct solve is used as a cross-check.
pub const DIRECT_SOLVE_MAX: usize = 64;

/// Row-stochastic matrix over `n` states, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    entries: Vec<f64>,
    labels: Option<Vec<String>>,
}

fn check_rows(n: usize, entries: &[f64], tol: f64) -> Result<()> {
    for (i, row) in entries.chunks_exact(n).enumerate() {
        if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!(
                "entry {p} in row {i} is not a probability"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::invalid(format!("row {i} sums to {sum}, not 1")));
        }
    }
    Ok(())
}

impl StochasticMatrix {
    /// Builds a matrix from rows; every row must be a distribution within 1e-12.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix needs at least one state"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        check_rows(n, &entries, DISTRIBUTION_TOL)?;
        Ok(Self {
            n,
            entries,
            labels: None,
        })
    }

    /// Normalises each row of non-negative weights to sum to one.
    pub fn from_weights(rows: Vec<Vec<f64>>) -> Result<Self> {
        let normalised = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let m = Measure::new(r)?;
                let total = m.total();
                if total <= 0.0 {
                    return Err(Error::invalid(format!("row {i} has no mass")));
                }
                Ok(m.weights().iter().map(|w| w / total).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::from_rows(normalised)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            n,
            entries,
            labels: None,
        }
    }

    pub(crate) fn from_entries_unchecked(n: usize, entries: Vec<f64>) -> Self {
        debug_assert!(check_rows(n, &entries, PRODUCT_TOL).is_ok());
        Self {
            n,
            entries,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of state `i`, falling back to its index.
    pub fn label(&self, i: usize) -> String {
        self.labels
            .as_ref()
            .map_or_else(|| i.to_string(), |l| l[i].clone())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.n)
    }

    /// Largest entrywise difference to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            entries.extend(m.row(i).iter());
        }
        Self::from_entries_unchecked(n, entries)
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(Self::from_dmatrix(
            &(self.to_dmatrix() * other.to_dmatrix()),
        ))
    }
}

/// One step of the chain: `(λP)_j = Σ_i λ_i p_ij`.
pub fn propagate(lambda: &Measure, p: &StochasticMatrix) -> Result<Measure> {
    if lambda.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: lambda.len(),
        });
    }
    Ok(Measure::from_vec_unchecked(step(lambda.weights(), p)))
}

fn step(lambda: &[f64], p: &StochasticMatrix) -> Vec<f64> {
    let mut out = vec![0.0; p.n()];
    for (li, row) in lambda.iter().zip(p.rows()) {
        if *li == 0.0 {
            continue;
        }
        for (o, pij) in out.iter_mut().zip(row) {
            *o += li * pij;
        }
    }
    out
}

/// `P^t` by repeated squaring; `P^0` is the identity.
pub fn n_step(p: &StochasticMatrix, t: u64) -> StochasticMatrix {
    let mut result = DMatrix::<f64>::identity(p.n(), p.n());
    let mut base = p.to_dmatrix();
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    StochasticMatrix::from_dmatrix(&result)
}

/// Probability of the path `i_0, …, i_t`: `λ_{i_0} p_{i_0 i_1} ⋯ p_{i_{t-1} i_t}`.
pub fn path_probability(lambda: &Measure, p: &StochasticMatrix, path: &[usize]) -> Result<f64> {
    let (&first, _) = path
        .split_first()
        .ok_or_else(|| Error::invalid("path must contain at least one state"))?;
    if lambda.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: lambda.len(),
        });
    }
    if let Some(&s) = path.iter().find(|&&s| s >= p.n()) {
        return Err(Error::invalid(format!(
            "state {s} out of range for {} states",
            p.n()
        )));
    }
    Ok(path
        .windows(2)
        .fold(lambda[first], |acc, w| acc * p.get(w[0], w[1])))
}

/// Invariant distribution by power iteration from the uniform distribution.
///
/// Iterates the lazy chain `(I + P) / 2`, which has the same invariant
/// distributions as `P` but no periodic oscillation, until `‖πP − π‖₁ ≤ tol`.
pub fn invariant_distribution(p: &StochasticMatrix, tol: f64) -> Result<Measure> {
    invariant_distribution_capped(p, tol, POWER_ITERATION_CAP)
}

pub fn invariant_distribution_capped(
    p: &StochasticMatrix,
    tol: f64,
    max_steps: usize,
) -> Result<Measure> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let mut pi = vec![1.0 / p.n() as f64; p.n()];
    let mut residual = f64::INFINITY;
    for _ in 0..=max_steps {
        let next = step(&pi, p);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        if residual <= tol {
            return Ok(Measure::from_vec_unchecked(normalise(pi)));
        }
        pi = pi.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
    }
    Err(Error::NotConverged {
        iterations: max_steps,
        residual,
        last: pi,
    })
}

fn normalise(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Invariant distribution from the linear system `π(P − I) = 0`, `Σπ = 1`.
///
/// Fails when the system is singular, i.e. the invariant distribution is not unique.
pub fn solve_invariant(p: &StochasticMatrix) -> Result<Measure> {
    let n = p.n();
    // Transposed system: (Pᵀ − I) πᵀ = 0 with the last equation replaced by Σπ = 1.
    let mut a = p.to_dmatrix().transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::invalid("invariant distribution is not unique"))?;
    if x.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return Err(Error::invalid("invariant distribution is not unique"));
    }
    Ok(Measure::from_vec_unchecked(normalise(
        x.iter().map(|v| v.max(0.0)).collect(),
    )))
}

/// Power-iteration answer alongside the direct solve, when the chain is small
/// enough and the solve is well-posed.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCrossCheck {
    pub power: Measure,
    pub direct: Option<Measure>,
}

impl InvariantCrossCheck {
    pub fn discrepancy(&self) -> Option<f64> {
        self.direct.as_ref().map(|d| d.max_abs_diff(&self.power))
    }
}

pub fn invariant_cross_check(p: &StochasticMatrix, tol: f64) -> Result<InvariantCrossCheck> {
    let power = invariant_distribution(p, tol)?;
    let direct = if p.n() <= DIRECT_SOLVE_MAX {
        solve_invariant(p).ok()
    } else {
        None
    };
    Ok(InvariantCrossCheck { power, direct })
}

/// Iterates `λ ← λP` until successive iterates stay within `tol` in total
/// variation for three consecutive steps, or `horizon` steps pass.
pub fn equilibrium_limit(
    lambda: &Measure,
    p: &StochasticMatrix,
    tol: f64,
    horizon: u64,
) -> Result<(Measure, bool)> {
    let mut current = lambda.clone();
    let mut quiet = 0;
    for _ in 0..horizon {
        let next = propagate(&current, p)?;
        let moved = next.total_variation(&current);
        current = next;
        if moved <= tol {
            quiet += 1;
            if quiet >= 3 {
                return Ok((current, true));
            }
        } else {
            quiet = 0;
        }
    }
    Ok((current, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> StochasticMatrix {
        StochasticMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    fn swap() -> StochasticMatrix {
        StochasticMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn rejects_non_stochastic() {
        assert!(StochasticMatrix::from_rows(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![vec![1.5, -0.5], vec![0.0, 1.0]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![vec![1.0], vec![1.0]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![]).is_err());
        assert!(StochasticMatrix::from_weights(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn propagate_examples() {
        let lam = Measure::distribution(vec![0.5, 0.5]).unwrap();
        let out = propagate(&lam, &two_state()).unwrap();
        assert!(close(out.weights(), &[0.55, 0.45], 1e-15));

        let lam = Measure::distribution(vec![0.3, 0.2, 0.5]).unwrap();
        let out = propagate(&lam, &StochasticMatrix::identity(3)).unwrap();
        assert_eq!(out, lam);

        let out = propagate(&Measure::point(2, 0), &swap()).unwrap();
        assert_eq!(out.weights(), &[0.0, 1.0]);

        assert!(matches!(
            propagate(&Measure::uniform(3), &two_state()),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn n_step_examples() {
        assert_eq!(n_step(&two_state(), 0), StochasticMatrix::identity(2));
        assert_eq!(n_step(&swap(), 2), StochasticMatrix::identity(2));
        let sq = n_step(&two_state(), 2);
        assert!(close(sq.row(0), &[0.83, 0.17], 1e-15));
        assert!(close(sq.row(1), &[0.34, 0.66], 1e-15));
    }

    #[test]
    fn path_examples() {
        let p = two_state();
        assert_eq!(
            path_probability(&Measure::point(2, 0), &p, &[0]).unwrap(),
            1.0
        );
        let v = path_probability(&Measure::point(2, 0), &p, &[0, 1, 1]).unwrap();
        assert!((v - 0.08).abs() < 1e-15);
        assert_eq!(
            path_probability(&Measure::point(2, 1), &p, &[0, 1, 0]).unwrap(),
            0.0
        );
        assert!(path_probability(&Measure::point(2, 0), &p, &[]).is_err());
        assert!(path_probability(&Measure::point(2, 0), &p, &[0, 2]).is_err());
    }

    #[test]
    fn invariant_examples() {
        let pi = invariant_distribution(&two_state(), 1e-12).unwrap();
        assert!(close(pi.weights(), &[2.0 / 3.0, 1.0 / 3.0], 1e-11));
        let direct = solve_invariant(&two_state()).unwrap();
        assert!(close(direct.weights(), &[2.0 / 3.0, 1.0 / 3.0], 1e-14));

        let pi = invariant_distribution(&StochasticMatrix::identity(3), 1e-12).unwrap();
        assert_eq!(pi, Measure::uniform(3));
        assert!(solve_invariant(&StochasticMatrix::identity(3)).is_err());

        let pi = invariant_distribution(&swap(), 1e-12).unwrap();
        assert_eq!(pi.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn invariant_reports_non_convergence() {
        let skew =
            StochasticMatrix::from_rows(vec![vec![1.0 - 1e-6, 1e-6], vec![3e-6, 1.0 - 3e-6]])
                .unwrap();
        match invariant_distribution_capped(&skew, 1e-14, 10) {
            Err(Error::NotConverged {
                iterations,
                last,
                residual,
            }) => {
                assert_eq!(iterations, 10);
                assert_eq!(last.len(), 2);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn cross_check_agrees() {
        let c = invariant_cross_check(&two_state(), 1e-13).unwrap();
        assert!(c.discrepancy().unwrap() < 1e-10);
        let c = invariant_cross_check(&StochasticMatrix::identity(2), 1e-13).unwrap();
        assert!(c.direct.is_none());
    }

    #[test]
    fn equilibrium_examples() {
        let (lim, ok) =
            equilibrium_limit(&Measure::point(2, 1), &two_state(), 1e-13, 10_000).unwrap();
        assert!(ok);
        assert!(close(lim.weights(), &[2.0 / 3.0, 1.0 / 3.0], 1e-11));

        let lam = Measure::distribution(vec![0.3, 0.7]).unwrap();
        let (lim, ok) = equilibrium_limit(&lam, &StochasticMatrix::identity(2), 1e-12, 5).unwrap();
        assert!(ok);
        assert_eq!(lim, lam);

        for horizon in [1, 2, 3, 10, 1001] {
            let (_, ok) = equilibrium_limit(&Measure::point(2, 0), &swap(), 1e-6, horizon).unwrap();
            assert!(!ok);
        }
    }

    #[test]
    fn labels_are_checked() {
        let p = two_state()
            .with_labels(vec!["a".into(), "b".into()])
            .unwrap();
        assert_eq!(p.label(1), "b");
        assert!(two_state().with_labels(vec!["a".into()]).is_err());
        assert_eq!(two_state().label(0), "0");
    }
}
