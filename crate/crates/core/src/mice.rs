//! Multiple imputation by chained equations.
//!
//! Each chain is a Gibbs sampler over the columns of a matrix with holes:
//! every incomplete column is regressed on the current completed values of the
//! other columns (ridge least squares with a posterior coefficient draw) and
//! its holes are refilled by predictive mean matching, so imputed values are
//! always copies of observed values from the same column.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{dot, Cholesky};
use crate::seed;

/// Fill used for columns with no observed value at all (normalized midpoint).
pub const INERT_FILL: f64 = 0.5;

/// Row-major matrix where some entries are holes.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleyMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
    observed: Vec<bool>,
}

impl HoleyMatrix {
    /// All entries start as holes.
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
            observed: vec![false; nrows * ncols],
        }
    }

    pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(rows.len(), ncols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged rows");
            for (c, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    m.set(r, c, *v);
                }
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.ncols + col;
        self.observed[i].then_some(self.values[i])
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let i = row * self.ncols + col;
        self.values[i] = value;
        self.observed[i] = true;
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.observed[row * self.ncols + col]
    }

    /// Holes in row-major order.
    pub fn missing_cells(&self) -> Vec<(usize, usize)> {
        (0..self.nrows)
            .flat_map(|r| (0..self.ncols).map(move |c| (r, c)))
            .filter(|&(r, c)| !self.is_observed(r, c))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSettings {
    pub chains: usize,
    pub iterations: usize,
    /// Number of nearest observed rows a hole draws its donor from.
    pub donors: usize,
    pub ridge: f64,
    pub execution: Execution,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            chains: 5,
            iterations: 10,
            donors: 1,
            ridge: 1e-5,
            execution: Execution::Parallel,
        }
    }
}

impl ChainSettings {
    pub fn check(&self) -> Result<()> {
        if self.chains < 1 {
            return Err(Error::Config("chains must be >= 1".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        if self.donors < 1 {
            return Err(Error::Config("pmm donors must be >= 1".into()));
        }
        if !(self.ridge > 0.0) || !self.ridge.is_finite() {
            return Err(Error::Config("ridge must be positive".into()));
        }
        Ok(())
    }
}

/// The regression drawn for one column during one PMM step.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    pub target_column: usize,
    pub predictors: Vec<usize>,
    /// Intercept first, then one coefficient per predictor.
    pub coefficients: Vec<f64>,
    pub residual_scale: f64,
    pub ridge: f64,
}

#[derive(Debug, Clone)]
pub struct ChainState {
    nrows: usize,
    ncols: usize,
    matrix: Vec<f64>,
    observed_rows: Vec<Vec<usize>>,
    missing_rows: Vec<Vec<usize>>,
    inert: Vec<bool>,
    rng: ChaCha8Rng,
    iteration: usize,
}

impl ChainState {
    /// Fills every hole with a uniform draw from its column's observed values.
    /// Columns without observations are filled with [`INERT_FILL`] and take no
    /// further part in the sampler.
    pub fn initialize(input: &HoleyMatrix, mut rng: ChaCha8Rng) -> Self {
        let (nrows, ncols) = (input.nrows, input.ncols);
        let mut matrix = input.values.clone();
        let mut observed_rows = vec![Vec::new(); ncols];
        let mut missing_rows = vec![Vec::new(); ncols];
        for r in 0..nrows {
            for c in 0..ncols {
                if input.is_observed(r, c) {
                    observed_rows[c].push(r);
                } else {
                    missing_rows[c].push(r);
                }
            }
        }
        let mut inert = vec![false; ncols];
        for c in 0..ncols {
            if missing_rows[c].is_empty() {
                continue;
            }
            if observed_rows[c].is_empty() {
                inert[c] = true;
                for &r in &missing_rows[c] {
                    matrix[r * ncols + c] = INERT_FILL;
                }
                continue;
            }
            for &r in &missing_rows[c] {
                let donor = observed_rows[c][rng.random_range(0..observed_rows[c].len())];
                matrix[r * ncols + c] = input.values[donor * ncols + c];
            }
        }
        Self {
            nrows,
            ncols,
            matrix,
            observed_rows,
            missing_rows,
            inert,
            rng,
            iteration: 0,
        }
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.ncols + col]
    }

    /// Row-major `nrows x ncols` current values.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_inert(&self, col: usize) -> bool {
        self.inert[col]
    }

    fn is_target(&self, col: usize) -> bool {
        !self.inert[col] && !self.missing_rows[col].is_empty() && self.observed_rows[col].len() >= 2
    }

    /// Redraws the holes of one column by predictive mean matching.
    pub fn pmm_draw(&mut self, target: usize, settings: &ChainSettings) -> Result<ConditionalModel> {
        let ncols = self.ncols;
        let predictors: Vec<usize> = (0..ncols)
            .filter(|&c| c != target && !self.inert[c])
            .collect();
        let p = predictors.len() + 1;
        let design = |m: &[f64], r: usize, out: &mut Vec<f64>| {
            out.clear();
            out.push(1.0);
            out.extend(predictors.iter().map(|&c| m[r * ncols + c]));
        };

        let obs = &self.observed_rows[target];
        let mut gram = vec![0.0; p * p];
        let mut xty = vec![0.0; p];
        let mut x = Vec::with_capacity(p);
        for &r in obs {
            design(&self.matrix, r, &mut x);
            let y = self.matrix[r * ncols + target];
            for i in 0..p {
                xty[i] += x[i] * y;
                for j in 0..=i {
                    gram[i * p + j] += x[i] * x[j];
                }
            }
        }
        for i in 0..p {
            gram[i * p + i] += settings.ridge;
        }
        let chol = Cholesky::new(&gram, p)
            .ok_or(Error::DegenerateConditionalModel { column: target })?;
        let beta_hat = chol.solve(&xty);

        let mut rss = 0.0;
        let mut pred_obs = Vec::with_capacity(obs.len());
        for &r in obs {
            design(&self.matrix, r, &mut x);
            let fit = dot(&x, &beta_hat);
            let resid = self.matrix[r * ncols + target] - fit;
            rss += resid * resid;
            pred_obs.push(fit);
        }
        let sigma = (rss / (obs.len().saturating_sub(p)).max(1) as f64).sqrt();

        // beta* = beta_hat + sigma * G^-T z, so Cov = sigma^2 (X'X + ridge I)^-1
        let mut z: Vec<f64> = (0..p).map(|_| self.rng.sample(StandardNormal)).collect();
        chol.solve_upper_in_place(&mut z);
        let beta_star: Vec<f64> = beta_hat
            .iter()
            .zip(&z)
            .map(|(b, dz)| b + sigma * dz)
            .collect();
        if beta_star.iter().any(|b| !b.is_finite()) {
            return Err(Error::DegenerateConditionalModel { column: target });
        }

        let mut order: Vec<usize> = (0..obs.len()).collect();
        order.sort_by(|&a, &b| pred_obs[a].total_cmp(&pred_obs[b]).then(a.cmp(&b)));
        let sorted_pred: Vec<f64> = order.iter().map(|&i| pred_obs[i]).collect();
        let donor_values: Vec<f64> = order
            .iter()
            .map(|&i| self.matrix[obs[i] * ncols + target])
            .collect();
        let k = settings.donors.min(obs.len());

        let missing = std::mem::take(&mut self.missing_rows[target]);
        for &r in &missing {
            design(&self.matrix, r, &mut x);
            let q = dot(&x, &beta_star);
            let pick = choose_donor(&sorted_pred, q, k, &mut self.rng);
            self.matrix[r * ncols + target] = donor_values[pick];
        }
        self.missing_rows[target] = missing;

        Ok(ConditionalModel {
            target_column: target,
            predictors,
            coefficients: beta_star,
            residual_scale: sigma,
            ridge: settings.ridge,
        })
    }

    /// One Gibbs pass over the incomplete columns in ascending order.
    pub fn sweep(&mut self, settings: &ChainSettings) -> Result<usize> {
        let mut draws = 0;
        for c in 0..self.ncols {
            if self.is_target(c) {
                self.pmm_draw(c, settings)?;
                draws += 1;
            }
        }
        self.iteration += 1;
        Ok(draws)
    }
}

/// Picks uniformly among the `k` entries of `sorted` closest to `q`, breaking
/// ties at the k-th distance uniformly as well. Returns an index into `sorted`.
fn choose_donor(sorted: &[f64], q: f64, k: usize, rng: &mut ChaCha8Rng) -> usize {
    let n = sorted.len();
    debug_assert!(k >= 1 && k <= n);
    let pos = sorted.partition_point(|&v| v < q);
    let (mut lo, mut hi) = (pos, pos);
    let mut kth = 0.0;
    for _ in 0..k {
        let left = (lo > 0).then(|| q - sorted[lo - 1]);
        let right = (hi < n).then(|| sorted[hi] - q);
        match (left, right) {
            (Some(l), Some(r)) if l <= r => {
                kth = l;
                lo -= 1;
            }
            (Some(l), None) => {
                kth = l;
                lo -= 1;
            }
            (_, Some(r)) => {
                kth = r;
                hi += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    // [strict_lo, strict_hi) are closer than kth; [tie_lo, tie_hi) are within it.
    let left = &sorted[..pos];
    let right = &sorted[pos..];
    let strict_lo = left.partition_point(|&v| q - v >= kth);
    let tie_lo = left.partition_point(|&v| q - v > kth);
    let strict_hi = pos + right.partition_point(|&v| v - q < kth);
    let tie_hi = pos + right.partition_point(|&v| v - q <= kth);
    let closer = (pos - strict_lo) + (strict_hi - pos);
    let r = rng.random_range(0..k);
    if r < closer {
        strict_lo + r
    } else {
        let ties_left = strict_lo - tie_lo;
        let ties_right = tie_hi - strict_hi;
        let t = rng.random_range(0..ties_left + ties_right);
        if t < ties_left {
            tie_lo + t
        } else {
            strict_hi + (t - ties_left)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainEnsembleResult {
    /// Holes of the input in row-major order; all per-cell vectors follow it.
    pub missing_cells: Vec<(usize, usize)>,
    pub per_chain_fills: Vec<Vec<f64>>,
    pub pooled_fill: Vec<f64>,
    pub per_cell_std: Vec<f64>,
}

impl ChainEnsembleResult {
    /// The input with every hole replaced by its pooled fill.
    pub fn pooled_matrix(&self, input: &HoleyMatrix) -> HoleyMatrix {
        let mut out = input.clone();
        for (&(r, c), &v) in self.missing_cells.iter().zip(&self.pooled_fill) {
            out.set(r, c, v);
        }
        out
    }
}

pub fn run_chain(
    input: &HoleyMatrix,
    settings: &ChainSettings,
    rng: ChaCha8Rng,
) -> Result<ChainState> {
    let mut state = ChainState::initialize(input, rng);
    for _ in 0..settings.iterations {
        state.sweep(settings)?;
    }
    Ok(state)
}

/// Runs `settings.chains` independent chains and pools their fills.
pub fn run_chains(
    input: &HoleyMatrix,
    settings: &ChainSettings,
    master_seed: u64,
) -> Result<ChainEnsembleResult> {
    settings.check()?;
    let missing_cells = input.missing_cells();
    if missing_cells.is_empty() {
        return Ok(ChainEnsembleResult {
            missing_cells,
            per_chain_fills: vec![Vec::new(); settings.chains],
            pooled_fill: Vec::new(),
            per_cell_std: Vec::new(),
        });
    }
    let per_chain_fills = settings.execution.try_map(settings.chains, |chain| {
        let state = run_chain(input, settings, chain_rng(master_seed, chain))?;
        Ok::<_, Error>(
            missing_cells
                .iter()
                .map(|&(r, c)| state.value(r, c))
                .collect::<Vec<f64>>(),
        )
    })?;
    let (pooled_fill, per_cell_std) = pool(&per_chain_fills, missing_cells.len());
    Ok(ChainEnsembleResult {
        missing_cells,
        per_chain_fills,
        pooled_fill,
        per_cell_std,
    })
}

pub fn chain_rng(master_seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = seed::rng(master_seed, &[]);
    rng.set_stream(chain as u64);
    rng
}

/// Per-cell mean and sample standard deviation over chains, folded in chain order.
fn pool(fills: &[Vec<f64>], cells: usize) -> (Vec<f64>, Vec<f64>) {
    let m = fills.len();
    let mut mean = Vec::with_capacity(cells);
    let mut std = Vec::with_capacity(cells);
    for i in 0..cells {
        let first = fills[0][i];
        if fills.iter().all(|f| f[i] == first) {
            mean.push(first);
            std.push(0.0);
            continue;
        }
        let mu = fills.iter().map(|f| f[i]).sum::<f64>() / m as f64;
        let ss: f64 = fills.iter().map(|f| (f[i] - mu).powi(2)).sum();
        mean.push(mu);
        std.push((ss / (m - 1) as f64).sqrt());
    }
    (mean, std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(s: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(s)
    }

    #[test]
    fn single_donor_initialization() {
        let m = HoleyMatrix::from_rows(&[vec![Some(3.0)], vec![None], vec![None]]);
        let s = ChainState::initialize(&m, rng(1));
        assert_eq!(s.matrix(), &[3.0, 3.0, 3.0]);
    }

    #[test]
    fn complete_column_unchanged() {
        let m = HoleyMatrix::from_rows(&[vec![Some(1.0), None], vec![Some(2.0), Some(5.0)]]);
        let s = ChainState::initialize(&m, rng(1));
        assert_eq!(s.value(0, 0), 1.0);
        assert_eq!(s.value(1, 0), 2.0);
    }

    #[test]
    fn fully_missing_column_is_inert() {
        let m = HoleyMatrix::from_rows(&[vec![Some(1.0), None], vec![Some(2.0), None]]);
        let s = ChainState::initialize(&m, rng(1));
        assert_eq!(s.value(0, 1), INERT_FILL);
        assert_eq!(s.value(1, 1), INERT_FILL);
        assert!(s.is_inert(1));
    }

    #[test]
    fn single_distinct_value_fills_with_it() {
        let rows: Vec<Vec<Option<f64>>> = (0..8)
            .map(|i| vec![Some(i as f64), if i % 3 == 0 { None } else { Some(0.25) }])
            .collect();
        let m = HoleyMatrix::from_rows(&rows);
        let mut s = ChainState::initialize(&m, rng(3));
        s.pmm_draw(1, &ChainSettings::default()).unwrap();
        for r in [0, 3, 6] {
            assert_eq!(s.value(r, 1), 0.25);
        }
    }

    #[test]
    fn constant_predictor_draws_stay_in_observed_set() {
        let ys = [0.1, 0.4, 0.2, 0.9, 0.7, 0.3, 0.5];
        let mut rows: Vec<Vec<Option<f64>>> =
            ys.iter().map(|&y| vec![Some(1.0), Some(y)]).collect();
        rows.push(vec![Some(1.0), None]);
        rows.push(vec![Some(1.0), None]);
        let m = HoleyMatrix::from_rows(&rows);
        let settings = ChainSettings {
            donors: 5,
            ..ChainSettings::default()
        };
        let mut s = ChainState::initialize(&m, rng(9));
        for _ in 0..20 {
            s.pmm_draw(1, &settings).unwrap();
            assert!(ys.contains(&s.value(7, 1)));
            assert!(ys.contains(&s.value(8, 1)));
        }
    }

    #[test]
    fn sweep_counts_and_iteration() {
        let full = HoleyMatrix::from_rows(&[vec![Some(1.0), Some(2.0)], vec![Some(3.0), Some(4.0)]]);
        let mut s = ChainState::initialize(&full, rng(1));
        let before = s.matrix().to_vec();
        assert_eq!(s.sweep(&ChainSettings::default()).unwrap(), 0);
        assert_eq!(s.iteration(), 1);
        assert_eq!(s.matrix(), &before[..]);

        let one = HoleyMatrix::from_rows(&[
            vec![Some(1.0), Some(2.0)],
            vec![Some(3.0), None],
            vec![Some(5.0), Some(6.0)],
        ]);
        let mut s = ChainState::initialize(&one, rng(1));
        assert_eq!(s.sweep(&ChainSettings::default()).unwrap(), 1);
    }

    #[test]
    fn replay_is_identical() {
        let m = HoleyMatrix::from_rows(&[
            vec![Some(0.1), None, Some(0.3)],
            vec![Some(0.5), Some(0.2), None],
            vec![None, Some(0.8), Some(0.9)],
            vec![Some(0.4), Some(0.6), Some(0.1)],
        ]);
        let settings = ChainSettings::default();
        let a = run_chain(&m, &settings, rng(11)).unwrap();
        let b = run_chain(&m, &settings, rng(11)).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn single_chain_has_zero_std() {
        let m = HoleyMatrix::from_rows(&[
            vec![Some(0.1), None],
            vec![Some(0.5), Some(0.2)],
            vec![Some(0.7), Some(0.8)],
            vec![Some(0.2), Some(0.3)],
        ]);
        let settings = ChainSettings {
            chains: 1,
            ..ChainSettings::default()
        };
        let res = run_chains(&m, &settings, 4).unwrap();
        assert_eq!(res.per_cell_std, vec![0.0]);
    }

    #[test]
    fn no_holes_means_empty_result() {
        let m = HoleyMatrix::from_rows(&[vec![Some(1.0)], vec![Some(2.0)]]);
        let res = run_chains(&m, &ChainSettings::default(), 1).unwrap();
        assert!(res.pooled_fill.is_empty());
        assert_eq!(res.pooled_matrix(&m), m);
    }

    #[test]
    fn donor_choice_respects_k_nearest() {
        let sorted = [0.0, 1.0, 2.0, 3.0, 10.0];
        let mut r = rng(5);
        for _ in 0..200 {
            let i = choose_donor(&sorted, 2.1, 3, &mut r);
            assert!([1, 2, 3].contains(&i));
            assert_eq!(choose_donor(&sorted, 9.0, 1, &mut r), 4);
        }
        // all tied: every index reachable
        let flat = [1.0; 6];
        let mut seen = [false; 6];
        for _ in 0..500 {
            seen[choose_donor(&flat, 1.0, 2, &mut r)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn settings_are_checked() {
        let bad = ChainSettings {
            chains: 0,
            ..ChainSettings::default()
        };
        assert!(matches!(bad.check(), Err(Error::Config(_))));
    }
}
