//! Window statistics, the quadratic cost they induce, the per-block
//! stochastic gradient update, the per-node score, and an exact dense solver
//! kept as a correctness oracle (never on the streaming path).
//!
//! With per-node feature vectors `k_v(y) = (k_v(y, atom_1), ..., k_v(y, atom_L_v))`
//! the empirical cost is the quadratic `F_t(theta) = 1/2 theta^T A_t theta + theta^T b_t`
//! with
//!
//! ```text
//! A_t = H_pre + lambda * avg_j K_G(y_j) L K_G(y_j)^T + gamma I,
//! b_t = h_pre - h_post,
//! ```
//!
//! where `H_pre` is the block-diagonal of per-node Gram averages and the
//! Laplacian term contributes `lambda d_v H_pre_v` on diagonal blocks and
//! `-lambda W_uv * cross(v, u)` on edge blocks. The block gradient of `F_t`
//! with respect to `theta_v` is `B_v theta_v + c_v` as implemented in
//! [`bsgd_step`].

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dictionary::NodeDictionary;
use crate::graph::Graph;
use crate::{Error, Frame, Result};

/// Per-node parameter blocks; block `v` has the length of node `v`'s
/// dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    blocks: Vec<DVector<f64>>,
}

impl ParameterVector {
    pub fn zeros(block_sizes: &[usize]) -> Self {
        ParameterVector {
            blocks: block_sizes.iter().map(|&l| DVector::zeros(l)).collect(),
        }
    }

    pub fn block(&self, v: usize) -> &DVector<f64> {
        &self.blocks[v]
    }

    pub fn block_mut(&mut self, v: usize) -> &mut DVector<f64> {
        &mut self.blocks[v]
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// Appends a trailing zero to block `v`; called when node `v`'s
    /// dictionary grows by one atom.
    pub fn pad_block(&mut self, v: usize) {
        let old = &self.blocks[v];
        let mut new = DVector::zeros(old.len() + 1);
        new.rows_mut(0, old.len()).copy_from(old);
        self.blocks[v] = new;
    }

    pub fn to_flat(&self) -> DVector<f64> {
        let mut flat = DVector::zeros(self.total_len());
        let mut off = 0;
        for b in &self.blocks {
            flat.rows_mut(off, b.len()).copy_from(b);
            off += b.len();
        }
        flat
    }

    pub fn from_flat(block_sizes: &[usize], flat: &DVector<f64>) -> Self {
        assert_eq!(block_sizes.iter().sum::<usize>(), flat.len());
        let mut blocks = Vec::with_capacity(block_sizes.len());
        let mut off = 0;
        for &l in block_sizes {
            blocks.push(flat.rows(off, l).into_owned());
            off += l;
        }
        ParameterVector { blocks }
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

/// Empirical window averages of kernel features.
///
/// `h_pre[v]` / `h_post[v]` average node `v`'s feature vectors over the
/// pre/post window; `gram_pre[v]` averages their outer products over the pre
/// window; `cross_pre[(u, v)]` (stored once per edge, `u < v`) averages
/// `k_u(y_{u,j}) k_v(y_{v,j})^T` over the pre window.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub n_pre: usize,
    pub n_post: usize,
    pub h_pre: Vec<DVector<f64>>,
    pub h_post: Vec<DVector<f64>>,
    pub gram_pre: Vec<DMatrix<f64>>,
    pub cross_pre: HashMap<(usize, usize), DMatrix<f64>>,
}

impl SufficientStats {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.h_pre.iter().map(|h| h.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.h_pre.iter().map(|h| h.len()).sum()
    }

    /// Accumulates `acc += scale * cross(v, u) * x`, resolving the stored
    /// orientation: `cross(v, u) = cross(u, v)^T`.
    pub fn cross_apply(&self, v: usize, u: usize, x: &DVector<f64>, scale: f64, acc: &mut DVector<f64>) {
        if v < u {
            let m = &self.cross_pre[&(v, u)];
            acc.gemv(scale, m, x, 1.0);
        } else {
            let m = &self.cross_pre[&(u, v)];
            acc.gemv_tr(scale, m, x, 1.0);
        }
    }

    /// Materializes `cross(v, u)` in row-block-`v` orientation (`L_v x L_u`).
    pub fn cross_matrix(&self, v: usize, u: usize) -> DMatrix<f64> {
        if v < u {
            self.cross_pre[&(v, u)].clone()
        } else {
            self.cross_pre[&(u, v)].transpose()
        }
    }
}

fn featurize_window(
    dicts: &[NodeDictionary],
    frames: &[&Frame],
    window_name: &str,
) -> Result<Vec<Vec<DVector<f64>>>> {
    let n = dicts.len();
    let mut feats: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(frames.len()); n];
    for (j, frame) in frames.iter().enumerate() {
        if frame.len() != n {
            return Err(Error::Data(format!(
                "{window_name} frame {j} has {} node entries, expected {n}",
                frame.len()
            )));
        }
        for v in 0..n {
            let f = dicts[v].featurize(&frame[v])?;
            feats[v].push(DVector::from_vec(f));
        }
    }
    Ok(feats)
}

/// Computes the window statistics over the given pre/post windows against the
/// current dictionaries. Cross terms are computed only for graph edges.
pub fn compute_stats(
    dicts: &[NodeDictionary],
    graph: &Graph,
    window_pre: &[&Frame],
    window_post: &[&Frame],
) -> Result<SufficientStats> {
    let n = dicts.len();
    if graph.n_nodes() != n {
        return Err(Error::Data(format!(
            "graph has {} nodes but {} dictionaries were given",
            graph.n_nodes(),
            n
        )));
    }
    if window_pre.is_empty() || window_post.is_empty() {
        return Err(Error::Data("windows must be non-empty".into()));
    }
    let n_pre = window_pre.len();
    let n_post = window_post.len();

    let feats_pre = featurize_window(dicts, window_pre, "pre-window")?;
    let feats_post = featurize_window(dicts, window_post, "post-window")?;

    let mut h_pre = Vec::with_capacity(n);
    let mut h_post = Vec::with_capacity(n);
    let mut gram_pre = Vec::with_capacity(n);
    for v in 0..n {
        let l = dicts[v].len();
        let mut h = DVector::zeros(l);
        let mut gram = DMatrix::zeros(l, l);
        for k in &feats_pre[v] {
            h += k;
            gram.ger(1.0, k, k, 1.0);
        }
        h /= n_pre as f64;
        gram /= n_pre as f64;
        h_pre.push(h);
        gram_pre.push(gram);

        let mut hp = DVector::zeros(l);
        for k in &feats_post[v] {
            hp += k;
        }
        hp /= n_post as f64;
        h_post.push(hp);
    }

    let mut cross_pre = HashMap::new();
    for (u, v, _w) in graph.edges() {
        let mut m = DMatrix::zeros(dicts[u].len(), dicts[v].len());
        for (ku, kv) in feats_pre[u].iter().zip(&feats_pre[v]) {
            m.ger(1.0, ku, kv, 1.0);
        }
        m /= n_pre as f64;
        cross_pre.insert((u, v), m);
    }

    Ok(SufficientStats {
        n_pre,
        n_post,
        h_pre,
        h_post,
        gram_pre,
        cross_pre,
    })
}

/// Assembles the full quadratic `(A_t, b_t)` from the block statistics.
/// `A_t` is symmetric positive definite with smallest eigenvalue >= gamma.
pub fn assemble_quadratic(
    stats: &SufficientStats,
    graph: &Graph,
    lambda: f64,
    gamma: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let sizes = stats.block_sizes();
    let total: usize = sizes.iter().sum();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0usize, |acc, &l| {
            let o = *acc;
            *acc += l;
            Some(o)
        })
        .collect();

    let mut a = DMatrix::zeros(total, total);
    let mut b = DVector::zeros(total);
    for v in 0..sizes.len() {
        let (o, l) = (offsets[v], sizes[v]);
        let scale = 1.0 + lambda * graph.degree(v);
        let mut diag = stats.gram_pre[v].clone() * scale;
        for i in 0..l {
            diag[(i, i)] += gamma;
        }
        a.view_mut((o, o), (l, l)).copy_from(&diag);
        b.rows_mut(o, l)
            .copy_from(&(&stats.h_pre[v] - &stats.h_post[v]));
    }
    for (u, v, w) in graph.edges() {
        let m = &stats.cross_pre[&(u, v)]; // L_u x L_v
        let block = m * (-lambda * w);
        a.view_mut((offsets[u], offsets[v]), (sizes[u], sizes[v]))
            .copy_from(&block);
        a.view_mut((offsets[v], offsets[u]), (sizes[v], sizes[u]))
            .copy_from(&block.transpose());
    }
    (a, b)
}

/// Evaluates `F_t(theta) = 1/2 theta^T A theta + theta^T b`.
pub fn objective(a: &DMatrix<f64>, b: &DVector<f64>, theta: &DVector<f64>) -> f64 {
    0.5 * (theta.transpose() * a * theta)[(0, 0)] + theta.dot(b)
}

/// Solves for the unique minimizer `theta = -A^{-1} b` of the quadratic by
/// Cholesky factorization, verifying the residual. Test oracle only — the
/// streaming path never inverts `A_t`.
pub fn solve_exact(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Data("solve_exact: matrix is not positive definite".into()))?;
    let theta = chol.solve(&(-b));
    let residual = (a * &theta + b).norm();
    if residual > 1e-8 * b.norm().max(1.0) {
        return Err(Error::Data(format!(
            "solve_exact: residual {residual} too large"
        )));
    }
    Ok(theta)
}

/// Spectral norm (largest eigenvalue) of a symmetric PSD matrix by power
/// iteration with a fixed-seed start vector: relative tolerance 1e-6, at
/// most 500 iterations.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
    x /= x.norm();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let y = m * &x;
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        let next = x.dot(&y).abs();
        if (next - lambda).abs() <= 1e-6 * next.max(f64::MIN_POSITIVE) {
            return next;
        }
        lambda = next;
        x = y / ny;
    }
    lambda
}

/// The Lipschitz bound `C_{v,t} = (1 + lambda d_v) ||H_pre_v||_2 + gamma
/// + lambda M_v sum_{u in N(v)} W_uv M_u` used to cap the learning rate.
/// Entry v of `kernel_bounds` is node v's uniform kernel bound `M_v`.
pub fn step_constant(
    stats: &SufficientStats,
    graph: &Graph,
    kernel_bounds: &[f64],
    v: usize,
    lambda: f64,
    gamma: f64,
) -> f64 {
    let h_norm = spectral_norm(&stats.gram_pre[v]);
    let neighbor_sum: f64 = graph
        .neighbors(v)
        .iter()
        .map(|&(u, w)| w * kernel_bounds[u])
        .sum();
    (1.0 + lambda * graph.degree(v)) * h_norm + gamma + lambda * kernel_bounds[v] * neighbor_sum
}

/// Learning rate `alpha_{v,t} = min(c / (t - (bp + n_post - 1)), 1 / C_{v,t})`.
/// `t` counts frames from 1; the first scored step is `t = bp + n_post`.
pub fn step_size(t: usize, c: f64, bp: usize, n_post: usize, c_vt: f64) -> Result<f64> {
    let base = bp + n_post - 1;
    if t <= base {
        return Err(Error::Config(format!(
            "step_size: t = {t} is not past bp + n_post - 1 = {base}"
        )));
    }
    let s = (t - base) as f64;
    Ok((c / s).min(1.0 / c_vt))
}

/// One Gauss–Seidel sweep of the block update: nodes are processed in
/// `order`, and the coupling term for node `v` reads the already-updated
/// value of every neighbor processed earlier in this sweep.
///
/// Per node: `theta_v <- theta_v - alpha_v (B_v theta_v + c_v)` with
/// `B_v = (1 + lambda d_v) H_pre_v + gamma I` and
/// `c_v = h_pre_v - h_post_v - lambda sum_{u in N(v)} W_vu cross(v,u) theta_u`.
pub fn bsgd_step(
    theta: &mut ParameterVector,
    stats: &SufficientStats,
    graph: &Graph,
    lambda: f64,
    gamma: f64,
    step_sizes: &[f64],
    order: &[usize],
) {
    let n = graph.n_nodes();
    assert_eq!(theta.n_blocks(), n);
    assert_eq!(step_sizes.len(), n);
    assert_eq!(order.len(), n);

    for &v in order {
        let grad = block_gradient(theta, stats, graph, lambda, gamma, v);
        theta.block_mut(v).axpy(-step_sizes[v], &grad, 1.0);
    }
}

/// The block gradient `B_v theta_v + c_v` of the quadratic at the current
/// (possibly mid-sweep) parameter state.
pub fn block_gradient(
    theta: &ParameterVector,
    stats: &SufficientStats,
    graph: &Graph,
    lambda: f64,
    gamma: f64,
    v: usize,
) -> DVector<f64> {
    let tv = theta.block(v);
    let mut grad = DVector::zeros(tv.len());
    grad.gemv(1.0 + lambda * graph.degree(v), &stats.gram_pre[v], tv, 0.0);
    grad.axpy(gamma, tv, 1.0);
    grad += &stats.h_pre[v];
    grad -= &stats.h_post[v];
    if lambda > 0.0 {
        for &(u, w) in graph.neighbors(v) {
            stats.cross_apply(v, u, theta.block(u), -(lambda * w), &mut grad);
        }
    }
    grad
}

/// Per-node score and its Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub per_node: Vec<f64>,
    pub norm: f64,
}

/// Score after a sweep: `g_v = theta_v^T h_pre_v`, the pre-window average of
/// the estimated ratio offset at node `v`.
pub fn score(theta: &ParameterVector, stats: &SufficientStats) -> ScoreVector {
    let per_node: Vec<f64> = (0..theta.n_blocks())
        .map(|v| theta.block(v).dot(&stats.h_pre[v]))
        .collect();
    let norm = per_node.iter().map(|g| g * g).sum::<f64>().sqrt();
    ScoreVector { per_node, norm }
}
