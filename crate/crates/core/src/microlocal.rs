//! Hierarchical quadratically constrained maximization over a coefficient
//! block `G_{t,n}` rooted at `Q_{j,k}`.
//!
//! For a node `a` of the block at absolute scale `J_a` the constraint reads
//! `q_a(f) = 2^{n J_a} Σ_{b ⊂ a} 2^{2(J_b − J_a)α} ‖f_b‖² ≤ 1`, where `f_b` is
//! the vector of the `2^n − 1` coefficients attached to node `b`. Writing
//! `κ = 2^{2α − n}` this unfolds as `q_a = 2^{n J_a}‖f_a‖² + κ Σ_{c child} q_c`.
//!
//! The maximum of `Σ ⟨|g_b|, f_b⟩` is computed through the Lagrange dual.
//! With multipliers `λ_a ≥ 0` and `μ_b = λ_b + κ μ_{parent(b)}` the dual
//! objective becomes `Σ_b (μ_b + γ_b²/(4μ_b)) − κ Σ_{b ≠ root} μ_{parent(b)}`
//! with `γ_b = ‖g_b‖ 2^{−n J_b/2}` under `μ_b ≥ κ μ_{parent(b)}`. This separates
//! along the tree: for every node the convex function
//!
//! `M_a(μ) = μ + γ_a²/(4μ) + Σ_c [M_c(max(κμ, μ*_c)) − κμ]`
//!
//! is minimized by a one-dimensional root search on `M_a'`, bottom-up. The
//! value is `M_root(μ*_root)` and the maximizer is `f_b = |g_b| / (2 μ_b 2^{n J_b})`
//! with `μ_b = max(κ μ_parent, μ*_b)` taken top-down.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::{enumerate_block, BlockIndexSet, DyadicCube, Epsilon, WaveletIndex};
use crate::error::{QspaceError, Result};
use crate::wavelet::{CoefficientField, FieldWindow};

/// Feasibility tolerance on every constraint.
pub const TAU_FEAS: f64 = 1e-8;
/// Agreement tolerance between the value and the pairing of the maximizer.
pub const TAU_VAL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrolocalProblem {
    pub base: DyadicCube,
    pub depth: u32,
    pub alpha: f64,
    /// Coefficients aligned with [`enumerate_block`] members.
    pub values: Vec<f64>,
}

/// Tree layout shared by the solver, the feasibility check and the oracle.
#[derive(Clone, Debug)]
pub struct BlockTree {
    pub block: BlockIndexSet,
    /// Node cubes in level order.
    pub nodes: Vec<DyadicCube>,
    pub children: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
    /// `2^n − 1`.
    pub per_node: usize,
}

impl BlockTree {
    pub fn new(base: DyadicCube, depth: u32) -> Self {
        let block = enumerate_block(base, depth);
        let nodes = block.nodes();
        let pos: BTreeMap<DyadicCube, usize> =
            nodes.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let mut children = vec![Vec::new(); nodes.len()];
        let mut parent = vec![None; nodes.len()];
        for (i, q) in nodes.iter().enumerate() {
            if q.j > base.j {
                let p = pos[&q.parent()];
                children[p].push(i);
                parent[i] = Some(p);
            }
        }
        let per_node = (1usize << base.dim()) - 1;
        Self {
            block,
            nodes,
            children,
            parent,
            per_node,
        }
    }

    pub fn node_weight(&self, i: usize) -> f64 {
        let n = self.nodes[i].dim() as f64;
        (n * self.nodes[i].j as f64).exp2()
    }

    pub fn node_slice<'a>(&self, v: &'a [f64], i: usize) -> &'a [f64] {
        &v[i * self.per_node..(i + 1) * self.per_node]
    }

    /// `q_a(f)` for every node, in node order.
    pub fn constraint_values(&self, f: &[f64], alpha: f64) -> Vec<f64> {
        let n = self.block.base.dim() as f64;
        let kappa = (2.0 * alpha - n).exp2();
        let mut q = vec![0.0; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            let own: f64 = self.node_slice(f, i).iter().map(|v| v * v).sum();
            let kids: f64 = self.children[i].iter().map(|&c| q[c]).sum();
            q[i] = self.node_weight(i) * own + kappa * kids;
        }
        q
    }
}

impl MicrolocalProblem {
    pub fn new(base: DyadicCube, depth: u32, alpha: f64, values: Vec<f64>) -> Result<Self> {
        let want = BlockIndexSet::expected_len(base.dim(), depth);
        if values.len() != want {
            return Err(QspaceError::Shape(format!(
                "block of depth {depth} in dimension {} needs {want} values, got {}",
                base.dim(),
                values.len()
            )));
        }
        if !(alpha.is_finite() && alpha >= 0.0 && alpha < base.dim() as f64 / 2.0) {
            return Err(QspaceError::Parameter(format!(
                "alpha = {alpha} outside [0, n/2) for micro-local problems"
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(QspaceError::Numeric(format!("non-finite block value at {p}")));
        }
        Ok(Self {
            base,
            depth,
            alpha,
            values,
        })
    }

    /// Block `g^t_{j,k}` read from a field; indices outside the field are zero.
    pub fn from_field(c: &CoefficientField, base: DyadicCube, depth: u32, alpha: f64) -> Result<Self> {
        let block = enumerate_block(base, depth);
        let values = block.members.iter().map(|i| c.get(i)).collect();
        Self::new(base, depth, alpha, values)
    }

    pub fn members(&self) -> Vec<WaveletIndex> {
        enumerate_block(self.base, self.depth).members
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| a * v).collect(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    /// `max_a q_a(f) − 1` of the raw maximizer before any rescaling.
    pub max_violation: f64,
    /// Dual value minus the pairing of the returned maximizer.
    pub duality_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicrolocalSolution {
    /// `P^t_j g^t_{j,k}`.
    pub value: f64,
    /// `S^t_j f` aligned with the block members, signs matching `g`.
    pub maximizer: Vec<f64>,
    /// `Q^t_j g^ε_{j,k}` for `ε ∈ E_n` at the root.
    pub redistributed: Vec<(Epsilon, f64)>,
    pub diagnostics: SolverDiagnostics,
}

impl MicrolocalSolution {
    /// `Σ_ε Q^t_j g^ε_{j,k} Φ^ε_{j,k}` as a coefficient field.
    pub fn redistributed_field(&self, base: &DyadicCube, window: FieldWindow) -> Result<CoefficientField> {
        let mut c = CoefficientField::new(window);
        for (eps, v) in &self.redistributed {
            c.set(*eps, base.j, base.k(), *v)?;
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative bracket width at which a node's root search stops.
    pub rel_tol: f64,
    pub max_bisections: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            max_bisections: 400,
        }
    }
}

struct Dual<'a> {
    tree: &'a BlockTree,
    gamma2: Vec<f64>,
    kappa: f64,
    mu_star: Vec<f64>,
}

impl Dual<'_> {
    fn m(&self, a: usize, mu: f64) -> f64 {
        let mut v = mu;
        if self.gamma2[a] > 0.0 {
            v += self.gamma2[a] / (4.0 * mu);
        }
        for &c in &self.tree.children[a] {
            let lam = self.kappa * mu;
            v += self.m(c, lam.max(self.mu_star[c])) - lam;
        }
        v
    }

    fn dm(&self, a: usize, mu: f64) -> f64 {
        let mut d = 1.0;
        if self.gamma2[a] > 0.0 {
            d -= self.gamma2[a] / (4.0 * mu * mu);
        }
        for &c in &self.tree.children[a] {
            let lam = self.kappa * mu;
            let h = if lam < self.mu_star[c] {
                -1.0
            } else {
                self.dm(c, lam) - 1.0
            };
            d += self.kappa * h;
        }
        d
    }

    /// Minimizer of `M_a` on `[0, ∞)`; children must already be solved.
    fn argmin(&self, a: usize, opts: &SolverOptions, iterations: &mut usize) -> Result<f64> {
        let tiny = f64::MIN_POSITIVE.sqrt();
        if self.dm(a, tiny) >= 0.0 {
            return Ok(0.0);
        }
        let mut lo = tiny;
        let mut hi = 1.0;
        while self.dm(a, hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            *iterations += 1;
            if !hi.is_finite() {
                return Err(QspaceError::NoConvergence {
                    iterations: *iterations,
                    best_value: f64::NAN,
                    reason: "no upper bracket for the dual root".into(),
                });
            }
        }
        for _ in 0..opts.max_bisections {
            let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            *iterations += 1;
            if self.dm(a, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= opts.rel_tol * hi {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(QspaceError::NoConvergence {
            iterations: *iterations,
            best_value: self.m(a, 0.5 * (lo + hi)),
            reason: format!("root bracket [{lo:e}, {hi:e}] did not close"),
        })
    }
}

/// Solves the micro-local problem with default options.
pub fn solve(p: &MicrolocalProblem) -> Result<MicrolocalSolution> {
    solve_with(p, &SolverOptions::default())
}

pub fn solve_with(p: &MicrolocalProblem, opts: &SolverOptions) -> Result<MicrolocalSolution> {
    if p.values.iter().all(|v| *v == 0.0) {
        return Err(QspaceError::Empty(
            "micro-local block is identically zero".into(),
        ));
    }
    let tree = BlockTree::new(p.base, p.depth);
    let n = p.base.dim() as f64;
    let kappa = (2.0 * p.alpha - n).exp2();
    let gamma2: Vec<f64> = (0..tree.nodes.len())
        .map(|i| {
            let e: f64 = tree.node_slice(&p.values, i).iter().map(|v| v * v).sum();
            e / tree.node_weight(i)
        })
        .collect();
    let mut dual = Dual {
        tree: &tree,
        gamma2,
        kappa,
        mu_star: vec![0.0; tree.nodes.len()],
    };
    let mut iterations = 0;
    for a in (0..tree.nodes.len()).rev() {
        dual.mu_star[a] = dual.argmin(a, opts, &mut iterations)?;
    }
    let dual_value = dual.m(0, dual.mu_star[0]);

    let mut mu = vec![0.0; tree.nodes.len()];
    for a in 0..tree.nodes.len() {
        mu[a] = match tree.parent[a] {
            None => dual.mu_star[a],
            Some(par) => (kappa * mu[par]).max(dual.mu_star[a]),
        };
    }
    let mut f = vec![0.0; p.values.len()];
    for a in 0..tree.nodes.len() {
        if mu[a] <= 0.0 {
            continue;
        }
        let denom = 2.0 * mu[a] * tree.node_weight(a);
        for e in 0..tree.per_node {
            let i = a * tree.per_node + e;
            f[i] = p.values[i] / denom;
        }
    }
    let q = tree.constraint_values(&f, p.alpha);
    let worst = q.iter().cloned().fold(0.0, f64::max);
    let max_violation = worst - 1.0;
    if worst > 1.0 {
        let s = worst.sqrt();
        f.iter_mut().for_each(|v| *v /= s);
    }
    let pairing: f64 = f.iter().zip(&p.values).map(|(a, b)| a * b).sum();
    let diagnostics = SolverDiagnostics {
        iterations,
        max_violation,
        duality_gap: dual_value - pairing,
    };
    if diagnostics.duality_gap.abs() > TAU_VAL * dual_value.max(1e-300) {
        return Err(QspaceError::NoConvergence {
            iterations,
            best_value: pairing,
            reason: format!("duality gap {:e} above tolerance", diagnostics.duality_gap),
        });
    }
    let value = dual_value;
    let redistributed = redistribute(p, value);
    Ok(MicrolocalSolution {
        value,
        maximizer: f,
        redistributed,
        diagnostics,
    })
}

/// Root coefficients `Q^t_j g^ε_{j,k}` carrying the value `P` of the block:
/// `2^{nj/2} P (Σ_ε |g^ε_{j,k}|²)^{−1/2} g^ε_{j,k}`, or `2^{n(j−1)/2} P` for
/// every `ε` when the root coefficients vanish.
pub fn redistribute(p: &MicrolocalProblem, value: f64) -> Vec<(Epsilon, f64)> {
    let n = p.base.dim();
    let per = (1usize << n) - 1;
    let root = &p.values[..per];
    let norm = root.iter().map(|v| v * v).sum::<f64>().sqrt();
    let j = p.base.j as f64;
    (0..per)
        .map(|e| {
            let v = if norm > 0.0 {
                (n as f64 * j / 2.0).exp2() * value * root[e] / norm
            } else {
                (n as f64 * (j - 1.0) / 2.0).exp2() * value
            };
            ((e + 1) as Epsilon, v)
        })
        .collect()
}

/// Left-hand sides `q_a(f)` of every constraint, in node order.
pub fn feasibility(f: &[f64], base: DyadicCube, t: u32, alpha: f64) -> Result<Vec<f64>> {
    let want = BlockIndexSet::expected_len(base.dim(), t);
    if f.len() != want {
        return Err(QspaceError::Shape(format!(
            "f-block has {} entries, block needs {want}",
            f.len()
        )));
    }
    Ok(BlockTree::new(base, t).constraint_values(f, alpha))
}

/// Largest block accepted by [`brute_force_microlocal`].
pub const BRUTE_FORCE_MAX_MEMBERS: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    /// Objective at a feasible point.
    pub lower: f64,
    /// `sqrt(min h)` over the visited simplex points.
    pub upper: f64,
    pub evaluations: usize,
}

impl BruteForceResult {
    pub fn bound(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Independent bracket for the block value from the aggregated-constraint
/// form: for `λ` in the simplex over constraints, `Σ λ_a q_a(f) ≤ 1` gives the
/// upper bound `sqrt(h(λ))`, `h(λ) = Σ_i g_i² / D_i(λ)`, and the minimum over
/// the simplex equals the value. `h` is minimized by compass search along
/// `e_a − e_b` with the step halved down to `resolution`; the minimizing
/// direction `f_i = g_i / D_i` rescaled onto the feasible set gives the lower
/// bound.
pub fn brute_force_microlocal(p: &MicrolocalProblem, resolution: f64) -> Result<BruteForceResult> {
    let members = p.members();
    if members.len() > BRUTE_FORCE_MAX_MEMBERS {
        return Err(QspaceError::Parameter(format!(
            "brute force accepts at most {BRUTE_FORCE_MAX_MEMBERS} block members, got {}",
            members.len()
        )));
    }
    if !(resolution > 0.0) {
        return Err(QspaceError::Parameter("resolution must be positive".into()));
    }
    let tree = BlockTree::new(p.base, p.depth);
    let n = p.base.dim() as f64;
    let nn = tree.nodes.len();
    // coefficient of λ_a in D_i for every member i
    let mut coef = vec![vec![0.0; nn]; members.len()];
    for (i, m) in members.iter().enumerate() {
        let jb = m.j() as f64;
        for (a, q) in tree.nodes.iter().enumerate() {
            if q.contains(&m.cube) {
                let ja = q.j as f64;
                coef[i][a] = (n * ja).exp2() * (2.0 * (jb - ja) * p.alpha).exp2();
            }
        }
    }
    let g2: Vec<f64> = p.values.iter().map(|v| v * v).collect();
    let h = |lam: &[f64]| -> f64 {
        let mut s = 0.0;
        for (i, c) in coef.iter().enumerate() {
            if g2[i] == 0.0 {
                continue;
            }
            let d: f64 = c.iter().zip(lam).map(|(x, l)| x * l).sum();
            if d <= 0.0 {
                return f64::INFINITY;
            }
            s += g2[i] / d;
        }
        s
    };
    let mut lam = vec![1.0 / nn as f64; nn];
    let mut best = h(&lam);
    let mut evaluations = 1;
    let mut step = 0.5 / nn as f64;
    while step > resolution {
        let mut improved = false;
        for a in 0..nn {
            for b in 0..nn {
                if a == b || lam[b] <= 0.0 {
                    continue;
                }
                let mv = step.min(lam[b]);
                let mut trial = lam.clone();
                trial[a] += mv;
                trial[b] -= mv;
                let v = h(&trial);
                evaluations += 1;
                if v < best {
                    best = v;
                    lam = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let mut f: Vec<f64> = coef
        .iter()
        .zip(&p.values)
        .map(|(c, g)| {
            let d: f64 = c.iter().zip(&lam).map(|(x, l)| x * l).sum();
            if d > 0.0 {
                g.abs() / d
            } else {
                0.0
            }
        })
        .collect();
    let worst = tree
        .constraint_values(&f, p.alpha)
        .into_iter()
        .fold(0.0, f64::max);
    if worst > 0.0 {
        let s = worst.sqrt();
        f.iter_mut().for_each(|v| *v /= s);
    }
    let lower: f64 = f.iter().zip(&p.values).map(|(a, b)| a * b.abs()).sum();
    Ok(BruteForceResult {
        lower,
        upper: best.sqrt(),
        evaluations,
    })
}
