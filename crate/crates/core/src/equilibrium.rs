//! Fixed points of the games for free per-anchor values with linear, ridge
//! or constant witnesses.
//!
//! Both penalized games reduce to `f = (y + λ A f)/(1 + λ)` where `A` maps
//! predictor values to the (averaged) witness predictions at each anchor. The
//! solvers run the damped iteration `f ← ½f + ½·RHS(f)`; the residual check
//! refits witnesses from scratch instead of reusing `A`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pinv, select_rows};
use crate::neighborhood::{verify_assumptions, NeighborhoodSystem};
use crate::witness::{constant_params, linear_pinv_params, ridge_params};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FpFamily {
    Linear,
    /// Witness `argmin (λ/m)‖f − Xθ‖² + α‖θ‖²`.
    Ridge { alpha: f64 },
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpVariant {
    Symmetric,
    Asymmetric,
    Uniform,
}

#[derive(Debug, Clone)]
pub struct FixedPointProblem {
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    ns: NeighborhoodSystem,
    m: usize,
    /// λ for the games, δ for the uniform criterion.
    pub strength: f64,
    pub family: FpFamily,
}

impl FixedPointProblem {
    /// Checks equal neighborhood sizes, symmetric membership and coverage.
    pub fn new(
        inputs: DMatrix<f64>,
        targets: DVector<f64>,
        ns: NeighborhoodSystem,
        strength: f64,
        family: FpFamily,
    ) -> Result<Self> {
        let n = targets.len();
        if inputs.nrows() != n || ns.len() != n || n == 0 {
            return Err(Error::Shape(format!("{} inputs, {} targets, {} neighborhoods", inputs.nrows(), n, ns.len())));
        }
        if !(strength >= 0.0) {
            return Err(Error::InvalidInput(format!("strength must be >= 0, got {strength}")));
        }
        if let FpFamily::Ridge { alpha } = family {
            if !(alpha > 0.0) {
                return Err(Error::InvalidInput(format!("ridge alpha must be > 0, got {alpha}")));
            }
        }
        if !inputs.iter().chain(targets.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("fixed-point data"));
        }
        let report = verify_assumptions(&ns, true, true);
        for (flag, name, detail) in [
            (report.a3, "A3", "neighborhood sizes differ"),
            (report.a4, "A4", "membership is not symmetric"),
            (report.a5, "A5", "neighborhoods do not cover every anchor"),
        ] {
            if !flag {
                return Err(Error::Assumption { assumption: name, detail: detail.into() });
            }
        }
        let m = report.common_size.expect("A3 holds");
        Ok(Self { inputs, targets, ns, m, strength, family })
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn neighborhoods(&self) -> &NeighborhoodSystem {
        &self.ns
    }

    pub fn common_size(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Coefficient map of neighborhood `j`: witness parameters = `P_j · f_{B_j}`.
    fn coefficient_map(&self, j: usize) -> DMatrix<f64> {
        let b = self.ns.get(j);
        match self.family {
            FpFamily::Linear => pinv(&select_rows(&self.inputs, b)),
            FpFamily::Ridge { alpha } => {
                let x = select_rows(&self.inputs, b);
                let w = self.strength / self.m as f64;
                let gram = x.transpose() * &x * w + DMatrix::identity(x.ncols(), x.ncols()) * alpha;
                let rhs = x.transpose() * w;
                gram.clone().cholesky().map(|c| c.solve(&rhs)).unwrap_or_else(|| gram.lu().solve(&rhs).expect("ridge system is positive definite"))
            }
            FpFamily::Constant => DMatrix::from_element(1, b.len(), 1.0 / b.len() as f64),
        }
    }

    fn feature_row(&self, i: usize) -> DMatrix<f64> {
        match self.family {
            FpFamily::Constant => DMatrix::from_element(1, 1, 1.0),
            _ => self.inputs.rows(i, 1).into_owned(),
        }
    }

    /// `A` with `RHS(f) = (y + λ A f)/(1 + λ)` for the symmetric or asymmetric game.
    pub fn operator(&self, variant: FpVariant) -> Result<DMatrix<f64>> {
        let n = self.len();
        let maps: Vec<DMatrix<f64>> = (0..n).map(|j| self.coefficient_map(j)).collect();
        let mut a = DMatrix::zeros(n, n);
        let mut add = |i: usize, j: usize, weight: f64| {
            let coeffs = self.feature_row(i) * &maps[j];
            for (p, &k) in self.ns.get(j).iter().enumerate() {
                a[(i, k)] += weight * coeffs[(0, p)];
            }
        };
        match variant {
            FpVariant::Symmetric => {
                for i in 0..n {
                    let b = self.ns.get(i);
                    for &j in b {
                        add(i, j, 1.0 / b.len() as f64);
                    }
                }
            }
            FpVariant::Asymmetric => {
                for i in 0..n {
                    add(i, i, 1.0);
                }
            }
            FpVariant::Uniform => return Err(Error::InvalidInput("the uniform map is not linear".into())),
        }
        Ok(a)
    }

    /// Witness parameters on every neighborhood at `f`, refit from scratch.
    pub fn witness_params(&self, f: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        let fm = DMatrix::from_column_slice(f.len(), 1, f.as_slice());
        (0..self.len())
            .map(|j| {
                let b = self.ns.get(j);
                let fb = select_rows(&fm, b);
                Ok(match self.family {
                    FpFamily::Linear => linear_pinv_params(&select_rows(&self.inputs, b), &fb, false)?.theta.column(0).into_owned(),
                    FpFamily::Ridge { alpha } => {
                        let w = self.strength / self.m as f64;
                        ridge_params(&select_rows(&self.inputs, b), &fb, alpha, w, false)?.theta.column(0).into_owned()
                    }
                    FpFamily::Constant => constant_params(&fb)?,
                })
            })
            .collect()
    }

    fn witness_at(&self, theta: &DVector<f64>, i: usize) -> f64 {
        (self.feature_row(i) * theta)[(0, 0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl SolveOptions {
    pub fn games() -> Self {
        Self { damping: 0.5, tolerance: 1e-10, max_iterations: 100_000 }
    }

    pub fn uniform() -> Self {
        Self { damping: 0.5, tolerance: 1e-8, max_iterations: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSolution {
    pub variant: FpVariant,
    pub f: Vec<f64>,
    /// Flattened witness parameters per anchor at `f`.
    pub witness_params: Vec<Vec<f64>>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the damped iteration failed and `f` came from the direct linear solve.
    #[serde(default)]
    pub direct: bool,
}

impl FixedPointSolution {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence { iterations: self.iterations, residual: self.residual })
        }
    }
}

/// `RHS_i(f)` of the uniform fixed-point map: `α_i` if above `y_i`, `β_i` if below, else `y_i`.
fn uniform_rhs(problem: &FixedPointProblem, f: &DVector<f64>) -> Result<DVector<f64>> {
    if problem.family == FpFamily::Constant {
        return Err(Error::InvalidInput("the uniform fixed point is defined for linear witnesses".into()));
    }
    let thetas = problem.witness_params(f)?;
    let budget = problem.strength * problem.m as f64;
    let mut out = DVector::zeros(problem.len());
    for i in 0..problem.len() {
        let mut alpha = f64::NEG_INFINITY;
        let mut beta = f64::INFINITY;
        for &j in problem.ns.get(i) {
            let others: f64 = problem
                .ns
                .get(j)
                .iter()
                .filter(|&&k| k != i)
                .map(|&k| (f[k] - problem.witness_at(&thetas[j], k)).powi(2))
                .sum();
            let slack = if budget.is_finite() { (budget - others).max(0.0).sqrt() } else { f64::INFINITY };
            let g = problem.witness_at(&thetas[j], i);
            alpha = alpha.max(g - slack);
            beta = beta.min(g + slack);
        }
        let y = problem.targets[i];
        out[i] = if alpha > y {
            alpha
        } else if beta < y {
            beta
        } else {
            y
        };
    }
    Ok(out)
}

fn rhs(problem: &FixedPointProblem, variant: FpVariant, f: &DVector<f64>) -> Result<DVector<f64>> {
    if variant == FpVariant::Uniform {
        return uniform_rhs(problem, f);
    }
    let lambda = problem.strength;
    let thetas = problem.witness_params(f)?;
    let mut out = DVector::zeros(problem.len());
    for i in 0..problem.len() {
        let pull = match variant {
            FpVariant::Symmetric => {
                let b = problem.ns.get(i);
                b.iter().map(|&j| problem.witness_at(&thetas[j], i)).sum::<f64>() / b.len() as f64
            }
            _ => problem.witness_at(&thetas[i], i),
        };
        out[i] = (problem.targets[i] + lambda * pull) / (1.0 + lambda);
    }
    Ok(out)
}

/// `max_i |f_i − RHS_i(f)|` with witnesses refit at `f`.
pub fn residual_theorem1(f: &DVector<f64>, problem: &FixedPointProblem, variant: FpVariant) -> Result<f64> {
    if f.len() != problem.len() {
        return Err(Error::Shape(format!("{} values for {} anchors", f.len(), problem.len())));
    }
    Ok((f - rhs(problem, variant, f)?).amax())
}

/// Damped iteration from `init` (default `y`); never errors on non-convergence.
pub fn iterate_fixed_point(
    problem: &FixedPointProblem,
    variant: FpVariant,
    opts: SolveOptions,
    init: Option<&DVector<f64>>,
) -> Result<FixedPointSolution> {
    let mut f = init.cloned().unwrap_or_else(|| problem.targets.clone());
    if f.len() != problem.len() {
        return Err(Error::Shape("initial values do not match the problem".into()));
    }
    let step: Box<dyn Fn(&DVector<f64>) -> Result<DVector<f64>>> = match variant {
        FpVariant::Uniform => Box::new(|f: &DVector<f64>| uniform_rhs(problem, f)),
        _ => {
            let a = problem.operator(variant)?;
            let lambda = problem.strength;
            Box::new(move |f: &DVector<f64>| Ok((&problem.targets + &a * f * lambda) / (1.0 + lambda)))
        }
    };
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let next = &f * (1.0 - opts.damping) + step(&f)? * opts.damping;
        let change = (&next - &f).amax();
        f = next;
        if !f.iter().all(|v| v.is_finite()) {
            break;
        }
        if change <= opts.tolerance {
            converged = true;
            break;
        }
    }
    let residual = (&f - rhs(problem, variant, &f)?).amax();
    let witness_params = problem.witness_params(&f)?.into_iter().map(|t| t.iter().copied().collect()).collect();
    Ok(FixedPointSolution { variant, f: f.iter().copied().collect(), witness_params, residual, iterations, converged, direct: false })
}

/// Damped iteration, then the direct solve if the iteration stalls or blows up.
pub fn solve_linear_fp(problem: &FixedPointProblem, variant: FpVariant) -> Result<FixedPointSolution> {
    if variant == FpVariant::Uniform {
        return Err(Error::InvalidInput("the uniform fixed point is not linear in f".into()));
    }
    let damped = iterate_fixed_point(problem, variant, SolveOptions::games(), None)?;
    if damped.converged {
        return Ok(damped);
    }
    let f = match solve_exact(problem, variant) {
        Ok(f) if f.iter().all(|v| v.is_finite()) => f,
        _ => return damped.into_result(),
    };
    let residual = (&f - rhs(problem, variant, &f)?).amax();
    let scale = problem.targets.amax().max(1.0);
    let witness_params = problem.witness_params(&f)?.into_iter().map(|t| t.iter().copied().collect()).collect();
    FixedPointSolution {
        variant,
        f: f.iter().copied().collect(),
        witness_params,
        residual,
        iterations: damped.iterations,
        converged: residual <= 1e-8 * scale,
        direct: true,
    }
    .into_result()
}

pub fn solve_fp_symmetric(problem: &FixedPointProblem) -> Result<FixedPointSolution> {
    solve_linear_fp(problem, FpVariant::Symmetric)
}

pub fn solve_fp_asymmetric(problem: &FixedPointProblem) -> Result<FixedPointSolution> {
    solve_linear_fp(problem, FpVariant::Asymmetric)
}

/// Constant-witness fixed point: neighborhood means fed back with decay `λ/(1+λ)`.
pub fn solve_fp_constant(problem: &FixedPointProblem, variant: FpVariant) -> Result<FixedPointSolution> {
    if problem.family != FpFamily::Constant {
        return Err(Error::InvalidInput("solve_fp_constant needs the constant family".into()));
    }
    if variant == FpVariant::Uniform {
        return Err(Error::InvalidInput("constant family has no uniform fixed point here".into()));
    }
    solve_linear_fp(problem, variant)
}

pub fn solve_fp_uniform(problem: &FixedPointProblem) -> Result<FixedPointSolution> {
    iterate_fixed_point(problem, FpVariant::Uniform, SolveOptions::uniform(), None)?.into_result()
}

/// Direct solve of `((1+λ)I − λA) f = y`.
pub fn solve_exact(problem: &FixedPointProblem, variant: FpVariant) -> Result<DVector<f64>> {
    let a = problem.operator(variant)?;
    let n = problem.len();
    let lambda = problem.strength;
    let system = DMatrix::identity(n, n) * (1.0 + lambda) - a * lambda;
    system
        .lu()
        .solve(&problem.targets)
        .ok_or_else(|| Error::Undefined("fixed-point system is singular".into()))
}

/// Feedback weight on the witness term, `λ/(1+λ)`.
pub fn decay_factor(lambda: f64) -> f64 {
    lambda / (1.0 + lambda)
}
