//! Search over unitary precoders for the average-MMSE objective.
//!
//! Only the support columns `U_B` enter the objective, so the search runs on
//! the Stiefel manifold of `N×|B|` matrices with orthonormal columns. The
//! remaining columns are carried along and re-orthonormalized after each
//! step.

use crate::average::{average_mmse_exact, MAX_EXACT_N};
use crate::linalg::{self, c, CMatrix};
use crate::model::{ChannelMode, ChannelSpec, SourceModel, Spectrum, UnitaryTransform};
use crate::parallel::ordered_block_fold;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub max_steps: usize,
    pub step_init: f64,
    pub armijo_c: f64,
    pub shrink: f64,
    pub tol_residual: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_steps: 500,
            step_init: 0.1,
            armijo_c: 1e-4,
            shrink: 0.5,
            tol_residual: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::InvalidInput("step_init must be positive".into()));
        }
        if !open_unit(self.armijo_c) || !open_unit(self.shrink) {
            return Err(Error::InvalidInput(
                "armijo_c and shrink must lie in (0, 1)".into(),
            ));
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidInput("tol_residual must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport {
    pub residual: f64,
    pub objective: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub transform: UnitaryTransform,
    /// Objective at the initial point and after every accepted step.
    pub trace: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub steps: usize,
}

/// Average MMSE `J(U)` for the channel.
pub fn objective(u: &UnitaryTransform, spectrum: &Spectrum, channel: &ChannelSpec) -> Result<f64> {
    average_mmse_exact(&SourceModel::new(u.clone(), spectrum.clone())?, channel)
}

/// `Σ_k p_k tr((Λ_B⁻¹ + σ⁻² U_B†H_k†H_kU_B)⁻¹)` for an arbitrary square
/// matrix in place of `U`, with no unitarity check. Used for finite
/// differences off the manifold.
pub fn objective_matrix(u: &CMatrix, spectrum: &Spectrum, channel: &ChannelSpec) -> Result<f64> {
    if u.nrows() != spectrum.len() || u.ncols() != spectrum.len() {
        return Err(Error::InvalidDimension(
            "matrix and spectrum sizes differ".into(),
        ));
    }
    let problem = Problem::new(spectrum, channel)?;
    Ok(problem.evaluate(&problem.columns(u), false)?.0)
}

/// Patterns with nonzero probability, as (indices, probability).
fn channel_patterns(n: usize, channel: &ChannelSpec) -> Result<Vec<(Vec<usize>, f64)>> {
    channel.validate(n)?;
    let subsets = |keep: &dyn Fn(usize) -> Option<f64>| -> Result<Vec<(Vec<usize>, f64)>> {
        if n > MAX_EXACT_N {
            return Err(Error::ResourceLimit(format!(
                "exact objective is limited to N <= {MAX_EXACT_N}"
            )));
        }
        Ok((0u64..1 << n)
            .filter_map(|mask| {
                let w = keep(mask.count_ones() as usize)?;
                (w > 0.0).then(|| ((0..n).filter(|&i| mask >> i & 1 == 1).collect(), w))
            })
            .collect())
    };
    match channel.mode {
        ChannelMode::Scalar => Ok((0..n).map(|i| (vec![i], 1.0 / n as f64)).collect()),
        ChannelMode::Bernoulli { p } => {
            subsets(&|m| Some(crate::average::subset_probability(n, m, p)))
        }
        ChannelMode::UniformSubset { m } => {
            let w = 1.0 / crate::average::binomial(n, m);
            subsets(&|k| (k == m).then_some(w))
        }
        ChannelMode::WithReplacement { .. } => Err(Error::InvalidInput(
            "the exact objective needs a scalar, Bernoulli or uniform-subset channel".into(),
        )),
    }
}

/// Objective and Wirtinger gradient restricted to the support columns.
struct Problem {
    n: usize,
    support: Vec<usize>,
    prior: Vec<f64>,
    noise_power: f64,
    patterns: Vec<(Vec<usize>, f64)>,
}

impl Problem {
    fn new(spectrum: &Spectrum, channel: &ChannelSpec) -> Result<Self> {
        let s2 = channel.noise_power;
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(Error::InvalidInput(
                "gradient-based search needs a positive noise power".into(),
            ));
        }
        let n = spectrum.len();
        let support = spectrum.support();
        let prior = support
            .iter()
            .map(|&i| 1.0 / spectrum.lambdas()[i])
            .collect();
        Ok(Problem {
            n,
            support,
            prior,
            noise_power: s2,
            patterns: channel_patterns(n, channel)?,
        })
    }

    fn columns(&self, u: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.n, self.support.len(), |r, k| u[(r, self.support[k])])
    }

    /// `Σ_k p_k tr(M_k⁻¹)` and, if requested,
    /// `−Σ_k p_k σ⁻² H_k†H_k U_B M_k⁻²`.
    fn evaluate(&self, ub: &CMatrix, with_gradient: bool) -> Result<(f64, CMatrix)> {
        let b = self.prior.len();
        let grad_shape = if with_gradient { (self.n, b) } else { (0, 0) };
        let (value, grad, failed) = ordered_block_fold(
            self.patterns.len(),
            || (0.0, CMatrix::zeros(grad_shape.0, grad_shape.1), false),
            |acc, k| {
                let (idx, w) = &self.patterns[k];
                let mut m = CMatrix::zeros(b, b);
                for &i in idx {
                    let row = ub.row(i);
                    m += row.adjoint() * row;
                }
                m.scale_mut(1.0 / self.noise_power);
                for (j, &inv) in self.prior.iter().enumerate() {
                    m[(j, j)] += c(inv, 0.0);
                }
                let Ok(minv) = linalg::inverse_hpd(&linalg::hermitian_part(&m)) else {
                    acc.2 = true;
                    return;
                };
                acc.0 += w * linalg::real_trace(&minv);
                if with_gradient {
                    let m2 = &minv * &minv;
                    let scale = -w / self.noise_power;
                    for &i in idx {
                        let g = (ub.row(i) * &m2).scale(scale);
                        let mut dst = acc.1.row_mut(i);
                        dst += g;
                    }
                }
            },
            |total, part| {
                total.0 += part.0;
                total.1 += part.1;
                total.2 |= part.2;
            },
        );
        if failed || !value.is_finite() {
            return Err(Error::NumericalFailure("objective is not finite".into()));
        }
        Ok((value, grad))
    }

    fn pad(&self, gb: &CMatrix) -> CMatrix {
        let mut g = CMatrix::zeros(self.n, self.n);
        for (k, &col) in self.support.iter().enumerate() {
            g.set_column(col, &gb.column(k));
        }
        g
    }

    /// Replaces the support columns of `u` with `ub`, then restores
    /// orthonormality with a phase-fixed QR over `[U_B, U_{B^c}]`.
    fn retract(&self, u: &CMatrix, ub: &CMatrix) -> CMatrix {
        let order: Vec<usize> = self
            .support
            .iter()
            .copied()
            .chain((0..self.n).filter(|i| !self.support.contains(i)))
            .collect();
        let b = self.support.len();
        let stacked = CMatrix::from_fn(self.n, self.n, |r, k| {
            if k < b {
                ub[(r, k)]
            } else {
                u[(r, order[k])]
            }
        });
        let q = linalg::phase_fixed_qr(&stacked);
        let mut out = CMatrix::zeros(self.n, self.n);
        for (k, &col) in order.iter().enumerate() {
            out.set_column(col, &q.column(k));
        }
        out
    }
}

/// `G_B − U_B · herm(U_B† G_B)`, the Stiefel tangent projection.
fn tangent(ub: &CMatrix, gb: &CMatrix) -> CMatrix {
    gb - ub * linalg::hermitian_part(&(ub.adjoint() * gb))
}

/// Real inner product `Re tr(A† B)`.
fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn check_size(u: &UnitaryTransform, spectrum: &Spectrum) -> Result<()> {
    if u.n() != spectrum.len() {
        return Err(Error::InvalidDimension(format!(
            "transform is {n}x{n} but the spectrum has {} entries",
            spectrum.len(),
            n = u.n()
        )));
    }
    Ok(())
}

/// Gradient of `J` with respect to `conj(U)`, zero outside the support
/// columns. The directional derivative along `Z` is `2 Re tr(G† Z)`.
pub fn euclidean_gradient(
    u: &UnitaryTransform,
    spectrum: &Spectrum,
    channel: &ChannelSpec,
) -> Result<CMatrix> {
    check_size(u, spectrum)?;
    let problem = Problem::new(spectrum, channel)?;
    let (_, gb) = problem.evaluate(&problem.columns(u.matrix()), true)?;
    Ok(problem.pad(&gb))
}

/// First-order optimality check. The residual vanishes exactly when the
/// multipliers of the constrained problem exist.
pub fn stationarity_residual(
    u: &UnitaryTransform,
    spectrum: &Spectrum,
    channel: &ChannelSpec,
) -> Result<StationarityReport> {
    stationarity_with_tol(
        u,
        spectrum,
        channel,
        OptimizerConfig::default().tol_residual,
    )
}

pub fn stationarity_with_tol(
    u: &UnitaryTransform,
    spectrum: &Spectrum,
    channel: &ChannelSpec,
    tol: f64,
) -> Result<StationarityReport> {
    check_size(u, spectrum)?;
    let problem = Problem::new(spectrum, channel)?;
    let ub = problem.columns(u.matrix());
    let (objective, gb) = problem.evaluate(&ub, true)?;
    let residual = tangent(&ub, &gb).norm();
    Ok(StationarityReport {
        residual,
        objective,
        satisfied: residual <= tol,
    })
}

/// Riemannian gradient descent with Armijo backtracking. The first trial
/// step is `step_init`; later trial steps use the Barzilai-Borwein length
/// `⟨s,s⟩ / 2⟨s,y⟩` from the previous iterate, doubling the previous step
/// when the curvature estimate is not positive.
pub fn optimize(
    spectrum: &Spectrum,
    channel: &ChannelSpec,
    u_init: &UnitaryTransform,
    config: &OptimizerConfig,
) -> Result<OptimizeOutcome> {
    config.validate()?;
    check_size(u_init, spectrum)?;
    let problem = Problem::new(spectrum, channel)?;
    let tol_u = u_init.tolerance();

    let mut u = u_init.matrix().clone();
    let mut ub = problem.columns(&u);
    let (mut f, mut gb) = problem.evaluate(&ub, true)?;
    let mut trace = vec![f];
    let mut previous: Option<(CMatrix, CMatrix)> = None;
    let mut t = config.step_init;
    let mut steps = 0;
    let mut converged = false;
    let mut residual;

    loop {
        let r = tangent(&ub, &gb);
        residual = r.norm();
        if residual <= config.tol_residual {
            converged = true;
            break;
        }
        if steps >= config.max_steps {
            break;
        }
        if let Some((ub_prev, r_prev)) = &previous {
            let s = &ub - ub_prev;
            let y = &r - r_prev;
            let sy = inner(&s, &y);
            t = if sy > 0.0 {
                inner(&s, &s) / (2.0 * sy)
            } else {
                2.0 * t
            };
        }
        let decrease = 2.0 * residual * residual;
        let accepted = loop {
            let u_new = problem.retract(&u, &(&ub - r.scale(t)));
            let ub_new = problem.columns(&u_new);
            match problem.evaluate(&ub_new, false) {
                Ok((f_new, _)) if f_new <= f - config.armijo_c * t * decrease => {
                    break Some((u_new, ub_new, f_new));
                }
                _ => {}
            }
            t *= config.shrink;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((u_new, ub_new, f_new)) = accepted else {
            break;
        };
        previous = Some((ub, r));
        u = u_new;
        ub = ub_new;
        f = f_new;
        gb = problem.evaluate(&ub, true)?.1;
        trace.push(f);
        steps += 1;
    }

    Ok(OptimizeOutcome {
        transform: UnitaryTransform::with_tolerance(u, tol_u)?,
        trace,
        residual,
        converged,
        steps,
    })
}

/// Reference error-by-count vector of the three-point precoder.
pub const COUNTEREXAMPLE_E: [f64; 4] = [1.0, 65.0 / 24.0, 409.0 / 168.0, 61.0 / 84.0];
/// Reference decimal value of the size-two DFT entry.
pub const COUNTEREXAMPLE_E2_DFT: f64 = 2.434555;

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub e_u0: Vec<f64>,
    pub e_dft: Vec<f64>,
}

impl CounterexampleReport {
    pub fn lines(&self) -> Vec<String> {
        let names = ["e0", "e1", "e2", "e3"];
        let mut out = Vec::new();
        for m in 0..4 {
            out.push(format!(
                "{}: U0 = {:.12} (expected {:.12}), DFT = {:.12}",
                names[m], self.e_u0[m], COUNTEREXAMPLE_E[m], self.e_dft[m]
            ));
        }
        out.push(format!(
            "e2(U0) = {:.6} < e2(DFT) = {:.6} (reference {COUNTEREXAMPLE_E2_DFT})",
            self.e_u0[2], self.e_dft[2]
        ));
        out
    }
}

/// Recomputes the three-point counterexample with unit noise and checks the
/// reference values.
pub fn reproduce_counterexample() -> Result<CounterexampleReport> {
    reproduce_counterexample_with(&[1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0])
}

/// As [`reproduce_counterexample`] with the eigenvalues replaced. Anything
/// other than `(1/6, 2/6, 3/6)` should fail the check.
pub fn reproduce_counterexample_with(lambdas: &[f64]) -> Result<CounterexampleReport> {
    let spectrum = Spectrum::new(lambdas.to_vec())?;
    let e_of = |u: UnitaryTransform| -> Result<Vec<f64>> {
        Ok(crate::average::error_by_count(&SourceModel::new(u, spectrum.clone())?, 1.0)?.e)
    };
    let report = CounterexampleReport {
        e_u0: e_of(UnitaryTransform::counterexample())?,
        e_dft: e_of(crate::model::make_dft(3)?)?,
    };
    let mut problems = Vec::new();
    if report.e_u0.len() != 4 {
        problems.push(format!("expected N = 3, got N = {}", report.e_u0.len() - 1));
    } else {
        for (m, (&got, &want)) in report.e_u0.iter().zip(&COUNTEREXAMPLE_E).enumerate() {
            let rel = (got - want).abs() / want;
            if rel > 1e-12 {
                problems.push(format!(
                    "e{m}(U0) = {got:.15} expected {want:.15} (diff {:.3e})",
                    got - want
                ));
            }
        }
        let d = report.e_dft[2] - COUNTEREXAMPLE_E2_DFT;
        if d.abs() > 1e-5 {
            problems.push(format!(
                "e2(DFT) = {:.9} expected {COUNTEREXAMPLE_E2_DFT} (diff {d:.3e})",
                report.e_dft[2]
            ));
        }
        if report.e_u0[2] >= report.e_dft[2] {
            problems.push("e2(U0) is not below e2(DFT)".into());
        }
    }
    if problems.is_empty() {
        Ok(report)
    } else {
        Err(Error::ReproductionFailure(problems.join("\n")))
    }
}
