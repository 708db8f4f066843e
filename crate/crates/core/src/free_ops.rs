//! Dephasing-covariant operations: Kraus instruments on the lattice, covariance
//! checks against Δ_g, the translation/projection counterexample for the
//! Hilbert–Schmidt loss, and monotonicity verifiers.

use std::f64::consts::PI;
use std::ops::Range;

use faer::{c64, Mat, MatRef};

use crate::channels::DephasingKernel;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg;
use crate::measures::{c2_g, c_rel_g};
use crate::state::{DensityMatrix, WaveFunction};
use crate::tolerance::Tolerances;

/// Branch probabilities at or below this are treated as impossible outcomes.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct KrausInstrument {
    grid: Grid,
    branches: Vec<Mat<c64>>,
    labels: Vec<String>,
}

/// max |Σ K†K − 𝟙|
fn completeness_residual(n: usize, branches: &[Mat<c64>]) -> f64 {
    let mut sum = Mat::<c64>::zeros(n, n);
    for k in branches {
        sum += k.adjoint() * k;
    }
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((sum[(i, j)] - id).norm());
        }
    }
    worst
}

impl KrausInstrument {
    pub fn new(grid: Grid, branches: Vec<Mat<c64>>, labels: Vec<String>) -> Result<Self> {
        let n = grid.len();
        if branches.is_empty() || branches.len() != labels.len() {
            return Err(Error::InvalidInstrument(format!(
                "{} branches with {} labels",
                branches.len(),
                labels.len()
            )));
        }
        if let Some(bad) = branches.iter().find(|k| k.nrows() != n || k.ncols() != n) {
            return Err(Error::InvalidInstrument(format!(
                "branch is {}x{} on a {n}-point grid",
                bad.nrows(),
                bad.ncols()
            )));
        }
        let residual = completeness_residual(n, &branches);
        if residual > Tolerances::global().completeness {
            return Err(Error::InvalidInstrument(format!(
                "completeness residual {residual:e}"
            )));
        }
        Ok(Self {
            grid,
            branches,
            labels,
        })
    }

    pub fn identity(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            branches: vec![Mat::identity(n, n)],
            labels: vec!["identity".into()],
        }
    }

    /// Single-branch channel ρ ↦ UρU†.
    pub fn unitary(grid: Grid, u: Mat<c64>, label: &str) -> Result<Self> {
        Self::new(grid, vec![u], vec![label.into()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn branches(&self) -> &[Mat<c64>] {
        &self.branches
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(self.grid.len(), &self.branches)
    }
}

/// Anything that acts on lattice operators branch by branch.
pub trait QuantumOperation {
    fn grid(&self) -> &Grid;
    fn branch_count(&self) -> usize;
    /// Unnormalized branch output Λ_k(M).
    fn apply_branch(&self, k: usize, m: MatRef<'_, c64>) -> Mat<c64>;

    /// Σ_k Λ_k(M), summed in branch order.
    fn apply_matrix(&self, m: MatRef<'_, c64>) -> Mat<c64> {
        let mut out = self.apply_branch(0, m);
        for k in 1..self.branch_count() {
            out += self.apply_branch(k, m);
        }
        out
    }
}

impl QuantumOperation for KrausInstrument {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn apply_branch(&self, k: usize, m: MatRef<'_, c64>) -> Mat<c64> {
        linalg::conjugate(self.branches[k].as_ref(), m)
    }
}

impl QuantumOperation for DephasingKernel {
    fn grid(&self) -> &Grid {
        DephasingKernel::grid(self)
    }

    fn branch_count(&self) -> usize {
        1
    }

    fn apply_branch(&self, _k: usize, m: MatRef<'_, c64>) -> Mat<c64> {
        self.mask(m)
    }
}

#[derive(Clone, Debug)]
pub struct InstrumentOutcome {
    pub probabilities: Vec<f64>,
    /// Normalized post-measurement states; `None` for outcomes with p_k ≤ 1e−12.
    pub post_states: Vec<Option<DensityMatrix>>,
    pub unconditional: DensityMatrix,
}

fn check_operation_grid(rho: &DensityMatrix, op: &dyn QuantumOperation) -> Result<()> {
    if rho.grid()? != op.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn outcome_of(rho: &DensityMatrix, op: &dyn QuantumOperation) -> Result<InstrumentOutcome> {
    check_operation_grid(rho, op)?;
    let grid = *op.grid();
    let n = grid.len();
    let mut unconditional = Mat::<c64>::zeros(n, n);
    let mut probabilities = Vec::with_capacity(op.branch_count());
    let mut post_states = Vec::with_capacity(op.branch_count());
    for k in 0..op.branch_count() {
        let out = op.apply_branch(k, rho.entries());
        let p = linalg::trace(out.as_ref()).re;
        unconditional += &out;
        post_states.push(if p > PROBABILITY_FLOOR {
            let scale = 1.0 / p;
            Some(DensityMatrix::from_parts(
                vec![grid],
                Mat::from_fn(n, n, |i, j| out[(i, j)] * scale),
            ))
        } else {
            None
        });
        probabilities.push(p);
    }
    Ok(InstrumentOutcome {
        probabilities,
        post_states,
        unconditional: DensityMatrix::from_parts(vec![grid], unconditional),
    })
}

/// Branch probabilities Tr(K_kρK_k†), normalized branch states and Σ K_kρK_k†.
pub fn apply_instrument(rho: &DensityMatrix, instrument: &KrausInstrument) -> Result<InstrumentOutcome> {
    outcome_of(rho, instrument)
}

/// Lattice translation by `shift_steps` sites, with the sites it pushes off
/// the grid listed (their rows are zero).
#[derive(Clone, Debug)]
pub struct Translation {
    pub operator: Mat<c64>,
    pub dropped_sites: Vec<usize>,
}

pub fn translation_operator(grid: Grid, shift_steps: isize) -> Result<Translation> {
    let n = grid.len();
    if shift_steps.unsigned_abs() >= n {
        return Err(Error::ShiftTooLarge {
            steps: shift_steps,
            n_points: n,
        });
    }
    let mut operator = Mat::<c64>::zeros(n, n);
    let mut dropped_sites = Vec::new();
    for i in 0..n {
        let target = i as isize + shift_steps;
        if (0..n as isize).contains(&target) {
            operator[(target as usize, i)] = c64::new(1.0, 0.0);
        } else {
            dropped_sites.push(i);
        }
    }
    Ok(Translation {
        operator,
        dropped_sites,
    })
}

/// Diagonal 0/1 projector onto the lattice sites in the closed interval.
pub fn projection_operator(grid: Grid, lo: f64, hi: f64) -> Result<Mat<c64>> {
    let sites = grid.sites_in(lo, hi);
    if sites.is_empty() {
        return Err(Error::EmptyInterval { lo, hi });
    }
    Ok(site_projector(grid.len(), |i| sites.contains(&i)))
}

fn site_projector(n: usize, keep: impl Fn(usize) -> bool) -> Mat<c64> {
    Mat::from_fn(n, n, |i, j| {
        if i == j && keep(i) {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// CPTP translation: the shift plus a projector onto the sites it would push
/// off the grid, so no weight is lost at the boundary.
pub fn translation_channel(grid: Grid, shift_steps: isize) -> Result<KrausInstrument> {
    let t = translation_operator(grid, shift_steps)?;
    let mut branches = vec![t.operator];
    let mut labels = vec![format!("shift {shift_steps}")];
    if !t.dropped_sites.is_empty() {
        branches.push(site_projector(grid.len(), |i| t.dropped_sites.contains(&i)));
        labels.push("boundary".into());
    }
    KrausInstrument::new(grid, branches, labels)
}

/// diag(exp(iαx²)): a position-dependent phase, which commutes with every dephasing map.
pub fn position_quadratic_phase(grid: Grid, alpha: f64) -> Mat<c64> {
    let n = grid.len();
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            c64::cis(alpha * grid.point(i).powi(2))
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// exp(−iαk²) in the discrete Fourier basis of the lattice (free evolution
/// when α = ℏt/2m). Circulant and exactly unitary.
pub fn momentum_quadratic_phase(grid: Grid, alpha: f64) -> Mat<c64> {
    let n = grid.len();
    let dk = 2.0 * PI / (n as f64 * grid.dx());
    let half = n as isize / 2;
    // symmetric momentum set m = −⌊n/2⌋ .. n − 1 − ⌊n/2⌋
    let column: Vec<c64> = (0..n)
        .map(|offset| {
            (0..n as isize)
                .map(|m| {
                    let k = (m - half) as f64 * dk;
                    c64::cis(-alpha * k * k + k * offset as f64 * grid.dx())
                })
                .sum::<c64>()
                / n as f64
        })
        .collect();
    Mat::from_fn(n, n, |i, j| column[(i + n - j) % n])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceMode {
    /// Each K_k(·)K_k† separately.
    Branchwise,
    /// Σ_k K_k(·)K_k†
    Unconditional,
}

/// max over test states of ‖Λ(Δ_g ρ) − Δ_g(Λ ρ)‖_F.
pub fn check_dephasing_covariance(
    op: &dyn QuantumOperation,
    kernel: &DephasingKernel,
    states: &[DensityMatrix],
    mode: CovarianceMode,
) -> Result<f64> {
    if op.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let mut worst = 0.0f64;
    for rho in states {
        check_operation_grid(rho, op)?;
        let dephased = kernel.mask(rho.entries());
        match mode {
            CovarianceMode::Unconditional => {
                let a = op.apply_matrix(dephased.as_ref());
                let b = kernel.mask(op.apply_matrix(rho.entries()).as_ref());
                worst = worst.max(linalg::frobenius_distance(a.as_ref(), b.as_ref()));
            }
            CovarianceMode::Branchwise => {
                for k in 0..op.branch_count() {
                    let a = op.apply_branch(k, dephased.as_ref());
                    let b = kernel.mask(op.apply_branch(k, rho.entries()).as_ref());
                    worst = worst.max(linalg::frobenius_distance(a.as_ref(), b.as_ref()));
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrelMonotonicity {
    pub before: f64,
    pub after: f64,
    pub holds: bool,
    pub covariance_defect: f64,
    /// Covariance defect within the gate; outside it `holds` carries no guarantee.
    pub within_dio: bool,
}

/// C_rel^g(ρ) against C_rel^g(Λρ).
pub fn verify_crel_monotonicity(
    rho: &DensityMatrix,
    op: &dyn QuantumOperation,
    kernel: &DephasingKernel,
) -> Result<CrelMonotonicity> {
    let tol = Tolerances::global();
    let covariance_defect = check_dephasing_covariance(
        op,
        kernel,
        std::slice::from_ref(rho),
        CovarianceMode::Unconditional,
    )?;
    let out = outcome_of(rho, op)?.unconditional;
    let before = c_rel_g(rho, kernel)?.value;
    let after = c_rel_g(&out, kernel)?.value;
    Ok(CrelMonotonicity {
        before,
        after,
        holds: after <= before + tol.monotonicity_slack,
        covariance_defect,
        within_dio: covariance_defect <= tol.covariance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    Crel,
    C2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongMonotonicity {
    /// Σ_k p_k C(ρ_k)
    pub lhs: f64,
    /// C(ρ)
    pub rhs: f64,
    pub holds: bool,
}

pub fn verify_strong_monotonicity(
    rho: &DensityMatrix,
    op: &dyn QuantumOperation,
    kernel: &DephasingKernel,
    measure: Measure,
) -> Result<StrongMonotonicity> {
    let value = |r: &DensityMatrix| -> Result<f64> {
        Ok(match measure {
            Measure::Crel => c_rel_g(r, kernel)?.value,
            Measure::C2 => c2_g(r, kernel)?.value,
        })
    };
    let outcome = outcome_of(rho, op)?;
    let mut lhs = 0.0;
    for (p, state) in outcome.probabilities.iter().zip(&outcome.post_states) {
        if let Some(state) = state {
            lhs += p * value(state)?;
        }
    }
    let rhs = value(rho)?;
    Ok(StrongMonotonicity {
        lhs,
        rhs,
        holds: lhs <= rhs + Tolerances::global().monotonicity_slack,
    })
}

fn disjoint_sites(a: &Range<usize>, b: &Range<usize>) -> bool {
    a.end <= b.start || b.end <= a.start
}

/// Three-branch instrument {V_{−a}P_A, V_{−b}P_B, P_{(A∪B)ᶜ}} with
/// C = [−w/2, w/2], A = C + a and B = C + b.
pub fn build_counterexample_instrument(
    grid: Grid,
    support_width: f64,
    a: f64,
    b: f64,
) -> Result<KrausInstrument> {
    if !(support_width > 0.0) {
        return Err(Error::NonPositiveScale {
            name: "support_width",
            value: support_width,
        });
    }
    let steps_a = grid.steps_for("a", a)?;
    let steps_b = grid.steps_for("b", b)?;
    let half = 0.5 * support_width;
    let inside = |lo: f64, hi: f64| lo >= grid.x_min() - 1e-9 * grid.dx() && hi <= grid.x_max() + 1e-9 * grid.dx();
    for (lo, hi) in [(-half, half), (a - half, a + half), (b - half, b + half)] {
        if !inside(lo, hi) {
            return Err(Error::InvalidRange(format!(
                "interval [{lo}, {hi}] leaves the grid [{}, {}]",
                grid.x_min(),
                grid.x_max()
            )));
        }
    }
    let sites_a = grid.sites_in(a - half, a + half);
    let sites_b = grid.sites_in(b - half, b + half);
    if !disjoint_sites(&sites_a, &sites_b) {
        let shared = sites_a.end.min(sites_b.end) - sites_a.start.max(sites_b.start);
        return Err(Error::Overlap(shared as f64 * grid.dx()));
    }
    let n = grid.len();
    let branch = |steps: isize, sites: &Range<usize>| -> Result<Mat<c64>> {
        let v = translation_operator(grid, -steps)?.operator;
        Ok(v * site_projector(n, |i| sites.contains(&i)))
    };
    let k_a = branch(steps_a, &sites_a)?;
    let k_b = branch(steps_b, &sites_b)?;
    let k_0 = site_projector(n, |i| !sites_a.contains(&i) && !sites_b.contains(&i));
    KrausInstrument::new(
        grid,
        vec![k_a, k_b, k_0],
        vec!["A".into(), "B".into(), "rest".into()],
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C2Violation {
    /// C₂ of the pure seed |φ⟩⟨φ|.
    pub c2_phi: f64,
    pub c2_in: f64,
    pub c2_out: f64,
    /// c2_out / c2_in; NaN when degenerate.
    pub ratio: f64,
    /// The kernel removes nothing from φ (c2_in = 0).
    pub degenerate: bool,
}

/// ψ shifted by whole lattice steps; fails if any amplitude would leave the grid.
pub fn translate_wavefunction(psi: &WaveFunction, steps: isize) -> Result<WaveFunction> {
    let n = psi.grid().len();
    let support = psi.support();
    let lo = support.start as isize + steps;
    let hi = support.end as isize - 1 + steps;
    if lo < 0 || hi >= n as isize {
        return Err(Error::InvalidRange(format!(
            "shift by {steps} sites pushes the support off the grid"
        )));
    }
    let amps = psi.amplitudes();
    let shifted = (0..n)
        .map(|i| {
            let src = i as isize - steps;
            if (0..n as isize).contains(&src) {
                amps[src as usize]
            } else {
                c64::new(0.0, 0.0)
            }
        })
        .collect();
    WaveFunction::new(*psi.grid(), shifted)
}

/// Half-half mixture of φ shifted by a and by b, the input of the counterexample.
pub fn counterexample_input(phi: &WaveFunction, a: f64, b: f64) -> Result<DensityMatrix> {
    let grid = *phi.grid();
    let phi_a = translate_wavefunction(phi, grid.steps_for("a", a)?)?;
    let phi_b = translate_wavefunction(phi, grid.steps_for("b", b)?)?;
    let overlap = phi_a.inner(&phi_b)?.norm();
    if overlap >= Tolerances::global().disjointness {
        return Err(Error::Overlap(overlap));
    }
    DensityMatrix::mix(
        &[DensityMatrix::pure(&phi_a), DensityMatrix::pure(&phi_b)],
        &[0.5, 0.5],
    )
}

/// Smallest symmetric support width w with supp φ ⊂ [−w/2, w/2].
pub fn symmetric_support_width(phi: &WaveFunction) -> f64 {
    let grid = phi.grid();
    let s = phi.support();
    if s.is_empty() {
        return 0.0;
    }
    2.0 * grid.point(s.start).abs().max(grid.point(s.end - 1).abs())
}

/// Runs the translation/projection counterexample for seed φ: the instrument
/// maps the disjoint mixture back onto |φ⟩⟨φ| and doubles the C₂ loss.
pub fn verify_c2_monotonicity_violation(
    phi: &WaveFunction,
    a: f64,
    b: f64,
    kernel: &DephasingKernel,
) -> Result<C2Violation> {
    let grid = *phi.grid();
    let input = counterexample_input(phi, a, b)?;
    let width = symmetric_support_width(phi);
    let instrument = build_counterexample_instrument(grid, width.max(grid.dx()), a, b)?;
    let output = apply_instrument(&input, &instrument)?.unconditional;
    let c2_phi = c2_g(&DensityMatrix::pure(phi), kernel)?.value;
    let c2_in = c2_g(&input, kernel)?.value;
    let c2_out = c2_g(&output, kernel)?.value;
    let degenerate = c2_in <= 0.0;
    Ok(C2Violation {
        c2_phi,
        c2_in,
        c2_out,
        ratio: if degenerate { f64::NAN } else { c2_out / c2_in },
        degenerate,
    })
}
