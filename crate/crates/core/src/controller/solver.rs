//! Multiple-shooting SQP for the tracking problem.
//!
//! Decision vector `W = [u₀ … u_{N−1}, x₀ … x_N]`, equality constraints
//! `x̄₀ − x₀ = 0` and `F(xᵢ, uᵢ) − xᵢ₊₁ = 0` (RK4 step `F`), box bounds on the controls.
//! Each iteration linearizes the constraints exactly, uses the objective Hessian
//! (Gauss–Newton), condenses the states out of the QP subproblem, solves the resulting
//! box-constrained QP by a primal active-set method, and globalizes with an ℓ₁ merit
//! line search. The predicted states stay decision variables throughout, so iterates
//! may carry nonzero defects until convergence.

use serde::{Deserialize, Serialize};

use super::config::MpcConfig;
use super::cost::{Layout, Objective, ProfileLabel, WeightProfile};
use super::linalg::{cholesky_solve_sub, DenseMatrix};
use super::model::{rk4_step, rk4_step_with_jacobians, Control, State};
use super::ControlError;
use crate::planner::align_yaw;
use crate::scalar::Real;

/// One receding-horizon tracking problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcProblem<T> {
    /// Measured state the prediction starts from.
    pub x0: State<T>,
    /// `N + 1` reference states.
    pub ref_states: Vec<State<T>>,
    /// `N` reference controls.
    pub ref_controls: Vec<Control<T>>,
    pub profile: WeightProfile<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSolution<T> {
    pub states: Vec<State<T>>,
    pub controls: Vec<Control<T>>,
    pub cost: T,
    pub iterations: usize,
    pub converged: bool,
    /// `maxᵢ ‖F(xᵢ, uᵢ) − xᵢ₊₁‖∞`.
    pub defect_norm: T,
    /// Projected KKT stationarity residual at the returned iterate.
    pub stationarity: T,
}

impl<T: Real> MpcSolution<T> {
    pub fn first_control(&self) -> Control<T> {
        self.controls[0]
    }
}

struct Linearization<T> {
    /// `c₀ = x̄₀ − x₀`, `cᵢ₊₁ = F(xᵢ, uᵢ) − xᵢ₊₁`.
    residuals: Vec<[T; 3]>,
    a: Vec<[[T; 3]; 3]>,
    b: Vec<[[T; 2]; 3]>,
}

fn residuals<T: Real>(x0: &State<T>, controls: &[Control<T>], states: &[State<T>], h: T) -> Vec<[T; 3]> {
    let mut c = Vec::with_capacity(states.len());
    c.push([x0.x - states[0].x, x0.y - states[0].y, x0.yaw - states[0].yaw]);
    for (i, u) in controls.iter().enumerate() {
        let f = rk4_step(&states[i], u, h);
        let n = states[i + 1];
        c.push([f.x - n.x, f.y - n.y, f.yaw - n.yaw]);
    }
    c
}

fn linearize<T: Real>(x0: &State<T>, controls: &[Control<T>], states: &[State<T>], h: T) -> Linearization<T> {
    let mut residuals = Vec::with_capacity(states.len());
    let mut a = Vec::with_capacity(controls.len());
    let mut b = Vec::with_capacity(controls.len());
    residuals.push([x0.x - states[0].x, x0.y - states[0].y, x0.yaw - states[0].yaw]);
    for (i, u) in controls.iter().enumerate() {
        let (f, (jx, ju)) = rk4_step_with_jacobians(&states[i], u, h);
        let n = states[i + 1];
        residuals.push([f.x - n.x, f.y - n.y, f.yaw - n.yaw]);
        a.push(jx);
        b.push(ju);
    }
    Linearization { residuals, a, b }
}

fn inf_norm3<T: Real>(v: &[T; 3]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn l1_total<T: Real>(c: &[[T; 3]]) -> T {
    c.iter().flatten().fold(T::zero(), |acc, x| acc + x.abs())
}

/// Minimizes `½dᵀHd + gᵀd` over `lo ≤ d ≤ hi` by a primal active-set method started at
/// the projection of zero.
fn box_qp<T: Real>(h: &DenseMatrix<T>, g: &[T], lo: &[T], hi: &[T]) -> Option<Vec<T>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Bound {
        Free,
        Lower,
        Upper,
    }
    let n = g.len();
    let mut d: Vec<T> = (0..n).map(|j| T::zero().max(lo[j]).min(hi[j])).collect();
    let mut state: Vec<Bound> = (0..n)
        .map(|j| {
            if lo[j] >= hi[j] || d[j] == lo[j] && lo[j] == T::zero() && g[j] > T::zero() {
                Bound::Lower
            } else if d[j] == hi[j] && hi[j] == T::zero() && g[j] < T::zero() {
                Bound::Upper
            } else {
                Bound::Free
            }
        })
        .collect();

    for _ in 0..(10 * n + 20) {
        let grad: Vec<T> = h
            .mul_vec(&d)
            .into_iter()
            .zip(g)
            .map(|(a, b)| a + *b)
            .collect();
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == Bound::Free).collect();
        let rhs: Vec<T> = free.iter().map(|&j| -grad[j]).collect();
        let step = cholesky_solve_sub(h, &free, &rhs)?;

        let mut alpha = T::one();
        let mut blocking = None;
        for (k, &j) in free.iter().enumerate() {
            let p = step[k];
            if p < T::zero() {
                let ratio = (lo[j] - d[j]) / p;
                if ratio < alpha {
                    alpha = ratio.max(T::zero());
                    blocking = Some((j, Bound::Lower));
                }
            } else if p > T::zero() {
                let ratio = (hi[j] - d[j]) / p;
                if ratio < alpha {
                    alpha = ratio.max(T::zero());
                    blocking = Some((j, Bound::Upper));
                }
            }
        }
        for (k, &j) in free.iter().enumerate() {
            d[j] = d[j] + alpha * step[k];
        }
        if let Some((j, side)) = blocking {
            d[j] = if side == Bound::Lower { lo[j] } else { hi[j] };
            state[j] = side;
            continue;
        }

        // Subspace minimizer reached; release the bound with the worst multiplier sign.
        let grad: Vec<T> = h
            .mul_vec(&d)
            .into_iter()
            .zip(g)
            .map(|(a, b)| a + *b)
            .collect();
        let mut worst: Option<(usize, T)> = None;
        for j in 0..n {
            if lo[j] >= hi[j] {
                continue;
            }
            let violation = match state[j] {
                Bound::Lower => -grad[j],
                Bound::Upper => grad[j],
                Bound::Free => T::zero(),
            };
            if violation > T::zero() && worst.map_or(true, |(_, v)| violation > v) {
                worst = Some((j, violation));
            }
        }
        match worst {
            Some((j, _)) => state[j] = Bound::Free,
            None => return Some(d),
        }
    }
    Some(d)
}

/// Aligns reference headings into one continuous sequence starting near `x0.yaw`.
fn aligned_references<T: Real>(x0: &State<T>, refs: &[State<T>]) -> Vec<State<T>> {
    let mut out = Vec::with_capacity(refs.len());
    let mut prev = x0.yaw;
    for r in refs {
        let yaw = align_yaw(prev, r.yaw);
        out.push(State::new(r.x, r.y, yaw));
        prev = yaw;
    }
    out
}

fn initial_guess<T: Real>(
    problem: &MpcProblem<T>,
    aligned: &[State<T>],
    config: &MpcConfig<T>,
    warm_start: Option<&MpcSolution<T>>,
) -> (Vec<Control<T>>, Vec<State<T>>) {
    let n = config.horizon;
    let (mut controls, mut states) = match warm_start {
        Some(w) => {
            let controls: Vec<_> = (0..n).map(|i| w.controls[(i + 1).min(n - 1)]).collect();
            let mut states: Vec<_> = (0..=n).map(|i| w.states[(i + 1).min(n)]).collect();
            let turns = ((problem.x0.yaw - states[0].yaw) / T::two_pi()).round();
            let shift = turns * T::two_pi();
            for s in &mut states {
                s.yaw = s.yaw + shift;
            }
            (controls, states)
        }
        None => (problem.ref_controls.clone(), aligned.to_vec()),
    };
    for u in &mut controls {
        let (v, w) = config.clamp_control(u.v, u.omega);
        *u = Control::new(v, w);
    }
    states[0] = problem.x0;
    (controls, states)
}

fn check_dimensions<T: Real>(
    problem: &MpcProblem<T>,
    config: &MpcConfig<T>,
    warm_start: Option<&MpcSolution<T>>,
) -> Result<(), ControlError> {
    let n = config.horizon;
    if problem.ref_states.len() != n + 1 || problem.ref_controls.len() != n {
        return Err(ControlError::Dimension(format!(
            "horizon {n} needs {} reference states and {n} reference controls, got {} and {}",
            n + 1,
            problem.ref_states.len(),
            problem.ref_controls.len()
        )));
    }
    if let Some(w) = warm_start {
        if w.states.len() != n + 1 || w.controls.len() != n {
            return Err(ControlError::Dimension(format!(
                "warm start has {} states and {} controls for horizon {n}",
                w.states.len(),
                w.controls.len()
            )));
        }
    }
    if !problem.x0.is_finite() {
        return Err(ControlError::Dimension("initial state is not finite".into()));
    }
    Ok(())
}

/// Solves one tracking problem. A non-converged solve still returns its best iterate
/// with `converged = false`.
pub fn solve_mpc<T: Real>(
    problem: &MpcProblem<T>,
    config: &MpcConfig<T>,
    warm_start: Option<&MpcSolution<T>>,
) -> Result<MpcSolution<T>, ControlError> {
    config.validate()?;
    check_dimensions(problem, config, warm_start)?;

    let n = config.horizon;
    let h = config.step;
    let layout = Layout { horizon: n };
    let settings = &config.solver;
    let aligned = aligned_references(&problem.x0, &problem.ref_states);
    let objective = Objective {
        ref_states: &aligned,
        ref_controls: &problem.ref_controls,
        profile: &problem.profile,
        bounds: config.state_bounds.as_ref(),
    };
    let (mut controls, mut states) = initial_guess(problem, &aligned, config, warm_start);

    let mut rho = settings.penalty_init;
    let mut iterations = 0;
    let mut converged = false;
    let mut stationarity;
    let nu = 2 * n;
    let sufficient = T::lit(1e-4);

    loop {
        let lin = linearize(&problem.x0, &controls, &states, h);
        let grad = objective.gradient(&controls, &states);
        let hdiag = objective.hessian_diagonal(&states);

        // Condensing: d_xᵢ = sᵢ + Sᵢ d_u.
        let mut s = vec![[T::zero(); 3]; n + 1];
        let mut sens = vec![vec![[T::zero(); 3]; nu]; n + 1];
        s[0] = lin.residuals[0];
        for i in 0..n {
            let a = &lin.a[i];
            for r in 0..3 {
                s[i + 1][r] = lin.residuals[i + 1][r]
                    + (0..3).fold(T::zero(), |acc, k| acc + a[r][k] * s[i][k]);
            }
            for col in 0..2 * i {
                for r in 0..3 {
                    sens[i + 1][col][r] =
                        (0..3).fold(T::zero(), |acc, k| acc + a[r][k] * sens[i][col][k]);
                }
            }
            for c in 0..2 {
                for r in 0..3 {
                    sens[i + 1][2 * i + c][r] = lin.b[i][r][c];
                }
            }
        }
        let mut hc = DenseMatrix::zeros(nu);
        let mut gc: Vec<T> = (0..nu).map(|j| grad[j]).collect();
        for j in 0..nu {
            hc.add(j, j, hdiag[j]);
        }
        for i in 0..=n {
            let base = layout.state(i);
            // Stage i depends only on controls before it.
            let cols = 2 * i;
            for r in 0..3 {
                let w = hdiag[base + r];
                let lin_term = w * s[i][r] + grad[base + r];
                for a in 0..cols {
                    let sa = sens[i][a][r];
                    if sa == T::zero() {
                        continue;
                    }
                    gc[a] = gc[a] + sa * lin_term;
                    if w == T::zero() {
                        continue;
                    }
                    for b in 0..cols {
                        hc.add(a, b, w * sa * sens[i][b][r]);
                    }
                }
            }
        }
        let lo: Vec<T> = (0..nu)
            .map(|j| {
                let (u, bound) = if j % 2 == 0 {
                    (controls[j / 2].v, config.v_min)
                } else {
                    (controls[j / 2].omega, -config.omega_max)
                };
                (bound - u).min(T::zero())
            })
            .collect();
        let hi: Vec<T> = (0..nu)
            .map(|j| {
                let (u, bound) = if j % 2 == 0 {
                    (controls[j / 2].v, config.v_max)
                } else {
                    (controls[j / 2].omega, config.omega_max)
                };
                (bound - u).max(T::zero())
            })
            .collect();
        let Some(du) = box_qp(&hc, &gc, &lo, &hi) else {
            return Err(ControlError::Numerical("condensed QP Hessian is not positive definite".into()));
        };
        let mut dx = s.clone();
        for i in 0..=n {
            for r in 0..3 {
                for a in 0..2 * i {
                    dx[i][r] = dx[i][r] + sens[i][a][r] * du[a];
                }
            }
        }

        // Equality multipliers from the state rows of the QP optimality conditions.
        let mut lambda = vec![[T::zero(); 3]; n + 1];
        for i in (0..=n).rev() {
            let base = layout.state(i);
            for r in 0..3 {
                let mut v = hdiag[base + r] * dx[i][r] + grad[base + r];
                if i < n {
                    v = v + (0..3).fold(T::zero(), |acc, k| acc + lin.a[i][k][r] * lambda[i + 1][k]);
                }
                lambda[i][r] = v;
            }
        }

        // KKT residual at the current iterate with these multipliers.
        let mut station = T::zero();
        for i in 0..=n {
            let base = layout.state(i);
            for r in 0..3 {
                let mut v = grad[base + r] - lambda[i][r];
                if i < n {
                    v = v + (0..3).fold(T::zero(), |acc, k| acc + lin.a[i][k][r] * lambda[i + 1][k]);
                }
                station = station.max(v.abs());
            }
        }
        let tiny = T::lit(1e-12);
        for i in 0..n {
            for c in 0..2 {
                let j = 2 * i + c;
                let r = grad[j]
                    + (0..3).fold(T::zero(), |acc, k| acc + lin.b[i][k][c] * lambda[i + 1][k]);
                let (u, lo_b, hi_b) = if c == 0 {
                    (controls[i].v, config.v_min, config.v_max)
                } else {
                    (controls[i].omega, -config.omega_max, config.omega_max)
                };
                let v = if u <= lo_b + tiny {
                    (-r).max(T::zero())
                } else if u >= hi_b - tiny {
                    r.max(T::zero())
                } else {
                    r.abs()
                };
                station = station.max(v);
            }
        }
        stationarity = station;
        let feasibility = lin.residuals.iter().fold(T::zero(), |m, c| m.max(inf_norm3(c)));
        if feasibility <= settings.constraint_tol && stationarity <= settings.stationarity_tol {
            converged = true;
            break;
        }
        if iterations >= settings.max_iterations {
            break;
        }
        iterations += 1;

        // ℓ₁ merit line search.
        let lambda_max = lambda.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
        if rho < lambda_max + settings.penalty_margin {
            rho = lambda_max + settings.penalty_margin + rho;
        }
        let w = layout.pack(&controls, &states);
        let mut d = vec![T::zero(); layout.len()];
        d[..nu].copy_from_slice(&du);
        for i in 0..=n {
            let base = layout.state(i);
            d[base..base + 3].copy_from_slice(&dx[i]);
        }
        let f0 = objective.value(&controls, &states);
        let c_norm = l1_total(&lin.residuals);
        let merit0 = f0 + rho * c_norm;
        let slope = grad.iter().zip(&d).fold(T::zero(), |acc, (g, di)| acc + *g * *di) - rho * c_norm;
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..=settings.max_backtracks {
            let trial: Vec<T> = w.iter().zip(&d).map(|(a, b)| *a + alpha * *b).collect();
            let (tc, ts) = layout.unpack(&trial);
            let merit = objective.value(&tc, &ts) + rho * l1_total(&residuals(&problem.x0, &tc, &ts, h));
            if merit <= merit0 + sufficient * alpha * slope.min(T::zero()) {
                controls = tc;
                states = ts;
                accepted = true;
                break;
            }
            alpha = alpha / T::two();
        }
        if !accepted {
            break;
        }
        // Keep controls inside the box despite rounding in the step.
        for u in &mut controls {
            let (v, om) = config.clamp_control(u.v, u.omega);
            *u = Control::new(v, om);
        }
    }

    let final_res = residuals(&problem.x0, &controls, &states, h);
    let defect_norm = final_res[1..].iter().fold(T::zero(), |m, c| m.max(inf_norm3(c)));
    let cost = objective.value(&controls, &states);
    Ok(MpcSolution {
        states,
        controls,
        cost,
        iterations,
        converged,
        defect_norm,
        stationarity,
    })
}

/// Stateful receding-horizon controller carrying the warm start between solves.
#[derive(Debug, Clone)]
pub struct MpcController<T> {
    config: MpcConfig<T>,
    warm: Option<MpcSolution<T>>,
    label: Option<ProfileLabel>,
}

impl<T: Real> MpcController<T> {
    pub fn new(config: MpcConfig<T>) -> Result<Self, ControlError> {
        config.validate()?;
        Ok(Self {
            config,
            warm: None,
            label: None,
        })
    }

    pub fn config(&self) -> &MpcConfig<T> {
        &self.config
    }

    /// Drops the warm start, e.g. after the reference path is replaced.
    pub fn reset(&mut self) {
        self.warm = None;
    }

    /// Solves `problem`, warm-starting from the previous solution unless the weight
    /// profile changed since the last call.
    pub fn solve(&mut self, problem: &MpcProblem<T>) -> Result<MpcSolution<T>, ControlError> {
        if self.label != Some(problem.profile.label) {
            self.warm = None;
            self.label = Some(problem.profile.label);
        }
        let solution = solve_mpc(problem, &self.config, self.warm.as_ref())?;
        self.warm = Some(solution.clone());
        Ok(solution)
    }
}
