//! Manufactured-solution test problems on the unit square.
//!
//! Forcing terms are stored in closed form. Each was obtained from
//! f = u_t − (1 + ‖∇u‖²) Δu with ‖∇u(t)‖² integrated analytically.

use std::f64::consts::PI;

pub type SpaceFn = fn(f64, f64) -> f64;
pub type SpaceTimeFn = fn(f64, f64, f64) -> f64;
pub type GradFn = fn(f64, f64, f64) -> [f64; 2];

#[derive(Debug, Clone, Copy)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub u0: SpaceFn,
    pub f: SpaceTimeFn,
    pub exact_u: Option<SpaceTimeFn>,
    pub exact_grad: Option<GradFn>,
    /// Closed-form ‖∇u(t)‖².
    pub grad_energy: Option<fn(f64) -> f64>,
}

impl ProblemSpec {
    pub fn has_exact(&self) -> bool {
        self.exact_u.is_some() && self.exact_grad.is_some()
    }
}

pub const NAMES: [&str; 3] = ["ex1", "ex2", "ex3"];

pub fn by_name(name: &str) -> Option<ProblemSpec> {
    match name {
        "ex1" => Some(example1()),
        "ex2" => Some(example2()),
        "ex3" => Some(example3()),
        _ => None,
    }
}

/// u = x(1−x) y(1−y) e^{−t}
pub fn example1() -> ProblemSpec {
    ProblemSpec {
        name: "ex1",
        u0: |x, y| ex1_u(x, y, 0.0),
        f: ex1_f,
        exact_u: Some(ex1_u),
        exact_grad: Some(ex1_grad),
        grad_energy: Some(ex1_energy),
    }
}

fn ex1_u(x: f64, y: f64, t: f64) -> f64 {
    x * (1.0 - x) * y * (1.0 - y) * (-t).exp()
}

fn ex1_grad(x: f64, y: f64, t: f64) -> [f64; 2] {
    let e = (-t).exp();
    [(1.0 - 2.0 * x) * y * (1.0 - y) * e, x * (1.0 - x) * (1.0 - 2.0 * y) * e]
}

fn ex1_energy(t: f64) -> f64 {
    (-2.0 * t).exp() / 45.0
}

fn ex1_f(x: f64, y: f64, t: f64) -> f64 {
    let e = (-t).exp();
    let (px, py) = (x * (1.0 - x), y * (1.0 - y));
    -px * py * e + (1.0 + ex1_energy(t)) * 2.0 * e * (px + py)
}

/// u = t sin(πx) sin(πy)
pub fn example2() -> ProblemSpec {
    ProblemSpec {
        name: "ex2",
        u0: |x, y| ex2_u(x, y, 0.0),
        f: ex2_f,
        exact_u: Some(ex2_u),
        exact_grad: Some(ex2_grad),
        grad_energy: Some(ex2_energy),
    }
}

fn ex2_u(x: f64, y: f64, t: f64) -> f64 {
    t * (PI * x).sin() * (PI * y).sin()
}

fn ex2_grad(x: f64, y: f64, t: f64) -> [f64; 2] {
    [t * PI * (PI * x).cos() * (PI * y).sin(), t * PI * (PI * x).sin() * (PI * y).cos()]
}

fn ex2_energy(t: f64) -> f64 {
    t * t * PI * PI / 2.0
}

fn ex2_f(x: f64, y: f64, t: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin() * (1.0 + 2.0 * PI * PI * t * (1.0 + ex2_energy(t)))
}

/// Unforced decay from u0 = x(1−x) y(1−y) sin(x+y); no closed-form solution.
pub fn example3() -> ProblemSpec {
    ProblemSpec {
        name: "ex3",
        u0: |x, y| x * (1.0 - x) * y * (1.0 - y) * (x + y).sin(),
        f: zero_forcing,
        exact_u: None,
        exact_grad: None,
        grad_energy: None,
    }
}

pub fn zero_forcing(_x: f64, _y: f64, _t: f64) -> f64 {
    0.0
}
