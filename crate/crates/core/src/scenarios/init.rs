use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::EnsembleState;
use crate::error::{Error, Result};

/// Particles in the group of the group-vs-individual experiment.
pub const GROUP_SIZE: usize = 28;
/// Particles in the chain.
pub const CHAIN_LENGTH: usize = 21;

/// Random positions in `[margin, side - margin]^2` and velocities
/// `v_i = r_i (cos a_i, sin a_i) + f_i`, `r_i ~ U[0, 1]`, `a_i ~ U[0, 2 pi]`,
/// `f_i = r_i (0.5, 1)` for the first `n / 2` particles (1-based `i <= n / 2`).
pub fn init_random_clusters(n: usize, side: f64, seed: u64, margin: f64) -> Result<EnsembleState> {
    if n == 0 {
        return Err(Error::config("n", "need at least one particle"));
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::config("L", "side length must be positive"));
    }
    if !(margin >= 0.0 && 2.0 * margin < side) {
        return Err(Error::config("margin", format!("must satisfy 0 <= margin < L / 2 = {}", side / 2.0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(2 * n);
    let mut v = Vec::with_capacity(2 * n);
    let (lo, hi) = (margin, side - margin);
    for i in 0..n {
        x.push(lo + (hi - lo) * rng.random::<f64>());
        x.push(lo + (hi - lo) * rng.random::<f64>());
        let r: f64 = rng.random();
        let a = std::f64::consts::TAU * rng.random::<f64>();
        let (fx, fy) = if i < n / 2 { (0.5 * r, r) } else { (0.0, 0.0) };
        v.push(r * a.cos() + fx);
        v.push(r * a.sin() + fy);
    }
    EnsembleState::new(0.0, 2, x, v)
}

/// Direction in which `c` moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Motion {
    /// Along the `a`-`b`-`c` line, away from the group. The reduced distance
    /// formulas are exact in this geometry.
    #[default]
    Collinear,
    /// Perpendicular to the line.
    Transverse,
}

impl Motion {
    pub fn name(&self) -> &'static str {
        match self {
            Motion::Collinear => "collinear",
            Motion::Transverse => "transverse",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "collinear" => Some(Motion::Collinear),
            "transverse" => Some(Motion::Transverse),
            _ => None,
        }
    }

    pub fn unit(&self) -> [f64; 2] {
        match self {
            Motion::Collinear => [1.0, 0.0],
            Motion::Transverse => [0.0, 1.0],
        }
    }
}

/// `N - 1` particles `a` near the origin, `b` at `(beta, 0)`, `c` at `(gamma, 0)`
/// moving with speed `v_c`. Particle indices: `a = 0..N-1`, `b = N - 1`, `c = N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBody {
    /// Size `N` of the group `a ∪ {b}`.
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
    pub v_c: f64,
    /// Radius of the half-disc (`x <= 0`) the `a`-particles are scattered in.
    pub a_spread: f64,
    pub motion: Motion,
}

impl ThreeBody {
    /// Setup with collinear motion and `a_spread = delta / 100`, shrunk to
    /// `(delta - beta) / 4` when `b` sits close to the edge of the ball.
    pub fn new(n: usize, beta: f64, gamma: f64, v_c: f64, delta: f64) -> Self {
        ThreeBody {
            n,
            beta,
            gamma,
            v_c,
            a_spread: (delta / 100.0).min((delta - beta).max(0.0) / 4.0),
            motion: Motion::Collinear,
        }
    }

    pub fn b(&self) -> usize {
        self.n - 1
    }

    pub fn c(&self) -> usize {
        self.n
    }

    /// Checks `0 < beta < delta <= gamma`, `gamma - beta < delta`, and that the
    /// scatter keeps the initial neighbor sets as intended.
    pub fn validate(&self, delta: f64, m: usize) -> Result<()> {
        if self.n < 3 {
            return Err(Error::config("n", "three_body needs N >= 3"));
        }
        if !(delta > 0.0) {
            return Err(Error::config("delta", "interaction radius must be positive"));
        }
        if !(self.beta > 0.0 && self.beta < delta) {
            return Err(Error::config("beta", "must satisfy 0 < beta < delta"));
        }
        // c sits outside every open ball around the a-particles as soon as gamma >= delta
        if !(self.gamma >= delta) {
            return Err(Error::config("gamma", "must satisfy gamma >= delta"));
        }
        if !(self.gamma - self.beta < delta) {
            return Err(Error::config("gamma", "must satisfy gamma - beta < delta"));
        }
        if !self.v_c.is_finite() {
            return Err(Error::config("v_c", "must be finite"));
        }
        if !(self.a_spread >= 0.0 && self.beta + self.a_spread < delta && 2.0 * self.a_spread < delta) {
            return Err(Error::config("a_spread", "scatter must keep every a within delta of b"));
        }
        // a's ball holds the N - 1 a's and b; c's ball holds only b and c
        if !(m >= 2 && m < self.n) {
            return Err(Error::config("m", format!("three_body needs 2 <= m < N = {}", self.n)));
        }
        Ok(())
    }
}

pub fn init_three_body(setup: &ThreeBody, delta: f64, seed: u64) -> Result<EnsembleState> {
    setup.validate(delta, 2)?;
    let n = setup.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(2 * (n + 1));
    for _ in 0..n - 1 {
        let r = setup.a_spread * rng.random::<f64>().sqrt();
        let phi = std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * rng.random::<f64>();
        // cos(phi) <= 0 on [pi/2, 3pi/2]; clamp the rounding at the ends
        x.push((r * phi.cos()).min(0.0));
        x.push(r * phi.sin());
    }
    x.extend_from_slice(&[setup.beta, 0.0, setup.gamma, 0.0]);
    let mut v = vec![0.0; 2 * (n + 1)];
    let e = setup.motion.unit();
    v[2 * n] = setup.v_c * e[0];
    v[2 * n + 1] = setup.v_c * e[1];
    EnsembleState::new(0.0, 2, x, v)
}

/// Layout of the 28-particle group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// 14 columns by 2 rows, long side toward the individual.
    A,
    /// 4 columns by 7 rows.
    B,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::A => "A",
            Shape::B => "B",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "A" | "a" => Some(Shape::A),
            "B" | "b" => Some(Shape::B),
            _ => None,
        }
    }

    /// `(columns along x, rows along y)`.
    pub fn grid(&self) -> (usize, usize) {
        match self {
            Shape::A => (14, 2),
            Shape::B => (4, 7),
        }
    }
}

/// Group of 28 on a lattice moving right at `(0.1, 0)`; one particle to its right
/// moving left at `(-2.7, 0)`, so the total x-momentum is `0.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSetup {
    pub shape: Shape,
    pub spacing: f64,
    /// Distance from the group's right column to the individual.
    pub gap: f64,
    /// Vertical position of the individual relative to the group's center line.
    pub offset: f64,
}

impl GroupSetup {
    pub const V_GROUP: [f64; 2] = [0.1, 0.0];
    pub const V_SINGLE: [f64; 2] = [-2.7, 0.0];

    pub fn new(shape: Shape) -> Self {
        GroupSetup {
            shape,
            spacing: 1.0,
            gap: 4.0,
            offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::config("spacing", "must be positive"));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::config("gap", "must be positive"));
        }
        if !self.offset.is_finite() {
            return Err(Error::config("offset", "must be finite"));
        }
        Ok(())
    }
}

pub fn init_group_vs_individual(setup: &GroupSetup) -> Result<EnsembleState> {
    setup.validate()?;
    let (cols, rows) = setup.shape.grid();
    let s = setup.spacing;
    let mut x = Vec::with_capacity(2 * (GROUP_SIZE + 1));
    for r in 0..rows {
        for c in 0..cols {
            x.push(c as f64 * s);
            x.push(r as f64 * s);
        }
    }
    let center = (rows - 1) as f64 * s / 2.0;
    x.push((cols - 1) as f64 * s + setup.gap);
    x.push(center + setup.offset);
    let mut v = GroupSetup::V_GROUP.repeat(GROUP_SIZE);
    v.extend_from_slice(&GroupSetup::V_SINGLE);
    EnsembleState::new(0.0, 2, x, v)
}

/// Vertical chain of 21 at `x = 0` moving right at `(0.1, 0)`, one particle on the
/// chain's midline moving left at `(-8, 0)`. The individual has index 21.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSetup {
    pub delta: f64,
    pub spacing: f64,
    /// Initial x-coordinate of the individual.
    pub gap: f64,
}

impl ChainSetup {
    pub const V_CHAIN: [f64; 2] = [0.1, 0.0];
    pub const V_SINGLE: [f64; 2] = [-8.0, 0.0];
    pub const DEFAULT_SPACING: f64 = 0.9;

    pub fn new(delta: f64) -> Self {
        ChainSetup {
            delta,
            spacing: Self::DEFAULT_SPACING,
            gap: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::config("delta_variant", "must be positive"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::config("spacing", "must be positive"));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::config("gap", "must be positive"));
        }
        Ok(())
    }
}

pub fn init_chain(setup: &ChainSetup) -> Result<EnsembleState> {
    setup.validate()?;
    let half = (CHAIN_LENGTH / 2) as f64;
    let mut x = Vec::with_capacity(2 * (CHAIN_LENGTH + 1));
    for k in 0..CHAIN_LENGTH {
        x.push(0.0);
        x.push((k as f64 - half) * setup.spacing);
    }
    x.extend_from_slice(&[setup.gap, 0.0]);
    let mut v = ChainSetup::V_CHAIN.repeat(CHAIN_LENGTH);
    v.extend_from_slice(&ChainSetup::V_SINGLE);
    EnsembleState::new(0.0, 2, x, v)
}
