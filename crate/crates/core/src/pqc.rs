//! Parameterized policy circuits.
//!
//! A [`ParamCircuit`] is an ordered gate list over a window of qubits of a
//! larger register. Gate angles either reference the circuit's flat parameter
//! vector or are fixed constants (the swap layer pins `φ₁ = π, φ₂ = 0`).
//! Every two-qubit gate acts on adjacent window indices.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::statevec::{
    cry_derivative, cry_op, dagger2, matchgate_derivatives, matchgate_op, u_derivatives,
    u_matrix, Mat2, PairOp, StateError, StateVector,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PqcError {
    #[error("circuit needs at least one qubit")]
    NoQubits,
    #[error("layer list is empty")]
    NoLayers,
    #[error("expected {expected} parameters, got {got}")]
    ParamLength { expected: usize, got: usize },
    #[error("gate {index} acts on non-adjacent qubits {a} and {b}")]
    NotNearestNeighbor { index: usize, a: usize, b: usize },
    #[error("gate {index} touches qubit {qubit} outside a {n}-qubit circuit")]
    GateOutOfRange { index: usize, qubit: usize, n: usize },
    #[error("window {0:?} must list distinct qubits, one per circuit qubit")]
    BadWindow(Vec<usize>),
    #[error("window qubit {qubit} outside a {n}-qubit state")]
    WindowOutOfState { qubit: usize, n: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("non-finite parameter at index {0}")]
    NonFinite(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    State(#[from] StateError),
}

pub type PqcResult<T> = Result<T, PqcError>;

/// The six layer kinds of the policy architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    RYPhaseShift,
    CRYDownLadder,
    MatchgatePyramid,
    CRYUpLadder,
    RYPhaseShiftAdjoint,
    SwapLayer,
}

impl LayerKind {
    pub const ALL: [LayerKind; 6] = [
        LayerKind::RYPhaseShift,
        LayerKind::CRYDownLadder,
        LayerKind::MatchgatePyramid,
        LayerKind::CRYUpLadder,
        LayerKind::RYPhaseShiftAdjoint,
        LayerKind::SwapLayer,
    ];

    /// Layers 1–5, the block used when no register exchange is needed.
    pub const CORE: [LayerKind; 5] = [
        LayerKind::RYPhaseShift,
        LayerKind::CRYDownLadder,
        LayerKind::MatchgatePyramid,
        LayerKind::CRYUpLadder,
        LayerKind::RYPhaseShiftAdjoint,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::RYPhaseShift => "RYPhaseShift",
            LayerKind::CRYDownLadder => "CRYDownLadder",
            LayerKind::MatchgatePyramid => "MatchgatePyramid",
            LayerKind::CRYUpLadder => "CRYUpLadder",
            LayerKind::RYPhaseShiftAdjoint => "RYPhaseShiftAdjoint",
            LayerKind::SwapLayer => "SwapLayer",
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LayerKind::ALL
            .iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| format!("unknown layer kind '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    /// `U(θ, φ)` on `qubits[0]`.
    U,
    /// `M(θ, φ₁, φ₂)` on `(qubits[0], qubits[0] + 1)`.
    M,
    /// `CRY(θ)` with control `qubits[0]` and target `qubits[1]`.
    Cry,
}

impl GateKind {
    pub fn n_angles(&self) -> usize {
        match self {
            GateKind::U => 2,
            GateKind::M => 3,
            GateKind::Cry => 1,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            GateKind::U => 1,
            _ => 2,
        }
    }
}

/// A gate angle: an index into the parameter vector or a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Param(usize),
    Fixed(f64),
}

impl Angle {
    #[inline]
    pub fn resolve(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Param(i) => params[i],
            Angle::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: [usize; 2],
    pub angles: [Angle; 3],
    pub adjoint: bool,
    pub layer: Option<LayerKind>,
}

impl Gate {
    pub fn u(q: usize, theta: Angle, phi: Angle) -> Self {
        Self {
            kind: GateKind::U,
            qubits: [q, q],
            angles: [theta, phi, Angle::Fixed(0.0)],
            adjoint: false,
            layer: None,
        }
    }

    pub fn m(q_low: usize, theta: Angle, phi1: Angle, phi2: Angle) -> Self {
        Self {
            kind: GateKind::M,
            qubits: [q_low, q_low + 1],
            angles: [theta, phi1, phi2],
            adjoint: false,
            layer: None,
        }
    }

    pub fn cry(control: usize, target: usize, theta: Angle) -> Self {
        Self {
            kind: GateKind::Cry,
            qubits: [control, target],
            angles: [theta, Angle::Fixed(0.0), Angle::Fixed(0.0)],
            adjoint: false,
            layer: None,
        }
    }

    /// `SWAP = M(π, π, 0)`.
    pub fn swap(q_low: usize) -> Self {
        Self::m(q_low, Angle::Fixed(PI), Angle::Fixed(PI), Angle::Fixed(0.0))
    }

    pub fn in_layer(mut self, layer: LayerKind) -> Self {
        self.layer = Some(layer);
        self
    }

    pub fn dagger(mut self) -> Self {
        self.adjoint = !self.adjoint;
        self
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles[..self.kind.n_angles()]
    }

    pub fn resolve(&self, params: &[f64]) -> [f64; 3] {
        [
            self.angles[0].resolve(params),
            self.angles[1].resolve(params),
            self.angles[2].resolve(params),
        ]
    }

    pub fn param_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.angles().iter().filter_map(|a| match a {
            Angle::Param(i) => Some(*i),
            Angle::Fixed(_) => None,
        })
    }

    /// Whether the swap layer's pinned `M(θ, π, 0)` form applies.
    pub fn is_beam_splitter(&self) -> bool {
        self.kind == GateKind::M
            && matches!(self.angles[1], Angle::Fixed(v) if v == PI)
            && matches!(self.angles[2], Angle::Fixed(v) if v == 0.0)
    }

    /// The gate's action with the given resolved angles.
    pub(crate) fn action(&self, v: [f64; 3]) -> GateAction {
        let a = match self.kind {
            GateKind::U => GateAction::One(u_matrix(v[0], v[1])),
            GateKind::M => GateAction::Pair(matchgate_op(v[0], v[1], v[2])),
            GateKind::Cry => GateAction::Pair(cry_op(v[0])),
        };
        if self.adjoint {
            a.dagger()
        } else {
            a
        }
    }

    /// Derivatives with respect to each angle slot (only `n_angles` entries).
    pub(crate) fn derivatives(&self, v: [f64; 3]) -> Vec<GateAction> {
        let ds: Vec<GateAction> = match self.kind {
            GateKind::U => u_derivatives(v[0], v[1]).into_iter().map(GateAction::One).collect(),
            GateKind::M => matchgate_derivatives(v[0], v[1], v[2])
                .into_iter()
                .map(GateAction::Pair)
                .collect(),
            GateKind::Cry => vec![GateAction::Pair(cry_derivative(v[0]))],
        };
        if self.adjoint {
            ds.into_iter().map(|d| d.dagger()).collect()
        } else {
            ds
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum GateAction {
    One(Mat2),
    Pair(PairOp),
}

impl GateAction {
    pub(crate) fn dagger(&self) -> Self {
        match self {
            GateAction::One(m) => GateAction::One(dagger2(m)),
            GateAction::Pair(p) => GateAction::Pair(p.dagger()),
        }
    }
}

/// An ordered list of gates over a qubit window, with parameter bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    n_qubits: usize,
    window: Vec<usize>,
    layers: Vec<LayerKind>,
    gates: Vec<Gate>,
    n_params: usize,
}

impl ParamCircuit {
    /// Builds a circuit from explicit gates. Parameter count is one past the
    /// largest referenced index.
    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> PqcResult<Self> {
        if n_qubits == 0 {
            return Err(PqcError::NoQubits);
        }
        for (index, g) in gates.iter().enumerate() {
            let qs = &g.qubits[..g.kind.n_qubits()];
            for &q in qs {
                if q >= n_qubits {
                    return Err(PqcError::GateOutOfRange { index, qubit: q, n: n_qubits });
                }
            }
            if g.kind.n_qubits() == 2 {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                let adjacent = a.abs_diff(b) == 1;
                let ordered = g.kind != GateKind::M || b == a + 1;
                if !adjacent || !ordered {
                    return Err(PqcError::NotNearestNeighbor { index, a, b });
                }
            }
        }
        let n_params = gates
            .iter()
            .flat_map(|g| g.param_indices().collect::<Vec<_>>())
            .max()
            .map_or(0, |m| m + 1);
        let mut layers: Vec<LayerKind> = Vec::new();
        for g in &gates {
            if let Some(l) = g.layer {
                if layers.last() != Some(&l) {
                    layers.push(l);
                }
            }
        }
        Ok(Self {
            n_qubits,
            window: (0..n_qubits).collect(),
            layers,
            gates,
            n_params,
        })
    }

    /// Places the circuit on `window` (one global index per circuit qubit).
    pub fn with_window(mut self, window: Vec<usize>) -> PqcResult<Self> {
        let distinct = window.iter().enumerate().all(|(i, q)| !window[..i].contains(q));
        if window.len() != self.n_qubits || !distinct {
            return Err(PqcError::BadWindow(window));
        }
        self.window = window;
        Ok(self)
    }

    /// Convenience for a contiguous window starting at `offset`.
    pub fn at_offset(self, offset: usize) -> Self {
        let n = self.n_qubits;
        self.with_window((offset..offset + n).collect())
            .expect("contiguous window is always valid")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn layers(&self) -> &[LayerKind] {
        &self.layers
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Declares extra trailing parameters that no gate references.
    pub fn with_param_count(mut self, n_params: usize) -> Self {
        self.n_params = self.n_params.max(n_params);
        self
    }

    pub fn check_params(&self, params: &[f64]) -> PqcResult<()> {
        if params.len() != self.n_params {
            return Err(PqcError::ParamLength {
                expected: self.n_params,
                got: params.len(),
            });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(PqcError::NonFinite(i));
        }
        Ok(())
    }

    /// Applies the gates in order to `state` (which may be larger than the window).
    pub fn apply(&self, params: &[f64], state: &StateVector) -> PqcResult<StateVector> {
        let mut out = state.clone();
        self.apply_in_place(params, &mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, params: &[f64], state: &mut StateVector) -> PqcResult<()> {
        self.check_params(params)?;
        self.check_fits(state.n_qubits())?;
        for g in &self.gates {
            let v = g.resolve(params);
            match g.action(v) {
                GateAction::One(m) => state.apply_1q(self.window[g.qubits[0]], &m),
                GateAction::Pair(op) => {
                    state.apply_pair(self.window[g.qubits[0]], self.window[g.qubits[1]], &op)
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_fits(&self, n: usize) -> PqcResult<()> {
        match self.window.iter().find(|&&q| q >= n) {
            Some(&q) => Err(PqcError::WindowOutOfState { qubit: q, n }),
            None => Ok(()),
        }
    }

    /// The reversed-dagger circuit over the same parameters.
    pub fn adjoint(&self) -> Self {
        let mut c = self.clone();
        c.gates = self.gates.iter().rev().cloned().map(Gate::dagger).collect();
        c.layers.reverse();
        c
    }

    /// Repeats the circuit `depth` times with independent parameters.
    pub fn stack(&self, depth: usize) -> PqcResult<Self> {
        if depth == 0 {
            return Err(PqcError::ZeroDepth);
        }
        let mut gates = Vec::with_capacity(self.gates.len() * depth);
        for d in 0..depth {
            let shift = d * self.n_params;
            for g in &self.gates {
                let mut g = g.clone();
                for a in g.angles.iter_mut() {
                    if let Angle::Param(i) = a {
                        *i += shift;
                    }
                }
                gates.push(g);
            }
        }
        let mut c = Self::from_gates(self.n_qubits, gates)?;
        c.n_params = self.n_params * depth;
        c.window = self.window.clone();
        Ok(c)
    }

    /// Concatenates `other` after `self` (same qubit count), shifting its
    /// parameter indices past ours.
    pub fn then(&self, other: &ParamCircuit) -> PqcResult<Self> {
        if other.n_qubits != self.n_qubits {
            return Err(PqcError::BadWindow(other.window.clone()));
        }
        let mut gates = self.gates.clone();
        for g in &other.gates {
            let mut g = g.clone();
            for a in g.angles.iter_mut() {
                if let Angle::Param(i) = a {
                    *i += self.n_params;
                }
            }
            gates.push(g);
        }
        let mut c = Self::from_gates(self.n_qubits, gates)?;
        c.n_params = self.n_params + other.n_params;
        c.window = self.window.clone();
        Ok(c)
    }

    /// Parameter indices owned by gates of `layer`.
    pub fn layer_params(&self, layer: LayerKind) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .gates
            .iter()
            .filter(|g| g.layer == Some(layer))
            .flat_map(|g| g.param_indices().collect::<Vec<_>>())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }
}

/// Builds the policy block on `n` qubits with the given layers, in order.
///
/// Layout per layer:
/// 1. `U` on every qubit.
/// 2. `CRY(i → i+1)` for `i = 0..n-1`.
/// 3. Matchgate pyramid over `2n-1` columns: odd columns hold `U` on qubit 0
///    plus pairs `(i, i+1)` with odd `i`, even columns hold pairs with even
///    `i`; pair `i` is active for columns `i+2 ..= 2n-2-i`. That gives `n`
///    interleaved `U` gates and `n(n-1)/2` matchgates.
/// 4. `CRY(i+1 → i)` for `i = n-2` down to `0`.
/// 5. `U†` on every qubit.
/// 6. Diamond of `M(θ, π, 0)` exchanging the leading `k = ⌊n/2⌋` qubits with
///    the next `k` (order preserved when every `θ = π`).
pub fn build_policy(n: usize, layers: &[LayerKind]) -> PqcResult<ParamCircuit> {
    if n == 0 {
        return Err(PqcError::NoQubits);
    }
    if layers.is_empty() {
        return Err(PqcError::NoLayers);
    }
    let mut b = Builder::default();
    for &layer in layers {
        match layer {
            LayerKind::RYPhaseShift => {
                for q in 0..n {
                    b.u(q, layer, false);
                }
            }
            LayerKind::CRYDownLadder => {
                for i in 0..n.saturating_sub(1) {
                    b.cry(i, i + 1, layer);
                }
            }
            LayerKind::MatchgatePyramid => {
                for col in pyramid_columns(n) {
                    if col.u_on_first {
                        b.u(0, layer, false);
                    }
                    for &i in &col.pairs {
                        b.m(i, layer);
                    }
                }
            }
            LayerKind::CRYUpLadder => {
                for i in (0..n.saturating_sub(1)).rev() {
                    b.cry(i + 1, i, layer);
                }
            }
            LayerKind::RYPhaseShiftAdjoint => {
                for q in 0..n {
                    b.u(q, layer, true);
                }
            }
            LayerKind::SwapLayer => {
                for col in swap_diamond(n / 2) {
                    for i in col {
                        b.beam_splitter(i, layer);
                    }
                }
            }
        }
    }
    let mut c = ParamCircuit::from_gates(n, b.gates)?;
    c.layers = layers.to_vec();
    c.n_params = b.next;
    Ok(c)
}

/// One time step of the matchgate pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidColumn {
    pub u_on_first: bool,
    pub pairs: Vec<usize>,
}

pub fn pyramid_columns(n: usize) -> Vec<PyramidColumn> {
    (1..=2 * n - 1)
        .map(|col| PyramidColumn {
            u_on_first: col % 2 == 1,
            pairs: (0..n.saturating_sub(1))
                .filter(|&i| i % 2 == col % 2 && i + 2 <= col && col + i + 2 <= 2 * n)
                .collect(),
        })
        .collect()
}

/// Columns of adjacent transpositions that exchange qubits `0..k` with `k..2k`.
pub fn swap_diamond(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return Vec::new();
    }
    (1..2 * k)
        .map(|col| {
            let d = col.min(2 * k - col);
            (0..d).map(|j| k - d + 2 * j).collect()
        })
        .collect()
}

#[derive(Default)]
struct Builder {
    gates: Vec<Gate>,
    next: usize,
}

impl Builder {
    fn p(&mut self) -> Angle {
        self.next += 1;
        Angle::Param(self.next - 1)
    }

    fn u(&mut self, q: usize, layer: LayerKind, adjoint: bool) {
        let (t, f) = (self.p(), self.p());
        let g = Gate::u(q, t, f).in_layer(layer);
        self.gates.push(if adjoint { g.dagger() } else { g });
    }

    fn cry(&mut self, c: usize, t: usize, layer: LayerKind) {
        let th = self.p();
        self.gates.push(Gate::cry(c, t, th).in_layer(layer));
    }

    fn m(&mut self, q: usize, layer: LayerKind) {
        let (t, f1, f2) = (self.p(), self.p(), self.p());
        self.gates.push(Gate::m(q, t, f1, f2).in_layer(layer));
    }

    fn beam_splitter(&mut self, q: usize, layer: LayerKind) {
        let t = self.p();
        self.gates
            .push(Gate::m(q, t, Angle::Fixed(PI), Angle::Fixed(0.0)).in_layer(layer));
    }
}

/// Result of [`prune`].
#[derive(Debug, Clone)]
pub struct Pruned {
    pub circuit: ParamCircuit,
    pub params: Vec<f64>,
    /// Phase-invariant process fidelity between the pruned and original unitaries.
    pub fidelity: f64,
    /// Set when the simplified circuit missed the fidelity bound and the
    /// original was returned instead.
    pub reverted: bool,
}

fn dist_to_multiple(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    r.min(period - r)
}

/// Whether the gate is within `tol` of exactly the identity. `θ` has period
/// 4π (2π only gives ±I up to control structure) and phases period 2π.
fn is_identity_config(g: &Gate, v: [f64; 3], tol: f64) -> bool {
    let th = dist_to_multiple(v[0], 4.0 * PI) <= tol;
    match g.kind {
        GateKind::U => th && dist_to_multiple(v[1], 2.0 * PI) <= tol,
        GateKind::Cry => th,
        GateKind::M => {
            th && dist_to_multiple(v[1], 2.0 * PI) <= tol && dist_to_multiple(v[2], 2.0 * PI) <= tol
        }
    }
}

/// Removes gates sitting at an identity configuration and snaps remaining
/// angles that lie within `tol` of a multiple of π/2. The result is checked
/// against the original unitary; if its phase-invariant fidelity falls below
/// `1 - 10·tol` the original circuit is returned unchanged.
pub fn prune(circuit: &ParamCircuit, params: &[f64], tol: f64) -> PqcResult<Pruned> {
    circuit.check_params(params)?;
    let tol = tol.max(0.0);
    let mut kept: Vec<Gate> = Vec::new();
    let mut new_params: Vec<f64> = Vec::new();
    let mut remap = vec![None; circuit.n_params];
    for g in &circuit.gates {
        let v = g.resolve(params);
        if tol > 0.0 && is_identity_config(g, v, tol) {
            continue;
        }
        let mut g = g.clone();
        for a in g.angles.iter_mut() {
            if let Angle::Param(i) = *a {
                let j = *remap[i].get_or_insert_with(|| {
                    new_params.push(snap(params[i], tol));
                    new_params.len() - 1
                });
                *a = Angle::Param(j);
            }
        }
        kept.push(g);
    }
    let mut pruned = ParamCircuit::from_gates(circuit.n_qubits, kept)?;
    pruned.n_params = new_params.len();
    pruned.window = circuit.window.clone();
    pruned.layers = circuit
        .layers
        .iter()
        .copied()
        .filter(|l| pruned.gates.iter().any(|g| g.layer == Some(*l)))
        .collect();

    let fidelity = crate::analysis::circuit_fidelity(circuit, params, &pruned, &new_params)?;
    if fidelity < 1.0 - 10.0 * tol {
        return Ok(Pruned {
            circuit: circuit.clone(),
            params: params.to_vec(),
            fidelity: 1.0,
            reverted: true,
        });
    }
    Ok(Pruned {
        circuit: pruned,
        params: new_params,
        fidelity,
        reverted: false,
    })
}

fn snap(x: f64, tol: f64) -> f64 {
    let q = PI / 2.0;
    let k = (x / q).round();
    if (x - k * q).abs() <= tol {
        k * q
    } else {
        x
    }
}
