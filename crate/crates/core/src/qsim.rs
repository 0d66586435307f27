//! Dense statevector simulation with exact Pauli-Z expectations.
//!
//! Basis indices are little-endian: qubit `k` is bit `k` of the amplitude
//! index. Rotations follow `R_P(φ) = exp(-i φ/2 P)`.
//!
//! Circuit-level gradients come in two flavours. [`param_shift_gradients`]
//! builds the full Jacobian from the two-term shift rule; [`adjoint_vjp`]
//! computes a vector-Jacobian product with one forward and one reverse
//! sweep and is what the training path uses.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AngleSource, CircuitDescriptor, TemplateOp};
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli axis of a rotation gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            "Z" | "z" => Ok(Axis::Z),
            _ => Err(Error::Parse(format!("unknown rotation axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard { target: usize },
    Rotation { axis: Axis, angle: f64, target: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn rx(target: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Axis::X, angle, target }
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Axis::Y, angle, target }
    }

    pub fn rz(target: usize, angle: f64) -> Self {
        Gate::Rotation { axis: Axis::Z, angle, target }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    /// The gate undoing this one.
    pub fn inverse(&self) -> Self {
        match *self {
            Gate::Rotation { axis, angle, target } => Gate::Rotation {
                axis,
                angle: -angle,
                target,
            },
            g => g,
        }
    }

    /// 2x2 unitary of a single-qubit gate in `[row][col]` order, `None` for CNOT.
    pub fn matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        match *self {
            Gate::Hadamard { .. } => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Some([[h, h], [h, -h]])
            }
            Gate::Rotation { axis, angle, .. } => Some(rotation_matrix(axis, angle)),
            Gate::Cnot { .. } => None,
        }
    }

    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Hadamard { target } | Gate::Rotation { target, .. } => (target, None),
            Gate::Cnot { control, target } => (target, Some(control)),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let (target, control) = self.qubits();
        if target >= n_qubits {
            return Err(Error::Config(format!(
                "gate target {target} out of range for {n_qubits} qubits"
            )));
        }
        if let Some(control) = control {
            if control >= n_qubits {
                return Err(Error::Config(format!(
                    "gate control {control} out of range for {n_qubits} qubits"
                )));
            }
            if control == target {
                return Err(Error::Config(format!(
                    "CNOT control and target both equal {target}"
                )));
            }
        }
        Ok(())
    }
}

fn rotation_matrix(axis: Axis, angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [
            [Complex64::new(c, -s), ZERO],
            [ZERO, Complex64::new(c, s)],
        ],
    }
}

/// Single-qubit Pauli-Z measured on one wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observable {
    pub qubit: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// `|0...0>` on `n` qubits.
pub fn zero_state(n: usize) -> Result<StateVector> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Config(format!(
            "qubit count {n} outside 1..={MAX_QUBITS}"
        )));
    }
    let mut amplitudes = vec![ZERO; 1 << n];
    amplitudes[0] = ONE;
    Ok(StateVector {
        n_qubits: n,
        amplitudes,
    })
}

/// Applies `gate` to `state`, consuming and returning it.
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector> {
    state.apply(gate)?;
    Ok(state)
}

/// `<Z_k>` of `state`.
pub fn expectation_z(state: &StateVector, k: usize) -> Result<f64> {
    state.expectation(Observable { qubit: k })
}

impl StateVector {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Builds a state from raw amplitudes. The caller is responsible for
    /// normalisation; only the length is checked.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::shape("amplitudes", 1 << n_qubits, amplitudes.len()));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::Cnot { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for i in 0..self.amplitudes.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amplitudes.swap(i, i | tbit);
                    }
                }
            }
            Gate::Rotation {
                axis: Axis::Z,
                angle,
                target,
            } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                let tbit = 1usize << target;
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & tbit == 0 { lo } else { hi };
                }
            }
            Gate::Hadamard { target } | Gate::Rotation { target, .. } => {
                let m = gate.matrix().expect("single-qubit gate");
                self.apply_single(target, &m);
            }
        }
    }

    fn apply_single(&mut self, target: usize, m: &[[Complex64; 2]; 2]) {
        let stride = 1usize << target;
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(stride << 1) {
            for i in block..block + stride {
                let a = amps[i];
                let b = amps[i + stride];
                amps[i] = m[0][0] * a + m[0][1] * b;
                amps[i + stride] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn expectation(&self, obs: Observable) -> Result<f64> {
        if obs.qubit >= self.n_qubits {
            return Err(Error::Config(format!(
                "observable qubit {} out of range for {} qubits",
                obs.qubit, self.n_qubits
            )));
        }
        Ok(self.z_expectation_unchecked(obs.qubit))
    }

    fn z_expectation_unchecked(&self, k: usize) -> f64 {
        let bit = 1usize << k;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// `(<Z_0>, ..., <Z_{n-1}>)`.
    pub fn z_expectations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_qubits];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (k, o) in out.iter_mut().enumerate() {
                if i >> k & 1 == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out
    }

    /// `<self| P_target |other>`.
    fn pauli_inner(&self, other: &StateVector, axis: Axis, target: usize) -> Complex64 {
        let bit = 1usize << target;
        let mut acc = ZERO;
        for (i, l) in self.amplitudes.iter().enumerate() {
            let set = i & bit != 0;
            let p = match axis {
                Axis::X => other.amplitudes[i ^ bit],
                Axis::Y => {
                    let v = other.amplitudes[i ^ bit];
                    if set {
                        I * v
                    } else {
                        -I * v
                    }
                }
                Axis::Z => {
                    if set {
                        -other.amplitudes[i]
                    } else {
                        other.amplitudes[i]
                    }
                }
            };
            acc += l.conj() * p;
        }
        acc
    }
}

/// Gate list of `desc` bound to `x` and `theta`, checked against the
/// descriptor's shape.
fn bound_ops(desc: &CircuitDescriptor, x: &[f64], theta: &[f64]) -> Result<Vec<(Gate, Option<AngleSource>)>> {
    desc.check_shapes(x, theta)?;
    Ok(desc
        .template()
        .into_iter()
        .map(|op| match op {
            TemplateOp::Fixed(g) => (g, None),
            TemplateOp::Rotation { axis, target, source } => {
                let angle = match source {
                    AngleSource::Input(i) => x[i],
                    AngleSource::Param(j) => theta[j],
                };
                (Gate::Rotation { axis, angle, target }, Some(source))
            }
        })
        .collect())
}

fn simulate_bound(n_qubits: usize, ops: &[(Gate, Option<AngleSource>)]) -> Result<StateVector> {
    let mut state = zero_state(n_qubits)?;
    for (g, _) in ops {
        state.apply(g)?;
    }
    Ok(state)
}

/// Final state `V(θ)U(x)|0>` for a descriptor.
pub fn circuit_state(desc: &CircuitDescriptor, x: &[f64], theta: &[f64]) -> Result<StateVector> {
    let ops = bound_ops(desc, x, theta)?;
    simulate_bound(desc.n_qubits, &ops)
}

/// `(<Z_0>, ..., <Z_{n-1}>)` after running the descriptor's circuit on `|0...0>`.
pub fn run_circuit(desc: &CircuitDescriptor, x: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
    Ok(circuit_state(desc, x, theta)?.z_expectations())
}

/// Row-major `rows x cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Jacobian {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn set_column(&mut self, c: usize, col: &[f64]) {
        for (r, v) in col.iter().enumerate() {
            self.data[r * self.cols + c] = *v;
        }
    }

    /// `Jᵀ · v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        if self.cols == 0 {
            return out;
        }
        for (row, vr) in self.data.chunks_exact(self.cols).zip(v) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vr;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitJacobians {
    /// `d<Z_k>/dθ_j`, `n x |θ|`.
    pub params: Jacobian,
    /// `d<Z_k>/dx_i`, `n x n`.
    pub inputs: Jacobian,
}

/// Full Jacobians by the two-term parameter-shift rule.
///
/// Every trainable angle and every encoding angle sits in exactly one
/// rotation gate, so each column costs two circuit evaluations.
pub fn param_shift_gradients(
    desc: &CircuitDescriptor,
    x: &[f64],
    theta: &[f64],
) -> Result<CircuitJacobians> {
    let ops = bound_ops(desc, x, theta)?;
    let n = desc.n_qubits;
    let mut params = Jacobian::zeros(n, theta.len());
    let mut inputs = Jacobian::zeros(n, x.len());

    for (idx, (_, source)) in ops.iter().enumerate() {
        let Some(source) = source else { continue };
        let shifted = |delta: f64| -> Result<Vec<f64>> {
            let mut ops = ops.clone();
            if let Gate::Rotation { angle, .. } = &mut ops[idx].0 {
                *angle += delta;
            }
            Ok(simulate_bound(n, &ops)?.z_expectations())
        };
        let plus = shifted(FRAC_PI_2)?;
        let minus = shifted(-FRAC_PI_2)?;
        let col: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / 2.0).collect();
        match *source {
            AngleSource::Input(i) => inputs.set_column(i, &col),
            AngleSource::Param(j) => params.set_column(j, &col),
        }
    }
    Ok(CircuitJacobians { params, inputs })
}

/// Result of an adjoint-mode vector-Jacobian product.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitVjp {
    pub outputs: Vec<f64>,
    /// `(d<Z>/dθ)ᵀ · upstream`
    pub params: Vec<f64>,
    /// `(d<Z>/dx)ᵀ · upstream`
    pub inputs: Vec<f64>,
}

/// Vector-Jacobian product `upstreamᵀ · J` by reverse sweep.
///
/// With `O = Σ_k u_k Z_k`, `|λ> = O|ψ>` is pulled back through the circuit
/// alongside `|ψ>`. For a rotation `exp(-iφ/2 P)` the derivative of
/// `<ψ|O|ψ>` is `Im <λ|P|ψ>` evaluated just after the gate.
pub fn adjoint_vjp(
    desc: &CircuitDescriptor,
    x: &[f64],
    theta: &[f64],
    upstream: &[f64],
) -> Result<CircuitVjp> {
    let n = desc.n_qubits;
    if upstream.len() != n {
        return Err(Error::shape("upstream gradient", n, upstream.len()));
    }
    let ops = bound_ops(desc, x, theta)?;
    let mut psi = simulate_bound(n, &ops)?;
    let outputs = psi.z_expectations();

    let mut lambda = psi.clone();
    for (i, a) in lambda.amplitudes.iter_mut().enumerate() {
        let w: f64 = upstream
            .iter()
            .enumerate()
            .map(|(k, u)| if i >> k & 1 == 0 { *u } else { -*u })
            .sum();
        *a *= w;
    }

    let mut params = vec![0.0; theta.len()];
    let mut inputs = vec![0.0; x.len()];
    let first_param = ops.iter().position(|(_, s)| s.is_some());

    for (idx, (gate, source)) in ops.iter().enumerate().rev() {
        if let (Some(source), Gate::Rotation { axis, target, .. }) = (source, gate) {
            let g = lambda.pauli_inner(&psi, *axis, *target).im;
            match *source {
                AngleSource::Input(i) => inputs[i] = g,
                AngleSource::Param(j) => params[j] = g,
            }
        }
        if Some(idx) == first_param {
            break;
        }
        let inv = gate.inverse();
        psi.apply_unchecked(&inv);
        lambda.apply_unchecked(&inv);
    }

    Ok(CircuitVjp {
        outputs,
        params,
        inputs,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;
    use crate::ansatz::{EncodingChoice, Entangler, VariationalChoice};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn zero_state_examples() {
        let s = zero_state(1).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);
        let s = zero_state(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
        let s = zero_state(8).unwrap();
        assert_eq!(s.amplitudes().len(), 256);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_state_rejects_bad_sizes() {
        assert!(matches!(zero_state(0), Err(Error::Config(_))));
        assert!(matches!(zero_state(17), Err(Error::Config(_))));
        assert!(zero_state(16).is_ok());
    }

    #[test]
    fn hadamard_on_zero() {
        let s = apply_gate(zero_state(1).unwrap(), &Gate::Hadamard { target: 0 }).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitudes()[0], h, 1e-15));
        assert!(close(s.amplitudes()[1], h, 1e-15));
        assert!(expectation_z(&s, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ry_pi_flips() {
        let s = apply_gate(zero_state(1).unwrap(), &Gate::ry(0, PI)).unwrap();
        assert!(close(s.amplitudes()[0], ZERO, 1e-12));
        assert!(close(s.amplitudes()[1], ONE, 1e-12));
    }

    #[test]
    fn ry_expectation_is_cosine() {
        let s = apply_gate(zero_state(1).unwrap(), &Gate::ry(0, 0.7)).unwrap();
        assert!((expectation_z(&s, 0).unwrap() - 0.7f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn cnot_entangles() {
        // (|00> + |01>)/√2 with qubit 0 as the low bit, i.e. H on qubit 0.
        let s = zero_state(2).unwrap();
        let s = apply_gate(s, &Gate::Hadamard { target: 0 }).unwrap();
        let s = apply_gate(s, &Gate::cnot(0, 1)).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let a = s.amplitudes();
        assert!(close(a[0b00], h, 1e-15));
        assert!(close(a[0b11], h, 1e-15));
        assert!(close(a[0b01], ZERO, 1e-15));
        assert!(close(a[0b10], ZERO, 1e-15));
    }

    #[test]
    fn invalid_indices_are_config_errors() {
        let s = zero_state(2).unwrap();
        assert!(matches!(apply_gate(s.clone(), &Gate::rx(2, 0.1)), Err(Error::Config(_))));
        assert!(matches!(apply_gate(s.clone(), &Gate::cnot(1, 1)), Err(Error::Config(_))));
        assert!(matches!(apply_gate(s.clone(), &Gate::cnot(3, 0)), Err(Error::Config(_))));
        assert!(matches!(expectation_z(&s, 2), Err(Error::Config(_))));
    }

    #[test]
    fn rotation_matrices_are_unitary() {
        for axis in Axis::ALL {
            for angle in [-2.3, 0.0, 0.4, PI, 5.0] {
                let m = rotation_matrix(axis, angle);
                for r in 0..2 {
                    for c in 0..2 {
                        let mut acc = ZERO;
                        for row in &m {
                            acc += row[r].conj() * row[c];
                        }
                        let expect = if r == c { ONE } else { ZERO };
                        assert!(close(acc, expect, 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        // exp(-iφ/2 P) = cos(φ/2) I - i sin(φ/2) P
        let paulis = [
            [[ZERO, ONE], [ONE, ZERO]],
            [[ZERO, -I], [I, ZERO]],
            [[ONE, ZERO], [ZERO, -ONE]],
        ];
        let phi = 1.234;
        for (axis, p) in Axis::ALL.into_iter().zip(paulis) {
            let m = rotation_matrix(axis, phi);
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c { ONE } else { ZERO };
                    let expect = id * (phi / 2.0).cos() - I * p[r][c] * (phi / 2.0).sin();
                    assert!(close(m[r][c], expect, 1e-14));
                }
            }
        }
    }

    #[test]
    fn run_circuit_identity_examples() {
        let desc = CircuitDescriptor::new(
            EncodingChoice { hadamard: false, axis: Axis::Y },
            VariationalChoice { entangler: Entangler::Chain, axis: Axis::Y },
            4,
            2,
        );
        let out = run_circuit(&desc, &[0.0; 4], &[0.0; 8]).unwrap();
        assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let desc = CircuitDescriptor { n_layers: 0, ..desc };
        let out = run_circuit(&desc, &[FRAC_PI_2; 4], &[]).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn run_circuit_shape_errors() {
        let desc = CircuitDescriptor::new(
            EncodingChoice { hadamard: true, axis: Axis::Y },
            VariationalChoice { entangler: Entangler::Ring, axis: Axis::Z },
            3,
            1,
        );
        assert!(matches!(run_circuit(&desc, &[0.0; 2], &[0.0; 3]), Err(Error::Shape { .. })));
        assert!(matches!(run_circuit(&desc, &[0.0; 3], &[0.0; 4]), Err(Error::Shape { .. })));
    }

    #[test]
    fn single_qubit_input_gradient() {
        let desc = CircuitDescriptor::new(
            EncodingChoice { hadamard: false, axis: Axis::Y },
            VariationalChoice { entangler: Entangler::Chain, axis: Axis::Y },
            1,
            0,
        );
        let j = param_shift_gradients(&desc, &[FRAC_PI_2], &[]).unwrap();
        assert!((j.inputs.get(0, 0) + 1.0).abs() < 1e-10);
        let v = adjoint_vjp(&desc, &[FRAC_PI_2], &[], &[1.0]).unwrap();
        assert!((v.inputs[0] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn light_cone_excludes_parameter() {
        // Chain CNOTs point upward, so the last-layer rotation on qubit 3
        // cannot reach <Z_0>.
        let desc = CircuitDescriptor::new(
            EncodingChoice { hadamard: true, axis: Axis::Y },
            VariationalChoice { entangler: Entangler::Chain, axis: Axis::Y },
            4,
            1,
        );
        let x = [0.3, -0.2, 0.9, 1.1];
        let theta = [0.5, -1.0, 0.25, 0.75];
        let j = param_shift_gradients(&desc, &x, &theta).unwrap();
        for k in 0..3 {
            assert!(j.params.get(k, 3).abs() < 1e-10, "row {k}");
        }
        assert!(j.params.get(3, 3).abs() > 1e-3);
    }
}
