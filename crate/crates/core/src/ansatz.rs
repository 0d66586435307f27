//! Candidate encoding and variational sub-circuits.
//!
//! A circuit is `[H on every wire]? ++ [R_enc(x_i) on wire i] ++ L × (entangler ++ [R_var(θ_{l,i}) on wire i])`.
//! Two choices per encoding block (Hadamard on/off, three axes) and per
//! variational block (chain/ring CNOTs, three axes) give 36 candidates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Axis, Gate};

pub const DEFAULT_QUBITS: usize = 8;
pub const DEFAULT_LAYERS: usize = 2;
pub const N_CANDIDATES: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EncodingChoice {
    pub hadamard: bool,
    pub axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entangler {
    /// CNOT(i -> i+1) for i = 0..n-2.
    Chain,
    /// Chain plus CNOT(n-1 -> 0).
    Ring,
}

impl Entangler {
    pub const ALL: [Entangler; 2] = [Entangler::Chain, Entangler::Ring];

    pub fn gates(self, n_qubits: usize) -> Vec<Gate> {
        let mut gates: Vec<Gate> = (0..n_qubits.saturating_sub(1))
            .map(|i| Gate::cnot(i, i + 1))
            .collect();
        if self == Entangler::Ring && n_qubits > 1 {
            gates.push(Gate::cnot(n_qubits - 1, 0));
        }
        gates
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariationalChoice {
    pub entangler: Entangler,
    pub axis: Axis,
}

/// One concrete candidate circuit.
///
/// Serialises to text as `H+|encY|chain|varY|L2|Q8` (`H-` when no Hadamard
/// layer is used).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CircuitDescriptor {
    pub encoding: EncodingChoice,
    pub variational: VariationalChoice,
    pub n_qubits: usize,
    pub n_layers: usize,
}

/// Where a rotation angle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleSource {
    Input(usize),
    /// Index into the flat `n_layers × n_qubits` parameter vector, layer-major.
    Param(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemplateOp {
    Fixed(Gate),
    Rotation {
        axis: Axis,
        target: usize,
        source: AngleSource,
    },
}

impl CircuitDescriptor {
    pub fn new(
        encoding: EncodingChoice,
        variational: VariationalChoice,
        n_qubits: usize,
        n_layers: usize,
    ) -> Self {
        Self {
            encoding,
            variational,
            n_qubits,
            n_layers,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_layers * self.n_qubits
    }

    pub(crate) fn check_shapes(&self, x: &[f64], theta: &[f64]) -> Result<()> {
        if x.len() != self.n_qubits {
            return Err(Error::shape("encoding input", self.n_qubits, x.len()));
        }
        if theta.len() != self.n_params() {
            return Err(Error::shape("circuit parameters", self.n_params(), theta.len()));
        }
        Ok(())
    }

    /// Unbound gate sequence with angle sources.
    pub fn template(&self) -> Vec<TemplateOp> {
        let n = self.n_qubits;
        let mut ops = Vec::with_capacity(self.gate_count());
        if self.encoding.hadamard {
            ops.extend((0..n).map(|q| TemplateOp::Fixed(Gate::Hadamard { target: q })));
        }
        ops.extend((0..n).map(|q| TemplateOp::Rotation {
            axis: self.encoding.axis,
            target: q,
            source: AngleSource::Input(q),
        }));
        let entangler = self.variational.entangler.gates(n);
        for layer in 0..self.n_layers {
            ops.extend(entangler.iter().copied().map(TemplateOp::Fixed));
            ops.extend((0..n).map(|q| TemplateOp::Rotation {
                axis: self.variational.axis,
                target: q,
                source: AngleSource::Param(layer * n + q),
            }));
        }
        ops
    }

    pub fn gate_count(&self) -> usize {
        let n = self.n_qubits;
        let h = if self.encoding.hadamard { n } else { 0 };
        h + n + self.n_layers * (self.variational.entangler.gates(n).len() + n)
    }

    /// Position in [`enumerate_all`] order.
    pub fn enumeration_index(&self) -> usize {
        let axis = |a: Axis| Axis::ALL.iter().position(|b| *b == a).unwrap();
        let ent = Entangler::ALL
            .iter()
            .position(|e| *e == self.variational.entangler)
            .unwrap();
        ((usize::from(self.encoding.hadamard) * 3 + axis(self.encoding.axis)) * 2 + ent) * 3
            + axis(self.variational.axis)
    }
}

/// Concrete gate list for `desc` bound to `x` and `theta`.
pub fn gates_for(desc: &CircuitDescriptor, x: &[f64], theta: &[f64]) -> Result<Vec<Gate>> {
    desc.check_shapes(x, theta)?;
    Ok(desc
        .template()
        .into_iter()
        .map(|op| match op {
            TemplateOp::Fixed(g) => g,
            TemplateOp::Rotation { axis, target, source } => Gate::Rotation {
                axis,
                target,
                angle: match source {
                    AngleSource::Input(i) => x[i],
                    AngleSource::Param(j) => theta[j],
                },
            },
        })
        .collect())
}

/// All 36 candidates, lexicographic over
/// `hadamard{off,on} × enc-axis{X,Y,Z} × entangler{chain,ring} × var-axis{X,Y,Z}`.
pub fn enumerate_all(n_qubits: usize, n_layers: usize) -> Vec<CircuitDescriptor> {
    let mut out = Vec::with_capacity(N_CANDIDATES);
    for hadamard in [false, true] {
        for enc in Axis::ALL {
            for entangler in Entangler::ALL {
                for var in Axis::ALL {
                    out.push(CircuitDescriptor::new(
                        EncodingChoice { hadamard, axis: enc },
                        VariationalChoice { entangler, axis: var },
                        n_qubits,
                        n_layers,
                    ));
                }
            }
        }
    }
    out
}

/// Hand-designed reference circuits, `k` in `1..=6`: (encoding axis, trainable axis)
/// = (Y,Y) (Z,Y) (Z,Z) (Y,Z) (X,Z) (X,Y), all with a Hadamard layer and chain CNOTs.
pub fn baseline(k: usize, n_qubits: usize, n_layers: usize) -> Result<CircuitDescriptor> {
    use Axis::*;
    let (enc, var) = match k {
        1 => (Y, Y),
        2 => (Z, Y),
        3 => (Z, Z),
        4 => (Y, Z),
        5 => (X, Z),
        6 => (X, Y),
        _ => return Err(Error::Config(format!("baseline index {k} outside 1..=6"))),
    };
    Ok(CircuitDescriptor::new(
        EncodingChoice { hadamard: true, axis: enc },
        VariationalChoice {
            entangler: Entangler::Chain,
            axis: var,
        },
        n_qubits,
        n_layers,
    ))
}

impl fmt::Display for CircuitDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ent = match self.variational.entangler {
            Entangler::Chain => "chain",
            Entangler::Ring => "ring",
        };
        write!(
            f,
            "H{}|enc{}|{}|var{}|L{}|Q{}",
            if self.encoding.hadamard { '+' } else { '-' },
            self.encoding.axis,
            ent,
            self.variational.axis,
            self.n_layers,
            self.n_qubits
        )
    }
}

impl FromStr for CircuitDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed circuit descriptor `{s}`"));
        let parts: Vec<&str> = s.split('|').collect();
        let [h, enc, ent, var, layers, qubits] = parts.as_slice() else {
            return Err(bad());
        };
        let hadamard = match *h {
            "H+" => true,
            "H-" => false,
            _ => return Err(bad()),
        };
        let enc_axis: Axis = enc.strip_prefix("enc").ok_or_else(bad)?.parse()?;
        let entangler = match *ent {
            "chain" => Entangler::Chain,
            "ring" => Entangler::Ring,
            _ => return Err(bad()),
        };
        let var_axis: Axis = var.strip_prefix("var").ok_or_else(bad)?.parse()?;
        let n_layers = layers
            .strip_prefix('L')
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)?;
        let n_qubits = qubits
            .strip_prefix('Q')
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)?;
        Ok(CircuitDescriptor::new(
            EncodingChoice { hadamard, axis: enc_axis },
            VariationalChoice { entangler, axis: var_axis },
            n_qubits,
            n_layers,
        ))
    }
}

impl Serialize for CircuitDescriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CircuitDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
