//! Weighted ensembles of candidate circuits with trainable structural weights.
//!
//! A block evaluates `y = Σ_j w_j f_j(x; θ_j)` over every candidate `j`,
//! each candidate owning its own parameters. Blocks stack: block `m+1`
//! encodes the expectation vector produced by block `m`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;

use crate::ansatz::{enumerate_all, CircuitDescriptor};
use crate::error::{Error, Result};
use crate::qsim::{adjoint_vjp, param_shift_gradients, run_circuit};

static NEXT_REVISION: AtomicU64 = AtomicU64::new(1);

fn fresh_revision() -> u64 {
    NEXT_REVISION.fetch_add(1, Ordering::Relaxed)
}

/// How circuit gradients are obtained during a backward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMethod {
    /// Reverse sweep computing the vector-Jacobian product directly.
    #[default]
    Adjoint,
    /// Full Jacobians from the shift rule, contracted with the upstream vector.
    ParameterShift,
}

#[derive(Debug, Clone)]
pub struct EnsembleBlock {
    descriptors: Vec<CircuitDescriptor>,
    thetas: Vec<Vec<f64>>,
    weights: Vec<f64>,
    revision: u64,
}

impl PartialEq for EnsembleBlock {
    fn eq(&self, other: &Self) -> bool {
        self.descriptors == other.descriptors
            && self.thetas == other.thetas
            && self.weights == other.weights
    }
}

/// Cached forward evaluation of one block.
#[derive(Debug, Clone)]
pub struct BlockTrace {
    revision: u64,
    input: Vec<f64>,
    candidate_outputs: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl BlockTrace {
    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    /// `f_j(x)` for every candidate, in enumeration order.
    pub fn candidate_outputs(&self) -> &[Vec<f64>] {
        &self.candidate_outputs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockGradients {
    pub weights: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
    pub input: Vec<f64>,
}

impl BlockGradients {
    /// Appends in the block's flattening order: every `θ_j`, then `w`.
    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for t in &self.thetas {
            out.extend_from_slice(t);
        }
        out.extend_from_slice(&self.weights);
    }
}

impl EnsembleBlock {
    /// All 36 candidates with `θ ~ U[-π, π]` and uniform weights.
    pub fn new<R: Rng + ?Sized>(n_qubits: usize, n_layers: usize, rng: &mut R) -> Self {
        let descriptors = enumerate_all(n_qubits, n_layers);
        let thetas = descriptors
            .iter()
            .map(|d| (0..d.n_params()).map(|_| rng.random_range(-PI..PI)).collect())
            .collect();
        let mut block = Self {
            descriptors,
            thetas,
            weights: Vec::new(),
            revision: fresh_revision(),
        };
        block.init_structural_weights();
        block
    }

    pub fn from_parts(
        descriptors: Vec<CircuitDescriptor>,
        thetas: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let Some(first) = descriptors.first() else {
            return Err(Error::Config("ensemble needs at least one candidate".into()));
        };
        if descriptors
            .iter()
            .any(|d| d.n_qubits != first.n_qubits || d.n_layers != first.n_layers)
        {
            return Err(Error::Config(
                "ensemble candidates must share qubit and layer counts".into(),
            ));
        }
        if weights.len() != descriptors.len() {
            return Err(Error::shape("structural weights", descriptors.len(), weights.len()));
        }
        if thetas.len() != descriptors.len() {
            return Err(Error::shape("candidate parameter sets", descriptors.len(), thetas.len()));
        }
        for (d, t) in descriptors.iter().zip(&thetas) {
            if t.len() != d.n_params() {
                return Err(Error::shape("candidate parameters", d.n_params(), t.len()));
            }
        }
        Ok(Self {
            descriptors,
            thetas,
            weights,
            revision: fresh_revision(),
        })
    }

    /// Resets every structural weight to `1/N`.
    pub fn init_structural_weights(&mut self) {
        let n = self.descriptors.len();
        self.weights = vec![1.0 / n as f64; n];
        self.revision = fresh_revision();
    }

    pub fn descriptors(&self) -> &[CircuitDescriptor] {
        &self.descriptors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn thetas(&self) -> &[Vec<f64>] {
        &self.thetas
    }

    pub fn n_qubits(&self) -> usize {
        self.descriptors[0].n_qubits
    }

    pub fn n_candidates(&self) -> usize {
        self.descriptors.len()
    }

    pub fn set_weights(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.weights.len() {
            return Err(Error::shape("structural weights", self.weights.len(), weights.len()));
        }
        self.weights.copy_from_slice(weights);
        self.revision = fresh_revision();
        Ok(())
    }

    pub fn set_theta(&mut self, j: usize, theta: &[f64]) -> Result<()> {
        let slot = self
            .thetas
            .get_mut(j)
            .ok_or_else(|| Error::Config(format!("candidate index {j} out of range")))?;
        if theta.len() != slot.len() {
            return Err(Error::shape("candidate parameters", slot.len(), theta.len()));
        }
        slot.copy_from_slice(theta);
        self.revision = fresh_revision();
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.thetas.iter().map(Vec::len).sum::<usize>() + self.weights.len()
    }

    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for t in &self.thetas {
            out.extend_from_slice(t);
        }
        out.extend_from_slice(&self.weights);
    }

    /// Reads parameters in [`write_flat`](Self::write_flat) order; returns the count consumed.
    pub fn read_flat(&mut self, flat: &[f64]) -> Result<usize> {
        let need = self.n_params();
        if flat.len() < need {
            return Err(Error::shape("flat block parameters", need, flat.len()));
        }
        let mut at = 0;
        for t in &mut self.thetas {
            let len = t.len();
            t.copy_from_slice(&flat[at..at + len]);
            at += len;
        }
        let nw = self.weights.len();
        self.weights.copy_from_slice(&flat[at..at + nw]);
        self.revision = fresh_revision();
        Ok(need)
    }

    pub fn forward(&self, x: &[f64]) -> Result<BlockTrace> {
        let n = self.n_qubits();
        if x.len() != n {
            return Err(Error::shape("block input", n, x.len()));
        }
        let candidate_outputs = self
            .descriptors
            .iter()
            .zip(&self.thetas)
            .map(|(d, t)| run_circuit(d, x, t))
            .collect::<Result<Vec<_>>>()?;
        let mut output = vec![0.0; n];
        for (w, f) in self.weights.iter().zip(&candidate_outputs) {
            for (o, v) in output.iter_mut().zip(f) {
                *o += w * v;
            }
        }
        Ok(BlockTrace {
            revision: self.revision,
            input: x.to_vec(),
            candidate_outputs,
            output,
        })
    }

    pub fn backward(
        &self,
        trace: &BlockTrace,
        upstream: &[f64],
        method: GradientMethod,
    ) -> Result<BlockGradients> {
        if trace.revision != self.revision {
            return Err(Error::Contract(
                "block parameters changed since the forward pass".into(),
            ));
        }
        let n = self.n_qubits();
        if upstream.len() != n {
            return Err(Error::shape("upstream gradient", n, upstream.len()));
        }
        let x = &trace.input;

        let weights = trace
            .candidate_outputs
            .iter()
            .map(|f| f.iter().zip(upstream).map(|(a, b)| a * b).sum())
            .collect();

        let mut thetas = Vec::with_capacity(self.descriptors.len());
        let mut input = vec![0.0; n];
        for ((d, theta), &w) in self.descriptors.iter().zip(&self.thetas).zip(&self.weights) {
            if w == 0.0 {
                thetas.push(vec![0.0; theta.len()]);
                continue;
            }
            let (g_theta, g_x) = match method {
                GradientMethod::Adjoint => {
                    let v = adjoint_vjp(d, x, theta, upstream)?;
                    (v.params, v.inputs)
                }
                GradientMethod::ParameterShift => {
                    let j = param_shift_gradients(d, x, theta)?;
                    (j.params.transpose_mul(upstream), j.inputs.transpose_mul(upstream))
                }
            };
            thetas.push(g_theta.into_iter().map(|g| w * g).collect());
            for (acc, g) in input.iter_mut().zip(g_x) {
                *acc += w * g;
            }
        }
        Ok(BlockGradients {
            weights,
            thetas,
            input,
        })
    }

    /// Candidates by descending weight; ties keep enumeration order.
    pub fn top_candidates(&self, k: usize) -> Vec<RankedCandidate> {
        let mut ranked: Vec<RankedCandidate> = self
            .descriptors
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(index, (d, w))| RankedCandidate {
                index,
                descriptor: *d,
                weight: *w,
            })
            .collect();
        ranked.sort_by(|a, b| b.weight.total_cmp(&a.weight));
        ranked.truncate(k);
        ranked
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedCandidate {
    pub index: usize,
    pub descriptor: CircuitDescriptor,
    pub weight: f64,
}

/// `M` ensemble blocks applied in sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffQasStack {
    blocks: Vec<EnsembleBlock>,
}

#[derive(Debug, Clone)]
pub struct StackTrace {
    blocks: Vec<BlockTrace>,
}

impl StackTrace {
    pub fn output(&self) -> &[f64] {
        self.blocks.last().expect("non-empty stack").output()
    }

    pub fn blocks(&self) -> &[BlockTrace] {
        &self.blocks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackGradients {
    pub blocks: Vec<BlockGradients>,
    pub input: Vec<f64>,
}

impl DiffQasStack {
    pub fn new<R: Rng + ?Sized>(n_blocks: usize, n_qubits: usize, n_layers: usize, rng: &mut R) -> Result<Self> {
        Self::from_blocks(
            (0..n_blocks)
                .map(|_| EnsembleBlock::new(n_qubits, n_layers, rng))
                .collect(),
        )
    }

    pub fn from_blocks(blocks: Vec<EnsembleBlock>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::Config("stack needs at least one block".into()));
        };
        let n = first.n_qubits();
        if let Some(b) = blocks.iter().find(|b| b.n_qubits() != n) {
            return Err(Error::shape("block width", n, b.n_qubits()));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[EnsembleBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [EnsembleBlock] {
        &mut self.blocks
    }

    pub fn n_qubits(&self) -> usize {
        self.blocks[0].n_qubits()
    }

    pub fn n_structural_weights(&self) -> usize {
        self.blocks.iter().map(|b| b.weights.len()).sum()
    }

    pub fn n_params(&self) -> usize {
        self.blocks.iter().map(EnsembleBlock::n_params).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<StackTrace> {
        let mut traces: Vec<BlockTrace> = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let input = traces.last().map_or(x, |t| t.output());
            let trace = block.forward(input)?;
            traces.push(trace);
        }
        Ok(StackTrace { blocks: traces })
    }

    pub fn backward(
        &self,
        trace: &StackTrace,
        upstream: &[f64],
        method: GradientMethod,
    ) -> Result<StackGradients> {
        if trace.blocks.len() != self.blocks.len() {
            return Err(Error::Contract("stack trace depth does not match stack".into()));
        }
        let mut grads = Vec::with_capacity(self.blocks.len());
        let mut carry = upstream.to_vec();
        for (block, t) in self.blocks.iter().zip(&trace.blocks).rev() {
            let g = block.backward(t, &carry, method)?;
            carry = g.input.clone();
            grads.push(g);
        }
        grads.reverse();
        Ok(StackGradients {
            blocks: grads,
            input: carry,
        })
    }
}
