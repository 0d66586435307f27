//! Reference implementations used only by the integration tests. None of
//! them call into the library's simulator, environment or optimiser code.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use diffqas_core::ansatz::{CircuitDescriptor, Entangler};
use diffqas_core::env::{Cell, Grid};
use diffqas_core::qsim::Axis;
use num_complex::Complex64 as C;

type Matrix = Vec<Vec<C>>;

fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn single(axis: Option<Axis>, phi: f64) -> [[C; 2]; 2] {
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let z = C::new(0.0, 0.0);
    match axis {
        None => {
            let h = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        Some(Axis::X) => [[C::new(c, 0.0), C::new(0.0, -s)], [C::new(0.0, -s), C::new(c, 0.0)]],
        Some(Axis::Y) => [[C::new(c, 0.0), C::new(-s, 0.0)], [C::new(s, 0.0), C::new(c, 0.0)]],
        Some(Axis::Z) => [[C::new(c, -s), z], [z, C::new(c, s)]],
    }
}

/// Full `2^n x 2^n` matrix of a one-qubit gate on `target` (bit `target` of
/// the basis index).
fn embed(n: usize, target: usize, u: [[C; 2]; 2]) -> Matrix {
    let dim = 1 << n;
    let mut m = vec![vec![C::new(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let rest_equal = (i ^ j) & !(1 << target) == 0;
            if rest_equal {
                *cell = u[(i >> target) & 1][(j >> target) & 1];
            }
        }
    }
    m
}

#[allow(clippy::needless_range_loop)]
fn cnot_matrix(n: usize, control: usize, target: usize) -> Matrix {
    let dim = 1 << n;
    let mut m = vec![vec![C::new(0.0, 0.0); dim]; dim];
    for j in 0..dim {
        let i = if (j >> control) & 1 == 1 { j ^ (1 << target) } else { j };
        m[i][j] = C::new(1.0, 0.0);
    }
    m
}

/// Unitary of the whole circuit, built by multiplying dense gate matrices.
pub fn dense_unitary(desc: &CircuitDescriptor, x: &[f64], theta: &[f64]) -> Matrix {
    let n = desc.n_qubits;
    let mut gates: Vec<Matrix> = Vec::new();
    if desc.encoding.hadamard {
        for q in 0..n {
            gates.push(embed(n, q, single(None, 0.0)));
        }
    }
    for (q, &xq) in x.iter().enumerate().take(n) {
        gates.push(embed(n, q, single(Some(desc.encoding.axis), xq)));
    }
    for layer in 0..desc.n_layers {
        for q in 0..n.saturating_sub(1) {
            gates.push(cnot_matrix(n, q, q + 1));
        }
        if desc.variational.entangler == Entangler::Ring && n > 1 {
            gates.push(cnot_matrix(n, n - 1, 0));
        }
        for q in 0..n {
            gates.push(embed(n, q, single(Some(desc.variational.axis), theta[layer * n + q])));
        }
    }
    let mut u = identity(1 << n);
    for g in gates {
        u = matmul(&g, &u);
    }
    u
}

/// `<Z_k>` for every qubit from the dense unitary applied to `|0...0>`.
pub fn dense_expectations(desc: &CircuitDescriptor, x: &[f64], theta: &[f64]) -> Vec<f64> {
    let u = dense_unitary(desc, x, theta);
    let psi: Vec<C> = u.iter().map(|row| row[0]).collect();
    (0..desc.n_qubits)
        .map(|k| {
            psi.iter()
                .enumerate()
                .map(|(i, a)| a.norm_sqr() * if (i >> k) & 1 == 0 { 1.0 } else { -1.0 })
                .sum()
        })
        .collect()
}

/// Central difference of every output of `f` with respect to `v[i]`.
pub fn central_diff(mut f: impl FnMut(&[f64]) -> Vec<f64>, v: &[f64], i: usize, eps: f64) -> Vec<f64> {
    let mut plus = v.to_vec();
    let mut minus = v.to_vec();
    plus[i] += eps;
    minus[i] -= eps;
    let up = f(&plus);
    up.iter()
        .zip(f(&minus))
        .map(|(a, b)| (a - b) / (2.0 * eps))
        .collect()
}

/// Central-difference gradient of a scalar function.
pub fn scalar_grad(mut f: impl FnMut(&[f64]) -> f64, v: &[f64], eps: f64) -> Vec<f64> {
    (0..v.len())
        .map(|i| central_diff(|p| vec![f(p)], v, i, eps)[0])
        .collect()
}

/// `|a - b| <= rel * max(|a|, |b|) + floor`.
pub fn rel_close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + floor
}

/// Shortest number of actions from `(x, y, dir)` to `goal`, dir 0=E 1=S 2=W 3=N.
pub fn bfs_steps(grid: &Grid, start: (usize, usize, usize), goal: (usize, usize)) -> Option<usize> {
    let moves = [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)];
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some(((x, y, d), dist)) = queue.pop_front() {
        if (x, y) == goal {
            return Some(dist);
        }
        let (dx, dy) = moves[d];
        let (fx, fy) = ((x as i64 + dx) as usize, (y as i64 + dy) as usize);
        let forward = if grid.get(fx, fy) == Cell::Wall { (x, y, d) } else { (fx, fy, d) };
        for next in [(x, y, (d + 3) % 4), (x, y, (d + 1) % 4), forward] {
            if seen.insert(next) {
                queue.push_back((next, dist + 1));
            }
        }
    }
    None
}

/// Interior wall lines that span the grid with exactly one gap.
/// Returns `(vertical columns, horizontal rows)`.
pub fn rivers(grid: &Grid) -> (Vec<usize>, Vec<usize>) {
    let n = grid.size();
    let wall = |x, y| grid.get(x, y) == Cell::Wall;
    let mut cols = Vec::new();
    let mut rows = Vec::new();
    for c in 1..n - 1 {
        let walls = (1..n - 1).filter(|&y| wall(c, y)).count();
        if walls >= n - 3 {
            cols.push(c);
        }
    }
    for r in 1..n - 1 {
        let walls = (1..n - 1).filter(|&x| wall(x, r)).count();
        if walls >= n - 3 {
            rows.push(r);
        }
    }
    (cols, rows)
}

/// Checks a SimpleCrossing grid: border walls, `k` rivers each with exactly
/// one opening of its own, nothing else walled, goal reachable.
pub fn check_crossing(grid: &Grid, k: usize) -> Result<(), String> {
    let n = grid.size();
    if n != 9 {
        return Err(format!("size {n}"));
    }
    for i in 0..n {
        for (x, y) in [(i, 0), (i, n - 1), (0, i), (n - 1, i)] {
            if grid.get(x, y) != Cell::Wall {
                return Err(format!("border hole at ({x},{y})"));
            }
        }
    }
    let (cols, rows) = rivers(grid);
    if cols.len() + rows.len() != k {
        return Err(format!("expected {k} rivers, found cols {cols:?} rows {rows:?}"));
    }
    for &c in &cols {
        if c % 2 != 0 {
            return Err(format!("river column {c} is odd"));
        }
        let gaps: Vec<usize> = (1..n - 1).filter(|&y| grid.get(c, y) != Cell::Wall).collect();
        if gaps.len() != 1 {
            return Err(format!("column {c} has gaps {gaps:?}"));
        }
    }
    for &r in &rows {
        if r % 2 != 0 {
            return Err(format!("river row {r} is odd"));
        }
        let gaps: Vec<usize> = (1..n - 1).filter(|&x| grid.get(x, r) != Cell::Wall).collect();
        if gaps.len() != 1 {
            return Err(format!("row {r} has gaps {gaps:?}"));
        }
    }
    for x in 1..n - 1 {
        for y in 1..n - 1 {
            let on_river = cols.contains(&x) || rows.contains(&y);
            if grid.get(x, y) == Cell::Wall && !on_river {
                return Err(format!("stray wall at ({x},{y})"));
            }
        }
    }
    let goals: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| grid.get(x, y) == Cell::Goal)
        .collect();
    if goals != vec![(7, 7)] {
        return Err(format!("goals {goals:?}"));
    }
    if grid.get(1, 1) == Cell::Wall {
        return Err("start cell is a wall".into());
    }
    if bfs_steps(grid, (1, 1, 0), (7, 7)).is_none() {
        return Err("goal unreachable".into());
    }
    Ok(())
}

/// Textbook Adam on one scalar, returning the trajectory.
pub fn scalar_adam(mut p: f64, grads: &[f64], lr: f64, b1: f64, b2: f64, eps: f64) -> Vec<f64> {
    let (mut m, mut v) = (0.0, 0.0);
    let mut out = Vec::new();
    for (t, g) in grads.iter().enumerate() {
        let t = (t + 1) as i32;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        let mh = m / (1.0 - b1.powi(t));
        let vh = v / (1.0 - b2.powi(t));
        p -= lr * mh / (vh.sqrt() + eps);
        out.push(p);
    }
    out
}

/// Rolling mean and population std recomputed from scratch for every prefix.
pub fn rolling_reference(scores: &[f64], window: usize) -> Vec<(f64, f64)> {
    (0..scores.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            let w = &scores[lo..=i];
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let var = w.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / w.len() as f64;
            (mean, var.sqrt())
        })
        .collect()
}
