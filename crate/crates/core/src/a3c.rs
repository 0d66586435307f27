//! Asynchronous advantage actor-critic.
//!
//! Workers each own a model copy, an environment and an RNG. Every
//! `rollout_len` steps (or at episode end) a worker refreshes its model from
//! the [`GlobalStore`], acts, computes an n-step advantage gradient on that
//! snapshot and applies it to the store's shared Adam state. Snapshots and
//! updates each take the store lock for their whole duration, so readers
//! never see a half-written parameter vector.
//!
//! Per-worker seeds are `splitmix64(seed + worker_id + 1)`; the action RNG
//! uses that value directly and the environment uses `splitmix64` of it.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{mpsc, Mutex, MutexGuard};
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{make_env, EnvName};
use crate::error::{Error, Result};
use crate::model::{log_softmax, sample_action, ActorCritic, BodyKind, Checkpoint, ForwardPass, ModelConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub env: EnvName,
    pub mode: BodyKind,
    pub blocks: usize,
    pub qubits: usize,
    pub layers: usize,
    pub workers: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub gamma: f64,
    pub rollout_len: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub episodes: u64,
    /// Optional cap on optimiser updates, checked alongside the episode budget.
    pub max_updates: Option<u64>,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(env: EnvName) -> Self {
        Self {
            env,
            mode: BodyKind::DiffQas,
            blocks: 1,
            qubits: crate::ansatz::DEFAULT_QUBITS,
            layers: crate::ansatz::DEFAULT_LAYERS,
            workers: 80,
            lr: 1e-4,
            beta1: 0.92,
            beta2: 0.999,
            adam_eps: 1e-8,
            gamma: 0.9,
            rollout_len: 5,
            value_coef: 0.5,
            entropy_coef: 0.01,
            episodes: 100_000,
            max_updates: None,
            seed: 0,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            n_qubits: self.qubits,
            n_layers: self.layers,
            body: self.mode,
            n_blocks: self.blocks,
            ..ModelConfig::default()
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            gamma: self.gamma,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("workers", self.workers as f64),
            ("rollout_len", self.rollout_len as f64),
            ("blocks", self.blocks as f64),
            ("qubits", self.qubits as f64),
            ("lr", self.lr),
            ("adam_eps", self.adam_eps),
        ];
        for (name, v) in positive {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if self.value_coef < 0.0 || self.entropy_coef < 0.0 {
            return Err(Error::Config("loss coefficients must be non-negative".into()));
        }
        if self.qubits > crate::qsim::MAX_QUBITS {
            return Err(Error::Config(format!("at most {} qubits", crate::qsim::MAX_QUBITS)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub gamma: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub value: f64,
    pub logprob: f64,
    /// Forward pass recorded while acting, reused by the gradient step when
    /// it still matches the model.
    pub pass: Option<ForwardPass>,
}

#[derive(Debug, Clone, Default)]
pub struct Rollout {
    pub transitions: Vec<Transition>,
    /// `0` after a terminal step, otherwise `V(s_{t+L})`.
    pub bootstrap_value: f64,
}

/// Discounted returns computed backward from the bootstrap value.
pub fn n_step_returns(rollout: &Rollout, gamma: f64) -> Vec<f64> {
    let mut r = rollout.bootstrap_value;
    let mut out = vec![0.0; rollout.transitions.len()];
    for (t, tr) in rollout.transitions.iter().enumerate().rev() {
        r = tr.reward + gamma * r;
        out[t] = r;
    }
    out
}

/// Gradient of
/// `Σ_t [-log π(a_t|s_t)·A_t + c_v (R_t - V(s_t))² - c_e H(π(·|s_t))]`
/// with `A_t = R_t - V(s_t)` held constant in the policy term.
pub fn compute_gradients(model: &ActorCritic, rollout: &Rollout, loss: &LossConfig) -> Result<Vec<f64>> {
    if rollout.transitions.is_empty() {
        return Err(Error::Contract("empty rollout".into()));
    }
    let returns = n_step_returns(rollout, loss.gamma);
    let mut total = vec![0.0; model.n_params()];
    let mut loss_value = 0.0;
    for (tr, ret) in rollout.transitions.iter().zip(&returns) {
        let fresh;
        let pass = match &tr.pass {
            Some(p) if model.is_current(p) => p,
            _ => {
                fresh = model.forward(&tr.obs)?;
                &fresh
            }
        };
        let logp = log_softmax(&pass.logits);
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let entropy: f64 = -probs.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
        let advantage = ret - pass.value;

        let grad_logits: Vec<f64> = probs
            .iter()
            .zip(&logp)
            .enumerate()
            .map(|(a, (p, l))| {
                let onehot = if a == tr.action { 1.0 } else { 0.0 };
                -advantage * (onehot - p) + loss.entropy_coef * p * (l + entropy)
            })
            .collect();
        let grad_value = -2.0 * loss.value_coef * advantage;

        loss_value += -logp[tr.action] * advantage + loss.value_coef * advantage * advantage
            - loss.entropy_coef * entropy;
        let g = model.backward(pass, &grad_logits, grad_value)?;
        for (acc, v) in total.iter_mut().zip(g) {
            *acc += v;
        }
    }
    if !loss_value.is_finite() || total.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!("non-finite rollout loss {loss_value}")));
    }
    Ok(total)
}

/// FNV-1a over the bit patterns of `params`.
pub fn checksum(params: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in params {
        for b in p.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[derive(Debug)]
struct StoreState {
    params: Vec<f64>,
    adam_m: Vec<f64>,
    adam_v: Vec<f64>,
    step_count: u64,
    episode_count: u64,
    checksum: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub params: Vec<f64>,
    pub step_count: u64,
    pub checksum: u64,
}

/// Shared parameters with one Adam state. Every public operation is atomic
/// with respect to every other.
#[derive(Debug)]
pub struct GlobalStore {
    state: Mutex<StoreState>,
    adam: AdamConfig,
    snapshots_verified: AtomicU64,
    incidents: AtomicU64,
}

impl GlobalStore {
    pub fn new(params: Vec<f64>, adam: AdamConfig) -> Self {
        let n = params.len();
        let sum = checksum(&params);
        Self {
            state: Mutex::new(StoreState {
                params,
                adam_m: vec![0.0; n],
                adam_v: vec![0.0; n],
                step_count: 0,
                episode_count: 0,
                checksum: sum,
            }),
            adam,
            snapshots_verified: AtomicU64::new(0),
            incidents: AtomicU64::new(0),
        }
    }

    fn lock(&self) -> MutexGuard<'_, StoreState> {
        // A panic elsewhere never leaves the state half-updated: updates are
        // computed into locals and committed at the end.
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn len(&self) -> usize {
        self.lock().params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Snapshot {
        let s = self.lock();
        Snapshot {
            params: s.params.clone(),
            step_count: s.step_count,
            checksum: s.checksum,
        }
    }

    /// Snapshot whose parameters are checked against the checksum written
    /// by the update that produced them.
    pub fn verified_snapshot(&self) -> Result<Snapshot> {
        let snap = self.snapshot();
        if checksum(&snap.params) != snap.checksum {
            return Err(Error::Contract(format!(
                "torn parameter snapshot at step {}",
                snap.step_count
            )));
        }
        self.snapshots_verified.fetch_add(1, Ordering::Relaxed);
        Ok(snap)
    }

    pub fn snapshots_verified(&self) -> u64 {
        self.snapshots_verified.load(Ordering::Relaxed)
    }

    pub fn step_count(&self) -> u64 {
        self.lock().step_count
    }

    pub fn episode_count(&self) -> u64 {
        self.lock().episode_count
    }

    pub fn params(&self) -> Vec<f64> {
        self.lock().params.clone()
    }

    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let s = self.lock();
        (s.adam_m.clone(), s.adam_v.clone())
    }

    /// Bias-corrected Adam step with the shared moments; returns the new step count.
    pub fn apply_gradients(&self, grads: &[f64]) -> Result<u64> {
        let mut s = self.lock();
        if grads.len() != s.params.len() {
            return Err(Error::shape("gradient", s.params.len(), grads.len()));
        }
        let AdamConfig { lr, beta1, beta2, eps } = self.adam;
        let t = s.step_count + 1;
        let c1 = 1.0 - beta1.powi(t as i32);
        let c2 = 1.0 - beta2.powi(t as i32);
        let StoreState {
            params,
            adam_m,
            adam_v,
            ..
        } = &mut *s;
        for (((p, m), v), g) in params.iter_mut().zip(adam_m.iter_mut()).zip(adam_v.iter_mut()).zip(grads) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        s.checksum = checksum(&s.params);
        s.step_count = t;
        Ok(t)
    }

    /// Claims the next episode index if `budget` is not exhausted and runs
    /// `emit` while still holding the lock, so emissions are ordered by index.
    pub fn finish_episode(&self, budget: u64, emit: impl FnOnce(u64)) -> Option<u64> {
        let mut s = self.lock();
        if s.episode_count >= budget {
            return None;
        }
        let idx = s.episode_count;
        s.episode_count += 1;
        emit(idx);
        Some(idx)
    }

    fn note_incident(&self) {
        self.incidents.fetch_add(1, Ordering::Relaxed);
    }

    /// Rollouts discarded because of non-finite losses.
    pub fn incidents(&self) -> u64 {
        self.incidents.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub index: u64,
    pub worker_id: usize,
    pub score: f64,
    pub steps: usize,
}

/// Mean and population standard deviation over the last `window` values.
#[derive(Debug, Clone)]
pub struct RollingStats {
    window: usize,
    values: VecDeque<f64>,
}

impl RollingStats {
    pub fn new(window: usize) -> Self {
        Self {
            window: window.max(1),
            values: VecDeque::new(),
        }
    }

    pub fn push(&mut self, v: f64) -> (f64, f64) {
        if self.values.len() == self.window {
            self.values.pop_front();
        }
        self.values.push_back(v);
        self.stats()
    }

    pub fn stats(&self) -> (f64, f64) {
        window_stats(self.values.iter().copied())
    }
}

/// Mean and population standard deviation of `values`.
pub fn window_stats(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return (0.0, 0.0);
    };
    // Summing then dividing does not return a repeated value exactly.
    if it.all(|v| v.to_bits() == first.to_bits()) {
        return (first, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Default)]
pub struct MetricsLog {
    pub records: Vec<EpisodeRecord>,
    /// `(mean, std)` after each record.
    pub rolling: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub log: MetricsLog,
    pub initial: Checkpoint,
    pub checkpoint: Checkpoint,
    pub optimizer_steps: u64,
    pub snapshots_verified: u64,
    pub incidents: u64,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn worker_seed(seed: u64, worker_id: usize) -> u64 {
    splitmix64(seed.wrapping_add(worker_id as u64 + 1))
}

/// Shared flags and the record channel handed to each worker.
pub struct WorkerContext<'a> {
    pub store: &'a GlobalStore,
    pub records: mpsc::Sender<EpisodeRecord>,
    pub abort: &'a AtomicBool,
}

/// Runs one worker until the episode (or update) budget is spent.
pub fn worker_loop(worker_id: usize, cfg: &TrainConfig, ctx: &WorkerContext<'_>) -> Result<()> {
    let seed = worker_seed(cfg.seed, worker_id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut env = make_env(cfg.env, splitmix64(seed))?;
    let mut model = ActorCritic::new(cfg.model_config(), &mut rng)?;
    let loss = cfg.loss();
    let store = ctx.store;

    let mut obs = env.observe();
    let mut score = 0.0;
    loop {
        if ctx.abort.load(Ordering::Relaxed) || store.episode_count() >= cfg.episodes {
            return Ok(());
        }
        if cfg.max_updates.is_some_and(|m| store.step_count() >= m) {
            return Ok(());
        }
        let snap = store.verified_snapshot()?;
        model.load_params(&snap.params)?;

        let mut rollout = Rollout::default();
        let mut done = false;
        for _ in 0..cfg.rollout_len {
            let pass = model.forward(&obs)?;
            let (action, logprob) = sample_action(&pass.logits, &mut rng)?;
            let step = env.step(action)?;
            score += step.reward;
            rollout.transitions.push(Transition {
                obs: std::mem::replace(&mut obs, step.observation),
                action,
                reward: step.reward,
                value: pass.value,
                logprob,
                pass: Some(pass),
            });
            if step.done {
                done = true;
                break;
            }
        }
        rollout.bootstrap_value = if done { 0.0 } else { model.forward(&obs)?.value };

        match compute_gradients(&model, &rollout, &loss) {
            Ok(grads) => {
                store.apply_gradients(&grads)?;
            }
            Err(Error::Numerical(_)) => store.note_incident(),
            Err(e) => return Err(e),
        }

        if done {
            let record = EpisodeRecord {
                index: 0,
                worker_id,
                score,
                steps: env.steps(),
            };
            let claimed = store.finish_episode(cfg.episodes, |index| {
                let _ = ctx.records.send(EpisodeRecord { index, ..record });
            });
            if claimed.is_none() {
                return Ok(());
            }
            score = 0.0;
            obs = env.reset()?;
        }
    }
}

/// Returned by an episode sink to keep training or stop early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Trains with `cfg`, collecting every episode record in memory.
pub fn train(cfg: &TrainConfig, window: usize) -> Result<TrainOutcome> {
    train_with(cfg, window, |_, _, _| Ok(Flow::Continue))
}

/// Trains with `cfg`, calling `on_episode` in episode-index order with each
/// record, the rolling `(mean, std)` over the last `window` scores and the
/// shared store (for example to log parameters at intervals).
///
/// Returning [`Flow::Stop`] ends training after in-flight rollouts finish;
/// records claimed after that point are dropped. A failing worker or sink
/// stops the remaining workers, and records already delivered stay delivered.
pub fn train_with<F>(cfg: &TrainConfig, window: usize, mut on_episode: F) -> Result<TrainOutcome>
where
    F: FnMut(&EpisodeRecord, (f64, f64), &GlobalStore) -> Result<Flow>,
{
    cfg.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = ActorCritic::new(cfg.model_config(), &mut init_rng)?;
    let worker_seeds: Vec<u64> = (0..cfg.workers).map(|w| worker_seed(cfg.seed, w)).collect();
    let initial = Checkpoint::from_model(&model, cfg.seed, worker_seeds.clone());

    let store = GlobalStore::new(model.flatten_params(), cfg.adam());
    let abort = AtomicBool::new(false);
    let mut log = MetricsLog::default();
    let mut rolling = RollingStats::new(window);
    let mut failures: Vec<String> = Vec::new();

    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        let handles: Vec<_> = (0..cfg.workers)
            .map(|id| {
                let ctx = WorkerContext {
                    store: &store,
                    records: tx.clone(),
                    abort: &abort,
                };
                thread::Builder::new()
                    .name(format!("a3c-worker-{id}"))
                    .spawn_scoped(scope, move || {
                        let out = worker_loop(id, cfg, &ctx);
                        if out.is_err() {
                            ctx.abort.store(true, Ordering::Relaxed);
                        }
                        out
                    })
                    .expect("spawn worker thread")
            })
            .collect();
        drop(tx);

        for record in rx {
            let stats = rolling.push(record.score);
            log.records.push(record);
            log.rolling.push(stats);
            match on_episode(&record, stats, &store) {
                Ok(Flow::Continue) => {}
                Ok(Flow::Stop) => {
                    abort.store(true, Ordering::Relaxed);
                    break;
                }
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    failures.push(format!("episode sink: {e}"));
                    break;
                }
            }
        }

        for (id, h) in handles.into_iter().enumerate() {
            match h.join() {
                Ok(Ok(())) => {}
                Ok(Err(e)) => failures.push(format!("worker {id}: {e}")),
                Err(panic) => {
                    abort.store(true, Ordering::Relaxed);
                    let msg = panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "unknown panic".into());
                    failures.push(format!("worker {id} panicked: {msg}"));
                }
            }
        }
    });

    if !failures.is_empty() {
        return Err(Error::Worker(failures.join("; ")));
    }

    let mut final_model = model;
    final_model.load_params(&store.params())?;
    let mut checkpoint = Checkpoint::from_model(&final_model, cfg.seed, worker_seeds);
    checkpoint.optimizer_steps = store.step_count();
    checkpoint.episodes = store.episode_count();

    Ok(TrainOutcome {
        log,
        initial,
        checkpoint,
        optimizer_steps: store.step_count(),
        snapshots_verified: store.snapshots_verified(),
        incidents: store.incidents(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SegmentKind;

    fn transition(reward: f64) -> Transition {
        Transition {
            obs: vec![],
            action: 0,
            reward,
            value: 0.0,
            logprob: 0.0,
            pass: None,
        }
    }

    fn rollout(rewards: &[f64], bootstrap: f64) -> Rollout {
        Rollout {
            transitions: rewards.iter().map(|r| transition(*r)).collect(),
            bootstrap_value: bootstrap,
        }
    }

    #[test]
    fn returns_hand_unrolled() {
        let r = n_step_returns(&rollout(&[0.0, 0.0, 1.0], 0.0), 0.9);
        assert_eq!(r.len(), 3);
        assert!((r[0] - 0.81).abs() < 1e-15);
        assert!((r[1] - 0.9).abs() < 1e-15);
        assert_eq!(r[2], 1.0);

        let v = 2.5;
        let r = n_step_returns(&rollout(&[0.0; 5], v), 0.9);
        assert!((r[0] - 0.59049 * v).abs() < 1e-14);

        let r = n_step_returns(&rollout(&[0.3, 0.1, 0.7], 4.0), 0.0);
        assert_eq!(r, vec![0.3, 0.1, 0.7]);
    }

    #[test]
    fn adam_first_step() {
        let adam = AdamConfig {
            lr: 1e-4,
            beta1: 0.92,
            beta2: 0.999,
            eps: 1e-8,
        };
        let store = GlobalStore::new(vec![0.5, -1.0, 2.0], adam);
        store.apply_gradients(&[1.0, 1.0, 1.0]).unwrap();
        let p = store.params();
        let delta = -1e-4 / (1.0 + 1e-8);
        for (after, before) in p.iter().zip([0.5, -1.0, 2.0]) {
            assert!((after - before - delta).abs() < 1e-15);
        }
        assert_eq!(store.step_count(), 1);
    }

    #[test]
    fn zero_gradient_only_counts() {
        let adam = TrainConfig::new(EnvName::Empty5x5).adam();
        let store = GlobalStore::new(vec![0.25; 4], adam);
        store.apply_gradients(&[0.0; 4]).unwrap();
        assert_eq!(store.params(), vec![0.25; 4]);
        assert_eq!(store.step_count(), 1);
        assert!(matches!(store.apply_gradients(&[0.0; 3]), Err(Error::Shape { .. })));
    }

    #[test]
    fn episode_budget_is_exact() {
        let store = GlobalStore::new(vec![0.0], TrainConfig::new(EnvName::Empty5x5).adam());
        let mut seen = Vec::new();
        for _ in 0..5 {
            store.finish_episode(3, |i| seen.push(i));
        }
        assert_eq!(seen, vec![0, 1, 2]);
        assert_eq!(store.episode_count(), 3);
    }

    #[test]
    fn rolling_stats_window() {
        let mut r = RollingStats::new(3);
        assert_eq!(r.push(1.0), (1.0, 0.0));
        r.push(2.0);
        let (m, s) = r.push(3.0);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((s - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let (m, _) = r.push(4.0);
        assert!((m - 3.0).abs() < 1e-15);
        let mut c = RollingStats::new(5);
        for _ in 0..10 {
            assert_eq!(c.push(0.7), (0.7, 0.0));
        }
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::new(EnvName::Empty5x5);
        assert!(ok.validate().is_ok());
        for bad in [
            TrainConfig { gamma: 0.0, ..ok.clone() },
            TrainConfig { gamma: 1.5, ..ok.clone() },
            TrainConfig { workers: 0, ..ok.clone() },
            TrainConfig { lr: -1.0, ..ok.clone() },
            TrainConfig { beta1: 1.0, ..ok.clone() },
            TrainConfig { rollout_len: 0, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn zero_episode_budget() {
        let cfg = TrainConfig {
            qubits: 2,
            layers: 1,
            workers: 2,
            episodes: 0,
            ..TrainConfig::new(EnvName::Empty5x5)
        };
        let out = train(&cfg, 10).unwrap();
        assert!(out.log.records.is_empty());
        assert_eq!(out.checkpoint.params, out.initial.params);
        assert_eq!(out.optimizer_steps, 0);
    }

    #[test]
    fn structural_weights_move_after_training() {
        let cfg = TrainConfig {
            qubits: 2,
            layers: 1,
            workers: 1,
            episodes: 2,
            seed: 3,
            ..TrainConfig::new(EnvName::Empty5x5)
        };
        let out = train(&cfg, 10).unwrap();
        let model = out.initial.to_model().unwrap();
        let w = model
            .param_layout()
            .into_iter()
            .find(|s| s.kind == SegmentKind::StructuralWeights)
            .unwrap()
            .range;
        assert_ne!(out.initial.params[w.clone()], out.checkpoint.params[w]);
        assert_eq!(out.log.records.len(), 2);
        assert_eq!(out.checkpoint.episodes, 2);
    }
}
