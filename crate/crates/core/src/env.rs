//! Seeded gridworld tasks in the style of MiniGrid's Empty and SimpleCrossing.
//!
//! Coordinates are `(x, y)` with `x` the column and `y` the row, `y`
//! growing downward. The agent always starts at `(1, 1)` facing east.
//!
//! Observations are the 7x7 window in front of the agent, agent at window
//! column 3, row 6, looking "up". Each cell is `(object, colour, state)`
//! with empty `(1,0,0)`, wall `(2,5,0)`, goal `(8,1,0)` and off-grid
//! `(0,0,0)`. The flat index of window cell `(col, row)` channel `c` is
//! `(col * 7 + row) * 3 + c`. Every window cell is visible.
//!
//! Environment randomness comes from `ChaCha8Rng::seed_from_u64(seed)`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const VIEW: usize = 7;
pub const OBS_LEN: usize = VIEW * VIEW * 3;
pub const N_ACTIONS: usize = 6;

pub const TURN_LEFT: usize = 0;
pub const TURN_RIGHT: usize = 1;
pub const FORWARD: usize = 2;

const MAX_LAYOUT_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvName {
    Empty5x5,
    Empty6x6,
    Empty8x8,
    /// 9x9 grid with `k` walls to cross, `k` in `1..=3`.
    SimpleCrossing(usize),
}

impl EnvName {
    pub const ALL: [EnvName; 6] = [
        EnvName::Empty5x5,
        EnvName::Empty6x6,
        EnvName::Empty8x8,
        EnvName::SimpleCrossing(1),
        EnvName::SimpleCrossing(2),
        EnvName::SimpleCrossing(3),
    ];

    pub fn size(self) -> usize {
        match self {
            EnvName::Empty5x5 => 5,
            EnvName::Empty6x6 => 6,
            EnvName::Empty8x8 => 8,
            EnvName::SimpleCrossing(_) => 9,
        }
    }

    pub fn max_steps(self) -> usize {
        4 * self.size() * self.size()
    }
}

impl fmt::Display for EnvName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvName::SimpleCrossing(k) => write!(f, "SimpleCrossing-S9N{k}"),
            e => write!(f, "Empty-{0}x{0}", e.size()),
        }
    }
}

impl FromStr for EnvName {
    type Err = Error;

    /// Accepts the short names (`Empty-5x5`, `SimpleCrossing-S9N2`) as well as
    /// the MiniGrid ids (`MiniGrid-Empty-5x5-v0`, `MiniGrid-SimpleCrossingS9N2-v0`).
    fn from_str(s: &str) -> Result<Self> {
        let short = s.strip_prefix("MiniGrid-").unwrap_or(s);
        let short = short.strip_suffix("-v0").unwrap_or(short);
        let name = match short {
            "Empty-5x5" => EnvName::Empty5x5,
            "Empty-6x6" => EnvName::Empty6x6,
            "Empty-8x8" => EnvName::Empty8x8,
            "SimpleCrossing-S9N1" | "SimpleCrossingS9N1" => EnvName::SimpleCrossing(1),
            "SimpleCrossing-S9N2" | "SimpleCrossingS9N2" => EnvName::SimpleCrossing(2),
            "SimpleCrossing-S9N3" | "SimpleCrossingS9N3" => EnvName::SimpleCrossing(3),
            _ => return Err(Error::Config(format!("unknown environment `{s}`"))),
        };
        Ok(name)
    }
}

impl serde::Serialize for EnvName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for EnvName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <String as serde::Deserialize>::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Empty,
    Wall,
    Goal,
}

impl Cell {
    fn encode(self) -> [f64; 3] {
        match self {
            Cell::Empty => [1.0, 0.0, 0.0],
            Cell::Wall => [2.0, 5.0, 0.0],
            Cell::Goal => [8.0, 1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    East,
    South,
    West,
    North,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::South,
        Direction::West,
        Direction::North,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }

    pub fn left(self) -> Self {
        Self::ALL[(self.index() + 3) % 4]
    }

    pub fn right(self) -> Self {
        Self::ALL[(self.index() + 1) % 4]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    size: usize,
    cells: Vec<Cell>,
}

impl Grid {
    /// Bordered empty square grid.
    pub fn bordered(size: usize) -> Self {
        let mut cells = vec![Cell::Empty; size * size];
        for i in 0..size {
            cells[i] = Cell::Wall;
            cells[(size - 1) * size + i] = Cell::Wall;
            cells[i * size] = Cell::Wall;
            cells[i * size + size - 1] = Cell::Wall;
        }
        Self { size, cells }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.size + x]
    }

    pub fn set(&mut self, x: usize, y: usize, cell: Cell) {
        self.cells[y * self.size + x] = cell;
    }

    fn get_signed(&self, x: i64, y: i64) -> Option<Cell> {
        let n = self.size as i64;
        if (0..n).contains(&x) && (0..n).contains(&y) {
            Some(self.get(x as usize, y as usize))
        } else {
            None
        }
    }

    pub fn goal(&self) -> Option<(usize, usize)> {
        let idx = self.cells.iter().position(|c| *c == Cell::Goal)?;
        Some((idx % self.size, idx / self.size))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentPose {
    pub x: usize,
    pub y: usize,
    pub dir: Direction,
}

impl AgentPose {
    pub const START: AgentPose = AgentPose {
        x: 1,
        y: 1,
        dir: Direction::East,
    };

    fn ahead(&self) -> (usize, usize) {
        let (dx, dy) = self.dir.delta();
        ((self.x as i64 + dx) as usize, (self.y as i64 + dy) as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct Env {
    name: EnvName,
    grid: Grid,
    pose: AgentPose,
    steps: usize,
    max_steps: usize,
    done: bool,
    rng: ChaCha8Rng,
}

/// Builds `name` seeded with `seed` and lays out the first episode.
pub fn make_env(name: EnvName, seed: u64) -> Result<Env> {
    let mut env = Env {
        name,
        grid: Grid::bordered(name.size()),
        pose: AgentPose::START,
        steps: 0,
        max_steps: name.max_steps(),
        done: false,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    env.reset()?;
    Ok(env)
}

impl Env {
    pub fn name(&self) -> EnvName {
        self.name
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn pose(&self) -> AgentPose {
        self.pose
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Starts a new episode. Crossing layouts are redrawn from the
    /// environment's RNG stream.
    pub fn reset(&mut self) -> Result<Vec<f64>> {
        self.grid = match self.name {
            EnvName::SimpleCrossing(k) => crossing_layout(k, &mut self.rng)?,
            _ => {
                let n = self.name.size();
                let mut g = Grid::bordered(n);
                g.set(n - 2, n - 2, Cell::Goal);
                g
            }
        };
        self.pose = AgentPose::START;
        self.steps = 0;
        self.done = false;
        Ok(self.observe())
    }

    pub fn step(&mut self, action: usize) -> Result<Step> {
        if self.done {
            return Err(Error::Contract("step called on a finished episode".into()));
        }
        if action >= N_ACTIONS {
            return Err(Error::Config(format!("action {action} outside 0..{N_ACTIONS}")));
        }
        self.steps += 1;
        match action {
            TURN_LEFT => self.pose.dir = self.pose.dir.left(),
            TURN_RIGHT => self.pose.dir = self.pose.dir.right(),
            FORWARD => {
                let (x, y) = self.pose.ahead();
                if self.grid.get(x, y) != Cell::Wall {
                    self.pose.x = x;
                    self.pose.y = y;
                }
            }
            _ => {}
        }
        let mut reward = 0.0;
        if self.grid.get(self.pose.x, self.pose.y) == Cell::Goal {
            reward = 1.0 - 0.9 * (self.steps as f64 / self.max_steps as f64);
            self.done = true;
        } else if self.steps >= self.max_steps {
            self.done = true;
        }
        Ok(Step {
            observation: self.observe(),
            reward,
            done: self.done,
        })
    }

    pub fn observe(&self) -> Vec<f64> {
        observe(&self.grid, self.pose)
    }
}

/// Egocentric 7x7x3 encoding of `grid` as seen from `pose`.
pub fn observe(grid: &Grid, pose: AgentPose) -> Vec<f64> {
    let mut obs = vec![0.0; OBS_LEN];
    let (fx, fy) = pose.dir.delta();
    let (rx, ry) = pose.dir.right().delta();
    for col in 0..VIEW {
        for row in 0..VIEW {
            let fwd = (VIEW - 1 - row) as i64;
            let side = col as i64 - (VIEW / 2) as i64;
            let wx = pose.x as i64 + fwd * fx + side * rx;
            let wy = pose.y as i64 + fwd * fy + side * ry;
            if let Some(cell) = grid.get_signed(wx, wy) {
                let base = (col * VIEW + row) * 3;
                obs[base..base + 3].copy_from_slice(&cell.encode());
            }
        }
    }
    obs
}

/// `k` full-span walls on distinct lines from `{2, 4, 6}`, alternating
/// vertical/horizontal in draw order, each with one gap placed uniformly
/// among its cells that do not lie on another wall. Layouts without a path
/// from start to goal are redrawn.
fn crossing_layout(k: usize, rng: &mut ChaCha8Rng) -> Result<Grid> {
    const SIZE: usize = 9;
    if !(1..=3).contains(&k) {
        return Err(Error::Config(format!("crossing count {k} outside 1..=3")));
    }
    for _ in 0..MAX_LAYOUT_ATTEMPTS {
        let mut lines = [2usize, 4, 6];
        lines.shuffle(rng);
        let rivers: Vec<(bool, usize)> = lines[..k]
            .iter()
            .enumerate()
            .map(|(i, &c)| (i % 2 == 0, c))
            .collect();

        let mut grid = Grid::bordered(SIZE);
        for &(vertical, c) in &rivers {
            for t in 1..SIZE - 1 {
                if vertical {
                    grid.set(c, t, Cell::Wall);
                } else {
                    grid.set(t, c, Cell::Wall);
                }
            }
        }
        for &(vertical, c) in &rivers {
            let crossing: Vec<usize> = rivers
                .iter()
                .filter(|(v, _)| *v != vertical)
                .map(|(_, c)| *c)
                .collect();
            let options: Vec<usize> = (1..SIZE - 1).filter(|t| !crossing.contains(t)).collect();
            let gap = options[rng.random_range(0..options.len())];
            if vertical {
                grid.set(c, gap, Cell::Empty);
            } else {
                grid.set(gap, c, Cell::Empty);
            }
        }
        grid.set(SIZE - 2, SIZE - 2, Cell::Goal);
        if bfs_shortest_steps(&grid, AgentPose::START, (SIZE - 2, SIZE - 2)).is_some() {
            return Ok(grid);
        }
    }
    Err(Error::Config(format!(
        "no reachable crossing layout after {MAX_LAYOUT_ATTEMPTS} attempts"
    )))
}

/// Fewest turn/forward actions taking `start` onto `goal`.
pub fn bfs_shortest_steps(grid: &Grid, start: AgentPose, goal: (usize, usize)) -> Option<usize> {
    bfs_optimal_actions(grid, start, goal).map(|a| a.len())
}

/// One shortest action sequence from `start` to `goal` over `(x, y, dir)` states.
pub fn bfs_optimal_actions(grid: &Grid, start: AgentPose, goal: (usize, usize)) -> Option<Vec<usize>> {
    let n = grid.size();
    let key = |p: &AgentPose| (p.y * n + p.x) * 4 + p.dir.index();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n * n * 4];
    let mut seen = vec![false; n * n * 4];
    let mut queue = VecDeque::new();
    seen[key(&start)] = true;
    queue.push_back(start);

    while let Some(pose) = queue.pop_front() {
        if (pose.x, pose.y) == goal {
            let mut actions = Vec::new();
            let mut k = key(&pose);
            while let Some((prev, action)) = parent[k] {
                actions.push(action);
                k = prev;
            }
            actions.reverse();
            return Some(actions);
        }
        let (ax, ay) = pose.ahead();
        let moves = [
            (TURN_LEFT, AgentPose { dir: pose.dir.left(), ..pose }),
            (TURN_RIGHT, AgentPose { dir: pose.dir.right(), ..pose }),
            (
                FORWARD,
                if grid.get(ax, ay) == Cell::Wall {
                    pose
                } else {
                    AgentPose { x: ax, y: ay, ..pose }
                },
            ),
        ];
        for (action, next) in moves {
            let k = key(&next);
            if !seen[k] {
                seen[k] = true;
                parent[k] = Some((key(&pose), action));
                queue.push_back(next);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(obs: &[f64], col: usize, row: usize) -> [f64; 3] {
        let b = (col * VIEW + row) * 3;
        [obs[b], obs[b + 1], obs[b + 2]]
    }

    #[test]
    fn names_round_trip() {
        for name in EnvName::ALL {
            assert_eq!(name.to_string().parse::<EnvName>().unwrap(), name);
        }
        assert_eq!("MiniGrid-Empty-8x8-v0".parse::<EnvName>().unwrap(), EnvName::Empty8x8);
        assert_eq!(
            "MiniGrid-SimpleCrossingS9N2-v0".parse::<EnvName>().unwrap(),
            EnvName::SimpleCrossing(2)
        );
        assert!("Empty-7x7".parse::<EnvName>().is_err());
    }

    #[test]
    fn empty_layout() {
        let env = make_env(EnvName::Empty5x5, 0).unwrap();
        let g = env.grid();
        assert_eq!(g.goal(), Some((3, 3)));
        for y in 0..5 {
            for x in 0..5 {
                let border = x == 0 || y == 0 || x == 4 || y == 4;
                let expect = if border {
                    Cell::Wall
                } else if (x, y) == (3, 3) {
                    Cell::Goal
                } else {
                    Cell::Empty
                };
                assert_eq!(g.get(x, y), expect, "({x},{y})");
            }
        }
        assert_eq!(env.max_steps(), 100);
        assert_eq!(env.pose(), AgentPose::START);
    }

    #[test]
    fn optimal_path_on_empty_5x5() {
        let mut env = make_env(EnvName::Empty5x5, 0).unwrap();
        let path = [FORWARD, FORWARD, TURN_RIGHT, FORWARD, FORWARD];
        for (i, a) in path.iter().enumerate() {
            let s = env.step(*a).unwrap();
            if i < 4 {
                assert_eq!(s.reward, 0.0);
                assert!(!s.done);
            } else {
                assert!(s.done);
                assert_eq!(s.reward, 1.0 - 0.9 * 5.0 / 100.0);
                assert!((s.reward - 0.955).abs() < 1e-15);
            }
        }
        assert!(matches!(env.step(FORWARD), Err(Error::Contract(_))));
    }

    #[test]
    fn blocked_move_still_costs_a_step() {
        let mut env = make_env(EnvName::Empty5x5, 0).unwrap();
        env.step(TURN_LEFT).unwrap();
        let before = env.pose();
        let s = env.step(FORWARD).unwrap();
        assert_eq!(env.pose(), before);
        assert_eq!(s.reward, 0.0);
        assert_eq!(env.steps(), 2);
    }

    #[test]
    fn inert_actions_and_timeout() {
        let mut env = make_env(EnvName::Empty5x5, 0).unwrap();
        for i in 0..100 {
            let s = env.step(3 + i % 3).unwrap();
            assert_eq!(s.reward, 0.0);
            assert_eq!(s.done, i == 99);
        }
        assert_eq!(env.pose(), AgentPose::START);
        assert!(env.step(0).is_err());
        assert!(make_env(EnvName::Empty5x5, 0).unwrap().step(6).is_err());
    }

    #[test]
    fn goal_visible_in_start_window() {
        // East-facing at (1,1): forward is +x, right is +y. The goal (3,3) is
        // 2 ahead and 2 to the right: window col 3+2, row 6-2.
        let env = make_env(EnvName::Empty5x5, 0).unwrap();
        let obs = env.observe();
        assert_eq!(obs.len(), 147);
        assert_eq!(window(&obs, 5, 4), [8.0, 1.0, 0.0]);
        // agent's own cell and the wall directly to its left
        assert_eq!(window(&obs, 3, 6), [1.0, 0.0, 0.0]);
        assert_eq!(window(&obs, 2, 6), [2.0, 5.0, 0.0]);
        // far row lies 6 cells ahead at x = 7: off-grid
        for col in 0..VIEW {
            assert_eq!(window(&obs, col, 0), [0.0; 3]);
        }
        let goals = obs.chunks(3).filter(|c| c[0] == 8.0).count();
        assert_eq!(goals, 1);
    }

    #[test]
    fn turning_back_restores_observation() {
        let mut env = make_env(EnvName::Empty6x6, 3).unwrap();
        let before = env.observe();
        env.step(TURN_LEFT).unwrap();
        let s = env.step(TURN_RIGHT).unwrap();
        assert_eq!(s.observation, before);
    }

    #[test]
    fn bfs_examples() {
        let g5 = make_env(EnvName::Empty5x5, 0).unwrap().grid().clone();
        assert_eq!(bfs_shortest_steps(&g5, AgentPose::START, (3, 3)), Some(5));
        assert_eq!(bfs_shortest_steps(&g5, AgentPose::START, (2, 1)), Some(1));
        assert_eq!(bfs_shortest_steps(&g5, AgentPose::START, (1, 1)), Some(0));
        let g8 = make_env(EnvName::Empty8x8, 0).unwrap().grid().clone();
        assert_eq!(bfs_shortest_steps(&g8, AgentPose::START, (6, 6)), Some(11));
    }

    #[test]
    fn crossing_layouts_are_reachable() {
        for k in 1..=3 {
            for seed in 0..20 {
                let env = make_env(EnvName::SimpleCrossing(k), seed).unwrap();
                let g = env.grid();
                assert_eq!(g.goal(), Some((7, 7)));
                assert!(bfs_shortest_steps(g, AgentPose::START, (7, 7)).is_some());
            }
        }
    }

    #[test]
    fn determinism() {
        let run = || {
            let mut env = make_env(EnvName::SimpleCrossing(2), 17).unwrap();
            let mut trace = vec![env.observe()];
            for a in [2, 2, 1, 2, 0, 2, 2, 2, 1, 2] {
                let s = env.step(a).unwrap();
                trace.push(s.observation);
                trace.push(vec![s.reward]);
            }
            trace
        };
        assert_eq!(run(), run());
    }
}
