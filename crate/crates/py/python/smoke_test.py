"""Quick end-to-end check of the diffqas extension module.

Build and install first, e.g.

    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/diffqas-*.whl

then run ``python crates/py/python/smoke_test.py``.
"""

import json
import math
import os
import tempfile

import diffqas


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    descs = diffqas.enumerate_descriptors(4, 1)
    assert len(descs) == diffqas.N_CANDIDATES == 36
    assert diffqas.baseline(1, 8, 2) == "H+|encY|chain|varY|L2|Q8"

    # One qubit, RY(x) then RY(theta): <Z> = cos(x + theta).
    d = "H-|encY|chain|varY|L1|Q1"
    (z,) = diffqas.run_circuit(d, [0.3], [0.4])
    assert abs(z - math.cos(0.7)) < 1e-12

    x, theta = [0.1, -0.7, 1.2, 0.5], [0.3 * i - 1.0 for i in range(4)]
    jp, jx = diffqas.param_shift_gradients(descs[7], x, theta)
    up = [1.0, -0.5, 0.25, 2.0]
    _, gp, gx = diffqas.adjoint_vjp(descs[7], x, theta, up)
    vjp_p = [sum(up[r] * jp[r][c] for r in range(4)) for c in range(len(theta))]
    vjp_x = [sum(up[r] * jx[r][c] for r in range(4)) for c in range(4)]
    assert close(gp, vjp_p, 1e-8) and close(gx, vjp_x, 1e-8)

    block = diffqas.EnsembleBlock(4, 1, seed=3)
    block.weights = [1.0 if j == 5 else 0.0 for j in range(36)]
    assert block.forward(x) == diffqas.run_circuit(block.descriptors[5], x, block.thetas[5])
    assert block.top_candidates(1)[0][0] == 5

    model = diffqas.ActorCritic("diffqas", 8, 2, 1, seed=0)
    assert model.n_params == 1859
    env = diffqas.Env("Empty-5x5", seed=0)
    obs = env.reset()
    assert len(obs) == diffqas.OBS_LEN
    logits, value = model.forward(obs)
    assert len(logits) == diffqas.N_ACTIONS and math.isfinite(value)

    reward, done = 0.0, False
    for a in env.optimal_actions():
        obs, reward, done = env.step(a)
    assert done and abs(reward - 0.955) < 1e-12

    r = diffqas.n_step_returns([0.0, 0.0, 1.0], 0.0, 0.9)
    assert close(r, [0.81, 0.9, 1.0], 1e-12)

    out = diffqas.train("Empty-5x5", mode="baseline-1", workers=2, episodes=20, seed=1, window=10)
    assert len(out["scores"]) == 20
    ck = json.loads(out["checkpoint"])
    assert ck["episodes"] == 20

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "ck.json")
        with open(path, "w") as f:
            f.write(diffqas.ActorCritic("diffqas", 4, 1, 2, seed=0).checkpoint_json(0))
        rows = diffqas.report_architecture(path)
        assert len(rows) == 72 and all(abs(w - 1 / 36) < 1e-15 for *_, w in rows)

    try:
        diffqas.Env("Nowhere-3x3")
    except ValueError:
        pass
    else:
        raise AssertionError("bad env name accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
