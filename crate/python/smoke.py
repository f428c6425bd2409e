"""Smoke test for the qagents_py extension.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/python/Cargo.toml`.
"""

import math

import qagents_py as qa


def main():
    p0, p1, abort = qa.honest_coinflip()
    assert abs(p0 - 0.5) < 1e-10 and abs(p1 - 0.5) < 1e-10 and abort < 1e-10

    qft = qa.defaults("qft")
    assert qa.evaluate(qft, qa.qft_circuit(4)) > 1 - 1e-12

    out = qa.train(qa.defaults("chsh"))
    tsirelson = math.cos(math.pi / 8) ** 2
    assert out["reward"] > tsirelson - 1e-4, out["reward"]
    assert abs(out["f_a"] - out["f_b"]) < 1e-6
    assert len(out["log"].splitlines()) == len(out["rewards"])

    again = qa.train(qa.defaults("chsh"))
    assert again["log"] == out["log"]

    short = qa.train(qa.defaults("qft"), {"n": 3, "epochs": 10})
    assert len(short["rewards"]) <= 10

    try:
        qa.train("task = qft\nn = 0\n")
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    print(f"ok: chsh {out['reward']:.6f}, honest coin ({p0:.3f}, {p1:.3f})")


if __name__ == "__main__":
    main()
