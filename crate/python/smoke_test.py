"""Smoke test for the usvp_py extension module.

Build and install first:
    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
"""

import math

import usvp_py as u


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    cdf = u.EnergyCdf("dd-us-gaussian", 8, 0.5)
    close(cdf.mean(), 1.5, 1e-9)
    xi, mu, var = cdf.order_stats(0.5)
    assert 0 < mu < 0.5 * xi and var > 0

    sel = u.SelectionModel("dd-us-qpsk", 16, 0.8, 0.4)
    close(sel.marginal_probability(), 0.4, 1e-9)
    h = 1 / math.sqrt(2)
    close(sel.selection_given_symbols([complex(h, -h)] * 16), 0.4, 1e-9)

    q0, pen = u.solve_rs_t_inf("dd-us-gaussian", 1.0, 0.5)
    close(pen, 2.0, 1e-9)
    rs = u.solve_rs(2.0, 0.2, 8, "dd-us-gaussian")
    assert rs["q0"] > 0 and rs["residual"] < 1e-6

    close(u.qpsk_mi(1e6), 2.0, 1e-3)
    bound, mi, q = u.sum_rate_bound(4.0, 0.1, 64, "dd-us-qpsk", 5.0)
    assert 0 < bound < 4 * 0.1 * 2 + 1

    rep = u.empirical_penalty(40, 20, 20, 1, "dd-us-gaussian", 10, 3, "zfbf-full")
    assert rep["trials"] == 10 and 1.5 < rep["mean"] < 2.6

    users, p = u.greedy_dd_us([[1, 0], [0, 2]], [[1, 1]], 1)
    assert users == [1] and abs(p - 0.25) < 1e-12

    csv = u.run_sweep("penalty-sweep", T="8", alpha="2", alphakappa_grid="0.2,1.0")
    lines = csv.strip().split("\n")
    assert lines[0].startswith("scheme,assumption,alpha")
    assert len(lines) == 3 and "skipped" in lines[2]

    for check_id, outcome, detail in u.validate("math"):
        assert outcome == "PASS", (check_id, detail)

    try:
        u.EnergyCdf("bpsk", 8, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown scheme accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
