"""Shared fixtures: deterministic synthetic data files for CLI tests."""

import numpy as np
import pytest

from copbands import frank_conditional_sample


@pytest.fixture
def frank_xy(tmp_path):
    """Factory writing a Frank-copula x,y CSV; returns the file path."""

    def make(theta=1.0, n=500, seed=7, name="sample.csv"):
        rng = np.random.default_rng(seed)
        u = rng.random(n)
        v = np.asarray(frank_conditional_sample(theta, u, rng.random(n)))
        lines = ["x,y"]
        lines += [f"{float(a)!r},{float(b)!r}" for a, b in zip(u, v)]
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return make
