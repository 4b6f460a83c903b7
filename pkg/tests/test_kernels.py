"""Backend parity: the compiled kernel and the numpy kernel must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from codedstream import kernels
from codedstream.stochastic import (
    FAMILY_DETERMINISTIC,
    FAMILY_EXPONENTIAL,
    FAMILY_SHIFTED_GAMMA,
)

CYTHON_AVAILABLE = "cython" in kernels.available_backends()

needs_cython = pytest.mark.skipif(
    not CYTHON_AVAILABLE, reason="compiled kernel not built"
)


def mixed_args(n_jobs=40, iterations=3, critical=6, purging=True, record_trace=False):
    """Three workers spanning all task-time families."""
    return dict(
        seed=2024,
        kappa=np.array([3, 4, 2], dtype=np.int64),
        comm=np.array([0.1, 0.2, 0.05]),
        family=np.array(
            [FAMILY_DETERMINISTIC, FAMILY_EXPONENTIAL, FAMILY_SHIFTED_GAMMA],
            dtype=np.int64,
        ),
        par0=np.array([0.5, 2.0, 0.1]),  # det mean / exp rate / gamma shift
        par1=np.array([0.0, 0.0, 2.5]),  # gamma shape
        par2=np.array([0.0, 0.0, 0.3]),  # gamma scale
        n_jobs=n_jobs,
        iterations=iterations,
        critical=critical,
        purging=purging,
        record_trace=record_trace,
    )


class TestBackendSelection:
    def test_python_always_available(self):
        backends = kernels.available_backends()
        assert "python" in backends
        assert kernels.BACKEND in backends

    @needs_cython
    def test_compiled_kernel_preferred(self):
        assert kernels.available_backends()[0] == "cython"
        assert kernels.BACKEND == "cython"

    @pytest.mark.parametrize("choice", ["python"] + (["cython"] if CYTHON_AVAILABLE else []))
    def test_env_override(self, choice):
        out = subprocess.run(
            [sys.executable, "-c", "from codedstream import kernels; print(kernels.BACKEND)"],
            env={**os.environ, "CODEDSTREAM_BACKEND": choice},
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == choice

    def test_env_override_rejects_unknown(self):
        out = subprocess.run(
            [sys.executable, "-c", "import codedstream.kernels"],
            env={**os.environ, "CODEDSTREAM_BACKEND": "fortran"},
            capture_output=True,
            text=True,
        )
        assert out.returncode != 0
        assert "CODEDSTREAM_BACKEND" in out.stderr


class TestPythonKernel:
    def test_deterministic_worker_arithmetic(self):
        from codedstream import _kernel_py

        args = mixed_args()
        args.update(
            kappa=np.array([3], dtype=np.int64),
            comm=np.array([1.0]),
            family=np.array([FAMILY_DETERMINISTIC], dtype=np.int64),
            par0=np.array([2.0]),
            par1=np.array([0.0]),
            par2=np.array([0.0]),
            critical=3,
            purging=False,
        )
        durations, completed, _ = _kernel_py.iteration_durations(**args)
        np.testing.assert_allclose(durations, 7.0)  # 1 + 3*2
        assert np.all(completed == 3)

    def test_deterministic_purge_cuts_at_kth_task(self):
        from codedstream import _kernel_py

        args = mixed_args()
        args.update(
            kappa=np.array([3], dtype=np.int64),
            comm=np.array([1.0]),
            family=np.array([FAMILY_DETERMINISTIC], dtype=np.int64),
            par0=np.array([2.0]),
            par1=np.array([0.0]),
            par2=np.array([0.0]),
            critical=2,
            purging=True,
        )
        durations, completed, _ = _kernel_py.iteration_durations(**args)
        np.testing.assert_allclose(durations, 5.0)  # 1 + 2*2
        assert np.all(completed == 2)

    def test_same_seed_reproduces_bitwise(self):
        from codedstream import _kernel_py

        d1, c1, _ = _kernel_py.iteration_durations(**mixed_args())
        d2, c2, _ = _kernel_py.iteration_durations(**mixed_args())
        np.testing.assert_array_equal(d1, d2)
        np.testing.assert_array_equal(c1, c2)

    def test_purging_never_slower(self):
        from codedstream import _kernel_py

        purge, completed_p, _ = _kernel_py.iteration_durations(**mixed_args(purging=True))
        full, completed_f, _ = _kernel_py.iteration_durations(**mixed_args(purging=False))
        assert np.all(purge <= full)
        assert np.any(purge < full)
        assert np.all(completed_p >= 6) and np.all(completed_p <= 9)
        assert np.all(completed_f == 9)

    def test_trace_end_times_bound_durations(self):
        from codedstream import _kernel_py

        args = mixed_args(purging=True, record_trace=True)
        durations, _, worker_end = _kernel_py.iteration_durations(**args)
        assert worker_end.shape == (40, 3, 3)
        assert np.all(worker_end <= durations[:, :, None] + 1e-12)
        np.testing.assert_allclose(worker_end.max(axis=2), durations, rtol=1e-12)

        args = mixed_args(purging=False, record_trace=True)
        durations, _, worker_end = _kernel_py.iteration_durations(**args)
        np.testing.assert_allclose(worker_end.max(axis=2), durations, rtol=1e-12)

    def test_zero_load_worker_is_skipped(self):
        from codedstream import _kernel_py

        args = mixed_args()
        args["kappa"] = np.array([3, 0, 2], dtype=np.int64)
        args["critical"] = 4
        durations, completed, _ = _kernel_py.iteration_durations(**args)
        assert durations.shape == (40, 3)
        assert np.all(completed >= 4) and np.all(completed <= 5)


@needs_cython
class TestBackendParity:
    @pytest.mark.parametrize("purging", [True, False])
    def test_mixed_families_agree(self, purging):
        from codedstream import _kernel_c, _kernel_py

        args = mixed_args(n_jobs=60, iterations=4, purging=purging, record_trace=True)
        d_py, c_py, w_py = _kernel_py.iteration_durations(**args)
        d_cy, c_cy, w_cy = _kernel_c.iteration_durations(**args)
        np.testing.assert_allclose(d_cy, d_py, rtol=1e-12)
        np.testing.assert_array_equal(c_cy, c_py)
        np.testing.assert_allclose(w_cy, w_py, rtol=1e-12, atol=1e-13)

    def test_large_run_statistics_agree(self):
        from codedstream import _kernel_c, _kernel_py

        args = mixed_args(n_jobs=2000, iterations=2, purging=True)
        d_py, c_py, _ = _kernel_py.iteration_durations(**args)
        d_cy, c_cy, _ = _kernel_c.iteration_durations(**args)
        np.testing.assert_allclose(d_cy, d_py, rtol=1e-12)
        np.testing.assert_array_equal(c_cy, c_py)
