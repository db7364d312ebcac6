import numpy as np
import pytest

from blocknorm.norms import UINorm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_complex(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pivoted_cholesky_ok(a, shift):
    """Independent PSD oracle: pivoted Cholesky of ``a + shift*I`` runs to completion."""
    a = (np.array(a, dtype=complex) + np.array(a, dtype=complex).conj().T) / 2
    a = a + shift * np.eye(a.shape[0])
    n = a.shape[0]
    for k in range(n):
        piv = k + int(np.argmax(np.real(np.diag(a)[k:])))
        a[[k, piv], :] = a[[piv, k], :]
        a[:, [k, piv]] = a[:, [piv, k]]
        d = a[k, k].real
        if d <= 0:
            return bool(np.all(np.abs(a[k:, k:]) <= 1e-300))
        col = a[k + 1 :, k] / np.sqrt(d)
        a[k + 1 :, k + 1 :] -= np.outer(col, col.conj())
    return True


def cofactor_det3(m):
    m = np.asarray(m, dtype=float)
    return (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def norm_grid(n):
    """Norm instances on M_n used by the property and acceptance tests."""
    norms = [UINorm.schatten(p, n) for p in (1.0, 1.5, 2.0, 3.0, np.inf)]
    norms += [UINorm.kyfan(r, n) for r in range(1, n + 1)]
    ones = [1.0] * n
    norms.append(UINorm.cnorm(ones))
    norms.append(UINorm.cnorm([2.0] * n))
    norms.append(UINorm.cnorm([1.0] + [0.5] * (n - 1)))
    if n >= 2:
        norms.append(UINorm.cnorm([1.0, 1.0] + [0.25] * (n - 2)))
        norms.append(UINorm.maxc([[1.0] + [0.0] * (n - 1), [0.5] * n]))
        norms.append(UINorm.maxc([[3.0] + [1.0] * (n - 1), [2.0, 2.0] + [0.0] * (n - 2)]))
    if n >= 3:
        norms.append(UINorm.cnorm([1.0, 1.0, 1.0] + [0.0] * (n - 3)))
    return norms


# -- acceptance summary ---------------------------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, title = marker.args
        detail = dict(item.user_properties).get("detail", "")
        _CRITERIA[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
