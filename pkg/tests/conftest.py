import pytest
from hypothesis import strategies as st

from hmec.cipher import CipherKey, Mode
from hmec.primitives.hill import HillKey

REFERENCE_MATRIX = ((3, 5), (7, 2))  # det = -29, odd


def make_key(r: float = 3.987654321, x0: float = 0.41, n1: int = 3, n2: int = 4, matrix=REFERENCE_MATRIX) -> CipherKey:
    return CipherKey(r=r, x0=x0, n1=n1, n2=n2, hill=HillKey(matrix=matrix))


@pytest.fixture
def key() -> CipherKey:
    return make_key()


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("HMEC_WORKERS", "1")
    monkeypatch.delenv("TEMPORAL_API_KEY", raising=False)


odd_matrices = st.tuples(
    st.tuples(st.integers(0, 127), st.integers(0, 127)),
    st.tuples(st.integers(0, 127), st.integers(0, 127)),
).filter(lambda m: (m[0][0] * m[1][1] - m[0][1] * m[1][0]) % 2 == 1)

cipher_keys = st.builds(
    lambda nanos, x0, n1, n2, matrix: CipherKey(r=nanos / 1e9, x0=x0, n1=n1, n2=n2, hill=HillKey(matrix=matrix)),
    st.integers(3_570_000_000, 4_000_000_000),
    st.floats(min_value=1e-6, max_value=1 - 1e-6, allow_nan=False),
    st.integers(1, 8),
    st.integers(1, 8),
    odd_matrices,
)

modes = st.sampled_from(list(Mode))
