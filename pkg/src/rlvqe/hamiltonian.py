"""Qubit Hamiltonians as weighted sums of Pauli strings.

A Hamiltonian is H = sum_j c_j P_j with real coefficients c_j (Hartree) and
P_j a tensor product of single-qubit operators from {I, X, Y, Z}.  Strings are
written with the qubit-0 operator leftmost, i.e. ``ops[q]`` acts on qubit q.

The text file format is one term per line: a decimal coefficient, whitespace,
then the Pauli string.  Blank lines and lines starting with '#' are ignored.
Duplicate strings are merged by coefficient addition.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

PAULI_LABELS = ("I", "X", "Y", "Z")

# Dense 2x2 matrices, used only for the exact-diagonalization oracle.
_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Dense diagonalization beyond this many qubits is pointless as a test oracle.
DENSE_DIAGONALIZATION_LIMIT = 12


class HamiltonianParseError(ValueError):
    """Raised when a Hamiltonian document violates the line format."""


class HamiltonianSizeError(ValueError):
    """Raised when an operation refuses a Hamiltonian as too large."""


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis; ``ops[q]`` acts on qubit q."""

    ops: str

    def __post_init__(self) -> None:
        if not self.ops:
            raise ValueError("Pauli string must not be empty")
        bad = set(self.ops) - set(PAULI_LABELS)
        if bad:
            raise ValueError(f"invalid Pauli labels {sorted(bad)} in {self.ops!r}")

    @property
    def num_qubits(self) -> int:
        return len(self.ops)

    def __str__(self) -> str:
        return self.ops


@dataclass(frozen=True)
class PauliHamiltonian:
    """Weighted sum of Pauli strings on a fixed qubit register.

    Terms are stored with duplicates already merged; construction rejects
    empty term lists, non-finite coefficients, and mixed string lengths.
    """

    num_qubits: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("Hamiltonian must have at least one term")
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        seen = set()
        for coeff, string in self.terms:
            if not np.isfinite(coeff):
                raise ValueError(f"non-finite coefficient {coeff!r}")
            if string.num_qubits != self.num_qubits:
                raise ValueError(
                    f"string {string} has {string.num_qubits} qubits, "
                    f"expected {self.num_qubits}"
                )
            if string.ops in seen:
                raise ValueError(f"duplicate Pauli string {string}")
            seen.add(string.ops)

    @classmethod
    def from_terms(cls, terms) -> "PauliHamiltonian":
        """Build from (coefficient, string) pairs, merging duplicates.

        Strings may be raw str or PauliString; qubit count is inferred.
        """
        merged: dict[str, float] = {}
        order: list[str] = []
        for coeff, string in terms:
            ops = string.ops if isinstance(string, PauliString) else str(string)
            if ops not in merged:
                merged[ops] = 0.0
                order.append(ops)
            merged[ops] += float(coeff)
        if not order:
            raise ValueError("Hamiltonian must have at least one term")
        num_qubits = len(order[0])
        return cls(
            num_qubits=num_qubits,
            terms=tuple((merged[ops], PauliString(ops)) for ops in order),
        )


def parse_hamiltonian(text: str) -> PauliHamiltonian:
    """Parse the one-term-per-line text format.

    Raises HamiltonianParseError naming the offending line on a malformed
    coefficient, an invalid or inconsistent-length Pauli string, or an
    empty document.
    """
    terms: list[tuple[float, str]] = []
    expected_len: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise HamiltonianParseError(
                f"line {lineno}: expected '<coefficient> <pauli-string>', got {raw!r}"
            )
        coeff_text, string_text = fields
        # Chemistry exporters occasionally emit the Unicode minus sign.
        coeff_text = coeff_text.replace("−", "-")
        try:
            coeff = float(coeff_text)
        except ValueError:
            raise HamiltonianParseError(
                f"line {lineno}: malformed coefficient {fields[0]!r}"
            ) from None
        if not np.isfinite(coeff):
            raise HamiltonianParseError(
                f"line {lineno}: non-finite coefficient {fields[0]!r}"
            )
        string_text = string_text.upper()
        if set(string_text) - set(PAULI_LABELS):
            raise HamiltonianParseError(
                f"line {lineno}: invalid Pauli string {fields[1]!r}"
            )
        if expected_len is None:
            expected_len = len(string_text)
        elif len(string_text) != expected_len:
            raise HamiltonianParseError(
                f"line {lineno}: string length {len(string_text)} inconsistent "
                f"with earlier length {expected_len}"
            )
        terms.append((coeff, string_text))
    if not terms:
        raise HamiltonianParseError("document contains no Hamiltonian terms")
    return PauliHamiltonian.from_terms(terms)


def load_hamiltonian(path: str | Path) -> PauliHamiltonian:
    """Read and parse a Hamiltonian file."""
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"))


def serialize_hamiltonian(h: PauliHamiltonian) -> str:
    """Inverse of parse_hamiltonian; repr() keeps coefficients exact."""
    lines = [f"{coeff!r} {string}" for coeff, string in h.terms]
    return "\n".join(lines) + "\n"


def lower_bound(h: PauliHamiltonian) -> float:
    """Cheap lower bound on the ground energy: -sum_j |c_j|.

    Valid because each Pauli string has operator norm 1, so the spectrum of
    H lies within [-sum|c_j|, +sum|c_j|].
    """
    return -sum(abs(coeff) for coeff, _ in h.terms)


def dense_matrix(h: PauliHamiltonian) -> np.ndarray:
    """Dense 2^n x 2^n Hermitian matrix of h, little-endian qubit order.

    Refuses registers above DENSE_DIAGONALIZATION_LIMIT qubits.
    """
    if h.num_qubits > DENSE_DIAGONALIZATION_LIMIT:
        raise HamiltonianSizeError(
            f"dense matrix refused for {h.num_qubits} qubits "
            f"(limit {DENSE_DIAGONALIZATION_LIMIT})"
        )
    dim = 2**h.num_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, string in h.terms:
        term = np.ones((1, 1), dtype=complex)
        # Little-endian: qubit 0 is the least significant bit, so it sits
        # rightmost in the Kronecker chain.
        for q in reversed(range(h.num_qubits)):
            term = np.kron(term, _PAULI_MATRICES[string.ops[q]])
        out += coeff * term
    return out


def exact_ground_energy(h: PauliHamiltonian) -> float:
    """Minimum eigenvalue by dense diagonalization; the test/reference oracle."""
    return float(np.linalg.eigvalsh(dense_matrix(h))[0])
