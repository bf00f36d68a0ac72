"""Sparse sums of Pauli strings.

Conventions used throughout the package:

* A Pauli word is a string over ``IXYZ`` whose character at position ``j``
  acts on qubit ``j`` (qubit 0 is the leftmost character).
* Computational basis states are labelled by integers whose bit ``j``
  (least-significant bit = qubit 0) is the value of qubit ``j``.
* ``|1>`` is the *+1* eigenstate of ``Z``, so the occupation-number
  operator of qubit ``j`` is ``(Z_j + I)/2``.  This is the natural choice
  for fermionic occupation problems; it flips the sign of ``Z`` relative
  to the common ``Z|0> = +|0>`` convention.

With these choices the single-qubit actions are::

    X|b> = |1-b>      Y|1> = i|0>,  Y|0> = -i|1>      Z|b> = (2b-1)|b>

and the usual Pauli multiplication table (X*Y = iZ and cyclic) holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

PAULI_CHARS = "IXYZ"

# (a, b) -> (phase, product) for single-qubit Pauli multiplication.
_PRODUCT: dict[tuple[str, str], tuple[complex, str]] = {}
for _a in PAULI_CHARS:
    _PRODUCT[("I", _a)] = (1.0, _a)
    _PRODUCT[(_a, "I")] = (1.0, _a)
    _PRODUCT[(_a, _a)] = (1.0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1.0j, _c)
    _PRODUCT[(_b, _a)] = (-1.0j, _c)

DEFAULT_DROP_TOL = 1e-14


@dataclass(frozen=True)
class PauliTerm:
    """One weighted Pauli word."""

    coeff: complex
    word: str

    def __post_init__(self) -> None:
        bad = set(self.word) - set(PAULI_CHARS)
        if bad:
            raise ValueError(f"invalid Pauli characters {sorted(bad)} in {self.word!r}")


class PauliSum:
    """Immutable weighted sum of Pauli words on a fixed number of qubits."""

    __slots__ = ("num_qubits", "_terms")

    def __init__(self, num_qubits: int, terms: Iterable[PauliTerm | tuple[complex, str]] = ()):
        if num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        converted = []
        for t in terms:
            if not isinstance(t, PauliTerm):
                t = PauliTerm(complex(t[0]), t[1])
            if len(t.word) != num_qubits:
                raise ValueError(
                    f"word {t.word!r} has length {len(t.word)}, expected {num_qubits}"
                )
            converted.append(t)
        self.num_qubits = num_qubits
        self._terms: tuple[PauliTerm, ...] = tuple(converted)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, num_qubits: int) -> "PauliSum":
        return cls(num_qubits)

    @classmethod
    def identity(cls, num_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(num_qubits, [(coeff, "I" * num_qubits)])

    @classmethod
    def single(cls, num_qubits: int, qubit: int, pauli: str, coeff: complex = 1.0) -> "PauliSum":
        if not 0 <= qubit < num_qubits:
            raise ValueError(f"qubit {qubit} out of range for {num_qubits} qubits")
        word = "I" * qubit + pauli + "I" * (num_qubits - qubit - 1)
        return cls(num_qubits, [(coeff, word)])

    @classmethod
    def from_dict(cls, num_qubits: int, data: Mapping[str, complex]) -> "PauliSum":
        return cls(num_qubits, [(c, w) for w, c in data.items()])

    # -- basic protocol --------------------------------------------------------

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self._terms)

    def __repr__(self) -> str:
        return f"PauliSum(num_qubits={self.num_qubits}, terms={len(self._terms)})"

    def _check_compatible(self, other: "PauliSum") -> None:
        if self.num_qubits != other.num_qubits:
            raise ValueError(
                f"qubit-count mismatch: {self.num_qubits} vs {other.num_qubits}"
            )

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check_compatible(other)
        return PauliSum(self.num_qubits, self._terms + other._terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(
            self.num_qubits, [(t.coeff * scalar, t.word) for t in self._terms]
        )

    __rmul__ = __mul__

    def __neg__(self) -> "PauliSum":
        return self * (-1.0)

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product, simplified."""
        self._check_compatible(other)
        acc: dict[str, complex] = {}
        for a in self._terms:
            for b in other._terms:
                phase = a.coeff * b.coeff
                chars = []
                for ca, cb in zip(a.word, b.word):
                    p, c = _PRODUCT[(ca, cb)]
                    phase *= p
                    chars.append(c)
                word = "".join(chars)
                acc[word] = acc.get(word, 0.0) + phase
        return PauliSum.from_dict(self.num_qubits, acc).simplify()

    def commutator(self, other: "PauliSum") -> "PauliSum":
        return (self @ other - other @ self).simplify()

    def simplify(self, drop_tol: float = DEFAULT_DROP_TOL) -> "PauliSum":
        """Collect equal words and drop coefficients below ``drop_tol``."""
        acc: dict[str, complex] = {}
        for t in self._terms:
            acc[t.word] = acc.get(t.word, 0.0) + t.coeff
        kept = [(c, w) for w, c in sorted(acc.items()) if abs(c) > drop_tol]
        return PauliSum(self.num_qubits, kept)

    def coefficient(self, word: str) -> complex:
        return sum((t.coeff for t in self._terms if t.word == word), 0.0 + 0.0j)

    def norm(self) -> float:
        """Sum of absolute coefficients of the simplified operator."""
        return float(sum(abs(t.coeff) for t in self.simplify()))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(t.coeff.imag) <= tol for t in self.simplify(drop_tol=0.0))

    def real_coeffs(self) -> "PauliSum":
        """Drop sub-tolerance imaginary parts; raise if any are significant."""
        s = self.simplify()
        bad = [t for t in s if abs(t.coeff.imag) > 1e-12]
        if bad:
            raise ValueError(f"operator has non-real coefficients, e.g. {bad[0]}")
        return PauliSum(self.num_qubits, [(t.coeff.real, t.word) for t in s])

    # -- serialization ---------------------------------------------------------

    def to_lines(self) -> list[str]:
        """One term per line: ``<re> <im> <word>`` with qubit 0 leftmost."""
        return [
            f"{t.coeff.real:.17g} {t.coeff.imag:.17g} {t.word}" for t in self._terms
        ]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "PauliSum":
        terms = []
        num_qubits = None
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            re_s, im_s, word = line.split()
            if num_qubits is None:
                num_qubits = len(word)
            terms.append((complex(float(re_s), float(im_s)), word))
        if num_qubits is None:
            raise ValueError("no terms found")
        return cls(num_qubits, terms)


def word_masks(word: str) -> tuple[int, int, int]:
    """Return ``(flip_mask, zy_mask, n_y)`` for a Pauli word.

    ``flip_mask`` has bit ``j`` set where the word has X or Y at ``j``;
    ``zy_mask`` where it has Z or Y.  The action on a basis state is then

        P|s> = i^{n_y} * (-1)^{popcount(zy_mask) - popcount(s & zy_mask)} |s ^ flip_mask>
    """
    flip = zy = n_y = 0
    for j, ch in enumerate(word):
        if ch in "XY":
            flip |= 1 << j
        if ch in "ZY":
            zy |= 1 << j
        if ch == "Y":
            n_y += 1
    return flip, zy, n_y


def word_phases(word: str, states: np.ndarray) -> np.ndarray:
    """Phases of P|s> for an array of basis-state labels ``s``."""
    _, zy, n_y = word_masks(word)
    n_zy = bin(zy).count("1")
    par = np.bitwise_count(np.asarray(states, dtype=np.uint64) & np.uint64(zy))
    signs = np.where((n_zy - par) % 2 == 0, 1.0, -1.0)
    return (1.0j**n_y) * signs
