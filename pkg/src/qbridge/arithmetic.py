"""Reversible ripple-carry arithmetic circuits (Cuccaro MAJ/UMA ladder).

Register layout (qubit indices, LSB first inside each register):

* adder / subtractor: ``a = 0..n-1``, ``b = n..2n-1``, ``carry = 2n``
* multiplier: ``a = 0..n-1``, ``b = n..2n-1``, ``product = 2n..4n-1``,
  ``carry = 4n``

Overflow wraps: the adder computes ``(a + b) mod 2^n`` in ``b`` and the
subtractor ``(b - a) mod 2^n``.
"""

from __future__ import annotations

from typing import Sequence

from .circuit import Circuit, Gate, Register
from .errors import SizeError

MAX_ADDER_BITS = 8
MAX_MULTIPLIER_BITS = 3


def _maj(c: int, b: int, a: int) -> list[Gate]:
    return [Gate("CX", (a, b)), Gate("CX", (a, c)), Gate("CCX", (c, b, a))]


def _maj_inverse(c: int, b: int, a: int) -> list[Gate]:
    return list(reversed(_maj(c, b, a)))


def _ripple_add(
    a: Sequence[int],
    b: Sequence[int],
    carry: int,
    carry_out: int | None = None,
    control: int | None = None,
) -> list[Gate]:
    """In-place ``b += a`` (optionally controlled, optionally with carry-out).

    The MAJ ladder and its mirror cancel; only the sum and carry-out CNOTs
    between them change ``b``, so control is needed on those gates alone.
    """
    n = len(a)
    wires = [carry] + list(a[:-1])  # incoming-carry wire for each bit
    gates: list[Gate] = []
    for i in range(n):
        gates += _maj(wires[i], b[i], a[i])

    def cx(src: int, dst: int) -> Gate:
        return Gate("CX", (src, dst)) if control is None else Gate("CCX", (control, src, dst))

    if carry_out is not None:
        gates.append(cx(a[n - 1], carry_out))
    for i in reversed(range(n)):
        gates += _maj_inverse(wires[i], b[i], a[i])
        gates.append(cx(a[i], b[i]))
        gates.append(cx(wires[i], b[i]))
    return gates


def _check_bits(bits: int, cap: int):
    if not 1 <= bits <= cap:
        raise SizeError(f"bit width must be in 1..{cap}, got {bits}")


def _adder_registers(n: int) -> tuple[Register, ...]:
    return (
        Register("a", 0, n, "input"),
        Register("b", n, n, "output"),
        Register("carry", 2 * n, 1, "carry"),
    )


def adder_circuit(bits: int) -> Circuit:
    """``|a>|b>|0> -> |a>|(a + b) mod 2^n>|0>``."""
    _check_bits(bits, MAX_ADDER_BITS)
    n = bits
    a = list(range(n))
    b = list(range(n, 2 * n))
    gates = _ripple_add(a, b, 2 * n)
    return Circuit(2 * n + 1, tuple(gates), (), _adder_registers(n), name="adder")


def subtractor_circuit(bits: int) -> Circuit:
    """``|a>|b>|0> -> |a>|(b - a) mod 2^n>|0>`` via ``~(~b + a)``."""
    _check_bits(bits, MAX_ADDER_BITS)
    n = bits
    flips = [Gate("X", (q,)) for q in range(n, 2 * n)]
    inner = adder_circuit(n)
    return Circuit(2 * n + 1, tuple(flips) + inner.gates + tuple(flips), (), _adder_registers(n), name="subtractor")


def multiplier_circuit(bits: int) -> Circuit:
    """Shift-and-add: ``|a>|b>|0>|0> -> |a>|b>|a*b>|0>``.

    Step ``i`` adds ``a`` into ``product[i:i+n]`` controlled on ``b_i``, with
    the carry landing in ``product[i+n]``.  Before step ``i`` the partial
    product is below ``2^(n+i)``, so that carry bit is still zero.
    """
    _check_bits(bits, MAX_MULTIPLIER_BITS)
    n = bits
    a = list(range(n))
    b = list(range(n, 2 * n))
    product = list(range(2 * n, 4 * n))
    carry = 4 * n
    gates: list[Gate] = []
    for i in range(n):
        gates += _ripple_add(a, product[i:i + n], carry, carry_out=product[i + n], control=b[i])
    registers = (
        Register("a", 0, n, "input"),
        Register("b", n, n, "input"),
        Register("product", 2 * n, 2 * n, "output"),
        Register("carry", 4 * n, 1, "carry"),
    )
    return Circuit(4 * n + 1, tuple(gates), (), registers, name="multiplier")


def input_bits(c: Circuit, a: int, b: int) -> dict[int, int]:
    """Qubit assignment that loads ``a`` and ``b`` into their registers."""
    out: dict[int, int] = {}
    for name, value in (("a", a), ("b", b)):
        reg = c.register(name)
        if value < 0 or value >= 2**reg.size:
            raise SizeError(f"{name}={value} does not fit in {reg.size} bits")
        for k, q in enumerate(reg.qubits):
            out[q] = (value >> k) & 1
    return out


def output_register(c: Circuit) -> Register:
    for r in c.registers:
        if r.role == "output":
            return r
    raise KeyError("circuit has no output register")


def classical_result(family: str, a: int, b: int, bits: int) -> int:
    """Result a problem document asks for; ``SUB`` means ``a - b``."""
    if family == "ADD":
        return (a + b) % 2**bits
    if family == "SUB":
        return (a - b) % 2**bits
    if family == "MUL":
        return a * b
    raise ValueError(family)
