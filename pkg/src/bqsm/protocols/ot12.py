"""1-2 string OT: random BB84 qubits, per-qubit bases, two hashed strings.

Honest runs are classical per-qubit sampling (standard, reversed and
error-corrected variants). Exact adversarial quantities live in
`security.sender_security_distance`.
"""

from __future__ import annotations

import numpy as np

from ..bits import bits_to_str
from ..errors import CapacityError, InputError
from ..hashing import HashFamily, pad_substring
from .channel import ChannelModel
from .codes import LinearCode
from .transcript import ProtocolTranscript

HONEST_CAP = 100_000


def run_ot12(c: int, channel: ChannelModel, receiver, n: int, ell: int,
             seed: int, direction: str = "standard",
             code: LinearCode | None = None) -> ProtocolTranscript:
    """One honest run of randomized 1-2 string OT.

    direction='standard' has the sender transmit qubits; 'reversed' has the
    receiver transmit and the sender measure. Passing a code appends the
    two syndromes of x restricted to each index class (the noisy-model
    variant).
    """
    if receiver != "honest":
        raise InputError(
            "adversarial 1-2 OT runs go through sender_security_distance")
    if n > HONEST_CAP:
        raise CapacityError(f"honest path capped at n={HONEST_CAP}")
    phi, _ = channel.effective()
    rng = np.random.default_rng(seed)
    tr = ProtocolTranscript(f"ot12_{direction}", seed, n)
    theta = np.where(rng.integers(0, 2, size=n) == 0, "+", "x")
    x = rng.integers(0, 2, size=n, dtype=np.uint8)
    if direction == "standard":
        # receiver measures everything in basis [+,x]_c
        basis_c = "+" if c == 0 else "x"
        match = theta == basis_c
        flips = (rng.random(n) < phi).astype(np.uint8)
        x_rec = np.where(match, x ^ flips, rng.integers(0, 2, size=n))
    elif direction == "reversed":
        # receiver sends |x'>_{[+,x]_c}; sender measures in random theta;
        # positions with theta_i = basis_c agree up to channel flips
        basis_c = "+" if c == 0 else "x"
        x_rec = x.copy()          # receiver knows what it sent
        match = theta == basis_c
        flips = (rng.random(n) < phi).astype(np.uint8)
        x = np.where(match, x_rec ^ flips, rng.integers(0, 2, size=n))
    else:
        raise InputError(f"unknown direction {direction!r}")
    idx0 = np.nonzero(theta == "+")[0]
    idx1 = np.nonzero(theta == "x")[0]
    fam = HashFamily(n, ell, "linear")
    m0 = fam.member(int(rng.integers(fam.size)))
    m1 = fam.member(int(rng.integers(fam.size)))
    x_str = bits_to_str(x)
    pad0 = pad_substring(x_str, idx0)
    pad1 = pad_substring(x_str, idx1)
    s0 = fam.eval(m0, int(pad0, 2))
    s1 = fam.eval(m1, int(pad1, 2))
    announce = {"theta": "".join(theta.tolist()),
                "f0": m0.to_hex(), "f1": m1.to_hex()}
    syn = None
    if code is not None:
        syn = (code.syndrome_chunked(x[idx0]) if len(idx0) else
               np.array([], np.uint8),
               code.syndrome_chunked(x[idx1]) if len(idx1) else
               np.array([], np.uint8))
        announce["syn0"] = syn[0].tolist()
        announce["syn1"] = syn[1].tolist()
    tr.say("S" if direction == "standard" else "R", "qubits", "BB84")
    tr.say("S", "announce", announce)
    # receiver output
    idx_c = idx0 if c == 0 else idx1
    rec_bits = x_rec[idx_c].astype(np.uint8)
    decode_ok = True
    if code is not None and len(idx_c):
        syn_c = syn[c]
        rec_bits = code.decode_chunked(rec_bits, syn_c)
        decode_ok = bool(np.array_equal(rec_bits, x[idx_c]))
    full = np.zeros(n, dtype=np.uint8)
    full[idx_c] = x_rec[idx_c] if code is None else rec_bits
    pad_c = pad_substring(bits_to_str(full), idx_c)
    member_c = m0 if c == 0 else m1
    y = fam.eval(member_c, int(pad_c, 2))
    tr.honest = {"c": c, "x": x_str, "theta": announce["theta"],
                 "s0": s0, "s1": s1, "y": y, "decode_ok": decode_ok,
                 "i0": idx0.tolist(), "i1": idx1.tolist()}
    return tr
