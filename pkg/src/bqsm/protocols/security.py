"""Security experiments: purification equivalence, receiver-security
witnesses, and the sender-security distance with its full bound-chain audit.

Every audit computes the measured quantity exactly (block-diagonal trace
norms over the classical registers) and evaluates every inequality of the
corresponding proof chain on the same instance, reporting per-link slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bits import int_to_str
from ..cqstate import CqState, pa_distance
from ..entropy import JointDistribution, smooth_min_entropy
from ..errors import CapacityError, InputError
from ..hashing import HashFamily
from ..qstate import SINGLE_QUBIT_BASES, batched_trace_norm, trace_norm
from ..uncertainty import event_from_distributions, genrel_epsilon
from .adversary import (AdversaryStrategy, direct_blocks_dense,
                        epr_blocks_dense, product_factors,
                        sender_measurement_dense)
from .rabin import rabin_exact_blocks


# ---------------------------------------------------------------------------
# purification equivalence
# ---------------------------------------------------------------------------

def purification_gap(n: int, strategy: AdversaryStrategy, thetas) -> float:
    """Trace distance between the adversary's direct-protocol and
    EPR-purified cq-states at the memory-bound step, maximized over the
    supplied basis strings (each taken with uniform weight).

    The blocks are classical in (theta, y, x); the gap sums the per-block
    trace norms, so 0 certifies exact operational equivalence.
    """
    total = 0.0
    w_theta = 1.0 / len(thetas)
    for theta in thetas:
        epr = {}
        blocks = epr_blocks_dense(n, strategy)
        for y, p_y, p_x, ops in sender_measurement_dense(blocks, theta):
            for x in range(1 << n):
                if p_x[x] > 0:
                    epr[(y, x)] = (p_y * p_x[x], ops[x])
        direct = {}
        for x, p_y, ops in direct_blocks_dense(n, strategy, theta):
            for y, p in p_y.items():
                direct[(y, x)] = (p * 2.0 ** (-n), ops[y])
        keys = set(epr) | set(direct)
        for k in keys:
            pe, oe = epr.get(k, (0.0, None))
            pd, od = direct.get(k, (0.0, None))
            if oe is None:
                total += 0.5 * w_theta * pd      # ||p rho||_1 = p
            elif od is None:
                total += 0.5 * w_theta * pe
            else:
                total += 0.5 * w_theta * trace_norm(pe * oe - pd * od)
    return total


# ---------------------------------------------------------------------------
# receiver security
# ---------------------------------------------------------------------------

@dataclass
class SenderBranch:
    """One classical branch of a (dishonest) sender program: a joint pure
    state on (sent n qubits) x (kept register), plus announcements."""

    weight: float
    amps: np.ndarray          # (2^n, dim_kept)
    r: str                    # announced basis (rabin) or theta string
    f_index: int
    e: int
    garbage: bool = False


def honest_rabin_sender(n: int, seed: int, branches: int = 4):
    """Honest sender as a branch list (sampled x, r, f, e with b=0)."""
    rng = np.random.default_rng(seed)
    fam = HashFamily(n, 1, "linear")
    out = []
    for _ in range(branches):
        x = int(rng.integers(1 << n))
        r = "+" if rng.integers(2) == 0 else "x"
        v = _basis_matrix(r, n)[:, x].reshape(-1, 1)
        f_idx = int(rng.integers(fam.size))
        e = fam.eval(fam.member(f_idx), x)  # b = 0
        out.append(SenderBranch(1.0 / branches, v, r, f_idx, e))
    return out


def garbage_rabin_sender(n: int, seed: int):
    return [SenderBranch(1.0, np.zeros((1 << n, 1)), "+", 0, 0,
                         garbage=True)]


def entangled_rabin_sender(n: int, seed: int):
    """Sends EPR halves, keeps the partners, measures the first kept qubit
    in the diagonal basis and announces e = that outcome; branches cover
    both outcomes exactly."""
    rng = np.random.default_rng(seed)
    fam = HashFamily(n, 1, "linear")
    f_idx = int(rng.integers(fam.size))
    r = "+" if rng.integers(2) == 0 else "x"
    d = 1 << n
    joint = np.zeros((d, d), dtype=complex)
    for x in range(d):
        joint[x, x] = 2.0 ** (-n / 2.0)
    # measure kept qubit 0 (most significant bit of the kept index) in "x"
    h = SINGLE_QUBIT_BASES["x"]
    out = []
    for outcome in range(2):
        proj_vec = h[:, outcome].conj()
        # contract the kept register's first qubit with the projector
        kept = joint.reshape(d, 2, d // 2)
        amp = np.tensordot(kept, proj_vec, axes=([1], [0]))  # (d, d//2)
        w = float((np.abs(amp) ** 2).sum())
        out.append(SenderBranch(w, amp / math.sqrt(w), r, f_idx,
                                outcome))
    return out


def receiver_security_witness(branches, protocol: str, n: int) -> dict:
    """Run the unbounded-receiver modified experiment and verify the
    receiver-security state identity exactly.

    rabin: B' := e xor f(X') for X' measured in the announced basis; checks
    delta(rho_{A B' Senderside}, I/2 (x) rho_{B' Senderside}) = 0.
    ot12: S'_b := f_b(X' pad I_b); checks independence of the choice bit.
    """
    if protocol == "rabin":
        return _rabin_witness(branches, n)
    if protocol == "ot12":
        return _ot12_witness(branches, n)
    raise InputError(f"unknown protocol {protocol!r}")


def _basis_matrix(label_or_string, n: int) -> np.ndarray:
    if label_or_string in SINGLE_QUBIT_BASES and n > 1:
        labels = [label_or_string] * n
    else:
        labels = list(label_or_string) if len(label_or_string) == n \
            else [label_or_string] * n
    m = np.array([[1.0 + 0j]])
    for lab in labels:
        m = np.kron(m, SINGLE_QUBIT_BASES[lab])
    return m


def _rabin_witness(branches, n: int) -> dict:
    fam = HashFamily(n, 1, "linear")
    # blocks: (a, b_prime, branch index) -> weighted kept-register operator
    blocks: dict = {}
    marg: dict = {}
    for bi, br in enumerate(branches):
        if br.garbage:
            # anti-abort: receiver samples a and y uniformly, independent
            for a in (0, 1):
                for bp in (0, 1):
                    blocks[(a, bp, bi)] = 0.25 * br.weight \
                        * np.array([[1.0 + 0j]])
                    marg[(bp, bi)] = marg.get((bp, bi), 0) \
                        + 0.25 * br.weight * np.array([[1.0 + 0j]])
            continue
        member = fam.member(br.f_index)
        v = _basis_matrix(br.r, n)
        c = v.conj().T @ br.amps            # (2^n, kept)
        for x in range(1 << n):
            p_x = float((np.abs(c[x]) ** 2).sum())
            if p_x <= 1e-15:
                continue
            vec = c[x] / math.sqrt(p_x)
            op = np.outer(vec, vec.conj()) * p_x * br.weight
            bp = br.e ^ fam.eval(member, x)
            for a in (0, 1):
                key = (a, bp, bi)
                blocks[key] = blocks.get(key, 0) + 0.5 * op
            marg[(bp, bi)] = marg.get((bp, bi), 0) + op
    dist = 0.0
    for (a, bp, bi), op in blocks.items():
        dist += 0.5 * trace_norm(op - 0.5 * marg[(bp, bi)])
    return {"protocol": "rabin", "distance": dist,
            "exact": bool(dist <= 1e-9)}


def _ot12_witness(branches, n: int) -> dict:
    from ..hashing import pad_substring

    fam = HashFamily(n, 1, "linear")
    blocks: dict = {}
    marg: dict = {}
    p_c = {0: 0.5, 1: 0.5}
    for bi, br in enumerate(branches):
        theta = br.r if len(br.r) == n else br.r * n
        member0 = fam.member(br.f_index)
        member1 = fam.member((br.f_index + 1) % fam.size)
        i0 = [i for i, t in enumerate(theta) if t == "+"]
        i1 = [i for i, t in enumerate(theta) if t == "x"]
        v = _basis_matrix(theta, n)
        c = v.conj().T @ br.amps
        for x in range(1 << n):
            p_x = float((np.abs(c[x]) ** 2).sum())
            if p_x <= 1e-15:
                continue
            vec = c[x] / math.sqrt(p_x)
            op = np.outer(vec, vec.conj()) * p_x * br.weight
            xs = int_to_str(x, n)
            s0 = fam.eval(member0, int(pad_substring(xs, i0), 2))
            s1 = fam.eval(member1, int(pad_substring(xs, i1), 2))
            for cbit, w in p_c.items():
                key = (cbit, s0, s1, bi)
                blocks[key] = blocks.get(key, 0) + w * op
            mk = (s0, s1, bi)
            marg[mk] = marg.get(mk, 0) + op
    dist = 0.0
    for (cbit, s0, s1, bi), op in blocks.items():
        dist += 0.5 * trace_norm(op - p_c[cbit] * marg[(s0, s1, bi)])
    return {"protocol": "ot12", "distance": dist,
            "exact": bool(dist <= 1e-9)}


# ---------------------------------------------------------------------------
# sender security with bound-chain audit
# ---------------------------------------------------------------------------

def sender_security_distance(strategy: AdversaryStrategy, protocol: str,
                             n: int, ell: int = 1, lam: float | None = None
                             ) -> dict:
    if protocol == "rabin":
        return _rabin_sender_security(strategy, n, lam)
    if protocol == "ot12":
        return _ot12_sender_security(strategy, n, ell, lam)
    raise InputError(f"unknown protocol {protocol!r}")


def _pick_lambda(q: int, n: int) -> float:
    gamma = q / n
    return 0.49 if gamma >= 0.5 else min(0.49, (gamma + 0.5) / 2.0)


def _rabin_sender_security(strategy, n, lam) -> dict:
    """Erasure-OT sender security: event construction per adversary
    outcome, exact masked-bit distance conditioned on the event, and the
    privacy-amplification bound."""
    q = strategy.memory_qubits(n)
    lam = lam if lam is not None else _pick_lambda(q, n)
    per_y: dict = {}
    for r, y, p_ry, p_x, ops in rabin_exact_blocks(n, strategy):
        per_y.setdefault(y, {})[r] = (p_ry, p_x, ops)
    xs, us, ps, opl = [], [], [], []
    p_event = 0.0
    links = {"event_prob": math.inf, "branch_entropy": math.inf}
    kappa_max = 0.0
    eye = np.eye(1 << q, dtype=complex) / (1 << q)
    for y, per_r in sorted(per_y.items()):
        qp = per_r.get("+", (0.0, np.zeros(1 << n), None))[1]
        qt = per_r.get("x", (0.0, np.zeros(1 << n), None))[1]
        ec = event_from_distributions(qp, qt, lam, n)
        kappa_max = max(kappa_max, ec.kappa)
        links["event_prob"] = min(
            links["event_prob"],
            ec.prob_sum - (1.0 - 2.0 ** (-ec.kappa * n)))
        for r, keep, prob, h in (("+", ec.keep_plus, ec.prob_plus,
                                  ec.h_plus),
                                 ("x", ec.keep_times, ec.prob_times,
                                  ec.h_times)):
            if prob <= 0 or keep is None:
                continue
            links["branch_entropy"] = min(links["branch_entropy"],
                                          h - lam * n)
            p_ry, p_x, ops = per_r[r]
            p_event += p_ry * prob
            for x in np.nonzero(keep & (p_x > 0))[0]:
                xs.append(int_to_str(int(x), n))
                us.append((r, int(y)))
                ps.append(p_ry * p_x[x])
                opl.append(ops[x] if ops[x] is not None else eye)
    ps = np.asarray(ps) / p_event
    state = CqState(tuple(xs), ps, tuple(opl), q, tuple(us))
    fam = HashFamily(n, 1, "linear")
    exact, bound = pa_distance(state, fam, 0.0)
    links["pa"] = bound - exact
    epsilon = max(exact, 0.5 - p_event)
    return {
        "protocol": "rabin", "strategy": str(strategy), "n": n, "q": q,
        "lambda": lam, "kappa": kappa_max,
        "event_probability": p_event,
        "distance": exact, "bound": bound, "epsilon": epsilon,
        "links": links,
        "pass": bool(all(s >= -1e-9 for s in links.values())),
    }


def _ot12_sender_security(strategy, n, ell, lam) -> dict:
    """1-2 OT sender security for product strategies: exact assembly over
    (theta, y, f0, f1) with the splitting pointer, plus the
    uncertainty -> splitting -> chain-rule -> PA audit."""
    if not strategy.is_product():
        raise InputError("1-2 OT audit expects a product strategy")
    if n > 6:
        raise CapacityError("exact two-hash assembly capped at n = 6")
    q = strategy.memory_qubits(n)
    lam = lam if lam is not None else 0.1
    factors = product_factors(n, strategy)
    kept_idx = [i for i, f in enumerate(factors) if f.kept]
    meas_idx = [i for i, f in enumerate(factors) if not f.kept]
    fam = HashFamily(n, ell, "linear")
    table = fam.eval_table()
    nf = fam.size
    s_out = 1 << ell
    dim_k = 1 << q

    # pass 1: classical joint for the uncertainty link and alpha
    cols = []
    slices = []
    theta_strings = ["".join("+x"[(t >> (n - 1 - i)) & 1] for i in range(n))
                     for t in range(1 << n)]
    for t_idx, theta in enumerate(theta_strings):
        for y in range(1 << len(meas_idx)):
            m = _product_mass(factors, theta, y, n, meas_idx)
            total = m.sum()
            if total <= 0:
                continue
            cols.append(m)
            slices.append((t_idx, y))
    mass = np.stack(cols, axis=1) * 2.0 ** (-n)
    joint = JointDistribution(
        [[int_to_str(v, n) for v in range(1 << n)], range(len(cols))],
        mass, normalized=True)
    eps_unc = genrel_epsilon(n, lam, 2, 2)
    h_unc, _ = smooth_min_entropy(joint, eps_unc)
    links = {"uncertainty": h_unc - (0.5 - 2 * lam) * n}
    alpha = -math.log2(max(col.max() / col.sum() for col in cols))

    # pass 2: splitting pointer and exact distance, per (theta, y) block
    eps_prime = 2.0 ** (-max(1.0, n / 4.0))
    split_floor = math.inf
    dist = 0.0
    f_range = np.arange(nf)
    kap = _bits_value(n, kept_idx)
    for (t_idx, y), m in zip(slices, cols):
        theta = theta_strings[t_idx]
        i0 = [i for i in range(n) if theta[i] == "+"]
        i1 = [i for i in range(n) if theta[i] == "x"]
        pad0 = _pad_index(n, i0)
        pad1 = _pad_index(n, i1)
        cond = m / m.sum()
        x1_val = _part_value(n, i1)
        p_x1 = np.bincount(x1_val, weights=cond, minlength=1 << n)
        dvec = (p_x1[x1_val] >= 2.0 ** (-alpha / 2.0)).astype(int)
        peak0 = np.where(dvec == 0, p_x1[x1_val], 0).max(initial=0.0)
        mass_c1 = np.zeros(1 << n)
        x0_val = _part_value(n, i0)
        np.add.at(mass_c1, x0_val[dvec == 1], cond[dvec == 1])
        peak = max(peak0, mass_c1.max(initial=0.0))
        if peak > 0:
            split_floor = min(split_floor, -math.log2(peak))
        # scatter the block's joint over (f0, f1, d, s0, s1, kept value)
        acc = np.zeros((nf, nf, 2, s_out, s_out, dim_k))
        w = m * 2.0 ** (-n)
        for x in np.nonzero(w > 0)[0]:
            acc[f_range[:, None], f_range[None, :], dvec[x],
                table[:, pad0[x], None], table[None, :, pad1[x]],
                kap[x]] += w[x]
        ops = _kept_ops(theta, kept_idx)          # (dim_k, dim_k, dim_k)
        blocks = np.einsum("abdstk,kij->abdstij", acc, ops)
        # sub axes: f0, f1, s0, s1, i, j; the S_{1-D} register is S1 when
        # d = 0 (sum axis 3) and S0 when d = 1 (sum axis 2)
        for d, axis in ((0, 3), (1, 2)):
            sub = blocks[:, :, d]
            margin = sub.sum(axis=axis, keepdims=True) / s_out
            dist += batched_trace_norm(sub - margin)
    dist = 0.5 * dist / (nf * nf)
    links["splitting"] = split_floor - alpha / 2.0
    h_chain = alpha / 2.0 - (1.0 + ell) - math.log2(1.0 / eps_prime)
    bound = 0.5 * 2.0 ** (-0.5 * (h_chain - q - ell)) + eps_prime
    links["final_pa"] = bound - dist
    return {
        "protocol": "ot12", "strategy": str(strategy), "n": n, "q": q,
        "ell": ell, "lambda": lam, "alpha": alpha,
        "h_uncertainty": h_unc, "eps_uncertainty": eps_unc,
        "distance": dist, "bound": bound, "links": links,
        "pass": bool(all(s >= -1e-9 for s in links.values())),
    }


def _product_mass(factors, theta, y, n, meas_idx) -> np.ndarray:
    """P(y, x | theta) as a vector over x (kron of per-qubit columns)."""
    m = np.array([1.0])
    pos = {i: k for k, i in enumerate(meas_idx)}
    for i, f in enumerate(factors):
        if f.kept:
            m = np.kron(m, np.array([0.5, 0.5]))
        else:
            y_i = (y >> (len(meas_idx) - 1 - pos[i])) & 1
            m = np.kron(m, f.p_yx[theta[i]][y_i])
    return m


def _part_value(n, idx) -> np.ndarray:
    """For every x, the integer value of its substring at idx (ascending),
    as if padded: high bits first."""
    x = np.arange(1 << n)
    out = np.zeros(1 << n, dtype=np.int64)
    for pos, i in enumerate(idx):
        out |= ((x >> (n - 1 - i)) & 1) << (len(idx) - 1 - pos)
    return out


def _pad_index(n, idx) -> np.ndarray:
    """Packed value of (x restricted to idx, zero-padded to n bits)."""
    return _part_value(n, idx) << (n - len(idx))


def _bits_value(n, idx) -> np.ndarray:
    out = np.zeros(1 << n, dtype=np.int64)
    x = np.arange(1 << n)
    for pos, i in enumerate(idx):
        out |= ((x >> (n - 1 - i)) & 1) << (len(idx) - 1 - pos)
    return out


def _kept_ops(theta, kept_idx) -> np.ndarray:
    """Stack of kept-register pure states |kappa>_theta, indexed by the
    packed kept-bit value."""
    if not kept_idx:
        return np.ones((1, 1, 1), dtype=complex)
    dim = 1 << len(kept_idx)
    out = np.empty((dim, dim, dim), dtype=complex)
    for kappa in range(dim):
        vec = np.array([1.0 + 0j])
        for pos, i in enumerate(kept_idx):
            bit = (kappa >> (len(kept_idx) - 1 - pos)) & 1
            v = SINGLE_QUBIT_BASES[theta[i]][:, bit].conj()
            vec = np.kron(vec, v)
        out[kappa] = np.outer(vec, vec.conj())
    return out


