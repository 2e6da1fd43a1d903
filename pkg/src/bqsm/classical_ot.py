"""Sender-security of randomized oblivious transfer, characterized through
non-degenerate linear functions.

Implements the XOR criterion for bit OT, the NDLF criterion for string OT,
the constructive pointer extension behind the sufficiency proof, the
1-of-n pairwise conditions, and reduction harnesses that build OT from a
single universal-OT channel with exact hash-family averaging.

Distributions live in plain numpy arrays indexed [s0, s1, w] (or
[s_0, ..., s_{n-1}, w]); the dtype may be float64 or object (Fractions) so
the exact equivalences can be tested without float ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bits import parity
from .entropy import JointDistribution, conditional_renyi, smooth_min_entropy, \
    chain_rule_slack, split_min_entropy
from .errors import CapacityError, InputError, PromiseViolation
from .hashing import NDLF, HashFamily, enumerate_ndlf

MAX_ELL = 8
MAX_W = 64


def _is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


def _half(arr: np.ndarray):
    return Fraction(1, 2) if _is_exact(arr) else 0.5


def _inv_pow2(arr: np.ndarray, k: int):
    return Fraction(1, 1 << k) if _is_exact(arr) else 2.0 ** -k


def _sign_vector(mask: int, ell: int, exact: bool) -> np.ndarray:
    """(-1)^{<mask, s>} over all s, as ints (exact) or floats."""
    vals = [1 - 2 * parity(mask & s) for s in range(1 << ell)]
    if exact:
        out = np.empty(1 << ell, dtype=object)
        for i, v in enumerate(vals):
            out[i] = Fraction(v)
        return out
    return np.asarray(vals, dtype=float)


class OtOutputDistribution:
    """Joint distribution of the two l-bit strings and the receiver output,
    mass[s0, s1, w]."""

    def __init__(self, mass, ell: int, w_labels=None, normalized=True):
        m = np.asarray(mass)
        if m.dtype != object:
            m = m.astype(float)
        if ell > MAX_ELL:
            raise CapacityError(f"ell={ell} exceeds cap {MAX_ELL}")
        size = 1 << ell
        if m.ndim != 3 or m.shape[0] != size or m.shape[1] != size:
            raise InputError("mass must be (2^l, 2^l, |W|)")
        if m.shape[2] > MAX_W:
            raise CapacityError(f"|W|={m.shape[2]} exceeds cap {MAX_W}")
        if any(v < 0 for v in m.flat):
            raise InputError("negative mass")
        total = sum(m.flat)
        if normalized and abs(total - 1) > 1e-9:
            raise InputError(f"total mass {total}")
        self.mass = m
        self.ell = ell
        self.w_labels = tuple(w_labels) if w_labels is not None \
            else tuple(range(m.shape[2]))

    @property
    def n_w(self) -> int:
        return self.mass.shape[2]

    def to_json(self) -> str:
        import json
        return json.dumps({"ell": self.ell,
                           "w_labels": [str(w) for w in self.w_labels],
                           "mass": [float(v) for v in self.mass.flat]})

    @staticmethod
    def from_json(text: str) -> "OtOutputDistribution":
        import json
        obj = json.loads(text)
        size = 1 << obj["ell"]
        labels = obj["w_labels"]
        mass = np.asarray(obj["mass"]).reshape(size, size, len(labels))
        return OtOutputDistribution(mass, obj["ell"], labels)


@dataclass
class PointerExtension:
    """Extension P_{S0 S1 D W} of an OT output distribution by a binary
    pointer, with its achieved sender-security distance."""

    extended: np.ndarray   # [s0, s1, d, w]
    epsilon: float

    def marginal_matches(self, dist: OtOutputDistribution, tol=1e-10) -> bool:
        diff = self.extended.sum(axis=2) - dist.mass
        return max(abs(v) for v in diff.flat) <= tol


def _beta_distance(mass: np.ndarray, beta: NDLF):
    """delta(P_{beta(S0,S1) W}, unif . P_W) = 1/2 sum_w |sum_{s0,s1}
    (-1)^beta mass|."""
    exact = _is_exact(mass)
    u = _sign_vector(beta.a0, beta.ell, exact)
    v = _sign_vector(beta.a1, beta.ell, exact)
    half = _half(mass)
    tot = 0 * half
    for w in range(mass.shape[2]):
        s = (u[:, None] * v[None, :] * mass[:, :, w]).sum()
        tot += abs(s)
    return half * tot


def xor_uniformity(dist: OtOutputDistribution):
    """Distance of the XOR of the two bits from uniform given W (l=1)."""
    if dist.ell != 1:
        raise InputError("XOR criterion applies to bit OT only")
    return _beta_distance(dist.mass, NDLF(1, 1, 1))


def ndlf_security_distance(dist: OtOutputDistribution):
    """Max over all (2^l - 1)^2 NDLFs of the uniformity distance, plus the
    worst function."""
    worst = None
    worst_val = -1
    for beta in enumerate_ndlf(dist.ell):
        val = _beta_distance(dist.mass, beta)
        if val > worst_val:
            worst_val, worst = val, beta
    return worst_val, worst


def sender_security_of_extension(extended: np.ndarray):
    """delta(P_{S_{1-D} S_D D W}, unif^l . P_{S_D D W}) for an explicit
    extension array [s0, s1, d, w]."""
    size = extended.shape[0]
    ell = size.bit_length() - 1
    inv = _inv_pow2(extended, ell)
    half = _half(extended)
    total = 0 * half
    # d = 0: S_D = S0 (axis 0), S_{1-D} = S1 (axis 1)
    m0 = extended[:, :, 0, :]
    marg0 = m0.sum(axis=1)
    for s0 in range(size):
        for w in range(extended.shape[3]):
            for s1 in range(size):
                total += abs(m0[s0, s1, w] - inv * marg0[s0, w])
    # d = 1: S_D = S1 (axis 1)
    m1 = extended[:, :, 1, :]
    marg1 = m1.sum(axis=0)
    for s1 in range(size):
        for w in range(extended.shape[3]):
            for s0 in range(size):
                total += abs(m1[s0, s1, w] - inv * marg1[s1, w])
    return half * total


def construct_pointer(dist: OtOutputDistribution) -> PointerExtension:
    """Constructive pointer extension.

    Per receiver output w, pick the column t minimizing p_{0, t}, extend by
    D=0 mass p_{s0, t} and D=1 mass p_{0, s1} - p_{0, t}, then repair each
    cell's deficit: adjust the D=0 branch first and push any remainder that
    would go negative onto the D=1 branch. The achieved distance is exact
    and at most 2^{2l+1} times the worst NDLF distance.
    """
    m = dist.mass
    size = 1 << dist.ell
    exact = _is_exact(m)
    ext = np.zeros((size, size, 2, dist.n_w),
                   dtype=object if exact else float)
    if exact:
        for i in range(ext.size):
            ext.flat[i] = Fraction(0)
    for w in range(dist.n_w):
        p = m[:, :, w]
        row0 = [p[0, s1] for s1 in range(size)]
        t = min(range(size), key=lambda j: (row0[j], j))
        for s0 in range(size):
            for s1 in range(size):
                a0 = p[s0, t]
                a1 = p[0, s1] - p[0, t]
                target = p[s0, s1]
                delta = target - (a0 + a1)
                b0 = a0 + delta
                if b0 < 0:
                    b0 = 0 * a0
                b1 = target - b0
                ext[s0, s1, 0, w] = b0
                ext[s0, s1, 1, w] = b1
    eps = sender_security_of_extension(ext)
    return PointerExtension(ext, eps)


def min_pointer_epsilon_lp(dist: OtOutputDistribution) -> float:
    """Linear-programming oracle for the minimal sender-security distance
    over all valid pointer extensions (l=1, small |W| only). Test oracle;
    the constructive proof path is the production path.
    """
    from scipy.optimize import linprog

    if dist.ell != 1:
        raise CapacityError("LP oracle implemented for l=1")
    if dist.n_w > 8:
        raise CapacityError("LP oracle capped at |W| <= 8")
    m = np.asarray([[ [float(v) for v in col] for col in row]
                    for row in dist.mass])
    nw = dist.n_w
    # variables: q[s0,s1,d,w] (8 nw) plus slack t[s0,s1,d,w] for |.|
    nq = 8 * nw
    nvar = 2 * nq

    def qi(s0, s1, d, w):
        return ((s0 * 2 + s1) * 2 + d) * nw + w

    a_eq, b_eq = [], []
    # marginal constraint: q[s0,s1,0,w] + q[s0,s1,1,w] = m[s0,s1,w]
    for s0 in range(2):
        for s1 in range(2):
            for w in range(nw):
                row = np.zeros(nvar)
                row[qi(s0, s1, 0, w)] = 1
                row[qi(s0, s1, 1, w)] = 1
                a_eq.append(row)
                b_eq.append(m[s0, s1, w])
    # |q[s0,s1,d,w] - 1/2 marg| <= t with objective sum(t)/2
    a_ub, b_ub = [], []
    for s0 in range(2):
        for s1 in range(2):
            for d in range(2):
                for w in range(nw):
                    for sign in (1, -1):
                        row = np.zeros(nvar)
                        row[qi(s0, s1, d, w)] += sign
                        for other in range(2):
                            if d == 0:
                                row[qi(s0, other, 0, w)] -= sign * 0.5
                            else:
                                row[qi(other, s1, 1, w)] -= sign * 0.5
                        row[nq + qi(s0, s1, d, w)] = -1
                        a_ub.append(row)
                        b_ub.append(0.0)
    c = np.concatenate([np.zeros(nq), np.full(nq, 0.5)])
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  A_eq=np.array(a_eq), b_eq=np.array(b_eq),
                  bounds=[(0, None)] * nq + [(0, None)] * nq,
                  method="highs")
    if not res.success:
        raise InputError(f"LP oracle failed: {res.message}")
    return float(res.fun)


# ---------------------------------------------------------------------------
# 1-of-n generalization
# ---------------------------------------------------------------------------

def one_of_n_condition(mass: np.ndarray, ell: int, epsilon: float):
    """Pairwise NDLF conditions for 1-of-n randomized string OT.

    mass is indexed [s_0, ..., s_{n-1}, w]. For every pair i != j and
    every NDLF, the joint uniformity distance of beta(S_i, S_j) from
    uniform given (W, remaining strings) must be at most
    nu = epsilon / (2^{2l} n (n-1)). Returns (max distance, pass flag).
    """
    m = np.asarray(mass)
    if m.dtype != object:
        m = m.astype(float)
    n = m.ndim - 1
    if n > 4 or ell > 2:
        raise CapacityError("1-of-n check capped at n <= 4, l <= 2")
    size = 1 << ell
    if m.shape[:n] != (size,) * n:
        raise InputError("mass axes do not match 2^l")
    exact = _is_exact(m)
    half = _half(m)
    worst = 0 * half
    betas = list(enumerate_ndlf(ell))
    signs = {a: _sign_vector(a, ell, exact) for a in range(1, size)}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            # move axes i, j to the front, flatten the rest into W'
            rest = [k for k in range(n) if k not in (i, j)]
            perm = [i, j] + rest + [n]
            t = np.transpose(m, perm).reshape(size, size, -1)
            for beta in betas:
                u, v = signs[beta.a0], signs[beta.a1]
                val = 0 * half
                for w in range(t.shape[2]):
                    s = (u[:, None] * v[None, :] * t[:, :, w]).sum()
                    val += abs(s)
                val = half * val
                if val > worst:
                    worst = val
    nu = epsilon / ((1 << (2 * ell)) * n * (n - 1))
    return worst, bool(worst <= nu)


# ---------------------------------------------------------------------------
# reductions from universal OT
# ---------------------------------------------------------------------------

class UotChannel:
    """Receiver channel P_{Y|X} for X = (x0, x1) in {0,1}^n x {0,1}^n.

    `table[y_index, x_index]` holds P(y | x) with x_index = x0 * 2^n + x1.
    """

    def __init__(self, n: int, table: np.ndarray, y_labels=None):
        t = np.asarray(table, dtype=float)
        if t.shape[1] != 1 << (2 * n):
            raise InputError("channel table does not match 2^{2n} inputs")
        if (t < -1e-12).any() or np.abs(t.sum(axis=0) - 1.0).max() > 1e-9:
            raise InputError("columns of P(y|x) must be distributions")
        self.n = n
        self.table = np.clip(t, 0.0, None)
        self.y_labels = tuple(y_labels) if y_labels is not None \
            else tuple(range(t.shape[0]))

    def joint_with_uniform_x(self) -> JointDistribution:
        """P_{XY} for uniform X, as a JointDistribution over X x Y."""
        nx = self.table.shape[1]
        m = (self.table / nx).T
        return JointDistribution([range(nx), self.y_labels], m)

    @staticmethod
    def honest(n: int, c: int) -> "UotChannel":
        """Y = x_c deterministically."""
        nx = 1 << (2 * n)
        t = np.zeros((1 << n, nx))
        for x in range(nx):
            x0, x1 = x >> n, x & ((1 << n) - 1)
            t[(x0, x1)[c], x] = 1.0
        return UotChannel(n, t)

    @staticmethod
    def xor(n: int) -> "UotChannel":
        """Y = x0 xor x1 (bitwise)."""
        nx = 1 << (2 * n)
        t = np.zeros((1 << n, nx))
        for x in range(nx):
            x0, x1 = x >> n, x & ((1 << n) - 1)
            t[x0 ^ x1, x] = 1.0
        return UotChannel(n, t)

    @staticmethod
    def erasure(n: int, p_keep: float = 0.5) -> "UotChannel":
        """Each of the 2n bits is revealed independently with probability
        p_keep; y = (mask, revealed bits)."""
        bits = 2 * n
        nx = 1 << bits
        ys = []
        rows = []
        for mask in range(1 << bits):
            weight = (p_keep ** bin(mask).count("1")
                      * (1 - p_keep) ** (bits - bin(mask).count("1")))
            seen: dict = {}
            for x in range(nx):
                rv = x & mask
                seen.setdefault(rv, np.zeros(nx))[x] = weight
            for rv, row in sorted(seen.items()):
                ys.append((mask, rv))
                rows.append(row)
        return UotChannel(n, np.array(rows), ys)


def _family_sign_tables(fam: HashFamily, exact_n: int) -> dict:
    """sign[a][member_index, x] = (-1)^{<a, f(x)>} for each nonzero mask."""
    table = fam.eval_table()
    out = {}
    for a in range(1, 1 << fam.ell):
        bits = np.zeros_like(table)
        for b in range(fam.ell):
            if (a >> b) & 1:
                bits ^= (table >> b) & 1
        out[a] = 1.0 - 2.0 * bits.astype(float)
    return out


def reduce_ot_from_uot(n: int, ell: int, kappa: float,
                       channel: UotChannel, force: bool = False) -> dict:
    """Run the one-shot OT-from-UOT reduction with the strongly
    two-universal (affine) family, averaging over hash choices exactly.

    Verifies the collision-entropy promise H_2(X|Y) >= 4l + 2kappa + 1,
    computes the worst NDLF distance of the output distribution, and checks
    it against the 2^-kappa / 2^{2l+1} target.
    """
    r_min = 4 * ell + 2 * kappa + 1
    joint = channel.joint_with_uniform_x()
    h2 = conditional_renyi(joint, 2.0)
    promise_ok = h2 >= r_min - 1e-9 and n >= r_min
    if not promise_ok and not force:
        raise PromiseViolation(
            f"H_2(X|Y) = {h2:.4f} below required {r_min}")
    fam = HashFamily(n, ell, "affine")
    if fam.size ** 2 > (1 << 22):
        raise CapacityError("hash family pair space too large")
    signs = _family_sign_tables(fam, n)
    nx = 1 << n
    p_y = channel.table.sum(axis=1) / (1 << (2 * n))
    worst = 0.0
    worst_beta = None
    for beta in enumerate_ndlf(ell):
        u = signs[beta.a0]   # (|F|, 2^n) over x0
        v = signs[beta.a1]   # (|F|, 2^n) over x1
        dist = 0.0
        for yi in range(channel.table.shape[0]):
            mxy = channel.table[yi].reshape(nx, nx) / (1 << (2 * n))
            corr = u @ mxy @ v.T   # (|F0|, |F1|)
            dist += 0.5 * np.abs(corr).sum() / fam.size ** 2
        if dist > worst:
            worst, worst_beta = dist, beta
    target = 2.0 ** (-kappa) / (1 << (2 * ell + 1))
    return {
        "n": n, "ell": ell, "kappa": kappa,
        "h2_measured": h2, "h2_required": r_min, "promise_ok": promise_ok,
        "ndlf_distance": worst,
        "worst_beta": (worst_beta.a0, worst_beta.a1),
        "target": target, "pass": bool(worst <= target),
        "sender_security_epsilon": worst * (1 << (2 * ell + 1)),
    }


def splitting_reduction(n: int, ell: int, kappa: float,
                        channel: UotChannel, force: bool = False) -> dict:
    """Alternate security argument for the same reduction: min-entropy
    splitting, chain rule, and the left-over hash lemma, each link checked
    numerically on the instance.

    Uses the plain linear (two-universal) family; the promise is on
    worst-case min-entropy: H_inf(X0 X1 | Y) >= 4l + 4kappa + 4.
    """
    r_min = 4 * ell + 4 * kappa + 4
    joint = channel.joint_with_uniform_x()
    h_inf = conditional_renyi(joint, math.inf)
    promise_ok = h_inf >= r_min - 1e-9 and n >= r_min
    if not promise_ok and not force:
        raise PromiseViolation(
            f"H_inf(X0X1|Y) = {h_inf:.4f} below required {r_min}")
    alpha = h_inf
    nx = 1 << n
    fam = HashFamily(n, ell, "linear")
    table = fam.eval_table()
    eps_prime = 2.0 ** (-kappa - 1)
    thresh = 2.0 ** (-alpha / 2.0)

    links = {}
    links["promise"] = h_inf - r_min
    # split per y: D(x1, y) = 1 iff P(X1 = x1 | Y=y) >= 2^{-alpha/2};
    # worst-case per-y min-entropy of (X_{1-D}, D) must reach alpha/2
    worst_split = math.inf
    p_x = 1.0 / (1 << (2 * n))
    d_of = {}
    for yi in range(channel.table.shape[0]):
        col = channel.table[yi] * p_x
        py = col.sum()
        if py <= 0:
            continue
        mxy = col.reshape(nx, nx) / py
        p_x1 = mxy.sum(axis=0)
        dvec = (p_x1 >= thresh).astype(int)
        d_of[yi] = dvec
        mass_c0 = np.where(dvec == 0, p_x1, 0.0)
        mass_c1 = (mxy * (dvec == 1)[None, :]).sum(axis=1)
        peak = max(mass_c0.max(initial=0.0), mass_c1.max(initial=0.0))
        worst_split = min(worst_split, -math.log2(peak) if peak else math.inf)
    links["splitting"] = worst_split - alpha / 2.0

    # chain rule floor after conditioning on (D, S_D) and smoothing eps'
    h_after_chain = alpha / 2.0 - (1.0 + ell) - math.log2(1.0 / eps_prime)
    chain_measured = _measured_chain_entropy(channel, fam, table, d_of,
                                             eps_prime)
    if chain_measured is not None:
        links["chain_measured"] = chain_measured - h_after_chain

    # exact output distance with the constructed D vs the LHL bound
    dist = senders_distance_with_pointer(channel, fam, table, d_of)
    bound = 0.5 * 2.0 ** (-0.5 * (h_after_chain - ell)) + eps_prime
    links["final_lhl"] = bound - dist
    return {
        "n": n, "ell": ell, "kappa": kappa,
        "h_inf_measured": h_inf, "h_required": r_min,
        "promise_ok": promise_ok,
        "distance": dist, "bound": bound,
        "links": links,
        "pass": bool(promise_ok and dist <= bound
                     and all(s >= -1e-9 for s in links.values())),
    }


def _measured_chain_entropy(channel: UotChannel, fam: HashFamily,
                            table: np.ndarray, d_of: dict,
                            eps_prime: float):
    """Exact H_inf^{eps'}(X_{1-D} | D S_D Y F_D) when the joint fits the
    dense cap; None otherwise. (The other hash F_{1-D} is independent of
    everything conditioned on, so it is irrelevant for min-entropy.)"""
    n = channel.n
    nx = 1 << n
    nf = fam.size
    size_out = 1 << fam.ell
    cols = 2 * size_out * len(d_of) * nf
    if nx * cols > (1 << 20):
        return None
    from .entropy import JointDistribution as JD
    mass = np.zeros((nx, cols))
    p_x = 1.0 / (1 << (2 * n))
    col_idx = 0
    for yi, dvec in d_of.items():
        mxy = channel.table[yi].reshape(nx, nx) * p_x
        for fd in range(nf):
            for d in (0, 1):
                for s_d in range(size_out):
                    if d == 0:
                        sel = (table[fd] == s_d)[:, None] \
                            & (dvec == 0)[None, :]
                        contrib = np.where(sel, mxy, 0.0).sum(axis=0)
                    else:
                        sel = (table[fd] == s_d)[None, :] \
                            & (dvec == 1)[None, :]
                        contrib = np.where(sel, mxy, 0.0).sum(axis=1)
                    mass[:, col_idx] = contrib
                    col_idx += 1
    mass /= nf
    joint = JD([range(nx), range(col_idx)], mass[:, :col_idx],
               normalized=True)
    h, _ = smooth_min_entropy(joint, eps_prime)
    return h


def senders_distance_with_pointer(channel: UotChannel, fam: HashFamily,
                                  table: np.ndarray, d_of: dict) -> float:
    """Exact delta(P_{S_{1-D} S_D D W}, unif^l . P_{S_D D W}) where
    W = (Y, F0, F1) and D is the per-y pointer; exhaustive over hash
    pairs via indicator-matrix products."""
    n = channel.n
    nx = 1 << n
    size_out = 1 << fam.ell
    p_x = 1.0 / (1 << (2 * n))
    nf = fam.size
    # indicator[s][f, x] = 1 if f(x) = s
    ind = [(table == s).astype(float) for s in range(size_out)]
    total = 0.0
    for yi, dvec in d_of.items():
        mxy = channel.table[yi].reshape(nx, nx) * p_x
        for d in (0, 1):
            w = np.where((dvec == d)[None, :], mxy, 0.0)
            if w.sum() == 0:
                continue
            # acc[s0][s1][f0, f1] = P(S0=s0, S1=s1, f0, f1, y, D=d)
            left = [ind[s0] @ w for s0 in range(size_out)]
            acc = [[left[s0] @ ind[s1].T for s1 in range(size_out)]
                   for s0 in range(size_out)]
            if d == 0:
                for s0 in range(size_out):
                    marg = sum(acc[s0][s1] for s1 in range(size_out))
                    for s1 in range(size_out):
                        total += 0.5 * np.abs(
                            acc[s0][s1] - marg / size_out).sum()
            else:
                for s1 in range(size_out):
                    marg = sum(acc[s0][s1] for s0 in range(size_out))
                    for s0 in range(size_out):
                        total += 0.5 * np.abs(
                            acc[s0][s1] - marg / size_out).sum()
    return total / (nf * nf)
