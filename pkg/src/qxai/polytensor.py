"""Polynomials stored as sums of weighted rank-one symmetric tensors.

A :class:`RankOnePoly` is ``p(x) = sum_i lam_i <v_i, x - c>^k_i`` for an
optional common offset ``c``. Fourier series become polynomials of this form
by expanding each ``sin``/``cos`` in the scalar ``t = <w, x - c>``, which makes
the wave vectors natural rank-one directions.

:func:`polynomial_shap` computes exact Baseline SHAP values of such a
polynomial in closed form, without enumerating coalitions.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .fourier import FourierSeries
from .result import AttributionResult


@dataclass(frozen=True)
class RankOneTerm:
    order: int
    weight: float
    direction: np.ndarray

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        v = np.asarray(self.direction, dtype=float).ravel()
        if self.order == 0:
            v = np.zeros_like(v)
        object.__setattr__(self, "direction", v)
        object.__setattr__(self, "weight", float(self.weight))


@dataclass
class RankOnePoly:
    n: int
    terms: list[RankOneTerm] = field(default_factory=list)
    offset: np.ndarray | None = None

    def __post_init__(self):
        self.offset = np.zeros(self.n) if self.offset is None else np.asarray(self.offset, dtype=float).ravel()
        if self.offset.size != self.n:
            raise ValueError("offset has the wrong dimension")
        for t in self.terms:
            if t.direction.size != self.n:
                raise ValueError(f"term direction has dimension {t.direction.size}, expected {self.n}")

    @property
    def max_order(self) -> int:
        return max((t.order for t in self.terms), default=0)

    def __call__(self, x) -> float:
        return eval_poly(self, x)

    def __len__(self):
        return len(self.terms)

    def scaled(self, alpha: float) -> "RankOnePoly":
        return RankOnePoly(self.n, [RankOneTerm(t.order, alpha * t.weight, t.direction) for t in self.terms], self.offset)

    def __add__(self, other: "RankOnePoly") -> "RankOnePoly":
        if other.n != self.n or not np.array_equal(other.offset, self.offset):
            raise ValueError("can only add polynomials with equal dimension and offset")
        return RankOnePoly(self.n, self.terms + other.terms, self.offset)

    def to_dict(self) -> dict:
        d = {
            "n": self.n,
            "terms": [{"k": t.order, "lambda": t.weight, "v": t.direction.tolist()} for t in self.terms],
        }
        if np.any(self.offset):
            d["offset"] = self.offset.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RankOnePoly":
        n = int(d["n"])
        terms = [RankOneTerm(int(t["k"]), t["lambda"], t["v"]) for t in d["terms"]]
        return cls(n, terms, d.get("offset"))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "RankOnePoly":
        return cls.from_dict(json.loads(text))


def eval_poly(poly: RankOnePoly, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != poly.n:
        raise ValueError(f"expected a point of dimension {poly.n}, got {x.size}")
    if not poly.terms:
        return 0.0
    z = x - poly.offset
    total = 0.0
    for order, lam, V in _group_by_order(poly):
        total += float(lam @ (V @ z) ** order)
    return total


def _group_by_order(poly: RankOnePoly):
    groups: dict[int, list[RankOneTerm]] = {}
    for t in poly.terms:
        groups.setdefault(t.order, []).append(t)
    for order in sorted(groups):
        ts = groups[order]
        yield order, np.array([t.weight for t in ts]), np.array([t.direction for t in ts])


def from_monomials(monomials: dict, n: int) -> RankOnePoly:
    """Rank-one form of ``sum coef * x**alpha`` over exponent tuples ``alpha``.

    Uses the finite-difference identity
    ``k! x**alpha = sum_{beta <= alpha} (-1)**|alpha - beta| C(alpha, beta) <beta, x>**k``.
    """
    terms = []
    const = 0.0
    for alpha, coef in monomials.items():
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != n:
            raise ValueError(f"exponent {alpha} does not match n={n}")
        k = sum(alpha)
        if k == 0:
            const += coef
            continue
        for beta in itertools.product(*(range(a + 1) for a in alpha)):
            if not any(beta):
                continue
            sign = (-1) ** (k - sum(beta))
            mult = math.prod(math.comb(a, c) for a, c in zip(alpha, beta))
            terms.append(RankOneTerm(k, coef * sign * mult / math.factorial(k), np.array(beta, dtype=float)))
    if const:
        terms.insert(0, RankOneTerm(0, const, np.zeros(n)))
    return RankOnePoly(n, terms)


def quadratic_poly(C) -> RankOnePoly:
    """Rank-one form of ``x^T C x`` from the eigendecomposition of symmetric ``C``."""
    C = _check_symmetric(C)
    w, U = np.linalg.eigh(C)
    return RankOnePoly(C.shape[0], [RankOneTerm(2, lam, U[:, i]) for i, lam in enumerate(w)])


# --- trig -> polynomial ----------------------------------------------------

@dataclass(frozen=True)
class ExpansionConfig:
    """How ``sin t`` and ``cos t`` are replaced by degree-``order`` polynomials.

    ``domain_radius`` bounds ``|t|`` for the Chebyshev scheme. It may be left
    as ``None`` when the caller (e.g. qSHAP) derives it from the explained box.
    """

    scheme: str = "taylor"
    order: int = 9
    domain_radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", self.scheme.lower())
        if self.scheme not in ("taylor", "chebyshev"):
            raise ValueError(f"unknown expansion scheme {self.scheme!r}")
        if self.order < 0:
            raise ValueError("expansion order must be >= 0")
        if self.domain_radius is not None and self.domain_radius <= 0:
            raise ValueError("domain_radius must be > 0")


def trig_coefficients(config: ExpansionConfig) -> tuple[np.ndarray, np.ndarray]:
    """Monomial coefficients (in ``t``) approximating ``sin t`` and ``cos t``."""
    K = config.order
    k = np.arange(K + 1)
    if config.scheme == "taylor":
        fact = np.array([math.factorial(i) for i in k], dtype=float)
        sin_c = np.where(k % 2 == 1, (-1.0) ** ((k - 1) // 2) / fact, 0.0)
        cos_c = np.where(k % 2 == 0, (-1.0) ** (k // 2) / fact, 0.0)
        return sin_c, cos_c
    R = config.domain_radius
    if R is None:
        raise ValueError("the Chebyshev scheme needs a domain_radius")
    out = []
    for fn in (np.sin, np.cos):
        # interpolation at the K+1 first-kind Chebyshev nodes of [-1, 1]
        c_u = cheb.cheb2poly(cheb.chebinterpolate(lambda u: fn(R * u), K))
        c_u = np.pad(c_u, (0, K + 1 - c_u.size))
        with np.errstate(under="ignore", over="ignore"):
            c_t = c_u / float(R) ** k
        if np.any((c_t == 0) & (np.abs(c_u) > 1e-300)) or not np.all(np.isfinite(c_t)):
            warnings.warn(
                f"Chebyshev coefficients under/overflow for order {K} and radius {R}",
                RuntimeWarning, stacklevel=2,
            )
            c_t = np.nan_to_num(c_t, nan=0.0, posinf=0.0, neginf=0.0)
        # sin is odd and cos even; drop the rounding residue on the other parity
        c_t[k % 2 == (0 if fn is np.sin else 1)] = 0.0
        out.append(c_t)
    return out[0], out[1]


def expand_series(series: FourierSeries, config: ExpansionConfig, center=None) -> RankOnePoly:
    """Polynomial approximation of a Fourier series in rank-one form.

    With ``center`` given, the series is first rewritten in ``z = phi - center``
    and expanded there; the returned polynomial carries ``center`` as its
    offset. Expanding around the middle of the region of interest keeps
    ``|<w, z>|`` small, which is what the truncation error depends on.
    """
    n = series.n
    if center is not None:
        center = np.asarray(center, dtype=float).ravel()
        series = series.shifted(center)
    sin_c, cos_c = trig_coefficients(config)
    const = 0.0
    terms = []
    for omega, (a, b) in series.terms.items():
        if not any(omega):
            const += b
            continue
        coef = a * sin_c + b * cos_c
        const += coef[0]
        v = np.array(omega, dtype=float)
        for k in range(1, coef.size):
            if coef[k] != 0.0:
                terms.append(RankOneTerm(k, coef[k], v))
    if const != 0.0:
        terms.insert(0, RankOneTerm(0, const, np.zeros(n)))
    return RankOnePoly(n, terms, center)


def box_radius(series: FourierSeries, x, b) -> float:
    """``max_w max_z |<w, z - (x+b)/2>|`` over the box spanned by ``x`` and ``b``."""
    half_span = np.abs(np.asarray(x, float) - np.asarray(b, float)) / 2
    r = max((float(np.abs(np.array(w)) @ half_span) for w in series.terms), default=0.0)
    return r


# --- SHAP ------------------------------------------------------------------

class OpCounter:
    """Tally of scalar multiply-adds performed by :func:`polynomial_shap`."""

    def __init__(self):
        self.ops = 0

    def add(self, k):
        self.ops += int(k)


def _odd_parity_table(C: np.ndarray, K: int, counter: OpCounter | None):
    """Prefix and suffix products of ``sum_g (c z)^g / g! * s^[g odd]``.

    Entry ``[:, d, q]`` holds the coefficient of ``z^d s^q``; only ``q <= d``
    can be nonzero, so both axes stop at ``K``.
    """
    p, n = C.shape
    ident = np.zeros((p, K + 1, K + 1))
    ident[:, 0, 0] = 1.0
    inv_fact = np.array([1.0 / math.factorial(g) for g in range(K + 1)])

    def mul(T, c):
        out = np.zeros_like(T)
        cg = c[:, None] ** np.arange(K + 1)[None, :] * inv_fact  # (p, K+1)
        for g in range(K + 1):
            shift = g % 2
            out[:, g:, shift:] += T[:, : K + 1 - g, : K + 1 - shift] * cg[:, g, None, None]
            if counter is not None:
                counter.add(p * (K + 1 - g) * (K + 1 - shift))
        return out

    pre = [ident]
    for h in range(n):
        pre.append(mul(pre[-1], C[:, h]))
    suf = [ident]
    for h in reversed(range(n)):
        suf.append(mul(suf[-1], C[:, h]))
    suf.reverse()
    return pre, suf


def polynomial_shap(poly: RankOnePoly, x, b, counter: OpCounter | None = None) -> AttributionResult:
    """Exact Baseline SHAP values of a rank-one polynomial.

    For a term ``lam <v, z>^r`` with ``M = (x+b)/2`` and ``D = x - b``, write the
    coalition point as ``M + D_e/2 + eps * D'/2`` where ``eps`` is +1 on the
    coalition and -1 elsewhere (``D'`` is ``D`` with entry ``e`` zeroed).
    Expanding the power and averaging ``eps`` under the Shapley weights gives

        Sh(e) = 2 lam sum_{j+m+k=r, m odd, k even} r!/(j! m! k!)
                <v, M>^j (v_e D_e / 2)^m G_k(e)

        G_k(e) = sum_{|g|=k, g_e=0} k!/g! prod_h (v_h D_h / 2)^{g_h} / (odd(g) + 1)

    where ``odd(g)`` counts odd entries. The Shapley average of a product of
    ``q`` signs is ``1/(q+1)`` for even ``q`` and 0 for odd ``q``. ``G_k`` is
    evaluated with a prefix/suffix product over features, so the cost is
    linear in the number of features for fixed order.
    """
    x = np.asarray(x, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n = poly.n
    if x.size != n or b.size != n:
        raise ValueError(f"x and b must have dimension {n}")
    sh = np.zeros(n)
    meta = {"terms": len(poly.terms), "max_order": poly.max_order}
    if np.array_equal(x, b) or not poly.terms:
        return AttributionResult(sh, "polynomial_shap", 0, metadata=meta)
    xs, bs = x - poly.offset, b - poly.offset
    M = (xs + bs) / 2
    D = xs - bs
    for r, lam, V in _group_by_order(poly):
        if r == 0:
            continue
        p = lam.size
        vm = V @ M
        U = V * (D / 2)  # U[i, h] = v_ih D_h / 2
        if counter is not None:
            counter.add(2 * p * n)
        K = r - 1 if (r - 1) % 2 == 0 else r - 2  # largest even k with m >= 1
        combos = [
            (r - m - k, m, k)
            for k in range(0, K + 1, 2)
            for m in range(1, r - k + 1, 2)
        ]
        if K >= 2:
            pre, suf = _odd_parity_table(U, K, counter)
            W = 1.0 / (np.arange(K + 1)[:, None] + np.arange(K + 1)[None, :] + 1.0)
        for e in range(n):
            if D[e] == 0.0:
                continue
            G = np.zeros((p, K + 1))
            G[:, 0] = 1.0
            if K >= 2:
                P, S = pre[e], suf[e + 1]
                for k in range(2, K + 1, 2):
                    acc = np.zeros(p)
                    for d in range(k + 1):
                        acc += np.einsum("pa,ab,pb->p", P[:, d, :], W, S[:, k - d, :])
                    G[:, k] = math.factorial(k) * acc
                    if counter is not None:
                        counter.add(p * (k + 1) * (K + 1) ** 2)
            ue = U[:, e]
            total = np.zeros(p)
            for j, m, k in combos:
                c = math.factorial(r) / (math.factorial(j) * math.factorial(m) * math.factorial(k))
                total += c * vm ** j * ue ** m * G[:, k]
            if counter is not None:
                counter.add(p * len(combos))
            sh[e] += 2.0 * float(lam @ total)
    return AttributionResult(sh, "polynomial_shap", 0, metadata=meta)


def _check_symmetric(C, tol=1e-12):
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("C must be a square matrix")
    if np.max(np.abs(C - C.T), initial=0.0) > tol:
        raise ValueError("C must be symmetric")
    return C


def shap_quadratic(C, x, b) -> AttributionResult:
    """Baseline SHAP of ``x^T C x``: ``Sh(e) = 2 (M^T C)_e D_e``."""
    C = _check_symmetric(C)
    x = np.asarray(x, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if x.size != C.shape[0] or b.size != C.shape[0]:
        raise ValueError("x and b must match the size of C")
    M = (x + b) / 2
    return AttributionResult(2.0 * (M @ C) * (x - b), "shap_quadratic", 0)
