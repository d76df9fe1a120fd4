"""Partial dirty-paper precoding and its mutual-information identities.

The achievability side of both capacity results rests on one algebraic
fact: with the auxiliary ``U = X2 + A V`` and the right precoding matrix
``A``, the rate written as a conditional-MI difference equals the rate of
the binning scheme, so precoding the known interference away costs
nothing.  This module builds the precoders and verifies the identities
numerically on explicit joint Gaussian covariances via
:func:`secbc.channel.joint_mi` -- no closed form is trusted on its own.

Block order in every joint covariance assembled here is fixed to
``(vstar, x1, x2, u, x, y1, y2)`` so indexing is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GaussianBc, JointGaussian, joint_mi, make_channel
from .errors import DegenerateInstanceError
from .matops import ORDER_TOL, logdet2, psd_leq, validate_psd

__all__ = [
    "DpcInstance",
    "effective_gain",
    "precoder",
    "precoder_wtc",
    "dpc_joint",
    "dpc_identity_check",
    "wtc_point_check",
    "random_psd",
    "random_channel",
    "random_instance",
]


@dataclass(frozen=True)
class DpcInstance:
    """One precoding scenario: channel plus the three signal layers.

    ``k1`` is the pre-subtracted layer (artificial noise at receiver 1),
    ``k2`` the confidential signal and ``kv`` the known interference that
    the precoder cancels.
    """

    ch: GaussianBc
    k1: np.ndarray
    k2: np.ndarray
    kv: np.ndarray

    def __post_init__(self):
        t = self.ch.t
        for name in ("k1", "k2", "kv"):
            mat = validate_psd(getattr(self, name), name=name)
            if mat.shape[0] != t:
                raise ValueError(f"{name} has dim {mat.shape[0]}, expected {t}")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)


def effective_gain(g1, k1) -> np.ndarray:
    """Gain seen after absorbing the ``k1`` layer into the noise floor.

    ``(I + G1 K1 G1^T)^{-1/2} G1`` with the symmetric inverse square root
    taken through the eigendecomposition Q diag(1/sqrt(lam)) Q^T.
    """
    g1 = np.asarray(g1, dtype=float)
    k1 = validate_psd(k1, name="k1")
    sigma = np.eye(g1.shape[0]) + g1 @ k1 @ g1.T
    evals, vecs = np.linalg.eigh(sigma)
    inv_sqrt = (vecs / np.sqrt(evals)) @ vecs.T
    return inv_sqrt @ g1


def precoder(k2, gtilde) -> np.ndarray:
    """Precoding matrix ``A = K2 Gt^T (I + Gt K2 Gt^T)^{-1}``.

    This is the MMSE estimator of the signal from the whitened channel
    output; the coefficient applied to the interference vector itself is
    ``A @ gtilde`` (the interference reaches the receiver through the
    effective gain), which is what the identity checks use.
    """
    k2 = validate_psd(k2, name="k2")
    gtilde = np.asarray(gtilde, dtype=float)
    if gtilde.shape != k2.shape:
        raise ValueError("gtilde and k2 must share the same square shape")
    m = np.eye(k2.shape[0]) + gtilde @ k2 @ gtilde.T
    return k2 @ gtilde.T @ np.linalg.inv(m)


def precoder_wtc(kstar, g1) -> np.ndarray:
    """Wiretap specialization ``A = K* G1^T (I + G1 K* G1^T)^{-1}``."""
    return precoder(kstar, np.asarray(g1, dtype=float))


def _assemble_joint(ch: GaussianBc, kv, k1, k2, a) -> JointGaussian:
    # Base independent variables: (vstar, x1, x2, z1, z2).
    t = ch.t
    eye = np.eye(t)
    zero = np.zeros((t, t))
    base = np.zeros((5 * t, 5 * t))
    for i, cov in enumerate((kv, k1, k2, eye, eye)):
        base[i * t : (i + 1) * t, i * t : (i + 1) * t] = cov
    rows = {
        "vstar": [eye, zero, zero, zero, zero],
        "x1": [zero, eye, zero, zero, zero],
        "x2": [zero, zero, eye, zero, zero],
        "u": [a, zero, eye, zero, zero],
        "x": [eye, eye, eye, zero, zero],
        "y1": [ch.g1, ch.g1, ch.g1, eye, zero],
        "y2": [ch.g2, ch.g2, ch.g2, zero, eye],
    }
    lmap = np.vstack([np.hstack(rows[name]) for name in rows])
    sigma = lmap @ base @ lmap.T
    sigma = 0.5 * (sigma + sigma.T)
    names = tuple(rows)
    return JointGaussian(names, (t,) * len(names), sigma)


def dpc_joint(inst: DpcInstance) -> JointGaussian:
    """Joint covariance of (vstar, x1, x2, u, x, y1, y2) for the instance.

    The auxiliary block is U = X2 + A Gt V with Gt the effective gain:
    the known interference is cancelled at its received strength.
    """
    gtilde = effective_gain(inst.ch.g1, inst.k1)
    a = precoder(inst.k2, gtilde) @ gtilde
    return _assemble_joint(inst.ch, inst.kv, inst.k1, inst.k2, a)


def dpc_identity_check(inst: DpcInstance) -> tuple[float, float, float]:
    """Evaluate both sides of the precoding identity on the instance.

    lhs = I(X2; Y1 | V) - I(X2; Y2 | V) and
    rhs = I(U; Y1) - I(U; V) - I(U; Y2 | V) with U = X2 + A V; both sides
    are computed through the joint-covariance oracle and the absolute gap
    is returned alongside.
    """
    t = inst.ch.t
    if np.linalg.eigvalsh(inst.k2).min() <= 1e-12:
        raise DegenerateInstanceError(
            "k2 is singular: U would carry a deterministic component and "
            "I(U; V) would be infinite"
        )
    gtilde = effective_gain(inst.ch.g1, inst.k1)
    a = precoder(inst.k2, gtilde) @ gtilde
    ku = inst.k2 + a @ inst.kv @ a.T
    if np.linalg.eigvalsh(0.5 * (ku + ku.T)).min() <= 1e-12:
        raise DegenerateInstanceError("U = X2 + A V is degenerate")
    joint = _assemble_joint(inst.ch, inst.kv, inst.k1, inst.k2, a)
    if np.abs(inst.kv).max() < 1e-15:
        # Constant interference: conditioning on V is vacuous and
        # I(U; V) = 0, but the log-det oracle cannot divide by |K_V|.
        lhs = joint_mi(joint, "x2", "y1") - joint_mi(joint, "x2", "y2")
        rhs = joint_mi(joint, "u", "y1") - joint_mi(joint, "u", "y2")
    else:
        lhs = joint_mi(joint, "x2", "y1", "vstar") - joint_mi(
            joint, "x2", "y2", "vstar"
        )
        rhs = (
            joint_mi(joint, "u", "y1")
            - joint_mi(joint, "u", "vstar")
            - joint_mi(joint, "u", "y2", "vstar")
        )
    return lhs, rhs, abs(lhs - rhs)


def wtc_point_check(ch: GaussianBc, kstar, k=None) -> tuple[float, float]:
    """Achieved vs target corner rate of the wiretap construction.

    Splits the power as X = X1 + X2 with cov(X1) = ``kstar`` and
    cov(X2) = ``k - kstar``, precodes U = X1 + A X2 against the X2 layer
    and evaluates achieved = I(U;Y1) - I(U;V) - I(U;Y2|V) with V = X2.
    The target is the closed-form wiretap rate of ``kstar``.  When ``k``
    is omitted the enclosing constraint defaults to ``kstar + I`` so the
    interference layer is nontrivial.
    """
    kstar = validate_psd(kstar, name="kstar")
    t = ch.t
    if kstar.shape[0] != t:
        raise ValueError(f"kstar has dim {kstar.shape[0]}, channel has {t}")
    if np.abs(kstar).max() < 1e-15:
        return 0.0, 0.0
    if np.linalg.eigvalsh(kstar).min() <= 1e-12:
        raise DegenerateInstanceError("kstar must be zero or strictly definite")
    if k is None:
        k = kstar + np.eye(t)
    k = validate_psd(k, name="k")
    if not psd_leq(kstar, k, ORDER_TOL):
        raise ValueError("precondition violated: kstar is not below k")
    kdiff = 0.5 * ((k - kstar) + (k - kstar).T)
    a = precoder_wtc(kstar, ch.g1) @ ch.g1
    # Reuse the generic assembler with relabeled roles: the known
    # interference layer is X2 (cov kdiff) and there is no noise layer.
    joint = _assemble_joint(ch, kdiff, np.zeros((t, t)), kstar, a)
    # Blocks now read: vstar = X2, x2 = X1, u = X1 + A X2.
    if np.abs(kdiff).max() < 1e-14 or np.linalg.eigvalsh(kdiff).min() <= 1e-12:
        if np.abs(kdiff).max() >= 1e-14:
            raise DegenerateInstanceError("k - kstar is singular but nonzero")
        achieved = joint_mi(joint, "u", "y1") - joint_mi(joint, "u", "y2")
    else:
        achieved = (
            joint_mi(joint, "u", "y1")
            - joint_mi(joint, "u", "vstar")
            - joint_mi(joint, "u", "y2", "vstar")
        )
    eye = np.eye(t)
    target = 0.5 * (
        logdet2(eye + ch.g1 @ kstar @ ch.g1.T)
        - logdet2(eye + ch.g2 @ kstar @ ch.g2.T)
    )
    return achieved, target


def random_psd(t: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random PSD matrix, a.s. full rank, spectral scale ~``scale``."""
    a = rng.normal(size=(t, t))
    out = scale * (a @ a.T) / t
    return 0.5 * (out + out.T)


def random_channel(t: int, rng: np.random.Generator) -> GaussianBc:
    """Random invertible gain pair; redraws nearly singular gains."""
    gains = []
    while len(gains) < 2:
        g = rng.normal(size=(t, t))
        if abs(np.linalg.det(g)) > 1e-3:
            gains.append(g)
    return make_channel(*gains)


def random_instance(t: int, rng: np.random.Generator) -> DpcInstance:
    """Random nondegenerate instance for identity checking.

    ``k2`` and ``kv`` are kept strictly definite (a ridge is added);
    ``k1`` is rank deficient for every third draw to exercise the
    singular-layer path.
    """
    ch = random_channel(t, rng)
    k1 = random_psd(t, rng)
    if rng.integers(3) == 0 and t > 1:
        u = rng.normal(size=(t, 1))
        k1 = u @ u.T  # rank-1 artificial noise layer
    k2 = random_psd(t, rng) + 0.1 * np.eye(t)
    kv = random_psd(t, rng) + 0.1 * np.eye(t)
    return DpcInstance(ch, k1, k2, kv)
