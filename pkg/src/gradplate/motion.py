"""Closed-form midsurface motions y(Y, t) on the periodic cell [0, 2*pi)^2.

A motion is ``y = Q (Y + eps * sum(terms)) + v`` where ``Y = (Y1, Y2, 0)``,
``Q`` is a fixed rotation and each term is a displacement field with exact
derivatives of every order.  Evaluation returns a :class:`~gradplate._jet.Jet`
of the chosen degree, so any derivative up to that degree is available.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._jet import Jet, monomials

COMPONENTS = {"u1": 0, "u2": 1, "w": 2}


@dataclass(frozen=True)
class TimeLaw:
    """``poly(t) * cos(omega * t + psi)``; ``poly`` lists ascending coefficients."""

    poly: tuple[float, ...] = (1.0,)
    omega: float = 0.0
    psi: float = 0.0

    @staticmethod
    def parse(text: str) -> TimeLaw:
        """Parse e.g. ``static``, ``cos(2)``, ``sin(0.5,0.1)``, ``poly(0;1)*cos(3)``."""
        poly = np.array([1.0])
        omega, psi = 0.0, 0.0
        trig_seen = False
        for factor in text.replace(" ", "").split("*"):
            m = re.fullmatch(r"(static|cos|sin|poly)(?:\((.*)\))?", factor)
            if m is None:
                raise ValueError(f"unrecognized time law factor {factor!r}")
            kind, args = m.group(1), m.group(2)
            if kind == "static":
                if args:
                    raise ValueError("static takes no arguments")
                continue
            if args is None:
                raise ValueError(f"{kind} needs arguments")
            if kind == "poly":
                coeffs = [float(x) for x in args.split(";")]
                poly = np.polynomial.polynomial.polymul(poly, coeffs)
                continue
            if trig_seen:
                raise ValueError("at most one cos/sin factor per time law")
            trig_seen = True
            vals = [float(x) for x in args.split(",")]
            if len(vals) not in (1, 2):
                raise ValueError(f"{kind} takes OMEGA[,PHASE]")
            omega = vals[0]
            psi = vals[1] if len(vals) == 2 else 0.0
            if kind == "sin":
                psi -= math.pi / 2
        return TimeLaw(tuple(float(c) for c in poly), omega, psi)

    def derivative(self, t: float, n: int) -> float:
        """n-th time derivative at t (Leibniz rule)."""
        p = np.polynomial.Polynomial(self.poly)
        total = 0.0
        for m in range(n + 1):
            pd = p.deriv(n - m)(t) if n - m > 0 else p(t)
            trig = self.omega**m * math.cos(self.omega * t + self.psi + m * math.pi / 2)
            total += math.comb(n, m) * pd * trig
        return total


STATIC = TimeLaw()


class Term:
    """A displacement field; subclasses return a Jet of value shape (*pts, 3)."""

    def jet(self, Y: np.ndarray, t: float, degree: int) -> Jet:
        raise NotImplementedError


@dataclass(frozen=True)
class FourierMode(Term):
    """``amp * cos(m1 Y1 + m2 Y2 + phase) * law(t)`` along one component."""

    component: int
    m1: int
    m2: int
    amp: float
    phase: float = 0.0
    law: TimeLaw = STATIC

    def jet(self, Y, t, degree):
        Y = np.asarray(Y, dtype=float)
        theta = self.m1 * Y[..., 0] + self.m2 * Y[..., 1] + self.phase
        tder = [self.law.derivative(t, k) for k in range(degree + 1)]
        mons = monomials(degree)
        c = np.zeros((len(mons),) + Y.shape[:-1] + (3,))
        for n, (i, j, k) in enumerate(mons):
            spatial = self.m1**i * self.m2**j * np.cos(theta + (i + j) * math.pi / 2)
            norm = math.factorial(i) * math.factorial(j) * math.factorial(k)
            c[n, ..., self.component] = self.amp * spatial * tder[k] / norm
        return Jet(c, degree)


@dataclass(frozen=True)
class AffineTerm(Term):
    """Displacement ``G @ (Y1, Y2) + offset + t * velocity``."""

    G: tuple = ((0.0, 0.0), (0.0, 0.0), (0.0, 0.0))
    offset: tuple = (0.0, 0.0, 0.0)
    velocity: tuple = (0.0, 0.0, 0.0)

    def jet(self, Y, t, degree):
        Y = np.asarray(Y, dtype=float)
        G = np.asarray(self.G, dtype=float)
        c = np.zeros((len(monomials(degree)),) + Y.shape[:-1] + (3,))
        vel = np.asarray(self.velocity, dtype=float)
        c[0] = Y @ G.T + np.asarray(self.offset) + t * vel
        if degree >= 1:
            c[1] = G[:, 0]
            c[2] = G[:, 1]
            c[3] = vel
        return Jet(c, degree)


@dataclass(frozen=True)
class CylinderTerm(Term):
    """Displacement that rolls the plane onto a cylinder of radius R about Y1."""

    R: float

    def jet(self, Y, t, degree):
        Y = np.asarray(Y, dtype=float)
        s = Y[..., 1] / self.R
        mons = monomials(degree)
        c = np.zeros((len(mons),) + Y.shape[:-1] + (3,))
        for n, (i, j, k) in enumerate(mons):
            if k > 0 or i > 0:
                continue
            # d^j/dY2^j of R sin(s) and R(1 - cos(s)), minus the identity part
            scale = self.R ** (1 - j) / math.factorial(j)
            c[n, ..., 1] = scale * np.sin(s + j * math.pi / 2)
            c[n, ..., 2] = -scale * np.cos(s + j * math.pi / 2)
            if j == 0:
                c[n, ..., 1] -= Y[..., 1]
                c[n, ..., 2] += self.R
            elif j == 1:
                c[n, ..., 1] -= 1.0
        return Jet(c, degree)


def _identity_jet(Y, degree):
    Y = np.asarray(Y, dtype=float)
    c = np.zeros((len(monomials(degree)),) + Y.shape[:-1] + (3,))
    c[0, ..., :2] = Y
    if degree >= 1:
        c[1, ..., 0] = 1.0
        c[2, ..., 1] = 1.0
    return Jet(c, degree)


@dataclass(frozen=True)
class SurfaceMotion:
    terms: tuple = ()
    eps: float = 1.0
    rotation: tuple | None = None
    translation: tuple = (0.0, 0.0, 0.0)

    def displacement_jet(self, Y, t: float, degree: int) -> Jet:
        """Jet of ``sum(terms)`` without the identity, scale or rigid part."""
        Y = np.asarray(Y, dtype=float)
        total = Jet.constant(np.zeros(Y.shape[:-1] + (3,)), degree)
        for term in self.terms:
            total = total + term.jet(Y, t, degree)
        return total

    def jet(self, Y, t: float, degree: int) -> Jet:
        y = _identity_jet(Y, degree) + self.eps * self.displacement_jet(Y, t, degree)
        if self.rotation is not None:
            Q = np.asarray(self.rotation, dtype=float)
            y = Jet(np.einsum("ij,n...j->n...i", Q, y.c), degree)
        return y + np.asarray(self.translation, dtype=float)

    def __call__(self, Y, t: float = 0.0) -> np.ndarray:
        return self.jet(Y, t, 0).value

    # -- builders -----------------------------------------------------------
    def plus(self, *terms: Term) -> SurfaceMotion:
        return SurfaceMotion(self.terms + tuple(terms), self.eps, self.rotation, self.translation)

    def scaled(self, eps: float) -> SurfaceMotion:
        return SurfaceMotion(self.terms, eps, self.rotation, self.translation)

    def rigidly_moved(self, Q, v=(0.0, 0.0, 0.0)) -> SurfaceMotion:
        """Superimpose the rigid motion ``x -> Q x + v``."""
        Q = np.asarray(Q, dtype=float)
        Q0 = np.eye(3) if self.rotation is None else np.asarray(self.rotation)
        t0 = np.asarray(self.translation)
        return SurfaceMotion(
            self.terms, self.eps, tuple(map(tuple, Q @ Q0)), tuple(Q @ t0 + np.asarray(v))
        )

    @staticmethod
    def identity() -> SurfaceMotion:
        return SurfaceMotion()

    @staticmethod
    def stretch(e: float) -> SurfaceMotion:
        return SurfaceMotion((AffineTerm(G=((e, 0.0), (0.0, e), (0.0, 0.0))),))

    @staticmethod
    def affine(G, offset=(0.0, 0.0, 0.0), velocity=(0.0, 0.0, 0.0)) -> SurfaceMotion:
        G = tuple(map(tuple, np.asarray(G, dtype=float)))
        return SurfaceMotion((AffineTerm(G, tuple(offset), tuple(velocity)),))

    @staticmethod
    def cylinder(R: float) -> SurfaceMotion:
        return SurfaceMotion((CylinderTerm(R),))

    @staticmethod
    def fourier(modes: Sequence[FourierMode], eps: float = 1.0) -> SurfaceMotion:
        return SurfaceMotion(tuple(modes), eps)


def parse_motion_text(text: str, eps: float = 1.0, source: str = "<string>") -> SurfaceMotion:
    """Rows ``component m1 m2 amp phase time_law``; ``#`` starts a comment."""
    modes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"{source}:{lineno}: expected 6 fields, got {len(parts)}")
        comp, m1, m2, amp, phase, law = parts
        if comp not in COMPONENTS:
            raise ValueError(f"{source}:{lineno}: component must be one of {sorted(COMPONENTS)}")
        try:
            modes.append(
                FourierMode(COMPONENTS[comp], int(m1), int(m2), float(amp), float(phase), TimeLaw.parse(law))
            )
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    return SurfaceMotion.fourier(modes, eps)


def load_motion(path, eps: float = 1.0) -> SurfaceMotion:
    path = Path(path)
    return parse_motion_text(path.read_text(), eps, source=str(path))
