"""Request/response models and handlers shared by the HTTP service and the CLI.

Exact rationals travel as strings "p/q" (or plain integers); complex
function values as numbers or [re, im] pairs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator

from . import additive, equidist, fourier, gowers, rbpl
from .brackets import FracProd
from .nilmani import ElemNilmanifold, PolySeq
from .ratmod import Poly, fmt, is_prime
from .rng import SplitMix64
from .tables import cell

Rational = str | int


class InputError(ValueError):
    """Well-formed request with invalid content."""


def rational(x: Rational) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise InputError(f"expected an exact rational as 'p/q' or an integer, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {x!r}") from exc


def function_values(values: list) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise InputError("complex values are [re, im] pairs")
            out.append(complex(float(v[0]), float(v[1])))
        else:
            out.append(complex(float(v)))
    if not out:
        raise InputError("function has no values")
    return np.array(out)


def _prime(N: int) -> int:
    if not is_prime(N):
        raise InputError(f"N = {N} is not prime")
    return N


FnValues = list[float | list[float]]


# tunable module constants, as accepted in requests and config files
SETTINGS: dict[str, type] = {
    "rbpl.small_n": int,
    "rbpl.max_length_factor": int,
    "equidist.small_n": int,
    "equidist.vdc_checks": int,
    "fourier.smoothness": int,
    "fourier.radius_start": int,
    "fourier.radius_max": int,
    "fourier.min_width": float,
    "bohr.grid_points": int,
}


def check_settings(settings: dict[str, float]) -> dict[str, float]:
    out = {}
    for key, val in settings.items():
        kind = SETTINGS.get(key)
        if kind is None:
            raise InputError(f"unknown setting {key!r}")
        if kind is int and float(val) != int(val):
            raise InputError(f"setting {key} must be an integer")
        out[key] = kind(val)
    return out


def _section(settings: dict[str, float], prefix: str) -> dict:
    s = check_settings(settings)
    return {k.split(".", 1)[1]: v for k, v in s.items() if k.startswith(prefix + ".")}


def solve_config(settings: dict[str, float]) -> rbpl.SolveConfig:
    return rbpl.SolveConfig(**_section(settings, "rbpl"))


def dichotomy_config(settings: dict[str, float]) -> equidist.DichotomyConfig:
    return equidist.DichotomyConfig(**_section(settings, "equidist"), solver=solve_config(settings))


def expansion_config(settings: dict[str, float]) -> fourier.ExpansionConfig:
    return fourier.ExpansionConfig(**_section(settings, "fourier"))


# gowers --------------------------------------------------------------------------

class GowersNormRequest(BaseModel):
    values: FnValues
    s: int = Field(2, ge=1, le=4)


class GowersNormResponse(BaseModel):
    N: int
    s: int
    norm: float


def gowers_norm(req: GowersNormRequest) -> GowersNormResponse:
    f = function_values(req.values)
    return GowersNormResponse(N=len(f), s=req.s, norm=gowers.gowers_norm(f, req.s))


# counting averages --------------------------------------------------------------------

class CountRequest(BaseModel):
    kind: Literal["lambda", "lambda1", "dual", "compare"] = "lambda"
    f: FnValues
    g: FnValues
    k: FnValues
    p: FnValues | None = None
    P: list[int] = [0, 1]
    Q: list[int] = [0, 2]


class CountResponse(BaseModel):
    kind: str
    N: int
    value: list[float] | None = None
    lambda1: list[float] | None = None
    dual: list[list[float]] | None = None


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def count(req: CountRequest) -> CountResponse:
    f, g, k = (function_values(v) for v in (req.f, req.g, req.k))
    N = len(f)
    try:
        if req.kind == "dual":
            D = gowers.dual_D(f, g, k, req.P, req.Q)
            return CountResponse(kind="dual", N=N, dual=[_pair(z) for z in D])
        if req.p is None:
            raise InputError(f"{req.kind} needs a fourth function p")
        p = function_values(req.p)
        if req.kind == "lambda":
            return CountResponse(kind="lambda", N=N, value=_pair(gowers.lam(f, g, k, p, req.P, req.Q)))
        if req.kind == "lambda1":
            return CountResponse(kind="lambda1", N=N, lambda1=_pair(gowers.lam1(f, g, k, p)))
        # side-by-side numbers only; no relation between the two is asserted
        return CountResponse(kind="compare", N=N, value=_pair(gowers.lam(f, g, k, p, req.P, req.Q)),
                             lambda1=_pair(gowers.lam1(f, g, k, p)))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# bracket-linear solver -----------------------------------------------------------------

class RBPLInstanceModel(BaseModel):
    N: int
    a: list[Rational]
    alpha: list[Rational]
    beta: Rational = "0"
    K: Rational = "0"
    H: list[int]

    def build(self) -> rbpl.RBPLInstance:
        try:
            return rbpl.instance_from_dict({**self.model_dump(), "a": [str(x) for x in self.a],
                                            "alpha": [str(x) for x in self.alpha],
                                            "beta": str(self.beta), "K": str(self.K)})
        except (rbpl.InstanceError, ValueError, ZeroDivisionError) as exc:
            raise InputError(str(exc)) from exc


class CertificateModel(BaseModel):
    w: list[list[int]]
    eta: list[list[int]]
    w_bound: str | None = None
    mod1: bool = False
    r: int | None = None


class RBPLRequest(BaseModel):
    instance: RBPLInstanceModel
    certificate: CertificateModel | None = None
    height: int | None = Field(None, ge=1)
    settings: dict[str, float] = {}


class RBPLResponse(BaseModel):
    branch: Literal["Certificate", "SmallN", "None"]
    certificate: CertificateModel | None = None
    verified: bool | None = None
    violations: list[str] = []
    detail: str = ""


def _verified(inst, cert) -> tuple[bool, list[str]]:
    rep = rbpl.verify(inst, cert)
    return rep.ok, rep.violations


def rbpl_solve(req: RBPLRequest) -> RBPLResponse:
    inst = req.instance.build()
    try:
        cert = rbpl.solve(inst, solve_config(req.settings))
    except rbpl.InstanceError as exc:
        raise InputError(str(exc)) from exc
    if isinstance(cert, rbpl.DegenerateReport):
        return RBPLResponse(branch="SmallN", detail=f"{cert.reason}: {cert.detail}".rstrip(": "))
    ok, bad = _verified(inst, cert)
    return RBPLResponse(branch="Certificate", certificate=CertificateModel(**rbpl.certificate_to_dict(cert)),
                        verified=ok, violations=bad)


def rbpl_verify(req: RBPLRequest) -> RBPLResponse:
    inst = req.instance.build()
    if req.certificate is None:
        raise InputError("verify needs a certificate")
    cert = rbpl.certificate_from_dict(req.certificate.model_dump())
    ok, bad = _verified(inst, cert)
    return RBPLResponse(branch="Certificate", certificate=req.certificate, verified=ok, violations=bad)


def rbpl_oracle(req: RBPLRequest) -> RBPLResponse:
    inst = req.instance.build()
    if inst.d > 4:
        raise InputError("brute force is limited to d <= 4")
    cert = rbpl.brute_force(inst, req.height or 3)
    if cert is None:
        return RBPLResponse(branch="None", detail=f"no certificate with entries up to {req.height or 3}")
    ok, bad = _verified(inst, cert)
    return RBPLResponse(branch="Certificate", certificate=CertificateModel(**rbpl.certificate_to_dict(cert)),
                        verified=ok, violations=bad)


# equidistribution -------------------------------------------------------------------------

class SequenceModel(BaseModel):
    alpha: list[Rational]
    beta: list[Rational]
    P: list[Rational] = []

    def build(self) -> PolySeq:
        if len(self.alpha) != len(self.beta):
            raise InputError("alpha and beta must have equal length")
        return PolySeq(tuple(rational(x) for x in self.alpha), tuple(rational(x) for x in self.beta),
                       Poly(tuple(rational(x) for x in self.P)))


class EquidistRequest(BaseModel):
    N: int
    sequence: SequenceModel
    delta: float = Field(0.1, gt=0, le=1)
    k: int = Field(1, ge=1)
    settings: dict[str, float] = {}


class EquidistResponse(BaseModel):
    branch: str
    N: int
    mean: float | None = None
    w: list[list[int]] = []
    eta: list[list[int]] = []
    verified: bool | None = None
    violations: list[str] = []
    diagnostics: dict[str, Any] = {}
    per_h: list[tuple[int, float, bool]] = []


def equidist_run(req: EquidistRequest) -> EquidistResponse:
    N = _prime(req.N)
    g = req.sequence.build()
    M = ElemNilmanifold(g.d, req.k)
    try:
        mean = equidist.mean_correlation(M, g, N)
        res = equidist.run_dichotomy(M, g, N, req.delta, dichotomy_config(req.settings))
    except equidist.HypothesisError as exc:
        return EquidistResponse(branch="BelowDelta", N=N, mean=mean, diagnostics={"detail": str(exc)})
    except equidist.PeriodicityError as exc:
        raise InputError(str(exc)) from exc
    out = EquidistResponse(branch=res.branch, N=N, mean=mean, w=[list(x) for x in res.w],
                           eta=[list(x) for x in res.eta], diagnostics={k: cell(v) for k, v in res.diagnostics.items()},
                           per_h=res.per_h)
    if res.branch == "Certificate":
        rep = equidist.verify_dichotomy(M, g, res, N)
        out.verified, out.violations = rep.ok, rep.violations
    return out


# Fourier expansions -----------------------------------------------------------------------------

class FracProdModel(BaseModel):
    a: Rational = 1
    alpha: Rational
    beta: Rational
    left: Literal["n", "h"] = "n"
    right: Literal["n", "h"] = "n"


class FourierRequest(BaseModel):
    kind: Literal["product", "bilinear", "trivial"] = "product"
    N: int
    H: int | None = None
    delta: float = Field(0.05, gt=0, lt=1)
    terms: list[FracProdModel] = []
    a: list[Rational] = []
    alpha: list[Rational] = []
    settings: dict[str, float] = {}


class FourierTerm(BaseModel):
    re: float
    im: float
    freq_n: str
    freq_h: str


class FourierResponse(BaseModel):
    kind: str
    N: int
    terms: list[FourierTerm]
    l1_bound: float
    l1_error: float
    radius: int
    width: float
    degenerate: bool


def fourier_expand(req: FourierRequest) -> FourierResponse:
    N = req.N
    cfg = expansion_config(req.settings)
    try:
        if req.kind == "trivial":
            if len(req.a) != len(req.alpha):
                raise InputError("a and alpha must have equal length")
            e = fourier.expand_trivial([rational(x) for x in req.a], [rational(x) for x in req.alpha], N, req.delta, cfg)
        else:
            terms = [FracProd(rational(t.a), rational(t.alpha), rational(t.beta), t.left, t.right) for t in req.terms]
            if req.kind == "product":
                e = fourier.expand_frac_product(terms, N, req.delta, cfg)
            else:
                e = fourier.expand_bilinear(terms, N, req.H or N, req.delta, cfg)
    except fourier.NonPeriodicError as exc:
        raise InputError(str(exc)) from exc
    return FourierResponse(
        kind=req.kind, N=N,
        terms=[FourierTerm(re=c.real, im=c.imag, freq_n=fmt(fn), freq_h=fmt(fh)) for c, fn, fh in e.terms],
        l1_bound=e.l1_bound, l1_error=e.measured_l1_error, radius=e.radius, width=e.width, degenerate=e.degenerate)


# Bohr sets, energies, quadruples ------------------------------------------------------------------

class BohrRequest(BaseModel):
    S: list[Rational]
    rho: Rational
    N: int = Field(..., ge=1)
    settings: dict[str, float] = {}


class BohrResponse(BaseModel):
    N: int
    rho: str
    members: list[int] = []
    radius: str | None = None
    size: int
    grid_failures: int | None = None


def bohr_build(req: BohrRequest) -> BohrResponse:
    try:
        B = additive.bohr_build([rational(x) for x in req.S], rational(req.rho), req.N)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return BohrResponse(N=req.N, rho=fmt(B.rho), members=list(B.members), size=len(B))


def bohr_regular(req: BohrRequest) -> BohrResponse:
    S = [rational(x) for x in req.S]
    rho = rational(req.rho)
    points = int(_section(req.settings, "bohr").get("grid_points", 32))
    try:
        rp = additive.find_regular_radius(S, rho, req.N, points)
    except additive.RegularRadiusNotFound as exc:
        return BohrResponse(N=req.N, rho=fmt(rho), radius=None, size=0, grid_failures=exc.failures)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    B = additive.bohr_build(S, rp, req.N)
    fails = additive.regularity_failures(S, rp, req.N, additive.epsilon_grid(len(S), points)) if S else 0
    return BohrResponse(N=req.N, rho=fmt(rho), radius=fmt(rp), members=list(B.members), size=len(B),
                        grid_failures=fails)


class EnergyRequest(BaseModel):
    N: int = Field(..., ge=1)
    sets: list[list[int]]

    @field_validator("sets")
    @classmethod
    def _two_or_four(cls, v):
        if len(v) not in (1, 2, 4):
            raise ValueError("give one, two or four sets")
        return v


class EnergyResponse(BaseModel):
    N: int
    energy: str
    energies: list[str] = []
    cauchy_schwarz: bool | None = None


def energy(req: EnergyRequest) -> EnergyResponse:
    sets, N = req.sets, req.N
    if len(sets) == 4:
        e4 = additive.energy4(*sets, N)
        return EnergyResponse(N=N, energy=fmt(e4), energies=[fmt(additive.energy(A, A, N)) for A in sets],
                              cauchy_schwarz=additive.cs_energy_holds(*sets, N))
    A, B = sets[0], sets[-1]
    return EnergyResponse(N=N, energy=fmt(additive.energy(A, B, N)))


class QuadruplesRequest(BaseModel):
    N: int = Field(..., ge=2, le=128)
    seed: int = 0
    density: float = Field(0.5, gt=0, le=1)
    delta: Rational = "1/2"
    rows: bool = False


class QuadruplesResponse(BaseModel):
    N: int
    H: list[int]
    count: int
    total: int
    bound: str | None
    inner_threshold: float
    hypothesis_ok: bool | None
    threshold_pass: bool | None
    quadruples: list[tuple[int, int, int, int, float]] = []


def quadruples(req: QuadruplesRequest) -> QuadruplesResponse:
    """Planted family from the seed: chi_h(n) = e(a h n / N + theta_h)."""
    rng = SplitMix64(req.seed)
    H, chi, f1, f2 = additive.planted_linear_family(rng, req.N, req.density)
    rep = additive.additive_quadruple_count(H, chi, req.N, rational(req.delta), f1, f2)
    quads = list(additive.quadruple_correlations(H, chi, req.N)) if req.rows else []
    return QuadruplesResponse(N=req.N, H=sorted(H), count=rep.count, total=rep.total,
                              bound=None if rep.bound is None else fmt(rep.bound), inner_threshold=rep.inner_threshold,
                              hypothesis_ok=rep.hypothesis_ok, threshold_pass=rep.threshold_pass, quadruples=quads)


# route table: name -> (path, request model, handler) -----------------------------------------------

ROUTES: dict[str, tuple[str, type[BaseModel], Callable]] = {
    "gowers.norm": ("/gowers/norm", GowersNormRequest, gowers_norm),
    "count": ("/count", CountRequest, count),
    "rbpl.solve": ("/rbpl/solve", RBPLRequest, rbpl_solve),
    "rbpl.verify": ("/rbpl/verify", RBPLRequest, rbpl_verify),
    "rbpl.oracle": ("/rbpl/oracle", RBPLRequest, rbpl_oracle),
    "equidist.run": ("/equidist/run", EquidistRequest, equidist_run),
    "fourier.expand": ("/fourier/expand", FourierRequest, fourier_expand),
    "bohr.build": ("/bohr/build", BohrRequest, bohr_build),
    "bohr.regular": ("/bohr/regular", BohrRequest, bohr_regular),
    "energy": ("/energy", EnergyRequest, energy),
    "quadruples": ("/quadruples", QuadruplesRequest, quadruples),
}


def response_model(name: str) -> type[BaseModel]:
    ret = ROUTES[name][2].__annotations__["return"]
    return globals()[ret] if isinstance(ret, str) else ret
