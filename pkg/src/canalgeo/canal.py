"""Curvature tensors of hypersurfaces and canal/Dupin detection.

Everything here works in the orthonormal tangent gauge delivered by
``jets.evaluate_jet``: the metric is the identity, the second fundamental
form h plays the role of the first conformal tensor, and a trace-adjusted
cubic tensor built from the covariant derivative of h tests, direction by
direction, whether the hypersurface is enveloped by a sphere family.

The trace-free part a = h - lam*I singles out principal directions; a simple
principal direction i belongs to a sphere family exactly when the cubic
tensor's pure component a_iii vanishes, and a repeated principal curvature
gives a family for free.  When the full cubic tensor vanishes on a surface
in R^3 the surface is a Dupin cyclide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .conformal import Dropped, PolyVector, drop_sphere
from .errors import DomainError
from .jets import (
    ParametricSurface,
    SurfaceJet,
    evaluate_jet,
    fundamental_forms,
    gauge_frame,
    shape_derivative,
)

__all__ = [
    "ConformalTensors",
    "PrincipalSpectrum",
    "ContactSphere",
    "ClusterVerdict",
    "CanalReport",
    "build_tensors",
    "principal_spectrum",
    "contact_spheres",
    "third_order_in_principal_frame",
    "detect_canal",
]

_A_SINGULAR_REL = 1e-8
_METRIC_FLOOR = 1e-12


@dataclass(frozen=True)
class ConformalTensors:
    """Curvature data of one surface point in the orthonormal gauge.

    ``h`` is the shape operator matrix, ``lam`` its eigenvalue mean, ``a``
    the trace-free part, ``lam3`` the frame components of the covariant
    derivative of h (symmetric in the first two slots, totally symmetric on
    shell), ``lam1`` its normalized trace vector, ``mu`` the solution of
    a mu = lam1, and ``a3`` the trace-adjusted cubic tensor.  ``a3`` is None
    when ``a`` is singular (umbilic points included), in which case the
    cubic test does not apply.
    """

    jet: SurfaceJet
    h: np.ndarray
    lam: float
    a: np.ndarray
    lam3: np.ndarray
    lam1: np.ndarray
    mu: np.ndarray | None
    a3: np.ndarray | None
    umbilic: bool
    a_singular: bool

    @property
    def dim_n(self) -> int:
        return self.jet.dim_n


def build_tensors(jet: SurfaceJet, tolerances: Tolerances = DEFAULT_TOLERANCES) -> ConformalTensors:
    """Run the tensor ladder at one jet: h, its mean, trace-free and cubic parts."""
    _, h = fundamental_forms(jet)
    k = h.shape[0]
    lam = float(np.trace(h)) / k
    a = h - lam * np.eye(k)
    lam3 = shape_derivative(jet)
    lam1 = np.einsum("iik->k", lam3) / k

    h_scale = max(1.0, float(np.linalg.norm(h)))
    umbilic = float(np.linalg.norm(a)) <= tolerances.umbilic * h_scale
    a_eigs = np.linalg.eigvalsh(a)
    a_singular = bool(np.min(np.abs(a_eigs)) <= _A_SINGULAR_REL * h_scale)

    mu = None
    a3 = None
    if not a_singular:
        mu = np.linalg.solve(a, lam1)
        eye = np.eye(k)
        a3 = (
            lam3
            + np.einsum("ij,k->ijk", a, mu)
            + np.einsum("jk,i->ijk", a, mu)
            + np.einsum("ki,j->ijk", a, mu)
            - np.einsum("ij,k->ijk", eye, lam1)
            - np.einsum("jk,i->ijk", eye, lam1)
            - np.einsum("ki,j->ijk", eye, lam1)
        )
    return ConformalTensors(
        jet=jet,
        h=h,
        lam=lam,
        a=a,
        lam3=lam3,
        lam1=lam1,
        mu=mu,
        a3=a3,
        umbilic=umbilic,
        a_singular=a_singular,
    )


@dataclass(frozen=True)
class PrincipalSpectrum:
    """Eigen-decomposition of h with eigenvalues grouped into clusters."""

    eigenvalues: np.ndarray
    vectors: np.ndarray  # columns are frame-component eigenvectors
    clusters: tuple  # tuple of index tuples, ascending eigenvalue order
    cluster_means: tuple

    @property
    def signature(self) -> tuple:
        return tuple(len(c) for c in self.clusters)


def principal_spectrum(
    tensors: ConformalTensors, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> PrincipalSpectrum:
    eigs, vecs = np.linalg.eigh(tensors.h)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    gap = tolerances.clustering * scale
    clusters = []
    start = 0
    for i in range(1, eigs.size + 1):
        if i == eigs.size or eigs[i] - eigs[i - 1] > gap:
            clusters.append(tuple(range(start, i)))
            start = i
    means = tuple(float(np.mean(eigs[list(c)])) for c in clusters)
    return PrincipalSpectrum(
        eigenvalues=eigs, vectors=vecs, clusters=tuple(clusters), cluster_means=means
    )


@dataclass(frozen=True)
class ContactSphere:
    """Curvature sphere attached to one principal cluster.

    ``vector`` is the unit-quadric combination A_n + s A_0 of the gauge
    frame; ``sphere`` its drop back to Euclidean data; ``directions`` the
    ambient principal directions of the cluster, one row each.
    """

    curvature: float
    multiplicity: int
    vector: PolyVector
    sphere: Dropped
    directions: np.ndarray

    def to_json(self) -> dict:
        return {
            "curvature": self.curvature,
            "multiplicity": self.multiplicity,
            "sphere": self.sphere.to_json(),
            "directions": [[float(x) for x in row] for row in self.directions],
        }


def contact_spheres(
    jet: SurfaceJet,
    tensors: ConformalTensors | None = None,
    spectrum: PrincipalSpectrum | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple:
    """Curvature spheres of all principal clusters at one point."""
    if tensors is None:
        tensors = build_tensors(jet, tolerances)
    if spectrum is None:
        spectrum = principal_spectrum(tensors, tolerances)
    frame = gauge_frame(jet, tolerances)
    out = []
    for cluster, s in zip(spectrum.clusters, spectrum.cluster_means):
        vec = frame.an.coords + s * frame.a0.coords
        pv = PolyVector(vec)
        dirs = spectrum.vectors[:, list(cluster)].T @ jet.e
        out.append(
            ContactSphere(
                curvature=s,
                multiplicity=len(cluster),
                vector=pv,
                sphere=drop_sphere(pv, tolerances),
                directions=dirs,
            )
        )
    return tuple(out)


def third_order_in_principal_frame(
    tensors: ConformalTensors, spectrum: PrincipalSpectrum | None = None
) -> np.ndarray | None:
    """Rotate the cubic tensor into the eigenbasis of h; None when unavailable."""
    if tensors.a3 is None:
        return None
    if spectrum is None:
        spectrum = principal_spectrum(tensors)
    r = spectrum.vectors
    return np.einsum("abc,ai,bj,ck->ijk", tensors.a3, r, r, r)


# ---------------------------------------------------------------------------
# surface-level detection


@dataclass(frozen=True)
class ClusterVerdict:
    multiplicity: int
    curvature: float
    canal: bool | None
    mechanism: str  # multiplicity | third-order | unavailable
    metric: float | None

    def to_json(self) -> dict:
        return {
            "multiplicity": self.multiplicity,
            "curvature": self.curvature,
            "canal": self.canal,
            "mechanism": self.mechanism,
            "metric": self.metric,
        }


@dataclass(frozen=True)
class CanalReport:
    name: str
    dim_n: int
    params: np.ndarray
    signature: tuple | None
    signature_fraction: float
    clusters: tuple
    is_canal: bool
    canal_directions: int
    dupin: bool | None
    dupin_metric: float | None
    totally_umbilic: bool
    umbilic_fraction: float
    singular_fraction: float
    warnings: tuple

    def to_json(self) -> dict:
        return {
            "surface": self.name,
            "n": self.dim_n,
            "samples": int(self.params.shape[0]),
            "signature": list(self.signature) if self.signature else None,
            "signature_fraction": self.signature_fraction,
            "clusters": [c.to_json() for c in self.clusters],
            "is_canal": self.is_canal,
            "canal_directions": self.canal_directions,
            "dupin": self.dupin,
            "dupin_metric": self.dupin_metric,
            "totally_umbilic": self.totally_umbilic,
            "umbilic_fraction": self.umbilic_fraction,
            "warnings": list(self.warnings),
        }


def _dupin_metric(tensors: ConformalTensors) -> float | None:
    # Both lam3 and h^2 carry the units of a3, so the denominator stays a
    # genuine scale even where the cubic ladder degenerates to zero.
    scale = float(np.linalg.norm(tensors.h)) ** 2 + _METRIC_FLOOR
    lam3_norm = float(np.linalg.norm(tensors.lam3))
    if tensors.a3 is not None:
        return float(np.linalg.norm(tensors.a3)) / (lam3_norm + scale)
    if tensors.umbilic:
        # Totally umbilic pieces are Dupin exactly when h stays parallel.
        return lam3_norm / (lam3_norm + scale)
    return None


def detect_canal(
    surface: ParametricSurface,
    counts=6,
    params: np.ndarray | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CanalReport:
    """Sample a surface and decide which principal directions admit envelopes.

    The verdict per cluster: a repeated principal curvature is a sphere
    direction outright; a simple one qualifies when the pure cubic component
    along it vanishes within ``tolerances.canal`` (after normalization).
    Mixed eigenvalue signatures across samples are reported as warnings, not
    errors, since clustering strata can genuinely change along a surface.
    """
    pts = params if params is not None else surface.sample_grid(counts)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != surface.n_params:
        raise DomainError(
            f"expected {surface.n_params} chart parameters, got {pts.shape[1]}"
        )

    signatures: dict[tuple, int] = {}
    records = []
    umbilic_count = 0
    singular_count = 0
    dupin_vals = []
    dupin_missing = False
    for row in pts:
        jet = evaluate_jet(surface, row)
        tensors = build_tensors(jet, tolerances)
        metric = _dupin_metric(tensors)
        if metric is None:
            dupin_missing = True
        else:
            dupin_vals.append(metric)
        if tensors.umbilic:
            umbilic_count += 1
            continue
        if tensors.a_singular:
            singular_count += 1
        spectrum = principal_spectrum(tensors, tolerances)
        sig = spectrum.signature
        signatures[sig] = signatures.get(sig, 0) + 1
        a3p = third_order_in_principal_frame(tensors, spectrum)
        records.append((sig, spectrum, a3p))

    total = pts.shape[0]
    warnings = []
    umbilic_fraction = umbilic_count / total
    singular_fraction = singular_count / total
    totally_umbilic = umbilic_count == total

    signature = None
    signature_fraction = 0.0
    clusters: tuple = ()
    canal_directions = 0
    if totally_umbilic:
        is_canal = True
        warnings.append("surface is totally umbilic; sphere/plane degenerate case")
    elif records:
        signature = max(signatures, key=signatures.get)
        signature_fraction = signatures[signature] / len(records)
        if signature_fraction < 1.0:
            warnings.append(
                "principal multiplicities change across samples "
                f"({dict((str(k), v) for k, v in signatures.items())}); "
                "verdicts use the majority stratum"
            )
        matching = [rec for rec in records if rec[0] == signature]
        verdicts = []
        for pos, mult in enumerate(signature):
            curvature = float(
                np.mean([rec[1].cluster_means[pos] for rec in matching])
            )
            if mult > 1:
                verdicts.append(
                    ClusterVerdict(mult, curvature, True, "multiplicity", None)
                )
                continue
            vals = []
            missing = False
            for _, spectrum, a3p in matching:
                if a3p is None:
                    missing = True
                    continue
                idx = spectrum.clusters[pos][0]
                norm = 1.0 + float(np.linalg.norm(a3p))
                vals.append(abs(a3p[idx, idx, idx]) / norm)
            if missing or not vals:
                verdicts.append(ClusterVerdict(mult, curvature, None, "unavailable", None))
                warnings.append(
                    "cubic tensor unavailable at some samples (singular trace-free part)"
                )
                continue
            metric = float(np.max(vals))
            verdicts.append(
                ClusterVerdict(mult, curvature, metric < tolerances.canal, "third-order", metric)
            )
        clusters = tuple(verdicts)
        canal_directions = sum(1 for v in verdicts if v.canal)
        is_canal = canal_directions > 0
    else:
        is_canal = False
        warnings.append("no classifiable samples")

    if 0 < umbilic_count < total:
        warnings.append(f"{umbilic_count}/{total} samples are umbilic and were skipped")

    dupin = None
    dupin_metric = None
    if dupin_vals:
        dupin_metric = float(np.max(dupin_vals))
    if surface.dim_n == 3:
        if dupin_missing or dupin_metric is None:
            dupin = None
        else:
            dupin = dupin_metric < tolerances.dupin

    return CanalReport(
        name=surface.name,
        dim_n=surface.dim_n,
        params=pts,
        signature=signature,
        signature_fraction=signature_fraction,
        clusters=clusters,
        is_canal=is_canal,
        canal_directions=canal_directions,
        dupin=dupin,
        dupin_metric=dupin_metric,
        totally_umbilic=totally_umbilic,
        umbilic_fraction=umbilic_fraction,
        singular_fraction=singular_fraction,
        warnings=tuple(warnings),
    )
