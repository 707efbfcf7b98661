"""Synchronization diagnostics for matrix oscillator ensembles.

The order parameter is ``r = ||(1/N) sum_J z^J||_F / sqrt(rank)`` where
``rank`` is the rank of ``z^dagger z`` on the Bergman-Shilov boundary
(``n`` for types I and III, ``2 floor(n/2)`` for type II). The scale makes
``r = 1`` exactly at consensus; the coupling is not included.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .cxmat import DEFAULT_TOL
from .domains import (
    BoundaryClass,
    DomainKind,
    DomainSpec,
    boundary_rank,
    boundary_ranks,
    bs_defect_batch,
    component_subdomain,
    on_bs_boundary,
)
from .errors import MixedComponents
from .flows import _stack


@dataclass
class ObservableRecord:
    time: float
    r: float
    spread: float
    ranks: List[int] = field(default_factory=list)
    mean_field_norm: float = 0.0
    max_tangency_drift: float = float("nan")


@dataclass(frozen=True)
class ChainEntry:
    t: BoundaryClass
    subdomain: Optional[DomainSpec]
    on_bs: bool
    model: Optional[str]


def order_parameter(ens, domain: DomainSpec, tol: float = 1e-8, ranks=None) -> float:
    zs = _stack(ens)
    if ranks is None:
        ranks = boundary_ranks(domain, zs, tol)
    if len(set(np.asarray(ranks).tolist())) > 1:
        raise MixedComponents(f"oscillators sit on different components: {sorted(set(ranks))}")
    return float(np.linalg.norm(zs.mean(axis=0)) / np.sqrt(domain.bs_rank))


def pairwise_spread(ens) -> float:
    zs = _stack(ens)
    flat = zs.reshape(zs.shape[0], -1)
    diff = flat[:, None, :] - flat[None, :, :]
    return float(np.sqrt(np.max(np.sum(np.abs(diff) ** 2, axis=-1))))


def family_label(domain: DomainSpec) -> str:
    k = domain.kind.value
    if domain.kind is DomainKind.TYPE_I:
        return f"KM_{{{domain.m},{domain.n}}}({k})"
    return f"KM_{{{domain.n}}}({k})"


def chain_report(domain: DomainSpec, ens, tol: float = DEFAULT_TOL) -> List[ChainEntry]:
    """Per-oscillator boundary class, component sub-domain and BS flag.

    ``model`` names the Kuramoto model whose configuration space is the
    Bergman-Shilov boundary of the oscillator's component; it is None when
    the component itself has no interior (a point).
    """
    out = []
    for z in _stack(ens):
        t = boundary_rank(domain, z, tol)
        sub = component_subdomain(domain, t)
        out.append(ChainEntry(t, sub, on_bs_boundary(domain, z, tol), family_label(sub) if sub else None))
    return out


def family_chain(domain: DomainSpec) -> List[str]:
    """Labels of the Kuramoto family members, largest first.

    Type II chains step down by two; odd ones end at ``KM_{1}(II)``, whose
    domain is a single point.
    """
    chain = []
    for t in range(domain.max_rank + 1):
        sub = component_subdomain(domain, t)
        if sub is not None:
            chain.append(family_label(sub))
    if domain.kind is DomainKind.TYPE_II and domain.n % 2:
        chain.append("KM_{1}(II)")
    return chain


def record(time: float, domain: DomainSpec, zs: np.ndarray, kappa: float,
           rank_tol: float = 1e-8, boundary_run: bool = True) -> ObservableRecord:
    """Observables for one snapshot; r is only evaluated when all ranks agree."""
    ranks = boundary_ranks(domain, zs, rank_tol)
    uniform = len(set(ranks.tolist())) == 1
    r = float(np.linalg.norm(zs.mean(axis=0)) / np.sqrt(domain.bs_rank)) if uniform else float("nan")
    drift = float(np.max(bs_defect_batch(domain, zs))) if boundary_run else float("nan")
    return ObservableRecord(
        time=float(time),
        r=r,
        spread=pairwise_spread(zs),
        ranks=ranks.tolist(),
        mean_field_norm=float(abs(kappa) * np.linalg.norm(zs.mean(axis=0))),
        max_tangency_drift=drift,
    )
