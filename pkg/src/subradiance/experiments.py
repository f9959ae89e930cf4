"""Data generators behind each CLI subcommand.

Every experiment returns ``Table`` objects; serialization lives in ``cli``.
"""
from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ansatz import symmetric_state
from .bloch import dispersion_curve, find_intersection
from .disorder import DisorderSpec, disorder_ensemble
from .greens import ChainGeometry
from .hamiltonian import assemble
from .hilbert import FzBlock, fz_max
from .observables import (correlation_matrix, default_grid, field_intensity,
                          intensity_at_atoms, overlap_fidelity, populations, power_law_fit)
from .spectra import filtered_symmetric_search, most_subradiant

log = logging.getLogger(__name__)

GROUND_UP = 1  # global level index of |1>
LEVEL_3 = 3


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


_FZ_REL = re.compile(r"^\s*([+-]?)max\s*(?:([+-])\s*(\d+))?\s*$")


def resolve_fz(spec, N: int) -> Fraction:
    """'max', '-max+1', 'max-2', or a literal like '0', '1/2', '-3.5'."""
    if isinstance(spec, (int, float, Fraction)):
        return Fraction(spec).limit_denominator(2)
    m = _FZ_REL.match(str(spec))
    if m:
        sign = -1 if m.group(1) == "-" else 1
        shift = int(m.group(3) or 0) * (-1 if m.group(2) == "-" else 1)
        return sign * fz_max(N) + shift
    value = Fraction(str(spec).strip())
    if value.denominator not in (1, 2):
        raise ValueError(f"F_z = {spec} is not a half-integer")
    return value


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _fit_row(points):
    try:
        fit = power_law_fit(points)
    except ValueError:
        return None
    return {"exponent": fit.exponent, "prefactor": fit.prefactor, "r2": fit.r2, "points": fit.n_points}


def _chain_mode(N, d, fz, engineering=False):
    H = assemble(ChainGeometry.ideal(N, d), FzBlock(N, fz), engineering=engineering)
    return H, most_subradiant(H, 1)[0]


def fig3(N_list, d_list=(0.2, 0.3, 0.4), fz="-max", threads=1):
    """Minimum decay rate in the stretched two-level block."""
    table = Table("gamma_min", ["d", "N", "gamma_min"])
    fits = Table("fit", ["d", "exponent", "prefactor", "r2", "points"])
    jobs = [(d, N) for d in d_list for N in N_list]
    gam = _map(lambda job: _chain_mode(job[1], job[0], resolve_fz(fz, job[1]))[1].gamma, jobs, threads)
    table.rows = [[d, N, g] for (d, N), g in zip(jobs, gam)]
    for d in d_list:
        fit = _fit_row([(N, g) for (dd, N), g in zip(jobs, gam) if dd == d])
        if fit:
            fits.rows.append([d, fit["exponent"], fit["prefactor"], fit["r2"], fit["points"]])
    return [table, fits]


def defect_sites(pop1, count):
    """Atoms with the largest |1> population, ascending by index."""
    return sorted(int(i) for i in np.argsort(-pop1, kind="stable")[:count])


def fig4(N_list, d=0.3, fz="-max+1", threads=1):
    """Single-defect block: decay, |3> population, defect position, intensity felt by atoms."""
    table = Table("defect", ["N", "gamma_min", "pop3_total", "defect_site", "edge_distance",
                             "intensity_defect", "intensity_center"])

    def run(N):
        H, m = _chain_mode(N, d, resolve_fz(fz, N))
        p = populations(m)
        site = defect_sites(p[:, GROUND_UP], 1)[0]
        I = intensity_at_atoms(m)
        return [N, m.gamma, float(p[:, LEVEL_3].sum()), site, min(site, N - 1 - site),
                float(I[site]), float(I[(N - 1) // 2])]

    table.rows = _map(run, list(N_list), threads)
    fits = Table("fit", ["quantity", "exponent", "prefactor", "r2", "points"])
    for col, name in ((1, "gamma_min"), (2, "pop3_total")):
        fit = _fit_row([(r[0], r[col]) for r in table.rows])
        if fit:
            fits.rows.append([name, fit["exponent"], fit["prefactor"], fit["r2"], fit["points"]])
    return [table, fits]


def si_defects(N_list, d=0.3, fz="-max+2", threads=1):
    """Two-defect block: where the |1> population piles up."""
    table = Table("two_defects", ["N", "gamma_min", "site_a", "site_b", "pop1_a", "pop1_b"])

    def run(N):
        _, m = _chain_mode(N, d, resolve_fz(fz, N))
        p1 = populations(m)[:, GROUND_UP]
        a, b = defect_sites(p1, 2)
        return [N, m.gamma, a, b, float(p1[a]), float(p1[b])]

    table.rows = _map(run, list(N_list), threads)
    return [table]


def correlation_sign_fraction(C, N):
    """Fraction of atom pairs with C > 0 inside a half and C < 0 across halves."""
    half = N // 2
    good = total = 0
    for i in range(N):
        for j in range(i + 1, N):
            same = (i < half) == (j < half)
            total += 1
            good += (C[i, j] > 0) if same else (C[i, j] < 0)
    return good / total


def fig5(N_list, d=0.3, fz="0", m=0, n=0, threads=1):
    """Phase-separated F_z = 0 modes against the clean two-level result."""
    table = Table("phase_separation", ["N", "gamma_min", "gamma_two_level", "ratio", "sign_fraction"])
    corr = Table("correlation", ["N", "i", "j", "C"])

    def run(N):
        _, mode = _chain_mode(N, d, resolve_fz(fz, N))
        n_ref = N // 2 - 1
        ref = _chain_mode(n_ref, d, -fz_max(n_ref))[1].gamma if n_ref >= 1 else float("nan")
        C = correlation_matrix(mode, m, n)
        return [N, mode.gamma, ref, mode.gamma / ref, correlation_sign_fraction(C, N)], C

    for row, C in _map(run, list(N_list), threads):
        table.rows.append(row)
        N = row[0]
        corr.rows.extend([N, i, j, float(C[i, j])] for i in range(N) for j in range(N) if i != j)
    return [table, corr]


def fig6(N_list, d=0.3, engineered=True, filtered_N=None, threads=1):
    """Entangled waveguide modes in F_z = 0; optional free-space filtered search."""
    table = Table("symmetric", ["N", "gamma_min", "infidelity", "pop_asym_25", "pop_asym_34"])
    pops = Table("populations", ["N", "atom", "p0", "p1", "p2", "p3", "p4", "p5"])

    def run(N):
        block = FzBlock(N, 0)
        H = assemble(ChainGeometry.ideal(N, d), block, engineering=engineered)
        mode = most_subradiant(H, 1)[0]
        a = symmetric_state(N, np.pi / d, d, block)
        p = populations(mode)
        return ([N, mode.gamma, 1 - overlap_fidelity(mode, a),
                 float(np.abs(p[:, 2] - p[:, 5]).max()), float(np.abs(p[:, 3] - p[:, 4]).max())], p)

    for row, p in _map(run, list(N_list), 1 if len(N_list) > 2 else threads):
        table.rows.append(row)
        pops.rows.extend([row[0], j, *map(float, p[j])] for j in range(row[0]))
    fits = Table("fit", ["quantity", "exponent", "prefactor", "r2", "points"])
    for col, name in ((1, "gamma_min"), (2, "infidelity")):
        fit = _fit_row([(r[0], r[col]) for r in table.rows])
        if fit:
            fits.rows.append([name, fit["exponent"], fit["prefactor"], fit["r2"], fit["points"]])
    out = [table, pops, fits]
    if filtered_N:
        filt = Table("filtered_free", ["N", "gamma", "fidelity", "pop2_total", "pop3_total"])
        for N in filtered_N:
            block = FzBlock(N, 0)
            H = assemble(ChainGeometry.ideal(N, d), block, engineering=False)
            mode = filtered_symmetric_search(H)
            if mode is None:
                filt.rows.append([N, float("nan"), float("nan"), float("nan"), float("nan")])
                continue
            p = populations(mode)
            fid = overlap_fidelity(mode, symmetric_state(N, np.pi / d, d, block))
            filt.rows.append([N, mode.gamma, fid, float(p[:, 2].sum()), float(p[:, 3].sum())])
        out.append(filt)
    return out


def dispersion(d=0.3, engineered=False, samples=512):
    table = Table("dispersion", ["q", "k", "J", "Gamma"])
    for q in (0, 1):
        c = dispersion_curve(d, q, engineered, samples)
        table.rows.extend([q, float(k), float(J), float(G)] for k, J, G in zip(c.k, c.J, c.Gamma))
    k_cross = find_intersection(d) if not engineered else None
    table.meta["intersection"] = k_cross
    return [table]


def disorder(N_list, d=0.3, fz="-max", sigmas=(0.0, 0.05, 0.1), realizations=200, seed=0,
             threads=1):
    table = Table("disorder", ["N", "sigma", "mean", "stderr", "min", "max", "resamples"])
    per = Table("realizations", ["N", "sigma", "realization", "gamma_min"])
    for N in N_list:
        for s in sigmas:
            res = disorder_ensemble(N, d, resolve_fz(fz, N), DisorderSpec(s, realizations, seed),
                                    workers=threads)
            table.rows.append([N, s, res.mean, res.stderr, res.min, res.max, res.resamples])
            per.rows.extend([N, s, r, float(g)] for r, g in enumerate(res.gammas))
    return [table, per]


def intensity(N, d=0.3, fz="-max", engineered=False, ny=200, nz=400):
    fz_val = resolve_fz(fz, N)
    H, m = _chain_mode(N, d, fz_val, engineered)
    y, z = default_grid(H.geometry, ny, nz)
    imap = field_intensity(m, y, z)
    table = Table("intensity", ["y", "z", "I"])
    table.rows = imap.triples().tolist()
    table.meta["gamma"] = m.gamma
    return [table]
