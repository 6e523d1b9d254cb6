"""Bitmask kernels for exhaustive configuration search.

A model compiles to fixed-width bit tables: each feature owns one bit of a
uint64 mask, with the first-declared feature in the most significant
position so that ascending mask order is lexicographic order over feature
declaration. Candidate complete configurations are generated by counting
over the *free* features (variants and optional features); everything else
is either constant (mandatory chains from the root) or copies its nearest
free ancestor.

The scan over all candidates is the package's hot loop. It runs through a
numba ``@njit`` kernel when numba is importable; setting ``XRFORGE_NO_NUMBA=1``
(or any non-``0`` value) forces the pure-numpy fallback, which produces
bit-identical results. ``benchmarks/bench_enumerate.py`` compares the two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .model import DependencyKind, FeatureKind, FeatureModel, Optionality

_U1 = np.uint64(1)
_U0 = np.uint64(0)


def _numba_enabled() -> bool:
    flag = os.environ.get("XRFORGE_NO_NUMBA", "")
    if flag not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


_USE_NUMBA = _numba_enabled()


def backend_name() -> str:
    """Active scan backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if _USE_NUMBA else "numpy"


@dataclass(frozen=True)
class CheckSet:
    """Validity checks evaluated against a full feature mask.

    ``imp`` pairs fail when the source bit is set and the destination bit is
    clear; ``excl`` pairs fail when both bits are set; each group applies only
    while its variation-point bit is set; ``ra`` entries demand a non-empty
    intersection with the target mask while the source bit is set.
    ``required_mask`` bits must all be set.
    """

    required_mask: np.uint64
    imp_src: np.ndarray
    imp_dst: np.ndarray
    excl_a: np.ndarray
    excl_b: np.ndarray
    vp_bit: np.ndarray
    gmin: np.ndarray
    gmax: np.ndarray
    gmask: np.ndarray
    ra_src: np.ndarray
    ra_mask: np.ndarray

    def check_one(self, mask: int) -> bool:
        """Pure-python check of a single mask (fast path for one-off calls)."""
        req = int(self.required_mask)
        if mask & req != req:
            return False
        for s, d in zip(self.imp_src.tolist(), self.imp_dst.tolist()):
            if (mask >> s) & 1 and not (mask >> d) & 1:
                return False
        for a, b in zip(self.excl_a.tolist(), self.excl_b.tolist()):
            if (mask >> a) & 1 and (mask >> b) & 1:
                return False
        for v, lo, hi, gm in zip(
            self.vp_bit.tolist(), self.gmin.tolist(), self.gmax.tolist(), self.gmask.tolist()
        ):
            if (mask >> v) & 1:
                cnt = (mask & gm).bit_count()
                if cnt < lo or cnt > hi:
                    return False
        for s, tm in zip(self.ra_src.tolist(), self.ra_mask.tolist()):
            if (mask >> s) & 1 and mask & tm == 0:
                return False
        return True


@dataclass(frozen=True)
class CompiledModel:
    """Bit tables for one immutable model."""

    model: FeatureModel
    n: int
    order: tuple[str, ...]
    bit_of: dict[str, int]
    free_ids: tuple[str, ...]          # declaration order
    source_of: dict[str, str | None]   # feature -> nearest free ancestor (None = constant 1)
    const_mask: np.uint64              # features forced selected in every product
    scan_checks: CheckSet              # checks not structural in generated candidates
    full_checks: CheckSet              # complete-mode validity of arbitrary masks

    def mask_of(self, selected_ids) -> int:
        m = 0
        for fid in selected_ids:
            m |= 1 << self.bit_of[fid]
        return m

    def selected_ids(self, mask: int) -> tuple[str, ...]:
        return tuple(fid for fid in self.order if (mask >> self.bit_of[fid]) & 1)


def compiled_for(model: FeatureModel) -> CompiledModel:
    """Compile (and cache on the model instance) the bit tables."""
    cached = model.__dict__.get("_compiled_cache")
    if cached is not None:
        return cached
    compiled = _compile(model)
    object.__setattr__(model, "_compiled_cache", compiled)
    return compiled


def _compile(model: FeatureModel) -> CompiledModel:
    order = model.order()
    n = len(order)
    bit_of = {fid: n - 1 - i for i, fid in enumerate(order)}

    def is_free(fid: str) -> bool:
        f = model.feature(fid)
        if f.parent is None:
            return False
        return f.kind is FeatureKind.VARIANT or f.optionality is Optionality.OPTIONAL

    free_ids = tuple(fid for fid in order if is_free(fid))

    source_of: dict[str, str | None] = {}

    def source(fid: str) -> str | None:
        if fid in source_of:
            return source_of[fid]
        f = model.feature(fid)
        if f.parent is None:
            src = None
        elif is_free(fid):
            src = fid
        else:
            src = source(f.parent)
        source_of[fid] = src
        return src

    const_mask = 0
    for fid in order:
        if source(fid) is None:
            const_mask |= 1 << bit_of[fid]

    # imp = "source selected implies destination selected"
    scan_imp: list[tuple[int, int]] = []
    full_imp: list[tuple[int, int]] = []
    for fid in order:
        f = model.feature(fid)
        if f.parent is None:
            continue
        fb, pb = bit_of[fid], bit_of[f.parent]
        if is_free(fid):
            scan_imp.append((fb, pb))
            full_imp.append((fb, pb))
            if f.optionality is Optionality.MANDATORY:
                # mandatory variant: tied to its parent in both directions
                scan_imp.append((pb, fb))
                full_imp.append((pb, fb))
        else:
            # mandatory non-variant: equal to parent (structural in scans)
            full_imp.append((fb, pb))
            full_imp.append((pb, fb))

    excl: list[tuple[int, int]] = []
    for dep in model.dependencies:
        sb, tb = bit_of[dep.source], bit_of[dep.target]
        if dep.kind is DependencyKind.REQUIRES:
            scan_imp.append((sb, tb))
            full_imp.append((sb, tb))
        else:
            excl.append((sb, tb))

    groups: list[tuple[int, int, int, int]] = []
    for fid in order:
        f = model.feature(fid)
        if f.kind is not FeatureKind.VARIATION_POINT:
            continue
        gm = 0
        for v in model.variants_of(fid):
            gm |= 1 << bit_of[v]
        groups.append((bit_of[fid], f.group.min, f.group.max, gm))

    ra: list[tuple[int, int]] = []
    for con in model.constraints:
        tm = 0
        for t in con.targets:
            tm |= 1 << bit_of[t]
        ra.append((bit_of[con.source], tm))

    def _pairs(items):
        a = np.array([p[0] for p in items], dtype=np.uint64)
        b = np.array([p[1] for p in items], dtype=np.uint64)
        return a, b

    imp_s, imp_d = _pairs(scan_imp)
    fimp_s, fimp_d = _pairs(full_imp)
    exc_a, exc_b = _pairs(excl)
    ra_s, ra_m = _pairs(ra)
    vp_bit = np.array([g[0] for g in groups], dtype=np.uint64)
    gmin = np.array([g[1] for g in groups], dtype=np.uint64)
    gmax = np.array([g[2] for g in groups], dtype=np.uint64)
    gmask = np.array([g[3] for g in groups], dtype=np.uint64)

    scan_checks = CheckSet(
        required_mask=_U0,
        imp_src=imp_s, imp_dst=imp_d,
        excl_a=exc_a, excl_b=exc_b,
        vp_bit=vp_bit, gmin=gmin, gmax=gmax, gmask=gmask,
        ra_src=ra_s, ra_mask=ra_m,
    )
    full_checks = CheckSet(
        required_mask=np.uint64(1 << bit_of[model.root]),
        imp_src=fimp_s, imp_dst=fimp_d,
        excl_a=exc_a, excl_b=exc_b,
        vp_bit=vp_bit, gmin=gmin, gmax=gmax, gmask=gmask,
        ra_src=ra_s, ra_mask=ra_m,
    )
    return CompiledModel(
        model=model,
        n=n,
        order=order,
        bit_of=bit_of,
        free_ids=free_ids,
        source_of=source_of,
        const_mask=np.uint64(const_mask),
        scan_checks=scan_checks,
        full_checks=full_checks,
    )


@dataclass(frozen=True)
class ScanPlan:
    """A compiled model specialized with a set of fixed decisions.

    ``None`` when the decisions alone are contradictory (zero candidates).
    """

    compiled: CompiledModel
    base_mask: np.uint64
    pair_cbit: np.ndarray  # counter bit feeding each feature bit
    pair_fbit: np.ndarray
    k: int                 # number of undecided free features


def plan_scan(compiled: CompiledModel, decided: dict[str, bool]) -> ScanPlan | None:
    """Bake decided features into constants; undecided free features iterate.

    Decisions on derived (mandatory) features transfer to their nearest free
    ancestor; a decision contradicting the constant spine yields ``None``.
    """
    fix: dict[str, bool] = {}
    for fid, val in decided.items():
        src = compiled.source_of[fid]
        if src is None:
            if not val:
                return None
        else:
            if fix.get(src, val) != val:
                return None
            fix[src] = val

    # Counter bits follow each free feature's earliest use in declaration
    # order (its first derived feature may be declared before it); this keeps
    # the produced masks strictly ascending, i.e. lexicographic.
    first_pos: dict[str, int] = {}
    for i, fid in enumerate(compiled.order):
        src = compiled.source_of[fid]
        if src is not None and src not in first_pos:
            first_pos[src] = i
    unfixed = sorted(
        (fid for fid in compiled.free_ids if fid not in fix),
        key=first_pos.__getitem__,
    )
    k = len(unfixed)
    counter_bit = {fid: k - 1 - pos for pos, fid in enumerate(unfixed)}

    base = int(compiled.const_mask)
    pairs: list[tuple[int, int]] = []
    for fid in compiled.order:
        src = compiled.source_of[fid]
        if src is None:
            continue
        if src in fix:
            if fix[src]:
                base |= 1 << compiled.bit_of[fid]
        else:
            pairs.append((counter_bit[src], compiled.bit_of[fid]))

    return ScanPlan(
        compiled=compiled,
        base_mask=np.uint64(base),
        pair_cbit=np.array([p[0] for p in pairs], dtype=np.uint64),
        pair_fbit=np.array([p[1] for p in pairs], dtype=np.uint64),
        k=k,
    )


# -- numpy backend ---------------------------------------------------------

_CHUNK = 1 << 18


def _np_scan(plan: ScanPlan, limit: int, stop_after: int) -> tuple[int, np.ndarray]:
    cs = plan.compiled.scan_checks
    total = 0
    collected: list[np.ndarray] = []
    n_candidates = 1 << plan.k
    for start in range(0, n_candidates, _CHUNK):
        stop = min(start + _CHUNK, n_candidates)
        c = np.arange(start, stop, dtype=np.uint64)
        mask = np.full(c.shape, plan.base_mask, dtype=np.uint64)
        for t in range(plan.pair_cbit.size):
            mask |= ((c >> plan.pair_cbit[t]) & _U1) << plan.pair_fbit[t]

        ok = np.ones(mask.shape, dtype=bool)
        for t in range(cs.imp_src.size):
            src = (mask >> cs.imp_src[t]) & _U1
            dst = (mask >> cs.imp_dst[t]) & _U1
            ok &= (src == 0) | (dst == 1)
        for t in range(cs.excl_a.size):
            ok &= ((mask >> cs.excl_a[t]) & _U1) + ((mask >> cs.excl_b[t]) & _U1) < 2
        for t in range(cs.vp_bit.size):
            cnt = np.bitwise_count(mask & cs.gmask[t])
            sel = ((mask >> cs.vp_bit[t]) & _U1) == 1
            ok &= ~sel | ((cnt >= cs.gmin[t]) & (cnt <= cs.gmax[t]))
        for t in range(cs.ra_src.size):
            sel = ((mask >> cs.ra_src[t]) & _U1) == 1
            ok &= ~sel | ((mask & cs.ra_mask[t]) != 0)

        valid = mask[ok]
        if valid.size:
            room = limit - sum(v.size for v in collected)
            if room > 0:
                collected.append(valid[:room])
            total += int(valid.size)
            if total >= stop_after:
                break
    out = np.concatenate(collected) if collected else np.empty(0, dtype=np.uint64)
    return total, out


# -- numba backend -----------------------------------------------------------

if _USE_NUMBA:
    from numba import njit

    @njit(cache=True, inline="always")
    def _pop64(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @njit(cache=True)
    def _nb_scan(base, pair_cbit, pair_fbit,
                 imp_src, imp_dst, excl_a, excl_b,
                 vp_bit, gmin, gmax, gmask, ra_src, ra_mask,
                 k, limit, stop_after, out):
        one = np.uint64(1)
        zero = np.uint64(0)
        total = np.int64(0)
        collected = np.int64(0)
        n_candidates = np.int64(1) << k
        for ci in range(n_candidates):
            c = np.uint64(ci)
            mask = base
            for t in range(pair_cbit.size):
                mask |= ((c >> pair_cbit[t]) & one) << pair_fbit[t]
            ok = True
            for t in range(imp_src.size):
                if ((mask >> imp_src[t]) & one) == one and ((mask >> imp_dst[t]) & one) == zero:
                    ok = False
                    break
            if not ok:
                continue
            for t in range(excl_a.size):
                if ((mask >> excl_a[t]) & one) == one and ((mask >> excl_b[t]) & one) == one:
                    ok = False
                    break
            if not ok:
                continue
            for t in range(vp_bit.size):
                if ((mask >> vp_bit[t]) & one) == one:
                    cnt = _pop64(mask & gmask[t])
                    if cnt < gmin[t] or cnt > gmax[t]:
                        ok = False
                        break
            if not ok:
                continue
            for t in range(ra_src.size):
                if ((mask >> ra_src[t]) & one) == one and (mask & ra_mask[t]) == zero:
                    ok = False
                    break
            if not ok:
                continue
            total += 1
            if collected < limit:
                out[collected] = mask
                collected += 1
            if total >= stop_after:
                break
        return total, collected

    def _numba_scan(plan: ScanPlan, limit: int, stop_after: int) -> tuple[int, np.ndarray]:
        cs = plan.compiled.scan_checks
        out = np.empty(max(limit, 1), dtype=np.uint64)
        total, collected = _nb_scan(
            plan.base_mask, plan.pair_cbit, plan.pair_fbit,
            cs.imp_src, cs.imp_dst, cs.excl_a, cs.excl_b,
            cs.vp_bit, cs.gmin, cs.gmax, cs.gmask, cs.ra_src, cs.ra_mask,
            np.int64(plan.k), np.int64(limit), np.int64(stop_after), out,
        )
        return int(total), out[: int(collected)].copy()


# -- public scan API ---------------------------------------------------------

_NO_STOP = 1 << 62


def scan(plan: ScanPlan | None, *, limit: int = 0, stop_after: int = _NO_STOP,
         backend: str | None = None) -> tuple[int, np.ndarray]:
    """Count valid completions and collect up to ``limit`` masks, ascending.

    ``stop_after`` aborts the scan once that many valid masks were seen
    (existence checks pass 1). ``backend`` overrides the module default,
    for tests and benchmarks.
    """
    if plan is None:
        return 0, np.empty(0, dtype=np.uint64)
    use = backend or backend_name()
    if use == "numba":
        if not _USE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _numba_scan(plan, limit, stop_after)
    return _np_scan(plan, limit, stop_after)


def satisfiable(plan: ScanPlan | None) -> bool:
    """True when at least one valid completion exists."""
    total, _ = scan(plan, limit=0, stop_after=1)
    return total > 0
