"""Seeded verification runs over generated instances at both places."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import arch, generators, nonarch

PRIMES = (2, 3, 5, 13)
TOL = 1e-8

SUITES = (
    "finite/oracle",
    "finite/gates",
    "finite/antisymmetry",
    "finite/degenerate",
    "arch/oracle",
    "arch/levine",
    "arch/antisymmetry",
    "arch/degenerate",
)


def _finite_checks(rng, n: int) -> dict[str, bool]:
    out = {}
    p = int(rng.integers(1, n // 2 + 1))
    prime = PRIMES[int(rng.integers(len(PRIMES)))]
    inst = generators.nonarch_adapted(rng, n, p, prime)
    q = inst.quad
    try:
        alg = nonarch.intersection_algebraic(q)
        res = nonarch.intersection_geometric_details(q, inst.L_A, inst.L_B)
        out["finite/oracle"] = alg == res.value == inst.expected
        out["finite/gates"] = bool(res.constructive_agrees)
        out["finite/antisymmetry"] = (
            nonarch.intersection_algebraic(q.swap_ab()) == -alg
            and nonarch.intersection_algebraic(q.swap_cd()) == -alg
            and nonarch.intersection_geometric(q.swap_ab(), inst.L_B, inst.L_A) == -alg
            and nonarch.intersection_geometric(q.swap_cd(), inst.L_A, inst.L_B) == -alg
        )
    except (ValueError, RuntimeError):
        out["finite/oracle"] = out["finite/gates"] = out["finite/antisymmetry"] = False
    if n >= 3:
        deg = generators.nonarch_degenerate_p1(rng, n, prime)
        try:
            out["finite/degenerate"] = (
                nonarch.intersection_algebraic(deg.quad) == 0 == nonarch.intersection_geometric(deg.quad)
            )
        except (ValueError, RuntimeError):
            out["finite/degenerate"] = False
    return out


def _arch_checks(rng, n: int) -> dict[str, bool]:
    out = {}
    p = int(rng.integers(1, n // 2 + 1))
    inst = generators.arch_adapted(rng, n, p)
    q = inst.quad
    try:
        cf = arch.intersection_closed_form(q)
        geo = arch.intersection_geometric(q)
        out["arch/oracle"] = abs(cf - geo) <= TOL and abs(cf - inst.expected) <= TOL
        if p == 1:
            out["arch/levine"] = abs(arch.levine_pairing_p1(q) - cf) <= TOL
        out["arch/antisymmetry"] = (
            abs(arch.intersection_closed_form(q.swap_ab()) + cf) <= TOL
            and abs(arch.intersection_geometric(q.swap_cd()) + cf) <= TOL
        )
    except (ValueError, RuntimeError, np.linalg.LinAlgError):
        out["arch/oracle"] = out["arch/antisymmetry"] = False
        if p == 1:
            out["arch/levine"] = False
    if n >= 3:
        deg = generators.arch_degenerate_p1(rng, n)
        try:
            out["arch/degenerate"] = (
                arch.intersection_closed_form(deg.quad) == 0.0
                and arch.intersection_geometric(deg.quad) == 0.0
                and abs(arch.levine_pairing_p1(deg.quad)) <= TOL
            )
        except (ValueError, RuntimeError):
            out["arch/degenerate"] = False
    return out


def run_instance(seed: int, index: int, sizes: tuple[int, ...]) -> dict[str, bool]:
    rng = np.random.default_rng([seed, index])
    n = sizes[index % len(sizes)]
    out = _finite_checks(rng, n)
    out.update(_arch_checks(rng, n))
    return out


def _star(args):
    return run_instance(*args)


def run(seed: int, count: int, sizes, workers: int = 1) -> dict:
    """Summary {suite: {"passed": k, "total": m}} plus the list of failing indices."""
    sizes = tuple(int(s) for s in sizes)
    if any(s < 2 for s in sizes) or not sizes:
        raise ValueError("sizes must be integers >= 2")
    tasks = [(seed, i, sizes) for i in range(count)]
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_star, tasks, chunksize=max(1, count // (4 * workers))))
    else:
        results = [_star(t) for t in tasks]
    suites = {name: {"passed": 0, "total": 0} for name in SUITES}
    failures = []
    for i, res in enumerate(results):
        for name, ok in res.items():
            suites[name]["total"] += 1
            suites[name]["passed"] += int(ok)
            if not ok:
                failures.append({"index": i, "suite": name})
    suites = {k: v for k, v in suites.items() if v["total"]}
    return {
        "seed": seed,
        "count": count,
        "sizes": list(sizes),
        "suites": suites,
        "failures": failures,
        "ok": not failures,
    }


def format_table(summary: dict) -> str:
    lines = [f"selftest seed={summary['seed']} count={summary['count']} sizes={summary['sizes']}"]
    for name, s in summary["suites"].items():
        status = "PASS" if s["passed"] == s["total"] else "FAIL"
        lines.append(f"  {name:<22} {s['passed']:>5}/{s['total']:<5} {status}")
    lines.append("all suites passed" if summary["ok"] else f"{len(summary['failures'])} failing checks")
    return "\n".join(lines)
