"""``illposed`` command line: experiment runners that write PGM images and CSV tables."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .core import IllPosedError, svd
from .fileio import OutputSet, encode_csv, encode_pgm, read_pgm
from .freq import fft_tikhonov, wiener_nsr
from .operators import add_noise, conv2d, conv_matrix, devectorize, psf_build, vectorize
from .paramsel import TikhonovProblem, gcv, lcurve
from .regmat import L_KINDS, RegularizerSpec, build_L, laplacian2d_matrix
from .regression import build_design, ols, ridge_bias_variance, ridge_unsquared
from .solvers import (
    IrlsConfig,
    StopRule,
    admm,
    cgls,
    fista,
    irls,
    landweber,
    maxent,
    median_denoiser,
    naive_solve,
    pnp_admm,
    red,
    tikhonov_general,
)
from .sparse import cs_recover, dct2_dictionary
from .spectral import classify_illposedness, picard_table, tsvd_solve

METHODS = (
    "naive", "tikhonov", "tikhonov-L", "tsvd", "fista-l1", "irls", "admm-l1", "tv-aniso", "tv-iso",
    "maxent", "pnp-median", "red-fp", "red-sd", "red-admm", "cgls", "landweber", "fft-tikhonov", "wiener",
)
COMMANDS = ("analyze", "deblur", "missing", "interp", "cs", "regress")
CONFIG_KEYS = {
    "input", "output_dir", "psf", "bc", "method", "lam", "lambda_grid", "seed", "noise", "iters", "rho",
    "size", "k", "nsr", "L", "top", "m", "observed", "degree",
}


class UsageError(IllPosedError):
    pass


def parse_psf(spec: str):
    """``gaussian:size:sigma``, ``gaussian-aniso:size:sx:sy``, ``disk:size:radius``, ``motion:size:length:angle``."""
    parts = spec.split(":")
    kind = parts[0]
    try:
        nums = [float(p) for p in parts[1:]]
    except ValueError:
        raise UsageError(f"bad PSF spec {spec!r}") from None
    size = int(nums[0]) if nums else 5
    if kind in ("gaussian", "gaussian-iso"):
        return psf_build("gaussian-iso", size, sigma_x=nums[1] if len(nums) > 1 else 1.0)
    if kind == "gaussian-aniso":
        if len(nums) < 3:
            raise UsageError("gaussian-aniso needs size:sigma_x:sigma_y")
        return psf_build("gaussian-aniso", size, sigma_x=nums[1], sigma_y=nums[2])
    if kind == "disk":
        return psf_build("disk", size, radius=nums[1] if len(nums) > 1 else 1.0)
    if kind == "motion":
        return psf_build("motion", size, length=nums[1] if len(nums) > 1 else 3.0,
                         angle_deg=nums[2] if len(nums) > 2 else 0.0)
    raise UsageError(f"unknown PSF kind {kind!r}")


def parse_noise(spec: str) -> tuple[str, float]:
    if spec in ("none", "0", ""):
        return "none", 0.0
    try:
        kind, val = spec.split(":")
        val = float(val)
    except ValueError:
        raise UsageError(f"bad noise spec {spec!r}") from None
    if kind not in ("gaussian", "poisson"):
        raise UsageError(f"unknown noise model {kind!r}")
    return kind, val


def apply_noise(y, spec: str, seed: int) -> np.ndarray:
    kind, val = parse_noise(spec)
    if kind == "none":
        return np.array(y, dtype=float)
    if kind == "gaussian":
        return add_noise(y, "gaussian", std=val, seed=seed)
    return add_noise(y, "poisson", scale=val, seed=seed)


def parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"bad lambda grid {spec!r}; expected lo:hi:n") from None
    if not (0 < lo < hi) or n < 1:
        raise UsageError("lambda grid needs 0 < lo < hi and n >= 1")
    return np.logspace(np.log10(lo), np.log10(hi), n) if n > 1 else np.array([lo])


def read_config(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment. Dashes in keys become underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "lambda":
            key = "lam"
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="illposed", description="Regularized inversion experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--input", help="input PGM (P2 or P5)")
    p.add_argument("--output-dir", dest="output_dir", default="out")
    p.add_argument("--psf", default="gaussian:7:1.5")
    p.add_argument("--bc", default="zero", choices=("zero", "replicate", "periodic", "reflexive"))
    p.add_argument("--method", default="tikhonov")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--lambda-grid", dest="lambda_grid", default=None, help="lo:hi:n (log spaced)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", default=None, help="gaussian:STD, poisson:SCALE or none")
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--size", type=int, default=None, help="side of the built-in phantom")
    p.add_argument("--k", type=int, default=None, help="TSVD truncation index")
    p.add_argument("--nsr", type=float, default=None, help="Wiener noise-to-signal ratio")
    p.add_argument("--L", dest="L", default=None, help="regularization matrix kind")
    p.add_argument("--top", type=int, default=200, help="singular values kept by analyze")
    p.add_argument("--m", type=int, default=None, help="number of CS measurements")
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--observed", default="false", help="treat --input as already blurred (true/false)")
    return p


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        parser.set_defaults(**read_config(known.config))
    return parser.parse_args(argv)


def _flag(v) -> bool:
    return str(v).lower() in ("1", "true", "yes", "on")


def _kv_rows(d: dict):
    return [[k, v] for k, v in d.items()]


def _psnr(mse: float) -> float:
    return float("inf") if mse == 0 else float(10 * np.log10(1.0 / mse))


# ---------------------------------------------------------------- analyze

def cmd_analyze(a, out: OutputSet) -> None:
    if a.psf == "identity":
        n = a.size or 16
        A = np.eye(n * n)
        X = ex.phantom(n)
        label = "identity"
    else:
        X = read_pgm(a.input) if a.input else ex.phantom(a.size or ex.DESK_SIZE)
        psf = parse_psf(a.psf)
        A = conv_matrix(psf, X.shape[0], X.shape[1], a.bc)
        label = a.psf
    y = apply_noise(A @ vectorize(X), a.noise or "gaussian:0.0005", a.seed)
    f = svd(A)
    top = min(a.top, f.sigmas.size)
    out.write("singular_values.csv", encode_csv(["index", "sigma"],
                                                ([i + 1, float(s)] for i, s in enumerate(f.sigmas[:top]))))
    tab = picard_table(f, y)
    out.write("picard.csv", encode_csv(["index", "sigma", "coeff", "ratio"],
                                       ([i, float(s), float(c), float(r)] for i, s, c, r in tab.rows())))
    cls = classify_illposedness(f.sigmas)
    kept = f.sigmas[f.sigmas > 1e-12 * f.sigmas[0]]
    report = {"operator": label, "bc": a.bc, "rows": A.shape[0], "cols": A.shape[1],
              "condition_number": float(kept[0] / kept[-1]), "regime": cls.regime,
              "alpha_hat": float(cls.alpha_hat)}
    out.write("report.csv", encode_csv(["key", "value"], _kv_rows(report)))


# ---------------------------------------------------------------- deblur

def _reconstruct(method: str, a, A, y, shape, psf, lam: float):
    """Returns ``(x, history_csv or None, extra report entries)``."""
    n = A.shape[1]
    iters = a.iters
    rho = a.rho if a.rho is not None else 1.0
    stop = StopRule(max_iters=iters, rel_tol=0.0) if iters else None
    if method == "naive":
        return naive_solve(A, y), None, {}
    if method == "tikhonov":
        return tikhonov_general(A, y, RegularizerSpec(np.eye(n), lam)), None, {}
    if method == "tikhonov-L":
        kind = a.L or "laplacian"
        L = laplacian2d_matrix(*shape, a.bc) if kind == "laplacian" else build_L(kind, n)
        return tikhonov_general(A, y, RegularizerSpec(L, lam)), None, {"L": kind}
    if method == "tsvd":
        f = svd(A)
        k = a.k or max(1, f.rank() // 2)
        return tsvd_solve(f, y, k), None, {"k": k}
    if method == "fista-l1":
        rep = fista(A, y, lam, stop or StopRule(max_iters=500, rel_tol=1e-12))
    elif method == "irls":
        rep = irls(A, y, IrlsConfig(epsilon=1e-6, outer_iters=iters or 50), 2.0,
                   RegularizerSpec(np.eye(n), lam), 1.0)
    elif method == "admm-l1":
        rep = admm(A, y, lam, rho, "l1", stop=stop or StopRule(max_iters=300, rel_tol=0.0))
    elif method in ("tv-aniso", "tv-iso"):
        kind = "tv_aniso_2d" if method == "tv-aniso" else "tv_iso_2d"
        rep = admm(A, y, lam, rho, kind, shape=shape, stop=stop or StopRule(max_iters=300, rel_tol=0.0))
    elif method == "maxent":
        rep = maxent(A, y, lam, stop=stop)
    elif method == "pnp-median":
        rep = pnp_admm(A, y, lam, median_denoiser(5, 5), rho, stop, shape=shape)
    elif method in ("red-fp", "red-sd", "red-admm"):
        scheme = {"red-fp": "fixed_point", "red-sd": "steepest", "red-admm": "admm"}[method]
        budget = 1000 if scheme == "steepest" else 300
        rep = red(A, y, lam, median_denoiser(5, 5), scheme, stop or StopRule(max_iters=budget, rel_tol=0.0),
                  shape=shape)
    elif method == "cgls":
        rep = cgls(A, y, stop or StopRule(max_iters=50, rel_tol=0.0))
    elif method == "landweber":
        rep = landweber(A, y, None, stop or StopRule(max_iters=200, rel_tol=0.0))
    elif method in ("fft-tikhonov", "wiener"):
        Y = devectorize(y, *shape)
        if method == "fft-tikhonov":
            X = fft_tikhonov(Y, psf, lam)
            return vectorize(X), None, {}
        nsr = a.nsr if a.nsr is not None else lam**2
        return vectorize(wiener_nsr(Y, psf, nsr)), None, {"nsr": float(nsr)}
    else:
        raise UsageError(f"unknown method {method!r}; expected one of {METHODS}")
    return rep.x, rep.to_csv().encode("utf-8"), {"iterations": rep.iterations, "stop_reason": rep.stop_reason}


DEFAULT_LAMBDA = {"tikhonov": 0.0025, "tikhonov-L": 0.0025, "fista-l1": 0.01, "irls": 0.01, "admm-l1": 0.01,
                  "tv-aniso": 0.01, "tv-iso": 0.01, "maxent": 0.05, "pnp-median": 1.0, "red-fp": 0.1,
                  "red-sd": 0.1, "red-admm": 0.1, "fft-tikhonov": 0.0025, "wiener": 0.0025}


def cmd_deblur(a, out: OutputSet) -> None:
    if a.method not in METHODS:
        raise UsageError(f"unknown method {a.method!r}; expected one of {METHODS}")
    psf = parse_psf(a.psf)
    observed = _flag(a.observed)
    if a.input:
        img = read_pgm(a.input)
    else:
        img = ex.phantom(a.size or ex.DESK_SIZE)
    shape = img.shape
    A = conv_matrix(psf, shape[0], shape[1], a.bc)
    if observed:
        truth, y = None, vectorize(img)
    else:
        truth = vectorize(img)
        if a.method in ("fft-tikhonov", "wiener"):
            y_clean = vectorize(conv2d(img, psf, a.bc))
        else:
            y_clean = A @ truth
        y = apply_noise(y_clean, a.noise or f"gaussian:{ex.DESK_NOISE_STD}", a.seed)
        out.write("blurred.pgm", encode_pgm(devectorize(y, *shape)))

    grid = parse_grid(a.lambda_grid) if a.lambda_grid else None
    lams = grid if grid is not None else [a.lam if a.lam is not None else DEFAULT_LAMBDA.get(a.method, 0.0)]
    sweep = []
    for i, lam in enumerate(lams):
        x, hist, extra = _reconstruct(a.method, a, A, y, shape, psf, float(lam))
        suffix = "" if grid is None else f"_{i:03d}"
        out.write(f"reconstruction{suffix}.pgm", encode_pgm(devectorize(x, *shape)))
        if hist is not None:
            out.write(f"history{suffix}.csv", hist)
        row = {"method": a.method, "lambda": float(lam), "psf": a.psf, "bc": a.bc,
               "residual": float(np.linalg.norm(A @ x - y)), "solution_norm": float(np.linalg.norm(x))}
        if truth is not None:
            mse = float(np.mean((x - truth) ** 2))
            row.update({"mse": mse, "psnr": _psnr(mse)})
        row.update(extra)
        sweep.append(row)
    if grid is None:
        out.write("report.csv", encode_csv(["key", "value"], _kv_rows(sweep[0])))
        return
    cols = ["lambda", "residual", "solution_norm"] + (["mse", "psnr"] if truth is not None else [])
    out.write("sweep.csv", encode_csv(cols, ([r[c] for c in cols] for r in sweep)))
    if a.method == "tikhonov" and grid.size >= 5:
        prob = TikhonovProblem(A, y)
        lc = lcurve(prob, grid)
        out.write("lcurve.csv", encode_csv(["lambda", "residual_norm", "solution_norm", "curvature"],
                                           zip(lc.lambdas, lc.residual_norm, lc.solution_norm, lc.curvature)))
        g = gcv(prob, grid)
        out.write("gcv.csv", encode_csv(["lambda", "G"], zip(g.lambdas, g.G)))
        out.write("selection.csv", encode_csv(["key", "value"], [["lcurve_corner", lc.corner_lambda],
                                                                 ["gcv_lambda", g.lambda_star]]))


# ---------------------------------------------------------------- missing data

def cmd_missing(a, out: OutputSet) -> None:
    kind = a.L or "d2"
    if kind not in L_KINDS:
        raise UsageError(f"unknown L kind {kind!r}")
    std = parse_noise(a.noise)[1] if a.noise else 0.0
    inst = ex.missing_data(a.size or 400, noise_std=std, seed=a.seed)
    lam = a.lam if a.lam is not None else 1e-4
    x = tikhonov_general(inst.A, inst.y, RegularizerSpec(build_L(kind, inst.t.size), lam))
    out.write("missing.csv", encode_csv(["t", "original", "corrupted", "reconstructed"],
                                        zip(inst.t, inst.x_true, inst.y, x)))
    mse = float(np.mean((x - inst.x_true) ** 2))
    out.write("report.csv", encode_csv(["key", "value"], [["L", kind], ["lambda", float(lam)], ["mse", mse]]))


# ---------------------------------------------------------------- interpolation

def cmd_interp(a, out: OutputSet) -> None:
    std = parse_noise(a.noise)[1] if a.noise else 0.1
    inst = ex.interp_signal(a.size or 40, noise_std=std, seed=a.seed)
    deg = a.degree if a.degree is not None else 9
    P = build_design("poly", inst.t_poly, degree=deg)
    T = build_design("trig", inst.t_trig, freqs=(1, 2, 3))
    fit_p = P @ ols(P, inst.y)
    fit_t = T @ ols(T, inst.y)
    out.write("interp.csv", encode_csv(["t", "observed", "clean", "poly_fit", "trig_fit"],
                                       zip(inst.t, inst.y, inst.y_clean, fit_p, fit_t)))
    s = np.linalg.svd(P, compute_uv=False)
    report = [["degree", deg], ["poly_condition", float(s[0] / s[-1])],
              ["mse_poly", float(np.mean((fit_p - inst.y_clean) ** 2))],
              ["mse_trig", float(np.mean((fit_t - inst.y_clean) ** 2))],
              ["rms_residual_trig", float(np.sqrt(np.mean((fit_t - inst.y) ** 2)))]]
    out.write("report.csv", encode_csv(["key", "value"], report))


# ---------------------------------------------------------------- compressed sensing

def cmd_cs(a, out: OutputSet) -> None:
    side = a.size or 32
    n = side * side
    m = a.m or n // 8
    s, _ = ex.dct_sparse_image(side, k=max(3, n // 170), band=max(4, side // 5), seed=a.seed)
    D = dct2_dictionary(side, side)
    res = cs_recover(s, D, m, seed=a.seed, lam=a.lam, stage_iters=a.iters or 300)
    met = res.metrics
    out.write("cs.csv", encode_csv(["m", "recovery_error", "support_f1"],
                                   [[met["m"], met["recovery_error"], met["support_f1"]]]))
    out.write("report.csv", encode_csv(["key", "value"], _kv_rows(met)))
    out.write("truth.pgm", encode_pgm(devectorize(res.x_true, side, side)))
    lo, hi = res.x_true.min(), res.x_true.max()
    scale = (lambda v: (v - lo) / (hi - lo)) if hi > lo else (lambda v: v)
    out.write("l1.pgm", encode_pgm(scale(devectorize(res.x_hat, side, side))))
    out.write("pinv.pgm", encode_pgm(scale(devectorize(res.x_pinv, side, side))))
    out.write("truth_scaled.pgm", encode_pgm(scale(devectorize(res.x_true, side, side))))


# ---------------------------------------------------------------- regression

def cmd_regress(a, out: OutputSet) -> None:
    std = parse_noise(a.noise)[1] if a.noise else 1.0
    inst = ex.quintic_signal(a.size or 30, noise_std=std, seed=a.seed)
    deg = a.degree if a.degree is not None else 4
    X = build_design("poly", inst.t, degree=deg)
    grid = parse_grid(a.lambda_grid) if a.lambda_grid else np.array([0.5, 1.0, 2.0, 4.0, 8.0])
    b_ols = ols(X, inst.y)
    rows = [["ols", 0.0, float(np.linalg.norm(b_ols))]]
    for lam in grid:
        rows.append(["ridge", float(lam), float(np.linalg.norm(ridge_unsquared(X, inst.y, float(lam))))])
    out.write("coefficients.csv", encode_csv(["estimator", "lambda", "norm"], rows))
    beta = ols(X, inst.y_clean)
    bv = ridge_bias_variance(X, beta, std**2, grid)
    out.write("bias_variance.csv", encode_csv(["lambda", "variance", "bias2", "mse"],
                                              zip(bv.lambdas, bv.variance, bv.bias2, bv.mse)))


HANDLERS = {"analyze": cmd_analyze, "deblur": cmd_deblur, "missing": cmd_missing,
            "interp": cmd_interp, "cs": cmd_cs, "regress": cmd_regress}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = parse_args(argv)
    except (UsageError, OSError) as err:
        print(f"illposed: {err}", file=sys.stderr)
        return 2
    try:
        with OutputSet(a.output_dir) as out:
            HANDLERS[a.command](a, out)
    except UsageError as err:
        print(f"illposed: {err}", file=sys.stderr)
        return 2
    except (IllPosedError, OSError, ValueError, np.linalg.LinAlgError) as err:
        print(f"illposed: {a.command} failed: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
