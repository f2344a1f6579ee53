"""Files: run configs (.pcfg), solution dumps (.pdump), certificates (.pcert.json), CSV reports.

A dump is a little-endian container::

    b"PCRT" | uint16 version | uint32 header length | JSON header | payload

The payload holds every piece as complex128 (K+1, nmodes) row-major arrays,
followed by the initial data as four float64 arrays (re lo, re hi, im lo,
im hi).  Floats in headers and certificates are stored as exact binary64
hex strings; certificates add decimal strings for people, parsers only read
the hex fields.
"""

import configparser
import csv
import io as _io
import json
import struct

import numpy as np

from .certify import Certificate
from .errors import ConfigError, FormatError
from .interval import CInterval, Interval
from .problem import PdeProblem
from .sequences import FourierSeq, Poly
from .solver import ApproxSolution

MAGIC = b"PCRT"
DUMP_VERSION = 1
CERT_VERSION = 1


def hexf(x):
    return float(x).hex()


def unhexf(s):
    try:
        return float.fromhex(s)
    except (TypeError, ValueError):
        raise FormatError(f"bad hex float {s!r}") from None


def _hex_nested(x):
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_hex_nested(v) for v in x]
    return hexf(x)


def _unhex_nested(x):
    if isinstance(x, list):
        return [_unhex_nested(v) for v in x]
    return unhexf(x)


def _dec_nested(x):
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_dec_nested(v) for v in x]
    return repr(float(x))


def _num(x):
    """Exact field: hex for parsers, decimal for readers."""
    return {"hex": _hex_nested(x), "dec": _dec_nested(x)}


def _read_num(d, key):
    if not isinstance(d, dict) or "hex" not in d:
        raise FormatError(f"field {key!r} lacks its hex form")
    return _unhex_nested(d["hex"])


# problems ----------------------------------------------------------------------

def _iv_pair(iv):
    return [hexf(iv.lo), hexf(iv.hi)]


def problem_to_dict(p):
    return {"name": p.name, "J": p.J, "symmetry": p.symmetry,
            "gs": [[[hexf(lo), hexf(hi)] for lo, hi in zip(g.coeffs.lo, g.coeffs.hi)] for g in p.gs],
            "space_scale": _iv_pair(p.space_scale), "time_scale": _iv_pair(p.time_scale),
            "amplitude": _iv_pair(p.amplitude), "params": dict(p.params)}


def _iv_from(pair):
    return Interval(unhexf(pair[0]), unhexf(pair[1]))


def problem_from_dict(d):
    try:
        gs = []
        for g in d["gs"]:
            lo = np.array([unhexf(c[0]) for c in g])
            hi = np.array([unhexf(c[1]) for c in g])
            gs.append(Poly(Interval(lo, hi)))
        return PdeProblem(d["J"], gs, d["symmetry"], d["name"], _iv_from(d["space_scale"]),
                          _iv_from(d["time_scale"]), _iv_from(d["amplitude"]), d.get("params"))
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"bad problem description: {exc}") from None


# dumps -------------------------------------------------------------------------

def dump_bytes(sol, manifest=None):
    seq = sol.initial if isinstance(sol.initial, FourierSeq) else sol.initial.finite
    header = {
        "format": "parab-solution", "version": DUMP_VERSION, "problem": problem_to_dict(sol.problem),
        "N": sol.N, "nu": hexf(sol.nu), "grid": [hexf(t) for t in sol.grid],
        "shapes": [list(pc.shape) for pc in sol.pieces], "eps_in": hexf(sol.eps_in),
        "initial": {"length": int(seq.coeffs.shape[0]), "nu": hexf(seq.nu)},
        "residuals": [hexf(r) for r in sol.residuals], "defects": [hexf(d) for d in sol.defects],
        "manifest": manifest or {},
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    out = [MAGIC, struct.pack("<HI", DUMP_VERSION, len(head)), head]
    for pc in sol.pieces:
        out.append(np.ascontiguousarray(pc, dtype="<c16").tobytes())
    c = seq.coeffs
    for a in (c.re.lo, c.re.hi, c.im.lo, c.im.hi):
        out.append(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return b"".join(out)


def load_bytes(data):
    """(ApproxSolution, manifest) from dump bytes."""
    if data[:4] != MAGIC:
        raise FormatError("not a PCRT dump")
    try:
        version, hlen = struct.unpack_from("<HI", data, 4)
    except struct.error:
        raise FormatError("truncated dump header") from None
    if version != DUMP_VERSION:
        raise FormatError(f"unsupported dump version {version}")
    pos = 10 + hlen
    try:
        header = json.loads(data[10:pos].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"bad dump header: {exc}") from None
    problem = problem_from_dict(header["problem"])
    pieces = []
    for shape in header["shapes"]:
        n = int(np.prod(shape)) * 16
        if pos + n > len(data):
            raise FormatError("truncated dump payload")
        pieces.append(np.frombuffer(data, dtype="<c16", count=n // 16, offset=pos).reshape(shape).astype(complex))
        pos += n
    ln = header["initial"]["length"]
    arrs = []
    for _ in range(4):
        if pos + 8 * ln > len(data):
            raise FormatError("truncated dump payload")
        arrs.append(np.frombuffer(data, dtype="<f8", count=ln, offset=pos).astype(float))
        pos += 8 * ln
    if pos != len(data):
        raise FormatError("trailing bytes after dump payload")
    coeffs = CInterval(Interval(arrs[0], arrs[1]), Interval(arrs[2], arrs[3]))
    seq = FourierSeq(coeffs, unhexf(header["initial"]["nu"]), problem.symmetry)
    sol = ApproxSolution(problem, [unhexf(t) for t in header["grid"]], pieces, header["N"],
                         unhexf(header["nu"]), seq, unhexf(header["eps_in"]),
                         [unhexf(r) for r in header["residuals"]], [unhexf(d) for d in header["defects"]])
    return sol, header.get("manifest", {})


def write_dump(path, sol, manifest=None):
    with open(path, "wb") as f:
        f.write(dump_bytes(sol, manifest))


def read_dump(path):
    with open(path, "rb") as f:
        return load_bytes(f.read())


# certificates ----------------------------------------------------------------------

_CERT_FIELDS = ("r", "eta", "Y", "Z", "W", "r_star")


def cert_to_dict(cert, physical_scale=None):
    d = {"format": "parab-certificate", "version": CERT_VERSION, "verified": bool(cert.verify())}
    for k in _CERT_FIELDS:
        d[k] = _num(getattr(cert, k))
    d["global_error"] = _num(cert.global_error)
    if physical_scale is not None:
        d["global_error_physical"] = _num(physical_scale)
    if cert.steady:
        d["steady"] = {k: (_num(v) if v is not None else None) for k, v in cert.steady.items()}
    else:
        d["steady"] = None
    d["meta"] = cert.meta
    return d


def cert_from_dict(d):
    if d.get("format") != "parab-certificate":
        raise FormatError("not a certificate")
    try:
        vals = {k: _read_num(d[k], k) for k in _CERT_FIELDS}
    except KeyError as exc:
        raise FormatError(f"certificate lacks {exc}") from None
    steady = None
    if d.get("steady"):
        steady = {k: (_read_num(v, k) if v is not None else None) for k, v in d["steady"].items()}
    return Certificate(steady=steady, meta=d.get("meta", {}), **vals)


def write_cert(path, cert, physical_scale=None):
    with open(path, "w") as f:
        json.dump(cert_to_dict(cert, physical_scale), f, indent=1)
        f.write("\n")


def read_cert(path):
    try:
        with open(path) as f:
            return cert_from_dict(json.load(f))
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad certificate JSON: {exc}") from None


# configs -------------------------------------------------------------------------

def read_config(path_or_text):
    """ConfigParser from a .pcfg path (or its text when it contains a newline)."""
    cp = configparser.ConfigParser()
    try:
        if "\n" in path_or_text:
            cp.read_string(path_or_text)
        else:
            with open(path_or_text) as f:
                cp.read_file(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"bad config: {exc}") from None
    return cp


# reports -------------------------------------------------------------------------

def surface_rows(sol, resolution, physical=True):
    """(t, x, u) on a resolution x resolution grid over the finite part of the run."""
    p = sol.problem
    t_end = sol.grid[-1] if np.isfinite(sol.grid[-1]) else sol.grid[-2]
    ts = np.linspace(sol.grid[0], t_end, resolution)
    ys = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    tsc = float(p.time_scale.mid()) if physical else 1.0
    xsc = float(p.space_scale.mid()) if physical else 1.0
    amp = float(p.amplitude.mid()) if physical else 1.0
    rows = []
    for t in ts:
        u = sol.eval_physical(t, ys) * amp
        rows.extend((t / tsc, y / xsc, v) for y, v in zip(ys, u))
    return rows


def domain_rows(sol, cert=None, physical=True):
    tsc = float(sol.problem.time_scale.mid()) if physical else 1.0
    rows = []
    if cert is None or not cert.r:
        return rows
    for m in range(sol.M):
        t0, t1 = sol.domain(m)
        rows.append((m + 1, t0 / tsc, t1 / tsc, (t1 - t0) / tsc, sol.pieces[m].shape[0] - 1, cert.r[m]))
    return rows


def write_csv(path_or_buf, header, rows):
    own = isinstance(path_or_buf, str)
    f = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        w = csv.writer(f)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    finally:
        if own:
            f.close()


def csv_text(header, rows):
    buf = _io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()
