"""Config-text serialization of measures, densities, certificates, pairs.

The schema mirrors the expression nodes one-to-one; real numbers are
serialized as decimal strings with 17 significant digits so round trips
are lossless.  Closed-form densities serialize through a label registry
(only labeled forms can be reconstructed).
"""

from __future__ import annotations

from typing import Any

from .errors import ConfigError
from .intervals import IntervalUnion, as_interval_union
from .measures import (
    Atomic,
    BoundedDensity,
    Convolve,
    Density,
    IfsInvariant,
    LebesgueOnSet,
    MeasureExpr,
    Normalize,
    Restrict,
    Scale,
    Sum,
    Translate,
    piecewise_constant_density,
    piecewise_polynomial_density,
)
from .verifier import TruncationInfo


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def parse_real(v, where: str = "") -> float:
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a real number at {where}, got {v!r}") from None


def _intervals_to_obj(region: IntervalUnion):
    return [[fmt_real(a), fmt_real(b)] for a, b in region]


def _intervals_from_obj(obj, where):
    if not isinstance(obj, list) or not obj:
        raise ConfigError(f"expected a nonempty interval list at {where}")
    try:
        return as_interval_union(
            [(parse_real(a, where), parse_real(b, where)) for a, b in obj]
        )
    except (TypeError, ValueError):
        raise ConfigError(f"malformed interval list at {where}") from None


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------
def density_to_obj(phi: BoundedDensity) -> dict:
    if phi.form == "piecewise-constant" and phi.payload and len(phi.payload) == 2:
        bp, vals = phi.payload
        return {
            "form": "piecewise-constant",
            "breakpoints": [fmt_real(b) for b in bp],
            "values": [fmt_real(v) for v in vals],
        }
    if phi.form == "piecewise-polynomial" and phi.payload:
        return {
            "form": "piecewise-polynomial",
            "pieces": [
                {
                    "interval": [fmt_real(a), fmt_real(b)],
                    "coeffs": [fmt_real(c) for c in coeffs],
                }
                for (a, b), coeffs in phi.payload[0]
            ],
            "lower": fmt_real(phi.lower),
            "upper": fmt_real(phi.upper),
        }
    if phi.label == "squared-transform-ifs":
        scale, digits, weights, depth, lower, region = phi.payload
        return {
            "form": "closed-form-with-stated-envelope",
            "label": phi.label,
            "scale": int(scale),
            "digits": [int(d) for d in digits],
            "weights": [fmt_real(w) for w in weights],
            "depth": int(depth),
            "lower": fmt_real(lower),
            "region": [[fmt_real(a), fmt_real(b)] for a, b in region],
        }
    raise ConfigError(
        f"density of form {phi.form!r} (label {phi.label!r}) is not serializable"
    )


def density_from_obj(obj, where="density") -> BoundedDensity:
    if not isinstance(obj, dict) or "form" not in obj:
        raise ConfigError(f"expected a density object with a 'form' at {where}")
    form = obj["form"]
    if form == "piecewise-constant":
        return piecewise_constant_density(
            [parse_real(b, where) for b in obj["breakpoints"]],
            [parse_real(v, where) for v in obj["values"]],
        )
    if form == "piecewise-polynomial":
        pieces = [
            (
                (parse_real(p["interval"][0], where), parse_real(p["interval"][1], where)),
                [parse_real(c, where) for c in p["coeffs"]],
            )
            for p in obj["pieces"]
        ]
        return piecewise_polynomial_density(
            pieces, parse_real(obj["lower"], where), parse_real(obj["upper"], where)
        )
    if form == "closed-form-with-stated-envelope":
        label = obj.get("label")
        if label == "squared-transform-ifs":
            from .constructions import squared_transform_density

            ifs = IfsInvariant(
                int(obj["scale"]),
                tuple(int(d) for d in obj["digits"]),
                tuple(parse_real(w, where) for w in obj["weights"]),
            )
            return squared_transform_density(
                ifs,
                _intervals_from_obj(obj["region"], where),
                depth=int(obj["depth"]),
                lower=parse_real(obj["lower"], where),
            )
        raise ConfigError(f"unknown closed-form density label {label!r} at {where}")
    raise ConfigError(f"unknown density form {form!r} at {where}")


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------
def _point_to_obj(p: tuple[float, ...]):
    return fmt_real(p[0]) if len(p) == 1 else [fmt_real(c) for c in p]


def _point_from_obj(obj, where):
    if isinstance(obj, list):
        return tuple(parse_real(c, where) for c in obj)
    return (parse_real(obj, where),)


def measure_to_obj(mu: MeasureExpr) -> dict:
    if isinstance(mu, LebesgueOnSet):
        return {"node": "lebesgue_on_set", "intervals": _intervals_to_obj(mu.region)}
    if isinstance(mu, Atomic):
        return {
            "node": "atomic",
            "atoms": [
                {"point": _point_to_obj(p), "weight": fmt_real(w)}
                for p, w in zip(mu.points, mu.weights)
            ],
        }
    if isinstance(mu, IfsInvariant):
        return {
            "node": "ifs_invariant",
            "scale": mu.scale,
            "digits": list(mu.digits),
            "weights": [fmt_real(w) for w in mu.weights],
        }
    if isinstance(mu, Density):
        return {
            "node": "density",
            "phi": density_to_obj(mu.phi),
            "base": measure_to_obj(mu.base),
        }
    if isinstance(mu, Restrict):
        return {
            "node": "restrict",
            "set": _intervals_to_obj(mu.region),
            "base": measure_to_obj(mu.base),
        }
    if isinstance(mu, Scale):
        return {"node": "scale", "alpha": fmt_real(mu.alpha), "base": measure_to_obj(mu.base)}
    if isinstance(mu, Sum):
        return {
            "node": "sum",
            "left": measure_to_obj(mu.left),
            "right": measure_to_obj(mu.right),
        }
    if isinstance(mu, Convolve):
        return {
            "node": "convolve",
            "left": measure_to_obj(mu.left),
            "right": measure_to_obj(mu.right),
        }
    if isinstance(mu, Translate):
        return {
            "node": "translate",
            "shift": _point_to_obj(mu.shift),
            "base": measure_to_obj(mu.base),
        }
    if isinstance(mu, Normalize):
        return {"node": "normalize", "base": measure_to_obj(mu.base)}
    raise ConfigError(f"cannot serialize {type(mu).__name__}")


def measure_from_obj(obj, where="measure") -> MeasureExpr:
    if not isinstance(obj, dict) or "node" not in obj:
        raise ConfigError(f"expected a measure object with a 'node' tag at {where}")
    node = obj["node"]
    sub = f"{where}.{node}"
    try:
        if node == "lebesgue_on_set":
            return LebesgueOnSet(_intervals_from_obj(obj["intervals"], sub))
        if node == "atomic":
            pts, wts = [], []
            for a in obj["atoms"]:
                pts.append(_point_from_obj(a["point"], sub))
                wts.append(parse_real(a["weight"], sub))
            return Atomic(tuple(pts), tuple(wts))
        if node == "ifs_invariant":
            return IfsInvariant(
                int(obj["scale"]),
                tuple(int(d) for d in obj["digits"]),
                tuple(parse_real(w, sub) for w in obj["weights"]),
            )
        if node == "density":
            return Density(
                density_from_obj(obj["phi"], sub), measure_from_obj(obj["base"], sub)
            )
        if node == "restrict":
            return Restrict(
                _intervals_from_obj(obj["set"], sub), measure_from_obj(obj["base"], sub)
            )
        if node == "scale":
            return Scale(parse_real(obj["alpha"], sub), measure_from_obj(obj["base"], sub))
        if node == "sum":
            return Sum(
                measure_from_obj(obj["left"], sub), measure_from_obj(obj["right"], sub)
            )
        if node == "convolve":
            return Convolve(
                measure_from_obj(obj["left"], sub), measure_from_obj(obj["right"], sub)
            )
        if node == "translate":
            return Translate(
                _point_from_obj(obj["shift"], sub), measure_from_obj(obj["base"], sub)
            )
        if node == "normalize":
            return Normalize(measure_from_obj(obj["base"], sub))
    except KeyError as exc:
        raise ConfigError(f"missing field {exc.args[0]!r} at {sub}") from None
    raise ConfigError(f"unknown node tag {node!r} at {where}")


# ---------------------------------------------------------------------------
# certificates and pairs
# ---------------------------------------------------------------------------
def _param_to_obj(v) -> Any:
    if isinstance(v, bool) or isinstance(v, int):
        return v
    if isinstance(v, float):
        return fmt_real(v)
    if isinstance(v, (tuple, list)):
        return [_param_to_obj(x) for x in v]
    return str(v)


def _param_from_obj(v) -> Any:
    if isinstance(v, list):
        return tuple(_param_from_obj(x) for x in v)
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            return v
    return v


def cert_to_obj(cert) -> dict:
    return {
        "A": fmt_real(cert.A),
        "B": fmt_real(cert.B),
        "kind": cert.kind,
        "provenance": [
            {"rule": s.rule, "params": {k: _param_to_obj(v) for k, v in s.params}}
            for s in cert.provenance
        ],
    }


def cert_from_obj(obj, where="cert"):
    from .constructions import BoundCert, ProvenanceStep

    if not isinstance(obj, dict):
        raise ConfigError(f"expected a certificate object at {where}")
    try:
        steps = tuple(
            ProvenanceStep(
                s["rule"],
                tuple(sorted((k, _param_from_obj(v)) for k, v in s.get("params", {}).items())),
            )
            for s in obj.get("provenance", [])
        )
        return BoundCert(
            parse_real(obj["A"], where), parse_real(obj["B"], where), obj["kind"], steps
        )
    except KeyError as exc:
        raise ConfigError(f"missing field {exc.args[0]!r} at {where}") from None


def truncation_to_obj(trunc) -> dict | None:
    if trunc is None:
        return None
    return {
        "kind": trunc.kind,
        "threshold": fmt_real(trunc.threshold),
        "smear": fmt_real(trunc.smear),
        "weight_scale": fmt_real(trunc.weight_scale),
    }


def truncation_from_obj(obj, where="truncation"):
    if obj is None:
        return None
    return TruncationInfo(
        obj["kind"],
        parse_real(obj["threshold"], where),
        parse_real(obj.get("smear", 0.0), where),
        parse_real(obj.get("weight_scale", 1.0), where),
    )


def pair_to_obj(pair) -> dict:
    return {
        "mu": measure_to_obj(pair.mu),
        "nu": measure_to_obj(pair.nu),
        "cert": cert_to_obj(pair.cert),
        "truncation": truncation_to_obj(pair.truncation),
        "notes": list(pair.notes),
    }


def pair_from_obj(obj, where="pair"):
    from .constructions import CertifiedPair

    return CertifiedPair(
        mu=measure_from_obj(obj["mu"], where + ".mu"),
        nu=measure_from_obj(obj["nu"], where + ".nu"),
        cert=cert_from_obj(obj["cert"], where + ".cert"),
        truncation=truncation_from_obj(obj.get("truncation"), where + ".truncation"),
        notes=tuple(obj.get("notes", ())),
    )
