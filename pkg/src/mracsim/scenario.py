"""Scenario file I/O.

Scenarios are INI files (configparser syntax) with sections [plant],
[reference], [controller], [adaptation], [sim]. Polynomial coefficients
are whitespace-separated ascending lists including the leading 1;
sinusoids are whitespace-separated amp,freq,phase triples.

Example:

    [plant]
    p = 0.065 0.989 2.174 1.379 1
    z = 0.05 0.767 1
    kp = -0.023

    [reference]
    rm = 108 21 1
    sinusoids = 1,1,0  -0.5,0.5,0

    [controller]
    type = proposed
    omega = 11.25 18.25 8 1
    h_den = 108 21 1

    [adaptation]
    upsilon0_scale = 1e10
    theta0_mode = multipliers
    theta0_multipliers = 1.2 1.2 1.2 1.2 0.9 1.2 0.8

    [sim]
    dt = 1e-3
    t_final = 200
    record_stride = 10
"""

import configparser
import io
import os

from .harness import BUILTIN_SCENARIOS, ScenarioConfig


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""


def _floats(text):
    return [float(tok) for tok in text.split()]


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _triples(text):
    out = []
    for tok in text.split():
        parts = tok.split(",")
        if len(parts) != 3:
            raise ValueError(f"expected amp,freq,phase triple, got {tok!r}")
        out.append(tuple(float(p) for p in parts))
    return out


def load_scenario(path_or_name: str) -> ScenarioConfig:
    """Resolve a built-in scenario name or parse a scenario file."""
    if path_or_name in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[path_or_name]()
    if not os.path.exists(path_or_name):
        raise ScenarioError(
            f"'{path_or_name}' is neither a file nor a built-in scenario "
            f"({', '.join(sorted(BUILTIN_SCENARIOS))})"
        )
    with open(path_or_name) as fh:
        name = os.path.splitext(os.path.basename(path_or_name))[0]
        return parse_scenario(fh.read(), name=name)


def parse_scenario(text: str, name="scenario") -> ScenarioConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"scenario parse error: {exc}") from exc

    cfg = ScenarioConfig(name=name)

    def grab(section, key, conv, attr, required=False):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                setattr(cfg, attr, conv(raw))
            except ValueError as exc:
                raise ScenarioError(
                    f"[{section}] {key} = {raw!r}: {exc}") from exc
        elif required:
            raise ScenarioError(f"missing required [{section}] {key}")

    grab("plant", "p", _floats, "plant_p", required=True)
    grab("plant", "z", _floats, "plant_z", required=True)
    grab("plant", "kp", float, "kp", required=True)

    grab("reference", "rm", _floats, "rm", required=True)
    grab("reference", "sinusoids", _triples, "ref_sinusoids")
    grab("reference", "offset", float, "ref_offset")

    grab("controller", "type", str.strip, "controller")
    grab("controller", "omega", _floats, "omega", required=True)
    grab("controller", "h_den", _floats, "h_den")

    grab("adaptation", "beta1", float, "beta1")
    grab("adaptation", "beta2", float, "beta2")
    grab("adaptation", "upsilon0_scale", float, "upsilon0_scale")
    grab("adaptation", "theta0_mode", str.strip, "theta0_mode")
    grab("adaptation", "theta0_multipliers", _floats, "theta0_multipliers")
    grab("adaptation", "theta0_explicit", _floats, "theta0_explicit")
    grab("adaptation", "gamma_theta", float, "gamma_theta")
    grab("adaptation", "gamma_chi", float, "gamma_chi")
    grab("adaptation", "sign_kp", int, "sign_kp")
    grab("adaptation", "chi0_multiplier", float, "chi0_multiplier")
    grab("adaptation", "adapt", _bool, "adapt")

    grab("sim", "dt", float, "dt")
    grab("sim", "t_final", float, "t_final")
    grab("sim", "record_stride", int, "record_stride")

    try:
        cfg.validate()
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    return cfg


def _fmt_floats(vals):
    return " ".join(repr(float(v)) for v in vals)


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Canonical INI text for a config; parse_scenario round-trips it."""
    cp = configparser.ConfigParser()
    cp["plant"] = {
        "p": _fmt_floats(cfg.plant_p),
        "z": _fmt_floats(cfg.plant_z),
        "kp": repr(float(cfg.kp)),
    }
    ref = {"rm": _fmt_floats(cfg.rm), "offset": repr(float(cfg.ref_offset))}
    if cfg.ref_sinusoids:
        ref["sinusoids"] = " ".join(
            ",".join(repr(float(x)) for x in s) for s in cfg.ref_sinusoids)
    cp["reference"] = ref
    ctrl = {"type": cfg.controller, "omega": _fmt_floats(cfg.omega)}
    if cfg.h_den:
        ctrl["h_den"] = _fmt_floats(cfg.h_den)
    cp["controller"] = ctrl
    ad = {
        "beta1": repr(float(cfg.beta1)),
        "beta2": repr(float(cfg.beta2)),
        "upsilon0_scale": repr(float(cfg.upsilon0_scale)),
        "theta0_mode": cfg.theta0_mode,
        "gamma_theta": repr(float(cfg.gamma_theta)),
        "gamma_chi": repr(float(cfg.gamma_chi)),
        "sign_kp": str(int(cfg.sign_kp)),
        "chi0_multiplier": repr(float(cfg.chi0_multiplier)),
        "adapt": "true" if cfg.adapt else "false",
    }
    if cfg.theta0_multipliers is not None:
        ad["theta0_multipliers"] = _fmt_floats(cfg.theta0_multipliers)
    if cfg.theta0_explicit is not None:
        ad["theta0_explicit"] = _fmt_floats(cfg.theta0_explicit)
    cp["adaptation"] = ad
    cp["sim"] = {
        "dt": repr(float(cfg.dt)),
        "t_final": repr(float(cfg.t_final)),
        "record_stride": str(int(cfg.record_stride)),
    }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
