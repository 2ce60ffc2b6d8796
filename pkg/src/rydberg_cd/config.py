"""YAML configuration files with explicit unit tags.

Dimensional values must carry a unit, e.g. ``omega_max: 20 MHz_over_2pi``
or ``T: 0.05 us``.  Recognised tags:

* frequency: ``rad_per_us``, ``kHz_over_2pi``, ``MHz_over_2pi``, ``GHz_over_2pi``
* time: ``ns``, ``us``, ``ms``
* rate: ``per_ns``, ``per_us``, ``per_ms``
* angle: ``rad``, ``deg``

A file may hold a gate description alone or add ``sweep:`` and
``optimize:`` sections.  ``extends: <preset>`` merges the named preset
underneath the file's own keys.
"""

from __future__ import annotations

import copy
from importlib import resources
from pathlib import Path

import yaml

from .gate import PhaseJumpSpec, ProtocolConfig
from .model import INFINITE, SPECIES, DecayChannel
from .pulsegen import PulseParams
from .units import UnitError, parse_number, parse_quantity


class ConfigError(ValueError):
    """Schema violation, reported with the offending field path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _q(section: dict, key: str, kind: str, where: str, required=True):
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"{where}.{key}", "missing")
        return None
    try:
        return parse_quantity(section[key], kind)
    except (UnitError, ValueError) as exc:
        raise ConfigError(f"{where}.{key}", str(exc)) from None


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("rydberg_cd.presets").iterdir() if p.name.endswith(".yaml"))


def load_preset_dict(name: str) -> dict:
    path = resources.files("rydberg_cd.presets") / f"{name}.yaml"
    if not path.is_file():
        raise ConfigError("preset", f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return _resolve(yaml.safe_load(path.read_text()))


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _resolve(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    if "artifact_version" in raw and isinstance(raw.get("config"), dict):
        raw = raw["config"]  # a run manifest
    raw = dict(raw)
    parent = raw.pop("extends", None)
    if parent is None:
        return raw
    return _merge(load_preset_dict(parent), raw)


def load_config_dict(path) -> dict:
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"YAML parse error: {exc}") from None
    return _resolve(raw)


def _decay_channels(raw: dict) -> list[DecayChannel]:
    channels = []
    species = raw.get("species")
    if species is not None:
        if species not in SPECIES:
            raise ConfigError("species", f"unknown species {species!r}; presets: {sorted(SPECIES)}")
        channels += SPECIES[species].channels()
    for i, ch in enumerate(raw.get("decay") or []):
        where = f"decay[{i}]"
        if "from" not in ch:
            raise ConfigError(f"{where}.from", "missing")
        if "lifetime" in ch:
            gamma = 1.0 / _q(ch, "lifetime", "time", where)
        elif "rate" in ch:
            gamma = _q(ch, "rate", "rate", where)
        else:
            raise ConfigError(where, "needs 'lifetime' or 'rate'")
        try:
            branches = {str(k): parse_number(v) for k, v in (ch.get("branches") or {}).items()}
            channels.append(DecayChannel(str(ch["from"]), gamma, branches))
        except ValueError as exc:
            raise ConfigError(f"{where}.branches", str(exc)) from None
    return channels


def _phase_jump_spec(**kw):
    try:
        return PhaseJumpSpec(**kw)
    except ValueError as exc:
        raise ConfigError("phase_jump", str(exc)) from None


def protocol_from_dict(raw: dict) -> ProtocolConfig:
    scheme = raw.get("scheme", "single_photon")
    protocol = raw.get("protocol", "cd_arp")
    kwargs = {"scheme_kind": scheme, "protocol": protocol}

    pulse = raw.get("pulse")
    if pulse is not None:
        fields = dict(
            omega_max=_q(pulse, "omega_max", "frequency", "pulse"),
            delta0=_q(pulse, "delta0", "frequency", "pulse"),
            T=_q(pulse, "T", "time", "pulse"),
            w=_q(pulse, "w", "time", "pulse", required=False),
            second_pulse_sign=int(pulse.get("second_pulse_sign", 1)),
        )
        try:
            kwargs["pulse"] = PulseParams(**fields)
        except ValueError as exc:
            raise ConfigError("pulse", str(exc)) from None
    if scheme == "two_photon":
        tp = raw.get("two_photon") or {}
        kwargs["Delta"] = _q(tp, "Delta", "frequency", "two_photon")
        kwargs["effective_sign"] = int(tp.get("effective_sign", 1))
    if scheme == "three_photon":
        th = raw.get("three_photon") or {}
        kwargs["omega2"] = _q(th, "omega2", "frequency", "three_photon")
        kwargs["omega3"] = _q(th, "omega3", "frequency", "three_photon")
    if protocol == "phase_jump":
        pj = raw.get("phase_jump") or {}
        kwargs["phase_jump"] = _phase_jump_spec(
            delta=_q(pj, "delta", "frequency", "phase_jump"),
            half_time=_q(pj, "half_time", "time", "phase_jump"),
            delta_psi=_q(pj, "delta_psi", "angle", "phase_jump"),
            effective_rabi=_q(pj, "effective_rabi", "frequency", "phase_jump", required=False),
            omega1=_q(pj, "omega1", "frequency", "phase_jump", required=False),
        )

    blockade = raw.get("blockade", "infinite")
    if isinstance(blockade, str) and blockade.strip().lower() == "infinite":
        kwargs["blockade"] = INFINITE
    else:
        kwargs["blockade"] = _q(raw, "blockade", "frequency", "<root>")

    kwargs["decay"] = tuple(_decay_channels(raw))
    kwargs["species"] = raw.get("species")

    pc = raw.get("phase_correction", "auto")
    if pc in ("auto", "none"):
        kwargs["phase_correction"] = pc
    else:
        kwargs["phase_correction"] = _q(raw, "phase_correction", "angle", "<root>")
    kwargs["final_hadamard"] = raw.get("final_hadamard", "target")

    integ = raw.get("integrator") or {}
    for key, cast in (("rtol", float), ("atol", float), ("n_samples", int), ("commutator_sign", int)):
        if key in integ:
            kwargs[key] = cast(integ[key])
    try:
        return ProtocolConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError("<root>", str(exc)) from None


def load_protocol(path=None, preset: str | None = None) -> tuple[ProtocolConfig, dict]:
    """Return the parsed config and the resolved raw mapping (for manifests)."""
    if path is None and preset is None:
        raise ConfigError("<root>", "give a config file or a preset")
    raw = load_preset_dict(preset) if path is None else load_config_dict(path)
    if path is not None and preset is not None:
        raw = _merge(load_preset_dict(preset), raw)
    return protocol_from_dict(raw), raw


def sweep_from_dict(raw: dict, base: ProtocolConfig | None = None, jobs: int = 1):
    from .sweep import Axis, SweepSpec

    base = base or protocol_from_dict(raw)
    sw = raw.get("sweep")
    if not sw:
        raise ConfigError("sweep", "missing sweep section")
    axes = []
    for i, ax in enumerate(sw.get("axes") or []):
        where = f"sweep.axes[{i}]"
        if "path" not in ax:
            raise ConfigError(f"{where}.path", "missing")
        unit = ax.get("unit")
        try:
            if "linspace" in ax:
                start, stop, num = ax["linspace"]
                axes.append(Axis.linspace(ax["path"], parse_number(start), parse_number(stop), int(num), unit))
            else:
                axes.append(Axis(ax["path"], tuple(parse_number(v) for v in ax["values"]), unit))
            axes[-1].internal(1.0)
            base.set(ax["path"], base.get(ax["path"]))
        except (KeyError, ValueError, UnitError, AttributeError) as exc:
            raise ConfigError(where, str(exc)) from None
    try:
        return SweepSpec(base, tuple(axes), sw.get("observable", "bell_fidelity"), jobs)
    except ValueError as exc:
        raise ConfigError("sweep", str(exc)) from None


def optimizer_from_dict(raw: dict, base: ProtocolConfig | None = None):
    from .sweep import FreeParam, OptimizerSpec

    base = base or protocol_from_dict(raw)
    op = raw.get("optimize")
    if not op:
        raise ConfigError("optimize", "missing optimize section")
    params = []
    for i, p in enumerate(op.get("params") or []):
        where = f"optimize.params[{i}]"
        try:
            lo, hi = (parse_number(b) for b in p["bounds"])
            params.append(FreeParam(p["path"], lo, hi, parse_number(p["initial"]), p.get("unit")))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(where, str(exc)) from None
    try:
        return OptimizerSpec(
            base,
            tuple(params),
            objective=op.get("objective", "bell_infidelity"),
            zero_decay=bool(op.get("zero_decay", True)),
            initial_simplex_scale=float(op.get("initial_simplex_scale", 0.1)),
            max_evals=int(op.get("max_evals", 200)),
            fatol=float(op.get("fatol", 1e-9)),
            xatol=float(op.get("xatol", 1e-4)),
        )
    except ValueError as exc:
        raise ConfigError("optimize", str(exc)) from None
