"""Experiment configuration: a versioned YAML document with validation.

Schema (version 1); every key is optional and shown with its default:

    version: 1
    endstates:
      v_minus: 1.0
      u_minus: 0.0
      v_plus: 1.2
    grid:
      half_width: auto      # or a number; auto sizes from speeds and t_final
      n_cells: 4096
    time:
      t_final: 200.0
      safety: 0.4
      observer_interval: 1.0
    form: divergence        # or primitive
    perturbation:
      family: gaussian      # none | gaussian | dipole | shifted_profile
      amplitude: 0.01       # for shifted_profile this is the translation
      width: 5.0
      center: 0.0
      apply_to: u           # u | v | both
    profile:
      delta_ceiling: 0.3
      tab_dx: 0.02
    tolerances: {}          # acceptance-threshold overrides
    output:
      directory: out
      emit_fields: false
    seed: 0

Validation collects every violated invariant into a single ValidationError.
The loaded Config re-derives all physical constants (sigma, delta_S, phi,
shift gain, weight constant) from the end states; they are echoed into every
output for reproducibility.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from .errors import ParseError, ValidationError
from .physics import sound_speed
from .profile import ProfileSolverParams, slow_rates, check_lax, shock_speed
from .relent import RelConstants

CONFIG_VERSION = 1
FAMILIES = ("none", "gaussian", "dipole", "shifted_profile")
APPLY_TO = ("u", "v", "both")


@dataclass(frozen=True)
class PerturbationSpec:
    family: str = "gaussian"
    amplitude: float = 0.01
    width: float = 5.0
    center: float = 0.0
    apply_to: str = "u"

    def support_radius(self):
        """Half-width of the region the perturbation occupies at t = 0."""
        if self.family == "none":
            return 0.0
        if self.family == "shifted_profile":
            return abs(self.amplitude)
        return abs(self.center) + 5.0 * self.width


@dataclass
class Config:
    v_minus: float = 1.0
    u_minus: float = 0.0
    v_plus: float = 1.2
    half_width: float | str = "auto"
    n_cells: int = 4096
    t_final: float = 200.0
    safety: float = 0.4
    observer_interval: float = 1.0
    form: str = "divergence"
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    delta_ceiling: float = 0.3
    tab_dx: float = 0.02
    tolerances: dict = field(default_factory=dict)
    out_dir: str = "out"
    emit_fields: bool = False
    seed: int = 0

    # ------------------------------------------------------------------
    def profile_params(self):
        return ProfileSolverParams(delta_ceiling=self.delta_ceiling, tab_dx=self.tab_dx)

    def endstates(self):
        return shock_speed(self.v_minus, self.u_minus, self.v_plus)

    def derived(self):
        """Physical constants re-derived from the end states."""
        es = self.endstates()
        rc = RelConstants.from_endstates(es)
        kl, kr = slow_rates(es)
        return {
            "sigma": es.sigma,
            "delta_S": es.delta_S,
            "u_plus": es.u_plus,
            "phi_minus": es.phi_minus,
            "phi_plus": es.phi_plus,
            "shift_gain_M": rc.M,
            "weight_constant_C_star": rc.C_star,
            "slow_rate": min(kl, kr),
        }

    def resolved_half_width(self):
        if self.half_width != "auto":
            return float(self.half_width)
        es = self.endstates()
        kl, kr = slow_rates(es)
        fastest = max(es.sigma, float(sound_speed(es.v_minus)))
        L = fastest * self.t_final + self.perturbation.support_radius() \
            + 10.0 / min(kl, kr) + 10.0
        return float(np.ceil(L))

    def grid(self):
        from .grid import Grid
        return Grid(self.resolved_half_width(), self.n_cells)

    def as_dict(self):
        d = asdict(self)
        d["version"] = CONFIG_VERSION
        d["half_width_resolved"] = self.resolved_half_width()
        return d

    # ------------------------------------------------------------------
    def validate(self):
        """Collect every violated invariant; raise once with the full list."""
        bad = []
        if self.v_minus <= 0 or self.v_plus <= 0:
            bad.append(f"volumes must be positive (v_minus={self.v_minus}, v_plus={self.v_plus})")
        elif self.v_plus <= self.v_minus:
            bad.append(
                "Lax condition violated: the 2-shock needs v_minus < v_plus "
                f"(got {self.v_minus} >= {self.v_plus})"
            )
        else:
            es = self.endstates()
            if not check_lax(es):
                bad.append("Lax condition violated by the derived shock speed")
            if es.delta_S > self.delta_ceiling:
                bad.append(
                    f"shock strength {es.delta_S:.4f} exceeds the ceiling {self.delta_ceiling}"
                )
        if self.n_cells < 16:
            bad.append(f"grid needs n_cells >= 16, got {self.n_cells}")
        if not 0.0 < self.safety <= 1.0:
            bad.append(f"safety must lie in (0, 1], got {self.safety}")
        if self.t_final < 0:
            bad.append(f"t_final must be nonnegative, got {self.t_final}")
        if self.observer_interval <= 0:
            bad.append(f"observer_interval must be positive, got {self.observer_interval}")
        if self.form not in ("primitive", "divergence"):
            bad.append(f"form must be primitive or divergence, got {self.form!r}")
        p = self.perturbation
        if p.family not in FAMILIES:
            bad.append(f"perturbation family must be one of {FAMILIES}, got {p.family!r}")
        if p.apply_to not in APPLY_TO:
            bad.append(f"perturbation apply_to must be one of {APPLY_TO}, got {p.apply_to!r}")
        if p.family in ("gaussian", "dipole") and p.width <= 0:
            bad.append(f"perturbation width must be positive, got {p.width}")

        if not bad and self.half_width != "auto":
            # domain margin: neither the shock (speed sigma, tail 10 slow
            # e-folds) nor the fastest outgoing wave may reach the boundary
            es = self.endstates()
            kl, kr = slow_rates(es)
            L = float(self.half_width)
            support = p.support_radius()
            need_shock = es.sigma * self.t_final + support + 10.0 / min(kl, kr)
            need_wave = float(sound_speed(es.v_minus)) * self.t_final + support
            need = max(need_shock, need_wave)
            if need >= L:
                bad.append(
                    f"domain margin violated: half_width {L} must exceed "
                    f"{need:.1f} (shock transit + perturbation support + tail width)"
                )
            if support >= L:
                bad.append(
                    f"perturbation support {support:.1f} does not fit inside half_width {L}"
                )
        if bad:
            raise ValidationError(bad)
        return self


def _section(doc, key):
    sec = doc.get(key, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ParseError(f"config section {key!r} must be a mapping")
    return sec


def config_from_dict(doc):
    """Build and validate a Config from a parsed document."""
    if not isinstance(doc, dict):
        raise ParseError("config document must be a mapping")
    version = doc.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ValidationError([f"unsupported config version {version!r}"])

    ends = _section(doc, "endstates")
    grid = _section(doc, "grid")
    time = _section(doc, "time")
    pert = _section(doc, "perturbation")
    prof = _section(doc, "profile")
    out = _section(doc, "output")

    known_top = {"version", "endstates", "grid", "time", "form", "perturbation",
                 "profile", "tolerances", "output", "seed"}
    unknown = set(doc) - known_top
    if unknown:
        raise ValidationError([f"unknown config keys: {sorted(unknown)}"])

    cfg = Config(
        v_minus=float(ends.get("v_minus", 1.0)),
        u_minus=float(ends.get("u_minus", 0.0)),
        v_plus=float(ends.get("v_plus", 1.2)),
        half_width=(grid.get("half_width", "auto")
                    if grid.get("half_width", "auto") == "auto"
                    else float(grid.get("half_width"))),
        n_cells=int(grid.get("n_cells", 4096)),
        t_final=float(time.get("t_final", 200.0)),
        safety=float(time.get("safety", 0.4)),
        observer_interval=float(time.get("observer_interval", 1.0)),
        form=str(doc.get("form", "divergence")),
        perturbation=PerturbationSpec(
            family=str(pert.get("family", "gaussian")),
            amplitude=float(pert.get("amplitude", 0.01)),
            width=float(pert.get("width", 5.0)),
            center=float(pert.get("center", 0.0)),
            apply_to=str(pert.get("apply_to", "u")),
        ),
        delta_ceiling=float(prof.get("delta_ceiling", 0.3)),
        tab_dx=float(prof.get("tab_dx", 0.02)),
        tolerances=dict(doc.get("tolerances") or {}),
        out_dir=str(out.get("directory", "out")),
        emit_fields=bool(out.get("emit_fields", False)),
        seed=int(doc.get("seed", 0)),
    )
    return cfg.validate()


def load_config(path):
    """Parse and validate a YAML configuration document."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from exc
    if doc is None:
        doc = {}
    return config_from_dict(doc)
