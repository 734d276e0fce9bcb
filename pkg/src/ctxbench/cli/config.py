"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Every error names the offending
key and, when it comes from a file, the line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from ..noise import IDLE_MODES, NoiseParams

EXPERIMENTS = ("magic_square", "ksb", "ghz_game", "ghz_fidelity", "hlf")

# experiment -> default shots per instance
DEFAULT_SHOTS = {"magic_square": 10000, "ksb": 100, "ghz_game": 1000,
                 "ghz_fidelity": 1000, "hlf": 100}


class ConfigError(ValueError):
    pass


def _int_list(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.replace(" ", "").split(",") if v)


def _bool(s: str) -> bool:
    v = s.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _opt_float(s: str):
    return None if s.lower() == "none" else float(s)


# key -> (parser, help text); defaults live on RunConfig
KEYS = {
    "experiment": (str, "one of " + ", ".join(EXPERIMENTS)),
    "seed": (int, "master seed (required here or via --seed)"),
    "shots": (int, "shots per instance (default per experiment: "
              + ", ".join(f"{k} {v}" for k, v in DEFAULT_SHOTS.items()) + ")"),
    "out": (str, "output directory (default ./results)"),
    "noise": (str, "noise preset: none or paper (default none)"),
    "e_p_sq": (float, "single-qubit depolarizing probability"),
    "e_p_2q": (float, "two-qubit depolarizing probability"),
    "e0": (float, "readout error P(1|0)"),
    "e1": (float, "readout error P(0|1)"),
    "epsilon": (_opt_float, "symmetric readout error, overrides e0/e1"),
    "T1": (float, "relaxation time in seconds (default 73e-6)"),
    "moment_duration": (float, "duration of one moment in seconds (default 42e-9)"),
    "idle_mode": (str, "idle time from 'moment' counts or op 'durations'"),
    "variation": (str, "magic square variation: 1, 2 or both (default both)"),
    "rule": (str, "variation II scoring: strict or intersection (default strict)"),
    "budget": (_bool, "magic square per-mechanism error budget (default false)"),
    "contexts": (int, "KSB contexts per sequence (default 180)"),
    "sequences": (int, "independent KSB context sequences (default 1)"),
    "initial": (str, "KSB initial data state: 00, ++ or bell (default 00)"),
    "N": (_int_list, "GHZ sizes, comma separated (default 2,4,8,12,16,25)"),
    "games": (int, "GHZ question sets per growth pattern (default 20)"),
    "growth_seeds": (int, "GHZ growth patterns per size (default 50)"),
    "m": (int, "stabilizers sampled per fidelity estimate (default 50)"),
    "dd_pulses": (int, "DD pulses added to the single-qubit count (default 0)"),
    "sizes": (_int_list, "HLF qubit counts on centred grids (default 9,16,25,49,81,105)"),
    "instances": (int, "HLF instances per size (default 1000)"),
    "p_gate": (float, "HLF gate probability (default 0.5)"),
    "save_instances": (_bool, "write HLF instance files (default false)"),
}


@dataclass
class RunConfig:
    experiment: str = ""
    seed: int | None = None
    shots: int | None = None
    out: str | None = None
    noise: str = "none"
    e_p_sq: float | None = None
    e_p_2q: float | None = None
    e0: float | None = None
    e1: float | None = None
    epsilon: float | None = None
    T1: float | None = None
    moment_duration: float | None = None
    idle_mode: str | None = None
    variation: str = "both"
    rule: str = "strict"
    budget: bool = False
    contexts: int = 180
    sequences: int = 1
    initial: str = "00"
    N: tuple[int, ...] = (2, 4, 8, 12, 16, 25)
    games: int = 20
    growth_seeds: int = 50
    m: int = 50
    dd_pulses: int = 0
    sizes: tuple[int, ...] = (9, 16, 25, 49, 81, 105)
    instances: int = 1000
    p_gate: float = 0.5
    save_instances: bool = False
    lines: dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def shots_per_instance(self) -> int:
        return self.shots if self.shots is not None else DEFAULT_SHOTS[self.experiment]

    @property
    def variations(self) -> tuple[int, ...]:
        return (1, 2) if self.variation == "both" else (int(self.variation),)

    def noise_params(self) -> NoiseParams:
        base = NoiseParams.paper_rates() if self.noise == "paper" else NoiseParams()
        over = {k: getattr(self, k) for k in
                ("e_p_sq", "e_p_2q", "e0", "e1", "T1", "moment_duration", "idle_mode")
                if getattr(self, k) is not None}
        kw = {f.name: getattr(base, f.name) for f in fields(NoiseParams)}
        kw.update(over)
        if self.epsilon is not None:
            kw["epsilon"] = self.epsilon
        elif "e0" in over or "e1" in over:
            kw["epsilon"] = None
        return NoiseParams(**kw)

    def _fail(self, key: str, msg: str):
        line = self.lines.get(key)
        where = f"line {line}: " if line else ""
        raise ConfigError(f"{where}{key}: {msg}")

    def validate(self, require: bool = True) -> "RunConfig":
        """Range checks; with ``require`` also insist on experiment and seed."""
        if self.experiment and self.experiment not in EXPERIMENTS:
            self._fail("experiment", f"must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.seed is not None and self.seed < 0:
            self._fail("seed", "must be >= 0")
        for key in ("shots", "contexts", "sequences", "games", "growth_seeds", "m", "instances"):
            v = getattr(self, key)
            if v is not None and v < 1:
                self._fail(key, f"must be >= 1, got {v}")
        if self.dd_pulses < 0:
            self._fail("dd_pulses", "must be >= 0")
        if self.noise not in ("none", "paper"):
            self._fail("noise", "must be 'none' or 'paper'")
        if self.variation not in ("1", "2", "both"):
            self._fail("variation", "must be 1, 2 or both")
        if self.rule not in ("strict", "intersection"):
            self._fail("rule", "must be strict or intersection")
        if self.initial not in ("00", "++", "bell"):
            self._fail("initial", "must be 00, ++ or bell")
        if self.idle_mode is not None and self.idle_mode not in IDLE_MODES:
            self._fail("idle_mode", f"must be one of {IDLE_MODES}")
        if not 0.0 <= self.p_gate <= 1.0:
            self._fail("p_gate", "must lie in [0, 1]")
        if not self.N or min(self.N) < 2:
            self._fail("N", "every size must be >= 2")
        if not self.sizes or min(self.sizes) < 1:
            self._fail("sizes", "every size must be >= 1")
        try:
            self.noise_params()
        except ValueError as exc:
            key = next((k for k in ("e_p_sq", "e_p_2q", "e0", "e1", "epsilon", "T1",
                                    "moment_duration") if k in str(exc)), "noise")
            self._fail(key, str(exc))
        if require:
            if not self.experiment:
                self._fail("experiment", f"missing; choose one of {EXPERIMENTS}")
            if self.seed is None:
                self._fail("seed", "a seed is required (no wall-clock seeding)")
        return self


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: {key}: unknown key")
        if key in cfg.lines:
            raise ConfigError(f"line {lineno}: {key}: repeated key (first on line {cfg.lines[key]})")
        parser = KEYS[key][0]
        try:
            setattr(cfg, key, parser(value))
        except ValueError:
            raise ConfigError(f"line {lineno}: {key}: cannot parse {value!r}") from None
        cfg.lines[key] = lineno
    return cfg.validate(require=False)


def config_help() -> str:
    width = max(len(k) for k in KEYS)
    return "\n".join(f"  {k.ljust(width)}  {h}" for k, (_, h) in KEYS.items())
