"""Configuration dataclasses, YAML loading and config hashing.

Every tunable lives here so that training settings can be compared by
config diff and every artifact can embed a provenance hash.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import yaml

SETTING_NAMES = ("Ours", "Oracle", "NoPro", "NoExt", "NoMem", "NoReg")

TERRAIN_FAMILIES = (
    "ObstaclesOnHilly",
    "ObstaclesOnBoxes",
    "PitsOnHilly",
    "PitsOnBoxes",
)


class ConfigError(ValueError):
    """Raised on malformed or incomplete configuration input."""


@dataclass
class TerrainConfig:
    resolution: float = 0.04          # m per height cell
    arena_side: float = 10.0          # m, square arena
    num_levels: int = 10              # curriculum difficulty levels
    hazards_per_level0: int = 2       # hazard count at difficulty 0 per 10x10 m
    hazards_per_step: int = 1         # extra hazards per difficulty level
    obstacle_height: tuple = (0.4, 0.8)
    pit_depth: tuple = (0.3, 0.6)
    half_extent: tuple = (0.2, 0.8)   # hazard footprint half extents, m
    hilly_amplitude0: float = 0.010   # m, roughness amplitude at difficulty 0
    hilly_amplitude_step: float = 0.014
    box_step0: float = 0.02           # m, plateau step height at difficulty 0
    box_step_step: float = 0.016
    box_cell: float = 1.8             # m, plateau size
    goal_distance: tuple = (4.0, 7.0)
    anchor_clearance: float = 0.9     # hazard-free radius around spawn/goal anchors
    border_margin: float = 0.6        # hazards keep this far from the arena edge
    placement_retries: int = 40


@dataclass
class PerceptionConfig:
    map_cells: int = 25               # robot-centric traversability map side
    map_resolution: float = 0.12      # m
    fine_resolution: float = 0.04     # m, rasterization before downsampling
    slope_limit_deg: float = 35.0
    step_limit: float = 0.25          # m
    slope_softness: float = 0.7       # traversability drop at the slope limit
    scan_points_per_foot: int = 52
    scan_rings: int = 4
    scan_radius: float = 0.3          # m around each nominal foot position


@dataclass
class DynamicsConfig:
    dt: float = 0.1                   # navigation control step, s
    substep: float = 0.0025           # internal integration step, s
    episode_length: float = 18.0      # s
    vel_time_constant: float = 0.3    # first-order command tracking lag, s
    yaw_time_constant: float = 0.3
    tracking_noise: float = 0.05      # m/s std, applied once per control step
    yaw_noise: float = 0.03           # rad/s std
    max_speed: float = 1.5            # command clamp, m/s
    max_yaw_rate: float = 1.0         # rad/s
    body_half_extents: tuple = (0.45, 0.3)   # nominal base collision box, m
    body_length_range: tuple = (0.3, 0.7)    # randomized on obstacle terrains
    body_width_range: tuple = (0.2, 0.5)
    base_clearance: float = 0.5       # base height above ground, m
    foot_offsets: tuple = ((0.34, 0.22), (0.34, -0.22), (-0.34, 0.22), (-0.34, -0.22))
    leg_reach: float = 0.35           # max foot sink before the base follows, m
    thigh_height: float = 0.45        # obstacles lower than this hit thigh/leg
    leg_height: float = 0.3
    pit_speed_factor: float = 0.3     # speed cap while a leg is in a pit
    pit_dwell_limit: float = 1.0      # s in a pit before falling
    pit_escape_time: float = 0.3      # s of motion away from the pit to break free
    pit_escape_speed: float = 0.1     # m/s minimum escape speed
    tilt_fall_limit: float = 0.6      # rad
    tilt_recovery: float = 0.3        # s, tilt decay constant after escape
    accel_history: int = 5            # frames at 20 ms
    accel_spacing: float = 0.02       # s
    impulse_history: int = 8          # frames at 2.5 ms
    arena_margin: float = 0.15        # m, robot center kept inside arena by this


@dataclass
class RewardConfig:
    # task terms, r = c1 / (1 + (err/c2)^2), active only in the final window
    rigid_c1: float = 10.0
    rigid_c2: float = 0.5             # m
    soft_c1: float = 2.0
    soft_c2: float = 4.0              # m
    heading_c1: float = 2.0
    heading_c2: float = 0.5           # rad
    stand_c1: float = 1.0
    stand_c2: float = 0.3             # m/s
    reward_window: float = 2.0        # T_r, s
    near_target: float = 0.5          # m, gates heading/stand terms and time penalty
    # event penalties
    fall_penalty: float = -50.0
    collision_penalty: float = -1.0   # per base/thigh contact event
    time_penalty: float = -0.05       # per step while far from the target
    # regularizers (kept small against the task scale)
    energy_weight: float = 0.002
    action_rate_weight: float = 0.008
    action_magnitude_weight: float = 0.002
    tracking_error_weight: float = 0.04
    overspeed_weight: float = 0.1
    yaw_rate_weight: float = 0.02
    heading_vel_weight: float = 0.05
    heading_vel_min_speed: float = 0.3    # m/s, below this direction is undefined
    min_command: float = 0.3          # m/s
    min_command_weight: float = 0.05
    min_command_far: float = 2.0      # m, penalty applies only beyond this


@dataclass
class PolicyConfig:
    hidden_size: int = 128            # H: recurrent state and critic latent size
    map_channels: tuple = (4, 8)
    map_feature: int = 64
    scan_feature: int = 64
    proprio_feature: int = 48
    nav_feature: int = 24
    mixing_feature: int = 128
    log_std_init: float = -0.5
    log_std_min: float = -4.0
    log_std_max: float = 1.0
    conv_map_encoder: bool = True     # flatten-affine encoder otherwise


@dataclass
class PPOConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_ratio: float = 0.2
    epochs: int = 4
    minibatches: int = 4
    learning_rate: float = 3e-4
    lr_linear_decay: bool = True
    entropy_coef: float = 0.005
    value_coef: float = 0.5
    lambda_reg: float = 0.5           # latent regularization coefficient
    horizon: int = 32                 # rollout and BPTT segment length
    max_grad_norm: float = 1.0


@dataclass
class TrainSettings:
    """One of the six training settings plus run-scale knobs."""

    setting: str = "Ours"
    visibility: float = 0.5           # fraction of hazards visible during training
    use_memory: bool = True
    zero_proprio: bool = False        # NoPro: accel, gravity, joint-state blocks
    zero_exteroception: bool = False  # NoExt: height-scan block
    num_envs: int = 128
    total_steps: int = 3_000_000
    seed: int = 1
    families: tuple = TERRAIN_FAMILIES
    log_interval: int = 10            # updates between curve rows
    ppo: PPOConfig = field(default_factory=PPOConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    terrain: TerrainConfig = field(default_factory=TerrainConfig)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)

    def validate(self):
        if self.setting not in SETTING_NAMES:
            raise ConfigError(
                f"settings.setting must be one of {SETTING_NAMES}, got {self.setting!r}"
            )
        if not 0.0 <= self.visibility <= 1.0:
            raise ConfigError("settings.visibility must lie in [0, 1]")
        if self.setting == "Oracle" and self.visibility != 1.0:
            raise ConfigError("Oracle training requires visibility == 1.0")
        for fam in self.families:
            if fam not in TERRAIN_FAMILIES:
                raise ConfigError(f"unknown terrain family {fam!r}")
        return self


def settings_for(name: str, base: TrainSettings | None = None) -> TrainSettings:
    """Build the named training setting from an Ours-like base config.

    The six settings differ from Ours by exactly one knob each, which keeps
    ablations honest and lets tests assert faithfulness by config diff.
    """
    s = dataclasses.replace(base) if base is not None else TrainSettings()
    s.ppo = dataclasses.replace(s.ppo)
    s.setting = name
    if name == "Ours":
        pass
    elif name == "Oracle":
        s.visibility = 1.0
    elif name == "NoPro":
        s.zero_proprio = True
    elif name == "NoExt":
        s.zero_exteroception = True
    elif name == "NoMem":
        s.use_memory = False
    elif name == "NoReg":
        s.ppo.lambda_reg = 0.0
    else:
        raise ConfigError(f"unknown setting {name!r}, expected one of {SETTING_NAMES}")
    return s.validate()


def _to_plain(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    return obj


def config_dict(cfg) -> dict:
    return _to_plain(cfg)


def config_hash(cfg) -> str:
    """Stable short hash for artifact provenance."""
    blob = json.dumps(config_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _apply_dict(obj, data: dict, path: str):
    names = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"unknown field: {path}{key}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current) and not isinstance(current, type):
            if not isinstance(value, dict):
                raise ConfigError(f"field {path}{key} expects a mapping")
            _apply_dict(current, value, f"{path}{key}.")
        elif isinstance(current, tuple) and isinstance(value, list):
            setattr(obj, key, tuple(tuple(v) if isinstance(v, list) else v for v in value))
        else:
            setattr(obj, key, value)


def settings_from_dict(data: dict) -> TrainSettings:
    s = TrainSettings()
    _apply_dict(s, data, "")
    return s.validate()


def load_settings(path: str) -> TrainSettings:
    """Load TrainSettings from a YAML file with named-field errors."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config root of {path} must be a mapping")
    return settings_from_dict(data)


def save_settings(cfg: TrainSettings, path: str):
    with open(path, "w") as fh:
        yaml.safe_dump(config_dict(cfg), fh, sort_keys=False)
