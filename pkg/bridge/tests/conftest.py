import json
import subprocess

from carla_bridge.backends import BackendConfig, SyntheticBackend
from carla_bridge.capture import CaptureSession

SMALL = BackendConfig(width=160, height=120, lidar_points=400)


def make_backend(seed=0, config=SMALL, **kwargs):
    return SyntheticBackend(config, seed=seed, **kwargs)


def make_session(dump_root, frames=5, config=SMALL, **kwargs):
    return CaptureSession(dump_root=dump_root, frames_to_capture=frames,
                          config=config, **kwargs)


def validate_dump(dump_root):
    """Run the annotation toolkit's validator CLI against a dump."""
    proc = subprocess.run(["synthkit", "validate", str(dump_root)],
                          capture_output=True, text=True)
    return proc.returncode, json.loads(proc.stdout)


def make_script(script_path, template, seed=0, params=()):
    """Generate an accident scenario manifest via the toolkit CLI."""
    args = ["synthkit", "scenario", "accident", template,
            "--seed", str(seed), "--out", str(script_path)]
    for p in params:
        args += ["--param", p]
    subprocess.run(args, check=True, capture_output=True)
    return script_path


def dump_tree_bytes(root):
    """Every file in a dump keyed by relative path, for byte-level diffs."""
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}
