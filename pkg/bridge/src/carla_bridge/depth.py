"""24-bit RGB depth codec used by the simulator's depth camera.

A depth value d in [0, far] is stored across three 8-bit channels as

    code = round(d / far * (256^3 - 1))
    R = code & 255, G = (code >> 8) & 255, B = code >> 16

so decoding is depth = (R + 256*G + 256^2*B) / (256^3 - 1) * far.
The worst-case quantization error is far / (256^3 - 1) metres.
"""

from __future__ import annotations

import numpy as np

DEPTH_SCALE = 256 ** 3 - 1


def encode_depth_rgb(depth_m: np.ndarray, far_plane: float) -> np.ndarray:
    """Pack metric depth (H, W) float into an (H, W, 3) uint8 image."""
    code = np.rint(np.clip(depth_m / far_plane, 0.0, 1.0) * DEPTH_SCALE).astype(np.uint32)
    out = np.empty(depth_m.shape + (3,), dtype=np.uint8)
    out[..., 0] = code & 0xFF
    out[..., 1] = (code >> 8) & 0xFF
    out[..., 2] = (code >> 16) & 0xFF
    return out


def decode_depth_rgb(rgb: np.ndarray, far_plane: float) -> np.ndarray:
    """Unpack an (H, W, 3) uint8 depth image into (H, W) float32 metres."""
    channels = rgb.astype(np.uint32)
    code = channels[..., 0] + 256 * channels[..., 1] + 256 ** 2 * channels[..., 2]
    return (code.astype(np.float64) / DEPTH_SCALE * far_plane).astype(np.float32)
