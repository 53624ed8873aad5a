"""JSON containers for channel tensors and phase frames.

Layout (documented contract):

* channel tensor: ``{"kind": "channel_tensor", "n_users": M, "n_antennas": N,
  "taps": L, "seed": ..., "pdp": [...], "gains": [re, im, re, im, ...]}``
  with gains flattened in C order over (user, antenna, tap) and interleaved
  as real/imaginary doubles.
* phase frame: ``{"kind": "phase_frame", "n_antennas": N, "n_time": T,
  "angles": [...]}`` flattened in C order over (antenna, time).
"""

from __future__ import annotations

import json

import numpy as np

from .channel import ChannelTensor, PowerDelayProfile
from .frames import PhaseFrame


def channel_to_dict(H: ChannelTensor, seed=None, pdp: PowerDelayProfile | None = None) -> dict:
    interleaved = np.empty(2 * H.gains.size)
    interleaved[0::2] = H.gains.real.ravel()
    interleaved[1::2] = H.gains.imag.ravel()
    return {
        "kind": "channel_tensor",
        "n_users": H.n_users,
        "n_antennas": H.n_antennas,
        "taps": H.taps,
        "seed": seed,
        "pdp": None if pdp is None else pdp.tap_powers.tolist(),
        "gains": interleaved.tolist(),
    }


def channel_from_dict(d: dict) -> ChannelTensor:
    if d.get("kind") != "channel_tensor":
        raise ValueError("not a channel_tensor container")
    flat = np.asarray(d["gains"], dtype=float)
    gains = flat[0::2] + 1j * flat[1::2]
    return ChannelTensor(gains.reshape(d["n_users"], d["n_antennas"], d["taps"]))


def phase_frame_to_dict(theta: PhaseFrame) -> dict:
    return {
        "kind": "phase_frame",
        "n_antennas": theta.n_antennas,
        "n_time": theta.n_time,
        "angles": theta.angles.ravel().tolist(),
    }


def phase_frame_from_dict(d: dict) -> PhaseFrame:
    if d.get("kind") != "phase_frame":
        raise ValueError("not a phase_frame container")
    angles = np.asarray(d["angles"], dtype=float)
    return PhaseFrame(angles.reshape(d["n_antennas"], d["n_time"]))


def save_json(obj: dict, path):
    with open(path, "w") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
