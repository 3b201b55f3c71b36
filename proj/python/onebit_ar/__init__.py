# Copyright 2026 The onebit-ar Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""One-bit MIMO channel estimation: amplitude retrieval and a BIHT baseline."""

import json

from ._onebit_ar import (
    NumericalError,
    amplitude,
    biht_estimate,
    gen_training,
    khatri_rao_dict,
    ml_cost,
    ml_gradient,
    nmse,
    observe,
    odot_mix,
    run_ar,
    run_checks,
    secular_solve,
    sign_quantize,
    special_case_semi_unitary,
    special_case_unitary,
    steering_vector,
    synth_channel,
    training_structure,
    update_gamma,
    update_h,
)
from ._onebit_ar import _preset_json, _run_sweep_json

__all__ = [
    "NumericalError",
    "amplitude",
    "biht_estimate",
    "gen_training",
    "khatri_rao_dict",
    "ml_cost",
    "ml_gradient",
    "nmse",
    "observe",
    "odot_mix",
    "preset",
    "run_ar",
    "run_checks",
    "run_sweep",
    "secular_solve",
    "sign_quantize",
    "special_case_semi_unitary",
    "special_case_unitary",
    "steering_vector",
    "synth_channel",
    "training_structure",
    "update_gamma",
    "update_h",
]


def preset(name):
    """Experiment config for "downlink-fdd" or "uplink-tdd" as a dict."""
    return json.loads(_preset_json(name))


def run_sweep(config):
    """Run a Monte Carlo sweep. Returns (aggregate_rows, trial_rows).

    `config` uses the same keys as the CLI JSON files, including "preset".
    """
    return _run_sweep_json(json.dumps(config))
