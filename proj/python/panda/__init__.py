# Copyright 2026 The PANDA Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Negative-augmentation prototype debiasing for test-time adaptation.

Thin Python bindings over the C++ library. Images are float32 arrays of
shape (height, width, channels); embeddings are float64 vectors.
"""

from ._panda import (
    PandaError,
    __version__,
    acc_no_offset,
    acc_with_offset,
    default_m,
    ground_truth_dist,
    l1_distance,
    logits,
    mc_accuracy,
    mean_prototype,
    negative_augment,
    normalize,
    offset,
    optimal_beta,
    patchify,
    depatchify,
    predict,
    reduce_high_d,
    run_cli,
    simulate,
    soft_pred_dist,
    softmax_entropy,
)

__all__ = [
    "PandaError",
    "__version__",
    "acc_no_offset",
    "acc_with_offset",
    "default_m",
    "depatchify",
    "ground_truth_dist",
    "l1_distance",
    "logits",
    "mc_accuracy",
    "mean_prototype",
    "negative_augment",
    "normalize",
    "offset",
    "optimal_beta",
    "patchify",
    "predict",
    "reduce_high_d",
    "run_cli",
    "simulate",
    "soft_pred_dist",
    "softmax_entropy",
]
