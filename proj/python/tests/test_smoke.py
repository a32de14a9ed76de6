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

import json
import math

import numpy as np
import pytest

import panda


def test_theory_values():
    assert panda.acc_no_offset(1.0) == 0.75
    assert panda.acc_with_offset(2.0, 0.4, 0.0) == panda.acc_no_offset(2.0)
    assert panda.optimal_beta(1.5, 0.8) == 0.8
    est, se = panda.mc_accuracy(1.0, 0.0, 0.0, n_samples=200_000, seed=1)
    assert abs(est - 0.75) < 4 * se
    t = [0.6, 0.8, 0.0]
    est, se = panda.mc_accuracy(1.0, 0.5, 0.5, n_samples=100_000, seed=2, t=t)
    assert abs(est - panda.acc_with_offset(1.0, 0.5, 0.5)) < 4 * se


def test_errors_are_typed():
    with pytest.raises(panda.PandaError, match="CorrelationOutOfRange"):
        panda.acc_with_offset(1.0, 1.0, 0.5)
    with pytest.raises(panda.PandaError, match="TooFewSamples"):
        panda.mc_accuracy(1.0, 0.0, 0.0, n_samples=10)
    with pytest.raises(ValueError):
        panda.normalize([0.0, 0.0])


def test_patch_round_trip_and_nda():
    rng = np.random.default_rng(0)
    image = rng.standard_normal((64, 64, 3)).astype(np.float32)
    patches = panda.patchify(image, 32, 32)
    assert len(patches) == 4
    np.testing.assert_array_equal(panda.depatchify(patches, 64, 64), image)

    batch = [rng.random((16, 16, 1), dtype=np.float32) for _ in range(20)]
    negatives = panda.negative_augment(batch, 4, 4, seed=3)
    assert len(negatives) == panda.default_m(20) == 2
    again = panda.negative_augment(batch, 4, 4, seed=3)
    for a, b in zip(negatives, again):
        np.testing.assert_array_equal(a, b)
    source = np.sort(np.concatenate([b.ravel() for b in batch]))
    used = np.concatenate([n.ravel() for n in negatives])
    assert np.isin(used, source).all()


def test_debias_and_metrics():
    assert panda.normalize([3.0, 4.0]) == pytest.approx([0.6, 0.8])
    proto = panda.mean_prototype([[1.0, 0.0], [-1.0, 0.0]])
    assert proto == [0.0, 0.0]
    assert panda.offset([[1.0, 0.0]], [0.0, 1.0], 0.5) == [[1.0, -0.5]]
    text = [[1.0, 0.0], [0.0, 1.0]]
    assert panda.logits([1.0, 0.0], text) == [100.0, 0.0]
    assert panda.predict([0.2, 0.9], text) == 1
    assert panda.softmax_entropy([0.0] * 10) == pytest.approx(math.log(10))
    q = panda.ground_truth_dist([0, 1, 1, 1], 2)
    assert q == [0.25, 0.75]
    assert panda.l1_distance([1.0, 0.0], [0.0, 1.0]) == 2.0
    assert panda.soft_pred_dist([[0.0, 0.0]]) == [0.5, 0.5]


def test_simulate_small_world():
    world = dict(image_size=16, channels=2, feature_dim=7, num_classes=4, patch_size=4)
    tent = panda.simulate("tent", stream_len=400, batch_size=40, chunk_size=100, world=world)
    full = panda.simulate("tent_panda", stream_len=400, batch_size=40, chunk_size=100, world=world)
    assert len(tent["per_chunk"]) == 4
    assert full["encoder_forwards"] * 10 == tent["encoder_forwards"] * 11
    assert 0.0 <= full["final"]["accuracy"] <= 1.0
    with pytest.raises(panda.PandaError, match="EmptyStream"):
        panda.simulate("tent", stream_len=0)


def test_cli_in_process(tmp_path):
    code, out, _ = panda.run_cli(["verify-theorem", "--s-grid", "1", "--r-grid", "0.3",
                                  "--samples", "50000"])
    assert code == 0
    assert out.splitlines()[0] == "s,r,beta,analytic,mc_estimate,mc_stderr,pass"
    code, _, err = panda.run_cli(["verify-theorem", "--samples", "100"])
    assert code == 2 and "TooFewSamples" in err
    code, _, _ = panda.run_cli(["world-make", "--out-dir", str(tmp_path / "w"),
                                "--image-size", "16", "--patch-size", "4"])
    assert code == 0
    spec = json.loads((tmp_path / "w" / "spec.json").read_text())
    assert spec["image_size"] == 16
