// Copyright 2026 The PANDA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "panda/adapt.hpp"
#include "panda/cli.hpp"
#include "panda/debias.hpp"
#include "panda/error.hpp"
#include "panda/experiment.hpp"
#include "panda/metrics.hpp"
#include "panda/nda.hpp"
#include "panda/theory.hpp"
#include "panda/world.hpp"

namespace py = pybind11;

namespace {

using panda::ImageTensor;
using panda::Vector;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

ImageTensor ToTensor(const FloatArray& a) {
  if (a.ndim() != 3) throw py::value_error("images must have shape (height, width, channels)");
  std::vector<float> data(a.data(), a.data() + a.size());
  return ImageTensor(a.shape(0), a.shape(1), a.shape(2), std::move(data));
}

FloatArray ToArray(const ImageTensor& t) {
  FloatArray out({t.height(), t.width(), t.channels()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

std::vector<ImageTensor> ToTensors(const std::vector<FloatArray>& arrays) {
  std::vector<ImageTensor> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) out.push_back(ToTensor(a));
  return out;
}

std::vector<FloatArray> ToArrays(const std::vector<ImageTensor>& tensors) {
  std::vector<FloatArray> out;
  out.reserve(tensors.size());
  for (const auto& t : tensors) out.push_back(ToArray(t));
  return out;
}

py::dict ChunkDict(const panda::adapt::ChunkReport& c) {
  py::dict d;
  d["chunk_index"] = c.chunk_index;
  d["n"] = c.n;
  d["accuracy"] = c.accuracy;
  d["l1_bias"] = c.l1_bias;
  d["mean_entropy"] = c.mean_entropy;
  return d;
}

py::dict Simulate(const std::string& method, std::size_t stream_len, std::size_t batch_size,
                  std::size_t chunk_size, double beta, std::optional<std::size_t> m, double lr,
                  const std::string& ablation, std::uint64_t seed, std::size_t domain,
                  const py::dict& world_overrides) {
  panda::world::WorldSpec spec;
  spec.seed = seed;
  for (const auto& [key, value] : world_overrides) {
    const auto name = key.cast<std::string>();
    if (name == "num_classes") spec.num_classes = value.cast<std::size_t>();
    else if (name == "image_size") spec.image_size = value.cast<std::size_t>();
    else if (name == "channels") spec.channels = value.cast<std::size_t>();
    else if (name == "feature_dim") spec.feature_dim = value.cast<std::size_t>();
    else if (name == "corruption_strength") spec.corruption_strength = value.cast<double>();
    else if (name == "spurious_align") spec.spurious_align = value.cast<double>();
    else if (name == "seed") spec.seed = value.cast<std::uint64_t>();
    else if (name == "patch_size") spec.patch_size = value.cast<std::size_t>();
    else if (name == "num_domains") spec.num_domains = value.cast<std::size_t>();
    else throw py::key_error("unknown world field '" + name + "'");
  }
  panda::experiment::SimulateConfig c;
  c.method = panda::experiment::ParseMethod(method);
  c.stream_len = stream_len;
  c.batch_size = batch_size;
  c.chunk_size = chunk_size;
  c.beta = beta;
  c.m = m;
  c.learning_rate = lr;
  c.ablation = panda::adapt::ParseAblation(ablation);
  c.seed = seed;
  c.domain = domain;

  panda::adapt::StreamResult r;
  {
    py::gil_scoped_release release;
    r = panda::experiment::Simulate(panda::world::MakeWorld(spec), c);
  }
  py::list chunks;
  for (const auto& ch : r.chunks) chunks.append(ChunkDict(ch));
  py::dict out;
  out["per_chunk"] = chunks;
  out["final"] = ChunkDict(r.overall);
  out["predictions"] = r.predictions;
  out["encoder_forwards"] = r.encoder_forwards;
  out["batches"] = r.batches;
  return out;
}

}  // namespace

PYBIND11_MODULE(_panda, mod) {
  mod.doc() = "C++ core of the PANDA test-time adaptation toolkit";
  mod.attr("__version__") = std::string(panda::cli::kToolVersion);

  py::register_exception<panda::Error>(mod, "PandaError", PyExc_ValueError);

  // theory
  mod.def("acc_no_offset", &panda::theory::AccNoOffset, py::arg("s"));
  mod.def("acc_with_offset", &panda::theory::AccWithOffset, py::arg("s"), py::arg("r"),
          py::arg("beta"));
  mod.def(
      "optimal_beta",
      [](double s, double r) {
        return panda::theory::OptimalBeta(panda::theory::GaussianWorld::Scalar(s, r, 0.0));
      },
      py::arg("s"), py::arg("r"));
  mod.def("reduce_high_d", [](const Vector& t, const std::vector<double>& R) {
    return panda::theory::ReduceHighD(t, R);
  }, py::arg("t"), py::arg("R"), "t^T R t for a unit t and row-major symmetric R.");
  mod.def(
      "mc_accuracy",
      [](double s, double r, double beta, std::uint64_t n_samples, std::uint64_t seed,
         std::optional<Vector> t) {
        const auto w = t ? panda::theory::GaussianWorld::Isotropic(s, r, beta, *t)
                         : panda::theory::GaussianWorld::Scalar(s, r, beta);
        panda::theory::McEstimate est;
        {
          py::gil_scoped_release release;
          est = panda::theory::McAccuracy(w, n_samples, seed);
        }
        return py::make_tuple(est.estimate, est.std_err);
      },
      py::arg("s"), py::arg("r"), py::arg("beta"), py::arg("n_samples") = 1'000'000,
      py::arg("seed") = 0, py::arg("t") = py::none(),
      "Monte Carlo accuracy estimate and standard error. Passing t uses R = r I.");

  // nda
  mod.def("default_m", &panda::nda::DefaultM, py::arg("batch_size"));
  mod.def(
      "patchify",
      [](const FloatArray& image, std::size_t ph, std::size_t pw) {
        const auto t = ToTensor(image);
        return ToArrays(panda::nda::Patchify(t, panda::nda::PatchGrid::For(t, ph, pw)));
      },
      py::arg("image"), py::arg("patch_h"), py::arg("patch_w"));
  mod.def(
      "depatchify",
      [](const std::vector<FloatArray>& patches, std::size_t height, std::size_t width) {
        const auto ts = ToTensors(patches);
        if (ts.empty()) throw py::value_error("no patches");
        const auto grid = panda::nda::PatchGrid::Make(height, width, ts[0].height(), ts[0].width());
        return ToArray(panda::nda::Depatchify(ts, grid));
      },
      py::arg("patches"), py::arg("height"), py::arg("width"));
  mod.def(
      "negative_augment",
      [](const std::vector<FloatArray>& batch, std::size_t ph, std::size_t pw,
         std::optional<std::size_t> m, std::uint64_t seed) {
        const auto ts = ToTensors(batch);
        if (ts.empty()) throw py::value_error("empty batch");
        const auto grid = panda::nda::PatchGrid::For(ts[0], ph, pw);
        return ToArrays(
            panda::nda::NegativeAugment(ts, grid, m.value_or(panda::nda::DefaultM(ts.size())), seed));
      },
      py::arg("batch"), py::arg("patch_h") = panda::nda::kDefaultPatchSize,
      py::arg("patch_w") = panda::nda::kDefaultPatchSize, py::arg("m") = py::none(),
      py::arg("seed") = 0);

  // debias
  mod.def("normalize", [](const Vector& v) { return panda::Normalize(v); }, py::arg("v"));
  mod.def(
      "mean_prototype",
      [](const std::vector<Vector>& negatives) { return panda::MeanPrototype(negatives).mean; },
      py::arg("negatives"));
  mod.def(
      "offset",
      [](const std::vector<Vector>& v, const Vector& prototype, double beta) {
        return panda::OffsetVectors(v, {prototype, 1}, beta);
      },
      py::arg("v"), py::arg("prototype"), py::arg("beta"));
  mod.def(
      "logits",
      [](const Vector& d, const std::vector<Vector>& text, double scale) {
        return panda::Logits(d, panda::TextBank(text), scale);
      },
      py::arg("d"), py::arg("text"), py::arg("scale") = panda::kLogitScale);
  mod.def(
      "predict",
      [](const Vector& d, const std::vector<Vector>& text) {
        return panda::Predict(d, panda::TextBank(text));
      },
      py::arg("d"), py::arg("text"));

  // metrics and adaptation
  mod.def("softmax_entropy", [](const Vector& l) { return panda::adapt::SoftmaxEntropy(l); },
          py::arg("logits"));
  mod.def(
      "ground_truth_dist",
      [](const std::vector<std::size_t>& labels, std::size_t num_classes) {
        return panda::metrics::GroundTruthDist(labels, num_classes).probs;
      },
      py::arg("labels"), py::arg("num_classes"));
  mod.def(
      "soft_pred_dist",
      [](const std::vector<Vector>& logits) { return panda::metrics::SoftPredDist(logits).probs; },
      py::arg("logits"));
  mod.def(
      "l1_distance",
      [](const Vector& p, const Vector& q) { return panda::metrics::L1Distance(p, q); },
      py::arg("p"), py::arg("q"));
  mod.def("simulate", &Simulate, py::arg("method") = "tent_panda",
          py::arg("stream_len") = 10'000, py::arg("batch_size") = 100,
          py::arg("chunk_size") = 1'000, py::arg("beta") = panda::adapt::kDefaultBeta,
          py::arg("m") = py::none(), py::arg("lr") = panda::adapt::kDefaultLearningRate,
          py::arg("ablation") = "full", py::arg("seed") = 0, py::arg("domain") = 1,
          py::arg("world") = py::dict(),
          "Run one method over a synthetic stream and return per-chunk metrics.");

  mod.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = panda::cli::Run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
