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
#include "panda/world.hpp"

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "panda/error.hpp"
#include "panda/rng.hpp"
#include "panda/tns_io.hpp"

namespace panda::world {
namespace {

struct Frequency {
  int fx = 0;
  int fy = 0;
};

// Canonical low-frequency pairs, ordered by |fx| + |fy|, that are below
// Nyquist and do not alias to zero on the patch grid.
std::vector<Frequency> LowFrequencies(std::size_t count, std::size_t size, std::size_t grid) {
  std::vector<Frequency> out;
  const int limit = static_cast<int>(size) / 2;
  const int g = static_cast<int>(grid);
  auto admissible = [&](int fx, int fy) {
    if (std::abs(fx) >= limit || fy >= limit) return false;
    return g <= 1 || ((fx % g) + g) % g != 0 || fy % g != 0;
  };
  for (int total = 1; total < 2 * limit; ++total) {
    for (int fy = 0; fy <= total; ++fy) {
      const int ax = total - fy;
      std::vector<Frequency> candidates;
      if (fy == 0) {
        candidates = {{ax, 0}};
      } else if (ax == 0) {
        candidates = {{0, fy}};
      } else {
        candidates = {{ax, fy}, {-ax, fy}};
      }
      for (const Frequency f : candidates) {
        if (!admissible(f.fx, f.fy)) continue;
        out.push_back(f);
        if (out.size() == count) return out;
      }
    }
  }
  return out;
}

double RoundF32(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace

void WorldSpec::Validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidSpec, msg); };
  if (num_classes < 2) fail("num_classes must be >= 2");
  if (feature_dim < num_classes + 1) fail("feature_dim must be >= num_classes + 1");
  if (image_size == 0 || channels == 0) fail("image_size and channels must be positive");
  if (patch_size == 0 || image_size % patch_size != 0) {
    fail("image_size must be divisible by patch_size");
  }
  if (image_size / patch_size < 2) fail("patch grid must be at least 2x2");
  if (!(corruption_strength >= 0.0) || !std::isfinite(corruption_strength)) {
    fail("corruption_strength must be >= 0");
  }
  if (!(spurious_align >= 0.0 && spurious_align <= 1.0)) fail("spurious_align must be in [0, 1]");
  if (num_domains < 1) fail("num_domains must be >= 1");
  const std::size_t pairs = (num_classes + 1) / 2;
  if (LowFrequencies(pairs, image_size, image_size / patch_size).size() < pairs) {
    fail("image_size too small for " + std::to_string(num_classes) + " class layouts");
  }
}

FrozenEncoder::FrozenEncoder(std::size_t dim, std::size_t input_size,
                             std::vector<double> projection)
    : dim_(dim),
      input_size_(input_size),
      projection_(std::move(projection)),
      gamma_(dim, 1.0),
      delta_(dim, 0.0) {
  if (projection_.size() != dim * input_size) {
    throw Error(ErrorCode::kDimensionMismatch, "projection must be dim x input_size");
  }
}

Vector FrozenEncoder::Project(const ImageTensor& image) const {
  if (image.size() != input_size_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "image has " + std::to_string(image.size()) + " values, encoder expects " +
                    std::to_string(input_size_));
  }
  const auto x = image.data();
  Vector h(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    const double* p = projection_.data() + k * input_size_;
    double s = 0.0;
    for (std::size_t i = 0; i < input_size_; ++i) s += p[i] * static_cast<double>(x[i]);
    h[k] = s;
  }
  return h;
}

Vector FrozenEncoder::Encode(const ImageTensor& image, std::span<const double> gamma,
                             std::span<const double> delta) const {
  if (gamma.size() != dim_ || delta.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "affine parameters do not match encoder dim");
  }
  Vector z = Project(image);
  for (std::size_t k = 0; k < dim_; ++k) z[k] = gamma[k] * z[k] + delta[k];
  return Normalize(z);
}

World MakeWorld(const WorldSpec& spec) {
  spec.Validate();
  World w;
  w.spec = spec;
  const std::size_t size = spec.image_size;
  const std::size_t ch = spec.channels;
  const std::size_t n = size * size * ch;
  const std::size_t c_count = spec.num_classes;

  const auto freqs = LowFrequencies((c_count + 1) / 2, size, size / spec.patch_size);
  for (std::size_t c = 0; c < c_count; ++c) {
    const Frequency f = freqs[c / 2];
    const double phase = (c % 2) * std::numbers::pi / 2.0;
    ImageTensor t(size, size, ch);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const double arg = 2.0 * std::numbers::pi *
                               (f.fx * static_cast<double>(x) + f.fy * static_cast<double>(y)) /
                               static_cast<double>(size) +
                           phase;
        const auto value = static_cast<float>(std::cos(arg));
        for (std::size_t k = 0; k < ch; ++k) t.at(y, x, k) = value;
      }
    }
    w.class_templates.push_back(std::move(t));
  }

  Rng rng = MakeRng(spec.seed, "world");
  std::normal_distribution<double> normal;
  w.domain_colors.assign(1, Vector(ch, 0.0));
  for (std::size_t d = 1; d <= spec.num_domains; ++d) {
    Vector color(ch);
    for (double& v : color) v = normal(rng);
    // RMS 1 per pixel: ||color|| = sqrt(channels).
    const double scale = std::sqrt(static_cast<double>(ch)) / Norm(color);
    for (double& v : color) v *= scale;
    w.domain_colors.push_back(std::move(color));
  }

  std::vector<double> projection(spec.feature_dim * n);
  auto set_row = [&](std::size_t k, std::vector<double> row) {
    const double inv = 1.0 / Norm(row);
    for (std::size_t i = 0; i < n; ++i) projection[k * n + i] = RoundF32(row[i] * inv);
  };
  for (std::size_t c = 0; c < c_count; ++c) {
    const auto data = w.class_templates[c].data();
    set_row(c, std::vector<double>(data.begin(), data.end()));
  }
  {
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = w.domain_colors[1][i % ch];
    set_row(c_count, std::move(row));
  }
  for (std::size_t k = c_count + 1; k < spec.feature_dim; ++k) {
    std::vector<double> row(n);
    for (double& v : row) v = normal(rng);
    set_row(k, std::move(row));
  }
  w.encoder = FrozenEncoder(spec.feature_dim, n, std::move(projection));

  std::vector<Vector> text(c_count, Vector(spec.feature_dim, 0.0));
  for (std::size_t c = 0; c < c_count; ++c) text[c][c] = 1.0;
  const double a = spec.spurious_align;
  text[0][0] = RoundF32(std::sqrt(1.0 - a * a));
  text[0][c_count] = RoundF32(a);
  w.bank = TextBank(std::move(text));
  return w;
}

std::vector<LabeledImage> SampleStream(const World& world, std::size_t n, std::size_t domain,
                                       std::uint64_t seed) {
  if (domain >= world.domain_colors.size()) {
    throw Error(ErrorCode::kUnknownDomain,
                "domain " + std::to_string(domain) + " (world has " +
                    std::to_string(world.spec.num_domains) + " corrupted domains)");
  }
  const WorldSpec& spec = world.spec;
  const std::size_t size = spec.image_size;
  const std::size_t ch = spec.channels;
  const double strength = domain == 0 ? 0.0 : spec.corruption_strength;
  const Vector& color = world.domain_colors[domain];

  Rng rng = MakeRng(seed, "stream", {domain});
  std::uniform_int_distribution<std::size_t> pick_label(0, spec.num_classes - 1);
  std::uniform_real_distribution<double> intensity_dist(kIntensityLow, kIntensityHigh);
  std::normal_distribution<double> normal;

  std::vector<LabeledImage> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t label = pick_label(rng);
    Vector coef(spec.num_classes);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      coef[c] = (c == label ? 1.0 : 0.0) + kClassJitter * normal(rng);
    }
    ImageTensor image(size, size, ch);
    auto px = image.data();
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      const auto t = world.class_templates[c].data();
      for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = static_cast<float>(px[i] + coef[c] * t[i]);
      }
    }
    if (strength > 0.0) {
      const double intensity = intensity_dist(rng);
      for (std::size_t i = 0; i < px.size(); ++i) {
        const double corruption = intensity * color[i % ch] + kTextureSigma * normal(rng);
        px[i] = static_cast<float>(px[i] + strength * corruption);
      }
    }
    out.push_back({std::move(image), label, domain});
  }
  return out;
}

std::string SpecToJson(const WorldSpec& spec) {
  nlohmann::ordered_json j;
  j["num_classes"] = spec.num_classes;
  j["image_size"] = spec.image_size;
  j["channels"] = spec.channels;
  j["feature_dim"] = spec.feature_dim;
  j["corruption_strength"] = spec.corruption_strength;
  j["spurious_align"] = spec.spurious_align;
  j["seed"] = spec.seed;
  j["patch_size"] = spec.patch_size;
  j["num_domains"] = spec.num_domains;
  return j.dump(2) + "\n";
}

WorldSpec SpecFromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    WorldSpec s;
    s.num_classes = j.value("num_classes", s.num_classes);
    s.image_size = j.value("image_size", s.image_size);
    s.channels = j.value("channels", s.channels);
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.corruption_strength = j.value("corruption_strength", s.corruption_strength);
    s.spurious_align = j.value("spurious_align", s.spurious_align);
    s.seed = j.value("seed", s.seed);
    s.patch_size = j.value("patch_size", s.patch_size);
    s.num_domains = j.value("num_domains", s.num_domains);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("spec.json: ") + e.what());
  }
}

void SaveWorld(const World& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::WriteTextFile(dir / "spec.json", SpecToJson(world.spec));
  io::WriteMatrix(dir / "projection.tns",
                  {world.encoder.dim(), world.encoder.input_size(), world.encoder.projection()});
  io::Matrix bank{world.bank.num_classes(), world.bank.dim(), {}};
  for (const Vector& t : world.bank.directions()) {
    bank.values.insert(bank.values.end(), t.begin(), t.end());
  }
  io::WriteMatrix(dir / "textbank.tns", bank);
}

World LoadWorld(const std::filesystem::path& dir) {
  const auto bytes = io::ReadFileBytes(dir / "spec.json");
  World w = MakeWorld(SpecFromJson(std::string(bytes.begin(), bytes.end())));
  io::Matrix proj = io::ReadMatrix(dir / "projection.tns");
  if (proj.rows != w.encoder.dim() || proj.cols != w.encoder.input_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "projection.tns does not match spec.json");
  }
  w.encoder = FrozenEncoder(proj.rows, proj.cols, std::move(proj.values));
  const io::Matrix bank = io::ReadMatrix(dir / "textbank.tns");
  if (bank.rows != w.spec.num_classes || bank.cols != w.spec.feature_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "textbank.tns does not match spec.json");
  }
  std::vector<Vector> text;
  for (std::size_t c = 0; c < bank.rows; ++c) {
    text.emplace_back(bank.values.begin() + c * bank.cols,
                      bank.values.begin() + (c + 1) * bank.cols);
  }
  w.bank = TextBank(std::move(text), w.bank.class_names());
  return w;
}

}  // namespace panda::world
