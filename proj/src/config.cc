// Copyright 2026 The byola-speaker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "byola/config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "byola/errors.h"

namespace byola {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value) {
  throw DataError("config: bad value '" + value + "' for " + key);
}

double ToDouble(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) BadValue(key, value);
  return v;
}

template <typename Int>
Int ToInt(const std::string& key, const std::string& value) {
  Int v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) BadValue(key, value);
  return v;
}

bool ToBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  BadValue(key, value);
}

std::vector<double> ToList(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ToDouble(key, Trim(item)));
  if (out.empty()) BadValue(key, value);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [&](const std::string& key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = ToDouble(k, v);
      };
    };
    auto integer = [&](const std::string& key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        auto& field = member(c);
        field = ToInt<std::remove_reference_t<decltype(field)>>(k, v);
      };
    };
    auto flag = [&](const std::string& key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = ToBool(k, v);
      };
    };
    auto list = [&](const std::string& key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = ToList(k, v);
      };
    };
    auto path = [&](const std::string& key, auto member) {
      t[key] = [member](RunConfig& c, const std::string&, const std::string& v) {
        member(c) = v;
      };
    };
    auto range = [&](const std::string& key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        auto values = ToList(k, v);
        if (values.size() != 2) BadValue(k, v);
        member(c) = {values[0], values[1]};
      };
    };

    integer("mel.sample_rate", [](RunConfig& c) -> int& { return c.mel.sample_rate; });
    integer("mel.n_mels", [](RunConfig& c) -> int& { return c.mel.n_mels; });
    dbl("mel.window_ms", [](RunConfig& c) -> double& { return c.mel.window_ms; });
    dbl("mel.hop_ms", [](RunConfig& c) -> double& { return c.mel.hop_ms; });
    integer("mel.fft_size", [](RunConfig& c) -> int& { return c.mel.fft_size; });
    dbl("mel.fmin", [](RunConfig& c) -> double& { return c.mel.fmin; });
    dbl("mel.fmax", [](RunConfig& c) -> double& { return c.mel.fmax; });
    dbl("mel.log_floor", [](RunConfig& c) -> double& { return c.mel.log_floor; });

    flag("augment.enable_mixup", [](RunConfig& c) -> bool& { return c.augment.enable_mixup; });
    dbl("augment.mixup_alpha", [](RunConfig& c) -> double& { return c.augment.mixup_alpha; });
    integer("augment.mixup_bank_size", [](RunConfig& c) -> int& { return c.augment.mixup_bank_size; });
    flag("augment.enable_rrc", [](RunConfig& c) -> bool& { return c.augment.enable_rrc; });
    range("augment.rrc_freq_range",
          [](RunConfig& c) -> std::array<double, 2>& { return c.augment.rrc_freq_range; });
    range("augment.rrc_time_range",
          [](RunConfig& c) -> std::array<double, 2>& { return c.augment.rrc_time_range; });
    flag("augment.enable_gaussian", [](RunConfig& c) -> bool& { return c.augment.enable_gaussian; });
    dbl("augment.gaussian_std", [](RunConfig& c) -> double& { return c.augment.gaussian_std; });
    dbl("augment.gaussian_alpha", [](RunConfig& c) -> double& { return c.augment.gaussian_alpha; });
    dbl("augment.p_gaussian", [](RunConfig& c) -> double& { return c.augment.p_gaussian; });
    flag("augment.enable_prosodic", [](RunConfig& c) -> bool& { return c.augment.enable_prosodic; });
    list("augment.pitch_semitones",
         [](RunConfig& c) -> std::vector<double>& { return c.augment.pitch_semitones; });
    list("augment.stretch_factors",
         [](RunConfig& c) -> std::vector<double>& { return c.augment.stretch_factors; });
    dbl("augment.p_prosodic", [](RunConfig& c) -> double& { return c.augment.p_prosodic; });
    flag("augment.enable_noise", [](RunConfig& c) -> bool& { return c.augment.enable_noise; });
    list("augment.snr_db",
         [](RunConfig& c) -> std::vector<double>& { return c.augment.snr_db_choices; });
    dbl("augment.p_noise", [](RunConfig& c) -> double& { return c.augment.p_noise; });

    dbl("train.tau", [](RunConfig& c) -> double& { return c.train.tau; });
    integer("train.batch_size", [](RunConfig& c) -> int& { return c.train.batch_size; });
    integer("train.steps", [](RunConfig& c) -> int64_t& { return c.train.steps; });
    dbl("train.lr", [](RunConfig& c) -> double& { return c.train.adam.lr; });
    dbl("train.beta1", [](RunConfig& c) -> double& { return c.train.adam.beta1; });
    dbl("train.beta2", [](RunConfig& c) -> double& { return c.train.adam.beta2; });
    dbl("train.eps", [](RunConfig& c) -> double& { return c.train.adam.eps; });
    integer("train.checkpoint_every",
            [](RunConfig& c) -> int64_t& { return c.train.checkpoint_every; });
    integer("train.segment_frames", [](RunConfig& c) -> int& { return c.train.segment_frames; });
    integer("train.embedding_dim", [](RunConfig& c) -> int& { return c.train.embedding_dim; });
    integer("train.projector_hidden", [](RunConfig& c) -> int& { return c.train.projector_hidden; });
    integer("train.projection_dim", [](RunConfig& c) -> int& { return c.train.projection_dim; });
    integer("train.predictor_hidden", [](RunConfig& c) -> int& { return c.train.predictor_hidden; });
    flag("train.skip_bad_audio", [](RunConfig& c) -> bool& { return c.train.skip_bad_audio; });

    path("paths.manifest", [](RunConfig& c) -> std::string& { return c.paths.manifest; });
    path("paths.noise_dir", [](RunConfig& c) -> std::string& { return c.paths.noise_dir; });
    path("paths.stats", [](RunConfig& c) -> std::string& { return c.paths.stats; });
    path("paths.checkpoint_dir",
         [](RunConfig& c) -> std::string& { return c.paths.checkpoint_dir; });
    path("paths.log", [](RunConfig& c) -> std::string& { return c.paths.log; });

    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = ToInt<uint64_t>(k, v);
      c.train.seed = *c.seed;
    };
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::Set(const std::string& key, const std::string& value) {
  auto it = Setters().find(key);
  if (it == Setters().end()) throw DataError("config: unknown key '" + key + "'");
  it->second(*this, key, value);
}

void RunConfig::Validate() const {
  if (!seed) throw DataError("config: seed is required");
  mel.Validate();
  augment.Validate();
  train.Validate();
  namespace fs = std::filesystem;
  auto require = [](const std::string& p, const char* what) {
    if (!p.empty() && !fs::exists(p)) {
      throw DataError(std::string("config: ") + what + " does not exist: " + p);
    }
  };
  require(paths.manifest, "paths.manifest");
  require(paths.noise_dir, "paths.noise_dir");
  require(paths.stats, "paths.stats");
}

RunConfig ParseRunConfig(const std::string& text, const std::string& base_dir) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (key.rfind("paths.", 0) == 0 && !value.empty() && !base_dir.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (std::filesystem::path(base_dir) / value).lexically_normal().string();
    }
    config.Set(key, value);
  }
  return config;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRunConfig(ss.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace byola
