/*
 * Copyright 2026 The miaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MIAUDIT_TOOLS_RUN_MANIFEST_HPP_
#define MIAUDIT_TOOLS_RUN_MANIFEST_HPP_

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace miaudit::cli {

// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);

// Collects the resolved configuration of one command and writes it as
// run_manifest.json next to the outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  nlohmann::ordered_json& config() { return config_; }
  nlohmann::ordered_json& results() { return results_; }
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  // Wall-clock fields (created_utc, runtime_s) only when record_time is set;
  // without them the file is a pure function of the inputs.
  void write(const std::filesystem::path& dir, bool record_time = false) const;

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json results_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  std::vector<std::string> outputs_;
};

}  // namespace miaudit::cli

#endif  // MIAUDIT_TOOLS_RUN_MANIFEST_HPP_
