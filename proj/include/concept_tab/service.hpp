// Copyright 2026 The concept_tab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "concept_tab/explain_debug.hpp"
#include "concept_tab/pipeline.hpp"

namespace concept_tab {

// Immutable view of the interactive session. Every successful mutation
// installs a fresh state with revision + 1; readers never see partial edits.
struct ServiceState {
  std::uint64_t revision = 0;
  MaskSet pending_mask;  // edited through POST /api/mask
  MaskSet model_mask;    // mask the current model was trained with
  std::shared_ptr<const GbdtModel> reference;
  std::shared_ptr<const GbdtModel> model;
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  std::vector<DebugReport> history;
};

struct ServiceOptions {
  PipelineConfig config;
  std::optional<std::filesystem::path> session_path;
  std::string cors_origin = "*";
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

using QueryParams = std::map<std::string, std::string>;

class Service {
 public:
  // Restores the session file when it exists; otherwise trains the
  // reference model from the configuration.
  explicit Service(ServiceOptions options);

  ServiceResponse handle(const std::string& method, const std::string& path,
                         const QueryParams& query, const std::string& body);

  std::shared_ptr<const ServiceState> state() const;
  bool retrain_in_flight() const noexcept { return mutating_.load(); }
  const Dataset& dataset() const noexcept { return *data_; }
  const std::vector<ConceptScore>& scores() const noexcept { return scores_; }
  const ServiceOptions& options() const noexcept { return options_; }

  nlohmann::json session_json() const;
  void save_session(const std::filesystem::path& path) const;

 private:
  ServiceResponse get_concepts(const QueryParams& query) const;
  ServiceResponse get_importance() const;
  ServiceResponse get_visualize(const std::string& k, const QueryParams& query) const;
  ServiceResponse get_metrics() const;
  ServiceResponse get_history() const;
  ServiceResponse post_mask(const std::string& body);
  ServiceResponse post_retrain();

  void install(std::shared_ptr<const ServiceState> next);

  ServiceOptions options_;
  std::shared_ptr<const Dataset> data_;
  std::vector<ConceptScore> scores_;
  mutable std::mutex state_mutex_;
  std::shared_ptr<const ServiceState> state_;
  std::atomic<bool> mutating_{false};
  std::atomic<std::uint64_t> error_counter_{0};
};

// cpp-httplib front end around Service::handle, with CORS and an optional
// static mount for a prebuilt UI bundle.
class HttpServer {
 public:
  HttpServer(Service& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port.
  int bind(const std::string& host, int port);
  void serve();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace concept_tab
