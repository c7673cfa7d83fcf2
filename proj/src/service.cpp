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

#include "concept_tab/service.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "httplib.h"

#include "concept_tab/errors.hpp"

namespace concept_tab {

namespace {

constexpr const char* kSessionFormat = "concept_tab.session";
constexpr int kSessionVersion = 1;

ServiceResponse error_response(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

std::optional<std::size_t> parse_index(const std::string& s) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<double> parse_real(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

nlohmann::json probes_json(const RenderedImage& img) {
  nlohmann::json j = nlohmann::json::object();
  for (const Semantic s : kAllSemantics) j[to_string(s)] = measure_semantic(img, s);
  return j;
}

double test_accuracy(const GbdtModel& model, const Dataset& data, const MaskSet& mask) {
  return evaluate(model, mask.empty() ? data.test : mask_features(data.test, mask));
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  std::optional<nlohmann::json> session;
  if (options_.session_path && std::filesystem::exists(*options_.session_path)) {
    std::ifstream in(*options_.session_path);
    if (!in) throw IoError("cannot open session " + options_.session_path->string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("session " + options_.session_path->string() + ": " + e.what());
    }
    if (j.value("format", std::string()) != kSessionFormat ||
        j.value("version", 0) != kSessionVersion) {
      throw ConfigError("session " + options_.session_path->string() +
                        " has an unsupported format");
    }
    options_.config = config_from_json(j.at("config"));
    session = std::move(j);
  }
  options_.config.validate();
  data_ = std::make_shared<const Dataset>(load_dataset(options_.config));
  scores_ = score_matrix(data_->train);

  auto st = std::make_shared<ServiceState>();
  if (session) {
    const auto& j = *session;
    st->revision = j.at("revision").get<std::uint64_t>();
    st->pending_mask = MaskSet(j.at("pending_mask").get<std::set<std::size_t>>());
    st->model_mask = MaskSet(j.at("model_mask").get<std::set<std::size_t>>());
    st->reference = std::make_shared<const GbdtModel>(gbdt_from_json(j.at("reference")));
    st->model = std::make_shared<const GbdtModel>(gbdt_from_json(j.at("model")));
    for (const auto& h : j.at("history")) st->history.push_back(debug_report_from_json(h));
  } else {
    st->reference = std::make_shared<const GbdtModel>(train_gbdt(data_->train, options_.config.gbdt));
    st->model = st->reference;
    st->pending_mask = options_.config.mask;
  }
  st->pending_mask.validate(data_->train.dims());
  st->accuracy_before = test_accuracy(*st->reference, *data_, MaskSet{});
  st->accuracy_after = test_accuracy(*st->model, *data_, st->model_mask);
  state_ = std::move(st);
}

std::shared_ptr<const ServiceState> Service::state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

void Service::install(std::shared_ptr<const ServiceState> next) {
  {
    std::lock_guard lock(state_mutex_);
    state_ = next;
  }
  if (options_.session_path) save_session(*options_.session_path);
}

nlohmann::json Service::session_json() const {
  const auto st = state();
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : st->history) history.push_back(to_json(h));
  return {{"format", kSessionFormat},
          {"version", kSessionVersion},
          {"config", to_json(options_.config)},
          {"revision", st->revision},
          {"pending_mask", st->pending_mask.indices()},
          {"model_mask", st->model_mask.indices()},
          {"reference", to_json(*st->reference)},
          {"model", to_json(*st->model)},
          {"history", history}};
}

void Service::save_session(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write session " + tmp.string());
    out << session_json().dump(1) << '\n';
    if (!out) throw IoError("cannot write session " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ServiceResponse Service::handle(const std::string& method, const std::string& path,
                                const QueryParams& query, const std::string& body) {
  try {
    static const std::string kVisualize = "/api/visualize/";
    const bool is_get = method == "GET";
    const bool is_post = method == "POST";
    if (path == "/api/concepts") {
      if (is_get) return get_concepts(query);
    } else if (path == "/api/importance") {
      if (is_get) return get_importance();
    } else if (path.rfind(kVisualize, 0) == 0) {
      if (is_get) return get_visualize(path.substr(kVisualize.size()), query);
    } else if (path == "/api/metrics") {
      if (is_get) return get_metrics();
    } else if (path == "/api/history") {
      if (is_get) return get_history();
    } else if (path == "/api/mask") {
      if (is_post) return post_mask(body);
    } else if (path == "/api/retrain") {
      if (is_post) return post_retrain();
    } else {
      return error_response(404, "no route " + path);
    }
    return error_response(405, "method " + method + " not allowed on " + path);
  } catch (const std::exception& e) {
    char id[32];
    std::snprintf(id, sizeof id, "e%08llx",
                  static_cast<unsigned long long>(error_counter_.fetch_add(1) + 1));
    std::cerr << "internal error " << id << ": " << e.what() << '\n';
    return {500, {{"error", "internal error"}, {"id", id}}};
  }
}

ServiceResponse Service::get_concepts(const QueryParams& query) const {
  const auto st = state();
  const std::size_t d = scores_.size();
  std::size_t m = std::min<std::size_t>(10, d);
  if (const auto it = query.find("m"); it != query.end()) {
    const auto v = parse_index(it->second);
    if (!v || *v == 0) return error_response(400, "m must be a positive integer");
    if (*v > d) return error_response(400, "m exceeds the feature count " + std::to_string(d));
    m = *v;
  }
  nlohmann::json concepts = nlohmann::json::array();
  for (const std::size_t k : top_m_concepts(scores_, m)) {
    const auto imp = st->model->importance.find(k);
    nlohmann::json c = {{"k", k},
                        {"w", scores_[k].w},
                        {"importance", imp == st->model->importance.end() ? 0.0 : imp->second},
                        {"masked", st->pending_mask.contains(k)}};
    if (data_->spec) {
      if (const ConceptDim* cd = data_->spec->concept_for_dim(k)) {
        c["semantic"] = to_string(cd->semantic);
      }
    }
    concepts.push_back(std::move(c));
  }
  return {200, {{"revision", st->revision}, {"m", m}, {"concepts", concepts}}};
}

ServiceResponse Service::get_importance() const {
  const auto st = state();
  return {200,
          {{"revision", st->revision},
           {"importance", importance_list_json(st->model->importance)},
           {"model_mask", st->model_mask.indices()}}};
}

ServiceResponse Service::get_visualize(const std::string& k_text, const QueryParams& query) const {
  const auto k = parse_index(k_text);
  if (!k) return error_response(400, "feature index must be a non-negative integer");
  if (*k >= data_->train.dims()) return error_response(404, "unknown feature " + k_text);
  if (!data_->spec) return error_response(404, "this task has no image generator");
  double lambda = options_.config.lambda;
  if (const auto it = query.find("lambda"); it != query.end()) {
    const auto v = parse_real(it->second);
    if (!v) return error_response(400, "lambda must be a finite number");
    lambda = *v;
  }
  std::size_t sample = 0;
  if (const auto it = query.find("sample"); it != query.end()) {
    const auto v = parse_index(it->second);
    if (!v || *v >= data_->test_raw.count()) {
      return error_response(400, "sample must index a test row");
    }
    sample = *v;
  }
  const auto triple = visualize_concept(*data_->spec, data_->test_raw.row(sample), *k,
                                        lambda * data_->stats.scale(*k));
  const std::pair<const char*, const RenderedImage*> parts[] = {
      {"minus", &triple.minus}, {"base", &triple.base}, {"plus", &triple.plus}};
  nlohmann::json images = nlohmann::json::object();
  nlohmann::json probes = nlohmann::json::object();
  for (const auto& [tag, img] : parts) {
    images[tag] = httplib::detail::base64_encode(encode_pgm(*img));
    probes[tag] = probes_json(*img);
  }
  nlohmann::json out = {{"revision", state()->revision}, {"k", *k},        {"lambda", lambda},
                        {"sample", sample},              {"encoding", "pgm+base64"},
                        {"images", images},              {"probes", probes}};
  if (const ConceptDim* cd = data_->spec->concept_for_dim(*k)) {
    out["semantic"] = to_string(cd->semantic);
  }
  return {200, out};
}

ServiceResponse Service::get_metrics() const {
  const auto st = state();
  return {200,
          {{"revision", st->revision},
           {"accuracy_before", st->accuracy_before},
           {"accuracy_after", st->accuracy_after},
           {"pending_mask", st->pending_mask.indices()},
           {"model_mask", st->model_mask.indices()},
           {"retrain_in_flight", retrain_in_flight()}}};
}

ServiceResponse Service::get_history() const {
  const auto st = state();
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : st->history) history.push_back(to_json(h));
  return {200, {{"revision", st->revision}, {"history", history}}};
}

namespace {

// Releases the single mutation slot on scope exit.
class MutationGuard {
 public:
  explicit MutationGuard(std::atomic<bool>& flag) : flag_(flag) {
    acquired_ = !flag_.exchange(true);
  }
  ~MutationGuard() {
    if (acquired_) flag_.store(false);
  }
  bool acquired() const noexcept { return acquired_; }

 private:
  std::atomic<bool>& flag_;
  bool acquired_ = false;
};

}  // namespace

ServiceResponse Service::post_mask(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body.empty() ? std::string("{}") : body);
  } catch (const nlohmann::json::parse_error&) {
    return error_response(400, "body is not valid JSON");
  }
  if (!j.is_object()) return error_response(400, "body must be a JSON object");
  std::vector<std::size_t> add;
  std::vector<std::size_t> remove;
  for (const auto& [key, value] : j.items()) {
    if (key != "add" && key != "remove") return error_response(400, "unknown field " + key);
    if (!value.is_array()) return error_response(400, key + " must be an array");
    for (const auto& e : value) {
      if (!e.is_number_unsigned()) {
        return error_response(400, key + " entries must be non-negative integers");
      }
      const auto k = e.get<std::size_t>();
      if (k >= data_->train.dims()) return error_response(404, "unknown feature " + std::to_string(k));
      (key == "add" ? add : remove).push_back(k);
    }
  }
  MutationGuard guard(mutating_);
  if (!guard.acquired()) return error_response(409, "another mutation is in flight");
  auto next = std::make_shared<ServiceState>(*state());
  for (const std::size_t k : add) next->pending_mask.add(k);
  for (const std::size_t k : remove) next->pending_mask.remove(k);
  next->revision += 1;
  const auto revision = next->revision;
  const auto mask = next->pending_mask.indices();
  install(std::move(next));
  return {200, {{"revision", revision}, {"pending_mask", mask}}};
}

ServiceResponse Service::post_retrain() {
  MutationGuard guard(mutating_);
  if (!guard.acquired()) return error_response(409, "a retrain is already in flight");
  const auto current = state();
  GbdtModel debugged;
  const DebugReport report =
      debug_mask_retrain(*current->reference, data_->train, data_->test, current->pending_mask,
                         options_.config.gbdt, &debugged);
  auto next = std::make_shared<ServiceState>(*current);
  next->model = std::make_shared<const GbdtModel>(std::move(debugged));
  next->model_mask = current->pending_mask;
  next->accuracy_before = report.accuracy_before;
  next->accuracy_after = report.accuracy_after;
  next->history.push_back(report);
  next->revision += 1;
  const auto revision = next->revision;
  install(std::move(next));
  nlohmann::json out = to_json(report);
  out["revision"] = revision;
  return {200, out};
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  const std::string origin = service.options().cors_origin;
  auto cors = [origin](httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  };
  auto dispatch = [this, cors](const httplib::Request& req, httplib::Response& res) {
    QueryParams query;
    for (const auto& [key, value] : req.params) query.emplace(key, value);
    const ServiceResponse r = impl_->service.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
    cors(res);
  };
  svr.Get(R"(/api/.*)", dispatch);
  svr.Post(R"(/api/.*)", dispatch);
  svr.Options(R"(/api/.*)", [cors](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    cors(res);
  });
  if (static_dir && !svr.set_mount_point("/", static_dir->string())) {
    throw IoError("cannot serve static directory " + static_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) {
    const int bound = svr.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!svr.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace concept_tab
