// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "clients/transport.hpp"

#include <httplib.h>

#include <fstream>

#include "core/error.hpp"
#include "core/image.hpp"

namespace ctir {

using nlohmann::json;

namespace {

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) fail(ErrorCode::ConfigInvalid, "endpoint url '" + url + "' has no scheme");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

json elide_images(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    constexpr std::string_view kPrefix = "data:image/";
    if (std::string_view(s).starts_with(kPrefix)) return "sha256:" + sha256_hex(s);
    return j;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(elide_images(v));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = elide_images(it.value());
    return out;
  }
  return j;
}

}  // namespace

HttpTransport::HttpTransport(std::string base_url, std::string api_key, double timeout_s)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), timeout_s_(timeout_s) {
  split_url(base_url_);
}

json HttpTransport::post(const std::string& path, const json& body) {
  const auto [origin, prefix] = split_url(base_url_);
  httplib::Client client(origin);
  const auto secs = static_cast<time_t>(timeout_s_);
  const auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
      fail(ErrorCode::DeadlineExceeded, base_url_ + ": " + httplib::to_string(err));
    }
    fail(ErrorCode::EndpointUnavailable, base_url_ + ": " + httplib::to_string(err));
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    fail(ErrorCode::EndpointUnavailable, base_url_ + ": HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    fail(ErrorCode::MalformedReply, base_url_ + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512));
  }
  auto reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) fail(ErrorCode::MalformedReply, base_url_ + ": reply is not JSON");
  return reply;
}

FunctionTransport::FunctionTransport(Handler handler, std::string name)
    : handler_(std::move(handler)), name_(std::move(name)) {}

json FunctionTransport::post(const std::string& path, const json& body) { return handler_(path, body); }

std::string cassette_key(const std::string& path, const json& body) {
  return sha256_hex(path + "\n" + body.dump());
}

std::shared_ptr<CassetteTransport> CassetteTransport::recorder(std::shared_ptr<Transport> inner,
                                                               std::filesystem::path file) {
  std::shared_ptr<CassetteTransport> t(new CassetteTransport());
  t->inner_ = std::move(inner);
  t->file_ = std::move(file);
  if (t->file_.has_parent_path()) std::filesystem::create_directories(t->file_.parent_path());
  std::ofstream out(t->file_, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot create cassette " + t->file_.string());
  return t;
}

std::shared_ptr<CassetteTransport> CassetteTransport::player(std::filesystem::path file) {
  std::shared_ptr<CassetteTransport> t(new CassetteTransport());
  t->file_ = std::move(file);
  std::ifstream in(t->file_);
  if (!in) fail(ErrorCode::Io, "cannot open cassette " + t->file_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key") || !j.contains("response")) {
      fail(ErrorCode::MalformedRecord, t->file_.string() + ":" + std::to_string(lineno) + ": bad cassette entry");
    }
    t->recorded_[j["key"].get<std::string>()].push_back(j["response"]);
  }
  return t;
}

json CassetteTransport::post(const std::string& path, const json& body) {
  const auto key = cassette_key(path, body);
  if (inner_) {
    auto response = inner_->post(path, body);
    json entry{{"key", key}, {"request", {{"path", path}, {"body", elide_images(body)}}}, {"response", response}};
    std::lock_guard lock(mu_);
    std::ofstream out(file_, std::ios::app);
    out << entry.dump() << '\n';
    return response;
  }
  std::lock_guard lock(mu_);
  auto it = recorded_.find(key);
  if (it == recorded_.end() || it->second.empty()) {
    fail(ErrorCode::CassetteMiss, "no recorded response for request " + key.substr(0, 16) + " in " + file_.string());
  }
  auto& cursor = cursor_[key];
  const auto& response = it->second[cursor % it->second.size()];
  ++cursor;
  return response;
}

std::string CassetteTransport::identity() const {
  return (inner_ ? "record:" + inner_->identity() + "@" : "replay:") + file_.string();
}

}  // namespace ctir
