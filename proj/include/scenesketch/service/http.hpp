// Copyright 2026 The scenesketch Authors.
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

#include <string>

// Eigen must be parsed before httplib, whose <resolv.h> defines `_res`.
#include "scenesketch/service/service.hpp"
// clang-format off
#include "httplib.h"
#include "json.hpp"
// clang-format on

namespace scenesketch::service {

// JSON over HTTP. Every error body is {"error": message}.
//
//   GET  /health
//   POST /session                       -> {"session": id}
//   GET  /session/{id}                  -> state
//   POST /session/{id}/instruction      {"text"} -> turn result
//   POST /session/{id}/redraw           {"object_id", "polylines"} -> state
//   POST /session/{id}/undo             -> state
//   GET  /session/{id}/attention[?turn] -> attention view
//   GET  /session/{id}/export           -> export document
//   POST /session/import                export document -> {"session": id}

namespace detail {

inline void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    reply(res, 200, fn());
  } catch (const ServiceError& e) {
    reply(res, e.status(), {{"error", e.what()}});
  } catch (const nlohmann::json::exception& e) {
    reply(res, 400, {{"error", std::string("bad request: ") + e.what()}});
  } catch (const std::exception& e) {
    reply(res, 500, {{"error", e.what()}});
  }
}

inline nlohmann::json body_json(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ServiceError(400, std::string("body is not JSON: ") + e.what());
  }
}

}  // namespace detail

inline void install_routes(httplib::Server& server, SketchService& svc) {
  using detail::guarded;
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    detail::reply(res, 200, {{"status", "ok"}});
  });
  server.Post("/session", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return nlohmann::json{{"session", svc.create_session()}}; });
  });
  server.Post("/session/import", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return nlohmann::json{{"session", svc.import_session(detail::body_json(req))}}; });
  });
  server.Get(R"(/session/([A-Za-z0-9_-]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.state(req.matches[1]); });
  });
  server.Post(R"(/session/([A-Za-z0-9_-]+)/instruction)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const nlohmann::json body = detail::body_json(req);
      if (!body.contains("text") || !body["text"].is_string()) throw ServiceError(400, "missing \"text\"");
      const std::string id = req.matches[1];
      return SketchService::result_json(id, svc.post_instruction(id, body["text"].get<std::string>()));
    });
  });
  server.Post(R"(/session/([A-Za-z0-9_-]+)/redraw)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const nlohmann::json body = detail::body_json(req);
      if (!body.contains("object_id") || !body["object_id"].is_number_unsigned()) {
        throw ServiceError(400, "missing \"object_id\"");
      }
      return svc.redraw_object(req.matches[1], body["object_id"].get<std::uint64_t>(),
                               polylines_from_json(body.value("polylines", nlohmann::json::array())));
    });
  });
  server.Post(R"(/session/([A-Za-z0-9_-]+)/undo)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.undo(req.matches[1]); });
  });
  server.Get(R"(/session/([A-Za-z0-9_-]+)/attention)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      int turn = -1;
      if (req.has_param("turn")) {
        try {
          turn = std::stoi(req.get_param_value("turn"));
        } catch (const std::exception&) {
          throw ServiceError(400, "turn must be an integer");
        }
      }
      return attention_to_json(svc.attention(req.matches[1], turn));
    });
  });
  server.Get(R"(/session/([A-Za-z0-9_-]+)/export)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return svc.export_session(req.matches[1]); });
  });
}

}  // namespace scenesketch::service
