#pragma once

#include <string>
#include <utility>

#include "httplib.h"
#include "json.hpp"

#include "g2l/app/pipeline.hpp"

namespace g2l::app {

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline nlohmann::json generate_response(const InferenceReport& r) {
  auto opt = [](const std::optional<std::string>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"chart_class", to_string(r.chart_class)},
          {"confidence", r.confidence},
          {"title", r.summary.title},
          {"x_label", opt(r.summary.x_label)},
          {"y_label", opt(r.summary.y_label)},
          {"legend", r.summary.legend},
          {"legend_entries", r.summary.legend_entries},
          {"code", r.artifact.code},
          {"warnings", r.artifact.warnings}};
}

/// Stateless upload -> code transform over a model and template set that are
/// never mutated after construction.
class Service {
 public:
  Service(cnn::Model model, const codegen::TemplateSet& templates) : model_(std::move(model)), templates_(templates) {
    model_.validate();
  }

  HttpReply generate(const std::string& body) const {
    try {
      const auto bytes = std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
      return {200, generate_response(infer_bytes(bytes, model_, templates_)).dump() + "\n"};
    } catch (const error& e) {
      const int status = e.stage() == "decode" ? 400 : 500;
      return {status, nlohmann::json{{"error", e.what()}, {"stage", e.stage()}}.dump() + "\n"};
    } catch (const std::exception& e) {
      return {500, nlohmann::json{{"error", e.what()}, {"stage", "internal"}}.dump() + "\n"};
    }
  }

  void mount(httplib::Server& server) const {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
    server.Post("/api/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
      const auto reply = generate(req.body);
      res.status = reply.status;
      res.set_content(reply.body, reply.content_type);
    });
  }

 private:
  cnn::Model model_;
  const codegen::TemplateSet& templates_;
};

}  // namespace g2l::app
