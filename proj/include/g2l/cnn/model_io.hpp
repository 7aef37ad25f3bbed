#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "g2l/cnn/network.hpp"
#include "g2l/error.hpp"
#include "g2l/raster/codec.hpp"

namespace g2l::cnn {

inline constexpr const char* kModelFormat = "g2l-cnn";
inline constexpr int kModelVersion = 1;

using Model = Network<float>;

namespace detail {

// Shortest decimal that reads back as the same float; written as a double so
// JSON readers that parse into double and narrow still recover it exactly.
inline double float_to_json_number(float f) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, f);
  *res.ptr = '\0';
  const double d = std::strtod(buf, nullptr);
  return static_cast<float>(d) == f ? d : static_cast<double>(f);
}

inline nlohmann::json float_array(const std::vector<float>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (float f : v) a.push_back(float_to_json_number(f));
  return a;
}

inline std::vector<float> read_float_array(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) fail(errc::model, what + " must be an array");
  std::vector<float> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) fail(errc::model, what + " holds a non-number");
    const double d = x.get<double>();
    if (!std::isfinite(d)) fail(errc::model, what + " holds a non-finite value");
    out.push_back(static_cast<float>(d));
  }
  return out;
}

}  // namespace detail

inline nlohmann::json model_to_json(const Model& m) {
  m.validate();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) {
    nlohmann::json j{{"kind", layer_kind(l)}, {"params", nlohmann::json::object()}};
    if (const auto* c = std::get_if<Conv<float>>(&l)) {
      j["params"] = {{"filters", c->filters}, {"k", c->k}, {"stride", c->stride}, {"in_channels", c->in_channels}};
      j["weights"] = detail::float_array(c->w);
      j["bias"] = detail::float_array(c->b);
    } else if (const auto* p = std::get_if<MaxPool>(&l)) {
      j["params"] = {{"k", p->k}};
    } else if (const auto* d = std::get_if<Dense<float>>(&l)) {
      j["params"] = {{"units", d->units}, {"inputs", d->inputs}};
      j["weights"] = detail::float_array(d->w);
      j["bias"] = detail::float_array(d->b);
    }
    layers.push_back(std::move(j));
  }
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"classes", m.classes},
          {"input_norm", {{"mean", m.norm_mean}, {"std", m.norm_std}}},
          {"input_shape", {m.input_shape.h, m.input_shape.w, m.input_shape.c}},
          {"layers", layers}};
}

inline Model model_from_json(const nlohmann::json& j) {
  Model m;
  try {
    if (j.value("format", std::string()) != kModelFormat)
      fail(errc::model, "not a " + std::string(kModelFormat) + " model file");
    const int version = j.at("version").get<int>();
    if (version != kModelVersion)
      fail(errc::model, "unsupported model version " + std::to_string(version) + " (expected " +
                            std::to_string(kModelVersion) + ")");
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.norm_mean = j.at("input_norm").at("mean").get<double>();
    m.norm_std = j.at("input_norm").at("std").get<double>();
    const auto shape = j.at("input_shape").get<std::vector<int>>();
    if (shape.size() != 3) fail(errc::model, "input_shape must have 3 dimensions");
    m.input_shape = {shape[0], shape[1], shape[2]};
    int idx = 0;
    for (const auto& lj : j.at("layers")) {
      const std::string kind = lj.at("kind").get<std::string>();
      const std::string where = "layer " + std::to_string(idx++) + " (" + kind + ")";
      const auto& p = lj.contains("params") ? lj.at("params") : nlohmann::json::object();
      if (kind == "conv") {
        Conv<float> c;
        c.filters = p.at("filters").get<int>();
        c.k = p.at("k").get<int>();
        c.stride = p.value("stride", 1);
        c.in_channels = p.at("in_channels").get<int>();
        c.w = detail::read_float_array(lj.at("weights"), where + " weights");
        c.b = detail::read_float_array(lj.at("bias"), where + " bias");
        m.layers.emplace_back(std::move(c));
      } else if (kind == "relu") {
        m.layers.emplace_back(Relu{});
      } else if (kind == "maxpool") {
        m.layers.emplace_back(MaxPool{p.at("k").get<int>()});
      } else if (kind == "flatten") {
        m.layers.emplace_back(Flatten{});
      } else if (kind == "dense") {
        Dense<float> d;
        d.units = p.at("units").get<int>();
        d.inputs = p.at("inputs").get<int>();
        d.w = detail::read_float_array(lj.at("weights"), where + " weights");
        d.b = detail::read_float_array(lj.at("bias"), where + " bias");
        m.layers.emplace_back(std::move(d));
      } else if (kind == "softmax") {
        m.layers.emplace_back(Softmax{});
      } else {
        fail(errc::model, "unknown layer kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::model, std::string("malformed model: ") + e.what());
  }
  m.validate();
  return m;
}

inline std::string model_to_string(const Model& m) { return model_to_json(m).dump() + "\n"; }

inline void save_model(const Model& m, const std::filesystem::path& path) {
  const std::string text = model_to_string(m);
  write_file_bytes(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline Model load_model(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const error& e) {
    fail(errc::model, std::string("cannot read model: ") + e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::model, path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const error& e) {
    fail(errc::model, path.string() + ": " + e.what());
  }
}

}  // namespace g2l::cnn
