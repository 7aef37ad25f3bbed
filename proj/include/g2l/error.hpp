#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace g2l {

enum class errc {
  invalid_argument,
  decode,
  io,
  model,
  validation,
  internal,
};

inline std::string_view to_string(errc code) {
  switch (code) {
    case errc::invalid_argument: return "invalid-argument";
    case errc::decode: return "decode";
    case errc::io: return "io";
    case errc::model: return "model";
    case errc::validation: return "validation";
    case errc::internal: return "internal";
  }
  return "internal";
}

/// Library-wide exception. `stage()` names the pipeline stage that failed
/// ("decode", "classify", "ocr", ...) when the error crosses stage boundaries.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what, std::string stage = {})
      : std::runtime_error(what), code_(code), stage_(std::move(stage)) {}

  errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  error with_stage(std::string stage) const {
    return error(code_, what(), std::move(stage));
  }

 private:
  errc code_;
  std::string stage_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw error(code, what);
}

}  // namespace g2l
