#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace somno {

// Every failure in the library throws Error with a stable, machine-readable
// code string ("too-short", "invalid-band", ...) plus a human message.
// The CLI maps codes to exit statuses and a JSON error report.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace err {

inline Error invalid_band(const std::string& msg) { return {"invalid-band", msg}; }
inline Error too_short(const std::string& msg) { return {"too-short", msg}; }
inline Error no_keypoints(const std::string& msg) { return {"no-keypoints", msg}; }
inline Error no_signal(const std::string& msg) { return {"no-signal", msg}; }
inline Error domain(const std::string& msg) { return {"domain", msg}; }
inline Error bounds(const std::string& msg) { return {"bounds", msg}; }
inline Error config(const std::string& msg) { return {"config", msg}; }
inline Error no_data(const std::string& msg) { return {"no-data", msg}; }
inline Error insufficient_peaks(const std::string& msg) { return {"insufficient-peaks", msg}; }
inline Error no_breathing_structure(const std::string& msg) { return {"no-breathing-structure", msg}; }
inline Error no_valid_data(const std::string& msg) { return {"no-valid-data", msg}; }
inline Error alignment(const std::string& msg) { return {"alignment", msg}; }
inline Error division(const std::string& msg) { return {"division", msg}; }
inline Error spec(const std::string& msg) { return {"spec", msg}; }
inline Error io(const std::string& msg) { return {"io", msg}; }
inline Error usage(const std::string& msg) { return {"usage", msg}; }

}  // namespace err

}  // namespace somno
