#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace amalgam {

enum class ErrorKind { InvalidInput, Unsupported, ResourceLimit, NoExtension, Internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void invalid_input(const std::string& what) { throw Error(ErrorKind::InvalidInput, what); }
[[noreturn]] inline void internal_error(const std::string& what) { throw Error(ErrorKind::Internal, what); }

// Cap on candidate maps in any enumeration; AMALGAM_MAX_ELEMS overrides.
inline std::uint64_t enumeration_cap() {
  if (const char* env = std::getenv("AMALGAM_MAX_ELEMS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 1000000;
}

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::ResourceLimit: return "resource-limit";
    case ErrorKind::NoExtension: return "no-extension";
    case ErrorKind::Internal: return "internal-invariant";
  }
  return "unknown";
}

}  // namespace amalgam
