#pragma once

#include <stdexcept>
#include <string>

namespace chanfid {

enum class ErrorKind {
  dimension_mismatch,
  not_hermitian,
  bad_trace,
  not_positive,
  domain,        // argument outside the supported domain (|v|>1, negative p in strict mode, ...)
  incompatible,  // averaging method incompatible with the noise model or channel
  config,        // configuration parse / validation failure
  numerical,     // runtime numerical invariant violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace chanfid
