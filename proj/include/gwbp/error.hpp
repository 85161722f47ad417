#pragma once

#include <stdexcept>
#include <string>

namespace gwbp {

enum class ErrorKind { parse, precondition, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_parse(const std::string& msg) { throw Error(ErrorKind::parse, msg); }

[[noreturn]] inline void throw_precondition(const std::string& msg) {
  throw Error(ErrorKind::precondition, msg);
}

[[noreturn]] inline void throw_internal(const std::string& msg) {
  throw Error(ErrorKind::internal, msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw_precondition(msg);
}

}  // namespace gwbp
