#pragma once

#include <stdexcept>
#include <string>

namespace fit {

// Diagnostic classes surfaced by the CLI (one per compilation stage).
enum class ErrorClass {
  Syntax,
  Signature,
  Template,
  Search,
  Inconsistency,
  EmptyDomain,
  Decode,
  Io,
};

inline const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::Syntax: return "syntax";
    case ErrorClass::Signature: return "signature";
    case ErrorClass::Template: return "template";
    case ErrorClass::Search: return "search";
    case ErrorClass::Inconsistency: return "inconsistency";
    case ErrorClass::EmptyDomain: return "empty-domain";
    case ErrorClass::Decode: return "decode";
    case ErrorClass::Io: return "io";
  }
  return "error";
}

struct SourcePos {
  int line = 0;  // 1-based; 0 = unknown
  int col = 0;
};

class FitError : public std::runtime_error {
 public:
  FitError(ErrorClass cls, std::string msg, SourcePos pos = {}, std::string file = {})
      : std::runtime_error(msg), cls_(cls), msg_(std::move(msg)), pos_(pos), file_(std::move(file)) {}

  ErrorClass cls() const { return cls_; }
  const std::string& msg() const { return msg_; }
  SourcePos pos() const { return pos_; }
  const std::string& file() const { return file_; }
  void set_file(const std::string& f) { file_ = f; }

  // "file:line:col: class: message" with unknown parts dropped.
  std::string format() const {
    std::string s;
    if (!file_.empty()) s += file_ + ":";
    if (pos_.line > 0) {
      s += std::to_string(pos_.line) + ":";
      if (pos_.col > 0) s += std::to_string(pos_.col) + ":";
    }
    if (!s.empty()) s += " ";
    s += error_class_name(cls_);
    s += ": ";
    s += msg_;
    return s;
  }

 private:
  ErrorClass cls_;
  std::string msg_;
  SourcePos pos_;
  std::string file_;
};

}  // namespace fit
