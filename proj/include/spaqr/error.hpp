#pragma once

#include <stdexcept>
#include <string>

namespace spaqr {

enum class ErrorClass { bad_input, singular_pivot, ill_conditioned };

const char* to_string(ErrorClass c);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

class BadInput : public Error {
 public:
  explicit BadInput(const std::string& what) : Error(ErrorClass::bad_input, what) {}
};

// Raised when a triangular factor has a pivot below the singularity floor.
class SingularPivot : public Error {
 public:
  SingularPivot(int index, double value, const std::string& context = "");
  int index() const { return index_; }
  double value() const { return value_; }

 private:
  int index_;
  double value_;
};

class IllConditioned : public Error {
 public:
  explicit IllConditioned(const std::string& what)
      : Error(ErrorClass::ill_conditioned, what) {}
};

}  // namespace spaqr
