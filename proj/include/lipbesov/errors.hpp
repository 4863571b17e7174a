#ifndef LIPBESOV_ERRORS_HPP_
#define LIPBESOV_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lipbesov {

// Base of every error the library throws. The CLI maps ExactInvariantError
// to exit status 2 and everything else to exit status 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// A declared quasi-triangle constant is violated by some triple.
class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, int i, int k, int j)
      : Error(what), i_(i), k_(k), j_(j) {}
  int i() const { return i_; }
  int k() const { return k_; }
  int j() const { return j_; }

 private:
  int i_, k_, j_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class FlavorMismatch : public Error {
 public:
  using Error::Error;
};

class IllConditionedFrame : public Error {
 public:
  IllConditionedFrame(const std::string& what, double lower_bound)
      : Error(what), lower_bound_(lower_bound) {}
  double lower_bound() const { return lower_bound_; }

 private:
  double lower_bound_;
};

class InadmissibleParams : public Error {
 public:
  using Error::Error;
};

// Raised when a constructional guarantee (partition, nesting, exact
// inequality) fails. Maps to exit status 2.
class ExactInvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace lipbesov

#endif  // LIPBESOV_ERRORS_HPP_
