#ifndef ERSDP_ERRORS_HPP_
#define ERSDP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace ersdp {

/// An iterative routine stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_error)
      : std::runtime_error(what + " (best error " + std::to_string(best_error) + ")"), best_error_(best_error) {}
  double best_error() const { return best_error_; }

 private:
  double best_error_;
};

/// A non-finite value showed up where a finite one is required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ersdp

#endif  // ERSDP_ERRORS_HPP_
