#ifndef RMS_ERRORS_HPP
#define RMS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rms {

// Raised when an input violates a documented invariant. The message names
// the invariant that failed so callers can surface it verbatim.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an iterative procedure hits its cap without meeting its
// tolerance. Never used to hide a wrong value: procedures that can return
// a safe enclosure (e.g. spectral brackets) return it flagged instead.
class NotConvergedError : public std::runtime_error {
 public:
  explicit NotConvergedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rms

#endif  // RMS_ERRORS_HPP
